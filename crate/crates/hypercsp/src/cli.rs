//! Command-line front end. [`execute`] runs a parsed command and returns
//! what the binary prints, so every command is testable in-process.
//!
//! Exit codes: 0 success or SOLVED, 1 UNSAT, 2 INCONCLUSIVE, 3 bad input,
//! 4 a failure during computation.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::formats::{self, FormatError};
use crate::generate::{Generator, InstanceShape};
use crate::implication_engine::{
    build_implication_graph, check_implication, compose_implications, detect_critical, detect_equality_implication,
    impl_properties_check, is_implicationally_simple, relational_compose, witness_set, GraphSearch, ImplError,
    Implication,
};
use crate::minimality_engine::{kl_minimalize_with, Instance, MinError, Schedule};
use crate::orbit_algebra::Universe;
use crate::polymorphism_probe::{
    find_binary_injection, find_local_nu, probe_domains, probe_witness, ProbeError, ProbeReport, DEFAULT_BUDGET,
};
use crate::pp_engine::Evaluator;
use crate::solver::{Inconclusive, Outcome, SolveConfig, SolveError, Solver};
use crate::template::Template;

#[derive(Parser, Debug)]
#[command(name = "hypercsp", version, about = "CSP workbench over homogeneous hypergraph templates")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Global {
    /// Built-in universe (`hypergraph<k>`, `graph`, `k3free`) or a universe
    /// file; overrides the one named by the template
    #[arg(long, global = true)]
    pub universe: Option<String>,
    /// Minimality level k (defaults to the universe arity)
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Minimality level l (defaults to max(k + 1, b_B))
    #[arg(long, global = true)]
    pub ell: Option<usize>,
    #[arg(long, global = true)]
    pub max_atoms: Option<usize>,
    #[arg(long, global = true)]
    pub max_vars: Option<usize>,
    #[arg(long, global = true)]
    pub closure_depth: Option<usize>,
    /// Candidate budget for graph searches, node budget for probes
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; never changes the output
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Print the solver trace to stderr
    #[arg(long, global = true)]
    pub trace: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve an instance of CSP(template)
    Solve {
        instance: PathBuf,
        template: PathBuf,
        /// Write the witness here instead of stdout
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Print the (k, l)-minimal equivalent of an instance
    Minimalize { instance: PathBuf, template: PathBuf },
    /// Export the bounded implication graph as DOT, one certificate per arc
    Implgraph {
        template: PathBuf,
        /// Search arcs of the full graph instead of the injective one
        #[arg(long)]
        all: bool,
    },
    /// Report whether the bounded injective implication graph is acyclic
    Checksimple { template: PathBuf },
    /// Search for local near-unanimity operations or binary injections
    ProbeNu(ProbeArgs),
    /// Search for critical relations or equality implications
    Detect {
        what: DetectKind,
        template: PathBuf,
        /// Probe the witness set of every equality certificate at these arities
        #[arg(long, value_delimiter = ',')]
        probe: Vec<usize>,
    },
    /// Compose two implications and compare against the relational composition
    Compose {
        template: PathBuf,
        first: PathBuf,
        second: PathBuf,
        /// Conjoin pairwise disequalities of the free variables
        #[arg(long)]
        injective: bool,
    },
    /// Write seeded random instances or templates
    Gen {
        what: GenKind,
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Output directory; stdout when absent
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 6)]
        vars: usize,
        #[arg(long, default_value_t = 5)]
        constraints: usize,
        /// Relations per generated template
        #[arg(long, default_value_t = 1)]
        relations: usize,
        #[arg(long, default_value_t = 4)]
        max_arity: usize,
    },
}

#[derive(Args, Debug)]
pub struct ProbeArgs {
    pub template: PathBuf,
    /// A total fragment file to use as the domain
    #[arg(long)]
    pub domain: Option<PathBuf>,
    /// Probe every injective orbit of these sizes instead of one domain
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "3")]
    pub arity: Vec<usize>,
    /// Look for a binary injection instead
    #[arg(long)]
    pub injection: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum DetectKind {
    Critical,
    EqImplication,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenKind {
    Instance,
    Template,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Format { path: PathBuf, source: FormatError },
    #[error("{path}: {source}")]
    Instance { path: PathBuf, source: MinError },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Min(#[from] MinError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Impl(#[from] ImplError),
    #[error(transparent)]
    Probe(#[from] ProbeError),
    #[error("thread pool: {0}")]
    Pool(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Format { .. } | CliError::Instance { .. } | CliError::Usage(_) => 3,
            _ => 4,
        }
    }
}

/// What a command prints and the exit code.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Output { stdout, stderr: String::new(), code: 0 }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

impl Global {
    fn universe(&self) -> Result<Option<Universe>, CliError> {
        let Some(spec) = &self.universe else { return Ok(None) };
        if let Some(u) = Universe::builtin(spec) {
            return Ok(Some(u));
        }
        let path = Path::new(spec);
        if path.exists() {
            let text = read(path)?;
            return formats::parse_universe(&text)
                .map(Some)
                .map_err(|source| CliError::Format { path: path.to_path_buf(), source });
        }
        Err(CliError::Format { path: path.to_path_buf(), source: FormatError::UnknownUniverse(spec.clone()) })
    }

    fn template(&self, path: &Path) -> Result<Template, CliError> {
        let u = self.universe()?;
        formats::parse_template(&read(path)?, u.as_ref())
            .map_err(|source| CliError::Format { path: path.to_path_buf(), source })
    }

    fn instance(&self, path: &Path, template: &Template) -> Result<Instance, CliError> {
        Instance::parse(&read(path)?, template)
            .map_err(|source| CliError::Instance { path: path.to_path_buf(), source })
    }

    fn search(&self) -> GraphSearch {
        let d = GraphSearch::default();
        GraphSearch {
            max_atoms: self.max_atoms.unwrap_or(d.max_atoms),
            max_vars: self.max_vars.unwrap_or(d.max_vars),
            closure_depth: self.closure_depth.unwrap_or(d.closure_depth),
            budget: self.budget.map_or(d.budget, |b| b as usize),
        }
    }

    fn levels(&self, u: &Universe) -> (usize, usize) {
        let k = self.k.unwrap_or(u.k());
        (k, self.ell.unwrap_or_else(|| u.default_ell().max(k)))
    }
}

/// Parses `args` and runs the command on a pool of `--threads` workers.
pub fn execute(cli: Cli) -> Result<Output, CliError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.global.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Pool(e.to_string()))?;
    pool.install(|| run(&cli.global, &cli.command))
}

fn run(g: &Global, command: &Command) -> Result<Output, CliError> {
    match command {
        Command::Solve { instance, template, witness } => solve(g, instance, template, witness.as_deref()),
        Command::Minimalize { instance, template } => {
            let t = g.template(template)?;
            let inst = g.instance(instance, &t)?;
            let (k, ell) = g.levels(t.universe());
            let schedule = g.seed.map_or(Schedule::Fifo, Schedule::Seeded);
            let m = kl_minimalize_with(&inst, t.universe(), k, ell, schedule)?;
            let mut out = m.to_text();
            if m.is_trivial() {
                out.push_str("# trivial: some constraint is empty\n");
            }
            Ok(Output::ok(out))
        }
        Command::Implgraph { template, all } => {
            let t = g.template(template)?;
            let graph = build_implication_graph(&Evaluator::new(&t), &g.search(), !all);
            let mut out = graph.to_dot();
            if graph.truncated {
                out.push_str("// truncated: the candidate budget ran out\n");
            }
            Ok(Output::ok(out))
        }
        Command::Checksimple { template } => {
            let t = g.template(template)?;
            let graph = build_implication_graph(&Evaluator::new(&t), &g.search(), true);
            let report = is_implicationally_simple(&graph);
            let mut out = String::new();
            if report.simple {
                out.push_str("simple (acyclic)\n");
            } else {
                let labels: Vec<String> = report.cycle.iter().map(|v| v.label()).collect();
                let _ = writeln!(out, "not simple: cycle {}", labels.join(" -> "));
                for w in &report.witnesses {
                    let _ = writeln!(out, "  {w}");
                }
            }
            let _ = writeln!(out, "vertices {} arcs {}", graph.vertices.len(), graph.arcs.len());
            if graph.truncated {
                out.push_str("truncated: acyclicity holds only for the arcs found\n");
            }
            Ok(Output::ok(out))
        }
        Command::ProbeNu(args) => probe(g, args),
        Command::Detect { what, template, probe } => detect(g, *what, template, probe),
        Command::Compose { template, first, second, injective } => compose(g, template, first, second, *injective),
        Command::Gen { what, count, out, vars, constraints, relations, max_arity } => {
            let seed = g.seed.ok_or_else(|| CliError::Usage("gen requires --seed".into()))?;
            let u = g.universe()?.unwrap_or_else(|| Universe::hypergraph(3));
            let mut gen = Generator::new(seed);
            let shape = InstanceShape {
                min_vars: (*vars).max(2),
                max_vars: (*vars).max(2),
                max_constraints: (*constraints).max(1),
                max_arity: *max_arity,
                ..InstanceShape::default()
            };
            let (stem, texts): (&str, Vec<String>) = match what {
                GenKind::Instance => ("instance", (0..*count).map(|_| gen.instance(&u, &shape).to_text()).collect()),
                GenKind::Template => (
                    "template",
                    (0..*count)
                        .map(|i| {
                            let t = gen.template(&u, &format!("gen{seed}-{i}"), *relations, *max_arity);
                            formats::template_to_text(&t)
                        })
                        .collect(),
                ),
            };
            if let Some(dir) = out {
                fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
            }
            let mut stdout = String::new();
            for (i, text) in texts.iter().enumerate() {
                match out {
                    Some(dir) => {
                        let path = dir.join(format!("{stem}-{i:03}.txt"));
                        write(&path, text)?;
                        let _ = writeln!(stdout, "{}", path.display());
                    }
                    None => {
                        let _ = writeln!(stdout, "# {stem} {i}");
                        stdout.push_str(text);
                    }
                }
            }
            Ok(Output::ok(stdout))
        }
    }
}

fn solve(g: &Global, instance: &Path, template: &Path, witness: Option<&Path>) -> Result<Output, CliError> {
    let t = g.template(template)?;
    let inst = g.instance(instance, &t)?;
    let (_, ell) = g.levels(t.universe());
    let config = SolveConfig { ell: Some(ell), search: g.search() };
    let report = Solver::new(&t, config).solve(&inst)?;
    let mut out = Output::default();
    let _ = writeln!(out.stdout, "{}", report.outcome.label());
    if g.trace {
        for e in &report.trace {
            let _ = writeln!(out.stderr, "trace {e}");
        }
    }
    out.code = match &report.outcome {
        Outcome::Solved(sol) => {
            let text = sol.to_text(&inst);
            match witness {
                Some(path) => write(path, &text)?,
                None => out.stdout.push_str(&text),
            }
            0
        }
        Outcome::Unsat => 1,
        Outcome::Inconclusive(why) => {
            let _ = writeln!(out.stdout, "reason {why}");
            if let Inconclusive::Cycle(rep) = why {
                for w in &rep.witnesses {
                    let _ = writeln!(out.stdout, "certificate {w}");
                }
            }
            2
        }
    };
    for f in &report.falsifications {
        let _ = writeln!(out.stdout, "falsification {f}");
    }
    Ok(out)
}

fn probe(g: &Global, args: &ProbeArgs) -> Result<Output, CliError> {
    let t = g.template(&args.template)?;
    let budget = g.budget.unwrap_or(DEFAULT_BUDGET);
    let mut reports: Vec<ProbeReport> = Vec::new();
    match (&args.domain, args.sizes.is_empty()) {
        (Some(path), true) => {
            let d = formats::parse_fragment(&read(path)?, t.k())
                .map_err(|source| CliError::Format { path: path.clone(), source })?;
            if args.injection {
                reports.push(find_binary_injection(&t, &d, budget)?);
            } else {
                for &m in &args.arity {
                    reports.push(find_local_nu(&t, &d, m, budget, None)?);
                }
            }
        }
        (None, false) if !args.injection => reports = probe_domains(&t, &args.sizes, &args.arity, budget)?,
        (None, false) => {
            for &s in &args.sizes {
                for o in t.universe().enumerate_orbits(s, true) {
                    let d = crate::orbit_algebra::Fragment::from_descriptor(&o);
                    reports.push(find_binary_injection(&t, &d, budget)?);
                }
            }
        }
        _ => return Err(CliError::Usage("give exactly one of --domain and --sizes".into())),
    }
    let mut out = String::new();
    for r in &reports {
        out.push_str(&r.to_text());
        out.push('\n');
    }
    Ok(Output::ok(out))
}

fn detect(g: &Global, what: DetectKind, template: &Path, arities: &[usize]) -> Result<Output, CliError> {
    let t = g.template(template)?;
    let ev = Evaluator::new(&t);
    let search = g.search();
    let mut out = String::new();
    let truncated = match what {
        DetectKind::Critical => {
            let det = detect_critical(&ev, &search);
            for c in &det.certificates {
                let _ = writeln!(out, "critical D={} via {}", c.d, c.implication);
            }
            let _ = writeln!(out, "certificates {}", det.certificates.len());
            det.truncated
        }
        DetectKind::EqImplication => {
            let det = detect_equality_implication(&ev, &search);
            let budget = DEFAULT_BUDGET;
            for c in &det.certificates {
                let _ = writeln!(out, "equality ell={} T={} via {}", c.ell, c.t, c.implication);
                if arities.is_empty() {
                    continue;
                }
                match witness_set(&ev, c)? {
                    None => out.push_str("  witness chain unsatisfiable\n"),
                    Some(w) => {
                        for r in probe_witness(&t, &w, arities, budget)? {
                            let _ = writeln!(out, "  arity {} {} after {} nodes", r.arity, r.status, r.nodes);
                        }
                    }
                }
            }
            let _ = writeln!(out, "certificates {}", det.certificates.len());
            det.truncated
        }
    };
    if truncated {
        out.push_str("truncated\n");
    }
    Ok(Output::ok(out))
}

fn load_implication(ev: &Evaluator<'_>, k: usize, path: &Path) -> Result<Implication, CliError> {
    let spec =
        formats::parse_implication(&read(path)?, k).map_err(|source| CliError::Format { path: path.into(), source })?;
    check_implication(ev, &spec.formula, &spec.u, &spec.v, &spec.c, &spec.d)?
        .map_err(|f| CliError::Usage(format!("{}: not an implication: {f}", path.display())))
}

fn compose(g: &Global, template: &Path, first: &Path, second: &Path, injective: bool) -> Result<Output, CliError> {
    let t = g.template(template)?;
    let ev = Evaluator::new(&t);
    let i1 = load_implication(&ev, t.k(), first)?;
    let i2 = load_implication(&ev, t.k(), second)?;
    let c = compose_implications(&ev, &i1, &i2, injective)?;
    let mut out = formats::implication_to_text(&c.formula, &c.u, &c.v, &c.c, &c.d);
    let _ = writeln!(out, "# separating {} injective {}", c.separating, c.injective);
    let rel = relational_compose(&i1.pairs, &i2.pairs);
    let _ = writeln!(out, "# pairs {} relational {} equal {}", c.pairs.len(), rel.len(), c.pairs == rel);
    let p = impl_properties_check(&i1, &i2, &c);
    let closure = p.index_closure.map_or("n/a".to_string(), |b| b.to_string());
    let _ = writeln!(
        out,
        "# variables {} from {} and {}; monotone {} intersections {} index-closure {closure}",
        p.p, p.p1, p.p2, p.monotone, p.intersections
    );
    Ok(Output::ok(out))
}
