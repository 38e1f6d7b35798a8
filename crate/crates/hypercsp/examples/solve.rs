//! The full solving pipeline on a template whose implication graph is
//! acyclic, checked against brute force.

use hypercsp::generate::Generator;
use hypercsp::implication_engine::fixtures::implies_template;
use hypercsp::solver::{brute_force_solve, Outcome, SolveConfig, Solver};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let t = implies_template();
    let solver = Solver::new(&t, SolveConfig::default());
    let mut g = Generator::new(11);
    for _ in 0..8 {
        let inst = g.template_instance(&t, 5, 7);
        let report = solver.solve(&inst)?;
        let brute = brute_force_solve(&inst, t.universe(), 6)?.is_some();
        match &report.outcome {
            Outcome::Solved(sol) => {
                sol.verify(&inst, t.universe())?;
                println!("SOLVED (brute force sat: {brute})");
            }
            Outcome::Unsat => println!("UNSAT (brute force sat: {brute})"),
            Outcome::Inconclusive(why) => println!("INCONCLUSIVE: {why}"),
        }
    }
    Ok(())
}
