//! Seeded generation and the text formats for universes, templates and
//! instances.

use hypercsp::formats::{parse_template, parse_universe, template_to_text, universe_to_text};
use hypercsp::generate::{Generator, InstanceShape};
use hypercsp::orbit_algebra::Universe;

const UNIVERSE: &str = "\
universe triangle-free k=2
bound 3 : 0,1 | 0,2 | 1,2
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let u = parse_universe(UNIVERSE)?;
    print!("{}", universe_to_text(&u));

    let h3 = Universe::hypergraph(3);
    let mut g = Generator::new(42);
    let t = g.template(&h3, "random", 2, 4);
    let text = template_to_text(&t);
    print!("{text}");
    assert_eq!(template_to_text(&parse_template(&text, None)?), text);

    let shape = InstanceShape { max_vars: 5, ..InstanceShape::default() };
    print!("{}", g.instance(&h3, &shape).to_text());
    Ok(())
}
