pub mod cli;
pub mod formats;
pub mod generate;
pub mod implication_engine;
pub mod minimality_engine;
pub mod orbit_algebra;
pub mod polymorphism_probe;
pub mod pp_engine;
pub mod solver;
pub mod template;
