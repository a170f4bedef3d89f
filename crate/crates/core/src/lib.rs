//! Unit-commitment MILP pipeline: a restarted PDHG solver for LP
//! relaxations, crossover to basic solutions, a reference primal simplex,
//! best-bound branch-and-bound and a seeded instance generator.

pub mod model;
pub mod sparse;
pub mod pdlp;
pub mod simplex;
pub mod lpgen;
pub mod bnb;
pub mod ucgen;
