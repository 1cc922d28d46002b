pub mod cli;
pub mod error;
pub mod invariants;
pub mod linalg;
pub mod model;
pub mod monodromy;
pub mod ode;
pub mod simulate;
pub mod variational;
