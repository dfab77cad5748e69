pub mod assembly;
pub mod convergence;
pub mod mesh;
pub mod polyquad;
pub mod problems;
pub mod solver;
pub mod vemspace;
