pub mod basis;
pub mod cli;
pub mod cross_norm;
pub mod decomposition;
pub mod duality;
pub mod error;
pub mod lhv;
pub mod linalg;
