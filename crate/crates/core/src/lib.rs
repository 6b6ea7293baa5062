pub mod cli;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod oracles;
pub mod qkernel;
pub mod report;
pub mod sampling;
pub mod stochastic_r;
pub mod suites;
pub mod zf;
pub mod zrp;
