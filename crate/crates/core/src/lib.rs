pub mod discretize;
pub mod highprec;
pub mod kernels;
pub mod linalg;
pub mod modular;
pub mod probes;
pub mod scenario;
pub mod validation;
