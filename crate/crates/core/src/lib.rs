pub mod amplitude;
pub mod analysis;
pub mod ast;
pub mod canonical;
pub mod corpus;
pub mod eval;
pub mod parser;
pub mod scalar;
pub mod sttrs;
pub mod translate;
pub mod typecheck;

pub use num_rational::BigRational;

pub type Amplitude = amplitude::Cyclo8<BigRational>;
