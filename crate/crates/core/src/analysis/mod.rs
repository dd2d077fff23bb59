//! Termination and complexity checks on translated systems.

pub mod compare;
pub mod lpo;
pub mod qi;

pub use compare::{compare_runtime, Comparison, EngineStatus};
pub use lpo::{lpo_terminates, verify_proof, LpoFail, LpoProof, Precedence, PrecedenceMode, Why};
pub use qi::{qi_verify, Assignment, MonomialSpec, Poly, QiVerdict, QuasiInterp};
