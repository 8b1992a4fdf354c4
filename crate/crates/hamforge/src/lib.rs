//! hamforge compiles declarative Hamiltonian specifications
//!
//!   H = sum_k ( alpha_k P_{q_k}(x) p^{m_k} + conj(alpha_k) p^{m_k} P_{q_k}(x) )
//!
//! on a uniformly discretized interval into explicit one-qubit + cx circuits
//! that block-encode H and exp(itH), then verifies every circuit against
//! independently assembled dense matrices by state-vector simulation and
//! audits gate counts against closed-form resource bounds.

pub mod assembly;
pub mod circuit;
pub mod cli;
pub mod evolution;
pub mod ledger;
pub mod matrices;
pub mod primitives;
pub mod qsvt;
pub mod sim;
pub mod spec_model;

pub use cli::run_cli;
