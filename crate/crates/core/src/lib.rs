//! Independence atoms: derivation engines, team semantics, pregeometric
//! closure models and counterexample synthesis.

pub mod atoms;
pub mod calculus;
pub mod error;
pub mod pregeom;
pub mod synth;
pub mod teams;

pub use atoms::{parse_atom, Atom, AtomKind, AtomSet, VarSet, Variable};
pub use calculus::{derives_conditional, derives_marginal, Proof, Rule, Verdict};
pub use error::{Error, Result};
pub use pregeom::{ClosureModel, Vector};
pub use synth::{air_satisfies, synthesize_counterexample, AirAssignment, Counterexample};
pub use teams::{find_counterexample_team, SearchBounds, Team};
