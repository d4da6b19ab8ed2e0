//! A conflict-driven SAT solver for cnf-xor formulas (conjunctions of
//! or-clauses and xor-clauses).
//!
//! The CDCL core handles the or-clause part; the xor part is delegated to a
//! pluggable reasoning module (unit propagation, substitution, or
//! equivalence-class propagation). Modules record their inferences in a
//! derivation graph from which implicative and parity explanations are read
//! off via graph cuts; parity explanations in turn drive xor-clause
//! learning. A parity-graph generator produces hard instances together with
//! analytic refutations, and brute-force oracles back the test suite.

pub mod algebra;
pub mod cdcl;
pub mod derivation;
pub mod engine;
pub mod formula;
pub mod learn;
pub mod oracle;
pub mod paritygraph;
pub mod xr;

pub use algebra::{Assignment, Lit, OrClause, Var, XorClause};
pub use formula::CnfXorFormula;
