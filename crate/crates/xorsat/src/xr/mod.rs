//! Pluggable xor reasoning modules.
//!
//! A module owns the xor part of a formula and talks to the CDCL core
//! through a small interface: the solver feeds it trail literals over the
//! shared variables, the module saturates its inference rules and reports
//! implied literals or a conflict, and — only when conflict analysis needs
//! them — produces implying or-clauses from its derivation graph.
//!
//! Three implementations are provided: [`up::UpModule`] (xor unit
//! propagation), [`subst::SubstModule`] (equivalence substitution) and
//! [`ec::EcModule`] (equivalence classes over a parity union-find).

pub mod ec;
pub mod subst;
pub mod up;

use crate::algebra::{Lit, OrClause, Var, XorClause};
use crate::derivation::{CutPolicy, DerivationGraph};

/// How implying or-clauses are assembled from a cut.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ExplanationMode {
    /// Negate every reason literal on the cut frontier.
    Implicative,
    /// Keep only reason literals whose variable occurs in the parity
    /// explanation of the same cut — usually a strictly smaller clause.
    Parity,
}

/// What a deduction round produced.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Deduced {
    /// Literals newly implied by the xor clauses, in derivation order.
    pub implied: Vec<Lit>,
    /// Whether the module derived falsum; fetch the clause via
    /// `explain_conflict`.
    pub conflict: bool,
}

/// An implying or-clause; for an implied literal it contains that literal,
/// for a conflict all its literals are false under the trail.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Explanation {
    pub clause: OrClause,
    /// The parity explanation over the same cut, when the module supports
    /// parity reasoning.
    pub parity: Option<XorClause>,
}

/// What to explain when asking for a parity explanation directly.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ExplainTarget {
    Lit(Lit),
    Conflict,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ModuleStats {
    pub implied: u64,
    pub conflicts: u64,
    pub vertices_peak: usize,
}

/// The interface between the CDCL core and an xor reasoning module.
pub trait XorModule {
    /// Whether the module reasons about this variable at all.
    fn knows_var(&self, v: Var) -> bool;

    /// The module's current value for a variable (shared vars only).
    fn value(&self, v: Var) -> Option<bool>;

    /// Records a trail literal. The variable must be known and unassigned
    /// in the module.
    fn assign(&mut self, lit: Lit, level: u32);

    /// Runs the module's inference rules to fixpoint (or a conflict).
    fn deduce(&mut self) -> Deduced;

    /// Implying or-clause for a literal previously reported by `deduce`.
    fn explain(&mut self, lit: Lit, policy: CutPolicy, mode: ExplanationMode) -> Explanation;

    /// Implying (all-false) or-clause for the current conflict.
    fn explain_conflict(&mut self, policy: CutPolicy, mode: ExplanationMode) -> Explanation;

    /// Parity explanation of a reported literal or of the conflict, under
    /// the given cut policy. `None` when the module cannot produce parity
    /// explanations.
    fn parity(&mut self, target: ExplainTarget, policy: CutPolicy) -> Option<XorClause>;

    /// Adds an entailed xor clause (learning) from this point on.
    fn add_clause(&mut self, clause: &XorClause);

    /// Undoes all assignments and derivations above `level`.
    fn backtrack(&mut self, level: u32);

    /// The derivation graph (inspection and tests).
    fn graph(&self) -> &DerivationGraph;

    fn stats(&self) -> ModuleStats;
}
