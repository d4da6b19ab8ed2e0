//! Derivation graphs for xor reasoning.
//!
//! Every inference a reasoning module performs is recorded as a vertex:
//! input clauses and assumptions are leaves, derived vertices have exactly
//! two premises and carry the clause sum of their premise labels. Cutting
//! the graph between a vertex and the inputs yields explanations:
//!
//! * the implicative explanation conjoins the labels on the cut frontier
//!   (input clauses contribute nothing — they hold globally);
//! * the parity explanation xors the frontier labels together with one `⊤`
//!   per traversed derived vertex, producing a single xor-clause `P` with
//!   `formula ⊨ P ⇔ label(v)`.
//!
//! Three cut policies are provided. `Closest` keeps the frontier as near the
//! target as possible while staying cnf-compatible, `Furthest` pushes it all
//! the way back to the assumptions, and `FirstUip` stops at the unique
//! implication point of the latest assumption.

use crate::algebra::{Lit, OrClause, Var, XorClause};
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

/// Index of a vertex in its derivation graph (append-only, so also creation
/// order).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VertexId(pub u32);

impl VertexId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum VertexKind {
    InputClause,
    InputAssumption,
    Derived,
}

#[derive(Clone, Debug)]
struct Vertex {
    label: XorClause,
    kind: VertexKind,
    premises: Option<(VertexId, VertexId)>,
    level: u32,
    /// Whether this vertex stands for a trail literal: assumptions always,
    /// derived unary vertices once their literal has been reported. Cut
    /// frontiers are only allowed to rest on literal vertices (or inputs),
    /// which keeps explanation clauses falsified by the trail.
    is_literal: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CutPolicy {
    Closest,
    FirstUip,
    Furthest,
}

/// Explanation of one vertex over one cut.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutExplanation {
    pub target: VertexId,
    /// Frontier vertices contributing their labels (ascending id). Input
    /// clauses and re-derived input labels are excluded — they hold under
    /// the formula itself.
    pub reasons: Vec<(VertexId, XorClause)>,
    /// The parity explanation over the same cut.
    pub parity: XorClause,
    /// Input-clause vertices traversed (for clause activity bookkeeping).
    pub touched_inputs: Vec<VertexId>,
}

impl CutExplanation {
    /// The reason labels as literals; `None` when the cut is not
    /// cnf-compatible (some reason label is non-unary).
    pub fn reason_literals(&self) -> Option<Vec<Lit>> {
        self.reasons
            .iter()
            .map(|(_, c)| c.is_unary().then(|| c.as_literal()))
            .collect()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DerivationError {
    /// The premises share no variable, so no inference rule applies.
    UnrelatedPremises(VertexId, VertexId),
    EqualPremises(VertexId),
}

impl fmt::Display for DerivationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DerivationError::UnrelatedPremises(a, b) => {
                write!(f, "premises {a} and {b} share no variable")
            }
            DerivationError::EqualPremises(a) => write!(f, "premise {a} used twice"),
        }
    }
}

impl std::error::Error for DerivationError {}

/// Append-only derivation graph with level-based truncation.
#[derive(Clone, Debug, Default)]
pub struct DerivationGraph {
    vertices: Vec<Vertex>,
    /// Labels of all input-clause vertices ever added. Kept append-only
    /// across truncation: an explanation may treat any such label as
    /// globally true, which stays sound because learned inputs are entailed.
    input_labels: HashSet<XorClause>,
    /// Memoized closest-cut explanations (cleared on truncation).
    closest_memo: HashMap<VertexId, CutExplanation>,
}

impl DerivationGraph {
    pub fn new() -> DerivationGraph {
        DerivationGraph::default()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn label(&self, v: VertexId) -> &XorClause {
        &self.vertices[v.idx()].label
    }

    pub fn kind(&self, v: VertexId) -> VertexKind {
        self.vertices[v.idx()].kind
    }

    pub fn level(&self, v: VertexId) -> u32 {
        self.vertices[v.idx()].level
    }

    pub fn premises(&self, v: VertexId) -> Option<(VertexId, VertexId)> {
        self.vertices[v.idx()].premises
    }

    pub fn is_literal_vertex(&self, v: VertexId) -> bool {
        self.vertices[v.idx()].is_literal
    }

    /// Finds the first vertex carrying the given label, if any.
    pub fn find_label(&self, label: &XorClause) -> Option<VertexId> {
        self.vertices
            .iter()
            .position(|vx| &vx.label == label)
            .map(|i| VertexId(i as u32))
    }

    pub fn add_input_clause(&mut self, label: XorClause, level: u32) -> VertexId {
        self.input_labels.insert(label.clone());
        self.push(Vertex {
            is_literal: false,
            label,
            kind: VertexKind::InputClause,
            premises: None,
            level,
        })
    }

    pub fn add_assumption(&mut self, lit: Lit, level: u32) -> VertexId {
        self.push(Vertex {
            label: XorClause::unary(lit),
            kind: VertexKind::InputAssumption,
            premises: None,
            level,
            is_literal: true,
        })
    }

    /// Adds a derived vertex labelled with the clause sum of its premises.
    pub fn add_derived(
        &mut self,
        p1: VertexId,
        p2: VertexId,
        level: u32,
    ) -> Result<VertexId, DerivationError> {
        if p1 == p2 {
            return Err(DerivationError::EqualPremises(p1));
        }
        let (a, b) = (self.label(p1), self.label(p2));
        if !a.vars().iter().any(|&v| b.contains(v)) {
            return Err(DerivationError::UnrelatedPremises(p1, p2));
        }
        let label = a.xor_sum(b);
        Ok(self.push(Vertex {
            label,
            kind: VertexKind::Derived,
            premises: Some((p1, p2)),
            level,
            is_literal: false,
        }))
    }

    /// Marks a derived unary vertex as standing for a reported literal.
    pub fn mark_literal(&mut self, v: VertexId) {
        debug_assert!(self.vertices[v.idx()].label.is_unary());
        self.vertices[v.idx()].is_literal = true;
    }

    fn push(&mut self, v: Vertex) -> VertexId {
        self.vertices.push(v);
        VertexId(self.vertices.len() as u32 - 1)
    }

    /// Drops all vertices with index `len` and above.
    pub fn truncate(&mut self, len: usize) {
        if len < self.vertices.len() {
            self.vertices.truncate(len);
            self.closest_memo.retain(|k, _| k.idx() < len);
        }
    }

    /// Computes the explanation of `v` under a cut policy. Closest-cut
    /// results are memoized per vertex.
    pub fn explain(&mut self, v: VertexId, policy: CutPolicy) -> CutExplanation {
        if let Some(e) = (policy == CutPolicy::Closest)
            .then(|| self.closest_memo.get(&v))
            .flatten()
        {
            return e.clone();
        }
        let expl = match self.vertices[v.idx()].kind {
            // Input clauses hold under the formula itself: nothing to
            // assume, and the parity explanation is the constant ⊤.
            VertexKind::InputClause => CutExplanation {
                target: v,
                reasons: Vec::new(),
                parity: XorClause::truth(),
                touched_inputs: vec![v],
            },
            // An assumption explains itself.
            VertexKind::InputAssumption => CutExplanation {
                target: v,
                reasons: vec![(v, self.vertices[v.idx()].label.clone())],
                parity: self.vertices[v.idx()].label.clone(),
                touched_inputs: Vec::new(),
            },
            VertexKind::Derived => {
                let in_vb = match policy {
                    CutPolicy::Closest => self.closest_vb(v),
                    CutPolicy::Furthest => self.furthest_vb(v),
                    CutPolicy::FirstUip => self.first_uip_vb(v),
                };
                self.explain_vb(v, &in_vb)
            }
        };
        if policy == CutPolicy::Closest {
            self.closest_memo.insert(v, expl.clone());
        }
        expl
    }

    /// Explanation of `v` over an explicitly given cut (the derived vertices
    /// on the target side). Mostly for tests and debugging.
    pub fn explain_explicit(&self, v: VertexId, vb: &[VertexId]) -> CutExplanation {
        let mut in_vb = vec![false; v.idx() + 1];
        assert!(vb.contains(&v), "target must lie inside the cut");
        for &u in vb {
            assert_eq!(self.kind(u), VertexKind::Derived, "cut side must be derived");
            in_vb[u.idx()] = true;
        }
        self.explain_vb(v, &in_vb)
    }

    /// Computes both explanations of `v` over the cut.
    ///
    /// The implicative reasons are the cut frontier: every premise of a
    /// cut-side vertex outside the cut, minus input clauses and re-derived
    /// input labels (those hold under the formula itself). The parity
    /// explanation instead expands the label of `v` through the cut; a
    /// vertex reached an even number of times cancels out and is skipped,
    /// which is what makes parity explanations shorter than implicative
    /// ones.
    fn explain_vb(&self, v: VertexId, in_vb: &[bool]) -> CutExplanation {
        let t = v.idx();
        // Implicative side: scan the frontier in ascending order.
        let mut reasons: Vec<(VertexId, XorClause)> = Vec::new();
        let mut touched_inputs = Vec::new();
        for u in self.frontier(v, in_vb) {
            let vx = &self.vertices[u.idx()];
            if vx.kind == VertexKind::InputClause {
                touched_inputs.push(u);
            } else if !self.input_labels.contains(&vx.label) {
                reasons.push((u, vx.label.clone()));
            }
        }
        // Parity side: descending-index expansion with cancellation.
        let mut odd = vec![false; t + 1];
        odd[t] = true;
        let mut acc_vars: BTreeSet<Var> = BTreeSet::new();
        let mut acc_top = false; // parity of ⊤ terms in the running xor
        for i in (0..=t).rev() {
            if !odd[i] {
                continue;
            }
            let vx = &self.vertices[i];
            if in_vb[i] {
                let (p1, p2) = vx.premises.expect("cut side vertices are derived");
                odd[p1.idx()] ^= true;
                odd[p2.idx()] ^= true;
                acc_top ^= true; // each expanded derivation step carries a ⊤
            } else if vx.kind == VertexKind::InputClause || self.input_labels.contains(&vx.label) {
                acc_top ^= true; // globally true, substituted by the constant ⊤
            } else {
                for &var in vx.label.vars() {
                    if !acc_vars.remove(&var) {
                        acc_vars.insert(var);
                    }
                }
                acc_top ^= !vx.label.rhs();
            }
        }
        let parity = XorClause::from_parts(acc_vars.into_iter().collect(), !acc_top);
        CutExplanation { target: v, reasons, parity, touched_inputs }
    }

    /// Ancestor flags of `v` (inclusive), over indices `0..=v`.
    fn ancestor_flags(&self, v: VertexId) -> Vec<bool> {
        let t = v.idx();
        let mut anc = vec![false; t + 1];
        anc[t] = true;
        for i in (0..=t).rev() {
            if anc[i] {
                if let Some((p1, p2)) = self.vertices[i].premises {
                    anc[p1.idx()] = true;
                    anc[p2.idx()] = true;
                }
            }
        }
        anc
    }

    /// Whether the closure must absorb `u` into the target side: anything
    /// derived that does not stand for a trail literal (non-unary clauses,
    /// and unary re-derivations that were never reported).
    fn closure_forced(&self, u: VertexId) -> bool {
        let vx = &self.vertices[u.idx()];
        vx.kind == VertexKind::Derived && !vx.is_literal && !self.input_labels.contains(&vx.label)
    }

    /// Absorbs `u` and transitively every forced premise into the cut.
    fn absorb(&self, in_vb: &mut [bool], u: VertexId) {
        let mut stack = vec![u];
        while let Some(w) = stack.pop() {
            if in_vb[w.idx()] {
                continue;
            }
            in_vb[w.idx()] = true;
            let (p1, p2) = self.vertices[w.idx()].premises.expect("absorbed vertices are derived");
            for p in [p1, p2] {
                if !in_vb[p.idx()] && self.closure_forced(p) {
                    stack.push(p);
                }
            }
        }
    }

    fn closest_vb(&self, v: VertexId) -> Vec<bool> {
        let mut in_vb = vec![false; v.idx() + 1];
        self.absorb(&mut in_vb, v);
        in_vb
    }

    fn furthest_vb(&self, v: VertexId) -> Vec<bool> {
        let anc = self.ancestor_flags(v);
        (0..=v.idx())
            .map(|i| anc[i] && self.vertices[i].kind == VertexKind::Derived)
            .collect()
    }

    /// Frontier of a cut: premises of cut-side vertices that are outside it,
    /// ascending and deduplicated.
    fn frontier(&self, v: VertexId, in_vb: &[bool]) -> Vec<VertexId> {
        let mut seen = vec![false; v.idx() + 1];
        for i in 0..=v.idx() {
            if in_vb[i] {
                let (p1, p2) = self.vertices[i].premises.expect("cut side is derived");
                for p in [p1, p2] {
                    if !in_vb[p.idx()] {
                        seen[p.idx()] = true;
                    }
                }
            }
        }
        (0..=v.idx()).filter(|&i| seen[i]).map(|i| VertexId(i as u32)).collect()
    }

    /// Grows the closest cut until the frontier meets the latest assumption
    /// ancestor (or exactly one vertex downstream of it). Falls back to the
    /// closest cut when the target has no assumption ancestor.
    fn first_uip_vb(&self, v: VertexId) -> Vec<bool> {
        let anc = self.ancestor_flags(v);
        let astar = (0..=v.idx())
            .rev()
            .find(|&i| anc[i] && self.vertices[i].kind == VertexKind::InputAssumption);
        let mut in_vb = self.closest_vb(v);
        let Some(astar) = astar else {
            return in_vb;
        };
        // Vertices downstream of the latest assumption, within the ancestors.
        let mut down = vec![false; v.idx() + 1];
        down[astar] = true;
        for i in astar + 1..=v.idx() {
            if anc[i] {
                if let Some((p1, p2)) = self.vertices[i].premises {
                    down[i] = down[p1.idx()] || down[p2.idx()];
                }
            }
        }
        loop {
            let candidates: Vec<VertexId> = self
                .frontier(v, &in_vb)
                .into_iter()
                .filter(|u| down[u.idx()])
                .collect();
            if candidates.len() <= 1 {
                return in_vb;
            }
            let next = candidates
                .iter()
                .rev()
                .find(|u| self.vertices[u.idx()].kind == VertexKind::Derived)
                .copied()
                .expect("multiple downstream frontier vertices include a derived one");
            self.absorb(&mut in_vb, next);
        }
    }

    /// Builds the or-clause implied by the formula that re-derives the
    /// target label under unit propagation: negated reason literals plus the
    /// target literal (nothing for a falsum target). With `restrict`, reason
    /// literals outside the parity explanation's variables are dropped.
    /// Returns `None` when the cut is not cnf-compatible or the target label
    /// is neither unary nor falsum.
    pub fn implying_clause(&self, expl: &CutExplanation, restrict: bool) -> Option<OrClause> {
        let target_label = &self.vertices[expl.target.idx()].label;
        let head = if target_label.is_unary() {
            Some(target_label.as_literal())
        } else if target_label.is_falsum() {
            None
        } else {
            return None;
        };
        let mut lits = Vec::new();
        for (_, label) in &expl.reasons {
            if !label.is_unary() {
                return None;
            }
            let l = label.as_literal();
            if restrict && !expl.parity.contains(l.var()) {
                continue;
            }
            lits.push(!l);
        }
        lits.extend(head);
        Some(OrClause::new(lits))
    }

    /// Line-oriented dump for debugging and golden tests.
    pub fn dump(&self) -> String {
        use fmt::Write;
        let mut out = String::new();
        for (i, vx) in self.vertices.iter().enumerate() {
            let kind = match vx.kind {
                VertexKind::InputClause => "clause",
                VertexKind::InputAssumption => "assume",
                VertexKind::Derived => "derived",
            };
            write!(out, "v{i} {kind}@{} {}", vx.level, vx.label).unwrap();
            if let Some((p1, p2)) = vx.premises {
                write!(out, " <- {p1} {p2}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}
