//! Xor substitution reasoning.
//!
//! Extends xor unit propagation: besides summing away assigned variables,
//! a clause whose rewritten form is a binary equivalence x⊕y(⊕⊤) becomes a
//! definition of its larger variable in terms of the smaller one, and that
//! definition is substituted into every other clause containing the larger
//! variable. Saturating under both substitution kinds triangularizes the
//! clause set like Gaussian elimination and derives implied literals that
//! unit propagation alone cannot reach.

use super::{Deduced, ExplainTarget, Explanation, ExplanationMode, ModuleStats, XorModule};
use crate::algebra::{Assignment, Lit, Var, XorClause};
use crate::derivation::{CutPolicy, DerivationGraph, VertexId, VertexKind};
use std::collections::VecDeque;

#[derive(Clone, Debug)]
struct ClauseState {
    label: XorClause,
    /// Input vertex; may go stale when the graph is truncated below its
    /// creation point (learnt clauses) and is then re-created on demand.
    input: VertexId,
    /// Rewrite chain: derived vertices with their decision levels.
    chain: Vec<(VertexId, u32)>,
}

/// Xor substitution module.
pub struct SubstModule {
    graph: DerivationGraph,
    clauses: Vec<ClauseState>,
    /// Variable id → indices of clauses whose rewrite history contains it.
    occ: Vec<Vec<usize>>,
    known: Vec<bool>,
    values: Assignment,
    trail: Vec<(Lit, u32)>,
    /// Variable id → position in `trail` while assigned.
    trail_pos: Vec<Option<usize>>,
    /// Variable id → vertex asserting its assigned literal.
    lit_vertex: Vec<Option<VertexId>>,
    /// Larger variable of a binary definition → defining clause index.
    /// Entries are validated at every use: a definition lapses silently
    /// when backtracking reverts the defining clause to a longer form.
    eq_def: Vec<Option<usize>>,
    /// Assigned literals whose clause occurrences still need scheduling.
    pending: VecDeque<Lit>,
    /// Clause indices to (re)reduce.
    dirty: VecDeque<usize>,
    cur_level: u32,
    conflict: Option<VertexId>,
    stats: ModuleStats,
}

impl SubstModule {
    pub fn new(num_vars: u32, xors: &[XorClause]) -> SubstModule {
        let n = num_vars as usize + 1;
        let mut m = SubstModule {
            graph: DerivationGraph::new(),
            clauses: Vec::new(),
            occ: vec![Vec::new(); n],
            known: vec![false; n],
            values: Assignment::new(num_vars),
            trail: Vec::new(),
            trail_pos: vec![None; n],
            lit_vertex: vec![None; n],
            eq_def: vec![None; n],
            pending: VecDeque::new(),
            dirty: VecDeque::new(),
            cur_level: 0,
            conflict: None,
            stats: ModuleStats::default(),
        };
        for c in xors {
            m.push_clause(c);
        }
        m
    }

    fn push_clause(&mut self, c: &XorClause) {
        if c.is_tautology() {
            return;
        }
        let k = self.clauses.len();
        for &v in c.vars() {
            assert!(v.index() < self.known.len(), "clause variable out of range");
            self.occ[v.index()].push(k);
            self.known[v.index()] = true;
        }
        let input = self.graph.add_input_clause(c.clone(), self.cur_level);
        self.clauses.push(ClauseState { label: c.clone(), input, chain: Vec::new() });
        self.dirty.push_back(k);
        self.note_peak();
    }

    fn note_peak(&mut self) {
        if self.graph.len() > self.stats.vertices_peak {
            self.stats.vertices_peak = self.graph.len();
        }
    }

    /// The input vertex of a clause, re-created if truncation removed it.
    fn ensure_input(&mut self, k: usize) -> VertexId {
        let cs = &self.clauses[k];
        let v = cs.input;
        if v.idx() < self.graph.len()
            && self.graph.kind(v) == VertexKind::InputClause
            && self.graph.label(v) == &cs.label
        {
            return v;
        }
        let label = cs.label.clone();
        let fresh = self.graph.add_input_clause(label, self.cur_level);
        self.clauses[k].input = fresh;
        self.note_peak();
        fresh
    }

    /// The current rewritten form of a clause (its chain tip).
    fn tip(&mut self, k: usize) -> VertexId {
        match self.clauses[k].chain.last() {
            Some(&(v, _)) => v,
            None => self.ensure_input(k),
        }
    }

    /// Sums the chain tip of clause `k` with another vertex, tracking
    /// occurrence lists for any variables the sum introduces.
    fn derive_with(&mut self, k: usize, other: VertexId) -> VertexId {
        let t = self.tip(k);
        let v = self.graph.add_derived(other, t, self.cur_level).expect("premises share variables");
        self.clauses[k].chain.push((v, self.cur_level));
        for &var in self.graph.label(v).vars() {
            if !self.occ[var.index()].contains(&k) {
                self.occ[var.index()].push(k);
            }
        }
        self.note_peak();
        v
    }

    /// A definition usable to eliminate `var` from clause `k`, if any.
    fn valid_def(&mut self, var: Var, k: usize) -> Option<VertexId> {
        let j = self.eq_def[var.index()]?;
        if j == k {
            return None;
        }
        let t = self.tip(j);
        let lab = self.graph.label(t);
        // The definition must still be binary *and* still eliminate `var`
        // downward, i.e. `var` is its larger variable; anything else is a
        // leftover from before a backtrack and is ignored.
        if lab.len() == 2 && lab.vars()[1] == var {
            Some(t)
        } else {
            None
        }
    }

    /// Records an implied literal derived at `vertex`.
    fn report(&mut self, vertex: VertexId, lit: Lit, implied: &mut Vec<Lit>) {
        debug_assert_eq!(self.values.lit_value(lit), None);
        if self.graph.kind(vertex) == VertexKind::Derived {
            self.graph.mark_literal(vertex);
        }
        let i = lit.var().index();
        self.values.assign_lit(lit);
        self.trail_pos[i] = Some(self.trail.len());
        self.trail.push((lit, self.cur_level));
        self.lit_vertex[i] = Some(vertex);
        self.pending.push_back(lit);
        implied.push(lit);
        self.stats.implied += 1;
    }

    fn schedule(&mut self, k: usize) {
        if !self.dirty.contains(&k) {
            self.dirty.push_back(k);
        }
    }

    /// Rewrites clause `k` to its normal form under the current values and
    /// definitions: assigned variables are summed away in trail order
    /// first, then definitions eliminate variables smallest-first. A unary
    /// normal form is reported (or contradicted down to falsum), a binary
    /// one is registered as a definition and its consequences scheduled.
    fn reduce_clause(&mut self, k: usize, implied: &mut Vec<Lit>) {
        loop {
            if self.conflict.is_some() {
                return;
            }
            let t = self.tip(k);
            let cur = self.graph.label(t).clone();
            if cur.is_falsum() {
                self.conflict = Some(t);
                self.stats.conflicts += 1;
                return;
            }
            if cur.is_unary() {
                let l = cur.as_literal();
                if self.lit_vertex[l.var().index()] == Some(t) {
                    return; // already reported from this very tip
                }
                match self.values.lit_value(l) {
                    None => self.report(t, l, implied),
                    Some(true) => {} // clause satisfied
                    Some(false) => {
                        let lv = self.lit_vertex[l.var().index()].expect("variable is assigned");
                        let bot = self.derive_with(k, lv);
                        debug_assert!(self.graph.label(bot).is_falsum());
                        self.conflict = Some(bot);
                        self.stats.conflicts += 1;
                    }
                }
                return;
            }
            let assigned = cur
                .vars()
                .iter()
                .filter(|v| self.values.get(**v).is_some())
                .min_by_key(|v| self.trail_pos[v.index()])
                .copied();
            if let Some(var) = assigned {
                let lv = self.lit_vertex[var.index()].expect("variable is assigned");
                self.derive_with(k, lv);
                continue;
            }
            let def = cur.vars().iter().find_map(|&v| self.valid_def(v, k).map(|t| (v, t)));
            match def {
                Some((_, dt)) => {
                    self.derive_with(k, dt);
                }
                None => break,
            }
        }
        let t = self.tip(k);
        let lab = self.graph.label(t).clone();
        if lab.len() == 2 {
            let v = lab.vars()[1];
            if self.eq_def[v.index()] != Some(k) {
                self.eq_def[v.index()] = Some(k);
                let ks = self.occ[v.index()].clone();
                for j in ks {
                    if j != k {
                        self.schedule(j);
                    }
                }
            }
        }
    }
}

impl XorModule for SubstModule {
    fn knows_var(&self, v: Var) -> bool {
        self.known.get(v.index()).copied().unwrap_or(false)
    }

    fn value(&self, v: Var) -> Option<bool> {
        self.values.get(v)
    }

    fn assign(&mut self, lit: Lit, level: u32) {
        debug_assert!(self.knows_var(lit.var()));
        debug_assert_eq!(self.values.get(lit.var()), None);
        self.cur_level = level;
        let asm = self.graph.add_assumption(lit, level);
        self.note_peak();
        let i = lit.var().index();
        self.values.assign_lit(lit);
        self.trail_pos[i] = Some(self.trail.len());
        self.trail.push((lit, level));
        self.lit_vertex[i] = Some(asm);
        self.pending.push_back(lit);
    }

    fn deduce(&mut self) -> Deduced {
        let mut implied = Vec::new();
        while self.conflict.is_none() {
            // Clause reductions first, then assignment events which only
            // schedule further reductions. Work items are popped once fully
            // processed, so a conflict can interrupt and the remainder is
            // picked up after backtracking.
            if let Some(&k) = self.dirty.front() {
                self.reduce_clause(k, &mut implied);
                if self.conflict.is_none() {
                    self.dirty.pop_front();
                }
                continue;
            }
            let Some(&l) = self.pending.front() else {
                break;
            };
            let ks = self.occ[l.var().index()].clone();
            for k in ks {
                self.schedule(k);
            }
            self.pending.pop_front();
        }
        Deduced { implied, conflict: self.conflict.is_some() }
    }

    fn explain(&mut self, lit: Lit, policy: CutPolicy, mode: ExplanationMode) -> Explanation {
        let v = self.lit_vertex[lit.var().index()].expect("explained literal is assigned");
        debug_assert_eq!(self.graph.label(v), &XorClause::unary(lit));
        let e = self.graph.explain(v, policy);
        let clause = self
            .graph
            .implying_clause(&e, mode == ExplanationMode::Parity)
            .expect("cut is cnf-compatible");
        Explanation { clause, parity: Some(e.parity) }
    }

    fn explain_conflict(&mut self, policy: CutPolicy, mode: ExplanationMode) -> Explanation {
        let v = self.conflict.expect("no conflict to explain");
        let e = self.graph.explain(v, policy);
        let clause = self
            .graph
            .implying_clause(&e, mode == ExplanationMode::Parity)
            .expect("cut is cnf-compatible");
        Explanation { clause, parity: Some(e.parity) }
    }

    fn parity(&mut self, target: ExplainTarget, policy: CutPolicy) -> Option<XorClause> {
        let v = match target {
            ExplainTarget::Lit(l) => {
                self.lit_vertex[l.var().index()].expect("explained literal is assigned")
            }
            ExplainTarget::Conflict => self.conflict.expect("no conflict to explain"),
        };
        Some(self.graph.explain(v, policy).parity)
    }

    fn add_clause(&mut self, clause: &XorClause) {
        self.push_clause(clause);
    }

    fn backtrack(&mut self, level: u32) {
        self.conflict = None;
        while let Some(&(l, lvl)) = self.trail.last() {
            if lvl <= level {
                break;
            }
            self.trail.pop();
            let i = l.var().index();
            self.values.clear(l.var());
            self.trail_pos[i] = None;
            self.lit_vertex[i] = None;
        }
        for cs in &mut self.clauses {
            while cs.chain.last().is_some_and(|&(_, lvl)| lvl > level) {
                cs.chain.pop();
            }
        }
        let mut n = self.graph.len();
        while n > 0 && self.graph.level(VertexId(n as u32 - 1)) > level {
            n -= 1;
        }
        self.graph.truncate(n);
        // Assignment events still queued for surviving literals are kept;
        // events for undone literals are dropped. Stale definitions are
        // caught by the validity check when next consulted.
        let values = &self.values;
        self.pending.retain(|l| values.get(l.var()).is_some());
        self.cur_level = level;
    }

    fn graph(&self) -> &DerivationGraph {
        &self.graph
    }

    fn stats(&self) -> ModuleStats {
        self.stats
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::CnfXorFormula;
    use crate::oracle::{entails_equiv, entails_or, gf2_feasible};
    use crate::xr::up::{UpMode, UpModule};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lit(code: i32) -> Lit {
        Lit::from_dimacs(code)
    }

    fn xc(codes: &[i32]) -> XorClause {
        XorClause::from_dimacs(codes)
    }

    /// Three ternary clauses where assuming x1 determines x5 only through
    /// the binary equivalences x2≡x3 and x3≡x4 — out of reach for plain
    /// unit propagation.
    fn triangular_xors() -> Vec<XorClause> {
        vec![xc(&[1, 2, 3]), xc(&[1, 3, 4]), xc(&[2, 4, 5])]
    }

    #[test]
    fn substitution_chain_derives_the_distant_literal() {
        let xors = triangular_xors();
        let mut up = UpModule::new(5, &xors, UpMode::Full);
        up.assign(lit(1), 1);
        assert_eq!(up.deduce(), Deduced::default(), "unit propagation finds nothing");

        let mut m = SubstModule::new(5, &xors);
        assert_eq!(m.deduce(), Deduced::default());
        m.assign(lit(1), 1);
        let d = m.deduce();
        assert!(!d.conflict);
        assert_eq!(d.implied, vec![lit(5)]);
        let expect = "\
v0 clause@0 x1⊕x2⊕x3
v1 clause@0 x1⊕x3⊕x4
v2 clause@0 x2⊕x4⊕x5
v3 assume@1 x1
v4 derived@1 x2⊕x3⊕⊤ <- v3 v0
v5 derived@1 x3⊕x4⊕⊤ <- v3 v1
v6 derived@1 x2⊕x4⊕⊤ <- v4 v5
v7 derived@1 x5 <- v6 v2
";
        assert_eq!(m.graph().dump(), expect);
    }

    #[test]
    fn explanations_cover_the_substituted_chain() {
        let mut m = SubstModule::new(5, &triangular_xors());
        m.deduce();
        m.assign(lit(1), 1);
        m.deduce();
        let e = m.explain(lit(5), CutPolicy::Furthest, ExplanationMode::Implicative);
        assert_eq!(e.clause.lits, vec![lit(-1), lit(5)]);
        let p = e.parity.unwrap();
        assert!(p.is_tautology(), "the literal follows from the clauses alone");
        // The closest cut climbs over the unreported intermediate vertices
        // and lands on the same frontier.
        let e = m.explain(lit(5), CutPolicy::Closest, ExplanationMode::Implicative);
        assert_eq!(e.clause.lits, vec![lit(-1), lit(5)]);

        let mut f = CnfXorFormula::new(5);
        for c in triangular_xors() {
            f.add_xor_clause(c);
        }
        assert!(crate::oracle::entails_xor(&f, &XorClause::unary(lit(5))).unwrap());
    }

    #[test]
    fn contradictory_binary_clauses_cancel_to_falsum() {
        let mut m = SubstModule::new(2, &[xc(&[1, 2]), xc(&[-1, 2])]);
        let d = m.deduce();
        assert!(d.conflict, "the two equivalences contradict each other");
        let e = m.explain_conflict(CutPolicy::Furthest, ExplanationMode::Implicative);
        assert!(e.clause.lits.is_empty(), "no assumptions were involved");
        // The parity explanation is what the conflict refutes; with no
        // assumptions left it is the tautology, i.e. an infeasibility proof.
        assert!(e.parity.unwrap().is_tautology());
        assert!(!gf2_feasible(&[xc(&[1, 2]), xc(&[-1, 2])], &[]));
    }

    #[test]
    fn definitions_imply_literals_at_level_zero() {
        // x2⊕x3 defines x3≡x2; substituted into x1⊕x2⊕x3 it leaves x1⊕⊤.
        let mut m = SubstModule::new(3, &[xc(&[2, 3]), xc(&[1, 2, 3])]);
        let d = m.deduce();
        assert_eq!(d.implied, vec![lit(-1)]);
        let e = m.explain(lit(-1), CutPolicy::Furthest, ExplanationMode::Implicative);
        assert_eq!(e.clause.lits, vec![lit(-1)], "no assumptions: a unit clause");
        m.assign(lit(2), 1);
        let d = m.deduce();
        assert_eq!(d.implied, vec![lit(-3)], "values substitute before definitions");
    }

    #[test]
    fn learnt_clauses_rejoin_after_deep_backtracking() {
        let mut m = SubstModule::new(6, &[xc(&[3, 4, 5])]);
        m.deduce();
        m.assign(lit(4), 1);
        m.deduce();
        m.add_clause(&xc(&[-4, 6]));
        let d = m.deduce();
        assert_eq!(d.implied, vec![lit(6)]);
        m.backtrack(0);
        assert_eq!(m.graph().len(), 1, "only the original input survives");
        m.assign(lit(4), 1);
        let d = m.deduce();
        assert_eq!(d.implied, vec![lit(6)], "learnt clause still propagates");
        let e = m.explain(lit(6), CutPolicy::Closest, ExplanationMode::Implicative);
        assert_eq!(e.clause.lits, vec![lit(-4), lit(6)]);
    }

    /// Substitution must dominate unit propagation: on a shared trail it
    /// conflicts whenever unit propagation does and assigns a superset of
    /// its values, with every explanation verified against the oracle.
    #[test]
    fn substitution_dominates_unit_propagation_on_random_formulas() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0902);
        for _ in 0..200 {
            let num_vars = rng.gen_range(3..=7u32);
            let num_clauses = rng.gen_range(1..=6);
            let mut xors = Vec::new();
            let mut f = CnfXorFormula::new(num_vars);
            for _ in 0..num_clauses {
                let len = rng.gen_range(1..=3.min(num_vars));
                let mut vars: Vec<u32> = (1..=num_vars).collect();
                for i in 0..len as usize {
                    let j = rng.gen_range(i..vars.len());
                    vars.swap(i, j);
                }
                let mut codes: Vec<i32> = vars[..len as usize]
                    .iter()
                    .map(|&v| if rng.gen() { v as i32 } else { -(v as i32) })
                    .collect();
                codes.sort_by_key(|c| c.abs());
                let c = xc(&codes);
                if c.is_tautology() {
                    continue;
                }
                f.add_xor_clause(c.clone());
                xors.push(c);
            }
            let mut up = UpModule::new(num_vars, &xors, UpMode::Full);
            let mut sub = SubstModule::new(num_vars, &xors);
            let mut order: Vec<u32> = (1..=num_vars).collect();
            for i in 0..order.len() {
                let j = rng.gen_range(i..order.len());
                order.swap(i, j);
            }
            let mut level = 0;
            loop {
                let du = up.deduce();
                let ds = sub.deduce();
                assert!(
                    !du.conflict || ds.conflict,
                    "substitution conflicts whenever unit propagation does"
                );
                if ds.conflict {
                    let e = sub.explain_conflict(CutPolicy::Closest, ExplanationMode::Implicative);
                    assert!(entails_or(&f, &e.clause).unwrap(), "conflict clause entailed");
                    break;
                }
                for v in 1..=num_vars {
                    if let Some(b) = up.value(Var::new(v)) {
                        assert_eq!(sub.value(Var::new(v)), Some(b), "superset of values");
                    }
                }
                for &l in &ds.implied {
                    for policy in [CutPolicy::Closest, CutPolicy::Furthest] {
                        let e = sub.explain(l, policy, ExplanationMode::Implicative);
                        assert!(entails_or(&f, &e.clause).unwrap());
                        let p = e.parity.unwrap();
                        assert!(entails_equiv(&f, &p, &XorClause::unary(l)).unwrap());
                    }
                }
                match order
                    .iter()
                    .find(|&&v| sub.knows_var(Var::new(v)) && sub.value(Var::new(v)).is_none())
                {
                    Some(&v) => {
                        level += 1;
                        let l = Lit::new(Var::new(v), rng.gen());
                        up.assign(l, level);
                        sub.assign(l, level);
                    }
                    None => break,
                }
            }
        }
    }
}
