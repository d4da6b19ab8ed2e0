//! Xor unit propagation.
//!
//! Each xor clause is rewritten under the current assignment by summing it
//! with the unary clause of an assigned variable, shortening it by one
//! variable per step; a chain of derived vertices records the rewrites.
//! When a clause shrinks to a unary over an unassigned variable that
//! literal is implied, and when it contradicts an existing assignment one
//! more step derives falsum.
//!
//! Two operating modes share this inference system:
//!
//! * [`UpMode::Full`] advances every affected chain eagerly on each
//!   assignment, materializing the whole rewrite history;
//! * [`UpMode::Skip`] watches two unassigned variables per clause and only
//!   materializes a chain when the clause actually becomes unit or
//!   conflicting, substituting assigned variables in trail order so the
//!   resulting chain — and hence every explanation — matches what the full
//!   mode would have produced for that clause.

use super::{Deduced, ExplainTarget, Explanation, ExplanationMode, ModuleStats, XorModule};
use crate::algebra::{Assignment, Lit, Var, XorClause};
use crate::derivation::{CutPolicy, DerivationGraph, VertexId, VertexKind};
use std::collections::VecDeque;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum UpMode {
    /// Eager rewriting: every assignment advances every containing chain.
    Full,
    /// Watched variables: chains are materialized lazily on unit/conflict.
    Skip,
}

#[derive(Clone, Debug)]
struct ClauseState {
    label: XorClause,
    /// Input vertex; may go stale when the graph is truncated below its
    /// creation point (learnt clauses) and is then re-created on demand.
    input: VertexId,
    /// Rewrite chain: derived vertices with their decision levels.
    chain: Vec<(VertexId, u32)>,
    /// Watched positions into `label.vars()` (skip mode only).
    watch: [usize; 2],
}

/// Xor unit propagation module.
pub struct UpModule {
    mode: UpMode,
    graph: DerivationGraph,
    clauses: Vec<ClauseState>,
    /// Variable id → indices of clauses containing it.
    occ: Vec<Vec<usize>>,
    known: Vec<bool>,
    values: Assignment,
    trail: Vec<(Lit, u32)>,
    /// Variable id → position in `trail` while assigned.
    trail_pos: Vec<Option<usize>>,
    /// Variable id → vertex asserting its assigned literal.
    lit_vertex: Vec<Option<VertexId>>,
    /// Assigned literals whose clause occurrences still need processing.
    pending: VecDeque<Lit>,
    /// Clause indices to (re)scan: fresh inputs and learnt additions.
    dirty: VecDeque<usize>,
    cur_level: u32,
    conflict: Option<VertexId>,
    stats: ModuleStats,
}

impl UpModule {
    pub fn new(num_vars: u32, xors: &[XorClause], mode: UpMode) -> UpModule {
        let n = num_vars as usize + 1;
        let mut m = UpModule {
            mode,
            graph: DerivationGraph::new(),
            clauses: Vec::new(),
            occ: vec![Vec::new(); n],
            known: vec![false; n],
            values: Assignment::new(num_vars),
            trail: Vec::new(),
            trail_pos: vec![None; n],
            lit_vertex: vec![None; n],
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

    pub fn mode(&self) -> UpMode {
        self.mode
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
        self.clauses.push(ClauseState {
            label: c.clone(),
            input,
            chain: Vec::new(),
            watch: [0, 1.min(c.len().saturating_sub(1))],
        });
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

    /// Sums the chain tip with the unary vertex of an assigned variable.
    fn derive_step(&mut self, k: usize, var: Var) -> VertexId {
        let lv = self.lit_vertex[var.index()].expect("substituted variable is assigned");
        let t = self.tip(k);
        let v = self.graph.add_derived(lv, t, self.cur_level).expect("tip contains the variable");
        self.clauses[k].chain.push((v, self.cur_level));
        self.note_peak();
        v
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

    /// Inspects a chain tip: reports a unary over an unassigned variable,
    /// derives falsum from a contradicted one, ignores a satisfied one.
    fn settle(&mut self, k: usize, tip: VertexId, implied: &mut Vec<Lit>) {
        let label = self.graph.label(tip).clone();
        if label.is_falsum() {
            self.conflict = Some(tip);
            self.stats.conflicts += 1;
            return;
        }
        if !label.is_unary() {
            return;
        }
        let l = label.as_literal();
        match self.values.lit_value(l) {
            None => self.report(tip, l, implied),
            Some(true) => {} // clause satisfied
            Some(false) => {
                let bot = self.derive_step(k, l.var());
                debug_assert!(self.graph.label(bot).is_falsum());
                self.conflict = Some(bot);
                self.stats.conflicts += 1;
            }
        }
    }

    /// One eager rewrite step for a newly assigned variable (full mode).
    fn advance(&mut self, k: usize, var: Var, implied: &mut Vec<Lit>) {
        let t = self.tip(k);
        if self.lit_vertex[var.index()] == Some(t) {
            return; // the tip is this clause's own reported literal
        }
        let cur = self.graph.label(t).clone();
        if !cur.contains(var) {
            return;
        }
        if cur.is_unary() {
            // A contradicted unary tip; `settle` adds the falsum step.
            self.settle(k, t, implied);
            return;
        }
        let v = self.derive_step(k, var);
        self.settle(k, v, implied);
    }

    /// Substitutes every assigned variable of the clause in trail order
    /// until it settles. Used for fresh and learnt clauses, and for lazy
    /// chain materialization in skip mode.
    fn rewrite_to_fixpoint(&mut self, k: usize, implied: &mut Vec<Lit>) {
        while self.conflict.is_none() {
            let t = self.tip(k);
            let cur = self.graph.label(t).clone();
            if cur.is_falsum() || cur.is_unary() {
                if cur.is_unary() && self.lit_vertex[cur.vars()[0].index()] == Some(t) {
                    return; // already reported from this very tip
                }
                self.settle(k, t, implied);
                return;
            }
            let next = cur
                .vars()
                .iter()
                .filter(|v| self.values.get(**v).is_some())
                .min_by_key(|v| self.trail_pos[v.index()])
                .copied();
            match next {
                Some(var) => {
                    self.derive_step(k, var);
                }
                None => return,
            }
        }
    }

    /// Scans a fresh clause in skip mode: parks the watches on two
    /// unassigned variables if possible, otherwise the clause is already
    /// unit or fully assigned and is handled right away.
    fn rescan_skip(&mut self, k: usize, implied: &mut Vec<Lit>) {
        let label = self.clauses[k].label.clone();
        let free: Vec<usize> =
            (0..label.len()).filter(|&i| self.values.get(label.vars()[i]).is_none()).collect();
        match free.len() {
            0 => {
                if label.evaluate(&self.values) == Some(false) {
                    self.rewrite_to_fixpoint(k, implied);
                }
            }
            1 => self.rewrite_to_fixpoint(k, implied),
            _ => self.clauses[k].watch = [free[0], free[1]],
        }
    }

    /// Reacts to the assignment of a variable of clause `k` in skip mode.
    fn watch_event(&mut self, k: usize, var: Var, implied: &mut Vec<Lit>) {
        let (watch, label) = {
            let cs = &self.clauses[k];
            (cs.watch, cs.label.clone())
        };
        let vars = label.vars();
        let Some(wi) = (0..2).find(|&i| vars[watch[i]] == var) else {
            return; // not watched: skip this event entirely
        };
        let other = vars[watch[1 - wi]];
        if let Some(j) =
            (0..vars.len()).find(|&j| vars[j] != other && self.values.get(vars[j]).is_none())
        {
            self.clauses[k].watch[wi] = j;
            return;
        }
        if self.values.get(other).is_none() {
            // Unit: materializing the chain reports `other`.
            self.rewrite_to_fixpoint(k, implied);
        } else if label.evaluate(&self.values) == Some(false) {
            // Fully assigned and violated: materialize down to falsum.
            self.rewrite_to_fixpoint(k, implied);
        }
    }
}

impl XorModule for UpModule {
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
            // Fresh clauses first, then assignment events. Work items are
            // only popped once fully processed, so a conflict can interrupt
            // and the remainder is picked up after backtracking.
            if let Some(&k) = self.dirty.front() {
                match self.mode {
                    UpMode::Full => self.rewrite_to_fixpoint(k, &mut implied),
                    UpMode::Skip => self.rescan_skip(k, &mut implied),
                }
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
                if self.conflict.is_some() {
                    break;
                }
                match self.mode {
                    UpMode::Full => self.advance(k, l.var(), &mut implied),
                    UpMode::Skip => self.watch_event(k, l.var(), &mut implied),
                }
            }
            if self.conflict.is_none() {
                self.pending.pop_front();
            }
        }
        Deduced { implied, conflict: self.conflict.is_some() }
    }

    fn explain(&mut self, lit: Lit, policy: CutPolicy, mode: ExplanationMode) -> Explanation {
        let v = self.lit_vertex[lit.var().index()].expect("explained literal is assigned");
        debug_assert_eq!(self.graph.label(v), &XorClause::unary(lit));
        let e = self.graph.explain(v, policy);
        let clause =
            self.graph.implying_clause(&e, mode == ExplanationMode::Parity).expect("cut is cnf-compatible");
        Explanation { clause, parity: Some(e.parity) }
    }

    fn explain_conflict(&mut self, policy: CutPolicy, mode: ExplanationMode) -> Explanation {
        let v = self.conflict.expect("no conflict to explain");
        let e = self.graph.explain(v, policy);
        let clause =
            self.graph.implying_clause(&e, mode == ExplanationMode::Parity).expect("cut is cnf-compatible");
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
        // events for undone literals are dropped.
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
