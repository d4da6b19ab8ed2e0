//! Equivalence class reasoning over xor clauses.
//!
//! Variables and the constant ⊤ are nodes of a parity union-find: an edge
//! u≡v or u≢v merges two classes, so each class knows every member's value
//! the moment the constant's class absorbs it. Ternary clauses fire in two
//! ways: a determined member variable makes the other two equivalent (up
//! to parity), and two equivalent member variables determine the third.
//! Longer clauses are split into ternary links through fresh variables
//! that stay internal and are never reported. Merges are logged in order
//! with the rule that produced them; explanations walk the union-find
//! forest and expand every crossed link back to assumption literals.
//!
//! Unlike the rewriting modules this one keeps no derivation graph, so it
//! offers implicative explanations only — no parity explanations and no
//! cut policies.

use super::{Deduced, ExplainTarget, Explanation, ExplanationMode, ModuleStats, XorModule};
use crate::algebra::{Lit, OrClause, Var, XorClause};
use crate::derivation::{CutPolicy, DerivationGraph};
use std::collections::{BTreeSet, HashSet, VecDeque};

/// Rule that justifies a logged edge.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EcReason {
    /// External assignment of the literal.
    Star(Lit),
    /// A clause of the formula, true on its own.
    Input,
    /// Ternary clause whose named variable is determined to the value.
    Unary(Var, bool),
    /// Ternary clause whose named variables fell into one class with the
    /// recorded relative parity.
    Binary(Var, Var, bool),
}

#[derive(Clone, Debug)]
struct EcEdge {
    a: u32,
    b: u32,
    /// Relative parity: true means the endpoints hold opposite values.
    parity: bool,
    reason: EcReason,
    level: u32,
    undo: Option<UnionUndo>,
}

#[derive(Clone, Debug)]
struct UnionUndo {
    child: u32,
    parent: u32,
    members_len: usize,
    det_from: usize,
}

#[derive(Clone, Debug)]
struct Node {
    parent: u32,
    /// Parity towards the parent link.
    par: bool,
    size: u32,
    /// Class members; valid while this node is a root.
    members: Vec<u32>,
    /// Edge index that attached this (then-root) node to its parent.
    link_cause: u32,
    /// Cause endpoints: `link_a` on the parent side, `link_b` on this side.
    link_a: u32,
    link_b: u32,
}

#[derive(Clone, Debug)]
struct EcClause {
    vars: Vec<u32>,
    rhs: bool,
}

/// Equivalence class module.
pub struct EcModule {
    /// Node 0 is the constant ⊤; node v is variable v (fresh ones above
    /// the original range).
    nodes: Vec<Node>,
    clauses: Vec<EcClause>,
    /// Node id → indices of clauses containing it.
    occ: Vec<Vec<usize>>,
    known: Vec<bool>,
    orig_vars: u32,
    edges: Vec<EcEdge>,
    /// Nodes in determination order; `UnionUndo::det_from` cuts it back.
    det_stack: Vec<u32>,
    /// Node id → edge that brought it into the constant's class.
    det_edge: Vec<Option<usize>>,
    /// Node id → externally assigned (never re-reported).
    ext: Vec<bool>,
    trail: Vec<(Lit, u32)>,
    /// Literals determined since the last `deduce` drained them.
    staged: Vec<Lit>,
    /// Clause indices awaiting a re-check after a merge.
    checkq: VecDeque<usize>,
    /// Fresh clause indices (initial and learnt).
    dirty: VecDeque<usize>,
    cur_level: u32,
    conflict: Option<usize>,
    empty_graph: DerivationGraph,
    stats: ModuleStats,
}

impl EcModule {
    pub fn new(num_vars: u32, xors: &[XorClause]) -> EcModule {
        let n = num_vars as usize + 1;
        let mut m = EcModule {
            nodes: Vec::new(),
            clauses: Vec::new(),
            occ: Vec::new(),
            known: vec![false; n],
            orig_vars: num_vars,
            edges: Vec::new(),
            det_stack: Vec::new(),
            det_edge: Vec::new(),
            ext: Vec::new(),
            trail: Vec::new(),
            staged: Vec::new(),
            checkq: VecDeque::new(),
            dirty: VecDeque::new(),
            cur_level: 0,
            conflict: None,
            empty_graph: DerivationGraph::new(),
            stats: ModuleStats::default(),
        };
        m.ensure_node(num_vars);
        for c in xors {
            m.push_clause(c);
        }
        m
    }

    fn ensure_node(&mut self, id: u32) {
        while self.nodes.len() <= id as usize {
            let i = self.nodes.len() as u32;
            self.nodes.push(Node {
                parent: i,
                par: false,
                size: 1,
                members: vec![i],
                link_cause: 0,
                link_a: 0,
                link_b: 0,
            });
            self.occ.push(Vec::new());
            self.det_edge.push(None);
            self.ext.push(false);
        }
    }

    fn push_clause(&mut self, c: &XorClause) {
        if c.is_tautology() {
            return;
        }
        for &v in c.vars() {
            assert!(v.index() < self.known.len(), "clause variable out of range");
            self.known[v.index()] = true;
        }
        for (vars, rhs) in self.split(c) {
            let k = self.clauses.len();
            for &v in &vars {
                self.ensure_node(v);
                self.occ[v as usize].push(k);
            }
            self.clauses.push(EcClause { vars, rhs });
            self.dirty.push_back(k);
        }
    }

    /// Splits a clause into ternary links chained through fresh variables.
    fn split(&mut self, c: &XorClause) -> Vec<(Vec<u32>, bool)> {
        let vs: Vec<u32> = c.vars().iter().map(|v| v.id()).collect();
        if vs.len() <= 3 {
            return vec![(vs, c.rhs())];
        }
        let mut fresh = self.nodes.len() as u32;
        let mut parts = Vec::new();
        let mut prev = fresh;
        fresh += 1;
        self.ensure_node(prev);
        parts.push((vec![vs[0], vs[1], prev], false));
        for &v in &vs[2..vs.len() - 2] {
            let t = fresh;
            fresh += 1;
            self.ensure_node(t);
            parts.push((vec![prev, v, t], false));
            prev = t;
        }
        parts.push((vec![prev, vs[vs.len() - 2], vs[vs.len() - 1]], c.rhs()));
        parts
    }

    fn find(&self, x: u32) -> (u32, bool) {
        let mut i = x;
        let mut p = false;
        while self.nodes[i as usize].parent != i {
            p ^= self.nodes[i as usize].par;
            i = self.nodes[i as usize].parent;
        }
        (i, p)
    }

    /// Value of a node: parity towards ⊤ if they share a class.
    fn node_value(&self, x: u32) -> Option<bool> {
        let (r0, p0) = self.find(0);
        let (rx, px) = self.find(x);
        (r0 == rx).then(|| !(p0 ^ px))
    }

    /// Merges the classes of two nodes under `a ⊕ b = parity`, logging the
    /// edge, reporting fresh determinations and scheduling clause checks.
    /// A parity clash inside one class logs a conflict edge instead.
    fn merge(&mut self, a: u32, b: u32, parity: bool, reason: EcReason) {
        let (ra, pa) = self.find(a);
        let (rb, pb) = self.find(b);
        let idx = self.edges.len();
        if ra == rb {
            if pa ^ pb != parity {
                self.edges.push(EcEdge { a, b, parity, reason, level: self.cur_level, undo: None });
                self.conflict = Some(idx);
                self.stats.conflicts += 1;
                self.note_peak();
            }
            return;
        }
        let (r0, _) = self.find(0);
        // Orient the smaller class under the larger one.
        let (ra, pa, rb, pb, la, lb) = if self.nodes[ra as usize].size >= self.nodes[rb as usize].size
        {
            (ra, pa, rb, pb, a, b)
        } else {
            (rb, pb, ra, pa, b, a)
        };
        let members_len = self.nodes[ra as usize].members.len();
        let child = &mut self.nodes[rb as usize];
        child.parent = ra;
        child.par = pa ^ parity ^ pb;
        child.link_cause = idx as u32;
        child.link_a = la;
        child.link_b = lb;
        let absorbed = child.members.clone();
        self.nodes[ra as usize].size += absorbed.len() as u32;
        self.nodes[ra as usize].members.extend(absorbed.iter().copied());
        let det_from = self.det_stack.len();
        self.edges.push(EcEdge {
            a,
            b,
            parity,
            reason,
            level: self.cur_level,
            undo: Some(UnionUndo { child: rb, parent: ra, members_len, det_from }),
        });
        self.note_peak();
        // A union with the constant's class determines the other side.
        let newly: &[u32] = if r0 == ra {
            &absorbed
        } else if r0 == rb {
            &self.nodes[ra as usize].members[..members_len]
        } else {
            &[]
        };
        for &m in newly {
            self.det_edge[m as usize] = Some(idx);
            self.det_stack.push(m);
            if m != 0 && m <= self.orig_vars && !self.ext[m as usize] {
                let value = self.node_value(m).expect("member of the constant's class");
                self.staged.push(Lit::new(Var::new(m), value));
                self.stats.implied += 1;
            }
        }
        let mut recheck: Vec<u32> = absorbed.clone();
        if r0 == rb {
            recheck.extend_from_slice(&self.nodes[ra as usize].members[..members_len]);
        }
        for m in recheck {
            for &k in &self.occ[m as usize] {
                if !self.checkq.contains(&k) {
                    self.checkq.push_back(k);
                }
            }
        }
    }

    fn note_peak(&mut self) {
        if self.edges.len() > self.stats.vertices_peak {
            self.stats.vertices_peak = self.edges.len();
        }
    }

    /// Fires whatever rule a clause supports in the current classes.
    fn check_clause(&mut self, k: usize) {
        let c = self.clauses[k].clone();
        match c.vars[..] {
            [] => self.merge(0, 0, c.rhs, EcReason::Input),
            [v] => self.merge(0, v, !c.rhs, EcReason::Input),
            [u, v] => self.merge(u, v, c.rhs, EcReason::Input),
            [x, y, z] => {
                let det = [x, y, z]
                    .into_iter()
                    .filter(|&v| self.det_edge[v as usize].is_some())
                    .min_by_key(|&v| (self.det_edge[v as usize], v));
                if let Some(v) = det {
                    let b = self.node_value(v).expect("determined node");
                    let rest: Vec<u32> = [x, y, z].into_iter().filter(|&w| w != v).collect();
                    self.merge(rest[0], rest[1], c.rhs ^ b, EcReason::Unary(Var::new(v), b));
                    return;
                }
                for (u, w, t) in [(x, y, z), (x, z, y), (y, z, x)] {
                    let (ru, pu) = self.find(u);
                    let (rw, pw) = self.find(w);
                    if ru == rw {
                        let q = pu ^ pw;
                        self.merge(0, t, !(c.rhs ^ q), EcReason::Binary(Var::new(u), Var::new(w), q));
                        return;
                    }
                }
            }
            _ => unreachable!("clauses are split to at most three variables"),
        }
    }

    /// Nodes from `x` up to its root, inclusive.
    fn path_to_root(&self, x: u32) -> Vec<u32> {
        let mut path = vec![x];
        let mut i = x;
        while self.nodes[i as usize].parent != i {
            i = self.nodes[i as usize].parent;
            path.push(i);
        }
        path
    }

    /// Collects the assumption literals connecting two same-class nodes:
    /// walks the forest path and expands every crossed link through its
    /// logged cause, recursing into earlier links.
    fn expand_path(&self, a: u32, b: u32, out: &mut BTreeSet<Lit>, seen: &mut HashSet<u32>) {
        if a == b {
            return;
        }
        let pa = self.path_to_root(a);
        let pb = self.path_to_root(b);
        debug_assert_eq!(pa.last(), pb.last(), "nodes share a class");
        // Strip the common tail; keep the meet out of both hop lists.
        let mut na = pa.len();
        let mut nb = pb.len();
        while na > 0 && nb > 0 && pa[na - 1] == pb[nb - 1] {
            na -= 1;
            nb -= 1;
        }
        for &c in pa[..na].iter().chain(pb[..nb].iter()) {
            self.expand_hop(c, out, seen);
        }
    }

    /// Expands the parent link of node `c` (a former root).
    fn expand_hop(&self, c: u32, out: &mut BTreeSet<Lit>, seen: &mut HashSet<u32>) {
        let node = &self.nodes[c as usize];
        if !seen.insert(node.link_cause) {
            return;
        }
        self.expand_edge(node.link_cause as usize, out, seen);
        self.expand_path(node.link_b, c, out, seen);
        self.expand_path(node.link_a, node.parent, out, seen);
    }

    /// Expands one logged edge into assumption literals.
    fn expand_edge(&self, e: usize, out: &mut BTreeSet<Lit>, seen: &mut HashSet<u32>) {
        match self.edges[e].reason {
            EcReason::Star(l) => {
                out.insert(l);
            }
            EcReason::Input => {}
            EcReason::Unary(v, _) => self.expand_path(0, v.id(), out, seen),
            EcReason::Binary(u, w, _) => self.expand_path(u.id(), w.id(), out, seen),
        }
    }

    fn assumption_clause(&self, reasons: &BTreeSet<Lit>, head: Option<Lit>) -> OrClause {
        let mut lits: Vec<Lit> = reasons.iter().map(|&l| !l).collect();
        lits.sort_by_key(|l| l.index());
        lits.extend(head);
        OrClause::new(lits)
    }

    /// Deterministic one-line summaries of the logged edges, for tests.
    pub fn edge_summaries(&self) -> Vec<String> {
        self.edges
            .iter()
            .map(|e| {
                let rel = if e.parity { "≢" } else { "≡" };
                let reason = match e.reason {
                    EcReason::Star(_) => "star".to_string(),
                    EcReason::Input => "input".to_string(),
                    EcReason::Unary(v, b) => format!("by {}={}", self.node_name(v.id()), b as u8),
                    EcReason::Binary(u, w, q) => format!(
                        "by {}{}{}",
                        self.node_name(u.id()),
                        if q { "≢" } else { "≡" },
                        self.node_name(w.id())
                    ),
                };
                format!("{}{}{} {} @{}", self.node_name(e.a), rel, self.node_name(e.b), reason, e.level)
            })
            .collect()
    }

    /// The classes with at least two members, each sorted, for tests.
    pub fn class_summaries(&self) -> Vec<Vec<String>> {
        let mut classes: Vec<Vec<u32>> = Vec::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if n.parent == i as u32 && n.members.len() > 1 {
                let mut ids = n.members.clone();
                ids.sort_unstable();
                classes.push(ids);
            }
        }
        classes.sort();
        classes
            .into_iter()
            .map(|ids| ids.into_iter().map(|m| self.node_name(m)).collect())
            .collect()
    }

    fn node_name(&self, id: u32) -> String {
        if id == 0 {
            "⊤".to_string()
        } else if id <= self.orig_vars {
            format!("x{id}")
        } else {
            format!("t{id}")
        }
    }
}

impl XorModule for EcModule {
    fn knows_var(&self, v: Var) -> bool {
        self.known.get(v.index()).copied().unwrap_or(false)
    }

    fn value(&self, v: Var) -> Option<bool> {
        if v.id() == 0 || v.id() as usize >= self.nodes.len() {
            return None;
        }
        self.node_value(v.id())
    }

    fn assign(&mut self, lit: Lit, level: u32) {
        debug_assert!(self.knows_var(lit.var()));
        debug_assert_eq!(self.value(lit.var()), None);
        self.cur_level = level;
        let id = lit.var().id();
        self.ext[id as usize] = true;
        self.trail.push((lit, level));
        self.merge(0, id, !lit.is_positive(), EcReason::Star(lit));
    }

    fn deduce(&mut self) -> Deduced {
        let mut implied = std::mem::take(&mut self.staged);
        while self.conflict.is_none() {
            // Scheduled re-checks first, then fresh clauses. Items are only
            // popped once fully processed, so a conflict can interrupt and
            // the remainder is picked up after backtracking.
            let Some(&k) = self.checkq.front().or_else(|| self.dirty.front()) else {
                break;
            };
            let from_checkq = self.checkq.front().is_some();
            self.check_clause(k);
            if self.conflict.is_none() {
                if from_checkq {
                    self.checkq.pop_front();
                } else {
                    self.dirty.pop_front();
                }
            }
        }
        implied.append(&mut self.staged);
        Deduced { implied, conflict: self.conflict.is_some() }
    }

    fn explain(&mut self, lit: Lit, _policy: CutPolicy, mode: ExplanationMode) -> Explanation {
        debug_assert_eq!(mode, ExplanationMode::Implicative, "no parity explanations here");
        debug_assert_eq!(self.value(lit.var()), Some(lit.value()));
        let mut reasons = BTreeSet::new();
        let mut seen = HashSet::new();
        self.expand_path(0, lit.var().id(), &mut reasons, &mut seen);
        reasons.remove(&lit);
        Explanation { clause: self.assumption_clause(&reasons, Some(lit)), parity: None }
    }

    fn explain_conflict(&mut self, _policy: CutPolicy, mode: ExplanationMode) -> Explanation {
        debug_assert_eq!(mode, ExplanationMode::Implicative, "no parity explanations here");
        let e = self.conflict.expect("no conflict to explain");
        let mut reasons = BTreeSet::new();
        let mut seen = HashSet::new();
        seen.insert(e as u32);
        self.expand_edge(e, &mut reasons, &mut seen);
        let (a, b) = (self.edges[e].a, self.edges[e].b);
        self.expand_path(a, b, &mut reasons, &mut seen);
        Explanation { clause: self.assumption_clause(&reasons, None), parity: None }
    }

    fn parity(&mut self, _target: ExplainTarget, _policy: CutPolicy) -> Option<XorClause> {
        None
    }

    fn add_clause(&mut self, clause: &XorClause) {
        self.push_clause(clause);
    }

    fn backtrack(&mut self, level: u32) {
        self.conflict = None;
        while self.edges.last().is_some_and(|e| e.level > level) {
            let e = self.edges.pop().expect("edge present");
            if let Some(u) = e.undo {
                let child = &mut self.nodes[u.child as usize];
                child.parent = u.child;
                child.par = false;
                let freed = child.size;
                let parent = &mut self.nodes[u.parent as usize];
                parent.size -= freed;
                parent.members.truncate(u.members_len);
                while self.det_stack.len() > u.det_from {
                    let m = self.det_stack.pop().expect("stack entry");
                    self.det_edge[m as usize] = None;
                }
            }
        }
        while let Some(&(l, lvl)) = self.trail.last() {
            if lvl <= level {
                break;
            }
            self.trail.pop();
            self.ext[l.var().id() as usize] = false;
        }
        let staged = std::mem::take(&mut self.staged);
        self.staged =
            staged.into_iter().filter(|l| self.value(l.var()) == Some(l.value())).collect();
        self.cur_level = level;
    }

    fn graph(&self) -> &DerivationGraph {
        &self.empty_graph
    }

    fn stats(&self) -> ModuleStats {
        self.stats
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{entails_or, gf2_feasible};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lit(code: i32) -> Lit {
        Lit::from_dimacs(code)
    }

    fn xc(codes: &[i32]) -> XorClause {
        XorClause::from_dimacs(codes)
    }

    fn triangular_xors() -> Vec<XorClause> {
        vec![xc(&[1, 2, 3]), xc(&[1, 3, 4]), xc(&[2, 4, 5])]
    }

    #[test]
    fn assignments_group_variables_into_parity_classes() {
        let mut m = EcModule::new(5, &triangular_xors());
        assert_eq!(m.deduce(), Deduced::default());
        m.assign(lit(1), 1);
        let d = m.deduce();
        assert!(!d.conflict);
        assert_eq!(d.implied, vec![lit(5)]);
        assert_eq!(
            m.edge_summaries(),
            vec![
                "⊤≡x1 star @1",
                "x2≡x3 by x1=1 @1",
                "x3≡x4 by x1=1 @1",
                "⊤≡x5 by x2≡x4 @1",
            ]
        );
        assert_eq!(
            m.class_summaries(),
            vec![vec!["⊤", "x1", "x5"], vec!["x2", "x3", "x4"]]
        );
        assert_eq!(m.value(Var::new(5)), Some(true));
        assert_eq!(m.value(Var::new(2)), None, "related but undetermined");
    }

    #[test]
    fn explanations_trace_back_to_assumptions() {
        let mut m = EcModule::new(5, &triangular_xors());
        m.deduce();
        m.assign(lit(1), 1);
        m.deduce();
        let e = m.explain(lit(5), CutPolicy::Closest, ExplanationMode::Implicative);
        assert_eq!(e.clause.lits, vec![lit(-1), lit(5)]);
        assert!(e.parity.is_none(), "this module has no parity explanations");
        let mut f = crate::formula::CnfXorFormula::new(5);
        for c in triangular_xors() {
            f.add_xor_clause(c);
        }
        assert!(entails_or(&f, &e.clause).unwrap());
    }

    #[test]
    fn contradicting_chains_yield_a_conflict_clause() {
        let xors = vec![xc(&[1, 2, 3]), xc(&[2, 3, -4])];
        let mut m = EcModule::new(4, &xors);
        m.deduce();
        m.assign(lit(1), 1);
        m.assign(lit(4), 2);
        let d = m.deduce();
        assert!(d.conflict);
        let e = m.explain_conflict(CutPolicy::Closest, ExplanationMode::Implicative);
        assert_eq!(e.clause.lits, vec![lit(-1), lit(-4)]);
        let mut f = crate::formula::CnfXorFormula::new(4);
        for c in xors {
            f.add_xor_clause(c);
        }
        assert!(entails_or(&f, &e.clause).unwrap());
    }

    #[test]
    fn long_clauses_split_into_ternary_links() {
        let mut m = EcModule::new(5, &[xc(&[1, 2, 3, 4, 5])]);
        assert_eq!(m.deduce(), Deduced::default());
        for (i, v) in [1, 2, 3, 4].into_iter().enumerate() {
            m.assign(lit(v), i as u32 + 1);
            let d = m.deduce();
            assert!(!d.conflict);
            if v == 4 {
                assert_eq!(d.implied, vec![lit(5)], "the last variable closes the parity");
            } else {
                assert_eq!(d.implied, Vec::new(), "fresh link variables stay internal");
            }
        }
        let e = m.explain(lit(5), CutPolicy::Closest, ExplanationMode::Implicative);
        assert_eq!(e.clause.lits, vec![lit(-1), lit(-2), lit(-3), lit(-4), lit(5)]);
    }

    #[test]
    fn backtracking_restores_classes_and_learnt_clauses_refire() {
        let mut m = EcModule::new(5, &[xc(&[3, 4, 5])]);
        m.deduce();
        m.assign(lit(3), 1);
        assert_eq!(m.deduce(), Deduced::default());
        m.add_clause(&xc(&[4]));
        let d = m.deduce();
        assert_eq!(d.implied, vec![lit(4), lit(5)]);
        m.backtrack(0);
        assert_eq!(m.value(Var::new(3)), None);
        assert_eq!(m.value(Var::new(4)), None);
        assert_eq!(m.edge_summaries(), Vec::<String>::new());
        // The learnt unary was consumed from the queue at level 1; it is
        // not re-fired spontaneously but any touching event revives it.
        m.assign(lit(-4), 1);
        let d = m.deduce();
        assert!(d.conflict, "the learnt unary clause contradicts the assignment");
        let e = m.explain_conflict(CutPolicy::Closest, ExplanationMode::Implicative);
        assert_eq!(e.clause.lits, vec![lit(4)]);
    }

    /// Every value this module derives must be forced by the formula under
    /// the assumptions, and every conflict clause entailed.
    #[test]
    fn derived_values_are_forced_on_random_formulas() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0903);
        for _ in 0..200 {
            let num_vars = rng.gen_range(3..=6u32);
            let num_clauses = rng.gen_range(1..=5);
            let mut xors = Vec::new();
            let mut f = crate::formula::CnfXorFormula::new(num_vars);
            for _ in 0..num_clauses {
                let len = rng.gen_range(1..=5.min(num_vars));
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
            let mut m = EcModule::new(num_vars, &xors);
            let mut assumed: Vec<Lit> = Vec::new();
            let mut level = 0;
            loop {
                let d = m.deduce();
                if d.conflict {
                    let e = m.explain_conflict(CutPolicy::Closest, ExplanationMode::Implicative);
                    assert!(entails_or(&f, &e.clause).unwrap(), "conflict clause entailed");
                    break;
                }
                for v in 1..=num_vars {
                    if let Some(b) = m.value(Var::new(v)) {
                        let counter = Lit::new(Var::new(v), !b);
                        let mut with: Vec<Lit> = assumed.clone();
                        with.push(counter);
                        assert!(!gf2_feasible(&xors, &with), "derived value is forced");
                    }
                }
                for &l in &d.implied {
                    let e = m.explain(l, CutPolicy::Closest, ExplanationMode::Implicative);
                    assert!(entails_or(&f, &e.clause).unwrap());
                }
                let next = (1..=num_vars)
                    .find(|&v| m.knows_var(Var::new(v)) && m.value(Var::new(v)).is_none());
                match next {
                    Some(v) => {
                        level += 1;
                        let l = Lit::new(Var::new(v), rng.gen());
                        assumed.push(l);
                        m.assign(l, level);
                    }
                    None => break,
                }
            }
        }
    }
}
