//! Conflict-driven clause learning over or-clauses.
//!
//! This is a fairly standard CDCL core — two-watched-literal propagation,
//! first-UIP conflict analysis with recursive clause minimization, VSIDS
//! branching, activity-based learnt-clause reduction — with one twist: a
//! literal may be implied by the xor reasoning module instead of an
//! or-clause. Such reasons are recorded lazily as [`Reason::Xor`] and the
//! implying or-clause is only materialized during conflict analysis, via the
//! [`XorExplainer`] passed to [`Cdcl::analyze`].

use crate::algebra::{Assignment, Lit, OrClause, Var};
use std::fmt;

/// Index of a clause in the solver's clause database.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct ClauseId(pub u32);

impl ClauseId {
    fn idx(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ClauseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

/// Why a variable is assigned.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Reason {
    /// A decision, a level-0 fact, or unassigned.
    Decision,
    Clause(ClauseId),
    /// Implied by the xor module; the or-clause explanation is fetched on
    /// demand during conflict analysis. Carries the implied literal.
    Xor(Lit),
}

/// Supplies implying or-clauses for module-implied literals. `explain` is
/// used while resolving towards the first UIP, `explain_min` while testing
/// literals for redundancy during clause minimization (implementations may
/// use a wider cut there to remove more literals).
pub trait XorExplainer {
    fn explain(&mut self, lit: Lit) -> OrClause;
    fn explain_min(&mut self, lit: Lit) -> OrClause {
        self.explain(lit)
    }
}

/// Explainer for runs without a reasoning module; no `Reason::Xor` can ever
/// appear, so being asked is a logic error.
pub struct NoXorExplainer;

impl XorExplainer for NoXorExplainer {
    fn explain(&mut self, lit: Lit) -> OrClause {
        unreachable!("literal {lit} has an xor reason but no module is attached")
    }
}

#[derive(Clone, Debug)]
struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
    removed: bool,
    activity: f64,
}

#[derive(Clone, Copy, Debug)]
struct Watcher {
    clause: ClauseId,
    /// A literal of the clause other than the watched one; if it is already
    /// true the clause cannot propagate and the watch list walk skips it.
    blocker: Lit,
}

/// Result of conflict analysis: an asserting clause and the level to jump
/// back to before adding it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Analysis {
    pub lits: Vec<Lit>,
    pub backjump: u32,
}

/// The restart interval multiplier: 1, 1, 2, 1, 1, 2, 4, 1, 1, 2, ...
pub const fn luby(i: u64) -> u64 {
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    let mut i = i;
    let mut size = size;
    let mut seq = seq;
    while size - 1 != i {
        size = (size - 1) / 2;
        seq -= 1;
        i %= size;
    }
    1u64 << seq
}

#[derive(Clone, Copy, Debug, Default)]
pub struct CdclStats {
    pub propagations: u64,
    pub decisions: u64,
}

/// The CDCL state: clause database, trail, watches and branching heuristics.
#[derive(Debug)]
pub struct Cdcl {
    num_vars: u32,
    clauses: Vec<Clause>,
    watches: Vec<Vec<Watcher>>,
    assign: Assignment,
    reason: Vec<Reason>,
    level: Vec<u32>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    /// Set while a level-0 contradiction has been found.
    ok: bool,
    activity: Vec<f64>,
    var_inc: f64,
    var_decay: f64,
    cla_inc: f64,
    cla_decay: f64,
    phase_saving: bool,
    polarity: Vec<bool>,
    seen: Vec<bool>,
    pub stats: CdclStats,
}

impl Cdcl {
    pub fn new(num_vars: u32, phase_saving: bool) -> Cdcl {
        // Per-variable tables are id-indexed with slot 0 unused.
        let n = num_vars as usize + 1;
        Cdcl {
            num_vars,
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            assign: Assignment::new(num_vars),
            reason: vec![Reason::Decision; n],
            level: vec![0; n],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            ok: true,
            activity: vec![0.0; n],
            var_inc: 1.0,
            var_decay: 0.95,
            cla_inc: 1.0,
            cla_decay: 0.999,
            phase_saving,
            polarity: vec![false; n],
            seen: vec![false; n],
            stats: CdclStats::default(),
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn is_ok(&self) -> bool {
        self.ok
    }

    pub fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    pub fn trail(&self) -> &[Lit] {
        &self.trail
    }

    pub fn assignment(&self) -> &Assignment {
        &self.assign
    }

    pub fn value(&self, lit: Lit) -> Option<bool> {
        self.assign.lit_value(lit)
    }

    pub fn level_of(&self, var: Var) -> u32 {
        self.level[var.index()]
    }

    pub fn reason_of(&self, var: Var) -> Reason {
        self.reason[var.index()]
    }

    pub fn num_assigned(&self) -> usize {
        self.trail.len()
    }

    pub fn clause_lits(&self, id: ClauseId) -> &[Lit] {
        &self.clauses[id.idx()].lits
    }

    /// Adds an input clause. Must be called at level 0 with a normalized
    /// clause (no duplicate or complementary literals). Empty clauses and
    /// failed unit enqueues set the solver unsatisfiable.
    pub fn add_input_clause(&mut self, lits: Vec<Lit>) {
        debug_assert_eq!(self.decision_level(), 0);
        if !self.ok {
            return;
        }
        match lits.len() {
            0 => self.ok = false,
            1 => {
                if !self.assign_checked(lits[0], Reason::Decision) {
                    self.ok = false;
                }
            }
            _ => {
                self.attach(lits, false);
            }
        }
    }

    /// Adds an asserting learnt clause after backjumping and enqueues its
    /// first literal. The second literal must be the one with the highest
    /// remaining level (analysis puts it there), keeping the watches valid.
    pub fn add_learnt_clause(&mut self, lits: Vec<Lit>) {
        debug_assert!(!lits.is_empty());
        if lits.len() == 1 {
            debug_assert_eq!(self.decision_level(), 0);
            if !self.assign_checked(lits[0], Reason::Decision) {
                self.ok = false;
            }
            return;
        }
        let asserting = lits[0];
        let id = self.attach(lits, true);
        self.bump_clause(id);
        let ok = self.assign_checked(asserting, Reason::Clause(id));
        debug_assert!(ok, "learnt clause must be asserting after backjump");
    }

    fn attach(&mut self, lits: Vec<Lit>, learnt: bool) -> ClauseId {
        debug_assert!(lits.len() >= 2);
        let id = ClauseId(self.clauses.len() as u32);
        for &w in &lits[..2] {
            self.watches[(!w).index()].push(Watcher { clause: id, blocker: lits[1] });
        }
        self.clauses.push(Clause { lits, learnt, removed: false, activity: 0.0 });
        id
    }

    /// Assigns a literal, failing if it is already false.
    pub fn assign_checked(&mut self, lit: Lit, reason: Reason) -> bool {
        match self.value(lit) {
            Some(true) => true,
            Some(false) => false,
            None => {
                self.assign.assign_lit(lit);
                let i = lit.var().index();
                self.reason[i] = reason;
                self.level[i] = self.decision_level();
                self.trail.push(lit);
                true
            }
        }
    }

    /// Opens a new decision level and assigns the decision literal.
    pub fn decide(&mut self, lit: Lit) {
        debug_assert_eq!(self.value(lit), None);
        self.trail_lim.push(self.trail.len());
        self.stats.decisions += 1;
        let ok = self.assign_checked(lit, Reason::Decision);
        debug_assert!(ok);
    }

    /// Unit propagation over the or-clauses; returns the conflicting clause
    /// if one is found.
    pub fn propagate(&mut self) -> Option<ClauseId> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let mut ws = std::mem::take(&mut self.watches[p.index()]);
            let mut keep = 0;
            let mut conflict = None;
            'watchers: for i in 0..ws.len() {
                let w = ws[i];
                if self.value(w.blocker) == Some(true) {
                    ws[keep] = w;
                    keep += 1;
                    continue;
                }
                let c = &mut self.clauses[w.clause.idx()];
                if c.removed {
                    continue; // lazily dropped watch
                }
                // Make lits[1] the falsified watched literal.
                if c.lits[0] == !p {
                    c.lits.swap(0, 1);
                }
                debug_assert_eq!(c.lits[1], !p);
                let first = c.lits[0];
                if self.assign.lit_value(first) == Some(true) {
                    ws[keep] = Watcher { clause: w.clause, blocker: first };
                    keep += 1;
                    continue;
                }
                for k in 2..c.lits.len() {
                    if self.assign.lit_value(c.lits[k]) != Some(false) {
                        c.lits.swap(1, k);
                        let moved = c.lits[1];
                        self.watches[(!moved).index()]
                            .push(Watcher { clause: w.clause, blocker: first });
                        continue 'watchers;
                    }
                }
                // Unit or conflicting.
                ws[keep] = Watcher { clause: w.clause, blocker: first };
                keep += 1;
                if !self.assign_checked(first, Reason::Clause(w.clause)) {
                    conflict = Some(w.clause);
                    for j in i + 1..ws.len() {
                        ws[keep] = ws[j];
                        keep += 1;
                    }
                    break;
                }
            }
            ws.truncate(keep);
            self.watches[p.index()] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    /// First-UIP conflict analysis. `conflict` is a clause with all literals
    /// false under the trail and at least one at the current level. Returns
    /// the asserting clause (UIP literal first, highest-level remainder
    /// second) and the backjump level.
    pub fn analyze(
        &mut self,
        conflict: &[Lit],
        ex: &mut dyn XorExplainer,
        minimize: bool,
    ) -> Analysis {
        debug_assert!(self.decision_level() > 0);
        let mut learnt: Vec<Lit> = vec![conflict[0]]; // placeholder for the UIP
        let mut to_clear: Vec<Var> = Vec::new();
        let mut pending: Vec<Lit> = conflict.to_vec();
        let mut open = 0usize; // unresolved current-level literals
        let mut idx = self.trail.len();
        let uip = loop {
            for &q in &pending {
                let v = q.var();
                debug_assert_eq!(self.value(q), Some(false));
                if !self.seen[v.index()] && self.level[v.index()] > 0 {
                    self.seen[v.index()] = true;
                    to_clear.push(v);
                    self.bump_var(v);
                    if self.level[v.index()] >= self.decision_level() {
                        open += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            let p = loop {
                idx -= 1;
                let p = self.trail[idx];
                if self.seen[p.var().index()] {
                    break p;
                }
            };
            self.seen[p.var().index()] = false;
            open -= 1;
            if open == 0 {
                break p;
            }
            pending = self.reason_lits(p, ex, false);
        };
        learnt[0] = !uip;
        if minimize {
            let mut kept = vec![learnt[0]];
            for i in 1..learnt.len() {
                let l = learnt[i];
                let redundant = self.reason[l.var().index()] != Reason::Decision
                    && self.lit_redundant(l, ex, &mut to_clear);
                if !redundant {
                    kept.push(l);
                }
            }
            learnt = kept;
        }
        for v in to_clear {
            self.seen[v.index()] = false;
        }
        // Place the highest-level remaining literal second for the watches.
        let backjump = if learnt.len() == 1 {
            0
        } else {
            let mut at = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var().index()] > self.level[learnt[at].var().index()] {
                    at = i;
                }
            }
            learnt.swap(1, at);
            self.level[learnt[1].var().index()]
        };
        Analysis { lits: learnt, backjump }
    }

    /// The reason literals of a trail literal, excluding the literal itself —
    /// i.e. the antecedents that forced it, all false under the trail.
    fn reason_lits(&mut self, p: Lit, ex: &mut dyn XorExplainer, min: bool) -> Vec<Lit> {
        match self.reason[p.var().index()] {
            Reason::Decision => unreachable!("resolving on a decision"),
            Reason::Clause(id) => {
                self.bump_clause(id);
                self.clauses[id.idx()].lits.iter().copied().filter(|&l| l != p).collect()
            }
            Reason::Xor(l) => {
                debug_assert_eq!(l, p);
                let c = if min { ex.explain_min(p) } else { ex.explain(p) };
                debug_assert!(c.lits.contains(&p));
                c.lits.into_iter().filter(|&l| l != p).collect()
            }
        }
    }

    /// Whether every path from `l`'s reason terminates in literals already
    /// in the learnt clause (standard recursive minimization test). Marks
    /// added while proving redundancy are rolled back on failure.
    fn lit_redundant(&mut self, l: Lit, ex: &mut dyn XorExplainer, to_clear: &mut Vec<Var>) -> bool {
        let top = to_clear.len();
        let mut stack = vec![!l]; // trail form of the learnt literal
        while let Some(p) = stack.pop() {
            for q in self.reason_lits(p, ex, true) {
                let v = q.var();
                if self.seen[v.index()] || self.level[v.index()] == 0 {
                    continue;
                }
                if self.reason[v.index()] == Reason::Decision {
                    for &w in &to_clear[top..] {
                        self.seen[w.index()] = false;
                    }
                    to_clear.truncate(top);
                    return false;
                }
                self.seen[v.index()] = true;
                to_clear.push(v);
                stack.push(!q);
            }
        }
        true
    }

    /// Undoes all assignments above `level`.
    pub fn backjump(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let keep = self.trail_lim[level as usize];
        for &l in &self.trail[keep..] {
            let i = l.var().index();
            if self.phase_saving {
                self.polarity[i] = l.is_positive();
            }
            self.assign.clear(l.var());
            self.reason[i] = Reason::Decision;
        }
        self.trail.truncate(keep);
        self.trail_lim.truncate(level as usize);
        self.qhead = keep;
    }

    /// Overrides the saved polarity used when `v` is next branched on.
    pub fn set_polarity(&mut self, v: Var, positive: bool) {
        self.polarity[v.index()] = positive;
    }

    /// Picks the unassigned variable with the highest activity (lowest index
    /// on ties), signed by its saved polarity. `None` when all are assigned.
    pub fn pick_branch(&mut self) -> Option<Lit> {
        let mut best: Option<Var> = None;
        for id in 1..=self.num_vars {
            let v = Var::new(id);
            if self.assign.get(v).is_none()
                && best.map_or(true, |b| self.activity[v.index()] > self.activity[b.index()])
            {
                best = Some(v);
            }
        }
        best.map(|v| Lit::new(v, self.polarity[v.index()]))
    }

    fn bump_var(&mut self, v: Var) {
        self.activity[v.index()] += self.var_inc;
        if self.activity[v.index()] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
    }

    fn bump_clause(&mut self, id: ClauseId) {
        let c = &mut self.clauses[id.idx()];
        if !c.learnt {
            return;
        }
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for c in &mut self.clauses {
                c.activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    /// Ages all activities after a conflict.
    pub fn decay_activities(&mut self) {
        self.var_inc /= self.var_decay;
        self.cla_inc /= self.cla_decay;
    }

    fn locked(&self, id: ClauseId) -> bool {
        let first = self.clauses[id.idx()].lits[0];
        self.value(first) == Some(true) && self.reason[first.var().index()] == Reason::Clause(id)
    }

    /// Removes the lower-activity half of the removable learnt clauses
    /// (keeping binary and reason-locked ones). Returns how many were
    /// dropped.
    pub fn reduce_learnts(&mut self) -> usize {
        let mut ids: Vec<ClauseId> = (0..self.clauses.len() as u32)
            .map(ClauseId)
            .filter(|&id| {
                let c = &self.clauses[id.idx()];
                c.learnt && !c.removed && c.lits.len() > 2 && !self.locked(id)
            })
            .collect();
        ids.sort_by(|a, b| {
            self.clauses[a.idx()]
                .activity
                .partial_cmp(&self.clauses[b.idx()].activity)
                .unwrap()
                .then(a.0.cmp(&b.0))
        });
        let drop = ids.len() / 2;
        for &id in &ids[..drop] {
            let c = &mut self.clauses[id.idx()];
            c.removed = true;
            let watched: Vec<Lit> = c.lits[..2].to_vec();
            for w in watched {
                self.watches[(!w).index()].retain(|x| x.clause != id);
            }
        }
        drop
    }

    pub fn num_learnts(&self) -> usize {
        self.clauses.iter().filter(|c| c.learnt && !c.removed).count()
    }
}
