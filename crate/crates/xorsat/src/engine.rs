//! The top-level solver: CDCL search over the or-clauses with the
//! xor-clauses delegated to a pluggable reasoning module.
//!
//! After every run of CNF unit propagation the engine hands newly assigned
//! trail literals to the module and asks it to deduce. Implied literals
//! enter the CDCL trail with the module as their lazy reason provider (or
//! with an eagerly materialized implying clause), and module conflicts are
//! analyzed with the usual first-UIP scheme, fetching implying clauses on
//! demand. With parity explanations enabled the engine additionally turns
//! them into learnt xor-clauses that are fed back into the module.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{Assignment, Lit, Var, XorClause, XorWidthError};
use crate::cdcl::{luby, Cdcl, Reason, XorExplainer};
use crate::derivation::CutPolicy;
use crate::formula::CnfXorFormula;
use crate::learn::{
    is_asserting, learnable_from_conflict, learnable_from_implication, LearnedXorDb,
};
use crate::xr::ec::EcModule;
use crate::xr::subst::SubstModule;
use crate::xr::up::{UpMode, UpModule};
use crate::xr::{ExplainTarget, ExplanationMode, XorModule};

/// Which xor reasoning module the solver runs.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ModuleChoice {
    /// No module: the xor-clauses are translated to or-clauses up front.
    None,
    /// Xor unit propagation, eagerly rewriting every clause.
    Up,
    /// Xor unit propagation with two watched variables per clause.
    UpSkip,
    /// Equivalence substitution.
    Subst,
    /// Equivalence classes over a parity union-find.
    Ec,
}

/// Knobs for [`Solver::new`]; `Default` gives lazily explained xor unit
/// propagation with closest-cut explanations and no xor learning.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub module: ModuleChoice,
    /// How implying or-clauses are assembled from derivation cuts.
    pub explanation: ExplanationMode,
    /// Cut policy for explanations used as reasons during analysis.
    pub cut_primary: CutPolicy,
    /// Cut policy for explanations fetched during clause minimization.
    pub cut_minimization: CutPolicy,
    /// Learn xor-clauses from parity explanations.
    pub learn_xor: bool,
    /// Seeds the initial branching polarities.
    pub seed: u64,
    /// Give up with an unknown outcome after this many conflicts.
    pub max_conflicts: Option<u64>,
    /// Base interval, in conflicts, of the restart sequence.
    pub restart_base: u64,
    /// Materialize implying clauses at implication time instead of lazily
    /// during conflict analysis.
    pub eager_explanations: bool,
    /// Snapshot the module's derivation graph at every module conflict.
    pub record_intermediates: bool,
    /// Literals to branch on first, in order, while their variables are
    /// unassigned.
    pub decision_hints: Vec<Lit>,
    /// Record a line for every explanation the engine fetches.
    pub log_explanations: bool,
}

impl Default for SolverConfig {
    fn default() -> SolverConfig {
        SolverConfig {
            module: ModuleChoice::Up,
            explanation: ExplanationMode::Implicative,
            cut_primary: CutPolicy::Closest,
            cut_minimization: CutPolicy::Furthest,
            learn_xor: false,
            seed: 0,
            max_conflicts: None,
            restart_base: 100,
            eager_explanations: false,
            record_intermediates: false,
            decision_hints: Vec::new(),
            log_explanations: false,
        }
    }
}

/// A configuration or formula the solver cannot run with.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BuildError {
    /// Parity explanations need a module with a derivation graph.
    ParityNeedsGraph(ModuleChoice),
    /// Xor learning needs parity explanations.
    LearningNeedsParity,
    /// A decision hint names a variable outside the formula.
    HintOutOfRange(Lit),
    /// Translating the xor part to CNF hit an over-wide clause.
    XorTooWide(XorWidthError),
}

impl fmt::Display for BuildError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuildError::ParityNeedsGraph(m) => {
                write!(f, "parity explanations are not available with module {m:?}")
            }
            BuildError::LearningNeedsParity => {
                write!(f, "xor learning requires parity explanations")
            }
            BuildError::HintOutOfRange(l) => {
                write!(f, "decision hint {l} is outside the formula")
            }
            BuildError::XorTooWide(e) => write!(f, "cannot translate xors to cnf: {e}"),
        }
    }
}

impl std::error::Error for BuildError {}

/// The verdict of a solve run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    Sat(Assignment),
    Unsat,
    /// Gave up (conflict budget exhausted).
    Unknown,
}

/// Outcome plus counters and optional traces of a finished run.
#[derive(Debug)]
pub struct SolveResult {
    pub outcome: SolveOutcome,
    /// Deterministic counters ("conflicts", "decisions", "learned_xor", ...).
    pub stats: BTreeMap<String, u64>,
    /// One line per explanation fetched, when enabled.
    pub explanation_log: Vec<String>,
    /// Derivation graph snapshots, when enabled.
    pub graph_dumps: Vec<String>,
    /// Xor-clauses learnt from parity explanations, in admission order.
    pub learned_xors: Vec<XorClause>,
}

/// What one xor deduction round led to.
enum XorStep {
    /// Nothing new.
    Quiet,
    /// New literals entered the trail; propagate again.
    Progress,
    /// A falsified implication or a module conflict, with the all-false
    /// conflict clause and any xor-learning candidates gathered from it.
    Conflict { lits: Vec<Lit>, candidates: Vec<XorClause> },
    /// The xor part is infeasible regardless of assumptions.
    Infeasible,
}

/// A solver instance bound to one formula and configuration.
pub struct Solver {
    cdcl: Cdcl,
    module: Option<Box<dyn XorModule>>,
    cfg: SolverConfig,
    formula: CnfXorFormula,
    db: LearnedXorDb,
    /// Prefix of the CDCL trail already handed to the module.
    synced: usize,
    conflicts: u64,
    conflicts_since_restart: u64,
    restarts: u64,
    learned_or: u64,
    explanation_log: Vec<String>,
    graph_dumps: Vec<String>,
    learned_xors: Vec<XorClause>,
}

impl Solver {
    pub fn new(formula: &CnfXorFormula, cfg: SolverConfig) -> Result<Solver, BuildError> {
        let graphful = matches!(
            cfg.module,
            ModuleChoice::Up | ModuleChoice::UpSkip | ModuleChoice::Subst
        );
        if cfg.explanation == ExplanationMode::Parity && !graphful {
            return Err(BuildError::ParityNeedsGraph(cfg.module));
        }
        if cfg.learn_xor && cfg.explanation != ExplanationMode::Parity {
            return Err(BuildError::LearningNeedsParity);
        }
        for &h in &cfg.decision_hints {
            if h.var().id() > formula.num_vars() {
                return Err(BuildError::HintOutOfRange(h));
            }
        }
        let effective = if cfg.module == ModuleChoice::None {
            formula.export_cnf().map_err(BuildError::XorTooWide)?
        } else {
            formula.clone()
        };
        let mut cdcl = Cdcl::new(effective.num_vars(), true);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for id in 1..=effective.num_vars() {
            cdcl.set_polarity(Var::new(id), rng.gen());
        }
        for c in effective.or_clauses() {
            cdcl.add_input_clause(c.lits.clone());
        }
        let n = effective.num_vars();
        let xors = effective.xor_clauses();
        let module: Option<Box<dyn XorModule>> = match cfg.module {
            ModuleChoice::None => None,
            ModuleChoice::Up => Some(Box::new(UpModule::new(n, xors, UpMode::Full))),
            ModuleChoice::UpSkip => Some(Box::new(UpModule::new(n, xors, UpMode::Skip))),
            ModuleChoice::Subst => Some(Box::new(SubstModule::new(n, xors))),
            ModuleChoice::Ec => Some(Box::new(EcModule::new(n, xors))),
        };
        let db = LearnedXorDb::new(xors);
        Ok(Solver {
            cdcl,
            module,
            cfg,
            formula: formula.clone(),
            db,
            synced: 0,
            conflicts: 0,
            conflicts_since_restart: 0,
            restarts: 0,
            learned_or: 0,
            explanation_log: Vec::new(),
            graph_dumps: Vec::new(),
            learned_xors: Vec::new(),
        })
    }

    /// Runs the search to completion (or to the conflict budget).
    pub fn solve(mut self) -> SolveResult {
        let outcome = self.run();
        if self.cfg.record_intermediates {
            if let Some(m) = &self.module {
                self.graph_dumps.push(m.graph().dump());
            }
        }
        let mut stats = BTreeMap::new();
        stats.insert("conflicts".to_string(), self.conflicts);
        stats.insert("decisions".to_string(), self.cdcl.stats.decisions);
        stats.insert("propagations".to_string(), self.cdcl.stats.propagations);
        stats.insert("restarts".to_string(), self.restarts);
        stats.insert("learned_or".to_string(), self.learned_or);
        stats.insert("learned_xor".to_string(), self.learned_xors.len() as u64);
        if let Some(m) = &self.module {
            let ms = m.stats();
            stats.insert("xor_implied".to_string(), ms.implied);
            stats.insert("xor_conflicts".to_string(), ms.conflicts);
            stats.insert("xor_vertices_peak".to_string(), ms.vertices_peak as u64);
        }
        SolveResult {
            outcome,
            stats,
            explanation_log: self.explanation_log,
            graph_dumps: self.graph_dumps,
            learned_xors: self.learned_xors,
        }
    }

    fn run(&mut self) -> SolveOutcome {
        if !self.cdcl.is_ok() {
            return SolveOutcome::Unsat;
        }
        loop {
            if let Some(c) = self.cdcl.propagate() {
                let lits = self.cdcl.clause_lits(c).to_vec();
                if !self.handle_conflict(lits, Vec::new()) {
                    return SolveOutcome::Unsat;
                }
                continue;
            }
            match self.deduce_xor() {
                XorStep::Infeasible => return SolveOutcome::Unsat,
                XorStep::Conflict { lits, candidates } => {
                    if !self.handle_conflict(lits, candidates) {
                        return SolveOutcome::Unsat;
                    }
                    continue;
                }
                XorStep::Progress => continue,
                XorStep::Quiet => {}
            }
            if self.cfg.max_conflicts.is_some_and(|m| self.conflicts >= m) {
                return SolveOutcome::Unknown;
            }
            if self.conflicts_since_restart >= self.cfg.restart_base.max(1) * luby(self.restarts) {
                self.restart();
            }
            match self.pick_decision() {
                Some(l) => self.cdcl.decide(l),
                None => {
                    let model = self.cdcl.assignment().clone();
                    self.check_model(&model);
                    return SolveOutcome::Sat(model);
                }
            }
        }
    }

    /// Feeds the module the unseen trail suffix, deduces, and injects what
    /// came back.
    fn deduce_xor(&mut self) -> XorStep {
        if self.module.is_none() {
            return XorStep::Quiet;
        }
        let level = self.cdcl.decision_level();
        let mut falsified = None;
        {
            let module = self.module.as_deref_mut().unwrap();
            let mut i = self.synced;
            while i < self.cdcl.trail().len() {
                let l = self.cdcl.trail()[i];
                if module.knows_var(l.var()) {
                    match module.value(l.var()) {
                        None => module.assign(l, self.cdcl.level_of(l.var())),
                        Some(b) if b == l.value() => {}
                        Some(b) => {
                            // The module silently derived the opposite of a
                            // trail literal it had not been told yet (eager
                            // propagation inside assign): a conflict.
                            falsified = Some(Lit::new(l.var(), b));
                            break;
                        }
                    }
                }
                i += 1;
            }
            self.synced = i;
        }
        let mut progress = false;
        if falsified.is_none() {
            let d = self.module.as_deref_mut().unwrap().deduce();
            for &l in &d.implied {
                match self.cdcl.value(l) {
                    Some(true) => {}
                    None => {
                        self.inject(l, level);
                        progress = true;
                    }
                    Some(false) => {
                        falsified = Some(l);
                        break;
                    }
                }
            }
            if falsified.is_none() && d.conflict {
                let module = self.module.as_deref_mut().unwrap();
                let e = module.explain_conflict(self.cfg.cut_primary, self.cfg.explanation);
                let mut candidates = Vec::new();
                if self.cfg.learn_xor {
                    if let Some(p) = module.parity(ExplainTarget::Conflict, CutPolicy::Furthest) {
                        let c = learnable_from_conflict(&p);
                        if c.is_falsum() {
                            return XorStep::Infeasible;
                        }
                        candidates.push(c);
                    }
                }
                if self.cfg.record_intermediates {
                    self.graph_dumps.push(module.graph().dump());
                }
                if self.cfg.log_explanations {
                    self.explanation_log.push(format!("conflict: {}", e.clause));
                }
                return XorStep::Conflict { lits: e.clause.lits, candidates };
            }
        }
        if let Some(l) = falsified {
            let module = self.module.as_deref_mut().unwrap();
            let e = module.explain(l, self.cfg.cut_primary, self.cfg.explanation);
            let mut candidates = Vec::new();
            if self.cfg.learn_xor {
                if let Some(p) = module.parity(ExplainTarget::Lit(l), CutPolicy::Furthest) {
                    candidates.extend(learnable_from_implication(l, &p));
                }
            }
            if self.cfg.record_intermediates {
                self.graph_dumps.push(module.graph().dump());
            }
            if self.cfg.log_explanations {
                self.explanation_log.push(format!("clash {l}: {}", e.clause));
            }
            return XorStep::Conflict { lits: e.clause.lits, candidates };
        }
        if progress {
            XorStep::Progress
        } else {
            XorStep::Quiet
        }
    }

    /// Puts a module-implied literal on the CDCL trail.
    fn inject(&mut self, l: Lit, level: u32) {
        if self.cfg.eager_explanations {
            let module = self.module.as_deref_mut().unwrap();
            let e = module.explain(l, self.cfg.cut_primary, self.cfg.explanation);
            if self.cfg.log_explanations {
                self.explanation_log.push(format!("imply {l}: {}", e.clause));
            }
            let mut lits: Vec<Lit> = e.clause.lits;
            lits.retain(|&x| x != l);
            lits.sort_by_key(|x| std::cmp::Reverse(self.cdcl.level_of(x.var())));
            lits.insert(0, l);
            if lits.len() == 1 && level > 0 {
                // A reason-free implication below level 0 cannot be attached
                // as a clause here; fall back to a lazy reason.
                let ok = self.cdcl.assign_checked(l, Reason::Xor(l));
                debug_assert!(ok);
            } else {
                self.cdcl.add_learnt_clause(lits);
                self.learned_or += 1;
            }
        } else {
            let ok = self.cdcl.assign_checked(l, Reason::Xor(l));
            debug_assert!(ok);
        }
    }

    /// Analyzes a conflict, backjumps, learns. Returns false on refutation.
    fn handle_conflict(&mut self, conflict: Vec<Lit>, mut candidates: Vec<XorClause>) -> bool {
        self.conflicts += 1;
        self.conflicts_since_restart += 1;
        if conflict.is_empty() || self.cdcl.decision_level() == 0 {
            return false;
        }
        let top = conflict.iter().map(|&l| self.cdcl.level_of(l.var())).max().unwrap();
        if top == 0 {
            return false;
        }
        // A module conflict can rest entirely on older levels; analysis
        // needs the conflicting level on top of the trail.
        if top < self.cdcl.decision_level() {
            self.backtrack_to(top);
        }
        let analysis = {
            let mut ex = ModuleExplainer {
                module: self.module.as_deref_mut(),
                cut: self.cfg.cut_primary,
                min_cut: self.cfg.cut_minimization,
                mode: self.cfg.explanation,
                learn: self.cfg.learn_xor,
                candidates: &mut candidates,
                log: if self.cfg.log_explanations {
                    Some(&mut self.explanation_log)
                } else {
                    None
                },
            };
            self.cdcl.analyze(&conflict, &mut ex, true)
        };
        if self.cfg.learn_xor {
            // Keep only candidates that will determine a variable right
            // after the backjump instead of going dormant.
            let level = self.cdcl.decision_level();
            candidates.retain(|c| is_asserting(c, level, |v| self.cdcl.level_of(v)));
        }
        self.backtrack_to(analysis.backjump);
        self.cdcl.add_learnt_clause(analysis.lits);
        self.learned_or += 1;
        self.cdcl.decay_activities();
        for c in candidates {
            if self.db.admit(&c) {
                if let Some(m) = self.module.as_deref_mut() {
                    m.add_clause(&c);
                }
                self.learned_xors.push(c);
            }
        }
        self.cdcl.is_ok()
    }

    fn backtrack_to(&mut self, level: u32) {
        self.cdcl.backjump(level);
        if let Some(m) = self.module.as_deref_mut() {
            m.backtrack(level);
        }
        self.synced = self.synced.min(self.cdcl.trail().len());
    }

    fn restart(&mut self) {
        self.restarts += 1;
        self.conflicts_since_restart = 0;
        self.backtrack_to(0);
        self.db.note_restart();
        if self.cdcl.num_learnts() > 2000 {
            self.cdcl.reduce_learnts();
        }
    }

    fn pick_decision(&mut self) -> Option<Lit> {
        for &h in &self.cfg.decision_hints {
            if self.cdcl.value(h).is_none() {
                return Some(h);
            }
        }
        self.cdcl.pick_branch()
    }

    /// Soundness net: a claimed model must satisfy the original formula.
    fn check_model(&self, model: &Assignment) {
        for c in self.formula.or_clauses() {
            assert!(
                c.lits.iter().any(|&l| model.lit_value(l) == Some(true)),
                "model violates {c}"
            );
        }
        for x in self.formula.xor_clauses() {
            assert_eq!(x.evaluate(model), Some(true), "model violates {x}");
        }
    }
}

/// Bridges conflict analysis to the module: fetches implying clauses for
/// xor-implied literals and, when learning, gathers a furthest-cut parity
/// candidate from every fetch.
struct ModuleExplainer<'a> {
    module: Option<&'a mut (dyn XorModule + 'static)>,
    cut: CutPolicy,
    min_cut: CutPolicy,
    mode: ExplanationMode,
    learn: bool,
    candidates: &'a mut Vec<XorClause>,
    log: Option<&'a mut Vec<String>>,
}

impl ModuleExplainer<'_> {
    fn fetch(&mut self, lit: Lit, policy: CutPolicy) -> crate::algebra::OrClause {
        let module = self.module.as_deref_mut().expect("xor reason without a module");
        let e = module.explain(lit, policy, self.mode);
        if self.learn {
            if let Some(p) = module.parity(ExplainTarget::Lit(lit), CutPolicy::Furthest) {
                if let Some(c) = learnable_from_implication(lit, &p) {
                    self.candidates.push(c);
                }
            }
        }
        if let Some(log) = self.log.as_deref_mut() {
            log.push(format!("explain {lit}: {}", e.clause));
        }
        e.clause
    }
}

impl XorExplainer for ModuleExplainer<'_> {
    fn explain(&mut self, lit: Lit) -> crate::algebra::OrClause {
        self.fetch(lit, self.cut)
    }

    fn explain_min(&mut self, lit: Lit) -> crate::algebra::OrClause {
        self.fetch(lit, self.min_cut)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::enumerate_models;
    use rand::seq::SliceRandom;

    fn lit(code: i32) -> Lit {
        Lit::from_dimacs(code)
    }

    fn xc(codes: &[i32]) -> XorClause {
        XorClause::from_dimacs(codes)
    }

    /// Three chained ternary xors plus or-clauses that force a conflict
    /// after branching against x1 and x2.
    fn worked_example() -> CnfXorFormula {
        let mut f = CnfXorFormula::new(8);
        f.add_xor_clause(xc(&[1, 2, 3]));
        f.add_xor_clause(xc(&[3, 4, 5]));
        f.add_xor_clause(xc(&[3, 5, 6]));
        f.add_or_clause(vec![lit(1), lit(4)]);
        f.add_or_clause(vec![lit(2), lit(7)]);
        f.add_or_clause(vec![lit(-7), lit(-6), lit(8)]);
        f.add_or_clause(vec![lit(-7), lit(-6), lit(-8)]);
        f
    }

    fn random_formula(rng: &mut ChaCha8Rng, num_vars: u32, n_or: usize, n_xor: usize) -> CnfXorFormula {
        let mut f = CnfXorFormula::new(num_vars);
        let vars: Vec<u32> = (1..=num_vars).collect();
        for _ in 0..n_or {
            let len = rng.gen_range(1..=3.min(num_vars as usize));
            let lits = vars
                .choose_multiple(rng, len)
                .map(|&v| Lit::new(Var::new(v), rng.gen()))
                .collect();
            f.add_or_clause(lits);
        }
        for _ in 0..n_xor {
            let len = rng.gen_range(1..=3.min(num_vars as usize));
            let lits: Vec<Lit> = vars
                .choose_multiple(rng, len)
                .map(|&v| Lit::new(Var::new(v), rng.gen()))
                .collect();
            f.add_xor_clause(XorClause::from_literals(lits));
        }
        f
    }

    fn all_configs() -> Vec<SolverConfig> {
        let mut cfgs = Vec::new();
        for module in [
            ModuleChoice::None,
            ModuleChoice::Up,
            ModuleChoice::UpSkip,
            ModuleChoice::Subst,
            ModuleChoice::Ec,
        ] {
            cfgs.push(SolverConfig { module, ..SolverConfig::default() });
        }
        cfgs.push(SolverConfig {
            module: ModuleChoice::Up,
            explanation: ExplanationMode::Parity,
            learn_xor: true,
            ..SolverConfig::default()
        });
        cfgs.push(SolverConfig {
            module: ModuleChoice::Subst,
            eager_explanations: true,
            ..SolverConfig::default()
        });
        cfgs
    }

    #[test]
    fn solves_the_worked_example_and_learns_the_bridging_xor() {
        let cfg = SolverConfig {
            module: ModuleChoice::Up,
            explanation: ExplanationMode::Parity,
            learn_xor: true,
            decision_hints: vec![lit(-1), lit(-2)],
            ..SolverConfig::default()
        };
        let result = Solver::new(&worked_example(), cfg).unwrap().solve();
        assert!(matches!(result.outcome, SolveOutcome::Sat(_)));
        // Of the three parity candidates seen at the first conflict only
        // x4 ≡ x6 determines a variable after the backjump; the second
        // conflict re-derives it and the store rejects the duplicate.
        assert_eq!(result.learned_xors, vec![xc(&[-4, 6])]);
        assert_eq!(result.stats["learned_xor"], 1);
        assert_eq!(result.stats["conflicts"], 2);
    }

    #[test]
    fn every_configuration_agrees_with_the_oracle_on_random_formulas() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1001);
        for case in 0..60 {
            let num_vars = rng.gen_range(3..=9);
            let n_or = rng.gen_range(0..=6);
            let n_xor = rng.gen_range(1..=4);
            let f = random_formula(&mut rng, num_vars, n_or, n_xor);
            let expected = enumerate_models(&f).unwrap().count > 0;
            for cfg in all_configs() {
                let result = Solver::new(&f, cfg.clone()).unwrap().solve();
                let got = match result.outcome {
                    SolveOutcome::Sat(_) => true,
                    SolveOutcome::Unsat => false,
                    SolveOutcome::Unknown => panic!("no budget was set"),
                };
                assert_eq!(got, expected, "case {case} cfg {cfg:?} formula:\n{f:?}");
            }
        }
    }

    #[test]
    fn infeasible_xor_parts_are_refuted_without_decisions_getting_stuck() {
        let mut f = CnfXorFormula::new(2);
        f.add_xor_clause(xc(&[1, 2]));
        f.add_xor_clause(xc(&[-1, 2]));
        for cfg in all_configs() {
            let result = Solver::new(&f, cfg.clone()).unwrap().solve();
            assert_eq!(result.outcome, SolveOutcome::Unsat, "cfg {cfg:?}");
        }
    }

    #[test]
    fn the_conflict_budget_turns_hard_runs_into_unknown() {
        let cfg = SolverConfig { max_conflicts: Some(0), ..SolverConfig::default() };
        let result = Solver::new(&worked_example(), cfg).unwrap().solve();
        assert_eq!(result.outcome, SolveOutcome::Unknown);
    }

    #[test]
    fn invalid_configurations_are_rejected() {
        let f = worked_example();
        let parity_ec = SolverConfig {
            module: ModuleChoice::Ec,
            explanation: ExplanationMode::Parity,
            ..SolverConfig::default()
        };
        assert_eq!(
            Solver::new(&f, parity_ec).err(),
            Some(BuildError::ParityNeedsGraph(ModuleChoice::Ec))
        );
        let learn_implicative =
            SolverConfig { learn_xor: true, ..SolverConfig::default() };
        assert_eq!(
            Solver::new(&f, learn_implicative).err(),
            Some(BuildError::LearningNeedsParity)
        );
        let bad_hint =
            SolverConfig { decision_hints: vec![lit(99)], ..SolverConfig::default() };
        assert_eq!(Solver::new(&f, bad_hint).err(), Some(BuildError::HintOutOfRange(lit(99))));
        let mut wide = CnfXorFormula::new(30);
        wide.add_xor_clause(XorClause::from_parts((1..=30).map(Var::new).collect(), true));
        let none = SolverConfig { module: ModuleChoice::None, ..SolverConfig::default() };
        assert!(matches!(Solver::new(&wide, none), Err(BuildError::XorTooWide(_))));
    }

    #[test]
    fn equal_seeds_reproduce_runs_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1002);
        let f = random_formula(&mut rng, 9, 8, 4);
        let cfg = SolverConfig {
            module: ModuleChoice::Subst,
            explanation: ExplanationMode::Parity,
            learn_xor: true,
            seed: 7,
            ..SolverConfig::default()
        };
        let a = Solver::new(&f, cfg.clone()).unwrap().solve();
        let b = Solver::new(&f, cfg).unwrap().solve();
        assert_eq!(a.outcome, b.outcome);
        assert_eq!(a.stats, b.stats);
        assert_eq!(a.learned_xors, b.learned_xors);
    }

    #[test]
    fn traces_capture_explanations_and_graphs_when_enabled() {
        let cfg = SolverConfig {
            module: ModuleChoice::Up,
            decision_hints: vec![lit(-1), lit(-2)],
            record_intermediates: true,
            log_explanations: true,
            ..SolverConfig::default()
        };
        let result = Solver::new(&worked_example(), cfg).unwrap().solve();
        assert!(matches!(result.outcome, SolveOutcome::Sat(_)));
        assert!(result.explanation_log.iter().any(|l| l.starts_with("explain ")));
        assert!(!result.graph_dumps.is_empty());
        assert!(result.graph_dumps.last().unwrap().contains("clause@0"));
    }
}
