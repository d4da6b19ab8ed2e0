//! Brute-force and algebraic reference oracles used to validate the solver:
//! exhaustive model enumeration, entailment checks, and GF(2) feasibility of
//! pure xor systems. These are intentionally simple and independent of the
//! solver's data structures beyond the shared clause types.

use crate::algebra::{Assignment, Lit, OrClause, Var, XorClause};
use crate::formula::CnfXorFormula;
use std::fmt;

/// Hard cap on variable count for exhaustive enumeration.
pub const ENUM_VAR_LIMIT: u32 = 24;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct TooManyVars {
    pub vars: u32,
}

impl fmt::Display for TooManyVars {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} variables exceed the enumeration limit of {}",
            self.vars, ENUM_VAR_LIMIT
        )
    }
}

impl std::error::Error for TooManyVars {}

/// Result of exhaustive enumeration: model count and the first model found
/// in lexicographic assignment order (variable 1 is the least significant).
#[derive(Clone, Debug, PartialEq)]
pub struct ModelCount {
    pub count: u64,
    pub first: Option<Assignment>,
}

/// Bit-mask compiled view of a formula for fast exhaustive evaluation.
struct CompiledFormula {
    num_vars: u32,
    ors: Vec<(u32, u32)>,        // (positive literal mask, negative literal mask)
    xors: Vec<(u32, bool)>,      // (variable mask, rhs)
}

impl CompiledFormula {
    fn build(f: &CnfXorFormula) -> Result<CompiledFormula, TooManyVars> {
        if f.num_vars() > ENUM_VAR_LIMIT {
            return Err(TooManyVars { vars: f.num_vars() });
        }
        let var_bit = |v: Var| 1u32 << (v.id() - 1);
        let ors = f
            .or_clauses()
            .iter()
            .map(|c| {
                let mut pos = 0;
                let mut neg = 0;
                for &l in &c.lits {
                    if l.is_positive() {
                        pos |= var_bit(l.var());
                    } else {
                        neg |= var_bit(l.var());
                    }
                }
                (pos, neg)
            })
            .collect();
        let xors = f
            .xor_clauses()
            .iter()
            .map(|x| {
                let mask = x.vars().iter().fold(0, |m, &v| m | var_bit(v));
                (mask, x.rhs())
            })
            .collect();
        Ok(CompiledFormula { num_vars: f.num_vars(), ors, xors })
    }

    fn satisfied_by(&self, mask: u32) -> bool {
        self.ors.iter().all(|&(pos, neg)| mask & pos != 0 || !mask & neg != 0)
            && self.xors.iter().all(|&(vars, rhs)| ((mask & vars).count_ones() % 2 == 1) == rhs)
    }
}

fn mask_to_assignment(mask: u32, num_vars: u32) -> Assignment {
    let mut a = Assignment::new(num_vars);
    for v in 1..=num_vars {
        a.set(Var::new(v), mask >> (v - 1) & 1 == 1);
    }
    a
}

/// Counts all models of the formula by exhaustive enumeration.
pub fn enumerate_models(f: &CnfXorFormula) -> Result<ModelCount, TooManyVars> {
    let compiled = CompiledFormula::build(f)?;
    let mut count = 0u64;
    let mut first = None;
    for mask in 0u64..(1u64 << compiled.num_vars) {
        if compiled.satisfied_by(mask as u32) {
            count += 1;
            if first.is_none() {
                first = Some(mask_to_assignment(mask as u32, compiled.num_vars));
            }
        }
    }
    Ok(ModelCount { count, first })
}

/// True iff every model of `f` satisfies the xor-clause `c` (checked over
/// the variables of `f` extended with those of `c`).
pub fn entails_xor(f: &CnfXorFormula, c: &XorClause) -> Result<bool, TooManyVars> {
    let mut ext = f.clone();
    for &v in c.vars() {
        // Grow the variable range without adding constraints.
        if v.id() > ext.num_vars() {
            ext.add_or_clause(vec![Lit::positive(v), Lit::negative(v)]);
        }
    }
    let compiled = CompiledFormula::build(&ext)?;
    let n = compiled.num_vars.max(c.vars().last().map_or(0, |v| v.id()));
    for mask in 0u64..(1u64 << n) {
        let mask = mask as u32;
        if compiled.satisfied_by(mask) {
            let a = mask_to_assignment(mask, n);
            if c.evaluate(&a) != Some(true) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// True iff every model of `f` satisfies the or-clause `c`.
pub fn entails_or(f: &CnfXorFormula, c: &OrClause) -> Result<bool, TooManyVars> {
    let mut ext = f.clone();
    for &l in &c.lits {
        if l.var().id() > ext.num_vars() {
            ext.add_or_clause(vec![Lit::positive(l.var()), Lit::negative(l.var())]);
        }
    }
    let compiled = CompiledFormula::build(&ext)?;
    for mask in 0u64..(1u64 << compiled.num_vars) {
        let mask = mask as u32;
        if compiled.satisfied_by(mask) {
            let a = mask_to_assignment(mask, compiled.num_vars);
            if !c.lits.iter().any(|&l| a.lit_value(l) == Some(true)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// True iff `f` entails the biconditional of two xor-clauses. Since
/// `a ⇔ b` is itself the xor-clause `a ⊕ b ⊕ ⊤`, this reduces to a plain
/// entailment of their clause sum.
pub fn entails_equiv(f: &CnfXorFormula, a: &XorClause, b: &XorClause) -> Result<bool, TooManyVars> {
    entails_xor(f, &a.xor_sum(b))
}

/// Decides feasibility of a pure xor system plus unary assumptions by
/// Gaussian elimination over GF(2).
pub fn gf2_feasible(xors: &[XorClause], assumptions: &[Lit]) -> bool {
    // Dense rows over the variables that actually occur.
    let mut cols: Vec<Var> = xors
        .iter()
        .flat_map(|c| c.vars().iter().copied())
        .chain(assumptions.iter().map(|l| l.var()))
        .collect();
    cols.sort();
    cols.dedup();
    let col_of = |v: Var| cols.binary_search(&v).expect("collected above");
    let words = cols.len().div_ceil(64).max(1);

    struct Row {
        bits: Vec<u64>,
        rhs: bool,
    }
    impl Row {
        fn leading(&self) -> Option<usize> {
            self.bits
                .iter()
                .enumerate()
                .find(|(_, &w)| w != 0)
                .map(|(i, &w)| i * 64 + w.trailing_zeros() as usize)
        }
        fn xor_in(&mut self, other: &Row) {
            for (a, b) in self.bits.iter_mut().zip(&other.bits) {
                *a ^= b;
            }
            self.rhs ^= other.rhs;
        }
    }

    let mut pivots: Vec<Row> = Vec::new();
    let add_row = |mut row: Row, pivots: &mut Vec<Row>| -> bool {
        loop {
            match row.leading() {
                None => return !row.rhs, // 0 = 1 is the infeasible witness
                Some(lead) => {
                    if let Some(p) = pivots.iter().find(|p| p.leading() == Some(lead)) {
                        let p = Row { bits: p.bits.clone(), rhs: p.rhs };
                        row.xor_in(&p);
                    } else {
                        pivots.push(row);
                        return true;
                    }
                }
            }
        }
    };

    let clause_row = |vars: &[Var], rhs: bool| {
        let mut bits = vec![0u64; words];
        for &v in vars {
            let c = col_of(v);
            bits[c / 64] |= 1 << (c % 64);
        }
        Row { bits, rhs }
    };

    for c in xors {
        if !add_row(clause_row(c.vars(), c.rhs()), &mut pivots) {
            return false;
        }
    }
    for &l in assumptions {
        if !add_row(clause_row(&[l.var()], l.is_positive()), &mut pivots) {
            return false;
        }
    }
    true
}
