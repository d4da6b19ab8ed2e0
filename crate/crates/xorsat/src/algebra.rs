//! Core types for cnf-xor formulas: variables, literals, or-clauses and
//! xor-clauses in a canonical normal form, plus the GF(2) clause algebra
//! (normalization, substitution, clause sums, CNF translation).

use std::fmt;

/// A propositional variable. Ids are 1-based; 0 is not a valid variable.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Var(u32);

impl Var {
    /// Creates a variable from a 1-based id. Panics on 0.
    pub fn new(id: u32) -> Var {
        assert!(id != 0, "variable ids are 1-based");
        Var(id)
    }

    pub fn id(self) -> u32 {
        self.0
    }

    /// Index into dense per-variable tables of size `num_vars + 1`.
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// A literal, packed as `var << 1 | sign` (sign bit set for negation).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit(var.0 << 1 | (!positive) as u32)
    }

    pub fn positive(var: Var) -> Lit {
        Lit::new(var, true)
    }

    pub fn negative(var: Var) -> Lit {
        Lit::new(var, false)
    }

    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    /// The value this literal asserts for its variable.
    pub fn value(self) -> bool {
        self.is_positive()
    }

    /// Converts from a non-zero DIMACS-style signed code.
    pub fn from_dimacs(code: i32) -> Lit {
        assert!(code != 0);
        Lit::new(Var::new(code.unsigned_abs()), code > 0)
    }

    pub fn to_dimacs(self) -> i32 {
        let v = self.var().0 as i32;
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    /// Index into dense per-literal tables of size `2 * (num_vars + 1)`.
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A disjunction of literals. Kept duplicate-free by the constructors used
/// in parsing; an empty clause denotes falsum.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct OrClause {
    pub lits: Vec<Lit>,
}

impl OrClause {
    pub fn new(lits: Vec<Lit>) -> OrClause {
        OrClause { lits }
    }

    /// Deduplicates literals; returns `None` when the clause is tautological
    /// (contains a complementary pair).
    pub fn normalized(mut lits: Vec<Lit>) -> Option<OrClause> {
        lits.sort();
        lits.dedup();
        for w in lits.windows(2) {
            if w[0].var() == w[1].var() {
                return None;
            }
        }
        Some(OrClause { lits })
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }
}

impl fmt::Display for OrClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.lits.iter().enumerate() {
            if i > 0 {
                write!(f, " | ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

/// An xor-clause in normal form: a strictly ascending set of variables and a
/// parity bit, asserting `var_1 ^ ... ^ var_k = rhs`.
///
/// The classic "trailing top" presentation maps onto this as `rhs = false`
/// exactly when the written form carries a `⊤` term: `a ⊕ b ⊕ ⊤` is
/// `vars = [a, b], rhs = false`. The empty clause with `rhs = true` is
/// falsum; with `rhs = false` it is a tautology (written `⊤`).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct XorClause {
    vars: Vec<Var>,
    rhs: bool,
}

impl XorClause {
    /// Builds the normal form of an xor of literals: negations fold into the
    /// parity bit and variables with an even occurrence count cancel.
    /// An empty input yields falsum (the empty xor is false, never true).
    pub fn from_literals<I: IntoIterator<Item = Lit>>(lits: I) -> XorClause {
        let mut rhs = true;
        let mut vars: Vec<Var> = Vec::new();
        for l in lits {
            if !l.is_positive() {
                rhs = !rhs;
            }
            vars.push(l.var());
        }
        vars.sort();
        let mut out: Vec<Var> = Vec::with_capacity(vars.len());
        let mut i = 0;
        while i < vars.len() {
            let mut j = i + 1;
            while j < vars.len() && vars[j] == vars[i] {
                j += 1;
            }
            if (j - i) % 2 == 1 {
                out.push(vars[i]);
            }
            i = j;
        }
        XorClause { vars: out, rhs }
    }

    /// Builds directly from sorted distinct variables and a parity.
    pub fn from_parts(vars: Vec<Var>, rhs: bool) -> XorClause {
        debug_assert!(vars.windows(2).all(|w| w[0] < w[1]), "vars must ascend");
        XorClause { vars, rhs }
    }

    /// Convenience constructor from DIMACS-style literal codes.
    pub fn from_dimacs(codes: &[i32]) -> XorClause {
        XorClause::from_literals(codes.iter().map(|&c| Lit::from_dimacs(c)))
    }

    /// The unary clause equivalent to a single literal.
    pub fn unary(l: Lit) -> XorClause {
        XorClause { vars: vec![l.var()], rhs: l.is_positive() }
    }

    /// The constant-true clause (`⊤`), identity of `xor_sum`.
    pub fn truth() -> XorClause {
        XorClause { vars: Vec::new(), rhs: false }
    }

    /// The constant-false clause (`⊥`).
    pub fn falsum() -> XorClause {
        XorClause { vars: Vec::new(), rhs: true }
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn rhs(&self) -> bool {
        self.rhs
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn is_falsum(&self) -> bool {
        self.vars.is_empty() && self.rhs
    }

    pub fn is_tautology(&self) -> bool {
        self.vars.is_empty() && !self.rhs
    }

    pub fn is_unary(&self) -> bool {
        self.vars.len() == 1
    }

    pub fn is_binary(&self) -> bool {
        self.vars.len() == 2
    }

    pub fn contains(&self, v: Var) -> bool {
        self.vars.binary_search(&v).is_ok()
    }

    /// The literal a unary clause asserts. Panics on non-unary clauses.
    pub fn as_literal(&self) -> Lit {
        assert!(self.is_unary());
        Lit::new(self.vars[0], self.rhs)
    }

    /// The clause sum `self ⊕ other ⊕ ⊤`, normalized: symmetric difference
    /// of the variable sets with parities xor-ed. Both xor-unit rules and
    /// both equivalence rules are instances of this operation.
    pub fn xor_sum(&self, other: &XorClause) -> XorClause {
        let mut vars = Vec::with_capacity(self.vars.len() + other.vars.len());
        let (a, b) = (&self.vars, &other.vars);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    vars.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    vars.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        vars.extend_from_slice(&a[i..]);
        vars.extend_from_slice(&b[j..]);
        XorClause { vars, rhs: self.rhs ^ other.rhs }
    }

    /// Substitutes `value` for variable `v` (each occurrence replaced once)
    /// and normalizes. Returns a clone when `v` does not occur.
    pub fn substitute(&self, v: Var, value: &XorClause) -> XorClause {
        if !self.contains(v) {
            return self.clone();
        }
        let mut without = self.clone();
        without.vars.retain(|&u| u != v);
        let mut out = XorClause {
            vars: std::mem::take(&mut without.vars),
            rhs: false,
        }
        .xor_sum(value);
        out.rhs = !(value.rhs ^ self.rhs);
        out
    }

    /// Evaluates under a (possibly partial) assignment; `None` if any
    /// variable is unassigned.
    pub fn evaluate(&self, a: &Assignment) -> Option<bool> {
        let mut acc = false;
        for &v in &self.vars {
            acc ^= a.get(v)?;
        }
        Some(acc == self.rhs)
    }
}

impl fmt::Display for XorClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.vars.is_empty() {
            return write!(f, "{}", if self.rhs { "⊥" } else { "⊤" });
        }
        for (i, v) in self.vars.iter().enumerate() {
            if i > 0 {
                write!(f, "⊕")?;
            }
            write!(f, "{v}")?;
        }
        if !self.rhs {
            write!(f, "⊕⊤")?;
        }
        Ok(())
    }
}

/// Widest xor-clause the direct CNF translation accepts (2^(n-1) clauses).
pub const MAX_CLAUSIFY_WIDTH: usize = 20;

/// Error for CNF translation of an over-wide xor-clause.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct XorWidthError {
    pub width: usize,
}

impl fmt::Display for XorWidthError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "xor-clause with {} variables exceeds the CNF translation limit of {}",
            self.width, MAX_CLAUSIFY_WIDTH
        )
    }
}

impl std::error::Error for XorWidthError {}

/// Translates an xor-clause into the equivalent set of 2^(n-1) or-clauses
/// (one per odd-violation sign pattern). A tautology yields no clauses and
/// falsum yields the single empty clause.
pub fn clausify_xor(c: &XorClause) -> Result<Vec<OrClause>, XorWidthError> {
    let n = c.len();
    if n > MAX_CLAUSIFY_WIDTH {
        return Err(XorWidthError { width: n });
    }
    if n == 0 {
        return Ok(if c.rhs { vec![OrClause::default()] } else { Vec::new() });
    }
    let mut out = Vec::with_capacity(1usize << (n - 1));
    for signs in 0u32..(1 << n) {
        // A clause with negation pattern `signs` is falsified exactly by the
        // assignment equal to `signs`; emit those excluding a model of c.
        if (signs.count_ones() % 2 == 1) != !c.rhs {
            continue;
        }
        let lits = c
            .vars
            .iter()
            .enumerate()
            .map(|(i, &v)| Lit::new(v, signs >> i & 1 == 0))
            .collect();
        out.push(OrClause::new(lits));
    }
    Ok(out)
}

/// A partial assignment over variables `1..=num_vars`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    values: Vec<Option<bool>>,
}

impl Assignment {
    pub fn new(num_vars: u32) -> Assignment {
        Assignment { values: vec![None; num_vars as usize + 1] }
    }

    pub fn num_vars(&self) -> u32 {
        (self.values.len().max(1) - 1) as u32
    }

    pub fn get(&self, v: Var) -> Option<bool> {
        self.values.get(v.index()).copied().flatten()
    }

    pub fn set(&mut self, v: Var, value: bool) {
        if v.index() >= self.values.len() {
            self.values.resize(v.index() + 1, None);
        }
        self.values[v.index()] = Some(value);
    }

    pub fn clear(&mut self, v: Var) {
        if v.index() < self.values.len() {
            self.values[v.index()] = None;
        }
    }

    pub fn assign_lit(&mut self, l: Lit) {
        self.set(l.var(), l.value());
    }

    pub fn lit_value(&self, l: Lit) -> Option<bool> {
        self.get(l.var()).map(|b| b == l.value())
    }

    pub fn from_lits(lits: &[Lit]) -> Assignment {
        let mut a = Assignment::default();
        for &l in lits {
            a.assign_lit(l);
        }
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lit(code: i32) -> Lit {
        Lit::from_dimacs(code)
    }

    fn xc(codes: &[i32]) -> XorClause {
        XorClause::from_dimacs(codes)
    }

    #[test]
    fn literal_packing_round_trips() {
        for code in [1, -1, 7, -7, 1000] {
            assert_eq!(lit(code).to_dimacs(), code);
        }
        assert_eq!(!lit(3), lit(-3));
        assert_eq!(lit(5).var(), Var::new(5));
        assert!(lit(5).is_positive() && !lit(-5).is_positive());
    }

    #[test]
    fn normalization_cancels_pairs_and_folds_negations() {
        // ¬x1 ⊕ x2 ⊕ x3 ⊕ x3 normalizes to x1 ⊕ x2 ⊕ ⊤.
        let c = xc(&[-1, 2, 3, 3]);
        assert_eq!(c.vars(), &[Var::new(1), Var::new(2)]);
        assert!(!c.rhs());
        // x1 ⊕ x1 normalizes to the empty clause denoting falsum.
        assert!(xc(&[1, 1]).is_falsum());
        // The empty xor is falsum as well.
        assert!(XorClause::from_literals([]).is_falsum());
        // Unary clauses round-trip through literals.
        assert_eq!(XorClause::unary(lit(4)).as_literal(), lit(4));
        assert_eq!(XorClause::unary(lit(-4)).as_literal(), lit(-4));
    }

    #[test]
    fn xor_sum_matches_worked_cases() {
        // (c⊕d⊕⊤) + (b⊕d⊕e) = b⊕c⊕e  (with c=3, d=4, b=2, e=5)
        let a = xc(&[-3, 4]);
        let b = xc(&[2, 4, 5]);
        assert_eq!(a.xor_sum(&b), xc(&[2, 3, 5]));
        // (x) + (x⊕y⊕z) = y⊕z⊕⊤
        assert_eq!(xc(&[1]).xor_sum(&xc(&[1, 2, 3])), xc(&[-2, 3]));
        // C + C = empty tautology
        let c = xc(&[1, 2, 3]);
        assert!(c.xor_sum(&c).is_tautology());
        // Tautology is the identity.
        assert_eq!(XorClause::truth().xor_sum(&c), c);
    }

    #[test]
    fn substitution_matches_worked_cases() {
        // (x1⊕x2⊕x3)[x1/(x1⊕x3)] = x1⊕x2
        let c = xc(&[1, 2, 3]);
        let d = xc(&[1, 3]);
        assert_eq!(c.substitute(Var::new(1), &d), xc(&[1, 2]));
        // (c⊕e⊕⊤)[c/⊤] = (e)   (c=3, e=5)
        let c = xc(&[-3, 5]);
        assert_eq!(c.substitute(Var::new(3), &XorClause::truth()), xc(&[5]));
        // Substituting an absent variable is the identity.
        assert_eq!(c.substitute(Var::new(9), &XorClause::truth()), c);
        // [x/⊥] keeps the parity: (x⊕y)[x/⊥] = (y)
        let c = xc(&[1, 2]);
        assert_eq!(c.substitute(Var::new(1), &XorClause::falsum()), xc(&[2]));
    }

    #[test]
    fn unit_rules_are_xor_sum_instances() {
        // (x), C ⊢ C[x/⊤] and (x⊕⊤), C ⊢ C[x/⊥] both via xor_sum.
        let c = xc(&[1, 2, 3]);
        let x = Var::new(1);
        assert_eq!(
            XorClause::unary(lit(1)).xor_sum(&c),
            c.substitute(x, &XorClause::truth())
        );
        assert_eq!(
            XorClause::unary(lit(-1)).xor_sum(&c),
            c.substitute(x, &XorClause::falsum())
        );
    }

    #[test]
    fn evaluation_follows_parity() {
        let c = xc(&[-1, 2]); // x1⊕x2⊕⊤, true iff x1 == x2
        let mut a = Assignment::new(2);
        assert_eq!(c.evaluate(&a), None);
        a.set(Var::new(1), true);
        assert_eq!(c.evaluate(&a), None);
        a.set(Var::new(2), true);
        assert_eq!(c.evaluate(&a), Some(true));
        a.set(Var::new(2), false);
        assert_eq!(c.evaluate(&a), Some(false));
        assert_eq!(XorClause::falsum().evaluate(&a), Some(false));
        assert_eq!(XorClause::truth().evaluate(&a), Some(true));
    }

    #[test]
    fn clausify_produces_expected_clause_sets() {
        // (a⊕b) -> (a ∨ b) ∧ (¬a ∨ ¬b)
        let cnf = clausify_xor(&xc(&[1, 2])).unwrap();
        assert_eq!(cnf.len(), 2);
        assert!(cnf.contains(&OrClause::new(vec![lit(1), lit(2)])));
        assert!(cnf.contains(&OrClause::new(vec![lit(-1), lit(-2)])));
        // Unary (x) -> single unit clause.
        assert_eq!(clausify_xor(&xc(&[1])).unwrap(), vec![OrClause::new(vec![lit(1)])]);
        // Falsum -> one empty clause; tautology -> no clauses.
        assert_eq!(clausify_xor(&XorClause::falsum()).unwrap(), vec![OrClause::default()]);
        assert!(clausify_xor(&XorClause::truth()).unwrap().is_empty());
        // Width limit enforced.
        let wide = XorClause::from_parts((1..=21).map(Var::new).collect(), true);
        assert_eq!(clausify_xor(&wide), Err(XorWidthError { width: 21 }));
    }

    /// Exhaustively checks that an assignment satisfies the xor-clause iff it
    /// satisfies every or-clause of its CNF translation.
    fn assert_clausify_equiv(c: &XorClause, num_vars: u32) {
        let cnf = clausify_xor(c).unwrap();
        assert_eq!(cnf.len(), if c.len() == 0 { cnf.len() } else { 1 << (c.len() - 1) });
        for mask in 0u32..(1 << num_vars) {
            let mut a = Assignment::new(num_vars);
            for v in 1..=num_vars {
                a.set(Var::new(v), mask >> (v - 1) & 1 == 1);
            }
            let xor_val = c.evaluate(&a).unwrap();
            let cnf_val = cnf
                .iter()
                .all(|cl| cl.lits.iter().any(|&l| a.lit_value(l) == Some(true)));
            assert_eq!(xor_val, cnf_val, "mismatch for {c} under {mask:b}");
        }
    }

    #[test]
    fn clausify_truth_table_equivalence_small() {
        assert_clausify_equiv(&xc(&[1, 2, 3]), 3);
        assert_clausify_equiv(&xc(&[-1, 2, 3]), 3);
        assert_clausify_equiv(&xc(&[1, 2, 3, 4]), 4);
        assert_clausify_equiv(&xc(&[1]), 1);
    }

    fn arb_lits() -> impl Strategy<Value = Vec<i32>> {
        proptest::collection::vec((1i32..=6, proptest::bool::ANY), 0..8)
            .prop_map(|v| v.into_iter().map(|(x, neg)| if neg { -x } else { x }).collect())
    }

    proptest! {
        #[test]
        fn normalize_is_order_insensitive_and_idempotent(codes in arb_lits(), seed in 0u64..1000) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut shuffled = codes.clone();
            shuffled.shuffle(&mut rng);
            let a = XorClause::from_dimacs(&codes);
            let b = XorClause::from_dimacs(&shuffled);
            prop_assert_eq!(&a, &b);
            // A literal encoding of the normal form re-normalizes to itself
            // (an empty tautology has no literal encoding and is skipped).
            if !a.is_tautology() {
                let mut re: Vec<Lit> = a.vars().iter().map(|&v| Lit::positive(v)).collect();
                if !a.rhs() {
                    re[0] = !re[0];
                }
                prop_assert_eq!(XorClause::from_literals(re), a);
            }
        }

        #[test]
        fn xor_sum_is_sound_under_total_assignments(xa in arb_lits(), xb in arb_lits(), mask in 0u32..64) {
            let a = XorClause::from_dimacs(&xa);
            let b = XorClause::from_dimacs(&xb);
            let s = a.xor_sum(&b);
            let mut asg = Assignment::new(6);
            for v in 1..=6u32 {
                asg.set(Var::new(v), mask >> (v - 1) & 1 == 1);
            }
            let (va, vb) = (a.evaluate(&asg).unwrap(), b.evaluate(&asg).unwrap());
            let vs = s.evaluate(&asg).unwrap();
            // a ⊕ b ⊕ ⊤ evaluates as ¬(a ⊕ b).
            prop_assert_eq!(vs, !(va ^ vb));
        }

        #[test]
        fn substitution_is_sound_when_value_holds(xa in arb_lits(), xd in arb_lits(), v in 1u32..=6, mask in 0u32..64) {
            let c = XorClause::from_dimacs(&xa);
            let d = XorClause::from_dimacs(&xd);
            let var = Var::new(v);
            prop_assume!(!d.contains(var));
            let sub = c.substitute(var, &d);
            let mut asg = Assignment::new(6);
            for u in 1..=6u32 {
                asg.set(Var::new(u), mask >> (u - 1) & 1 == 1);
            }
            // Where the substituted definition agrees with the variable's
            // value, the substituted clause agrees with the original.
            if asg.get(var) == d.evaluate(&asg) {
                prop_assert_eq!(sub.evaluate(&asg), c.evaluate(&asg));
            }
        }
    }
}
