//! cnf-xor formulas and their DIMACS-style text format.
//!
//! The format is classic DIMACS CNF extended with xor-clause lines: a clause
//! line starting with `x` lists literals whose xor must be true, e.g.
//! `x1 2 -3 0` for `x1 ⊕ x2 ⊕ ¬x3`. Negative literals fold into the parity,
//! so `x-1 2 0` denotes `x1 ⊕ x2 ⊕ ⊤`.

use crate::algebra::{clausify_xor, Lit, OrClause, Var, XorClause, XorWidthError};
use std::fmt;

/// A conjunction of or-clauses and xor-clauses over variables `1..=num_vars`.
///
/// Stored xor-clauses are in normal form and never tautological; or-clauses
/// are duplicate-free and never tautological (such clauses are dropped on
/// insertion since they cannot constrain anything).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CnfXorFormula {
    num_vars: u32,
    or_clauses: Vec<OrClause>,
    xor_clauses: Vec<XorClause>,
}

impl CnfXorFormula {
    pub fn new(num_vars: u32) -> CnfXorFormula {
        CnfXorFormula { num_vars, ..Default::default() }
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn or_clauses(&self) -> &[OrClause] {
        &self.or_clauses
    }

    pub fn xor_clauses(&self) -> &[XorClause] {
        &self.xor_clauses
    }

    fn grow_to(&mut self, v: Var) {
        self.num_vars = self.num_vars.max(v.id());
    }

    /// Adds an or-clause, deduplicating literals and dropping tautologies.
    pub fn add_or_clause(&mut self, lits: Vec<Lit>) {
        for &l in &lits {
            self.grow_to(l.var());
        }
        if let Some(c) = OrClause::normalized(lits) {
            self.or_clauses.push(c);
        }
    }

    /// Adds an xor-clause built from literals (normalized; tautologies dropped).
    pub fn add_xor_lits(&mut self, lits: Vec<Lit>) {
        self.add_xor_clause(XorClause::from_literals(lits));
    }

    /// Adds a normal-form xor-clause, dropping tautologies.
    pub fn add_xor_clause(&mut self, c: XorClause) {
        if c.is_tautology() {
            return;
        }
        for &v in c.vars() {
            self.grow_to(v);
        }
        self.xor_clauses.push(c);
    }

    /// Translates every xor-clause to or-clauses, yielding an equisatisfiable
    /// plain CNF over the same variables (no auxiliary variables; fails on
    /// xor-clauses wider than the translation limit).
    pub fn export_cnf(&self) -> Result<CnfXorFormula, XorWidthError> {
        let mut out = CnfXorFormula::new(self.num_vars);
        out.or_clauses = self.or_clauses.clone();
        for x in &self.xor_clauses {
            for c in clausify_xor(x)? {
                out.or_clauses.push(c);
            }
        }
        Ok(out)
    }
}

/// Parse error with the 1-based source line it occurred on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    MissingHeader,
    DuplicateHeader,
    BadHeader,
    BadToken(String),
    LitOutOfRange(i32),
    EmptyXorClause,
    UnterminatedClause,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ParseErrorKind::*;
        match &self.kind {
            MissingHeader => write!(f, "line {}: clause before 'p cnf' header", self.line),
            DuplicateHeader => write!(f, "line {}: duplicate 'p cnf' header", self.line),
            BadHeader => write!(f, "line {}: malformed 'p cnf' header", self.line),
            BadToken(t) => write!(f, "line {}: unexpected token '{}'", self.line, t),
            LitOutOfRange(l) => write!(
                f,
                "line {}: literal {} outside declared variable range",
                self.line, l
            ),
            EmptyXorClause => write!(f, "line {}: xor-clause with no literals", self.line),
            UnterminatedClause => write!(f, "line {}: clause not terminated by 0", self.line),
        }
    }
}

impl std::error::Error for ParseError {}

/// Parses the cnf-xor text format. The clause count in the header is
/// advisory; the variable count is binding (out-of-range literals are
/// rejected). Clauses may span lines; `c` lines are comments.
pub fn parse_cnfxor(input: &str) -> Result<CnfXorFormula, ParseError> {
    let mut formula: Option<CnfXorFormula> = None;
    let mut num_vars = 0u32;
    // In-progress clause state: literals seen so far, xor-ness, start line.
    let mut lits: Vec<Lit> = Vec::new();
    let mut in_clause = false;
    let mut is_xor = false;
    let mut clause_line = 0usize;

    for (lineno, raw) in input.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('p') {
            if formula.is_some() {
                return Err(ParseError { line: lineno, kind: ParseErrorKind::DuplicateHeader });
            }
            let mut parts = line.split_whitespace();
            let ok = parts.next() == Some("p")
                && parts.next() == Some("cnf")
                && matches!(parts.next().map(str::parse::<u32>), Some(Ok(n)) if {
                    num_vars = n;
                    true
                })
                && matches!(parts.next().map(str::parse::<usize>), Some(Ok(_)))
                && parts.next().is_none();
            if !ok {
                return Err(ParseError { line: lineno, kind: ParseErrorKind::BadHeader });
            }
            formula = Some(CnfXorFormula::new(num_vars));
            continue;
        }
        let formula = formula
            .as_mut()
            .ok_or(ParseError { line: lineno, kind: ParseErrorKind::MissingHeader })?;
        for token in line.split_whitespace() {
            let mut token = token;
            if !in_clause {
                in_clause = true;
                is_xor = false;
                clause_line = lineno;
                lits.clear();
                if let Some(rest) = token.strip_prefix('x') {
                    is_xor = true;
                    if rest.is_empty() {
                        continue;
                    }
                    token = rest;
                }
            }
            let code: i32 = token.parse().map_err(|_| ParseError {
                line: lineno,
                kind: ParseErrorKind::BadToken(token.to_string()),
            })?;
            if code == 0 {
                if is_xor && lits.is_empty() {
                    return Err(ParseError {
                        line: clause_line,
                        kind: ParseErrorKind::EmptyXorClause,
                    });
                }
                if is_xor {
                    formula.add_xor_lits(std::mem::take(&mut lits));
                } else {
                    formula.add_or_clause(std::mem::take(&mut lits));
                }
                in_clause = false;
                continue;
            }
            if code.unsigned_abs() > num_vars {
                return Err(ParseError { line: lineno, kind: ParseErrorKind::LitOutOfRange(code) });
            }
            lits.push(Lit::from_dimacs(code));
        }
    }
    if in_clause {
        return Err(ParseError { line: clause_line, kind: ParseErrorKind::UnterminatedClause });
    }
    formula.ok_or(ParseError { line: 0, kind: ParseErrorKind::MissingHeader })
}

/// Writes the formula in the cnf-xor text format. Xor-clauses are emitted
/// canonically: variables ascending, all positive for even-parity-free
/// clauses, and the smallest variable negated when the clause carries a `⊤`
/// term. A falsum xor-clause has no `x`-line encoding and is emitted as the
/// logically identical empty or-clause.
pub fn write_cnfxor(f: &CnfXorFormula) -> String {
    use fmt::Write;
    let mut out = String::new();
    let total = f.or_clauses.len() + f.xor_clauses.len();
    writeln!(out, "p cnf {} {}", f.num_vars, total).unwrap();
    for c in &f.or_clauses {
        for l in &c.lits {
            write!(out, "{} ", l.to_dimacs()).unwrap();
        }
        writeln!(out, "0").unwrap();
    }
    for x in &f.xor_clauses {
        if x.is_falsum() {
            writeln!(out, "0").unwrap();
            continue;
        }
        write!(out, "x").unwrap();
        for (i, &v) in x.vars().iter().enumerate() {
            let code = if i == 0 && !x.rhs() { -(v.id() as i32) } else { v.id() as i32 };
            write!(out, "{} ", code).unwrap();
        }
        writeln!(out, "0").unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(code: i32) -> Lit {
        Lit::from_dimacs(code)
    }

    #[test]
    fn parses_mixed_or_and_xor_clauses() {
        let f = parse_cnfxor("c example\np cnf 3 3\n1 -2 0\nx1 2 3 0\nx-1 2 0\n").unwrap();
        assert_eq!(f.num_vars(), 3);
        assert_eq!(f.or_clauses(), &[OrClause::new(vec![lit(1), lit(-2)])]);
        assert_eq!(
            f.xor_clauses(),
            &[XorClause::from_dimacs(&[1, 2, 3]), XorClause::from_dimacs(&[-1, 2])]
        );
    }

    #[test]
    fn xor_negations_fold_into_parity() {
        let f = parse_cnfxor("p cnf 2 2\nx-1 2 0\nx-1 -2 0\n").unwrap();
        assert!(!f.xor_clauses()[0].rhs());
        assert!(f.xor_clauses()[1].rhs());
    }

    #[test]
    fn degenerate_xor_lines() {
        // x1 ⊕ x1 collapses to falsum and stays stored.
        let f = parse_cnfxor("p cnf 1 1\nx1 1 0\n").unwrap();
        assert_eq!(f.xor_clauses(), &[XorClause::falsum()]);
        // A tautological xor-clause is dropped.
        let f = parse_cnfxor("p cnf 1 1\nx1 -1 0\n").unwrap();
        assert!(f.xor_clauses().is_empty());
        // An x-line with no literals is a parse error naming the line.
        let err = parse_cnfxor("p cnf 1 1\nx 0\n").unwrap_err();
        assert_eq!(err, ParseError { line: 2, kind: ParseErrorKind::EmptyXorClause });
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_cnfxor("p cnf 2 1\n1 3 0\n").unwrap_err();
        assert_eq!(err, ParseError { line: 2, kind: ParseErrorKind::LitOutOfRange(3) });
        let err = parse_cnfxor("p cnf 2 1\n1 q 0\n").unwrap_err();
        assert_eq!(err.line, 2);
        let err = parse_cnfxor("1 2 0\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::MissingHeader);
        let err = parse_cnfxor("p cnf 2 1\n1 2\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnterminatedClause);
        let err = parse_cnfxor("p cnf x 1\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::BadHeader);
    }

    #[test]
    fn clause_count_is_advisory_and_clauses_may_span_lines() {
        let f = parse_cnfxor("p cnf 3 99\n1 2\n3 0\n").unwrap();
        assert_eq!(f.or_clauses().len(), 1);
        assert_eq!(f.or_clauses()[0].lits.len(), 3);
    }

    #[test]
    fn tautological_or_clauses_are_dropped_and_duplicates_merged() {
        let f = parse_cnfxor("p cnf 2 2\n1 -1 0\n1 1 2 0\n").unwrap();
        assert_eq!(f.or_clauses(), &[OrClause::new(vec![lit(1), lit(2)])]);
    }

    #[test]
    fn writer_is_canonical_and_round_trips() {
        let mut f = CnfXorFormula::new(3);
        f.add_or_clause(vec![lit(1), lit(-2)]);
        f.add_xor_lits(vec![lit(-1), lit(2)]); // x1⊕x2⊕⊤ -> "x-1 2 0"
        f.add_xor_lits(vec![lit(1), lit(2), lit(3)]);
        let text = write_cnfxor(&f);
        assert_eq!(text, "p cnf 3 3\n1 -2 0\nx-1 2 0\nx1 2 3 0\n");
        assert_eq!(parse_cnfxor(&text).unwrap(), f);
    }

    #[test]
    fn falsum_xor_writes_as_empty_or_clause() {
        let mut f = CnfXorFormula::new(1);
        f.add_xor_lits(vec![lit(1), lit(1)]);
        let text = write_cnfxor(&f);
        assert_eq!(text, "p cnf 1 1\n0\n");
        let back = parse_cnfxor(&text).unwrap();
        assert_eq!(back.or_clauses(), &[OrClause::default()]);
    }

    #[test]
    fn export_cnf_replaces_xors_without_aux_vars() {
        let mut f = CnfXorFormula::new(2);
        f.add_xor_lits(vec![lit(1), lit(2)]);
        let cnf = f.export_cnf().unwrap();
        assert_eq!(cnf.num_vars(), 2);
        assert!(cnf.xor_clauses().is_empty());
        assert_eq!(cnf.or_clauses().len(), 2);
        let mut wide = CnfXorFormula::new(21);
        wide.add_xor_lits((1..=21).map(|v| lit(v)).collect());
        assert!(wide.export_cnf().is_err());
    }
}
