//! Turns parity explanations into learnable xor clauses and keeps a
//! deduplicating, capacity-limited store of the clauses actually learnt.

use std::collections::HashSet;

use crate::algebra::{Lit, Var, XorClause};

/// The xor clause stating "explanation ≡ literal", learnable whenever the
/// literal was implied under the explanation. `None` when the equivalence
/// is trivial, i.e. the explanation is the literal itself.
pub fn learnable_from_implication(lit: Lit, parity: &XorClause) -> Option<XorClause> {
    let c = parity.xor_sum(&XorClause::unary(lit));
    if c.is_tautology() {
        None
    } else {
        Some(c)
    }
}

/// The negation of a refuted parity explanation. Yields the empty false
/// clause when the explanation is the tautology, i.e. the xor part is
/// infeasible on its own.
pub fn learnable_from_conflict(parity: &XorClause) -> XorClause {
    XorClause::from_parts(parity.vars().to_vec(), !parity.rhs())
}

/// Whether at most one variable of `clause` sits at decision level `level`,
/// so that right after backjumping below `level` the clause determines
/// that variable instead of going quiet.
pub fn is_asserting(clause: &XorClause, level: u32, level_of: impl Fn(Var) -> u32) -> bool {
    clause.vars().iter().filter(|&&v| level_of(v) == level).count() <= 1
}

/// A store of learnt xor clauses with duplicate rejection and a soft
/// size limit.
///
/// Reasoning modules cannot retract clauses once given, so the store
/// never evicts; it refuses new clauses when full and regrows its
/// capacity by ten percent on every restart.
pub struct LearnedXorDb {
    seen: HashSet<XorClause>,
    len: usize,
    capacity: usize,
}

impl LearnedXorDb {
    /// Creates a store that treats `inputs` as already known.
    pub fn new(inputs: &[XorClause]) -> LearnedXorDb {
        LearnedXorDb {
            seen: inputs.iter().cloned().collect(),
            len: 0,
            capacity: inputs.len().max(1000),
        }
    }

    /// Accepts `clause` if it is informative, novel, and there is room.
    pub fn admit(&mut self, clause: &XorClause) -> bool {
        if clause.is_tautology() || self.len >= self.capacity || self.seen.contains(clause) {
            return false;
        }
        self.seen.insert(clause.clone());
        self.len += 1;
        true
    }

    /// Raises the admission limit by ten percent (capped, as the growth is
    /// geometric over a potentially unbounded restart count).
    pub fn note_restart(&mut self) {
        self.capacity = self.capacity.saturating_add(self.capacity / 10);
    }

    /// How many clauses have been admitted.
    pub fn len(&self) -> usize {
        self.len
    }

    /// Whether no clause has been admitted yet.
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// The current admission limit.
    pub fn capacity(&self) -> usize {
        self.capacity
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::CnfXorFormula;
    use crate::oracle::entails_xor;

    fn xc(codes: &[i32]) -> XorClause {
        XorClause::from_dimacs(codes)
    }

    fn lit(code: i32) -> Lit {
        Lit::from_dimacs(code)
    }

    #[test]
    fn implied_literals_learn_their_equivalence_to_the_explanation() {
        // x6 is forced under the explanation "x4", so x4 ≡ x6 is learnable.
        let learnt = learnable_from_implication(lit(6), &xc(&[4])).unwrap();
        assert_eq!(learnt, xc(&[-4, 6]));

        let mut f = CnfXorFormula::new(6);
        f.add_xor_clause(xc(&[1, 2, 3]));
        f.add_xor_clause(xc(&[3, 4, 5]));
        f.add_xor_clause(xc(&[3, 5, 6]));
        assert!(entails_xor(&f, &learnt).unwrap());
        assert!(!entails_xor(&f, &xc(&[4, 6])).unwrap());

        // An assumption explains itself; there is nothing to learn.
        assert_eq!(learnable_from_implication(lit(4), &XorClause::unary(lit(4))), None);
    }

    #[test]
    fn conflicts_learn_the_negation_of_what_they_refute() {
        assert_eq!(learnable_from_conflict(&xc(&[-1, 2])), xc(&[1, 2]));
        // A refuted tautology certifies infeasibility.
        assert!(learnable_from_conflict(&XorClause::truth()).is_falsum());
    }

    #[test]
    fn asserting_clauses_keep_at_most_one_variable_at_the_latest_level() {
        let level_of = |v: Var| match v.id() {
            1 | 2 => 2,
            _ => 1,
        };
        assert!(is_asserting(&xc(&[-4, 6]), 2, level_of));
        assert!(is_asserting(&xc(&[1, 5]), 2, level_of));
        assert!(!is_asserting(&xc(&[1, 2]), 2, level_of));
    }

    #[test]
    fn the_store_dedups_against_inputs_and_regrows_on_restart() {
        let mut db = LearnedXorDb::new(&[xc(&[1, 2])]);
        assert_eq!(db.capacity(), 1000);
        assert!(!db.admit(&xc(&[1, 2])), "inputs are already known");
        assert!(!db.admit(&XorClause::truth()), "tautologies carry nothing");
        assert!(db.admit(&xc(&[-1, 2])));
        assert!(!db.admit(&xc(&[-1, 2])), "duplicates are rejected");
        assert_eq!(db.len(), 1);

        for v in 3..=1001 {
            assert!(db.admit(&XorClause::unary(Lit::new(Var::new(v), true))));
        }
        assert_eq!(db.len(), 1000);
        assert!(!db.admit(&xc(&[5, 6])), "the store is full");
        db.note_restart();
        assert_eq!(db.capacity(), 1100);
        assert!(db.admit(&xc(&[5, 6])));
    }
}
