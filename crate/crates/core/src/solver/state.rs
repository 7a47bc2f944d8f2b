//! Mutable working copy of a formula during a solver run.

use serde::{Deserialize, Serialize};

use crate::formula::{Assignment, Formula, Literal};
use crate::interval::Interval;

pub(crate) const NONE: u32 = u32::MAX;

/// Clause colors while an inner-loop run is active.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Color {
    /// All literals unexposed.
    Uncolored,
    /// All literals exposed.
    Black,
    /// Exactly one unexposed literal; every exposed literal is false.
    Red,
    /// Exactly one unexposed literal and some exposed literal is true.
    Blue,
    /// 3-clause with one exposed literal, which is false.
    Pink,
    /// 3-clause with one exposed literal, which is true.
    Turquoise,
}

impl Color {
    /// The color a clause of `len` literals must carry when `exposed` of
    /// them are exposed and `any_true` tells whether one of those holds.
    pub fn from_exposure(len: usize, exposed: usize, any_true: bool) -> Color {
        debug_assert!(exposed <= len && len <= 3);
        if exposed == len {
            Color::Black
        } else if len - exposed == 1 {
            if any_true {
                Color::Blue
            } else {
                Color::Red
            }
        } else if exposed == 0 {
            Color::Uncolored
        } else if any_true {
            Color::Turquoise
        } else {
            Color::Pink
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct WorkClause {
    pub lits: [Literal; 3],
    pub len: u8,
    /// Bit `i` set iff literal slot `i` is exposed in the current run.
    pub exposed: u8,
    pub color: Color,
    pub alive: bool,
    pub red_slot: u32,
    /// Id of the last run that touched the clause.
    pub stamp: u32,
}

impl WorkClause {
    pub fn literals(&self) -> &[Literal] {
        &self.lits[..self.len as usize]
    }

    pub fn slot_of(&self, var: usize) -> Option<usize> {
        self.literals().iter().position(|l| l.var == var)
    }

    pub fn is_exposed(&self, slot: usize) -> bool {
        self.exposed & (1 << slot) != 0
    }

    pub fn exposed_count(&self) -> usize {
        (self.exposed & ((1u8 << self.len) - 1)).count_ones() as usize
    }
}

pub(crate) struct Work {
    pub num_vars: usize,
    pub clauses: Vec<WorkClause>,
    /// Clause ids per variable; entries of dead clauses are skipped lazily.
    pub occ: Vec<Vec<u32>>,
    pub values: Assignment,
    unused: Vec<u32>,
    unused_pos: Vec<u32>,
    /// Live clauses by length 0..=3.
    pub by_len: [usize; 4],

    // Per-variable scratch, meaningful only while the stamp equals the
    // current run id.
    pub exposed_stamp: Vec<u32>,
    pub tree_stamp: Vec<u32>,
    pub union_find: Vec<u32>,
    /// `(parent, clause)` of a tree vertex, `NONE` at a root.
    pub tree_parent: Vec<(u32, u32)>,
}

impl Work {
    pub fn new(formula: &Formula) -> Self {
        let n = formula.num_vars;
        let pad = Literal::new(0, Interval::UNIT);
        let mut occ = vec![Vec::new(); n];
        let mut by_len = [0usize; 4];
        let clauses = formula
            .clauses
            .iter()
            .enumerate()
            .map(|(ci, c)| {
                let mut lits = [pad; 3];
                for (slot, lit) in c.literals.iter().enumerate() {
                    lits[slot] = *lit;
                    occ[lit.var].push(ci as u32);
                }
                by_len[c.len()] += 1;
                WorkClause {
                    lits,
                    len: c.len() as u8,
                    exposed: 0,
                    color: Color::Uncolored,
                    alive: true,
                    red_slot: NONE,
                    stamp: 0,
                }
            })
            .collect();
        Work {
            num_vars: n,
            clauses,
            occ,
            values: Assignment::new(n),
            unused: (0..n as u32).collect(),
            unused_pos: (0..n as u32).collect(),
            by_len,
            exposed_stamp: vec![0; n],
            tree_stamp: vec![0; n],
            union_find: vec![0; n],
            tree_parent: vec![(NONE, NONE); n],
        }
    }

    pub fn unused_count(&self) -> usize {
        self.unused.len()
    }

    pub fn unused_at(&self, index: usize) -> usize {
        self.unused[index] as usize
    }

    pub fn is_unused(&self, var: usize) -> bool {
        self.unused_pos[var] != NONE
    }

    pub fn mark_used(&mut self, var: usize) {
        let pos = self.unused_pos[var];
        if pos == NONE {
            return;
        }
        let last = self.unused.pop().expect("non-empty");
        if last as usize != var {
            self.unused[pos as usize] = last;
            self.unused_pos[last as usize] = pos;
        }
        self.unused_pos[var] = NONE;
    }

    /// The live clauses as a plain formula.
    pub fn residual_formula(&self) -> Formula {
        Formula {
            num_vars: self.num_vars,
            clauses: self
                .clauses
                .iter()
                .filter(|c| c.alive)
                .map(|c| c.literals().to_vec().into())
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_of_colors() {
        use Color::*;
        assert_eq!(Color::from_exposure(3, 0, false), Uncolored);
        assert_eq!(Color::from_exposure(3, 1, false), Pink);
        assert_eq!(Color::from_exposure(3, 1, true), Turquoise);
        assert_eq!(Color::from_exposure(3, 2, false), Red);
        assert_eq!(Color::from_exposure(3, 2, true), Blue);
        assert_eq!(Color::from_exposure(3, 3, false), Black);
        assert_eq!(Color::from_exposure(2, 0, false), Uncolored);
        assert_eq!(Color::from_exposure(2, 1, false), Red);
        assert_eq!(Color::from_exposure(2, 1, true), Blue);
        assert_eq!(Color::from_exposure(1, 0, false), Red);
        assert_eq!(Color::from_exposure(1, 1, true), Black);
    }

    #[test]
    fn unused_set() {
        let mut w = Work::new(&Formula::empty(4));
        w.mark_used(1);
        w.mark_used(1);
        w.mark_used(3);
        assert_eq!(w.unused_count(), 2);
        let mut left: Vec<_> = (0..2).map(|i| w.unused_at(i)).collect();
        left.sort_unstable();
        assert_eq!(left, vec![0, 2]);
        assert!(!w.is_unused(3) && w.is_unused(2));
    }
}
