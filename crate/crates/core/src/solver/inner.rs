//! One inner-loop run: Phase I from a free variable, then, after a repair,
//! Phase II from the 1-clauses the repair left behind.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::state::{Color, NONE};
use super::Solver;

/// Why a run stopped trying to avoid empty clauses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZenCause {
    /// A red, blue or black 3-clause existed at the fatality.
    ColoredTernary,
    /// The decision graph had a cycle besides the one the fatality closes.
    Cycle,
    /// The current variable occurs in a blue clause.
    BlueClause,
    /// The current variable occurs in three or more red clauses.
    TripleHit,
    /// A fatality after the repair.
    PhaseTwoCollision,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct InnerReport {
    pub initial_reds: usize,
    pub services: usize,
    /// Variables on the repaired path, root first, ending with the current
    /// variable whose second red clause triggered the repair.
    pub repair_path: Option<Vec<usize>>,
    pub zen: Option<ZenCause>,
    pub empty_clauses: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
enum Phase {
    #[default]
    One,
    Two,
}

#[derive(Default)]
pub(super) struct RunState {
    id: u32,
    phase: Phase,
    root: usize,
    red: Vec<u32>,
    /// 3-clauses currently red, blue or black.
    colored_ternary: usize,
    touched: Vec<u32>,
    tentative: Vec<usize>,
    closing: Vec<u32>,
    units: Vec<u32>,
    zen: Option<ZenCause>,
}

enum Step {
    Continue,
    Repair { cj: u32, c_prime: u32, xj: usize },
}

fn is_colored_ternary(len: u8, color: Color) -> bool {
    len == 3 && matches!(color, Color::Red | Color::Blue | Color::Black)
}

impl Solver {
    /// Runs the inner loop from the free variable `x0`, including a repair
    /// and Phase II if one is triggered, and commits all values.
    pub fn inner_loop(&mut self, x0: usize) -> InnerReport {
        assert!(self.work.is_unused(x0), "free variable {x0} is already used");
        let empty_before = self.work.by_len[0];
        let mut report = InnerReport::default();
        self.run.zen = None;
        self.begin_run(Phase::One);
        self.start_phase_one(x0);
        report.initial_reds = self.run.red.len();
        self.check_colors();

        while !self.run.red.is_empty() {
            report.services += 1;
            match self.service() {
                Step::Continue => {}
                Step::Repair { cj, c_prime, xj } => {
                    report.repair_path = Some(self.repair(cj, c_prime, xj));
                    self.begin_run(Phase::Two);
                    self.start_phase_two();
                }
            }
            self.check_colors();
        }
        self.commit();
        debug_assert!(self.run.units.is_empty());

        report.zen = self.run.zen;
        report.empty_clauses = self.work.by_len[0] - empty_before;
        self.stats.empty_clauses += report.empty_clauses;
        if report.empty_clauses > 0 && report.zen.is_none() {
            self.stats.unflagged_empty_clauses += 1;
        }
        report
    }

    fn begin_run(&mut self, phase: Phase) {
        let run = &mut self.run;
        run.id += 1;
        run.phase = phase;
        run.red.clear();
        run.colored_ternary = 0;
        run.touched.clear();
        run.tentative.clear();
        run.closing.clear();
    }

    fn start_phase_one(&mut self, x0: usize) {
        self.run.root = x0;
        self.work.exposed_stamp[x0] = self.run.id;
        for k in 0..self.work.occ[x0].len() {
            let c = self.work.occ[x0][k];
            if !self.work.clauses[c as usize].alive {
                continue;
            }
            self.expose(c, x0);
        }
        self.work.values.set_tentative(x0, 0.5);
        self.run.tentative.push(x0);
        self.add_tree_vertex(x0);
        for k in 0..self.work.occ[x0].len() {
            let c = self.work.occ[x0][k];
            let clause = &self.work.clauses[c as usize];
            if clause.alive && clause.len == 2 {
                let other = clause.literals().iter().find(|l| l.var != x0).expect("two vars").var;
                self.add_tree_edge(x0, other, c);
            }
        }
        self.recolor_occurrences(x0);
    }

    fn start_phase_two(&mut self) {
        let units = std::mem::take(&mut self.run.units);
        for &c in &units {
            let clause = &self.work.clauses[c as usize];
            if clause.alive && clause.len == 1 {
                self.touch(c);
                self.recolor(c);
            }
        }
    }

    /// Services one red clause. Returns a repair request when the Phase I
    /// fatality conditions allow one.
    fn service(&mut self) -> Step {
        let pick = self.rng.random_range(0..self.run.red.len());
        let cj = self.run.red[pick];
        let clause = &self.work.clauses[cj as usize];
        let slot = (0..clause.len as usize)
            .find(|&s| !clause.is_exposed(s))
            .expect("a red clause has an unexposed literal");
        let lit = clause.lits[slot];
        let xj = lit.var;
        debug_assert!(self.work.exposed_stamp[xj] != self.run.id);
        self.work.exposed_stamp[xj] = self.run.id;
        self.expose(cj, xj);

        // Expose x_j in colored clauses, noting the red and blue ones.
        let mut red_hits: Vec<u32> = Vec::new();
        let mut blue_hit = false;
        for k in 0..self.work.occ[xj].len() {
            let c = self.work.occ[xj][k];
            let other = &self.work.clauses[c as usize];
            if c == cj || !other.alive || other.color == Color::Uncolored {
                continue;
            }
            match other.color {
                Color::Red => red_hits.push(c),
                Color::Blue => blue_hit = true,
                _ => {}
            }
            self.expose(c, xj);
        }

        if let Some(&c_prime) = red_hits.first() {
            self.stats.fatalities += 1;
            if self.run.zen.is_none() {
                match self.zen_condition(cj, c_prime, red_hits.len(), blue_hit) {
                    Some(cause) => self.go_zen(cause),
                    None => return Step::Repair { cj, c_prime, xj },
                }
            }
        }

        // Expose x_j in the uncolored clauses; their 2-clauses become edges.
        for k in 0..self.work.occ[xj].len() {
            let c = self.work.occ[xj][k];
            let other = &self.work.clauses[c as usize];
            if !other.alive || other.color != Color::Uncolored {
                continue;
            }
            let y = (other.len == 2).then(|| other.literals().iter().find(|l| l.var != xj).expect("two vars").var);
            self.expose(c, xj);
            if let (Phase::One, Some(y)) = (self.run.phase, y) {
                self.add_tree_edge(xj, y, c);
            }
        }

        self.work.values.set_tentative(xj, lit.sign.nearest_to_half());
        self.run.tentative.push(xj);
        match self.run.phase {
            Phase::One => self.stats.phase_one_services += 1,
            Phase::Two => self.stats.phase_two_services += 1,
        }
        self.recolor_occurrences(xj);
        Step::Continue
    }

    /// Checks the fatality conditions in order; `None` means repair.
    fn zen_condition(&self, cj: u32, c_prime: u32, red_hits: usize, blue_hit: bool) -> Option<ZenCause> {
        if self.run.colored_ternary > 0 {
            return Some(ZenCause::ColoredTernary);
        }
        // C_j and C' both join x_j to the tree, so one of them always closes
        // a cycle; that cycle is the fatality itself.
        if self.run.closing.iter().any(|&c| c != cj && c != c_prime) {
            return Some(ZenCause::Cycle);
        }
        if blue_hit {
            return Some(ZenCause::BlueClause);
        }
        if red_hits >= 2 {
            return Some(ZenCause::TripleHit);
        }
        if self.run.phase == Phase::Two {
            return Some(ZenCause::PhaseTwoCollision);
        }
        None
    }

    fn go_zen(&mut self, cause: ZenCause) {
        self.run.zen = Some(cause);
        self.stats.zen.record(cause);
    }

    /// Rewrites the tree path ending in `cj` so every path clause is
    /// satisfied from its root side, satisfies `c_prime` with `xj`, and
    /// commits everything else.
    fn repair(&mut self, cj: u32, c_prime: u32, xj: usize) -> Vec<usize> {
        self.stats.repairs += 1;
        let root = self.run.root;
        let w = self.work.clauses[cj as usize]
            .literals()
            .iter()
            .find(|l| l.var != xj)
            .expect("C_j is a 2-clause")
            .var;

        // (variable, clause) pairs from the root down to (w, C_j)
        let mut path = vec![(w, cj)];
        let mut v = w;
        while v != root {
            let (parent, clause) = self.work.tree_parent[v];
            assert!(parent != NONE, "repair path does not reach the free variable");
            path.push((parent as usize, clause));
            v = parent as usize;
        }
        path.reverse();

        for &(var, c) in &path {
            let sign = self.exposed_sign(c, var);
            self.work.values.overwrite(var, sign.nearest_to_half());
        }
        let j_prime = self.exposed_sign(c_prime, xj);
        self.work.values.set_permanent(xj, j_prime.nearest_to_half());

        // x_j is now fixed for good, so its remaining occurrences must be seen.
        for k in 0..self.work.occ[xj].len() {
            let c = self.work.occ[xj][k];
            let clause = &self.work.clauses[c as usize];
            if clause.alive && !clause.slot_of(xj).is_some_and(|s| clause.is_exposed(s)) {
                self.expose(c, xj);
            }
        }
        self.run.tentative.push(xj);
        self.commit();

        let mut vars: Vec<usize> = path.iter().map(|&(v, _)| v).collect();
        vars.push(xj);
        vars
    }

    /// Makes every value of the run permanent, deletes satisfied clauses and
    /// strips false literals, visiting touched clauses in id order.
    fn commit(&mut self) {
        for &v in &self.run.tentative {
            let value = self.work.values.get(v).expect("set in this run");
            self.work.values.set_permanent(v, value);
            self.work.mark_used(v);
        }
        let mut touched = std::mem::take(&mut self.run.touched);
        touched.sort_unstable();
        for &c in &touched {
            let values = &self.work.values;
            let clause = &mut self.work.clauses[c as usize];
            if clause.alive {
                let old_len = clause.len as usize;
                let satisfied = clause
                    .literals()
                    .iter()
                    .any(|l| values.get(l.var).is_some_and(|x| l.holds(x)));
                self.work.by_len[old_len] -= 1;
                if satisfied {
                    clause.alive = false;
                } else {
                    let mut kept = 0;
                    for s in 0..old_len {
                        let l = clause.lits[s];
                        if values.get(l.var).is_none() {
                            clause.lits[kept] = l;
                            kept += 1;
                        }
                    }
                    clause.len = kept as u8;
                    self.work.by_len[kept] += 1;
                    if kept == 1 {
                        self.run.units.push(c);
                    }
                }
            }
            clause.exposed = 0;
            clause.color = Color::Uncolored;
            clause.red_slot = NONE;
        }
        touched.clear();
        self.run.touched = touched;
        self.run.tentative.clear();
        self.run.red.clear();
        self.run.colored_ternary = 0;
    }

    fn touch(&mut self, c: u32) {
        let clause = &mut self.work.clauses[c as usize];
        if clause.stamp != self.run.id {
            clause.stamp = self.run.id;
            self.run.touched.push(c);
        }
    }

    fn expose(&mut self, c: u32, var: usize) {
        self.touch(c);
        let clause = &mut self.work.clauses[c as usize];
        let slot = clause.slot_of(var).expect("variable occurs in clause");
        if clause.is_exposed(slot) {
            self.stats.repeated_exposures += 1;
        }
        clause.exposed |= 1 << slot;
    }

    /// Interval of `var`'s literal in clause `c`. Only exposed literals may
    /// be read.
    fn exposed_sign(&self, c: u32, var: usize) -> crate::interval::Interval {
        let clause = &self.work.clauses[c as usize];
        let slot = clause.slot_of(var).expect("variable occurs in clause");
        debug_assert!(clause.is_exposed(slot), "read of an unexposed literal");
        clause.lits[slot].sign
    }

    fn recolor_occurrences(&mut self, var: usize) {
        for k in 0..self.work.occ[var].len() {
            let c = self.work.occ[var][k];
            if self.work.clauses[c as usize].alive {
                self.recolor(c);
            }
        }
    }

    fn recolor(&mut self, c: u32) {
        let clause = &self.work.clauses[c as usize];
        let mut any_true = false;
        for (s, l) in clause.literals().iter().enumerate() {
            if clause.is_exposed(s) {
                let sign = self.exposed_sign(c, l.var);
                any_true |= self.work.values.get(l.var).is_some_and(|x| sign.contains(x));
            }
        }
        let new = Color::from_exposure(clause.len as usize, clause.exposed_count(), any_true);
        let (old, len) = (clause.color, clause.len);
        if old == new {
            return;
        }
        if is_colored_ternary(len, old) {
            self.run.colored_ternary -= 1;
        }
        if is_colored_ternary(len, new) {
            self.run.colored_ternary += 1;
        }
        if old == Color::Red {
            self.remove_red(c);
        }
        if new == Color::Red {
            self.work.clauses[c as usize].red_slot = self.run.red.len() as u32;
            self.run.red.push(c);
        }
        self.work.clauses[c as usize].color = new;
    }

    fn remove_red(&mut self, c: u32) {
        let slot = self.work.clauses[c as usize].red_slot as usize;
        let last = self.run.red.pop().expect("red clause is listed");
        if last != c {
            self.run.red[slot] = last;
            self.work.clauses[last as usize].red_slot = slot as u32;
        }
        self.work.clauses[c as usize].red_slot = NONE;
    }

    fn add_tree_vertex(&mut self, v: usize) {
        if self.work.tree_stamp[v] != self.run.id {
            self.work.tree_stamp[v] = self.run.id;
            self.work.union_find[v] = v as u32;
            self.work.tree_parent[v] = (NONE, NONE);
        }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.work.union_find[v] as usize != v {
            let up = self.work.union_find[v] as usize;
            self.work.union_find[v] = self.work.union_find[up];
            v = up;
        }
        v
    }

    fn add_tree_edge(&mut self, from: usize, to: usize, clause: u32) {
        self.add_tree_vertex(from);
        if self.work.tree_stamp[to] != self.run.id {
            self.add_tree_vertex(to);
            self.work.tree_parent[to] = (from as u32, clause);
            let root = self.find(from);
            self.work.union_find[to] = root as u32;
            return;
        }
        let (a, b) = (self.find(from), self.find(to));
        if a == b {
            self.run.closing.push(clause);
        } else {
            self.work.union_find[b] = a as u32;
        }
    }

    /// Recomputes the color of every touched clause from exposure flags and
    /// values alone and compares with the stored color.
    fn check_colors(&mut self) {
        if !self.config.validate_colors {
            return;
        }
        let mut mismatches = 0;
        let mut reds = 0;
        for &c in &self.run.touched {
            let clause = &self.work.clauses[c as usize];
            if !clause.alive {
                continue;
            }
            let lits = clause.literals();
            let exposed: Vec<_> = (0..lits.len()).filter(|&s| clause.exposed >> s & 1 == 1).collect();
            let any_true = exposed.iter().any(|&s| {
                let l = lits[s];
                matches!(self.work.values.get(l.var), Some(x) if l.sign.lo() <= x && x <= l.sign.hi())
            });
            let expect = match (lits.len(), exposed.len()) {
                (k, e) if e == k => Color::Black,
                (k, e) if k - e == 1 && any_true => Color::Blue,
                (k, e) if k - e == 1 => Color::Red,
                (_, 0) => Color::Uncolored,
                (3, 1) if any_true => Color::Turquoise,
                _ => Color::Pink,
            };
            if expect != clause.color || (expect == Color::Red) != (clause.red_slot != NONE) {
                mismatches += 1;
            }
            reds += usize::from(expect == Color::Red);
        }
        if reds != self.run.red.len() {
            mismatches += 1;
        }
        self.stats.color_mismatches += mismatches;
    }
}
