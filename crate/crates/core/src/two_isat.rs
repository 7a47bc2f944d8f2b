//! Polynomial decision procedure for formulas with two literals per clause.
//!
//! Every distinct literal `L` gets two vertices, `(L, t)` ("L holds") and
//! `(L, f)` ("L fails"). A clause `L1 ∨ L2` contributes the clause arcs
//! `(L1, f) → (L2, t)` and `(L2, f) → (L1, t)`; two literals of one variable
//! with disjoint intervals contribute the disjointness arcs `(L, t) → (L', f)`
//! and `(L', t) → (L, f)`. The formula is unsatisfiable iff some strongly
//! connected component holds both vertices of a literal.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::{generate_formula, verify, Assignment, Formula};
use crate::interval::Interval;
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ArcKind {
    Clause,
    Disjointness,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub kind: ArcKind,
}

/// Vertex `2 * i` is `(literal i, t)`, vertex `2 * i + 1` is `(literal i, f)`.
#[derive(Clone, Debug)]
pub struct ImplicationDigraph {
    pub literals: Vec<(usize, Interval)>,
    pub arcs: Vec<Arc>,
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

#[inline]
pub fn positive(lit: usize) -> usize {
    2 * lit
}

#[inline]
pub fn negative(lit: usize) -> usize {
    2 * lit + 1
}

#[inline]
pub fn complement(vertex: usize) -> usize {
    vertex ^ 1
}

#[inline]
pub fn is_positive(vertex: usize) -> bool {
    vertex & 1 == 0
}

impl ImplicationDigraph {
    pub fn num_vertices(&self) -> usize {
        2 * self.literals.len()
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn count(&self, kind: ArcKind) -> usize {
        self.arcs.iter().filter(|a| a.kind == kind).count()
    }

    /// Kind of some arc `from → to`, if there is one.
    pub fn arc_kind(&self, from: usize, to: usize) -> Option<ArcKind> {
        self.arcs
            .iter()
            .find(|a| a.from == from && a.to == to)
            .map(|a| a.kind)
    }
}

pub fn build_digraph(formula: &Formula) -> Result<ImplicationDigraph> {
    let mut ids: HashMap<(usize, (u64, u64)), usize> = HashMap::new();
    let mut literals: Vec<(usize, Interval)> = Vec::new();
    let mut by_var: Vec<Vec<usize>> = vec![Vec::new(); formula.num_vars];
    let mut arcs = Vec::new();

    for (ci, clause) in formula.clauses.iter().enumerate() {
        if clause.len() != 2 {
            return Err(Error::InvalidParameter(format!(
                "clause {ci} has {} literals; the 2-clause decider needs exactly 2",
                clause.len()
            )));
        }
        let mut pair = [0usize; 2];
        for (slot, lit) in pair.iter_mut().zip(&clause.literals) {
            if lit.var >= formula.num_vars {
                return Err(Error::InvalidParameter(format!(
                    "clause {ci} uses variable {} of {}",
                    lit.var + 1,
                    formula.num_vars
                )));
            }
            *slot = *ids.entry((lit.var, lit.sign.bits())).or_insert_with(|| {
                literals.push((lit.var, lit.sign));
                by_var[lit.var].push(literals.len() - 1);
                literals.len() - 1
            });
        }
        let [a, b] = pair;
        arcs.push(Arc { from: negative(a), to: positive(b), kind: ArcKind::Clause });
        arcs.push(Arc { from: negative(b), to: positive(a), kind: ArcKind::Clause });
    }

    for lits in &by_var {
        for (i, &a) in lits.iter().enumerate() {
            for &b in &lits[i + 1..] {
                if literals[a].1.is_disjoint(&literals[b].1) {
                    arcs.push(Arc { from: positive(a), to: negative(b), kind: ArcKind::Disjointness });
                    arcs.push(Arc { from: positive(b), to: negative(a), kind: ArcKind::Disjointness });
                }
            }
        }
    }

    let nv = 2 * literals.len();
    let mut offsets = vec![0usize; nv + 1];
    for arc in &arcs {
        offsets[arc.from + 1] += 1;
    }
    for v in 0..nv {
        offsets[v + 1] += offsets[v];
    }
    let mut fill = offsets.clone();
    let mut targets = vec![0usize; arcs.len()];
    for arc in &arcs {
        targets[fill[arc.from]] = arc.to;
        fill[arc.from] += 1;
    }
    Ok(ImplicationDigraph { literals, arcs, offsets, targets })
}

/// Strongly connected components, numbered in the order Tarjan's algorithm
/// completes them: every arc goes from a component to one with an equal or
/// smaller number.
pub fn strongly_connected_components(graph: &ImplicationDigraph) -> Vec<usize> {
    const UNSEEN: usize = usize::MAX;
    let n = graph.num_vertices();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSEEN; n];
    let mut stack = Vec::new();
    let mut call: Vec<(usize, usize)> = Vec::new();
    let mut next_index = 0;
    let mut next_comp = 0;

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut edge)) = call.last_mut() {
            let succ = graph.successors(v);
            if *edge < succ.len() {
                let w = succ[*edge];
                *edge += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().expect("vertex on stack");
                    on_stack[w] = false;
                    comp[w] = next_comp;
                    if w == v {
                        break;
                    }
                }
                next_comp += 1;
            }
        }
    }
    comp
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UnsatWitness {
    pub var: usize,
    pub sign: Interval,
    pub component: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Decision {
    Sat(Assignment),
    Unsat(UnsatWitness),
}

impl Decision {
    pub fn is_sat(&self) -> bool {
        matches!(self, Decision::Sat(_))
    }
}

/// Decides a formula of 2-clauses. Satisfying assignments are total over
/// `formula.num_vars`; variables that appear in no true literal get 1/2.
pub fn decide(formula: &Formula) -> Result<Decision> {
    let graph = build_digraph(formula)?;
    let comp = strongly_connected_components(&graph);

    for (lit, &(var, sign)) in graph.literals.iter().enumerate() {
        if comp[positive(lit)] == comp[negative(lit)] {
            return Ok(Decision::Unsat(UnsatWitness { var, sign, component: comp[positive(lit)] }));
        }
    }

    // A literal holds iff its positive vertex's component was completed
    // before its negative vertex's, i.e. comes later topologically.
    let mut lowest: Vec<Option<f64>> = vec![None; formula.num_vars];
    for (lit, &(var, sign)) in graph.literals.iter().enumerate() {
        if comp[positive(lit)] < comp[negative(lit)] {
            let lo = lowest[var].map_or(sign.lo(), |x| x.max(sign.lo()));
            lowest[var] = Some(lo);
        }
    }
    let values: Vec<f64> = lowest.into_iter().map(|v| v.unwrap_or(0.5)).collect();
    let assignment = Assignment::from_values(&values);
    assert!(
        verify(formula, &assignment)?,
        "constructed assignment fails verification"
    );
    Ok(Decision::Sat(assignment))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseRow {
    pub c: f64,
    pub n: usize,
    pub trials: usize,
    pub sat_fraction: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// 95% Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    const Z: f64 = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Fraction of satisfiable random 2-clause formulas with `floor(c * n)`
/// clauses, for every `c` in the grid. Trial `t` of grid point `i` uses the
/// seed `split(split(seed, i), t)`.
pub fn phase_experiment(n: usize, c_grid: &[f64], trials: usize, seed: u64) -> Result<Vec<PhaseRow>> {
    if n < 2 {
        return Err(Error::InvalidParameter("phase experiment needs n >= 2".into()));
    }
    c_grid
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            if !(c >= 0.0) {
                return Err(Error::InvalidParameter(format!("density {c} must be non-negative")));
            }
            let m = (c * n as f64).floor() as usize;
            let point_seed = rng::split(seed, i as u64);
            let outcomes: Vec<bool> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let f = generate_formula(n, m, 2, rng::split(point_seed, t as u64))?;
                    Ok(decide(&f)?.is_sat())
                })
                .collect::<Result<_>>()?;
            let sat = outcomes.iter().filter(|s| **s).count();
            let (ci_lo, ci_hi) = wilson_interval(sat, trials);
            Ok(PhaseRow {
                c,
                n,
                trials,
                sat_fraction: if trials == 0 { 0.0 } else { sat as f64 / trials as f64 },
                ci_lo,
                ci_hi,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{Clause, Literal};
    use crate::oracle::{brute_decide, OracleResult};
    use proptest::prelude::*;

    fn lit(var: usize, lo: f64, hi: f64) -> Literal {
        Literal::new(var, Interval::new(lo, hi).unwrap())
    }

    fn clause(a: Literal, b: Literal) -> Clause {
        Clause::new(vec![a, b])
    }

    #[test]
    fn one_clause_digraph() {
        let f = Formula::new(2, vec![clause(lit(0, 0.0, 0.2), lit(1, 0.5, 1.0))]).unwrap();
        let g = build_digraph(&f).unwrap();
        assert_eq!(g.num_vertices(), 4);
        assert_eq!(g.count(ArcKind::Clause), 2);
        assert_eq!(g.count(ArcKind::Disjointness), 0);
    }

    #[test]
    fn disjoint_literals_add_two_arcs() {
        let f = Formula::new(
            3,
            vec![
                clause(lit(0, 0.0, 0.2), lit(1, 0.5, 1.0)),
                clause(lit(0, 0.3, 0.6), lit(2, 0.1, 0.9)),
            ],
        )
        .unwrap();
        let g = build_digraph(&f).unwrap();
        assert_eq!(g.count(ArcKind::Disjointness), 2);
    }

    #[test]
    fn duplicate_clauses_share_vertices() {
        let c = clause(lit(0, 0.0, 0.2), lit(1, 0.5, 1.0));
        let f = Formula::new(2, vec![c.clone(), c]).unwrap();
        let g = build_digraph(&f).unwrap();
        assert_eq!(g.num_vertices(), 4);
        assert_eq!(g.count(ArcKind::Clause), 4);
    }

    #[test]
    fn rejects_other_lengths() {
        let f = Formula::new(3, vec![Clause::new(vec![lit(0, 0.0, 1.0)])]).unwrap();
        assert!(build_digraph(&f).is_err());
    }

    #[test]
    fn crossed_pairs_are_unsat() {
        let (a, b) = ((0.0, 0.4), (0.6, 1.0));
        let (c, d) = ((0.0, 0.3), (0.7, 1.0));
        let mk = |x: (f64, f64), y: (f64, f64)| clause(lit(0, x.0, x.1), lit(1, y.0, y.1));
        let f = Formula::new(2, vec![mk(a, c), mk(a, d), mk(b, c), mk(b, d)]).unwrap();
        let Decision::Unsat(w) = decide(&f).unwrap() else {
            panic!("expected unsat");
        };
        let g = build_digraph(&f).unwrap();
        let comp = strongly_connected_components(&g);
        let lit = g.literals.iter().position(|&(v, s)| v == w.var && s == w.sign).unwrap();
        assert_eq!(comp[positive(lit)], comp[negative(lit)]);
        assert_eq!(comp[positive(lit)], w.component);
    }

    #[test]
    fn empty_formula() {
        let Decision::Sat(a) = decide(&Formula::empty(3)).unwrap() else {
            panic!("expected sat");
        };
        assert!(a.is_total());
    }

    #[test]
    fn components_respect_arc_order() {
        let f = generate_formula(200, 300, 2, 4).unwrap();
        let g = build_digraph(&f).unwrap();
        let comp = strongly_connected_components(&g);
        for arc in &g.arcs {
            assert!(comp[arc.from] >= comp[arc.to]);
        }
    }

    #[test]
    fn wilson_bounds() {
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
        assert!((wilson_interval(10, 10).1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_density_is_always_sat() {
        let rows = phase_experiment(50, &[0.0], 10, 1).unwrap();
        assert_eq!(rows[0].sat_fraction, 1.0);
    }

    proptest! {
        #[test]
        fn agrees_with_oracle(n in 2usize..=6, m in 0usize..=12, seed in any::<u64>()) {
            let f = generate_formula(n, m, 2, seed).unwrap();
            let ours = decide(&f).unwrap();
            let truth = brute_decide(&f).unwrap();
            prop_assert_eq!(ours.is_sat(), truth.is_sat());
            if let Decision::Sat(a) = ours {
                prop_assert!(verify(&f, &a).unwrap());
            }
            prop_assert!(matches!(truth, OracleResult::Sat(_) | OracleResult::Unsat));
        }

        #[test]
        fn arc_kinds_follow_polarity(seed in any::<u64>()) {
            let f = generate_formula(5, 12, 2, seed).unwrap();
            let g = build_digraph(&f).unwrap();
            for arc in &g.arcs {
                let want = if is_positive(arc.from) { ArcKind::Disjointness } else { ArcKind::Clause };
                prop_assert_eq!(arc.kind, want);
                // a disjointness arc lands on a negative vertex, whose arcs are clause arcs
                if arc.kind == ArcKind::Disjointness {
                    prop_assert!(!is_positive(arc.to));
                }
            }
        }
    }
}
