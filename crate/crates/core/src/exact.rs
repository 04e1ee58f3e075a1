//! Exact solvers for (sub)problems: exhaustive enumeration and depth-first
//! branch-and-bound.

use crate::error::{Error, Result};
use crate::model::{CostTables, EdgeId, GraphicalModel, Label, Labeling, NodeId, Subgraph};
use crate::scalar::{min_of, Cost, ExtendedCost};

/// Default cap on the number of labelings [`brute_force_solve`] enumerates.
pub const DEFAULT_BRUTE_FORCE_CAP: u128 = 10_000_000;

const PRUNE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Solution<T> {
    /// Covers exactly the subgraph's nodes.
    pub labeling: Labeling,
    pub energy: T,
    /// Search nodes visited (labelings evaluated for brute force).
    pub nodes_expanded: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome<T> {
    Solved(Solution<T>),
    /// Every labeling of the subgraph has infinite energy.
    Infeasible { nodes_expanded: u64 },
}

impl<T: Cost> Outcome<T> {
    pub fn solution(&self) -> Option<&Solution<T>> {
        match self {
            Outcome::Solved(s) => Some(s),
            Outcome::Infeasible { .. } => None,
        }
    }

    pub fn into_solution(self) -> Option<Solution<T>> {
        match self {
            Outcome::Solved(s) => Some(s),
            Outcome::Infeasible { .. } => None,
        }
    }

    pub fn energy(&self) -> ExtendedCost<T> {
        match self {
            Outcome::Solved(s) => ExtendedCost::finite(s.energy),
            Outcome::Infeasible { .. } => ExtendedCost::infinity(),
        }
    }

    pub fn nodes_expanded(&self) -> u64 {
        match self {
            Outcome::Solved(s) => s.nodes_expanded,
            Outcome::Infeasible { nodes_expanded } => *nodes_expanded,
        }
    }
}

/// Subgraph edges as `(position of u, position of v, edge id)` over the
/// given node ordering.
fn local_edges<T: Cost>(model: &GraphicalModel<T>, sub: &Subgraph, order: &[NodeId]) -> Vec<(usize, usize, EdgeId)> {
    let mut pos = vec![usize::MAX; model.node_count()];
    for (i, &u) in order.iter().enumerate() {
        pos[u] = i;
    }
    sub.edges()
        .iter()
        .map(|&e| {
            let edge = model.edge(e);
            (pos[edge.u], pos[edge.v], e)
        })
        .collect()
}

/// Enumerates every labeling of `sub` in lexicographic order (over sorted
/// node ids) and returns the first minimizer.
pub fn brute_force_solve<T: Cost>(
    model: &GraphicalModel<T>,
    costs: &CostTables<T>,
    sub: &Subgraph,
    cap: Option<u128>,
) -> Result<Outcome<T>> {
    let cap = cap.unwrap_or(DEFAULT_BRUTE_FORCE_CAP);
    let size = model.labeling_space(sub.nodes());
    if size > cap {
        return Err(Error::CapExceeded { size, cap });
    }
    let nodes = sub.nodes();
    let edges = local_edges(model, sub, nodes);
    let radix: Vec<usize> = nodes.iter().map(|&u| model.label_count(u)).collect();
    let mut x = vec![0usize; nodes.len()];
    let mut best = T::infinity();
    let mut best_x: Option<Vec<usize>> = None;
    let mut evaluated = 0u64;
    loop {
        evaluated += 1;
        let mut e = T::zero();
        for (i, &u) in nodes.iter().enumerate() {
            e = e + costs.unary(u)[x[i]];
        }
        for &(i, j, id) in &edges {
            e = e + costs.pairwise(id).get(x[i], x[j]);
        }
        if e < best {
            best = e;
            best_x = Some(x.clone());
        }
        // odometer, last position fastest
        let mut i = nodes.len();
        loop {
            if i == 0 {
                return Ok(match best_x {
                    Some(bx) => Outcome::Solved(Solution {
                        labeling: Labeling::from_assignments(model.node_count(), nodes.iter().copied().zip(bx)),
                        energy: best,
                        nodes_expanded: evaluated,
                    }),
                    None => Outcome::Infeasible {
                        nodes_expanded: evaluated,
                    },
                });
            }
            i -= 1;
            x[i] += 1;
            if x[i] < radix[i] {
                break;
            }
            x[i] = 0;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BnbConfig {
    /// Disable only to cross-check that pruning never changes the result.
    pub prune: bool,
}

impl Default for BnbConfig {
    fn default() -> Self {
        Self { prune: true }
    }
}

struct Search<'a, T: Cost> {
    costs: &'a CostTables<T>,
    order: Vec<NodeId>,
    /// Per position: later neighbors as (position, edge, node-is-first-endpoint).
    later: Vec<Vec<(usize, EdgeId, bool)>>,
    /// Sum of table minima over edges with both endpoints at positions >= d.
    edge_suffix: Vec<T>,
    /// Unary of each position plus pairwise rows of its assigned neighbors.
    reduced: Vec<Vec<T>>,
    undo: Vec<T>,
    current: Vec<Label>,
    best: T,
    best_x: Option<Vec<Label>>,
    expanded: u64,
    prune: bool,
    slack: T,
}

impl<T: Cost> Search<'_, T> {
    fn run(&mut self, d: usize, g: T) {
        self.expanded += 1;
        let n = self.order.len();
        if d == n {
            if g < self.best {
                self.best = g;
                self.best_x = Some(self.current.clone());
            }
            return;
        }
        if self.prune {
            let mut bound = g + self.edge_suffix[d];
            for r in &self.reduced[d..] {
                bound = bound + min_of(r);
            }
            if bound >= self.best - self.slack {
                return;
            }
        }
        let mut candidates: Vec<(T, Label)> = self.reduced[d]
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_finite())
            .map(|(s, &c)| (c, s))
            .collect();
        candidates.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));

        for (cost, s) in candidates {
            let mark = self.undo.len();
            for i in 0..self.later[d].len() {
                let (q, e, first) = self.later[d][i];
                let table = self.costs.pairwise(e);
                self.undo.extend_from_slice(&self.reduced[q]);
                let r = &mut self.reduced[q];
                if first {
                    for (t, x) in r.iter_mut().enumerate() {
                        *x = *x + table.get(s, t);
                    }
                } else {
                    for (t, x) in r.iter_mut().enumerate() {
                        *x = *x + table.get(t, s);
                    }
                }
            }
            self.current[d] = s;
            self.run(d + 1, g + cost);
            // restore in reverse order of saving
            for i in (0..self.later[d].len()).rev() {
                let q = self.later[d][i].0;
                let len = self.reduced[q].len();
                let start = self.undo.len() - len;
                self.reduced[q].copy_from_slice(&self.undo[start..]);
                self.undo.truncate(start);
            }
            debug_assert_eq!(self.undo.len(), mark);
        }
    }
}

/// Exact minimization of the energy of `sub` by depth-first
/// branch-and-bound.
///
/// Nodes are branched in a static order (descending degree inside `sub`,
/// then id); values in ascending reduced cost. The bound at a partial
/// assignment adds, for every unassigned node, its cheapest label given the
/// assigned neighbors, and every edge between unassigned nodes at its table
/// minimum. The incumbent starts from the per-node unary argmin.
pub fn branch_and_bound_solve<T: Cost>(
    model: &GraphicalModel<T>,
    costs: &CostTables<T>,
    sub: &Subgraph,
    config: &BnbConfig,
) -> Outcome<T> {
    let mut order: Vec<NodeId> = sub.nodes().to_vec();
    let inner_degree = |u: NodeId| model.neighbors(u).iter().filter(|&&(w, _)| sub.contains(w)).count();
    order.sort_by_key(|&u| (std::cmp::Reverse(inner_degree(u)), u));
    let n = order.len();

    let mut later = vec![Vec::new(); n];
    let mut edge_suffix = vec![T::zero(); n + 1];
    let mut by_start = vec![T::zero(); n];
    for (pu, pv, e) in local_edges(model, sub, &order) {
        let (lo, hi, lo_is_first) = if pu < pv { (pu, pv, true) } else { (pv, pu, false) };
        later[lo].push((hi, e, lo_is_first));
        by_start[lo] = by_start[lo] + costs.pairwise(e).min();
    }
    for d in (0..n).rev() {
        edge_suffix[d] = edge_suffix[d + 1] + by_start[d];
    }

    // Warm start from the per-node unary argmin.
    let mut best = T::infinity();
    let mut best_x = None;
    let guess: Option<Vec<Label>> = order
        .iter()
        .map(|&u| {
            let c = costs.unary(u);
            let m = min_of(c);
            m.is_finite().then(|| c.iter().position(|&x| x == m).unwrap())
        })
        .collect();
    if let Some(guess) = guess {
        let mut e = T::zero();
        for (i, &u) in order.iter().enumerate() {
            e = e + costs.unary(u)[guess[i]];
        }
        for (lo, adj) in later.iter().enumerate() {
            for &(hi, id, first) in adj {
                let t = costs.pairwise(id);
                e = e + if first {
                    t.get(guess[lo], guess[hi])
                } else {
                    t.get(guess[hi], guess[lo])
                };
            }
        }
        if e.is_finite() {
            best = e;
            best_x = Some(guess);
        }
    }

    let mut search = Search {
        costs,
        reduced: order.iter().map(|&u| costs.unary(u).to_vec()).collect(),
        order,
        later,
        edge_suffix,
        undo: Vec::new(),
        current: vec![0; n],
        best,
        best_x,
        expanded: 0,
        prune: config.prune,
        slack: T::lit(PRUNE_SLACK),
    };
    search.run(0, T::zero());

    match search.best_x {
        Some(x) => Outcome::Solved(Solution {
            labeling: Labeling::from_assignments(model.node_count(), search.order.iter().copied().zip(x)),
            energy: search.best,
            nodes_expanded: search.expanded,
        }),
        None => Outcome::Infeasible {
            nodes_expanded: search.expanded,
        },
    }
}

/// Minimum of an edge table and every pair within `tolerance` of it.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMinimizers<T: Cost> {
    pub min_value: ExtendedCost<T>,
    pub argmin: Vec<(Label, Label)>,
}

/// For an all-infinite table the minimum is `inf` and every pair is
/// returned.
pub fn edge_minimizers<T: Cost>(
    model: &GraphicalModel<T>,
    costs: &CostTables<T>,
    edge: EdgeId,
    tolerance: f64,
) -> Result<EdgeMinimizers<T>> {
    model.check_edge(edge)?;
    let table = costs.pairwise(edge);
    let min = table.min();
    let limit = min + T::lit(tolerance);
    let mut argmin = Vec::new();
    for s in 0..table.rows() {
        for t in 0..table.cols() {
            if table.get(s, t) <= limit {
                argmin.push((s, t));
            }
        }
    }
    Ok(EdgeMinimizers {
        min_value: ExtendedCost::new(min).expect("table entries are extended reals"),
        argmin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{energy_of, DEFAULT_TOLERANCE};
    use crate::fixtures::{m1, m2};
    use crate::model::induced_subgraph;
    use crate::synth::{random_model, EnsembleParams};
    use rand::SeedableRng;

    fn whole<T: Cost>(m: &GraphicalModel<T>) -> Subgraph {
        induced_subgraph(m, &(0..m.node_count()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn brute_force_examples() {
        let m = m2::<f64>();
        let r = brute_force_solve(&m, m.costs(), &whole(&m), None).unwrap();
        let s = r.solution().unwrap();
        assert_eq!(s.energy, 1.0);
        assert_eq!(s.labeling, Labeling::full(vec![0, 0, 1]));
        assert_eq!(s.nodes_expanded, 8);

        let m = m1::<f64>();
        let s = brute_force_solve(&m, m.costs(), &whole(&m), None).unwrap().into_solution().unwrap();
        assert_eq!((s.labeling, s.energy), (Labeling::full(vec![0, 0]), 0.0));

        let mut spec = m.to_spec();
        spec.edges[0].table = vec![vec![f64::INFINITY; 2]; 2];
        let m = GraphicalModel::new(spec).unwrap();
        let r = brute_force_solve(&m, m.costs(), &whole(&m), None).unwrap();
        assert!(matches!(r, Outcome::Infeasible { .. }));
        assert!(r.energy().is_infinite());
    }

    #[test]
    fn brute_force_cap() {
        let m = m2::<f64>();
        assert!(matches!(
            brute_force_solve(&m, m.costs(), &whole(&m), Some(7)),
            Err(Error::CapExceeded { size: 8, cap: 7 })
        ));
    }

    #[test]
    fn empty_subgraph_has_zero_energy() {
        let m = m2::<f64>();
        let empty = induced_subgraph(&m, &[]).unwrap();
        let r = brute_force_solve(&m, m.costs(), &empty, None).unwrap();
        assert_eq!(r.solution().unwrap().energy, 0.0);
        let r = branch_and_bound_solve(&m, m.costs(), &empty, &BnbConfig::default());
        assert_eq!(r.solution().unwrap().energy, 0.0);
    }

    #[test]
    fn bnb_examples() {
        let m = m2::<f64>();
        let r = branch_and_bound_solve(&m, m.costs(), &whole(&m), &BnbConfig::default());
        let s = r.solution().unwrap();
        assert_eq!(s.energy, 1.0);
        assert_eq!(energy_of(&m, m.costs(), &s.labeling.to_vec().unwrap()).value(), 1.0);

        let m = m1::<f64>();
        let single = induced_subgraph(&m, &[1]).unwrap();
        let mut spec = m.to_spec();
        spec.unary[1] = vec![0.7, 0.2];
        let m = GraphicalModel::new(spec).unwrap();
        let s = branch_and_bound_solve(&m, m.costs(), &single, &BnbConfig::default())
            .into_solution()
            .unwrap();
        assert_eq!(s.labeling.get(1), Some(1));
        assert!(s.labeling.covers_exactly(&[1]));
    }

    #[test]
    fn bnb_matches_brute_force_with_and_without_pruning() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let params = EnsembleParams::default();
        for _ in 0..200 {
            let m: GraphicalModel<f64> = random_model(&mut rng, &params);
            let k = rand::Rng::gen_range(&mut rng, 0..=m.node_count());
            let sub = induced_subgraph(&m, &(0..k).collect::<Vec<_>>()).unwrap();
            let brute = brute_force_solve(&m, m.costs(), &sub, None).unwrap();
            let pruned = branch_and_bound_solve(&m, m.costs(), &sub, &BnbConfig::default());
            let full = branch_and_bound_solve(&m, m.costs(), &sub, &BnbConfig { prune: false });
            for r in [&pruned, &full] {
                match (&brute, r) {
                    (Outcome::Solved(a), Outcome::Solved(b)) => {
                        assert!((a.energy - b.energy).abs() <= 1e-9, "{} vs {}", a.energy, b.energy);
                        assert!(b.labeling.covers_exactly(sub.nodes()));
                    }
                    (Outcome::Infeasible { .. }, Outcome::Infeasible { .. }) => {}
                    other => panic!("outcome mismatch: {other:?}"),
                }
            }
            assert!(pruned.nodes_expanded() <= full.nodes_expanded());
        }
    }

    #[test]
    fn edge_minimizer_examples() {
        let m = m1::<f64>();
        let r = edge_minimizers(&m, m.costs(), 0, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(r.min_value.value(), 0.0);
        assert_eq!(r.argmin, vec![(0, 0)]);

        let m = m2::<f64>();
        let ab = m.find_edge(0, 1).unwrap();
        let r = edge_minimizers(&m, m.costs(), ab, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(r.argmin, vec![(0, 1), (1, 0)]);

        let mut spec = m1::<f64>().to_spec();
        spec.edges[0].table = vec![vec![f64::INFINITY; 2]; 2];
        let m = GraphicalModel::new(spec).unwrap();
        let r = edge_minimizers(&m, m.costs(), 0, DEFAULT_TOLERANCE).unwrap();
        assert!(r.min_value.is_infinite());
        assert_eq!(r.argmin.len(), 4);

        assert!(matches!(edge_minimizers(&m, m.costs(), 3, 1e-8), Err(Error::UnknownEdge(3))));
    }

    #[test]
    fn edge_minimizers_respect_tolerance() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..50 {
            let m: GraphicalModel<f64> = random_model(&mut rng, &EnsembleParams::default());
            for e in 0..m.edge_count() {
                let tol = 0.05;
                let r = edge_minimizers(&m, m.costs(), e, tol).unwrap();
                let t = m.costs().pairwise(e);
                for s in 0..t.rows() {
                    for u in 0..t.cols() {
                        let inside = t.get(s, u) <= r.min_value.value() + tol;
                        assert_eq!(inside, r.argmin.contains(&(s, u)));
                    }
                }
            }
        }
    }
}
