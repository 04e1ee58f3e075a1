//! Energy, lower bounds and reparametrization arithmetic.
//!
//! Every function takes the model (structure) and a [`CostTables`] view. Pass
//! `model.costs()` for the original costs or the result of
//! [`apply_reparametrization`] for reparametrized ones.

use crate::error::{Error, Result};
use crate::model::{CostTables, GraphicalModel, Label, Labeling, NodeId, Partition, Reparametrization, Subgraph};
use crate::scalar::{min_of, Cost, ExtendedCost};

/// Default absolute tolerance for argmin membership and strict uniqueness.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

#[inline]
fn ext<T: Cost>(x: T) -> ExtendedCost<T> {
    ExtendedCost::new(x).expect("cost tables hold no NaN or -inf")
}

/// Energy of a full labeling.
pub fn total_energy<T: Cost>(
    model: &GraphicalModel<T>,
    costs: &CostTables<T>,
    x: &Labeling,
) -> Result<ExtendedCost<T>> {
    x.check(model)?;
    if !x.is_full() {
        return Err(Error::Coverage("labeling does not cover every node".into()));
    }
    Ok(energy_unchecked(model, costs, |u| x.get(u).unwrap(), 0..model.node_count(), 0..model.edge_count()))
}

/// Energy of a full labeling given as a plain label vector.
pub fn energy_of<T: Cost>(model: &GraphicalModel<T>, costs: &CostTables<T>, labels: &[Label]) -> ExtendedCost<T> {
    energy_unchecked(model, costs, |u| labels[u], 0..model.node_count(), 0..model.edge_count())
}

fn energy_unchecked<T: Cost>(
    model: &GraphicalModel<T>,
    costs: &CostTables<T>,
    label: impl Fn(NodeId) -> Label,
    nodes: impl Iterator<Item = NodeId>,
    edges: impl Iterator<Item = usize>,
) -> ExtendedCost<T> {
    let mut sum = T::zero();
    for u in nodes {
        sum = sum + costs.unary(u)[label(u)];
    }
    for e in edges {
        let edge = model.edge(e);
        sum = sum + costs.pairwise(e).get(label(edge.u), label(edge.v));
    }
    ext(sum)
}

/// Energy of a subgraph under a labeling of exactly its nodes.
pub fn subgraph_energy<T: Cost>(
    model: &GraphicalModel<T>,
    costs: &CostTables<T>,
    sub: &Subgraph,
    x: &Labeling,
) -> Result<ExtendedCost<T>> {
    x.check(model)?;
    if !x.covers_exactly(sub.nodes()) {
        return Err(Error::Coverage("labeling must cover exactly the subgraph nodes".into()));
    }
    Ok(energy_unchecked(
        model,
        costs,
        |u| x.get(u).unwrap(),
        sub.nodes().iter().copied(),
        sub.edges().iter().copied(),
    ))
}

/// Joins labelings of the two sides of a partition into a full labeling.
pub fn concatenate(partition: &Partition, x_a: &Labeling, x_b: &Labeling) -> Result<Labeling> {
    if !x_a.covers_exactly(partition.a().nodes()) {
        return Err(Error::Coverage("first labeling must cover exactly V_A".into()));
    }
    if !x_b.covers_exactly(partition.b().nodes()) {
        return Err(Error::Coverage("second labeling must cover exactly V_B".into()));
    }
    if x_a.universe() != x_b.universe() {
        return Err(Error::Coverage("labelings over different node universes".into()));
    }
    let mut out = x_a.clone();
    for u in partition.b().nodes() {
        out.set(*u, x_b.get(*u).unwrap());
    }
    Ok(out)
}

/// `E_A* + E_B* + sum of separator table minima`: a lower bound on the
/// optimum when the two minima are exact.
pub fn partition_lower_bound<T: Cost>(
    costs: &CostTables<T>,
    partition: &Partition,
    ea_opt: ExtendedCost<T>,
    eb_opt: ExtendedCost<T>,
) -> ExtendedCost<T> {
    partition
        .separator()
        .iter()
        .map(|&e| ext(costs.pairwise(e).min()))
        .fold(ea_opt + eb_opt, |acc, m| acc + m)
}

/// Result of [`check_sufficient_optimality`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptimalityCheck {
    pub holds: bool,
    /// A-side endpoints of separator edges not at their table minimum.
    pub violating: Vec<NodeId>,
}

/// Checks whether every separator edge attains its table minimum (within
/// `tolerance`) at the concatenated labeling.
///
/// An all-infinite edge has minimum `inf` and is attained by every pair.
pub fn check_sufficient_optimality<T: Cost>(
    model: &GraphicalModel<T>,
    costs: &CostTables<T>,
    partition: &Partition,
    x_a: &Labeling,
    x_b: &Labeling,
    tolerance: f64,
) -> Result<OptimalityCheck> {
    x_a.check(model)?;
    x_b.check(model)?;
    if !x_a.covers_exactly(partition.a().nodes()) || !x_b.covers_exactly(partition.b().nodes()) {
        return Err(Error::Coverage("labelings must cover V_A and V_B".into()));
    }
    let tol = T::lit(tolerance);
    let mut violating = Vec::new();
    for &e in partition.separator() {
        let edge = model.edge(e);
        let (a, b) = partition.split_endpoints(edge);
        let (s, t) = if a == edge.u {
            (x_a.get(a).unwrap(), x_b.get(b).unwrap())
        } else {
            (x_b.get(b).unwrap(), x_a.get(a).unwrap())
        };
        let table = costs.pairwise(e);
        if !(table.get(s, t) <= table.min() + tol) {
            violating.push(a);
        }
    }
    violating.sort_unstable();
    violating.dedup();
    Ok(OptimalityCheck {
        holds: violating.is_empty(),
        violating,
    })
}

/// Materializes the reparametrized costs `theta^phi`.
pub fn apply_reparametrization<T: Cost>(
    model: &GraphicalModel<T>,
    phi: &Reparametrization<T>,
) -> Result<CostTables<T>> {
    phi.check(model)?;
    let mut out = model.costs().clone();
    for (e, edge) in model.edges().iter().enumerate() {
        let table = &mut out.pairwise[e];
        for (s, &d) in phi.first[e].iter().enumerate() {
            out.unary[edge.u][s] = out.unary[edge.u][s] - d;
            table.add_to_row(s, d);
        }
        for (t, &d) in phi.second[e].iter().enumerate() {
            out.unary[edge.v][t] = out.unary[edge.v][t] - d;
            table.add_to_column(t, d);
        }
    }
    Ok(out)
}

/// Sum of per-node and per-edge minima; a lower bound on every energy.
pub fn dual_bound<T: Cost>(model: &GraphicalModel<T>, costs: &CostTables<T>) -> ExtendedCost<T> {
    let nodes = (0..model.node_count()).map(|u| ext(min_of(costs.unary(u))));
    let edges = (0..model.edge_count()).map(|e| ext(costs.pairwise(e).min()));
    nodes.chain(edges).sum()
}

/// Per-node unary argmins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalLabeling {
    pub labels: Labeling,
    /// Parallel to the requested node list.
    pub unique: Vec<bool>,
}

/// Smallest value, its lowest index, and the gap to the runner-up
/// (`inf` when there is no finite runner-up).
pub(crate) fn argmin_with_gap<T: Cost>(values: impl Iterator<Item = T>) -> Option<(usize, T, T)> {
    let mut best: Option<(usize, T)> = None;
    let mut second = T::infinity();
    for (i, v) in values.enumerate() {
        match best {
            None => best = Some((i, v)),
            Some((_, b)) if v < b => {
                second = b;
                best = Some((i, v));
            }
            Some(_) => second = second.min(v),
        }
    }
    let (i, b) = best?;
    if b.is_infinite() {
        return None;
    }
    Some((i, b, second - b))
}

/// Lowest-index unary argmin for each of `nodes`, flagging strict minima.
pub fn locally_optimal_labeling<T: Cost>(
    model: &GraphicalModel<T>,
    costs: &CostTables<T>,
    nodes: &[NodeId],
    tolerance: f64,
) -> Result<LocalLabeling> {
    let tol = T::lit(tolerance);
    let mut labels = Labeling::empty(model.node_count());
    let mut unique = Vec::with_capacity(nodes.len());
    for &u in nodes {
        model.check_node(u)?;
        let (s, _, gap) =
            argmin_with_gap(costs.unary(u).iter().copied()).ok_or(Error::InfeasibleNode(u))?;
        labels.set(u, s);
        unique.push(gap > tol);
    }
    Ok(LocalLabeling { labels, unique })
}
