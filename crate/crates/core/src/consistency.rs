//! Strict arc-consistency and the initial easy/hard partition.

use crate::energy::{argmin_with_gap, subgraph_energy};
use crate::model::{CostTables, GraphicalModel, Label, Labeling, NodeId, Partition};
use crate::scalar::{Cost, ExtendedCost};

/// Strictly arc-consistent nodes and their locally optimal labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SacSet {
    pub nodes: Vec<NodeId>,
    pub witness: Labeling,
}

/// Unique minimizer `(s, t)` of each edge table, if strict.
fn strict_edge_minimizers<T: Cost>(
    model: &GraphicalModel<T>,
    costs: &CostTables<T>,
    tol: T,
) -> Vec<Option<(Label, Label)>> {
    (0..model.edge_count())
        .map(|e| {
            let table = costs.pairwise(e);
            let (i, _, gap) = argmin_with_gap(table.data().iter().copied())?;
            (gap > tol).then(|| (i / table.cols(), i % table.cols()))
        })
        .collect()
}

/// Nodes with a strict unary minimum whose every incident table has a
/// strict minimum agreeing with it.
pub fn sac_nodes<T: Cost>(model: &GraphicalModel<T>, costs: &CostTables<T>, tolerance: f64) -> SacSet {
    let tol = T::lit(tolerance);
    let edge_min = strict_edge_minimizers(model, costs, tol);
    let mut nodes = Vec::new();
    let mut witness = Labeling::empty(model.node_count());
    for u in 0..model.node_count() {
        let Some((x, _, gap)) = argmin_with_gap(costs.unary(u).iter().copied()) else {
            continue;
        };
        if !(gap > tol) {
            continue;
        }
        let consistent = model.neighbors(u).iter().all(|&(_, e)| match edge_min[e] {
            Some((s, t)) => {
                let mine = if model.edge(e).u == u { s } else { t };
                mine == x
            }
            None => false,
        });
        if consistent {
            nodes.push(u);
            witness.set(u, x);
        }
    }
    SacSet { nodes, witness }
}

/// Partition with `V_A` the strictly arc-consistent nodes.
#[derive(Debug, Clone)]
pub struct InitialPartition<T: Cost> {
    pub partition: Partition,
    /// Optimal labeling of `A`.
    pub x_a: Labeling,
    /// Optimal energy of `A`.
    pub ea_opt: ExtendedCost<T>,
}

pub fn initial_partition<T: Cost>(
    model: &GraphicalModel<T>,
    costs: &CostTables<T>,
    tolerance: f64,
) -> InitialPartition<T> {
    let sac = sac_nodes(model, costs, tolerance);
    let partition = Partition::from_a(model, &sac.nodes).expect("SAC nodes are model nodes");
    let ea_opt = subgraph_energy(model, costs, partition.a(), &sac.witness)
        .expect("witness covers exactly the SAC nodes");
    InitialPartition {
        partition,
        x_a: sac.witness,
        ea_opt,
    }
}
