//! Random synthetic instances for experiments and tests.

use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::{EdgeSpec, GraphicalModel, ModelSpec, Reparametrization};
use crate::scalar::Cost;

/// Parameters of a random pairwise ensemble.
#[derive(Debug, Clone)]
pub struct EnsembleParams {
    pub nodes: RangeInclusive<usize>,
    pub labels: RangeInclusive<usize>,
    /// One of these is drawn per instance.
    pub edge_probabilities: Vec<f64>,
    /// Probability that an instance receives 1-3 infinite pairwise entries.
    pub infinity_rate: f64,
    /// Pairwise costs are `U[0, pairwise_scale]`; unaries are `U[0, 1]`.
    pub pairwise_scale: f64,
}

impl Default for EnsembleParams {
    fn default() -> Self {
        Self {
            nodes: 3..=8,
            labels: 2..=4,
            edge_probabilities: vec![0.3, 0.6, 1.0],
            infinity_rate: 0.1,
            pairwise_scale: 1.0,
        }
    }
}

impl EnsembleParams {
    pub fn finite() -> Self {
        Self {
            infinity_rate: 0.0,
            ..Self::default()
        }
    }
}

fn uniform_table<T: Cost, R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, scale: f64) -> Vec<Vec<T>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| T::lit(rng.gen::<f64>() * scale)).collect())
        .collect()
}

/// Draws one model from the ensemble.
pub fn random_model<T: Cost, R: Rng + ?Sized>(rng: &mut R, params: &EnsembleParams) -> GraphicalModel<T> {
    let n = rng.gen_range(params.nodes.clone());
    let label_counts: Vec<usize> = (0..n).map(|_| rng.gen_range(params.labels.clone())).collect();
    let p = *params
        .edge_probabilities
        .choose(rng)
        .expect("at least one edge probability");
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push(EdgeSpec {
                    u,
                    v,
                    table: uniform_table(rng, label_counts[u], label_counts[v], params.pairwise_scale),
                });
            }
        }
    }
    if !edges.is_empty() && rng.gen_bool(params.infinity_rate) {
        for _ in 0..rng.gen_range(1..=3) {
            let i = rng.gen_range(0..edges.len());
            let e = &mut edges[i];
            let s = rng.gen_range(0..e.table.len());
            let t = rng.gen_range(0..e.table[s].len());
            e.table[s][t] = T::infinity();
        }
    }
    let unary = label_counts
        .iter()
        .map(|&k| (0..k).map(|_| T::lit(rng.gen::<f64>())).collect())
        .collect();
    GraphicalModel::new(ModelSpec {
        label_counts,
        unary,
        edges,
    })
    .expect("generated model is well-formed")
}

/// Random tree (spanning, connected) with continuous `U[0, 1]` costs.
///
/// Node ids are shuffled so the tree is not monotone in the node order.
pub fn random_tree<T: Cost, R: Rng + ?Sized>(
    rng: &mut R,
    nodes: RangeInclusive<usize>,
    labels: RangeInclusive<usize>,
) -> GraphicalModel<T> {
    let n = rng.gen_range(nodes);
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(rng);
    let label_counts: Vec<usize> = (0..n).map(|_| rng.gen_range(labels.clone())).collect();
    let edges = (1..n)
        .map(|i| {
            let parent = ids[rng.gen_range(0..i)];
            let child = ids[i];
            EdgeSpec {
                u: parent,
                v: child,
                table: uniform_table(rng, label_counts[parent], label_counts[child], 1.0),
            }
        })
        .collect();
    let unary = label_counts
        .iter()
        .map(|&k| (0..k).map(|_| T::lit(rng.gen::<f64>())).collect())
        .collect();
    GraphicalModel::new(ModelSpec {
        label_counts,
        unary,
        edges,
    })
    .expect("generated tree is well-formed")
}

/// Random finite reparametrization with entries in `[-scale, scale]`.
pub fn random_reparametrization<T: Cost, R: Rng + ?Sized>(
    rng: &mut R,
    model: &GraphicalModel<T>,
    scale: f64,
) -> Reparametrization<T> {
    let mut phi = Reparametrization::zero(model);
    for m in phi.first.iter_mut().chain(phi.second.iter_mut()) {
        for x in m.iter_mut() {
            *x = T::lit(rng.gen_range(-scale..=scale));
        }
    }
    phi
}

/// Random full labeling of `model`.
pub fn random_labeling<T: Cost, R: Rng + ?Sized>(rng: &mut R, model: &GraphicalModel<T>) -> Vec<usize> {
    (0..model.node_count())
        .map(|u| rng.gen_range(0..model.label_count(u)))
        .collect()
}
