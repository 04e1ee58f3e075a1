//! Monotone dual block-coordinate ascent and reparametrization
//! post-processing.
//!
//! The ascent is a sequential tree-reweighted scheme over the fixed node order
//! `0..n`. Processing a node first pulls every incident edge into the unary
//! (each edge row of the node's labels gets minimum zero), then pushes a share
//! of the normalized unary back into the edges towards nodes that come later
//! in the current sweep direction. Every step is a reparametrization that
//! never decreases the bound `D`.

use log::debug;

use crate::energy::{apply_reparametrization, dual_bound};
use crate::error::{Error, Result};
use crate::model::{CostTables, GraphicalModel, NodeId, Reparametrization};
use crate::scalar::{min_of, Cost};

#[derive(Debug, Clone, PartialEq)]
pub struct AscentConfig {
    /// Cap on forward+backward iterations.
    pub max_iterations: usize,
    /// Stop once an iteration improves the bound by less than this.
    pub convergence_epsilon: f64,
    /// Extra denominator term of the push weight during post-processing.
    pub lambda: f64,
    /// Post-processing iterations run with the `lambda`-modified weight.
    pub postprocess_sweeps: usize,
}

impl Default for AscentConfig {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            convergence_epsilon: 1e-9,
            lambda: 0.1,
            postprocess_sweeps: 10,
        }
    }
}

impl AscentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::Config(format!("lambda must be finite and >= 0, got {}", self.lambda)));
        }
        if self.convergence_epsilon.is_nan() {
            return Err(Error::Config("convergence_epsilon is NaN".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Fails if some node has only infinite unaries or some edge only infinite
/// pairwise entries; such models have no finite-energy labeling.
pub fn check_feasible<T: Cost>(model: &GraphicalModel<T>) -> Result<()> {
    let costs = model.costs();
    if let Some(u) = (0..model.node_count()).find(|&u| min_of(costs.unary(u)).is_infinite()) {
        return Err(Error::InfeasibleNode(u));
    }
    if let Some(e) = (0..model.edge_count()).find(|&e| costs.pairwise(e).min().is_infinite()) {
        return Err(Error::InfeasibleEdge(e));
    }
    Ok(())
}

/// Working state of the ascent: messages plus the matching reparametrized
/// costs, updated in lockstep.
#[derive(Debug, Clone)]
pub struct AscentState<'m, T: Cost> {
    model: &'m GraphicalModel<T>,
    phi: Reparametrization<T>,
    costs: CostTables<T>,
    delta: Vec<T>,
    hat: Vec<T>,
}

impl<'m, T: Cost> AscentState<'m, T> {
    pub fn new(model: &'m GraphicalModel<T>, phi: Reparametrization<T>) -> Result<Self> {
        let costs = apply_reparametrization(model, &phi)?;
        let width = model.label_counts().iter().copied().max().unwrap_or(0);
        Ok(Self {
            model,
            phi,
            costs,
            delta: Vec::with_capacity(width),
            hat: Vec::with_capacity(width),
        })
    }

    pub fn costs(&self) -> &CostTables<T> {
        &self.costs
    }

    pub fn phi(&self) -> &Reparametrization<T> {
        &self.phi
    }

    pub fn into_phi(self) -> Reparametrization<T> {
        self.phi
    }

    /// Current value of `D` on the working costs.
    pub fn bound(&self) -> T {
        dual_bound(self.model, &self.costs).value()
    }

    /// One pass over all nodes in `direction`, pushing with weight
    /// `1 / (max(d+, d-) + lambda)`.
    pub fn sweep(&mut self, direction: Direction, lambda: f64) {
        let n = self.model.node_count();
        match direction {
            Direction::Forward => (0..n).for_each(|u| self.process(u, direction, lambda)),
            Direction::Backward => (0..n).rev().for_each(|u| self.process(u, direction, lambda)),
        }
    }

    /// Forward sweep followed by a backward sweep.
    pub fn iterate(&mut self, lambda: f64) {
        self.sweep(Direction::Forward, lambda);
        self.sweep(Direction::Backward, lambda);
    }

    fn shift(&mut self, u: NodeId, e: usize, s: usize, d: T) {
        // phi_{u,v}(s) += d: unary loses d, the edge row of s gains d.
        let edge = self.model.edge(e);
        let m = self.phi.message_mut(edge, e, u);
        m[s] = m[s] + d;
        self.costs.unary[u][s] = self.costs.unary[u][s] - d;
        if edge.u == u {
            self.costs.pairwise[e].add_to_row(s, d);
        } else {
            self.costs.pairwise[e].add_to_column(s, d);
        }
    }

    fn process(&mut self, u: NodeId, direction: Direction, lambda: f64) {
        let model = self.model;
        let neighbors = model.neighbors(u);
        if neighbors.is_empty() {
            return;
        }
        let k = model.label_count(u);

        for &(_, e) in neighbors {
            let edge = model.edge(e);
            let table = &self.costs.pairwise[e];
            self.delta.clear();
            if edge.u == u {
                self.delta.extend((0..k).map(|s| min_of(table.row(s))));
            } else {
                self.delta
                    .extend((0..k).map(|s| table.column(s).fold(T::infinity(), T::min)));
            }
            // Labels whose whole row is infinite are dead on this edge; any
            // finite pull leaves their row infinite, so raise their unary by
            // the largest finite pull to keep the bound monotone.
            let fill = self
                .delta
                .iter()
                .copied()
                .filter(|d| d.is_finite())
                .fold(T::neg_infinity(), T::max);
            if fill == T::neg_infinity() {
                continue;
            }
            for s in 0..k {
                let d = self.delta[s];
                let d = if d.is_finite() { d } else { fill };
                if d != T::zero() {
                    self.shift(u, e, s, -d);
                }
            }
        }

        let ahead = |v: NodeId| match direction {
            Direction::Forward => v > u,
            Direction::Backward => v < u,
        };
        let d_plus = neighbors.iter().filter(|&&(v, _)| ahead(v)).count();
        if d_plus == 0 {
            return;
        }
        let d_minus = neighbors.len() - d_plus;
        let gamma = T::lit(1.0 / (d_plus.max(d_minus) as f64 + lambda));

        self.hat.clear();
        self.hat.extend_from_slice(&self.costs.unary[u]);
        let c = min_of(&self.hat);
        if c.is_infinite() {
            return;
        }
        for &(v, e) in neighbors {
            if !ahead(v) {
                continue;
            }
            for s in 0..k {
                let h = self.hat[s];
                if h.is_finite() {
                    let d = gamma * (h - c);
                    if d != T::zero() {
                        self.shift(u, e, s, d);
                    }
                }
            }
        }
    }
}

/// Output of [`run_block_ascent`].
#[derive(Debug, Clone)]
pub struct AscentResult<T> {
    pub phi: Reparametrization<T>,
    /// `D` at the start and after every iteration.
    pub bound_trace: Vec<T>,
}

fn run_iterations<T: Cost>(
    state: &mut AscentState<'_, T>,
    iterations: usize,
    lambda: f64,
    epsilon: Option<f64>,
    trace: &mut Vec<T>,
) {
    let mut last = state.bound();
    for _ in 0..iterations {
        state.iterate(lambda);
        let d = state.bound();
        trace.push(d);
        let improvement = d - last;
        last = d;
        if let Some(eps) = epsilon {
            if improvement < T::lit(eps) {
                break;
            }
        }
    }
}

/// Approximately maximizes `D(theta^phi)` starting from `phi = 0`.
pub fn run_block_ascent<T: Cost>(model: &GraphicalModel<T>, config: &AscentConfig) -> Result<AscentResult<T>> {
    config.validate()?;
    check_feasible(model)?;
    let mut state = AscentState::new(model, Reparametrization::zero(model))?;
    let mut bound_trace = vec![state.bound()];
    run_iterations(
        &mut state,
        config.max_iterations,
        0.0,
        Some(config.convergence_epsilon),
        &mut bound_trace,
    );
    debug!(
        "block ascent: {} iterations, bound {:?} -> {:?}",
        bound_trace.len() - 1,
        bound_trace.first(),
        bound_trace.last()
    );
    Ok(AscentResult {
        phi: state.into_phi(),
        bound_trace,
    })
}

/// Runs `config.postprocess_sweeps` further iterations with push weight
/// `1 / (max(d+, d-) + lambda)`, which leaves part of every unary in place so
/// that non-optimal labels accumulate cost.
pub fn postprocess_messages<T: Cost>(
    model: &GraphicalModel<T>,
    phi: &Reparametrization<T>,
    config: &AscentConfig,
) -> Result<Reparametrization<T>> {
    config.validate()?;
    if config.postprocess_sweeps == 0 {
        phi.check(model)?;
        return Ok(phi.clone());
    }
    let mut state = AscentState::new(model, phi.clone())?;
    let mut trace = Vec::new();
    run_iterations(&mut state, config.postprocess_sweeps, config.lambda, None, &mut trace);
    Ok(state.into_phi())
}

/// Moves `1 / (|nb(u)| + 1)` of every finite unary entry into each incident
/// edge, keeping the same share in the unary.
pub fn redistribute_unary<T: Cost>(
    model: &GraphicalModel<T>,
    phi: &Reparametrization<T>,
) -> Result<Reparametrization<T>> {
    let costs = apply_reparametrization(model, phi)?;
    let mut out = phi.clone();
    for u in 0..model.node_count() {
        let degree = model.degree(u);
        if degree == 0 {
            continue;
        }
        let share = T::lit(1.0 / (degree as f64 + 1.0));
        for (s, &value) in costs.unary(u).iter().enumerate() {
            if !value.is_finite() {
                continue;
            }
            let d = value * share;
            for &(_, e) in model.neighbors(u) {
                let edge = model.edge(e);
                let m = out.message_mut(edge, e, u);
                m[s] = m[s] + d;
            }
        }
    }
    Ok(out)
}

/// Reparametrization produced by the full dual phase.
#[derive(Debug, Clone)]
pub struct DualPhase<T> {
    pub phi: Reparametrization<T>,
    pub costs: CostTables<T>,
    pub bound_trace: Vec<T>,
}

/// Ascent, `lambda` post-processing, then unary redistribution.
pub fn dual_phase<T: Cost>(model: &GraphicalModel<T>, config: &AscentConfig) -> Result<DualPhase<T>> {
    let ascent = run_block_ascent(model, config)?;
    let phi = postprocess_messages(model, &ascent.phi, config)?;
    let phi = redistribute_unary(model, &phi)?;
    let costs = apply_reparametrization(model, &phi)?;
    Ok(DualPhase {
        phi,
        costs,
        bound_trace: ascent.bound_trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consistency::sac_nodes;
    use crate::energy::{energy_of, DEFAULT_TOLERANCE};
    use crate::fixtures::{m1, m2, m3};
    use crate::model::ModelSpec;

    fn final_bound(m: &GraphicalModel<f64>, phi: &Reparametrization<f64>) -> f64 {
        dual_bound(m, &apply_reparametrization(m, phi).unwrap()).value()
    }

    fn assert_nondecreasing(trace: &[f64]) {
        for w in trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "trace decreased: {trace:?}");
        }
    }

    #[test]
    fn chain_reaches_optimum() {
        let m = m3::<f64>();
        let r = run_block_ascent(&m, &AscentConfig::default()).unwrap();
        assert!((final_bound(&m, &r.phi) - 1.0).abs() < 1e-6);
        assert_nondecreasing(&r.bound_trace);
    }

    #[test]
    fn triangle_bound_stays_sound() {
        let m = m2::<f64>();
        let r = run_block_ascent(&m, &AscentConfig::default()).unwrap();
        let d = final_bound(&m, &r.phi);
        assert!((0.0..=1.0 + 1e-9).contains(&d), "{d}");
        assert_nondecreasing(&r.bound_trace);
    }

    #[test]
    fn tight_model_keeps_its_bound() {
        let m = m1::<f64>();
        let r = run_block_ascent(&m, &AscentConfig::default()).unwrap();
        assert!(r.bound_trace.iter().all(|&d| d.abs() < 1e-12), "{:?}", r.bound_trace);
    }

    #[test]
    fn zero_lambda_postprocess_matches_ascent_iterations() {
        let m = m2::<f64>();
        let cfg = AscentConfig {
            max_iterations: 3,
            convergence_epsilon: -1.0,
            lambda: 0.0,
            postprocess_sweeps: 4,
        };
        let first = run_block_ascent(&m, &cfg).unwrap();
        let continued = postprocess_messages(&m, &first.phi, &cfg).unwrap();
        let direct = run_block_ascent(
            &m,
            &AscentConfig {
                max_iterations: 7,
                ..cfg.clone()
            },
        )
        .unwrap();
        let a = apply_reparametrization(&m, &continued).unwrap();
        let b = apply_reparametrization(&m, &direct.phi).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn postprocess_on_chain_keeps_bound_and_sac() {
        let m = m3::<f64>();
        let cfg = AscentConfig::default();
        let r = run_block_ascent(&m, &cfg).unwrap();
        let before = apply_reparametrization(&m, &r.phi).unwrap();
        let phi2 = postprocess_messages(&m, &r.phi, &cfg).unwrap();
        let after = apply_reparametrization(&m, &phi2).unwrap();
        let (d0, d1) = (dual_bound(&m, &before).value(), dual_bound(&m, &after).value());
        assert!((d1 - d0).abs() < 1e-9, "{d0} vs {d1}");
        let sac0 = sac_nodes(&m, &before, DEFAULT_TOLERANCE).nodes.len();
        let sac1 = sac_nodes(&m, &after, DEFAULT_TOLERANCE).nodes.len();
        assert!(sac1 >= sac0, "{sac0} -> {sac1}");
    }

    #[test]
    fn zero_postprocess_sweeps_is_identity() {
        let m = m2::<f64>();
        let cfg = AscentConfig {
            postprocess_sweeps: 0,
            ..AscentConfig::default()
        };
        let r = run_block_ascent(&m, &cfg).unwrap();
        assert_eq!(postprocess_messages(&m, &r.phi, &cfg).unwrap(), r.phi);
    }

    #[test]
    fn redistribution_examples() {
        // Node 0 with unary (3, 0) and two neighbors.
        let spec = ModelSpec::<f64> {
            label_counts: vec![2, 2, 2, 2],
            unary: vec![vec![3.0, 0.0], vec![0.0; 2], vec![0.0; 2], vec![5.0, 1.0]],
            edges: vec![
                crate::model::EdgeSpec { u: 0, v: 1, table: vec![vec![0.0; 2]; 2] },
                crate::model::EdgeSpec { u: 0, v: 2, table: vec![vec![0.0; 2]; 2] },
            ],
        };
        let m = GraphicalModel::new(spec).unwrap();
        let phi = redistribute_unary(&m, &Reparametrization::zero(&m)).unwrap();
        let c = apply_reparametrization(&m, &phi).unwrap();
        assert_eq!(c.unary(0), &[1.0, 0.0]);
        assert_eq!(c.pairwise(0).row(0), &[1.0, 1.0]);
        assert_eq!(c.pairwise(1).row(0), &[1.0, 1.0]);
        // Isolated node 3 is untouched.
        assert_eq!(c.unary(3), &[5.0, 1.0]);
        for x in [[0, 0, 0, 0], [1, 0, 1, 1], [0, 1, 1, 0]] {
            let before = energy_of(&m, m.costs(), &x).value();
            let after = energy_of(&m, &c, &x).value();
            assert!((before - after).abs() < 1e-12);
        }
    }

    #[test]
    fn infeasible_inputs_are_rejected() {
        let mut spec = m1::<f64>().to_spec();
        spec.unary[0] = vec![f64::INFINITY; 2];
        let m = GraphicalModel::new(spec).unwrap();
        assert!(matches!(run_block_ascent(&m, &AscentConfig::default()), Err(Error::InfeasibleNode(0))));

        let mut spec = m1::<f64>().to_spec();
        spec.edges[0].table = vec![vec![f64::INFINITY; 2]; 2];
        let m = GraphicalModel::new(spec).unwrap();
        assert!(matches!(run_block_ascent(&m, &AscentConfig::default()), Err(Error::InfeasibleEdge(0))));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let m = m1::<f64>();
        let bad = AscentConfig {
            max_iterations: 0,
            ..AscentConfig::default()
        };
        assert!(matches!(run_block_ascent(&m, &bad), Err(Error::Config(_))));
        let bad = AscentConfig {
            lambda: -0.5,
            ..AscentConfig::default()
        };
        assert!(matches!(run_block_ascent(&m, &bad), Err(Error::Config(_))));
    }

    #[test]
    fn dead_rows_keep_the_bound_monotone() {
        // Label 1 of node 0 is forbidden on both edges.
        let inf = f64::INFINITY;
        let spec = ModelSpec {
            label_counts: vec![2, 2, 2],
            unary: vec![vec![0.5, 0.0], vec![0.2, 0.1], vec![0.0, 0.3]],
            edges: vec![
                crate::model::EdgeSpec { u: 0, v: 1, table: vec![vec![0.4, 0.9], vec![inf, inf]] },
                crate::model::EdgeSpec { u: 0, v: 2, table: vec![vec![0.7, 0.1], vec![inf, inf]] },
                crate::model::EdgeSpec { u: 1, v: 2, table: vec![vec![0.3, 0.0], vec![0.6, 0.2]] },
            ],
        };
        let m = GraphicalModel::new(spec).unwrap();
        let r = run_block_ascent(&m, &AscentConfig::default()).unwrap();
        assert_nondecreasing(&r.bound_trace);
        assert!(r.phi.is_finite());
    }
}
