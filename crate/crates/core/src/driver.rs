//! Solver drivers: the partition-based exact method (`dclp`), the
//! boundary-complement baseline (`clp`), and plain exact solvers.

use std::fmt;
use std::str::FromStr;

use log::debug;

use crate::consistency::sac_nodes;
use crate::dual::{dual_phase, AscentConfig, DualPhase};
use crate::energy::{check_sufficient_optimality, concatenate, dual_bound, total_energy, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};
use crate::exact::{branch_and_bound_solve, brute_force_solve, BnbConfig, DEFAULT_BRUTE_FORCE_CAP};
use crate::model::{boundary, boundary_complement, induced_subgraph, GraphicalModel, Labeling, NodeId, Partition};
use crate::scalar::{Cost, ExtendedCost};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Non-overlapping partition with the separator-minimum criterion.
    Dclp,
    /// Overlapping boundary complement with the boundary-agreement criterion.
    Clp,
    /// Branch-and-bound on the whole model.
    Bb,
    /// Exhaustive enumeration of the whole model.
    Brute,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Dclp => "dclp",
            Method::Clp => "clp",
            Method::Bb => "bb",
            Method::Brute => "brute",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dclp" => Ok(Method::Dclp),
            "clp" => Ok(Method::Clp),
            "bb" => Ok(Method::Bb),
            "brute" => Ok(Method::Brute),
            other => Err(Error::Config(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub ascent: AscentConfig,
    /// Absolute tolerance for argmin membership and strict uniqueness.
    pub tolerance: f64,
    pub bnb: BnbConfig,
    pub brute_force_cap: u128,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            ascent: AscentConfig::default(),
            tolerance: DEFAULT_TOLERANCE,
            bnb: BnbConfig::default(),
            brute_force_cap: DEFAULT_BRUTE_FORCE_CAP,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        self.ascent.validate()?;
        if !(self.tolerance >= 0.0) || !self.tolerance.is_finite() {
            return Err(Error::Config(format!("tolerance must be finite and >= 0, got {}", self.tolerance)));
        }
        Ok(())
    }
}

/// One exact solve of the hard part.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    /// Nodes handed to the exact solver.
    pub vb_size: usize,
    pub ilp_fraction: f64,
    pub bnb_nodes: u64,
    pub criterion_holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport<T: Cost> {
    pub method: Method,
    /// `None` iff infeasible.
    pub labeling: Option<Labeling>,
    /// Energy under the original costs.
    pub energy: ExtendedCost<T>,
    pub dual_bound: ExtendedCost<T>,
    pub iterations: Vec<IterationRecord>,
    pub optimal: bool,
    pub infeasible: bool,
    pub labelwise_ilp_fraction_final: f64,
    pub density: f64,
    /// Bound after every ascent iteration (empty for `bb` and `brute`).
    pub bound_trace: Vec<T>,
}

impl<T: Cost> SolveReport<T> {
    fn infeasible(model: &GraphicalModel<T>, method: Method, iterations: Vec<IterationRecord>, bound_trace: Vec<T>) -> Self {
        Self {
            method,
            labeling: None,
            energy: ExtendedCost::infinity(),
            dual_bound: ExtendedCost::infinity(),
            iterations,
            optimal: false,
            infeasible: true,
            labelwise_ilp_fraction_final: 1.0,
            density: graph_density(model),
            bound_trace,
        }
    }

    fn solved(
        model: &GraphicalModel<T>,
        method: Method,
        labeling: Labeling,
        dual_bound: ExtendedCost<T>,
        iterations: Vec<IterationRecord>,
        fraction: f64,
        bound_trace: Vec<T>,
    ) -> Self {
        let energy = total_energy(model, model.costs(), &labeling).expect("solver output is a full labeling");
        if energy.is_infinite() {
            return Self::infeasible(model, method, iterations, bound_trace);
        }
        Self {
            method,
            labeling: Some(labeling),
            energy,
            dual_bound,
            iterations,
            optimal: true,
            infeasible: false,
            labelwise_ilp_fraction_final: fraction,
            density: graph_density(model),
            bound_trace,
        }
    }
}

/// `1 - sum_{v in A}(|X_v| - 1) / sum_{v in V}(|X_v| - 1)`; 0 when every
/// node has a single label.
pub fn labelwise_ilp_fraction<T: Cost>(model: &GraphicalModel<T>, a_nodes: &[NodeId]) -> f64 {
    let total: usize = model.label_counts().iter().map(|&k| k - 1).sum();
    if total == 0 {
        return 0.0;
    }
    let mut seen = vec![false; model.node_count()];
    let mut easy = 0usize;
    for &u in a_nodes {
        if !std::mem::replace(&mut seen[u], true) {
            easy += model.label_count(u) - 1;
        }
    }
    1.0 - easy as f64 / total as f64
}

/// `2|E| / (|V|(|V|-1))`; 0 for fewer than two nodes.
pub fn graph_density<T: Cost>(model: &GraphicalModel<T>) -> f64 {
    let n = model.node_count();
    if n < 2 {
        return 0.0;
    }
    2.0 * model.edge_count() as f64 / (n as f64 * (n as f64 - 1.0))
}

fn run_dual<T: Cost>(model: &GraphicalModel<T>, config: &SolverConfig) -> Result<Option<DualPhase<T>>> {
    match dual_phase(model, &config.ascent) {
        Ok(d) => Ok(Some(d)),
        Err(Error::InfeasibleNode(_)) | Err(Error::InfeasibleEdge(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Solves `model` exactly by growing the hard part `B` from the nodes that
/// are not strictly arc-consistent after reparametrization.
pub fn solve_dense_combilp<T: Cost>(model: &GraphicalModel<T>, config: &SolverConfig) -> Result<SolveReport<T>> {
    config.validate()?;
    let method = Method::Dclp;
    let Some(dual) = run_dual(model, config)? else {
        return Ok(SolveReport::infeasible(model, method, Vec::new(), Vec::new()));
    };
    let costs = &dual.costs;
    let sac = sac_nodes(model, costs, config.tolerance);
    let witness = sac.witness;
    let mut a_nodes = sac.nodes;
    let mut iterations = Vec::new();

    for k in 0.. {
        let partition = Partition::from_a(model, &a_nodes)?;
        let x_a = witness.restrict(&a_nodes);
        let fraction = labelwise_ilp_fraction(model, &a_nodes);
        if partition.b().is_empty() {
            return Ok(SolveReport::solved(
                model,
                method,
                x_a,
                dual_bound(model, costs),
                iterations,
                fraction,
                dual.bound_trace,
            ));
        }
        let outcome = branch_and_bound_solve(model, costs, partition.b(), &config.bnb);
        let bnb_nodes = outcome.nodes_expanded();
        let Some(sol) = outcome.into_solution() else {
            iterations.push(IterationRecord {
                k,
                vb_size: partition.b().len(),
                ilp_fraction: fraction,
                bnb_nodes,
                criterion_holds: false,
            });
            return Ok(SolveReport::infeasible(model, method, iterations, dual.bound_trace));
        };
        let check = check_sufficient_optimality(model, costs, &partition, &x_a, &sol.labeling, config.tolerance)?;
        debug!(
            "dclp iteration {k}: |V_B| = {}, criterion {}, {} violating",
            partition.b().len(),
            check.holds,
            check.violating.len()
        );
        iterations.push(IterationRecord {
            k,
            vb_size: partition.b().len(),
            ilp_fraction: fraction,
            bnb_nodes,
            criterion_holds: check.holds,
        });
        if check.holds {
            let x = concatenate(&partition, &x_a, &sol.labeling)?;
            return Ok(SolveReport::solved(
                model,
                method,
                x,
                dual_bound(model, costs),
                iterations,
                fraction,
                dual.bound_trace,
            ));
        }
        a_nodes.retain(|u| check.violating.binary_search(u).is_err());
    }
    unreachable!("A shrinks every failed iteration")
}

/// Solves `model` exactly with overlapping subproblems: the hard part is the
/// boundary complement of the consistent set `A`, and optimality follows when
/// both solutions agree on the boundary of `A`.
pub fn solve_combilp<T: Cost>(model: &GraphicalModel<T>, config: &SolverConfig) -> Result<SolveReport<T>> {
    config.validate()?;
    let method = Method::Clp;
    let Some(dual) = run_dual(model, config)? else {
        return Ok(SolveReport::infeasible(model, method, Vec::new(), Vec::new()));
    };
    let costs = &dual.costs;
    let sac = sac_nodes(model, costs, config.tolerance);
    let witness = sac.witness;
    let mut a_nodes = sac.nodes;
    let mut iterations = Vec::new();

    for k in 0.. {
        let b = boundary_complement(model, &a_nodes)?;
        let rim = boundary(model, &a_nodes)?;
        let interior: Vec<NodeId> = a_nodes.iter().copied().filter(|u| rim.binary_search(u).is_err()).collect();
        let fraction = labelwise_ilp_fraction(model, &interior);
        if b.is_empty() {
            return Ok(SolveReport::solved(
                model,
                method,
                witness.restrict(&a_nodes),
                dual_bound(model, costs),
                iterations,
                fraction,
                dual.bound_trace,
            ));
        }
        let outcome = branch_and_bound_solve(model, costs, &b, &config.bnb);
        let bnb_nodes = outcome.nodes_expanded();
        let Some(sol) = outcome.into_solution() else {
            iterations.push(IterationRecord {
                k,
                vb_size: b.len(),
                ilp_fraction: fraction,
                bnb_nodes,
                criterion_holds: false,
            });
            return Ok(SolveReport::infeasible(model, method, iterations, dual.bound_trace));
        };
        let disagree: Vec<NodeId> = rim
            .iter()
            .copied()
            .filter(|&u| witness.get(u) != sol.labeling.get(u))
            .collect();
        let holds = disagree.is_empty();
        debug!("clp iteration {k}: |V_B| = {}, {} disagreeing", b.len(), disagree.len());
        iterations.push(IterationRecord {
            k,
            vb_size: b.len(),
            ilp_fraction: fraction,
            bnb_nodes,
            criterion_holds: holds,
        });
        if holds {
            let mut x = sol.labeling;
            for &u in &a_nodes {
                x.set(u, witness.get(u).unwrap());
            }
            return Ok(SolveReport::solved(
                model,
                method,
                x,
                dual_bound(model, costs),
                iterations,
                fraction,
                dual.bound_trace,
            ));
        }
        a_nodes.retain(|u| disagree.binary_search(u).is_err());
    }
    unreachable!("A shrinks every failed iteration")
}

/// Runs one exact solver on the whole model with its original costs.
fn solve_whole<T: Cost>(model: &GraphicalModel<T>, method: Method, config: &SolverConfig) -> Result<SolveReport<T>> {
    let all: Vec<NodeId> = (0..model.node_count()).collect();
    let sub = induced_subgraph(model, &all)?;
    let outcome = match method {
        Method::Bb => branch_and_bound_solve(model, model.costs(), &sub, &config.bnb),
        Method::Brute => brute_force_solve(model, model.costs(), &sub, Some(config.brute_force_cap))?,
        _ => unreachable!(),
    };
    match outcome.into_solution() {
        Some(sol) => Ok(SolveReport::solved(
            model,
            method,
            sol.labeling,
            dual_bound(model, model.costs()),
            Vec::new(),
            labelwise_ilp_fraction(model, &[]),
            Vec::new(),
        )),
        None => Ok(SolveReport::infeasible(model, method, Vec::new(), Vec::new())),
    }
}

/// Dispatches to the solver selected by `method`.
pub fn solve<T: Cost>(model: &GraphicalModel<T>, method: Method, config: &SolverConfig) -> Result<SolveReport<T>> {
    match method {
        Method::Dclp => solve_dense_combilp(model, config),
        Method::Clp => solve_combilp(model, config),
        Method::Bb | Method::Brute => solve_whole(model, method, config),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{m1, m2, m3};
    use crate::model::ModelSpec;

    #[test]
    fn dclp_on_tight_model_needs_no_exact_solve() {
        let r = solve_dense_combilp(&m1::<f64>(), &SolverConfig::default()).unwrap();
        assert!(r.optimal && !r.infeasible);
        assert_eq!(r.energy.value(), 0.0);
        assert!(r.iterations.is_empty());
        assert_eq!(r.labelwise_ilp_fraction_final, 0.0);
    }

    #[test]
    fn dclp_on_frustrated_triangle_solves_everything_once() {
        let r = solve_dense_combilp(&m2::<f64>(), &SolverConfig::default()).unwrap();
        assert_eq!(r.energy.value(), 1.0);
        assert_eq!(r.iterations.len(), 1);
        assert_eq!(r.iterations[0].vb_size, 3);
        assert_eq!(r.iterations[0].ilp_fraction, 1.0);
        assert!(r.energy.value() >= r.dual_bound.value() - 1e-6);
    }

    #[test]
    fn clp_examples() {
        let r = solve_combilp(&m1::<f64>(), &SolverConfig::default()).unwrap();
        assert_eq!(r.energy.value(), 0.0);
        assert!(r.iterations.is_empty());

        let r = solve_combilp(&m3::<f64>(), &SolverConfig::default()).unwrap();
        assert_eq!(r.energy.value(), 1.0);
        assert_eq!(r.labeling, Some(Labeling::full(vec![0, 0, 0])));
        assert!(r.iterations.is_empty());

        let r = solve_combilp(&m2::<f64>(), &SolverConfig::default()).unwrap();
        assert_eq!(r.energy.value(), 1.0);
    }

    #[test]
    fn whole_model_methods() {
        for method in [Method::Bb, Method::Brute] {
            let r = solve(&m2::<f64>(), method, &SolverConfig::default()).unwrap();
            assert_eq!(r.energy.value(), 1.0);
            assert_eq!(r.method, method);
        }
    }

    #[test]
    fn infeasible_models_are_reported() {
        // Two nodes that must differ and agree at once.
        let inf = f64::INFINITY;
        let spec = ModelSpec {
            label_counts: vec![2, 2, 2],
            unary: vec![vec![0.0; 2]; 3],
            edges: vec![
                crate::model::EdgeSpec { u: 0, v: 1, table: vec![vec![inf, 0.0], vec![0.0, inf]] },
                crate::model::EdgeSpec { u: 1, v: 2, table: vec![vec![inf, 0.0], vec![0.0, inf]] },
                crate::model::EdgeSpec { u: 0, v: 2, table: vec![vec![inf, 0.0], vec![0.0, inf]] },
            ],
        };
        let m = GraphicalModel::new(spec).unwrap();
        for method in [Method::Dclp, Method::Clp, Method::Bb, Method::Brute] {
            let r = solve(&m, method, &SolverConfig::default()).unwrap();
            assert!(r.infeasible, "{method}");
            assert!(!r.optimal);
            assert!(r.labeling.is_none());
        }

        let mut spec = m1::<f64>().to_spec();
        spec.unary[0] = vec![inf, inf];
        let m = GraphicalModel::new(spec).unwrap();
        assert!(solve_dense_combilp(&m, &SolverConfig::default()).unwrap().infeasible);
    }

    #[test]
    fn ilp_fraction_examples() {
        let spec = ModelSpec::<f64> {
            label_counts: vec![3; 4],
            unary: vec![vec![0.0; 3]; 4],
            edges: vec![],
        };
        let m = GraphicalModel::new(spec).unwrap();
        assert_eq!(labelwise_ilp_fraction(&m, &[0, 2]), 0.5);
        assert_eq!(labelwise_ilp_fraction(&m, &[0, 1, 2, 3]), 0.0);
        assert_eq!(labelwise_ilp_fraction(&m, &[]), 1.0);

        let spec = ModelSpec::<f64> {
            label_counts: vec![1; 3],
            unary: vec![vec![0.0]; 3],
            edges: vec![],
        };
        assert_eq!(labelwise_ilp_fraction(&GraphicalModel::new(spec).unwrap(), &[]), 0.0);
    }

    #[test]
    fn density_examples() {
        assert_eq!(graph_density(&m2::<f64>()), 1.0);
        assert!((graph_density(&m3::<f64>()) - 2.0 / 3.0).abs() < 1e-15);
        let single = GraphicalModel::new(ModelSpec::<f64> {
            label_counts: vec![2],
            unary: vec![vec![0.0, 1.0]],
            edges: vec![],
        })
        .unwrap();
        assert_eq!(graph_density(&single), 0.0);
    }

    #[test]
    fn method_names_round_trip() {
        for m in [Method::Dclp, Method::Clp, Method::Bb, Method::Brute] {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("cplex".parse::<Method>().is_err());
    }
}
