//! JSON statistics document.

use serde::Serialize;

use crate::driver::{IterationRecord, SolveReport};
use crate::scalar::{Cost, ExtendedCost};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationDocument {
    pub k: usize,
    pub vb_size: usize,
    pub ilp_fraction: f64,
    pub bnb_nodes: u64,
    pub criterion_holds: bool,
}

impl From<&IterationRecord> for IterationDocument {
    fn from(r: &IterationRecord) -> Self {
        Self {
            k: r.k,
            vb_size: r.vb_size,
            ilp_fraction: r.ilp_fraction,
            bnb_nodes: r.bnb_nodes,
            criterion_holds: r.criterion_holds,
        }
    }
}

/// Serialized form of a run. Infinite energies and bounds become `null`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportDocument {
    pub method: String,
    pub optimal: bool,
    pub infeasible: bool,
    pub energy: Option<f64>,
    pub dual_bound: Option<f64>,
    pub density: f64,
    pub labelwise_ilp_fraction_final: f64,
    pub iterations: Vec<IterationDocument>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_trace: Option<Vec<f64>>,
}

fn number<T: Cost>(c: ExtendedCost<T>) -> Option<f64> {
    c.as_finite().and_then(|x| x.to_f64())
}

impl<T: Cost> From<&SolveReport<T>> for ReportDocument {
    fn from(r: &SolveReport<T>) -> Self {
        Self {
            method: r.method.to_string(),
            optimal: r.optimal,
            infeasible: r.infeasible,
            energy: number(r.energy),
            dual_bound: number(r.dual_bound),
            density: r.density,
            labelwise_ilp_fraction_final: r.labelwise_ilp_fraction_final,
            iterations: r.iterations.iter().map(Into::into).collect(),
            bound_trace: None,
        }
    }
}

/// Outcome of the dual phase alone.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport<T: Cost> {
    pub infeasible: bool,
    pub bound_trace: Vec<T>,
    pub density: f64,
    /// Labelwise fraction of the nodes that are not strictly arc-consistent.
    pub labelwise_ilp_fraction: f64,
}

impl<T: Cost> From<&BoundReport<T>> for ReportDocument {
    fn from(r: &BoundReport<T>) -> Self {
        Self {
            method: "bound".into(),
            optimal: false,
            infeasible: r.infeasible,
            energy: None,
            dual_bound: r.bound_trace.last().and_then(|x| x.to_f64()),
            density: r.density,
            labelwise_ilp_fraction_final: r.labelwise_ilp_fraction,
            iterations: Vec::new(),
            bound_trace: Some(r.bound_trace.iter().filter_map(|x| x.to_f64()).collect()),
        }
    }
}

/// Renders the statistics document with a fixed field order.
pub fn emit_report(doc: &ReportDocument) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("report serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::{solve, Method, SolverConfig};
    use crate::fixtures::{m1, m2};

    #[test]
    fn m1_document() {
        let r = solve(&m1::<f64>(), Method::Dclp, &SolverConfig::default()).unwrap();
        let text = emit_report(&(&r).into());
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["optimal"], true);
        assert_eq!(v["energy"], 0.0);
        assert_eq!(v["iterations"], serde_json::json!([]));
        assert!(v.get("bound_trace").is_none());
        let order = [
            "method",
            "optimal",
            "infeasible",
            "energy",
            "dual_bound",
            "density",
            "labelwise_ilp_fraction_final",
            "iterations",
        ];
        let pos: Vec<usize> = order.iter().map(|k| text.find(&format!("\"{k}\"")).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn m2_document_has_one_iteration() {
        let r = solve(&m2::<f64>(), Method::Dclp, &SolverConfig::default()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&emit_report(&(&r).into())).unwrap();
        assert_eq!(v["iterations"].as_array().unwrap().len(), 1);
        assert_eq!(v["iterations"][0]["ilp_fraction"], 1.0);
    }

    #[test]
    fn infeasible_document() {
        let mut spec = m1::<f64>().to_spec();
        spec.edges[0].table = vec![vec![f64::INFINITY; 2]; 2];
        let m = crate::model::GraphicalModel::new(spec).unwrap();
        let r = solve(&m, Method::Bb, &SolverConfig::default()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&emit_report(&(&r).into())).unwrap();
        assert_eq!(v["infeasible"], true);
        assert!(v["energy"].is_null());
    }
}
