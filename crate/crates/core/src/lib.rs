//! Exact MAP inference for pairwise graphical models.
//!
//! A dual block-coordinate ascent reparametrizes the costs; nodes that end up
//! strictly arc-consistent form an easy part whose optimum is read off
//! directly, and only the remainder is handed to branch-and-bound. The hard
//! part grows until a separator optimality test certifies the joined labeling.
//!
//! All algorithms are generic over the cost scalar ([`Cost`], implemented for
//! `f32` and `f64`). The aliases below fix it to `f64` or `f32`.

pub mod cli;
pub mod consistency;
pub mod driver;
pub mod dual;
pub mod energy;
pub mod error;
pub mod exact;
pub mod fixtures;
pub mod io;
pub mod model;
pub mod scalar;
pub mod synth;

pub use driver::{solve, solve_combilp, solve_dense_combilp, Method, SolverConfig};
pub use error::{Error, Result};
pub use model::{Labeling, ModelSpec};
pub use scalar::{Cost, ExtendedCost};

pub type Model = model::GraphicalModel<f64>;
pub type ModelF32 = model::GraphicalModel<f32>;
pub type Report = driver::SolveReport<f64>;
pub type ReportF32 = driver::SolveReport<f32>;
pub type Energy = ExtendedCost<f64>;
pub type EnergyF32 = ExtendedCost<f32>;
pub type Phi = model::Reparametrization<f64>;
pub type PhiF32 = model::Reparametrization<f32>;
