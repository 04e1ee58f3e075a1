//! Small reference models used in documentation and tests.

use crate::model::{EdgeSpec, GraphicalModel, ModelSpec};
use crate::scalar::Cost;

fn build<T: Cost>(unary: &[&[f64]], edges: &[(usize, usize, &[&[f64]])]) -> GraphicalModel<T> {
    let spec = ModelSpec {
        label_counts: unary.iter().map(|u| u.len()).collect(),
        unary: unary
            .iter()
            .map(|u| u.iter().map(|&x| T::lit(x)).collect())
            .collect(),
        edges: edges
            .iter()
            .map(|&(u, v, table)| EdgeSpec {
                u,
                v,
                table: table
                    .iter()
                    .map(|r| r.iter().map(|&x| T::lit(x)).collect())
                    .collect(),
            })
            .collect(),
    };
    GraphicalModel::new(spec).expect("fixture is well-formed")
}

/// Two nodes, unique optimum `(0, 0)` with energy 0.
pub fn m1<T: Cost>() -> GraphicalModel<T> {
    build(&[&[0.0, 1.0], &[0.0, 1.0]], &[(0, 1, &[&[0.0, 2.0], &[2.0, 1.0]])])
}

/// Frustrated triangle: optimum 1, bound 0 at the zero reparametrization.
pub fn m2<T: Cost>() -> GraphicalModel<T> {
    let t: &[&[f64]] = &[&[1.0, 0.0], &[0.0, 1.0]];
    build(
        &[&[0.0, 0.0], &[0.0, 0.0], &[0.0, 0.0]],
        &[(0, 1, t), (0, 2, t), (1, 2, t)],
    )
}

/// Chain `a - b - c`; optimum `(0, 0, 0)` with energy 1.
pub fn m3<T: Cost>() -> GraphicalModel<T> {
    build(
        &[&[0.0, 1.0], &[1.0, 0.0], &[0.0, 1.0]],
        &[
            (0, 1, &[&[0.0, 1.0], &[2.0, 3.0]]),
            (1, 2, &[&[0.0, 2.0], &[1.0, 3.0]]),
        ],
    )
}
