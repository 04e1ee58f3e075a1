//! UAI `MARKOV` files read in log space: a table entry `w` is the cost `-w`.
//!
//! Only unary and pairwise factors are supported. Tables list the last
//! variable of the scope fastest. Factors sharing a scope are summed.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{tokenize, Token};
use crate::error::{Error, Result};
use crate::model::{EdgeSpec, GraphicalModel, ModelSpec, NodeId, Violation};
use crate::scalar::Cost;

struct Tokens<'a> {
    tokens: Vec<Token<'a>>,
    next: usize,
    end: (usize, usize),
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let mut lines = 0;
        let tokens = text
            .lines()
            .enumerate()
            .flat_map(|(i, l)| {
                lines = i + 1;
                tokenize(l, i + 1, false)
            })
            .collect();
        Self { tokens, next: 0, end: (lines + 1, 1) }
    }

    fn take(&mut self, what: &str) -> Result<Token<'a>> {
        let tok = self.tokens.get(self.next).copied().ok_or_else(|| Error::Syntax {
            line: self.end.0,
            column: self.end.1,
            message: format!("unexpected end of input, expected {what}"),
        })?;
        self.next += 1;
        Ok(tok)
    }

    fn usize(&mut self, what: &str) -> Result<usize> {
        self.take(what)?.parse_usize(what)
    }

    fn weight<T: Cost>(&mut self) -> Result<T> {
        let tok = self.take("table entry")?;
        match tok.text.parse::<T>() {
            Ok(w) if !w.is_nan() => Ok(w),
            _ => Err(tok.error(format!("expected number, found `{}`", tok.text))),
        }
    }
}

/// Parses a UAI `MARKOV` document with log-potential tables.
pub fn parse_uai_lg<T: Cost>(text: &str) -> Result<GraphicalModel<T>> {
    let mut toks = Tokens::new(text);
    let kind = toks.take("`MARKOV`")?;
    if kind.text != "MARKOV" {
        return Err(kind.error(format!("expected `MARKOV`, found `{}`", kind.text)));
    }
    let n = toks.usize("variable count")?;
    let label_counts = (0..n)
        .map(|_| toks.usize("cardinality"))
        .collect::<Result<Vec<_>>>()?;
    let f = toks.usize("factor count")?;
    let mut scopes = Vec::with_capacity(f);
    for factor in 0..f {
        let arity_tok = toks.take("factor arity")?;
        let arity = arity_tok.parse_usize("factor arity")?;
        if !(1..=2).contains(&arity) {
            return Err(Error::UnsupportedArity { factor, arity });
        }
        let mut scope = Vec::with_capacity(arity);
        for _ in 0..arity {
            let tok = toks.take("variable index")?;
            let v = tok.parse_usize("variable index")?;
            if v >= n {
                return Err(tok.error(format!("variable {v} out of range")));
            }
            scope.push(v);
        }
        scopes.push(scope);
    }

    let mut unary: Vec<Vec<T>> = label_counts.iter().map(|&k| vec![T::zero(); k]).collect();
    let mut edges: Vec<EdgeSpec<T>> = Vec::new();
    let mut edge_index: HashMap<(NodeId, NodeId), usize> = HashMap::new();
    for (factor, scope) in scopes.iter().enumerate() {
        let size: usize = scope.iter().map(|&v| label_counts[v]).product();
        let count_tok = toks.take("table size")?;
        let count = count_tok.parse_usize("table size")?;
        if count != size {
            return Err(count_tok.error(format!("factor {factor} needs {size} entries, found {count}")));
        }
        let weights = (0..count).map(|_| toks.weight::<T>()).collect::<Result<Vec<_>>>()?;
        match scope[..] {
            [u] => {
                for (s, w) in weights.into_iter().enumerate() {
                    unary[u][s] = unary[u][s] - w;
                }
            }
            [a, b] => {
                if a == b {
                    return Err(Error::InvalidModel(vec![Violation::SelfLoop { edge: factor, node: a }]));
                }
                let (u, v) = (a.min(b), a.max(b));
                let i = *edge_index.entry((u, v)).or_insert_with(|| {
                    edges.push(EdgeSpec {
                        u,
                        v,
                        table: vec![vec![T::zero(); label_counts[v]]; label_counts[u]],
                    });
                    edges.len() - 1
                });
                let cols = label_counts[b];
                for (k, w) in weights.into_iter().enumerate() {
                    let (sa, sb) = (k / cols, k % cols);
                    let (s, t) = if a < b { (sa, sb) } else { (sb, sa) };
                    let cell = &mut edges[i].table[s][t];
                    *cell = *cell - w;
                }
            }
            _ => unreachable!(),
        }
    }
    if let Some(tok) = toks.tokens.get(toks.next) {
        return Err(tok.error("trailing content after last factor table"));
    }
    GraphicalModel::new(ModelSpec { label_counts, unary, edges })
}

fn push_table<T: Cost>(out: &mut String, costs: impl ExactSizeIterator<Item = T>) {
    write!(out, "\n{}\n", costs.len()).unwrap();
    let row: Vec<String> = costs.map(|c| (-c).to_string()).collect();
    writeln!(out, " {}", row.join(" ")).unwrap();
}

/// Writes `model` as a UAI `MARKOV` document: one unary factor per node,
/// then one pairwise factor per edge.
pub fn write_uai_lg<T: Cost>(model: &GraphicalModel<T>) -> String {
    let mut out = String::from("MARKOV\n");
    writeln!(out, "{}", model.node_count()).unwrap();
    let counts: Vec<String> = model.label_counts().iter().map(|k| k.to_string()).collect();
    writeln!(out, "{}", counts.join(" ")).unwrap();
    writeln!(out, "{}", model.node_count() + model.edge_count()).unwrap();
    for u in 0..model.node_count() {
        writeln!(out, "1 {u}").unwrap();
    }
    for edge in model.edges() {
        writeln!(out, "2 {} {}", edge.u, edge.v).unwrap();
    }
    for u in 0..model.node_count() {
        push_table(&mut out, model.costs().unary(u).iter().copied());
    }
    for e in 0..model.edge_count() {
        push_table(&mut out, model.costs().pairwise(e).data().iter().copied());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::energy_of;
    use crate::fixtures::m2;

    #[test]
    fn all_zero_model() {
        let doc = "MARKOV\n2\n2 2\n3\n1 0\n1 1\n2 0 1\n2\n0 0\n2\n0 0\n4\n0 0 0 0\n";
        let m: GraphicalModel<f64> = parse_uai_lg(doc).unwrap();
        assert_eq!(m.edge_count(), 1);
        assert!(m.costs().unary(0).iter().all(|&c| c == 0.0));
        assert!(m.costs().pairwise(0).data().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn reversed_scope_is_transposed() {
        // scope (1, 0): entries indexed by (x1, x0), x0 fastest
        let doc = "MARKOV\n2\n2 3\n1\n2 1 0\n6\n1 2 3 4 5 6\n";
        let m: GraphicalModel<f64> = parse_uai_lg(doc).unwrap();
        let e = m.edge(0);
        assert_eq!((e.u, e.v), (0, 1));
        for x0 in 0..2 {
            for x1 in 0..3 {
                let w = (x1 * 2 + x0 + 1) as f64;
                assert_eq!(energy_of(&m, m.costs(), &[x0, x1]).value(), -w);
            }
        }
    }

    #[test]
    fn duplicate_factors_are_summed() {
        let doc = "MARKOV\n1\n2\n2\n1 0\n1 0\n2\n1 2\n2\n0.5 -inf\n";
        let m: GraphicalModel<f64> = parse_uai_lg(doc).unwrap();
        assert_eq!(m.costs().unary(0)[0], -1.5);
        assert!(m.costs().unary(0)[1].is_infinite());
    }

    #[test]
    fn higher_arity_is_rejected() {
        let doc = "MARKOV\n3\n2 2 2\n2\n1 0\n3 0 1 2\n2\n0 0\n8\n0 0 0 0 0 0 0 0\n";
        match parse_uai_lg::<f64>(doc) {
            Err(Error::UnsupportedArity { factor: 1, arity: 3 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_header() {
        assert!(matches!(parse_uai_lg::<f64>("BAYES\n1\n2\n0\n"), Err(Error::Syntax { line: 1, column: 1, .. })));
        assert!(matches!(parse_uai_lg::<f64>("MARKOV\n2\n2\n"), Err(Error::Syntax { line: 4, .. })));
        assert!(matches!(
            parse_uai_lg::<f64>("MARKOV\n1\n2\n1\n1 0\n3\n0 0 0\n"),
            Err(Error::Syntax { line: 6, column: 1, .. })
        ));
    }

    #[test]
    fn writer_round_trip() {
        let m = m2::<f64>();
        let back: GraphicalModel<f64> = parse_uai_lg(&write_uai_lg(&m)).unwrap();
        assert_eq!(back.to_spec(), m.to_spec());
    }
}
