//! Line-oriented native model format.
//!
//! ```text
//! MAPMODEL 1
//! <node_count> <edge_count>
//! <label counts>
//! <one unary line per node>
//! <u> <v>            # per edge, followed by |X_u| rows of |X_v| costs
//! ```
//!
//! Costs are decimal literals or `inf`. `#` starts a comment and blank
//! lines are ignored.

use std::fmt::Write as _;

use super::{tokenize, Token};
use crate::error::{Error, Result};
use crate::model::{EdgeSpec, GraphicalModel, ModelSpec, Violation};
use crate::scalar::Cost;

struct Lines<'a> {
    lines: Vec<Vec<Token<'a>>>,
    next: usize,
    end_line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let mut end_line = 1;
        let lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| {
                end_line = i + 2;
                tokenize(l, i + 1, true)
            })
            .filter(|t| !t.is_empty())
            .collect();
        Self { lines, next: 0, end_line }
    }

    /// Next non-blank line, which must hold exactly `count` tokens.
    fn take(&mut self, count: usize, what: &str) -> Result<Vec<Token<'a>>> {
        let Some(line) = self.lines.get(self.next) else {
            return Err(Error::Syntax {
                line: self.end_line,
                column: 1,
                message: format!("unexpected end of input, expected {what}"),
            });
        };
        self.next += 1;
        if line.len() != count {
            let at = line.get(count).unwrap_or(&line[line.len() - 1]);
            return Err(at.error(format!("expected {count} tokens for {what}, found {}", line.len())));
        }
        Ok(line.clone())
    }

    fn finish(&self) -> Result<()> {
        match self.lines.get(self.next) {
            Some(line) => Err(line[0].error("trailing content after last edge")),
            None => Ok(()),
        }
    }
}

fn parse_cost<T: Cost>(tok: &Token<'_>) -> Result<T> {
    if tok.text == "inf" {
        return Ok(T::infinity());
    }
    let bad = || tok.error(format!("expected cost, found `{}`", tok.text));
    let looks_decimal = tok
        .text
        .bytes()
        .all(|b| b.is_ascii_digit() || matches!(b, b'+' | b'-' | b'.' | b'e' | b'E'));
    if !looks_decimal {
        return Err(bad());
    }
    tok.text.parse::<T>().map_err(|_| bad())
}

fn parse_costs<T: Cost>(line: &[Token<'_>]) -> Result<Vec<T>> {
    line.iter().map(parse_cost).collect()
}

/// Parses and validates a native model document.
pub fn parse_native<T: Cost>(text: &str) -> Result<GraphicalModel<T>> {
    let mut lines = Lines::new(text);
    let header = lines.take(2, "header `MAPMODEL 1`")?;
    if header[0].text != "MAPMODEL" {
        return Err(header[0].error(format!("expected `MAPMODEL`, found `{}`", header[0].text)));
    }
    if header[1].text != "1" {
        return Err(header[1].error(format!("unsupported version `{}`", header[1].text)));
    }
    let dims = lines.take(2, "node and edge counts")?;
    let n = dims[0].parse_usize("node count")?;
    let m = dims[1].parse_usize("edge count")?;

    let label_counts = if n == 0 {
        Vec::new()
    } else {
        lines
            .take(n, "label counts")?
            .iter()
            .map(|t| t.parse_usize("label count"))
            .collect::<Result<Vec<_>>>()?
    };

    let mut unary = Vec::with_capacity(n);
    for (u, &k) in label_counts.iter().enumerate() {
        if k == 0 {
            unary.push(Vec::new());
            continue;
        }
        unary.push(parse_costs(&lines.take(k, &format!("unary costs of node {u}"))?)?);
    }

    let mut edges = Vec::with_capacity(m);
    for i in 0..m {
        let head = lines.take(2, &format!("endpoints of edge #{i}"))?;
        let u = head[0].parse_usize("node id")?;
        let v = head[1].parse_usize("node id")?;
        let (rows, cols) = match (label_counts.get(u), label_counts.get(v)) {
            (Some(&r), Some(&c)) => (r, c),
            _ => {
                let node = if u >= n { u } else { v };
                return Err(Error::InvalidModel(vec![Violation::UnknownNode { edge: i, node }]));
            }
        };
        let mut table = Vec::with_capacity(rows);
        if cols > 0 {
            for s in 0..rows {
                table.push(parse_costs(&lines.take(cols, &format!("row {s} of edge #{i}"))?)?);
            }
        }
        edges.push(EdgeSpec { u, v, table });
    }
    lines.finish()?;

    GraphicalModel::new(ModelSpec { label_counts, unary, edges })
}

fn push_row<T: Cost>(out: &mut String, row: impl IntoIterator<Item = T>) {
    let mut first = true;
    for c in row {
        if !first {
            out.push(' ');
        }
        first = false;
        write!(out, "{c}").unwrap();
    }
    out.push('\n');
}

/// Writes `model` in canonical native form.
pub fn write_native<T: Cost>(model: &GraphicalModel<T>) -> String {
    let mut out = String::from("MAPMODEL 1\n");
    writeln!(out, "{} {}", model.node_count(), model.edge_count()).unwrap();
    let counts: Vec<String> = model.label_counts().iter().map(|k| k.to_string()).collect();
    writeln!(out, "{}", counts.join(" ")).unwrap();
    for u in 0..model.node_count() {
        push_row(&mut out, model.costs().unary(u).iter().copied());
    }
    for (e, edge) in model.edges().iter().enumerate() {
        writeln!(out, "{} {}", edge.u, edge.v).unwrap();
        let table = model.costs().pairwise(e);
        for s in 0..table.rows() {
            push_row(&mut out, table.row(s).iter().copied());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::energy_of;
    use crate::fixtures::{m1, m2};

    const M1: &str = "\
MAPMODEL 1
2 1
2 2
0 1
0 1
0 1
0 2
2 1
";

    #[test]
    fn parses_reference_document() {
        let m: GraphicalModel<f64> = parse_native(M1).unwrap();
        assert_eq!(m.to_spec(), m1::<f64>().to_spec());
        assert_eq!(write_native(&m), M1);
    }

    #[test]
    fn comments_blank_lines_and_infinity() {
        let doc = "# a model\n\nMAPMODEL 1  # header\n2 1\n2 2\n0 1\n\n0 1\n0 1\n0 inf\n1 1\n";
        let m: GraphicalModel<f64> = parse_native(doc).unwrap();
        assert!(m.costs().pairwise(0).get(0, 1).is_infinite());
    }

    #[test]
    fn self_loop_is_rejected() {
        let doc = "MAPMODEL 1\n1 1\n2\n0 0\n0 0\n0 0\n0 0\n";
        match parse_native::<f64>(doc) {
            Err(Error::InvalidModel(v)) => assert!(v.contains(&Violation::SelfLoop { edge: 0, node: 0 })),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_node_is_named() {
        let doc = "MAPMODEL 1\n2 1\n2 2\n0 1\n0 1\n0 5\n";
        match parse_native::<f64>(doc) {
            Err(Error::InvalidModel(v)) => assert_eq!(v, vec![Violation::UnknownNode { edge: 0, node: 5 }]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let cases = [
            ("MAPMODEL 2\n", 1, 10),
            ("MODEL 1\n", 1, 1),
            ("MAPMODEL 1\n2 1\n2 2\n0 x\n", 4, 3),
            ("MAPMODEL 1\n2 1\n2 2\n0 1 2\n", 4, 5),
            ("MAPMODEL 1\n2 1\n2 2\n0 nan\n", 4, 3),
            ("MAPMODEL 1\n2 0\n2 2\n0 1\n", 5, 1),
            ("MAPMODEL 1\n1 0\n1\n0\n7\n", 5, 1),
        ];
        for (doc, line, column) in cases {
            match parse_native::<f64>(doc) {
                Err(Error::Syntax { line: l, column: c, .. }) => assert_eq!((l, c), (line, column), "{doc:?}"),
                other => panic!("unexpected {other:?} for {doc:?}"),
            }
        }
    }

    #[test]
    fn round_trip_preserves_energies() {
        let m = m2::<f64>();
        let text = write_native(&m);
        let back: GraphicalModel<f64> = parse_native(&text).unwrap();
        assert_eq!(write_native(&back), text);
        for x in 0..8usize {
            let x = [x & 1, (x >> 1) & 1, (x >> 2) & 1];
            assert_eq!(energy_of(&m, m.costs(), &x), energy_of(&back, back.costs(), &x));
        }
    }

    #[test]
    fn empty_model() {
        let m = GraphicalModel::<f64>::new(ModelSpec { label_counts: vec![], unary: vec![], edges: vec![] }).unwrap();
        let text = write_native(&m);
        let back: GraphicalModel<f64> = parse_native(&text).unwrap();
        assert_eq!(back.node_count(), 0);
        assert_eq!(write_native(&back), text);
    }
}
