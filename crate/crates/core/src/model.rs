//! Graphs, cost tables, labelings, reparametrizations and partitions.
//!
//! Nodes are dense indices `0..n`, labels are dense per node. Every edge is
//! stored once with canonical orientation `u < v`; its pairwise table is
//! row-major with rows indexed by the label of `u`.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{min_of, Cost};

pub type NodeId = usize;
pub type EdgeId = usize;
pub type Label = usize;

/// A structural problem found by [`validate_model`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoLabels { node: NodeId },
    UnaryDimension { node: NodeId, expected: usize, found: usize },
    UnknownNode { edge: usize, node: NodeId },
    SelfLoop { edge: usize, node: NodeId },
    DuplicateEdge { edge: usize, first: usize, u: NodeId, v: NodeId },
    PairwiseDimension { edge: usize, expected: (usize, usize), found: String },
    InvalidCost { location: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoLabels { node } => write!(f, "node {node} has no labels"),
            Violation::UnaryDimension { node, expected, found } => write!(
                f,
                "unary of node {node} has {found} entries, expected {expected}"
            ),
            Violation::UnknownNode { edge, node } => {
                write!(f, "edge #{edge} references unknown node {node}")
            }
            Violation::SelfLoop { edge, node } => write!(f, "edge #{edge} is a self-loop on node {node}"),
            Violation::DuplicateEdge { edge, first, u, v } => write!(
                f,
                "edge #{edge} ({u},{v}) duplicates edge #{first}"
            ),
            Violation::PairwiseDimension { edge, expected, found } => write!(
                f,
                "pairwise table of edge #{edge} is {found}, expected {}x{}",
                expected.0, expected.1
            ),
            Violation::InvalidCost { location } => {
                write!(f, "invalid cost (NaN or -inf) at {location}")
            }
        }
    }
}

/// Unvalidated model description, as read from a file or built by hand.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec<T> {
    pub label_counts: Vec<usize>,
    pub unary: Vec<Vec<T>>,
    pub edges: Vec<EdgeSpec<T>>,
}

/// One pairwise term; `table[s][t]` is the cost of `u = s, v = t`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSpec<T> {
    pub u: NodeId,
    pub v: NodeId,
    pub table: Vec<Vec<T>>,
}

/// Returns every structural violation of `spec`; empty iff well-formed.
pub fn validate_model<T: Cost>(spec: &ModelSpec<T>) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = spec.label_counts.len();
    for (node, &k) in spec.label_counts.iter().enumerate() {
        if k == 0 {
            out.push(Violation::NoLabels { node });
        }
    }
    if spec.unary.len() != n {
        out.push(Violation::UnaryDimension {
            node: spec.unary.len().min(n),
            expected: n,
            found: spec.unary.len(),
        });
    }
    for (node, row) in spec.unary.iter().enumerate().take(n) {
        if row.len() != spec.label_counts[node] {
            out.push(Violation::UnaryDimension {
                node,
                expected: spec.label_counts[node],
                found: row.len(),
            });
        }
        if let Some(s) = row.iter().position(|c| !c.is_extended()) {
            out.push(Violation::InvalidCost {
                location: format!("unary {node}, label {s}"),
            });
        }
    }

    let mut seen = std::collections::HashMap::new();
    for (i, e) in spec.edges.iter().enumerate() {
        let mut bad_node = false;
        for node in [e.u, e.v] {
            if node >= n {
                out.push(Violation::UnknownNode { edge: i, node });
                bad_node = true;
            }
        }
        if e.u == e.v {
            out.push(Violation::SelfLoop { edge: i, node: e.u });
            continue;
        }
        let key = (e.u.min(e.v), e.u.max(e.v));
        if let Some(&first) = seen.get(&key) {
            out.push(Violation::DuplicateEdge {
                edge: i,
                first,
                u: key.0,
                v: key.1,
            });
        } else {
            seen.insert(key, i);
        }
        if bad_node {
            continue;
        }
        let expected = (spec.label_counts[e.u], spec.label_counts[e.v]);
        let ragged = e.table.iter().any(|r| r.len() != expected.1);
        if e.table.len() != expected.0 || ragged {
            let widths: Vec<_> = e.table.iter().map(Vec::len).collect();
            let found = match widths.iter().min() {
                Some(&w) if widths.iter().all(|&x| x == w) => format!("{}x{}", widths.len(), w),
                _ => format!("{} rows of widths {:?}", widths.len(), widths),
            };
            out.push(Violation::PairwiseDimension {
                edge: i,
                expected,
                found,
            });
        }
        for (s, row) in e.table.iter().enumerate() {
            if let Some(t) = row.iter().position(|c| !c.is_extended()) {
                out.push(Violation::InvalidCost {
                    location: format!("edge #{i}, entry ({s},{t})"),
                });
            }
        }
    }
    out
}

/// Canonically oriented edge, `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
}

impl Edge {
    /// The endpoint opposite to `node`.
    #[inline]
    pub fn other(&self, node: NodeId) -> NodeId {
        if node == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// Dense row-major pairwise cost table.
#[derive(Debug, Clone, PartialEq)]
pub struct PairTable<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Cost> PairTable<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "table of {} entries for shape {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, s: Label, t: Label) -> T {
        self.data[s * self.cols + t]
    }

    #[inline]
    pub fn set(&mut self, s: Label, t: Label, value: T) {
        self.data[s * self.cols + t] = value;
    }

    #[inline]
    pub fn row(&self, s: Label) -> &[T] {
        &self.data[s * self.cols..(s + 1) * self.cols]
    }

    pub fn column(&self, t: Label) -> impl Iterator<Item = T> + '_ {
        self.data[t..].iter().step_by(self.cols).copied()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    /// Table minimum; `+inf` if every entry is infinite.
    pub fn min(&self) -> T {
        min_of(&self.data)
    }

    /// Adds `delta` to every entry of row `s`.
    #[inline]
    pub fn add_to_row(&mut self, s: Label, delta: T) {
        for x in &mut self.data[s * self.cols..(s + 1) * self.cols] {
            *x = *x + delta;
        }
    }

    /// Adds `delta` to every entry of column `t`.
    #[inline]
    pub fn add_to_column(&mut self, t: Label, delta: T) {
        for x in self.data[t..].iter_mut().step_by(self.cols) {
            *x = *x + delta;
        }
    }

    pub fn transposed(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for t in 0..self.cols {
            data.extend(self.column(t));
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }
}

/// A full set of unary and pairwise costs over a fixed graph structure.
///
/// Both the original costs of a model and reparametrized costs are values of
/// this type.
#[derive(Debug, Clone, PartialEq)]
pub struct CostTables<T> {
    pub(crate) unary: Vec<Vec<T>>,
    pub(crate) pairwise: Vec<PairTable<T>>,
}

impl<T: Cost> CostTables<T> {
    #[inline]
    pub fn unary(&self, u: NodeId) -> &[T] {
        &self.unary[u]
    }

    #[inline]
    pub fn pairwise(&self, e: EdgeId) -> &PairTable<T> {
        &self.pairwise[e]
    }

    /// Largest absolute difference between corresponding entries; `inf`
    /// entries must match exactly.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let mut worst = T::zero();
        let mut visit = |a: T, b: T| {
            let d = if a.is_infinite() || b.is_infinite() {
                if a == b {
                    T::zero()
                } else {
                    T::infinity()
                }
            } else {
                (a - b).abs()
            };
            worst = worst.max(d);
        };
        for (a, b) in self.unary.iter().zip(&other.unary) {
            a.iter().zip(b).for_each(|(&x, &y)| visit(x, y));
        }
        for (a, b) in self.pairwise.iter().zip(&other.pairwise) {
            a.data.iter().zip(&b.data).for_each(|(&x, &y)| visit(x, y));
        }
        worst
    }
}

/// Undirected pairwise graphical model. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphicalModel<T> {
    label_counts: Vec<usize>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(NodeId, EdgeId)>>,
    costs: CostTables<T>,
}

impl<T: Cost> GraphicalModel<T> {
    /// Validates `spec` and builds the model, normalizing edge orientation.
    pub fn new(spec: ModelSpec<T>) -> Result<Self> {
        let violations = validate_model(&spec);
        if !violations.is_empty() {
            return Err(Error::InvalidModel(violations));
        }
        let n = spec.label_counts.len();
        let mut adjacency = vec![Vec::new(); n];
        let mut edges = Vec::with_capacity(spec.edges.len());
        let mut pairwise = Vec::with_capacity(spec.edges.len());
        for (id, e) in spec.edges.into_iter().enumerate() {
            let rows = spec.label_counts[e.u];
            let cols = spec.label_counts[e.v];
            let table = PairTable::new(rows, cols, e.table.into_iter().flatten().collect())?;
            let (edge, table) = if e.u < e.v {
                (Edge { u: e.u, v: e.v }, table)
            } else {
                (Edge { u: e.v, v: e.u }, table.transposed())
            };
            adjacency[edge.u].push((edge.v, id));
            adjacency[edge.v].push((edge.u, id));
            edges.push(edge);
            pairwise.push(table);
        }
        Ok(Self {
            label_counts: spec.label_counts,
            edges,
            adjacency,
            costs: CostTables {
                unary: spec.unary,
                pairwise,
            },
        })
    }

    /// Converts back into a plain description with canonical orientation.
    pub fn to_spec(&self) -> ModelSpec<T> {
        ModelSpec {
            label_counts: self.label_counts.clone(),
            unary: self.costs.unary.clone(),
            edges: self
                .edges
                .iter()
                .zip(&self.costs.pairwise)
                .map(|(e, t)| EdgeSpec {
                    u: e.u,
                    v: e.v,
                    table: (0..t.rows()).map(|s| t.row(s).to_vec()).collect(),
                })
                .collect(),
        }
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.label_counts.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn label_count(&self, u: NodeId) -> usize {
        self.label_counts[u]
    }

    pub fn label_counts(&self) -> &[usize] {
        &self.label_counts
    }

    #[inline]
    pub fn edge(&self, e: EdgeId) -> Edge {
        self.edges[e]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// `(neighbor, edge)` pairs incident to `u`, in edge insertion order.
    #[inline]
    pub fn neighbors(&self, u: NodeId) -> &[(NodeId, EdgeId)] {
        &self.adjacency[u]
    }

    #[inline]
    pub fn degree(&self, u: NodeId) -> usize {
        self.adjacency[u].len()
    }

    /// Original costs.
    #[inline]
    pub fn costs(&self) -> &CostTables<T> {
        &self.costs
    }

    /// Edge between `a` and `b` in either orientation.
    pub fn find_edge(&self, a: NodeId, b: NodeId) -> Option<EdgeId> {
        if a >= self.node_count() {
            return None;
        }
        self.adjacency[a]
            .iter()
            .find(|&&(w, _)| w == b)
            .map(|&(_, e)| e)
    }

    pub(crate) fn check_node(&self, u: NodeId) -> Result<()> {
        if u < self.node_count() {
            Ok(())
        } else {
            Err(Error::UnknownNode(u))
        }
    }

    pub(crate) fn check_edge(&self, e: EdgeId) -> Result<()> {
        if e < self.edge_count() {
            Ok(())
        } else {
            Err(Error::UnknownEdge(e))
        }
    }

    /// Total number of labelings, saturating at `u128::MAX`.
    pub fn labeling_space(&self, nodes: &[NodeId]) -> u128 {
        nodes.iter().fold(1u128, |acc, &u| {
            acc.saturating_mul(self.label_counts[u] as u128)
        })
    }
}

/// Assignment of labels to a subset of the model's nodes.
///
/// Stored densely over all nodes; unassigned nodes hold `None`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Labeling {
    labels: Vec<Option<Label>>,
}

impl Labeling {
    /// Labeling over `node_count` nodes with nothing assigned.
    pub fn empty(node_count: usize) -> Self {
        Self {
            labels: vec![None; node_count],
        }
    }

    /// Full labeling, one label per node.
    pub fn full(labels: Vec<Label>) -> Self {
        Self {
            labels: labels.into_iter().map(Some).collect(),
        }
    }

    pub fn from_assignments(
        node_count: usize,
        pairs: impl IntoIterator<Item = (NodeId, Label)>,
    ) -> Self {
        let mut out = Self::empty(node_count);
        for (u, s) in pairs {
            out.labels[u] = Some(s);
        }
        out
    }

    /// Size of the node universe (not the number of assigned nodes).
    #[inline]
    pub fn universe(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn get(&self, u: NodeId) -> Option<Label> {
        self.labels.get(u).copied().flatten()
    }

    #[inline]
    pub fn set(&mut self, u: NodeId, label: Label) {
        self.labels[u] = Some(label);
    }

    pub fn covered(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(u, l)| l.map(|_| u))
    }

    pub fn is_full(&self) -> bool {
        self.labels.iter().all(Option::is_some)
    }

    /// Labels of a full labeling.
    pub fn to_vec(&self) -> Option<Vec<Label>> {
        self.labels.iter().copied().collect()
    }

    /// True iff exactly the nodes in `nodes` are assigned.
    pub fn covers_exactly(&self, nodes: &[NodeId]) -> bool {
        let count = self.labels.iter().filter(|l| l.is_some()).count();
        count == nodes.len() && nodes.iter().all(|&u| self.get(u).is_some())
    }

    /// Copy keeping only the nodes in `nodes`.
    pub fn restrict(&self, nodes: &[NodeId]) -> Self {
        let mut out = Self::empty(self.labels.len());
        for &u in nodes {
            out.labels[u] = self.labels[u];
        }
        out
    }

    pub(crate) fn check<T: Cost>(&self, model: &GraphicalModel<T>) -> Result<()> {
        if self.labels.len() != model.node_count() {
            return Err(Error::Coverage(format!(
                "labeling over {} nodes for a model with {}",
                self.labels.len(),
                model.node_count()
            )));
        }
        for (node, l) in self.labels.iter().enumerate() {
            if let Some(label) = *l {
                let count = model.label_count(node);
                if label >= count {
                    return Err(Error::LabelOutOfRange { node, label, count });
                }
            }
        }
        Ok(())
    }
}

/// Induced subgraph: a node set plus every model edge inside it.
///
/// Costs are always read from a master [`CostTables`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgraph {
    nodes: Vec<NodeId>,
    edges: Vec<EdgeId>,
    member: Vec<bool>,
}

impl Subgraph {
    /// Sorted node ids.
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    /// Sorted edge ids.
    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    #[inline]
    pub fn contains(&self, u: NodeId) -> bool {
        self.member.get(u).copied().unwrap_or(false)
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }
}

/// Subgraph induced by `nodes` (duplicates ignored).
pub fn induced_subgraph<T: Cost>(model: &GraphicalModel<T>, nodes: &[NodeId]) -> Result<Subgraph> {
    let mut member = vec![false; model.node_count()];
    for &u in nodes {
        model.check_node(u)?;
        member[u] = true;
    }
    Ok(induce(model, member))
}

fn induce<T: Cost>(model: &GraphicalModel<T>, member: Vec<bool>) -> Subgraph {
    let nodes = (0..model.node_count()).filter(|&u| member[u]).collect();
    let edges = model
        .edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| member[e.u] && member[e.v])
        .map(|(i, _)| i)
        .collect();
    Subgraph {
        nodes,
        edges,
        member,
    }
}

/// Nodes of `a_nodes` with at least one neighbor outside `a_nodes`.
pub fn boundary<T: Cost>(model: &GraphicalModel<T>, a_nodes: &[NodeId]) -> Result<Vec<NodeId>> {
    let inside = membership(model, a_nodes)?;
    Ok((0..model.node_count())
        .filter(|&u| inside[u] && model.neighbors(u).iter().any(|&(w, _)| !inside[w]))
        .collect())
}

/// Subgraph induced by the complement of `a_nodes` together with the
/// boundary of `a_nodes`.
pub fn boundary_complement<T: Cost>(
    model: &GraphicalModel<T>,
    a_nodes: &[NodeId],
) -> Result<Subgraph> {
    let inside = membership(model, a_nodes)?;
    let member = (0..model.node_count())
        .map(|u| !inside[u] || model.neighbors(u).iter().any(|&(w, _)| !inside[w]))
        .collect();
    Ok(induce(model, member))
}

fn membership<T: Cost>(model: &GraphicalModel<T>, nodes: &[NodeId]) -> Result<Vec<bool>> {
    let mut inside = vec![false; model.node_count()];
    for &u in nodes {
        model.check_node(u)?;
        inside[u] = true;
    }
    Ok(inside)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// Two disjoint induced subgraphs covering the graph, plus the edges
/// running between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    side: Vec<Side>,
    a: Subgraph,
    b: Subgraph,
    separator: Vec<EdgeId>,
}

impl Partition {
    /// Partition with `V_A = a_nodes` and `V_B` its complement.
    pub fn from_a<T: Cost>(model: &GraphicalModel<T>, a_nodes: &[NodeId]) -> Result<Self> {
        let inside = membership(model, a_nodes)?;
        let side = inside
            .iter()
            .map(|&x| if x { Side::A } else { Side::B })
            .collect();
        let separator = model
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, e)| inside[e.u] != inside[e.v])
            .map(|(i, _)| i)
            .collect();
        let outside = inside.iter().map(|&x| !x).collect();
        Ok(Self {
            side,
            a: induce(model, inside),
            b: induce(model, outside),
            separator,
        })
    }

    #[inline]
    pub fn side(&self, u: NodeId) -> Side {
        self.side[u]
    }

    pub fn a(&self) -> &Subgraph {
        &self.a
    }

    pub fn b(&self) -> &Subgraph {
        &self.b
    }

    /// Edges with one endpoint on each side.
    pub fn separator(&self) -> &[EdgeId] {
        &self.separator
    }

    /// `(a_endpoint, b_endpoint)` of a separator edge.
    pub fn split_endpoints(&self, edge: Edge) -> (NodeId, NodeId) {
        if self.side[edge.u] == Side::A {
            (edge.u, edge.v)
        } else {
            (edge.v, edge.u)
        }
    }
}

/// Messages `phi_{u,v}` and `phi_{v,u}` for every edge.
///
/// For edge `e = (u, v)`, `first[e]` holds `phi_{u,v}` (indexed by labels of
/// `u`) and `second[e]` holds `phi_{v,u}` (labels of `v`).
#[derive(Debug, Clone, PartialEq)]
pub struct Reparametrization<T> {
    pub(crate) first: Vec<Vec<T>>,
    pub(crate) second: Vec<Vec<T>>,
}

impl<T: Cost> Reparametrization<T> {
    /// The identity reparametrization.
    pub fn zero(model: &GraphicalModel<T>) -> Self {
        let (first, second) = model
            .edges()
            .iter()
            .map(|e| {
                (
                    vec![T::zero(); model.label_count(e.u)],
                    vec![T::zero(); model.label_count(e.v)],
                )
            })
            .unzip();
        Self { first, second }
    }

    /// Message `phi_{from, other}` on `edge`, indexed by labels of `from`.
    pub fn message(&self, edge: Edge, e: EdgeId, from: NodeId) -> &[T] {
        if from == edge.u {
            &self.first[e]
        } else {
            &self.second[e]
        }
    }

    pub fn message_mut(&mut self, edge: Edge, e: EdgeId, from: NodeId) -> &mut [T] {
        if from == edge.u {
            &mut self.first[e]
        } else {
            &mut self.second[e]
        }
    }

    /// Entrywise sum of two reparametrizations of the same model.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.first.len() != other.first.len() {
            return Err(Error::Dimension("reparametrizations over different edge sets".into()));
        }
        let add = |a: &Vec<Vec<T>>, b: &Vec<Vec<T>>| -> Result<Vec<Vec<T>>> {
            a.iter()
                .zip(b)
                .map(|(x, y)| {
                    if x.len() != y.len() {
                        return Err(Error::Dimension("message lengths differ".into()));
                    }
                    Ok(x.iter().zip(y).map(|(&p, &q)| p + q).collect())
                })
                .collect()
        };
        Ok(Self {
            first: add(&self.first, &other.first)?,
            second: add(&self.second, &other.second)?,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.first
            .iter()
            .chain(&self.second)
            .all(|m| m.iter().all(|x| x.is_finite()))
    }

    pub(crate) fn check<M: Cost>(&self, model: &GraphicalModel<M>) -> Result<()> {
        if self.first.len() != model.edge_count() || self.second.len() != model.edge_count() {
            return Err(Error::Dimension(format!(
                "reparametrization over {} edges for a model with {}",
                self.first.len(),
                model.edge_count()
            )));
        }
        for (e, edge) in model.edges().iter().enumerate() {
            if self.first[e].len() != model.label_count(edge.u)
                || self.second[e].len() != model.label_count(edge.v)
            {
                return Err(Error::Dimension(format!("messages of edge {e}")));
            }
        }
        if !self.is_finite() {
            return Err(Error::Dimension("reparametrization has non-finite entries".into()));
        }
        Ok(())
    }
}
