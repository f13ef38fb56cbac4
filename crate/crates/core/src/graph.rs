//! Circuit DAG and its edge-labeled line graph.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netlist::Netlist;

/// Minimal read-only view of a directed graph over dense node indices.
pub trait Digraph {
    fn node_count(&self) -> usize;
    fn successors(&self, node: usize) -> &[usize];
    fn predecessors(&self, node: usize) -> &[usize];
    /// Resolves a node identifier to its index.
    fn lookup(&self, key: &str) -> Option<usize>;

    fn arc_count(&self) -> usize {
        (0..self.node_count()).map(|n| self.successors(n).len()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum VertexKind {
    Pi,
    Gate,
    Po,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub id: String,
    pub kind: VertexKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub label: u32,
}

/// Identifier of the sink vertex standing for primary output `net`.
pub fn po_vertex_id(net: &str) -> String {
    format!("PO:{net}")
}

/// Node-labeled circuit graph with incrementally labeled edges.
#[derive(Debug, Clone)]
pub struct CircuitDag {
    name: String,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    index: HashMap<String, usize>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
    out_edges: Vec<Vec<usize>>,
}

impl CircuitDag {
    fn assemble(name: String, vertices: Vec<Vertex>, edges: Vec<Edge>) -> Self {
        let n = vertices.len();
        let mut succ = vec![Vec::new(); n];
        let mut pred = vec![Vec::new(); n];
        let mut out_edges = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            succ[e.src].push(e.dst);
            pred[e.dst].push(e.src);
            out_edges[e.src].push(i);
        }
        let index = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.id.clone(), i))
            .collect();
        CircuitDag {
            name,
            vertices,
            edges,
            index,
            succ,
            pred,
            out_edges,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex(&self, idx: usize) -> &Vertex {
        &self.vertices[idx]
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Indices into [`edges`](Self::edges) leaving `vertex`.
    pub fn out_edges(&self, vertex: usize) -> &[usize] {
        &self.out_edges[vertex]
    }

    pub fn has_edge(&self, src: usize, dst: usize) -> bool {
        self.succ[src].contains(&dst)
    }

    pub fn degree(&self, vertex: usize) -> usize {
        self.succ[vertex].len() + self.pred[vertex].len()
    }

    /// Longest-path depth of every vertex measured from the sources.
    pub fn levels(&self) -> Vec<usize> {
        let mut level = vec![0usize; self.vertices.len()];
        for v in topological_sort(self).expect("circuit graphs are acyclic") {
            for &s in &self.succ[v] {
                level[s] = level[s].max(level[v] + 1);
            }
        }
        level
    }
}

impl Digraph for CircuitDag {
    fn node_count(&self) -> usize {
        self.vertices.len()
    }

    fn successors(&self, node: usize) -> &[usize] {
        &self.succ[node]
    }

    fn predecessors(&self, node: usize) -> &[usize] {
        &self.pred[node]
    }

    fn lookup(&self, key: &str) -> Option<usize> {
        self.vertex_index(key)
    }
}

/// Builds the node-labeled DAG of a netlist.
///
/// Edge labels run from 1 upward: first every edge leaving a primary input
/// (input order, then reader order), then every gate-to-gate edge (driver in
/// declaration order, then reader order), then one edge per primary output.
pub fn build_dag(netlist: &Netlist) -> CircuitDag {
    let mut vertices = Vec::with_capacity(netlist.inputs().len() + netlist.gates().len() + netlist.outputs().len());
    let mut index: HashMap<&str, usize> = HashMap::new();
    for input in netlist.inputs() {
        index.insert(input, vertices.len());
        vertices.push(Vertex {
            id: input.clone(),
            kind: VertexKind::Pi,
        });
    }
    for gate in netlist.gates() {
        index.insert(&gate.id, vertices.len());
        vertices.push(Vertex {
            id: gate.id.clone(),
            kind: VertexKind::Gate,
        });
    }

    // readers[v] = gate vertices consuming v, in declaration and fanin order
    let mut readers: Vec<Vec<usize>> = vec![Vec::new(); vertices.len()];
    for gate in netlist.gates() {
        let dst = index[gate.id.as_str()];
        for fanin in &gate.fanins {
            readers[index[fanin.as_str()]].push(dst);
        }
    }

    let mut edges = Vec::new();
    let push = |src: usize, dst: usize, edges: &mut Vec<Edge>| {
        let label = edges.len() as u32 + 1;
        edges.push(Edge { src, dst, label });
    };
    for (src, reads) in readers.iter().enumerate() {
        for &dst in reads {
            push(src, dst, &mut edges);
        }
    }
    for output in netlist.outputs() {
        let src = index[output.as_str()];
        let po = vertices.len();
        vertices.push(Vertex {
            id: po_vertex_id(output),
            kind: VertexKind::Po,
        });
        push(src, po, &mut edges);
    }
    CircuitDag::assemble(netlist.name().to_string(), vertices, edges)
}

/// Drops primary input and output vertices with their incident edges.
///
/// Surviving edges keep their original labels.
pub fn prune_periphery(dag: &CircuitDag) -> CircuitDag {
    let mut remap = vec![usize::MAX; dag.vertices.len()];
    let mut vertices = Vec::new();
    for (i, v) in dag.vertices.iter().enumerate() {
        if v.kind == VertexKind::Gate {
            remap[i] = vertices.len();
            vertices.push(v.clone());
        }
    }
    let edges = dag
        .edges
        .iter()
        .filter(|e| remap[e.src] != usize::MAX && remap[e.dst] != usize::MAX)
        .map(|e| Edge {
            src: remap[e.src],
            dst: remap[e.dst],
            label: e.label,
        })
        .collect();
    CircuitDag::assemble(dag.name.clone(), vertices, edges)
}

/// A net of the circuit graph, i.e. one node of the line graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Net {
    pub src: String,
    pub dst: String,
    pub label: u32,
}

impl Net {
    pub fn new(src: impl Into<String>, dst: impl Into<String>, label: u32) -> Self {
        Net {
            src: src.into(),
            dst: dst.into(),
            label,
        }
    }

    /// `src->dst`, the label-free identity of the net.
    pub fn pair(&self) -> String {
        format!("{}->{}", self.src, self.dst)
    }

    pub fn same_pair(&self, other: &Net) -> bool {
        self.src == other.src && self.dst == other.dst
    }

    /// Parses `src->dst` or `src->dst#label`; a missing label becomes 0.
    pub fn parse(text: &str) -> Option<Net> {
        let (pair, label) = match text.split_once('#') {
            Some((pair, label)) => (pair, label.trim().parse().ok()?),
            None => (text, 0),
        };
        let (src, dst) = pair.split_once("->")?;
        let (src, dst) = (src.trim(), dst.trim());
        if src.is_empty() || dst.is_empty() {
            return None;
        }
        Some(Net::new(src, dst, label))
    }
}

impl fmt::Display for Net {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}#{}", self.src, self.dst, self.label)
    }
}

/// Edge-labeled graph: one node per net, an arc wherever one net feeds the
/// driver of another. Nodes are ordered by ascending edge label.
#[derive(Debug, Clone)]
pub struct LineGraph {
    name: String,
    nets: Vec<Net>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
}

impl LineGraph {
    /// Builds a graph over arbitrary nodes and arcs. Arcs are deduplicated.
    pub fn from_arcs(nets: Vec<Net>, arcs: &[(usize, usize)]) -> Self {
        let n = nets.len();
        let mut succ = vec![Vec::new(); n];
        let mut pred = vec![Vec::new(); n];
        for &(a, b) in arcs {
            assert!(a < n && b < n, "arc ({a}, {b}) out of range for {n} nodes");
            if !succ[a].contains(&b) {
                succ[a].push(b);
                pred[b].push(a);
            }
        }
        for list in succ.iter_mut().chain(pred.iter_mut()) {
            list.sort_unstable();
        }
        LineGraph {
            name: String::new(),
            nets,
            succ,
            pred,
        }
    }

    /// Unnamed nodes `n0, n1, ...` labeled `1..=n`.
    pub fn anonymous(n: usize, arcs: &[(usize, usize)]) -> Self {
        let nets = (0..n)
            .map(|i| Net::new(format!("n{i}"), format!("n{i}"), i as u32 + 1))
            .collect();
        Self::from_arcs(nets, arcs)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn nets(&self) -> &[Net] {
        &self.nets
    }

    pub fn net(&self, idx: usize) -> &Net {
        &self.nets[idx]
    }

    pub fn len(&self) -> usize {
        self.nets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nets.is_empty()
    }

    pub fn has_arc(&self, a: usize, b: usize) -> bool {
        self.succ[a].binary_search(&b).is_ok()
    }

    /// Dense boolean adjacency matrix in node order.
    pub fn adjacency(&self) -> Vec<Vec<bool>> {
        (0..self.len())
            .map(|i| (0..self.len()).map(|j| self.has_arc(i, j)).collect())
            .collect()
    }

    pub fn arcs(&self) -> Vec<(usize, usize)> {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(a, bs)| bs.iter().map(move |&b| (a, b)))
            .collect()
    }

    pub fn index_of_label(&self, label: u32) -> Option<usize> {
        self.nets.iter().position(|n| n.label == label)
    }

    pub fn index_of_pair(&self, src: &str, dst: &str) -> Option<usize> {
        self.nets.iter().position(|n| n.src == src && n.dst == dst)
    }

    /// Induced subgraph on `nodes` (kept in ascending index order).
    pub fn induced(&self, nodes: &[usize]) -> LineGraph {
        let mut keep: Vec<usize> = nodes.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let mut remap = vec![usize::MAX; self.len()];
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = new;
        }
        let arcs: Vec<(usize, usize)> = keep
            .iter()
            .flat_map(|&a| self.succ[a].iter().map(move |&b| (a, b)))
            .filter(|&(_, b)| remap[b] != usize::MAX)
            .map(|(a, b)| (remap[a], remap[b]))
            .collect();
        let mut g = LineGraph::from_arcs(keep.iter().map(|&i| self.nets[i].clone()).collect(), &arcs);
        g.name = self.name.clone();
        g
    }
}

impl Digraph for LineGraph {
    fn node_count(&self) -> usize {
        self.nets.len()
    }

    fn successors(&self, node: usize) -> &[usize] {
        &self.succ[node]
    }

    fn predecessors(&self, node: usize) -> &[usize] {
        &self.pred[node]
    }

    /// Accepts `src->dst#label`, `src->dst` or a bare label.
    fn lookup(&self, key: &str) -> Option<usize> {
        if let Ok(label) = key.trim().parse::<u32>() {
            return self.index_of_label(label);
        }
        let net = Net::parse(key)?;
        if net.label != 0 {
            self.nets.iter().position(|n| *n == net)
        } else {
            self.index_of_pair(&net.src, &net.dst)
        }
    }
}

/// Directed line graph of `dag`: arc (u,v) -> (x,y) iff v = x.
pub fn line_graph(dag: &CircuitDag) -> LineGraph {
    let mut order: Vec<usize> = (0..dag.edges.len()).collect();
    order.sort_by_key(|&i| dag.edges[i].label);
    let mut node_of_edge = vec![0usize; dag.edges.len()];
    for (node, &e) in order.iter().enumerate() {
        node_of_edge[e] = node;
    }
    let nets = order
        .iter()
        .map(|&e| {
            let edge = dag.edges[e];
            Net::new(
                dag.vertices[edge.src].id.clone(),
                dag.vertices[edge.dst].id.clone(),
                edge.label,
            )
        })
        .collect();
    let mut arcs = Vec::new();
    for (node, &e) in order.iter().enumerate() {
        let head = dag.edges[e].dst;
        for &next in &dag.out_edges[head] {
            arcs.push((node, node_of_edge[next]));
        }
    }
    let mut g = LineGraph::from_arcs(nets, &arcs);
    g.name = dag.name.clone();
    g
}

/// Kahn topological order, or `None` when the graph has a cycle.
pub fn topological_sort<G: Digraph + ?Sized>(g: &G) -> Option<Vec<usize>> {
    let n = g.node_count();
    let mut indeg: Vec<usize> = (0..n).map(|v| g.predecessors(v).len()).collect();
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &s in g.successors(v) {
            indeg[s] -= 1;
            if indeg[s] == 0 {
                queue.push_back(s);
            }
        }
    }
    (order.len() == n).then_some(order)
}

/// Whether a directed path of length at least one leads from `a` to `b`.
pub fn reaches<G: Digraph + ?Sized>(g: &G, a: usize, b: usize) -> bool {
    let mut seen = vec![false; g.node_count()];
    let mut stack: Vec<usize> = g.successors(a).to_vec();
    while let Some(v) = stack.pop() {
        if v == b {
            return true;
        }
        if !std::mem::replace(&mut seen[v], true) {
            stack.extend_from_slice(g.successors(v));
        }
    }
    false
}

fn resolve<G: Digraph + ?Sized>(g: &G, key: &str) -> Result<usize> {
    g.lookup(key).ok_or_else(|| Error::UnknownVertex(key.to_string()))
}

/// [`reaches`] keyed by node identifiers.
pub fn is_reachable<G: Digraph + ?Sized>(g: &G, a: &str, b: &str) -> Result<bool> {
    let (a, b) = (resolve(g, a)?, resolve(g, b)?);
    Ok(reaches(g, a, b))
}

/// Whether adding the edge `u -> v` would close a cycle.
pub fn creates_cycle(g: &CircuitDag, u: &str, v: &str) -> Result<bool> {
    let (u, v) = (resolve(g, u)?, resolve(g, v)?);
    Ok(u == v || reaches(g, v, u))
}
