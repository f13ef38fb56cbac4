//! Socio-network measures over a line graph.
//!
//! Every per-node result is a `Vec<f64>` indexed like [`LineGraph::nets`].
//! Parallel kernels reduce partial results in node-index order, so output is
//! bit-identical for any thread count.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{topological_sort, Digraph, LineGraph, Net};

/// Sources handled per parallel batch in the all-pairs kernels.
const SOURCE_BATCH: usize = 64;

pub const EVC_DEGENERATE_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegreeMode {
    /// (in-degree + out-degree) / (N - 1).
    #[default]
    Normalized,
    /// Row sum of the adjacency matrix over the total number of arcs.
    RowSum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetweennessMode {
    /// Each pair contributes the share of its shortest paths through the node.
    #[default]
    Fractional,
    /// Each pair contributes 1 if any of its shortest paths crosses the node.
    Indicator,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PageRankParams {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PageRankParams {
    fn default() -> Self {
        PageRankParams {
            damping: 0.85,
            tol: 1e-10,
            max_iter: 1000,
        }
    }
}

pub fn degree_centrality(g: &LineGraph, mode: DegreeMode) -> Vec<f64> {
    let n = g.len();
    match mode {
        DegreeMode::Normalized => {
            if n <= 1 {
                return vec![0.0; n];
            }
            let denom = (n - 1) as f64;
            (0..n)
                .map(|i| (g.successors(i).len() + g.predecessors(i).len()) as f64 / denom)
                .collect()
        }
        DegreeMode::RowSum => {
            let arcs = g.arc_count();
            if arcs == 0 {
                return vec![0.0; n];
            }
            (0..n).map(|i| g.successors(i).len() as f64 / arcs as f64).collect()
        }
    }
}

/// Breadth-first distances from `source`, following predecessors when `reverse`.
fn bfs_distances(g: &LineGraph, source: usize, reverse: bool) -> Vec<u32> {
    let mut dist = vec![u32::MAX; g.len()];
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        let next = if reverse { g.predecessors(v) } else { g.successors(v) };
        for &w in next {
            if dist[w] == u32::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Closeness over incoming distances, scaled by the reachable fraction.
///
/// With `r` nodes able to reach `i` at total distance `s`,
/// `CC_i = (r / (N - 1)) * (r / s)`, and 0 when nothing reaches `i`.
pub fn closeness_centrality(g: &LineGraph) -> Vec<f64> {
    let n = g.len();
    if n <= 1 {
        return vec![0.0; n];
    }
    (0..n)
        .into_par_iter()
        .map(|i| {
            let dist = bfs_distances(g, i, true);
            let (mut r, mut total) = (0u64, 0u64);
            for (j, &d) in dist.iter().enumerate() {
                if j != i && d != u32::MAX {
                    r += 1;
                    total += d as u64;
                }
            }
            if r == 0 {
                0.0
            } else {
                let r = r as f64;
                (r / (n - 1) as f64) * (r / total as f64)
            }
        })
        .collect()
}

/// Betweenness normalized by `N (N - 1)`; all zeros below two nodes.
pub fn betweenness_centrality(g: &LineGraph, mode: BetweennessMode) -> Vec<f64> {
    let n = g.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let mut bc = vec![0.0; n];
    let sources: Vec<usize> = (0..n).collect();
    for batch in sources.chunks(SOURCE_BATCH) {
        let partials: Vec<Vec<f64>> = batch
            .par_iter()
            .map(|&s| match mode {
                BetweennessMode::Fractional => brandes_dependencies(g, s),
                BetweennessMode::Indicator => indicator_counts(g, s),
            })
            .collect();
        for part in partials {
            for (acc, v) in bc.iter_mut().zip(part) {
                *acc += v;
            }
        }
    }
    let norm = (n * (n - 1)) as f64;
    bc.iter_mut().for_each(|v| *v /= norm);
    bc
}

/// Single-source dependency accumulation on an unweighted digraph.
fn brandes_dependencies(g: &LineGraph, s: usize) -> Vec<f64> {
    let n = g.len();
    let mut order = Vec::with_capacity(n);
    let mut sigma = vec![0f64; n];
    let mut dist = vec![u32::MAX; n];
    sigma[s] = 1.0;
    dist[s] = 0;
    let mut queue = VecDeque::from([s]);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &w in g.successors(v) {
            if dist[w] == u32::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
            if dist[w] == dist[v] + 1 {
                sigma[w] += sigma[v];
            }
        }
    }
    let mut delta = vec![0f64; n];
    for &w in order.iter().rev() {
        for &v in g.predecessors(w) {
            if dist[v] != u32::MAX && dist[v] + 1 == dist[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
        }
    }
    delta[s] = 0.0;
    delta
}

/// For source `s`, counts targets `k` such that node `i` lies on at least
/// one shortest `s -> k` path.
fn indicator_counts(g: &LineGraph, s: usize) -> Vec<f64> {
    let n = g.len();
    let words = n.div_ceil(64);
    let dist = bfs_distances(g, s, false);
    let mut order: Vec<usize> = (0..n).filter(|&v| dist[v] != u32::MAX).collect();
    order.sort_by_key(|&v| dist[v]);
    let mut below = vec![0u64; n * words];
    let mut counts = vec![0f64; n];
    for &v in order.iter().rev() {
        below[v * words + v / 64] |= 1 << (v % 64);
        for &w in g.successors(v) {
            if dist[w] != u32::MAX && dist[w] == dist[v] + 1 {
                for k in 0..words {
                    let bits = below[w * words + k];
                    below[v * words + k] |= bits;
                }
            }
        }
        if v != s {
            let reach: u32 = below[v * words..(v + 1) * words].iter().map(|w| w.count_ones()).sum();
            counts[v] = (reach - 1) as f64;
        }
    }
    counts
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenvectorCentrality {
    pub values: Vec<f64>,
    /// Estimate of the spectral radius of the adjacency matrix.
    pub eigenvalue: f64,
    /// Spectral radius below [`EVC_DEGENERATE_EPS`]: the values carry no ranking signal.
    pub degenerate: bool,
}

/// Perron eigenvector of the transposed adjacency (scores flow along arcs),
/// L2-normalized with non-negative entries.
///
/// Acyclic graphs have a nilpotent adjacency matrix; they are reported as
/// degenerate with all-zero scores.
pub fn eigenvector_centrality(g: &LineGraph) -> EigenvectorCentrality {
    let n = g.len();
    if n == 0 || topological_sort(g).is_some() {
        return EigenvectorCentrality {
            values: vec![0.0; n],
            eigenvalue: 0.0,
            degenerate: true,
        };
    }
    // Power iteration on (A^T + I): same eigenvectors, and the shift makes
    // the Perron root strictly dominant even for periodic graphs.
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    for _ in 0..20_000 {
        let mut next: Vec<f64> = (0..n)
            .map(|i| x[i] + g.predecessors(i).iter().map(|&j| x[j]).sum::<f64>())
            .collect();
        let norm = next.iter().map(|v| v * v).sum::<f64>().sqrt();
        next.iter_mut().for_each(|v| *v /= norm);
        let change = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        x = next;
        if change < 1e-14 {
            break;
        }
    }
    let eigenvalue = (0..n)
        .map(|i| g.predecessors(i).iter().map(|&j| x[j]).sum::<f64>().powi(2))
        .sum::<f64>()
        .sqrt();
    EigenvectorCentrality {
        values: x,
        eigenvalue,
        degenerate: eigenvalue < EVC_DEGENERATE_EPS,
    }
}

/// One PageRank update with uniform teleport and uniform redistribution of
/// dangling mass.
pub fn pagerank_step(g: &LineGraph, damping: f64, x: &[f64]) -> Vec<f64> {
    let n = g.len();
    let nf = n as f64;
    let dangling: f64 = (0..n).filter(|&j| g.successors(j).is_empty()).map(|j| x[j]).sum();
    let base = (1.0 - damping) / nf + damping * dangling / nf;
    (0..n)
        .map(|i| {
            let inflow: f64 = g
                .predecessors(i)
                .iter()
                .map(|&j| x[j] / g.successors(j).len() as f64)
                .sum();
            base + damping * inflow
        })
        .collect()
}

/// Power-iteration PageRank; converged once the L1 change drops below `tol`.
pub fn pagerank(g: &LineGraph, params: PageRankParams) -> Result<Vec<f64>> {
    let n = g.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if !(params.damping > 0.0 && params.damping < 1.0) {
        return Err(Error::Config(format!("damping must lie in (0, 1), got {}", params.damping)));
    }
    let mut x = vec![1.0 / n as f64; n];
    let mut residual = f64::INFINITY;
    for _ in 0..params.max_iter {
        let next = pagerank_step(g, params.damping, &x);
        residual = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        x = next;
        if residual < params.tol {
            return Ok(x);
        }
    }
    Err(Error::NoConvergence {
        iterations: params.max_iter,
        residual,
    })
}

/// Nodes of the maximal subgraph whose total (in + out) degree is at least `k`.
pub fn k_core(g: &LineGraph, k: usize) -> Vec<usize> {
    let n = g.len();
    let mut degree: Vec<usize> = (0..n)
        .map(|v| g.successors(v).len() + g.predecessors(v).len())
        .collect();
    let mut removed = vec![false; n];
    let mut stack: Vec<usize> = (0..n).filter(|&v| degree[v] < k).collect();
    for &v in &stack {
        removed[v] = true;
    }
    while let Some(v) = stack.pop() {
        for &w in g.successors(v).iter().chain(g.predecessors(v)) {
            if !removed[w] {
                degree[w] -= 1;
                if degree[w] < k {
                    removed[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    (0..n).filter(|&v| !removed[v]).collect()
}

/// Directed density `|arcs| / (N (N - 1))`.
pub fn density(g: &LineGraph) -> f64 {
    let n = g.len();
    if n <= 1 {
        0.0
    } else {
        g.arc_count() as f64 / (n * (n - 1)) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Subnetwork {
    /// Node indices into the ranked graph, ascending.
    pub nodes: Vec<usize>,
    pub density: f64,
}

/// Weakly connected components of the 1-core, least dense first.
pub fn rank_subnetworks(g: &LineGraph) -> Vec<Subnetwork> {
    let core = k_core(g, 1);
    let mut in_core = vec![false; g.len()];
    core.iter().for_each(|&v| in_core[v] = true);
    let mut comp = vec![usize::MAX; g.len()];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &start in &core {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = groups.len();
        let mut members = vec![start];
        comp[start] = id;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for &w in g.successors(v).iter().chain(g.predecessors(v)) {
                if in_core[w] && comp[w] == usize::MAX {
                    comp[w] = id;
                    members.push(w);
                    stack.push(w);
                }
            }
        }
        members.sort_unstable();
        groups.push(members);
    }
    let mut ranked: Vec<Subnetwork> = groups
        .into_iter()
        .map(|nodes| {
            let density = density(&g.induced(&nodes));
            Subnetwork { nodes, density }
        })
        .collect();
    ranked.sort_by(|a, b| {
        a.density
            .total_cmp(&b.density)
            .then_with(|| min_label(g, &a.nodes).cmp(&min_label(g, &b.nodes)))
    });
    ranked
}

fn min_label(g: &LineGraph, nodes: &[usize]) -> u32 {
    nodes.iter().map(|&v| g.net(v).label).min().unwrap_or(u32::MAX)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricOptions {
    pub degree: DegreeMode,
    pub betweenness: BetweennessMode,
    pub pagerank: PageRankParams,
}

/// Per-net metric table for one line graph.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeMetrics {
    pub nets: Vec<Net>,
    pub degree: Vec<f64>,
    pub closeness: Vec<f64>,
    pub betweenness: Vec<f64>,
    pub eigenvector: Vec<f64>,
    pub pagerank: Vec<f64>,
    pub evc_eigenvalue: f64,
    pub evc_degenerate: bool,
}

impl NodeMetrics {
    pub fn compute(g: &LineGraph, opts: &MetricOptions) -> Result<Self> {
        let evc = eigenvector_centrality(g);
        Ok(NodeMetrics {
            nets: g.nets().to_vec(),
            degree: degree_centrality(g, opts.degree),
            closeness: closeness_centrality(g),
            betweenness: betweenness_centrality(g, opts.betweenness),
            pagerank: pagerank(g, opts.pagerank)?,
            eigenvector: evc.values,
            evc_eigenvalue: evc.eigenvalue,
            evc_degenerate: evc.degenerate,
        })
    }

    pub fn len(&self) -> usize {
        self.nets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nets.is_empty()
    }
}
