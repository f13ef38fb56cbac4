//! Shared generators and brute-force oracles for the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use htlocate::graph::Digraph;
use htlocate::{Gate, GateFunction, LineGraph, Netlist};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

pub fn benchmark(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../benchmarks").join(name)
}

pub fn load(name: &str) -> Netlist {
    htlocate::parse_bench(&std::fs::read_to_string(benchmark(name)).unwrap()).unwrap()
}

pub fn c17() -> Netlist {
    load("c17_renumbered.bench")
}

/// Random DAG on `n` nodes: arcs only go from lower to higher rank, and the
/// ranks are a random permutation so node order is not topological.
pub fn dag_strategy(max_nodes: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (1..=max_nodes)
        .prop_flat_map(|n| {
            let pairs = n * (n - 1) / 2;
            (
                Just(n),
                proptest::collection::vec(any::<bool>(), pairs),
                Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
            )
        })
        .prop_map(|(n, keep, perm)| {
            let mut arcs = Vec::new();
            let mut k = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if keep[k] {
                        arcs.push((perm[i], perm[j]));
                    }
                    k += 1;
                }
            }
            (n, arcs)
        })
}

/// Random digraph that may contain cycles (no self loops).
pub fn digraph_strategy(max_nodes: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (2..=max_nodes)
        .prop_flat_map(|n| (Just(n), proptest::collection::vec(any::<bool>(), n * (n - 1))))
        .prop_map(|(n, keep)| {
            let arcs = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .zip(keep)
                .filter_map(|(a, k)| k.then_some(a))
                .collect();
            (n, arcs)
        })
}

const FUNCS: [GateFunction; 8] = [
    GateFunction::And,
    GateFunction::Nand,
    GateFunction::Or,
    GateFunction::Nor,
    GateFunction::Xor,
    GateFunction::Xnor,
    GateFunction::Not,
    GateFunction::Buf,
];

/// Random valid netlist with up to `max_inputs` inputs and `max_gates` gates.
pub fn netlist_strategy(max_inputs: usize, max_gates: usize) -> impl Strategy<Value = Netlist> {
    (1..=max_inputs, 1..=max_gates)
        .prop_flat_map(|(ni, ng)| {
            let gates = proptest::collection::vec(
                (0..FUNCS.len(), proptest::collection::vec(any::<prop::sample::Index>(), 1..=4)),
                ng,
            );
            (Just(ni), gates, proptest::collection::vec(any::<prop::sample::Index>(), 1..=3))
        })
        .prop_map(|(ni, gates, outs)| {
            let inputs: Vec<String> = (0..ni).map(|i| format!("i{i}")).collect();
            let mut nets = inputs.clone();
            let mut built = Vec::new();
            for (g, (f, picks)) in gates.into_iter().enumerate() {
                let function = FUNCS[f];
                let arity = if function.is_unary() { 1 } else { picks.len() };
                let fanins = picks[..arity].iter().map(|p| p.get(&nets).clone()).collect();
                let id = format!("g{g}");
                built.push(Gate::new(id.clone(), function, fanins));
                nets.push(id);
            }
            let mut outputs: Vec<String> = Vec::new();
            for p in outs {
                let o = p.get(&nets);
                if !outputs.contains(o) {
                    outputs.push(o.clone());
                }
            }
            Netlist::new("rand", inputs, outputs, built).unwrap()
        })
}

fn dense(g: &LineGraph) -> Vec<Vec<bool>> {
    g.adjacency()
}

/// All-pairs shortest path lengths by Floyd-Warshall (`None` = unreachable).
pub fn floyd_warshall(g: &LineGraph) -> Vec<Vec<Option<usize>>> {
    let n = g.len();
    let a = dense(g);
    let mut d = vec![vec![None; n]; n];
    for i in 0..n {
        d[i][i] = Some(0);
        for j in 0..n {
            if a[i][j] {
                d[i][j] = Some(1);
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(x), Some(y)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|c| x + y < c) {
                        d[i][j] = Some(x + y);
                    }
                }
            }
        }
    }
    d
}

pub fn degree_oracle(g: &LineGraph) -> Vec<f64> {
    let n = g.len();
    let a = dense(g);
    (0..n)
        .map(|i| {
            if n < 2 {
                return 0.0;
            }
            let deg = (0..n).filter(|&j| a[i][j]).count() + (0..n).filter(|&j| a[j][i]).count();
            deg as f64 / (n - 1) as f64
        })
        .collect()
}

/// Incoming closeness scaled by the fraction of nodes that reach `i`.
pub fn closeness_oracle(g: &LineGraph) -> Vec<f64> {
    let n = g.len();
    let d = floyd_warshall(g);
    (0..n)
        .map(|i| {
            let dists: Vec<usize> = (0..n).filter(|&j| j != i).filter_map(|j| d[j][i]).collect();
            let total: usize = dists.iter().sum();
            if total == 0 || n < 2 {
                0.0
            } else {
                let r = dists.len() as f64;
                (r / (n - 1) as f64) * (r / total as f64)
            }
        })
        .collect()
}

/// Every shortest `s -> t` path, listed explicitly.
fn shortest_paths(a: &[Vec<bool>], d: &[Vec<Option<usize>>], s: usize, t: usize) -> Vec<Vec<usize>> {
    let Some(len) = d[s][t] else { return Vec::new() };
    let mut out = Vec::new();
    let mut path = vec![s];
    fn walk(a: &[Vec<bool>], t: usize, len: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let v = *path.last().unwrap();
        if path.len() - 1 == len {
            if v == t {
                out.push(path.clone());
            }
            return;
        }
        for w in 0..a.len() {
            if a[v][w] && !path.contains(&w) {
                path.push(w);
                walk(a, t, len, path, out);
                path.pop();
            }
        }
    }
    walk(a, t, len, &mut path, &mut out);
    out
}

/// Betweenness by explicit path enumeration, normalized by `N (N - 1)`.
/// `indicator` counts a pair once if any of its shortest paths crosses the node.
pub fn betweenness_oracle(g: &LineGraph, indicator: bool) -> Vec<f64> {
    let n = g.len();
    let a = dense(g);
    let d = floyd_warshall(g);
    let mut bc = vec![0.0; n];
    for s in 0..n {
        for t in 0..n {
            if s == t {
                continue;
            }
            let paths = shortest_paths(&a, &d, s, t);
            if paths.is_empty() {
                continue;
            }
            for v in 0..n {
                if v == s || v == t {
                    continue;
                }
                let through = paths.iter().filter(|p| p.contains(&v)).count();
                if indicator {
                    bc[v] += f64::from(u8::from(through > 0));
                } else {
                    bc[v] += through as f64 / paths.len() as f64;
                }
            }
        }
    }
    if n >= 2 {
        bc.iter_mut().for_each(|v| *v /= (n * (n - 1)) as f64);
    }
    bc
}

/// PageRank as the solution of `(I - d S) x = (1 - d) / N`, with dangling
/// columns of `S` spread uniformly.
pub fn pagerank_oracle(g: &LineGraph, damping: f64) -> Vec<f64> {
    let n = g.len();
    let a = dense(g);
    let mut s = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let out = a[j].iter().filter(|&&x| x).count();
        for i in 0..n {
            s[(i, j)] = if out == 0 {
                1.0 / n as f64
            } else if a[j][i] {
                1.0 / out as f64
            } else {
                0.0
            };
        }
    }
    let m = DMatrix::<f64>::identity(n, n) - s * damping;
    let b = DVector::<f64>::from_element(n, (1.0 - damping) / n as f64);
    let x = m.lu().solve(&b).expect("I - dS is nonsingular");
    x.iter().copied().collect()
}

fn adjacency_matrix(g: &LineGraph) -> DMatrix<f64> {
    let a = dense(g);
    DMatrix::<f64>::from_fn(g.len(), g.len(), |i, j| f64::from(u8::from(a[i][j])))
}

/// Spectral radius of the adjacency matrix from its dense eigenvalues.
///
/// The QR iteration stalls on permutation-like matrices, so the eigenvalues
/// are taken from `A + sI` and shifted back.
pub fn spectral_radius(g: &LineGraph) -> f64 {
    let shift = 0.5;
    let m = adjacency_matrix(g) + DMatrix::<f64>::identity(g.len(), g.len()) * shift;
    let schur = nalgebra::Schur::try_new(m, 1e-13, 100_000).expect("Schur decomposition converges");
    schur
        .complex_eigenvalues()
        .iter()
        .map(|c| (c - shift).norm())
        .fold(0.0, f64::max)
}

/// Whether `A^N = 0`, i.e. every eigenvalue of the adjacency matrix is zero.
pub fn nilpotent(g: &LineGraph) -> bool {
    let m = adjacency_matrix(g);
    let mut p = DMatrix::<f64>::identity(g.len(), g.len());
    for _ in 0..g.len() {
        p = &p * &m;
    }
    p.iter().all(|&x| x == 0.0)
}

/// Unit non-negative null vector of `A^T - rho I` (the Perron vector on a
/// strongly connected graph), via SVD.
pub fn perron_oracle(g: &LineGraph) -> Vec<f64> {
    let n = g.len();
    let a = dense(g);
    let rho = spectral_radius(g);
    let m = DMatrix::<f64>::from_fn(n, n, |i, j| f64::from(u8::from(a[j][i])) - if i == j { rho } else { 0.0 });
    let svd = m.svd(false, true);
    let vt = svd.v_t.unwrap();
    let k = (0..n)
        .min_by(|&x, &y| svd.singular_values[x].total_cmp(&svd.singular_values[y]))
        .unwrap();
    let mut v: Vec<f64> = vt.row(k).iter().copied().collect();
    if v.iter().sum::<f64>() < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / norm).collect()
}

pub fn strongly_connected(g: &LineGraph) -> bool {
    let d = floyd_warshall(g);
    d.iter().all(|row| row.iter().all(Option::is_some))
}

/// Largest node set whose induced total degree is at least `k` everywhere,
/// by exhaustive search over subsets.
pub fn k_core_oracle(g: &LineGraph, k: usize) -> Vec<usize> {
    let n = g.len();
    assert!(n <= 16);
    let a = dense(g);
    let mut best: u32 = 0;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() <= best.count_ones() {
            continue;
        }
        let ok = (0..n).filter(|&v| mask >> v & 1 == 1).all(|v| {
            let deg = (0..n)
                .filter(|&w| mask >> w & 1 == 1)
                .map(|w| usize::from(a[v][w]) + usize::from(a[w][v]))
                .sum::<usize>();
            deg >= k
        });
        if ok {
            best = mask;
        }
    }
    (0..n).filter(|&v| best >> v & 1 == 1).collect()
}

pub fn density_oracle(n: usize, arcs: usize) -> f64 {
    if n < 2 {
        0.0
    } else {
        arcs as f64 / (n * n - n) as f64
    }
}

/// `r[a][b]`: a path of length at least one leads from `a` to `b`. Computed
/// by extending the arc relation until it stops growing.
pub fn closure(g: &impl Digraph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut r = vec![vec![false; n]; n];
    for (v, row) in r.iter_mut().enumerate() {
        for &w in g.successors(v) {
            row[w] = true;
        }
    }
    loop {
        let mut changed = false;
        for i in 0..n {
            for k in 0..n {
                if r[i][k] {
                    for j in 0..n {
                        if r[k][j] && !r[i][j] {
                            r[i][j] = true;
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            return r;
        }
    }
}

pub fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}
