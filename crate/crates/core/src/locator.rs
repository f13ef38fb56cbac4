//! Trigger and payload localization.
//!
//! Influential nets (highest degree) are set aside, the survivors are scored
//! by a weighted sum of normalized degree and closeness, and the lowest
//! scores become trigger candidates. The payload is the non-trigger net with
//! the best combined rank over betweenness, PageRank and (when meaningful)
//! eigenvector centrality.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graph::{build_dag, line_graph, prune_periphery, Digraph, LineGraph, Net};
use crate::metrics::{MetricOptions, NodeMetrics};
use crate::netlist::Netlist;

/// Relative slack under which two metric values count as tied.
const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum InfluentialFilter {
    /// Drop every net sharing the maximum degree centrality.
    MaxDegree,
    /// Drop nets whose degree and closeness are both at or above the
    /// `q`-quantile while betweenness is at or below the `(1 - q)`-quantile.
    Quantile { q: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocatorConfig {
    pub weight_degree: f64,
    pub weight_closeness: f64,
    pub k_triggers: usize,
    pub include_evc_when_degenerate: bool,
    pub influential_filter: InfluentialFilter,
    pub metrics: MetricOptions,
}

impl Default for LocatorConfig {
    fn default() -> Self {
        LocatorConfig {
            weight_degree: 0.5,
            weight_closeness: 0.5,
            k_triggers: 4,
            include_evc_when_degenerate: false,
            influential_filter: InfluentialFilter::MaxDegree,
            metrics: MetricOptions::default(),
        }
    }
}

impl LocatorConfig {
    pub fn with_k(mut self, k: usize) -> Self {
        self.k_triggers = k;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_triggers == 0 {
            return Err(Error::Config("k_triggers must be at least 1".into()));
        }
        let d = self.metrics.pagerank.damping;
        if !(d > 0.0 && d < 1.0) {
            return Err(Error::Config(format!("damping must lie in (0, 1), got {d}")));
        }
        for (name, w) in [("weight_degree", self.weight_degree), ("weight_closeness", self.weight_closeness)] {
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {w}")));
            }
        }
        if let InfluentialFilter::Quantile { q } = self.influential_filter {
            if !(q > 0.0 && q <= 1.0) {
                return Err(Error::Config(format!("quantile must lie in (0, 1], got {q}")));
            }
        }
        Ok(())
    }

    /// Non-fatal configuration issues.
    pub fn warnings(&self) -> Vec<String> {
        let sum = self.weight_degree + self.weight_closeness;
        if (sum - 1.0).abs() > 1e-9 {
            vec![format!("trigger weights sum to {sum}, not 1")]
        } else {
            Vec::new()
        }
    }
}

/// Nearest-rank quantile of `values`.
fn quantile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

/// Nodes set aside as influential before trigger scoring.
///
/// Nothing is removed when every node shares the same degree or when fewer
/// than `k_triggers + 1` nodes would remain.
pub fn filter_influential(metrics: &NodeMetrics, cfg: &LocatorConfig) -> Vec<usize> {
    let n = metrics.len();
    if n < 2 {
        return Vec::new();
    }
    let c = &metrics.degree;
    let max = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = c.iter().copied().fold(f64::INFINITY, f64::min);
    if max <= min {
        return Vec::new();
    }
    let removed: Vec<usize> = match cfg.influential_filter {
        InfluentialFilter::MaxDegree => (0..n).filter(|&i| c[i] == max).collect(),
        InfluentialFilter::Quantile { q } => {
            let c_cut = quantile(c, q);
            let cc_cut = quantile(&metrics.closeness, q);
            let bc_cut = quantile(&metrics.betweenness, 1.0 - q);
            (0..n)
                .filter(|&i| c[i] >= c_cut && metrics.closeness[i] >= cc_cut && metrics.betweenness[i] <= bc_cut)
                .collect()
        }
    };
    if n - removed.len() < cfg.k_triggers + 1 {
        Vec::new()
    } else {
        removed
    }
}

/// `F = W_C * C / C_max + W_CC * CC / CC_max` over `survivors`, maxima taken
/// over the survivors; a term whose maximum is zero contributes nothing.
pub fn trigger_score(metrics: &NodeMetrics, cfg: &LocatorConfig, survivors: &[usize]) -> Vec<(usize, f64)> {
    let c_max = survivors.iter().map(|&i| metrics.degree[i]).fold(0.0, f64::max);
    let cc_max = survivors.iter().map(|&i| metrics.closeness[i]).fold(0.0, f64::max);
    let term = |w: f64, v: f64, max: f64| if max > 0.0 { w * v / max } else { 0.0 };
    survivors
        .iter()
        .map(|&i| {
            let f = term(cfg.weight_degree, metrics.degree[i], c_max)
                + term(cfg.weight_closeness, metrics.closeness[i], cc_max);
            (i, f)
        })
        .collect()
}

/// The `k` lowest-scoring nodes, ascending by score then edge label.
pub fn select_triggers(scores: &[(usize, f64)], k: usize, nets: &[Net]) -> Vec<(usize, f64)> {
    let mut ranked = scores.to_vec();
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| nets[a.0].label.cmp(&nets[b.0].label)));
    ranked.truncate(k);
    ranked
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PayloadCandidate {
    pub node: usize,
    pub rank_sum: usize,
    pub betweenness_rank: usize,
    pub pagerank_rank: usize,
    pub eigenvector_rank: Option<usize>,
    pub reachable_from_trigger: bool,
}

/// 1-based competition rank in descending order (ties share the best rank).
fn descending_ranks(values: &[f64]) -> Vec<usize> {
    values
        .iter()
        .map(|&v| {
            let slack = TIE_EPS * v.abs().max(1.0);
            1 + values.iter().filter(|&&w| w > v + slack).count()
        })
        .collect()
}

fn reachable_from(g: &LineGraph, sources: &[usize]) -> Vec<bool> {
    let mut seen = vec![false; g.len()];
    let mut queue: VecDeque<usize> = sources.iter().flat_map(|&s| g.successors(s).iter().copied()).collect();
    while let Some(v) = queue.pop_front() {
        if !std::mem::replace(&mut seen[v], true) {
            queue.extend(g.successors(v));
        }
    }
    seen
}

/// All non-trigger nodes ordered best payload first: lowest rank sum, then
/// reachable from a trigger, then edge label.
pub fn rank_payload_candidates(
    metrics: &NodeMetrics,
    triggers: &[usize],
    g: &LineGraph,
    cfg: &LocatorConfig,
) -> Vec<PayloadCandidate> {
    let candidates: Vec<usize> = (0..metrics.len()).filter(|i| !triggers.contains(i)).collect();
    let pick = |v: &[f64]| candidates.iter().map(|&i| v[i]).collect::<Vec<_>>();
    let bc = descending_ranks(&pick(&metrics.betweenness));
    let pr = descending_ranks(&pick(&metrics.pagerank));
    let use_evc = !metrics.evc_degenerate || cfg.include_evc_when_degenerate;
    let evc = use_evc.then(|| descending_ranks(&pick(&metrics.eigenvector.iter().map(|v| v.abs()).collect::<Vec<_>>())));
    let reach = reachable_from(g, triggers);

    let mut ranked: Vec<PayloadCandidate> = candidates
        .iter()
        .enumerate()
        .map(|(slot, &node)| {
            let eigenvector_rank = evc.as_ref().map(|r| r[slot]);
            PayloadCandidate {
                node,
                rank_sum: bc[slot] + pr[slot] + eigenvector_rank.unwrap_or(0),
                betweenness_rank: bc[slot],
                pagerank_rank: pr[slot],
                eigenvector_rank,
                reachable_from_trigger: reach[node],
            }
        })
        .collect();
    ranked.sort_by(|a, b| {
        a.rank_sum
            .cmp(&b.rank_sum)
            .then_with(|| b.reachable_from_trigger.cmp(&a.reachable_from_trigger))
            .then_with(|| metrics.nets[a.node].label.cmp(&metrics.nets[b.node].label))
    });
    ranked
}

pub fn select_payload(
    metrics: &NodeMetrics,
    triggers: &[usize],
    g: &LineGraph,
    cfg: &LocatorConfig,
) -> Result<PayloadCandidate> {
    rank_payload_candidates(metrics, triggers, g, cfg)
        .into_iter()
        .next()
        .ok_or(Error::NoPayloadCandidate)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationReport {
    pub design: String,
    pub config: LocatorConfig,
    pub metrics: NodeMetrics,
    /// Trigger score per node; `None` for influential nodes.
    pub scores: Vec<Option<f64>>,
    pub filtered: Vec<usize>,
    /// `(node, F)`, ascending by F.
    pub triggers: Vec<(usize, f64)>,
    pub payload: PayloadCandidate,
    pub payload_ranking: Vec<PayloadCandidate>,
    pub warnings: Vec<String>,
}

/// Which way each measure points, by analysis level.
pub struct MetricRole {
    pub metric: &'static str,
    pub level: &'static str,
    pub trigger: bool,
    pub payload: bool,
}

pub const METRIC_ROLES: [MetricRole; 7] = [
    MetricRole { metric: "C", level: "node", trigger: true, payload: false },
    MetricRole { metric: "CC", level: "node", trigger: true, payload: false },
    MetricRole { metric: "BC", level: "node", trigger: false, payload: true },
    MetricRole { metric: "EVC", level: "node", trigger: false, payload: true },
    MetricRole { metric: "PR", level: "node", trigger: false, payload: true },
    MetricRole { metric: "k-core", level: "graph", trigger: true, payload: true },
    MetricRole { metric: "density", level: "graph", trigger: true, payload: true },
];

impl LocalizationReport {
    pub fn trigger_nets(&self) -> Vec<&Net> {
        self.triggers.iter().map(|&(i, _)| &self.metrics.nets[i]).collect()
    }

    pub fn payload_net(&self) -> &Net {
        &self.metrics.nets[self.payload.node]
    }

    pub fn to_json(&self) -> Value {
        let m = &self.metrics;
        let metrics: Vec<Value> = (0..m.len())
            .map(|i| {
                json!({
                    "net": m.nets[i].to_string(),
                    "C": m.degree[i],
                    "CC": m.closeness[i],
                    "BC": m.betweenness[i],
                    "EVC": m.eigenvector[i],
                    "PR": m.pagerank[i],
                    "F": self.scores[i],
                })
            })
            .collect();
        let roles: Vec<Value> = METRIC_ROLES
            .iter()
            .map(|r| json!({"metric": r.metric, "level": r.level, "trigger": r.trigger, "payload": r.payload}))
            .collect();
        json!({
            "design": self.design,
            "config": self.config,
            "evc_degenerate": m.evc_degenerate,
            "metrics": metrics,
            "filtered": self.filtered.iter().map(|&i| m.nets[i].to_string()).collect::<Vec<_>>(),
            "triggers": self.triggers.iter().map(|&(i, f)| json!({"net": m.nets[i].to_string(), "F": f})).collect::<Vec<_>>(),
            "payload": {
                "net": self.payload_net().to_string(),
                "rank_sum": self.payload.rank_sum,
                "reachable_from_trigger": self.payload.reachable_from_trigger,
            },
            "metric_roles": roles,
            "warnings": self.warnings,
        })
    }
}

/// Runs localization on an already-built line graph.
pub fn localize_graph(g: &LineGraph, cfg: &LocatorConfig) -> Result<LocalizationReport> {
    cfg.validate()?;
    if g.is_empty() {
        return Err(Error::NoInternalNets);
    }
    let metrics = NodeMetrics::compute(g, &cfg.metrics)?;
    let n = metrics.len();
    let filtered = filter_influential(&metrics, cfg);
    let survivors: Vec<usize> = (0..n).filter(|i| !filtered.contains(i)).collect();
    let scored = trigger_score(&metrics, cfg, &survivors);
    let mut scores = vec![None; n];
    for &(i, f) in &scored {
        scores[i] = Some(f);
    }
    // keep at least one node back for the payload
    let k = cfg.k_triggers.min(n - 1);
    let triggers = select_triggers(&scored, k, &metrics.nets);
    let trigger_nodes: Vec<usize> = triggers.iter().map(|t| t.0).collect();
    let payload_ranking = rank_payload_candidates(&metrics, &trigger_nodes, g, cfg);
    let payload = payload_ranking.first().cloned().ok_or(Error::NoPayloadCandidate)?;
    Ok(LocalizationReport {
        design: g.name().to_string(),
        config: cfg.clone(),
        metrics,
        scores,
        filtered,
        triggers,
        payload,
        payload_ranking,
        warnings: cfg.warnings(),
    })
}

/// The internal-net line graph of a netlist.
pub fn internal_line_graph(netlist: &Netlist) -> LineGraph {
    line_graph(&prune_periphery(&build_dag(netlist)))
}

/// Full pipeline: DAG, periphery pruning, line graph, metrics, selection.
pub fn localize(netlist: &Netlist, cfg: &LocatorConfig) -> Result<LocalizationReport> {
    localize_graph(&internal_line_graph(netlist), cfg)
}
