//! Combinational Trojan insertion with recorded ground truth.
//!
//! Explicit instances add a trigger gate (HTT) over existing nets and an XOR
//! payload gate (HTP) spliced into a victim net. Implicit instances add no
//! gates: one gate is widened with a new fanin and a victim gate is widened
//! to read it.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bench::{parse_bench, write_bench};
use crate::error::{Error, Result};
use crate::graph::{build_dag, prune_periphery, reaches, CircuitDag, Digraph, Net, VertexKind};
use crate::locator::{localize, LocatorConfig};
use crate::netlist::{Gate, GateFunction, Netlist};

/// Gate functions allowed for the trigger gate.
pub const TRIGGER_FUNCTIONS: [GateFunction; 4] =
    [GateFunction::And, GateFunction::Nand, GateFunction::Or, GateFunction::Nor];

const MAX_ATTEMPTS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrojanKind {
    Explicit,
    Implicit,
}

/// An infected netlist together with the nets an ideal locator would report.
///
/// Truth nets carry labels of the host design. Nets created by the injection
/// itself carry label 0; comparisons go by endpoint names.
#[derive(Debug, Clone, PartialEq)]
pub struct TrojanInstance {
    pub infected: Netlist,
    pub host: String,
    pub kind: TrojanKind,
    pub truth_triggers: Vec<Net>,
    pub truth_payload: Net,
    pub trigger_function: GateFunction,
    pub seed: u64,
    /// Net asserted when the trojan fires (HTT for explicit instances).
    pub trigger_gate: String,
    /// Gate carrying the payload (HTP, or the widened victim).
    pub payload_gate: String,
}

/// Host net between two gates, with its label.
fn internal_net(dag: &CircuitDag, net: &Net) -> Result<Net> {
    let (src, dst) = match (dag.vertex_index(&net.src), dag.vertex_index(&net.dst)) {
        (Some(s), Some(d)) => (s, d),
        _ => return Err(Error::UnknownNet(net.pair())),
    };
    let edge = dag
        .out_edges(src)
        .iter()
        .map(|&e| dag.edges()[e])
        .find(|e| e.dst == dst)
        .ok_or_else(|| Error::UnknownNet(net.pair()))?;
    if dag.vertex(src).kind != VertexKind::Gate || dag.vertex(dst).kind != VertexKind::Gate {
        return Err(Error::Injection(format!(
            "net {} touches a primary input or output",
            net.pair()
        )));
    }
    Ok(Net::new(net.src.clone(), net.dst.clone(), edge.label))
}

/// Inserts `HTT = fn(trigger sources)` and `HTP = XOR(victim.src, HTT)`, and
/// rewires `victim.dst` to read HTP wherever it read `victim.src`.
pub fn inject_explicit(netlist: &Netlist, triggers: &[Net], victim: &Net, function: GateFunction) -> Result<TrojanInstance> {
    if !TRIGGER_FUNCTIONS.contains(&function) {
        return Err(Error::Injection(format!("trigger function {function} is not one of AND, NAND, OR, NOR")));
    }
    if triggers.is_empty() {
        return Err(Error::Injection("at least one trigger net is required".into()));
    }
    let dag = build_dag(netlist);
    let triggers = triggers.iter().map(|t| internal_net(&dag, t)).collect::<Result<Vec<_>>>()?;
    let victim = internal_net(&dag, victim)?;
    if triggers.iter().any(|t| t.same_pair(&victim)) {
        return Err(Error::Injection(format!("victim {} is also a trigger", victim.pair())));
    }

    let mut sources: Vec<String> = Vec::new();
    for t in &triggers {
        if !sources.contains(&t.src) {
            sources.push(t.src.clone());
        }
    }
    let dst = dag.vertex_index(&victim.dst).unwrap();
    for s in &sources {
        let s_idx = dag.vertex_index(s).unwrap();
        if s_idx == dst || reaches(&dag, dst, s_idx) {
            return Err(Error::Injection(format!(
                "splice would create a cycle: trigger source {s} depends on victim sink {}",
                victim.dst
            )));
        }
    }

    let htt = netlist.fresh_identifier("HTT");
    let htp = netlist.fresh_identifier("HTP");
    let (name, inputs, outputs, mut gates) = netlist.clone().into_parts();
    for gate in gates.iter_mut().filter(|g| g.id == victim.dst) {
        for fanin in gate.fanins.iter_mut().filter(|f| **f == victim.src) {
            *fanin = htp.clone();
        }
    }
    gates.push(Gate::new(htt.clone(), function, sources));
    gates.push(Gate::new(htp.clone(), GateFunction::Xor, vec![victim.src.clone(), htt.clone()]));
    let infected = Netlist::new(format!("{name}_ht"), inputs, outputs, gates)?;

    Ok(TrojanInstance {
        infected,
        host: name,
        kind: TrojanKind::Explicit,
        truth_triggers: triggers,
        truth_payload: victim,
        trigger_function: function,
        seed: 0,
        trigger_gate: htt,
        payload_gate: htp,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CandidateVerdict {
    Valid,
    /// The new edge closes a directed cycle.
    CreatesCycle,
    /// The new edge runs from a deeper level to a shallower one.
    BackEdge,
    /// The sink is already reachable from the source.
    AlreadyReachable,
}

impl CandidateVerdict {
    pub fn is_valid(self) -> bool {
        self == CandidateVerdict::Valid
    }

    pub fn reason(self) -> &'static str {
        match self {
            CandidateVerdict::Valid => "valid",
            CandidateVerdict::CreatesCycle => "creates back-edge (closes a cycle)",
            CandidateVerdict::BackEdge => "creates back-edge",
            CandidateVerdict::AlreadyReachable => "already reachable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Candidate {
    pub src: String,
    pub dst: String,
    pub verdict: CandidateVerdict,
}

fn classify(dag: &CircuitDag, levels: &[usize], u: usize, v: usize) -> CandidateVerdict {
    if reaches(dag, v, u) {
        CandidateVerdict::CreatesCycle
    } else if levels[u] > levels[v] {
        CandidateVerdict::BackEdge
    } else if reaches(dag, u, v) {
        CandidateVerdict::AlreadyReachable
    } else {
        CandidateVerdict::Valid
    }
}

/// Every gate pair with no edge in either direction, classified.
///
/// Expects a pruned DAG; pairs are listed by source then sink vertex order.
pub fn candidate_new_edges(dag: &CircuitDag) -> Vec<Candidate> {
    let levels = dag.levels();
    let gates: Vec<usize> = (0..dag.node_count())
        .filter(|&v| dag.vertex(v).kind == VertexKind::Gate)
        .collect();
    let mut out = Vec::new();
    for &u in &gates {
        for &v in &gates {
            if u == v || dag.has_edge(u, v) || dag.has_edge(v, u) {
                continue;
            }
            out.push(Candidate {
                src: dag.vertex(u).id.clone(),
                dst: dag.vertex(v).id.clone(),
                verdict: classify(dag, &levels, u, v),
            });
        }
    }
    out
}

/// Adds the edge `u -> v` (gate `v` gains fanin `u`) and widens
/// `victim_gate` to read `v`.
pub fn inject_implicit(netlist: &Netlist, new_edge: (&str, &str), victim_gate: &str) -> Result<TrojanInstance> {
    let (u, v) = new_edge;
    let invalid = |reason: &str| Error::InvalidCandidate {
        src: u.to_string(),
        dst: v.to_string(),
        reason: reason.to_string(),
    };
    let dag = prune_periphery(&build_dag(netlist));
    let ui = dag.vertex_index(u).ok_or_else(|| Error::UnknownVertex(u.to_string()))?;
    let vi = dag.vertex_index(v).ok_or_else(|| Error::UnknownVertex(v.to_string()))?;
    let wi = dag
        .vertex_index(victim_gate)
        .ok_or_else(|| Error::UnknownVertex(victim_gate.to_string()))?;
    if ui == vi || dag.has_edge(ui, vi) || dag.has_edge(vi, ui) {
        return Err(invalid("endpoints are already adjacent"));
    }
    let verdict = classify(&dag, &dag.levels(), ui, vi);
    if !verdict.is_valid() {
        return Err(invalid(verdict.reason()));
    }

    let widened = netlist.gate(v).unwrap();
    let victim = netlist.gate(victim_gate).unwrap();
    if !widened.function.widenable() {
        return Err(Error::Injection(format!("gate {v} ({}) cannot take another fanin", widened.function)));
    }
    if !victim.function.widenable() {
        return Err(Error::Injection(format!(
            "victim gate {victim_gate} ({}) cannot take another fanin",
            victim.function
        )));
    }
    if wi == vi || victim.fanins.iter().any(|f| f == v) {
        return Err(Error::Injection(format!("victim gate {victim_gate} already reads {v}")));
    }
    if wi == ui || reaches(&dag, wi, ui) || reaches(&dag, wi, vi) {
        return Err(Error::Injection(format!("widening {victim_gate} would create a cycle")));
    }

    let trigger_function = widened.function;
    let (name, inputs, outputs, mut gates) = netlist.clone().into_parts();
    for gate in &mut gates {
        if gate.id == v {
            gate.fanins.push(u.to_string());
        } else if gate.id == victim_gate {
            gate.fanins.push(v.to_string());
        }
    }
    let infected = Netlist::new(format!("{name}_ht"), inputs, outputs, gates)?;
    Ok(TrojanInstance {
        infected,
        host: name,
        kind: TrojanKind::Implicit,
        truth_triggers: vec![Net::new(u, v, 0)],
        truth_payload: Net::new(v, victim_gate, 0),
        trigger_function,
        seed: 0,
        trigger_gate: v.to_string(),
        payload_gate: victim_gate.to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusPolicy {
    /// Triggers are a subset of the locator's own trigger list on the host;
    /// the victim is the best-ranked payload candidate that splices cleanly.
    RareGuided,
    /// Triggers and victim drawn uniformly among internal nets.
    Random,
}

/// Seed of instance `index` derived from the corpus seed.
pub fn instance_seed(seed: u64, index: usize) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(seed ^ mix(index as u64))
}

/// `n` explicit instances with the default locator configuration.
pub fn generate_corpus(netlist: &Netlist, n: usize, seed: u64, policy: CorpusPolicy) -> Result<Vec<TrojanInstance>> {
    generate_corpus_with(netlist, n, seed, policy, &LocatorConfig::default())
}

/// `n` explicit instances; `locator` drives the rare-guided policy.
pub fn generate_corpus_with(
    netlist: &Netlist,
    n: usize,
    seed: u64,
    policy: CorpusPolicy,
    locator: &LocatorConfig,
) -> Result<Vec<TrojanInstance>> {
    if n == 0 {
        return Err(Error::Config("corpus size must be at least 1".into()));
    }
    let dag = prune_periphery(&build_dag(netlist));
    let nets: Vec<Net> = dag
        .edges()
        .iter()
        .map(|e| Net::new(dag.vertex(e.src).id.clone(), dag.vertex(e.dst).id.clone(), e.label))
        .collect();
    if nets.len() < 2 {
        return Err(Error::TooSmall(format!("{} internal net(s)", nets.len())));
    }
    let guide = match policy {
        CorpusPolicy::RareGuided => {
            let report = localize(netlist, locator)?;
            let triggers: Vec<Net> = report.trigger_nets().into_iter().cloned().collect();
            let ranking: Vec<Net> = report
                .payload_ranking
                .iter()
                .map(|c| report.metrics.nets[c.node].clone())
                .collect();
            Some((triggers, ranking))
        }
        CorpusPolicy::Random => None,
    };
    let width = (n - 1).to_string().len().max(3);

    (0..n)
        .into_par_iter()
        .map(|i| {
            let s = instance_seed(seed, i);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let mut inst = match &guide {
                Some((triggers, ranking)) => guided_instance(netlist, triggers, ranking, &mut rng),
                None => random_instance(netlist, &nets, &mut rng),
            }?;
            inst.seed = s;
            inst.infected = inst.infected.with_name(format!("{}_ht{i:0width$}", inst.host));
            Ok(inst)
        })
        .collect()
}

fn random_instance(netlist: &Netlist, nets: &[Net], rng: &mut ChaCha8Rng) -> Result<TrojanInstance> {
    for _ in 0..MAX_ATTEMPTS {
        let t = rng.gen_range(2..=4).min(nets.len() - 1);
        let picked: Vec<&Net> = nets.choose_multiple(rng, t + 1).collect();
        let (victim, triggers) = picked.split_last().unwrap();
        let function = *TRIGGER_FUNCTIONS.choose(rng).unwrap();
        let triggers: Vec<Net> = triggers.iter().map(|&n| n.clone()).collect();
        if let Ok(inst) = inject_explicit(netlist, &triggers, victim, function) {
            return Ok(inst);
        }
    }
    Err(Error::TooSmall(format!("no acyclic injection found in {MAX_ATTEMPTS} attempts")))
}

fn guided_instance(
    netlist: &Netlist,
    triggers: &[Net],
    ranking: &[Net],
    rng: &mut ChaCha8Rng,
) -> Result<TrojanInstance> {
    if triggers.is_empty() {
        return Err(Error::TooSmall("the locator reported no triggers".into()));
    }
    for _ in 0..MAX_ATTEMPTS {
        let t = rng.gen_range(triggers.len().min(2)..=triggers.len());
        let mut chosen: Vec<usize> = rand::seq::index::sample(rng, triggers.len(), t).into_vec();
        chosen.sort_unstable();
        let chosen: Vec<Net> = chosen.into_iter().map(|i| triggers[i].clone()).collect();
        let function = *TRIGGER_FUNCTIONS.choose(rng).unwrap();
        for victim in ranking {
            if let Ok(inst) = inject_explicit(netlist, &chosen, victim, function) {
                return Ok(inst);
            }
        }
    }
    Err(Error::TooSmall(format!("no acyclic injection found in {MAX_ATTEMPTS} attempts")))
}

/// One manifest record; paths are relative to the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub bench_file: String,
    pub kind: TrojanKind,
    pub design: String,
    pub host_file: String,
    pub triggers: Vec<String>,
    pub payload: String,
    pub seed: u64,
    pub trigger_function: GateFunction,
    pub trigger_gate: String,
    pub payload_gate: String,
}

impl ManifestEntry {
    pub fn new(inst: &TrojanInstance, host_file: &str) -> Self {
        ManifestEntry {
            bench_file: format!("{}.bench", inst.infected.name()),
            kind: inst.kind,
            design: inst.host.clone(),
            host_file: host_file.to_string(),
            triggers: inst.truth_triggers.iter().map(Net::to_string).collect(),
            payload: inst.truth_payload.to_string(),
            seed: inst.seed,
            trigger_function: inst.trigger_function,
            trigger_gate: inst.trigger_gate.clone(),
            payload_gate: inst.payload_gate.clone(),
        }
    }

    /// Rebuilds the instance from its parsed infected netlist.
    pub fn instance(&self, infected: Netlist) -> Result<TrojanInstance> {
        let net = |s: &str| Net::parse(s).ok_or_else(|| Error::Config(format!("malformed net `{s}` in manifest")));
        Ok(TrojanInstance {
            infected,
            host: self.design.clone(),
            kind: self.kind,
            truth_triggers: self.triggers.iter().map(|s| net(s)).collect::<Result<_>>()?,
            truth_payload: net(&self.payload)?,
            trigger_function: self.trigger_function,
            seed: self.seed,
            trigger_gate: self.trigger_gate.clone(),
            payload_gate: self.payload_gate.clone(),
        })
    }
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Serialized manifest text (pretty JSON with a trailing newline).
pub fn manifest_json(entries: &[ManifestEntry]) -> Result<String> {
    Ok(serde_json::to_string_pretty(entries)? + "\n")
}

/// Writes the host, every infected netlist and `manifest.json` into `dir`.
pub fn write_corpus(dir: &Path, host: &Netlist, instances: &[TrojanInstance]) -> Result<Vec<ManifestEntry>> {
    fs::create_dir_all(dir)?;
    let host_file = format!("{}.bench", host.name());
    fs::write(dir.join(&host_file), write_bench(host))?;
    let mut entries = Vec::with_capacity(instances.len());
    for inst in instances {
        let entry = ManifestEntry::new(inst, &host_file);
        fs::write(dir.join(&entry.bench_file), write_bench(&inst.infected))?;
        entries.push(entry);
    }
    fs::write(dir.join(MANIFEST_FILE), manifest_json(&entries)?)?;
    Ok(entries)
}

/// A corpus entry loaded from disk.
#[derive(Debug, Clone)]
pub struct LoadedInstance {
    pub entry: ManifestEntry,
    pub host: Netlist,
    pub instance: TrojanInstance,
}

fn read_bench(path: &Path) -> Result<Netlist> {
    let text = fs::read_to_string(path).map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    Ok(parse_bench(&text)?)
}

/// Reads a manifest and every netlist it names.
pub fn load_corpus(manifest: &Path) -> Result<Vec<LoadedInstance>> {
    let dir = manifest.parent().unwrap_or(Path::new("."));
    let text = fs::read_to_string(manifest)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", manifest.display())))?;
    let entries: Vec<ManifestEntry> = serde_json::from_str(&text)?;
    let mut hosts: Vec<(String, Netlist)> = Vec::new();
    let mut out = Vec::with_capacity(entries.len());
    for entry in entries {
        let host = match hosts.iter().find(|(f, _)| *f == entry.host_file) {
            Some((_, h)) => h.clone(),
            None => {
                let h = read_bench(&dir.join(&entry.host_file))?;
                hosts.push((entry.host_file.clone(), h.clone()));
                h
            }
        };
        let instance = entry.instance(read_bench(&dir.join(&entry.bench_file))?)?;
        out.push(LoadedInstance { entry, host, instance });
    }
    Ok(out)
}
