//! Exhaustive logic simulation for small combinational netlists.
//!
//! Input vector `v` assigns bit `i` of `v` to the `i`-th declared input.
//! Evaluation is bit-parallel: 64 consecutive vectors share one machine word.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::netlist::Netlist;

pub const DEFAULT_INPUT_LIMIT: usize = 20;

/// Blocks of 64 vectors handed to one parallel task.
const BLOCKS_PER_TASK: usize = 256;

/// A set of input vectors, stored as a bitmap over `0..len`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorSet {
    words: Vec<u64>,
    len: u64,
}

impl VectorSet {
    pub fn universe(&self) -> u64 {
        self.len
    }

    pub fn contains(&self, v: u64) -> bool {
        v < self.len && self.words[(v / 64) as usize] >> (v % 64) & 1 == 1
    }

    pub fn count(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn is_subset(&self, other: &VectorSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.len).filter(|&v| self.contains(v))
    }

    pub fn intersection(&self, other: &VectorSet) -> VectorSet {
        VectorSet {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
            len: self.len,
        }
    }
}

/// Compiled form of a netlist: nets are dense indices, inputs first.
struct Compiled {
    names: Vec<String>,
    index: HashMap<String, usize>,
    n_inputs: usize,
    // (net, function, fanin nets) in topological order
    steps: Vec<(usize, crate::netlist::GateFunction, Vec<usize>)>,
}

impl Compiled {
    fn new(netlist: &Netlist) -> Self {
        let mut names: Vec<String> = netlist.inputs().to_vec();
        names.extend(netlist.gates().iter().map(|g| g.id.clone()));
        let index: HashMap<String, usize> = names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        let n_inputs = netlist.inputs().len();
        let steps = netlist
            .topological_order()
            .iter()
            .map(|&g| {
                let gate = &netlist.gates()[g];
                (
                    n_inputs + g,
                    gate.function,
                    gate.fanins.iter().map(|f| index[f.as_str()]).collect(),
                )
            })
            .collect();
        Compiled {
            names,
            index,
            n_inputs,
            steps,
        }
    }

    /// Evaluates one block. `flip` inverts the value gate `net` reads from
    /// fanin `source` (every occurrence), leaving the driver itself intact.
    fn eval(&self, values: &mut [u64], flip: Option<(usize, usize)>) {
        for (net, function, fanins) in &self.steps {
            let read = fanins.iter().map(|&f| match flip {
                Some((dst, src)) if dst == *net && src == f => !values[f],
                _ => values[f],
            });
            values[*net] = function.eval_words(read);
        }
    }

    fn load_block(&self, block: u64, values: &mut [u64]) {
        for (i, slot) in values[..self.n_inputs].iter_mut().enumerate() {
            *slot = input_word(i, block);
        }
    }
}

/// Word holding input `i` for vectors `64 * block .. 64 * block + 63`.
fn input_word(i: usize, block: u64) -> u64 {
    const PATTERNS: [u64; 6] = [
        0xAAAA_AAAA_AAAA_AAAA,
        0xCCCC_CCCC_CCCC_CCCC,
        0xF0F0_F0F0_F0F0_F0F0,
        0xFF00_FF00_FF00_FF00,
        0xFFFF_0000_FFFF_0000,
        0xFFFF_FFFF_0000_0000,
    ];
    if i < 6 {
        PATTERNS[i]
    } else if (block >> (i - 6)) & 1 == 1 {
        u64::MAX
    } else {
        0
    }
}

fn valid_mask(total: u64, block: u64) -> u64 {
    let remaining = total - block * 64;
    if remaining >= 64 {
        u64::MAX
    } else {
        (1u64 << remaining) - 1
    }
}

fn check_limit(n: usize, limit: usize) -> Result<u64> {
    if n > limit || n >= 63 {
        return Err(Error::TooManyInputs { inputs: n, limit });
    }
    Ok(1u64 << n)
}

/// Runs `per_block` over every 64-vector block in parallel, returning the
/// per-block results in block order.
fn for_each_block<T: Send>(total: u64, per_block: impl Fn(u64) -> T + Sync) -> Vec<T> {
    let blocks = total.div_ceil(64);
    let tasks = blocks.div_ceil(BLOCKS_PER_TASK as u64);
    (0..tasks)
        .into_par_iter()
        .map(|t| {
            let start = t * BLOCKS_PER_TASK as u64;
            let end = (start + BLOCKS_PER_TASK as u64).min(blocks);
            (start..end).map(&per_block).collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// Evaluates every net under one input assignment.
pub fn simulate(netlist: &Netlist, assignment: &HashMap<String, bool>) -> Result<BTreeMap<String, bool>> {
    let c = Compiled::new(netlist);
    let mut values = vec![0u64; c.names.len()];
    for (i, input) in netlist.inputs().iter().enumerate() {
        let bit = *assignment.get(input).ok_or_else(|| Error::MissingInput(input.clone()))?;
        values[i] = if bit { u64::MAX } else { 0 };
    }
    c.eval(&mut values, None);
    Ok(c.names.iter().cloned().zip(values.iter().map(|&w| w & 1 == 1)).collect())
}

/// Assignment for input vector `v`.
pub fn assignment_for(netlist: &Netlist, v: u64) -> HashMap<String, bool> {
    netlist
        .inputs()
        .iter()
        .enumerate()
        .map(|(i, name)| (name.clone(), (v >> i) & 1 == 1))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignalStat {
    pub net: String,
    pub ones: u64,
    pub vectors: u64,
    pub signal_prob: f64,
    pub toggle_prob: f64,
}

/// Exact P(net = 1) and P(net toggles between two independent vectors) for
/// every net, by enumerating all input vectors.
pub fn signal_probabilities(netlist: &Netlist, input_limit: usize) -> Result<Vec<SignalStat>> {
    let total = check_limit(netlist.inputs().len(), input_limit)?;
    let c = Compiled::new(netlist);
    let n = c.names.len();
    let per_block = for_each_block(total, |block| {
        let mut values = vec![0u64; n];
        c.load_block(block, &mut values);
        c.eval(&mut values, None);
        let mask = valid_mask(total, block);
        values.iter().map(|w| (w & mask).count_ones() as u64).collect::<Vec<_>>()
    });
    let mut ones = vec![0u64; n];
    for counts in per_block {
        for (acc, k) in ones.iter_mut().zip(counts) {
            *acc += k;
        }
    }
    Ok(c.names
        .iter()
        .zip(ones)
        .map(|(net, ones)| {
            let p = ones as f64 / total as f64;
            SignalStat {
                net: net.clone(),
                ones,
                vectors: total,
                signal_prob: p,
                toggle_prob: 2.0 * p * (1.0 - p),
            }
        })
        .collect())
}

/// Vectors on which `net` evaluates to 1.
pub fn net_activity(netlist: &Netlist, net: &str, input_limit: usize) -> Result<VectorSet> {
    let total = check_limit(netlist.inputs().len(), input_limit)?;
    let c = Compiled::new(netlist);
    let at = *c.index.get(net).ok_or_else(|| Error::UnknownNet(net.to_string()))?;
    let words = for_each_block(total, |block| {
        let mut values = vec![0u64; c.names.len()];
        c.load_block(block, &mut values);
        c.eval(&mut values, None);
        values[at] & valid_mask(total, block)
    });
    Ok(VectorSet { words, len: total })
}

/// Vectors on which inverting the value gate `dst` reads from `src` changes
/// at least one primary output.
pub fn propagation_set(netlist: &Netlist, src: &str, dst: &str, input_limit: usize) -> Result<VectorSet> {
    let total = check_limit(netlist.inputs().len(), input_limit)?;
    let c = Compiled::new(netlist);
    let lookup = |id: &str| c.index.get(id).copied().ok_or_else(|| Error::UnknownNet(id.to_string()));
    let (s, d) = (lookup(src)?, lookup(dst)?);
    let outputs: Vec<usize> = netlist.outputs().iter().map(|o| c.index[o.as_str()]).collect();
    let words = for_each_block(total, |block| {
        let mut good = vec![0u64; c.names.len()];
        c.load_block(block, &mut good);
        let mut bad = good.clone();
        c.eval(&mut good, None);
        c.eval(&mut bad, Some((d, s)));
        outputs.iter().fold(0u64, |acc, &o| acc | (good[o] ^ bad[o])) & valid_mask(total, block)
    });
    Ok(VectorSet { words, len: total })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub vectors: u64,
    /// Vectors where some shared primary output differs.
    pub differing: VectorSet,
    /// Vectors where the named trigger net is 1, when one was given.
    pub trigger_active: Option<VectorSet>,
}

impl Comparison {
    pub fn differing_count(&self) -> u64 {
        self.differing.count()
    }
}

/// Exhaustively compares two designs over the same primary inputs.
pub fn compare_designs(
    original: &Netlist,
    infected: &Netlist,
    trigger_net: Option<&str>,
    input_limit: usize,
) -> Result<Comparison> {
    let mut a: Vec<&String> = original.inputs().iter().collect();
    let mut b: Vec<&String> = infected.inputs().iter().collect();
    a.sort();
    b.sort();
    if a != b {
        return Err(Error::InputMismatch(format!(
            "{} has {} inputs, {} has {}",
            original.name(),
            original.inputs().len(),
            infected.name(),
            infected.inputs().len()
        )));
    }
    let total = check_limit(original.inputs().len(), input_limit)?;
    let ca = Compiled::new(original);
    let cb = Compiled::new(infected);
    // infected input slot -> original input slot
    let input_map: Vec<usize> = infected.inputs().iter().map(|i| ca.index[i.as_str()]).collect();
    let shared: Vec<(usize, usize)> = original
        .outputs()
        .iter()
        .filter(|o| infected.outputs().contains(o))
        .map(|o| (ca.index[o.as_str()], cb.index[o.as_str()]))
        .collect();
    let trigger = match trigger_net {
        Some(t) => Some(*cb.index.get(t).ok_or_else(|| Error::UnknownNet(t.to_string()))?),
        None => None,
    };
    let per_block = for_each_block(total, |block| {
        let mut va = vec![0u64; ca.names.len()];
        ca.load_block(block, &mut va);
        let mut vb = vec![0u64; cb.names.len()];
        for (slot, &src) in input_map.iter().enumerate() {
            vb[slot] = va[src];
        }
        ca.eval(&mut va, None);
        cb.eval(&mut vb, None);
        let mask = valid_mask(total, block);
        let diff = shared.iter().fold(0u64, |acc, &(i, j)| acc | (va[i] ^ vb[j])) & mask;
        (diff, trigger.map(|t| vb[t] & mask).unwrap_or(0))
    });
    let (diff, trig): (Vec<u64>, Vec<u64>) = per_block.into_iter().unzip();
    Ok(Comparison {
        vectors: total,
        differing: VectorSet { words: diff, len: total },
        trigger_active: trigger.map(|_| VectorSet { words: trig, len: total }),
    })
}
