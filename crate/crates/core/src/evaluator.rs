//! Scoring localization reports against injected ground truth.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forge::{TrojanInstance, TrojanKind};
use crate::graph::Net;
use crate::locator::{localize, LocalizationReport, LocatorConfig};
use crate::netlist::Netlist;

/// Which design the locator is run on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportTarget {
    /// The infected netlist (what a defender would actually have).
    Infected,
    /// The clean host; truth nets are compared as they exist there.
    Host,
}

/// Per-instance counts for both categories.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceScore {
    pub design: String,
    pub instance: String,
    pub truth_triggers: usize,
    pub tp_t: usize,
    pub fp_t: usize,
    pub fn_t: usize,
    pub tp_p: usize,
    pub fp_p: usize,
    pub fn_p: usize,
    /// False when the report could not be produced.
    pub scored: bool,
}

impl InstanceScore {
    /// Record for an instance the locator could not analyze.
    pub fn unscorable(truth: &TrojanInstance) -> Self {
        InstanceScore {
            design: truth.host.clone(),
            instance: truth.infected.name().to_string(),
            truth_triggers: truth.truth_triggers.len(),
            tp_t: 0,
            fp_t: 0,
            fn_t: truth.truth_triggers.len(),
            tp_p: 0,
            fp_p: 0,
            fn_p: 1,
            scored: false,
        }
    }
}

/// Nets of the infected design that stand for `truth`.
fn aliases(truth: &TrojanInstance, payload: bool, net: &Net) -> Vec<(String, String)> {
    let mut out = vec![(net.src.clone(), net.dst.clone())];
    if truth.kind == TrojanKind::Explicit {
        let (htt, htp) = (&truth.trigger_gate, &truth.payload_gate);
        if payload {
            out.push((net.src.clone(), htp.clone()));
            out.push((htt.clone(), htp.clone()));
            out.push((htp.clone(), net.dst.clone()));
        } else {
            out.push((net.src.clone(), htt.clone()));
        }
    }
    out
}

fn matches(alias: &[(String, String)], net: &Net) -> bool {
    alias.iter().any(|(s, d)| *s == net.src && *d == net.dst)
}

/// Scores one report. The report must describe either the infected design
/// (trojan nets are then matched through the HTT/HTP gates) or its host.
pub fn score(report: &LocalizationReport, truth: &TrojanInstance) -> Result<InstanceScore> {
    let on_infected = report.design == truth.infected.name();
    if !on_infected && report.design != truth.host {
        return Err(Error::DesignMismatch {
            report: report.design.clone(),
            instance: truth.infected.name().to_string(),
        });
    }
    let alias = |payload: bool, net: &Net| {
        if on_infected {
            aliases(truth, payload, net)
        } else {
            vec![(net.src.clone(), net.dst.clone())]
        }
    };

    let mut predicted: Vec<&Net> = Vec::new();
    for net in report.trigger_nets() {
        if !predicted.iter().any(|p| p.same_pair(net)) {
            predicted.push(net);
        }
    }
    let truth_alias: Vec<Vec<(String, String)>> = truth.truth_triggers.iter().map(|t| alias(false, t)).collect();
    let tp_t = truth_alias.iter().filter(|a| predicted.iter().any(|p| matches(a, p))).count();
    let fp_t = predicted.iter().filter(|p| !truth_alias.iter().any(|a| matches(a, p))).count();

    let hit = matches(&alias(true, &truth.truth_payload), report.payload_net());
    Ok(InstanceScore {
        design: truth.host.clone(),
        instance: truth.infected.name().to_string(),
        truth_triggers: truth.truth_triggers.len(),
        tp_t,
        fp_t,
        fn_t: truth.truth_triggers.len() - tp_t,
        tp_p: usize::from(hit),
        fp_p: usize::from(!hit),
        fn_p: usize::from(!hit),
        scored: true,
    })
}

/// Localizes and scores every instance of one host design.
///
/// Instances whose report cannot be computed are recorded as misses.
pub fn evaluate(
    host: &Netlist,
    instances: &[TrojanInstance],
    cfg: &LocatorConfig,
    target: ReportTarget,
) -> Result<Vec<InstanceScore>> {
    let host_report = match target {
        ReportTarget::Host => localize(host, cfg).ok(),
        ReportTarget::Infected => None,
    };
    instances
        .par_iter()
        .map(|inst| {
            let report = match target {
                ReportTarget::Host => host_report.clone(),
                ReportTarget::Infected => localize(&inst.infected, cfg).ok(),
            };
            match report {
                Some(r) => score(&r, inst),
                None => Ok(InstanceScore::unscorable(inst)),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CreditMode {
    /// An instance is a trigger TP only when every truth trigger is found.
    #[default]
    Strict,
    /// An instance contributes the found fraction of its truth triggers.
    Partial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AggregateOptions {
    pub credit: CreditMode,
    /// False positives allowed before a missed instance counts as FP.
    pub fp_tolerance: usize,
}

/// Instance counts (possibly fractional under partial credit).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Outcome {
    pub tp: f64,
    pub fp: f64,
    pub fn_: f64,
}

impl Outcome {
    fn add(&mut self, o: Outcome) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
    }

    /// Percentages of `n` instances.
    pub fn rates(&self, n: usize) -> Outcome {
        let s = 100.0 / n as f64;
        Outcome {
            tp: self.tp * s,
            fp: self.fp * s,
            fn_: self.fn_ * s,
        }
    }
}

fn classify_triggers(r: &InstanceScore, opts: &AggregateOptions) -> Outcome {
    let frac = match (opts.credit, r.truth_triggers) {
        (_, 0) => 1.0,
        (CreditMode::Strict, n) => f64::from(u8::from(r.tp_t == n)),
        (CreditMode::Partial, n) => r.tp_t as f64 / n as f64,
    };
    let rest = 1.0 - frac;
    if r.fp_t > opts.fp_tolerance {
        Outcome { tp: frac, fp: rest, fn_: 0.0 }
    } else {
        Outcome { tp: frac, fp: 0.0, fn_: rest }
    }
}

fn classify_payload(r: &InstanceScore) -> Outcome {
    if r.tp_p > 0 {
        Outcome { tp: 1.0, fp: 0.0, fn_: 0.0 }
    } else if r.fp_p > 0 {
        Outcome { tp: 0.0, fp: 1.0, fn_: 0.0 }
    } else {
        Outcome { tp: 0.0, fp: 0.0, fn_: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignSummary {
    pub design: String,
    pub instances: usize,
    pub htt_counts: Outcome,
    pub htp_counts: Outcome,
    pub htt: Outcome,
    pub htp: Outcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationSummary {
    /// One row per design, sorted by design name.
    pub designs: Vec<DesignSummary>,
    /// Mean of the per-design rates; `instances` is the total.
    pub average: DesignSummary,
}

/// Instance-level rates per design and their average.
pub fn aggregate(records: &[InstanceScore], opts: &AggregateOptions) -> Result<EvaluationSummary> {
    if records.is_empty() {
        return Err(Error::EmptyAggregate);
    }
    let mut groups: BTreeMap<&str, (usize, Outcome, Outcome)> = BTreeMap::new();
    for r in records {
        let g = groups.entry(&r.design).or_default();
        g.0 += 1;
        g.1.add(classify_triggers(r, opts));
        g.2.add(classify_payload(r));
    }
    let designs: Vec<DesignSummary> = groups
        .into_iter()
        .map(|(design, (n, htt, htp))| DesignSummary {
            design: design.to_string(),
            instances: n,
            htt_counts: htt,
            htp_counts: htp,
            htt: htt.rates(n),
            htp: htp.rates(n),
        })
        .collect();

    let k = designs.len() as f64;
    let mut average = DesignSummary {
        design: "Average".into(),
        instances: records.len(),
        htt_counts: Outcome::default(),
        htp_counts: Outcome::default(),
        htt: Outcome::default(),
        htp: Outcome::default(),
    };
    for d in &designs {
        average.htt_counts.add(d.htt_counts);
        average.htp_counts.add(d.htp_counts);
        average.htt.add(d.htt);
        average.htp.add(d.htp);
    }
    for o in [&mut average.htt, &mut average.htp] {
        o.tp /= k;
        o.fp /= k;
        o.fn_ /= k;
    }
    Ok(EvaluationSummary { designs, average })
}

pub const SUMMARY_HEADER: [&str; 8] = ["design", "instances", "htt_tp", "htt_fp", "htt_fn", "htp_tp", "htp_fp", "htp_fn"];

/// The summary as CSV, one row per design followed by the average row.
pub fn summary_csv(summary: &EvaluationSummary) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SUMMARY_HEADER)?;
    for d in summary.designs.iter().chain([&summary.average]) {
        let pct = |v: f64| format!("{v:.2}");
        w.write_record([
            d.design.clone(),
            d.instances.to_string(),
            pct(d.htt.tp),
            pct(d.htt.fp),
            pct(d.htt.fn_),
            pct(d.htp.tp),
            pct(d.htp.fp),
            pct(d.htp.fn_),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
