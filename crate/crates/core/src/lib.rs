//! Localization of combinational hardware-Trojan trigger and payload nets in
//! gate-level netlists, using network centrality measures computed over the
//! circuit's line graph.
//!
//! The pipeline is `.bench` text -> [`Netlist`] -> [`CircuitDag`] -> pruned
//! DAG -> [`LineGraph`] -> [`NodeMetrics`] -> [`LocalizationReport`].
//! Around it sit a Trojan injector ([`forge`]), a scorer ([`evaluator`]) and
//! an exhaustive logic simulator ([`oracle`]) used to check both.

pub mod bench;
pub mod cli;
pub mod error;
pub mod evaluator;
pub mod export;
pub mod forge;
pub mod graph;
pub mod locator;
pub mod metrics;
pub mod netlist;
pub mod oracle;

#[cfg(test)]
pub(crate) mod testutil;

pub use bench::{parse_bench, write_bench};
pub use error::{Error, ParseError, Result};
pub use evaluator::{aggregate, score, EvaluationSummary, InstanceScore};
pub use forge::{generate_corpus, inject_explicit, inject_implicit, TrojanInstance};
pub use graph::{build_dag, line_graph, prune_periphery, CircuitDag, LineGraph, Net};
pub use locator::{localize, LocalizationReport, LocatorConfig};
pub use metrics::NodeMetrics;
pub use netlist::{Gate, GateFunction, Netlist};
