//! Command-line front end.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::parse_bench;
use crate::error::{Error, Result};
use crate::evaluator::{aggregate, evaluate, summary_csv, AggregateOptions, CreditMode, ReportTarget};
use crate::export::{dag_to_dot, line_graph_to_dot, metrics_csv, signals_csv};
use crate::forge::{
    generate_corpus_with, inject_explicit, inject_implicit, load_corpus, write_corpus, CorpusPolicy, TrojanInstance,
    MANIFEST_FILE,
};
use crate::graph::{build_dag, line_graph, prune_periphery, Net};
use crate::locator::{localize, InfluentialFilter, LocatorConfig};
use crate::metrics::{BetweennessMode, DegreeMode};
use crate::netlist::{GateFunction, Netlist};
use crate::oracle::{compare_designs, signal_probabilities};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "HTLOCATE_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "htlocate",
    version,
    about = "Locate combinational hardware-Trojan trigger and payload nets in .bench netlists",
    after_help = "Environment:\n  HTLOCATE_THREADS  worker threads for metric and corpus computations (default: all cores)\n\nExit status: 0 on success, 1 on a domain error, 2 on a usage error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a netlist and print its statistics, or export it.
    Parse {
        bench: PathBuf,
        /// text: statistics; dot: circuit DAG; line-dot: internal line graph
        #[arg(long, value_enum, default_value_t = ParseFormat::Text)]
        format: ParseFormat,
    },
    /// Run trigger and payload localization.
    Analyze {
        bench: PathBuf,
        #[command(flatten)]
        locator: LocatorArgs,
        /// json: full report; csv: metric table; dot: internal line graph
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Output file (standard output when omitted)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Insert one trojan and write it with a manifest.
    Inject {
        bench: PathBuf,
        /// Trigger nets as src->dst (explicit payload)
        #[arg(long, value_delimiter = ',', required_unless_present = "edge")]
        triggers: Vec<String>,
        /// Victim net as src->dst (explicit payload)
        #[arg(long, requires = "triggers")]
        victim: Option<String>,
        /// Trigger gate function (explicit payload)
        #[arg(long, value_enum, default_value_t = TriggerFn::And)]
        function: TriggerFn,
        /// New edge as src->dst (implicit payload)
        #[arg(long, conflicts_with_all = ["triggers", "victim"], requires = "victim_gate")]
        edge: Option<String>,
        /// Gate widened to read the new edge's sink (implicit payload)
        #[arg(long)]
        victim_gate: Option<String>,
        /// Output directory
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Generate a corpus of explicit-payload instances.
    Corpus {
        bench: PathBuf,
        /// Number of instances
        #[arg(short = 'n', long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Policy::RareGuided)]
        policy: Policy,
        #[command(flatten)]
        locator: LocatorArgs,
        /// Output directory
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Score the locator on a corpus and print the summary table as CSV.
    Evaluate {
        /// Corpus manifest (or the directory holding manifest.json)
        manifest: PathBuf,
        #[command(flatten)]
        locator: LocatorArgs,
        /// Design the locator is run on
        #[arg(long, value_enum, default_value_t = Target::Infected)]
        target: Target,
        #[arg(long, value_enum, default_value_t = Credit::Strict)]
        credit: Credit,
        /// False-positive triggers tolerated before a miss counts as FP
        #[arg(long, default_value_t = 0)]
        fp_tolerance: usize,
        /// Output file (standard output when omitted)
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write per-instance records as JSON
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Exhaustive simulation: per-net probabilities, or a design comparison.
    Simulate {
        bench: PathBuf,
        /// Compare against this design instead of printing probabilities
        #[arg(long)]
        compare: Option<PathBuf>,
        /// Net whose activity is reported with --compare
        #[arg(long, requires = "compare")]
        trigger: Option<String>,
        #[arg(long, default_value_t = 20)]
        input_limit: usize,
        /// Output file (standard output when omitted)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct LocatorArgs {
    /// Number of trigger nets
    #[arg(short = 'k', long = "k", default_value_t = 4)]
    k: usize,
    /// Weight of degree centrality in the trigger score
    #[arg(long, default_value_t = 0.5)]
    w_degree: f64,
    /// Weight of closeness centrality in the trigger score
    #[arg(long, default_value_t = 0.5)]
    w_closeness: f64,
    #[arg(long, value_enum, default_value_t = Filter::MaxDegree)]
    filter: Filter,
    /// Quantile used by --filter quantile
    #[arg(long, default_value_t = 0.9)]
    quantile: f64,
    /// Use eigenvector ranks even when the eigenvector is degenerate
    #[arg(long)]
    include_evc: bool,
    /// PageRank damping factor
    #[arg(long, default_value_t = 0.85)]
    damping: f64,
    #[arg(long, value_enum, default_value_t = Degree::Normalized)]
    degree_mode: Degree,
    #[arg(long, value_enum, default_value_t = Betweenness::Fractional)]
    betweenness_mode: Betweenness,
}

impl LocatorArgs {
    fn config(&self) -> Result<LocatorConfig> {
        let mut cfg = LocatorConfig::default().with_k(self.k);
        cfg.weight_degree = self.w_degree;
        cfg.weight_closeness = self.w_closeness;
        cfg.include_evc_when_degenerate = self.include_evc;
        cfg.influential_filter = match self.filter {
            Filter::MaxDegree => InfluentialFilter::MaxDegree,
            Filter::Quantile => InfluentialFilter::Quantile { q: self.quantile },
        };
        cfg.metrics.pagerank.damping = self.damping;
        cfg.metrics.degree = match self.degree_mode {
            Degree::Normalized => DegreeMode::Normalized,
            Degree::RowSum => DegreeMode::RowSum,
        };
        cfg.metrics.betweenness = match self.betweenness_mode {
            Betweenness::Fractional => BetweennessMode::Fractional,
            Betweenness::Indicator => BetweennessMode::Indicator,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ParseFormat {
    Text,
    Dot,
    LineDot,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Dot,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TriggerFn {
    And,
    Nand,
    Or,
    Nor,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Policy {
    RareGuided,
    Random,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Target {
    Infected,
    Host,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Credit {
    Strict,
    Partial,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Filter {
    MaxDegree,
    Quantile,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Degree {
    Normalized,
    RowSum,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Betweenness {
    Fractional,
    Indicator,
}

/// Parses `args` (program name first), runs the command, and returns the
/// process exit status.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return 2;
    }
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
    // a pool may already exist when dispatch runs more than once in a process
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn read_netlist(path: &Path) -> Result<Netlist> {
    let text = fs::read_to_string(path).map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    parse_bench(&text).map_err(|e| Error::InvalidNetlist(format!("{}: {e}", path.display())))
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn parse_net(s: &str) -> Result<Net> {
    Net::parse(s.trim()).ok_or_else(|| Error::Config(format!("expected a net as src->dst, got `{s}`")))
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Parse { bench, format } => {
            let netlist = read_netlist(&bench)?;
            let dag = build_dag(&netlist);
            let text = match format {
                ParseFormat::Text => {
                    let pruned = prune_periphery(&dag);
                    format!(
                        "{}: {} inputs, {} outputs, {} gates, {} vertices, {} edges, {} internal nets\n",
                        netlist.name(),
                        netlist.inputs().len(),
                        netlist.outputs().len(),
                        netlist.gates().len(),
                        dag.vertices().len(),
                        dag.edges().len(),
                        pruned.edges().len()
                    )
                }
                ParseFormat::Dot => dag_to_dot(&dag),
                ParseFormat::LineDot => line_graph_to_dot(&line_graph(&prune_periphery(&dag))),
            };
            emit(None, &text)
        }
        Command::Analyze {
            bench,
            locator,
            format,
            output,
        } => {
            let cfg = locator.config()?;
            let netlist = read_netlist(&bench)?;
            let text = match format {
                Format::Json => {
                    let report = localize(&netlist, &cfg)?;
                    serde_json::to_string_pretty(&report.to_json())? + "\n"
                }
                Format::Csv => metrics_csv(&localize(&netlist, &cfg)?.metrics)?,
                Format::Dot => line_graph_to_dot(&line_graph(&prune_periphery(&build_dag(&netlist)))),
            };
            emit(output.as_deref(), &text)
        }
        Command::Inject {
            bench,
            triggers,
            victim,
            function,
            edge,
            victim_gate,
            output,
        } => {
            let netlist = read_netlist(&bench)?;
            let inst: TrojanInstance = match (edge, victim_gate) {
                (Some(edge), Some(gate)) => {
                    let e = parse_net(&edge)?;
                    inject_implicit(&netlist, (&e.src, &e.dst), &gate)?
                }
                _ => {
                    let triggers = triggers.iter().map(|t| parse_net(t)).collect::<Result<Vec<_>>>()?;
                    let victim = victim.ok_or_else(|| Error::Config("--victim is required with --triggers".into()))?;
                    let function = match function {
                        TriggerFn::And => GateFunction::And,
                        TriggerFn::Nand => GateFunction::Nand,
                        TriggerFn::Or => GateFunction::Or,
                        TriggerFn::Nor => GateFunction::Nor,
                    };
                    inject_explicit(&netlist, &triggers, &parse_net(&victim)?, function)?
                }
            };
            write_corpus(&output, &netlist, std::slice::from_ref(&inst))?;
            println!("{}", output.join(format!("{}.bench", inst.infected.name())).display());
            Ok(())
        }
        Command::Corpus {
            bench,
            count,
            seed,
            policy,
            locator,
            output,
        } => {
            let cfg = locator.config()?;
            let netlist = read_netlist(&bench)?;
            let policy = match policy {
                Policy::RareGuided => CorpusPolicy::RareGuided,
                Policy::Random => CorpusPolicy::Random,
            };
            let instances = generate_corpus_with(&netlist, count, seed, policy, &cfg)?;
            write_corpus(&output, &netlist, &instances)?;
            println!("{}", output.join(MANIFEST_FILE).display());
            Ok(())
        }
        Command::Evaluate {
            manifest,
            locator,
            target,
            credit,
            fp_tolerance,
            output,
            records,
        } => {
            let cfg = locator.config()?;
            let manifest = if manifest.is_dir() { manifest.join(MANIFEST_FILE) } else { manifest };
            let loaded = load_corpus(&manifest)?;
            let target = match target {
                Target::Infected => ReportTarget::Infected,
                Target::Host => ReportTarget::Host,
            };
            let mut by_host: BTreeMap<String, (Netlist, Vec<TrojanInstance>)> = BTreeMap::new();
            for l in loaded {
                by_host
                    .entry(l.entry.host_file.clone())
                    .or_insert_with(|| (l.host.clone(), Vec::new()))
                    .1
                    .push(l.instance);
            }
            let mut scores = Vec::new();
            for (host, instances) in by_host.values() {
                scores.extend(evaluate(host, instances, &cfg, target)?);
            }
            let opts = AggregateOptions {
                credit: match credit {
                    Credit::Strict => CreditMode::Strict,
                    Credit::Partial => CreditMode::Partial,
                },
                fp_tolerance,
            };
            let csv = summary_csv(&aggregate(&scores, &opts)?)?;
            if let Some(path) = records {
                fs::write(path, serde_json::to_string_pretty(&scores)? + "\n")?;
            }
            emit(output.as_deref(), &csv)
        }
        Command::Simulate {
            bench,
            compare,
            trigger,
            input_limit,
            output,
        } => {
            let netlist = read_netlist(&bench)?;
            let text = match compare {
                None => signals_csv(&signal_probabilities(&netlist, input_limit)?)?,
                Some(other) => {
                    let other = read_netlist(&other)?;
                    let cmp = compare_designs(&netlist, &other, trigger.as_deref(), input_limit)?;
                    let mut s = format!("vectors,{}\ndiffering,{}\n", cmp.vectors, cmp.differing_count());
                    if let Some(active) = &cmp.trigger_active {
                        s += &format!(
                            "trigger_active,{}\ndiffering_within_trigger,{}\n",
                            active.count(),
                            cmp.differing.is_subset(active)
                        );
                    }
                    s
                }
            };
            emit(output.as_deref(), &text)
        }
    }
}
