//! DOT and CSV serializers.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{CircuitDag, Digraph, LineGraph, VertexKind};
use crate::metrics::NodeMetrics;
use crate::oracle::SignalStat;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn header(out: &mut String, name: &str) {
    out.push_str("digraph {\n");
    if !name.is_empty() {
        let _ = writeln!(out, "  graph [label={}];", quote(name));
    }
}

/// DOT rendering of a circuit graph. Edges carry their labels.
pub fn dag_to_dot(dag: &CircuitDag) -> String {
    if dag.node_count() == 0 {
        return "digraph { }\n".into();
    }
    let mut out = String::new();
    header(&mut out, dag.name());
    for v in dag.vertices() {
        let shape = match v.kind {
            VertexKind::Pi => "triangle",
            VertexKind::Gate => "box",
            VertexKind::Po => "invtriangle",
        };
        let _ = writeln!(out, "  {} [shape={shape}];", quote(&v.id));
    }
    for e in dag.edges() {
        let _ = writeln!(
            out,
            "  {} -> {} [label=\"{}\"];",
            quote(&dag.vertex(e.src).id),
            quote(&dag.vertex(e.dst).id),
            e.label
        );
    }
    out.push_str("}\n");
    out
}

/// DOT rendering of a line graph; nodes are named `src->dst#label`.
pub fn line_graph_to_dot(g: &LineGraph) -> String {
    if g.is_empty() {
        return "digraph { }\n".into();
    }
    let mut out = String::new();
    header(&mut out, g.name());
    for net in g.nets() {
        let _ = writeln!(out, "  {} [label=\"{}\"];", quote(&net.to_string()), net.label);
    }
    for (a, b) in g.arcs() {
        let _ = writeln!(out, "  {} -> {};", quote(&g.net(a).to_string()), quote(&g.net(b).to_string()));
    }
    out.push_str("}\n");
    out
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Metric dump with header `net,src,dst,C,CC,BC,EVC,PR`, rows by edge label.
pub fn metrics_csv(m: &NodeMetrics) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["net", "src", "dst", "C", "CC", "BC", "EVC", "PR"])?;
    let mut order: Vec<usize> = (0..m.len()).collect();
    order.sort_by_key(|&i| m.nets[i].label);
    for i in order {
        let net = &m.nets[i];
        w.write_record([
            net.to_string(),
            net.src.clone(),
            net.dst.clone(),
            m.degree[i].to_string(),
            m.closeness[i].to_string(),
            m.betweenness[i].to_string(),
            m.eigenvector[i].to_string(),
            m.pagerank[i].to_string(),
        ])?;
    }
    finish(w)
}

/// Oracle table with header `net,signal_prob,toggle_prob`.
pub fn signals_csv(stats: &[SignalStat]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["net", "signal_prob", "toggle_prob"])?;
    for s in stats {
        w.write_record([s.net.clone(), s.signal_prob.to_string(), s.toggle_prob.to_string()])?;
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::parse_bench;
    use crate::graph::{build_dag, line_graph, prune_periphery};
    use crate::metrics::MetricOptions;
    use crate::testutil::C17;

    #[test]
    fn empty_graphs() {
        assert_eq!(line_graph_to_dot(&LineGraph::anonymous(0, &[])), "digraph { }\n");
        let n = parse_bench("INPUT(a)\nOUTPUT(a)\n").unwrap();
        let dag = prune_periphery(&build_dag(&n));
        assert_eq!(dag_to_dot(&dag), "digraph { }\n");
    }

    #[test]
    fn c17_dot_counts() {
        let dag = build_dag(&parse_bench(C17).unwrap());
        let dot = dag_to_dot(&dag);
        assert_eq!(dot.matches(" -> ").count(), 14);
        assert_eq!(dot.matches("shape=").count(), 13);
        assert!(dot.contains("\"N10\" -> \"N13\" [label=\"11\"];"));
        assert_eq!(dot, dag_to_dot(&dag));

        let lg = line_graph(&dag);
        let dot = line_graph_to_dot(&lg);
        assert_eq!(dot.matches("\" [label=").count(), 14);
    }

    #[test]
    fn metric_csv_rows() {
        let g = line_graph(&prune_periphery(&build_dag(&parse_bench(C17).unwrap())));
        let m = NodeMetrics::compute(&g, &MetricOptions::default()).unwrap();
        let text = metrics_csv(&m).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "net,src,dst,C,CC,BC,EVC,PR");
        assert_eq!(lines.len(), 7);
        assert!(lines[1].starts_with("N8->N11#7,N8,N11,0,0,0,"), "{}", lines[1]);
    }
}
