use std::fmt::Write;

use super::{BlanketReport, Dag};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Renders the sub-graph induced by a blanket and its targets. Targets are
/// shaded, members carry their roles, parameterizable members are boxes.
/// Nodes appear in declaration order and edges in index order, so the output
/// is stable for a given graph.
pub fn blanket_dot(dag: &Dag, report: &BlanketReport) -> String {
    let mut out = String::new();
    out.push_str("digraph blanket {\n");
    out.push_str("  node [shape=ellipse];\n");
    let keep = |v: usize| report.targets.contains(&v) || report.contains(v);
    for v in (0..dag.len()).filter(|&v| keep(v)) {
        let name = dag.name(v);
        if report.targets.contains(&v) {
            let _ = writeln!(
                out,
                "  {} [label={}, style=filled, fillcolor=lightgray];",
                quote(name),
                quote(name)
            );
        } else {
            let roles: Vec<&str> = report.members[&v].iter().map(|r| r.as_str()).collect();
            let label = format!("{name}\\n{}", roles.join(","));
            let shape = if report.parameterizable.contains(&v) {
                ", shape=box"
            } else {
                ""
            };
            let _ = writeln!(out, "  {} [label=\"{}\"{}];", quote(name), label, shape);
        }
    }
    for (u, v) in dag.edges() {
        if keep(u) && keep(v) {
            let _ = writeln!(out, "  {} -> {};", quote(dag.name(u)), quote(dag.name(v)));
        }
    }
    out.push_str("}\n");
    out
}
