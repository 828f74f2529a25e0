//! DOT and GraphML renderings of a network.
//!
//! Vertices carry `fitness`, `multiplicity` and `is_global_optimum`; edges carry
//! `count`. In DOT the global optimum is also filled red.

use std::fmt::Write as _;

use crate::lon::Lon;

fn dot_quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// `comment` lines are emitted as `//` comments before the graph.
pub fn to_dot(lon: &Lon, comment: Option<&str>) -> String {
    let go = lon.global_optimum();
    let mut s = String::new();
    if let Some(c) = comment {
        for line in c.lines() {
            let _ = writeln!(s, "// {line}");
        }
    }
    s.push_str("digraph lon {\n");
    for (id, v) in lon.vertices().iter().enumerate() {
        let is_go = go == Some(id);
        let _ = write!(
            s,
            "  {} [fitness={}, multiplicity={}, is_global_optimum={}",
            dot_quote(&v.key),
            dot_quote(&v.fitness.to_string()),
            v.multiplicity,
            is_go
        );
        if is_go {
            s.push_str(", style=filled, fillcolor=red");
        }
        s.push_str("];\n");
    }
    for e in lon.edges() {
        let _ = writeln!(
            s,
            "  {} -> {} [count={}];",
            dot_quote(&lon.vertex(e.source).key),
            dot_quote(&lon.vertex(e.target).key),
            e.count
        );
    }
    s.push_str("}\n");
    s
}

/// `comment` is emitted as an XML comment after the declaration.
pub fn to_graphml(lon: &Lon, comment: Option<&str>) -> String {
    let go = lon.global_optimum();
    let mut s = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    if let Some(c) = comment {
        // "--" is not allowed inside XML comments
        let _ = writeln!(s, "<!-- {} -->", c.replace("--", "- -"));
    }
    s.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    s.push_str("  <key id=\"fitness\" for=\"node\" attr.name=\"fitness\" attr.type=\"double\"/>\n");
    s.push_str("  <key id=\"multiplicity\" for=\"node\" attr.name=\"multiplicity\" attr.type=\"long\"/>\n");
    s.push_str(
        "  <key id=\"is_global_optimum\" for=\"node\" attr.name=\"is_global_optimum\" attr.type=\"boolean\"/>\n",
    );
    s.push_str("  <key id=\"count\" for=\"edge\" attr.name=\"count\" attr.type=\"long\"/>\n");
    s.push_str("  <graph id=\"lon\" edgedefault=\"directed\">\n");
    for (id, v) in lon.vertices().iter().enumerate() {
        let _ = writeln!(s, "    <node id=\"{}\">", xml_escape(&v.key));
        let _ = writeln!(s, "      <data key=\"fitness\">{}</data>", v.fitness);
        let _ = writeln!(s, "      <data key=\"multiplicity\">{}</data>", v.multiplicity);
        let _ = writeln!(s, "      <data key=\"is_global_optimum\">{}</data>", go == Some(id));
        s.push_str("    </node>\n");
    }
    for e in lon.edges() {
        let _ = writeln!(
            s,
            "    <edge source=\"{}\" target=\"{}\">",
            xml_escape(&lon.vertex(e.source).key),
            xml_escape(&lon.vertex(e.target).key)
        );
        let _ = writeln!(s, "      <data key=\"count\">{}</data>", e.count);
        s.push_str("    </edge>\n");
    }
    s.push_str("  </graph>\n</graphml>\n");
    s
}
