//! Graphviz export.
//!
//! The mapping is lossy: the parallel-lines glyph becomes `shape=box`, an
//! alternating border becomes `style=dotted`, and an inset arrowhead becomes
//! a bare edge end with a `▷` label.

use std::collections::HashSet;
use std::fmt::Write;

use mpead_core::{derive_border_style, Attachment, BorderStyle, Diagram, Edge, InfoKind};

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn arrowhead(kind: InfoKind) -> &'static str {
    match kind {
        InfoKind::Genotypic => "empty",
        InfoKind::Phenotypic => "normal",
        InfoKind::Evaluative => "vee",
    }
}

fn node_statement(d: &Diagram, id: &str, indent: &str) -> String {
    if let Some(p) = d.population(id) {
        format!("{indent}{} [shape=box, label={}];\n", quote(id), quote(&p.name))
    } else if let Some(c) = d.computation(id) {
        let outgoing: Vec<&Edge> = d.outgoing(id).collect();
        let style = match derive_border_style(c, &outgoing) {
            BorderStyle::Solid => "solid",
            BorderStyle::Dashed => "dashed",
            BorderStyle::Alternating => "dotted",
        };
        format!("{indent}{} [shape=circle, style={style}, label={}];\n", quote(id), quote(&c.name))
    } else {
        String::new()
    }
}

/// DOT text for `d`. Macro boxes and repeat groups become clusters; edges at
/// a box border attach to its first member and clip at the cluster.
pub fn render_dot(d: &Diagram) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph {} {{", quote(&d.name));
    out.push_str("  compound=true;\n  node [fontname=\"Helvetica\", color=\"#000000\"];\n  edge [color=\"#000000\"];\n");

    let mut clustered: HashSet<&str> = HashSet::new();
    for b in &d.macro_boxes {
        let _ = writeln!(out, "  subgraph {} {{", quote(&format!("cluster_{}", b.id)));
        let _ = writeln!(out, "    label={}; style=\"dashed,filled\"; fillcolor=\"#d9d9d9\";", quote(&b.id));
        for m in &b.members {
            clustered.insert(m);
            out.push_str(&node_statement(d, m, "    "));
        }
        out.push_str("  }\n");
    }
    for g in &d.repeat_groups {
        let count = g.shape.counts().iter().map(u32::to_string).collect::<Vec<_>>().join("x");
        let _ = writeln!(out, "  subgraph {} {{", quote(&format!("cluster_{}", g.id)));
        let _ = writeln!(out, "    label={}; style=solid;", quote(&format!("{} … {count}", g.id)));
        for t in &g.template {
            if clustered.insert(t) {
                out.push_str(&node_statement(d, t, "    "));
            }
        }
        out.push_str("  }\n");
    }
    for id in d.populations.iter().map(|p| p.id.as_str()).chain(d.computations.iter().map(|c| c.id.as_str())) {
        if !clustered.contains(id) {
            out.push_str(&node_statement(d, id, "  "));
        }
    }

    for e in d.all_edges() {
        let mut attrs = vec![format!("arrowhead={}", arrowhead(e.kind))];
        if !e.kind.is_genetic() {
            attrs.push("style=dashed".into());
        }
        if e.target.attachment == Attachment::Inset {
            attrs[0] = "arrowhead=none".into();
            attrs.push(format!("xlabel={}", quote("▷")));
        }
        if let Some(l) = &e.source.label {
            attrs.push(format!("taillabel={}", quote(&l.to_string())));
        }
        if let Some(l) = &e.target.label {
            attrs.push(format!("headlabel={}", quote(&l.to_string())));
        }
        if let Some(g) = &e.divergence_group {
            attrs.push(format!("sametail={}", quote(g)));
        }
        let mut end = |node: &str, attr: &str| match d.macro_box(node) {
            Some(b) => {
                attrs.push(format!("{attr}={}", quote(&format!("cluster_{}", b.id))));
                b.members[0].clone()
            }
            None => node.to_string(),
        };
        let from = end(&e.source.node, "ltail");
        let to = end(&e.target.node, "lhead");
        let _ = writeln!(out, "  {} -> {} [{}];", quote(&from), quote(&to), attrs.join(", "));
    }
    out.push_str("}\n");
    out
}
