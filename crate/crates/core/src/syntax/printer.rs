use std::collections::HashSet;
use std::fmt::Write;

use super::parser::parse_file;
use crate::diag::Diagnostic;
use crate::ir::*;

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

fn endpoint(e: &Endpoint) -> String {
    match &e.label {
        Some(l) => format!("{}[{l}]", e.node),
        None => e.node.clone(),
    }
}

fn arrow(target: &Endpoint) -> &'static str {
    match target.attachment {
        Attachment::AtNode => "->",
        Attachment::Inset => "~>",
    }
}

fn group_name(g: &str) -> &str {
    g.rsplit('.').next().unwrap_or(g)
}

/// Writes `edges` one statement per line. A divergence group whose members
/// are adjacent and share source, arrow and kind becomes one fan-out
/// statement; any other group is written member by member with a `group`
/// clause, which keeps malformed groups representable.
fn edge_lines(out: &mut String, indent: &str, keyword: &str, edges: &[Edge]) {
    let mut printed: HashSet<&str> = HashSet::new();
    for (k, e) in edges.iter().enumerate() {
        let single = |out: &mut String, group: Option<&str>| {
            let _ = write!(out, "{indent}{keyword}{} {} {} : {}", endpoint(&e.source), arrow(&e.target), endpoint(&e.target), e.kind);
            if let Some(g) = group {
                let _ = write!(out, " group {}", group_name(g));
            }
            out.push('\n');
        };
        let Some(g) = e.divergence_group.as_deref() else {
            single(out, None);
            continue;
        };
        if printed.contains(g) {
            continue;
        }
        let members: Vec<usize> = (0..edges.len()).filter(|&o| edges[o].divergence_group.as_deref() == Some(g)).collect();
        let adjacent = members.iter().enumerate().all(|(n, &o)| o == k + n);
        let uniform = members.iter().all(|&o| {
            let m = &edges[o];
            m.source == e.source && m.kind == e.kind && m.target.attachment == e.target.attachment
        });
        if !(adjacent && uniform) {
            single(out, Some(g));
            continue;
        }
        printed.insert(g);
        let targets: Vec<String> = members.iter().map(|&o| endpoint(&edges[o].target)).collect();
        if targets.len() == 1 {
            single(out, Some(g));
            continue;
        }
        let _ = writeln!(
            out,
            "{indent}{keyword}{} {} {{ {} }} : {}",
            endpoint(&e.source),
            arrow(&e.target),
            targets.join(", "),
            e.kind
        );
    }
}

/// Canonical text for `diagram`: populations, computations, edges, macro
/// boxes, then repeat groups, each in declaration order.
///
/// Only the primary node of a repeat template is representable; diagrams
/// taken mid-expansion do not round-trip.
pub fn serialize(diagram: &Diagram) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "diagram {} {{", diagram.name);
    for p in &diagram.populations {
        let mut attrs = Vec::new();
        if let Some(size) = p.size {
            attrs.push(format!("size = {size}"));
        }
        if let Some(g) = p.genome {
            attrs.push(format!("genome = {g}"));
        }
        if let Some(a) = &p.algo {
            attrs.push(format!("algo = {}", quote(a)));
        }
        if p.name != p.id {
            attrs.push(format!("label = {}", quote(&p.name)));
        }
        if attrs.is_empty() {
            let _ = writeln!(out, "  population {}", p.id);
        } else {
            let _ = writeln!(out, "  population {} {{ {} }}", p.id, attrs.join(" "));
        }
    }
    for c in &diagram.computations {
        let kinds: Vec<&str> = c.outputs.iter().map(|k| k.keyword()).collect();
        let _ = write!(out, "  compute {} {{ fn = {}", c.id, quote(&c.fn_ref));
        if !kinds.is_empty() {
            let _ = write!(out, " out = {}", kinds.join(", "));
        }
        if c.name != c.id {
            let _ = write!(out, " label = {}", quote(&c.name));
        }
        out.push_str(" }\n");
    }
    edge_lines(&mut out, "  ", "", &diagram.edges);
    for b in &diagram.macro_boxes {
        let _ = writeln!(out, "  macro {} {{ members = [{}] }}", b.id, b.members.join(", "));
    }
    for g in &diagram.repeat_groups {
        match g.shape {
            RepeatShape::Grid { rows, cols } => {
                let _ = write!(
                    out,
                    "  grid {} {{ rows = {rows} cols = {cols} template = {}",
                    g.id,
                    g.primary()
                );
                if let Some(adj) = &g.adjacency {
                    let _ = write!(out, " adjacency = {} link = {}", adj.rule, adj.link);
                    if adj.attachment == Attachment::Inset {
                        out.push_str(" inset");
                    }
                }
                out.push_str(" }\n");
            }
            RepeatShape::Linear { count } => {
                let _ = write!(out, "  repeat {} {{ count = {count} template = {}", g.id, g.primary());
                if g.boundary.is_empty() {
                    out.push_str(" }\n");
                } else {
                    out.push('\n');
                    edge_lines(&mut out, "    ", "edge ", &g.boundary);
                    out.push_str("  }\n");
                }
            }
        }
    }
    out.push_str("}\n");
    out
}

/// `serialize(parse(text))`.
pub fn format(text: &str) -> Result<String, Vec<Diagnostic>> {
    parse_file("<input>", text).map(|d| serialize(&d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    #[test]
    fn empty_diagram() {
        let d = Diagram::empty("nothing");
        let text = serialize(&d);
        assert_eq!(text, "diagram nothing {\n}\n");
        assert_eq!(parse(&text).unwrap(), d);
    }

    #[test]
    fn fan_out_round_trip() {
        let src = "diagram d { population A population B compute F { fn = \"f\" } F -> { A[i], B[j] } : eval }";
        let d = parse(src).unwrap();
        let text = serialize(&d);
        assert!(text.contains("F -> { A[i], B[j] } : eval"), "{text}");
        assert_eq!(parse(&text).unwrap(), d);
    }

    #[test]
    fn mixed_group_keeps_group_clauses() {
        let src = "diagram d { population A population B compute F { fn = \"f\" } F -> A[i] : eval group g F ~> B : geno group g }";
        let d = parse(src).unwrap();
        let text = serialize(&d);
        assert!(text.contains("F -> A[i] : eval group g\n"), "{text}");
        assert!(text.contains("F ~> B : geno group g\n"), "{text}");
        assert_eq!(parse(&text).unwrap(), d);
    }

    #[test]
    fn shuffled_whitespace_normalizes() {
        let messy = "diagram   d{population P{size=3}\n\n compute F{fn=\"onemax\"}P[i]->F:geno F->P[i]:eval}";
        let canonical = format(messy).unwrap();
        assert_eq!(
            canonical,
            "diagram d {\n  population P { size = 3 }\n  compute F { fn = \"onemax\" out = eval }\n  P[i] -> F : geno\n  F -> P[i] : eval\n}\n"
        );
        assert_eq!(format(&canonical).unwrap(), canonical);
    }

    #[test]
    fn labels_and_names_are_quoted() {
        let src = r#"diagram d { population P { label = "EA \"one\"" } }"#;
        let text = format(src).unwrap();
        assert!(text.contains(r#"label = "EA \"one\"""#), "{text}");
        assert_eq!(parse(&text).unwrap().populations[0].name, "EA \"one\"");
    }
}
