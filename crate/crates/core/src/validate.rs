//! Well-formedness rules for diagrams.
//!
//! Each rule has a stable code (`V1`..`V10`). [`validate`] returns an empty
//! list exactly when the diagram is legal; warnings never make it illegal.

use std::collections::{BTreeMap, HashMap};

use crate::diag::{Diagnostic, Severity, SourceSpan};
use crate::ir::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rule {
    pub code: &'static str,
    pub description: &'static str,
    pub severity: Severity,
}

pub const RULES: [Rule; 10] = [
    Rule {
        code: "V1",
        description: "an asterisk label takes no selector",
        severity: Severity::Error,
    },
    Rule {
        code: "V2",
        description: "repeat and grid counts must exceed 2",
        severity: Severity::Error,
    },
    Rule {
        code: "V3",
        description: "inset arrowheads carry genetic information into a population",
        severity: Severity::Error,
    },
    Rule {
        code: "V4",
        description: "computation nodes need at least one input and one output",
        severity: Severity::Error,
    },
    Rule {
        code: "V5",
        description: "edges of a divergence group share their source and kind",
        severity: Severity::Error,
    },
    Rule {
        code: "V6",
        description: "computation outputs match the declared output kinds",
        severity: Severity::Error,
    },
    Rule {
        code: "V7",
        description: "evaluative edges into a population say where to store the value",
        severity: Severity::Error,
    },
    Rule {
        code: "V8",
        description: "labels only appear on population endpoints",
        severity: Severity::Error,
    },
    Rule {
        code: "V9",
        description: "genetic edges touching a population denote hierarchical composition",
        severity: Severity::Warning,
    },
    Rule {
        code: "V10",
        description: "cycles through computation nodes alone have no state to break them",
        severity: Severity::Error,
    },
];

pub fn rule(code: &str) -> Option<&'static Rule> {
    RULES.iter().find(|r| r.code == code)
}

fn rule_number(code: &str) -> u32 {
    code.trim_start_matches('V').parse().unwrap_or(u32::MAX)
}

struct Ctx<'a> {
    d: &'a Diagram,
    idx: HashMap<&'a str, Element<'a>>,
    out: Vec<Diagnostic>,
}

impl<'a> Ctx<'a> {
    fn population_like(&self, id: &str) -> bool {
        match self.idx.get(id) {
            Some(Element::Population(_)) => true,
            Some(Element::Box(b)) => b
                .members
                .iter()
                .all(|m| matches!(self.idx.get(m.as_str()), Some(Element::Population(_)))),
            _ => false,
        }
    }

    fn edge_span(&self, e: &Edge) -> Option<SourceSpan> {
        self.d.source_map.edge(&e.id).cloned()
    }

    fn label_span(&self, e: &Edge, end: &str) -> Option<SourceSpan> {
        self.d
            .source_map
            .get("label", &format!("{}:{end}", e.id))
            .cloned()
            .or_else(|| self.edge_span(e))
    }

    fn emit(&mut self, code: &'static str, msg: String, span: Option<SourceSpan>) {
        let severity = rule(code).map_or(Severity::Error, |r| r.severity);
        self.emit_as(severity, code, msg, span);
    }

    fn emit_as(&mut self, severity: Severity, code: &'static str, msg: String, span: Option<SourceSpan>) {
        self.out.push(Diagnostic {
            severity,
            code,
            message: msg,
            span,
        });
    }
}

/// Checks every rule. Diagnostics are ordered by rule code, then by span.
pub fn validate(diagram: &Diagram) -> Vec<Diagnostic> {
    let mut cx = Ctx {
        d: diagram,
        idx: diagram.element_index(),
        out: Vec::new(),
    };
    let edges: Vec<&Edge> = diagram.all_edges().collect();

    for e in &edges {
        check_labels(&mut cx, e);
        check_inset(&mut cx, e);
        check_storage(&mut cx, e);
    }
    check_counts(&mut cx);
    check_computation_io(&mut cx, &edges);
    check_divergence(&mut cx, &edges);
    check_output_kinds(&mut cx, &edges);
    check_computation_cycles(&mut cx, &edges);

    let mut out = cx.out;
    out.sort_by(|a, b| (rule_number(a.code), &a.span).cmp(&(rule_number(b.code), &b.span)));
    out
}

fn check_labels(cx: &mut Ctx<'_>, e: &Edge) {
    for (end, which) in [(&e.source, "source"), (&e.target, "target")] {
        let Some(label) = &end.label else { continue };
        if label.binding == Binding::All && label.selector.is_some() {
            let msg = format!(
                "label `{label}` on `{}`: an asterisk selects the whole population, so no selector may follow it",
                end.node
            );
            let span = cx.label_span(e, which);
            cx.emit("V1", msg, span);
        }
        if !cx.population_like(&end.node) {
            let msg = format!(
                "label `{label}` on `{}`: labels index individuals and are only allowed on population endpoints",
                end.node
            );
            let span = cx.label_span(e, which);
            cx.emit("V8", msg, span);
        }
    }
}

fn check_inset(cx: &mut Ctx<'_>, e: &Edge) {
    if e.source.attachment == Attachment::Inset {
        let span = cx.edge_span(e);
        cx.emit("V3", format!("edge from `{}`: inset arrowheads belong on the target end", e.source.node), span);
    }
    if e.target.attachment != Attachment::Inset {
        return;
    }
    if !e.kind.is_genetic() {
        let span = cx.edge_span(e);
        cx.emit(
            "V3",
            format!(
                "inset edge `{}` ~> `{}` carries {} information; migration transfers genetic information",
                e.source.node, e.target.node, e.kind
            ),
            span,
        );
    }
    if !cx.population_like(&e.target.node) {
        let span = cx.edge_span(e);
        cx.emit("V3", format!("inset edge into `{}`: migration targets must be populations", e.target.node), span);
    }
}

fn check_storage(cx: &mut Ctx<'_>, e: &Edge) {
    if !cx.population_like(&e.target.node) {
        return;
    }
    if e.kind == InfoKind::Evaluative && e.target.label.is_none() {
        let span = cx.edge_span(e);
        cx.emit(
            "V7",
            format!(
                "evaluative edge into `{}` needs a target label saying where the value is stored (e.g. `{}[i]`)",
                e.target.node, e.target.node
            ),
            span,
        );
    }
    if e.kind.is_genetic() && e.target.attachment == Attachment::AtNode {
        let span = cx.edge_span(e);
        cx.emit(
            "V9",
            format!(
                "genetic edge touching `{}` denotes hierarchical composition (modifying individuals); use `~>` for migration",
                e.target.node
            ),
            span,
        );
    }
}

fn check_counts(cx: &mut Ctx<'_>) {
    for g in &cx.d.repeat_groups {
        if let Some(&bad) = g.shape.counts().iter().find(|&&c| c <= 2) {
            let span = cx.d.source_map.get("group", &g.id).cloned();
            cx.emit(
                "V2",
                format!("`{}` has count {bad}; an ellipsis stands for more than 2 elements", g.id),
                span,
            );
        }
    }
}

fn check_computation_io(cx: &mut Ctx<'_>, edges: &[&Edge]) {
    for c in &cx.d.computations {
        let boxed = cx.d.box_of(&c.id).map(|b| b.id.as_str());
        let touches = |id: &str| id == c.id || Some(id) == boxed;
        let inputs = edges.iter().filter(|e| touches(&e.target.node)).count();
        let outputs = edges.iter().filter(|e| touches(&e.source.node)).count();
        let missing = match (inputs, outputs) {
            (0, 0) => "inputs or outputs",
            (0, _) => "inputs",
            (_, 0) => "outputs",
            _ => continue,
        };
        let span = cx.d.source_map.node(&c.id).cloned();
        cx.emit(
            "V4",
            format!("computation `{}` has no {missing}; a computation node only transforms input into output", c.id),
            span,
        );
    }
}

fn check_divergence(cx: &mut Ctx<'_>, edges: &[&Edge]) {
    let mut groups: BTreeMap<&str, Vec<&Edge>> = BTreeMap::new();
    for e in edges {
        if let Some(g) = &e.divergence_group {
            groups.entry(g.as_str()).or_default().push(e);
        }
    }
    for (g, members) in groups {
        let first = members[0];
        for e in &members[1..] {
            if e.source != first.source || e.kind != first.kind {
                let span = cx.edge_span(e);
                cx.emit(
                    "V5",
                    format!(
                        "edge `{}` in divergence group `{g}` differs from `{}` in its source or kind",
                        e.id, first.id
                    ),
                    span,
                );
            }
        }
    }
}

fn check_output_kinds(cx: &mut Ctx<'_>, edges: &[&Edge]) {
    for c in &cx.d.computations {
        let outgoing: Vec<&Edge> = edges.iter().copied().filter(|e| e.source.node == c.id).collect();
        for e in &outgoing {
            if !c.outputs.contains(&e.kind) {
                let declared: Vec<&str> = c.outputs.iter().map(|k| k.keyword()).collect();
                let span = cx.edge_span(e);
                cx.emit(
                    "V6",
                    format!(
                        "`{}` emits {} but declares `out = {}`",
                        c.id,
                        e.kind,
                        declared.join(", ")
                    ),
                    span,
                );
            }
        }
        if c.outputs.len() == 1 && derive_border_style(c, &outgoing) == BorderStyle::Alternating {
            let span = cx.d.source_map.node(&c.id).cloned();
            cx.emit_as(
                Severity::Warning,
                "V6",
                format!("`{}` emits mixed information kinds but declares only one output kind", c.id),
                span,
            );
        }
    }
}

fn check_computation_cycles(cx: &mut Ctx<'_>, edges: &[&Edge]) {
    let comps: Vec<&str> = cx.d.computations.iter().map(|c| c.id.as_str()).collect();
    let index: HashMap<&str, usize> = comps.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut adj = vec![Vec::new(); comps.len()];
    for e in edges {
        if let (Some(&a), Some(&b)) = (index.get(e.source.node.as_str()), index.get(e.target.node.as_str())) {
            adj[a].push(b);
        }
    }
    // iterative three-colour DFS; report the node closing each back edge
    let mut colour = vec![0u8; comps.len()];
    let mut reported = vec![false; comps.len()];
    for root in 0..comps.len() {
        if colour[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        colour[root] = 1;
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            if let Some(&succ) = adj[node].get(*next) {
                *next += 1;
                match colour[succ] {
                    0 => {
                        colour[succ] = 1;
                        stack.push((succ, 0));
                    }
                    1 if !reported[succ] => {
                        reported[succ] = true;
                        let span = cx.d.source_map.node(comps[succ]).cloned();
                        cx.emit(
                            "V10",
                            format!(
                                "computation `{}` is on a cycle of computation nodes; cycles must pass through a population",
                                comps[succ]
                            ),
                            span,
                        );
                    }
                    _ => {}
                }
            } else {
                colour[node] = 2;
                stack.pop();
            }
        }
    }
}
