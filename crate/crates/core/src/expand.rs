//! Lowering of macro boxes and repeat groups into a [`FlatGraph`].
//!
//! Id rewriting is deterministic:
//!
//! * a computation attached to a box border is copied once per member as
//!   `X@member`, and every edge touching it is copied as `edge@member`;
//! * repeat instances are `P_k` for linear groups and `P_r_c` for grids,
//!   with 0-based indices, and their edges are `edge_k` / `edge_r_c`;
//! * adjacency edges are `G_r_c>r2_c2`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::diag::Diagnostic;
use crate::ir::*;
use crate::syntax::ADJACENCY_RULES;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExpandError {
    #[error("repeat group `{group}` names template `{template}`, which is not a node")]
    TemplateUnresolved { group: String, template: String },
    #[error("repeat group `{group}` uses unknown adjacency rule `{rule}`")]
    AdjacencyUnknown { group: String, rule: String },
    #[error("edge `{edge}` carries an index label at the border of macro box `{macro_box}`; it is unclear whose individuals it iterates")]
    BoxTargetAmbiguous { edge: String, macro_box: String },
    #[error("edge `{edge}` connects macro box `{macro_box}` to one of its own members")]
    BoxSelfEdge { edge: String, macro_box: String },
    #[error("edge `{edge}` connects two macro boxes")]
    BoxToBox { edge: String },
    #[error("edge `{edge}` links repeat groups `{a}` and `{b}`, whose shapes differ")]
    RepeatShapeMismatch { edge: String, a: String, b: String },
}

impl ExpandError {
    pub fn code(&self) -> &'static str {
        match self {
            ExpandError::TemplateUnresolved { .. } => "X001",
            ExpandError::AdjacencyUnknown { .. } => "X002",
            ExpandError::BoxTargetAmbiguous { .. } => "X003",
            ExpandError::BoxSelfEdge { .. } => "X004",
            ExpandError::BoxToBox { .. } => "X005",
            ExpandError::RepeatShapeMismatch { .. } => "X006",
        }
    }

    /// Diagnostic positioned at the offending element of `diagram`.
    pub fn to_diagnostic(&self, diagram: &Diagram) -> Diagnostic {
        let sm = &diagram.source_map;
        let span = match self {
            ExpandError::TemplateUnresolved { group, .. } | ExpandError::AdjacencyUnknown { group, .. } => {
                sm.get("group", group)
            }
            ExpandError::BoxTargetAmbiguous { edge, .. }
            | ExpandError::BoxSelfEdge { edge, .. }
            | ExpandError::BoxToBox { edge }
            | ExpandError::RepeatShapeMismatch { edge, .. } => sm.edge(edge),
        };
        Diagnostic::error(self.code(), self.to_string(), span.cloned())
    }
}

/// Replaces every macro box by per-member copies of its border edges.
pub fn expand_macros(diagram: &Diagram) -> Result<Diagram, ExpandError> {
    let mut d = diagram.clone();
    let boxes = std::mem::take(&mut d.macro_boxes);
    for b in &boxes {
        expand_box(&mut d, b)?;
    }
    Ok(d)
}

/// Where an edge lives: top level, or the boundary list of a repeat group.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Home {
    Top,
    Group(usize),
}

fn edges_mut(d: &mut Diagram, home: Home) -> &mut Vec<Edge> {
    match home {
        Home::Top => &mut d.edges,
        Home::Group(g) => &mut d.repeat_groups[g].boundary,
    }
}

fn homes(d: &Diagram) -> Vec<Home> {
    std::iter::once(Home::Top).chain((0..d.repeat_groups.len()).map(Home::Group)).collect()
}

fn expand_box(d: &mut Diagram, b: &MacroBox) -> Result<(), ExpandError> {
    let member_set: HashSet<&str> = b.members.iter().map(String::as_str).collect();
    let box_ids: HashSet<String> = d.macro_boxes.iter().map(|m| m.id.clone()).collect();

    // Computations on the far side of a border edge get duplicated.
    let mut duplicated: Vec<String> = Vec::new();
    for e in d.all_edges() {
        let far = if e.source.node == b.id {
            &e.target
        } else if e.target.node == b.id {
            &e.source
        } else {
            continue;
        };
        if far.node == b.id || member_set.contains(far.node.as_str()) {
            return Err(ExpandError::BoxSelfEdge {
                edge: e.id.clone(),
                macro_box: b.id.clone(),
            });
        }
        if box_ids.contains(&far.node) {
            return Err(ExpandError::BoxToBox { edge: e.id.clone() });
        }
        if d.computation(&far.node).is_some() {
            if !duplicated.contains(&far.node) {
                duplicated.push(far.node.clone());
            }
        } else {
            let near = if e.source.node == b.id { &e.source } else { &e.target };
            if near.label.as_ref().is_some_and(|l| l.index_letter().is_some()) {
                return Err(ExpandError::BoxTargetAmbiguous {
                    edge: e.id.clone(),
                    macro_box: b.id.clone(),
                });
            }
        }
    }

    let dup_set: HashSet<&str> = duplicated.iter().map(String::as_str).collect();
    let rename = |end: &Endpoint, m: &str| -> Endpoint {
        let mut end = end.clone();
        if end.node == b.id {
            end.node = m.to_string();
        } else if dup_set.contains(end.node.as_str()) {
            end.node = format!("{}@{m}", end.node);
        }
        end
    };

    for home in homes(d) {
        let old = std::mem::take(edges_mut(d, home));
        let mut new = Vec::with_capacity(old.len());
        for e in old {
            let touches_dup = dup_set.contains(e.source.node.as_str()) || dup_set.contains(e.target.node.as_str());
            let touches_box = e.source.node == b.id || e.target.node == b.id;
            if !touches_dup && !touches_box {
                new.push(e);
                continue;
            }
            let source_copied = dup_set.contains(e.source.node.as_str());
            for m in &b.members {
                let id = format!("{}@{m}", e.id);
                if let Some(span) = d.source_map.edge(&e.id).cloned() {
                    d.source_map.insert("edge", &id, span);
                }
                new.push(Edge {
                    id,
                    source: rename(&e.source, m),
                    target: rename(&e.target, m),
                    kind: e.kind,
                    // one payload per source: copies of a duplicated source are separate groups
                    divergence_group: e
                        .divergence_group
                        .as_ref()
                        .map(|g| if source_copied { format!("{g}@{m}") } else { g.clone() }),
                });
            }
        }
        *edges_mut(d, home) = new;
    }

    // Replace each duplicated computation by its copies, in place.
    let mut comps = Vec::with_capacity(d.computations.len() + duplicated.len() * b.members.len());
    for c in std::mem::take(&mut d.computations) {
        if !dup_set.contains(c.id.as_str()) {
            comps.push(c);
            continue;
        }
        let span = d.source_map.node(&c.id).cloned();
        for m in &b.members {
            let id = format!("{}@{m}", c.id);
            if let Some(span) = &span {
                d.source_map.insert("node", &id, span.clone());
            }
            // a copy attached to a repeat template is itself part of the template
            if let Some(g) = d.repeat_groups.iter_mut().find(|g| g.template.iter().any(|t| t == m)) {
                g.template.push(id.clone());
            }
            comps.push(ComputationNode {
                id,
                name: c.name.clone(),
                fn_ref: c.fn_ref.clone(),
                outputs: c.outputs.clone(),
            });
        }
    }
    d.computations = comps;
    for home in homes(d) {
        group_contiguously(edges_mut(d, home));
    }
    Ok(())
}

/// Stable reorder that moves every divergence-group member to the position of
/// the group's first member.
fn group_contiguously(edges: &mut Vec<Edge>) {
    let mut slots: Vec<Vec<Edge>> = Vec::new();
    let mut slot_of: HashMap<String, usize> = HashMap::new();
    for e in edges.drain(..) {
        match &e.divergence_group {
            Some(g) => match slot_of.get(g) {
                Some(&s) => slots[s].push(e),
                None => {
                    slot_of.insert(g.clone(), slots.len());
                    slots.push(vec![e]);
                }
            },
            None => slots.push(vec![e]),
        }
    }
    edges.extend(slots.into_iter().flatten());
}

fn suffix(idx: &[u32]) -> String {
    idx.iter().map(u32::to_string).collect::<Vec<_>>().join("_")
}

fn neighbours(rule: &str, rows: u32, cols: u32, r: u32, c: u32) -> Vec<(u32, u32)> {
    let offsets: &[(i64, i64)] = match rule {
        "moore" => &[(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)],
        _ => &[(-1, 0), (0, -1), (0, 1), (1, 0)],
    };
    offsets
        .iter()
        .filter_map(|&(dr, dc)| {
            let (nr, nc) = (r as i64 + dr, c as i64 + dc);
            (nr >= 0 && nc >= 0 && nr < rows as i64 && nc < cols as i64).then_some((nr as u32, nc as u32))
        })
        .collect()
}

/// Instantiates every repeat group; macro boxes, if any remain, are expanded
/// first.
pub fn expand_repeats(diagram: &Diagram) -> Result<FlatGraph, ExpandError> {
    let d = if diagram.macro_boxes.is_empty() {
        diagram.clone()
    } else {
        expand_macros(diagram)?
    };
    if d.repeat_groups.is_empty() {
        return Ok(FlatGraph::try_from(d).expect("no boxes or groups remain"));
    }

    let mut owner: HashMap<&str, usize> = HashMap::new();
    for (gi, g) in d.repeat_groups.iter().enumerate() {
        for t in &g.template {
            if d.population(t).is_none() && d.computation(t).is_none() {
                return Err(ExpandError::TemplateUnresolved {
                    group: g.id.clone(),
                    template: t.clone(),
                });
            }
            owner.insert(t.as_str(), gi);
        }
        if let Some(adj) = &g.adjacency {
            if !ADJACENCY_RULES.contains(&adj.rule.as_str()) {
                return Err(ExpandError::AdjacencyUnknown {
                    group: g.id.clone(),
                    rule: adj.rule.clone(),
                });
            }
        }
    }
    let indices: Vec<Vec<Vec<u32>>> = d.repeat_groups.iter().map(|g| g.shape.indices()).collect();

    let mut out = Diagram {
        name: d.name.clone(),
        source_map: d.source_map.clone(),
        ..Diagram::default()
    };

    for p in &d.populations {
        match owner.get(p.id.as_str()) {
            None => out.populations.push(p.clone()),
            Some(&gi) => {
                for idx in &indices[gi] {
                    let s = suffix(idx);
                    let id = format!("{}_{s}", p.id);
                    if let Some(span) = d.source_map.node(&p.id) {
                        out.source_map.insert("node", &id, span.clone());
                    }
                    out.populations.push(PopulationNode {
                        id,
                        name: format!("{}_{s}", p.name),
                        ..p.clone()
                    });
                }
            }
        }
    }
    for c in &d.computations {
        match owner.get(c.id.as_str()) {
            None => out.computations.push(c.clone()),
            Some(&gi) => {
                for idx in &indices[gi] {
                    let s = suffix(idx);
                    let id = format!("{}_{s}", c.id);
                    if let Some(span) = d.source_map.node(&c.id) {
                        out.source_map.insert("node", &id, span.clone());
                    }
                    out.computations.push(ComputationNode {
                        id,
                        name: format!("{}_{s}", c.name),
                        ..c.clone()
                    });
                }
            }
        }
    }

    let groups = &d.repeat_groups;
    for e in d.all_edges() {
        let gs = owner.get(e.source.node.as_str()).copied();
        let gt = owner.get(e.target.node.as_str()).copied();
        let gi = match (gs, gt) {
            (None, None) => {
                out.edges.push(e.clone());
                continue;
            }
            (Some(a), Some(b)) if a != b => {
                if groups[a].shape != groups[b].shape {
                    return Err(ExpandError::RepeatShapeMismatch {
                        edge: e.id.clone(),
                        a: groups[a].id.clone(),
                        b: groups[b].id.clone(),
                    });
                }
                a
            }
            (Some(g), _) | (_, Some(g)) => g,
        };
        for idx in &indices[gi] {
            let s = suffix(idx);
            let inst = |end: &Endpoint| {
                let mut end = end.clone();
                if owner.contains_key(end.node.as_str()) {
                    end.node = format!("{}_{s}", end.node);
                }
                end
            };
            let id = format!("{}_{s}", e.id);
            if let Some(span) = d.source_map.edge(&e.id) {
                out.source_map.insert("edge", &id, span.clone());
            }
            out.edges.push(Edge {
                id,
                source: inst(&e.source),
                target: inst(&e.target),
                kind: e.kind,
                divergence_group: e
                    .divergence_group
                    .as_ref()
                    .map(|g| if gs.is_some() { format!("{g}_{s}") } else { g.clone() }),
            });
        }
    }

    for g in groups {
        let (Some(adj), RepeatShape::Grid { rows, cols }) = (&g.adjacency, g.shape) else {
            continue;
        };
        let span = d.source_map.get("group", &g.id).cloned();
        for r in 0..rows {
            for c in 0..cols {
                for (nr, nc) in neighbours(&adj.rule, rows, cols, r, c) {
                    let id = format!("{}_{r}_{c}>{nr}_{nc}", g.id);
                    if let Some(span) = &span {
                        out.source_map.insert("edge", &id, span.clone());
                    }
                    let target = Endpoint {
                        node: format!("{}_{nr}_{nc}", g.primary()),
                        label: None,
                        attachment: adj.attachment,
                    };
                    out.edges.push(Edge::new(
                        id,
                        Endpoint::new(format!("{}_{r}_{c}", g.primary())),
                        target,
                        adj.link,
                    ));
                }
            }
        }
    }
    group_contiguously(&mut out.edges);
    Ok(FlatGraph::try_from(out).expect("no boxes or groups remain"))
}

/// Full expansion. A diagram that is already flat comes back unchanged.
pub fn expand(diagram: &Diagram) -> Result<FlatGraph, ExpandError> {
    expand_repeats(diagram)
}

/// Element counts of an expanded graph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub populations: usize,
    pub computations: usize,
    pub edges: usize,
    pub genotypic_edges: usize,
    pub phenotypic_edges: usize,
    pub evaluative_edges: usize,
    pub migration_edges: usize,
}

pub fn stats(flat: &FlatGraph) -> Stats {
    let mut s = Stats {
        populations: flat.populations.len(),
        computations: flat.computations.len(),
        edges: flat.edges.len(),
        ..Stats::default()
    };
    for e in &flat.edges {
        match e.kind {
            InfoKind::Genotypic => s.genotypic_edges += 1,
            InfoKind::Phenotypic => s.phenotypic_edges += 1,
            InfoKind::Evaluative => s.evaluative_edges += 1,
        }
        if e.is_migration() {
            s.migration_edges += 1;
        }
    }
    s
}

impl fmt::Display for Stats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "populations: {}", self.populations)?;
        writeln!(f, "computations: {}", self.computations)?;
        writeln!(f, "edges: {}", self.edges)?;
        writeln!(f, "genotypic_edges: {}", self.genotypic_edges)?;
        writeln!(f, "phenotypic_edges: {}", self.phenotypic_edges)?;
        writeln!(f, "evaluative_edges: {}", self.evaluative_edges)?;
        writeln!(f, "migration_edges: {}", self.migration_edges)
    }
}

#[derive(Serialize)]
struct JsonEndpoint<'a> {
    node: &'a str,
    label: Option<String>,
    attachment: Attachment,
}

#[derive(Serialize)]
struct JsonNode<'a> {
    id: &'a str,
    name: &'a str,
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    genome: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    algo: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    function: Option<&'a str>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    outputs: Vec<InfoKind>,
}

#[derive(Serialize)]
struct JsonEdge<'a> {
    id: &'a str,
    kind: InfoKind,
    source: JsonEndpoint<'a>,
    target: JsonEndpoint<'a>,
    divergence_group: Option<&'a str>,
}

#[derive(Serialize)]
struct JsonGraph<'a> {
    name: &'a str,
    nodes: Vec<JsonNode<'a>>,
    edges: Vec<JsonEdge<'a>>,
}

/// JSON document with `nodes[]` and `edges[]`; labels are written in their
/// textual form (`i`, `10/rand`, `*`).
pub fn to_json(flat: &FlatGraph) -> String {
    fn endpoint(e: &Endpoint) -> JsonEndpoint<'_> {
        JsonEndpoint {
            node: &e.node,
            label: e.label.as_ref().map(|l| l.to_string()),
            attachment: e.attachment,
        }
    }
    let mut nodes: Vec<JsonNode<'_>> = flat
        .populations
        .iter()
        .map(|p| JsonNode {
            id: &p.id,
            name: &p.name,
            kind: "population",
            size: p.size,
            genome: p.genome.map(|g| g.to_string()),
            algo: p.algo.as_deref(),
            function: None,
            outputs: Vec::new(),
        })
        .collect();
    nodes.extend(flat.computations.iter().map(|c| JsonNode {
        id: &c.id,
        name: &c.name,
        kind: "computation",
        size: None,
        genome: None,
        algo: None,
        function: Some(&c.fn_ref),
        outputs: c.outputs.iter().copied().collect(),
    }));
    let graph = JsonGraph {
        name: &flat.name,
        nodes,
        edges: flat
            .edges
            .iter()
            .map(|e| JsonEdge {
                id: &e.id,
                kind: e.kind,
                source: endpoint(&e.source),
                target: endpoint(&e.target),
                divergence_group: e.divergence_group.as_deref(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&graph).expect("plain data serializes")
}

/// Per-group instance counts, handy when reporting on unexpanded diagrams.
pub fn instance_counts(diagram: &Diagram) -> BTreeMap<String, usize> {
    diagram.repeat_groups.iter().map(|g| (g.id.clone(), g.shape.total())).collect()
}
