//! The in-memory diagram model.
//!
//! A [`Diagram`] is what a `.mpead` file describes: population and
//! computation nodes, typed information-flow edges, macro boxes and repeat
//! groups. A [`FlatGraph`] is a diagram with every macro box and repeat group
//! expanded away, which is the form the engine executes.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::ops::Deref;

use serde::Serialize;
use thiserror::Error;

use crate::diag::SourceSpan;

/// The three kinds of information that flow along edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InfoKind {
    Genotypic,
    Phenotypic,
    Evaluative,
}

impl InfoKind {
    pub const ALL: [InfoKind; 3] = [InfoKind::Genotypic, InfoKind::Phenotypic, InfoKind::Evaluative];

    /// Genotypic and phenotypic information both describe a solution.
    pub fn is_genetic(self) -> bool {
        matches!(self, InfoKind::Genotypic | InfoKind::Phenotypic)
    }

    pub fn keyword(self) -> &'static str {
        match self {
            InfoKind::Genotypic => "geno",
            InfoKind::Phenotypic => "pheno",
            InfoKind::Evaluative => "eval",
        }
    }

    pub fn from_keyword(s: &str) -> Option<InfoKind> {
        match s {
            "geno" => Some(InfoKind::Genotypic),
            "pheno" => Some(InfoKind::Phenotypic),
            "eval" => Some(InfoKind::Evaluative),
            _ => None,
        }
    }
}

impl fmt::Display for InfoKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "type", content = "length", rename_all = "lowercase")]
pub enum GenomeSpec {
    Bits(usize),
    Reals(usize),
}

impl GenomeSpec {
    pub fn len(&self) -> usize {
        match *self {
            GenomeSpec::Bits(n) | GenomeSpec::Reals(n) => n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl fmt::Display for GenomeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenomeSpec::Bits(n) => write!(f, "bits({n})"),
            GenomeSpec::Reals(n) => write!(f, "reals({n})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PopulationNode {
    pub id: String,
    pub name: String,
    pub size: Option<usize>,
    pub genome: Option<GenomeSpec>,
    pub algo: Option<String>,
}

impl PopulationNode {
    pub fn new(id: impl Into<String>) -> Self {
        let id = id.into();
        PopulationNode {
            name: id.clone(),
            id,
            size: None,
            genome: None,
            algo: None,
        }
    }

    pub fn with_size(mut self, size: usize) -> Self {
        self.size = Some(size);
        self
    }

    pub fn with_genome(mut self, genome: GenomeSpec) -> Self {
        self.genome = Some(genome);
        self
    }
}

/// A stateless transformation. It has identity and configuration only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComputationNode {
    pub id: String,
    pub name: String,
    pub fn_ref: String,
    pub outputs: BTreeSet<InfoKind>,
}

impl ComputationNode {
    pub fn new(id: impl Into<String>, fn_ref: impl Into<String>, outputs: impl IntoIterator<Item = InfoKind>) -> Self {
        let id = id.into();
        ComputationNode {
            name: id.clone(),
            id,
            fn_ref: fn_ref.into(),
            outputs: outputs.into_iter().collect(),
        }
    }
}

/// Border of a computation node's circle, derived from what it emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BorderStyle {
    Solid,
    Dashed,
    Alternating,
}

impl BorderStyle {
    /// `None` for an empty kind set.
    pub fn from_kinds(kinds: impl IntoIterator<Item = InfoKind>) -> Option<BorderStyle> {
        let (mut genetic, mut evaluative) = (false, false);
        for k in kinds {
            if k.is_genetic() {
                genetic = true;
            } else {
                evaluative = true;
            }
        }
        match (genetic, evaluative) {
            (false, false) => None,
            (true, false) => Some(BorderStyle::Solid),
            (false, true) => Some(BorderStyle::Dashed),
            (true, true) => Some(BorderStyle::Alternating),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BorderStyle::Solid => "solid",
            BorderStyle::Dashed => "dashed",
            BorderStyle::Alternating => "alternating",
        }
    }
}

/// Border style of `node` from the kinds of its outgoing edges, falling back
/// to the declared output kinds when it has none.
pub fn derive_border_style(node: &ComputationNode, outgoing: &[&Edge]) -> BorderStyle {
    BorderStyle::from_kinds(outgoing.iter().map(|e| e.kind))
        .or_else(|| BorderStyle::from_kinds(node.outputs.iter().copied()))
        // Declared kinds are nonempty for any node the parser builds.
        .unwrap_or(BorderStyle::Dashed)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Binding {
    /// Sequential iteration through a population.
    IndexVar { letter: char },
    /// `lo..hi` individuals; `lo == hi` is a plain count.
    Count { lo: u32, hi: u32 },
    /// The whole population.
    All,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct EdgeLabel {
    pub binding: Binding,
    pub selector: Option<String>,
}

impl EdgeLabel {
    pub fn index(letter: char) -> Self {
        EdgeLabel {
            binding: Binding::IndexVar { letter },
            selector: None,
        }
    }

    pub fn count(k: u32, selector: Option<&str>) -> Self {
        EdgeLabel {
            binding: Binding::Count { lo: k, hi: k },
            selector: selector.map(str::to_string),
        }
    }

    pub fn all() -> Self {
        EdgeLabel {
            binding: Binding::All,
            selector: None,
        }
    }

    pub fn index_letter(&self) -> Option<char> {
        match self.binding {
            Binding::IndexVar { letter } => Some(letter),
            _ => None,
        }
    }
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.binding {
            Binding::IndexVar { letter } => write!(f, "{letter}")?,
            Binding::Count { lo, hi } if lo == hi => write!(f, "{lo}")?,
            Binding::Count { lo, hi } => write!(f, "{lo}..{hi}")?,
            Binding::All => f.write_str("*")?,
        }
        if let Some(sel) = &self.selector {
            write!(f, "/{sel}")?;
        }
        Ok(())
    }
}

/// Where an arrowhead sits: touching the node, or inset along the edge
/// (migration).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Attachment {
    #[default]
    AtNode,
    Inset,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Endpoint {
    /// A node id or a macro box id.
    pub node: String,
    pub label: Option<EdgeLabel>,
    pub attachment: Attachment,
}

impl Endpoint {
    pub fn new(node: impl Into<String>) -> Self {
        Endpoint {
            node: node.into(),
            label: None,
            attachment: Attachment::AtNode,
        }
    }

    pub fn labeled(node: impl Into<String>, label: EdgeLabel) -> Self {
        Endpoint {
            label: Some(label),
            ..Endpoint::new(node)
        }
    }

    pub fn inset(mut self) -> Self {
        self.attachment = Attachment::Inset;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub id: String,
    pub source: Endpoint,
    pub target: Endpoint,
    pub kind: InfoKind,
    pub divergence_group: Option<String>,
}

impl Edge {
    pub fn new(id: impl Into<String>, source: Endpoint, target: Endpoint, kind: InfoKind) -> Self {
        Edge {
            id: id.into(),
            source,
            target,
            kind,
            divergence_group: None,
        }
    }

    pub fn in_group(mut self, group: impl Into<String>) -> Self {
        self.divergence_group = Some(group.into());
        self
    }

    pub fn is_migration(&self) -> bool {
        self.target.attachment == Attachment::Inset
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MacroBox {
    pub id: String,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum RepeatShape {
    Linear { count: u32 },
    Grid { rows: u32, cols: u32 },
}

impl RepeatShape {
    pub fn counts(&self) -> Vec<u32> {
        match *self {
            RepeatShape::Linear { count } => vec![count],
            RepeatShape::Grid { rows, cols } => vec![rows, cols],
        }
    }

    pub fn total(&self) -> usize {
        self.counts().iter().map(|&c| c as usize).product()
    }

    /// Index tuples in row-major order.
    pub fn indices(&self) -> Vec<Vec<u32>> {
        match *self {
            RepeatShape::Linear { count } => (0..count).map(|k| vec![k]).collect(),
            RepeatShape::Grid { rows, cols } => (0..rows)
                .flat_map(|r| (0..cols).map(move |c| vec![r, c]))
                .collect(),
        }
    }
}

/// Named rule generating edges between repeat instances.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Adjacency {
    /// `von_neumann` or `moore`.
    pub rule: String,
    pub link: InfoKind,
    pub attachment: Attachment,
}

/// The ellipsis construct: a template instantiated once per index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RepeatGroup {
    pub id: String,
    /// Template node ids; the first is the population named in the source.
    pub template: Vec<String>,
    pub shape: RepeatShape,
    pub adjacency: Option<Adjacency>,
    /// Edges declared inside the group block.
    pub boundary: Vec<Edge>,
}

impl RepeatGroup {
    pub fn primary(&self) -> &str {
        &self.template[0]
    }

    pub fn is_grid(&self) -> bool {
        matches!(self.shape, RepeatShape::Grid { .. })
    }
}

/// Source positions of diagram elements, keyed by [`SourceMap::key`].
///
/// Always compares equal so that diagrams compare structurally regardless of
/// where they were parsed from.
#[derive(Debug, Clone, Default)]
pub struct SourceMap {
    spans: BTreeMap<String, SourceSpan>,
}

impl PartialEq for SourceMap {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for SourceMap {}

impl SourceMap {
    pub fn key(class: &str, id: &str) -> String {
        format!("{class}:{id}")
    }

    pub fn insert(&mut self, class: &str, id: &str, span: SourceSpan) {
        self.spans.insert(Self::key(class, id), span);
    }

    pub fn get(&self, class: &str, id: &str) -> Option<&SourceSpan> {
        self.spans.get(&Self::key(class, id))
    }

    pub fn node(&self, id: &str) -> Option<&SourceSpan> {
        self.get("node", id)
    }

    pub fn edge(&self, id: &str) -> Option<&SourceSpan> {
        self.get("edge", id)
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }
}

/// Borrowed view of whatever an endpoint id names.
#[derive(Debug, Clone, Copy)]
pub enum Element<'a> {
    Population(&'a PopulationNode),
    Computation(&'a ComputationNode),
    Box(&'a MacroBox),
}

impl Element<'_> {
    pub fn is_population(&self) -> bool {
        matches!(self, Element::Population(_))
    }

    pub fn is_computation(&self) -> bool {
        matches!(self, Element::Computation(_))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Diagram {
    pub name: String,
    pub populations: Vec<PopulationNode>,
    pub computations: Vec<ComputationNode>,
    pub edges: Vec<Edge>,
    pub macro_boxes: Vec<MacroBox>,
    pub repeat_groups: Vec<RepeatGroup>,
    #[serde(skip)]
    pub source_map: SourceMap,
}

impl Diagram {
    pub fn empty(name: impl Into<String>) -> Self {
        Diagram {
            name: name.into(),
            ..Diagram::default()
        }
    }

    pub fn population(&self, id: &str) -> Option<&PopulationNode> {
        self.populations.iter().find(|p| p.id == id)
    }

    pub fn computation(&self, id: &str) -> Option<&ComputationNode> {
        self.computations.iter().find(|c| c.id == id)
    }

    pub fn macro_box(&self, id: &str) -> Option<&MacroBox> {
        self.macro_boxes.iter().find(|b| b.id == id)
    }

    pub fn element(&self, id: &str) -> Option<Element<'_>> {
        self.population(id)
            .map(Element::Population)
            .or_else(|| self.computation(id).map(Element::Computation))
            .or_else(|| self.macro_box(id).map(Element::Box))
    }

    /// Id-indexed lookup table; cheaper than [`Diagram::element`] on big graphs.
    pub fn element_index(&self) -> HashMap<&str, Element<'_>> {
        let mut idx = HashMap::with_capacity(self.populations.len() + self.computations.len());
        for p in &self.populations {
            idx.insert(p.id.as_str(), Element::Population(p));
        }
        for c in &self.computations {
            idx.insert(c.id.as_str(), Element::Computation(c));
        }
        for b in &self.macro_boxes {
            idx.insert(b.id.as_str(), Element::Box(b));
        }
        idx
    }

    /// True when `id` names a population or a box made only of populations.
    pub fn is_population_like(&self, id: &str) -> bool {
        match self.element(id) {
            Some(Element::Population(_)) => true,
            Some(Element::Box(b)) => b.members.iter().all(|m| self.population(m).is_some()),
            _ => false,
        }
    }

    /// Top-level edges followed by every repeat group's boundary edges.
    pub fn all_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges
            .iter()
            .chain(self.repeat_groups.iter().flat_map(|g| g.boundary.iter()))
    }

    pub fn outgoing<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a Edge> + 'a {
        self.all_edges().filter(move |e| e.source.node == id)
    }

    pub fn incoming<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a Edge> + 'a {
        self.all_edges().filter(move |e| e.target.node == id)
    }

    pub fn node_count(&self) -> usize {
        self.populations.len() + self.computations.len()
    }

    pub fn is_flat(&self) -> bool {
        self.macro_boxes.is_empty() && self.repeat_groups.is_empty()
    }

    /// Repeat group whose template contains `node`.
    pub fn template_group(&self, node: &str) -> Option<&RepeatGroup> {
        self.repeat_groups.iter().find(|g| g.template.iter().any(|t| t == node))
    }

    /// Macro box that lists `node` as a member.
    pub fn box_of(&self, node: &str) -> Option<&MacroBox> {
        self.macro_boxes.iter().find(|b| b.members.iter().any(|m| m == node))
    }

    /// Equality that ignores edge and divergence-group ids, comparing groups
    /// by the partition they induce instead. Used for parse/serialize
    /// round-trips, where edge ids are regenerated.
    pub fn structural_eq(&self, other: &Diagram) -> bool {
        fn edge_shape(edges: &[Edge]) -> Vec<(Endpoint, Endpoint, InfoKind, Option<usize>)> {
            let mut groups: HashMap<&str, usize> = HashMap::new();
            edges
                .iter()
                .map(|e| {
                    let g = e.divergence_group.as_deref().map(|g| {
                        let next = groups.len();
                        *groups.entry(g).or_insert(next)
                    });
                    (e.source.clone(), e.target.clone(), e.kind, g)
                })
                .collect()
        }
        let groups_eq = self.repeat_groups.len() == other.repeat_groups.len()
            && self.repeat_groups.iter().zip(&other.repeat_groups).all(|(a, b)| {
                a.id == b.id
                    && a.template == b.template
                    && a.shape == b.shape
                    && a.adjacency == b.adjacency
                    && edge_shape(&a.boundary) == edge_shape(&b.boundary)
            });
        self.name == other.name
            && self.populations == other.populations
            && self.computations == other.computations
            && self.macro_boxes == other.macro_boxes
            && groups_eq
            && edge_shape(&self.edges) == edge_shape(&other.edges)
    }
}

/// Everything needed to assemble a [`Diagram`].
#[derive(Debug, Clone, Default)]
pub struct DiagramParts {
    pub name: String,
    pub populations: Vec<PopulationNode>,
    pub computations: Vec<ComputationNode>,
    pub edges: Vec<Edge>,
    pub macro_boxes: Vec<MacroBox>,
    pub repeat_groups: Vec<RepeatGroup>,
    pub source_map: SourceMap,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("reference to unknown node `{0}`")]
    DanglingReference(String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("node `{0}` belongs to more than one macro box")]
    MultipleBoxes(String),
    #[error("node `{0}` is the template of more than one repeat group")]
    TemplateReused(String),
    #[error("macro box `{0}` has no members")]
    EmptyBox(String),
}

impl BuildError {
    pub fn id(&self) -> &str {
        match self {
            BuildError::DanglingReference(id)
            | BuildError::DuplicateId(id)
            | BuildError::MultipleBoxes(id)
            | BuildError::TemplateReused(id)
            | BuildError::EmptyBox(id) => id,
        }
    }
}

/// Every referential-integrity problem in `parts`, in discovery order.
pub fn check_parts(parts: &DiagramParts) -> Vec<BuildError> {
    let mut errors = Vec::new();
    let mut ids: HashSet<&str> = HashSet::new();

    let declared = parts
        .populations
        .iter()
        .map(|p| p.id.as_str())
        .chain(parts.computations.iter().map(|c| c.id.as_str()))
        .chain(parts.macro_boxes.iter().map(|b| b.id.as_str()))
        .chain(parts.repeat_groups.iter().map(|g| g.id.as_str()));
    for id in declared {
        if !ids.insert(id) {
            errors.push(BuildError::DuplicateId(id.to_string()));
        }
    }

    let nodes: HashSet<&str> = parts
        .populations
        .iter()
        .map(|p| p.id.as_str())
        .chain(parts.computations.iter().map(|c| c.id.as_str()))
        .collect();
    let boxes: HashSet<&str> = parts.macro_boxes.iter().map(|b| b.id.as_str()).collect();

    let mut edge_ids: HashSet<&str> = HashSet::new();
    let edges = parts
        .edges
        .iter()
        .chain(parts.repeat_groups.iter().flat_map(|g| g.boundary.iter()));
    for e in edges {
        if !edge_ids.insert(e.id.as_str()) {
            errors.push(BuildError::DuplicateId(e.id.clone()));
        }
        for end in [&e.source, &e.target] {
            let id = end.node.as_str();
            if !nodes.contains(id) && !boxes.contains(id) {
                errors.push(BuildError::DanglingReference(id.to_string()));
            }
        }
    }

    let mut boxed: HashSet<&str> = HashSet::new();
    for b in &parts.macro_boxes {
        if b.members.is_empty() {
            errors.push(BuildError::EmptyBox(b.id.clone()));
        }
        for m in &b.members {
            if !nodes.contains(m.as_str()) {
                errors.push(BuildError::DanglingReference(m.clone()));
            } else if !boxed.insert(m.as_str()) {
                errors.push(BuildError::MultipleBoxes(m.clone()));
            }
        }
    }

    let mut templated: HashSet<&str> = HashSet::new();
    for g in &parts.repeat_groups {
        for t in &g.template {
            if !nodes.contains(t.as_str()) {
                errors.push(BuildError::DanglingReference(t.clone()));
            } else if !templated.insert(t.as_str()) {
                errors.push(BuildError::TemplateReused(t.clone()));
            }
        }
    }
    errors
}

/// Assembles a diagram after the referential-integrity checks. Deeper
/// legality is the validator's job.
pub fn build_diagram(parts: DiagramParts) -> Result<Diagram, BuildError> {
    if let Some(err) = check_parts(&parts).into_iter().next() {
        return Err(err);
    }
    Ok(Diagram {
        name: parts.name,
        populations: parts.populations,
        computations: parts.computations,
        edges: parts.edges,
        macro_boxes: parts.macro_boxes,
        repeat_groups: parts.repeat_groups,
        source_map: parts.source_map,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("diagram still contains {boxes} macro box(es) and {groups} repeat group(s)")]
pub struct NotFlat {
    pub boxes: usize,
    pub groups: usize,
}

/// A diagram with no macro boxes and no repeat groups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct FlatGraph(Diagram);

impl FlatGraph {
    pub fn into_inner(self) -> Diagram {
        self.0
    }

    pub fn diagram(&self) -> &Diagram {
        &self.0
    }
}

impl TryFrom<Diagram> for FlatGraph {
    type Error = NotFlat;

    fn try_from(d: Diagram) -> Result<Self, NotFlat> {
        if d.is_flat() {
            Ok(FlatGraph(d))
        } else {
            Err(NotFlat {
                boxes: d.macro_boxes.len(),
                groups: d.repeat_groups.len(),
            })
        }
    }
}

impl Deref for FlatGraph {
    type Target = Diagram;

    fn deref(&self) -> &Diagram {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2a_parts() -> DiagramParts {
        DiagramParts {
            name: "fig2a".into(),
            populations: vec![PopulationNode::new("P")],
            computations: vec![ComputationNode::new("F", "onemax", [InfoKind::Evaluative])],
            edges: vec![
                Edge::new(
                    "e0",
                    Endpoint::labeled("P", EdgeLabel::index('i')),
                    Endpoint::new("F"),
                    InfoKind::Genotypic,
                ),
                Edge::new(
                    "e1",
                    Endpoint::new("F"),
                    Endpoint::labeled("P", EdgeLabel::index('i')),
                    InfoKind::Evaluative,
                ),
            ],
            ..DiagramParts::default()
        }
    }

    #[test]
    fn genetic_predicate() {
        assert!(InfoKind::Genotypic.is_genetic());
        assert!(InfoKind::Phenotypic.is_genetic());
        assert!(!InfoKind::Evaluative.is_genetic());
    }

    #[test]
    fn border_style_examples() {
        let node = |kinds: &[InfoKind]| ComputationNode::new("F", "f", kinds.iter().copied());
        let edge = |k| Edge::new("e", Endpoint::new("F"), Endpoint::new("P"), k);

        let eval = edge(InfoKind::Evaluative);
        assert_eq!(derive_border_style(&node(&[InfoKind::Evaluative]), &[&eval]), BorderStyle::Dashed);

        let pheno = edge(InfoKind::Phenotypic);
        assert_eq!(derive_border_style(&node(&[InfoKind::Phenotypic]), &[&pheno]), BorderStyle::Solid);

        let geno = edge(InfoKind::Genotypic);
        let mixed = node(&[InfoKind::Genotypic, InfoKind::Evaluative]);
        assert_eq!(derive_border_style(&mixed, &[&geno, &eval]), BorderStyle::Alternating);
        // no outgoing edges: falls back to declared kinds
        assert_eq!(derive_border_style(&mixed, &[]), BorderStyle::Alternating);
        assert_eq!(derive_border_style(&node(&[InfoKind::Phenotypic]), &[]), BorderStyle::Solid);
    }

    #[test]
    fn build_fig2a_shape() {
        let d = build_diagram(fig2a_parts()).unwrap();
        assert_eq!(d.node_count(), 2);
        assert_eq!(d.edges.len(), 2);
    }

    #[test]
    fn dangling_reference() {
        let mut parts = fig2a_parts();
        parts.edges.push(Edge::new("e2", Endpoint::new("X"), Endpoint::new("F"), InfoKind::Genotypic));
        assert_eq!(build_diagram(parts), Err(BuildError::DanglingReference("X".into())));
    }

    #[test]
    fn duplicate_population_id() {
        let mut parts = fig2a_parts();
        parts.populations.push(PopulationNode::new("P"));
        assert_eq!(build_diagram(parts), Err(BuildError::DuplicateId("P".into())));
    }

    #[test]
    fn node_in_two_boxes() {
        let mut parts = fig2a_parts();
        parts.macro_boxes = vec![
            MacroBox { id: "A".into(), members: vec!["P".into()] },
            MacroBox { id: "B".into(), members: vec!["P".into()] },
        ];
        assert_eq!(build_diagram(parts), Err(BuildError::MultipleBoxes("P".into())));
    }

    #[test]
    fn label_display() {
        assert_eq!(EdgeLabel::index('i').to_string(), "i");
        assert_eq!(EdgeLabel::count(10, Some("rand")).to_string(), "10/rand");
        assert_eq!(EdgeLabel::all().to_string(), "*");
        let range = EdgeLabel { binding: Binding::Count { lo: 1, hi: 10 }, selector: Some("rand".into()) };
        assert_eq!(range.to_string(), "1..10/rand");
    }

    #[test]
    fn flat_graph_rejects_boxes() {
        let mut d = build_diagram(fig2a_parts()).unwrap();
        assert!(FlatGraph::try_from(d.clone()).is_ok());
        d.macro_boxes.push(MacroBox { id: "M".into(), members: vec!["P".into()] });
        assert_eq!(FlatGraph::try_from(d).unwrap_err(), NotFlat { boxes: 1, groups: 0 });
    }

    #[test]
    fn repeat_shape_indices() {
        let grid = RepeatShape::Grid { rows: 2, cols: 3 };
        assert_eq!(grid.total(), 6);
        assert_eq!(grid.indices()[4], vec![1, 1]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn kind() -> impl Strategy<Value = InfoKind> {
            prop_oneof![Just(InfoKind::Genotypic), Just(InfoKind::Phenotypic), Just(InfoKind::Evaluative)]
        }

        proptest! {
            #[test]
            fn border_style_is_permutation_invariant(mut kinds in prop::collection::vec(kind(), 1..8), seed in any::<u64>()) {
                let node = ComputationNode::new("F", "f", [InfoKind::Evaluative]);
                let edges: Vec<Edge> = kinds.iter().map(|&k| Edge::new("e", Endpoint::new("F"), Endpoint::new("P"), k)).collect();
                let refs: Vec<&Edge> = edges.iter().collect();
                let before = derive_border_style(&node, &refs);
                // deterministic shuffle
                let n = kinds.len();
                let mut s = seed;
                for i in (1..n).rev() {
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    kinds.swap(i, (s >> 33) as usize % (i + 1));
                }
                let edges: Vec<Edge> = kinds.iter().map(|&k| Edge::new("e", Endpoint::new("F"), Endpoint::new("P"), k)).collect();
                let refs: Vec<&Edge> = edges.iter().collect();
                prop_assert_eq!(before, derive_border_style(&node, &refs));
            }
        }
    }
}
