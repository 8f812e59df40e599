//! Placement of diagram elements and routing of edges.
//!
//! Layout works on *units*: a plain node, a repeat composite (first and last
//! instance with an ellipsis and count bar), or a macro cluster holding its
//! members in a near-square grid. Units never overlap; edges are straight
//! segments between unit outlines, offset sideways when several edges join
//! the same pair.

use std::collections::{BTreeMap, HashMap, HashSet};

use mpead_core::{derive_border_style, BorderStyle, Diagram, Edge, EdgeLabel, InfoKind, RepeatShape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geom::{Outline, Point, Rect};
use crate::RenderError;

/// Fraction of the path length at which an inset arrowhead sits.
pub const INSET_POSITION: f64 = 0.6;

const POP_HEIGHT: f64 = 56.0;
const ELLIPSIS_GAP: f64 = 44.0;
const BAR_SPACE: f64 = 28.0;
const CLUSTER_GAP: f64 = 24.0;
const PARALLEL_OFFSET: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayoutAlgorithm {
    Layered,
    Force,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutConfig {
    pub seed: u64,
    pub algorithm: LayoutAlgorithm,
    /// Minimum gap between units.
    pub spacing: f64,
    pub padding: f64,
    /// Iteration budget of the force layout.
    pub max_iterations: usize,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig {
            seed: 0,
            algorithm: LayoutAlgorithm::Layered,
            spacing: 40.0,
            padding: 20.0,
            max_iterations: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeShape {
    Population,
    Computation(BorderStyle),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeGeom {
    pub id: String,
    pub name: String,
    pub shape: NodeShape,
    pub outline: Outline,
    /// Set for the drawn instances of a repeat template.
    pub instance: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterGeom {
    pub id: String,
    pub rect: Rect,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bar {
    pub from: Point,
    pub to: Point,
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepeatGeom {
    pub id: String,
    pub rect: Rect,
    pub ellipsis: Point,
    pub bars: Vec<Bar>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelGeom {
    pub text: String,
    pub at: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeGeom {
    pub id: String,
    pub kind: InfoKind,
    pub inset: bool,
    /// Polyline; for inset edges the single interior point is the inset
    /// arrowhead position.
    pub points: Vec<Point>,
    /// Drawn as a loop returning to its own node.
    pub is_loop: bool,
    pub group: Option<String>,
    pub labels: Vec<LabelGeom>,
}

/// Shared first segment of a divergence group.
#[derive(Debug, Clone, PartialEq)]
pub struct TrunkGeom {
    pub group: String,
    pub kind: InfoKind,
    pub from: Point,
    pub split: Point,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Layout {
    pub width: f64,
    pub height: f64,
    pub nodes: Vec<NodeGeom>,
    pub clusters: Vec<ClusterGeom>,
    pub repeats: Vec<RepeatGeom>,
    pub edges: Vec<EdgeGeom>,
    pub trunks: Vec<TrunkGeom>,
}

#[derive(Debug, Clone)]
enum Unit {
    Node(String),
    Repeat(usize),
    Cluster(usize, Vec<Unit>),
}

struct Builder<'a> {
    d: &'a Diagram,
    out: Layout,
    anchors: HashMap<String, Outline>,
}

fn node_size(d: &Diagram, id: &str) -> (f64, f64) {
    if let Some(p) = d.population(id) {
        let w = (7.0 * p.name.chars().count() as f64 + 24.0).max(90.0);
        (w, POP_HEIGHT)
    } else {
        let name = d.computation(id).map_or(id, |c| c.name.as_str());
        let r = (3.5 * name.chars().count() as f64 + 12.0).max(26.0);
        (2.0 * r, 2.0 * r)
    }
}

fn grid_dims(n: usize) -> (usize, usize) {
    let cols = (n as f64).sqrt().ceil().max(1.0) as usize;
    (cols, n.div_ceil(cols))
}

impl<'a> Builder<'a> {
    fn measure(&self, u: &Unit) -> (f64, f64) {
        match u {
            Unit::Node(id) => node_size(self.d, id),
            Unit::Repeat(g) => {
                let group = &self.d.repeat_groups[*g];
                let (w, h) = node_size(self.d, group.primary());
                let extra = if group.is_grid() { 36.0 } else { 0.0 };
                (2.0 * w + ELLIPSIS_GAP + extra, h + BAR_SPACE)
            }
            Unit::Cluster(_, members) => {
                let (inner_w, inner_h) = self.cluster_inner(members);
                let h = inner_h + 32.0;
                (inner_w + 2.0 * (0.3 * h + 12.0), h)
            }
        }
    }

    fn cluster_inner(&self, members: &[Unit]) -> (f64, f64) {
        let (cols, rows) = grid_dims(members.len());
        let (cw, ch) = self.cell(members);
        (
            cols as f64 * cw + (cols as f64 - 1.0) * CLUSTER_GAP,
            rows as f64 * ch + (rows as f64 - 1.0) * CLUSTER_GAP,
        )
    }

    fn cell(&self, members: &[Unit]) -> (f64, f64) {
        members.iter().map(|m| self.measure(m)).fold((0.0, 0.0), |(a, b), (w, h)| (f64::max(a, w), f64::max(b, h)))
    }

    fn node_geom(&self, id: &str, center: Point, instance: Option<String>) -> NodeGeom {
        let (w, h) = node_size(self.d, id);
        if let Some(p) = self.d.population(id) {
            NodeGeom {
                id: id.to_string(),
                name: p.name.clone(),
                shape: NodeShape::Population,
                outline: Outline::Rect(Rect::centered(center, w, h)),
                instance,
            }
        } else {
            let c = self.d.computation(id).expect("layout units name nodes");
            let outgoing: Vec<&Edge> = self.d.outgoing(id).collect();
            NodeGeom {
                id: id.to_string(),
                name: c.name.clone(),
                shape: NodeShape::Computation(derive_border_style(c, &outgoing)),
                outline: Outline::Circle { c: center, r: w / 2.0 },
                instance,
            }
        }
    }

    /// Emits geometry for `u` with its top-left corner at (`x`, `y`).
    fn place(&mut self, u: &Unit, x: f64, y: f64) {
        let (w, h) = self.measure(u);
        match u {
            Unit::Node(id) => {
                let g = self.node_geom(id, Rect::new(x, y, w, h).center(), None);
                self.anchors.insert(id.clone(), g.outline);
                self.out.nodes.push(g);
            }
            Unit::Repeat(gi) => {
                let group = &self.d.repeat_groups[*gi];
                let primary = group.primary().to_string();
                let (iw, ih) = node_size(self.d, &primary);
                let counts = group.shape.counts();
                let last = match group.shape {
                    RepeatShape::Linear { count } => format!("{}", count.saturating_sub(1)),
                    RepeatShape::Grid { rows, cols } => {
                        format!("{}_{}", rows.saturating_sub(1), cols.saturating_sub(1))
                    }
                };
                let first = vec!["0"; counts.len()].join("_");
                let c0 = Point::new(x + iw / 2.0, y + ih / 2.0);
                let c1 = Point::new(x + 1.5 * iw + ELLIPSIS_GAP, y + ih / 2.0);
                let a = self.node_geom(&primary, c0, Some(first));
                let b = self.node_geom(&primary, c1, Some(last));
                self.out.nodes.push(a);
                self.out.nodes.push(b);
                let bar_y = y + ih + 12.0;
                let bar_right = x + 2.0 * iw + ELLIPSIS_GAP;
                let mut bars = vec![Bar {
                    from: Point::new(x, bar_y),
                    to: Point::new(bar_right, bar_y),
                    count: *counts.last().unwrap_or(&0),
                }];
                if let RepeatShape::Grid { rows, .. } = group.shape {
                    let bx = bar_right + 14.0;
                    bars.push(Bar {
                        from: Point::new(bx, y),
                        to: Point::new(bx, y + ih),
                        count: rows,
                    });
                }
                let rect = Rect::new(x, y, w, h);
                for t in &group.template {
                    self.anchors.insert(t.clone(), Outline::Rect(Rect::new(x, y, bar_right - x, ih)));
                }
                self.out.repeats.push(RepeatGeom {
                    id: group.id.clone(),
                    rect,
                    ellipsis: Point::new(x + iw + ELLIPSIS_GAP / 2.0, y + ih / 2.0),
                    bars,
                });
            }
            Unit::Cluster(bi, members) => {
                let rect = Rect::new(x, y, w, h);
                let id = self.d.macro_boxes[*bi].id.clone();
                self.anchors.insert(id.clone(), Outline::Rect(rect));
                self.out.clusters.push(ClusterGeom { id, rect });
                let (inner_w, inner_h) = self.cluster_inner(members);
                let (cols, _) = grid_dims(members.len());
                let (cw, ch) = self.cell(members);
                let ox = x + (w - inner_w) / 2.0;
                let oy = y + (h - inner_h) / 2.0;
                for (k, m) in members.iter().enumerate() {
                    let (mw, mh) = self.measure(m);
                    let cx = ox + (k % cols) as f64 * (cw + CLUSTER_GAP) + (cw - mw) / 2.0;
                    let cy = oy + (k / cols) as f64 * (ch + CLUSTER_GAP) + (ch - mh) / 2.0;
                    self.place(m, cx, cy);
                }
            }
        }
    }
}

/// Top-level units, and for every endpoint id the index of its unit.
fn units(d: &Diagram) -> (Vec<Unit>, HashMap<String, usize>) {
    let member_unit = |id: &str| match d.template_group(id) {
        Some(g) if g.primary() == id => Some(Unit::Repeat(d.repeat_groups.iter().position(|x| x.id == g.id).unwrap())),
        Some(_) => None,
        None => Some(Unit::Node(id.to_string())),
    };
    let mut out = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let ids = d.populations.iter().map(|p| p.id.as_str()).chain(d.computations.iter().map(|c| c.id.as_str()));
    for id in ids {
        if index.contains_key(id) {
            continue;
        }
        if let Some(b) = d.box_of(id) {
            let bi = d.macro_boxes.iter().position(|x| x.id == b.id).unwrap();
            let members: Vec<Unit> = b.members.iter().filter_map(|m| member_unit(m)).collect();
            let k = out.len();
            index.insert(b.id.clone(), k);
            for m in &b.members {
                index.insert(m.clone(), k);
                if let Some(g) = d.template_group(m) {
                    for t in &g.template {
                        index.insert(t.clone(), k);
                    }
                }
            }
            out.push(Unit::Cluster(bi, members));
        } else if let Some(u) = member_unit(id) {
            let k = out.len();
            if let Some(g) = d.template_group(id) {
                for t in &g.template {
                    index.insert(t.clone(), k);
                }
            }
            index.insert(id.to_string(), k);
            out.push(u);
        }
    }
    // secondary template members share their group's composite
    for g in &d.repeat_groups {
        if let Some(&k) = index.get(g.primary()) {
            for t in &g.template {
                index.entry(t.clone()).or_insert(k);
            }
        }
    }
    (out, index)
}

/// Unit-level digraph used for placement, without self loops or duplicates.
fn unit_edges(d: &Diagram, index: &HashMap<String, usize>, skip_inset: bool) -> Vec<(usize, usize)> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for e in d.all_edges() {
        if skip_inset && e.is_migration() {
            continue;
        }
        if let (Some(&a), Some(&b)) = (index.get(&e.source.node), index.get(&e.target.node)) {
            if a != b && seen.insert((a, b)) {
                out.push((a, b));
            }
        }
    }
    out
}

fn layered_positions(n: usize, sizes: &[(f64, f64)], edges: &[(usize, usize)], cfg: &LayoutConfig) -> Vec<Point> {
    let mut succ = vec![Vec::new(); n];
    for &(a, b) in edges {
        succ[a].push(b);
    }
    // break cycles: drop DFS back edges
    let mut state = vec![0u8; n];
    let mut dag: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if state[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        state[root] = 1;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if let Some(&w) = succ[v].get(*next) {
                *next += 1;
                match state[w] {
                    0 => {
                        dag.push((v, w));
                        state[w] = 1;
                        stack.push((w, 0));
                    }
                    2 => dag.push((v, w)),
                    _ => {}
                }
            } else {
                state[v] = 2;
                stack.pop();
            }
        }
    }

    // longest-path layering over a topological order
    let mut indeg = vec![0usize; n];
    let mut dsucc = vec![Vec::new(); n];
    let mut dpred = vec![Vec::new(); n];
    for &(a, b) in &dag {
        indeg[b] += 1;
        dsucc[a].push(b);
        dpred[b].push(a);
    }
    let mut layer = vec![0usize; n];
    let mut ready: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).rev().collect();
    while let Some(v) = ready.pop() {
        for &w in &dsucc[v] {
            layer[w] = layer[w].max(layer[v] + 1);
            indeg[w] -= 1;
            if indeg[w] == 0 {
                ready.push(w);
            }
        }
    }
    let depth = layer.iter().copied().max().map_or(0, |m| m + 1);
    let mut layers: Vec<Vec<usize>> = vec![Vec::new(); depth];
    for v in 0..n {
        layers[layer[v]].push(v);
    }

    // barycenter sweeps, ties resolved by current order
    let mut pos = vec![0.0f64; n];
    let renumber = |layers: &Vec<Vec<usize>>, pos: &mut Vec<f64>| {
        for l in layers {
            for (k, &v) in l.iter().enumerate() {
                pos[v] = k as f64;
            }
        }
    };
    renumber(&layers, &mut pos);
    for sweep in 0..8 {
        let down = sweep % 2 == 0;
        let order: Vec<usize> = if down { (1..depth).collect() } else { (0..depth.saturating_sub(1)).rev().collect() };
        for li in order {
            let neigh = if down { &dpred } else { &dsucc };
            let mut keyed: Vec<(f64, f64, usize)> = layers[li]
                .iter()
                .map(|&v| {
                    let ns = &neigh[v];
                    let bc = if ns.is_empty() { pos[v] } else { ns.iter().map(|&u| pos[u]).sum::<f64>() / ns.len() as f64 };
                    (bc, pos[v], v)
                })
                .collect();
            keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
            layers[li] = keyed.into_iter().map(|k| k.2).collect();
            renumber(&layers, &mut pos);
        }
    }

    // rows top to bottom, each centred on the widest row
    let row_width = |l: &Vec<usize>| {
        l.iter().map(|&v| sizes[v].0).sum::<f64>() + cfg.spacing * (l.len().saturating_sub(1)) as f64
    };
    let max_w = layers.iter().map(row_width).fold(0.0, f64::max);
    let mut centers = vec![Point::new(0.0, 0.0); n];
    let mut y = cfg.padding;
    for l in &layers {
        let row_h = l.iter().map(|&v| sizes[v].1).fold(0.0, f64::max);
        let mut x = cfg.padding + (max_w - row_width(l)) / 2.0;
        for &v in l {
            let (w, _) = sizes[v];
            centers[v] = Point::new(x + w / 2.0, y + row_h / 2.0);
            x += w + cfg.spacing;
        }
        y += row_h + 1.5 * cfg.spacing;
    }
    centers
}

fn unit_rects(centers: &[Point], sizes: &[(f64, f64)], margin: f64) -> Vec<Rect> {
    centers
        .iter()
        .zip(sizes)
        .map(|(&c, &(w, h))| Rect::centered(c, w + margin, h + margin))
        .collect()
}

fn force_positions(
    n: usize,
    sizes: &[(f64, f64)],
    edges: &[(usize, usize)],
    cfg: &LayoutConfig,
) -> Result<Vec<Point>, RenderError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let avg = sizes.iter().map(|&(w, h)| w.max(h)).sum::<f64>() / n.max(1) as f64;
    let k = avg + cfg.spacing;
    let side = (n as f64).sqrt() * k;
    let mut p: Vec<Point> = (0..n)
        .map(|_| Point::new(rng.random_range(0.0..side.max(1.0)), rng.random_range(0.0..side.max(1.0))))
        .collect();
    let mut temp = side / 4.0;
    for _ in 0..cfg.max_iterations {
        let mut disp = vec![Point::new(0.0, 0.0); n];
        for a in 0..n {
            for b in (a + 1)..n {
                let delta = p[a] - p[b];
                let dist = delta.len().max(1.0);
                let push = delta.unit() * (k * k / dist);
                disp[a] = disp[a] + push;
                disp[b] = disp[b] - push;
            }
        }
        for &(a, b) in edges {
            let delta = p[a] - p[b];
            let dist = delta.len().max(1.0);
            let pull = delta.unit() * (dist * dist / k);
            disp[a] = disp[a] - pull;
            disp[b] = disp[b] + pull;
        }
        for v in 0..n {
            let l = disp[v].len();
            if l > 0.0 {
                p[v] = p[v] + disp[v].unit() * l.min(temp);
            }
        }
        temp = (temp * 0.97).max(1.0);
    }

    // push overlapping units apart along the axis of least penetration
    let margin = cfg.spacing / 2.0;
    let mut clean = n < 2;
    for _ in 0..cfg.max_iterations {
        let rects = unit_rects(&p, sizes, margin);
        let mut moved = false;
        for a in 0..n {
            for b in (a + 1)..n {
                if !rects[a].overlaps(&rects[b]) {
                    continue;
                }
                moved = true;
                let ox = (rects[a].right().min(rects[b].right()) - rects[a].x.max(rects[b].x)) / 2.0 + 0.5;
                let oy = (rects[a].bottom().min(rects[b].bottom()) - rects[a].y.max(rects[b].y)) / 2.0 + 0.5;
                let delta = if ox < oy {
                    let s = if p[a].x <= p[b].x { -1.0 } else { 1.0 };
                    Point::new(s * ox, 0.0)
                } else {
                    let s = if p[a].y <= p[b].y { -1.0 } else { 1.0 };
                    Point::new(0.0, s * oy)
                };
                p[a] = p[a] + delta;
                p[b] = p[b] - delta;
            }
        }
        if !moved {
            clean = true;
            break;
        }
    }
    if !clean {
        return Err(RenderError::LayoutFailure {
            iterations: cfg.max_iterations,
        });
    }

    let min_x = (0..n).map(|v| p[v].x - sizes[v].0 / 2.0).fold(f64::INFINITY, f64::min);
    let min_y = (0..n).map(|v| p[v].y - sizes[v].1 / 2.0).fold(f64::INFINITY, f64::min);
    Ok(p.into_iter()
        .map(|c| Point::new(c.x - min_x + cfg.padding, c.y - min_y + cfg.padding))
        .collect())
}

fn label_text(l: &Option<EdgeLabel>) -> Option<String> {
    l.as_ref().map(|l| l.to_string())
}

fn route_edges(d: &Diagram, b: &mut Builder<'_>) {
    // parallel edges between the same outlines get sideways offsets
    let mut bundles: BTreeMap<(String, String), Vec<usize>> = BTreeMap::new();
    let edges: Vec<&Edge> = d.all_edges().collect();
    for (k, e) in edges.iter().enumerate() {
        if e.divergence_group.is_some() || e.source.node == e.target.node {
            continue;
        }
        let (s, t) = (e.source.node.clone(), e.target.node.clone());
        let key = if s <= t { (s, t) } else { (t, s) };
        bundles.entry(key).or_default().push(k);
    }
    let mut offset = vec![0.0f64; edges.len()];
    for members in bundles.values() {
        let n = members.len() as f64;
        for (j, &k) in members.iter().enumerate() {
            // sign follows the canonical pair order so opposite edges separate
            let flip = if edges[k].source.node <= edges[k].target.node { 1.0 } else { -1.0 };
            offset[k] = flip * (j as f64 - (n - 1.0) / 2.0) * PARALLEL_OFFSET;
        }
    }

    let mut trunks: BTreeMap<String, (Point, Point)> = BTreeMap::new();
    for (k, e) in edges.iter().enumerate() {
        let (Some(&a), Some(&t)) = (b.anchors.get(&e.source.node), b.anchors.get(&e.target.node)) else {
            continue;
        };
        let inset = e.is_migration();
        let mut labels = Vec::new();
        let same_outline = e.source.node == e.target.node || a == t;
        let points = if same_outline {
            let r = a.bounds();
            let p0 = Point::new(r.x + r.w * 0.75, r.y);
            let p1 = Point::new(r.right(), r.y + r.h * 0.25);
            let mid = Point::new(r.right() + 14.0, r.y - 14.0);
            if inset {
                vec![p0, mid, p1]
            } else {
                vec![p0, p1]
            }
        } else if let Some(g) = &e.divergence_group {
            let (_, split) = *trunks.entry(g.clone()).or_insert_with(|| {
                let targets: Vec<Point> = edges
                    .iter()
                    .filter(|o| o.divergence_group.as_ref() == Some(g))
                    .filter_map(|o| b.anchors.get(&o.target.node).map(|x| x.center()))
                    .collect();
                let centroid = targets.iter().fold(Point::new(0.0, 0.0), |s, &p| s + p) * (1.0 / targets.len().max(1) as f64);
                let from = a.exit(a.center(), centroid - a.center());
                (from, from.lerp(centroid, 0.35))
            });
            let p1 = t.exit(t.center(), split - t.center());
            if inset {
                vec![split, split.lerp(p1, INSET_POSITION), p1]
            } else {
                vec![split, p1]
            }
        } else {
            let dir = (t.center() - a.center()).unit();
            let shift = dir.normal() * offset[k];
            let p0 = a.exit(a.center() + shift, dir);
            let p1 = t.exit(t.center() + shift, dir * -1.0);
            if inset {
                vec![p0, p0.lerp(p1, INSET_POSITION), p1]
            } else {
                vec![p0, p1]
            }
        };
        let first = points[0];
        let last = *points.last().unwrap();
        let dir = (last - first).unit();
        let side = dir.normal() * 10.0;
        if let Some(text) = label_text(&e.source.label) {
            let origin = e.divergence_group.as_ref().and_then(|g| trunks.get(g)).map_or(first, |t| t.0);
            labels.push(LabelGeom { text, at: origin + dir * 16.0 + side });
        }
        if let Some(text) = label_text(&e.target.label) {
            labels.push(LabelGeom { text, at: last - dir * 16.0 + side });
        }
        b.out.edges.push(EdgeGeom {
            id: e.id.clone(),
            kind: e.kind,
            inset,
            points,
            is_loop: same_outline,
            group: e.divergence_group.clone(),
            labels,
        });
    }
    for (g, (from, split)) in trunks {
        let kind = edges.iter().find(|e| e.divergence_group.as_ref() == Some(&g)).map_or(InfoKind::Genotypic, |e| e.kind);
        b.out.trunks.push(TrunkGeom { group: g, kind, from, split });
    }
}

/// Coordinates for every drawn node and a path for every edge.
pub fn layout(d: &Diagram, cfg: &LayoutConfig) -> Result<Layout, RenderError> {
    let (units, index) = units(d);
    let mut b = Builder {
        d,
        out: Layout::default(),
        anchors: HashMap::new(),
    };
    let sizes: Vec<(f64, f64)> = units.iter().map(|u| b.measure(u)).collect();
    let n = units.len();
    let centers = match cfg.algorithm {
        LayoutAlgorithm::Layered => layered_positions(n, &sizes, &unit_edges(d, &index, true), cfg),
        LayoutAlgorithm::Force => force_positions(n, &sizes, &unit_edges(d, &index, false), cfg)?,
    };
    for (u, (c, &(w, h))) in units.iter().zip(centers.iter().zip(&sizes)) {
        b.place(u, c.x - w / 2.0, c.y - h / 2.0);
    }
    route_edges(d, &mut b);

    let mut right: f64 = 0.0;
    let mut bottom: f64 = 0.0;
    for (c, &(w, h)) in centers.iter().zip(&sizes) {
        right = right.max(c.x + w / 2.0);
        bottom = bottom.max(c.y + h / 2.0);
    }
    for e in &b.out.edges {
        for p in e.points.iter().chain(e.labels.iter().map(|l| &l.at)) {
            right = right.max(p.x);
            bottom = bottom.max(p.y);
        }
    }
    b.out.width = (right + cfg.padding).max(2.0 * cfg.padding);
    b.out.height = (bottom + cfg.padding).max(2.0 * cfg.padding);
    Ok(b.out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use mpead_core::parse;

    #[test]
    fn single_node_is_centered() {
        let d = parse("diagram d { population P }").unwrap();
        let l = layout(&d, &LayoutConfig::default()).unwrap();
        let c = l.nodes[0].outline.center();
        assert!((c.x - l.width / 2.0).abs() < 1e-9);
        assert!((c.y - l.height / 2.0).abs() < 1e-9);
    }

    #[test]
    fn inset_point_sits_at_sixty_percent() {
        let d = parse("diagram d { population A population B A ~> B : geno }").unwrap();
        let l = layout(&d, &LayoutConfig::default()).unwrap();
        let [p0, m, p1] = l.edges[0].points[..] else { panic!() };
        let t = (m - p0).len() / (p1 - p0).len();
        assert!((t - INSET_POSITION).abs() < 1e-9);
    }

    #[test]
    fn evaluator_sits_below_population() {
        let d = parse(r#"diagram d { population P compute F { fn = "f" } P[i] -> F : geno F -> P[i] : eval }"#).unwrap();
        let l = layout(&d, &LayoutConfig::default()).unwrap();
        assert!(l.nodes[0].outline.center().y < l.nodes[1].outline.center().y);
        // the two opposite edges are drawn apart
        assert_ne!(l.edges[0].points[0], l.edges[1].points[1]);
    }

    #[test]
    fn force_budget_exhaustion_fails() {
        let d = parse("diagram d { population A population B population C population D population E population F }").unwrap();
        let cfg = LayoutConfig {
            algorithm: LayoutAlgorithm::Force,
            max_iterations: 0,
            ..LayoutConfig::default()
        };
        assert_eq!(layout(&d, &cfg), Err(RenderError::LayoutFailure { iterations: 0 }));
        let ok = LayoutConfig {
            algorithm: LayoutAlgorithm::Force,
            ..LayoutConfig::default()
        };
        assert!(layout(&d, &ok).is_ok());
    }
}
