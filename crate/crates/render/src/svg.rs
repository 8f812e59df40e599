use std::fmt::Write;

use mpead_core::{BorderStyle, Diagram, InfoKind};

use crate::geom::{Outline, Point, Rect};
use crate::layout::{layout, EdgeGeom, Layout, LayoutConfig, NodeShape};
use crate::RenderError;

const INK: &str = "#000000";
const PAPER: &str = "#ffffff";
const BOX_FILL: &str = "#d9d9d9";
const EDGE_DASH: &str = "6 4";

/// Marker element id for `kind`.
pub fn marker_id(kind: InfoKind) -> &'static str {
    match kind {
        InfoKind::Genotypic => "arrow-geno",
        InfoKind::Phenotypic => "arrow-pheno",
        InfoKind::Evaluative => "arrow-eval",
    }
}

/// Marker class for `kind`: genotypic arrowheads are closed and hollow,
/// phenotypic closed and filled, evaluative open.
pub fn marker_class(kind: InfoKind) -> &'static str {
    match kind {
        InfoKind::Genotypic => "marker-closed-unfilled",
        InfoKind::Phenotypic => "marker-closed-filled",
        InfoKind::Evaluative => "marker-open",
    }
}

pub fn line_style(kind: InfoKind) -> &'static str {
    if kind.is_genetic() {
        "solid"
    } else {
        "dashed"
    }
}

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c if (c as u32) < 0x20 && c != '\t' && c != '\n' => out.push(' '),
            c => out.push(c),
        }
    }
    out
}

fn pt(p: Point) -> String {
    format!("{:.1},{:.1}", p.x, p.y)
}

fn path_d(points: &[Point]) -> String {
    let mut d = format!("M{}", pt(points[0]));
    for &p in &points[1..] {
        let _ = write!(d, " L{}", pt(p));
    }
    d
}

/// Dash pattern for an alternating border: one solid stretch, then an
/// equally long dashed stretch, repeated four times around the circle.
pub fn alternating_dasharray(r: f64) -> String {
    let stretch = 2.0 * std::f64::consts::PI * r / 8.0;
    let dash = stretch / 5.0;
    format!("{stretch:.2} {dash:.2} {dash:.2} {dash:.2} {dash:.2} {dash:.2}")
}

fn write_defs(out: &mut String) {
    out.push_str("<defs>\n");
    for kind in InfoKind::ALL {
        let shape = match kind {
            InfoKind::Genotypic => format!(r#"<path d="M0,0 L10,5 L0,10 Z" fill="{PAPER}" stroke="{INK}" stroke-width="1"/>"#),
            InfoKind::Phenotypic => format!(r#"<path d="M0,0 L10,5 L0,10 Z" fill="{INK}" stroke="{INK}" stroke-width="1"/>"#),
            InfoKind::Evaluative => format!(r#"<path d="M0,0 L10,5 L0,10" fill="none" stroke="{INK}" stroke-width="1.2"/>"#),
        };
        let _ = writeln!(
            out,
            r#"<marker id="{}" class="{}" viewBox="-1 -1 12 12" refX="10" refY="5" markerWidth="10" markerHeight="10" markerUnits="userSpaceOnUse" orient="auto">{shape}</marker>"#,
            marker_id(kind),
            marker_class(kind),
        );
    }
    out.push_str("</defs>\n");
}

fn hexagon(out: &mut String, id: &str, r: Rect) {
    let k = 0.3 * r.h;
    let cy = r.y + r.h / 2.0;
    let p = [
        Point::new(r.x, cy),
        Point::new(r.x + k, r.y),
        Point::new(r.right() - k, r.y),
        Point::new(r.right(), cy),
        Point::new(r.right() - k, r.bottom()),
        Point::new(r.x + k, r.bottom()),
    ];
    let all: Vec<String> = p.iter().map(|&q| pt(q)).collect();
    let _ = writeln!(out, r#"<g class="macro-box" data-id="{}">"#, esc(id));
    let _ = writeln!(out, r#"<polygon class="macro-fill" points="{}" fill="{BOX_FILL}" stroke="none"/>"#, all.join(" "));
    // long faces (top and bottom) dashed, the four short faces solid
    for (a, b) in [(1, 2), (4, 5)] {
        let _ = writeln!(
            out,
            r#"<path class="macro-long-face" d="{}" fill="none" stroke="{INK}" stroke-width="1" stroke-dasharray="{EDGE_DASH}"/>"#,
            path_d(&[p[a], p[b]])
        );
    }
    for (a, b) in [(0, 1), (2, 3), (3, 4), (5, 0)] {
        let _ = writeln!(
            out,
            r#"<path class="macro-short-face" d="{}" fill="none" stroke="{INK}" stroke-width="1"/>"#,
            path_d(&[p[a], p[b]])
        );
    }
    out.push_str("</g>\n");
}

fn edge_path(out: &mut String, e: &EdgeGeom) {
    let mut class = format!("edge {} {}", e.kind.keyword(), line_style(e.kind));
    if e.inset {
        class.push_str(" inset");
    }
    if e.group.is_some() {
        class.push_str(" branch");
    }
    let d = if e.is_loop {
        let (p0, p1) = (e.points[0], *e.points.last().unwrap());
        if e.inset {
            format!("M{} A14,14 0 0 1 {} A14,14 0 0 1 {}", pt(p0), pt(e.points[1]), pt(p1))
        } else {
            format!("M{} A16,16 0 1 1 {}", pt(p0), pt(p1))
        }
    } else {
        path_d(&e.points)
    };
    let marker = if e.inset {
        format!(r#" marker-mid="url(#{})""#, marker_id(e.kind))
    } else {
        format!(r#" marker-end="url(#{})""#, marker_id(e.kind))
    };
    let dash = if e.kind.is_genetic() {
        String::new()
    } else {
        format!(r#" stroke-dasharray="{EDGE_DASH}""#)
    };
    let _ = writeln!(
        out,
        r#"<path class="{class}" data-id="{}" d="{d}" fill="none" stroke="{INK}" stroke-width="1.2"{dash}{marker}/>"#,
        esc(&e.id)
    );
    for l in &e.labels {
        let _ = writeln!(
            out,
            r#"<text class="edge-label" x="{:.1}" y="{:.1}" font-family="serif" font-style="italic" font-size="12" text-anchor="middle" fill="{INK}">{}</text>"#,
            l.at.x,
            l.at.y,
            esc(&l.text)
        );
    }
}

fn write_nodes(out: &mut String, l: &Layout) {
    for n in &l.nodes {
        let instance = n.instance.as_ref().map_or(String::new(), |i| format!(r#" data-instance="{}""#, esc(i)));
        match (n.shape, n.outline) {
            (NodeShape::Population, Outline::Rect(r)) => {
                let _ = writeln!(out, r#"<g class="population-node" data-id="{}"{instance}>"#, esc(&n.id));
                let _ = writeln!(
                    out,
                    r#"<rect class="population" x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{PAPER}" stroke="{INK}" stroke-width="1"/>"#,
                    r.x, r.y, r.w, r.h
                );
                let _ = writeln!(
                    out,
                    r#"<text class="node-name" x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle" fill="{INK}">{}</text>"#,
                    r.center().x,
                    r.y + 16.0,
                    esc(&n.name)
                );
                for k in 0..3 {
                    let y = r.y + r.h * (0.55 + 0.14 * k as f64);
                    let _ = writeln!(
                        out,
                        r#"<line class="individuals" x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="{INK}" stroke-width="1"/>"#,
                        r.x + 0.15 * r.w,
                        r.right() - 0.15 * r.w
                    );
                }
                out.push_str("</g>\n");
            }
            (NodeShape::Computation(style), Outline::Circle { c, r }) => {
                let dash = match style {
                    BorderStyle::Solid => String::new(),
                    BorderStyle::Dashed => format!(r#" stroke-dasharray="{EDGE_DASH}""#),
                    BorderStyle::Alternating => format!(r#" stroke-dasharray="{}""#, alternating_dasharray(r)),
                };
                let _ = writeln!(out, r#"<g class="computation-node" data-id="{}"{instance}>"#, esc(&n.id));
                let _ = writeln!(
                    out,
                    r#"<circle class="computation border-{}" cx="{:.1}" cy="{:.1}" r="{r:.1}" fill="{PAPER}" stroke="{INK}" stroke-width="1.2"{dash}/>"#,
                    style.as_str(),
                    c.x,
                    c.y
                );
                let _ = writeln!(
                    out,
                    r#"<text class="node-name" x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle" fill="{INK}">{}</text>"#,
                    c.x,
                    c.y + 4.0,
                    esc(&n.name)
                );
                out.push_str("</g>\n");
            }
            _ => unreachable!("populations are rectangles and computations circles"),
        }
    }
}

fn write_repeats(out: &mut String, l: &Layout) {
    for r in &l.repeats {
        let _ = writeln!(out, r#"<g class="repeat" data-id="{}">"#, esc(&r.id));
        let _ = writeln!(
            out,
            r#"<text class="ellipsis" x="{:.1}" y="{:.1}" font-family="serif" font-size="20" text-anchor="middle" fill="{INK}">…</text>"#,
            r.ellipsis.x,
            r.ellipsis.y + 6.0
        );
        for bar in &r.bars {
            let along = (bar.to - bar.from).unit();
            let tick = along.normal() * 5.0;
            let _ = writeln!(
                out,
                r#"<path class="repeat-bar" d="{} M{} L{} M{} L{}" fill="none" stroke="{INK}" stroke-width="1"/>"#,
                path_d(&[bar.from, bar.to]),
                pt(bar.from + tick),
                pt(bar.from - tick),
                pt(bar.to + tick),
                pt(bar.to - tick)
            );
            let mid = bar.from.lerp(bar.to, 0.5);
            let at = if along.x.abs() > along.y.abs() { mid + Point::new(0.0, 14.0) } else { mid + Point::new(12.0, 4.0) };
            let _ = writeln!(
                out,
                r#"<text class="repeat-count" x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="middle" fill="{INK}">{}</text>"#,
                at.x, at.y, bar.count
            );
        }
        out.push_str("</g>\n");
    }
}

/// SVG 1.1 document for `layout`. The same layout always yields the same
/// bytes.
pub fn svg_document(d: &Diagram, l: &Layout) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.1}" height="{h:.1}" viewBox="0 0 {w:.1} {h:.1}">"#,
        w = l.width,
        h = l.height
    );
    let _ = writeln!(out, "<title>{}</title>", esc(&d.name));
    write_defs(&mut out);
    let _ = writeln!(
        out,
        r#"<rect class="background" x="0" y="0" width="{:.1}" height="{:.1}" fill="{PAPER}"/>"#,
        l.width, l.height
    );
    out.push_str("<g class=\"macro-boxes\">\n");
    for c in &l.clusters {
        hexagon(&mut out, &c.id, c.rect);
    }
    out.push_str("</g>\n<g class=\"repeats\">\n");
    write_repeats(&mut out, l);
    out.push_str("</g>\n<g class=\"edges\">\n");
    for t in &l.trunks {
        let dash = if t.kind.is_genetic() { String::new() } else { format!(r#" stroke-dasharray="{EDGE_DASH}""#) };
        let _ = writeln!(
            out,
            r#"<path class="trunk {} {}" data-group="{}" d="{}" fill="none" stroke="{INK}" stroke-width="1.2"{dash}/>"#,
            t.kind.keyword(),
            line_style(t.kind),
            esc(&t.group),
            path_d(&[t.from, t.split])
        );
    }
    for e in &l.edges {
        edge_path(&mut out, e);
    }
    out.push_str("</g>\n<g class=\"nodes\">\n");
    write_nodes(&mut out, l);
    out.push_str("</g>\n</svg>\n");
    out
}

/// Lays out `d` and draws it.
pub fn render_svg(d: &Diagram, cfg: &LayoutConfig) -> Result<String, RenderError> {
    Ok(svg_document(d, &layout(d, cfg)?))
}
