use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;

use mpead_core::{expand, parse, parse_file, Diagram};
use mpead_render::{layout, render_dot, render_svg, LayoutAlgorithm, LayoutConfig};
use roxmltree::{Document, Node};

fn corpus(name: &str) -> Diagram {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name);
    parse_file(name, &fs::read_to_string(path).unwrap()).unwrap()
}

fn svg(d: &Diagram) -> String {
    render_svg(d, &LayoutConfig::default()).unwrap()
}

fn has_class(n: &Node, class: &str) -> bool {
    n.attribute("class").is_some_and(|c| c.split_whitespace().any(|x| x == class))
}

/// marker id -> marker class
fn markers<'a>(doc: &'a Document) -> HashMap<&'a str, &'a str> {
    doc.descendants()
        .filter(|n| n.has_tag_name("marker"))
        .map(|n| (n.attribute("id").unwrap(), n.attribute("class").unwrap()))
        .collect()
}

fn url_id(v: &str) -> &str {
    v.trim_start_matches("url(#").trim_end_matches(')')
}

/// (kind, marker class, dashed) for every drawn edge, in document order
fn edge_markers(text: &str) -> Vec<(String, String, bool)> {
    let doc = Document::parse(text).unwrap();
    let m = markers(&doc);
    doc.descendants()
        .filter(|n| n.has_tag_name("path") && has_class(n, "edge"))
        .map(|n| {
            let kind = ["geno", "pheno", "eval"].into_iter().find(|k| has_class(&n, k)).unwrap().to_string();
            let marker = n.attribute("marker-end").or(n.attribute("marker-mid")).map(url_id).unwrap();
            (kind, m[marker].to_string(), n.attribute("stroke-dasharray").is_some())
        })
        .collect()
}

#[test]
fn edge_kind_markers_and_line_styles() {
    let got = edge_markers(&svg(&corpus("fig1_samples.mpead")));
    let expect = [
        ("geno", "marker-closed-unfilled", false),
        ("pheno", "marker-closed-filled", false),
        ("eval", "marker-open", true),
    ];
    assert_eq!(got.len(), 3);
    for (g, e) in got.iter().zip(expect) {
        assert_eq!((g.0.as_str(), g.1.as_str(), g.2), e);
    }
}

#[test]
fn marker_shapes_match_their_classes() {
    let text = svg(&corpus("fig1_samples.mpead"));
    let doc = Document::parse(&text).unwrap();
    for m in doc.descendants().filter(|n| n.has_tag_name("marker")) {
        let path = m.children().find(|c| c.has_tag_name("path")).unwrap();
        let closed = path.attribute("d").unwrap().ends_with('Z');
        let fill = path.attribute("fill").unwrap();
        match m.attribute("class").unwrap() {
            "marker-closed-unfilled" => assert!(closed && fill == "#ffffff"),
            "marker-closed-filled" => assert!(closed && fill == "#000000"),
            "marker-open" => assert!(!closed && fill == "none"),
            other => panic!("unexpected marker class {other}"),
        }
    }
}

fn border_of(text: &str, id: &str) -> String {
    let doc = Document::parse(text).unwrap();
    let g = doc.descendants().find(|n| has_class(n, "computation-node") && n.attribute("data-id") == Some(id)).unwrap();
    let circle = g.children().find(|c| c.has_tag_name("circle")).unwrap();
    circle.attribute("class").unwrap().split_whitespace().find(|c| c.starts_with("border-")).unwrap().to_string()
}

#[test]
fn decoder_border_is_solid_and_evaluator_dashed() {
    let text = svg(&corpus("fig2b_decoded.mpead"));
    assert_eq!(border_of(&text, "Decode"), "border-solid");
    assert_eq!(border_of(&text, "F"), "border-dashed");
}

#[test]
fn mixed_output_border_alternates() {
    let d = parse(r#"diagram d { population P population Q compute F { fn = "f" out = geno, eval } P[i] -> F : geno F -> P[i] : eval F -> Q[i] : geno }"#).unwrap();
    assert_eq!(border_of(&svg(&d), "F"), "border-alternating");
}

#[test]
fn migration_marker_is_inset() {
    let d = parse("diagram d { population P1 population P2 P1 ~> P2 : geno }").unwrap();
    let text = svg(&d);
    let doc = Document::parse(&text).unwrap();
    let edge = doc.descendants().find(|n| has_class(n, "edge")).unwrap();
    assert!(edge.attribute("marker-end").is_none());
    assert_eq!(edge.attribute("marker-mid"), Some("url(#arrow-geno)"));
    // exactly one interior vertex for the marker to sit on
    assert_eq!(edge.attribute("d").unwrap().matches('L').count(), 2);
}

#[test]
fn population_glyph_has_parallel_lines() {
    let text = svg(&corpus("fig2a_onemax.mpead"));
    let doc = Document::parse(&text).unwrap();
    let pop = doc.descendants().find(|n| has_class(n, "population-node")).unwrap();
    let rect = pop.children().find(|c| c.has_tag_name("rect")).unwrap();
    let top: f64 = rect.attribute("y").unwrap().parse().unwrap();
    let h: f64 = rect.attribute("height").unwrap().parse().unwrap();
    let lines: Vec<_> = pop.children().filter(|c| c.has_tag_name("line")).collect();
    assert!(lines.len() >= 3);
    for l in lines {
        let (y1, y2): (f64, f64) = (l.attribute("y1").unwrap().parse().unwrap(), l.attribute("y2").unwrap().parse().unwrap());
        assert_eq!(y1, y2, "lines are horizontal");
        assert!(y1 > top + h / 2.0 && y1 < top + h, "lines sit in the lower half");
    }
    assert!(pop.descendants().any(|n| n.text() == Some("EA")));
}

#[test]
fn grayscale_only() {
    let names = ["fig1_samples.mpead", "fig4d_coop.mpead", "fig6_grid3x3.mpead", "fig8_sefrioui25.mpead", "fig5b_scavenger.mpead"];
    for name in names {
        let text = svg(&corpus(name));
        let doc = Document::parse(&text).unwrap();
        for n in doc.descendants() {
            for attr in ["fill", "stroke"] {
                let Some(v) = n.attribute(attr) else { continue };
                if v == "none" {
                    continue;
                }
                let hex = v.strip_prefix('#').unwrap_or_else(|| panic!("{name}: colour {v}"));
                assert_eq!(hex.len(), 6);
                assert!(hex[0..2] == hex[2..4] && hex[2..4] == hex[4..6], "{name}: {v} is not gray");
            }
        }
    }
}

#[test]
fn labels_are_typeset() {
    let text = svg(&corpus("fig4c_predprey_ten.mpead"));
    let doc = Document::parse(&text).unwrap();
    let labels: Vec<&str> = doc.descendants().filter(|n| has_class(n, "edge-label")).filter_map(|n| n.text()).collect();
    assert!(labels.contains(&"10/rand"));
    assert!(labels.contains(&"i"));
    let all = svg(&corpus("fig4a_predprey.mpead"));
    assert!(Document::parse(&all).unwrap().descendants().any(|n| has_class(&n, "edge-label") && n.text() == Some("*")));
}

#[test]
fn divergence_draws_one_trunk() {
    let text = svg(&corpus("fig4d_coop.mpead"));
    let doc = Document::parse(&text).unwrap();
    assert_eq!(doc.descendants().filter(|n| has_class(n, "trunk")).count(), 1);
    assert_eq!(doc.descendants().filter(|n| has_class(n, "branch")).count(), 2);
    // separate streams in the split variant have no trunk
    let split = svg(&corpus("fig4e_coop_pair.mpead"));
    assert!(!split.contains("class=\"trunk"));
}

#[test]
fn macro_box_hexagon_faces() {
    let text = svg(&corpus("fig8_sefrioui7.mpead"));
    let doc = Document::parse(&text).unwrap();
    let boxes: Vec<_> = doc.descendants().filter(|n| has_class(n, "macro-box")).collect();
    assert_eq!(boxes.len(), 2);
    for b in boxes {
        let fill = b.children().find(|c| c.has_tag_name("polygon")).unwrap();
        assert_eq!(fill.attribute("points").unwrap().split(' ').count(), 6);
        let long: Vec<_> = b.children().filter(|c| has_class(c, "macro-long-face")).collect();
        let short: Vec<_> = b.children().filter(|c| has_class(c, "macro-short-face")).collect();
        assert_eq!((long.len(), short.len()), (2, 4));
        assert!(long.iter().all(|f| f.attribute("stroke-dasharray").is_some()));
        assert!(short.iter().all(|f| f.attribute("stroke-dasharray").is_none()));
    }
}

#[test]
fn ellipsis_bar_carries_the_total() {
    let text = svg(&corpus("fig7_grid32.mpead"));
    let doc = Document::parse(&text).unwrap();
    let counts: Vec<&str> = doc.descendants().filter(|n| has_class(n, "repeat-count")).filter_map(|n| n.text()).collect();
    assert_eq!(counts, vec!["32", "32"]);
    assert!(doc.descendants().any(|n| has_class(&n, "ellipsis") && n.text() == Some("…")));
    // exactly two drawn instances
    assert_eq!(doc.descendants().filter(|n| has_class(n, "population")).count(), 2);
}

#[test]
fn expanded_grid_draws_nine_islands() {
    let flat = expand(&corpus("fig6_grid3x3.mpead")).unwrap();
    let text = svg(&flat);
    let doc = Document::parse(&text).unwrap();
    assert_eq!(doc.descendants().filter(|n| n.has_tag_name("rect") && has_class(n, "population")).count(), 9);
    assert_eq!(doc.descendants().filter(|n| has_class(n, "inset")).count(), 24);
}

#[test]
fn rendering_is_byte_deterministic() {
    for algorithm in [LayoutAlgorithm::Layered, LayoutAlgorithm::Force] {
        let cfg = LayoutConfig { seed: 11, algorithm, ..LayoutConfig::default() };
        let d = corpus("fig5b_scavenger.mpead");
        assert_eq!(render_svg(&d, &cfg).unwrap(), render_svg(&d, &cfg).unwrap());
    }
}

#[test]
fn dot_export_of_corpus() {
    let dot = render_dot(&corpus("fig6_grid3x3.mpead"));
    assert!(dot.contains("subgraph \"cluster_Islands\""));
    assert!(dot.contains("subgraph \"cluster_Grid\""));
    assert!(dot.contains("lhead=\"cluster_Islands\""));
    let flat = render_dot(&expand(&corpus("fig6_grid3x3.mpead")).unwrap());
    assert_eq!(flat.matches("arrowhead=none").count(), 24);
}

fn assert_disjoint(d: &Diagram, cfg: &LayoutConfig) {
    let l = layout(d, cfg).unwrap();
    let rects: Vec<_> = l.nodes.iter().map(|n| n.outline.bounds()).collect();
    for (a, ra) in rects.iter().enumerate() {
        for rb in &rects[a + 1..] {
            assert!(!ra.overlaps(rb), "{}: {ra:?} overlaps {rb:?}", d.name);
        }
        assert!(ra.x >= 0.0 && ra.y >= 0.0 && ra.right() <= l.width && ra.bottom() <= l.height);
    }
}

#[test]
fn corpus_layouts_do_not_overlap() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    for entry in fs::read_dir(dir).unwrap() {
        let name = entry.unwrap().file_name().into_string().unwrap();
        let d = corpus(&name);
        for algorithm in [LayoutAlgorithm::Layered, LayoutAlgorithm::Force] {
            let cfg = LayoutConfig { algorithm, ..LayoutConfig::default() };
            assert_disjoint(&d, &cfg);
            let flat = expand(&d).unwrap();
            if flat.node_count() <= 50 {
                assert_disjoint(&flat, &cfg);
            }
        }
    }
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn random_graphs_do_not_overlap(
            pops in 1usize..25,
            comps in 0usize..25,
            edges in prop::collection::vec((0usize..50, 0usize..50, 0u8..3, any::<bool>()), 0..60),
            seed in any::<u64>(),
            force in any::<bool>(),
        ) {
            let mut src = String::from("diagram r {\n");
            for p in 0..pops { src.push_str(&format!("  population P{p} {{ label = \"{}\" }}\n", "x".repeat(p % 13))); }
            for c in 0..comps { src.push_str(&format!("  compute C{c} {{ fn = \"f\" out = geno, eval }}\n")); }
            let ids: Vec<String> = (0..pops).map(|p| format!("P{p}")).chain((0..comps).map(|c| format!("C{c}"))).collect();
            for (a, b, k, inset) in edges {
                let kind = ["geno", "pheno", "eval"][k as usize];
                let arrow = if inset { "~>" } else { "->" };
                src.push_str(&format!("  {} {arrow} {} : {kind}\n", ids[a % ids.len()], ids[b % ids.len()]));
            }
            src.push('}');
            let d = parse(&src).unwrap();
            let algorithm = if force { LayoutAlgorithm::Force } else { LayoutAlgorithm::Layered };
            let cfg = LayoutConfig { seed, algorithm, ..LayoutConfig::default() };
            assert_disjoint(&d, &cfg);
            prop_assert_eq!(layout(&d, &cfg).unwrap(), layout(&d, &cfg).unwrap());
        }
    }
}
