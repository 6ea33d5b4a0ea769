use std::fmt::Write;

use super::{Layout, Shape};

/// Coordinates rounded to 2 decimals, trailing zeros dropped.
fn num(x: f64) -> String {
    let r = (x * 100.0).round() / 100.0;
    let s = format!("{r:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn dot_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => {}
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Graphviz description: tasks as hexagons, goals as rounded boxes, with
/// pinned positions from the layout.
pub fn export_dot(layout: &Layout) -> String {
    let mut out = String::new();
    let name = if layout.name.is_empty() { "goals" } else { &layout.name };
    writeln!(out, "digraph {} {{", dot_string(name)).unwrap();
    if !layout.nodes.is_empty() {
        out.push_str("  node [fontname=\"Helvetica\"];\n");
    }
    for n in layout.real_nodes() {
        let shape = match n.shape {
            Shape::Task => "shape=hexagon",
            _ => "shape=box, style=rounded",
        };
        writeln!(
            out,
            "  {} [label={}, {shape}, pos=\"{},{}!\"];",
            dot_string(&n.id),
            dot_string(&n.label),
            num(n.x),
            num(-n.y)
        )
        .unwrap();
    }
    for e in &layout.edges {
        writeln!(out, "  {} -> {};", dot_string(&e.source), dot_string(&e.target)).unwrap();
    }
    out.push_str("}\n");
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
            c => out.push(c),
        }
    }
    out
}

const MARGIN: f64 = 20.0;

/// Standalone SVG 1.1 drawing of a layout.
pub fn export_svg(layout: &Layout) -> String {
    let (min_x, min_y, max_x, max_y) = layout.bounds().unwrap_or((0.0, 0.0, 0.0, 0.0));
    let (x0, y0) = (min_x - MARGIN, min_y - MARGIN);
    let (w, h) = (max_x - min_x + 2.0 * MARGIN, max_y - min_y + 2.0 * MARGIN);
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n");
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"{} {} {} {}\">",
        num(w),
        num(h),
        num(x0),
        num(y0),
        num(w),
        num(h)
    )
    .unwrap();
    out.push_str(concat!(
        "  <defs>\n",
        "    <marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"8\" markerHeight=\"8\" orient=\"auto\">\n",
        "      <path d=\"M0,0 L10,5 L0,10 z\" fill=\"#444\"/>\n",
        "    </marker>\n",
        "  </defs>\n",
    ));
    out.push_str("  <g class=\"edges\" fill=\"none\" stroke=\"#444\" stroke-width=\"1.5\">\n");
    for e in &layout.edges {
        let pts: Vec<String> = e.points.iter().map(|(x, y)| format!("{},{}", num(*x), num(*y))).collect();
        writeln!(
            out,
            "    <polyline data-source=\"{}\" data-target=\"{}\" points=\"{}\" marker-end=\"url(#arrow)\"/>",
            xml_escape(&e.source),
            xml_escape(&e.target),
            pts.join(" ")
        )
        .unwrap();
    }
    out.push_str("  </g>\n");
    out.push_str("  <g class=\"nodes\" font-family=\"Helvetica, Arial, sans-serif\" font-size=\"12\">\n");
    let (hw, hh) = (layout.box_width / 2.0, layout.box_height / 2.0);
    for n in layout.real_nodes() {
        writeln!(out, "    <g class=\"node {}\" id=\"{}\">", shape_class(n.shape), xml_escape(&n.id)).unwrap();
        match n.shape {
            Shape::Task => {
                let inset = hh / 2.0;
                let pts = [
                    (n.x - hw, n.y),
                    (n.x - hw + inset, n.y - hh),
                    (n.x + hw - inset, n.y - hh),
                    (n.x + hw, n.y),
                    (n.x + hw - inset, n.y + hh),
                    (n.x - hw + inset, n.y + hh),
                ];
                let pts: Vec<String> = pts.iter().map(|(x, y)| format!("{},{}", num(*x), num(*y))).collect();
                writeln!(
                    out,
                    "      <polygon points=\"{}\" fill=\"#fff8e1\" stroke=\"#8d6e00\"/>",
                    pts.join(" ")
                )
                .unwrap();
            }
            _ => {
                writeln!(
                    out,
                    "      <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" rx=\"12\" ry=\"12\" fill=\"#e3f2fd\" stroke=\"#1565c0\"/>",
                    num(n.x - hw),
                    num(n.y - hh),
                    num(layout.box_width),
                    num(layout.box_height)
                )
                .unwrap();
            }
        }
        writeln!(
            out,
            "      <text x=\"{}\" y=\"{}\" text-anchor=\"middle\" dominant-baseline=\"middle\">{}</text>",
            num(n.x),
            num(n.y),
            xml_escape(&n.label)
        )
        .unwrap();
        out.push_str("    </g>\n");
    }
    out.push_str("  </g>\n</svg>\n");
    out
}

fn shape_class(shape: Shape) -> &'static str {
    match shape {
        Shape::Task => "task",
        Shape::Goal => "goal",
        Shape::Dummy => "dummy",
    }
}
