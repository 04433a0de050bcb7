//! SVG rendering of drawings: black filled node discs and black quadratic
//! Bézier edges. Output is byte-stable: numbers are printed with 3 decimals.

use std::fmt::Write as _;

use crate::model::Drawing;

fn num(x: f64) -> String {
    let s = format!("{x:.3}");
    // avoid "-0.000"
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        "0.000".to_string()
    } else {
        s
    }
}

pub fn render_svg(d: &Drawing) -> String {
    let mut out = String::new();
    let (w, h) = (num(d.canvas.width), num(d.canvas.height));
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<g fill="none" stroke="black" stroke-width="{}">"#,
        num(d.stroke_width)
    );
    for e in 0..d.graph.edge_count() {
        let (p0, c, p2) = d.edge_control_points(e);
        let _ = writeln!(
            out,
            r#"<path d="M {} {} Q {} {} {} {}"/>"#,
            num(p0.x),
            num(p0.y),
            num(c.x),
            num(c.y),
            num(p2.x),
            num(p2.y)
        );
    }
    out.push_str("</g>\n<g fill=\"black\">\n");
    for p in &d.positions {
        let _ = writeln!(
            out,
            r#"<circle cx="{}" cy="{}" r="{}"/>"#,
            num(p.x),
            num(p.y),
            num(d.node_radius)
        );
    }
    out.push_str("</g>\n</svg>\n");
    out
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// A blank card with centred text, used for placeholder elements.
pub fn render_text_card(text: &str, canvas: crate::model::Canvas) -> String {
    let (w, h) = (num(canvas.width), num(canvas.height));
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
            "<text x=\"{x}\" y=\"{y}\" text-anchor=\"middle\" font-size=\"{size}\">{text}</text>\n",
            "</svg>\n"
        ),
        w = w,
        h = h,
        x = num(canvas.width / 2.0),
        y = num(canvas.height / 2.0),
        size = num(canvas.height / 20.0),
        text = escape(text)
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Graph, Point};

    #[test]
    fn triangle_svg_is_stable() {
        let g = Graph::new(3, vec![(0, 1), (1, 2), (2, 0)]).unwrap();
        let d = Drawing::straight(
            g,
            vec![Point::new(10.0, 10.0), Point::new(90.0, 10.0), Point::new(50.0, 80.0)],
        )
        .with_curvatures(vec![0.25, 0.0, 0.0]);
        let svg = render_svg(&d);
        let expected = concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1000.000\" height=\"1000.000\" viewBox=\"0 0 1000.000 1000.000\">\n",
            "<rect width=\"1000.000\" height=\"1000.000\" fill=\"white\"/>\n",
            "<g fill=\"none\" stroke=\"black\" stroke-width=\"2.000\">\n",
            "<path d=\"M 10.000 10.000 Q 50.000 30.000 90.000 10.000\"/>\n",
            "<path d=\"M 90.000 10.000 Q 70.000 45.000 50.000 80.000\"/>\n",
            "<path d=\"M 50.000 80.000 Q 30.000 45.000 10.000 10.000\"/>\n",
            "</g>\n<g fill=\"black\">\n",
            "<circle cx=\"10.000\" cy=\"10.000\" r=\"8.000\"/>\n",
            "<circle cx=\"90.000\" cy=\"10.000\" r=\"8.000\"/>\n",
            "<circle cx=\"50.000\" cy=\"80.000\" r=\"8.000\"/>\n",
            "</g>\n</svg>\n",
        );
        assert_eq!(svg, expected);
        assert_eq!(svg, render_svg(&d.clone()));
    }

    #[test]
    fn text_cards_escape_markup() {
        let svg = render_text_card("a < b & \"c\"", crate::model::Canvas::default());
        assert!(svg.contains(">a &lt; b &amp; &quot;c&quot;</text>"));
    }

    #[test]
    fn negative_zero_prints_as_zero() {
        assert_eq!(num(-0.0001), "0.000");
        assert_eq!(num(-1.5), "-1.500");
    }
}
