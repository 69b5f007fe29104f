//! SVG rendering of an embedding document.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::LvsdeError;
use crate::geometry::{Rect, Vec2};
use crate::io::document::EmbeddingDocument;
use crate::model::Layer;

const PALETTE: [&str; 12] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#393b79", "#ad494a",
];
const UNLABELLED: &str = "#555555";

/// How the two layers are told apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metaphor {
    /// Gray points get a black outline.
    #[default]
    CircleGray,
    /// Gray points are drawn smaller.
    SmallGray,
    /// Red points get a black outline.
    RedGray,
}

impl fmt::Display for Metaphor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metaphor::CircleGray => "circle-gray",
            Metaphor::SmallGray => "small-gray",
            Metaphor::RedGray => "red-gray",
        })
    }
}

impl FromStr for Metaphor {
    type Err = LvsdeError;
    fn from_str(s: &str) -> Result<Self, LvsdeError> {
        match s {
            "circle-gray" => Ok(Metaphor::CircleGray),
            "small-gray" => Ok(Metaphor::SmallGray),
            "red-gray" => Ok(Metaphor::RedGray),
            other => Err(LvsdeError::InvalidInput(format!("unknown metaphor `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderOptions {
    pub width: f64,
    pub height: f64,
    pub radius: f64,
    pub metaphor: Metaphor,
    pub legend: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            width: 800.0,
            height: 800.0,
            radius: 4.0,
            metaphor: Metaphor::CircleGray,
            legend: true,
        }
    }
}

fn escape(s: &str) -> String {
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

/// Colour per distinct label, in sorted label order. Labels past the palette
/// wrap around.
pub fn label_colours(labels: &[String]) -> Vec<(String, &'static str)> {
    let distinct: BTreeSet<&String> = labels.iter().collect();
    distinct
        .into_iter()
        .enumerate()
        .map(|(i, l)| (l.clone(), PALETTE[i % PALETTE.len()]))
        .collect()
}

pub fn render_svg(doc: &EmbeddingDocument, opts: &RenderOptions) -> String {
    let colours = doc.labels.as_deref().map(label_colours).unwrap_or_default();
    let colour_of = |instance: usize| -> &'static str {
        doc.labels
            .as_ref()
            .and_then(|l| l.get(instance))
            .and_then(|l| colours.iter().find(|(name, _)| name == l))
            .map_or(UNLABELLED, |(_, c)| c)
    };

    let legend_width = if opts.legend && !colours.is_empty() { 160.0 } else { 0.0 };
    let pad = opts.radius * 2.0 + 2.0;
    let bounds = Rect::bounding(doc.points.iter().map(|p| p.position))
        .unwrap_or_else(|| Rect::from_corners(Vec2::ZERO, Vec2::new(1.0, 1.0)));
    let span_x = bounds.width().max(f64::EPSILON);
    let span_y = bounds.height().max(f64::EPSILON);
    let scale = ((opts.width - 2.0 * pad) / span_x).min((opts.height - 2.0 * pad) / span_y);
    let map = |p: Vec2| {
        Vec2::new(
            pad + (p.x - bounds.min.x) * scale,
            pad + (p.y - bounds.min.y) * scale,
        )
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.2}" height="{:.2}" viewBox="0 0 {:.2} {:.2}">"#,
        opts.width + legend_width,
        opts.height,
        opts.width + legend_width,
        opts.height
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{:.2}" height="{:.2}" fill="white"/>"#,
        opts.width + legend_width,
        opts.height
    );

    for layer in [Layer::Gray, Layer::Red] {
        let _ = writeln!(out, r#"<g class="{layer}">"#);
        for (i, p) in doc.points.iter().enumerate().filter(|(_, p)| p.layer == layer) {
            let c = map(p.position);
            let (r, outlined) = match (opts.metaphor, layer) {
                (Metaphor::CircleGray, Layer::Gray) => (opts.radius, true),
                (Metaphor::SmallGray, Layer::Gray) => (opts.radius * 0.6, false),
                (Metaphor::RedGray, Layer::Red) => (opts.radius, true),
                _ => (opts.radius, false),
            };
            let stroke = if outlined {
                r#" stroke="black" stroke-width="1.20""#
            } else {
                ""
            };
            let _ = writeln!(
                out,
                r#"<circle data-point="{i}" data-instance="{}" cx="{:.2}" cy="{:.2}" r="{:.2}" fill="{}"{stroke}/>"#,
                p.instance,
                c.x,
                c.y,
                r,
                colour_of(p.instance)
            );
            if p.is_second_projection {
                let _ = writeln!(
                    out,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="black"/>"#,
                    c.x,
                    c.y,
                    r * 0.35
                );
            }
        }
        out.push_str("</g>\n");
    }

    if legend_width > 0.0 {
        out.push_str("<g class=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n");
        for (row, (label, colour)) in colours.iter().enumerate() {
            let y = 20.0 + row as f64 * 18.0;
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="5.00" fill="{colour}"/><text x="{:.2}" y="{:.2}">{}</text>"#,
                opts.width + 12.0,
                y,
                opts.width + 24.0,
                y + 4.0,
                escape(label)
            );
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::document::DocumentPoint;
    use crate::model::RunConfig;

    fn doc() -> EmbeddingDocument {
        let pt = |instance, x, layer, second| DocumentPoint {
            instance,
            position: Vec2::new(x, x * 2.0),
            layer,
            is_second_projection: second,
            mass: 1.0,
        };
        EmbeddingDocument {
            config: RunConfig::default(),
            data_checksum: String::new(),
            instance_count: 3,
            labels: Some(vec!["b<1>".into(), "a".into(), "a".into()]),
            points: vec![
                pt(0, 0.0, Layer::Red, false),
                pt(1, 5.0, Layer::Gray, false),
                pt(2, 10.0, Layer::Red, false),
                pt(1, 7.0, Layer::Gray, true),
            ],
        }
    }

    #[test]
    fn deterministic_and_escaped() {
        let a = render_svg(&doc(), &RenderOptions::default());
        assert_eq!(a, render_svg(&doc(), &RenderOptions::default()));
        assert!(a.contains("b&lt;1&gt;"));
        assert!(!a.contains("b<1>"));
        assert_eq!(a.matches("data-point=").count(), 4);
    }

    #[test]
    fn gray_drawn_before_red() {
        let svg = render_svg(&doc(), &RenderOptions::default());
        assert!(svg.find("class=\"gray\"").unwrap() < svg.find("class=\"red\"").unwrap());
    }

    #[test]
    fn colours_follow_sorted_labels() {
        let c = label_colours(&["z".into(), "a".into(), "z".into()]);
        assert_eq!(c, vec![("a".to_string(), PALETTE[0]), ("z".to_string(), PALETTE[1])]);
    }

    #[test]
    fn metaphors_differ() {
        let mut opts = RenderOptions::default();
        let circle = render_svg(&doc(), &opts);
        assert_eq!(circle.matches("stroke=\"black\"").count(), 2);
        opts.metaphor = Metaphor::RedGray;
        assert_eq!(render_svg(&doc(), &opts).matches("stroke=\"black\"").count(), 2);
        opts.metaphor = Metaphor::SmallGray;
        let small = render_svg(&doc(), &opts);
        assert_eq!(small.matches("stroke=\"black\"").count(), 0);
        assert!(small.contains("r=\"2.40\""));
        assert_eq!("small-gray".parse::<Metaphor>().unwrap(), Metaphor::SmallGray);
    }

    #[test]
    fn second_projection_marker() {
        let svg = render_svg(&doc(), &RenderOptions::default());
        assert_eq!(svg.matches("fill=\"black\"").count(), 1);
    }
}
