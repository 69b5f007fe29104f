//! Rectangle selection: which selected points have another projection, and where.

use std::fmt;

use crate::geometry::{Rect, Vec2};
use crate::io::document::EmbeddingDocument;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correspondence {
    pub point: usize,
    pub instance: usize,
    pub position: Vec2,
    pub sibling: usize,
    pub sibling_position: Vec2,
}

impl fmt::Display for Correspondence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "instance {} point {} ({}, {}) -> point {} ({}, {})",
            self.instance,
            self.point,
            self.position.x,
            self.position.y,
            self.sibling,
            self.sibling_position.x,
            self.sibling_position.y
        )
    }
}

/// Every point inside `rect` (borders included) whose instance has another
/// projection, paired with that projection, in point order.
pub fn query_rect(doc: &EmbeddingDocument, rect: &Rect) -> Vec<Correspondence> {
    let projections = doc.projections_of();
    let mut out = Vec::new();
    for (p, point) in doc.points.iter().enumerate() {
        if !rect.contains(point.position) {
            continue;
        }
        for &q in &projections[point.instance] {
            if q != p {
                out.push(Correspondence {
                    point: p,
                    instance: point.instance,
                    position: point.position,
                    sibling: q,
                    sibling_position: doc.points[q].position,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::document::DocumentPoint;
    use crate::model::{Layer, RunConfig};

    fn doc() -> EmbeddingDocument {
        let pt = |instance, x, y, layer, second| DocumentPoint {
            instance,
            position: Vec2::new(x, y),
            layer,
            is_second_projection: second,
            mass: 1.0,
        };
        EmbeddingDocument {
            config: RunConfig::default(),
            data_checksum: String::new(),
            instance_count: 4,
            labels: None,
            points: vec![
                pt(0, 10.0, 10.0, Layer::Red, false),
                pt(1, 20.0, 10.0, Layer::Gray, false),
                pt(2, 80.0, 80.0, Layer::Gray, false),
                pt(3, 50.0, 50.0, Layer::Red, false),
                pt(1, 90.0, 10.0, Layer::Gray, true),
                pt(2, 15.0, 90.0, Layer::Gray, true),
            ],
        }
    }

    #[test]
    fn no_duplicates_inside() {
        let r = Rect::from_corners(Vec2::new(40.0, 40.0), Vec2::new(60.0, 60.0));
        assert!(query_rect(&doc(), &r).is_empty());
    }

    #[test]
    fn whole_frame_lists_each_contained_projection() {
        let r = Rect::from_corners(Vec2::new(0.0, 0.0), Vec2::new(100.0, 100.0));
        let found = query_rect(&doc(), &r);
        let pairs: Vec<(usize, usize)> = found.iter().map(|c| (c.point, c.sibling)).collect();
        assert_eq!(pairs, vec![(1, 4), (2, 5), (4, 1), (5, 2)]);
    }

    #[test]
    fn rectangle_around_one_duplicate() {
        let r = Rect::from_corners(Vec2::new(85.0, 0.0), Vec2::new(95.0, 20.0));
        let found = query_rect(&doc(), &r);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].point, 4);
        assert_eq!(found[0].sibling, 1);
        assert_eq!(found[0].sibling_position, Vec2::new(20.0, 10.0));
    }
}
