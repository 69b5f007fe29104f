//! Replication pressure over radial axes and vertex splitting.
//!
//! A point pulled hard in opposite directions along some line is a candidate
//! for a second projection. Pressure on an axis is the summed length of the
//! perpendicular projections of all forces on that point; opposing forces add
//! up instead of cancelling. Splitting hands the out-neighbours on one side of
//! the best axis to a new projection of the same instance.

use std::f64::consts::{PI, TAU};

use crate::distances::NeighbourhoodGraph;
use crate::geometry::Vec2;
use crate::model::{EmbeddingState, Layer, ProjectedPoint};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressureResult {
    /// Maximum axis pressure.
    pub pressure: f64,
    /// Index of the maximizing axis; axis `k` points at `k * 2pi / axis_count`.
    pub best_axis: usize,
    pub best_axis_angle: f64,
    /// Summed projection lengths on the positive side of the best axis.
    pub positive: f64,
    /// Same for the negative side.
    pub negative: f64,
}

impl PressureResult {
    /// Direction whose positive half-plane receives neighbours when splitting:
    /// the side of the best axis that collected more pressure.
    pub fn split_angle(&self) -> f64 {
        if self.positive >= self.negative {
            self.best_axis_angle
        } else {
            (self.best_axis_angle + PI) % TAU
        }
    }
}

/// Unit directions of the radial axes. With an even count, the second half is
/// the exact negation of the first so opposite axes tie bit for bit.
pub fn axis_directions(axis_count: usize) -> Vec<Vec2> {
    let mut dirs: Vec<Vec2> = Vec::with_capacity(axis_count);
    let half = axis_count / 2;
    for k in 0..axis_count {
        if axis_count.is_multiple_of(2) && k >= half {
            dirs.push(-dirs[k - half]);
        } else {
            dirs.push(Vec2::from_angle(k as f64 * TAU / axis_count as f64));
        }
    }
    dirs
}

/// Maximum over `axis_count` evenly spaced axes of positive plus negative
/// pressure. Ties go to the smallest angle; no forces gives zero at angle 0.
pub fn replication_pressure(forces: &[Vec2], axis_count: usize) -> PressureResult {
    let mut best = PressureResult {
        pressure: 0.0,
        best_axis: 0,
        best_axis_angle: 0.0,
        positive: 0.0,
        negative: 0.0,
    };
    for (k, axis) in axis_directions(axis_count).into_iter().enumerate() {
        let mut positive = 0.0;
        let mut negative = 0.0;
        for f in forces {
            let c = f.dot(axis);
            if c > 0.0 {
                positive += c;
            } else {
                negative -= c;
            }
        }
        let pressure = positive + negative;
        if pressure > best.pressure || k == 0 {
            best = PressureResult {
                pressure,
                best_axis: k,
                best_axis_angle: k as f64 * TAU / axis_count as f64,
                positive,
                negative,
            };
        }
    }
    best
}

/// How many points may be sent to the gray layer: the number of pressures
/// lying outside `mean +- sigma_factor * sd` (population sd), capped at
/// `floor(n * cap_fraction)`.
pub fn select_gray_budget(pressures: &[f64], n: usize, sigma_factor: f64, cap_fraction: f64) -> usize {
    let cap = (n as f64 * cap_fraction).floor() as usize;
    if pressures.is_empty() {
        return 0;
    }
    let first = pressures[0];
    if pressures.iter().all(|&p| p == first) {
        return 0;
    }
    let count = pressures.len() as f64;
    let mean = pressures.iter().sum::<f64>() / count;
    let sd = (pressures.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / count).sqrt();
    let (lo, hi) = (mean - sigma_factor * sd, mean + sigma_factor * sd);
    let outside = pressures.iter().filter(|&&p| p < lo || p > hi).count();
    outside.min(cap)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DuplicationOutcome {
    /// A second projection was created at this point index.
    Duplicated { second: usize },
    /// One side of the split would have had no neighbours; nothing changed.
    Failed,
    /// The point is not eligible (red, or its instance is already at the limit).
    Rejected,
}

impl DuplicationOutcome {
    pub fn is_success(&self) -> bool {
        matches!(self, DuplicationOutcome::Duplicated { .. })
    }
}

/// Splits `point` along the line through it perpendicular to `split_angle`.
///
/// Out-neighbours strictly on the positive side go to the new projection, which
/// then moves to their centroid; remaining neighbours strictly closer to the new
/// projection follow it. Masses are scaled by the share of neighbours each side
/// keeps. Any side ending empty is a failure and leaves everything untouched.
pub fn duplicate_point(
    state: &mut EmbeddingState,
    graph: &mut NeighbourhoodGraph,
    point: usize,
    split_angle: f64,
    max_projections: usize,
) -> DuplicationOutcome {
    let original = &state.points[point];
    let instance = original.instance;
    if original.layer != Layer::Gray || state.projections_of[instance].len() >= max_projections {
        return DuplicationOutcome::Rejected;
    }
    let neighbours = graph.out_neighbours(point);
    let c1 = neighbours.len();
    let origin = original.position;
    let axis = Vec2::from_angle(split_angle);

    let (mut second_side, mut first_side): (Vec<usize>, Vec<usize>) = neighbours
        .iter()
        .partition(|&&nb| (state.points[nb].position - origin).dot(axis) > 0.0);
    if second_side.is_empty() || first_side.is_empty() {
        return DuplicationOutcome::Failed;
    }

    let centroid = second_side
        .iter()
        .fold(Vec2::ZERO, |acc, &nb| acc + state.points[nb].position)
        / second_side.len() as f64;

    let (moved, kept): (Vec<usize>, Vec<usize>) = first_side.iter().partition(|&&nb| {
        let p = state.points[nb].position;
        p.distance_squared(centroid) < p.distance_squared(origin)
    });
    if kept.is_empty() {
        return DuplicationOutcome::Failed;
    }
    first_side = kept;
    second_side.extend(moved);

    let c2 = first_side.len();
    let c3 = second_side.len();
    let mass = original.mass;
    let second = ProjectedPoint {
        instance,
        position: centroid,
        layer: Layer::Gray,
        mass: mass * c3 as f64 / c1 as f64,
        frozen: original.frozen,
        ineffective: original.ineffective,
        is_second_projection: true,
    };
    state.points[point].mass = mass * c2 as f64 / c1 as f64;
    state.points.push(second);
    let index = state.points.len() - 1;
    state.projections_of[instance].push(index);
    graph.set_out_neighbours(point, first_side);
    let pushed = graph.push_vertex(second_side);
    debug_assert_eq!(pushed, index);
    DuplicationOutcome::Duplicated { second: index }
}
