//! One iteration's repulsive and attractive passes, the per-phase temperature
//! schedule and frame clamping.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::distances::{DistanceModel, NeighbourhoodGraph};
use crate::geometry::{Rect, Vec2};
use crate::model::{EmbeddingState, RepulsionMode};

/// Stand-in distance for coincident points.
pub const COINCIDENT_EPSILON: f64 = 1e-9;

/// Temperature of iteration `mu` (0-based) of `phase`, never negative.
pub fn temperature_for(phase: u8, mu: usize, u_bar: f64) -> f64 {
    let offset = match phase {
        1 => 0.0,
        2 => 500.0,
        _ => 510.0,
    };
    ((1000.0 - (mu as f64 + offset)) * u_bar / 1000.0).max(0.0)
}

pub fn clamp_to_frame(position: Vec2, frame: &Rect) -> Vec2 {
    frame.clamp(position)
}

/// Repulsive force on a point at `at` exerted by a point at `from`, for two
/// points `distance` apart along unit vector `toward` (from `at` to `from`).
#[inline]
pub fn repulsive_force(gamma: f64, toward: Vec2, distance: f64) -> Vec2 {
    -toward * (gamma * gamma / distance)
}

/// Base attractive magnitude `(d / gamma)^(1 - b)`.
#[inline]
pub fn psi(distance: f64, gamma: f64, b: f64) -> f64 {
    (distance / gamma).powf(1.0 - b)
}

/// Adds the distance-preservation term `h` to `psi`, limited to half of `|psi|`.
#[inline]
pub fn psi_hat(psi: f64, h: f64) -> f64 {
    if h > 0.0 {
        psi + (psi.abs() / 2.0).min(h)
    } else {
        psi + (-psi.abs() / 2.0).max(h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForceKind {
    Repulsive,
    Attractive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordedForce {
    pub kind: ForceKind,
    pub vector: Vec2,
}

/// Individual forces applied to each point during one iteration, kept only
/// while replication pressure is needed.
#[derive(Debug, Clone, Default)]
pub struct ForceRecord {
    enabled: bool,
    per_point: Vec<Vec<RecordedForce>>,
}

impl ForceRecord {
    pub fn new(enabled: bool) -> Self {
        ForceRecord {
            enabled,
            per_point: Vec::new(),
        }
    }

    pub fn is_enabled(&self) -> bool {
        self.enabled
    }

    pub fn set_enabled(&mut self, enabled: bool) {
        self.enabled = enabled;
        if !enabled {
            self.per_point.clear();
        }
    }

    /// Empties every list, keeping allocations, and sizes the record for `points`.
    pub fn clear(&mut self, points: usize) {
        for forces in &mut self.per_point {
            forces.clear();
        }
        if self.enabled {
            self.per_point.resize_with(points, Vec::new);
        }
    }

    pub fn record(&mut self, point: usize, kind: ForceKind, vector: Vec2) {
        if self.enabled {
            if point >= self.per_point.len() {
                self.per_point.resize_with(point + 1, Vec::new);
            }
            self.per_point[point].push(RecordedForce { kind, vector });
        }
    }

    pub fn forces_on(&self, point: usize) -> &[RecordedForce] {
        self.per_point.get(point).map_or(&[], Vec::as_slice)
    }

    pub fn vectors_on(&self, point: usize) -> Vec<Vec2> {
        self.forces_on(point).iter().map(|f| f.vector).collect()
    }
}

/// Settings shared by both passes.
#[derive(Debug, Clone, Copy)]
pub struct PassOptions {
    pub b: f64,
    pub seed: u64,
    pub mode: RepulsionMode,
    pub parallel: bool,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Unit direction from `a` to `b` and their distance. Coincident points get
/// distance `COINCIDENT_EPSILON` and a direction drawn from a generator keyed by
/// the seed, the iteration stamp and the unordered pair, so `b -> a` is the
/// exact opposite of `a -> b`.
fn separation(pa: Vec2, pb: Vec2, a: usize, b: usize, seed: u64, stamp: u64) -> (Vec2, f64) {
    let delta = pb - pa;
    let d = delta.norm();
    if d > 0.0 {
        return (delta / d, d);
    }
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let key = splitmix64(seed ^ splitmix64(stamp ^ splitmix64(lo as u64 ^ splitmix64(hi as u64))));
    let angle = ChaCha8Rng::seed_from_u64(key).gen::<f64>() * TAU;
    let dir = Vec2::from_angle(angle);
    (if a < b { dir } else { -dir }, COINCIDENT_EPSILON)
}

fn stamp(state: &EmbeddingState) -> u64 {
    (state.phase as u64) << 48 | state.iteration_in_phase as u64
}

fn apply_move(state: &mut EmbeddingState, point: usize, step: Vec2) {
    let temperature = state.temperature;
    let p = &mut state.points[point];
    p.position += step.capped(temperature);
    if let Some(frame) = &state.frame {
        p.position = clamp_to_frame(p.position, frame);
    }
}

/// Applies repulsion between every pair of projected points. Frozen points
/// neither move nor record; ineffective points exert nothing.
pub fn repulsive_pass(state: &mut EmbeddingState, opts: &PassOptions, record: &mut ForceRecord) {
    match opts.mode {
        RepulsionMode::Faithful => repulsive_faithful(state, opts, record),
        RepulsionMode::Aggregate => repulsive_aggregate(state, opts, record),
    }
}

fn repulsive_faithful(state: &mut EmbeddingState, opts: &PassOptions, record: &mut ForceRecord) {
    let n = state.instance_count();
    let gamma = state.gamma;
    let stamp = stamp(state);
    for i in 0..n {
        for j in 0..n {
            for t in 0..state.projections_of[i].len() {
                let pt = state.projections_of[i][t];
                if state.points[pt].frozen {
                    continue;
                }
                let here = state.points[pt].position;
                let mut total = Vec2::ZERO;
                for &q in &state.projections_of[j] {
                    let other = &state.points[q];
                    if q == pt || other.ineffective {
                        continue;
                    }
                    let (dir, d) = separation(here, other.position, pt, q, opts.seed, stamp);
                    let f = repulsive_force(gamma, dir, d);
                    total += f;
                    record.record(pt, ForceKind::Repulsive, f);
                }
                apply_move(state, pt, total);
            }
        }
    }
}

fn repulsive_aggregate(state: &mut EmbeddingState, opts: &PassOptions, record: &mut ForceRecord) {
    let gamma = state.gamma;
    let stamp = stamp(state);
    let order: Vec<usize> = state.projections_of.iter().flatten().copied().collect();
    let keep = record.is_enabled();
    let snapshot: &EmbeddingState = state;
    let compute = |&pt: &usize| -> (usize, Vec2, Vec<Vec2>) {
        let mut forces = Vec::new();
        let mut total = Vec2::ZERO;
        if !snapshot.points[pt].frozen {
            let here = snapshot.points[pt].position;
            for &q in &order {
                let other = &snapshot.points[q];
                if q == pt || other.ineffective {
                    continue;
                }
                let (dir, d) = separation(here, other.position, pt, q, opts.seed, stamp);
                let f = repulsive_force(gamma, dir, d);
                total += f;
                if keep {
                    forces.push(f);
                }
            }
        }
        (pt, total, forces)
    };
    let results: Vec<(usize, Vec2, Vec<Vec2>)> = if opts.parallel {
        order.par_iter().map(compute).collect()
    } else {
        order.iter().map(compute).collect()
    };
    for (pt, total, forces) in results {
        if state.points[pt].frozen {
            continue;
        }
        for f in forces {
            record.record(pt, ForceKind::Repulsive, f);
        }
        apply_move(state, pt, total);
    }
}

/// Applies attraction along every directed edge whose source is not frozen
/// and whose target is not ineffective, then moves every unfrozen point once.
pub fn attractive_pass(
    state: &mut EmbeddingState,
    graph: &NeighbourhoodGraph,
    model: &DistanceModel,
    opts: &PassOptions,
    record: &mut ForceRecord,
) {
    let stamp = stamp(state);
    let edges: Vec<(usize, usize)> = state
        .projections_of
        .iter()
        .flatten()
        .flat_map(|&s| graph.out_neighbours(s).iter().map(move |&t| (s, t)))
        .filter(|&(s, t)| !state.points[s].frozen && !state.points[t].ineffective)
        .collect();

    let snapshot: &EmbeddingState = state;
    let edge_force = |&(s, t): &(usize, usize)| -> Vec2 {
        let ps = &snapshot.points[s];
        let pt = &snapshot.points[t];
        let (dir, d) = separation(ps.position, pt.position, s, t, opts.seed, stamp);
        let base = psi(d, snapshot.gamma, opts.b);
        let h = model.transformed.get(ps.instance, pt.instance) / model.delta_max
            - d / snapshot.dv_max;
        dir * psi_hat(base, h)
    };
    let forces: Vec<Vec2> = if opts.parallel {
        edges.par_iter().map(edge_force).collect()
    } else {
        edges.iter().map(edge_force).collect()
    };

    // reduce in edge order so parallel and sequential runs agree bit for bit
    let mut totals = vec![Vec2::ZERO; state.points.len()];
    for (&(s, t), &f) in edges.iter().zip(&forces) {
        totals[s] += f / state.points[s].mass;
        totals[t] += -f / state.points[t].mass;
        record.record(s, ForceKind::Attractive, f);
        if !state.points[t].frozen {
            record.record(t, ForceKind::Attractive, -f);
        }
    }

    let order: Vec<usize> = state.projections_of.iter().flatten().copied().collect();
    for pt in order {
        if !state.points[pt].frozen {
            apply_move(state, pt, totals[pt]);
        }
    }
}
