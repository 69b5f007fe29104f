//! Layered KNN classification accuracy.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{LvsdeError, Result};
use crate::model::{Layer, ProjectedPoint};

/// A non-empty set of layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LayerSet {
    red: bool,
    gray: bool,
}

impl LayerSet {
    pub const RED: LayerSet = LayerSet { red: true, gray: false };
    pub const GRAY: LayerSet = LayerSet { red: false, gray: true };
    pub const ALL: LayerSet = LayerSet { red: true, gray: true };

    pub fn contains(&self, layer: Layer) -> bool {
        match layer {
            Layer::Red => self.red,
            Layer::Gray => self.gray,
        }
    }
}

impl fmt::Display for LayerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match (self.red, self.gray) {
            (true, true) => "red+gray",
            (true, false) => "red",
            (false, true) => "gray",
            (false, false) => "none",
        })
    }
}

impl FromStr for LayerSet {
    type Err = LvsdeError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "red" => Ok(LayerSet::RED),
            "gray" | "grey" => Ok(LayerSet::GRAY),
            "red+gray" | "gray+red" | "all" => Ok(LayerSet::ALL),
            other => Err(LvsdeError::InvalidInput(format!("unknown layer set `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LambdaSpec {
    /// Layers whose projections are evaluated.
    pub evaluation: LayerSet,
    /// Layers neighbours are drawn from.
    pub classification: LayerSet,
    pub k: usize,
    /// Keep every projection of the query's own instance out of its neighbour
    /// set. When false only the query point itself is skipped.
    pub exclude_own_instance: bool,
}

impl LambdaSpec {
    pub fn new(evaluation: LayerSet, classification: LayerSet, k: usize) -> Self {
        LambdaSpec {
            evaluation,
            classification,
            k,
            exclude_own_instance: true,
        }
    }
}

/// The six evaluation/classification combinations reported per embedding.
pub const TABLE_COMBINATIONS: [(LayerSet, LayerSet); 6] = [
    (LayerSet::ALL, LayerSet::ALL),
    (LayerSet::ALL, LayerSet::RED),
    (LayerSet::RED, LayerSet::RED),
    (LayerSet::GRAY, LayerSet::GRAY),
    (LayerSet::GRAY, LayerSet::RED),
    (LayerSet::GRAY, LayerSet::ALL),
];

/// Fraction of instances with a projection in the evaluation layers for which
/// at least one such projection's k nearest classification-layer neighbours
/// vote (plurality, ties counted as a hit) for the instance's own label.
pub fn lambda_measure(points: &[ProjectedPoint], labels: &[String], spec: &LambdaSpec) -> Result<f64> {
    if spec.k == 0 {
        return Err(LvsdeError::InvalidInput("k must be positive".into()));
    }
    if let Some(p) = points.iter().position(|p| p.instance >= labels.len()) {
        return Err(LvsdeError::InvalidInput(format!(
            "point {p} refers to instance {} but only {} labels exist",
            points[p].instance,
            labels.len()
        )));
    }
    let mut evaluated: Vec<Vec<usize>> = vec![Vec::new(); labels.len()];
    for (p, point) in points.iter().enumerate() {
        if spec.evaluation.contains(point.layer) {
            evaluated[point.instance].push(p);
        }
    }
    let instances: Vec<usize> = (0..labels.len()).filter(|&i| !evaluated[i].is_empty()).collect();
    if instances.is_empty() {
        return Err(LvsdeError::EmptyEvaluationSet);
    }
    let pool: Vec<usize> = (0..points.len())
        .filter(|&q| spec.classification.contains(points[q].layer))
        .collect();

    let hits = instances
        .par_iter()
        .map(|&i| -> Result<bool> {
            for &p in &evaluated[i] {
                if projection_votes_correctly(points, labels, &pool, p, spec)? {
                    return Ok(true);
                }
            }
            Ok(false)
        })
        .collect::<Result<Vec<bool>>>()?;
    let correct = hits.iter().filter(|&&h| h).count();
    Ok(correct as f64 / instances.len() as f64)
}

fn projection_votes_correctly(
    points: &[ProjectedPoint],
    labels: &[String],
    pool: &[usize],
    p: usize,
    spec: &LambdaSpec,
) -> Result<bool> {
    let query = &points[p];
    let mut near: Vec<(f64, usize)> = pool
        .iter()
        .filter(|&&q| {
            if spec.exclude_own_instance {
                points[q].instance != query.instance
            } else {
                q != p
            }
        })
        .map(|&q| (query.position.distance_squared(points[q].position), q))
        .collect();
    if near.len() < spec.k {
        return Err(LvsdeError::InsufficientNeighbours {
            point: p,
            available: near.len(),
            k: spec.k,
        });
    }
    near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut votes: HashMap<&str, usize> = HashMap::new();
    for &(_, q) in &near[..spec.k] {
        *votes.entry(labels[points[q].instance].as_str()).or_default() += 1;
    }
    let top = votes.values().copied().max().unwrap_or(0);
    Ok(votes.get(labels[query.instance].as_str()).copied() == Some(top))
}
