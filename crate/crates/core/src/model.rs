//! Domain types shared by the whole pipeline and the random initial layout.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distances::DistanceMatrix;
use crate::error::{LvsdeError, Result};
use crate::geometry::{Rect, Vec2};

/// The data instances to embed: vectors, a precomputed distance matrix, or both.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    instances: Option<Vec<Vec<f64>>>,
    precomputed: Option<DistanceMatrix>,
    labels: Option<Vec<String>>,
}

impl DataSet {
    pub fn from_vectors(instances: Vec<Vec<f64>>) -> Result<Self> {
        let dim = instances.first().map_or(0, Vec::len);
        if let Some((row, v)) = instances.iter().enumerate().find(|(_, v)| v.len() != dim) {
            return Err(LvsdeError::InvalidInput(format!(
                "instance {row} has {} values, expected {dim}",
                v.len()
            )));
        }
        if instances.iter().flatten().any(|x| !x.is_finite()) {
            return Err(LvsdeError::InvalidInput("non-finite coordinate".into()));
        }
        Ok(DataSet {
            instances: Some(instances),
            precomputed: None,
            labels: None,
        })
    }

    /// Wraps a precomputed distance matrix. The matrix must have a zero diagonal and
    /// non-negative entries; it need not be symmetric.
    pub fn from_distance_matrix(matrix: DistanceMatrix) -> Result<Self> {
        let n = matrix.len();
        for i in 0..n {
            for j in 0..n {
                let d = matrix.get(i, j);
                if !d.is_finite() || d < 0.0 {
                    return Err(LvsdeError::InvalidInput(format!(
                        "distance ({i}, {j}) = {d} is not a finite non-negative number"
                    )));
                }
            }
            if matrix.get(i, i) != 0.0 {
                return Err(LvsdeError::InvalidInput(format!(
                    "diagonal entry ({i}, {i}) is not zero"
                )));
            }
        }
        Ok(DataSet {
            instances: None,
            precomputed: Some(matrix),
            labels: None,
        })
    }

    /// Attaches a precomputed matrix to a vector data set; it takes precedence
    /// when distances are computed.
    pub fn with_precomputed(mut self, matrix: DistanceMatrix) -> Result<Self> {
        let checked = DataSet::from_distance_matrix(matrix)?;
        if let Some(instances) = &self.instances {
            if instances.len() != checked.len() {
                return Err(LvsdeError::InvalidInput(format!(
                    "{} vectors but a {}x{} distance matrix",
                    instances.len(),
                    checked.len(),
                    checked.len()
                )));
            }
        }
        self.precomputed = checked.precomputed;
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(LvsdeError::InvalidInput(format!(
                "{} labels for {} instances",
                labels.len(),
                self.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        match (&self.instances, &self.precomputed) {
            (Some(v), _) => v.len(),
            (None, Some(m)) => m.len(),
            (None, None) => 0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn instances(&self) -> Option<&[Vec<f64>]> {
        self.instances.as_deref()
    }

    pub fn precomputed(&self) -> Option<&DistanceMatrix> {
        self.precomputed.as_ref()
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Euclidean,
    Cosine,
    Precomputed,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Euclidean => "euclidean",
            Metric::Cosine => "cosine",
            Metric::Precomputed => "precomputed",
        })
    }
}

impl FromStr for Metric {
    type Err = LvsdeError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "cosine" => Ok(Metric::Cosine),
            "precomputed" => Ok(Metric::Precomputed),
            other => Err(LvsdeError::InvalidConfig(format!("unknown metric `{other}`"))),
        }
    }
}

/// How the repulsive pass applies its forces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RepulsionMode {
    /// Moves a point once per (instance, instance) pair, exactly in loop order.
    #[default]
    Faithful,
    /// Sums every repulsive force on a point before a single capped move.
    Aggregate,
}

impl fmt::Display for RepulsionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RepulsionMode::Faithful => "faithful",
            RepulsionMode::Aggregate => "aggregate",
        })
    }
}

impl FromStr for RepulsionMode {
    type Err = LvsdeError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "faithful" => Ok(RepulsionMode::Faithful),
            "aggregate" => Ok(RepulsionMode::Aggregate),
            other => Err(LvsdeError::InvalidConfig(format!("unknown mode `{other}`"))),
        }
    }
}

/// Every tunable of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Visual density adjustment.
    pub b: f64,
    /// Out-degree of the neighbourhood graph.
    pub p_hat: usize,
    /// Neighbour rank used by the distance normalizers.
    pub z: usize,
    /// Maximum temperature.
    pub u_bar: f64,
    pub width: f64,
    pub height: f64,
    pub phase_iterations: [usize; 4],
    pub frame_margin_fraction: f64,
    pub metric: Metric,
    pub seed: u64,
    pub gray_sigma_factor: f64,
    pub gray_cap_fraction: f64,
    pub axis_count: usize,
    pub max_projections: usize,
    pub parallel: bool,
    pub repulsion_mode: RepulsionMode,
    /// Keep a snapshot every this many iterations (the final state is always kept).
    pub snapshot_every: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            b: 0.9,
            p_hat: 20,
            z: 20,
            u_bar: 100.0,
            width: 1000.0,
            height: 1000.0,
            phase_iterations: [500, 450, 390, 490],
            frame_margin_fraction: 0.05,
            metric: Metric::Euclidean,
            seed: 0,
            gray_sigma_factor: 1.2,
            gray_cap_fraction: 0.25,
            axis_count: 36,
            max_projections: 2,
            parallel: false,
            repulsion_mode: RepulsionMode::Faithful,
            snapshot_every: None,
        }
    }
}

impl RunConfig {
    pub fn total_iterations(&self) -> usize {
        self.phase_iterations.iter().sum()
    }

    /// Checks the configuration against a data set of `n` instances.
    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |msg: String| Err(LvsdeError::InvalidConfig(msg));
        if n < 2 {
            return Err(LvsdeError::InvalidInput(format!(
                "need at least 2 instances, got {n}"
            )));
        }
        if self.p_hat == 0 || self.p_hat > n - 1 {
            return bad(format!("p_hat = {} must be in [1, {}]", self.p_hat, n - 1));
        }
        if self.z == 0 || self.z > n - 1 {
            return bad(format!("z = {} must be in [1, {}]", self.z, n - 1));
        }
        if !self.b.is_finite() {
            return bad("b must be finite".into());
        }
        if !(self.u_bar > 0.0 && self.u_bar.is_finite()) {
            return bad(format!("u_bar = {} must be positive", self.u_bar));
        }
        if !(self.width > 0.0 && self.height > 0.0 && self.width.is_finite() && self.height.is_finite()) {
            return bad("width and height must be positive".into());
        }
        if self.phase_iterations.contains(&0) {
            return bad("every phase needs at least one iteration".into());
        }
        if !(self.frame_margin_fraction >= 0.0 && self.frame_margin_fraction.is_finite()) {
            return bad("frame margin must be a non-negative number".into());
        }
        if !(self.gray_sigma_factor >= 0.0 && self.gray_sigma_factor.is_finite()) {
            return bad("gray sigma factor must be non-negative".into());
        }
        if !(0.0..=1.0).contains(&self.gray_cap_fraction) {
            return bad("gray cap fraction must be in [0, 1]".into());
        }
        if self.axis_count == 0 {
            return bad("axis count must be positive".into());
        }
        if !(1..=2).contains(&self.max_projections) {
            return bad(format!(
                "max_projections = {} is unsupported (1 or 2)",
                self.max_projections
            ));
        }
        if self.snapshot_every == Some(0) {
            return bad("snapshot interval must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Layer {
    Red,
    Gray,
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Layer::Red => "red",
            Layer::Gray => "gray",
        })
    }
}

impl FromStr for Layer {
    type Err = LvsdeError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "red" => Ok(Layer::Red),
            "gray" | "grey" => Ok(Layer::Gray),
            other => Err(LvsdeError::InvalidInput(format!("unknown layer `{other}`"))),
        }
    }
}

/// One point of the visual space standing for a data instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedPoint {
    pub instance: usize,
    pub position: Vec2,
    pub layer: Layer,
    /// Mass used when turning attractive forces into displacement.
    pub mass: f64,
    /// Does not move.
    pub frozen: bool,
    /// Does not move and exerts no force.
    pub ineffective: bool,
    pub is_second_projection: bool,
}

impl ProjectedPoint {
    fn new(instance: usize, position: Vec2) -> Self {
        ProjectedPoint {
            instance,
            position,
            layer: Layer::Red,
            mass: 1.0,
            frozen: false,
            ineffective: false,
            is_second_projection: false,
        }
    }

    /// Marks the point ineffective, which also freezes it.
    pub fn make_ineffective(&mut self) {
        self.ineffective = true;
        self.frozen = true;
    }
}

/// The evolving embedding: all projected points plus the run-wide layout constants.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingState {
    pub points: Vec<ProjectedPoint>,
    /// Point indices of each instance's projections, in creation order.
    pub projections_of: Vec<Vec<usize>>,
    pub frame: Option<Rect>,
    pub temperature: f64,
    /// Largest pairwise visual distance of the initial layout.
    pub dv_max: f64,
    pub phase: u8,
    pub iteration_in_phase: usize,
    /// Optimal distance, fixed by the visual space and the instance count.
    pub gamma: f64,
}

impl EmbeddingState {
    /// Builds a state from explicit positions, one red point per instance.
    pub fn from_positions(positions: Vec<Vec2>, width: f64, height: f64) -> Result<Self> {
        let n = positions.len();
        if n < 2 {
            return Err(LvsdeError::InvalidInput(format!(
                "need at least 2 instances, got {n}"
            )));
        }
        let points: Vec<ProjectedPoint> = positions
            .into_iter()
            .enumerate()
            .map(|(i, p)| ProjectedPoint::new(i, p))
            .collect();
        let dv_max = max_pairwise_distance(&points);
        if dv_max <= 0.0 {
            return Err(LvsdeError::InvalidInput(
                "initial layout has all points coincident".into(),
            ));
        }
        Ok(EmbeddingState {
            projections_of: (0..n).map(|i| vec![i]).collect(),
            points,
            frame: None,
            temperature: 0.0,
            dv_max,
            phase: 1,
            iteration_in_phase: 0,
            gamma: optimal_distance(width, height, n),
        })
    }

    pub fn instance_count(&self) -> usize {
        self.projections_of.len()
    }

    /// Number of instances with at least one red projection.
    pub fn red_instance_count(&self) -> usize {
        self.projections_of
            .iter()
            .filter(|ps| ps.iter().any(|&p| self.points[p].layer == Layer::Red))
            .count()
    }

    pub fn duplicated_instance_count(&self) -> usize {
        self.projections_of.iter().filter(|ps| ps.len() > 1).count()
    }

    /// Checks the structural invariants of a strict red/gray embedding.
    pub fn check_invariants(&self, max_projections: usize) -> std::result::Result<(), String> {
        let mut seen = BTreeSet::new();
        for (i, ps) in self.projections_of.iter().enumerate() {
            if ps.is_empty() || ps.len() > max_projections {
                return Err(format!("instance {i} has {} projections", ps.len()));
            }
            for &p in ps {
                let point = self
                    .points
                    .get(p)
                    .ok_or_else(|| format!("instance {i} refers to missing point {p}"))?;
                if point.instance != i {
                    return Err(format!("point {p} belongs to {} not {i}", point.instance));
                }
                if ps.len() > 1 && point.layer != Layer::Gray {
                    return Err(format!("duplicated instance {i} has a red projection"));
                }
                seen.insert(p);
            }
        }
        if seen.len() != self.points.len() {
            return Err("some points are not listed as projections".into());
        }
        for (p, point) in self.points.iter().enumerate() {
            if point.ineffective && !point.frozen {
                return Err(format!("point {p} is ineffective but not frozen"));
            }
            if point.mass.is_nan() || point.mass <= 0.0 {
                return Err(format!("point {p} has mass {}", point.mass));
            }
            if point.is_second_projection && point.layer != Layer::Gray {
                return Err(format!("second projection {p} is not gray"));
            }
            if let Some(frame) = &self.frame {
                if !frame.contains(point.position) {
                    return Err(format!("point {p} at {:?} is outside the frame", point.position));
                }
            }
        }
        Ok(())
    }
}

fn max_pairwise_distance(points: &[ProjectedPoint]) -> f64 {
    let mut best = 0.0f64;
    for (a, pa) in points.iter().enumerate() {
        for pb in &points[a + 1..] {
            best = best.max(pa.position.distance(pb.position));
        }
    }
    best
}

/// Optimal distance for `n` instances in a `width` x `height` visual space.
pub fn optimal_distance(width: f64, height: f64, n: usize) -> f64 {
    (width * height / n as f64).sqrt()
}

/// Uniformly random layout over the visual rectangle, one red point per instance.
pub fn init_random_embedding(data: &DataSet, cfg: &RunConfig) -> Result<EmbeddingState> {
    let n = data.len();
    if n < 2 {
        return Err(LvsdeError::InvalidInput(format!(
            "need at least 2 instances, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let positions = (0..n)
        .map(|_| {
            let x = rng.gen::<f64>() * cfg.width;
            let y = rng.gen::<f64>() * cfg.height;
            Vec2::new(x, y)
        })
        .collect();
    EmbeddingState::from_positions(positions, cfg.width, cfg.height)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vectors(n: usize) -> DataSet {
        DataSet::from_vectors((0..n).map(|i| vec![i as f64, 0.0]).collect()).unwrap()
    }

    #[test]
    fn optimal_distance_examples() {
        assert_eq!(optimal_distance(1000.0, 1000.0, 100), 100.0);
        assert_eq!(optimal_distance(1.0, 1.0, 1), 1.0);
        assert!((optimal_distance(800.0, 200.0, 40) - 4000f64.sqrt()).abs() < 1e-12);
        assert!((optimal_distance(800.0, 200.0, 40) - 63.245_553_203_367_59).abs() < 1e-12);
    }

    #[test]
    fn single_instance_is_rejected() {
        let err = init_random_embedding(&vectors(1), &RunConfig::default()).unwrap_err();
        assert!(matches!(err, LvsdeError::InvalidInput(_)));
    }

    #[test]
    fn same_seed_same_layout() {
        let cfg = RunConfig {
            seed: 7,
            ..RunConfig::default()
        };
        let a = init_random_embedding(&vectors(3), &cfg).unwrap();
        let b = init_random_embedding(&vectors(3), &cfg).unwrap();
        for (p, q) in a.points.iter().zip(&b.points) {
            assert_eq!(p.position.x.to_bits(), q.position.x.to_bits());
            assert_eq!(p.position.y.to_bits(), q.position.y.to_bits());
        }
    }

    #[test]
    fn initial_state_shape() {
        let state = init_random_embedding(&vectors(100), &RunConfig::default()).unwrap();
        assert_eq!(state.gamma, 100.0);
        assert!(state.frame.is_none());
        assert_eq!(state.points.len(), 100);
        for (i, p) in state.points.iter().enumerate() {
            assert_eq!(p.instance, i);
            assert_eq!(p.layer, Layer::Red);
            assert_eq!(p.mass, 1.0);
            assert!(!p.frozen && !p.ineffective && !p.is_second_projection);
            assert!((0.0..1000.0).contains(&p.position.x));
            assert!((0.0..1000.0).contains(&p.position.y));
        }
        let brute = state
            .points
            .iter()
            .flat_map(|a| state.points.iter().map(move |b| a.position.distance(b.position)))
            .fold(0.0, f64::max);
        assert_eq!(state.dv_max, brute);
        state.check_invariants(2).unwrap();
    }

    #[test]
    fn config_validation() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.total_iterations(), 1830);
        assert!(cfg.validate(21).is_ok());
        assert!(cfg.validate(20).is_err());
        assert!(RunConfig { max_projections: 3, ..cfg.clone() }.validate(50).is_err());
        assert!(RunConfig { phase_iterations: [1, 0, 1, 1], ..cfg }.validate(50).is_err());
    }

    #[test]
    fn labels_must_match_length() {
        assert!(vectors(3).with_labels(vec!["a".into(); 2]).is_err());
        assert!(vectors(3).with_labels(vec!["a".into(); 3]).is_ok());
    }

    #[test]
    fn matrix_validation() {
        let m = DistanceMatrix::from_rows(vec![vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
        assert!(DataSet::from_distance_matrix(m).is_err());
        let m = DistanceMatrix::from_rows(vec![vec![0.5, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(DataSet::from_distance_matrix(m).is_err());
        let m = DistanceMatrix::from_rows(vec![vec![0.0, 1.0], vec![2.0, 0.0]]).unwrap();
        assert_eq!(DataSet::from_distance_matrix(m).unwrap().len(), 2);
    }
}
