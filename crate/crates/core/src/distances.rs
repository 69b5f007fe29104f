//! Original-space distances, the neighbourhood-normalized transform and the
//! directed neighbourhood graph built on top of it.

use std::cmp::Ordering;
use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;

use crate::error::{LvsdeError, Result};
use crate::model::{DataSet, Metric};

/// Dense row-major n x n matrix of distances. Not necessarily symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn zeros(n: usize) -> Self {
        DistanceMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(LvsdeError::InvalidInput(format!(
                    "row {i} has {} entries, matrix needs {n}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Ok(DistanceMatrix { n, data })
    }

    fn from_flat(n: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), n * n);
        DistanceMatrix { n, data }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

/// Raw distances, per-instance normalizers and the transformed distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceModel {
    pub raw: DistanceMatrix,
    pub normalizers: Vec<f64>,
    pub transformed: DistanceMatrix,
    pub delta_max: f64,
}

impl DistanceModel {
    /// Runs the whole preliminary distance pipeline.
    pub fn build(data: &DataSet, metric: Metric, z: usize) -> Result<Self> {
        let raw = compute_raw_distances(data, metric)?;
        let normalizers = compute_normalizers(&raw, z)?;
        let (transformed, delta_max) = transform_distances(&raw, &normalizers)?;
        Ok(DistanceModel {
            raw,
            normalizers,
            transformed,
            delta_max,
        })
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    // rounding can push the ratio a hair past 1
    (1.0 - dot / (na * nb)).max(0.0)
}

/// Pairwise original-space distances. A precomputed matrix on the data set takes
/// precedence over vectors whatever the metric; the diagonal is forced to zero.
pub fn compute_raw_distances(data: &DataSet, metric: Metric) -> Result<DistanceMatrix> {
    if let Some(m) = data.precomputed() {
        let mut out = m.clone();
        for i in 0..out.len() {
            for j in 0..out.len() {
                if out.get(i, j) < 0.0 {
                    return Err(LvsdeError::InvalidInput(format!(
                        "negative precomputed distance at ({i}, {j})"
                    )));
                }
            }
            out.set(i, i, 0.0);
        }
        return Ok(out);
    }
    let vectors = data.instances().ok_or_else(|| {
        LvsdeError::InvalidInput("data set carries neither vectors nor a distance matrix".into())
    })?;
    let dist: fn(&[f64], &[f64]) -> f64 = match metric {
        Metric::Euclidean => euclidean,
        Metric::Cosine => {
            if let Some(i) = vectors.iter().position(|v| v.iter().all(|&x| x == 0.0)) {
                return Err(LvsdeError::InvalidInput(format!(
                    "instance {i} is a zero vector; cosine distance is undefined"
                )));
            }
            cosine_distance
        }
        Metric::Precomputed => {
            return Err(LvsdeError::InvalidInput(
                "metric is `precomputed` but no distance matrix was given".into(),
            ))
        }
    };
    let n = vectors.len();
    let data: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            (0..n).map(move |j| if i == j { 0.0 } else { dist(&vectors[i], &vectors[j]) })
        })
        .collect();
    Ok(DistanceMatrix::from_flat(n, data))
}

/// Indices of the other instances ordered by ascending distance from `i`, ties by index.
fn others_by_distance(row: &[f64], i: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..row.len()).filter(|&j| j != i).collect();
    order.sort_by(|&a, &b| {
        row[a]
            .partial_cmp(&row[b])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
}

/// Per-instance normalizer `m_i` with `atan(d_z * m_i) = 1`, where `d_z` is the
/// distance to the z-th nearest other instance.
pub fn compute_normalizers(raw: &DistanceMatrix, z: usize) -> Result<Vec<f64>> {
    let n = raw.len();
    if z == 0 || z >= n {
        return Err(LvsdeError::InvalidConfig(format!(
            "z = {z} needs to be in [1, {}]",
            n.saturating_sub(1)
        )));
    }
    let tan_one = 1f64.tan();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let order = others_by_distance(raw.row(i), i);
            let dz = raw.get(i, order[z - 1]);
            if dz > 0.0 {
                Ok(tan_one / dz)
            } else {
                Err(LvsdeError::DegenerateInput { instance: i, z })
            }
        })
        .collect()
}

/// Neighbourhood-normalized transform. Both arctangent terms use the (i, j)
/// entry, so an asymmetric input stays asymmetric.
pub fn transform_distances(
    raw: &DistanceMatrix,
    normalizers: &[f64],
) -> Result<(DistanceMatrix, f64)> {
    let n = raw.len();
    if normalizers.len() != n {
        return Err(LvsdeError::InvalidInput(format!(
            "{} normalizers for {n} instances",
            normalizers.len()
        )));
    }
    if let Some(i) = normalizers.iter().position(|&m| !(m > 0.0 && m.is_finite())) {
        return Err(LvsdeError::InvalidInput(format!(
            "normalizer {i} is not positive"
        )));
    }
    let data: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            (0..n).map(move |j| {
                let d = raw.get(i, j);
                ((d * normalizers[i]).atan() + (d * normalizers[j]).atan()) / 2.0
            })
        })
        .collect();
    let transformed = DistanceMatrix::from_flat(n, data);
    let delta_max = transformed.max();
    debug_assert!(delta_max <= FRAC_PI_2);
    Ok((transformed, delta_max))
}

/// Directed neighbourhood graph over projected points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighbourhoodGraph {
    out: Vec<Vec<usize>>,
}

impl NeighbourhoodGraph {
    pub fn from_adjacency(out: Vec<Vec<usize>>) -> Self {
        NeighbourhoodGraph { out }
    }

    pub fn vertex_count(&self) -> usize {
        self.out.len()
    }

    pub fn out_neighbours(&self, point: usize) -> &[usize] {
        &self.out[point]
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    /// Every directed edge in source order, then neighbour-list order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(s, ns)| ns.iter().map(move |&t| (s, t)))
    }

    pub(crate) fn set_out_neighbours(&mut self, point: usize, neighbours: Vec<usize>) {
        self.out[point] = neighbours;
    }

    pub(crate) fn push_vertex(&mut self, neighbours: Vec<usize>) -> usize {
        self.out.push(neighbours);
        self.out.len() - 1
    }
}

/// Each instance points to its `p_hat` nearest others under the transformed
/// distances (ties by lower index). No symmetrization.
pub fn build_neighbourhood_graph(
    transformed: &DistanceMatrix,
    p_hat: usize,
) -> Result<NeighbourhoodGraph> {
    let n = transformed.len();
    if p_hat == 0 || p_hat >= n {
        return Err(LvsdeError::InvalidConfig(format!(
            "p_hat = {p_hat} needs to be in [1, {}]",
            n.saturating_sub(1)
        )));
    }
    let out = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut order = others_by_distance(transformed.row(i), i);
            order.truncate(p_hat);
            order
        })
        .collect();
    Ok(NeighbourhoodGraph { out })
}
