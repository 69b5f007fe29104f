#![allow(dead_code)]

use std::path::PathBuf;

use lvsde::io::{load_dataset, LabelColumn, LoadOptions};
use lvsde::{DataSet, Layer, ProjectedPoint, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn iris() -> DataSet {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/iris.csv");
    let opts = LoadOptions {
        label_column: Some(LabelColumn::Last),
        has_header: true,
        ..LoadOptions::default()
    };
    load_dataset(path, &opts).expect("iris table")
}

/// Two interleaved half-moons of 100 points each plus 20 points along a
/// straight bridge from the upper moon's left tip to the lower moon's left tip.
pub fn bridged_moons(seed: u64) -> DataSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..100 {
        let t = std::f64::consts::PI * i as f64 / 99.0;
        rows.push(vec![
            t.cos() + rng.gen_range(-0.05..0.05),
            t.sin() + rng.gen_range(-0.05..0.05),
        ]);
        labels.push("upper".to_string());
        rows.push(vec![
            1.0 - t.cos() + rng.gen_range(-0.05..0.05),
            0.5 - t.sin() + rng.gen_range(-0.05..0.05),
        ]);
        labels.push("lower".to_string());
    }
    let (from, to) = ((-1.0, 0.0), (0.0, 0.5));
    for i in 0..20 {
        let f = i as f64 / 19.0;
        rows.push(vec![
            from.0 + (to.0 - from.0) * f + rng.gen_range(-0.03..0.03),
            from.1 + (to.1 - from.1) * f + rng.gen_range(-0.03..0.03),
        ]);
        labels.push(if f < 0.5 { "upper" } else { "lower" }.to_string());
    }
    DataSet::from_vectors(rows)
        .and_then(|d| d.with_labels(labels))
        .expect("moons")
}

pub fn point(instance: usize, position: Vec2, layer: Layer) -> ProjectedPoint {
    ProjectedPoint {
        instance,
        position,
        layer,
        mass: 1.0,
        frozen: false,
        ineffective: false,
        is_second_projection: false,
    }
}

/// Random embedding of `instances` instances, some with a second projection.
/// Duplicated instances are gray; the rest are red or gray at random.
pub fn random_embedding(rng: &mut ChaCha8Rng, instances: usize, classes: usize) -> (Vec<ProjectedPoint>, Vec<String>) {
    let labels: Vec<String> = (0..instances)
        .map(|_| format!("c{}", rng.gen_range(0..classes)))
        .collect();
    let mut points = Vec::new();
    for i in 0..instances {
        let duplicated = rng.gen_bool(0.2);
        let layer = if duplicated || rng.gen_bool(0.3) { Layer::Gray } else { Layer::Red };
        points.push(point(i, Vec2::new(rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)), layer));
        if duplicated {
            let mut second = point(i, Vec2::new(rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)), layer);
            second.is_second_projection = true;
            points.push(second);
        }
    }
    (points, labels)
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values[values.len() / 2]
}
