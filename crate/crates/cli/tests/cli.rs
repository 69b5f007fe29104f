use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lvsde::io::{DocumentPoint, EmbeddingDocument};
use lvsde::{Layer, RunConfig, Vec2};

fn lvsde(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lvsde"))
        .args(args)
        .output()
        .expect("spawn lvsde")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn iris_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/iris.csv")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Short IRIS embedding into `dir`, returning the document path.
fn embed_iris(dir: &Path, seed: &str) -> PathBuf {
    let out = dir.join(format!("iris_{seed}.csv"));
    let o = lvsde(&[
        "embed",
        "--input",
        p(&iris_path()),
        "--header",
        "--label-column",
        "last",
        "--b",
        "-0.1",
        "--iterations",
        "60,40,30,40",
        "--seed",
        seed,
        "--output",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

#[test]
fn embed_writes_valid_document() {
    let dir = tempfile::tempdir().unwrap();
    let path = embed_iris(dir.path(), "3");
    let doc = EmbeddingDocument::read(&path).unwrap();
    assert_eq!(doc.instance_count, 150);
    assert_eq!(doc.config.b, -0.1);
    assert_eq!(doc.config.seed, 3);
    assert_eq!(doc.config.phase_iterations, [60, 40, 30, 40]);
    assert_eq!(doc.data_checksum.len(), 64);
    assert_eq!(doc.labels.as_ref().unwrap()[0], "setosa");
    let mut count = vec![0; 150];
    for pt in &doc.points {
        count[pt.instance] += 1;
    }
    assert!(count.iter().all(|&c| c == 1 || c == 2));
    for (i, &c) in count.iter().enumerate() {
        if c == 2 {
            assert!(doc.points.iter().filter(|q| q.instance == i).all(|q| q.layer == Layer::Gray));
        }
    }
}

#[test]
fn embed_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = fs::read(embed_iris(dir.path(), "9")).unwrap();
    let b_path = dir.path().join("again.csv");
    fs::copy(embed_iris(dir.path(), "9"), &b_path).unwrap();
    assert_eq!(a, fs::read(&b_path).unwrap());
    let c = fs::read(embed_iris(dir.path(), "10")).unwrap();
    assert_ne!(a, c);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "# settings\nb = 0.5\np_hat = 7\nz = 9\niterations = 20,20,20,20\nseed = 1\n").unwrap();
    let out = dir.path().join("doc.csv");
    let o = lvsde(&[
        "embed", "--input", p(&iris_path()), "--header", "--label-column", "4",
        "--config", p(&cfg), "--p-hat", "12", "--output", p(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc = EmbeddingDocument::read(&out).unwrap();
    assert_eq!(doc.config.b, 0.5);
    assert_eq!(doc.config.p_hat, 12);
    assert_eq!(doc.config.z, 9);
    assert_eq!(doc.config.phase_iterations, [20, 20, 20, 20]);
}

#[test]
fn embed_to_stdout_and_distance_matrix_input() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.txt");
    let pts: Vec<(f64, f64)> = (0..12).map(|i| ((i % 4) as f64, (i / 4) as f64 * 1.5)).collect();
    let rows: Vec<String> = pts
        .iter()
        .map(|a| {
            pts.iter()
                .map(|b| ((a.0 - b.0).hypot(a.1 - b.1)).to_string())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();
    fs::write(&m, rows.join("\n")).unwrap();
    let o = lvsde(&[
        "embed", "--input", p(&m), "--format", "distance-matrix", "--metric", "precomputed",
        "--p-hat", "3", "--z", "3", "--iterations", "10,10,10,10",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc = EmbeddingDocument::parse(&stdout(&o)).unwrap();
    assert_eq!(doc.instance_count, 12);
    assert!(doc.labels.is_none());
}

#[test]
fn snapshots_and_best_selection() {
    let dir = tempfile::tempdir().unwrap();
    let snaps = dir.path().join("snaps");
    let out = dir.path().join("best.csv");
    let o = lvsde(&[
        "embed", "--input", p(&iris_path()), "--header", "--label-column", "last",
        "--iterations", "20,20,20,20", "--snapshots", "20", "--snapshot-dir", p(&snaps),
        "--select-best", "15", "--output", p(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let written = fs::read_dir(&snaps).unwrap().count();
    assert_eq!(written, 4);
    EmbeddingDocument::read(&out).unwrap();
}

#[test]
fn evaluate_prints_six_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = embed_iris(dir.path(), "5");
    let o = lvsde(&["evaluate", "--input", p(&path)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 7, "{text}");
    assert!(lines[1].starts_with("red+gray"));
    for line in &lines[1..] {
        let value = line.split_whitespace().last().unwrap();
        if value != "n/a" {
            let (_, decimals) = value.split_once('.').unwrap();
            assert_eq!(decimals.len(), 3);
            let v: f64 = value.parse().unwrap();
            assert!((0.0..=1.0).contains(&v));
        }
    }
}

fn loo_knn(points: &[Vec2], labels: &[String], k: usize) -> f64 {
    let mut hits = 0;
    for i in 0..points.len() {
        let mut others: Vec<usize> = (0..points.len()).filter(|&j| j != i).collect();
        others.sort_by(|&a, &b| {
            points[i]
                .distance_squared(points[a])
                .total_cmp(&points[i].distance_squared(points[b]))
                .then(a.cmp(&b))
        });
        let mut votes: HashMap<&str, usize> = HashMap::new();
        for &j in &others[..k] {
            *votes.entry(&labels[j]).or_default() += 1;
        }
        let top = *votes.values().max().unwrap();
        hits += usize::from(votes.get(labels[i].as_str()) == Some(&top));
    }
    hits as f64 / points.len() as f64
}

#[test]
fn evaluate_matches_leave_one_out_knn() {
    let dir = tempfile::tempdir().unwrap();
    let n = 40;
    let positions: Vec<Vec2> = (0..n)
        .map(|i| Vec2::new(((i * 37) % 17) as f64 + 0.01 * i as f64, ((i * 11) % 13) as f64))
        .collect();
    let labels: Vec<String> = (0..n).map(|i| format!("c{}", (i * 7 % 5) % 3)).collect();
    let doc = EmbeddingDocument {
        config: RunConfig::default(),
        data_checksum: String::new(),
        instance_count: n,
        labels: Some(labels.clone()),
        points: positions
            .iter()
            .enumerate()
            .map(|(i, &position)| DocumentPoint {
                instance: i,
                position,
                layer: Layer::Red,
                is_second_projection: false,
                mass: 1.0,
            })
            .collect(),
    };
    let path = dir.path().join("single.csv");
    doc.write(&path).unwrap();
    let o = lvsde(&["evaluate", "--input", p(&path), "--k", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let want = format!("{:.3}", loo_knn(&positions, &labels, 5));
    let text = stdout(&o);
    let red_red = text.lines().find(|l| l.starts_with("red ")).unwrap();
    assert!(red_red.ends_with(&want), "{red_red} vs {want}");
    let gray = text.lines().find(|l| l.starts_with("gray ")).unwrap();
    assert!(gray.ends_with("n/a"));
}

#[test]
fn render_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let doc = embed_iris(dir.path(), "2");
    let a = dir.path().join("a.svg");
    let b = dir.path().join("b.svg");
    for out in [&a, &b] {
        let o = lvsde(&["render", "--input", p(&doc), "--output", p(out), "--metaphor", "small-gray"]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let svg = fs::read_to_string(&a).unwrap();
    assert_eq!(svg, fs::read_to_string(&b).unwrap());
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("versicolor"));
}

#[test]
fn query_rect_lists_sibling() {
    let dir = tempfile::tempdir().unwrap();
    let pt = |instance, x, y, layer, second| DocumentPoint {
        instance,
        position: Vec2::new(x, y),
        layer,
        is_second_projection: second,
        mass: 0.5,
    };
    let doc = EmbeddingDocument {
        config: RunConfig::default(),
        data_checksum: String::new(),
        instance_count: 3,
        labels: None,
        points: vec![
            pt(0, 0.0, 0.0, Layer::Red, false),
            pt(1, 10.0, 10.0, Layer::Gray, false),
            pt(2, -5.0, 3.0, Layer::Gray, false),
            pt(1, 90.0, 90.0, Layer::Gray, true),
            pt(2, 40.0, 40.0, Layer::Gray, true),
        ],
    };
    let path = dir.path().join("q.csv");
    doc.write(&path).unwrap();
    let o = lvsde(&["query-rect", "--input", p(&path), "--rect", "5,5,15,15"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "point,instance,x,y,sibling,sibling_x,sibling_y\n1,1,10,10,3,90,90\n");

    let o = lvsde(&["query-rect", "--input", p(&path), "--rect", "-1,-1,1,1"]);
    assert_eq!(stdout(&o).lines().count(), 1);

    let o = lvsde(&["query-rect", "--input", p(&path), "--rect", "-10,-10,100,100"]);
    assert_eq!(stdout(&o).lines().count(), 5);
}

#[test]
fn errors_exit_nonzero_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let o = lvsde(&["embed", "--input", p(&dir.path().join("missing.csv"))]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("error:"));

    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "0,1,2,3,4\n1,0,1,2,3\n2,1,0,1,2\n3,2,1,0,1\n").unwrap();
    let o = lvsde(&["embed", "--input", p(&bad), "--format", "distance-matrix"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("not square"), "{}", stderr(&o));

    let ragged = dir.path().join("ragged.csv");
    fs::write(&ragged, "1,2\n3,4\n5,x\n").unwrap();
    let o = lvsde(&["embed", "--input", p(&ragged)]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let o = lvsde(&["embed", "--input", p(&iris_path()), "--header", "--label-column", "last", "--p-hat", "500"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("p_hat"), "{}", stderr(&o));

    let o = lvsde(&["query-rect", "--input", p(&iris_path()), "--rect", "0,0,1,1"]);
    assert!(!o.status.success());
}
