//! The embedding document: a comma-separated table of projected points with
//! the run's configuration echoed in `#` header lines.
//!
//! ```text
//! # lvsde embedding v1
//! # instances = 3
//! # data_checksum = 5f1c...
//! # b = 0.9
//! # ...
//! point,instance,x,y,layer,second,mass,label
//! 0,0,412.5,98.25,red,0,1,setosa
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{LvsdeError, Result};
use crate::geometry::Vec2;
use crate::io::config::{apply_entry, config_entries};
use crate::model::{DataSet, Layer, ProjectedPoint, RunConfig};

const MAGIC: &str = "# lvsde embedding v1";
const COLUMNS: &str = "point,instance,x,y,layer,second,mass,label";

#[derive(Debug, Clone, PartialEq)]
pub struct DocumentPoint {
    pub instance: usize,
    pub position: Vec2,
    pub layer: Layer,
    pub is_second_projection: bool,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingDocument {
    pub config: RunConfig,
    pub data_checksum: String,
    pub instance_count: usize,
    /// One label per instance, when the data set had labels.
    pub labels: Option<Vec<String>>,
    pub points: Vec<DocumentPoint>,
}

/// SHA-256 over the data set's numeric content and labels, hex encoded.
pub fn data_checksum(data: &DataSet) -> String {
    let mut h = Sha256::new();
    h.update((data.len() as u64).to_le_bytes());
    if let Some(rows) = data.instances() {
        h.update(b"vectors");
        for row in rows {
            h.update((row.len() as u64).to_le_bytes());
            for v in row {
                h.update(v.to_bits().to_le_bytes());
            }
        }
    }
    if let Some(m) = data.precomputed() {
        h.update(b"matrix");
        for i in 0..m.len() {
            for v in m.row(i) {
                h.update(v.to_bits().to_le_bytes());
            }
        }
    }
    if let Some(labels) = data.labels() {
        h.update(b"labels");
        for l in labels {
            h.update(l.as_bytes());
            h.update([0u8]);
        }
    }
    h.finalize().iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

impl EmbeddingDocument {
    pub fn from_points(points: &[ProjectedPoint], data: &DataSet, config: &RunConfig) -> Self {
        EmbeddingDocument {
            config: config.clone(),
            data_checksum: data_checksum(data),
            instance_count: data.len(),
            labels: data.labels().map(<[String]>::to_vec),
            points: points
                .iter()
                .map(|p| DocumentPoint {
                    instance: p.instance,
                    position: p.position,
                    layer: p.layer,
                    is_second_projection: p.is_second_projection,
                    mass: p.mass,
                })
                .collect(),
        }
    }

    /// Points in the form the evaluation code expects (unfrozen, effective).
    pub fn projected_points(&self) -> Vec<ProjectedPoint> {
        self.points
            .iter()
            .map(|p| ProjectedPoint {
                instance: p.instance,
                position: p.position,
                layer: p.layer,
                mass: p.mass,
                frozen: false,
                ineffective: false,
                is_second_projection: p.is_second_projection,
            })
            .collect()
    }

    /// Point indices of each instance's projections.
    pub fn projections_of(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.instance_count];
        for (p, point) in self.points.iter().enumerate() {
            out[point.instance].push(p);
        }
        out
    }

    /// Every instance needs at least one projection and a point may only name
    /// a declared instance.
    pub fn validate(&self) -> Result<()> {
        let mut seen = vec![false; self.instance_count];
        for (p, point) in self.points.iter().enumerate() {
            match seen.get_mut(point.instance) {
                Some(s) => *s = true,
                None => {
                    return Err(LvsdeError::InvalidInput(format!(
                        "point {p} names instance {} of {}",
                        point.instance, self.instance_count
                    )))
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(LvsdeError::InvalidInput(format!("instance {i} has no projection")));
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.instance_count {
                return Err(LvsdeError::InvalidInput(format!(
                    "{} labels for {} instances",
                    labels.len(),
                    self.instance_count
                )));
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> Result<String> {
        self.validate()?;
        let mut out = String::new();
        out.push_str(MAGIC);
        out.push('\n');
        let _ = writeln!(out, "# instances = {}", self.instance_count);
        let _ = writeln!(out, "# data_checksum = {}", self.data_checksum);
        for (k, v) in config_entries(&self.config) {
            let _ = writeln!(out, "# {k} = {v}");
        }
        out.push_str(COLUMNS);
        out.push('\n');
        if let Some(labels) = &self.labels {
            if labels.iter().any(String::is_empty) {
                return Err(LvsdeError::InvalidInput("empty labels cannot be written".into()));
            }
            if let Some(bad) = labels.iter().find(|l| l.contains([',', '\n', '\r'])) {
                return Err(LvsdeError::InvalidInput(format!(
                    "label `{}` contains a delimiter and cannot be written",
                    bad.escape_debug()
                )));
            }
        }
        for (i, p) in self.points.iter().enumerate() {
            let label = self
                .labels
                .as_ref()
                .and_then(|l| l.get(p.instance))
                .map_or("", String::as_str);
            let _ = writeln!(
                out,
                "{i},{},{},{},{},{},{},{label}",
                p.instance,
                p.position.x,
                p.position.y,
                p.layer,
                u8::from(p.is_second_projection),
                p.mass
            );
        }
        Ok(out)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, l)) if l.trim() == MAGIC => {}
            _ => return Err(LvsdeError::parse(1, 1, "missing embedding document header")),
        }
        let mut config = RunConfig::default();
        let mut checksum = None;
        let mut instance_count = None;
        let mut points = Vec::new();
        let mut labels: Vec<Option<String>> = Vec::new();
        let mut any_label = false;
        let mut in_body = false;

        for (line_no, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            if !in_body {
                if let Some(rest) = line.strip_prefix('#') {
                    let (k, v) = rest
                        .split_once('=')
                        .ok_or_else(|| LvsdeError::parse(line_no, 1, "expected `# key = value`"))?;
                    let (k, v) = (k.trim(), v.trim());
                    match k {
                        "instances" => {
                            instance_count = Some(v.parse::<usize>().map_err(|_| {
                                LvsdeError::parse(line_no, 1, format!("bad instance count `{v}`"))
                            })?)
                        }
                        "data_checksum" => checksum = Some(v.to_string()),
                        _ => apply_entry(&mut config, k, v)
                            .map_err(|e| LvsdeError::parse(line_no, 1, e.to_string()))?,
                    }
                    continue;
                }
                if line.trim() != COLUMNS {
                    return Err(LvsdeError::parse(line_no, 1, "expected the column header"));
                }
                in_body = true;
                labels = vec![None; instance_count.unwrap_or(0)];
                continue;
            }

            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != 8 {
                return Err(LvsdeError::parse(
                    line_no,
                    cells.len().min(8) + 1,
                    format!("expected 8 cells, found {}", cells.len()),
                ));
            }
            let index: usize = parse_cell(&cells, 0, line_no)?;
            if index != points.len() {
                return Err(LvsdeError::parse(
                    line_no,
                    1,
                    format!("point {index} out of order, expected {}", points.len()),
                ));
            }
            let instance: usize = parse_cell(&cells, 1, line_no)?;
            if instance >= labels.len() {
                return Err(LvsdeError::parse(
                    line_no,
                    2,
                    format!("instance {instance} outside the declared count {}", labels.len()),
                ));
            }
            let x: f64 = parse_cell(&cells, 2, line_no)?;
            let y: f64 = parse_cell(&cells, 3, line_no)?;
            let layer: Layer = cells[4]
                .parse()
                .map_err(|_| LvsdeError::parse(line_no, 5, format!("bad layer `{}`", cells[4])))?;
            let second = match cells[5] {
                "0" => false,
                "1" => true,
                other => return Err(LvsdeError::parse(line_no, 6, format!("bad flag `{other}`"))),
            };
            let mass: f64 = parse_cell(&cells, 6, line_no)?;
            let label = cells[7];
            if !label.is_empty() {
                any_label = true;
                match &labels[instance] {
                    Some(existing) if existing != label => {
                        return Err(LvsdeError::parse(
                            line_no,
                            8,
                            format!("instance {instance} labelled both `{existing}` and `{label}`"),
                        ))
                    }
                    _ => labels[instance] = Some(label.to_string()),
                }
            }
            points.push(DocumentPoint {
                instance,
                position: Vec2::new(x, y),
                layer,
                is_second_projection: second,
                mass,
            });
        }
        if !in_body {
            return Err(LvsdeError::parse(text.lines().count().max(1), 1, "missing column header"));
        }
        let instance_count = instance_count
            .ok_or_else(|| LvsdeError::parse(1, 1, "missing `instances` header"))?;
        let labels = if any_label {
            let complete: Option<Vec<String>> = labels.into_iter().collect();
            Some(complete.ok_or_else(|| {
                LvsdeError::InvalidInput("some instances have no label".into())
            })?)
        } else {
            None
        };
        let doc = EmbeddingDocument {
            config,
            data_checksum: checksum.unwrap_or_default(),
            instance_count,
            labels,
            points,
        };
        doc.validate()?;
        Ok(doc)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text()?)?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }
}

fn parse_cell<T: std::str::FromStr>(cells: &[&str], c: usize, line: usize) -> Result<T> {
    cells[c]
        .trim()
        .parse()
        .map_err(|_| LvsdeError::parse(line, c + 1, format!("bad value `{}`", cells[c])))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> EmbeddingDocument {
        let data = DataSet::from_vectors(vec![vec![0.0], vec![1.0], vec![2.0]])
            .unwrap()
            .with_labels(vec!["a".into(), "b".into(), "a".into()])
            .unwrap();
        let mut points: Vec<ProjectedPoint> = (0..3)
            .map(|i| ProjectedPoint {
                instance: i,
                position: Vec2::new(i as f64 * 0.1, 1.0 / 3.0),
                layer: Layer::Red,
                mass: 1.0,
                frozen: false,
                ineffective: false,
                is_second_projection: false,
            })
            .collect();
        points[2].layer = Layer::Gray;
        points[2].mass = 0.25;
        points.push(ProjectedPoint {
            instance: 2,
            is_second_projection: true,
            mass: 0.75,
            ..points[2].clone()
        });
        EmbeddingDocument::from_points(&points, &data, &RunConfig::default())
    }

    #[test]
    fn text_round_trip() {
        let doc = sample();
        let text = doc.to_text().unwrap();
        assert!(text.starts_with(MAGIC));
        assert_eq!(EmbeddingDocument::parse(&text).unwrap(), doc);
    }

    #[test]
    fn projections_grouping() {
        assert_eq!(sample().projections_of(), vec![vec![0], vec![1], vec![2, 3]]);
    }

    #[test]
    fn rejects_delimiter_in_label() {
        let mut doc = sample();
        doc.labels.as_mut().unwrap()[0] = "a,b".into();
        assert!(doc.to_text().is_err());
    }

    #[test]
    fn rejects_conflicting_labels() {
        let text = sample().to_text().unwrap().replace("0.75,a", "0.75,b");
        assert!(EmbeddingDocument::parse(&text).is_err());
    }

    #[test]
    fn instance_without_projection() {
        let mut doc = sample();
        doc.points.pop();
        doc.points.pop();
        assert!(doc.to_text().is_err());
        let text = sample().to_text().unwrap();
        let cut: String = text.lines().filter(|l| !l.starts_with("2,") && !l.starts_with("3,")).map(|l| format!("{l}\n")).collect();
        assert!(EmbeddingDocument::parse(&cut).is_err());
    }

    #[test]
    fn checksum_tracks_content() {
        let a = DataSet::from_vectors(vec![vec![0.0], vec![1.0]]).unwrap();
        let b = DataSet::from_vectors(vec![vec![0.0], vec![1.5]]).unwrap();
        assert_eq!(data_checksum(&a), data_checksum(&a.clone()));
        assert_ne!(data_checksum(&a), data_checksum(&b));
        assert_eq!(data_checksum(&a).len(), 64);
    }
}
