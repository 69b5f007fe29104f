//! Reading delimiter-separated numeric tables into a [`DataSet`].

use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::distances::DistanceMatrix;
use crate::error::{LvsdeError, Result};
use crate::model::DataSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputFormat {
    /// One instance per row.
    #[default]
    Vectors,
    /// Square matrix of original-space distances.
    DistanceMatrix,
}

impl FromStr for InputFormat {
    type Err = LvsdeError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vectors" => Ok(InputFormat::Vectors),
            "distance-matrix" | "distance_matrix" | "matrix" => Ok(InputFormat::DistanceMatrix),
            other => Err(LvsdeError::InvalidInput(format!("unknown input format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelColumn {
    /// 0-based column index.
    Index(usize),
    Last,
}

impl FromStr for LabelColumn {
    type Err = LvsdeError;
    fn from_str(s: &str) -> Result<Self> {
        if s == "last" {
            return Ok(LabelColumn::Last);
        }
        s.parse()
            .map(LabelColumn::Index)
            .map_err(|_| LvsdeError::InvalidInput(format!("bad label column `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LoadOptions {
    pub format: InputFormat,
    pub label_column: Option<LabelColumn>,
    /// Skip the first non-comment line.
    pub has_header: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Delimiter {
    Comma,
    Whitespace,
}

impl Delimiter {
    fn detect(line: &str) -> Self {
        if line.contains(',') {
            Delimiter::Comma
        } else {
            Delimiter::Whitespace
        }
    }

    fn split<'a>(&self, line: &'a str) -> Vec<&'a str> {
        match self {
            Delimiter::Comma => line.split(',').map(str::trim).collect(),
            Delimiter::Whitespace => line.split_whitespace().collect(),
        }
    }
}

pub fn load_dataset(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<DataSet> {
    let text = fs::read_to_string(path)?;
    parse_dataset(&text, opts)
}

/// Parses a table. Blank lines and lines starting with `#` are skipped; the
/// delimiter (comma or whitespace) is detected from the first data line.
pub fn parse_dataset(text: &str, opts: &LoadOptions) -> Result<DataSet> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .peekable();
    if opts.has_header {
        lines.next();
    }
    let delimiter = match lines.peek() {
        Some((_, l)) => Delimiter::detect(l),
        None => return Err(LvsdeError::InvalidInput("no data rows".into())),
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut row_lines: Vec<usize> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    let mut width = None;
    for (line_no, line) in lines {
        let cells = delimiter.split(line);
        let expected = *width.get_or_insert(cells.len());
        if cells.len() != expected {
            return Err(LvsdeError::parse(
                line_no,
                cells.len().min(expected) + 1,
                format!("row has {} cells, expected {expected}", cells.len()),
            ));
        }
        let label_at = match opts.label_column {
            None => None,
            Some(LabelColumn::Last) => Some(expected - 1),
            Some(LabelColumn::Index(c)) if c < expected => Some(c),
            Some(LabelColumn::Index(c)) => {
                return Err(LvsdeError::parse(
                    line_no,
                    c + 1,
                    format!("label column {c} is past the last column"),
                ))
            }
        };
        let mut values = Vec::with_capacity(expected);
        for (c, cell) in cells.iter().enumerate() {
            if Some(c) == label_at {
                labels.push(cell.to_string());
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| {
                LvsdeError::parse(line_no, c + 1, format!("`{cell}` is not a number"))
            })?;
            if !v.is_finite() {
                return Err(LvsdeError::parse(line_no, c + 1, "value is not finite"));
            }
            values.push(v);
        }
        rows.push(values);
        row_lines.push(line_no);
    }

    let data = match opts.format {
        InputFormat::Vectors => DataSet::from_vectors(rows)?,
        InputFormat::DistanceMatrix => parse_matrix(rows, &row_lines)?,
    };
    if opts.label_column.is_some() {
        data.with_labels(labels)
    } else {
        Ok(data)
    }
}

fn parse_matrix(rows: Vec<Vec<f64>>, row_lines: &[usize]) -> Result<DataSet> {
    let n = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if cols != n {
        return Err(LvsdeError::parse(
            row_lines.first().copied().unwrap_or(1),
            1,
            format!("distance matrix is not square: {n} rows, {cols} columns"),
        ));
    }
    for (i, row) in rows.iter().enumerate() {
        for (j, &d) in row.iter().enumerate() {
            if d < 0.0 {
                return Err(LvsdeError::parse(row_lines[i], j + 1, format!("negative distance {d}")));
            }
            if i == j && d != 0.0 {
                return Err(LvsdeError::parse(
                    row_lines[i],
                    j + 1,
                    format!("diagonal entry is {d}, not 0"),
                ));
            }
        }
    }
    if rows.iter().flatten().all(|&d| d == 0.0) {
        log::warn!("every distance is zero: all {n} instances coincide");
    }
    DataSet::from_distance_matrix(DistanceMatrix::from_rows(rows)?)
}
