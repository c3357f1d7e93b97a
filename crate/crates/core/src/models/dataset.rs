//! CSV tables with standard-scaled numeric, integer-coded ordinal and one-hot
//! categorical columns.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CfxError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    /// Coded `0..levels.len()` in the given order.
    Ordinal {
        levels: Vec<String>,
    },
    /// One-hot; an empty list is filled from the data in order of appearance.
    Categorical {
        #[serde(default)]
        categories: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: ColumnKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<ColumnSpec>,
}

impl Schema {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// One coordinate of the encoded feature space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EncodedFeature {
    Numeric { column: String },
    Ordinal { column: String, levels: usize },
    OneHot { column: String, category: String },
}

impl EncodedFeature {
    pub fn column(&self) -> &str {
        match self {
            EncodedFeature::Numeric { column }
            | EncodedFeature::Ordinal { column, .. }
            | EncodedFeature::OneHot { column, .. } => column,
        }
    }

    /// Readable coordinate name, `column=category` for one-hot entries.
    pub fn label(&self) -> String {
        match self {
            EncodedFeature::OneHot { column, category } => format!("{column}={category}"),
            other => other.column().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Transform {
    Scale { mean: f64, std: f64 },
    Ordinal(Vec<String>),
    OneHot(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TabularDataset {
    schema: Schema,
    rows: Vec<Vec<String>>,
    transforms: Vec<Transform>,
}

pub fn load_dataset(path: impl AsRef<Path>, schema: &Schema) -> Result<TabularDataset> {
    TabularDataset::from_reader(std::fs::File::open(path)?, schema)
}

impl TabularDataset {
    pub fn from_reader(reader: impl Read, schema: &Schema) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header = csv.headers()?.clone();
        let index: Vec<usize> = schema
            .columns
            .iter()
            .map(|c| {
                header
                    .iter()
                    .position(|h| h == c.name)
                    .ok_or_else(|| CfxError::MissingColumn(c.name.clone()))
            })
            .collect::<Result<_>>()?;
        let mut rows = Vec::new();
        for record in csv.records() {
            let record = record?;
            rows.push(
                index
                    .iter()
                    .map(|&i| record.get(i).unwrap_or("").to_string())
                    .collect::<Vec<_>>(),
            );
        }

        let mut transforms = Vec::with_capacity(schema.columns.len());
        for (c, spec) in schema.columns.iter().enumerate() {
            let t = match &spec.kind {
                ColumnKind::Numeric => {
                    let values: Vec<f64> = rows
                        .iter()
                        .enumerate()
                        .map(|(r, row)| parse_numeric(&spec.name, r, &row[c]))
                        .collect::<Result<_>>()?;
                    let n = values.len().max(1) as f64;
                    let mean = values.iter().sum::<f64>() / n;
                    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                    let std = if var.sqrt() > 0.0 { var.sqrt() } else { 1.0 };
                    Transform::Scale { mean, std }
                }
                ColumnKind::Ordinal { levels } => {
                    if levels.is_empty() {
                        return Err(CfxError::InvalidParameter(format!(
                            "ordinal column {:?} declares no levels",
                            spec.name
                        )));
                    }
                    Transform::Ordinal(levels.clone())
                }
                ColumnKind::Categorical { categories } => {
                    let mut cats = categories.clone();
                    if cats.is_empty() {
                        for row in &rows {
                            if !cats.contains(&row[c]) {
                                cats.push(row[c].clone());
                            }
                        }
                    }
                    Transform::OneHot(cats)
                }
            };
            transforms.push(t);
        }
        let ds = Self {
            schema: schema.clone(),
            rows,
            transforms,
        };
        // Surface unknown categories at load time.
        for row in &ds.rows {
            ds.encode_row(row)?;
        }
        Ok(ds)
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    /// Raw rows in schema column order.
    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn features(&self) -> Vec<EncodedFeature> {
        let mut out = Vec::new();
        for (spec, t) in self.schema.columns.iter().zip(&self.transforms) {
            let column = spec.name.clone();
            match t {
                Transform::Scale { .. } => out.push(EncodedFeature::Numeric { column }),
                Transform::Ordinal(levels) => out.push(EncodedFeature::Ordinal {
                    column,
                    levels: levels.len(),
                }),
                Transform::OneHot(cats) => {
                    out.extend(cats.iter().map(|c| EncodedFeature::OneHot {
                        column: column.clone(),
                        category: c.clone(),
                    }))
                }
            }
        }
        out
    }

    pub fn encoded_dim(&self) -> usize {
        self.transforms
            .iter()
            .map(|t| match t {
                Transform::OneHot(c) => c.len(),
                _ => 1,
            })
            .sum()
    }

    /// Encodes a row given in schema column order.
    pub fn encode_row(&self, row: &[impl AsRef<str>]) -> Result<Vec<f64>> {
        if row.len() != self.transforms.len() {
            return Err(CfxError::DimensionMismatch {
                expected: self.transforms.len(),
                got: row.len(),
            });
        }
        let mut out = Vec::with_capacity(self.encoded_dim());
        for ((spec, t), cell) in self.schema.columns.iter().zip(&self.transforms).zip(row) {
            let cell = cell.as_ref();
            match t {
                Transform::Scale { mean, std } => {
                    out.push((parse_numeric(&spec.name, 0, cell)? - mean) / std)
                }
                Transform::Ordinal(levels) => {
                    let i = position(levels, &spec.name, cell)?;
                    out.push(i as f64);
                }
                Transform::OneHot(cats) => {
                    let i = position(cats, &spec.name, cell)?;
                    out.extend((0..cats.len()).map(|k| if k == i { 1.0 } else { 0.0 }));
                }
            }
        }
        Ok(out)
    }

    /// Inverse of [`encode_row`](Self::encode_row). Ordinal codes are rounded
    /// and one-hot blocks take their largest entry.
    pub fn decode_row(&self, x: &[f64]) -> Result<Vec<String>> {
        if x.len() != self.encoded_dim() {
            return Err(CfxError::DimensionMismatch {
                expected: self.encoded_dim(),
                got: x.len(),
            });
        }
        let mut out = Vec::with_capacity(self.transforms.len());
        let mut at = 0;
        for t in &self.transforms {
            match t {
                Transform::Scale { mean, std } => {
                    out.push(format!("{}", x[at] * std + mean));
                    at += 1;
                }
                Transform::Ordinal(levels) => {
                    let i = (x[at].round().max(0.0) as usize).min(levels.len() - 1);
                    out.push(levels[i].clone());
                    at += 1;
                }
                Transform::OneHot(cats) => {
                    let block = &x[at..at + cats.len()];
                    let mut best = 0;
                    for (k, v) in block.iter().enumerate() {
                        if *v > block[best] {
                            best = k;
                        }
                    }
                    out.push(cats[best].clone());
                    at += cats.len();
                }
            }
        }
        Ok(out)
    }

    pub fn encoded(&self) -> Result<Vec<Vec<f64>>> {
        self.rows.iter().map(|r| self.encode_row(r)).collect()
    }
}

fn parse_numeric(column: &str, row: usize, cell: &str) -> Result<f64> {
    cell.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CfxError::NonNumeric {
            column: column.to_string(),
            row,
            value: cell.to_string(),
        })
}

fn position(values: &[String], column: &str, cell: &str) -> Result<usize> {
    values
        .iter()
        .position(|v| v == cell)
        .ok_or_else(|| CfxError::UnknownCategory {
            column: column.to_string(),
            value: cell.to_string(),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_xoshiro::Xoshiro256PlusPlus;

    fn schema() -> Schema {
        serde_json::from_str(
            r#"{"columns": [
                {"name": "age", "kind": "numeric"},
                {"name": "edu", "kind": "ordinal", "levels": ["school", "bachelor", "master"]},
                {"name": "colour", "kind": "categorical", "categories": ["a", "b"]}
            ]}"#,
        )
        .unwrap()
    }

    #[test]
    fn single_row_standardises_to_zero() {
        let ds =
            TabularDataset::from_reader("age,edu,colour\n41.5,master,b\n".as_bytes(), &schema())
                .unwrap();
        let enc = ds.encoded().unwrap();
        assert_eq!(enc, vec![vec![0.0, 2.0, 0.0, 1.0]]);
    }

    #[test]
    fn one_hot_rows_sum_to_one() {
        let csv = "colour,age,edu\na,1,school\nb,2,bachelor\na,3,master\n";
        let ds = TabularDataset::from_reader(csv.as_bytes(), &schema()).unwrap();
        assert_eq!(ds.encoded_dim(), 4);
        for row in ds.encoded().unwrap() {
            assert_eq!(row[2] + row[3], 1.0);
        }
        let labels: Vec<String> = ds.features().iter().map(|f| f.label()).collect();
        assert_eq!(labels, ["age", "edu", "colour=a", "colour=b"]);
    }

    #[test]
    fn errors_are_specific() {
        let s = schema();
        let missing = TabularDataset::from_reader("age,edu\n1,school\n".as_bytes(), &s);
        assert!(matches!(missing, Err(CfxError::MissingColumn(c)) if c == "colour"));
        let bad = TabularDataset::from_reader("age,edu,colour\nold,school,a\n".as_bytes(), &s);
        assert!(matches!(bad, Err(CfxError::NonNumeric { .. })));
        let unknown = TabularDataset::from_reader("age,edu,colour\n1,school,c\n".as_bytes(), &s);
        assert!(matches!(unknown, Err(CfxError::UnknownCategory { .. })));
        let ds =
            TabularDataset::from_reader("age,edu,colour\n1,school,a\n".as_bytes(), &s).unwrap();
        assert!(matches!(
            ds.encode_row(&["1", "phd", "a"]),
            Err(CfxError::UnknownCategory { .. })
        ));
    }

    #[test]
    fn round_trip_on_synthetic_table() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(100);
        let mut csv = String::from("age,edu,colour,income\n");
        let levels = ["school", "bachelor", "master"];
        for _ in 0..100 {
            csv.push_str(&format!(
                "{},{},{},{}\n",
                rng.gen_range(18.0..90.0),
                levels[rng.gen_range(0..3)],
                ["a", "b"][rng.gen_range(0..2)],
                rng.gen_range(0..100_000)
            ));
        }
        let ds = TabularDataset::from_reader(csv.as_bytes(), &schema()).unwrap();
        for row in ds.rows() {
            let back = ds.decode_row(&ds.encode_row(row).unwrap()).unwrap();
            let a: f64 = row[0].parse().unwrap();
            let b: f64 = back[0].parse().unwrap();
            assert!((a - b).abs() <= 1e-12 * a.abs());
            assert_eq!(&back[1..], &row[1..]);
        }
        let again = TabularDataset::from_reader(csv.as_bytes(), &schema()).unwrap();
        let bytes = |d: &TabularDataset| -> Vec<u8> {
            d.encoded()
                .unwrap()
                .iter()
                .flatten()
                .flat_map(|v| v.to_le_bytes())
                .collect()
        };
        assert_eq!(bytes(&ds), bytes(&again));
    }

    #[test]
    fn categories_inferred_in_order_of_appearance() {
        let s: Schema =
            serde_json::from_str(r#"{"columns": [{"name": "c", "kind": "categorical"}]}"#).unwrap();
        let ds = TabularDataset::from_reader("c\nz\ny\nz\n".as_bytes(), &s).unwrap();
        assert_eq!(ds.encode_row(&["y"]).unwrap(), vec![0.0, 1.0]);
    }
}
