//! Observation tables, unit-hypercube normalization and order comparisons.

use std::collections::HashSet;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{RankError, Result};
use crate::scalar::Scalar;

/// Per-attribute monotone direction: `+1` when larger values rank higher,
/// `-1` when larger values rank lower.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrientationVector {
    deltas: Vec<i8>,
}

impl OrientationVector {
    pub fn new(deltas: Vec<i8>) -> Result<Self> {
        if deltas.is_empty() {
            return Err(RankError::InvalidOrientation(String::from("<empty>")));
        }
        if let Some(bad) = deltas.iter().find(|&&d| d != 1 && d != -1) {
            return Err(RankError::InvalidOrientation(bad.to_string()));
        }
        Ok(Self { deltas })
    }

    /// All attributes increasing.
    pub fn increasing(d: usize) -> Self {
        Self {
            deltas: vec![1; d.max(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }

    pub fn deltas(&self) -> &[i8] {
        &self.deltas
    }

    #[inline]
    pub fn delta<T: Scalar>(&self, j: usize) -> T {
        if self.deltas[j] > 0 {
            T::one()
        } else {
            -T::one()
        }
    }

    /// Attributes where larger is better.
    pub fn increasing_set(&self) -> Vec<usize> {
        (0..self.len()).filter(|&j| self.deltas[j] > 0).collect()
    }

    /// Attributes where larger is worse.
    pub fn decreasing_set(&self) -> Vec<usize> {
        (0..self.len()).filter(|&j| self.deltas[j] < 0).collect()
    }

    /// Hypercube corner `(1 - alpha) / 2`, the worst point.
    pub fn start_corner<T: Scalar>(&self) -> Vec<T> {
        self.deltas
            .iter()
            .map(|&d| if d > 0 { T::zero() } else { T::one() })
            .collect()
    }

    /// Hypercube corner `(1 + alpha) / 2`, the best point.
    pub fn end_corner<T: Scalar>(&self) -> Vec<T> {
        self.deltas
            .iter()
            .map(|&d| if d > 0 { T::one() } else { T::zero() })
            .collect()
    }

    pub fn check_dim(&self, d: usize) -> Result<()> {
        if self.len() != d {
            return Err(RankError::DimensionMismatch {
                expected: d,
                actual: self.len(),
            });
        }
        Ok(())
    }
}

impl FromStr for OrientationVector {
    type Err = RankError;

    /// Parses comma separated signs such as `"+,+,-,-"` or `"1,1,-1,-1"`.
    fn from_str(text: &str) -> Result<Self> {
        let deltas = text
            .split(',')
            .map(|tok| match tok.trim() {
                "+" | "+1" | "1" => Ok(1),
                "-" | "-1" => Ok(-1),
                other => Err(RankError::InvalidOrientation(other.to_string())),
            })
            .collect::<Result<Vec<i8>>>()?;
        Self::new(deltas)
    }
}

impl fmt::Display for OrientationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = self
            .deltas
            .iter()
            .map(|&d| if d > 0 { "+" } else { "-" })
            .collect();
        f.write_str(&parts.join(","))
    }
}

/// Raw `n x d` observation table in attribute-native units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset<T> {
    pub attribute_names: Vec<String>,
    pub object_ids: Vec<String>,
    pub values: Vec<Vec<T>>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(
        attribute_names: Vec<String>,
        object_ids: Vec<String>,
        values: Vec<Vec<T>>,
    ) -> Result<Self> {
        if attribute_names.is_empty() {
            return Err(RankError::NoAttributes);
        }
        if values.is_empty() {
            return Err(RankError::NoRows);
        }
        let mut seen = HashSet::new();
        for name in &attribute_names {
            if !seen.insert(name.as_str()) {
                return Err(RankError::DuplicateAttribute(name.clone()));
            }
        }
        if object_ids.len() != values.len() {
            return Err(RankError::DimensionMismatch {
                expected: values.len(),
                actual: object_ids.len(),
            });
        }
        let d = attribute_names.len();
        for row in &values {
            if row.len() != d {
                return Err(RankError::DimensionMismatch {
                    expected: d,
                    actual: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(RankError::NonFinite("dataset values"));
            }
        }
        Ok(Self {
            attribute_names,
            object_ids,
            values,
        })
    }

    /// Builds a dataset with attribute names `x1..xd` and ids `1..n`.
    pub fn from_rows(values: Vec<Vec<T>>) -> Result<Self> {
        let d = values.first().map_or(0, Vec::len);
        let names = (1..=d).map(|j| format!("x{j}")).collect();
        let ids = (1..=values.len()).map(|i| i.to_string()).collect();
        Self::new(names, ids, values)
    }

    pub fn n_objects(&self) -> usize {
        self.values.len()
    }

    pub fn n_attributes(&self) -> usize {
        self.attribute_names.len()
    }

    /// Applies `a_j * x + b_j` column-wise.
    pub fn affine_map(&self, scale: &[T], offset: &[T]) -> Result<Self> {
        let d = self.n_attributes();
        for len in [scale.len(), offset.len()] {
            if len != d {
                return Err(RankError::DimensionMismatch {
                    expected: d,
                    actual: len,
                });
            }
        }
        let values = self
            .values
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(j, &v)| scale[j] * v + offset[j])
                    .collect()
            })
            .collect();
        Ok(Self {
            attribute_names: self.attribute_names.clone(),
            object_ids: self.object_ids.clone(),
            values,
        })
    }
}

/// Result of CSV ingestion: the surviving rows plus how many were dropped.
#[derive(Debug, Clone)]
pub struct CsvLoad<T> {
    pub dataset: Dataset<T>,
    pub dropped_rows: usize,
}

/// Reads a header-first CSV file. Rows with an empty or non-numeric cell in
/// any attribute column are dropped and counted.
pub fn load_csv<T: Scalar>(path: impl AsRef<Path>, id_column: Option<&str>) -> Result<CsvLoad<T>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| RankError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, id_column)
}

pub fn read_csv<T: Scalar, R: Read>(reader: R, id_column: Option<&str>) -> Result<CsvLoad<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    let id_idx = match id_column {
        Some(name) => Some(
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| RankError::MissingIdColumn(name.to_string()))?,
        ),
        None => None,
    };
    let attr_idx: Vec<usize> = (0..header.len()).filter(|&c| Some(c) != id_idx).collect();
    if attr_idx.is_empty() {
        return Err(RankError::NoAttributes);
    }
    let attribute_names: Vec<String> = attr_idx.iter().map(|&c| header[c].clone()).collect();
    let mut seen = HashSet::new();
    for name in &attribute_names {
        if !seen.insert(name.as_str()) {
            return Err(RankError::DuplicateAttribute(name.clone()));
        }
    }

    let mut object_ids = Vec::new();
    let mut values = Vec::new();
    let mut dropped_rows = 0;
    for (row_no, record) in rdr.records().enumerate() {
        let record = record?;
        let parsed: Option<Vec<T>> = attr_idx
            .iter()
            .map(|&c| {
                record
                    .get(c)
                    .map(str::trim)
                    .filter(|cell| !cell.is_empty())
                    .and_then(|cell| cell.parse::<f64>().ok())
                    .filter(|v| v.is_finite())
                    .and_then(T::from_f64)
            })
            .collect();
        match parsed {
            Some(row) => {
                let id = match id_idx {
                    Some(c) => record.get(c).unwrap_or_default().trim().to_string(),
                    None => (row_no + 1).to_string(),
                };
                object_ids.push(id);
                values.push(row);
            }
            None => dropped_rows += 1,
        }
    }
    if values.is_empty() {
        return Err(RankError::NoRows);
    }
    Ok(CsvLoad {
        dataset: Dataset {
            attribute_names,
            object_ids,
            values,
        },
        dropped_rows,
    })
}

/// Observations rescaled column-wise into `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedDataset<T> {
    pub values: Vec<Vec<T>>,
    pub col_min: Vec<T>,
    pub col_max: Vec<T>,
}

impl<T: Scalar> NormalizedDataset<T> {
    /// Wraps observations that already live in the unit hypercube, with
    /// bounds `0` and `1`. Unlike [`normalize`], columns need not attain
    /// both ends of the interval; relative positions inside the cube are kept.
    pub fn from_unit_cube(values: Vec<Vec<T>>) -> Result<Self> {
        let d = values.first().map_or(0, Vec::len);
        if values.is_empty() {
            return Err(RankError::NoRows);
        }
        if d == 0 {
            return Err(RankError::NoAttributes);
        }
        for row in &values {
            if row.len() != d {
                return Err(RankError::DimensionMismatch {
                    expected: d,
                    actual: row.len(),
                });
            }
            if row.iter().any(|&v| !(v >= T::zero() && v <= T::one())) {
                return Err(RankError::InvalidConfig(
                    "unit-cube input must lie in [0, 1] in every attribute".into(),
                ));
            }
        }
        Ok(Self {
            values,
            col_min: vec![T::zero(); d],
            col_max: vec![T::one(); d],
        })
    }

    pub fn n_objects(&self) -> usize {
        self.values.len()
    }

    pub fn n_attributes(&self) -> usize {
        self.col_min.len()
    }

    pub fn ranges(&self) -> Vec<T> {
        self.col_max
            .iter()
            .zip(&self.col_min)
            .map(|(&hi, &lo)| hi - lo)
            .collect()
    }

    /// Normalizes an unseen raw row with the fit-time bounds. Values outside
    /// the bounds are clamped into `[0, 1]`; the flag reports whether that
    /// happened.
    pub fn normalize_row(&self, raw: &[T]) -> Result<(Vec<T>, bool)> {
        if raw.len() != self.n_attributes() {
            return Err(RankError::DimensionMismatch {
                expected: self.n_attributes(),
                actual: raw.len(),
            });
        }
        let mut extrapolated = false;
        let row = raw
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                let u = (v - self.col_min[j]) / (self.col_max[j] - self.col_min[j]);
                if u < T::zero() || u > T::one() {
                    extrapolated = true;
                }
                u.max(T::zero()).min(T::one())
            })
            .collect();
        Ok((row, extrapolated))
    }

    /// Maps a normalized row back to original units.
    pub fn denormalize_row(&self, unit: &[T]) -> Vec<T> {
        unit.iter()
            .enumerate()
            .map(|(j, &u)| self.col_min[j] + u * (self.col_max[j] - self.col_min[j]))
            .collect()
    }
}

/// Min-max scales each column into `[0, 1]`.
pub fn normalize<T: Scalar>(ds: &Dataset<T>) -> Result<NormalizedDataset<T>> {
    let d = ds.n_attributes();
    let mut col_min = vec![T::infinity(); d];
    let mut col_max = vec![T::neg_infinity(); d];
    for row in &ds.values {
        for (j, &v) in row.iter().enumerate() {
            col_min[j] = col_min[j].min(v);
            col_max[j] = col_max[j].max(v);
        }
    }
    for j in 0..d {
        if !(col_max[j] > col_min[j]) {
            return Err(RankError::ConstantColumn(ds.attribute_names[j].clone()));
        }
    }
    let values = ds
        .values
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(j, &v)| (v - col_min[j]) / (col_max[j] - col_min[j]))
                .collect()
        })
        .collect();
    Ok(NormalizedDataset {
        values,
        col_min,
        col_max,
    })
}

/// Outcome of comparing two observations under an orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PointOrder {
    /// The first point ranks below the second.
    Precedes,
    /// The first point ranks above the second.
    Succeeds,
    Equal,
    /// Attributes disagree; componentwise order leaves the pair unordered.
    Incomparable,
}

pub fn compare_points<T: Scalar>(
    x: &[T],
    y: &[T],
    alpha: &OrientationVector,
) -> Result<PointOrder> {
    alpha.check_dim(x.len())?;
    alpha.check_dim(y.len())?;
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(RankError::NonFinite("compared points"));
    }
    if x == y {
        return Ok(PointOrder::Equal);
    }
    let mut forward = true;
    let mut backward = true;
    for j in 0..x.len() {
        let step = alpha.delta::<T>(j) * (y[j] - x[j]);
        forward &= step >= T::zero();
        backward &= step <= T::zero();
    }
    Ok(match (forward, backward) {
        (true, _) => PointOrder::Precedes,
        (_, true) => PointOrder::Succeeds,
        _ => PointOrder::Incomparable,
    })
}

/// Per-attribute order numbers: `1` for the worst value in the attribute's
/// direction, `n` for the best. Ties share the average of their positions.
pub fn attribute_rank_lists<T: Scalar>(
    nds: &NormalizedDataset<T>,
    alpha: &OrientationVector,
) -> Result<Vec<Vec<T>>> {
    alpha.check_dim(nds.n_attributes())?;
    Ok((0..nds.n_attributes())
        .map(|j| {
            let delta = alpha.delta::<T>(j);
            let keyed: Vec<T> = nds.values.iter().map(|row| delta * row[j]).collect();
            average_ranks(&keyed)
        })
        .collect())
}

/// Ascending fractional ranks (1-based) with ties averaged.
pub(crate) fn average_ranks<T: Scalar>(keys: &[T]) -> Vec<T> {
    let n = keys.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| keys[a].partial_cmp(&keys[b]).expect("finite keys"));
    let mut ranks = vec![T::zero(); n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && keys[order[end]] == keys[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end share their mean
        let mean = T::from_usize_lossy(start + 1 + end) / T::lit(2.0);
        for &idx in &order[start..end] {
            ranks[idx] = mean;
        }
        start = end;
    }
    ranks
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(rows: Vec<Vec<f64>>) -> Dataset<f64> {
        Dataset::from_rows(rows).unwrap()
    }

    #[test]
    fn orientation_parsing() {
        let a: OrientationVector = "+,+,-,-".parse().unwrap();
        assert_eq!(a.deltas(), &[1, 1, -1, -1]);
        assert_eq!(a.increasing_set(), vec![0, 1]);
        assert_eq!(a.decreasing_set(), vec![2, 3]);
        assert_eq!(a.to_string(), "+,+,-,-");
        let b: OrientationVector = "1, -1".parse().unwrap();
        assert_eq!(b.deltas(), &[1, -1]);
        assert!("+,0".parse::<OrientationVector>().is_err());
        assert!(OrientationVector::new(vec![]).is_err());
        assert!(OrientationVector::new(vec![2]).is_err());
    }

    #[test]
    fn corners_follow_orientation() {
        let a: OrientationVector = "+,-".parse().unwrap();
        assert_eq!(a.start_corner::<f64>(), vec![0.0, 1.0]);
        assert_eq!(a.end_corner::<f64>(), vec![1.0, 0.0]);
    }

    #[test]
    fn csv_without_gaps() {
        let text = "a,b\n1,2\n3,4\n5,6\n";
        let load = read_csv::<f64, _>(text.as_bytes(), None).unwrap();
        assert_eq!(load.dataset.n_objects(), 3);
        assert_eq!(load.dataset.n_attributes(), 2);
        assert_eq!(load.dataset.object_ids, vec!["1", "2", "3"]);
        assert_eq!(load.dropped_rows, 0);
    }

    #[test]
    fn csv_with_id_column_and_gaps() {
        let text = "name,a,b\nfoo,1,2\nbar,,4\nbaz,x,5\nqux,7,8\n";
        let load = read_csv::<f64, _>(text.as_bytes(), Some("name")).unwrap();
        assert_eq!(load.dataset.object_ids, vec!["foo", "qux"]);
        assert_eq!(load.dataset.attribute_names, vec!["a", "b"]);
        assert_eq!(load.dropped_rows, 2);
    }

    #[test]
    fn csv_drops_58_of_451() {
        let mut text = String::from("id,x1,x2,x3\n");
        for i in 0..451 {
            if i % 7 == 3 && i / 7 < 58 {
                text.push_str(&format!("j{i},1.5,,2\n"));
            } else {
                text.push_str(&format!("j{i},{i},{},3\n", i * 2));
            }
        }
        let load = read_csv::<f64, _>(text.as_bytes(), Some("id")).unwrap();
        assert_eq!(load.dropped_rows, 58);
        assert_eq!(load.dataset.n_objects(), 393);
    }

    #[test]
    fn csv_only_row_blank_is_error() {
        let text = "a,b\n1,\n";
        assert!(matches!(
            read_csv::<f64, _>(text.as_bytes(), None),
            Err(RankError::NoRows)
        ));
    }

    #[test]
    fn csv_duplicate_attribute() {
        let text = "a,a\n1,2\n";
        assert!(matches!(
            read_csv::<f64, _>(text.as_bytes(), None),
            Err(RankError::DuplicateAttribute(_))
        ));
    }

    #[test]
    fn csv_unknown_id_column() {
        let text = "a,b\n1,2\n";
        assert!(matches!(
            read_csv::<f64, _>(text.as_bytes(), Some("name")),
            Err(RankError::MissingIdColumn(_))
        ));
    }

    #[test]
    fn load_missing_file() {
        assert!(matches!(
            load_csv::<f64>("/nonexistent/file.csv", None),
            Err(RankError::Io { .. })
        ));
    }

    #[test]
    fn normalize_column() {
        let n = normalize(&ds(vec![vec![2.0, 0.0], vec![4.0, 1.0], vec![6.0, 0.5]])).unwrap();
        let col0: Vec<f64> = n.values.iter().map(|r| r[0]).collect();
        let col1: Vec<f64> = n.values.iter().map(|r| r[1]).collect();
        assert_eq!(col0, vec![0.0, 0.5, 1.0]);
        assert_eq!(col1, vec![0.0, 1.0, 0.5]);
        assert_eq!(n.col_min, vec![2.0, 0.0]);
        assert_eq!(n.col_max, vec![6.0, 1.0]);
    }

    #[test]
    fn normalize_constant_column_names_it() {
        let data = Dataset::new(
            vec!["good".into(), "flat".into()],
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![1.0, 5.0], vec![2.0, 5.0], vec![3.0, 5.0]],
        )
        .unwrap();
        match normalize(&data) {
            Err(RankError::ConstantColumn(name)) => assert_eq!(name, "flat"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unit_cube_input_is_kept() {
        let n = NormalizedDataset::from_unit_cube(vec![vec![0.3, 0.25], vec![0.7, 0.7]]).unwrap();
        assert_eq!(n.values[0], vec![0.3, 0.25]);
        assert_eq!(n.ranges(), vec![1.0, 1.0]);
        assert!(NormalizedDataset::from_unit_cube(vec![vec![1.2]]).is_err());
        assert!(NormalizedDataset::<f64>::from_unit_cube(vec![]).is_err());
        assert!(NormalizedDataset::from_unit_cube(vec![vec![0.1], vec![0.2, 0.3]]).is_err());
    }

    #[test]
    fn normalize_row_flags_extrapolation() {
        let n = normalize(&ds(vec![vec![0.0], vec![10.0]])).unwrap();
        assert_eq!(n.normalize_row(&[5.0]).unwrap(), (vec![0.5], false));
        assert_eq!(n.normalize_row(&[20.0]).unwrap(), (vec![1.0], true));
        assert_eq!(n.denormalize_row(&[0.25]), vec![2.5]);
    }

    #[test]
    fn compare_example_orders() {
        let alpha: OrientationVector = "1,1,-1,-1".parse().unwrap();
        let x_i = [2.1, 62.7, 75.0, 59.0];
        let x_m = [11.3, 75.5, 12.0, 30.0];
        assert_eq!(
            compare_points(&x_i, &x_m, &alpha).unwrap(),
            PointOrder::Precedes
        );
        assert_eq!(
            compare_points(&x_m, &x_i, &alpha).unwrap(),
            PointOrder::Succeeds
        );
        assert_eq!(
            compare_points(&x_i, &x_i, &alpha).unwrap(),
            PointOrder::Equal
        );
        let inc = OrientationVector::increasing(2);
        assert_eq!(
            compare_points(&[0.0, 1.0], &[1.0, 0.0], &inc).unwrap(),
            PointOrder::Incomparable
        );
        assert!(compare_points(&[0.0], &[1.0, 0.0], &inc).is_err());
    }

    #[test]
    fn rank_lists_follow_direction() {
        let n = NormalizedDataset {
            values: vec![vec![0.3], vec![0.25], vec![0.7]],
            col_min: vec![0.0],
            col_max: vec![1.0],
        };
        let up = attribute_rank_lists(&n, &"+".parse().unwrap()).unwrap();
        assert_eq!(up[0], vec![2.0, 1.0, 3.0]);
        let down = attribute_rank_lists(&n, &"-".parse().unwrap()).unwrap();
        assert_eq!(down[0], vec![2.0, 3.0, 1.0]);
    }

    #[test]
    fn rank_lists_average_ties() {
        let n = NormalizedDataset {
            values: vec![vec![0.5], vec![0.5], vec![0.9]],
            col_min: vec![0.0],
            col_max: vec![1.0],
        };
        let r = attribute_rank_lists(&n, &"+".parse().unwrap()).unwrap();
        assert_eq!(r[0], vec![1.5, 1.5, 3.0]);
    }
}
