//! Covariance-matrix reconstruction from measured quadrature variances.
//!
//! Diagonal entries come from the single-quadrature variances; off-diagonal
//! entries from sum or difference variances via
//! `Gamma_ij = +(1/2)[Var(r_i + r_j) - Var(r_i) - Var(r_j)]`
//! `         = -(1/2)[Var(r_i - r_j) - Var(r_i) - Var(r_j)]`,
//! averaging when both are measured. Repeat sets give per-entry error bars.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::symplectic::CovarianceMatrix;

/// Default relative threshold above which sum- and difference-derived
/// entries count as inconsistent.
pub const DEFAULT_CONSISTENCY_TOL: f64 = 0.10;

/// Sum/difference variance measurements for one quadrature pair.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PairMeasurement {
    /// `Var(r_i + r_j)`
    pub sum: Option<f64>,
    /// `Var(r_i - r_j)`
    pub diff: Option<f64>,
}

/// Variances measured on one copy of the state: one single-quadrature
/// variance per quadrature, and sum/difference variances per pair.
/// Quadrature indices are 0-based internally (`x1 = 0, p1 = 1, ...`).
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    n_modes: usize,
    single_variances: Vec<f64>,
    pair_variances: BTreeMap<(usize, usize), PairMeasurement>,
}

impl MeasurementRecord {
    pub fn new(n_modes: usize, single_variances: Vec<f64>) -> Result<Self> {
        if single_variances.len() != 2 * n_modes {
            return Err(Error::InvalidRecord(format!(
                "expected {} single variances, got {}",
                2 * n_modes,
                single_variances.len()
            )));
        }
        for (i, &v) in single_variances.iter().enumerate() {
            if !(v > 0.0) {
                return Err(Error::NegativeVariance { index: i, value: v });
            }
        }
        Ok(Self {
            n_modes,
            single_variances,
            pair_variances: BTreeMap::new(),
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn single_variance(&self, i: usize) -> f64 {
        self.single_variances[i]
    }

    pub fn pair(&self, i: usize, j: usize) -> Option<&PairMeasurement> {
        self.pair_variances.get(&ordered(i, j))
    }

    /// Record `Var(r_i + r_j)` (`sign = +`) or `Var(r_i - r_j)` (`sign = -`).
    /// For difference variances the index order matters only through the
    /// stored key; the reconstruction identity is symmetric.
    pub fn add_pair(&mut self, i: usize, j: usize, sign: Sign, value: f64) -> Result<()> {
        let dim = 2 * self.n_modes;
        if i >= dim || j >= dim {
            return Err(Error::IndexOutOfRange {
                index: i.max(j),
                n_modes: self.n_modes,
            });
        }
        if i == j {
            return Err(Error::InvalidRecord(
                "pair measurement needs two distinct quadratures".to_string(),
            ));
        }
        if !(value > 0.0) {
            return Err(Error::NegativeVariance { index: i, value });
        }
        let entry = self.pair_variances.entry(ordered(i, j)).or_default();
        match sign {
            Sign::Plus => entry.sum = Some(value),
            Sign::Minus => entry.diff = Some(value),
        }
        Ok(())
    }

    /// Pairs referenced by the record.
    pub fn measured_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pair_variances.keys().copied()
    }
}

fn ordered(i: usize, j: usize) -> (usize, usize) {
    if i <= j {
        (i, j)
    } else {
        (j, i)
    }
}

/// Sign tag of a pair measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// Reconstruction output: the matrix plus coverage and physicality
/// diagnostics. Marginally unphysical matrices are admitted; the margin is
/// reported instead of enforced.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub gamma: CovarianceMatrix,
    /// Pairs without any measurement; their entries default to zero.
    pub missing_pairs: Vec<(usize, usize)>,
    pub physical: bool,
    pub physicality_margin: f64,
}

/// Build the covariance matrix from one record.
pub fn reconstruct(record: &MeasurementRecord) -> Result<Reconstruction> {
    reconstruct_with_tol(record, DEFAULT_CONSISTENCY_TOL)
}

/// As [`reconstruct`] with an explicit sum/difference consistency threshold.
pub fn reconstruct_with_tol(
    record: &MeasurementRecord,
    consistency_tol: f64,
) -> Result<Reconstruction> {
    let dim = 2 * record.n_modes;
    let mut m = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        m[(i, i)] = record.single_variances[i];
    }
    let mut missing = Vec::new();
    for i in 0..dim {
        for j in (i + 1)..dim {
            let vi = record.single_variances[i];
            let vj = record.single_variances[j];
            let entry = match record.pair_variances.get(&(i, j)) {
                Some(p) => p,
                None => {
                    missing.push((i, j));
                    continue;
                }
            };
            let from_sum = entry.sum.map(|s| 0.5 * (s - vi - vj));
            let from_diff = entry.diff.map(|d| -0.5 * (d - vi - vj));
            let value = match (from_sum, from_diff) {
                (Some(a), Some(b)) => {
                    let scale = a.abs().max(b.abs());
                    if scale > 1e-12 && (a - b).abs() / scale > consistency_tol {
                        return Err(Error::InconsistentPair {
                            i,
                            j,
                            relative_gap: (a - b).abs() / scale,
                        });
                    }
                    0.5 * (a + b)
                }
                (Some(a), None) => a,
                (None, Some(b)) => b,
                (None, None) => unreachable!(),
            };
            m[(i, j)] = value;
            m[(j, i)] = value;
        }
    }
    let gamma = CovarianceMatrix::new(record.n_modes, m)?;
    let phys = gamma.check_physical();
    Ok(Reconstruction {
        gamma,
        missing_pairs: missing,
        physical: phys.physical,
        physicality_margin: phys.margin,
    })
}

/// Exact Methods-side variances of a covariance matrix: the synthetic record
/// contains every single variance and both sum and difference variances for
/// every pair.
pub fn synthesize_record(gamma: &CovarianceMatrix) -> MeasurementRecord {
    let dim = gamma.dim();
    let m = gamma.matrix();
    let singles: Vec<f64> = (0..dim).map(|i| m[(i, i)]).collect();
    let mut record = MeasurementRecord::new(gamma.n_modes(), singles)
        .expect("physical diagonal is positive");
    for i in 0..dim {
        for j in (i + 1)..dim {
            let sum = m[(i, i)] + m[(j, j)] + 2.0 * m[(i, j)];
            let diff = m[(i, i)] + m[(j, j)] - 2.0 * m[(i, j)];
            record.add_pair(i, j, Sign::Plus, sum).expect("valid pair");
            record.add_pair(i, j, Sign::Minus, diff).expect("valid pair");
        }
    }
    record
}

/// A set of repeated reconstructions of the same state.
#[derive(Debug, Clone)]
pub struct ReconstructionSet {
    records: Vec<MeasurementRecord>,
}

impl ReconstructionSet {
    pub fn new(records: Vec<MeasurementRecord>) -> Result<Self> {
        let first = records
            .first()
            .ok_or_else(|| Error::InvalidRecord("empty reconstruction set".to_string()))?;
        let n = first.n_modes;
        let pairs: Vec<(usize, usize)> = first.measured_pairs().collect();
        for r in &records[1..] {
            if r.n_modes != n || r.measured_pairs().collect::<Vec<_>>() != pairs {
                return Err(Error::RecordShapeMismatch);
            }
        }
        Ok(Self { records })
    }

    pub fn records(&self) -> &[MeasurementRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Elementwise mean and sample standard deviation (n-1 denominator) over a
/// reconstruction set.
#[derive(Debug, Clone)]
pub struct Aggregate {
    pub mean: CovarianceMatrix,
    pub std_dev: DMatrix<f64>,
    pub per_record: Vec<Reconstruction>,
}

pub fn aggregate(set: &ReconstructionSet) -> Result<Aggregate> {
    let per_record: Result<Vec<Reconstruction>> =
        set.records().iter().map(reconstruct).collect();
    let per_record = per_record?;
    let n = per_record.len();
    let dim = per_record[0].gamma.dim();
    let mut mean = DMatrix::zeros(dim, dim);
    for r in &per_record {
        mean += r.gamma.matrix();
    }
    mean /= n as f64;
    let mut var = DMatrix::zeros(dim, dim);
    if n >= 2 {
        for r in &per_record {
            let d = r.gamma.matrix() - &mean;
            var += d.component_mul(&d);
        }
        var /= (n - 1) as f64;
    }
    let std_dev = var.map(f64::sqrt);
    let mean = CovarianceMatrix::new(per_record[0].gamma.n_modes(), mean)?;
    Ok(Aggregate {
        mean,
        std_dev,
        per_record,
    })
}

/// CSV header of a measurement record file.
pub const RECORD_CSV_HEADER: &str = "kind,i,j,sign,value";

/// Serialize a record as `kind,i,j,sign,value` rows with 1-based quadrature
/// indices; unused fields are written as `na`.
pub fn record_to_csv(record: &MeasurementRecord) -> String {
    let mut out = String::from(RECORD_CSV_HEADER);
    out.push('\n');
    for i in 0..2 * record.n_modes {
        out.push_str(&format!(
            "single,{},na,na,{:e}\n",
            i + 1,
            record.single_variances[i]
        ));
    }
    for ((i, j), pair) in &record.pair_variances {
        if let Some(v) = pair.sum {
            out.push_str(&format!("pair,{},{},+,{:e}\n", i + 1, j + 1, v));
        }
        if let Some(v) = pair.diff {
            out.push_str(&format!("pair,{},{},-,{:e}\n", i + 1, j + 1, v));
        }
    }
    out
}

/// Parse a record from its CSV form. The mode count is inferred from the
/// single-variance rows, which must cover every quadrature exactly once.
pub fn record_from_csv(text: &str) -> Result<MeasurementRecord> {
    let bad = |line: usize, msg: String| Error::InvalidRecord(format!("line {}: {}", line + 1, msg));
    let mut singles: BTreeMap<usize, f64> = BTreeMap::new();
    let mut pairs: Vec<(usize, usize, Sign, f64)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line == RECORD_CSV_HEADER {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(bad(lineno, format!("expected 5 fields, got {}", fields.len())));
        }
        let parse_idx = |f: &str| -> Result<usize> {
            let v: usize = f
                .parse()
                .map_err(|_| bad(lineno, format!("bad quadrature index {f:?}")))?;
            v.checked_sub(1)
                .ok_or_else(|| bad(lineno, "quadrature indices are 1-based".to_string()))
        };
        let value: f64 = fields[4]
            .parse()
            .map_err(|_| bad(lineno, format!("bad value {:?}", fields[4])))?;
        match fields[0] {
            "single" => {
                let i = parse_idx(fields[1])?;
                if singles.insert(i, value).is_some() {
                    return Err(bad(lineno, format!("duplicate single variance for {}", i + 1)));
                }
            }
            "pair" => {
                let i = parse_idx(fields[1])?;
                let j = parse_idx(fields[2])?;
                let sign = match fields[3] {
                    "+" => Sign::Plus,
                    "-" | "\u{2212}" => Sign::Minus,
                    other => return Err(bad(lineno, format!("bad sign {other:?}"))),
                };
                pairs.push((i, j, sign, value));
            }
            other => return Err(bad(lineno, format!("unknown row kind {other:?}"))),
        }
    }
    let n_quadratures = singles.len();
    if n_quadratures == 0 || n_quadratures % 2 != 0 {
        return Err(Error::InvalidRecord(format!(
            "need an even number of single variances, got {n_quadratures}"
        )));
    }
    let n_modes = n_quadratures / 2;
    let mut single_variances = Vec::with_capacity(n_quadratures);
    for i in 0..n_quadratures {
        match singles.get(&i) {
            Some(&v) => single_variances.push(v),
            None => {
                return Err(Error::InvalidRecord(format!(
                    "missing single variance for quadrature {}",
                    i + 1
                )))
            }
        }
    }
    let mut record = MeasurementRecord::new(n_modes, single_variances)?;
    for (i, j, sign, value) in pairs {
        record.add_pair(i, j, sign, value)?;
    }
    Ok(record)
}
