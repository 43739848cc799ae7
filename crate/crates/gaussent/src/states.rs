//! State factory: analytic covariance matrices of the two-mode entangled,
//! three-mode GHZ, and four-mode square cluster states, the per-mode loss
//! channel, reduced states, and the vacuum-mixed family.
//!
//! Abbreviations in the analytic entries: `c = cosh(2r)`, `s = sinh(2r)`.
//! Loss on mode A enters through the transmission efficiency `eta`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symplectic::CovarianceMatrix;

/// Families of states the factory can produce analytically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateFamily {
    TwoModeEpr,
    Ghz3,
    Cluster4,
    VacuumMixedEpr,
}

impl StateFamily {
    pub fn n_modes(self) -> usize {
        match self {
            StateFamily::TwoModeEpr | StateFamily::VacuumMixedEpr => 2,
            StateFamily::Ghz3 => 3,
            StateFamily::Cluster4 => 4,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            StateFamily::TwoModeEpr => "epr",
            StateFamily::Ghz3 => "ghz3",
            StateFamily::Cluster4 => "cluster4",
            StateFamily::VacuumMixedEpr => "vacuum_mixed_epr",
        }
    }
}

impl std::str::FromStr for StateFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "epr" | "two_mode_epr" | "tms" => Ok(StateFamily::TwoModeEpr),
            "ghz3" | "ghz" => Ok(StateFamily::Ghz3),
            "cluster4" | "cluster" => Ok(StateFamily::Cluster4),
            "vacuum_mixed_epr" | "vacuum_mixed" => Ok(StateFamily::VacuumMixedEpr),
            other => Err(Error::InvalidRecord(format!("unknown state family {other:?}"))),
        }
    }
}

/// Parameters selecting one state: family, squeezing `r`, per-mode loss, and
/// (for the vacuum-mixed family) the mixing weight `p`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateSpec {
    pub family: StateFamily,
    /// Squeezing strength; alternatively derive it from a dB figure via
    /// [`db_to_r`].
    #[serde(default)]
    pub r: f64,
    /// Per-mode transmission efficiencies; empty means lossless.
    #[serde(default)]
    pub eta: Vec<f64>,
    /// Mixing weight for `vacuum_mixed_epr`; ignored otherwise.
    #[serde(default = "default_p")]
    pub p: f64,
}

fn default_p() -> f64 {
    1.0
}

impl StateSpec {
    pub fn lossless(family: StateFamily, r: f64) -> Self {
        Self {
            family,
            r,
            eta: Vec::new(),
            p: 1.0,
        }
    }

    pub fn with_eta_a(family: StateFamily, r: f64, eta_a: f64) -> Self {
        let mut eta = vec![1.0; family.n_modes()];
        eta[0] = eta_a;
        Self {
            family,
            r,
            eta,
            p: 1.0,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.family.n_modes()
    }

    fn validated_etas(&self) -> Result<Vec<f64>> {
        let n = self.n_modes();
        if self.eta.is_empty() {
            return Ok(vec![1.0; n]);
        }
        if self.eta.len() != n {
            return Err(Error::InvalidRecord(format!(
                "expected {} efficiencies, got {}",
                n,
                self.eta.len()
            )));
        }
        for &e in &self.eta {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::EfficiencyOutOfRange { eta: e });
            }
        }
        Ok(self.eta.clone())
    }

    /// Build the covariance matrix. Loss restricted to mode A takes the
    /// verbatim analytic path; general loss patterns go through the channel.
    pub fn build(&self) -> Result<CovarianceMatrix> {
        let etas = self.validated_etas()?;
        let loss_only_on_a = etas.iter().skip(1).all(|&e| e == 1.0);
        match self.family {
            StateFamily::VacuumMixedEpr => {
                let base = vacuum_mixed(self.r, self.p)?;
                if etas.iter().all(|&e| e == 1.0) {
                    Ok(base)
                } else {
                    apply_loss(&base, &etas)
                }
            }
            family if loss_only_on_a => analytic_covariance(family, self.r, etas[0]),
            family => {
                let pure = analytic_covariance(family, self.r, 1.0)?;
                apply_loss(&pure, &etas)
            }
        }
    }
}

/// Squeezing strength from a (negative) dB figure, `r = -ln(10^(db/20))`.
pub fn db_to_r(db: f64) -> f64 {
    -(db / 20.0) * std::f64::consts::LN_10
}

/// Analytic covariance matrix of the chosen family with loss on mode A only.
pub fn analytic_covariance(family: StateFamily, r: f64, eta_a: f64) -> Result<CovarianceMatrix> {
    if !(0.0..=1.0).contains(&eta_a) {
        return Err(Error::EfficiencyOutOfRange { eta: eta_a });
    }
    if !r.is_finite() {
        return Err(Error::InvalidRecord(format!("non-finite squeezing {r}")));
    }
    match family {
        StateFamily::TwoModeEpr => two_mode_epr(r, eta_a),
        StateFamily::Ghz3 => ghz3(r, eta_a),
        StateFamily::Cluster4 => cluster4(r, eta_a),
        StateFamily::VacuumMixedEpr => Err(Error::UnsupportedLossPattern),
    }
}

fn two_mode_epr(r: f64, eta: f64) -> Result<CovarianceMatrix> {
    let c = (2.0 * r).cosh();
    let s = (2.0 * r).sinh();
    let se = eta.sqrt();
    let d_a = (1.0 - eta) + eta * c;
    let m = DMatrix::from_row_slice(
        4,
        4,
        &[
            d_a, 0.0, -se * s, 0.0, //
            0.0, d_a, 0.0, se * s, //
            -se * s, 0.0, c, 0.0, //
            0.0, se * s, 0.0, c,
        ],
    ) * 0.5;
    CovarianceMatrix::new(2, m)
}

fn ghz3(r: f64, eta: f64) -> Result<CovarianceMatrix> {
    let c = (2.0 * r).cosh();
    let s = (2.0 * r).sinh();
    let se = eta.sqrt();
    // Entries transcribed verbatim; the seemingly asymmetric diagonal terms
    // encode which input beam is phase- vs. amplitude-squeezed.
    let d_xa = ((-3.0 + 2.0 * (-2.0 * r).exp() + (2.0 * r).exp()) * eta + 3.0) / 6.0;
    let d_pa = (3.0 * c * eta + s * eta - 3.0 * eta + 3.0) / 6.0;
    let d_xb = (-2.0 * r).exp() * (2.0 + (4.0 * r).exp()) / 6.0;
    let d_pb = (3.0 * c + s) / 6.0;
    let o_a = s * se / 3.0;
    let o_b = s / 3.0;
    let m = DMatrix::from_row_slice(
        6,
        6,
        &[
            d_xa, 0.0, o_a, 0.0, o_a, 0.0, //
            0.0, d_pa, 0.0, -o_a, 0.0, -o_a, //
            o_a, 0.0, d_xb, 0.0, o_b, 0.0, //
            0.0, -o_a, 0.0, d_pb, 0.0, -o_b, //
            o_a, 0.0, o_b, 0.0, d_xb, 0.0, //
            0.0, -o_a, 0.0, -o_b, 0.0, d_pb,
        ],
    );
    CovarianceMatrix::new(3, m)
}

fn cluster4(r: f64, eta: f64) -> Result<CovarianceMatrix> {
    let c = (2.0 * r).cosh();
    let s = (2.0 * r).sinh();
    let se = eta.sqrt();
    let d_xa = (5.0 * c * eta + s * eta - 5.0 * eta + 5.0) / 10.0;
    let d_pa = (5.0 * c * eta - s * eta - 5.0 * eta + 5.0) / 10.0;
    let d_plus = (5.0 * c + s) / 10.0;
    let d_minus = (5.0 * c - s) / 10.0;
    let w = 2.0 * s * se / 5.0; // A-B correlation
    let u = s * se / 5.0; // A/B to C/D cross correlation
    let v = s / 5.0;
    let w0 = 2.0 * s / 5.0; // C-D correlation
    let m = DMatrix::from_row_slice(
        8,
        8,
        &[
            d_xa, 0.0, -w, 0.0, 0.0, u, 0.0, u, //
            0.0, d_pa, 0.0, w, u, 0.0, u, 0.0, //
            -w, 0.0, d_plus, 0.0, 0.0, v, 0.0, v, //
            0.0, w, 0.0, d_minus, v, 0.0, v, 0.0, //
            0.0, u, 0.0, v, d_plus, 0.0, -w0, 0.0, //
            u, 0.0, v, 0.0, 0.0, d_minus, 0.0, w0, //
            0.0, u, 0.0, v, -w0, 0.0, d_plus, 0.0, //
            u, 0.0, v, 0.0, 0.0, w0, 0.0, d_minus,
        ],
    );
    CovarianceMatrix::new(4, m)
}

/// Loss channel `Gamma -> X Gamma X^T + Y` with per-mode efficiencies,
/// `X = diag(sqrt(eta_i))` per quadrature and `Y = diag((1 - eta_i)/2)`.
pub fn apply_loss(gamma: &CovarianceMatrix, etas: &[f64]) -> Result<CovarianceMatrix> {
    let n = gamma.n_modes();
    if etas.len() != n {
        return Err(Error::ShapeMismatch {
            rows: etas.len(),
            cols: etas.len(),
            n_modes: n,
        });
    }
    for &e in etas {
        if !(0.0..=1.0).contains(&e) {
            return Err(Error::EfficiencyOutOfRange { eta: e });
        }
    }
    let dim = 2 * n;
    let mut m = gamma.matrix().clone();
    for i in 0..dim {
        for j in 0..dim {
            let scale = (etas[i / 2] * etas[j / 2]).sqrt();
            m[(i, j)] *= scale;
        }
    }
    for i in 0..dim {
        m[(i, i)] += (1.0 - etas[i / 2]) / 2.0;
    }
    CovarianceMatrix::new(n, m)
}

/// Reduced state on the kept modes (0-based indices, order preserved).
pub fn reduce(gamma: &CovarianceMatrix, keep: &[usize]) -> Result<CovarianceMatrix> {
    if keep.is_empty() {
        return Err(Error::EmptySubset);
    }
    let n = gamma.n_modes();
    for &k in keep {
        if k >= n {
            return Err(Error::IndexOutOfRange {
                index: k,
                n_modes: n,
            });
        }
    }
    let dim = 2 * keep.len();
    let m = DMatrix::from_fn(dim, dim, |i, j| {
        let qi = 2 * keep[i / 2] + i % 2;
        let qj = 2 * keep[j / 2] + j % 2;
        gamma.matrix()[(qi, qj)]
    });
    CovarianceMatrix::new(keep.len(), m)
}

/// Two-mode entangled state incoherently mixed with the vacuum:
/// `p * Gamma_epr(r) + (1 - p) * I/2`.
pub fn vacuum_mixed(r: f64, p: f64) -> Result<CovarianceMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::WeightOutOfRange { p });
    }
    let epr = analytic_covariance(StateFamily::TwoModeEpr, r, 1.0)?;
    let m = epr.matrix() * p + DMatrix::identity(4, 4) * (0.5 * (1.0 - p));
    CovarianceMatrix::new(2, m)
}

/// Largest mixing weight at which the witness criteria miss the vacuum-mixed
/// state: `p_max = (2 - coth|r|)(1 + coth|r|)/2`, clamped to `[0, 1]`.
/// Below `|r| = arccoth(2)` the criteria detect for every `p`, giving 0.
pub fn p_max_threshold(r: f64) -> f64 {
    let a = r.abs();
    if a == 0.0 {
        return 0.0;
    }
    let coth = a.cosh() / a.sinh();
    let p = 0.5 * (2.0 - coth) * (1.0 + coth);
    p.clamp(0.0, 1.0)
}
