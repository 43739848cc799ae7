//! The three entanglement criteria evaluated per partition: the quantum
//! Fisher information witness, the multi-mode squeezing coefficient, and the
//! PPT symplectic-eigenvalue test, plus the metrological quantities they
//! derive from.
//!
//! Verdicts are one-sided with a strict-inequality margin of 1e-9: the QFI
//! witness flags entanglement when `lambda_max > 0`, the squeezing
//! coefficient when `xi^-2 > 1`, and PPT when the smallest normalized
//! symplectic eigenvalue of the partially transposed matrix drops below 1.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::{project_block_diagonal, ModePartition};
use crate::symplectic::{symplectic_form, CovarianceMatrix, PhaseSpaceDirection};

/// Margin beyond which a strict inequality counts as violated.
pub const VERDICT_TOL: f64 = 1e-9;
/// Component magnitude above which a direction component counts as support.
pub const SUPPORT_THRESHOLD: f64 = 0.05;

/// Which criterion a result belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    QfiWitness,
    Squeezing,
    Ppt,
}

impl Criterion {
    pub fn label(self) -> &'static str {
        match self {
            Criterion::QfiWitness => "qfi",
            Criterion::Squeezing => "squeezing",
            Criterion::Ppt => "ppt",
        }
    }
}

impl std::str::FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qfi" | "qfi_witness" | "fisher" => Ok(Criterion::QfiWitness),
            "squeezing" | "sqz" => Ok(Criterion::Squeezing),
            "ppt" => Ok(Criterion::Ppt),
            other => Err(Error::InvalidRecord(format!("unknown criterion {other:?}"))),
        }
    }
}

/// Search parameters for the squeezing-coefficient optimization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_random_starts")]
    pub n_random_starts: usize,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Restrict the optimization to components marked `true` (e.g. the
    /// all-x or all-p patterns); `None` searches the full phase space.
    #[serde(default)]
    pub restriction_mask: Option<Vec<bool>>,
}

fn default_random_starts() -> usize {
    64
}

fn default_max_iters() -> usize {
    500
}

fn default_tol() -> f64 {
    1e-12
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_random_starts: default_random_starts(),
            max_iters: default_max_iters(),
            tol: default_tol(),
            restriction_mask: None,
        }
    }
}

impl SearchConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn with_mask(&self, mask: Vec<bool>) -> Self {
        Self {
            restriction_mask: Some(mask),
            ..self.clone()
        }
    }
}

/// Witness value, verdict, and optimal direction for one
/// (state, partition, criterion) triple.
#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub criterion: Criterion,
    pub partition: ModePartition,
    /// `lambda_max` for the QFI witness, `xi^-2` for squeezing, and the
    /// smallest normalized symplectic eigenvalue for PPT.
    pub value: f64,
    pub entangled: bool,
    /// `e_max` / `g_min`; absent for PPT.
    pub optimal_direction: Option<PhaseSpaceDirection>,
    /// Dimension of the top eigenspace (QFI witness only).
    pub degeneracy: Option<usize>,
    /// False when the squeezing optimization hit the iteration cap without a
    /// fixed point; the value is still a valid one-sided bound.
    pub certified: bool,
}

/// Quantum Fisher information for displacements generated by `q(g)`:
/// `F_Q = g^T Omega^T Gamma^-1 Omega g`.
pub fn qfi(gamma: &CovarianceMatrix, g: &PhaseSpaceDirection) -> Result<f64> {
    let omega = symplectic_form(gamma.n_modes());
    let inv = gamma.invert()?;
    let og = &omega * g.coeffs();
    Ok((og.transpose() * inv * og)[(0, 0)])
}

/// Covariance-based lower bound `(h^T Omega g)^2 / (h^T Gamma h)`.
pub fn qfi_lower_bound(
    gamma: &CovarianceMatrix,
    g: &PhaseSpaceDirection,
    h: &PhaseSpaceDirection,
) -> Result<f64> {
    let omega = symplectic_form(gamma.n_modes());
    let denom = (h.coeffs().transpose() * gamma.matrix() * h.coeffs())[(0, 0)];
    if denom < 1e-14 {
        return Err(Error::DegenerateH);
    }
    let num = (h.coeffs().transpose() * omega * g.coeffs())[(0, 0)];
    Ok(num * num / denom)
}

/// The witness matrix `W = Gamma^-1 - 4 Omega^T Gamma_Pi Omega` for a
/// partition; a positive maximal eigenvalue reveals entanglement.
pub fn qfi_witness_matrix(
    gamma: &CovarianceMatrix,
    partition: &ModePartition,
) -> Result<DMatrix<f64>> {
    let projected = project_block_diagonal(gamma, partition)?;
    let omega = symplectic_form(gamma.n_modes());
    let inv = gamma.invert()?;
    let w = inv - omega.transpose() * projected.matrix() * &omega * 4.0;
    Ok((&w + w.transpose()) * 0.5)
}

/// QFI witness: maximal eigenvalue of `W` with its eigenvector `e_max`.
pub fn qfi_witness(gamma: &CovarianceMatrix, partition: &ModePartition) -> Result<CriterionResult> {
    let w = qfi_witness_matrix(gamma, partition)?;
    let eig = w.symmetric_eigen();
    let mut max_idx = 0;
    for i in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[i] > eig.eigenvalues[max_idx] {
            max_idx = i;
        }
    }
    let lambda_max = eig.eigenvalues[max_idx];
    let tol = VERDICT_TOL * lambda_max.abs().max(1.0);
    let degeneracy = eig
        .eigenvalues
        .iter()
        .filter(|&&v| (lambda_max - v) <= tol)
        .count();
    let e_max = PhaseSpaceDirection::from_vector(eig.eigenvectors.column(max_idx).into_owned())
        .canonicalize_sign();
    Ok(CriterionResult {
        criterion: Criterion::QfiWitness,
        partition: partition.clone(),
        value: lambda_max,
        entangled: lambda_max > VERDICT_TOL,
        optimal_direction: Some(e_max),
        degeneracy: Some(degeneracy),
        certified: true,
    })
}

/// The matrix `M = Omega^T Gamma_Pi Omega` entering the squeezing product.
fn squeezing_m_matrix(
    gamma: &CovarianceMatrix,
    partition: &ModePartition,
) -> Result<DMatrix<f64>> {
    let projected = project_block_diagonal(gamma, partition)?;
    let omega = symplectic_form(gamma.n_modes());
    let m = omega.transpose() * projected.matrix() * &omega;
    Ok((&m + m.transpose()) * 0.5)
}

/// Objective `4 (g^T M g)(g^T Gamma g)` for a unit vector `g`.
fn squeezing_objective(m: &DMatrix<f64>, gamma: &DMatrix<f64>, g: &DVector<f64>) -> f64 {
    let a = (g.transpose() * m * g)[(0, 0)];
    let b = (g.transpose() * gamma * g)[(0, 0)];
    4.0 * a * b
}

/// One fixed-point run: `g <- argmin eigvec of (b M + a Gamma)` until the
/// iterate stops moving. Returns the best objective seen along the way.
fn fixed_point_run(
    m: &DMatrix<f64>,
    gamma: &DMatrix<f64>,
    start: DVector<f64>,
    tol: f64,
    max_iters: usize,
) -> (f64, DVector<f64>, bool) {
    let mut g = start.normalize();
    let mut best_val = squeezing_objective(m, gamma, &g);
    let mut best_g = g.clone();
    let mut converged = false;
    for _ in 0..max_iters {
        let a = (g.transpose() * m * &g)[(0, 0)];
        let b = (g.transpose() * gamma * &g)[(0, 0)];
        let pencil = m * b + gamma * a;
        let eig = pencil.symmetric_eigen();
        let mut min_idx = 0;
        for i in 1..eig.eigenvalues.len() {
            if eig.eigenvalues[i] < eig.eigenvalues[min_idx] {
                min_idx = i;
            }
        }
        let mut next = eig.eigenvectors.column(min_idx).into_owned();
        if next.dot(&g) < 0.0 {
            next = -next;
        }
        let step = (&next - &g).norm();
        g = next;
        let val = squeezing_objective(m, gamma, &g);
        if val < best_val {
            best_val = val;
            best_g = g.clone();
        }
        if step < tol {
            converged = true;
            break;
        }
    }
    (best_val, best_g, converged)
}

fn mask_indices(mask: &[bool]) -> Vec<usize> {
    mask.iter()
        .enumerate()
        .filter(|(_, &keep)| keep)
        .map(|(i, _)| i)
        .collect()
}

fn submatrix(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

fn embed(idx: &[usize], dim: usize, v: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(dim);
    for (k, &i) in idx.iter().enumerate() {
        out[i] = v[k];
    }
    out
}

/// Minimize `4 (g^T M g)(g^T Gamma g)` over unit `g`, multistarting from the
/// eigenvectors of `M`, `Gamma`, `M + Gamma`, and seeded random directions.
fn minimize_squeezing_product(
    m_full: &DMatrix<f64>,
    gamma_full: &DMatrix<f64>,
    config: &SearchConfig,
) -> Result<(f64, DVector<f64>, bool)> {
    let dim_full = gamma_full.nrows();
    let idx: Vec<usize> = match &config.restriction_mask {
        Some(mask) => {
            if mask.len() != dim_full {
                return Err(Error::InvalidRecord(format!(
                    "restriction mask has {} entries for dimension {}",
                    mask.len(),
                    dim_full
                )));
            }
            let idx = mask_indices(mask);
            if idx.is_empty() {
                return Err(Error::ZeroDirection);
            }
            idx
        }
        None => (0..dim_full).collect(),
    };
    let m = submatrix(m_full, &idx);
    let gamma = submatrix(gamma_full, &idx);
    let dim = idx.len();

    let mut starts: Vec<DVector<f64>> = Vec::new();
    for basis in [&m, &gamma, &(&m + &gamma)] {
        let eig = basis.clone().symmetric_eigen();
        for c in 0..dim {
            starts.push(eig.eigenvectors.column(c).into_owned());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    while starts.len() < 3 * dim + config.n_random_starts {
        let v = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
        if v.norm() > 1e-6 {
            starts.push(v);
        }
    }

    let mut best: Option<(f64, DVector<f64>, bool)> = None;
    for start in starts {
        let (val, g, converged) = fixed_point_run(&m, &gamma, start, config.tol, config.max_iters);
        let better = match &best {
            Some((bv, _, _)) => val < *bv,
            None => true,
        };
        if better {
            best = Some((val, g, converged));
        }
    }
    let (val, g, converged) = best.expect("at least one start");
    Ok((val, embed(&idx, dim_full, &g), converged))
}

/// Multi-mode squeezing coefficient for a partition. Reports `xi^-2`; values
/// above one witness entanglement. The minimizing direction `g_min` is
/// attached sign-canonicalized.
pub fn squeezing_coefficient(
    gamma: &CovarianceMatrix,
    partition: &ModePartition,
    config: &SearchConfig,
) -> Result<CriterionResult> {
    let m = squeezing_m_matrix(gamma, partition)?;
    let (xi2, g_min, certified) = minimize_squeezing_product(&m, gamma.matrix(), config)?;
    let value = 1.0 / xi2;
    Ok(CriterionResult {
        criterion: Criterion::Squeezing,
        partition: partition.clone(),
        value,
        entangled: value > 1.0 + VERDICT_TOL,
        optimal_direction: Some(PhaseSpaceDirection::from_vector(g_min).canonicalize_sign()),
        degeneracy: None,
        certified,
    })
}

/// Exhaustive grid certification of the squeezing minimum for one- and
/// two-mode states: sweep the unit sphere at the given angular resolution,
/// then refine the best grid point with the fixed-point iteration.
pub fn certify_squeezing_grid(
    gamma: &CovarianceMatrix,
    partition: &ModePartition,
    resolution_deg: f64,
) -> Result<f64> {
    use rayon::prelude::*;

    let n = gamma.n_modes();
    if n > 2 {
        return Err(Error::TooManyModes { n_modes: n, max: 2 });
    }
    let m = squeezing_m_matrix(gamma, partition)?;
    let g_mat = gamma.matrix();
    let step = resolution_deg.to_radians();

    let (best_val, best_g) = if n == 1 {
        let n_steps = (std::f64::consts::PI / step).ceil() as usize;
        (0..n_steps)
            .map(|i| {
                let th = i as f64 * step;
                let g = DVector::from_vec(vec![th.cos(), th.sin()]);
                (squeezing_objective(&m, g_mat, &g), g)
            })
            .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
            .expect("non-empty grid")
    } else {
        // 3-sphere in spherical coordinates; g ~ -g makes the final angle
        // range [0, pi) sufficient together with th1 in [0, pi].
        let n1 = (std::f64::consts::PI / step).ceil() as usize + 1;
        let n2 = n1;
        let n3 = (std::f64::consts::PI / step).ceil() as usize;
        (0..n1)
            .into_par_iter()
            .map(|i1| {
                let th1 = (i1 as f64 * step).min(std::f64::consts::PI);
                let (s1, c1) = th1.sin_cos();
                let mut local_best = (f64::INFINITY, DVector::zeros(4));
                for i2 in 0..n2 {
                    let th2 = (i2 as f64 * step).min(std::f64::consts::PI);
                    let (s2, c2) = th2.sin_cos();
                    for i3 in 0..n3 {
                        let th3 = i3 as f64 * step;
                        let (s3, c3) = th3.sin_cos();
                        let g = DVector::from_vec(vec![c1, s1 * c2, s1 * s2 * c3, s1 * s2 * s3]);
                        let val = squeezing_objective(&m, g_mat, &g);
                        if val < local_best.0 {
                            local_best = (val, g);
                        }
                    }
                }
                local_best
            })
            .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
            .expect("non-empty grid")
    };

    let (refined, _, _) = fixed_point_run(&m, g_mat, best_g, 1e-14, 1000);
    Ok(1.0 / refined.min(best_val))
}

/// PPT criterion for a bipartition: flip the p-quadratures of the second
/// block and report the smallest normalized symplectic eigenvalue of the
/// transformed matrix. Values below one witness entanglement; for Gaussian
/// 1x(N-1) splits this is necessary and sufficient.
pub fn ppt_criterion(
    gamma: &CovarianceMatrix,
    bipartition: &ModePartition,
) -> Result<CriterionResult> {
    if bipartition.n_blocks() != 2 {
        return Err(Error::NotABipartition {
            blocks: bipartition.n_blocks(),
        });
    }
    if bipartition.n_modes() != gamma.n_modes() {
        return Err(Error::PartitionMismatch {
            partition_modes: bipartition.n_modes(),
            state_modes: gamma.n_modes(),
        });
    }
    let dim = gamma.dim();
    let mut p = DMatrix::identity(dim, dim);
    for &mode in &bipartition.blocks()[1] {
        p[(2 * mode + 1, 2 * mode + 1)] = -1.0;
    }
    let transposed = gamma.congruence(&p)?;
    let nus = transposed.symplectic_eigenvalues()?;
    let value = nus.last().copied().expect("at least one mode");
    Ok(CriterionResult {
        criterion: Criterion::Ppt,
        partition: bipartition.clone(),
        value,
        entangled: value < 1.0 - VERDICT_TOL,
        optimal_direction: None,
        degeneracy: None,
        certified: true,
    })
}

/// Evaluate one criterion (with direction) for use in sweeps.
pub fn evaluate(
    gamma: &CovarianceMatrix,
    partition: &ModePartition,
    criterion: Criterion,
    config: &SearchConfig,
) -> Result<CriterionResult> {
    match criterion {
        Criterion::QfiWitness => qfi_witness(gamma, partition),
        Criterion::Squeezing => squeezing_coefficient(gamma, partition, config),
        Criterion::Ppt => ppt_criterion(gamma, partition),
    }
}

/// Maximum witness value restricted to directions supported on `support`.
/// Used to quantify the gain of a direction change.
fn restricted_value(
    gamma: &CovarianceMatrix,
    partition: &ModePartition,
    criterion: Criterion,
    config: &SearchConfig,
    support: &[usize],
) -> Result<f64> {
    match criterion {
        Criterion::QfiWitness => {
            let w = qfi_witness_matrix(gamma, partition)?;
            let sub = submatrix(&w, support);
            let eig = sub.symmetric_eigen();
            Ok(eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
        }
        Criterion::Squeezing => {
            let mut mask = vec![false; gamma.dim()];
            for &i in support {
                mask[i] = true;
            }
            let res = squeezing_coefficient(gamma, partition, &config.with_mask(mask))?;
            Ok(res.value)
        }
        Criterion::Ppt => Err(Error::InvalidRecord(
            "PPT has no optimal direction".to_string(),
        )),
    }
}

/// One sweep sample of a criterion.
#[derive(Debug, Clone)]
pub struct TracePoint {
    pub sweep_value: f64,
    pub value: f64,
    pub entangled: bool,
    pub direction: Option<PhaseSpaceDirection>,
    pub certified: bool,
}

/// A change of the optimal direction's support pattern along the sweep.
#[derive(Debug, Clone)]
pub struct DirectionTransition {
    /// Bisected bracket around the crossing, width <= the configured limit.
    pub bracket: (f64, f64),
    pub crossing: f64,
    pub support_before: Vec<usize>,
    pub support_after: Vec<usize>,
    /// Largest relative value gain of switching direction family, probed a
    /// fixed offset away from the crossing on both sides.
    pub gain: f64,
    /// Whether the criterion detected entanglement at both bracketing grid
    /// points.
    pub detected_both_sides: bool,
}

/// Configuration for [`optimal_direction_trace`].
#[derive(Debug, Clone)]
pub struct TraceConfig {
    pub search: SearchConfig,
    pub support_threshold: f64,
    /// Minimum relative gain for a direction change to be reported (the 1%
    /// convention).
    pub gain_threshold: f64,
    pub bisection_width: f64,
    /// Offset from the crossing at which the gain is probed.
    pub gain_probe_offset: f64,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self {
            search: SearchConfig::default(),
            support_threshold: SUPPORT_THRESHOLD,
            gain_threshold: 0.01,
            bisection_width: 1e-3,
            gain_probe_offset: 0.05,
        }
    }
}

/// Sweep a criterion along a monotone grid of a state parameter, recording
/// values and optimal directions, and locate direction transitions by
/// bisection. Transitions are reported only when the direction change buys
/// more than the configured gain.
pub fn optimal_direction_trace(
    build: &dyn Fn(f64) -> Result<CovarianceMatrix>,
    grid: &[f64],
    partition: &ModePartition,
    criterion: Criterion,
    config: &TraceConfig,
) -> Result<(Vec<TracePoint>, Vec<DirectionTransition>)> {
    let mut points = Vec::with_capacity(grid.len());
    for &x in grid {
        let gamma = build(x)?;
        let res = evaluate(&gamma, partition, criterion, &config.search)?;
        points.push(TracePoint {
            sweep_value: x,
            value: res.value,
            entangled: res.entangled,
            direction: res.optimal_direction,
            certified: res.certified,
        });
    }
    if criterion == Criterion::Ppt {
        return Ok((points, Vec::new()));
    }

    let support_of = |p: &TracePoint| -> Vec<usize> {
        p.direction
            .as_ref()
            .map(|d| d.support(config.support_threshold))
            .unwrap_or_default()
    };

    let mut transitions: Vec<DirectionTransition> = Vec::new();
    for k in 0..points.len().saturating_sub(1) {
        let s_lo = support_of(&points[k]);
        let s_hi = support_of(&points[k + 1]);
        if s_lo == s_hi {
            continue;
        }
        let (mut lo, mut hi) = (points[k].sweep_value, points[k + 1].sweep_value);
        while hi - lo > config.bisection_width {
            let mid = 0.5 * (lo + hi);
            let gamma = build(mid)?;
            let res = evaluate(&gamma, partition, criterion, &config.search)?;
            let s_mid = res
                .optimal_direction
                .as_ref()
                .map(|d| d.support(config.support_threshold))
                .unwrap_or_default();
            if s_mid == s_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let crossing = 0.5 * (lo + hi);

        let span = (grid[grid.len() - 1] - grid[0]).abs();
        let probe = config.gain_probe_offset.min(span);
        let mut gain = 0.0f64;
        for (at, other_support) in [
            ((crossing + probe).min(grid[grid.len() - 1].max(grid[0])), &s_lo),
            ((crossing - probe).max(grid[0].min(grid[grid.len() - 1])), &s_hi),
        ] {
            if other_support.is_empty() {
                continue;
            }
            let gamma = build(at)?;
            let free = evaluate(&gamma, partition, criterion, &config.search)?.value;
            let restricted =
                restricted_value(&gamma, partition, criterion, &config.search, other_support)?;
            if free.abs() > 1e-12 {
                gain = gain.max((free - restricted) / free.abs());
            } else {
                gain = gain.max(free - restricted);
            }
        }
        if gain <= config.gain_threshold {
            continue;
        }
        let detected_both_sides = points[k].entangled && points[k + 1].entangled;
        if let Some(last) = transitions.last() {
            if (last.crossing - crossing).abs() <= 2.0 * config.bisection_width {
                continue;
            }
        }
        transitions.push(DirectionTransition {
            bracket: (lo, hi),
            crossing,
            support_before: s_lo,
            support_after: s_hi,
            gain,
            detected_both_sides,
        });
    }
    Ok((points, transitions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{analytic_covariance, vacuum_mixed, StateFamily};
    use approx::assert_abs_diff_eq;

    const R_NOMINAL: f64 = std::f64::consts::LN_2 / 2.0;

    fn epr(eta: f64) -> CovarianceMatrix {
        analytic_covariance(StateFamily::TwoModeEpr, R_NOMINAL, eta).unwrap()
    }

    #[test]
    fn qfi_of_vacuum_is_two() {
        let vac = CovarianceMatrix::vacuum(1);
        let g = PhaseSpaceDirection::unit(vec![1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(qfi(&vac, &g).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn qfi_of_pure_tms_in_anti_squeezed_direction() {
        let g = PhaseSpaceDirection::unit(vec![1.0, 0.0, -1.0, 0.0]).unwrap();
        let expect = 2.0 * (2.0 * R_NOMINAL).exp();
        assert_abs_diff_eq!(qfi(&epr(1.0), &g).unwrap(), expect, epsilon = 1e-10);

        let g = PhaseSpaceDirection::unit(vec![1.0, 0.0, 1.0, 0.0]).unwrap();
        let expect = 2.0 * (-2.0 * R_NOMINAL).exp();
        assert_abs_diff_eq!(qfi(&epr(1.0), &g).unwrap(), expect, epsilon = 1e-10);
    }

    #[test]
    fn lower_bound_saturates_on_vacuum() {
        let vac = CovarianceMatrix::vacuum(1);
        let g = PhaseSpaceDirection::unit(vec![1.0, 0.0]).unwrap();
        let h = PhaseSpaceDirection::unit(vec![0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(qfi_lower_bound(&vac, &g, &h).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn lower_bound_vanishes_for_orthogonal_h() {
        let g = PhaseSpaceDirection::unit(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        // Omega g = (0, -1, 0, 0); h orthogonal to it
        let h = PhaseSpaceDirection::unit(vec![1.0, 0.0, 1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(qfi_lower_bound(&epr(0.7), &g, &h).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn lower_bound_saturates_for_pure_state_with_h_omega_g() {
        let gamma = epr(1.0);
        let omega = symplectic_form(2);
        let g = PhaseSpaceDirection::unit(vec![1.0, 0.0, 1.0, 0.0]).unwrap();
        let h = PhaseSpaceDirection::from_vector(&omega * g.coeffs());
        let lb = qfi_lower_bound(&gamma, &g, &h).unwrap();
        let f = qfi(&gamma, &g).unwrap();
        assert!(lb <= f + 1e-9);
        assert_abs_diff_eq!(lb, f, epsilon = 1e-9);
    }

    #[test]
    fn degenerate_h_rejected() {
        let vac = CovarianceMatrix::vacuum(1);
        let g = PhaseSpaceDirection::unit(vec![1.0, 0.0]).unwrap();
        let h = PhaseSpaceDirection::new(vec![0.0, 0.0]);
        assert!(matches!(
            qfi_lower_bound(&vac, &g, &h),
            Err(Error::DegenerateH)
        ));
    }

    #[test]
    fn witness_of_vacuum_is_zero() {
        let vac = CovarianceMatrix::vacuum(3);
        for p in crate::partition::enumerate_partitions(3, None).unwrap() {
            let res = qfi_witness(&vac, &p).unwrap();
            assert_abs_diff_eq!(res.value, 0.0, epsilon = 1e-12);
            assert!(!res.entangled);
        }
    }

    #[test]
    fn tms_witness_closed_form() {
        // lambda_max = 2 sinh(2r) = 1.5 at r = ln2/2, two-fold degenerate,
        // e_max in the span of (1,0,1,0)/sqrt2 and (0,1,0,-1)/sqrt2.
        let p = ModePartition::parse("A|B", 2).unwrap();
        let res = qfi_witness(&epr(1.0), &p).unwrap();
        assert_abs_diff_eq!(res.value, 1.5, epsilon = 1e-10);
        assert!(res.entangled);
        assert_eq!(res.degeneracy, Some(2));
        let e = res.optimal_direction.unwrap();
        let c = e.coeffs();
        let in_span = (c[0] - c[2]).abs() < 1e-7 && (c[1] + c[3]).abs() < 1e-7;
        assert!(in_span, "e_max {:?} outside degenerate span", c.as_slice());
    }

    #[test]
    fn ghz_a_bc_witness_zero_at_full_loss() {
        let gamma = analytic_covariance(StateFamily::Ghz3, 0.52, 0.0).unwrap();
        let p = ModePartition::parse("A|BC", 3).unwrap();
        let res = qfi_witness(&gamma, &p).unwrap();
        assert_abs_diff_eq!(res.value, 0.0, epsilon = 1e-9);
        assert!(!res.entangled);
    }

    #[test]
    fn squeezing_of_vacuum_sits_on_boundary() {
        let vac = CovarianceMatrix::vacuum(2);
        let p = ModePartition::singletons(2);
        let res = squeezing_coefficient(&vac, &p, &SearchConfig::default()).unwrap();
        assert_abs_diff_eq!(res.value, 1.0, epsilon = 1e-9);
        assert!(!res.entangled);
        assert!(res.certified);
    }

    #[test]
    fn tms_squeezing_closed_form() {
        // xi^-2 = 2 / (1 + e^{-4r}) = 1.6 at r = ln2/2.
        let p = ModePartition::parse("A|B", 2).unwrap();
        let res = squeezing_coefficient(&epr(1.0), &p, &SearchConfig::default()).unwrap();
        assert_abs_diff_eq!(res.value, 1.6, epsilon = 1e-9);
        assert!(res.entangled);
        let g = res.optimal_direction.unwrap();
        let c = g.coeffs();
        // degenerate pair (1,0,1,0)/sqrt2 and (0,1,0,-1)/sqrt2
        let in_span = (c[0] - c[2]).abs() < 1e-6 && (c[1] + c[3]).abs() < 1e-6;
        assert!(in_span, "g_min {:?} outside degenerate span", c.as_slice());
    }

    #[test]
    fn tms_squeezing_agrees_with_grid_certification() {
        let p = ModePartition::parse("A|B", 2).unwrap();
        for eta in [0.35, 1.0] {
            let gamma = epr(eta);
            let multistart = squeezing_coefficient(&gamma, &p, &SearchConfig::default())
                .unwrap()
                .value;
            let grid = certify_squeezing_grid(&gamma, &p, 0.5).unwrap();
            assert!(
                (multistart - grid).abs() / grid.abs() < 1e-6,
                "eta={eta}: multistart {multistart} vs grid {grid}"
            );
        }
    }

    #[test]
    fn grid_certification_rejects_large_states() {
        let g = analytic_covariance(StateFamily::Ghz3, 0.5, 1.0).unwrap();
        let p = ModePartition::parse("A|BC", 3).unwrap();
        assert!(matches!(
            certify_squeezing_grid(&g, &p, 1.0),
            Err(Error::TooManyModes { .. })
        ));
    }

    #[test]
    fn squeezing_restriction_mask_limits_support() {
        let gamma = analytic_covariance(StateFamily::Ghz3, R_NOMINAL, 0.1).unwrap();
        let p = ModePartition::singletons(3);
        // all-x mask
        let mask = vec![true, false, true, false, true, false];
        let res =
            squeezing_coefficient(&gamma, &p, &SearchConfig::default().with_mask(mask)).unwrap();
        let g = res.optimal_direction.unwrap();
        assert_eq!(g.coeffs()[1], 0.0);
        assert_eq!(g.coeffs()[3], 0.0);
        assert_eq!(g.coeffs()[5], 0.0);
        // restricted optimum cannot beat the unrestricted one
        let free = squeezing_coefficient(&gamma, &p, &SearchConfig::default()).unwrap();
        assert!(res.value <= free.value + 1e-9);
    }

    #[test]
    fn squeezing_deterministic_under_seed() {
        let gamma = analytic_covariance(StateFamily::Cluster4, 0.61, 0.42).unwrap();
        let p = ModePartition::parse("A|B|CD", 4).unwrap();
        let cfg = SearchConfig::with_seed(17);
        let a = squeezing_coefficient(&gamma, &p, &cfg).unwrap();
        let b = squeezing_coefficient(&gamma, &p, &cfg).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(
            a.optimal_direction.unwrap().coeffs(),
            b.optimal_direction.unwrap().coeffs()
        );
    }

    #[test]
    fn ppt_vacuum_boundary() {
        let vac = CovarianceMatrix::vacuum(2);
        let p = ModePartition::parse("A|B", 2).unwrap();
        let res = ppt_criterion(&vac, &p).unwrap();
        assert_abs_diff_eq!(res.value, 1.0, epsilon = 1e-12);
        assert!(!res.entangled);
    }

    #[test]
    fn ppt_tms_closed_form() {
        // min normalized symplectic eigenvalue = e^{-2r} = 0.5 at r = ln2/2.
        let p = ModePartition::parse("A|B", 2).unwrap();
        let res = ppt_criterion(&epr(1.0), &p).unwrap();
        assert_abs_diff_eq!(res.value, 0.5, epsilon = 1e-10);
        assert!(res.entangled);
    }

    #[test]
    fn ppt_rejects_multipartitions() {
        let g = analytic_covariance(StateFamily::Ghz3, 0.5, 1.0).unwrap();
        let p = ModePartition::singletons(3);
        assert!(matches!(
            ppt_criterion(&g, &p),
            Err(Error::NotABipartition { blocks: 3 })
        ));
    }

    #[test]
    fn ppt_value_independent_of_block_order() {
        let g = analytic_covariance(StateFamily::Cluster4, 0.5, 0.73).unwrap();
        let a = ppt_criterion(&g, &ModePartition::parse("A|BCD", 4).unwrap()).unwrap();
        let b = ppt_criterion(&g, &ModePartition::parse("BCD|A", 4).unwrap()).unwrap();
        assert_abs_diff_eq!(a.value, b.value, epsilon = 1e-12);
    }

    #[test]
    fn vacuum_mixed_is_ppt_entangled_but_witness_blind() {
        // r > arccoth(2), p below p_max: only PPT sees the entanglement.
        let r = 0.8;
        let p_max = crate::states::p_max_threshold(r);
        let gamma = vacuum_mixed(r, p_max - 0.02).unwrap();
        let part = ModePartition::parse("A|B", 2).unwrap();
        assert!(ppt_criterion(&gamma, &part).unwrap().entangled);
        assert!(!qfi_witness(&gamma, &part).unwrap().entangled);
        assert!(
            !squeezing_coefficient(&gamma, &part, &SearchConfig::default())
                .unwrap()
                .entangled
        );
    }

    #[test]
    fn witness_hierarchy_squeezing_implies_qfi() {
        let part3 = crate::partition::enumerate_partitions(3, None).unwrap();
        for eta in [0.2, 0.6, 1.0] {
            let gamma = analytic_covariance(StateFamily::Ghz3, 0.45, eta).unwrap();
            for p in &part3 {
                let sqz = squeezing_coefficient(&gamma, p, &SearchConfig::default()).unwrap();
                if sqz.value > 1.0 + 1e-6 {
                    let w = qfi_witness(&gamma, p).unwrap();
                    assert!(
                        w.value > 0.0,
                        "squeezing detects but witness does not: {} eta={eta}",
                        p.label()
                    );
                }
            }
        }
    }

    #[test]
    fn ghz_direction_transition_near_0_17() {
        let p = ModePartition::singletons(3);
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.05).collect();
        let build =
            |eta: f64| analytic_covariance(StateFamily::Ghz3, R_NOMINAL, eta);
        let (_, transitions) = optimal_direction_trace(
            &build,
            &grid,
            &p,
            Criterion::Squeezing,
            &TraceConfig::default(),
        )
        .unwrap();
        assert_eq!(transitions.len(), 1, "{transitions:?}");
        let t = &transitions[0];
        assert!(
            (t.crossing - 0.17).abs() <= 0.01,
            "crossing at {}",
            t.crossing
        );
        assert!(t.detected_both_sides);
        // low-loss side: (x_B - x_C)/sqrt2 supported on x_B, x_C
        assert_eq!(t.support_before, vec![2, 4]);
        // high side: p_A, p_B, p_C
        assert_eq!(t.support_after, vec![1, 3, 5]);
    }
}
