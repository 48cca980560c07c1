//! Riesz means of explicit spectra and the scalar identities that move
//! between Riesz orders.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::quad::{integrate_with_breaks, QuadOptions};
use crate::specfun::beta_pos;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Exactness {
    Exact,
    /// Computed on a grid with spacing `h`.
    Numerical {
        h: f64,
    },
}

/// Eigenvalues of −Δ (or of a Schrödinger operator) sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenvalueSpectrum {
    values: Vec<f64>,
    pub exactness: Exactness,
}

impl EigenvalueSpectrum {
    pub fn new(mut values: Vec<f64>, exactness: Exactness) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument(
                "spectrum contains non-finite values".into(),
            ));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values, exactness })
    }

    pub fn exact(values: Vec<f64>) -> Result<Self> {
        Self::new(values, Exactness::Exact)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Eigenvalues strictly below `lambda`.
    pub fn below(&self, lambda: f64) -> &[f64] {
        let n = self.values.partition_point(|&e| e < lambda);
        &self.values[..n]
    }
}

/// Lengths of the open intervals making up a one-dimensional section.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalPartition {
    lengths: Vec<f64>,
}

impl IntervalPartition {
    pub fn new(lengths: Vec<f64>) -> Result<Self> {
        if let Some(l) = lengths.iter().find(|&&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::Argument(format!(
                "interval lengths must be positive, got {l}"
            )));
        }
        Ok(Self { lengths })
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn total_length(&self) -> f64 {
        self.lengths.iter().sum()
    }
}

fn check_order(op: &'static str, sigma: f64) -> Result<()> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(domain(op, format!("Riesz order must be >= 0, got {sigma}")));
    }
    Ok(())
}

/// x_+^σ with 0^0 = 0, so that σ = 0 counts strictly positive gaps.
#[inline]
pub(crate) fn pos_pow(x: f64, sigma: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if sigma == 0.0 {
        1.0
    } else if sigma == 1.0 {
        x
    } else {
        x.powf(sigma)
    }
}

/// Σ_k (λ − E_k)_+^σ.
pub fn riesz_mean(spec: &EigenvalueSpectrum, lambda: f64, sigma: f64) -> Result<f64> {
    check_order("riesz_mean", sigma)?;
    Ok(riesz_sum(spec.below(lambda), lambda, sigma))
}

pub(crate) fn riesz_sum(energies: &[f64], lambda: f64, sigma: f64) -> f64 {
    energies.iter().map(|&e| pos_pow(lambda - e, sigma)).sum()
}

/// Σ_{j≥1} (λ − π²j²/len²)_+^γ, the Riesz mean of the Dirichlet interval of
/// length `len`.
pub fn interval_trace(lambda: f64, length: f64, gamma: f64) -> Result<f64> {
    check_order("interval_trace", gamma)?;
    if !(length > 0.0) || !length.is_finite() {
        return Err(domain(
            "interval_trace",
            format!("length must be positive, got {length}"),
        ));
    }
    Ok(interval_trace_unchecked(lambda, length, gamma))
}

pub(crate) fn interval_trace_unchecked(lambda: f64, length: f64, gamma: f64) -> f64 {
    if !(lambda > 0.0) {
        return 0.0;
    }
    let k = PI * PI / (length * length);
    let mut sum = 0.0;
    let mut j = 1u64;
    loop {
        let gap = lambda - k * (j * j) as f64;
        if gap <= 0.0 {
            break;
        }
        sum += pos_pow(gap, gamma);
        j += 1;
    }
    sum
}

/// Σ_{j,k≥1} (λ − π²(j²+k²)/l²)_+^σ, the Riesz mean of the Dirichlet square
/// of side `l`.
pub fn square_riesz_mean(side: f64, lambda: f64, sigma: f64) -> Result<f64> {
    check_order("square_riesz_mean", sigma)?;
    if !(side > 0.0) || !side.is_finite() {
        return Err(domain(
            "square_riesz_mean",
            format!("side must be positive, got {side}"),
        ));
    }
    let k = PI * PI / (side * side);
    let mut sum = 0.0;
    let mut j = 1u64;
    loop {
        let rest = lambda - k * (j * j) as f64;
        if rest <= k {
            break;
        }
        sum += interval_trace_unchecked(rest, side, sigma);
        j += 1;
    }
    Ok(sum)
}

/// Sum of [`interval_trace`] over every interval of the partition.
pub fn partition_trace(lambda: f64, part: &IntervalPartition, gamma: f64) -> Result<f64> {
    check_order("partition_trace", gamma)?;
    Ok(part
        .lengths()
        .iter()
        .map(|&l| interval_trace_unchecked(lambda, l, gamma))
        .sum())
}

/// (A/2)·B(1/2, γ+1), which dominates Σ_j (1 − j²/A²)_+^γ.
pub fn eq16_bound(a: f64, gamma: f64) -> Result<f64> {
    if !(a > 0.0) || !(gamma > 0.0) {
        return Err(domain(
            "eq16_bound",
            format!("requires A > 0 and gamma > 0, got ({a}, {gamma})"),
        ));
    }
    Ok(0.5 * a * beta_pos(0.5, gamma + 1.0))
}

/// Raises a Riesz mean of order γ to order σ > γ:
/// R_σ(λ) = B(γ+1, σ−γ)^{-1} ∫_0^λ τ^{σ−γ−1} R_γ(λ−τ) dτ.
///
/// `quad_tol` is an absolute tolerance on the returned value.
pub fn aizenman_lieb_lift<F: Fn(f64) -> f64>(
    r_gamma: F,
    lambda: f64,
    sigma: f64,
    gamma: f64,
    quad_tol: f64,
) -> Result<f64> {
    aizenman_lieb_lift_with_breaks(r_gamma, lambda, sigma, gamma, quad_tol, &[])
}

/// As [`aizenman_lieb_lift`], with the energies at which `r_gamma` has kinks
/// or jumps (for an explicit spectrum: its eigenvalues).
pub fn aizenman_lieb_lift_with_breaks<F: Fn(f64) -> f64>(
    r_gamma: F,
    lambda: f64,
    sigma: f64,
    gamma: f64,
    quad_tol: f64,
    energies: &[f64],
) -> Result<f64> {
    check_order("aizenman_lieb_lift", gamma)?;
    if !(sigma > gamma) || !sigma.is_finite() {
        return Err(domain(
            "aizenman_lieb_lift",
            format!("requires sigma > gamma, got sigma = {sigma}, gamma = {gamma}"),
        ));
    }
    if !(quad_tol > 0.0) {
        return Err(domain("aizenman_lieb_lift", "quad_tol must be positive"));
    }
    if !(lambda > 0.0) {
        return Ok(0.0);
    }
    // u = (τ/λ)^p turns τ^{p-1} dτ into (λ^p/p) du and removes the endpoint
    // singularity for p < 1.
    let p = sigma - gamma;
    let scale = lambda.powf(p) / (p * beta_pos(gamma + 1.0, p));
    let integrand = |u: f64| r_gamma(lambda * (1.0 - u.powf(1.0 / p)));
    let mut breaks = vec![0.0, 1.0];
    breaks.extend(
        energies
            .iter()
            .filter(|&&e| e > 0.0 && e < lambda)
            .map(|&e| (1.0 - e / lambda).powf(p)),
    );
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let q = integrate_with_breaks(integrand, &breaks, QuadOptions::abs(quad_tol / scale))?;
    Ok(scale * q.value)
}

/// Result of converting a Riesz-mean bound into a counting bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountingEstimate {
    pub value: f64,
    /// The grid point attaining the minimum.
    pub tau: f64,
}

/// 64 log-spaced points in [1e-2, 1e2].
pub fn default_tau_grid() -> Vec<f64> {
    log_grid(1e-2, 1e2, 64)
}

/// `n` log-spaced points from `a` to `b` inclusive.
pub fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// min over τ of (τλ)^{−σ} R_σ((1+τ)λ), an upper bound for the number of
/// eigenvalues below λ whenever `r_sigma` bounds R_σ from above.
pub fn counting_from_riesz<F: Fn(f64) -> f64>(
    r_sigma: F,
    lambda: f64,
    sigma: f64,
    tau_grid: &[f64],
) -> Result<CountingEstimate> {
    if tau_grid.is_empty() {
        return Err(Error::Argument("tau grid is empty".into()));
    }
    if !(sigma > 0.0) {
        return Err(domain(
            "counting_from_riesz",
            format!("requires sigma > 0, got {sigma}"),
        ));
    }
    if let Some(t) = tau_grid.iter().find(|&&t| !(t > 0.0)) {
        return Err(Error::Argument(format!(
            "tau grid points must be positive, got {t}"
        )));
    }
    if !(lambda > 0.0) {
        return Err(domain(
            "counting_from_riesz",
            format!("requires lambda > 0, got {lambda}"),
        ));
    }
    let mut best = CountingEstimate {
        value: f64::INFINITY,
        tau: tau_grid[0],
    };
    for &tau in tau_grid {
        let v = (tau * lambda).powf(-sigma) * r_sigma((1.0 + tau) * lambda);
        if v < best.value {
            best = CountingEstimate { value: v, tau };
        }
    }
    Ok(best)
}
