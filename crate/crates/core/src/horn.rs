//! Horn-shaped regions Ω_ν = {(x′, x_d) : |x′|·|x_d|^{ν/(d−1)} < 1}.
//!
//! Their volume is infinite but the spectrum of the Dirichlet Laplacian is
//! discrete, with non-Weyl growth of the Riesz means governed by ν.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::quad::{integrate, QuadOptions};
use crate::report::{BoundKind, BoundReport};
use crate::riesz::IntervalPartition;
use crate::specfun::{beta_pos, gamma_ratio, lcl_value, zeta_fn};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HornRegion {
    dim: u32,
    nu: f64,
}

impl HornRegion {
    /// `nu = 1` is only accepted in the plane.
    pub fn new(dim: u32, nu: f64) -> Result<Self> {
        if dim < 2 {
            return Err(domain(
                "HornRegion",
                format!("dimension must be >= 2, got {dim}"),
            ));
        }
        if !(nu >= 1.0) || !nu.is_finite() {
            return Err(domain("HornRegion", format!("nu must be >= 1, got {nu}")));
        }
        if nu == 1.0 && dim != 2 {
            return Err(domain("HornRegion", "nu = 1 is only supported for d = 2"));
        }
        Ok(Self { dim, nu })
    }

    /// The planar region |x y| < 1.
    pub fn critical() -> Self {
        Self { dim: 2, nu: 1.0 }
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn is_critical(&self) -> bool {
        self.nu == 1.0
    }
}

/// The section of Ω_ν above x′: the interval (−w, w) with w = |x′|^{(1−d)/ν}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HornSection {
    pub xprime_norm: f64,
    pub half_width: f64,
}

impl HornSection {
    pub fn length(&self) -> f64 {
        2.0 * self.half_width
    }
}

pub fn horn_section(h: &HornRegion, xprime_norm: f64) -> Result<HornSection> {
    if !(xprime_norm >= 0.0) {
        return Err(domain(
            "horn_section",
            format!("|x'| must be >= 0, got {xprime_norm}"),
        ));
    }
    let d = h.dim as f64;
    Ok(HornSection {
        xprime_norm,
        half_width: xprime_norm.powf((1.0 - d) / h.nu),
    })
}

pub fn horn_contains(h: &HornRegion, point: &[f64]) -> Result<bool> {
    let d = h.dim as usize;
    if point.len() != d {
        return Err(Error::Argument(format!(
            "point has {} coordinates, the horn lives in dimension {d}",
            point.len()
        )));
    }
    let xp = point[..d - 1].iter().map(|x| x * x).sum::<f64>().sqrt();
    let xd = point[d - 1].abs();
    Ok(xp * xd.powf(h.nu / (d as f64 - 1.0)) < 1.0)
}

/// Coefficient K with R_σ(Λ; Ω_ν) ≤ K·Λ^{σ+(d−1+ν)/2}.
pub fn thm32_coefficient(h: &HornRegion, sigma: f64) -> f64 {
    let d = h.dim as f64;
    let nu = h.nu;
    let zeta = zeta_fn(nu).unwrap_or(f64::INFINITY);
    let head = zeta / (2f64.powf(d - 1.0) * (d - 1.0)) * (2.0 / PI).powf(nu);
    // Γ(ν/2+1)Γ(σ+1) / (Γ((d+1)/2)Γ(σ+(d+1+ν)/2))
    head * gamma_ratio(nu / 2.0 + 1.0, (d + 1.0) / 2.0)
        * gamma_ratio(sigma + 1.0, sigma + (d + 1.0 + nu) / 2.0)
}

fn thm32_exponent(h: &HornRegion, sigma: f64) -> f64 {
    sigma + (h.dim as f64 - 1.0 + h.nu) / 2.0
}

fn check_sigma_lambda(op: &'static str, sigma: f64, lambda: f64) -> Result<()> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(domain(op, format!("sigma must be >= 0, got {sigma}")));
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(domain(op, format!("lambda must be positive, got {lambda}")));
    }
    Ok(())
}

/// Upper bound on R_σ(Λ; Ω_ν) for σ ≥ 3/2 and ν > 1, sharp in the leading
/// term for d = 2.
pub fn horn_bound_thm32(h: &HornRegion, sigma: f64, lambda: f64) -> Result<BoundReport> {
    check_sigma_lambda("horn_bound_thm32", sigma, lambda)?;
    let coef = thm32_coefficient(h, sigma);
    let exponent = thm32_exponent(h, sigma);
    let mut r = BoundReport::new(BoundKind::HornRiesz, coef * lambda.powf(exponent))
        .param("dim", h.dim as f64)
        .param("nu", h.nu)
        .param("sigma", sigma)
        .param("lambda", lambda)
        .param("coefficient", coef)
        .param("exponent", exponent)
        .require(sigma >= 1.5, "sigma < 3/2")
        .require(h.nu > 1.0, "nu <= 1: the zeta factor diverges");
    if h.dim > 2 {
        r = r.note(format!(
            "the section integral taken with the surface measure of the unit sphere in R^{} is {} times this value",
            h.dim - 1,
            h.dim - 1
        ));
    }
    Ok(r)
}

/// Σ_{j>J} j^{−s} by Euler–Maclaurin at N = J+1.
fn zeta_tail(j_max: usize, s: f64) -> f64 {
    let n = (j_max + 1) as f64;
    n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s) + s / 12.0 * n.powf(-s - 1.0)
        - s * (s + 1.0) * (s + 2.0) / 720.0 * n.powf(-s - 3.0)
}

/// Number of j-integrals evaluated by quadrature before the tail takes over.
const J_QUAD: usize = 40;

/// Σ_j ∫_0^∞ (1 − π²j²/(4Λ) r^{2(d−1)/ν})_+^{σ+(d−1)/2} r^{d−2} dr.
///
/// The first [`J_QUAD`] terms are integrated one by one; the rest follow from
/// the exact scaling of the j-th term as j^{−ν}.
fn radial_sum(h: &HornRegion, sigma: f64, lambda: f64, quad_tol: f64) -> Result<f64> {
    let d = h.dim as f64;
    let gamma = sigma + (d - 1.0) / 2.0;
    let q = 2.0 * (d - 1.0) / h.nu;
    let c = PI * PI / (4.0 * lambda);
    let opts = QuadOptions::rel(quad_tol);
    let mut total = 0.0;
    let mut first = 0.0;
    for j in 1..=J_QUAD {
        let cj = c * (j * j) as f64;
        let support = cj.powf(-1.0 / q);
        let f = |r: f64| {
            let base = 1.0 - cj * r.powf(q);
            if base <= 0.0 {
                0.0
            } else {
                base.powf(gamma) * r.powf(d - 2.0)
            }
        };
        let v = integrate(f, 0.0, support, opts)?.value;
        if j == 1 {
            first = v;
        }
        total += v;
    }
    Ok(total + first * zeta_tail(J_QUAD, h.nu))
}

/// The section integral behind the horn bound, evaluated by quadrature with
/// ω_{d−1} = π^{(d−1)/2}/Γ((d+1)/2), the normalization under which it
/// reproduces [`horn_bound_thm32`] in every dimension (for d = 2, ω_1 = 2).
///
/// `quad_tol` is the relative tolerance of each radial integral.
pub fn horn_bound_integral_check(
    h: &HornRegion,
    sigma: f64,
    lambda: f64,
    quad_tol: f64,
) -> Result<f64> {
    check_sigma_lambda("horn_bound_integral_check", sigma, lambda)?;
    if !(h.nu > 1.0) {
        return Err(domain(
            "horn_bound_integral_check",
            "the j-sum diverges for nu <= 1",
        ));
    }
    let d = h.dim as f64;
    let omega = PI.powf((d - 1.0) / 2.0) / gamma_ratio((d + 1.0) / 2.0, 1.0);
    let gamma = sigma + (d - 1.0) / 2.0;
    Ok(lcl_value(sigma, h.dim - 1)
        * omega
        * radial_sum(h, sigma, lambda, quad_tol)?
        * lambda.powf(gamma))
}

/// L(σ,d−1)∫_{R^{d−1}} Σ_j (Λ − π²j²/(4w(x′)²))_+^{σ+(d−1)/2} dx′ in polar
/// coordinates with the surface measure of the unit sphere in R^{d−1}. For
/// d ≥ 3 this is (d−1) times [`horn_bound_integral_check`].
pub fn horn_section_integral(
    h: &HornRegion,
    sigma: f64,
    lambda: f64,
    quad_tol: f64,
) -> Result<f64> {
    let d = h.dim as f64;
    Ok((d - 1.0) * horn_bound_integral_check(h, sigma, lambda, quad_tol)?)
}

/// Counting bound R_0(Λ; Ω_ν) ≤ C_{d,ν}Λ^{(d−1+ν)/2}, obtained from the
/// σ = 3/2 bound at τ = 3/(d+ν−1).
pub fn horn_counting_cor33(h: &HornRegion, lambda: f64) -> Result<BoundReport> {
    check_sigma_lambda("horn_counting_cor33", 0.0, lambda)?;
    let d = h.dim as f64;
    let nu = h.nu;
    let p = d + nu + 2.0;
    let m = d + nu - 1.0;
    let prefactor = (0.5 * p * p.ln() - 1.5 * 3f64.ln() - 0.5 * m * m.ln()).exp();
    let constant = prefactor * thm32_coefficient(h, 1.5);
    let exponent = m / 2.0;
    Ok(
        BoundReport::new(BoundKind::HornCounting, constant * lambda.powf(exponent))
            .param("dim", d)
            .param("nu", nu)
            .param("lambda", lambda)
            .param("constant", constant)
            .param("exponent", exponent)
            .param("tau_min", 3.0 / m)
            .require(nu > 1.0, "nu <= 1: the zeta factor diverges"),
    )
}

/// Below this level the critical horn has no spectrum.
pub const CRITICAL_THRESHOLD: f64 = PI * PI / 16.0;

/// (33 + 16 ln(4/π))/(8π), the constant of the second term of the critical
/// horn bound.
pub fn critical_riesz_constant() -> f64 {
    (33.0 + 16.0 * (4.0 / PI).ln()) / (8.0 * PI)
}

/// √(5/3)(825 + 400 ln(4/π) + 360π ln(5/3))/(72π), the constant of the
/// linear term of the critical counting bound.
pub fn critical_counting_constant() -> f64 {
    (5.0f64 / 3.0).sqrt() * (825.0 + 400.0 * (4.0 / PI).ln() + 360.0 * PI * (5.0f64 / 3.0).ln())
        / (72.0 * PI)
}

/// Riesz-mean bound for Ω_1 in the plane.
pub fn horn_critical_thm34(sigma: f64, lambda: f64) -> Result<BoundReport> {
    check_sigma_lambda("horn_critical_thm34", sigma, lambda)?;
    let c = critical_riesz_constant();
    let (lead, rest) = if lambda <= CRITICAL_THRESHOLD {
        (0.0, 0.0)
    } else {
        let p = lambda.powf(sigma + 1.0);
        (
            p * lambda.ln() / (PI * (sigma + 1.0)),
            c / (sigma + 1.0) * p,
        )
    };
    Ok(BoundReport::new(BoundKind::CriticalHornRiesz, lead + rest)
        .param("sigma", sigma)
        .param("lambda", lambda)
        .param("constant", c)
        .param("leading_term", lead)
        .param("threshold", CRITICAL_THRESHOLD)
        .require(sigma >= 1.5, "sigma < 3/2"))
}

/// Counting bound for Ω_1 in the plane.
pub fn horn_critical_counting_cor35(lambda: f64) -> Result<BoundReport> {
    check_sigma_lambda("horn_critical_counting_cor35", 0.0, lambda)?;
    let c = critical_counting_constant();
    let value = if lambda <= CRITICAL_THRESHOLD {
        0.0
    } else {
        (5.0f64 / 3.0).powf(1.5) / PI * lambda * lambda.ln() + c * lambda
    };
    Ok(BoundReport::new(BoundKind::CriticalHornCounting, value)
        .param("lambda", lambda)
        .param("constant", c)
        .param("tau_min", 1.5)
        .param("threshold", CRITICAL_THRESHOLD))
}

/// Leading term of R_σ(Λ; Ω_ν) as Λ → ∞ for planar horns.
pub fn horn_asymptotic_leading(h: &HornRegion, sigma: f64, lambda: f64) -> Result<f64> {
    check_sigma_lambda("horn_asymptotic_leading", sigma, lambda)?;
    if h.dim != 2 {
        return Err(domain(
            "horn_asymptotic_leading",
            "asymptotics are available for d = 2 only",
        ));
    }
    let nu = h.nu;
    if h.is_critical() {
        return Ok(lambda.powf(sigma + 1.0) * lambda.ln() / (PI * (sigma + 1.0)));
    }
    let coef = zeta_fn(nu)? * (2.0 / PI).powf(nu) * beta_pos(nu / 2.0 + 1.0, sigma + 1.0)
        / beta_pos(sigma + (nu + 3.0) / 2.0, 0.5);
    Ok(coef * lambda.powf(sigma + (nu + 1.0) / 2.0))
}

/// Section of Ω_1 along x₂ in coordinates rotated by π/4, where the region
/// reads |x₁² − x₂²| < 2.
pub fn horn1_rotated_section(x1: f64) -> IntervalPartition {
    let a = x1 * x1;
    let outer = (a + 2.0).sqrt();
    let lengths = if x1.abs() <= std::f64::consts::SQRT_2 {
        vec![2.0 * outer]
    } else {
        // outer − inner written without cancellation
        let piece = 4.0 / (outer + (a - 2.0).max(0.0).sqrt());
        vec![piece, piece]
    };
    IntervalPartition::new(lengths).expect("section lengths are positive")
}
