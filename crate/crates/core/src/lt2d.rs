//! Lieb–Thirring bounds with remainder for −Δ − V on open sets Ω ⊂ R^d,
//! built section by section: for each x′ the set {t : (x′, t) ∈ Ω} is a
//! union of open intervals J_k(x′), and only intervals with
//! A_k = |J_k|∫_{J_k} V > 2 ln 3 can carry negative spectrum.

use std::cell::RefCell;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::quad::{integrate, integrate_endpoint_singular, integrate_with_breaks, QuadOptions};
use crate::report::{BoundKind, BoundReport};
use crate::schrodinger1d::TWO_LN_3;
use crate::specfun::lcl_value;

type TraceFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The potential restricted to one section interval.
#[derive(Clone)]
pub enum PotentialTrace {
    /// A function of t with integrable singularities at the listed points.
    Function {
        f: TraceFn,
        singular_points: Vec<f64>,
    },
    /// Values at t_0, t_0 + h, …, linearly interpolated and held constant
    /// beyond the first and last node.
    Sampled { t0: f64, h: f64, values: Vec<f64> },
}

impl fmt::Debug for PotentialTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialTrace::Function {
                singular_points, ..
            } => f
                .debug_struct("Function")
                .field("singular_points", singular_points)
                .finish_non_exhaustive(),
            PotentialTrace::Sampled { t0, h, values } => f
                .debug_struct("Sampled")
                .field("t0", t0)
                .field("h", h)
                .field("nodes", &values.len())
                .finish(),
        }
    }
}

impl PotentialTrace {
    pub fn function(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        PotentialTrace::Function {
            f: Arc::new(f),
            singular_points: Vec::new(),
        }
    }

    pub fn singular_function(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        singular_points: Vec<f64>,
    ) -> Self {
        PotentialTrace::Function {
            f: Arc::new(f),
            singular_points,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            PotentialTrace::Function { f, .. } => f(t),
            PotentialTrace::Sampled { t0, h, values } => {
                let x = (t - t0) / h;
                if x <= 0.0 {
                    return values[0];
                }
                let n = values.len();
                if x >= (n - 1) as f64 {
                    return values[n - 1];
                }
                let i = x.floor() as usize;
                let f = x - i as f64;
                values[i] * (1.0 - f) + values[i + 1] * f
            }
        }
    }

    /// ∫_a^b V(t)^p dt.
    pub fn integral_pow(&self, a: f64, b: f64, p: f64, tol: f64) -> Result<f64> {
        let g = |t: f64| {
            let v = self.eval(t);
            if v > 0.0 {
                v.powf(p)
            } else if v < 0.0 {
                f64::NAN
            } else {
                0.0
            }
        };
        let opts = QuadOptions {
            abs_tol: tol,
            rel_tol: tol,
            max_intervals: 20_000,
        };
        let value = match self {
            PotentialTrace::Function {
                singular_points, ..
            } if singular_points.iter().any(|&s| s >= a && s <= b) => {
                let mut pts = vec![a, b];
                pts.extend(singular_points.iter().copied().filter(|&s| s > a && s < b));
                pts.sort_by(f64::total_cmp);
                let mut sum = 0.0;
                for w in pts.windows(2) {
                    sum += integrate_endpoint_singular(g, w[0], w[1], 12, opts)?.value;
                }
                sum
            }
            PotentialTrace::Function { .. } => integrate(g, a, b, opts)?.value,
            PotentialTrace::Sampled { t0, h, values } => {
                let mut pts = vec![a, b];
                pts.extend(
                    (0..values.len())
                        .map(|i| t0 + i as f64 * h)
                        .filter(|&t| t > a && t < b),
                );
                pts.sort_by(f64::total_cmp);
                let opts = QuadOptions {
                    max_intervals: opts.max_intervals.max(4 * pts.len()),
                    ..opts
                };
                integrate_with_breaks(g, &pts, opts)?.value
            }
        };
        if value.is_nan() {
            return Err(domain("integral_pow", "potential takes negative values"));
        }
        if !value.is_finite() {
            return Err(domain(
                "integral_pow",
                "potential power is not integrable on the section",
            ));
        }
        Ok(value)
    }
}

/// One interval J_k(x′) with the trace of V on it.
#[derive(Debug, Clone)]
pub struct SectionPiece {
    pub start: f64,
    pub end: f64,
    pub trace: PotentialTrace,
}

impl SectionPiece {
    pub fn length(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Analytic,
    Raster { h: f64 },
}

type Sectioner = Arc<dyn Fn(&[f64]) -> Vec<SectionPiece> + Send + Sync>;

/// A domain with potential, described through its sections along the last
/// coordinate, together with the box [−R, R]^{d−1} of x′ to integrate over.
#[derive(Clone)]
pub struct SectionedDomainPotential {
    dim: u32,
    sectioner: Sectioner,
    provenance: Provenance,
    extent: f64,
    /// True when every section outside the box has A_k ≤ 2 ln 3.
    extent_exact: bool,
    /// Points of each x′ coordinate where the section integrals are singular.
    outer_singular_points: Vec<f64>,
}

impl fmt::Debug for SectionedDomainPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SectionedDomainPotential")
            .field("dim", &self.dim)
            .field("provenance", &self.provenance)
            .field("extent", &self.extent)
            .field("extent_exact", &self.extent_exact)
            .finish_non_exhaustive()
    }
}

impl SectionedDomainPotential {
    pub fn analytic(
        dim: u32,
        extent: f64,
        sectioner: impl Fn(&[f64]) -> Vec<SectionPiece> + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::build(dim, extent, Arc::new(sectioner), Provenance::Analytic)
    }

    /// Sections found by sampling `inside` along t ∈ [t_min, t_max] with step h.
    pub fn raster(
        dim: u32,
        extent: f64,
        inside: impl Fn(&[f64], f64) -> bool + Send + Sync + 'static,
        potential: impl Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
        t_range: (f64, f64),
        h: f64,
    ) -> Result<Self> {
        if !(h > 0.0) {
            return Err(domain(
                "SectionedDomainPotential::raster",
                format!("h must be positive, got {h}"),
            ));
        }
        let sectioner =
            move |xp: &[f64]| raster_sectioner(|t| inside(xp, t), |t| potential(xp, t), t_range, h);
        Self::build(dim, extent, Arc::new(sectioner), Provenance::Raster { h })
    }

    fn build(dim: u32, extent: f64, sectioner: Sectioner, provenance: Provenance) -> Result<Self> {
        if dim < 2 {
            return Err(domain(
                "SectionedDomainPotential",
                format!("dimension must be >= 2, got {dim}"),
            ));
        }
        if !(extent > 0.0) || !extent.is_finite() {
            return Err(domain(
                "SectionedDomainPotential",
                format!("extent must be positive, got {extent}"),
            ));
        }
        Ok(Self {
            dim,
            sectioner,
            provenance,
            extent,
            extent_exact: false,
            outer_singular_points: Vec::new(),
        })
    }

    /// Declares that no section beyond the box carries negative spectrum.
    pub fn with_exact_extent(mut self) -> Self {
        self.extent_exact = true;
        self
    }

    pub fn with_outer_singular_points(mut self, pts: Vec<f64>) -> Self {
        self.outer_singular_points = pts;
        self
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn sections(&self, xprime: &[f64]) -> Result<Vec<SectionPiece>> {
        if xprime.len() + 1 != self.dim as usize {
            return Err(Error::Argument(format!(
                "x' has {} coordinates, expected {}",
                xprime.len(),
                self.dim - 1
            )));
        }
        Ok((self.sectioner)(xprime))
    }
}

/// A_k = |J_k|·B_k and B_k = ∫_{J_k} V.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectionStats {
    pub a: f64,
    pub b: f64,
    pub kappa_member: bool,
}

fn stats_of(piece: &SectionPiece, tol: f64) -> Result<SectionStats> {
    let b = piece.trace.integral_pow(piece.start, piece.end, 1.0, tol)?;
    let a = piece.length() * b;
    Ok(SectionStats {
        a,
        b,
        kappa_member: a > TWO_LN_3,
    })
}

/// Statistics of the k-th interval (k ≥ 1) of the section at x′.
pub fn section_stats(
    sd: &SectionedDomainPotential,
    xprime: &[f64],
    k: usize,
) -> Result<SectionStats> {
    let sections = sd.sections(xprime)?;
    let piece = k
        .checked_sub(1)
        .and_then(|i| sections.get(i))
        .ok_or_else(|| {
            Error::Argument(format!(
                "section at {xprime:?} has {} intervals, asked for {k}",
                sections.len()
            ))
        })?;
    stats_of(piece, 1e-10)
}

/// Per-x′ integrands of the bound.
struct SectionTerms {
    /// Σ_{k∈κ} ∫_{J_k} V^{σ+d/2}
    effective: f64,
    /// Σ_k ∫_{J_k} V^{σ+d/2}
    all: f64,
    /// ρ(x′, V)
    remainder: f64,
    kappa_size: usize,
}

fn section_terms(
    sd: &SectionedDomainPotential,
    xprime: &[f64],
    sigma: f64,
    tol: f64,
) -> Result<SectionTerms> {
    let d = sd.dim as f64;
    let power = sigma + 0.5 * d;
    let rho_power = sigma + 0.5 * (d - 1.0);
    let mut out = SectionTerms {
        effective: 0.0,
        all: 0.0,
        remainder: 0.0,
        kappa_size: 0,
    };
    for piece in sd.sections(xprime)? {
        let st = stats_of(&piece, tol)?;
        let integral = piece
            .trace
            .integral_pow(piece.start, piece.end, power, tol)?;
        out.all += integral;
        if st.kappa_member {
            out.effective += integral;
            out.remainder += (2.0 * st.b * st.b / st.a.exp_m1()).powf(rho_power);
            out.kappa_size += 1;
        }
    }
    Ok(out)
}

/// Nested adaptive quadrature of f over [−R, R]^{m}, splitting each
/// coordinate at the given singular points.
fn integrate_box(
    f: &dyn Fn(&[f64]) -> Result<f64>,
    m: usize,
    extent: f64,
    singular: &[f64],
    tol: f64,
    prefix: &mut Vec<f64>,
) -> Result<f64> {
    let mut pts = vec![-extent, extent];
    pts.extend(
        singular
            .iter()
            .copied()
            .filter(|&s| s > -extent && s < extent),
    );
    pts.sort_by(f64::total_cmp);
    let err = RefCell::new(None);
    let opts = QuadOptions {
        abs_tol: tol,
        rel_tol: tol,
        max_intervals: 20_000,
    };
    let mut total = 0.0;
    for w in pts.windows(2) {
        let g = |x: f64| {
            let mut p = prefix.clone();
            p.push(x);
            let r = if m == 1 {
                f(&p)
            } else {
                integrate_box(f, m - 1, extent, singular, tol, &mut p)
            };
            r.unwrap_or_else(|e| {
                err.borrow_mut().get_or_insert(e);
                0.0
            })
        };
        let q = if singular.is_empty() {
            integrate(g, w[0], w[1], opts)?
        } else {
            integrate_endpoint_singular(g, w[0], w[1], 8, opts)?
        };
        total += q.value;
    }
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(total),
    }
}

/// R_σ ≤ L(σ,d)∫_{Ω_V} V^{σ+d/2} − L(σ,d−1)∫ρ(x′, V)dx′ with
/// ρ = Σ_{k∈κ}(2B_k²/(e^{A_k} − 1))^{σ+(d−1)/2}. The x′ integrals run over
/// the box of the domain description.
pub fn thm45_bound(
    sd: &SectionedDomainPotential,
    sigma: f64,
    quad_tol: f64,
) -> Result<BoundReport> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(domain(
            "thm45_bound",
            format!("sigma must be >= 0, got {sigma}"),
        ));
    }
    if !(quad_tol > 0.0) {
        return Err(domain("thm45_bound", "quad_tol must be positive"));
    }
    let m = sd.dim as usize - 1;
    let inner_tol = 1e-2 * quad_tol;
    let sing = &sd.outer_singular_points;
    let mut prefix = Vec::with_capacity(m);
    let eff = integrate_box(
        &|xp| Ok(section_terms(sd, xp, sigma, inner_tol)?.effective),
        m,
        sd.extent,
        sing,
        quad_tol,
        &mut prefix,
    )?;
    let rem = integrate_box(
        &|xp| Ok(section_terms(sd, xp, sigma, inner_tol)?.remainder),
        m,
        sd.extent,
        sing,
        quad_tol,
        &mut prefix,
    )?;
    // the plain bound over the box may diverge; report it only when finite
    let all = integrate_box(
        &|xp| Ok(section_terms(sd, xp, sigma, inner_tol)?.all),
        m,
        sd.extent,
        sing,
        quad_tol,
        &mut prefix,
    )
    .ok();
    let d = sd.dim;
    let lt_term = lcl_value(sigma, d) * eff;
    let remainder_term = lcl_value(sigma, d - 1) * rem;
    let mut r = BoundReport::new(BoundKind::LiebThirringRemainder, lt_term - remainder_term)
        .param("sigma", sigma)
        .param("dim", d as f64)
        .param("extent", sd.extent)
        .param("lt_term", lt_term)
        .param("remainder_term", remainder_term)
        .require(sigma >= 1.5, "sigma < 3/2");
    if let Some(all) = all {
        r = r.param("plain_lt", lcl_value(sigma, d) * all);
    }
    if let Provenance::Raster { h } = sd.provenance {
        r = r.param("raster_h", h);
    }
    if !sd.extent_exact {
        r = r.note("x' truncated to the declared box; sections outside are not checked");
    }
    Ok(r)
}

/// Fraction of sample points x′ on a uniform grid of the box whose section
/// has at least one interval in κ.
pub fn effective_fraction(sd: &SectionedDomainPotential, samples_per_axis: usize) -> Result<f64> {
    if sd.dim != 2 {
        return Err(Error::Argument(
            "effective_fraction is implemented for d = 2".into(),
        ));
    }
    let n = samples_per_axis.max(2);
    let mut hits = 0;
    for i in 0..n {
        let x = -sd.extent + (i as f64 + 0.5) * 2.0 * sd.extent / n as f64;
        let any = sd
            .sections(&[x])?
            .iter()
            .map(|p| stats_of(p, 1e-8).map(|s| s.kappa_member))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .any(|b| b);
        if any {
            hits += 1;
        }
    }
    Ok(hits as f64 / n as f64)
}

/// x_α(λ) = (2λ/((1−α) ln 3))^{1/(2−2α)}: beyond it A_1(x) ≤ 2 ln 3.
pub fn example43_cutoff(alpha: f64, lambda: f64) -> f64 {
    (2.0 * lambda / ((1.0 - alpha) * 3f64.ln())).powf(1.0 / (2.0 - 2.0 * alpha))
}

/// Closed-form bound for −Δ − λ|x|^α|y|^{−α} on Ω_1 = {|xy| < 1}:
/// L(σ,2)·4/(2α(σ+1)(1−α(σ+1)))·(2/((1−α) ln 3))^{α(σ+1)/(1−α)}·λ^{(σ+1)/(1−α)}.
pub fn example43_bound(alpha: f64, sigma: f64, lambda: f64) -> Result<BoundReport> {
    if !(alpha > 0.0 && alpha < 1.0) || !(sigma >= 0.0) || !(lambda > 0.0) {
        return Err(domain(
            "example43_bound",
            format!(
                "requires 0 < alpha < 1, sigma >= 0, lambda > 0; got ({alpha}, {sigma}, {lambda})"
            ),
        ));
    }
    let a = alpha * (sigma + 1.0);
    if !(a < 1.0) {
        return Err(domain(
            "example43_bound",
            format!(
                "alpha (sigma + 1) = {a} >= 1: the integral over the effective domain diverges"
            ),
        ));
    }
    let coefficient = lcl_value(sigma, 2) * 4.0 / (2.0 * a * (1.0 - a))
        * (2.0 / ((1.0 - alpha) * 3f64.ln())).powf(a / (1.0 - alpha));
    let exponent = (sigma + 1.0) / (1.0 - alpha);
    Ok(BoundReport::new(
        BoundKind::HornPotentialExample,
        coefficient * lambda.powf(exponent),
    )
    .param("alpha", alpha)
    .param("sigma", sigma)
    .param("lambda", lambda)
    .param("coefficient", coefficient)
    .param("exponent", exponent)
    .param("x_alpha", example43_cutoff(alpha, lambda))
    .require(alpha < 0.4, "alpha >= 2/5")
    .require(sigma >= 1.5, "sigma < 3/2")
    .require(sigma < (1.0 - alpha) / alpha, "sigma >= (1 - alpha)/alpha"))
}

/// 4L(σ,2)λ^{σ+1}∫_0^{x_α}∫_0^{1/x} x^{α(σ+1)} y^{−α(σ+1)} dy dx by nested
/// quadrature with graded maps at the singular edges; `rel_tol` applies to
/// both levels.
pub fn example43_quadrature(alpha: f64, sigma: f64, lambda: f64, rel_tol: f64) -> Result<f64> {
    let a = alpha * (sigma + 1.0);
    if !(alpha > 0.0 && alpha < 1.0) || !(sigma >= 0.0) || !(lambda > 0.0) || !(a < 1.0) {
        return Err(domain(
            "example43_quadrature",
            format!("requires 0 < alpha, alpha (sigma + 1) < 1, lambda > 0; got ({alpha}, {sigma}, {lambda})"),
        ));
    }
    let xa = example43_cutoff(alpha, lambda);
    let opts = QuadOptions::rel(rel_tol);
    let err = RefCell::new(None);
    let inner = |x: f64| {
        integrate_endpoint_singular(|y: f64| x.powf(a) * y.powf(-a), 0.0, 1.0 / x, 12, opts)
            .map(|q| q.value)
            .unwrap_or_else(|e| {
                err.borrow_mut().get_or_insert(e);
                0.0
            })
    };
    let outer = integrate_endpoint_singular(inner, 0.0, xa, 12, opts)?.value;
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    Ok(4.0 * lcl_value(sigma, 2) * outer * lambda.powf(sigma + 1.0))
}

/// Ω_1 with λ|x|^α|y|^{−α}, sections (−1/|x|, 1/|x|), x ∈ [−R, R].
pub fn example43_domain(alpha: f64, lambda: f64, extent: f64) -> Result<SectionedDomainPotential> {
    let sd = SectionedDomainPotential::analytic(2, extent, move |xp: &[f64]| {
        let x = xp[0].abs();
        if x == 0.0 {
            return Vec::new();
        }
        let w = 1.0 / x;
        let scale = lambda * x.powf(alpha);
        vec![SectionPiece {
            start: -w,
            end: w,
            trace: PotentialTrace::singular_function(
                move |y: f64| scale * y.abs().powf(-alpha),
                vec![0.0],
            ),
        }]
    })?
    // the κ restriction switches off at ±x_α
    .with_outer_singular_points(vec![
        -example43_cutoff(alpha, lambda),
        0.0,
        example43_cutoff(alpha, lambda),
    ]);
    Ok(if extent >= example43_cutoff(alpha, lambda) {
        sd.with_exact_extent()
    } else {
        sd
    })
}

/// Maximal runs of sample points t_i = t_min + i·h with `inside(t_i)` become
/// intervals (t_first − h/2, t_last + h/2), clipped to the range; the trace
/// is sampled on the run.
pub fn raster_sectioner(
    inside: impl Fn(f64) -> bool,
    potential: impl Fn(f64) -> f64,
    t_range: (f64, f64),
    h: f64,
) -> Vec<SectionPiece> {
    let (lo, hi) = t_range;
    if !(hi > lo) || !(h > 0.0) {
        return Vec::new();
    }
    let n = ((hi - lo) / h).floor() as usize + 1;
    let mut out = Vec::new();
    let mut run: Option<(usize, Vec<f64>)> = None;
    let close = |first: usize, values: Vec<f64>, out: &mut Vec<SectionPiece>| {
        let t0 = lo + first as f64 * h;
        let last = t0 + (values.len() - 1) as f64 * h;
        out.push(SectionPiece {
            start: (t0 - 0.5 * h).max(lo),
            end: (last + 0.5 * h).min(hi),
            trace: PotentialTrace::Sampled { t0, h, values },
        });
    };
    for i in 0..n {
        let t = lo + i as f64 * h;
        if inside(t) {
            match &mut run {
                Some((_, v)) => v.push(potential(t)),
                None => run = Some((i, vec![potential(t)])),
            }
        } else if let Some((first, v)) = run.take() {
            close(first, v, &mut out);
        }
    }
    if let Some((first, v)) = run.take() {
        close(first, v, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::horn::{horn1_rotated_section, horn_contains, HornRegion};
    use crate::schrodinger1d::{thm41_bound, PotentialProfile1D, PotentialShape};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn constant_strip(c: f64, width: f64, extent: f64) -> SectionedDomainPotential {
        SectionedDomainPotential::analytic(2, extent, move |_: &[f64]| {
            vec![SectionPiece {
                start: 0.0,
                end: width,
                trace: PotentialTrace::function(move |_| c),
            }]
        })
        .unwrap()
    }

    #[test]
    fn stats_of_simple_sections() {
        let sd = constant_strip(3.0, 2.0, 1.0);
        let s = section_stats(&sd, &[0.2], 1).unwrap();
        assert!(rel(s.a, 12.0) < 1e-12 && rel(s.b, 6.0) < 1e-12);
        assert!(s.kappa_member);
        let zero = constant_strip(0.0, 2.0, 1.0);
        let s = section_stats(&zero, &[0.0], 1).unwrap();
        assert_eq!((s.a, s.b, s.kappa_member), (0.0, 0.0, false));
        assert!(section_stats(&sd, &[0.0], 2).is_err());
        assert!(section_stats(&sd, &[0.0, 1.0], 1).is_err());
    }

    #[test]
    fn kappa_threshold_is_exact() {
        // c·l² = 2 ln 3 exactly is outside κ
        let l = 1.0;
        let sd = constant_strip(TWO_LN_3, l, 1.0);
        assert!(!section_stats(&sd, &[0.0], 1).unwrap().kappa_member);
        let sd = constant_strip(TWO_LN_3 * (1.0 + 1e-12), l, 1.0);
        assert!(section_stats(&sd, &[0.0], 1).unwrap().kappa_member);
    }

    #[test]
    fn example43_section_integral() {
        // A_1(x) = 4λ/(1−α)·|x|^{2(α−1)}
        let (alpha, lambda) = (0.25, 3.0);
        let sd = example43_domain(alpha, lambda, 10.0).unwrap();
        for &x in &[0.3, 1.0, 2.5, -4.0] {
            let s = section_stats(&sd, &[x], 1).unwrap();
            let exact = 4.0 * lambda / (1.0 - alpha) * f64::abs(x).powf(2.0 * (alpha - 1.0));
            assert!(rel(s.a, exact) < 1e-8, "{x}: {} vs {exact}", s.a);
        }
        let xa = example43_cutoff(alpha, lambda);
        assert!(section_stats(&sd, &[xa * 1.001], 1).unwrap().a <= TWO_LN_3);
        assert!(section_stats(&sd, &[xa * 0.999], 1).unwrap().kappa_member);
    }

    #[test]
    fn cutoff_example() {
        let expected = (2.0 / (0.75 * 3f64.ln())).powf(2.0 / 3.0);
        assert!(rel(example43_cutoff(0.25, 1.0), expected) < 1e-15);
    }

    #[test]
    fn example43_closed_form_matches_quadrature() {
        for &(alpha, sigma, lambda) in &[
            (0.25, 1.5, 1.0),
            (0.1, 2.0, 5.0),
            (0.3, 1.5, 0.2),
            (0.2, 3.0, 2.0),
        ] {
            let closed = example43_bound(alpha, sigma, lambda).unwrap();
            assert!(closed.hypotheses_ok);
            let q = example43_quadrature(alpha, sigma, lambda, 1e-11).unwrap();
            assert!(
                rel(closed.value, q) < 1e-6,
                "{alpha} {sigma} {lambda}: {} vs {q}",
                closed.value
            );
        }
    }

    #[test]
    fn example43_scaling_exponent() {
        let (alpha, sigma) = (0.25, 2.0);
        let a = example43_bound(alpha, sigma, 1.0).unwrap().value;
        let b = example43_bound(alpha, sigma, 10.0).unwrap().value;
        assert!(rel((b / a).log10(), (sigma + 1.0) / (1.0 - alpha)) < 1e-12);
        assert!(!example43_bound(0.42, 1.2, 1.0).unwrap().hypotheses_ok);
        assert!(example43_bound(0.3, 3.0, 1.0).is_err());
    }

    #[test]
    fn sectioned_bound_on_example_stays_below_closed_form() {
        // the closed form drops the remainder, so the sectioned bound is smaller
        let (alpha, sigma, lambda) = (0.25, 1.5, 2.0);
        let xa = example43_cutoff(alpha, lambda);
        let sd = example43_domain(alpha, lambda, 1.5 * xa).unwrap();
        let r = thm45_bound(&sd, sigma, 1e-7).unwrap();
        let closed = example43_bound(alpha, sigma, lambda).unwrap().value;
        let lt = r.get("lt_term").unwrap();
        assert!(rel(lt, closed) < 1e-5, "{lt} vs {closed}");
        assert!(r.value < closed);
        assert!(r.get("remainder_term").unwrap() > 0.0);
        assert!(r.notes.is_empty());
    }

    #[test]
    fn unrestricted_integral_diverges_for_example43() {
        // ∫_{|x|<R} over Ω_1 of V^{σ+1} grows like R^{2α(σ+1)}; restricting
        // to κ keeps it bounded
        let (alpha, sigma, lambda) = (0.25, 1.5, 1.0);
        let plain = |r: f64| {
            let sd = example43_domain(alpha, lambda, r).unwrap();
            thm45_bound(&sd, sigma, 1e-7).unwrap()
        };
        let (a, b) = (plain(10.0), plain(100.0));
        let growth = b.get("plain_lt").unwrap() / a.get("plain_lt").unwrap();
        let expected = 10f64.powf(2.0 * alpha * (sigma + 1.0));
        assert!(rel(growth, expected) < 1e-4, "{growth} vs {expected}");
        assert!(rel(a.get("lt_term").unwrap(), b.get("lt_term").unwrap()) < 1e-6);
    }

    #[test]
    fn zero_potential_gives_zero() {
        let sd = constant_strip(0.0, 3.0, 2.0);
        let r = thm45_bound(&sd, 1.5, 1e-8).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(effective_fraction(&sd, 10).unwrap(), 0.0);
    }

    #[test]
    fn separable_strip_reduces_to_one_dimension() {
        // V(x, t) = W(t) on (−R, R) × (0, l): the bound is 2R times the
        // one-dimensional bound of order σ + 1/2 with L(σ,2) = L(σ,1)L(σ+1/2,1)
        let (l, depth, big_r, sigma) = (1.0, 30.0, 1.5, 1.5);
        let sd = SectionedDomainPotential::analytic(2, big_r, move |_: &[f64]| {
            vec![SectionPiece {
                start: 0.0,
                end: l,
                trace: PotentialTrace::function(
                    move |t| if t > 0.2 && t < 0.7 { depth } else { 0.0 },
                ),
            }]
        })
        .unwrap();
        let r = thm45_bound(&sd, sigma, 1e-9).unwrap();
        let pot = PotentialProfile1D::new(
            l,
            PotentialShape::SquareWell {
                depth,
                start: 0.2,
                end: 0.7,
            },
        )
        .unwrap();
        let one = thm41_bound(&pot, sigma + 0.5).unwrap();
        let expected = 2.0 * big_r * lcl_value(sigma, 1) * one.value;
        assert!(rel(r.value, expected) < 1e-6, "{} vs {expected}", r.value);
    }

    #[test]
    fn three_dimensional_box() {
        // constant c on a slab: effective integral = (2R)² · l · c^{σ+3/2}
        let (c, l, big_r, sigma) = (10.0, 1.0, 0.5, 1.5);
        let sd = SectionedDomainPotential::analytic(3, big_r, move |_: &[f64]| {
            vec![SectionPiece {
                start: 0.0,
                end: l,
                trace: PotentialTrace::function(move |_| c),
            }]
        })
        .unwrap();
        let r = thm45_bound(&sd, sigma, 1e-9).unwrap();
        let lt = lcl_value(sigma, 3) * 4.0 * big_r * big_r * l * c.powf(sigma + 1.5);
        assert!(rel(r.get("lt_term").unwrap(), lt) < 1e-9);
        let rho = (2.0 * c * c / (c).exp_m1()).powf(sigma + 1.0);
        let rem = lcl_value(sigma, 2) * 4.0 * big_r * big_r * rho;
        assert!(rel(r.get("remainder_term").unwrap(), rem) < 1e-9);
    }

    #[test]
    fn raster_recovers_horn_sections() {
        let h = HornRegion::new(2, 2.0).unwrap();
        let step = 1e-3;
        let pieces = raster_sectioner(
            |t| horn_contains(&h, &[1.0, t]).unwrap(),
            |_| 1.0,
            (-3.0, 3.0),
            step,
        );
        assert_eq!(pieces.len(), 1);
        assert!((pieces[0].start + 1.0).abs() <= step && (pieces[0].end - 1.0).abs() <= step);
        // rotated critical horn |x² − y²| < 2 at x = 2: two intervals of length 4/(√6 + √2)
        let x: f64 = 2.0;
        let pieces = raster_sectioner(|t| (x * x - t * t).abs() < 2.0, |_| 1.0, (-4.0, 4.0), step);
        assert_eq!(pieces.len(), 2);
        let exact = horn1_rotated_section(x);
        for (p, &len) in pieces.iter().zip(exact.lengths()) {
            assert!((p.length() - len).abs() <= step, "{} vs {len}", p.length());
        }
        assert!(raster_sectioner(|_| false, |_| 1.0, (-1.0, 1.0), 0.1).is_empty());
    }

    #[test]
    fn raster_domain_matches_analytic() {
        let (alpha, lambda) = (0.25, 2.0);
        let xa = example43_cutoff(alpha, lambda);
        let analytic = example43_domain(alpha, lambda, 1.2 * xa).unwrap();
        let raster = SectionedDomainPotential::raster(
            2,
            1.2 * xa,
            |xp, t| (xp[0] * t).abs() < 1.0,
            move |xp, t| lambda * xp[0].abs().powf(alpha) * t.abs().powf(-alpha),
            // offset so no sample lands on the cusp at t = 0
            (-40.001, 40.0),
            2e-3,
        )
        .unwrap();
        for &x in &[0.5, 1.0, 2.0] {
            let a = section_stats(&analytic, &[x], 1).unwrap();
            let b = section_stats(&raster, &[x], 1).unwrap();
            // the raster misses the integrable cusp at t = 0 and O(h) at the ends
            assert!(rel(b.a, a.a) < 0.05, "{x}: {} vs {}", b.a, a.a);
        }
        assert_eq!(raster.provenance(), Provenance::Raster { h: 2e-3 });
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn a_is_scale_invariant(s in 0.2f64..5.0, c in 0.1f64..20.0, l in 0.1f64..3.0) {
            // V → s²V(s·) on intervals scaled by 1/s
            let base = constant_strip(c, l, 1.0);
            let scaled = SectionedDomainPotential::analytic(2, 1.0, move |_: &[f64]| {
                vec![SectionPiece {
                    start: 0.0,
                    end: l / s,
                    trace: PotentialTrace::function(move |t| s * s * if s * t < l { c } else { 0.0 }),
                }]
            })
            .unwrap();
            let a = section_stats(&base, &[0.0], 1).unwrap();
            let b = section_stats(&scaled, &[0.0], 1).unwrap();
            prop_assert!(((a.a - b.a) / a.a).abs() < 1e-10);
            prop_assert_eq!(a.kappa_member, b.kappa_member);
        }

        #[test]
        fn remainder_never_exceeds_plain_bound(c in 0.5f64..50.0, l in 0.2f64..2.0, sigma in 1.5f64..3.0) {
            let sd = constant_strip(c, l, 1.0);
            let r = thm45_bound(&sd, sigma, 1e-9).unwrap();
            prop_assert!(r.value <= r.get("plain_lt").unwrap() * (1.0 + 1e-12));
            // the one-dimensional Riesz mean is non-negative, so the bound is too
            prop_assert!(r.value >= -1e-12 * r.get("plain_lt").unwrap().max(1.0) || c * l * l <= TWO_LN_3);
        }
    }

    #[test]
    fn pi_is_used_consistently() {
        // L(σ,2) = 1/(4π(σ+1)) enters the closed form
        let b = example43_bound(0.25, 1.5, 1.0).unwrap();
        let a: f64 = 0.25 * 2.5;
        let c = 1.0 / (4.0 * PI * 2.5) * 4.0 / (2.0 * a * (1.0 - a))
            * (2.0 / (0.75 * 3f64.ln())).powf(a / 0.75);
        assert!(rel(b.get("coefficient").unwrap(), c) < 1e-14);
    }
}
