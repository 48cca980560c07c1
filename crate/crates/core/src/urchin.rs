//! Spiny urchins Ω_S: the plane minus the radial slits
//! Γ_{n,k} = {r ≥ r_n, φ = (k−1)π/2^{n+1}}, k = 1..2^{n+2}.
//!
//! At radius r_{n−1} < r ≤ r_n the circle is cut into 2^{n+1} arcs of angle
//! π/2^n, which is what all bounds below are built from.

use std::f64::consts::{LN_2, PI};

use serde::Serialize;

use crate::error::{domain, numerical, Error, Result};
use crate::report::{BoundKind, BoundReport};
use crate::riesz::{
    aizenman_lieb_lift, counting_from_riesz, default_tau_grid, interval_trace_unchecked,
    square_riesz_mean,
};
use crate::specfun::beta_pos;

/// Number of indices checked when validating a generated sequence.
pub const VALIDATION_HORIZON: usize = 10_000;

/// Hard cap on scans for n̂ and K(Λ).
const SCAN_LIMIT: usize = 100_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UrchinKind {
    /// r_n = n
    Linear,
    /// r_n = 2^{δn}, 0 < δ < 1
    Geometric { delta: f64 },
    /// r_n = 2^n/√n
    ExpOverSqrt,
    /// r_1, r_2, ... given explicitly.
    Explicit(Vec<f64>),
}

/// Outcome of checking the growth conditions on a finite horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceValidation {
    pub horizon: usize,
    pub increasing: bool,
    /// r_{n+1} ≤ 2 r_n on the horizon.
    pub doubling: bool,
    /// r_n 2^{−n} → 0, judged by the decay test: either r_n 2^{−n} falls
    /// below 1e-6·r_1 on the horizon, or it is strictly decreasing over the
    /// second half of the horizon and ends below r_1/2.
    pub decays: bool,
    pub problems: Vec<String>,
}

impl SequenceValidation {
    pub fn is_valid(&self) -> bool {
        self.increasing && self.doubling && self.decays
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UrchinSequence {
    kind: UrchinKind,
    validation: SequenceValidation,
}

impl UrchinSequence {
    pub fn new(kind: UrchinKind) -> Result<Self> {
        match &kind {
            UrchinKind::Geometric { delta } if !(*delta > 0.0 && *delta < 1.0) => {
                return Err(domain(
                    "UrchinSequence",
                    format!("delta must lie in (0, 1), got {delta}"),
                ));
            }
            UrchinKind::Explicit(v) if v.is_empty() => {
                return Err(Error::Argument("explicit radius list is empty".into()));
            }
            UrchinKind::Explicit(v) => {
                if let Some(r) = v.iter().find(|r| !(**r > 0.0) || !r.is_finite()) {
                    return Err(domain(
                        "UrchinSequence",
                        format!("radii must be positive and finite, got {r}"),
                    ));
                }
            }
            _ => {}
        }
        let validation = validate(&kind);
        Ok(Self { kind, validation })
    }

    pub fn linear() -> Self {
        Self::new(UrchinKind::Linear).expect("linear sequence is well formed")
    }

    pub fn geometric(delta: f64) -> Result<Self> {
        Self::new(UrchinKind::Geometric { delta })
    }

    pub fn exp_over_sqrt() -> Self {
        Self::new(UrchinKind::ExpOverSqrt).expect("exp/sqrt sequence is well formed")
    }

    pub fn explicit(radii: Vec<f64>) -> Result<Self> {
        Self::new(UrchinKind::Explicit(radii))
    }

    pub fn kind(&self) -> &UrchinKind {
        &self.kind
    }

    pub fn validation(&self) -> &SequenceValidation {
        &self.validation
    }

    /// Largest available index, `None` for generated sequences.
    pub fn max_index(&self) -> Option<usize> {
        match &self.kind {
            UrchinKind::Explicit(v) => Some(v.len()),
            _ => None,
        }
    }

    /// ln r_n for n ≥ 1; `None` past the end of an explicit list.
    pub fn ln_radius(&self, n: usize) -> Option<f64> {
        if n == 0 {
            return Some(f64::NEG_INFINITY);
        }
        let nf = n as f64;
        match &self.kind {
            UrchinKind::Linear => Some(nf.ln()),
            UrchinKind::Geometric { delta } => Some(delta * nf * LN_2),
            UrchinKind::ExpOverSqrt => Some(nf * LN_2 - 0.5 * nf.ln()),
            UrchinKind::Explicit(v) => v.get(n - 1).map(|r| r.ln()),
        }
    }

    /// r_n, with r_0 = 0. May overflow to infinity for fast-growing kinds.
    pub fn radius(&self, n: usize) -> Option<f64> {
        if n == 0 {
            return Some(0.0);
        }
        match &self.kind {
            UrchinKind::Linear => Some(n as f64),
            UrchinKind::Explicit(v) => v.get(n - 1).copied(),
            _ => self.ln_radius(n).map(f64::exp),
        }
    }

    fn ln_radius_or_err(&self, n: usize) -> Result<f64> {
        self.ln_radius(n).ok_or_else(|| {
            Error::Argument(format!(
                "explicit radius list has {} entries; index {n} is needed",
                self.max_index().unwrap_or(0)
            ))
        })
    }

    fn r1(&self) -> f64 {
        self.radius(1).expect("r_1 always exists")
    }

    /// 15/(4 r_1²): at or below this Λ the spectrum below Λ is empty.
    pub fn threshold(&self) -> f64 {
        15.0 / (4.0 * self.r1().powi(2))
    }

    /// ln a_n with a_n = (2^{2n} − 1/4)/r_n².
    fn ln_index_level(&self, n: usize) -> Result<f64> {
        let nf = n as f64;
        let ln_num = 2.0 * nf * LN_2 + (-0.25 * (-2.0 * nf * LN_2).exp()).ln_1p();
        Ok(ln_num - 2.0 * self.ln_radius_or_err(n)?)
    }

    fn hypotheses(&self, report: BoundReport) -> BoundReport {
        let v = &self.validation;
        report
            .require(v.increasing, "radius sequence is not strictly increasing")
            .require(v.doubling, "condition r_{n+1} <= 2 r_n fails")
            .require(v.decays, "r_n 2^{-n} does not pass the decay test")
    }
}

fn validate(kind: &UrchinKind) -> SequenceValidation {
    let probe = UrchinSequence {
        kind: kind.clone(),
        validation: SequenceValidation {
            horizon: 0,
            increasing: true,
            doubling: true,
            decays: true,
            problems: Vec::new(),
        },
    };
    let horizon = probe.max_index().unwrap_or(VALIDATION_HORIZON);
    let mut problems = Vec::new();
    let lr: Vec<f64> = (1..=horizon).map(|n| probe.ln_radius(n).unwrap()).collect();
    let mut increasing = true;
    let mut doubling = true;
    for n in 1..horizon {
        let (a, b) = (lr[n - 1], lr[n]);
        if increasing && !(b > a) {
            increasing = false;
            problems.push(format!("r_{} >= r_{}", n, n + 1));
        }
        // small slack for the rounding of ln
        if doubling && b - a > LN_2 * (1.0 + 1e-12) {
            doubling = false;
            problems.push(format!("r_{} > 2 r_{}", n + 1, n));
        }
    }
    // s_n = ln(r_n 2^{-n})
    let s: Vec<f64> = lr
        .iter()
        .enumerate()
        .map(|(i, l)| l - (i + 1) as f64 * LN_2)
        .collect();
    let floor = lr[0] + 1e-6f64.ln();
    let reaches_floor = s.iter().any(|&v| v < floor);
    let tail = &s[horizon / 2..];
    let monotone_tail =
        tail.len() >= 2 && tail.windows(2).all(|w| w[1] < w[0]) && *s.last().unwrap() < s[0];
    let decays = reaches_floor || monotone_tail;
    if !decays {
        problems.push(format!(
            "r_n 2^-n fails the decay test on the first {horizon} indices"
        ));
    }
    SequenceValidation {
        horizon,
        increasing,
        doubling,
        decays,
        problems,
    }
}

/// The index n̂(Λ) = max{n : Λ > (2^{2n} − 1/4)/r_n² for all smaller n}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UrchinIndex {
    pub lambda: f64,
    pub n_hat: usize,
    pub r_hat: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum IndexOutcome {
    /// Λ ≤ 15/(4 r_1²): no spectrum below Λ.
    BelowThreshold {
        threshold: f64,
    },
    Found(UrchinIndex),
}

impl IndexOutcome {
    pub fn index(&self) -> Option<UrchinIndex> {
        match self {
            IndexOutcome::Found(i) => Some(*i),
            IndexOutcome::BelowThreshold { .. } => None,
        }
    }
}

pub fn urchin_index(seq: &UrchinSequence, lambda: f64) -> Result<IndexOutcome> {
    if !(lambda.is_finite()) {
        return Err(domain(
            "urchin_index",
            format!("lambda must be finite, got {lambda}"),
        ));
    }
    if !(lambda > seq.threshold()) {
        return Ok(IndexOutcome::BelowThreshold {
            threshold: seq.threshold(),
        });
    }
    let ln_lambda = lambda.ln();
    let mut n = 1;
    while seq.ln_index_level(n + 1)? < ln_lambda {
        n += 1;
        if n >= SCAN_LIMIT {
            return Err(numerical("urchin_index", "index scan exceeded its limit"));
        }
    }
    Ok(IndexOutcome::Found(UrchinIndex {
        lambda,
        n_hat: n,
        r_hat: seq.radius(n).unwrap(),
    }))
}

/// Smallest n with r ≤ r_n.
fn section_level(seq: &UrchinSequence, r: f64) -> Result<usize> {
    let lr = r.ln();
    let mut n = 1;
    while seq.ln_radius_or_err(n)? < lr {
        n += 1;
        if n >= SCAN_LIMIT {
            return Err(numerical(
                "urchin_section_trace",
                "radius scan exceeded its limit",
            ));
        }
    }
    Ok(n)
}

/// 2^{n₀+1} Σ_j (Λ + 1/(4r²) − 2^{2n₀} j²/r²)_+^γ with r_{n₀−1} < r ≤ r_{n₀}:
/// the trace of W(r, Λ)^γ for the angular operator in the ground-state
/// representation at radius r.
pub fn urchin_section_trace(seq: &UrchinSequence, r: f64, lambda: f64, gamma: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(domain(
            "urchin_section_trace",
            format!("r must be positive, got {r}"),
        ));
    }
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(domain(
            "urchin_section_trace",
            format!("gamma must be >= 0, got {gamma}"),
        ));
    }
    let n0 = section_level(seq, r)?;
    let energy = lambda + 0.25 / (r * r);
    // π²j²/len² = 4^{n₀} j²/r²
    let len = PI * r * f64::exp2(-(n0 as f64));
    let mult = f64::exp2((n0 + 1) as f64);
    Ok(mult * interval_trace_unchecked(energy, len, gamma))
}

/// r (Λ + 1/(4r²))^{γ+1/2} B(1/2, γ+1), which dominates
/// [`urchin_section_trace`] for every γ > 0.
pub fn section_trace_majorant(r: f64, lambda: f64, gamma: f64) -> f64 {
    r * (lambda + 0.25 / (r * r)).powf(gamma + 0.5) * beta_pos(0.5, gamma + 1.0)
}

fn check_sigma(op: &'static str, sigma: f64) -> Result<()> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(domain(op, format!("sigma must be >= 0, got {sigma}")));
    }
    Ok(())
}

/// r̂²Λ^{σ+1}/(4(σ+1)) + 16^{σ−1}/15^σ · Λ^σ ln(4Λr̂²), or 0 at and below
/// the threshold 15/(4 r_1²).
pub fn urchin_upper_lemma36(seq: &UrchinSequence, sigma: f64, lambda: f64) -> Result<BoundReport> {
    check_sigma("urchin_upper_lemma36", sigma)?;
    let outcome = urchin_index(seq, lambda)?;
    let report = match outcome {
        IndexOutcome::BelowThreshold { threshold } => BoundReport::new(BoundKind::UrchinUpper, 0.0)
            .param("threshold", threshold)
            .note("lambda at or below threshold: no spectrum below lambda"),
        IndexOutcome::Found(idx) => {
            let r2 = idx.r_hat * idx.r_hat;
            let lead = r2 * lambda.powf(sigma + 1.0) / (4.0 * (sigma + 1.0));
            let log_term = 16f64.powf(sigma - 1.0) / 15f64.powf(sigma)
                * lambda.powf(sigma)
                * (4.0 * lambda * r2).ln();
            BoundReport::new(BoundKind::UrchinUpper, lead + log_term)
                .param("n_hat", idx.n_hat as f64)
                .param("r_hat", idx.r_hat)
                .param("leading_term", lead)
                .param("threshold", seq.threshold())
        }
    };
    Ok(seq
        .hypotheses(report.param("sigma", sigma).param("lambda", lambda))
        .require(sigma >= 1.5, "sigma < 3/2"))
}

/// Number of squares of side `l` placed in the segment between radii
/// `inner` and `outer` with half-angle `half_angle`: a single row along the
/// bisector at inner edges ρ_i = inner + i·l, keeping those whose near
/// corners lie inside the wedge and whose far corners lie inside the outer
/// circle.
pub fn packing_count(inner: f64, outer: f64, half_angle: f64, l: f64) -> u64 {
    let tan = half_angle.tan();
    let fits = |i: u64| {
        let rho = inner + i as f64 * l;
        0.5 * l <= rho * tan && ((rho + l).powi(2) + 0.25 * l * l).sqrt() <= outer
    };
    let reach = (outer * outer - 0.25 * l * l).max(0.0).sqrt() - l;
    if reach < inner {
        return 0;
    }
    // both predicates are monotone in i: the wedge one becomes true, the
    // circle one becomes false
    let mut lo = ((0.5 * l / tan - inner) / l).ceil().max(0.0) as u64;
    while lo > 0 && fits(lo - 1) {
        lo -= 1;
    }
    while !fits(lo) {
        if inner + lo as f64 * l > reach {
            return 0;
        }
        lo += 1;
    }
    let mut hi = ((reach - inner) / l).floor().max(lo as f64) as u64;
    while hi > lo && !fits(hi) {
        hi -= 1;
    }
    while fits(hi + 1) {
        hi += 1;
    }
    hi - lo + 1
}

/// First N₀ such that r_{n−1} < (1 − 2^{−n}) r_n for every n ≥ N₀ on the
/// validation horizon.
pub fn packing_start(seq: &UrchinSequence) -> Result<usize> {
    let horizon = seq.validation.horizon;
    let mut start = 1;
    for n in 2..=horizon {
        let ok = seq.ln_radius_or_err(n - 1)?
            < seq.ln_radius_or_err(n)? + (-(-(n as f64) * LN_2).exp()).ln_1p();
        if !ok {
            start = n + 1;
        }
    }
    if start > horizon {
        return Err(numerical(
            "packing_start",
            "no admissible start index on the horizon",
        ));
    }
    Ok(start)
}

/// Constructive lower bound Σ_{n=N₀}^{n*} 2^{n+1} τ(n) R_σ(Λ; Q_{l_n}),
/// l_n = r_n/2^{n+1}, where `square_oracle(l, Λ, σ)` returns the Riesz mean
/// of the Dirichlet square of side l. The squares are disjoint subsets of
/// Ω_S, so the bound follows from Dirichlet monotonicity.
pub fn urchin_lower_lemma37<F: Fn(f64, f64, f64) -> f64>(
    seq: &UrchinSequence,
    sigma: f64,
    lambda: f64,
    square_oracle: F,
) -> Result<BoundReport> {
    check_sigma("urchin_lower_lemma37", sigma)?;
    let n0 = packing_start(seq)?;
    let mut total = 0.0;
    let mut squares = 0.0;
    let mut n_star = 0usize;
    let mut n = n0;
    loop {
        let ln_l = seq.ln_radius_or_err(n)? - (n + 1) as f64 * LN_2;
        let l = ln_l.exp();
        if !(2.0 * PI * PI / (l * l) < lambda) {
            break;
        }
        let inner = seq.radius(n - 1).unwrap();
        let outer = seq.radius(n).unwrap();
        let half_angle = PI * f64::exp2(-((n + 1) as f64));
        let tau = packing_count(inner, outer, half_angle, l);
        let segments = f64::exp2((n + 1) as f64);
        if tau > 0 {
            total += segments * tau as f64 * square_oracle(l, lambda, sigma);
            squares += segments * tau as f64;
        }
        n_star = n;
        n += 1;
        if n >= SCAN_LIMIT {
            return Err(numerical(
                "urchin_lower_lemma37",
                "level scan exceeded its limit",
            ));
        }
    }
    let mut report = BoundReport::new(BoundKind::UrchinLower, total)
        .param("sigma", sigma)
        .param("lambda", lambda)
        .param("n_start", n0 as f64)
        .param("squares", squares);
    if n_star > 0 {
        report = report.param("n_star", n_star as f64);
    } else {
        report = report.note("no square level supports an eigenvalue below lambda");
    }
    Ok(seq.hypotheses(report))
}

/// [`urchin_lower_lemma37`] with the exact square spectrum.
pub fn urchin_lower_lemma37_exact(
    seq: &UrchinSequence,
    sigma: f64,
    lambda: f64,
) -> Result<BoundReport> {
    urchin_lower_lemma37(seq, sigma, lambda, |l, lam, s| {
        square_riesz_mean(l, lam, s).expect("validated side and order")
    })
}

/// 50(1/8 + 8π)².
pub fn vdb_prefactor() -> f64 {
    50.0 * (0.125 + 8.0 * PI).powi(2)
}

/// K(Λ) = max{n : r_n 2^{−n} > 32/√Λ}; `None` when the set is empty.
pub fn vdb_index(seq: &UrchinSequence, lambda: f64) -> Result<Option<usize>> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(domain(
            "vdb_index",
            format!("lambda must be positive, got {lambda}"),
        ));
    }
    let thr = 32f64.ln() - 0.5 * lambda.ln();
    let s = |n: usize| -> Result<f64> { Ok(seq.ln_radius_or_err(n)? - n as f64 * LN_2) };
    let mut best = None;
    let mut prev = f64::INFINITY;
    let last = seq.max_index().unwrap_or(SCAN_LIMIT);
    for n in 1..=last {
        let v = s(n)?;
        if v > thr {
            best = Some(n);
        } else if seq.max_index().is_none() && v < prev {
            // generated kinds have r_n 2^{-n} eventually decreasing, and it
            // already is once it drops under the threshold here
            break;
        }
        prev = v;
    }
    Ok(best)
}

/// R_0(Λ) ≤ 50(1/8 + 8π)² Λ r_{K(Λ)}².
pub fn urchin_vdb_counting(seq: &UrchinSequence, lambda: f64) -> Result<BoundReport> {
    let k = vdb_index(seq, lambda)?;
    let pref = vdb_prefactor();
    let base = seq.r1();
    let mut report = match k {
        None => BoundReport::new(BoundKind::UrchinVdbCounting, 0.0)
            .violation("K(lambda) undefined: r_n 2^-n never exceeds 32/sqrt(lambda)"),
        Some(k) => {
            let rk = seq.radius(k).unwrap();
            BoundReport::new(BoundKind::UrchinVdbCounting, pref * lambda * rk * rk)
                .param("k", k as f64)
                .param("r_k", rk)
        }
    };
    report = report
        .param("lambda", lambda)
        .param("prefactor", pref)
        .param("base_radius", base)
        .note("r_0 = 0, so r_1 is used as the base radius")
        .require(
            lambda > 16384.0 / (base * base),
            "lambda <= 2^14 / base_radius^2",
        );
    Ok(seq.hypotheses(report))
}

/// Order-of-growth bound for the standard kinds. For σ ≥ 3/2 this is
/// [`urchin_upper_lemma36`]; below 3/2 the σ = 3/2 bound is converted to a
/// counting bound and lifted back to order σ.
pub fn urchin_corollary_order(
    seq: &UrchinSequence,
    sigma: f64,
    lambda: f64,
) -> Result<BoundReport> {
    check_sigma("urchin_corollary_order", sigma)?;
    let (label, order) = match seq.kind() {
        UrchinKind::Linear => ("linear", "lambda^(sigma+1) (ln lambda)^2"),
        UrchinKind::Geometric { .. } => ("geometric", "lambda^(sigma+1/(1-delta))"),
        UrchinKind::ExpOverSqrt => ("exp_over_sqrt", "2^(2 lambda) lambda^sigma"),
        UrchinKind::Explicit(_) => {
            return Err(Error::Argument(
                "closed-form orders need a linear, geometric or exp_over_sqrt sequence".into(),
            ));
        }
    };
    let threshold = seq.threshold();
    let value = if !(lambda > threshold) {
        0.0
    } else if sigma >= 1.5 {
        urchin_upper_lemma36(seq, sigma, lambda)?.value
    } else {
        let upper = |mu: f64| {
            urchin_upper_lemma36(seq, 1.5, mu)
                .map(|r| r.value)
                .unwrap_or(f64::INFINITY)
        };
        let grid = default_tau_grid();
        let counting = |mu: f64| {
            if mu > threshold {
                counting_from_riesz(upper, mu, 1.5, &grid)
                    .map(|c| c.value)
                    .unwrap_or(f64::INFINITY)
            } else {
                0.0
            }
        };
        let n_lambda = counting(lambda);
        if sigma == 0.0 {
            n_lambda
        } else {
            let tol = 1e-8 * n_lambda * lambda.powf(sigma);
            aizenman_lieb_lift(counting, lambda, sigma, 0.0, tol)?
        }
    };
    let mut report = BoundReport::new(BoundKind::UrchinOrder, value)
        .param("sigma", sigma)
        .param("lambda", lambda)
        .param("threshold", threshold)
        .note(format!("{label}: order {order}"));
    if let UrchinKind::Geometric { delta } = seq.kind() {
        report = report.param("delta", *delta);
    }
    if let Some(idx) = urchin_index(seq, lambda)?.index() {
        report = report
            .param("n_hat", idx.n_hat as f64)
            .param("r_hat", idx.r_hat);
    }
    if sigma < 1.5 {
        report =
            report.note("sigma < 3/2: counting conversion of the sigma = 3/2 bound, then lifted");
    }
    Ok(seq.hypotheses(report))
}
