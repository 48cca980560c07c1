//! One-dimensional Schrödinger operators −d²/dt² − V on I = (0, l) with
//! boundary conditions of the third kind, and on the whole line with V
//! extended by zero.
//!
//! Eigenvalues are found by shooting on the Prüfer angle θ, defined by
//! (u, u′) = ρ(sin θ, cos θ). The initial data (sin α, cos α) fix θ(0) = α,
//! and −ν is an eigenvalue of H^{(α,β)} exactly when θ(l; ν) + β = kπ. The
//! angle is strictly decreasing in ν, which makes every root bracketable.

use std::cell::RefCell;
use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Vector1, Vector6};
use ode_solvers::dop_shared::OutputType;
use ode_solvers::{Dopri5, System};
use roots::{find_root_brent, Convergency};
use serde::Serialize;

use crate::error::{domain, numerical, Error, Result};
use crate::quad::{integrate, integrate_with_breaks, QuadOptions};
use crate::report::{BoundKind, BoundReport};
use crate::specfun::lcl_value;

/// Smooth compactly supported bump a·exp(1 − 1/(1 − s²)), s = (t − center)/half_width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bump {
    pub amplitude: f64,
    pub center: f64,
    pub half_width: f64,
}

impl Bump {
    fn eval(&self, t: f64) -> f64 {
        let s = (t - self.center) / self.half_width;
        if s.abs() >= 1.0 {
            0.0
        } else {
            self.amplitude * (1.0 - 1.0 / (1.0 - s * s)).exp()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialShape {
    /// `depth` on (start, end), zero elsewhere.
    SquareWell { depth: f64, start: f64, end: f64 },
    /// Sum of C^∞ bumps.
    Bumps(Vec<Bump>),
    /// amplitude·exp(−(t − center)²/(2 width²)) restricted to (0, l).
    Gaussian {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// Values at equally spaced nodes 0 = t_0 < … < t_{n−1} = l, linearly
    /// interpolated.
    Sampled(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothness {
    Smooth,
    PiecewiseSmooth,
}

/// A potential V ≥ 0 supported in (0, l).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialProfile1D {
    length: f64,
    shape: PotentialShape,
    quad_tol: f64,
}

impl PotentialProfile1D {
    pub fn new(length: f64, shape: PotentialShape) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(domain(
                "PotentialProfile1D",
                format!("length must be positive, got {length}"),
            ));
        }
        let bad = |msg: String| Err(domain("PotentialProfile1D", msg));
        match &shape {
            PotentialShape::SquareWell { depth, start, end } => {
                if !(*depth >= 0.0) || !depth.is_finite() {
                    return bad(format!("depth must be >= 0, got {depth}"));
                }
                if !(0.0 <= *start && start < end && *end <= length) {
                    return bad(format!("well ({start}, {end}) must lie in [0, {length}]"));
                }
            }
            PotentialShape::Bumps(bumps) => {
                for b in bumps {
                    if !(b.amplitude >= 0.0) || !(b.half_width > 0.0) {
                        return bad(format!(
                            "bump needs amplitude >= 0 and half_width > 0: {b:?}"
                        ));
                    }
                    if b.center - b.half_width < 0.0 || b.center + b.half_width > length {
                        return bad(format!("bump support leaves [0, {length}]: {b:?}"));
                    }
                }
            }
            PotentialShape::Gaussian {
                amplitude, width, ..
            } => {
                if !(*amplitude >= 0.0) || !(*width > 0.0) {
                    return bad(format!("gaussian needs amplitude >= 0 and width > 0"));
                }
            }
            PotentialShape::Sampled(v) => {
                if v.len() < 2 {
                    return Err(Error::Argument(
                        "a sampled potential needs at least two values".into(),
                    ));
                }
                if let Some(x) = v.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
                    return bad(format!("sampled values must be finite and >= 0, got {x}"));
                }
            }
        }
        Ok(Self {
            length,
            shape,
            quad_tol: 1e-10,
        })
    }

    pub fn square_well(length: f64, depth: f64, start: f64, end: f64) -> Result<Self> {
        Self::new(length, PotentialShape::SquareWell { depth, start, end })
    }

    /// Sets the tolerance used for integrals of V and, scaled down, for the
    /// ODE integration.
    pub fn with_quad_tol(mut self, tol: f64) -> Self {
        self.quad_tol = tol;
        self
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn shape(&self) -> &PotentialShape {
        &self.shape
    }

    pub fn quad_tol(&self) -> f64 {
        self.quad_tol
    }

    pub fn smoothness(&self) -> Smoothness {
        match self.shape {
            PotentialShape::Bumps(_) => Smoothness::Smooth,
            _ => Smoothness::PiecewiseSmooth,
        }
    }

    /// V(t), zero outside (0, l).
    pub fn eval(&self, t: f64) -> f64 {
        if !(t > 0.0 && t < self.length) {
            return 0.0;
        }
        match &self.shape {
            PotentialShape::SquareWell { depth, start, end } => {
                if t > *start && t < *end {
                    *depth
                } else {
                    0.0
                }
            }
            PotentialShape::Bumps(bumps) => bumps.iter().map(|b| b.eval(t)).sum(),
            PotentialShape::Gaussian {
                amplitude,
                center,
                width,
            } => amplitude * (-0.5 * ((t - center) / width).powi(2)).exp(),
            PotentialShape::Sampled(v) => {
                let h = self.length / (v.len() - 1) as f64;
                let x = t / h;
                let i = (x.floor() as usize).min(v.len() - 2);
                let f = x - i as f64;
                v[i] * (1.0 - f) + v[i + 1] * f
            }
        }
    }

    /// 0, l and every point where V or a derivative jumps.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = vec![0.0, self.length];
        match &self.shape {
            PotentialShape::SquareWell { start, end, .. } => pts.extend([*start, *end]),
            PotentialShape::Bumps(bumps) => {
                for b in bumps {
                    pts.extend([b.center - b.half_width, b.center + b.half_width]);
                }
            }
            PotentialShape::Gaussian { .. } => {}
            PotentialShape::Sampled(v) => {
                let h = self.length / (v.len() - 1) as f64;
                pts.extend((1..v.len() - 1).map(|i| i as f64 * h));
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// An upper bound for sup V.
    pub fn sup_bound(&self) -> f64 {
        match &self.shape {
            PotentialShape::SquareWell { depth, .. } => *depth,
            PotentialShape::Bumps(bumps) => bumps.iter().map(|b| b.amplitude).sum(),
            PotentialShape::Gaussian { amplitude, .. } => *amplitude,
            PotentialShape::Sampled(v) => v.iter().copied().fold(0.0, f64::max),
        }
    }

    /// ∫_I V^p dt.
    pub fn integral_pow(&self, p: f64) -> Result<f64> {
        if !(p > 0.0) {
            return Err(domain(
                "integral_pow",
                format!("exponent must be positive, got {p}"),
            ));
        }
        let f = |t: f64| {
            let v = self.eval(t);
            if v > 0.0 {
                v.powf(p)
            } else {
                0.0
            }
        };
        let opts = QuadOptions {
            abs_tol: self.quad_tol,
            rel_tol: self.quad_tol,
            max_intervals: 20_000,
        };
        Ok(integrate_with_breaks(f, &self.breakpoints(), opts)?.value)
    }

    /// ∫_I V dt.
    pub fn integral(&self) -> Result<f64> {
        self.integral_pow(1.0)
    }

    /// The potential t ↦ V(l − t).
    pub fn reflected(&self) -> Self {
        let l = self.length;
        let shape = match &self.shape {
            PotentialShape::SquareWell { depth, start, end } => PotentialShape::SquareWell {
                depth: *depth,
                start: l - end,
                end: l - start,
            },
            PotentialShape::Bumps(bumps) => PotentialShape::Bumps(
                bumps
                    .iter()
                    .map(|b| Bump {
                        center: l - b.center,
                        ..*b
                    })
                    .collect(),
            ),
            PotentialShape::Gaussian {
                amplitude,
                center,
                width,
            } => PotentialShape::Gaussian {
                amplitude: *amplitude,
                center: l - center,
                width: *width,
            },
            PotentialShape::Sampled(v) => {
                PotentialShape::Sampled(v.iter().rev().copied().collect())
            }
        };
        Self {
            shape,
            ..self.clone()
        }
    }

    /// The potential t ↦ s²V(st) on (0, l/s).
    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(domain("scaled", format!("scale must be positive, got {s}")));
        }
        let s2 = s * s;
        let shape = match &self.shape {
            PotentialShape::SquareWell { depth, start, end } => PotentialShape::SquareWell {
                depth: depth * s2,
                start: start / s,
                end: end / s,
            },
            PotentialShape::Bumps(bumps) => PotentialShape::Bumps(
                bumps
                    .iter()
                    .map(|b| Bump {
                        amplitude: b.amplitude * s2,
                        center: b.center / s,
                        half_width: b.half_width / s,
                    })
                    .collect(),
            ),
            PotentialShape::Gaussian {
                amplitude,
                center,
                width,
            } => PotentialShape::Gaussian {
                amplitude: amplitude * s2,
                center: center / s,
                width: width / s,
            },
            PotentialShape::Sampled(v) => {
                PotentialShape::Sampled(v.iter().map(|x| x * s2).collect())
            }
        };
        Ok(Self {
            length: self.length / s,
            shape,
            quad_tol: self.quad_tol,
        })
    }

    /// Tolerance for the Prüfer angle, which sets the eigenvalue accuracy.
    fn angle_tol(&self) -> f64 {
        (self.quad_tol * 1e-4).clamp(1e-14, 1e-6)
    }

    /// Tolerance for the full solution; tighter settings make DOPRI5 stall
    /// on the exponentially weighted components.
    fn solution_tol(&self) -> f64 {
        (self.quad_tol * 1e-2).clamp(1e-12, 1e-6)
    }
}

/// Boundary angles: u′(0) = (cot α) u(0) and u′(l) = −(cot β) u(l).
/// α = β = 0 is the Dirichlet problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryAngles {
    pub alpha: f64,
    pub beta: f64,
}

impl BoundaryAngles {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        check_angle("BoundaryAngles", alpha)?;
        check_angle("BoundaryAngles", beta)?;
        Ok(Self { alpha, beta })
    }

    pub fn dirichlet() -> Self {
        Self {
            alpha: 0.0,
            beta: 0.0,
        }
    }

    fn swapped(self) -> Self {
        Self {
            alpha: self.beta,
            beta: self.alpha,
        }
    }
}

fn check_angle(op: &'static str, a: f64) -> Result<()> {
    if !(0.0..=FRAC_PI_2).contains(&a) {
        return Err(domain(op, format!("angle must lie in [0, pi/2], got {a}")));
    }
    Ok(())
}

/// The values ν_1 > ν_2 > … of a negative spectrum {−ν_k}, in order of k.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NegativeEigenvalueList {
    pub values: Vec<f64>,
}

impl NegativeEigenvalueList {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// ν_k for k ≥ 1.
    pub fn get(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.values.get(i)).copied()
    }

    /// Σ_k ν_k^σ.
    pub fn riesz_mean(&self, sigma: f64) -> f64 {
        self.values
            .iter()
            .map(|&v| if sigma == 0.0 { 1.0 } else { v.powf(sigma) })
            .sum()
    }
}

struct Prufer<'a> {
    pot: &'a PotentialProfile1D,
    nu: f64,
}

impl System<f64, Vector1<f64>> for Prufer<'_> {
    fn system(&self, t: f64, y: &Vector1<f64>, dy: &mut Vector1<f64>) {
        let (s, c) = y[0].sin_cos();
        dy[0] = c * c + (self.pot.eval(t) - self.nu) * s * s;
    }
}

/// State (u, u′, ∫u², θ, P, Q) with P′ = e^{−√ν t}Vu and Q′ = e^{√ν t}Vu.
struct Full<'a> {
    pot: &'a PotentialProfile1D,
    nu: f64,
    k: f64,
}

impl System<f64, Vector6<f64>> for Full<'_> {
    fn system(&self, t: f64, y: &Vector6<f64>, dy: &mut Vector6<f64>) {
        let v = self.pot.eval(t);
        let (s, c) = y[3].sin_cos();
        let e = (self.k * t).exp();
        dy[0] = y[1];
        dy[1] = (self.nu - v) * y[0];
        dy[2] = y[0] * y[0];
        dy[3] = c * c + (v - self.nu) * s * s;
        dy[4] = v * y[0] / e;
        dy[5] = v * y[0] * e;
    }
}

/// Runs DOPRI5 piece by piece between the breakpoints of V and collects
/// every accepted step.
fn integrate_pieces<S, const D: usize>(
    op: &'static str,
    pot: &PotentialProfile1D,
    make: impl Fn() -> S,
    y0: nalgebra::SVector<f64, D>,
    tol: f64,
) -> Result<(Vec<f64>, Vec<nalgebra::SVector<f64, D>>)>
where
    S: System<f64, nalgebra::SVector<f64, D>>,
{
    let mut ts = vec![0.0];
    let mut ys = vec![y0];
    let mut y = y0;
    for w in pot.breakpoints().windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut stepper = Dopri5::new(make(), a, b, b - a, y, tol, tol);
        stepper.set_output(OutputType::Sparse);
        stepper
            .integrate()
            .map_err(|e| numerical(op, format!("ODE integration on ({a}, {b}) failed: {e}")))?;
        let xo = stepper.x_out();
        let yo = stepper.y_out();
        for (x, v) in xo.iter().zip(yo.iter()).skip(1) {
            ts.push(*x);
            ys.push(*v);
        }
        y = *yo.last().expect("integrator returns the end state");
        if !y.iter().all(|v| v.is_finite()) {
            return Err(numerical(op, format!("solution overflowed on ({a}, {b})")));
        }
    }
    Ok((ts, ys))
}

/// θ(l; ν, α).
fn theta_end(pot: &PotentialProfile1D, nu: f64, alpha: f64) -> Result<f64> {
    let (_, ys) = integrate_pieces(
        "theta_end",
        pot,
        || Prufer { pot, nu },
        Vector1::new(alpha),
        pot.angle_tol(),
    )?;
    Ok(ys.last().unwrap()[0])
}

/// Endpoint data of the shooting solution of (31).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShootResult {
    pub u_end: f64,
    pub du_end: f64,
    /// ∫_0^l u².
    pub norm_sq: f64,
    pub theta_end: f64,
    /// Sign changes of u inside (0, l).
    pub node_count: usize,
}

/// Sampled solution of (31).
#[derive(Debug, Clone, PartialEq)]
pub struct ShootTrajectory {
    pub nu: f64,
    pub alpha: f64,
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    /// ∫_0^t e^{−√ν s} V u ds
    p: Vec<f64>,
    /// ∫_0^t e^{√ν s} V u ds
    q: Vec<f64>,
    pub result: ShootResult,
}

fn count_sign_changes(u: &[f64]) -> usize {
    let scale = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let cut = 1e-9 * scale;
    // drop the endpoints, where boundary zeros are not nodes
    let inner = if u.len() > 2 {
        &u[1..u.len() - 1]
    } else {
        &[][..]
    };
    let mut last = 0.0;
    let mut count = 0;
    for &x in inner {
        if x.abs() <= cut {
            continue;
        }
        if last != 0.0 && (x > 0.0) != (last > 0.0) {
            count += 1;
        }
        last = x;
    }
    count
}

/// Solves −u″ − Vu = −νu on (0, l) with u(0) = sin α, u′(0) = cos α and
/// keeps every integrator step.
pub fn shoot_trajectory(pot: &PotentialProfile1D, nu: f64, alpha: f64) -> Result<ShootTrajectory> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(domain("shoot", format!("nu must be positive, got {nu}")));
    }
    check_angle("shoot", alpha)?;
    let k = nu.sqrt();
    let (sa, ca) = alpha.sin_cos();
    let y0 = Vector6::new(sa, ca, 0.0, alpha, 0.0, 0.0);
    // the step controller can stall on the e^{±√ν t}-weighted components at
    // the tightest tolerance; loosen by decades before giving up
    let mut tol = pot.solution_tol();
    let (t, ys) = loop {
        match integrate_pieces("shoot", pot, || Full { pot, nu, k }, y0, tol) {
            Ok(out) => break out,
            Err(e) if tol >= 1e-9 => return Err(e),
            Err(_) => tol *= 10.0,
        }
    };
    let u: Vec<f64> = ys.iter().map(|y| y[0]).collect();
    let last = ys.last().unwrap();
    let result = ShootResult {
        u_end: last[0],
        du_end: last[1],
        norm_sq: last[2],
        theta_end: last[3],
        node_count: count_sign_changes(&u),
    };
    Ok(ShootTrajectory {
        nu,
        alpha,
        du: ys.iter().map(|y| y[1]).collect(),
        p: ys.iter().map(|y| y[4]).collect(),
        q: ys.iter().map(|y| y[5]).collect(),
        t,
        u,
        result,
    })
}

/// Endpoint data of the shooting solution.
pub fn shoot(pot: &PotentialProfile1D, nu: f64, alpha: f64) -> Result<ShootResult> {
    Ok(shoot_trajectory(pot, nu, alpha)?.result)
}

impl ShootTrajectory {
    /// Largest relative defect of the integral equation
    /// u(t) = sin α cosh(√ν t) + cos α sinh(√ν t)/√ν − ∫_0^t sinh(√ν(t−s))/√ν V u ds
    /// over the step points, each defect scaled by the largest of the three
    /// terms at that point.
    pub fn integral_equation_residual(&self) -> f64 {
        let k = self.nu.sqrt();
        let (sa, ca) = self.alpha.sin_cos();
        let mut worst = 0.0f64;
        for i in 0..self.t.len() {
            let t = self.t[i];
            let (ep, em) = ((k * t).exp(), (-k * t).exp());
            let free_a = sa * 0.5 * (ep + em);
            let free_b = ca * 0.5 * (ep - em) / k;
            let conv = (ep * self.p[i] - em * self.q[i]) / (2.0 * k);
            let scale = free_a
                .abs()
                .max(free_b.abs())
                .max(conv.abs())
                .max(f64::MIN_POSITIVE);
            worst = worst.max((self.u[i] - (free_a + free_b - conv)).abs() / scale);
        }
        worst
    }
}

struct RootTol;

impl Convergency<f64> for RootTol {
    fn is_root_found(&mut self, y: f64) -> bool {
        y == 0.0
    }

    fn is_converged(&mut self, x1: f64, x2: f64) -> bool {
        (x1 - x2).abs() <= 4.0 * f64::EPSILON * x1.abs().max(x2.abs()) + 1e-300
    }

    fn is_iteration_limit_reached(&mut self, iter: usize) -> bool {
        iter > 500
    }
}

/// Margin in the count of eigenvalues: levels with θ(l; 0) + β within this
/// distance above kπ are at the bottom of the continuum and are not counted.
const COUNT_MARGIN: f64 = 1e-11;

fn bracket_root<F: FnMut(f64) -> Result<f64>>(
    op: &'static str,
    mut f: F,
    lo: f64,
    hi0: f64,
) -> Result<f64> {
    let mut hi = hi0.max(lo + 1e-12);
    let mut f_hi = f(hi)?;
    let mut guard = 0;
    while f_hi > 0.0 {
        hi *= 2.0;
        f_hi = f(hi)?;
        guard += 1;
        if guard > 60 {
            return Err(numerical(op, "could not bracket the eigenvalue"));
        }
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    let mut err = None;
    let root = find_root_brent(
        lo,
        hi,
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                f64::NAN
            }
        },
        &mut RootTol,
    );
    if let Some(e) = err {
        return Err(e);
    }
    root.map_err(|e| numerical(op, format!("root search failed: {e}")))
}

/// N(α, β), the number of negative eigenvalues of H^{(α,β)}.
fn count_interval(pot: &PotentialProfile1D, bc: BoundaryAngles) -> Result<usize> {
    if pot.sup_bound() == 0.0 {
        return Ok(0);
    }
    let top = theta_end(pot, 0.0, bc.alpha)? + bc.beta - COUNT_MARGIN;
    Ok((top / PI).ceil().max(1.0) as usize - 1)
}

fn check_nodes(
    op: &'static str,
    pot: &PotentialProfile1D,
    nu: f64,
    alpha: f64,
    k: usize,
) -> Result<()> {
    let nodes = shoot(pot, nu, alpha)?.node_count;
    if nodes != k - 1 {
        return Err(numerical(
            op,
            format!(
                "eigenfunction {k} at nu = {nu} has {nodes} interior sign changes, expected {}",
                k - 1
            ),
        ));
    }
    Ok(())
}

/// ν_k(α, β), or `None` when H^{(α,β)} has fewer than k negative eigenvalues.
pub fn eigen_interval_k(
    pot: &PotentialProfile1D,
    bc: BoundaryAngles,
    k: usize,
) -> Result<Option<f64>> {
    if k == 0 {
        return Err(Error::Argument("eigenvalue index starts at 1".into()));
    }
    if k > count_interval(pot, bc)? {
        return Ok(None);
    }
    let target = k as f64 * PI - bc.beta;
    let nu = bracket_root(
        "eigen_interval",
        |nu| Ok(theta_end(pot, nu, bc.alpha)? - target),
        0.0,
        pot.sup_bound(),
    )?;
    check_nodes("eigen_interval", pot, nu, bc.alpha, k)?;
    Ok(Some(nu))
}

/// All negative eigenvalues of H^{(α,β)}.
pub fn eigen_interval(
    pot: &PotentialProfile1D,
    bc: BoundaryAngles,
) -> Result<NegativeEigenvalueList> {
    let n = count_interval(pot, bc)?;
    let mut values = Vec::with_capacity(n);
    for k in 1..=n {
        values.push(eigen_interval_k(pot, bc, k)?.expect("k within the count"));
    }
    Ok(NegativeEigenvalueList { values })
}

/// λ₁ with −λ₁ the lowest Dirichlet eigenvalue, whatever its sign. A
/// negative value means the Dirichlet problem has no negative spectrum.
pub fn dirichlet_ground_level(pot: &PotentialProfile1D) -> Result<f64> {
    // V ≥ 0 keeps the lowest eigenvalue at or below π²/l²
    let l = pot.length();
    let lo = -(PI / l).powi(2) * (1.0 + 1e-6) - 1e-12;
    let nu = bracket_root(
        "dirichlet_ground_level",
        |nu| Ok(theta_end(pot, nu, 0.0)? - PI),
        lo,
        pot.sup_bound(),
    )?;
    Ok(nu)
}

/// arccot √μ in (0, π/2], with ω(0) = π/2.
pub fn omega_of(mu: f64) -> f64 {
    (1.0 / mu.sqrt()).atan()
}

/// μ_k of the whole-line operator: the k-th root of θ(l; μ, ω) + ω = kπ with
/// ω = arccot √μ, which matches the decaying exponentials outside (0, l).
pub fn eigen_line_k(pot: &PotentialProfile1D, k: usize) -> Result<Option<f64>> {
    if k == 0 {
        return Err(Error::Argument("eigenvalue index starts at 1".into()));
    }
    if k > count_line(pot)? {
        return Ok(None);
    }
    let target = k as f64 * PI;
    let mu = bracket_root(
        "eigen_line",
        |mu| {
            let w = omega_of(mu);
            Ok(theta_end(pot, mu, w)? + w - target)
        },
        0.0,
        pot.sup_bound(),
    )?;
    check_nodes("eigen_line", pot, mu, omega_of(mu), k)?;
    Ok(Some(mu))
}

fn count_line(pot: &PotentialProfile1D) -> Result<usize> {
    if pot.sup_bound() == 0.0 {
        return Ok(0);
    }
    let top = theta_end(pot, 0.0, FRAC_PI_2)? + FRAC_PI_2 - COUNT_MARGIN;
    Ok((top / PI).ceil().max(1.0) as usize - 1)
}

pub fn eigen_line(pot: &PotentialProfile1D) -> Result<NegativeEigenvalueList> {
    let n = count_line(pot)?;
    let mut values = Vec::with_capacity(n);
    for k in 1..=n {
        values.push(eigen_line_k(pot, k)?.expect("k within the count"));
    }
    Ok(NegativeEigenvalueList { values })
}

/// Central difference of α ↦ ν_k(α, β) against ‖u(·; ν_k(α, β), α)‖^{−2},
/// with u normalized by its initial data (sin α, cos α).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub nu: f64,
}

pub fn lemma42_derivative_check(
    pot: &PotentialProfile1D,
    bc: BoundaryAngles,
    k: usize,
    h_alpha: f64,
) -> Result<DerivativeCheck> {
    let op = "lemma42_derivative_check";
    if !(h_alpha > 0.0) || bc.alpha - h_alpha < 0.0 || bc.alpha + h_alpha > FRAC_PI_2 {
        return Err(domain(
            op,
            "the stencil alpha +- h must stay inside [0, pi/2]",
        ));
    }
    let at = |a: f64| -> Result<f64> {
        eigen_interval_k(pot, BoundaryAngles { alpha: a, ..bc }, k)?
            .ok_or_else(|| domain(op, format!("eigenvalue {k} does not exist at alpha = {a}")))
    };
    let nu = at(bc.alpha)?;
    let lhs = (at(bc.alpha + h_alpha)? - at(bc.alpha - h_alpha)?) / (2.0 * h_alpha);
    let rhs = 1.0 / shoot(pot, nu, bc.alpha)?.norm_sq;
    Ok(DerivativeCheck { lhs, rhs, nu })
}

/// The β analogue, through the reflected potential: ν_k(α, β) of V equals
/// ν_k(β, α) of V(l − ·), and ũ(t) = u(l − t).
pub fn lemma42_beta_check(
    pot: &PotentialProfile1D,
    bc: BoundaryAngles,
    k: usize,
    h_beta: f64,
) -> Result<DerivativeCheck> {
    lemma42_derivative_check(&pot.reflected(), bc.swapped(), k, h_beta)
}

/// Both sides of μ_k − λ_k = ∫_0^{ω_k}‖u(·; ν_k(α, ω_k), α)‖^{−2} dα
///                         + ∫_0^{ω_k}‖ũ(·; ν_k(0, β), β)‖^{−2} dβ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapIdentityCheck {
    pub gap_direct: f64,
    pub gap_integral: f64,
    pub mu: f64,
    pub lambda: f64,
    pub omega: f64,
    /// ν_k(ω_k, ω_k), which equals μ_k.
    pub nu_at_omega: f64,
}

pub fn eq33_identity_check(
    pot: &PotentialProfile1D,
    k: usize,
    quad_tol: f64,
) -> Result<GapIdentityCheck> {
    let op = "eq33_identity_check";
    let mu = eigen_line_k(pot, k)?
        .ok_or_else(|| domain(op, format!("whole-line eigenvalue {k} does not exist")))?;
    let lambda = eigen_interval_k(pot, BoundaryAngles::dirichlet(), k)?
        .ok_or_else(|| domain(op, format!("Dirichlet eigenvalue {k} does not exist")))?;
    let omega = omega_of(mu);
    let nu_at_omega = eigen_interval_k(
        pot,
        BoundaryAngles {
            alpha: omega,
            beta: omega,
        },
        k,
    )?
    .ok_or_else(|| numerical(op, "nu_k(omega, omega) missing"))?;

    let inv_norm = |p: &PotentialProfile1D, a: f64, b: f64| -> Result<f64> {
        let nu =
            eigen_interval_k(p, BoundaryAngles { alpha: a, beta: b }, k)?.ok_or_else(|| {
                numerical(
                    op,
                    format!("eigenvalue {k} vanished inside the integration range"),
                )
            })?;
        Ok(1.0 / shoot(p, nu, a)?.norm_sq)
    };
    let integral = |p: &PotentialProfile1D, fixed: f64| -> Result<f64> {
        let err = RefCell::new(None);
        let q = integrate(
            |a| match inv_norm(p, a, fixed) {
                Ok(v) => v,
                Err(e) => {
                    err.borrow_mut().get_or_insert(e);
                    0.0
                }
            },
            0.0,
            omega,
            QuadOptions::abs(0.5 * quad_tol),
        )?;
        match err.into_inner() {
            Some(e) => Err(e),
            None => Ok(q.value),
        }
    };
    let first = integral(pot, omega)?;
    // ν_k(0, β) of V is ν_k(β, 0) of the reflection
    let second = integral(&pot.reflected(), 0.0)?;
    Ok(GapIdentityCheck {
        gap_direct: mu - lambda,
        gap_integral: first + second,
        mu,
        lambda,
        omega,
        nu_at_omega,
    })
}

/// 2 ln 3, the threshold on l∫V below which no bound state survives.
pub const TWO_LN_3: f64 = 2.197_224_577_336_219_4;

/// 2(∫V)²/(e^A − 1), A = l∫V.
fn gap_lower(b: f64, a: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        2.0 * b * b / a.exp_m1()
    }
}

/// μ₁ − λ₁ ≥ 2(∫V)²/(e^{l∫V} − 1). When l∫V ≤ 2 ln 3 the Dirichlet problem
/// has no negative eigenvalue (param `zero_criterion` = 1).
pub fn lemma44_gap_bound(pot: &PotentialProfile1D) -> Result<BoundReport> {
    let b = pot.integral()?;
    let a = pot.length() * b;
    let zero = a <= TWO_LN_3;
    let mut r = BoundReport::new(BoundKind::GroundStateGap, gap_lower(b, a))
        .param("length", pot.length())
        .param("integral_v", b)
        .param("a", a)
        .param("zero_criterion", if zero { 1.0 } else { 0.0 });
    if zero {
        r = r.note("l * integral(V) <= 2 ln 3: no negative Dirichlet eigenvalue");
    }
    Ok(r)
}

/// Ground-state quantities behind the gap bound, computed by the solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapDiagnostics {
    pub mu1: f64,
    /// −λ₁ is the lowest Dirichlet eigenvalue; λ₁ ≤ 0 when it is not negative.
    pub lambda1: f64,
    /// μ₁ − λ₁.
    pub gap: f64,
    /// 8μ₁/(e^{2l√μ₁} − 1).
    pub eq35: f64,
    pub lemma44: f64,
    /// √μ₁ ≤ ½∫V.
    pub hlt_holds: bool,
}

pub fn gap_diagnostics(pot: &PotentialProfile1D) -> Result<GapDiagnostics> {
    let mu1 = eigen_line_k(pot, 1)?
        .ok_or_else(|| domain("gap_diagnostics", "potential has no bound state"))?;
    let lambda1 = dirichlet_ground_level(pot)?;
    let b = pot.integral()?;
    let l = pot.length();
    Ok(GapDiagnostics {
        mu1,
        lambda1,
        gap: mu1 - lambda1,
        eq35: 8.0 * mu1 / (2.0 * l * mu1.sqrt()).exp_m1(),
        lemma44: gap_lower(b, l * b),
        hlt_holds: mu1.sqrt() <= 0.5 * b * (1.0 + 1e-12),
    })
}

/// R_σ ≤ L(σ,1)∫V^{σ+1/2} − (2(∫V)²/(e^A − 1))^σ, and R_σ = 0 for
/// A = l∫V ≤ 2 ln 3. Clamped at 0.
pub fn thm41_bound(pot: &PotentialProfile1D, sigma: f64) -> Result<BoundReport> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(domain(
            "thm41_bound",
            format!("sigma must be >= 0, got {sigma}"),
        ));
    }
    let b = pot.integral()?;
    let a = pot.length() * b;
    let lt = lcl_value(sigma, 1) * pot.integral_pow(sigma + 0.5)?;
    let remainder = gap_lower(b, a).powf(sigma);
    let value = if a <= TWO_LN_3 {
        0.0
    } else {
        (lt - remainder).max(0.0)
    };
    let mut r = BoundReport::new(BoundKind::LiebThirringRemainder1d, value)
        .param("sigma", sigma)
        .param("a", a)
        .param("integral_v", b)
        .param("lt_value", lt)
        .param("remainder", remainder)
        .require(sigma >= 1.5, "sigma < 3/2");
    if a <= TWO_LN_3 {
        r = r.note("A <= 2 ln 3: Riesz mean vanishes");
    }
    Ok(r)
}
