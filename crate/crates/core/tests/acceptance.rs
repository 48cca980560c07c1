//! Acceptance run: one line per criterion, non-zero exit if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spectral_bounds::fdverify::{
    empirical_riesz_sweep, fd_domain_spectrum, max_grid_spacing, square_spectrum, PlanarDomain,
    SolverOptions, TruncationPolicy,
};
use spectral_bounds::horn::{
    horn_asymptotic_leading, horn_bound_integral_check, horn_bound_thm32, horn_counting_cor33,
    horn_critical_counting_cor35, horn_critical_thm34, HornRegion,
};
use spectral_bounds::lt2d::{example43_bound, example43_domain, example43_quadrature, thm45_bound};
use spectral_bounds::riesz::{
    aizenman_lieb_lift_with_breaks, counting_from_riesz, log_grid, riesz_mean,
};
use spectral_bounds::schrodinger1d::{
    eigen_interval, eigen_interval_k, eigen_line_k, eq33_identity_check,
    lemma42_derivative_check, omega_of, shoot, thm41_bound, BoundaryAngles, Bump, PotentialProfile1D,
    PotentialShape, TWO_LN_3,
};
use spectral_bounds::urchin::{
    urchin_lower_lemma37_exact, urchin_upper_lemma36, UrchinSequence,
};

const COEFFICIENT_TOL: f64 = 1e-10;
const CLOSED_FORM_TOL: f64 = 1e-6;
const CLOSED_FORM_QUAD_TOL: f64 = 1e-8;
const SLOPE_TOL: f64 = 0.05;
const DERIVATIVE_TOL: f64 = 1e-5;
const GAP_IDENTITY_TOL: f64 = 1e-4;
const PROPOSITION_TOL: f64 = 1e-8;
const SOLVER_TOL: f64 = 1e-8;
const EXAMPLE_SLOPE_TOL: f64 = 0.01;
const LIFT_QUAD_TOL: f64 = 1e-8;
const COUNTING_TOL: f64 = 1e-3;
const CRITICAL_THRESHOLD: f64 = PI * PI / 16.0;
const UNKNOWNS_BUDGET: usize = 300_000;

type Outcome = Result<String, String>;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn check(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn criterion_1() -> Outcome {
    let mut worst: f64 = 0.0;
    for sigma in [1.5, 2.0] {
        for nu in [1.5, 2.0, 3.0] {
            let h = HornRegion::new(2, nu).map_err(err)?;
            for lambda in [1.0, 37.0, 1e4] {
                let b = horn_bound_thm32(&h, sigma, lambda).map_err(err)?.value;
                let a = horn_asymptotic_leading(&h, sigma, lambda).map_err(err)?;
                worst = worst.max(rel(b, a));
            }
        }
    }
    check(
        worst <= COEFFICIENT_TOL,
        format!("max relative gap {worst:.2e} (tol {COEFFICIENT_TOL:.0e})"),
    )
}

fn criterion_2() -> Outcome {
    let mut worst: f64 = 0.0;
    for sigma in [1.5, 2.0] {
        for nu in [1.5, 2.0, 3.0] {
            let h = HornRegion::new(2, nu).map_err(err)?;
            let lambda = 25.0;
            let closed = horn_bound_thm32(&h, sigma, lambda).map_err(err)?.value;
            let q = horn_bound_integral_check(&h, sigma, lambda, CLOSED_FORM_QUAD_TOL)
                .map_err(err)?;
            worst = worst.max(rel(q, closed));
        }
    }
    check(
        worst <= CLOSED_FORM_TOL,
        format!("max relative gap {worst:.2e} at quad_tol {CLOSED_FORM_QUAD_TOL:.0e} (tol {CLOSED_FORM_TOL:.0e})"),
    )
}

fn criterion_3() -> Outcome {
    let mut failures = Vec::new();
    let below = |t: f64| [t, 0.999 * t, 0.5 * t, 1e-3 * t];
    for lambda in below(CRITICAL_THRESHOLD) {
        for sigma in [1.5, 2.0] {
            let v = horn_critical_thm34(sigma, lambda).map_err(err)?.value;
            if v != 0.0 {
                failures.push(format!("critical horn sigma {sigma} at {lambda}: {v}"));
            }
        }
        let v = horn_critical_counting_cor35(lambda).map_err(err)?.value;
        if v != 0.0 {
            failures.push(format!("critical counting at {lambda}: {v}"));
        }
    }
    for seq in [
        UrchinSequence::linear(),
        UrchinSequence::geometric(0.5).map_err(err)?,
    ] {
        let r1 = seq.radius(1).ok_or("missing r_1")?;
        for lambda in below(15.0 / (4.0 * r1 * r1)) {
            let v = urchin_upper_lemma36(&seq, 1.5, lambda).map_err(err)?.value;
            if v != 0.0 {
                failures.push(format!("urchin r_1 = {r1} at {lambda}: {v}"));
            }
        }
    }
    for (l, a) in [(1.0, TWO_LN_3), (2.0, 0.9 * TWO_LN_3), (0.5, 0.1)] {
        // depth·l² = A on a full-width well
        let pot = PotentialProfile1D::square_well(l, a / (l * l), 0.0, l).map_err(err)?;
        let r = thm41_bound(&pot, 1.5).map_err(err)?;
        if r.value != 0.0 {
            failures.push(format!("1-D well A = {a}: {}", r.value));
        }
    }
    check(
        failures.is_empty(),
        if failures.is_empty() {
            "all threshold cases exactly 0".into()
        } else {
            failures.join("; ")
        },
    )
}

fn criterion_4() -> Outcome {
    let sigma = 1.5;
    let nu = 2.0;
    let lambdas = log_grid(10.0, 80.0, 8);
    // half the coarsest spacing with 10 nodes per wavelength at Λ = 80
    // (rounded down to 1e-3); the h/2 raster must stay within the budget
    let h = 0.5 * (max_grid_spacing(80.0) * 1000.0).floor() / 1000.0;
    let r = empirical_riesz_sweep(
        &PlanarDomain::Horn { nu },
        sigma,
        &lambdas,
        h,
        TruncationPolicy::default(),
        SolverOptions::default(),
    )
    .map_err(err)?;
    let horn = HornRegion::new(2, nu).map_err(err)?;
    let mut ok = true;
    let mut ratios = Vec::new();
    let mut lines = Vec::new();
    for row in &r.rows {
        let bound = horn_bound_thm32(&horn, sigma, row.lambda).map_err(err)?.value;
        let dominated = row.value - row.refinement_delta.abs() < bound;
        ok &= dominated;
        ratios.push(row.value / bound);
        lines.push(format!(
            "{:.1}:{:.3}/{:.3}(d {:.3})",
            row.lambda, row.value, bound, row.refinement_delta
        ));
    }
    let increasing = ratios.windows(2).all(|w| w[1] > w[0]);
    let d = &r.diagnostics;
    let within_budget = d.nodes_refined <= UNKNOWNS_BUDGET;
    check(
        ok && increasing && within_budget,
        format!(
            "h {h}, box {:.1}x{:.1}, {} / {} unknowns; ratios {:.3}..{:.3} {}; {}",
            d.truncation.x_extent,
            d.truncation.y_extent,
            d.nodes,
            d.nodes_refined,
            ratios[0],
            ratios[ratios.len() - 1],
            if increasing { "increasing" } else { "NOT increasing" },
            lines.join(" ")
        ),
    )
}

fn criterion_5() -> Outcome {
    let d = PlanarDomain::RotatedCritical;
    let lambda_max = 4.0;
    let h = 0.1;
    let mut lines = Vec::new();
    let mut ok = true;
    let mut prev = f64::INFINITY;
    for c in [2.0, 4.0, 8.0] {
        let t = TruncationPolicy::new(c).map_err(err)?.truncation(&d, lambda_max).map_err(err)?;
        let first = |h: f64| -> Result<f64, String> {
            let fd = fd_domain_spectrum(&d, t, h, lambda_max, SolverOptions::default()).map_err(err)?;
            fd.spectrum.values().first().copied().ok_or_else(|| "no eigenvalue below 4".into())
        };
        let (coarse, fine) = (first(h)?, first(0.5 * h)?);
        let delta = (coarse - fine).abs();
        ok &= coarse >= CRITICAL_THRESHOLD - delta && fine >= CRITICAL_THRESHOLD - delta;
        // a larger box can only lower the ground state, up to the solver
        // residual 1e-10·8/h²
        ok &= coarse <= prev + 1e-10 * 8.0 / (h * h);
        prev = coarse;
        lines.push(format!("R {:.2}: {coarse:.5} (h/2 {fine:.5})", t.x_extent));
    }
    check(
        ok,
        format!("pi^2/16 = {CRITICAL_THRESHOLD:.5}; {}", lines.join(", ")),
    )
}

fn lstsq(cols: &[Vec<f64>], y: &[f64]) -> Result<(Vec<f64>, f64), String> {
    let a = DMatrix::from_fn(y.len(), cols.len(), |i, j| cols[j][i]);
    let b = DVector::from_column_slice(y);
    let sol = a.clone().svd(true, true).solve(&b, 1e-14)?;
    let res = (&a * &sol - &b).norm();
    Ok((sol.iter().copied().collect(), res))
}

fn criterion_6() -> Outcome {
    let sigma = 1.5;
    let grid = log_grid(10.0, 1e4, 200);
    let linear = UrchinSequence::linear();
    let geometric = UrchinSequence::geometric(0.5).map_err(err)?;
    let mut violations = 0;
    let mut uppers = [Vec::new(), Vec::new()];
    for (i, seq) in [&linear, &geometric].into_iter().enumerate() {
        for &l in &grid {
            let up = urchin_upper_lemma36(seq, sigma, l).map_err(err)?.value;
            let lo = urchin_lower_lemma37_exact(seq, sigma, l).map_err(err)?.value;
            if lo > up {
                violations += 1;
            }
            uppers[i].push(up.ln());
        }
    }
    let ln_l: Vec<f64> = grid.iter().map(|l| l.ln()).collect();
    let ones = vec![1.0; grid.len()];
    let ln_ln: Vec<f64> = ln_l.iter().map(|x| x.ln()).collect();
    let (pow, res_pow) = lstsq(&[ones.clone(), ln_l.clone()], &uppers[0])?;
    let (log, res_log) = lstsq(&[ones.clone(), ln_l.clone(), ln_ln], &uppers[0])?;
    let (geo, _) = lstsq(&[ones, ln_l], &uppers[1])?;
    let lin_target = sigma + 1.0;
    let geo_target = sigma + 1.0 / (1.0 - 0.5);
    // a ln ln Λ term near 2 that clearly lowers the residual flags (ln Λ)²
    let log_detected = (1.0..=3.0).contains(&log[2]) && res_log < 0.8 * res_pow;
    let ok = violations == 0
        && (log[1] - lin_target).abs() <= SLOPE_TOL
        && log_detected
        && (geo[1] - geo_target).abs() <= SLOPE_TOL;
    check(
        ok,
        format!(
            "{violations} sandwich violations on 2x{} points; linear slope {:.3} (target {lin_target}, power-only fit {:.3}), ln ln coefficient {:.2}, residual {:.3} vs {:.3}; geometric slope {:.3} (target {geo_target})",
            grid.len(),
            log[1],
            pow[1],
            log[2],
            res_log,
            res_pow,
            geo[1]
        ),
    )
}

fn random_well(rng: &mut ChaCha8Rng) -> Result<PotentialProfile1D, String> {
    let l = rng.random_range(0.5..3.0);
    let n = rng.random_range(1..4);
    let bumps = (0..n)
        .map(|_| {
            let hw = rng.random_range(0.05..0.25) * l;
            Bump {
                amplitude: rng.random_range(1.0..80.0),
                center: rng.random_range(hw..l - hw),
                half_width: hw,
            }
        })
        .collect();
    PotentialProfile1D::new(l, PotentialShape::Bumps(bumps)).map_err(err)
}

fn criterion_7() -> Outcome {
    // derivative identity on ten square wells
    let mut worst_derivative: f64 = 0.0;
    let wells = [
        (1.0, 30.0, 0.0, 1.0, 0.3, 0.2),
        (1.0, 60.0, 0.0, 1.0, 0.8, 0.8),
        (1.5, 30.0, 0.2, 1.1, 0.6, 0.9),
        (2.0, 40.0, 0.5, 1.5, 0.5, 0.5),
        (2.0, 15.0, 0.3, 1.9, 1.0, 0.1),
        (0.8, 90.0, 0.1, 0.5, 0.4, 1.2),
        (3.0, 8.0, 1.0, 2.5, 0.7, 0.7),
        (1.2, 120.0, 0.0, 1.2, 0.2, 1.4),
        (2.5, 25.0, 0.5, 2.0, 1.2, 0.3),
        (1.0, 200.0, 0.4, 0.9, 0.9, 1.0),
    ];
    for &(l, depth, a, b, alpha, beta) in &wells {
        let pot = PotentialProfile1D::square_well(l, depth, a, b).map_err(err)?;
        let bc = BoundaryAngles::new(alpha, beta).map_err(err)?;
        // balance the O(h²) stencil error against eigenvalue roundoff ε·ν/h,
        // measured relative to the derivative ‖u‖^{−2}
        let nu = eigen_interval_k(&pot, bc, 1).map_err(err)?.ok_or("no Robin state")?;
        let inv_norm = 1.0 / shoot(&pot, nu, alpha).map_err(err)?.norm_sq;
        let step = (1e-15 * nu / inv_norm).cbrt().clamp(1e-5, 1e-2);
        let c = lemma42_derivative_check(&pot, bc, 1, step).map_err(err)?;
        worst_derivative = worst_derivative.max(rel(c.lhs, c.rhs));
    }
    // gap identity and ν_1(ω_1, ω_1) = μ_1
    let mut worst_gap: f64 = 0.0;
    let mut worst_prop: f64 = 0.0;
    for &(l, depth, a, b, _, _) in &wells[..4] {
        let pot = PotentialProfile1D::square_well(l, depth, a, b).map_err(err)?;
        let c = eq33_identity_check(&pot, 1, 1e-8).map_err(err)?;
        worst_gap = worst_gap.max(rel(c.gap_integral, c.gap_direct));
        let mu = eigen_line_k(&pot, 1).map_err(err)?.ok_or("no whole-line state")?;
        let w = omega_of(mu);
        let nu = eigen_interval_k(&pot, BoundaryAngles::new(w, w).map_err(err)?, 1)
            .map_err(err)?
            .ok_or("no Robin state")?;
        worst_prop = worst_prop.max(rel(nu, mu));
    }
    // √μ₁ ≤ ½∫V on random wells
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut hlt_fail = 0;
    for _ in 0..50 {
        let pot = random_well(&mut rng)?;
        let mu = eigen_line_k(&pot, 1).map_err(err)?.ok_or("no whole-line state")?;
        if mu.sqrt() > 0.5 * pot.integral().map_err(err)? {
            hlt_fail += 1;
        }
    }
    let ok = worst_derivative <= DERIVATIVE_TOL
        && worst_gap <= GAP_IDENTITY_TOL
        && worst_prop <= PROPOSITION_TOL
        && hlt_fail == 0;
    check(
        ok,
        format!(
            "derivative {worst_derivative:.1e} (tol {DERIVATIVE_TOL:.0e}), gap identity {worst_gap:.1e} (tol {GAP_IDENTITY_TOL:.0e}), omega equality {worst_prop:.1e} (tol {PROPOSITION_TOL:.0e}), {hlt_fail}/50 wells violate sqrt(mu_1) <= int V / 2"
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4141);
    let mut tested = 0;
    let mut failures = Vec::new();
    let mut min_margin = f64::INFINITY;
    while tested < 50 {
        let pot = random_well(&mut rng)?;
        if pot.length() * pot.integral().map_err(err)? <= TWO_LN_3 {
            continue;
        }
        tested += 1;
        let spec = eigen_interval(&pot, BoundaryAngles::dirichlet()).map_err(err)?;
        for sigma in [1.5, 2.0] {
            let r = thm41_bound(&pot, sigma).map_err(err)?;
            let mean = spec.riesz_mean(sigma);
            let lt = r.get("lt_value").ok_or("missing lt_value")?;
            let slack = SOLVER_TOL * r.value.max(1.0);
            if mean > r.value + slack || r.value > lt {
                failures.push(format!("well {tested} sigma {sigma}: {mean} / {} / {lt}", r.value));
            }
            if r.value > 0.0 {
                min_margin = min_margin.min(r.value / mean.max(f64::MIN_POSITIVE));
            }
        }
    }
    check(
        failures.is_empty(),
        if failures.is_empty() {
            format!("50 wells, sigma in {{1.5, 2}}: solver <= bound <= plain LT; smallest bound/solver ratio {min_margin:.3}")
        } else {
            failures.join("; ")
        },
    )
}

fn criterion_9() -> Outcome {
    let mut worst_q: f64 = 0.0;
    let mut worst_slope: f64 = 0.0;
    let mut growth = Vec::new();
    let mut diverges = true;
    for (alpha, sigma) in [(0.2, 1.5), (0.3, 1.5), (0.25, 2.0)] {
        let lambda = 2.0;
        let closed = example43_bound(alpha, sigma, lambda).map_err(err)?.value;
        worst_q = worst_q.max(rel(closed, example43_quadrature(alpha, sigma, lambda, 1e-11).map_err(err)?));
        let lams = log_grid(0.1, 100.0, 9);
        let ys: Vec<f64> = lams
            .iter()
            .map(|&l| example43_bound(alpha, sigma, l).map(|r| r.value.ln()))
            .collect::<Result<_, _>>()
            .map_err(err)?;
        let xs: Vec<f64> = lams.iter().map(|l| l.ln()).collect();
        let (c, _) = lstsq(&[vec![1.0; xs.len()], xs], &ys)?;
        worst_slope = worst_slope.max((c[1] - (sigma + 1.0) / (1.0 - alpha)).abs());
        // the unrestricted section integral over |x| < R for four R
        let mut prev = 0.0;
        let mut vals = Vec::new();
        for big_r in [10.0, 100.0, 1e3, 1e4] {
            let sd = example43_domain(alpha, lambda, big_r).map_err(err)?;
            let v = thm45_bound(&sd, sigma, 1e-7)
                .map_err(err)?
                .get("plain_lt")
                .ok_or("plain value missing")?;
            diverges &= v > 1.5 * prev;
            prev = v;
            vals.push(v);
        }
        growth.push(format!("({alpha}, {sigma}): x{:.1} per decade", vals[3] / vals[2]));
    }
    check(
        worst_q <= CLOSED_FORM_TOL && worst_slope <= EXAMPLE_SLOPE_TOL && diverges,
        format!(
            "closed form vs quadrature {worst_q:.1e} (tol {CLOSED_FORM_TOL:.0e}), slope error {worst_slope:.1e} (tol {EXAMPLE_SLOPE_TOL}), unrestricted integral {}",
            growth.join(", ")
        ),
    )
}

fn criterion_10() -> Outcome {
    let mut worst_lift: f64 = 0.0;
    for lambda in [60.0, 100.0, 150.0] {
        let spec = square_spectrum(1.0, lambda).map_err(err)?;
        let count = |e: f64| spec.below(e).len() as f64;
        for sigma in [1.0, 2.0] {
            let lifted =
                aizenman_lieb_lift_with_breaks(count, lambda, sigma, 0.0, LIFT_QUAD_TOL, spec.values())
                    .map_err(err)?;
            let direct = riesz_mean(&spec, lambda, sigma).map_err(err)?;
            worst_lift = worst_lift.max((lifted - direct).abs());
        }
    }
    let mut worst_count: f64 = 0.0;
    let grid = log_grid(1e-2, 1e2, 40001);
    for nu in [1.5, 2.0, 3.0] {
        let h = HornRegion::new(2, nu).map_err(err)?;
        let lambda = 40.0;
        let cor = horn_counting_cor33(&h, lambda).map_err(err)?;
        let num = counting_from_riesz(
            |x| horn_bound_thm32(&h, 1.5, x).map(|r| r.value).unwrap_or(f64::INFINITY),
            lambda,
            1.5,
            &grid,
        )
        .map_err(err)?;
        worst_count = worst_count
            .max(rel(num.value, cor.value))
            .max(rel(num.tau, cor.get("tau_min").ok_or("tau_min missing")?));
    }
    check(
        worst_lift <= 10.0 * LIFT_QUAD_TOL && worst_count <= COUNTING_TOL,
        format!(
            "lift error {worst_lift:.1e} (tol {:.0e}), counting constant/tau error {worst_count:.1e} (tol {COUNTING_TOL:.0e})",
            10.0 * LIFT_QUAD_TOL
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("sharp horn coefficient", criterion_1),
        ("horn closed form vs quadrature", criterion_2),
        ("zero thresholds", criterion_3),
        ("FD dominance on the horn nu = 2", criterion_4),
        ("critical horn ground state", criterion_5),
        ("urchin sandwich and growth", criterion_6),
        ("one-dimensional identities", criterion_7),
        ("one-dimensional bound dominance", criterion_8),
        ("horn potential example", criterion_9),
        ("cross-module consistency", criterion_10),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if only.is_some_and(|o| o != n) {
            continue;
        }
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {n:>2} PASS [{secs:.1}s] {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {n:>2} FAIL [{secs:.1}s] {name}: {msg}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
