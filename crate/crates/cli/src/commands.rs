use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde_json::json;

use spectral_bounds::fdverify::{
    empirical_riesz_sweep, PlanarDomain, SolverOptions, TruncationPolicy,
};
use spectral_bounds::horn::{
    horn_asymptotic_leading, horn_bound_thm32, horn_counting_cor33, horn_critical_counting_cor35,
    horn_critical_thm34, HornRegion,
};
use spectral_bounds::lt2d::{
    example43_bound, example43_cutoff, example43_domain, example43_quadrature, thm45_bound,
};
use spectral_bounds::report::BoundReport;
use spectral_bounds::schrodinger1d::{
    eigen_interval, eq33_identity_check, thm41_bound, BoundaryAngles, PotentialProfile1D,
    PotentialShape, TWO_LN_3,
};
use spectral_bounds::urchin::{
    urchin_index, urchin_lower_lemma37_exact, urchin_upper_lemma36, urchin_vdb_counting,
    IndexOutcome, UrchinSequence,
};
use spectral_bounds::Error as CoreError;

use crate::error::CliError;
use crate::grid::parse_grid;
use crate::par::par_map;
use crate::report::{Cell, RunReport};

/// Output destinations shared by every command.
#[derive(Debug, Args)]
pub struct OutputArgs {
    /// CSV destination; stdout when omitted. The sidecar goes to `<out>.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Sidecar destination, overriding `<out>.json`.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

fn check_sigma(sigma: f64) -> Result<(), CliError> {
    if sigma >= 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--sigma must be >= 0, got {sigma}")))
    }
}

fn flag_violations(report: &mut RunReport, br: &BoundReport, row: usize) {
    for v in &br.violations {
        report.flag("hypothesis", v, Some(row));
    }
}

/// Riesz mean when σ > 0, counting bound when σ = 0.
fn horn_bound(h: &HornRegion, sigma: f64, lambda: f64) -> Result<BoundReport, CoreError> {
    match (h.is_critical(), sigma == 0.0) {
        (true, true) => horn_critical_counting_cor35(lambda),
        (true, false) => horn_critical_thm34(sigma, lambda),
        (false, true) => horn_counting_cor33(h, lambda),
        (false, false) => horn_bound_thm32(h, sigma, lambda),
    }
}

#[derive(Debug, Args)]
pub struct BoundHornArgs {
    #[arg(long, default_value_t = 2)]
    pub d: u32,
    /// Horn exponent; 1 selects the critical horn |xy| < 1 (d = 2 only).
    #[arg(long)]
    pub nu: f64,
    /// Riesz order; 0 gives the eigenvalue counting bound.
    #[arg(long)]
    pub sigma: f64,
    /// Λ grid: a:b:logN, a:b:linN or a comma list.
    #[arg(long)]
    pub lambda: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn bound_horn(args: &BoundHornArgs) -> Result<RunReport, CliError> {
    check_sigma(args.sigma)?;
    let lambdas = parse_grid(&args.lambda)?;
    let h = HornRegion::new(args.d, args.nu)?;
    let mut report = RunReport::new(
        "bound horn",
        &["lambda", "bound", "asymptotic_leading", "ratio"],
    );
    report.param("d", args.d);
    report.param("nu", args.nu);
    report.param("sigma", args.sigma);
    report.param("lambda", &args.lambda);

    let rows = par_map(&lambdas, |&lambda| -> Result<_, CoreError> {
        let b = horn_bound(&h, args.sigma, lambda)?;
        let asym = if args.d == 2 {
            Some(horn_asymptotic_leading(&h, args.sigma, lambda)?)
        } else {
            None
        };
        Ok((lambda, b, asym))
    });
    if args.d != 2 {
        report.flag("no_asymptotics", "leading asymptotics are available for d = 2 only", None);
    }
    for (i, row) in rows.into_iter().enumerate() {
        let (lambda, b, asym) = row?;
        flag_violations(&mut report, &b, i);
        let ratio = asym.filter(|a| *a > 0.0).map(|a| b.value / a);
        report.push_row(vec![lambda.into(), b.value.into(), asym.into(), ratio.into()]);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UrchinKindArg {
    /// r_n = n
    Linear,
    /// r_n = 2^{δn}
    Geometric,
    /// r_n = 2^n / √n
    ExpOverSqrt,
    /// radii read from --radii
    Explicit,
}

#[derive(Debug, Args)]
pub struct BoundUrchinArgs {
    #[arg(long, value_enum)]
    pub kind: UrchinKindArg,
    /// δ for the geometric kind, in (0, 1).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Whitespace-separated radii r_1, r_2, ... for the explicit kind.
    #[arg(long)]
    pub radii: Option<PathBuf>,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long)]
    pub lambda: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn read_numbers(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let nums = line
            .split_whitespace()
            .map(|w| w.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Input {
                path: path.to_path_buf(),
                detail: format!("line {}: {e}", no + 1),
            })?;
        lines.push(nums);
    }
    Ok(lines)
}

fn urchin_sequence(args: &BoundUrchinArgs) -> Result<UrchinSequence, CliError> {
    let usage = |m: &str| CliError::Usage(m.to_string());
    if args.delta.is_some() && args.kind != UrchinKindArg::Geometric {
        return Err(usage("--delta only applies to --kind geometric"));
    }
    if args.radii.is_some() && args.kind != UrchinKindArg::Explicit {
        return Err(usage("--radii only applies to --kind explicit"));
    }
    Ok(match args.kind {
        UrchinKindArg::Linear => UrchinSequence::linear(),
        UrchinKindArg::ExpOverSqrt => UrchinSequence::exp_over_sqrt(),
        UrchinKindArg::Geometric => {
            let delta = args
                .delta
                .ok_or_else(|| usage("--kind geometric needs --delta"))?;
            UrchinSequence::geometric(delta)?
        }
        UrchinKindArg::Explicit => {
            let path = args
                .radii
                .as_deref()
                .ok_or_else(|| usage("--kind explicit needs --radii FILE"))?;
            let radii: Vec<f64> = read_numbers(path)?.into_iter().flatten().collect();
            UrchinSequence::explicit(radii).map_err(|e| CliError::Input {
                path: path.to_path_buf(),
                detail: e.to_string(),
            })?
        }
    })
}

pub fn bound_urchin(args: &BoundUrchinArgs) -> Result<RunReport, CliError> {
    check_sigma(args.sigma)?;
    let lambdas = parse_grid(&args.lambda)?;
    let seq = urchin_sequence(args)?;
    let sigma = args.sigma;
    let mut report = RunReport::new(
        "bound urchin",
        &["lambda", "n_hat", "r_hat", "upper", "lower", "vdb_upper"],
    );
    report.param("kind", seq.kind());
    report.param("sigma", sigma);
    report.param("lambda", &args.lambda);
    report.param("validation", seq.validation());
    for p in &seq.validation().problems {
        report.flag("sequence", p, None);
    }
    if sigma > 0.0 {
        report.summary.insert(
            "vdb_upper".into(),
            json!("lambda^sigma times the van den Berg counting bound"),
        );
    }

    let rows = par_map(&lambdas, |&lambda| -> Result<_, CoreError> {
        let idx = urchin_index(&seq, lambda)?;
        let upper = urchin_upper_lemma36(&seq, sigma, lambda)?;
        let lower = urchin_lower_lemma37_exact(&seq, sigma, lambda)?;
        let vdb = urchin_vdb_counting(&seq, lambda)?;
        Ok((idx, upper, lower, vdb))
    });
    for (i, (lambda, row)) in lambdas.iter().zip(rows).enumerate() {
        match row {
            Ok((idx, upper, lower, vdb)) => {
                for r in [&upper, &lower, &vdb] {
                    flag_violations(&mut report, r, i);
                }
                let (n_hat, r_hat) = match idx {
                    IndexOutcome::Found(ix) => (Cell::Int(ix.n_hat as u64), Cell::Num(ix.r_hat)),
                    IndexOutcome::BelowThreshold { .. } => (Cell::Int(0), Cell::Empty),
                };
                let vdb_upper = if sigma == 0.0 {
                    vdb.value
                } else {
                    vdb.value * lambda.powf(sigma)
                };
                report.push_row(vec![
                    (*lambda).into(),
                    n_hat,
                    r_hat,
                    upper.value.into(),
                    lower.value.into(),
                    vdb_upper.into(),
                ]);
            }
            // an explicit list that ends too early: keep the row, flag it
            Err(CoreError::Argument(msg)) => {
                report.flag("data", msg, Some(i));
                let mut cells = vec![Cell::Num(*lambda)];
                cells.resize(6, Cell::Empty);
                report.push_row(cells);
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PotentialKind {
    /// --depth on (--start, --end)
    Well,
    /// --amplitude·exp(−(t − --center)²/(2 --width²))
    Gauss,
    /// two-column (t, V) samples from --file
    File,
}

#[derive(Debug, Args)]
pub struct Lt1dArgs {
    #[arg(long, value_enum)]
    pub potential: PotentialKind,
    /// Support length l of the built-in potentials.
    #[arg(long, default_value_t = 1.0)]
    pub length: f64,
    #[arg(long)]
    pub depth: Option<f64>,
    #[arg(long)]
    pub start: Option<f64>,
    #[arg(long)]
    pub end: Option<f64>,
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long)]
    pub center: Option<f64>,
    #[arg(long)]
    pub width: Option<f64>,
    /// Samples on a uniform grid, strictly increasing t.
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Riesz orders, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,1.5,2")]
    pub sigma: Vec<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Relative spread allowed between sample spacings.
const SPACING_TOL: f64 = 1e-9;
/// R_σ from the solver may exceed the bound by this relative amount.
const DOMINANCE_TOL: f64 = 1e-8;
const GAP_IDENTITY_TOL: f64 = 1e-4;

/// Reads (t, V) pairs; t must be strictly increasing and uniformly spaced.
pub fn read_sampled_potential(path: &Path) -> Result<(f64, Vec<f64>), CliError> {
    let bad = |detail: String| CliError::Input {
        path: path.to_path_buf(),
        detail,
    };
    let lines = read_numbers(path)?;
    if lines.len() < 2 {
        return Err(bad("need at least two samples".into()));
    }
    let mut ts = Vec::with_capacity(lines.len());
    let mut vs = Vec::with_capacity(lines.len());
    for (i, l) in lines.iter().enumerate() {
        match l.as_slice() {
            [t, v] if t.is_finite() && v.is_finite() && *v >= 0.0 => {
                ts.push(*t);
                vs.push(*v);
            }
            [_, _] => return Err(bad(format!("sample {}: need finite t and V >= 0", i + 1))),
            _ => return Err(bad(format!("sample {}: expected two columns", i + 1))),
        }
    }
    let length = ts[ts.len() - 1] - ts[0];
    let step = length / (ts.len() - 1) as f64;
    for (i, w) in ts.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(bad(format!("t is not strictly increasing at sample {}", i + 2)));
        }
        if ((w[1] - w[0]) - step).abs() > SPACING_TOL * step {
            return Err(bad(format!(
                "t is not uniformly spaced at sample {} (step {} vs {step})",
                i + 2,
                w[1] - w[0]
            )));
        }
    }
    Ok((length, vs))
}

fn lt1d_potential(args: &Lt1dArgs) -> Result<PotentialProfile1D, CliError> {
    let need = |v: Option<f64>, name: &str| {
        v.ok_or_else(|| CliError::Usage(format!("--potential needs --{name}")))
    };
    Ok(match args.potential {
        PotentialKind::Well => {
            let depth = need(args.depth, "depth")?;
            let start = args.start.unwrap_or(0.0);
            let end = args.end.unwrap_or(args.length);
            PotentialProfile1D::square_well(args.length, depth, start, end)?
        }
        PotentialKind::Gauss => PotentialProfile1D::new(
            args.length,
            PotentialShape::Gaussian {
                amplitude: need(args.amplitude, "amplitude")?,
                center: args.center.unwrap_or(0.5 * args.length),
                width: need(args.width, "width")?,
            },
        )?,
        PotentialKind::File => {
            let path = args
                .file
                .as_deref()
                .ok_or_else(|| CliError::Usage("--potential file needs --file PATH".into()))?;
            let (length, values) = read_sampled_potential(path)?;
            PotentialProfile1D::new(length, PotentialShape::Sampled(values))?
        }
    })
}

pub fn lt1d(args: &Lt1dArgs) -> Result<RunReport, CliError> {
    for &s in &args.sigma {
        check_sigma(s)?;
    }
    let pot = lt1d_potential(args)?;
    let mut report = RunReport::new(
        "lt1d",
        &[
            "sigma",
            "a",
            "bound",
            "lt_value",
            "remainder",
            "solver_riesz",
            "eigenvalue_count",
            "eigenvalues",
            "gap_residual",
            "dominance",
        ],
    );
    report.param("potential", pot.shape());
    report.param("length", pot.length());
    report.param("sigma", &args.sigma);
    report.tolerance("quad_tol", pot.quad_tol());
    report.tolerance("dominance_rel", DOMINANCE_TOL);
    report.tolerance("gap_identity_rel", GAP_IDENTITY_TOL);

    let (spectrum, gap) = std::thread::scope(|s| {
        let gap = s.spawn(|| -> Result<Option<f64>, CoreError> {
            let a = pot.length() * pot.integral()?;
            if a <= TWO_LN_3 {
                return Ok(None);
            }
            let c = eq33_identity_check(&pot, 1, pot.quad_tol())?;
            Ok(Some((c.gap_direct - c.gap_integral).abs() / c.gap_direct.abs()))
        });
        let spectrum = eigen_interval(&pot, BoundaryAngles::dirichlet());
        (spectrum, gap.join().expect("gap identity thread"))
    });
    let spectrum = spectrum?;
    let gap = match gap {
        Ok(g) => g,
        // the Dirichlet problem can lack a bound state even above 2 ln 3
        Err(CoreError::Domain { detail, .. }) => {
            report.flag("gap_identity", detail, None);
            None
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(g) = gap.filter(|g| *g > GAP_IDENTITY_TOL) {
        report.flag("gap_identity", format!("relative residual {g} exceeds tolerance"), None);
    }
    let eigen_text = spectrum
        .values
        .iter()
        .map(|v| crate::report::render_f64(-v))
        .collect::<Vec<_>>()
        .join(";");
    report.summary.insert("eigenvalues".into(), json!(spectrum.values.iter().map(|v| -v).collect::<Vec<_>>()));

    for (i, &sigma) in args.sigma.iter().enumerate() {
        let b = thm41_bound(&pot, sigma)?;
        flag_violations(&mut report, &b, i);
        let solver = spectrum.riesz_mean(sigma);
        let dominance = solver <= b.value + DOMINANCE_TOL * b.value.max(1.0);
        if !dominance {
            report.flag("dominance", "solver Riesz mean exceeds the bound", Some(i));
        }
        report.push_row(vec![
            sigma.into(),
            b.get("a").into(),
            b.value.into(),
            b.get("lt_value").into(),
            b.get("remainder").into(),
            solver.into(),
            Cell::Int(spectrum.len() as u64),
            Cell::Text(eigen_text.clone()),
            gap.into(),
            dominance.into(),
        ]);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyDomain {
    /// {|x|·|y|^ν < 1}, ν > 1
    Horn,
    /// the critical horn |xy| < 1, rasterized after a 45° turn
    Critical,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub domain: VerifyDomain,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long)]
    pub lambda: String,
    /// Grid spacing; the refinement uses h/2.
    #[arg(long)]
    pub h: f64,
    /// Truncation safety factor c >= 2.
    #[arg(long, default_value_t = 2.0)]
    pub safety: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn verify(args: &VerifyArgs) -> Result<RunReport, CliError> {
    check_sigma(args.sigma)?;
    if !(args.h > 0.0) || !args.h.is_finite() {
        return Err(CliError::Usage(format!("--h must be positive, got {}", args.h)));
    }
    let lambdas = parse_grid(&args.lambda)?;
    let (domain, horn) = match (args.domain, args.nu) {
        (VerifyDomain::Horn, Some(nu)) if nu > 1.0 => {
            (PlanarDomain::Horn { nu }, HornRegion::new(2, nu)?)
        }
        (VerifyDomain::Horn, Some(nu)) => {
            return Err(CliError::Usage(format!(
                "--domain horn needs --nu > 1, got {nu}; use --domain critical for nu = 1"
            )))
        }
        (VerifyDomain::Horn, None) => {
            return Err(CliError::Usage("--domain horn needs --nu".into()))
        }
        (VerifyDomain::Critical, None) => (PlanarDomain::RotatedCritical, HornRegion::critical()),
        (VerifyDomain::Critical, Some(_)) => {
            return Err(CliError::Usage("--nu does not apply to --domain critical".into()))
        }
    };
    let policy = TruncationPolicy::new(args.safety)?;
    let opts = SolverOptions::default();
    let sweep = empirical_riesz_sweep(&domain, args.sigma, &lambdas, args.h, policy, opts)?;

    let mut report = RunReport::new(
        "verify",
        &[
            "lambda",
            "empirical",
            "refined",
            "refinement_delta",
            "bound",
            "ratio",
            "dominance",
        ],
    );
    report.param("domain", &domain);
    report.param("sigma", args.sigma);
    report.param("lambda", &args.lambda);
    report.param("h", args.h);
    report.param("safety", args.safety);
    report.param("truncation", sweep.diagnostics.truncation);
    report.summary.insert("diagnostics".into(), json!(sweep.diagnostics));
    report.tolerance("solver_residual", opts.tol);

    for (i, row) in sweep.rows.iter().enumerate() {
        let b = horn_bound(&horn, args.sigma, row.lambda)?;
        flag_violations(&mut report, &b, i);
        let ratio = (b.value > 0.0).then(|| row.value / b.value);
        // dominance after removing the discretization error estimate
        let dominance = row.value - row.refinement_delta.abs() <= b.value;
        if !dominance {
            report.flag("dominance", "empirical value exceeds the bound", Some(i));
        }
        report.push_row(vec![
            row.lambda.into(),
            row.value.into(),
            row.refined_value.into(),
            row.refinement_delta.into(),
            b.value.into(),
            ratio.into(),
            dominance.into(),
        ]);
    }
    Ok(report)
}

#[derive(Debug, Args)]
pub struct Lt2dArgs {
    /// Potential exponent α in λ|x|^α|y|^{−α}.
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long)]
    pub lambda: String,
    /// Relative tolerance of the direct quadrature.
    #[arg(long, default_value_t = 1e-10)]
    pub quad_tol: f64,
    /// Tolerance of the sectioned bound.
    #[arg(long, default_value_t = 1e-8)]
    pub section_tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Least-squares slope of ln y against ln x.
fn log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn lt2d(args: &Lt2dArgs) -> Result<RunReport, CliError> {
    check_sigma(args.sigma)?;
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(CliError::Usage(format!("--alpha must lie in (0, 1), got {}", args.alpha)));
    }
    for (name, t) in [("--quad-tol", args.quad_tol), ("--section-tol", args.section_tol)] {
        if !(t > 0.0) {
            return Err(CliError::Usage(format!("{name} must be positive")));
        }
    }
    let lambdas = parse_grid(&args.lambda)?;
    let (alpha, sigma) = (args.alpha, args.sigma);
    let mut report = RunReport::new(
        "lt2d",
        &["lambda", "closed_form", "quadrature", "agreement", "sectioned_bound"],
    );
    report.param("alpha", alpha);
    report.param("sigma", sigma);
    report.param("lambda", &args.lambda);
    report.tolerance("quad_tol", args.quad_tol);
    report.tolerance("section_tol", args.section_tol);

    let divergent = alpha * (sigma + 1.0) >= 1.0;
    if divergent {
        report.flag(
            "divergent",
            "alpha (sigma + 1) >= 1: the integral over the effective domain diverges",
            None,
        );
    }
    let rows = par_map(&lambdas, |&lambda| -> Result<_, CoreError> {
        if divergent {
            return Ok(None);
        }
        let closed = example43_bound(alpha, sigma, lambda)?;
        let quad = example43_quadrature(alpha, sigma, lambda, args.quad_tol)?;
        let sd = example43_domain(alpha, lambda, 1.5 * example43_cutoff(alpha, lambda))?;
        let sectioned = thm45_bound(&sd, sigma, args.section_tol)?;
        Ok(Some((closed, quad, sectioned.value)))
    });
    let mut points = Vec::new();
    for (i, (&lambda, row)) in lambdas.iter().zip(rows).enumerate() {
        match row? {
            None => {
                report.flag("divergent", "no finite bound", Some(i));
                report.push_row(vec![lambda.into(), Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty]);
            }
            Some((closed, quad, sectioned)) => {
                flag_violations(&mut report, &closed, i);
                let agreement = (closed.value - quad).abs() / quad.abs();
                points.push((lambda, closed.value));
                report.push_row(vec![
                    lambda.into(),
                    closed.value.into(),
                    quad.into(),
                    agreement.into(),
                    sectioned.into(),
                ]);
            }
        }
    }
    if alpha >= 0.4 {
        report.flag("hypothesis", "alpha >= 2/5", None);
    }
    let expected = (sigma + 1.0) / (1.0 - alpha);
    let slope = log_slope(&points);
    report.summary.insert("slope".into(), json!(slope));
    report.summary.insert("expected_slope".into(), json!(expected));
    report
        .summary
        .insert("slope_error".into(), json!(slope.map(|s| (s - expected).abs())));
    Ok(report)
}
