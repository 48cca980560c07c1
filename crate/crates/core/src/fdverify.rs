//! Independent spectra for checking the bounds: exact Dirichlet squares and
//! a five-point finite-difference Laplacian on rasterized planar domains.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{domain, numerical, Error, Result};
use crate::riesz::{riesz_sum, EigenvalueSpectrum, Exactness};

/// All π²(j² + k²)/l² ≤ Λ_max with j, k ≥ 1, with multiplicity.
pub fn square_spectrum(side: f64, lambda_max: f64) -> Result<EigenvalueSpectrum> {
    if !(side > 0.0) || !side.is_finite() || !(lambda_max > 0.0) || !lambda_max.is_finite() {
        return Err(domain(
            "square_spectrum",
            format!("side and lambda_max must be positive, got ({side}, {lambda_max})"),
        ));
    }
    let unit = PI * PI / (side * side);
    let mut values = Vec::new();
    let mut j = 1u64;
    while unit * (j * j + 1) as f64 <= lambda_max {
        let mut k = 1u64;
        loop {
            let e = unit * (j * j + k * k) as f64;
            if e > lambda_max {
                break;
            }
            values.push(e);
            k += 1;
        }
        j += 1;
    }
    EigenvalueSpectrum::exact(values)
}

/// Planar domains the verifier knows how to rasterize.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PlanarDomain {
    /// {|x|·|y|^ν < 1}.
    Horn { nu: f64 },
    /// {|u² − v²| < 2}, the critical horn {|xy| < 1} turned by 45°.
    RotatedCritical,
    /// (0, l)².
    Square { side: f64 },
    /// {x² + y² < r²}.
    Disk { radius: f64 },
}

impl PlanarDomain {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            PlanarDomain::Horn { nu } => x.abs() * y.abs().powf(nu) < 1.0,
            PlanarDomain::RotatedCritical => (x * x - y * y).abs() < 2.0,
            PlanarDomain::Square { side } => x > 0.0 && x < side && y > 0.0 && y < side,
            PlanarDomain::Disk { radius } => x * x + y * y < radius * radius,
        }
    }

    /// Whether the domain is invariant under x ↦ −x and y ↦ −y about the
    /// raster centre.
    pub fn is_doubly_symmetric(&self) -> bool {
        !matches!(self, PlanarDomain::Square { .. })
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            PlanarDomain::Horn { nu } => nu > 0.0 && nu.is_finite(),
            PlanarDomain::RotatedCritical => true,
            PlanarDomain::Square { side } => side > 0.0 && side.is_finite(),
            PlanarDomain::Disk { radius } => radius > 0.0 && radius.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(domain(
                "PlanarDomain",
                format!("invalid parameters in {self:?}"),
            ))
        }
    }
}

/// Half-extents of the box a domain is truncated to before rasterizing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Truncation {
    pub x_extent: f64,
    pub y_extent: f64,
}

/// Where to cut the cusps of an unbounded domain so that the discarded
/// pieces are thinner than π/√Λ, times a safety factor c ≥ 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationPolicy {
    safety: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self { safety: 2.0 }
    }
}

impl TruncationPolicy {
    pub fn new(safety: f64) -> Result<Self> {
        if !(safety >= 2.0) || !safety.is_finite() {
            return Err(domain(
                "TruncationPolicy",
                format!("safety factor must be >= 2, got {safety}"),
            ));
        }
        Ok(Self { safety })
    }

    pub fn safety(&self) -> f64 {
        self.safety
    }

    /// For {|x||y|^ν < 1} the section across the x-cusp at |x| = X has
    /// width 2X^{−1/ν}, across the y-cusp at |y| = Y width 2Y^{−ν}; both
    /// fall below π/√Λ at X = s^ν, Y = s^{1/ν} with s = 2√Λ/π.
    pub fn truncation(&self, d: &PlanarDomain, lambda: f64) -> Result<Truncation> {
        d.validate()?;
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(domain(
                "TruncationPolicy::truncation",
                format!("lambda must be positive, got {lambda}"),
            ));
        }
        let s = 2.0 * lambda.sqrt() / PI;
        let c = self.safety;
        Ok(match *d {
            PlanarDomain::Horn { nu } => Truncation {
                x_extent: c * s.powf(nu),
                y_extent: c * s.powf(1.0 / nu),
            },
            // the arms run along the diagonals; the box contains every arm
            // point whose original coordinate is below c·s
            PlanarDomain::RotatedCritical => Truncation {
                x_extent: c * s,
                y_extent: c * s,
            },
            PlanarDomain::Square { side } => Truncation {
                x_extent: side,
                y_extent: side,
            },
            PlanarDomain::Disk { radius } => Truncation {
                x_extent: radius,
                y_extent: radius,
            },
        })
    }
}

const NONE: u32 = u32::MAX;

/// Grid nodes (x_0 + i h, y_0 + j h) strictly inside the domain; excluded
/// nodes carry the Dirichlet condition.
#[derive(Debug, Clone)]
pub struct RasterDomain {
    origin: (f64, f64),
    h: f64,
    nx: usize,
    ny: usize,
    /// Node (i, j) ↦ unknown index, `NONE` outside.
    index: Vec<u32>,
    /// Unknown ↦ indices of its four neighbours, `NONE` outside.
    neighbours: Vec<[u32; 4]>,
    /// Stencil weight of each neighbour; 1 except next to a mirror axis.
    weights: Vec<[f64; 4]>,
}

/// Behaviour of an eigenfunction under reflection of one coordinate axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

/// The four sectors (x parity, y parity) of a raster symmetric in both axes.
pub const PARITY_SECTORS: [(Parity, Parity); 4] = [
    (Parity::Even, Parity::Even),
    (Parity::Odd, Parity::Even),
    (Parity::Even, Parity::Odd),
    (Parity::Odd, Parity::Odd),
];

impl RasterDomain {
    /// Nodes i·h, j·h with |i h| ≤ x_extent, |j h| ≤ y_extent where
    /// `inside` holds.
    pub fn centered(
        x_extent: f64,
        y_extent: f64,
        h: f64,
        inside: impl Fn(f64, f64) -> bool,
    ) -> Result<Self> {
        if !(h > 0.0) || !(x_extent > 0.0) || !(y_extent > 0.0) {
            return Err(domain(
                "RasterDomain::centered",
                format!("h and extents must be positive, got h = {h}, ({x_extent}, {y_extent})"),
            ));
        }
        let mx = (x_extent / h).floor() as usize;
        let my = (y_extent / h).floor() as usize;
        let (ox, oy) = (-(mx as f64), -(my as f64));
        Self::build(h, (ox * h, oy * h), 2 * mx + 1, 2 * my + 1, (false, false), |i, j| {
            inside((ox + i as f64) * h, (oy + j as f64) * h)
        })
    }

    /// The quarter i, j ≥ 0 of [`RasterDomain::centered`] carrying the
    /// eigenvectors of the given parity, for masks symmetric in both axes.
    /// Odd sectors drop the nodes on their axis; even sectors reflect the
    /// stencil there. The operator is symmetrized with the node multiplicities,
    /// so its eigenvalues are exactly those of the full raster in that sector.
    pub fn centered_sector(
        x_extent: f64,
        y_extent: f64,
        h: f64,
        inside: impl Fn(f64, f64) -> bool,
        parity: (Parity, Parity),
    ) -> Result<Self> {
        if !(h > 0.0) || !(x_extent > 0.0) || !(y_extent > 0.0) {
            return Err(domain(
                "RasterDomain::centered_sector",
                format!("h and extents must be positive, got h = {h}, ({x_extent}, {y_extent})"),
            ));
        }
        let mx = (x_extent / h).floor() as usize;
        let my = (y_extent / h).floor() as usize;
        let (ex, ey) = (parity.0 == Parity::Even, parity.1 == Parity::Even);
        Self::build(h, (0.0, 0.0), mx + 1, my + 1, (ex, ey), |i, j| {
            (i > 0 || ex) && (j > 0 || ey) && inside(i as f64 * h, j as f64 * h)
        })
    }

    /// The l_x × l_y rectangle with n_x × n_y cells; interior nodes only.
    pub fn rectangle(cells_x: usize, cells_y: usize, h: f64) -> Result<Self> {
        if !(h > 0.0) || cells_x == 0 || cells_y == 0 {
            return Err(domain(
                "RasterDomain::rectangle",
                "needs h > 0 and at least one cell per side",
            ));
        }
        Self::build(h, (0.0, 0.0), cells_x + 1, cells_y + 1, (false, false), |i, j| {
            i > 0 && i < cells_x && j > 0 && j < cells_y
        })
    }

    /// Rasterizes the truncation of `d` at grid spacing `h`. Boxed domains
    /// (square, disk) use their natural box.
    pub fn from_domain(d: &PlanarDomain, t: Truncation, h: f64) -> Result<Self> {
        d.validate()?;
        match *d {
            PlanarDomain::Square { side } => {
                let n = (side / h).round() as usize;
                if n == 0 || ((n as f64) * h - side).abs() > 1e-9 * side {
                    return Err(domain(
                        "RasterDomain::from_domain",
                        format!("h = {h} does not divide the side {side}"),
                    ));
                }
                Self::rectangle(n, n, h)
            }
            _ => Self::centered(t.x_extent, t.y_extent, h, |x, y| d.contains(x, y)),
        }
    }

    /// `mirror.0` reflects index −1 onto 1 along x (likewise `mirror.1`);
    /// a node on a mirror axis then stands for one node of the full grid and
    /// every other node for two.
    fn build(
        h: f64,
        origin: (f64, f64),
        nx: usize,
        ny: usize,
        mirror: (bool, bool),
        inside: impl Fn(usize, usize) -> bool,
    ) -> Result<Self> {
        if nx.checked_mul(ny).is_none_or(|n| n >= NONE as usize) {
            return Err(Error::Argument(format!("grid {nx} x {ny} is too large")));
        }
        let mut index = vec![NONE; nx * ny];
        let mut count = 0u32;
        for j in 0..ny {
            for i in 0..nx {
                if inside(i, j) {
                    index[j * nx + i] = count;
                    count += 1;
                }
            }
        }
        let reflect = |k: isize, on: bool| if on && k == -1 { 1 } else { k };
        let at = |i: isize, j: isize| {
            let (i, j) = (reflect(i, mirror.0), reflect(j, mirror.1));
            if i < 0 || j < 0 || i as usize >= nx || j as usize >= ny {
                NONE
            } else {
                index[j as usize * nx + i as usize]
            }
        };
        let multiplicity = |i: isize, j: isize| {
            let (i, j) = (reflect(i, mirror.0), reflect(j, mirror.1));
            let axis = |k: isize, on: bool| if on && k == 0 { 1.0f64 } else { 2.0 };
            axis(i, mirror.0) * axis(j, mirror.1)
        };
        let mut neighbours = Vec::with_capacity(count as usize);
        let mut weights = Vec::with_capacity(count as usize);
        for j in 0..ny as isize {
            for i in 0..nx as isize {
                if at(i, j) != NONE {
                    let cells = [(i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)];
                    let w0 = multiplicity(i, j);
                    neighbours.push(cells.map(|(a, b)| at(a, b)));
                    weights.push(cells.map(|(a, b)| (w0 / multiplicity(a, b)).sqrt()));
                }
            }
        }
        Ok(Self {
            origin,
            h,
            nx,
            ny,
            index,
            neighbours,
            weights,
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Number of unknowns.
    pub fn len(&self) -> usize {
        self.neighbours.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbours.is_empty()
    }

    pub fn grid_shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    /// Whether grid node (i, j) is an unknown.
    pub fn is_inside(&self, i: usize, j: usize) -> bool {
        i < self.nx && j < self.ny && self.index[j * self.nx + i] != NONE
    }

    pub fn node_position(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.origin.0 + i as f64 * self.h,
            self.origin.1 + j as f64 * self.h,
        )
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let s = 1.0 / (self.h * self.h);
        for (k, (nb, w)) in self.neighbours.iter().zip(&self.weights).enumerate() {
            let mut acc = 4.0 * x[k];
            for (&m, &c) in nb.iter().zip(w) {
                if m != NONE {
                    acc -= c * x[m as usize];
                }
            }
            y[k] = s * acc;
        }
    }

    fn apply_block(&self, x: &DMatrix<f64>, y: &mut DMatrix<f64>) {
        for c in 0..x.ncols() {
            self.apply(x.column(c).as_slice(), y.column_mut(c).as_mut_slice());
        }
    }

    fn dense_matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        let s = 1.0 / (self.h * self.h);
        let mut a = DMatrix::zeros(n, n);
        for (k, (nb, w)) in self.neighbours.iter().zip(&self.weights).enumerate() {
            a[(k, k)] = 4.0 * s;
            for (&m, &c) in nb.iter().zip(w) {
                if m != NONE {
                    a[(k, m as usize)] -= c * s;
                }
            }
        }
        a
    }
}

/// 2π/√Λ_max must hold at least this many grid steps.
pub const NODES_PER_WAVELENGTH: f64 = 10.0;

/// Largest h accepted for eigenvalues up to `lambda_max`.
pub fn max_grid_spacing(lambda_max: f64) -> f64 {
    2.0 * PI / (NODES_PER_WAVELENGTH * lambda_max.sqrt())
}

fn resolution_guard(h: f64, lambda_max: f64) -> Result<()> {
    let hmax = max_grid_spacing(lambda_max);
    // the relative slack lets h = l/n land on the limit despite rounding
    if h > hmax * (1.0 + 1e-9) {
        return Err(Error::Resolution {
            h,
            lambda_max,
            suggested_h: hmax,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    /// Up to this many unknowns the matrix is diagonalized densely.
    pub dense_limit: usize,
    /// Ritz pairs are accepted when ‖Ax − θx‖ ≤ tol·‖A‖.
    pub tol: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            dense_limit: 3000,
            tol: 1e-10,
            max_iterations: 200,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    Dense,
    ChebyshevSubspace,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveDiagnostics {
    pub method: SolverMethod,
    pub unknowns: usize,
    pub iterations: usize,
    pub matvecs: usize,
    pub subspace: usize,
    /// Largest ‖Ax − θx‖ over the returned pairs.
    pub max_residual: f64,
    /// Number of independent blocks solved (4 for parity sectors).
    pub sectors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdSpectrum {
    pub spectrum: EigenvalueSpectrum,
    pub diagnostics: SolveDiagnostics,
}

/// Eigenvalues below `lambda_max` of the five-point Dirichlet Laplacian on
/// the raster.
pub fn fd_laplacian_spectrum(
    rd: &RasterDomain,
    lambda_max: f64,
    opts: SolverOptions,
) -> Result<FdSpectrum> {
    if !(lambda_max > 0.0) || !lambda_max.is_finite() {
        return Err(domain(
            "fd_laplacian_spectrum",
            format!("lambda_max must be positive, got {lambda_max}"),
        ));
    }
    resolution_guard(rd.h, lambda_max)?;
    let exactness = Exactness::Numerical { h: rd.h };
    let n = rd.len();
    if n == 0 {
        return Ok(FdSpectrum {
            spectrum: EigenvalueSpectrum::new(Vec::new(), exactness)?,
            diagnostics: SolveDiagnostics {
                method: SolverMethod::Dense,
                unknowns: 0,
                iterations: 0,
                matvecs: 0,
                subspace: 0,
                max_residual: 0.0,
                sectors: 1,
            },
        });
    }
    if n <= opts.dense_limit {
        let values = rd
            .dense_matrix()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .filter(|&e| e < lambda_max)
            .collect();
        return Ok(FdSpectrum {
            spectrum: EigenvalueSpectrum::new(values, exactness)?,
            diagnostics: SolveDiagnostics {
                method: SolverMethod::Dense,
                unknowns: n,
                iterations: 1,
                matvecs: 0,
                subspace: n,
                max_residual: 0.0,
                sectors: 1,
            },
        });
    }
    let (values, diagnostics) = chebyshev_subspace(rd, lambda_max, opts)?;
    Ok(FdSpectrum {
        spectrum: EigenvalueSpectrum::new(values, exactness)?,
        diagnostics,
    })
}

/// Eigenvalues below `lambda_max` of the raster of `d` truncated to `t`.
/// Doubly symmetric domains are solved one parity sector at a time, which
/// gives the same eigenvalues as the full raster with a quarter of the
/// unknowns per solve. Diagnostics are summed over sectors (`iterations`,
/// `subspace` and `max_residual` take the maximum).
pub fn fd_domain_spectrum(
    d: &PlanarDomain,
    t: Truncation,
    h: f64,
    lambda_max: f64,
    opts: SolverOptions,
) -> Result<FdSpectrum> {
    d.validate()?;
    if !d.is_doubly_symmetric() {
        return fd_laplacian_spectrum(&RasterDomain::from_domain(d, t, h)?, lambda_max, opts);
    }
    resolution_guard(h, lambda_max)?;
    let mut values = Vec::new();
    let mut total: Option<SolveDiagnostics> = None;
    for parity in PARITY_SECTORS {
        let rd = RasterDomain::centered_sector(t.x_extent, t.y_extent, h, |x, y| d.contains(x, y), parity)?;
        let part = fd_laplacian_spectrum(&rd, lambda_max, opts)?;
        values.extend_from_slice(part.spectrum.values());
        let dg = part.diagnostics;
        total = Some(match total {
            None => dg,
            Some(acc) => SolveDiagnostics {
                method: if dg.method == SolverMethod::ChebyshevSubspace {
                    dg.method
                } else {
                    acc.method
                },
                unknowns: acc.unknowns + dg.unknowns,
                iterations: acc.iterations.max(dg.iterations),
                matvecs: acc.matvecs + dg.matvecs,
                subspace: acc.subspace.max(dg.subspace),
                max_residual: acc.max_residual.max(dg.max_residual),
                sectors: acc.sectors + dg.sectors,
            },
        });
    }
    Ok(FdSpectrum {
        spectrum: EigenvalueSpectrum::new(values, Exactness::Numerical { h })?,
        diagnostics: total.expect("four sectors"),
    })
}

/// Orthonormal basis of the column span (thin Householder QR).
fn orthonormalize(y: DMatrix<f64>) -> DMatrix<f64> {
    y.qr().q()
}

struct Ritz {
    theta: Vec<f64>,
    x: DMatrix<f64>,
    ax: DMatrix<f64>,
    residuals: Vec<f64>,
}

fn rayleigh_ritz(rd: &RasterDomain, q: &DMatrix<f64>) -> Ritz {
    let mut aq = DMatrix::zeros(q.nrows(), q.ncols());
    rd.apply_block(q, &mut aq);
    let mut hm = q.tr_mul(&aq);
    hm = (&hm + hm.transpose()) * 0.5;
    let eig = SymmetricEigen::new(hm);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let v = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    let theta: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let x = q * &v;
    let ax = aq * &v;
    let residuals = (0..theta.len())
        .map(|c| (ax.column(c) - x.column(c) * theta[c]).norm())
        .collect();
    Ritz {
        theta,
        x,
        ax,
        residuals,
    }
}

/// Applies the scaled Chebyshev polynomial of degree m that damps [a, b]
/// and grows below a, normalized at `a0` (Zhou–Saad recurrence).
fn chebyshev_filter(
    rd: &RasterDomain,
    x: &DMatrix<f64>,
    ax: &DMatrix<f64>,
    m: usize,
    a: f64,
    b: f64,
    a0: f64,
) -> DMatrix<f64> {
    let e = 0.5 * (b - a);
    let c = 0.5 * (b + a);
    let mut sigma = e / (a0 - c);
    let sigma1 = sigma;
    let mut prev = x.clone();
    let mut cur = (ax - x * c) * (sigma1 / e);
    let mut work = DMatrix::zeros(x.nrows(), x.ncols());
    for _ in 2..=m {
        let sigma2 = 1.0 / (2.0 / sigma1 - sigma);
        rd.apply_block(&cur, &mut work);
        let next = (&work - &cur * c) * (2.0 * sigma2 / e) - &prev * (sigma * sigma2);
        prev = std::mem::replace(&mut cur, next);
        sigma = sigma2;
    }
    cur
}

fn random_block(rng: &mut ChaCha8Rng, n: usize, p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, p, |_, _| rng.random::<f64>() - 0.5)
}

/// Chebyshev-filtered subspace iteration for the lowest eigenpairs. The
/// block grows until its top Ritz values clear `lambda_max` with margin.
fn chebyshev_subspace(
    rd: &RasterDomain,
    lambda_max: f64,
    opts: SolverOptions,
) -> Result<(Vec<f64>, SolveDiagnostics)> {
    let n = rd.len();
    let h2 = rd.h * rd.h;
    // Gershgorin on the full raster bounds every eigenvalue by 8/h²; sector
    // operators are similar to restrictions of it
    let upper = 8.0 / h2;
    let tol = opts.tol * upper;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut p = 32.min(n);
    let mut q = orthonormalize(random_block(&mut rng, n, p));
    let mut ritz = rayleigh_ritz(rd, &q);
    let mut matvecs = p;
    for iteration in 1..=opts.max_iterations {
        let wanted = ritz.theta.partition_point(|&t| t < lambda_max);
        let guard = 8.max(p / 4);
        if wanted + guard > p && p < n {
            // keep the current vectors and add fresh directions
            let grow = (p / 2).max(guard).min(n - p);
            let mut y = DMatrix::zeros(n, p + grow);
            y.columns_mut(0, p).copy_from(&ritz.x);
            y.columns_mut(p, grow)
                .copy_from(&random_block(&mut rng, n, grow));
            p += grow;
            q = orthonormalize(y);
            ritz = rayleigh_ritz(rd, &q);
            matvecs += p;
            continue;
        }
        // the first pair above lambda_max must be converged too, so that
        // its Ritz value certifies the count
        let check = (wanted + 1).min(p);
        let max_res = ritz.residuals[..check].iter().copied().fold(0.0, f64::max);
        if max_res <= tol {
            let values = ritz.theta[..wanted].to_vec();
            return Ok((
                values,
                SolveDiagnostics {
                    method: SolverMethod::ChebyshevSubspace,
                    unknowns: n,
                    iterations: iteration,
                    matvecs,
                    subspace: p,
                    max_residual: max_res,
                    sectors: 1,
                },
            ));
        }
        let a = ritz.theta[p - 1];
        if !(a < upper) {
            return Err(numerical(
                "fd_laplacian_spectrum",
                "subspace reaches the top of the spectrum",
            ));
        }
        // degree chosen so the filter grows by ~1e2 at lambda_max relative
        // to the damped interval
        let gap = ((a - lambda_max.min(a)) / (upper - a)).max(1e-6);
        let m = ((100f64.ln() / (1.0 + 2.0 * gap).acosh()).ceil() as usize).clamp(8, 400);
        let y = chebyshev_filter(rd, &ritz.x, &ritz.ax, m, a, upper, ritz.theta[0].min(0.0));
        matvecs += (m - 1) * p;
        q = orthonormalize(y);
        ritz = rayleigh_ritz(rd, &q);
        matvecs += p;
    }
    Err(numerical(
        "fd_laplacian_spectrum",
        format!(
            "no convergence after {} iterations with {p} vectors on {n} unknowns",
            opts.max_iterations
        ),
    ))
}

/// Residual check for callers that hold an eigenpair of the raster operator.
pub fn fd_residual(rd: &RasterDomain, vector: &DVector<f64>, value: f64) -> Result<f64> {
    if vector.len() != rd.len() {
        return Err(Error::Argument(format!(
            "vector has {} entries, raster has {}",
            vector.len(),
            rd.len()
        )));
    }
    let mut y = vec![0.0; rd.len()];
    rd.apply(vector.as_slice(), &mut y);
    Ok(y.iter()
        .zip(vector.iter())
        .map(|(a, b)| (a - value * b).powi(2))
        .sum::<f64>()
        .sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalRow {
    pub lambda: f64,
    /// R_σ(Λ) of the raster at spacing h.
    pub value: f64,
    /// The same at h/2.
    pub refined_value: f64,
    /// value − refined_value.
    pub refinement_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalDiagnostics {
    pub truncation: Truncation,
    pub h: f64,
    pub nodes: usize,
    pub nodes_refined: usize,
    pub solver: SolveDiagnostics,
    pub solver_refined: SolveDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalRiesz {
    pub sigma: f64,
    pub rows: Vec<EmpiricalRow>,
    /// Spectrum at spacing h below the largest Λ.
    pub spectrum: EigenvalueSpectrum,
    pub diagnostics: EmpiricalDiagnostics,
}

/// Riesz means of the truncated, rasterized domain at every Λ in `lambdas`,
/// computed at spacing h and h/2. The truncation is taken for the largest Λ,
/// which is a larger domain than each smaller Λ needs.
pub fn empirical_riesz_sweep(
    d: &PlanarDomain,
    sigma: f64,
    lambdas: &[f64],
    h: f64,
    policy: TruncationPolicy,
    opts: SolverOptions,
) -> Result<EmpiricalRiesz> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(domain(
            "empirical_riesz",
            format!("sigma must be >= 0, got {sigma}"),
        ));
    }
    if lambdas.is_empty() {
        return Err(Error::Argument("empty lambda grid".into()));
    }
    if let Some(l) = lambdas.iter().find(|l| !(**l > 0.0) || !l.is_finite()) {
        return Err(domain(
            "empirical_riesz",
            format!("lambda must be positive, got {l}"),
        ));
    }
    let lambda_max = lambdas.iter().copied().fold(0.0, f64::max);
    resolution_guard(h, lambda_max)?;
    let truncation = policy.truncation(d, lambda_max)?;
    let coarse = fd_domain_spectrum(d, truncation, h, lambda_max, opts)?;
    let fine = fd_domain_spectrum(d, truncation, 0.5 * h, lambda_max, opts)?;
    let rows = lambdas
        .iter()
        .map(|&lambda| {
            let value = riesz_sum(coarse.spectrum.below(lambda), lambda, sigma);
            let refined_value = riesz_sum(fine.spectrum.below(lambda), lambda, sigma);
            EmpiricalRow {
                lambda,
                value,
                refined_value,
                refinement_delta: value - refined_value,
            }
        })
        .collect();
    Ok(EmpiricalRiesz {
        sigma,
        rows,
        spectrum: coarse.spectrum,
        diagnostics: EmpiricalDiagnostics {
            truncation,
            h,
            nodes: coarse.diagnostics.unknowns,
            nodes_refined: fine.diagnostics.unknowns,
            solver: coarse.diagnostics,
            solver_refined: fine.diagnostics,
        },
    })
}

/// [`empirical_riesz_sweep`] at a single Λ.
pub fn empirical_riesz(
    d: &PlanarDomain,
    sigma: f64,
    lambda: f64,
    h: f64,
    policy: TruncationPolicy,
) -> Result<EmpiricalRiesz> {
    empirical_riesz_sweep(d, sigma, &[lambda], h, policy, SolverOptions::default())
}
