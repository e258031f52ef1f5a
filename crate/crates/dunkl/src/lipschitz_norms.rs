//! Lipschitz-norm estimators on explicit grids, a corpus of test functions
//! with known Hölder exponent, and Bessel-potential smoothing.
//!
//! Every estimate is a maximum over finitely many points, hence a lower bound
//! of the quantity it approximates; comparisons use two-sided ratio bands.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::dunkl_kernel::{dunkl_apply, FunctionHandle, TrigSeries};
use crate::error::{DunklError, Result};
use crate::heat_poisson::{KernelEvaluator, KernelMode, SamplerOptions, SemigroupSampler, TimeGrid};
use crate::pool::par_map;
use crate::quadrature::{adaptive_integrate, adaptive_integrate_rel, gauss_jacobi, gauss_legendre, Interval};
use crate::root_system::RootSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Classical,
    Zygmund,
    HigherOrder,
    PoissonSemigroup,
    HeatSemigroup,
    DerivativeSplit,
}

impl EstimatorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Classical => "classical",
            Self::Zygmund => "zygmund",
            Self::HigherOrder => "higher_order",
            Self::PoissonSemigroup => "poisson_semigroup",
            Self::HeatSemigroup => "heat_semigroup",
            Self::DerivativeSplit => "derivative_split",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub kind: EstimatorKind,
    /// sup part plus seminorm part
    pub value: f64,
    pub seminorm: f64,
    pub sup_norm: f64,
    pub beta: f64,
    /// derivative order of the semigroup kinds
    pub m: Option<usize>,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub time_points: usize,
    pub grid_points: usize,
    pub pair_count: usize,
    pub tolerance: f64,
    /// (t, max_x |∂_t^m T_t f(x)|) for the semigroup kinds
    pub profile: Vec<(f64, f64)>,
}

impl NormEstimate {
    fn plain(kind: EstimatorKind, beta: f64, sup_norm: f64, seminorm: f64, grid: usize, pairs: usize) -> Self {
        Self {
            kind,
            value: sup_norm + seminorm,
            seminorm,
            sup_norm,
            beta,
            m: None,
            t_min: None,
            t_max: None,
            time_points: 0,
            grid_points: grid,
            pair_count: pairs,
            tolerance: 0.0,
            profile: Vec::new(),
        }
    }
}

// ---------------------------------------------------------------------------
// grids

/// Rank-one evaluation points, sorted and distinct.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceGrid {
    pub points: Vec<f64>,
    pub n_linear: usize,
    pub n_dyadic: usize,
    pub half_width: f64,
}

impl SpaceGrid {
    /// `n_linear` equispaced points on [−L, L], 0, and ±2^{-j} for j = 1..=n_dyadic/2.
    pub fn new(half_width: f64, n_linear: usize, n_dyadic: usize) -> Result<Self> {
        if n_linear < 2 || !(half_width > 0.0) {
            return Err(DunklError::Parameter("space grid needs at least 2 points and a positive width".into()));
        }
        let mut points: Vec<f64> = (0..n_linear)
            .map(|i| -half_width + 2.0 * half_width * i as f64 / (n_linear - 1) as f64)
            .collect();
        points.push(0.0);
        for j in 1..=n_dyadic / 2 {
            let p = 2f64.powi(-(j as i32));
            points.push(p);
            points.push(-p);
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        Ok(Self { points, n_linear, n_dyadic, half_width })
    }

    /// 512 points on [−π, π] plus 64 dyadic points clustered at 0.
    pub fn default_grid() -> Self {
        Self::new(std::f64::consts::PI, 512, 64).unwrap()
    }

    pub fn from_points(mut points: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.iter().any(|p| !p.is_finite()) {
            return Err(DunklError::Parameter("space grid must be a nonempty set of finite points".into()));
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        let hw = points.iter().fold(0.0f64, |a, p| a.max(p.abs()));
        let n = points.len();
        Ok(Self { points, n_linear: n, n_dyadic: 0, half_width: hw })
    }

    /// A superset: linear spacing halved, twice as many dyadic points.
    pub fn doubled(&self) -> Self {
        let mut g = Self::new(self.half_width, 2 * self.n_linear - 1, 2 * self.n_dyadic).unwrap();
        g.points.extend_from_slice(&self.points);
        g.points.sort_by(f64::total_cmp);
        g.points.dedup();
        g
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        let mut g = self.clone();
        g.points.iter_mut().for_each(|p| *p *= lambda);
        if lambda < 0.0 {
            g.points.reverse();
        }
        g.half_width *= lambda.abs();
        g
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Nonnegative points |x| that represent the grid for even functions.
    pub fn folded(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.points.iter().map(|p| p.abs()).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }
}

// ---------------------------------------------------------------------------
// classical estimators

fn check_beta(beta: f64, lo: f64, hi: f64, what: &str) -> Result<()> {
    if beta > lo && beta < hi {
        Ok(())
    } else {
        Err(DunklError::Parameter(format!("{what} needs {lo} < β < {hi} (got {beta})")))
    }
}

fn nonempty(grid: &SpaceGrid) -> Result<()> {
    if grid.is_empty() {
        Err(DunklError::Parameter("empty space grid".into()))
    } else {
        Ok(())
    }
}

fn grid_sup(vals: &[f64]) -> f64 {
    vals.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

fn holder_quotient_max(xs: &[f64], vals: &[f64], beta: f64) -> f64 {
    let mut best = 0.0f64;
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            let d = (xs[j] - xs[i]).abs();
            if d > 0.0 {
                best = best.max((vals[j] - vals[i]).abs() / d.powf(beta));
            }
        }
    }
    best
}

/// ‖f‖_∞ + max over grid pairs of |f(x)−f(x′)|/|x−x′|^β, 0 < β < 1.
pub fn classical_lip_norm(f: &FunctionHandle, beta: f64, grid: &SpaceGrid) -> Result<NormEstimate> {
    check_beta(beta, 0.0, 1.0, "classical_lip_norm")?;
    nonempty(grid)?;
    Ok(classical_unchecked(f, beta, grid))
}

fn classical_unchecked(f: &FunctionHandle, beta: f64, grid: &SpaceGrid) -> NormEstimate {
    let vals: Vec<f64> = grid.points.iter().map(|&x| f.eval1(x)).collect();
    let n = grid.len();
    let semi = holder_quotient_max(&grid.points, &vals, beta);
    NormEstimate::plain(EstimatorKind::Classical, beta, grid_sup(&vals), semi, n, n * (n - 1) / 2)
}

/// ‖f‖_∞ + max over x in the grid and steps y ∈ |grid| \ {0} of
/// |f(x+y)+f(x−y)−2f(x)|/|y|^β, 0 < β < 2.
pub fn zygmund_seminorm(f: &FunctionHandle, beta: f64, grid: &SpaceGrid) -> Result<NormEstimate> {
    check_beta(beta, 0.0, 2.0, "zygmund_seminorm")?;
    nonempty(grid)?;
    Ok(zygmund_unchecked(f, beta, grid))
}

fn zygmund_unchecked(f: &FunctionHandle, beta: f64, grid: &SpaceGrid) -> NormEstimate {
    let steps: Vec<f64> = grid.folded().into_iter().filter(|s| *s > 0.0).collect();
    let vals: Vec<f64> = grid.points.iter().map(|&x| f.eval1(x)).collect();
    let rows = par_map(&grid.points, |&x| {
        let fx = f.eval1(x);
        steps
            .iter()
            .map(|&y| (f.eval1(x + y) + f.eval1(x - y) - 2.0 * fx).abs() / y.powf(beta))
            .fold(0.0f64, f64::max)
    });
    let semi = rows.into_iter().fold(0.0f64, f64::max);
    NormEstimate::plain(EstimatorKind::Zygmund, beta, grid_sup(&vals), semi, grid.len(), grid.len() * steps.len())
}

/// Σ_{i<n} ‖f^{(i)}‖_∞ + the classical (or, at exponent 1, Zygmund) norm of
/// f^{(n)} at β − n, with n = ⌊β⌋ for β ∉ ℤ and β − 1 otherwise.
pub fn higher_order_classical_norm(f: &FunctionHandle, beta: f64, grid: &SpaceGrid) -> Result<NormEstimate> {
    if !(beta > 1.0) {
        return Err(DunklError::Parameter(format!("higher_order_classical_norm needs β > 1 (got {beta})")));
    }
    nonempty(grid)?;
    let n = if beta.fract() == 0.0 { beta as usize - 1 } else { beta.floor() as usize };
    let mut lower = 0.0;
    for i in 0..n {
        let d = f
            .derivative_handle(i)
            .ok_or_else(|| DunklError::Function(format!("{} has no derivative of order {i}", f.name)))?;
        lower += grid_sup(&grid.points.iter().map(|&x| d.eval1(x)).collect::<Vec<_>>());
    }
    let top = f
        .derivative_handle(n)
        .ok_or_else(|| DunklError::Function(format!("{} has no derivative of order {n}", f.name)))?;
    let r = beta - n as f64;
    let part = if r < 1.0 { classical_unchecked(&top, r, grid) } else { zygmund_unchecked(&top, r, grid) };
    let mut e = NormEstimate::plain(EstimatorKind::HigherOrder, beta, lower + part.sup_norm, part.seminorm, grid.len(), part.pair_count);
    e.m = Some(n);
    Ok(e)
}

// ---------------------------------------------------------------------------
// semigroup sweeps

/// ∂_t^m T_t f(x) for every function, time and point: `values[f][t][x]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub times: Vec<f64>,
    pub xs: Vec<f64>,
    pub m: usize,
    pub values: Vec<Vec<Vec<f64>>>,
    pub nodes: usize,
}

impl SweepTable {
    /// max_x |·| per time for function `i`.
    pub fn profile(&self, i: usize) -> Vec<(f64, f64)> {
        self.times.iter().zip(&self.values[i]).map(|(&t, row)| (t, grid_sup(row))).collect()
    }
}

/// Tabulates ∂_t^m T_t f on a (time × point) grid. Functions with the same
/// breakpoints and resolution needs share kernel nodes at each (t, x); even
/// functions are evaluated on |x| only; trigonometric functions share mode
/// integrals by frequency.
pub fn semigroup_sweep(
    ke: &KernelEvaluator,
    fs: &[FunctionHandle],
    m: usize,
    times: &[f64],
    xs: &[f64],
    tol: f64,
) -> Result<SweepTable> {
    if let Some(f) = fs.iter().find(|f| !f.is_bounded) {
        return Err(DunklError::Function(format!("{} is not declared bounded", f.name)));
    }
    let key = |f: &FunctionHandle| {
        let mut b: Vec<u64> = f.breakpoints.iter().map(|v| v.abs().to_bits()).collect();
        b.sort();
        b.dedup();
        (b, f.active_radius.to_bits(), if f.active_radius > 0.0 { f.scale.to_bits() } else { 0 })
    };
    let mut groups: Vec<(_, Vec<usize>)> = Vec::new();
    for (i, f) in fs.iter().enumerate() {
        let kf = key(f);
        match groups.iter_mut().find(|g| g.0 == kf) {
            Some(g) => g.1.push(i),
            None => groups.push((kf, vec![i])),
        }
    }
    let mut values = vec![vec![vec![0.0; xs.len()]; times.len()]; fs.len()];
    let mut nodes = 0;
    for (_, idx) in &groups {
        let batch: Vec<FunctionHandle> = idx.iter().map(|&i| fs[i].clone()).collect();
        let (v, n) = sweep_group(ke, &batch, m, times, xs, tol)?;
        nodes += n;
        for (slot, &i) in idx.iter().enumerate() {
            values[i] = v[slot].clone();
        }
    }
    Ok(SweepTable { times: times.to_vec(), xs: xs.to_vec(), m, values, nodes })
}

type Grid3 = Vec<Vec<Vec<f64>>>;

fn sweep_group(
    ke: &KernelEvaluator,
    fs: &[FunctionHandle],
    m: usize,
    times: &[f64],
    xs: &[f64],
    tol: f64,
) -> Result<(Grid3, usize)> {
    let even = fs.iter().all(|f| f.is_even);
    let pts: Vec<f64> = if even {
        let mut v: Vec<f64> = xs.iter().map(|x| x.abs()).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    } else {
        xs.to_vec()
    };
    let opts = SamplerOptions::covering(fs, tol);
    // distinct frequencies across the batch
    let mut cos_freq: Vec<f64> = Vec::new();
    let mut sin_freq: Vec<f64> = Vec::new();
    for f in fs {
        if let Some(tr) = &f.trig {
            cos_freq.extend(tr.modes.iter().map(|m| m.1));
            sin_freq.extend(tr.sin_modes.iter().map(|m| m.1));
        }
    }
    for v in [&mut cos_freq, &mut sin_freq] {
        v.sort_by(f64::total_cmp);
        v.dedup();
    }
    let jobs: Vec<(usize, usize)> = (0..times.len()).flat_map(|i| (0..pts.len()).map(move |j| (i, j))).collect();
    let results = par_map(&jobs, |&(i, j)| -> Result<(Vec<f64>, usize)> {
        let s = SemigroupSampler::new(ke, times[i], &[pts[j]], m, &opts)?;
        let cos_v = s.mode_integrals(&cos_freq);
        let sin_v = s.sin_mode_integrals(&sin_freq);
        let mass = s.mass();
        let lookup = |freqs: &[f64], vals: &[f64], l: f64| vals[freqs.partition_point(|&q| q < l)];
        let out = fs
            .iter()
            .map(|f| match &f.trig {
                Some(tr) => trig_from_modes(tr, mass, |l| lookup(&cos_freq, &cos_v, l), |l| lookup(&sin_freq, &sin_v, l)),
                None => s.integrate_values(|y| f.eval1(y), f.is_even),
            })
            .collect();
        Ok((out, s.nodes))
    });
    let mut values = vec![vec![vec![0.0; xs.len()]; times.len()]; fs.len()];
    let mut nodes = 0;
    let mut flat = Vec::with_capacity(jobs.len());
    for r in results {
        let (v, n) = r?;
        nodes += n;
        flat.push(v);
    }
    for i in 0..times.len() {
        for (jx, &x) in xs.iter().enumerate() {
            let j = if even { pts.partition_point(|&p| p < x.abs()) } else { jx };
            for (fi, row) in values.iter_mut().enumerate() {
                row[i][jx] = flat[i * pts.len() + j][fi];
            }
        }
    }
    Ok((values, nodes))
}

fn trig_from_modes(tr: &TrigSeries, mass: f64, c: impl Fn(f64) -> f64, s: impl Fn(f64) -> f64) -> f64 {
    tr.constant * mass
        + tr.modes.iter().map(|&(a, l)| a * c(l)).sum::<f64>()
        + tr.sin_modes.iter().map(|&(b, l)| b * s(l)).sum::<f64>()
}

/// Smallest integer strictly greater than β.
pub fn order_above(beta: f64) -> usize {
    beta.floor() as usize + 1
}

fn expect_mode(ke: &KernelEvaluator, mode: KernelMode) -> Result<()> {
    if ke.mode == mode {
        Ok(())
    } else {
        Err(DunklError::Parameter(format!("estimator needs a {mode:?} evaluator")))
    }
}

/// Builds a semigroup-kind estimate from a precomputed sweep.
pub fn semigroup_norm_from_sweep(
    table: &SweepTable,
    i: usize,
    f: &FunctionHandle,
    kind: EstimatorKind,
    beta: f64,
    grid: &SpaceGrid,
    tol: f64,
) -> NormEstimate {
    let exponent = match kind {
        EstimatorKind::HeatSemigroup => table.m as f64 - beta / 2.0,
        _ => table.m as f64 - beta,
    };
    let profile = table.profile(i);
    let semi = profile.iter().map(|(t, v)| t.powf(exponent) * v).fold(0.0f64, f64::max);
    let sup = grid_sup(&grid.points.iter().map(|&x| f.eval1(x)).collect::<Vec<_>>());
    NormEstimate {
        kind,
        value: sup + semi,
        seminorm: semi,
        sup_norm: sup,
        beta,
        m: Some(table.m),
        t_min: table.times.first().copied(),
        t_max: table.times.last().copied(),
        time_points: table.times.len(),
        grid_points: grid.len(),
        pair_count: table.times.len() * table.xs.len(),
        tolerance: tol,
        profile,
    }
}

/// ‖f‖_∞ + max_t t^{m−β} max_x |∂_t^m P_t f(x)| with m = ⌊β⌋+1.
pub fn semigroup_norm_poisson(
    ke: &KernelEvaluator,
    f: &FunctionHandle,
    beta: f64,
    times: &TimeGrid,
    grid: &SpaceGrid,
    tol: f64,
) -> Result<NormEstimate> {
    semigroup_norm_poisson_m(ke, f, beta, order_above(beta), times, grid, tol)
}

/// Same with an explicit order m > β.
pub fn semigroup_norm_poisson_m(
    ke: &KernelEvaluator,
    f: &FunctionHandle,
    beta: f64,
    m: usize,
    times: &TimeGrid,
    grid: &SpaceGrid,
    tol: f64,
) -> Result<NormEstimate> {
    expect_mode(ke, KernelMode::Poisson)?;
    positive_beta(beta)?;
    if (m as f64) <= beta {
        return Err(DunklError::Parameter(format!("order {m} must exceed β = {beta}")));
    }
    nonempty(grid)?;
    let table = semigroup_sweep(ke, std::slice::from_ref(f), m, &times.times, &grid.points, tol)?;
    Ok(semigroup_norm_from_sweep(&table, 0, f, EstimatorKind::PoissonSemigroup, beta, grid, tol))
}

/// ‖f‖_∞ + max_t t^{m−β/2} max_x |∂_t^m H_t f(x)| with m the smallest integer > β/2.
pub fn semigroup_norm_heat(
    ke: &KernelEvaluator,
    f: &FunctionHandle,
    beta: f64,
    times: &TimeGrid,
    grid: &SpaceGrid,
    tol: f64,
) -> Result<NormEstimate> {
    expect_mode(ke, KernelMode::Heat)?;
    positive_beta(beta)?;
    nonempty(grid)?;
    let table = semigroup_sweep(ke, std::slice::from_ref(f), order_above(beta / 2.0), &times.times, &grid.points, tol)?;
    Ok(semigroup_norm_from_sweep(&table, 0, f, EstimatorKind::HeatSemigroup, beta, grid, tol))
}

fn positive_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(DunklError::Parameter(format!("β must be positive (got {beta})")))
    }
}

// ---------------------------------------------------------------------------
// power-law fits

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    /// root-mean-square residual of the log-log fit
    pub residual: f64,
    pub points: usize,
    /// every value sat below the noise floor
    pub degenerate: bool,
}

/// Least squares of log v against log t, skipping values at or below `floor`.
pub fn fit_power_law(samples: &[(f64, f64)], floor: f64) -> DecayFit {
    let pts: Vec<(f64, f64)> = samples.iter().filter(|(_, v)| *v > floor).map(|(t, v)| (t.ln(), v.ln())).collect();
    let n = pts.len();
    if n < 2 {
        return DecayFit { slope: f64::NAN, intercept: f64::NAN, residual: f64::NAN, points: n, degenerate: true };
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / nf).sqrt();
    DecayFit { slope, intercept, residual, points: n, degenerate: false }
}

/// Fit window of [`decay_exponent_fit`].
pub const FIT_WINDOW: (f64, f64) = (1e-3, 1e-1);

/// Slope of log max_x |∂_t^m P_t f| against log t over t ∈ [1e−3, 1e−1].
pub fn decay_exponent_fit(
    ke: &KernelEvaluator,
    f: &FunctionHandle,
    m: usize,
    times: &TimeGrid,
    grid: &SpaceGrid,
    tol: f64,
) -> Result<DecayFit> {
    if m == 0 {
        return Err(DunklError::Parameter("decay fit needs m ≥ 1".into()));
    }
    let ts = times.restricted(FIT_WINDOW.0, FIT_WINDOW.1);
    let table = semigroup_sweep(ke, std::slice::from_ref(f), m, &ts, &grid.points, tol)?;
    Ok(fit_power_law(&table.profile(0), 100.0 * tol))
}

/// Rate of P_t f → f: slope of log max_x |P_t f − f| over the fit window.
pub fn convergence_exponent_fit(
    ke: &KernelEvaluator,
    f: &FunctionHandle,
    times: &TimeGrid,
    grid: &SpaceGrid,
    tol: f64,
) -> Result<DecayFit> {
    let ts = times.restricted(FIT_WINDOW.0, FIT_WINDOW.1);
    let table = semigroup_sweep(ke, std::slice::from_ref(f), 0, &ts, &grid.points, tol)?;
    let prof: Vec<(f64, f64)> = ts
        .iter()
        .zip(&table.values[0])
        .map(|(&t, row)| (t, row.iter().zip(&grid.points).map(|(v, &x)| (v - f.eval1(x)).abs()).fold(0.0, f64::max)))
        .collect();
    Ok(fit_power_law(&prof, 100.0 * tol))
}

// ---------------------------------------------------------------------------
// corpus

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum CorpusKind {
    /// Σ_{j=0}^{J} b^{−jβ} cos(b^j x)
    Weierstrass { base: f64, beta: f64, terms: usize },
    /// min(1, |x|)^β
    Cusp { beta: f64 },
    /// e^{−a x²}
    Gaussian { a: f64 },
    /// sin(ω x)
    Sine { omega: f64 },
}

#[derive(Debug, Clone)]
pub struct CorpusFunction {
    pub handle: FunctionHandle,
    /// nominal Hölder exponent, ∞ for smooth members
    pub beta_star: f64,
    pub kind: CorpusKind,
    /// bound on the dropped tail of a truncated series
    pub tail_bound: f64,
}

impl CorpusFunction {
    /// Weierstrass function with J the first index where b^{−Jβ} < 1e−4.
    pub fn weierstrass(beta: f64, base: f64) -> Result<Self> {
        if !(beta > 0.0) || !(base > 1.0) {
            return Err(DunklError::Parameter(format!("Weierstrass needs β > 0 and base > 1 (got {beta}, {base})")));
        }
        let mut j = 0usize;
        while base.powf(-(j as f64) * beta) >= 1e-4 {
            j += 1;
        }
        let modes = (0..=j).map(|i| (base.powf(-(i as f64) * beta), base.powi(i as i32))).collect();
        let q = base.powf(-beta);
        let tail_bound = q.powi(j as i32 + 1) / (1.0 - q);
        let handle = FunctionHandle::trig_series(format!("weierstrass(b={base},β={beta})"), TrigSeries::cosines(0.0, modes));
        Ok(Self { handle, beta_star: beta, kind: CorpusKind::Weierstrass { base, beta, terms: j + 1 }, tail_bound })
    }

    pub fn cusp(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(DunklError::Parameter(format!("cusp needs 0 < β ≤ 1 (got {beta})")));
        }
        let handle = FunctionHandle::new_1d(format!("cusp(β={beta})"), move |x| x.abs().min(1.0).powf(beta))
            .with_sup_norm(1.0)
            .with_breakpoints(vec![-1.0, 0.0, 1.0])
            .with_even(true);
        Ok(Self { handle, beta_star: beta, kind: CorpusKind::Cusp { beta }, tail_bound: 0.0 })
    }

    pub fn gaussian(a: f64) -> Self {
        let mut handle = FunctionHandle::gaussian(a);
        handle = handle.with_derivatives_1d(
            move |x, n| {
                let e = (-a * x * x).exp();
                match n {
                    0 => e,
                    1 => -2.0 * a * x * e,
                    _ => (4.0 * a * a * x * x - 2.0 * a) * e,
                }
            },
            2,
        );
        Self { handle, beta_star: f64::INFINITY, kind: CorpusKind::Gaussian { a }, tail_bound: 0.0 }
    }

    pub fn sine(omega: f64) -> Self {
        let handle = FunctionHandle::trig_series(
            format!("sin({omega}x)"),
            TrigSeries { constant: 0.0, modes: Vec::new(), sin_modes: vec![(1.0, omega)] },
        );
        Self { handle, beta_star: f64::INFINITY, kind: CorpusKind::Sine { omega }, tail_bound: 0.0 }
    }

    pub fn name(&self) -> &str {
        &self.handle.name
    }
}

/// The members with nominal exponent β: Weierstrass in bases 2 and 3, and
/// the cusp when β ≤ 1.
pub fn default_corpus(beta: f64) -> Result<Vec<CorpusFunction>> {
    let mut v = vec![CorpusFunction::weierstrass(beta, 2.0)?, CorpusFunction::weierstrass(beta, 3.0)?];
    if beta <= 1.0 {
        v.push(CorpusFunction::cusp(beta)?);
    }
    Ok(v)
}

/// Corpus selection by family name.
pub fn corpus_by_name(name: &str, beta: f64) -> Result<CorpusFunction> {
    match name {
        "weierstrass" | "weierstrass2" => CorpusFunction::weierstrass(beta, 2.0),
        "weierstrass3" => CorpusFunction::weierstrass(beta, 3.0),
        "cusp" => CorpusFunction::cusp(beta),
        "gaussian" => Ok(CorpusFunction::gaussian(1.0)),
        "sine" => Ok(CorpusFunction::sine(1.0)),
        other => Err(DunklError::Config(format!("unknown corpus member '{other}'"))),
    }
}

// ---------------------------------------------------------------------------
// Bessel potentials

/// (I − Δ_k)^{−γ/2} = Γ(γ/2)^{−1} ∫_0^∞ r^{γ/2−1} e^{−r} H_r dr, evaluated on
/// log-spaced Gauss–Legendre panels in ln r. Below `r_floor`, H_r f ≈ f and
/// the Gamma mass there is added in closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselRule {
    pub gamma: f64,
    pub r_floor: f64,
    pub r_ceiling: f64,
    pub nodes: Vec<f64>,
    /// quadrature weight × Gamma density, including the r-Jacobian
    pub weights: Vec<f64>,
    pub floor_mass: f64,
}

/// ln r panels per decade and nodes per panel.
const BESSEL_PANELS_PER_DECADE: usize = 3;
const BESSEL_PANEL_NODES: usize = 8;

/// r-nodes on [floor, ceiling] in ln r.
fn log_nodes(floor: f64, ceiling: f64) -> (Vec<f64>, Vec<f64>) {
    let rule = gauss_legendre(BESSEL_PANEL_NODES);
    let (a, b) = (floor.ln(), ceiling.ln());
    let panels = (((b - a) / std::f64::consts::LN_10) * BESSEL_PANELS_PER_DECADE as f64).ceil().max(1.0) as usize;
    let h = (b - a) / panels as f64;
    let mut r = Vec::new();
    let mut dl = Vec::new();
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * h;
        for (z, w) in rule.nodes.iter().zip(&rule.weights) {
            r.push((c + 0.5 * h * z).exp());
            dl.push(0.5 * h * w);
        }
    }
    (r, dl)
}

impl BesselRule {
    /// Floor chosen so that r_floor·λ_max² ≤ 1e−4 for trigonometric f.
    pub fn new(gamma: f64, f: &FunctionHandle) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(DunklError::Parameter(format!("Bessel order must be positive (got {gamma})")));
        }
        let lam = f.trig.as_ref().map_or(0.0, |s| s.max_frequency());
        let r_floor = if lam > 0.0 { (1e-4 / (lam * lam)).min(1e-14) } else { 1e-14 };
        Self::with_range(gamma, r_floor, 60.0)
    }

    pub fn with_range(gamma: f64, r_floor: f64, r_ceiling: f64) -> Result<Self> {
        let a = 0.5 * gamma;
        let (r, dl) = log_nodes(r_floor, r_ceiling);
        let lg = ln_gamma(a);
        let weights = r.iter().zip(&dl).map(|(&r, &w)| w * (a * r.ln() - r - lg).exp()).collect();
        Ok(Self { gamma, r_floor, r_ceiling, nodes: r, weights, floor_mass: gamma_lr(a, r_floor) })
    }

    /// Same nodes with the weights of Gamma(a₁)∗Gamma(a₂), the density of
    /// applying γ₁ and then γ₂. The convolution is r^{a₁+a₂−1} e^{−r} times
    /// ∫_0^1 (1−v)^{a₁−1} v^{a₂−1} dv / (Γ(a₁)Γ(a₂)); that integral is computed
    /// numerically, each half with its endpoint singularity removed by v = s^{1/a}.
    pub fn composed(g1: f64, g2: f64, r_floor: f64, r_ceiling: f64, tol: f64) -> Result<Self> {
        if !(g1 > 0.0 && g2 > 0.0) {
            return Err(DunklError::Parameter("Bessel orders must be positive".into()));
        }
        let (a1, a2) = (0.5 * g1, 0.5 * g2);
        let half = |p: f64, q: f64| {
            // ∫_0^{1/2} v^{p−1} (1−v)^{q−1} dv with v = s^{1/p}
            adaptive_integrate(
                |s| {
                    let v = s.powf(1.0 / p);
                    (1.0 - v).powf(q - 1.0) / p
                },
                Interval::Finite(0.0, 0.5f64.powf(p)),
                1e-3 * tol,
            )
        };
        let beta = half(a2, a1)?.value + half(a1, a2)?.value;
        let c = beta.ln() - ln_gamma(a1) - ln_gamma(a2);
        let a = a1 + a2;
        let (r, dl) = log_nodes(r_floor, r_ceiling);
        let weights = r.iter().zip(&dl).map(|(&r, &w)| w * (c + a * r.ln() - r).exp()).collect();
        let floor_mass = gamma_lr(a, r_floor);
        Ok(Self { gamma: g1 + g2, r_floor, r_ceiling, nodes: r, weights, floor_mass })
    }

    pub fn mass(&self) -> f64 {
        self.floor_mass + self.weights.iter().sum::<f64>()
    }

    /// J f(x) given H_r f(x) at the nodes and f(x).
    pub fn combine(&self, fx: f64, heat_values: &[f64]) -> f64 {
        self.floor_mass * fx + self.weights.iter().zip(heat_values).map(|(w, v)| w * v).sum::<f64>()
    }
}

/// H_r f(x) at the nodes of a Bessel rule: φ_x(r).
pub fn heat_profile(ke: &KernelEvaluator, f: &FunctionHandle, nodes: &[f64], x: f64, tol: f64) -> Result<Vec<f64>> {
    expect_mode(ke, KernelMode::Heat)?;
    let opts = SamplerOptions::covering(std::slice::from_ref(f), tol);
    par_map(nodes, |&r| SemigroupSampler::new(ke, r, &[x], 0, &opts).map(|s| s.integrate_fn(f)))
        .into_iter()
        .collect()
}

/// (f ∗ 𝒥^{γ/2})(x) = (I − Δ_k)^{−γ/2} f(x), rank one.
pub fn bessel_potential_apply(ke: &KernelEvaluator, f: &FunctionHandle, gamma: f64, x: f64, tol: f64) -> Result<f64> {
    if !f.is_bounded {
        return Err(DunklError::Function(format!("{} is not declared bounded", f.name)));
    }
    let rule = BesselRule::new(gamma, f)?;
    let phi = heat_profile(ke, f, &rule.nodes, x, tol)?;
    Ok(rule.combine(f.eval1(x), &phi))
}

/// (I − Δ_k)^{−γ₂/2}(I − Δ_k)^{−γ₁/2} f(x) through the composed density.
pub fn bessel_potential_compose(
    ke: &KernelEvaluator,
    f: &FunctionHandle,
    g1: f64,
    g2: f64,
    x: f64,
    tol: f64,
) -> Result<f64> {
    let one = BesselRule::new(g1 + g2, f)?;
    let rule = BesselRule::composed(g1, g2, one.r_floor, one.r_ceiling, tol)?;
    let phi = heat_profile(ke, f, &rule.nodes, x, tol)?;
    Ok(rule.combine(f.eval1(x), &phi))
}

/// Density of T + L with T ~ Gamma(γ/2) and L the Lévy law of e^{−s√−Δ} on
/// the heat clock, and its first two s-derivatives:
/// ∫ ρ_s(r) H_r dr = P_s (I − Δ_k)^{−γ/2}.
fn subordinated_density(gamma: f64, s: f64, r: f64, m: usize, tol: f64) -> Result<f64> {
    let a = 0.5 * gamma;
    let lg = ln_gamma(a);
    let levy = |l: f64| -> f64 {
        if l <= 0.0 {
            return 0.0;
        }
        let base = (s.ln() - (2.0 * std::f64::consts::PI.sqrt()).ln() - 1.5 * l.ln() - s * s / (4.0 * l)).exp();
        let d1 = 1.0 / s - s / (2.0 * l);
        match m {
            0 => base,
            1 => base * d1,
            _ => base * (d1 * d1 - 1.0 / (s * s) - 1.0 / (2.0 * l)),
        }
    };
    let gam = |tau: f64| ((a - 1.0) * tau.ln() - tau - lg).exp();
    let half = 0.5 * r;
    // left: l ∈ [0, r/2], Lévy peak near s²/6
    let peak = (s * s / 6.0).min(half);
    let mut left = 0.0;
    for (lo, hi) in [(0.0, peak), (peak, half)] {
        if hi > lo {
            left += adaptive_integrate_rel(|l| gam(r - l) * levy(l), Interval::Finite(lo, hi), tol, 1e-300)?.value;
        }
    }
    // right: τ = r − l ∈ [0, r/2] with weight τ^{a−1}
    let jr = gauss_jacobi(24, 0.0, a - 1.0)?;
    let sc = (0.5 * half).powf(a);
    let right: f64 = jr
        .nodes
        .iter()
        .zip(&jr.weights)
        .map(|(z, w)| {
            let tau = 0.5 * half * (1.0 + z);
            w * sc * (-tau - lg).exp() * levy(r - tau)
        })
        .sum();
    Ok(left + right)
}

/// t ↦ max_x |∂_t^m P_t (I − Δ_k)^{−γ/2} f(x)|, m ∈ {1, 2}, from heat profiles
/// of f at the points of the grid.
pub fn bessel_poisson_profile(
    ke_heat: &KernelEvaluator,
    f: &FunctionHandle,
    gamma: f64,
    m: usize,
    times: &[f64],
    xs: &[f64],
    tol: f64,
) -> Result<Vec<(f64, f64)>> {
    if !(1..=2).contains(&m) {
        return Err(DunklError::UnsupportedOrder { order: m, max: 2 });
    }
    expect_mode(ke_heat, KernelMode::Heat)?;
    let t_lo = times.iter().copied().fold(f64::INFINITY, f64::min);
    let r_floor = (1e-3 * t_lo * t_lo).min(1e-10);
    let (r, dl) = log_nodes(r_floor, 400.0);
    let dens: Vec<Vec<f64>> = times
        .iter()
        .map(|&s| {
            r.iter()
                .zip(&dl)
                .map(|(&rr, &w)| subordinated_density(gamma, s, rr, m, 1e-12).map(|d| d * rr * w))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let pts: Vec<f64> = if f.is_even {
        let mut v: Vec<f64> = xs.iter().map(|x| x.abs()).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    } else {
        xs.to_vec()
    };
    let mut best = vec![0.0f64; times.len()];
    let phis = par_map(&pts, |&x| heat_profile(ke_heat, f, &r, x, tol));
    for phi in phis {
        let phi = phi?;
        for (b, d) in best.iter_mut().zip(&dens) {
            let v: f64 = d.iter().zip(&phi).map(|(a, b)| a * b).sum();
            *b = b.max(v.abs());
        }
    }
    Ok(times.iter().copied().zip(best).collect())
}

/// Decay fit of ∂_t^m P_t of the Bessel potential over the fit window.
pub fn bessel_decay_fit(
    ke_heat: &KernelEvaluator,
    f: &FunctionHandle,
    gamma: f64,
    m: usize,
    times: &TimeGrid,
    grid: &SpaceGrid,
    tol: f64,
) -> Result<DecayFit> {
    let ts = times.restricted(FIT_WINDOW.0, FIT_WINDOW.1);
    let prof = bessel_poisson_profile(ke_heat, f, gamma, m, &ts, &grid.points, tol)?;
    Ok(fit_power_law(&prof, 100.0 * tol))
}

// ---------------------------------------------------------------------------
// Dunkl derivatives and reports

/// D f in rank one as a function handle; keeps trigonometric data when the
/// multiplicity vanishes. The sup norm is bounded from a grid maximum with a
/// factor 2 margin: it only scales tail truncation.
pub fn dunkl_derivative_handle(rs: &RootSystem, f: &FunctionHandle, grid: &SpaceGrid) -> Result<FunctionHandle> {
    if rs.dimension() != 1 {
        return Err(DunklError::Parameter("derivative handles are rank one".into()));
    }
    if rs.is_classical() {
        if let Some(d) = f.derivative_handle(1) {
            if d.trig.is_some() {
                return Ok(d);
            }
        }
    }
    // probe once so a hyperplane singularity surfaces here
    dunkl_apply(rs, f, 0, &[0.0])?;
    let g = f.clone();
    let r = rs.clone();
    let mut d = FunctionHandle::new_1d(format!("D[{}]", f.name), move |x| dunkl_apply(&r, &g, 0, &[x]).unwrap_or(f64::NAN));
    let sup = grid.points.iter().map(|&x| d.eval1(x).abs()).fold(0.0, f64::max);
    d = d.with_sup_norm(2.0 * sup.max(1e-300)).with_breakpoints(f.breakpoints.clone()).with_scale(f.scale);
    d.active_radius = f.active_radius;
    Ok(d)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeReport {
    pub function: String,
    pub beta: f64,
    pub base: NormEstimate,
    pub poisson_derivative: NormEstimate,
    pub heat_derivative: NormEstimate,
    /// poisson(Df, β−1)/poisson(f, β)
    pub poisson_ratio: f64,
    /// heat(Df, β−1)/poisson(f, β)
    pub heat_ratio: f64,
}

/// Norms of D f at β − 1 (Poisson and heat scales) against the Poisson norm
/// of f at β, rank one.
pub fn derivative_norm_check(
    rs: &RootSystem,
    f: &FunctionHandle,
    beta: f64,
    times: &TimeGrid,
    grid: &SpaceGrid,
    tol: f64,
) -> Result<DerivativeReport> {
    if !(beta > 1.0) {
        return Err(DunklError::Parameter(format!("derivative_norm_check needs β > 1 (got {beta})")));
    }
    let pk = KernelEvaluator::poisson(rs);
    let hk = KernelEvaluator::heat(rs);
    let d = dunkl_derivative_handle(rs, f, grid)?;
    let base = semigroup_norm_poisson(&pk, f, beta, times, grid, tol)?;
    let pd = semigroup_norm_poisson(&pk, &d, beta - 1.0, times, grid, tol)?;
    let mut hd = semigroup_norm_heat(&hk, &d, beta - 1.0, times, grid, tol)?;
    hd.kind = EstimatorKind::DerivativeSplit;
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { 1.0 };
    Ok(DerivativeReport {
        function: f.name.clone(),
        beta,
        poisson_ratio: ratio(pd.value, base.value),
        heat_ratio: ratio(hd.value, base.value),
        base,
        poisson_derivative: pd,
        heat_derivative: hd,
    })
}

/// Settings shared by the report and the CLI.
#[derive(Debug, Clone, PartialEq)]
pub struct NormSettings {
    pub times: TimeGrid,
    pub grid: SpaceGrid,
    pub tol: f64,
    pub band: (f64, f64),
}

impl Default for NormSettings {
    fn default() -> Self {
        Self { times: TimeGrid::default_grid(), grid: SpaceGrid::default_grid(), tol: 1e-8, band: (1.0 / 50.0, 50.0) }
    }
}

/// One line of the report: an estimate or a ratio of two.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub function: String,
    pub k: f64,
    pub beta: f64,
    pub estimator: String,
    pub value: f64,
    pub m: Option<usize>,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub grid_points: usize,
    /// "ok", or "out_of_band" for a ratio outside the band
    pub flag: String,
}

impl ReportRow {
    pub fn in_band(&self) -> bool {
        self.flag != "out_of_band"
    }
}

/// Corpus member selector used by [`equivalence_report`].
pub type CorpusBuilder<'a> = &'a dyn Fn(f64) -> Result<Vec<CorpusFunction>>;

/// For each (f, β, k): the four estimates and the ratios classical/poisson,
/// zygmund/poisson and heat/poisson, flagged against the band. Rank one.
pub fn equivalence_report(corpus: CorpusBuilder<'_>, betas: &[f64], ks: &[f64], s: &NormSettings) -> Result<Vec<ReportRow>> {
    if betas.is_empty() {
        return Err(DunklError::Parameter("β list is empty".into()));
    }
    let mut rows = Vec::new();
    for &k in ks {
        let rs = crate::root_system::make_product_z2(1, &[k])?;
        let pk = KernelEvaluator::poisson(&rs);
        let hk = KernelEvaluator::heat(&rs);
        // one sweep per (β-group, operator): m depends on β only through ⌊β⌋
        let mut members: Vec<(f64, CorpusFunction)> = Vec::new();
        for &b in betas {
            for c in corpus(b)? {
                members.push((b, c));
            }
        }
        let mut orders: Vec<(usize, usize)> = members.iter().map(|(b, _)| (order_above(*b), order_above(b / 2.0))).collect();
        orders.sort();
        orders.dedup();
        let mut estimates: Vec<Option<(NormEstimate, NormEstimate)>> = vec![None; members.len()];
        for &(mp, mh) in &orders {
            let idx: Vec<usize> =
                (0..members.len()).filter(|&i| (order_above(members[i].0), order_above(members[i].0 / 2.0)) == (mp, mh)).collect();
            let fs: Vec<FunctionHandle> = idx.iter().map(|&i| members[i].1.handle.clone()).collect();
            let tp = semigroup_sweep(&pk, &fs, mp, &s.times.times, &s.grid.points, s.tol)?;
            let th = semigroup_sweep(&hk, &fs, mh, &s.times.times, &s.grid.points, s.tol)?;
            for (slot, &i) in idx.iter().enumerate() {
                let (b, c) = &members[i];
                let p = semigroup_norm_from_sweep(&tp, slot, &c.handle, EstimatorKind::PoissonSemigroup, *b, &s.grid, s.tol);
                let h = semigroup_norm_from_sweep(&th, slot, &c.handle, EstimatorKind::HeatSemigroup, *b, &s.grid, s.tol);
                estimates[i] = Some((p, h));
            }
        }
        for (i, (b, c)) in members.iter().enumerate() {
            let (p, h) = estimates[i].take().expect("every member swept");
            let mut list = Vec::new();
            if *b < 1.0 {
                list.push(classical_unchecked(&c.handle, *b, &s.grid));
            }
            if *b < 2.0 {
                list.push(zygmund_unchecked(&c.handle, *b, &s.grid));
            }
            let est_row = |e: &NormEstimate| ReportRow {
                function: c.name().to_string(),
                k,
                beta: *b,
                estimator: e.kind.as_str().to_string(),
                value: e.value,
                m: e.m,
                t_min: e.t_min,
                t_max: e.t_max,
                grid_points: e.grid_points,
                flag: "ok".into(),
            };
            for e in list.iter().chain([&p, &h]) {
                rows.push(est_row(e));
            }
            let all_zero = list.iter().chain([&p, &h]).all(|e| e.seminorm <= s.tol);
            for e in list.iter().chain([&h]) {
                let r = if all_zero { 1.0 } else { e.value / p.value };
                let ok = r >= s.band.0 && r <= s.band.1;
                rows.push(ReportRow {
                    estimator: format!("{}/poisson", e.kind.as_str().trim_end_matches("_semigroup")),
                    value: r,
                    flag: if ok { "ok".into() } else { "out_of_band".into() },
                    ..est_row(&p)
                });
            }
        }
    }
    Ok(rows)
}
