//! Verification suites and experiments behind `dunkl-lab`.
//!
//! Every suite returns its rows in a fixed order; work items run through
//! [`par_map`], which preserves input order, so reports are reproducible.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::abstract_semigroup::{
    bessel_matrix, bessel_spectral, cauchy_filter_check, contour_calculus, generator_by_name, identity,
    interpolation_constant, k_functional_upper, log_grid, log_grid_doubled, multiplier_norm, op_norm,
    omega_regularization, resolvent, semigroup_at, sqrt_neg_iterative, sqrt_neg_matrix, subordinate_at,
    subordinate_spectral, analytic_constant, AdmissibleFunction, CMatrix, CVector, MatrixGenerator, PathSide,
    SubordinationRule, OMEGAS,
};
use crate::config::ExperimentConfig;
use crate::dunkl_kernel::{dunkl_kernel_1d, dunkl_kernel_e, kernel_ode_residual, FunctionHandle};
use crate::error::{DunklError, Result};
use crate::heat_poisson::{KernelEvaluator, SamplerOptions, SemigroupSampler};
use crate::lipschitz_norms::{
    bessel_decay_fit, bessel_potential_apply, bessel_potential_compose, corpus_by_name, decay_exponent_fit,
    default_corpus, equivalence_report, CorpusFunction, ReportRow,
};
use crate::pool::par_map;
use crate::quadrature::ContourPath;
use crate::root_system::{make_product_z2, RootSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Kernels,
    Semigroup,
    Calculus,
    Interpolation,
    Norms,
}

pub const SUITE_NAMES: [&str; 5] = ["kernels", "semigroup", "calculus", "interpolation", "norms"];

impl std::str::FromStr for Suite {
    type Err = DunklError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kernels" => Ok(Self::Kernels),
            "semigroup" => Ok(Self::Semigroup),
            "calculus" => Ok(Self::Calculus),
            "interpolation" => Ok(Self::Interpolation),
            "norms" => Ok(Self::Norms),
            other => Err(DunklError::Config(format!("unknown suite '{other}' (known: {})", SUITE_NAMES.join(", ")))),
        }
    }
}

/// One hard assertion: passes iff value ≤ bound (NaN fails).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub check: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl CheckRow {
    pub fn new(check: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { check: check.into(), value, bound, pass: value <= bound }
    }
}

/// One line of the calculus report. `bound` marks residual rows that the
/// command treats as assertions; it is not written out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalculusRow {
    pub generator_id: String,
    pub operation: String,
    pub parameter: String,
    pub value: f64,
    pub error_estimate: f64,
    #[serde(skip)]
    pub bound: Option<f64>,
}

impl CalculusRow {
    fn info(g: &str, op: &str, param: impl Into<String>, value: f64, err: f64) -> Self {
        Self { generator_id: g.into(), operation: op.into(), parameter: param.into(), value, error_estimate: err, bound: None }
    }

    fn residual(g: &str, op: &str, param: impl Into<String>, value: f64, err: f64, bound: f64) -> Self {
        Self { bound: Some(bound), ..Self::info(g, op, param, value, err) }
    }

    pub fn passes(&self) -> bool {
        self.bound.is_none_or(|b| self.value <= b)
    }

    fn to_check(&self) -> Option<CheckRow> {
        self.bound.map(|b| CheckRow::new(format!("{} {} {}", self.operation, self.generator_id, self.parameter), self.value, b))
    }
}

pub fn run_suite(suite: Suite, cfg: &ExperimentConfig) -> Result<Vec<CheckRow>> {
    match suite {
        Suite::Kernels => kernels_suite(cfg),
        Suite::Semigroup => semigroup_suite(cfg),
        Suite::Calculus => Ok(to_checks(&calculus_rows(cfg, Part::Calculus)?)),
        Suite::Interpolation => Ok(to_checks(&calculus_rows(cfg, Part::Interpolation)?)),
        Suite::Norms => norms_suite(cfg),
    }
}

fn to_checks(rows: &[CalculusRow]) -> Vec<CheckRow> {
    rows.iter().filter_map(CalculusRow::to_check).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn rank_one(k: f64) -> Result<RootSystem> {
    make_product_z2(1, &[k])
}

// ---------------------------------------------------------------------------
// kernels

/// Points of the kernel-certification grid; none sits on the hyperplane.
pub fn ode_grid() -> Vec<f64> {
    (0..20).map(|i| -3.0 + 6.0 * (i as f64 + 0.5) / 20.0).collect()
}

/// Max relative residual of the defining equation over the 20×20 grid.
pub fn kernel_ode_max_residual(k: f64) -> Result<f64> {
    let g = ode_grid();
    let mut worst = 0.0f64;
    for &x in &g {
        for &y in &g {
            worst = worst.max(kernel_ode_residual(k, x, y)?);
        }
    }
    Ok(worst)
}

/// |∫ ∂_t^m K_t(x,·) dw − δ_{m0}| for K = heat or Poisson.
pub fn kernel_mass_defect(ke: &KernelEvaluator, m: usize, t: f64, x: f64, tol: f64) -> Result<f64> {
    let one = FunctionHandle::constant(1.0);
    let v = ke.apply_semigroup(&one, m, t, &[x], tol)?;
    Ok(if m == 0 { (v - 1.0).abs() } else { v.abs() })
}

/// Central differences in t with one Richardson step, orders 1 and 2.
pub fn richardson_time_derivative(g: impl Fn(f64) -> f64, t: f64, n: usize) -> f64 {
    let d = |h: f64| match n {
        1 => (g(t + h) - g(t - h)) / (2.0 * h),
        _ => (g(t + h) - 2.0 * g(t) + g(t - h)) / (h * h),
    };
    let h = 2e-3 * t;
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

pub fn classical_heat(t: f64, x: f64, y: f64) -> f64 {
    (-(x - y).powi(2) / (4.0 * t)).exp() / (4.0 * PI * t).sqrt()
}

pub fn classical_poisson(t: f64, x: f64, y: f64) -> f64 {
    t / (PI * (t * t + (x - y).powi(2)))
}

fn kernels_suite(cfg: &ExperimentConfig) -> Result<Vec<CheckRow>> {
    let tol = cfg.tol("kernels");
    let mut rows = Vec::new();

    // mass: ∫ p_t dw = 1 and ∫ ∂_t p_t dw = 0, heat and Poisson
    let mut items = Vec::new();
    for &k in &cfg.k {
        for mode in ["heat", "poisson"] {
            for t in [0.1, 1.0] {
                for x in [0.0, 1.0] {
                    for m in [0usize, 1] {
                        items.push((k, mode, t, x, m));
                    }
                }
            }
        }
    }
    let masses = par_map(&items, |&(k, mode, t, x, m)| -> Result<f64> {
        let rs = rank_one(k)?;
        let ke = if mode == "heat" { KernelEvaluator::heat(&rs) } else { KernelEvaluator::poisson(&rs) };
        kernel_mass_defect(&ke, m, t, x, 0.1 * tol)
    });
    for ((k, mode, t, x, m), v) in items.iter().zip(masses) {
        let what = if *m == 0 { "mass" } else { "mass_dt" };
        rows.push(CheckRow::new(format!("{what}.{mode} k={k} t={t} x={x}"), v?, tol));
    }

    let sym_tol = cfg.tol("symmetry");
    let ode_tol = cfg.tol("ode");
    let cl_tol = cfg.tol("classical");
    let pts = [-2.0, -0.7, 0.0, 0.4, 1.5];
    for &k in &cfg.k {
        let rs = rank_one(k)?;
        let heat = KernelEvaluator::heat(&rs);
        let pois = KernelEvaluator::poisson(&rs);
        let mut hs = 0.0f64;
        let mut ps = 0.0f64;
        let mut dh = 0.0f64;
        for &x in &pts {
            for &y in &pts {
                for t in [0.1, 1.0] {
                    let a = heat.heat_kernel(t, &[x], &[y])?;
                    hs = hs.max(rel(heat.heat_kernel(t, &[y], &[x])?, a));
                    let p = pois.poisson_kernel(t, &[x], &[y], 1e-12)?;
                    ps = ps.max(rel(pois.poisson_kernel(t, &[y], &[x], 1e-12)?, p));
                    for n in [1usize, 2] {
                        let exact = heat.heat_time_derivative(n, t, &[x], &[y])?;
                        let fd = richardson_time_derivative(|s| heat.heat_kernel(s, &[x], &[y]).unwrap_or(f64::NAN), t, n);
                        dh = dh.max((exact - fd).abs() / exact.abs().max(a));
                    }
                }
            }
        }
        rows.push(CheckRow::new(format!("heat_symmetry k={k}"), hs, sym_tol));
        rows.push(CheckRow::new(format!("poisson_symmetry k={k}"), ps, sym_tol));
        rows.push(CheckRow::new(format!("heat_dt_vs_richardson k={k}"), dh, 1e-6));

        let e0 = ode_grid().iter().map(|&y| (dunkl_kernel_1d(k, 0.0 * y) - 1.0).abs()).fold(0.0, f64::max);
        rows.push(CheckRow::new(format!("kernel_e_at_origin k={k}"), e0, 1e-14));
        if k > 0.0 {
            rows.push(CheckRow::new(format!("kernel_ode_residual k={k}"), kernel_ode_max_residual(k)?, ode_tol));
        }
    }

    // classical limit k = 0
    let rs0 = rank_one(0.0)?;
    let heat0 = KernelEvaluator::heat(&rs0);
    let pois0 = KernelEvaluator::poisson(&rs0);
    let (mut eh, mut ep, mut ed, mut eq, mut ee) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for &x in &pts {
        for &y in &pts {
            ee = ee.max(rel(dunkl_kernel_1d(0.0, x * y), (x * y).exp()));
            for t in [0.05, 0.3, 1.0, 4.0] {
                let d2 = (x - y) * (x - y);
                eh = eh.max(rel(heat0.heat_kernel(t, &[x], &[y])?, classical_heat(t, x, y)));
                let dht = classical_heat(t, x, y) * (d2 / (4.0 * t * t) - 0.5 / t);
                ed = ed.max((heat0.heat_time_derivative(1, t, &[x], &[y])? - dht).abs() / classical_heat(t, x, y) / t);
                ep = ep.max(rel(pois0.poisson_kernel(t, &[x], &[y], 1e-12)?, classical_poisson(t, x, y)));
                let dpt = (d2 - t * t) / (PI * (t * t + d2).powi(2));
                eq = eq.max((pois0.poisson_time_derivative(1, t, &[x], &[y], 1e-12)? - dpt).abs() / classical_poisson(t, x, y) * t);
            }
        }
    }
    rows.push(CheckRow::new("classical heat = gaussian", eh, cl_tol));
    rows.push(CheckRow::new("classical dt heat", ed, cl_tol));
    rows.push(CheckRow::new("classical poisson = cauchy", ep, cl_tol));
    rows.push(CheckRow::new("classical dt poisson", eq, cl_tol));
    rows.push(CheckRow::new("classical kernel = exp(xy)", ee, 1e-12));

    if let Some(spec) = &cfg.root_system {
        let rs = RootSystem::from_spec(spec).map_err(|e| DunklError::Config(format!("root_system: {e}")))?;
        rows.extend(root_system_checks(&rs, tol)?);
    }
    Ok(rows)
}

/// E(0,y) = 1, E(x,y) = E(y,x), heat symmetry and product mass in rank N.
fn root_system_checks(rs: &RootSystem, tol: f64) -> Result<Vec<CheckRow>> {
    let n = rs.dimension();
    let pts: Vec<Vec<f64>> = (0..4).map(|i| (0..n).map(|j| 0.3 * (i as f64 + 1.0) - 0.45 * j as f64).collect()).collect();
    let zero = vec![0.0; n];
    let heat = KernelEvaluator::heat(rs);
    let (mut e0, mut es, mut hs) = (0.0f64, 0.0f64, 0.0f64);
    for x in &pts {
        e0 = e0.max((dunkl_kernel_e(rs, &zero, x) - 1.0).abs());
        for y in &pts {
            es = es.max(rel(dunkl_kernel_e(rs, y, x), dunkl_kernel_e(rs, x, y)));
            hs = hs.max(rel(heat.heat_kernel(0.5, y, x)?, heat.heat_kernel(0.5, x, y)?));
        }
    }
    // the mass in rank N is the product of rank-one masses
    let mut mass = 1.0;
    for (j, &k) in rs.k().iter().enumerate() {
        let ke = KernelEvaluator::heat(&rank_one(k)?);
        mass *= ke.apply_semigroup(&FunctionHandle::constant(1.0), 0, 0.5, &[pts[1][j]], 0.1 * tol)?;
    }
    Ok(vec![
        CheckRow::new(format!("root_system N={n} kernel_e_at_origin"), e0, 1e-14),
        CheckRow::new(format!("root_system N={n} kernel_e_symmetry"), es, 1e-12),
        CheckRow::new(format!("root_system N={n} heat_symmetry"), hs, 1e-12),
        CheckRow::new(format!("root_system N={n} heat_mass"), (mass - 1.0).abs(), tol),
    ])
}

// ---------------------------------------------------------------------------
// semigroup law

/// Relative residual of ∫ K_t(x,z) K_s(z,y) dw(z) = K_{t+s}(x,y), rank one.
pub fn kernel_composition_residual(ke: &KernelEvaluator, t: f64, s: f64, x: f64, y: f64, tol: f64) -> Result<f64> {
    let heat = ke.mode == crate::heat_poisson::KernelMode::Heat;
    let inner = |z: f64| -> f64 {
        if heat {
            ke.heat_kernel(s, &[z], &[y]).unwrap_or(f64::NAN)
        } else {
            ke.poisson_kernel(s, &[z], &[y], 1e-3 * tol).unwrap_or(f64::NAN)
        }
    };
    let target = ke.kernel(t + s, &[x], &[y], 1e-3 * tol)?;
    let peak = inner(y).max(inner(-y)).max(f64::MIN_POSITIVE);
    let width = if heat { s.sqrt() } else { s };
    let opts = SamplerOptions {
        breakpoints: vec![y, -y],
        max_frequency: 0.0,
        sup_norm: peak,
        tol: 1e-2 * tol * target / peak,
        resolve: Some((0.25 * width, y.abs() + if heat { 12.0 * width } else { 20.0 * width })),
    };
    let sampler = SemigroupSampler::new(ke, t, &[x], 0, &opts)?;
    let v = sampler.integrate_values(inner, false);
    Ok(rel(v, target))
}

pub const LAW_TIMES: [f64; 5] = [0.1, 0.25, 0.5, 1.0, 2.0];

fn semigroup_suite(cfg: &ExperimentConfig) -> Result<Vec<CheckRow>> {
    let tol = cfg.tol("semigroup");
    let mut rows = Vec::new();
    let (x, y) = (0.3, -0.4);
    for &k in &cfg.k {
        let rs = rank_one(k)?;
        for (name, ke) in [("heat", KernelEvaluator::heat(&rs)), ("poisson", KernelEvaluator::poisson(&rs))] {
            let pairs: Vec<(f64, f64)> = LAW_TIMES.iter().flat_map(|&t| LAW_TIMES.iter().map(move |&s| (t, s))).collect();
            let res = par_map(&pairs, |&(t, s)| kernel_composition_residual(&ke, t, s, x, y, tol));
            let mut worst = 0.0f64;
            for r in res {
                let r = r?;
                worst = if r.is_nan() { f64::NAN } else { worst.max(r) };
            }
            rows.push(CheckRow::new(format!("{name}_law 5x5 k={k} x={x} y={y}"), worst, tol));
        }

        // contraction on the corpus
        let ke = KernelEvaluator::poisson(&rs);
        let corpus = corpus_members(cfg, cfg.beta[0])?;
        let xs = [-2.5, -1.0, -0.1, 0.0, 0.2, 1.3, 3.0];
        for c in &corpus {
            let sup = c.handle.sup_norm.unwrap_or(1.0);
            let items: Vec<(f64, f64)> = [0.01, 0.1, 1.0].iter().flat_map(|&t| xs.iter().map(move |&x| (t, x))).collect();
            let vals = par_map(&items, |&(t, x)| ke.apply_semigroup(&c.handle, 0, t, &[x], 1e-3 * tol));
            let mut worst = 0.0f64;
            for v in vals {
                worst = worst.max(v?.abs() / sup);
            }
            rows.push(CheckRow::new(format!("contraction {} k={k}", c.name()), worst, 1.0 + tol));
        }
    }

    // matrix semigroups
    let calc_tol = cfg.tol("calculus");
    for g in generators(cfg)? {
        let mut law = 0.0f64;
        let mut sub = 0.0f64;
        let rule = subordination_rule(cfg);
        for &t in &[0.1, 0.5, 2.0] {
            for &s in &[0.2, 1.0] {
                let lhs = semigroup_at(&g, t)? * semigroup_at(&g, s)?;
                law = law.max(op_norm(&(lhs - semigroup_at(&g, t + s)?)));
                let p = subordinate_at(&g, t, rule)? * subordinate_at(&g, s, rule)?;
                sub = sub.max(op_norm(&(p - subordinate_at(&g, t + s, rule)?)));
            }
        }
        rows.push(CheckRow::new(format!("matrix heat_law {}", g.id()), law, calc_tol));
        rows.push(CheckRow::new(format!("matrix subordinate_law {}", g.id()), sub, calc_tol));
        let c = analytic_constant(&g, &log_grid(1e-3, 1e3, 61))?;
        rows.push(CheckRow::new(format!("matrix analytic_constant {} finite", g.id()), if c.is_finite() { 0.0 } else { 1.0 }, 0.0));
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// abstract calculus

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Part {
    Calculus,
    Interpolation,
    All,
}

fn generators(cfg: &ExperimentConfig) -> Result<Vec<MatrixGenerator>> {
    cfg.generators.iter().map(|g| generator_by_name(g)).collect()
}

fn subordination_rule(cfg: &ExperimentConfig) -> SubordinationRule {
    SubordinationRule::LogPanels { width: cfg.quadrature.subordination_width, nodes_per_panel: cfg.quadrature.subordination_nodes }
}

fn configured_path(cfg: &ExperimentConfig, g: &MatrixGenerator) -> ContourPath {
    let mut p = g.default_path();
    p.panels_per_decade = cfg.quadrature.contour_panels_per_decade;
    p.nodes_per_panel = cfg.quadrature.contour_nodes;
    p
}

fn scaled_residual(a: &CMatrix, b: &CMatrix) -> f64 {
    op_norm(&(a - b)) / op_norm(b).max(1.0)
}

pub const INTERPOLATION_TRIPLES: [(f64, f64, f64); 2] = [(0.5, 1.5, 0.5), (0.4, 2.2, 0.25)];

/// K-functional sup grid and the time grid for Λ-norms, with their doublings.
pub fn interpolation_grids() -> ((Vec<f64>, Vec<f64>), (Vec<f64>, Vec<f64>)) {
    (
        (log_grid(1e-6, 1.0, 49), log_grid(1e-8, 1e3, 111)),
        (log_grid_doubled(1e-6, 1.0, 49), log_grid_doubled(1e-8, 1e3, 111)),
    )
}

/// Multiplier sup grid on [1e−3, 1e3].
pub fn multiplier_grid() -> (Vec<f64>, Vec<f64>) {
    (log_grid(1e-3, 1e3, 61), log_grid_doubled(1e-3, 1e3, 61))
}

fn calculus_rows(cfg: &ExperimentConfig, part: Part) -> Result<Vec<CalculusRow>> {
    let tol = cfg.tol("calculus");
    let gens = generators(cfg)?;
    let per_gen = par_map(&gens, |g| generator_rows(cfg, g, part, tol));
    let mut rows = Vec::new();
    for r in per_gen {
        rows.extend(r?);
    }
    if part != Part::Interpolation {
        rows.extend(cauchy_rows(tol)?);
    }
    Ok(rows)
}

/// Left/right classification of the Cauchy filter on Γ_{3π/4, 0.1}.
fn cauchy_rows(tol: f64) -> Result<Vec<CalculusRow>> {
    let f = AdmissibleFunction::exp_scaled(1.0)?;
    let path = ContourPath::new(0.75 * PI, 0.1, 1e3)?;
    let mut rows = Vec::new();
    for (lam, want) in [
        (Complex64::new(-2.0, 0.0), PathSide::Left),
        (Complex64::new(-3.0, 1.0), PathSide::Left),
        (Complex64::new(-1.0, 3.0), PathSide::Right),
        (Complex64::new(0.5, 0.0), PathSide::Right),
        (Complex64::new(-0.5, 2.0), PathSide::Right),
    ] {
        let c = cauchy_filter_check(&f, &path, lam, 1e-2 * tol)?;
        let wrong = if c.side == want { 0.0 } else { 1.0 };
        let param = format!("lambda={}{:+}i", lam.re, lam.im);
        rows.push(CalculusRow::residual("scalar", "cauchy_filter_side", param.clone(), wrong, 0.0, 0.0));
        rows.push(CalculusRow::residual("scalar", "cauchy_filter_residual", param, c.residual, 0.0, 1e-8));
    }
    Ok(rows)
}

fn generator_rows(cfg: &ExperimentConfig, g: &MatrixGenerator, part: Part, tol: f64) -> Result<Vec<CalculusRow>> {
    let id = g.id();
    let mut rows = Vec::new();
    let path = configured_path(cfg, g);
    let ctol = 1e-2 * tol;

    if part != Part::Interpolation {
        for t in [0.1, 1.0] {
            let f = AdmissibleFunction::exp_scaled(t)?;
            let c = contour_calculus(&f, g, &path, ctol)?;
            let r = scaled_residual(&c.value, &semigroup_at(g, t)?);
            rows.push(CalculusRow::residual(id, "contour_vs_spectral exp", format!("t={t}"), r, c.error, tol));
            let h = AdmissibleFunction::sqrt_exp(t)?;
            let c = contour_calculus(&h, g, &path, ctol)?;
            let r = scaled_residual(&c.value, &subordinate_spectral(g, t)?);
            rows.push(CalculusRow::residual(id, "contour_vs_spectral sqrt_exp", format!("t={t}"), r, c.error, tol));
        }
        for n in 1..=3u32 {
            let f = AdmissibleFunction::multiplier(n, 1.0)?;
            let c = contour_calculus(&f, g, &path, ctol)?;
            let r = scaled_residual(&c.value, &g.apply(&f));
            rows.push(CalculusRow::residual(id, "contour_vs_spectral multiplier", format!("n={n} t=1"), r, c.error, tol));
        }

        // homomorphism (fg)(A) = f(A) g(A)
        for (f, h) in [
            (AdmissibleFunction::exp_scaled(0.5)?, AdmissibleFunction::sqrt_exp(0.5)?),
            (AdmissibleFunction::multiplier(1, 0.3)?, AdmissibleFunction::exp_scaled(0.7)?),
        ] {
            let fg = contour_calculus(&f.product(&h), g, &path, ctol)?;
            let cf = contour_calculus(&f, g, &path, ctol)?;
            let ch = contour_calculus(&h, g, &path, ctol)?;
            let prod = &cf.value * &ch.value;
            let r = scaled_residual(&fg.value, &prod);
            let param = format!("{}*{}", f.name, h.name);
            rows.push(CalculusRow::residual(id, "homomorphism", param, r, fg.error + cf.error + ch.error, tol));
        }

        // resolvent identity R(λ) − R(μ) = (μ − λ) R(λ) R(μ)
        let (l, m) = (Complex64::new(1.0, 1.0), Complex64::new(2.0, -0.5));
        let (rl, rm) = (resolvent(g, l)?, resolvent(g, m)?);
        let r = scaled_residual(&(&rl - &rm), &((&rl * &rm) * (m - l)));
        rows.push(CalculusRow::residual(id, "resolvent_identity", "lambda=1+1i mu=2-0.5i", r, 0.0, tol));

        // subordination against e^{−t S}, S from Denman–Beavers
        let s_iter = sqrt_neg_iterative(g)?;
        let s_schur = sqrt_neg_matrix(g)?;
        rows.push(CalculusRow::residual(id, "sqrt_schur_vs_iteration", "", scaled_residual(&s_schur, &s_iter), 0.0, tol));
        let rule = subordination_rule(cfg);
        for t in [0.01, 0.1, 1.0, 10.0] {
            let p = subordinate_at(g, t, rule)?;
            let oracle = (-s_iter.clone() * Complex64::new(t, 0.0)).exp();
            rows.push(CalculusRow::residual(id, "subordination_vs_sqrt", format!("t={t}"), scaled_residual(&p, &oracle), 0.0, tol));
        }

        // Bessel potentials
        let nodes = cfg.quadrature.bessel_nodes;
        for gam in [0.4, 1.0] {
            let j = bessel_matrix(g, gam, nodes)?;
            let r = scaled_residual(&j, &bessel_spectral(g, gam)?);
            rows.push(CalculusRow::residual(id, "bessel_vs_spectral", format!("gamma={gam}"), r, 0.0, tol));
        }
        let j1 = bessel_matrix(g, 0.4, nodes)?;
        let j2 = bessel_matrix(g, 0.6, nodes)?;
        let r = scaled_residual(&(&j1 * &j2), &bessel_matrix(g, 1.0, nodes)?);
        rows.push(CalculusRow::residual(id, "bessel_composition", "gamma=0.4+0.6", r, 0.0, 1e-6));
    }

    if part != Part::Calculus {
        let x = CVector::from_element(g.dim(), Complex64::new(1.0, 0.0));
        let ((kt, nt), (kt2, nt2)) = interpolation_grids();
        let stab = cfg.bounds.interpolation_stability;
        for (b0, b1, th) in INTERPOLATION_TRIPLES {
            let param = format!("beta0={b0} beta1={b1} theta={th}");
            let c1 = interpolation_constant(g, &x, b0, b1, th, &kt, &nt)?;
            let c2 = interpolation_constant(g, &x, b0, b1, th, &kt2, &nt2)?;
            let change = (c2.constant - c1.constant).abs() / c1.constant;
            rows.push(CalculusRow::info(id, "k_functional_constant", param.clone(), c1.constant, change));
            rows.push(CalculusRow::residual(id, "k_functional_constant_stability", param.clone(), change, 0.0, stab));
            rows.push(CalculusRow::residual(
                id,
                "k_functional_constant_finite",
                param.clone(),
                if c1.constant.is_finite() && c1.constant > 0.0 { 0.0 } else { 1.0 },
                0.0,
                0.0,
            ));
            let split = k_functional_upper(g, &x, 1e-3, b0, b1, th, &nt)?;
            let r = (&split.x0 + &split.x1 - &x).norm() / x.norm();
            rows.push(CalculusRow::residual(id, "k_split_sum", format!("{param} t=1e-3"), r, 0.0, tol));
        }

        let (ts, ts2) = multiplier_grid();
        let mstab = cfg.bounds.multiplier_stability;
        for n in 1..=3u32 {
            let m1 = multiplier_norm(g, n, &ts, &path, 1e-9)?;
            let m2 = multiplier_norm(g, n, &ts2, &path, 1e-9)?;
            let change = (m2.sup - m1.sup).abs() / m1.sup;
            rows.push(CalculusRow::info(id, "multiplier_sup", format!("n={n}"), m1.sup, change));
            rows.push(CalculusRow::residual(id, "multiplier_sup_stability", format!("n={n}"), change, 0.0, mstab));
        }
    }

    if part == Part::All {
        let ts = log_grid(1e-3, 1e3, 61);
        for (w, v) in omega_regularization(g, &OMEGAS, |h| analytic_constant(h, &ts))? {
            rows.push(CalculusRow::info(id, "omega_regularization analytic_constant", format!("omega={w}"), v, 0.0));
        }
        rows.push(CalculusRow::info(id, "resolvent_constant", format!("delta={:.6}", g.delta()), g.resolvent_constant(), 0.0));
        let e = semigroup_at(g, 0.0)?;
        rows.push(CalculusRow::residual(id, "semigroup_at_zero", "t=0", scaled_residual(&e, &identity(g.dim())), 0.0, tol));
    }
    Ok(rows)
}

/// Rows of the `calculus` command: every experiment on the configured generators.
pub fn run_calculus(cfg: &ExperimentConfig) -> Result<Vec<CalculusRow>> {
    calculus_rows(cfg, Part::All)
}

// ---------------------------------------------------------------------------
// norms

pub fn corpus_members(cfg: &ExperimentConfig, beta: f64) -> Result<Vec<CorpusFunction>> {
    if cfg.corpus.is_empty() {
        default_corpus(beta)
    } else {
        cfg.corpus.iter().map(|c| corpus_by_name(c, beta)).collect()
    }
}

/// Rows of the `norms` command.
pub fn run_norms(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    let s = cfg.norm_settings()?;
    let build = |b: f64| corpus_members(cfg, b);
    equivalence_report(&build, &cfg.beta, &cfg.k, &s)
}

pub const BESSEL_SHIFT: (f64, f64) = (0.4, 0.4);

fn norms_suite(cfg: &ExperimentConfig) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    let s = cfg.norm_settings()?;
    for r in run_norms(cfg)? {
        if r.estimator.contains('/') {
            let name = format!("band {} k={} beta={} {} in [{}, {}]", r.function, r.k, r.beta, r.estimator, s.band.0, s.band.1);
            rows.push(CheckRow { pass: r.in_band(), check: name, value: r.value, bound: s.band.1 });
        }
    }
    // exponent recovery: slope of ∂_t P_t W_β is β − 1
    let eb = cfg.bounds.exponent;
    let mut items = Vec::new();
    for &k in &cfg.k {
        for &b in &cfg.beta {
            if b < 1.0 {
                items.push((k, b));
            }
        }
    }
    let fits = par_map(&items, |&(k, b)| -> Result<f64> {
        let ke = KernelEvaluator::poisson(&rank_one(k)?);
        let w = CorpusFunction::weierstrass(b, 2.0)?;
        Ok(decay_exponent_fit(&ke, &w.handle, 1, &s.times, &s.grid, s.tol)?.slope)
    });
    for ((k, b), f) in items.iter().zip(fits) {
        let slope = f?;
        rows.push(CheckRow::new(format!("decay_slope weierstrass2 beta={b} k={k} slope={slope:.4} target={:.4}", b - 1.0), (slope - (b - 1.0)).abs(), eb));
    }
    // Bessel shift: J^γ W_β decays like t^{β+γ−1}
    let (beta, gamma) = BESSEL_SHIFT;
    let w = CorpusFunction::weierstrass(beta, 2.0)?;
    for &k in &cfg.k {
        let heat = KernelEvaluator::heat(&rank_one(k)?);
        let fit = bessel_decay_fit(&heat, &w.handle, gamma, 1, &s.times, &s.grid, s.tol)?;
        let target = beta + gamma - 1.0;
        rows.push(CheckRow::new(
            format!("bessel_shift_slope k={k} slope={:.4} target={target:.4}", fit.slope),
            (fit.slope - target).abs(),
            cfg.bounds.bessel_exponent,
        ));
        let tol = cfg.tol("norms");
        let mut worst = 0.0f64;
        for x in [0.0, 0.7, 2.0] {
            let one = bessel_potential_apply(&heat, &w.handle, 1.0, x, tol)?;
            let comp = bessel_potential_compose(&heat, &w.handle, 0.4, 0.6, x, tol)?;
            worst = worst.max((comp - one).abs());
        }
        rows.push(CheckRow::new(format!("bessel_composition functions k={k}"), worst, 10.0 * tol));
    }
    Ok(rows)
}
