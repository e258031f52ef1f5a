//! Semigroups of finite-dimensional sectorial generators: e^{tA}, the
//! subordinate e^{-t√-A}, the holomorphic calculus on Γ_{θ,ε}, Bessel
//! potentials (I-A)^{-γ}, Λ^β_A norms and the K-functional split.
//!
//! Matrix functions are evaluated on the complex Schur form A = Q T Q*.
//! For triangular T, f(T)_{ij} is the sum over index chains
//! i = s_0 < … < s_r = j of T_{s_0 s_1}…T_{s_{r-1} s_r} f[λ_{s_0}, …, λ_{s_r}],
//! so defective and clustered spectra only need confluent divided
//! differences, which come from a small Cauchy circle.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{DunklError, Result};
use crate::pool::par_map;
use crate::quadrature::{adaptive_integrate, gauss_laguerre, gauss_legendre, ContourPath, Interval};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const MAX_DIM: usize = 16;

/// Operator 2-norm.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|v| Complex64::new(v, 0.0))
}

// ---------------------------------------------------------------------------
// scalar functions

type ScalarFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;
type RadiusFn = Arc<dyn Fn(Complex64) -> f64 + Send + Sync>;
type EnvelopeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A holomorphic function on the left half-plane. `radius(z)` is a disc
/// radius around z on which f is holomorphic and tame (used for confluent
/// divided differences); `envelope(θ, s)` bounds |f(s e^{±iθ})| and is the
/// decay certificate the contour truncation relies on.
#[derive(Clone)]
pub struct AdmissibleFunction {
    pub name: String,
    eval: ScalarFn,
    radius: RadiusFn,
    envelope: Option<EnvelopeFn>,
}

impl std::fmt::Debug for AdmissibleFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AdmissibleFunction")
            .field("name", &self.name)
            .field("certified", &self.envelope.is_some())
            .finish()
    }
}

/// Distance from z to the cut [0, ∞).
fn dist_to_positive_axis(z: Complex64) -> f64 {
    if z.re <= 0.0 {
        z.norm()
    } else {
        z.im.abs()
    }
}

/// Principal √(-z), cut along z ∈ [0, ∞).
pub fn sqrt_neg(z: Complex64) -> Complex64 {
    (-z).sqrt()
}

impl AdmissibleFunction {
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
        radius: impl Fn(Complex64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), eval: Arc::new(eval), radius: Arc::new(radius), envelope: None }
    }

    pub fn with_envelope(mut self, env: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.envelope = Some(Arc::new(env));
        self
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.eval)(z)
    }

    pub fn radius(&self, z: Complex64) -> f64 {
        (self.radius)(z)
    }

    pub fn envelope(&self, theta: f64, s: f64) -> Option<f64> {
        self.envelope.as_ref().map(|e| e(theta, s))
    }

    pub fn is_certified(&self) -> bool {
        self.envelope.is_some()
    }

    /// f₁(z) = e^{tz}.
    pub fn exp_scaled(t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(DunklError::Parameter(format!("exp_scaled needs t > 0 (got {t})")));
        }
        Ok(Self::new(format!("exp({t}z)"), move |z| (z * t).exp(), move |_| 1.0 / t)
            .with_envelope(move |th, s| (t * s * th.cos()).exp()))
    }

    /// f₂(z) = e^{-t√-z}.
    pub fn sqrt_exp(t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(DunklError::Parameter(format!("sqrt_exp needs t > 0 (got {t})")));
        }
        Ok(Self::new(
            format!("exp(-{t}sqrt(-z))"),
            move |z| (-sqrt_neg(z) * t).exp(),
            move |z| (0.5 * dist_to_positive_axis(z)).min(2.0 * z.norm().sqrt() / t),
        )
        .with_envelope(move |th, s| (-t * s.sqrt() * (0.5 * (PI - th)).cos()).exp()))
    }

    /// m(tz) with m(λ) = (√-λ)^n e^{λ + √-λ}.
    pub fn multiplier(n: u32, t: f64) -> Result<Self> {
        if n < 1 || !(t > 0.0) || !t.is_finite() {
            return Err(DunklError::Parameter(format!("multiplier needs n >= 1 and t > 0 (got {n}, {t})")));
        }
        Ok(Self::new(
            format!("m{n}({t}z)"),
            move |z| {
                let r = sqrt_neg(z * t);
                r.powu(n) * (z * t + r).exp()
            },
            move |z| (0.5 * dist_to_positive_axis(z)).min(1.0 / t),
        )
        .with_envelope(move |th, s| {
            let ts = t * s;
            ts.powf(0.5 * n as f64) * (ts * th.cos() + ts.sqrt() * (0.5 * (PI - th)).cos()).exp()
        }))
    }

    /// z^m e^{tz}: the m-th time derivative symbol of e^{tA}.
    pub fn heat_derivative(m: u32, t: f64) -> Self {
        let r = if t > 0.0 { 1.0 / t } else { 1.0 };
        Self::new(format!("z^{m}exp({t}z)"), move |z| z.powu(m) * (z * t).exp(), move |_| r)
    }

    /// (-√-z)^m e^{-t√-z}: the m-th time derivative symbol of e^{-t√-A}.
    pub fn poisson_derivative(m: u32, t: f64) -> Self {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        Self::new(
            format!("(-sqrt(-z))^{m}exp(-{t}sqrt(-z))"),
            move |z| {
                let r = sqrt_neg(z);
                r.powu(m) * sign * (-r * t).exp()
            },
            move |z| {
                let d = 0.5 * dist_to_positive_axis(z);
                if t > 0.0 {
                    d.min(2.0 * z.norm().sqrt() / t)
                } else {
                    d
                }
            },
        )
    }

    /// (1 - z)^{-γ}, principal branch.
    pub fn bessel_symbol(gamma: f64) -> Self {
        Self::new(
            format!("(1-z)^-{gamma}"),
            move |z| (-(ONE - z).ln() * gamma).exp(),
            |z| {
                let w = z - ONE;
                0.5 * dist_to_positive_axis(w)
            },
        )
    }

    pub fn product(&self, other: &Self) -> Self {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        let (rf, rg) = (self.radius.clone(), other.radius.clone());
        let mut out = Self::new(
            format!("{}*{}", self.name, other.name),
            move |z| f(z) * g(z),
            move |z| rf(z).min(rg(z)),
        );
        if let (Some(a), Some(b)) = (self.envelope.clone(), other.envelope.clone()) {
            out.envelope = Some(Arc::new(move |th, s| a(th, s) * b(th, s)));
        }
        out
    }

    /// Sampled admissibility: bounded on a grid of ℂ₋ and dominated by the
    /// envelope on both rays (within a relative slack) at angle θ.
    pub fn check(&self, theta: f64) -> Result<AdmissibilityReport> {
        let mut sup = 0.0f64;
        for i in 1..=20 {
            for j in -20..=20 {
                let z = Complex64::new(-0.25 * i as f64, 0.25 * j as f64);
                let v = self.eval(z).norm();
                if !v.is_finite() {
                    return Err(DunklError::Function(format!("{} is not finite at {z}", self.name)));
                }
                sup = sup.max(v);
            }
        }
        let env = self
            .envelope
            .as_ref()
            .ok_or_else(|| DunklError::Function(format!("{} has no decay certificate", self.name)))?;
        let mut worst = 0.0f64;
        for i in 0..60 {
            let s = 10f64.powf(-3.0 + 0.1 * i as f64);
            for th in [theta, -theta] {
                let v = self.eval(Complex64::from_polar(s, th)).norm();
                let e = env(theta, s);
                if e > 0.0 {
                    worst = worst.max(v / e);
                } else if v > 0.0 {
                    worst = f64::INFINITY;
                }
            }
        }
        if worst > 1.0 + 1e-9 {
            return Err(DunklError::Function(format!(
                "{}: envelope violated by factor {worst:e} at theta = {theta}",
                self.name
            )));
        }
        let ray = adaptive_integrate(|s| env(theta, s), Interval::Upper(0.0), 1e-10)?;
        if !ray.value.is_finite() {
            return Err(DunklError::Function(format!("{}: ray integral diverges", self.name)));
        }
        Ok(AdmissibilityReport { sup_on_grid: sup, envelope_ratio: worst, ray_integral: ray.value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibilityReport {
    pub sup_on_grid: f64,
    pub envelope_ratio: f64,
    pub ray_integral: f64,
}

/// f[z_0, …, z_r] for arbitrary (possibly repeated) nodes.
pub fn divided_difference(f: &AdmissibleFunction, z: &[Complex64]) -> Complex64 {
    match z.len() {
        0 => ZERO,
        1 => f.eval(z[0]),
        n => {
            let c = z.iter().sum::<Complex64>() / n as f64;
            let spread = z.iter().map(|w| (w - c).norm()).fold(0.0, f64::max);
            let rho = f.radius(c);
            if spread <= 0.25 * rho {
                // (2πi)^{-1} ∮ f(w) / Π(w - z_j) dw, trapezoid on |w - c| = ρ
                let m = 64;
                let mut s = ZERO;
                for j in 0..m {
                    let e = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64);
                    let w = c + e * rho;
                    let den = z.iter().fold(ONE, |acc, zz| acc * (w - zz));
                    s += f.eval(w) * e * rho / den;
                }
                s / m as f64
            } else {
                let (mut a, mut b, mut d) = (0, 1, -1.0);
                for i in 0..n {
                    for j in i + 1..n {
                        let dij = (z[i] - z[j]).norm();
                        if dij > d {
                            (a, b, d) = (i, j, dij);
                        }
                    }
                }
                let without = |skip: usize| -> Vec<Complex64> {
                    z.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, v)| *v).collect()
                };
                (divided_difference(f, &without(a)) - divided_difference(f, &without(b))) / (z[b] - z[a])
            }
        }
    }
}

/// f(T) for upper-triangular T via chain sums of divided differences.
fn triangular_function(t: &CMatrix, f: &AdmissibleFunction) -> CMatrix {
    let n = t.nrows();
    let lam: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let mut out = CMatrix::zeros(n, n);
    let mut chain = Vec::with_capacity(n);
    let mut nodes = Vec::with_capacity(n);
    for i in 0..n {
        out[(i, i)] = f.eval(lam[i]);
        for j in i + 1..n {
            let inner = j - i - 1;
            let mut s = ZERO;
            for mask in 0u32..(1u32 << inner) {
                chain.clear();
                chain.push(i);
                chain.extend((0..inner).filter(|b| mask >> b & 1 == 1).map(|b| i + 1 + b));
                chain.push(j);
                let prod = chain.windows(2).fold(ONE, |acc, w| acc * t[(w[0], w[1])]);
                if prod == ZERO {
                    continue;
                }
                nodes.clear();
                nodes.extend(chain.iter().map(|&k| lam[k]));
                s += prod * divided_difference(f, &nodes);
            }
            out[(i, j)] = s;
        }
    }
    out
}

/// Inverse of (λI - T) for upper-triangular T by back substitution.
fn triangular_resolvent(t: &CMatrix, lambda: Complex64) -> CMatrix {
    let n = t.nrows();
    let mut x = CMatrix::zeros(n, n);
    for j in 0..n {
        x[(j, j)] = ONE / (lambda - t[(j, j)]);
        for i in (0..j).rev() {
            let mut s = ZERO;
            for k in i + 1..=j {
                s += t[(i, k)] * x[(k, j)];
            }
            x[(i, j)] = s / (lambda - t[(i, i)]);
        }
    }
    x
}

// ---------------------------------------------------------------------------
// generators

#[derive(Debug, Clone)]
pub struct MatrixGenerator {
    id: String,
    a: CMatrix,
    q: CMatrix,
    t: CMatrix,
    eigenvalues: Vec<Complex64>,
    delta: f64,
    max_delta: f64,
    resolvent_constant: f64,
    zero_in_resolvent: bool,
}

impl MatrixGenerator {
    pub fn new(id: impl Into<String>, a: &DMatrix<f64>) -> Result<Self> {
        Self::from_complex(id, to_complex(a))
    }

    pub fn from_complex(id: impl Into<String>, a: CMatrix) -> Result<Self> {
        let id = id.into();
        let n = a.nrows();
        if n == 0 || a.ncols() != n {
            return Err(DunklError::Parameter(format!("generator {id} must be a non-empty square matrix")));
        }
        if n > MAX_DIM {
            return Err(DunklError::Parameter(format!("generator {id}: dimension {n} exceeds {MAX_DIM}")));
        }
        if a.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(DunklError::Parameter(format!("generator {id} has non-finite entries")));
        }
        let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
        let schur = Schur::try_new(a.clone(), 1e-15 * scale, 10_000)
            .ok_or_else(|| DunklError::Parameter(format!("generator {id}: Schur iteration did not converge")))?;
        let (q, mut t) = schur.unpack();
        for i in 0..n {
            for j in 0..i {
                if t[(i, j)].norm() > 1e-10 * scale {
                    return Err(DunklError::Parameter(format!("generator {id}: Schur form is not triangular")));
                }
                t[(i, j)] = ZERO;
            }
        }
        let eigenvalues: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
        let tiny = 1e-13 * scale;
        let zero_in_resolvent = eigenvalues.iter().all(|l| l.norm() > tiny);
        let angle = eigenvalues
            .iter()
            .filter(|l| l.norm() > tiny)
            .map(|l| l.arg().abs())
            .fold(PI, f64::min);
        let max_delta = angle - FRAC_PI_2;
        if !(max_delta > 0.0) {
            return Err(DunklError::Parameter(format!(
                "generator {id}: spectrum meets the closed right half-plane (|arg| = {angle})"
            )));
        }
        let delta = 0.75 * max_delta;
        let mut g = Self { id, a, q, t, eigenvalues, delta, max_delta, resolvent_constant: f64::NAN, zero_in_resolvent };
        g.resolvent_constant = g.sample_resolvent_constant();
        Ok(g)
    }

    /// max |λ|·‖R(λ:A)‖ over 100 points of Σ_δ.
    fn sample_resolvent_constant(&self) -> f64 {
        let edge = FRAC_PI_2 + self.delta;
        let mut c = 0.0f64;
        for i in 0..20 {
            let r = 10f64.powf(-3.0 + 6.0 * i as f64 / 19.0);
            for arg in [-edge, -0.5 * edge, 0.0, 0.5 * edge, edge] {
                let l = Complex64::from_polar(r, arg);
                let rl = triangular_resolvent(&self.t, l);
                c = c.max(r * op_norm(&rl));
            }
        }
        c
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.a
    }

    pub fn schur(&self) -> (&CMatrix, &CMatrix) {
        (&self.q, &self.t)
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    /// Σ_δ = {|arg λ| < π/2 + δ} is resolvent-bounded for this δ.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Supremum of admissible δ (spectral angle minus π/2).
    pub fn max_delta(&self) -> f64 {
        self.max_delta
    }

    pub fn resolvent_constant(&self) -> f64 {
        self.resolvent_constant
    }

    pub fn zero_in_resolvent(&self) -> bool {
        self.zero_in_resolvent
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.norm()).fold(0.0, f64::max)
    }

    /// A - ωI.
    pub fn shifted(&self, omega: f64) -> Result<Self> {
        let n = self.dim();
        let a = &self.a - CMatrix::identity(n, n) * Complex64::new(omega, 0.0);
        Self::from_complex(format!("{}-{omega}", self.id), a)
    }

    /// Path inside Σ_δ enclosing the spectrum: θ halfway into the sector.
    pub fn default_path(&self) -> ContourPath {
        let eps = if self.zero_in_resolvent { 0.0 } else { 1e-3 };
        ContourPath::new(FRAC_PI_2 + 0.5 * self.delta, eps, 1e3).expect("theta strictly inside (pi/2, pi)")
    }

    /// f(A) = Q f(T) Q*.
    pub fn apply(&self, f: &AdmissibleFunction) -> CMatrix {
        let ft = triangular_function(&self.t, f);
        &self.q * ft * self.q.adjoint()
    }

    pub fn apply_vector(&self, f: &AdmissibleFunction, x: &CVector) -> CVector {
        self.apply(f) * x
    }
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// diag(-1,-4,-9); 3×3 Jordan block at -2; [[-1,2],[-1/8,-1]] (eigenvalues -1 ± i/2).
pub fn test_generators() -> Vec<MatrixGenerator> {
    GENERATOR_NAMES.iter().map(|n| generator_by_name(n).expect("built-in generator")).collect()
}

pub const GENERATOR_NAMES: [&str; 3] = ["diag", "jordan", "nonnormal"];

pub fn generator_by_name(name: &str) -> Result<MatrixGenerator> {
    match name {
        "diag" => MatrixGenerator::new("diag", &DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, -4.0, -9.0]))),
        "jordan" => MatrixGenerator::new(
            "jordan",
            &DMatrix::from_row_slice(3, 3, &[-2.0, 1.0, 0.0, 0.0, -2.0, 1.0, 0.0, 0.0, -2.0]),
        ),
        "nonnormal" => MatrixGenerator::new("nonnormal", &DMatrix::from_row_slice(2, 2, &[-1.0, 2.0, -0.125, -1.0])),
        other => Err(DunklError::Config(format!(
            "unknown generator '{other}' (expected one of {})",
            GENERATOR_NAMES.join(", ")
        ))),
    }
}

// ---------------------------------------------------------------------------
// semigroups

/// e^{tA}.
pub fn semigroup_at(a: &MatrixGenerator, t: f64) -> Result<CMatrix> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(DunklError::Parameter(format!("semigroup_at needs t >= 0 (got {t})")));
    }
    if t == 0.0 {
        return Ok(identity(a.dim()));
    }
    Ok(a.apply(&AdmissibleFunction::exp_scaled(t)?))
}

/// sup_t t‖A e^{tA}‖ over the grid, the analytic-semigroup constant.
pub fn analytic_constant(a: &MatrixGenerator, times: &[f64]) -> Result<f64> {
    let mut c = 0.0f64;
    for &t in times {
        let m = a.apply(&AdmissibleFunction::heat_derivative(1, t));
        c = c.max(t * op_norm(&m));
    }
    Ok(c)
}

/// Quadrature for Γ(1/2)^{-1} ∫ e^{-u} e^{(t²/4u)A} u^{-1/2} du.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SubordinationRule {
    /// Plain Gauss–Laguerre with weight u^{-1/2} e^{-u}.
    GaussLaguerre { nodes: usize },
    /// Composite Gauss–Legendre in y = ln u; the integrand decays
    /// doubly exponentially at both ends.
    LogPanels { width: f64, nodes_per_panel: usize },
}

impl Default for SubordinationRule {
    fn default() -> Self {
        SubordinationRule::LogPanels { width: 0.5, nodes_per_panel: 16 }
    }
}

impl SubordinationRule {
    /// Nodes u_j and weights w_j with ∫ g(u) e^{-u}u^{-1/2} du / √π ≈ Σ w_j g(u_j).
    /// `decay` is the smallest -Re λ over the spectrum and `t` the time.
    pub fn nodes(&self, t: f64, decay: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        match *self {
            SubordinationRule::GaussLaguerre { nodes } => {
                let r = gauss_laguerre(-0.5, nodes)?;
                let c = PI.sqrt();
                Ok((r.nodes.clone(), r.weights.iter().map(|w| w / c).collect()))
            }
            SubordinationRule::LogPanels { width, nodes_per_panel } => {
                if !(width > 0.0) || nodes_per_panel < 2 {
                    return Err(DunklError::Parameter("log-panel rule needs width > 0 and >= 2 nodes".into()));
                }
                // e^{-e^y + y/2} < 1e-18 above y_hi; below y_lo the semigroup factor
                // e^{-decay t² e^{-y}/4} (or e^{y/2} alone) is negligible
                let y_hi = 45f64.ln();
                let mut y_lo = -2.0 * 1e18f64.ln();
                if decay > 0.0 && t > 0.0 {
                    y_lo = y_lo.max((decay * t * t / 4.0 / 60.0).ln());
                }
                let panels = ((y_hi - y_lo) / width).ceil().max(1.0) as usize;
                let h = (y_hi - y_lo) / panels as f64;
                let gl = gauss_legendre(nodes_per_panel);
                let c = PI.sqrt();
                let mut us = Vec::with_capacity(panels * nodes_per_panel);
                let mut ws = Vec::with_capacity(panels * nodes_per_panel);
                for p in 0..panels {
                    let a = y_lo + h * p as f64;
                    for (&z, &w) in gl.nodes.iter().zip(&gl.weights) {
                        let y = a + 0.5 * h * (1.0 + z);
                        let u = y.exp();
                        us.push(u);
                        ws.push(0.5 * h * w * (-u + 0.5 * y).exp() / c);
                    }
                }
                Ok((us, ws))
            }
        }
    }
}

fn spectral_decay(a: &MatrixGenerator) -> f64 {
    a.eigenvalues().iter().map(|l| -l.re).fold(f64::INFINITY, f64::min).max(0.0)
}

/// P_t = e^{-t√-A} by the subordination integral.
pub fn subordinate_at(a: &MatrixGenerator, t: f64, rule: SubordinationRule) -> Result<CMatrix> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(DunklError::Parameter(format!("subordinate_at needs t > 0 (got {t})")));
    }
    let (us, ws) = rule.nodes(t, spectral_decay(a))?;
    let n = a.dim();
    let mut acc = CMatrix::zeros(n, n);
    for (&u, &w) in us.iter().zip(&ws) {
        acc += semigroup_at(a, t * t / (4.0 * u))? * Complex64::new(w, 0.0);
    }
    Ok(acc)
}

/// ∂_t^order P_t by the subordination derivative formulas:
/// ψ^{(2n)}(t) = (-1)^n ∫ e^{-u} φ^{(n)}(t²/4u) du/√(πu),
/// ψ^{(2n+1)}(t) = (-1)^n ∫ e^{-u} (t/2u) φ^{(n+1)}(t²/4u) du/√(πu).
pub fn subordinate_derivative(a: &MatrixGenerator, t: f64, order: u32, rule: SubordinationRule) -> Result<CMatrix> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(DunklError::Parameter(format!("subordinate_derivative needs t > 0 (got {t})")));
    }
    let (us, ws) = rule.nodes(t, spectral_decay(a))?;
    let half = order / 2;
    let odd = order % 2 == 1;
    let k = if odd { half + 1 } else { half };
    let sign = if half % 2 == 0 { 1.0 } else { -1.0 };
    let n = a.dim();
    let mut acc = CMatrix::zeros(n, n);
    for (&u, &w) in us.iter().zip(&ws) {
        let s = t * t / (4.0 * u);
        let phi = a.apply(&AdmissibleFunction::heat_derivative(k, s));
        let factor = if odd { t / (2.0 * u) } else { 1.0 };
        acc += phi * Complex64::new(sign * w * factor, 0.0);
    }
    Ok(acc)
}

fn check_sqrt_branch(a: &MatrixGenerator) -> Result<()> {
    let scale = a.spectral_radius().max(1.0);
    if let Some(l) = a.eigenvalues().iter().find(|l| l.im.abs() <= 1e-13 * scale && l.re >= -1e-13 * scale) {
        return Err(DunklError::Branch(format!("{l}")));
    }
    Ok(())
}

/// e^{-t√-A} from the Schur form (principal square root).
pub fn subordinate_spectral(a: &MatrixGenerator, t: f64) -> Result<CMatrix> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(DunklError::Parameter(format!("subordinate_spectral needs t >= 0 (got {t})")));
    }
    check_sqrt_branch(a)?;
    if t == 0.0 {
        return Ok(identity(a.dim()));
    }
    Ok(a.apply(&AdmissibleFunction::sqrt_exp(t)?))
}

/// √-A from the Schur form.
pub fn sqrt_neg_matrix(a: &MatrixGenerator) -> Result<CMatrix> {
    check_sqrt_branch(a)?;
    Ok(a.apply(&AdmissibleFunction::new("sqrt(-z)", sqrt_neg, |z| 0.5 * dist_to_positive_axis(z))))
}

/// (λI - A)^{-1}.
pub fn resolvent(a: &MatrixGenerator, lambda: Complex64) -> Result<CMatrix> {
    let gap = a.eigenvalues().iter().map(|l| (lambda - l).norm()).fold(f64::INFINITY, f64::min);
    if gap <= 1e-12 * lambda.norm().max(1.0) {
        return Err(DunklError::Singular(format!("lambda = {lambda}")));
    }
    let r = triangular_resolvent(&a.t, lambda);
    Ok(&a.q * r * a.q.adjoint())
}

// ---------------------------------------------------------------------------
// contour calculus

#[derive(Debug, Clone)]
pub struct ContourResult {
    pub value: CMatrix,
    pub error: f64,
    pub tail_bound: f64,
    pub r_max: f64,
    pub nodes: usize,
}

/// (C'/π) ∫_R^∞ env(θ,s) ds/s: both rays, resolvent bounded by C'/s.
fn tail_bound(f: &AdmissibleFunction, theta: f64, c_res: f64, r: f64) -> Result<f64> {
    let env = f
        .envelope
        .as_ref()
        .ok_or_else(|| DunklError::Function(format!("{} has no decay certificate", f.name)))?;
    let e = adaptive_integrate(|s| env(theta, s) / s, Interval::Upper(r), 1e-16)
        .or_else(|_| adaptive_integrate(|s| env(theta, s) / s, Interval::Upper(r), 1e-12))?;
    Ok(c_res / PI * e.value.abs())
}

fn check_path(a: &MatrixGenerator, path: &ContourPath) -> Result<()> {
    if path.eps == 0.0 && !a.zero_in_resolvent() {
        return Err(DunklError::Path(format!("{}: 0 is in the spectrum and the path passes through 0", a.id())));
    }
    if path.theta >= FRAC_PI_2 + a.max_delta() {
        return Err(DunklError::Path(format!(
            "{}: theta = {} leaves the sector (needs < {})",
            a.id(),
            path.theta,
            FRAC_PI_2 + a.max_delta()
        )));
    }
    for l in a.eigenvalues() {
        if path.side(*l) >= 0.0 || path.distance(*l) < 1e-8 {
            return Err(DunklError::Path(format!("{}: eigenvalue {l} is not enclosed by the path", a.id())));
        }
    }
    Ok(())
}

/// (2πi)^{-1} ∫_Γ f(λ) R(λ:A) dλ with R_max from the decay certificate and a
/// refinement-based discretization error.
pub fn contour_calculus(f: &AdmissibleFunction, a: &MatrixGenerator, path: &ContourPath, tol: f64) -> Result<ContourResult> {
    if !(tol > 0.0) {
        return Err(DunklError::Parameter("contour tolerance must be positive".into()));
    }
    check_path(a, path)?;
    let c_res = a.resolvent_constant();
    let mut r = (4.0 * a.spectral_radius()).max(4.0 * path.eps).max(1.0);
    let mut tail = tail_bound(f, path.theta, c_res, r)?;
    while tail > 0.5 * tol {
        r *= 2.0;
        if r > 1e15 {
            return Err(DunklError::Truncation(tail));
        }
        tail = tail_bound(f, path.theta, c_res, r)?;
    }
    let n = a.dim();
    let sum = |p: &ContourPath| -> (CMatrix, usize) {
        let nodes = p.discretize();
        let mut s = CMatrix::zeros(n, n);
        for (z, w) in &nodes {
            let fz = f.eval(*z);
            if fz == ZERO {
                continue;
            }
            s += triangular_resolvent(&a.t, *z) * (fz * w);
        }
        (s, nodes.len())
    };
    let mut p = path.with_r_max(r);
    let (mut prev, _) = sum(&p);
    let scale = Complex64::new(0.0, -1.0 / (2.0 * PI));
    for _ in 0..5 {
        p = p.refined();
        let (cur, count) = sum(&p);
        let err = op_norm(&(&cur - &prev)) / (2.0 * PI);
        if err <= 0.5 * tol {
            let value = &a.q * (cur * scale) * a.q.adjoint();
            return Ok(ContourResult { value, error: err + tail, tail_bound: tail, r_max: r, nodes: count });
        }
        prev = cur;
    }
    Err(DunklError::Quadrature { value: op_norm(&prev) / (2.0 * PI), estimate: f64::NAN })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathSide {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchyFilter {
    pub value: Complex64,
    pub side: PathSide,
    /// f(λ) on the left of the path, 0 on the right.
    pub expected: Complex64,
    pub residual: f64,
}

/// f̃(λ) = (2πi)^{-1} ∫_Γ f(z)/(z-λ) dz together with the side of λ.
pub fn cauchy_filter_check(f: &AdmissibleFunction, path: &ContourPath, lambda: Complex64, tol: f64) -> Result<CauchyFilter> {
    let d = path.distance(lambda);
    if d < 1e-8 {
        return Err(DunklError::IllConditioned(d));
    }
    // |z - λ| ≥ s/2 once s ≥ 2|λ|, so the tail is bounded by the ray integral of 2 env/s
    let mut r = (4.0 * lambda.norm()).max(4.0 * path.eps).max(1.0);
    let bound = |r: f64| tail_bound(f, path.theta, 2.0, r);
    let mut tail = bound(r)?;
    while tail > 0.5 * tol {
        r *= 2.0;
        if r > 1e15 {
            return Err(DunklError::Truncation(tail));
        }
        tail = bound(r)?;
    }
    let mut p = path.with_r_max(r);
    // panels near λ need to resolve the pole at distance d
    while (p.panels_per_decade as f64) < 6.0f64.max(2.0 * lambda.norm().max(1.0) / d) && p.panels_per_decade < 768 {
        p = p.refined();
    }
    let sum = |p: &ContourPath| -> Complex64 {
        p.discretize().into_iter().map(|(z, w)| w * f.eval(z) / (z - lambda)).sum::<Complex64>()
            / Complex64::new(0.0, 2.0 * PI)
    };
    let mut prev = sum(&p);
    let mut value = None;
    for _ in 0..5 {
        p = p.refined();
        let cur = sum(&p);
        if (cur - prev).norm() <= 0.5 * tol {
            value = Some(cur);
            break;
        }
        prev = cur;
    }
    let value = value.ok_or(DunklError::Quadrature { value: prev.norm(), estimate: f64::NAN })?;
    let side = if path.side(lambda) < 0.0 { PathSide::Left } else { PathSide::Right };
    let expected = match side {
        PathSide::Left => f.eval(lambda),
        PathSide::Right => ZERO,
    };
    Ok(CauchyFilter { value, side, expected, residual: (value - expected).norm() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierNorms {
    pub n: u32,
    pub values: Vec<(f64, f64)>,
    pub sup: f64,
    pub argmax: f64,
}

/// ‖m(tA)‖ over the grid via the contour calculus; the sup is C_n.
pub fn multiplier_norm(a: &MatrixGenerator, n: u32, times: &[f64], path: &ContourPath, tol: f64) -> Result<MultiplierNorms> {
    let vals = par_map(times, |&t| -> Result<(f64, f64)> {
        let f = AdmissibleFunction::multiplier(n, t)?;
        let r = contour_calculus(&f, a, path, tol)?;
        Ok((t, op_norm(&r.value)))
    });
    let values = vals.into_iter().collect::<Result<Vec<_>>>()?;
    let (argmax, sup) = values.iter().copied().fold((f64::NAN, 0.0), |acc, (t, v)| if v > acc.1 { (t, v) } else { acc });
    Ok(MultiplierNorms { n, values, sup, argmax })
}

// ---------------------------------------------------------------------------
// Bessel potentials

/// J^γ = Γ(γ)^{-1} ∫ t^{γ-1} e^{-t} e^{tA} dt by Gauss–Laguerre (weight t^{γ-1}e^{-t}).
pub fn bessel_matrix(a: &MatrixGenerator, gamma_: f64, nodes: usize) -> Result<CMatrix> {
    if !(gamma_ > 0.0) || !gamma_.is_finite() {
        return Err(DunklError::Parameter(format!("bessel_matrix needs gamma > 0 (got {gamma_})")));
    }
    let rule = gauss_laguerre(gamma_ - 1.0, nodes)?;
    let norm = if gamma_ < 150.0 { 1.0 / gamma(gamma_) } else { (-ln_gamma(gamma_)).exp() };
    let n = a.dim();
    let mut acc = CMatrix::zeros(n, n);
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        acc += semigroup_at(a, t)? * Complex64::new(w * norm, 0.0);
    }
    Ok(acc)
}

pub const BESSEL_NODES: usize = 128;

/// (I - A)^{-γ} from the Schur form.
pub fn bessel_spectral(a: &MatrixGenerator, gamma_: f64) -> Result<CMatrix> {
    if !(gamma_ > 0.0) {
        return Err(DunklError::Parameter(format!("bessel_spectral needs gamma > 0 (got {gamma_})")));
    }
    Ok(a.apply(&AdmissibleFunction::bessel_symbol(gamma_)))
}

// ---------------------------------------------------------------------------
// Λ-norms

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemigroupKind {
    /// e^{tA}
    Heat,
    /// e^{-t√-A}
    Subordinate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaNorm {
    pub value: f64,
    pub base: f64,
    pub seminorm: f64,
    pub m: u32,
    pub argmax: f64,
}

/// Smallest integer m > β.
pub fn order_above(beta: f64) -> u32 {
    beta.floor() as u32 + 1
}

/// ‖x‖ + max_t t^{m-β}‖A^m e^{tA}x‖ over the grid, m the smallest integer > β.
pub fn lambda_norm_matrix(a: &MatrixGenerator, x: &CVector, beta: f64, times: &[f64]) -> Result<f64> {
    Ok(lambda_norm_with(a, x, beta, order_above(beta), times, SemigroupKind::Heat)?.value)
}

pub fn lambda_norm_with(
    a: &MatrixGenerator,
    x: &CVector,
    beta: f64,
    m: u32,
    times: &[f64],
    kind: SemigroupKind,
) -> Result<LambdaNorm> {
    if !(beta > 0.0) || (m as f64) <= beta {
        return Err(DunklError::Parameter(format!("Lambda norm needs beta > 0 and m > beta (got {beta}, {m})")));
    }
    if x.len() != a.dim() {
        return Err(DunklError::Parameter(format!("vector length {} does not match dimension {}", x.len(), a.dim())));
    }
    if kind == SemigroupKind::Subordinate {
        check_sqrt_branch(a)?;
    }
    let base = x.norm();
    let mut seminorm = 0.0f64;
    let mut argmax = f64::NAN;
    if base > 0.0 {
        for &t in times {
            let f = match kind {
                SemigroupKind::Heat => AdmissibleFunction::heat_derivative(m, t),
                SemigroupKind::Subordinate => AdmissibleFunction::poisson_derivative(m, t),
            };
            let v = t.powf(m as f64 - beta) * a.apply_vector(&f, x).norm();
            if v > seminorm {
                seminorm = v;
                argmax = t;
            }
        }
    }
    Ok(LambdaNorm { value: base + seminorm, base, seminorm, m, argmax })
}

/// Closed form of sup_t t^{m-β} μ^m e^{-tμ} = μ^β ((m-β)/e)^{m-β}.
pub fn eigen_seminorm(mu: f64, beta: f64, m: u32) -> f64 {
    let d = m as f64 - beta;
    mu.powf(beta) * (d / std::f64::consts::E).powf(d)
}

// ---------------------------------------------------------------------------
// K-functional

#[derive(Debug, Clone, PartialEq)]
pub struct KSplit {
    pub t: f64,
    pub tau: f64,
    pub m: u32,
    pub x0: CVector,
    pub x1: CVector,
    pub norm0: f64,
    pub norm1: f64,
    pub bound: f64,
}

/// Upper bound for K(t,x) from the Taylor split of v(s) = e^{sA}x at
/// τ = t^{1/(β₁-β₀)}: x₁ = Σ_{ℓ<m} v^{(ℓ)}(τ)(-τ)^ℓ/ℓ!, x₀ = x - x₁ as the
/// remainder integral. For t ≥ 1 the trivial split x₀ = x is used when it
/// is smaller.
pub fn k_functional_upper(
    a: &MatrixGenerator,
    x: &CVector,
    t: f64,
    beta0: f64,
    beta1: f64,
    theta: f64,
    times: &[f64],
) -> Result<KSplit> {
    if !(beta0 > 0.0 && beta0 < beta1) || !(theta > 0.0 && theta < 1.0) || !(t > 0.0) {
        return Err(DunklError::Parameter(format!(
            "k_functional_upper needs 0 < beta0 < beta1, 0 < theta < 1, t > 0 (got {beta0}, {beta1}, {theta}, {t})"
        )));
    }
    let t_max = times.iter().copied().fold(0.0, f64::max);
    let beta = (1.0 - theta) * beta0 + theta * beta1;
    let m = (beta.ceil() as u32).max(1);
    let tau = t.powf(1.0 / (beta1 - beta0));
    if tau >= t_max {
        return Err(DunklError::Parameter(format!("tau = {tau} is beyond the time grid (max {t_max})")));
    }
    let n = a.dim();
    let mut x1 = CVector::zeros(n);
    let mut fact = 1.0;
    for l in 0..m {
        if l > 0 {
            fact *= l as f64;
        }
        let v = a.apply_vector(&AdmissibleFunction::heat_derivative(l, tau), x);
        x1 += v * Complex64::new((-tau).powi(l as i32) / fact, 0.0);
    }
    // x₀ = -∫_0^τ (-s)^{m-1}/(m-1)! v^{(m)}(s) ds
    let gl = gauss_legendre(32);
    let mut x0 = CVector::zeros(n);
    let fm1: f64 = (1..m).map(|i| i as f64).product();
    for (&z, &w) in gl.nodes.iter().zip(&gl.weights) {
        let s = 0.5 * tau * (1.0 + z);
        let v = a.apply_vector(&AdmissibleFunction::heat_derivative(m, s), x);
        x0 -= v * Complex64::new(0.5 * tau * w * (-s).powi(m as i32 - 1) / fm1, 0.0);
    }
    let norm0 = lambda_norm_matrix(a, &x0, beta0, times)?;
    let norm1 = lambda_norm_matrix(a, &x1, beta1, times)?;
    let mut split = KSplit { t, tau, m, x0, x1, norm0, norm1, bound: norm0 + t * norm1 };
    if t >= 1.0 {
        let trivial = lambda_norm_matrix(a, x, beta0, times)?;
        if trivial < split.bound {
            split = KSplit { x0: x.clone(), x1: CVector::zeros(n), norm0: trivial, norm1: 0.0, bound: trivial, ..split };
        }
    }
    Ok(split)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationCheck {
    pub beta: f64,
    /// sup_t t^{-θ} K_upper(t,x)
    pub k_sup: f64,
    pub lambda_norm: f64,
    pub constant: f64,
    pub argmax: f64,
}

/// C = sup_t t^{-θ}K_upper(t,x) / ‖x‖_{Λ^β}, β = (1-θ)β₀ + θβ₁; the sup runs
/// over `k_times` ⊂ (0,1] (t = 1 uses the trivial split as well).
pub fn interpolation_constant(
    a: &MatrixGenerator,
    x: &CVector,
    beta0: f64,
    beta1: f64,
    theta: f64,
    k_times: &[f64],
    norm_times: &[f64],
) -> Result<InterpolationCheck> {
    let beta = (1.0 - theta) * beta0 + theta * beta1;
    let rows = par_map(k_times, |&t| k_functional_upper(a, x, t, beta0, beta1, theta, norm_times).map(|s| (t, s.bound)));
    let mut k_sup = 0.0f64;
    let mut argmax = f64::NAN;
    for r in rows {
        let (t, b) = r?;
        let v = t.powf(-theta) * b;
        if v > k_sup {
            k_sup = v;
            argmax = t;
        }
    }
    let lambda_norm = lambda_norm_matrix(a, x, beta, norm_times)?;
    let constant = if lambda_norm > 0.0 { k_sup / lambda_norm } else { 0.0 };
    Ok(InterpolationCheck { beta, k_sup, lambda_norm, constant, argmax })
}

/// Evaluate `quantity` on A - ωI for each ω (used when 0 ∈ σ(A)).
pub fn omega_regularization<F>(a: &MatrixGenerator, omegas: &[f64], quantity: F) -> Result<Vec<(f64, f64)>>
where
    F: Fn(&MatrixGenerator) -> Result<f64>,
{
    omegas
        .iter()
        .map(|&w| {
            let g = a.shifted(w)?;
            quantity(&g).map(|v| (w, v))
        })
        .collect()
}

pub const OMEGAS: [f64; 3] = [1e-1, 1e-2, 1e-3];

/// Log-spaced grid in [lo, hi] with `n` points.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Same range with 2n-1 points (a superset of `log_grid(lo, hi, n)`).
pub fn log_grid_doubled(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    log_grid(lo, hi, 2 * n - 1)
}

/// √-A by the Denman–Beavers iteration, independent of the Schur route.
pub fn sqrt_neg_iterative(a: &MatrixGenerator) -> Result<CMatrix> {
    check_sqrt_branch(a)?;
    let n = a.dim();
    let mut y = -a.matrix().clone();
    let mut z = identity(n);
    let half = Complex64::new(0.5, 0.0);
    for _ in 0..100 {
        let yi = y.clone().try_inverse().ok_or_else(|| DunklError::Singular("Denman–Beavers iterate".into()))?;
        let zi = z.clone().try_inverse().ok_or_else(|| DunklError::Singular("Denman–Beavers iterate".into()))?;
        let y_next = (&y + zi) * half;
        z = (&z + yi) * half;
        let step = op_norm(&(&y_next - &y));
        y = y_next;
        if step <= 1e-15 * op_norm(&y) {
            return Ok(y);
        }
    }
    Err(DunklError::Quadrature { value: op_norm(&y), estimate: f64::NAN })
}
