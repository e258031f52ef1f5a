//! Gauss rules, adaptive Gauss–Kronrod integration, contour discretisation
//! and Filon panels for oscillatory weights.

use std::collections::BinaryHeap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::error::{DunklError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RuleKind {
    GaussLegendre,
    /// weight (1-x)^alpha (1+x)^beta on [-1, 1]
    GaussJacobi { alpha: f64, beta: f64 },
    /// weight u^alpha e^{-u} on [0, inf)
    GaussLaguerre { alpha: f64 },
    GaussLegendrePanels { panels: usize },
    AdaptiveNested,
}

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub kind: RuleKind,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// polynomial degree integrated exactly
    pub order: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Same rule affinely mapped from [-1,1] to [a,b] (Legendre/Jacobi only).
    pub fn mapped(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let xs = self.nodes.iter().map(|u| c + h * u).collect();
        let ws = self.weights.iter().map(|w| h * w).collect();
        (xs, ws)
    }
}

// Golub–Welsch for a symmetric Jacobi matrix.
fn golub_welsch(diag: &[f64], off: &[f64], mu0: f64) -> (Vec<f64>, Vec<f64>) {
    let n = diag.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = diag[i];
        if i + 1 < n {
            m[(i, i + 1)] = off[i];
            m[(i + 1, i)] = off[i];
        }
    }
    let eig = SymmetricEigen::new(m);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            let x = polish_node(diag, off, eig.eigenvalues[i]);
            // eigenvector weights are accurate only in absolute terms; the
            // Christoffel sum keeps the tiny outer weights accurate
            let s = christoffel_sum(diag, off, x);
            let w = if s.is_finite() && s > 0.0 { mu0 / s } else { mu0 * v0 * v0 };
            (x, w)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.into_iter().unzip()
}

/// Newton on the characteristic polynomial of the Jacobi matrix, rescaled
/// as it goes so large nodes do not overflow.
fn polish_node(diag: &[f64], off: &[f64], x0: f64) -> f64 {
    let mut x = x0;
    for _ in 0..3 {
        let (mut q0, mut q1) = (0.0, 1.0);
        let (mut d0, mut d1) = (0.0, 0.0);
        for k in 0..diag.len() {
            let b2 = if k == 0 { 0.0 } else { off[k - 1] * off[k - 1] };
            let q2 = (x - diag[k]) * q1 - b2 * q0;
            let d2 = q1 + (x - diag[k]) * d1 - b2 * d0;
            (q0, q1, d0, d1) = (q1, q2, d1, d2);
            let s = q1.abs().max(d1.abs());
            if s > 1e100 {
                (q0, q1, d0, d1) = (q0 / s, q1 / s, d0 / s, d1 / s);
            }
        }
        if d1 == 0.0 || !d1.is_finite() {
            break;
        }
        let dx = q1 / d1;
        if !dx.is_finite() || dx.abs() > 1e-6 * (1.0 + x.abs()) {
            break;
        }
        x -= dx;
        if dx.abs() <= 1e-16 * (1.0 + x.abs()) {
            break;
        }
    }
    x
}

/// Σ_{k<n} p_k(x)² for the orthonormal polynomials with p_0 = 1.
fn christoffel_sum(diag: &[f64], off: &[f64], x: f64) -> f64 {
    let (mut p0, mut p1) = (0.0, 1.0);
    let mut s = 1.0;
    for k in 0..diag.len() - 1 {
        let bprev = if k == 0 { 0.0 } else { off[k - 1] };
        let p2 = ((x - diag[k]) * p1 - bprev * p0) / off[k];
        (p0, p1) = (p1, p2);
        s += p1 * p1;
    }
    s
}

/// Gauss–Legendre on [-1, 1]; nodes polished by Newton on P_n.
pub fn gauss_legendre(n: usize) -> QuadratureRule {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_p_and_dp(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_p_and_dp(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    QuadratureRule { kind: RuleKind::GaussLegendre, nodes, weights, order: 2 * n - 1 }
}

fn legendre_p_and_dp(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Legendre polynomials P_0..P_{m-1} at x.
pub fn legendre_values(m: usize, x: f64, out: &mut [f64]) {
    if m == 0 {
        return;
    }
    out[0] = 1.0;
    if m > 1 {
        out[1] = x;
    }
    for k in 2..m {
        let kf = k as f64;
        out[k] = ((2.0 * kf - 1.0) * x * out[k - 1] - (kf - 1.0) * out[k - 2]) / kf;
    }
}

/// Gauss–Jacobi on [-1, 1] with weight (1-x)^alpha (1+x)^beta.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Result<QuadratureRule> {
    if alpha <= -1.0 || beta <= -1.0 || n == 0 {
        return Err(DunklError::Parameter(format!(
            "gauss_jacobi needs alpha,beta > -1 and n >= 1 (got {alpha}, {beta}, {n})"
        )));
    }
    let ab = alpha + beta;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    for (i, d) in diag.iter_mut().enumerate() {
        let k = i as f64;
        let s = 2.0 * k + ab;
        *d = if i == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / (s * (s + 2.0))
        };
    }
    for (i, o) in off.iter_mut().enumerate() {
        let k = (i + 1) as f64;
        let s = 2.0 * k + ab;
        let b = if i == 0 {
            4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))
        } else {
            4.0 * k * (k + alpha) * (k + beta) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0))
        };
        *o = b.sqrt();
    }
    let mu0 = ((ab + 1.0) * std::f64::consts::LN_2 + ln_gamma(alpha + 1.0) + ln_gamma(beta + 1.0)
        - ln_gamma(ab + 2.0))
    .exp();
    let (nodes, weights) = golub_welsch(&diag, &off, mu0);
    Ok(QuadratureRule { kind: RuleKind::GaussJacobi { alpha, beta }, nodes, weights, order: 2 * n - 1 })
}

/// Gauss–Laguerre with weight u^alpha e^{-u} on [0, inf).
pub fn gauss_laguerre(alpha: f64, n: usize) -> Result<QuadratureRule> {
    if alpha <= -1.0 || n < 2 {
        return Err(DunklError::Parameter(format!(
            "gauss_laguerre needs alpha > -1 and n >= 2 (got {alpha}, {n})"
        )));
    }
    let diag: Vec<f64> = (0..n).map(|i| 2.0 * i as f64 + alpha + 1.0).collect();
    let off: Vec<f64> = (1..n).map(|i| (i as f64 * (i as f64 + alpha)).sqrt()).collect();
    let mu0 = ln_gamma(alpha + 1.0).exp();
    let (nodes, weights) = golub_welsch(&diag, &off, mu0);
    Ok(QuadratureRule { kind: RuleKind::GaussLaguerre { alpha }, nodes, weights, order: 2 * n - 1 })
}

/// Composite Gauss–Legendre over the given breakpoints.
pub fn gauss_legendre_panels(breaks: &[f64], n: usize) -> QuadratureRule {
    let base = gauss_legendre(n);
    let mut nodes = Vec::with_capacity(n * breaks.len());
    let mut weights = Vec::with_capacity(n * breaks.len());
    for w in breaks.windows(2) {
        let (x, ww) = base.mapped(w[0], w[1]);
        nodes.extend(x);
        weights.extend(ww);
    }
    QuadratureRule {
        kind: RuleKind::GaussLegendrePanels { panels: breaks.len().saturating_sub(1) },
        nodes,
        weights,
        order: 2 * n - 1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Interval {
    Finite(f64, f64),
    /// [a, inf)
    Upper(f64),
    /// (-inf, inf)
    Whole,
}

// Kronrod 15 / Gauss 7 on [-1,1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

#[derive(PartialEq)]
struct Seg {
    err: f64,
    a: f64,
    b: f64,
    val: f64,
}
impl Eq for Seg {}
impl PartialOrd for Seg {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Seg {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Default subdivision budget of [`adaptive_integrate`].
pub const DEFAULT_BUDGET: usize = 4000;

/// Globally adaptive G7/K15 integration with absolute tolerance `tol`.
pub fn adaptive_integrate<F: FnMut(f64) -> f64>(f: F, region: Interval, tol: f64) -> Result<Estimate> {
    adaptive_integrate_budget(f, region, tol, DEFAULT_BUDGET)
}

pub fn adaptive_integrate_budget<F: FnMut(f64) -> f64>(f: F, region: Interval, tol: f64, budget: usize) -> Result<Estimate> {
    adaptive_mixed(f, region, tol, 0.0, budget)
}

/// Stops once the error estimate is below max(abs_tol, rel_tol·|value|).
pub fn adaptive_integrate_rel<F: FnMut(f64) -> f64>(f: F, region: Interval, rel_tol: f64, abs_tol: f64) -> Result<Estimate> {
    adaptive_mixed(f, region, abs_tol, rel_tol, DEFAULT_BUDGET)
}

fn adaptive_mixed<F: FnMut(f64) -> f64>(mut f: F, region: Interval, tol: f64, rel: f64, budget: usize) -> Result<Estimate> {
    match region {
        Interval::Finite(a, b) => adapt(&mut f, &[a, b], tol, rel, budget),
        Interval::Upper(a) => {
            // x = a + u/(1-u)
            let mut g = |u: f64| {
                let v = 1.0 - u;
                if v <= 0.0 {
                    return 0.0;
                }
                let r = f(a + u / v) / (v * v);
                if r.is_finite() { r } else { 0.0 }
            };
            adapt(&mut g, &[0.0, 0.5, 1.0], tol, rel, budget)
        }
        Interval::Whole => {
            let mut g = |u: f64| {
                let v = 1.0 - u * u;
                if v <= 0.0 {
                    return 0.0;
                }
                let r = f(u / v) * (1.0 + u * u) / (v * v);
                if r.is_finite() { r } else { 0.0 }
            };
            adapt(&mut g, &[-1.0, -0.5, 0.0, 0.5, 1.0], tol, rel, budget)
        }
    }
}

fn adapt<F: FnMut(f64) -> f64>(f: &mut F, breaks: &[f64], tol: f64, rel: f64, budget: usize) -> Result<Estimate> {
    let mut heap = BinaryHeap::new();
    let (mut total, mut err) = (0.0, 0.0);
    let mut evals = 0;
    for w in breaks.windows(2) {
        let (v, e) = gk15(f, w[0], w[1]);
        evals += 15;
        total += v;
        err += e;
        heap.push(Seg { err: e, a: w[0], b: w[1], val: v });
    }
    let mut splits = 0;
    while err > tol.max(rel * total.abs()) {
        if splits >= budget {
            return Err(DunklError::Quadrature { value: total, estimate: err });
        }
        let s = heap.pop().unwrap();
        let m = 0.5 * (s.a + s.b);
        if m <= s.a || m >= s.b {
            // interval exhausted at machine resolution
            return Err(DunklError::Quadrature { value: total, estimate: err });
        }
        let (v1, e1) = gk15(f, s.a, m);
        let (v2, e2) = gk15(f, m, s.b);
        evals += 30;
        total += v1 + v2 - s.val;
        err += e1 + e2 - s.err;
        heap.push(Seg { err: e1, a: s.a, b: m, val: v1 });
        heap.push(Seg { err: e2, a: m, b: s.b, val: v2 });
        splits += 1;
        // recompute occasionally to limit drift
        if splits % 64 == 0 {
            total = heap.iter().map(|s| s.val).sum();
            err = heap.iter().map(|s| s.err).sum();
        }
    }
    let total: f64 = heap.iter().map(|s| s.val).sum();
    Ok(Estimate { value: total, error: err, evaluations: evals })
}

/// Nested adaptive integration over a rectangle.
pub fn adaptive_integrate_2d<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    x: Interval,
    y: Interval,
    tol: f64,
) -> Result<Estimate> {
    let mut inner_err = 0.0f64;
    let mut evals = 0;
    let mut failure = None;
    let outer = adaptive_integrate(
        |xv| match adaptive_integrate(|yv| f(xv, yv), y, tol * 0.1) {
            Ok(e) => {
                inner_err = inner_err.max(e.error);
                evals += e.evaluations;
                e.value
            }
            Err(DunklError::Quadrature { value, estimate }) => {
                failure = Some(estimate);
                value
            }
            Err(_) => f64::NAN,
        },
        x,
        tol * 0.5,
    )?;
    if let Some(est) = failure {
        return Err(DunklError::Quadrature { value: outer.value, estimate: est });
    }
    Ok(Estimate { value: outer.value, error: outer.error + inner_err, evaluations: evals })
}

// ---------------------------------------------------------------------------
// contours

/// The path Γ_{θ,ε}: in along the ray s e^{-iθ}, around the left arc of
/// radius ε, out along s e^{iθ}. ε = 0 gives the plain two-ray path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourPath {
    pub theta: f64,
    pub eps: f64,
    pub r_max: f64,
    pub panels_per_decade: usize,
    pub nodes_per_panel: usize,
}

impl ContourPath {
    pub fn new(theta: f64, eps: f64, r_max: f64) -> Result<Self> {
        if !(theta > PI / 2.0 && theta < PI) {
            return Err(DunklError::Path(format!("theta = {theta} not in (pi/2, pi)")));
        }
        if eps < 0.0 || r_max <= eps {
            return Err(DunklError::Path(format!("need 0 <= eps < r_max (eps={eps}, r_max={r_max})")));
        }
        Ok(Self { theta, eps, r_max, panels_per_decade: 6, nodes_per_panel: 16 })
    }

    pub fn refined(&self) -> Self {
        Self { panels_per_decade: self.panels_per_decade * 2, ..*self }
    }

    pub fn with_r_max(&self, r_max: f64) -> Self {
        Self { r_max, ..*self }
    }

    /// Nodes z_j with complex weights ω_j so that ∫_Γ g dz ≈ Σ ω_j g(z_j).
    pub fn discretize(&self) -> Vec<(Complex64, Complex64)> {
        let gl = gauss_legendre(self.nodes_per_panel);
        let mut out = Vec::new();
        let s_lo = if self.eps > 0.0 { self.eps } else { 1e-7f64.min(self.r_max * 1e-7) };
        let mut breaks = Vec::new();
        if self.eps == 0.0 {
            breaks.push(0.0);
        }
        let decades = (self.r_max / s_lo).log10();
        let np = ((decades * self.panels_per_decade as f64).ceil() as usize).max(1);
        for j in 0..=np {
            breaks.push(s_lo * (self.r_max / s_lo).powf(j as f64 / np as f64));
        }
        let up = Complex64::from_polar(1.0, self.theta);
        let down = Complex64::from_polar(1.0, -self.theta);
        let rays = gauss_legendre_panels(&breaks, self.nodes_per_panel);
        for (&s, &w) in rays.nodes.iter().zip(&rays.weights) {
            out.push((down * s, -down * w));
            out.push((up * s, up * w));
        }
        if self.eps > 0.0 {
            // φ ∈ [θ-2π, -θ], traversed downward
            let span = 2.0 * (PI - self.theta);
            let pieces = ((span / 0.25).ceil() as usize).max(2);
            for p in 0..pieces {
                let a = self.theta - 2.0 * PI + span * p as f64 / pieces as f64;
                let b = a + span / pieces as f64;
                let (ph, pw) = gl.mapped(a, b);
                for (phi, w) in ph.into_iter().zip(pw) {
                    let z = Complex64::from_polar(self.eps, phi);
                    out.push((z, -Complex64::i() * z * w));
                }
            }
        }
        out
    }

    /// Signed test: negative when λ is left of the path (Γ⁻), positive on the right.
    pub fn side(&self, lambda: Complex64) -> f64 {
        // distance along the real axis to the path at height Im λ
        let y = lambda.im.abs();
        let x_path = if y >= self.eps * self.theta.sin() {
            y / self.theta.tan()
        } else {
            -(self.eps * self.eps - y * y).sqrt()
        };
        lambda.re - x_path
    }

    pub fn distance(&self, lambda: Complex64) -> f64 {
        let mut d = f64::INFINITY;
        for dir in [self.theta, -self.theta] {
            let u = Complex64::from_polar(1.0, dir);
            let proj = (lambda * u.conj()).re.clamp(self.eps, self.r_max);
            d = d.min((lambda - u * proj).norm());
        }
        if self.eps > 0.0 {
            let arg = lambda.arg();
            if arg.abs() >= self.theta {
                d = d.min((lambda.norm() - self.eps).abs());
            } else {
                for dir in [self.theta, -self.theta] {
                    d = d.min((lambda - Complex64::from_polar(self.eps, dir)).norm());
                }
            }
        }
        d
    }
}

/// ∫_Γ g(z) dz with refinement-based error estimate.
pub fn contour_integrate<G: FnMut(Complex64) -> Complex64>(
    path: &ContourPath,
    mut g: G,
    tol: f64,
) -> Result<(Complex64, f64)> {
    let mut sum = |p: &ContourPath| -> Complex64 { p.discretize().into_iter().map(|(z, w)| w * g(z)).sum() };
    let mut p = *path;
    let mut prev = sum(&p);
    for _ in 0..4 {
        p = p.refined();
        let cur = sum(&p);
        let e = (cur - prev).norm();
        if e <= tol {
            return Ok((cur, e));
        }
        prev = cur;
    }
    Err(DunklError::Quadrature { value: prev.norm(), estimate: f64::NAN })
}

/// Closed circle |z - c| = r, counter-clockwise.
pub fn circle_integrate<G: FnMut(Complex64) -> Complex64>(c: Complex64, r: f64, n: usize, mut g: G) -> Complex64 {
    // trapezoid rule is spectrally accurate for periodic integrands
    let mut s = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let phi = 2.0 * PI * j as f64 / n as f64;
        let e = Complex64::from_polar(1.0, phi);
        s += g(c + e * r) * Complex64::i() * e * r;
    }
    s * (2.0 * PI / n as f64)
}

/// Straight segment from a to b.
pub fn segment_integrate<G: FnMut(Complex64) -> Complex64>(a: Complex64, b: Complex64, n: usize, mut g: G) -> Complex64 {
    let gl = gauss_legendre(n);
    let h = (b - a) * 0.5;
    let c = (a + b) * 0.5;
    gl.nodes.iter().zip(&gl.weights).map(|(&u, &w)| g(c + h * u) * h * w).sum()
}

// ---------------------------------------------------------------------------
// Filon panels

/// Spherical Bessel j_0..j_{m-1}(ω) for ω ≥ 0.
pub fn spherical_bessel(m: usize, w: f64, out: &mut [f64]) {
    if w == 0.0 {
        out[..m].iter_mut().for_each(|v| *v = 0.0);
        out[0] = 1.0;
        return;
    }
    if w < 1e-3 {
        // leading series terms: j_n(w) ≈ w^n/(2n+1)!! (1 - w²/(2(2n+3)))
        let mut df = 1.0;
        let mut wp = 1.0;
        for (n, o) in out.iter_mut().enumerate().take(m) {
            df *= (2 * n + 1) as f64;
            *o = wp / df * (1.0 - w * w / (2.0 * (2 * n + 3) as f64));
            wp *= w;
        }
        return;
    }
    let (sn, cs) = w.sin_cos();
    let j0 = sn / w;
    let j1 = sn / (w * w) - cs / w;
    if w > m as f64 {
        out[0] = j0;
        if m > 1 {
            out[1] = j1;
        }
        for n in 2..m {
            out[n] = (2 * n - 1) as f64 / w * out[n - 1] - out[n - 2];
        }
        return;
    }
    // Miller backward recurrence, normalised by j_0 or j_1
    let start = m + 20 + w as usize;
    let mut stack = [0.0f64; 96];
    let mut heap = Vec::new();
    let buf: &mut [f64] = if start + 2 <= stack.len() {
        &mut stack[..start + 2]
    } else {
        heap.resize(start + 2, 0.0);
        &mut heap
    };
    buf[start + 1] = 0.0;
    buf[start] = 1e-300;
    for n in (0..start).rev() {
        buf[n] = (2 * n + 3) as f64 / w * buf[n + 1] - buf[n + 2];
        if buf[n].abs() > 1e200 {
            for v in buf.iter_mut().skip(n) {
                *v *= 1e-200;
            }
        }
    }
    let scale = if j0.abs() >= j1.abs() { j0 / buf[0] } else { j1 / buf[1] };
    for n in 0..m {
        out[n] = scale * buf[n];
    }
}

/// Precomputed projection of nodal values onto Legendre coefficients.
#[derive(Debug, Clone)]
pub struct FilonRule {
    pub base: QuadratureRule,
    /// proj[n * len + i] = (2n+1)/2 · w_i · P_n(u_i)
    proj: Vec<f64>,
}

impl FilonRule {
    pub fn new(n: usize) -> Self {
        let base = gauss_legendre(n);
        let mut proj = vec![0.0; n * n];
        let mut p = vec![0.0; n];
        for i in 0..n {
            legendre_values(n, base.nodes[i], &mut p);
            for k in 0..n {
                proj[k * n + i] = (2 * k + 1) as f64 / 2.0 * base.weights[i] * p[k];
            }
        }
        Self { base, proj }
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    /// Legendre coefficients of the interpolant of `vals` (values at the nodes).
    pub fn coefficients(&self, vals: &[f64], out: &mut [f64]) {
        let n = self.len();
        for k in 0..n {
            let row = &self.proj[k * n..(k + 1) * n];
            out[k] = row.iter().zip(vals).map(|(a, b)| a * b).sum();
        }
    }

    /// ∫_{c-h}^{c+h} g(y) e^{iλy} dy from Legendre coefficients of g(c + h u).
    pub fn oscillatory(&self, coeffs: &[f64], c: f64, h: f64, lambda: f64, scratch: &mut [f64]) -> Complex64 {
        let n = self.len();
        let w = lambda * h;
        spherical_bessel(n, w.abs(), scratch);
        let mut re = 0.0;
        let mut im = 0.0;
        let sgn = if w < 0.0 { -1.0 } else { 1.0 };
        for k in 0..n {
            let v = 2.0 * coeffs[k] * scratch[k];
            // i^k, and j_k(-w) = (-1)^k j_k(w)
            let s = if k % 2 == 1 { sgn } else { 1.0 };
            match k % 4 {
                0 => re += v * s,
                1 => im += v * s,
                2 => re -= v * s,
                _ => im -= v * s,
            }
        }
        Complex64::new(re, im) * Complex64::from_polar(h, lambda * c)
    }
}

// ---------------------------------------------------------------------------
// graded meshes

/// Breakpoints on [a, b] refined until every panel's half-width is at most
/// `ratio` times its centre's distance to the nearest listed singularity.
/// Panels adjacent to a real singular point stop shrinking at `floor`.
pub fn graded_breaks(a: f64, b: f64, singular: &[Complex64], ratio: f64, floor: f64, max_panels: usize) -> Vec<f64> {
    let mut out = vec![a];
    let mut stack = vec![(a, b)];
    let mut count = 0;
    while let Some((l, r)) = stack.pop() {
        let c = 0.5 * (l + r);
        let h = 0.5 * (r - l);
        let d = singular
            .iter()
            .map(|s| (Complex64::new(c, 0.0) - s).norm())
            .fold(f64::INFINITY, f64::min);
        if h <= ratio * d || 2.0 * h <= floor || count >= max_panels {
            out.push(r);
            count += 1;
        } else {
            stack.push((c, r));
            stack.push((l, c));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_exactness() {
        let r = gauss_legendre(10);
        let v = r.integrate(|x| x.powi(18) + x.powi(3));
        assert!((v - 2.0 / 19.0).abs() < 1e-14);
    }

    #[test]
    fn bessel_j_small_large() {
        let mut o = [0.0; 6];
        spherical_bessel(6, 2.5, &mut o);
        let j0 = 2.5f64.sin() / 2.5;
        let j1 = 2.5f64.sin() / 6.25 - 2.5f64.cos() / 2.5;
        assert!((o[0] - j0).abs() < 1e-14 && (o[1] - j1).abs() < 1e-14);
        let j2 = 3.0 / 2.5 * j1 - j0;
        assert!((o[2] - j2).abs() < 1e-13);
    }
}
