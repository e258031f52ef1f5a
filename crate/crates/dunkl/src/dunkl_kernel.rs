//! Dunkl operators, the kernel E, the Dunkl transform, radial translations
//! and convolutions for Z₂^N.
//!
//! Rank one: with z = xy and b = 2k+1,
//! E_k(z) = e^{|z|} F(k+1, b)(2|z|) for z ≥ 0 and e^{|z|} F(k, b)(2|z|) for z < 0,
//! where F(a, b)(r) = e^{-r} M(a; b; r). The Rösler measure is
//! dμ_k(s) = c′ (1-s)^{k-1} (1+s)^k ds on [-1, 1], so that E_k(z) = ∫ e^{sz} dμ_k(s).

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::error::{DunklError, Result};
use crate::quadrature::{adaptive_integrate, gauss_jacobi, gauss_legendre, Interval, QuadratureRule};
use crate::root_system::RootSystem;
use crate::special::kummer_scaled;

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(&[f64], usize) -> f64 + Send + Sync>;
pub type ProfileFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type Derivative1dFn = Arc<dyn Fn(f64, usize) -> f64 + Send + Sync>;

/// f(x) = constant + Σ a cos(λx) + Σ b sin(λx) in rank one.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrigSeries {
    pub constant: f64,
    /// (amplitude, frequency) of the cosine terms
    pub modes: Vec<(f64, f64)>,
    /// (amplitude, frequency) of the sine terms
    pub sin_modes: Vec<(f64, f64)>,
}

impl TrigSeries {
    pub fn cosines(constant: f64, modes: Vec<(f64, f64)>) -> Self {
        Self { constant, modes, sin_modes: Vec::new() }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.constant
            + self.modes.iter().map(|(a, l)| a * (l * x).cos()).sum::<f64>()
            + self.sin_modes.iter().map(|(b, l)| b * (l * x).sin()).sum::<f64>()
    }

    /// n-th derivative, again a trigonometric series.
    pub fn derivative(&self, n: usize) -> Self {
        if n == 0 {
            return self.clone();
        }
        let mut out = Self::default();
        // d/dx: cos → −λ sin, sin → λ cos
        for &(a, l) in &self.modes {
            let c = a * l.powi(n as i32);
            match n % 4 {
                0 => out.modes.push((c, l)),
                1 => out.sin_modes.push((-c, l)),
                2 => out.modes.push((-c, l)),
                _ => out.sin_modes.push((c, l)),
            }
        }
        for &(b, l) in &self.sin_modes {
            let c = b * l.powi(n as i32);
            match n % 4 {
                0 => out.sin_modes.push((c, l)),
                1 => out.modes.push((c, l)),
                2 => out.sin_modes.push((-c, l)),
                _ => out.modes.push((-c, l)),
            }
        }
        out
    }

    pub fn is_even(&self) -> bool {
        self.sin_modes.is_empty()
    }

    pub fn max_frequency(&self) -> f64 {
        self.modes.iter().chain(&self.sin_modes).map(|m| m.1.abs()).fold(0.0, f64::max)
    }

    pub fn abs_sum(&self) -> f64 {
        self.constant.abs() + self.modes.iter().chain(&self.sin_modes).map(|m| m.0.abs()).sum::<f64>()
    }
}

/// Decay bound |f(x)| ≤ c·e^{-a‖x‖²} or c·(1+‖x‖)^{-p}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decay {
    Unknown,
    Gaussian { a: f64, c: f64 },
    Power { p: f64, c: f64 },
}

#[derive(Clone)]
pub struct FunctionHandle {
    pub name: String,
    eval: ScalarFn,
    gradient: Option<GradientFn>,
    derivatives_1d: Option<(Derivative1dFn, usize)>,
    profile: Option<ProfileFn>,
    pub is_bounded: bool,
    pub sup_norm: Option<f64>,
    pub trig: Option<TrigSeries>,
    /// rank-one points where f is not smooth; away from 0 f must be smooth
    /// on each side, at 0 it may have a power singularity
    pub breakpoints: Vec<f64>,
    /// f(σx) = f(x) for every reflection
    pub is_even: bool,
    pub decay: Decay,
    /// length over which f varies
    pub scale: f64,
    /// f is resolved on panels of width `scale` inside this radius and is
    /// flat outside it; 0 means f needs no resolution beyond its breakpoints
    pub active_radius: f64,
}

impl std::fmt::Debug for FunctionHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FunctionHandle")
            .field("name", &self.name)
            .field("radial", &self.is_radial())
            .field("bounded", &self.is_bounded)
            .field("sup_norm", &self.sup_norm)
            .finish()
    }
}

impl FunctionHandle {
    pub fn new(name: impl Into<String>, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(f),
            gradient: None,
            derivatives_1d: None,
            profile: None,
            is_bounded: false,
            sup_norm: None,
            trig: None,
            breakpoints: Vec::new(),
            is_even: false,
            decay: Decay::Unknown,
            scale: 1.0,
            active_radius: 0.0,
        }
    }

    /// Rank-one convenience.
    pub fn new_1d(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(name, move |x: &[f64]| f(x[0]))
    }

    /// f(x) = profile(‖x‖).
    pub fn radial(name: impl Into<String>, profile: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        let p: ProfileFn = Arc::new(profile);
        let q = p.clone();
        let mut h = Self::new(name, move |x: &[f64]| q(x.iter().map(|v| v * v).sum::<f64>().sqrt()));
        h.profile = Some(p);
        h.is_even = true;
        h
    }

    pub fn constant(c: f64) -> Self {
        let mut h = Self::radial(format!("const({c})"), move |_| c)
            .with_sup_norm(c.abs())
            .with_gradient(|_, _| 0.0)
            .with_derivatives_1d(move |_, n| if n == 0 { c } else { 0.0 }, usize::MAX);
        h.trig = Some(TrigSeries::cosines(c, Vec::new()));
        h
    }

    /// e^{-a‖x‖²}
    pub fn gaussian(a: f64) -> Self {
        let mut h = Self::radial(format!("gauss({a})"), move |r| (-a * r * r).exp())
            .with_sup_norm(1.0)
            .with_gradient(move |x, j| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                -2.0 * a * x[j] * (-a * r2).exp()
            });
        h.decay = Decay::Gaussian { a, c: 1.0 };
        h.scale = 1.0 / a.sqrt();
        h.active_radius = (46.0 / a).sqrt();
        h
    }

    /// Rank one trigonometric series.
    pub fn trig_series(name: impl Into<String>, series: TrigSeries) -> Self {
        let s = series.clone();
        let d = series.clone();
        let mut h = Self::new_1d(name, move |x| s.eval(x))
            .with_sup_norm(series.abs_sum())
            .with_derivatives_1d(move |x, n| d.derivative(n).eval(x), usize::MAX);
        h.is_even = series.is_even();
        h.trig = Some(series);
        h
    }

    pub fn with_gradient(mut self, g: impl Fn(&[f64], usize) -> f64 + Send + Sync + 'static) -> Self {
        self.gradient = Some(Arc::new(g));
        self
    }

    /// Rank-one derivatives f^{(n)} for n ≤ max_order; also supplies the gradient.
    pub fn with_derivatives_1d(mut self, d: impl Fn(f64, usize) -> f64 + Send + Sync + 'static, max_order: usize) -> Self {
        let d: Derivative1dFn = Arc::new(d);
        if self.gradient.is_none() && max_order >= 1 {
            let g = d.clone();
            self.gradient = Some(Arc::new(move |x: &[f64], j| if j == 0 { g(x[0], 1) } else { 0.0 }));
        }
        self.derivatives_1d = Some((d, max_order));
        self
    }

    pub fn with_sup_norm(mut self, s: f64) -> Self {
        self.sup_norm = Some(s);
        self.is_bounded = true;
        self
    }

    pub fn with_breakpoints(mut self, b: Vec<f64>) -> Self {
        self.breakpoints = b;
        self
    }

    pub fn with_even(mut self, even: bool) -> Self {
        self.is_even = even;
        self
    }

    pub fn with_decay(mut self, d: Decay) -> Self {
        self.decay = d;
        self
    }

    pub fn with_scale(mut self, s: f64) -> Self {
        self.scale = s;
        self
    }

    pub fn with_active_radius(mut self, r: f64) -> Self {
        self.active_radius = r;
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    pub fn eval1(&self, x: f64) -> f64 {
        (self.eval)(&[x])
    }

    pub fn is_radial(&self) -> bool {
        self.profile.is_some()
    }

    pub fn profile(&self, r: f64) -> Option<f64> {
        self.profile.as_ref().map(|p| p(r))
    }

    pub fn has_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn gradient(&self, x: &[f64], j: usize) -> Option<f64> {
        self.gradient.as_ref().map(|g| g(x, j))
    }

    pub fn derivative_order(&self) -> usize {
        self.derivatives_1d.as_ref().map_or(if self.gradient.is_some() { 1 } else { 0 }, |d| d.1)
    }

    /// f^{(n)}(x) in rank one, from the metadata.
    pub fn derivative_1d(&self, x: f64, n: usize) -> Option<f64> {
        if n == 0 {
            return Some(self.eval1(x));
        }
        match &self.derivatives_1d {
            Some((d, max)) if n <= *max => Some(d(x, n)),
            _ if n == 1 => self.gradient(&[x], 0),
            _ => None,
        }
    }

    /// Rank-one handle for f^{(n)}; None without derivative data.
    pub fn derivative_handle(&self, n: usize) -> Option<FunctionHandle> {
        if n == 0 {
            return Some(self.clone());
        }
        let (d, max) = self.derivatives_1d.clone()?;
        if n > max {
            return None;
        }
        if let Some(t) = &self.trig {
            return Some(FunctionHandle::trig_series(format!("d{n}[{}]", self.name), t.derivative(n)));
        }
        let dd = d.clone();
        let mut h = FunctionHandle::new_1d(format!("d{n}[{}]", self.name), move |x| d(x, n))
            .with_derivatives_1d(move |x, m| dd(x, n + m), max.saturating_sub(n));
        h.is_bounded = self.is_bounded;
        h.breakpoints = self.breakpoints.clone();
        h.scale = self.scale;
        h.active_radius = self.active_radius;
        h.is_even = self.is_even && n % 2 == 0;
        Some(h)
    }

    /// Sup-norm invariant: sampled |f| never exceeds the declared bound.
    pub fn check_sup_norm(&self, samples: &[Vec<f64>]) -> bool {
        match self.sup_norm {
            None => true,
            Some(s) => samples.iter().all(|x| self.eval(x).abs() <= s + 1e-12),
        }
    }
}

// ---------------------------------------------------------------------------
// Dunkl operators

// central 5-point stencil, used only off the hyperplanes
fn partial_fd(f: &FunctionHandle, j: usize, x: &[f64]) -> f64 {
    let h = 1e-3 * x[j].abs().max(1.0);
    let mut y = x.to_vec();
    let mut at = |d: f64| {
        y[j] = x[j] + d;
        f.eval(&y)
    };
    (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h)
}

/// D_j f(x) = ∂_j f(x) + Σ_α (k(α)/2) ⟨α,e_j⟩ (f(x) − f(σ_α x)) / ⟨α,x⟩.
///
/// On a hyperplane ⟨α,x⟩ = 0 the quotient is replaced by its limit ∂_α f(x),
/// which needs analytic gradient data.
pub fn dunkl_apply(rs: &RootSystem, f: &FunctionHandle, j: usize, x: &[f64]) -> Result<f64> {
    if j >= rs.dimension() || x.len() != rs.dimension() {
        return Err(DunklError::Parameter("coordinate index or point dimension out of range".into()));
    }
    let partial = |i: usize| -> f64 { f.gradient(x, i).unwrap_or_else(|| partial_fd(f, i, x)) };
    let mut v = partial(j);
    let fx = f.eval(x);
    for root in rs.roots() {
        let c = root.vector[j];
        if c == 0.0 || root.multiplicity == 0.0 {
            continue;
        }
        let d: f64 = root.vector.iter().zip(x).map(|(a, b)| a * b).sum();
        let q = if d == 0.0 {
            if !f.has_gradient() {
                return Err(DunklError::HyperplaneSingularity);
            }
            root.vector.iter().enumerate().map(|(i, a)| if *a == 0.0 { 0.0 } else { a * partial(i) }).sum()
        } else {
            (fx - f.eval(&rs.reflect(root, x))) / d
        };
        v += 0.5 * root.multiplicity * c * q;
    }
    Ok(v)
}

// ---------------------------------------------------------------------------
// Dunkl kernel

/// Rank-one E_k(z) with z = xy.
pub fn dunkl_kernel_1d(k: f64, z: f64) -> f64 {
    if k == 0.0 {
        return z.exp();
    }
    let a = if z >= 0.0 { k + 1.0 } else { k };
    z.abs().exp() * kummer_scaled(a, 2.0 * k + 1.0, 2.0 * z.abs())
}

/// d/dz E_k(z), from M′(a,b,r) = (a/b) M(a+1,b+1,r).
pub fn dunkl_kernel_1d_derivative(k: f64, z: f64) -> f64 {
    if k == 0.0 {
        return z.exp();
    }
    let b = 2.0 * k + 1.0;
    let e = dunkl_kernel_1d(k, z);
    let r = 2.0 * z.abs();
    if z >= 0.0 {
        -e + 2.0 * (k + 1.0) / b * z.exp() * kummer_scaled(k + 2.0, b + 1.0, r)
    } else {
        e - 2.0 * k / b * z.abs().exp() * kummer_scaled(k + 1.0, b + 1.0, r)
    }
}

/// Relative residual of E′(xy)·y + k(E(xy) − E(−xy))/x − y E(xy) = 0, the
/// rank-one form of D_x E(·,y) = y E(·,y).
pub fn kernel_ode_residual(k: f64, x: f64, y: f64) -> Result<f64> {
    if x == 0.0 {
        return Err(DunklError::HyperplaneSingularity);
    }
    let z = x * y;
    let (ep, em) = (dunkl_kernel_1d(k, z), dunkl_kernel_1d(k, -z));
    let d = dunkl_kernel_1d_derivative(k, z);
    let lhs = y * d + k * (ep - em) / x;
    let scale = y.abs() * (d.abs() + ep.abs()) + k * (ep.abs() + em.abs()) / x.abs();
    Ok((lhs - y * ep).abs() / scale.max(f64::MIN_POSITIVE))
}

pub fn dunkl_kernel_e(rs: &RootSystem, x: &[f64], y: &[f64]) -> f64 {
    rs.k().iter().zip(x.iter().zip(y)).map(|(&k, (a, b))| dunkl_kernel_1d(k, a * b)).product()
}

/// c′ = Γ(k+1/2) / (√π Γ(k)), the Rösler density constant.
pub fn rosler_constant(k: f64) -> f64 {
    (ln_gamma(k + 0.5) - 0.5 * PI.ln() - ln_gamma(k)).exp()
}

/// Thread-safe store of Gauss–Jacobi rules and Rösler panels. Cached and
/// freshly built rules are identical, so caching never changes results.
#[derive(Debug)]
pub struct KernelCache {
    pub rs: RootSystem,
    enabled: bool,
    jacobi: Mutex<HashMap<(u64, u64, usize), Arc<QuadratureRule>>>,
    rosler: Mutex<HashMap<u64, Arc<RoslerRule>>>,
}

impl KernelCache {
    pub fn new(rs: &RootSystem) -> Self {
        Self { rs: rs.clone(), enabled: true, jacobi: Mutex::default(), rosler: Mutex::default() }
    }

    pub fn uncached(rs: &RootSystem) -> Self {
        Self { enabled: false, ..Self::new(rs) }
    }

    pub fn jacobi(&self, n: usize, alpha: f64, beta: f64) -> Result<Arc<QuadratureRule>> {
        if !self.enabled {
            return gauss_jacobi(n, alpha, beta).map(Arc::new);
        }
        let key = (alpha.to_bits(), beta.to_bits(), n);
        if let Some(r) = self.jacobi.lock().unwrap().get(&key) {
            return Ok(r.clone());
        }
        let r = Arc::new(gauss_jacobi(n, alpha, beta)?);
        self.jacobi.lock().unwrap().insert(key, r.clone());
        Ok(r)
    }

    pub fn rosler(&self, k: f64) -> Arc<RoslerRule> {
        if !self.enabled {
            return Arc::new(RoslerRule::new(k));
        }
        let mut m = self.rosler.lock().unwrap();
        m.entry(k.to_bits()).or_insert_with(|| Arc::new(RoslerRule::new(k))).clone()
    }

    /// E(x, iξ) for the transform; E(x, −iξ) is its conjugate.
    pub fn kernel_imag(&self, x: &[f64], xi: &[f64]) -> Result<Complex64> {
        let mut p = Complex64::new(1.0, 0.0);
        for (j, &k) in self.rs.k().iter().enumerate() {
            p *= self.kernel_imag_1d(k, x[j] * xi[j])?;
        }
        Ok(p)
    }

    /// E_k(iθ) = ∫ e^{isθ} dμ_k(s), Gauss–Jacobi with enough nodes for the oscillation.
    pub fn kernel_imag_1d(&self, k: f64, theta: f64) -> Result<Complex64> {
        if k == 0.0 {
            return Ok(Complex64::from_polar(1.0, theta));
        }
        let n = (32 + theta.abs().ceil() as usize).div_ceil(16) * 16;
        let r = self.jacobi(n, k - 1.0, k)?;
        let mass: f64 = r.weights.iter().sum();
        let v: Complex64 = r.nodes.iter().zip(&r.weights).map(|(&s, &w)| Complex64::from_polar(w, s * theta)).sum();
        Ok(v / mass)
    }
}

// ---------------------------------------------------------------------------
// Rösler integrals

/// Panels for ∫ g(A²) dμ_k(s) with A² = x² + y² − 2sxy.
///
/// With u the distance from the end of [-1,1] where A² is smallest,
/// A² = (|x|−|y|)² + 2|xy| u and the weights become
/// u^{k-1}(2-u)^k (aligned sign) or u^k (2-u)^{k-1} (opposite sign). One
/// set of nodes serves both y and −y.
#[derive(Debug, Clone)]
pub struct RoslerRule {
    pub k: f64,
    c: f64,
    left: QuadratureRule,
    panel: QuadratureRule,
    /// (u, w_aligned, w_opposite) on [1, 2], independent of the point pair
    right_nodes: Vec<(f64, f64, f64)>,
    /// geometric growth of the panels between the two Jacobi ends
    pub growth: f64,
}

impl RoslerRule {
    pub fn new(k: f64) -> Self {
        Self::with_nodes(k, 12, 12)
    }

    pub fn with_nodes(k: f64, n_jacobi: usize, n_panel: usize) -> Self {
        let kk = if k == 0.0 { 1.0 } else { k };
        let right = gauss_jacobi(n_jacobi, kk - 1.0, 0.0).expect("alpha > -1");
        let sc = 0.5f64.powf(kk);
        let right_nodes = right
            .nodes
            .iter()
            .zip(&right.weights)
            .map(|(&z, &w)| {
                let u = 1.5 + 0.5 * z;
                let ww = w * sc;
                (u, ww * u.powf(kk - 1.0) * (2.0 - u), ww * u.powf(kk))
            })
            .collect();
        Self {
            k,
            c: if k == 0.0 { 1.0 } else { rosler_constant(k) },
            left: gauss_jacobi(n_jacobi, 0.0, kk - 1.0).expect("alpha > -1"),
            panel: gauss_legendre(n_panel),
            right_nodes,
            growth: 4.0,
        }
    }

    /// Twice the nodes everywhere, for error estimates.
    pub fn refined(&self) -> Self {
        let mut r = Self::with_nodes(self.k, self.left.len() * 2, self.panel.len() * 2);
        r.growth = self.growth.sqrt();
        r
    }

    /// Calls `visit(A², w_y, w_minus_y)`; Σ w ∘ g gives ∫ g dμ for the
    /// translation towards y and towards −y. `width2` is the A²-scale over
    /// which g varies.
    pub fn visit<V: FnMut(f64, f64, f64)>(&self, x: f64, y: f64, width2: f64, mut visit: V) {
        let k = self.k;
        if k == 0.0 {
            visit((x - y) * (x - y), 1.0, 0.0);
            visit((x + y) * (x + y), 0.0, 1.0);
            return;
        }
        let b = 2.0 * (x * y).abs();
        let d = x.abs() - y.abs();
        let d2 = d * d;
        if b == 0.0 {
            visit(x * x + y * y, 1.0, 1.0);
            return;
        }
        let aligned = x * y > 0.0;
        let c = self.c;
        let mut emit = |u: f64, w_al: f64, w_op: f64| {
            let a2 = d2 + b * u;
            if aligned {
                visit(a2, c * w_al, c * w_op);
            } else {
                visit(a2, c * w_op, c * w_al);
            }
        };
        let h0 = ((width2.max(0.0) + d2) / b).min(1.0);
        // [0, h0]: weight u^{k-1}
        let sc = (0.5 * h0).powf(k);
        for (&z, &w) in self.left.nodes.iter().zip(&self.left.weights) {
            let u = 0.5 * h0 * (1.0 + z);
            let p = (2.0 - u).powf(k - 1.0);
            let ww = w * sc * p;
            emit(u, ww * (2.0 - u), ww * u);
        }
        // graded Legendre panels on [h0, 1]
        let mut lo = h0;
        while lo < 1.0 {
            let hi = (lo * self.growth).min(1.0);
            let (c0, hw) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            for (&z, &w) in self.panel.nodes.iter().zip(&self.panel.weights) {
                let u = c0 + hw * z;
                // u^k (2−u)^k / (u(2−u)) shared by both weights
                let q = ((u * (2.0 - u)).ln() * k).exp() / (u * (2.0 - u));
                let ww = w * hw * q;
                emit(u, ww * (2.0 - u), ww * u);
            }
            lo = hi;
        }
        // [1, 2]: weight (2-u)^{k-1}
        for &(u, wa, wo) in &self.right_nodes {
            emit(u, wa, wo);
        }
    }

    /// (∫ g dμ towards y, towards −y).
    pub fn pair<G: FnMut(f64) -> f64>(&self, x: f64, y: f64, width2: f64, mut g: G) -> (f64, f64) {
        let (mut p, mut m) = (0.0, 0.0);
        self.visit(x, y, width2, |a2, wp, wm| {
            let v = g(a2);
            p += wp * v;
            m += wm * v;
        });
        (p, m)
    }
}

/// Nodes (Σ_j A_j², weight) of the product measure ∏ dμ_{k_j}, nested over
/// coordinates so that each level is graded for the remaining width.
pub fn rosler_nodes(rules: &[Arc<RoslerRule>], x: &[f64], y: &[f64], width2: f64) -> Vec<(f64, f64)> {
    fn rec(rules: &[Arc<RoslerRule>], x: &[f64], y: &[f64], j: usize, offset: f64, weight: f64, width2: f64, out: &mut Vec<(f64, f64)>) {
        if j == x.len() {
            out.push((offset, weight));
            return;
        }
        let rest: f64 = (j + 1..x.len()).map(|i| (x[i].abs() - y[i].abs()).powi(2)).sum();
        let mut level = Vec::new();
        rules[j].visit(x[j], y[j], width2 + offset + rest, |a2, wp, _| {
            if wp != 0.0 {
                level.push((a2, wp));
            }
        });
        for (a2, w) in level {
            rec(rules, x, y, j + 1, offset + a2, weight * w, width2, out);
        }
    }
    let mut out = Vec::new();
    rec(rules, x, y, 0, 0.0, 1.0, width2, &mut out);
    out
}

/// ∫…∫ g(Σ_j A_j²) ∏ dμ_{k_j}(s_j).
pub fn rosler_integral<G: FnMut(f64) -> f64>(
    rules: &[Arc<RoslerRule>],
    x: &[f64],
    y: &[f64],
    width2: f64,
    g: &mut G,
) -> f64 {
    rosler_nodes(rules, x, y, width2).into_iter().map(|(a2, w)| w * g(a2)).sum()
}

/// τ_x f(−y) for radial f, by Rösler's formula; error checked by refinement.
pub fn translate_radial(rs: &RootSystem, f: &FunctionHandle, x: &[f64], y: &[f64], tol: f64) -> Result<f64> {
    if !f.is_radial() {
        return Err(DunklError::Function(format!("{} is not radial", f.name)));
    }
    let cache = KernelCache::new(rs);
    translate_radial_cached(&cache, f, x, y, tol)
}

pub fn translate_radial_cached(cache: &KernelCache, f: &FunctionHandle, x: &[f64], y: &[f64], tol: f64) -> Result<f64> {
    if !f.is_radial() {
        return Err(DunklError::Function(format!("{} is not radial", f.name)));
    }
    let mut g = |a2: f64| f.profile(a2.max(0.0).sqrt()).unwrap();
    let width2 = f.scale * f.scale;
    let coarse: Vec<_> = cache.rs.k().iter().map(|&k| cache.rosler(k)).collect();
    let v = rosler_integral(&coarse, x, y, width2, &mut g);
    let fine: Vec<_> = coarse.iter().map(|r| Arc::new(r.refined())).collect();
    let v2 = rosler_integral(&fine, x, y, width2, &mut g);
    let err = (v2 - v).abs();
    if err > tol.max(1e-14 * v2.abs()) {
        return Err(DunklError::Quadrature { value: v2, estimate: err });
    }
    Ok(v2)
}

// ---------------------------------------------------------------------------
// Spatial integrals

fn truncation_radius(f: &FunctionHandle, tol: f64) -> Result<f64> {
    match f.decay {
        Decay::Gaussian { a, c } => {
            let mut r = 1.0;
            while c * (-a * r * r).exp() * (1.0 + r).powi(8) > 0.5 * tol {
                r *= 1.1;
            }
            Ok(r)
        }
        Decay::Power { p, c } if p > 8.0 => Ok((2.0 * c / tol).powf(1.0 / (p - 8.0))),
        _ => Err(DunklError::Function(format!("{} has no integrable decay metadata", f.name))),
    }
}

/// ∫ over [-R, R]^N of g against dw, split at the hyperplanes (N ≤ 2).
fn weighted_box<G: FnMut(&[f64]) -> f64>(rs: &RootSystem, r: f64, tol: f64, mut g: G) -> Result<f64> {
    let n = rs.dimension();
    let segs = [Interval::Finite(-r, 0.0), Interval::Finite(0.0, r)];
    let mut total = 0.0;
    match n {
        1 => {
            for s in segs {
                total += adaptive_integrate(|t| g(&[t]) * rs.weight(&[t]), s, tol / 2.0)?.value;
            }
        }
        2 => {
            for s in segs {
                for q in segs {
                    let mut fail = None;
                    let v = adaptive_integrate(
                        |a| match adaptive_integrate(|b| g(&[a, b]) * rs.weight(&[a, b]), q, tol / 40.0) {
                            Ok(e) => e.value,
                            Err(e) => {
                                fail = Some(e);
                                f64::NAN
                            }
                        },
                        s,
                        tol / 8.0,
                    );
                    if let Some(e) = fail {
                        return Err(e);
                    }
                    total += v?.value;
                }
            }
        }
        _ => {
            return Err(DunklError::Parameter(format!(
                "spatial quadrature is limited to N <= 2 (got N = {n})"
            )))
        }
    }
    Ok(total)
}

/// 𝓕f(ξ) = c_k^{-1} ∫ f(x) E(x, −iξ) dw(x).
pub fn dunkl_transform(rs: &RootSystem, f: &FunctionHandle, xi: &[f64], tol: f64) -> Result<Complex64> {
    let cache = KernelCache::new(rs);
    dunkl_transform_cached(&cache, f, xi, tol)
}

pub fn dunkl_transform_cached(cache: &KernelCache, f: &FunctionHandle, xi: &[f64], tol: f64) -> Result<Complex64> {
    let rs = &cache.rs;
    let r = truncation_radius(f, tol * rs.c_k())?;
    let mut parts = [0.0; 2];
    for (p, part) in parts.iter_mut().enumerate() {
        *part = weighted_box(rs, r, tol * rs.c_k(), |x| {
            let e = cache.kernel_imag(x, xi).map(|e| e.conj()).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
            f.eval(x) * if p == 0 { e.re } else { e.im }
        })?;
    }
    Ok(Complex64::new(parts[0], parts[1]) / rs.c_k())
}

/// ‖f‖_{L¹(dw)} for decaying f (N ≤ 2).
pub fn l1_norm(rs: &RootSystem, f: &FunctionHandle, tol: f64) -> Result<f64> {
    let r = truncation_radius(f, tol)?;
    weighted_box(rs, r, tol, |x| f.eval(x).abs())
}

/// (f * g)(x) = ∫ f(y) τ_x g(−y) dw(y) for radial g, rank one.
pub fn dunkl_convolve(rs: &RootSystem, f: &FunctionHandle, g: &FunctionHandle, x: &[f64], tol: f64) -> Result<f64> {
    if !g.is_radial() {
        return Err(DunklError::Function(format!("{} is not radial", g.name)));
    }
    if rs.dimension() != 1 {
        return Err(DunklError::Parameter("dunkl_convolve is implemented in rank one".into()));
    }
    let cache = KernelCache::new(rs);
    let rule = cache.rosler(rs.k()[0]);
    let x0 = x[0];
    let width2 = g.scale * g.scale;
    // ∫_0^∞ w(y) [f(y) τ g(-y) + f(-y) τ g(y)] dy
    let mut integrand = |y: f64| {
        let (p, m) = rule.pair(x0, y, width2, |a2| g.profile(a2.max(0.0).sqrt()).unwrap());
        rs.weight(&[y]) * (f.eval1(y) * p + f.eval1(-y) * m)
    };
    let mut breaks = vec![0.0];
    let reach = x0.abs() + 40.0 * g.scale;
    for b in [x0.abs() * 0.5, x0.abs(), x0.abs() + g.scale, reach] {
        if b > *breaks.last().unwrap() {
            breaks.push(b);
        }
    }
    let mut total = 0.0;
    let n = breaks.len() as f64;
    for w in breaks.windows(2) {
        total += adaptive_integrate(&mut integrand, Interval::Finite(w[0], w[1]), tol / (n + 1.0))?.value;
    }
    total += adaptive_integrate(&mut integrand, Interval::Upper(reach), tol / (n + 1.0))?.value;
    Ok(total)
}
