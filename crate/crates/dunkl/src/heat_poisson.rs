//! Dunkl heat and Poisson kernels with exact time derivatives, and their
//! semigroups acting on bounded functions.
//!
//! Per coordinate, with D = |x|−|y|, r = |xy| and b = 2k+1,
//! h_t(x,y) = c_k^{-1} ∏ (2t)^{-(k+1/2)} e^{-D²/4t} F(a±, b)(r/t).
//! Subordinating h_t in closed form gives the radial profile
//! p̃_t(A) = K t (t² + A²)^{-(𝐍+1)/2}, K = c_k^{-1} π^{-1/2} 2^{𝐍/2} Γ((𝐍+1)/2),
//! and p_t(x,y) = ∫ p̃_t(A(x,y,η)) dμ_x(η).

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::dunkl_kernel::{rosler_nodes, FunctionHandle, KernelCache, RoslerRule, TrigSeries};
use crate::error::{DunklError, Result};
use crate::quadrature::{gauss_laguerre, graded_breaks, FilonRule, QuadratureRule};
use crate::root_system::RootSystem;
use crate::special::{cauchy_profile_jet, factorial, Jet, KummerFamily, MAXJ};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelMode {
    Heat,
    Poisson,
}

/// How p_t is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoissonRoute {
    /// closed-form radial profile integrated against the Rösler measure
    Radial,
    /// Gauss–Laguerre subordination of the heat kernel
    Subordination,
}

/// Log-spaced times t_1 < … < t_M.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    pub times: Vec<f64>,
    pub t_min: f64,
    pub t_max: f64,
}

impl TimeGrid {
    pub fn log_spaced(t_min: f64, t_max: f64, m: usize) -> Result<Self> {
        if !(t_min > 0.0 && t_max > t_min) || m < 2 {
            return Err(DunklError::Parameter(format!(
                "time grid needs 0 < t_min < t_max and at least 2 points (got {t_min}, {t_max}, {m})"
            )));
        }
        let times = (0..m).map(|i| t_min * (t_max / t_min).powf(i as f64 / (m - 1) as f64)).collect();
        Ok(Self { times, t_min, t_max })
    }

    /// Default [1e-3, 10] with 60 points.
    pub fn default_grid() -> Self {
        Self::log_spaced(1e-3, 10.0, 60).unwrap()
    }

    /// Same range, twice the points minus one (nested).
    pub fn doubled(&self) -> Self {
        Self::log_spaced(self.t_min, self.t_max, 2 * self.times.len() - 1).unwrap()
    }

    /// Points that fall inside [a, b].
    pub fn restricted(&self, a: f64, b: f64) -> Vec<f64> {
        self.times.iter().copied().filter(|&t| t >= a * (1.0 - 1e-12) && t <= b * (1.0 + 1e-12)).collect()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[derive(Debug)]
pub struct KernelEvaluator {
    pub rs: RootSystem,
    pub mode: KernelMode,
    /// highest heat derivative order; Poisson orders go to 2·n_max
    pub n_max: usize,
    /// starting Gauss–Laguerre node count for subordination
    pub laguerre_nodes: usize,
    pub max_laguerre_nodes: usize,
    pub route: PoissonRoute,
    /// Gauss–Legendre nodes per outer panel in apply_semigroup
    pub panel_nodes: usize,
    cache: KernelCache,
    rules: Vec<Arc<RoslerRule>>,
    laguerre: Mutex<HashMap<(u64, usize), Arc<QuadratureRule>>>,
    filon: FilonRule,
    ln_poisson_const: f64,
    /// F(k+1, 2k+1+i) and F(k, 2k+1+i) per coordinate
    kummer: Vec<[KummerFamily; 2]>,
}

fn pos_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(DunklError::Parameter(format!("time must be positive and finite (got {t})")))
    }
}

impl KernelEvaluator {
    pub fn new(rs: &RootSystem, mode: KernelMode) -> Self {
        let cache = KernelCache::new(rs);
        let rules = rs.k().iter().map(|&k| cache.rosler(k)).collect();
        let nn = rs.homogeneous_dimension();
        let ln_poisson_const =
            -rs.c_k().ln() - 0.5 * PI.ln() + 0.5 * nn * std::f64::consts::LN_2 + ln_gamma(0.5 * (nn + 1.0));
        Self {
            rs: rs.clone(),
            mode,
            n_max: 6,
            laguerre_nodes: 64,
            max_laguerre_nodes: 1024,
            route: PoissonRoute::Radial,
            panel_nodes: 12,
            cache,
            rules,
            laguerre: Mutex::default(),
            filon: FilonRule::new(12),
            ln_poisson_const,
            kummer: rs
                .k()
                .iter()
                .map(|&k| [KummerFamily::new(k + 1.0, 2.0 * k + 1.0, MAXJ), KummerFamily::new(k, 2.0 * k + 1.0, MAXJ)])
                .collect(),
        }
    }

    pub fn heat(rs: &RootSystem) -> Self {
        Self::new(rs, KernelMode::Heat)
    }

    pub fn poisson(rs: &RootSystem) -> Self {
        Self::new(rs, KernelMode::Poisson)
    }

    pub fn with_route(mut self, route: PoissonRoute) -> Self {
        self.route = route;
        self
    }

    /// Finer Rösler panels and outer panels, for refinement studies.
    pub fn refined(&self) -> Self {
        let mut e = Self::new(&self.rs, self.mode);
        e.rules = self.rules.iter().map(|r| Arc::new(r.refined())).collect();
        e.panel_nodes = self.panel_nodes * 2;
        e.filon = FilonRule::new(e.panel_nodes);
        e.route = self.route;
        e
    }

    pub fn cache(&self) -> &KernelCache {
        &self.cache
    }

    pub fn poisson_constant(&self) -> f64 {
        self.ln_poisson_const.exp()
    }

    fn laguerre(&self, alpha: f64, n: usize) -> Result<Arc<QuadratureRule>> {
        let key = (alpha.to_bits(), n);
        if let Some(r) = self.laguerre.lock().unwrap().get(&key) {
            return Ok(r.clone());
        }
        let r = Arc::new(gauss_laguerre(alpha, n)?);
        self.laguerre.lock().unwrap().insert(key, r.clone());
        Ok(r)
    }

    // -----------------------------------------------------------------------
    // heat

    /// Jet in τ of one coordinate factor at t0 + τ.
    /// `scaled` drops the constant e^{-D²/4t0}.
    fn heat_jet_1d(k: f64, fam: &[KummerFamily; 2], t0: f64, x: f64, y: f64, n: usize, scaled: bool) -> Jet {
        let d = x.abs() - y.abs();
        let r = (x * y).abs();
        let inv = Jet::var(t0, n).powf(-1.0);
        let pw = Jet::var(2.0 * t0, n).powf(-(k + 0.5));
        // (2t0 + 2τ)^{-p}: rescale the τ coefficients
        let mut pw2 = pw;
        let mut f = 1.0;
        for c in pw2.c.iter_mut().take(n + 1) {
            *c *= f;
            f *= 2.0;
        }
        let mut expo = inv.scale(-0.25 * d * d);
        if scaled {
            expo.c[0] = 0.0;
        }
        let gauss = expo.exp();
        let fam = if x * y >= 0.0 { &fam[0] } else { &fam[1] };
        let mut der = [0.0; MAXJ];
        fam.derivs(r / t0, &mut der[..=n]);
        let fj = inv.scale(r).compose(&der[..=n]);
        pw2.mul(&gauss).mul(&fj)
    }

    /// Taylor jet of t ↦ h_t(x,y) at t0, orders 0..=n.
    pub fn heat_jet(&self, t0: f64, x: &[f64], y: &[f64], n: usize) -> Jet {
        self.heat_jet_inner(t0, x, y, n, false)
    }

    fn heat_jet_inner(&self, t0: f64, x: &[f64], y: &[f64], n: usize, scaled: bool) -> Jet {
        let mut j = Jet::constant(1.0 / self.rs.c_k(), n);
        for (i, &k) in self.rs.k().iter().enumerate() {
            j = j.mul(&Self::heat_jet_1d(k, &self.kummer[i], t0, x[i], y[i], n, scaled));
        }
        j
    }

    pub fn heat_kernel(&self, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
        pos_t(t)?;
        Ok(self.heat_jet(t, x, y, 0).c[0])
    }

    /// ∂_t^n h_t(x,y) from the closed form.
    pub fn heat_time_derivative(&self, n: usize, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
        pos_t(t)?;
        if n > self.n_max {
            return Err(DunklError::UnsupportedOrder { order: n, max: self.n_max });
        }
        Ok(self.heat_jet(t, x, y, n).deriv(n))
    }

    // -----------------------------------------------------------------------
    // Poisson

    fn poisson_exponent(&self) -> f64 {
        0.5 * (self.rs.homogeneous_dimension() + 1.0)
    }

    /// p̃_t(A) = K t (t² + A²)^{-(𝐍+1)/2}
    pub fn poisson_profile(&self, t: f64, a: f64) -> f64 {
        (self.ln_poisson_const + t.ln() - self.poisson_exponent() * (t * t + a * a).ln()).exp()
    }

    /// Jet of t ↦ p_t(x,y) at t0 by the radial route.
    pub fn poisson_jet(&self, t0: f64, x: &[f64], y: &[f64], n: usize) -> Jet {
        let p = self.poisson_exponent();
        let kc = self.poisson_constant();
        let mut acc = Jet::zero(n);
        for (a2, w) in rosler_nodes(&self.rules, x, y, t0 * t0) {
            acc.add_assign_scaled(&cauchy_profile_jet(t0, a2, p, n), w * kc);
        }
        acc
    }

    fn check_order(&self, m: usize) -> Result<()> {
        if m > 2 * self.n_max {
            Err(DunklError::UnsupportedOrder { order: m, max: 2 * self.n_max })
        } else {
            Ok(())
        }
    }

    pub fn poisson_kernel(&self, t: f64, x: &[f64], y: &[f64], tol: f64) -> Result<f64> {
        pos_t(t)?;
        match self.route {
            PoissonRoute::Radial => Ok(self.poisson_jet(t, x, y, 0).c[0]),
            PoissonRoute::Subordination => self.poisson_kernel_subordination(t, x, y, tol).map(|v| v.0),
        }
    }

    /// ∂_t^m p_t(x,y).
    pub fn poisson_time_derivative(&self, m: usize, t: f64, x: &[f64], y: &[f64], tol: f64) -> Result<f64> {
        pos_t(t)?;
        self.check_order(m)?;
        match self.route {
            PoissonRoute::Radial => Ok(self.poisson_jet(t, x, y, m).deriv(m)),
            PoissonRoute::Subordination => self.poisson_time_derivative_subordination(m, t, x, y, tol).map(|v| v.0),
        }
    }

    /// Γ(1/2)^{-1} ∫ e^{-u} h_{t²/4u}(x,y) u^{-1/2} du. Returns (value, nodes used).
    ///
    /// The substitution v = u(1 + D²/t²), with D the orbit distance, moves
    /// the Gaussian factor into a generalized Laguerre weight v^{(𝐍-1)/2} e^{-v}.
    pub fn poisson_kernel_subordination(&self, t: f64, x: &[f64], y: &[f64], tol: f64) -> Result<(f64, usize)> {
        self.poisson_time_derivative_subordination(0, t, x, y, tol)
    }

    /// ∂_t^m p_t via the even/odd transfer formulas
    /// ψ^{(2n)}(t) = (−1)^n π^{-1/2} ∫ e^{-u} φ^{(n)}(t²/4u) u^{-1/2} du,
    /// ψ^{(2n+1)}(t) = (−1)^n π^{-1/2} ∫ e^{-u} φ^{(n+1)}(t²/4u) (t/2u) u^{-1/2} du,
    /// with φ(s) = h_s(x,y).
    pub fn poisson_time_derivative_subordination(
        &self,
        m: usize,
        t: f64,
        x: &[f64],
        y: &[f64],
        tol: f64,
    ) -> Result<(f64, usize)> {
        pos_t(t)?;
        self.check_order(m)?;
        let nh = m / 2;
        let (order, odd) = if m % 2 == 0 { (nh, false) } else { (nh + 1, true) };
        let nn = self.rs.homogeneous_dimension();
        let d2 = self.rs.orbit_distance(x, y).powi(2);
        let l = 1.0 + d2 / (t * t);
        let alpha = 0.5 * (nn - 1.0) + nh as f64;
        let sign = if nh % 2 == 0 { 1.0 } else { -1.0 };
        let eval = |n: usize| -> Result<f64> {
            let rule = self.laguerre(alpha, n)?;
            let mut s = 0.0;
            for (&v, &w) in rule.nodes.iter().zip(&rule.weights) {
                let u = v / l;
                let sv = t * t / (4.0 * u);
                // φ^{(order)}(s) without its factor e^{-D²/4s} = e^{-u D²/t²}
                let phi = self.heat_jet_inner(sv, x, y, order, true).deriv(order);
                let mut g = u.powf(-0.5) * phi / v.powf(alpha) / l;
                if odd {
                    g *= t / (2.0 * u);
                }
                s += w * g;
            }
            Ok(sign * s / PI.sqrt())
        };
        let mut n = self.laguerre_nodes;
        let mut prev = eval(n)?;
        let mut diff = f64::INFINITY;
        while 2 * n <= self.max_laguerre_nodes {
            n *= 2;
            let cur = eval(n)?;
            diff = (cur - prev).abs();
            if diff <= tol * cur.abs() || diff < 1e-300 {
                return Ok((cur, n));
            }
            prev = cur;
        }
        Err(DunklError::Quadrature { value: prev, estimate: diff })
    }

    /// Kernel of the configured mode.
    pub fn kernel(&self, t: f64, x: &[f64], y: &[f64], tol: f64) -> Result<f64> {
        match self.mode {
            KernelMode::Heat => self.heat_kernel(t, x, y),
            KernelMode::Poisson => self.poisson_kernel(t, x, y, tol),
        }
    }

    pub fn kernel_time_derivative(&self, n: usize, t: f64, x: &[f64], y: &[f64], tol: f64) -> Result<f64> {
        match self.mode {
            KernelMode::Heat => self.heat_time_derivative(n, t, x, y),
            KernelMode::Poisson => self.poisson_time_derivative(n, t, x, y, tol),
        }
    }

    /// Rank one: jets of (p(x, y), p(x, −y)) sharing one set of Rösler nodes.
    pub fn kernel_pair_jet(&self, t0: f64, x: f64, y: f64, n: usize) -> (Jet, Jet) {
        match self.mode {
            KernelMode::Heat => (self.heat_jet(t0, &[x], &[y], n), self.heat_jet(t0, &[x], &[-y], n)),
            KernelMode::Poisson => {
                let p = self.poisson_exponent();
                let kc = self.poisson_constant();
                let (mut jp, mut jm) = (Jet::zero(n), Jet::zero(n));
                if n <= 1 {
                    // t B^{-p} and B^{-p} − 2p t² B^{-p-1}, B = t² + A²
                    let t2 = t0 * t0;
                    self.rules[0].visit(x, y, t2, |a2, wp, wm| {
                        let b = t2 + a2;
                        let bp = (-p * b.ln()).exp();
                        let v0 = t0 * bp;
                        let v1 = bp * (1.0 - 2.0 * p * t2 / b);
                        jp.c[0] += wp * kc * v0;
                        jm.c[0] += wm * kc * v0;
                        jp.c[1] += wp * kc * v1;
                        jm.c[1] += wm * kc * v1;
                    });
                    if n == 0 {
                        jp.c[1] = 0.0;
                        jm.c[1] = 0.0;
                    }
                    return (jp, jm);
                }
                self.rules[0].visit(x, y, t0 * t0, |a2, wp, wm| {
                    let j = cauchy_profile_jet(t0, a2, p, n);
                    if wp != 0.0 {
                        jp.add_assign_scaled(&j, wp * kc);
                    }
                    if wm != 0.0 {
                        jm.add_assign_scaled(&j, wm * kc);
                    }
                });
                (jp, jm)
            }
        }
    }

    // -----------------------------------------------------------------------
    // semigroups

    /// ∂_t^m (K_t f)(x) for the configured kernel, rank one.
    pub fn apply_semigroup(&self, f: &FunctionHandle, m: usize, t: f64, x: &[f64], tol: f64) -> Result<f64> {
        if !f.is_bounded {
            return Err(DunklError::Function(format!("{} is not declared bounded", f.name)));
        }
        let sampler = self.sampler_for(f, m, t, x, tol)?;
        Ok(sampler.integrate_fn(f))
    }

    fn sampler_for(&self, f: &FunctionHandle, m: usize, t: f64, x: &[f64], tol: f64) -> Result<SemigroupSampler> {
        let lam = f.trig.as_ref().map_or(0.0, |s| s.max_frequency());
        let opts = SamplerOptions {
            breakpoints: f.breakpoints.clone(),
            max_frequency: lam,
            sup_norm: f.sup_norm.unwrap_or(1.0),
            tol,
            resolve: (f.active_radius > 0.0).then_some((f.scale, f.active_radius)),
        };
        SemigroupSampler::new(self, t, x, m, &opts)
    }
}

/// What the outer quadrature needs to know about the functions it will integrate.
#[derive(Debug, Clone)]
pub struct SamplerOptions {
    pub breakpoints: Vec<f64>,
    pub max_frequency: f64,
    pub sup_norm: f64,
    pub tol: f64,
    /// (scale, radius): panels inside the radius are no wider than the scale
    pub resolve: Option<(f64, f64)>,
}

impl SamplerOptions {
    pub fn new(tol: f64) -> Self {
        Self { breakpoints: Vec::new(), max_frequency: 0.0, sup_norm: 1.0, tol, resolve: None }
    }

    /// Options covering every function in a batch.
    pub fn covering(fs: &[FunctionHandle], tol: f64) -> Self {
        let mut o = Self::new(tol);
        for f in fs {
            for &b in &f.breakpoints {
                if !o.breakpoints.contains(&b) {
                    o.breakpoints.push(b);
                }
            }
            o.max_frequency = o.max_frequency.max(f.trig.as_ref().map_or(0.0, |s| s.max_frequency()));
            o.sup_norm = o.sup_norm.max(f.sup_norm.unwrap_or(1.0));
            if f.active_radius > 0.0 {
                let (s, r) = o.resolve.unwrap_or((f64::INFINITY, 0.0));
                o.resolve = Some((s.min(f.scale), r.max(f.active_radius)));
            }
        }
        o
    }
}

#[derive(Debug, Clone)]
struct Panel {
    c: f64,
    h: f64,
    ys: Vec<f64>,
    /// quadrature weight · w(y) · ∂_t^m kernel, towards +y and −y
    wp: Vec<f64>,
    wm: Vec<f64>,
    /// Legendre coefficients of w(y)·(∂p(x,y) ± ∂p(x,−y)) on the panel
    even_coeffs: Vec<f64>,
    odd_coeffs: Vec<f64>,
    oscillatory: bool,
}

/// Kernel derivatives ∂_t^m K_t(x, ·) tabulated at the nodes of a graded
/// mesh on [0, Y_max], reusable for many integrands at fixed (t, x).
///
/// Rank one only: ∫ K(x,y) f(y) dw(y) = ∫_0^∞ w(y) [K(x,y) f(y) + K(x,−y) f(−y)] dy.
#[derive(Debug, Clone)]
pub struct SemigroupSampler {
    pub t: f64,
    pub x: f64,
    pub m: usize,
    panels: Vec<Panel>,
    filon: FilonRule,
    pub y_max: f64,
    pub nodes: usize,
}

impl SemigroupSampler {
    pub fn new(ke: &KernelEvaluator, t: f64, x: &[f64], m: usize, opts: &SamplerOptions) -> Result<Self> {
        pos_t(t)?;
        if ke.rs.dimension() != 1 || x.len() != 1 {
            return Err(DunklError::Parameter("semigroup actions are implemented in rank one".into()));
        }
        match ke.mode {
            KernelMode::Heat if m > ke.n_max => {
                return Err(DunklError::UnsupportedOrder { order: m, max: ke.n_max })
            }
            KernelMode::Poisson => ke.check_order(m)?,
            _ => {}
        }
        let x0 = x[0];
        let k = ke.rs.k()[0];
        let tol = opts.tol.max(1e-15);
        let ax = x0.abs();
        let (scale, y_max) = match ke.mode {
            KernelMode::Poisson => {
                let tail = (3.0 * k + 4.0) * std::f64::consts::LN_2 + ke.ln_poisson_const;
                let y = (tail.exp() * t.max(1.0) * opts.sup_norm.max(1.0) * factorial(m + 1) / tol)
                    .max(1e3 * (1.0 + ax + t));
                (t, y)
            }
            KernelMode::Heat => {
                let s = (2.0 * t).sqrt();
                (s, ax + (4.0 * t * ((1.0 / tol).ln() + 30.0 + 2.0 * m as f64)).sqrt())
            }
        };
        let mut sing = vec![
            Complex64::new(x0, scale),
            Complex64::new(x0, -scale),
            Complex64::new(-x0, scale),
            Complex64::new(-x0, -scale),
        ];
        // nonzero breakpoints are kinks: split there, no grading
        let kinks: Vec<f64> = opts.breakpoints.iter().map(|b| b.abs()).filter(|b| *b > 0.0).collect();
        let weight_singular = k > 0.0 || opts.breakpoints.iter().any(|b| *b == 0.0);
        let near0 = sing.iter().map(|s| s.norm()).chain(kinks.iter().copied()).filter(|d| *d > 0.0).fold(f64::INFINITY, f64::min);
        let c1 = 0.5 * near0;
        let lam = opts.max_frequency;
        let zero_break = opts.breakpoints.iter().any(|b| *b == 0.0);
        // heat mass sits where ||y| - |x|| is below the Gaussian reach
        let y_lo = match ke.mode {
            KernelMode::Heat => (2.0 * ax - y_max).max(0.0),
            KernelMode::Poisson => 0.0,
        };
        let c0 = if y_lo > 0.0 {
            0.0
        } else if zero_break {
            1e-12 * c1
        } else if weight_singular {
            let c = if lam > 0.0 { c1.min(1.0 / lam) } else { c1 };
            c.max(1e-6 * c1)
        } else {
            0.0
        };
        if weight_singular {
            sing.push(Complex64::new(0.0, 0.0));
        }
        let floor = 1e-10 * scale.min(1.0);
        let y_start = c0.max(y_lo);
        let mut breaks = graded_breaks(y_start, y_max, &sing, 0.5, floor, 4000);
        for &b in &kinks {
            if b > y_start && b < y_max && !breaks.contains(&b) {
                let i = breaks.partition_point(|&v| v < b);
                breaks.insert(i, b);
            }
        }
        if let Some((s, r)) = opts.resolve {
            breaks = resolve_breaks(&breaks, s, r);
        }
        if ke.mode == KernelMode::Heat {
            // the Gaussian is entire; its width bounds the panels instead
            breaks = resolve_breaks(&breaks, 1.5 * scale, y_max);
        }
        let n = ke.panel_nodes;
        let filon = if n == ke.filon.len() { ke.filon.clone() } else { FilonRule::new(n) };
        let mut panels = Vec::with_capacity(breaks.len());
        let mut nodes = 0;
        let mut vals = vec![0.0; n];
        let mut odd = vec![0.0; n];
        if c0 > 0.0 {
            // [0, c0] with weight y^{2k}
            let rule = ke.cache.jacobi(n, 0.0, 2.0 * k)?;
            let sc = (0.5 * c0).powf(2.0 * k + 1.0) * 2f64.powf(k);
            let mut p = Panel {
                c: 0.5 * c0,
                h: 0.5 * c0,
                ys: Vec::with_capacity(n),
                wp: Vec::with_capacity(n),
                wm: Vec::with_capacity(n),
                even_coeffs: Vec::new(),
                odd_coeffs: Vec::new(),
                oscillatory: false,
            };
            for (&z, &w) in rule.nodes.iter().zip(&rule.weights) {
                let y = 0.5 * c0 * (1.0 + z);
                let (jp, jm) = ke.kernel_pair_jet(t, x0, y, m);
                p.ys.push(y);
                p.wp.push(w * sc * jp.deriv(m));
                p.wm.push(w * sc * jm.deriv(m));
            }
            nodes += n;
            panels.push(p);
        }
        for b in breaks.windows(2) {
            let (c, h) = (0.5 * (b[0] + b[1]), 0.5 * (b[1] - b[0]));
            let mut p = Panel {
                c,
                h,
                ys: Vec::with_capacity(n),
                wp: Vec::with_capacity(n),
                wm: Vec::with_capacity(n),
                even_coeffs: vec![0.0; n],
                odd_coeffs: vec![0.0; n],
                oscillatory: true,
            };
            for (i, (&z, &w)) in filon.base.nodes.iter().zip(&filon.base.weights).enumerate() {
                let y = c + h * z;
                let wy = ke.rs.weight(&[y]);
                let (jp, jm) = ke.kernel_pair_jet(t, x0, y, m);
                let (dp, dm) = (jp.deriv(m), jm.deriv(m));
                p.ys.push(y);
                p.wp.push(w * h * wy * dp);
                p.wm.push(w * h * wy * dm);
                vals[i] = wy * (dp + dm);
                odd[i] = wy * (dp - dm);
            }
            filon.coefficients(&vals, &mut p.even_coeffs);
            filon.coefficients(&odd, &mut p.odd_coeffs);
            nodes += n;
            panels.push(p);
        }
        Ok(Self { t, x: x0, m, panels, filon, y_max, nodes })
    }

    /// ∫ ∂_t^m K_t(x,y) f(y) dw(y) from point values of f.
    pub fn integrate_fn(&self, f: &FunctionHandle) -> f64 {
        if let Some(tr) = &f.trig {
            return self.integrate_trig(tr);
        }
        self.integrate_values(|y| f.eval1(y), f.is_even)
    }

    pub fn integrate_values<F: FnMut(f64) -> f64>(&self, mut f: F, even: bool) -> f64 {
        let mut s = 0.0;
        for p in &self.panels {
            for i in 0..p.ys.len() {
                let y = p.ys[i];
                let fp = f(y);
                let fm = if even { fp } else { f(-y) };
                s += p.wp[i] * fp + p.wm[i] * fm;
            }
        }
        s
    }

    /// Mass ∫ ∂_t^m K_t(x,y) dw(y).
    pub fn mass(&self) -> f64 {
        self.integrate_values(|_| 1.0, true)
    }

    /// Exact-in-frequency integration of a trigonometric series: Filon panels
    /// away from the origin, plain Jacobi nodes on the singular end panel.
    pub fn integrate_trig(&self, series: &TrigSeries) -> f64 {
        let freqs: Vec<f64> = series.modes.iter().map(|m| m.1).collect();
        let vals = self.mode_integrals(&freqs);
        let mut s = series.constant * self.mass() + vals.iter().zip(&series.modes).map(|(v, m)| m.0 * v).sum::<f64>();
        if !series.sin_modes.is_empty() {
            let freqs: Vec<f64> = series.sin_modes.iter().map(|m| m.1).collect();
            let vals = self.sin_mode_integrals(&freqs);
            s += vals.iter().zip(&series.sin_modes).map(|(v, m)| m.0 * v).sum::<f64>();
        }
        s
    }

    /// ∫ ∂_t^m K_t(x,y) cos(λ y) dw(y) for each λ.
    pub fn mode_integrals(&self, freqs: &[f64]) -> Vec<f64> {
        self.modes(freqs, false)
    }

    /// ∫ ∂_t^m K_t(x,y) sin(λ y) dw(y) for each λ.
    pub fn sin_mode_integrals(&self, freqs: &[f64]) -> Vec<f64> {
        self.modes(freqs, true)
    }

    fn modes(&self, freqs: &[f64], sine: bool) -> Vec<f64> {
        let mut scratch = vec![0.0; self.filon.len()];
        freqs
            .iter()
            .map(|&lam| {
                let mut s = 0.0;
                for p in &self.panels {
                    if p.oscillatory {
                        if sine {
                            s += self.filon.oscillatory(&p.odd_coeffs, p.c, p.h, lam, &mut scratch).im;
                        } else {
                            s += self.filon.oscillatory(&p.even_coeffs, p.c, p.h, lam, &mut scratch).re;
                        }
                    } else if sine {
                        for i in 0..p.ys.len() {
                            s += (p.wp[i] - p.wm[i]) * (lam * p.ys[i]).sin();
                        }
                    } else {
                        for i in 0..p.ys.len() {
                            s += (p.wp[i] + p.wm[i]) * (lam * p.ys[i]).cos();
                        }
                    }
                }
                s
            })
            .collect()
    }
}

fn resolve_breaks(breaks: &[f64], scale: f64, radius: f64) -> Vec<f64> {
    let mut out = vec![breaks[0]];
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a < radius && b - a > scale {
            let pieces = ((b.min(radius) - a) / scale).ceil().max(1.0) as usize;
            let step = (b.min(radius) - a) / pieces as f64;
            for i in 1..pieces {
                out.push(a + step * i as f64);
            }
            if b > radius && b.min(radius) > a {
                out.push(radius);
            }
        }
        out.push(b);
    }
    out.dedup();
    out
}

/// ∂_t^m applied to a semigroup at several times at once, reusing nothing
/// but the evaluator; convenience for sweeps.
pub fn semigroup_profile(ke: &KernelEvaluator, f: &FunctionHandle, m: usize, times: &[f64], x: &[f64], tol: f64) -> Result<Vec<f64>> {
    times.iter().map(|&t| ke.apply_semigroup(f, m, t, x, tol)).collect()
}
