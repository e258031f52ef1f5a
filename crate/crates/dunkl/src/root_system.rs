//! Product root systems Z₂^N: roots ±√2 e_j, reflections are sign flips.

use std::f64::consts::{LN_2, SQRT_2};

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{DunklError, Result};
use crate::quadrature::{adaptive_integrate, gauss_jacobi, Interval};

#[derive(Debug, Clone, PartialEq)]
pub struct Root {
    pub vector: Vec<f64>,
    /// coordinate axis of ±√2 e_j
    pub axis: usize,
    pub multiplicity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootSystem {
    dimension: usize,
    k: Vec<f64>,
    roots: Vec<Root>,
    homogeneous_dimension: f64,
    c_k: f64,
}

/// Config block `{ "group": "z2^N", "N": int, "k": [floats] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootSystemSpec {
    pub group: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub k: Vec<f64>,
}

/// ∫ e^{-s²/2} |√2 s|^{2k} ds = 2^{2k+1/2} Γ(k+1/2)
pub fn c_k_factor(k: f64) -> f64 {
    ((2.0 * k + 0.5) * LN_2 + ln_gamma(k + 0.5)).exp()
}

pub fn make_product_z2(n: usize, k: &[f64]) -> Result<RootSystem> {
    if n == 0 {
        return Err(DunklError::Parameter("dimension must be positive".into()));
    }
    if k.len() != n {
        return Err(DunklError::Parameter(format!("expected {n} multiplicities, got {}", k.len())));
    }
    if let Some(bad) = k.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(DunklError::Parameter(format!("multiplicity {bad} must be a finite non-negative number")));
    }
    let mut roots = Vec::with_capacity(2 * n);
    for (j, &kj) in k.iter().enumerate() {
        for s in [1.0, -1.0] {
            let mut v = vec![0.0; n];
            v[j] = s * SQRT_2;
            roots.push(Root { vector: v, axis: j, multiplicity: kj });
        }
    }
    let homogeneous_dimension = n as f64 + roots.iter().map(|r| r.multiplicity).sum::<f64>();
    let c_k = k.iter().map(|&kj| c_k_factor(kj)).product();
    Ok(RootSystem { dimension: n, k: k.to_vec(), roots, homogeneous_dimension, c_k })
}

impl RootSystem {
    pub fn from_spec(spec: &RootSystemSpec) -> Result<Self> {
        let g = spec.group.to_ascii_lowercase();
        if g != "z2^n" && g != format!("z2^{}", spec.n) {
            return Err(DunklError::Parameter(format!(
                "only product Z2^N groups are constructible (got '{}')",
                spec.group
            )));
        }
        make_product_z2(spec.n, &spec.k)
    }

    pub fn spec(&self) -> RootSystemSpec {
        RootSystemSpec { group: "z2^N".into(), n: self.dimension, k: self.k.clone() }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn k(&self) -> &[f64] {
        &self.k
    }

    pub fn roots(&self) -> &[Root] {
        &self.roots
    }

    pub fn homogeneous_dimension(&self) -> f64 {
        self.homogeneous_dimension
    }

    pub fn c_k(&self) -> f64 {
        self.c_k
    }

    pub fn is_classical(&self) -> bool {
        self.k.iter().all(|&v| v == 0.0)
    }

    pub fn reflect(&self, root: &Root, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        y[root.axis] = -y[root.axis];
        y
    }

    /// Root-generic form σ_α(x) = x − 2⟨x,α⟩/‖α‖² α.
    pub fn reflect_general(alpha: &[f64], x: &[f64]) -> Vec<f64> {
        let dot: f64 = alpha.iter().zip(x).map(|(a, b)| a * b).sum();
        let nn: f64 = alpha.iter().map(|a| a * a).sum();
        x.iter().zip(alpha).map(|(xi, ai)| xi - 2.0 * dot / nn * ai).collect()
    }

    pub fn weight(&self, x: &[f64]) -> f64 {
        self.roots
            .iter()
            .map(|r| {
                if r.multiplicity == 0.0 {
                    1.0
                } else {
                    (SQRT_2 * x[r.axis]).abs().powf(r.multiplicity)
                }
            })
            .product()
    }

    /// Weight of coordinate j alone: 2^{k_j} |x_j|^{2k_j}.
    pub fn weight_1d(&self, j: usize, s: f64) -> f64 {
        let k = self.k[j];
        if k == 0.0 {
            1.0
        } else {
            (2.0 * s * s).powf(k)
        }
    }

    /// min over sign patterns of ‖σ(x) − y‖; separable for Z₂^N.
    pub fn orbit_distance(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter().zip(y).map(|(a, b)| (a.abs() - b.abs()).powi(2)).sum::<f64>().sqrt()
    }

    /// All 2^N group elements applied to x (for checks on small N).
    pub fn orbit(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let n = self.dimension;
        (0..(1usize << n))
            .map(|mask| x.iter().enumerate().map(|(j, v)| if mask >> j & 1 == 1 { -v } else { *v }).collect())
            .collect()
    }

    /// w(B(x, r)) by nested quadrature, relative accuracy `tol`.
    pub fn ball_volume(&self, x: &[f64], r: f64, tol: f64) -> Result<f64> {
        if !(r > 0.0) || !(tol > 0.0) {
            return Err(DunklError::Parameter("ball_volume needs r > 0 and tol > 0".into()));
        }
        let scale = r.powi(self.dimension as i32) * self.ball_envelope(x, r);
        self.ball_rec(x, 0, r * r, tol * scale)
            .map_err(|e| match e {
                DunklError::Quadrature { value, estimate } => DunklError::Quadrature { value, estimate },
                other => other,
            })
            .and_then(|v| {
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(DunklError::Quadrature { value: v, estimate: f64::NAN })
                }
            })
    }

    // ∫ over coordinate j of the slice with remaining squared radius rho2
    fn ball_rec(&self, x: &[f64], j: usize, rho2: f64, tol: f64) -> Result<f64> {
        let n = self.dimension;
        if rho2 <= 0.0 {
            return Ok(0.0);
        }
        let rho = rho2.sqrt();
        let (a, b) = (x[j] - rho, x[j] + rho);
        let k = self.k[j];
        if j + 1 == n {
            return Ok(self.interval_weight(j, a, b));
        }
        // split at 0 where the weight is not smooth
        let mut pieces = vec![a];
        if a < 0.0 && b > 0.0 {
            pieces.push(0.0);
        }
        pieces.push(b);
        let mut total = 0.0;
        let sub_tol = tol / (pieces.len() as f64);
        for w in pieces.windows(2) {
            let e = adaptive_integrate(
                |s| {
                    let rest = rho2 - (s - x[j]).powi(2);
                    let inner = self.ball_rec(x, j + 1, rest, sub_tol * 0.1).unwrap_or(f64::NAN);
                    if k == 0.0 { inner } else { (2.0 * s * s).powf(k) * inner }
                },
                Interval::Finite(w[0], w[1]),
                sub_tol,
            )?;
            total += e.value;
        }
        Ok(total)
    }

    /// ∫_a^b 2^k |s|^{2k} ds in closed form.
    pub fn interval_weight(&self, j: usize, a: f64, b: f64) -> f64 {
        let k = self.k[j];
        let prim = |s: f64| s.signum() * s.abs().powf(2.0 * k + 1.0) / (2.0 * k + 1.0);
        2f64.powf(k) * (prim(b) - prim(a))
    }

    /// ∏_α (|⟨x,α⟩| + r)^{k(α)}, the comparability envelope.
    pub fn ball_envelope(&self, x: &[f64], r: f64) -> f64 {
        self.roots
            .iter()
            .map(|root| (SQRT_2 * x[root.axis].abs() + r).powf(root.multiplicity))
            .product()
    }

    /// c_k from a Gauss–Laguerre moment instead of the Gamma formula.
    pub fn c_k_quadrature(&self) -> f64 {
        self.k
            .iter()
            .map(|&k| {
                // ∫ e^{-s²/2} 2^k |s|^{2k} ds = 2^{k} 2^{k+1/2} ∫_0^∞ u^{k-1/2} e^{-u} du
                let rule = crate::quadrature::gauss_laguerre(k - 0.5, 8).expect("valid laguerre");
                let m = rule.integrate(|_| 1.0);
                2f64.powf(2.0 * k + 0.5) * m
            })
            .product()
    }
}

/// Gauss–Jacobi rule on [0, h] with weight u^alpha, mapped; convenience.
pub fn jacobi_left(n: usize, alpha: f64, h: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let r = gauss_jacobi(n, 0.0, alpha)?;
    let scale = (h / 2.0).powf(alpha + 1.0);
    Ok(r.nodes.iter().zip(&r.weights).map(|(u, w)| (0.5 * h * (1.0 + u), w * scale)).unzip())
}
