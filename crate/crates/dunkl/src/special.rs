//! Scaled confluent hypergeometric functions and truncated Taylor jets.

use statrs::function::gamma::ln_gamma;

/// F(a,b)(r) = e^{-r} M(a; b; r) for r ≥ 0, b > 0, a ≥ 0.
///
/// All series terms are positive, so there is no cancellation; large r uses
/// the algebraic asymptotic expansion when it converges to full precision.
pub fn kummer_scaled(a: f64, b: f64, r: f64) -> f64 {
    Kummer::new(a, b).eval(r)
}

/// F(a,b) with its Gamma-function constants computed once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kummer {
    pub a: f64,
    pub b: f64,
    lg_a: f64,
    lg_b: f64,
    lg_bma: f64,
}

impl Kummer {
    pub fn new(a: f64, b: f64) -> Self {
        let lg = |v: f64| if v > 0.0 { ln_gamma(v) } else { f64::INFINITY };
        Self { a, b, lg_a: lg(a), lg_b: lg(b), lg_bma: lg(b - a) }
    }

    pub fn eval(&self, r: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        debug_assert!(r >= 0.0 && b > 0.0);
        if a == 0.0 {
            return (-r).exp();
        }
        if a == b {
            return 1.0;
        }
        if r > 25.0 {
            if let Some(v) = self.asymptotic(r) {
                return v;
            }
        }
        kummer_scaled_series(a, b, r)
    }

    fn asymptotic(&self, r: f64) -> Option<f64> {
        let (a, b) = (self.a, self.b);
        // Γ(b)/Γ(a) r^{a-b} Σ_j (b-a)_j (1-a)_j / (j! r^j); the dropped piece
        // Γ(b)/Γ(b-a) e^{-r} r^{-a} must be negligible relative to it
        let lr = r.ln();
        let rel = self.lg_a - self.lg_bma - r + (b - 2.0 * a) * lr;
        if rel > -40.0 {
            return None;
        }
        let mut term = 1.0f64;
        let mut sum = 1.0f64;
        let mut prev = f64::INFINITY;
        for j in 0..400 {
            let jf = j as f64;
            term *= (b - a + jf) * (1.0 - a + jf) / ((jf + 1.0) * r);
            if term == 0.0 {
                break;
            }
            if term.abs() > prev {
                return None;
            }
            sum += term;
            prev = term.abs();
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        Some((self.lg_b - self.lg_a + (a - b) * lr).exp() * sum)
    }
}

fn kummer_scaled_series(a: f64, b: f64, r: f64) -> f64 {
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut log_scale = 0.0f64;
    let mut n = 0.0f64;
    loop {
        term *= (a + n) * r / ((b + n) * (n + 1.0));
        sum += term;
        n += 1.0;
        if sum > 1e280 {
            sum *= 1e-280;
            term *= 1e-280;
            log_scale += 280.0 * std::f64::consts::LN_10;
        }
        if term <= 1e-17 * sum && n > r {
            break;
        }
        if n > 1e6 {
            break;
        }
    }
    (sum.ln() + log_scale - r).exp()
}

/// d^i/dr^i F(a,b)(r) = (-1)^i (b-a)_i/(b)_i F(a, b+i)(r), for i = 0..out.len().
pub fn kummer_scaled_derivs(a: f64, b: f64, r: f64, out: &mut [f64]) {
    KummerFamily::new(a, b, out.len()).derivs(r, out);
}

/// F(a, b+i) for i = 0..len with the derivative coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct KummerFamily {
    members: Vec<Kummer>,
    coef: Vec<f64>,
}

impl KummerFamily {
    pub fn new(a: f64, b: f64, len: usize) -> Self {
        let mut coef = Vec::with_capacity(len);
        let mut c = 1.0;
        for i in 0..len {
            let fi = i as f64;
            if i > 0 {
                c *= -(b - a + fi - 1.0) / (b + fi - 1.0);
            }
            coef.push(c);
        }
        Self { members: (0..len).map(|i| Kummer::new(a, b + i as f64)).collect(), coef }
    }

    /// out[i] = d^i/dr^i F(a,b)(r).
    pub fn derivs(&self, r: f64, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let c = self.coef[i];
            *o = if c == 0.0 { 0.0 } else { c * self.members[i].eval(r) };
        }
    }
}

/// Maximum jet length (orders 0..MAXJ-1).
pub const MAXJ: usize = 14;

/// Truncated Taylor series c_0 + c_1 τ + … + c_n τ^n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub c: [f64; MAXJ],
    pub n: usize,
}

impl Jet {
    pub fn zero(n: usize) -> Self {
        assert!(n < MAXJ);
        Self { c: [0.0; MAXJ], n }
    }

    pub fn constant(v: f64, n: usize) -> Self {
        let mut j = Self::zero(n);
        j.c[0] = v;
        j
    }

    /// Jet of τ ↦ x0 + τ.
    pub fn var(x0: f64, n: usize) -> Self {
        let mut j = Self::constant(x0, n);
        if n >= 1 {
            j.c[1] = 1.0;
        }
        j
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        let n = self.n.min(o.n);
        let mut r = Jet::zero(n);
        for i in 0..=n {
            let mut s = 0.0;
            for j in 0..=i {
                s += self.c[j] * o.c[i - j];
            }
            r.c[i] = s;
        }
        r
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut r = *self;
        r.c.iter_mut().take(self.n + 1).for_each(|v| *v *= s);
        r
    }

    pub fn add_assign_scaled(&mut self, o: &Jet, s: f64) {
        for i in 0..=self.n.min(o.n) {
            self.c[i] += s * o.c[i];
        }
    }

    pub fn exp(&self) -> Jet {
        let mut r = Jet::zero(self.n);
        r.c[0] = self.c[0].exp();
        for k in 1..=self.n {
            let mut s = 0.0;
            for j in 1..=k {
                s += j as f64 * self.c[j] * r.c[k - j];
            }
            r.c[k] = s / k as f64;
        }
        r
    }

    /// self^alpha, requires c_0 > 0.
    pub fn powf(&self, alpha: f64) -> Jet {
        let mut r = Jet::zero(self.n);
        let q0 = self.c[0];
        r.c[0] = q0.powf(alpha);
        for k in 1..=self.n {
            let mut s = 0.0;
            for j in 1..=k {
                s += (alpha * j as f64 - (k - j) as f64) * self.c[j] * r.c[k - j];
            }
            r.c[k] = s / (k as f64 * q0);
        }
        r
    }

    /// Compose g(self) given g^{(i)}(c_0) for i = 0..=n.
    pub fn compose(&self, derivs: &[f64]) -> Jet {
        let n = self.n;
        let mut delta = *self;
        delta.c[0] = 0.0;
        let mut r = Jet::constant(derivs[0], n);
        let mut pw = Jet::constant(1.0, n);
        let mut fact = 1.0;
        for (i, d) in derivs.iter().enumerate().take(n + 1).skip(1) {
            pw = pw.mul(&delta);
            fact *= i as f64;
            r.add_assign_scaled(&pw, d / fact);
        }
        r
    }

    /// i-th derivative at τ = 0.
    pub fn deriv(&self, i: usize) -> f64 {
        self.c[i] * factorial(i)
    }
}

pub fn factorial(i: usize) -> f64 {
    (1..=i).fold(1.0, |a, b| a * b as f64)
}

/// Pochhammer (a)_n.
pub fn rising(a: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |p, j| p * (a + j as f64))
}

/// Jet in τ of t(t² + q)^{-p} at t = t0 + τ; the radial Poisson profile shape.
pub fn cauchy_profile_jet(t0: f64, q: f64, p: f64, n: usize) -> Jet {
    let mut base = Jet::zero(n);
    base.c[0] = t0 * t0 + q;
    if n >= 1 {
        base.c[1] = 2.0 * t0;
    }
    if n >= 2 {
        base.c[2] = 1.0;
    }
    let f = base.powf(-p);
    let mut r = Jet::zero(n);
    for i in 0..=n {
        r.c[i] = t0 * f.c[i] + if i > 0 { f.c[i - 1] } else { 0.0 };
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kummer_a_eq_b_minus_one() {
        // M(1;2;r) = (e^r - 1)/r
        for &r in &[0.5, 10.0, 30.0, 90.0] {
            let want = (1.0 - (-r as f64).exp()) / r;
            let got = kummer_scaled(1.0, 2.0, r);
            assert!((got - want).abs() < 1e-14 * want, "{r}: {got} {want}");
        }
    }

    #[test]
    fn powf_jet_matches_closed_form() {
        // (1+τ)^{-1/2} coefficients
        let j = Jet::var(1.0, 4).powf(-0.5);
        let want = [1.0, -0.5, 0.375, -0.3125, 0.2734375];
        for i in 0..5 {
            assert!((j.c[i] - want[i]).abs() < 1e-15);
        }
    }
}
