//! Analytic tail corrections for the spectral integrals.
//!
//! All integrands here have the form `h(eps) * e^{-i*eps*t'}` where `h` is a
//! rational function of `u = eps - omega` with trigonometric coefficients in
//! `e^{i*k*a*eps}` (`k` half-integer, `a = d/v_g`). Outside a finite window
//! `|u| > T` the integrand is expanded as an asymptotic series in `1/u`; each
//! term reduces to the incomplete oscillatory moment
//! `J_n(T, w) = int_T^inf e^{-i*w*u} u^{-n} du`, which is evaluated exactly
//! through the complex exponential integral E1.

use crate::C64;
use std::collections::BTreeMap;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Exponential integral E1(z) for complex z off the negative real axis.
/// Power series near the origin, modified-Lentz continued fraction outside.
pub fn exp_e1(z: C64) -> C64 {
    assert!(
        !(z.im == 0.0 && z.re <= 0.0),
        "E1 is singular/branch-cut on the negative real axis"
    );
    if z.norm() <= 3.0 {
        // E1(z) = -gamma - ln z + sum_{k>=1} (-1)^{k+1} z^k / (k * k!)
        let mut sum = C64::new(0.0, 0.0);
        let mut term = z; // k = 1 term
        for k in 1..200 {
            sum += term;
            let kf = k as f64;
            // t_{k+1}/t_k = -z * k / (k+1)^2
            term *= -z * kf / ((kf + 1.0) * (kf + 1.0));
            if term.norm() < 1e-18 * (sum.norm() + 1e-300) {
                break;
            }
        }
        -EULER_GAMMA - z.ln() + sum
    } else {
        // Even-contracted continued fraction:
        // E1(z) = e^{-z} / (z + 1 - 1^2/(z + 3 - 2^2/(z + 5 - ...)))
        let tiny = C64::new(1e-300, 0.0);
        let mut f = z + 1.0;
        if f.norm() == 0.0 {
            f = tiny;
        }
        let mut c = f;
        let mut d = C64::new(0.0, 0.0);
        for j in 1..400u32 {
            let a = C64::new(-((j * j) as f64), 0.0);
            let b = z + (2 * j + 1) as f64;
            d = b + a * d;
            if d.norm() == 0.0 {
                d = tiny;
            }
            c = b + a / c;
            if c.norm() == 0.0 {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).norm() < 1e-16 {
                break;
            }
        }
        (-z).exp() / f
    }
}

/// `J_1(T, w) = int_T^inf e^{-i*w*u} / u du` for `w != 0`.
fn j1(t_cut: f64, w: f64) -> C64 {
    if w > 0.0 {
        exp_e1(C64::new(0.0, w * t_cut))
    } else {
        exp_e1(C64::new(0.0, -w * t_cut)).conj()
    }
}

/// Two-sided tail moment `int_{|u|>T} e^{-i*w*u} u^{-n} du`, i.e.
/// `J_n(T,w) + (-1)^n conj(J_n(T,w))`. For `w = 0` and odd `n` the two
/// sides cancel in the principal-value sense.
pub fn paired_moment(n: u32, t_cut: f64, w: f64) -> C64 {
    debug_assert!(n >= 1 && t_cut > 0.0);
    if w == 0.0 {
        if n == 1 || n % 2 == 1 {
            return C64::new(0.0, 0.0);
        }
        let m = (n - 1) as f64;
        return C64::new(2.0 * t_cut.powi(-(n as i32 - 1)) / m, 0.0);
    }
    let mut j = j1(t_cut, w);
    let boundary = C64::new(0.0, -w * t_cut).exp();
    for m in 2..=n {
        let mm = (m - 1) as f64;
        // J_m = e^{-iwT} T^{-(m-1)} / (m-1) - (iw/(m-1)) J_{m-1}
        j = boundary * t_cut.powi(-(m as i32 - 1)) / mm - C64::new(0.0, w / mm) * j;
    }
    if n % 2 == 0 {
        j + j.conj()
    } else {
        j - j.conj()
    }
}

/// Trigonometric polynomial `sum_k c_k e^{i(k/2) a eps}`, keyed by the
/// doubled half-integer harmonic index `k2 = 2k`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HarmonicPoly {
    terms: BTreeMap<i32, C64>,
}

impl HarmonicPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_terms(terms: &[(i32, C64)]) -> Self {
        let mut p = Self::zero();
        for &(k2, c) in terms {
            p.add_term(k2, c);
        }
        p
    }

    pub fn constant(c: C64) -> Self {
        Self::from_terms(&[(0, c)])
    }

    pub fn add_term(&mut self, k2: i32, c: C64) {
        let e = self.terms.entry(k2).or_insert(C64::new(0.0, 0.0));
        *e += c;
        if e.norm() == 0.0 {
            self.terms.remove(&k2);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&k2, &c) in &other.terms {
            out.add_term(k2, c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (&ka, &ca) in &self.terms {
            for (&kb, &cb) in &other.terms {
                out.add_term(ka + kb, ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = Self::zero();
        for (&k2, &v) in &self.terms {
            out.add_term(k2, v * c);
        }
        out
    }

    pub fn conj(&self) -> Self {
        let mut out = Self::zero();
        for (&k2, &v) in &self.terms {
            out.add_term(-k2, v.conj());
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Evaluate at a given `a*eps` phase argument.
    pub fn eval(&self, a_eps: f64) -> C64 {
        self.terms
            .iter()
            .map(|(&k2, &c)| c * C64::new(0.0, 0.5 * k2 as f64 * a_eps).exp())
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, C64)> + '_ {
        self.terms.iter().map(|(&k2, &c)| (k2, c))
    }
}

/// Truncated asymptotic series `sum_n P_n(eps) u^{-n}`; `coeffs[n]` is the
/// harmonic polynomial multiplying `u^{-n}`.
#[derive(Debug, Clone)]
pub struct AsymSeries {
    coeffs: Vec<HarmonicPoly>,
}

impl AsymSeries {
    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![HarmonicPoly::zero(); order + 1],
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn constant(p: HarmonicPoly, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = p;
        s
    }

    /// Series of `1/(u + z)` with `z` a harmonic polynomial:
    /// `sum_m (-1)^m z^m u^{-(m+1)}`.
    pub fn inv_u_plus(z: &HarmonicPoly, order: usize) -> Self {
        let mut s = Self::zero(order);
        let mut zm = HarmonicPoly::constant(C64::new(1.0, 0.0));
        for m in 0..order {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            s.coeffs[m + 1] = zm.scale(C64::new(sign, 0.0));
            zm = zm.mul(z);
        }
        s
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.order().max(other.order());
        let mut out = Self::zero(order);
        for n in 0..=order {
            let mut p = HarmonicPoly::zero();
            if n <= self.order() {
                p = p.add(&self.coeffs[n]);
            }
            if n <= other.order() {
                p = p.add(&other.coeffs[n]);
            }
            out.coeffs[n] = p;
        }
        out
    }

    pub fn mul(&self, other: &Self, order: usize) -> Self {
        let mut out = Self::zero(order);
        for (na, pa) in self.coeffs.iter().enumerate() {
            if pa.is_zero() {
                continue;
            }
            for (nb, pb) in other.coeffs.iter().enumerate() {
                if na + nb > order {
                    break;
                }
                out.coeffs[na + nb] = out.coeffs[na + nb].add(&pa.mul(pb));
            }
        }
        out
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|p| p.scale(c)).collect(),
        }
    }

    pub fn mul_poly(&self, p: &HarmonicPoly, order: usize) -> Self {
        self.mul(&Self::constant(p.clone(), 0), order)
    }

    /// Direct evaluation at a point (for validating the expansion).
    pub fn eval(&self, u: f64, a_eps: f64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for n in (0..=self.order()).rev() {
            acc = acc / u + self.coeffs[n].eval(a_eps);
        }
        acc
    }
}

/// Frozen tail integrator: integrates `series(eps) e^{-i eps t'}` over
/// `|eps - omega0| > t_cut` analytically, term by term.
#[derive(Debug, Clone)]
pub struct TailRule {
    pub t_cut: f64,
    pub a: f64,
    pub omega0: f64,
    pub series: AsymSeries,
}

impl TailRule {
    pub fn eval(&self, t_prime: f64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (n, poly) in self.series.coeffs.iter().enumerate() {
            if n == 0 {
                // A u^0 term would make the tail divergent; the physical
                // integrands never produce one.
                debug_assert!(poly.is_zero());
                continue;
            }
            for (k2, c) in poly.iter() {
                let k = 0.5 * k2 as f64;
                let w = t_prime - k * self.a;
                let phase = C64::new(0.0, k * self.a * self.omega0).exp();
                acc += c * phase * paired_moment(n as u32, self.t_cut, w);
            }
        }
        acc * C64::new(0.0, -self.omega0 * t_prime).exp()
    }
}
