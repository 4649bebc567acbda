//! Panel-based Gauss-Legendre quadrature for the spectral window.
//!
//! The integrands are smooth except for sharp Lorentzian-like peaks where
//! `Re D(eps) = eps - omega - gamma*eta*sin(a*eps)` vanishes, and they carry
//! oscillations `e^{-i*eps*t}` and `e^{i*k*a*eps}`. The mesh is graded
//! geometrically toward each peak and every panel carries enough nodes for
//! the fastest oscillation present.

use crate::model::{Subspace, SystemParams};
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// Gauss-Legendre nodes/weights on [-1, 1], cached per order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<Mutex<HashMap<usize, (Vec<f64>, Vec<f64>)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&n) {
        return hit.clone();
    }
    assert!(n >= 1);
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-based initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        xs[i] = x;
        ws[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    // ascending node order for a fixed, documented summation order
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).unwrap());
    let out = (
        idx.iter().map(|&i| xs[i]).collect::<Vec<_>>(),
        idx.iter().map(|&i| ws[i]).collect::<Vec<_>>(),
    );
    cache.lock().unwrap().insert(n, out.clone());
    out
}

/// Controls for the spectral quadrature.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    /// Window half-width in multiples of W = 2*gamma + Gamma.
    pub kappa: f64,
    /// Minimum Gauss nodes per panel.
    pub base_nodes: usize,
    /// Mesh refinement level: level r splits every panel 2^r times and adds
    /// nodes, used for convergence checks.
    pub refine: u32,
    /// Verify results against a once-refined mesh and fail on disagreement.
    pub check_convergence: bool,
    /// Tolerance for the convergence check (on amplitudes).
    pub tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            kappa: 25.0,
            base_nodes: 12,
            refine: 0,
            check_convergence: true,
            tol: 1e-6,
        }
    }
}

impl QuadratureSpec {
    pub fn refined(&self) -> Self {
        Self {
            refine: self.refine + 1,
            check_convergence: false,
            ..*self
        }
    }

    pub fn window_half_width(&self, params: &SystemParams) -> f64 {
        self.kappa * params.total_rate()
    }
}

/// Locations inside the window where `Re D` vanishes (peaks of the spectral
/// density); all lie within `|eps - omega| <= gamma`.
pub fn density_peaks(params: &SystemParams, subspace: Subspace) -> Vec<f64> {
    let a = params.retardation();
    let gamma = params.gamma_wg;
    let eta = subspace.eta();
    let g = |eps: f64| (eps - params.omega) - gamma * eta * (a * eps).sin();
    let lo = params.omega - 1.000001 * gamma;
    let hi = params.omega + 1.000001 * gamma;
    let step = (gamma.min(std::f64::consts::PI / a)) / 50.0;
    let n_steps = ((hi - lo) / step).ceil() as usize;
    let mut roots = Vec::new();
    let mut x0 = lo;
    let mut f0 = g(x0);
    for i in 1..=n_steps {
        let x1 = lo + (hi - lo) * i as f64 / n_steps as f64;
        let f1 = g(x1);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0 * f1 < 0.0 {
            let (mut xa, mut xb) = (x0, x1);
            let (mut fa, _) = (f0, f1);
            for _ in 0..80 {
                let xm = 0.5 * (xa + xb);
                let fm = g(xm);
                if fa * fm <= 0.0 {
                    xb = xm;
                } else {
                    xa = xm;
                    fa = fm;
                }
            }
            roots.push(0.5 * (xa + xb));
        }
        x0 = x1;
        f0 = f1;
    }
    roots
}

fn im_denominator(params: &SystemParams, subspace: Subspace, eps: f64) -> f64 {
    params.gamma_res / 2.0
        + params.gamma_wg * (1.0 + subspace.eta() * (params.retardation() * eps).cos())
}

/// Build the full node/weight list for one subspace. `freq` is the largest
/// oscillation rate `|t'|` the nodes must resolve (the builder adds the
/// internal `e^{i k a eps}` harmonics itself).
pub fn build_nodes(
    params: &SystemParams,
    subspace: Subspace,
    freq: f64,
    spec: &QuadratureSpec,
) -> Vec<(f64, f64)> {
    let w_rate = params.total_rate();
    let t_half = spec.window_half_width(params);
    let lo = params.omega - t_half;
    let hi = params.omega + t_half;
    let nu = freq + 4.0 * params.retardation();

    // Special points: density peaks plus the qubit frequency itself.
    let mut special = density_peaks(params, subspace);
    special.push(params.omega);

    let mut edges: Vec<f64> = vec![lo, hi];
    for &p in &special {
        if p <= lo || p >= hi {
            continue;
        }
        edges.push(p);
        // geometric grading from the window scale down to a fraction of the
        // local linewidth, so the Lorentzian core and shoulders each get
        // panels no wider than their distance to the peak
        let floor = (im_denominator(params, subspace, p) / 4.0).max(1e-9 * w_rate);
        let mut delta = t_half / 2.0;
        while delta > floor {
            for e in [p - delta, p + delta] {
                if e > lo && e < hi {
                    edges.push(e);
                }
            }
            delta *= 0.5;
        }
        for e in [p - delta, p + delta] {
            if e > lo && e < hi {
                edges.push(e);
            }
        }
    }
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.dedup_by(|a, b| (*a - *b).abs() < 1e-13 * t_half);

    let base = spec.base_nodes + 4 * spec.refine as usize;
    let mut nodes = Vec::new();
    for pair in edges.windows(2) {
        let (mut plo, phi) = (pair[0], pair[1]);
        if phi - plo <= 0.0 {
            continue;
        }
        // refinement pre-split
        let pieces = 1usize << spec.refine;
        let h = (phi - plo) / pieces as f64;
        for _ in 0..pieces {
            emit_panel(plo, plo + h, nu, base, &mut nodes);
            plo += h;
        }
    }
    nodes
}

fn emit_panel(lo: f64, hi: f64, nu: f64, base: usize, out: &mut Vec<(f64, f64)>) {
    let width = hi - lo;
    let need = (0.5 * width * nu).ceil() as usize + base;
    // keep the oscillation phase per panel small enough that Gauss error is
    // far below 1e-8, not merely converging
    if need > base + 12 {
        let mid = 0.5 * (lo + hi);
        emit_panel(lo, mid, nu, base, out);
        emit_panel(mid, hi, nu, base, out);
        return;
    }
    let (xs, ws) = gauss_legendre(need);
    let c = 0.5 * (lo + hi);
    let h = 0.5 * width;
    for i in 0..need {
        out.push((c + h * xs[i], h * ws[i]));
    }
}
