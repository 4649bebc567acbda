//! Photon field reconstruction: waveguide and reservoir wavefunctions at a
//! fixed time, the position probability density, and the probability budget.
//!
//! Each eigenstate's photon wavefunction is a piecewise plane wave, so the
//! field at `(x, t)` is a spectral integral of
//! `coef_region(eps) * conj(alpha(eps)) * e^{-i eps (t - x/v)}` summed over
//! branches. As with the qubit amplitudes, a finite window is integrated by
//! panels and the tails analytically.

use crate::eigen_lossless::localized_state;
use crate::model::{Subspace, SystemParams};
use crate::spectral::evolve::{evolve_qubit_amplitudes, InitialState, SpectralError};
use crate::spectral::quad::{build_nodes, gauss_legendre, QuadratureSpec};
use crate::spectral::series::{AsymSeries, HarmonicPoly, TailRule};
use crate::C64;
use rayon::prelude::*;

/// Tail expansion order for field amplitudes (leading term is 1/u).
const FIELD_TAIL_ORDER: usize = 5;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Spectral sums for one subspace, frozen over nodes; evaluates the
/// even/odd photon amplitudes phi_j(x,t) and reservoir psi_j(z,t).
pub struct FieldKernel {
    subspace: Subspace,
    omega: f64,
    v: f64,
    half_d: f64,
    nodes: Vec<(f64, f64)>,
    // region coefficient * conj(alpha), summed over branches, / (2 pi v)
    p_before: Vec<C64>,
    p_inside: Vec<C64>,
    p_after: Vec<C64>,
    p_res_in: Vec<C64>,
    p_res_out: Vec<C64>,
    tail_before: TailRule,
    tail_inside: TailRule,
    tail_after: TailRule,
    tail_res_in: TailRule,
    tail_res_out: TailRule,
    // localized-state contribution inside the cavity: alpha_loc * t0_loc
    localized: Option<C64>,
}

struct RegionSeries {
    before: AsymSeries,
    inside: AsymSeries,
    after: AsymSeries,
    res_in: AsymSeries,
    res_out: AsymSeries,
}

fn region_series(params: &SystemParams, subspace: Subspace) -> RegionSeries {
    let ord = FIELD_TAIL_ORDER;
    let eta = subspace.eta();
    let i = C64::i();
    let gamma = params.gamma_wg;
    let big_gamma = params.gamma_res;
    let cv = params.coupling_v();
    let ck = params.coupling_k();
    let z = crate::spectral::evolve::z_poly(params, subspace);
    let inv_d = AsymSeries::inv_u_plus(&z, ord);
    let inv_dc = AsymSeries::inv_u_plus(&z.conj(), ord);

    // s = e^{-i a eps/2} + eta e^{i a eps/2} and its conjugate
    let s = HarmonicPoly::from_terms(&[(-1, C64::new(1.0, 0.0)), (1, C64::new(eta, 0.0))]);
    let sbar = s.conj();
    let one = HarmonicPoly::constant(C64::new(1.0, 0.0));

    let conj_alpha_s = inv_dc.mul_poly(&sbar, ord).scale(C64::new(cv, 0.0));
    let conj_alpha_q = inv_dc.scale(C64::new(ck, 0.0));

    // t0_S = 1 + (i Gamma/2 - z) invD
    let t0_s = AsymSeries::constant(one.clone(), ord).add(
        &inv_d.mul_poly(
            &HarmonicPoly::from_terms(&[(0, -i * gamma), (2, -i * gamma * eta)]),
            ord,
        ),
    );
    // t1_S = 1 + (-2 i gamma - i gamma eta (e^{ia eps} + e^{-ia eps})) invD
    let t1_s = AsymSeries::constant(one.clone(), ord).add(
        &inv_d.mul_poly(
            &HarmonicPoly::from_terms(&[
                (0, -2.0 * i * gamma),
                (2, -i * gamma * eta),
                (-2, -i * gamma * eta),
            ]),
            ord,
        ),
    );
    let root = (gamma * big_gamma).sqrt();
    let t0_q = inv_d.mul_poly(
        &HarmonicPoly::from_terms(&[(1, -i * root)]),
        ord,
    );
    let t1_q = inv_d.mul_poly(
        &HarmonicPoly::from_terms(&[(1, -i * root), (-1, -i * root * eta)]),
        ord,
    );
    // b_S = -i (K/v) alpha_S = -i (K V / v) s invD
    let b_s = inv_d.mul_poly(&s, ord).scale(-i * ck * cv / params.v());
    // b_Q = 1 - i Gamma invD
    let b_q = AsymSeries::constant(one, ord).add(&inv_d.scale(-i * big_gamma));

    let norm = C64::new(1.0 / (TWO_PI * params.v_g), 0.0);
    RegionSeries {
        before: conj_alpha_s.scale(norm),
        inside: t0_s
            .mul(&conj_alpha_s, ord)
            .add(&t0_q.mul(&conj_alpha_q, ord))
            .scale(norm),
        after: t1_s
            .mul(&conj_alpha_s, ord)
            .add(&t1_q.mul(&conj_alpha_q, ord))
            .scale(norm),
        res_in: conj_alpha_q.scale(norm),
        res_out: b_s
            .mul(&conj_alpha_s, ord)
            .add(&b_q.mul(&conj_alpha_q, ord))
            .scale(norm),
    }
}

impl FieldKernel {
    pub fn build(
        params: &SystemParams,
        subspace: Subspace,
        freq: f64,
        spec: &QuadratureSpec,
    ) -> Self {
        let nodes = build_nodes(params, subspace, freq, spec);
        let n = nodes.len();
        let mut p_before = Vec::with_capacity(n);
        let mut p_inside = Vec::with_capacity(n);
        let mut p_after = Vec::with_capacity(n);
        let mut p_res_in = Vec::with_capacity(n);
        let mut p_res_out = Vec::with_capacity(n);
        let norm = 1.0 / (TWO_PI * params.v_g);
        let lossless = params.is_lossless();
        for &(eps, _) in &nodes {
            let s = if lossless {
                // away from the pole this matches the Gamma -> 0 limit; the
                // node layout never places a node exactly on the pole
                crate::eigen_lossless::scattering_coeffs(params, subspace, eps)
                    .expect("nodes avoid the localized pole")
            } else {
                crate::eigen_lossy::scattering_coeffs(params, subspace, eps)
            };
            let ca_s = s.alpha.conj();
            if lossless {
                p_before.push(ca_s * norm);
                p_inside.push(s.t0 * ca_s * norm);
                p_after.push(s.t1 * ca_s * norm);
                p_res_in.push(C64::new(0.0, 0.0));
                p_res_out.push(C64::new(0.0, 0.0));
            } else {
                let q = crate::eigen_lossy::quasi_localized_coeffs(params, subspace, eps);
                let ca_q = q.alpha.conj();
                p_before.push(ca_s * norm);
                p_inside.push((s.t0 * ca_s + q.t0 * ca_q) * norm);
                p_after.push((s.t1 * ca_s + q.t1 * ca_q) * norm);
                p_res_in.push(ca_q * norm);
                p_res_out.push((s.res_out * ca_s + q.res_out * ca_q) * norm);
            }
        }
        let series = region_series(params, subspace);
        let t_cut = spec.window_half_width(params);
        let a = params.retardation();
        let rule = |s: AsymSeries| TailRule {
            t_cut,
            a,
            omega0: params.omega,
            series: s,
        };
        let localized = if params.is_lossless() {
            localized_state(params)
                .filter(|loc| loc.subspace == subspace)
                .map(|loc| loc.alpha * loc.t0)
        } else {
            // with losses the former localized state broadens into the
            // quasi-localized resonance already inside the continuum
            None
        };
        FieldKernel {
            subspace,
            omega: params.omega,
            v: params.v_g,
            half_d: params.d / 2.0,
            nodes,
            p_before,
            p_inside,
            p_after,
            p_res_in,
            p_res_out,
            tail_before: rule(series.before),
            tail_inside: rule(series.inside),
            tail_after: rule(series.after),
            tail_res_in: rule(series.res_in),
            tail_res_out: rule(series.res_out),
            localized,
        }
    }

    pub fn subspace(&self) -> Subspace {
        self.subspace
    }

    fn spectral_sum(&self, coeffs: &[C64], tail: &TailRule, t_prime: f64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (&(eps, w), &p) in self.nodes.iter().zip(coeffs) {
            acc += p * w * C64::new(0.0, -eps * t_prime).exp();
        }
        acc + tail.eval(t_prime)
    }

    /// Even/odd waveguide amplitude phi_j(x, t) (projection factor included
    /// by the caller).
    pub fn phi(&self, x: f64, t: f64) -> C64 {
        let t_prime = t - x / self.v;
        let (coeffs, tail) = if x < -self.half_d {
            (&self.p_before, &self.tail_before)
        } else if x < self.half_d {
            (&self.p_inside, &self.tail_inside)
        } else {
            (&self.p_after, &self.tail_after)
        };
        let mut out = self.spectral_sum(coeffs, tail, t_prime);
        if x.abs() < self.half_d {
            if let Some(loc) = self.localized {
                out += loc * C64::new(0.0, self.omega * (x / self.v - t)).exp();
            }
        }
        out
    }

    /// Even/odd reservoir amplitude psi_j(z, t).
    pub fn psi(&self, z: f64, t: f64) -> C64 {
        let t_prime = t - z / self.v;
        if z < 0.0 {
            self.spectral_sum(&self.p_res_in, &self.tail_res_in, t_prime)
        } else {
            self.spectral_sum(&self.p_res_out, &self.tail_res_out, t_prime)
        }
    }
}

/// Photon density snapshot plus the integrated probability budget.
#[derive(Debug, Clone)]
pub struct FieldSnapshot {
    pub t: f64,
    pub x: Vec<f64>,
    /// |phi_R|^2 + |phi_L|^2 on the x grid.
    pub density: Vec<f64>,
    pub rho_pp: f64,
    pub rho_mm: f64,
    /// Waveguide probability integrated over the light cone.
    pub waveguide_prob: f64,
    /// Reservoir probability integrated over z > 0.
    pub reservoir_prob: f64,
}

impl FieldSnapshot {
    pub fn qubit_prob(&self) -> f64 {
        self.rho_pp + self.rho_mm
    }
}

/// Total probability in a snapshot; 1 for exact evolution.
pub fn total_probability(snapshot: &FieldSnapshot) -> f64 {
    snapshot.qubit_prob() + snapshot.waveguide_prob + snapshot.reservoir_prob
}

/// Physical right/left-mover amplitudes from the even/odd kernels.
pub struct PhysicalField<'a> {
    kernels: &'a [FieldKernel; 2],
    p_e: C64,
    p_o: C64,
    t: f64,
}

impl<'a> PhysicalField<'a> {
    pub fn new(kernels: &'a [FieldKernel; 2], init: &InitialState, t: f64) -> Self {
        Self {
            kernels,
            p_e: init.projection(Subspace::Even),
            p_o: init.projection(Subspace::Odd),
            t,
        }
    }

    pub fn phi_right(&self, x: f64) -> C64 {
        (self.p_e * self.kernels[0].phi(x, self.t) + self.p_o * self.kernels[1].phi(x, self.t))
            / 2.0f64.sqrt()
    }

    pub fn phi_left(&self, x: f64) -> C64 {
        (self.p_e * self.kernels[0].phi(-x, self.t) - self.p_o * self.kernels[1].phi(-x, self.t))
            / 2.0f64.sqrt()
    }

    pub fn density(&self, x: f64) -> f64 {
        self.phi_right(x).norm_sqr() + self.phi_left(x).norm_sqr()
    }

    /// |psi_1|^2 + |psi_2|^2 at reservoir coordinate z.
    pub fn reservoir_density(&self, z: f64) -> f64 {
        let pe = self.p_e * self.kernels[0].psi(z, self.t);
        let po = self.p_o * self.kernels[1].psi(z, self.t);
        pe.norm_sqr() + po.norm_sqr()
    }
}

/// Integrate a smooth-by-panels function with Gauss nodes; breakpoints mark
/// wavefronts where the integrand is only piecewise smooth.
fn panel_integral(
    lo: f64,
    hi: f64,
    breaks: &[f64],
    nu: f64,
    f: impl Fn(f64) -> f64 + Sync,
) -> f64 {
    let mut edges: Vec<f64> = vec![lo, hi];
    edges.extend(breaks.iter().copied().filter(|&b| b > lo && b < hi));
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * (hi - lo));
    let mut panels = Vec::new();
    for pair in edges.windows(2) {
        collect_panels(pair[0], pair[1], nu, &mut panels);
    }
    let contributions: Vec<f64> = panels
        .par_iter()
        .map(|&(plo, phi)| {
            let n = ((0.5 * (phi - plo) * nu).ceil() as usize + 10).min(22);
            let (xs, ws) = gauss_legendre(n);
            let c = 0.5 * (plo + phi);
            let h = 0.5 * (phi - plo);
            (0..n).map(|i| h * ws[i] * f(c + h * xs[i])).sum()
        })
        .collect();
    contributions.iter().sum()
}

fn collect_panels(lo: f64, hi: f64, nu: f64, out: &mut Vec<(f64, f64)>) {
    let need = (0.5 * (hi - lo) * nu).ceil() as usize + 10;
    // at most ~24 radians of oscillation per 22-node panel
    if need > 22 {
        let mid = 0.5 * (lo + hi);
        collect_panels(lo, mid, nu, out);
        collect_panels(mid, hi, nu, out);
    } else {
        out.push((lo, hi));
    }
}

/// Full field snapshot at time `t` on the given x grid (grid in raw length
/// units). Probabilities are integrated on internal light-cone grids,
/// independent of the display grid.
pub fn field_snapshot(
    params: &SystemParams,
    init: &InitialState,
    t: f64,
    xgrid: &[f64],
    spec: &QuadratureSpec,
) -> Result<FieldSnapshot, SpectralError> {
    let v = params.v_g;
    let half_d = params.d / 2.0;
    let reach = xgrid
        .iter()
        .fold(half_d + v * t, |m, &x| m.max(x.abs()))
        + 2.0 / spec.window_half_width(params).max(1e-300) * v;
    let freq = t + reach / v;
    let kernels = [
        FieldKernel::build(params, Subspace::Even, freq, spec),
        FieldKernel::build(params, Subspace::Odd, freq, spec),
    ];
    let field = PhysicalField::new(&kernels, init, t);

    let density: Vec<f64> = xgrid.par_iter().map(|&x| field.density(x)).collect();

    // qubit populations at the same time
    let (c_e, c_o) = evolve_qubit_amplitudes(params, init, &[t], spec)?;
    let (rho_pp, rho_mm) = (c_e[0].norm_sqr(), c_o[0].norm_sqr());

    // probability integrals over the light cone; fronts at +-d/2 +- v t
    let pad = 2.0 / spec.window_half_width(params) * v;
    let cone = half_d + v * t + pad;
    let fronts = [
        -half_d - v * t,
        -half_d + v * t,
        half_d - v * t,
        half_d + v * t,
        -half_d,
        half_d,
    ];
    let nu_x = 2.0 * spec.window_half_width(params) / v;
    let waveguide_prob = panel_integral(-cone, cone, &fronts, nu_x, |x| field.density(x));
    let reservoir_prob = if params.is_lossless() {
        0.0
    } else {
        panel_integral(0.0, v * t + pad, &[v * t], nu_x, |z| {
            field.reservoir_density(z)
        })
    };

    Ok(FieldSnapshot {
        t,
        x: xgrid.to_vec(),
        density,
        rho_pp,
        rho_mm,
        waveguide_prob,
        reservoir_prob,
    })
}

/// Evenly spaced x grid covering the light cone at time `t`.
pub fn default_xgrid(params: &SystemParams, t: f64, n: usize) -> Vec<f64> {
    let reach = params.d / 2.0 + params.v_g * t * 1.05;
    (0..n)
        .map(|i| -reach + 2.0 * reach * i as f64 / (n - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(gamma: f64, ratio: f64, dl: f64) -> SystemParams {
        SystemParams::from_paper_units(gamma, ratio, dl).unwrap()
    }

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn no_photon_at_time_zero() {
        let p = params(0.01, 0.1, 1.0);
        let grid = default_xgrid(&p, 20.0, 41);
        let snap = field_snapshot(&p, &InitialState::qubit_one(), 0.0, &grid, &spec()).unwrap();
        for &rho in &snap.density {
            assert!(rho.abs() < 1e-6, "{rho}");
        }
        assert!(snap.waveguide_prob.abs() < 1e-5);
        assert_relative_eq!(snap.qubit_prob(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn causality_outside_light_cone() {
        let p = params(0.05, 0.1, 1.0);
        let t = 10.0;
        let cone = p.d / 2.0 + p.v_g * t;
        let grid: Vec<f64> = vec![-3.0 * cone, -1.5 * cone, 1.4 * cone, 2.5 * cone];
        let snap = field_snapshot(&p, &InitialState::qubit_one(), t, &grid, &spec()).unwrap();
        for &rho in &snap.density {
            assert!(rho.abs() < 1e-6, "{rho}");
        }
        // reservoir causality: psi vanishes for z < 0 and z > v t
        let kernels = [
            FieldKernel::build(&p, Subspace::Even, 2.0 * t, &spec()),
            FieldKernel::build(&p, Subspace::Odd, 2.0 * t, &spec()),
        ];
        let f = PhysicalField::new(&kernels, &InitialState::qubit_one(), t);
        for z in [-5.0, -1.0, p.v_g * t * 1.2] {
            assert!(f.reservoir_density(z) < 1e-6, "z={z}");
        }
    }

    #[test]
    fn norm_conserved_lossless() {
        let p = params(0.05, 0.0, 1.0);
        for t in [3.0, 30.0, 120.0] {
            let snap =
                field_snapshot(&p, &InitialState::qubit_one(), t, &[0.0], &spec()).unwrap();
            let total = total_probability(&snap);
            assert!((total - 1.0).abs() < 1e-4, "t={t}: {total}");
        }
    }

    #[test]
    fn norm_conserved_lossy() {
        let p = params(0.05, 0.1, 1.0);
        for t in [3.0, 40.0] {
            let snap =
                field_snapshot(&p, &InitialState::qubit_one(), t, &[0.0], &spec()).unwrap();
            let total = total_probability(&snap);
            assert!((total - 1.0).abs() < 1e-4, "t={t}: {total}");
            assert!(snap.reservoir_prob > 0.0);
        }
    }

    #[test]
    fn quasi_localized_branch_dark_before_first_qubit() {
        // With a reservoir-fed initial condition the region x < -d/2 gets no
        // amplitude from the quasi-localized branch; for a qubit start this
        // shows up as the exact scattering/quasi split in p_before, which we
        // verify via the reservoir-in region instead: psi(z<0) = 0.
        let p = params(0.1, 0.5, 0.7);
        let kernels = [
            FieldKernel::build(&p, Subspace::Even, 30.0, &spec()),
            FieldKernel::build(&p, Subspace::Odd, 30.0, &spec()),
        ];
        let f = PhysicalField::new(&kernels, &InitialState::qubit_one(), 12.0);
        for z in [-8.0, -2.0, -0.3] {
            assert!(f.reservoir_density(z) < 1e-6, "z={z}");
        }
    }

    #[test]
    fn markovian_pulse_profile() {
        // weak coupling, resonant d: the even state radiates as one
        // collective emitter, so the outgoing density is a single smooth
        // exponential e^{-(4 gamma + Gamma)(t - x/v)} outside the cavity.
        let p = params(1e-3, 0.1, 1.0);
        let t = 3.0 / (2.0 * p.gamma_wg + p.gamma_res);
        let grid: Vec<f64> = (1..=8)
            .map(|i| p.d / 2.0 + (p.v_g * t - p.d) * i as f64 / 9.0)
            .collect();
        let snap = field_snapshot(&p, &InitialState::qubit_one(), t, &grid, &spec()).unwrap();
        let w = 4.0 * p.gamma_wg + p.gamma_res;
        // fit: density(x) ~ C e^{x w / v}; check log-slope within 2%
        let mut slopes = Vec::new();
        for i in 1..grid.len() {
            let s = (snap.density[i] / snap.density[i - 1]).ln() / (grid[i] - grid[i - 1]);
            slopes.push(s);
        }
        for &s in &slopes {
            assert!(
                ((s - w / p.v_g) / (w / p.v_g)).abs() < 0.02,
                "slope {s} vs {}",
                w / p.v_g
            );
        }
    }
}
