//! Depletion of the ground state by cavity-loss noise.
//!
//! The fluctuation operators obey `dR/dt = M R + ξ` with
//! `ξ = [ξ, ξ†, 0, 0]` and `⟨ξ(t) ξ†(t′)⟩ = 2κ δ(t − t′)` as the only
//! non-zero correlator; the −κa damping is dropped since only the transient
//! matters. Projecting the noise on the normal modes gives
//! `⟨ρ_k(t) ρ_l(t)⟩ ∋ 2κ l₁⁽ᵏ⁾* l₂⁽ˡ⁾* (1 − e^{−i(ω_k+ω_l)t}) / (i(ω_k+ω_l))`,
//! from which three rates follow:
//!
//! * [`rate_normal_modes`]: secular growth of `⟨ρ₊†ρ₊ + ρ₋†ρ₋⟩`;
//! * [`rate_populations`]: growth of `⟨a†a + b†b⟩` coarse-grained over δt,
//!   with `sin x / x` replaced by the step `Θ(δt⁻¹ − |ω_k + ω_l|)`;
//! * [`rate_adiabatic`]: the photon-eliminated estimate `κ Mc²/(δ_C² + κ²)`.
//!
//! [`covariance_evolution`] integrates the second moments directly and is the
//! time-domain check on the coarse-grained rate.

use nalgebra::{DMatrix, DVector, Matrix4};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fluctuations::{
    annihilation_mode, drift_matrix, eigenfrequencies, swap_conjugate, ModeDecomposition,
    ModeKind, QuadraticCoeffs, CRITICAL_OMEGA, DEGENERACY_TOLERANCE,
};
use crate::params::ReducedParams;

/// Tolerance on the imaginary part of the coarse-grained rate.
pub const IMAGINARY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiffusionRates {
    /// d/dt ⟨ρ₊†ρ₊ + ρ₋†ρ₋⟩; NaN at the critical point.
    pub rate_modes: f64,
    /// d/dt ⟨a†a + b†b⟩ coarse-grained over `delta_t`.
    pub rate_populations: f64,
    pub rate_adiabatic: f64,
    pub delta_t: f64,
}

/// Geometric mean of the fast and slow time scales, 1/√(|δ_C| ω_R). Lies
/// inside |δ_C|⁻¹ ≪ δt ≪ ω_R⁻¹ whenever |δ_C| ≫ ω_R.
pub fn default_coarse_grain(r: &ReducedParams) -> f64 {
    1.0 / (r.delta_c.abs() * r.omega_r).sqrt()
}

/// `2κ Σ |l₂|²` over the annihilation-like modes.
pub fn rate_normal_modes(m: &ModeDecomposition, kappa: f64) -> f64 {
    2.0 * kappa
        * m.modes
            .iter()
            .filter(|mode| mode.kind == ModeKind::Annihilation)
            .map(|mode| mode.left[1].norm_sqr())
            .sum::<f64>()
}

/// κ Mc² / (δ_C² + κ²).
pub fn rate_adiabatic(q: &QuadraticCoeffs, r: &ReducedParams) -> f64 {
    r.kappa * q.mc * q.mc / (r.delta_c * r.delta_c + r.kappa * r.kappa)
}

/// A spectral projector and the frequency it rotates at. A merged family
/// (both members of a ± pair summed) is carried with frequency 0.
struct Component {
    frequency: f64,
    projector: Matrix4<Complex64>,
}

fn passes(cutoff: f64, sum: f64) -> bool {
    sum.abs() < cutoff
}

fn coarse_grained_sum(components: &[Component], kappa: f64, delta_t: f64) -> Result<f64> {
    if !(delta_t > 0.0) {
        return Err(Error::Usage(format!("δt must be positive, got {delta_t}")));
    }
    let cutoff = 1.0 / delta_t;
    let mut total = Complex64::new(0.0, 0.0);
    let mut magnitude = 0.0;
    for c in components {
        for d in components {
            if !passes(cutoff, c.frequency + d.frequency) {
                continue;
            }
            let (p, q) = (&c.projector, &d.projector);
            let term = p[(1, 0)] * q[(0, 1)] + p[(3, 0)] * q[(2, 1)];
            magnitude += term.norm();
            total += term;
        }
    }
    let rate = 2.0 * kappa * total;
    let scale = 1f64.max(2.0 * kappa * magnitude);
    if rate.im.abs() > IMAGINARY_TOLERANCE * scale {
        return Err(Error::Internal(format!(
            "coarse-grained rate has imaginary part {:e}",
            rate.im
        )));
    }
    Ok(rate.re)
}

/// Coarse-grained population diffusion rate from an explicit mode
/// decomposition.
pub fn rate_populations(m: &ModeDecomposition, kappa: f64, delta_t: f64) -> Result<f64> {
    let components: Vec<Component> = m
        .modes
        .iter()
        .map(|mode| Component {
            frequency: mode.frequency,
            projector: mode.projector(),
        })
        .collect();
    coarse_grained_sum(&components, kappa, delta_t)
}

/// Coarse-grained population diffusion rate straight from the quadratic
/// coefficients.
///
/// When every Θ factor involving the soft pair agrees for both of its
/// members, the pair enters only through its summed projector
/// `P₋ = 1 − P₊ − P₊†`. That sum stays finite at the critical point, where
/// the individual soft-mode vectors diverge, so this form also covers
/// y = y_crit.
pub fn rate_populations_at(q: &QuadraticCoeffs, kappa: f64, delta_t: f64) -> Result<f64> {
    if !(delta_t > 0.0) {
        return Err(Error::Usage(format!("δt must be positive, got {delta_t}")));
    }
    let spec = eigenfrequencies(q);
    if !spec.stable {
        return Err(Error::Unstable(format!("complex normal-mode frequencies for {q:?}")));
    }
    let (wp, wm) = (spec.omega_plus, spec.omega_minus);
    let drift = drift_matrix(q);
    let (lp, rp) = annihilation_mode(&drift, wp)?;
    let plus = rp * lp.adjoint();
    let plus_dag = swap_conjugate(&rp) * swap_conjugate(&lp).adjoint();

    let cutoff = 1.0 / delta_t;
    let merge = spec.is_critical()
        || (passes(cutoff, 2.0 * wm) && passes(cutoff, wp + wm) == passes(cutoff, wp - wm));
    let mut components = vec![
        Component { frequency: wp, projector: plus },
        Component { frequency: -wp, projector: plus_dag },
    ];
    if merge {
        let soft = Matrix4::identity() - plus - plus_dag;
        components.push(Component { frequency: 0.0, projector: soft });
    } else {
        if wp - wm <= DEGENERACY_TOLERANCE * wp || wm < CRITICAL_OMEGA {
            return Err(Error::Degenerate(format!("ω₊ = {wp}, ω₋ = {wm}")));
        }
        let (lm, rm) = annihilation_mode(&drift, wm)?;
        components.push(Component { frequency: wm, projector: rm * lm.adjoint() });
        components.push(Component {
            frequency: -wm,
            projector: swap_conjugate(&rm) * swap_conjugate(&lm).adjoint(),
        });
    }
    coarse_grained_sum(&components, kappa, delta_t)
}

/// All three rates at one parameter point. `rate_modes` is NaN at the
/// critical point, where it diverges.
pub fn diffusion_rates(r: &ReducedParams, q: &QuadraticCoeffs, delta_t: f64) -> Result<DiffusionRates> {
    let spec = eigenfrequencies(q);
    let rate_modes = if spec.is_critical() {
        f64::NAN
    } else {
        rate_normal_modes(&crate::fluctuations::mode_decomposition(q)?, r.kappa)
    };
    Ok(DiffusionRates {
        rate_modes,
        rate_populations: rate_populations_at(q, r.kappa, delta_t)?,
        rate_adiabatic: rate_adiabatic(q, r),
        delta_t,
    })
}

/// Frequencies |ω_k + ω_l| of the pairs removed by the Θ cutoff, deduplicated
/// and ascending. These are the oscillations superposed on the linear trend
/// of δN(t).
pub fn cut_frequencies(m: &ModeDecomposition, delta_t: f64) -> Vec<f64> {
    let cutoff = 1.0 / delta_t;
    let mut out: Vec<f64> = Vec::new();
    for a in &m.modes {
        for b in &m.modes {
            let s = (a.frequency + b.frequency).abs();
            if !passes(cutoff, s) && !out.iter().any(|&f| (f - s).abs() <= 1e-12 * s) {
                out.push(s);
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Controls for the adaptive Dormand–Prince integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-15,
            max_steps: 2_000_000,
        }
    }
}

type State = Matrix4<Complex64>;

// Dormand–Prince 5(4) tableau; the system is autonomous so the nodes are unused.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates the second-moment equations
/// `dD/dt = M D + D Mᵀ + N`, `N_{a,a†} = 2κ`, from D(0) = 0, where
/// `D_ij = ⟨R_i R_j⟩(t) − ⟨R_i R_j⟩(0)` is the deviation from the
/// normal-mode vacuum (which the noiseless dynamics leaves invariant).
/// Returns `δN(t) = D_{a†a} + D_{b†b}` on `t_grid`.
pub fn covariance_evolution(m: &ModeDecomposition, kappa: f64, t_grid: &[f64]) -> Result<Vec<f64>> {
    covariance_evolution_with(m, kappa, t_grid, IntegratorOptions::default())
}

pub fn covariance_evolution_with(
    m: &ModeDecomposition,
    kappa: f64,
    t_grid: &[f64],
    opts: IntegratorOptions,
) -> Result<Vec<f64>> {
    if t_grid.iter().any(|t| !(*t >= 0.0)) || t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Usage("time grid must be non-negative and sorted".into()));
    }
    let drift = m.drift;
    let drift_t = drift.transpose();
    let mut noise = State::zeros();
    noise[(0, 1)] = Complex64::new(2.0 * kappa, 0.0);
    let rhs = |d: &State| drift * d + d * drift_t + noise;

    let mut state = State::zeros();
    let mut t = 0.0;
    let mut h = 0.01 / m.omega_plus().abs().max(m.omega_minus().abs()).max(1e-300);
    let mut steps = 0usize;
    let mut out = Vec::with_capacity(t_grid.len());
    for &target in t_grid {
        while t < target {
            if steps >= opts.max_steps {
                return Err(Error::Numerical(format!(
                    "covariance integration exceeded {} steps at t = {t:e} (h = {h:e}, target {target:e})",
                    opts.max_steps
                )));
            }
            let step = h.min(target - t);
            let mut k: [State; 7] = [State::zeros(); 7];
            k[0] = rhs(&state);
            for s in 1..7 {
                let mut y = state;
                for (j, kj) in k.iter().enumerate().take(s) {
                    if A[s][j] != 0.0 {
                        y += kj * Complex64::new(step * A[s][j], 0.0);
                    }
                }
                k[s] = rhs(&y);
            }
            let mut high = state;
            let mut err = State::zeros();
            for s in 0..7 {
                high += k[s] * Complex64::new(step * B5[s], 0.0);
                err += k[s] * Complex64::new(step * (B5[s] - B4[s]), 0.0);
            }
            let mut ratio: f64 = 0.0;
            for ((e, y0), y1) in err.iter().zip(state.iter()).zip(high.iter()) {
                let tol = opts.atol + opts.rtol * y0.norm().max(y1.norm());
                ratio = ratio.max(e.norm() / tol);
            }
            steps += 1;
            if !ratio.is_finite() {
                return Err(Error::Numerical(format!(
                    "non-finite error estimate at t = {t:e}, h = {step:e}"
                )));
            }
            if ratio <= 1.0 {
                t = if step == target - t { target } else { t + step };
                state = high;
            }
            let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
            h = step * factor;
            if h < 1e-14 * target.max(1e-300) {
                return Err(Error::Numerical(format!(
                    "step size underflow at t = {t:e} (h = {h:e}, error ratio {ratio:e})"
                )));
            }
        }
        let dn = state[(1, 0)] + state[(3, 2)];
        let scale = 1e-8 * (1.0 + dn.norm());
        if dn.im.abs() > scale {
            return Err(Error::Internal(format!(
                "δN({t}) has imaginary part {:e}",
                dn.im
            )));
        }
        out.push(dn.re);
    }
    Ok(out)
}

/// Slope of the linear trend of `values(ts)` after removing sinusoids at
/// `frequencies` by least squares (model: c₀ + s·t + Σ aᵢ cos ωᵢt + bᵢ sin ωᵢt).
pub fn secular_slope(ts: &[f64], values: &[f64], frequencies: &[f64]) -> Result<f64> {
    let cols = 2 + 2 * frequencies.len();
    if ts.len() != values.len() || ts.len() < cols + 1 {
        return Err(Error::Usage(format!(
            "need more than {cols} samples for the trend fit, got {}",
            ts.len()
        )));
    }
    // centering and scaling t keeps the normal matrix well conditioned
    let t0 = 0.5 * (ts[0] + ts[ts.len() - 1]);
    let span = (ts[ts.len() - 1] - ts[0]).max(f64::MIN_POSITIVE);
    let design = DMatrix::from_fn(ts.len(), cols, |i, j| {
        let t = ts[i];
        match j {
            0 => 1.0,
            1 => (t - t0) / span,
            _ => {
                let w = frequencies[(j - 2) / 2];
                if j % 2 == 0 {
                    (w * t).cos()
                } else {
                    (w * t).sin()
                }
            }
        }
    });
    let rhs = DVector::from_column_slice(values);
    let coef = design
        .svd(true, true)
        .solve(&rhs, 1e-13)
        .map_err(|e| Error::Numerical(format!("trend fit failed: {e}")))?;
    Ok(coef[1] / span)
}

/// Ordinary least-squares slope, no detrending.
pub fn linear_slope(ts: &[f64], values: &[f64]) -> f64 {
    crate::fluctuations::least_squares_slope(ts, values)
}

/// Trend of δN(t) over `window`, estimated from `samples` points of
/// [`covariance_evolution`] with the cut-off oscillations removed.
pub fn population_trend(
    m: &ModeDecomposition,
    kappa: f64,
    delta_t: f64,
    window: (f64, f64),
    samples: usize,
) -> Result<f64> {
    let (t0, t1) = window;
    if !(t0 >= 0.0 && t1 > t0) || samples < 2 {
        return Err(Error::Usage(format!("bad trend window [{t0}, {t1}]")));
    }
    let ts: Vec<f64> = (0..samples)
        .map(|i| t0 + (t1 - t0) * i as f64 / (samples - 1) as f64)
        .collect();
    let dn = covariance_evolution(m, kappa, &ts)?;
    secular_slope(&ts, &dn, &cut_frequencies(m, delta_t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluctuations::{coefficients_at, mode_decomposition};

    fn setup(y: f64) -> (ReducedParams, QuadraticCoeffs, ModeDecomposition) {
        let r = ReducedParams::figure_defaults(y);
        let (_, q) = coefficients_at(&r).unwrap();
        let m = mode_decomposition(&q).unwrap();
        (r, q, m)
    }

    /// Closed-form δN(t): the noise integral evaluated mode by mode,
    /// keeping the full (1 − e^{−ixt})/(ix) kernel.
    fn exact_increase(m: &ModeDecomposition, kappa: f64, t: f64) -> f64 {
        let mut sum = Complex64::new(0.0, 0.0);
        for a in &m.modes {
            for b in &m.modes {
                let x = a.frequency + b.frequency;
                let kernel = if x.abs() < 1e-12 {
                    Complex64::new(t, 0.0)
                } else {
                    (Complex64::new(1.0, 0.0) - Complex64::new(0.0, -x * t).exp())
                        / Complex64::new(0.0, x)
                };
                let coupling = a.left[0].conj() * b.left[1].conj();
                let weight = a.right[1] * b.right[0] + a.right[3] * b.right[2];
                sum += coupling * weight * kernel;
            }
        }
        (2.0 * kappa * sum).re
    }

    #[test]
    fn adiabatic_rate_normal_phase() {
        let (r, q, _) = setup(6.0);
        assert_eq!(rate_adiabatic(&q, &r), 36.0 / 10001.0);
        // ω_R (κ/|δ_C|)(y/y_crit)² = 3.6e-3
        assert!((rate_adiabatic(&q, &r) - 3.6e-3).abs() < 3.6e-3 * 1e-3);
        assert_eq!(rate_adiabatic(&q, &r.with_kappa(0.0)), 0.0);
        let (r0, q0, _) = setup(0.0);
        assert_eq!(rate_adiabatic(&q0, &r0), 0.0);
    }

    #[test]
    fn rates_vanish_without_coupling_or_loss() {
        let (_, q, m) = setup(0.0);
        assert_eq!(rate_normal_modes(&m, 1.0), 0.0);
        assert_eq!(rate_populations(&m, 1.0, 0.1).unwrap(), 0.0);
        assert_eq!(rate_populations_at(&q, 1.0, 0.1).unwrap(), 0.0);
        let (_, q, m) = setup(7.0);
        assert_eq!(rate_normal_modes(&m, 0.0), 0.0);
        assert_eq!(rate_populations_at(&q, 0.0, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn mode_rate_reduction() {
        // the secular part of ⟨ρ_m† ρ_m⟩ uses l₁ of the creation partner and l₂
        // of the mode itself; with l⁽ᵐ†⁾ = swap-conjugate(l⁽ᵐ⁾) this is |l₂|²
        let (_, _, m) = setup(8.0);
        let direct: f64 = [0usize, 2]
            .iter()
            .map(|&k| {
                let dag = &m.modes[ModeDecomposition::partner(k)];
                (dag.left[0].conj() * m.modes[k].left[1].conj()).re
            })
            .sum::<f64>()
            * 2.0;
        assert!((direct - rate_normal_modes(&m, 1.0)).abs() < 1e-15);
    }

    #[test]
    fn completeness_zeroes_fine_grained_rate() {
        for y in [3.0, 9.0, 16.0] {
            let (_, q, m) = setup(y);
            let dt = 0.5 / (2.0 * m.omega_plus() + 1.0);
            assert!(rate_populations(&m, 1.0, dt).unwrap().abs() < 1e-10);
            assert!(rate_populations_at(&q, 1.0, dt).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn projector_route_matches_modes() {
        for y in [2.0, 6.0, 9.5, 13.0, 20.0] {
            let (r, q, m) = setup(y);
            let dt = default_coarse_grain(&r);
            let a = rate_populations(&m, 1.0, dt).unwrap();
            let b = rate_populations_at(&q, 1.0, dt).unwrap();
            assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()), "y = {y}: {a} vs {b}");
        }
    }

    #[test]
    fn coarse_rate_close_to_adiabatic() {
        let (r, q, m) = setup(6.0);
        let pop = rate_populations(&m, 1.0, default_coarse_grain(&r)).unwrap();
        let ad = rate_adiabatic(&q, &r);
        assert!((pop / ad - 1.0).abs() < 0.05, "{pop} vs {ad}");
    }

    #[test]
    fn finite_rate_at_critical_point() {
        let (r, q) = {
            let r = ReducedParams::figure_defaults(10.0);
            (r, coefficients_at(&r).unwrap().1)
        };
        let rates = diffusion_rates(&r, &q, default_coarse_grain(&r)).unwrap();
        assert!(rates.rate_modes.is_nan());
        assert!(rates.rate_populations.is_finite() && rates.rate_populations > 0.0);
        let near = rate_populations_at(&coefficients_at(&r.with_y(9.9999)).unwrap().1, 1.0, 0.1).unwrap();
        assert!((near - rates.rate_populations).abs() < 1e-3 * near);
    }

    #[test]
    fn rates_linear_in_kappa() {
        let (r, q, m) = setup(7.5);
        let dt = default_coarse_grain(&r);
        for k in [0.01, 0.1] {
            let a = rate_populations(&m, k, dt).unwrap() / k;
            let b = rate_populations(&m, 2.0 * k, dt).unwrap() / (2.0 * k);
            assert!((a - b).abs() < 1e-12 * a.abs());
            assert!((rate_normal_modes(&m, k) * 2.0 - rate_normal_modes(&m, 2.0 * k)).abs() < 1e-15);
        }
        let ad = |k: f64| rate_adiabatic(&q, &r.with_kappa(k)) / k;
        assert!((ad(1e-3) / ad(2e-3) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn flip_invariance() {
        let r = ReducedParams::figure_defaults(16.0);
        let s = crate::meanfield::solve_displacements(&r).unwrap();
        let q1 = crate::fluctuations::quadratic_coefficients(&r, &s).unwrap();
        let q2 = crate::fluctuations::quadratic_coefficients(&r, &s.flipped()).unwrap();
        let a = rate_populations_at(&q1, 1.0, 0.1).unwrap();
        let b = rate_populations_at(&q2, 1.0, 0.1).unwrap();
        assert!((a - b).abs() < 1e-12 * a.abs());
    }

    #[test]
    fn monotone_below_threshold() {
        let mut prev = (0.0, 0.0, 0.0);
        for i in 0..100 {
            let y = 9.9 * i as f64 / 99.0;
            let (r, q, m) = setup(y);
            let cur = (
                rate_normal_modes(&m, 1.0),
                rate_populations_at(&q, 1.0, default_coarse_grain(&r)).unwrap(),
                rate_adiabatic(&q, &r),
            );
            assert!(cur.0 >= prev.0 && cur.1 >= prev.1 - 1e-15 && cur.2 >= prev.2, "y = {y}");
            prev = cur;
        }
    }

    #[test]
    fn integrator_matches_closed_form() {
        let (_, _, m) = setup(8.0);
        let ts: Vec<f64> = (0..=40).map(|i| 0.005 * i as f64).collect();
        let dn = covariance_evolution(&m, 1.0, &ts).unwrap();
        assert_eq!(dn[0], 0.0);
        for (t, v) in ts.iter().zip(&dn) {
            let exact = exact_increase(&m, 1.0, *t);
            assert!((v - exact).abs() < 1e-9 * (1e-6 + exact.abs()), "t = {t}: {v} vs {exact}");
        }
    }

    #[test]
    fn no_loss_no_growth() {
        let (_, _, m) = setup(5.0);
        let dn = covariance_evolution(&m, 0.0, &[0.0, 0.05, 0.1]).unwrap();
        assert!(dn.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn trend_matches_coarse_rate() {
        let (r, _, m) = setup(6.0);
        let dt = default_coarse_grain(&r);
        let slope = population_trend(&m, 1.0, dt, (0.05, 0.1), 801).unwrap();
        let rate = rate_populations(&m, 1.0, dt).unwrap();
        assert!((slope / rate - 1.0).abs() < 0.1, "{slope} vs {rate}");
    }

    #[test]
    fn secular_slope_recovers_synthetic_trend() {
        let ts: Vec<f64> = (0..500).map(|i| 0.05 + 1e-4 * i as f64).collect();
        let vs: Vec<f64> = ts
            .iter()
            .map(|t| 0.3 + 2.5 * t + 0.01 * (200.0 * t).sin() - 0.02 * (99.0 * t).cos())
            .collect();
        let s = secular_slope(&ts, &vs, &[99.0, 200.0]).unwrap();
        assert!((s - 2.5).abs() < 1e-9);
        assert!((linear_slope(&ts, &vs) - 2.5).abs() > 1e-3);
    }

    #[test]
    fn bad_time_grid_rejected() {
        let (_, _, m) = setup(5.0);
        assert!(covariance_evolution(&m, 1.0, &[0.1, 0.05]).is_err());
        assert!(covariance_evolution(&m, 1.0, &[-0.1]).is_err());
    }
}
