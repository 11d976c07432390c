//! Invariant suite behind the `validate` subcommand.
//!
//! Every check is deterministic: random parameter draws come from a fixed
//! ChaCha seed.

use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diffusion::{default_coarse_grain, population_trend, rate_adiabatic, rate_populations, rate_populations_at};
use crate::error::{Error, Result};
use crate::fluctuations::{
    coefficients_at, drift_matrix, eigenfrequencies, gap_exponent, ground_state_populations, mode_decomposition,
    QuadraticCoeffs, Side,
};
use crate::meanfield::{critical_coupling, solve_displacements, stationarity_polynomial};
use crate::oracle::{build_hamiltonian, solve_ground_state, NmaxRule, SpinPhotonBasis};
use crate::params::ReducedParams;
use crate::sweep::{run_sweep, write_sweep_csv, Execution, SweepConfig};
use crate::symplectic;

const SEED: u64 = 0x5eed_d1c4e;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

fn fig(y: f64) -> ReducedParams {
    ReducedParams::figure_defaults(y)
}

/// A stable parameter point away from the immediate critical region, with
/// ω_R = 1, δ_C ∈ [−300, −5], u ∈ [−0.9, 0.9]·min(1, |δ_C|/10) and
/// y/y_crit ∈ [0, 3].
pub fn random_stable_point<R: Rng>(rng: &mut R) -> (ReducedParams, QuadraticCoeffs) {
    loop {
        let delta_c: f64 = -rng.random_range(5.0..300.0);
        let u = rng.random_range(-0.9..0.9) * (delta_c.abs() / 10.0).min(1.0);
        let ratio: f64 = rng.random_range(0.0..3.0);
        if (ratio - 1.0).abs() < 1e-3 {
            continue;
        }
        let Ok(r) = ReducedParams::new(1.0, delta_c, u, 0.0, 1.0) else {
            continue;
        };
        let r = r.with_y(ratio * critical_coupling(&r).expect("δ_C < 0"));
        if let Ok((_, q)) = coefficients_at(&r) {
            let spec = eigenfrequencies(&q);
            if spec.stable && spec.omega_plus - spec.omega_minus > 1e-3 * spec.omega_plus {
                return (r, q);
            }
        }
    }
}

/// Eigenvalues of the complex drift matrix from the real Schur form of its
/// 8×8 real embedding [[Re, −Im], [Im, Re]] (each eigenvalue appears together
/// with its conjugate). Returns the positive imaginary parts, ascending.
pub fn drift_frequencies(q: &QuadraticCoeffs) -> Vec<f64> {
    let m = drift_matrix(q);
    let real = DMatrix::from_fn(8, 8, |i, j| {
        let z = m[(i % 4, j % 4)];
        match (i < 4, j < 4) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let mut w: Vec<f64> = real
        .complex_eigenvalues()
        .iter()
        .map(|z: &Complex<f64>| z.im)
        .filter(|v| *v > 0.0)
        .collect();
    w.sort_by(f64::total_cmp);
    // each frequency appears twice: once from λ, once from the conjugate copy
    w.chunks(2).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect()
}

fn check(name: &'static str, body: impl FnOnce() -> Result<(bool, String)>) -> Check {
    match body() {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn worst<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

pub fn params_checks() -> Vec<Check> {
    vec![
        check("params.regime_rejects_positive_detuning", || {
            let bad = ReducedParams::new(1.0, 1.0, 0.0, 0.0, 1.0);
            Ok((matches!(bad, Err(Error::Regime(_))), format!("{bad:?}")))
        }),
        check("params.recoil_units_covariance", || {
            let base = fig(14.0);
            let (_, q1) = coefficients_at(&base)?;
            let (_, q2) = coefficients_at(&base.scaled(3.0))?;
            let (s1, s2) = (eigenfrequencies(&q1), eigenfrequencies(&q2));
            let err = (s2.omega_minus / 3.0 - s1.omega_minus).abs() / s1.omega_minus;
            let back = base.scaled(3.0).in_recoil_units();
            let dev = (back.delta_c - base.delta_c).abs() + (back.y - base.y).abs();
            Ok((err < 1e-12 && dev < 1e-12, format!("ω₋ relative error {err:e}")))
        }),
    ]
}

pub fn meanfield_checks() -> Vec<Check> {
    vec![
        check("meanfield.critical_coupling", || {
            let yc = critical_coupling(&fig(0.0))?;
            Ok((yc == 10.0, format!("y_crit = {yc}")))
        }),
        check("meanfield.normal_phase_below_threshold", || {
            let mut ok = true;
            for i in 0..=100 {
                let s = solve_displacements(&fig(0.1 * i as f64))?;
                ok &= s.alpha0 == 0.0 && s.beta0 == 0.0;
            }
            Ok((ok, "α0 = β0 = 0 for y ∈ [0, y_crit]".into()))
        }),
        check("meanfield.stationarity_residuals", || {
            let mut rng = ChaCha8Rng::seed_from_u64(SEED);
            let (mut res, mut poly) = (0.0f64, 0.0f64);
            for _ in 0..200 {
                let (r, _) = random_stable_point(&mut rng);
                let s = solve_displacements(&r)?;
                res = res.max(s.residual_a.abs()).max(s.residual_b.abs());
                if s.beta0 > 0.0 {
                    poly = poly.max(stationarity_polynomial(&r, s.beta0_sq()).abs());
                }
            }
            Ok((res < 1e-10 && poly < 1e-12, format!("max residual {res:e}, polynomial {poly:e}")))
        }),
        check("meanfield.dicke_limit", || {
            let err = worst((0..100).map(|i| {
                let y = 10.0 + 0.3 * (i + 1) as f64;
                let r = ReducedParams { u: 0.0, ..fig(y) };
                let exact = (y * y - 100.0) / (2.0 * y * y);
                solve_displacements(&r).map_or(f64::INFINITY, |s| (s.beta0_sq() - exact).abs())
            }));
            Ok((err < 1e-12, format!("max |β0² − closed form| = {err:e}")))
        }),
    ]
}

pub fn fluctuation_checks() -> Vec<Check> {
    vec![
        check("fluctuations.drift_spectrum", || {
            let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 1);
            let mut err = 0.0f64;
            for _ in 0..100 {
                let (_, q) = random_stable_point(&mut rng);
                let spec = eigenfrequencies(&q);
                let w = drift_frequencies(&q);
                if w.len() != 2 {
                    return Ok((false, format!("expected two frequencies, got {w:?}")));
                }
                err = err
                    .max((w[0] - spec.omega_minus).abs() / spec.omega_minus)
                    .max((w[1] - spec.omega_plus).abs() / spec.omega_plus);
            }
            Ok((err < 1e-8, format!("max relative error {err:e} over 100 draws")))
        }),
        check("fluctuations.decoupled_frequencies", || {
            let (_, q) = coefficients_at(&fig(0.0))?;
            let s = eigenfrequencies(&q);
            Ok((s.omega_plus == 100.0 && s.omega_minus == 1.0, format!("{s:?}")))
        }),
        check("fluctuations.gap_closes", || {
            let (_, q) = coefficients_at(&fig(10.0))?;
            let w = eigenfrequencies(&q).omega_minus;
            Ok((w < 1e-6, format!("ω₋(y_crit) = {w:e}")))
        }),
        check("fluctuations.gap_exponent", || {
            let below = gap_exponent(&fig(0.0), Side::Below, (1e-4, 1e-2))?;
            let above = gap_exponent(&fig(0.0), Side::Above, (1e-4, 1e-2))?;
            let ok = (below - 0.5).abs() <= 0.02 && (above - 0.5).abs() <= 0.02;
            Ok((ok, format!("below {below:.4}, above {above:.4}")))
        }),
        check("fluctuations.no_single_mode_squeezing_below_threshold", || {
            let err = worst((0..100).map(|i| {
                coefficients_at(&fig(0.1 * i as f64)).map_or(f64::INFINITY, |(_, q)| q.squeezing().abs())
            }));
            Ok((err == 0.0, format!("max |Mx − My| = {err:e}")))
        }),
        check("fluctuations.mode_basis", || {
            let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 2);
            let (mut bi, mut co) = (0.0f64, 0.0f64);
            for _ in 0..50 {
                let (_, q) = random_stable_point(&mut rng);
                let m = mode_decomposition(&q)?;
                let scale = m.modes.iter().map(|k| k.left.norm() * k.right.norm()).fold(1.0, f64::max);
                bi = bi.max(m.biorthogonality_residual() / scale);
                co = co.max(m.completeness_residual() / scale);
            }
            Ok((bi < 1e-10 && co < 1e-10, format!("biorthogonality {bi:e}, completeness {co:e}")))
        }),
        check("fluctuations.populations_two_routes", || {
            let mut err = 0.0f64;
            for f in [0.1, 0.5, 0.9, 0.99, 0.999, 1.2, 2.0] {
                let (_, q) = coefficients_at(&fig(10.0 * f))?;
                let a = ground_state_populations(&q)?;
                let b = symplectic::ground_state_populations(&q)?;
                err = err
                    .max((a.n_photon - b.n_photon).abs() / b.n_photon)
                    .max((a.n_atom - b.n_atom).abs() / b.n_atom);
            }
            Ok((err < 1e-8, format!("max relative difference {err:e}")))
        }),
        check("fluctuations.populations_diverge", || {
            let n = |f: f64| -> Result<f64> {
                let (_, q) = coefficients_at(&fig(10.0 * f))?;
                Ok(ground_state_populations(&q)?.n_atom)
            };
            let (a, b, c) = (n(0.9)?, n(0.99)?, n(0.999)?);
            Ok((c > b && b > a, format!("⟨b†b⟩ = {a:.4}, {b:.4}, {c:.4}")))
        }),
    ]
}

pub fn diffusion_checks() -> Vec<Check> {
    vec![
        check("diffusion.adiabatic_agreement", || {
            let mut err = 0.0f64;
            for i in 1..=9 {
                let r = fig(i as f64);
                let (_, q) = coefficients_at(&r)?;
                let pop = rate_populations_at(&q, r.kappa, default_coarse_grain(&r))?;
                err = err.max((pop - rate_adiabatic(&q, &r)).abs() / rate_adiabatic(&q, &r));
            }
            Ok((err < 0.05, format!("max relative difference {err:.4}")))
        }),
        check("diffusion.finite_at_critical", || {
            let r = fig(10.0);
            let (_, q) = coefficients_at(&r)?;
            let rate = rate_populations_at(&q, r.kappa, default_coarse_grain(&r))?;
            Ok((rate.is_finite() && rate > 0.0, format!("rate at y_crit = {rate}")))
        }),
        check("diffusion.completeness_zeroing", || {
            let (_, q) = coefficients_at(&fig(6.0))?;
            let m = mode_decomposition(&q)?;
            let dt = 0.25 / m.omega_plus();
            let rate = rate_populations(&m, 1.0, dt)?;
            Ok((rate.abs() < 1e-10, format!("rate with 1/δt > 2ω₊: {rate:e}")))
        }),
        check("diffusion.time_domain", || {
            let r = fig(6.0);
            let (_, q) = coefficients_at(&r)?;
            let m = mode_decomposition(&q)?;
            let dt = default_coarse_grain(&r);
            let slope = population_trend(&m, 1.0, dt, (0.05, 0.1), 801)?;
            let rate = rate_populations(&m, 1.0, dt)?;
            let err = (slope / rate - 1.0).abs();
            Ok((err < 0.1, format!("slope {slope:.6} vs rate {rate:.6}")))
        }),
    ]
}

pub fn oracle_checks() -> Vec<Check> {
    vec![
        check("oracle.symmetric_matrix", || {
            let b = SpinPhotonBasis::new(8, 12)?;
            let h = build_hamiltonian(&fig(15.0), &b)?;
            Ok((h.is_symmetric(), format!("dimension {}, {} non-zeros", h.dim(), h.nnz())))
        }),
        check("oracle.decoupled_gap", || {
            let ed = solve_ground_state(&fig(0.0), 10, NmaxRule::Default)?;
            let err = (ed.gap - 1.0).abs();
            Ok((err < 1e-8 && ed.converged, format!("|gap − ω_R| = {err:e}")))
        }),
        check("oracle.symmetric_ground_state", || {
            let ed = solve_ground_state(&fig(20.0), 10, NmaxRule::Default)?;
            let ok = ed.parity_expectation < 1e-8 && (0.0..=1.0).contains(&ed.order_param_beta2);
            Ok((ok, format!("|⟨a⟩| = {:e}, β² = {:.6}", ed.parity_expectation, ed.order_param_beta2)))
        }),
        check("oracle.variational_bound", || {
            let r = fig(20.0);
            let n = 10.0;
            let s = solve_displacements(&r)?;
            let c0 = (1.0 - s.beta0_sq()).sqrt();
            let mf = n
                * (-r.delta_c * s.alpha0_sq() + r.omega_r * (s.beta0_sq() - 0.5)
                    + 2.0 * r.y * s.alpha0 * s.beta0 * c0
                    + r.u * s.alpha0_sq() * s.beta0_sq());
            let ed = solve_ground_state(&r, 10, NmaxRule::Default)?;
            Ok((ed.ground_energy <= mf, format!("E_ED = {:.8}, E_MF = {mf:.8}", ed.ground_energy)))
        }),
    ]
}

pub fn sweep_checks() -> Vec<Check> {
    vec![check("sweep.deterministic_output", || {
        let cfg = SweepConfig::figure_preset();
        let render = |exec| -> Result<Vec<u8>> {
            let mut buf = Vec::new();
            write_sweep_csv(&run_sweep(&cfg, exec)?, &mut buf)?;
            Ok(buf)
        };
        let a = render(Execution::Parallel)?;
        let b = render(Execution::Parallel)?;
        let c = render(Execution::Sequential)?;
        Ok((a == b && a == c, format!("{} bytes", a.len())))
    })]
}

/// All checks, grouped by module.
pub fn run_all() -> Vec<Check> {
    let mut out = params_checks();
    out.extend(meanfield_checks());
    out.extend(fluctuation_checks());
    out.extend(diffusion_checks());
    out.extend(oracle_checks());
    out.extend(sweep_checks());
    out
}
