//! Quadratic fluctuations around the mean field.
//!
//! In the displaced frame the Hamiltonian, to second order in the photon
//! operator `a` and the Holstein-Primakoff boson `b`, reads
//!
//! ```text
//! H = M0 a†a + (Mx+My)/2 b†b + (Mx−My)/4 (b†² + b²) + i/2 Mc (a† − a)(b† + b)
//! ```
//!
//! (the constant offset is never needed). This module builds the four
//! coefficients, the two normal-mode frequencies ω±, and the biorthogonal
//! decomposition of the Heisenberg drift matrix over `R = [a, a†, b, b†]`.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::meanfield::{critical_coupling, solve_displacements, MeanFieldSolution};
use crate::params::ReducedParams;

/// Soft-mode frequency (in ω_R) below which the spectrum counts as critical.
pub const CRITICAL_OMEGA: f64 = 1e-8;

/// Minimum relative separation of ω₊ and ω₋ for a mode decomposition.
pub const DEGENERACY_TOLERANCE: f64 = 1e-8;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Coefficients of the quadratic fluctuation Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticCoeffs {
    pub m0: f64,
    pub mx: f64,
    pub my: f64,
    pub mc: f64,
}

impl QuadraticCoeffs {
    /// Hamiltonian matrix `H = ½ zᵀ·K·z` over the quadratures
    /// `z = (x_a, p_a, x_b, p_b)` with `a = (x_a + i p_a)/√2`.
    pub fn quadrature_matrix(&self) -> Matrix4<f64> {
        Matrix4::new(
            self.m0, 0.0, 0.0, 0.0, //
            0.0, self.m0, self.mc, 0.0, //
            0.0, self.mc, self.mx, 0.0, //
            0.0, 0.0, 0.0, self.my,
        )
    }

    /// Coefficient of the single-mode squeezing term `b†² + b²`.
    pub fn squeezing(&self) -> f64 {
        (self.mx - self.my) / 4.0
    }
}

/// Evaluates M0, Mx, My, Mc at the mean-field point `s`.
pub fn quadratic_coefficients(r: &ReducedParams, s: &MeanFieldSolution) -> Result<QuadraticCoeffs> {
    let (a, b) = (s.alpha0, s.beta0);
    let x = b * b;
    if !(x < 1.0) {
        return Err(Error::Singular(format!(
            "β0² = {x}: Mx contains (1 − β0²)^(−3/2)"
        )));
    }
    let root = (1.0 - x).sqrt();
    let shift = r.omega_r + r.u * a * a;
    Ok(QuadraticCoeffs {
        m0: -r.delta_c + r.u * x,
        mx: shift - r.y * a * b * (3.0 - 2.0 * x) / (root * root * root),
        my: shift - r.y * a * b / root,
        mc: 2.0 * r.u * a * b + r.y * (1.0 - 2.0 * x) / root,
    })
}

/// Mean-field solution followed by [`quadratic_coefficients`].
pub fn coefficients_at(r: &ReducedParams) -> Result<(MeanFieldSolution, QuadraticCoeffs)> {
    let s = solve_displacements(r)?;
    let q = quadratic_coefficients(r, &s)?;
    Ok((s, q))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalModeSpectrum {
    pub omega_plus: f64,
    pub omega_minus: f64,
    /// Both squared frequencies real and non-negative. When false the
    /// frequencies are NaN.
    pub stable: bool,
}

impl NormalModeSpectrum {
    pub fn is_critical(&self) -> bool {
        self.stable && self.omega_minus < CRITICAL_OMEGA
    }
}

/// Normal-mode frequencies
/// `ω±² = (M0² + Mx My)/2 ± √((M0² − Mx My)²/4 + M0 My Mc²)`.
///
/// ω₋² is taken from the product `ω₊²ω₋² = M0 My (M0 Mx − Mc²)` so that it
/// keeps full relative precision next to the critical point.
pub fn eigenfrequencies(q: &QuadraticCoeffs) -> NormalModeSpectrum {
    let unstable = NormalModeSpectrum {
        omega_plus: f64::NAN,
        omega_minus: f64::NAN,
        stable: false,
    };
    let mm = q.mx * q.my;
    let m02 = q.m0 * q.m0;
    let mean = 0.5 * (m02 + mm);
    let disc = 0.25 * (m02 - mm) * (m02 - mm) + q.m0 * q.my * q.mc * q.mc;
    if !(disc >= 0.0) {
        return unstable;
    }
    let plus2 = mean + disc.sqrt();
    let product = q.m0 * q.my * (q.m0 * q.mx - q.mc * q.mc);
    let mut minus2 = if plus2 > 0.0 { product / plus2 } else { mean - disc.sqrt() };
    let rounding = 64.0
        * f64::EPSILON
        * (q.m0 * q.my).abs()
        * ((q.m0 * q.mx).abs() + q.mc * q.mc)
        / plus2.max(f64::MIN_POSITIVE);
    if minus2 < 0.0 && minus2 > -rounding {
        minus2 = 0.0;
    }
    if !(plus2 >= 0.0 && minus2 >= 0.0) {
        return unstable;
    }
    NormalModeSpectrum {
        omega_plus: plus2.sqrt(),
        omega_minus: minus2.sqrt(),
        stable: true,
    }
}

/// Heisenberg drift matrix: `dR/dt = M·R` with `R = [a, a†, b, b†]`,
/// from `dR/dt = −i[R, H]`.
pub fn drift_matrix(q: &QuadraticCoeffs) -> Matrix4<Complex64> {
    let c = |v: f64| Complex64::new(v, 0.0);
    let half_mc = c(0.5 * q.mc);
    let diag_b = 0.5 * (q.mx + q.my);
    let anom_b = 0.5 * (q.mx - q.my);
    Matrix4::new(
        -I * q.m0, c(0.0), half_mc, half_mc, //
        c(0.0), I * q.m0, half_mc, half_mc, //
        -half_mc, half_mc, -I * diag_b, -I * anom_b, //
        half_mc, -half_mc, I * anom_b, I * diag_b,
    )
}

/// Swaps (a ↔ a†, b ↔ b†) and conjugates: maps the vector of a mode onto the
/// vector of its hermitian adjoint.
pub fn swap_conjugate(v: &Vector4<Complex64>) -> Vector4<Complex64> {
    Vector4::new(v[1].conj(), v[0].conj(), v[3].conj(), v[2].conj())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ModeKind {
    /// Evolves as e^{−iωt} with ω > 0.
    Annihilation,
    /// Hermitian adjoint of an annihilation-like mode, frequency −ω.
    Creation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ModeFamily {
    Plus,
    Minus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalMode {
    /// Signed frequency ω_k; ρ_k(t) = e^{−iω_k t} ρ_k(0).
    pub frequency: f64,
    /// Left eigenvector: ρ_k = (l, R) = Σ_i l_i* R_i.
    pub left: Vector4<Complex64>,
    /// Right eigenvector: R = Σ_k ρ_k r⁽ᵏ⁾.
    pub right: Vector4<Complex64>,
    pub kind: ModeKind,
    pub family: ModeFamily,
}

impl NormalMode {
    /// Spectral projector r⁽ᵏ⁾ l⁽ᵏ⁾†.
    pub fn projector(&self) -> Matrix4<Complex64> {
        self.right * self.left.adjoint()
    }
}

/// Drift matrix together with its four normal modes, ordered
/// `[plus, plus†, minus, minus†]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeDecomposition {
    pub drift: Matrix4<Complex64>,
    pub modes: [NormalMode; 4],
}

impl ModeDecomposition {
    /// Index of the creation-like partner of mode `k`.
    pub fn partner(k: usize) -> usize {
        k ^ 1
    }

    pub fn omega_plus(&self) -> f64 {
        self.modes[0].frequency
    }

    pub fn omega_minus(&self) -> f64 {
        self.modes[2].frequency
    }

    /// max |(l⁽ᵏ⁾, r⁽ˡ⁾) − δ_kl|.
    pub fn biorthogonality_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, mk) in self.modes.iter().enumerate() {
            for (l, ml) in self.modes.iter().enumerate() {
                let dot = mk.left.dotc(&ml.right);
                let target = if k == l { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).norm());
            }
        }
        worst
    }

    /// max |Σ_k r⁽ᵏ⁾_i l⁽ᵏ⁾_j* − δ_ij|.
    pub fn completeness_residual(&self) -> f64 {
        let sum: Matrix4<Complex64> = self.modes.iter().map(NormalMode::projector).sum();
        (sum - Matrix4::identity()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// [ρ_k, ρ_l†] evaluated from the left vectors and the canonical
    /// commutators [a, a†] = [b, b†] = 1.
    pub fn commutator(&self, k: usize, l: usize) -> Complex64 {
        let lk = &self.modes[k].left;
        let ll = &self.modes[l].left;
        // ρ_l† = (S l*, R), so its coefficient of R_j is (S l)_j.
        let sl = Vector4::new(ll[1], ll[0], ll[3], ll[2]);
        lk[0].conj() * sl[1] - lk[1].conj() * sl[0] + lk[2].conj() * sl[3]
            - lk[3].conj() * sl[2]
    }

    /// Two-point functions ⟨R_i R_j⟩ in the normal-mode vacuum.
    pub fn vacuum_moments(&self) -> Matrix4<Complex64> {
        let mut c = Matrix4::zeros();
        for k in [0, 2] {
            let r = &self.modes[k].right;
            let rd = &self.modes[Self::partner(k)].right;
            c += r * rd.transpose();
        }
        c
    }
}

/// Null vector of a 4×4 matrix that is singular up to rounding.
pub(crate) fn null_vector(a: Matrix4<Complex64>) -> Result<Vector4<Complex64>> {
    let svd = a.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Numerical("SVD did not return right singular vectors".into()))?;
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .expect("four singular values");
    Ok(Vector4::from_iterator(v_t.row(k).iter().map(|z| z.conj())))
}

/// Rotates `v` so its largest component is real and positive.
fn fix_phase(v: Vector4<Complex64>) -> Vector4<Complex64> {
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(Complex64::new(1.0, 0.0));
    let phase = pivot.conj() / pivot.norm();
    v * phase
}

/// Left/right eigenvectors of the annihilation-like mode with frequency
/// `omega` (drift eigenvalue −iω), normalized to [ρ, ρ†] = 1 and
/// (l, r) = 1.
pub(crate) fn annihilation_mode(drift: &Matrix4<Complex64>, omega: f64) -> Result<(Vector4<Complex64>, Vector4<Complex64>)> {
    let eye = Matrix4::<Complex64>::identity();
    let left = null_vector(drift.adjoint() - eye * (I * omega))?;
    let norm = left[0].norm_sqr() - left[1].norm_sqr() + left[2].norm_sqr() - left[3].norm_sqr();
    if !(norm > 0.0) {
        return Err(Error::Unstable(format!(
            "mode at ω = {omega} has non-positive symplectic norm {norm:e}"
        )));
    }
    let left = fix_phase(left.unscale(norm.sqrt()));
    let right = null_vector(drift + eye * (I * omega))?;
    let overlap = left.dotc(&right);
    if overlap.norm() < 1e-300 {
        return Err(Error::Numerical(format!(
            "left and right eigenvectors at ω = {omega} are orthogonal"
        )));
    }
    Ok((left, right / overlap))
}

/// Biorthogonal normal-mode decomposition of the drift matrix.
///
/// Fails at the critical point (ω₋ < [`CRITICAL_OMEGA`]), for coinciding
/// frequencies, and for unstable spectra.
pub fn mode_decomposition(q: &QuadraticCoeffs) -> Result<ModeDecomposition> {
    let spec = eigenfrequencies(q);
    if !spec.stable {
        return Err(Error::Unstable(format!("complex normal-mode frequencies for {q:?}")));
    }
    if spec.omega_minus < CRITICAL_OMEGA {
        return Err(Error::Degenerate(format!(
            "ω₋ = {:e} vanishes (critical point)",
            spec.omega_minus
        )));
    }
    if spec.omega_plus - spec.omega_minus <= DEGENERACY_TOLERANCE * spec.omega_plus {
        return Err(Error::Degenerate(format!(
            "ω₊ = {} and ω₋ = {} coincide",
            spec.omega_plus, spec.omega_minus
        )));
    }
    let drift = drift_matrix(q);
    let mut modes = Vec::with_capacity(4);
    for (family, omega) in [
        (ModeFamily::Plus, spec.omega_plus),
        (ModeFamily::Minus, spec.omega_minus),
    ] {
        let (left, right) = annihilation_mode(&drift, omega)?;
        modes.push(NormalMode {
            frequency: omega,
            left,
            right,
            kind: ModeKind::Annihilation,
            family,
        });
        modes.push(NormalMode {
            frequency: -omega,
            left: swap_conjugate(&left),
            right: swap_conjugate(&right),
            kind: ModeKind::Creation,
            family,
        });
    }
    let modes: [NormalMode; 4] = modes.try_into().expect("four modes");
    Ok(ModeDecomposition { drift, modes })
}

/// Incoherent (displaced-frame) populations of the fluctuation ground state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroundStateStats {
    /// ⟨a†a⟩
    pub n_photon: f64,
    /// ⟨b†b⟩
    pub n_atom: f64,
}

/// Populations of the normal-mode vacuum, from the mode expansion
/// `R = Σ_k ρ_k r⁽ᵏ⁾` with ⟨ρ_m ρ_m†⟩ = 1 as the only non-zero contraction.
pub fn ground_state_populations(q: &QuadraticCoeffs) -> Result<GroundStateStats> {
    let spec = eigenfrequencies(q);
    if spec.is_critical() {
        return Err(Error::Divergent {
            omega_minus: spec.omega_minus,
        });
    }
    let modes = mode_decomposition(q)?;
    let c = modes.vacuum_moments();
    let (na, nb) = (c[(1, 0)], c[(3, 2)]);
    let scale = 1.0 + na.norm() + nb.norm();
    if na.im.abs() > 1e-9 * scale || nb.im.abs() > 1e-9 * scale {
        return Err(Error::Internal(format!(
            "populations have imaginary parts {:e}, {:e}",
            na.im, nb.im
        )));
    }
    Ok(GroundStateStats {
        n_photon: na.re,
        n_atom: nb.re,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Below,
    Above,
}

/// Largest relative distance |1 − y/y_crit| accepted by [`gap_exponent`].
pub const GAP_WINDOW_MAX: f64 = 1e-2;

/// Least-squares slope of ln ω₋ against ln |1 − y/y_crit| over a geometric
/// grid in `window`, on one side of the transition.
pub fn gap_exponent(r: &ReducedParams, side: Side, window: (f64, f64)) -> Result<f64> {
    let (lo, hi) = window;
    if !(lo > 0.0 && lo < hi && hi <= GAP_WINDOW_MAX) {
        return Err(Error::Usage(format!(
            "window [{lo}, {hi}] must lie in (0, {GAP_WINDOW_MAX}] next to the critical point"
        )));
    }
    const POINTS: usize = 25;
    let y_crit = critical_coupling(r)?;
    let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
    let mut xs = Vec::with_capacity(POINTS);
    let mut ys = Vec::with_capacity(POINTS);
    for i in 0..POINTS {
        let ln_d = ln_lo + (ln_hi - ln_lo) * i as f64 / (POINTS - 1) as f64;
        let d = ln_d.exp();
        let y = match side {
            Side::Below => y_crit * (1.0 - d),
            Side::Above => y_crit * (1.0 + d),
        };
        let (_, q) = coefficients_at(&r.with_y(y))?;
        let spec = eigenfrequencies(&q);
        if !spec.stable || !(spec.omega_minus > 0.0) {
            return Err(Error::Unstable(format!(
                "no positive soft-mode frequency at y/y_crit = {}",
                y / y_crit
            )));
        }
        xs.push(ln_d);
        ys.push(spec.omega_minus.ln());
    }
    Ok(least_squares_slope(&xs, &ys))
}

pub(crate) fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
