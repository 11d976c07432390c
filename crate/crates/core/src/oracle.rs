//! Finite-N exact diagonalization of the two-mode spin-boson Hamiltonian
//!
//! ```text
//! H = −δ_C a†a + ω_R S_z + i y (a† − a) S_x/√N + u a†a (1/2 + S_z/N)
//! ```
//!
//! on the product of a truncated photon Fock space and the spin-N/2
//! multiplet. The rotation a → i·a turns the coupling into
//! `y (a + a†) S_x/√N`, so the matrix is real symmetric; populations are
//! unchanged by it and |⟨a⟩| likewise.
//!
//! The Hamiltonian conserves the parity (−1)^(n + m), with n the photon
//! number and m the c₁ occupation, so the two parity sectors are solved
//! separately. Above threshold the two lowest states form a doublet split
//! only exponentially in N, one state per sector, which an unsplit extremal
//! solve could not resolve.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::meanfield::solve_displacements;
use crate::params::ReducedParams;

/// Largest Hilbert-space dimension the oracle will build.
pub const MAX_DIMENSION: usize = 200_000;

/// Sectors up to this size are diagonalized densely.
const DENSE_LIMIT: usize = 600;

/// Relative ground-energy change allowed when the photon cutoff is doubled.
pub const CUTOFF_TOLERANCE: f64 = 1e-8;

/// Product basis |n⟩ ⊗ |m⟩ with n ∈ [0, n_max] photons and m ∈ [0, N] atoms
/// in the cos kx mode (S_z = m − N/2).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpinPhotonBasis {
    pub atom_number: usize,
    pub n_max: usize,
}

impl SpinPhotonBasis {
    pub fn new(atom_number: usize, n_max: usize) -> Result<Self> {
        if atom_number == 0 || n_max == 0 {
            return Err(Error::Usage(format!(
                "basis needs N ≥ 1 and n_max ≥ 1, got N = {atom_number}, n_max = {n_max}"
            )));
        }
        let b = Self { atom_number, n_max };
        let dim = (atom_number + 1)
            .checked_mul(n_max + 1)
            .ok_or_else(|| Error::Resource("basis dimension overflows".into()))?;
        if dim > MAX_DIMENSION {
            return Err(Error::Resource(format!(
                "dimension {dim} for N = {atom_number}, n_max = {n_max} exceeds {MAX_DIMENSION}"
            )));
        }
        Ok(b)
    }

    pub fn dimension(&self) -> usize {
        (self.atom_number + 1) * (self.n_max + 1)
    }

    pub fn index(&self, n: usize, m: usize) -> usize {
        n * (self.atom_number + 1) + m
    }

    /// (photon number, c₁ occupation) of a flat index.
    pub fn state(&self, idx: usize) -> (usize, usize) {
        (idx / (self.atom_number + 1), idx % (self.atom_number + 1))
    }

    pub fn sz(&self, idx: usize) -> f64 {
        self.state(idx).1 as f64 - 0.5 * self.atom_number as f64
    }

    pub fn parity(&self, idx: usize) -> usize {
        let (n, m) = self.state(idx);
        (n + m) % 2
    }
}

/// ⟨m+1| S₊ |m⟩ = √((N − m)(m + 1)), the product taken in integers.
fn raising(n_atoms: usize, m: usize) -> f64 {
    (((n_atoms - m) as u128) * ((m + 1) as u128)) as f64
}

/// Real symmetric sparse matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetric {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSymmetric {
    fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let dim = rows.len();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for (i, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|e| e.0);
            for (c, v) in row.into_iter().filter(|&(c, v)| v != 0.0 || c == i) {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Self { dim, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|e| e.0 == j).map_or(0.0, |e| e.1)
    }

    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    /// Exact transpose symmetry, entry by entry.
    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| self.row(i).all(|(j, v)| self.get(j, i) == v))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                d[(i, j)] = v;
            }
        }
        d
    }

    /// Restriction to the rows/columns in `keep` (which must be closed under
    /// the sparsity pattern).
    fn restrict(&self, keep: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.dim];
        for (k, &i) in keep.iter().enumerate() {
            map[i] = k;
        }
        let rows = keep
            .iter()
            .map(|&i| {
                self.row(i)
                    .filter(|(j, _)| map[*j] != usize::MAX)
                    .map(|(j, v)| (map[j], v))
                    .collect()
            })
            .collect();
        Self::from_rows(rows)
    }
}

fn check_oracle_params(r: &ReducedParams) -> Result<()> {
    r.validate()
}

/// Hamiltonian matrix in the rotated (real) gauge.
pub fn build_hamiltonian(r: &ReducedParams, basis: &SpinPhotonBasis) -> Result<SparseSymmetric> {
    check_oracle_params(r)?;
    let big_n = basis.atom_number;
    let nf = big_n as f64;
    let coupling = r.y / nf.sqrt();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::with_capacity(5); basis.dimension()];
    for n in 0..=basis.n_max {
        for m in 0..=big_n {
            let i = basis.index(n, m);
            let (nn, mm) = (n as f64, m as f64);
            let diag = -r.delta_c * nn + r.omega_r * (mm - 0.5 * nf) + r.u * nn * mm / nf;
            rows[i].push((i, diag));
            if n < basis.n_max {
                let photon = (nn + 1.0).sqrt();
                // ⟨n+1, m±1| (a + a†) S_x |n, m⟩ with S_x = (S₊ + S₋)/2
                if m < big_n {
                    let j = basis.index(n + 1, m + 1);
                    let v = coupling * photon * 0.5 * raising(big_n, m).sqrt();
                    rows[i].push((j, v));
                    rows[j].push((i, v));
                }
                if m > 0 {
                    let j = basis.index(n + 1, m - 1);
                    let v = coupling * photon * 0.5 * raising(big_n, m - 1).sqrt();
                    rows[i].push((j, v));
                    rows[j].push((i, v));
                }
            }
        }
    }
    Ok(SparseSymmetric::from_rows(rows))
}

/// Dense Hermitian matrix of the Hamiltonian without the gauge rotation,
/// coupling `i y (a† − a) S_x/√N`. Only meant for small bases.
pub fn build_hamiltonian_ungauged(r: &ReducedParams, basis: &SpinPhotonBasis) -> Result<DMatrix<Complex64>> {
    check_oracle_params(r)?;
    if basis.dimension() > 4 * DENSE_LIMIT {
        return Err(Error::Resource(format!(
            "dense complex Hamiltonian limited to dimension {}",
            4 * DENSE_LIMIT
        )));
    }
    let big_n = basis.atom_number;
    let nf = big_n as f64;
    let dim = basis.dimension();
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    let coupling = r.y / nf.sqrt();
    for n in 0..=basis.n_max {
        for m in 0..=big_n {
            let i = basis.index(n, m);
            let (nn, mm) = (n as f64, m as f64);
            h[(i, i)] = Complex64::new(-r.delta_c * nn + r.omega_r * (mm - 0.5 * nf) + r.u * nn * mm / nf, 0.0);
            if n < basis.n_max {
                for (m2, sx) in [
                    (m + 1, if m < big_n { 0.5 * raising(big_n, m).sqrt() } else { 0.0 }),
                    (m.wrapping_sub(1), if m > 0 { 0.5 * raising(big_n, m - 1).sqrt() } else { 0.0 }),
                ] {
                    if sx == 0.0 {
                        continue;
                    }
                    let j = basis.index(n + 1, m2);
                    // ⟨n+1| i a† |n⟩ = i√(n+1); the adjoint element is −i√(n+1)
                    let v = Complex64::new(0.0, coupling * (nn + 1.0).sqrt() * sx);
                    h[(j, i)] += v;
                    h[(i, j)] += v.conj();
                }
            }
        }
    }
    Ok(h)
}

/// Lowest eigenvalues and the ground-state vector of one matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LowSpectrum {
    /// Ascending.
    pub energies: Vec<f64>,
    pub ground_state: DVector<f64>,
    /// Parity sector of the ground state.
    pub ground_parity: usize,
    /// Parity sector of each entry of `energies`.
    pub parities: Vec<usize>,
}

struct Eigenpairs {
    values: Vec<f64>,
    ground: DVector<f64>,
}

fn dense_lowest(h: &SparseSymmetric, count: usize) -> Eigenpairs {
    let eig = SymmetricEigen::new(h.to_dense());
    let mut order: Vec<usize> = (0..h.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    Eigenpairs {
        values: order.iter().take(count).map(|&k| eig.eigenvalues[k]).collect(),
        ground: eig.eigenvectors.column(order[0]).into_owned(),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lanczos with full reorthogonalization for the `count` lowest eigenvalues.
fn lanczos_lowest(h: &SparseSymmetric, count: usize) -> Result<Eigenpairs> {
    const CHECK_EVERY: usize = 20;
    let dim = h.dim();
    let max_iter = dim.min(3000);
    let mut start: Vec<f64> = (0..dim).map(|i| 1.0 + 0.5 * (1.7 * i as f64 + 0.3).sin()).collect();
    let norm = dot(&start, &start).sqrt();
    start.iter_mut().for_each(|v| *v /= norm);

    let mut basis: Vec<Vec<f64>> = vec![start];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; dim];
    let mut worst = f64::INFINITY;
    for j in 0..max_iter {
        h.mul_vec(&basis[j], &mut w);
        let a = dot(&basis[j], &w);
        alpha.push(a);
        for (wi, vi) in w.iter_mut().zip(&basis[j]) {
            *wi -= a * vi;
        }
        if j > 0 {
            let b = beta[j - 1];
            for (wi, vi) in w.iter_mut().zip(&basis[j - 1]) {
                *wi -= b * vi;
            }
        }
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= c * vi;
                }
            }
        }
        let b = dot(&w, &w).sqrt();
        let steps = j + 1;
        let exhausted = steps == max_iter;
        let scale = alpha.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let invariant = b < 1e-12 * scale;
        if steps >= count && (steps % CHECK_EVERY == 0 || exhausted || invariant) {
            let t = DMatrix::from_fn(steps, steps, |r, c| {
                if r == c {
                    alpha[r]
                } else if r + 1 == c {
                    beta[r]
                } else if c + 1 == r {
                    beta[c]
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(t);
            let mut order: Vec<usize> = (0..steps).collect();
            order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
            let wanted = count.min(steps);
            let ritz_scale = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
            worst = order
                .iter()
                .take(wanted)
                .map(|&k| b * eig.eigenvectors[(steps - 1, k)].abs() / ritz_scale)
                .fold(0.0, f64::max);
            if invariant || worst < 1e-11 {
                let s = eig.eigenvectors.column(order[0]);
                let mut ground = DVector::<f64>::zeros(dim);
                for (k, v) in basis.iter().enumerate().take(steps) {
                    for (g, vi) in ground.iter_mut().zip(v) {
                        *g += s[k] * vi;
                    }
                }
                let n = ground.norm();
                return Ok(Eigenpairs {
                    values: order.iter().take(wanted).map(|&k| eig.eigenvalues[k]).collect(),
                    ground: ground / n,
                });
            }
        }
        if exhausted {
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    Err(Error::Numerical(format!(
        "Lanczos did not converge in {max_iter} iterations (dimension {dim}, relative residual {worst:e})"
    )))
}

fn lowest(h: &SparseSymmetric, count: usize) -> Result<Eigenpairs> {
    if h.dim() <= DENSE_LIMIT {
        Ok(dense_lowest(h, count))
    } else {
        lanczos_lowest(h, count)
    }
}

/// Three lowest energies (across both parity sectors) and the ground state.
pub fn ground_state_solve(h: &SparseSymmetric, basis: &SpinPhotonBasis) -> Result<LowSpectrum> {
    if h.dim() != basis.dimension() {
        return Err(Error::Usage(format!(
            "matrix dimension {} does not match basis dimension {}",
            h.dim(),
            basis.dimension()
        )));
    }
    let mut levels: Vec<(f64, usize)> = Vec::new();
    let mut grounds: Vec<(f64, usize, DVector<f64>, Vec<usize>)> = Vec::new();
    for parity in 0..2 {
        let keep: Vec<usize> = (0..basis.dimension()).filter(|&i| basis.parity(i) == parity).collect();
        if keep.is_empty() {
            continue;
        }
        let sector = h.restrict(&keep);
        let pairs = lowest(&sector, 2)?;
        levels.extend(pairs.values.iter().map(|&e| (e, parity)));
        grounds.push((pairs.values[0], parity, pairs.ground, keep));
    }
    levels.sort_by(|a, b| a.0.total_cmp(&b.0));
    levels.truncate(3);
    let (_, ground_parity, vector, keep) = grounds
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .ok_or_else(|| Error::Internal("empty basis".into()))?;
    let mut ground_state = DVector::zeros(basis.dimension());
    for (k, &i) in keep.iter().enumerate() {
        ground_state[i] = vector[k];
    }
    Ok(LowSpectrum {
        energies: levels.iter().map(|l| l.0).collect(),
        parities: levels.iter().map(|l| l.1).collect(),
        ground_state,
        ground_parity,
    })
}

/// Photon cutoff policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub enum NmaxRule {
    /// max(40, ⌈8·Nα0² + 10·√(Nα0² + 1)⌉) with α0 from the mean field.
    #[default]
    Default,
    Fixed(usize),
}

impl NmaxRule {
    pub fn cutoff(&self, r: &ReducedParams, atom_number: usize) -> Result<usize> {
        match *self {
            NmaxRule::Fixed(n) => Ok(n),
            NmaxRule::Default => {
                let photons = atom_number as f64 * solve_displacements(r)?.alpha0_sq();
                let rule = (8.0 * photons + 10.0 * (photons + 1.0).sqrt()).ceil() as usize;
                Ok(rule.max(40))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EDResult {
    pub atom_number: usize,
    pub n_max: usize,
    pub dimension: usize,
    pub ground_energy: f64,
    /// E₁ − E₀.
    pub gap: f64,
    /// E₂ − E₀; above threshold, where E₀ and E₁ form a tunnelling doublet,
    /// this is the first genuine excitation.
    pub second_gap: f64,
    /// ⟨a†a⟩/N
    pub n_photon_per_n: f64,
    /// ⟨S_z⟩/N
    pub sz_per_n: f64,
    /// ⟨S_z⟩/N + 1/2, the finite-N counterpart of β0².
    pub order_param_beta2: f64,
    /// |⟨a⟩|, zero in a parity eigenstate.
    pub parity_expectation: f64,
    /// Doubling the cutoff moved the ground energy by less than
    /// [`CUTOFF_TOLERANCE`] relative.
    pub converged: bool,
}

/// Observables of a (real, gauged-frame) state vector.
pub fn observables(basis: &SpinPhotonBasis, psi: &DVector<f64>) -> (f64, f64, f64) {
    let mut photons = 0.0;
    let mut sz = 0.0;
    let mut field = 0.0;
    for (i, amp) in psi.iter().enumerate() {
        let p = amp * amp;
        let (n, m) = basis.state(i);
        photons += p * n as f64;
        sz += p * basis.sz(i);
        if n > 0 {
            field += psi[basis.index(n - 1, m)] * amp * (n as f64).sqrt();
        }
    }
    (photons, sz, field.abs())
}

/// Full oracle solve at one (N, y) with cutoff verification.
pub fn solve_ground_state(r: &ReducedParams, atom_number: usize, rule: NmaxRule) -> Result<EDResult> {
    let n_max = rule.cutoff(r, atom_number)?;
    let basis = SpinPhotonBasis::new(atom_number, n_max)?;
    let spectrum = ground_state_solve(&build_hamiltonian(r, &basis)?, &basis)?;
    let doubled = SpinPhotonBasis::new(atom_number, 2 * n_max)?;
    let check = ground_state_solve(&build_hamiltonian(r, &doubled)?, &doubled)?;

    let e0 = spectrum.energies[0];
    let converged = (check.energies[0] - e0).abs() < CUTOFF_TOLERANCE * e0.abs().max(f64::MIN_POSITIVE);
    let (photons, sz, field) = observables(&basis, &spectrum.ground_state);
    let nf = atom_number as f64;
    let level = |k: usize| spectrum.energies.get(k).copied().unwrap_or(f64::NAN);
    Ok(EDResult {
        atom_number,
        n_max,
        dimension: basis.dimension(),
        ground_energy: e0,
        gap: level(1) - e0,
        second_gap: level(2) - e0,
        n_photon_per_n: photons / nf,
        sz_per_n: sz / nf,
        order_param_beta2: sz / nf + 0.5,
        parity_expectation: field,
        converged,
    })
}

/// Linear fit `a + b/N` evaluated at 1/N → 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extrapolation {
    pub order_param_beta2: f64,
    pub n_photon_per_n: f64,
    pub energy_per_n: f64,
    /// Number of converged rows used.
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteSizeScan {
    pub rows: Vec<EDResult>,
    pub extrapolated: Option<Extrapolation>,
}

fn intercept(xs: &[f64], ys: &[f64]) -> f64 {
    let slope = crate::fluctuations::least_squares_slope(xs, ys);
    let n = xs.len() as f64;
    ys.iter().sum::<f64>() / n - slope * xs.iter().sum::<f64>() / n
}

/// Fits the converged rows (at least two) linearly in 1/N.
pub fn extrapolate(rows: &[EDResult]) -> Option<Extrapolation> {
    let good: Vec<&EDResult> = rows.iter().filter(|row| row.converged).collect();
    if good.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = good.iter().map(|row| 1.0 / row.atom_number as f64).collect();
    let pick = |f: fn(&EDResult) -> f64| intercept(&xs, &good.iter().map(|row| f(row)).collect::<Vec<_>>());
    Some(Extrapolation {
        order_param_beta2: pick(|row| row.order_param_beta2),
        n_photon_per_n: pick(|row| row.n_photon_per_n),
        energy_per_n: pick(|row| row.ground_energy / row.atom_number as f64),
        points: good.len(),
    })
}

/// ED at each N of `atom_numbers` with u, y held fixed.
pub fn finite_size_scan(r: &ReducedParams, atom_numbers: &[usize], rule: NmaxRule) -> Result<FiniteSizeScan> {
    if atom_numbers.is_empty() {
        return Err(Error::Usage("atom-number list is empty".into()));
    }
    let rows = crate::sweep::map_ordered(atom_numbers, crate::sweep::Execution::default(), |&n| {
        solve_ground_state(r, n, rule)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let extrapolated = extrapolate(&rows);
    Ok(FiniteSizeScan { rows, extrapolated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluctuations::{coefficients_at, eigenfrequencies};

    fn fig(y: f64) -> ReducedParams {
        ReducedParams::figure_defaults(y)
    }

    #[test]
    fn basis_indexing() {
        let b = SpinPhotonBasis::new(4, 3).unwrap();
        assert_eq!(b.dimension(), 20);
        for i in 0..b.dimension() {
            let (n, m) = b.state(i);
            assert_eq!(b.index(n, m), i);
        }
        assert_eq!(b.sz(b.index(2, 0)), -2.0);
        assert!(SpinPhotonBasis::new(0, 3).is_err());
        assert!(matches!(SpinPhotonBasis::new(1000, 1000), Err(Error::Resource(_))));
    }

    #[test]
    fn hamiltonian_structure() {
        let b = SpinPhotonBasis::new(6, 8).unwrap();
        let h = build_hamiltonian(&fig(14.0), &b).unwrap();
        assert!(h.is_symmetric());
        // couplings only between (n, m) and (n ± 1, m ± 1): particle number
        // is conserved and parity (−1)^(n+m) with it
        for i in 0..h.dim() {
            let (n, m) = b.state(i);
            for (j, _) in h.row(i) {
                if j == i {
                    continue;
                }
                let (n2, m2) = b.state(j);
                assert_eq!(n.abs_diff(n2), 1);
                assert_eq!(m.abs_diff(m2), 1);
            }
        }
    }

    #[test]
    fn decoupled_spectrum() {
        for n in [3, 10, 25] {
            let b = SpinPhotonBasis::new(n, 12).unwrap();
            let h = build_hamiltonian(&fig(0.0), &b).unwrap();
            assert!((0..h.dim()).all(|i| h.row(i).all(|(j, _)| j == i)));
            let s = ground_state_solve(&h, &b).unwrap();
            assert!((s.energies[0] + 0.5 * n as f64).abs() < 1e-12);
            assert!((s.energies[1] - s.energies[0] - 1.0).abs() < 1e-12);
            assert!((s.ground_state[b.index(0, 0)].abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_atom_matches_direct_construction() {
        // N = 1: spin-½ with S = σ/2, built with Kronecker products
        let r = fig(7.0);
        let nmax = 30;
        let b = SpinPhotonBasis::new(1, nmax).unwrap();
        let ours = SymmetricEigen::new(build_hamiltonian(&r, &b).unwrap().to_dense());

        let d = nmax + 1;
        let mut a = DMatrix::<f64>::zeros(d, d);
        for n in 1..d {
            a[(n - 1, n)] = (n as f64).sqrt();
        }
        let num = a.transpose() * &a;
        let sz = DMatrix::from_row_slice(2, 2, &[-0.5, 0.0, 0.0, 0.5]);
        let sx = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]);
        let id2 = DMatrix::<f64>::identity(2, 2);
        let idp = DMatrix::<f64>::identity(d, d);
        let h = num.kronecker(&id2) * (-r.delta_c)
            + idp.kronecker(&sz) * r.omega_r
            + (&a + a.transpose()).kronecker(&sx) * r.y
            + num.kronecker(&(id2.clone() * 0.5 + sz)) * r.u;
        let direct = SymmetricEigen::new(h);
        let mut x: Vec<f64> = ours.eigenvalues.iter().copied().collect();
        let mut y: Vec<f64> = direct.eigenvalues.iter().copied().collect();
        x.sort_by(f64::total_cmp);
        y.sort_by(f64::total_cmp);
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-9 * (1.0 + q.abs()));
        }
    }

    #[test]
    fn gauge_invariance() {
        let r = fig(16.0);
        let b = SpinPhotonBasis::new(5, 14).unwrap();
        let real = ground_state_solve(&build_hamiltonian(&r, &b).unwrap(), &b).unwrap();
        let complex = SymmetricEigen::new(build_hamiltonian_ungauged(&r, &b).unwrap());
        let mut order: Vec<usize> = (0..b.dimension()).collect();
        order.sort_by(|&i, &j| complex.eigenvalues[i].total_cmp(&complex.eigenvalues[j]));
        for k in 0..3 {
            assert!((complex.eigenvalues[order[k]] - real.energies[k]).abs() < 1e-10);
        }
        // the ungauged ground state is unique only up to the doublet, so
        // compare expectation values of the gauge-invariant observables on
        // each parity-projected ground state
        let psi = complex.eigenvectors.column(order[0]);
        let (mut photons, mut sz) = (0.0, 0.0);
        for i in 0..b.dimension() {
            let p = psi[i].norm_sqr();
            photons += p * b.state(i).0 as f64;
            sz += p * b.sz(i);
        }
        let (p_real, sz_real, _) = observables(&b, &real.ground_state);
        if real.energies[1] - real.energies[0] > 1e-6 {
            assert!((photons - p_real).abs() < 1e-10);
            assert!((sz - sz_real).abs() < 1e-10);
        }
    }

    #[test]
    fn gauge_invariance_below_threshold() {
        let r = fig(6.0);
        let b = SpinPhotonBasis::new(6, 12).unwrap();
        let real = ground_state_solve(&build_hamiltonian(&r, &b).unwrap(), &b).unwrap();
        let complex = SymmetricEigen::new(build_hamiltonian_ungauged(&r, &b).unwrap());
        let k = complex.eigenvalues.imin();
        let psi = complex.eigenvectors.column(k);
        let (mut photons, mut sz, mut field) = (0.0, 0.0, Complex64::new(0.0, 0.0));
        for i in 0..b.dimension() {
            let (n, m) = b.state(i);
            photons += psi[i].norm_sqr() * n as f64;
            sz += psi[i].norm_sqr() * b.sz(i);
            if n > 0 {
                field += psi[b.index(n - 1, m)].conj() * psi[i] * (n as f64).sqrt();
            }
        }
        let (p_real, sz_real, f_real) = observables(&b, &real.ground_state);
        assert!((complex.eigenvalues[k] - real.energies[0]).abs() < 1e-10);
        assert!((photons - p_real).abs() < 1e-10);
        assert!((sz - sz_real).abs() < 1e-10);
        assert!((field.norm() - f_real).abs() < 1e-10);
    }

    #[test]
    fn lanczos_agrees_with_dense() {
        let r = fig(18.0);
        let b = SpinPhotonBasis::new(30, 40).unwrap();
        let h = build_hamiltonian(&r, &b).unwrap();
        let keep: Vec<usize> = (0..b.dimension()).filter(|&i| b.parity(i) == 0).collect();
        let sector = h.restrict(&keep);
        assert!(sector.dim() > DENSE_LIMIT);
        let l = lanczos_lowest(&sector, 2).unwrap();
        let d = dense_lowest(&sector, 2);
        for k in 0..2 {
            assert!((l.values[k] - d.values[k]).abs() < 1e-9 * d.values[k].abs());
        }
        assert!((l.ground.dot(&d.ground).abs() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn decoupled_oracle_gap() {
        let res = solve_ground_state(&fig(0.0), 20, NmaxRule::Default).unwrap();
        assert!(res.converged);
        assert!((res.gap - 1.0).abs() < 1e-8);
        assert_eq!(res.n_max, 40);
    }

    #[test]
    fn symmetric_ground_state_above_threshold() {
        let res = solve_ground_state(&fig(20.0), 12, NmaxRule::Default).unwrap();
        assert!(res.parity_expectation < 1e-8);
        assert!((0.0..=1.0).contains(&res.order_param_beta2));
        assert!(res.order_param_beta2 > 0.2);
        // tunnelling doublet well below the next excitation
        assert!(res.gap < 0.1 * res.second_gap);
    }

    #[test]
    fn variational_bound() {
        // product of a coherent photon state and a spin coherent state at the
        // mean-field amplitudes, evaluated directly on the matrix
        for y in [6.0, 15.0, 20.0] {
            let r = fig(y);
            let n_atoms = 10;
            let s = solve_displacements(&r).unwrap();
            let b = SpinPhotonBasis::new(n_atoms, 40).unwrap();
            let h = build_hamiltonian(&r, &b).unwrap();
            let amp = (n_atoms as f64).sqrt() * s.alpha0;
            let (c1, c0) = (s.beta0, (1.0 - s.beta0_sq()).sqrt());
            let mut psi = vec![0.0; b.dimension()];
            let mut photon = (-0.5 * amp * amp).exp();
            for n in 0..=b.n_max {
                if n > 0 {
                    photon *= amp / (n as f64).sqrt();
                }
                let mut binom = 1.0f64;
                for m in 0..=n_atoms {
                    if m > 0 {
                        binom *= (n_atoms - m + 1) as f64 / m as f64;
                    }
                    let spin = binom.sqrt() * c1.powi(m as i32) * c0.powi((n_atoms - m) as i32);
                    psi[b.index(n, m)] = photon * spin;
                }
            }
            let mut hpsi = vec![0.0; b.dimension()];
            h.mul_vec(&psi, &mut hpsi);
            let norm = dot(&psi, &psi);
            let product = dot(&psi, &hpsi) / norm;
            let nf = n_atoms as f64;
            let closed = nf
                * (-r.delta_c * s.alpha0_sq() + r.omega_r * (s.beta0_sq() - 0.5)
                    + 2.0 * r.y * s.alpha0 * s.beta0 * c0
                    + r.u * s.alpha0_sq() * s.beta0_sq());
            assert!((product - closed).abs() < 1e-9 * closed.abs());
            let ed = ground_state_solve(&h, &b).unwrap().energies[0];
            assert!(ed <= product + 1e-12, "y = {y}: {ed} > {product}");
        }
    }

    #[test]
    fn cutoff_rule() {
        assert_eq!(NmaxRule::Default.cutoff(&fig(5.0), 40).unwrap(), 40);
        let big = NmaxRule::Default.cutoff(&fig(30.0), 400).unwrap();
        let photons = 400.0 * solve_displacements(&fig(30.0)).unwrap().alpha0_sq();
        assert_eq!(big, (8.0 * photons + 10.0 * (photons + 1.0).sqrt()).ceil() as usize);
        assert_eq!(NmaxRule::Fixed(7).cutoff(&fig(30.0), 400).unwrap(), 7);
    }

    #[test]
    fn gap_approaches_soft_mode_below_threshold() {
        let r = fig(6.0);
        let omega = eigenfrequencies(&coefficients_at(&r).unwrap().1).omega_minus;
        let scan = finite_size_scan(&r, &[8, 16, 32], NmaxRule::Default).unwrap();
        let errs: Vec<f64> = scan.rows.iter().map(|row| (row.gap - omega).abs()).collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
        assert!(scan.extrapolated.unwrap().points == 3);
    }

    #[test]
    fn empty_scan_is_usage_error() {
        assert!(matches!(
            finite_size_scan(&fig(6.0), &[], NmaxRule::Default),
            Err(Error::Usage(_))
        ));
    }
}
