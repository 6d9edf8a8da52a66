//! Numerical diagonalization of the Hamiltonian by cyclic complex Jacobi
//! rotations, and spin/branch labeling of the resulting eigenvectors.
//!
//! Nothing here evaluates the closed-form spectrum; agreement between the two
//! is the cross-check.

use num_complex::Complex64;

use crate::dirac::{build_hamiltonian, hermiticity_defect, ComplexMatrix4, DiracBasis, Vector4};
use crate::error::{Error, Result};
use crate::quantities::NaturalParams;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub const MAX_SWEEPS: usize = 100;
pub const CONVERGENCE_TOL: f64 = 1e-14;
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Relative width of an eigenvalue cluster treated as one degenerate subspace.
pub const CLUSTER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    /// Ascending.
    pub eigenvalues: [f64; 4],
    /// `eigenvectors[k]` belongs to `eigenvalues[k]`.
    pub eigenvectors: [Vector4; 4],
    /// max_k ‖H v_k − λ_k v_k‖.
    pub residual: f64,
}

impl EigenSystem {
    /// V·diag(λ)·V†.
    pub fn reconstruct(&self) -> ComplexMatrix4 {
        let mut m = ComplexMatrix4::zeros();
        for (lambda, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            for i in 0..4 {
                for j in 0..4 {
                    m[(i, j)] += v[i] * v[j].conj() * lambda;
                }
            }
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    Negative,
    Positive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Spin {
    Down,
    Up,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledLevel {
    pub energy: f64,
    pub branch: Branch,
    pub spin: Spin,
    pub sigma_x_expectation: f64,
    pub vector: Vector4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSpectrum {
    /// Ascending in energy.
    pub entries: [LabeledLevel; 4],
}

impl LabeledSpectrum {
    pub fn energy(&self, branch: Branch, spin: Spin) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.branch == branch && e.spin == spin)
            .map(|e| e.energy)
    }
}

fn dot<const N: usize>(a: &[Complex64; N], b: &[Complex64; N]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn off_diagonal_norm<const N: usize>(a: &[[Complex64; N]; N]) -> f64 {
    let mut s = 0.0;
    for (i, row) in a.iter().enumerate() {
        for (j, z) in row.iter().enumerate() {
            if i != j {
                s += z.norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi on an N×N Hermitian matrix. Returns the (unsorted) diagonal
/// and the accumulated unitary whose columns are the eigenvectors.
fn jacobi_hermitian<const N: usize>(
    mut a: [[Complex64; N]; N],
) -> Result<([f64; N], [[Complex64; N]; N])> {
    let mut v = [[ZERO; N]; N];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = ONE;
    }
    let norm = a.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !norm.is_finite() {
        return Err(Error::NoConvergence(f64::NAN));
    }
    let target = CONVERGENCE_TOL * norm;

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= target {
            break;
        }
        if sweeps == MAX_SWEEPS || !off.is_finite() {
            return Err(Error::NoConvergence(off));
        }
        sweeps += 1;
        for p in 0..N {
            for q in p + 1..N {
                let z = a[p][q];
                let mag = z.norm();
                if mag == 0.0 {
                    continue;
                }
                // Phase e^{iφ} = z/|z| makes the pivot real; then a real
                // rotation by θ with tan 2θ = 2|z|/(a_qq − a_pp) zeroes it.
                let phase = z / mag;
                let app = a[p][p].re;
                let aqq = a[q][q].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G = [[c, s], [−s·e^{−iφ}, c·e^{−iφ}]] on the (p, q) plane.
                let g_pp = Complex64::new(c, 0.0);
                let g_pq = Complex64::new(s, 0.0);
                let g_qp = -phase.conj() * s;
                let g_qq = phase.conj() * c;

                // A ← A·G
                for row in a.iter_mut() {
                    let (xp, xq) = (row[p], row[q]);
                    row[p] = xp * g_pp + xq * g_qp;
                    row[q] = xp * g_pq + xq * g_qq;
                }
                // A ← G†·A
                #[allow(clippy::needless_range_loop)]
                for k in 0..N {
                    let (xp, xq) = (a[p][k], a[q][k]);
                    a[p][k] = g_pp.conj() * xp + g_qp.conj() * xq;
                    a[q][k] = g_pq.conj() * xp + g_qq.conj() * xq;
                }
                a[p][q] = ZERO;
                a[q][p] = ZERO;
                a[p][p] = Complex64::new(app - t * mag, 0.0);
                a[q][q] = Complex64::new(aqq + t * mag, 0.0);
                // V ← V·G
                for row in v.iter_mut() {
                    let (xp, xq) = (row[p], row[q]);
                    row[p] = xp * g_pp + xq * g_qp;
                    row[q] = xp * g_pq + xq * g_qq;
                }
            }
        }
    }

    let mut diag = [0.0; N];
    for (i, d) in diag.iter_mut().enumerate() {
        *d = a[i][i].re;
    }
    Ok((diag, v))
}

fn column<const N: usize>(v: &[[Complex64; N]; N], k: usize) -> [Complex64; N] {
    let mut c = [ZERO; N];
    for (i, x) in c.iter_mut().enumerate() {
        *x = v[i][k];
    }
    c
}

/// Full eigendecomposition of a Hermitian 4×4 matrix.
pub fn diagonalize(h: &ComplexMatrix4) -> Result<EigenSystem> {
    if !h.is_finite() {
        return Err(Error::NonFiniteInput("matrix"));
    }
    let defect = hermiticity_defect(h);
    if defect >= HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let (diag, v) = jacobi_hermitian(h.0)?;

    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let eigenvalues = order.map(|k| diag[k]);
    let eigenvectors = order.map(|k| column(&v, k));

    let residual = eigenvalues
        .iter()
        .zip(&eigenvectors)
        .map(|(&lambda, x)| {
            let hx = h.mul_vec(x);
            hx.iter().zip(x).map(|(a, b)| (a - b * lambda).norm_sqr()).sum::<f64>().sqrt()
        })
        .fold(0.0, f64::max);

    Ok(EigenSystem { eigenvalues, eigenvectors, residual })
}

/// Groups ascending eigenvalues whose neighbours differ by at most `width`.
fn clusters(values: &[f64; 4], width: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=4 {
        if k == 4 || values[k] - values[k - 1] > width {
            out.push(start..k);
            start = k;
        }
    }
    out
}

/// Labels each eigenvector by spin (sign of ⟨Σ_x⟩) and branch.
///
/// Degenerate subspaces are first rotated onto Σ_x eigenvectors, then each
/// vector is projected onto its Σ_x sector; `sigma_x_expectation` is the
/// value before projection. Within each
/// spin sector the energies form a ± pair, so the higher level of a sector is
/// the positive branch; this also settles the zero-energy levels at
/// η̃ = 0, |δ̃| = 1.
pub fn classify_spin(es: &EigenSystem, basis: &DiracBasis, tol: f64) -> Result<LabeledSpectrum> {
    let scale = 1.0 + es.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut vectors = es.eigenvectors;
    let mut sigma = [0.0; 4];

    for range in clusters(&es.eigenvalues, tol * scale) {
        let members: Vec<usize> = range.collect();
        let (rotated, expectations) = rotate_onto_sigma(&members.iter().map(|&k| vectors[k]).collect::<Vec<_>>(), basis)?;
        for ((&k, v), s) in members.iter().zip(rotated).zip(expectations) {
            vectors[k] = v;
            sigma[k] = s;
        }
    }

    for (k, s) in sigma.iter().enumerate() {
        if s.abs() < 1.0 - 1e-6 {
            return Err(Error::AmbiguousLabeling(format!(
                "<Sigma_x> = {s} for level {} (E = {})",
                k, es.eigenvalues[k]
            )));
        }
        vectors[k] = project_onto_sector(&vectors[k], s.signum(), basis);
    }

    let spin_of = |s: f64| if s > 0.0 { Spin::Up } else { Spin::Down };
    let mut branch = [Branch::Negative; 4];
    for spin in [Spin::Down, Spin::Up] {
        let sector: Vec<usize> = (0..4).filter(|&k| spin_of(sigma[k]) == spin).collect();
        if sector.len() != 2 {
            return Err(Error::AmbiguousLabeling(format!(
                "spin sector {spin:?} holds {} levels, expected 2",
                sector.len()
            )));
        }
        // Ascending order: the second member is the upper level.
        branch[sector[1]] = Branch::Positive;
    }

    let entries = std::array::from_fn(|k| LabeledLevel {
        energy: es.eigenvalues[k],
        branch: branch[k],
        spin: spin_of(sigma[k]),
        sigma_x_expectation: sigma[k],
        vector: vectors[k],
    });
    Ok(LabeledSpectrum { entries })
}

/// Normalized (1 + sign·Σ_x)v/2. H commutes with Σ_x, so this only strips
/// the wrong-sector component left by rounding (≈ eps·‖H‖/gap when the spin
/// partner is close but outside the cluster width) and never raises the
/// residual.
fn project_onto_sector(v: &Vector4, sign: f64, basis: &DiracBasis) -> Vector4 {
    let sv = basis.sigma_x_big.mul_vec(v);
    let mut out = [ZERO; 4];
    for ((o, a), b) in out.iter_mut().zip(v).zip(&sv) {
        *o = (a + b * sign) * 0.5;
    }
    let norm = dot(&out, &out).re.sqrt();
    out.map(|z| z / norm)
}

/// Diagonalizes Σ_x restricted to span(vs) and returns the rotated vectors
/// together with their Σ_x expectation values.
fn rotate_onto_sigma(vs: &[Vector4], basis: &DiracBasis) -> Result<(Vec<Vector4>, Vec<f64>)> {
    let sv: Vec<Vector4> = vs.iter().map(|v| basis.sigma_x_big.mul_vec(v)).collect();
    match vs.len() {
        1 => Ok((vs.to_vec(), vec![dot(&vs[0], &sv[0]).re])),
        2 => rotate_block::<2>(vs, &sv),
        3 => rotate_block::<3>(vs, &sv),
        4 => rotate_block::<4>(vs, &sv),
        n => unreachable!("cluster of size {n}"),
    }
}

fn rotate_block<const N: usize>(vs: &[Vector4], sv: &[Vector4]) -> Result<(Vec<Vector4>, Vec<f64>)> {
    let m: [[Complex64; N]; N] = std::array::from_fn(|i| std::array::from_fn(|j| dot(&vs[i], &sv[j])));
    let (vals, w) = jacobi_hermitian(m)?;
    let rotated = (0..N)
        .map(|k| {
            let mut out = [ZERO; 4];
            for (i, v) in vs.iter().enumerate() {
                for (o, x) in out.iter_mut().zip(v) {
                    *o += x * w[i][k];
                }
            }
            out
        })
        .collect();
    Ok((rotated, vals.to_vec()))
}

/// E(+, ↑) − E(+, ↓) from the labeled numerical spectrum.
pub fn splitting_numeric(np: &NaturalParams, basis: &DiracBasis) -> Result<f64> {
    let h = build_hamiltonian(np)?;
    let labeled = classify_spin(&diagonalize(&h)?, basis, CLUSTER_TOL)?;
    let up = labeled.energy(Branch::Positive, Spin::Up);
    let down = labeled.energy(Branch::Positive, Spin::Down);
    match (up, down) {
        (Some(u), Some(d)) => Ok(u - d),
        _ => Err(Error::AmbiguousLabeling("positive branch incomplete".into())),
    }
}
