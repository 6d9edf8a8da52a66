//! Dense 4×4 complex matrices, the Dirac matrices in the standard
//! representation, and the Hamiltonian in natural units.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quantities::NaturalParams;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub type Vector4 = [Complex64; 4];

/// Row-major 4×4 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexMatrix4(pub [[Complex64; 4]; 4]);

impl ComplexMatrix4 {
    pub const fn zeros() -> Self {
        Self([[ZERO; 4]; 4])
    }

    pub fn identity() -> Self {
        Self::from_diagonal([ONE; 4])
    }

    pub fn from_diagonal(d: [Complex64; 4]) -> Self {
        let mut m = Self::zeros();
        for (i, v) in d.into_iter().enumerate() {
            m.0[i][i] = v;
        }
        m
    }

    pub fn from_real_diagonal(d: [f64; 4]) -> Self {
        Self::from_diagonal(d.map(|x| Complex64::new(x, 0.0)))
    }

    /// Builds `[[0, a], [b, 0]]` from 2×2 blocks.
    fn off_diagonal_blocks(a: [[Complex64; 2]; 2], b: [[Complex64; 2]; 2]) -> Self {
        let mut m = Self::zeros();
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j + 2] = a[i][j];
                m.0[i + 2][j] = b[i][j];
            }
        }
        m
    }

    /// Builds `[[a, 0], [0, b]]` from 2×2 blocks.
    fn diagonal_blocks(a: [[Complex64; 2]; 2], b: [[Complex64; 2]; 2]) -> Self {
        let mut m = Self::zeros();
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j] = a[i][j];
                m.0[i + 2][j + 2] = b[i][j];
            }
        }
        m
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(self.0.map(|row| row.map(|x| x * s)))
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self(self.0.map(|row| row.map(|x| x * s)))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] = self.0[j][i].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> Complex64 {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        *self * *other + *other * *self
    }

    pub fn mul_vec(&self, v: &Vector4) -> Vector4 {
        let mut out = [ZERO; 4];
        for (o, row) in out.iter_mut().zip(&self.0) {
            *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        out
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest entrywise |a − b|.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (*self - *other).max_abs()
    }
}

impl Index<(usize, usize)> for ComplexMatrix4 {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix4 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.0[i][j]
    }
}

impl Add for ComplexMatrix4 {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().flatten().zip(rhs.0.iter().flatten()) {
            *a += b;
        }
        self
    }
}

impl Sub for ComplexMatrix4 {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().flatten().zip(rhs.0.iter().flatten()) {
            *a -= b;
        }
        self
    }
}

impl Neg for ComplexMatrix4 {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale_real(-1.0)
    }
}

impl Mul for ComplexMatrix4 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut m = Self::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] = (0..4).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        m
    }
}

/// Max entrywise magnitude of the anti-Hermitian part (M − M†)/2.
pub fn hermiticity_defect(m: &ComplexMatrix4) -> f64 {
    (*m - m.adjoint()).scale_real(0.5).max_abs()
}

pub fn pauli_x() -> [[Complex64; 2]; 2] {
    [[ZERO, ONE], [ONE, ZERO]]
}

pub fn pauli_y() -> [[Complex64; 2]; 2] {
    [[ZERO, -I], [I, ZERO]]
}

pub fn pauli_z() -> [[Complex64; 2]; 2] {
    [[ONE, ZERO], [ZERO, -ONE]]
}

/// α_k = [[0, σ_k], [σ_k, 0]] in the standard representation.
pub fn alpha(sigma: [[Complex64; 2]; 2]) -> ComplexMatrix4 {
    ComplexMatrix4::off_diagonal_blocks(sigma, sigma)
}

/// The generators needed along x: α_x, β and Σ_x = 2S_x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracBasis {
    pub alpha_x: ComplexMatrix4,
    pub beta: ComplexMatrix4,
    pub sigma_x_big: ComplexMatrix4,
}

impl DiracBasis {
    /// iβα_x, the matrix multiplying cπ.
    pub fn i_beta_alpha(&self) -> ComplexMatrix4 {
        (self.beta * self.alpha_x).scale(I)
    }

    /// βΣ_x = 2βS_x, the matrix multiplying δ.
    pub fn beta_sigma(&self) -> ComplexMatrix4 {
        self.beta * self.sigma_x_big
    }
}

/// Standard (Dirac) representation: β = diag(1, 1, −1, −1), α_x with Pauli-x
/// off-diagonal blocks, Σ_x with Pauli-x diagonal blocks.
pub fn standard_basis() -> DiracBasis {
    DiracBasis {
        alpha_x: alpha(pauli_x()),
        beta: ComplexMatrix4::from_real_diagonal([1.0, 1.0, -1.0, -1.0]),
        sigma_x_big: ComplexMatrix4::diagonal_blocks(pauli_x(), pauli_x()),
    }
}

/// H̃ = p̃·α_x + β + π̃·(iβα_x) + δ̃·(βΣ_x), energies in units of mc².
pub fn build_hamiltonian(np: &NaturalParams) -> Result<ComplexMatrix4> {
    if !np.is_finite() {
        return Err(Error::NonFiniteInput("natural params"));
    }
    Ok(hamiltonian_in(&standard_basis(), np))
}

pub fn hamiltonian_in(basis: &DiracBasis, np: &NaturalParams) -> ComplexMatrix4 {
    basis.alpha_x.scale_real(np.p_tilde())
        + basis.beta
        + basis.i_beta_alpha().scale_real(np.pi_tilde())
        + basis.beta_sigma().scale_real(np.delta_tilde())
}
