//! Dense complex operators, state vectors and density matrices.
//!
//! Everything downstream (level schemes, drives, integrators, cavity models)
//! is built on these three types. All Hamiltonian-valued operators carry
//! entries in angular frequency (rad/s) unless a function documents otherwise.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Dense complex square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    mat: Array2<C64>,
}

impl Operator {
    /// Wrap a square matrix. Rejects non-square shapes and non-finite entries.
    pub fn new(mat: Array2<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "operator must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter(
                "operator entries must be finite".into(),
            ));
        }
        Ok(Self { mat })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: Array2::zeros((dim, dim)),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: Array2::eye(dim),
        }
    }

    /// Diagonal operator from real entries (rad/s for Hamiltonians).
    pub fn from_diag(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut mat = Array2::zeros((dim, dim));
        for (i, &d) in diag.iter().enumerate() {
            mat[(i, i)] = C64::new(d, 0.0);
        }
        Self { mat }
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        Self {
            mat: Array2::from_shape_fn((dim, dim), |(i, j)| f(i, j)),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn mat_mut(&mut self) -> &mut Array2<C64> {
        &mut self.mat
    }

    pub fn into_mat(self) -> Array2<C64> {
        self.mat
    }

    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.mat[(i, j)] = v;
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let mut out = Array2::zeros((self.dim(), self.dim()));
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                out[(i, j)] = self.mat[(j, i)].conj();
            }
        }
        Self { mat: out }
    }

    /// Largest entry magnitude, max_ij |A_ij|.
    pub fn max_abs(&self) -> f64 {
        self.mat.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn fro_norm(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// max_ij |A - A†|_ij.
    pub fn herm_residual(&self) -> f64 {
        let mut r = 0.0f64;
        for i in 0..self.dim() {
            for j in i..self.dim() {
                r = r.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        r
    }

    /// Hermitian check relative to the matrix scale: max|A − A†| ≤ tol·max(1, max|A|).
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.herm_residual() <= tol * self.max_abs().max(1.0)
    }

    /// max_ij |U†U − I|_ij.
    pub fn unitarity_residual(&self) -> f64 {
        let p = self.dagger().matmul(self).expect("square");
        let mut r = 0.0f64;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let expect = if i == j {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                };
                r = r.max((p.mat[(i, j)] - expect).norm());
            }
        }
        r
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.mat[(i, i)]).sum()
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            mat: self.mat.mapv(|z| z * s),
        }
    }

    pub fn scaled_re(&self, s: f64) -> Self {
        self.scaled(C64::new(s, 0.0))
    }

    /// (A + A†)/2.
    pub fn hermitized(&self) -> Self {
        let d = self.dagger();
        Self {
            mat: (&self.mat + &d.mat).mapv(|z| 0.5 * z),
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "matmul of {}-dim with {}-dim operator",
                self.dim(),
                other.dim()
            )));
        }
        Ok(Self {
            mat: self.mat.dot(&other.mat),
        })
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        if self.dim() != v.dim() {
            return Err(Error::DimensionMismatch(format!(
                "operator dim {} applied to vector dim {}",
                self.dim(),
                v.dim()
            )));
        }
        Ok(StateVector {
            vec: self.mat.dot(&v.vec),
        })
    }

    /// Restrict to the rows/columns listed in `idx` (in the given order).
    pub fn restricted(&self, idx: &[usize]) -> Self {
        let n = idx.len();
        Self {
            mat: Array2::from_shape_fn((n, n), |(i, j)| self.mat[(idx[i], idx[j])]),
        }
    }

    /// Embed an operator acting on the sublevels `idx` into a `dim`-dimensional space.
    pub fn embedded(&self, dim: usize, idx: &[usize]) -> Self {
        let mut mat = Array2::zeros((dim, dim));
        for (i, &gi) in idx.iter().enumerate() {
            for (j, &gj) in idx.iter().enumerate() {
                mat[(gi, gj)] = self.mat[(i, j)];
            }
        }
        Self { mat }
    }
}

impl std::ops::Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator {
            mat: &self.mat + &rhs.mat,
        }
    }
}

impl std::ops::Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator {
            mat: &self.mat - &rhs.mat,
        }
    }
}

impl std::ops::Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator {
            mat: self.mat.dot(&rhs.mat),
        }
    }
}

/// Complex state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    vec: Array1<C64>,
}

impl StateVector {
    pub fn new(vec: Array1<C64>) -> Result<Self> {
        if vec.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter(
                "state amplitudes must be finite".into(),
            ));
        }
        Ok(Self { vec })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            vec: Array1::zeros(dim),
        }
    }

    /// Unit basis vector e_k.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut vec = Array1::zeros(dim);
        vec[k] = C64::new(1.0, 0.0);
        Self { vec }
    }

    pub fn from_slice(amps: &[C64]) -> Self {
        Self {
            vec: Array1::from(amps.to_vec()),
        }
    }

    pub fn dim(&self) -> usize {
        self.vec.len()
    }

    pub fn vec(&self) -> &Array1<C64> {
        &self.vec
    }

    pub fn vec_mut(&mut self) -> &mut Array1<C64> {
        &mut self.vec
    }

    pub fn amp(&self, i: usize) -> C64 {
        self.vec[i]
    }

    pub fn norm(&self) -> f64 {
        self.vec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    /// ⟨self|other⟩ (conjugate-linear in self).
    pub fn dot(&self, other: &Self) -> C64 {
        self.vec
            .iter()
            .zip(other.vec.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self {
            vec: self.vec.mapv(|z| z / n),
        }
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            vec: self.vec.mapv(|z| z * s),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            vec: &self.vec + &other.vec,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            vec: &self.vec - &other.vec,
        }
    }
}

/// Density matrix; Hermitian, unit trace, positive within tolerances.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: Array2<C64>,
}

impl DensityMatrix {
    pub fn new(mat: Array2<C64>) -> Result<Self> {
        let op = Operator::new(mat)?;
        Ok(Self { mat: op.mat })
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        let dim = psi.dim();
        let mat = Array2::from_shape_fn((dim, dim), |(i, j)| psi.amp(i) * psi.amp(j).conj());
        Self { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn into_operator(self) -> Operator {
        Operator { mat: self.mat }
    }

    pub fn as_operator(&self) -> Operator {
        Operator {
            mat: self.mat.clone(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.mat[(i, i)]).sum()
    }

    pub fn population(&self, i: usize) -> f64 {
        self.mat[(i, i)].re
    }

    /// ⟨a|ρ|b⟩.
    pub fn coherence(&self, a: &StateVector, b: &StateVector) -> C64 {
        let rho_b = Operator {
            mat: self.mat.clone(),
        }
        .apply(b)
        .expect("dims");
        a.dot(&rho_b)
    }

    pub fn herm_residual(&self) -> f64 {
        Operator {
            mat: self.mat.clone(),
        }
        .herm_residual()
    }

    /// ⟨ψ|ρ|ψ⟩ for a pure target.
    pub fn fidelity_pure(&self, psi: &StateVector) -> f64 {
        self.coherence(psi, psi).re
    }
}

/// |a⟩⟨b|.
pub fn outer(a: &StateVector, b: &StateVector) -> Operator {
    let mat = Array2::from_shape_fn((a.dim(), b.dim()), |(i, j)| a.amp(i) * b.amp(j).conj());
    Operator { mat }
}

/// Orthogonal projector onto the span of the given (orthonormal) states.
pub fn projector(states: &[StateVector]) -> Operator {
    let dim = states[0].dim();
    let mut p = Operator::zeros(dim);
    for s in states {
        p = &p + &outer(s, s);
    }
    p
}

/// Kronecker product; dimensions multiply.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    let (da, db) = (a.dim(), b.dim());
    let mut mat = Array2::zeros((da * db, da * db));
    for i in 0..da {
        for j in 0..da {
            let aij = a.mat[(i, j)];
            if aij == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..db {
                for l in 0..db {
                    mat[(i * db + k, j * db + l)] = aij * b.mat[(k, l)];
                }
            }
        }
    }
    Operator { mat }
}

/// [A, B] = AB − BA.
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    let ab = a.matmul(b)?;
    let ba = b.matmul(a)?;
    Ok(&ab - &ba)
}

/// ⟨ψ|A|ψ⟩.
pub fn expectation(state: &StateVector, a: &Operator) -> Result<C64> {
    let av = a.apply(state)?;
    Ok(state.dot(&av))
}

/// Quantization axis for angular momentum matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Standard (2j+1)-dimensional angular momentum matrix in the |j,m⟩ basis,
/// ordered m = −j … +j. Jz is diagonal; J± have elements √(j(j+1) − m(m±1)).
pub fn angular_momentum(j: f64, axis: Axis) -> Result<Operator> {
    let two_j = 2.0 * j;
    if j < 0.5 || (two_j - two_j.round()).abs() > 1e-12 {
        return Err(Error::InvalidAngularMomentum(j));
    }
    let dim = two_j.round() as usize + 1;
    let m = |k: usize| -> f64 { k as f64 - j };
    match axis {
        Axis::Z => {
            let diag: Vec<f64> = (0..dim).map(m).collect();
            Ok(Operator::from_diag(&diag))
        }
        Axis::X | Axis::Y => {
            let mut mat = Array2::zeros((dim, dim));
            for k in 0..dim - 1 {
                // ⟨m+1|J+|m⟩ with m = m(k)
                let c = (j * (j + 1.0) - m(k) * (m(k) + 1.0)).sqrt();
                match axis {
                    Axis::X => {
                        mat[(k + 1, k)] = C64::new(0.5 * c, 0.0);
                        mat[(k, k + 1)] = C64::new(0.5 * c, 0.0);
                    }
                    Axis::Y => {
                        mat[(k + 1, k)] = C64::new(0.0, -0.5 * c);
                        mat[(k, k + 1)] = C64::new(0.0, 0.5 * c);
                    }
                    Axis::Z => unreachable!(),
                }
            }
            Ok(Operator { mat })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn jz_three_halves_is_diagonal() {
        let jz = angular_momentum(1.5, Axis::Z).unwrap();
        let expect = [-1.5, -0.5, 0.5, 1.5];
        for (k, &e) in expect.iter().enumerate() {
            assert_abs_diff_eq!(jz.at(k, k).re, e, epsilon = 0.0);
        }
        assert_abs_diff_eq!(jz.herm_residual(), 0.0, epsilon = 0.0);
    }

    #[test]
    fn jx_half_is_pauli_over_two() {
        let jx = angular_momentum(0.5, Axis::X).unwrap();
        assert_eq!(jx.at(0, 1), c(0.5, 0.0));
        assert_eq!(jx.at(1, 0), c(0.5, 0.0));
        assert_eq!(jx.at(0, 0), c(0.0, 0.0));
    }

    #[test]
    fn jy_three_halves_offdiagonal_magnitudes() {
        // Same ladder coefficients that appear in the microwave gate Hamiltonian.
        let jy = angular_momentum(1.5, Axis::Y).unwrap();
        let mags = [jy.at(1, 0).norm(), jy.at(2, 1).norm(), jy.at(3, 2).norm()];
        assert_abs_diff_eq!(mags[0], 3f64.sqrt() / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(mags[1], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(mags[2], 3f64.sqrt() / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn invalid_j_rejected() {
        assert!(angular_momentum(0.3, Axis::Z).is_err());
        assert!(angular_momentum(-0.5, Axis::X).is_err());
    }

    #[test]
    fn su2_commutation_relations() {
        // [Jα, Jβ] = i εαβγ Jγ within 1e-12 for all implemented j.
        for &j in &[0.5, 1.0, 1.5, 2.5] {
            let jx = angular_momentum(j, Axis::X).unwrap();
            let jy = angular_momentum(j, Axis::Y).unwrap();
            let jz = angular_momentum(j, Axis::Z).unwrap();
            let pairs = [(&jx, &jy, &jz), (&jy, &jz, &jx), (&jz, &jx, &jy)];
            for (a, b, expect) in pairs {
                let comm = commutator(a, b).unwrap();
                let diff = &comm - &expect.scaled(c(0.0, 1.0));
                assert!(diff.max_abs() <= 1e-12, "su(2) violated at j={j}");
            }
        }
    }

    #[test]
    fn casimir_is_j_j_plus_one() {
        for &j in &[0.5, 1.0, 1.5, 2.5] {
            let jx = angular_momentum(j, Axis::X).unwrap();
            let jy = angular_momentum(j, Axis::Y).unwrap();
            let jz = angular_momentum(j, Axis::Z).unwrap();
            let j2 = &(&(&jx * &jx) + &(&jy * &jy)) + &(&jz * &jz);
            let expect = Operator::identity(j2.dim()).scaled_re(j * (j + 1.0));
            assert!((&j2 - &expect).max_abs() <= 1e-12);
        }
    }

    #[test]
    fn kron_dims_multiply() {
        let a = Operator::from_diag(&[1.0, 2.0]);
        let b = Operator::identity(3);
        let k = kron(&a, &b);
        assert_eq!(k.dim(), 6);
        assert_eq!(k.at(5, 5), c(2.0, 0.0));
    }

    #[test]
    fn expectation_and_outer() {
        let up = StateVector::basis(2, 1);
        let jz = angular_momentum(0.5, Axis::Z).unwrap();
        assert_abs_diff_eq!(expectation(&up, &jz).unwrap().re, 0.5, epsilon = 0.0);
        let p = outer(&up, &up);
        assert_eq!(p.at(1, 1), c(1.0, 0.0));
        assert_eq!(p.at(0, 0), c(0.0, 0.0));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = Operator::identity(2);
        let b = Operator::identity(3);
        assert!(a.matmul(&b).is_err());
        assert!(commutator(&a, &b).is_err());
        let v = StateVector::basis(3, 0);
        assert!(a.apply(&v).is_err());
    }

    #[test]
    fn restricted_and_embedded_roundtrip() {
        let jz = angular_momentum(1.5, Axis::Z).unwrap();
        let block = jz.restricted(&[1, 3]);
        assert_eq!(block.at(0, 0), c(-0.5, 0.0));
        assert_eq!(block.at(1, 1), c(1.5, 0.0));
        let back = block.embedded(4, &[1, 3]);
        assert_eq!(back.at(3, 3), c(1.5, 0.0));
        assert_eq!(back.at(0, 0), c(0.0, 0.0));
    }
}
