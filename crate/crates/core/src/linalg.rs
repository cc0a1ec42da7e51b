//! Hermitian eigensolver, null spaces and the matrix exponential.
//!
//! The eigensolver is a cyclic Jacobi iteration with a fixed sweep order, so
//! identical inputs produce bitwise identical spectra and eigenvectors. This
//! matters: protected-subspace construction and all regression pins depend on
//! reproducible eigenbases. Dimensions here stay small (≤ ~200), where Jacobi
//! is both accurate and fast enough.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::operator::{Operator, StateVector};

/// Result of a Hermitian eigendecomposition: `A V = V diag(λ)`.
///
/// Eigenvalues ascend; eigenvectors are the columns of `eigenvectors`.
/// Phase convention: the largest-magnitude component of each eigenvector is
/// real positive (ties broken by lowest index).
#[derive(Debug, Clone)]
pub struct Eigh {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Operator,
}

impl Eigh {
    pub fn eigenvector(&self, k: usize) -> StateVector {
        let dim = self.eigenvectors.dim();
        let mut v = StateVector::zeros(dim);
        for i in 0..dim {
            v.vec_mut()[i] = self.eigenvectors.at(i, k);
        }
        v
    }

    /// max‖A v_k − λ_k v_k‖ over all eigenpairs.
    pub fn residual(&self, a: &Operator) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..self.eigenvalues.len() {
            let v = self.eigenvector(k);
            let av = a.apply(&v).expect("dims");
            let lv = v.scaled(C64::new(self.eigenvalues[k], 0.0));
            worst = worst.max(av.sub(&lv).norm());
        }
        worst
    }
}

const HERM_INPUT_TOL: f64 = 1e-10;

/// Eigendecomposition of a Hermitian operator by cyclic Jacobi rotations.
///
/// Errors if the input fails the Hermiticity check
/// max|A − A†| ≤ 1e-10·max(1, max|A|).
pub fn eigh(a: &Operator) -> Result<Eigh> {
    if !a.is_hermitian(HERM_INPUT_TOL) {
        return Err(Error::NotHermitian {
            residual: a.herm_residual(),
            tol: HERM_INPUT_TOL * a.max_abs().max(1.0),
        });
    }
    let dim = a.dim();
    // Work on the Hermitian average so roundoff asymmetry cannot leak in.
    let mut m = a.hermitized().into_mat();
    let mut v: Array2<C64> = Array2::eye(dim);

    let scale = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if scale == 0.0 {
        return Ok(sorted_eigh(vec![0.0; dim], Operator::new(v)?));
    }
    let stop = 1e-30 * scale * scale;

    for _sweep in 0..60 {
        let off: f64 = {
            let mut s = 0.0;
            for i in 0..dim {
                for j in i + 1..dim {
                    s += m[(i, j)].norm_sqr();
                }
            }
            2.0 * s
        };
        if off <= stop {
            break;
        }
        for p in 0..dim {
            for q in p + 1..dim {
                let g = m[(p, q)];
                let gn = g.norm();
                if gn <= 1e-300 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let phase = g / gn;
                // Zeroing condition: |γ|t² − (aqq−app)t − |γ| = 0; take the small root.
                let tau = (aqq - app) / (2.0 * gn);
                let t = if tau >= 0.0 {
                    -1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let cth = 1.0 / (1.0 + t * t).sqrt();
                let sth = t * cth;
                // Columns: col_p ← c·col_p + s·e^{−iφ}·col_q ; col_q ← −s·e^{iφ}·col_p + c·col_q
                let sp = C64::new(sth, 0.0) * phase.conj();
                let sq = C64::new(sth, 0.0) * phase;
                for i in 0..dim {
                    let mip = m[(i, p)];
                    let miq = m[(i, q)];
                    m[(i, p)] = mip * cth + miq * sp;
                    m[(i, q)] = miq * cth - mip * sq;
                }
                for i in 0..dim {
                    let mpi = m[(p, i)];
                    let mqi = m[(q, i)];
                    m[(p, i)] = mpi * cth + mqi * sp.conj();
                    m[(q, i)] = mqi * cth - mpi * sq.conj();
                }
                m[(p, q)] = C64::new(0.0, 0.0);
                m[(q, p)] = C64::new(0.0, 0.0);
                m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
                for i in 0..dim {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * cth + viq * sp;
                    v[(i, q)] = viq * cth - vip * sq;
                }
            }
        }
    }

    let eigenvalues: Vec<f64> = (0..dim).map(|i| m[(i, i)].re).collect();
    Ok(sorted_eigh(eigenvalues, Operator::new(v)?))
}

fn sorted_eigh(eigenvalues: Vec<f64>, vectors: Operator) -> Eigh {
    let dim = eigenvalues.len();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eigenvalues[i].partial_cmp(&eigenvalues[j]).unwrap());
    let mut vals = Vec::with_capacity(dim);
    let mut mat = Array2::zeros((dim, dim));
    for (out_col, &src_col) in order.iter().enumerate() {
        vals.push(eigenvalues[src_col]);
        // Phase convention: largest-magnitude component real positive.
        let mut best_i = 0;
        let mut best = -1.0f64;
        for i in 0..dim {
            let n = vectors.at(i, src_col).norm();
            if n > best + 1e-300 && n > best {
                best = n;
                best_i = i;
            }
        }
        let pivot = vectors.at(best_i, src_col);
        let rot = if pivot.norm() > 0.0 {
            pivot.conj() / pivot.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let mut norm_sqr = 0.0;
        for i in 0..dim {
            norm_sqr += vectors.at(i, src_col).norm_sqr();
        }
        let norm = norm_sqr.sqrt();
        for i in 0..dim {
            mat[(i, out_col)] = vectors.at(i, src_col) * rot / norm;
        }
    }
    Eigh {
        eigenvalues: vals,
        eigenvectors: Operator::new(mat).expect("square"),
    }
}

/// Orthonormal basis of the null space of `A`: singular directions with
/// singular value ≤ `tol`.
///
/// Hermitian inputs are diagonalized directly, which resolves null directions
/// down to machine precision. Non-Hermitian inputs go through A†A, whose
/// singular-value floor is ~√ε·‖A‖; pass a tolerance above that for them.
pub fn kernel(a: &Operator, tol: f64) -> Vec<StateVector> {
    let eig;
    let singular_values: Vec<f64>;
    if a.is_hermitian(HERM_INPUT_TOL) {
        eig = eigh(a).expect("checked Hermitian");
        singular_values = eig.eigenvalues.iter().map(|l| l.abs()).collect();
    } else {
        let ata = a.dagger().matmul(a).expect("square");
        eig = eigh(&ata).expect("A†A is Hermitian");
        singular_values = eig.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect();
    }
    let mut basis = Vec::new();
    for (k, &sv) in singular_values.iter().enumerate() {
        if sv <= tol {
            basis.push(eig.eigenvector(k));
        }
    }
    basis
}

/// Default kernel tolerance: 1e-9 × matrix scale, well above Jacobi roundoff
/// and far below any physical gap in this crate.
pub fn kernel_default_tol(a: &Operator) -> f64 {
    1e-9 * a.max_abs().max(1.0)
}

/// Matrix exponential by scaling-and-squaring with a Taylor kernel.
/// expm(0) = I exactly; expm(iH) is unitary within 1e-9 for Hermitian H.
pub fn expm(a: &Operator) -> Operator {
    let dim = a.dim();
    let norm = a.max_abs() * dim as f64;
    let s = if norm > 0.25 {
        (norm / 0.25).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    let b = a.scaled_re(0.5f64.powi(s as i32));
    let mut sum = Operator::identity(dim);
    let mut term = Operator::identity(dim);
    for k in 1..40 {
        term = term.matmul(&b).expect("square").scaled_re(1.0 / k as f64);
        sum = &sum + &term;
        if term.max_abs() <= 1e-20 * sum.max_abs().max(1.0) {
            break;
        }
    }
    let mut out = sum;
    for _ in 0..s {
        out = out.matmul(&out).expect("square");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{angular_momentum, commutator, Axis};
    use approx::assert_abs_diff_eq;
    use ndarray::Array2;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    fn random_hermitian(rng: &mut ChaCha12Rng, dim: usize) -> Operator {
        let mat = Array2::from_shape_fn((dim, dim), |_| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        Operator::new(mat).unwrap().hermitized()
    }

    #[test]
    fn eigh_diagonal_input() {
        let a = Operator::from_diag(&[2.0, 1.0]);
        let e = eigh(&a).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 2.0]);
        // Permutation eigenvectors.
        assert_abs_diff_eq!(e.eigenvectors.at(1, 0).re, 1.0, epsilon = 0.0);
        assert_abs_diff_eq!(e.eigenvectors.at(0, 1).re, 1.0, epsilon = 0.0);
    }

    #[test]
    fn eigh_jx_half() {
        let jx = angular_momentum(0.5, Axis::X).unwrap();
        let e = eigh(&jx).unwrap();
        assert_abs_diff_eq!(e.eigenvalues[0], -0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(e.eigenvalues[1], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let mut a = Operator::zeros(2);
        a.set(0, 1, C64::new(1.0, 0.0));
        assert!(matches!(eigh(&a), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn eigh_reconstruction_on_random_matrices() {
        // ‖A − VΛV†‖∞ ≤ 1e-10·‖A‖∞ on 1000 random Hermitian matrices, dim ≤ 16.
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for trial in 0..1000 {
            let dim = 1 + (trial % 16);
            let a = random_hermitian(&mut rng, dim);
            let e = eigh(&a).unwrap();
            let lam = Operator::from_diag(&e.eigenvalues);
            let recon = e
                .eigenvectors
                .matmul(&lam)
                .unwrap()
                .matmul(&e.eigenvectors.dagger())
                .unwrap();
            let scale = a.max_abs().max(1e-30);
            assert!(
                (&a - &recon).max_abs() <= 1e-10 * scale,
                "reconstruction failed at trial {trial} (dim {dim})"
            );
            assert!(e.eigenvectors.unitarity_residual() <= 1e-12);
        }
    }

    #[test]
    fn eigh_phase_convention_deterministic() {
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let a = random_hermitian(&mut rng, 8);
        let e1 = eigh(&a).unwrap();
        let e2 = eigh(&a).unwrap();
        assert_eq!(e1.eigenvalues, e2.eigenvalues);
        assert_eq!(e1.eigenvectors, e2.eigenvectors);
        for k in 0..8 {
            let v = e1.eigenvector(k);
            let (mut best_i, mut best) = (0, -1.0);
            for i in 0..8 {
                if v.amp(i).norm() > best {
                    best = v.amp(i).norm();
                    best_i = i;
                }
            }
            let pivot = v.amp(best_i);
            assert!(pivot.re > 0.0 && pivot.im.abs() <= 1e-12 * pivot.re.max(1e-30));
        }
    }

    #[test]
    fn kernel_of_signature_diagonal() {
        let a = Operator::from_diag(&[1.0, 0.0, -1.0]);
        let basis = kernel(&a, 1e-10);
        assert_eq!(basis.len(), 1);
        assert_abs_diff_eq!(basis[0].amp(1).norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn kernel_of_random_full_rank_is_empty() {
        // Full-rank construction: unitary (via expm of i·Hermitian) × nonzero diagonal.
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let h = random_hermitian(&mut rng, 5);
        let u = expm(&h.scaled(C64::new(0.0, 1.0)));
        let d = Operator::from_diag(&[0.7, -1.3, 2.1, 0.4, 5.0]);
        let a = u.matmul(&d).unwrap();
        assert!(kernel(&a, 1e-10).is_empty());
    }

    #[test]
    fn kernel_orthogonal_to_range() {
        // |⟨k|r⟩| ≤ 1e-10 for kernel vectors k and range vectors r = A†x.
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..50 {
            let h = random_hermitian(&mut rng, 6);
            // Force a 2-dim kernel: project out two eigendirections.
            let e = eigh(&h).unwrap();
            let mut vals = e.eigenvalues.clone();
            vals[0] = 0.0;
            vals[1] = 0.0;
            let lam = Operator::from_diag(&vals);
            let a = e
                .eigenvectors
                .matmul(&lam)
                .unwrap()
                .matmul(&e.eigenvectors.dagger())
                .unwrap();
            let ker = kernel(&a, 1e-9 * a.max_abs().max(1.0));
            assert_eq!(ker.len(), 2);
            for k in &ker {
                for col in 0..6 {
                    let x = StateVector::basis(6, col);
                    let r = a.dagger().apply(&x).unwrap();
                    let n = r.norm();
                    if n > 1e-12 {
                        assert!(k.dot(&r).norm() / n <= 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn expm_zero_is_identity_exactly() {
        let z = Operator::zeros(3);
        let e = expm(&z);
        assert_eq!(e, Operator::identity(3));
    }

    #[test]
    fn expm_of_i_h_is_unitary() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..20 {
            let h = random_hermitian(&mut rng, 6).scaled_re(3.0);
            let u = expm(&h.scaled(C64::new(0.0, 1.0)));
            assert!(u.unitarity_residual() <= 1e-9);
        }
    }

    #[test]
    fn expm_rotation_preserves_highest_weight_norm() {
        // expm(iθJy)|j,j⟩ keeps unit norm for θ ∈ [0, 2π].
        let jy = angular_momentum(1.5, Axis::Y).unwrap();
        let top = StateVector::basis(4, 3);
        for k in 0..=20 {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / 20.0;
            let u = expm(&jy.scaled(C64::new(0.0, theta)));
            let v = u.apply(&top).unwrap();
            assert_abs_diff_eq!(v.norm(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn expm_matches_su2_commutator_structure() {
        // Sanity: e^{iπJy} maps |j, m⟩ to ±|j, −m⟩ for j = 1/2.
        let jy = angular_momentum(0.5, Axis::Y).unwrap();
        let u = expm(&jy.scaled(C64::new(0.0, std::f64::consts::PI)));
        let down = StateVector::basis(2, 0);
        let v = u.apply(&down).unwrap();
        assert_abs_diff_eq!(v.amp(1).norm(), 1.0, epsilon = 1e-12);
        // And the su(2) algebra is intact after round trips.
        let jx = angular_momentum(0.5, Axis::X).unwrap();
        let jz = angular_momentum(0.5, Axis::Z).unwrap();
        let c = commutator(&jx, &jy).unwrap();
        assert!((&c - &jz.scaled(C64::new(0.0, 1.0))).max_abs() <= 1e-15);
    }
}
