//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;

pub(crate) type CMatrix = DMatrix<Complex64>;
pub(crate) type CVector = DVector<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub(crate) fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `op` acting on `site` (0-based, leftmost factor first) of an `n`-qubit register.
pub(crate) fn site_operator(op: &CMatrix, site: usize, n: usize) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    let id = CMatrix::identity(2, 2);
    for k in 0..n {
        out = kron(&out, if k == site { op } else { &id });
    }
    out
}

/// Column-stacking vectorisation.
pub(crate) fn vectorize(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

pub(crate) fn unvectorize(v: &CVector, dim: usize) -> CMatrix {
    CMatrix::from_column_slice(dim, dim, v.as_slice())
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn norm1(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub(crate) fn hermitian_min_eigenvalue(m: &CMatrix) -> f64 {
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    SymmetricEigen::new(herm)
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// True when every eigenvalue of the Hermitian part of `m` is above `-shift`.
pub(crate) fn is_psd_within(m: &CMatrix, shift: f64) -> bool {
    let n = m.nrows();
    let mut a = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    for i in 0..n {
        a[(i, i)] += shift;
    }
    // in-place Cholesky on the lower triangle; complex sqrt never fails, so the
    // pivot sign has to be checked by hand
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= a[(j, k)].norm_sqr();
        }
        if !(d > 0.0) {
            return false;
        }
        let d = d.sqrt();
        a[(j, j)] = Complex64::new(d, 0.0);
        for i in j + 1..n {
            let mut v = a[(i, j)];
            for k in 0..j {
                v -= a[(i, k)] * a[(j, k)].conj();
            }
            a[(i, j)] = v / d;
        }
    }
    true
}

// Padé(13) coefficients for scaling and squaring.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with a degree-13 Padé approximant.
pub(crate) fn expm(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let norm = norm1(m);
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = m * Complex64::new(0.5f64.powi(squarings), 0.0);
    let id = CMatrix::identity(n, n);
    let b = |k: usize| Complex64::new(PADE13[k], 0.0);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9))
        + &a6 * b(7)
        + &a4 * b(5)
        + &a2 * b(3)
        + &id * b(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8))
        + &a6 * b(6)
        + &a4 * b(4)
        + &a2 * b(2)
        + &id * b(0);

    let denom = &v - &u;
    let numer = &v + &u;
    let mut r = denom
        .lu()
        .solve(&numer)
        .expect("Padé denominator is nonsingular for scaled arguments");
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

/// Right eigenvectors `V`, eigenvalues `Λ` and `V⁻¹` of a general complex matrix.
pub(crate) struct EigenDecomposition {
    pub values: CVector,
    pub vectors: CMatrix,
    pub inverse: CMatrix,
}

/// Eigenvalues from the complex Schur form.
pub(crate) fn eigenvalues(m: &CMatrix) -> Option<Vec<Complex64>> {
    let schur = Schur::try_new(m.clone(), 1e-15 * max_abs(m).max(1.0), 10_000)?;
    let (_, t) = schur.unpack();
    Some(t.diagonal().iter().cloned().collect())
}

/// Diagonalises `m` through its Schur form. Returns `None` when the Schur
/// iteration fails or the eigenvector basis is too ill-conditioned to
/// reproduce `m` to `tol` relative accuracy.
pub(crate) fn diagonalize(m: &CMatrix, tol: f64) -> Option<EigenDecomposition> {
    let n = m.nrows();
    let scale = max_abs(m).max(1.0);
    let schur = Schur::try_new(m.clone(), 1e-15 * scale, 10_000)?;
    let (q, t) = schur.unpack();

    let smin = f64::EPSILON * scale;
    let mut y = CMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = ONE;
        for i in (0..k).rev() {
            let mut acc = ZERO;
            for j in i + 1..=k {
                acc += t[(i, j)] * y[(j, k)];
            }
            let mut d = t[(i, i)] - lambda;
            if d.norm() < smin {
                d = Complex64::new(smin, 0.0);
            }
            y[(i, k)] = -acc / d;
        }
    }
    let mut vectors = q * y;
    for mut col in vectors.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 && norm.is_finite() {
            col /= Complex64::new(norm, 0.0);
        }
    }
    if vectors.iter().any(|z| !z.is_finite()) {
        return None;
    }
    let inverse = vectors.clone().try_inverse()?;
    let values = t.diagonal();

    let mut recon = vectors.clone();
    for (k, mut col) in recon.column_iter_mut().enumerate() {
        col *= values[k];
    }
    let recon = recon * &inverse;
    if max_abs(&(recon - m)) > tol * scale {
        return None;
    }
    if max_abs(&(&vectors * &inverse - CMatrix::identity(n, n))) > tol {
        return None;
    }
    Some(EigenDecomposition {
        values,
        vectors,
        inverse,
    })
}
