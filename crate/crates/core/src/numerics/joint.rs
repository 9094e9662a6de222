use rand::Rng;
use rand_distr::StandardNormal;

use super::{commutator, hermitian_eig, hermitian_residual, max_abs, CMatrix, TolerancePolicy};
use crate::error::{Error, Result};

const MAX_REFINE_DEPTH: usize = 32;
const RNG_STREAM: u64 = 0x6a6f696e74;

/// Common eigenbasis of a commuting hermitian family.
#[derive(Debug, Clone)]
pub struct JointSpectrum {
    /// Unitary whose columns are joint eigenvectors.
    pub basis: CMatrix,
    /// One tuple `(l_1, .., l_m)` per column of `basis`, with multiplicity.
    pub tuples: Vec<Vec<f64>>,
    /// `max_j ‖W^H B_j W - diag‖_max`.
    pub residual: f64,
}

/// Simultaneously diagonalizes commuting hermitian matrices.
///
/// A seeded random real combination is diagonalized; each cluster of
/// (nearly) equal eigenvalues is then compressed into its eigenspace and
/// refined recursively with a fresh combination until every compressed
/// family is scalar.
pub fn joint_diagonalize(mats: &[CMatrix], pol: &TolerancePolicy) -> Result<JointSpectrum> {
    let Some(first) = mats.first() else {
        return Err(Error::MalformedInput(
            "joint diagonalization needs at least one matrix".into(),
        ));
    };
    let n = first.nrows();
    for m in mats {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "expected {n}x{n} matrices, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let residual = hermitian_residual(m);
        if residual > pol.psd_tol * (1.0 + max_abs(m)) {
            return Err(Error::NotHermitian { residual });
        }
    }
    for i in 0..mats.len() {
        for j in (i + 1)..mats.len() {
            let residual = max_abs(&commutator(&mats[i], &mats[j]));
            let scale = (max_abs(&mats[i]) * max_abs(&mats[j])).max(1.0);
            if residual > pol.psd_tol * scale {
                return Err(Error::NotCommuting {
                    first: i,
                    second: j,
                    residual,
                });
            }
        }
    }

    let mut rng = pol.rng(RNG_STREAM);
    let scale = mats.iter().map(max_abs).fold(0.0, f64::max);
    let basis = refine(mats, scale, pol, &mut rng, 0)?;

    let mut residual: f64 = 0.0;
    let mut tuples = vec![Vec::with_capacity(mats.len()); n];
    for m in mats {
        let d = basis.adjoint() * m * &basis;
        for r in 0..n {
            tuples[r].push(d[(r, r)].re);
            for c in 0..n {
                if r != c {
                    residual = residual.max(d[(r, c)].norm());
                }
            }
            residual = residual.max(d[(r, r)].im.abs());
        }
    }
    if residual > pol.verify_tol {
        return Err(Error::DiagonalizationFailed { residual });
    }
    Ok(JointSpectrum {
        basis,
        tuples,
        residual,
    })
}

fn is_scalar(m: &CMatrix, tol: f64) -> bool {
    let n = m.nrows();
    let mean = m.trace() / n as f64;
    let mut worst: f64 = 0.0;
    for r in 0..n {
        for c in 0..n {
            let target = if r == c { mean } else { num_complex::Complex64::new(0.0, 0.0) };
            worst = worst.max((m[(r, c)] - target).norm());
        }
    }
    worst <= tol
}

fn refine<R: Rng>(
    mats: &[CMatrix],
    scale: f64,
    pol: &TolerancePolicy,
    rng: &mut R,
    depth: usize,
) -> Result<CMatrix> {
    let n = mats[0].nrows();
    let scalar_tol = 0.1 * pol.verify_tol;
    if n <= 1 || mats.iter().all(|m| is_scalar(m, scalar_tol)) {
        return Ok(CMatrix::identity(n, n));
    }
    if depth >= MAX_REFINE_DEPTH {
        // the caller's residual check reports the failure
        return Ok(CMatrix::identity(n, n));
    }
    let mut combo = CMatrix::zeros(n, n);
    for m in mats {
        let w: f64 = rng.sample(StandardNormal);
        combo += m.scale(w);
    }
    let combo = (&combo + combo.adjoint()).scale(0.5);
    let eig = hermitian_eig(&combo, pol)?;
    let cluster_tol = 1e-6 * (1.0 + scale);
    let mut basis = eig.eigenvectors.clone();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && eig.eigenvalues[end - 1] - eig.eigenvalues[end] <= cluster_tol {
            end += 1;
        }
        let size = end - start;
        if size > 1 {
            let block = eig.eigenvectors.columns(start, size).into_owned();
            let compressed: Vec<CMatrix> = mats
                .iter()
                .map(|m| block.adjoint() * m * &block)
                .collect();
            let inner = refine(&compressed, scale, pol, rng, depth + 1)?;
            basis.columns_mut(start, size).copy_from(&(block * inner));
        }
        start = end;
    }
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::random::{random_unitary, real_diag};
    use crate::numerics::{ONE, ZERO};

    #[test]
    fn diagonal_pair() {
        let pol = TolerancePolicy::default();
        let js = joint_diagonalize(&[real_diag(&[1.0, 2.0]), real_diag(&[3.0, 4.0])], &pol).unwrap();
        let mut tuples = js.tuples.clone();
        tuples.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert!((tuples[0][0] - 1.0).abs() < 1e-12 && (tuples[0][1] - 3.0).abs() < 1e-12);
        assert!((tuples[1][0] - 2.0).abs() < 1e-12 && (tuples[1][1] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn non_commuting_rejected() {
        let pol = TolerancePolicy::default();
        let x = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let r = joint_diagonalize(&[real_diag(&[1.0, 2.0]), x], &pol);
        assert!(matches!(r, Err(Error::NotCommuting { .. })));
    }

    #[test]
    fn planted_tuples_recovered() {
        let pol = TolerancePolicy::with_seed(11);
        let mut rng = pol.rng(3);
        let u = random_unitary(3, &mut rng);
        let b1 = &u * real_diag(&[1.0, 1.0, 2.0]) * u.adjoint();
        let b2 = &u * real_diag(&[5.0, 6.0, 7.0]) * u.adjoint();
        let js = joint_diagonalize(&[b1, b2], &pol).unwrap();
        assert!(js.residual <= 1e-8);
        let mut got = js.tuples.clone();
        got.sort_by(|a, b| a[1].total_cmp(&b[1]));
        let want = [[1.0, 5.0], [1.0, 6.0], [2.0, 7.0]];
        for (g, w) in got.iter().zip(want) {
            assert!((g[0] - w[0]).abs() < 1e-8 && (g[1] - w[1]).abs() < 1e-8, "{g:?}");
        }
    }

    #[test]
    fn degenerate_single_matrix() {
        let pol = TolerancePolicy::default();
        let mut rng = pol.rng(4);
        let u = random_unitary(4, &mut rng);
        let b = &u * real_diag(&[1.0, 1.0, 1.0, -2.0]) * u.adjoint();
        let js = joint_diagonalize(&[b], &pol).unwrap();
        assert!(js.residual <= pol.verify_tol);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let pol = TolerancePolicy::with_seed(7);
        let mut rng = pol.rng(8);
        let u = random_unitary(4, &mut rng);
        let b1 = &u * real_diag(&[1.0, 1.0, 2.0, 2.0]) * u.adjoint();
        let b2 = &u * real_diag(&[0.0, 3.0, 0.0, 3.0]) * u.adjoint();
        let a = joint_diagonalize(&[b1.clone(), b2.clone()], &pol).unwrap();
        let b = joint_diagonalize(&[b1, b2], &pol).unwrap();
        assert_eq!(a.basis, b.basis);
        assert_eq!(a.tuples, b.tuples);
    }
}
