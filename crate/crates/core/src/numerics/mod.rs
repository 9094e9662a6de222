//! Tolerance-governed dense linear algebra over the complex numbers.
//!
//! Every rank, PSD and membership decision in the crate goes through this
//! module so that a single [`TolerancePolicy`] governs all of them.
//! Inner products are linear in the first slot: `<u, v> = v^H u`.

mod joint;
pub mod random;
mod subspace;

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub use joint::{joint_diagonalize, JointSpectrum};
pub use subspace::{unit_vector, SubspaceBasis};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Tolerances and seed shared by every numerical decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TolerancePolicy {
    /// Relative eigenvalue cutoff for rank decisions. `None` means
    /// `dimension * f64::EPSILON` for the matrix at hand.
    pub rank_tol_factor: Option<f64>,
    pub psd_tol: f64,
    pub verify_tol: f64,
    pub seed: u64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self {
            rank_tol_factor: None,
            psd_tol: 1e-10,
            verify_tol: 1e-8,
            seed: 0,
        }
    }
}

impl TolerancePolicy {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let factor = self.rank_tol_factor.unwrap_or(0.0);
        for (name, v) in [
            ("rank_tol_factor", factor),
            ("psd_tol", self.psd_tol),
            ("verify_tol", self.verify_tol),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::MalformedInput(format!(
                    "tolerance {name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Relative rank cutoff for a matrix of the given dimension.
    pub fn rank_factor(&self, dim: usize) -> f64 {
        self.rank_tol_factor
            .unwrap_or(dim.max(1) as f64 * f64::EPSILON)
    }

    /// A generator for one named consumer of randomness. Distinct streams
    /// keep independent checks from sharing draws.
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

/// Eigenpairs of a hermitian matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct EigResult {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors, one column per eigenvalue.
    pub eigenvectors: CMatrix,
}

/// Largest entry modulus, 0 for empty matrices.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_vec(v: &CVector) -> f64 {
    v.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `‖A - A^H‖_max`.
pub fn hermitian_residual(a: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn check_finite(m: &CMatrix, what: &str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::MalformedInput(format!("{what} has non-finite entries")))
    }
}

fn require_square(a: &CMatrix) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(())
}

fn require_hermitian(a: &CMatrix, pol: &TolerancePolicy) -> Result<()> {
    require_square(a)?;
    let residual = hermitian_residual(a);
    if residual > pol.psd_tol * (1.0 + max_abs(a)) {
        return Err(Error::NotHermitian { residual });
    }
    Ok(())
}

/// Hermitian eigendecomposition with eigenvalues sorted descending.
///
/// The input is symmetrized before factorization, so asymmetry below the
/// precondition tolerance never leaks into the result.
pub fn hermitian_eig(a: &CMatrix, pol: &TolerancePolicy) -> Result<EigResult> {
    require_hermitian(a, pol)?;
    let n = a.nrows();
    if n == 0 {
        return Ok(EigResult {
            eigenvalues: Vec::new(),
            eigenvectors: CMatrix::zeros(0, 0),
        });
    }
    let h = (a + a.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps ties in factorization order, which is deterministic
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(EigResult {
        eigenvalues,
        eigenvectors,
    })
}

/// PSD verdict and smallest eigenvalue. An empty matrix is PSD with
/// `min_eig = 0`.
pub fn psd_min_eig(a: &CMatrix, pol: &TolerancePolicy) -> Result<(bool, f64)> {
    let eig = hermitian_eig(a, pol)?;
    let Some(&min) = eig.eigenvalues.last() else {
        return Ok((true, 0.0));
    };
    let max = eig.eigenvalues[0];
    Ok((min >= -pol.psd_tol * max.max(1.0), min))
}

/// Rank, range and quotient coordinates of a PSD matrix.
#[derive(Debug, Clone)]
pub struct RankDecomposition {
    pub rank: usize,
    /// Full spectrum, descending.
    pub eigenvalues: Vec<f64>,
    /// Kept orthonormal eigenvectors as columns (`dim x rank`).
    pub range_basis: CMatrix,
    /// `Q = diag(sqrt(l_k)) V^H` on kept pairs (`rank x dim`), so that
    /// `Q^H Q` reproduces the input.
    pub quotient_map: CMatrix,
}

/// Splits a PSD matrix into its numerical range and null space.
///
/// An eigenvalue is kept iff it exceeds `rank_factor(dim) * l_max`. A zero
/// matrix yields rank 0 and an empty quotient map.
pub fn rank_range_null(a: &CMatrix, pol: &TolerancePolicy) -> Result<RankDecomposition> {
    let n = a.nrows();
    let eig = hermitian_eig(a, pol)?;
    let max = eig.eigenvalues.first().copied().unwrap_or(0.0);
    let min = eig.eigenvalues.last().copied().unwrap_or(0.0);
    if min < -pol.psd_tol * max.max(1.0) {
        return Err(Error::NotPsd { min_eig: min });
    }
    let cutoff = pol.rank_factor(n) * max;
    let rank = if max > 0.0 {
        eig.eigenvalues.iter().take_while(|&&l| l > cutoff).count()
    } else {
        0
    };
    let range_basis = eig.eigenvectors.columns(0, rank).into_owned();
    let mut quotient_map = range_basis.adjoint();
    for k in 0..rank {
        let s = eig.eigenvalues[k].sqrt();
        quotient_map.row_mut(k).scale_mut(s);
    }
    Ok(RankDecomposition {
        rank,
        eigenvalues: eig.eigenvalues,
        range_basis,
        quotient_map,
    })
}

/// Orthonormal basis (as columns) of the null space of `m`.
///
/// A right singular vector is null iff its singular value is at most
/// `rel_tol * max(1, s_max)`.
pub fn null_space(m: &CMatrix, rel_tol: f64) -> CMatrix {
    let n = m.ncols();
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    // pad so the thin SVD returns a full set of right singular vectors
    let rows = m.nrows().max(n);
    let mut padded = CMatrix::zeros(rows, n);
    padded.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let s_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = rel_tol * s_max.max(1.0);
    let mut idx: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] <= cutoff)
        .collect();
    idx.sort_unstable();
    let mut out = CMatrix::zeros(n, idx.len());
    for (c, &k) in idx.iter().enumerate() {
        for r in 0..n {
            out[(r, c)] = v_t[(k, r)].conj();
        }
    }
    out
}

/// Moore-Penrose pseudo-inverse with a relative singular value cutoff.
pub fn pseudo_inverse(m: &CMatrix, rel_tol: f64) -> CMatrix {
    if m.nrows() == 0 || m.ncols() == 0 {
        return CMatrix::zeros(m.ncols(), m.nrows());
    }
    let svd = SVD::new(m.clone(), true, true);
    let s_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = (rel_tol * s_max).max(f64::MIN_POSITIVE);
    svd.pseudo_inverse(eps)
        .expect("eps is positive, so pseudo_inverse cannot fail")
}

/// Spectral norm.
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Kronecker product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}
