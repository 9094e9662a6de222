use num_complex::Complex64;

use super::{hermitian_eig, CMatrix, CVector, TolerancePolicy};
use crate::error::{Error, Result};

/// A subspace given by a (not necessarily independent) spanning list of
/// coefficient vectors in a fixed ambient dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    ambient: usize,
    vectors: Vec<CVector>,
}

impl SubspaceBasis {
    pub fn new(ambient: usize, vectors: Vec<CVector>) -> Result<Self> {
        if let Some(v) = vectors.iter().find(|v| v.len() != ambient) {
            return Err(Error::DimensionMismatch(format!(
                "subspace vector of length {} in ambient dimension {ambient}",
                v.len()
            )));
        }
        Ok(Self { ambient, vectors })
    }

    pub fn zero(ambient: usize) -> Self {
        Self {
            ambient,
            vectors: Vec::new(),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Self::coordinate(ambient, 0..ambient)
    }

    /// Span of the given standard basis vectors.
    pub fn coordinate(ambient: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let vectors = indices
            .into_iter()
            .map(|i| unit_vector(ambient, i))
            .collect();
        Self { ambient, vectors }
    }

    /// Columns of `m` as spanning vectors.
    pub fn from_columns(m: &CMatrix) -> Self {
        Self {
            ambient: m.nrows(),
            vectors: m.column_iter().map(|c| c.into_owned()).collect(),
        }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn vectors(&self) -> &[CVector] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Spanning vectors as columns (`ambient x len`).
    pub fn as_matrix(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.ambient, self.vectors.len());
        for (k, v) in self.vectors.iter().enumerate() {
            m.set_column(k, v);
        }
        m
    }

    /// Orthonormal basis of the span by twice-iterated modified Gram-Schmidt.
    ///
    /// A vector is dropped when its residual after projection is at most
    /// `verify_tol` times the largest input norm. Applied to an orthonormal
    /// list the output equals the input up to rounding.
    pub fn orthonormalize(&self, pol: &TolerancePolicy) -> SubspaceBasis {
        let scale = self.vectors.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut out: Vec<CVector> = Vec::new();
        for v in &self.vectors {
            let mut w = v.clone();
            for _ in 0..2 {
                for q in &out {
                    let coeff = q.dotc(&w);
                    w.axpy(-coeff, q, Complex64::new(1.0, 0.0));
                }
            }
            let norm = w.norm();
            if norm > pol.verify_tol * scale && norm > 0.0 {
                out.push(w.unscale(norm));
            }
        }
        SubspaceBasis {
            ambient: self.ambient,
            vectors: out,
        }
    }

    /// Dimension of the span.
    pub fn dim(&self, pol: &TolerancePolicy) -> usize {
        self.orthonormalize(pol).len()
    }

    /// Orthogonal projector onto the span.
    pub fn projector(&self, pol: &TolerancePolicy) -> CMatrix {
        let q = self.orthonormalize(pol).as_matrix();
        &q * q.adjoint()
    }

    /// Euclidean distance from `x` to the span.
    pub fn distance(&self, x: &CVector, pol: &TolerancePolicy) -> Result<f64> {
        self.check_len(x)?;
        let onb = self.orthonormalize(pol);
        let mut r = x.clone();
        for q in &onb.vectors {
            let coeff = q.dotc(&r);
            r.axpy(-coeff, q, Complex64::new(1.0, 0.0));
        }
        Ok(r.norm())
    }

    /// `x` is a member iff its distance to the span is at most
    /// `verify_tol * ‖x‖`. The zero vector is always a member.
    pub fn contains(&self, x: &CVector, pol: &TolerancePolicy) -> Result<bool> {
        Ok(self.distance(x, pol)? <= pol.verify_tol * x.norm())
    }

    /// Whether every spanning vector of `other` lies in `self`.
    pub fn contains_subspace(&self, other: &SubspaceBasis, pol: &TolerancePolicy) -> Result<bool> {
        self.check_ambient(other)?;
        for v in &other.vectors {
            if !self.contains(v, pol)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn same_span(&self, other: &SubspaceBasis, pol: &TolerancePolicy) -> Result<bool> {
        Ok(self.contains_subspace(other, pol)? && other.contains_subspace(self, pol)?)
    }

    /// Intersection via the null space of `(I - P_U) + (I - P_V)`.
    ///
    /// The sum of the two complementary projectors is PSD with spectrum in
    /// `[0, 2]`; its eigenvectors with eigenvalue at most `verify_tol` span
    /// the intersection.
    pub fn intersection(&self, other: &SubspaceBasis, pol: &TolerancePolicy) -> Result<SubspaceBasis> {
        self.check_ambient(other)?;
        let n = self.ambient;
        if n == 0 {
            return Ok(SubspaceBasis::zero(0));
        }
        let id = CMatrix::identity(n, n);
        let m = (&id - self.projector(pol)) + (&id - other.projector(pol));
        let eig = hermitian_eig(&m, pol)?;
        let vectors = (0..n)
            .filter(|&k| eig.eigenvalues[k] <= pol.verify_tol)
            .map(|k| eig.eigenvectors.column(k).into_owned())
            .collect();
        Ok(SubspaceBasis {
            ambient: n,
            vectors,
        })
    }

    fn check_len(&self, x: &CVector) -> Result<()> {
        if x.len() != self.ambient {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against subspace of ambient dimension {}",
                x.len(),
                self.ambient
            )));
        }
        Ok(())
    }

    fn check_ambient(&self, other: &SubspaceBasis) -> Result<()> {
        if other.ambient != self.ambient {
            return Err(Error::DimensionMismatch(format!(
                "subspaces in ambient dimensions {} and {}",
                self.ambient, other.ambient
            )));
        }
        Ok(())
    }
}

pub fn unit_vector(n: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(n);
    v[i] = Complex64::new(1.0, 0.0);
    v
}
