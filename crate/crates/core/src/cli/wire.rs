//! JSON file formats.
//!
//! Complex numbers are `[re, im]`, matrices are arrays of rows, the map
//! tensor is nested `[i][j][p][q]`, and structure constants are sparse
//! `{i, j, k, re, im}` records meaning `e_i · e_j ∋ (re + i·im) e_k`.
//! Empty matrices lose their column count in this encoding, so formats
//! that may carry them also store the dimensions needed to rebuild them.

use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::cbmap::{CBMap, InvarianceMode};
use crate::cone::{GeneratorTuple, Poly, PolyMatrix};
use crate::dilation::DilationResult;
use crate::error::{Error, Result};
use crate::numerics::{CMatrix, CVector, SubspaceBasis, TolerancePolicy};
use crate::palgebra::{Algebra, StructureConstant};

pub type C = [f64; 2];

fn c_to(z: Complex64) -> C {
    [z.re, z.im]
}

fn c_from(c: C) -> Complex64 {
    Complex64::new(c[0], c[1])
}

pub fn vec_to(v: &CVector) -> Vec<C> {
    v.iter().map(|z| c_to(*z)).collect()
}

pub fn vec_from(v: &[C]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|c| c_from(*c)))
}

pub fn mat_to(m: &CMatrix) -> Vec<Vec<C>> {
    m.row_iter().map(|r| r.iter().map(|z| c_to(*z)).collect()).collect()
}

/// Rebuilds a matrix; `cols` is used when there are no rows.
pub fn mat_from(rows: &[Vec<C>], cols: usize, what: &str) -> Result<CMatrix> {
    let cols = rows.first().map(|r| r.len()).unwrap_or(cols);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::MalformedInput(format!("{what}: ragged matrix")));
    }
    Ok(CMatrix::from_fn(rows.len(), cols, |r, c| c_from(rows[r][c])))
}

fn check_finite_all<'a>(values: impl IntoIterator<Item = &'a C>, what: &str) -> Result<()> {
    if values.into_iter().all(|c| c[0].is_finite() && c[1].is_finite()) {
        Ok(())
    } else {
        Err(Error::MalformedInput(format!("{what} has non-finite entries")))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ConstantJson {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AlgebraJson {
    pub labels: Vec<String>,
    pub involution: Vec<Vec<C>>,
    pub gamma: Vec<Vec<bool>>,
    pub structure_constants: Vec<ConstantJson>,
    pub unit: Vec<C>,
}

impl AlgebraJson {
    pub fn from_algebra(a: &Algebra) -> Self {
        Self {
            labels: a.labels().to_vec(),
            involution: mat_to(a.involution_matrix()),
            gamma: a.gamma_table().to_vec(),
            structure_constants: a
                .structure_constants()
                .iter()
                .map(|c| ConstantJson {
                    i: c.left,
                    j: c.right,
                    k: c.out,
                    re: c.value.re,
                    im: c.value.im,
                })
                .collect(),
            unit: vec_to(a.unit()),
        }
    }

    pub fn to_algebra(&self) -> Result<Algebra> {
        let n = self.labels.len();
        let involution = mat_from(&self.involution, n, "involution")?;
        let constants = self
            .structure_constants
            .iter()
            .map(|c| StructureConstant {
                left: c.i,
                right: c.j,
                out: c.k,
                value: Complex64::new(c.re, c.im),
            })
            .collect();
        Algebra::new(
            self.labels.clone(),
            involution,
            self.gamma.clone(),
            constants,
            vec_from(&self.unit),
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MapJson {
    pub algebra: AlgebraJson,
    /// Domain basis as coefficient vectors.
    pub domain: Vec<Vec<C>>,
    pub x_dim: usize,
    /// `tensor[i][j][p][q] = Φ(d_i, d_j)(f_p, f_q)`.
    pub tensor: Vec<Vec<Vec<Vec<C>>>>,
    /// Spanning vectors of the core.
    pub core: Vec<Vec<C>>,
}

impl MapJson {
    pub fn from_map(phi: &CBMap) -> Self {
        let m = phi.domain_dim();
        let d = phi.x_dim();
        let tensor = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        (0..d)
                            .map(|p| (0..d).map(|q| c_to(phi.t(i, j, p, q))).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self {
            algebra: AlgebraJson::from_algebra(phi.algebra()),
            domain: phi.domain().iter().map(vec_to).collect(),
            x_dim: d,
            tensor,
            core: phi.core().vectors().iter().map(vec_to).collect(),
        }
    }

    pub fn to_map(&self) -> Result<CBMap> {
        let algebra = self.algebra.to_algebra()?;
        let n = algebra.dim();
        let m = self.domain.len();
        let d = self.x_dim;
        let bad_shape = || Error::MalformedInput(format!("tensor must be {m}x{m}x{d}x{d}"));
        let mut flat = Vec::with_capacity(m * m * d * d);
        if self.tensor.len() != m {
            return Err(bad_shape());
        }
        for row in &self.tensor {
            if row.len() != m {
                return Err(bad_shape());
            }
            for block in row {
                if block.len() != d {
                    return Err(bad_shape());
                }
                for line in block {
                    if line.len() != d {
                        return Err(bad_shape());
                    }
                    check_finite_all(line, "tensor")?;
                    flat.extend(line.iter().map(|c| c_from(*c)));
                }
            }
        }
        for v in self.domain.iter().chain(&self.core) {
            check_finite_all(v, "domain/core vector")?;
        }
        let domain = self.domain.iter().map(|v| vec_from(v)).collect();
        let core = SubspaceBasis::new(n, self.core.iter().map(|v| vec_from(v)).collect())
            .map_err(|e| Error::MalformedInput(e.to_string()))?;
        CBMap::new(algebra, domain, d, flat, core)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DilationJson {
    pub h_dim: usize,
    /// Columns of `lambda_map` (`domain_dim · x_dim`).
    pub input_dim: usize,
    pub x_dim: usize,
    pub lambda_map: Vec<Vec<C>>,
    pub pi: Vec<Vec<Vec<C>>>,
    pub v: Option<Vec<Vec<C>>>,
    pub gram_spectrum: Vec<f64>,
    pub welldef_residual: f64,
    pub star_residual: f64,
    pub core: Vec<Vec<C>>,
    pub core_ambient: usize,
    pub mode: String,
}

impl DilationJson {
    pub fn from_dilation(d: &DilationResult, x_dim: usize) -> Self {
        Self {
            h_dim: d.h_dim,
            input_dim: d.lambda_map.ncols(),
            x_dim,
            lambda_map: mat_to(&d.lambda_map),
            pi: d.pi.iter().map(mat_to).collect(),
            v: d.v.as_ref().map(mat_to),
            gram_spectrum: d.gram_spectrum.clone(),
            welldef_residual: d.welldef_residual,
            star_residual: d.star_residual,
            core: d.core.vectors().iter().map(vec_to).collect(),
            core_ambient: d.core.ambient(),
            mode: d.mode.as_str().into(),
        }
    }

    pub fn to_dilation(&self) -> Result<DilationResult> {
        let h = self.h_dim;
        let lambda_map = mat_from(&self.lambda_map, self.input_dim, "lambda_map")?;
        let pi = self
            .pi
            .iter()
            .map(|m| mat_from(m, h, "pi"))
            .collect::<Result<Vec<_>>>()?;
        let v = match &self.v {
            Some(m) => Some(mat_from(m, self.x_dim, "v")?),
            None => None,
        };
        let shapes_ok = lambda_map.nrows() == h
            && lambda_map.ncols() == self.input_dim
            && pi.iter().all(|p| p.nrows() == h && p.ncols() == h)
            && v.as_ref().is_none_or(|v| v.nrows() == h && v.ncols() == self.x_dim);
        if !shapes_ok {
            return Err(Error::MalformedInput("dilation matrices have inconsistent shapes".into()));
        }
        for m in std::iter::once(&lambda_map).chain(&pi).chain(v.as_ref()) {
            crate::numerics::check_finite(m, "dilation")?;
        }
        let core = SubspaceBasis::new(self.core_ambient, self.core.iter().map(|c| vec_from(c)).collect())
            .map_err(|e| Error::MalformedInput(e.to_string()))?;
        Ok(DilationResult {
            h_dim: h,
            lambda_map,
            pi,
            v,
            gram_spectrum: self.gram_spectrum.clone(),
            welldef_residual: self.welldef_residual,
            star_residual: self.star_residual,
            core,
            mode: self.mode.parse::<InvarianceMode>()?,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TermJson {
    pub exp: Vec<u32>,
    pub c: C,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PolyMatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub vars: usize,
    /// `entries[k][l]` is the term list of `P_kl`.
    pub entries: Vec<Vec<Vec<TermJson>>>,
}

impl PolyMatrixJson {
    pub fn from_polymatrix(p: &PolyMatrix) -> Self {
        Self {
            rows: p.rows(),
            cols: p.cols(),
            vars: p.vars(),
            entries: (0..p.rows())
                .map(|k| {
                    (0..p.cols())
                        .map(|l| {
                            p.entry(k, l)
                                .terms()
                                .map(|(e, c)| TermJson {
                                    exp: e.clone(),
                                    c: c_to(*c),
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn to_polymatrix(&self) -> Result<PolyMatrix> {
        if self.entries.len() != self.rows || self.entries.iter().any(|r| r.len() != self.cols) {
            return Err(Error::MalformedInput(format!(
                "polynomial matrix entries must be {}x{}",
                self.rows, self.cols
            )));
        }
        let entries = self
            .entries
            .iter()
            .flatten()
            .map(|terms| Poly::from_terms(terms.iter().map(|t| (t.exp.clone(), c_from(t.c)))))
            .collect();
        PolyMatrix::new(self.rows, self.cols, self.vars, entries)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GeneratorsJson {
    pub generators: Vec<Vec<Vec<C>>>,
}

impl GeneratorsJson {
    pub fn from_matrices(ms: &[CMatrix]) -> Self {
        Self {
            generators: ms.iter().map(mat_to).collect(),
        }
    }

    pub fn to_tuple(&self, pol: &TolerancePolicy) -> Result<GeneratorTuple> {
        let ms = self
            .generators
            .iter()
            .map(|m| {
                let m = mat_from(m, 0, "generator")?;
                crate::numerics::check_finite(&m, "generator")?;
                Ok(m)
            })
            .collect::<Result<Vec<_>>>()?;
        GeneratorTuple::new(ms, pol)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("wire types serialize");
    s.push('\n');
    s
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::MalformedInput(format!("{}: {e}", path.display())))
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
