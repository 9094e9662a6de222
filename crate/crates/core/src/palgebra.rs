//! Finite-dimensional partial *-algebras.
//!
//! An algebra is given on a basis `e_0 .. e_{n-1}` by
//!
//! - an involution matrix `S`: `e_i* = Σ_k S[k][i] e_k`, extended
//!   antilinearly, so `x* = S · conj(x)`;
//! - a boolean table `gamma[i][j]` saying whether `e_i · e_j` is defined;
//! - sparse structure constants `e_i · e_j = Σ_k c_ij^k e_k` on the defined
//!   pairs;
//! - a unit vector.
//!
//! Element-level products use the basis-pair encoding: `x · y` is defined
//! iff every pair of supported basis elements is. Linearity of the
//! multiplier relation and distributivity hold by construction, so only the
//! remaining axioms need to be validated.

use num_complex::Complex64;

use crate::check::{all_passed, CheckResult};
use crate::error::{Error, Result};
use crate::numerics::{max_abs, max_abs_vec, CMatrix, CVector, SubspaceBasis, TolerancePolicy};

/// Coefficients below this fraction of the largest coefficient do not count
/// towards the support of an element.
const SUPPORT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureConstant {
    pub left: usize,
    pub right: usize,
    pub out: usize,
    pub value: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone)]
pub struct Algebra {
    labels: Vec<String>,
    involution: CMatrix,
    gamma: Vec<Vec<bool>>,
    constants: Vec<StructureConstant>,
    unit: CVector,
    // dense products e_i e_j, zero on undefined pairs
    products: Vec<Vec<CVector>>,
}

/// The universal multiplier spaces `RA`, `LA` and `MA = LA ∩ RA`.
#[derive(Debug, Clone)]
pub struct UniversalMultipliers {
    pub right: SubspaceBasis,
    pub left: SubspaceBasis,
    pub middle: SubspaceBasis,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        all_passed(&self.checks)
    }
}

#[derive(Debug, Clone)]
pub struct SemiAssociativity {
    pub holds: bool,
    pub max_residual: f64,
    /// `(x, y, z)` basis indices of the first violating triple.
    pub witness: Option<(usize, usize, usize)>,
}

impl Algebra {
    pub fn new(
        labels: Vec<String>,
        involution: CMatrix,
        gamma: Vec<Vec<bool>>,
        constants: Vec<StructureConstant>,
        unit: CVector,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::MalformedInput("algebra must have dimension > 0".into()));
        }
        if involution.nrows() != n || involution.ncols() != n {
            return Err(Error::MalformedInput(format!(
                "involution must be {n}x{n}, got {}x{}",
                involution.nrows(),
                involution.ncols()
            )));
        }
        crate::numerics::check_finite(&involution, "involution")?;
        if gamma.len() != n || gamma.iter().any(|row| row.len() != n) {
            return Err(Error::MalformedInput(format!("gamma must be {n}x{n}")));
        }
        if unit.len() != n {
            return Err(Error::MalformedInput(format!(
                "unit has {} coefficients, expected {n}",
                unit.len()
            )));
        }
        if unit.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::MalformedInput("unit has non-finite entries".into()));
        }
        let mut products = vec![vec![CVector::zeros(n); n]; n];
        for c in &constants {
            if c.left >= n || c.right >= n || c.out >= n {
                return Err(Error::MalformedInput(format!(
                    "structure constant index out of range: ({}, {}, {})",
                    c.left, c.right, c.out
                )));
            }
            if !c.value.re.is_finite() || !c.value.im.is_finite() {
                return Err(Error::MalformedInput("non-finite structure constant".into()));
            }
            if !gamma[c.left][c.right] {
                return Err(Error::MalformedInput(format!(
                    "structure constant given for undefined product {} · {}",
                    labels[c.left], labels[c.right]
                )));
            }
            products[c.left][c.right][c.out] += c.value;
        }
        // normalized sparse form: merged, sorted, zeros dropped
        let mut normalized = Vec::new();
        for (i, row) in products.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                for (k, v) in p.iter().enumerate() {
                    if *v != Complex64::new(0.0, 0.0) {
                        normalized.push(StructureConstant {
                            left: i,
                            right: j,
                            out: k,
                            value: *v,
                        });
                    }
                }
            }
        }
        Ok(Self {
            labels,
            involution,
            gamma,
            constants: normalized,
            unit,
            products,
        })
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn involution_matrix(&self) -> &CMatrix {
        &self.involution
    }

    pub fn gamma(&self, i: usize, j: usize) -> bool {
        self.gamma[i][j]
    }

    pub fn gamma_table(&self) -> &[Vec<bool>] {
        &self.gamma
    }

    pub fn structure_constants(&self) -> &[StructureConstant] {
        &self.constants
    }

    pub fn unit(&self) -> &CVector {
        &self.unit
    }

    pub fn is_total(&self) -> bool {
        self.gamma.iter().all(|row| row.iter().all(|&g| g))
    }

    /// `e_i`.
    pub fn basis(&self, i: usize) -> CVector {
        crate::numerics::SubspaceBasis::coordinate(self.dim(), [i]).vectors()[0].clone()
    }

    /// `e_i*`, the `i`-th column of the involution matrix.
    pub fn basis_star(&self, i: usize) -> CVector {
        self.involution.column(i).into_owned()
    }

    /// `e_i · e_j` if defined.
    pub fn basis_product(&self, i: usize, j: usize) -> Option<&CVector> {
        self.gamma[i][j].then(|| &self.products[i][j])
    }

    /// Indices carrying a non-negligible coefficient.
    pub fn support(&self, x: &CVector) -> Vec<usize> {
        let scale = max_abs_vec(x);
        if scale == 0.0 {
            return Vec::new();
        }
        (0..x.len())
            .filter(|&i| x[i].norm() > SUPPORT_TOL * scale)
            .collect()
    }

    fn check_len(&self, x: &CVector) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "element has {} coefficients, algebra dimension is {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// First supported basis pair `(i, j)` with `e_i · e_j` undefined.
    pub fn undefined_pair(&self, x: &CVector, y: &CVector) -> Option<(usize, usize)> {
        let sx = self.support(x);
        let sy = self.support(y);
        for &i in &sx {
            for &j in &sy {
                if !self.gamma[i][j] {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// `x · y`, or `NotInGamma` with the first offending basis pair.
    pub fn multiply(&self, x: &CVector, y: &CVector) -> Result<CVector> {
        self.check_len(x)?;
        self.check_len(y)?;
        if let Some((left, right)) = self.undefined_pair(x, y) {
            return Err(Error::NotInGamma { left, right });
        }
        let mut out = CVector::zeros(self.dim());
        for i in self.support(x) {
            for j in self.support(y) {
                out.axpy(x[i] * y[j], &self.products[i][j], Complex64::new(1.0, 0.0));
            }
        }
        Ok(out)
    }

    /// `x* = S · conj(x)`.
    pub fn involute(&self, x: &CVector) -> CVector {
        &self.involution * x.map(|z| z.conj())
    }

    /// Matrix of `y ↦ e_i · y` restricted to the columns where it is
    /// defined; undefined columns are zero.
    pub fn left_multiplication(&self, i: usize) -> CMatrix {
        let n = self.dim();
        let mut m = CMatrix::zeros(n, n);
        for j in 0..n {
            if self.gamma[i][j] {
                m.set_column(j, &self.products[i][j]);
            }
        }
        m
    }

    fn right_multiplier_indices(&self, support: &[usize]) -> Vec<usize> {
        (0..self.dim())
            .filter(|&j| support.iter().all(|&i| self.gamma[i][j]))
            .collect()
    }

    fn left_multiplier_indices(&self, support: &[usize]) -> Vec<usize> {
        (0..self.dim())
            .filter(|&i| support.iter().all(|&j| self.gamma[i][j]))
            .collect()
    }

    /// `R(x)` (elements `y` with `x · y` defined) or `L(x)`.
    pub fn multiplier_space(&self, x: &CVector, side: Side) -> Result<SubspaceBasis> {
        self.check_len(x)?;
        let support = self.support(x);
        if support.is_empty() {
            return Err(Error::ZeroElement);
        }
        let idx = match side {
            Side::Right => self.right_multiplier_indices(&support),
            Side::Left => self.left_multiplier_indices(&support),
        };
        Ok(SubspaceBasis::coordinate(self.dim(), idx))
    }

    pub fn right_universal_indices(&self) -> Vec<usize> {
        let all: Vec<usize> = (0..self.dim()).collect();
        self.right_multiplier_indices(&all)
    }

    pub fn left_universal_indices(&self) -> Vec<usize> {
        let all: Vec<usize> = (0..self.dim()).collect();
        self.left_multiplier_indices(&all)
    }

    pub fn universal_multipliers(&self) -> UniversalMultipliers {
        let n = self.dim();
        let right = self.right_universal_indices();
        let left = self.left_universal_indices();
        let middle: Vec<usize> = right.iter().copied().filter(|i| left.contains(i)).collect();
        UniversalMultipliers {
            right: SubspaceBasis::coordinate(n, right),
            left: SubspaceBasis::coordinate(n, left),
            middle: SubspaceBasis::coordinate(n, middle),
        }
    }

    fn describe(&self, x: &CVector) -> String {
        let parts: Vec<String> = self
            .support(x)
            .into_iter()
            .map(|i| {
                let z = x[i];
                if z == Complex64::new(1.0, 0.0) {
                    self.labels[i].clone()
                } else {
                    format!("({}{:+}i){}", z.re, z.im, self.labels[i])
                }
            })
            .collect();
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }

    /// Checks the axioms that the basis-pair encoding does not guarantee.
    pub fn validate_axioms(&self, pol: &TolerancePolicy) -> ValidationReport {
        let n = self.dim();
        let tol = pol.verify_tol;
        let mut checks = Vec::new();

        // x** = x
        let sq = self.involution.map(|z| z.conj()) * &self.involution;
        let residual = max_abs(&(sq - CMatrix::identity(n, n)));
        checks.push(CheckResult::within(
            "involution",
            residual,
            tol,
            Some("conj(S)·S differs from the identity".into()),
        ));

        // (x, y) ∈ Γ ⟹ (y*, x*) ∈ Γ
        let mut violations = 0usize;
        let mut witness = None;
        for i in 0..n {
            for j in 0..n {
                if !self.gamma[i][j] {
                    continue;
                }
                if let Some((p, q)) = self.undefined_pair(&self.basis_star(j), &self.basis_star(i)) {
                    violations += 1;
                    witness.get_or_insert_with(|| {
                        format!(
                            "({}, {}) in Γ but ({}, {}) not, from ({}*, {}*)",
                            self.labels[i],
                            self.labels[j],
                            self.labels[p],
                            self.labels[q],
                            self.labels[j],
                            self.labels[i]
                        )
                    });
                }
            }
        }
        checks.push(CheckResult::within(
            "gamma_involution_symmetry",
            violations as f64,
            0.0,
            witness,
        ));

        // unit
        let u = &self.unit;
        let residual = max_abs_vec(&(self.involute(u) - u));
        checks.push(CheckResult::within(
            "unit_self_adjoint",
            residual,
            tol,
            Some(format!("1* = {} differs from 1", self.describe(&self.involute(u)))),
        ));

        let mut missing = 0usize;
        let mut witness = None;
        for j in 0..n {
            let ej = self.basis(j);
            for (a, b, side) in [(u, &ej, "1 · "), (&ej, u, " · 1")] {
                if let Some((p, q)) = self.undefined_pair(a, b) {
                    missing += 1;
                    witness.get_or_insert_with(|| {
                        let expr = if side == "1 · " {
                            format!("1 · {}", self.labels[j])
                        } else {
                            format!("{} · 1", self.labels[j])
                        };
                        format!(
                            "{expr} undefined: ({}, {}) not in Γ",
                            self.labels[p], self.labels[q]
                        )
                    });
                }
            }
        }
        checks.push(CheckResult::within("unit_in_gamma", missing as f64, 0.0, witness));

        let mut residual: f64 = 0.0;
        let mut witness = None;
        for j in 0..n {
            let ej = self.basis(j);
            for left in [true, false] {
                let prod = if left {
                    self.multiply(u, &ej)
                } else {
                    self.multiply(&ej, u)
                };
                // undefined products were reported above
                let Ok(prod) = prod else { continue };
                let r = max_abs_vec(&(&prod - &ej));
                if r > residual {
                    residual = r;
                    let expr = if left {
                        format!("1 · {}", self.labels[j])
                    } else {
                        format!("{} · 1", self.labels[j])
                    };
                    witness = Some(format!("{expr} = {}", self.describe(&prod)));
                }
            }
        }
        checks.push(CheckResult::within("unit_identity", residual, tol, witness));

        // (x·y)* = y*·x*
        let mut residual: f64 = 0.0;
        let mut witness = None;
        let mut undefined = None;
        for i in 0..n {
            for j in 0..n {
                if !self.gamma[i][j] {
                    continue;
                }
                let lhs = self.involute(&self.products[i][j]);
                match self.multiply(&self.basis_star(j), &self.basis_star(i)) {
                    Ok(rhs) => {
                        let r = max_abs_vec(&(&lhs - &rhs));
                        if r > residual {
                            residual = r;
                            witness = Some(format!(
                                "({} · {})* = {} but {}* · {}* = {}",
                                self.labels[i],
                                self.labels[j],
                                self.describe(&lhs),
                                self.labels[j],
                                self.labels[i],
                                self.describe(&rhs)
                            ));
                        }
                    }
                    Err(_) => {
                        undefined.get_or_insert((i, j));
                    }
                }
            }
        }
        let check = match undefined {
            Some((i, j)) => CheckResult::fail(
                "product_involution",
                f64::max(residual, 1.0),
                format!(
                    "{}* · {}* is undefined although {} · {} is",
                    self.labels[j], self.labels[i], self.labels[i], self.labels[j]
                ),
            ),
            None => CheckResult::within("product_involution", residual, tol, witness),
        };
        checks.push(check);

        ValidationReport { checks }
    }

    /// Exhaustive check over basis triples `(x, y, z)` with `y ∈ R(x)` and
    /// `z` in the right universal multipliers: `y·z ∈ R(x)` and
    /// `(x·y)·z = x·(y·z)`.
    pub fn check_semi_associative(&self, pol: &TolerancePolicy) -> SemiAssociativity {
        let n = self.dim();
        let ra = self.right_universal_indices();
        let mut max_residual: f64 = 0.0;
        let mut witness = None;
        for i in 0..n {
            let right_of_x = self.right_multiplier_indices(&[i]);
            for j in 0..n {
                if !self.gamma[i][j] {
                    continue;
                }
                for &k in &ra {
                    let yz = &self.products[j][k];
                    let scale = yz.norm().max(1.0);
                    // part of y·z outside R(x)
                    let outside = (0..n)
                        .filter(|l| !right_of_x.contains(l))
                        .map(|l| yz[l].norm())
                        .fold(0.0, f64::max);
                    let mut residual = outside / scale;
                    if residual <= pol.verify_tol {
                        let mut inside = yz.clone();
                        for l in 0..n {
                            if !right_of_x.contains(&l) {
                                inside[l] = Complex64::new(0.0, 0.0);
                            }
                        }
                        let lhs = self
                            .multiply(&self.products[i][j], &self.basis(k))
                            .expect("z is a universal right multiplier");
                        let rhs = self
                            .multiply(&self.basis(i), &inside)
                            .expect("support of y·z lies in R(x)");
                        residual = max_abs_vec(&(lhs - rhs));
                    }
                    if residual > max_residual {
                        max_residual = residual;
                    }
                    if residual > pol.verify_tol && witness.is_none() {
                        witness = Some((i, j, k));
                    }
                }
            }
        }
        SemiAssociativity {
            holds: witness.is_none(),
            max_residual,
            witness,
        }
    }
}
