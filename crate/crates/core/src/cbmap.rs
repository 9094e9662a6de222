//! Conjugate-bilinear maps `Φ: D(Φ) × D(Φ) → S(X)` into sesquilinear forms
//! on a finite-dimensional space `X = C^d`.
//!
//! A map is stored as the tensor `T[i][j][p][q] = Φ(d_i, d_j)(f_p, f_q)`
//! over a basis `{d_i}` of the domain and the standard basis `{f_p}` of
//! `X`. It is linear in the first algebra slot and conjugate-linear in the
//! second, matching `Φ(x, y)(ξ, η) = <π(x)Vξ, π(y)Vη>`.
//!
//! Flattening `(i, p)` into one index gives the Gram form of the
//! semidefinite inner product on `D(Φ) ⊗ X`:
//! `<u, v> = Σ u_(i,p) conj(v_(j,q)) T[i][j][p][q] = v^H G u`.

use num_complex::Complex64;

use crate::check::{all_passed, find, CheckResult};
use crate::error::{Error, Result};
use crate::numerics::random::{complex_gaussian_vec, complex_normal};
use crate::numerics::{
    max_abs, psd_min_eig, pseudo_inverse, rank_range_null, CMatrix, CVector, RankDecomposition,
    SubspaceBasis, TolerancePolicy,
};
use crate::palgebra::Algebra;

/// Number of random `ξ` used by the sampled density check.
pub const DEFAULT_DENSITY_SAMPLES: usize = 64;
/// Number of random domain elements probed by [`CBMap::check_positive`].
const POSITIVITY_SAMPLES: usize = 32;

const STREAM_POSITIVE: u64 = 0x706f73;
const STREAM_DENSITY: u64 = 0x6934;

/// Which of the two invariance notions a core is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvarianceMode {
    /// Conditions (I)1 to (I)4 only.
    Quasi,
    /// Additionally `Φ(a*x, by) = Φ(x, (ab)y)` on defined pairs.
    Full,
}

impl InvarianceMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            InvarianceMode::Quasi => "quasi",
            InvarianceMode::Full => "full",
        }
    }
}

impl std::str::FromStr for InvarianceMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quasi" => Ok(InvarianceMode::Quasi),
            "full" => Ok(InvarianceMode::Full),
            other => Err(Error::MalformedInput(format!("unknown mode {other:?}"))),
        }
    }
}

/// A sesquilinear form on `X`, `value(ξ, η) = Σ ξ_p conj(η_q) M[p][q]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SesquiForm(pub CMatrix);

impl SesquiForm {
    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn value(&self, xi: &CVector, eta: &CVector) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for p in 0..self.0.nrows() {
            for q in 0..self.0.ncols() {
                acc += xi[p] * eta[q].conj() * self.0[(p, q)];
            }
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpReport {
    pub is_cp: bool,
    pub min_eig: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositivityReport {
    pub positive: bool,
    pub min_eig: f64,
    pub witness: Option<String>,
}

#[derive(Debug, Clone)]
pub struct CoreReport {
    pub mode: InvarianceMode,
    pub conditions: Vec<CheckResult>,
    /// The core equals the universal right multipliers and every checked
    /// condition holds.
    pub totally_invariant: bool,
}

impl CoreReport {
    pub fn passed(&self) -> bool {
        all_passed(&self.conditions)
    }

    pub fn condition(&self, name: &str) -> Option<&CheckResult> {
        find(&self.conditions, name)
    }

    /// The conditions a dilation structurally needs: domain inclusion,
    /// (I)1, (I)2 and the exact (I)4.
    pub fn structural_passed(&self) -> bool {
        ["core_in_domain", "I1", "I2", "I4_exact"]
            .iter()
            .all(|n| self.condition(n).is_some_and(|c| c.passed))
    }
}

#[derive(Debug, Clone)]
pub struct CBMap {
    algebra: Algebra,
    domain: Vec<CVector>,
    x_dim: usize,
    tensor: Vec<Complex64>,
    core: SubspaceBasis,
    // left inverse of the domain basis matrix
    coord: CMatrix,
}

/// Coefficient vector of `x ⊗ ξ` in `D(Φ) ⊗ X`, index `i * d + p`.
pub fn tensor_vec(coords: &CVector, xi: &CVector) -> CVector {
    let d = xi.len();
    CVector::from_fn(coords.len() * d, |k, _| coords[k / d] * xi[k % d])
}

impl CBMap {
    pub fn new(
        algebra: Algebra,
        domain: Vec<CVector>,
        x_dim: usize,
        tensor: Vec<Complex64>,
        core: SubspaceBasis,
    ) -> Result<Self> {
        let n = algebra.dim();
        let m = domain.len();
        if domain.iter().any(|v| v.len() != n) {
            return Err(Error::MalformedInput(format!(
                "domain vectors must have {n} coefficients"
            )));
        }
        if tensor.len() != m * m * x_dim * x_dim {
            return Err(Error::MalformedInput(format!(
                "tensor has {} entries, expected {m}x{m}x{x_dim}x{x_dim}",
                tensor.len()
            )));
        }
        if tensor.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::MalformedInput("tensor has non-finite entries".into()));
        }
        if core.ambient() != n {
            return Err(Error::MalformedInput(format!(
                "core vectors must have {n} coefficients"
            )));
        }
        let dmat = SubspaceBasis::new(n, domain.clone())?;
        let pol = TolerancePolicy::default();
        if dmat.dim(&pol) != m {
            return Err(Error::MalformedInput(
                "domain basis is not linearly independent".into(),
            ));
        }
        let coord = pseudo_inverse(&dmat.as_matrix(), 1e-12);
        Ok(Self {
            algebra,
            domain,
            x_dim,
            tensor,
            core,
            coord,
        })
    }

    /// Builds a map on the whole algebra (standard basis as domain basis)
    /// from a tensor function.
    pub fn from_fn(
        algebra: Algebra,
        x_dim: usize,
        core: SubspaceBasis,
        mut f: impl FnMut(usize, usize, usize, usize) -> Complex64,
    ) -> Result<Self> {
        let n = algebra.dim();
        let mut tensor = Vec::with_capacity(n * n * x_dim * x_dim);
        for i in 0..n {
            for j in 0..n {
                for p in 0..x_dim {
                    for q in 0..x_dim {
                        tensor.push(f(i, j, p, q));
                    }
                }
            }
        }
        let domain = (0..n).map(|i| algebra.basis(i)).collect();
        Self::new(algebra, domain, x_dim, tensor, core)
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }

    pub fn domain(&self) -> &[CVector] {
        &self.domain
    }

    pub fn domain_subspace(&self) -> SubspaceBasis {
        SubspaceBasis::new(self.algebra.dim(), self.domain.clone())
            .expect("validated at construction")
    }

    pub fn domain_dim(&self) -> usize {
        self.domain.len()
    }

    pub fn x_dim(&self) -> usize {
        self.x_dim
    }

    pub fn core(&self) -> &SubspaceBasis {
        &self.core
    }

    pub fn tensor(&self) -> &[Complex64] {
        &self.tensor
    }

    pub fn with_core(&self, core: SubspaceBasis) -> Result<Self> {
        Self::new(
            self.algebra.clone(),
            self.domain.clone(),
            self.x_dim,
            self.tensor.clone(),
            core,
        )
    }

    fn idx(&self, i: usize, j: usize, p: usize, q: usize) -> usize {
        let m = self.domain.len();
        let d = self.x_dim;
        ((i * m + j) * d + p) * d + q
    }

    /// `Φ(d_i, d_j)(f_p, f_q)`.
    pub fn t(&self, i: usize, j: usize, p: usize, q: usize) -> Complex64 {
        self.tensor[self.idx(i, j, p, q)]
    }

    /// Coordinates of `x` in the domain basis, or `NotInDomain`.
    pub fn coords(&self, x: &CVector, pol: &TolerancePolicy) -> Result<CVector> {
        if x.len() != self.algebra.dim() {
            return Err(Error::DimensionMismatch(format!(
                "element has {} coefficients, algebra dimension is {}",
                x.len(),
                self.algebra.dim()
            )));
        }
        let c = &self.coord * x;
        let mut back = CVector::zeros(x.len());
        for (k, d) in self.domain.iter().enumerate() {
            back.axpy(c[k], d, Complex64::new(1.0, 0.0));
        }
        let residual = (back - x).norm();
        if residual > pol.verify_tol * x.norm() {
            return Err(Error::NotInDomain { residual });
        }
        Ok(c)
    }

    /// `Φ(x, y)` for `x, y` given by domain coordinates.
    pub fn evaluate_coords(&self, cx: &CVector, cy: &CVector) -> SesquiForm {
        let m = self.domain.len();
        let d = self.x_dim;
        let mut out = CMatrix::zeros(d, d);
        for i in 0..m {
            if cx[i] == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..m {
                let w = cx[i] * cy[j].conj();
                if w == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for p in 0..d {
                    for q in 0..d {
                        out[(p, q)] += w * self.t(i, j, p, q);
                    }
                }
            }
        }
        SesquiForm(out)
    }

    /// `Φ(x, y)` for algebra elements in the domain.
    pub fn evaluate(&self, x: &CVector, y: &CVector, pol: &TolerancePolicy) -> Result<SesquiForm> {
        let cx = self.coords(x, pol)?;
        let cy = self.coords(y, pol)?;
        Ok(self.evaluate_coords(&cx, &cy))
    }

    pub fn max_entry(&self) -> f64 {
        self.tensor.iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    /// `max |T[i][j][p][q] - conj(T[j][i][q][p])|`.
    pub fn hermitian_symmetry_residual(&self) -> f64 {
        let m = self.domain.len();
        let d = self.x_dim;
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                for p in 0..d {
                    for q in 0..d {
                        let r = (self.t(i, j, p, q) - self.t(j, i, q, p).conj()).norm();
                        worst = worst.max(r);
                    }
                }
            }
        }
        worst
    }

    fn require_symmetric(&self, pol: &TolerancePolicy) -> Result<()> {
        let residual = self.hermitian_symmetry_residual();
        if residual > pol.verify_tol * self.max_entry().max(1.0) {
            return Err(Error::NotHermitianSymmetric { residual });
        }
        Ok(())
    }

    /// The Gram matrix `G` of the inner product on `D(Φ) ⊗ X`:
    /// `G[(j,q)][(i,p)] = T[i][j][p][q]`, so `<u, v> = v^H G u`.
    pub fn gram(&self) -> CMatrix {
        let m = self.domain.len();
        let d = self.x_dim;
        let n = m * d;
        let mut g = CMatrix::zeros(n, n);
        for i in 0..m {
            for j in 0..m {
                for p in 0..d {
                    for q in 0..d {
                        g[(j * d + q, i * d + p)] = self.t(i, j, p, q);
                    }
                }
            }
        }
        g
    }

    /// Semidefinite inner product of two vectors of `D(Φ) ⊗ X`.
    pub fn inner(&self, u: &CVector, v: &CVector) -> Complex64 {
        v.dotc(&(self.gram() * u))
    }

    /// Quotient of `D(Φ) ⊗ X` by the null space of the Gram form.
    pub fn quotient(&self, pol: &TolerancePolicy) -> Result<RankDecomposition> {
        rank_range_null(&self.gram(), pol)
    }

    /// Complete positivity: in finite dimension every finite block sum
    /// `Σ Φ(x_k, x_l)(ξ_k, ξ_l)` is a value of the flattened Gram form, so a
    /// single PSD test decides it.
    pub fn check_completely_positive(&self, pol: &TolerancePolicy) -> Result<CpReport> {
        self.require_symmetric(pol)?;
        let (is_cp, min_eig) = psd_min_eig(&self.gram(), pol)?;
        Ok(CpReport { is_cp, min_eig })
    }

    /// Positivity: `Φ(x, x)` is a PSD form for each domain basis vector and
    /// for seeded random domain elements.
    pub fn check_positive(&self, pol: &TolerancePolicy) -> Result<PositivityReport> {
        self.require_symmetric(pol)?;
        let m = self.domain.len();
        let mut rng = pol.rng(STREAM_POSITIVE);
        let mut min_eig = f64::INFINITY;
        let mut positive = true;
        let mut witness = None;
        for k in 0..(m + POSITIVITY_SAMPLES) {
            let c = if k < m {
                crate::numerics::unit_vector(m, k)
            } else {
                complex_gaussian_vec(m, &mut rng)
            };
            let form = self.evaluate_coords(&c, &c);
            let (ok, e) = psd_min_eig(form.matrix(), pol)?;
            min_eig = min_eig.min(e);
            if !ok && positive {
                positive = false;
                witness = Some(if k < m {
                    format!("Φ(d_{k}, d_{k}) has eigenvalue {e:.3e}")
                } else {
                    format!("random domain element #{} gives eigenvalue {e:.3e}", k - m)
                });
            }
        }
        if m == 0 || self.x_dim == 0 {
            min_eig = 0.0;
        }
        Ok(PositivityReport {
            positive,
            min_eig,
            witness,
        })
    }

    pub fn check_core(
        &self,
        core: &SubspaceBasis,
        pol: &TolerancePolicy,
        mode: InvarianceMode,
    ) -> Result<CoreReport> {
        self.check_core_with_samples(core, pol, mode, DEFAULT_DENSITY_SAMPLES)
    }

    /// Checks the core conditions for `core`.
    ///
    /// The density condition is checked in two tiers: exactly, as equality
    /// of the quotient images of `B ⊗ X` and `D(Φ) ⊗ X`; and by sampling,
    /// testing for `samples` random `ξ` that each `λ(d_i ⊗ ξ)` lies in the
    /// image of `B ⊗ ξ`.
    pub fn check_core_with_samples(
        &self,
        core: &SubspaceBasis,
        pol: &TolerancePolicy,
        mode: InvarianceMode,
        samples: usize,
    ) -> Result<CoreReport> {
        let alg = &self.algebra;
        let n = alg.dim();
        if core.ambient() != n {
            return Err(Error::DimensionMismatch(format!(
                "core vectors have {} coefficients, algebra dimension is {n}",
                core.ambient()
            )));
        }
        let tol = pol.verify_tol;
        let scale = self.max_entry().max(1.0);
        let core = core.orthonormalize(pol);
        let domain = self.domain_subspace();
        let ra = alg.universal_multipliers().right;
        let mut conditions = Vec::new();

        let mut worst: f64 = 0.0;
        let mut witness = None;
        for (k, b) in core.vectors().iter().enumerate() {
            let r = domain.distance(b, pol)?;
            if r > worst {
                worst = r;
                witness = Some(format!("core vector #{k} is at distance {r:.3e} from D(Φ)"));
            }
        }
        conditions.push(CheckResult::within("core_in_domain", worst, tol, witness));

        // (I)1: B ⊆ RA
        let mut worst: f64 = 0.0;
        let mut witness = None;
        for (k, b) in core.vectors().iter().enumerate() {
            let r = ra.distance(b, pol)?;
            if r > worst {
                worst = r;
                witness = Some(format!("core vector #{k} is at distance {r:.3e} from RA"));
            }
        }
        conditions.push(CheckResult::within("I1", worst, tol, witness));

        // (I)2: A·B ⊆ D(Φ)
        let mut worst: f64 = 0.0;
        let mut witness = None;
        for a in 0..n {
            for (k, b) in core.vectors().iter().enumerate() {
                let r = match alg.multiply(&alg.basis(a), b) {
                    Ok(ab) => domain.distance(&ab, pol)? / ab.norm().max(1.0),
                    Err(_) => f64::INFINITY,
                };
                if r > worst {
                    worst = r;
                    witness = Some(format!(
                        "{} · (core vector #{k}) is {}",
                        alg.label(a),
                        if r.is_finite() { "outside D(Φ)" } else { "undefined" }
                    ));
                }
            }
        }
        conditions.push(finite_check("I2", worst, tol, witness));

        // (I)3: Φ(ax, y) = Φ(x, a*y)
        let mut worst: f64 = 0.0;
        let mut witness = None;
        for a in 0..n {
            let ea = alg.basis(a);
            let ea_star = alg.basis_star(a);
            for (kx, x) in core.vectors().iter().enumerate() {
                for (ky, y) in core.vectors().iter().enumerate() {
                    let r = (|| -> Result<f64> {
                        let lhs = self.evaluate(&alg.multiply(&ea, x)?, y, pol)?;
                        let rhs = self.evaluate(x, &alg.multiply(&ea_star, y)?, pol)?;
                        Ok(max_abs(&(lhs.0 - rhs.0)) / scale)
                    })()
                    .unwrap_or(f64::INFINITY);
                    if r > worst {
                        worst = r;
                        witness = Some(format!(
                            "Φ({} x, y) ≠ Φ(x, {}* y) for core vectors x=#{kx}, y=#{ky}",
                            alg.label(a),
                            alg.label(a)
                        ));
                    }
                }
            }
        }
        conditions.push(finite_check("I3", worst, tol, witness));

        if mode == InvarianceMode::Full {
            // (I)'3: Φ(a*x, by) = Φ(x, (ab)y) for (a, b) ∈ Γ
            let mut worst: f64 = 0.0;
            let mut witness = None;
            for a in 0..n {
                for b in 0..n {
                    let Some(ab) = alg.basis_product(a, b) else { continue };
                    for (kx, x) in core.vectors().iter().enumerate() {
                        for (ky, y) in core.vectors().iter().enumerate() {
                            let r = (|| -> Result<f64> {
                                let lhs = self.evaluate(
                                    &alg.multiply(&alg.basis_star(a), x)?,
                                    &alg.multiply(&alg.basis(b), y)?,
                                    pol,
                                )?;
                                let rhs = self.evaluate(x, &alg.multiply(ab, y)?, pol)?;
                                Ok(max_abs(&(lhs.0 - rhs.0)) / scale)
                            })()
                            .unwrap_or(f64::INFINITY);
                            if r > worst {
                                worst = r;
                                witness = Some(format!(
                                    "Φ({}* x, {} y) ≠ Φ(x, ({}·{}) y) for x=#{kx}, y=#{ky}",
                                    alg.label(a),
                                    alg.label(b),
                                    alg.label(a),
                                    alg.label(b)
                                ));
                            }
                        }
                    }
                }
            }
            conditions.push(finite_check("I3_prime", worst, tol, witness));
        }

        // (I)4
        let in_domain = conditions[0].passed;
        match (in_domain, self.quotient(pol)) {
            (true, Ok(q)) => {
                let (exact, sampled) = self.density_checks(&core, &q, pol, samples)?;
                conditions.push(exact);
                conditions.push(sampled);
            }
            (false, _) => {
                for name in ["I4_exact", "I4_sampled"] {
                    conditions.push(CheckResult::fail(
                        name,
                        f64::INFINITY,
                        "core is not contained in D(Φ)".into(),
                    ));
                }
            }
            (true, Err(e)) => {
                for name in ["I4_exact", "I4_sampled"] {
                    conditions.push(CheckResult::fail(
                        name,
                        f64::INFINITY,
                        format!("quotient unavailable: {e}"),
                    ));
                }
            }
        }

        let totally_invariant = all_passed(&conditions)
            && core.same_span(&ra.intersection(&domain, pol)?, pol)?
            && ra.contains_subspace(&core, pol)?
            && core.same_span(&ra, pol)?;
        Ok(CoreReport {
            mode,
            conditions,
            totally_invariant,
        })
    }

    fn density_checks(
        &self,
        core: &SubspaceBasis,
        q: &RankDecomposition,
        pol: &TolerancePolicy,
        samples: usize,
    ) -> Result<(CheckResult, CheckResult)> {
        let d = self.x_dim;
        let qm = &q.quotient_map;
        let core_coords: Vec<CVector> = core
            .vectors()
            .iter()
            .map(|b| self.coords(b, pol))
            .collect::<Result<_>>()?;

        let mut image = Vec::new();
        for c in &core_coords {
            for p in 0..d {
                let f = crate::numerics::unit_vector(d, p);
                image.push(qm * tensor_vec(c, &f));
            }
        }
        let image_dim = SubspaceBasis::new(q.rank, image)?.dim(pol);
        let exact = if image_dim == q.rank {
            CheckResult::pass("I4_exact", 0.0)
        } else {
            CheckResult::fail(
                "I4_exact",
                (q.rank - image_dim) as f64,
                format!(
                    "λ(B ⊗ X) has dimension {image_dim}, quotient has dimension {}",
                    q.rank
                ),
            )
        };

        let m = self.domain.len();
        let op_scale = q.eigenvalues.first().copied().unwrap_or(0.0).max(0.0).sqrt();
        let mut rng = pol.rng(STREAM_DENSITY);
        let mut worst: f64 = 0.0;
        let mut witness = None;
        for s in 0..samples {
            if d == 0 || q.rank == 0 {
                break;
            }
            let xi = complex_gaussian_vec(d, &mut rng);
            let span = SubspaceBasis::new(
                q.rank,
                core_coords.iter().map(|c| qm * tensor_vec(c, &xi)).collect(),
            )?;
            for i in 0..m {
                let ei = crate::numerics::unit_vector(m, i);
                let tv = tensor_vec(&ei, &xi);
                let v = qm * &tv;
                let denom = op_scale * tv.norm();
                let r = if denom > 0.0 {
                    span.distance(&v, pol)? / denom
                } else {
                    0.0
                };
                if r > worst {
                    worst = r;
                    witness = Some(format!(
                        "sample #{s}: λ(d_{i} ⊗ ξ) is not in λ(B ⊗ ξ) (relative distance {r:.3e})"
                    ));
                }
            }
        }
        // keep rng consumption independent of early exits
        let _ = complex_normal(&mut rng);
        let sampled = CheckResult::within("I4_sampled", worst, pol.verify_tol, witness);
        Ok((exact, sampled))
    }

    /// The same map expressed in the domain basis `d'_k = Σ_i U[i][k] d_i`
    /// for an invertible `U`.
    pub fn rebased(&self, u: &CMatrix) -> Result<Self> {
        let m = self.domain.len();
        if u.nrows() != m || u.ncols() != m {
            return Err(Error::DimensionMismatch(format!(
                "basis change must be {m}x{m}"
            )));
        }
        let d = self.x_dim;
        let n = self.algebra.dim();
        let domain: Vec<CVector> = (0..m)
            .map(|k| {
                let mut v = CVector::zeros(n);
                for i in 0..m {
                    v.axpy(u[(i, k)], &self.domain[i], Complex64::new(1.0, 0.0));
                }
                v
            })
            .collect();
        let mut tensor = vec![Complex64::new(0.0, 0.0); m * m * d * d];
        for k in 0..m {
            for l in 0..m {
                let form = self.evaluate_coords(
                    &u.column(k).into_owned(),
                    &u.column(l).into_owned(),
                );
                for p in 0..d {
                    for q in 0..d {
                        tensor[((k * m + l) * d + p) * d + q] = form.0[(p, q)];
                    }
                }
            }
        }
        Self::new(self.algebra.clone(), domain, d, tensor, self.core.clone())
    }
}

fn finite_check(name: &str, residual: f64, tol: f64, witness: Option<String>) -> CheckResult {
    CheckResult::within(name, residual, tol, witness)
}

/// Checks that `pi` (one matrix per basis element) is a *-representation:
/// `π(e_i*) = π(e_i)^H` and `π(e_i)π(e_j) = π(e_i e_j)` on defined pairs.
pub fn check_representation(
    algebra: &Algebra,
    pi: &[CMatrix],
    products_of: impl Fn(usize, usize) -> bool,
    pol: &TolerancePolicy,
) -> Result<Vec<CheckResult>> {
    let n = algebra.dim();
    if pi.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} representation matrices for an algebra of dimension {n}",
            pi.len()
        )));
    }
    let h = pi.first().map(|m| m.nrows()).unwrap_or(0);
    if pi.iter().any(|m| m.nrows() != h || m.ncols() != h) {
        return Err(Error::DimensionMismatch(
            "representation matrices must be square and of equal size".into(),
        ));
    }
    let apply = |x: &CVector| -> CMatrix {
        let mut out = CMatrix::zeros(h, h);
        for k in 0..n {
            if x[k] != Complex64::new(0.0, 0.0) {
                out += &pi[k] * x[k];
            }
        }
        out
    };
    let scale = pi.iter().map(max_abs).fold(1.0, f64::max);
    let tol = pol.verify_tol * scale.max(scale * scale);

    let mut worst: f64 = 0.0;
    let mut witness = None;
    for i in 0..n {
        let r = max_abs(&(apply(&algebra.basis_star(i)) - pi[i].adjoint()));
        if r > worst {
            worst = r;
            witness = Some(format!("π({}*) ≠ π({})^H", algebra.label(i), algebra.label(i)));
        }
    }
    let star = CheckResult::within("star", worst, tol, witness);

    let mut worst: f64 = 0.0;
    let mut witness = None;
    for i in 0..n {
        for j in 0..n {
            let Some(prod) = algebra.basis_product(i, j) else { continue };
            if !products_of(i, j) {
                continue;
            }
            let r = max_abs(&(&pi[i] * &pi[j] - apply(prod)));
            if r > worst {
                worst = r;
                witness = Some(format!(
                    "π({})π({}) ≠ π({} · {})",
                    algebra.label(i),
                    algebra.label(j),
                    algebra.label(i),
                    algebra.label(j)
                ));
            }
        }
    }
    let mult = CheckResult::within("multiplicative", worst, tol, witness);
    Ok(vec![star, mult])
}

/// `Φ(a, b)(ξ, η) = <π(a)Vξ, π(b)Vη>` on the whole algebra, with the
/// universal right multipliers as core.
pub fn from_rep_and_v(
    algebra: &Algebra,
    pi: &[CMatrix],
    v: &CMatrix,
    pol: &TolerancePolicy,
) -> Result<CBMap> {
    let checks = check_representation(algebra, pi, |_, _| true, pol)?;
    if let Some(bad) = checks.iter().find(|c| !c.passed) {
        return Err(Error::NotARepresentation(format!(
            "{} (residual {:.3e})",
            bad.witness.clone().unwrap_or_default(),
            bad.residual
        )));
    }
    let h = pi[0].nrows();
    if v.nrows() != h {
        return Err(Error::DimensionMismatch(format!(
            "V maps into dimension {}, representation acts on {h}",
            v.nrows()
        )));
    }
    let images: Vec<CMatrix> = pi.iter().map(|p| p * v).collect();
    let gram: Vec<Vec<CMatrix>> = images
        .iter()
        .map(|a| images.iter().map(|b| b.adjoint() * a).collect())
        .collect();
    let core = algebra.universal_multipliers().right;
    // <π(e_i)V f_p, π(e_j)V f_q> = ((π_j V)^H (π_i V))[q][p]
    CBMap::from_fn(algebra.clone(), v.ncols(), core, |i, j, p, q| gram[i][j][(q, p)])
}

/// Lift of a linear map `F` on a total algebra to the conjugate-bilinear
/// map `F°(a, b) = <F(b* a) ·, ·>`, so that `F°(a, 1) = F(a)`.
pub fn lift_linear_map(algebra: &Algebra, f: &[CMatrix]) -> Result<CBMap> {
    let n = algebra.dim();
    for i in 0..n {
        for j in 0..n {
            if !algebra.gamma(i, j) {
                return Err(Error::PartialProductUndefined { left: i, right: j });
            }
        }
    }
    if f.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} images for an algebra of dimension {n}",
            f.len()
        )));
    }
    let d = f[0].nrows();
    if f.iter().any(|m| m.nrows() != d || m.ncols() != d) {
        return Err(Error::DimensionMismatch("images must be square of equal size".into()));
    }
    let apply = |x: &CVector| -> CMatrix {
        let mut out = CMatrix::zeros(d, d);
        for k in 0..n {
            out += &f[k] * x[k];
        }
        out
    };
    let mut table = vec![vec![CMatrix::zeros(d, d); n]; n];
    for i in 0..n {
        for j in 0..n {
            let prod = algebra.multiply(&algebra.basis_star(j), &algebra.basis(i))?;
            table[i][j] = apply(&prod);
        }
    }
    let core = algebra.universal_multipliers().right;
    // <F(e_j* e_i) f_p, f_q> = F(e_j* e_i)[q][p]
    CBMap::from_fn(algebra.clone(), d, core, |i, j, p, q| table[i][j][(q, p)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::numerics::SubspaceBasis;

    fn pol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    fn f(d: usize, p: usize) -> CVector {
        SubspaceBasis::coordinate(d, [p]).vectors()[0].clone()
    }

    #[test]
    fn evaluate_phi_id() {
        let phi = fixtures::phi_id_q2();
        let a = phi.algebra();
        let e11 = a.basis(0);
        let e12 = a.basis(1);
        let v = phi.evaluate(&e11, &e11, &pol()).unwrap().value(&f(2, 0), &f(2, 0));
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let v = phi.evaluate(&e12, &e12, &pol()).unwrap().value(&f(2, 1), &f(2, 1));
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let l = phi.evaluate(&e11, &e12, &pol()).unwrap().value(&f(2, 0), &f(2, 1));
        let r = phi.evaluate(&e12, &e11, &pol()).unwrap().value(&f(2, 1), &f(2, 0));
        assert!((l - r.conj()).norm() < 1e-15);
    }

    #[test]
    fn evaluate_is_sesquilinear() {
        let phi = fixtures::transpose_lift_m2();
        let mut rng = pol().rng(9);
        let x1 = complex_gaussian_vec(4, &mut rng);
        let x2 = complex_gaussian_vec(4, &mut rng);
        let y = complex_gaussian_vec(4, &mut rng);
        let s = complex_normal(&mut rng);
        let lhs = phi.evaluate(&(&x1 + &x2 * s), &y, &pol()).unwrap();
        let rhs = phi.evaluate(&x1, &y, &pol()).unwrap().0
            + phi.evaluate(&x2, &y, &pol()).unwrap().0 * s;
        assert!(max_abs(&(lhs.0 - rhs)) < 1e-12);
        let lhs = phi.evaluate(&y, &(&x1 * s), &pol()).unwrap();
        let rhs = phi.evaluate(&y, &x1, &pol()).unwrap().0 * s.conj();
        assert!(max_abs(&(lhs.0 - rhs)) < 1e-12);
    }

    #[test]
    fn not_in_domain() {
        let a = fixtures::m2();
        let core = SubspaceBasis::zero(4);
        let phi = CBMap::new(a.clone(), vec![a.basis(0)], 1, vec![Complex64::new(1.0, 0.0)], core).unwrap();
        assert!(matches!(
            phi.evaluate(&a.basis(1), &a.basis(0), &pol()),
            Err(Error::NotInDomain { .. })
        ));
    }

    #[test]
    fn cp_separation() {
        let id = fixtures::identity_lift_m2().check_completely_positive(&pol()).unwrap();
        assert!(id.is_cp && id.min_eig >= -1e-10);
        let tr = fixtures::transpose_lift_m2();
        let cp = tr.check_completely_positive(&pol()).unwrap();
        assert!(!cp.is_cp && cp.min_eig <= -0.5);
        // frozen oracle: min eigenvalue of the flattened Gram is -1
        assert!((cp.min_eig + 1.0).abs() < 1e-12);
        assert!(tr.check_positive(&pol()).unwrap().positive);
    }

    #[test]
    fn zero_tensor_is_cp() {
        let a = fixtures::m2();
        let core = a.universal_multipliers().right;
        let phi = CBMap::from_fn(a, 2, core, |_, _, _, _| Complex64::new(0.0, 0.0)).unwrap();
        let cp = phi.check_completely_positive(&pol()).unwrap();
        assert!(cp.is_cp);
        assert_eq!(cp.min_eig, 0.0);
    }

    #[test]
    fn negative_diagonal_not_positive() {
        let a = fixtures::d2();
        let core = a.universal_multipliers().right;
        let phi = CBMap::from_fn(a, 2, core, |i, j, p, q| {
            if (i, j, p, q) == (1, 1, 1, 1) {
                Complex64::new(-1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .unwrap();
        let r = phi.check_positive(&pol()).unwrap();
        assert!(!r.positive);
        assert!(!phi.check_completely_positive(&pol()).unwrap().is_cp);
    }

    #[test]
    fn asymmetric_tensor_rejected() {
        let a = fixtures::d2();
        let core = a.universal_multipliers().right;
        let phi = CBMap::from_fn(a, 1, core, |i, j, _, _| {
            Complex64::new(if (i, j) == (0, 1) { 1.0 } else { 0.0 }, 0.0)
        })
        .unwrap();
        assert!(matches!(
            phi.check_completely_positive(&pol()),
            Err(Error::NotHermitianSymmetric { .. })
        ));
        assert!(matches!(phi.check_positive(&pol()), Err(Error::NotHermitianSymmetric { .. })));
    }

    #[test]
    fn gram_hermitian_iff_symmetric() {
        for phi in [
            fixtures::phi_id_q2(),
            fixtures::identity_lift_m2(),
            fixtures::transpose_lift_m2(),
            fixtures::depolarizing_lift_m2(),
        ] {
            assert!(phi.hermitian_symmetry_residual() < 1e-14);
            assert!(crate::numerics::hermitian_residual(&phi.gram()) < 1e-14);
        }
        let a = fixtures::d2();
        let core = a.universal_multipliers().right;
        let phi = CBMap::from_fn(a, 1, core, |i, j, _, _| {
            Complex64::new(0.0, if (i, j) == (0, 1) { 1.0 } else { 0.0 })
        })
        .unwrap();
        assert!(phi.hermitian_symmetry_residual() > 0.5);
        assert!(crate::numerics::hermitian_residual(&phi.gram()) > 0.5);
    }

    #[test]
    fn phi_id_core_a0_is_invariant() {
        let phi = fixtures::phi_id_q2();
        let a0 = SubspaceBasis::coordinate(4, [0, 3]);
        let report = phi.check_core(&a0, &pol(), InvarianceMode::Full).unwrap();
        assert!(report.passed(), "{:?}", report.conditions);
        assert!(report.totally_invariant);
        assert!(report.condition("I3").unwrap().residual <= 1e-12);
    }

    #[test]
    fn degenerate_cores_fail_density() {
        let phi = fixtures::phi_id_q2();
        let zero = SubspaceBasis::zero(4);
        let r = phi.check_core(&zero, &pol(), InvarianceMode::Quasi).unwrap();
        assert!(!r.condition("I4_exact").unwrap().passed);
        let e11 = SubspaceBasis::coordinate(4, [0]);
        let r = phi.check_core(&e11, &pol(), InvarianceMode::Quasi).unwrap();
        assert!(!r.condition("I4_exact").unwrap().passed);
        assert!(!r.condition("I4_sampled").unwrap().passed);
        assert!(r.condition("I1").unwrap().passed);
        assert!(r.condition("I3").unwrap().passed);
    }

    #[test]
    fn core_outside_right_multipliers_fails_i1() {
        let phi = fixtures::phi_id_q2();
        let b = SubspaceBasis::coordinate(4, [0, 1, 3]);
        let r = phi.check_core(&b, &pol(), InvarianceMode::Quasi).unwrap();
        assert!(!r.condition("I1").unwrap().passed);
        assert!(!r.condition("I2").unwrap().passed);
    }

    #[test]
    fn from_rep_identity_gives_phi_id() {
        let phi = fixtures::phi_id_q2();
        let a = phi.algebra();
        // Φ(a,b)(ξ,η) = <aξ, bη> checked against matrices directly
        for i in 0..4 {
            for j in 0..4 {
                let ai = fixtures::matrix_of(&a.basis(i), 2);
                let bj = fixtures::matrix_of(&a.basis(j), 2);
                for p in 0..2 {
                    for q in 0..2 {
                        let want = (&bj * f(2, q)).dotc(&(&ai * f(2, p)));
                        assert!((phi.t(i, j, p, q) - want).norm() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn vector_state_form() {
        // d = 1, V ξ = ξ v
        let a = fixtures::m2();
        let pi: Vec<CMatrix> = (0..4).map(|i| fixtures::matrix_of(&a.basis(i), 2)).collect();
        let v = CMatrix::from_column_slice(2, 1, &[Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]);
        let phi = from_rep_and_v(&a, &pi, &v, &pol()).unwrap();
        let vv = v.column(0).into_owned();
        for i in 0..4 {
            for j in 0..4 {
                let want = (&pi[j] * &vv).dotc(&(&pi[i] * &vv));
                assert!((phi.t(i, j, 0, 0) - want).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn from_rep_rejects_non_representation() {
        let a = fixtures::m2();
        let mut pi: Vec<CMatrix> = (0..4).map(|i| fixtures::matrix_of(&a.basis(i), 2)).collect();
        pi[1] *= Complex64::new(2.0, 0.0);
        let v = CMatrix::identity(2, 2);
        assert!(matches!(
            from_rep_and_v(&a, &pi, &v, &pol()),
            Err(Error::NotARepresentation(_))
        ));
    }

    #[test]
    fn lift_requires_total_algebra() {
        let a = fixtures::q2();
        let f: Vec<CMatrix> = (0..4).map(|i| fixtures::matrix_of(&a.basis(i), 2)).collect();
        assert!(matches!(
            lift_linear_map(&a, &f),
            Err(Error::PartialProductUndefined { .. })
        ));
    }

    #[test]
    fn lift_reproduces_map_at_unit() {
        let pol = pol();
        for (phi, transpose) in [
            (fixtures::identity_lift_m2(), false),
            (fixtures::transpose_lift_m2(), true),
        ] {
            let a = phi.algebra();
            let unit = a.unit().clone();
            for i in 0..4 {
                let m = fixtures::matrix_of(&a.basis(i), 2);
                let fm = if transpose { m.transpose() } else { m };
                let form = phi.evaluate(&a.basis(i), &unit, &pol).unwrap();
                for p in 0..2 {
                    for q in 0..2 {
                        let want = f(2, q).dotc(&(&fm * f(2, p)));
                        assert!((form.value(&f(2, p), &f(2, q)) - want).norm() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn depolarizing_lift_is_cp() {
        let cp = fixtures::depolarizing_lift_m2().check_completely_positive(&pol()).unwrap();
        assert!(cp.is_cp);
        // frozen oracle: every eigenvalue of the flattened Gram equals 1/2
        assert!((cp.min_eig - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rebased_map_is_the_same_map() {
        let phi = fixtures::identity_lift_m2();
        let mut rng = pol().rng(12);
        let u = crate::numerics::random::random_unitary(4, &mut rng);
        let psi = phi.rebased(&u).unwrap();
        let x = complex_gaussian_vec(4, &mut rng);
        let y = complex_gaussian_vec(4, &mut rng);
        let a = phi.evaluate(&x, &y, &pol()).unwrap();
        let b = psi.evaluate(&x, &y, &pol()).unwrap();
        assert!(max_abs(&(a.0 - b.0)) < 1e-12);
    }
}
