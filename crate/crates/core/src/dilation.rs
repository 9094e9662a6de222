//! The dilation of a completely positive map with a core, and its
//! verifiers.
//!
//! The Gram form on `D(Φ) ⊗ X` is factored as `G = Q^H Q`; `λ(u) = Q u`
//! identifies the quotient by the null space with `C^r` carrying the
//! standard inner product. `π(a)` is solved from
//! `π(a) λ(b ⊗ f_p) = λ(ab ⊗ f_p)` on the spanning family given by a core
//! basis, and the residual of that solve measures how far `π` is from being
//! well defined on cosets.

use num_complex::Complex64;

use crate::cbmap::{check_representation, tensor_vec, CBMap, InvarianceMode};
use crate::check::CheckResult;
use crate::error::{Error, Result};
use crate::numerics::{
    max_abs, null_space, operator_norm, pseudo_inverse, unit_vector, CMatrix, CVector,
    SubspaceBasis, TolerancePolicy,
};
use crate::palgebra::Algebra;

// singular values of the spanning family below this fraction are noise
const SPAN_RCOND: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct DilationResult {
    pub h_dim: usize,
    /// `h_dim x (m·d)`: coefficients of `D(Φ) ⊗ X` to quotient coordinates.
    pub lambda_map: CMatrix,
    /// `π(e_i)` for each algebra basis index.
    pub pi: Vec<CMatrix>,
    /// `h_dim x d`, present iff the unit lies in the core.
    pub v: Option<CMatrix>,
    /// Spectrum of the flattened Gram, descending.
    pub gram_spectrum: Vec<f64>,
    pub welldef_residual: f64,
    pub star_residual: f64,
    /// Orthonormal basis of the core used.
    pub core: SubspaceBasis,
    pub mode: InvarianceMode,
}

impl DilationResult {
    /// `λ(x ⊗ ξ)` for `x` given by domain coordinates.
    pub fn lambda_coords(&self, coords: &CVector, xi: &CVector) -> CVector {
        &self.lambda_map * tensor_vec(coords, xi)
    }

    /// `π(x) = Σ x_k π(e_k)`.
    pub fn pi_of(&self, x: &CVector) -> CMatrix {
        let mut out = CMatrix::zeros(self.h_dim, self.h_dim);
        for (k, p) in self.pi.iter().enumerate() {
            if x[k] != Complex64::new(0.0, 0.0) {
                out += p * x[k];
            }
        }
        out
    }
}

/// `[λ(b ⊗ f_0) .. λ(b ⊗ f_{d-1})]` for each core vector, side by side.
fn spanning_family(phi: &CBMap, q: &CMatrix, vectors: &[CVector], pol: &TolerancePolicy) -> Result<CMatrix> {
    let d = phi.x_dim();
    let mut out = CMatrix::zeros(q.nrows(), vectors.len() * d);
    for (k, b) in vectors.iter().enumerate() {
        let c = phi.coords(b, pol)?;
        for p in 0..d {
            out.set_column(k * d + p, &(q * tensor_vec(&c, &unit_vector(d, p))));
        }
    }
    Ok(out)
}

/// Builds the dilation of `phi` over its core.
///
/// The map must be completely positive and the core must satisfy domain
/// inclusion, (I)1, (I)2 and the exact density condition. The invariance
/// condition is not prechecked; a failure of it surfaces as a
/// `WellDefinednessViolation`.
pub fn dilate(phi: &CBMap, pol: &TolerancePolicy, mode: InvarianceMode) -> Result<DilationResult> {
    pol.validate()?;
    let cp = phi.check_completely_positive(pol)?;
    if !cp.is_cp {
        return Err(Error::NotCompletelyPositive { min_eig: cp.min_eig });
    }
    let report = phi.check_core(phi.core(), pol, InvarianceMode::Quasi)?;
    if !report.structural_passed() {
        let bad = report
            .conditions
            .iter()
            .find(|c| {
                !c.passed && ["core_in_domain", "I1", "I2", "I4_exact"].contains(&c.name.as_str())
            })
            .expect("a structural condition failed");
        return Err(Error::CoreViolation(format!(
            "{}: {}",
            bad.name,
            bad.witness.clone().unwrap_or_default()
        )));
    }

    let alg = phi.algebra();
    let n = alg.dim();
    let quotient = phi.quotient(pol)?;
    let q = quotient.quotient_map;
    let h = quotient.rank;
    let core = phi.core().orthonormalize(pol);

    let y = spanning_family(phi, &q, core.vectors(), pol)?;
    let y_pinv = pseudo_inverse(&y, SPAN_RCOND);
    let y_scale = max_abs(&y).max(1.0);

    let mut pi = Vec::with_capacity(n);
    let mut welldef: f64 = 0.0;
    for a in 0..n {
        let ea = alg.basis(a);
        let products: Vec<CVector> = core
            .vectors()
            .iter()
            .map(|b| alg.multiply(&ea, b))
            .collect::<Result<_>>()?;
        let z = spanning_family(phi, &q, &products, pol)?;
        let pa = &z * &y_pinv;
        welldef = welldef.max(max_abs(&(&z - &pa * &y)) / y_scale);
        pi.push(pa);
    }
    if welldef > pol.verify_tol {
        return Err(Error::WellDefinednessViolation {
            kind: "coset".into(),
            residual: welldef,
        });
    }

    let pi_scale = pi.iter().map(max_abs).fold(1.0, f64::max);
    let mut star: f64 = 0.0;
    for a in 0..n {
        let pa_star = {
            let x = alg.basis_star(a);
            let mut out = CMatrix::zeros(h, h);
            for k in 0..n {
                out += &pi[k] * x[k];
            }
            out
        };
        star = star.max(max_abs(&(pa_star - pi[a].adjoint())) / pi_scale);
    }
    if star > pol.verify_tol {
        return Err(Error::WellDefinednessViolation {
            kind: "adjoint".into(),
            residual: star,
        });
    }

    let unit = alg.unit();
    let v = if core.contains(unit, pol)? {
        let c = phi.coords(unit, pol)?;
        let d = phi.x_dim();
        let mut v = CMatrix::zeros(h, d);
        for p in 0..d {
            v.set_column(p, &(&q * tensor_vec(&c, &unit_vector(d, p))));
        }
        Some(v)
    } else {
        None
    };

    Ok(DilationResult {
        h_dim: h,
        lambda_map: q,
        pi,
        v,
        gram_spectrum: quotient.eigenvalues,
        welldef_residual: welldef,
        star_residual: star,
        core,
        mode,
    })
}

fn require_compatible(phi: &CBMap, dil: &DilationResult) -> Result<()> {
    let cols = phi.domain_dim() * phi.x_dim();
    if dil.lambda_map.ncols() != cols
        || dil.lambda_map.nrows() != dil.h_dim
        || dil.pi.len() != phi.algebra().dim()
        || dil.pi.iter().any(|p| p.nrows() != dil.h_dim || p.ncols() != dil.h_dim)
        || dil.core.ambient() != phi.algebra().dim()
    {
        return Err(Error::DimensionMismatch(
            "dilation does not match the map's dimensions".into(),
        ));
    }
    if let Some(v) = &dil.v {
        if v.nrows() != dil.h_dim || v.ncols() != phi.x_dim() {
            return Err(Error::DimensionMismatch("V has the wrong shape".into()));
        }
    }
    Ok(())
}

/// `max |Φ(ax, by)(f_p, f_q) - <π(a)λ(x ⊗ f_p), π(b)λ(y ⊗ f_q)>|` over
/// algebra basis elements `a, b` and core basis vectors `x, y`.
pub fn verify_dilation_identity(phi: &CBMap, dil: &DilationResult, pol: &TolerancePolicy) -> Result<f64> {
    require_compatible(phi, dil)?;
    let alg = phi.algebra();
    let n = alg.dim();
    let d = phi.x_dim();
    // (domain coordinates of a·x, π(a)[λ(x ⊗ f_p)]_p) per pair (a, x)
    let mut entries = Vec::new();
    for a in 0..n {
        let ea = alg.basis(a);
        for x in dil.core.vectors() {
            let ax = alg.multiply(&ea, x)?;
            let cax = phi.coords(&ax, pol)?;
            let cx = phi.coords(x, pol)?;
            let mut lam = CMatrix::zeros(dil.h_dim, d);
            for p in 0..d {
                lam.set_column(p, &dil.lambda_coords(&cx, &unit_vector(d, p)));
            }
            entries.push((cax, &dil.pi[a] * lam));
        }
    }
    let mut worst: f64 = 0.0;
    for (c1, l1) in &entries {
        for (c2, l2) in &entries {
            let form = phi.evaluate_coords(c1, c2);
            // <l1 f_p, l2 f_q> = (l2^H l1)[q][p]
            let inner = l2.adjoint() * l1;
            for p in 0..d {
                for q in 0..d {
                    worst = worst.max((form.0[(p, q)] - inner[(q, p)]).norm());
                }
            }
        }
    }
    Ok(worst)
}

/// `*`-property, multiplicativity and `π(1) = I`.
///
/// In quasi mode multiplicativity is only required for pairs whose right
/// factor is a universal right multiplier.
pub fn verify_representation(
    dil: &DilationResult,
    alg: &Algebra,
    pol: &TolerancePolicy,
    mode: InvarianceMode,
) -> Result<Vec<CheckResult>> {
    let ra = alg.right_universal_indices();
    let mut checks = check_representation(
        alg,
        &dil.pi,
        |_, j| mode == InvarianceMode::Full || ra.contains(&j),
        pol,
    )?;
    let unit = dil.pi_of(alg.unit());
    let residual = max_abs(&(unit - CMatrix::identity(dil.h_dim, dil.h_dim)));
    checks.push(CheckResult::within(
        "unit",
        residual,
        pol.verify_tol,
        Some("π(1) differs from the identity".into()),
    ));
    Ok(checks)
}

/// The largest core producing the same representation: all `x` in
/// `D(Φ) ∩ RA` with `a x ∈ D(Φ)` and `λ(ax ⊗ ξ) = π(a) λ(x ⊗ ξ)` for all
/// `a`, `ξ`.
///
/// Each condition is linear in `x`, so the answer is the null space of the
/// stacked constraints over a basis of `D(Φ) ∩ RA`. Density is automatic
/// here since `λ(B ⊗ X)` already spans the quotient.
pub fn largest_core(phi: &CBMap, dil: &DilationResult, pol: &TolerancePolicy) -> Result<SubspaceBasis> {
    require_compatible(phi, dil)?;
    let alg = phi.algebra();
    let n = alg.dim();
    let d = phi.x_dim();
    let domain = phi.domain_subspace();
    let candidates = alg
        .universal_multipliers()
        .right
        .intersection(&domain, pol)?
        .orthonormalize(pol);
    let s = candidates.len();
    if s == 0 {
        return Ok(SubspaceBasis::zero(n));
    }
    let p_out = CMatrix::identity(n, n) - domain.projector(pol);
    let block = n + dil.h_dim * d;
    let mut stack = CMatrix::zeros(n * block, s);
    for a in 0..n {
        let ea = alg.basis(a);
        for (t, c) in candidates.vectors().iter().enumerate() {
            let ac = alg.multiply(&ea, c)?;
            let off = a * block;
            // a c outside D(Φ)
            let outside = &p_out * &ac;
            for r in 0..n {
                stack[(off + r, t)] = outside[r];
            }
            // λ(ac ⊗ f_p) - π(a) λ(c ⊗ f_p), with ac projected onto D(Φ)
            let cac = phi.coords(&(&ac - &outside), &TolerancePolicy {
                verify_tol: f64::INFINITY,
                ..*pol
            })?;
            let cc = phi.coords(c, pol)?;
            for p in 0..d {
                let f = unit_vector(d, p);
                let diff = dil.lambda_coords(&cac, &f) - &dil.pi[a] * dil.lambda_coords(&cc, &f);
                for r in 0..dil.h_dim {
                    stack[(off + n + r * d + p, t)] = diff[r];
                }
            }
        }
    }
    let scale = max_abs(&stack).max(1.0);
    let kernel = null_space(&(stack / Complex64::new(scale, 0.0)), pol.verify_tol);
    let vectors = kernel
        .column_iter()
        .map(|alpha| {
            let mut x = CVector::zeros(n);
            for (t, c) in candidates.vectors().iter().enumerate() {
                x.axpy(alpha[t], c, Complex64::new(1.0, 0.0));
            }
            x
        })
        .collect();
    Ok(SubspaceBasis::new(n, vectors)?.orthonormalize(pol))
}

/// Spanning family `[π(e_a) V]_a` of a dilation with `V`.
fn cyclic_family(dil: &DilationResult) -> Result<CMatrix> {
    let v = dil.v.as_ref().ok_or(Error::UnitNotInCore)?;
    let d = v.ncols();
    let mut out = CMatrix::zeros(dil.h_dim, dil.pi.len() * d);
    for (a, p) in dil.pi.iter().enumerate() {
        out.columns_mut(a * d, d).copy_from(&(p * v));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Equivalence {
    /// `U: H_1 → H_2` with `U π_1(a) V_1 = π_2(a) V_2`.
    pub u: CMatrix,
    /// Largest of the unitarity, intertwining and `U V_1 = V_2` residuals.
    pub residual: f64,
}

/// Constructs the unitary `U π_1(a) V_1 ξ = π_2(a) V_2 ξ` between two
/// dilations with `V`, after checking that the two spanning families have
/// the same Gram overlaps.
pub fn unitary_equivalence(
    d1: &DilationResult,
    d2: &DilationResult,
    pol: &TolerancePolicy,
) -> Result<Equivalence> {
    if d1.pi.len() != d2.pi.len() {
        return Err(Error::NotEquivalent(format!(
            "algebras of dimension {} and {}",
            d1.pi.len(),
            d2.pi.len()
        )));
    }
    let s1 = cyclic_family(d1)?;
    let s2 = cyclic_family(d2)?;
    if s1.ncols() != s2.ncols() {
        return Err(Error::NotEquivalent("different input spaces".into()));
    }
    let g1 = s1.adjoint() * &s1;
    let g2 = s2.adjoint() * &s2;
    let scale = max_abs(&g1).max(max_abs(&g2)).max(1.0);
    let overlap = max_abs(&(&g1 - &g2)) / scale;
    if overlap > pol.verify_tol {
        return Err(Error::NotEquivalent(format!(
            "Gram overlaps of the cyclic families differ by {overlap:.3e}"
        )));
    }
    if d1.h_dim != d2.h_dim {
        return Err(Error::NotEquivalent(format!(
            "dilation spaces of dimension {} and {}",
            d1.h_dim, d2.h_dim
        )));
    }
    let h = d1.h_dim;
    let u = &s2 * pseudo_inverse(&s1, SPAN_RCOND);
    let mut residual = max_abs(&(u.adjoint() * &u - CMatrix::identity(h, h)));
    for (p1, p2) in d1.pi.iter().zip(&d2.pi) {
        residual = residual.max(max_abs(&(&u * p1 * u.adjoint() - p2)));
    }
    let (v1, v2) = (d1.v.as_ref().unwrap(), d2.v.as_ref().unwrap());
    residual = residual.max(max_abs(&(&u * v1 - v2)));
    Ok(Equivalence { u, residual })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsometryReport {
    pub norm_v: f64,
    pub is_isometry: bool,
    /// `max |Φ(a, 1)(f_p, f_q) - <V^H π(a) V f_p, f_q>|`.
    pub factorization_residual: f64,
    /// `max |Φ(1, 1)(f_p, f_q) - δ_pq|`.
    pub unit_form_residual: f64,
}

pub fn isometry_bound_check(phi: &CBMap, dil: &DilationResult, pol: &TolerancePolicy) -> Result<IsometryReport> {
    require_compatible(phi, dil)?;
    let v = dil.v.as_ref().ok_or(Error::UnitNotInCore)?;
    let alg = phi.algebra();
    let d = phi.x_dim();
    let norm_v = operator_norm(v);
    let is_isometry = max_abs(&(v.adjoint() * v - CMatrix::identity(d, d))) <= pol.verify_tol;
    let unit = phi.coords(alg.unit(), pol)?;
    let mut factorization: f64 = 0.0;
    for a in 0..alg.dim() {
        let ca = phi.coords(&alg.basis(a), pol)?;
        let form = phi.evaluate_coords(&ca, &unit);
        let m = v.adjoint() * &dil.pi[a] * v;
        for p in 0..d {
            for q in 0..d {
                // <M f_p, f_q> = M[q][p]
                factorization = factorization.max((form.0[(p, q)] - m[(q, p)]).norm());
            }
        }
    }
    let form = phi.evaluate_coords(&unit, &unit);
    let unit_form_residual = max_abs(&(form.0 - CMatrix::identity(d, d)));
    Ok(IsometryReport {
        norm_v,
        is_isometry,
        factorization_residual: factorization,
        unit_form_residual,
    })
}

/// Commutant of a family of `dim x dim` matrices, as a subspace of
/// column-major vectorized matrices (ambient `dim²`).
pub fn commutant(dim: usize, mats: &[CMatrix], pol: &TolerancePolicy) -> Result<SubspaceBasis> {
    if let Some(m) = mats.iter().find(|m| m.nrows() != dim || m.ncols() != dim) {
        return Err(Error::DimensionMismatch(format!(
            "expected {dim}x{dim} matrices, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let nn = dim * dim;
    if mats.is_empty() {
        return Ok(SubspaceBasis::full(nn));
    }
    let id = CMatrix::identity(dim, dim);
    let mut stack = CMatrix::zeros(mats.len() * nn, nn);
    for (k, m) in mats.iter().enumerate() {
        // vec(MX - XM) = (I ⊗ M - M^T ⊗ I) vec(X)
        let op = id.kronecker(m) - m.transpose().kronecker(&id);
        stack.view_mut((k * nn, 0), (nn, nn)).copy_from(&op);
    }
    Ok(SubspaceBasis::from_columns(&null_space(&stack, pol.verify_tol)))
}

/// Whether the commutant of `π` over the given generators equals the
/// commutant of `π` over the whole algebra.
pub fn commutant_generation_check(
    dil: &DilationResult,
    generators: &SubspaceBasis,
    pol: &TolerancePolicy,
) -> Result<bool> {
    if generators.ambient() != dil.pi.len() {
        return Err(Error::DimensionMismatch(
            "generators must be algebra elements".into(),
        ));
    }
    let gens: Vec<CMatrix> = generators.vectors().iter().map(|g| dil.pi_of(g)).collect();
    let of_gens = commutant(dil.h_dim, &gens, pol)?;
    let of_all = commutant(dil.h_dim, &dil.pi, pol)?;
    of_gens.same_span(&of_all, pol)
}

/// Inclusion of the dilation over a smaller core into the dilation over a
/// larger one: `J λ_small(b ⊗ f_p) = λ_big(b ⊗ f_p)` for `b` in the small
/// core. Checks that `J` is an isometry intertwining the representations.
pub fn core_inclusion(
    phi: &CBMap,
    small: &DilationResult,
    big: &DilationResult,
    pol: &TolerancePolicy,
) -> Result<CheckResult> {
    require_compatible(phi, small)?;
    require_compatible(phi, big)?;
    if !big.core.contains_subspace(&small.core, pol)? {
        return Ok(CheckResult::fail(
            "core_inclusion",
            f64::INFINITY,
            "the smaller core is not contained in the larger".into(),
        ));
    }
    let ys = spanning_family(phi, &small.lambda_map, small.core.vectors(), pol)?;
    let yb = spanning_family(phi, &big.lambda_map, small.core.vectors(), pol)?;
    let j = &yb * pseudo_inverse(&ys, SPAN_RCOND);
    let h = small.h_dim;
    let mut residual = max_abs(&(j.adjoint() * &j - CMatrix::identity(h, h)));
    residual = residual.max(max_abs(&(&j * &ys - &yb)));
    for (ps, pb) in small.pi.iter().zip(&big.pi) {
        residual = residual.max(max_abs(&(&j * ps - pb * &j)));
    }
    Ok(CheckResult::within(
        "core_inclusion",
        residual,
        pol.verify_tol,
        Some("inclusion is not an intertwining isometry".into()),
    ))
}
