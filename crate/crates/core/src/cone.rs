//! Polynomial matrices over commuting hermitian generators.
//!
//! A polynomial matrix `P = (P_kl(x_1, .., x_m))` is called positive
//! definite when `(P_kl(λ))` is positive *semi*-definite at every real
//! point `λ`. Deciding that exactly is out of reach; membership comes
//! either from a sum-of-squares construction ([`sos_member`], sound) or is
//! probed by [`pd_falsify`], which can only refute.
//!
//! For commuting hermitian generators `b_1, .., b_m` the block matrix
//! `P(b)` is unitarily equivalent to the direct sum of `P(λ)` over the joint
//! spectrum, so complete positivity of a finite-dimensional representation
//! with respect to this cone reduces to pointwise checks at joint
//! eigenvalue tuples.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Cauchy, StandardNormal};

use crate::error::{Error, Result};
use crate::numerics::random::complex_gaussian_vec;
use crate::numerics::{joint_diagonalize, max_abs, psd_min_eig, CMatrix, CVector, JointSpectrum, TolerancePolicy};

const GRID: [f64; 9] = [0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0, 10.0, -10.0];
const MAX_GRID_POINTS: usize = 100_000;
const SAMPLE_CLAMP: f64 = 1e6;
const STREAM_FALSIFY: u64 = 0x636f6e65;
const STREAM_CONE_CP: u64 = 0x636f6e6570;

/// Default number of random points probed by the falsifier.
pub const DEFAULT_FALSIFY_SAMPLES: usize = 2000;

/// A polynomial in `m` real variables, keyed by exponent tuple.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    terms: BTreeMap<Vec<u32>, Complex64>,
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Vec<u32>, Complex64)>) -> Self {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn constant(m: usize, c: Complex64) -> Self {
        Self::from_terms([(vec![0; m], c)])
    }

    /// The variable `x_j` among `m`.
    pub fn variable(m: usize, j: usize) -> Self {
        let mut e = vec![0; m];
        e[j] = 1;
        Self::from_terms([(e, Complex64::new(1.0, 0.0))])
    }

    fn add_term(&mut self, e: Vec<u32>, c: Complex64) {
        // a fresh term keeps `c` bit for bit, so `-0.0` parts survive a round trip
        match self.terms.entry(e) {
            Entry::Vacant(slot) => {
                if c != Complex64::new(0.0, 0.0) {
                    slot.insert(c);
                }
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if *slot.get() == Complex64::new(0.0, 0.0) {
                    slot.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Complex64)> {
        self.terms.iter()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), *c);
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Poly {
        Poly::from_terms(self.terms.iter().map(|(e, c)| (e.clone(), c * s)))
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    /// Coefficient-wise conjugate; on real points this is the complex
    /// conjugate of the value.
    pub fn conj(&self) -> Poly {
        Poly::from_terms(self.terms.iter().map(|(e, c)| (e.clone(), c.conj())))
    }

    pub fn eval(&self, point: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let mono: f64 = e
                    .iter()
                    .zip(point)
                    .map(|(&k, &x)| x.powi(k as i32))
                    .product();
                c * mono
            })
            .sum()
    }

    fn max_coeff_diff(&self, other: &Poly) -> f64 {
        let mut worst: f64 = 0.0;
        for (e, c) in &self.terms {
            let o = other.terms.get(e).copied().unwrap_or_default();
            worst = worst.max((c - o).norm());
        }
        for (e, c) in &other.terms {
            if !self.terms.contains_key(e) {
                worst = worst.max(c.norm());
            }
        }
        worst
    }
}

/// A `rows x cols` matrix of polynomials in `vars` real variables.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    vars: usize,
    entries: Vec<Poly>,
}

impl PolyMatrix {
    pub fn new(rows: usize, cols: usize, vars: usize, entries: Vec<Poly>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::MalformedInput(format!(
                "{} entries for a {rows}x{cols} polynomial matrix",
                entries.len()
            )));
        }
        for p in &entries {
            for (e, c) in p.terms() {
                if e.len() != vars {
                    return Err(Error::ArityMismatch {
                        expected: vars,
                        got: e.len(),
                    });
                }
                if !c.re.is_finite() || !c.im.is_finite() {
                    return Err(Error::MalformedInput("non-finite coefficient".into()));
                }
            }
        }
        Ok(Self {
            rows,
            cols,
            vars,
            entries,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, vars: usize, f: impl Fn(usize, usize) -> Poly) -> Result<Self> {
        let entries = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        Self::new(rows, cols, vars, entries)
    }

    pub fn identity(n: usize, vars: usize) -> Self {
        Self::from_fn(n, n, vars, |k, l| {
            if k == l {
                Poly::constant(vars, Complex64::new(1.0, 0.0))
            } else {
                Poly::zero()
            }
        })
        .expect("shape is consistent")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn entry(&self, k: usize, l: usize) -> &Poly {
        &self.entries[k * self.cols + l]
    }

    /// `max |coeff(P_kl) - conj(coeff(P_lk))|`, infinite for non-square.
    pub fn hermitian_residual(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for k in 0..self.rows {
            for l in 0..self.cols {
                worst = worst.max(self.entry(k, l).max_coeff_diff(&self.entry(l, k).conj()));
            }
        }
        worst
    }

    pub fn is_hermitian(&self, pol: &TolerancePolicy) -> bool {
        let scale = self
            .entries
            .iter()
            .flat_map(|p| p.terms().map(|(_, c)| c.norm()))
            .fold(1.0, f64::max);
        self.hermitian_residual() <= pol.psd_tol * scale
    }

    fn check_same_shape(&self, other: &PolyMatrix) -> Result<()> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} and {}x{} polynomial matrices",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        if self.vars != other.vars {
            return Err(Error::ArityMismatch {
                expected: self.vars,
                got: other.vars,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &PolyMatrix) -> Result<PolyMatrix> {
        self.check_same_shape(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a.add(b)).collect();
        Self::new(self.rows, self.cols, self.vars, entries)
    }

    pub fn scale(&self, s: Complex64) -> PolyMatrix {
        Self {
            entries: self.entries.iter().map(|p| p.scale(s)).collect(),
            ..self.clone()
        }
    }

    pub fn mul(&self, other: &PolyMatrix) -> Result<PolyMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        if self.vars != other.vars {
            return Err(Error::ArityMismatch {
                expected: self.vars,
                got: other.vars,
            });
        }
        Self::from_fn(self.rows, other.cols, self.vars, |k, l| {
            (0..self.cols).fold(Poly::zero(), |acc, s| {
                acc.add(&self.entry(k, s).mul(other.entry(s, l)))
            })
        })
    }

    /// Transpose with conjugated coefficients.
    pub fn adjoint(&self) -> PolyMatrix {
        Self::from_fn(self.cols, self.rows, self.vars, |k, l| self.entry(l, k).conj())
            .expect("shape is consistent")
    }

    /// `(P_kl(λ))` at a real point.
    pub fn eval_point(&self, point: &[f64]) -> Result<CMatrix> {
        if point.len() != self.vars {
            return Err(Error::ArityMismatch {
                expected: self.vars,
                got: point.len(),
            });
        }
        Ok(CMatrix::from_fn(self.rows, self.cols, |k, l| self.entry(k, l).eval(point)))
    }

    /// Block matrix with blocks `P_kl(b_1, .., b_m)`.
    pub fn eval_generators(&self, gens: &GeneratorTuple) -> Result<CMatrix> {
        if gens.len() != self.vars {
            return Err(Error::ArityMismatch {
                expected: self.vars,
                got: gens.len(),
            });
        }
        let n = gens.dim();
        let mut powers: Vec<Vec<CMatrix>> = gens
            .generators()
            .iter()
            .map(|_| vec![CMatrix::identity(n, n)])
            .collect();
        let mut out = CMatrix::zeros(self.rows * n, self.cols * n);
        for k in 0..self.rows {
            for l in 0..self.cols {
                let mut block = CMatrix::zeros(n, n);
                for (e, c) in self.entry(k, l).terms() {
                    let mut mono = CMatrix::identity(n, n);
                    for (j, &power) in e.iter().enumerate() {
                        while powers[j].len() <= power as usize {
                            let next = powers[j].last().unwrap() * &gens.generators()[j];
                            powers[j].push(next);
                        }
                        mono = mono * &powers[j][power as usize];
                    }
                    block += mono * *c;
                }
                out.view_mut((k * n, l * n), (n, n)).copy_from(&block);
            }
        }
        Ok(out)
    }
}

/// Where a polynomial matrix may be evaluated.
pub enum EvalPoint<'a> {
    Scalar(&'a [f64]),
    Generators(&'a GeneratorTuple),
}

pub fn polymatrix_eval(p: &PolyMatrix, at: EvalPoint<'_>) -> Result<CMatrix> {
    match at {
        EvalPoint::Scalar(x) => p.eval_point(x),
        EvalPoint::Generators(g) => p.eval_generators(g),
    }
}

/// Commuting hermitian matrices with their joint spectrum.
#[derive(Debug, Clone)]
pub struct GeneratorTuple {
    generators: Vec<CMatrix>,
    spectrum: JointSpectrum,
}

impl GeneratorTuple {
    pub fn new(generators: Vec<CMatrix>, pol: &TolerancePolicy) -> Result<Self> {
        let spectrum = joint_diagonalize(&generators, pol)?;
        Ok(Self {
            generators,
            spectrum,
        })
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Size of the generator matrices.
    pub fn dim(&self) -> usize {
        self.generators[0].nrows()
    }

    pub fn spectrum(&self) -> &JointSpectrum {
        &self.spectrum
    }
}

/// `P(λ)` at each joint eigenvalue tuple, in joint eigenbasis order.
pub fn spectral_blocks(p: &PolyMatrix, gens: &GeneratorTuple) -> Result<Vec<CMatrix>> {
    gens.spectrum
        .tuples
        .iter()
        .map(|t| p.eval_point(t))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    /// No counterexample among the probed points; not a proof.
    Plausible { points: usize, min_eig: f64 },
    Counterexample { point: Vec<f64>, min_eig: f64 },
}

impl Verdict {
    pub fn is_plausible(&self) -> bool {
        matches!(self, Verdict::Plausible { .. })
    }
}

fn grid_points(m: usize) -> Vec<Vec<f64>> {
    let total = GRID.len().checked_pow(m as u32).unwrap_or(usize::MAX);
    if total > MAX_GRID_POINTS {
        // only the axes and the diagonal
        let mut pts = vec![vec![0.0; m]];
        for j in 0..m {
            for &g in &GRID[1..] {
                let mut p = vec![0.0; m];
                p[j] = g;
                pts.push(p);
            }
        }
        for &g in &GRID[1..] {
            pts.push(vec![g; m]);
        }
        return pts;
    }
    let mut pts = Vec::with_capacity(total);
    for mut k in 0..total {
        let mut p = Vec::with_capacity(m);
        for _ in 0..m {
            p.push(GRID[k % GRID.len()]);
            k /= GRID.len();
        }
        pts.push(p);
    }
    pts
}

fn heavy_tailed<R: Rng>(rng: &mut R) -> f64 {
    let x: f64 = if rng.random_bool(0.5) {
        rng.sample(StandardNormal)
    } else {
        rng.sample(Cauchy::new(0.0, 1.0).expect("valid scale"))
    };
    x.clamp(-SAMPLE_CLAMP, SAMPLE_CLAMP)
}

/// Searches for a real point where `P` fails to be PSD: first a fixed grid
/// `{0, ±0.5, ±1, ±2, ±10}^m`, then `samples` heavy-tailed random points.
pub fn pd_falsify(p: &PolyMatrix, pol: &TolerancePolicy, samples: usize) -> Result<Verdict> {
    if !p.is_hermitian(pol) {
        return Err(Error::MalformedInput(format!(
            "polynomial matrix is not hermitian (residual {:.3e})",
            p.hermitian_residual()
        )));
    }
    let m = p.vars();
    let mut rng = pol.rng(STREAM_FALSIFY);
    let mut min_eig = f64::INFINITY;
    let mut points = 0;
    let random = (0..samples).map(|_| (0..m).map(|_| heavy_tailed(&mut rng)).collect::<Vec<f64>>());
    for point in grid_points(m).into_iter().chain(random) {
        let value = p.eval_point(&point)?;
        let (ok, e) = psd_min_eig(&value, pol)?;
        points += 1;
        min_eig = min_eig.min(e);
        if !ok {
            return Ok(Verdict::Counterexample { point, min_eig: e });
        }
    }
    Ok(Verdict::Plausible { points, min_eig })
}

/// `P = Q^H Q`, i.e. `P_kl = Σ_s conj(Q_sk) Q_sl`.
pub fn sos_member(q: &PolyMatrix) -> PolyMatrix {
    q.adjoint().mul(q).expect("Q^H Q is always defined")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeEntry {
    /// Smallest normalized `Σ <P_kl(b) ξ_k, ξ_l>` over the random trials.
    pub sampled_min: f64,
    pub sampled_passed: bool,
    /// Smallest eigenvalue of `P(λ)` over the joint spectrum.
    pub exact_min_eig: f64,
    pub exact_passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeReport {
    pub entries: Vec<ConeEntry>,
}

impl ConeReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.sampled_passed && e.exact_passed)
    }
}

/// Complete positivity of the representation `b_j ↦ gens[j]` with respect
/// to the cone: `Σ_kl <P_kl(b) ξ_k, ξ_l> ≥ 0` for each `P` in `ps`.
///
/// Pass the images `π(b_j)` as generators to check a representation other
/// than the identity. Each `P` must survive [`pd_falsify`] first.
pub fn cone_cp_check(
    gens: &GeneratorTuple,
    ps: &[PolyMatrix],
    trials: usize,
    pol: &TolerancePolicy,
) -> Result<ConeReport> {
    for (index, p) in ps.iter().enumerate() {
        if p.vars() != gens.len() {
            return Err(Error::ArityMismatch {
                expected: gens.len(),
                got: p.vars(),
            });
        }
        if let Verdict::Counterexample { point, min_eig } = pd_falsify(p, pol, DEFAULT_FALSIFY_SAMPLES)? {
            return Err(Error::NotPositiveDefinite {
                index,
                point,
                min_eig,
            });
        }
    }
    let n = gens.dim();
    let mut rng = pol.rng(STREAM_CONE_CP);
    let mut entries = Vec::with_capacity(ps.len());
    for p in ps {
        let block = p.eval_generators(gens)?;
        let size = p.rows();
        let scale = max_abs(&block).max(1.0);
        let mut sampled_min = f64::INFINITY;
        for _ in 0..trials {
            let xis: Vec<CVector> = (0..size).map(|_| complex_gaussian_vec(n, &mut rng)).collect();
            let norm2: f64 = xis.iter().map(|x| x.norm_squared()).sum();
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..size {
                for l in 0..size {
                    let pkl = block.view((k * n, l * n), (n, n));
                    // <P_kl ξ_k, ξ_l> = ξ_l^H P_kl ξ_k
                    s += xis[l].dotc(&(pkl * &xis[k]));
                }
            }
            sampled_min = sampled_min.min(s.re / (scale * norm2.max(f64::MIN_POSITIVE)));
        }
        if trials == 0 {
            sampled_min = 0.0;
        }
        let mut exact_min_eig = f64::INFINITY;
        let mut exact_passed = true;
        for value in spectral_blocks(p, gens)? {
            let (ok, e) = psd_min_eig(&value, pol)?;
            exact_passed &= ok;
            exact_min_eig = exact_min_eig.min(e);
        }
        entries.push(ConeEntry {
            sampled_min,
            sampled_passed: sampled_min >= -pol.psd_tol,
            exact_min_eig,
            exact_passed,
        });
    }
    Ok(ConeReport { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::random::real_diag;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn pol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    /// `[[1, x], [x, x²]]`
    fn gram_square() -> PolyMatrix {
        let x = Poly::variable(1, 0);
        PolyMatrix::new(
            2,
            2,
            1,
            vec![Poly::constant(1, c(1.0)), x.clone(), x.clone(), x.mul(&x)],
        )
        .unwrap()
    }

    fn shifted() -> PolyMatrix {
        let x = Poly::variable(1, 0);
        PolyMatrix::new(
            2,
            2,
            1,
            vec![
                Poly::constant(1, c(1.0)),
                Poly::zero(),
                Poly::zero(),
                x.mul(&x).add(&Poly::constant(1, c(-1.0))),
            ],
        )
        .unwrap()
    }

    #[test]
    fn eval_examples() {
        let v = gram_square().eval_point(&[2.0]).unwrap();
        assert_eq!(v, CMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(2.0), c(4.0)]));
        let sum = Poly::variable(2, 0).add(&Poly::variable(2, 1));
        let p = PolyMatrix::new(1, 1, 2, vec![sum]).unwrap();
        assert_eq!(p.eval_point(&[1.0, 2.0]).unwrap()[(0, 0)], c(3.0));
        assert!(matches!(p.eval_point(&[1.0]), Err(Error::ArityMismatch { expected: 2, got: 1 })));
    }

    #[test]
    fn eval_at_generators() {
        let b = real_diag(&[1.0, 2.0]);
        let g = GeneratorTuple::new(vec![b.clone()], &pol()).unwrap();
        let v = polymatrix_eval(&gram_square(), EvalPoint::Generators(&g)).unwrap();
        assert_eq!(v.view((0, 0), (2, 2)), CMatrix::identity(2, 2));
        assert_eq!(v.view((0, 2), (2, 2)), b);
        assert_eq!(v.view((2, 0), (2, 2)), b);
        assert_eq!(v.view((2, 2), (2, 2)), &b * &b);
    }

    #[test]
    fn falsify_examples() {
        assert!(pd_falsify(&gram_square(), &pol(), 500).unwrap().is_plausible());
        match pd_falsify(&shifted(), &pol(), 500).unwrap() {
            Verdict::Counterexample { point, min_eig } => {
                assert_eq!(point, vec![0.0]);
                assert!((min_eig + 1.0).abs() < 1e-12);
            }
            v => panic!("{v:?}"),
        }
        let x = Poly::variable(1, 0);
        let p = PolyMatrix::new(1, 1, 1, vec![x.mul(&x).add(&Poly::constant(1, c(1.0)))]).unwrap();
        assert!(pd_falsify(&p, &pol(), 500).unwrap().is_plausible());
    }

    #[test]
    fn sos_examples() {
        let x = Poly::variable(1, 0);
        let q = PolyMatrix::new(1, 2, 1, vec![Poly::constant(1, c(1.0)), x]).unwrap();
        assert_eq!(sos_member(&q), gram_square());
        let id = PolyMatrix::identity(3, 2);
        assert_eq!(sos_member(&id), id);
    }

    #[test]
    fn cone_cp_examples() {
        let g = GeneratorTuple::new(vec![real_diag(&[1.0, 2.0])], &pol()).unwrap();
        let r = cone_cp_check(&g, &[gram_square()], 50, &pol()).unwrap();
        assert!(r.passed());
        let blocks = spectral_blocks(&gram_square(), &g).unwrap();
        assert_eq!(blocks.len(), 2);
        match cone_cp_check(&g, &[shifted()], 50, &pol()) {
            Err(Error::NotPositiveDefinite { index: 0, .. }) => {}
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn non_commuting_generators_rejected() {
        let x = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        let r = GeneratorTuple::new(vec![real_diag(&[1.0, 2.0]), x], &pol());
        assert!(matches!(r, Err(Error::NotCommuting { .. })));
    }

    #[test]
    fn non_hermitian_rejected_by_falsifier() {
        let x = Poly::variable(1, 0);
        let p = PolyMatrix::new(2, 2, 1, vec![Poly::zero(), x, Poly::zero(), Poly::zero()]).unwrap();
        assert!(pd_falsify(&p, &pol(), 10).is_err());
    }
}
