use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use pstar::cbmap::{from_rep_and_v, lift_linear_map, tensor_vec, CBMap, InvarianceMode};
use pstar::check::all_passed;
use pstar::cone::{pd_falsify, sos_member, GeneratorTuple, Poly, PolyMatrix};
use pstar::dilation::{core_inclusion, dilate, isometry_bound_check, largest_core, verify_dilation_identity, verify_representation};
use pstar::fixtures::{self, element_of, matrix_of};
use pstar::numerics::random::{complex_gaussian, complex_gaussian_vec, complex_normal, random_isometry, random_unitary};
use pstar::numerics::{joint_diagonalize, max_abs, psd_min_eig, rank_range_null, CMatrix, CVector, SubspaceBasis, TolerancePolicy};
use pstar::palgebra::Algebra;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

fn rng(seed: u64) -> ChaCha8Rng {
    TolerancePolicy::with_seed(seed).rng(0x70726f70)
}

fn pol() -> TolerancePolicy {
    TolerancePolicy::default()
}

/// `B^H B` with `B` of shape `r x n`.
fn random_psd(n: usize, r: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let b = complex_gaussian(r, n, rng);
    b.adjoint() * b
}

fn commuting_tuple(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Vec<CMatrix> {
    let u = random_unitary(n, rng);
    (0..m)
        .map(|_| {
            let d = CMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    Complex64::new(rng.random_range(-2..=2) as f64, 0.0)
                } else {
                    C0
                }
            });
            &u * d * u.adjoint()
        })
        .collect()
}

/// `Φ(a, b) = <π(a)V·, π(b)V·>` for `π(a) = U (a ⊗ I_k) U^H` on `M_2`.
fn m2_rep_map(k: usize, d: usize, rng: &mut ChaCha8Rng) -> CBMap {
    let u = random_unitary(2 * k, rng);
    let pi: Vec<CMatrix> = fixtures::defining_rep(&fixtures::m2(), 2)
        .iter()
        .map(|e| &u * e.kronecker(&CMatrix::identity(k, k)) * u.adjoint())
        .collect();
    let v = complex_gaussian(2 * k, d, rng);
    from_rep_and_v(&fixtures::m2(), &pi, &v, &pol()).unwrap()
}

fn kraus_lift(n: usize, count: usize, c: f64, rng: &mut ChaCha8Rng) -> CBMap {
    let w = random_isometry(n * count, n, rng);
    let ks: Vec<CMatrix> = (0..count).map(|i| w.rows(i * n, n) * Complex64::new(c, 0.0)).collect();
    let a = fixtures::full_matrix(n);
    let images: Vec<CMatrix> = fixtures::defining_rep(&a, n)
        .iter()
        .map(|e| ks.iter().map(|k| k.adjoint() * e * k).fold(CMatrix::zeros(n, n), |s, t| s + t))
        .collect();
    lift_linear_map(&a, &images).unwrap()
}

/// A random element supported on the given basis indices.
fn element_on(n: usize, support: &[usize], rng: &mut ChaCha8Rng) -> CVector {
    let mut x = CVector::zeros(n);
    for &i in support {
        x[i] = complex_normal(rng);
    }
    x
}

fn random_poly(vars: usize, degree: u32, rng: &mut ChaCha8Rng) -> Poly {
    let mut p = Poly::zero();
    for _ in 0..4 {
        let mut e = vec![0u32; vars];
        let mut left = rng.random_range(0..=degree);
        for slot in e.iter_mut() {
            let k = rng.random_range(0..=left);
            *slot = k;
            left -= k;
        }
        p = p.add(&Poly::from_terms([(e, complex_normal(rng))]));
    }
    p
}

fn random_sos(vars: usize, n: usize, rng: &mut ChaCha8Rng) -> PolyMatrix {
    let entries = (0..2 * n).map(|_| random_poly(vars, 1, rng)).collect();
    sos_member(&PolyMatrix::new(2, n, vars, entries).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn quotient_reconstructs_psd(seed in any::<u64>(), n in 1usize..8, r in 0usize..8) {
        let mut rng = rng(seed);
        let a = random_psd(n, r, &mut rng);
        let dec = rank_range_null(&a, &pol()).unwrap();
        let lmax = dec.eigenvalues.first().copied().unwrap_or(0.0).max(0.0);
        let q = &dec.quotient_map;
        prop_assert!(max_abs(&(&a - q.adjoint() * q)) <= pol().verify_tol * lmax.max(f64::MIN_POSITIVE));
        prop_assert_eq!(dec.rank, r.min(n));
    }

    #[test]
    fn psd_min_eig_is_unitarily_invariant(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = rng(seed);
        let h = complex_gaussian(n, n, &mut rng);
        let h = &h + h.adjoint();
        let u = random_unitary(n, &mut rng);
        let (ok1, e1) = psd_min_eig(&h, &pol()).unwrap();
        let (ok2, e2) = psd_min_eig(&(&u * &h * u.adjoint()), &pol()).unwrap();
        prop_assert_eq!(ok1, ok2);
        prop_assert!((e1 - e2).abs() <= pol().verify_tol);
    }

    #[test]
    fn joint_diagonalization_meets_its_bound(seed in any::<u64>(), n in 1usize..7, m in 1usize..4) {
        let mut rng = rng(seed);
        let mats = commuting_tuple(n, m, &mut rng);
        let js = joint_diagonalize(&mats, &pol()).unwrap();
        prop_assert!(js.residual <= pol().verify_tol);
        let w = &js.basis;
        prop_assert!(max_abs(&(w.adjoint() * w - CMatrix::identity(n, n))) <= pol().verify_tol);
        for (j, b) in mats.iter().enumerate() {
            let d = w.adjoint() * b * w;
            for (col, t) in js.tuples.iter().enumerate() {
                prop_assert!((d[(col, col)].re - t[j]).abs() <= pol().verify_tol);
            }
        }
    }

    #[test]
    fn gamma_involution_duality(seed in any::<u64>(), which in 0usize..3) {
        let a: Algebra = [fixtures::m2(), fixtures::q2(), fixtures::d2()][which].clone();
        let mut rng = rng(seed);
        let n = a.dim();
        let sx: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
        let sy: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
        let x = element_on(n, &sx, &mut rng);
        let y = element_on(n, &sy, &mut rng);
        let forward = a.undefined_pair(&x, &y).is_none();
        let backward = a.undefined_pair(&a.involute(&y), &a.involute(&x)).is_none();
        prop_assert_eq!(forward, backward);
        if forward {
            // (x·y)* = y*·x*
            let lhs = a.involute(&a.multiply(&x, &y).unwrap());
            let rhs = a.multiply(&a.involute(&y), &a.involute(&x)).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + x.norm() * y.norm()));
        }
    }

    #[test]
    fn multiply_is_bilinear_where_defined(seed in any::<u64>()) {
        // in q2 every product with a diagonal factor is defined
        let a = fixtures::q2();
        let mut rng = rng(seed);
        let d1 = element_on(4, &[0, 3], &mut rng);
        let d2 = element_on(4, &[0, 3], &mut rng);
        let y = complex_gaussian_vec(4, &mut rng);
        let (s, t) = (complex_normal(&mut rng), complex_normal(&mut rng));
        let combo = &d1 * s + &d2 * t;
        let lhs = a.multiply(&combo, &y).unwrap();
        let rhs = a.multiply(&d1, &y).unwrap() * s + a.multiply(&d2, &y).unwrap() * t;
        prop_assert!((&lhs - &rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
        let lhs = a.multiply(&y, &combo).unwrap();
        let rhs = a.multiply(&y, &d1).unwrap() * s + a.multiply(&y, &d2).unwrap() * t;
        prop_assert!((&lhs - &rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
    }

    #[test]
    fn rep_maps_are_cp_and_cp_implies_positive(seed in any::<u64>(), k in 1usize..3, d in 1usize..4) {
        let mut rng = rng(seed);
        let phi = m2_rep_map(k, d, &mut rng);
        let cp = phi.check_completely_positive(&pol()).unwrap();
        prop_assert!(cp.is_cp && cp.min_eig >= -pol().psd_tol);
        prop_assert!(phi.check_positive(&pol()).unwrap().positive);
        prop_assert!(phi.hermitian_symmetry_residual() <= 1e-12 * phi.max_entry().max(1.0));
        let g = phi.gram();
        prop_assert!(max_abs(&(&g - g.adjoint())) <= 1e-12 * phi.max_entry().max(1.0));
    }

    #[test]
    fn dilation_quotient_is_isometric(seed in any::<u64>(), k in 1usize..3, d in 1usize..4) {
        let mut rng = rng(seed);
        let phi = m2_rep_map(k, d, &mut rng);
        let dil = dilate(&phi, &pol(), InvarianceMode::Full).unwrap();
        let dec = rank_range_null(&phi.gram(), &pol()).unwrap();
        prop_assert_eq!(dil.h_dim, dec.rank);
        let lmax = dec.eigenvalues[0];
        let dim = phi.domain_dim() * phi.x_dim();
        for _ in 0..4 {
            let u = complex_gaussian_vec(dim, &mut rng);
            let v = complex_gaussian_vec(dim, &mut rng);
            let through = (&dil.lambda_map * &v).dotc(&(&dil.lambda_map * &u));
            prop_assert!((through - phi.inner(&u, &v)).norm() <= pol().verify_tol * lmax * u.norm() * v.norm());
        }
        prop_assert!(verify_dilation_identity(&phi, &dil, &pol()).unwrap() <= pol().verify_tol);
        prop_assert!(all_passed(&verify_representation(&dil, phi.algebra(), &pol(), InvarianceMode::Full).unwrap()));
    }

    #[test]
    fn isometry_dichotomy(seed in any::<u64>(), n in 1usize..4, count in 1usize..4, unital in any::<bool>()) {
        let mut rng = rng(seed);
        let c = if unital { 1.0 } else { rng.random_range(0.2..3.0) };
        let phi = kraus_lift(n, count, c, &mut rng);
        let dil = dilate(&phi, &pol(), InvarianceMode::Full).unwrap();
        let iso = isometry_bound_check(&phi, &dil, &pol()).unwrap();
        prop_assert_eq!(iso.is_isometry, iso.unit_form_residual <= pol().verify_tol);
        prop_assert!(iso.factorization_residual <= pol().verify_tol);
        prop_assert!((iso.norm_v - c).abs() <= pol().verify_tol);
    }

    #[test]
    fn largest_core_contains_and_is_fixed(seed in any::<u64>(), k in 1usize..3, d in 1usize..4) {
        let mut rng = rng(seed);
        let phi = m2_rep_map(k, d, &mut rng);
        let dil = dilate(&phi, &pol(), InvarianceMode::Full).unwrap();
        let big = largest_core(&phi, &dil, &pol()).unwrap();
        prop_assert!(big.contains_subspace(phi.core(), &pol()).unwrap());
        let again = phi.with_core(big.clone()).unwrap();
        let dil2 = dilate(&again, &pol(), InvarianceMode::Full).unwrap();
        prop_assert!(largest_core(&again, &dil2, &pol()).unwrap().same_span(&big, &pol()).unwrap());
    }

    #[test]
    fn nested_cores_embed(seed in any::<u64>(), k in 1usize..3) {
        // with V onto C^{2k}, span{1} is already dense
        let mut rng = rng(seed);
        let phi = m2_rep_map(k, 2 * k, &mut rng);
        let unit = SubspaceBasis::new(4, vec![phi.algebra().unit().clone()]).unwrap();
        let small_phi = phi.with_core(unit).unwrap();
        let small = dilate(&small_phi, &pol(), InvarianceMode::Full).unwrap();
        let big = dilate(&phi, &pol(), InvarianceMode::Full).unwrap();
        let inclusion = core_inclusion(&phi, &small, &big, &pol()).unwrap();
        prop_assert!(inclusion.passed, "{:?}", inclusion);
    }

    #[test]
    fn core_checks_are_deterministic(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let phi = m2_rep_map(1, 2, &mut rng);
        let p = TolerancePolicy::with_seed(seed);
        let a = phi.check_core_with_samples(phi.core(), &p, InvarianceMode::Full, 16).unwrap();
        let b = phi.check_core_with_samples(phi.core(), &p, InvarianceMode::Full, 16).unwrap();
        prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn rebased_map_has_same_values(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let phi = m2_rep_map(1, 2, &mut rng);
        let u = complex_gaussian(4, 4, &mut rng);
        let re = phi.rebased(&u).unwrap();
        let x = complex_gaussian_vec(4, &mut rng);
        let y = complex_gaussian_vec(4, &mut rng);
        let a = phi.evaluate(&x, &y, &pol()).unwrap();
        let b = re.evaluate(&x, &y, &pol()).unwrap();
        prop_assert!(max_abs(&(a.0 - b.0)) <= 1e-9 * (1.0 + x.norm() * y.norm() * phi.max_entry()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn cone_closed_under_sum_scale_and_conjugation(seed in any::<u64>(), vars in 1usize..3, n in 1usize..3) {
        let mut rng = rng(seed);
        let p = random_sos(vars, n, &mut rng);
        let q = random_sos(vars, n, &mut rng);
        let s = rng.random_range(0.0..5.0);
        let row = PolyMatrix::new(n, 1, vars, (0..n).map(|_| random_poly(vars, 1, &mut rng)).collect()).unwrap();
        let candidates = [
            p.add(&q).unwrap(),
            p.scale(Complex64::new(s, 0.0)),
            row.adjoint().mul(&p).unwrap().mul(&row).unwrap(),
        ];
        for c in &candidates {
            prop_assert!(pd_falsify(c, &TolerancePolicy::with_seed(seed), 300).unwrap().is_plausible());
        }
    }

    #[test]
    fn generator_evaluation_diagonalizes_blockwise(seed in any::<u64>(), n in 1usize..6, m in 1usize..4) {
        let mut rng = rng(seed);
        let gens = GeneratorTuple::new(commuting_tuple(n, m, &mut rng), &pol()).unwrap();
        let p = random_sos(m, 2, &mut rng);
        let value = p.eval_generators(&gens).unwrap();
        let js = gens.spectrum();
        let w = &js.basis;
        let r = p.rows();
        for k in 0..r {
            for l in 0..r {
                let block = w.adjoint() * value.view((k * n, l * n), (n, n)) * w;
                let scale = max_abs(&block).max(1.0);
                for i in 0..n {
                    for j in 0..n {
                        let expect = if i == j { p.entry(k, l).eval(&js.tuples[i]) } else { C0 };
                        prop_assert!((block[(i, j)] - expect).norm() <= pol().verify_tol * scale);
                    }
                }
            }
        }
    }
}

#[test]
fn matrix_coordinates_round_trip() {
    let mut rng = rng(1);
    let m = complex_gaussian(3, 3, &mut rng);
    assert_eq!(matrix_of(&element_of(&m), 3), m);
    let e = tensor_vec(&CVector::from_element(2, C1), &CVector::from_element(3, C1));
    assert_eq!(e.len(), 6);
}
