//! The named fixture files written by `demo` and shipped in the repository.

use num_complex::Complex64;

use super::wire::{to_json, AlgebraJson, GeneratorsJson, MapJson, PolyMatrixJson};
use crate::cbmap::{from_rep_and_v, CBMap};
use crate::cone::{sos_member, Poly, PolyMatrix};
use crate::error::{Error, Result};
use crate::fixtures::{self, mutants};
use crate::numerics::random::{complex_normal, real_diag};
use crate::numerics::{CMatrix, SubspaceBasis, TolerancePolicy};
use crate::palgebra::Algebra;

pub const FIXTURE_NAMES: [&str; 4] = ["FIX-M2", "FIX-Q2", "FIX-D2", "CONE"];

fn algebra(a: &Algebra) -> String {
    to_json(&AlgebraJson::from_algebra(a))
}

fn map(phi: &CBMap) -> String {
    to_json(&MapJson::from_map(phi))
}

/// `d2` with unit `e1`.
pub fn d2_wrong_unit() -> Algebra {
    let a = fixtures::d2();
    let mut u = a.unit().clone();
    u[1] = Complex64::new(0.0, 0.0);
    Algebra::new(
        a.labels().to_vec(),
        a.involution_matrix().clone(),
        a.gamma_table().to_vec(),
        a.structure_constants().to_vec(),
        u,
    )
    .expect("well formed")
}

/// The vector state `x ↦ <π(x) v, v>` on `d2` with `π(e_k) = E_kk` and
/// `v = (0.6, 0.8)`, as a map into forms on `C^1`.
pub fn d2_state() -> CBMap {
    let a = fixtures::d2();
    let pi = vec![real_diag(&[1.0, 0.0]), real_diag(&[0.0, 1.0])];
    let v = CMatrix::from_column_slice(2, 1, &[Complex64::new(0.6, 0.0), Complex64::new(0.8, 0.0)]);
    from_rep_and_v(&a, &pi, &v, &TolerancePolicy::default()).expect("representation of d2")
}

/// `[[1, x], [x, x²]]`
pub fn gram_square() -> PolyMatrix {
    let x = Poly::variable(1, 0);
    PolyMatrix::new(2, 2, 1, vec![Poly::constant(1, Complex64::new(1.0, 0.0)), x.clone(), x.clone(), x.mul(&x)])
        .expect("well formed")
}

/// `[[1, 0], [0, x² - 1]]`, negative at `x = 0`.
pub fn shifted_square() -> PolyMatrix {
    let x = Poly::variable(1, 0);
    let one = Poly::constant(1, Complex64::new(1.0, 0.0));
    PolyMatrix::new(
        2,
        2,
        1,
        vec![one.clone(), Poly::zero(), Poly::zero(), x.mul(&x).add(&one.scale(Complex64::new(-1.0, 0.0)))],
    )
    .expect("well formed")
}

/// `Q^H Q` for a seeded random `s x n` polynomial matrix `Q` with every
/// monomial of total degree at most `degree` in `vars` variables.
pub fn random_sos(seed: u64, rows: usize, n: usize, vars: usize, degree: u32) -> PolyMatrix {
    let pol = TolerancePolicy::with_seed(seed);
    let mut rng = pol.rng(0x736f73);
    let monomials: Vec<Vec<u32>> = all_exponents(vars, degree);
    let entries = (0..rows * n)
        .map(|_| Poly::from_terms(monomials.iter().map(|e| (e.clone(), complex_normal(&mut rng)))))
        .collect();
    let q = PolyMatrix::new(rows, n, vars, entries).expect("consistent shape");
    sos_member(&q)
}

fn all_exponents(vars: usize, degree: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..vars {
        out = out
            .into_iter()
            .flat_map(|e: Vec<u32>| {
                let used: u32 = e.iter().sum();
                (0..=degree - used).map(move |k| {
                    let mut e = e.clone();
                    e.push(k);
                    e
                })
            })
            .collect();
    }
    out
}

fn polymatrices(ps: &[PolyMatrix]) -> String {
    to_json(&ps.iter().map(PolyMatrixJson::from_polymatrix).collect::<Vec<_>>())
}

/// `(file name, contents)` pairs for a named fixture group.
pub fn fixture_files(name: &str) -> Result<Vec<(String, String)>> {
    let files = match name {
        "FIX-M2" => vec![
            ("FIX-M2.json", algebra(&fixtures::m2())),
            ("identity-lift-M2.json", map(&fixtures::identity_lift_m2())),
            ("transpose-lift-M2.json", map(&fixtures::transpose_lift_m2())),
            ("depolarizing-lift-M2.json", map(&fixtures::depolarizing_lift_m2())),
            (
                "identity-lift-M2-unit-core.json",
                map(&fixtures::identity_lift_m2()
                    .with_core(SubspaceBasis::new(4, vec![fixtures::m2().unit().clone()])?)?),
            ),
            ("mutant-m2-gamma-flip.json", algebra(&mutants::m2_gamma_flip())),
            ("mutant-m2-phased-product.json", algebra(&mutants::m2_phased_product())),
            ("mutant-m2-phased-involution.json", algebra(&mutants::m2_phased_involution())),
            ("mutant-m2-wrong-unit.json", algebra(&mutants::m2_wrong_unit())),
        ],
        "FIX-Q2" => vec![
            ("FIX-Q2.json", algebra(&fixtures::q2())),
            ("FIX-Q2-phi-id.json", map(&fixtures::phi_id_q2())),
            (
                "FIX-Q2-phi-id-thin-core.json",
                map(&fixtures::phi_id_q2().with_core(SubspaceBasis::coordinate(4, [0]))?),
            ),
            ("mutant-q2-gamma-flip.json", algebra(&mutants::q2_gamma_flip())),
            ("mutant-q2-associativity.json", algebra(&mutants::q2_associativity())),
        ],
        "FIX-D2" => vec![
            ("FIX-D2.json", algebra(&fixtures::d2())),
            ("FIX-D2-state.json", map(&d2_state())),
            ("mutant-d2-wrong-unit.json", algebra(&d2_wrong_unit())),
        ],
        "CONE" => {
            let sos: Vec<PolyMatrix> = (0..3).map(|s| random_sos(s, 2, 2, 1, 1)).collect();
            let mut certified = vec![gram_square()];
            certified.extend(sos);
            let pair: Vec<PolyMatrix> = (3..5).map(|s| random_sos(s, 2, 2, 2, 1)).collect();
            vec![
                ("generators-diag.json", to_json(&GeneratorsJson::from_matrices(&[real_diag(&[1.0, 2.0])]))),
                (
                    "generators-pair.json",
                    to_json(&GeneratorsJson::from_matrices(&[
                        real_diag(&[1.0, 2.0]),
                        real_diag(&[3.0, 4.0]),
                    ])),
                ),
                ("polymatrices-sos.json", polymatrices(&certified)),
                ("polymatrices-sos-pair.json", polymatrices(&pair)),
                ("polymatrices-shifted.json", polymatrices(&[shifted_square()])),
            ]
        }
        other => {
            return Err(Error::MalformedInput(format!(
                "unknown fixture {other:?}; expected one of {}",
                FIXTURE_NAMES.join(", ")
            )))
        }
    };
    Ok(files.into_iter().map(|(n, c)| (n.to_string(), c)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::{pd_falsify, Verdict};

    #[test]
    fn exponents_up_to_degree() {
        assert_eq!(all_exponents(1, 2), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(all_exponents(2, 1).len(), 3);
        assert_eq!(all_exponents(2, 3).len(), 10);
    }

    #[test]
    fn corpus_polymatrices_behave() {
        let pol = TolerancePolicy::default();
        assert!(pd_falsify(&random_sos(1, 2, 2, 2, 3), &pol, 200).unwrap().is_plausible());
        assert!(matches!(
            pd_falsify(&shifted_square(), &pol, 10).unwrap(),
            Verdict::Counterexample { .. }
        ));
    }

    #[test]
    fn d2_state_values() {
        let phi = d2_state();
        assert!((phi.t(0, 0, 0, 0).re - 0.36).abs() < 1e-15);
        assert!((phi.t(1, 1, 0, 0).re - 0.64).abs() < 1e-15);
        assert_eq!(phi.t(0, 1, 0, 0), Complex64::new(0.0, 0.0));
    }
}
