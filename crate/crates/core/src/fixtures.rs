//! Small named algebras and maps used by the tests, the demo command and
//! the shipped fixture corpus.
//!
//! Matrix algebras use the matrix units `E_ab` in row-major order
//! (`E11, E12, E21, E22` for `n = 2`) with 1-based labels.

use num_complex::Complex64;

use crate::cbmap::{from_rep_and_v, lift_linear_map, CBMap};
use crate::numerics::{CMatrix, CVector, TolerancePolicy};
use crate::palgebra::{Algebra, StructureConstant};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn matrix_unit_labels(n: usize) -> Vec<String> {
    (0..n * n).map(|k| format!("E{}{}", k / n + 1, k % n + 1)).collect()
}

fn matrix_involution(n: usize) -> CMatrix {
    let mut s = CMatrix::zeros(n * n, n * n);
    for a in 0..n {
        for b in 0..n {
            s[(b * n + a, a * n + b)] = ONE;
        }
    }
    s
}

fn matrix_unit_algebra(n: usize, defined: impl Fn(usize, usize) -> bool) -> Algebra {
    let dim = n * n;
    let gamma: Vec<Vec<bool>> = (0..dim)
        .map(|i| (0..dim).map(|j| defined(i, j)).collect())
        .collect();
    let mut constants = Vec::new();
    for (i, row) in gamma.iter().enumerate() {
        for (j, &g) in row.iter().enumerate() {
            let (a, b) = (i / n, i % n);
            let (c, d) = (j / n, j % n);
            if g && b == c {
                constants.push(StructureConstant {
                    left: i,
                    right: j,
                    out: a * n + d,
                    value: ONE,
                });
            }
        }
    }
    let mut unit = CVector::zeros(dim);
    for a in 0..n {
        unit[a * n + a] = ONE;
    }
    Algebra::new(matrix_unit_labels(n), matrix_involution(n), gamma, constants, unit)
        .expect("matrix unit algebra is well formed")
}

/// The full matrix algebra `M_n` as a total partial *-algebra.
pub fn full_matrix(n: usize) -> Algebra {
    matrix_unit_algebra(n, |_, _| true)
}

/// `M_2` with every product defined.
pub fn m2() -> Algebra {
    full_matrix(2)
}

/// `M_2` where a product is defined only if one factor is diagonal
/// (`E11` or `E22`); the universal multipliers are the diagonal matrices.
pub fn q2() -> Algebra {
    matrix_unit_algebra(2, |i, j| is_diag2(i) || is_diag2(j))
}

fn is_diag2(i: usize) -> bool {
    i == 0 || i == 3
}

/// The commutative algebra `C ⊕ C` spanned by orthogonal projections
/// `e1, e2`, with unit `e1 + e2`.
pub fn d2() -> Algebra {
    let constants = vec![
        StructureConstant {
            left: 0,
            right: 0,
            out: 0,
            value: ONE,
        },
        StructureConstant {
            left: 1,
            right: 1,
            out: 1,
            value: ONE,
        },
    ];
    Algebra::new(
        vec!["e1".into(), "e2".into()],
        CMatrix::identity(2, 2),
        vec![vec![true; 2]; 2],
        constants,
        CVector::from_element(2, ONE),
    )
    .expect("d2 is well formed")
}

/// The `n x n` matrix with row-major coefficients `x`.
pub fn matrix_of(x: &CVector, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |a, b| x[a * n + b])
}

/// Row-major coefficients of a square matrix.
pub fn element_of(m: &CMatrix) -> CVector {
    let n = m.nrows();
    CVector::from_fn(n * n, |k, _| m[(k / n, k % n)])
}

/// The defining representation of a matrix-unit algebra: `π(E_ab) = E_ab`.
pub fn defining_rep(a: &Algebra, n: usize) -> Vec<CMatrix> {
    (0..a.dim()).map(|i| matrix_of(&a.basis(i), n)).collect()
}

/// `Φ(a, b)(ξ, η) = <aξ, bη>` on the partial algebra `q2`.
pub fn phi_id_q2() -> CBMap {
    let a = q2();
    let pi = defining_rep(&a, 2);
    from_rep_and_v(&a, &pi, &CMatrix::identity(2, 2), &TolerancePolicy::default())
        .expect("defining representation of q2")
}

fn lift_m2(f: impl Fn(&CMatrix) -> CMatrix) -> CBMap {
    let a = m2();
    let images: Vec<CMatrix> = defining_rep(&a, 2).iter().map(f).collect();
    lift_linear_map(&a, &images).expect("m2 is total")
}

/// Lift of the identity map on `M_2`.
pub fn identity_lift_m2() -> CBMap {
    lift_m2(|m| m.clone())
}

/// Lift of the transpose map on `M_2`: positive but not completely
/// positive.
pub fn transpose_lift_m2() -> CBMap {
    lift_m2(|m| m.transpose())
}

/// Lift of the completely depolarizing map `A ↦ tr(A) I / 2` on `M_2`.
pub fn depolarizing_lift_m2() -> CBMap {
    lift_m2(|m| CMatrix::identity(2, 2) * (m.trace() * 0.5))
}

/// Algebras with exactly one planted axiom violation.
pub mod mutants {
    use super::*;

    /// A planted defect with the check expected to catch it.
    #[derive(Debug, Clone)]
    pub struct Mutant {
        pub name: &'static str,
        pub algebra: Algebra,
        /// Name of the validation check that must fail, or
        /// `"semi_associativity"`.
        pub expected_check: &'static str,
        /// Substring of the expected witness.
        pub expected_witness: &'static str,
    }

    fn rebuild(
        a: &Algebra,
        gamma: Vec<Vec<bool>>,
        constants: Vec<StructureConstant>,
        involution: Option<CMatrix>,
        unit: Option<CVector>,
    ) -> Algebra {
        Algebra::new(
            a.labels().to_vec(),
            involution.unwrap_or_else(|| a.involution_matrix().clone()),
            gamma,
            constants,
            unit.unwrap_or_else(|| a.unit().clone()),
        )
        .expect("mutant is well formed")
    }

    fn without_pair(a: &Algebra, left: usize, right: usize) -> Algebra {
        let mut gamma = a.gamma_table().to_vec();
        gamma[left][right] = false;
        let constants = a
            .structure_constants()
            .iter()
            .copied()
            .filter(|c| (c.left, c.right) != (left, right))
            .collect();
        rebuild(a, gamma, constants, None, None)
    }

    /// `q2` with `E11 · E12` made undefined.
    pub fn q2_gamma_flip() -> Algebra {
        without_pair(&q2(), 0, 1)
    }

    /// `m2` with `E12 · E12` made undefined while `E21 · E21` stays defined.
    pub fn m2_gamma_flip() -> Algebra {
        without_pair(&m2(), 1, 1)
    }

    /// `m2` with `E12 · E21 = i E11`.
    pub fn m2_phased_product() -> Algebra {
        let a = m2();
        let constants = a
            .structure_constants()
            .iter()
            .map(|c| {
                let mut c = *c;
                if (c.left, c.right) == (1, 2) {
                    c.value = Complex64::new(0.0, 1.0);
                }
                c
            })
            .collect();
        rebuild(&a, a.gamma_table().to_vec(), constants, None, None)
    }

    /// `m2` with `E12* = i E21` and `E21* = i E12`. The involution is still
    /// an involution, but `(E12 E21)* = E11` while `E21* E12* = -E11`.
    pub fn m2_phased_involution() -> Algebra {
        let a = m2();
        let mut s = a.involution_matrix().clone();
        let i = Complex64::new(0.0, 1.0);
        s[(2, 1)] = i;
        s[(1, 2)] = i;
        rebuild(&a, a.gamma_table().to_vec(), a.structure_constants().to_vec(), Some(s), None)
    }

    /// `m2` with unit `E11`.
    pub fn m2_wrong_unit() -> Algebra {
        let a = m2();
        let mut u = CVector::zeros(4);
        u[0] = ONE;
        rebuild(
            &a,
            a.gamma_table().to_vec(),
            a.structure_constants().to_vec(),
            None,
            Some(u),
        )
    }

    /// `q2` with `E12 · E22 = 1.5 E12`.
    pub fn q2_associativity() -> Algebra {
        let a = q2();
        let constants = a
            .structure_constants()
            .iter()
            .map(|c| {
                let mut c = *c;
                if (c.left, c.right) == (1, 3) {
                    c.value = Complex64::new(1.5, 0.0);
                }
                c
            })
            .collect();
        rebuild(&a, a.gamma_table().to_vec(), constants, None, None)
    }

    pub fn all() -> Vec<Mutant> {
        vec![
            Mutant {
                name: "q2-gamma-flip",
                algebra: q2_gamma_flip(),
                expected_check: "gamma_involution_symmetry",
                expected_witness: "(E11, E12) not",
            },
            Mutant {
                name: "m2-gamma-flip",
                algebra: m2_gamma_flip(),
                expected_check: "gamma_involution_symmetry",
                expected_witness: "(E21, E21) in Γ but (E12, E12) not",
            },
            Mutant {
                name: "m2-phased-product",
                algebra: m2_phased_product(),
                expected_check: "product_involution",
                expected_witness: "E12 · E21",
            },
            Mutant {
                name: "m2-phased-involution",
                algebra: m2_phased_involution(),
                expected_check: "product_involution",
                expected_witness: "(E12 · E21)*",
            },
            Mutant {
                name: "m2-wrong-unit",
                algebra: m2_wrong_unit(),
                expected_check: "unit_identity",
                expected_witness: "E12 · 1",
            },
            Mutant {
                name: "q2-associativity",
                algebra: q2_associativity(),
                expected_check: "semi_associativity",
                expected_witness: "(E12, E22, E22)",
            },
        ]
    }
}
