//! The deformation map θ of a constrained tropical curve and the
//! multiplicities read off its Smith normal form.
//!
//! Column blocks: one `ℤⁿ` block per finite vertex (positions), then one
//! column per bounded edge (lengths). Row blocks: one `ℤⁿ` block per bounded
//! edge, then the rows of each active constraint projection in end order,
//! then one row per cross-ratio.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::curve::{ProblemSpec, TropicalCurve};
use crate::linalg::{cokernel_order_from, smith_normal_form, CokernelOrder, IntMatrix, SmithDecomposition};
use crate::tree::MarkedTree;
use crate::{LatticeVector, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThetaLayout {
    pub rank: usize,
    pub num_vertices: usize,
    pub num_bounded: usize,
    /// `(end, p)` for every constraint row: row `p` of that end's projection.
    pub constraint_rows: Vec<(usize, usize)>,
    pub num_cross: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ThetaRow {
    Edge { edge: usize, coord: usize },
    Constraint { end: usize, row: usize },
    CrossRatio(usize),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ThetaColumn {
    Position { vertex: usize, coord: usize },
    Length(usize),
}

impl ThetaLayout {
    pub fn new(tree: &MarkedTree, problem: &ProblemSpec) -> Self {
        let constraint_rows = problem
            .active_constraints()
            .flat_map(|c| (0..c.codim()).map(move |p| (c.end, p)))
            .collect();
        ThetaLayout {
            rank: problem.rank(),
            num_vertices: tree.num_vertices(),
            num_bounded: tree.num_bounded(),
            constraint_rows,
            num_cross: problem.cross_ratios().len(),
        }
    }

    pub fn num_rows(&self) -> usize {
        self.rank * self.num_bounded + self.constraint_rows.len() + self.num_cross
    }

    pub fn num_cols(&self) -> usize {
        self.rank * self.num_vertices + self.num_bounded
    }

    pub fn num_edge_rows(&self) -> usize {
        self.rank * self.num_bounded
    }

    pub fn position_col(&self, vertex: usize, coord: usize) -> usize {
        vertex * self.rank + coord
    }

    pub fn length_col(&self, edge: usize) -> usize {
        self.rank * self.num_vertices + edge
    }

    pub fn edge_row(&self, edge: usize, coord: usize) -> usize {
        edge * self.rank + coord
    }

    pub fn constraint_row(&self, k: usize) -> usize {
        self.num_edge_rows() + k
    }

    pub fn cross_row(&self, i: usize) -> usize {
        self.num_edge_rows() + self.constraint_rows.len() + i
    }

    pub fn row(&self, index: usize) -> ThetaRow {
        let e = self.num_edge_rows();
        let c = self.constraint_rows.len();
        if index < e {
            ThetaRow::Edge { edge: index / self.rank, coord: index % self.rank }
        } else if index < e + c {
            let (end, row) = self.constraint_rows[index - e];
            ThetaRow::Constraint { end, row }
        } else {
            ThetaRow::CrossRatio(index - e - c)
        }
    }

    pub fn column(&self, index: usize) -> ThetaColumn {
        let v = self.rank * self.num_vertices;
        if index < v {
            ThetaColumn::Position { vertex: index / self.rank, coord: index % self.rank }
        } else {
            ThetaColumn::Length(index - v)
        }
    }
}

/// θ together with its layout and Smith decomposition.
#[derive(Clone, Debug)]
pub struct ThetaComplex {
    pub layout: ThetaLayout,
    pub matrix: IntMatrix,
    pub smith: SmithDecomposition,
}

/// Assembles θ for a tree with the given bounded-edge slopes.
pub fn theta_matrix(tree: &MarkedTree, slopes: &[LatticeVector], problem: &ProblemSpec) -> (ThetaLayout, IntMatrix) {
    let layout = ThetaLayout::new(tree, problem);
    let n = layout.rank;
    let rs = tree.rooted();
    let mut m = IntMatrix::zeros(layout.num_rows(), layout.num_cols());
    for j in 0..tree.num_bounded() {
        for k in 0..n {
            let row = layout.edge_row(j, k);
            m[(row, layout.position_col(rs.tail(j), k))] += 1;
            m[(row, layout.position_col(rs.head(j), k))] -= 1;
            m[(row, layout.length_col(j))] = BigInt::from(slopes[j][k]);
        }
    }
    for (idx, &(end, p)) in layout.constraint_rows.iter().enumerate() {
        let c = problem.constraint(end).expect("active constraint");
        let v = tree.end_vertex(end);
        for k in 0..n {
            m[(layout.constraint_row(idx), layout.position_col(v, k))] = c.projection[(p, k)].clone();
        }
    }
    for (i, x) in problem.cross_ratios().iter().enumerate() {
        for j in 0..tree.num_bounded() {
            m[(layout.cross_row(i), layout.length_col(j))] = BigInt::from(tree.separates(j, x.ends));
        }
    }
    (layout, m)
}

/// The right-hand side `(0, ζ^tr, λ^tr)`.
pub fn theta_target(layout: &ThetaLayout, problem: &ProblemSpec) -> Vec<Rational> {
    let mut b = vec![Rational::zero(); layout.num_edge_rows()];
    for &(end, p) in &layout.constraint_rows {
        b.push(problem.constraint(end).expect("active constraint").target[p].clone());
    }
    b.extend(problem.cross_ratios().iter().map(|x| x.value.clone()));
    b
}

impl ThetaComplex {
    pub fn build(curve: &TropicalCurve, problem: &ProblemSpec) -> Self {
        Self::from_tree(curve.tree(), curve.slopes(), problem)
    }

    pub fn from_tree(tree: &MarkedTree, slopes: &[LatticeVector], problem: &ProblemSpec) -> Self {
        let (layout, matrix) = theta_matrix(tree, slopes, problem);
        let smith = smith_normal_form(&matrix);
        ThetaComplex { layout, matrix, smith }
    }

    pub fn report(&self) -> MultiplicityReport {
        MultiplicityReport::from_smith(&self.smith, self.matrix.rows(), self.matrix.cols())
    }

    /// Real multiplicity for signs on the constraint and cross-ratio rows
    /// (edge rows are implicitly `+1`).
    pub fn real_multiplicity(&self, signs: &[i8]) -> Result<BigInt, RealMultiplicityError> {
        let expected = self.layout.num_rows() - self.layout.num_edge_rows();
        if signs.len() != expected {
            return Err(RealMultiplicityError::SignLength { expected, got: signs.len() });
        }
        let mut full = vec![1i8; self.layout.num_edge_rows()];
        full.extend_from_slice(signs);
        real_multiplicity(&self.smith, &full)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiplicityReport {
    /// Rank of `ℰ¹ = ker θ`.
    pub e1_rank: usize,
    pub divisors: Vec<BigInt>,
    /// `|ℰ²|`, `None` when the cokernel is infinite.
    pub m_complex: Option<BigInt>,
    /// θ ⊗ ℚ is surjective.
    pub regular_over_q: bool,
    /// Number of even nonzero divisors.
    pub epsilon_even: usize,
}

impl MultiplicityReport {
    pub fn from_smith(smith: &SmithDecomposition, rows: usize, cols: usize) -> Self {
        let rank = smith.rank();
        let m_complex = match cokernel_order_from(smith, rows) {
            CokernelOrder::Finite(m) => Some(m),
            CokernelOrder::Infinite => None,
        };
        let epsilon_even = smith.divisors.iter().filter(|d| !d.is_zero() && d.is_even()).count();
        MultiplicityReport {
            e1_rank: cols - rank,
            divisors: smith.divisors.clone(),
            m_complex,
            regular_over_q: rank == rows,
            epsilon_even,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RealMultiplicityError {
    #[error("expected {expected} signs, got {got}")]
    SignLength { expected: usize, got: usize },
    #[error("signs must be +1 or -1")]
    BadSign,
    #[error("the complex multiplicity is infinite")]
    InfiniteMultiplicity,
}

/// `2^ε` if the sign vector, moved to the Smith basis through `U`, is `+1`
/// on every row with an even divisor, and `0` otherwise. `signs` covers all
/// rows of the matrix.
pub fn real_multiplicity(smith: &SmithDecomposition, signs: &[i8]) -> Result<BigInt, RealMultiplicityError> {
    let rows = smith.left.rows();
    if signs.len() != rows {
        return Err(RealMultiplicityError::SignLength { expected: rows, got: signs.len() });
    }
    if signs.iter().any(|&s| s != 1 && s != -1) {
        return Err(RealMultiplicityError::BadSign);
    }
    if smith.rank() < rows {
        return Err(RealMultiplicityError::InfiniteMultiplicity);
    }
    let mut epsilon = 0u32;
    for (j, d) in smith.divisors.iter().enumerate() {
        if d.is_odd() {
            continue;
        }
        epsilon += 1;
        let negative = (0..rows).filter(|&i| signs[i] == -1 && smith.left[(j, i)].is_odd()).count();
        if negative % 2 == 1 {
            return Ok(BigInt::zero());
        }
    }
    Ok(BigInt::one() << epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::tests::toy_problem;
    use crate::linalg::{solve_rational, IntMatrix};
    use crate::rat;
    use num_traits::Signed;
    use proptest::prelude::*;

    fn toy_tree() -> MarkedTree {
        MarkedTree::new(4, vec![3, 0, 2, 0, 1, 3], vec![(0, 1), (1, 2), (2, 3)]).unwrap()
    }

    #[test]
    fn toy_theta_shape_and_solution() {
        let p = toy_problem(5);
        let tree = toy_tree();
        let slopes = crate::curve::propagate_slopes(&tree, p.degrees());
        let th = ThetaComplex::from_tree(&tree, &slopes, &p);
        assert_eq!((th.matrix.rows(), th.matrix.cols()), (11, 11));
        let rep = th.report();
        assert_eq!(rep.m_complex, Some(BigInt::one()));
        assert!(rep.divisors.iter().all(One::is_one));
        assert_eq!(rep.e1_rank, 0);
        assert_eq!(th.matrix.determinant().abs(), BigInt::one());

        let b = theta_target(&th.layout, &p);
        let s = solve_rational(&th.matrix.to_rational(), &b).unwrap();
        assert!(s.is_unique());
        let l = &th.layout;
        let lengths: Vec<Rational> = (0..3).map(|j| s.particular[l.length_col(j)].clone()).collect();
        assert_eq!(lengths, vec![rat(2), rat(3), rat(8)]);
        assert_eq!(s.particular[l.position_col(0, 0)], rat(-2));

        assert_eq!(th.real_multiplicity(&[1, -1, 1, 1, -1]), Ok(BigInt::one()));
        assert!(matches!(th.real_multiplicity(&[1]), Err(RealMultiplicityError::SignLength { .. })));
    }

    #[test]
    fn star_theta_has_only_constraint_rows() {
        let p = ProblemSpec::new(
            2,
            vec![vec![1, 0], vec![0, 1], vec![-1, -1]],
            vec![crate::curve::ConstraintInput {
                end: 0,
                sublattice: vec![vec![1, 0]],
                point: vec![rat(0), rat(1)],
                coefficients: None,
            }],
            vec![],
        )
        .unwrap();
        let tree = MarkedTree::star(3).unwrap();
        let th = ThetaComplex::from_tree(&tree, &[], &p);
        assert_eq!((th.matrix.rows(), th.matrix.cols()), (1, 2));
        assert_eq!(th.layout.row(0), ThetaRow::Constraint { end: 0, row: 0 });
        let rep = th.report();
        assert_eq!(rep.e1_rank, 1);
        assert!(rep.regular_over_q);
    }

    #[test]
    fn identity_reports() {
        let s = smith_normal_form(&IntMatrix::identity(3));
        let r = MultiplicityReport::from_smith(&s, 3, 3);
        assert_eq!(r.m_complex, Some(BigInt::one()));
        assert_eq!(r.e1_rank, 0);
        assert_eq!(real_multiplicity(&s, &[-1, -1, 1]), Ok(BigInt::one()));
    }

    #[test]
    fn even_divisor_sign_dependence() {
        // θ = (2): the class of -1 is not a square, the class of +1 is.
        let s = smith_normal_form(&IntMatrix::from_rows(&[[2i64]]));
        assert_eq!(real_multiplicity(&s, &[1]), Ok(BigInt::from(2)));
        assert_eq!(real_multiplicity(&s, &[-1]), Ok(BigInt::zero()));
        let s = smith_normal_form(&IntMatrix::zeros(1, 1));
        assert_eq!(real_multiplicity(&s, &[1]), Err(RealMultiplicityError::InfiniteMultiplicity));
    }

    /// Brute force over `{±1}`: the sign vector `σ` is hit by `x ↦ A x` on
    /// `{±1}`-valued vectors (written additively mod 2) exactly when the real
    /// multiplicity is positive, and then with `2^ε` preimages.
    fn brute_force_real(a: &IntMatrix, signs: &[i8]) -> usize {
        let (m, n) = (a.rows(), a.cols());
        let target: Vec<u8> = signs.iter().map(|&s| u8::from(s == -1)).collect();
        (0u32..1 << n)
            .filter(|x| {
                (0..m).all(|i| {
                    let parity = (0..n)
                        .filter(|&c| x >> c & 1 == 1 && a[(i, c)].is_odd())
                        .count();
                    (parity % 2) as u8 == target[i]
                })
            })
            .count()
    }

    proptest! {
        #[test]
        fn real_multiplicity_matches_mod_two_count(
            n in 1usize..=4,
            v in proptest::collection::vec(-4i64..=4, 16),
            s in proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], 4),
        ) {
            let a = IntMatrix::from_vec(n, n, v[..n * n].iter().map(|&x| BigInt::from(x)).collect());
            let smith = smith_normal_form(&a);
            let signs = &s[..n];
            match real_multiplicity(&smith, signs) {
                Err(RealMultiplicityError::InfiniteMultiplicity) => prop_assert!(a.determinant().is_zero()),
                Ok(m) => {
                    let total = MultiplicityReport::from_smith(&smith, n, n).m_complex.unwrap();
                    prop_assert!(m <= total);
                    prop_assert!(real_multiplicity(&smith, &vec![1; n]).unwrap() > BigInt::zero());
                    prop_assert_eq!(m, BigInt::from(brute_force_real(&a, signs)));
                }
                Err(e) => prop_assert!(false, "{e}"),
            }
        }
    }
}
