//! Enumeration of the tropical curves satisfying a problem: for every
//! trivalent type, propagate slopes, solve θ_ℚ x = (0, ζ^tr, λ^tr) and keep
//! unique solutions with positive lengths.
//!
//! [`Enumerator::classify`] handles one type in isolation, so callers can
//! distribute types across threads and hand the results to
//! [`Enumerator::assemble`], which orders them deterministically.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::curve::{propagate_slopes, ProblemError, ProblemSpec, TropicalCurve};
use crate::linalg::solve_rational;
use crate::theta::{theta_target, MultiplicityReport, RealMultiplicityError, ThetaComplex};
use crate::tree::{trivalent_tree, trivalent_tree_count, EdgeId, EndSet, Vertex};
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EnumerateError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("too many combinatorial types to enumerate for {0} ends")]
    TooManyTypes(usize),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rejection {
    /// θ_ℚ x = b is inconsistent.
    NoSolution,
    /// Some length is negative.
    NonPositiveLength,
    /// The solution is not unique.
    SingularSystem,
    /// Some length is exactly zero (and none is negative): the constraints
    /// sit on a wall.
    GeneralityViolation,
}

impl Rejection {
    pub fn as_str(self) -> &'static str {
        match self {
            Rejection::NoSolution => "no-solution",
            Rejection::NonPositiveLength => "nonpositive-length",
            Rejection::SingularSystem => "singular-system",
            Rejection::GeneralityViolation => "generality-violation",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub tree_index: u128,
    pub key: Vec<EndSet>,
    pub reason: Rejection,
}

#[derive(Clone, Debug)]
pub struct AcceptedCurve {
    pub tree_index: u128,
    pub key: Vec<EndSet>,
    pub curve: TropicalCurve,
    pub theta: ThetaComplex,
    pub report: MultiplicityReport,
}

impl AcceptedCurve {
    /// Complex multiplicity; accepted curves always have a finite one.
    pub fn multiplicity(&self) -> &BigInt {
        self.report.m_complex.as_ref().expect("accepted curves have finite multiplicity")
    }
}

#[derive(Clone, Debug)]
pub enum Classification {
    Accepted(AcceptedCurve),
    Rejected(Diagnostic),
}

#[derive(Clone, Debug)]
pub struct EnumerationResult {
    /// Accepted curves ordered by canonical tree key.
    pub curves: Vec<AcceptedCurve>,
    pub types_visited: u128,
    /// Rejected types ordered by canonical tree key.
    pub diagnostics: Vec<Diagnostic>,
    pub tropically_general: bool,
}

impl EnumerationResult {
    pub fn total_complex(&self) -> BigInt {
        self.curves.iter().map(AcceptedCurve::multiplicity).sum()
    }

    /// `Σ m_ℝ` for signs on the constraint and cross-ratio rows.
    pub fn total_real(&self, signs: &[i8]) -> Result<BigInt, RealMultiplicityError> {
        self.curves.iter().map(|c| c.theta.real_multiplicity(signs)).sum()
    }
}

/// A prepared enumeration over the `(2r − 5)!!` trivalent types.
#[derive(Clone, Debug)]
pub struct Enumerator<'a> {
    problem: &'a ProblemSpec,
    num_types: u128,
}

impl<'a> Enumerator<'a> {
    /// Checks the dimension condition.
    pub fn prepare(problem: &'a ProblemSpec) -> Result<Self, EnumerateError> {
        problem.check_dimension()?;
        let r = problem.num_ends();
        let num_types = trivalent_tree_count(r).ok_or(EnumerateError::TooManyTypes(r))?;
        Ok(Enumerator { problem, num_types })
    }

    pub fn num_types(&self) -> u128 {
        self.num_types
    }

    pub fn classify(&self, tree_index: u128) -> Classification {
        let p = self.problem;
        let tree = trivalent_tree(p.num_ends(), tree_index);
        let key = tree.canonical_key();
        let slopes = propagate_slopes(&tree, p.degrees());
        let theta = ThetaComplex::from_tree(&tree, &slopes, p);
        let layout = &theta.layout;
        let reject = |reason| Classification::Rejected(Diagnostic { tree_index, key: key.clone(), reason });

        let b = theta_target(layout, p);
        let Some(solution) = solve_rational(&theta.matrix.to_rational(), &b) else {
            return reject(Rejection::NoSolution);
        };
        if !solution.is_unique() {
            return reject(Rejection::SingularSystem);
        }
        let x = solution.particular;
        let lengths: Vec<Rational> = (0..tree.num_bounded()).map(|j| x[layout.length_col(j)].clone()).collect();
        if lengths.iter().any(Signed::is_negative) {
            return reject(Rejection::NonPositiveLength);
        }
        if lengths.iter().any(Zero::is_zero) {
            return reject(Rejection::GeneralityViolation);
        }
        let positions = (0..tree.num_vertices())
            .map(|w| (0..p.rank()).map(|k| x[layout.position_col(w, k)].clone()).collect())
            .collect();
        let curve = TropicalCurve::new(tree, p.degrees().to_vec(), lengths, positions)
            .expect("θ encodes edge compatibility");
        debug_assert!((0..p.num_ends()).all(|i| curve.check_affine_constraint(p, i)));
        debug_assert!(p.cross_ratios().iter().all(|c| curve.cross_ratio_formula(c.ends) == c.value));
        let report = theta.report();
        Classification::Accepted(AcceptedCurve { tree_index, key, curve, theta, report })
    }

    pub fn assemble(&self, classified: impl IntoIterator<Item = Classification>) -> EnumerationResult {
        let mut curves = Vec::new();
        let mut diagnostics = Vec::new();
        let mut types_visited = 0;
        for c in classified {
            types_visited += 1;
            match c {
                Classification::Accepted(a) => curves.push(a),
                Classification::Rejected(d) => diagnostics.push(d),
            }
        }
        curves.sort_by(|a: &AcceptedCurve, b: &AcceptedCurve| a.key.cmp(&b.key));
        diagnostics.sort_by(|a: &Diagnostic, b: &Diagnostic| a.key.cmp(&b.key));
        let tropically_general = diagnostics.iter().all(|d| d.reason != Rejection::GeneralityViolation);
        EnumerationResult { curves, types_visited, diagnostics, tropically_general }
    }
}

/// Sequential enumeration over all trivalent types in insertion order.
pub fn enumerate(problem: &ProblemSpec) -> Result<EnumerationResult, EnumerateError> {
    let e = Enumerator::prepare(problem)?;
    Ok(e.assemble((0..e.num_types()).map(|i| e.classify(i))))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GenericityViolation {
    /// Two finite vertices share an image but the path between them is not
    /// contracted.
    CoincidentVertices { first: usize, second: usize },
    /// A vertex lies on the image of a non-adjacent edge, and the path from it
    /// through that edge does not map to a straight interval.
    VertexOnEdge { vertex: usize, edge: EdgeId },
    /// A vertex carries a number of contracted edges other than 0, 1 or 3.
    ContractedValence { vertex: usize, count: usize },
}

/// Structural properties that curves through tropically general
/// constraints always have.
pub fn validate_genericity(curve: &TropicalCurve) -> Vec<GenericityViolation> {
    let tree = curve.tree();
    let v = tree.num_vertices();
    let mut out = Vec::new();

    for a in 0..v {
        for b in a + 1..v {
            if curve.position(a) == curve.position(b) {
                let path = tree.geodesic(Vertex::Finite(a), Vertex::Finite(b));
                if !path.iter().all(|&(e, _)| curve.is_contracted(e)) {
                    out.push(GenericityViolation::CoincidentVertices { first: a, second: b });
                }
            }
        }
    }

    let edges = (0..tree.num_ends()).map(EdgeId::End).chain((0..tree.num_bounded()).map(EdgeId::Bounded));
    for e in edges {
        for w in 0..v {
            if tree.incident(w).contains(&e) || !on_edge_image(curve, w, e) {
                continue;
            }
            let far = match e {
                EdgeId::End(i) => Vertex::Infinite(i),
                EdgeId::Bounded(j) => {
                    let (x, y) = tree.bounded_edge(j);
                    let dx = tree.geodesic(Vertex::Finite(w), Vertex::Finite(x)).len();
                    let dy = tree.geodesic(Vertex::Finite(w), Vertex::Finite(y)).len();
                    Vertex::Finite(if dx > dy { x } else { y })
                }
            };
            let path = tree.geodesic(Vertex::Finite(w), far);
            let direction = curve.edge_slope(e);
            let straight = path.iter().all(|&(f, _)| parallel(curve.edge_slope(f), direction));
            if !straight {
                out.push(GenericityViolation::VertexOnEdge { vertex: w, edge: e });
            }
        }
    }

    for w in 0..v {
        let count = tree.incident(w).iter().filter(|&&e| curve.is_contracted(e)).count();
        if !matches!(count, 0 | 1 | 3) {
            out.push(GenericityViolation::ContractedValence { vertex: w, count });
        }
    }
    out
}

/// Whether `h(w)` lies on the closed image of `e` (segment or ray).
fn on_edge_image(curve: &TropicalCurve, w: usize, e: EdgeId) -> bool {
    let (start, dir, max) = match e {
        EdgeId::End(i) => (curve.tree().end_vertex(i), curve.degrees()[i].clone(), None),
        EdgeId::Bounded(j) => {
            let t = curve.tree().rooted().tail(j);
            (t, curve.slope(j).clone(), Some(curve.length(j).clone()))
        }
    };
    let diff: Vec<Rational> = curve.position(w).iter().zip(curve.position(start)).map(|(a, b)| a - b).collect();
    let Some(k) = dir.iter().position(|&d| d != 0) else {
        return diff.iter().all(Zero::is_zero);
    };
    let s = &diff[k] / Rational::from_integer(dir[k].into());
    let on_line = diff.iter().zip(&dir).all(|(d, &n)| *d == &s * Rational::from_integer(n.into()));
    on_line && !s.is_negative() && max.is_none_or(|m| s <= m)
}

/// `a` is a rational multiple of `b` (zero vectors are parallel to anything).
fn parallel(a: &[i64], b: &[i64]) -> bool {
    (0..a.len()).all(|i| (i + 1..a.len()).all(|j| a[i] as i128 * b[j] as i128 == a[j] as i128 * b[i] as i128))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::tests::toy_problem;
    use crate::rat;
    use crate::tree::MarkedTree;
    use alloc::vec;

    #[test]
    fn toy_example_has_two_curves() {
        let res = enumerate(&toy_problem(5)).unwrap();
        assert_eq!(res.types_visited, 105);
        assert_eq!(res.curves.len(), 2);
        assert!(res.curves.iter().all(|c| c.multiplicity() == &BigInt::from(1)));
        assert_eq!(res.total_complex(), BigInt::from(2));
        assert!(res.tropically_general);
        for c in &res.curves {
            assert!(validate_genericity(&c.curve).is_empty(), "{:?}", validate_genericity(&c.curve));
        }
        assert_eq!(res.total_real(&[1; 5]).unwrap(), BigInt::from(2));
    }

    #[test]
    fn dimension_condition_is_enforced() {
        let p = toy_problem(5).with_cross_ratios(vec![]);
        assert!(matches!(
            enumerate(&p),
            Err(EnumerateError::Problem(ProblemError::Dimension { expected: 5, got: 4 }))
        ));
    }

    #[test]
    fn coincident_vertices_are_flagged() {
        let tree = MarkedTree::new(3, vec![0, 0, 1, 2, 2], vec![(0, 1), (1, 2)]).unwrap();
        let degrees = vec![vec![1, 1], vec![0, -1], vec![-2, 0], vec![0, 1], vec![1, -1]];
        let c = TropicalCurve::from_lengths(tree, degrees, vec![rat(1), rat(1)], vec![rat(0), rat(0)]).unwrap();
        assert_eq!(c.position(0), c.position(2));
        let v = validate_genericity(&c);
        assert!(v.contains(&GenericityViolation::CoincidentVertices { first: 0, second: 2 }));
    }

    #[test]
    fn vertex_on_distant_ray_is_flagged() {
        let tree = MarkedTree::new(3, vec![0, 0, 1, 2, 2], vec![(0, 1), (1, 2)]).unwrap();
        let degrees = vec![vec![2, 1], vec![-1, 0], vec![-2, 0], vec![0, 1], vec![1, -2]];
        let c = TropicalCurve::from_lengths(tree, degrees, vec![rat(1), rat(1)], vec![rat(0), rat(0)]).unwrap();
        assert_eq!(c.position(0), &[rat(0), rat(2)]);
        let v = validate_genericity(&c);
        assert_eq!(v, vec![GenericityViolation::VertexOnEdge { vertex: 0, edge: EdgeId::End(3) }]);
    }

    #[test]
    fn two_contracted_edges_are_flagged() {
        let tree = MarkedTree::star(4).unwrap();
        let degrees = vec![vec![1, 0], vec![-1, 0], vec![0, 0], vec![0, 0]];
        let c = TropicalCurve::from_lengths(tree, degrees, vec![], vec![rat(0), rat(0)]).unwrap();
        assert_eq!(validate_genericity(&c), vec![GenericityViolation::ContractedValence { vertex: 0, count: 2 }]);
    }
}
