//! Problem data and parameterized rational tropical curves.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::linalg::{is_free_quotient, IntMatrix, Quotient};
use crate::tree::{EdgeId, MarkedTree, Vertex, MAX_ENDS};
use crate::{LatticeVector, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ProblemError {
    #[error("the lattice rank must be positive")]
    ZeroRank,
    #[error("a problem needs at least 3 ends, got {0}")]
    TooFewEnds(usize),
    #[error("at most {MAX_ENDS} ends are supported, got {0}")]
    TooManyEnds(usize),
    #[error("degree of end {} has {got} coordinates, expected {expected}", .end + 1)]
    DegreeLength { end: usize, expected: usize, got: usize },
    #[error("degrees do not balance: their sum is {sum:?}, not zero")]
    Unbalanced { sum: LatticeVector },
    #[error("constraint refers to end {}, but there are {ends} ends", .end + 1)]
    ConstraintEnd { end: usize, ends: usize },
    #[error("end {} has more than one constraint", .end + 1)]
    DuplicateConstraint { end: usize },
    #[error("sublattice generator of end {} has the wrong number of coordinates", .end + 1)]
    SublatticeWidth { end: usize },
    #[error("N/L for end {} has torsion with invariant factors {divisors:?}", .end + 1)]
    Torsion { end: usize, divisors: Vec<BigInt> },
    #[error("the degree of end {} does not lie in its constraint sublattice", .end + 1)]
    DegreeOutsideSublattice { end: usize },
    #[error("constraint point of end {} has the wrong number of coordinates", .end + 1)]
    PointLength { end: usize },
    #[error("leading coefficients of end {} must be nonzero and match the rank", .end + 1)]
    BadCoefficients { end: usize },
    #[error("cross-ratio {} must name four distinct ends in range", .index + 1)]
    CrossRatioEnds { index: usize },
    #[error("tropical cross-ratio {} is zero", .index + 1)]
    ZeroCrossRatio { index: usize },
    #[error("leading coefficient of cross-ratio {} is zero", .index + 1)]
    ZeroCrossRatioCoefficient { index: usize },
    #[error("dimension condition fails: s + Σ rank(N/L_i) = {got}, but r - 3 + rank N = {expected}")]
    Dimension { expected: usize, got: usize },
}

/// An affine constraint `h(v_i) ∈ point + L_i ⊗ ℚ` on the vertex carrying an
/// end, together with the leading coefficients of an algebraic torus point
/// tropicalizing to it (used when lifting).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EndConstraint {
    pub end: usize,
    /// Generators of `L_i` as rows (`k × n`, `k` may be 0).
    pub sublattice: IntMatrix,
    /// `P_i : N → N/L_i`, rows spanning the annihilator of `L_i`.
    pub projection: IntMatrix,
    /// A representative point in `ℚⁿ`.
    pub point: Vec<Rational>,
    /// `ζ_i^tr = P_i · point`.
    pub target: Vec<Rational>,
    /// Leading coefficients `c ∈ (ℚ^×)ⁿ` of the algebraic constraint point.
    pub coefficients: Vec<Rational>,
}

impl EndConstraint {
    pub fn codim(&self) -> usize {
        self.projection.rows()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossRatio {
    pub ends: [usize; 4],
    /// `λ^tr`.
    pub value: Rational,
    /// Leading coefficient of the algebraic cross-ratio.
    pub coefficient: Rational,
}

/// Input for one end constraint before the quotient map is derived.
#[derive(Clone, Debug)]
pub struct ConstraintInput {
    pub end: usize,
    pub sublattice: Vec<LatticeVector>,
    pub point: Vec<Rational>,
    pub coefficients: Option<Vec<Rational>>,
}

/// Fixed data of a counting problem: degrees `n_i ∈ N = ℤⁿ`, affine
/// constraints on some of the end vertices, and cross-ratio constraints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemSpec {
    rank: usize,
    degrees: Vec<LatticeVector>,
    /// Indexed by end; `None` means `L_i = N`.
    constraints: Vec<Option<EndConstraint>>,
    cross_ratios: Vec<CrossRatio>,
}

impl ProblemSpec {
    pub fn new(
        rank: usize,
        degrees: Vec<LatticeVector>,
        constraints: Vec<ConstraintInput>,
        cross_ratios: Vec<CrossRatio>,
    ) -> Result<Self, ProblemError> {
        let r = degrees.len();
        if rank == 0 {
            return Err(ProblemError::ZeroRank);
        }
        if r < 3 {
            return Err(ProblemError::TooFewEnds(r));
        }
        if r > MAX_ENDS {
            return Err(ProblemError::TooManyEnds(r));
        }
        for (end, d) in degrees.iter().enumerate() {
            if d.len() != rank {
                return Err(ProblemError::DegreeLength { end, expected: rank, got: d.len() });
            }
        }
        let sum: LatticeVector =
            (0..rank).map(|k| degrees.iter().map(|d| d[k]).sum()).collect();
        if sum.iter().any(|&x| x != 0) {
            return Err(ProblemError::Unbalanced { sum });
        }

        let mut slots: Vec<Option<EndConstraint>> = vec![None; r];
        for c in constraints {
            let end = c.end;
            if end >= r {
                return Err(ProblemError::ConstraintEnd { end, ends: r });
            }
            if slots[end].is_some() {
                return Err(ProblemError::DuplicateConstraint { end });
            }
            if c.sublattice.iter().any(|g| g.len() != rank) {
                return Err(ProblemError::SublatticeWidth { end });
            }
            let sublattice = IntMatrix::from_vec(
                c.sublattice.len(),
                rank,
                c.sublattice.iter().flatten().map(|&x| BigInt::from(x)).collect(),
            );
            let projection = match is_free_quotient(&sublattice) {
                Quotient::Free(p) => p,
                Quotient::Torsion(divisors) => return Err(ProblemError::Torsion { end, divisors }),
            };
            let degree: Vec<BigInt> = degrees[end].iter().map(|&x| BigInt::from(x)).collect();
            if projection.mul_vec(&degree).iter().any(|x| !x.is_zero()) {
                return Err(ProblemError::DegreeOutsideSublattice { end });
            }
            if c.point.len() != rank {
                return Err(ProblemError::PointLength { end });
            }
            let coefficients = c.coefficients.unwrap_or_else(|| vec![crate::rat(1); rank]);
            if coefficients.len() != rank || coefficients.iter().any(Zero::is_zero) {
                return Err(ProblemError::BadCoefficients { end });
            }
            let target = projection.to_rational().mul_vec(&c.point);
            slots[end] =
                Some(EndConstraint { end, sublattice, projection, point: c.point, target, coefficients });
        }

        for (index, x) in cross_ratios.iter().enumerate() {
            let q = x.ends;
            let distinct = (0..4).all(|a| (a + 1..4).all(|b| q[a] != q[b]));
            if !distinct || q.iter().any(|&i| i >= r) {
                return Err(ProblemError::CrossRatioEnds { index });
            }
            if x.value.is_zero() {
                return Err(ProblemError::ZeroCrossRatio { index });
            }
            if x.coefficient.is_zero() {
                return Err(ProblemError::ZeroCrossRatioCoefficient { index });
            }
        }

        Ok(ProblemSpec { rank, degrees, constraints: slots, cross_ratios })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn num_ends(&self) -> usize {
        self.degrees.len()
    }

    pub fn degrees(&self) -> &[LatticeVector] {
        &self.degrees
    }

    pub fn degree(&self, i: usize) -> &LatticeVector {
        &self.degrees[i]
    }

    pub fn constraint(&self, i: usize) -> Option<&EndConstraint> {
        self.constraints[i].as_ref()
    }

    /// Constraints with a nonzero quotient rank, in end order. These are the
    /// ones that contribute rows to θ.
    pub fn active_constraints(&self) -> impl Iterator<Item = &EndConstraint> {
        self.constraints.iter().flatten().filter(|c| c.codim() > 0)
    }

    pub fn cross_ratios(&self) -> &[CrossRatio] {
        &self.cross_ratios
    }

    /// `Σ rank(N/L_i)`.
    pub fn total_codim(&self) -> usize {
        self.active_constraints().map(EndConstraint::codim).sum()
    }

    /// Checks `s + Σ rank(N/L_i) = r − 3 + rank N`, the count that makes θ
    /// square for trivalent trees (it reads `r − 1` in the plane).
    pub fn check_dimension(&self) -> Result<(), ProblemError> {
        let expected = self.num_ends() - 3 + self.rank;
        let got = self.cross_ratios.len() + self.total_codim();
        if got == expected {
            Ok(())
        } else {
            Err(ProblemError::Dimension { expected, got })
        }
    }

    /// The problem with end `i` renamed to `perm[i]`.
    pub fn relabel_ends(&self, perm: &[usize]) -> Self {
        let r = self.num_ends();
        assert_eq!(perm.len(), r);
        let mut degrees = vec![Vec::new(); r];
        let mut constraints = vec![None; r];
        for i in 0..r {
            degrees[perm[i]] = self.degrees[i].clone();
            constraints[perm[i]] =
                self.constraints[i].clone().map(|c| EndConstraint { end: perm[i], ..c });
        }
        let cross_ratios = self
            .cross_ratios
            .iter()
            .map(|x| CrossRatio { ends: x.ends.map(|i| perm[i]), ..x.clone() })
            .collect();
        ProblemSpec { rank: self.rank, degrees, constraints, cross_ratios }
    }

    /// The problem with every constraint point shifted by `v`.
    pub fn translate(&self, v: &[Rational]) -> Self {
        assert_eq!(v.len(), self.rank);
        let constraints = self
            .constraints
            .iter()
            .map(|c| {
                c.as_ref().map(|c| {
                    let point: Vec<Rational> = c.point.iter().zip(v).map(|(a, b)| a + b).collect();
                    let target = c.projection.to_rational().mul_vec(&point);
                    EndConstraint { point, target, ..c.clone() }
                })
            })
            .collect();
        ProblemSpec { constraints, ..self.clone() }
    }

    /// Replaces the tropical cross-ratio values (same order as stored).
    pub fn with_cross_ratios(&self, cross_ratios: Vec<CrossRatio>) -> Self {
        ProblemSpec { cross_ratios, ..self.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CurveError {
    #[error("expected {expected} degree vectors, got {got}")]
    DegreeCount { expected: usize, got: usize },
    #[error("degrees do not balance")]
    Unbalanced,
    #[error("expected {expected} edge lengths, got {got}")]
    LengthCount { expected: usize, got: usize },
    #[error("bounded edge {edge} has non-positive length")]
    NonPositiveLength { edge: usize },
    #[error("expected {expected} vertex positions, got {got}")]
    PositionCount { expected: usize, got: usize },
    #[error("positions are incompatible with the length and slope of bounded edge {edge}")]
    Incompatible { edge: usize },
}

/// Slopes of bounded edges, oriented from tail to head. The slope of an edge
/// is the sum of the degrees of the ends above it, which is the unique
/// assignment balancing every vertex.
pub fn propagate_slopes(tree: &MarkedTree, degrees: &[LatticeVector]) -> Vec<LatticeVector> {
    let rs = tree.rooted();
    let n = degrees.first().map_or(0, Vec::len);
    (0..tree.num_bounded())
        .map(|j| {
            let mut s = vec![0i64; n];
            for i in crate::tree::end_set_members(tree.split(j)) {
                for (a, b) in s.iter_mut().zip(&degrees[i]) {
                    *a += b;
                }
            }
            debug_assert_eq!(tree.split(j), rs.below(rs.head(j)));
            s
        })
        .collect()
}

/// A parameterized rational tropical curve `h : Γ → ℚⁿ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TropicalCurve {
    tree: MarkedTree,
    degrees: Vec<LatticeVector>,
    slopes: Vec<LatticeVector>,
    lengths: Vec<Rational>,
    positions: Vec<Vec<Rational>>,
}

impl TropicalCurve {
    /// Checks balancing and `h(head) − h(tail) = |γ|·n_γ` on every edge.
    pub fn new(
        tree: MarkedTree,
        degrees: Vec<LatticeVector>,
        lengths: Vec<Rational>,
        positions: Vec<Vec<Rational>>,
    ) -> Result<Self, CurveError> {
        if positions.len() != tree.num_vertices() {
            return Err(CurveError::PositionCount { expected: tree.num_vertices(), got: positions.len() });
        }
        let root = tree.rooted().root_vertex();
        let anchor = positions[root].clone();
        let curve = TropicalCurve::from_lengths(tree, degrees, lengths, anchor)?;
        for w in 0..curve.tree.num_vertices() {
            if curve.positions[w] != positions[w] {
                let edge = curve.tree.rooted().parent_edge(w).expect("root is the anchor");
                return Err(CurveError::Incompatible { edge });
            }
        }
        Ok(curve)
    }

    /// Builds positions from the lengths, placing the root vertex at `anchor`.
    pub fn from_lengths(
        tree: MarkedTree,
        degrees: Vec<LatticeVector>,
        lengths: Vec<Rational>,
        anchor: Vec<Rational>,
    ) -> Result<Self, CurveError> {
        if degrees.len() != tree.num_ends() {
            return Err(CurveError::DegreeCount { expected: tree.num_ends(), got: degrees.len() });
        }
        let n = anchor.len();
        if (0..n).any(|k| degrees.iter().map(|d| d[k]).sum::<i64>() != 0) {
            return Err(CurveError::Unbalanced);
        }
        if lengths.len() != tree.num_bounded() {
            return Err(CurveError::LengthCount { expected: tree.num_bounded(), got: lengths.len() });
        }
        if let Some(edge) = lengths.iter().position(|l| !l.is_positive()) {
            return Err(CurveError::NonPositiveLength { edge });
        }
        let slopes = propagate_slopes(&tree, &degrees);
        let rs = tree.rooted();
        let mut positions = vec![Vec::new(); tree.num_vertices()];
        let mut order: Vec<usize> = (0..tree.num_vertices()).collect();
        order.sort_by_key(|&w| rs.depth(w));
        for w in order {
            positions[w] = match rs.parent_edge(w) {
                None => anchor.clone(),
                Some(j) => positions[rs.tail(j)]
                    .iter()
                    .zip(&slopes[j])
                    .map(|(p, &s)| p + &lengths[j] * Rational::from_integer(s.into()))
                    .collect(),
            };
        }
        let curve = TropicalCurve { tree, degrees, slopes, lengths, positions };
        debug_assert!(curve.is_balanced());
        Ok(curve)
    }

    pub fn tree(&self) -> &MarkedTree {
        &self.tree
    }

    pub fn degrees(&self) -> &[LatticeVector] {
        &self.degrees
    }

    /// Slope of bounded edge `j` from tail to head.
    pub fn slope(&self, j: usize) -> &LatticeVector {
        &self.slopes[j]
    }

    pub fn slopes(&self) -> &[LatticeVector] {
        &self.slopes
    }

    pub fn edge_slope(&self, e: EdgeId) -> &LatticeVector {
        match e {
            EdgeId::End(i) => &self.degrees[i],
            EdgeId::Bounded(j) => &self.slopes[j],
        }
    }

    pub fn length(&self, j: usize) -> &Rational {
        &self.lengths[j]
    }

    pub fn lengths(&self) -> &[Rational] {
        &self.lengths
    }

    pub fn position(&self, w: usize) -> &[Rational] {
        &self.positions[w]
    }

    pub fn positions(&self) -> &[Vec<Rational>] {
        &self.positions
    }

    pub fn is_contracted(&self, e: EdgeId) -> bool {
        self.edge_slope(e).iter().all(|&x| x == 0)
    }

    /// Sum of outgoing slopes vanishes at every finite vertex.
    pub fn is_balanced(&self) -> bool {
        let rs = self.tree.rooted();
        let n = self.positions.first().map_or(0, Vec::len);
        (0..self.tree.num_vertices()).all(|w| {
            let mut s = vec![0i64; n];
            for &e in self.tree.incident(w) {
                let (slope, sign) = match e {
                    EdgeId::End(i) => (&self.degrees[i], 1),
                    EdgeId::Bounded(j) => (&self.slopes[j], if rs.tail(j) == w { 1 } else { -1 }),
                };
                for (a, b) in s.iter_mut().zip(slope) {
                    *a += sign * b;
                }
            }
            s.iter().all(|&x| x == 0)
        })
    }

    /// Tropical cross-ratio as `Σ ε(γ, quad)·|γ|` over bounded edges.
    pub fn cross_ratio_formula(&self, quad: [usize; 4]) -> Rational {
        (0..self.tree.num_bounded())
            .filter_map(|j| match self.tree.separates(j, quad) {
                0 => None,
                s => Some(Rational::from_integer(s.into()) * &self.lengths[j]),
            })
            .sum()
    }

    /// Tropical cross-ratio as the signed length of the overlap of the
    /// geodesics `q0 → q1` and `q2 → q3`.
    pub fn cross_ratio_geodesic(&self, quad: [usize; 4]) -> Rational {
        let p = self.tree.geodesic(Vertex::Infinite(quad[0]), Vertex::Infinite(quad[1]));
        let q = self.tree.geodesic(Vertex::Infinite(quad[2]), Vertex::Infinite(quad[3]));
        let mut total = Rational::zero();
        for &(e, s) in &p {
            let EdgeId::Bounded(j) = e else { continue };
            if let Some(&(_, t)) = q.iter().find(|(f, _)| *f == e) {
                if s == t {
                    total += &self.lengths[j];
                } else {
                    total -= &self.lengths[j];
                }
            }
        }
        total
    }

    /// `P_i · h(v_i) = ζ_i^tr`; vacuous for unconstrained ends.
    pub fn check_affine_constraint(&self, problem: &ProblemSpec, i: usize) -> bool {
        let Some(c) = problem.constraint(i) else {
            return true;
        };
        let h = &self.positions[self.tree.end_vertex(i)];
        c.projection.to_rational().mul_vec(h) == c.target
    }
}
