//! Lifts of the two curves through two points with a fixed cross-ratio,
//! checked against a direct solution in the parameterization
//! `t(q1)=λ, t(q2)=1, t(q3)=0, t(q4)=∞`, `f(t) = (c1(t−λ)/(t−1), c2·t)`.

use tropcount_core::curve::{ConstraintInput, CrossRatio, ProblemSpec};
use tropcount_core::enumerate::enumerate;
use proptest::prelude::*;
use tropcount_core::lift::{lift, tropicalize_lengths, LiftOptions, LiftedMap, Lifter};
use tropcount_core::series::TSeries;
use tropcount_core::Rational;

const WORK: i64 = 70;
const ORDER: i64 = 20;

fn q(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn mono(c: i64, k: i64) -> TSeries {
    TSeries::monomial(q(c), k, 1, WORK)
}

struct Data {
    a5: TSeries,
    b5: TSeries,
    a6: TSeries,
    b6: TSeries,
    lambda: TSeries,
}

fn data() -> Data {
    Data { a5: mono(2, 0), b5: mono(3, 0), a6: mono(5, 11), b6: mono(7, 3), lambda: mono(2, 5) }
}

fn problem() -> ProblemSpec {
    let degrees = vec![vec![1, 0], vec![-1, 0], vec![0, 1], vec![0, -1], vec![0, 0], vec![0, 0]];
    let constraints = vec![
        ConstraintInput { end: 4, sublattice: vec![], point: vec![q(0), q(0)], coefficients: Some(vec![q(2), q(3)]) },
        ConstraintInput { end: 5, sublattice: vec![], point: vec![q(11), q(3)], coefficients: Some(vec![q(5), q(7)]) },
    ];
    let cross = vec![CrossRatio { ends: [0, 1, 2, 3], value: q(5), coefficient: q(2) }];
    ProblemSpec::new(2, degrees, constraints, cross).unwrap()
}

/// Both solutions `(c1, c2)` via Newton's method on the quadratic obtained
/// by eliminating `c1` from the two point conditions.
fn oracle() -> Vec<(TSeries, TSeries)> {
    let Data { a5, b5, a6, b6, lambda } = data();
    let da = &a5 - &a6;
    let c2sq = &lambda * &da;
    let c2lin = &(&(&a6 * &b5) - &(&a5 * &b6)) + &(&lambda * &(&(&a6 * &b6) - &(&a5 * &b5)));
    let c2const = &(&b5 * &b6) * &da;
    let eval = |c: &TSeries| &(&(&c2sq * &(c * c)) + &(&c2lin * c)) + &c2const;
    let deriv = |c: &TSeries| &(&c2sq * c).scale(&q(2)) + &c2lin;
    let starts = [b5.clone(), b6.div(&lambda).unwrap()];
    starts
        .into_iter()
        .map(|mut c2| {
            for _ in 0..12 {
                c2 = &c2 - &eval(&c2).div(&deriv(&c2)).unwrap();
            }
            let c1 = (&a5 * &(&b5 - &c2)).div(&(&b5 - &(&lambda * &c2))).unwrap();
            (c1, c2)
        })
        .collect()
}

fn assert_agree(a: &TSeries, b: &TSeries, through: i64, what: &str) {
    let d = a - b;
    assert!(d.precision() > through, "{what}: only known to {}", d.precision());
    if let Some(k) = d.order() {
        assert!(k > through, "{what}: differs at order {k}: {a} vs {b}");
    }
}

/// `t` as a function of the lift coordinate, normalized by `q2, q3, q4`.
fn t_of(l: &LiftedMap, y: &TSeries) -> TSeries {
    let p = &l.marked_points;
    let num = &(y - &p[2]) * &(&p[1] - &p[3]);
    let den = &(y - &p[3]) * &(&p[1] - &p[2]);
    num.div(&den).unwrap()
}

fn eval_map(l: &LiftedMap, degrees: &[Vec<i64>], y: &TSeries) -> Vec<TSeries> {
    (0..2)
        .map(|k| {
            let mut v = l.map_coefficients[k].clone();
            for (i, p) in l.marked_points.iter().enumerate() {
                let n = degrees[i][k];
                if n != 0 {
                    v = &v * &(y - p).pow(n).unwrap();
                }
            }
            v
        })
        .collect()
}

#[test]
fn oracle_solves_the_quadratic() {
    let d = data();
    for (c1, c2) in oracle() {
        for (a, b) in [(&d.a5, &d.b5), (&d.a6, &d.b6)] {
            let t = b.div(&c2).unwrap();
            let x1 = (&c1 * &(&t - &d.lambda)).div(&(&t - &TSeries::one(1, WORK))).unwrap();
            assert_agree(&x1, a, 40, "oracle x1");
        }
    }
}

#[test]
fn lifts_match_direct_solution() {
    let problem = problem();
    let result = enumerate(&problem).unwrap();
    assert_eq!(result.curves.len(), 2);
    let expected = oracle();
    let d = data();
    let mut matched = vec![false; expected.len()];
    for accepted in &result.curves {
        let lifts = lift(&accepted.curve, &problem, &LiftOptions::new(ORDER + 20)).unwrap();
        assert_eq!(lifts.len(), 1);
        let l = &lifts[0];

        let log = &l.residual_log;
        assert!(log.windows(2).all(|w| w[0] < w[1]), "{log:?}");

        let lengths = tropicalize_lengths(accepted.curve.tree(), l);
        let lengths: Vec<Rational> = lengths.into_iter().map(Option::unwrap).collect();
        assert_eq!(lengths, accepted.curve.lengths());

        let tree = accepted.curve.tree();
        let rs = tree.rooted();
        for i in 0..5 {
            for j in 0..i {
                let shared: Rational = (0..tree.num_bounded())
                    .filter(|&e| rs.below(rs.head(e)) >> i & 1 == 1 && rs.below(rs.head(e)) >> j & 1 == 1)
                    .map(|e| accepted.curve.length(e).clone())
                    .sum();
                let v = (&l.marked_points[i] - &l.marked_points[j]).valuation();
                assert_eq!(v.finite(), Some(&shared), "ends {} and {}", i + 1, j + 1);
            }
        }

        let lambda = t_of(l, &l.marked_points[0]);
        assert_agree(&lambda, &d.lambda, ORDER, "cross-ratio");
        let t5 = t_of(l, &l.marked_points[4]);
        let c2 = d.b5.div(&t5).unwrap();
        let one = TSeries::one(1, WORK);
        let c1 = (&d.a5 * &(&t5 - &one)).div(&(&t5 - &d.lambda)).unwrap();

        let idx = expected.iter().position(|(_, e2)| e2.order() == c2.order()).expect("matching root");
        assert!(!matched[idx]);
        matched[idx] = true;
        let (e1, e2) = &expected[idx];
        assert_agree(&c2, e2, ORDER, "c2");
        assert_agree(&c1, e1, ORDER, "c1");

        for y in [q(7), "1/3".parse().unwrap()] {
            let y = TSeries::constant(y, 1, WORK);
            let t = t_of(l, &y);
            let ours = eval_map(l, problem.degrees(), &y);
            let x1 = (e1 * &(&t - &d.lambda)).div(&(&t - &one)).unwrap();
            let x2 = e2 * &t;
            assert_agree(&ours[0], &x1, ORDER, "f1");
            assert_agree(&ours[1], &x2, ORDER, "f2");
        }
    }
    assert!(matched.iter().all(|&m| m));
}

fn nonzero(x: i64) -> Rational {
    q(if x == 0 { 1 } else { x })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn factors_see_alpha_only_modulo_pi(
        d in 0i64..6,
        base in proptest::collection::vec(proptest::collection::vec(-4i64..5, 1..4), 3),
        bump in proptest::collection::vec(-4i64..5, 3),
        pick in 0usize..2,
    ) {
        let problem = problem();
        let result = enumerate(&problem).unwrap();
        let curve = &result.curves[pick].curve;
        let lifter = Lifter::new(curve, &problem, &LiftOptions::new(8)).unwrap();
        let alpha: Vec<Vec<Rational>> = base
            .iter()
            .map(|p| p.iter().enumerate().map(|(i, &c)| if i == 0 { nonzero(c) } else { q(c) }).collect())
            .collect();
        let perturbed: Vec<Vec<Rational>> = alpha
            .iter()
            .zip(&bump)
            .map(|(p, &b)| {
                let a = TSeries::from_coeffs(1, 0, p.clone(), WORK);
                let g = &TSeries::one(1, WORK) + &TSeries::monomial(q(b), d + 1, 1, WORK);
                let prod = &a * &g;
                (0..WORK).map(|k| prod.coeff(k).unwrap()).collect()
            })
            .collect();
        let before = lifter.factors(&alpha, 40).unwrap();
        let after = lifter.factors(&perturbed, 40).unwrap();
        for (x, y) in before.iter().zip(&after) {
            let diff = x - y;
            prop_assert!(diff.precision() > d);
            prop_assert!(diff.order().is_none_or(|k| k > d), "{} vs {}", x, y);
        }
    }
}
