//! Lifting a tropical solution to an algebraic stable map over truncated
//! t-adic series.
//!
//! Everything is expressed in the single coordinate `y = y_{v_r}` on the
//! source curve, with `q_r = ∞`. Walking up from the root vertex, each vertex
//! coordinate satisfies `y = A_w·y_w + B_w`, where `A_h = A_t·π^{e|γ|}·α_γ`
//! and `B_h = B_t + A_t·β_γ` along an edge `γ` from `t` to `h`. The marked
//! points are then `P_i = A_{v_i}·β_{e_i} + B_{v_i}`, and every coordinate
//! difference that appears in the edge, constraint and cross-ratio factors
//! is a ratio of differences of `P`'s and `B`'s.
//!
//! The unknowns `ξ` are indexed like the columns of θ: `χ_{w,k}` for every
//! finite vertex and coordinate, then `α_γ` for every bounded edge. Each row
//! of `Θ(ξ)` is a factor `F_row(α, β)` times the monomial `Π_c ξ_c^{θ[row,c]}`.
//! Starting from a rational solution modulo `π`, each iteration kills the
//! lowest-order discrepancy of `target / Θ(ξ)` by solving `θ·x = u` over ℚ.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::curve::{ProblemSpec, TropicalCurve};
use crate::linalg::solve_rational;
use crate::series::{SeriesError, TSeries};
use crate::theta::{ThetaComplex, ThetaRow};
use crate::tree::{end_set_members, EdgeId, EndSet};
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LiftError {
    #[error("θ is not invertible over ℚ (kernel rank {e1_rank}, finite cokernel: {finite})")]
    NotRegular { e1_rank: usize, finite: bool },
    #[error("no β value supplied for the essential edge above ends {}", one_based(.below))]
    MissingEssentialBeta { below: Vec<usize> },
    #[error("β values at vertex {vertex} must be pairwise distinct")]
    CoincidentBeta { vertex: usize },
    #[error("{factor} is not a unit at the starting point")]
    NonUnit { factor: String },
    #[error("field extension required: component {} solves z^{divisor} = {value}, which has no rational root", .component + 1)]
    FieldExtensionRequired { component: usize, divisor: BigInt, value: Rational },
    #[error("the multiplicative system has no solution: component {} must equal 1, got {value}", .component + 1)]
    Inconsistent { component: usize, value: Rational },
    #[error("residual stopped improving at order {order}")]
    Stalled { order: i64 },
    #[error("linear step at order {order} has no rational solution")]
    LinearStep { order: i64 },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Clone, Debug)]
pub struct LiftOptions {
    /// Requested order in units of `π = t^{1/e}`: the map coefficients are
    /// returned correct through `π^order`.
    pub order: i64,
    /// Values of `β` on essential edges, keyed by the set of ends above the
    /// edge. Trivalent curves have none.
    pub essential_betas: Vec<(EndSet, Rational)>,
    /// Extra iterations allowed beyond the requested order.
    pub iteration_slack: usize,
}

impl LiftOptions {
    pub fn new(order: i64) -> Self {
        LiftOptions { order, essential_betas: Vec::new(), iteration_slack: 8 }
    }
}

/// An algebraic solution lifted to finite precision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftedMap {
    pub ramification: u32,
    /// `χ_w` on the standard basis of `M`, per finite vertex.
    pub chi: Vec<Vec<TSeries>>,
    pub alpha: Vec<TSeries>,
    /// β on every non-root edge, constant.
    pub beta: Vec<(EdgeId, Rational)>,
    /// `y_{v_r}(q_i)` for every end except the root.
    pub marked_points: Vec<TSeries>,
    /// `K_k = (−1)^{(n_r)_k}·π^{e·h(v_r)_k}·χ_{v_r,k}`; the map is
    /// `y ↦ (K_k · Π_{i<r} (y − P_i)^{(n_i)_k})_k`.
    pub map_coefficients: Vec<TSeries>,
    /// `Θ(ξ) ≡ target` modulo `π` to this power.
    pub residual_order: i64,
    /// Residual order observed before each correction, then the final one.
    pub residual_log: Vec<i64>,
}

impl LiftedMap {
    pub fn iterations(&self) -> usize {
        self.residual_log.len().saturating_sub(1)
    }
}

/// Coordinates of the marked points in `y_{v_r}` for given `α`.
#[derive(Clone, Debug)]
pub struct Coordinates {
    /// `A_w` per finite vertex.
    pub scale: Vec<TSeries>,
    /// `B_w` per finite vertex.
    pub shift: Vec<TSeries>,
    /// `P_i` per end (the root entry is unused and zero).
    pub points: Vec<TSeries>,
}

impl Coordinates {
    /// `y_w(q_i) = (P_i − B_w)/A_w`.
    pub fn local(&self, w: usize, i: usize) -> Result<TSeries, SeriesError> {
        (&self.points[i] - &self.shift[w]).div(&self.scale[w])
    }
}

/// Quotient accumulated as separate numerator and denominator.
struct Fraction {
    num: TSeries,
    den: TSeries,
}

impl Fraction {
    fn one(e: u32, precision: i64) -> Self {
        Fraction { num: TSeries::one(e, precision), den: TSeries::one(e, precision) }
    }

    /// Multiplies by `(x/y)^k`.
    fn mul_pow(&mut self, x: &TSeries, y: &TSeries, k: i64) -> Result<(), SeriesError> {
        let (x, y, k) = if k >= 0 { (x, y, k) } else { (y, x, -k) };
        if k > 0 {
            self.num = &self.num * &x.pow(k)?;
            self.den = &self.den * &y.pow(k)?;
        }
        Ok(())
    }

    fn value(&self) -> Result<TSeries, SeriesError> {
        self.num.div(&self.den)
    }
}

/// The lifting problem for one accepted curve.
#[derive(Clone, Debug)]
pub struct Lifter<'a> {
    curve: &'a TropicalCurve,
    problem: &'a ProblemSpec,
    theta: ThetaComplex,
    ramification: u32,
    /// `e·|γ|` per bounded edge.
    scaled_lengths: Vec<i64>,
    beta: Vec<(EdgeId, Rational)>,
    beta_of_end: Vec<Rational>,
    beta_of_edge: Vec<Rational>,
    target: Vec<Rational>,
}

fn lcm_of_denominators<'b>(values: impl IntoIterator<Item = &'b Rational>) -> BigInt {
    values.into_iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

fn to_i64(x: &BigInt) -> i64 {
    i64::try_from(x).expect("exponent fits in i64")
}

fn rational_pow(q: &Rational, k: &BigInt) -> Rational {
    let k = to_i64(k);
    let base = if k < 0 { q.recip() } else { q.clone() };
    num_traits::pow(base, k.unsigned_abs() as usize)
}

impl<'a> Lifter<'a> {
    pub fn new(curve: &'a TropicalCurve, problem: &'a ProblemSpec, options: &LiftOptions) -> Result<Self, LiftError> {
        let theta = ThetaComplex::build(curve, problem);
        let report = theta.report();
        if report.e1_rank != 0 || report.m_complex.is_none() {
            return Err(LiftError::NotRegular { e1_rank: report.e1_rank, finite: report.m_complex.is_some() });
        }
        let tree = curve.tree();
        let rs = tree.rooted();

        let e = lcm_of_denominators(curve.lengths().iter().chain(curve.positions().iter().flatten()));
        let ramification = u32::try_from(&e).expect("ramification index fits in u32");
        let er = Rational::from_integer(e);
        let scaled_lengths = curve
            .lengths()
            .iter()
            .map(|l| to_i64(&(l * &er).to_integer()))
            .collect();

        let mut beta = Vec::new();
        for w in 0..tree.num_vertices() {
            let children = rs.children(w);
            let mut values: Vec<Rational> = Vec::with_capacity(children.len());
            for (pos, &edge) in children.iter().enumerate() {
                let value = if pos == 0 {
                    Rational::zero()
                } else if pos + 1 == children.len() {
                    Rational::one()
                } else {
                    let below = rs.below_edge(edge);
                    options
                        .essential_betas
                        .iter()
                        .find(|(s, _)| *s == below)
                        .map(|(_, v)| v.clone())
                        .ok_or_else(|| LiftError::MissingEssentialBeta { below: end_set_members(below).collect() })?
                };
                if values.contains(&value) {
                    return Err(LiftError::CoincidentBeta { vertex: w });
                }
                values.push(value.clone());
                beta.push((edge, value));
            }
        }
        let mut beta_of_end = vec![Rational::zero(); tree.num_ends()];
        let mut beta_of_edge = vec![Rational::zero(); tree.num_bounded()];
        for (edge, value) in &beta {
            match *edge {
                EdgeId::End(i) => beta_of_end[i] = value.clone(),
                EdgeId::Bounded(j) => beta_of_edge[j] = value.clone(),
            }
        }

        let layout = &theta.layout;
        let mut target = vec![Rational::one(); layout.num_edge_rows()];
        for &(end, p) in &layout.constraint_rows {
            let c = problem.constraint(end).expect("active constraint");
            let value = (0..problem.rank())
                .map(|k| rational_pow(&c.coefficients[k], &c.projection[(p, k)]))
                .fold(Rational::one(), |acc, x| acc * x);
            target.push(value);
        }
        target.extend(problem.cross_ratios().iter().map(|x| x.coefficient.clone()));

        Ok(Lifter {
            curve,
            problem,
            theta,
            ramification,
            scaled_lengths,
            beta,
            beta_of_end,
            beta_of_edge,
            target,
        })
    }

    pub fn ramification(&self) -> u32 {
        self.ramification
    }

    pub fn theta(&self) -> &ThetaComplex {
        &self.theta
    }

    /// `(1, ζ^Γ, λ^Γ)`: all rows are constants.
    pub fn target(&self) -> &[Rational] {
        &self.target
    }

    fn num_vertex_cols(&self) -> usize {
        self.theta.layout.rank * self.theta.layout.num_vertices
    }

    fn series(&self, poly: &[Rational], precision: i64) -> TSeries {
        TSeries::from_coeffs(self.ramification, 0, poly.to_vec(), precision)
    }

    /// `A`, `B` and the marked points for the given `α` (polynomials in `π`).
    pub fn coordinates(&self, alpha: &[Vec<Rational>], precision: i64) -> Coordinates {
        let e = self.ramification;
        let tree = self.curve.tree();
        let rs = tree.rooted();
        let v = tree.num_vertices();
        let mut scale = vec![TSeries::zero(e, precision); v];
        let mut shift = vec![TSeries::zero(e, precision); v];
        let mut order: Vec<usize> = (0..v).collect();
        order.sort_by_key(|&w| rs.depth(w));
        for w in order {
            match rs.parent_edge(w) {
                None => {
                    scale[w] = TSeries::one(e, precision);
                    shift[w] = TSeries::zero(e, precision);
                }
                Some(j) => {
                    let t = rs.tail(j);
                    let a = self.series(&alpha[j], precision).shift(self.scaled_lengths[j]);
                    scale[w] = &scale[t] * &a;
                    shift[w] = &shift[t] + &scale[t].scale(&self.beta_of_edge[j]);
                }
            }
        }
        let root = tree.root_end();
        let points = (0..tree.num_ends())
            .map(|i| {
                if i == root {
                    return TSeries::zero(e, precision);
                }
                let w = tree.end_vertex(i);
                &scale[w].scale(&self.beta_of_end[i]) + &shift[w]
            })
            .collect();
        Coordinates { scale, shift, points }
    }

    /// The factors `F_row(α, β)`: `φ_γ(e_k)` on edge rows, `ϕ_j(m_p)` on
    /// constraint rows, and `λ(C; q)·π^{−eλ^tr}·Π α^{−ε}` on cross-ratio rows.
    pub fn factors(&self, alpha: &[Vec<Rational>], precision: i64) -> Result<Vec<TSeries>, SeriesError> {
        let e = self.ramification;
        let tree = self.curve.tree();
        let rs = tree.rooted();
        let root = tree.root_end();
        let r = tree.num_ends();
        let n = self.problem.rank();
        let degrees = self.problem.degrees();
        let c = self.coordinates(alpha, precision);
        let layout = &self.theta.layout;
        let mut rows = Vec::with_capacity(layout.num_rows());

        for j in 0..tree.num_bounded() {
            let (t, h) = (rs.tail(j), rs.head(j));
            let (below_t, below_h) = (rs.below(t), rs.below(h));
            let mut per_end = Vec::new();
            for i in (0..r).filter(|&i| i != root) {
                let x = &c.points[i] - &c.shift[h];
                if below_t >> i & 1 == 1 {
                    if below_h >> i & 1 == 0 {
                        per_end.push((i, x, c.scale[t].clone()));
                    }
                } else {
                    per_end.push((i, x, &c.points[i] - &c.shift[t]));
                }
            }
            for k in 0..n {
                let mut f = Fraction::one(e, precision);
                for (i, x, y) in &per_end {
                    f.mul_pow(x, y, degrees[*i][k])?;
                }
                rows.push(f.value()?);
            }
        }

        for &(end, p) in &layout.constraint_rows {
            let proj = &self.problem.constraint(end).expect("active constraint").projection;
            let pairing = |i: usize| -> i64 { (0..n).map(|k| degrees[i][k] * to_i64(&proj[(p, k)])).sum() };
            if end == root {
                rows.push(TSeries::one(e, precision));
                continue;
            }
            let w = tree.end_vertex(end);
            let below = rs.below(w);
            let mut f = Fraction::one(e, precision);
            for i in (0..r).filter(|&i| i != root && i != end) {
                let k = pairing(i);
                if k == 0 {
                    continue;
                }
                let x = &c.points[end] - &c.points[i];
                if below >> i & 1 == 1 {
                    f.mul_pow(&x, &c.scale[w], k)?;
                } else {
                    f.mul_pow(&x, &(&c.points[i] - &c.shift[w]), k)?;
                }
            }
            let mut value = f.value()?;
            if pairing(root) % 2 != 0 {
                value = -&value;
            }
            rows.push(value);
        }

        for (idx, x) in self.problem.cross_ratios().iter().enumerate() {
            let q = x.ends;
            let diff = |a: usize, b: usize| -> Option<TSeries> {
                (q[a] != root && q[b] != root).then(|| &c.points[q[a]] - &c.points[q[b]])
            };
            let mut f = Fraction::one(e, precision);
            for (num, den) in [((2, 0), (3, 0)), ((3, 1), (2, 1))] {
                if let Some(d) = diff(num.0, num.1) {
                    f.num = &f.num * &d;
                }
                if let Some(d) = diff(den.0, den.1) {
                    f.den = &f.den * &d;
                }
            }
            let lambda_exp = to_i64(&(&x.value * Rational::from_integer(e.into())).to_integer());
            let mut value = f.value()?.shift(-lambda_exp);
            let row = layout.cross_row(idx);
            for j in 0..tree.num_bounded() {
                let eps = to_i64(&self.theta.matrix[(row, layout.length_col(j))]);
                if eps != 0 {
                    value = &value * &self.series(&alpha[j], precision).pow(-eps)?;
                }
            }
            rows.push(value);
        }
        Ok(rows)
    }

    fn split_xi<'x>(&self, xi: &'x [Vec<Rational>]) -> &'x [Vec<Rational>] {
        &xi[self.num_vertex_cols()..]
    }

    /// `Θ(ξ)` with every row computed to at least `precision` when possible.
    pub fn theta_map(&self, xi: &[Vec<Rational>], precision: i64) -> Result<Vec<TSeries>, SeriesError> {
        let factors = self.factors(self.split_xi(xi), precision)?;
        let m = &self.theta.matrix;
        let xs: Vec<TSeries> = xi.iter().map(|p| self.series(p, precision)).collect();
        factors
            .into_iter()
            .enumerate()
            .map(|(row, mut value)| {
                for (col, x) in xs.iter().enumerate() {
                    let k = &m[(row, col)];
                    if !k.is_zero() {
                        value = &value * &x.pow(to_i64(k))?;
                    }
                }
                Ok(value)
            })
            .collect()
    }

    /// `Θ(ξ)` to at least `needed` on every row, raising the working
    /// precision as divisions consume it.
    fn theta_map_to(&self, xi: &[Vec<Rational>], needed: i64) -> Result<Vec<TSeries>, SeriesError> {
        let mut working = needed + 2 * self.scaled_lengths.iter().sum::<i64>() + 2;
        loop {
            let rows = self.theta_map(xi, working)?;
            let have = rows.iter().map(TSeries::precision).min().unwrap_or(i64::MAX);
            if have >= needed {
                return Ok(rows);
            }
            working += needed - have;
        }
    }

    /// All rational `ξ₀` (constants) with `Θ(ξ₀) ≡ target mod π`.
    pub fn initial_solutions(&self) -> Result<Vec<Vec<Rational>>, LiftError> {
        let cols = self.theta.layout.num_cols();
        let ones = vec![vec![Rational::one()]; cols];
        let values = self.theta_map_to(&ones, 1)?;
        let layout = &self.theta.layout;
        let mut reduced = Vec::with_capacity(values.len());
        for (row, v) in values.iter().enumerate() {
            if !v.is_unit() {
                return Err(LiftError::NonUnit { factor: describe_row(layout.row(row)) });
            }
            reduced.push(&self.target[row] / v.leading_coefficient().expect("unit"));
        }

        let smith = &self.theta.smith;
        let rank = smith.rank();
        let mut root_choices: Vec<Vec<Rational>> = Vec::new();
        for j in 0..smith.left.rows() {
            let value = (0..reduced.len())
                .map(|i| rational_pow(&reduced[i], &smith.left[(j, i)]))
                .fold(Rational::one(), |acc, x| acc * x);
            if j >= rank {
                if !value.is_one() {
                    return Err(LiftError::Inconsistent { component: j, value });
                }
                continue;
            }
            let d = &smith.divisors[j];
            let roots = rational_roots(&value, d);
            let expected = d.to_usize_checked();
            if expected != Some(roots.len()) {
                return Err(LiftError::FieldExtensionRequired { component: j, divisor: d.clone(), value });
            }
            root_choices.push(roots);
        }
        while root_choices.len() < cols {
            root_choices.push(vec![Rational::one()]);
        }

        let mut out = Vec::new();
        let mut pick = vec![0usize; cols];
        loop {
            let z: Vec<&Rational> = pick.iter().enumerate().map(|(k, &p)| &root_choices[k][p]).collect();
            let xi0 = (0..cols)
                .map(|c| {
                    (0..cols)
                        .map(|k| rational_pow(z[k], &smith.right[(c, k)]))
                        .fold(Rational::one(), |acc, x| acc * x)
                })
                .collect();
            out.push(xi0);
            let mut k = 0;
            loop {
                if k == cols {
                    return Ok(out);
                }
                pick[k] += 1;
                if pick[k] < root_choices[k].len() {
                    break;
                }
                pick[k] = 0;
                k += 1;
            }
        }
    }

    /// Residual order needed so that the map coefficients are known through
    /// `π^order`.
    pub fn required_order(&self, order: i64) -> i64 {
        let root = self.curve.tree().rooted().root_vertex();
        let e = Rational::from_integer(self.ramification.into());
        let lowest = self.curve.position(root).iter().map(|h| (h * &e).floor().to_integer()).min();
        let lowest = lowest.map_or(0, |x| to_i64(&x));
        order + 1 + (-lowest).max(0)
    }

    /// Iterates from `xi0` until `Θ(ξ) ≡ target mod π^order_needed`.
    pub fn lift_from(&self, xi0: Vec<Rational>, options: &LiftOptions) -> Result<LiftedMap, LiftError> {
        let needed = self.required_order(options.order);
        let mut xi: Vec<Vec<Rational>> = xi0.into_iter().map(|c| vec![c]).collect();
        let mut log = Vec::new();
        let matrix = self.theta.matrix.to_rational();
        let cap = usize::try_from(needed).unwrap_or(0) + options.iteration_slack;
        let residual_order = loop {
            // One order past the last residual is normally enough to see the
            // next one; widen to the full target when it is not.
            let mut want = log.last().map_or(2, |&prev: &i64| prev + 2).min(needed);
            let (order, residuals) = loop {
                let values = self.theta_map_to(&xi, want)?;
                let mut order = i64::MAX;
                let mut residuals = Vec::with_capacity(values.len());
                for (row, v) in values.iter().enumerate() {
                    if !v.is_unit() {
                        return Err(LiftError::NonUnit { factor: describe_row(self.theta.layout.row(row)) });
                    }
                    let rho = TSeries::constant(self.target[row].clone(), self.ramification, v.precision()).div(v)?;
                    let dev = &rho - &TSeries::one(self.ramification, rho.precision());
                    order = order.min(dev.order().unwrap_or(dev.precision()));
                    residuals.push(dev);
                }
                let known = residuals.iter().map(TSeries::precision).min().unwrap_or(i64::MAX);
                if order < known || want >= needed {
                    break (order, residuals);
                }
                want = needed;
            };
            if log.last().is_some_and(|&prev| order <= prev) {
                return Err(LiftError::Stalled { order });
            }
            log.push(order);
            if order >= needed {
                break order;
            }
            if log.len() > cap {
                return Err(LiftError::Stalled { order });
            }
            let u: Vec<Rational> = residuals.iter().map(|d| d.coeff(order).expect("within precision")).collect();
            let step = solve_rational(&matrix, &u).ok_or(LiftError::LinearStep { order })?;
            for (poly, x) in xi.iter_mut().zip(&step.particular) {
                if x.is_zero() {
                    continue;
                }
                let k = order as usize;
                if poly.len() <= k {
                    poly.resize(k + 1, Rational::zero());
                }
                let head: Vec<Rational> = poly[..poly.len() - k].to_vec();
                for (i, a) in head.iter().enumerate() {
                    poly[i + k] += a * x;
                }
                poly.truncate(needed as usize);
            }
        };
        Ok(self.package(&xi, residual_order, log))
    }

    fn package(&self, xi: &[Vec<Rational>], residual_order: i64, residual_log: Vec<i64>) -> LiftedMap {
        let e = self.ramification;
        let n = self.problem.rank();
        let tree = self.curve.tree();
        let to_series = |p: &Vec<Rational>| TSeries::from_coeffs(e, 0, p.clone(), residual_order);
        let chi: Vec<Vec<TSeries>> =
            (0..tree.num_vertices()).map(|w| (0..n).map(|k| to_series(&xi[w * n + k])).collect()).collect();
        let alpha: Vec<TSeries> = self.split_xi(xi).iter().map(to_series).collect();
        let alpha_polys: Vec<Vec<Rational>> = self.split_xi(xi).to_vec();
        let coords = self.coordinates(&alpha_polys, residual_order);
        let root = tree.root_end();
        let marked_points = (0..tree.num_ends()).filter(|&i| i != root).map(|i| coords.points[i].clone()).collect();
        let root_vertex = tree.rooted().root_vertex();
        let er = Rational::from_integer(e.into());
        let map_coefficients = (0..n)
            .map(|k| {
                let shift = to_i64(&(&self.curve.position(root_vertex)[k] * &er).to_integer());
                let value = chi[root_vertex][k].shift(shift);
                if self.problem.degree(root)[k] % 2 != 0 { -&value } else { value }
            })
            .collect();
        LiftedMap {
            ramification: e,
            chi,
            alpha,
            beta: self.beta.clone(),
            marked_points,
            map_coefficients,
            residual_order,
            residual_log,
        }
    }

    pub fn lift_all(&self, options: &LiftOptions) -> Result<Vec<LiftedMap>, LiftError> {
        self.initial_solutions()?.into_iter().map(|xi0| self.lift_from(xi0, options)).collect()
    }
}

/// All lifts of `curve`, one per rational solution of the initial step.
pub fn lift(curve: &TropicalCurve, problem: &ProblemSpec, options: &LiftOptions) -> Result<Vec<LiftedMap>, LiftError> {
    Lifter::new(curve, problem, options)?.lift_all(options)
}

fn one_based(ends: &[usize]) -> String {
    let names: Vec<String> = ends.iter().map(|i| format!("{}", i + 1)).collect();
    format!("{{{}}}", names.join(", "))
}

fn describe_row(row: ThetaRow) -> String {
    match row {
        ThetaRow::Edge { edge, coord } => format!("edge factor of bounded edge {edge}, coordinate {coord}"),
        ThetaRow::Constraint { end, row } => format!("constraint factor of end {}, row {row}", end + 1),
        ThetaRow::CrossRatio(i) => format!("cross-ratio factor {}", i + 1),
    }
}

trait ToUsizeChecked {
    fn to_usize_checked(&self) -> Option<usize>;
}

impl ToUsizeChecked for BigInt {
    fn to_usize_checked(&self) -> Option<usize> {
        usize::try_from(self).ok()
    }
}

/// Rational solutions of `z^d = value`.
fn rational_roots(value: &Rational, d: &BigInt) -> Vec<Rational> {
    let Ok(d) = u32::try_from(d) else {
        return Vec::new();
    };
    if d == 1 {
        return vec![value.clone()];
    }
    let exact_root = |x: &BigInt| -> Option<BigInt> {
        let r = x.nth_root(d);
        (num_traits::pow(r.clone(), d as usize) == *x).then_some(r)
    };
    let magnitude = value.abs();
    let (Some(p), Some(q)) = (exact_root(magnitude.numer()), exact_root(magnitude.denom())) else {
        return Vec::new();
    };
    let root = Rational::new(p, q);
    match (d % 2 == 0, value.is_negative()) {
        (true, true) => Vec::new(),
        (true, false) => vec![root.clone(), -root],
        (false, neg) => vec![if neg { -root } else { root }],
    }
}

/// Lengths recovered from a lift: `|γ| = val(A_h) − val(A_t)`, with
/// `A_w = P_b − P_a` for the extreme indices `a, b` of `I_w`.
pub fn tropicalize_lengths(tree: &crate::tree::MarkedTree, lift: &LiftedMap) -> Vec<Option<Rational>> {
    let rs = tree.rooted();
    let root = tree.root_end();
    let point = |i: usize| {
        let idx = if i < root { i } else { i - 1 };
        &lift.marked_points[idx]
    };
    let depth = |w: usize| {
        let set = rs.index_set(w);
        let a = set.trailing_zeros() as usize;
        let b = 63 - set.leading_zeros() as usize;
        (point(b) - point(a)).valuation().finite().cloned()
    };
    (0..tree.num_bounded())
        .map(|j| Some(depth(rs.head(j))? - depth(rs.tail(j))?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::ConstraintInput;
    use crate::rat;
    use crate::tree::MarkedTree;

    #[test]
    fn roots_over_q() {
        assert_eq!(rational_roots(&rat(5), &BigInt::from(1)), vec![rat(5)]);
        assert_eq!(rational_roots(&"9/4".parse().unwrap(), &BigInt::from(2)).len(), 2);
        assert!(rational_roots(&rat(-4), &BigInt::from(2)).is_empty());
        assert!(rational_roots(&rat(2), &BigInt::from(2)).is_empty());
        assert_eq!(rational_roots(&rat(-8), &BigInt::from(3)), vec![rat(-2)]);
    }

    fn star_problem() -> (ProblemSpec, TropicalCurve) {
        let p = ProblemSpec::new(
            2,
            vec![vec![1, 0], vec![0, 1], vec![-1, -1]],
            vec![
                ConstraintInput {
                    end: 0,
                    sublattice: vec![vec![1, 0]],
                    point: vec![rat(0), rat(2)],
                    coefficients: Some(vec![rat(1), rat(3)]),
                },
                ConstraintInput {
                    end: 1,
                    sublattice: vec![vec![0, 1]],
                    point: vec![rat(-1), rat(0)],
                    coefficients: Some(vec![rat(5), rat(1)]),
                },
            ],
            vec![],
        )
        .unwrap();
        let c = TropicalCurve::from_lengths(MarkedTree::star(3).unwrap(), p.degrees().to_vec(), vec![], vec![rat(-1), rat(2)])
            .unwrap();
        (p, c)
    }

    #[test]
    fn exact_start_needs_no_iterations() {
        let (p, c) = star_problem();
        let lifts = lift(&c, &p, &LiftOptions::new(6)).unwrap();
        assert_eq!(lifts.len(), 1);
        let l = &lifts[0];
        assert_eq!(l.iterations(), 0);
        // f(y) = (K_1 y, K_2 (y − 1)) with q_1 = 0, q_2 = 1, q_3 = ∞; the
        // constraint x_2(q_1) = 3t^2 forces K_2 = -3t^2, x_1(q_2) = 5t^{-1}
        // forces K_1 = 5t^{-1}.
        assert_eq!(l.map_coefficients[0].coeff(-1), Some(rat(5)));
        assert_eq!(l.map_coefficients[1].coeff(2), Some(rat(-3)));
        assert!(l.residual_order >= 7);
    }

    fn double_star(c1: i64) -> (ProblemSpec, TropicalCurve) {
        let p = ProblemSpec::new(
            2,
            vec![vec![0, 1], vec![2, -1], vec![-2, 0]],
            vec![
                ConstraintInput {
                    end: 0,
                    sublattice: vec![vec![0, 1]],
                    point: vec![rat(0), rat(0)],
                    coefficients: Some(vec![rat(1), rat(1)]),
                },
                ConstraintInput {
                    end: 1,
                    sublattice: vec![vec![2, -1]],
                    point: vec![rat(0), rat(0)],
                    coefficients: Some(vec![rat(c1), rat(1)]),
                },
            ],
            vec![],
        )
        .unwrap();
        let c = TropicalCurve::from_lengths(MarkedTree::star(3).unwrap(), p.degrees().to_vec(), vec![], vec![rat(0), rat(0)])
            .unwrap();
        (p, c)
    }

    #[test]
    fn square_data_gives_both_roots() {
        let (p, c) = double_star(4);
        let lifter = Lifter::new(&c, &p, &LiftOptions::new(3)).unwrap();
        assert_eq!(lifter.theta().report().m_complex, Some(BigInt::from(2)));
        let mut second: Vec<Rational> =
            lifter.initial_solutions().unwrap().into_iter().map(|xi| xi[1].clone()).collect();
        second.sort();
        assert_eq!(second, vec![rat(-2), rat(2)]);
    }

    #[test]
    fn non_square_data_needs_extension() {
        let (p, c) = double_star(2);
        let err = lift(&c, &p, &LiftOptions::new(3)).unwrap_err();
        assert!(matches!(err, LiftError::FieldExtensionRequired { .. }), "{err:?}");
    }
}
