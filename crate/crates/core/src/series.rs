//! Truncated t-adic series with rational coefficients.
//!
//! A series lives in `ℚ((π))` with `π = t^{1/e}` for a fixed ramification
//! index `e`; exponents are stored as integers in units of `1/e`. Every
//! series knows its precision `T`: coefficients of `π^k` with `k ≥ T` are
//! unknown. Arithmetic never claims more precision than the inputs support.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::{self, Write};
use core::ops::{Add, Mul, Neg, Sub};
use core::str::FromStr;
use alloc::format;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("series vanishes to precision O(t^({precision}/{ramification})) and cannot be inverted")]
    Vanishes { precision: i64, ramification: u32 },
}

/// Valuation of a truncated series.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Valuation {
    Finite(Rational),
    /// All known coefficients are zero; the true valuation is at least this.
    AtLeast(Rational),
}

impl Valuation {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::AtLeast(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TSeries {
    ramification: u32,
    /// Exponent of `coeffs[0]`; meaningless when `coeffs` is empty.
    offset: i64,
    /// Dense coefficients; first and last are nonzero.
    coeffs: Vec<Rational>,
    precision: i64,
}

impl TSeries {
    /// `Σ coeffs[k] π^{offset + k} + O(π^precision)`; coefficients at or
    /// beyond `precision` are dropped.
    pub fn from_coeffs(ramification: u32, offset: i64, coeffs: Vec<Rational>, precision: i64) -> Self {
        assert!(ramification > 0, "ramification index must be positive");
        let mut s = TSeries { ramification, offset, coeffs, precision };
        s.normalize();
        s
    }

    pub fn zero(ramification: u32, precision: i64) -> Self {
        TSeries::from_coeffs(ramification, 0, Vec::new(), precision)
    }

    pub fn constant(c: Rational, ramification: u32, precision: i64) -> Self {
        TSeries::from_coeffs(ramification, 0, vec![c], precision)
    }

    pub fn one(ramification: u32, precision: i64) -> Self {
        TSeries::constant(Rational::one(), ramification, precision)
    }

    /// `c·π^exponent`.
    pub fn monomial(c: Rational, exponent: i64, ramification: u32, precision: i64) -> Self {
        TSeries::from_coeffs(ramification, exponent, vec![c], precision)
    }

    fn normalize(&mut self) {
        let keep = (self.precision - self.offset).clamp(0, self.coeffs.len() as i64) as usize;
        self.coeffs.truncate(keep);
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.offset += lead as i64;
        }
        if self.coeffs.is_empty() {
            self.offset = 0;
        }
    }

    pub fn ramification(&self) -> u32 {
        self.ramification
    }

    /// Exponents `≥ precision` (in units of `1/e`) are unknown.
    pub fn precision(&self) -> i64 {
        self.precision
    }

    /// Coefficient of `π^k`, or `None` if `k` is beyond the precision.
    pub fn coeff(&self, k: i64) -> Option<Rational> {
        if k >= self.precision {
            return None;
        }
        let i = k - self.offset;
        if self.coeffs.is_empty() || i < 0 || i >= self.coeffs.len() as i64 {
            return Some(Rational::zero());
        }
        Some(self.coeffs[i as usize].clone())
    }

    /// `(exponent, coefficient)` for every nonzero known term.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &Rational)> {
        self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (self.offset + i as i64, c))
    }

    /// Exponent of the leading term in units of `1/e`.
    pub fn order(&self) -> Option<i64> {
        (!self.coeffs.is_empty()).then_some(self.offset)
    }

    /// Lower bound on the order: the order itself, or the precision when
    /// nothing nonzero is known.
    fn order_bound(&self) -> i64 {
        self.order().unwrap_or(self.precision)
    }

    pub fn leading_coefficient(&self) -> Option<&Rational> {
        self.coeffs.first()
    }

    pub fn valuation(&self) -> Valuation {
        let e = Rational::from_integer(BigInt::from(self.ramification));
        match self.order() {
            Some(k) => Valuation::Finite(Rational::from_integer(k.into()) / e),
            None => Valuation::AtLeast(Rational::from_integer(self.precision.into()) / e),
        }
    }

    pub fn is_unit(&self) -> bool {
        self.order() == Some(0)
    }

    /// Known to vanish up to the precision.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn with_precision(&self, precision: i64) -> Self {
        TSeries::from_coeffs(self.ramification, self.offset, self.coeffs.clone(), precision.min(self.precision))
    }

    /// Multiplication by `π^k`.
    pub fn shift(&self, k: i64) -> Self {
        TSeries {
            ramification: self.ramification,
            offset: if self.coeffs.is_empty() { 0 } else { self.offset + k },
            coeffs: self.coeffs.clone(),
            precision: self.precision.saturating_add(k),
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let coeffs = self.coeffs.iter().map(|x| x * c).collect();
        TSeries::from_coeffs(self.ramification, self.offset, coeffs, self.precision)
    }

    fn check_compatible(&self, other: &Self) {
        assert_eq!(self.ramification, other.ramification, "series with different ramification indices");
    }

    pub fn invert(&self) -> Result<Self, SeriesError> {
        let Some(v) = self.order() else {
            return Err(SeriesError::Vanishes { precision: self.precision, ramification: self.ramification });
        };
        // self = π^v·u with u known to precision T − v; 1/self = π^{-v}/u.
        let n = (self.precision - 2 * v).saturating_sub(-v).max(0) as usize;
        // With c = C/D over integers, 1/c has coefficients D·N_k / C_0^{k+1}
        // where N_k = −Σ_{i≥1} C_i·C_0^{i−1}·N_{k−i}.
        if n == 0 {
            return Ok(TSeries::zero(self.ramification, self.precision - 2 * v));
        }
        let (ints, denom) = integer_coefficients(&self.coeffs[..self.coeffs.len().min(n)]);
        let c0 = &ints[0];
        let mut weighted: Vec<BigInt> = Vec::with_capacity(ints.len());
        let mut power = BigInt::one();
        for c in ints.iter().skip(1) {
            weighted.push(c * &power);
            power *= c0;
        }
        let mut numer: Vec<BigInt> = Vec::with_capacity(n);
        let mut inv: Vec<Rational> = Vec::with_capacity(n);
        let mut c0_power = c0.clone();
        for k in 0..n {
            let value = if k == 0 {
                BigInt::one()
            } else {
                let mut acc = BigInt::zero();
                for i in 1..=k.min(weighted.len()) {
                    acc += &weighted[i - 1] * &numer[k - i];
                }
                -acc
            };
            inv.push(Rational::new(&value * &denom, c0_power.clone()));
            numer.push(value);
            c0_power *= c0;
        }
        Ok(TSeries::from_coeffs(self.ramification, -v, inv, self.precision - 2 * v))
    }

    pub fn div(&self, other: &Self) -> Result<Self, SeriesError> {
        Ok(self * &other.invert()?)
    }

    /// Integer power; negative exponents invert first.
    pub fn pow(&self, k: i64) -> Result<Self, SeriesError> {
        if k < 0 {
            return self.invert()?.pow(-k);
        }
        let mut result = TSeries::one(self.ramification, i64::MAX);
        let mut base = self.clone();
        let mut k = k as u64;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        if result.precision == i64::MAX {
            // k == 0: the empty product is exactly 1, known as well as self.
            result.precision = self.precision.max(0);
        }
        Ok(result)
    }
}

/// Integers `C_i` and `D` with `coeffs[i] = C_i / D`.
fn integer_coefficients(coeffs: &[Rational]) -> (Vec<BigInt>, BigInt) {
    let denom = coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints = coeffs.iter().map(|c| c.numer() * (&denom / c.denom())).collect();
    (ints, denom)
}

impl Add for &TSeries {
    type Output = TSeries;

    fn add(self, other: &TSeries) -> TSeries {
        self.check_compatible(other);
        let precision = self.precision.min(other.precision);
        if self.coeffs.is_empty() {
            return other.with_precision(precision);
        }
        if other.coeffs.is_empty() {
            return self.with_precision(precision);
        }
        let lo = self.offset.min(other.offset);
        let hi = (self.offset + self.coeffs.len() as i64).max(other.offset + other.coeffs.len() as i64).min(precision);
        let mut coeffs = vec![Rational::zero(); (hi - lo).max(0) as usize];
        for s in [self, other] {
            for (i, c) in s.coeffs.iter().enumerate() {
                let k = s.offset + i as i64 - lo;
                if (k as usize) < coeffs.len() {
                    coeffs[k as usize] += c;
                }
            }
        }
        TSeries::from_coeffs(self.ramification, lo, coeffs, precision)
    }
}

impl Neg for &TSeries {
    type Output = TSeries;

    fn neg(self) -> TSeries {
        TSeries { coeffs: self.coeffs.iter().map(|c| -c).collect(), ..self.clone() }
    }
}

impl Sub for &TSeries {
    type Output = TSeries;

    fn sub(self, other: &TSeries) -> TSeries {
        self + &(-other)
    }
}

impl Mul for &TSeries {
    type Output = TSeries;

    fn mul(self, other: &TSeries) -> TSeries {
        self.check_compatible(other);
        let (va, vb) = (self.order_bound(), other.order_bound());
        let precision = va.saturating_add(other.precision).min(vb.saturating_add(self.precision));
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return TSeries::zero(self.ramification, precision);
        }
        let offset = va + vb;
        let len = ((self.coeffs.len() + other.coeffs.len() - 1) as i64).min((precision - offset).max(0)) as usize;
        let (a, da) = integer_coefficients(&self.coeffs[..self.coeffs.len().min(len)]);
        let (b, db) = integer_coefficients(&other.coeffs[..other.coeffs.len().min(len)]);
        let mut acc = vec![BigInt::zero(); len];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate().take(len - i) {
                if !y.is_zero() {
                    acc[i + j] += x * y;
                }
            }
        }
        let denom = da * db;
        let coeffs = acc.into_iter().map(|c| Rational::new(c, denom.clone())).collect();
        TSeries::from_coeffs(self.ramification, offset, coeffs, precision)
    }
}

impl Mul<&Rational> for &TSeries {
    type Output = TSeries;

    fn mul(self, c: &Rational) -> TSeries {
        self.scale(c)
    }
}

impl fmt::Display for TSeries {
    /// `c0*t^(a0/e) + c1*t^(a1/e) + O(t^(T/e))`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = self.ramification;
        let mut out = String::new();
        for (k, c) in self.terms() {
            if !out.is_empty() {
                out.push_str(" + ");
            }
            if c.is_integer() || c.is_negative() {
                write!(out, "{c}*t^({k}/{e})")?;
            } else {
                write!(out, "({c})*t^({k}/{e})")?;
            }
        }
        if !out.is_empty() {
            out.push_str(" + ");
        }
        write!(out, "O(t^({}/{e}))", self.precision)?;
        f.write_str(&out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("malformed series term {0:?}")]
pub struct ParseSeriesError(pub String);

impl FromStr for TSeries {
    type Err = ParseSeriesError;

    /// Inverse of the `Display` format.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |t: &str| ParseSeriesError(t.into());
        let exponent = |t: &str| -> Option<(i64, u32)> {
            let (k, e) = t.strip_prefix("t^(")?.strip_suffix(')')?.split_once('/')?;
            Some((k.parse().ok()?, e.parse().ok()?))
        };
        let mut terms = Vec::new();
        let mut tail = None;
        for piece in s.trim().split(" + ") {
            if let Some(inner) = piece.strip_prefix("O(").and_then(|p| p.strip_suffix(')')) {
                tail = Some(exponent(inner).ok_or_else(|| bad(piece))?);
                continue;
            }
            if tail.is_some() {
                return Err(bad(piece));
            }
            let (c, t) = piece.split_once("*t^").ok_or_else(|| bad(piece))?;
            let c = c.strip_prefix('(').and_then(|c| c.strip_suffix(')')).unwrap_or(c);
            let c: Rational = c.parse().map_err(|_| bad(piece))?;
            let (k, e) = exponent(&format!("t^{t}")).ok_or_else(|| bad(piece))?;
            terms.push((k, e, c));
        }
        let (precision, e) = tail.ok_or_else(|| bad(s))?;
        if e == 0 || terms.iter().any(|&(k, te, _)| te != e || k >= precision) {
            return Err(bad(s));
        }
        if terms.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(bad(s));
        }
        let Some(&(offset, _, _)) = terms.first() else {
            return Ok(TSeries::zero(e, precision));
        };
        let last = terms.last().map_or(offset, |t| t.0);
        let mut coeffs = vec![Rational::zero(); (last - offset + 1) as usize];
        for (k, _, c) in terms {
            coeffs[(k - offset) as usize] = c;
        }
        Ok(TSeries::from_coeffs(e, offset, coeffs, precision))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;
    use alloc::string::ToString;
    use proptest::prelude::*;

    fn poly(e: u32, offset: i64, c: &[i64], precision: i64) -> TSeries {
        TSeries::from_coeffs(e, offset, c.iter().map(|&x| rat(x)).collect(), precision)
    }

    #[test]
    fn difference_of_squares() {
        let a = poly(1, 0, &[1, 1], 10);
        let b = poly(1, 0, &[1, -1], 10);
        assert_eq!(&a * &b, poly(1, 0, &[1, 0, -1], 10));
    }

    #[test]
    fn geometric_series() {
        let inv = poly(1, 0, &[1, 1], 6).invert().unwrap();
        assert_eq!(inv, poly(1, 0, &[1, -1, 1, -1, 1, -1], 6));
        let inv = poly(1, 2, &[1, 1], 6).invert().unwrap();
        assert_eq!(inv.precision(), 2);
        assert_eq!(inv, poly(1, -2, &[1, -1, 1, -1], 2));
    }

    #[test]
    fn valuations() {
        assert_eq!(poly(2, 5, &[1], 10).valuation(), Valuation::Finite("5/2".parse().unwrap()));
        assert_eq!(TSeries::zero(1, 4).valuation(), Valuation::AtLeast(rat(4)));
        assert_eq!(poly(1, 2, &[3, 1], 8).valuation(), Valuation::Finite(rat(2)));
        assert!(poly(1, 0, &[2, 1], 8).is_unit());
        assert!(matches!(TSeries::zero(1, 4).invert(), Err(SeriesError::Vanishes { .. })));
    }

    #[test]
    fn precision_tracking() {
        let a = poly(1, 0, &[1, 2], 5);
        let b = poly(1, 3, &[1], 4);
        // a·b known to min(0 + 4, 3 + 5)
        assert_eq!((&a * &b).precision(), 4);
        assert_eq!((&a + &b).precision(), 4);
        assert_eq!(a.shift(2).precision(), 7);
        assert_eq!(poly(1, 0, &[1, 1], 6).pow(-2).unwrap(), poly(1, 0, &[1, -2, 3, -4, 5, -6], 6));
        assert_eq!(a.pow(0).unwrap(), TSeries::one(1, 5));
        let cancelled = &a - &a;
        assert!(cancelled.is_zero());
        assert_eq!(cancelled.precision(), 5);
    }

    #[test]
    fn display_format() {
        let s = TSeries::from_coeffs(2, -1, vec![rat(3), rat(0), "1/2".parse().unwrap(), rat(-1)], 4);
        assert_eq!(s.to_string(), "3*t^(-1/2) + (1/2)*t^(1/2) + -1*t^(2/2) + O(t^(4/2))");
        assert_eq!(TSeries::zero(1, 3).to_string(), "O(t^(3/1))");
        assert!("1*t^(0/1) + O(t^(0/1))".parse::<TSeries>().is_err());
        assert!("1*t^(0/2) + O(t^(3/1))".parse::<TSeries>().is_err());
        assert!("O(t^(3/1)) + 1*t^(0/1)".parse::<TSeries>().is_err());
    }

    fn series() -> impl Strategy<Value = TSeries> {
        (-3i64..=3, proptest::collection::vec(-4i64..=4, 0..6), 4i64..=12)
            .prop_map(|(off, c, extra)| poly(2, off, &c, off + extra))
    }

    proptest! {
        #[test]
        fn display_round_trips(a in series()) {
            let back: TSeries = a.to_string().parse().unwrap();
            prop_assert_eq!(back, a);
        }

        #[test]
        fn valuation_is_additive(a in series(), b in series()) {
            let p = &a * &b;
            if let (Some(x), Some(y)) = (a.order(), b.order()) {
                prop_assert_eq!(p.order(), Some(x + y));
            }
        }

        #[test]
        fn ultrametric(a in series(), b in series()) {
            let s = &a + &b;
            if let (Some(x), Some(y)) = (a.order(), b.order()) {
                let m = x.min(y);
                if m < s.precision() {
                    prop_assert!(s.order().is_none_or(|v| v >= m));
                    if x != y {
                        prop_assert_eq!(s.order(), Some(m));
                    }
                }
            }
        }

        #[test]
        fn inverse_times_self_is_one(a in series()) {
            if let Ok(inv) = a.invert() {
                let p = &a * &inv;
                prop_assert_eq!(p.precision(), a.precision() - a.order().unwrap());
                let one = TSeries::one(2, p.precision());
                prop_assert_eq!(p, one);
            }
        }

        #[test]
        fn mul_commutes_and_distributes(a in series(), b in series(), c in series()) {
            prop_assert_eq!(&a * &b, &b * &a);
            let lhs = &a * &(&b + &c);
            let rhs = &(&a * &b) + &(&a * &c);
            let prec = lhs.precision().min(rhs.precision());
            prop_assert_eq!(lhs.with_precision(prec), rhs.with_precision(prec));
        }
    }
}
