//! Counting rational tropical curves through toric and cross-ratio constraints.
//!
//! The crate enumerates parameterized rational tropical curves satisfying
//! affine constraints on their marked ends and tropical cross-ratio
//! constraints, attaches complex and real multiplicities through the Smith
//! normal form of the deformation map, and lifts each tropical solution to an
//! algebraic stable map over truncated t-adic series.
//!
//! Everything is exact: integers and rationals are arbitrary precision and no
//! floating point is used anywhere. The crate is `no_std` and only needs
//! `alloc`; file formats, the command line and rendering live in the
//! `tropcount` companion crate.
//!
//! Module map:
//!
//! * [`linalg`] integer/rational matrices, Smith normal form, exact solving.
//! * [`tree`] trees with ordered ends, trivalent enumeration and the rooted
//!   combinatorics (ι, `E_w⁺`, `I_w`, essential edges).
//! * [`curve`] problem data, tropical curves, cross-ratios.
//! * [`theta`] the deformation map θ and multiplicities.
//! * [`enumerate`] the full enumeration pipeline and genericity checks.
//! * [`series`] truncated t-adic series with ramification.
//! * [`lift`] coordinates, the map Θ and order-by-order lifting.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod curve;
pub mod enumerate;
pub mod lift;
pub mod linalg;
pub mod series;
pub mod theta;
pub mod tree;

pub use num_bigint::BigInt;

/// Exact rational number in lowest terms with positive denominator.
pub type Rational = num_rational::BigRational;

/// Integer vector in the lattice `N = ℤⁿ` (degrees, slopes).
pub type LatticeVector = alloc::vec::Vec<i64>;

pub(crate) fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}
