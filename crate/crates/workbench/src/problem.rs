//! The `tropcount-problem/1` JSON format. Ends are numbered from 1 in files;
//! exact rationals are strings such as `"3"` or `"-7/2"`.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tropcount_core::curve::{ConstraintInput, CrossRatio, ProblemSpec};
use tropcount_core::tree::EndSet;
use tropcount_core::Rational;

use crate::error::Failure;

pub const PROBLEM_SCHEMA: &str = "tropcount-problem/1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub schema: String,
    pub rank: usize,
    pub degrees: Vec<Vec<i64>>,
    #[serde(default)]
    pub constraints: Vec<ConstraintEntry>,
    #[serde(default)]
    pub cross_ratios: Vec<CrossRatioEntry>,
    /// Signs of the constraint rows (in end order) followed by the
    /// cross-ratio rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signs: Option<Vec<i8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lift_order: Option<i64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub essential_betas: Vec<BetaEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintEntry {
    pub end: usize,
    /// Generators of `L`; empty for a point constraint.
    #[serde(default)]
    pub sublattice: Vec<Vec<i64>>,
    pub point: Vec<String>,
    /// Leading coefficients of the algebraic constraint, one per coordinate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossRatioEntry {
    pub ends: [usize; 4],
    pub value: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficient: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaEntry {
    /// Ends above the essential edge.
    pub below: Vec<usize>,
    pub value: String,
}

/// A parsed and validated problem.
#[derive(Clone, Debug)]
pub struct Problem {
    pub file: ProblemFile,
    pub spec: ProblemSpec,
    pub signs: Option<Vec<i8>>,
    pub lift_order: Option<i64>,
    pub essential_betas: Vec<(EndSet, Rational)>,
}

pub fn parse_rational(s: &str) -> Result<Rational, Failure> {
    s.trim().parse::<Rational>().map_err(|_| Failure::parse(format!("not an exact rational: {s:?}")))
}

pub fn format_rational(q: &Rational) -> String {
    q.to_string()
}

fn parse_rationals(values: &[String]) -> Result<Vec<Rational>, Failure> {
    values.iter().map(|s| parse_rational(s)).collect()
}

fn zero_based(end: usize, ends: usize, what: &str) -> Result<usize, Failure> {
    if end == 0 || end > ends {
        return Err(Failure::invariant(format!("{what} refers to end {end}, but ends are numbered 1 to {ends}")));
    }
    Ok(end - 1)
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self, Failure> {
        let file: ProblemFile = serde_json::from_str(text).map_err(|e| Failure::parse(e.to_string()))?;
        if file.schema != PROBLEM_SCHEMA {
            return Err(Failure::parse(format!("unsupported schema {:?}, expected {PROBLEM_SCHEMA:?}", file.schema)));
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files serialize") + "\n"
    }

    /// Hex SHA-256 of the compact canonical serialization.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("problem files serialize");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn validate(&self) -> Result<Problem, Failure> {
        let r = self.degrees.len();
        let mut constraints = Vec::with_capacity(self.constraints.len());
        for c in &self.constraints {
            constraints.push(ConstraintInput {
                end: zero_based(c.end, r, "constraint")?,
                sublattice: c.sublattice.clone(),
                point: parse_rationals(&c.point)?,
                coefficients: c.coefficients.as_deref().map(parse_rationals).transpose()?,
            });
        }
        let mut cross = Vec::with_capacity(self.cross_ratios.len());
        for x in &self.cross_ratios {
            let mut ends = [0; 4];
            for (slot, &e) in ends.iter_mut().zip(&x.ends) {
                *slot = zero_based(e, r, "cross-ratio")?;
            }
            let coefficient = match &x.coefficient {
                Some(c) => parse_rational(c)?,
                None => Rational::from_integer(1.into()),
            };
            cross.push(CrossRatio { ends, value: parse_rational(&x.value)?, coefficient });
        }
        let spec = ProblemSpec::new(self.rank, self.degrees.clone(), constraints, cross)?;

        if let Some(signs) = &self.signs {
            check_signs(&spec, signs)?;
        }
        if let Some(order) = self.lift_order {
            if order < 0 {
                return Err(Failure::invariant(format!("lift order must be non-negative, got {order}")));
            }
        }
        let mut essential_betas = Vec::with_capacity(self.essential_betas.len());
        for b in &self.essential_betas {
            let mut set: EndSet = 0;
            for &e in &b.below {
                set |= 1 << zero_based(e, r, "essential β")?;
            }
            essential_betas.push((set, parse_rational(&b.value)?));
        }
        Ok(Problem {
            file: self.clone(),
            spec,
            signs: self.signs.clone(),
            lift_order: self.lift_order,
            essential_betas,
        })
    }

    /// The file describing `spec` with every optional value spelled out.
    pub fn from_spec(spec: &ProblemSpec) -> Self {
        let constraints = spec
            .active_constraints()
            .map(|c| ConstraintEntry {
                end: c.end + 1,
                sublattice: c
                    .sublattice
                    .clone()
                    .into_rows()
                    .into_iter()
                    .map(|row| row.iter().map(|x| i64::try_from(x).expect("generator fits in i64")).collect())
                    .collect(),
                point: c.point.iter().map(format_rational).collect(),
                coefficients: Some(c.coefficients.iter().map(format_rational).collect()),
            })
            .collect();
        let cross_ratios = spec
            .cross_ratios()
            .iter()
            .map(|x| CrossRatioEntry {
                ends: x.ends.map(|e| e + 1),
                value: format_rational(&x.value),
                coefficient: Some(format_rational(&x.coefficient)),
            })
            .collect();
        ProblemFile {
            schema: PROBLEM_SCHEMA.into(),
            rank: spec.rank(),
            degrees: spec.degrees().to_vec(),
            constraints,
            cross_ratios,
            signs: None,
            lift_order: None,
            essential_betas: Vec::new(),
        }
    }
}

/// Number of sign entries a problem takes: one per constraint row, one per
/// cross-ratio.
pub fn sign_count(spec: &ProblemSpec) -> usize {
    spec.total_codim() + spec.cross_ratios().len()
}

pub fn check_signs(spec: &ProblemSpec, signs: &[i8]) -> Result<(), Failure> {
    let expected = sign_count(spec);
    if signs.len() != expected {
        return Err(Failure::invariant(format!("expected {expected} signs, got {}", signs.len())));
    }
    if let Some(s) = signs.iter().find(|&&s| s != 1 && s != -1) {
        return Err(Failure::invariant(format!("signs must be +1 or -1, got {s}")));
    }
    Ok(())
}

/// `positive` or a comma-separated list such as `+1,-1,1`.
pub fn parse_sign_argument(arg: &str, spec: &ProblemSpec) -> Result<Vec<i8>, Failure> {
    if arg.trim() == "positive" {
        return Ok(vec![1; sign_count(spec)]);
    }
    let signs = arg
        .split(',')
        .map(|s| s.trim().trim_start_matches('+').parse::<i8>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| Failure::parse(format!("sign vector must be `positive` or comma-separated ±1 values, got {arg:?}")))?;
    check_signs(spec, &signs)?;
    Ok(signs)
}

pub fn load(text: &str) -> Result<Problem, Failure> {
    ProblemFile::from_json(text)?.validate()
}
