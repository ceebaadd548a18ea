//! The `tropcount-result/1` JSON format.
//!
//! Ends are numbered from 1; vertices and bounded edges keep the 0-based
//! indices of the tree they belong to. Exact numbers are strings.

use serde::{Deserialize, Serialize};
use tropcount_core::enumerate::{AcceptedCurve, EnumerationResult, GenericityViolation};
use tropcount_core::lift::LiftedMap;
use tropcount_core::tree::{end_set_members, EdgeId, EndSet, MarkedTree};

use crate::error::Failure;
use crate::problem::{format_rational, Problem};

pub const RESULT_SCHEMA: &str = "tropcount-result/1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultFile {
    pub schema: String,
    pub tool_version: String,
    pub problem_hash: String,
    pub rank: usize,
    pub degrees: Vec<Vec<i64>>,
    pub types_visited: u128,
    pub tropically_general: bool,
    pub total_complex: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signs: Option<Vec<i8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_real: Option<String>,
    pub curves: Vec<CurveEntry>,
    pub diagnostics: Vec<DiagnosticEntry>,
    pub genericity_violations: Vec<ViolationEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lifts: Option<Vec<LiftEntry>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveEntry {
    /// 1-based position in `curves`.
    pub index: usize,
    /// Sorted splits: the ends on the far side of each bounded edge from the
    /// last end.
    pub key: Vec<Vec<usize>>,
    pub tree: TreeEntry,
    /// Slope of each bounded edge from tail to head.
    pub slopes: Vec<Vec<i64>>,
    pub lengths: Vec<String>,
    pub positions: Vec<Vec<String>>,
    pub multiplicity: String,
    pub divisors: Vec<String>,
    pub epsilon_even: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub real_multiplicity: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeEntry {
    pub vertices: usize,
    /// Vertex carrying each end.
    pub ends: Vec<usize>,
    /// Bounded edges as `[tail, head]`, oriented away from the last end.
    pub edges: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticEntry {
    pub key: Vec<Vec<usize>>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViolationEntry {
    pub curve: usize,
    pub violation: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiftEntry {
    pub curve: usize,
    pub order: i64,
    pub maps: Vec<LiftedMapEntry>,
}

/// Series use the `c*t^(k/e) + ... + O(t^(T/e))` notation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiftedMapEntry {
    pub ramification: u32,
    pub residual_order: i64,
    pub residual_log: Vec<i64>,
    /// `χ_w` on the standard basis, per vertex.
    pub chi: Vec<Vec<String>>,
    /// Per bounded edge.
    pub alpha: Vec<String>,
    pub beta: Vec<BetaValue>,
    /// `y(q_i)` for ends 1 to r − 1; end r sits at infinity.
    pub marked_points: Vec<String>,
    /// The map is `y ↦ (K_k · Π_i (y − y(q_i))^{(n_i)_k})_k`.
    pub map_coefficients: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaValue {
    /// `"end 3"` or `"edge 0"`.
    pub edge: String,
    pub value: String,
}

fn ends_of(set: EndSet) -> Vec<usize> {
    end_set_members(set).map(|i| i + 1).collect()
}

pub fn key_entry(key: &[EndSet]) -> Vec<Vec<usize>> {
    key.iter().map(|&s| ends_of(s)).collect()
}

pub fn tree_entry(tree: &MarkedTree) -> TreeEntry {
    let rs = tree.rooted();
    TreeEntry {
        vertices: tree.num_vertices(),
        ends: tree.end_vertices().to_vec(),
        edges: (0..tree.num_bounded()).map(|j| [rs.tail(j), rs.head(j)]).collect(),
    }
}

fn describe_edge(e: EdgeId) -> String {
    match e {
        EdgeId::End(i) => format!("end {}", i + 1),
        EdgeId::Bounded(j) => format!("edge {j}"),
    }
}

pub fn describe_violation(v: &GenericityViolation) -> String {
    match v {
        GenericityViolation::CoincidentVertices { first, second } => {
            format!("vertices {first} and {second} have the same image")
        }
        GenericityViolation::VertexOnEdge { vertex, edge } => {
            format!("vertex {vertex} lies on the image of {}", describe_edge(*edge))
        }
        GenericityViolation::ContractedValence { vertex, count } => {
            format!("vertex {vertex} carries {count} contracted edges")
        }
    }
}

fn curve_entry(index: usize, c: &AcceptedCurve, signs: Option<&[i8]>) -> Result<CurveEntry, Failure> {
    let curve = &c.curve;
    let real_multiplicity = match signs {
        Some(s) => Some(c.theta.real_multiplicity(s)?.to_string()),
        None => None,
    };
    Ok(CurveEntry {
        index,
        key: key_entry(&c.key),
        tree: tree_entry(curve.tree()),
        slopes: curve.slopes().to_vec(),
        lengths: curve.lengths().iter().map(format_rational).collect(),
        positions: curve.positions().iter().map(|p| p.iter().map(format_rational).collect()).collect(),
        multiplicity: c.multiplicity().to_string(),
        divisors: c.report.divisors.iter().map(ToString::to_string).collect(),
        epsilon_even: c.report.epsilon_even,
        real_multiplicity,
    })
}

pub fn lifted_map_entry(l: &LiftedMap) -> LiftedMapEntry {
    LiftedMapEntry {
        ramification: l.ramification,
        residual_order: l.residual_order,
        residual_log: l.residual_log.clone(),
        chi: l.chi.iter().map(|w| w.iter().map(ToString::to_string).collect()).collect(),
        alpha: l.alpha.iter().map(ToString::to_string).collect(),
        beta: l.beta.iter().map(|(e, v)| BetaValue { edge: describe_edge(*e), value: format_rational(v) }).collect(),
        marked_points: l.marked_points.iter().map(ToString::to_string).collect(),
        map_coefficients: l.map_coefficients.iter().map(ToString::to_string).collect(),
    }
}

impl ResultFile {
    pub fn build(problem: &Problem, result: &EnumerationResult, signs: Option<&[i8]>) -> Result<Self, Failure> {
        let curves = result
            .curves
            .iter()
            .enumerate()
            .map(|(i, c)| curve_entry(i + 1, c, signs))
            .collect::<Result<Vec<_>, _>>()?;
        let total_real = match signs {
            Some(s) => Some(result.total_real(s)?.to_string()),
            None => None,
        };
        let diagnostics = result
            .diagnostics
            .iter()
            .map(|d| DiagnosticEntry { key: key_entry(&d.key), reason: d.reason.as_str().into() })
            .collect();
        let genericity_violations = crate::pipeline::genericity_violations(result)
            .into_iter()
            .map(|(curve, v)| ViolationEntry { curve, violation: describe_violation(&v) })
            .collect();
        Ok(ResultFile {
            schema: RESULT_SCHEMA.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            problem_hash: problem.file.hash(),
            rank: problem.spec.rank(),
            degrees: problem.spec.degrees().to_vec(),
            types_visited: result.types_visited,
            tropically_general: result.tropically_general,
            total_complex: result.total_complex().to_string(),
            signs: signs.map(<[i8]>::to_vec),
            total_real,
            curves,
            diagnostics,
            genericity_violations,
            lifts: None,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, Failure> {
        let file: ResultFile = serde_json::from_str(text).map_err(|e| Failure::parse(e.to_string()))?;
        if file.schema != RESULT_SCHEMA {
            return Err(Failure::parse(format!("unsupported schema {:?}, expected {RESULT_SCHEMA:?}", file.schema)));
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result files serialize") + "\n"
    }
}
