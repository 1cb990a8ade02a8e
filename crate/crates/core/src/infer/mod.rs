//! Most likely trajectories (I1) and the parameter regions selecting them (I2).

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::algebra::{ln_rational, AlgebraError, FormalPolynomial, Monomial, ProbAssignment, Q};
use crate::geometry::{normal_cone, GeometryError, HalfspaceSystem, NormalCone};
use crate::lang::{check_ground, ChoiceWord, Program, SimpleType, TypeError};
use crate::typesys::{stabilize, Bounds, SearchConfig, SearchError, Stabilization};

pub const REPORT_SCHEMA: &str = "tropinf-report/1";
pub const RELATIVE_NOTE: &str = "relative to explored trajectories";
/// Comparison slack of the probability-space membership test.
pub const MEMBERSHIP_SLACK: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum InferError {
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("target {target} is not a value of type {ty}")]
    Target { target: u64, ty: SimpleType },
    #[error("expected {expected} probabilities, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("monomial {0} is not a selected trajectory")]
    NotSelected(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub window: usize,
    pub max_rounds: usize,
    pub search: SearchConfig,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig { window: 2, max_rounds: 16, search: SearchConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectedTrajectory {
    pub monomial: Monomial,
    pub word: ChoiceWord,
    pub cone: NormalCone,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub target: u64,
    pub polynomial: FormalPolynomial,
    pub degree_estimate: u64,
    pub stable: bool,
    pub schedule: Vec<Bounds>,
    /// Bounds of the round that ran out of budget, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exhausted: Option<Bounds>,
    pub selected: Vec<SelectedTrajectory>,
}

impl AnalysisReport {
    pub fn find(&self, mu: &Monomial) -> Option<&SelectedTrajectory> {
        self.selected.iter().find(|s| &s.monomial == mu)
    }

    /// Number of parameters, when the report is not empty.
    pub fn params(&self) -> Option<usize> {
        self.selected.first().map(|s| s.monomial.dim() / 2)
    }
}

/// Report as written to disk: the analysis plus provenance of the input.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportFile {
    pub schema: String,
    pub tool_version: String,
    pub input_sha256: String,
    #[serde(flatten)]
    pub report: AnalysisReport,
}

impl ReportFile {
    pub fn new(report: AnalysisReport, source: &str) -> Self {
        ReportFile {
            schema: REPORT_SCHEMA.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            input_sha256: hex::encode(Sha256::digest(source.as_bytes())),
            report,
        }
    }
}

fn check_target(prog: &Program, target: u64) -> Result<(), InferError> {
    let ty = check_ground(&prog.term)?.ty;
    if ty == SimpleType::Bool && target > 1 {
        return Err(InferError::Target { target, ty });
    }
    Ok(())
}

/// Full pipeline, also returning the stabilization run it is built from.
pub fn analyze_detailed(
    prog: &Program,
    target: u64,
    config: &AnalysisConfig,
) -> Result<(AnalysisReport, Stabilization), InferError> {
    check_target(prog, target)?;
    let st = stabilize(prog, target, config.window, config.max_rounds, &config.search)?;
    let poly = st.result.poly.clone();
    let mut selected = Vec::new();
    for (mu, word) in &st.result.traces {
        let cone = normal_cone(mu, &poly)?;
        selected.push(SelectedTrajectory { monomial: mu.clone(), word: word.clone(), cone });
    }
    let report = AnalysisReport {
        target,
        degree_estimate: poly.degree(),
        polynomial: poly,
        stable: st.stable,
        schedule: st.schedule.clone(),
        exhausted: st.exhausted,
        selected,
    };
    Ok((report, st))
}

pub fn analyze(prog: &Program, target: u64, config: &AnalysisConfig) -> Result<AnalysisReport, InferError> {
    analyze_detailed(prog, target, config).map(|(r, _)| r)
}

#[derive(Clone, Debug, PartialEq)]
pub struct I1Answer {
    /// `min μ·z`; `+∞` when no trajectory has positive probability.
    pub value: f64,
    /// `exp(-value)`, computed exactly.
    pub probability: Q,
    pub winners: Vec<SelectedTrajectory>,
    pub relative: bool,
}

fn check_arity(report: &AnalysisReport, p: &ProbAssignment) -> Result<(), InferError> {
    match report.params() {
        Some(k) if k != p.params() => Err(InferError::Arity { expected: k, got: p.params() }),
        _ => Ok(()),
    }
}

/// `-ln p^μ` from the exponents, avoiding the loss of a single log of a tiny product.
fn neg_log_weight(p: &ProbAssignment, mu: &Monomial) -> f64 {
    let w = p.weights();
    mu.exponents().iter().zip(&w).filter(|(e, _)| **e > 0).map(|(&e, q)| -(e as f64) * ln_rational(q)).sum()
}

pub fn solve_i1(report: &AnalysisReport, p: &ProbAssignment) -> Result<I1Answer, InferError> {
    check_arity(report, p)?;
    let weights: Vec<Q> = report.selected.iter().map(|s| p.weight(&s.monomial)).collect();
    let best = weights.iter().max().cloned().unwrap_or_else(Q::zero);
    let winners: Vec<SelectedTrajectory> = report
        .selected
        .iter()
        .zip(&weights)
        .filter(|(_, w)| **w == best)
        .map(|(s, _)| s.clone())
        .collect();
    let value = if best.is_zero() { f64::INFINITY } else { neg_log_weight(p, &winners[0].monomial) };
    Ok(I1Answer { value, probability: best, winners, relative: !report.stable })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct I2Answer {
    pub selected: SelectedTrajectory,
    /// The cone with redundant rows removed.
    pub cone: HalfspaceSystem,
    pub relative: bool,
}

impl I2Answer {
    pub fn witness(&self) -> Option<&[Q]> {
        self.selected.cone.witness.as_deref()
    }

    pub fn inequalities(&self) -> Vec<String> {
        self.cone.inequalities()
    }

    /// Whether `z = (-ln p_i, -ln(1-p_i))` lies in the cone.
    pub fn test(&self, p: &ProbAssignment) -> bool {
        self.cone.contains_f64(&p.to_z(), MEMBERSHIP_SLACK)
    }
}

pub fn solve_i2(report: &AnalysisReport, mu: &Monomial) -> Result<I2Answer, InferError> {
    let selected = report.find(mu).ok_or_else(|| InferError::NotSelected(mu.to_string()))?.clone();
    let sys = &selected.cone.system;
    let cone = HalfspaceSystem { dim: sys.dim, rows: sys.irredundant_rows() };
    Ok(I2Answer { selected, cone, relative: !report.stable })
}
