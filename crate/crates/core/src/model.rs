//! Problem data, association matrices, the sum-rate objective and constraint
//! checking.
//!
//! A [`ProblemInstance`] carries per-pair rates `r_ij`, demanded bandwidths
//! `b_ij` and SINR values together with the resource [`Limits`]. Every solver in
//! the crate consumes an instance and produces a [`Solution`] whose assignment
//! can be audited with [`check_feasible`].

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative tolerance used for all rate and bandwidth comparisons.
pub const REL_TOL: f64 = 1e-9;

/// `value <= limit` up to [`REL_TOL`] relative to the limit.
#[inline]
pub(crate) fn fits(value: f64, limit: f64) -> bool {
    value <= limit + REL_TOL * limit.abs().max(1.0)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("ragged matrix: row {row} has {len} columns, expected {expected}")]
    Ragged { row: usize, len: usize, expected: usize },
    #[error("invalid {what} at ({row}, {col}): {value}")]
    InvalidEntry {
        what: &'static str,
        row: usize,
        col: usize,
        value: f64,
    },
    #[error("invalid limits: {0}")]
    InvalidLimits(String),
    #[error("degenerate link ({row}, {col}): SINR {sinr} gives no spectral efficiency")]
    DegenerateLink { row: usize, col: usize, sinr: f64 },
}

/// Dense row-major matrix. Rows index SCs, columns index NFPs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<Vec<f64>>", try_from = "Vec<Vec<f64>>")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * m);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != m {
                return Err(ModelError::Ragged {
                    row: i,
                    len: row.len(),
                    expected: m,
                });
            }
            data.extend(row);
        }
        Ok(Self {
            rows: n,
            cols: m,
            data,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }
}

impl From<Matrix> for Vec<Vec<f64>> {
    fn from(m: Matrix) -> Self {
        m.to_rows()
    }
}

impl TryFrom<Vec<Vec<f64>>> for Matrix {
    type Error = ModelError;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self, Self::Error> {
        Matrix::from_rows(rows)
    }
}

/// Resource limits of one association problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Limits {
    /// Backhaul rate cap `R`, bps.
    pub backhaul_rate: f64,
    /// Per-NFP bandwidth `B_j`, Hz.
    pub nfp_bandwidth: Vec<f64>,
    /// Per-NFP link count `N_l_j`.
    pub nfp_links: Vec<usize>,
    /// Minimum SINR, linear ratio.
    pub sinr_min: f64,
}

impl Limits {
    /// Identical bandwidth and link limits on every NFP.
    pub fn uniform(n_d: usize, backhaul_rate: f64, bandwidth: f64, links: usize, sinr_min: f64) -> Self {
        Self {
            backhaul_rate,
            nfp_bandwidth: vec![bandwidth; n_d],
            nfp_links: vec![links; n_d],
            sinr_min,
        }
    }

    fn validate(&self, n_d: usize) -> Result<(), ModelError> {
        if self.nfp_bandwidth.len() != n_d || self.nfp_links.len() != n_d {
            return Err(ModelError::InvalidLimits(format!(
                "expected {n_d} per-NFP limits, got {} bandwidths and {} link counts",
                self.nfp_bandwidth.len(),
                self.nfp_links.len()
            )));
        }
        if self.backhaul_rate.is_nan() || self.backhaul_rate < 0.0 {
            return Err(ModelError::InvalidLimits(format!(
                "backhaul rate {} must be nonnegative",
                self.backhaul_rate
            )));
        }
        if let Some(b) = self.nfp_bandwidth.iter().find(|b| b.is_nan() || **b < 0.0) {
            return Err(ModelError::InvalidLimits(format!("bandwidth {b} must be nonnegative")));
        }
        if self.sinr_min < 0.0 || !self.sinr_min.is_finite() {
            return Err(ModelError::InvalidLimits(format!(
                "SINR threshold {} must be a finite nonnegative ratio",
                self.sinr_min
            )));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct RawInstance {
    rates: Matrix,
    bandwidths: Matrix,
    sinr: Matrix,
    limits: Limits,
}

/// Full input of every solver: per-pair rate, bandwidth and SINR plus limits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance", into = "RawInstance")]
pub struct ProblemInstance {
    rates: Matrix,
    bandwidths: Matrix,
    sinr: Matrix,
    limits: Limits,
}

impl TryFrom<RawInstance> for ProblemInstance {
    type Error = ModelError;

    fn try_from(raw: RawInstance) -> Result<Self, Self::Error> {
        ProblemInstance::new(raw.rates, raw.bandwidths, raw.sinr, raw.limits)
    }
}

impl From<ProblemInstance> for RawInstance {
    fn from(p: ProblemInstance) -> Self {
        RawInstance {
            rates: p.rates,
            bandwidths: p.bandwidths,
            sinr: p.sinr,
            limits: p.limits,
        }
    }
}

impl ProblemInstance {
    pub fn new(rates: Matrix, bandwidths: Matrix, sinr: Matrix, limits: Limits) -> Result<Self, ModelError> {
        let shape = rates.shape();
        for m in [&bandwidths, &sinr] {
            if m.shape() != shape {
                return Err(ModelError::ShapeMismatch {
                    expected: shape,
                    actual: m.shape(),
                });
            }
        }
        limits.validate(shape.1)?;
        for i in 0..shape.0 {
            for j in 0..shape.1 {
                let r = rates.get(i, j);
                if !r.is_finite() || r < 0.0 {
                    return Err(ModelError::InvalidEntry { what: "rate", row: i, col: j, value: r });
                }
                let b = bandwidths.get(i, j);
                if !b.is_finite() || b < 0.0 || (b == 0.0 && r > 0.0) {
                    return Err(ModelError::InvalidEntry { what: "bandwidth", row: i, col: j, value: b });
                }
                let s = sinr.get(i, j);
                if !s.is_finite() || s < 0.0 {
                    return Err(ModelError::InvalidEntry { what: "sinr", row: i, col: j, value: s });
                }
            }
        }
        Ok(Self {
            rates,
            bandwidths,
            sinr,
            limits,
        })
    }

    /// Derives `b_ij = r_ij / log2(1 + SINR_ij)`.
    pub fn from_sinr(rates: Matrix, sinr: Matrix, limits: Limits) -> Result<Self, ModelError> {
        if sinr.shape() != rates.shape() {
            return Err(ModelError::ShapeMismatch {
                expected: rates.shape(),
                actual: sinr.shape(),
            });
        }
        let mut bandwidths = Matrix::zeros(rates.rows(), rates.cols());
        for i in 0..rates.rows() {
            for j in 0..rates.cols() {
                let s = sinr.get(i, j);
                let efficiency = (1.0 + s).log2();
                if s.is_nan() || s <= 0.0 || efficiency <= 0.0 || !efficiency.is_finite() {
                    return Err(ModelError::DegenerateLink { row: i, col: j, sinr: s });
                }
                bandwidths.set(i, j, rates.get(i, j) / efficiency);
            }
        }
        Self::new(rates, bandwidths, sinr, limits)
    }

    /// Same matrices under different limits.
    pub fn with_limits(&self, limits: Limits) -> Result<Self, ModelError> {
        limits.validate(self.n_d())?;
        Ok(Self {
            limits,
            ..self.clone()
        })
    }

    #[inline]
    pub fn n_sc(&self) -> usize {
        self.rates.rows()
    }

    #[inline]
    pub fn n_d(&self) -> usize {
        self.rates.cols()
    }

    #[inline]
    pub fn rate(&self, i: usize, j: usize) -> f64 {
        self.rates.get(i, j)
    }

    #[inline]
    pub fn bandwidth(&self, i: usize, j: usize) -> f64 {
        self.bandwidths.get(i, j)
    }

    #[inline]
    pub fn sinr(&self, i: usize, j: usize) -> f64 {
        self.sinr.get(i, j)
    }

    pub fn rates(&self) -> &Matrix {
        &self.rates
    }

    pub fn bandwidths(&self) -> &Matrix {
        &self.bandwidths
    }

    pub fn sinr_matrix(&self) -> &Matrix {
        &self.sinr
    }

    pub fn limits(&self) -> &Limits {
        &self.limits
    }

    /// Pair passes the minimum-SINR QoS requirement.
    #[inline]
    pub fn qos_ok(&self, i: usize, j: usize) -> bool {
        self.sinr.get(i, j) >= self.limits.sinr_min
    }

    /// Greedy priority `r_ij / b_ij`.
    #[inline]
    pub fn decision_ratio(&self, i: usize, j: usize) -> f64 {
        let b = self.bandwidths.get(i, j);
        if b > 0.0 {
            self.rates.get(i, j) / b
        } else {
            0.0
        }
    }

    /// Common divisor of all rates on QoS-feasible pairs when every such rate is
    /// a whole number of bps. Any binary assignment then has an objective that
    /// is a multiple of it, which lets branch-and-bound round bounds down.
    pub fn rate_granularity(&self) -> Option<f64> {
        const EXACT: f64 = 9_007_199_254_740_992.0; // 2^53
        let mut g: u64 = 0;
        for i in 0..self.n_sc() {
            for j in 0..self.n_d() {
                if !self.qos_ok(i, j) {
                    continue;
                }
                let r = self.rate(i, j);
                if r.fract() != 0.0 || r >= EXACT {
                    return None;
                }
                g = gcd(g, r as u64);
            }
        }
        (g > 0).then_some(g as f64)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssignmentMode {
    Binary,
    Fractional,
}

/// `N_SC × N_D` association variables.
///
/// The entry domain is enforced on construction ({0,1} or [0,1]); row sums are
/// left to [`check_feasible`] so that infeasible matrices can still be audited.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssociationMatrix {
    entries: Matrix,
    mode: AssignmentMode,
}

impl AssociationMatrix {
    pub fn zeros(n_sc: usize, n_d: usize, mode: AssignmentMode) -> Self {
        Self {
            entries: Matrix::zeros(n_sc, n_d),
            mode,
        }
    }

    pub fn new(entries: Matrix, mode: AssignmentMode) -> Result<Self, ModelError> {
        for i in 0..entries.rows() {
            for j in 0..entries.cols() {
                let v = entries.get(i, j);
                let ok = match mode {
                    AssignmentMode::Binary => v == 0.0 || v == 1.0,
                    AssignmentMode::Fractional => (0.0..=1.0).contains(&v),
                };
                if !ok {
                    return Err(ModelError::InvalidEntry {
                        what: "association",
                        row: i,
                        col: j,
                        value: v,
                    });
                }
            }
        }
        Ok(Self { entries, mode })
    }

    /// Binary matrix from one optional NFP choice per SC.
    pub fn from_choices(n_d: usize, choices: &[Option<usize>]) -> Self {
        let mut entries = Matrix::zeros(choices.len(), n_d);
        for (i, c) in choices.iter().enumerate() {
            if let Some(j) = *c {
                entries.set(i, j, 1.0);
            }
        }
        Self {
            entries,
            mode: AssignmentMode::Binary,
        }
    }

    pub fn mode(&self) -> AssignmentMode {
        self.mode
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries.get(i, j)
    }

    pub fn shape(&self) -> (usize, usize) {
        self.entries.shape()
    }

    /// First NFP with a unit entry per row (binary reading).
    pub fn choices(&self) -> Vec<Option<usize>> {
        (0..self.entries.rows())
            .map(|i| self.entries.row(i).iter().position(|&v| v >= 0.5))
            .collect()
    }

    /// Rows with any positive entry.
    pub fn associated_count(&self) -> usize {
        (0..self.entries.rows())
            .filter(|&i| self.entries.row(i).iter().any(|&v| v > REL_TOL))
            .count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    /// Heuristic result, no optimality claim.
    Heuristic,
    /// Search stopped at the node cap; the value is the best incumbent.
    NodeBudgetExceeded,
}

/// Assignment plus derived usage and solver metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub assignment: AssociationMatrix,
    pub sum_rate: f64,
    pub per_nfp_bandwidth_used: Vec<f64>,
    pub per_nfp_links_used: Vec<usize>,
    pub solver_name: String,
    /// Seconds.
    pub wall_time: f64,
    pub nodes_explored: u64,
    pub status: SolveStatus,
}

impl Solution {
    /// Builds a binary solution and computes its usage fields.
    pub fn from_choices(
        instance: &ProblemInstance,
        choices: &[Option<usize>],
        solver_name: &str,
        wall_time: f64,
        nodes_explored: u64,
        status: SolveStatus,
    ) -> Self {
        let n_d = instance.n_d();
        let mut bandwidth = vec![0.0; n_d];
        let mut links = vec![0usize; n_d];
        for (i, c) in choices.iter().enumerate() {
            if let Some(j) = *c {
                bandwidth[j] += instance.bandwidth(i, j);
                links[j] += 1;
            }
        }
        let assignment = AssociationMatrix::from_choices(n_d, choices);
        let sum_rate = objective_unchecked(instance, &assignment);
        Self {
            assignment,
            sum_rate,
            per_nfp_bandwidth_used: bandwidth,
            per_nfp_links_used: links,
            solver_name: solver_name.to_string(),
            wall_time,
            nodes_explored,
            status,
        }
    }

    pub fn associated_count(&self) -> usize {
        self.assignment.associated_count()
    }
}

fn check_shape(instance: &ProblemInstance, a: &AssociationMatrix) -> Result<(), ModelError> {
    let expected = (instance.n_sc(), instance.n_d());
    if a.shape() != expected {
        return Err(ModelError::ShapeMismatch {
            expected,
            actual: a.shape(),
        });
    }
    Ok(())
}

fn objective_unchecked(instance: &ProblemInstance, a: &AssociationMatrix) -> f64 {
    instance
        .rates()
        .as_slice()
        .iter()
        .zip(a.entries().as_slice())
        .map(|(r, x)| r * x)
        .sum()
}

/// Sum rate `Σ_ij r_ij A_ij`.
pub fn objective(instance: &ProblemInstance, a: &AssociationMatrix) -> Result<f64, ModelError> {
    check_shape(instance, a)?;
    Ok(objective_unchecked(instance, a))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    Backhaul,
    Bandwidth,
    Sinr,
    Links,
    Row,
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstraintKind::Backhaul => "backhaul",
            ConstraintKind::Bandwidth => "bandwidth",
            ConstraintKind::Sinr => "sinr",
            ConstraintKind::Links => "links",
            ConstraintKind::Row => "row",
        })
    }
}

/// Signed slack `lhs - rhs` of one constraint; positive means violated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSlack {
    pub constraint: ConstraintKind,
    pub indices: Vec<usize>,
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub violations: Vec<ConstraintSlack>,
    /// Signed slack of every capacity constraint (backhaul, per-NFP bandwidth,
    /// per-NFP links), violated or not.
    pub margins: Vec<ConstraintSlack>,
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.feasible {
            writeln!(f, "feasible")?;
        } else {
            writeln!(f, "infeasible: {} violation(s)", self.violations.len())?;
            for v in &self.violations {
                writeln!(f, "  {} {:?} exceeds by {:.6e}", v.constraint, v.indices, v.slack)?;
            }
        }
        writeln!(f, "margins:")?;
        for m in &self.margins {
            writeln!(f, "  {} {:?} slack {:.6e}", m.constraint, m.indices, m.slack)?;
        }
        Ok(())
    }
}

/// Which constraint groups [`check_constraints`] enforces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConstraintSet {
    pub backhaul: bool,
    pub bandwidth: bool,
    pub sinr: bool,
    pub links: bool,
    pub row: bool,
}

impl ConstraintSet {
    pub const ALL: Self = Self {
        backhaul: true,
        bandwidth: true,
        sinr: true,
        links: true,
        row: true,
    };

    /// The relaxed association problem: no backhaul and no link-count limits.
    pub const RELAXED: Self = Self {
        backhaul: false,
        links: false,
        ..Self::ALL
    };
}

/// Checks every constraint of the association problem.
pub fn check_feasible(instance: &ProblemInstance, a: &AssociationMatrix) -> Result<FeasibilityReport, ModelError> {
    check_constraints(instance, a, ConstraintSet::ALL)
}

pub fn check_constraints(
    instance: &ProblemInstance,
    a: &AssociationMatrix,
    set: ConstraintSet,
) -> Result<FeasibilityReport, ModelError> {
    check_shape(instance, a)?;
    let limits = instance.limits();
    let (n_sc, n_d) = a.shape();
    let mut violations = Vec::new();
    let mut margins = Vec::new();

    if set.backhaul {
        let used = objective_unchecked(instance, a);
        let slack = ConstraintSlack {
            constraint: ConstraintKind::Backhaul,
            indices: vec![],
            slack: used - limits.backhaul_rate,
        };
        if !fits(used, limits.backhaul_rate) {
            violations.push(slack.clone());
        }
        margins.push(slack);
    }

    if set.bandwidth {
        for j in 0..n_d {
            let used: f64 = (0..n_sc).map(|i| instance.bandwidth(i, j) * a.get(i, j)).sum();
            let cap = limits.nfp_bandwidth[j];
            let slack = ConstraintSlack {
                constraint: ConstraintKind::Bandwidth,
                indices: vec![j],
                slack: used - cap,
            };
            if !fits(used, cap) {
                violations.push(slack.clone());
            }
            margins.push(slack);
        }
    }

    if set.sinr {
        for i in 0..n_sc {
            for j in 0..n_d {
                if a.get(i, j) > 0.0 && !instance.qos_ok(i, j) {
                    violations.push(ConstraintSlack {
                        constraint: ConstraintKind::Sinr,
                        indices: vec![i, j],
                        slack: limits.sinr_min - instance.sinr(i, j),
                    });
                }
            }
        }
    }

    if set.links {
        for j in 0..n_d {
            let used: f64 = (0..n_sc).map(|i| a.get(i, j)).sum();
            let cap = limits.nfp_links[j] as f64;
            let slack = ConstraintSlack {
                constraint: ConstraintKind::Links,
                indices: vec![j],
                slack: used - cap,
            };
            if !fits(used, cap) {
                violations.push(slack.clone());
            }
            margins.push(slack);
        }
    }

    if set.row {
        for i in 0..n_sc {
            let sum: f64 = a.entries().row(i).iter().sum();
            if !fits(sum, 1.0) {
                violations.push(ConstraintSlack {
                    constraint: ConstraintKind::Row,
                    indices: vec![i],
                    slack: sum - 1.0,
                });
            }
        }
    }

    Ok(FeasibilityReport {
        feasible: violations.is_empty(),
        violations,
        margins,
    })
}

/// How far an instance is from a textbook GAP.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapMappingReport {
    /// No unassignable SCs and no removable NFPs.
    pub is_gap_wellposed: bool,
    /// SCs without any NFP satisfying `b_ij <= B_j` and the SINR threshold.
    /// They stay unassociated (LEGAP reading).
    pub infeasible_scs: Vec<usize>,
    /// NFPs whose bandwidth is below every SC's demand on them.
    pub removable_nfps: Vec<usize>,
    /// Power of ten turning every bandwidth (snapped to the resolution grid)
    /// into an integer.
    pub scale_factor: f64,
    pub scale_exponent: i32,
}

/// Checks the GAP restrictions on an instance. `resolution_hz` must be a
/// power of ten; bandwidths are snapped to that grid before scaling.
pub fn validate_gap_mapping(instance: &ProblemInstance, resolution_hz: f64) -> GapMappingReport {
    let limits = instance.limits();
    let (n_sc, n_d) = (instance.n_sc(), instance.n_d());

    let infeasible_scs: Vec<usize> = (0..n_sc)
        .filter(|&i| {
            !(0..n_d).any(|j| instance.qos_ok(i, j) && fits(instance.bandwidth(i, j), limits.nfp_bandwidth[j]))
        })
        .collect();

    let removable_nfps: Vec<usize> = (0..n_d)
        .filter(|&j| {
            let min_demand = (0..n_sc).map(|i| instance.bandwidth(i, j)).fold(f64::INFINITY, f64::min);
            n_sc > 0 && limits.nfp_bandwidth[j] < min_demand
        })
        .collect();

    let resolution_exp = resolution_hz.log10().round() as i32;
    let grid = 10f64.powi(resolution_exp);
    let min_trailing_zeros = instance
        .bandwidths()
        .as_slice()
        .iter()
        .chain(limits.nfp_bandwidth.iter())
        .map(|v| (v / grid).round())
        .filter(|n| *n != 0.0)
        .map(trailing_decimal_zeros)
        .min();
    let scale_exponent = match min_trailing_zeros {
        Some(t) => -resolution_exp - t as i32,
        None => 0,
    };

    GapMappingReport {
        is_gap_wellposed: infeasible_scs.is_empty() && removable_nfps.is_empty(),
        infeasible_scs,
        removable_nfps,
        scale_factor: 10f64.powi(scale_exponent),
        scale_exponent,
    }
}

fn trailing_decimal_zeros(mut n: f64) -> u32 {
    let mut t = 0;
    while n != 0.0 && (n / 10.0).fract() == 0.0 && t < 300 {
        n /= 10.0;
        t += 1;
    }
    t
}
