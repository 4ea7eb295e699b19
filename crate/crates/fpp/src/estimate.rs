//! Monte Carlo estimation of the time constant via normalized box-crossing
//! times, with common-random-number coupling across a `p`-grid and
//! tolerance-based checks of the difference and ratio lower bounds.
//!
//! Replicates run in parallel but every aggregation folds in replicate order,
//! so results are byte-identical regardless of thread count.

use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::lattice::{BoxGeometry, Configuration, LatticeError, RandomPlan};
use crate::passage;

/// Normal 95% critical value used for all confidence intervals.
pub const Z_95: f64 = 1.96;

/// In the ratio check, `mean(p2)` must exceed this many standard errors
/// before dividing by it.
const RATIO_GUARD_STDERRS: f64 = 5.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error("probability must lie in [0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("replicate count must be at least 1")]
    NoReplicates,
    #[error("grid must be strictly increasing within [0, 1)")]
    BadGrid,
    #[error("n list must be strictly increasing and nonempty")]
    BadSideList,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// One Monte Carlo estimate of the time constant at a fixed `(p, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRecord {
    pub p: f64,
    pub n: usize,
    pub replicates: usize,
    /// Sample mean of `phi / n`.
    pub mean: f64,
    /// Sample standard deviation of `phi / n`.
    pub std_dev: f64,
    /// `std / sqrt(replicates)`.
    pub std_err: f64,
    /// Half-width of the 95% confidence interval.
    pub ci_half_width: f64,
    /// `mean / (1 - p)`; NaN at `p = 1`.
    pub mean_over_1mp: f64,
    pub seed: u64,
}

fn record_from_values(p: f64, n: usize, seed: u64, values: &[f64]) -> EstimateRecord {
    let r = values.len();
    let mean = values.iter().sum::<f64>() / r as f64;
    let var = if r > 1 {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (r - 1) as f64
    } else {
        0.0
    };
    let std_dev = var.sqrt();
    let std_err = std_dev / (r as f64).sqrt();
    EstimateRecord {
        p,
        n,
        replicates: r,
        mean,
        std_dev,
        std_err,
        ci_half_width: Z_95 * std_err,
        mean_over_1mp: mean / (1.0 - p),
        seed,
    }
}

fn validate(p: f64, n: usize, replicates: usize) -> Result<(), EstimateError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(EstimateError::InvalidProbability(p));
    }
    if n < 1 {
        return Err(EstimateError::Lattice(LatticeError::InvalidSide(n)));
    }
    if replicates < 1 {
        return Err(EstimateError::NoReplicates);
    }
    Ok(())
}

fn phi_replicates(
    geo: &Arc<BoxGeometry>,
    p: f64,
    replicates: usize,
    seed: u64,
) -> Result<Vec<u32>, EstimateError> {
    let values: Result<Vec<u32>, LatticeError> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let cfg = Configuration::sample(Arc::clone(geo), p, RandomPlan::new(seed, r as u64))?;
            Ok(passage::phi(&cfg))
        })
        .collect();
    Ok(values?)
}

/// Estimate the time constant at `p` as the mean of `phi / n` over
/// `replicates` independent configurations of `B_n` in dimension `d`.
pub fn estimate_mu(
    d: usize,
    n: usize,
    p: f64,
    replicates: usize,
    seed: u64,
) -> Result<EstimateRecord, EstimateError> {
    validate(p, n, replicates)?;
    let geo = Arc::new(BoxGeometry::standard(d, n)?);
    let phis = phi_replicates(&geo, p, replicates, seed)?;
    let values: Vec<f64> = phis.iter().map(|&v| f64::from(v) / n as f64).collect();
    Ok(record_from_values(p, n, seed, &values))
}

/// One pass of `phi / n` stabilization data over an increasing list of sides.
pub fn convergence_table(
    d: usize,
    p: f64,
    sides: &[usize],
    replicates: usize,
    seed: u64,
) -> Result<Vec<EstimateRecord>, EstimateError> {
    if sides.is_empty() || sides.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EstimateError::BadSideList);
    }
    sides
        .iter()
        .map(|&n| estimate_mu(d, n, p, replicates, seed))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    /// `mean(p1) - mean(p2) >= (mean(p2)/(1-p2)) (p2 - p1)` within tolerance.
    DifferenceLowerBound,
    /// `mean(p1)/mean(p2) >= 1 + (p2-p1)/(1-p2)` within tolerance.
    RatioLowerBound,
    /// `mean(p)/(1-p)` non-increasing between adjacent grid points.
    NormalizedMonotone,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

/// One tolerance-based inequality check between two grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub kind: CheckKind,
    pub p1: f64,
    pub p2: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

impl BoundCheck {
    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }
}

/// Estimates over a `p`-grid at fixed `n`, sharing per-replicate uniforms
/// across the whole grid so that crossing times are coupled pathwise.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub records: Vec<EstimateRecord>,
    pub checks: Vec<BoundCheck>,
    /// Coupled `(replicate, adjacent grid pair)` monotonicity violations;
    /// pathwise coupling makes this exactly zero.
    pub pathwise_violations: u64,
    /// `phi` per grid point per replicate.
    phi: Vec<Vec<u32>>,
}

impl SweepResult {
    pub fn phi_values(&self, grid_index: usize) -> &[u32] {
        &self.phi[grid_index]
    }

    pub fn all_checks_pass(&self) -> bool {
        self.pathwise_violations == 0 && self.checks.iter().all(BoundCheck::passed)
    }
}

/// Run coupled estimates over a strictly increasing grid in `[0, 1)` and
/// evaluate the difference, ratio and normalized-monotonicity checks.
pub fn sweep(
    d: usize,
    n: usize,
    grid: &[f64],
    replicates: usize,
    seed: u64,
) -> Result<SweepResult, EstimateError> {
    if grid.is_empty()
        || grid.iter().any(|p| !(0.0..1.0).contains(p))
        || grid.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(EstimateError::BadGrid);
    }
    if replicates < 1 {
        return Err(EstimateError::NoReplicates);
    }
    let geo = Arc::new(BoxGeometry::standard(d, n)?);

    // per replicate, evaluate the whole grid from one shared plan
    let per_replicate: Result<Vec<Vec<u32>>, LatticeError> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let plan = RandomPlan::new(seed, r as u64);
            grid.iter()
                .map(|&p| {
                    let cfg = Configuration::sample(Arc::clone(&geo), p, plan)?;
                    Ok(passage::phi(&cfg))
                })
                .collect()
        })
        .collect();
    let per_replicate = per_replicate?;

    let mut phi = vec![vec![0u32; replicates]; grid.len()];
    for (r, row) in per_replicate.iter().enumerate() {
        for (i, &v) in row.iter().enumerate() {
            phi[i][r] = v;
        }
    }

    let records: Vec<EstimateRecord> = grid
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let values: Vec<f64> = phi[i].iter().map(|&v| f64::from(v) / n as f64).collect();
            record_from_values(p, n, seed, &values)
        })
        .collect();

    let mut pathwise_violations = 0u64;
    for row in &per_replicate {
        for pair in row.windows(2) {
            if pair[1] > pair[0] {
                pathwise_violations += 1;
            }
        }
    }

    let mut checks = Vec::new();
    for i in 0..records.len() {
        for j in (i + 1)..records.len() {
            checks.push(difference_check(&records[i], &records[j]));
            checks.push(ratio_check(&records[i], &records[j]));
        }
    }
    for pair in records.windows(2) {
        checks.push(normalized_monotone_check(&pair[0], &pair[1]));
    }

    Ok(SweepResult {
        records,
        checks,
        pathwise_violations,
        phi,
    })
}

fn difference_check(a: &EstimateRecord, b: &EstimateRecord) -> BoundCheck {
    let gap = b.p - a.p;
    let lhs = a.mean - b.mean;
    let rhs = b.mean / (1.0 - b.p) * gap;
    let tolerance = a.ci_half_width + b.ci_half_width + b.ci_half_width / (1.0 - b.p) * gap;
    BoundCheck {
        kind: CheckKind::DifferenceLowerBound,
        p1: a.p,
        p2: b.p,
        lhs,
        rhs,
        tolerance,
        verdict: if lhs + tolerance >= rhs {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
    }
}

fn ratio_check(a: &EstimateRecord, b: &EstimateRecord) -> BoundCheck {
    let rhs = 1.0 + (b.p - a.p) / (1.0 - b.p);
    if b.mean < RATIO_GUARD_STDERRS * b.std_err || b.mean == 0.0 {
        return BoundCheck {
            kind: CheckKind::RatioLowerBound,
            p1: a.p,
            p2: b.p,
            lhs: f64::NAN,
            rhs,
            tolerance: f64::NAN,
            verdict: Verdict::Skipped,
        };
    }
    let lhs = a.mean / b.mean;
    // first-order error of a quotient
    let tolerance = (a.ci_half_width + lhs * b.ci_half_width) / b.mean;
    BoundCheck {
        kind: CheckKind::RatioLowerBound,
        p1: a.p,
        p2: b.p,
        lhs,
        rhs,
        tolerance,
        verdict: if lhs + tolerance >= rhs {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
    }
}

fn normalized_monotone_check(a: &EstimateRecord, b: &EstimateRecord) -> BoundCheck {
    let lhs = a.mean_over_1mp;
    let rhs = b.mean_over_1mp;
    let tolerance = a.ci_half_width / (1.0 - a.p) + b.ci_half_width / (1.0 - b.p);
    BoundCheck {
        kind: CheckKind::NormalizedMonotone,
        p1: a.p,
        p2: b.p,
        lhs,
        rhs,
        tolerance,
        verdict: if lhs + tolerance >= rhs {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
    }
}
