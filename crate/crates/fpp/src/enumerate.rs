//! Exact small-box analysis by full configuration enumeration: the
//! distribution of the crossing time as exact polynomials in `p`, pivotal-edge
//! counting, and coefficient-exact verification of the derivative identity
//! for increasing events together with its pointwise pivotal bounds and the
//! resulting monotonicity of `E[phi] / (1 - p)`.
//!
//! Probabilities and expectations are carried in the zero-count basis
//! `sum_z a_z p^z (1-p)^(E-z)` with exact integer coefficients (`z` = number
//! of zero-time edges), expanded to the monomial basis for differentiation
//! and comparison. No floating point enters any identity check.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::lattice::{BoxGeometry, Configuration, EdgeId};
use crate::passage::{self, DequeSolver};

/// Default bound on the edge count for full enumeration (2^28 configurations).
pub const DEFAULT_ENUMERATION_CAP: usize = 28;

/// Masks per parallel work unit.
const MASK_CHUNK: usize = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnumerateError {
    #[error("geometry has {edges} edges ({configs} configurations), exceeding the enumeration cap {cap}")]
    CapExceeded {
        edges: usize,
        cap: usize,
        configs: String,
    },
    #[error("event is not increasing: configuration {mask:#b} lies in the event but raising edge {edge} leaves it")]
    NotIncreasing { mask: u64, edge: EdgeId },
    #[error("grid point {0} lies outside [0, 1)")]
    GridPointOutOfRange(String),
    #[error(transparent)]
    Lattice(#[from] crate::lattice::LatticeError),
}

fn check_cap(g: &BoxGeometry, cap: usize) -> Result<usize, EnumerateError> {
    let edges = g.edge_count();
    let effective = cap.min(63);
    if edges > effective {
        let configs = if edges <= 63 {
            (1u64 << edges).to_string()
        } else {
            format!("2^{edges}")
        };
        return Err(EnumerateError::CapExceeded {
            edges,
            cap: effective,
            configs,
        });
    }
    Ok(edges)
}

// ---------------------------------------------------------------------------
// Exact polynomials in p
// ---------------------------------------------------------------------------

/// A polynomial in `p` stored in the zero-count basis
/// `sum_z coeffs[z] * p^z * (1-p)^(edges-z)`.
///
/// For an event polynomial, `coeffs[z]` counts the member configurations with
/// exactly `z` zero-time edges, so `0 <= coeffs[z] <= C(edges, z)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroCountPoly {
    edges: usize,
    coeffs: Vec<BigInt>,
}

impl ZeroCountPoly {
    pub fn new(edges: usize, coeffs: Vec<BigInt>) -> Self {
        assert_eq!(coeffs.len(), edges + 1, "need one coefficient per zero count");
        ZeroCountPoly { edges, coeffs }
    }

    pub fn from_counts(edges: usize, counts: &[u64]) -> Self {
        Self::new(edges, counts.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero(edges: usize) -> Self {
        Self::new(edges, vec![BigInt::zero(); edges + 1])
    }

    pub fn edges(&self) -> usize {
        self.edges
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn add(&self, other: &ZeroCountPoly) -> ZeroCountPoly {
        assert_eq!(self.edges, other.edges);
        Self::new(
            self.edges,
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// Exact evaluation at a rational `p`.
    pub fn eval(&self, p: &BigRational) -> BigRational {
        let q = BigRational::one() - p;
        let mut p_pow = BigRational::one();
        // p^z * (1-p)^(E-z) built incrementally from z = 0
        let mut q_pow = vec![BigRational::one(); self.edges + 1];
        for i in 1..=self.edges {
            q_pow[i] = &q_pow[i - 1] * &q;
        }
        let mut acc = BigRational::zero();
        for z in 0..=self.edges {
            if !self.coeffs[z].is_zero() {
                acc += BigRational::from(self.coeffs[z].clone()) * &p_pow * &q_pow[self.edges - z];
            }
            p_pow *= p;
        }
        acc
    }

    /// Expand into the monomial basis `sum_j c_j p^j`.
    pub fn to_monomial(&self) -> MonomialPoly {
        let m = self.edges;
        let mut out = vec![BigInt::zero(); m + 1];
        for z in 0..=m {
            if self.coeffs[z].is_zero() {
                continue;
            }
            // p^z (1-p)^(m-z) = p^z sum_j C(m-z, j) (-p)^j
            let mut sign = BigInt::one();
            for j in 0..=(m - z) {
                let c = binomial(BigInt::from(m - z), BigInt::from(j));
                out[z + j] += &self.coeffs[z] * &c * &sign;
                sign = -sign;
            }
        }
        MonomialPoly::new(out)
    }

    /// Whether the coefficients satisfy the event bounds `0 <= a_z <= C(edges, z)`.
    pub fn within_event_bounds(&self) -> bool {
        self.coeffs.iter().enumerate().all(|(z, a)| {
            !a.is_negative() && *a <= binomial(BigInt::from(self.edges), BigInt::from(z))
        })
    }
}

/// A polynomial in `p` in the monomial basis, exact integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialPoly {
    coeffs: Vec<BigInt>,
}

impl MonomialPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        MonomialPoly { coeffs }
    }

    pub fn zero() -> Self {
        MonomialPoly { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn neg(&self) -> MonomialPoly {
        MonomialPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn add(&self, other: &MonomialPoly) -> MonomialPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![BigInt::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            out[i] += c;
        }
        MonomialPoly::new(out)
    }

    pub fn sub(&self, other: &MonomialPoly) -> MonomialPoly {
        self.add(&other.neg())
    }

    pub fn derivative(&self) -> MonomialPoly {
        if self.coeffs.len() <= 1 {
            return MonomialPoly::zero();
        }
        MonomialPoly::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(i, c)| c * BigInt::from(i + 1))
                .collect(),
        )
    }

    /// `(1 - p) * self`.
    pub fn mul_one_minus_p(&self) -> MonomialPoly {
        if self.is_zero() {
            return MonomialPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
            out[i + 1] -= c;
        }
        MonomialPoly::new(out)
    }

    /// Exact Horner evaluation at a rational `p`.
    pub fn eval(&self, p: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * p + BigRational::from(c.clone());
        }
        acc
    }
}

impl fmt::Display for MonomialPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let show_coeff = !mag.is_one() || j == 0;
            if show_coeff {
                write!(f, "{mag}")?;
            }
            if j >= 1 {
                if show_coeff {
                    write!(f, "*")?;
                }
                if j == 1 {
                    write!(f, "p")?;
                } else {
                    write!(f, "p^{j}")?;
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Events
// ---------------------------------------------------------------------------

/// An event on configurations of one geometry.
#[derive(Clone)]
pub enum EventSpec {
    /// `{ phi >= k }`; `k = 0` is the full event.
    PhiAtLeast(u32),
    /// Arbitrary predicate, mainly for tests.
    Custom {
        name: String,
        pred: Arc<dyn Fn(&Configuration) -> bool + Send + Sync>,
    },
}

impl EventSpec {
    pub fn phi_at_least(k: u32) -> Self {
        EventSpec::PhiAtLeast(k)
    }

    pub fn custom(
        name: impl Into<String>,
        pred: impl Fn(&Configuration) -> bool + Send + Sync + 'static,
    ) -> Self {
        EventSpec::Custom {
            name: name.into(),
            pred: Arc::new(pred),
        }
    }

    pub fn description(&self) -> String {
        match self {
            EventSpec::PhiAtLeast(k) => format!("phi >= {k}"),
            EventSpec::Custom { name, .. } => name.clone(),
        }
    }

    pub fn holds(&self, omega: &Configuration) -> bool {
        match self {
            EventSpec::PhiAtLeast(k) => passage::phi(omega) >= *k,
            EventSpec::Custom { pred, .. } => pred(omega),
        }
    }
}

impl fmt::Debug for EventSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EventSpec({})", self.description())
    }
}

/// Exactly the edges whose single flip changes membership of `omega` in the
/// event. The returned set never depends on the flipped edge's own time.
pub fn pivotal_edges(event: &EventSpec, omega: &Configuration) -> Vec<EdgeId> {
    let base = event.holds(omega);
    (0..omega.times().len())
        .filter(|&e| event.holds(&omega.flip(e).expect("edge id in range")) != base)
        .collect()
}

// ---------------------------------------------------------------------------
// Crossing values over all configurations
// ---------------------------------------------------------------------------

struct CrossingContext<'g> {
    geo: &'g BoxGeometry,
    sources: Vec<usize>,
    target_mark: Vec<bool>,
}

impl<'g> CrossingContext<'g> {
    fn new(geo: &'g BoxGeometry) -> Self {
        let sources = geo.face_vertices(0, geo.window().lo()[0]);
        let targets = geo.face_vertices(0, geo.window().hi()[0]);
        let mut target_mark = vec![false; geo.vertex_count()];
        for t in targets {
            target_mark[t] = true;
        }
        CrossingContext {
            geo,
            sources,
            target_mark,
        }
    }

    fn solver(&self) -> DequeSolver {
        DequeSolver::new(self.geo)
    }

    fn phi_of_mask(&self, solver: &mut DequeSolver, mask: u64) -> u32 {
        solver
            .run(
                |e| ((mask >> e) & 1) as u8,
                &self.sources,
                |v| self.target_mark[v],
                |_| true,
            )
            .expect("a box crossing always exists")
            .0
    }
}

fn mask_ranges(total: u64) -> impl IndexedParallelIterator<Item = (u64, u64)> {
    let chunk = MASK_CHUNK as u64;
    let chunks = (total.div_ceil(chunk).max(1)) as usize;
    (0..chunks)
        .into_par_iter()
        .map(move |ci| {
            let lo = ci as u64 * chunk;
            (lo, (lo + chunk).min(total))
        })
}

// ---------------------------------------------------------------------------
// Exact crossing-time distribution
// ---------------------------------------------------------------------------

/// The exact distribution of the crossing time: one polynomial
/// `P_p(phi = k)` per value `k`.
#[derive(Debug, Clone)]
pub struct PhiDistribution {
    edges: usize,
    polys: Vec<ZeroCountPoly>,
}

impl PhiDistribution {
    pub fn edges(&self) -> usize {
        self.edges
    }

    /// Largest attainable crossing value.
    pub fn max_value(&self) -> usize {
        self.polys.len() - 1
    }

    /// `P_p(phi = k)`.
    pub fn probability(&self, k: usize) -> &ZeroCountPoly {
        &self.polys[k]
    }

    pub fn polys(&self) -> &[ZeroCountPoly] {
        &self.polys
    }

    /// `P_p(phi >= k)`; `k` may exceed the maximal value (empty event).
    pub fn probability_at_least(&self, k: usize) -> ZeroCountPoly {
        let mut acc = ZeroCountPoly::zero(self.edges);
        for poly in self.polys.iter().skip(k) {
            acc = acc.add(poly);
        }
        acc
    }

    /// Sum over `k` of all `P_p(phi = k)`; identically one.
    pub fn total(&self) -> ZeroCountPoly {
        let mut acc = ZeroCountPoly::zero(self.edges);
        for poly in &self.polys {
            acc = acc.add(poly);
        }
        acc
    }

    /// `E_p[phi]` expanded to the monomial basis.
    pub fn expectation(&self) -> MonomialPoly {
        let mut acc = ZeroCountPoly::zero(self.edges);
        for (k, poly) in self.polys.iter().enumerate() {
            let scaled = ZeroCountPoly::new(
                self.edges,
                poly.coeffs().iter().map(|c| c * BigInt::from(k)).collect(),
            );
            acc = acc.add(&scaled);
        }
        acc.to_monomial()
    }
}

/// Enumerate all `2^edges` configurations of `g` and return the exact
/// distribution of the crossing time. Refuses geometries above `cap` edges.
pub fn exact_phi_distribution(
    g: &BoxGeometry,
    cap: usize,
) -> Result<PhiDistribution, EnumerateError> {
    let m = check_cap(g, cap)?;
    let span = g.span();
    let total = 1u64 << m;
    let ctx = CrossingContext::new(g);
    let width = m + 1;
    let counts = mask_ranges(total)
        .map(|(lo, hi)| {
            let mut solver = ctx.solver();
            let mut acc = vec![0u64; (span + 1) * width];
            for mask in lo..hi {
                let v = ctx.phi_of_mask(&mut solver, mask) as usize;
                let z = m - mask.count_ones() as usize;
                acc[v * width + z] += 1;
            }
            acc
        })
        .reduce(
            || vec![0u64; (span + 1) * width],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let polys = (0..=span)
        .map(|v| ZeroCountPoly::from_counts(m, &counts[v * width..(v + 1) * width]))
        .collect();
    Ok(PhiDistribution { edges: m, polys })
}

// ---------------------------------------------------------------------------
// Membership tables
// ---------------------------------------------------------------------------

fn member(bits: &[u64], mask: u64) -> bool {
    (bits[(mask >> 6) as usize] >> (mask & 63)) & 1 == 1
}

fn build_membership(g: &BoxGeometry, event: &EventSpec, m: usize) -> Vec<u64> {
    let total = 1u64 << m;
    let words = (total as usize).div_ceil(64);
    let mut bits = vec![0u64; words];
    let words_per_chunk = (MASK_CHUNK / 64).max(1);
    match event {
        EventSpec::PhiAtLeast(k) => {
            let ctx = CrossingContext::new(g);
            bits.par_chunks_mut(words_per_chunk)
                .enumerate()
                .for_each(|(ci, seg)| {
                    let mut solver = ctx.solver();
                    for (wi, word) in seg.iter_mut().enumerate() {
                        let base = ((ci * words_per_chunk + wi) * 64) as u64;
                        let lanes = 64.min(total - base);
                        let mut w = 0u64;
                        for b in 0..lanes {
                            if ctx.phi_of_mask(&mut solver, base + b) >= *k {
                                w |= 1 << b;
                            }
                        }
                        *word = w;
                    }
                });
        }
        EventSpec::Custom { pred, .. } => {
            let geo = Arc::new(g.clone());
            bits.par_chunks_mut(words_per_chunk)
                .enumerate()
                .for_each(|(ci, seg)| {
                    for (wi, word) in seg.iter_mut().enumerate() {
                        let base = ((ci * words_per_chunk + wi) * 64) as u64;
                        let lanes = 64.min(total - base);
                        let mut w = 0u64;
                        for b in 0..lanes {
                            let mask = base + b;
                            let times: Vec<u8> =
                                (0..m).map(|e| ((mask >> e) & 1) as u8).collect();
                            let cfg = Configuration::from_times(Arc::clone(&geo), times)
                                .expect("times match geometry");
                            if pred(&cfg) {
                                w |= 1 << b;
                            }
                        }
                        *word = w;
                    }
                });
        }
    }
    bits
}

/// Exhaustive single-bit check that the event is increasing in the times.
fn check_increasing(bits: &[u64], total: u64, m: usize) -> Result<(), EnumerateError> {
    let violation = mask_ranges(total)
        .map(|(lo, hi)| {
            let mut best: Option<(u64, usize)> = None;
            for mask in lo..hi {
                if !member(bits, mask) {
                    continue;
                }
                for e in 0..m {
                    let bit = 1u64 << e;
                    if mask & bit == 0 && !member(bits, mask | bit) {
                        if best.is_none_or(|b| (mask, e) < b) {
                            best = Some((mask, e));
                        }
                        break;
                    }
                }
            }
            best
        })
        .reduce(
            || None,
            |a, b| match (a, b) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, None) => x,
                (None, y) => y,
            },
        );
    match violation {
        Some((mask, edge)) => Err(EnumerateError::NotIncreasing { mask, edge }),
        None => Ok(()),
    }
}

// ---------------------------------------------------------------------------
// Derivative identity for increasing events
// ---------------------------------------------------------------------------

/// Result of the coefficient-exact derivative identity check
/// `d P_p(A) / dp = -E_p[N(A)]` for an increasing event `A`, together with
/// the per-edge factorization `P_p({t(e)=1} and S_e) = (1-p) P_p(S_e)`.
#[derive(Debug, Clone)]
pub struct RussoReport {
    pub event: String,
    pub edges: usize,
    /// `P_p(A)` in the zero-count basis.
    pub probability: ZeroCountPoly,
    /// `d P_p(A) / dp`.
    pub derivative: MonomialPoly,
    /// `-E_p[N(A)]`, computed by pivotal-edge counting.
    pub minus_expected_pivotal: MonomialPoly,
    pub identity_holds: bool,
    /// Lowest power of `p` where the two sides disagree, if any.
    pub first_mismatch_power: Option<usize>,
    pub independence_holds: bool,
    /// First edge whose factorization check fails, if any.
    pub first_independence_failure: Option<EdgeId>,
}

impl RussoReport {
    pub fn holds(&self) -> bool {
        self.identity_holds && self.independence_holds
    }
}

struct RussoCounts {
    event_by_z: Vec<u64>,
    pivotal_by_z: Vec<u64>,
    se: Vec<u64>,
    se_t1: Vec<u64>,
}

impl RussoCounts {
    fn new(m: usize) -> Self {
        RussoCounts {
            event_by_z: vec![0; m + 1],
            pivotal_by_z: vec![0; m + 1],
            se: vec![0; m * (m + 1)],
            se_t1: vec![0; m * (m + 1)],
        }
    }

    fn merge(mut self, other: RussoCounts) -> RussoCounts {
        let pairs = [
            (&mut self.event_by_z, other.event_by_z),
            (&mut self.pivotal_by_z, other.pivotal_by_z),
            (&mut self.se, other.se),
            (&mut self.se_t1, other.se_t1),
        ];
        for (a, b) in pairs {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        self
    }
}

/// Verify the derivative identity for `event` on `g`, exactly.
///
/// The event must be increasing in the edge times; this is checked
/// exhaustively before any counting and a violation is an error, not a
/// failed report.
pub fn verify_russo(
    g: &BoxGeometry,
    event: &EventSpec,
    cap: usize,
) -> Result<RussoReport, EnumerateError> {
    let m = check_cap(g, cap)?;
    let total = 1u64 << m;
    let bits = build_membership(g, event, m);
    check_increasing(&bits, total, m)?;

    let width = m + 1;
    let counts = mask_ranges(total)
        .map(|(lo, hi)| {
            let mut acc = RussoCounts::new(m);
            for mask in lo..hi {
                let z = m - mask.count_ones() as usize;
                let base = member(&bits, mask);
                if base {
                    acc.event_by_z[z] += 1;
                }
                let mut pivotal = 0u64;
                for e in 0..m {
                    let bit = 1u64 << e;
                    if member(&bits, mask ^ bit) != base {
                        pivotal += 1;
                        acc.se[e * width + z] += 1;
                        if mask & bit != 0 {
                            acc.se_t1[e * width + z] += 1;
                        }
                    }
                }
                acc.pivotal_by_z[z] += pivotal;
            }
            acc
        })
        .reduce(|| RussoCounts::new(m), RussoCounts::merge);

    let probability = ZeroCountPoly::from_counts(m, &counts.event_by_z);
    let derivative = probability.to_monomial().derivative();
    let minus_expected_pivotal = ZeroCountPoly::from_counts(m, &counts.pivotal_by_z)
        .to_monomial()
        .neg();

    let first_mismatch_power = derivative
        .sub(&minus_expected_pivotal)
        .coeffs()
        .iter()
        .position(|c| !c.is_zero());

    let mut first_independence_failure = None;
    for e in 0..m {
        let se = ZeroCountPoly::from_counts(m, &counts.se[e * width..(e + 1) * width]);
        let se_t1 = ZeroCountPoly::from_counts(m, &counts.se_t1[e * width..(e + 1) * width]);
        if se_t1.to_monomial() != se.to_monomial().mul_one_minus_p() {
            first_independence_failure = Some(e);
            break;
        }
    }

    Ok(RussoReport {
        event: event.description(),
        edges: m,
        probability,
        derivative,
        minus_expected_pivotal,
        identity_holds: first_mismatch_power.is_none(),
        first_mismatch_power,
        independence_holds: first_independence_failure.is_none(),
        first_independence_failure,
    })
}

// ---------------------------------------------------------------------------
// Pointwise pivotal bounds
// ---------------------------------------------------------------------------

/// Exhaustive check of the pointwise pivotal bounds for `A = {phi >= k}`:
/// configurations strictly inside the event have no pivotal edges, boundary
/// configurations (`phi = k`) have at least `k`, every time-1 edge on an
/// optimal crossing of a boundary configuration is pivotal, and every pivotal
/// edge carries time 1.
#[derive(Debug, Clone)]
pub struct PivotalBoundsReport {
    pub k: u32,
    pub configs_in_event: u64,
    pub configs_at_boundary: u64,
    /// `phi >= k+1` with a pivotal edge (must stay 0).
    pub interior_pivotal_violations: u64,
    /// `phi = k` with fewer than `k` pivotal edges (must stay 0).
    pub boundary_shortfall_violations: u64,
    /// time-1 optimal-witness edge that is not pivotal (must stay 0).
    pub witness_edge_violations: u64,
    /// pivotal edge with time 0 (must stay 0).
    pub pivotal_time_violations: u64,
    /// Smallest violating configuration mask, if any.
    pub first_violation: Option<u64>,
}

impl PivotalBoundsReport {
    pub fn holds(&self) -> bool {
        self.interior_pivotal_violations == 0
            && self.boundary_shortfall_violations == 0
            && self.witness_edge_violations == 0
            && self.pivotal_time_violations == 0
    }
}

struct BoundsAcc {
    in_event: u64,
    at_boundary: u64,
    interior: u64,
    shortfall: u64,
    witness: u64,
    time: u64,
    first: Option<u64>,
}

impl BoundsAcc {
    fn new() -> Self {
        BoundsAcc {
            in_event: 0,
            at_boundary: 0,
            interior: 0,
            shortfall: 0,
            witness: 0,
            time: 0,
            first: None,
        }
    }

    fn note(&mut self, mask: u64) {
        if self.first.is_none_or(|f| mask < f) {
            self.first = Some(mask);
        }
    }

    fn merge(mut self, o: BoundsAcc) -> BoundsAcc {
        self.in_event += o.in_event;
        self.at_boundary += o.at_boundary;
        self.interior += o.interior;
        self.shortfall += o.shortfall;
        self.witness += o.witness;
        self.time += o.time;
        self.first = match (self.first, o.first) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, None) => a,
            (None, b) => b,
        };
        self
    }
}

pub fn verify_pivotal_bounds(
    g: &BoxGeometry,
    k: u32,
    cap: usize,
) -> Result<PivotalBoundsReport, EnumerateError> {
    let m = check_cap(g, cap)?;
    let total = 1u64 << m;
    let ctx = CrossingContext::new(g);

    // crossing value of every configuration
    let mut table = vec![0u8; total as usize];
    table
        .par_chunks_mut(MASK_CHUNK)
        .enumerate()
        .for_each(|(ci, seg)| {
            let mut solver = ctx.solver();
            let base = (ci * MASK_CHUNK) as u64;
            for (i, slot) in seg.iter_mut().enumerate() {
                *slot = ctx.phi_of_mask(&mut solver, base + i as u64) as u8;
            }
        });

    let acc = mask_ranges(total)
        .map(|(lo, hi)| {
            let mut solver = ctx.solver();
            let mut acc = BoundsAcc::new();
            for mask in lo..hi {
                let v = u32::from(table[mask as usize]);
                if v < k {
                    continue;
                }
                acc.in_event += 1;
                let mut pivotal = 0u32;
                let mut pivotal_time_ok = true;
                for e in 0..m {
                    let bit = 1u64 << e;
                    if u32::from(table[(mask ^ bit) as usize]) < k {
                        pivotal += 1;
                        if mask & bit == 0 {
                            pivotal_time_ok = false;
                        }
                    }
                }
                if !pivotal_time_ok {
                    acc.time += 1;
                    acc.note(mask);
                }
                if v > k {
                    if pivotal > 0 {
                        acc.interior += 1;
                        acc.note(mask);
                    }
                } else {
                    acc.at_boundary += 1;
                    if pivotal < k {
                        acc.shortfall += 1;
                        acc.note(mask);
                    }
                    // every time-1 edge on an optimal crossing must be pivotal
                    let target = solver
                        .run(
                            |e| ((mask >> e) & 1) as u8,
                            &ctx.sources,
                            |v| ctx.target_mark[v],
                            |_| true,
                        )
                        .expect("a box crossing always exists")
                        .1;
                    for &e in &solver.witness(target) {
                        let bit = 1u64 << e;
                        if mask & bit != 0 && u32::from(table[(mask ^ bit) as usize]) >= k {
                            acc.witness += 1;
                            acc.note(mask);
                        }
                    }
                }
            }
            acc
        })
        .reduce(BoundsAcc::new, BoundsAcc::merge);

    Ok(PivotalBoundsReport {
        k,
        configs_in_event: acc.in_event,
        configs_at_boundary: acc.at_boundary,
        interior_pivotal_violations: acc.interior,
        boundary_shortfall_violations: acc.shortfall,
        witness_edge_violations: acc.witness,
        pivotal_time_violations: acc.time,
        first_violation: acc.first,
    })
}

// ---------------------------------------------------------------------------
// Finite-box monotonicity of E[phi] / (1-p)
// ---------------------------------------------------------------------------

/// Grid evaluation of `h(p) = -(1-p) dE_p[phi]/dp - E_p[phi]`, whose
/// non-negativity on `[0, 1)` is exactly the statement
/// `d/dp [ E_p[phi] / (1-p) ] <= 0`.
#[derive(Debug, Clone)]
pub struct MonotonicityReport {
    /// `E_p[phi]` in the monomial basis.
    pub expectation: MonomialPoly,
    /// `-(1-p) dE/dp - E`.
    pub h: MonomialPoly,
    pub grid_points: usize,
    pub violations: u64,
    /// First grid point with `h < 0`, with the offending value.
    pub first_violation: Option<(BigRational, BigRational)>,
}

impl MonotonicityReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// `points` equally spaced rationals from 0 to 999/1000 inclusive.
pub fn default_grid(points: usize) -> Vec<BigRational> {
    assert!(points >= 1, "grid needs at least one point");
    if points == 1 {
        return vec![BigRational::zero()];
    }
    (0..points)
        .map(|i| {
            BigRational::new(
                BigInt::from(999usize * i),
                BigInt::from(1000 * (points - 1)),
            )
        })
        .collect()
}

pub fn verify_finite_n_monotonicity(
    g: &BoxGeometry,
    grid: &[BigRational],
    cap: usize,
) -> Result<MonotonicityReport, EnumerateError> {
    for p in grid {
        if p.is_negative() || *p >= BigRational::one() {
            return Err(EnumerateError::GridPointOutOfRange(p.to_string()));
        }
    }
    let dist = exact_phi_distribution(g, cap)?;
    let expectation = dist.expectation();
    let h = expectation
        .derivative()
        .mul_one_minus_p()
        .neg()
        .sub(&expectation);
    let mut violations = 0;
    let mut first_violation = None;
    for p in grid {
        let value = h.eval(p);
        if value.is_negative() {
            violations += 1;
            if first_violation.is_none() {
                first_violation = Some((p.clone(), value));
            }
        }
    }
    Ok(MonotonicityReport {
        expectation,
        h,
        grid_points: grid.len(),
        violations,
        first_violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_geometry, Configuration, RandomPlan};

    fn b(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(b(n), b(d))
    }

    #[test]
    fn unit_box_distribution_matches_closed_form() {
        // P(phi = 1) = (1-p)^2, P(phi = 0) = 1 - (1-p)^2 = 2p - p^2
        let g = build_geometry(2, 1).unwrap();
        let dist = exact_phi_distribution(&g, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(dist.max_value(), 1);
        assert_eq!(
            dist.probability(1).to_monomial().coeffs(),
            &[b(1), b(-2), b(1)]
        );
        assert_eq!(dist.probability(0).to_monomial().coeffs(), &[b(0), b(2), b(-1)]);
        assert_eq!(dist.expectation().coeffs(), &[b(1), b(-2), b(1)]);
    }

    #[test]
    fn distribution_sums_to_one() {
        for (d, n) in [(2, 1), (2, 2)] {
            let g = build_geometry(d, n).unwrap();
            let dist = exact_phi_distribution(&g, DEFAULT_ENUMERATION_CAP).unwrap();
            let total = dist.total().to_monomial();
            assert_eq!(total.coeffs(), &[b(1)]);
            for poly in dist.polys() {
                assert!(poly.within_event_bounds());
            }
        }
    }

    #[test]
    fn distribution_endpoints_match_deterministic_configs() {
        let g = std::sync::Arc::new(build_geometry(2, 2).unwrap());
        let dist = exact_phi_distribution(&g, DEFAULT_ENUMERATION_CAP).unwrap();
        let ones = Configuration::sample(g.clone(), 0.0, RandomPlan::new(0, 0)).unwrap();
        let zeros = Configuration::sample(g.clone(), 1.0, RandomPlan::new(0, 0)).unwrap();
        let phi_ones = crate::passage::phi(&ones) as usize;
        let phi_zeros = crate::passage::phi(&zeros) as usize;
        for k in 0..=dist.max_value() {
            let at0 = dist.probability(k).eval(&BigRational::zero());
            let at1 = dist.probability(k).eval(&BigRational::one());
            assert_eq!(at0 == BigRational::one(), k == phi_ones);
            assert_eq!(at1 == BigRational::one(), k == phi_zeros);
        }
    }

    #[test]
    fn zero_count_eval_agrees_with_monomial_eval() {
        let g = build_geometry(2, 2).unwrap();
        let dist = exact_phi_distribution(&g, DEFAULT_ENUMERATION_CAP).unwrap();
        let p = rat(3, 7);
        for poly in dist.polys() {
            assert_eq!(poly.eval(&p), poly.to_monomial().eval(&p));
        }
    }

    #[test]
    fn cap_is_enforced_with_size_report() {
        let g = build_geometry(3, 2).unwrap(); // 54 edges
        let err = exact_phi_distribution(&g, DEFAULT_ENUMERATION_CAP).unwrap_err();
        match err {
            EnumerateError::CapExceeded { edges, cap, .. } => {
                assert_eq!(edges, 54);
                assert_eq!(cap, DEFAULT_ENUMERATION_CAP);
            }
            other => panic!("unexpected error {other:?}"),
        }
        // override allows the 12-edge box through a tighter cap failure
        let g = build_geometry(2, 2).unwrap();
        assert!(exact_phi_distribution(&g, 4).is_err());
        assert!(exact_phi_distribution(&g, 12).is_ok());
    }

    #[test]
    fn pivotal_edges_on_unit_box() {
        let g = std::sync::Arc::new(build_geometry(2, 1).unwrap());
        let event = EventSpec::phi_at_least(1);
        let ones = Configuration::from_times(g.clone(), vec![1, 1, 1, 1]).unwrap();
        assert_eq!(pivotal_edges(&event, &ones), vec![0, 1]);
        let bottom_zero = Configuration::from_times(g.clone(), vec![0, 1, 1, 1]).unwrap();
        assert_eq!(pivotal_edges(&event, &bottom_zero), vec![0]);
    }

    #[test]
    fn pivotality_ignores_own_time() {
        let g = std::sync::Arc::new(build_geometry(2, 1).unwrap());
        let event = EventSpec::phi_at_least(1);
        for mask in 0u32..16 {
            let times: Vec<u8> = (0..4).map(|e| ((mask >> e) & 1) as u8).collect();
            let cfg = Configuration::from_times(g.clone(), times).unwrap();
            let base = pivotal_edges(&event, &cfg);
            for e in 0..4 {
                let flipped = pivotal_edges(&event, &cfg.flip(e).unwrap());
                assert_eq!(base.contains(&e), flipped.contains(&e));
            }
        }
    }

    #[test]
    fn russo_identity_on_unit_box() {
        let g = build_geometry(2, 1).unwrap();
        let report =
            verify_russo(&g, &EventSpec::phi_at_least(1), DEFAULT_ENUMERATION_CAP).unwrap();
        assert!(report.holds());
        // P(A) = (1-p)^2, dP/dp = -2(1-p) = -2 + 2p, -E[N] likewise
        assert_eq!(report.probability.to_monomial().coeffs(), &[b(1), b(-2), b(1)]);
        assert_eq!(report.derivative.coeffs(), &[b(-2), b(2)]);
        assert_eq!(report.minus_expected_pivotal.coeffs(), &[b(-2), b(2)]);
    }

    #[test]
    fn russo_identity_for_full_event() {
        let g = build_geometry(2, 1).unwrap();
        let report =
            verify_russo(&g, &EventSpec::phi_at_least(0), DEFAULT_ENUMERATION_CAP).unwrap();
        assert!(report.holds());
        assert!(report.derivative.is_zero());
        assert!(report.minus_expected_pivotal.is_zero());
    }

    #[test]
    fn russo_identity_on_two_box_all_k() {
        let g = build_geometry(2, 2).unwrap();
        for k in 1..=2 {
            let report =
                verify_russo(&g, &EventSpec::phi_at_least(k), DEFAULT_ENUMERATION_CAP).unwrap();
            assert!(report.holds(), "identity failed at k = {k}");
        }
    }

    #[test]
    fn russo_identity_on_custom_increasing_event() {
        // {t(e0) = 1}: P = 1 - p, derivative -1, exactly one pivotal edge
        let g = build_geometry(2, 1).unwrap();
        let event = EventSpec::custom("edge 0 has time 1", |cfg: &Configuration| {
            cfg.time(0) == 1
        });
        let report = verify_russo(&g, &event, DEFAULT_ENUMERATION_CAP).unwrap();
        assert!(report.holds());
        assert_eq!(report.derivative.coeffs(), &[b(-1)]);
    }

    #[test]
    fn non_increasing_event_is_rejected() {
        let g = build_geometry(2, 1).unwrap();
        let event = EventSpec::custom("edge 0 has time 0", |cfg: &Configuration| {
            cfg.time(0) == 0
        });
        let err = verify_russo(&g, &event, DEFAULT_ENUMERATION_CAP).unwrap_err();
        assert!(matches!(err, EnumerateError::NotIncreasing { .. }));
    }

    #[test]
    fn event_probability_non_increasing_in_p() {
        // A = {phi >= k} is increasing in the times, so P_p(A) falls as p grows
        let g = build_geometry(2, 2).unwrap();
        let dist = exact_phi_distribution(&g, DEFAULT_ENUMERATION_CAP).unwrap();
        let grid = default_grid(101);
        for k in 1..=2 {
            let deriv = dist.probability_at_least(k).to_monomial().derivative();
            for p in &grid {
                assert!(
                    !deriv.eval(p).is_positive(),
                    "P(phi >= {k}) increased at p = {p}"
                );
            }
        }
    }

    #[test]
    fn pivotal_bounds_on_small_boxes() {
        for (d, n) in [(2usize, 1usize), (2, 2)] {
            let g = build_geometry(d, n).unwrap();
            for k in 0..=(n as u32) {
                let report = verify_pivotal_bounds(&g, k, DEFAULT_ENUMERATION_CAP).unwrap();
                assert!(report.holds(), "pivotal bounds failed at d={d} n={n} k={k}");
                if k >= 1 {
                    assert!(report.configs_at_boundary > 0);
                }
            }
        }
    }

    #[test]
    fn unit_box_boundary_config_has_two_pivotal_edges() {
        let g = std::sync::Arc::new(build_geometry(2, 1).unwrap());
        let event = EventSpec::phi_at_least(1);
        // the only phi = 1 configurations have both horizontal edges at 1
        for times in [[1u8, 1, 0, 0], [1, 1, 1, 0], [1, 1, 0, 1], [1, 1, 1, 1]] {
            let cfg = Configuration::from_times(g.clone(), times.to_vec()).unwrap();
            assert_eq!(crate::passage::phi(&cfg), 1);
            let pivotal = pivotal_edges(&event, &cfg);
            assert!(pivotal.len() >= 2);
        }
    }

    #[test]
    fn monotonicity_on_unit_box_closed_form() {
        // E = (1-p)^2, so h = -(1-p)(-2(1-p)) - (1-p)^2 = (1-p)^2
        let g = build_geometry(2, 1).unwrap();
        let grid = default_grid(101);
        let report =
            verify_finite_n_monotonicity(&g, &grid, DEFAULT_ENUMERATION_CAP).unwrap();
        assert!(report.holds());
        assert_eq!(report.h.coeffs(), &[b(1), b(-2), b(1)]);
        // derivative of E/(1-p) = 1 - p is the constant -1
        assert_eq!(report.expectation.coeffs(), &[b(1), b(-2), b(1)]);
    }

    #[test]
    fn monotonicity_derivative_steep_at_zero() {
        // h(0) >= 0 forces dE/dp at 0 to be <= -n
        for n in [1usize, 2] {
            let g = build_geometry(2, n).unwrap();
            let dist = exact_phi_distribution(&g, DEFAULT_ENUMERATION_CAP).unwrap();
            let deriv_at_zero = dist.expectation().derivative().eval(&BigRational::zero());
            assert!(deriv_at_zero <= BigRational::from(b(-(n as i64))));
        }
    }

    #[test]
    fn monotonicity_rejects_bad_grid() {
        let g = build_geometry(2, 1).unwrap();
        let grid = vec![BigRational::one()];
        assert!(matches!(
            verify_finite_n_monotonicity(&g, &grid, DEFAULT_ENUMERATION_CAP),
            Err(EnumerateError::GridPointOutOfRange(_))
        ));
    }

    #[test]
    fn default_grid_spans_zero_to_just_below_one() {
        let grid = default_grid(1001);
        assert_eq!(grid.len(), 1001);
        assert_eq!(grid[0], BigRational::zero());
        assert_eq!(grid[1000], rat(999, 1000));
    }

    #[test]
    fn enumeration_is_thread_count_independent() {
        let g = build_geometry(2, 2).unwrap();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| exact_phi_distribution(&g, DEFAULT_ENUMERATION_CAP).unwrap());
        let multi = exact_phi_distribution(&g, DEFAULT_ENUMERATION_CAP).unwrap();
        for k in 0..=single.max_value() {
            assert_eq!(single.probability(k), multi.probability(k));
        }
    }

    #[test]
    fn monomial_display_is_readable() {
        let p = MonomialPoly::new(vec![b(1), b(-2), b(1)]);
        assert_eq!(p.to_string(), "1 - 2*p + p^2");
        assert_eq!(MonomialPoly::zero().to_string(), "0");
        assert_eq!(MonomialPoly::new(vec![b(0), b(-1)]).to_string(), "-p");
    }
}
