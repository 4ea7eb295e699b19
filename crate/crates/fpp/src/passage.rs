//! Zero-one-weight shortest passage times: the box-crossing time exactly,
//! and truncated-window approximations of the point, half-space and cylinder
//! passage times.
//!
//! All values are computed by a double-ended-queue shortest-path scheme over
//! `{0, 1}` edge weights: relaxations through 0-edges go to the front of the
//! deque, through 1-edges to the back, so vertices are settled in distance
//! order without a priority queue.

use std::collections::VecDeque;
use std::sync::Arc;

use thiserror::Error;

use crate::lattice::{
    BoxGeometry, Configuration, EdgeId, LatticeError, RandomPlan, VertexId, Window,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PassageError {
    #[error("source and target sets must be nonempty")]
    EmptyEndpoints,
    #[error("vertex {0} lies outside the query domain")]
    OutsideDomain(VertexId),
    #[error("no path from sources to targets within the domain")]
    Unreachable,
    #[error("margins must be strictly increasing")]
    MarginsNotIncreasing,
    #[error("query kind {0} does not take a truncation margin")]
    NotTruncatable(&'static str),
    #[error("vertex {0:?} does not lie in the query window")]
    VertexOutsideWindow(Vec<i64>),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Which passage-time functional to compute.
///
/// Apart from `Phi`, every kind is defined on an infinite domain; it is
/// evaluated on a finite window controlled by a margin, and the value is a
/// non-increasing function of the margin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryKind {
    /// Left-face to right-face crossing time of the box itself.
    Phi,
    /// Origin to `n * e1`, paths unrestricted (window `[-m, n+m]^d`).
    Point,
    /// Origin to the hyperplane `u_1 = n`, paths unrestricted (window `[-m, n+m]^d`).
    HalfSpace,
    /// Origin to `n * e1`, paths restricted to the cylinder `0 <= u_1 <= n`
    /// (transverse coordinates in `[-m, n+m]`).
    CylinderPoint,
    /// Origin to the hyperplane `u_1 = n`, restricted to the same cylinder.
    CylinderFace,
    /// Arbitrary vertex pair, window = bounding box inflated by the margin.
    PointToPoint { from: Vec<i64>, to: Vec<i64> },
}

impl QueryKind {
    pub fn name(&self) -> &'static str {
        match self {
            QueryKind::Phi => "phi",
            QueryKind::Point => "point",
            QueryKind::HalfSpace => "half-space",
            QueryKind::CylinderPoint => "cylinder-point",
            QueryKind::CylinderFace => "cylinder-face",
            QueryKind::PointToPoint { .. } => "point-to-point",
        }
    }
}

/// A passage-time functional plus its target distance `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PassageQuery {
    pub kind: QueryKind,
    pub n: usize,
}

impl PassageQuery {
    pub fn new(kind: QueryKind, n: usize) -> Self {
        PassageQuery { kind, n }
    }

    /// The finite window used to evaluate this query at truncation margin `m`.
    pub fn window(&self, d: usize, margin: usize) -> Result<Window, PassageError> {
        let m = margin as i64;
        let n = self.n as i64;
        let w = match &self.kind {
            QueryKind::Phi => return Err(PassageError::NotTruncatable("phi")),
            QueryKind::Point | QueryKind::HalfSpace => {
                Window::new(vec![-m; d], vec![n + m; d])?
            }
            QueryKind::CylinderPoint | QueryKind::CylinderFace => {
                let mut lo = vec![-m; d];
                let mut hi = vec![n + m; d];
                lo[0] = 0;
                hi[0] = n;
                Window::new(lo, hi)?
            }
            QueryKind::PointToPoint { from, to } => {
                let lo = from
                    .iter()
                    .zip(to)
                    .map(|(&a, &b)| a.min(b) - m)
                    .collect();
                let hi = from
                    .iter()
                    .zip(to)
                    .map(|(&a, &b)| a.max(b) + m)
                    .collect();
                Window::new(lo, hi)?
            }
        };
        Ok(w)
    }

    fn endpoints(
        &self,
        geo: &BoxGeometry,
    ) -> Result<(Vec<VertexId>, Vec<VertexId>), PassageError> {
        let d = geo.dimension();
        let origin = vec![0i64; d];
        let mut axis_target = vec![0i64; d];
        axis_target[0] = self.n as i64;
        let vid = |coords: &[i64]| {
            geo.vertex_id(coords)
                .ok_or_else(|| PassageError::VertexOutsideWindow(coords.to_vec()))
        };
        let pair = match &self.kind {
            QueryKind::Phi => (
                geo.face_vertices(0, geo.window().lo()[0]),
                geo.face_vertices(0, geo.window().hi()[0]),
            ),
            QueryKind::Point | QueryKind::CylinderPoint => {
                (vec![vid(&origin)?], vec![vid(&axis_target)?])
            }
            QueryKind::HalfSpace | QueryKind::CylinderFace => {
                (vec![vid(&origin)?], geo.face_vertices(0, self.n as i64))
            }
            QueryKind::PointToPoint { from, to } => (vec![vid(from)?], vec![vid(to)?]),
        };
        Ok(pair)
    }
}

/// Value of a passage query plus one optimal path witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PassageResult {
    /// Minimal passage time.
    pub value: u32,
    /// Edge ids of one optimal path, in source-to-target order. Ids are
    /// relative to the geometry the query ran on.
    pub witness: Vec<EdgeId>,
    /// Truncation margin the query ran at, if any.
    pub margin: Option<usize>,
}

const UNSET: u32 = u32::MAX;

/// Reusable 0-1 BFS state for one geometry.
pub(crate) struct DequeSolver {
    // CSR adjacency: per vertex, (neighbor, edge) pairs
    offsets: Vec<u32>,
    nbr: Vec<u32>,
    edge: Vec<u32>,
    dist: Vec<u32>,
    pred_vtx: Vec<u32>,
    pred_edge: Vec<u32>,
    deque: VecDeque<u32>,
}

impl DequeSolver {
    pub(crate) fn new(geo: &BoxGeometry) -> Self {
        let vcount = geo.vertex_count();
        assert!(
            vcount <= u32::MAX as usize && geo.edge_count() <= u32::MAX as usize,
            "geometry too large for the passage solver"
        );
        let mut degree = vec![0u32; vcount];
        for (v, deg) in degree.iter_mut().enumerate() {
            geo.visit_incident(v, |_, _| *deg += 1);
        }
        let mut offsets = vec![0u32; vcount + 1];
        for v in 0..vcount {
            offsets[v + 1] = offsets[v] + degree[v];
        }
        let total = offsets[vcount] as usize;
        let mut nbr = vec![0u32; total];
        let mut edge = vec![0u32; total];
        let mut slot = 0usize;
        for v in 0..vcount {
            geo.visit_incident(v, |e, u| {
                nbr[slot] = u as u32;
                edge[slot] = e as u32;
                slot += 1;
            });
        }
        debug_assert_eq!(slot, total);
        DequeSolver {
            offsets,
            nbr,
            edge,
            dist: vec![UNSET; vcount],
            pred_vtx: vec![u32::MAX; vcount],
            pred_edge: vec![u32::MAX; vcount],
            deque: VecDeque::new(),
        }
    }

    /// Run 0-1 BFS from `sources`; returns the first settled target and its
    /// distance. `domain` restricts which vertices may be traversed.
    pub(crate) fn run(
        &mut self,
        time_of: impl Fn(EdgeId) -> u8,
        sources: &[VertexId],
        is_target: impl Fn(VertexId) -> bool,
        domain: impl Fn(VertexId) -> bool,
    ) -> Option<(u32, VertexId)> {
        self.dist.fill(UNSET);
        self.pred_vtx.fill(u32::MAX);
        self.pred_edge.fill(u32::MAX);
        self.deque.clear();
        for &s in sources {
            if self.dist[s] != 0 {
                self.dist[s] = 0;
                self.deque.push_back(s as u32);
            }
        }
        let mut settled_target: Option<(u32, VertexId)> = None;
        while let Some(u32v) = self.deque.pop_front() {
            let u = u32v as usize;
            let d = self.dist[u];
            if is_target(u) {
                settled_target = Some((d, u));
                break;
            }
            for slot in self.offsets[u] as usize..self.offsets[u + 1] as usize {
                let v = self.nbr[slot] as usize;
                if !domain(v) {
                    continue;
                }
                let e = self.edge[slot] as usize;
                let w = u32::from(time_of(e));
                let nd = d + w;
                if nd < self.dist[v] {
                    self.dist[v] = nd;
                    self.pred_vtx[v] = u32v;
                    self.pred_edge[v] = e as u32;
                    if w == 0 {
                        self.deque.push_front(v as u32);
                    } else {
                        self.deque.push_back(v as u32);
                    }
                }
            }
        }
        settled_target
    }

    /// Edge ids of the predecessor chain from a settled vertex back to a source.
    pub(crate) fn witness(&self, target: VertexId) -> Vec<EdgeId> {
        let mut path = Vec::new();
        let mut v = target;
        while self.pred_edge[v] != u32::MAX {
            path.push(self.pred_edge[v] as usize);
            v = self.pred_vtx[v] as usize;
        }
        path.reverse();
        path
    }
}

/// Exact minimum passage time between vertex sets within a domain predicate,
/// with one optimal path witness.
pub fn shortest_passage(
    omega: &Configuration,
    sources: &[VertexId],
    targets: &[VertexId],
    domain: impl Fn(VertexId) -> bool,
) -> Result<PassageResult, PassageError> {
    if sources.is_empty() || targets.is_empty() {
        return Err(PassageError::EmptyEndpoints);
    }
    for &v in sources.iter().chain(targets) {
        if !domain(v) {
            return Err(PassageError::OutsideDomain(v));
        }
    }
    let geo = omega.geometry();
    let mut solver = DequeSolver::new(geo);
    let mut target_mark = vec![false; geo.vertex_count()];
    for &t in targets {
        target_mark[t] = true;
    }
    let hit = solver
        .run(|e| omega.time(e), sources, |v| target_mark[v], domain)
        .ok_or(PassageError::Unreachable)?;
    let witness = solver.witness(hit.1);
    debug_assert_eq!(
        witness.iter().map(|&e| u32::from(omega.time(e))).sum::<u32>(),
        hit.0
    );
    Ok(PassageResult {
        value: hit.0,
        witness,
        margin: None,
    })
}

/// The box-crossing time: minimal passage time from the low face to the high
/// face along the first axis, over paths inside the box.
pub fn phi(omega: &Configuration) -> u32 {
    let geo = omega.geometry();
    let sources = geo.face_vertices(0, geo.window().lo()[0]);
    let targets = geo.face_vertices(0, geo.window().hi()[0]);
    shortest_passage(omega, &sources, &targets, |_| true)
        .expect("a box is connected, so a crossing always exists")
        .value
}

/// Evaluate a truncatable query on a growing sequence of windows, sampling
/// the configuration from `plan` on each window.
///
/// Because edge uniforms are keyed to the geometric edge identity, the
/// windows agree on shared edges and the reported values are non-increasing
/// in the margin.
pub fn truncated_time(
    d: usize,
    p: f64,
    plan: RandomPlan,
    query: &PassageQuery,
    margins: &[usize],
) -> Result<Vec<PassageResult>, PassageError> {
    if margins.windows(2).any(|w| w[0] >= w[1]) {
        return Err(PassageError::MarginsNotIncreasing);
    }
    let mut out = Vec::with_capacity(margins.len());
    for &m in margins {
        out.push(truncated_at(d, p, plan, query, m)?);
    }
    Ok(out)
}

/// Evaluate a truncatable query on the window for a single margin.
pub fn truncated_at(
    d: usize,
    p: f64,
    plan: RandomPlan,
    query: &PassageQuery,
    margin: usize,
) -> Result<PassageResult, PassageError> {
    let window = query.window(d, margin)?;
    let geo = Arc::new(BoxGeometry::with_window(query.n, window)?);
    let omega = Configuration::sample(Arc::clone(&geo), p, plan)?;
    let (sources, targets) = query.endpoints(&geo)?;
    let mut res = shortest_passage(&omega, &sources, &targets, |_| true)?;
    res.margin = Some(margin);
    Ok(res)
}
