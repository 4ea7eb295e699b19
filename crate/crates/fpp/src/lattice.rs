//! Box geometry on the integer lattice, canonical edge indexing, 0/1
//! passage-time configurations, and reproducible Bernoulli sampling.
//!
//! Convention used throughout the crate: `p` is the probability of a **zero**
//! passage time. Sampling thresholds a per-edge uniform, `t(e) = 1` iff
//! `U(e) >= p`, so configurations drawn at different `p` from the same
//! [`RandomPlan`] are coupled monotonically: raising `p` never raises any
//! edge time.

use std::io::{self, Write};
use std::sync::Arc;

use thiserror::Error;

/// Index of a vertex within a [`BoxGeometry`], in lexicographic coordinate order.
pub type VertexId = usize;
/// Index of an edge within a [`BoxGeometry`], ordered by (axis, lexicographic base vertex).
pub type EdgeId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("dimension must be at least 2, got {0}")]
    InvalidDimension(usize),
    #[error("side length must be at least 1, got {0}")]
    InvalidSide(usize),
    #[error("probability must lie in [0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("edge id {edge} out of range for geometry with {edges} edges")]
    InvalidEdge { edge: EdgeId, edges: usize },
    #[error("window bounds must satisfy lo <= hi on every axis")]
    InvalidWindow,
    #[error("geometry too large to index")]
    TooLarge,
}

/// An axis-aligned integer box `[lo_1, hi_1] x ... x [lo_d, hi_d]` (bounds inclusive).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl Window {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Result<Self, LatticeError> {
        if lo.is_empty() || lo.len() != hi.len() || lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(LatticeError::InvalidWindow);
        }
        Ok(Window { lo, hi })
    }

    /// The standard box `[0, n]^d`.
    pub fn standard(d: usize, n: usize) -> Self {
        Window {
            lo: vec![0; d],
            hi: vec![n as i64; d],
        }
    }

    pub fn dimension(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn hi(&self) -> &[i64] {
        &self.hi
    }

    pub fn contains(&self, coords: &[i64]) -> bool {
        coords.len() == self.lo.len()
            && coords
                .iter()
                .enumerate()
                .all(|(i, &c)| self.lo[i] <= c && c <= self.hi[i])
    }

    /// Number of lattice points along each axis.
    fn lengths(&self) -> Vec<usize> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&a, &b)| (b - a) as usize + 1)
            .collect()
    }
}

/// The vertex/edge-indexed box `B_n = [0, n]^d` (or a general window for
/// truncated queries), with a canonical bijective edge indexing.
///
/// Vertices are indexed lexicographically by coordinates (first axis most
/// significant). Edges are grouped by axis; within an axis they follow the
/// lexicographic order of their base vertex (the endpoint with the smaller
/// coordinate along that axis).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoxGeometry {
    d: usize,
    n: usize,
    window: Window,
    lens: Vec<usize>,
    strides: Vec<usize>,
    vertex_count: usize,
    edge_offsets: Vec<usize>,
}

impl BoxGeometry {
    /// Build the standard box `B_n = [0, n]^d`.
    pub fn standard(d: usize, n: usize) -> Result<Self, LatticeError> {
        if d < 2 {
            return Err(LatticeError::InvalidDimension(d));
        }
        if n < 1 {
            return Err(LatticeError::InvalidSide(n));
        }
        Self::with_window(n, Window::standard(d, n))
    }

    /// Build a geometry over an arbitrary window. `n` records the nominal
    /// target distance of the query the window was built for; it does not
    /// constrain the window itself.
    pub fn with_window(n: usize, window: Window) -> Result<Self, LatticeError> {
        let d = window.dimension();
        if d < 2 {
            return Err(LatticeError::InvalidDimension(d));
        }
        let lens = window.lengths();
        let mut strides = vec![1usize; d];
        for i in (0..d - 1).rev() {
            strides[i] = strides[i + 1]
                .checked_mul(lens[i + 1])
                .ok_or(LatticeError::TooLarge)?;
        }
        let vertex_count = strides[0].checked_mul(lens[0]).ok_or(LatticeError::TooLarge)?;
        let mut edge_offsets = vec![0usize; d + 1];
        for axis in 0..d {
            let mut count = lens[axis] - 1;
            for (i, &len) in lens.iter().enumerate() {
                if i != axis {
                    count = count.checked_mul(len).ok_or(LatticeError::TooLarge)?;
                }
            }
            edge_offsets[axis + 1] = edge_offsets[axis]
                .checked_add(count)
                .ok_or(LatticeError::TooLarge)?;
        }
        Ok(BoxGeometry {
            d,
            n,
            window,
            lens,
            strides,
            vertex_count,
            edge_offsets,
        })
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    /// Nominal side length / target distance `n`.
    pub fn side(&self) -> usize {
        self.n
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edge_offsets[self.d]
    }

    /// Extent of the window along the first axis (the crossing distance).
    pub fn span(&self) -> usize {
        (self.window.hi[0] - self.window.lo[0]) as usize
    }

    pub fn vertex_id(&self, coords: &[i64]) -> Option<VertexId> {
        if !self.window.contains(coords) {
            return None;
        }
        Some(
            coords
                .iter()
                .enumerate()
                .map(|(i, &c)| (c - self.window.lo[i]) as usize * self.strides[i])
                .sum(),
        )
    }

    pub fn vertex_coords(&self, v: VertexId) -> Vec<i64> {
        debug_assert!(v < self.vertex_count);
        let mut rest = v;
        let mut coords = vec![0i64; self.d];
        for (i, c) in coords.iter_mut().enumerate() {
            *c = self.window.lo[i] + (rest / self.strides[i]) as i64;
            rest %= self.strides[i];
        }
        coords
    }

    /// Edge id of the edge with the given axis and base vertex, if it exists.
    pub fn edge_id(&self, axis: usize, base: &[i64]) -> Option<EdgeId> {
        if axis >= self.d || !self.window.contains(base) || base[axis] == self.window.hi[axis] {
            return None;
        }
        let mut rank = 0usize;
        for (i, &c) in base.iter().enumerate() {
            let radix = if i == axis { self.lens[i] - 1 } else { self.lens[i] };
            rank = rank * radix + (c - self.window.lo[i]) as usize;
        }
        Some(self.edge_offsets[axis] + rank)
    }

    /// Inverse of [`edge_id`](Self::edge_id): axis and base-vertex coordinates.
    pub fn edge_axis_base(&self, e: EdgeId) -> Result<(usize, Vec<i64>), LatticeError> {
        if e >= self.edge_count() {
            return Err(LatticeError::InvalidEdge {
                edge: e,
                edges: self.edge_count(),
            });
        }
        let axis = (0..self.d).find(|&a| e < self.edge_offsets[a + 1]).unwrap();
        let mut rank = e - self.edge_offsets[axis];
        let mut base = vec![0i64; self.d];
        for i in (0..self.d).rev() {
            let radix = if i == axis { self.lens[i] - 1 } else { self.lens[i] };
            base[i] = self.window.lo[i] + (rank % radix) as i64;
            rank /= radix;
        }
        Ok((axis, base))
    }

    /// Both endpoints of an edge, as vertex ids (base first).
    pub fn edge_endpoints(&self, e: EdgeId) -> Result<(VertexId, VertexId), LatticeError> {
        let (axis, base) = self.edge_axis_base(e)?;
        let u = self.vertex_id(&base).unwrap();
        Ok((u, u + self.strides[axis]))
    }

    /// All vertices whose coordinate along `axis` equals `value`.
    pub fn face_vertices(&self, axis: usize, value: i64) -> Vec<VertexId> {
        assert!(axis < self.d, "axis out of range");
        assert!(
            self.window.lo[axis] <= value && value <= self.window.hi[axis],
            "face value outside window"
        );
        let offset = (value - self.window.lo[axis]) as usize * self.strides[axis];
        let mut out = Vec::with_capacity(self.vertex_count / self.lens[axis]);
        // odometer over the remaining axes
        let mut digits = vec![0usize; self.d];
        loop {
            let mut v = offset;
            for (i, &digit) in digits.iter().enumerate() {
                if i != axis {
                    v += digit * self.strides[i];
                }
            }
            out.push(v);
            let mut i = self.d;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if i == axis {
                    continue;
                }
                digits[i] += 1;
                if digits[i] < self.lens[i] {
                    break;
                }
                digits[i] = 0;
            }
        }
    }

    /// Visit every edge as `(edge id, axis, base vertex coordinates)`, in
    /// edge-id order, without allocating per edge.
    pub fn for_each_edge(&self, mut f: impl FnMut(EdgeId, usize, &[i64])) {
        let mut e = 0usize;
        for axis in 0..self.d {
            if self.lens[axis] < 2 {
                continue;
            }
            let mut base: Vec<i64> = self.window.lo.clone();
            loop {
                f(e, axis, &base);
                e += 1;
                let mut i = self.d;
                let mut done = true;
                while i > 0 {
                    i -= 1;
                    let hi = if i == axis {
                        self.window.hi[i] - 1
                    } else {
                        self.window.hi[i]
                    };
                    if base[i] < hi {
                        base[i] += 1;
                        done = false;
                        break;
                    }
                    base[i] = self.window.lo[i];
                }
                if done {
                    break;
                }
            }
        }
        debug_assert_eq!(e, self.edge_count());
    }

    /// Visit the edges incident to `v` as `(edge id, other endpoint)`.
    pub fn visit_incident(&self, v: VertexId, mut f: impl FnMut(EdgeId, VertexId)) {
        let coords = self.vertex_coords(v);
        let mut base = coords.clone();
        for axis in 0..self.d {
            if coords[axis] < self.window.hi[axis] {
                let e = self.edge_id(axis, &coords).unwrap();
                f(e, v + self.strides[axis]);
            }
            if coords[axis] > self.window.lo[axis] {
                base[axis] = coords[axis] - 1;
                let e = self.edge_id(axis, &base).unwrap();
                f(e, v - self.strides[axis]);
                base[axis] = coords[axis];
            }
        }
    }
}

/// Build the standard box `B_n = [0, n]^d`.
pub fn build_geometry(d: usize, n: usize) -> Result<BoxGeometry, LatticeError> {
    BoxGeometry::standard(d, n)
}

/// Identifies one reproducible stream of per-edge uniforms.
///
/// The uniform attached to an edge is a pure function of
/// `(seed, replicate, axis, base vertex)`, so sampling is independent of
/// iteration order and thread count, and geometries with overlapping windows
/// agree on their shared edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomPlan {
    pub seed: u64,
    pub replicate: u64,
}

impl RandomPlan {
    pub fn new(seed: u64, replicate: u64) -> Self {
        RandomPlan { seed, replicate }
    }

    /// The uniform in `[0, 1)` attached to the edge `(axis, base)`.
    pub fn edge_uniform(&self, axis: usize, base: &[i64]) -> f64 {
        let mut h = splitmix64(self.seed);
        h = splitmix64(h ^ self.replicate);
        h = splitmix64(h ^ axis as u64);
        for &c in base {
            h = splitmix64(h ^ c as u64);
        }
        // 53 high bits -> [0, 1)
        (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// An assignment of a passage time in `{0, 1}` to every edge of a geometry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    geometry: Arc<BoxGeometry>,
    times: Vec<u8>,
}

impl Configuration {
    /// Wrap an explicit time vector. Every entry must be 0 or 1.
    pub fn from_times(geometry: Arc<BoxGeometry>, times: Vec<u8>) -> Result<Self, LatticeError> {
        if times.len() != geometry.edge_count() {
            return Err(LatticeError::InvalidEdge {
                edge: times.len(),
                edges: geometry.edge_count(),
            });
        }
        assert!(times.iter().all(|&t| t <= 1), "passage times must be 0 or 1");
        Ok(Configuration { geometry, times })
    }

    /// Draw a configuration: each edge independently gets time 0 with
    /// probability `p`, via `t(e) = 1` iff `U(e) >= p`.
    pub fn sample(
        geometry: Arc<BoxGeometry>,
        p: f64,
        plan: RandomPlan,
    ) -> Result<Self, LatticeError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(LatticeError::InvalidProbability(p));
        }
        let mut times = vec![0u8; geometry.edge_count()];
        geometry.for_each_edge(|e, axis, base| {
            times[e] = u8::from(plan.edge_uniform(axis, base) >= p);
        });
        Ok(Configuration { geometry, times })
    }

    pub fn geometry(&self) -> &Arc<BoxGeometry> {
        &self.geometry
    }

    pub fn times(&self) -> &[u8] {
        &self.times
    }

    pub fn time(&self, e: EdgeId) -> u8 {
        self.times[e]
    }

    /// The configuration that differs from `self` exactly at `e`.
    pub fn flip(&self, e: EdgeId) -> Result<Self, LatticeError> {
        if e >= self.times.len() {
            return Err(LatticeError::InvalidEdge {
                edge: e,
                edges: self.times.len(),
            });
        }
        let mut out = self.clone();
        out.times[e] ^= 1;
        Ok(out)
    }

    /// Dump as CSV lines `edge_id,axis,base_0,...,base_{d-1},time`.
    pub fn write_edge_csv(&self, w: &mut dyn Write) -> io::Result<()> {
        let d = self.geometry.dimension();
        write!(w, "edge_id,axis")?;
        for i in 0..d {
            write!(w, ",base_{i}")?;
        }
        writeln!(w, ",time")?;
        let mut err = None;
        self.geometry.for_each_edge(|e, axis, base| {
            if err.is_some() {
                return;
            }
            let mut line = format!("{e},{axis}");
            for &c in base {
                line.push(',');
                line.push_str(&c.to_string());
            }
            if let Err(io_err) = writeln!(w, "{line},{}", self.times[e]) {
                err = Some(io_err);
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

/// Draw a configuration on `g`; see [`Configuration::sample`].
pub fn sample_configuration(
    g: &Arc<BoxGeometry>,
    p: f64,
    plan: RandomPlan,
) -> Result<Configuration, LatticeError> {
    Configuration::sample(Arc::clone(g), p, plan)
}
