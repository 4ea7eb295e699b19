//! Independent shortest-path oracles for cross-checking the deque scheme.
//!
//! Nothing here goes through the deque relaxation path: one oracle
//! enumerates self-avoiding walks outright, the other is a plain
//! binary-heap Dijkstra.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::sync::Arc;

use fpp::lattice::{BoxGeometry, Configuration, VertexId};

/// Minimal passage time by exhaustive enumeration of self-avoiding walks.
pub fn brute_force_min_passage(
    cfg: &Configuration,
    sources: &[VertexId],
    targets: &[VertexId],
) -> Option<u32> {
    let geo = cfg.geometry();
    let mut target_mark = vec![false; geo.vertex_count()];
    for &t in targets {
        target_mark[t] = true;
    }
    let mut visited = vec![false; geo.vertex_count()];
    let mut best = None;
    for &s in sources {
        visited[s] = true;
        walk(cfg, s, 0, &target_mark, &mut visited, &mut best);
        visited[s] = false;
    }
    best
}

fn walk(
    cfg: &Configuration,
    u: VertexId,
    cost: u32,
    target_mark: &[bool],
    visited: &mut Vec<bool>,
    best: &mut Option<u32>,
) {
    if target_mark[u] {
        if best.is_none_or(|b| cost < b) {
            *best = Some(cost);
        }
        return;
    }
    if best.is_some_and(|b| cost >= b) {
        return;
    }
    let geo = cfg.geometry();
    let mut steps = Vec::new();
    geo.visit_incident(u, |e, v| steps.push((e, v)));
    for (e, v) in steps {
        if !visited[v] {
            visited[v] = true;
            walk(cfg, v, cost + u32::from(cfg.time(e)), target_mark, visited, best);
            visited[v] = false;
        }
    }
}

/// Crossing time along the first axis, by self-avoiding-walk enumeration.
pub fn brute_force_phi(cfg: &Configuration) -> u32 {
    let geo = cfg.geometry();
    let sources = geo.face_vertices(0, geo.window().lo()[0]);
    let targets = geo.face_vertices(0, geo.window().hi()[0]);
    brute_force_min_passage(cfg, &sources, &targets).expect("a box is connected")
}

/// Minimal passage time by binary-heap Dijkstra.
pub fn dijkstra_min_passage(
    cfg: &Configuration,
    sources: &[VertexId],
    targets: &[VertexId],
) -> Option<u32> {
    let geo = cfg.geometry();
    let mut target_mark = vec![false; geo.vertex_count()];
    for &t in targets {
        target_mark[t] = true;
    }
    let mut dist = vec![u32::MAX; geo.vertex_count()];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        if dist[s] != 0 {
            dist[s] = 0;
            heap.push(Reverse((0u32, s)));
        }
    }
    while let Some(Reverse((d, u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        if target_mark[u] {
            return Some(d);
        }
        let mut steps = Vec::new();
        geo.visit_incident(u, |e, v| steps.push((e, v)));
        for (e, v) in steps {
            let nd = d + u32::from(cfg.time(e));
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Reverse((nd, v)));
            }
        }
    }
    None
}

/// Crossing time along the first axis, by Dijkstra.
pub fn dijkstra_phi(cfg: &Configuration) -> u32 {
    let geo = cfg.geometry();
    let sources = geo.face_vertices(0, geo.window().lo()[0]);
    let targets = geo.face_vertices(0, geo.window().hi()[0]);
    dijkstra_min_passage(cfg, &sources, &targets).expect("a box is connected")
}

/// Crossing-time counts over every configuration of a small geometry,
/// computed entirely through the walk-enumeration oracle:
/// `counts[k][z]` = number of configurations with `phi = k` and `z`
/// zero-time edges.
pub fn oracle_phi_counts(geo: &Arc<BoxGeometry>) -> Vec<Vec<u64>> {
    let m = geo.edge_count();
    assert!(m <= 16, "walk-enumeration oracle is for tiny boxes");
    let span = geo.window().hi()[0] - geo.window().lo()[0];
    let mut counts = vec![vec![0u64; m + 1]; span as usize + 1];
    for mask in 0u64..(1 << m) {
        let times: Vec<u8> = (0..m).map(|e| ((mask >> e) & 1) as u8).collect();
        let cfg = Configuration::from_times(Arc::clone(geo), times).unwrap();
        let value = brute_force_phi(&cfg) as usize;
        let zeros = m - mask.count_ones() as usize;
        counts[value][zeros] += 1;
    }
    counts
}
