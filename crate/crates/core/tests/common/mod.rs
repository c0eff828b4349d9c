//! Independent oracles for the integration tests: naive tree paths, cover
//! checks and subset enumeration, written without the library's helpers.
#![allow(dead_code)]

use std::collections::VecDeque;

use num_traits::Zero;
use tap_core::{LinkSet, Rational, TapInstance, Vertex};

/// Edge ids on the u–v path, by BFS over the raw edge list.
pub fn naive_path(inst: &TapInstance, u: Vertex, v: Vertex) -> Vec<usize> {
    let edges = inst.tree().edges();
    let n = inst.n();
    let mut adj: Vec<Vec<(Vertex, usize)>> = vec![Vec::new(); n];
    for (e, &(a, b)) in edges.iter().enumerate() {
        adj[a].push((b, e));
        adj[b].push((a, e));
    }
    let mut prev: Vec<Option<(Vertex, usize)>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[u] = true;
    let mut queue = VecDeque::from([u]);
    while let Some(a) = queue.pop_front() {
        for &(b, e) in &adj[a] {
            if !seen[b] {
                seen[b] = true;
                prev[b] = Some((a, e));
                queue.push_back(b);
            }
        }
    }
    let mut out = Vec::new();
    let mut cur = v;
    while let Some((p, e)) = prev[cur] {
        out.push(e);
        cur = p;
    }
    out
}

pub fn link_masks(inst: &TapInstance) -> Vec<u64> {
    assert!(inst.tree().edge_count() <= 64);
    inst.links().iter().map(|l| naive_path(inst, l.u, l.v).iter().fold(0u64, |m, &e| m | 1 << e)).collect()
}

pub fn full_mask(inst: &TapInstance) -> u64 {
    let m = inst.tree().edge_count();
    if m == 64 { u64::MAX } else { (1u64 << m) - 1 }
}

pub fn naive_covers(inst: &TapInstance, sol: &LinkSet) -> bool {
    let masks = link_masks(inst);
    sol.iter().fold(0u64, |m, &id| m | masks[id]) == full_mask(inst)
}

/// Cost of every subset of links (bit i = link i) and whether it covers T.
/// Only for small link counts.
pub fn enumerate_subsets(inst: &TapInstance) -> (Vec<u64>, Vec<Rational>) {
    let m = inst.link_count();
    assert!(m <= 22, "{m} links is too many to enumerate");
    let masks = link_masks(inst);
    let mut cover = vec![0u64; 1 << m];
    let mut cost = vec![Rational::zero(); 1 << m];
    for s in 1usize..1 << m {
        let low = s.trailing_zeros() as usize;
        let rest = s & (s - 1);
        cover[s] = cover[rest] | masks[low];
        cost[s] = &cost[rest] + inst.cost(low);
    }
    (cover, cost)
}

/// Minimum cover cost by enumerating every subset.
pub fn naive_opt(inst: &TapInstance) -> Rational {
    let (cover, cost) = enumerate_subsets(inst);
    let full = full_mask(inst);
    cover.iter().zip(&cost).filter(|(c, _)| **c == full).map(|(_, c)| c.clone()).min().expect("instance is feasible")
}

/// Non-root vertices of degree one.
pub fn non_root_leaves(inst: &TapInstance, root: Vertex) -> usize {
    let mut deg = vec![0usize; inst.n()];
    for &(a, b) in inst.tree().edges() {
        deg[a] += 1;
        deg[b] += 1;
    }
    (0..inst.n()).filter(|&v| v != root && deg[v] == 1).count()
}

/// a ≤ √(p/q)·b for a, b ≥ 0, by squaring.
pub fn le_sqrt_times(a: &Rational, p: i64, q: i64, b: &Rational) -> bool {
    a * a * Rational::from_integer(q.into()) <= b * b * Rational::from_integer(p.into())
}
