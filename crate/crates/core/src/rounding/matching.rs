//! Sparsifying a fractional degree vector to a vertex of Q and the greedy
//! matching on top of it.

use std::collections::BTreeMap;

use crate::error::{ensure, Result};
use crate::instance::Vertex;
use crate::lp::{solve_lp, LpModel, Relation};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchingGraph {
    pub vertices: Vec<Vertex>,
    /// Edges as (min, max) pairs; parallel edges are not allowed.
    pub edges: Vec<(Vertex, Vertex)>,
}

impl MatchingGraph {
    pub fn new(vertices: Vec<Vertex>, edges: Vec<(Vertex, Vertex)>) -> Self {
        let edges = edges.into_iter().map(|(u, v)| (u.min(v), u.max(v))).collect();
        MatchingGraph { vertices, edges }
    }

    /// w(δ(v)) for every vertex.
    pub fn degrees<T: Scalar>(&self, w: &[T]) -> BTreeMap<Vertex, T> {
        let mut d: BTreeMap<Vertex, T> = self.vertices.iter().map(|&v| (v, T::zero())).collect();
        for (&(u, v), x) in self.edges.iter().zip(w) {
            *d.entry(u).or_insert_with(T::zero) += x;
            *d.entry(v).or_insert_with(T::zero) += x;
        }
        d
    }
}

fn primes(count: usize) -> Vec<i64> {
    let mut out = Vec::with_capacity(count);
    let mut c = 2i64;
    while out.len() < count {
        if out.iter().take_while(|&&p| p * p <= c).all(|&p| c % p != 0) {
            out.push(c);
        }
        c += 1;
    }
    out
}

/// A vertex z of Q = {z ≥ 0 : z(δ(v)) = x(δ(v))}: the unique optimum of
/// Σ z_e / p_e with p_e the e-th prime.
pub fn sparsify_to_vertex<T: Scalar>(g: &MatchingGraph, x: &[T]) -> Result<Vec<T>> {
    let mut lp: LpModel<T> = LpModel::new();
    for (j, _) in g.edges.iter().enumerate() {
        lp.add_var(format!("z{j}"), T::zero(), None);
    }
    let deg = g.degrees(x);
    let mut rows: BTreeMap<Vertex, Vec<(usize, T)>> = BTreeMap::new();
    for (j, &(u, v)) in g.edges.iter().enumerate() {
        rows.entry(u).or_default().push((j, T::one()));
        rows.entry(v).or_default().push((j, T::one()));
    }
    for (v, coeffs) in rows {
        lp.add_row(format!("deg{v}"), coeffs, Relation::Eq, deg[&v].clone());
    }
    let ps = primes(g.edges.len());
    lp.set_objective(ps.iter().enumerate().map(|(j, &p)| (j, T::ratio(1, p))).collect());
    let z = solve_lp(&lp)?.x;
    let support = z.iter().filter(|v| v.is_pos()).count();
    ensure!(support <= g.vertices.len().max(deg.len()), "vertex of Q has support {support} > |V|");
    Ok(z)
}

/// Greedy matching by descending weight, ties by (min endpoint, max
/// endpoint); edges of zero weight are skipped. Returns edge indices.
pub fn greedy_matching<T: Scalar>(g: &MatchingGraph, z: &[T]) -> Result<Vec<usize>> {
    let mut order: Vec<usize> = (0..g.edges.len()).filter(|&j| z[j].is_pos()).collect();
    order.sort_by(|&a, &b| z[b].cmp_tol(&z[a]).then(g.edges[a].cmp(&g.edges[b])));
    let mut used = std::collections::BTreeSet::new();
    let mut m = Vec::new();
    for j in order {
        let (u, v) = g.edges[j];
        if !used.contains(&u) && !used.contains(&v) {
            used.insert(u);
            used.insert(v);
            m.push(j);
        }
    }
    let deg = g.degrees(z);
    let lhs = matched_products(g, &m, &deg);
    let mut rhs = T::zero();
    for w in z {
        rhs += &w.mul_ref(w);
    }
    ensure!(lhs.cmp_tol(&rhs).is_ge(), "greedy matching misses Σ z(δu)z(δv) ≥ Σ z²");
    Ok(m)
}

/// Σ_{uv ∈ M} p_u p_v, i.e. E[|M ∩ (A choose 2)|] under independent marginals p.
pub fn matched_products<T: Scalar>(g: &MatchingGraph, m: &[usize], p: &BTreeMap<Vertex, T>) -> T {
    let mut s = T::zero();
    for &j in m {
        let (u, v) = g.edges[j];
        s += &p[&u].mul_ref(&p[&v]);
    }
    s
}
