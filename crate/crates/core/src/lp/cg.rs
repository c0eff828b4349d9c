//! {0,½}-Chvátal–Gomory cuts over odd tree cuts δ_E(S), separated by
//! enumerating vertex sets.

use std::collections::BTreeMap;

use crate::config::Limits;
use crate::error::{Result, TapError};
use crate::instance::{EdgeId, LinkId, LinkSet, TapInstance, Vertex};
use crate::lp::{build_cut_lp, solve_lp, LpModel, Relation};
use crate::scalar::{rat, Rational, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CgCut {
    /// S, ascending; the canonical side never contains vertex n−1.
    pub set: Vec<Vertex>,
    pub boundary: Vec<EdgeId>,
    /// ⌈|P_ℓ ∩ δ(S)|/2⌉ for every link meeting the boundary.
    pub multiplicities: BTreeMap<LinkId, u32>,
    pub rhs: Rational,
}

impl CgCut {
    pub fn lhs<T: Scalar>(&self, x: &[T]) -> T {
        let mut s = T::zero();
        for (&id, &m) in &self.multiplicities {
            s += &x[id].mul_ref(&T::from_int(m as i64));
        }
        s
    }

    pub fn satisfied_by<T: Scalar>(&self, x: &[T]) -> bool {
        self.lhs(x).cmp_tol(&T::from_rational(&self.rhs)).is_ge()
    }

    pub fn satisfied_by_set(&self, sol: &LinkSet) -> bool {
        let lhs: u32 = sol.iter().filter_map(|id| self.multiplicities.get(id)).sum();
        Rational::from_integer(lhs.into()) >= self.rhs
    }
}

fn incidence_masks(inst: &TapInstance) -> Vec<u64> {
    let mut inc = vec![0u64; inst.n()];
    for (e, &(u, v)) in inst.tree().edges().iter().enumerate() {
        inc[u] |= 1 << e;
        inc[v] |= 1 << e;
    }
    inc
}

fn path_mask(inst: &TapInstance, id: LinkId) -> u64 {
    inst.path(id).ones().fold(0u64, |m, e| m | (1 << e))
}

/// The CG cut of S, or `None` when |δ(S)| is even.
pub fn cg_cut(inst: &TapInstance, set: &[Vertex]) -> Option<CgCut> {
    let tree = inst.tree();
    let inside: Vec<bool> = (0..tree.n()).map(|v| set.contains(&v)).collect();
    let boundary: Vec<EdgeId> =
        (0..tree.edge_count()).filter(|&e| { let (u, v) = tree.edge(e); inside[u] != inside[v] }).collect();
    if boundary.len() % 2 == 0 {
        return None;
    }
    let mut multiplicities = BTreeMap::new();
    for id in 0..inst.link_count() {
        let hits = boundary.iter().filter(|&&e| inst.covers(id, e)).count() as u32;
        if hits > 0 {
            multiplicities.insert(id, hits.div_ceil(2));
        }
    }
    let mut set = set.to_vec();
    set.sort_unstable();
    let rhs = rat(boundary.len() as i64 + 1, 2);
    Some(CgCut { set, boundary, multiplicities, rhs })
}

pub fn separate_cg<T: Scalar>(inst: &TapInstance, x: &[T]) -> Result<Option<CgCut>> {
    separate_cg_with(inst, x, Limits::default().cg_max_vertices)
}

/// A most violated CG cut (ties: smallest canonical S read as a bitmask).
pub fn separate_cg_with<T: Scalar>(inst: &TapInstance, x: &[T], max_n: usize) -> Result<Option<CgCut>> {
    let n = inst.n();
    if n > max_n.min(64) {
        return Err(TapError::SizeLimit { what: "vertices for CG enumeration", actual: n, limit: max_n.min(64) });
    }
    if n < 2 {
        return Ok(None);
    }
    let support: Vec<LinkId> = (0..inst.link_count()).filter(|&id| x[id].is_pos()).collect();
    let masks: Vec<u64> = support.iter().map(|&id| path_mask(inst, id)).collect();
    let inc = incidence_masks(inst);
    let xs: Vec<T> = support.iter().map(|&id| x[id].clone()).collect();
    let scaled = T::scaled_ints(&xs);

    let mut best_mask: Option<u64> = None;
    let mut best_int: i128 = 0;
    let mut best_gen: Option<T> = None;
    let mut delta = 0u64;
    let free = n - 1;
    for i in 1u64..(1u64 << free) {
        delta ^= inc[i.trailing_zeros() as usize];
        let s = i ^ (i >> 1);
        let d = delta.count_ones() as i128;
        if d % 2 == 0 {
            continue;
        }
        match &scaled {
            Some((nums, den)) => {
                let mut lhs2 = 0i128;
                for (j, &pm) in masks.iter().enumerate() {
                    let hits = (pm & delta).count_ones() as i128;
                    if hits > 0 {
                        lhs2 += 2 * ((hits + 1) / 2) * nums[j];
                    }
                }
                let viol = (d + 1) * den - lhs2;
                if viol > best_int || (viol == best_int && viol > 0 && best_mask.is_some_and(|b| s < b)) {
                    best_int = viol;
                    best_mask = Some(s);
                }
            }
            None => {
                let mut lhs = T::zero();
                for (j, &pm) in masks.iter().enumerate() {
                    let hits = (pm & delta).count_ones() as i64;
                    if hits > 0 {
                        lhs += &xs[j].mul_ref(&T::from_int((hits + 1) / 2));
                    }
                }
                let viol = T::ratio(d as i64 + 1, 2) - lhs;
                if !viol.is_pos() {
                    continue;
                }
                let better = match &best_gen {
                    None => true,
                    Some(b) => match viol.cmp_tol(b) {
                        std::cmp::Ordering::Greater => true,
                        std::cmp::Ordering::Equal => best_mask.is_some_and(|bm| s < bm),
                        std::cmp::Ordering::Less => false,
                    },
                };
                if better {
                    best_gen = Some(viol);
                    best_mask = Some(s);
                }
            }
        }
    }
    Ok(best_mask.map(|s| {
        let set: Vec<Vertex> = (0..free).filter(|&v| s >> v & 1 == 1).collect();
        cg_cut(inst, &set).expect("odd boundary")
    }))
}

#[derive(Clone, Debug)]
pub struct CgLpSolution {
    pub value: Rational,
    pub x: Vec<Rational>,
    pub cuts: Vec<CgCut>,
}

/// Cut LP strengthened by CG cuts until separation finds nothing.
pub fn solve_cg_lp(inst: &TapInstance, limits: &Limits) -> Result<CgLpSolution> {
    let mut lp: LpModel<Rational> = build_cut_lp(inst);
    let mut cuts = Vec::new();
    loop {
        let sol = solve_lp(&lp)?;
        match separate_cg_with(inst, &sol.x, limits.cg_max_vertices)? {
            None => return Ok(CgLpSolution { value: sol.value, x: sol.x, cuts }),
            Some(cut) => {
                let coeffs =
                    cut.multiplicities.iter().map(|(&id, &m)| (id, Rational::from_integer(m.into()))).collect();
                lp.add_row(format!("cg{}", cuts.len()), coeffs, Relation::Ge, cut.rhs.clone());
                cuts.push(cut);
            }
        }
    }
}
