//! Exact covering oracles: branch and bound, the few-leaf solver, shadow
//! shortening and the local completions C(i,R).

use std::cmp::Ordering;

use fixedbitset::FixedBitSet;
use num_traits::Zero;

use crate::config::Limits;
use crate::error::{ensure, Result, TapError};
use crate::instance::{
    is_shadow_minimal, pair_shadow_minimal, shortenable, EdgeId, EdgeSet, LinkId, LinkSet, Rooted,
    TapInstance, Vertex,
};
use crate::scalar::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactSolution {
    pub links: LinkSet,
    pub value: Rational,
    pub optimal: bool,
}

pub fn brute_force_opt(inst: &TapInstance, target: &EdgeSet) -> Result<ExactSolution> {
    brute_force_within(inst, target, None, &Limits::default())
}

/// Minimum-cost cover of `target` using links from `allowed` (all links when
/// `None`). Links whose coverage of the target is dominated by a cheaper or
/// equal, lower-id link are never branched on; among optimal covers over the
/// remaining links the lexicographically smallest id set is returned.
pub fn brute_force_within(
    inst: &TapInstance,
    target: &EdgeSet,
    allowed: Option<&LinkSet>,
    limits: &Limits,
) -> Result<ExactSolution> {
    if inst.n() > limits.exact_max_vertices {
        return Err(TapError::SizeLimit {
            what: "vertices for exact search",
            actual: inst.n(),
            limit: limits.exact_max_vertices,
        });
    }
    if target.is_clear() {
        return Ok(ExactSolution { links: LinkSet::new(), value: Rational::zero(), optimal: true });
    }
    let m = inst.link_count();
    let restricted: Vec<Option<EdgeSet>> = (0..m)
        .map(|id| {
            if allowed.is_some_and(|a| !a.contains(&id)) {
                return None;
            }
            let mut p = inst.path(id).clone();
            p.intersect_with(target);
            (!p.is_clear()).then_some(p)
        })
        .collect();
    let mut cands: Vec<LinkId> = (0..m).filter(|&id| restricted[id].is_some()).collect();
    // dominance: keep ℓ unless some ℓ' covers a superset of ℓ's target edges
    // at no larger cost (ties in both go to the smaller id)
    let dominated = |a: LinkId, b: LinkId| {
        let (pa, pb) = (restricted[a].as_ref().unwrap(), restricted[b].as_ref().unwrap());
        if !pa.is_subset(pb) {
            return false;
        }
        match inst.cost(b).cmp(inst.cost(a)) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => pa != pb || b < a,
        }
    };
    let keep: Vec<bool> = cands.iter().map(|&a| !cands.iter().any(|&b| b != a && dominated(a, b))).collect();
    cands = cands.into_iter().zip(keep).filter(|&(_, k)| k).map(|(a, _)| a).collect();

    let tree = inst.tree();
    let mut edge_order: Vec<EdgeId> = target.ones().collect();
    edge_order.sort_by(|&a, &b| tree.edge_depth(b).cmp(&tree.edge_depth(a)).then(a.cmp(&b)));
    let mut by_edge: Vec<Vec<LinkId>> = vec![Vec::new(); tree.edge_count()];
    for &id in &cands {
        for e in restricted[id].as_ref().unwrap().ones() {
            by_edge[e].push(id);
        }
    }
    if let Some(&e) = edge_order.iter().find(|&&e| by_edge[e].is_empty()) {
        return Err(TapError::Infeasible(format!("edge {e} has no covering link")));
    }
    let min_cost: Vec<Option<Rational>> = by_edge
        .iter()
        .map(|ls| ls.iter().map(|&id| inst.cost(id).clone()).min())
        .collect();

    let mut search = Search {
        inst,
        restricted: &restricted,
        by_edge: &by_edge,
        min_cost: &min_cost,
        edge_order: &edge_order,
        forbidden: FixedBitSet::with_capacity(m),
        chosen: Vec::new(),
        best: None,
    };
    search.run(target.clone(), Rational::zero());
    let (value, mut ids) = search.best.ok_or_else(|| TapError::Infeasible("no cover exists".into()))?;
    ids.sort_unstable();
    Ok(ExactSolution { links: ids.into_iter().collect(), value, optimal: true })
}

struct Search<'a> {
    inst: &'a TapInstance,
    restricted: &'a [Option<EdgeSet>],
    by_edge: &'a [Vec<LinkId>],
    min_cost: &'a [Option<Rational>],
    edge_order: &'a [EdgeId],
    forbidden: FixedBitSet,
    chosen: Vec<LinkId>,
    best: Option<(Rational, Vec<LinkId>)>,
}

impl Search<'_> {
    fn offer(&mut self, cost: Rational) {
        let mut ids = self.chosen.clone();
        ids.sort_unstable();
        let better = match &self.best {
            None => true,
            Some((c, b)) => cost < *c || (cost == *c && ids < *b),
        };
        if better {
            self.best = Some((cost, ids));
        }
    }

    fn run(&mut self, uncovered: EdgeSet, cost: Rational) {
        let Some(&e) = self.edge_order.iter().find(|&&e| uncovered.contains(e)) else {
            self.offer(cost);
            return;
        };
        // every uncovered edge must keep a usable link
        for &f in self.edge_order {
            if uncovered.contains(f) && self.by_edge[f].iter().all(|&id| self.forbidden.contains(id)) {
                return;
            }
        }
        let options: Vec<LinkId> =
            self.by_edge[e].iter().copied().filter(|&id| !self.forbidden.contains(id)).collect();
        let mut banned = Vec::new();
        for id in options {
            let next_cost = cost.clone() + self.inst.cost(id);
            let mut rest = uncovered.clone();
            rest.difference_with(self.restricted[id].as_ref().unwrap());
            if let Some((best, _)) = &self.best {
                let bound = match self.edge_order.iter().find(|&&f| rest.contains(f)) {
                    Some(&f) => next_cost.clone() + self.min_cost[f].as_ref().unwrap(),
                    None => next_cost.clone(),
                };
                if bound > *best {
                    // options are not sorted by cost, so keep scanning
                    self.forbidden.insert(id);
                    banned.push(id);
                    continue;
                }
            }
            self.chosen.push(id);
            self.run(rest, next_cost);
            self.chosen.pop();
            // later branches exclude earlier choices for this edge
            self.forbidden.insert(id);
            banned.push(id);
        }
        for id in banned {
            self.forbidden.set(id, false);
        }
    }
}

/// Exact optimum after contracting `contracted`, provided the contracted tree
/// has few leaves.
pub fn solve_few_leaf(inst: &TapInstance, contracted: &EdgeSet) -> Result<ExactSolution> {
    solve_few_leaf_with(inst, contracted, &Limits::default())
}

pub fn solve_few_leaf_with(inst: &TapInstance, contracted: &EdgeSet, limits: &Limits) -> Result<ExactSolution> {
    let leaves = contracted_leaves(inst, contracted);
    if leaves > limits.few_leaf_max_leaves {
        return Err(TapError::SizeLimit {
            what: "leaves of the residual tree",
            actual: leaves,
            limit: limits.few_leaf_max_leaves,
        });
    }
    let mut residual = inst.tree().full_edge_set();
    residual.difference_with(contracted);
    brute_force_within(inst, &residual, None, limits)
}

/// Number of leaves of T/contracted.
pub fn contracted_leaves(inst: &TapInstance, contracted: &EdgeSet) -> usize {
    let tree = inst.tree();
    let mut uf: Vec<Vertex> = (0..tree.n()).collect();
    fn find(uf: &mut [Vertex], mut v: Vertex) -> Vertex {
        while uf[v] != v {
            uf[v] = uf[uf[v]];
            v = uf[v];
        }
        v
    }
    for e in contracted.ones() {
        let (u, v) = tree.edge(e);
        let (a, b) = (find(&mut uf, u), find(&mut uf, v));
        uf[a] = b;
    }
    let mut deg = vec![0usize; tree.n()];
    for (e, &(u, v)) in tree.edges().iter().enumerate() {
        if !contracted.contains(e) {
            deg[find(&mut uf, u)] += 1;
            deg[find(&mut uf, v)] += 1;
        }
    }
    deg.iter().filter(|&&d| d == 1).count()
}

/// The shadow spanning exactly the edges `d` (which must form a path).
fn shadow_on(inst: &TapInstance, d: &EdgeSet) -> Result<LinkId> {
    let tree = inst.tree();
    let mut count = std::collections::BTreeMap::<Vertex, usize>::new();
    for e in d.ones() {
        let (u, v) = tree.edge(e);
        *count.entry(u).or_default() += 1;
        *count.entry(v).or_default() += 1;
    }
    let ends: Vec<Vertex> = count.iter().filter(|&(_, &c)| c == 1).map(|(&v, _)| v).collect();
    ensure!(ends.len() == 2, "shortened part is not a path");
    inst.link_id(ends[0], ends[1]).ok_or(TapError::Closure(ends[0], ends[1]))
}

/// Shorten links outside `frozen` until the whole set is pairwise
/// shadow-minimal. Each step replaces a link by the shadow spanning its
/// private part of the pair's union (or drops it when that part is empty).
pub fn minimalize_frozen(inst: &TapInstance, frozen: &LinkSet, sol: &LinkSet) -> Result<LinkSet> {
    let mut cur: LinkSet = sol.clone();
    'outer: loop {
        let ids: Vec<LinkId> = cur.iter().copied().collect();
        for &a in &ids {
            if frozen.contains(&a) {
                continue;
            }
            for &b in &ids {
                if a == b || !shortenable(inst, a, b) {
                    continue;
                }
                let mut d = inst.path(a).clone();
                d.difference_with(inst.path(b));
                cur.remove(&a);
                if !d.is_clear() {
                    cur.insert(shadow_on(inst, &d)?);
                }
                continue 'outer;
            }
        }
        break;
    }
    ensure!(is_shadow_minimal(inst, &cur), "could not make the set shadow-minimal without touching frozen links");
    Ok(cur)
}

pub fn shadow_minimalize(inst: &TapInstance, sol: &LinkSet) -> Result<LinkSet> {
    minimalize_frozen(inst, &LinkSet::new(), sol)
}

/// C(i,R): a cheapest set of links inside V_i that covers what R leaves of
/// E_i and keeps R ∪ C shadow-minimal.
pub fn complete_cross_set(inst: &TapInstance, rooted: &Rooted, i: usize, r: &LinkSet) -> Result<LinkSet> {
    complete_cross_set_with(inst, rooted, i, r, &Limits::default())
}

pub fn complete_cross_set_with(
    inst: &TapInstance,
    rooted: &Rooted,
    i: usize,
    r: &LinkSet,
    limits: &Limits,
) -> Result<LinkSet> {
    let inside = |id: LinkId| {
        let l = inst.link(id);
        rooted.in_branch(l.u, i) && rooted.in_branch(l.v, i)
    };
    let cands: LinkSet = (0..inst.link_count())
        .filter(|&id| inside(id) && r.iter().all(|&x| pair_shadow_minimal(inst, id, x)))
        .collect();
    let mut target = rooted.branch_edges(i);
    target.difference_with(&inst.covered_edges(r));
    let sol = brute_force_within(inst, &target, Some(&cands), limits)?;
    let all: LinkSet = sol.links.union(r).copied().collect();
    let fixed = minimalize_frozen(inst, r, &all)?;
    Ok(fixed.difference(r).copied().collect())
}
