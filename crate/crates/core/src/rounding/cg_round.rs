//! The CG arm: move in-link mass onto up-links, then round the result
//! without loss.

use std::collections::BTreeSet;

use num_traits::Zero;

use crate::config::Limits;
use crate::error::{ensure, Result, TapError};
use crate::exact::brute_force_within;
use crate::instance::{classify_rooted, is_feasible, LinkSet, TapInstance, Vertex};
use crate::lp::separate_cg_with;
use crate::scalar::Rational;

/// Every in-link that is not an up-link, {u,v} with apex a, hands its value
/// to the two up-links {u,a} and {v,a}.
pub fn inlink_to_uplink_transform(inst: &TapInstance, root: Vertex, x: &[Rational]) -> Result<Vec<Rational>> {
    let rooted = inst.tree().rooted(root)?;
    let cls = classify_rooted(inst, &rooted);
    let mut y = x.to_vec();
    for &id in cls.inlinks.difference(&cls.up) {
        if x[id].is_zero() {
            continue;
        }
        let l = inst.link(id);
        let a = rooted.apex(l.u, l.v);
        for end in [l.u, l.v] {
            let s = inst.link_id(end, a).ok_or(TapError::Closure(end.min(a), end.max(a)))?;
            y[s] += &x[id];
        }
        y[id] = Rational::zero();
    }
    Ok(y)
}

/// Links whose endpoints both lie on the path of some link in `ids`.
fn with_shadows(inst: &TapInstance, ids: &LinkSet) -> Result<LinkSet> {
    let mut out = ids.clone();
    for &id in ids {
        let l = inst.link(id);
        let on: BTreeSet<Vertex> = inst.tree().path_vertices(l.u, l.v)?.into_iter().collect();
        out.extend((0..inst.link_count()).filter(|&s| {
            let t = inst.link(s);
            on.contains(&t.u) && on.contains(&t.v)
        }));
    }
    Ok(out)
}

/// c·(2x(L_in) − x(L_up) + x(L_cross)).
pub fn cg_bound(inst: &TapInstance, root: Vertex, x: &[Rational]) -> Result<Rational> {
    let cls = crate::instance::classify(inst, root)?;
    let cx = |ids: &LinkSet| -> Rational { ids.iter().map(|&id| &x[id] * inst.cost(id)).sum() };
    Ok(cx(&cls.inlinks) * Rational::from_integer(2.into()) - cx(&cls.up) + cx(&cls.cross))
}

pub fn cg_round(inst: &TapInstance, root: Vertex, x: &[Rational]) -> Result<LinkSet> {
    cg_round_with(inst, root, x, &Limits::default())
}

/// Exact cheapest cover inside supp(y) and its shadows, which the lossless
/// rounding theorem guarantees costs at most c·y.
pub fn cg_round_with(inst: &TapInstance, root: Vertex, x: &[Rational], limits: &Limits) -> Result<LinkSet> {
    ensure!(inst.shadow_closed(), "CG rounding needs a shadow-closed instance");
    let y = inlink_to_uplink_transform(inst, root, x)?;
    if inst.n() <= limits.cg_max_vertices {
        if let Some(cut) = separate_cg_with(inst, &y, limits.cg_max_vertices)? {
            return Err(TapError::Invariant(format!("transformed point violates CG cut on {:?}", cut.set)));
        }
    }
    let support: LinkSet = (0..inst.link_count()).filter(|&id| !y[id].is_zero()).collect();
    let allowed = with_shadows(inst, &support)?;
    let sol = brute_force_within(inst, &inst.tree().full_edge_set(), Some(&allowed), limits)?;
    ensure!(is_feasible(inst, &sol.links), "CG rounding returned an infeasible set");
    let cy: Rational = y.iter().enumerate().map(|(id, v)| v * inst.cost(id)).sum();
    let bound = cg_bound(inst, root, x)?;
    ensure!(sol.value <= cy, "CG rounding cost {} exceeds y(L) = {cy}", sol.value);
    ensure!(cy <= bound, "y(L) = {cy} exceeds 2x(in) − x(up) + x(cross) = {bound}");
    Ok(sol.links)
}

