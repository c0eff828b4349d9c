use itertools::Itertools;
use rayon::prelude::*;

use crate::config::Limits;
use crate::error::{Result, TapError};
use crate::exact::complete_cross_set_with;
use crate::instance::{is_shadow_minimal, EdgeSet, LinkId, LinkSet, Rooted, TapInstance, Vertex};
use crate::scalar::{rat, Rational};

/// One candidate local solution L_i^R = R ∪ C(i,R).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Column {
    pub cross: LinkSet,
    pub links: LinkSet,
    /// c(C) + c(R)/2: cross links are shared with the other side.
    pub cost: Rational,
}

#[derive(Clone, Debug)]
pub struct LambdaFamily {
    pub index: usize,
    pub head: Vertex,
    pub vertices: Vec<Vertex>,
    pub edges: EdgeSet,
    pub columns: Vec<Column>,
}

impl LambdaFamily {
    pub fn cross_candidates(inst: &TapInstance, rooted: &Rooted, i: usize) -> Vec<LinkId> {
        (0..inst.link_count())
            .filter(|&id| {
                let l = inst.link(id);
                l.u != rooted.root
                    && l.v != rooted.root
                    && rooted.branch[l.u] != rooted.branch[l.v]
                    && (rooted.branch[l.u] == Some(i) || rooted.branch[l.v] == Some(i))
            })
            .collect()
    }
}

pub fn enumerate_lambda_families(inst: &TapInstance, root: Vertex, k: usize) -> Result<Vec<LambdaFamily>> {
    let rooted = inst.tree().rooted(root)?;
    enumerate_lambda_families_with(inst, &rooted, k, &Limits::default())
}

pub fn enumerate_lambda_families_with(
    inst: &TapInstance,
    rooted: &Rooted,
    k: usize,
    limits: &Limits,
) -> Result<Vec<LambdaFamily>> {
    if k > limits.lambda_max_k {
        return Err(TapError::SizeLimit { what: "cross-set size k", actual: k, limit: limits.lambda_max_k });
    }
    if rooted.width() > k {
        return Err(TapError::Input(format!(
            "tree rooted at {} is {}-wide, not {k}-wide",
            rooted.root,
            rooted.width()
        )));
    }
    let half = rat(1, 2);
    let mut out = Vec::with_capacity(rooted.branch_count());
    for i in 0..rooted.branch_count() {
        let cands = LambdaFamily::cross_candidates(inst, rooted, i);
        let sets: Vec<LinkSet> = (0..=k.min(cands.len()))
            .flat_map(|s| cands.iter().copied().combinations(s))
            .map(|c| c.into_iter().collect::<LinkSet>())
            .filter(|r| is_shadow_minimal(inst, r))
            .collect();
        let columns: Vec<Option<Column>> = sets
            .into_par_iter()
            .map(|r| match complete_cross_set_with(inst, rooted, i, &r, limits) {
                Ok(c) => {
                    let cost = inst.total_cost(&c) + inst.total_cost(&r) * &half;
                    let links = c.union(&r).copied().collect();
                    Ok(Some(Column { cross: r, links, cost }))
                }
                Err(TapError::Infeasible(_)) => Ok(None),
                Err(e) => Err(e),
            })
            .collect::<Result<_>>()?;
        out.push(LambdaFamily {
            index: i,
            head: rooted.heads[i],
            vertices: rooted.branch_vertices(i),
            edges: rooted.branch_edges(i),
            columns: columns.into_iter().flatten().collect(),
        });
    }
    Ok(out)
}
