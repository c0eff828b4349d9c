//! The k-wide LP. x is eliminated: every link is written as the λ-mass of
//! the columns containing it, taken in the family that owns it (the lower
//! index for cross links).

use std::collections::BTreeMap;

use crate::config::Limits;
use crate::error::{ensure, Result};
use crate::instance::{classify_rooted, LinkClassification, LinkId, LinkSet, TapInstance, Vertex};
use crate::lp::cg::{separate_cg_with, CgCut};
use crate::lp::lambda::{enumerate_lambda_families_with, LambdaFamily};
use crate::lp::{solve_lp, LpModel, Relation};
use crate::scalar::Rational;

#[derive(Clone, Debug)]
pub struct KWideLpSolution {
    pub root: Vertex,
    pub k: usize,
    pub families: Vec<LambdaFamily>,
    /// λ per family, aligned with `families[i].columns`.
    pub lambda: Vec<Vec<Rational>>,
    pub x: Vec<Rational>,
    pub objective: Rational,
    pub cuts: Vec<CgCut>,
    pub classification: LinkClassification,
    pub model: LpModel<Rational>,
}

impl KWideLpSolution {
    pub fn x_of<'a>(&self, ids: impl IntoIterator<Item = &'a LinkId>) -> Rational {
        ids.into_iter().map(|&id| &self.x[id]).sum()
    }

    /// The mixture of family i's columns reproduces x on cov(E_i),
    /// and every family's λ sums to one.
    pub fn check_consistency(&self, inst: &TapInstance) -> Result<()> {
        for (fam, lam) in self.families.iter().zip(&self.lambda) {
            let total: Rational = lam.iter().sum();
            ensure!(total == Rational::from_integer(1.into()), "λ of family {} sums to {total}", fam.index);
            ensure!(lam.iter().all(|l| *l >= Rational::from_integer(0.into())), "negative λ");
            let cov: LinkSet = inst.cover_set(&fam.edges);
            for id in cov {
                let mix: Rational =
                    fam.columns.iter().zip(lam).filter(|(c, _)| c.links.contains(&id)).map(|(_, l)| l).sum();
                ensure!(mix == self.x[id], "family {} disagrees with x on link {id}", fam.index);
            }
        }
        Ok(())
    }
}

pub fn solve_k_wide_lp(inst: &TapInstance, root: Vertex, k: usize) -> Result<KWideLpSolution> {
    solve_k_wide_lp_with(inst, root, k, &Limits::default())
}

pub fn solve_k_wide_lp_with(inst: &TapInstance, root: Vertex, k: usize, limits: &Limits) -> Result<KWideLpSolution> {
    let rooted = inst.tree().rooted(root)?;
    let families = enumerate_lambda_families_with(inst, &rooted, k, limits)?;
    let classification = classify_rooted(inst, &rooted);

    // variable layout and, per link, the owning family's columns containing it
    let mut offset = Vec::with_capacity(families.len());
    let mut lp: LpModel<Rational> = LpModel::new();
    for fam in &families {
        offset.push(lp.vars.len());
        for (j, _) in fam.columns.iter().enumerate() {
            lp.add_var(format!("l{}_{}", fam.index, j), Rational::from_integer(0.into()), None);
        }
    }
    let owner = |id: LinkId| -> usize {
        let l = inst.link(id);
        [l.u, l.v].iter().filter_map(|&v| rooted.branch[v]).min().expect("link touches a principal subtree")
    };
    let vars_with = |i: usize, id: LinkId| -> Vec<usize> {
        families[i].columns.iter().enumerate().filter(|(_, c)| c.links.contains(&id)).map(|(j, _)| offset[i] + j).collect()
    };
    let one = Rational::from_integer(1.into());
    for (i, fam) in families.iter().enumerate() {
        let coeffs = (0..fam.columns.len()).map(|j| (offset[i] + j, one.clone())).collect();
        lp.add_row(format!("convex{i}"), coeffs, Relation::Eq, one.clone());
    }
    for &id in &classification.cross {
        let l = inst.link(id);
        let (a, b) = (rooted.branch[l.u].unwrap(), rooted.branch[l.v].unwrap());
        let mut coeffs: BTreeMap<usize, Rational> = BTreeMap::new();
        for v in vars_with(a, id) {
            *coeffs.entry(v).or_insert_with(|| Rational::from_integer(0.into())) += &one;
        }
        for v in vars_with(b, id) {
            *coeffs.entry(v).or_insert_with(|| Rational::from_integer(0.into())) -= &one;
        }
        if !coeffs.is_empty() {
            lp.add_row(format!("agree{id}"), coeffs.into_iter().collect(), Relation::Eq, Rational::from_integer(0.into()));
        }
    }
    let obj = families
        .iter()
        .enumerate()
        .flat_map(|(i, fam)| fam.columns.iter().enumerate().map(move |(j, c)| (i, j, c)))
        .map(|(i, j, c)| (offset[i] + j, c.cost.clone()))
        .collect();
    lp.set_objective(obj);

    let mut cuts = Vec::new();
    loop {
        let sol = solve_lp(&lp)?;
        let mut x = vec![Rational::from_integer(0.into()); inst.link_count()];
        for (id, xi) in x.iter_mut().enumerate() {
            for v in vars_with(owner(id), id) {
                *xi += &sol.x[v];
            }
        }
        match separate_cg_with(inst, &x, limits.cg_max_vertices)? {
            Some(cut) => {
                let mut coeffs: BTreeMap<usize, Rational> = BTreeMap::new();
                for (&id, &m) in &cut.multiplicities {
                    for v in vars_with(owner(id), id) {
                        *coeffs.entry(v).or_insert_with(|| Rational::from_integer(0.into())) +=
                            Rational::from_integer(m.into());
                    }
                }
                ensure!(!coeffs.is_empty() || cut.rhs <= Rational::from_integer(0.into()), "CG cut with no columns");
                lp.add_row(format!("cg{}", cuts.len()), coeffs.into_iter().collect(), Relation::Ge, cut.rhs.clone());
                cuts.push(cut);
            }
            None => {
                let lambda = families
                    .iter()
                    .enumerate()
                    .map(|(i, fam)| sol.x[offset[i]..offset[i] + fam.columns.len()].to_vec())
                    .collect();
                let out = KWideLpSolution {
                    root,
                    k,
                    families,
                    lambda,
                    objective: sol.value.clone(),
                    x,
                    cuts,
                    classification,
                    model: lp,
                };
                let cx: Rational = out.x.iter().enumerate().map(|(id, v)| v * inst.cost(id)).sum();
                ensure!(out.objective == cx, "objective {} differs from c·x = {cx}", out.objective);
                out.check_consistency(inst)?;
                return Ok(out);
            }
        }
    }
}
