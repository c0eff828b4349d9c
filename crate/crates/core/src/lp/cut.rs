use crate::instance::TapInstance;
use crate::scalar::{Rational, Scalar};

use super::model::{LpModel, Relation};

/// The cut LP: x ∈ [0,1]^L, x(cov(e)) ≥ 1 for every edge, minimize c·x.
pub fn build_cut_lp(inst: &TapInstance) -> LpModel<Rational> {
    build_cut_lp_as(inst)
}

pub fn build_cut_lp_as<T: Scalar>(inst: &TapInstance) -> LpModel<T> {
    let mut lp = LpModel::new();
    for id in 0..inst.link_count() {
        lp.add_var(format!("x{id}"), T::zero(), Some(T::one()));
    }
    for e in 0..inst.tree().edge_count() {
        let cov = inst.cov(e);
        if cov.is_empty() {
            lp.warnings.push(format!("edge {e} is covered by no link; the cut LP is infeasible"));
        }
        lp.add_row(format!("cov{e}"), cov.iter().map(|&id| (id, T::one())).collect(), Relation::Ge, T::one());
    }
    lp.set_objective(
        (0..inst.link_count()).map(|id| (id, T::from_rational(inst.cost(id)))).collect(),
    );
    lp
}
