//! Bounded cost ratio: geometric cost groups, rewiring inside the heaviest
//! group, and the resulting guarantee g(Δ) < 3/2.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::config::Limits;
use crate::decompose::{is_gamma_light, Subtree};
use crate::error::{ensure, Result, TapError};
use crate::instance::{EdgeId, LinkSet, TapInstance, Vertex};
use crate::lp::{solve_k_wide_lp_with, KWideLpSolution};
use crate::rounding::{cg_round_with, derandomize_within, verify_uplink_domination, Arm, Derandomization, RewireScope};
use crate::scalar::{rat, Radical, Rational, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedConfig {
    /// c_max / c_min.
    pub delta: Rational,
    pub p: usize,
    /// 0-based group of every link: group h holds normalised costs in
    /// [1.5^h, 1.5^{h+1}), the last group closed on the right.
    pub group_of: Vec<usize>,
    pub c_min: Rational,
}

impl WeightedConfig {
    pub fn normalized_cost(&self, inst: &TapInstance, id: usize) -> Rational {
        inst.cost(id) / &self.c_min
    }

    pub fn group(&self, h: usize) -> LinkSet {
        self.group_of.iter().enumerate().filter(|(_, &g)| g == h).map(|(id, _)| id).collect()
    }
}

/// p = max(1, ⌈log_{3/2} Δ⌉).
pub fn group_count(delta: &Rational) -> usize {
    let mut p = 0;
    let mut pow = Rational::one();
    while pow < *delta {
        pow *= rat(3, 2);
        p += 1;
    }
    p.max(1)
}

pub fn normalize_and_group(inst: &TapInstance) -> Result<WeightedConfig> {
    let costs: Vec<&Rational> = (0..inst.link_count()).map(|id| inst.cost(id)).collect();
    if costs.iter().any(|c| !c.is_pos()) {
        return Err(TapError::Input("costs must be positive".into()));
    }
    let c_min = costs.iter().min().map_or_else(Rational::one, |c| (*c).clone());
    let c_max = costs.iter().max().map_or_else(Rational::one, |c| (*c).clone());
    let delta = &c_max / &c_min;
    let p = group_count(&delta);
    let group_of = costs
        .iter()
        .map(|c| {
            let v = *c / &c_min;
            let mut h = 0;
            let mut hi = rat(3, 2);
            while v >= hi && h + 1 < p {
                hi *= rat(3, 2);
                h += 1;
            }
            h
        })
        .collect();
    Ok(WeightedConfig { delta, p, group_of, c_min })
}

/// γ-lightness with cost-weighted masses c_ℓ·x_ℓ.
pub fn weighted_gamma_light<T: Scalar>(
    inst: &TapInstance,
    x: &[T],
    subtree: &Subtree,
    e: EdgeId,
    gamma: &Radical,
) -> bool {
    let w: Vec<T> = x.iter().enumerate().map(|(id, v)| v.mul_ref(&T::from_rational(inst.cost(id)))).collect();
    is_gamma_light(inst, &w, subtree, e, gamma)
}

/// 2 − 12pΔ / (12pΔ + √(144p²Δ² − 3)), i.e. 3/2 − g(Δ).
pub fn g_delta_bound(delta: &Rational) -> Result<f64> {
    if *delta < Rational::one() {
        return Err(TapError::Input(format!("Δ = {delta} is below 1")));
    }
    let t = 12.0 * group_count(delta) as f64 * delta.to_f64();
    Ok(2.0 - t / (t + (t * t - 3.0).sqrt()))
}

pub fn weighted_cg_round(inst: &TapInstance, root: Vertex, x: &[Rational]) -> Result<LinkSet> {
    cg_round_with(inst, root, x, &Limits::default())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedReport {
    pub delta: String,
    pub p: usize,
    pub group: usize,
    pub group_mass: Vec<String>,
    pub g_delta: f64,
    pub gains: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct WeightedRewiring {
    pub group: usize,
    pub group_mass: Vec<Rational>,
    pub derandomization: Derandomization,
}

/// Rewire only inside G_j, j = argmax_h x(G_h ∩ L_cross^crit) (smallest h on
/// ties); every executed rewiring must save at least c_min/3.
pub fn weighted_rewire_round(
    inst: &TapInstance,
    config: &WeightedConfig,
    lp: &KWideLpSolution,
) -> Result<WeightedRewiring> {
    let crit = &lp.classification.crit_cross;
    let group_mass: Vec<Rational> = (0..config.p)
        .map(|h| crit.iter().filter(|&&id| config.group_of[id] == h).map(|&id| lp.x[id].clone()).sum())
        .collect();
    let mut j = 0;
    for h in 1..config.p {
        if group_mass[h] > group_mass[j] {
            j = h;
        }
    }
    let total: Rational = lp.x_of(crit);
    ensure!(
        &group_mass[j] * Rational::from_integer(config.p.into()) >= total,
        "x(G_j) below x(L_cross^crit)/p"
    );
    let allowed: LinkSet = crit.iter().copied().filter(|&id| config.group_of[id] == j).collect();
    let d = derandomize_within(inst, lp, &RewireScope { allowed, full_active: false })?;
    let third = &config.c_min * rat(1, 3);
    for g in &d.gains {
        ensure!(*g >= third, "a rewiring saved {g}, less than c_min/3 = {third}");
    }
    Ok(WeightedRewiring { group: j, group_mass, derandomization: d })
}

#[derive(Clone, Debug)]
pub struct WeightedRounding {
    pub solution: LinkSet,
    pub chosen: Arm,
    pub cg_arm: LinkSet,
    pub rewiring: WeightedRewiring,
    pub lp: KWideLpSolution,
    pub config: WeightedConfig,
}

impl WeightedRounding {
    pub fn report(&self) -> WeightedReport {
        WeightedReport {
            delta: self.config.delta.to_string(),
            p: self.config.p,
            group: self.rewiring.group,
            group_mass: self.rewiring.group_mass.iter().map(|m| m.to_string()).collect(),
            g_delta: g_delta_bound(&self.config.delta).unwrap_or(f64::NAN),
            gains: self.rewiring.derandomization.gains.iter().map(|g| g.to_string()).collect(),
        }
    }
}

/// Cost-weighted best of the CG arm and the group rewiring arm.
pub fn weighted_round_k_wide(inst: &TapInstance, root: Vertex, k: usize, limits: &Limits) -> Result<WeightedRounding> {
    ensure!(inst.shadow_closed(), "weighted rounding needs a shadow-closed instance");
    let config = normalize_and_group(inst)?;
    let lp = solve_k_wide_lp_with(inst, root, k, limits)?;
    ensure!(verify_uplink_domination(inst, &lp), "x(L_up) < x(L_cross^no-crit)");
    let opt_star = &lp.objective;
    if !opt_star.is_zero() {
        // c·x restricted to critical cross links, against x(L_cross^crit)
        let crit_cost: Rational = lp.classification.crit_cross.iter().map(|&id| &lp.x[id] * inst.cost(id)).sum();
        let delta_scaled = &config.delta * &config.c_min;
        ensure!(lp.x_of(&lp.classification.crit_cross) * &delta_scaled >= crit_cost, "x(crit)·Δ below c(crit)");
    }
    let cg_arm = cg_round_with(inst, root, &lp.x, limits)?;
    let rewiring = weighted_rewire_round(inst, &config, &lp)?;
    let (ca, cb) = (inst.total_cost(&cg_arm), inst.total_cost(&rewiring.derandomization.state.result));
    let (solution, chosen) = if ca <= cb {
        (cg_arm.clone(), Arm::Cg)
    } else {
        (rewiring.derandomization.state.result.clone(), Arm::Rewire)
    };
    let bound = rat(3, 2) * opt_star;
    ensure!(inst.total_cost(&solution) <= bound, "weighted rounding above 3/2 · OPT*");
    Ok(WeightedRounding { solution, chosen, cg_arm, rewiring, lp, config })
}
