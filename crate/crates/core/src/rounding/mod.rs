//! Rounding the k-wide LP: the CG arm, the rewiring arm, best of both.

mod calculus;
mod cg_round;
mod matching;
mod rewire;

pub use calculus::{bound_calculus, BoundKind, CalculusResult};
pub use cg_round::{cg_bound, cg_round, cg_round_with, inlink_to_uplink_transform};
pub use matching::{greedy_matching, matched_products, sparsify_to_vertex, MatchingGraph};
pub use rewire::{
    active_vertices, derandomize_within, derandomized_round, rewire, sample_columns, sample_locals, Derandomization,
    MatchingCertificate, RewireScope, RewireState,
};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::config::Limits;
use crate::decompose::{InnerSolution, KWideSolver};
use crate::error::{ensure, Result};
use crate::instance::{LinkSet, TapInstance, Vertex};
use crate::lp::{solve_cg_lp, solve_k_wide_lp_with, KWideLpSolution};
use crate::scalar::{rat, Radical, Rational};

/// Shares of OPT* = c·x carried by each link class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AlphaProfile {
    pub alpha_in: String,
    pub alpha_up: String,
    pub alpha_cross: String,
    pub alpha_crit: String,
    pub alpha_nocrit: String,
}

impl AlphaProfile {
    pub fn values(inst: &TapInstance, lp: &KWideLpSolution) -> [Rational; 5] {
        let c = &lp.classification;
        let total = &lp.objective;
        let share = |ids: &LinkSet| -> Rational {
            if total.is_zero() {
                return Rational::zero();
            }
            ids.iter().map(|&id| &lp.x[id] * inst.cost(id)).sum::<Rational>() / total
        };
        [share(&c.inlinks), share(&c.up), share(&c.cross), share(&c.crit_cross), share(&c.nocrit_cross)]
    }

    pub fn new(inst: &TapInstance, lp: &KWideLpSolution) -> Result<Self> {
        let [a_in, a_up, a_cross, a_crit, a_nocrit] = Self::values(inst, lp);
        if !lp.objective.is_zero() {
            ensure!(&a_in + &a_cross == Rational::one(), "α_in + α_cross ≠ 1");
            ensure!(&a_crit + &a_nocrit == a_cross, "α_crit + α_nocrit ≠ α_cross");
            ensure!(a_up <= a_in, "α_up > α_in");
        }
        Ok(AlphaProfile {
            alpha_in: a_in.to_string(),
            alpha_up: a_up.to_string(),
            alpha_cross: a_cross.to_string(),
            alpha_crit: a_crit.to_string(),
            alpha_nocrit: a_nocrit.to_string(),
        })
    }
}

/// x(L_up) ≥ x(L_cross^no-crit).
pub fn verify_uplink_domination(_inst: &TapInstance, lp: &KWideLpSolution) -> bool {
    let c = &lp.classification;
    lp.x_of(&c.up) >= lp.x_of(&c.nocrit_cross)
}

/// Number of leaves of T other than the root.
pub fn leaf_count(inst: &TapInstance, root: Vertex) -> usize {
    let t = inst.tree();
    (0..t.n()).filter(|&v| v != root && t.degree(v) == 1).count()
}

/// 2·OPT* − x(L_up) − x(L_cross^no-crit) ≥ K: each leaf needs a unit of
/// x on its incident links, and a link meets at most two leaves.
pub fn verify_leaf_inequality(inst: &TapInstance, lp: &KWideLpSolution) -> bool {
    let c = &lp.classification;
    let lhs = &lp.objective * Rational::from_integer(2.into()) - lp.x_of(&c.up) - lp.x_of(&c.nocrit_cross);
    lhs >= Rational::from_integer(leaf_count(inst, lp.root).into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    Cg,
    Rewire,
}

#[derive(Clone, Debug)]
pub struct KWideRounding {
    pub solution: LinkSet,
    pub chosen: Arm,
    pub cg_arm: LinkSet,
    pub rewiring: Derandomization,
    pub lp: KWideLpSolution,
    pub alpha: AlphaProfile,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundingReport {
    pub lp_value: String,
    pub alpha: AlphaProfile,
    pub cg_arm_cost: String,
    pub rewire_arm_cost: String,
    pub matching_size: usize,
    pub rewirings: usize,
    pub chosen: Arm,
    pub seed: Option<u64>,
}

impl KWideRounding {
    pub fn report(&self, inst: &TapInstance) -> RoundingReport {
        RoundingReport {
            lp_value: self.lp.objective.to_string(),
            alpha: self.alpha.clone(),
            cg_arm_cost: inst.total_cost(&self.cg_arm).to_string(),
            rewire_arm_cost: inst.total_cost(&self.rewiring.state.result).to_string(),
            matching_size: self.rewiring.certificate.matching.len(),
            rewirings: self.rewiring.state.matching.len(),
            chosen: self.chosen,
            seed: None,
        }
    }
}

pub fn round_k_wide(inst: &TapInstance, root: Vertex, k: usize) -> Result<KWideRounding> {
    round_k_wide_with(inst, root, k, &Limits::default())
}

/// Solve the k-wide LP and return the cheaper of the two arms (the CG arm on
/// ties).
pub fn round_k_wide_with(inst: &TapInstance, root: Vertex, k: usize, limits: &Limits) -> Result<KWideRounding> {
    ensure!(inst.shadow_closed(), "k-wide rounding needs a shadow-closed instance");
    let lp = solve_k_wide_lp_with(inst, root, k, limits)?;
    let alpha = AlphaProfile::new(inst, &lp)?;
    ensure!(verify_uplink_domination(inst, &lp), "x(L_up) < x(L_cross^no-crit)");
    let cg_arm = cg_round_with(inst, root, &lp.x, limits)?;
    let rewiring = derandomized_round(inst, &lp)?;
    let (ca, cb) = (inst.total_cost(&cg_arm), inst.total_cost(&rewiring.state.result));
    let (solution, chosen) =
        if ca <= cb { (cg_arm.clone(), Arm::Cg) } else { (rewiring.state.result.clone(), Arm::Rewire) };
    if inst.is_unit_cost() {
        ensure!(verify_leaf_inequality(inst, &lp), "2·OPT* − x(L_up) − x(L_cross^no-crit) < K");
        let c = &lp.classification;
        let v_crit = c.critical_vertices.len();
        if v_crit > 0 {
            let xc = lp.x_of(&c.crit_cross);
            let guarantee = lp.x_of(&c.inlinks) + lp.x_of(&c.cross) * Rational::from_integer(2.into())
                - &xc * &xc / Rational::from_integer(v_crit.into());
            ensure!(rewiring.phi[0] <= guarantee, "Φ₀ = {} above x(in) + 2x(cross) − x(crit)²/|V_crit|", rewiring.phi[0]);
        }
        let size = Rational::from_integer(solution.len().into());
        ensure!(
            Radical::sqrt_of(rat(34, 16)).scaled_at_least(&size, &lp.objective),
            "rounded size {} exceeds √34/4 · {}",
            solution.len(),
            lp.objective
        );
    }
    Ok(KWideRounding { solution, chosen, cg_arm, rewiring, lp, alpha })
}

/// Best-of-two rounding as the inner solver of the reduction. Declares
/// α = 35/24 ≥ √34/4 for unit costs and 3/2 otherwise; above the Λ size
/// limit it falls back to the CG arm on the CG-LP, α = 2.
#[derive(Clone, Debug, Default)]
pub struct RoundingInner {
    pub limits: Limits,
}

impl KWideSolver for RoundingInner {
    fn name(&self) -> &'static str {
        "rounding"
    }
    fn solve(&self, sub: &TapInstance, root: Vertex, k: usize) -> Result<InnerSolution> {
        if sub.tree().edge_count() == 0 {
            return Ok(InnerSolution { links: LinkSet::new(), alpha: Rational::one() });
        }
        if k <= self.limits.lambda_max_k {
            let r = round_k_wide_with(sub, root, k, &self.limits)?;
            let alpha = if sub.is_unit_cost() { rat(35, 24) } else { rat(3, 2) };
            return Ok(InnerSolution { links: r.solution, alpha });
        }
        let lp = solve_cg_lp(sub, &self.limits)?;
        let links = cg_round_with(sub, root, &lp.x, &self.limits)?;
        Ok(InnerSolution { links, alpha: rat(2, 1) })
    }
}
