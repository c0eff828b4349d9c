//! The rewiring arm: local solutions per principal subtree, active vertices,
//! a matching on them, and the conditional-expectation derandomization.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use rand::distributions::WeightedIndex;
use rand::prelude::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{ensure, Result, TapError};
use crate::instance::{is_feasible, LinkClassification, LinkId, LinkSet, Rooted, TapInstance, Vertex};
use crate::lp::KWideLpSolution;
use crate::rounding::matching::{greedy_matching, matched_products, sparsify_to_vertex, MatchingGraph};
use crate::scalar::{Rational, Scalar};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RewireState {
    pub locals: Vec<LinkSet>,
    pub active: BTreeSet<Vertex>,
    pub anchor: BTreeMap<Vertex, LinkId>,
    pub matching: LinkSet,
    pub result: LinkSet,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatchingCertificate {
    pub z: BTreeMap<LinkId, String>,
    pub support_size: usize,
    pub matching: LinkSet,
    #[serde(serialize_with = "ser_rat")]
    pub expected_hits: Rational,
    /// x(E)²/|V|; zero for an empty vertex set.
    #[serde(serialize_with = "ser_rat")]
    pub bound: Rational,
    /// z(L_0/1l)²/|L_0/1l| + z(L_2l)²/|L_2l|.
    #[serde(serialize_with = "ser_rat")]
    pub refined_bound: Rational,
    pub leaf_pair_links: usize,
    pub leaves: usize,
}

fn ser_rat<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// Which cross links may serve as anchors and be rewired.
#[derive(Clone, Debug)]
pub struct RewireScope {
    pub allowed: LinkSet,
    /// Let non-critical endpoints become active too. Off the analysed path.
    pub full_active: bool,
}

impl RewireScope {
    pub fn critical(cls: &LinkClassification) -> Self {
        RewireScope { allowed: cls.crit_cross.clone(), full_active: false }
    }
    pub fn all_cross(cls: &LinkClassification) -> Self {
        RewireScope { allowed: cls.cross.clone(), full_active: true }
    }
}

/// Active endpoints of one local solution of subtree i, with their anchors.
fn activations(
    inst: &TapInstance,
    rooted: &Rooted,
    cls: &LinkClassification,
    i: usize,
    local: &LinkSet,
    scope: &RewireScope,
) -> Result<BTreeMap<Vertex, LinkId>> {
    let mut seen = BTreeSet::new();
    let mut out = BTreeMap::new();
    for &id in local.intersection(&cls.cross) {
        let l = inst.link(id);
        let u = if rooted.branch[l.u] == Some(i) { l.u } else { l.v };
        ensure!(rooted.branch[u] == Some(i), "cross link {id} does not touch subtree {i}");
        ensure!(seen.insert(u), "two cross links of subtree {i} meet at {u}: anchor not unique");
        if scope.allowed.contains(&id) && (scope.full_active || cls.is_critical(u)) {
            out.insert(u, id);
        }
    }
    Ok(out)
}

fn active_in(
    inst: &TapInstance,
    rooted: &Rooted,
    cls: &LinkClassification,
    locals: &[LinkSet],
    scope: &RewireScope,
) -> Result<(BTreeSet<Vertex>, BTreeMap<Vertex, LinkId>)> {
    let mut anchor = BTreeMap::new();
    for (i, local) in locals.iter().enumerate() {
        anchor.extend(activations(inst, rooted, cls, i, local, scope)?);
    }
    Ok((anchor.keys().copied().collect(), anchor))
}

/// A = critical vertices met by a critical cross link of their own subtree's
/// local solution; `locals[i]` belongs to principal subtree i.
pub fn active_vertices(
    inst: &TapInstance,
    cls: &LinkClassification,
    locals: &[LinkSet],
) -> Result<(BTreeSet<Vertex>, BTreeMap<Vertex, LinkId>)> {
    let rooted = inst.tree().rooted(cls.root)?;
    active_in(inst, &rooted, cls, locals, &RewireScope::critical(cls))
}

/// One column index per subtree, drawn from λ independently.
pub fn sample_columns(lp: &KWideLpSolution, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    lp.lambda
        .iter()
        .map(|lam| {
            let w: Vec<f64> = lam.iter().map(|l| l.to_f64()).collect();
            WeightedIndex::new(&w).map(|d| d.sample(&mut rng)).unwrap_or(0)
        })
        .collect()
}

pub fn sample_locals(lp: &KWideLpSolution, seed: u64) -> Vec<LinkSet> {
    sample_columns(lp, seed).into_iter().enumerate().map(|(i, j)| lp.families[i].columns[j].links.clone()).collect()
}

/// c(ℓ_u) + c(ℓ_v) − c(uv): what one rewiring saves.
fn gain(inst: &TapInstance, anchor: &BTreeMap<Vertex, LinkId>, uv: LinkId) -> Rational {
    let l = inst.link(uv);
    inst.cost(anchor[&l.u]) + inst.cost(anchor[&l.v]) - inst.cost(uv)
}

/// B = ⋃(L_i ∖ L_i(M)) ∪ M.
pub fn rewire(
    inst: &TapInstance,
    root: Vertex,
    locals: &[LinkSet],
    matching: &LinkSet,
    anchor: &BTreeMap<Vertex, LinkId>,
) -> Result<LinkSet> {
    let rooted = inst.tree().rooted(root)?;
    let mut dropped: Vec<LinkSet> = vec![LinkSet::new(); locals.len()];
    let mut matched = BTreeSet::new();
    let mut saved = Rational::zero();
    for &uv in matching {
        let l = inst.link(uv);
        for w in [l.u, l.v] {
            ensure!(matched.insert(w), "M is not a matching at {w}");
            let a = *anchor.get(&w).ok_or_else(|| TapError::Invariant(format!("matched vertex {w} is not active")))?;
            let i = rooted.branch[w].ok_or_else(|| TapError::Invariant(format!("matched vertex {w} is the root")))?;
            ensure!(locals[i].contains(&a), "anchor {a} of {w} is not in L_{i}");
            dropped[i].insert(a);
        }
        saved += &gain(inst, anchor, uv);
    }
    let mut b: LinkSet = matching.clone();
    for (local, drop) in locals.iter().zip(&dropped) {
        b.extend(local.difference(drop));
    }
    ensure!(is_feasible(inst, &b), "rewired solution is infeasible");
    let total: Rational = locals.iter().map(|l| inst.total_cost(l)).sum();
    ensure!(inst.total_cost(&b) <= &total - &saved, "c(B) = {} exceeds Σc(L_i) − savings = {}", inst.total_cost(&b), total - saved);
    Ok(b)
}

#[derive(Clone, Debug)]
pub struct Derandomization {
    pub state: RewireState,
    /// Φ before any fixing and after each subtree.
    pub phi: Vec<Rational>,
    pub columns: Vec<usize>,
    pub certificate: MatchingCertificate,
    /// Savings of each executed rewiring, in matching order.
    pub gains: Vec<Rational>,
    /// Σ_i c(L_i) of the fixed locals.
    pub local_cost: Rational,
}

struct ColumnInfo {
    cost: Rational,
    /// u ↦ c(ℓ_u)
    act: BTreeMap<Vertex, Rational>,
}

type Marginal = BTreeMap<Vertex, (Rational, Rational)>;

/// E[c(L_i)] and (Pr[u ∈ A], E[c(ℓ_u)·1{u ∈ A}]) under a distribution.
fn marginals(cols: &[ColumnInfo], dist: &[Rational]) -> (Rational, Marginal) {
    let mut ec = Rational::zero();
    let mut m: Marginal = BTreeMap::new();
    for (c, d) in cols.iter().zip(dist) {
        if d.is_zero() {
            continue;
        }
        ec += &(&c.cost * d);
        for (&u, cu) in &c.act {
            let e = m.entry(u).or_insert_with(|| (Rational::zero(), Rational::zero()));
            e.0 += d;
            e.1 += &(cu * d);
        }
    }
    (ec, m)
}

fn pair_term(m: &Marginal, u: Vertex, v: Vertex, cuv: &Rational) -> Rational {
    let z = (Rational::zero(), Rational::zero());
    let (pu, qu) = m.get(&u).unwrap_or(&z);
    let (pv, qv) = m.get(&v).unwrap_or(&z);
    qu * pv + pu * qv - cuv * pu * pv
}

pub fn derandomized_round(inst: &TapInstance, lp: &KWideLpSolution) -> Result<Derandomization> {
    derandomize_within(inst, lp, &RewireScope::critical(&lp.classification))
}

/// Fix M from the marginals, then fix the subtrees one at a time to the
/// column minimising Φ = Σ E[c(L_i)] − Σ_{uv∈M} E[gain(uv)·1{u,v ∈ A}].
pub fn derandomize_within(inst: &TapInstance, lp: &KWideLpSolution, scope: &RewireScope) -> Result<Derandomization> {
    let cls = &lp.classification;
    let rooted = inst.tree().rooted(lp.root)?;
    let q = lp.families.len();

    let mut infos: Vec<Vec<ColumnInfo>> = Vec::with_capacity(q);
    for (i, fam) in lp.families.iter().enumerate() {
        let mut cols = Vec::with_capacity(fam.columns.len());
        for c in &fam.columns {
            let act = activations(inst, &rooted, cls, i, &c.links, scope)?;
            let act = act.into_iter().map(|(u, id)| (u, inst.cost(id).clone())).collect();
            cols.push(ColumnInfo { cost: inst.total_cost(&c.links), act });
        }
        infos.push(cols);
    }

    // matching graph on the candidate vertices, edges = allowed links in supp(x)
    let vertices: Vec<Vertex> = if scope.full_active {
        (0..inst.n()).filter(|&v| v != lp.root).collect()
    } else {
        cls.critical_vertices.iter().copied().collect()
    };
    let edge_ids: Vec<LinkId> = scope.allowed.iter().copied().filter(|&id| !lp.x[id].is_zero()).collect();
    let graph = MatchingGraph::new(vertices, edge_ids.iter().map(|&id| (inst.link(id).u, inst.link(id).v)).collect());
    let xe: Vec<Rational> = edge_ids.iter().map(|&id| lp.x[id].clone()).collect();
    let z = sparsify_to_vertex(&graph, &xe)?;
    let m_idx = greedy_matching(&graph, &z)?;
    let matching: LinkSet = m_idx.iter().map(|&j| edge_ids[j]).collect();
    let p = graph.degrees(&xe);

    let mut dist: Vec<Vec<Rational>> = lp.lambda.clone();
    let mut state: Vec<(Rational, Marginal)> = infos.iter().zip(&dist).map(|(c, d)| marginals(c, d)).collect();

    // Pr[u ∈ A] = x(δ(u)) over the allowed links
    for (ec, m) in &state {
        let _ = ec;
        for (u, (pu, _)) in m {
            ensure!(p.get(u) == Some(pu), "Pr[{u} ∈ A] = {pu} disagrees with x(δ({u}))");
        }
    }
    for (u, pu) in &p {
        let listed = state.iter().any(|(_, m)| m.contains_key(u));
        ensure!(listed || pu.is_zero(), "x(δ({u})) = {pu} but {u} is never active");
    }

    let expected_hits = matched_products(&graph, &m_idx, &p);
    let x_e: Rational = xe.iter().sum();
    let bound = if graph.vertices.is_empty() {
        Rational::zero()
    } else {
        &x_e * &x_e / Rational::from_integer(graph.vertices.len().into())
    };
    ensure!(expected_hits >= bound, "E[|M ∩ A²|] = {expected_hits} below x(E)²/|V| = {bound}");
    let tree = inst.tree();
    let is_leaf = |v: Vertex| v != lp.root && tree.degree(v) == 1;
    let leaves = (0..tree.n()).filter(|&v| is_leaf(v)).count();
    let (mut z2, mut n2, mut z01, mut n01) = (Rational::zero(), 0usize, Rational::zero(), 0usize);
    for (j, zj) in z.iter().enumerate() {
        if zj.is_zero() {
            continue;
        }
        let (u, v) = graph.edges[j];
        if is_leaf(u) && is_leaf(v) {
            z2 += zj;
            n2 += 1;
        } else {
            z01 += zj;
            n01 += 1;
        }
    }
    let part = |s: &Rational, n: usize| if n == 0 { Rational::zero() } else { s * s / Rational::from_integer(n.into()) };
    let refined_bound = part(&z2, n2) + part(&z01, n01);
    ensure!(expected_hits >= refined_bound, "E[|M ∩ A²|] = {expected_hits} below refined bound {refined_bound}");
    ensure!(n2 <= leaves, "{n2} leaf-to-leaf links in supp(z) but only {leaves} leaves");
    let certificate = MatchingCertificate {
        z: edge_ids.iter().zip(&z).filter(|(_, v)| !v.is_zero()).map(|(&id, v)| (id, v.to_string())).collect(),
        support_size: n2 + n01,
        matching: matching.clone(),
        expected_hits,
        bound,
        refined_bound,
        leaf_pair_links: n2,
        leaves,
    };

    let owner: BTreeMap<Vertex, usize> = graph.vertices.iter().filter_map(|&v| rooted.branch[v].map(|i| (v, i))).collect();
    let global = |state: &[(Rational, Marginal)], v: Vertex| -> Marginal {
        owner.get(&v).and_then(|&i| state[i].1.get(&v).map(|pq| (v, pq.clone()))).into_iter().collect()
    };
    let phi_of = |state: &[(Rational, Marginal)]| -> Rational {
        let mut phi: Rational = state.iter().map(|(ec, _)| ec.clone()).sum();
        for &uv in &matching {
            let l = inst.link(uv);
            let mut m = global(state, l.u);
            m.extend(global(state, l.v));
            phi -= pair_term(&m, l.u, l.v, inst.cost(uv));
        }
        phi
    };
    // matched edges touching each subtree
    let mut touching: Vec<Vec<LinkId>> = vec![Vec::new(); q];
    for &uv in &matching {
        let l = inst.link(uv);
        for w in [l.u, l.v] {
            if let Some(i) = rooted.branch[w] {
                touching[i].push(uv);
            }
        }
    }

    let phi0 = phi_of(&state);
    let mut phi = vec![phi0.clone()];
    let mut columns = Vec::with_capacity(q);
    for i in 0..q {
        let old = phi.last().unwrap().clone();
        let mut best: Option<(Rational, usize)> = None;
        for (j, col) in infos[i].iter().enumerate() {
            let cand: Marginal =
                col.act.iter().map(|(&u, c)| (u, (Rational::one(), c.clone()))).collect();
            let mut val = &old - &state[i].0 + &col.cost;
            for &uv in &touching[i] {
                let l = inst.link(uv);
                let mut before = global(&state, l.u);
                before.extend(global(&state, l.v));
                let mut after = before.clone();
                for w in [l.u, l.v] {
                    if rooted.branch[w] == Some(i) {
                        match cand.get(&w) {
                            Some(pq) => after.insert(w, pq.clone()),
                            None => after.remove(&w),
                        };
                    }
                }
                val += pair_term(&before, l.u, l.v, inst.cost(uv));
                val -= pair_term(&after, l.u, l.v, inst.cost(uv));
            }
            if best.as_ref().is_none_or(|(b, _)| val < *b) {
                best = Some((val, j));
            }
        }
        let (val, j) = best.ok_or_else(|| TapError::Invariant(format!("subtree {i} has no columns")))?;
        ensure!(val <= old, "fixing subtree {i} raised Φ from {old} to {val}");
        dist[i] = (0..infos[i].len()).map(|t| if t == j { Rational::one() } else { Rational::zero() }).collect();
        state[i] = marginals(&infos[i], &dist[i]);
        debug_assert_eq!(phi_of(&state), val);
        phi.push(val);
        columns.push(j);
    }

    let locals: Vec<LinkSet> = columns.iter().enumerate().map(|(i, &j)| lp.families[i].columns[j].links.clone()).collect();
    let (active, anchor) = active_in(inst, &rooted, cls, &locals, scope)?;
    let realized: LinkSet = matching
        .iter()
        .copied()
        .filter(|&uv| active.contains(&inst.link(uv).u) && active.contains(&inst.link(uv).v))
        .collect();
    let result = rewire(inst, lp.root, &locals, &realized, &anchor)?;
    let gains: Vec<Rational> = realized.iter().map(|&uv| gain(inst, &anchor, uv)).collect();
    let local_cost: Rational = locals.iter().map(|l| inst.total_cost(l)).sum();
    let phi_final = phi.last().unwrap();
    let realized_phi = &local_cost - gains.iter().sum::<Rational>();
    ensure!(&realized_phi == phi_final, "Φ after fixing all subtrees is {phi_final}, realized {realized_phi}");
    ensure!(inst.total_cost(&result) <= *phi_final, "c(B) exceeds the final conditional expectation");
    Ok(Derandomization {
        state: RewireState { locals, active, anchor, matching: realized, result },
        phi,
        columns,
        certificate,
        gains,
        local_cost,
    })
}
