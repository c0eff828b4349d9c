//! Splitting at γ-light edges, ζ-heavy cores, and the cutting-plane
//! reduction from general instances to k-wide ones.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Limits;
use crate::error::{ensure, Result, TapError};
use crate::exact::brute_force_within;
use crate::instance::{
    is_feasible, shadow_complete, EdgeId, EdgeSet, LinkId, LinkSet, TapInstance, Tree, Vertex,
};
use crate::lp::{build_cut_lp, solve_lp, LpError, LpModel, Relation};
use crate::scalar::{ceil_int, rat, Radical, Rational, Scalar};

/// A connected piece of the tree, given by its edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subtree {
    pub vertices: Vec<Vertex>,
    pub edges: EdgeSet,
}

impl Subtree {
    pub fn whole(tree: &Tree) -> Self {
        Subtree::from_edges(tree, tree.full_edge_set())
    }

    pub fn from_edges(tree: &Tree, edges: EdgeSet) -> Self {
        let mut vertices: Vec<Vertex> = edges.ones().flat_map(|e| {
            let (u, v) = tree.edge(e);
            [u, v]
        })
        .collect();
        vertices.sort_unstable();
        vertices.dedup();
        if vertices.is_empty() {
            vertices.push(0);
        }
        Subtree { vertices, edges }
    }
}

/// γ = 1/√k.
pub fn gamma_for(k: usize) -> Radical {
    Radical::sqrt_of(rat(1, k as i64))
}

/// ζ = √k/4.
pub fn zeta_for(k: usize) -> Radical {
    Radical::sqrt_of(rat(k as i64, 16))
}

/// E_{T'}(e, a): edges of `sub` reachable from `a` without crossing `e`.
pub fn side(tree: &Tree, sub: &EdgeSet, e: EdgeId, a: Vertex) -> EdgeSet {
    let mut allowed = sub.clone();
    allowed.set(e, false);
    tree.component(a, &allowed).1
}

/// Σ w over cov(S) ∖ cov(e).
pub(crate) fn side_mass<T: Scalar>(inst: &TapInstance, w: &[T], s: &EdgeSet, e: EdgeId) -> T {
    let mut m = T::zero();
    for id in 0..inst.link_count() {
        if !inst.covers(id, e) && !inst.path(id).is_disjoint(s) {
            m += &w[id];
        }
    }
    m
}

pub(crate) fn edge_mass<T: Scalar>(inst: &TapInstance, w: &[T], e: EdgeId) -> T {
    let mut m = T::zero();
    for &id in inst.cov(e) {
        m += &w[id];
    }
    m
}

pub(crate) fn light_in<T: Scalar>(inst: &TapInstance, w: &[T], sub: &EdgeSet, e: EdgeId, gamma: &Radical) -> bool {
    let (u, v) = inst.tree().edge(e);
    let mu = side_mass(inst, w, &side(inst.tree(), sub, e, u), e);
    let mv = side_mass(inst, w, &side(inst.tree(), sub, e, v), e);
    let m = if mu.cmp_tol(&mv) == Ordering::Greater { mv } else { mu };
    gamma.scaled_at_least(&edge_mass(inst, w, e), &m)
}

pub fn is_gamma_light<T: Scalar>(inst: &TapInstance, x: &[T], subtree: &Subtree, e: EdgeId, gamma: &Radical) -> bool {
    light_in(inst, x, &subtree.edges, e, gamma)
}

#[derive(Clone, Debug, Serialize)]
pub struct Core {
    pub root: Vertex,
    #[serde(serialize_with = "ser_edges")]
    pub edges: EdgeSet,
    pub vertices: Vec<Vertex>,
}

fn ser_edges<S: serde::Serializer>(s: &EdgeSet, ser: S) -> std::result::Result<S::Ok, S::Error> {
    ser.collect_seq(s.ones())
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub k: usize,
    pub subtrees: Vec<Subtree>,
    /// e_i, the edge whose split produced subtree i (all but the last).
    pub split_edges: Vec<EdgeId>,
    pub cores: Vec<EdgeSet>,
    pub core_vertices: Vec<Vec<Vertex>>,
    pub core_roots: Vec<Vertex>,
    pub gamma: Radical,
    pub zeta: Radical,
    /// (i, j): subtree i was split off subtree-to-be j, which holds the
    /// remainder-side endpoint of e_i.
    pub split_tree: Vec<(usize, usize)>,
}

#[derive(Serialize)]
struct DecompositionDump<'a> {
    k: usize,
    gamma_squared: String,
    zeta_squared: String,
    subtrees: Vec<Vec<Vertex>>,
    subtree_edges: Vec<Vec<EdgeId>>,
    split_edges: &'a [EdgeId],
    cores: Vec<Vec<EdgeId>>,
    core_roots: &'a [Vertex],
}

impl Decomposition {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(DecompositionDump {
            k: self.k,
            gamma_squared: self.gamma.square().to_string(),
            zeta_squared: self.zeta.square().to_string(),
            subtrees: self.subtrees.iter().map(|s| s.vertices.clone()).collect(),
            subtree_edges: self.subtrees.iter().map(|s| s.edges.ones().collect()).collect(),
            split_edges: &self.split_edges,
            cores: self.cores.iter().map(|c| c.ones().collect()).collect(),
            core_roots: &self.core_roots,
        })
        .expect("plain data")
    }

    /// Partition, the split budget Σ w(cov(e_i)) ≤ γ·w(L), and disjointness of
    /// the private link sets cov(E_i) ∖ cov(e_i).
    pub fn check<T: Scalar>(&self, inst: &TapInstance, w: &[T]) -> Result<()> {
        let tree = inst.tree();
        let mut seen = tree.empty_edge_set();
        for s in &self.subtrees {
            ensure!(seen.is_disjoint(&s.edges), "subtrees share an edge");
            seen.union_with(&s.edges);
        }
        ensure!(seen == tree.full_edge_set(), "subtrees do not cover the tree");
        let mut split = T::zero();
        for &e in &self.split_edges {
            split += &edge_mass(inst, w, e);
        }
        let mut total = T::zero();
        for v in w {
            total += v;
        }
        ensure!(self.gamma.scaled_at_least(&split, &total), "split budget exceeded");
        let mut owner: BTreeMap<LinkId, usize> = BTreeMap::new();
        for (i, s) in self.subtrees.iter().enumerate() {
            for id in inst.cover_set(&s.edges) {
                if self.split_edges.get(i).is_some_and(|&e| inst.covers(id, e)) {
                    continue;
                }
                if let Some(j) = owner.insert(id, i) {
                    ensure!(j == i, "link {id} private to subtrees {j} and {i}");
                }
            }
        }
        Ok(())
    }
}

fn split_with<T: Scalar>(inst: &TapInstance, w: &[T], gamma: &Radical) -> Result<(Vec<EdgeSet>, Vec<EdgeId>, Vec<Vertex>)> {
    let tree = inst.tree();
    let mut rem = tree.full_edge_set();
    let mut pieces = Vec::new();
    let mut splits = Vec::new();
    let mut anchors = Vec::new();
    loop {
        let mut cands: Vec<(usize, EdgeId, Vertex, Vertex, EdgeSet)> = Vec::new();
        for e in rem.ones() {
            if !light_in(inst, w, &rem, e, gamma) {
                continue;
            }
            let (a, b) = tree.edge(e);
            for (s, t) in [(a, b), (b, a)] {
                let part = side(tree, &rem, e, s);
                cands.push((part.count_ones(..), e, s, t, part));
            }
        }
        if cands.is_empty() {
            break;
        }
        cands.sort_by(|x, y| (x.0, x.1, x.2).cmp(&(y.0, y.1, y.2)));
        let mut chosen = None;
        for (_, e, _, t, part) in cands {
            let mut piece = part;
            piece.insert(e);
            if !piece.ones().any(|f| light_in(inst, w, &piece, f, gamma)) {
                chosen = Some((e, t, piece));
                break;
            }
        }
        let (e, t, piece) = chosen.ok_or_else(|| TapError::Invariant("no critical light edge".into()))?;
        rem.difference_with(&piece);
        pieces.push(piece);
        splits.push(e);
        anchors.push(t);
    }
    pieces.push(rem);
    Ok((pieces, splits, anchors))
}

/// Split at critical γ-light edges until no piece has one; cores are left
/// empty (see [`heavy_core`]).
pub fn split_decomposition<T: Scalar>(inst: &TapInstance, x: &[T], k: usize) -> Result<Decomposition> {
    split_decomposition_mass(inst, x, k)
}

pub(crate) fn split_decomposition_mass<T: Scalar>(inst: &TapInstance, w: &[T], k: usize) -> Result<Decomposition> {
    ensure!(k >= 1, "k must be positive");
    let tree = inst.tree();
    let gamma = gamma_for(k);
    let (pieces, split_edges, anchors) = split_with(inst, w, &gamma)?;
    let subtrees: Vec<Subtree> = pieces.into_iter().map(|p| Subtree::from_edges(tree, p)).collect();
    let split_tree = anchors
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let j = (i + 1..subtrees.len()).find(|&j| subtrees[j].vertices.binary_search(&t).is_ok()).unwrap();
            (i, j)
        })
        .collect();
    let q = subtrees.len();
    Ok(Decomposition {
        k,
        subtrees,
        split_edges,
        cores: vec![tree.empty_edge_set(); q],
        core_vertices: vec![Vec::new(); q],
        core_roots: vec![0; q],
        gamma,
        zeta: zeta_for(k),
        split_tree,
    })
}

/// r_i, H_i and W_i of a piece without light edges.
pub fn heavy_core<T: Scalar>(inst: &TapInstance, x: &[T], subtree: &Subtree, k: usize) -> Core {
    heavy_core_mass(inst, x, x, subtree, &zeta_for(k))
}

/// The root is a vertex whose side of every incident edge carries at least
/// as much `w`-mass as the far side (smallest such id); heaviness compares
/// x(cov(e)) against ζ.
pub(crate) fn heavy_core_mass<T: Scalar>(inst: &TapInstance, w: &[T], x: &[T], subtree: &Subtree, zeta: &Radical) -> Core {
    let tree = inst.tree();
    let sub = &subtree.edges;
    let root = subtree
        .vertices
        .iter()
        .copied()
        .find(|&v| {
            tree.neighbors(v).iter().filter(|&&(_, e)| sub.contains(e)).all(|&(u, e)| {
                let near = side_mass(inst, w, &side(tree, sub, e, v), e);
                let far = side_mass(inst, w, &side(tree, sub, e, u), e);
                far.cmp_tol(&near) != Ordering::Greater
            })
        })
        .expect("a tree orientation always has a source");
    let mut heavy = tree.empty_edge_set();
    for e in sub.ones() {
        if zeta.scaled_at_most(&edge_mass(inst, x, e), &T::one()) {
            heavy.insert(e);
        }
    }
    let (mut vertices, edges) = tree.component(root, &heavy);
    vertices.sort_unstable();
    Core { root, edges, vertices }
}

/// Fill in cores for every piece of a split decomposition.
pub fn decompose<T: Scalar>(inst: &TapInstance, x: &[T], k: usize) -> Result<Decomposition> {
    decompose_mass(inst, x, x, k)
}

pub(crate) fn decompose_mass<T: Scalar>(inst: &TapInstance, w: &[T], x: &[T], k: usize) -> Result<Decomposition> {
    let mut d = split_decomposition_mass(inst, w, k)?;
    for i in 0..d.subtrees.len() {
        let c = heavy_core_mass(inst, w, x, &d.subtrees[i], &d.zeta);
        d.cores[i] = c.edges;
        d.core_vertices[i] = c.vertices;
        d.core_roots[i] = c.root;
    }
    Ok(d)
}

/// A cheapest cover of ∪H_i, checked against c(M) ≤ (2/ζ)·c·x.
pub fn cover_heavy_edges(inst: &TapInstance, x: &[Rational], cores: &[EdgeSet], zeta: &Radical) -> Result<LinkSet> {
    cover_heavy_edges_with(inst, x, cores, zeta, &Limits::default())
}

pub fn cover_heavy_edges_with(
    inst: &TapInstance,
    x: &[Rational],
    cores: &[EdgeSet],
    zeta: &Radical,
    limits: &Limits,
) -> Result<LinkSet> {
    let mut target = inst.tree().empty_edge_set();
    for c in cores {
        target.union_with(c);
    }
    if target.is_clear() {
        return Ok(LinkSet::new());
    }
    let m = brute_force_within(inst, &target, None, limits)?;
    let cx: Rational = x.iter().enumerate().map(|(id, v)| v * inst.cost(id)).sum();
    let two_over_zeta = Radical::sqrt_of(rat(4, 1) / zeta.square());
    ensure!(
        two_over_zeta.scaled_at_least(&m.value, &cx),
        "heavy cover cost {} exceeds (2/ζ)·{cx}",
        m.value
    );
    Ok(m.links)
}

/// T_i/H_i as a standalone instance: vertex 0 is the contracted core,
/// every link meeting E_i ∖ H_i is cut down to its trace on E_i.
#[derive(Clone, Debug)]
pub struct SubInstance {
    pub inst: TapInstance,
    pub root: Vertex,
    pub vertex_map: Vec<Vertex>,
    pub edge_map: Vec<EdgeId>,
    pub link_map: Vec<LinkId>,
    /// E_i ∖ H_i in the original tree.
    pub residual: EdgeSet,
}

impl SubInstance {
    pub fn lift(&self, sol: &LinkSet) -> LinkSet {
        sol.iter().map(|&id| self.link_map[id]).collect()
    }
}

pub fn contract_piece(inst: &TapInstance, subtree: &Subtree, core: &Core) -> Result<SubInstance> {
    let tree = inst.tree();
    let mut residual = subtree.edges.clone();
    residual.difference_with(&core.edges);
    let mut vertex_map = vec![core.root];
    let mut local = vec![usize::MAX; tree.n()];
    for &v in &core.vertices {
        local[v] = 0;
    }
    local[core.root] = 0;
    for &v in &subtree.vertices {
        if local[v] == usize::MAX {
            local[v] = vertex_map.len();
            vertex_map.push(v);
        }
    }
    let edge_map: Vec<EdgeId> = residual.ones().collect();
    let edges: Vec<(Vertex, Vertex)> = edge_map
        .iter()
        .map(|&e| {
            let (u, v) = tree.edge(e);
            (local[u], local[v])
        })
        .collect();
    let sub_tree = Tree::new(vertex_map.len(), edges, Some(0))?;

    let mut best: BTreeMap<(Vertex, Vertex), (Rational, LinkId)> = BTreeMap::new();
    for id in 0..inst.link_count() {
        let mut trace = inst.path(id).clone();
        trace.intersect_with(&subtree.edges);
        if trace.is_disjoint(&residual) {
            continue;
        }
        let mut deg: BTreeMap<Vertex, usize> = BTreeMap::new();
        for e in trace.ones() {
            let (u, v) = tree.edge(e);
            *deg.entry(u).or_default() += 1;
            *deg.entry(v).or_default() += 1;
        }
        let ends: Vec<Vertex> = deg.iter().filter(|&(_, &d)| d == 1).map(|(&v, _)| local[v]).collect();
        ensure!(ends.len() == 2, "trace of link {id} is not a path");
        let key = (ends[0].min(ends[1]), ends[0].max(ends[1]));
        ensure!(key.0 != key.1, "link {id} collapses under contraction");
        let cand = (inst.cost(id).clone(), id);
        match best.get_mut(&key) {
            Some(cur) if cand < *cur => *cur = cand,
            Some(_) => {}
            None => {
                best.insert(key, cand);
            }
        }
    }
    let base_map: Vec<LinkId> = best.values().map(|(_, id)| *id).collect();
    let links = best.into_iter().map(|((a, b), (c, _))| (a, b, c)).collect();
    let closed = shadow_complete(&TapInstance::new(sub_tree, links)?);
    let link_map = closed.links().iter().map(|l| base_map[l.origin]).collect();
    Ok(SubInstance { inst: closed, root: 0, vertex_map, edge_map, link_map, residual })
}

/// What an inner k-wide solver returns: a cover and the ratio it certifies.
#[derive(Clone, Debug)]
pub struct InnerSolution {
    pub links: LinkSet,
    pub alpha: Rational,
}

pub trait KWideSolver: Sync {
    fn name(&self) -> &'static str;
    /// Cover the whole tree of `sub`, which is k-wide when rooted at `root`.
    fn solve(&self, sub: &TapInstance, root: Vertex, k: usize) -> Result<InnerSolution>;
}

/// Branch and bound, α = 1.
#[derive(Clone, Debug, Default)]
pub struct ExactInner {
    pub limits: Limits,
}

impl KWideSolver for ExactInner {
    fn name(&self) -> &'static str {
        "exact"
    }
    fn solve(&self, sub: &TapInstance, _root: Vertex, _k: usize) -> Result<InnerSolution> {
        let s = brute_force_within(sub, &sub.tree().full_edge_set(), None, &self.limits)?;
        Ok(InnerSolution { links: s.links, alpha: Rational::one() })
    }
}

/// x(cov(E_i ∖ H_i)) ≥ rhs, weighted by cost.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LearnedCut {
    pub links: LinkSet,
    pub rhs: Rational,
    pub alpha: Rational,
    pub local_size: Rational,
}

impl LearnedCut {
    pub fn lhs(&self, inst: &TapInstance, x: &[Rational]) -> Rational {
        self.links.iter().map(|&id| &x[id] * inst.cost(id)).sum()
    }
    pub fn satisfied_by_set(&self, inst: &TapInstance, sol: &LinkSet) -> bool {
        inst.total_cost(sol.intersection(&self.links)) >= self.rhs
    }
}

#[derive(Clone, Debug)]
pub struct Certificate {
    pub decomposition: Decomposition,
    pub subs: Vec<SubInstance>,
    /// L_i in original link ids.
    pub locals: Vec<LinkSet>,
    pub alphas: Vec<Rational>,
}

#[derive(Clone, Debug)]
pub enum OracleOutcome {
    Budget,
    Covering(EdgeId),
    Cut(LearnedCut),
    NotSeparated(Box<Certificate>),
}

/// The rhs the oracle may claim from a local solution: ⌈|L_i|/α⌉ for unit
/// costs (OPT is integral), c(L_i)/α otherwise.
fn cut_rhs(inst: &TapInstance, size: &Rational, alpha: &Rational) -> Rational {
    let r = size / alpha;
    if inst.is_unit_cost() {
        Rational::from_integer(ceil_int(&r))
    } else {
        r
    }
}

pub fn partial_separation_oracle(
    inst: &TapInstance,
    y: &[Rational],
    nu: &Rational,
    k: usize,
    inner: &dyn KWideSolver,
) -> Result<OracleOutcome> {
    ensure!(y.iter().all(|v| !v.is_negative()), "oracle needs y ≥ 0");
    let w: Vec<Rational> = y.iter().enumerate().map(|(id, v)| v * inst.cost(id)).collect();
    let total: Rational = w.iter().sum();
    if total > *nu {
        return Ok(OracleOutcome::Budget);
    }
    for e in 0..inst.tree().edge_count() {
        if edge_mass(inst, y, e) < Rational::one() {
            return Ok(OracleOutcome::Covering(e));
        }
    }
    let decomposition = decompose_mass(inst, &w, y, k)?;
    let q = decomposition.subtrees.len();
    let subs: Vec<SubInstance> = (0..q)
        .map(|i| {
            let core = Core {
                root: decomposition.core_roots[i],
                edges: decomposition.cores[i].clone(),
                vertices: decomposition.core_vertices[i].clone(),
            };
            contract_piece(inst, &decomposition.subtrees[i], &core)
        })
        .collect::<Result<_>>()?;
    let solved: Vec<InnerSolution> = subs
        .par_iter()
        .map(|s| {
            if s.inst.tree().edge_count() == 0 {
                return Ok(InnerSolution { links: LinkSet::new(), alpha: Rational::one() });
            }
            let width = s.inst.tree().rooted(s.root)?.width();
            let sol = inner.solve(&s.inst, s.root, width.max(1))?;
            ensure!(is_feasible(&s.inst, &sol.links), "inner solver {} returned a non-cover", inner.name());
            Ok(sol)
        })
        .collect::<Result<_>>()?;
    let mut locals = Vec::with_capacity(q);
    let mut alphas = Vec::with_capacity(q);
    for (s, sol) in subs.iter().zip(&solved) {
        let size = s.inst.total_cost(&sol.links);
        let rhs = cut_rhs(inst, &size, &sol.alpha);
        let links = inst.cover_set(&s.residual);
        let lhs: Rational = links.iter().map(|&id| &w[id]).sum();
        if lhs < rhs {
            return Ok(OracleOutcome::Cut(LearnedCut { links, rhs, alpha: sol.alpha.clone(), local_size: size }));
        }
        locals.push(s.lift(&sol.links));
        alphas.push(sol.alpha.clone());
    }
    Ok(OracleOutcome::NotSeparated(Box::new(Certificate { decomposition, subs, locals, alphas })))
}

/// The relaxation Π_T(ν,k) as far as it is known: the cut LP, the budget
/// and every cut learned so far.
#[derive(Clone, Debug)]
pub struct CuttingPlaneModel {
    pub base: LpModel<Rational>,
    pub learned_cuts: Vec<LearnedCut>,
    pub nu: BigInt,
}

impl CuttingPlaneModel {
    pub fn new(inst: &TapInstance) -> Self {
        CuttingPlaneModel { base: build_cut_lp(inst), learned_cuts: Vec::new(), nu: BigInt::zero() }
    }

    pub fn to_lp(&self, inst: &TapInstance) -> LpModel<Rational> {
        let mut lp = self.base.clone();
        let budget = (0..inst.link_count()).map(|id| (id, inst.cost(id).clone())).collect();
        lp.add_row("budget", budget, Relation::Le, Rational::from_integer(self.nu.clone()));
        for (j, c) in self.learned_cuts.iter().enumerate() {
            let coeffs = c.links.iter().map(|&id| (id, inst.cost(id).clone())).collect();
            lp.add_row(format!("learned{j}"), coeffs, Relation::Ge, c.rhs.clone());
        }
        lp
    }
}

#[derive(Clone, Debug)]
pub struct ReductionResult {
    pub solution: LinkSet,
    pub nu: BigInt,
    pub x: Vec<Rational>,
    pub certificate: Certificate,
    pub heavy_cover: LinkSet,
    pub cuts: Vec<LearnedCut>,
    pub lp_solves: usize,
}

enum Probe {
    Empty,
    Found(Vec<Rational>, Box<Certificate>),
}

fn probe(
    inst: &TapInstance,
    model: &mut CuttingPlaneModel,
    k: usize,
    inner: &dyn KWideSolver,
    solves: &mut usize,
) -> Result<Probe> {
    loop {
        *solves += 1;
        let sol = match solve_lp(&model.to_lp(inst)) {
            Ok(s) => s,
            Err(LpError::Infeasible) => return Ok(Probe::Empty),
            Err(e) => return Err(e.into()),
        };
        let nu = Rational::from_integer(model.nu.clone());
        match partial_separation_oracle(inst, &sol.x, &nu, k, inner)? {
            OracleOutcome::Cut(c) => {
                ensure!(!model.learned_cuts.contains(&c), "oracle repeated a cut");
                model.learned_cuts.push(c);
            }
            OracleOutcome::NotSeparated(cert) => return Ok(Probe::Found(sol.x, cert)),
            OracleOutcome::Budget | OracleOutcome::Covering(_) => {
                return Err(TapError::Invariant("LP point violates a row it was solved with".into()))
            }
        }
    }
}

pub fn reduce_to_k_wide(inst: &TapInstance, k: usize, inner: &dyn KWideSolver) -> Result<ReductionResult> {
    reduce_to_k_wide_with(inst, k, inner, &Limits::default())
}

/// Binary search for the smallest budget ν the oracle cannot refute, then
/// Q = M ∪ ⋃L_i from the point where it gave up.
pub fn reduce_to_k_wide_with(
    inst: &TapInstance,
    k: usize,
    inner: &dyn KWideSolver,
    limits: &Limits,
) -> Result<ReductionResult> {
    if !inst.shadow_closed() {
        return Err(TapError::Input("reduction needs a shadow-closed instance".into()));
    }
    let total = inst.total_cost(&(0..inst.link_count()).collect::<LinkSet>());
    let top = ceil_int(&total);
    let mut model = CuttingPlaneModel::new(inst);
    let mut solves = 0;
    model.nu = top.clone();
    let mut found = match probe(inst, &mut model, k, inner, &mut solves)? {
        Probe::Found(x, c) => (top.clone(), x, c),
        Probe::Empty => return Err(TapError::Infeasible("no cover within the full link budget".into())),
    };
    let mut lo = BigInt::from(-1);
    let mut hi = top;
    while &hi - &lo > BigInt::one() {
        let mid: BigInt = (&lo + &hi) / 2;
        model.nu = mid.clone();
        match probe(inst, &mut model, k, inner, &mut solves)? {
            Probe::Empty => lo = mid,
            Probe::Found(x, c) => {
                hi = mid.clone();
                found = (mid, x, c);
            }
        }
    }
    let (nu, x, certificate) = found;
    let heavy_cover = cover_heavy_edges_with(inst, &x, &certificate.decomposition.cores, &certificate.decomposition.zeta, limits)?;
    let mut solution = heavy_cover.clone();
    for l in &certificate.locals {
        solution.extend(l.iter().copied());
    }
    ensure!(is_feasible(inst, &solution), "assembled reduction output is not a cover");
    Ok(ReductionResult { solution, nu, x, certificate: *certificate, heavy_cover, cuts: model.learned_cuts, lp_solves: solves })
}
