//! Seeded instance generators and the JSON instance format.

use std::collections::BTreeSet;

use num_traits::One;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TapError};
use crate::instance::{TapInstance, Tree, Vertex};
use crate::scalar::{rat, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    RandomTree,
    Path,
    Star,
    Caterpillar,
    Binary,
    /// Star whose links join every pair of leaves.
    GapFamily,
    /// Random tree that is k-wide when rooted at vertex 0.
    KWide,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::RandomTree => "random-tree",
            Family::Path => "path",
            Family::Star => "star",
            Family::Caterpillar => "caterpillar",
            Family::Binary => "binary",
            Family::GapFamily => "gap-family",
            Family::KWide => "k-wide",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum LinkMode {
    All,
    Density { p: f64 },
    LeafPairs,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub family: Family,
    /// Vertex count; for `star` and `gap-family` the number of leaves is n − 1.
    pub n: usize,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_links")]
    pub links: LinkMode,
    /// Costs drawn from {1, 1 + (Δ−1)/8, …, Δ}; unit costs when absent.
    #[serde(default)]
    pub delta: Option<u32>,
}

fn default_k() -> usize {
    2
}

fn default_links() -> LinkMode {
    LinkMode::All
}

impl GenParams {
    pub fn new(family: Family, n: usize) -> Self {
        GenParams { family, n, k: 2, links: LinkMode::All, delta: None }
    }
}

fn prufer_tree(n: usize, rng: &mut ChaCha8Rng) -> Vec<(Vertex, Vertex)> {
    if n == 1 {
        return Vec::new();
    }
    if n == 2 {
        return vec![(0, 1)];
    }
    let seq: Vec<Vertex> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &v in &seq {
        degree[v] += 1;
    }
    let mut leaves: BTreeSet<Vertex> = (0..n).filter(|&v| degree[v] == 1).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &v in &seq {
        let leaf = *leaves.iter().next().unwrap();
        leaves.remove(&leaf);
        edges.push((leaf, v));
        degree[v] -= 1;
        if degree[v] == 1 {
            leaves.insert(v);
        }
    }
    let rest: Vec<Vertex> = leaves.into_iter().collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// Branches hang off vertex 0; each grows by attaching to a random vertex of
/// the branch, redirected to a leaf once the branch has k leaves.
fn k_wide_tree(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<(Vertex, Vertex)> {
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut branches: Vec<Vec<Vertex>> = Vec::new();
    let mut children: Vec<usize> = vec![0; n];
    for v in 1..n {
        let new_branch = branches.is_empty() || rng.gen_bool(0.3);
        if new_branch {
            edges.push((0, v));
            branches.push(vec![v]);
            continue;
        }
        let b = rng.gen_range(0..branches.len());
        let members = &branches[b];
        let leaves: Vec<Vertex> = members.iter().copied().filter(|&u| children[u] == 0).collect();
        let mut parent = *members.choose(rng).unwrap();
        if children[parent] > 0 && leaves.len() >= k {
            parent = *leaves.choose(rng).unwrap();
        }
        children[parent] += 1;
        edges.push((parent, v));
        branches[b].push(v);
    }
    edges
}

fn tree_edges(params: &GenParams, rng: &mut ChaCha8Rng) -> Result<Vec<(Vertex, Vertex)>> {
    let n = params.n;
    if n < 2 {
        return Err(TapError::Input("generators need n ≥ 2".into()));
    }
    Ok(match params.family {
        Family::RandomTree => prufer_tree(n, rng),
        Family::Path => (1..n).map(|v| (v - 1, v)).collect(),
        Family::Star | Family::GapFamily => (1..n).map(|v| (0, v)).collect(),
        Family::Caterpillar => {
            let spine = n.div_ceil(2);
            let mut e: Vec<(Vertex, Vertex)> = (1..spine).map(|v| (v - 1, v)).collect();
            e.extend((spine..n).map(|v| (v - spine, v)));
            e
        }
        Family::Binary => (1..n).map(|v| ((v - 1) / 2, v)).collect(),
        Family::KWide => {
            if params.k == 0 {
                return Err(TapError::Input("k-wide generator needs k ≥ 1".into()));
            }
            k_wide_tree(n, params.k, rng)
        }
    })
}

fn cost(delta: Option<u32>, rng: &mut ChaCha8Rng) -> Rational {
    match delta {
        None | Some(1) => Rational::one(),
        Some(d) => rat(1, 1) + rat(d as i64 - 1, 8) * Rational::from_integer(rng.gen_range(0..=8).into()),
    }
}

/// Deterministic in (params, seed).
pub fn generate(params: &GenParams, seed: u64) -> Result<TapInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if params.delta == Some(0) {
        return Err(TapError::Input("Δ must be at least 1".into()));
    }
    let edges = tree_edges(params, &mut rng)?;
    let tree = Tree::new(params.n, edges, None)?;
    let n = params.n;
    let leaves: Vec<Vertex> = (0..n).filter(|&v| tree.degree(v) == 1).collect();
    let mode = if params.family == Family::GapFamily { LinkMode::LeafPairs } else { params.links };
    let mut pairs: Vec<(Vertex, Vertex)> = match mode {
        LinkMode::All => (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect(),
        LinkMode::LeafPairs => leaves.iter().enumerate().flat_map(|(i, &u)| leaves[i + 1..].iter().map(move |&v| (u, v))).collect(),
        LinkMode::Density { p } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(TapError::Input(format!("density {p} outside [0,1]")));
            }
            (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).filter(|_| rng.gen_bool(p)).collect()
        }
    };
    // repair: every uncovered edge gets a link between random vertices of its two sides
    let probe = TapInstance::unit(tree.clone(), &pairs)?;
    let covered = probe.covered_edges(&(0..probe.link_count()).collect::<Vec<_>>());
    for e in 0..tree.edge_count() {
        if covered.contains(e) {
            continue;
        }
        let (a, b) = tree.edge(e);
        let mut rest = tree.full_edge_set();
        rest.set(e, false);
        let (sa, _) = tree.component(a, &rest);
        let (sb, _) = tree.component(b, &rest);
        let u = *sa.choose(&mut rng).unwrap();
        let v = *sb.choose(&mut rng).unwrap();
        pairs.push((u.min(v), u.max(v)));
    }
    let links = pairs.into_iter().map(|(u, v)| (u, v, cost(params.delta, &mut rng))).collect();
    TapInstance::new(tree, links)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkRecord {
    pub u: Vertex,
    pub v: Vertex,
    /// Rational such as "3/2"; 1 when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n: usize,
    pub edges: Vec<(Vertex, Vertex)>,
    pub links: Vec<LinkRecord>,
    #[serde(default)]
    pub root: Option<Vertex>,
}

pub fn instance_to_json(inst: &TapInstance) -> String {
    let file = InstanceFile {
        n: inst.n(),
        edges: inst.tree().edges().to_vec(),
        links: inst.links().iter().map(|l| LinkRecord { u: l.u, v: l.v, cost: Some(l.cost.to_string()) }).collect(),
        root: inst.tree().root(),
    };
    serde_json::to_string(&file).expect("plain data")
}

pub fn instance_from_json(text: &str) -> Result<TapInstance> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| TapError::Input(e.to_string()))?;
    let tree = Tree::new(file.n, file.edges, file.root)?;
    let links = file
        .links
        .into_iter()
        .map(|l| match l.cost {
            None => Ok((l.u, l.v, Rational::one())),
            Some(c) => c
                .trim()
                .parse::<Rational>()
                .map(|c| (l.u, l.v, c))
                .map_err(|_| TapError::Input(format!("bad cost {c:?}"))),
        })
        .collect::<Result<_>>()?;
    TapInstance::new(tree, links)
}
