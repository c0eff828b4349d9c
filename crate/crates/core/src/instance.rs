//! Trees, links, shadow completion, coverage and the basic predicates.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use fixedbitset::FixedBitSet;
use num_traits::{One, Signed};

use crate::error::{Result, TapError};
use crate::scalar::Rational;

pub type Vertex = usize;
pub type EdgeId = usize;
pub type LinkId = usize;
pub type EdgeSet = FixedBitSet;
pub type LinkSet = BTreeSet<LinkId>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tree {
    n: usize,
    edges: Vec<(Vertex, Vertex)>,
    root: Option<Vertex>,
    adj: Vec<Vec<(Vertex, EdgeId)>>,
    // canonical rooting at `root.unwrap_or(0)`
    parent: Vec<Option<(Vertex, EdgeId)>>,
    depth: Vec<usize>,
}

impl Tree {
    pub fn new(n: usize, edges: Vec<(Vertex, Vertex)>, root: Option<Vertex>) -> Result<Self> {
        let bad = |m: String| Err(TapError::InvalidInstance(m));
        if n == 0 {
            return bad("tree needs at least one vertex".into());
        }
        if edges.len() != n - 1 {
            return bad(format!("{} vertices need {} edges, got {}", n, n - 1, edges.len()));
        }
        if let Some(r) = root {
            if r >= n {
                return bad(format!("root {r} out of range"));
            }
        }
        let mut adj = vec![Vec::new(); n];
        let mut seen = BTreeSet::new();
        let mut norm = Vec::with_capacity(edges.len());
        for (id, &(u, v)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return bad(format!("edge {{{u},{v}}} has an endpoint out of range"));
            }
            if u == v {
                return bad(format!("self loop at {u}"));
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return bad(format!("parallel edge {{{u},{v}}}"));
            }
            adj[u].push((v, id));
            adj[v].push((u, id));
            norm.push(key);
        }
        for a in adj.iter_mut() {
            a.sort_unstable();
        }
        let base = root.unwrap_or(0);
        let mut parent = vec![None; n];
        let mut depth = vec![0; n];
        let mut visited = vec![false; n];
        visited[base] = true;
        let mut queue = VecDeque::from([base]);
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for &(w, e) in &adj[u] {
                if !visited[w] {
                    visited[w] = true;
                    parent[w] = Some((u, e));
                    depth[w] = depth[u] + 1;
                    reached += 1;
                    queue.push_back(w);
                }
            }
        }
        if reached != n {
            return bad("edge set is not connected".into());
        }
        Ok(Tree { n, edges: norm, root, adj, parent, depth })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }
    pub fn edge(&self, e: EdgeId) -> (Vertex, Vertex) {
        self.edges[e]
    }
    pub fn root(&self) -> Option<Vertex> {
        self.root
    }
    pub fn neighbors(&self, v: Vertex) -> &[(Vertex, EdgeId)] {
        &self.adj[v]
    }
    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }
    pub fn edge_between(&self, u: Vertex, v: Vertex) -> Option<EdgeId> {
        self.adj[u].iter().find(|&&(w, _)| w == v).map(|&(_, e)| e)
    }
    /// Depth of the deeper endpoint under the canonical rooting.
    pub fn edge_depth(&self, e: EdgeId) -> usize {
        let (u, v) = self.edges[e];
        self.depth[u].max(self.depth[v])
    }
    pub fn empty_edge_set(&self) -> EdgeSet {
        FixedBitSet::with_capacity(self.edges.len())
    }
    pub fn full_edge_set(&self) -> EdgeSet {
        let mut s = self.empty_edge_set();
        s.insert_range(..);
        s
    }

    fn check_vertex(&self, v: Vertex) -> Result<()> {
        if v >= self.n {
            Err(TapError::Input(format!("vertex {v} out of range")))
        } else {
            Ok(())
        }
    }

    /// Ordered edges of the unique u–v path.
    pub fn path(&self, u: Vertex, v: Vertex) -> Result<Vec<EdgeId>> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(TapError::EmptyPath(u));
        }
        let (mut a, mut b) = (u, v);
        let mut front = Vec::new();
        let mut back = Vec::new();
        while self.depth[a] > self.depth[b] {
            let (p, e) = self.parent[a].unwrap();
            front.push(e);
            a = p;
        }
        while self.depth[b] > self.depth[a] {
            let (p, e) = self.parent[b].unwrap();
            back.push(e);
            b = p;
        }
        while a != b {
            let (pa, ea) = self.parent[a].unwrap();
            let (pb, eb) = self.parent[b].unwrap();
            front.push(ea);
            back.push(eb);
            a = pa;
            b = pb;
        }
        back.reverse();
        front.extend(back);
        Ok(front)
    }

    /// Vertices of the u–v path in order, endpoints included.
    pub fn path_vertices(&self, u: Vertex, v: Vertex) -> Result<Vec<Vertex>> {
        let edges = self.path(u, v)?;
        let mut out = vec![u];
        let mut cur = u;
        for e in edges {
            let (a, b) = self.edges[e];
            cur = if a == cur { b } else { a };
            out.push(cur);
        }
        Ok(out)
    }

    /// Connected component of `start` using only edges in `allowed`.
    pub fn component(&self, start: Vertex, allowed: &EdgeSet) -> (Vec<Vertex>, EdgeSet) {
        let mut verts = vec![start];
        let mut edges = self.empty_edge_set();
        let mut queue = VecDeque::from([start]);
        let mut seen = BTreeSet::from([start]);
        while let Some(u) = queue.pop_front() {
            for &(w, e) in &self.adj[u] {
                if allowed.contains(e) && !edges.contains(e) {
                    edges.insert(e);
                    if seen.insert(w) {
                        verts.push(w);
                        queue.push_back(w);
                    }
                }
            }
        }
        verts.sort_unstable();
        (verts, edges)
    }

    pub fn rooted(&self, root: Vertex) -> Result<Rooted> {
        self.check_vertex(root)?;
        Ok(Rooted::new(self, root))
    }
}

pub fn tree_path(tree: &Tree, u: Vertex, v: Vertex) -> Result<Vec<EdgeId>> {
    tree.path(u, v)
}

/// The tree hung from an explicit root, with its principal subtrees.
#[derive(Clone, Debug)]
pub struct Rooted {
    pub root: Vertex,
    pub parent: Vec<Option<Vertex>>,
    pub parent_edge: Vec<Option<EdgeId>>,
    pub depth: Vec<usize>,
    pub children: Vec<Vec<Vertex>>,
    /// BFS order from the root.
    pub order: Vec<Vertex>,
    /// Principal subtree index of every non-root vertex.
    pub branch: Vec<Option<usize>>,
    /// Children of the root in ascending order; head of principal subtree i.
    pub heads: Vec<Vertex>,
    edge_count: usize,
}

impl Rooted {
    fn new(tree: &Tree, root: Vertex) -> Self {
        let n = tree.n();
        let mut parent = vec![None; n];
        let mut parent_edge = vec![None; n];
        let mut depth = vec![0; n];
        let mut children = vec![Vec::new(); n];
        let mut order = vec![root];
        let mut seen = vec![false; n];
        seen[root] = true;
        let mut i = 0;
        while i < order.len() {
            let u = order[i];
            i += 1;
            for &(w, e) in tree.neighbors(u) {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(u);
                    parent_edge[w] = Some(e);
                    depth[w] = depth[u] + 1;
                    children[u].push(w);
                    order.push(w);
                }
            }
        }
        let heads = children[root].clone();
        let mut branch = vec![None; n];
        for &u in &order[1..] {
            let p = parent[u].unwrap();
            branch[u] = if p == root {
                Some(heads.binary_search(&u).unwrap())
            } else {
                branch[p]
            };
        }
        Rooted {
            root,
            parent,
            parent_edge,
            depth,
            children,
            order,
            branch,
            heads,
            edge_count: tree.edge_count(),
        }
    }

    pub fn branch_count(&self) -> usize {
        self.heads.len()
    }

    /// Whether `a` lies on the root-to-`b` path (inclusive).
    pub fn is_ancestor(&self, a: Vertex, mut b: Vertex) -> bool {
        while self.depth[b] > self.depth[a] {
            b = self.parent[b].unwrap();
        }
        a == b
    }

    pub fn apex(&self, mut a: Vertex, mut b: Vertex) -> Vertex {
        while self.depth[a] > self.depth[b] {
            a = self.parent[a].unwrap();
        }
        while self.depth[b] > self.depth[a] {
            b = self.parent[b].unwrap();
        }
        while a != b {
            a = self.parent[a].unwrap();
            b = self.parent[b].unwrap();
        }
        a
    }

    /// Vertex set V_i of principal subtree i, root included, ascending.
    pub fn branch_vertices(&self, i: usize) -> Vec<Vertex> {
        let mut out: Vec<Vertex> = (0..self.parent.len())
            .filter(|&v| self.branch[v] == Some(i))
            .collect();
        out.push(self.root);
        out.sort_unstable();
        out
    }

    /// Edge set E_i of principal subtree i.
    pub fn branch_edges(&self, i: usize) -> EdgeSet {
        let mut s = FixedBitSet::with_capacity(self.edge_count);
        for v in 0..self.parent.len() {
            if self.branch[v] == Some(i) {
                s.insert(self.parent_edge[v].unwrap());
            }
        }
        s
    }

    pub fn in_branch(&self, v: Vertex, i: usize) -> bool {
        v == self.root || self.branch[v] == Some(i)
    }

    /// Non-root vertices without children in principal subtree i.
    pub fn branch_leaves(&self, i: usize) -> usize {
        (0..self.parent.len())
            .filter(|&v| self.branch[v] == Some(i) && self.children[v].is_empty())
            .count()
    }

    pub fn width(&self) -> usize {
        (0..self.heads.len()).map(|i| self.branch_leaves(i)).max().unwrap_or(0)
    }
}

pub fn is_k_wide(tree: &Tree, root: Vertex, k: usize) -> bool {
    match tree.rooted(root) {
        Ok(r) => r.width() <= k,
        Err(_) => false,
    }
}

/// Smallest k for which the tree is k-wide when hung from `root`.
pub fn width(tree: &Tree, root: Vertex) -> usize {
    Rooted::new(tree, root).width()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Link {
    pub u: Vertex,
    pub v: Vertex,
    pub cost: Rational,
    /// The input link this one stands for; shadows point at the link they
    /// were cut from.
    pub origin: LinkId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TapInstance {
    tree: Tree,
    links: Vec<Link>,
    shadow_closed: bool,
    paths: Vec<EdgeSet>,
    ends: Vec<(EdgeId, EdgeId)>,
    path_len: Vec<usize>,
    cov: Vec<Vec<LinkId>>,
    index: HashMap<(Vertex, Vertex), LinkId>,
}

impl TapInstance {
    /// Builds an instance, merging duplicate pairs (minimum cost kept; the
    /// first occurrence fixes the id).
    pub fn new(tree: Tree, links: Vec<(Vertex, Vertex, Rational)>) -> Result<Self> {
        let n = tree.n();
        let mut merged: Vec<Link> = Vec::new();
        let mut index: HashMap<(Vertex, Vertex), LinkId> = HashMap::new();
        for (u, v, cost) in links {
            if u >= n || v >= n {
                return Err(TapError::InvalidInstance(format!("link {{{u},{v}}} out of range")));
            }
            if u == v {
                return Err(TapError::InvalidInstance(format!("link {{{u},{u}}} is a loop")));
            }
            if !cost.is_positive() {
                return Err(TapError::Input(format!("link {{{u},{v}}} has nonpositive cost {cost}")));
            }
            let key = (u.min(v), u.max(v));
            match index.get(&key) {
                Some(&id) => {
                    if cost < merged[id].cost {
                        merged[id].cost = cost;
                    }
                }
                None => {
                    let id = merged.len();
                    index.insert(key, id);
                    merged.push(Link { u: key.0, v: key.1, cost, origin: id });
                }
            }
        }
        Ok(Self::build(tree, merged))
    }

    pub fn unit(tree: Tree, pairs: &[(Vertex, Vertex)]) -> Result<Self> {
        Self::new(tree, pairs.iter().map(|&(u, v)| (u, v, Rational::one())).collect())
    }

    fn build(tree: Tree, links: Vec<Link>) -> Self {
        let m = tree.edge_count();
        let mut paths = Vec::with_capacity(links.len());
        let mut ends = Vec::with_capacity(links.len());
        let mut path_len = Vec::with_capacity(links.len());
        let mut cov = vec![Vec::new(); m];
        let mut index = HashMap::new();
        for (id, l) in links.iter().enumerate() {
            let p = tree.path(l.u, l.v).expect("link endpoints validated");
            let mut s = FixedBitSet::with_capacity(m);
            for &e in &p {
                s.insert(e);
                cov[e].push(id);
            }
            ends.push((p[0], *p.last().unwrap()));
            path_len.push(p.len());
            paths.push(s);
            index.insert((l.u, l.v), id);
        }
        let mut inst = TapInstance {
            tree,
            links,
            shadow_closed: false,
            paths,
            ends,
            path_len,
            cov,
            index,
        };
        inst.shadow_closed = inst.check_closed();
        inst
    }

    fn check_closed(&self) -> bool {
        self.links.iter().all(|l| {
            let vs = self.tree.path_vertices(l.u, l.v).unwrap();
            vs.iter().enumerate().all(|(i, &a)| {
                vs[i + 1..].iter().all(|&b| self.link_id(a, b).is_some())
            })
        })
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }
    pub fn n(&self) -> usize {
        self.tree.n()
    }
    pub fn links(&self) -> &[Link] {
        &self.links
    }
    pub fn link(&self, id: LinkId) -> &Link {
        &self.links[id]
    }
    pub fn link_count(&self) -> usize {
        self.links.len()
    }
    pub fn shadow_closed(&self) -> bool {
        self.shadow_closed
    }
    pub fn path(&self, id: LinkId) -> &EdgeSet {
        &self.paths[id]
    }
    pub fn path_len(&self, id: LinkId) -> usize {
        self.path_len[id]
    }
    /// First and last edge of P_ℓ (at u and at v).
    pub fn end_edges(&self, id: LinkId) -> (EdgeId, EdgeId) {
        self.ends[id]
    }
    pub fn cov(&self, e: EdgeId) -> &[LinkId] {
        &self.cov[e]
    }
    pub fn cost(&self, id: LinkId) -> &Rational {
        &self.links[id].cost
    }
    pub fn link_id(&self, u: Vertex, v: Vertex) -> Option<LinkId> {
        self.index.get(&(u.min(v), u.max(v))).copied()
    }
    pub fn is_unit_cost(&self) -> bool {
        self.links.iter().all(|l| l.cost.is_one())
    }
    pub fn total_cost<'a>(&self, ids: impl IntoIterator<Item = &'a LinkId>) -> Rational {
        ids.into_iter().fold(Rational::from_integer(0.into()), |acc, &id| acc + &self.links[id].cost)
    }
    pub fn covers(&self, id: LinkId, e: EdgeId) -> bool {
        self.paths[id].contains(e)
    }

    /// Replace every link by the input link it stands for.
    pub fn map_to_original(&self, sol: &LinkSet) -> LinkSet {
        sol.iter().map(|&id| self.links[id].origin).collect()
    }

    /// Edges covered by a link set.
    pub fn covered_edges<'a>(&self, sol: impl IntoIterator<Item = &'a LinkId>) -> EdgeSet {
        let mut s = self.tree.empty_edge_set();
        for &id in sol {
            s.union_with(&self.paths[id]);
        }
        s
    }

    /// Links meeting an edge set, as a bitset-backed scan.
    pub fn cover_set(&self, edges: &EdgeSet) -> LinkSet {
        (0..self.links.len())
            .filter(|&id| !self.paths[id].is_disjoint(edges))
            .collect()
    }

    /// A fresh instance over the same tree with different links (costs kept
    /// as given, origins reset).
    pub fn with_links(&self, links: Vec<(Vertex, Vertex, Rational)>) -> Result<Self> {
        TapInstance::new(self.tree.clone(), links)
    }
}

/// Add every shadow {u,v} (u,v on P_ℓ). A pair reachable from several links
/// takes the cheapest one as origin; an input link keeps itself unless a
/// strictly cheaper link contains it.
pub fn shadow_complete(inst: &TapInstance) -> TapInstance {
    let tree = inst.tree();
    // key: (cost, not_self, origin)
    let mut best: BTreeMap<(Vertex, Vertex), (Rational, bool, LinkId)> = BTreeMap::new();
    let mut fresh: Vec<(Vertex, Vertex)> = Vec::new();
    for l in inst.links() {
        best.insert((l.u, l.v), (l.cost.clone(), false, l.origin));
    }
    for l in inst.links() {
        let vs = tree.path_vertices(l.u, l.v).unwrap();
        for i in 0..vs.len() {
            for j in i + 1..vs.len() {
                let key = (vs[i].min(vs[j]), vs[i].max(vs[j]));
                let cand = (l.cost.clone(), true, l.origin);
                match best.get_mut(&key) {
                    Some(cur) => {
                        if cand < *cur {
                            *cur = cand;
                        }
                    }
                    None => {
                        best.insert(key, cand);
                        fresh.push(key);
                    }
                }
            }
        }
    }
    let mut links: Vec<Link> = inst
        .links()
        .iter()
        .map(|l| {
            let (cost, _, origin) = best[&(l.u, l.v)].clone();
            Link { u: l.u, v: l.v, cost, origin }
        })
        .collect();
    for key in fresh {
        let (cost, _, origin) = best[&key].clone();
        links.push(Link { u: key.0, v: key.1, cost, origin });
    }
    let out = TapInstance::build(tree.clone(), links);
    debug_assert!(out.shadow_closed);
    out
}

pub fn cover(inst: &TapInstance, edges: &[EdgeId]) -> Result<LinkSet> {
    let mut s = inst.tree().empty_edge_set();
    for &e in edges {
        if e >= inst.tree().edge_count() {
            return Err(TapError::UnknownEdge(e));
        }
        s.insert(e);
    }
    Ok(inst.cover_set(&s))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkClassification {
    pub root: Vertex,
    pub cross: LinkSet,
    pub inlinks: LinkSet,
    pub up: LinkSet,
    pub crit_cross: LinkSet,
    pub nocrit_cross: LinkSet,
    pub critical_vertices: BTreeSet<Vertex>,
}

impl LinkClassification {
    pub fn is_critical(&self, v: Vertex) -> bool {
        self.critical_vertices.contains(&v)
    }
}

pub fn classify(inst: &TapInstance, root: Vertex) -> Result<LinkClassification> {
    let r = inst.tree().rooted(root)?;
    Ok(classify_rooted(inst, &r))
}

pub fn classify_rooted(inst: &TapInstance, r: &Rooted) -> LinkClassification {
    let tree = inst.tree();
    let critical_vertices: BTreeSet<Vertex> =
        (0..tree.n()).filter(|&v| v != r.root && tree.degree(v) != 2).collect();
    let mut c = LinkClassification {
        root: r.root,
        cross: LinkSet::new(),
        inlinks: LinkSet::new(),
        up: LinkSet::new(),
        crit_cross: LinkSet::new(),
        nocrit_cross: LinkSet::new(),
        critical_vertices,
    };
    for (id, l) in inst.links().iter().enumerate() {
        let cross = l.u != r.root && l.v != r.root && r.branch[l.u] != r.branch[l.v];
        if cross {
            c.cross.insert(id);
            if c.is_critical(l.u) && c.is_critical(l.v) {
                c.crit_cross.insert(id);
            } else {
                c.nocrit_cross.insert(id);
            }
        } else {
            c.inlinks.insert(id);
            if r.is_ancestor(l.u, l.v) || r.is_ancestor(l.v, l.u) {
                c.up.insert(id);
            }
        }
    }
    c
}

/// Every tree edge lies on the path of some chosen link.
pub fn covers_all(inst: &TapInstance, sol: &LinkSet) -> bool {
    inst.covered_edges(sol).count_ones(..) == inst.tree().edge_count()
}

/// T plus the chosen links has no bridge (iterative low-link DFS that skips
/// only the edge it arrived by, so parallel edges count).
pub fn two_edge_connected(inst: &TapInstance, sol: &LinkSet) -> bool {
    let tree = inst.tree();
    let n = tree.n();
    let mut adj: Vec<Vec<(Vertex, usize)>> = vec![Vec::new(); n];
    let mut eid = 0;
    for &(u, v) in tree.edges() {
        adj[u].push((v, eid));
        adj[v].push((u, eid));
        eid += 1;
    }
    for &id in sol {
        let l = inst.link(id);
        adj[l.u].push((l.v, eid));
        adj[l.v].push((l.u, eid));
        eid += 1;
    }
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut timer = 0;
    // frame: (vertex, arriving edge, next neighbour index)
    let mut stack: Vec<(Vertex, usize, usize)> = vec![(0, usize::MAX, 0)];
    disc[0] = 0;
    low[0] = 0;
    timer += 1;
    while let Some(top) = stack.last_mut() {
        let (u, via) = (top.0, top.1);
        if top.2 < adj[u].len() {
            let (w, e) = adj[u][top.2];
            top.2 += 1;
            if e == via {
                continue;
            }
            if disc[w] == usize::MAX {
                disc[w] = timer;
                low[w] = timer;
                timer += 1;
                stack.push((w, e, 0));
            } else {
                low[u] = low[u].min(disc[w]);
            }
        } else {
            stack.pop();
            if let Some(&(p, _, _)) = stack.last() {
                low[p] = low[p].min(low[u]);
                if low[u] > disc[p] {
                    return false;
                }
            }
        }
    }
    true
}

pub fn is_feasible(inst: &TapInstance, sol: &LinkSet) -> bool {
    let by_cover = covers_all(inst, sol);
    debug_assert_eq!(by_cover, two_edge_connected(inst, sol), "coverage and bridge tests disagree");
    by_cover
}

/// Whether `a` could be replaced by a proper shadow without changing
/// P_a ∪ P_b. P_a ∩ P_b is a subpath of P_a, so this happens exactly when it
/// contains an end edge of P_a (and P_a has a proper subpath at all).
pub fn shortenable(inst: &TapInstance, a: LinkId, b: LinkId) -> bool {
    if inst.path_len(a) < 2 {
        return false;
    }
    let (e1, e2) = inst.end_edges(a);
    inst.covers(b, e1) || inst.covers(b, e2)
}

pub fn pair_shadow_minimal(inst: &TapInstance, a: LinkId, b: LinkId) -> bool {
    !shortenable(inst, a, b) && !shortenable(inst, b, a)
}

pub fn is_shadow_minimal(inst: &TapInstance, sol: &LinkSet) -> bool {
    let ids: Vec<LinkId> = sol.iter().copied().collect();
    ids.iter().enumerate().all(|(i, &a)| ids[i + 1..].iter().all(|&b| pair_shadow_minimal(inst, a, b)))
}
