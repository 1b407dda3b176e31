//! Finite trees, their n-fold products, order queries and subset machinery.
//!
//! Order convention: "larger = nearer the root". For vertices of a single
//! tree, `a <= b` means `b` is an ancestor of `a` (or equal). The product
//! order on an n-tree is coordinatewise.

use crate::error::{Error, Result};
use rand::Rng;

/// Hard cap for exhaustive down-set enumeration.
pub const DOWN_SET_ENUM_CAP: usize = 20;

/// A finite rooted tree given by its parent relation.
///
/// Vertex 0 is the root of generated trees; the type itself only requires
/// the parent relation to be acyclic (forests are representable but the
/// generators emit rooted trees only).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    parent: Vec<Option<u32>>,
    depth: Vec<u32>,
    children: Vec<Vec<u32>>,
    /// Vertices ordered by increasing depth (roots first).
    by_depth: Vec<u32>,
}

impl Tree {
    /// Builds a tree from a parent list, computing depths and checking acyclicity.
    pub fn from_parents(parent: Vec<Option<u32>>) -> Result<Self> {
        let n = parent.len();
        if n == 0 {
            return Err(Error::Precondition("tree must have at least one vertex".into()));
        }
        let mut depth = vec![u32::MAX; n];
        for v in 0..n {
            // walk to a root, detecting cycles by bounding the walk length
            let mut chain = Vec::new();
            let mut cur = v;
            while depth[cur] == u32::MAX {
                chain.push(cur);
                if chain.len() > n {
                    return Err(Error::Precondition("parent relation has a cycle".into()));
                }
                match parent[cur] {
                    Some(p) => {
                        let p = p as usize;
                        if p >= n {
                            return Err(Error::Precondition(format!(
                                "parent index {p} out of range"
                            )));
                        }
                        cur = p;
                    }
                    None => {
                        depth[cur] = 0;
                        break;
                    }
                }
            }
            let mut d = depth[cur];
            for &u in chain.iter().rev() {
                if u != cur {
                    d += 1;
                    depth[u] = d;
                }
            }
        }
        let mut children = vec![Vec::new(); n];
        for v in 0..n {
            if let Some(p) = parent[v] {
                children[p as usize].push(v as u32);
            }
        }
        let mut by_depth: Vec<u32> = (0..n as u32).collect();
        by_depth.sort_by_key(|&v| depth[v as usize]);
        Ok(Tree { parent, depth, children, by_depth })
    }

    /// Complete arity-regular tree of the given depth; root is vertex 0.
    pub fn dyadic(depth: u32, arity: u32, vertex_budget: usize) -> Result<Self> {
        if depth > 12 || !(1..=3).contains(&arity) {
            return Err(Error::Precondition(format!(
                "dyadic tree requires depth <= 12 and arity in 1..=3, got ({depth}, {arity})"
            )));
        }
        let leaves = (arity as usize).checked_pow(depth).ok_or(Error::SizeBudget)?;
        if leaves > vertex_budget {
            return Err(Error::SizeBudget);
        }
        let mut parent = vec![None];
        let mut level_start = 0usize;
        let mut level_len = 1usize;
        for _ in 0..depth {
            let next_start = parent.len();
            for v in level_start..level_start + level_len {
                for _ in 0..arity {
                    parent.push(Some(v as u32));
                }
            }
            level_start = next_start;
            level_len *= arity as usize;
        }
        Self::from_parents(parent)
    }

    /// Random tree by sequential attachment; always rooted at vertex 0.
    pub fn random<R: Rng>(rng: &mut R, max_vertices: usize) -> Self {
        let n = rng.gen_range(1..=max_vertices.max(1));
        let mut parent = vec![None];
        for v in 1..n {
            parent.push(Some(rng.gen_range(0..v) as u32));
        }
        Self::from_parents(parent).expect("sequential attachment is acyclic")
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn parent(&self, v: u32) -> Option<u32> {
        self.parent[v as usize]
    }

    pub fn parents(&self) -> &[Option<u32>] {
        &self.parent
    }

    pub fn depth(&self, v: u32) -> u32 {
        self.depth[v as usize]
    }

    pub fn max_depth(&self) -> u32 {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    pub fn children(&self, v: u32) -> &[u32] {
        &self.children[v as usize]
    }

    /// Vertices sorted root-first by depth.
    pub fn by_depth(&self) -> &[u32] {
        &self.by_depth
    }

    pub fn leaves(&self) -> Vec<u32> {
        (0..self.len() as u32).filter(|&v| self.children(v).is_empty()).collect()
    }

    /// True iff `anc >= v` in tree order, i.e. `anc` is an ancestor of `v` or equal.
    pub fn is_ancestor_or_eq(&self, anc: u32, v: u32) -> bool {
        let mut cur = v;
        while self.depth(cur) > self.depth(anc) {
            match self.parent(cur) {
                Some(p) => cur = p,
                None => return false,
            }
        }
        cur == anc
    }

    /// Least common ancestor: the minimal `c` with `c >= a` and `c >= b`.
    pub fn lca(&self, a: u32, b: u32) -> Option<u32> {
        let (mut a, mut b) = (a, b);
        while self.depth(a) > self.depth(b) {
            a = self.parent(a)?;
        }
        while self.depth(b) > self.depth(a) {
            b = self.parent(b)?;
        }
        while a != b {
            a = self.parent(a)?;
            b = self.parent(b)?;
        }
        Some(a)
    }

    /// Chain of ancestors of `v`, from `v` itself to the root.
    pub fn ancestors(&self, v: u32) -> Vec<u32> {
        let mut out = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent(cur) {
            out.push(p);
            cur = p;
        }
        out
    }
}

/// An n-fold cartesian product of trees with the product order.
///
/// Product vertices are addressed by a mixed-radix linear index; dense
/// fields are flat arrays over this index.
#[derive(Debug, Clone)]
pub struct NTree {
    trees: Vec<Tree>,
    strides: Vec<usize>,
    size: usize,
}

impl NTree {
    pub fn new(trees: Vec<Tree>) -> Result<Self> {
        if trees.is_empty() || trees.len() > 4 {
            return Err(Error::Precondition(format!(
                "n-tree arity must be in 1..=4, got {}",
                trees.len()
            )));
        }
        let mut size = 1usize;
        for t in &trees {
            size = size.checked_mul(t.len()).ok_or(Error::SizeBudget)?;
        }
        let n = trees.len();
        let mut strides = vec![1usize; n];
        for j in (0..n.saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * trees[j + 1].len();
        }
        Ok(NTree { trees, strides, size })
    }

    pub fn arity(&self) -> usize {
        self.trees.len()
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn tree(&self, j: usize) -> &Tree {
        &self.trees[j]
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn stride(&self, j: usize) -> usize {
        self.strides[j]
    }

    pub fn index(&self, coords: &[u32]) -> usize {
        debug_assert_eq!(coords.len(), self.arity());
        coords
            .iter()
            .zip(&self.strides)
            .map(|(&c, &s)| c as usize * s)
            .sum()
    }

    pub fn coords(&self, index: usize) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.arity());
        let mut rem = index;
        for j in 0..self.arity() {
            out.push((rem / self.strides[j]) as u32);
            rem %= self.strides[j];
        }
        out
    }

    pub fn coord(&self, index: usize, j: usize) -> u32 {
        ((index / self.strides[j]) % self.trees[j].len()) as u32
    }

    /// Replaces coordinate `j` of the product index by vertex `v`.
    pub fn with_coord(&self, index: usize, j: usize, v: u32) -> usize {
        let old = self.coord(index, j) as usize;
        index.wrapping_add((v as usize).wrapping_sub(old).wrapping_mul(self.strides[j]))
    }

    /// Product order: `a <= b` iff every coordinate of `b` is an
    /// ancestor-or-equal of the corresponding coordinate of `a`.
    pub fn leq(&self, a: usize, b: usize) -> bool {
        (0..self.arity()).all(|j| self.trees[j].is_ancestor_or_eq(self.coord(b, j), self.coord(a, j)))
    }

    /// Coordinatewise least common ancestor: the minimal `c >= a, b`.
    pub fn join(&self, a: usize, b: usize) -> usize {
        let coords: Vec<u32> = (0..self.arity())
            .map(|j| {
                self.trees[j]
                    .lca(self.coord(a, j), self.coord(b, j))
                    .expect("generated trees are rooted")
            })
            .collect();
        self.index(&coords)
    }

    /// Sum of a per-coordinate function over all ancestors of `index`
    /// (the order interval from `index` up to the root tuple).
    pub fn for_each_ancestor(&self, index: usize, mut f: impl FnMut(usize)) {
        let chains: Vec<Vec<u32>> = (0..self.arity())
            .map(|j| self.trees[j].ancestors(self.coord(index, j)))
            .collect();
        self.for_each_in_chains(&chains, &mut f);
    }

    /// Visits the order interval `[lo, hi]` (requires `lo <= hi`).
    pub fn for_each_between(&self, lo: usize, hi: usize, mut f: impl FnMut(usize)) {
        let chains: Vec<Vec<u32>> = (0..self.arity())
            .map(|j| {
                let target = self.coord(hi, j);
                let mut chain = Vec::new();
                let mut cur = self.coord(lo, j);
                loop {
                    chain.push(cur);
                    if cur == target {
                        break;
                    }
                    cur = self.trees[j].parent(cur).expect("lo <= hi required");
                }
                chain
            })
            .collect();
        self.for_each_in_chains(&chains, &mut f);
    }

    fn for_each_in_chains(&self, chains: &[Vec<u32>], f: &mut impl FnMut(usize)) {
        let n = self.arity();
        let mut pos = vec![0usize; n];
        loop {
            let idx: usize = (0..n)
                .map(|j| chains[j][pos[j]] as usize * self.strides[j])
                .sum();
            f(idx);
            let mut j = n;
            loop {
                if j == 0 {
                    return;
                }
                j -= 1;
                pos[j] += 1;
                if pos[j] < chains[j].len() {
                    break;
                }
                pos[j] = 0;
            }
        }
    }

    /// Immediate lower covers of a product vertex: one coordinate replaced
    /// by one of its children.
    pub fn lower_covers(&self, index: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for j in 0..self.arity() {
            let v = self.coord(index, j);
            for &c in self.trees[j].children(v) {
                out.push(self.with_coord(index, j, c));
            }
        }
        out
    }

    /// Immediate upper covers: one coordinate replaced by its parent.
    pub fn upper_covers(&self, index: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for j in 0..self.arity() {
            let v = self.coord(index, j);
            if let Some(p) = self.trees[j].parent(v) {
                out.push(self.with_coord(index, j, p));
            }
        }
        out
    }

    /// Product vertices all of whose coordinates are leaves.
    pub fn leaf_indices(&self) -> Vec<usize> {
        let mut out = vec![0usize];
        for j in 0..self.arity() {
            let leaves = self.trees[j].leaves();
            let mut next = Vec::with_capacity(out.len() * leaves.len());
            for &base in &out {
                for &l in &leaves {
                    next.push(base + l as usize * self.strides[j]);
                }
            }
            out = next;
        }
        out
    }

    /// Linear extension with all smaller (deeper) elements first.
    pub fn deepest_first_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.size).collect();
        order.sort_by_key(|&i| {
            std::cmp::Reverse(
                (0..self.arity())
                    .map(|j| self.trees[j].depth(self.coord(i, j)))
                    .sum::<u32>(),
            )
        });
        order
    }
}

/// Subset of the product given by a boolean mask; closed downward.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DownSet {
    members: Vec<bool>,
}

impl DownSet {
    /// Downward closure of an arbitrary seed set.
    pub fn closure(t: &NTree, seeds: impl IntoIterator<Item = usize>) -> Self {
        let mut members = vec![false; t.size()];
        let mut stack: Vec<usize> = Vec::new();
        for s in seeds {
            if !members[s] {
                members[s] = true;
                stack.push(s);
            }
        }
        while let Some(v) = stack.pop() {
            for c in t.lower_covers(v) {
                if !members[c] {
                    members[c] = true;
                    stack.push(c);
                }
            }
        }
        DownSet { members }
    }

    pub fn from_mask(t: &NTree, members: Vec<bool>) -> Result<Self> {
        let d = DownSet { members };
        if !d.is_closed(t) {
            return Err(Error::Precondition("mask is not downward closed".into()));
        }
        Ok(d)
    }

    pub fn empty(t: &NTree) -> Self {
        DownSet { members: vec![false; t.size()] }
    }

    pub fn full(t: &NTree) -> Self {
        DownSet { members: vec![true; t.size()] }
    }

    pub fn is_closed(&self, t: &NTree) -> bool {
        (0..t.size()).all(|v| !self.members[v] || t.lower_covers(v).iter().all(|&c| self.members[c]))
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members[v]
    }

    pub fn mask(&self) -> &[bool] {
        &self.members
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i)
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.members.iter().any(|&m| m)
    }

    /// Inserts a vertex together with everything below it.
    pub fn insert_closed(&mut self, t: &NTree, v: usize) {
        if self.members[v] {
            return;
        }
        let mut stack = vec![v];
        self.members[v] = true;
        while let Some(u) = stack.pop() {
            for c in t.lower_covers(u) {
                if !self.members[c] {
                    self.members[c] = true;
                    stack.push(c);
                }
            }
        }
    }
}

/// Plain subset of the product with no closure invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexSet {
    pub members: Vec<bool>,
}

impl VertexSet {
    pub fn empty(t: &NTree) -> Self {
        VertexSet { members: vec![false; t.size()] }
    }

    pub fn from_indices(t: &NTree, it: impl IntoIterator<Item = usize>) -> Self {
        let mut members = vec![false; t.size()];
        for i in it {
            members[i] = true;
        }
        VertexSet { members }
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members[v]
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i)
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.members.iter().any(|&m| m)
    }
}

/// Every down-set of the product, exactly once (including the empty and
/// full sets). Refuses products larger than [`DOWN_SET_ENUM_CAP`]: the
/// count can be exponential, callers must sample beyond the cap.
pub fn enumerate_down_sets(t: &NTree) -> Result<Vec<DownSet>> {
    if t.size() > DOWN_SET_ENUM_CAP {
        return Err(Error::SizeBudget);
    }
    let order = t.deepest_first_order();
    // lower covers precomputed per vertex
    let covers: Vec<Vec<usize>> = (0..t.size()).map(|v| t.lower_covers(v)).collect();
    let mut out = Vec::new();
    let mut current = vec![false; t.size()];
    fn rec(
        k: usize,
        order: &[usize],
        covers: &[Vec<usize>],
        current: &mut Vec<bool>,
        out: &mut Vec<DownSet>,
    ) {
        if k == order.len() {
            out.push(DownSet { members: current.clone() });
            return;
        }
        let v = order[k];
        rec(k + 1, order, covers, current, out);
        if covers[v].iter().all(|&c| current[c]) {
            current[v] = true;
            rec(k + 1, order, covers, current, out);
            current[v] = false;
        }
    }
    rec(0, &order, &covers, &mut current, &mut out);
    Ok(out)
}

/// Down-set produced by downward-closing a random vertex sample.
/// Deterministic for a fixed rng state; not uniformly distributed.
pub fn random_down_set<R: Rng>(t: &NTree, rng: &mut R) -> DownSet {
    let k = rng.gen_range(0..=t.arity() + 2);
    let seeds: Vec<usize> = (0..k).map(|_| rng.gen_range(0..t.size())).collect();
    DownSet::closure(t, seeds)
}
