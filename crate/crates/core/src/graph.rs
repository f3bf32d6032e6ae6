//! Simple undirected graphs and two-sided partitions.
//!
//! Vertices of a [`Graph`] are addressed by local index `0..n`. Each vertex
//! also carries an original label (its *id*); ids are strictly increasing in
//! local index and survive [`Graph::induced_subgraph`]. A [`Partition`] is
//! keyed by id, so a partition of a subgraph can be compared directly with a
//! partition of the graph it came from.

use std::collections::BTreeMap;

use crate::error::{invalid, Error, Result};

/// Immutable simple undirected graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    ids: Vec<usize>,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Graph on vertices `0..n` (ids equal indices).
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::with_ids((0..n).collect(), edges)
    }

    /// Graph whose local vertex `i` carries label `ids[i]`. `ids` must be
    /// strictly increasing; edges are given in local indices.
    pub fn with_ids(ids: Vec<usize>, edges: &[(usize, usize)]) -> Result<Self> {
        if ids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("vertex ids must be strictly increasing"));
        }
        let n = ids.len();
        let mut normalized = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= n {
                return Err(Error::VertexOutOfRange(u));
            }
            if v >= n {
                return Err(Error::VertexOutOfRange(v));
            }
            if u == v {
                return Err(invalid(format!("self-loop at vertex {u}")));
            }
            normalized.push((u.min(v), u.max(v)));
        }
        normalized.sort_unstable();
        if let Some(w) = normalized.windows(2).find(|w| w[0] == w[1]) {
            return Err(invalid(format!("duplicate edge {{{}, {}}}", w[0].0, w[0].1)));
        }
        Ok(Self::from_sorted_unchecked(ids, normalized))
    }

    /// `edges` must be sorted, deduplicated, with `u < v < ids.len()`.
    pub(crate) fn from_sorted_unchecked(ids: Vec<usize>, edges: Vec<(usize, usize)>) -> Self {
        let n = ids.len();
        let mut degree = vec![0usize; n];
        for &(u, v) in &edges {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..n].to_vec();
        let mut neighbors = vec![0usize; offsets[n]];
        // Lexicographic edge order fills each list in increasing neighbor order.
        for &(u, v) in &edges {
            neighbors[cursor[u]] = v;
            cursor[u] += 1;
        }
        for &(u, v) in &edges {
            neighbors[cursor[v]] = u;
            cursor[v] += 1;
        }
        for i in 0..n {
            neighbors[offsets[i]..offsets[i + 1]].sort_unstable();
        }
        Graph {
            ids,
            offsets,
            neighbors,
            edges,
        }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_sorted_unchecked((0..n).collect(), Vec::new())
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .collect();
        Self::from_sorted_unchecked((0..n).collect(), edges)
    }

    pub fn path(n: usize) -> Self {
        let edges = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_sorted_unchecked((0..n).collect(), edges)
    }

    pub fn num_vertices(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v)` with `u < v`, sorted lexicographically.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn vertex_ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn vertex_id(&self, v: usize) -> usize {
        self.ids[v]
    }

    /// Local index of the vertex labelled `id`.
    pub fn index_of(&self, id: usize) -> Option<usize> {
        self.ids.binary_search(&id).ok()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.num_vertices()).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.num_vertices() && self.neighbors(u).binary_search(&v).is_ok()
    }

    /// `out = A x`.
    pub fn adjacency_matvec(&self, x: &[f64], out: &mut [f64]) {
        for (v, o) in out.iter_mut().enumerate() {
            *o = self.neighbors(v).iter().map(|&u| x[u]).sum();
        }
    }

    /// Subgraph on the given local vertices. The subset is sorted and
    /// deduplicated first; the new graph keeps the original ids.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> Result<Graph> {
        let n = self.num_vertices();
        let mut subset = vertices.to_vec();
        subset.sort_unstable();
        subset.dedup();
        if let Some(&v) = subset.iter().find(|&&v| v >= n) {
            return Err(Error::VertexOutOfRange(v));
        }
        let mut local = vec![usize::MAX; n];
        for (k, &v) in subset.iter().enumerate() {
            local[v] = k;
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(u, v)| local[u] != usize::MAX && local[v] != usize::MAX)
            .map(|&(u, v)| (local[u], local[v]))
            .collect();
        let ids = subset.iter().map(|&v| self.ids[v]).collect();
        Ok(Self::from_sorted_unchecked(ids, edges))
    }

    /// Number of neighbors of `v` inside `set` (local indices).
    pub fn edges_to_set(&self, v: usize, set: &[usize]) -> Result<usize> {
        if v >= self.num_vertices() {
            return Err(Error::VertexOutOfRange(v));
        }
        let nbrs = self.neighbors(v);
        Ok(set
            .iter()
            .filter(|&&u| u != v && nbrs.binary_search(&u).is_ok())
            .count())
    }
}

/// One side of a bisection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Side::Plus => 1,
            Side::Minus => -1,
        }
    }

    pub fn flip(self) -> Side {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }

    /// `+1` for non-negative values, so exact zeros go to the plus side.
    pub fn of(x: f64) -> Side {
        if x < 0.0 {
            Side::Minus
        } else {
            Side::Plus
        }
    }
}

/// Assignment of vertex ids to sides.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Partition {
    ids: Vec<usize>,
    sides: Vec<Side>,
}

impl Partition {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, Side)>) -> Result<Self> {
        let map: Vec<(usize, Side)> = pairs.into_iter().collect();
        let mut sorted = BTreeMap::new();
        for (id, side) in map {
            if sorted.insert(id, side).is_some() {
                return Err(invalid(format!("vertex {id} assigned twice")));
            }
        }
        let (ids, sides) = sorted.into_iter().unzip();
        Ok(Partition { ids, sides })
    }

    /// Partition of `graph` from per-local-vertex signs.
    pub fn from_signs(graph: &Graph, signs: &[Side]) -> Result<Self> {
        if signs.len() != graph.num_vertices() {
            return Err(Error::DimensionMismatch {
                expected: graph.num_vertices(),
                got: signs.len(),
            });
        }
        Ok(Partition {
            ids: graph.vertex_ids().to_vec(),
            sides: signs.to_vec(),
        })
    }

    /// Plus side from `s1`, minus side from `s2` (ids).
    pub fn from_sets(s1: &[usize], s2: &[usize]) -> Result<Self> {
        Self::from_pairs(
            s1.iter()
                .map(|&v| (v, Side::Plus))
                .chain(s2.iter().map(|&v| (v, Side::Minus))),
        )
    }

    /// The planted layout: ids `0..n1` on the plus side, `n1..n1+n2` minus.
    pub fn planted(n1: usize, n2: usize) -> Self {
        let ids = (0..n1 + n2).collect();
        let sides = (0..n1 + n2)
            .map(|i| if i < n1 { Side::Plus } else { Side::Minus })
            .collect();
        Partition { ids, sides }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn side(&self, id: usize) -> Option<Side> {
        self.ids.binary_search(&id).ok().map(|k| self.sides[k])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Side)> + '_ {
        self.ids.iter().copied().zip(self.sides.iter().copied())
    }

    pub fn members(&self, side: Side) -> Vec<usize> {
        self.iter().filter(|&(_, s)| s == side).map(|(v, _)| v).collect()
    }

    pub fn count(&self, side: Side) -> usize {
        self.sides.iter().filter(|&&s| s == side).count()
    }

    /// `g = 1_{S1} - 1_{S2}` in the local vertex order of `graph`.
    pub fn sign_vector(&self, graph: &Graph) -> Result<Vec<f64>> {
        graph
            .vertex_ids()
            .iter()
            .map(|&id| {
                self.side(id)
                    .map(Side::sign)
                    .ok_or(Error::PartitionMissingVertex(id))
            })
            .collect()
    }

    pub fn flipped(&self) -> Partition {
        Partition {
            ids: self.ids.clone(),
            sides: self.sides.iter().map(|s| s.flip()).collect(),
        }
    }

    /// Same partition, with the smallest id on the plus side.
    pub fn canonical(&self) -> Partition {
        match self.sides.first() {
            Some(Side::Minus) => self.flipped(),
            _ => self.clone(),
        }
    }

    pub fn equal_up_to_flip(&self, other: &Partition) -> bool {
        self.ids == other.ids
            && (self.sides == other.sides
                || self.sides.iter().zip(&other.sides).all(|(a, b)| *a != *b))
    }

    /// Restriction to the given ids; ids absent from `self` are skipped.
    pub fn restrict(&self, ids: &[usize]) -> Partition {
        let mut pairs: Vec<(usize, Side)> = ids
            .iter()
            .filter_map(|&id| self.side(id).map(|s| (id, s)))
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        let (ids, sides) = pairs.into_iter().unzip();
        Partition { ids, sides }
    }
}
