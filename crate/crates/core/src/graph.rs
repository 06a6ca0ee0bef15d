//! Undirected simple graphs stored as per-vertex bit rows, plus the de Bruijn
//! family and the ball primitives every solver consumes.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest vertex count a [`Graph`] will hold. Adjacency is quadratic in bits.
pub const MAX_VERTICES: usize = 1 << 14;

/// A subset of `0..len` stored as packed bits.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    len: usize,
    words: Vec<u64>,
}

impl VertexSet {
    pub fn new(len: usize) -> Self {
        VertexSet {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn full(len: usize) -> Self {
        let mut s = Self::new(len);
        for v in 0..len {
            s.insert(v);
        }
        s
    }

    /// Builds a set from indices; panics if an index is `>= len`.
    pub fn from_indices<I: IntoIterator<Item = usize>>(len: usize, indices: I) -> Self {
        let mut s = Self::new(len);
        for v in indices {
            s.insert(v);
        }
        s
    }

    /// Low 128 bits as a mask. `None` when the universe is wider than 128.
    pub fn to_u128(&self) -> Option<u128> {
        if self.len > 128 {
            return None;
        }
        let lo = self.words.first().copied().unwrap_or(0) as u128;
        let hi = self.words.get(1).copied().unwrap_or(0) as u128;
        Some(lo | (hi << 64))
    }

    pub fn from_u128(len: usize, mask: u128) -> Self {
        assert!(len <= 128);
        let mut s = Self::new(len);
        if let Some(w) = s.words.get_mut(0) {
            *w = mask as u64;
        }
        if let Some(w) = s.words.get_mut(1) {
            *w = (mask >> 64) as u64;
        }
        s
    }

    /// Size of the universe, not the number of members.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn contains(&self, v: usize) -> bool {
        v < self.len && self.words[v / 64] >> (v % 64) & 1 == 1
    }

    pub fn insert(&mut self, v: usize) {
        assert!(v < self.len, "vertex {v} out of range {}", self.len);
        self.words[v / 64] |= 1 << (v % 64);
    }

    pub fn remove(&mut self, v: usize) {
        if v < self.len {
            self.words[v / 64] &= !(1 << (v % 64));
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    fn zip_with(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Self {
        assert_eq!(self.len, other.len, "vertex set universes differ");
        VertexSet {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn union(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn symmetric_difference(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a ^ b)
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl PartialOrd for VertexSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Orders by universe size, then lexicographically by sorted member list.
impl Ord for VertexSet {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len
            .cmp(&other.len)
            .then_with(|| self.iter().cmp(other.iter()))
    }
}

/// Alphabet size and word length of an undirected de Bruijn graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeBruijnParams {
    pub d: usize,
    pub n: usize,
}

impl DeBruijnParams {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArgument(format!("alphabet size {d} < 2")));
        }
        if n < 1 {
            return Err(Error::InvalidArgument("word length must be at least 1".into()));
        }
        let p = DeBruijnParams { d, n };
        p.vertex_count()?;
        Ok(p)
    }

    /// `d^n`, or a capacity error if it overflows or exceeds [`MAX_VERTICES`].
    pub fn vertex_count(&self) -> Result<usize> {
        let count = u32::try_from(self.n)
            .ok()
            .and_then(|n| self.d.checked_pow(n))
            .ok_or_else(|| Error::Capacity(format!("{}^{} overflows", self.d, self.n)))?;
        if count > MAX_VERTICES {
            return Err(Error::Capacity(format!(
                "{}^{} = {count} vertices exceeds {MAX_VERTICES}",
                self.d, self.n
            )));
        }
        Ok(count)
    }
}

impl fmt::Display for DeBruijnParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B({},{})", self.d, self.n)
    }
}

/// Undirected simple graph. Immutable once built.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<VertexSet>,
    labels: Option<Vec<String>>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("vertex_count", &self.vertex_count())
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

impl Graph {
    /// Builds a graph from an edge list. Each edge may be listed in either
    /// orientation, once or twice; loops are rejected.
    pub fn from_edges(
        vertex_count: usize,
        edges: &[(usize, usize)],
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        if vertex_count > MAX_VERTICES {
            return Err(Error::Capacity(format!(
                "{vertex_count} vertices exceeds {MAX_VERTICES}"
            )));
        }
        if let Some(labels) = &labels {
            if labels.len() != vertex_count {
                return Err(Error::InvalidGraph(format!(
                    "{} labels for {vertex_count} vertices",
                    labels.len()
                )));
            }
            let mut seen = HashSet::new();
            for l in labels {
                if !seen.insert(l) {
                    return Err(Error::InvalidGraph(format!("duplicate label {l:?}")));
                }
            }
        }
        let mut adjacency = vec![VertexSet::new(vertex_count); vertex_count];
        for &(u, v) in edges {
            for x in [u, v] {
                if x >= vertex_count {
                    return Err(Error::VertexOutOfRange {
                        index: x,
                        count: vertex_count,
                    });
                }
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
            }
            adjacency[u].insert(v);
            adjacency[v].insert(u);
        }
        Ok(Graph { adjacency, labels })
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Label of `v`, falling back to its index.
    pub fn label(&self, v: usize) -> String {
        match &self.labels {
            Some(l) => l[v].clone(),
            None => v.to_string(),
        }
    }

    pub fn neighbors(&self, v: usize) -> &VertexSet {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.vertex_count() && self.adjacency[u].contains(v)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].count()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.vertex_count()).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Edges as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, row)| row.iter().filter(move |&v| v > u).map(move |v| (u, v)))
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    /// Closed neighbourhood `N(v) ∪ {v}`.
    pub fn ball(&self, v: usize) -> Result<VertexSet> {
        if v >= self.vertex_count() {
            return Err(Error::VertexOutOfRange {
                index: v,
                count: self.vertex_count(),
            });
        }
        let mut b = self.adjacency[v].clone();
        b.insert(v);
        Ok(b)
    }

    /// All balls, indexed by vertex.
    pub fn balls(&self) -> Vec<VertexSet> {
        (0..self.vertex_count())
            .map(|v| self.ball(v).expect("in range"))
            .collect()
    }

    /// Adjacency matrix plus identity. Column `i` is the indicator of `ball(i)`.
    pub fn modified_adjacency(&self) -> Vec<Vec<u8>> {
        let n = self.vertex_count();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| u8::from(i == j || self.adjacency[i].contains(j)))
                    .collect()
            })
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        if n == 0 {
            return true;
        }
        let mut seen = VertexSet::new(n);
        let mut stack = vec![0];
        seen.insert(0);
        while let Some(u) = stack.pop() {
            for v in self.adjacency[u].iter() {
                if !seen.contains(v) {
                    seen.insert(v);
                    stack.push(v);
                }
            }
        }
        seen.count() == n
    }
}

fn digit_char(x: usize) -> char {
    std::char::from_digit(x as u32, 36).expect("digit below 36")
}

fn word_label(mut index: usize, params: DeBruijnParams) -> String {
    let mut digits = vec![0; params.n];
    for slot in digits.iter_mut().rev() {
        *slot = index % params.d;
        index /= params.d;
    }
    if params.d <= 36 {
        digits.into_iter().map(digit_char).collect()
    } else {
        digits
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Undirected de Bruijn graph `B(d, n)`.
///
/// Vertices are the `d^n` words in lexicographic order; `x` and `y` are
/// adjacent when one is a one-symbol shift of the other. Shift loops such as
/// `000 -> 000` are dropped.
pub fn debruijn(params: DeBruijnParams) -> Result<Graph> {
    let DeBruijnParams { d, n } = DeBruijnParams::new(params.d, params.n)?;
    let count = params.vertex_count()?;
    let mut edges = Vec::with_capacity(count * d);
    for x in 0..count {
        // x_2..x_n becomes the prefix of y.
        let shifted = (x * d) % count;
        for a in 0..d {
            let y = shifted + a;
            if y != x {
                edges.push((x, y));
            }
        }
    }
    let labels = (0..count).map(|i| word_label(i, DeBruijnParams { d, n })).collect();
    Graph::from_edges(count, &edges, Some(labels))
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    vertex_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    edges: Vec<[usize; 2]>,
}

impl Graph {
    pub fn to_json(&self) -> String {
        let file = GraphFile {
            vertex_count: self.vertex_count(),
            labels: self.labels.clone(),
            edges: self.edges().map(|(u, v)| [u, v]).collect(),
        };
        serde_json::to_string_pretty(&file).expect("graph serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(text)?;
        let edges: BTreeSet<(usize, usize)> = file
            .edges
            .iter()
            .map(|&[u, v]| (u.min(v), u.max(v)))
            .collect();
        let edges: Vec<_> = edges.into_iter().collect();
        Graph::from_edges(file.vertex_count, &edges, file.labels)
    }
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<Graph> {
    Graph::from_json(&fs::read_to_string(path)?)
}

pub fn write_graph(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, g.to_json())?;
    Ok(())
}
