//! Chimera hardware graphs, minor embeddings of Ising models into them, and
//! gauge transformations.
//!
//! A cell is `K_{c,c}`; offsets `0..c` form the vertical shore and `c..2c`
//! the horizontal one. Qubit id is `((row * cols) + col) * 2c + offset`.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::{restart_rng, IsingModel, Role, SpinState};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChimeraGraph {
    rows: usize,
    cols: usize,
    shore: usize,
    faulty: BTreeSet<usize>,
    adjacency: Vec<Vec<usize>>,
}

/// Builds the fault-masked Chimera graph.
pub fn chimera(rows: usize, cols: usize, shore: usize, faulty: &[usize]) -> Result<ChimeraGraph> {
    if rows == 0 || cols == 0 || shore == 0 {
        return Err(Error::InvalidArgument(format!(
            "chimera dimensions must be positive, got {rows}x{cols} with shore {shore}"
        )));
    }
    let count = rows
        .checked_mul(cols)
        .and_then(|c| c.checked_mul(2 * shore))
        .filter(|&c| c <= 1 << 24)
        .ok_or_else(|| Error::Capacity(format!("chimera {rows}x{cols}x{shore} is too large")))?;
    let faulty: BTreeSet<usize> = faulty.iter().copied().collect();
    if let Some(&bad) = faulty.iter().find(|&&q| q >= count) {
        return Err(Error::VertexOutOfRange { index: bad, count });
    }
    let mut g = ChimeraGraph {
        rows,
        cols,
        shore,
        faulty,
        adjacency: vec![Vec::new(); count],
    };
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            for i in 0..shore {
                for j in shore..2 * shore {
                    edges.push((g.qubit_id(r, c, i), g.qubit_id(r, c, j)));
                }
                if r + 1 < rows {
                    edges.push((g.qubit_id(r, c, i), g.qubit_id(r + 1, c, i)));
                }
                if c + 1 < cols {
                    edges.push((g.qubit_id(r, c, shore + i), g.qubit_id(r, c + 1, shore + i)));
                }
            }
        }
    }
    for (a, b) in edges {
        if !g.faulty.contains(&a) && !g.faulty.contains(&b) {
            g.adjacency[a].push(b);
            g.adjacency[b].push(a);
        }
    }
    for row in &mut g.adjacency {
        row.sort_unstable();
    }
    Ok(g)
}

/// Chimera graph with `fraction` of its qubits marked faulty at random.
pub fn chimera_with_random_faults(rows: usize, cols: usize, shore: usize, fraction: f64, seed: u64) -> Result<ChimeraGraph> {
    let count = chimera(rows, cols, shore, &[])?.qubit_count();
    let mut rng = restart_rng(seed, 0);
    let mut ids: Vec<usize> = (0..count).collect();
    ids.shuffle(&mut rng);
    let k = ((count as f64) * fraction.clamp(0.0, 1.0)).round() as usize;
    chimera(rows, cols, shore, &ids[..k])
}

impl ChimeraGraph {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shore(&self) -> usize {
        self.shore
    }

    pub fn faulty(&self) -> &BTreeSet<usize> {
        &self.faulty
    }

    /// All qubit ids, faulty ones included.
    pub fn qubit_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn working_count(&self) -> usize {
        self.qubit_count() - self.faulty.len()
    }

    pub fn is_working(&self, q: usize) -> bool {
        q < self.qubit_count() && !self.faulty.contains(&q)
    }

    pub fn qubit_id(&self, row: usize, col: usize, offset: usize) -> usize {
        (row * self.cols + col) * 2 * self.shore + offset
    }

    /// `(row, col, offset)` of a qubit.
    pub fn coords(&self, q: usize) -> (usize, usize, usize) {
        let cell = q / (2 * self.shore);
        (cell / self.cols, cell % self.cols, q % (2 * self.shore))
    }

    pub fn is_vertical(&self, q: usize) -> bool {
        self.coords(q).2 < self.shore
    }

    pub fn neighbors(&self, q: usize) -> &[usize] {
        &self.adjacency[q]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.qubit_count() && self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Edges `(a, b)` with `a < b`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, row)| row.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }
}

/// Fault-free edge count of an `m x n` grid of `K_{c,c}` cells.
pub fn chimera_edge_count(m: usize, n: usize, c: usize) -> usize {
    m * n * c * c + c * (n * (m - 1) + m * (n - 1))
}

/// Chain of physical qubits per logical variable.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Embedding {
    pub chains: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct EmbeddingFile {
    chains: BTreeMap<String, Vec<usize>>,
}

impl Embedding {
    pub fn new(chains: Vec<Vec<usize>>) -> Self {
        Embedding { chains }
    }

    pub fn qubits_used(&self) -> usize {
        self.chains.iter().map(Vec::len).sum()
    }

    pub fn max_chain_length(&self) -> usize {
        self.chains.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = EmbeddingFile {
            chains: self
                .chains
                .iter()
                .enumerate()
                .map(|(i, c)| (i.to_string(), c.clone()))
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: EmbeddingFile = serde_json::from_str(text)?;
        let mut chains: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (k, v) in file.chains {
            let idx = k
                .parse::<usize>()
                .map_err(|_| Error::InvalidEmbedding(format!("chain key {k:?} is not a variable index")))?;
            chains.insert(idx, v);
        }
        let len = chains.keys().next_back().map_or(0, |&k| k + 1);
        let mut out = vec![Vec::new(); len];
        for (k, v) in chains {
            out[k] = v;
        }
        Ok(Embedding { chains: out })
    }
}

pub fn write_embedding(e: &Embedding, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, e.to_json()?)?;
    Ok(())
}

pub fn read_embedding(path: impl AsRef<Path>) -> Result<Embedding> {
    Embedding::from_json(&std::fs::read_to_string(path)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    ChainCountMismatch { expected: usize, got: usize },
    EmptyChain { var: usize },
    UnavailableQubit { var: usize, qubit: usize },
    RepeatedQubit { var: usize, qubit: usize },
    SharedQubit { qubit: usize, first: usize, second: usize },
    Disconnected { var: usize },
    MissingCoupler { a: usize, b: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EmbeddingReport {
    pub violations: Vec<Violation>,
}

impl EmbeddingReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn chain_connected(hw: &ChimeraGraph, chain: &[usize]) -> bool {
    let Some(&start) = chain.first() else {
        return false;
    };
    let members: BTreeSet<usize> = chain.iter().copied().collect();
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(q) = queue.pop_front() {
        for &n in hw.neighbors(q) {
            if members.contains(&n) && seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    seen.len() == members.len()
}

fn chains_touch(hw: &ChimeraGraph, a: &[usize], b: &[usize]) -> bool {
    a.iter().any(|&p| b.iter().any(|&q| hw.has_edge(p, q)))
}

/// Checks nonempty, available, disjoint, connected chains and a physical
/// coupler for every nonzero logical coupling.
pub fn verify_embedding(hw: &ChimeraGraph, logical: &IsingModel, e: &Embedding) -> EmbeddingReport {
    let mut violations = Vec::new();
    if e.chains.len() != logical.var_count() {
        violations.push(Violation::ChainCountMismatch {
            expected: logical.var_count(),
            got: e.chains.len(),
        });
    }
    let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
    let mut usable = vec![true; e.chains.len()];
    for (var, chain) in e.chains.iter().enumerate() {
        if chain.is_empty() {
            violations.push(Violation::EmptyChain { var });
            usable[var] = false;
        }
        let mut seen = BTreeSet::new();
        for &qubit in chain {
            if !hw.is_working(qubit) {
                violations.push(Violation::UnavailableQubit { var, qubit });
                usable[var] = false;
                continue;
            }
            if !seen.insert(qubit) {
                violations.push(Violation::RepeatedQubit { var, qubit });
                continue;
            }
            if let Some(&first) = owner.get(&qubit) {
                violations.push(Violation::SharedQubit {
                    qubit,
                    first,
                    second: var,
                });
            } else {
                owner.insert(qubit, var);
            }
        }
        if usable[var] && !chain_connected(hw, chain) {
            violations.push(Violation::Disconnected { var });
        }
    }
    for (&(a, b), &v) in logical.couplings() {
        if v == 0.0 {
            continue;
        }
        let ok = a < e.chains.len()
            && b < e.chains.len()
            && usable[a]
            && usable[b]
            && chains_touch(hw, &e.chains[a], &e.chains[b]);
        if !ok {
            violations.push(Violation::MissingCoupler { a, b });
        }
    }
    EmbeddingReport { violations }
}

#[derive(Clone, Copy, Debug)]
pub struct EmbedOptions {
    pub tries: usize,
    /// Rip-up-and-reroute passes per try.
    pub rounds: usize,
}

impl Default for EmbedOptions {
    fn default() -> Self {
        EmbedOptions { tries: 16, rounds: 64 }
    }
}

fn logical_adjacency(m: &IsingModel) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); m.var_count()];
    for (&(a, b), &v) in m.couplings() {
        if v != 0.0 {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    adj
}

/// A freshly routed chain: the root plus one path per placed neighbour,
/// each ordered from the chain towards that neighbour.
struct Routed {
    root: usize,
    paths: Vec<(usize, Vec<usize>)>,
    /// Chain qubits the paths branch from.
    branches: BTreeSet<usize>,
}

impl Routed {
    fn chain(&self) -> Vec<usize> {
        let mut all: BTreeSet<usize> = BTreeSet::from([self.root]);
        for (_, path) in &self.paths {
            all.extend(path.iter().copied());
        }
        all.into_iter().collect()
    }
}

struct Router<'a> {
    hw: &'a ChimeraGraph,
    adj: &'a [Vec<usize>],
    chains: Vec<Vec<usize>>,
    usage: Vec<u32>,
    /// Qubits already held by this many other chains are off limits.
    bound: u32,
    /// Cost multiplier per chain already holding a qubit.
    alpha: f64,
    jitter: Vec<f64>,
    /// Log2 of the largest possible route cost, used to size `alpha`.
    margin_bits: f64,
}

impl Router<'_> {
    fn max_usage(&self) -> u32 {
        self.usage.iter().copied().max().unwrap_or(0)
    }

    /// Picks `alpha` so a qubit at the current maximum fill outweighs any
    /// route over free qubits.
    fn rescale(&mut self) {
        let top = self.max_usage();
        self.alpha = if top == 0 {
            2.0
        } else {
            2f64.powf((63.0 - self.margin_bits) / top as f64)
        };
    }

    fn shake(&mut self, rng: &mut impl Rng) {
        for j in &mut self.jitter {
            *j = 1.0 + 0.5 * rng.gen::<f64>();
        }
    }

    fn weight(&self, q: usize) -> f64 {
        let u = self.usage[q];
        if u >= self.bound || !self.hw.is_working(q) {
            f64::INFINITY
        } else {
            self.alpha.powi(u as i32) * self.jitter[q]
        }
    }

    fn set_chain(&mut self, var: usize, chain: Vec<usize>) {
        for &q in &self.chains[var] {
            self.usage[q] -= 1;
        }
        for &q in &chain {
            self.usage[q] += 1;
        }
        self.chains[var] = chain;
    }

    /// Node-weighted shortest distances from a chain; sources cost nothing.
    fn dijkstra(&self, sources: &[usize]) -> (Vec<f64>, Vec<usize>) {
        let n = self.hw.qubit_count();
        let mut dist = vec![f64::INFINITY; n];
        let mut parent = vec![usize::MAX; n];
        let mut heap = BinaryHeap::new();
        for &s in sources {
            dist[s] = 0.0;
            heap.push(Reverse((OrdF64(0.0), s)));
        }
        while let Some(Reverse((OrdF64(d), q))) = heap.pop() {
            if d > dist[q] {
                continue;
            }
            for &nb in self.hw.neighbors(q) {
                let nd = d + self.weight(nb);
                if nd < dist[nb] {
                    dist[nb] = nd;
                    parent[nb] = q;
                    heap.push(Reverse((OrdF64(nd), nb)));
                }
            }
        }
        (dist, parent)
    }

    /// Picks the root minimising the summed route cost to every placed
    /// neighbour, then attaches neighbours nearest first from the cheapest
    /// qubit already in the chain.
    fn route(&self, var: usize, rng: &mut impl Rng) -> Option<Routed> {
        let placed: Vec<usize> = self.adj[var]
            .iter()
            .copied()
            .filter(|&n| !self.chains[n].is_empty())
            .collect();
        let open: Vec<usize> = (0..self.hw.qubit_count())
            .filter(|&q| self.weight(q).is_finite())
            .collect();
        if placed.is_empty() {
            let least = open.iter().map(|&q| self.usage[q]).min()?;
            let free: Vec<usize> = open.iter().copied().filter(|&q| self.usage[q] == least).collect();
            return free.choose(rng).map(|&root| Routed { root, paths: Vec::new(), branches: BTreeSet::new() });
        }
        let searches: Vec<(Vec<f64>, Vec<usize>)> = placed.iter().map(|&n| self.dijkstra(&self.chains[n])).collect();
        let mut best = f64::INFINITY;
        let mut roots = Vec::new();
        for &q in &open {
            let w = self.weight(q);
            let mut total = w;
            for (dist, _) in &searches {
                // Routes include the root's weight unless it sits in the
                // neighbour's chain; count it once.
                total += (dist[q] - w).max(0.0);
            }
            if !total.is_finite() {
                continue;
            }
            if total < best * (1.0 - 1e-12) {
                best = total;
                roots.clear();
            }
            if total <= best * (1.0 + 1e-12) {
                roots.push(q);
            }
        }
        let &root = roots.choose(rng)?;
        let mut order: Vec<usize> = (0..placed.len()).collect();
        order.shuffle(rng);
        order.sort_by(|&a, &b| searches[a].0[root].total_cmp(&searches[b].0[root]));
        let mut chain = BTreeSet::from([root]);
        let mut paths = Vec::with_capacity(placed.len());
        let mut branches = BTreeSet::from([root]);
        for i in order {
            let (dist, parent) = &searches[i];
            let target: BTreeSet<usize> = self.chains[placed[i]].iter().copied().collect();
            let mut q = *chain
                .iter()
                .min_by(|&&a, &&b| (dist[a] - self.weight(a)).total_cmp(&(dist[b] - self.weight(b))))
                .expect("nonempty");
            branches.insert(q);
            let mut path = Vec::new();
            while !target.contains(&q) {
                if chain.insert(q) {
                    path.push(q);
                }
                q = parent[q];
                if q == usize::MAX {
                    return None;
                }
            }
            paths.push((placed[i], path));
        }
        Some(Routed { root, paths, branches })
    }

    /// Hands the tail of each path, past its last branch point, to the
    /// neighbour it leads to, so routing qubits are shared out between
    /// chains instead of piling up on the one just placed.
    fn place(&mut self, var: usize, routed: Routed) {
        let keep = &routed.branches;
        let mut chain = routed.chain();
        let mut gifts: Vec<(usize, Vec<usize>)> = Vec::new();
        for (v, path) in &routed.paths {
            let cut = path.iter().rposition(|q| keep.contains(q)).map_or(0, |i| i + 1);
            if cut < path.len() {
                gifts.push((*v, path[cut..].to_vec()));
            }
        }
        let given: BTreeSet<usize> = gifts.iter().flat_map(|(_, p)| p.iter().copied()).collect();
        chain.retain(|q| !given.contains(q));
        if chain.is_empty() || !chain_connected(self.hw, &chain) {
            self.set_chain(var, routed.chain());
            return;
        }
        self.set_chain(var, chain);
        for (v, path) in gifts {
            let mut grown = self.chains[v].clone();
            grown.extend(path);
            grown.sort_unstable();
            self.set_chain(v, grown);
        }
    }

    /// Whether `chain` can serve `var` with every placed neighbour other
    /// than `except` still adjacent.
    fn serves(&self, var: usize, chain: &[usize], except: usize) -> bool {
        !chain.is_empty()
            && chain_connected(self.hw, chain)
            && self.adj[var]
                .iter()
                .filter(|&&n| n != except && !self.chains[n].is_empty())
                .all(|&n| chains_touch(self.hw, chain, &self.chains[n]))
    }

    /// Takes back from each neighbour the qubits it holds only to reach
    /// `var`, including any it shares with `var`.
    fn steal(&mut self, var: usize) {
        for &v in self.adj[var].iter() {
            if self.chains[v].is_empty() || self.chains[var].is_empty() {
                continue;
            }
            loop {
                let own: BTreeSet<usize> = self.chains[var].iter().copied().collect();
                let taken = self.chains[v].iter().copied().find(|&q| {
                    if !own.contains(&q) && !self.hw.neighbors(q).iter().any(|n| own.contains(n)) {
                        return false;
                    }
                    let rest: Vec<usize> = self.chains[v].iter().copied().filter(|&p| p != q).collect();
                    let mut mine: Vec<usize> = self.chains[var].clone();
                    mine.push(q);
                    self.serves(v, &rest, var) && chains_touch(self.hw, &rest, &mine)
                });
                let Some(q) = taken else { break };
                let rest: Vec<usize> = self.chains[v].iter().copied().filter(|&p| p != q).collect();
                self.set_chain(v, rest);
                if !own.contains(&q) {
                    let mut mine = self.chains[var].clone();
                    mine.push(q);
                    mine.sort_unstable();
                    self.set_chain(var, mine);
                }
            }
        }
    }

    /// Tears out and re-places `var`; with no route under the current bound
    /// the chain is put back.
    fn reroute(&mut self, var: usize, bound: Option<u32>, rng: &mut impl Rng) -> bool {
        self.steal(var);
        self.bound = match bound {
            Some(b) => b,
            None => self.chains[var].iter().map(|&q| self.usage[q]).max().unwrap_or(1),
        };
        let old = std::mem::take(&mut self.chains[var]);
        for &q in &old {
            self.usage[q] -= 1;
        }
        let routed = self.route(var, rng);
        self.bound = u32::MAX;
        match routed {
            Some(r) => {
                self.place(var, r);
                true
            }
            None => {
                self.set_chain(var, old);
                false
            }
        }
    }

    /// Maximum fill, qubits at that fill, summed excess; lower is better.
    fn overfill(&self) -> (u32, usize, u32) {
        let top = self.max_usage();
        let at_top = self.usage.iter().filter(|&&u| u == top).count();
        let excess = self.usage.iter().map(|&u| u.saturating_sub(1)).sum();
        (top, at_top, excess)
    }

    fn qubits(&self) -> usize {
        self.chains.iter().map(Vec::len).sum()
    }

    fn longest(&self) -> usize {
        self.chains.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Drops chain qubits that are not needed for connectivity or coverage.
    fn trim(&mut self) {
        for var in 0..self.chains.len() {
            let mut chain = self.chains[var].clone();
            let mut changed = true;
            while changed && chain.len() > 1 {
                changed = false;
                for i in (0..chain.len()).rev() {
                    let mut trial = chain.clone();
                    trial.remove(i);
                    if self.serves(var, &trial, usize::MAX) {
                        chain = trial;
                        changed = true;
                    }
                }
            }
            self.set_chain(var, chain);
        }
    }
}

#[derive(Clone, Copy, PartialEq, PartialOrd)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Visits variables by most already visited neighbours, then by degree,
/// with random tie breaks; the first pick is a highest degree variable.
fn growth_order(adj: &[Vec<usize>], rng: &mut impl Rng) -> Vec<usize> {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut score = vec![0usize; n];
    let noise: Vec<u32> = (0..n).map(|_| rng.gen()).collect();
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let next = (0..n)
            .filter(|&v| !seen[v])
            .max_by_key(|&v| (score[v], adj[v].len(), noise[v]))
            .expect("unvisited variable");
        seen[next] = true;
        order.push(next);
        for &u in &adj[next] {
            score[u] += 1;
        }
    }
    order
}

/// Passes without improvement before a try gives up.
const PATIENCE: usize = 10;

/// One try: place every chain with overlap allowed, then re-place chains
/// until no qubit is shared. Pushdown passes bound each chain by the fill
/// it already sees; when they keep bouncing, a pass with only the soft
/// penalty runs instead. Chains are then shortened and trimmed.
fn embed_try(hw: &ChimeraGraph, logical: &IsingModel, adj: &[Vec<usize>], rounds: usize, seed: u64, idx: u64) -> Option<Embedding> {
    let mut rng = restart_rng(seed, idx);
    let n = logical.var_count();
    let max_degree = adj.iter().map(Vec::len).max().unwrap_or(0).max(1);
    let mut router = Router {
        hw,
        adj,
        chains: vec![Vec::new(); n],
        usage: vec![0; hw.qubit_count()],
        bound: u32::MAX,
        alpha: 2.0,
        jitter: vec![1.0; hw.qubit_count()],
        margin_bits: ((max_degree * hw.qubit_count()) as f64).log2(),
    };
    for v in growth_order(adj, &mut rng) {
        let routed = router.route(v, &mut rng)?;
        router.place(v, routed);
    }
    let embedded = |r: &Router| {
        r.max_usage() <= 1 && verify_embedding(hw, logical, &Embedding::new(r.chains.clone())).is_valid()
    };
    let mut best = router.overfill();
    let mut pushback = 0;
    let mut stale = 0;
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..rounds {
        if embedded(&router) {
            break;
        }
        router.rescale();
        router.shake(&mut rng);
        order.shuffle(&mut rng);
        if pushback < n {
            for &v in &order {
                if !router.reroute(v, None, &mut rng) {
                    pushback += 3;
                }
            }
        } else {
            pushback -= 1;
            for &v in &order {
                router.reroute(v, Some(u32::MAX), &mut rng);
            }
        }
        let now = router.overfill();
        if now < best {
            best = now;
            pushback = 0;
            stale = 0;
        } else {
            stale += 1;
            if stale >= PATIENCE {
                return None;
            }
        }
    }
    if !embedded(&router) {
        return None;
    }
    router.trim();
    let mut best = router.chains.clone();
    let mut best_cost = (router.longest(), router.qubits());
    let mut stale = 0;
    while stale < PATIENCE {
        router.shake(&mut rng);
        order.shuffle(&mut rng);
        for &v in &order {
            router.reroute(v, Some(1), &mut rng);
        }
        router.trim();
        let cost = (router.longest(), router.qubits());
        if cost < best_cost && embedded(&router) {
            best_cost = cost;
            best = router.chains.clone();
            stale = 0;
        } else {
            stale += 1;
        }
    }
    let e = Embedding::new(best);
    verify_embedding(hw, logical, &e).is_valid().then_some(e)
}

/// Heuristic minor embedding. Tries run in parallel with seeds derived from
/// `(seed, try index)`; the lowest successful index is returned.
pub fn heuristic_embed(hw: &ChimeraGraph, logical: &IsingModel, seed: u64, opts: &EmbedOptions) -> Result<Embedding> {
    if logical.var_count() > hw.working_count() || opts.tries == 0 {
        return Err(Error::EmbeddingFailed(opts.tries));
    }
    let adj = logical_adjacency(logical);
    (0..opts.tries)
        .into_par_iter()
        .find_map_first(|t| embed_try(hw, logical, &adj, opts.rounds, seed, t as u64))
        .ok_or(Error::EmbeddingFailed(opts.tries))
}

fn spanning_tree(hw: &ChimeraGraph, chain: &[usize]) -> Vec<(usize, usize)> {
    let members: BTreeSet<usize> = chain.iter().copied().collect();
    let mut seen = BTreeSet::from([chain[0]]);
    let mut queue = VecDeque::from([chain[0]]);
    let mut tree = Vec::new();
    while let Some(q) = queue.pop_front() {
        for &n in hw.neighbors(q) {
            if members.contains(&n) && seen.insert(n) {
                tree.push((q, n));
                queue.push_back(n);
            }
        }
    }
    tree
}

/// Default ferromagnetic chain strength: twice the largest logical coefficient.
pub fn default_chain_strength(logical: &IsingModel) -> f64 {
    2.0 * logical.max_abs_coefficient()
}

/// Physical model over every hardware qubit. Linear terms split equally over
/// a chain, couplings equally over the physical edges between two chains,
/// and a spanning tree of each chain is bound with `-j_fm`. Qubits outside
/// every chain get zero coefficients and the ancilla role.
pub fn embed_model(logical: &IsingModel, e: &Embedding, hw: &ChimeraGraph, j_fm: Option<f64>) -> Result<IsingModel> {
    let report = verify_embedding(hw, logical, e);
    if !report.is_valid() {
        return Err(Error::InvalidEmbedding(format!("{:?}", report.violations)));
    }
    let j_fm = j_fm.unwrap_or_else(|| default_chain_strength(logical));
    if !(j_fm > 0.0 && j_fm.is_finite()) {
        return Err(Error::InvalidArgument(format!("chain strength must be positive, got {j_fm}")));
    }
    let mut phys = IsingModel::new(hw.qubit_count());
    for q in 0..hw.qubit_count() {
        phys.set_role(q, Role::Ancilla)?;
    }
    for (var, chain) in e.chains.iter().enumerate() {
        let share = logical.h()[var] / chain.len() as f64;
        for &q in chain {
            phys.set_role(q, logical.roles()[var])?;
            phys.add_h(q, share)?;
        }
        for (a, b) in spanning_tree(hw, chain) {
            phys.add_coupling(a, b, -j_fm)?;
        }
    }
    for (&(a, b), &v) in logical.couplings() {
        if v == 0.0 {
            continue;
        }
        let links: Vec<(usize, usize)> = e.chains[a]
            .iter()
            .flat_map(|&p| e.chains[b].iter().filter(move |&&q| hw.has_edge(p, q)).map(move |&q| (p, q)))
            .collect();
        let share = v / links.len() as f64;
        for (p, q) in links {
            phys.add_coupling(p, q, share)?;
        }
    }
    Ok(phys)
}

/// Logical state from a physical one. Unanimous chains keep their value,
/// broken ones take the majority; ties go to the sign that lowers the
/// chain's energy in `physical`, then to -1.
pub fn unembed(physical: &IsingModel, state: &[i8], e: &Embedding) -> Result<SpinState> {
    if state.len() != physical.var_count() {
        return Err(Error::SizeMismatch {
            expected: physical.var_count(),
            got: state.len(),
        });
    }
    let adj = physical.adjacency();
    let mut out = Vec::with_capacity(e.chains.len());
    for chain in &e.chains {
        if let Some(&q) = chain.iter().find(|&&q| q >= state.len()) {
            return Err(Error::VertexOutOfRange {
                index: q,
                count: state.len(),
            });
        }
        let sum: i64 = chain.iter().map(|&q| state[q] as i64).sum();
        let value = match sum.signum() {
            1 => 1,
            -1 => -1,
            _ => {
                let members: BTreeSet<usize> = chain.iter().copied().collect();
                let field: f64 = chain
                    .iter()
                    .map(|&q| {
                        physical.h()[q]
                            + adj[q]
                                .iter()
                                .filter(|(n, _)| !members.contains(n))
                                .map(|&(n, v)| v * state[n] as f64)
                                .sum::<f64>()
                    })
                    .sum();
                if field < 0.0 {
                    1
                } else {
                    -1
                }
            }
        };
        out.push(value);
    }
    Ok(out)
}

/// Sign per qubit; `S' = G S`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gauge {
    pub signs: Vec<i8>,
}

impl Gauge {
    pub fn identity(n: usize) -> Self {
        Gauge { signs: vec![1; n] }
    }

    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = restart_rng(seed, 0);
        Gauge {
            signs: (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect(),
        }
    }

    /// JSON `{"signs": [..]}`; every sign must be ±1.
    pub fn from_json(text: &str) -> Result<Self> {
        let g: Gauge = serde_json::from_str(text)?;
        if let Some(bad) = g.signs.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidArgument(format!("gauge sign {bad} is not ±1")));
        }
        Ok(g)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn apply(&self, s: &[i8]) -> Result<SpinState> {
        if s.len() != self.signs.len() {
            return Err(Error::SizeMismatch {
                expected: self.signs.len(),
                got: s.len(),
            });
        }
        Ok(s.iter().zip(&self.signs).map(|(a, b)| a * b).collect())
    }
}

/// `h'_i = G_i h_i`, `J'_ij = G_i G_j J_ij`.
pub fn gauge_transform(m: &IsingModel, g: &Gauge) -> Result<IsingModel> {
    if g.signs.len() != m.var_count() {
        return Err(Error::SizeMismatch {
            expected: m.var_count(),
            got: g.signs.len(),
        });
    }
    let mut out = m.clone();
    for (i, &s) in g.signs.iter().enumerate() {
        out.set_h(i, m.h()[i] * s as f64)?;
    }
    for (&(a, b), &v) in m.couplings() {
        let sign = (g.signs[a] * g.signs[b]) as f64;
        out.add_coupling(a, b, v * sign - v)?;
    }
    Ok(out)
}

/// Horizontal qubits flipped in even cells (`row + col` even), vertical ones
/// in odd cells.
pub fn checkerboard_gauge(hw: &ChimeraGraph) -> Gauge {
    let signs = (0..hw.qubit_count())
        .map(|q| {
            let (r, c, _) = hw.coords(q);
            let flip_horizontal = (r + c) % 2 == 0;
            if hw.is_vertical(q) == flip_horizontal {
                1
            } else {
                -1
            }
        })
        .collect();
    Gauge { signs }
}
