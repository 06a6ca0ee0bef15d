//! Identifying-code verification and the parallel brute-force minimum search.
//!
//! The search enumerates `k`-subsets by rank so that disjoint rank ranges can
//! be handed to independent workers without sharing any enumeration state.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};

/// A vertex subset proposed as an identifying code.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CodeCandidate {
    members: VertexSet,
}

impl CodeCandidate {
    pub fn new(members: VertexSet) -> Self {
        CodeCandidate { members }
    }

    pub fn from_vertices(vertex_count: usize, vertices: &[usize]) -> Self {
        CodeCandidate::new(VertexSet::from_indices(vertex_count, vertices.iter().copied()))
    }

    pub fn members(&self) -> &VertexSet {
        &self.members
    }

    pub fn size(&self) -> usize {
        self.members.count()
    }

    pub fn vertices(&self) -> Vec<usize> {
        self.members.to_vec()
    }
}

impl Serialize for CodeCandidate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.vertices().serialize(s)
    }
}

/// Outcome of [`is_identifying`]; failures carry a witness.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Identifying,
    /// `S ∩ B(v)` is empty.
    Undominated(usize),
    /// `S ∩ B(u) = S ∩ B(v)` for `u < v`.
    Inseparable(usize, usize),
}

impl Verdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, Verdict::Identifying)
    }
}

pub fn is_identifying(g: &Graph, s: &CodeCandidate) -> Result<Verdict> {
    let n = g.vertex_count();
    if s.members.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            got: s.members.len(),
        });
    }
    let signatures: Vec<VertexSet> = g
        .balls()
        .iter()
        .map(|b| b.intersection(&s.members))
        .collect();
    if let Some(v) = signatures.iter().position(|sig| sig.is_empty()) {
        return Ok(Verdict::Undominated(v));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| signatures[a].cmp(&signatures[b]).then(a.cmp(&b)));
    for w in order.windows(2) {
        if signatures[w[0]] == signatures[w[1]] {
            return Ok(Verdict::Inseparable(w[0].min(w[1]), w[0].max(w[1])));
        }
    }
    Ok(Verdict::Identifying)
}

/// A pair of distinct vertices with equal balls, if any. A graph admits an
/// identifying code iff there is none.
pub fn detect_twins(g: &Graph) -> Option<(usize, usize)> {
    let balls = g.balls();
    let mut order: Vec<usize> = (0..balls.len()).collect();
    order.sort_by(|&a, &b| balls[a].cmp(&balls[b]).then(a.cmp(&b)));
    order
        .windows(2)
        .find(|w| balls[w[0]] == balls[w[1]])
        .map(|w| (w[0].min(w[1]), w[0].max(w[1])))
}

/// `C(n, k)` in 128 bits; `None` on overflow.
pub fn binomial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        // acc * (n-k+i) is divisible by i; split out the common factor first.
        let g = gcd(acc, i);
        acc = (acc / g).checked_mul((n as u128 - k as u128 + i) / (i / g))?;
    }
    Some(acc)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Pascal table for `C(x, i)`, `x, i <= n`.
#[derive(Clone, Debug)]
pub struct Binomials {
    rows: Vec<Vec<u128>>,
}

impl Binomials {
    pub fn new(n: usize) -> Result<Self> {
        let mut rows: Vec<Vec<u128>> = Vec::with_capacity(n + 1);
        for x in 0..=n {
            let mut row = vec![0u128; n + 1];
            row[0] = 1;
            for i in 1..=x {
                row[i] = rows[x - 1][i - 1]
                    .checked_add(rows[x - 1][i])
                    .ok_or_else(|| Error::Capacity(format!("C({x},{i}) exceeds 128 bits")))?;
            }
            rows.push(row);
        }
        Ok(Binomials { rows })
    }

    #[inline]
    pub fn get(&self, x: usize, i: usize) -> u128 {
        if i > x {
            0
        } else {
            self.rows[x][i]
        }
    }
}

/// Enumeration order used when turning a rank into a subset.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnrankOrder {
    #[default]
    RevolvingDoor,
    Lexicographic,
}

fn check_rank(table: &Binomials, r: u128, k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n || r >= table.get(n, k) {
        return Err(Error::RankOutOfRange { rank: r, k, n });
    }
    Ok(())
}

/// Revolving-door unranking into `t` (1-based elements, ascending).
fn rev_door_into(table: &Binomials, mut r: u128, n: usize, t: &mut [usize]) {
    let k = t.len();
    let mut x = n;
    for i in (1..=k).rev() {
        while table.get(x, i) > r {
            x -= 1;
        }
        t[i - 1] = x + 1;
        r = table.get(x + 1, i) - r - 1;
    }
}

/// Lexicographic unranking into `t` (1-based elements, ascending).
fn lex_into(table: &Binomials, mut r: u128, n: usize, t: &mut [usize]) {
    let k = t.len();
    let mut x = 1;
    for i in 1..=k {
        loop {
            let block = table.get(n - x, k - i);
            if r < block {
                break;
            }
            r -= block;
            x += 1;
        }
        t[i - 1] = x;
        x += 1;
    }
}

/// The `k`-subset of `{1..n}` at rank `r` in revolving-door order.
pub fn rev_door_unrank(r: u128, k: usize, n: usize) -> Result<Vec<usize>> {
    let table = Binomials::new(n)?;
    check_rank(&table, r, k, n)?;
    let mut t = vec![0; k];
    rev_door_into(&table, r, n, &mut t);
    Ok(t)
}

/// The `k`-subset of `{1..n}` at rank `r` in lexicographic order.
pub fn lex_unrank(r: u128, k: usize, n: usize) -> Result<Vec<usize>> {
    let table = Binomials::new(n)?;
    check_rank(&table, r, k, n)?;
    let mut t = vec![0; k];
    lex_into(&table, r, n, &mut t);
    Ok(t)
}

/// Advances an ascending 1-based `k`-subset of `{1..n}` to its lexicographic
/// successor. Returns `false` at the last subset.
fn lex_successor(t: &mut [usize], n: usize) -> bool {
    let k = t.len();
    let mut i = k;
    while i > 0 && t[i - 1] == n - k + i {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    t[i - 1] += 1;
    for j in i..k {
        t[j] = t[j - 1] + 1;
    }
    true
}

#[inline]
fn mask_of(t: &[usize]) -> u128 {
    t.iter().fold(0u128, |m, &x| m | 1u128 << (x - 1))
}

/// Constraint masks a candidate must hit: every ball and every pairwise
/// symmetric difference, reduced to the inclusion-minimal ones and sorted
/// smallest first so failures are found early.
fn hitting_masks(balls: &[u128]) -> Vec<u128> {
    let mut masks: Vec<u128> = balls.to_vec();
    for i in 0..balls.len() {
        for j in i + 1..balls.len() {
            masks.push(balls[i] ^ balls[j]);
        }
    }
    masks.sort_by_key(|m| (m.count_ones(), *m));
    masks.dedup();
    let mut minimal: Vec<u128> = Vec::new();
    for m in masks {
        if !minimal.iter().any(|&s| s & m == s) {
            minimal.push(m);
        }
    }
    minimal
}

#[derive(Clone, Debug)]
pub struct BruteForceOptions {
    pub workers: usize,
    pub size_floor: usize,
    pub size_ceiling: Option<usize>,
    pub find_all: bool,
    pub order: UnrankOrder,
    pub chunk_size: u64,
    pub time_limit: Option<Duration>,
}

impl Default for BruteForceOptions {
    fn default() -> Self {
        BruteForceOptions {
            workers: rayon::current_num_threads(),
            size_floor: 1,
            size_ceiling: None,
            find_all: false,
            order: UnrankOrder::RevolvingDoor,
            chunk_size: 1 << 20,
            time_limit: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchResult {
    /// `None` if no code was found within the size ceiling or the time limit.
    pub min_size: Option<usize>,
    pub codes: Vec<CodeCandidate>,
    /// True when every smaller size was exhausted.
    pub proven_minimum: bool,
    pub elapsed: Duration,
    pub subsets_checked: u64,
}

struct SizeOutcome {
    hits: Vec<(u128, u128)>,
    checked: u64,
    timed_out: bool,
}

fn scan_size(
    k: usize,
    n: usize,
    table: &Binomials,
    masks: &[u128],
    opts: &BruteForceOptions,
    deadline: Option<Instant>,
) -> Result<SizeOutcome> {
    let total = table.get(n, k);
    let chunk = opts.chunk_size.max(1) as u128;
    let chunks = u64::try_from(total.div_ceil(chunk))
        .map_err(|_| Error::Capacity(format!("C({n},{k}) chunk count exceeds 64 bits")))?;

    let first_hit_chunk = AtomicU64::new(u64::MAX);
    let timed_out = AtomicBool::new(false);
    let checked = AtomicU64::new(0);
    let hits = Mutex::new(Vec::new());

    (0..chunks).into_par_iter().for_each(|ci| {
        if !opts.find_all && ci > first_hit_chunk.load(Ordering::Relaxed) {
            return;
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            timed_out.store(true, Ordering::Relaxed);
            return;
        }
        let start = ci as u128 * chunk;
        let end = (start + chunk).min(total);
        let mut t = vec![0usize; k];
        let mut local = Vec::new();
        let mut count = 0u64;
        let mut r = start;
        if opts.order == UnrankOrder::Lexicographic {
            lex_into(table, start, n, &mut t);
        }
        while r < end {
            if opts.order == UnrankOrder::RevolvingDoor {
                rev_door_into(table, r, n, &mut t);
            }
            let s = mask_of(&t);
            count += 1;
            if masks.iter().all(|&m| m & s != 0) {
                local.push((r, s));
                if !opts.find_all {
                    first_hit_chunk.fetch_min(ci, Ordering::Relaxed);
                    break;
                }
            }
            r += 1;
            if opts.order == UnrankOrder::Lexicographic && r < end {
                lex_successor(&mut t, n);
            }
        }
        checked.fetch_add(count, Ordering::Relaxed);
        if !local.is_empty() {
            hits.lock().expect("poisoned").extend(local);
        }
    });

    Ok(SizeOutcome {
        hits: hits.into_inner().expect("poisoned"),
        checked: checked.into_inner(),
        timed_out: timed_out.into_inner(),
    })
}

/// Smallest identifying code by exhaustive search over sizes
/// `size_floor..=size_ceiling`, in parallel over rank chunks.
///
/// Graphs with twins are rejected up front. Without `find_all` the reported
/// code is the lowest-rank code of the minimum size, so the output does not
/// depend on the worker count.
pub fn min_code_bruteforce(g: &Graph, opts: &BruteForceOptions) -> Result<SearchResult> {
    let started = Instant::now();
    if let Some((u, v)) = detect_twins(g) {
        return Err(Error::Twins(u, v));
    }
    let n = g.vertex_count();
    if n > 128 {
        return Err(Error::Capacity(format!(
            "brute force supports at most 128 vertices, graph has {n}"
        )));
    }
    if n == 0 {
        return Ok(SearchResult {
            min_size: Some(0),
            codes: vec![CodeCandidate::new(VertexSet::new(0))],
            proven_minimum: true,
            elapsed: started.elapsed(),
            subsets_checked: 1,
        });
    }
    let table = Binomials::new(n)?;
    let balls: Vec<u128> = g
        .balls()
        .iter()
        .map(|b| b.to_u128().expect("n <= 128"))
        .collect();
    let masks = hitting_masks(&balls);
    let ceiling = opts.size_ceiling.unwrap_or(n).min(n);
    let floor = opts.size_floor.max(1);
    let deadline = opts.time_limit.map(|t| started + t);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;

    let mut subsets_checked = 0u64;
    for k in floor..=ceiling {
        let outcome = pool.install(|| scan_size(k, n, &table, &masks, opts, deadline))?;
        subsets_checked += outcome.checked;
        if !outcome.hits.is_empty() {
            let mut hits = outcome.hits;
            hits.sort();
            if !opts.find_all {
                hits.truncate(1);
            }
            let mut codes: Vec<CodeCandidate> = hits
                .into_iter()
                .map(|(_, m)| CodeCandidate::new(VertexSet::from_u128(n, m)))
                .collect();
            codes.sort();
            return Ok(SearchResult {
                min_size: Some(k),
                codes,
                proven_minimum: floor == 1,
                elapsed: started.elapsed(),
                subsets_checked,
            });
        }
        if outcome.timed_out {
            break;
        }
    }
    Ok(SearchResult {
        min_size: None,
        codes: Vec::new(),
        proven_minimum: false,
        elapsed: started.elapsed(),
        subsets_checked,
    })
}
