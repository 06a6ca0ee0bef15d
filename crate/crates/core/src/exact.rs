//! Exact minimum identifying codes through minimum hitting sets.
//!
//! A monotone CNF is satisfied by a true-set iff that set hits every clause,
//! so the cheapest satisfying assignment is a minimum hitting set of the
//! clause family. The search branches on the variables of an unsatisfied
//! clause and bounds with a greedy packing of pairwise-disjoint clauses.

use std::cmp::Ordering as CmpOrdering;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::cnf::{self, BlockingClause, Cnf};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::idcode::CodeCandidate;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchStrategy {
    /// Depth-first branch and bound with a shared incumbent.
    #[default]
    BranchAndBound,
    /// Decide sizes `k = lb, lb+1, ...` in turn; the first satisfiable one is
    /// the minimum. Enumeration uses blocking clauses. Runs single-threaded.
    IterativeDeepening,
}

#[derive(Clone, Debug)]
pub struct BnbConfig {
    /// Known achievable size; tightens pruning from the start.
    pub upper_bound_seed: Option<usize>,
    pub enumerate_all: bool,
    pub node_limit: Option<u64>,
    pub time_limit: Option<Duration>,
    pub workers: usize,
    /// Subtrees above this depth become parallel tasks.
    pub spawn_depth: usize,
    pub strategy: SearchStrategy,
}

impl Default for BnbConfig {
    fn default() -> Self {
        BnbConfig {
            upper_bound_seed: None,
            enumerate_all: false,
            node_limit: None,
            time_limit: None,
            workers: rayon::current_num_threads(),
            spawn_depth: 6,
            strategy: SearchStrategy::BranchAndBound,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BnbResult {
    /// Best size found, including assumed variables. `None` if nothing was
    /// found before a budget ran out.
    pub min_size: Option<usize>,
    /// Optimal codes (all of them with `enumerate_all`), assumptions included.
    pub codes: Vec<CodeCandidate>,
    /// False only when a node or time budget interrupted the search.
    pub proven_minimum: bool,
    pub nodes_explored: u64,
    pub elapsed: Duration,
}

#[inline]
fn bit(v: usize) -> u128 {
    1u128 << v
}

/// `a` precedes `b` when its sorted variable list is lexicographically smaller.
fn lex_cmp(a: u128, b: u128) -> CmpOrdering {
    if a == b {
        return CmpOrdering::Equal;
    }
    let first_diff = (a ^ b).trailing_zeros();
    if a >> first_diff & 1 == 1 {
        CmpOrdering::Less
    } else {
        CmpOrdering::Greater
    }
}

/// Greedy count of pairwise-disjoint clauses, shortest first.
fn packing(masks: &[u128], scratch: &mut Vec<u128>) -> usize {
    scratch.clear();
    scratch.extend_from_slice(masks);
    scratch.sort_unstable_by_key(|m| m.count_ones());
    let mut used = 0u128;
    let mut count = 0;
    for &m in scratch.iter() {
        if m & used == 0 {
            used |= m;
            count += 1;
        }
    }
    count
}

/// Lower bound on the number of variables still needed to hit every clause
/// not already hit by `partial`.
pub fn packing_lower_bound(f: &Cnf, partial: &VertexSet) -> usize {
    let mut sets: Vec<VertexSet> = f
        .clauses()
        .iter()
        .map(|c| VertexSet::from_indices(f.var_count(), c.iter().copied()))
        .filter(|c| !c.intersects(partial))
        .collect();
    sets.sort_by_key(VertexSet::count);
    let mut used = VertexSet::new(f.var_count());
    let mut count = 0;
    for c in sets {
        if !c.intersects(&used) {
            used = used.union(&c);
            count += 1;
        }
    }
    count
}

/// Branching clause: shortest, ties by lexicographic content. Its variables
/// are returned by descending frequency among `unsat`, ties by index.
fn branch_order(unsat: &[u128]) -> Vec<usize> {
    let clause = *unsat
        .iter()
        .min_by(|&&a, &&b| a.count_ones().cmp(&b.count_ones()).then(lex_cmp(a, b)))
        .expect("nonempty");
    let mut vars: Vec<(usize, usize)> = Vec::with_capacity(clause.count_ones() as usize);
    let mut rest = clause;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let freq = unsat.iter().filter(|&&m| m & bit(v) != 0).count();
        vars.push((v, freq));
    }
    vars.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    vars.into_iter().map(|(v, _)| v).collect()
}

/// Clauses left after choosing `v` with `excluded` forbidden. `None` if one
/// of them can no longer be hit.
fn child_clauses(unsat: &[u128], v: usize, excluded: u128) -> Option<Vec<u128>> {
    let mut out = Vec::with_capacity(unsat.len());
    for &m in unsat {
        if m & bit(v) != 0 {
            continue;
        }
        let m = m & !excluded;
        if m == 0 {
            return None;
        }
        out.push(m);
    }
    Some(out)
}

struct Shared {
    enumerate_all: bool,
    /// Incumbent size; `usize::MAX` when none.
    best: AtomicUsize,
    solutions: Mutex<Vec<u128>>,
    nodes: AtomicU64,
    stop: AtomicBool,
    node_limit: Option<u64>,
    deadline: Option<Instant>,
    spawn_depth: usize,
}

impl Shared {
    fn tick(&self) -> bool {
        if self.stop.load(Ordering::Relaxed) {
            return false;
        }
        let n = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        let over_nodes = self.node_limit.is_some_and(|l| n > l);
        let over_time = n % 1024 == 0 && self.deadline.is_some_and(|d| Instant::now() >= d);
        if over_nodes || over_time {
            self.stop.store(true, Ordering::Relaxed);
            return false;
        }
        true
    }

    fn record(&self, set: u128, size: usize) {
        let mut sols = self.solutions.lock().expect("poisoned");
        let best = self.best.load(Ordering::Relaxed);
        if size < best {
            self.best.store(size, Ordering::Relaxed);
            sols.clear();
            sols.push(set);
        } else if size == best && self.enumerate_all {
            sols.push(set);
        }
    }

    fn pruned(&self, bound: usize) -> bool {
        let best = self.best.load(Ordering::Relaxed);
        if self.enumerate_all {
            bound > best
        } else {
            bound >= best
        }
    }

    fn visit(&self, cur: u128, size: usize, unsat: Vec<u128>, depth: usize) {
        if !self.tick() {
            return;
        }
        if unsat.is_empty() {
            self.record(cur, size);
            return;
        }
        let mut scratch = Vec::with_capacity(unsat.len());
        if self.pruned(size + packing(&unsat, &mut scratch)) {
            return;
        }
        let order = branch_order(&unsat);
        if depth < self.spawn_depth {
            rayon::scope(|s| {
                let mut excluded = 0u128;
                for &v in &order {
                    if let Some(child) = child_clauses(&unsat, v, excluded) {
                        s.spawn(move |_| self.visit(cur | bit(v), size + 1, child, depth + 1));
                    }
                    excluded |= bit(v);
                }
            });
        } else {
            let mut excluded = 0u128;
            for &v in &order {
                if self.pruned(size + 1) {
                    break;
                }
                if let Some(child) = child_clauses(&unsat, v, excluded) {
                    self.visit(cur | bit(v), size + 1, child, depth + 1);
                }
                excluded |= bit(v);
            }
        }
    }
}

/// Greedy hitting set (most frequent variable first), then pruned to an
/// inclusion-minimal one.
fn greedy_cover(clauses: &[u128]) -> u128 {
    let mut chosen = 0u128;
    let mut open: Vec<u128> = clauses.to_vec();
    while !open.is_empty() {
        let mut counts = [0usize; 128];
        for &m in &open {
            let mut r = m;
            while r != 0 {
                counts[r.trailing_zeros() as usize] += 1;
                r &= r - 1;
            }
        }
        let v = (0..128).max_by_key(|&v| (counts[v], std::cmp::Reverse(v))).expect("128");
        chosen |= bit(v);
        open.retain(|&m| m & bit(v) == 0);
    }
    for v in 0..128 {
        if chosen & bit(v) != 0 {
            let without = chosen & !bit(v);
            if clauses.iter().all(|&m| m & without != 0) {
                chosen = without;
            }
        }
    }
    chosen
}

fn clause_masks(f: &Cnf) -> Result<Vec<u128>> {
    if f.var_count() > 128 {
        return Err(Error::Capacity(format!(
            "exact search supports at most 128 variables, formula has {}",
            f.var_count()
        )));
    }
    let simplified = cnf::simplify(f);
    Ok(simplified
        .clauses()
        .iter()
        .map(|c| c.iter().fold(0u128, |m, &v| m | bit(v)))
        .collect())
}

fn finish(
    f: &Cnf,
    best: Option<usize>,
    mut sets: Vec<u128>,
    proven: bool,
    nodes: u64,
    started: Instant,
) -> BnbResult {
    let assumed: u128 = f.assumptions().iter().fold(0, |m, &v| m | bit(v));
    sets.sort_by(|&a, &b| lex_cmp(a, b));
    sets.dedup();
    let codes = sets
        .into_iter()
        .map(|s| CodeCandidate::new(VertexSet::from_u128(f.var_count(), s | assumed)))
        .collect();
    BnbResult {
        min_size: best.map(|b| b + f.assumptions().len()),
        codes,
        proven_minimum: proven,
        nodes_explored: nodes,
        elapsed: started.elapsed(),
    }
}

fn run_bnb(clauses: &[u128], cfg: &BnbConfig, seed: Option<usize>, started: Instant) -> Result<Shared> {
    let shared = Shared {
        enumerate_all: cfg.enumerate_all,
        best: AtomicUsize::new(usize::MAX),
        solutions: Mutex::new(Vec::new()),
        nodes: AtomicU64::new(0),
        stop: AtomicBool::new(false),
        node_limit: cfg.node_limit,
        deadline: cfg.time_limit.map(|t| started + t),
        spawn_depth: if cfg.workers > 1 { cfg.spawn_depth } else { 0 },
    };
    match seed {
        Some(s) if cfg.enumerate_all => shared.best.store(s, Ordering::Relaxed),
        Some(s) => shared.best.store(s + 1, Ordering::Relaxed),
        None => {
            let greedy = greedy_cover(clauses);
            let size = greedy.count_ones() as usize;
            if cfg.enumerate_all {
                shared.best.store(size, Ordering::Relaxed);
            } else {
                shared.record(greedy, size);
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    pool.install(|| shared.visit(0, 0, clauses.to_vec(), 0));
    Ok(shared)
}

/// Minimum hitting set of a monotone formula, reported as a minimum code
/// with the formula's assumptions added back.
pub fn min_hitting_set(f: &Cnf, cfg: &BnbConfig) -> Result<BnbResult> {
    if cfg.node_limit == Some(0) {
        return Err(Error::InvalidArgument("node limit must be at least 1".into()));
    }
    let started = Instant::now();
    let clauses = clause_masks(f)?;
    if cfg.strategy == SearchStrategy::IterativeDeepening {
        return Ok(iterative_deepening(f, &clauses, cfg, started));
    }
    let mut shared = run_bnb(&clauses, cfg, cfg.upper_bound_seed, started)?;
    let interrupted = shared.stop.load(Ordering::Relaxed);
    if !interrupted && cfg.upper_bound_seed.is_some() && shared.solutions.lock().expect("poisoned").is_empty() {
        // The seed was below the optimum; search again without it.
        let nodes = shared.nodes.load(Ordering::Relaxed);
        shared = run_bnb(&clauses, cfg, None, started)?;
        shared.nodes.fetch_add(nodes, Ordering::Relaxed);
    }
    let interrupted = shared.stop.load(Ordering::Relaxed);
    let sets = shared.solutions.into_inner().expect("poisoned");
    let best = (!sets.is_empty()).then(|| shared.best.load(Ordering::Relaxed));
    Ok(finish(
        f,
        best,
        sets,
        !interrupted,
        shared.nodes.load(Ordering::Relaxed),
        started,
    ))
}

struct Deepening<'a> {
    limit: usize,
    blocked: &'a [BlockingClause],
    var_count: usize,
    nodes: u64,
    node_limit: Option<u64>,
    deadline: Option<Instant>,
    stopped: bool,
}

impl Deepening<'_> {
    /// First hitting set of size at most `limit` that is not blocked.
    fn find(&mut self, cur: u128, size: usize, unsat: &[u128]) -> Option<u128> {
        self.nodes += 1;
        if self.node_limit.is_some_and(|l| self.nodes > l)
            || (self.nodes % 1024 == 0 && self.deadline.is_some_and(|d| Instant::now() >= d))
        {
            self.stopped = true;
        }
        if self.stopped {
            return None;
        }
        if unsat.is_empty() {
            let set = VertexSet::from_u128(self.var_count, cur);
            return (!self.blocked.iter().any(|b| b.is_violated_by(&set))).then_some(cur);
        }
        let mut scratch = Vec::new();
        if size + packing(unsat, &mut scratch) > self.limit {
            return None;
        }
        let mut excluded = 0u128;
        for v in branch_order(unsat) {
            if let Some(child) = child_clauses(unsat, v, excluded) {
                if let Some(found) = self.find(cur | bit(v), size + 1, &child) {
                    return Some(found);
                }
            }
            excluded |= bit(v);
        }
        None
    }
}

fn iterative_deepening(f: &Cnf, clauses: &[u128], cfg: &BnbConfig, started: Instant) -> BnbResult {
    let deadline = cfg.time_limit.map(|t| started + t);
    let mut scratch = Vec::new();
    let mut nodes = 0;
    let mut blocked: Vec<BlockingClause> = Vec::new();
    let mut found: Vec<u128> = Vec::new();
    let start = packing(clauses, &mut scratch);
    for k in start..=f.var_count() {
        loop {
            let mut search = Deepening {
                limit: k,
                blocked: &blocked,
                var_count: f.var_count(),
                nodes: 0,
                node_limit: cfg.node_limit.map(|l| l.saturating_sub(nodes)),
                deadline,
                stopped: false,
            };
            let hit = search.find(0, 0, clauses);
            nodes += search.nodes;
            if search.stopped {
                let best = (!found.is_empty()).then_some(k);
                return finish(f, best, found, false, nodes, started);
            }
            match hit {
                Some(set) => {
                    found.push(set);
                    if !cfg.enumerate_all {
                        break;
                    }
                    let code = CodeCandidate::new(VertexSet::from_u128(f.var_count(), set));
                    blocked.push(cnf::blocking_clause(&code));
                }
                None => break,
            }
        }
        if !found.is_empty() {
            return finish(f, Some(k), found, true, nodes, started);
        }
    }
    finish(f, None, found, true, nodes, started)
}

/// Builds the formula for `g`, splits on up to two 2-clause pivots, solves
/// every case and keeps the codes of globally minimum size.
pub fn solve_with_case_split(g: &Graph, cfg: &BnbConfig) -> Result<BnbResult> {
    let started = Instant::now();
    let formula = cnf::simplify(&cnf::build_formula(g)?);
    let pivots = cnf::choose_pivots(&formula, 2);
    let split = cnf::case_split(&formula, &pivots)?;
    let mut best: Option<usize> = None;
    let mut codes: Vec<CodeCandidate> = Vec::new();
    let mut proven = true;
    let mut nodes = 0;
    for case in &split.cases {
        let mut case_cfg = cfg.clone();
        if let (Some(b), None) = (best, cfg.upper_bound_seed) {
            // Assumptions are included in a case's size, seed the free part.
            case_cfg.upper_bound_seed = b.checked_sub(case.formula.assumptions().len());
        }
        if let Some(t) = cfg.time_limit {
            case_cfg.time_limit = Some(t.saturating_sub(started.elapsed()));
        }
        let res = min_hitting_set(&case.formula, &case_cfg)?;
        nodes += res.nodes_explored;
        proven &= res.proven_minimum;
        if let Some(size) = res.min_size {
            match best {
                Some(b) if size > b => {}
                Some(b) if size == b => codes.extend(res.codes),
                _ => {
                    best = Some(size);
                    codes = res.codes;
                }
            }
        }
    }
    codes.sort();
    codes.dedup();
    if !cfg.enumerate_all {
        codes.truncate(1);
    }
    Ok(BnbResult {
        min_size: best,
        codes,
        proven_minimum: proven,
        nodes_explored: nodes,
        elapsed: started.elapsed(),
    })
}

/// Builds, simplifies and solves the formula for `g` without case splitting.
pub fn solve_graph(g: &Graph, cfg: &BnbConfig) -> Result<BnbResult> {
    let formula = cnf::simplify(&cnf::build_formula(g)?);
    min_hitting_set(&formula, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{debruijn, DeBruijnParams};
    use crate::idcode::{is_identifying, min_code_bruteforce, BruteForceOptions};
    use proptest::prelude::*;

    fn db(d: usize, n: usize) -> Graph {
        debruijn(DeBruijnParams::new(d, n).unwrap()).unwrap()
    }

    fn exhaustive_optimum(f: &Cnf) -> (usize, Vec<u64>) {
        let n = f.var_count();
        let mut best = usize::MAX;
        let mut sets = Vec::new();
        for m in 0..1u64 << n {
            let s = VertexSet::from_indices(n, (0..n).filter(|v| m >> v & 1 == 1));
            if f.is_satisfied_by(&s) {
                let c = m.count_ones() as usize;
                if c < best {
                    best = c;
                    sets.clear();
                }
                if c == best {
                    sets.push(m);
                }
            }
        }
        (best, sets)
    }

    #[test]
    fn b24_minimum_is_six() {
        let res = solve_graph(&db(2, 4), &BnbConfig::default()).unwrap();
        assert_eq!(res.min_size, Some(6));
        assert!(res.proven_minimum);
        assert!(is_identifying(&db(2, 4), &res.codes[0]).unwrap().is_ok());
    }

    #[test]
    fn tiny_formula_optima() {
        let f = cnf::simplify(&Cnf::new(4, vec![vec![1], vec![1, 2], vec![2, 3]]).unwrap());
        let cfg = BnbConfig {
            enumerate_all: true,
            ..Default::default()
        };
        let res = min_hitting_set(&f, &cfg).unwrap();
        assert_eq!(res.min_size, Some(2));
        let got: Vec<Vec<usize>> = res.codes.iter().map(|c| c.vertices()).collect();
        assert_eq!(got, vec![vec![1, 2], vec![1, 3]]);
    }

    #[test]
    fn unit_clause_forced() {
        let f = Cnf::new(5, vec![vec![4], vec![0, 1], vec![1, 2, 3]]).unwrap();
        let cfg = BnbConfig {
            enumerate_all: true,
            ..Default::default()
        };
        let res = min_hitting_set(&f, &cfg).unwrap();
        assert!(res.codes.iter().all(|c| c.members().contains(4)));
    }

    #[test]
    fn assumptions_are_added_back() {
        let f = cnf::assign_true(&Cnf::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap(), &[0]).unwrap();
        let res = min_hitting_set(&f, &BnbConfig::default()).unwrap();
        assert_eq!(res.min_size, Some(2));
        assert!(res.codes[0].members().contains(0));
    }

    #[test]
    fn packing_examples() {
        let f = Cnf::new(5, vec![vec![1, 2], vec![3, 4]]).unwrap();
        assert_eq!(packing_lower_bound(&f, &VertexSet::new(5)), 2);
        let g = Cnf::new(5, vec![vec![1, 2], vec![1, 3], vec![1, 4]]).unwrap();
        assert_eq!(packing_lower_bound(&g, &VertexSet::new(5)), 1);
        assert_eq!(packing_lower_bound(&f, &VertexSet::from_indices(5, [1])), 1);
    }

    #[test]
    fn case_split_agrees_with_brute_force() {
        let g = db(2, 4);
        let cfg = BnbConfig {
            enumerate_all: true,
            ..Default::default()
        };
        let split = solve_with_case_split(&g, &cfg).unwrap();
        let brute = min_code_bruteforce(
            &g,
            &BruteForceOptions {
                find_all: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(split.min_size, Some(6));
        assert_eq!(split.codes, brute.codes);
        let b23 = solve_with_case_split(&db(2, 3), &BnbConfig::default()).unwrap();
        assert_eq!(b23.min_size, Some(4));
        let edge = Graph::from_edges(2, &[(0, 1)], None).unwrap();
        assert!(matches!(solve_with_case_split(&edge, &cfg), Err(Error::Twins(0, 1))));
    }

    #[test]
    fn enumerate_all_matches_brute_force() {
        for (d, n) in [(2, 3), (2, 4), (3, 2)] {
            let g = db(d, n);
            let brute = min_code_bruteforce(
                &g,
                &BruteForceOptions {
                    find_all: true,
                    ..Default::default()
                },
            )
            .unwrap();
            for strategy in [SearchStrategy::BranchAndBound, SearchStrategy::IterativeDeepening] {
                for workers in [1, 4] {
                    let cfg = BnbConfig {
                        enumerate_all: true,
                        workers,
                        strategy,
                        ..Default::default()
                    };
                    let res = solve_graph(&g, &cfg).unwrap();
                    assert_eq!(res.min_size, brute.min_size, "B({d},{n}) {strategy:?}");
                    assert_eq!(res.codes, brute.codes, "B({d},{n}) {strategy:?} workers={workers}");
                }
            }
        }
    }

    #[test]
    fn seeds_and_limits() {
        let f = cnf::simplify(&cnf::build_formula(&db(2, 4)).unwrap());
        for seed in [3, 6, 9] {
            let cfg = BnbConfig {
                upper_bound_seed: Some(seed),
                ..Default::default()
            };
            assert_eq!(min_hitting_set(&f, &cfg).unwrap().min_size, Some(6), "seed {seed}");
        }
        let cfg = BnbConfig {
            node_limit: Some(1),
            ..Default::default()
        };
        let res = min_hitting_set(&f, &cfg).unwrap();
        assert!(!res.proven_minimum);
        let zero = BnbConfig {
            node_limit: Some(0),
            ..Default::default()
        };
        assert!(min_hitting_set(&f, &zero).is_err());
    }

    #[test]
    fn b33_and_b25() {
        assert_eq!(solve_graph(&db(3, 3), &BnbConfig::default()).unwrap().min_size, Some(9));
        assert_eq!(solve_graph(&db(2, 5), &BnbConfig::default()).unwrap().min_size, Some(12));
    }

    fn arb_cnf() -> impl Strategy<Value = Cnf> {
        (1usize..=12).prop_flat_map(|n| {
            proptest::collection::vec(proptest::collection::btree_set(0..n, 1..=5), 1..15).prop_map(
                move |cs| Cnf::new(n, cs.into_iter().map(|c| c.into_iter().collect()).collect()).unwrap(),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn bound_admissible_and_optimum_exact(f in arb_cnf()) {
            let (opt, sets) = exhaustive_optimum(&f);
            prop_assert!(packing_lower_bound(&f, &VertexSet::new(f.var_count())) <= opt);
            let cfg = BnbConfig { enumerate_all: true, workers: 2, ..Default::default() };
            let res = min_hitting_set(&f, &cfg).unwrap();
            prop_assert_eq!(res.min_size, Some(opt));
            let mut got: Vec<u64> = res.codes.iter()
                .map(|c| c.vertices().iter().fold(0u64, |m, &v| m | 1 << v))
                .collect();
            got.sort();
            let mut want = sets;
            want.sort();
            prop_assert_eq!(got, want);
        }
    }
}
