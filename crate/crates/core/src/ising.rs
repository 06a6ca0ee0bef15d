//! Ising models compiled from monotone CNF with k-OR gadgets, and classical
//! solvers for them (exhaustive enumeration and simulated annealing).
//!
//! Spin `+1` means the variable is true: `S = 2x - 1`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cnf::{self, Cnf};
use crate::error::{Error, Result};
use crate::graph::VertexSet;
use crate::idcode::CodeCandidate;

/// One value in {-1, +1} per spin.
pub type SpinState = Vec<i8>;

/// Energies closer than this are treated as equal.
pub const ENERGY_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Problem,
    Ancilla,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsingModel {
    h: Vec<f64>,
    couplings: BTreeMap<(usize, usize), f64>,
    roles: Vec<Role>,
    /// CNF variable (graph vertex) carried by each problem spin.
    problem_vertex: Vec<Option<usize>>,
    penalty_lambda: f64,
    assumptions: Vec<usize>,
    source_var_count: usize,
}

fn ordered(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

impl IsingModel {
    /// Zero model over `var_count` problem spins with no vertex mapping.
    pub fn new(var_count: usize) -> Self {
        IsingModel {
            h: vec![0.0; var_count],
            couplings: BTreeMap::new(),
            roles: vec![Role::Problem; var_count],
            problem_vertex: vec![None; var_count],
            penalty_lambda: 0.0,
            assumptions: Vec::new(),
            source_var_count: var_count,
        }
    }

    pub fn from_terms(h: Vec<f64>, couplings: &[(usize, usize, f64)]) -> Result<Self> {
        let mut m = IsingModel::new(h.len());
        m.h = h;
        for &(i, j, v) in couplings {
            m.add_coupling(i, j, v)?;
        }
        Ok(m)
    }

    pub fn var_count(&self) -> usize {
        self.h.len()
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn couplings(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.couplings
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings.get(&ordered(i, j)).copied().unwrap_or(0.0)
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn problem_vertex(&self, spin: usize) -> Option<usize> {
        self.problem_vertex.get(spin).copied().flatten()
    }

    pub fn penalty_lambda(&self) -> f64 {
        self.penalty_lambda
    }

    pub fn assumptions(&self) -> &[usize] {
        &self.assumptions
    }

    pub fn problem_count(&self) -> usize {
        self.roles.iter().filter(|&&r| r == Role::Problem).count()
    }

    pub fn ancilla_count(&self) -> usize {
        self.var_count() - self.problem_count()
    }

    fn check(&self, i: usize) -> Result<()> {
        if i >= self.var_count() {
            return Err(Error::VertexOutOfRange {
                index: i,
                count: self.var_count(),
            });
        }
        Ok(())
    }

    /// Appends a spin and returns its index.
    pub fn push_spin(&mut self, role: Role, vertex: Option<usize>) -> usize {
        self.h.push(0.0);
        self.roles.push(role);
        self.problem_vertex.push(vertex);
        self.h.len() - 1
    }

    pub fn set_role(&mut self, i: usize, role: Role) -> Result<()> {
        self.check(i)?;
        self.roles[i] = role;
        Ok(())
    }

    pub fn add_h(&mut self, i: usize, v: f64) -> Result<()> {
        self.check(i)?;
        self.h[i] += v;
        Ok(())
    }

    pub fn set_h(&mut self, i: usize, v: f64) -> Result<()> {
        self.check(i)?;
        self.h[i] = v;
        Ok(())
    }

    pub fn add_coupling(&mut self, i: usize, j: usize, v: f64) -> Result<()> {
        self.check(i)?;
        self.check(j)?;
        if i == j {
            return Err(Error::InvalidArgument(format!("coupling endpoints coincide at {i}")));
        }
        *self.couplings.entry(ordered(i, j)).or_insert(0.0) += v;
        Ok(())
    }

    /// Removes couplings whose value summed to zero.
    pub fn prune_zero_couplings(&mut self) {
        self.couplings.retain(|_, v| *v != 0.0);
    }

    /// Largest absolute coefficient over `h` and `J`.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.h
            .iter()
            .chain(self.couplings.values())
            .fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    /// Per-spin neighbour lists.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.var_count()];
        for (&(i, j), &v) in &self.couplings {
            adj[i].push((j, v));
            adj[j].push((i, v));
        }
        adj
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("vars {}\n", self.var_count());
        for (i, v) in self.h.iter().enumerate() {
            if *v != 0.0 {
                let _ = writeln!(out, "h {i} {}", fmt_coef(*v));
            }
        }
        for (&(i, j), v) in &self.couplings {
            let _ = writeln!(out, "J {i} {j} {}", fmt_coef(*v));
        }
        for (i, r) in self.roles.iter().enumerate() {
            let tag = match r {
                Role::Problem => "problem",
                Role::Ancilla => "ancilla",
            };
            let _ = writeln!(out, "role {i} {tag}");
        }
        out
    }

    /// Parses the text format. Vertex mapping and assumptions are not part
    /// of it and come back empty.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut model: Option<IsingModel> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let parts: Vec<&str> = raw.split_whitespace().collect();
            if parts.is_empty() || parts[0].starts_with('#') {
                continue;
            }
            let perr = |msg: &str| Error::Parse {
                line,
                msg: msg.to_string(),
            };
            let num = |s: &str| s.parse::<usize>().map_err(|_| perr("bad index"));
            let val = |s: &str| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| perr("bad coefficient"))
            };
            match (parts[0], parts.len()) {
                ("vars", 2) if model.is_none() => model = Some(IsingModel::new(num(parts[1])?)),
                ("h", 3) => {
                    let m = model.as_mut().ok_or_else(|| perr("missing vars header"))?;
                    m.set_h(num(parts[1])?, val(parts[2])?)
                        .map_err(|e| perr(&e.to_string()))?;
                }
                ("J", 4) => {
                    let m = model.as_mut().ok_or_else(|| perr("missing vars header"))?;
                    m.add_coupling(num(parts[1])?, num(parts[2])?, val(parts[3])?)
                        .map_err(|e| perr(&e.to_string()))?;
                }
                ("role", 3) => {
                    let m = model.as_mut().ok_or_else(|| perr("missing vars header"))?;
                    let role = match parts[2] {
                        "problem" => Role::Problem,
                        "ancilla" => Role::Ancilla,
                        _ => return Err(perr("role must be problem or ancilla")),
                    };
                    m.set_role(num(parts[1])?, role)
                        .map_err(|e| perr(&e.to_string()))?;
                }
                _ => return Err(perr("unrecognised line")),
            }
        }
        model.ok_or(Error::Parse {
            line: 0,
            msg: "missing vars header".into(),
        })
    }
}

fn fmt_coef(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v}")
    }
}

pub fn write_model(m: &IsingModel, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, m.to_text())?;
    Ok(())
}

pub fn read_model(path: impl AsRef<Path>) -> Result<IsingModel> {
    IsingModel::from_text(&std::fs::read_to_string(path)?)
}

/// Coefficient table of one k-OR gadget. Slots `0..k` are the clause's
/// problem spins, slots `k..` its ancillas.
#[derive(Clone, Debug, Serialize)]
pub struct GadgetSpec {
    pub arity: usize,
    pub h: Vec<f64>,
    pub couplings: Vec<(usize, usize, f64)>,
    /// For each ancilla, the two slots whose OR it carries at ground.
    pub ancilla_inputs: Vec<(usize, usize)>,
    pub ground_energy: f64,
    pub violation_gap: f64,
}

impl GadgetSpec {
    pub fn slot_count(&self) -> usize {
        self.h.len()
    }

    pub fn ancilla_count(&self) -> usize {
        self.ancilla_inputs.len()
    }

    pub fn energy(&self, s: &[i8]) -> f64 {
        let mut e = 0.0;
        for (i, h) in self.h.iter().enumerate() {
            e += h * s[i] as f64;
        }
        for &(i, j, v) in &self.couplings {
            e += v * (s[i] * s[j]) as f64;
        }
        e
    }

    /// Minimum energy over ancilla settings for the given problem spins.
    pub fn min_over_ancillas(&self, problem: &[i8]) -> f64 {
        let k = self.arity;
        let a = self.ancilla_count();
        let mut s = vec![0i8; k + a];
        s[..k].copy_from_slice(problem);
        let mut best = f64::INFINITY;
        for m in 0..1u32 << a {
            for t in 0..a {
                s[k + t] = if m >> t & 1 == 1 { 1 } else { -1 };
            }
            best = best.min(self.energy(&s));
        }
        best
    }
}

struct GadgetBuilder {
    h: Vec<f64>,
    couplings: Vec<(usize, usize, f64)>,
    inputs: Vec<(usize, usize)>,
}

impl GadgetBuilder {
    fn new(k: usize) -> Self {
        GadgetBuilder {
            h: vec![0.0; k],
            couplings: Vec::new(),
            inputs: Vec::new(),
        }
    }

    /// `ab - 2az - 2bz + a + b - 2z`, minimised at -3 iff `z = a OR b`.
    fn pair_or(&mut self, a: usize, b: usize) -> usize {
        let z = self.h.len();
        self.h.push(-2.0);
        self.h[a] += 1.0;
        self.h[b] += 1.0;
        self.couplings.push((a, b, 1.0));
        self.couplings.push((a, z, -2.0));
        self.couplings.push((b, z, -2.0));
        self.inputs.push((a, b));
        z
    }

    /// `ab - a - b`: -1 when satisfied, +3 otherwise.
    fn terminal(&mut self, a: usize, b: usize) {
        self.h[a] -= 1.0;
        self.h[b] -= 1.0;
        let (a, b) = ordered(a, b);
        self.couplings.push((a, b, 1.0));
    }
}

/// Gadget for a `k`-literal OR clause, `2 <= k <= 6`.
pub fn gadget(k: usize) -> Result<GadgetSpec> {
    let mut b = GadgetBuilder::new(k);
    match k {
        2 => b.terminal(0, 1),
        3 => {
            let z1 = b.pair_or(0, 1);
            b.terminal(z1, 2);
        }
        4 => {
            let z1 = b.pair_or(0, 1);
            let z2 = b.pair_or(2, 3);
            b.terminal(z1, z2);
        }
        5 => {
            let z1 = b.pair_or(0, 1);
            let z2 = b.pair_or(2, 3);
            let z3 = b.pair_or(z1, z2);
            b.terminal(z3, 4);
        }
        6 => {
            let z1 = b.pair_or(0, 1);
            let z2 = b.pair_or(2, 3);
            let z3 = b.pair_or(z1, z2);
            let z4 = b.pair_or(4, 5);
            b.terminal(z3, z4);
        }
        _ => return Err(Error::UnsupportedArity(k)),
    }
    let mut spec = GadgetSpec {
        arity: k,
        h: b.h,
        couplings: b.couplings,
        ancilla_inputs: b.inputs,
        ground_energy: 0.0,
        violation_gap: 0.0,
    };
    let mut sat = f64::INFINITY;
    let mut unsat = f64::INFINITY;
    for m in 0..1u32 << k {
        let p: Vec<i8> = (0..k).map(|i| if m >> i & 1 == 1 { 1 } else { -1 }).collect();
        let e = spec.min_over_ancillas(&p);
        if m == 0 {
            unsat = e;
        } else {
            sat = sat.min(e);
        }
    }
    spec.ground_energy = sat;
    spec.violation_gap = unsat - sat;
    Ok(spec)
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum LambdaMode {
    /// `g_min / (2 (N + 1))` for `N` problem spins.
    #[default]
    Auto,
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum AncillaSharing {
    /// One ancilla per distinct OR-subset across all clauses.
    #[default]
    Shared,
    /// New ancillas for every clause.
    Fresh,
}

/// Penalty weight chosen by [`LambdaMode::Auto`].
pub fn auto_lambda(min_gap: f64, problem_spins: usize) -> f64 {
    min_gap / (2.0 * (problem_spins as f64 + 1.0))
}

/// Sum of one gadget per clause plus `lambda * S_i` on every problem spin.
/// Clause variables fill gadget slots in ascending order. With sharing, an
/// ancilla is keyed by the set of variables whose OR it carries; every
/// clause still adds its full gadget, so each clause keeps its own gap.
pub fn compile(f: &Cnf, lambda: LambdaMode, sharing: AncillaSharing) -> Result<IsingModel> {
    if f.clauses().is_empty() {
        return Err(Error::InvalidArgument("formula has no clauses".into()));
    }
    let mut gadgets: HashMap<usize, GadgetSpec> = HashMap::new();
    for c in f.clauses() {
        if !gadgets.contains_key(&c.len()) {
            gadgets.insert(c.len(), gadget(c.len())?);
        }
    }
    let free = f.free_variables();
    let mut model = IsingModel::new(0);
    let mut spin_of = vec![usize::MAX; f.var_count()];
    for &v in &free {
        spin_of[v] = model.push_spin(Role::Problem, Some(v));
    }
    let mut ancilla_of: BTreeMap<BTreeSet<usize>, usize> = BTreeMap::new();
    for c in f.clauses() {
        let g = &gadgets[&c.len()];
        let mut slot_spin: Vec<usize> = c.iter().map(|&v| spin_of[v]).collect();
        let mut slot_vars: Vec<BTreeSet<usize>> = c.iter().map(|&v| BTreeSet::from([v])).collect();
        for &(a, b) in &g.ancilla_inputs {
            let key: BTreeSet<usize> = slot_vars[a].union(&slot_vars[b]).copied().collect();
            let spin = match sharing {
                AncillaSharing::Shared => *ancilla_of
                    .entry(key.clone())
                    .or_insert_with(|| model.push_spin(Role::Ancilla, None)),
                AncillaSharing::Fresh => model.push_spin(Role::Ancilla, None),
            };
            slot_spin.push(spin);
            slot_vars.push(key);
        }
        for (slot, v) in g.h.iter().enumerate() {
            model.add_h(slot_spin[slot], *v)?;
        }
        for &(a, b, v) in &g.couplings {
            model.add_coupling(slot_spin[a], slot_spin[b], v)?;
        }
    }
    let min_gap = gadgets
        .values()
        .map(|g| g.violation_gap)
        .fold(f64::INFINITY, f64::min);
    let lam = match lambda {
        LambdaMode::Auto => auto_lambda(min_gap, free.len()),
        LambdaMode::Fixed(v) if v >= 0.0 && v.is_finite() => v,
        LambdaMode::Fixed(v) => {
            return Err(Error::InvalidArgument(format!("penalty must be finite and >= 0, got {v}")))
        }
    };
    for &v in &free {
        model.add_h(spin_of[v], lam)?;
    }
    model.prune_zero_couplings();
    model.penalty_lambda = lam;
    model.assumptions = f.assumptions().iter().copied().collect();
    model.source_var_count = f.var_count();
    Ok(model)
}

fn check_state(m: &IsingModel, s: &[i8]) -> Result<()> {
    if s.len() != m.var_count() {
        return Err(Error::SizeMismatch {
            expected: m.var_count(),
            got: s.len(),
        });
    }
    if s.iter().any(|&x| x != 1 && x != -1) {
        return Err(Error::InvalidArgument("spins must be -1 or +1".into()));
    }
    Ok(())
}

pub fn energy(m: &IsingModel, s: &[i8]) -> Result<f64> {
    check_state(m, s)?;
    Ok(energy_unchecked(m, s))
}

fn energy_unchecked(m: &IsingModel, s: &[i8]) -> f64 {
    let mut e: f64 = m.h.iter().zip(s).map(|(h, &x)| h * x as f64).sum();
    for (&(i, j), v) in &m.couplings {
        e += v * (s[i] * s[j]) as f64;
    }
    e
}

pub const DEFAULT_VAR_LIMIT: usize = 26;

#[derive(Clone, Debug, Serialize)]
pub struct GroundStates {
    pub energy: f64,
    pub states: Vec<SpinState>,
}

/// Exhaustive Gray-code enumeration. The low spins are walked in Gray order
/// inside parallel blocks that fix the high spins.
pub fn exact_ground_states(m: &IsingModel, var_limit: usize) -> Result<GroundStates> {
    let n = m.var_count();
    if n > var_limit || n > 40 {
        return Err(Error::ModelTooLarge {
            vars: n,
            limit: var_limit.min(40),
        });
    }
    if n == 0 {
        return Ok(GroundStates {
            energy: 0.0,
            states: vec![Vec::new()],
        });
    }
    let adj = m.adjacency();
    let high = n.min(6).min(n.saturating_sub(10));
    let low = n - high;
    let blocks: Vec<(f64, Vec<SpinState>)> = (0..1u64 << high)
        .into_par_iter()
        .map(|block| {
            let mut s: SpinState = vec![-1; n];
            for t in 0..high {
                if block >> t & 1 == 1 {
                    s[low + t] = 1;
                }
            }
            let mut e = energy_unchecked(m, &s);
            let mut best = e;
            let mut found = vec![s.clone()];
            for step in 1..1u64 << low {
                let i = step.trailing_zeros() as usize;
                let field = m.h[i] + adj[i].iter().map(|&(j, v)| v * s[j] as f64).sum::<f64>();
                e -= 2.0 * s[i] as f64 * field;
                s[i] = -s[i];
                if e < best - 1e-6 {
                    best = e;
                    found.clear();
                }
                if e <= best + 1e-6 {
                    found.push(s.clone());
                }
            }
            (best, found)
        })
        .collect();
    // Re-evaluate candidates exactly to shed accumulated rounding.
    let mut states: Vec<(f64, SpinState)> = blocks
        .into_iter()
        .flat_map(|(_, f)| f)
        .map(|s| (energy_unchecked(m, &s), s))
        .collect();
    let best = states.iter().map(|(e, _)| *e).fold(f64::INFINITY, f64::min);
    states.retain(|(e, _)| *e <= best + ENERGY_TOLERANCE);
    let mut states: Vec<SpinState> = states.into_iter().map(|(_, s)| s).collect();
    states.sort();
    states.dedup();
    Ok(GroundStates {
        energy: best,
        states,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Schedule {
    pub sweeps: usize,
    pub beta_start: f64,
    pub beta_end: f64,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            sweeps: 1000,
            beta_start: 0.1,
            beta_end: 5.0,
        }
    }
}

impl Schedule {
    pub fn beta(&self, sweep: usize) -> f64 {
        if self.sweeps <= 1 {
            return self.beta_end;
        }
        let t = sweep as f64 / (self.sweeps - 1) as f64;
        self.beta_start * (self.beta_end / self.beta_start).powf(t)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AnnealResult {
    pub best_energy: f64,
    /// Distinct states attaining `best_energy`.
    pub best_states: Vec<SpinState>,
    /// Lowest energy and state reached by each restart, in restart order.
    pub restarts: Vec<(f64, SpinState)>,
}

impl AnnealResult {
    /// Restarts whose final energy is within tolerance of `target`.
    pub fn hits(&self, target: f64) -> usize {
        self.restarts
            .iter()
            .filter(|(e, _)| (*e - target).abs() <= ENERGY_TOLERANCE)
            .count()
    }
}

/// Generator for restart `index`: the seed picks the key, the index the stream.
pub fn restart_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn anneal_once(m: &IsingModel, adj: &[Vec<(usize, f64)>], sched: &Schedule, mut rng: ChaCha8Rng) -> (f64, SpinState) {
    let n = m.var_count();
    let mut s: SpinState = (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
    let mut field: Vec<f64> = (0..n)
        .map(|i| m.h[i] + adj[i].iter().map(|&(j, v)| v * s[j] as f64).sum::<f64>())
        .collect();
    let flip = |s: &mut SpinState, field: &mut Vec<f64>, i: usize| {
        s[i] = -s[i];
        let d = 2.0 * s[i] as f64;
        for &(j, v) in &adj[i] {
            field[j] += d * v;
        }
    };
    let mut e = energy_unchecked(m, &s);
    let mut best = (e, s.clone());
    for sweep in 0..sched.sweeps {
        let beta = sched.beta(sweep);
        for i in 0..n {
            let delta = -2.0 * s[i] as f64 * field[i];
            if delta <= 0.0 || rng.gen::<f64>() < (-beta * delta).exp() {
                flip(&mut s, &mut field, i);
                e += delta;
            }
        }
        if e < best.0 - ENERGY_TOLERANCE {
            best = (e, s.clone());
        }
    }
    // Finish with a greedy descent from the best state seen.
    let (_, mut s) = best;
    let mut field: Vec<f64> = (0..n)
        .map(|i| m.h[i] + adj[i].iter().map(|&(j, v)| v * s[j] as f64).sum::<f64>())
        .collect();
    loop {
        let mut improved = false;
        for i in 0..n {
            if -2.0 * s[i] as f64 * field[i] < -ENERGY_TOLERANCE {
                flip(&mut s, &mut field, i);
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    (energy_unchecked(m, &s), s)
}

/// Metropolis single-spin-flip annealing with a geometric inverse
/// temperature ramp. Results depend only on `(seed, restarts)`.
pub fn simulated_annealing(m: &IsingModel, sched: &Schedule, restarts: usize, seed: u64) -> AnnealResult {
    let adj = m.adjacency();
    let runs: Vec<(f64, SpinState)> = (0..restarts)
        .into_par_iter()
        .map(|r| anneal_once(m, &adj, sched, restart_rng(seed, r as u64)))
        .collect();
    let best_energy = runs.iter().map(|(e, _)| *e).fold(f64::INFINITY, f64::min);
    let mut best_states: Vec<SpinState> = runs
        .iter()
        .filter(|(e, _)| *e <= best_energy + ENERGY_TOLERANCE)
        .map(|(_, s)| s.clone())
        .collect();
    best_states.sort();
    best_states.dedup();
    AnnealResult {
        best_energy,
        best_states,
        restarts: runs,
    }
}

/// Truth assignment over the source formula's variables (assumptions set)
/// and the matching code candidate.
pub fn decode(m: &IsingModel, s: &[i8]) -> Result<(Vec<bool>, CodeCandidate)> {
    check_state(m, s)?;
    let mut x = vec![false; m.source_var_count];
    for &a in &m.assumptions {
        x[a] = true;
    }
    for (i, &spin) in s.iter().enumerate() {
        if let (Role::Problem, Some(v)) = (m.roles[i], m.problem_vertex[i]) {
            if v < x.len() && spin == 1 {
                x[v] = true;
            }
        }
    }
    let set = VertexSet::from_indices(x.len(), x.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i));
    Ok((x, CodeCandidate::new(set)))
}

/// Two-literal clauses considered by [`hardware_pivots`].
const PIVOT_CANDIDATES: usize = 8;

/// Two 2-clause pivots whose case split keeps the largest compiled case
/// smallest, then the total spin count; earlier clauses win ties. Falls
/// back to [`cnf::choose_pivots`] when fewer than two 2-clauses exist or a
/// case has no clauses left.
pub fn hardware_pivots(f: &Cnf, sharing: AncillaSharing) -> Result<Vec<[usize; 2]>> {
    let candidates = cnf::choose_pivots(f, PIVOT_CANDIDATES);
    let mut best: Option<((usize, usize), Vec<[usize; 2]>)> = None;
    for (i, &a) in candidates.iter().enumerate() {
        for &b in &candidates[i + 1..] {
            let split = cnf::case_split(f, &[a, b])?;
            let mut sizes = Vec::with_capacity(split.cases.len());
            for case in &split.cases {
                if case.formula.clauses().is_empty() {
                    return Ok(cnf::choose_pivots(f, 2));
                }
                sizes.push(compile(&case.formula, LambdaMode::Auto, sharing)?.var_count());
            }
            let key = (sizes.iter().copied().max().unwrap_or(0), sizes.iter().sum());
            if best.as_ref().map_or(true, |(k, _)| key < *k) {
                best = Some((key, vec![a, b]));
            }
        }
    }
    Ok(best.map_or_else(|| cnf::choose_pivots(f, 2), |(_, p)| p))
}

/// Spin state for an assignment via `S = 2x - 1`. Ancillas are set to -1.
pub fn encode_assignment(m: &IsingModel, x: &[bool]) -> SpinState {
    m.problem_vertex
        .iter()
        .map(|v| match v {
            Some(v) if x.get(*v).copied().unwrap_or(false) => 1,
            _ => -1,
        })
        .collect()
}
