//! End-to-end pipelines and their reports: the annealing path from graph
//! to verified code, and the minimum-code table.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::chimera::{chimera, embed_model, heuristic_embed, unembed, EmbedOptions};
use crate::cnf::{self, Cnf};
use crate::error::{Error, Result};
use crate::exact::{solve_with_case_split, BnbConfig};
use crate::graph::{debruijn, DeBruijnParams, Graph};
use crate::idcode::{is_identifying, CodeCandidate};
use crate::ising::{self, compile, decode, simulated_annealing, AncillaSharing, LambdaMode, Schedule, SpinState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Brute,
    Bnb,
    AnnealIsing,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Brute => "brute",
            Method::Bnb => "bnb",
            Method::AnnealIsing => "anneal-ising",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brute" => Ok(Method::Brute),
            "bnb" => Ok(Method::Bnb),
            "anneal-ising" => Ok(Method::AnnealIsing),
            _ => Err(Error::InvalidArgument(format!("unknown method {s:?}"))),
        }
    }
}

/// Outcome of one solve, independent of the method used.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub method: Method,
    pub graph: String,
    pub vertices: usize,
    pub min_size: Option<usize>,
    pub proven: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub codes: Option<Vec<Vec<usize>>>,
    pub elapsed_secs: f64,
    pub params: BTreeMap<String, String>,
    /// Set when an annealing result was checked against the exact optimum.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matches_optimum: Option<bool>,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let size = self.min_size.map_or("none".to_string(), |k| k.to_string());
        let _ = writeln!(out, "{} {} ({} vertices)", self.method, self.graph, self.vertices);
        let _ = writeln!(out, "min size: {size}{}", if self.proven { " (proven)" } else { " (not proven)" });
        if let Some(m) = self.matches_optimum {
            let _ = writeln!(out, "matches exact optimum: {m}");
        }
        for code in self.codes.iter().flatten() {
            let _ = writeln!(out, "code: {code:?}");
        }
        let _ = writeln!(out, "elapsed: {:.3}s", self.elapsed_secs);
        out
    }

    pub fn to_csv(&self) -> String {
        let codes = self
            .codes
            .iter()
            .flatten()
            .map(|c| c.iter().map(usize::to_string).collect::<Vec<_>>().join(" "))
            .collect::<Vec<_>>()
            .join(";");
        format!(
            "method,graph,vertices,min_size,proven,elapsed_secs,codes\n{},{},{},{},{},{:.6},{}\n",
            self.method,
            self.graph,
            self.vertices,
            self.min_size.map_or(String::new(), |k| k.to_string()),
            self.proven,
            self.elapsed_secs,
            codes
        )
    }
}

/// Hardware used when annealing goes through an embedding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChimeraShape {
    pub rows: usize,
    pub cols: usize,
    pub shore: usize,
}

impl FromStr for ChimeraShape {
    type Err = Error;

    /// `rows,cols,shore`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<usize> = s
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidArgument(format!("bad Chimera shape {s:?}, want rows,cols,shore")))?;
        match parts[..] {
            [rows, cols, shore] => Ok(ChimeraShape { rows, cols, shore }),
            _ => Err(Error::InvalidArgument(format!("bad Chimera shape {s:?}, want rows,cols,shore"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct AnnealOptions {
    pub restarts: usize,
    pub schedule: Schedule,
    pub seed: u64,
    pub lambda: LambdaMode,
    pub sharing: AncillaSharing,
    /// `None` picks them with [`ising::hardware_pivots`]; empty disables splitting.
    pub pivots: Option<Vec<[usize; 2]>>,
    pub embed: Option<ChimeraShape>,
    pub embed_options: EmbedOptions,
}

impl Default for AnnealOptions {
    fn default() -> Self {
        AnnealOptions {
            restarts: 1000,
            schedule: Schedule::default(),
            seed: 0,
            lambda: LambdaMode::Auto,
            sharing: AncillaSharing::Shared,
            pivots: None,
            embed: None,
            embed_options: EmbedOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseOutcome {
    pub chosen: Vec<usize>,
    pub spins: usize,
    /// Physical qubits when embedded.
    pub qubits: Option<usize>,
    pub best_energy: Option<f64>,
    /// Restarts whose decoded code passed verification.
    pub verified: usize,
    pub best_code: Option<CodeCandidate>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnnealOutcome {
    pub pivots: Vec<[usize; 2]>,
    pub cases: Vec<CaseOutcome>,
    /// Smallest verified code over all cases.
    pub best: Option<CodeCandidate>,
    pub elapsed: Duration,
}

fn keep_smaller(best: &mut Option<CodeCandidate>, code: CodeCandidate) {
    if best.as_ref().map_or(true, |b| (code.size(), &code) < (b.size(), b)) {
        *best = Some(code);
    }
}

/// Anneals one case and verifies every restart's decoded code.
fn anneal_case(g: &Graph, case: &cnf::Case, opts: &AnnealOptions, index: u64) -> Result<CaseOutcome> {
    let mut outcome = CaseOutcome {
        chosen: case.chosen.clone(),
        spins: 0,
        qubits: None,
        best_energy: None,
        verified: 0,
        best_code: None,
    };
    if case.formula.clauses().is_empty() {
        let assumed: Vec<usize> = case.formula.assumptions().iter().copied().collect();
        let code = CodeCandidate::from_vertices(g.vertex_count(), &assumed);
        if is_identifying(g, &code)?.is_ok() {
            outcome.verified = 1;
            outcome.best_code = Some(code);
        }
        return Ok(outcome);
    }
    let logical = compile(&case.formula, opts.lambda, opts.sharing)?;
    outcome.spins = logical.var_count();
    let seed = opts.seed.wrapping_add(index);
    let states: Vec<(f64, SpinState)> = match opts.embed {
        None => simulated_annealing(&logical, &opts.schedule, opts.restarts, seed).restarts,
        Some(shape) => {
            let hw = chimera(shape.rows, shape.cols, shape.shore, &[])?;
            let e = heuristic_embed(&hw, &logical, seed, &opts.embed_options)?;
            outcome.qubits = Some(e.qubits_used());
            let physical = embed_model(&logical, &e, &hw, None)?;
            let run = simulated_annealing(&physical, &opts.schedule, opts.restarts, seed);
            run.restarts
                .into_iter()
                .map(|(_, s)| {
                    let s = unembed(&physical, &s, &e)?;
                    Ok((ising::energy(&logical, &s)?, s))
                })
                .collect::<Result<_>>()?
        }
    };
    outcome.best_energy = states.iter().map(|(e, _)| *e).reduce(f64::min);
    for (_, s) in &states {
        let (_, code) = decode(&logical, s)?;
        if is_identifying(g, &code)?.is_ok() {
            outcome.verified += 1;
            keep_smaller(&mut outcome.best_code, code);
        }
    }
    Ok(outcome)
}

/// Formula, case split, Ising compilation, annealing (through an embedding
/// if asked), decoding and verification. Only verified codes are kept.
pub fn anneal_solve(g: &Graph, opts: &AnnealOptions) -> Result<AnnealOutcome> {
    let started = Instant::now();
    let formula = cnf::simplify(&cnf::build_formula(g)?);
    let pivots = match &opts.pivots {
        Some(p) => p.clone(),
        None => ising::hardware_pivots(&formula, opts.sharing)?,
    };
    let split = cnf::case_split(&formula, &pivots)?;
    let mut cases = Vec::with_capacity(split.cases.len());
    let mut best = None;
    for (i, case) in split.cases.iter().enumerate() {
        let outcome = anneal_case(g, case, opts, i as u64)?;
        if let Some(code) = &outcome.best_code {
            keep_smaller(&mut best, code.clone());
        }
        cases.push(outcome);
    }
    Ok(AnnealOutcome {
        pivots,
        cases,
        best,
        elapsed: started.elapsed(),
    })
}

/// The formula a single case of the split works on; `case` counts from 1.
pub fn case_formula(g: &Graph, pivots: Option<&[[usize; 2]]>, case: usize) -> Result<Cnf> {
    let formula = cnf::simplify(&cnf::build_formula(g)?);
    let pivots = match pivots {
        Some(p) => p.to_vec(),
        None => ising::hardware_pivots(&formula, AncillaSharing::Shared)?,
    };
    let mut split = cnf::case_split(&formula, &pivots)?;
    if case == 0 || case > split.cases.len() {
        return Err(Error::InvalidArgument(format!(
            "case {case} out of range 1..={}",
            split.cases.len()
        )));
    }
    Ok(split.cases.swap_remove(case - 1).formula)
}

/// One cell of the minimum-code table.
#[derive(Clone, Debug, Serialize)]
pub struct TableCell {
    pub d: usize,
    pub n: usize,
    pub min_size: Option<usize>,
    pub proven: bool,
    pub elapsed_secs: f64,
}

impl TableCell {
    /// Proven values plain, unproven ones in parentheses, `-` if none found.
    pub fn display_value(&self) -> String {
        match (self.min_size, self.proven) {
            (Some(k), true) => k.to_string(),
            (Some(k), false) => format!("({k})"),
            (None, _) => "-".to_string(),
        }
    }
}

/// Exact search on `B(d,n)` within `budget`.
pub fn solve_cell(params: DeBruijnParams, budget: Option<Duration>, workers: usize) -> Result<TableCell> {
    let g = debruijn(params)?;
    let cfg = BnbConfig {
        time_limit: budget,
        workers,
        ..BnbConfig::default()
    };
    let res = solve_with_case_split(&g, &cfg)?;
    Ok(TableCell {
        d: params.d,
        n: params.n,
        min_size: res.min_size,
        proven: res.proven_minimum && res.min_size.is_some(),
        elapsed_secs: res.elapsed.as_secs_f64(),
    })
}

/// Grid with one row per `d` and one column per `n`, then runtimes.
pub fn table_text(cells: &[TableCell]) -> String {
    if cells.is_empty() {
        return String::new();
    }
    let mut ds: Vec<usize> = cells.iter().map(|c| c.d).collect();
    let mut ns: Vec<usize> = cells.iter().map(|c| c.n).collect();
    ds.sort_unstable();
    ds.dedup();
    ns.sort_unstable();
    ns.dedup();
    let find = |d: usize, n: usize| cells.iter().find(|c| c.d == d && c.n == n);
    let mut out = String::new();
    let header: String = ns.iter().map(|n| format!("{:>8}", format!("n={n}"))).collect();
    let _ = writeln!(out, "{:>5}{header}", "");
    for &d in &ds {
        let row: String = ns
            .iter()
            .map(|&n| format!("{:>8}", find(d, n).map_or(String::new(), TableCell::display_value)))
            .collect();
        let _ = writeln!(out, "{:>5}{row}", format!("d={d}"));
    }
    let _ = writeln!(out, "\nseconds");
    for &d in &ds {
        let row: String = ns
            .iter()
            .map(|&n| format!("{:>8}", find(d, n).map_or(String::new(), |c| format!("{:.2}", c.elapsed_secs))))
            .collect();
        let _ = writeln!(out, "{:>5}{row}", format!("d={d}"));
    }
    out
}

pub fn table_csv(cells: &[TableCell]) -> String {
    let mut out = String::from("d,n,min_size,proven,elapsed_secs,display\n");
    for c in cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.6},{}",
            c.d,
            c.n,
            c.min_size.map_or(String::new(), |k| k.to_string()),
            c.proven,
            c.elapsed_secs,
            c.display_value()
        );
    }
    out
}
