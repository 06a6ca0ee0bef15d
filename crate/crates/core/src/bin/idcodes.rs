use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;

use idcodes::altmodels::{build_ip, to_lp};
use idcodes::chimera::{
    chimera, checkerboard_gauge, embed_model, gauge_transform, heuristic_embed, write_embedding, ChimeraGraph,
    EmbedOptions, Gauge,
};
use idcodes::cnf::{self, to_dimacs, to_smtlib};
use idcodes::exact::{solve_with_case_split, BnbConfig};
use idcodes::graph::{debruijn, read_graph, DeBruijnParams, Graph};
use idcodes::idcode::{min_code_bruteforce, BruteForceOptions, CodeCandidate};
use idcodes::ising::{compile, energy, read_model, restart_rng, write_model, AncillaSharing, LambdaMode, Schedule};
use idcodes::report::{
    anneal_solve, case_formula, solve_cell, table_csv, table_text, AnnealOptions, ChimeraShape, Method, RunReport,
};
use idcodes::Error;

#[derive(Parser)]
#[command(name = "idcodes", version, about = "Minimum identifying codes on graphs")]
struct Cli {
    /// Seed for every randomised step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for every pool.
    #[arg(long, global = true, env = "IDCODE_WORKERS")]
    workers: Option<usize>,
    /// Wall-clock budget per solve or table cell.
    #[arg(long, global = true)]
    budget_secs: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Output::Text)]
    output: Output,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Find a minimum identifying code.
    Solve(SolveArgs),
    /// Minimum code sizes on de Bruijn graphs; unproven cells in parentheses.
    Table(TableArgs),
    /// Write the problem as DIMACS, SMT-LIB, Ising or LP text.
    Encode(EncodeArgs),
    /// Embed an Ising model into a Chimera graph.
    Embed(EmbedArgs),
    /// Apply a gauge to a physical Ising model.
    Gauge(GaugeArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct GraphSource {
    /// De Bruijn graph B(d,n).
    #[arg(long, num_args = 2, value_names = ["D", "N"])]
    debruijn: Option<Vec<usize>>,
    /// Graph JSON file.
    #[arg(long)]
    graph: Option<PathBuf>,
}

impl GraphSource {
    fn load(&self) -> idcodes::Result<(String, Graph)> {
        match (&self.debruijn, &self.graph) {
            (Some(dn), _) => {
                let p = DeBruijnParams::new(dn[0], dn[1])?;
                Ok((p.to_string(), debruijn(p)?))
            }
            (None, Some(path)) => Ok((path.display().to_string(), read_graph(path)?)),
            (None, None) => Err(Error::InvalidArgument("no graph given".into())),
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    source: GraphSource,
    #[arg(long, default_value = "bnb", value_parser = ["brute", "bnb", "anneal-ising"])]
    method: String,
    /// List every minimum code.
    #[arg(long)]
    find_all: bool,
    /// Annealing restarts per case.
    #[arg(long, default_value_t = 1000)]
    restarts: usize,
    /// Sweeps per annealing restart.
    #[arg(long, default_value_t = 1000)]
    sweeps: usize,
    /// Anneal through an embedding into Chimera `rows,cols,shore`.
    #[arg(long)]
    embed: Option<String>,
    /// Split pivots as `a:b,c:d`.
    #[arg(long)]
    pivots: Option<String>,
    /// Compare an annealing result with the exact optimum.
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct TableArgs {
    /// Cells as `d,n`.
    cells: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dimacs,
    Smtlib,
    Ising,
    Lp,
}

#[derive(Args)]
struct EncodeArgs {
    #[command(flatten)]
    source: GraphSource,
    #[arg(long, value_enum)]
    format: Format,
    /// Target code size for SMT-LIB.
    #[arg(long)]
    size: Option<usize>,
    /// Emit one case of the split, counting from 1.
    #[arg(long)]
    case: Option<usize>,
    /// Split pivots as `a:b,c:d`.
    #[arg(long)]
    pivots: Option<String>,
    /// Give every clause its own ancillas.
    #[arg(long)]
    fresh_ancillas: bool,
    /// Fixed penalty weight instead of the automatic one.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HardwareArgs {
    /// Chimera grid as `rows,cols,shore`.
    #[arg(long, default_value = "8,8,4")]
    chimera: String,
    /// File of faulty qubit ids, whitespace or comma separated.
    #[arg(long)]
    faults: Option<PathBuf>,
}

impl HardwareArgs {
    fn build(&self, grid: Option<usize>) -> idcodes::Result<ChimeraGraph> {
        let shape: ChimeraShape = self.chimera.parse()?;
        let faulty = match &self.faults {
            Some(path) => std::fs::read_to_string(path)?
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<usize>().map_err(|_| Error::InvalidArgument(format!("bad qubit id {t:?}"))))
                .collect::<idcodes::Result<Vec<usize>>>()?,
            None => Vec::new(),
        };
        let r = grid.unwrap_or(shape.rows);
        let c = grid.unwrap_or(shape.cols);
        chimera(r, c, shape.shore, &faulty)
    }
}

#[derive(Args)]
struct EmbedArgs {
    /// Ising model text file.
    model: PathBuf,
    #[command(flatten)]
    hardware: HardwareArgs,
    #[arg(long, default_value_t = 16)]
    tries: usize,
    /// Grow a square grid through 8, 12, 16, 24, 32 until an embedding is found.
    #[arg(long)]
    scan: bool,
    /// Ferromagnetic chain coupling magnitude.
    #[arg(long)]
    chain_strength: Option<f64>,
    /// Embedding JSON output.
    #[arg(long)]
    out_embedding: Option<PathBuf>,
    /// Physical model output.
    #[arg(long)]
    out_model: Option<PathBuf>,
}

#[derive(Args)]
struct GaugeArgs {
    /// Physical Ising model text file.
    model: PathBuf,
    #[command(flatten)]
    hardware: HardwareArgs,
    #[arg(long, group = "which")]
    checkerboard: bool,
    /// Gauge JSON `{"signs": [..]}`.
    #[arg(long, group = "which")]
    gauge: Option<PathBuf>,
    /// Random gauge from the seed.
    #[arg(long, group = "which")]
    random: bool,
    /// Compare energies of 1000 random states under the spin map.
    #[arg(long)]
    verify: bool,
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

/// Failure with a process exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Twins(..) | Error::Unsatisfiable => 3,
            Error::EmbeddingFailed(_) => 4,
            Error::Io(_) | Error::Json(_) | Error::Parse { .. } => 1,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

fn parse_pivots(text: &str) -> Result<Vec<[usize; 2]>, Failure> {
    text.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (a, b) = p.split_once(':').ok_or_else(|| fail(2, format!("bad pivot {p:?}, want a:b")))?;
            let a = a.trim().parse().map_err(|_| fail(2, format!("bad pivot {p:?}")))?;
            let b = b.trim().parse().map_err(|_| fail(2, format!("bad pivot {p:?}")))?;
            Ok([a, b])
        })
        .collect()
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::from(Error::from(e))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn render(report: &RunReport, output: Output) -> Result<String, Failure> {
    Ok(match output {
        Output::Json => report.to_json()? + "\n",
        Output::Csv => report.to_csv(),
        Output::Text => report.to_text(),
    })
}

fn codes_of(codes: &[CodeCandidate]) -> Vec<Vec<usize>> {
    codes.iter().map(CodeCandidate::vertices).collect()
}

fn solve(cli: &Cli, args: &SolveArgs, workers: usize) -> Result<(), Failure> {
    let (name, g) = args.source.load()?;
    let method: Method = args.method.parse()?;
    let budget = cli.budget_secs.map(Duration::from_secs_f64);
    let started = Instant::now();
    let mut params = BTreeMap::from([
        ("seed".to_string(), cli.seed.to_string()),
        ("workers".to_string(), workers.to_string()),
    ]);
    if let Some(b) = cli.budget_secs {
        params.insert("budget_secs".into(), b.to_string());
    }
    let exact = |find_all: bool| -> Result<(Option<usize>, bool, Vec<CodeCandidate>), Failure> {
        let cfg = BnbConfig {
            enumerate_all: find_all,
            time_limit: budget,
            workers,
            ..BnbConfig::default()
        };
        let r = solve_with_case_split(&g, &cfg)?;
        Ok((r.min_size, r.proven_minimum, r.codes))
    };
    let mut report = RunReport {
        method,
        graph: name,
        vertices: g.vertex_count(),
        min_size: None,
        proven: false,
        codes: None,
        elapsed_secs: 0.0,
        params,
        matches_optimum: None,
    };
    match method {
        Method::Brute => {
            let opts = BruteForceOptions {
                workers,
                find_all: args.find_all,
                time_limit: budget,
                ..BruteForceOptions::default()
            };
            let r = min_code_bruteforce(&g, &opts)?;
            report.min_size = r.min_size;
            report.proven = r.proven_minimum && r.min_size.is_some();
            report.codes = Some(codes_of(&r.codes));
        }
        Method::Bnb => {
            let (size, proven, codes) = exact(args.find_all)?;
            report.min_size = size;
            report.proven = proven && size.is_some();
            report.codes = Some(codes_of(&codes));
        }
        Method::AnnealIsing => {
            let opts = AnnealOptions {
                restarts: args.restarts,
                schedule: Schedule {
                    sweeps: args.sweeps,
                    ..Schedule::default()
                },
                seed: cli.seed,
                pivots: args.pivots.as_deref().map(parse_pivots).transpose()?,
                embed: args.embed.as_deref().map(str::parse).transpose()?,
                ..AnnealOptions::default()
            };
            report.params.insert("restarts".into(), args.restarts.to_string());
            report.params.insert("sweeps".into(), args.sweeps.to_string());
            let out = anneal_solve(&g, &opts)?;
            report.params.insert("pivots".into(), format!("{:?}", out.pivots));
            report.min_size = out.best.as_ref().map(CodeCandidate::size);
            report.codes = Some(out.best.iter().map(CodeCandidate::vertices).collect());
            if args.check {
                let (size, proven, _) = exact(false)?;
                report.proven = proven && size.is_some() && size == report.min_size;
                report.matches_optimum = Some(proven && size.is_some() && size == report.min_size);
            }
        }
    }
    report.elapsed_secs = started.elapsed().as_secs_f64();
    print!("{}", render(&report, cli.output)?);
    if report.min_size.is_none() || (method != Method::AnnealIsing && !report.proven) {
        return Err(fail(4, "budget exhausted before a proven minimum"));
    }
    Ok(())
}

fn table(cli: &Cli, args: &TableArgs, workers: usize) -> Result<(), Failure> {
    let budget = cli.budget_secs.map(Duration::from_secs_f64);
    let mut cells = Vec::with_capacity(args.cells.len());
    for spec in &args.cells {
        let (d, n) = spec
            .split_once(',')
            .and_then(|(d, n)| Some((d.trim().parse().ok()?, n.trim().parse().ok()?)))
            .ok_or_else(|| fail(2, format!("bad cell {spec:?}, want d,n")))?;
        cells.push(solve_cell(DeBruijnParams::new(d, n)?, budget, workers)?);
    }
    let text = match cli.output {
        Output::Json => serde_json::to_string_pretty(&cells).map_err(Error::from)? + "\n",
        Output::Csv => table_csv(&cells),
        Output::Text => table_text(&cells),
    };
    print!("{text}");
    Ok(())
}

fn encode(args: &EncodeArgs) -> Result<(), Failure> {
    let (_, g) = args.source.load()?;
    let pivots = args.pivots.as_deref().map(parse_pivots).transpose()?;
    let formula = match args.case {
        Some(case) => case_formula(&g, pivots.as_deref(), case)?,
        None => cnf::simplify(&cnf::build_formula(&g)?),
    };
    let text = match args.format {
        Format::Dimacs => to_dimacs(&formula),
        Format::Smtlib => {
            let k = args.size.ok_or_else(|| fail(2, "--size is required for smtlib"))?;
            to_smtlib(&formula, k, &[])
        }
        Format::Ising => {
            let lambda = args.lambda.map_or(LambdaMode::Auto, LambdaMode::Fixed);
            let sharing = if args.fresh_ancillas {
                AncillaSharing::Fresh
            } else {
                AncillaSharing::Shared
            };
            compile(&formula, lambda, sharing)?.to_text()
        }
        Format::Lp => {
            if args.case.is_some() {
                return Err(fail(2, "--case does not apply to lp"));
            }
            to_lp(&build_ip(&g))
        }
    };
    emit(&text, args.out.as_deref())
}

const SCAN_GRIDS: [usize; 5] = [8, 12, 16, 24, 32];

fn embed(cli: &Cli, args: &EmbedArgs) -> Result<(), Failure> {
    let logical = read_model(&args.model)?;
    let opts = EmbedOptions {
        tries: args.tries,
        ..EmbedOptions::default()
    };
    let grids: Vec<Option<usize>> = if args.scan {
        SCAN_GRIDS.iter().map(|&g| Some(g)).collect()
    } else {
        vec![None]
    };
    for grid in grids {
        let hw = args.hardware.build(grid)?;
        let started = Instant::now();
        match heuristic_embed(&hw, &logical, cli.seed, &opts) {
            Ok(e) => {
                let physical = embed_model(&logical, &e, &hw, args.chain_strength)?;
                if let Some(path) = &args.out_embedding {
                    write_embedding(&e, path)?;
                }
                if let Some(path) = &args.out_model {
                    write_model(&physical, path)?;
                }
                let summary = serde_json::json!({
                    "rows": hw.rows(),
                    "cols": hw.cols(),
                    "shore": hw.shore(),
                    "logical": logical.var_count(),
                    "qubits": e.qubits_used(),
                    "max_chain": e.max_chain_length(),
                    "elapsed_secs": started.elapsed().as_secs_f64(),
                });
                match cli.output {
                    Output::Json => println!("{summary}"),
                    Output::Csv => println!(
                        "rows,cols,shore,logical,qubits,max_chain\n{},{},{},{},{},{}",
                        hw.rows(),
                        hw.cols(),
                        hw.shore(),
                        logical.var_count(),
                        e.qubits_used(),
                        e.max_chain_length()
                    ),
                    Output::Text => println!(
                        "embedded {} variables into C({},{},{}): {} qubits, max chain {}",
                        logical.var_count(),
                        hw.rows(),
                        hw.cols(),
                        hw.shore(),
                        e.qubits_used(),
                        e.max_chain_length()
                    ),
                }
                return Ok(());
            }
            Err(Error::EmbeddingFailed(_)) if args.scan => {
                eprintln!("no embedding into C({},{},{})", hw.rows(), hw.cols(), hw.shore());
            }
            Err(e) => return Err(e.into()),
        }
    }
    Err(fail(4, "no embedding found at the largest grid"))
}

/// Trials for `gauge --verify`.
const GAUGE_CHECKS: usize = 1000;

fn gauge(cli: &Cli, args: &GaugeArgs) -> Result<(), Failure> {
    let model = read_model(&args.model)?;
    let g = if args.checkerboard {
        let hw = args.hardware.build(None)?;
        if hw.qubit_count() != model.var_count() {
            return Err(fail(
                2,
                format!("model has {} spins, hardware {} qubits", model.var_count(), hw.qubit_count()),
            ));
        }
        checkerboard_gauge(&hw)
    } else if let Some(path) = &args.gauge {
        Gauge::from_json(&std::fs::read_to_string(path).map_err(Error::from)?)?
    } else if args.random {
        Gauge::random(model.var_count(), cli.seed)
    } else {
        return Err(fail(2, "choose --checkerboard, --gauge FILE or --random"));
    };
    let out = gauge_transform(&model, &g)?;
    if args.verify {
        let mut rng = restart_rng(cli.seed, 1);
        for _ in 0..GAUGE_CHECKS {
            let s: Vec<i8> = (0..model.var_count()).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
            let (a, b) = (energy(&model, &s)?, energy(&out, &g.apply(&s)?)?);
            if (a - b).abs() > 1e-9 * (1.0 + a.abs()) {
                return Err(fail(1, format!("energy mismatch: {a} vs {b}")));
            }
        }
        eprintln!("verified {GAUGE_CHECKS} random states");
    }
    emit(&out.to_text(), args.out.as_deref())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let workers = cli.workers.unwrap_or_else(rayon::current_num_threads).max(1);
    if let Some(b) = cli.budget_secs {
        if !(b.is_finite() && b > 0.0) {
            return Err(fail(2, format!("budget must be positive, got {b}")));
        }
    }
    // The global pool backs annealing and embedding tries.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
    match &cli.command {
        Command::Solve(a) => solve(cli, a, workers),
        Command::Table(a) => table(cli, a, workers),
        Command::Encode(a) => encode(a),
        Command::Embed(a) => embed(cli, a),
        Command::Gauge(a) => gauge(cli, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
