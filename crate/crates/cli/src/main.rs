use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use cplifs::config::load_system;
use cplifs::export::fmt_num;
use cplifs::ifs::generated_self_similar;
use cplifs::lab::{
    continuity_sweep, example_5_1_with, lebesgue_csv, lebesgue_positivity_experiment, sweep_csv, LabSettings, PerturbMode,
    PerturbationSpec,
};
use cplifs::markov::{parse_edge_csv, verify_edges, DiagramCaps, MarkovModel};
use cplifs::orbit::{exact_overlap_search_with, orbit_graph_of, periodic_flags, OrbitCaps, OverlapOptions};
use cplifs::pressure::{
    box_counting_dimension, linspace, moran_result, natural_dimension_direct_with, pressure_curve, DimensionResult,
};
use cplifs::{systems, Budget, Cplifs, Error, Exec};

const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (system format 1, csv format 1)");

#[derive(Parser, Debug)]
#[command(name = "cplifs", version = VERSION, about = "Natural dimension of continuous piecewise-linear IFS")]
struct Cli {
    /// Worker threads (1 runs sequentially).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write data here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Cap on enumerated cylinder terms per call.
    #[arg(long, global = true, default_value_t = Budget::DEFAULT_TERMS)]
    max_terms: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Dot,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum DimMethod {
    Direct,
    Markov,
    Boxcount,
    Moran,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Export {
    Dot,
    Csv,
}

#[derive(Args, Debug)]
struct SystemArg {
    /// System JSON file, or `@name` for a built-in reference system.
    system: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the parameter constraints of a system.
    Validate(SystemArg),
    /// Natural dimension estimate.
    Dim {
        #[command(flatten)]
        sys: SystemArg,
        #[arg(long, value_enum, default_value = "markov")]
        method: DimMethod,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Cylinder depth for the direct and box-counting methods.
        #[arg(long, short, default_value_t = 12)]
        n: usize,
        /// Diagram level cap for the markov method.
        #[arg(long, short, default_value_t = 20)]
        r: usize,
    },
    /// Finite-depth pressure on a grid of s values.
    Pressure {
        #[command(flatten)]
        sys: SystemArg,
        /// `a:b:steps`.
        #[arg(long, default_value = "0:1:11")]
        s_grid: String,
        #[arg(long, short, default_value_t = 12)]
        n: usize,
    },
    /// Markov diagram of the monotonicity partition.
    Diagram {
        #[command(flatten)]
        sys: SystemArg,
        #[arg(long, value_enum, default_value = "csv")]
        export: Export,
        #[arg(long, default_value_t = 20)]
        max_level: usize,
        #[arg(long, default_value_t = 10_000)]
        max_nodes: usize,
        /// Re-check every edge of a previously exported CSV.
        #[arg(long)]
        verify: Option<PathBuf>,
    },
    /// Orbit graph of the partition endpoints.
    Orbit {
        #[command(flatten)]
        sys: SystemArg,
        #[arg(long, default_value_t = 12)]
        depth: usize,
    },
    /// Exact-overlap search in the generated self-similar system.
    Overlap {
        #[command(flatten)]
        sys: SystemArg,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        /// Confirm candidates in rational arithmetic.
        #[arg(long)]
        exact_rational: bool,
    },
    /// Minimum distance between distinct compositions per depth.
    Esc {
        #[command(flatten)]
        sys: SystemArg,
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
    /// Dimension gap under random perturbations.
    Sweep {
        #[command(flatten)]
        sys: SystemArg,
        /// Comma-separated perturbation sizes.
        #[arg(long, value_delimiter = ',', default_value = "1e-3,1e-5")]
        deltas: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Parameter families to perturb.
        #[arg(long, value_delimiter = ',', default_value = "translations")]
        mode: Vec<String>,
        /// Shift the offsets of these maps (1-based) by exactly delta instead.
        #[arg(long, value_delimiter = ',')]
        offset_maps: Option<Vec<usize>>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, short, default_value_t = 12)]
        n: usize,
        #[arg(long, short, default_value_t = 20)]
        r: usize,
    },
    /// Worked example with a persistent dimension gap.
    Example51 {
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        #[arg(long, default_value_t = 12)]
        nmax: usize,
    },
    /// Covered-length experiment on perturbed systems.
    Lebesgue {
        #[command(flatten)]
        sys: SystemArg,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Data produced by a command plus whether it stopped at a cap.
struct Output {
    data: String,
    truncated: bool,
}

impl Output {
    fn done(data: String) -> Self {
        Output { data, truncated: false }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Invalid(_) | Error::Config(_) | Error::InvalidArgument(_) | Error::TypeMismatch { .. } | Error::EmptyList) => 2,
        Some(Error::BudgetExceeded { .. }) => 3,
        Some(_) => 4,
        None => 2,
    }
}

fn load(spec: &str) -> anyhow::Result<Cplifs> {
    if let Some(name) = spec.strip_prefix('@') {
        return systems::by_name(name).ok_or_else(|| anyhow!(Error::Config(format!("unknown built-in system {name:?}"))));
    }
    Ok(load_system(Path::new(spec))?)
}

fn parse_grid(text: &str) -> anyhow::Result<Vec<f64>> {
    let bad = || anyhow!(Error::InvalidArgument(format!("s-grid must be a:b:steps, got {text:?}")));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].parse().map_err(|_| bad())?;
    let b: f64 = parts[1].parse().map_err(|_| bad())?;
    let steps: usize = parts[2].parse().map_err(|_| bad())?;
    if steps == 0 || !(a.is_finite() && b.is_finite()) || a < 0.0 || b < a {
        return Err(bad());
    }
    Ok(linspace(a, b, steps))
}

/// Largest depth `d <= n` whose enumeration fits the budget.
fn feasible_depth(width: usize, n: usize, budget: &Budget) -> usize {
    (0..=n).rev().find(|&d| budget.check(width, d).is_ok()).unwrap_or(0)
}

fn dimension_output(r: &DimensionResult, format: Format) -> Output {
    let data = match format {
        Format::Csv => format!("{}\n{}\n", DimensionResult::CSV_HEADER, r.csv_row()),
        _ => format!("{}\n", fmt_num(r.value)),
    };
    Output { data, truncated: r.lower_bound }
}

fn run(cli: &Cli) -> anyhow::Result<Output> {
    let exec = match cli.threads {
        Some(1) => Exec::Sequential,
        _ => Exec::default(),
    };
    let budget = Budget::new(cli.max_terms).with_exec(exec);
    let format = cli.format;
    match &cli.command {
        Command::Validate(sys) => {
            let f = load(&sys.system)?;
            let i = f.support()?;
            Ok(Output::done(format!("ok: {} maps, breakpoints per map {:?}, supporting interval {}\n", f.len(), f.type_vector(), i)))
        }
        Command::Dim { sys, method, tol, n, r } => {
            let f = load(&sys.system)?;
            let format = format.unwrap_or(Format::Text);
            match method {
                DimMethod::Markov => {
                    let model = MarkovModel::build_with(&f, &[], DiagramCaps { max_level: *r, ..Default::default() }, exec)?;
                    Ok(dimension_output(&model.dimension(*tol)?, format))
                }
                DimMethod::Direct | DimMethod::Boxcount => {
                    let d = feasible_depth(f.len(), *n, &budget);
                    let res = if *method == DimMethod::Direct {
                        natural_dimension_direct_with(&f, d, *tol, &budget)?
                    } else {
                        // Grid scales down to roughly the typical cylinder length.
                        let k_max = ((d as f64) * (1.0 / f.rho_max()).log2()).floor().max(3.0) as i32;
                        let exponents: Vec<i32> = (1..=k_max).collect();
                        box_counting_dimension(&f, d, 2.0, &exponents, &budget)?
                    };
                    let mut out = dimension_output(&res, format);
                    out.truncated |= d < *n;
                    Ok(out)
                }
                DimMethod::Moran => {
                    if f.type_vector().iter().any(|&b| b > 0) {
                        bail!(Error::InvalidArgument("moran needs maps without breakpoints".into()));
                    }
                    let ratios: Vec<f64> = f.maps().iter().map(|m| m.slopes()[0].abs()).collect();
                    Ok(dimension_output(&moran_result(&ratios)?, format))
                }
            }
        }
        Command::Pressure { sys, s_grid, n } => {
            let f = load(&sys.system)?;
            let grid = parse_grid(s_grid)?;
            let d = feasible_depth(f.len(), *n, &budget);
            let curve = pressure_curve(&f, &grid, d, &budget)?;
            Ok(Output { data: curve.to_csv(), truncated: d < *n })
        }
        Command::Diagram { sys, export, max_level, max_nodes, verify } => {
            let f = load(&sys.system)?;
            let caps = DiagramCaps { max_level: *max_level, max_nodes: *max_nodes };
            let model = MarkovModel::build_with(&f, &[], caps, exec)?;
            if let Some(path) = verify {
                let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                let rows = parse_edge_csv(&text)?;
                let problems = verify_edges(&model.dynamics, &model.partition, &rows);
                for p in &problems {
                    eprintln!("{p}");
                }
                let data = format!("edges checked: {}\nviolations: {}\n", rows.len(), problems.len());
                if !problems.is_empty() {
                    print!("{data}");
                    bail!(Error::NoConvergence(format!("{} edge(s) not reproduced", problems.len())));
                }
                return Ok(Output::done(data));
            }
            let export = match format {
                Some(Format::Dot) => Export::Dot,
                Some(Format::Csv) => Export::Csv,
                _ => *export,
            };
            let data = match export {
                Export::Dot => model.diagram.to_dot(),
                Export::Csv => model.diagram.to_csv(),
            };
            Ok(Output { data, truncated: !model.diagram.closed() })
        }
        Command::Orbit { sys, depth } => {
            let f = load(&sys.system)?;
            let model = MarkovModel::build_with(&f, &[], DiagramCaps { max_level: 0, max_nodes: 1 }, exec)?;
            let g = orbit_graph_of(&model.dynamics, &model.partition, OrbitCaps { depth: *depth, ..Default::default() });
            let data = match format.unwrap_or(Format::Csv) {
                Format::Dot => g.to_dot(),
                Format::Csv => g.to_csv(),
                Format::Text => {
                    let mut t = format!("nodes: {}\nedges: {}\n", g.nodes.len(), g.edges.len());
                    let flags = periodic_flags(&f, &model.dynamics, &g, *depth);
                    if flags.is_empty() {
                        t.push_str("periodic breakpoint images: none\n");
                    }
                    for p in flags {
                        let _ = writeln!(t, "periodic breakpoint image {} (map {}, breakpoint {}), period {}", fmt_num(p.value), p.branch.map + 1, p.branch.piece + 1, p.period);
                    }
                    t
                }
            };
            Ok(Output { data, truncated: g.truncated })
        }
        Command::Overlap { sys, depth, exact_rational } => {
            let f = load(&sys.system)?;
            let s = generated_self_similar(&f);
            let d = feasible_depth(s.len(), *depth, &budget);
            let opts = OverlapOptions { exact: *exact_rational, budget, ..Default::default() };
            let report = exact_overlap_search_with(&s, d, &opts)?;
            let data = match format.unwrap_or(Format::Csv) {
                Format::Text => match report.first_overlap_depth() {
                    Some(k) => format!("overlap at depth {k}: {} pair(s) reported\n", report.pairs.len()),
                    None => format!("no overlap up to depth {d}\n"),
                },
                _ => report.to_csv(),
            };
            Ok(Output { data, truncated: d < *depth })
        }
        Command::Esc { sys, depth } => {
            let f = load(&sys.system)?;
            let s = generated_self_similar(&f);
            let d = feasible_depth(s.len(), *depth, &budget);
            let opts = OverlapOptions { exact: false, budget, ..Default::default() };
            Ok(Output { data: exact_overlap_search_with(&s, d, &opts)?.esc_csv(), truncated: d < *depth })
        }
        Command::Sweep { sys, deltas, trials, seed, mode, offset_maps, tol, n, r } => {
            let f = load(&sys.system)?;
            let mode = match offset_maps {
                Some(maps) => PerturbMode::Offset { maps: maps.iter().map(|&k| k.saturating_sub(1)).collect() },
                None => {
                    let mut flags = (false, false, false);
                    for m in mode {
                        match m.as_str() {
                            "translations" => flags.0 = true,
                            "breakpoints" => flags.1 = true,
                            "slopes" => flags.2 = true,
                            other => bail!(Error::InvalidArgument(format!("unknown perturbation mode {other:?}"))),
                        }
                    }
                    PerturbMode::Uniform { translations: flags.0, breakpoints: flags.1, slopes: flags.2 }
                }
            };
            let spec = PerturbationSpec::new(0.0, mode, *seed, *trials);
            let settings = LabSettings {
                tol: *tol,
                depth: feasible_depth(f.len(), *n, &budget),
                caps: DiagramCaps { max_level: *r, ..Default::default() },
                budget,
                ..Default::default()
            };
            let (rows, skipped) = continuity_sweep(&f, deltas, &spec, &settings)?;
            if skipped > 0 {
                eprintln!("{skipped} trial(s) had no feasible perturbation and were skipped");
            }
            Ok(Output { data: sweep_csv(&rows), truncated: settings.depth < *n })
        }
        Command::Example51 { eps, nmax } => {
            let report = example_5_1_with(*eps, *nmax, &budget)?;
            Ok(Output::done(match format.unwrap_or(Format::Text) {
                Format::Csv => report.csv(),
                _ => report.text(),
            }))
        }
        Command::Lebesgue { sys, depth, delta, trials, seed } => {
            let f = load(&sys.system)?;
            budget.check(f.len(), depth + 4)?;
            let spec = PerturbationSpec::new(*delta, PerturbMode::translations(), *seed, *trials);
            let settings = LabSettings { budget, ..Default::default() };
            let settings = LabSettings { depth: feasible_depth(f.len(), settings.depth, &budget), ..settings };
            let rows = lebesgue_positivity_experiment(&f, &spec, *depth, &settings)?;
            Ok(Output::done(lebesgue_csv(&rows)))
        }
    }
}

fn emit(cli: &Cli, out: &Output) -> anyhow::Result<()> {
    let mut data = out.data.clone();
    if out.truncated {
        data.push_str("#truncated\n");
    }
    match &cli.output {
        Some(path) => fs::write(path, data).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{data}");
            Ok(())
        }
    }
}

fn init_threads(threads: Option<usize>) -> anyhow::Result<()> {
    let Some(n) = threads else { return Ok(()) };
    if n == 0 {
        bail!(Error::InvalidArgument("--threads must be at least 1".into()));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("starting worker pool")?;
    #[cfg(not(feature = "parallel"))]
    if n > 1 {
        eprintln!("built without the parallel feature; running sequentially");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads(cli.threads).and_then(|_| run(&cli)).and_then(|out| {
        emit(&cli, &out)?;
        Ok(out.truncated)
    });
    match result {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("stopped at a depth or size cap; output is partial");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
