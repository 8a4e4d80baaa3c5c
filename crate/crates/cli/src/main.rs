use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use localmrf::bench::{
    bound_curves, free_energy_sequence, run_experiment, sample_potentials, summarize, write_csv, CurveSpec,
    DecompFamily, ExperimentSpec, PotentialMode, Topology,
};
use localmrf::decomp::{db_dim_edge, db_dim_vertex, grid_decomp_layout, k_param, minor_e, minor_v, EdgeDecomposition};
use localmrf::exact::ExactConfig;
use localmrf::format::{read_graph, read_mrf, write_edge_decomposition, write_mrf, write_vertex_decomposition};
use localmrf::graph::Graph;
use localmrf::inference::{log_partition_bounds_with, mode_estimate_with, ComponentSolver};
use localmrf::lattice::GridLayout;
use localmrf::metric::{doubling_dimension_exact, DOUBLING_DEFAULT_CAP};
use localmrf::mrf::PairwiseMrf;
use localmrf::reduce::{factor_to_mwis, mwis_as_binary_mrf, read_factor_model};
use localmrf::saw::{build_saw_tree, msg_pass_mode, saw_max_ratio, saw_size_upper, Mark, SawConfig, TraceKind};

/// Certified local inference on pairwise Markov random fields.
#[derive(Parser)]
#[command(name = "localmrf", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decompose a graph and print the removed set and components.
    Decompose(DecomposeArgs),
    /// Exact log Z and/or MAP by enumeration, variable elimination or transfer matrix.
    Exact(ExactArgs),
    /// Certified bounds on log Z over decomposition trials.
    Logz(BoundArgs),
    /// MAP estimates with guaranteed gaps over decomposition trials.
    Map(BoundArgs),
    /// Self-avoiding walk tree and max-marginal ratio at a root.
    Saw(SawArgs),
    /// Factor model to maximum weight independent set, written as a binary MRF.
    Reduce(ReduceArgs),
    /// Run an experiment spec file.
    Experiment(ExperimentArgs),
    /// Free-energy sequence of a uniform grid model.
    Limit(LimitArgs),
    /// A-priori bound curves on the expected gap per node.
    Curves(CurvesArgs),
    /// Sample a shifted Ising model and write it in MRF text format.
    Gen(GenArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Alg {
    Dbdim,
    Minorv,
    Minore,
    Grid,
    None,
}

#[derive(Args)]
struct DecompOpts {
    /// Decomposition scheme.
    #[arg(long = "alg", visible_alias = "decomp", value_enum, default_value = "minore")]
    alg: Alg,
    /// Db-dim radius parameter.
    #[arg(long, default_value_t = 0.25)]
    eps: f64,
    /// Db-dim truncation level; derived from the exact doubling dimension when absent.
    #[arg(long = "K")]
    big_k: Option<usize>,
    /// Minor-exclusion rounds.
    #[arg(long, default_value_t = 3)]
    r: usize,
    /// Layer period.
    #[arg(long, default_value_t = 4)]
    lambda: usize,
    /// Slab width.
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Horizontal slab offset; random per trial when absent.
    #[arg(long)]
    l1: Option<usize>,
    /// Vertical slab offset; random per trial when absent.
    #[arg(long)]
    l2: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct DecomposeArgs {
    #[command(flatten)]
    d: DecompOpts,
    /// Graph or MRF file.
    #[arg(long)]
    graph: PathBuf,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Carve nodes rather than edges (dbdim only).
    #[arg(long)]
    vertex: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExactMode {
    Logz,
    Map,
    Both,
}

#[derive(Args)]
struct ExactArgs {
    #[arg(long, value_enum, default_value = "both")]
    mode: ExactMode,
    /// MRF file.
    #[arg(long)]
    graph: PathBuf,
    /// Use the row transfer matrix; the model must be a square grid or cris-cross.
    #[arg(long, conflicts_with = "elim")]
    transfer: bool,
    /// Use variable elimination along a min-fill order.
    #[arg(long)]
    elim: bool,
    #[arg(long, default_value_t = localmrf::exact::DEFAULT_MAX_STATES)]
    max_states: u128,
}

#[derive(Args)]
struct BoundArgs {
    #[command(flatten)]
    d: DecompOpts,
    /// MRF file.
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Skip the exact oracle.
    #[arg(long)]
    no_exact: bool,
    /// Solve components by sequential SAW conditioning (MAP only, binary models).
    #[arg(long)]
    saw: bool,
    #[arg(long, default_value_t = localmrf::exact::DEFAULT_MAX_STATES)]
    max_states: u128,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct SawArgs {
    /// Binary MRF file.
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    root: usize,
    /// Also run the distributed message-passing schedule.
    #[arg(long)]
    msgpass: bool,
    /// Write every emitted sequence to this file (implies --msgpass).
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct ReduceArgs {
    /// Factor model file.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    csv: PathBuf,
    /// Per-cell means, also printed to stdout.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct LimitArgs {
    /// Node table, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    phi: Vec<f64>,
    /// Edge table, row-major, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    psi: Vec<f64>,
    #[arg(long, default_value_t = 3)]
    nmin: usize,
    #[arg(long)]
    nmax: usize,
    /// Slab width for the decomposition bounds.
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Interaction,
    Field,
}

#[derive(Args)]
struct CurvesArgs {
    #[arg(long, default_value_t = 100)]
    side: usize,
    #[arg(long)]
    criscross: bool,
    #[arg(long, value_enum, default_value = "interaction")]
    mode: Mode,
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.4,0.6,0.8,1,1.2,1.4,1.6,1.8,2")]
    alpha: Vec<f64>,
    #[arg(long = "alg", value_enum, default_value = "minore")]
    alg: Alg,
    #[arg(long, default_value_t = 3)]
    r: usize,
    /// Layer periods, or Db-dim levels, or slab widths.
    #[arg(long, value_delimiter = ',', default_value = "3,4,5")]
    params: Vec<usize>,
    #[arg(long, default_value_t = 0.25)]
    eps: f64,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// `grid N`, `criscross N`, `linechords N K` or `random N P`.
    #[arg(long)]
    topology: String,
    #[arg(long, value_enum, default_value = "interaction")]
    mode: Mode,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn potential_mode(m: Mode) -> PotentialMode {
    match m {
        Mode::Interaction => PotentialMode::VaryingInteraction,
        Mode::Field => PotentialMode::VaryingField,
    }
}

fn gen(a: GenArgs) -> Result<()> {
    let topo: Topology = a.topology.parse()?;
    let graph = topo.graph(a.seed)?;
    let sample = sample_potentials(&graph, potential_mode(a.mode), a.alpha, a.seed);
    emit(a.out.as_deref(), &write_mrf(&sample.mrf))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn csv_out<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_csv(rows, f)?;
    Ok(())
}

fn db_k(d: &DecompOpts, graph: &Graph) -> Result<usize> {
    if let Some(k) = d.big_k {
        return Ok(k);
    }
    let rho =
        doubling_dimension_exact(graph, DOUBLING_DEFAULT_CAP).context("pass --K explicitly for graphs this large")?;
    Ok(k_param(d.eps, rho.max(1.0))?)
}

fn edge_decomp(d: &DecompOpts, graph: &Graph, seed: u64) -> Result<EdgeDecomposition> {
    Ok(match d.alg {
        Alg::Dbdim => db_dim_edge(graph, d.eps, db_k(d, graph)?, seed)?,
        Alg::Minore => minor_e(graph, d.r, d.lambda, seed)?,
        Alg::Minorv => bail!("minorv is a vertex decomposition; use minore for inference"),
        Alg::Grid => {
            let layout =
                GridLayout::detect_square(graph).context("grid decomposition needs a square grid or cris-cross")?;
            let mut r = localmrf::rng::main_stream(seed);
            let mut pick = |o: Option<usize>| o.unwrap_or_else(|| rand::Rng::gen_range(&mut r, 0..d.k.max(1)));
            let (l1, l2) = (pick(d.l1), pick(d.l2));
            grid_decomp_layout(&layout, d.k, l1, l2)?
        }
        Alg::None => EdgeDecomposition::none(graph),
    })
}

fn decompose(a: DecomposeArgs) -> Result<()> {
    let graph = read_graph(&read(&a.graph)?)?;
    let text = match a.d.alg {
        Alg::Dbdim if a.vertex => {
            write_vertex_decomposition(&graph, &db_dim_vertex(&graph, a.d.eps, db_k(&a.d, &graph)?, a.d.seed)?)
        }
        _ if a.vertex => bail!("--vertex applies to dbdim only; minorv is always a vertex decomposition"),
        Alg::Minorv => write_vertex_decomposition(&graph, &minor_v(&graph, a.d.r, a.d.lambda, a.d.seed)?),
        _ => write_edge_decomposition(&graph, &edge_decomp(&a.d, &graph, a.d.seed)?),
    };
    emit(a.out.as_deref(), &text)
}

fn fmt_assignment(x: &[usize]) -> String {
    x.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

fn exact(a: ExactArgs) -> Result<()> {
    let mrf = read_mrf(&read(&a.graph)?)?;
    let cfg = ExactConfig::with_max_states(a.max_states);
    if a.elim {
        let r = cfg.eliminate(&mrf)?;
        if matches!(a.mode, ExactMode::Logz | ExactMode::Both) {
            println!("log_z {}", localmrf::format::fmt_f64(r.log_z));
        }
        if matches!(a.mode, ExactMode::Map | ExactMode::Both) {
            println!("map_energy {}", localmrf::format::fmt_f64(r.map_energy));
            println!("map {}", fmt_assignment(&r.map_assignment));
        }
        return Ok(());
    }
    let layout = if a.transfer {
        Some(GridLayout::detect_square(mrf.graph()).context("--transfer needs a square grid or cris-cross model")?)
    } else {
        None
    };
    if matches!(a.mode, ExactMode::Logz | ExactMode::Both) {
        let z = match &layout {
            Some(l) => cfg.transfer_log_z(&mrf, l)?,
            None => cfg.log_z(&mrf)?,
        };
        println!("log_z {}", localmrf::format::fmt_f64(z));
    }
    if matches!(a.mode, ExactMode::Map | ExactMode::Both) {
        let (x, h) = match &layout {
            Some(l) => cfg.transfer_map(&mrf, l)?,
            None => cfg.map(&mrf)?,
        };
        println!("map_energy {}", localmrf::format::fmt_f64(h));
        println!("map {}", fmt_assignment(&x));
    }
    Ok(())
}

#[derive(Serialize)]
struct BoundRow {
    seed: u64,
    lb: Option<f64>,
    ub: Option<f64>,
    gap: f64,
    exact: Option<f64>,
    #[serde(rename = "H_hat")]
    h_hat: Option<f64>,
    #[serde(rename = "H_star")]
    h_star: Option<f64>,
}

fn exact_oracle(mrf: &PairwiseMrf, cfg: &ExactConfig) -> Option<(f64, f64)> {
    match GridLayout::detect_square(mrf.graph()) {
        Some(l) => Some((cfg.transfer_log_z(mrf, &l).ok()?, cfg.transfer_map(mrf, &l).ok()?.1)),
        None => cfg
            .solve(mrf)
            .or_else(|_| cfg.eliminate(mrf))
            .ok()
            .map(|s| (s.log_z, s.map_energy)),
    }
}

fn bounds(a: BoundArgs, want_map: bool) -> Result<()> {
    let mrf = read_mrf(&read(&a.graph)?)?;
    if !mrf.is_nonnegative() {
        eprintln!("note: tables have negative entries; bounds hold but relative guarantees need an affine shift");
    }
    let cfg = ExactConfig::with_max_states(a.max_states);
    let oracle = if a.no_exact { None } else { exact_oracle(&mrf, &cfg) };
    let solver = if a.saw {
        ComponentSolver::Saw(SawConfig::default())
    } else {
        ComponentSolver::Exact(cfg)
    };
    let mut rows = Vec::with_capacity(a.trials);
    for t in 0..a.trials as u64 {
        let seed = a.d.seed.wrapping_add(t);
        let d = edge_decomp(&a.d, mrf.graph(), seed)?;
        let b = if a.saw && want_map {
            None
        } else {
            Some(log_partition_bounds_with(&mrf, &d, &cfg)?)
        };
        let m = if want_map {
            Some(mode_estimate_with(&mrf, &d, &solver)?)
        } else {
            None
        };
        let gap = b
            .as_ref()
            .map(|b| b.gap)
            .or(m.as_ref().map(|m| m.guarantee_gap))
            .unwrap_or(0.0);
        let row = BoundRow {
            seed,
            lb: b.as_ref().map(|b| b.log_z_lb),
            ub: b.as_ref().map(|b| b.log_z_ub),
            gap,
            exact: oracle.map(|o| o.0),
            h_hat: m.as_ref().map(|m| m.energy),
            h_star: oracle.map(|o| o.1),
        };
        let show = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.6}"));
        if want_map {
            println!(
                "seed {seed}: H_hat {} gap {gap:.6} H_star {} removed {}",
                show(row.h_hat),
                show(row.h_star),
                d.removed_edges.len()
            );
        } else {
            println!(
                "seed {seed}: [{}, {}] gap {gap:.6} exact {} removed {}",
                show(row.lb),
                show(row.ub),
                show(row.exact),
                d.removed_edges.len()
            );
        }
        rows.push(row);
    }
    if let Some(p) = &a.csv {
        csv_out(p, &rows)?;
    }
    Ok(())
}

fn saw(a: SawArgs) -> Result<()> {
    let mrf = read_mrf(&read(&a.graph)?)?;
    if a.root >= mrf.n() {
        bail!("root {} out of range for {} nodes", a.root, mrf.n());
    }
    let cfg = SawConfig::default();
    let tree = build_saw_tree(&mrf, a.root, &cfg)?;
    let r = saw_max_ratio(&mrf, &tree);
    let g = mrf.graph();
    println!("tree_nodes {}", tree.len());
    println!(
        "green {} red {}",
        tree.count_marks(Mark::Green),
        tree.count_marks(Mark::Red)
    );
    println!("size_bound {}", saw_size_upper(g.n(), g.cyclomatic_number()));
    println!("log_ratio {}", localmrf::format::fmt_f64(r.log_ratio()));
    if a.msgpass || a.trace.is_some() {
        let out = msg_pass_mode(&mrf, &cfg, a.trace.is_some())?;
        let m = out.ratios[a.root];
        println!("msgpass_log_ratio {}", localmrf::format::fmt_f64(m.log_ratio()));
        println!("msgpass_agrees {}", m == r);
        println!("computation_sequences {}", out.computation_counts[a.root]);
        if let (Some(path), Some(trace)) = (&a.trace, out.trace) {
            let mut text = String::new();
            for ev in trace {
                let kind = match ev.kind {
                    TraceKind::Path => "path",
                    TraceKind::Computation => "computation",
                };
                text.push_str(&format!("{kind} {} {} [{}]", ev.from, ev.to, fmt_assignment(&ev.path)));
                if let Some([m0, m1]) = ev.message {
                    text.push_str(&format!(
                        " {} {}",
                        localmrf::format::fmt_f64(m0),
                        localmrf::format::fmt_f64(m1)
                    ));
                }
                text.push('\n');
            }
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    Ok(())
}

fn reduce(a: ReduceArgs) -> Result<()> {
    let model = read_factor_model(&read(&a.input)?)?;
    let inst = factor_to_mwis(&model)?;
    let mrf = mwis_as_binary_mrf(&inst.graph, &inst.weights)?;
    fs::write(&a.out, write_mrf(&mrf)).with_context(|| format!("writing {}", a.out.display()))?;
    println!(
        "mwis_nodes {} conflict_edges {} shift {}",
        inst.graph.n(),
        inst.graph.num_edges(),
        inst.c
    );
    Ok(())
}

fn experiment(a: ExperimentArgs) -> Result<()> {
    let spec = ExperimentSpec::parse(&read(&a.spec)?)?;
    let records = run_experiment(&spec)?;
    csv_out(&a.csv, &records)?;
    let cells = summarize(&records);
    let show = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.5}"));
    println!("alpha param trials gap/N err_lb err_ub err_map ok");
    for c in &cells {
        println!(
            "{} {} {} {:.5} {} {} {} {}",
            c.alpha,
            c.param,
            c.trials,
            c.mean_gap_per_node,
            show(c.mean_error_lb),
            show(c.mean_error_ub),
            show(c.mean_error_map),
            c.all_ok
        );
    }
    if let Some(p) = &a.summary {
        csv_out(p, &cells)?;
    }
    if !records.iter().all(|r| r.ok()) {
        bail!("some trials violated an invariant; see the CSV");
    }
    Ok(())
}

fn limit(a: LimitArgs) -> Result<()> {
    if a.nmin < 2 || a.nmax < a.nmin {
        bail!("need 2 <= nmin <= nmax");
    }
    let sides: Vec<usize> = (a.nmin..=a.nmax).collect();
    let rows = free_energy_sequence(&a.phi, &a.psi, &sides, a.k, &ExactConfig::default())?;
    println!("n a_n delta slab_lb slab_ub");
    for r in &rows {
        let d = r.delta.map_or("-".to_string(), |d| format!("{d:.3e}"));
        println!("{} {:.10} {d} {:.6} {:.6}", r.n, r.a_n, r.slab_lb, r.slab_ub);
    }
    if let Some(p) = &a.csv {
        csv_out(p, &rows)?;
    }
    Ok(())
}

fn curves(a: CurvesArgs) -> Result<()> {
    let decomp = match a.alg {
        Alg::Minore | Alg::Minorv => DecompFamily::MinorE {
            r: a.r,
            lambdas: a.params,
        },
        Alg::Dbdim => DecompFamily::DbDim {
            eps: a.eps,
            ks: a.params,
        },
        Alg::Grid => DecompFamily::Grid { ks: a.params },
        Alg::None => DecompFamily::None,
    };
    let spec = CurveSpec {
        side: a.side,
        criscross: a.criscross,
        mode: potential_mode(a.mode),
        alphas: a.alpha,
        decomp,
    };
    let rows = bound_curves(&spec);
    println!("alpha param eps bound limit");
    for r in &rows {
        println!("{} {} {:.4} {:.6} {:.6}", r.alpha, r.param, r.eps, r.bound, r.limit);
    }
    if let Some(p) = &a.csv {
        csv_out(p, &rows)?;
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Decompose(a) => decompose(a),
        Cmd::Exact(a) => exact(a),
        Cmd::Logz(a) => bounds(a, false),
        Cmd::Map(a) => bounds(a, true),
        Cmd::Saw(a) => saw(a),
        Cmd::Reduce(a) => reduce(a),
        Cmd::Experiment(a) => experiment(a),
        Cmd::Limit(a) => limit(a),
        Cmd::Curves(a) => curves(a),
        Cmd::Gen(a) => gen(a),
    }
}
