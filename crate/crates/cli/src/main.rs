//! Command-line front end for the simulator: presets, config files, flag
//! overrides, baseline comparison, and seed sweeps.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use wsnsim_core::io::{emit_plots, fmt_g9, write_csv};
use wsnsim_core::{
    deploy, validate_config, RoundMetrics, SimConfig, Simulation, TourSolver, ValidatedConfig,
};

#[derive(Parser)]
#[command(
    name = "wsnsim",
    version,
    about = "Cluster-based sensor network simulator with a mobile recharging vehicle"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and write its metrics CSV plus gnuplot scripts.
    Run(RunArgs),
    /// Run the scenario with and without the charger and summarize both.
    ///
    /// Writes a side-by-side CSV and prints one summary line with the final
    /// alive counts and lifetimes as baseline/charged pairs.
    Compare(ScenarioArgs),
    /// Run one scenario across several seeds and aggregate the outcomes.
    Sweep(SweepArgs),
    /// Print the deployed node positions as id,x,y CSV without simulating.
    DumpTopology(ScenarioArgs),
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Also write node id,x,y positions to this file.
    #[arg(long, value_name = "FILE")]
    dump_topology: Option<PathBuf>,
    /// Also write round,head,member cluster rows to this file (each head is
    /// listed once under itself).
    #[arg(long, value_name = "FILE")]
    dump_clusters: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Seeds to run: a comma list ("1,5,9") or an inclusive range ("1..5").
    #[arg(long, value_name = "SEEDS")]
    seeds: String,
}

/// Scenario selection and overrides. Later sources win: defaults, then the
/// preset, then the config file, then individual flags.
#[derive(Args)]
struct ScenarioArgs {
    /// Built-in scenario: n50, n100, or n150.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// JSON file whose keys mirror the configuration fields.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override the RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of rounds.
    #[arg(long)]
    rounds: Option<u32>,
    /// Disable the recharging vehicle.
    #[arg(long)]
    no_harvester: bool,
    /// Tour planner for the charger's round trip.
    #[arg(long, value_enum, value_name = "SOLVER")]
    tour_solver: Option<SolverChoice>,
    /// Elect a fixed head count each round instead of the probabilistic draw.
    #[arg(long)]
    fixed_ch_count: bool,
    /// Output directory for CSVs and plot scripts.
    #[arg(
        short = 'o',
        long = "out-dir",
        env = "WSNSIM_OUT",
        default_value = "out",
        value_name = "DIR"
    )]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverChoice {
    Heuristic,
    Exact,
}

impl From<SolverChoice> for TourSolver {
    fn from(choice: SolverChoice) -> Self {
        match choice {
            SolverChoice::Heuristic => TourSolver::Heuristic,
            SolverChoice::Exact => TourSolver::Exact,
        }
    }
}

struct Scenario {
    config: SimConfig,
    name: String,
}

fn resolve(args: &ScenarioArgs, require_source: bool) -> Result<Scenario> {
    if require_source && args.preset.is_some() == args.config.is_some() {
        bail!("pass exactly one of --preset or --config");
    }
    let mut config = SimConfig::default();
    let mut name = String::from("default");
    if let Some(preset) = &args.preset {
        config = SimConfig::preset(preset).ok_or_else(|| {
            anyhow!(
                "unknown preset '{preset}'; valid presets: {}",
                SimConfig::PRESET_NAMES.join(", ")
            )
        })?;
        name.clone_from(preset);
    }
    if let Some(path) = &args.config {
        config = overlay_file(config, path)?;
        name = path
            .file_stem()
            .and_then(|stem| stem.to_str())
            .unwrap_or("config")
            .to_string();
    }
    if let Some(seed) = args.seed {
        config.rng_seed = seed;
    }
    if let Some(rounds) = args.rounds {
        config.total_rounds = rounds;
    }
    if args.no_harvester {
        config.harvester_enabled = false;
    }
    if let Some(choice) = args.tour_solver {
        config.tour_solver = choice.into();
    }
    if args.fixed_ch_count {
        config.fixed_ch_count = true;
    }
    Ok(Scenario { config, name })
}

/// Applies a partial JSON config on top of `base`, keeping base values for
/// keys the file does not mention (including inside nested objects).
fn overlay_file(base: SimConfig, path: &Path) -> Result<SimConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let overlay: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let mut merged = serde_json::to_value(&base).expect("config serializes");
    merge_json(&mut merged, overlay);
    serde_json::from_value(merged).with_context(|| format!("applying {}", path.display()))
}

fn merge_json(base: &mut serde_json::Value, overlay: serde_json::Value) {
    match (base, overlay) {
        (serde_json::Value::Object(slots), serde_json::Value::Object(entries)) => {
            for (key, value) in entries {
                match slots.get_mut(&key) {
                    Some(slot) => merge_json(slot, value),
                    None => {
                        slots.insert(key, value);
                    }
                }
            }
        }
        (slot, value) => *slot = value,
    }
}

fn topology_csv(validated: &ValidatedConfig) -> String {
    let deployment = deploy(validated);
    let mut out = String::from("id,x,y\n");
    for node in &deployment.nodes {
        let _ = writeln!(
            out,
            "{},{},{}",
            node.id,
            fmt_g9(node.position.x),
            fmt_g9(node.position.y)
        );
    }
    out
}

/// Final alive count and lifetime of a finished series. Lifetime is the first
/// round with nothing alive, or "survived". An empty series never simulated a
/// death, so it reports the full population.
fn outcome(series: &[RoundMetrics], node_count: u32) -> (u32, String) {
    let final_alive = series.last().map_or(node_count, |m| m.alive_count);
    let lifetime = series
        .iter()
        .find(|m| m.alive_count == 0)
        .map_or_else(|| "survived".to_string(), |m| m.round_index.to_string());
    (final_alive, lifetime)
}

fn run_scenario(args: &RunArgs) -> Result<()> {
    let scenario = resolve(&args.scenario, true)?;
    let validated = validate_config(scenario.config)?;
    let label = format!("{}_s{}", scenario.name, validated.rng_seed);
    let rounds = validated.total_rounds;
    let out_dir = &args.scenario.out_dir;
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;

    if let Some(path) = &args.dump_topology {
        fs::write(path, topology_csv(&validated))
            .with_context(|| format!("writing {}", path.display()))?;
    }

    let mut sim = Simulation::new(validated);
    let mut clusters = args
        .dump_clusters
        .as_ref()
        .map(|_| String::from("round,head,member\n"));
    for _ in 0..rounds {
        let report = sim.step()?;
        if let (Some(buf), Some(assignment)) = (clusters.as_mut(), report.assignment.as_ref()) {
            for (&head, slots) in &assignment.tdma {
                let _ = writeln!(buf, "{},{head},{head}", report.metrics.round_index);
                for &member in slots {
                    let _ = writeln!(buf, "{},{head},{member}", report.metrics.round_index);
                }
            }
        }
    }
    if let (Some(path), Some(buf)) = (&args.dump_clusters, clusters) {
        fs::write(path, buf).with_context(|| format!("writing {}", path.display()))?;
    }

    let series = sim.into_metrics();
    let csv_path = out_dir.join(format!("metrics_{label}.csv"));
    write_csv(&series, &csv_path)?;
    println!("wrote {}", csv_path.display());
    if !series.is_empty() {
        for path in emit_plots(&series, out_dir, &label)? {
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn compare(args: &ScenarioArgs) -> Result<()> {
    let scenario = resolve(args, false)?;
    let mut off_config = scenario.config.clone();
    off_config.harvester_enabled = false;
    let mut on_config = scenario.config;
    on_config.harvester_enabled = true;

    let off_validated = validate_config(off_config)?;
    let on_validated = validate_config(on_config)?;
    let node_count = on_validated.node_count;
    let seed = on_validated.rng_seed;
    let off = wsnsim_core::run(off_validated)?;
    let on = wsnsim_core::run(on_validated)?;

    fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    let path = args
        .out_dir
        .join(format!("compare_{}_s{seed}.csv", scenario.name));
    fs::write(&path, side_by_side_csv(&off, &on))
        .with_context(|| format!("writing {}", path.display()))?;

    let (off_alive, off_life) = outcome(&off, node_count);
    let (on_alive, on_life) = outcome(&on, node_count);
    println!("wrote {}", path.display());
    println!("final alive {off_alive}/{on_alive}; lifetime {off_life}/{on_life}");
    Ok(())
}

fn side_by_side_csv(off: &[RoundMetrics], on: &[RoundMetrics]) -> String {
    let mut out = String::from(
        "round,time_s,alive_off,alive_on,consumed_j_off,consumed_j_on,\
         emitted_j_on,delivered_j_on,data_bits_off,data_bits_on\n",
    );
    for (a, b) in off.iter().zip(on) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            a.round_index,
            fmt_g9(a.sim_time),
            a.alive_count,
            b.alive_count,
            fmt_g9(a.consumed_cumulative),
            fmt_g9(b.consumed_cumulative),
            fmt_g9(b.emitted_cumulative),
            fmt_g9(b.delivered_cumulative),
            a.data_received_cumulative,
            b.data_received_cumulative
        );
    }
    out
}

fn sweep(args: &SweepArgs) -> Result<()> {
    let mut seeds = parse_seeds(&args.seeds)?;
    if seeds.is_empty() {
        bail!("no seeds given; pass --seeds like \"1,2,3\" or \"1..5\"");
    }
    let mut seen = BTreeSet::new();
    seeds.retain(|&s| seen.insert(s));

    let scenario = resolve(&args.scenario, false)?;
    let out_dir: &Path = &args.scenario.out_dir;
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;

    let name = scenario.name.as_str();
    let rows: Vec<Result<String>> = std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| {
                let config = scenario.config.clone();
                scope.spawn(move || -> Result<String> {
                    let mut config = config;
                    config.rng_seed = seed;
                    let validated = validate_config(config)?;
                    let node_count = validated.node_count;
                    let series = wsnsim_core::run(validated)?;
                    write_csv(
                        &series,
                        &out_dir.join(format!("metrics_{name}_s{seed}.csv")),
                    )?;
                    let (final_alive, lifetime) = outcome(&series, node_count);
                    let (consumed, emitted, delivered, data) =
                        series.last().map_or((0.0, 0.0, 0.0, 0), |m| {
                            (
                                m.consumed_cumulative,
                                m.emitted_cumulative,
                                m.delivered_cumulative,
                                m.data_received_cumulative,
                            )
                        });
                    Ok(format!(
                        "{seed},{final_alive},{lifetime},{},{},{},{data}",
                        fmt_g9(consumed),
                        fmt_g9(emitted),
                        fmt_g9(delivered)
                    ))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|handle| handle.join().expect("sweep worker panicked"))
            .collect()
    });

    let mut aggregate =
        String::from("seed,final_alive,lifetime,consumed_j,emitted_j,delivered_j,data_bits\n");
    for row in rows {
        aggregate.push_str(&row?);
        aggregate.push('\n');
    }
    let path = out_dir.join(format!("sweep_{name}.csv"));
    fs::write(&path, aggregate).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {} ({} seeds)", path.display(), seeds.len());
    Ok(())
}

fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Ok(Vec::new());
    }
    if let Some((lo, hi)) = trimmed.split_once("..") {
        let lo: u64 = lo.trim().parse().context("seed range start")?;
        let hi: u64 = hi.trim().parse().context("seed range end")?;
        if hi < lo {
            bail!("seed range {lo}..{hi} is empty");
        }
        return Ok((lo..=hi).collect());
    }
    trimmed
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<u64>()
                .with_context(|| format!("seed '{}'", part.trim()))
        })
        .collect()
}

fn dump_topology(args: &ScenarioArgs) -> Result<()> {
    let scenario = resolve(args, false)?;
    let validated = validate_config(scenario.config)?;
    print!("{}", topology_csv(&validated));
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => run_scenario(&args),
        Command::Compare(args) => compare(&args),
        Command::Sweep(args) => sweep(&args),
        Command::DumpTopology(args) => dump_topology(&args),
    }
}
