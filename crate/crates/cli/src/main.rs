//! `mbconf`: train a telemetry model, inspect SLO blankets, infer
//! configurations, evaluate windows and drive the simulator.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use mbconf_core::graph::{blanket_dot, BlanketReport};
use mbconf_core::infer::Evidence;
use mbconf_core::learn::{load_model, save_model, train, DiscreteBayesNet, HillClimbOptions, DEFAULT_ALPHA};
use mbconf_core::reconfig::{infer_best_config, ranking_csv, ranking_json, ranking_table, Provenance, Ranking};
use mbconf_core::sim::{config_from_pairs, ground_truth, replay, sample_telemetry, Scenario, SweepSchedule, REPLAY_ROWS};
use mbconf_core::slo::{empirical_fulfillment, parse_slos, threshold_cuts, FulfillmentReport, SloSpec};
use mbconf_core::telemetry::{
    discretize_with_cuts, load_telemetry, telemetry_schema, write_csv, DiscretizePolicy, RawDataset,
};

#[derive(Parser, Debug)]
#[command(name = "mbconf", version, about = "Markov-blanket device configuration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Learn structure and parameters from a telemetry CSV.
    Train {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Bins per continuous column.
        #[arg(long, default_value_t = 8)]
        bins: usize,
        #[arg(long, default_value_t = 4)]
        max_parents: usize,
        /// Laplace smoothing.
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 30)]
        restarts: usize,
        /// SLO file whose thresholds become forced bin edges.
        #[arg(long)]
        slos: Option<PathBuf>,
    },
    /// Print the Markov blanket of metrics or of each SLO in a file.
    Blanket {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, conflicts_with = "metric", required_unless_present = "metric")]
        slos: Option<PathBuf>,
        #[arg(long)]
        metric: Vec<String>,
        /// Write the blanket sub-graph(s) in DOT format.
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Rank every configuration by its chance of fulfilling the SLOs.
    Infer {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        slos: PathBuf,
        /// Fixed assignments, e.g. `--evidence gpu=False`.
        #[arg(long, value_parser = parse_pair)]
        evidence: Vec<(String, String)>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        /// Table rows shown.
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Judge a telemetry window against SLOs.
    Evaluate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        slos: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Sample telemetry from the ground-truth network.
    Simulate {
        #[arg(long)]
        out: PathBuf,
        /// Dwell schedule file; defaults to a full sweep.
        #[arg(long)]
        schedule: Option<PathBuf>,
        #[arg(long, default_value_t = 278)]
        rows_per_dwell: usize,
        #[arg(long, value_enum, default_value_t = GpuRuns::Both)]
        gpu: GpuRuns,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Seed of the ground-truth CPT jitter.
        #[arg(long, default_value_t = 0)]
        truth_seed: u64,
    },
    /// Run one configuration of a scenario on the ground truth and report
    /// SLO fulfillment.
    Replay {
        #[arg(long)]
        scenario: String,
        /// Parameter assignments, e.g. `--config fps=20`.
        #[arg(long, value_parser = parse_pair, required = true)]
        config: Vec<(String, String)>,
        #[arg(long, default_value_t = REPLAY_ROWS)]
        rows: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        truth_seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum GpuRuns {
    Both,
    On,
    Off,
}

fn parse_pair(s: &str) -> std::result::Result<(String, String), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() && !v.trim().is_empty() => {
            Ok((k.trim().to_string(), v.trim().to_string()))
        }
        _ => Err(format!("expected name=value, got `{s}`")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Train { input, out, bins, max_parents, alpha, seed, restarts, slos } => {
            let slos = slos.as_deref().map(read_slos).transpose()?;
            cmd_train(&input, &out, bins, max_parents, alpha, seed, restarts, slos.as_deref())
        }
        Command::Blanket { model, slos, metric, dot, format } => {
            let net = read_model(&model)?;
            let targets: Vec<(String, Vec<String>)> = match slos {
                Some(path) => read_slos(&path)?
                    .into_iter()
                    .map(|s| (s.name, s.metrics))
                    .collect(),
                None => metric.into_iter().map(|m| (m.clone(), vec![m])).collect(),
            };
            cmd_blanket(&net, &targets, dot.as_deref(), format)
        }
        Command::Infer { model, slos, evidence, format, top } => {
            let net = read_model(&model)?;
            let slos = read_slos(&slos)?;
            cmd_infer(&net, &slos, &evidence, format, top)
        }
        Command::Evaluate { input, slos, format } => {
            let slos = read_slos(&slos)?;
            let raw = read_csv(&input)?;
            let report = empirical_fulfillment(&raw, &slos)?;
            print!("{}", fulfillment(&report, format)?);
            Ok(())
        }
        Command::Simulate { out, schedule, rows_per_dwell, gpu, seed, truth_seed } => {
            let schedule = match schedule {
                Some(path) => SweepSchedule::parse(&read_text(&path)?)?,
                None => {
                    let runs: &[bool] = match gpu {
                        GpuRuns::Both => &[false, true],
                        GpuRuns::On => &[true],
                        GpuRuns::Off => &[false],
                    };
                    SweepSchedule::full_sweep(runs, rows_per_dwell)
                }
            };
            let gt = ground_truth(truth_seed);
            let raw = sample_telemetry(&gt.net, &schedule, seed)?;
            let file = File::create(&out).with_context(|| format!("cannot create {}", out.display()))?;
            write_csv(&raw, file)?;
            println!("wrote {} rows in {} dwells to {}", raw.row_count(), schedule.dwells.len(), out.display());
            Ok(())
        }
        Command::Replay { scenario, config, rows, seed, truth_seed, format } => {
            let scenario = Scenario::by_name(&scenario)?;
            let gt = ground_truth(truth_seed);
            let pairs: Vec<(&str, &str)> = config.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
            let config = config_from_pairs(&gt.net, &pairs, Provenance::Manual)?;
            let mut clamp = scenario.constraints(&gt.net)?;
            for (&v, &s) in &config.assignment {
                if clamp.get(&v).is_some_and(|&c| c != s) {
                    bail!("`{}` is fixed by scenario {}", gt.net.name(v), scenario.name);
                }
                clamp.insert(v, s);
            }
            let report = replay(&gt.net, &scenario.slos, &clamp, rows, seed)?;
            if format == Format::Table {
                println!("scenario {}: {}", scenario.name, assignment_label(&gt.net, &clamp));
            }
            print!("{}", fulfillment(&report, format)?);
            Ok(())
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn read_slos(path: &Path) -> Result<Vec<SloSpec>> {
    parse_slos(&read_text(path)?).with_context(|| format!("in {}", path.display()))
}

fn read_model(path: &Path) -> Result<DiscreteBayesNet> {
    load_model(path).with_context(|| format!("cannot load model {}", path.display()))
}

fn read_csv(path: &Path) -> Result<RawDataset> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    load_telemetry(BufReader::new(file), &telemetry_schema()).with_context(|| format!("in {}", path.display()))
}

#[allow(clippy::too_many_arguments)]
fn cmd_train(
    input: &Path,
    out: &Path,
    bins: usize,
    max_parents: usize,
    alpha: f64,
    seed: u64,
    restarts: usize,
    slos: Option<&[SloSpec]>,
) -> Result<()> {
    let start = Instant::now();
    let raw = read_csv(input)?;
    let cuts = slos.map(|s| threshold_cuts(s, &raw)).unwrap_or_default();
    let policy = DiscretizePolicy { bins, ..DiscretizePolicy::default() };
    let data = discretize_with_cuts(&raw, policy, &cuts)?;
    for w in &data.warnings {
        eprintln!("warning: {w:?}");
    }
    let opts = HillClimbOptions { max_parents, seed, restarts, ..HillClimbOptions::default() };
    let (net, search) = train(&data.dataset, &opts, alpha)?;
    save_model(&net, out).with_context(|| format!("cannot write {}", out.display()))?;
    println!("rows       {}", raw.row_count());
    println!("variables  {}", net.len());
    println!("edges      {}", net.dag().edges().len());
    println!("bic        {:.3}", search.score());
    println!("model      {}", out.display());
    eprintln!("trained in {:.2}s", start.elapsed().as_secs_f64());
    Ok(())
}

fn resolve(net: &DiscreteBayesNet, names: &[String]) -> Result<Vec<usize>> {
    names.iter().map(|n| Ok(net.var(n)?)).collect()
}

fn cmd_blanket(
    net: &DiscreteBayesNet,
    targets: &[(String, Vec<String>)],
    dot: Option<&Path>,
    format: Format,
) -> Result<()> {
    let mut reports = Vec::new();
    for (name, metrics) in targets {
        let vars = resolve(net, metrics)?;
        reports.push((name.as_str(), net.blanket(&vars)?));
    }
    let text = match format {
        Format::Table => reports.iter().map(|(n, r)| blanket_table(net, n, r)).collect::<Vec<_>>().join("\n"),
        Format::Json => {
            let value: Vec<serde_json::Value> = reports.iter().map(|(n, r)| blanket_json(net, n, r)).collect();
            serde_json::to_string_pretty(&value)? + "\n"
        }
        Format::Csv => {
            let mut s = String::from("target,variable,roles,parameterizable\n");
            for (n, r) in &reports {
                for (&v, roles) in &r.members {
                    let roles: Vec<&str> = roles.iter().map(|x| x.as_str()).collect();
                    let _ = writeln!(s, "{n},{},{},{}", net.name(v), roles.join("+"), r.parameterizable.contains(&v));
                }
            }
            s
        }
    };
    print!("{text}");
    if let Some(path) = dot {
        let body: String = reports.iter().map(|(_, r)| blanket_dot(net.dag(), r)).collect();
        fs::write(path, body).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

fn blanket_table(net: &DiscreteBayesNet, name: &str, report: &BlanketReport) -> String {
    let mut out = String::new();
    if report.is_empty() {
        let _ = writeln!(out, "{name}: empty blanket");
        return out;
    }
    let _ = writeln!(out, "{name}: {} members", report.len());
    let width = report.members.keys().map(|&v| net.name(v).len()).max().unwrap_or(0);
    for (&v, roles) in &report.members {
        let roles: Vec<&str> = roles.iter().map(|r| r.as_str()).collect();
        let flag = if report.parameterizable.contains(&v) { "  parameterizable" } else { "" };
        let _ = writeln!(out, "  {:<width$}  {}{}", net.name(v), roles.join(","), flag);
    }
    out
}

fn blanket_json(net: &DiscreteBayesNet, name: &str, report: &BlanketReport) -> serde_json::Value {
    let members: Vec<serde_json::Value> = report
        .members
        .iter()
        .map(|(&v, roles)| {
            serde_json::json!({
                "variable": net.name(v),
                "roles": roles.iter().map(|r| r.as_str()).collect::<Vec<_>>(),
                "parameterizable": report.parameterizable.contains(&v),
            })
        })
        .collect();
    serde_json::json!({
        "target": name,
        "metrics": report.targets.iter().map(|&v| net.name(v)).collect::<Vec<_>>(),
        "members": members,
    })
}

fn assignment_label(net: &DiscreteBayesNet, assignment: &Evidence) -> String {
    assignment
        .iter()
        .map(|(&v, &s)| format!("{}={}", net.name(v), net.meta(v).states[s]))
        .collect::<Vec<_>>()
        .join(" ")
}

fn cmd_infer(
    net: &DiscreteBayesNet,
    slos: &[SloSpec],
    evidence: &[(String, String)],
    format: Format,
    top: usize,
) -> Result<()> {
    let mut constraints = Evidence::new();
    for (k, v) in evidence {
        let (var, state) = net.resolve_assignment(k, v)?;
        if constraints.insert(var, state).is_some_and(|old| old != state) {
            bail!("conflicting evidence for `{k}`");
        }
    }
    let start = Instant::now();
    let ranking = infer_best_config(net, slos, &constraints)?;
    let elapsed = start.elapsed();
    match format {
        Format::Table => print!("{}", infer_table(net, &ranking, top)),
        Format::Json => print!("{}", ranking_json(net.metas(), &ranking)?),
        Format::Csv => print!("{}", ranking_csv(net.metas(), &ranking)?),
    }
    eprintln!("{} queries in {:.1} ms", ranking.queries, elapsed.as_secs_f64() * 1e3);
    Ok(())
}

fn infer_table(net: &DiscreteBayesNet, ranking: &Ranking, top: usize) -> String {
    let best = ranking.best();
    let mut out = String::new();
    let _ = writeln!(out, "recommended {}", best.config.label(net.metas()));
    if ranking.none_feasible {
        let _ = writeln!(out, "NONE-FEASIBLE: no configuration meets every SLO; showing the best weakest-SLO probability");
    }
    let _ = writeln!(out, "{} configurations, {} queries", ranking.scores.len(), ranking.queries);
    if let Some(d) = &best.diagnostic {
        let _ = writeln!(out, "note: {d}");
    }
    out.push('\n');
    out.push_str(&ranking_table(net.metas(), ranking, top));
    out
}

fn fulfillment(report: &FulfillmentReport, format: Format) -> Result<String> {
    let cell = |x: Option<f64>, pct: bool| match x {
        Some(v) if pct => format!("{:.2}%", v * 100.0),
        Some(v) => format!("{v:.3}"),
        None => "-".into(),
    };
    Ok(match format {
        Format::Table => {
            let mut rows = vec![["slo", "kind", "rate", "mean", "p_min", "status"].map(String::from).to_vec()];
            for o in &report.outcomes {
                rows.push(vec![
                    o.name.clone(),
                    o.kind.to_string(),
                    cell(o.rate, true),
                    cell(o.mean, false),
                    cell(o.p_min, true),
                    if o.violated { "VIOLATED" } else { "ok" }.into(),
                ]);
            }
            let widths: Vec<usize> = (0..rows[0].len()).map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0)).collect();
            let mut out = format!("{} rows\n", report.rows);
            for r in &rows {
                let line: Vec<String> = r.iter().zip(&widths).map(|(c, &w)| format!("{c:<w$}")).collect();
                let _ = writeln!(out, "{}", line.join("  ").trim_end());
            }
            out
        }
        Format::Json => {
            let outcomes: Vec<serde_json::Value> = report
                .outcomes
                .iter()
                .map(|o| {
                    serde_json::json!({
                        "slo": o.name,
                        "kind": o.kind,
                        "samples": o.samples,
                        "rate": o.rate,
                        "mean": o.mean,
                        "p_min": o.p_min,
                        "violated": o.violated,
                    })
                })
                .collect();
            let value = serde_json::json!({ "rows": report.rows, "outcomes": outcomes });
            serde_json::to_string_pretty(&value)? + "\n"
        }
        Format::Csv => {
            let mut out = String::from("slo,kind,samples,rate,mean,p_min,violated\n");
            let opt = |x: Option<f64>| x.map(|v| format!("{v}")).unwrap_or_default();
            for o in &report.outcomes {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    o.name,
                    o.kind,
                    o.samples,
                    opt(o.rate),
                    opt(o.mean),
                    opt(o.p_min),
                    o.violated
                );
            }
            out
        }
    })
}
