//! The `dht-rebalance` command line. [`execute`] writes everything it reports
//! to the supplied writer and returns the process exit status.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bounds::{
    self, BoundKind, BoundReport, ClusterParams, Scenario, WorkloadKind, WritePattern,
};
use crate::ring::{self, KeySample, NodeId, Strategy};
use crate::sim::{self, SimConfig, SimError, SimOutcome};
use crate::units;

pub const CSV_HEADER: [&str; 4] = ["n", "scenario", "bound_kind", "lambda_bound_writes_per_s"];

/// Process exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Usage = 2,
    Io = 3,
    Breakdown = 4,
    Validation = 5,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{context}: {source}")]
    Io { context: String, source: io::Error },
}

impl CliError {
    pub fn exit(&self) -> Exit {
        match self {
            CliError::Usage(_) => Exit::Usage,
            CliError::Io { .. } => Exit::Io,
        }
    }

    fn usage(e: impl std::fmt::Display) -> Self {
        CliError::Usage(e.to_string())
    }

    fn io(context: impl Into<String>) -> impl FnOnce(io::Error) -> Self {
        let context = context.into();
        move |source| CliError::Io { context, source }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "dht-rebalance",
    version,
    about = "Write-rate limits for scaling out a consistent-hashing store one node at a time",
    after_help = "Bandwidths take a unit: bps, Kbps, Mbps, Gbps, B/s, KB/s, MB/s, GB/s (decimal prefixes).\n\
                  Sizes take B, KB, MB, GB, TB or a bare byte count.\n\
                  Storage defaults to 1TB. The bounds do not depend on it; simulated durations do."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the bounds for one cluster and scenario.
    Bounds(BoundsArgs),
    /// Write bound-vs-N curves as CSV.
    Sweep(SweepArgs),
    /// Run the fluid simulator from a JSON config.
    Simulate(SimulateArgs),
    /// Compare simulated feasibility thresholds with the analytic bounds.
    Validate(ValidateArgs),
    /// Metro-scale IoT ingestion example.
    CaseStudy(CaseStudyArgs),
    /// Key balance of a ring and the data moved by one join.
    RingStats(RingStatsArgs),
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub mu: f64,
    #[arg(long, default_value = "1Gbps")]
    pub bandwidth: String,
    #[arg(long, default_value = "16B")]
    pub value_size: String,
    #[arg(long, default_value_t = 1)]
    pub replication: u32,
    #[arg(long, default_value = "1TB")]
    pub storage: String,
    /// One of increasing-concurrent, increasing-clear, stable-concurrent,
    /// stable-clear. All four when omitted.
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 1)]
    pub n_min: u64,
    #[arg(long, default_value_t = 100)]
    pub n_max: u64,
    #[arg(long, value_delimiter = ',', default_value = "0.3,0.5,0.7")]
    pub mu_list: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub scenario_list: Vec<String>,
    #[arg(long, default_value = "1Gbps")]
    pub bandwidth: String,
    #[arg(long, default_value = "16B")]
    pub value_size: String,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Write every event as one JSON line.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, value_delimiter = ',', num_args = 0.., default_value = "4,8,16,32")]
    pub n_list: Vec<u64>,
    #[arg(long, value_delimiter = ',')]
    pub scenario_list: Vec<String>,
    /// Largest accepted relative error.
    #[arg(long, default_value_t = 0.02)]
    pub tol: f64,
    #[arg(long, default_value_t = 0.5)]
    pub mu: f64,
    #[arg(long, default_value = "1Gbps")]
    pub bandwidth: String,
    #[arg(long, default_value = "16B")]
    pub value_size: String,
    #[arg(long, default_value = "1TB")]
    pub storage: String,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct CaseStudyArgs {
    #[arg(long)]
    pub override_bandwidth: Option<String>,
    /// Total writes/s offered to the whole cluster.
    #[arg(long)]
    pub override_total_rate: Option<f64>,
    #[arg(long)]
    pub override_value_size: Option<String>,
    #[arg(long)]
    pub override_mu: Option<f64>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyName {
    ManyTokenEqualPart,
    LimitedTokenEqualPart,
    LimitedTokenRandomPart,
}

#[derive(Debug, Args)]
pub struct RingStatsArgs {
    #[arg(long)]
    pub nodes: u64,
    #[arg(long, value_enum, default_value = "many-token-equal-part")]
    pub strategy: StrategyName,
    /// Partition count for many-token-equal-part.
    #[arg(long, default_value_t = 4096)]
    pub q: u64,
    /// Tokens per node for the limited-token strategies.
    #[arg(long, default_value_t = 8)]
    pub t: u32,
    #[arg(long, default_value_t = 1_000_000)]
    pub keys: u64,
    #[arg(long, default_value_t = 1)]
    pub replication: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Bytes per key-value pair for the moved-bytes estimate.
    #[arg(long, default_value_t = 16)]
    pub value_size: u64,
    /// Save the ring before the join as JSON.
    #[arg(long)]
    pub ring_out: Option<PathBuf>,
}

/// Runs one command, writing its report to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<Exit, CliError> {
    match &cli.command {
        Command::Bounds(a) => cmd_bounds(a, out),
        Command::Sweep(a) => cmd_sweep(a, out),
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Validate(a) => cmd_validate(a, out),
        Command::CaseStudy(a) => cmd_case_study(a, out),
        Command::RingStats(a) => cmd_ring_stats(a, out),
    }
}

fn stdout_err(e: io::Error) -> CliError {
    CliError::Io {
        context: "writing output".into(),
        source: e,
    }
}

fn parse_scenarios(list: &[String]) -> Result<Vec<Scenario>, CliError> {
    if list.is_empty() {
        return Ok(Scenario::ALL.to_vec());
    }
    list.iter()
        .map(|s| s.trim().parse::<Scenario>().map_err(CliError::usage))
        .collect()
}

fn bandwidth_arg(s: &str) -> Result<f64, CliError> {
    units::parse_bandwidth(s).map_err(|e| CliError::Usage(format!("--bandwidth: {e}")))
}

fn size_arg(flag: &str, s: &str) -> Result<f64, CliError> {
    units::parse_size(s).map_err(|e| CliError::Usage(format!("--{flag}: {e}")))
}

/// `x` with six significant digits and trailing zeros dropped, in the style
/// of C's `%g`.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exponent) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exponent.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp) as usize;
        trim(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim(mantissa))
    }
}

fn write_bound_report(out: &mut dyn Write, r: &BoundReport) -> io::Result<()> {
    writeln!(out, "scenario: {}", r.scenario)?;
    writeln!(
        out,
        "  N={} mu={} b={} v={} r={} S={}  (B = b/v = {:.1} writes/s)",
        r.params.n,
        r.params.mu,
        units::format_bandwidth(r.params.bandwidth),
        units::format_size(r.params.value_size),
        r.params.replication,
        units::format_size(r.params.storage),
        r.params.write_capacity()
    )?;
    for e in &r.entries {
        writeln!(
            out,
            "  {:<9} {:>16.1} writes/s per node{}",
            e.kind.label(),
            e.value,
            if e.applicable {
                ""
            } else {
                "  (not applicable)"
            }
        )?;
    }
    writeln!(
        out,
        "  binding: {} {:.1} writes/s per node",
        r.binding.kind.label(),
        r.binding.value
    )
}

fn cmd_bounds(a: &BoundsArgs, out: &mut dyn Write) -> Result<Exit, CliError> {
    let params = ClusterParams::new(
        a.n,
        bandwidth_arg(&a.bandwidth)?,
        size_arg("value-size", &a.value_size)?,
        a.mu,
        a.replication,
        size_arg("storage", &a.storage)?,
    )
    .map_err(CliError::usage)?;
    let scenarios = match &a.scenario {
        Some(s) => vec![s.parse::<Scenario>().map_err(CliError::usage)?],
        None => Scenario::ALL.to_vec(),
    };
    let reports: Vec<BoundReport> = scenarios
        .iter()
        .map(|&s| bounds::bound_report(&params, s))
        .collect();
    if a.json {
        let text = if reports.len() == 1 {
            serde_json::to_string_pretty(&reports[0])
        } else {
            serde_json::to_string_pretty(&reports)
        }
        .expect("reports serialize");
        writeln!(out, "{text}").map_err(stdout_err)?;
    } else {
        for r in &reports {
            write_bound_report(out, r).map_err(stdout_err)?;
        }
    }
    Ok(Exit::Ok)
}

/// One CSV row of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub n: u64,
    pub scenario: String,
    pub bound_kind: BoundKind,
    pub value: f64,
}

/// Scenario column of the curve CSV: the scenario name with the fill ratio
/// appended, e.g. `stable-concurrent/mu=0.5`.
pub fn curve_label(scenario: Scenario, mu: f64) -> String {
    format!("{scenario}/mu={mu}")
}

/// Rows for every `(n, scenario, applicable bound, mu)` in the grid, sorted by
/// the scenario column, then bound kind label, then `n`.
pub fn sweep_rows(
    n_min: u64,
    n_max: u64,
    mus: &[f64],
    scenarios: &[Scenario],
    bandwidth: f64,
    value_size: f64,
) -> Result<Vec<CurveRow>, CliError> {
    if !(1 <= n_min && n_min < n_max && n_max <= bounds::MAX_SEARCH_N) {
        return Err(CliError::Usage(format!(
            "need 1 <= n-min < n-max <= {}, got n-min={n_min} n-max={n_max}",
            bounds::MAX_SEARCH_N
        )));
    }
    if mus.is_empty() {
        return Err(CliError::Usage("--mu-list is empty".into()));
    }
    let mut rows = Vec::new();
    for &mu in mus {
        let base = ClusterParams::new(
            1,
            bandwidth,
            value_size,
            mu,
            1,
            ClusterParams::DEFAULT_STORAGE,
        )
        .map_err(CliError::usage)?;
        for &scenario in scenarios {
            let label = curve_label(scenario, mu);
            for &kind in bounds::applicable_kinds(scenario.mode) {
                for n in n_min..=n_max {
                    rows.push(CurveRow {
                        n,
                        scenario: label.clone(),
                        bound_kind: kind,
                        value: bounds::bound_value(&base.with_n(n), scenario.workload, kind),
                    });
                }
            }
        }
    }
    rows.sort_by(|x, y| {
        (x.scenario.as_str(), x.bound_kind.label(), x.n).cmp(&(
            y.scenario.as_str(),
            y.bound_kind.label(),
            y.n,
        ))
    });
    rows.dedup_by(|x, y| x.scenario == y.scenario && x.bound_kind == y.bound_kind && x.n == y.n);
    Ok(rows)
}

pub fn write_curve_csv<W: Write>(out: W, rows: &[CurveRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.scenario.clone(),
            r.bound_kind.label().to_string(),
            sig6(r.value),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<Exit, CliError> {
    let scenarios = parse_scenarios(&a.scenario_list)?;
    let rows = sweep_rows(
        a.n_min,
        a.n_max,
        &a.mu_list,
        &scenarios,
        bandwidth_arg(&a.bandwidth)?,
        size_arg("value-size", &a.value_size)?,
    )?;
    let csv_err = |path: &str| {
        let path = path.to_string();
        move |e: csv::Error| CliError::Io {
            context: format!("writing {path}"),
            source: io::Error::other(e),
        }
    };
    match &a.out {
        Some(path) => {
            let file =
                File::create(path).map_err(CliError::io(format!("creating {}", path.display())))?;
            write_curve_csv(BufWriter::new(file), &rows)
                .map_err(csv_err(&path.display().to_string()))?;
            writeln!(out, "wrote {} rows to {}", rows.len(), path.display()).map_err(stdout_err)?;
        }
        None => write_curve_csv(&mut *out, &rows).map_err(csv_err("stdout"))?,
    }
    Ok(Exit::Ok)
}

/// A number, or a string with a unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Number(f64),
    Text(String),
}

impl Quantity {
    fn bandwidth(&self) -> Result<f64, units::UnitError> {
        match self {
            Quantity::Number(x) => Ok(*x),
            Quantity::Text(s) => units::parse_bandwidth(s),
        }
    }

    fn size(&self) -> Result<f64, units::UnitError> {
        match self {
            Quantity::Number(x) => Ok(*x),
            Quantity::Text(s) => units::parse_size(s),
        }
    }
}

/// JSON config for `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    /// Initial node count.
    pub n: u64,
    pub bandwidth: Quantity,
    pub value_size: Quantity,
    pub mu: f64,
    #[serde(default = "one")]
    pub replication: u32,
    #[serde(default)]
    pub storage: Option<Quantity>,
    pub scenario: Scenario,
    /// Writes/s: per node for increasing workloads, cluster total for stable
    /// ones.
    pub rate: f64,
    /// Defaults to `n + 1`.
    #[serde(default)]
    pub n_target: Option<u64>,
    #[serde(default = "full")]
    pub initial_fill: f64,
    /// Seconds; unlimited when absent.
    #[serde(default)]
    pub max_sim_time: Option<f64>,
}

fn one() -> u32 {
    1
}

fn full() -> f64 {
    1.0
}

impl RunConfigFile {
    pub fn to_sim_config(&self) -> Result<SimConfig, CliError> {
        let storage = match &self.storage {
            Some(q) => q
                .size()
                .map_err(|e| CliError::Usage(format!("storage: {e}")))?,
            None => ClusterParams::DEFAULT_STORAGE,
        };
        let params = ClusterParams::new(
            self.n,
            self.bandwidth
                .bandwidth()
                .map_err(|e| CliError::Usage(format!("bandwidth: {e}")))?,
            self.value_size
                .size()
                .map_err(|e| CliError::Usage(format!("value_size: {e}")))?,
            self.mu,
            self.replication,
            storage,
        )
        .map_err(CliError::usage)?;
        let workload = match self.scenario.workload {
            WritePattern::Increasing => WorkloadKind::IncreasingPerNode(self.rate),
            WritePattern::Stable => WorkloadKind::StableTotal(self.rate),
        };
        let config = SimConfig {
            params,
            mode: self.scenario.mode,
            workload,
            n_target: self.n_target.unwrap_or(self.n + 1),
            initial_fill: self.initial_fill,
            max_sim_time: self.max_sim_time.unwrap_or(f64::INFINITY),
        };
        config.validate().map_err(CliError::usage)?;
        Ok(config)
    }
}

fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<Exit, CliError> {
    let text = std::fs::read_to_string(&a.config)
        .map_err(|e| CliError::Usage(format!("reading {}: {e}", a.config.display())))?;
    let file: RunConfigFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", a.config.display())))?;
    let config = file.to_sim_config()?;
    let run = sim::run(&config).map_err(|e| match e {
        SimError::InsufficientBandwidth { .. }
        | SimError::InvalidConfig(_)
        | SimError::EmptyRange => CliError::usage(e),
    })?;
    if let Some(path) = &a.trace {
        let context = format!("writing {}", path.display());
        let file = File::create(path).map_err(CliError::io(context.clone()))?;
        let mut w = BufWriter::new(file);
        run.write_trace(&mut w)
            .map_err(CliError::io(context.clone()))?;
        w.flush().map_err(CliError::io(context))?;
    }
    let summary = run.summary();
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(&summary).expect("summary serializes")
    )
    .map_err(stdout_err)?;
    Ok(match run.outcome {
        SimOutcome::Breakdown { .. } => Exit::Breakdown,
        _ => Exit::Ok,
    })
}

fn cmd_validate(a: &ValidateArgs, out: &mut dyn Write) -> Result<Exit, CliError> {
    if a.n_list.is_empty() {
        return Err(CliError::Usage("--n-list is empty".into()));
    }
    // Tolerances below the bisection floor are accepted: the run then reports
    // the residual error at that floor and fails.
    if !(a.tol > 0.0 && a.tol.is_finite()) {
        return Err(CliError::Usage(format!(
            "--tol must be positive, got {}",
            a.tol
        )));
    }
    let scenarios = parse_scenarios(&a.scenario_list)?;
    let params = ClusterParams::new(
        a.n_list[0].max(1),
        bandwidth_arg(&a.bandwidth)?,
        size_arg("value-size", &a.value_size)?,
        a.mu,
        1,
        size_arg("storage", &a.storage)?,
    )
    .map_err(CliError::usage)?;
    let report = sim::validate_against_bounds(&a.n_list, &scenarios, &params, a.tol)
        .map_err(CliError::usage)?;
    if a.json {
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        )
        .map_err(stdout_err)?;
    } else {
        let mut text = String::new();
        let _ = writeln!(
            text,
            "{:<22} {:>5} {:>9} {:>16} {:>16} {:>12}  result",
            "scenario", "n", "binding", "simulated", "analytic", "rel_error"
        );
        for r in &report.rows {
            let _ = writeln!(
                text,
                "{:<22} {:>5} {:>9} {:>16.3} {:>16.3} {:>12.3e}  {}",
                r.scenario.name(),
                r.n,
                r.binding_kind.label(),
                r.simulated,
                r.analytic,
                r.rel_error,
                if r.pass { "ok" } else { "FAIL" }
            );
        }
        let _ = writeln!(
            text,
            "max relative error {:.3e} (tol {})",
            report.max_rel_error(),
            a.tol
        );
        out.write_all(text.as_bytes()).map_err(stdout_err)?;
    }
    Ok(if report.all_pass() {
        Exit::Ok
    } else {
        Exit::Validation
    })
}

/// Offered load of the metro-scale example: 20 districts x 15 sensors per
/// block x 3200 blocks x 5 writes/s.
pub const CASE_TOTAL_RATE: f64 = 4_800_000.0;
/// 15 fields of 16 bytes.
pub const CASE_VALUE_SIZE: f64 = 240.0;
pub const CASE_MU: f64 = 0.5;
/// Node counts quoted in the original write-up for the storage-bound and
/// clear-stabilization readings of the plotted curves.
pub const CASE_REFERENCE_STORAGE_N: u64 = 13;
pub const CASE_REFERENCE_CLEAR_N: u64 = 17;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseStudy {
    pub total_rate: f64,
    pub bandwidth: f64,
    pub value_size: f64,
    pub mu: f64,
    /// `B = b/v`, writes/s per node.
    pub write_capacity: f64,
    /// Stable writes with concurrent stabilization need `N·λ < B`, which
    /// does not depend on `N`.
    pub concurrent_stable_feasible: bool,
    pub concurrent_stable_min_n: Option<u64>,
    /// Smallest `N` whose per-node share is below the storage bound alone.
    pub storage_min_n: Option<u64>,
    /// Smallest `N` whose per-node share is below the clear-stabilization
    /// time bound.
    pub clear_stable_min_n: Option<u64>,
    pub reference_storage_n: u64,
    pub reference_clear_n: u64,
    pub note: String,
}

pub const CASE_NOTE: &str = "The reference counts come from reading the plotted curves after an \
unspecified rescaling of the write rate to the 16-byte, 1 Gbps setting. That rescaling is not given, \
so they cannot be recomputed from the stated formulas. The values above are derived directly from the \
bounds with the case's own parameters.";

pub fn case_study(
    total_rate: f64,
    bandwidth: f64,
    value_size: f64,
    mu: f64,
) -> Result<CaseStudy, CliError> {
    if !(total_rate.is_finite() && total_rate > 0.0) {
        return Err(CliError::Usage(format!(
            "total rate must be positive, got {total_rate}"
        )));
    }
    let params = ClusterParams::new(
        1,
        bandwidth,
        value_size,
        mu,
        1,
        ClusterParams::DEFAULT_STORAGE,
    )
    .map_err(CliError::usage)?;
    let workload = WorkloadKind::StableTotal(total_rate);
    let concurrent_stable_min_n =
        bounds::min_feasible_n(&params, Scenario::STABLE_CONCURRENT, workload);
    Ok(CaseStudy {
        total_rate,
        bandwidth,
        value_size,
        mu,
        write_capacity: params.write_capacity(),
        concurrent_stable_feasible: total_rate < params.write_capacity(),
        concurrent_stable_min_n,
        storage_min_n: bounds::min_feasible_n_with(
            &params,
            Scenario::STABLE_CONCURRENT,
            workload,
            Some(&[BoundKind::StorageOriented]),
        ),
        clear_stable_min_n: bounds::min_feasible_n(&params, Scenario::STABLE_CLEAR, workload),
        reference_storage_n: CASE_REFERENCE_STORAGE_N,
        reference_clear_n: CASE_REFERENCE_CLEAR_N,
        note: CASE_NOTE.to_string(),
    })
}

fn show_n(n: Option<u64>) -> String {
    match n {
        Some(n) => n.to_string(),
        None => format!("none up to {}", bounds::MAX_SEARCH_N),
    }
}

fn cmd_case_study(a: &CaseStudyArgs, out: &mut dyn Write) -> Result<Exit, CliError> {
    let bandwidth = match &a.override_bandwidth {
        Some(s) => bandwidth_arg(s)?,
        None => ClusterParams::DEFAULT_BANDWIDTH,
    };
    let value_size = match &a.override_value_size {
        Some(s) => size_arg("override-value-size", s)?,
        None => CASE_VALUE_SIZE,
    };
    let c = case_study(
        a.override_total_rate.unwrap_or(CASE_TOTAL_RATE),
        bandwidth,
        value_size,
        a.override_mu.unwrap_or(CASE_MU),
    )?;
    if a.json {
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&c).expect("case study serializes")
        )
        .map_err(stdout_err)?;
        return Ok(Exit::Ok);
    }
    let mut t = String::new();
    let _ = writeln!(
        t,
        "total writes: {} writes/s, v = {}, b = {}, mu = {}",
        c.total_rate,
        units::format_size(c.value_size),
        units::format_bandwidth(c.bandwidth),
        c.mu
    );
    let _ = writeln!(t, "(a) B = b/v = {:.1} writes/s per node", c.write_capacity);
    if c.concurrent_stable_feasible {
        let _ = writeln!(
            t,
            "(b) concurrent stabilization, stable writes: feasible at every N (N*lambda = {} < B)",
            c.total_rate
        );
    } else {
        let _ = writeln!(
            t,
            "(b) concurrent stabilization, stable writes: infeasible at every N (N*lambda = {} >= B)",
            c.total_rate
        );
    }
    let _ = writeln!(
        t,
        "(c) smallest N meeting the storage bound alone: {}",
        show_n(c.storage_min_n)
    );
    let _ = writeln!(
        t,
        "    smallest N meeting the clear-stabilization time bound: {}",
        show_n(c.clear_stable_min_n)
    );
    let _ = writeln!(
        t,
        "(d) reference figures: about {} nodes (storage bound), about {} nodes (clear stabilization)",
        c.reference_storage_n, c.reference_clear_n
    );
    let _ = writeln!(t, "    note: {}", c.note);
    out.write_all(t.as_bytes()).map_err(stdout_err)?;
    Ok(Exit::Ok)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RingStatsReport {
    pub strategy: Strategy,
    pub balance: ring::BalanceStats,
    pub join: ring::RebalanceReport,
}

pub fn ring_stats(a: &RingStatsArgs) -> Result<(ring::RingState, RingStatsReport), CliError> {
    let strategy = match a.strategy {
        StrategyName::ManyTokenEqualPart => Strategy::ManyTokenEqualPart { partitions: a.q },
        StrategyName::LimitedTokenEqualPart => Strategy::LimitedTokenEqualPart {
            tokens_per_node: a.t,
        },
        StrategyName::LimitedTokenRandomPart => Strategy::LimitedTokenRandomPart {
            tokens_per_node: a.t,
        },
    };
    let ring = ring::build_ring(a.nodes, strategy, a.seed).map_err(CliError::usage)?;
    let balance =
        ring::balance_stats(&ring, a.keys, a.replication, a.seed).map_err(CliError::usage)?;
    let new_node = NodeId(ring.nodes.iter().map(|n| n.0 + 1).max().unwrap_or(0));
    let (after, report) = ring.join(new_node, a.seed).map_err(CliError::usage)?;
    let sample = KeySample {
        keys: a.keys,
        replication: a.replication,
        seed: a.seed,
        value_size: a.value_size,
    };
    let join = report
        .with_key_estimate(&ring, &after, &sample)
        .map_err(CliError::usage)?;
    Ok((
        ring,
        RingStatsReport {
            strategy,
            balance,
            join,
        },
    ))
}

fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let context = format!("writing {}", path.display());
    let file = File::create(path).map_err(CliError::io(context.clone()))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Io {
        context: context.clone(),
        source: io::Error::other(e),
    })?;
    w.flush().map_err(CliError::io(context))
}

fn cmd_ring_stats(a: &RingStatsArgs, out: &mut dyn Write) -> Result<Exit, CliError> {
    let (ring, report) = ring_stats(a)?;
    if let Some(path) = &a.ring_out {
        write_json_file(path, &ring)?;
    }
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    )
    .map_err(stdout_err)?;
    Ok(Exit::Ok)
}
