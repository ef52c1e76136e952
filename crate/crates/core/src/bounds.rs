//! Closed-form feasibility model for one-node-at-a-time scale-out.
//!
//! Every bound is an upper limit on the per-node write rate λ (writes/s per
//! node). All of them are strict: a rate equal to the bound is infeasible.
//! With `B = bandwidth / value_size` the bounds are
//!
//! | scenario               | storage-oriented       | bandwidth-oriented | time-oriented                        |
//! |------------------------|------------------------|--------------------|--------------------------------------|
//! | increasing, concurrent | `(1 - N/(N+1)·μ)·B`    | `B/(N+1)`          | n/a                                  |
//! | increasing, clear      | n/a                    | n/a                | `(√(4N+1) - 1)/(2N)·B`               |
//! | stable, concurrent     | `(1 + 1/N - μ)·B`      | `B/N`              | n/a                                  |
//! | stable, clear          | n/a                    | n/a                | `(N+1)(√(4N+1) - 1)/(2N²)·B`         |
//!
//! Replication cancels out of every bound; it only matters for
//! [`keys_capacity`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest cluster size searched by [`min_feasible_n`].
pub const MAX_SEARCH_N: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("invalid cluster parameters: {0}")]
    InvalidParams(String),
    #[error("join never finishes: write traffic {write_share} B/s leaves no bandwidth out of {bandwidth} B/s")]
    InsufficientBandwidth { write_share: f64, bandwidth: f64 },
    #[error("alpha must lie in (0, 1), got {0}")]
    AlphaOutOfRange(f64),
    #[error("write rate must be positive and finite, got {0}")]
    InvalidRate(f64),
}

/// Static description of a symmetric cluster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterParams {
    /// Node count `N`.
    pub n: u64,
    /// Per-node network bandwidth `b`, bytes/s.
    pub bandwidth: f64,
    /// Mean size of one written key-value pair `v`, bytes.
    pub value_size: f64,
    /// Fill ratio `μ` at which an expansion is triggered.
    pub mu: f64,
    /// Replication factor `r`.
    pub replication: u32,
    /// Per-node storage `S`, bytes.
    pub storage: f64,
}

impl ClusterParams {
    /// 1 Gbps.
    pub const DEFAULT_BANDWIDTH: f64 = 125_000_000.0;
    pub const DEFAULT_VALUE_SIZE: f64 = 16.0;
    /// 1 TB.
    pub const DEFAULT_STORAGE: f64 = 1e12;

    pub fn new(
        n: u64,
        bandwidth: f64,
        value_size: f64,
        mu: f64,
        replication: u32,
        storage: f64,
    ) -> Result<Self, BoundsError> {
        let params = Self {
            n,
            bandwidth,
            value_size,
            mu,
            replication,
            storage,
        };
        params.validate()?;
        Ok(params)
    }

    /// Defaults used throughout the numerical examples: 1 Gbps, 16 B values,
    /// r = 1, S = 1 TB.
    pub fn with_defaults(n: u64, mu: f64) -> Result<Self, BoundsError> {
        Self::new(
            n,
            Self::DEFAULT_BANDWIDTH,
            Self::DEFAULT_VALUE_SIZE,
            mu,
            1,
            Self::DEFAULT_STORAGE,
        )
    }

    pub fn validate(&self) -> Result<(), BoundsError> {
        let invalid = |msg: String| Err(BoundsError::InvalidParams(msg));
        if self.n == 0 {
            return invalid("n must be at least 1".into());
        }
        for (name, value) in [
            ("bandwidth", self.bandwidth),
            ("value_size", self.value_size),
            ("storage", self.storage),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return invalid(format!("{name} must be positive and finite, got {value}"));
            }
        }
        if !(self.mu > 0.0 && self.mu <= 1.0) {
            return invalid(format!("mu must lie in (0, 1], got {}", self.mu));
        }
        if self.replication == 0 {
            return invalid("replication must be at least 1".into());
        }
        Ok(())
    }

    /// Same cluster with a different node count.
    pub fn with_n(&self, n: u64) -> Self {
        Self { n, ..*self }
    }

    /// `B = b/v`: the most writes per second one node can ingest.
    pub fn write_capacity(&self) -> f64 {
        self.bandwidth / self.value_size
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }
}

/// How the offered write load evolves as the cluster grows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WritePattern {
    /// Every node keeps receiving λ writes/s, so the total grows with N.
    Increasing,
    /// The system-wide rate stays fixed; the per-node share shrinks as N grows.
    Stable,
}

/// A concrete write workload.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorkloadKind {
    /// λ writes/s on every node.
    IncreasingPerNode(f64),
    /// Writes/s for the whole system.
    StableTotal(f64),
}

impl WorkloadKind {
    pub fn pattern(&self) -> WritePattern {
        match self {
            Self::IncreasingPerNode(_) => WritePattern::Increasing,
            Self::StableTotal(_) => WritePattern::Stable,
        }
    }

    /// Builds the workload whose per-node rate at size `n` is `lambda`.
    pub fn from_per_node(pattern: WritePattern, lambda: f64, n: u64) -> Self {
        match pattern {
            WritePattern::Increasing => Self::IncreasingPerNode(lambda),
            WritePattern::Stable => Self::StableTotal(lambda * n as f64),
        }
    }

    /// Average write rate of a single node in an `n`-node cluster.
    pub fn per_node_rate(&self, n: u64) -> f64 {
        match *self {
            Self::IncreasingPerNode(lambda) => lambda,
            Self::StableTotal(total) => total / n as f64,
        }
    }

    /// System-wide write rate with `n` nodes.
    pub fn total_rate(&self, n: u64) -> f64 {
        match *self {
            Self::IncreasingPerNode(lambda) => lambda * n as f64,
            Self::StableTotal(total) => total,
        }
    }

    pub fn validate(&self) -> Result<(), BoundsError> {
        let rate = match *self {
            Self::IncreasingPerNode(r) | Self::StableTotal(r) => r,
        };
        if rate.is_finite() && rate > 0.0 {
            Ok(())
        } else {
            Err(BoundsError::InvalidRate(rate))
        }
    }
}

/// Whether the cluster keeps accepting writes while a join is in progress.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilizationMode {
    /// Writes are served during the join.
    Concurrent,
    /// Writes are held back during the join and replayed afterwards.
    Clear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scenario {
    pub workload: WritePattern,
    pub mode: StabilizationMode,
}

impl Scenario {
    pub const INCREASING_CONCURRENT: Scenario =
        Scenario::new(WritePattern::Increasing, StabilizationMode::Concurrent);
    pub const INCREASING_CLEAR: Scenario =
        Scenario::new(WritePattern::Increasing, StabilizationMode::Clear);
    pub const STABLE_CONCURRENT: Scenario =
        Scenario::new(WritePattern::Stable, StabilizationMode::Concurrent);
    pub const STABLE_CLEAR: Scenario =
        Scenario::new(WritePattern::Stable, StabilizationMode::Clear);

    pub const ALL: [Scenario; 4] = [
        Self::INCREASING_CONCURRENT,
        Self::INCREASING_CLEAR,
        Self::STABLE_CONCURRENT,
        Self::STABLE_CLEAR,
    ];

    pub const fn new(workload: WritePattern, mode: StabilizationMode) -> Self {
        Self { workload, mode }
    }

    pub fn name(&self) -> &'static str {
        match (self.workload, self.mode) {
            (WritePattern::Increasing, StabilizationMode::Concurrent) => "increasing-concurrent",
            (WritePattern::Increasing, StabilizationMode::Clear) => "increasing-clear",
            (WritePattern::Stable, StabilizationMode::Concurrent) => "stable-concurrent",
            (WritePattern::Stable, StabilizationMode::Clear) => "stable-clear",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| {
                format!(
                    "unknown scenario `{s}` (expected one of: increasing-concurrent, increasing-clear, stable-concurrent, stable-clear)"
                )
            })
    }
}

impl Serialize for Scenario {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Scenario {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BoundKind {
    StorageOriented,
    BandwidthOriented,
    TimeOriented,
}

impl BoundKind {
    pub const ALL: [BoundKind; 3] = [
        Self::StorageOriented,
        Self::BandwidthOriented,
        Self::TimeOriented,
    ];

    /// Short label used in CSV output.
    pub fn label(&self) -> &'static str {
        match self {
            Self::StorageOriented => "storage",
            Self::BandwidthOriented => "bandwidth",
            Self::TimeOriented => "time",
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

// ---------------------------------------------------------------------------
// The six bounds.
// ---------------------------------------------------------------------------

/// Storage-oriented bound under increasing writes: `(1 - N/(N+1)·μ)·B`.
pub fn storage_bound_increasing(params: &ClusterParams) -> f64 {
    let n = params.nf();
    (n + 1.0 - n * params.mu) * params.write_capacity() / (n + 1.0)
}

/// Bandwidth-oriented bound under increasing writes: `B/(N+1)`.
pub fn bandwidth_bound_increasing(params: &ClusterParams) -> f64 {
    params.write_capacity() / (params.nf() + 1.0)
}

/// Time-oriented bound for clear stabilization under increasing writes:
/// `(√(4N+1) - 1)/(2N)·B`.
pub fn time_bound_clear_increasing(params: &ClusterParams) -> f64 {
    let n = params.nf();
    ((4.0 * n + 1.0).sqrt() - 1.0) / (2.0 * n) * params.write_capacity()
}

/// Storage-oriented bound under stable writes: `(1 + 1/N - μ)·B`.
pub fn storage_bound_stable(params: &ClusterParams) -> f64 {
    let n = params.nf();
    (n + 1.0 - n * params.mu) * params.write_capacity() / n
}

/// Bandwidth-oriented bound under stable writes: `B/N`. Equivalently the
/// system-wide rate `N·λ` must stay below what one node can ingest.
pub fn bandwidth_bound_stable(params: &ClusterParams) -> f64 {
    params.write_capacity() / params.nf()
}

/// Time-oriented bound for clear stabilization under stable writes:
/// `(N+1)(√(4N+1) - 1)/(2N²)·B`.
pub fn time_bound_clear_stable(params: &ClusterParams) -> f64 {
    let n = params.nf();
    (n + 1.0) * ((4.0 * n + 1.0).sqrt() - 1.0) / (2.0 * n * n) * params.write_capacity()
}

/// Value of one bound for a write pattern, regardless of whether it applies
/// to a particular stabilization mode.
pub fn bound_value(params: &ClusterParams, workload: WritePattern, kind: BoundKind) -> f64 {
    match (workload, kind) {
        (WritePattern::Increasing, BoundKind::StorageOriented) => storage_bound_increasing(params),
        (WritePattern::Increasing, BoundKind::BandwidthOriented) => {
            bandwidth_bound_increasing(params)
        }
        (WritePattern::Increasing, BoundKind::TimeOriented) => time_bound_clear_increasing(params),
        (WritePattern::Stable, BoundKind::StorageOriented) => storage_bound_stable(params),
        (WritePattern::Stable, BoundKind::BandwidthOriented) => bandwidth_bound_stable(params),
        (WritePattern::Stable, BoundKind::TimeOriented) => time_bound_clear_stable(params),
    }
}

/// Bound kinds derived for a stabilization mode.
pub fn applicable_kinds(mode: StabilizationMode) -> &'static [BoundKind] {
    match mode {
        StabilizationMode::Concurrent => {
            &[BoundKind::StorageOriented, BoundKind::BandwidthOriented]
        }
        StabilizationMode::Clear => &[BoundKind::TimeOriented],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub kind: BoundKind,
    /// Writes/s per node.
    pub value: f64,
    pub applicable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Binding {
    pub kind: BoundKind,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub scenario: Scenario,
    pub params: ClusterParams,
    pub entries: Vec<BoundEntry>,
    pub binding: Binding,
}

impl BoundReport {
    pub fn entry(&self, kind: BoundKind) -> &BoundEntry {
        self.entries
            .iter()
            .find(|e| e.kind == kind)
            .expect("report carries every bound kind")
    }

    pub fn applicable(&self) -> impl Iterator<Item = &BoundEntry> {
        self.entries.iter().filter(|e| e.applicable)
    }

    /// True when `lambda` (writes/s per node) is strictly below every
    /// applicable bound.
    pub fn is_feasible(&self, lambda: f64) -> bool {
        self.applicable().all(|e| lambda < e.value)
    }
}

/// Evaluates all three bound kinds for the scenario's write pattern and picks
/// the smallest applicable one. On ties the earlier kind in
/// [`BoundKind::ALL`] order wins.
pub fn bound_report(params: &ClusterParams, scenario: Scenario) -> BoundReport {
    let applicable = applicable_kinds(scenario.mode);
    let entries: Vec<BoundEntry> = BoundKind::ALL
        .iter()
        .map(|&kind| BoundEntry {
            kind,
            value: bound_value(params, scenario.workload, kind),
            applicable: applicable.contains(&kind),
        })
        .collect();
    let binding = entries
        .iter()
        .filter(|e| e.applicable)
        .fold(None::<Binding>, |best, e| match best {
            Some(b) if b.value <= e.value => Some(b),
            _ => Some(Binding {
                kind: e.kind,
                value: e.value,
            }),
        })
        .expect("every mode has at least one applicable bound");
    BoundReport {
        scenario,
        params: *params,
        entries,
        binding,
    }
}

/// Gap between the stable-writes and increasing-writes bounds at the same
/// cluster size, all in writes/s per node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioGap {
    /// `δ = 1/N - μ/(N+1)`; the storage gap divided by `B`.
    pub delta: f64,
    pub storage_gap: f64,
    pub bandwidth_gap: f64,
    pub time_gap: f64,
}

pub fn compare_scenarios(params: &ClusterParams) -> ScenarioGap {
    let n = params.nf();
    ScenarioGap {
        delta: 1.0 / n - params.mu / (n + 1.0),
        storage_gap: storage_bound_stable(params) - storage_bound_increasing(params),
        bandwidth_gap: bandwidth_bound_stable(params) - bandwidth_bound_increasing(params),
        time_gap: time_bound_clear_stable(params) - time_bound_clear_increasing(params),
    }
}

// ---------------------------------------------------------------------------
// Supporting quantities.
// ---------------------------------------------------------------------------

/// Keys held by the cluster when every node is filled to `μS`:
/// `K = μSN/(rv)`.
pub fn keys_capacity(params: &ClusterParams) -> f64 {
    params.mu * params.storage * params.nf() / (params.replication as f64 * params.value_size)
}

/// Bytes the joining node must pull from the `N` old nodes: `μSN/(N+1)`.
pub fn migration_volume(params: &ClusterParams) -> f64 {
    let n = params.nf();
    params.mu * params.storage * n / (n + 1.0)
}

/// Inbound bandwidth left for migration at the joining node while it also
/// absorbs its share of writes (`lambda` is the pre-join per-node rate).
pub fn join_bandwidth(params: &ClusterParams, workload: WritePattern, lambda: f64) -> f64 {
    let n = params.nf();
    let share = match workload {
        WritePattern::Increasing => lambda,
        WritePattern::Stable => n / (n + 1.0) * lambda,
    };
    params.bandwidth - share * params.value_size
}

/// Duration of the join of node `N+1`.
///
/// Concurrent joins move `rvK/(N+1)` bytes through the joining node's leftover
/// bandwidth; clear joins use the full bandwidth and ignore `lambda`.
pub fn stabilization_time(
    params: &ClusterParams,
    scenario: Scenario,
    lambda: f64,
) -> Result<f64, BoundsError> {
    let n = params.nf();
    let moved = params.replication as f64 * params.value_size * keys_capacity(params) / (n + 1.0);
    match scenario.mode {
        StabilizationMode::Clear => Ok(moved / params.bandwidth),
        StabilizationMode::Concurrent => {
            let b_join = join_bandwidth(params, scenario.workload, lambda);
            if b_join <= 0.0 {
                return Err(BoundsError::InsufficientBandwidth {
                    write_share: params.bandwidth - b_join,
                    bandwidth: params.bandwidth,
                });
            }
            Ok(moved / b_join)
        }
    }
}

fn check_alpha(alpha: f64) -> Result<(), BoundsError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(BoundsError::AlphaOutOfRange(alpha))
    }
}

/// Writes held back during a clear join, in bytes.
pub fn accumulated_backlog(
    params: &ClusterParams,
    alpha: f64,
    workload: WritePattern,
) -> Result<f64, BoundsError> {
    check_alpha(alpha)?;
    let n = params.nf();
    let mu_s = params.mu * params.storage;
    Ok(match workload {
        WritePattern::Increasing => mu_s * n * alpha,
        WritePattern::Stable => n * n / (n + 1.0) * mu_s * alpha,
    })
}

/// Per-node bandwidth available for draining the backlog once writes resume.
pub fn catchup_bandwidth(
    params: &ClusterParams,
    alpha: f64,
    workload: WritePattern,
) -> Result<f64, BoundsError> {
    check_alpha(alpha)?;
    let n = params.nf();
    Ok(match workload {
        WritePattern::Increasing => (1.0 - alpha) * params.bandwidth,
        WritePattern::Stable => (1.0 - n / (n + 1.0) * alpha) * params.bandwidth,
    })
}

/// Time to drain the clear-join backlog across all `N+1` nodes.
pub fn catchup_time(
    params: &ClusterParams,
    alpha: f64,
    workload: WritePattern,
) -> Result<f64, BoundsError> {
    let n = params.nf();
    let mu_s = params.mu * params.storage;
    check_alpha(alpha)?;
    Ok(match workload {
        WritePattern::Increasing => {
            mu_s * n * alpha / ((n + 1.0) * (1.0 - alpha) * params.bandwidth)
        }
        WritePattern::Stable => {
            n * n * mu_s * alpha / ((n + 1.0) * (n + 1.0 - n * alpha) * params.bandwidth)
        }
    })
}

/// Time between the expansion to `N+1` nodes and the next one.
pub fn inter_expansion_time(
    params: &ClusterParams,
    alpha: f64,
    workload: WritePattern,
) -> Result<f64, BoundsError> {
    check_alpha(alpha)?;
    let n = params.nf();
    let mu_s = params.mu * params.storage;
    Ok(match workload {
        WritePattern::Increasing => mu_s / ((n + 1.0) * alpha * params.bandwidth),
        WritePattern::Stable => mu_s / (n * alpha * params.bandwidth),
    })
}

/// Time for an empty cluster to reach its first expansion: `μS/(αb)`.
pub fn time_to_first_expansion(params: &ClusterParams, alpha: f64) -> Result<f64, BoundsError> {
    check_alpha(alpha)?;
    Ok(params.mu * params.storage / (alpha * params.bandwidth))
}

/// Fraction of a node's bandwidth consumed by its writes: `α = vλ/b`.
pub fn alpha(params: &ClusterParams, lambda: f64) -> f64 {
    params.value_size * lambda / params.bandwidth
}

/// Everything the model derives for one scenario at per-node rate `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedQuantities {
    pub keys_capacity: f64,
    pub stabilization_time: f64,
    /// Zero for concurrent stabilization.
    pub catchup_time: f64,
    pub inter_expansion_time: f64,
    pub time_to_first_expansion: f64,
    pub join_bandwidth: f64,
    /// Equal to `bandwidth` for concurrent stabilization.
    pub catchup_bandwidth: f64,
    /// Zero for concurrent stabilization.
    pub accumulated_backlog: f64,
    pub alpha: f64,
}

pub fn derived_quantities(
    params: &ClusterParams,
    scenario: Scenario,
    lambda: f64,
) -> Result<DerivedQuantities, BoundsError> {
    params.validate()?;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(BoundsError::InvalidRate(lambda));
    }
    let a = alpha(params, lambda);
    let t = stabilization_time(params, scenario, lambda)?;
    let (catchup, b_prime, backlog, b_join) = match scenario.mode {
        StabilizationMode::Concurrent => (
            0.0,
            params.bandwidth,
            0.0,
            join_bandwidth(params, scenario.workload, lambda),
        ),
        StabilizationMode::Clear => (
            catchup_time(params, a, scenario.workload)?,
            catchup_bandwidth(params, a, scenario.workload)?,
            accumulated_backlog(params, a, scenario.workload)?,
            params.bandwidth,
        ),
    };
    Ok(DerivedQuantities {
        keys_capacity: keys_capacity(params),
        stabilization_time: t,
        catchup_time: catchup,
        inter_expansion_time: inter_expansion_time(params, a, scenario.workload)?,
        time_to_first_expansion: time_to_first_expansion(params, a)?,
        join_bandwidth: b_join,
        catchup_bandwidth: b_prime,
        accumulated_backlog: backlog,
        alpha: a,
    })
}

/// Smallest cluster size at which `workload` is strictly below every bound in
/// `kinds` (or every applicable bound of `scenario` when `kinds` is `None`).
/// `params.n` is ignored. Returns `None` when no size up to
/// [`MAX_SEARCH_N`] qualifies.
pub fn min_feasible_n_with(
    params: &ClusterParams,
    scenario: Scenario,
    workload: WorkloadKind,
    kinds: Option<&[BoundKind]>,
) -> Option<u64> {
    let kinds = kinds.unwrap_or_else(|| applicable_kinds(scenario.mode));
    (1..=MAX_SEARCH_N).find(|&n| {
        let at_n = params.with_n(n);
        let lambda = workload.per_node_rate(n);
        kinds
            .iter()
            .all(|&kind| lambda < bound_value(&at_n, scenario.workload, kind))
    })
}

pub fn min_feasible_n(
    params: &ClusterParams,
    scenario: Scenario,
    workload: WorkloadKind,
) -> Option<u64> {
    min_feasible_n_with(params, scenario, workload, None)
}
