//! Fluid, event-driven simulation of node-by-node scale-out.
//!
//! Writes and migration are continuous byte flows whose rates stay constant
//! between events, so the time of the next event is always found in closed
//! form and there is no time step. A run goes through the following cycle
//! until it reaches `n_target` nodes or breaks down:
//!
//! 1. **Fill.** Every node ingests its write share. When the first node's
//!    fill level reaches `μS` an expansion is triggered.
//! 2. **Join.** One node joins and pulls `1/(N+1)` of every old node's data.
//!    * Concurrent: writes are routed by the post-join ownership right away and
//!      migration uses whatever inbound bandwidth the joining node has left.
//!    * Clear: writes are parked in a backlog and migration uses the full
//!      bandwidth.
//! 3. **Catch-up** (clear only). Writes resume and every node drains the
//!    backlog with the bandwidth its writes leave free.
//!
//! Three breakdowns are detected:
//!
//! * [`BreakdownKind::StorageOverflow`]: some node holds more than `S` bytes.
//! * [`BreakdownKind::ExpansionOverlap`]: some node reaches `μS` again while a
//!   join is still running.
//! * [`BreakdownKind::CatchupStarvation`]: the next expansion triggers while
//!   backlog is still pending.
//!
//! Bytes replayed from the backlog are stored but tracked separately and do
//! not count toward the `μS` trigger; the trigger follows the fresh write
//! stream.

use std::cmp::Ordering;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{self, BoundKind, ClusterParams, Scenario, StabilizationMode, WorkloadKind};

/// Bisection iteration cap for [`feasibility_threshold`].
pub const MAX_BISECTION_STEPS: usize = 60;

/// Smallest relative tolerance accepted by [`feasibility_threshold`].
pub const MIN_TOLERANCE: f64 = 1e-6;

/// Relative slack when deciding that a level has been reached.
const LEVEL_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error(
        "join can never finish: write traffic {write_share} B/s per node uses all {bandwidth} B/s"
    )]
    InsufficientBandwidth { write_share: f64, bandwidth: f64 },
    #[error("node-count range is empty")]
    EmptyRange,
}

impl From<bounds::BoundsError> for SimError {
    fn from(e: bounds::BoundsError) -> Self {
        SimError::InvalidConfig(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// `params.n` is the initial cluster size.
    pub params: ClusterParams,
    pub mode: StabilizationMode,
    pub workload: WorkloadKind,
    /// Stop once the cluster has grown to this many nodes.
    pub n_target: u64,
    /// Fraction of `μS` every node holds at time zero.
    pub initial_fill: f64,
    /// Seconds; may be infinite.
    pub max_sim_time: f64,
}

impl SimConfig {
    pub fn scenario(&self) -> Scenario {
        Scenario::new(self.workload.pattern(), self.mode)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.params.validate()?;
        let rate = match self.workload {
            WorkloadKind::IncreasingPerNode(r) | WorkloadKind::StableTotal(r) => r,
        };
        if !(rate.is_finite() && rate >= 0.0) {
            return Err(SimError::InvalidConfig(format!(
                "write rate must be finite and non-negative, got {rate}"
            )));
        }
        if self.n_target <= self.params.n {
            return Err(SimError::InvalidConfig(format!(
                "n_target ({}) must exceed the initial size ({})",
                self.n_target, self.params.n
            )));
        }
        if !(self.initial_fill >= 0.0 && self.initial_fill <= 1.0) {
            return Err(SimError::InvalidConfig(format!(
                "initial_fill must lie in [0, 1], got {}",
                self.initial_fill
            )));
        }
        if self.max_sim_time.is_nan() || self.max_sim_time <= 0.0 {
            return Err(SimError::InvalidConfig(format!(
                "max_sim_time must be positive, got {}",
                self.max_sim_time
            )));
        }
        Ok(())
    }
}

/// Byte flows of one node. All rates are bytes/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeFlow {
    pub node: u32,
    /// Bytes on disk, including replayed backlog.
    pub stored: f64,
    /// Part of `stored` that arrived through backlog replay.
    pub replayed: f64,
    pub write_in_rate: f64,
    pub migration_out_rate: f64,
    pub migration_in_rate: f64,
    pub catchup_in_rate: f64,
    /// Bytes this node still has to hand to the joining node.
    pub remaining_migration: f64,
    /// Share of this node's outgoing migration that is replayed data.
    replay_share: f64,
}

impl NodeFlow {
    fn new(node: u32, stored: f64) -> Self {
        Self {
            node,
            stored,
            replayed: 0.0,
            write_in_rate: 0.0,
            migration_out_rate: 0.0,
            migration_in_rate: 0.0,
            catchup_in_rate: 0.0,
            remaining_migration: 0.0,
            replay_share: 0.0,
        }
    }

    /// Level compared against `μS` for expansion triggers.
    pub fn fill(&self) -> f64 {
        self.stored - self.replayed
    }

    fn stored_rate(&self) -> f64 {
        self.write_in_rate + self.migration_in_rate + self.catchup_in_rate - self.migration_out_rate
    }
}

/// Writes held back by a clear join.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Backlog {
    pub accumulated: f64,
    /// Total drain rate across all nodes, bytes/s.
    pub drain_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BreakdownKind {
    /// A node ran out of storage.
    StorageOverflow,
    /// A node filled up to the trigger level before the running join ended.
    ExpansionOverlap,
    /// The next expansion triggered before the backlog was drained.
    CatchupStarvation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum EventKind {
    ExpansionTriggered {
        n: u64,
    },
    JoinStarted {
        n: u64,
    },
    JoinCompleted {
        n: u64,
        duration: f64,
        migrated: f64,
    },
    CatchupCompleted {
        n: u64,
        duration: f64,
    },
    Breakdown {
        kind: BreakdownKind,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimEvent {
    pub time: f64,
    pub kind: EventKind,
    /// Nodes that have finished joining.
    pub n: u64,
    /// Stored bytes per node, joining node last.
    pub stored: Vec<f64>,
    pub backlog: f64,
    /// Bytes written by clients since time zero.
    pub written: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status")]
pub enum SimOutcome {
    Stabilized {
        final_n: u64,
        total_time: f64,
    },
    Breakdown {
        kind: BreakdownKind,
        at_n: u64,
        at_time: f64,
    },
    MaxTimeExceeded {
        n: u64,
        time: f64,
    },
}

impl SimOutcome {
    pub fn is_stabilized(&self) -> bool {
        matches!(self, SimOutcome::Stabilized { .. })
    }

    pub fn breakdown_kind(&self) -> Option<BreakdownKind> {
        match self {
            SimOutcome::Breakdown { kind, .. } => Some(*kind),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JoinRecord {
    pub n: u64,
    pub duration: f64,
    pub migrated: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatchupRecord {
    pub n: u64,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimSummary {
    pub scenario: Scenario,
    pub outcome: SimOutcome,
    pub joins: Vec<JoinRecord>,
    pub catchups: Vec<CatchupRecord>,
    pub event_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimRun {
    pub config: SimConfig,
    pub events: Vec<SimEvent>,
    pub outcome: SimOutcome,
    /// Node state when the run ended.
    pub nodes: Vec<NodeFlow>,
}

impl SimRun {
    pub fn joins(&self) -> Vec<JoinRecord> {
        self.events
            .iter()
            .filter_map(|e| match e.kind {
                EventKind::JoinCompleted {
                    n,
                    duration,
                    migrated,
                } => Some(JoinRecord {
                    n,
                    duration,
                    migrated,
                }),
                _ => None,
            })
            .collect()
    }

    pub fn catchups(&self) -> Vec<CatchupRecord> {
        self.events
            .iter()
            .filter_map(|e| match e.kind {
                EventKind::CatchupCompleted { n, duration } => Some(CatchupRecord { n, duration }),
                _ => None,
            })
            .collect()
    }

    pub fn summary(&self) -> SimSummary {
        SimSummary {
            scenario: self.config.scenario(),
            outcome: self.outcome,
            joins: self.joins(),
            catchups: self.catchups(),
            event_count: self.events.len(),
        }
    }

    /// One JSON object per event, newline terminated.
    pub fn write_trace<W: Write>(&self, mut out: W) -> io::Result<()> {
        for event in &self.events {
            serde_json::to_writer(&mut out, event)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
enum Phase {
    Filling {
        catchup_started: Option<f64>,
    },
    Joining {
        started: f64,
        inbound: f64,
        volume: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Pending {
    JoinDone,
    CatchupDone,
    Trigger(usize),
    Overflow(usize),
}

impl Pending {
    /// Tie-break for simultaneous events.
    fn rank(&self) -> u8 {
        match self {
            Pending::JoinDone | Pending::CatchupDone => 0,
            Pending::Trigger(_) => 1,
            Pending::Overflow(_) => 2,
        }
    }
}

/// Seconds until `value` moving at `rate` reaches `level`; zero if it is
/// already there and not falling.
fn time_to_reach(level: f64, value: f64, rate: f64) -> Option<f64> {
    if value >= level * (1.0 - LEVEL_EPS) {
        (rate >= 0.0).then_some(0.0)
    } else if rate > 0.0 {
        Some((level - value) / rate)
    } else {
        None
    }
}

/// Seconds until `value` strictly exceeds `level`.
fn time_to_exceed(level: f64, value: f64, rate: f64) -> Option<f64> {
    if value > level * (1.0 + LEVEL_EPS) {
        Some(0.0)
    } else if value >= level * (1.0 - LEVEL_EPS) {
        (rate > 0.0).then_some(0.0)
    } else if rate > 0.0 {
        Some((level - value) / rate)
    } else {
        None
    }
}

struct Engine {
    cfg: SimConfig,
    time: f64,
    members: u64,
    nodes: Vec<NodeFlow>,
    backlog: Backlog,
    backlog_inflow: f64,
    written: f64,
    write_rate: f64,
    phase: Phase,
    events: Vec<SimEvent>,
}

impl Engine {
    fn new(cfg: &SimConfig) -> Self {
        let prefill = cfg.initial_fill * cfg.params.mu * cfg.params.storage;
        Self {
            cfg: *cfg,
            time: 0.0,
            members: cfg.params.n,
            nodes: (0..cfg.params.n)
                .map(|i| NodeFlow::new(i as u32, prefill))
                .collect(),
            backlog: Backlog::default(),
            backlog_inflow: 0.0,
            written: 0.0,
            write_rate: 0.0,
            phase: Phase::Filling {
                catchup_started: None,
            },
            events: Vec::new(),
        }
    }

    fn trigger_level(&self) -> f64 {
        self.cfg.params.mu * self.cfg.params.storage
    }

    fn emit(&mut self, kind: EventKind) {
        self.events.push(SimEvent {
            time: self.time,
            kind,
            n: self.members,
            stored: self.nodes.iter().map(|f| f.stored).collect(),
            backlog: self.backlog.accumulated,
            written: self.written,
        });
    }

    /// Recomputes every rate for the current phase.
    fn set_rates(&mut self) {
        let b = self.cfg.params.bandwidth;
        let v = self.cfg.params.value_size;
        for f in &mut self.nodes {
            f.write_in_rate = 0.0;
            f.migration_out_rate = 0.0;
            f.migration_in_rate = 0.0;
            f.catchup_in_rate = 0.0;
        }
        self.backlog_inflow = 0.0;
        self.backlog.drain_rate = 0.0;

        match self.phase {
            Phase::Filling { .. } => {
                let share = self.cfg.workload.per_node_rate(self.members) * v;
                let drain = if self.backlog.accumulated > 0.0 {
                    (b - share).max(0.0)
                } else {
                    0.0
                };
                for f in &mut self.nodes {
                    f.write_in_rate = share;
                    f.catchup_in_rate = drain;
                }
                self.backlog.drain_rate = drain * self.nodes.len() as f64;
                self.write_rate = self.cfg.workload.total_rate(self.members) * v;
            }
            Phase::Joining { inbound, .. } => {
                let after = self.members + 1;
                let remaining: f64 = self.nodes.iter().map(|f| f.remaining_migration).sum();
                let joiner = self.nodes.len() - 1;
                let mut replay_in = 0.0;
                for f in &mut self.nodes[..joiner] {
                    f.migration_out_rate = if remaining > 0.0 {
                        inbound * f.remaining_migration / remaining
                    } else {
                        0.0
                    };
                    replay_in += f.migration_out_rate * f.replay_share;
                }
                self.nodes[joiner].migration_in_rate = inbound;
                self.nodes[joiner].replay_share = if inbound > 0.0 {
                    replay_in / inbound
                } else {
                    0.0
                };
                self.write_rate = self.cfg.workload.total_rate(after) * v;
                match self.cfg.mode {
                    StabilizationMode::Concurrent => {
                        let share = self.cfg.workload.per_node_rate(after) * v;
                        for f in &mut self.nodes {
                            f.write_in_rate = share;
                        }
                    }
                    StabilizationMode::Clear => self.backlog_inflow = self.write_rate,
                }
            }
        }
    }

    fn replayed_rate(&self, i: usize) -> f64 {
        let f = &self.nodes[i];
        f.catchup_in_rate + f.migration_in_rate * f.replay_share
            - f.migration_out_rate * f.replay_share
    }

    fn next_event(&self) -> Option<(f64, Pending)> {
        let mut candidates: Vec<(f64, Pending)> = Vec::new();
        match self.phase {
            Phase::Joining { inbound, .. } => {
                let remaining: f64 = self.nodes.iter().map(|f| f.remaining_migration).sum();
                if inbound > 0.0 {
                    candidates.push((remaining / inbound, Pending::JoinDone));
                }
            }
            Phase::Filling { .. } => {
                if self.backlog.accumulated > 0.0 && self.backlog.drain_rate > 0.0 {
                    candidates.push((
                        self.backlog.accumulated / self.backlog.drain_rate,
                        Pending::CatchupDone,
                    ));
                }
            }
        }
        let level = self.trigger_level();
        let storage = self.cfg.params.storage;
        for (i, f) in self.nodes.iter().enumerate() {
            let stored_rate = f.stored_rate();
            let fill_rate = stored_rate - self.replayed_rate(i);
            if let Some(dt) = time_to_reach(level, f.fill(), fill_rate) {
                candidates.push((dt, Pending::Trigger(i)));
            }
            if let Some(dt) = time_to_exceed(storage, f.stored, stored_rate) {
                candidates.push((dt, Pending::Overflow(i)));
            }
        }
        candidates.into_iter().min_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(Ordering::Equal)
                .then(a.1.rank().cmp(&b.1.rank()))
                .then(a.1.cmp(&b.1))
        })
    }

    fn advance(&mut self, dt: f64) {
        if dt <= 0.0 {
            return;
        }
        for i in 0..self.nodes.len() {
            let replayed_rate = self.replayed_rate(i);
            let f = &mut self.nodes[i];
            f.stored += f.stored_rate() * dt;
            f.replayed += replayed_rate * dt;
            f.remaining_migration = (f.remaining_migration - f.migration_out_rate * dt).max(0.0);
        }
        self.backlog.accumulated = (self.backlog.accumulated
            + (self.backlog_inflow - self.backlog.drain_rate) * dt)
            .max(0.0);
        self.written += self.write_rate * dt;
        self.time += dt;
    }

    fn start_join(&mut self) -> Result<(), SimError> {
        let p = self.cfg.params;
        let after = self.members + 1;
        let inbound = match self.cfg.mode {
            StabilizationMode::Concurrent => {
                let share = self.cfg.workload.per_node_rate(after) * p.value_size;
                if share >= p.bandwidth {
                    return Err(SimError::InsufficientBandwidth {
                        write_share: share,
                        bandwidth: p.bandwidth,
                    });
                }
                p.bandwidth - share
            }
            StabilizationMode::Clear => p.bandwidth,
        };
        let mut volume = 0.0;
        for f in &mut self.nodes {
            f.remaining_migration = f.stored / after as f64;
            f.replay_share = if f.stored > 0.0 {
                f.replayed / f.stored
            } else {
                0.0
            };
            volume += f.remaining_migration;
        }
        self.emit(EventKind::ExpansionTriggered { n: self.members });
        self.nodes.push(NodeFlow::new(self.members as u32, 0.0));
        self.phase = Phase::Joining {
            started: self.time,
            inbound,
            volume,
        };
        self.emit(EventKind::JoinStarted { n: after });
        Ok(())
    }

    fn finish(&mut self, outcome: SimOutcome) -> SimRun {
        SimRun {
            config: self.cfg,
            events: std::mem::take(&mut self.events),
            outcome,
            nodes: self.nodes.clone(),
        }
    }

    fn breakdown(&mut self, kind: BreakdownKind) -> SimRun {
        self.emit(EventKind::Breakdown { kind });
        let outcome = SimOutcome::Breakdown {
            kind,
            at_n: self.members,
            at_time: self.time,
        };
        self.finish(outcome)
    }

    fn stabilized(&mut self) -> SimRun {
        let outcome = SimOutcome::Stabilized {
            final_n: self.members,
            total_time: self.time,
        };
        self.finish(outcome)
    }

    fn run(mut self) -> Result<SimRun, SimError> {
        loop {
            self.set_rates();
            let Some((dt, pending)) = self
                .next_event()
                .filter(|(dt, _)| self.time + dt <= self.cfg.max_sim_time)
            else {
                if self.cfg.max_sim_time.is_finite() {
                    self.advance(self.cfg.max_sim_time - self.time);
                }
                let outcome = SimOutcome::MaxTimeExceeded {
                    n: self.members,
                    time: self.time,
                };
                return Ok(self.finish(outcome));
            };
            self.advance(dt);
            match (pending, self.phase) {
                (Pending::Overflow(_), _) => {
                    return Ok(self.breakdown(BreakdownKind::StorageOverflow))
                }
                (Pending::Trigger(_), Phase::Joining { .. }) => {
                    return Ok(self.breakdown(BreakdownKind::ExpansionOverlap))
                }
                (Pending::Trigger(_), Phase::Filling { .. }) => {
                    if self.backlog.accumulated > 0.0 {
                        self.emit(EventKind::ExpansionTriggered { n: self.members });
                        return Ok(self.breakdown(BreakdownKind::CatchupStarvation));
                    }
                    self.start_join()?;
                }
                (
                    Pending::JoinDone,
                    Phase::Joining {
                        started, volume, ..
                    },
                ) => {
                    for f in &mut self.nodes {
                        f.remaining_migration = 0.0;
                        f.replay_share = 0.0;
                    }
                    self.members += 1;
                    self.emit(EventKind::JoinCompleted {
                        n: self.members,
                        duration: self.time - started,
                        migrated: volume,
                    });
                    match self.cfg.mode {
                        StabilizationMode::Concurrent => {
                            self.phase = Phase::Filling {
                                catchup_started: None,
                            };
                            if self.members >= self.cfg.n_target {
                                return Ok(self.stabilized());
                            }
                        }
                        StabilizationMode::Clear => {
                            if self.backlog.accumulated > 0.0 {
                                self.phase = Phase::Filling {
                                    catchup_started: Some(self.time),
                                };
                            } else {
                                self.phase = Phase::Filling {
                                    catchup_started: None,
                                };
                                self.emit(EventKind::CatchupCompleted {
                                    n: self.members,
                                    duration: 0.0,
                                });
                                if self.members >= self.cfg.n_target {
                                    return Ok(self.stabilized());
                                }
                            }
                        }
                    }
                }
                (Pending::CatchupDone, Phase::Filling { catchup_started }) => {
                    self.backlog.accumulated = 0.0;
                    self.phase = Phase::Filling {
                        catchup_started: None,
                    };
                    self.emit(EventKind::CatchupCompleted {
                        n: self.members,
                        duration: self.time - catchup_started.unwrap_or(self.time),
                    });
                    if self.members >= self.cfg.n_target {
                        return Ok(self.stabilized());
                    }
                }
                (pending, phase) => {
                    unreachable!("event {pending:?} cannot occur in phase {phase:?}")
                }
            }
        }
    }
}

/// Simulates the scale-out described by `config`.
pub fn run(config: &SimConfig) -> Result<SimRun, SimError> {
    config.validate()?;
    Engine::new(config).run()
}

/// Configuration for a single expansion `n -> n+1` from nodes prefilled to
/// `μS`, at per-node rate `lambda`.
pub fn single_expansion(template: &SimConfig, n: u64, lambda: f64) -> SimConfig {
    SimConfig {
        params: template.params.with_n(n),
        mode: template.mode,
        workload: WorkloadKind::from_per_node(template.workload.pattern(), lambda, n),
        n_target: n + 1,
        initial_fill: 1.0,
        max_sim_time: f64::INFINITY,
    }
}

/// Largest per-node write rate for which a single expansion `n -> n+1`
/// stabilizes, found by bisection over `(0, b/v)`.
///
/// Uses the template's cluster parameters (except `n`), stabilization mode and
/// write pattern; the template's rate, target and time limit are ignored.
pub fn feasibility_threshold(template: &SimConfig, n: u64, tol: f64) -> Result<f64, SimError> {
    if tol.is_nan() || tol < MIN_TOLERANCE {
        return Err(SimError::InvalidConfig(format!(
            "tolerance must be at least {MIN_TOLERANCE}, got {tol}"
        )));
    }
    let stabilizes = |lambda: f64| -> Result<bool, SimError> {
        match run(&single_expansion(template, n, lambda)) {
            Ok(r) => Ok(r.outcome.is_stabilized()),
            Err(SimError::InsufficientBandwidth { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    };
    let (mut lo, mut hi) = (0.0, template.params.write_capacity());
    for _ in 0..MAX_BISECTION_STEPS {
        if hi - lo <= tol * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if stabilizes(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationRow {
    pub n: u64,
    pub scenario: Scenario,
    pub simulated: f64,
    pub analytic: f64,
    pub binding_kind: BoundKind,
    pub rel_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub tol: f64,
    pub rows: Vec<ValidationRow>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn max_rel_error(&self) -> f64 {
        self.rows.iter().map(|r| r.rel_error).fold(0.0, f64::max)
    }
}

/// Compares the simulated threshold with the analytic binding bound for
/// every `(n, scenario)` pair. The bisection runs at `max(tol/10, 1e-6)`.
pub fn validate_against_bounds(
    ns: &[u64],
    scenarios: &[Scenario],
    params: &ClusterParams,
    tol: f64,
) -> Result<ValidationReport, SimError> {
    if ns.is_empty() || scenarios.is_empty() {
        return Err(SimError::EmptyRange);
    }
    params.validate()?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(SimError::InvalidConfig(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let search_tol = (tol / 10.0).max(MIN_TOLERANCE);
    let mut rows = Vec::with_capacity(ns.len() * scenarios.len());
    for &scenario in scenarios {
        let template = SimConfig {
            params: *params,
            mode: scenario.mode,
            workload: WorkloadKind::from_per_node(scenario.workload, 0.0, params.n),
            n_target: params.n + 1,
            initial_fill: 1.0,
            max_sim_time: f64::INFINITY,
        };
        for &n in ns {
            if n == 0 {
                return Err(SimError::InvalidConfig(
                    "node count must be at least 1".into(),
                ));
            }
            let simulated = feasibility_threshold(&template, n, search_tol)?;
            let binding = bounds::bound_report(&params.with_n(n), scenario).binding;
            let rel_error = ((simulated - binding.value) / binding.value).abs();
            rows.push(ValidationRow {
                n,
                scenario,
                simulated,
                analytic: binding.value,
                binding_kind: binding.kind,
                rel_error,
                pass: rel_error <= tol,
            });
        }
    }
    Ok(ValidationReport { tol, rows })
}
