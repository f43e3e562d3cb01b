//! Deterministic time-stepped engine: radius-gated broadcast medium, the two
//! baseline controllers (periodic and idealized self-triggered), trace
//! recording, metric extraction, and CSV serialization.
//!
//! Tick semantics: inboxes are frozen before any agent steps, every agent
//! decides from its own state plus that snapshot, and all decisions apply
//! together — messages sent in step k are delivered at the start of step
//! k+1. Runs are bit-for-bit deterministic.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::controller::{
    broadcast_radius, control_input, evaluate_cells, refilter_potential_neighbors,
    step_constant, step_variable, uncertainty_now, AgentId, AgentRecord, AgentState,
    BroadcastMsg, ControlDecision, StepContext, VariableParams,
};
use crate::density::{objective_h, DensityField};
use crate::error::{Error, Result};
use crate::geometry::{Point2, SimplePolygon, GEOM_EPS};
use crate::partition::{dual_guaranteed_cell_disks, exact_voronoi_neighbors, UncertaintyDisk};

/// Which control/communication policy drives the agents.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ControllerKind {
    /// Event-triggered broadcasting at constant speed.
    EtbConstant,
    /// Event-triggered broadcasting with online speed adjustment.
    EtbVariable(VariableParams),
    /// Broadcast every step; moves on (near-)exact information.
    Periodic,
    /// Idealized request/response baseline with oracle neighbor knowledge.
    SelfTriggered,
}

impl ControllerKind {
    pub fn name(&self) -> &'static str {
        match self {
            ControllerKind::EtbConstant => "etb-constant",
            ControllerKind::EtbVariable(_) => "etb-variable",
            ControllerKind::Periodic => "periodic",
            ControllerKind::SelfTriggered => "self-triggered",
        }
    }

    pub const NAMES: [&'static str; 4] =
        ["etb-constant", "etb-variable", "periodic", "self-triggered"];

    /// Parses a controller name, instantiating the variable policy with the
    /// given timing parameters.
    pub fn parse(name: &str, delta_tb: f64, tau_d: f64) -> Result<Self> {
        match name {
            "etb-constant" => Ok(ControllerKind::EtbConstant),
            "etb-variable" => Ok(ControllerKind::EtbVariable(VariableParams { delta_tb, tau_d })),
            "periodic" => Ok(ControllerKind::Periodic),
            "self-triggered" => Ok(ControllerKind::SelfTriggered),
            other => Err(Error::InvalidScenario(format!(
                "unknown controller {other:?}; valid: {}",
                Self::NAMES.join(", ")
            ))),
        }
    }
}

/// A full simulation setup. `seed` is reserved for randomized tie-breaks;
/// the default pipeline has none, so it does not influence results.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub domain: SimplePolygon,
    pub density: DensityField,
    pub initial_positions: Vec<Point2>,
    pub s_max: f64,
    pub dt: f64,
    pub duration: f64,
    pub controller: ControllerKind,
    pub chords: usize,
    pub seed: u64,
    /// Sample the objective every this many steps.
    pub h_stride: usize,
    /// Override for the arrival tolerance; defaults to `s_max·dt/2`.
    pub eps_move: Option<f64>,
}

/// Deployment benchmark positions: eight agents in a 40 m × 40 m square.
pub fn paper_positions() -> Vec<Point2> {
    vec![
        Point2::new(11.8, 36.3),
        Point2::new(1.1, 6.0),
        Point2::new(11.7, 20.1),
        Point2::new(15.3, 5.5),
        Point2::new(11.6, 1.0),
        Point2::new(7.5, 9.1),
        Point2::new(17.0, 15.3),
        Point2::new(13.5, 6.3),
    ]
}

/// Two exponential bumps (100 m scale) at (20, 30) and (30, 10).
pub fn paper_density() -> DensityField {
    DensityField::SumOfExponentials {
        centers: vec![Point2::new(20.0, 30.0), Point2::new(30.0, 10.0)],
        scale: 100.0,
    }
}

impl Scenario {
    /// The benchmark deployment scenario: 8 agents, 40 m square, 1/60 s
    /// steps, 0.1 m/s speed cap, 600 s horizon.
    pub fn paper(controller: ControllerKind) -> Self {
        Scenario {
            domain: SimplePolygon::rectangle(0.0, 0.0, 40.0, 40.0).expect("square"),
            density: paper_density(),
            initial_positions: paper_positions(),
            s_max: 0.1,
            dt: 1.0 / 60.0,
            duration: 600.0,
            controller,
            chords: 16,
            seed: 0,
            h_stride: 60,
            eps_move: None,
        }
    }

    pub fn n_agents(&self) -> usize {
        self.initial_positions.len()
    }

    pub fn n_steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    /// Arrival band for the move condition. The default is just under a
    /// quarter of the per-step travel quantum `s_max·dt`: narrow enough that
    /// the constant-speed policy keeps re-aiming (and re-broadcasting) in its
    /// late phase instead of parking, wide enough that isolated agents and
    /// the variable-speed policy come to rest.
    pub fn eps_move_value(&self) -> f64 {
        self.eps_move.unwrap_or(0.24 * self.s_max * self.dt)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dt <= 0.0 || !self.dt.is_finite() {
            return Err(Error::InvalidScenario("time step must be positive".into()));
        }
        if self.duration < 0.0 || !self.duration.is_finite() {
            return Err(Error::InvalidScenario("duration must be nonnegative".into()));
        }
        if self.s_max <= 0.0 {
            return Err(Error::InvalidScenario("s_max must be positive".into()));
        }
        if self.chords < 2 {
            return Err(Error::InvalidScenario("chord count must be at least 2".into()));
        }
        if self.h_stride == 0 {
            return Err(Error::InvalidScenario("h_stride must be positive".into()));
        }
        if self.initial_positions.is_empty() {
            return Err(Error::InvalidScenario("need at least one agent".into()));
        }
        for (i, p) in self.initial_positions.iter().enumerate() {
            if !self.domain.contains(*p) {
                return Err(Error::InvalidScenario(format!(
                    "agent {i} starts outside the domain"
                )));
            }
            for (j, q) in self.initial_positions.iter().enumerate().skip(i + 1) {
                if p.dist(*q) < 1e-9 {
                    return Err(Error::InvalidScenario(format!(
                        "agents {i} and {j} share a position"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One trace row: the state of one agent at the start of one step, plus the
/// message (if any) it sent in that step.
#[derive(Clone, Debug)]
pub struct StepRecord {
    pub time: f64,
    pub agent: AgentId,
    pub position: Point2,
    /// Speed in force after this step's decision (equals the broadcast
    /// promise on broadcast rows).
    pub speed: f64,
    pub broadcast: bool,
    pub radius: f64,
    pub receivers: Vec<AgentId>,
}

/// Everything a run produces. Rows cover steps `0..n_steps` plus one final
/// snapshot row per agent with no decision attached.
#[derive(Clone, Debug)]
pub struct SimTrace {
    pub controller: &'static str,
    pub dt: f64,
    pub n_agents: usize,
    pub rows: Vec<StepRecord>,
    /// `(t, H(t))` samples every `h_stride` steps plus the final time.
    pub h_samples: Vec<(f64, f64)>,
    pub msgs_per_step: Vec<u32>,
}

impl SimTrace {
    pub fn total_messages(&self) -> u64 {
        self.msgs_per_step.iter().map(|&m| m as u64).sum()
    }

    pub fn final_positions(&self) -> Vec<Point2> {
        let n = self.n_agents;
        self.rows[self.rows.len() - n..]
            .iter()
            .map(|r| r.position)
            .collect()
    }

    pub fn initial_h(&self) -> f64 {
        self.h_samples.first().map(|&(_, h)| h).unwrap_or(f64::NAN)
    }

    pub fn final_h(&self) -> f64 {
        self.h_samples.last().map(|&(_, h)| h).unwrap_or(f64::NAN)
    }

    /// Trace CSV: `t,agent,x,y,speed,broadcast,radius,receivers` with the
    /// version header. Receivers are `;`-joined agent ids.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.rows.len() * 48 + 128);
        out.push_str("# etb-trace v1\n");
        let _ = writeln!(out, "# controller={}", self.controller);
        out.push_str("t,agent,x,y,speed,broadcast,radius,receivers\n");
        for r in &self.rows {
            let recv = r
                .receivers
                .iter()
                .map(|id| id.to_string())
                .collect::<Vec<_>>()
                .join(";");
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.time,
                r.agent,
                r.position.x,
                r.position.y,
                r.speed,
                u8::from(r.broadcast),
                r.radius,
                recv
            );
        }
        out
    }

    /// Metrics CSV: `t,H,msgs_cum,msgs_step` at every objective sample.
    pub fn metrics_csv(&self) -> String {
        let mut out = String::with_capacity(self.h_samples.len() * 32 + 128);
        out.push_str("# etb-trace v1\n");
        let _ = writeln!(out, "# controller={}", self.controller);
        out.push_str("t,H,msgs_cum,msgs_step\n");
        for &(t, h) in &self.h_samples {
            let step = (t / self.dt).round() as usize;
            let cum: u64 = self.msgs_per_step[..step.min(self.msgs_per_step.len())]
                .iter()
                .map(|&m| m as u64)
                .sum::<u64>()
                + self.msgs_per_step.get(step).map(|&m| m as u64).unwrap_or(0);
            let in_step = self.msgs_per_step.get(step).copied().unwrap_or(0);
            let _ = writeln!(out, "{t},{h},{cum},{in_step}");
        }
        out
    }
}

/// Communication-reduction percentage of `a` relative to `b`.
pub fn reduction_percent(msgs_a: u64, msgs_b: u64) -> f64 {
    if msgs_b == 0 {
        return 0.0;
    }
    100.0 * (1.0 - msgs_a as f64 / msgs_b as f64)
}

/// Radius-gated delivery: agent `i` receives `msg` when it sits within the
/// broadcast ball around the sender's recorded position (closed-ball rule).
/// Inboxes come out ordered by sender id.
pub fn deliver(broadcasts: &[BroadcastMsg], positions: &[Point2]) -> Vec<Vec<BroadcastMsg>> {
    let mut inboxes: Vec<Vec<BroadcastMsg>> = vec![Vec::new(); positions.len()];
    let mut sorted: Vec<&BroadcastMsg> = broadcasts.iter().collect();
    sorted.sort_by_key(|m| m.sender);
    for msg in sorted {
        for (i, p) in positions.iter().enumerate() {
            if i != msg.sender && p.dist(msg.record.position) <= msg.radius + GEOM_EPS {
                inboxes[i].push(msg.clone());
            }
        }
    }
    inboxes
}

/// Read-only snapshot of one engine tick, handed to the observer after all
/// agents decided and before motion applies. `positions` are the true
/// positions at `time`.
pub struct TickView<'a> {
    pub step: usize,
    pub time: f64,
    pub scenario: &'a Scenario,
    pub states: &'a [AgentState],
    pub decisions: &'a [ControlDecision],
    pub positions: &'a [Point2],
    /// Every message sent in this step, including the responses the engine
    /// synthesizes for the self-triggered baseline.
    pub messages: &'a [BroadcastMsg],
    /// Exact Voronoi neighbor sets at `time`; filled only on steps where the
    /// engine already computed them (always for the self-triggered policy).
    pub oracle_neighbors: Option<&'a [BTreeSet<AgentId>]>,
}

/// Runs a scenario to completion.
pub fn run(scenario: &Scenario) -> Result<SimTrace> {
    run_observed(scenario, |_| {})
}

/// Runs a scenario, calling `observer` once per step with the frozen tick.
pub fn run_observed<F: FnMut(&TickView)>(scenario: &Scenario, mut observer: F) -> Result<SimTrace> {
    scenario.validate()?;
    let n = scenario.n_agents();
    let n_steps = scenario.n_steps();
    let eps_move = scenario.eps_move_value();
    let ctx = StepContext {
        domain: &scenario.domain,
        density: &scenario.density,
        s_max: scenario.s_max,
        dt: scenario.dt,
        eps_move,
        chords: scenario.chords,
    };

    let mut states = init_states(scenario, &ctx)?;
    let mut positions = scenario.initial_positions.clone();
    let mut inboxes: Vec<Vec<BroadcastMsg>> = vec![Vec::new(); n];
    let mut rows: Vec<StepRecord> = Vec::with_capacity((n_steps + 1) * n);
    let mut h_samples: Vec<(f64, f64)> = Vec::new();
    let mut msgs_per_step: Vec<u32> = vec![0; n_steps];

    for step in 0..n_steps {
        let now = step as f64 * scenario.dt;
        if step % scenario.h_stride == 0 {
            h_samples.push((now, objective_h(&positions, &scenario.domain, &scenario.density)?));
        }

        // Oracle neighbor sets, needed every step by the self-triggered
        // baseline (granted explicitly: it is an idealized comparison).
        let oracle = if scenario.controller == ControllerKind::SelfTriggered {
            Some(exact_voronoi_neighbors(&positions, &scenario.domain)?)
        } else {
            None
        };

        let mut decisions: Vec<ControlDecision> = Vec::with_capacity(n);
        for i in 0..n {
            let inbox = std::mem::take(&mut inboxes[i]);
            let d = match &scenario.controller {
                ControllerKind::EtbConstant => step_constant(&mut states[i], &inbox, now, &ctx)?,
                ControllerKind::EtbVariable(params) => {
                    step_variable(&mut states[i], &inbox, now, &ctx, params)?
                }
                ControllerKind::Periodic => step_periodic(&mut states[i], &inbox, now, &ctx)?,
                ControllerKind::SelfTriggered => step_self_triggered(
                    &mut states[i],
                    &inbox,
                    now,
                    &ctx,
                    &oracle.as_ref().expect("oracle")[i],
                )?,
            };
            decisions.push(d);
        }

        // Collect outgoing messages; the self-triggered baseline's requests
        // also draw immediate responses from the oracle neighbors.
        let mut outgoing: Vec<BroadcastMsg> = Vec::new();
        for d in &decisions {
            if let Some(msg) = &d.broadcast {
                outgoing.push(msg.clone());
            }
        }
        if scenario.controller == ControllerKind::SelfTriggered {
            let oracle = oracle.as_ref().expect("oracle");
            let requesters: Vec<AgentId> = decisions
                .iter()
                .enumerate()
                .filter(|(_, d)| d.broadcast.is_some())
                .map(|(i, _)| i)
                .collect();
            let mut responders: BTreeSet<AgentId> = BTreeSet::new();
            for &i in &requesters {
                responders.extend(oracle[i].iter().copied());
            }
            for j in responders {
                if requesters.contains(&j) {
                    continue; // its outgoing record doubles as the response
                }
                let view = states[j].view.as_ref().ok_or(Error::DegenerateDualCell)?;
                let radius = broadcast_radius(positions[j], &view.dual)?;
                let record =
                    AgentRecord { time: now, position: positions[j], speed_promise: ctx.s_max };
                states[j].self_broadcast = record;
                outgoing.push(BroadcastMsg { sender: j, record, radius });
            }
            // Request/response accounting: one message per request plus one
            // unicast response per (responder, requester) pair.
            let pairs: usize = requesters.iter().map(|&i| oracle[i].len()).sum();
            msgs_per_step[step] = (requesters.len() + pairs) as u32;
        } else {
            msgs_per_step[step] = outgoing.len() as u32;
        }

        observer(&TickView {
            step,
            time: now,
            scenario,
            states: &states,
            decisions: &decisions,
            positions: &positions,
            messages: &outgoing,
            oracle_neighbors: oracle.as_deref(),
        });
        let positions_before = positions.clone();

        // Motion: integrate with the overshoot clamp, then verify containment.
        for (i, d) in decisions.iter().enumerate() {
            let mut disp = d.velocity.scale(scenario.dt);
            let len = disp.norm();
            if len > d.max_travel {
                disp = if d.max_travel > 0.0 {
                    disp.scale(d.max_travel / len)
                } else {
                    Point2::default()
                };
            }
            let next = positions[i] + disp;
            if !scenario.domain.contains(next) {
                return Err(Error::ContainmentViolation { agent: i, time: now });
            }
            positions[i] = next;
            states[i].position = next;
            states[i].speed = d.speed_after;
        }

        // Delivery at the start of the next step, gated by the new true
        // positions; receivers are recorded into this step's rows. The
        // request/response baseline is point-to-point: requests go to the
        // oracle neighbors, responses back to the requesters asking.
        let delivered = match (&scenario.controller, &oracle) {
            (ControllerKind::SelfTriggered, Some(oracle)) => {
                let requesters: BTreeSet<AgentId> = decisions
                    .iter()
                    .enumerate()
                    .filter(|(_, d)| d.broadcast.is_some())
                    .map(|(i, _)| i)
                    .collect();
                let mut inbound: Vec<Vec<BroadcastMsg>> = vec![Vec::new(); n];
                for msg in &outgoing {
                    let requested = requesters.contains(&msg.sender);
                    for &k in &oracle[msg.sender] {
                        if requested || requesters.contains(&k) {
                            inbound[k].push(msg.clone());
                        }
                    }
                }
                inbound
            }
            _ => deliver(&outgoing, &positions),
        };
        let mut receivers: Vec<Vec<AgentId>> = vec![Vec::new(); n];
        for (i, inbox) in delivered.into_iter().enumerate() {
            for msg in inbox {
                receivers[msg.sender].push(i);
                inboxes[i].push(msg);
            }
        }
        for inbox in &mut inboxes {
            inbox.sort_by_key(|m| m.sender);
        }

        let sent: std::collections::BTreeMap<AgentId, f64> =
            outgoing.iter().map(|m| (m.sender, m.radius)).collect();
        for i in 0..n {
            let radius = sent.get(&i).copied();
            rows.push(StepRecord {
                time: now,
                agent: i,
                position: positions_before[i],
                speed: decisions[i].speed_after,
                broadcast: radius.is_some(),
                radius: radius.unwrap_or(0.0),
                receivers: std::mem::take(&mut receivers[i]),
            });
        }
    }

    // Final snapshot row per agent plus the final objective sample.
    let t_end = n_steps as f64 * scenario.dt;
    h_samples.push((t_end, objective_h(&positions, &scenario.domain, &scenario.density)?));
    for (i, p) in positions.iter().enumerate() {
        rows.push(StepRecord {
            time: t_end,
            agent: i,
            position: *p,
            speed: states[i].speed,
            broadcast: false,
            radius: 0.0,
            receivers: Vec::new(),
        });
    }

    Ok(SimTrace {
        controller: scenario.controller.name(),
        dt: scenario.dt,
        n_agents: n,
        rows,
        h_samples,
        msgs_per_step,
    })
}

fn init_states(scenario: &Scenario, ctx: &StepContext) -> Result<Vec<AgentState>> {
    let positions = &scenario.initial_positions;
    let n = positions.len();
    let mut states: Vec<AgentState> = Vec::with_capacity(n);
    match scenario.controller {
        ControllerKind::EtbConstant | ControllerKind::EtbVariable(_) => {
            // Initial knowledge: exact records for the Voronoi neighbors plus
            // one ring, immediately refiltered by the dual-cell test so no
            // member sits beyond guaranteed broadcast reach.
            let neighbors = exact_voronoi_neighbors(positions, &scenario.domain)?;
            for i in 0..n {
                let mut members: BTreeSet<AgentId> = neighbors[i].clone();
                for &j in &neighbors[i] {
                    members.extend(neighbors[j].iter().copied());
                }
                members.remove(&i);
                let mut st = AgentState::new(i, positions[i]);
                for &j in &members {
                    st.memory.insert(
                        j,
                        AgentRecord { time: 0.0, position: positions[j], speed_promise: 0.0 },
                    );
                }
                st.potential_neighbors = members;
                refilter_potential_neighbors(
                    &mut st,
                    UncertaintyDisk::point(positions[i]),
                    0.0,
                    ctx,
                )?;
                st.snapshot_held(0.0, ctx.disk_cap());
                states.push(st);
            }
        }
        ControllerKind::Periodic | ControllerKind::SelfTriggered => {
            // Idealized baselines start informed about everyone, with
            // worst-case speed promises (no promise protocol exists here).
            for i in 0..n {
                let mut st = AgentState::new(i, positions[i]);
                for (j, &p) in positions.iter().enumerate() {
                    if j != i {
                        st.memory.insert(
                            j,
                            AgentRecord { time: 0.0, position: p, speed_promise: ctx.s_max },
                        );
                        st.potential_neighbors.insert(j);
                    }
                }
                st.held = st.memory.clone();
                // "Never sent anything": requests must not be blocked by the
                // in-flight cooldown before the first one.
                st.self_broadcast = AgentRecord {
                    time: f64::NEG_INFINITY,
                    position: positions[i],
                    speed_promise: ctx.s_max,
                };
                states.push(st);
            }
        }
    }
    Ok(states)
}

/// Baseline: broadcast every step, move on the received positions as if they
/// were exact (zero-age disks make the two conservative cells collapse onto
/// the Voronoi cell, so this is speed-capped Lloyd descent).
pub fn step_periodic(
    state: &mut AgentState,
    inbox: &[BroadcastMsg],
    now: f64,
    ctx: &StepContext,
) -> Result<ControlDecision> {
    for msg in inbox {
        if msg.sender != state.id {
            state.memory.insert(msg.sender, msg.record);
            state.potential_neighbors.insert(msg.sender);
        }
    }
    let disks: Vec<(AgentId, UncertaintyDisk)> = state
        .potential_neighbors
        .iter()
        .filter_map(|&j| {
            state
                .memory
                .get(&j)
                .map(|r| (j, UncertaintyDisk::point(r.position)))
        })
        .collect();
    let view = evaluate_cells(state.position, &disks, ctx, false)?;
    let condition = view.condition;
    let target = view.target;
    // The broadcast ball must cover the true Voronoi neighbors, and the
    // records are one step stale: size it from the honest record-age dual
    // cell rather than the zero-age cell used for motion.
    let cap = ctx.disk_cap();
    let aged: Vec<UncertaintyDisk> = state
        .potential_neighbors
        .iter()
        .filter_map(|&j| {
            let r = state.memory.get(&j)?;
            uncertainty_now(r, now, cap).ok()
        })
        .collect();
    let dual_aged = dual_guaranteed_cell_disks(
        UncertaintyDisk::point(state.position),
        &aged,
        ctx.domain,
        ctx.chords,
    );
    let radius = broadcast_radius(state.position, &dual_aged)? + ctx.radius_slack();
    state.view = Some(view);
    state.view_frozen = false;

    let speed_after = if condition { ctx.s_max } else { 0.0 };
    let (velocity, max_travel) = if condition {
        (
            control_input(state.position, target, ctx.s_max)?,
            state.position.dist(target),
        )
    } else {
        (Point2::default(), 0.0)
    };
    let record = AgentRecord { time: now, position: state.position, speed_promise: ctx.s_max };
    state.self_broadcast = record;
    Ok(ControlDecision {
        velocity,
        broadcast: Some(BroadcastMsg { sender: state.id, record, radius }),
        speed_after,
        max_travel,
    })
}

/// Baseline: idealized self-triggered behavior. The agent knows its exact
/// Voronoi neighbors (oracle) and maintains worst-case-rate disks over them.
/// Whenever the move condition fails on information it has not refreshed
/// this step, it requests — one message — and every neighbor answers with a
/// broadcast of its own record next step. No promise protocol: every record
/// carries the speed cap, so disks stay sound without broadcasts on speed
/// changes.
pub fn step_self_triggered(
    state: &mut AgentState,
    inbox: &[BroadcastMsg],
    now: f64,
    ctx: &StepContext,
    oracle_neighbors: &BTreeSet<AgentId>,
) -> Result<ControlDecision> {
    for msg in inbox {
        if msg.sender != state.id {
            state.memory.insert(msg.sender, msg.record);
        }
    }
    state.potential_neighbors = oracle_neighbors.clone();
    let cap = ctx.disk_cap();
    let disks: Vec<(AgentId, UncertaintyDisk)> = state
        .potential_neighbors
        .iter()
        .filter_map(|&j| {
            let r = state.memory.get(&j)?;
            uncertainty_now(r, now, cap).ok().map(|d| (j, d))
        })
        .collect();
    let view = evaluate_cells(state.position, &disks, ctx, false)?;
    let condition = view.condition;
    let target = view.target;
    let stale = view.disks.iter().any(|(_, d)| d.radius > 0.0);
    let radius = broadcast_radius(state.position, &view.dual)?;
    state.view = Some(view);
    state.view_frozen = false;

    if condition {
        // Worst-case promises already cover full speed: move immediately.
        let velocity = control_input(state.position, target, ctx.s_max)?;
        return Ok(ControlDecision {
            velocity,
            broadcast: None,
            speed_after: ctx.s_max,
            max_travel: state.position.dist(target),
        });
    }

    // Condition failed: request fresh information, unless nothing is stale,
    // there is nobody to ask, or a request is still in flight (one step for
    // the responses to arrive and be evaluated).
    let cooled_down = now - state.self_broadcast.time > 1.5 * ctx.dt;
    let trigger = stale && cooled_down && !oracle_neighbors.is_empty();
    let broadcast = if trigger {
        let record = AgentRecord { time: now, position: state.position, speed_promise: ctx.s_max };
        state.self_broadcast = record;
        Some(BroadcastMsg { sender: state.id, record, radius })
    } else {
        None
    };
    Ok(ControlDecision { velocity: Point2::default(), broadcast, speed_after: 0.0, max_travel: 0.0 })
}
