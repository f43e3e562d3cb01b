//! Per-agent state machine: memory of received promises, motion control
//! toward the centroid-bounding lens, event-triggered decision law, broadcast
//! radius assignment, potential-neighbor maintenance, and the variable-speed
//! extension.
//!
//! Discrete-time semantics. Broadcasts decided in step k are delivered at the
//! start of step k+1, before anyone evaluates disks again, so a speed change
//! announced in step k may take effect in the motion of step k itself: every
//! holder of the old promise re-evaluates only after the new record arrives.
//! Between an agent's broadcasts its speed never exceeds the last promise.

use std::collections::{BTreeMap, BTreeSet};

use crate::density::{mass_centroid, DensityField, MassCentroid};
use crate::error::{Error, Result};
use crate::geometry::{
    min_enclosing_circle, project_onto_lens, project_onto_lens_in_polygon, Point2, SimplePolygon,
};
use crate::partition::{
    dual_guaranteed_cell_disks, exclusion_radius, guaranteed_cell, polys_within, UncertaintyDisk,
};

pub type AgentId = usize;

/// Last-received `(time, position, speed promise)` tuple for one agent; the
/// unit of broadcast. Absence is modeled by absence from the memory map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AgentRecord {
    pub time: f64,
    pub position: Point2,
    pub speed_promise: f64,
}

/// One broadcast: the sender's own record at send time plus the radius it
/// chose. Any agent within `radius` of the recorded position receives it.
#[derive(Clone, Debug)]
pub struct BroadcastMsg {
    pub sender: AgentId,
    pub record: AgentRecord,
    pub radius: f64,
}

/// What an agent decided in one step. `velocity` is the motion applied over
/// the step (already respecting every outstanding promise); `speed_after` is
/// the speed in force from the next step on; `max_travel` caps the step
/// displacement so the agent never overshoots its target point.
#[derive(Clone, Debug)]
pub struct ControlDecision {
    pub velocity: Point2,
    pub broadcast: Option<BroadcastMsg>,
    pub speed_after: f64,
    pub max_travel: f64,
}

impl ControlDecision {
    pub fn hold(speed_after: f64) -> Self {
        Self {
            velocity: Point2::default(),
            broadcast: None,
            speed_after,
            max_travel: 0.0,
        }
    }
}

/// Everything an agent computed in one evaluation of its cells; kept on the
/// state for the engine, the trace, and invariant checks.
#[derive(Clone, Debug)]
pub struct AgentView {
    /// Uncertainty disks in use, one per potential neighbor.
    pub disks: Vec<(AgentId, UncertaintyDisk)>,
    pub guaranteed: SimplePolygon,
    pub dual: SimplePolygon,
    /// Centroid bound: both cell centroids are within this of the true one.
    pub bound: f64,
    /// Closest point of the centroid lens (intersected with the domain).
    pub target: Point2,
    /// Whether the agent has good information to move (target not reached).
    pub condition: bool,
    /// True when built from held (worst-case-growth) disks.
    pub held_mode: bool,
}

/// Full per-agent state. The engine owns it and mutates it only through the
/// step functions; all containers iterate in deterministic order.
#[derive(Clone, Debug)]
pub struct AgentState {
    pub id: AgentId,
    pub position: Point2,
    /// Effective speed this step; never exceeds the last broadcast promise.
    pub speed: f64,
    /// Speed-adjustment factor in (0, 1]; constant-speed mode keeps it at 1.
    pub beta: f64,
    /// Live records, updated on every reception.
    pub memory: BTreeMap<AgentId, AgentRecord>,
    /// Snapshot of `memory` taken at the agent's own last broadcast; motion
    /// while moving is computed from this view ("hold new information").
    pub held: BTreeMap<AgentId, AgentRecord>,
    /// Radii of the held-mode disks, integrated step by step at the current
    /// worst-case rate. Incremental growth stays sound when promises change
    /// mid-flight, which a closed-form two-point evaluation would miss.
    pub held_radii: BTreeMap<AgentId, f64>,
    /// The agent's own information at its latest broadcast.
    pub self_broadcast: AgentRecord,
    pub potential_neighbors: BTreeSet<AgentId>,
    pub last_stop_time: f64,
    /// Latest cell evaluation (fresh or held).
    pub view: Option<AgentView>,
    /// True when the latest fresh view cannot change over time (stopped, no
    /// receptions, and every referenced promise is zero) — lets quiescent
    /// agents skip recomputation.
    pub view_frozen: bool,
}

impl AgentState {
    pub fn new(id: AgentId, position: Point2) -> Self {
        Self {
            id,
            position,
            speed: 0.0,
            beta: 1.0,
            memory: BTreeMap::new(),
            held: BTreeMap::new(),
            held_radii: BTreeMap::new(),
            self_broadcast: AgentRecord { time: 0.0, position, speed_promise: 0.0 },
            potential_neighbors: BTreeSet::new(),
            last_stop_time: f64::NEG_INFINITY,
            view: None,
            view_frozen: false,
        }
    }

    fn frozen_records(&self) -> bool {
        self.potential_neighbors
            .iter()
            .all(|j| self.memory.get(j).map_or(true, |r| r.speed_promise == 0.0))
    }

    /// Re-bases the held view on the live memory: called at every own
    /// broadcast, covering the current potential neighbors. Radii restart
    /// from the plain record age; the broadcast-ball margin guarantees the
    /// records of everyone still relevant are not silently stale.
    pub fn snapshot_held(&mut self, now: f64, cap: f64) {
        let mut held = BTreeMap::new();
        let mut radii = BTreeMap::new();
        for &j in &self.potential_neighbors {
            let Some(&rec) = self.memory.get(&j) else { continue };
            let Ok(base) = uncertainty_now(&rec, now, cap) else { continue };
            held.insert(j, rec);
            radii.insert(j, base.radius);
        }
        self.held = held;
        self.held_radii = radii;
    }
}

/// Immutable per-step context shared by all agents.
pub struct StepContext<'a> {
    pub domain: &'a SimplePolygon,
    pub density: &'a DensityField,
    pub s_max: f64,
    pub dt: f64,
    /// Arrival band for the move condition.
    pub eps_move: f64,
    pub chords: usize,
}

impl StepContext<'_> {
    pub fn disk_cap(&self) -> f64 {
        self.domain.diameter()
    }

    /// Margin added to every broadcast ball. The minimum radius is computed
    /// from records that lag several steps behind, both endpoints keep
    /// moving while the message is in flight, and a recipient can sit at the
    /// exact boundary of the minimum ball; eight step-lengths of slack
    /// absorb all of it without costing real coverage.
    pub fn radius_slack(&self) -> f64 {
        8.0 * self.s_max * self.dt
    }
}

/// Variable-speed policy parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VariableParams {
    /// Target dwell time in the moving state before adjusting speed.
    pub delta_tb: f64,
    /// Wait after stopping before the agent may start again.
    pub tau_d: f64,
}

/// Uncertainty disk from a record at the current time: the promised speed
/// bounds displacement since the record's timestamp. Radius is capped so the
/// disk stays meaningful inside the domain.
pub fn uncertainty_now(record: &AgentRecord, now: f64, cap: f64) -> Result<UncertaintyDisk> {
    if now < record.time - 1e-12 {
        return Err(Error::TimeOrdering("record is from the future"));
    }
    let radius = (record.speed_promise * (now - record.time).max(0.0)).min(cap);
    Ok(UncertaintyDisk { center: record.position, radius })
}

/// Held-mode disk: from the record's own promise until `t_self` (the holding
/// agent's last broadcast), then worst-case growth at `s_ref`.
pub fn uncertainty_held(
    record: &AgentRecord,
    t_self: f64,
    now: f64,
    s_ref: f64,
    cap: f64,
) -> Result<UncertaintyDisk> {
    if record.time > t_self + 1e-12 || t_self > now + 1e-12 {
        return Err(Error::TimeOrdering("need record.time <= t_self <= now"));
    }
    let held = record.speed_promise * (t_self - record.time).max(0.0);
    let grown = s_ref * (now - t_self).max(0.0);
    Ok(UncertaintyDisk { center: record.position, radius: (held + grown).min(cap) })
}

/// Bound on the distance from either conservative-cell centroid to the true
/// cell centroid: `2·cr(dual)·(1 − M_g/M_d)`.
pub fn centroid_bound(
    g: &MassCentroid,
    d: &MassCentroid,
    dual: &SimplePolygon,
) -> Result<f64> {
    if d.mass <= 0.0 || dual.is_empty() {
        return Err(Error::DegenerateDualCell);
    }
    let cr = min_enclosing_circle(dual.vertices())?.radius;
    let ratio = (g.mass / d.mass).clamp(0.0, 1.0);
    Ok(2.0 * cr * (1.0 - ratio))
}

/// Closest point to `p` of the lens around the two cell centroids.
pub fn target_point(p: Point2, gc: Point2, dc: Point2, bound: f64) -> Result<Point2> {
    // The true centroid lies in both balls, so they intersect; tolerate
    // quadrature-level slack by inflating the radius minimally when needed.
    let b = bound.max(gc.dist(dc) / 2.0 * (1.0 + 1e-12));
    project_onto_lens(p, gc, dc, b)
}

/// Condition to move: the target point has not been reached (beyond the
/// arrival tolerance).
pub fn condition_to_move(p: Point2, target: Point2, eps_move: f64) -> bool {
    p.dist(target) > eps_move
}

/// Unit-direction motion law `u = s·(m − p)/‖m − p‖`; the zero vector when
/// stopped.
pub fn control_input(p: Point2, target: Point2, speed: f64) -> Result<Point2> {
    if speed == 0.0 {
        return Ok(Point2::default());
    }
    let dir = (target - p).unit().ok_or(Error::ControlUndefined)?;
    Ok(dir.scale(speed))
}

/// Broadcast radius sufficient to reach every possible Voronoi neighbor:
/// twice the farthest dual-cell distance.
pub fn broadcast_radius(p: Point2, dual: &SimplePolygon) -> Result<f64> {
    exclusion_radius(p, dual)
}

/// Eq.-8 disks for the current potential neighbors from live memory.
fn disks_fresh(state: &AgentState, now: f64, ctx: &StepContext) -> Vec<(AgentId, UncertaintyDisk)> {
    let cap = ctx.disk_cap();
    state
        .potential_neighbors
        .iter()
        .filter_map(|&j| {
            let r = state.memory.get(&j)?;
            uncertainty_now(r, now, cap).ok().map(|d| (j, d))
        })
        .collect()
}

/// Advances the held-mode disks by one step at rate `s_ref` and returns them.
/// Centers come from the snapshot records; members that joined after the
/// snapshot enter with their live record age. Integrating the rate step by
/// step keeps the disks sound across promise changes delivered mid-flight:
/// any speed a neighbor may take during a step is already visible in the
/// rate by the time that step's growth is added.
fn advance_held_disks(
    state: &mut AgentState,
    s_ref: f64,
    now: f64,
    ctx: &StepContext,
) -> Vec<(AgentId, UncertaintyDisk)> {
    let cap = ctx.disk_cap();
    let members: Vec<AgentId> = state.potential_neighbors.iter().copied().collect();
    let mut out = Vec::with_capacity(members.len());
    for j in members {
        let Some(rec) = state.held.get(&j).copied().or_else(|| {
            // Joined after the snapshot: adopt the live record.
            let live = state.memory.get(&j).copied()?;
            state.held.insert(j, live);
            let base = uncertainty_now(&live, now, cap).ok()?.radius;
            state.held_radii.insert(j, base);
            Some(live)
        }) else {
            continue;
        };
        let radius = state
            .held_radii
            .entry(j)
            .and_modify(|r| *r = (*r + s_ref * ctx.dt).min(cap))
            .or_insert(0.0);
        out.push((j, UncertaintyDisk { center: rec.position, radius: *radius }));
    }
    out
}

/// Maximum speed among the agent and every promise it holds for its
/// potential neighbors: the worst-case growth rate in variable mode. Both
/// the live and the held record are consulted, so a raise delivered after
/// the snapshot and a pre-snapshot promise both bound the rate.
fn reference_speed_variable(state: &AgentState) -> f64 {
    let mut s = state.speed;
    for j in &state.potential_neighbors {
        for rec in [state.memory.get(j), state.held.get(j)].into_iter().flatten() {
            s = s.max(rec.speed_promise);
        }
    }
    s
}

/// Builds the conservative cells, the centroid lens, and the move condition
/// from a disk set.
pub fn evaluate_cells(
    own: Point2,
    disks: &[(AgentId, UncertaintyDisk)],
    ctx: &StepContext,
    held_mode: bool,
) -> Result<AgentView> {
    let others: Vec<UncertaintyDisk> = disks.iter().map(|(_, d)| *d).collect();
    let guaranteed = guaranteed_cell(own, &others, ctx.domain, ctx.chords);
    let dual = dual_guaranteed_cell_disks(
        UncertaintyDisk::point(own),
        &others,
        ctx.domain,
        ctx.chords,
    );
    let d_mc = mass_centroid(&dual, ctx.density);
    if dual.is_empty() || d_mc.mass <= 0.0 {
        return Err(Error::DegenerateDualCell);
    }
    let g_mc = mass_centroid(&guaranteed, ctx.density);
    let bound = centroid_bound(&g_mc, &d_mc, &dual)?;
    let dc = d_mc.centroid()?;
    let gc = if g_mc.mass > 0.0 { g_mc.centroid()? } else { dc };
    let mut target = target_point(own, gc, dc, bound)?;
    if !ctx.domain.contains(target) {
        // The lens can poke past the domain near the boundary; the true
        // centroid is also inside the domain, so project onto the
        // three-way intersection instead.
        let b = bound.max(gc.dist(dc) / 2.0 * (1.0 + 1e-12));
        target = project_onto_lens_in_polygon(own, gc, dc, b, ctx.domain)?;
    }
    let condition = condition_to_move(own, target, ctx.eps_move);
    Ok(AgentView {
        disks: disks.to_vec(),
        guaranteed,
        dual,
        bound,
        target,
        condition,
        held_mode,
    })
}

/// Potential-neighbor update on one reception. The own region is exact when
/// the sender is new, otherwise the agent's own last-broadcast disk (both
/// peers then judge the pair from the same information). Members whose dual
/// cells no longer touch the agent's are dropped; returns whether the set
/// grew.
pub fn update_potential_neighbors(
    state: &mut AgentState,
    sender: AgentId,
    sender_is_new: bool,
    now: f64,
    ctx: &StepContext,
) -> Result<bool> {
    let own_region = if sender_is_new {
        UncertaintyDisk::point(state.position)
    } else {
        uncertainty_now(&state.self_broadcast, now, ctx.disk_cap())?
    };
    let before = state.potential_neighbors.clone();
    if sender_is_new {
        state.potential_neighbors.insert(sender);
    }
    refilter_potential_neighbors(state, own_region, now, ctx)?;
    Ok(state.potential_neighbors.iter().any(|k| !before.contains(k)))
}

/// Dual-cell intersection filter over the current member set: each member's
/// dual-guaranteed cell (from the agent's records) must still touch the
/// agent's own dual cell. The test carries a few step-lengths of margin:
/// records lag a step behind and the add/announce handshake with a newly
/// relevant agent takes two more, so cells about to touch must already
/// count as touching.
pub fn refilter_potential_neighbors(
    state: &mut AgentState,
    own_region: UncertaintyDisk,
    now: f64,
    ctx: &StepContext,
) -> Result<()> {
    let cap = ctx.disk_cap();
    let margin = 6.0 * ctx.s_max * ctx.dt;
    let member_disks: Vec<(AgentId, UncertaintyDisk)> = state
        .potential_neighbors
        .iter()
        .filter_map(|&j| {
            let r = state.memory.get(&j)?;
            uncertainty_now(r, now, cap).ok().map(|d| (j, d))
        })
        .collect();

    let own_dual = {
        let others: Vec<UncertaintyDisk> = member_disks.iter().map(|(_, d)| *d).collect();
        dual_guaranteed_cell_disks(own_region, &others, ctx.domain, ctx.chords)
    };
    let mut kept = BTreeSet::new();
    for &(k, k_disk) in &member_disks {
        let mut others: Vec<UncertaintyDisk> = vec![own_region];
        others.extend(member_disks.iter().filter(|(m, _)| *m != k).map(|(_, d)| *d));
        let k_dual = dual_guaranteed_cell_disks(k_disk, &others, ctx.domain, ctx.chords);
        if polys_within(&own_dual, &k_dual, margin) {
            kept.insert(k);
        }
    }
    state.potential_neighbors = kept;
    Ok(())
}

/// Constant-speed event-triggered broadcasting step.
pub fn step_constant(
    state: &mut AgentState,
    inbox: &[BroadcastMsg],
    now: f64,
    ctx: &StepContext,
) -> Result<ControlDecision> {
    step_etb(state, inbox, now, ctx, None)
}

/// Variable-speed event-triggered broadcasting step.
pub fn step_variable(
    state: &mut AgentState,
    inbox: &[BroadcastMsg],
    now: f64,
    ctx: &StepContext,
    params: &VariableParams,
) -> Result<ControlDecision> {
    step_etb(state, inbox, now, ctx, Some(params))
}

fn step_etb(
    state: &mut AgentState,
    inbox: &[BroadcastMsg],
    now: f64,
    ctx: &StepContext,
    var: Option<&VariableParams>,
) -> Result<ControlDecision> {
    // Receive: store records, then refilter the potential-neighbor set once
    // per message. No reception leaves the set untouched.
    let mut grew = false;
    for msg in inbox {
        if msg.sender == state.id {
            continue;
        }
        let sender_is_new = !state.potential_neighbors.contains(&msg.sender);
        state.memory.insert(msg.sender, msg.record);
        grew |= update_potential_neighbors(state, msg.sender, sender_is_new, now, ctx)?;
    }
    let received_any = !inbox.is_empty();

    let mut speed_after = state.speed;
    let mut promise: Option<f64> = None;
    let mut motion_target: Option<Point2> = None;

    if state.speed == 0.0 {
        let reuse = !received_any && state.view_frozen && state.view.is_some();
        if !reuse {
            let disks = disks_fresh(state, now, ctx);
            state.view = Some(evaluate_cells(state.position, &disks, ctx, false)?);
            state.view_frozen = state.frozen_records();
        }
        let view = state.view.as_ref().expect("view just set");
        let wait_over = var.map_or(true, |v| now - state.last_stop_time >= v.tau_d - 1e-12);
        if view.condition && wait_over {
            // Start: announce the new speed and move under it right away.
            let new_speed = var.map_or(ctx.s_max, |_| state.beta * ctx.s_max);
            speed_after = new_speed;
            promise = Some(new_speed);
            motion_target = Some(view.target);
            state.view_frozen = false;
        }
    } else {
        let s_ref = var.map_or(ctx.s_max, |_| reference_speed_variable(state));
        let disks = advance_held_disks(state, s_ref, now, ctx);
        let view_held = evaluate_cells(state.position, &disks, ctx, true)?;
        if view_held.condition {
            motion_target = Some(view_held.target);
            state.view = Some(view_held);
            state.view_frozen = false;
        } else {
            // Re-check with fresh information; broadcast either way.
            if let Some(v) = var {
                if now - state.self_broadcast.time < v.delta_tb - 1e-12 {
                    // Moving legs keep ending early: slow down.
                    state.beta /= 2.0;
                }
            }
            let disks = disks_fresh(state, now, ctx);
            let view_fresh = evaluate_cells(state.position, &disks, ctx, false)?;
            let condition = view_fresh.condition;
            state.view = Some(view_fresh);
            state.view_frozen = state.frozen_records();
            if condition {
                let new_speed = var.map_or(ctx.s_max, |_| state.beta * ctx.s_max);
                speed_after = new_speed;
                promise = Some(new_speed);
                motion_target = Some(state.view.as_ref().unwrap().target);
            } else {
                speed_after = 0.0;
                promise = Some(0.0);
                state.last_stop_time = now;
            }
        }
    }

    // Broadcast at a non-broadcast instant when the potential-neighbor set
    // grew or a pending speed raise must be announced.
    if promise.is_none() {
        let target_speed = var.map_or(ctx.s_max, |_| state.beta * ctx.s_max);
        let raising = state.speed > 0.0 && target_speed > state.speed + 1e-15;
        if grew || raising {
            if raising {
                speed_after = target_speed;
            }
            promise = Some(speed_after);
        }
    }

    // Motion under the speed in force after this step's announcements. The
    // step is not clamped at the target: overshooting and re-aiming is the
    // discrete remnant of the continuous law, and near convergence the
    // resulting millimeter oscillation is exactly what keeps the constant
    // speed policy re-broadcasting the way the reference results show.
    let (velocity, max_travel) = match motion_target {
        Some(target) if speed_after > 0.0 && state.position.dist(target) > 1e-15 => (
            control_input(state.position, target, speed_after)?,
            f64::INFINITY,
        ),
        _ => (Point2::default(), 0.0),
    };

    // Variable mode: a leg that has outlasted the target duration earns a
    // speed raise, announced by a broadcast on the next step.
    if let Some(v) = var {
        if speed_after > 0.0 && promise.is_none() && now - state.self_broadcast.time > v.delta_tb
        {
            state.beta = (2.0 * state.beta).min(1.0);
        }
    }

    let broadcast = match promise {
        Some(speed_promise) => {
            let record = AgentRecord { time: now, position: state.position, speed_promise };
            let dual = &state.view.as_ref().expect("broadcast requires a view").dual;
            // Minimum sufficient radius plus the discretization margin.
            let radius = broadcast_radius(state.position, dual)? + ctx.radius_slack();
            state.self_broadcast = record;
            state.snapshot_held(now, ctx.disk_cap());
            Some(BroadcastMsg { sender: state.id, record, radius })
        }
        None => None,
    };

    Ok(ControlDecision { velocity, broadcast, speed_after, max_travel })
}
