//! Quick look at the benchmark scenario across all controllers: runtime,
//! message totals, objective trajectory, and final centroid distances.

use std::time::Instant;

use etb_core::density::mass_centroid;
use etb_core::partition::voronoi_cells;
use etb_core::sim::{reduction_percent, run, ControllerKind, Scenario};
use etb_core::controller::VariableParams;

fn main() {
    let duration: f64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(600.0);
    let kinds = [
        ControllerKind::Periodic,
        ControllerKind::EtbConstant,
        ControllerKind::EtbVariable(VariableParams { delta_tb: 45.0 / 60.0, tau_d: 10.0 / 60.0 }),
        ControllerKind::SelfTriggered,
    ];
    let mut totals = Vec::new();
    let mut per_step: Vec<Vec<u32>> = Vec::new();
    for kind in kinds {
        let mut sc = Scenario::paper(kind);
        sc.duration = duration;
        let t0 = Instant::now();
        let trace = run(&sc).unwrap();
        per_step.push(trace.msgs_per_step.clone());
        let dt = t0.elapsed().as_secs_f64();
        let finals = trace.final_positions();
        let cells = voronoi_cells(&finals, &sc.domain).unwrap();
        let worst = finals
            .iter()
            .zip(&cells)
            .map(|(p, c)| mass_centroid(c, &sc.density).centroid().unwrap().dist(*p))
            .fold(0.0f64, f64::max);
        println!(
            "{:>14}: {:7.1}s wall, msgs {:>8}, H {:.1} -> {:.1}, worst |p-C| {:.4}",
            trace.controller,
            dt,
            trace.total_messages(),
            trace.initial_h(),
            trace.final_h(),
            worst
        );
        totals.push((trace.controller, trace.total_messages()));
    }
    for (name, t) in &totals {
        if *name != "periodic" {
            println!(
                "reduction {name} vs periodic: {:.1}%",
                reduction_percent(*t, totals[0].1)
            );
        }
    }
    if let (Some(var), Some(st)) = (
        totals.iter().find(|(n, _)| *n == "etb-variable"),
        totals.iter().find(|(n, _)| *n == "self-triggered"),
    ) {
        println!(
            "reduction etb-variable vs self-triggered: {:.1}%",
            reduction_percent(var.1, st.1)
        );
    }
    // Where the self-triggered cumulative count overtakes the periodic one.
    let (per, st) = (&per_step[0], &per_step[3]);
    let mut cum_p = 0u64;
    let mut cum_s = 0u64;
    let mut crossing = None;
    for (k, (&a, &b)) in per.iter().zip(st).enumerate() {
        cum_p += a as u64;
        cum_s += b as u64;
        if crossing.is_none() && cum_s > cum_p && k > 60 {
            crossing = Some(k as f64 / 60.0);
        }
    }
    println!("self-triggered crossing vs periodic: {crossing:?} s");
}
