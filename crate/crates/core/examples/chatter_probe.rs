//! Breaks down the late-phase broadcast behavior of the constant-speed
//! policy: per-window message rates plus a dump of the per-agent decision
//! state at a few steady-state steps.

use etb_core::sim::{run_observed, ControllerKind, Scenario};

fn main() {
    let duration: f64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(600.0);
    let mut sc = Scenario::paper(ControllerKind::EtbConstant);
    if let Some(eps) = std::env::args().nth(2).and_then(|s| s.parse().ok()) {
        sc.eps_move = Some(eps);
    }
    sc.duration = duration;
    let dump_at = [(duration * 0.7 / sc.dt) as usize, (duration * 0.9 / sc.dt) as usize];
    let trace = run_observed(&sc, |tick| {
        if dump_at.contains(&tick.step) {
            eprintln!("--- step {} (t={:.1}) ---", tick.step, tick.time);
            for (i, st) in tick.states.iter().enumerate() {
                let v = st.view.as_ref().unwrap();
                eprintln!(
                    "agent {i}: speed {:.3} held={} cond={} bnd={:.5} |p-m|={:.5} bcast={} J={:?}",
                    st.speed,
                    v.held_mode,
                    v.condition,
                    v.bound,
                    st.position.dist(v.target),
                    tick.decisions[i].broadcast.is_some(),
                    st.potential_neighbors
                );
            }
        }
    })
    .unwrap();
    let w = (60.0 / sc.dt) as usize;
    for (wi, chunk) in trace.msgs_per_step.chunks(w).enumerate() {
        let total: u64 = chunk.iter().map(|&m| m as u64).sum();
        println!(
            "window {:>3}-{:>3}s: {:>6} msgs ({:.2}/step)",
            wi * 60,
            (wi + 1) * 60,
            total,
            total as f64 / chunk.len() as f64
        );
    }
    println!("total: {}", trace.total_messages());
}
