//! Late-phase behavior of the self-triggered baseline.

use etb_core::sim::{run_observed, ControllerKind, Scenario};

fn main() {
    let mut sc = Scenario::paper(ControllerKind::SelfTriggered);
    sc.duration = 600.0;
    let dump_at = [24000usize, 24001, 24002, 24003, 24004, 24005];
    let trace = run_observed(&sc, |tick| {
        if dump_at.contains(&tick.step) {
            eprintln!("--- step {} ---", tick.step);
            for (i, st) in tick.states.iter().enumerate() {
                let v = st.view.as_ref().unwrap();
                let worst = v.disks.iter().map(|(_, d)| d.radius).fold(0.0f64, f64::max);
                eprintln!(
                    "agent {i}: cond={} bnd={:.4} |p-m|={:.5} worst_r={:.4} req={} N={:?}",
                    v.condition,
                    v.bound,
                    st.position.dist(v.target),
                    worst,
                    tick.decisions[i].broadcast.is_some(),
                    st.potential_neighbors,
                );
            }
        }
    })
    .unwrap();
    let w = 3600;
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
