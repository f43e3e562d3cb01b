//! Sensitivity of the 600 s message total to tiny initial perturbations.

use etb_core::sim::{run, ControllerKind, Scenario};

fn main() {
    let eps: f64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(4e-4);
    for (label, dx) in [("base", 0.0), ("+1e-9", 1e-9), ("+1e-7", 1e-7), ("+1e-5", 1e-5)] {
        let mut sc = Scenario::paper(ControllerKind::EtbConstant);
        sc.eps_move = Some(eps);
        sc.initial_positions[0].x += dx;
        let trace = run(&sc).unwrap();
        println!(
            "{label:>6}: total {} reduction {:.1}%",
            trace.total_messages(),
            100.0 * (1.0 - trace.total_messages() as f64 / 288000.0)
        );
    }
}
