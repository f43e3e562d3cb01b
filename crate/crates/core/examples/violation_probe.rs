//! Dumps every containment / radius / neighbor-coverage violation on one
//! benchmark trace, with enough context to diagnose the mechanism.

use etb_core::controller::VariableParams;
use etb_core::partition::exact_voronoi_neighbors;
use etb_core::sim::{run_observed, ControllerKind, Scenario};

fn main() {
    let kind = match std::env::args().nth(1).as_deref() {
        Some("variable") => {
            ControllerKind::EtbVariable(VariableParams { delta_tb: 0.75, tau_d: 10.0 / 60.0 })
        }
        _ => ControllerKind::EtbConstant,
    };
    let sc = Scenario::paper(kind);
    let mut shown = 0;
    let _ = run_observed(&sc, |tick| {
        if shown > 25 {
            return;
        }
        for (i, st) in tick.states.iter().enumerate() {
            let view = st.view.as_ref().unwrap();
            for &(j, disk) in &view.disks {
                let gap = tick.positions[j].dist(disk.center) - disk.radius;
                if gap > 1e-9 {
                    shown += 1;
                    let rec = st.memory.get(&j);
                    eprintln!(
                        "containment step {} t={:.3}: agent {i} (speed {:.3}, held={}) disk for {j}: r={:.6} gap={:.3e} rec={:?} held_rec={:?} J={:?}",
                        tick.step, tick.time, st.speed, view.held_mode, disk.radius, gap,
                        rec, st.held.get(&j), st.potential_neighbors
                    );
                    eprintln!(
                        "   true p_{j} = {:?}, {j}'s own last broadcast {:?}, {j}'s speed {:.3}, {j}'s J={:?}",
                        tick.positions[j],
                        tick.states[j].self_broadcast,
                        tick.states[j].speed,
                        tick.states[j].potential_neighbors
                    );
                }
            }
        }
        if !tick.messages.is_empty() && shown <= 25 {
            let neighbors = exact_voronoi_neighbors(tick.positions, &sc.domain).unwrap();
            for msg in tick.messages {
                for &nb in &neighbors[msg.sender] {
                    let over = tick.positions[nb].dist(msg.record.position) - msg.radius;
                    if over > 1e-9 {
                        shown += 1;
                        eprintln!(
                            "radius step {} t={:.3}: sender {} radius {:.4} misses neighbor {nb} by {:.4e}; J={:?}",
                            tick.step,
                            tick.time,
                            msg.sender,
                            msg.radius,
                            over,
                            tick.states[msg.sender].potential_neighbors
                        );
                    }
                }
                for nb in &neighbors[msg.sender] {
                    if !tick.states[msg.sender].potential_neighbors.contains(nb) {
                        shown += 1;
                        // Length of the shared Voronoi edge between the pair.
                        let cells =
                            etb_core::partition::voronoi_cells(tick.positions, &sc.domain)
                                .unwrap();
                        let h = etb_core::geometry::HalfPlane::bisector_keeping(
                            tick.positions[msg.sender],
                            tick.positions[*nb],
                        )
                        .unwrap();
                        let on_line: Vec<_> = cells[msg.sender]
                            .vertices()
                            .iter()
                            .filter(|v| h.excess(**v).abs() <= 1e-7)
                            .collect();
                        let mut edge_len = 0.0f64;
                        for a in &on_line {
                            for b in &on_line {
                                edge_len = edge_len.max(a.dist(**b));
                            }
                        }
                        eprintln!(
                            "lemma2 step {} t={:.3}: sender {} J={:?} missing exact neighbor {nb}; shared edge {edge_len:.5} m",
                            tick.step,
                            tick.time,
                            msg.sender,
                            tick.states[msg.sender].potential_neighbors,
                        );
                    }
                }
            }
        }
    })
    .unwrap();
    eprintln!("total shown: {shown}");
}
