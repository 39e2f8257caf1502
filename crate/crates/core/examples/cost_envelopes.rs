//! The occupancy-dependent costs next to the linear pieces the model uses
//! for them. The largest piece reproduces the cost at every integer count.
//!
//! cargo run --example cost_envelopes

use teamplan::scenario::{edge_cost, overwatch_cost, EdgeId, EdgeParams, NodeId, OverwatchOpportunity};

fn main() {
    let n_agents = 8;
    let e = EdgeParams { from: NodeId(0), to: NodeId(1), w: 50.0, a: 4, m: 10.0, r: 1.0 };
    println!("edge w={} a={} m={} r={}", e.w, e.a, e.m, e.r);
    println!("  p   cost   shortfall piece   teaming piece");
    for p in 0..=n_agents {
        let c = edge_cost(&e, p, n_agents).unwrap();
        let (a, p_f) = (f64::from(e.a), f64::from(p));
        let short = if p == 0 { 0.0 } else { e.w + e.m * (a - p_f) };
        let team = if p == 0 { 0.0 } else { e.w - e.r * (p_f - a) };
        println!("{p:>3} {c:>6} {short:>17} {team:>15}");
    }

    let o = OverwatchOpportunity { watcher: NodeId(2), watched: EdgeId(0), omega: 20.0, alpha: 2, gamma: 2.0 };
    println!("\noverwatch omega={} alpha={} gamma={} (watched edge busy)", o.omega, o.alpha, o.gamma);
    println!("  rho   reward   ramp piece   tail piece");
    for rho in 0..=n_agents {
        let c = overwatch_cost(&o, rho, true, n_agents).unwrap();
        let r = f64::from(rho);
        let ramp = 0.0 - (o.omega / f64::from(o.alpha)) * r;
        let tail = -o.omega - o.gamma * (r - f64::from(o.alpha));
        println!("{rho:>5} {c:>8} {ramp:>12} {tail:>12}");
    }
}
