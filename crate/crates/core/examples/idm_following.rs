//! The truck's cruise controller closing in on a slower leader, for each
//! selectable time gap.

use truck_tactics::control::{acc_track, AccState, ControllerConfig, LeadInfo, TIME_GAPS};

fn main() {
    let cfg = ControllerConfig::default();
    let dt = 0.1;
    for time_gap in TIME_GAPS {
        let acc = AccState {
            desired_speed: 25.0,
            time_gap,
        };
        let (mut v, mut gap, v_lead) = (25.0, 120.0, 18.0);
        let mut min_gap = gap;
        for _ in 0..1200 {
            let a = acc_track(v, &acc, Some(LeadInfo { gap, v: v_lead }), &cfg).expect("finite inputs");
            v = (v + a * dt).max(0.0);
            gap += (v_lead - v) * dt;
            min_gap = min_gap.min(gap);
        }
        // IDM steady state behind a leader at constant speed
        let free = 1.0 - (v_lead / acc.desired_speed).powf(cfg.delta);
        let equilibrium = (cfg.s0 + v_lead * time_gap) / free.sqrt();
        println!(
            "T = {time_gap} s: v = {v:.2} m/s, gap = {gap:.1} m (equilibrium {equilibrium:.1} m), closest {min_gap:.1} m"
        );
    }
}
