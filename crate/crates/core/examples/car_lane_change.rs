//! Lane-change decisions of a surrounding car in a few hand-built situations.

use truck_tactics::traffic::{lane_change_decision, LaneChangeContext, LaneView, Neighbor, TrafficConfig};

fn view(leader: Option<(f64, f64)>, follower: Option<(f64, f64)>) -> LaneView {
    let n = |(gap, v)| Neighbor { gap, v };
    LaneView {
        leader: leader.map(n),
        follower: follower.map(n),
    }
}

fn main() {
    let traffic = TrafficConfig::default();
    let stuck = view(Some((20.0, 16.0)), None);
    let cases = [
        ("free road", view(None, None), Some(view(None, None)), None),
        ("stuck behind a truck, left lane open", stuck, Some(view(None, None)), Some(view(None, None))),
        ("left lane has a fast car right behind", stuck, Some(view(None, Some((4.0, 33.0)))), None),
        ("left lane just as slow", stuck, Some(view(Some((20.0, 16.0)), None)), None),
    ];
    for (name, current, left, right) in cases {
        let ctx = LaneChangeContext {
            v: 24.0,
            v_desired: 32.0,
            length: 5.0,
            current,
            left,
            right,
        };
        let d = lane_change_decision(&ctx, &traffic.krauss, &traffic.lane_change);
        println!("{name:<40} -> {d:?}");
    }
}
