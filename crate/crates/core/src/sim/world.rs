use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{EventFlags, SimConfig};
use crate::control::Side;
use crate::error::{Error, Result};
use crate::traffic::{
    krauss_insertion_speed, krauss_next_speed, lane_change_decision, lane_change_is_safe, LaneChangeContext,
    LaneDecision, LaneView, Neighbor, TrafficConfig,
};

const PLACEMENT_ATTEMPTS: usize = 1000;

/// A lane change a car has signalled but not yet executed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PendingChange {
    pub side: Side,
    pub remaining: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub id: usize,
    /// Front bumper position, m.
    pub x: f64,
    /// Lateral center offset, m.
    pub y: f64,
    pub v: f64,
    pub a: f64,
    pub lane: usize,
    pub lateral_rate: f64,
    pub indicator_left: bool,
    pub indicator_right: bool,
    pub length: f64,
    pub width: f64,
    pub is_ego: bool,
    pub desired_speed: f64,
    pub pending: Option<PendingChange>,
}

impl VehicleState {
    pub fn rear(&self) -> f64 {
        self.x - self.length
    }

    fn set_indicator(&mut self, side: Option<Side>) {
        self.indicator_left = side == Some(Side::Left);
        self.indicator_right = side == Some(Side::Right);
    }
}

/// Full state of one episode. Index `0` of `vehicles` is always the ego.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub config: SimConfig,
    pub traffic: TrafficConfig,
    substeps: u64,
    pub vehicles: Vec<VehicleState>,
    rl_steps: u32,
    rng: ChaCha8Rng,
    distance: f64,
    start_x: f64,
    terminated: bool,
}

impl SimState {
    /// Places the ego at rest in a random lane and scatters the cars over the
    /// road. Identical seeds give identical states.
    pub fn init_episode(config: &SimConfig, traffic: &TrafficConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ego_lane = rng.random_range(0..config.n_lanes);
        let mut vehicles = vec![VehicleState {
            id: 0,
            x: config.ego_start_x,
            y: config.lane_center(ego_lane),
            v: 0.0,
            a: 0.0,
            lane: ego_lane,
            lateral_rate: 0.0,
            indicator_left: false,
            indicator_right: false,
            length: config.ego_length,
            width: config.ego_width,
            is_ego: true,
            desired_speed: config.ego_max_speed,
            pending: None,
        }];

        let fits = |vehicles: &[VehicleState], lane: usize, x: f64, len: f64| {
            vehicles.iter().filter(|o| o.lane == lane).all(|o| {
                x - len >= o.x + config.min_initial_gap || o.rear() >= x + config.min_initial_gap
            })
        };

        for id in 1..=config.n_cars {
            let mut placed = None;
            for _ in 0..PLACEMENT_ATTEMPTS {
                let lane = rng.random_range(0..config.n_lanes);
                let x = rng.random_range(config.car_length..=config.road_length.max(config.car_length));
                if fits(&vehicles, lane, x, config.car_length) {
                    placed = Some((lane, x));
                    break;
                }
            }
            let (lane, x) = placed.ok_or(Error::Placement {
                n_cars: config.n_cars,
                road_length: config.road_length,
            })?;
            let desired = rng.random_range(config.car_speed_min..=config.car_speed_max);
            vehicles.push(VehicleState {
                id,
                x,
                y: config.lane_center(lane),
                v: desired,
                a: 0.0,
                lane,
                lateral_rate: 0.0,
                indicator_left: false,
                indicator_right: false,
                length: config.car_length,
                width: config.car_width,
                is_ego: false,
                desired_speed: desired,
                pending: None,
            });
        }

        // insertion speeds: every car must be able to stop behind its leader
        let caps: Vec<f64> = (1..vehicles.len())
            .map(|i| {
                let me = &vehicles[i];
                vehicles
                    .iter()
                    .filter(|o| o.id != me.id && o.lane == me.lane && o.x > me.x)
                    .map(|o| o.rear() - me.x)
                    .fold(f64::INFINITY, f64::min)
            })
            .map(|gap| krauss_insertion_speed(gap, &traffic.krauss))
            .collect();
        for (car, cap) in vehicles.iter_mut().skip(1).zip(caps) {
            car.v = car.v.min(cap);
        }

        Ok(Self {
            config: config.clone(),
            traffic: traffic.clone(),
            substeps: 0,
            vehicles,
            rl_steps: 0,
            rng,
            distance: 0.0,
            start_x: config.ego_start_x,
            terminated: false,
        })
    }

    pub fn ego(&self) -> &VehicleState {
        &self.vehicles[0]
    }

    pub fn ego_mut(&mut self) -> &mut VehicleState {
        &mut self.vehicles[0]
    }

    pub fn substeps(&self) -> u64 {
        self.substeps
    }

    /// Simulated time in seconds.
    pub fn time(&self) -> f64 {
        self.substeps as f64 * self.config.substep_dt
    }

    pub fn rl_steps(&self) -> u32 {
        self.rl_steps
    }

    pub fn begin_decision(&mut self) {
        self.rl_steps += 1;
    }

    /// Distance the ego has covered since the episode started.
    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn start_x(&self) -> f64 {
        self.start_x
    }

    pub fn is_terminated(&self) -> bool {
        self.terminated
    }

    /// Uniform draw in `[0, 1)` from the world's random stream.
    pub(crate) fn uniform(&mut self) -> f64 {
        self.rng.random()
    }

    pub fn set_ego_indicator(&mut self, side: Option<Side>) {
        self.vehicles[0].set_indicator(side);
    }

    fn occupies(&self, v: &VehicleState, lane: usize) -> bool {
        (v.y - self.config.lane_center(lane)).abs() < (v.width + self.config.car_width) / 2.0
    }

    /// Nearest vehicle ahead of `idx` that occupies `lane`, as (net gap, index).
    fn leader_in(&self, idx: usize, lane: usize) -> Option<(f64, usize)> {
        let me = &self.vehicles[idx];
        self.vehicles
            .iter()
            .enumerate()
            .filter(|(j, o)| *j != idx && o.x > me.x && self.occupies(o, lane))
            .map(|(j, o)| (o.rear() - me.x, j))
            .min_by(|a, b| a.0.total_cmp(&b.0))
    }

    /// Nearest vehicle behind `idx` that occupies `lane`, as (net gap, index).
    fn follower_in(&self, idx: usize, lane: usize) -> Option<(f64, usize)> {
        let me = &self.vehicles[idx];
        self.vehicles
            .iter()
            .enumerate()
            .filter(|(j, o)| *j != idx && o.x <= me.x && self.occupies(o, lane))
            .map(|(j, o)| (me.rear() - o.x, j))
            .min_by(|a, b| a.0.total_cmp(&b.0))
    }

    /// Nearest leader in the ego's current lane, as (net gap, speed).
    pub fn ego_leader(&self) -> Option<(f64, f64)> {
        let lane = self.vehicles[0].lane;
        self.leader_in(0, lane).map(|(gap, j)| (gap, self.vehicles[j].v))
    }

    fn neighbor(&self, found: Option<(f64, usize)>) -> Option<Neighbor> {
        found.map(|(gap, j)| Neighbor {
            gap,
            v: self.vehicles[j].v,
        })
    }

    fn lane_view(&self, idx: usize, lane: usize) -> LaneView {
        LaneView {
            leader: self.neighbor(self.leader_in(idx, lane)),
            follower: self.neighbor(self.follower_in(idx, lane)),
        }
    }

    fn side_lane(&self, lane: usize, side: Side) -> Option<usize> {
        match side {
            Side::Left if lane + 1 < self.config.n_lanes => Some(lane + 1),
            Side::Right if lane > 0 => Some(lane - 1),
            _ => None,
        }
    }

    /// Lane-change context for vehicle `idx` (any vehicle, including the ego).
    pub fn lane_change_context(&self, idx: usize) -> LaneChangeContext {
        let me = &self.vehicles[idx];
        LaneChangeContext {
            v: me.v,
            v_desired: me.desired_speed,
            length: me.length,
            current: self.lane_view(idx, me.lane),
            left: self.side_lane(me.lane, Side::Left).map(|l| self.lane_view(idx, l)),
            right: self.side_lane(me.lane, Side::Right).map(|l| self.lane_view(idx, l)),
        }
    }

    /// Whether vehicle `idx` could move one lane towards `side` right now
    /// under the traffic lane-change safety rule. False when there is no lane.
    pub fn lane_change_is_safe(&self, idx: usize, side: Side) -> bool {
        let lane = self.vehicles[idx].lane;
        self.side_lane(lane, side).is_some_and(|t| {
            lane_change_is_safe(
                &self.lane_change_context(idx),
                &self.lane_view(idx, t),
                &self.traffic.krauss,
                &self.traffic.lane_change,
            )
        })
    }

    fn car_lane_logic(&mut self, idx: usize) {
        let traffic = &self.traffic;
        let lane = self.vehicles[idx].lane;
        match self.vehicles[idx].pending {
            Some(p) if p.remaining > 1 => {
                self.vehicles[idx].pending = Some(PendingChange {
                    remaining: p.remaining - 1,
                    ..p
                });
            }
            Some(p) => {
                let ctx = self.lane_change_context(idx);
                let target = self.side_lane(lane, p.side);
                let safe = target.is_some_and(|t| {
                    lane_change_is_safe(&ctx, &self.lane_view(idx, t), &traffic.krauss, &traffic.lane_change)
                });
                let car = &mut self.vehicles[idx];
                if let (true, Some(t)) = (safe, target) {
                    car.lane = t;
                    car.y = self.config.lane_center(t);
                }
                car.pending = None;
                car.set_indicator(None);
            }
            None => {
                if (self.substeps + self.vehicles[idx].id as u64) % traffic.decision_period as u64 != 0 {
                    return;
                }
                let ctx = self.lane_change_context(idx);
                if let LaneDecision::Change(side) = lane_change_decision(&ctx, &traffic.krauss, &traffic.lane_change) {
                    let signal = traffic.signal_substeps;
                    let car = &mut self.vehicles[idx];
                    car.set_indicator(Some(side));
                    car.pending = Some(PendingChange {
                        side,
                        remaining: signal.max(1),
                    });
                }
            }
        }
    }

    /// Advances the world by one substep with the given ego commands and
    /// returns the events detected afterwards.
    pub fn substep(&mut self, ego_accel: f64, ego_lateral_rate: f64) -> Result<EventFlags> {
        if self.terminated {
            return Err(Error::contract("substep on a terminated episode"));
        }
        if !ego_accel.is_finite() || !ego_lateral_rate.is_finite() {
            return Err(Error::Numeric("ego command"));
        }
        if ego_lateral_rate.abs() > self.config.ego_max_lateral_rate + 1e-12 {
            return Err(Error::contract(format!(
                "lateral rate {ego_lateral_rate} exceeds {}",
                self.config.ego_max_lateral_rate
            )));
        }
        let dt = self.config.substep_dt;

        // car speeds from the pre-step snapshot
        let n = self.vehicles.len();
        let mut next_v = Vec::with_capacity(n);
        for i in 1..n {
            let me = &self.vehicles[i];
            let (gap, v_leader) = match self.leader_in(i, me.lane) {
                Some((gap, j)) => (gap, self.vehicles[j].v),
                None => (f64::INFINITY, 0.0),
            };
            let noise: f64 = self.rng.random();
            next_v.push(krauss_next_speed(
                me.v,
                v_leader,
                gap,
                me.desired_speed,
                &self.traffic.krauss,
                dt,
                noise,
            ));
        }
        for i in 1..n {
            self.car_lane_logic(i);
        }

        for (car, v_new) in self.vehicles.iter_mut().skip(1).zip(next_v) {
            car.a = (v_new - car.v) / dt;
            car.v = v_new;
            car.x += v_new * dt;
        }

        let max_v = self.config.ego_max_speed;
        let lane_of = {
            let cfg = &self.config;
            move |y: f64| cfg.lane_of(y)
        };
        let ego = &mut self.vehicles[0];
        let v_new = (ego.v + ego_accel * dt).clamp(0.0, max_v);
        ego.a = (v_new - ego.v) / dt;
        ego.v = v_new;
        ego.x += v_new * dt;
        ego.y += ego_lateral_rate * dt;
        ego.lateral_rate = ego_lateral_rate;
        ego.lane = lane_of(ego.y);
        self.distance += v_new * dt;
        self.substeps += 1;

        let events = self.detect_events();
        if events.is_terminal() {
            self.terminated = true;
        }
        Ok(events)
    }

    /// Snaps the ego onto the center of its lane (used when a lane change
    /// completes, to keep accumulated rounding out of the geometry).
    pub fn snap_ego_to_lane(&mut self) {
        let center = self.config.lane_center(self.vehicles[0].lane);
        let ego = &mut self.vehicles[0];
        if (ego.y - center).abs() < 1e-6 {
            ego.y = center;
        }
        ego.lateral_rate = 0.0;
    }

    pub fn detect_events(&self) -> EventFlags {
        let cfg = &self.config;
        let ego = &self.vehicles[0];
        let mut flags = EventFlags::default();
        let mut lead: Option<(f64, f64)> = None;
        for car in &self.vehicles[1..] {
            let lateral = (ego.y - car.y).abs() < (ego.width + car.width) / 2.0;
            if !lateral {
                continue;
            }
            if ego.rear() < car.x && car.rear() < ego.x {
                flags.collision = true;
            } else if car.x > ego.x {
                let gap = car.rear() - ego.x;
                if lead.is_none_or(|(g, _)| gap < g) {
                    lead = Some((gap, car.v));
                }
            }
        }
        if let Some((gap, v_lead)) = lead {
            let closing = ego.v - v_lead;
            let ttc_hit = closing > 0.0 && gap / closing < cfg.near_collision_ttc;
            flags.near_collision = gap < cfg.near_collision_gap || ttc_hit;
        }
        let (lo, hi) = cfg.road_bounds();
        flags.off_road = ego.y < lo || ego.y > hi;
        flags.target_reached = ego.x >= cfg.target_x;
        flags
    }
}
