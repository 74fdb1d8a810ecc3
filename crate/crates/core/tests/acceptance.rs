//! Acceptance checks, one line of output per criterion. Runs as a plain
//! binary so every verdict is printed; exits non-zero if any check fails.

mod common;

use std::io::Cursor;
use std::time::{Duration, Instant};

use ndarray::{array, Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use truck_tactics::agent::{
    a2c_loss, a2c_targets, clipped_objective, dqn_loss, dqn_targets, ppo_loss, A2c, AgentConfig, Algorithm, Experience,
    Mlp, Mode, Ppo, PpoBatch, TransitionBatch,
};
use truck_tactics::control::{acc_track, idm_accel, AccState, ControllerConfig, IdmParams, LeadInfo};
use truck_tactics::env::{Architecture, SummaryBuilder};
use truck_tactics::eval::{run_rule_based_ego, validate_rounds, EpisodeAccumulator};
use truck_tactics::replay::{record_greedy_episode, replay_trace};
use truck_tactics::reward::{
    basic_reward, curriculum_reward, ideal_revenue, ideal_trip_cost, tcop_reward, tcop_reward_plain, BasicRewardParams,
    CurriculumStage, RewardKind, TcopParams, PROFIT_MARGIN,
};
use truck_tactics::sim::trace::Trace;
use truck_tactics::sim::SimState;
use truck_tactics::train::{build_env, episode_seed, CurriculumSchedule, Trainer};
use truck_tactics::RunConfig;

// Pinned tolerances.
const REWARD_TOL: f64 = 1e-9;
const ORACLE_TOL: f64 = 1e-8;
const GRAD_REL_TOL: f64 = 1e-4;
/// Gradients smaller than this are compared absolutely.
const GRAD_FLOOR: f64 = 1e-5;
const FD_STEP: f64 = 1e-5;
const EQ_GAP_TOL: f64 = 0.01;
const TRAIN_STEPS: u64 = 200_000;
const SEEDS: [u64; 3] = [1, 2, 3];
const SUCCESS_FLOOR: f64 = 0.60;

struct Verdict {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn report(id: u32, name: &'static str, pass: bool, detail: String) -> Verdict {
    println!("criterion {id:>2} {name}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    Verdict { id, name, pass, detail }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

// 1 -------------------------------------------------------------------------

fn tcop_closed_form() -> Verdict {
    let t0 = Instant::now();
    let mut cfg = RunConfig::default();
    cfg.env.sim.n_cars = 0;
    let tcop = TcopParams::default();
    let mut state = SimState::init_episode(&cfg.env.sim, &cfg.traffic, 7).expect("empty road");
    state.ego_mut().v = 22.0;
    let mut acc = EpisodeAccumulator::new(7);
    loop {
        state.begin_decision();
        let mut b = SummaryBuilder::start(&state);
        let mut done = false;
        for _ in 0..10 {
            let f = state.substep(0.0, 0.0).expect("substep");
            b.record(f);
            if f.is_terminal() {
                done = true;
                break;
            }
        }
        acc.add(&b.finish(&state), 0.0, &tcop);
        if done {
            break;
        }
    }
    let rec = acc.finish();
    let revenue = ideal_revenue(&tcop, PROFIT_MARGIN);
    let elapsed = t0.elapsed();
    let pass = (rec.energy_kwh - 1.85).abs() <= 0.01 * 1.85
        && close(rec.energy_cost, 0.925, 0.01)
        && close(rec.driver_cost, 1.39, 0.01)
        && close(rec.tcop(), 2.315, 0.02)
        && close(revenue, 2.78, 0.01)
        && elapsed < Duration::from_secs(1);
    report(
        1,
        "TCOP closed form",
        pass,
        format!(
            "{:.1} m in {:.1} s: {:.4} kWh, energy {:.4}, driver {:.4}, total {:.4}, revenue {:.4}, {:?}",
            rec.distance,
            rec.time,
            rec.energy_kwh,
            rec.energy_cost,
            rec.driver_cost,
            rec.tcop(),
            revenue,
            elapsed
        ),
    )
}

// 2 -------------------------------------------------------------------------

fn reward_oracles() -> Verdict {
    let basic = BasicRewardParams::default();
    let tcop = TcopParams::default();
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for (_, s) in reward_fixture() {
        let mut check = |got: f64, want: f64| {
            worst = worst.max((got - want).abs());
            cases += 1;
        };
        check(basic_reward(&s, &basic), oracle_basic(&s));
        for w in [1.0, 10.0, 36.0] {
            check(tcop_reward(&s, &tcop, w), oracle_tcop(&s, w));
        }
        check(tcop_reward_plain(&s, &tcop), oracle_tcop_plain(&s));
        for stage in [CurriculumStage::Stage1, CurriculumStage::Stage2, CurriculumStage::Stage3] {
            for normalized in [false, true] {
                check(
                    curriculum_reward(stage, normalized, &s, &tcop, 0.1),
                    oracle_curriculum(stage.index(), normalized, &s),
                );
            }
        }
    }

    // ideal episode: 100 one-second steps at 22 m/s, target on the last
    let none = flags(false, false, false, false, false);
    let mut ret = 0.0;
    for k in 0..100 {
        let ev = if k == 99 { flags(false, false, false, true, false) } else { none };
        ret += tcop_reward(&summary(22.0, 22.0, 1.0, 22.0, ev, (k == 99).then_some(100.0)), &tcop, 1.0);
    }
    let (e, d) = ideal_trip_cost(&tcop);
    let identity = close(ret, 2.78 - (e + d), REWARD_TOL) && close(ret, 0.46, 0.01);
    report(
        2,
        "reward oracles",
        worst <= REWARD_TOL && identity && reward_fixture().len() == 20,
        format!("{cases} evaluations on 20 cases, max error {worst:.2e}; ideal return {ret:.4}"),
    )
}

// 3 -------------------------------------------------------------------------

fn equilibrium_gap_oracle(v: f64, p: &IdmParams) -> f64 {
    // root of 1 - (v/v0)^delta - (s*/s)^2 in s by bisection
    let s_star = p.s0 + v * p.time_gap;
    let f = |s: f64| 1.0 - (v / p.v0).powf(p.delta) - (s_star / s).powi(2);
    let (mut lo, mut hi) = (s_star * 0.5, 1e4);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn idm_properties() -> Verdict {
    let t0 = Instant::now();
    let ctl = ControllerConfig::default();
    let mut notes = Vec::new();

    let mut fixed_point = true;
    for v0 in [10.0, 22.0, 25.0] {
        for t in [1.0, 2.0, 3.0] {
            let p = IdmParams::truck(v0, t);
            fixed_point &= idm_accel(v0, 0.0, f64::INFINITY, &p, 4.0).unwrap() == 0.0;
        }
    }
    if !fixed_point {
        notes.push("free-flow fixed point".to_string());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut violations = 0;
    for _ in 0..10_000 {
        let t = [1.0, 2.0, 3.0][rng.random_range(0..3)];
        let p = IdmParams::truck(25.0, t);
        let v = rng.random_range(0.0..35.0);
        let dv = rng.random_range(-2.5..15.0);
        let s = rng.random_range(0.1..200.0);
        let h = rng.random_range(1e-3..1.0);
        let a = idm_accel(v, dv, s, &p, 4.0).unwrap();
        if idm_accel(v + h, dv, s, &p, 4.0).unwrap() > a || idm_accel(v, dv, s + h, &p, 4.0).unwrap() < a {
            violations += 1;
        }
    }
    if violations > 0 {
        notes.push(format!("{violations} monotonicity violations"));
    }

    let mut worst_gap: f64 = 0.0;
    for (v_lead, gap_setting, v_init, gap_init) in [(20.0, 2.0, 15.0, 80.0), (15.0, 1.0, 15.0, 40.0), (10.0, 3.0, 12.0, 30.0)] {
        let acc = AccState {
            desired_speed: 25.0,
            time_gap: gap_setting,
        };
        let (mut v, mut gap) = (v_init, gap_init);
        for _ in 0..1200 {
            let a = acc_track(v, &acc, Some(LeadInfo { gap, v: v_lead }), &ctl).unwrap();
            let v_next = (v + a * 0.1).max(0.0);
            gap += (v_lead - v_next) * 0.1;
            v = v_next;
        }
        let want = equilibrium_gap_oracle(v_lead, &ctl.idm(&acc));
        worst_gap = worst_gap.max((gap - want).abs() / want);
    }
    if worst_gap > EQ_GAP_TOL {
        notes.push(format!("equilibrium gap off by {:.2}%", worst_gap * 100.0));
    }

    let acc = ctl.initial_acc_state();
    let mut v: f64 = 0.0;
    let mut monotone = true;
    for _ in 0..1000 {
        let next = v + acc_track(v, &acc, None, &ctl).unwrap() * 0.1;
        monotone &= next > v && next <= 25.0;
        v = next;
    }
    if !(monotone && v > 24.9) {
        notes.push(format!("step response ends at {v:.4}"));
    }
    let elapsed = t0.elapsed();
    let pass = notes.is_empty() && elapsed < Duration::from_secs(10);
    report(
        3,
        "IDM properties",
        pass,
        format!(
            "10000 monotonicity triples, equilibrium gap error {:.3}%, step response {v:.3} m/s after 100 s, {elapsed:?}{}",
            worst_gap * 100.0,
            if notes.is_empty() { String::new() } else { format!("; {}", notes.join(", ")) }
        ),
    )
}

// 4 -------------------------------------------------------------------------

fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(GRAD_FLOOR)
}

fn flat(g: &Mlp) -> Vec<f64> {
    g.params()
}

/// Worst relative error of `grads` against central differences of `loss`
/// with respect to the parameters of `net`.
fn fd_check(net: &Mlp, grads: &Mlp, loss: impl Fn(&Mlp) -> f64) -> f64 {
    let analytic = flat(grads);
    let mut worst: f64 = 0.0;
    for (i, &a) in analytic.iter().enumerate() {
        let mut plus = net.clone();
        *plus.param_mut(i) += FD_STEP;
        let mut minus = net.clone();
        *minus.param_mut(i) -= FD_STEP;
        let numeric = (loss(&plus) - loss(&minus)) / (2.0 * FD_STEP);
        worst = worst.max(rel_err(a, numeric));
    }
    worst
}

fn random_obs(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, d), |_| rng.random_range(-1.0..1.0))
}

fn gradient_fidelity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (d, k, n) = (5, 3, 6);
    let sizes = [d, 6, 5, k];
    let mut worst = [0.0f64; 3];
    for _ in 0..100 {
        let obs = random_obs(&mut rng, n, d);
        let actions: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();

        // DQN
        let q = Mlp::new(&sizes, 1.0, &mut rng);
        let targets: Array1<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let (_, g) = dqn_loss(&q, &obs, &actions, &targets).unwrap();
        worst[0] = worst[0].max(fd_check(&q, &g, |m| dqn_loss(m, &obs, &actions, &targets).unwrap().0));

        // A2C, actor and critic
        let actor = Mlp::new(&sizes, 1.0, &mut rng);
        let critic = Mlp::new(&[d, 6, 5, 1], 1.0, &mut rng);
        let adv: Array1<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let tgt: Array1<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let (ent, vf) = (rng.random_range(0.0..0.05), 0.5);
        let (_, ga, gc) = a2c_loss(&actor, &critic, &obs, &actions, &adv, &tgt, ent, vf).unwrap();
        let wa = fd_check(&actor, &ga, |m| a2c_loss(m, &critic, &obs, &actions, &adv, &tgt, ent, vf).unwrap().0.policy);
        let wc = fd_check(&critic, &gc, |m| vf * a2c_loss(&actor, m, &obs, &actions, &adv, &tgt, ent, vf).unwrap().0.value);
        worst[1] = worst[1].max(wa).max(wc);

        // PPO; old log-probabilities keep every ratio away from the clip kinks
        let actor = Mlp::new(&sizes, 1.0, &mut rng);
        let critic = Mlp::new(&[d, 6, 5, 1], 1.0, &mut rng);
        let logits = actor.forward(obs.view()).unwrap();
        let old: Array1<f64> = (0..n)
            .map(|i| {
                let lp = truck_tactics::agent::categorical::log_softmax(&logits.row(i).to_vec())[actions[i]];
                let shift = [-0.1, 0.05, 0.4, -0.5][rng.random_range(0..4)];
                lp + shift
            })
            .collect();
        let batch = PpoBatch {
            obs: obs.clone(),
            actions: actions.clone(),
            old_log_probs: old,
            advantages: (0..n).map(|_| rng.random_range(-2.0..2.0)).collect(),
            returns: (0..n).map(|_| rng.random_range(-2.0..2.0)).collect(),
        };
        let (_, ga, gc) = ppo_loss(&actor, &critic, &batch, 0.2, ent, vf).unwrap();
        let wa = fd_check(&actor, &ga, |m| ppo_loss(m, &critic, &batch, 0.2, ent, vf).unwrap().0.total);
        let wc = fd_check(&critic, &gc, |m| ppo_loss(&actor, m, &batch, 0.2, ent, vf).unwrap().0.total);
        worst[2] = worst[2].max(wa).max(wc);
    }
    report(
        4,
        "gradient fidelity",
        worst.iter().all(|&w| w < GRAD_REL_TOL),
        format!(
            "100 trials each, max relative error dqn {:.2e}, a2c {:.2e}, ppo {:.2e}",
            worst[0], worst[1], worst[2]
        ),
    )
}

// 5 -------------------------------------------------------------------------

fn linear(w: &[f64], b: &[f64]) -> Mlp {
    Mlp {
        weights: vec![Array2::from_shape_vec((1, w.len()), w.to_vec()).unwrap()],
        biases: vec![Array1::from(b.to_vec())],
    }
}

fn softmax2(z0: f64, z1: f64) -> [f64; 2] {
    let m = z0.max(z1);
    let (e0, e1) = ((z0 - m).exp(), (z1 - m).exp());
    [e0 / (e0 + e1), e1 / (e0 + e1)]
}

fn dqn_oracle() -> (bool, String) {
    let target = linear(&[0.0, 0.0], &[2.0, 1.5]);
    let batch = TransitionBatch {
        obs: array![[1.0]],
        actions: vec![0],
        rewards: array![1.0],
        next_obs: array![[0.3]],
        terminated: vec![false],
    };
    let y = dqn_targets(&target, &batch, 0.99).unwrap()[0];
    let q = linear(&[0.5, -0.2], &[0.1, 0.0]);
    let (loss, g) = dqn_loss(&q, &batch.obs, &batch.actions, &array![y]).unwrap();
    let want_loss = (2.98 - 0.6f64).powi(2);
    let want_gw = -2.0 * (2.98 - 0.6);
    let ok = close(y, 2.98, ORACLE_TOL)
        && close(loss, want_loss, ORACLE_TOL)
        && close(g.weights[0][[0, 0]], want_gw, ORACLE_TOL)
        && g.weights[0][[0, 1]] == 0.0;
    (ok, format!("dqn y = {y:.10}, loss {loss:.10}"))
}

fn a2c_oracle() -> (bool, String) {
    let (gamma, lr, vf, c, clip) = (0.9, 0.01, 0.5, 0.02, 0.5);
    let mut cfg = AgentConfig {
        algorithm: Algorithm::A2c,
        gamma,
        hidden: vec![],
        entropy_start: c,
        entropy_end: c,
        ..AgentConfig::default()
    };
    cfg.a2c.n_steps = 2;
    cfg.a2c.lr = lr;
    cfg.a2c.vf_coef = vf;
    cfg.a2c.max_grad_norm = clip;
    let mut agent = A2c::new(&cfg, 1, 2, 1000, 0);
    let (w, bb) = ([0.3, -0.2], [0.1, 0.0]);
    let (u, cc) = (0.4, 0.2);
    agent.actor = linear(&w, &bb);
    agent.critic = linear(&[u], &[cc]);
    let steps = [
        (1.0, 0usize, 1.0, 0.5, false),
        (0.5, 1usize, 0.0, 0.0, true),
    ];
    for &(x, a, r, xn, term) in &steps {
        agent
            .observe(Experience {
                obs: vec![x],
                action: a,
                reward: r,
                next_obs: vec![xn],
                terminated: term,
                truncated: false,
            })
            .unwrap();
    }

    // scalar hand computation
    let v = |x: f64| u * x + cc;
    let mut g = [0.0f64; 6]; // w0 w1 b0 b1 u c
    let bsz = 2.0;
    for &(x, a, r, xn, term) in &steps {
        let y = if term { r } else { r + gamma * v(xn) };
        let adv = y - v(x);
        let p = softmax2(w[0] * x + bb[0], w[1] * x + bb[1]);
        let h = -(p[0] * p[0].ln() + p[1] * p[1].ln());
        for k in 0..2 {
            let onehot = if k == a { 1.0 } else { 0.0 };
            let dz = -adv * (onehot - p[k]) / bsz + c * p[k] * (p[k].ln() + h) / bsz;
            g[k] += dz * x;
            g[2 + k] += dz;
        }
        let dv = -2.0 * vf * (y - v(x)) / bsz;
        g[4] += dv * x;
        g[5] += dv;
    }
    let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    let scale = if norm > clip { clip / norm } else { 1.0 };
    // first Adam step moves each parameter by lr * g / (|g| + eps)
    let step = |p: f64, gi: f64| {
        let gi = gi * scale;
        p - lr * gi / (gi.abs() + 1e-8)
    };
    let want = [
        step(w[0], g[0]),
        step(w[1], g[1]),
        step(bb[0], g[2]),
        step(bb[1], g[3]),
        step(u, g[4]),
        step(cc, g[5]),
    ];
    let got = [
        agent.actor.weights[0][[0, 0]],
        agent.actor.weights[0][[0, 1]],
        agent.actor.biases[0][0],
        agent.actor.biases[0][1],
        agent.critic.weights[0][[0, 0]],
        agent.critic.biases[0][0],
    ];
    let err = want.iter().zip(&got).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    // targets and advantages on their own
    let rollout: Vec<Experience> = steps
        .iter()
        .map(|&(x, a, r, xn, term)| Experience {
            obs: vec![x],
            action: a,
            reward: r,
            next_obs: vec![xn],
            terminated: term,
            truncated: false,
        })
        .collect();
    let critic = linear(&[u], &[cc]);
    let (t, adv) = a2c_targets(&critic, &rollout, gamma).unwrap();
    let t_ok = close(t[0], 1.0 + gamma * v(0.5), ORACLE_TOL)
        && close(t[1], 0.0, ORACLE_TOL)
        && close(adv[0], t[0] - v(1.0), ORACLE_TOL)
        && close(adv[1], -v(0.5), ORACLE_TOL);
    (err <= ORACLE_TOL && t_ok, format!("a2c two-step update error {err:.2e}"))
}

fn ppo_oracle() -> (bool, String) {
    let clip = 0.2;
    let cases = [
        (1.5, 1.0, 1.2),
        (0.5, 1.0, 0.5),
        (0.5, -1.0, -0.8),
        (1.5, -1.0, -1.5),
        (1.0, 0.7, 0.7),
        (1.1, 2.0, 2.2),
    ];
    let mut ok = cases.iter().all(|&(r, a, want)| close(clipped_objective(r, a, clip), want, ORACLE_TOL));

    // single batch: ratios set through the stored log-probabilities
    let actor = linear(&[0.3, -0.2], &[0.1, 0.0]);
    let critic = linear(&[0.4], &[0.2]);
    let xs = [1.0, 0.5, -1.0];
    let acts = [0usize, 1, 0];
    let ratios: [f64; 3] = [1.5, 0.7, 1.05];
    let advs = [1.0, -2.0, 0.5];
    let rets = [0.3, -0.1, 1.0];
    let logp = |x: f64, a: usize| softmax2(0.3 * x + 0.1, -0.2 * x)[a].ln();
    let batch = PpoBatch {
        obs: Array2::from_shape_vec((3, 1), xs.to_vec()).unwrap(),
        actions: acts.to_vec(),
        old_log_probs: (0..3).map(|i| logp(xs[i], acts[i]) - ratios[i].ln()).collect(),
        advantages: Array1::from(advs.to_vec()),
        returns: Array1::from(rets.to_vec()),
    };
    let (losses, _, _) = ppo_loss(&actor, &critic, &batch, clip, 0.0, 0.5).unwrap();
    let want_policy = -(1.2 * 1.0 + 0.8 * -2.0 + 1.05 * 0.5) / 3.0;
    let want_value = (0..3).map(|i| (0.4 * xs[i] + 0.2 - rets[i]).powi(2)).sum::<f64>() / 3.0;
    ok &= close(losses.policy, want_policy, ORACLE_TOL)
        && close(losses.value, want_value, ORACLE_TOL)
        && close(losses.clip_fraction, 2.0 / 3.0, ORACLE_TOL);
    (ok, format!("ppo policy loss {:.10}", losses.policy))
}

fn ratio_at_collection() -> (bool, String) {
    let cfg = RunConfig::default();
    let mut env = build_env(&cfg.env, &cfg.traffic, &cfg.controller, &cfg.reward).unwrap();
    let mut agent = Ppo::new(&cfg.agent, env.observation_len(), env.n_actions(), 100_000, 5);
    let mut obs = env.reset(1).unwrap().0;
    let mut episode = 1;
    for _ in 0..1500 {
        let a = agent.act(&obs, Mode::Train).unwrap();
        let tr = env.step(a).unwrap();
        let next = tr.observation.0.clone();
        agent
            .observe(Experience {
                obs,
                action: a,
                reward: tr.reward,
                next_obs: next.clone(),
                terminated: tr.terminated,
                truncated: tr.truncated,
            })
            .unwrap();
        obs = if tr.done() {
            episode += 1;
            env.reset(episode).unwrap().0
        } else {
            next
        };
    }
    let ratios = agent.rollout_ratios().unwrap();
    let ok = ratios.len() == 1500 && ratios.iter().all(|&r| r == 1.0);
    (ok, format!("{} stored samples with ratio 1", ratios.iter().filter(|&&r| r == 1.0).count()))
}

fn update_oracles() -> Verdict {
    let parts = [dqn_oracle(), a2c_oracle(), ppo_oracle(), ratio_at_collection()];
    let pass = parts.iter().all(|p| p.0);
    let detail = parts.iter().map(|p| p.1.clone()).collect::<Vec<_>>().join("; ");
    report(5, "update oracles", pass, detail)
}

// 6 -------------------------------------------------------------------------

fn curriculum_schedule() -> Verdict {
    let sched = CurriculumSchedule::default();
    let idx = |s: u64| sched.stage(s).index();
    let static_ok = idx(0) == 1
        && idx(699_999) == 1
        && idx(700_000) == 2
        && idx(1_199_999) == 2
        && idx(1_200_000) == 3
        && idx(1_699_999) == 3;

    let mut cfg = RunConfig::default();
    cfg.reward.kind = RewardKind::Curriculum;
    cfg.training.curriculum = true;
    cfg.training.log_steps = true;
    let mut trainer = Trainer::new(&cfg, 1).unwrap();
    trainer.run_until(1_200_200).unwrap();
    let log = trainer.step_log();
    let mut transitions = Vec::new();
    let mut mismatches = 0;
    let reward_fn = cfg.reward.function();
    for (k, row) in log.iter().enumerate() {
        if k > 0 && row.stage != log[k - 1].stage {
            transitions.push(row.step);
        }
        let stage = CurriculumStage::from_index(row.stage).unwrap();
        let want = reward_fn.with_stage(stage).evaluate(&row.summary);
        let expected_stage = sched.stage(row.step);
        if want.to_bits() != row.reward.to_bits() || stage != expected_stage || row.step != k as u64 {
            mismatches += 1;
        }
    }
    let pass = static_ok && transitions == [700_000, 1_200_000] && mismatches == 0;
    report(
        6,
        "curriculum schedule",
        pass,
        format!(
            "stage changes logged at {transitions:?}; {} logged rewards audited, {mismatches} mismatches",
            log.len()
        ),
    )
}

// 7 -------------------------------------------------------------------------

fn determinism() -> Verdict {
    let mut cfg = RunConfig::default();
    cfg.training.total_steps = 12_000;
    cfg.training.log_steps = true;
    let mut a = Trainer::new(&cfg, 9).unwrap();
    a.run_until(12_000).unwrap();
    let mut b = Trainer::new(&cfg, 9).unwrap();
    b.run_until(12_000).unwrap();
    let bits = |t: &Trainer| {
        t.curve()
            .iter()
            .map(|r| (r.step, r.episode_return.to_bits(), r.episode_length))
            .collect::<Vec<_>>()
    };
    let curves_equal = bits(&a) == bits(&b) && !a.curve().is_empty();

    // replay every logged training episode from its seed and actions
    let mut env = build_env(&cfg.env, &cfg.traffic, &cfg.controller, &cfg.reward).unwrap();
    let log = a.step_log();
    let mut pos = 0;
    let mut diverged = 0;
    for (ep, row) in a.curve().iter().enumerate() {
        env.reset(episode_seed(9, 0, ep as u64)).unwrap();
        for logged in &log[pos..pos + row.episode_length as usize] {
            let tr = env.step(logged.action).unwrap();
            if tr.reward.to_bits() != logged.reward.to_bits() || tr.summary != logged.summary {
                diverged += 1;
            }
        }
        pos += row.episode_length as usize;
    }

    // substep-level trace through its file form
    let seed = cfg.eval.seeds(0, 1)[0];
    let trace = record_greedy_episode(&a.agent, &cfg, seed).unwrap();
    let mut buf = Vec::new();
    trace.write_csv(&mut buf).unwrap();
    let parsed = Trace::read_csv(Cursor::new(buf)).unwrap();
    let report_ = replay_trace(&cfg, &parsed).unwrap();
    let pass = curves_equal && diverged == 0 && report_.divergence.is_none();
    report(
        7,
        "determinism",
        pass,
        format!(
            "{} episodes bit-identical across runs: {curves_equal}; {} episodes replayed, {diverged} diverging steps; trace of {} substeps replays {}",
            a.curve().len(),
            a.curve().len(),
            parsed.rows.len(),
            if report_.divergence.is_none() { "cleanly" } else { "with divergence" }
        ),
    )
}

// 8, 9 ----------------------------------------------------------------------

struct ArmResult {
    success: Vec<f64>,
    speed: Vec<f64>,
}

fn train_arm(cfg: &RunConfig) -> ArmResult {
    let mut success = Vec::new();
    let mut speed = Vec::new();
    for seed in SEEDS {
        let mut t = Trainer::new(cfg, seed).unwrap();
        t.run_until(u64::MAX).unwrap();
        let (_, agg) = validate_rounds(&t.agent, cfg).unwrap();
        success.push(agg.reached_pct / 100.0);
        speed.push(agg.avg_speed);
    }
    ArmResult { success, speed }
}

fn arm_config(arch: Architecture, d_lead: bool) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.env.architecture = arch;
    cfg.env.include_d_lead = d_lead;
    cfg.training.total_steps = TRAIN_STEPS;
    cfg
}

fn fmt(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(", ")
}

fn architecture_direction(baseline: &ArmResult) -> Verdict {
    let hier = train_arm(&arm_config(Architecture::Hierarchical, true));
    let (mh, _) = mean_std(&hier.success);
    let (mb, _) = mean_std(&baseline.success);
    report(
        8,
        "architecture direction",
        mh >= mb && mh >= SUCCESS_FLOOR,
        format!("success hierarchical [{}] mean {mh:.3}, baseline [{}] mean {mb:.3}", fmt(&hier.success), fmt(&baseline.success)),
    )
}

fn observation_ablation(with: &ArmResult) -> Verdict {
    let without = train_arm(&arm_config(Architecture::Baseline, false));
    let (mw, sw) = mean_std(&with.success);
    let (mo, so) = mean_std(&without.success);
    let noise = (2.0 * (sw * sw / 3.0 + so * so / 3.0).sqrt()).max(0.05);
    report(
        9,
        "observation ablation",
        mo - mw <= noise,
        format!(
            "baseline success with leader distance [{}] mean {mw:.3}, without [{}] mean {mo:.3}, margin {noise:.3}",
            fmt(&with.success),
            fmt(&without.success)
        ),
    )
}

// 10 ------------------------------------------------------------------------

fn rule_based_tcop() -> Verdict {
    let cfg = RunConfig::default();
    let t = run_rule_based_ego(&cfg, 100).unwrap();
    report(
        10,
        "rule-based ego cost",
        (3.0..=5.0).contains(&t.avg_tcop),
        format!(
            "average tcop {:.3} EUR (energy {:.3}, driver {:.3}), reached {:.0}%",
            t.avg_tcop, t.avg_energy_cost, t.avg_driver_cost, t.reached_pct
        ),
    )
}

// 11 ------------------------------------------------------------------------

fn normalization_effect() -> Verdict {
    let arm = |kind: RewardKind| {
        let mut cfg = RunConfig::default();
        cfg.reward.kind = kind;
        cfg.training.curriculum = true;
        cfg.training.scale = 0.2;
        // end of the second stage: 1.4e5 steps of stage 1, then 1e5 of stage 2
        cfg.training.total_steps = 1_200_000;
        train_arm(&cfg)
    };
    let norm = arm(RewardKind::CurriculumNormalized);
    let plain = arm(RewardKind::Curriculum);
    let (mn, _) = mean_std(&norm.speed);
    let (mp, _) = mean_std(&plain.speed);
    report(
        11,
        "normalization effect",
        mn > mp,
        format!(
            "mean evaluation speed normalized [{}] {mn:.2} m/s, unnormalized [{}] {mp:.2} m/s",
            fmt(&norm.speed),
            fmt(&plain.speed)
        ),
    )
}

fn main() {
    let t0 = Instant::now();
    let mut verdicts = vec![
        tcop_closed_form(),
        reward_oracles(),
        idm_properties(),
        gradient_fidelity(),
        update_oracles(),
    ];
    verdicts.push(curriculum_schedule());
    verdicts.push(determinism());
    let baseline = train_arm(&arm_config(Architecture::Baseline, true));
    verdicts.push(architecture_direction(&baseline));
    verdicts.push(observation_ablation(&baseline));
    verdicts.push(rule_based_tcop());
    verdicts.push(normalization_effect());

    let failed: Vec<&Verdict> = verdicts.iter().filter(|v| !v.pass).collect();
    println!(
        "acceptance: {}/{} criteria pass in {:.0?}",
        verdicts.len() - failed.len(),
        verdicts.len(),
        t0.elapsed()
    );
    if !failed.is_empty() {
        for v in failed {
            eprintln!("failed: criterion {} {}: {}", v.id, v.name, v.detail);
        }
        std::process::exit(1);
    }
}
