use ndarray::Array2;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use truck_tactics::agent::categorical::*;
use truck_tactics::agent::*;

fn experience(obs_len: usize, step: usize, n_actions: usize) -> Experience {
    let obs: Vec<f64> = (0..obs_len).map(|i| ((step * 7 + i) % 11) as f64 / 11.0 - 0.5).collect();
    let next_obs: Vec<f64> = obs.iter().map(|x| -x).collect();
    Experience {
        obs,
        action: step % n_actions,
        reward: (step % 5) as f64 - 2.0,
        next_obs,
        terminated: step % 17 == 16,
        truncated: false,
    }
}

fn small_cfg(algorithm: Algorithm) -> AgentConfig {
    let mut cfg = AgentConfig {
        algorithm,
        hidden: vec![8],
        ..AgentConfig::default()
    };
    cfg.ppo.n_steps = 32;
    cfg.ppo.batch_size = 8;
    cfg.a2c.n_steps = 5;
    cfg.dqn.learning_starts = 10;
    cfg.dqn.batch_size = 8;
    cfg.dqn.target_update = 50;
    cfg
}

#[test]
fn sampling_follows_softmax() {
    let logits = [0.0, 2f64.ln(), 3f64.ln()];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut counts = [0usize; 3];
    let n = 60_000;
    for _ in 0..n {
        counts[sample(&logits, &mut rng)] += 1;
    }
    for (i, expected) in [1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0].iter().enumerate() {
        let freq = counts[i] as f64 / n as f64;
        assert!((freq - expected).abs() < 0.01, "action {i}: {freq}");
    }
}

#[test]
fn entropy_extremes() {
    assert!((entropy(&[0.0; 8]) - 8f64.ln()).abs() < 1e-12);
    assert!(entropy(&[0.0, 0.0, 200.0]) < 1e-12);
}

#[test]
fn argmax_prefers_lowest_index() {
    assert_eq!(argmax(&[1.0, 3.0, 3.0, 2.0]), 1);
}

#[test]
fn mlp_parameter_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let net = Mlp::new(&[111, 64, 64, 8], 0.01, &mut rng);
    assert_eq!(net.n_params(), 111 * 64 + 64 + 64 * 64 + 64 + 64 * 8 + 8);
    assert_eq!(net.params().len(), net.n_params());
    assert!(net.biases[2].iter().all(|&b| b == 0.0));
}

#[test]
fn mlp_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let net = Mlp::new(&[4, 6, 3], 1.0, &mut rng);
    let x = Array2::from_shape_fn((5, 4), |(r, c)| ((r * 4 + c) as f64 * 0.37).sin());
    let w = Array2::from_shape_fn((5, 3), |(r, c)| ((r + 2 * c) as f64 * 0.71).cos());
    let objective = |n: &Mlp| (n.forward(x.view()).unwrap() * &w).sum();
    let (_, tape) = net.forward_cached(x.view()).unwrap();
    let grads = net.backward(&tape, w.view()).unwrap().params();
    let h = 1e-6;
    for (i, g) in grads.iter().enumerate() {
        let mut plus = net.clone();
        *plus.param_mut(i) += h;
        let mut minus = net.clone();
        *minus.param_mut(i) -= h;
        let fd = (objective(&plus) - objective(&minus)) / (2.0 * h);
        assert!((fd - g).abs() < 1e-6 * (1.0 + g.abs()), "param {i}: {fd} vs {g}");
    }
}

#[test]
fn replay_buffer_is_a_ring() {
    let mut buf = ReplayBuffer::new(3, 2);
    for r in 0..5 {
        buf.push(&[r as f64, 0.0], 0, r as f64, &[0.0, 0.0], false);
    }
    assert_eq!(buf.len(), 3);
    assert_eq!([buf.reward_at(0), buf.reward_at(1), buf.reward_at(2)], [3.0, 4.0, 2.0]);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let batch = buf.sample(50, &mut rng);
    assert!(batch.rewards.iter().all(|r| [2.0, 3.0, 4.0].contains(r)));
    for (row, r) in batch.obs.rows().into_iter().zip(batch.rewards.iter()) {
        assert_eq!(row[0], *r);
    }
}

#[test]
fn epsilon_decays_linearly_then_holds() {
    let cfg = small_cfg(Algorithm::Dqn);
    let mut dqn = Dqn::new(&cfg, 4, 3, 1000, 0);
    assert_eq!(dqn.epsilon(), 1.0);
    for s in 0..50 {
        dqn.observe(experience(4, s, 3)).unwrap();
    }
    assert!((dqn.epsilon() - 0.525).abs() < 1e-12);
    for s in 50..300 {
        dqn.observe(experience(4, s, 3)).unwrap();
    }
    assert!((dqn.epsilon() - 0.05).abs() < 1e-12);
}

#[test]
fn full_exploration_is_uniform() {
    let mut cfg = small_cfg(Algorithm::Dqn);
    cfg.dqn.exploration_initial = 1.0;
    cfg.dqn.exploration_final = 1.0;
    let mut agent = Agent::new(&cfg, 4, 8, 1000, 5).unwrap();
    let mut counts = [0usize; 8];
    let n = 40_000;
    for _ in 0..n {
        counts[agent.act(&[0.1, 0.2, 0.3, 0.4], Mode::Train).unwrap()] += 1;
    }
    for c in counts {
        assert!((c as f64 / n as f64 - 0.125).abs() < 0.01);
    }
}

#[test]
fn entropy_schedule_is_linear() {
    let s = AgentConfig::default().entropy_schedule(1000);
    assert_eq!(s.value(0), 0.01);
    assert!((s.value(500) - 0.0055).abs() < 1e-15);
    assert_eq!(s.value(1000), 0.001);
    assert_eq!(s.value(5000), 0.001);
}

#[test]
fn gae_with_unit_lambda_is_discounted_return() {
    let rewards = [1.0, 2.0, 3.0, 4.0];
    let values = [0.5, -0.5, 1.0, 0.0];
    let dones = [false, true, false, false];
    let (adv, ret) = compute_gae(&rewards, &values, &dones, 10.0, 0.9, 1.0);
    let expected_ret = [1.0 + 0.9 * 2.0, 2.0, 3.0 + 0.9 * 4.0 + 0.81 * 10.0, 4.0 + 0.9 * 10.0];
    for t in 0..4 {
        assert!((ret[t] - expected_ret[t]).abs() < 1e-12);
        assert!((adv[t] - (expected_ret[t] - values[t])).abs() < 1e-12);
    }
}

#[test]
fn config_validation() {
    assert!(AgentConfig::default().validate().is_ok());
    let mut bad = AgentConfig::default();
    bad.gamma = 1.5;
    assert!(bad.validate().is_err());
    let mut bad = AgentConfig::default();
    bad.hidden = vec![0];
    assert!(bad.validate().is_err());
}

#[test]
fn agents_learn_deterministically_and_serialise() {
    for alg in [Algorithm::Dqn, Algorithm::A2c, Algorithm::Ppo] {
        let cfg = small_cfg(alg);
        let mut a = Agent::new(&cfg, 4, 3, 500, 9).unwrap();
        let mut b = Agent::new(&cfg, 4, 3, 500, 9).unwrap();
        let mut acts = (Vec::new(), Vec::new());
        for s in 0..200 {
            let e = experience(4, s, 3);
            acts.0.push(a.act(&e.obs, Mode::Train).unwrap());
            acts.1.push(b.act(&e.obs, Mode::Train).unwrap());
            a.observe(e.clone()).unwrap();
            b.observe(e).unwrap();
        }
        assert_eq!(acts.0, acts.1, "{alg:?}");
        assert_eq!(a, b, "{alg:?}");
        assert!(a.is_finite());

        let text = serde_json::to_string(&a).unwrap();
        let mut back: Agent = serde_json::from_str(&text).unwrap();
        assert_eq!(back, a, "{alg:?}");
        for s in 0..20 {
            let e = experience(4, 500 + s, 3);
            assert_eq!(back.act(&e.obs, Mode::Train).unwrap(), a.act(&e.obs, Mode::Train).unwrap());
        }
        assert_eq!(back.algorithm(), alg);
        assert_eq!((back.input_len(), back.n_actions()), (4, 3));
    }
}

#[test]
fn greedy_action_needs_no_randomness() {
    let cfg = small_cfg(Algorithm::Ppo);
    let mut a = Agent::new(&cfg, 4, 3, 500, 1).unwrap();
    let obs = [0.3, -0.1, 0.8, 0.0];
    let first = a.act(&obs, Mode::Eval).unwrap();
    for _ in 0..10 {
        assert_eq!(a.act(&obs, Mode::Eval).unwrap(), first);
    }
}

proptest! {
    #[test]
    fn log_softmax_normalises(logits in prop::collection::vec(-50.0f64..50.0, 1..12), shift in -100.0f64..100.0) {
        let lp = log_softmax(&logits);
        let total: f64 = lp.iter().map(|x| x.exp()).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let shifted: Vec<f64> = logits.iter().map(|z| z + shift).collect();
        for (a, b) in lp.iter().zip(log_softmax(&shifted)) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        let h = entropy(&logits);
        prop_assert!(h >= -1e-12 && h <= (logits.len() as f64).ln() + 1e-12);
    }

    #[test]
    fn clipped_objective_is_pessimistic(ratio in 0.0f64..3.0, adv in -5.0f64..5.0, clip in 0.05f64..0.5) {
        let obj = clipped_objective(ratio, adv, clip);
        prop_assert!(obj <= ratio * adv + 1e-12);
        if (1.0 - clip..=1.0 + clip).contains(&ratio) {
            prop_assert!((obj - ratio * adv).abs() < 1e-12);
        }
    }

    #[test]
    fn grad_clipping_bounds_the_norm(scale in 0.01f64..1000.0, max_norm in 0.1f64..10.0, seed in 0u64..100) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g1 = Mlp::new(&[3, 4, 2], 1.0, &mut rng);
        let mut g2 = Mlp::new(&[3, 2], 1.0, &mut rng);
        g1.scale(scale);
        g2.scale(scale);
        let before = (g1.sq_norm() + g2.sq_norm()).sqrt();
        let reported = clip_grad_norm(&mut [&mut g1, &mut g2], max_norm);
        let after = (g1.sq_norm() + g2.sq_norm()).sqrt();
        prop_assert!((reported - before).abs() < 1e-9 * before.max(1.0));
        prop_assert!(after <= max_norm + 1e-9);
        if before <= max_norm {
            prop_assert!((after - before).abs() < 1e-12);
        }
    }
}
