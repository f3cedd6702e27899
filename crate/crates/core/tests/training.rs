use cocreate_core::agent::{
    derive_seed, ppo_loss, train, AgentError, PolicyDistribution, PpoConfig, PpoSample,
};
use cocreate_core::behavior::{Emulator, FixedSchedule};
use cocreate_core::neural::{gradient_check, NetworkConfig, NetworkParams};
use cocreate_core::{EnvSpec, ServiceParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tiny_spec() -> EnvSpec {
    let params = ServiceParams {
        alpha1: 0.5,
        alpha2: 0.4,
        budget: 6.0,
        beta: 1.0,
        capacity_levels: vec![0.0, 1.0, 2.0],
        n_users: 2,
        horizon: 4,
        n_extras: 0,
        discount: 1.0,
    };
    let schedule = FixedSchedule {
        engagement: vec![
            vec![9.0, 16.0],
            vec![4.0, 1.0],
            vec![16.0, 9.0],
            vec![1.0, 4.0],
        ],
    };
    EnvSpec::new(params, Emulator::Schedule(schedule))
}

fn small_net(spec: &EnvSpec) -> NetworkConfig {
    let p = &spec.params;
    NetworkConfig {
        lstm_hidden: 8,
        actor_hidden: vec![8],
        critic_hidden: vec![8],
        ..NetworkConfig::new(p.observation_len(), p.n_levels() + p.n_users)
    }
}

fn quick_ppo(batches: usize) -> PpoConfig {
    PpoConfig {
        batches,
        episodes_per_batch: 8,
        minibatch_episodes: 4,
        epochs_per_batch: 2,
        actor_lr: 3e-3,
        critic_lr: 3e-3,
        ..PpoConfig::default()
    }
}

#[test]
fn same_seed_gives_identical_curves() {
    let spec = tiny_spec();
    let a = train(&spec, &small_net(&spec), &quick_ppo(4), 11).unwrap();
    let b = train(&spec, &small_net(&spec), &quick_ppo(4), 11).unwrap();
    assert_eq!(a.curve, b.curve);
    assert_eq!(a.params.values, b.params.values);
    let c = train(&spec, &small_net(&spec), &quick_ppo(4), 12).unwrap();
    assert_ne!(a.params.values, c.params.values);
}

#[test]
fn zero_learning_rate_leaves_weights_untouched() {
    let spec = tiny_spec();
    let net = small_net(&spec);
    let cfg = PpoConfig {
        actor_lr: 0.0,
        critic_lr: 0.0,
        ..quick_ppo(3)
    };
    let out = train(&spec, &net, &cfg, 5).unwrap();
    let init = NetworkParams::init(net, derive_seed(5, 0x1717, 0)).unwrap();
    assert_eq!(out.params.values, init.values);
    assert!(out.curve.iter().all(|r| r.approx_kl == 0.0));
}

#[test]
fn training_improves_on_the_tiny_instance() {
    let spec = tiny_spec();
    let (mut first, mut last) = (0.0, 0.0);
    for seed in 0..5 {
        let out = train(&spec, &small_net(&spec), &quick_ppo(60), seed).unwrap();
        let head: f64 = out.curve[..5].iter().map(|r| r.mean_objective).sum();
        let tail: f64 = out.curve[out.curve.len() - 5..]
            .iter()
            .map(|r| r.mean_objective)
            .sum();
        first += head;
        last += tail;
    }
    assert!(last >= first, "final {last} < initial {first}");
}

#[test]
fn invalid_config_is_rejected_before_training() {
    let spec = tiny_spec();
    let cfg = PpoConfig {
        clip_epsilon: 0.0,
        ..quick_ppo(1)
    };
    assert!(matches!(
        train(&spec, &small_net(&spec), &cfg, 0),
        Err(AgentError::InvalidConfig(_))
    ));
    let wrong = NetworkConfig::new(3, 3);
    assert!(matches!(
        train(&spec, &wrong, &quick_ppo(1), 0),
        Err(AgentError::Dimension(_))
    ));
}

fn sampled_episode(params: &NetworkParams, spec: &EnvSpec, seed: u64) -> PpoSample {
    let mut env = spec.build(seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = params.initial_state();
    let mut s = PpoSample {
        obs: vec![],
        masks: vec![],
        actions: vec![],
        old_log_probs: vec![],
        advantages: vec![],
        value_targets: vec![],
    };
    let mut t = 0;
    while !env.is_done() {
        let obs = env.observation();
        let mask = env.feasible_mask();
        let out = params.step(&obs, &mut state).unwrap();
        let dist = PolicyDistribution::from_actor_output(&out.actor, &mask).unwrap();
        let (action, lp) = dist.sample(&mut rng);
        env.step(&action).unwrap();
        // Offsets keep the ratios away from the clip boundaries.
        let offset = [0.0, -0.05, 0.1, 0.6][t % 4];
        s.obs.push(obs);
        s.masks.push(mask);
        s.actions.push(action);
        s.old_log_probs.push(lp + offset);
        s.advantages.push(if t % 3 == 0 { -0.7 } else { 1.3 });
        s.value_targets.push(0.5 - 0.2 * t as f64);
        t += 1;
    }
    s
}

#[test]
fn ppo_loss_gradient_matches_finite_differences() {
    let spec = tiny_spec();
    let cfg = PpoConfig {
        entropy_coef: 0.05,
        ..PpoConfig::default()
    };
    let params = NetworkParams::init(small_net(&spec), 3).unwrap();
    let samples = [
        sampled_episode(&params, &spec, 1),
        sampled_episode(&params, &spec, 2),
    ];
    let (loss, grads) = ppo_loss(&params, &samples, &cfg).unwrap();
    assert!(loss.total.is_finite());
    let report = gradient_check(
        |v| {
            let p = NetworkParams::from_values(small_net(&spec), v.to_vec()).unwrap();
            ppo_loss(&p, &samples, &cfg).unwrap().0.total
        },
        &params.values,
        &grads.values,
        1e-5,
        1e-5,
    )
    .unwrap();
    assert!(report.passed(), "{report:?}");
}

#[test]
fn ppo_loss_needs_samples() {
    let spec = tiny_spec();
    let params = NetworkParams::init(small_net(&spec), 0).unwrap();
    let none: [PpoSample; 0] = [];
    assert!(matches!(
        ppo_loss(&params, &none, &PpoConfig::default()),
        Err(AgentError::EmptyTrajectory)
    ));
}
