//! Invariants of the synthetic movement generator.

use follownet::simulate::EventTruth;
use follownet::{simulate, Model, SimConfig, Trial};
use proptest::prelude::*;

fn bits(trial: &Trial) -> Vec<u64> {
    trial.dataset.values().iter().map(|v| v.to_bits()).collect()
}

fn model() -> impl Strategy<Value = Model> {
    prop_oneof![
        Just(Model::Dm),
        Just(Model::Hm),
        Just(Model::Random),
        Just(Model::RotatingDm),
        (1usize..=5, 0.1..=1.0f64).prop_map(|(kappa, rho)| Model::Lt { kappa, rho }),
    ]
}

fn config() -> impl Strategy<Value = SimConfig> {
    (model(), 6usize..=12, 1usize..=3, 40usize..=100, 20usize..=60, 10usize..=60, any::<u64>()).prop_map(
        |(model, n, events, pre_len, coord_len, post_len, seed)| SimConfig {
            model,
            n,
            events,
            pre_len,
            coord_len,
            post_len,
            seed,
            ..SimConfig::default()
        },
    )
}

fn at_rest(trial: &Trial, entity: usize, step: usize) -> bool {
    trial.dataset.point(entity, step) == trial.dataset.point(entity, step - 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn shape_and_determinism(cfg in config()) {
        let a = simulate(&cfg).unwrap();
        let b = simulate(&cfg).unwrap();
        prop_assert_eq!(bits(&a), bits(&b));
        prop_assert_eq!(a.dataset.n(), cfg.n);
        prop_assert_eq!(a.dataset.dims(), 2);
        prop_assert_eq!(a.dataset.len(), cfg.total_len());
        prop_assert_eq!(a.events.len(), cfg.events);
        prop_assert!(a.dataset.values().iter().all(|v| v.is_finite()));
        for (e, ev) in a.events.iter().enumerate() {
            prop_assert_eq!(ev.start, e * cfg.event_len());
            prop_assert_eq!(ev.coord_start, ev.start + cfg.pre_len);
            prop_assert_eq!(ev.post_start, ev.coord_start + cfg.coord_len);
            prop_assert_eq!(ev.end, ev.start + cfg.event_len());
        }
    }

    #[test]
    fn individuals_rest_before_departure_and_after_settling(cfg in config()) {
        let trial = simulate(&cfg).unwrap();
        let settle = cfg.pre_len + cfg.coord_len + cfg.post_len / 2;
        for ev in &trial.events {
            for (i, depart) in ev.departures.iter().enumerate() {
                let depart = depart.expect("everybody moves by coordination");
                prop_assert!(depart <= cfg.pre_len);
                for tau in (1..depart).chain(settle.max(1)..cfg.event_len()) {
                    let step = ev.start + tau;
                    prop_assert!(at_rest(&trial, i, step), "entity {} moved at event step {}", i, tau);
                }
            }
        }
    }

    #[test]
    fn scheduled_departures(cfg in config()) {
        let trial = simulate(&cfg).unwrap();
        for ev in &trial.events {
            let depart = |i: usize| ev.departures[i].unwrap();
            match cfg.model {
                Model::Dm | Model::RotatingDm => {
                    prop_assert_eq!(depart(ev.leader), 0);
                    for i in (0..cfg.n).filter(|&i| i != ev.leader) {
                        prop_assert!((1..=cfg.lag_max() + 1).contains(&depart(i)));
                    }
                }
                Model::Hm => {
                    let ranks = ev.hm_ranks.as_ref().unwrap();
                    prop_assert_eq!(ranks.len(), 4);
                    prop_assert_eq!(ranks[0], ev.leader);
                    for w in ranks.windows(2) {
                        prop_assert!(depart(w[0]) < depart(w[1]));
                    }
                    let last = depart(ranks[3]);
                    for i in (0..cfg.n).filter(|i| !ranks.contains(i)) {
                        prop_assert!(depart(i) > last && depart(i) < cfg.pre_len);
                    }
                }
                Model::Random => {
                    prop_assert!(ev.departures.iter().all(|d| *d == Some(0)));
                }
                Model::Lt { .. } => {}
            }
        }
    }
}

/// The `kappa` nearest others of `i` at `step`, ties by index.
fn nearest(trial: &Trial, i: usize, step: usize, kappa: usize) -> Vec<usize> {
    let p = trial.dataset.point(i, step);
    let mut others: Vec<(f64, usize)> = (0..trial.dataset.n())
        .filter(|&j| j != i)
        .map(|j| {
            let q = trial.dataset.point(j, step);
            ((p[0] - q[0]).hypot(p[1] - q[1]), j)
        })
        .collect();
    others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    others.into_iter().take(kappa).map(|(_, j)| j).collect()
}

/// Every individual that joins during the pre-interval had at least a `rho`
/// share of moving neighbours on the step before.
fn threshold_respected(trial: &Trial, ev: &EventTruth, kappa: usize, rho: f64) -> Result<(), TestCaseError> {
    let pre = trial.config.pre_len;
    prop_assert_eq!(ev.departures[ev.leader], Some(0));
    for (i, d) in ev.departures.iter().enumerate() {
        let d = d.unwrap();
        if d == 0 || d == pre {
            continue;
        }
        // positions seen at the decision are those after the previous step
        let moving = nearest(trial, i, ev.start + d - 1, kappa)
            .into_iter()
            .filter(|&j| ev.departures[j].is_some_and(|dj| dj < d))
            .count();
        prop_assert!(moving as f64 / kappa as f64 >= rho, "entity {} joined at {} with {} of {}", i, d, moving, kappa);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn threshold_contagion_is_monotone(
        kappa in 1usize..=6,
        rho in 0.1..=1.0f64,
        events in 1usize..=3,
        seed in any::<u64>(),
    ) {
        let cfg = SimConfig { model: Model::Lt { kappa, rho }, events, seed, ..SimConfig::default() };
        let trial = simulate(&cfg).unwrap();
        for ev in &trial.events {
            threshold_respected(&trial, ev, kappa, rho)?;
        }
    }
}

#[test]
fn threshold_group_is_fully_moving_before_coordination() {
    let cfg = SimConfig {
        model: Model::Lt { kappa: 3, rho: 0.25 },
        seed: 17,
        ..SimConfig::default()
    };
    let trial = simulate(&cfg).unwrap();
    for ev in &trial.events {
        assert!(ev.departures.iter().all(|d| d.is_some_and(|d| d < cfg.pre_len)), "{:?}", ev.departures);
    }
}

#[test]
fn full_length_configuration() {
    let cfg = SimConfig {
        events: 20,
        pre_len: 200,
        coord_len: 200,
        post_len: 200,
        ..SimConfig::default()
    };
    assert_eq!(cfg.total_len(), 12_000);
    let trial = simulate(&cfg).unwrap();
    assert_eq!(trial.dataset.len(), 12_000);
    assert_eq!(trial.events.len(), 20);
}

#[test]
fn rotating_leader_follows_the_schedule() {
    let cfg = SimConfig {
        model: Model::RotatingDm,
        events: 20,
        ..SimConfig::default()
    };
    let trial = simulate(&cfg).unwrap();
    for (e, ev) in trial.events.iter().enumerate() {
        assert_eq!(ev.leader, e % cfg.n);
    }
}

#[test]
fn invalid_configurations_are_rejected() {
    let bad = [
        SimConfig { n: 1, ..SimConfig::default() },
        SimConfig { events: 0, ..SimConfig::default() },
        SimConfig { lag_max: Some(100), ..SimConfig::default() },
        SimConfig { leader_speed: 0.0, ..SimConfig::default() },
        SimConfig { model: Model::Lt { kappa: 20, rho: 0.5 }, ..SimConfig::default() },
        SimConfig { model: Model::Lt { kappa: 3, rho: 0.0 }, ..SimConfig::default() },
        SimConfig { model: Model::Hm, n: 3, ..SimConfig::default() },
    ];
    for cfg in bad {
        assert!(simulate(&cfg).is_err(), "{cfg:?}");
    }
}
