use std::path::PathBuf;
use std::sync::Arc;

use locality_core::eprb::{build_box_ball_models, build_conspiriton_model, build_eprb_model, pr_box_distribution, uniform_settings, DerivationChoice};
use locality_core::histories::HistorySpace;
use locality_core::modelspec::{distribution_weights, load, serialize, theories_equal};
use locality_core::probability::{Distribution, Point};
use locality_core::site::CausalSite;
use locality_core::theory::{Frame, OnticTheory, ThreeValuedTheory, Theory};
use num::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "fixtures", name].iter().collect();
    std::fs::read_to_string(p).expect("fixture exists")
}

/// serialize(load(text)) reproduces the text, and loading that again gives
/// an equal theory and distribution.
fn assert_round_trip(theory: &Theory, dist: Option<&Distribution>) {
    let text = serialize(theory, dist);
    let m = load(&text).unwrap_or_else(|d| panic!("reload failed: {d:?}\n{text}"));
    assert!(theories_equal(theory, &m.theory), "{text}");
    assert_eq!(dist.map(distribution_weights), m.distribution.as_ref().map(distribution_weights));
    assert_eq!(serialize(&m.theory, m.distribution.as_ref()), text);
}

#[test]
fn eprb_fixture_is_the_built_model() {
    let text = fixture("eprb_full.model");
    let loaded = load(&text).unwrap();
    let model = build_eprb_model(DerivationChoice::Full).unwrap();
    let dist = pr_box_distribution(&model, &uniform_settings()).unwrap();
    let built: Theory = model.theory.into();
    assert!(theories_equal(&loaded.theory, &built));
    assert_eq!(distribution_weights(loaded.distribution.as_ref().unwrap()), distribution_weights(&dist));
    assert_eq!(serialize(&built, Some(&dist)), text);
}

#[test]
fn box_ball_and_conspiriton_fixtures() {
    let (_, indefinite) = build_box_ball_models();
    let bb: Theory = indefinite.into();
    assert_eq!(serialize(&bb, None), fixture("box_ball.model"));
    assert!(theories_equal(&load(&fixture("box_ball.model")).unwrap().theory, &bb));
    let c: Theory = build_conspiriton_model().into();
    assert_eq!(serialize(&c, None), fixture("conspiriton.model"));
    assert!(theories_equal(&load(&fixture("conspiriton.model")).unwrap().theory, &c));
}

#[test]
fn every_fixture_round_trips() {
    for name in ["eprb_full.model", "box_ball.model", "conspiriton.model", "trivial.model"] {
        let m = load(&fixture(name)).unwrap();
        assert_round_trip(&m.theory, m.distribution.as_ref());
    }
}

fn random_frame(rng: &mut ChaCha8Rng) -> Frame {
    let n_points = rng.gen_range(1..=4);
    let names: Vec<String> = (0..n_points).map(|i| format!("p{i}")).collect();
    let mut order = Vec::new();
    for i in 0..n_points {
        for j in i + 1..n_points {
            if rng.gen_bool(0.4) {
                order.push((names[i].clone(), names[j].clone()));
            }
        }
    }
    let site = Arc::new(CausalSite::new(names.clone(), order).unwrap());
    let n_hist = rng.gen_range(1..=5);
    let space = Arc::new(HistorySpace::new((0..n_hist).map(|i| format!("g{i}"))).unwrap());
    let omega = space.all();
    let mut frame = Frame::new(site.clone(), space);
    for k in 0..rng.gen_range(0..=4) {
        let region = site.region_from_mask(rng.gen_range(1..1u64 << n_points));
        frame.add_event(format!("E{k}"), rng.gen_range(0..=omega), region).unwrap();
    }
    for k in 0..rng.gen_range(0..=2) {
        let region = site.region_from_mask(rng.gen_range(1..1u64 << n_points));
        frame.add_region(format!("R{k}"), region).unwrap();
    }
    let events: Vec<(String, u64)> = frame.events().iter().map(|e| (e.name.clone(), e.region.members())).collect();
    if let Some((name, members)) = events.first() {
        if rng.gen_bool(0.5) {
            let _ = frame.add_setting(name, site.region_from_mask(*members));
        }
    }
    frame
}

fn random_distribution(labels: &[(String, u64)], rng: &mut ChaCha8Rng) -> Distribution {
    let raw: Vec<i64> = labels.iter().map(|_| rng.gen_range(1..=7)).collect();
    let total: i64 = raw.iter().sum();
    Distribution::from_points(
        labels
            .iter()
            .zip(raw)
            .map(|((label, set), w)| Point { label: label.clone(), set: *set, weight: BigRational::new(w.into(), total.into()) })
            .collect(),
    )
}

#[test]
fn hundred_random_theories_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut done = 0;
    while done < 100 {
        let frame = random_frame(&mut rng);
        let omega = frame.omega();
        let (theory, labels): (Theory, Vec<(String, u64)>) = if rng.gen_bool(0.5) {
            let theta = rng.gen_range(1..=omega);
            let t = OnticTheory::new(frame, theta).unwrap();
            let labels = (0..t.frame().space().len())
                .filter(|h| theta >> h & 1 == 1)
                .map(|h| (t.frame().space().name(h).to_string(), 1u64 << h))
                .collect();
            (t.into(), labels)
        } else {
            let k = rng.gen_range(1..=3);
            let basics: Vec<(String, u64)> = (0..k).map(|i| (format!("v{i}"), rng.gen_range(1..=omega))).collect();
            match ThreeValuedTheory::new(frame, basics.clone()) {
                Ok(t) => (t.into(), basics),
                // derivable or duplicate basics: draw again
                Err(_) => continue,
            }
        };
        let dist = rng.gen_bool(0.5).then(|| random_distribution(&labels, &mut rng));
        assert_round_trip(&theory, dist.as_ref());
        done += 1;
    }
}
