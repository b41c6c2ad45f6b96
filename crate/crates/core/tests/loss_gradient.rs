use qdae::models::{ModelKind, ModelSpec};
use qdae::systems::{DaeSystem, SmibSystem, WsccSystem};
use qdae::training::{assemble_loss, collocation_points, initialize_models, TrainingConfig, TrainingWindow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn window(system: &dyn DaeSystem, kind: ModelKind, t_start: f64, len: f64, seed: u64) -> TrainingWindow {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = ModelSpec::of_kind(kind);
    let boundary = system.initial_jets();
    let mut models = initialize_models(system, &spec, &boundary, &mut rng).unwrap();
    // Move away from the tiny-angle start so every parameter matters.
    for m in &mut models {
        let p: Vec<f64> = m.params().iter().map(|v| v + rng.gen_range(-1.0..1.0)).collect();
        m.set_params(&p);
    }
    TrainingWindow {
        t_start,
        t_end: t_start + len,
        regime: system.regime_at(t_start + 0.5 * len).unwrap(),
        boundary,
        collocation: collocation_points(len, 7).unwrap(),
        models,
    }
}

fn check(system: &dyn DaeSystem, kind: ModelKind, t_start: f64, len: f64) {
    let config = TrainingConfig {
        lambda1: 0.7,
        lambda2: 1.3,
        ..TrainingConfig::default()
    };
    for seed in 0..5 {
        let mut w = window(system, kind, t_start, len, seed);
        let loss = assemble_loss(&w, system, &config).unwrap();
        let p0 = w.params();
        for i in 0..p0.len() {
            let h = 1e-4 * (1.0 + p0[i].abs());
            let mut p = p0.clone();
            p[i] = p0[i] + h;
            w.set_params(&p);
            let up = assemble_loss(&w, system, &config).unwrap().total;
            p[i] = p0[i] - h;
            w.set_params(&p);
            let down = assemble_loss(&w, system, &config).unwrap().total;
            w.set_params(&p0);
            let fd = (up - down) / (2.0 * h);
            let err = (fd - loss.gradient[i]).abs() / (1.0 + fd.abs().max(loss.gradient[i].abs()));
            assert!(
                err < 1e-5,
                "{} {kind} seed {seed} param {i}: analytic {} fd {fd}",
                system.name(),
                loss.gradient[i]
            );
        }
    }
}

#[test]
fn smib_loss_gradient_matches_finite_differences() {
    let system = SmibSystem::default();
    for kind in [ModelKind::SfqRy, ModelKind::SfqArcsin, ModelKind::Pfq] {
        check(&system, kind, 0.0, 0.5);
    }
}

#[test]
fn wscc_loss_gradient_matches_finite_differences() {
    let system = WsccSystem::standard();
    for kind in [ModelKind::SfqRy, ModelKind::SfqArcsin, ModelKind::Pfq] {
        check(&system, kind, 0.0, 0.2);
    }
    check(&system, ModelKind::Pfq, 10.0, 0.083);
}
