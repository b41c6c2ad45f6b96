use num_complex::Complex64;
use qdae::models::{ModelKind, ModelSpec};
use qdae::oracle::{integrate_fixed, rk4_sample, rk4_solve};
use qdae::systems::{DaeSystem, ResidualJacobian, SmibParams, SmibSystem, WsccSystem};
use qdae::training::{solve_trajectory, TrainingConfig};
use qdae::Jet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn harmonic_error(step: f64) -> f64 {
    // y″ = −y with y(0) = 1, y′(0) = 0 over [0, 2].
    let mut f = |_t: f64, y: &[f64], out: &mut [f64]| {
        out[0] = y[1];
        out[1] = -y[0];
        Ok(())
    };
    let y = integrate_fixed(&mut f, 0.0, 2.0, step, &[1.0, 0.0], |_, _| {}).unwrap();
    ((y[0] - 2f64.cos()).powi(2) + (y[1] + 2f64.sin()).powi(2)).sqrt()
}

#[test]
fn rk4_is_fourth_order() {
    let errors: Vec<f64> = [1e-2, 5e-3, 2.5e-3].iter().map(|&h| harmonic_error(h)).collect();
    for pair in errors.windows(2) {
        let ratio = pair[0] / pair[1];
        assert!(
            (8.0..32.0).contains(&ratio),
            "halving the step reduced the error by {ratio}"
        );
    }
}

#[test]
fn wscc_regimes_switch_at_the_fault_times() {
    let sys = WsccSystem::standard();
    assert_eq!(sys.breakpoints(), vec![10.0, 10.083]);
    for w in sys.phases.windows(2) {
        assert_eq!(w[0].t_end, w[1].t_start);
    }
    assert_eq!(sys.regime_at(9.999_999).unwrap(), 0);
    assert_eq!(sys.regime_at(10.0).unwrap(), 1);
    assert_eq!(sys.regime_at(10.082_999).unwrap(), 1);
    assert_eq!(sys.regime_at(10.083).unwrap(), 2);
    assert!(sys.regime_at(20.5).is_err());
}

#[test]
fn wscc_state_is_continuous_across_switches() {
    let sys = WsccSystem::standard();
    let s0 = sys.initial_state();
    // Stopping at the switch and restarting must agree with one sweep through it.
    let through = rk4_sample(&sys, 0.0, &s0, &[10.05], 1e-4).unwrap();
    let at_switch = rk4_sample(&sys, 0.0, &s0, &[10.0], 1e-4).unwrap().state(0);
    let resumed = rk4_sample(&sys, 10.0, &at_switch, &[10.05], 1e-4).unwrap();
    for (a, b) in through.state(0).iter().zip(resumed.state(0)) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
    // Only the derivative jumps at a switch; the angles never do.
    let dense = rk4_solve(&sys, 9.99, 10.01, 1e-5, &at_switch_backwards(&sys)).unwrap();
    let k = dense
        .times
        .iter()
        .position(|&t| t == 10.0)
        .expect("the switch is a sample");
    for (before, after) in dense.state(k - 1).iter().zip(dense.state(k + 1)) {
        assert!((before - after).abs() < 1e-4);
    }
}

fn at_switch_backwards(sys: &WsccSystem) -> Vec<f64> {
    rk4_sample(sys, 0.0, &sys.initial_state(), &[9.99], 1e-4)
        .unwrap()
        .state(0)
}

fn random_jets(n: usize, rng: &mut ChaCha8Rng) -> Vec<Jet> {
    (0..n)
        .map(|_| {
            Jet::new(
                rng.gen_range(-1.5..1.5),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-3.0..3.0),
            )
        })
        .collect()
}

fn check_jacobian(system: &dyn DaeSystem, times: &[f64], seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = system.variables().len();
    for &t in times {
        let regime = system.regime_at(t).unwrap();
        for _ in 0..10 {
            let y = random_jets(n, &mut rng);
            let mut jac = ResidualJacobian::new(system.num_equations(), n);
            system.residuals(regime, t, &y, Some(&mut jac)).unwrap();
            let h = 1e-6;
            for var in 0..n {
                for order in 0..3 {
                    let shifted = |delta: f64| {
                        let mut yy = y.clone();
                        let mut parts = [yy[var].value, yy[var].d1, yy[var].d2];
                        parts[order] += delta;
                        yy[var] = Jet::new(parts[0], parts[1], parts[2]);
                        system.residuals(regime, t, &yy, None).unwrap()
                    };
                    let (a, b) = (shifted(h), shifted(-h));
                    for eq in 0..system.num_equations() {
                        let fd = (a[eq] - b[eq]) / (2.0 * h);
                        let exact = jac.get(eq, var)[order];
                        assert!(
                            (fd - exact).abs() < 1e-6 * (1.0 + exact.abs()),
                            "{} eq {eq} var {var} order {order}: {fd} vs {exact}",
                            system.name()
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn residual_jacobians_match_differences() {
    check_jacobian(&SmibSystem::new(SmibParams::default()).unwrap(), &[0.0, 3.0], 1);
    check_jacobian(&WsccSystem::standard(), &[1.0, 10.04, 15.0], 2);
}

#[test]
fn jets_from_state_zero_the_residuals() {
    let systems: Vec<(Box<dyn DaeSystem>, Vec<f64>)> = vec![
        (
            Box::new(SmibSystem::new(SmibParams::default()).unwrap()),
            vec![0.0, 4.0],
        ),
        (Box::new(WsccSystem::standard()), vec![0.0, 10.02, 12.0]),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (sys, times) in systems {
        for &t in &times {
            let regime = sys.regime_at(t).unwrap();
            let state: Vec<f64> = sys
                .initial_state()
                .iter()
                .map(|v| v + rng.gen_range(-0.2..0.2))
                .collect();
            let jets = sys.jets_from_state(regime, t, &state).unwrap();
            let r = sys.residuals(regime, t, &jets, None).unwrap();
            assert!(r.iter().all(|v| v.abs() < 1e-9), "{}: {r:?}", sys.name());
            let back = sys.state_from_jets(&jets);
            for (a, b) in back.iter().zip(&state) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn shipped_angles_follow_from_the_tabulated_currents() {
    let sys = WsccSystem::standard();
    for m in &sys.machines {
        let it = Complex64::new(m.current_re.unwrap(), m.current_im.unwrap());
        let idq = Complex64::new(m.i_d.unwrap(), m.i_q.unwrap());
        let delta = std::f64::consts::FRAC_PI_2 - idq.arg() + it.arg();
        assert!(
            (delta - m.delta_init).abs() < 1e-3,
            "{}: {delta} vs {}",
            m.name,
            m.delta_init
        );
    }
    assert!(sys.equilibrium_gap().unwrap() < 2e-2);
}

#[test]
fn an_unbalanced_network_is_rejected() {
    let broken = WsccSystem::standard_toml().replace("pm = 1.6300", "pm = 1.7300");
    let err = WsccSystem::from_toml_str(&broken).unwrap_err();
    assert!(err.to_string().contains("equilibrium"), "{err}");
}

#[test]
fn same_seed_same_parameters() {
    let sys = SmibSystem::new(SmibParams::default()).unwrap();
    let spec = ModelSpec::of_kind(ModelKind::SfqRy);
    let config = TrainingConfig {
        time_span: 0.25,
        num_points: 6,
        max_iterations: 60,
        restarts: 2,
        ..TrainingConfig::default()
    };
    let run = || {
        let sol = solve_trajectory(&sys, 0.5, &spec, &config, &mut |_| {}).unwrap();
        sol.windows.iter().map(|w| w.final_params()).collect::<Vec<_>>()
    };
    let (a, b) = (run(), run());
    assert_eq!(a, b);
    let other = TrainingConfig {
        seed: config.seed + 1,
        ..config.clone()
    };
    let c: Vec<_> = solve_trajectory(&sys, 0.5, &spec, &other, &mut |_| {})
        .unwrap()
        .windows
        .iter()
        .map(|w| w.final_params())
        .collect();
    assert_ne!(a, c);
}
