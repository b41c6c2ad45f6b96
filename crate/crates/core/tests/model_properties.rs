use qdae::models::{ModelKind, ModelSpec, PfqModel, QnnModel, RotationAxis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

fn random_model(spec: &ModelSpec, rng: &mut ChaCha8Rng) -> QnnModel {
    let theta = (0..spec.num_angles()).map(|_| rng.gen_range(-3.0..3.0)).collect();
    let mut m = spec.build(theta).unwrap();
    let p: Vec<f64> = m.params().iter().map(|v| v + rng.gen_range(-1.0..1.0)).collect();
    m.set_params(&p);
    m
}

/// Every derivative a model reports, against central differences: along
/// `x` to second order and along each trainable parameter for `f`, `f′`
/// and `f″`.
fn check_against_differences(spec: &ModelSpec, x_range: (f64, f64), seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..50 {
        let m = random_model(spec, &mut rng);
        let x = rng.gen_range(x_range.0..x_range.1);
        let out = m.evaluate(x).unwrap();
        let h = 1e-5;
        let (up, down) = (m.evaluate(x + h).unwrap(), m.evaluate(x - h).unwrap());
        let d1 = (up.value() - down.value()) / (2.0 * h);
        assert!(
            rel(d1, out.df_dx()) < 1e-5,
            "{:?} df/dx {d1} vs {}",
            spec.kind,
            out.df_dx()
        );
        let d2 = (up.value() - 2.0 * out.value() + down.value()) / (h * h);
        assert!(
            rel(d2, out.d2f_dx2()) < 1e-4,
            "{:?} d2f/dx2 {d2} vs {}",
            spec.kind,
            out.d2f_dx2()
        );

        let grad = m.trainable_gradient(&out);
        let p0 = m.params();
        for i in 0..p0.len() {
            let shifted = |delta: f64| {
                let mut p = p0.clone();
                p[i] += delta;
                let mut mm = m.clone();
                mm.set_params(&p);
                mm.evaluate(x).unwrap().f
            };
            let (a, b) = (shifted(h), shifted(-h));
            for order in 0..3 {
                let fd = (a.derivative(order) - b.derivative(order)) / (2.0 * h);
                assert!(
                    rel(fd, grad[i].derivative(order)) < 1e-5,
                    "{:?} param {i} order {order}: fd {fd} vs {}",
                    spec.kind,
                    grad[i].derivative(order)
                );
            }
        }
    }
}

#[test]
fn sfq_ry_derivatives() {
    check_against_differences(&ModelSpec::of_kind(ModelKind::SfqRy), (-3.0, 3.0), 1);
    let deep = ModelSpec {
        layers: 4,
        ..ModelSpec::of_kind(ModelKind::SfqRy)
    };
    check_against_differences(&deep, (-3.0, 3.0), 2);
}

#[test]
fn sfq_arcsin_derivatives() {
    check_against_differences(&ModelSpec::of_kind(ModelKind::SfqArcsin), (-0.9, 0.9), 3);
}

#[test]
fn pfq_derivatives() {
    check_against_differences(&ModelSpec::of_kind(ModelKind::Pfq), (-3.0, 3.0), 4);
    for qubits in [2, 3] {
        let spec = ModelSpec {
            qubits,
            ..ModelSpec::of_kind(ModelKind::Pfq)
        };
        check_against_differences(&spec, (-2.0, 2.0), 4 + qubits as u64);
    }
    let frozen = ModelSpec {
        train_scale: false,
        rotations: vec![RotationAxis::Y, RotationAxis::Z, RotationAxis::Y, RotationAxis::Z],
        ..ModelSpec::of_kind(ModelKind::Pfq)
    };
    check_against_differences(&frozen, (-3.0, 3.0), 9);
}

#[test]
fn frozen_scale_is_not_a_parameter() {
    let spec = ModelSpec {
        train_scale: false,
        ..ModelSpec::of_kind(ModelKind::Pfq)
    };
    let m = spec.build(vec![0.1, 0.2, 0.3]).unwrap();
    assert_eq!(m.num_params(), 4);
}

#[test]
fn pfq_read_out_is_affine_in_the_expectation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let theta: Vec<f64> = (0..3).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let (scale, offset) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let x = rng.gen_range(-2.0..2.0);
        let unit = PfqModel::new(1, PfqModel::default_rotations(), theta.clone(), [1.0, 0.0]).unwrap();
        let m = PfqModel::new(1, PfqModel::default_rotations(), theta, [scale, offset]).unwrap();
        let (e, f) = (unit.evaluate(x).unwrap().f, m.evaluate(x).unwrap().f);
        assert!((f.value - (scale * e.value + offset)).abs() < 1e-12);
        assert!((f.d1 - scale * e.d1).abs() < 1e-12);
        assert!((f.d2 - scale * e.d2).abs() < 1e-12);
    }
}

/// Least-squares `[c0, c1, c2]` for `c0 + c1·x + c2·x²` through the samples.
fn quadratic_fit(xs: &[f64], ys: &[f64]) -> [f64; 3] {
    let mut a = [[0.0; 3]; 3];
    let mut b = [0.0; 3];
    for (&x, &y) in xs.iter().zip(ys) {
        let phi = [1.0, x, x * x];
        for i in 0..3 {
            b[i] += phi[i] * y;
            for j in 0..3 {
                a[i][j] += phi[i] * phi[j];
            }
        }
    }
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&a);
    let mut out = [0.0; 3];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut m = a;
        for i in 0..3 {
            m[i][k] = b[i];
        }
        *slot = det(&m) / d;
    }
    out
}

/// Scans the three angles of the Ry–Rz–Ry circuit on a coarse grid and
/// returns the x² coefficients of `(1+x²)·⟨Z⟩` and `(1+x²)·P(|1⟩)`.
fn scan_x2_coefficients() -> (Vec<f64>, Vec<f64>) {
    let xs: Vec<f64> = (0..=40).map(|k| -1.0 + k as f64 / 20.0).collect();
    let grid: Vec<f64> = (0..8).map(|k| -3.0 + k as f64 * 6.0 / 7.0).collect();
    let (mut z_coeffs, mut p_coeffs) = (Vec::new(), Vec::new());
    for &a in &grid {
        for &b in &grid {
            for &c in &grid {
                let m = PfqModel::new(1, PfqModel::default_rotations(), vec![a, b, c], [1.0, 0.0]).unwrap();
                let z: Vec<f64> = xs.iter().map(|&x| m.evaluate(x).unwrap().value()).collect();
                let scaled_z: Vec<f64> = xs.iter().zip(&z).map(|(x, e)| (1.0 + x * x) * e).collect();
                let scaled_p: Vec<f64> = xs
                    .iter()
                    .zip(&z)
                    .map(|(x, e)| (1.0 + x * x) * (1.0 - e) / 2.0)
                    .collect();
                z_coeffs.push(quadratic_fit(&xs, &scaled_z)[2]);
                p_coeffs.push(quadratic_fit(&xs, &scaled_p)[2]);
            }
        }
    }
    (z_coeffs, p_coeffs)
}

#[test]
fn rz_gives_both_signs_of_the_quadratic_coefficient() {
    let (z, _) = scan_x2_coefficients();
    assert!(z.iter().any(|&c| c < -0.1), "no negative x² coefficient");
    assert!(z.iter().any(|&c| c > 0.1), "no positive x² coefficient");
}

#[test]
fn probability_of_one_keeps_a_non_negative_quadratic_coefficient() {
    // (1+x²)P(|1⟩) = |U10 + U11·x|², so its x² coefficient is |U11|².
    let (_, p) = scan_x2_coefficients();
    assert!(
        p.iter().all(|&c| c > -1e-9),
        "min {}",
        p.iter().cloned().fold(f64::INFINITY, f64::min)
    );
}

#[test]
fn quadratic_fit_recovers_exact_polynomials() {
    let xs: Vec<f64> = (0..9).map(|k| -1.0 + k as f64 / 4.0).collect();
    let ys: Vec<f64> = xs.iter().map(|x| 0.5 - 2.0 * x + 3.0 * x * x).collect();
    let c = quadratic_fit(&xs, &ys);
    assert!((c[0] - 0.5).abs() < 1e-12 && (c[1] + 2.0).abs() < 1e-12 && (c[2] - 3.0).abs() < 1e-12);
}
