use num_complex::Complex64;

use super::encode::normalized_prep;
use super::state::{qubit_mask, TangentBundle};
use crate::error::{Error, Result};
use crate::jet::Jet;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Where a rotation gate takes its angle from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AngleSource {
    /// Fixed angle in radians.
    Literal(f64),
    /// Index into the bound parameter vector `θ`.
    Param(usize),
    /// The circuit input after an encoding map, with the map's derivatives
    /// along `x` already evaluated.
    Input(Jet),
}

/// One circuit operation.
#[derive(Debug, Clone, PartialEq)]
pub enum GateOp {
    RotY {
        target: usize,
        angle: AngleSource,
    },
    RotZ {
        target: usize,
        angle: AngleSource,
    },
    Hadamard {
        target: usize,
    },
    ControlledNot {
        control: usize,
        target: usize,
    },
    /// Overwrites the register with the normalized coefficient vector. Each
    /// coefficient carries its derivatives along `x`.
    AmplitudePrep {
        coefficients: Vec<Jet>,
    },
}

impl GateOp {
    pub fn kind_name(&self) -> &'static str {
        match self {
            GateOp::RotY { .. } => "RotY",
            GateOp::RotZ { .. } => "RotZ",
            GateOp::Hadamard { .. } => "Hadamard",
            GateOp::ControlledNot { .. } => "ControlledNot",
            GateOp::AmplitudePrep { .. } => "AmplitudePrep",
        }
    }
}

/// Row-major 2×2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2([
            [Complex64::new(a, 0.0), Complex64::new(b, 0.0)],
            [Complex64::new(c, 0.0), Complex64::new(d, 0.0)],
        ])
    }

    fn diag(a: Complex64, d: Complex64) -> Self {
        Mat2([[a, ZERO], [ZERO, d]])
    }

    fn scale(self, k: f64) -> Self {
        let [[a, b], [c, d]] = self.0;
        Mat2([[a * k, b * k], [c * k, d * k]])
    }

    fn add(self, o: Mat2) -> Self {
        let [[a, b], [c, d]] = self.0;
        let [[e, f], [g, h]] = o.0;
        Mat2([[a + e, b + f], [c + g, d + h]])
    }

    pub fn hadamard() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Mat2::real(s, s, s, -s)
    }

    /// `[[cos(a/2), −sin(a/2)], [sin(a/2), cos(a/2)]]`.
    pub fn rot_y(a: f64) -> Self {
        let (s, c) = (a / 2.0).sin_cos();
        Mat2::real(c, -s, s, c)
    }

    /// `diag(e^{−ia/2}, e^{ia/2})`.
    pub fn rot_z(a: f64) -> Self {
        let (s, c) = (a / 2.0).sin_cos();
        Mat2::diag(Complex64::new(c, -s), Complex64::new(c, s))
    }
}

#[derive(Debug, Clone, Copy)]
enum Axis {
    Y,
    Z,
}

impl Axis {
    fn matrix(self, a: f64) -> Mat2 {
        match self {
            Axis::Y => Mat2::rot_y(a),
            Axis::Z => Mat2::rot_z(a),
        }
    }

    // d/da R(a) = ½·R(a + π); d²/da² R(a) = −¼·R(a).
    fn first(self, a: f64) -> Mat2 {
        self.matrix(a + std::f64::consts::PI).scale(0.5)
    }

    fn second(self, a: f64) -> Mat2 {
        self.matrix(a).scale(-0.25)
    }
}

/// `out += m·v` with `m` acting on the qubit selected by `mask`.
fn accumulate(out: &mut [Complex64], m: &Mat2, mask: usize, v: &[Complex64]) {
    let [[a, b], [c, d]] = m.0;
    for i in 0..v.len() {
        if i & mask == 0 {
            let j = i | mask;
            let (v0, v1) = (v[i], v[j]);
            out[i] += a * v0 + b * v1;
            out[j] += c * v0 + d * v1;
        }
    }
}

fn apply(m: &Mat2, mask: usize, v: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; v.len()];
    accumulate(&mut out, m, mask, v);
    out
}

fn apply_cnot(control: usize, target: usize, v: &mut [Complex64]) {
    for i in 0..v.len() {
        if i & control != 0 && i & target == 0 {
            v.swap(i, i | target);
        }
    }
}

fn resolve_angle(angle: AngleSource, theta: &[f64]) -> Result<(Jet, Option<usize>)> {
    match angle {
        AngleSource::Literal(a) => Ok((Jet::constant(a), None)),
        AngleSource::Input(j) => Ok((j, None)),
        AngleSource::Param(k) => theta
            .get(k)
            .map(|&a| (Jet::constant(a), Some(k)))
            .ok_or(Error::UnresolvedAngle {
                index: k,
                available: theta.len(),
            }),
    }
}

fn rotate(
    bundle: &TangentBundle,
    axis: Axis,
    target: usize,
    angle: AngleSource,
    theta: &[f64],
) -> Result<TangentBundle> {
    let n = bundle.num_qubits();
    let mask = qubit_mask(n, target)?;
    let (a, param) = resolve_angle(angle, theta)?;
    if let Some(k) = param {
        if k >= bundle.num_params() {
            return Err(Error::UnresolvedAngle {
                index: k,
                available: bundle.num_params(),
            });
        }
    }

    let u = axis.matrix(a.value);
    let du = axis.first(a.value);
    let input_dependent = a.d1 != 0.0 || a.d2 != 0.0;
    // Chain rule through the encoding map a(x).
    let ux = du.scale(a.d1);
    let uxx = axis.second(a.value).scale(a.d1 * a.d1).add(du.scale(a.d2));

    let v = bundle.value.amplitudes();
    let mut value = bundle.value.clone();
    value.amplitudes_mut().copy_from_slice(&apply(&u, mask, v));

    let mut d_dx = apply(&u, mask, &bundle.d_dx);
    let mut d2_dx2 = apply(&u, mask, &bundle.d2_dx2);
    if input_dependent {
        accumulate(&mut d_dx, &ux, mask, v);
        accumulate(&mut d2_dx2, &ux.scale(2.0), mask, &bundle.d_dx);
        accumulate(&mut d2_dx2, &uxx, mask, v);
    }

    let p = bundle.num_params();
    let mut d_dtheta = Vec::with_capacity(p);
    let mut d2_dx_dtheta = Vec::with_capacity(p);
    let mut d3_dx2_dtheta = Vec::with_capacity(p);
    for k in 0..p {
        let t = &bundle.d_dtheta[k];
        let tx = &bundle.d2_dx_dtheta[k];
        let txx = &bundle.d3_dx2_dtheta[k];
        let mut nt = apply(&u, mask, t);
        let mut ntx = apply(&u, mask, tx);
        let mut ntxx = apply(&u, mask, txx);
        if input_dependent {
            accumulate(&mut ntx, &ux, mask, t);
            accumulate(&mut ntxx, &ux.scale(2.0), mask, tx);
            accumulate(&mut ntxx, &uxx, mask, t);
        }
        if param == Some(k) {
            accumulate(&mut nt, &du, mask, v);
            accumulate(&mut ntx, &du, mask, &bundle.d_dx);
            accumulate(&mut ntxx, &du, mask, &bundle.d2_dx2);
        }
        d_dtheta.push(nt);
        d2_dx_dtheta.push(ntx);
        d3_dx2_dtheta.push(ntxx);
    }

    Ok(TangentBundle {
        value,
        d_dx,
        d2_dx2,
        d_dtheta,
        d2_dx_dtheta,
        d3_dx2_dtheta,
    })
}

fn map_all(bundle: &TangentBundle, f: impl Fn(&[Complex64]) -> Vec<Complex64>) -> TangentBundle {
    let mut value = bundle.value.clone();
    let mapped = f(bundle.value.amplitudes());
    value.amplitudes_mut().copy_from_slice(&mapped);
    TangentBundle {
        value,
        d_dx: f(&bundle.d_dx),
        d2_dx2: f(&bundle.d2_dx2),
        d_dtheta: bundle.d_dtheta.iter().map(|v| f(v)).collect(),
        d2_dx_dtheta: bundle.d2_dx_dtheta.iter().map(|v| f(v)).collect(),
        d3_dx2_dtheta: bundle.d3_dx2_dtheta.iter().map(|v| f(v)).collect(),
    }
}

/// Applies one gate to a state and all of its tangents.
///
/// `theta` resolves [`AngleSource::Param`] references; the bundle must carry a
/// tangent slot for every referenced index.
pub fn apply_gate(bundle: &TangentBundle, gate: &GateOp, theta: &[f64]) -> Result<TangentBundle> {
    let n = bundle.num_qubits();
    match gate {
        GateOp::RotY { target, angle } => rotate(bundle, Axis::Y, *target, *angle, theta),
        GateOp::RotZ { target, angle } => rotate(bundle, Axis::Z, *target, *angle, theta),
        GateOp::Hadamard { target } => {
            let mask = qubit_mask(n, *target)?;
            let h = Mat2::hadamard();
            Ok(map_all(bundle, |v| apply(&h, mask, v)))
        }
        GateOp::ControlledNot { control, target } => {
            let cm = qubit_mask(n, *control)?;
            let tm = qubit_mask(n, *target)?;
            if cm == tm {
                return Err(Error::ControlEqualsTarget(*control));
            }
            Ok(map_all(bundle, |v| {
                let mut out = v.to_vec();
                apply_cnot(cm, tm, &mut out);
                out
            }))
        }
        GateOp::AmplitudePrep { coefficients } => {
            let prepared = normalized_prep(n, coefficients)?;
            Ok(prepared.with_num_params(bundle.num_params()))
        }
    }
}
