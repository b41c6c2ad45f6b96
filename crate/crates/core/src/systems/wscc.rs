use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{DaeSystem, ResidualJacobian, VariableSpec};
use crate::error::{Error, Result};
use crate::jet::Jet;

const STANDARD: &str = include_str!("../../data/wscc9.toml");

/// One machine row of the classical model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineParams {
    #[serde(default)]
    pub name: String,
    /// Inertia constant, s.
    pub h: f64,
    /// Damping constant.
    pub d: f64,
    /// Armature resistance, pu.
    pub ra: f64,
    /// Transient reactance, pu.
    pub xd_prime: f64,
    /// Mechanical power, pu.
    pub pm: f64,
    /// Internal voltage magnitude, pu.
    pub eq_prime: f64,
    /// Initial rotor angle, rad.
    pub delta_init: f64,
    /// Initial per-unit speed deviation.
    #[serde(default)]
    pub domega_init: f64,
    /// Tabulated terminal current, kept for cross-checks only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub current_re: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub current_im: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i_d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i_q: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseLabel {
    PreFault,
    FaultOn,
    PostFault,
}

/// A network configuration and the interval during which it holds.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkPhase {
    pub label: PhaseLabel,
    /// Reduced admittance matrix, row-major, pu.
    pub y: Vec<Vec<Complex64>>,
    pub t_start: f64,
    pub t_end: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhase {
    label: PhaseLabel,
    t_start: f64,
    t_end: f64,
    y_re: Vec<Vec<f64>>,
    y_im: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    #[serde(default)]
    name: String,
    omega_s: f64,
    #[serde(default = "default_fault_step")]
    fault_step: f64,
    #[serde(default = "default_equilibrium_tolerance")]
    equilibrium_tolerance: f64,
    machine: Vec<MachineParams>,
    phase: Vec<RawPhase>,
}

fn default_fault_step() -> f64 {
    1e-5
}

fn default_equilibrium_tolerance() -> f64 {
    2e-2
}

/// Network quantities at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct WsccAlgebraic {
    /// Internal voltages `e′_q (cos δ + j sin δ)`.
    pub e_prime: Vec<Complex64>,
    /// Injected currents `Y · E′`.
    pub currents: Vec<Complex64>,
    /// Terminal voltages `E′ − (R_a + jX′_d) I`.
    pub terminal: Vec<Complex64>,
    /// Electrical power `e_x i_x + e_y i_y`.
    pub pe: Vec<f64>,
}

fn check_dims(deltas: &[f64], params: &[MachineParams], y: &[Vec<Complex64>]) -> Result<()> {
    let n = params.len();
    if deltas.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: deltas.len(),
        });
    }
    if y.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: y.len(),
        });
    }
    if let Some(row) = y.iter().find(|row| row.len() != n) {
        return Err(Error::Dimension {
            expected: n,
            got: row.len(),
        });
    }
    Ok(())
}

/// Closed-form network solve for given rotor angles.
pub fn wscc_algebraic(deltas: &[f64], params: &[MachineParams], y: &[Vec<Complex64>]) -> Result<WsccAlgebraic> {
    check_dims(deltas, params, y)?;
    let e_prime: Vec<Complex64> = deltas
        .iter()
        .zip(params)
        .map(|(&d, m)| Complex64::from_polar(m.eq_prime, d))
        .collect();
    let currents: Vec<Complex64> = y
        .iter()
        .map(|row| row.iter().zip(&e_prime).map(|(yij, ej)| yij * ej).sum())
        .collect();
    let terminal: Vec<Complex64> = e_prime
        .iter()
        .zip(&currents)
        .zip(params)
        .map(|((e, i), m)| e - Complex64::new(m.ra, m.xd_prime) * i)
        .collect();
    let pe = terminal
        .iter()
        .zip(&currents)
        .map(|(e, i)| e.re * i.re + e.im * i.im)
        .collect();
    Ok(WsccAlgebraic {
        e_prime,
        currents,
        terminal,
        pe,
    })
}

/// `∂Pe_i/∂δ_k`, row-major.
fn pe_sensitivity(alg: &WsccAlgebraic, params: &[MachineParams], y: &[Vec<Complex64>]) -> Vec<Vec<f64>> {
    let n = params.len();
    let j = Complex64::new(0.0, 1.0);
    (0..n)
        .map(|i| {
            (0..n)
                .map(|k| {
                    let de_k = j * alg.e_prime[k];
                    let di = y[i][k] * de_k;
                    let de_i = if i == k { de_k } else { Complex64::new(0.0, 0.0) };
                    let ii = alg.currents[i];
                    (de_i * ii.conj() + alg.e_prime[i] * di.conj()).re - 2.0 * params[i].ra * (ii.conj() * di).re
                })
                .collect()
        })
        .collect()
}

/// Active network phase at `t`; switch instants belong to the later phase.
pub fn phase_schedule(phases: &[NetworkPhase], t: f64) -> Result<&NetworkPhase> {
    let (start, end) = match (phases.first(), phases.last()) {
        (Some(a), Some(b)) => (a.t_start, b.t_end),
        _ => return Err(Error::Config("no network phases defined".into())),
    };
    if !(t >= start && t <= end) {
        return Err(Error::TimeOutOfRange { t, start, end });
    }
    Ok(phases
        .iter()
        .rev()
        .find(|p| t >= p.t_start)
        .expect("t is at or after the first phase start"))
}

/// Three-machine classical model with scheduled network switching.
///
/// Unknowns are ordered `δ₁…δₙ, Δω₁…Δωₙ`; equations are the `n` angle
/// equations followed by the `n` swing equations.
#[derive(Debug, Clone)]
pub struct WsccSystem {
    pub name: String,
    pub omega_s: f64,
    pub machines: Vec<MachineParams>,
    pub phases: Vec<NetworkPhase>,
    /// RK4 step used inside the fault-on phase.
    pub fault_step: f64,
    pub equilibrium_tolerance: f64,
    variables: Vec<VariableSpec>,
}

impl WsccSystem {
    /// The shipped three-machine dataset.
    pub fn standard() -> Self {
        Self::from_toml_str(STANDARD).expect("bundled system file is valid")
    }

    pub fn standard_toml() -> &'static str {
        STANDARD
    }

    /// Parses and validates a system definition, including the pre-fault
    /// equilibrium gate `max |Pm − Pe| < equilibrium_tolerance`.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawSystem = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let n = raw.machine.len();
        if n == 0 {
            return Err(Error::Config("system defines no machines".into()));
        }
        for (i, m) in raw.machine.iter().enumerate() {
            if !(m.h > 0.0) {
                return Err(Error::Config(format!("machine[{i}].h must be positive")));
            }
        }
        if !(raw.omega_s > 0.0) {
            return Err(Error::Config("omega_s must be positive".into()));
        }
        let mut phases = Vec::with_capacity(raw.phase.len());
        for (p, rp) in raw.phase.into_iter().enumerate() {
            if rp.y_re.len() != n || rp.y_im.len() != n {
                return Err(Error::Config(format!("phase[{p}]: admittance must be {n}x{n}")));
            }
            let mut y = Vec::with_capacity(n);
            for (re, im) in rp.y_re.iter().zip(&rp.y_im) {
                if re.len() != n || im.len() != n {
                    return Err(Error::Config(format!("phase[{p}]: admittance must be {n}x{n}")));
                }
                y.push(re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect());
            }
            if !(rp.t_end > rp.t_start) {
                return Err(Error::Config(format!("phase[{p}]: t_end must exceed t_start")));
            }
            phases.push(NetworkPhase {
                label: rp.label,
                y,
                t_start: rp.t_start,
                t_end: rp.t_end,
            });
        }
        if phases.is_empty() {
            return Err(Error::Config("system defines no network phases".into()));
        }
        for w in phases.windows(2) {
            if w[0].t_end != w[1].t_start {
                return Err(Error::Config(format!(
                    "phases must tile time without gaps: {} ends at {} but next starts at {}",
                    label_name(w[0].label),
                    w[0].t_end,
                    w[1].t_start
                )));
            }
        }
        let names = (1..=n)
            .map(|i| format!("delta{i}"))
            .chain((1..=n).map(|i| format!("domega{i}")));
        let system = WsccSystem {
            name: raw.name,
            omega_s: raw.omega_s,
            machines: raw.machine,
            phases,
            fault_step: raw.fault_step,
            equilibrium_tolerance: raw.equilibrium_tolerance,
            variables: names.map(|name| VariableSpec { name, order: 1 }).collect(),
        };
        let gap = system.equilibrium_gap()?;
        if !(gap < system.equilibrium_tolerance) {
            return Err(Error::Config(format!(
                "pre-fault admittance fails the equilibrium check: max |Pm - Pe| = {gap:.4e} pu (tolerance {:.1e})",
                system.equilibrium_tolerance
            )));
        }
        Ok(system)
    }

    pub fn num_machines(&self) -> usize {
        self.machines.len()
    }

    pub fn span(&self) -> (f64, f64) {
        (self.phases[0].t_start, self.phases[self.phases.len() - 1].t_end)
    }

    pub fn initial_deltas(&self) -> Vec<f64> {
        self.machines.iter().map(|m| m.delta_init).collect()
    }

    /// `max_i |Pm_i − Pe_i|` at the initial angles under the first phase.
    pub fn equilibrium_gap(&self) -> Result<f64> {
        let alg = wscc_algebraic(&self.initial_deltas(), &self.machines, &self.phases[0].y)?;
        Ok(self
            .machines
            .iter()
            .zip(&alg.pe)
            .map(|(m, pe)| (m.pm - pe).abs())
            .fold(0.0, f64::max))
    }

    pub fn phase_at(&self, t: f64) -> Result<&NetworkPhase> {
        phase_schedule(&self.phases, t)
    }

    fn swing(&self, i: usize, pe: f64, domega: f64) -> f64 {
        let m = &self.machines[i];
        (m.pm - pe - m.d * domega) / (2.0 * m.h)
    }
}

fn label_name(label: PhaseLabel) -> &'static str {
    match label {
        PhaseLabel::PreFault => "pre-fault",
        PhaseLabel::FaultOn => "fault-on",
        PhaseLabel::PostFault => "post-fault",
    }
}

/// Angle and swing residuals at `t`, with the admittance chosen by the
/// phase schedule.
pub fn wscc_residuals(
    system: &WsccSystem,
    t: f64,
    deltas: &[f64],
    ddeltas: &[f64],
    domegas: &[f64],
    ddomegas: &[f64],
) -> Result<Vec<f64>> {
    let regime = system.regime_at(t)?;
    let y: Vec<Jet> = deltas
        .iter()
        .zip(ddeltas)
        .chain(domegas.iter().zip(ddomegas))
        .map(|(&v, &d)| Jet::new(v, d, 0.0))
        .collect();
    if y.len() != 2 * system.num_machines() {
        return Err(Error::Dimension {
            expected: 2 * system.num_machines(),
            got: y.len(),
        });
    }
    system.residuals(regime, t, &y, None)
}

impl DaeSystem for WsccSystem {
    fn name(&self) -> &str {
        "wscc"
    }

    fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    fn num_equations(&self) -> usize {
        2 * self.num_machines()
    }

    fn regime_at(&self, t: f64) -> Result<usize> {
        let phase = self.phase_at(t)?;
        Ok(self
            .phases
            .iter()
            .position(|p| std::ptr::eq(p, phase))
            .expect("phase belongs to this system"))
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.phases.iter().skip(1).map(|p| p.t_start).collect()
    }

    fn residuals(&self, regime: usize, _t: f64, y: &[Jet], jac: Option<&mut ResidualJacobian>) -> Result<Vec<f64>> {
        let n = self.num_machines();
        let phase = self.phases.get(regime).ok_or(Error::Dimension {
            expected: self.phases.len(),
            got: regime,
        })?;
        let deltas: Vec<f64> = y[..n].iter().map(|j| j.value).collect();
        let alg = wscc_algebraic(&deltas, &self.machines, &phase.y)?;
        let mut r = Vec::with_capacity(2 * n);
        for i in 0..n {
            r.push(y[i].d1 - self.omega_s * y[n + i].value);
        }
        for i in 0..n {
            r.push(y[n + i].d1 - self.swing(i, alg.pe[i], y[n + i].value));
        }
        if let Some(jac) = jac {
            jac.clear();
            let sens = pe_sensitivity(&alg, &self.machines, &phase.y);
            for i in 0..n {
                let m = &self.machines[i];
                jac.set(i, i, 1, 1.0);
                jac.set(i, n + i, 0, -self.omega_s);
                jac.set(n + i, n + i, 1, 1.0);
                jac.set(n + i, n + i, 0, m.d / (2.0 * m.h));
                for (k, s) in sens[i].iter().enumerate() {
                    jac.set(n + i, k, 0, s / (2.0 * m.h));
                }
            }
        }
        Ok(r)
    }

    fn initial_jets(&self) -> Vec<Jet> {
        let state = self.initial_state();
        self.jets_from_state(0, self.span().0, &state)
            .unwrap_or_else(|_| state.iter().map(|&v| Jet::constant(v)).collect())
    }

    fn state_names(&self) -> Vec<String> {
        self.variables.iter().map(|v| v.name.clone()).collect()
    }

    fn initial_state(&self) -> Vec<f64> {
        self.machines
            .iter()
            .map(|m| m.delta_init)
            .chain(self.machines.iter().map(|m| m.domega_init))
            .collect()
    }

    fn rhs(&self, regime: usize, _t: f64, s: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.num_machines();
        let alg = wscc_algebraic(&s[..n], &self.machines, &self.phases[regime].y)?;
        for i in 0..n {
            out[i] = self.omega_s * s[n + i];
            out[n + i] = self.swing(i, alg.pe[i], s[n + i]);
        }
        Ok(())
    }

    fn state_from_jets(&self, y: &[Jet]) -> Vec<f64> {
        y.iter().map(|j| j.value).collect()
    }

    fn jets_from_state(&self, regime: usize, t: f64, s: &[f64]) -> Result<Vec<Jet>> {
        let mut ds = vec![0.0; s.len()];
        self.rhs(regime, t, s, &mut ds)?;
        Ok(s.iter().zip(&ds).map(|(&v, &d)| Jet::new(v, d, 0.0)).collect())
    }

    fn regime_step(&self, regime: usize, step: f64) -> f64 {
        if self.phases[regime].label == PhaseLabel::FaultOn {
            step.min(self.fault_step)
        } else {
            step
        }
    }
}
