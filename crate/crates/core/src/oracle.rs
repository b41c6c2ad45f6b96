//! Fixed-step RK4 reference solutions and trajectory comparison.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::systems::DaeSystem;

/// Time series of named state variables on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub names: Vec<String>,
    pub times: Vec<f64>,
    /// `values[v][k]` is variable `v` at `times[k]`.
    pub values: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn new(names: Vec<String>) -> Self {
        let values = vec![Vec::new(); names.len()];
        Trajectory {
            names,
            times: Vec::new(),
            values,
        }
    }

    /// Appends one sample; `t` must exceed the last time.
    pub fn push(&mut self, t: f64, state: &[f64]) {
        debug_assert_eq!(state.len(), self.names.len());
        debug_assert!(self.times.last().is_none_or(|&last| t > last));
        self.times.push(t);
        for (col, v) in self.values.iter_mut().zip(state) {
            col.push(*v);
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i].as_slice())
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// State at sample `k`.
    pub fn state(&self, k: usize) -> Vec<f64> {
        self.values.iter().map(|col| col[k]).collect()
    }

    pub fn last_state(&self) -> Option<Vec<f64>> {
        (!self.is_empty()).then(|| self.state(self.len() - 1))
    }

    /// Checks the invariants: aligned columns and strictly increasing times.
    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.names.len() {
            return Err(Error::Dimension {
                expected: self.names.len(),
                got: self.values.len(),
            });
        }
        if let Some(col) = self.values.iter().find(|c| c.len() != self.times.len()) {
            return Err(Error::Dimension {
                expected: self.times.len(),
                got: col.len(),
            });
        }
        if let Some(w) = self.times.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::GridMismatch(format!(
                "times must increase strictly ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(())
    }

    /// Writes `t,<names…>` with 17 significant digits per value.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let header: Vec<&str> = std::iter::once("t")
            .chain(self.names.iter().map(String::as_str))
            .collect();
        w.write_record(&header)?;
        for k in 0..self.len() {
            let row: Vec<String> = std::iter::once(self.times[k])
                .chain(self.values.iter().map(|c| c[k]))
                .map(format_value)
                .collect();
            w.write_record(&row)?;
        }
        w.flush()
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header = r
            .headers()
            .map_err(|e| Error::Config(format!("csv header: {e}")))?
            .clone();
        if header.get(0) != Some("t") {
            return Err(Error::Config("first csv column must be `t`".into()));
        }
        let mut traj = Trajectory::new(header.iter().skip(1).map(str::to_string).collect());
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| Error::Config(format!("csv row {}: {e}", line + 2)))?;
            let nums = rec
                .iter()
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Config(format!("csv row {}: {e}", line + 2)))?;
            if nums.len() != header.len() {
                return Err(Error::Config(format!("csv row {} has {} fields", line + 2, nums.len())));
            }
            traj.times.push(nums[0]);
            for (col, v) in traj.values.iter_mut().zip(&nums[1..]) {
                col.push(*v);
            }
        }
        traj.validate()?;
        Ok(traj)
    }
}

/// Lossless decimal form of an `f64`.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// One classical RK4 step of `y′ = f(t, y)`.
pub fn rk4_step<F>(f: &mut F, t: f64, y: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = y.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];

    f(t, y, &mut k1)?;
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    f(t + 0.5 * h, &tmp, &mut k2)?;
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    f(t + 0.5 * h, &tmp, &mut k3)?;
    for i in 0..n {
        tmp[i] = y[i] + h * k3[i];
    }
    f(t + h, &tmp, &mut k4)?;
    Ok((0..n)
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// Integrates from `t0` to `t1` with equal steps no longer than `step`,
/// calling `visit` after every step.
pub fn integrate_fixed<F, V>(f: &mut F, t0: f64, t1: f64, step: f64, y0: &[f64], mut visit: V) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    V: FnMut(f64, &[f64]),
{
    if !(step > 0.0) {
        return Err(Error::Config(format!("integration step must be positive, got {step}")));
    }
    if !(t1 > t0) {
        return Err(Error::Config(format!("integration interval [{t0}, {t1}] is empty")));
    }
    let count = ((t1 - t0) / step - 1e-9).ceil().max(1.0) as usize;
    let h = (t1 - t0) / count as f64;
    let mut y = y0.to_vec();
    for k in 0..count {
        let t = t0 + k as f64 * h;
        y = rk4_step(f, t, &y, h)?;
        let t_next = if k + 1 == count { t1 } else { t0 + (k + 1) as f64 * h };
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "oracle state",
                t: t_next,
            });
        }
        visit(t_next, &y);
    }
    Ok(y)
}

/// Cuts `[t0, t1]` at the system's regime switches.
fn segments(system: &dyn DaeSystem, t0: f64, t1: f64) -> Vec<(f64, f64)> {
    let mut cuts = vec![t0];
    cuts.extend(system.breakpoints().into_iter().filter(|&b| b > t0 && b < t1));
    cuts.push(t1);
    cuts.windows(2).map(|w| (w[0], w[1])).collect()
}

fn integrate_segment(
    system: &dyn DaeSystem,
    a: f64,
    b: f64,
    step: f64,
    y: &[f64],
    visit: impl FnMut(f64, &[f64]),
) -> Result<Vec<f64>> {
    let regime = system.regime_at(0.5 * (a + b))?;
    let h = system.regime_step(regime, step);
    let mut rhs = |t: f64, s: &[f64], out: &mut [f64]| system.rhs(regime, t, s, out);
    integrate_fixed(&mut rhs, a, b, h, y, visit)
}

/// Dense RK4 solution on `[t0, t1]`, one sample per step (plus `t0`).
///
/// Integration restarts at every regime switch so that no step straddles a
/// network change; the state itself carries over unchanged.
pub fn rk4_solve(system: &dyn DaeSystem, t0: f64, t1: f64, step: f64, initial: &[f64]) -> Result<Trajectory> {
    let mut traj = Trajectory::new(system.state_names());
    traj.push(t0, initial);
    let mut y = initial.to_vec();
    for (a, b) in segments(system, t0, t1) {
        y = integrate_segment(system, a, b, step, &y, |t, s| traj.push(t, s))?;
    }
    Ok(traj)
}

/// RK4 solution recorded exactly at `times` (sorted, all `≥ t0`).
///
/// Steps are shortened so that every requested time and every regime switch
/// is hit exactly; no interpolation is involved.
pub fn rk4_sample(system: &dyn DaeSystem, t0: f64, initial: &[f64], times: &[f64], step: f64) -> Result<Trajectory> {
    let mut traj = Trajectory::new(system.state_names());
    let mut y = initial.to_vec();
    let mut t = t0;
    let breaks = system.breakpoints();
    let mut b = breaks.iter().copied().filter(|&x| x > t0).peekable();
    for &target in times {
        if target < t {
            return Err(Error::GridMismatch(format!("sample time {target} precedes {t}")));
        }
        while let Some(&br) = b.peek() {
            if br >= target {
                break;
            }
            if br > t {
                y = integrate_segment(system, t, br, step, &y, |_, _| {})?;
                t = br;
            }
            b.next();
        }
        if target > t {
            y = integrate_segment(system, t, target, step, &y, |_, _| {})?;
            t = target;
        }
        traj.push(target, &y);
    }
    Ok(traj)
}

/// Uniform grid `t0, t0 + dt, …` ending exactly at `t1`.
pub fn uniform_grid(t0: f64, t1: f64, dt: f64) -> Vec<f64> {
    let count = ((t1 - t0) / dt - 1e-9).ceil().max(1.0) as usize;
    (0..=count)
        .map(|k| if k == count { t1 } else { t0 + k as f64 * dt })
        .collect()
}

/// Mean squared pointwise difference of one variable.
pub fn mse(qnn: &Trajectory, reference: &Trajectory, variable: &str) -> Result<f64> {
    check_same_grid(qnn, reference)?;
    let a = qnn.column(variable)?;
    let b = reference.column(variable)?;
    if a.is_empty() {
        return Err(Error::GridMismatch("empty trajectories".into()));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64)
}

pub fn check_same_grid(a: &Trajectory, b: &Trajectory) -> Result<()> {
    if a.times.len() != b.times.len() {
        return Err(Error::GridMismatch(format!(
            "{} samples vs {} samples",
            a.times.len(),
            b.times.len()
        )));
    }
    if let Some((x, y)) = a
        .times
        .iter()
        .zip(&b.times)
        .find(|(x, y)| (*x - *y).abs() > 1e-9 * (1.0 + x.abs()))
    {
        return Err(Error::GridMismatch(format!("sample at t = {x} vs t = {y}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{SmibSystem, WsccSystem};
    use std::f64::consts::PI;

    fn harmonic(_t: f64, y: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = y[1];
        out[1] = -y[0];
        Ok(())
    }

    #[test]
    fn harmonic_half_period() {
        let y = integrate_fixed(&mut harmonic, 0.0, PI, 1e-3, &[1.0, 0.0], |_, _| {}).unwrap();
        assert!((y[0] + 1.0).abs() < 1e-9, "y(pi) = {}", y[0]);
    }

    #[test]
    fn smib_self_convergence() {
        let sys = SmibSystem::default();
        let coarse = rk4_sample(&sys, 0.0, &sys.initial_state(), &[0.5], 1e-3).unwrap();
        let fine = rk4_sample(&sys, 0.0, &sys.initial_state(), &[0.5], 5e-4).unwrap();
        let diff = (coarse.values[0][0] - fine.values[0][0]).abs();
        assert!(diff < 1e-9, "diff {diff}");
    }

    #[test]
    fn dense_output_has_one_sample_per_step() {
        let sys = SmibSystem::default();
        let traj = rk4_solve(&sys, 0.0, 0.1, 1e-3, &sys.initial_state()).unwrap();
        assert_eq!(traj.len(), 101);
        assert!((traj.times[100] - 0.1).abs() < 1e-15);
        traj.validate().unwrap();
    }

    #[test]
    fn wscc_prefault_drift_is_small() {
        let sys = WsccSystem::standard();
        let s0 = sys.initial_state();
        let traj = rk4_sample(&sys, 0.0, &s0, &[5.0], 1e-3).unwrap();
        for i in 0..3 {
            assert!((traj.values[i][0] - s0[i]).abs() < 5e-2);
        }
    }

    #[test]
    fn mse_basics() {
        let mut a = Trajectory::new(vec!["x".into()]);
        let mut b = Trajectory::new(vec!["x".into()]);
        for k in 0..10 {
            a.push(k as f64, &[k as f64]);
            b.push(k as f64, &[k as f64 + 0.3]);
        }
        assert_eq!(mse(&a, &a, "x").unwrap(), 0.0);
        assert!((mse(&a, &b, "x").unwrap() - 0.09).abs() < 1e-15);
        assert!(matches!(mse(&a, &b, "y"), Err(Error::UnknownVariable(_))));
        let mut c = Trajectory::new(vec!["x".into()]);
        c.push(0.5, &[0.0]);
        assert!(matches!(mse(&a, &c, "x"), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn grid_ends_exactly() {
        let g = uniform_grid(0.0, 1.0, 0.3);
        assert_eq!(g, vec![0.0, 0.3, 0.6, 0.8999999999999999, 1.0]);
        assert_eq!(uniform_grid(0.0, 0.5, 0.25).len(), 3);
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let mut t = Trajectory::new(vec!["a".into(), "b".into()]);
        t.push(0.0, &[1.0 / 3.0, -2e-300]);
        t.push(0.1, &[PI, 6.02214076e23]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,a,b\n"));
        assert_eq!(Trajectory::read_csv(buf.as_slice()).unwrap(), t);
    }
}
