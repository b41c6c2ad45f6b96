//! Dense BFGS with a strong-Wolfe line search.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsOptions {
    pub max_iterations: usize,
    /// Stop once `‖∇f‖∞` drops below this.
    pub gradient_tolerance: f64,
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    /// Evaluation budget for one line search.
    pub max_line_search: usize,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        BfgsOptions {
            max_iterations: 1000,
            gradient_tolerance: 1e-8,
            c1: 1e-4,
            c2: 0.9,
            max_line_search: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BfgsResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// The run stopped because no acceptable step could be found, even
    /// after resetting the Hessian approximation.
    pub line_search_failed: bool,
}

/// State after an accepted step, passed to the observer.
#[derive(Debug, Clone, Copy)]
pub struct Iterate<'a> {
    pub iteration: usize,
    pub x: &'a [f64],
    pub value: f64,
    pub gradient: &'a [f64],
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

struct Probe {
    alpha: f64,
    value: f64,
    slope: f64,
    gradient: Vec<f64>,
}

struct LineSearch<'a, F> {
    objective: &'a mut F,
    x: &'a [f64],
    dir: &'a [f64],
    f0: f64,
    slope0: f64,
    c1: f64,
    c2: f64,
    budget: usize,
    evaluations: usize,
}

impl<F: FnMut(&[f64]) -> (f64, Vec<f64>)> LineSearch<'_, F> {
    fn probe(&mut self, alpha: f64) -> Probe {
        self.evaluations += 1;
        let point: Vec<f64> = self.x.iter().zip(self.dir).map(|(x, d)| x + alpha * d).collect();
        let (value, gradient) = (self.objective)(&point);
        let slope = dot(&gradient, self.dir);
        let finite = value.is_finite() && slope.is_finite();
        Probe {
            alpha,
            value: if finite { value } else { f64::INFINITY },
            slope: if finite { slope } else { f64::NAN },
            gradient,
        }
    }

    fn armijo(&self, p: &Probe) -> bool {
        p.value <= self.f0 + self.c1 * p.alpha * self.slope0
    }

    fn curvature(&self, p: &Probe) -> bool {
        p.slope.abs() <= -self.c2 * self.slope0
    }

    fn run(&mut self, alpha1: f64) -> Option<Probe> {
        let mut prev = Probe {
            alpha: 0.0,
            value: self.f0,
            slope: self.slope0,
            gradient: Vec::new(),
        };
        let mut alpha = alpha1;
        for i in 0..self.budget {
            let p = self.probe(alpha);
            if !self.armijo(&p) || (i > 0 && p.value >= prev.value) {
                return self.zoom(prev, p);
            }
            if self.curvature(&p) {
                return Some(p);
            }
            if p.slope >= 0.0 {
                return self.zoom(p, prev);
            }
            alpha *= 2.0;
            prev = p;
        }
        // Budget exhausted while still descending: take the last decrease.
        (prev.alpha > 0.0).then_some(prev)
    }

    /// Bracket `[lo, hi]` with `lo` satisfying sufficient decrease.
    fn zoom(&mut self, mut lo: Probe, mut hi: Probe) -> Option<Probe> {
        while self.evaluations < self.budget {
            let alpha = interpolate(&lo, &hi);
            if (alpha - lo.alpha).abs() < 1e-16 * lo.alpha.abs().max(1e-300) {
                break;
            }
            let p = self.probe(alpha);
            if !self.armijo(&p) || p.value >= lo.value {
                hi = p;
            } else {
                if self.curvature(&p) {
                    return Some(p);
                }
                if p.slope * (hi.alpha - lo.alpha) >= 0.0 {
                    hi = lo;
                }
                lo = p;
            }
        }
        (lo.alpha > 0.0).then_some(lo)
    }
}

/// Safeguarded cubic interpolation between two probes, falling back to
/// bisection.
fn interpolate(lo: &Probe, hi: &Probe) -> f64 {
    let (a, b) = (lo.alpha, hi.alpha);
    let (left, right) = (a.min(b), a.max(b));
    let width = right - left;
    let mid = 0.5 * (a + b);
    if !(hi.value.is_finite() && hi.slope.is_finite()) {
        return mid;
    }
    let d1 = lo.slope + hi.slope - 3.0 * (lo.value - hi.value) / (a - b);
    let disc = d1 * d1 - lo.slope * hi.slope;
    if disc < 0.0 {
        return mid;
    }
    let d2 = (b - a).signum() * disc.sqrt();
    let denom = hi.slope - lo.slope + 2.0 * d2;
    if denom == 0.0 {
        return mid;
    }
    let t = b - (b - a) * (hi.slope + d2 - d1) / denom;
    if t.is_finite() && t > left + 0.1 * width && t < right - 0.1 * width {
        t
    } else {
        mid
    }
}

/// Minimizes `objective`, which returns the value and gradient at a point.
///
/// The inverse Hessian starts as the identity, is rescaled by `sᵀy/yᵀy`
/// before the first update, and is reset whenever the search direction stops
/// being a descent direction or a line search fails. A failed line search on a
/// freshly reset approximation ends the run with `line_search_failed` set and
/// the best point seen.
pub fn bfgs_minimize<F, O>(
    mut objective: F,
    initial: &[f64],
    options: &BfgsOptions,
    mut observer: O,
) -> Result<BfgsResult>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
    O: FnMut(&Iterate<'_>),
{
    let n = initial.len();
    let mut x = initial.to_vec();
    let (mut value, mut grad) = objective(&x);
    let mut evaluations = 1;
    if !value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite {
            what: "objective at the initial point",
            t: f64::NAN,
        });
    }

    let identity = |h: &mut Vec<f64>, scale: f64| {
        h.fill(0.0);
        for i in 0..n {
            h[i * n + i] = scale;
        }
    };
    let mut h = vec![0.0; n * n];
    identity(&mut h, 1.0);
    let mut fresh = true;

    let mut iterations = 0;
    let mut converged = inf_norm(&grad) < options.gradient_tolerance;
    let mut line_search_failed = false;

    while !converged && iterations < options.max_iterations {
        let mut dir: Vec<f64> = (0..n).map(|i| -dot(&h[i * n..(i + 1) * n], &grad)).collect();
        let mut slope = dot(&dir, &grad);
        if !(slope < 0.0) {
            identity(&mut h, 1.0);
            fresh = true;
            dir = grad.iter().map(|g| -g).collect();
            slope = dot(&dir, &grad);
        }
        let alpha1 = if fresh { (1.0 / inf_norm(&grad)).min(1.0) } else { 1.0 };

        let mut search = LineSearch {
            objective: &mut objective,
            x: &x,
            dir: &dir,
            f0: value,
            slope0: slope,
            c1: options.c1,
            c2: options.c2,
            budget: options.max_line_search,
            evaluations: 0,
        };
        let accepted = search.run(alpha1);
        evaluations += search.evaluations;

        let Some(step) = accepted else {
            if fresh {
                line_search_failed = true;
                break;
            }
            identity(&mut h, 1.0);
            fresh = true;
            continue;
        };

        let s: Vec<f64> = dir.iter().map(|d| step.alpha * d).collect();
        let y: Vec<f64> = step.gradient.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        let yy = dot(&y, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * yy.sqrt() && yy > 0.0 {
            if fresh {
                identity(&mut h, sy / yy);
            }
            bfgs_update(&mut h, &s, &y, sy);
            fresh = false;
        }

        for (xi, si) in x.iter_mut().zip(&s) {
            *xi += si;
        }
        value = step.value;
        grad = step.gradient;
        iterations += 1;
        observer(&Iterate {
            iteration: iterations,
            x: &x,
            value,
            gradient: &grad,
        });
        converged = inf_norm(&grad) < options.gradient_tolerance;
    }

    Ok(BfgsResult {
        x,
        value,
        gradient: grad,
        iterations,
        evaluations,
        converged,
        line_search_failed,
    })
}

/// `H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ` with `ρ = 1/sᵀy`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], y)).collect();
    let yhy = dot(y, &hy);
    let coef = rho * rho * yhy + rho;
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += coef * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> (f64, Vec<f64>) {
        let (a, b) = (x[0], x[1]);
        let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
        let g = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
        (f, g)
    }

    #[test]
    fn rosenbrock_from_standard_start() {
        let opts = BfgsOptions {
            gradient_tolerance: 1e-12,
            ..BfgsOptions::default()
        };
        let r = bfgs_minimize(rosenbrock, &[-1.2, 1.0], &opts, |_| {}).unwrap();
        assert!(r.converged, "{r:?}");
        assert!((r.x[0] - 1.0).abs() < 1e-8 && (r.x[1] - 1.0).abs() < 1e-8, "{:?}", r.x);
    }

    #[test]
    fn quadratic_converges_within_dimension_plus_two() {
        let c = [3.0, -1.0, 0.5, 2.0, -4.0];
        let quad = |x: &[f64]| {
            let g: Vec<f64> = x.iter().zip(&c).map(|(a, b)| a - b).collect();
            (0.5 * dot(&g, &g), g)
        };
        for start in [[0.0; 5], [10.0, -3.0, 7.0, 1.0, 0.0]] {
            let r = bfgs_minimize(quad, &start, &BfgsOptions::default(), |_| {}).unwrap();
            assert!(r.converged);
            assert!(r.iterations <= c.len() + 2, "{} iterations", r.iterations);
            for (x, c) in r.x.iter().zip(&c) {
                assert!((x - c).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn terminal_gradient_meets_tolerance() {
        let f = |x: &[f64]| {
            (
                (x[0] - 0.3).powi(4) + x[0] * x[0],
                vec![4.0 * (x[0] - 0.3).powi(3) + 2.0 * x[0]],
            )
        };
        let opts = BfgsOptions {
            gradient_tolerance: 1e-10,
            ..BfgsOptions::default()
        };
        let r = bfgs_minimize(f, &[5.0], &opts, |_| {}).unwrap();
        assert!(r.converged);
        assert!(r.gradient[0].abs() < 1e-10);
    }

    #[test]
    fn non_finite_start_is_an_error() {
        let f = |_: &[f64]| (f64::NAN, vec![0.0]);
        assert!(bfgs_minimize(f, &[0.0], &BfgsOptions::default(), |_| {}).is_err());
    }

    #[test]
    fn observer_sees_every_iteration() {
        let mut seen = Vec::new();
        let r = bfgs_minimize(rosenbrock, &[-1.2, 1.0], &BfgsOptions::default(), |it| {
            seen.push(it.iteration)
        })
        .unwrap();
        assert_eq!(seen, (1..=r.iterations).collect::<Vec<_>>());
    }

    #[test]
    fn unbounded_direction_with_nan_region_does_not_panic() {
        // Finite only on x < 2; the minimizer must back off rather than abort.
        let f = |x: &[f64]| {
            if x[0] >= 2.0 {
                (f64::NAN, vec![f64::NAN])
            } else {
                ((x[0] - 1.9).powi(2), vec![2.0 * (x[0] - 1.9)])
            }
        };
        let r = bfgs_minimize(f, &[0.0], &BfgsOptions::default(), |_| {}).unwrap();
        assert!((r.x[0] - 1.9).abs() < 1e-6);
    }
}
