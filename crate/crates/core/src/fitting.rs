//! Least-squares fits of the ratio curve and of the energy power law, and
//! the closed-form energy built from the fitted constants.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::phys::CONSTANTS;

/// Prefactor of the closed-form energy, J·m.
pub const CLOSED_FORM_PREFACTOR: f64 = 1.63e-28;

/// Large-N asymptote used in the power-law model.
pub const ASYMPTOTE: f64 = 1.034;

/// Fitted parameters with linearized standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub names: Vec<&'static str>,
    pub params: Vec<f64>,
    pub stderr: Vec<f64>,
    pub rss: f64,
    pub converged: bool,
    pub iterations: usize,
    /// `|Jᵀr|` at the returned parameters.
    pub gradient_norm: f64,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| *n == name)
            .map(|i| self.params[i])
    }

    pub fn stderr_of(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| *n == name)
            .map(|i| self.stderr[i])
    }

    /// One `param,value,stderr,rss` record per parameter.
    pub fn records(&self) -> Vec<String> {
        self.names
            .iter()
            .zip(self.params.iter().zip(&self.stderr))
            .map(|(n, (v, s))| format!("{n},{v:.10e},{s:.10e},{:.10e}", self.rss))
            .collect()
    }
}

/// Solve `a x = b` (row-major `n×n`)
/// by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<f64>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i * n + c].abs().total_cmp(&a[j * n + c].abs()))?;
        if a[p * n + c] == 0.0 || !a[p * n + c].is_finite() {
            return None;
        }
        if p != c {
            for j in 0..n {
                a.swap(p * n + j, c * n + j);
            }
            b.swap(p, c);
        }
        for r in c + 1..n {
            let f = a[r * n + c] / a[c * n + c];
            for j in c..n {
                a[r * n + j] -= f * a[c * n + j];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|j| a[r * n + j] * x[j]).sum();
        x[r] = (b[r] - s) / a[r * n + r];
    }
    Some(x)
}

fn invert(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut inv = vec![0.0; n * n];
    for c in 0..n {
        let mut e = vec![0.0; n];
        e[c] = 1.0;
        let col = solve(a.to_vec(), e)?;
        for r in 0..n {
            inv[r * n + c] = col[r];
        }
    }
    Some(inv)
}

/// Residuals and Jacobian (row-major, `m × n`) at `x`.
type Model<'a> = dyn Fn(&[f64]) -> (Vec<f64>, Vec<f64>) + 'a;

struct LmOutcome {
    x: Vec<f64>,
    rss: f64,
    grad: f64,
    jtj: Vec<f64>,
    iterations: usize,
    converged: bool,
}

fn normal_equations(r: &[f64], j: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let m = r.len();
    let mut jtj = vec![0.0; n * n];
    let mut jtr = vec![0.0; n];
    for i in 0..m {
        for a in 0..n {
            jtr[a] += j[i * n + a] * r[i];
            for b in 0..n {
                jtj[a * n + b] += j[i * n + a] * j[i * n + b];
            }
        }
    }
    (jtj, jtr)
}

/// Levenberg-Marquardt with multiplicative damping on the diagonal.
fn levenberg_marquardt(model: &Model, x0: Vec<f64>, max_iter: usize) -> LmOutcome {
    let n = x0.len();
    let mut x = x0;
    let (mut r, mut j) = model(&x);
    let mut rss: f64 = r.iter().map(|v| v * v).sum();
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    loop {
        let (jtj, jtr) = normal_equations(&r, &j, n);
        let grad = jtr.iter().map(|v| v * v).sum::<f64>().sqrt();
        if grad < 1e-10 * (1.0 + rss) {
            converged = true;
        }
        if converged || iterations >= max_iter {
            return LmOutcome {
                x,
                rss,
                grad,
                jtj,
                iterations,
                converged,
            };
        }
        iterations += 1;
        let mut improved = false;
        for _ in 0..60 {
            let mut a = jtj.clone();
            for d in 0..n {
                a[d * n + d] += lambda * jtj[d * n + d].max(1e-300);
            }
            let Some(step) = solve(a, jtr.iter().map(|v| -v).collect()) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + b).collect();
            let (rt, jt) = model(&trial);
            let rss_t: f64 = rt.iter().map(|v| v * v).sum();
            if rss_t.is_finite() && rss_t <= rss {
                let small = step
                    .iter()
                    .zip(&x)
                    .all(|(s, v)| s.abs() <= 1e-15 * v.abs().max(1e-300));
                x = trial;
                r = rt;
                j = jt;
                rss = rss_t;
                lambda = (lambda * 0.3).max(1e-15);
                improved = true;
                if small {
                    // No representable progress left; accept the stationary point.
                    let (jtj, jtr) = normal_equations(&r, &j, n);
                    let grad = jtr.iter().map(|v| v * v).sum::<f64>().sqrt();
                    return LmOutcome {
                        x,
                        rss,
                        grad,
                        jtj,
                        iterations,
                        converged: grad < 1e-10 * (1.0 + rss),
                    };
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            let grad = jtr.iter().map(|v| v * v).sum::<f64>().sqrt();
            return LmOutcome {
                x,
                rss,
                grad,
                jtj,
                iterations,
                converged: grad < 1e-10 * (1.0 + rss),
            };
        }
    }
}

fn standard_errors(jtj: &[f64], rss: f64, m: usize, n: usize) -> Vec<f64> {
    let dof = m.saturating_sub(n).max(1) as f64;
    match invert(jtj, n) {
        Some(inv) => (0..n)
            .map(|i| (inv[i * n + i] * rss / dof).abs().sqrt())
            .collect(),
        None => vec![f64::NAN; n],
    }
}

fn check_ratio_data(data: &[(f64, f64)]) -> Result<()> {
    if data.len() < 4 {
        return Err(Error::DegenerateFit(format!(
            "need at least 4 points, got {}",
            data.len()
        )));
    }
    if data.iter().any(|&(n, r)| !(n >= 1.0) || !r.is_finite()) {
        return Err(Error::DegenerateFit(
            "cavity counts must be >= 1 and ratios finite".into(),
        ));
    }
    Ok(())
}

/// Best `(a, b)` and rss of `a - b N^{-p}` at fixed `p` (linear least squares).
fn linear_ab(data: &[(f64, f64)], p: f64) -> (f64, f64, f64) {
    let m = data.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(n, y) in data {
        let x = -n.powf(-p);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let det = m * sxx - sx * sx;
    let b = (m * sxy - sx * sy) / det;
    let a = (sy - b * sx) / m;
    let rss = data
        .iter()
        .map(|&(n, y)| (a - b * n.powf(-p) - y).powi(2))
        .sum();
    (a, b, rss)
}

/// Fit `a - b/N^p` by Levenberg-Marquardt with analytic Jacobian.
pub fn fit_ratio_asymptote(data: &[(f64, f64)]) -> Result<FitResult> {
    check_ratio_data(data)?;
    let model = |x: &[f64]| {
        let (a, b, p) = (x[0], x[1], x[2]);
        let mut r = Vec::with_capacity(data.len());
        let mut j = Vec::with_capacity(3 * data.len());
        for &(n, y) in data {
            let t = n.powf(-p);
            r.push(a - b * t - y);
            j.extend_from_slice(&[1.0, -t, b * t * n.ln()]);
        }
        (r, j)
    };
    let (a0, b0, _) = linear_ab(data, 1.0);
    let out = levenberg_marquardt(&model, vec![a0, b0, 1.0], 500);
    Ok(FitResult {
        names: vec!["a", "b", "p"],
        stderr: standard_errors(&out.jtj, out.rss, data.len(), 3),
        params: out.x,
        rss: out.rss,
        converged: out.converged,
        iterations: out.iterations,
        gradient_norm: out.grad,
    })
}

/// Reference fit of `a - b/N^p`: a dense scan over `p` with the linear
/// parameters solved exactly at each `p`, refined by golden-section search.
pub fn grid_fit_ratio_asymptote(data: &[(f64, f64)]) -> Result<FitResult> {
    check_ratio_data(data)?;
    let rss_at = |p: f64| linear_ab(data, p).2;
    let (lo, hi, steps) = (0.01, 5.0, 5000);
    let h = (hi - lo) / steps as f64;
    let best = (0..=steps)
        .map(|i| lo + h * i as f64)
        .min_by(|&p, &q| rss_at(p).total_cmp(&rss_at(q)))
        .ok_or_else(|| Error::DegenerateFit("empty grid".into()))?;
    let (mut a, mut b) = ((best - h).max(lo), (best + h).min(hi));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut iterations = 0;
    while b - a > 1e-13 && iterations < 200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if rss_at(c) < rss_at(d) {
            b = d;
        } else {
            a = c;
        }
        iterations += 1;
    }
    let p = 0.5 * (a + b);
    let (pa, pb, rss) = linear_ab(data, p);
    Ok(FitResult {
        names: vec!["a", "b", "p"],
        params: vec![pa, pb, p],
        stderr: vec![f64::NAN; 3],
        rss,
        converged: true,
        iterations: steps + 1 + iterations,
        gradient_norm: f64::NAN,
    })
}

/// One energy sample for the power-law fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerSample {
    pub n: usize,
    /// m.
    pub d: f64,
    /// m⁻¹.
    pub omega: f64,
    /// J/m², negative.
    pub energy: f64,
}

fn check_power_samples(samples: &[PowerSample]) -> Result<()> {
    if samples.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 samples, got {}",
            samples.len()
        )));
    }
    if samples
        .iter()
        .any(|s| !(s.energy < 0.0 && s.d > 0.0 && s.omega > 0.0 && s.n >= 1))
    {
        return Err(Error::DegenerateFit(
            "samples need E < 0, d > 0, Ω > 0, N >= 1".into(),
        ));
    }
    let spread = |f: &dyn Fn(&PowerSample) -> f64| {
        let (mn, mx) = samples
            .iter()
            .map(f)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
                (a.min(v), b.max(v))
            });
        mx - mn
    };
    if spread(&|s| s.d.log10()) < 1.0 - 1e-9 || spread(&|s| s.omega.log10()) < 1.0 - 1e-9 {
        return Err(Error::DegenerateFit(
            "samples must span at least a decade in d and in Ω".into(),
        ));
    }
    Ok(())
}

/// `ln(1.034 N ħc)`, the fixed part of the power-law model.
fn power_offset(s: &PowerSample) -> f64 {
    (ASYMPTOTE * s.n as f64 * CONSTANTS.hbar_c()).ln()
}

/// Fit `E/A = -1.034 N K ħc Ω^α / d^β` by linear least squares on `ln|E|`.
pub fn fit_power_law(samples: &[PowerSample]) -> Result<FitResult> {
    check_power_samples(samples)?;
    // Unknowns (ln K, α, β); row [1, ln Ω, -ln d].
    let rows: Vec<([f64; 3], f64)> = samples
        .iter()
        .map(|s| {
            (
                [1.0, s.omega.ln(), -s.d.ln()],
                (-s.energy).ln() - power_offset(s),
            )
        })
        .collect();
    let mut ata = vec![0.0; 9];
    let mut aty = vec![0.0; 3];
    for (x, y) in &rows {
        for a in 0..3 {
            aty[a] += x[a] * y;
            for b in 0..3 {
                ata[a * 3 + b] += x[a] * x[b];
            }
        }
    }
    let sol =
        solve(ata.clone(), aty).ok_or_else(|| Error::DegenerateFit("singular design".into()))?;
    let rss: f64 = rows
        .iter()
        .map(|(x, y)| (x[0] * sol[0] + x[1] * sol[1] + x[2] * sol[2] - y).powi(2))
        .sum();
    let se = standard_errors(&ata, rss, rows.len(), 3);
    let k = sol[0].exp();
    Ok(FitResult {
        names: vec!["K", "alpha", "beta"],
        params: vec![k, sol[1], sol[2]],
        stderr: vec![k * se[0], se[1], se[2]],
        rss,
        converged: true,
        iterations: 1,
        gradient_norm: 0.0,
    })
}

/// Same model fitted by Levenberg-Marquardt on relative residuals
/// `model/E - 1`, started from a neutral point rather than the log fit.
pub fn fit_power_law_direct(samples: &[PowerSample]) -> Result<FitResult> {
    check_power_samples(samples)?;
    let model = |x: &[f64]| {
        let (lnk, al, be) = (x[0], x[1], x[2]);
        let mut r = Vec::with_capacity(samples.len());
        let mut j = Vec::with_capacity(3 * samples.len());
        for s in samples {
            let ratio = (lnk + al * s.omega.ln() - be * s.d.ln() + power_offset(s)
                - (-s.energy).ln())
            .exp();
            r.push(ratio - 1.0);
            j.extend_from_slice(&[ratio, ratio * s.omega.ln(), -ratio * s.d.ln()]);
        }
        (r, j)
    };
    // Start at α = β = 1 with ln K matching the first sample.
    let s0 = &samples[0];
    let lnk0 = (-s0.energy).ln() - power_offset(s0) - s0.omega.ln() + s0.d.ln();
    let out = levenberg_marquardt(&model, vec![lnk0, 1.0, 1.0], 2000);
    let se = standard_errors(&out.jtj, out.rss, samples.len(), 3);
    let k = out.x[0].exp();
    Ok(FitResult {
        names: vec!["K", "alpha", "beta"],
        params: vec![k, out.x[1], out.x[2]],
        stderr: vec![k * se[0], se[1], se[2]],
        rss: out.rss,
        converged: out.converged,
        iterations: out.iterations,
        gradient_norm: out.grad,
    })
}

/// `-1.63e-28 · N √Ω / d^{5/2}` in J/m².
pub fn closed_form_energy(n: usize, d: f64, omega: f64) -> Result<f64> {
    closed_form_with_prefactor(n, d, omega, CLOSED_FORM_PREFACTOR)
}

/// Prefactor `1.034 K ħc` recomputed from a fitted `K`, J·m.
pub fn prefactor_from_k(k: f64) -> f64 {
    ASYMPTOTE * k * CONSTANTS.hbar_c()
}

/// Closed form with an explicit prefactor, J/m².
pub fn closed_form_with_prefactor(n: usize, d: f64, omega: f64, prefactor: f64) -> Result<f64> {
    if !(d > 0.0) || !(omega >= 0.0) {
        return Err(Error::domain(format!(
            "closed form needs d > 0 and Ω >= 0, got d={d}, Ω={omega}"
        )));
    }
    Ok(-prefactor * n as f64 * omega.sqrt() / d.powf(2.5))
}
