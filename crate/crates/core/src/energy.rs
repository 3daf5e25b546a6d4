//! Casimir energy per unit area from the Matsubara sum of the transverse
//! momentum integral of log Δ.
//!
//! `E/A = k_B T Σ'_l (1/2π) ∫₀^∞ k [log Δ_TM + log Δ_TE] dk`, where the
//! `l = 0` term carries weight ½. Matsubara terms are evaluated in parallel
//! blocks and accumulated in index order, so the result does not depend on
//! the number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::StackCell;
use crate::coeffs::Polarization;
use crate::error::{Error, Result};
use crate::phys::{matsubara_step, SpectralPoint, StackSpec, CONSTANTS};
use crate::quadrature::integrate_half_line;

/// Matsubara indices evaluated per parallel block.
const BLOCK: u64 = 256;

/// Consecutive negligible terms required before the sum is truncated.
const QUIET_TERMS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    /// Relative tolerance of every transverse-momentum integral.
    pub rel_tol: f64,
    /// Scale of the `k⊥` map in m⁻¹. `None` uses `max(1/d, sqrt(Ω/d))`.
    pub k_scale: Option<f64>,
    /// Integrand evaluations allowed per Matsubara term and polarization.
    pub max_nodes: usize,
    /// The sum stops once the estimated remainder falls below this fraction
    /// of the running total.
    pub matsubara_rel_tail: f64,
    /// Hard cap on the Matsubara index.
    pub l_max_cap: u64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            k_scale: None,
            max_nodes: 50_000,
            matsubara_rel_tail: 1e-10,
            l_max_cap: 5_000_000,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::domain(format!(
                "rel_tol must be in (0, 1), got {}",
                self.rel_tol
            )));
        }
        if let Some(s) = self.k_scale {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::domain(format!("k_scale must be > 0, got {s}")));
            }
        }
        if !(self.matsubara_rel_tail > 0.0) {
            return Err(Error::domain("matsubara_rel_tail must be > 0"));
        }
        if self.max_nodes == 0 || self.l_max_cap == 0 {
            return Err(Error::domain("max_nodes and l_max_cap must be > 0"));
        }
        Ok(())
    }

    pub fn k_scale_for(&self, spec: &StackSpec) -> f64 {
        self.k_scale
            .unwrap_or_else(|| (1.0 / spec.gap).max((spec.omega / spec.gap).sqrt()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyResult {
    /// J/m².
    pub e_per_area: f64,
    pub tm_part: f64,
    pub te_part: f64,
    /// Number of Matsubara terms summed, including `l = 0`.
    pub l_used: u64,
    /// Total integrand evaluations.
    pub k_nodes_used: usize,
    /// Summed quadrature error estimates plus the Matsubara remainder, J/m².
    pub est_error: f64,
    /// Estimated Matsubara remainder added to the sum, J/m².
    pub tail: f64,
}

/// Per-mode integrals `(1/2π)∫ k log Δ dk` for TM and TE, with error
/// estimates and evaluation count.
#[derive(Debug, Clone, Copy)]
struct ModeTerm {
    tm: f64,
    te: f64,
    err: f64,
    nodes: usize,
    converged: bool,
}

fn mode_term(spec: &StackSpec, cfg: &QuadratureConfig, l: u64, zeta: f64) -> ModeTerm {
    let scale = cfg.k_scale_for(spec);
    let n_int = spec.n_interfaces();
    let mut features = vec![1.0 / spec.gap, zeta, (spec.omega / spec.gap).sqrt()];
    if spec.omega > 0.0 {
        features.push(zeta * zeta / spec.omega);
        features.push(spec.omega);
    }
    let mut out = ModeTerm {
        tm: 0.0,
        te: 0.0,
        err: 0.0,
        nodes: 0,
        converged: true,
    };
    for pol in Polarization::BOTH {
        let integrand = |k: f64| {
            if k == 0.0 {
                return 0.0;
            }
            let pt = SpectralPoint { l, zeta, k_perp: k };
            match StackCell::new(spec, pol, &pt) {
                Ok(cell) => k * cell.log_delta(n_int),
                Err(_) => f64::NAN,
            }
        };
        let q = integrate_half_line(
            integrand,
            scale,
            &features,
            8,
            cfg.rel_tol,
            0.0,
            cfg.max_nodes,
        );
        let v = q.value / (2.0 * std::f64::consts::PI);
        match pol {
            Polarization::TM => out.tm = v,
            Polarization::TE => out.te = v,
        }
        out.err += q.error / (2.0 * std::f64::consts::PI);
        out.nodes += q.evaluations;
        out.converged &= q.converged && q.value.is_finite();
    }
    out
}

/// Casimir energy per unit area of `spec`.
pub fn casimir_energy(spec: &StackSpec, cfg: &QuadratureConfig) -> Result<EnergyResult> {
    spec.validate()?;
    cfg.validate()?;
    let step = matsubara_step(spec.temperature);
    let kt = CONSTANTS.k_b * spec.temperature;

    let (mut tm, mut te, mut err) = (0.0f64, 0.0f64, 0.0f64);
    let mut nodes = 0usize;
    let mut quiet = 0usize;
    let mut prev_total: Option<f64> = None;
    let mut start = 0u64;
    loop {
        let end = (start + BLOCK).min(cfg.l_max_cap);
        let terms: Vec<ModeTerm> = (start..end)
            .into_par_iter()
            .map(|l| mode_term(spec, cfg, l, step * l as f64))
            .collect();
        for (off, t) in terms.iter().enumerate() {
            let l = start + off as u64;
            let w = if l == 0 { 0.5 } else { 1.0 };
            nodes += t.nodes;
            if !t.converged {
                let partial = EnergyResult {
                    e_per_area: kt * (tm + te),
                    tm_part: kt * tm,
                    te_part: kt * te,
                    l_used: l,
                    k_nodes_used: nodes,
                    est_error: kt * err,
                    tail: 0.0,
                };
                return Err(Error::NonConvergence {
                    detail: format!(
                        "k integral of Matsubara term {l} did not reach rel_tol within max_nodes"
                    ),
                    partial: Some(Box::new(partial)),
                });
            }
            tm += w * t.tm;
            te += w * t.te;
            err += w * t.err;
            let total = t.tm + t.te;
            let sum = tm + te;
            // Geometric remainder from the ratio of the last two terms.
            let remainder = match prev_total {
                Some(p) if l >= 2 && p != 0.0 && (total / p) > 0.0 && (total / p) < 1.0 => {
                    let q = total / p;
                    total * q / (1.0 - q)
                }
                _ => f64::INFINITY,
            };
            prev_total = Some(total);
            if remainder.abs() <= cfg.matsubara_rel_tail * sum.abs() || (total == 0.0 && l >= 1) {
                quiet += 1;
            } else {
                quiet = 0;
            }
            if quiet >= QUIET_TERMS {
                let rem = if remainder.is_finite() {
                    remainder
                } else {
                    0.0
                };
                // Split the remainder between polarizations by their last terms.
                let frac_tm = if total != 0.0 { t.tm / total } else { 1.0 };
                let (tm_f, te_f) = (tm + rem * frac_tm, te + rem * (1.0 - frac_tm));
                return Ok(EnergyResult {
                    e_per_area: kt * (tm_f + te_f),
                    tm_part: kt * tm_f,
                    te_part: kt * te_f,
                    l_used: l + 1,
                    k_nodes_used: nodes,
                    est_error: kt * (err + rem.abs()),
                    tail: kt * rem,
                });
            }
        }
        if end >= cfg.l_max_cap {
            return Err(Error::NonConvergence {
                detail: format!(
                    "Matsubara sum not converged within l_max_cap = {}",
                    cfg.l_max_cap
                ),
                partial: Some(Box::new(EnergyResult {
                    e_per_area: kt * (tm + te),
                    tm_part: kt * tm,
                    te_part: kt * te,
                    l_used: end,
                    k_nodes_used: nodes,
                    est_error: kt * err,
                    tail: 0.0,
                })),
            });
        }
        start = end;
    }
}

/// One row of a ratio curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioPoint {
    pub n: usize,
    /// `E[N]/(N E[1])` with both polarizations.
    pub ratio: f64,
    /// Same ratio with TM modes only.
    pub ratio_tm: f64,
    pub energy: EnergyResult,
}

/// `E[N]/(N·E[1])` for every `N` in `n_list`; `E[1]` is computed once.
pub fn ratio_curve(
    base: &StackSpec,
    n_list: &[usize],
    cfg: &QuadratureConfig,
) -> Result<Vec<RatioPoint>> {
    if n_list.is_empty() {
        return Err(Error::domain("ratio curve needs at least one N"));
    }
    let e1 = casimir_energy(&base.with_cavities(1), cfg)?;
    n_list
        .iter()
        .map(|&n| {
            let e = if n == 1 {
                e1.clone()
            } else {
                casimir_energy(&base.with_cavities(n), cfg)?
            };
            Ok(RatioPoint {
                n,
                ratio: e.e_per_area / (n as f64 * e1.e_per_area),
                ratio_tm: e.tm_part / (n as f64 * e1.tm_part),
                energy: e,
            })
        })
        .collect()
}
