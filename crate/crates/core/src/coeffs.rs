//! Generalized reflection coefficients of a single interface, the cavity
//! kernels built from two of them, and the interaction series.
//!
//! An interface separates region `i` (left) from region `j` (right) and may
//! carry a plasma sheet of parameter Ω. Alongside `R`, `S`, `T` every
//! [`CoefficientSet`] stores the complements `1 ± R`, `1 ∓ S` computed from
//! their own closed forms, which the stable Δ evaluation needs when the TM
//! coefficients approach ±1.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::phys::SpectralPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Polarization {
    TM,
    TE,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::TM, Polarization::TE];

    /// Sign relating the reflection amplitudes of the multiple-scattering
    /// picture to `R` and `S`.
    fn sign(self) -> f64 {
        match self {
            Polarization::TM => 1.0,
            Polarization::TE => -1.0,
        }
    }
}

impl std::fmt::Display for Polarization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Polarization::TM => write!(f, "TM"),
            Polarization::TE => write!(f, "TE"),
        }
    }
}

/// `K = sqrt(k⊥² + ε ζ²)`.
pub fn transverse_wavevector(eps: f64, pt: &SpectralPoint) -> f64 {
    pt.k_perp.hypot(eps.sqrt() * pt.zeta)
}

/// Coefficients of the interface between regions `i` and `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientSet {
    pub pol: Polarization,
    pub k_i: f64,
    pub k_j: f64,
    pub r: f64,
    pub s: f64,
    pub t: f64,
    /// `1 - ρ_l`: TM `1 - S`, TE `1 + S`.
    pub sigma_l: f64,
    /// `1 - ρ_r`: TM `1 + R`, TE `1 - R`.
    pub sigma_r: f64,
}

impl CoefficientSet {
    /// Reflection amplitude seen from the left region.
    pub fn rho_l(&self) -> f64 {
        self.pol.sign() * self.s
    }

    /// Reflection amplitude seen from the right region.
    pub fn rho_r(&self) -> f64 {
        -self.pol.sign() * self.r
    }

    /// `T - R S`, the product of the two transmission amplitudes.
    pub fn tau(&self) -> f64 {
        self.sigma_l * self.sigma_r
    }

    /// The transparent interface: `R = S = 0`, `T = 1`.
    pub fn transparent(pol: Polarization, k: f64) -> Self {
        Self {
            pol,
            k_i: k,
            k_j: k,
            r: 0.0,
            s: 0.0,
            t: 1.0,
            sigma_l: 1.0,
            sigma_r: 1.0,
        }
    }
}

/// Coefficients at `pt`. At `ζ = 0` the TM set is replaced by its exact limit.
pub fn rst(
    pol: Polarization,
    eps_i: f64,
    eps_j: f64,
    omega: f64,
    pt: &SpectralPoint,
) -> Result<CoefficientSet> {
    if pt.zeta == 0.0 && pol == Polarization::TM && omega > 0.0 {
        // Ω/ζ² dominates: the sheet behaves as an ideal conductor.
        let k = pt.k_perp;
        return Ok(CoefficientSet {
            pol,
            k_i: k,
            k_j: k,
            r: -1.0,
            s: 1.0,
            t: -1.0,
            sigma_l: 0.0,
            sigma_r: 0.0,
        });
    }
    rst_direct(pol, eps_i, eps_j, omega, pt)
}

/// Coefficients from the closed forms, without the zero-mode limit.
pub fn rst_direct(
    pol: Polarization,
    eps_i: f64,
    eps_j: f64,
    omega: f64,
    pt: &SpectralPoint,
) -> Result<CoefficientSet> {
    if !(eps_i >= 1.0 && eps_j >= 1.0) {
        return Err(Error::domain(format!(
            "permittivities must be >= 1, got {eps_i}, {eps_j}"
        )));
    }
    if !(omega >= 0.0) {
        return Err(Error::domain(format!("omega must be >= 0, got {omega}")));
    }
    let k_i = transverse_wavevector(eps_i, pt);
    let k_j = transverse_wavevector(eps_j, pt);
    match pol {
        Polarization::TM => {
            if pt.zeta == 0.0 && omega > 0.0 {
                return Err(Error::SingularZeroMode);
            }
            // Multiplied through by ζ² so that no Ω/ζ² is ever formed.
            let z = if omega > 0.0 { pt.zeta * pt.zeta } else { 1.0 };
            let a = z * eps_j * k_i;
            let b = z * eps_i * k_j;
            let w = 2.0 * omega * k_i * k_j;
            let den = a + b + w;
            Ok(CoefficientSet {
                pol,
                k_i,
                k_j,
                r: (a - b - w) / den,
                s: (a - b + w) / den,
                t: (a + b - w) / den,
                sigma_l: 2.0 * b / den,
                sigma_r: 2.0 * a / den,
            })
        }
        Polarization::TE => {
            let w = 2.0 * omega;
            let den = k_i + k_j + w;
            Ok(CoefficientSet {
                pol,
                k_i,
                k_j,
                r: (k_i - k_j + w) / den,
                s: (k_i - k_j - w) / den,
                t: (k_i + k_j - w) / den,
                sigma_l: 2.0 * k_i / den,
                sigma_r: 2.0 * k_j / den,
            })
        }
    }
}

/// Round-trip attenuation `e^{-2dK}` of a layer, with `1 - e^{-2dK}` kept
/// separately for accuracy when `dK` is small.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decay {
    pub factor: f64,
    pub complement: f64,
}

impl Decay {
    pub fn new(d: f64, k: f64) -> Self {
        let x = -2.0 * d * k;
        Self {
            factor: x.exp(),
            complement: -x.exp_m1(),
        }
    }

    /// Infinitely thick layer.
    pub const NONE: Decay = Decay {
        factor: 0.0,
        complement: 1.0,
    };
}

/// The four kernels of one cavity bounded by interfaces `0|1` and `1|2`,
/// together with the decays of the cavity and of the gap to the next cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityKernels {
    pub e: f64,
    /// `E - 1`, evaluated without cancellation.
    pub e_minus_one: f64,
    pub f: f64,
    pub g: f64,
    pub h: f64,
    pub cavity_decay: Decay,
    pub link_decay: Decay,
    /// `S^{0,1}`, which replaces `G` in the primed series.
    pub g_prime: f64,
}

/// Kernels for a cavity of width `d` and wavevector `k`; the link to the
/// next cavity is taken to have the same decay.
pub fn kernels(rst_01: &CoefficientSet, rst_12: &CoefficientSet, d: f64, k: f64) -> CavityKernels {
    let decay = Decay::new(d, k);
    kernels_with_link(rst_01, rst_12, decay, decay)
}

pub fn kernels_with_link(
    rst_01: &CoefficientSet,
    rst_12: &CoefficientSet,
    cavity_decay: Decay,
    link_decay: Decay,
) -> CavityKernels {
    let e1 = cavity_decay.factor;
    let e_minus_one = e1 * rst_12.s * rst_01.r;
    CavityKernels {
        e: e_minus_one + 1.0,
        e_minus_one,
        f: e1 * rst_01.r * rst_12.t + rst_12.r,
        g: e1 * rst_12.s * rst_01.t + rst_01.s,
        h: rst_01.s * rst_12.r + e1 * rst_01.t * rst_12.t,
        cavity_decay,
        link_decay,
        g_prime: rst_01.s,
    }
}

/// `I_1..I_N` and the primed `I'_1..I'_N`; index 0 holds `I_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionSeries {
    pub terms: Vec<f64>,
    pub primed_terms: Vec<f64>,
    /// `I_1 - 1`, carried separately for Δ close to 1.
    pub i1_minus_one: f64,
}

impl InteractionSeries {
    /// Series from explicit values, with `I_1 - 1` recomputed from `I_1`.
    pub fn from_terms(terms: Vec<f64>, primed_terms: Vec<f64>) -> Self {
        let i1_minus_one = terms.first().map_or(0.0, |t| t - 1.0);
        Self {
            terms,
            primed_terms,
            i1_minus_one,
        }
    }

    /// `I_n`, 1-based.
    pub fn i(&self, n: usize) -> f64 {
        self.terms[n - 1]
    }

    /// `I'_n`, 1-based.
    pub fn i_prime(&self, n: usize) -> f64 {
        self.primed_terms[n - 1]
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

pub fn interaction_series(k: &CavityKernels, n_max: usize) -> Result<InteractionSeries> {
    if n_max == 0 {
        return Err(Error::domain("interaction series needs n_max >= 1"));
    }
    let e2 = k.link_decay.factor;
    let q = k.h * e2;
    let mut terms = Vec::with_capacity(n_max);
    let mut primed_terms = Vec::with_capacity(n_max);
    terms.push(k.e);
    primed_terms.push(1.0);
    let mut chain = k.f * e2;
    for _ in 2..=n_max {
        terms.push(chain * k.g);
        primed_terms.push(chain * k.g_prime);
        chain *= q;
    }
    Ok(InteractionSeries {
        terms,
        primed_terms,
        i1_minus_one: k.e_minus_one,
    })
}
