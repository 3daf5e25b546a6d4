//! Physical constants, unit conventions and the parameter records shared by
//! the rest of the crate.
//!
//! Everything is SI. Imaginary frequencies are carried as wavenumbers
//! (m⁻¹): the Matsubara energy `2π l k_B T` is divided by `ħc`, so that
//! `K = sqrt(k⊥² + ε ζ²)` and the plasma parameter Ω share the same unit.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fundamental constants in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    /// Reduced Planck constant, J·s.
    pub hbar: f64,
    /// Speed of light, m/s.
    pub c: f64,
    /// Boltzmann constant, J/K.
    pub k_b: f64,
    /// Vacuum permeability, N/A².
    pub mu_0: f64,
    /// Vacuum permittivity, F/m.
    pub eps_0: f64,
    /// Elementary charge, C.
    pub e_charge: f64,
    /// Electron mass, kg.
    pub m_electron: f64,
}

impl Constants {
    /// CODATA 2022 recommended values. ε₀ is taken as `1/(μ₀c²)` from the
    /// listed μ₀ so that the two are consistent beyond the rounding of the
    /// published ε₀.
    pub const CODATA_2022: Constants = Constants {
        hbar: 1.054_571_817e-34,
        c: 299_792_458.0,
        k_b: 1.380_649e-23,
        mu_0: 1.256_637_061_27e-6,
        eps_0: 8.854_187_818_789_433e-12,
        e_charge: 1.602_176_634e-19,
        m_electron: 9.109_383_713_9e-31,
    };

    /// ħc in J·m.
    pub fn hbar_c(&self) -> f64 {
        self.hbar * self.c
    }
}

/// The constants used throughout the crate.
pub const CONSTANTS: Constants = Constants::CODATA_2022;

/// Normalization of the plasma parameter.
///
/// `Full` is `Ω = μ₀ n q²/m*`, as in the sheet boundary conditions. `Half` is
/// `μ₀ n q²/(2m*)`, used for the material estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OmegaConvention {
    Full,
    Half,
}

/// Plasma parameter Ω (m⁻¹) of a sheet with areal carrier density `n_2d`
/// (m⁻²), carrier charge `q_star` (C) and mass `m_star` (kg).
pub fn omega_from_carriers(
    n_2d: f64,
    q_star: f64,
    m_star: f64,
    convention: OmegaConvention,
) -> Result<f64> {
    if !(n_2d >= 0.0 && n_2d.is_finite()) {
        return Err(Error::domain(format!(
            "carrier density must be >= 0, got {n_2d}"
        )));
    }
    if !(q_star > 0.0 && q_star.is_finite()) {
        return Err(Error::domain(format!(
            "carrier charge must be > 0, got {q_star}"
        )));
    }
    if !(m_star > 0.0 && m_star.is_finite()) {
        return Err(Error::domain(format!(
            "carrier mass must be > 0, got {m_star}"
        )));
    }
    let full = CONSTANTS.mu_0 * n_2d * q_star * q_star / m_star;
    Ok(match convention {
        OmegaConvention::Full => full,
        OmegaConvention::Half => 0.5 * full,
    })
}

/// Matsubara frequency `ζ_l = 2π l k_B T / (ħc)` in m⁻¹.
pub fn matsubara_frequency(l: u64, temperature: f64) -> Result<f64> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::domain(format!(
            "temperature must be > 0, got {temperature}"
        )));
    }
    Ok(matsubara_step(temperature) * l as f64)
}

/// Spacing between consecutive Matsubara frequencies, m⁻¹.
pub(crate) fn matsubara_step(temperature: f64) -> f64 {
    2.0 * std::f64::consts::PI * CONSTANTS.k_b * temperature / CONSTANTS.hbar_c()
}

/// A point of the spectral grid: Matsubara index, imaginary frequency and
/// transverse momentum magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    pub l: u64,
    /// ζ in m⁻¹.
    pub zeta: f64,
    /// |k⊥| in m⁻¹.
    pub k_perp: f64,
}

impl SpectralPoint {
    /// Checked constructor: `zeta` must vanish exactly when `l == 0`.
    pub fn new(l: u64, zeta: f64, k_perp: f64) -> Result<Self> {
        if !(zeta >= 0.0 && zeta.is_finite()) || !(k_perp >= 0.0 && k_perp.is_finite()) {
            return Err(Error::domain(format!(
                "invalid spectral point zeta={zeta}, k={k_perp}"
            )));
        }
        if (l == 0) != (zeta == 0.0) {
            return Err(Error::domain(format!(
                "zeta must be zero exactly for the zero mode (l={l}, zeta={zeta})"
            )));
        }
        Ok(Self { l, zeta, k_perp })
    }

    /// The `l`-th Matsubara point at temperature `temperature`.
    pub fn matsubara(l: u64, temperature: f64, k_perp: f64) -> Result<Self> {
        Self::new(l, matsubara_frequency(l, temperature)?, k_perp)
    }

    /// A point at an arbitrary imaginary frequency. The index is only a label
    /// here: 0 for `zeta == 0`, 1 otherwise.
    pub fn at_frequency(zeta: f64, k_perp: f64) -> Result<Self> {
        Self::new(u64::from(zeta != 0.0), zeta, k_perp)
    }

    pub fn is_zero_mode(&self) -> bool {
        self.l == 0
    }
}

/// Relative permittivity on the imaginary frequency axis, ε(iζ).
#[derive(Clone)]
pub enum Permittivity {
    Vacuum,
    Constant(f64),
    /// Caller-supplied model, evaluated at ζ in m⁻¹.
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Permittivity {
    pub fn at(&self, zeta: f64) -> f64 {
        match self {
            Permittivity::Vacuum => 1.0,
            Permittivity::Constant(eps) => *eps,
            Permittivity::Function(f) => f(zeta),
        }
    }

    pub fn is_vacuum(&self) -> bool {
        match self {
            Permittivity::Vacuum => true,
            Permittivity::Constant(eps) => *eps == 1.0,
            Permittivity::Function(_) => false,
        }
    }
}

impl fmt::Debug for Permittivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Permittivity::Vacuum => write!(f, "Vacuum"),
            Permittivity::Constant(eps) => write!(f, "Constant({eps})"),
            Permittivity::Function(_) => write!(f, "Function(..)"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StackKind {
    /// Vacuum cavities between dielectric slabs; even regions hold the slab
    /// material, odd regions the cavity material.
    #[serde(alias = "dielectric")]
    DielectricCavities,
    /// Zero-thickness plasma sheets in vacuum.
    #[serde(alias = "plasma")]
    PlasmaSheetCavities,
}

/// Geometry and materials of a stack of `n_cavities` equal cavities.
///
/// For plasma sheets `n_cavities` counts the gaps, so the stack holds
/// `n_cavities + 1` sheets. For dielectrics each cavity has two interfaces
/// and consecutive cavities are separated by a slab of thickness `gap`.
#[derive(Debug, Clone)]
pub struct StackSpec {
    pub kind: StackKind,
    pub n_cavities: usize,
    /// Cavity (and slab) thickness, m.
    pub gap: f64,
    /// Plasma parameter of every interface, m⁻¹.
    pub omega: f64,
    pub eps_inner: Permittivity,
    pub eps_outer: Permittivity,
    /// K.
    pub temperature: f64,
}

impl StackSpec {
    pub fn plasma_sheets(
        n_cavities: usize,
        gap: f64,
        omega: f64,
        temperature: f64,
    ) -> Result<Self> {
        let spec = Self {
            kind: StackKind::PlasmaSheetCavities,
            n_cavities,
            gap,
            omega,
            eps_inner: Permittivity::Vacuum,
            eps_outer: Permittivity::Vacuum,
            temperature,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn dielectric(
        n_cavities: usize,
        gap: f64,
        eps_inner: Permittivity,
        eps_outer: Permittivity,
        temperature: f64,
    ) -> Result<Self> {
        let spec = Self {
            kind: StackKind::DielectricCavities,
            n_cavities,
            gap,
            omega: 0.0,
            eps_inner,
            eps_outer,
            temperature,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_cavities(&self, n_cavities: usize) -> Self {
        Self {
            n_cavities,
            ..self.clone()
        }
    }

    pub fn with_omega(&self, omega: f64) -> Self {
        Self {
            omega,
            ..self.clone()
        }
    }

    pub fn with_gap(&self, gap: f64) -> Self {
        Self {
            gap,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cavities == 0 {
            return Err(Error::domain("a stack needs at least one cavity"));
        }
        if !(self.gap > 0.0 && self.gap.is_finite()) {
            return Err(Error::domain(format!("gap must be > 0, got {}", self.gap)));
        }
        if !(self.omega >= 0.0 && self.omega.is_finite()) {
            return Err(Error::domain(format!(
                "omega must be >= 0, got {}",
                self.omega
            )));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::domain(format!(
                "temperature must be > 0, got {}",
                self.temperature
            )));
        }
        if self.kind == StackKind::PlasmaSheetCavities
            && !(self.eps_inner.is_vacuum() && self.eps_outer.is_vacuum())
        {
            return Err(Error::domain("plasma-sheet stacks are vacuum everywhere"));
        }
        for (name, eps) in [
            ("eps_inner", &self.eps_inner),
            ("eps_outer", &self.eps_outer),
        ] {
            if let Permittivity::Constant(v) = eps {
                if !(*v >= 1.0 && v.is_finite()) {
                    return Err(Error::domain(format!("{name} must be >= 1, got {v}")));
                }
            }
        }
        Ok(())
    }

    /// Number of material interfaces in the stack.
    pub fn n_interfaces(&self) -> usize {
        match self.kind {
            StackKind::DielectricCavities => 2 * self.n_cavities,
            StackKind::PlasmaSheetCavities => self.n_cavities + 1,
        }
    }

    /// Region permittivities, interior thicknesses and interface Ω at `zeta`.
    pub fn layering(&self, zeta: f64) -> Layering {
        let n_int = self.n_interfaces();
        let (inner, outer) = (self.eps_inner.at(zeta), self.eps_outer.at(zeta));
        let eps = (0..=n_int)
            .map(|i| match self.kind {
                StackKind::PlasmaSheetCavities => 1.0,
                StackKind::DielectricCavities if i % 2 == 0 => outer,
                StackKind::DielectricCavities => inner,
            })
            .collect();
        Layering {
            eps,
            thickness: vec![self.gap; n_int - 1],
            omega: vec![self.omega; n_int],
        }
    }
}

/// Explicit per-region description of a planar stack at one frequency.
///
/// Region `i` lies between interfaces `i` and `i + 1` (interfaces counted
/// from 1); regions 0 and `eps.len() - 1` are semi-infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct Layering {
    pub eps: Vec<f64>,
    /// Thickness of interior regions 1..=M-1.
    pub thickness: Vec<f64>,
    /// Plasma parameter of interfaces 1..=M.
    pub omega: Vec<f64>,
}

impl Layering {
    pub fn n_interfaces(&self) -> usize {
        self.omega.len()
    }

    /// The sub-stack made of the first `n` interfaces.
    pub fn truncated(&self, n: usize) -> Layering {
        Layering {
            eps: self.eps[..=n].to_vec(),
            thickness: self.thickness[..n - 1].to_vec(),
            omega: self.omega[..n].to_vec(),
        }
    }
}
