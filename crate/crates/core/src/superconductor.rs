//! Plasma parameter of a layered superconductor on both sides of `T_c` and
//! the resulting change of the Casimir energy across the transition.
//!
//! Below `T_c` the sheets are described by `Ω = δ/(2λ(T)²)` with
//! `λ(T) = λ(0)/√(1 - (T/T_c)^p)`, `p = 4/3` for d-wave pairing. Above
//! `T_c` the normal carriers give `Ω = μ₀ n_2d q²/(2m*)` with
//! `n_2d = δ n_3d(T_ref) T/T_ref`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::energy::{casimir_energy, QuadratureConfig};
use crate::error::{Error, Result};
use crate::fitting::closed_form_energy;
use crate::phys::{omega_from_carriers, OmegaConvention, StackSpec};

const BUILTIN_PRESETS: &str = include_str!("presets.toml");

fn default_pairing_exponent() -> f64 {
    4.0 / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuperconductorModel {
    /// Critical temperature, K.
    pub t_c: f64,
    /// In-plane penetration depth at zero temperature, m.
    pub lambda_0: f64,
    /// Gap between conducting sheets, m.
    pub d: f64,
    /// Sheet thickness, m.
    pub delta: f64,
    /// Normal-state carrier density at `t_ref`, m⁻³.
    pub n_3d_ref: f64,
    /// K.
    pub t_ref: f64,
    /// Carrier effective mass, kg.
    pub m_star: f64,
    /// Carrier charge, C.
    pub q_star: f64,
    /// Exponent `p` of `1 - (T/T_c)^p`.
    #[serde(default = "default_pairing_exponent")]
    pub pairing_exponent: f64,
}

/// A named parameter set with the temperature pair it is evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Preset {
    pub t_below: f64,
    pub t_above: f64,
    pub model: SuperconductorModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnergyMode {
    /// `-1.63e-28 √(Ω/d⁵)` on both sides.
    ClosedForm,
    /// Full Matsubara sum for a single plasma-sheet cavity.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionEnergies {
    pub t_below: f64,
    pub t_above: f64,
    /// m⁻¹.
    pub omega_sc: f64,
    pub omega_n: f64,
    /// J/m².
    pub e_sc: f64,
    pub e_n: f64,
    /// `e_n - e_sc`.
    pub delta_e: f64,
    /// `delta_e / |e_n|`.
    pub eta: f64,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be > 0, got {v}")))
    }
}

impl SuperconductorModel {
    pub fn validate(&self) -> Result<()> {
        positive("t_c", self.t_c)?;
        positive("lambda_0", self.lambda_0)?;
        positive("d", self.d)?;
        positive("delta", self.delta)?;
        positive("t_ref", self.t_ref)?;
        positive("m_star", self.m_star)?;
        positive("q_star", self.q_star)?;
        positive("pairing_exponent", self.pairing_exponent)?;
        if !(self.n_3d_ref >= 0.0 && self.n_3d_ref.is_finite()) {
            return Err(Error::domain(format!(
                "n_3d_ref must be >= 0, got {}",
                self.n_3d_ref
            )));
        }
        Ok(())
    }

    /// `1 - (T/T_c)^p` on the superconducting branch.
    fn superfluid_fraction(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0 && t < self.t_c) {
            return Err(Error::domain(format!(
                "superconducting branch needs 0 <= T < T_c = {}, got {t}",
                self.t_c
            )));
        }
        Ok(1.0 - (t / self.t_c).powf(self.pairing_exponent))
    }

    /// `λ(T)`, m.
    pub fn penetration_depth(&self, t: f64) -> Result<f64> {
        Ok(self.lambda_0 / self.superfluid_fraction(t)?.sqrt())
    }

    /// `δ/(2λ(T)²)`, m⁻¹.
    pub fn omega_superconducting(&self, t: f64) -> Result<f64> {
        let f = self.superfluid_fraction(t)?;
        Ok(self.delta / (2.0 * self.lambda_0 * self.lambda_0) * f)
    }

    /// Areal carrier density `δ n_3d T/T_ref`, m⁻².
    pub fn n_2d(&self, t: f64) -> f64 {
        self.delta * self.n_3d_ref * (t / self.t_ref)
    }

    /// Normal-state plasma parameter (half convention), m⁻¹.
    pub fn omega_normal(&self, t: f64) -> Result<f64> {
        if !(t > self.t_c && t.is_finite()) {
            return Err(Error::domain(format!(
                "normal branch needs T > T_c = {}, got {t}",
                self.t_c
            )));
        }
        omega_from_carriers(
            self.n_2d(t),
            self.q_star,
            self.m_star,
            OmegaConvention::Half,
        )
    }

    /// Energies on both sides of the transition. `quad` is used only in
    /// [`EnergyMode::Exact`].
    pub fn transition_energies(
        &self,
        t_below: f64,
        t_above: f64,
        mode: EnergyMode,
        quad: &QuadratureConfig,
    ) -> Result<TransitionEnergies> {
        self.validate()?;
        if !(t_below < self.t_c && self.t_c < t_above) {
            return Err(Error::domain(format!(
                "need T_below < T_c < T_above, got {t_below}, {}, {t_above}",
                self.t_c
            )));
        }
        let omega_sc = self.omega_superconducting(t_below)?;
        let omega_n = self.omega_normal(t_above)?;
        let (e_sc, e_n) = match mode {
            EnergyMode::ClosedForm => (
                closed_form_energy(1, self.d, omega_sc)?,
                closed_form_energy(1, self.d, omega_n)?,
            ),
            EnergyMode::Exact => {
                let sc = StackSpec::plasma_sheets(1, self.d, omega_sc, t_below)?;
                let n = StackSpec::plasma_sheets(1, self.d, omega_n, t_above)?;
                (
                    casimir_energy(&sc, quad)?.e_per_area,
                    casimir_energy(&n, quad)?.e_per_area,
                )
            }
        };
        let delta_e = e_n - e_sc;
        Ok(TransitionEnergies {
            t_below,
            t_above,
            omega_sc,
            omega_n,
            e_sc,
            e_n,
            delta_e,
            eta: delta_e / e_n.abs(),
        })
    }
}

impl Preset {
    pub fn transition_energies(
        &self,
        mode: EnergyMode,
        quad: &QuadratureConfig,
    ) -> Result<TransitionEnergies> {
        self.model
            .transition_energies(self.t_below, self.t_above, mode, quad)
    }
}

/// Parse a preset table keyed by name.
pub fn parse_presets(text: &str) -> Result<BTreeMap<String, Preset>> {
    let presets: BTreeMap<String, Preset> =
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    for (name, p) in &presets {
        p.model
            .validate()
            .map_err(|e| Error::Config(format!("preset {name}: {e}")))?;
    }
    Ok(presets)
}

pub fn load_presets(path: &Path) -> Result<BTreeMap<String, Preset>> {
    parse_presets(&std::fs::read_to_string(path)?)
}

/// The bundled presets: `harshman`, `archimedes` and `figure5`.
pub fn builtin_presets() -> BTreeMap<String, Preset> {
    parse_presets(BUILTIN_PRESETS).expect("bundled presets are valid")
}

pub fn preset(name: &str) -> Result<Preset> {
    let all = builtin_presets();
    all.get(name).copied().ok_or_else(|| {
        let names: Vec<_> = all.keys().cloned().collect();
        Error::Config(format!(
            "unknown preset {name:?}; available: {}",
            names.join(", ")
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harshman() -> SuperconductorModel {
        preset("harshman").unwrap().model
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn penetration_depth_values() {
        let m = harshman();
        assert_eq!(m.penetration_depth(0.0).unwrap(), m.lambda_0);
        let f: f64 = 1.0 - (90.0f64 / 92.0).powf(4.0 / 3.0);
        assert!(close(
            m.penetration_depth(90.0).unwrap(),
            1415e-10 / f.sqrt(),
            1e-14
        ));
        assert!(close(m.penetration_depth(90.0).unwrap(), 8326e-10, 1e-3));
        assert!(m.penetration_depth(0.999 * m.t_c).unwrap() > 10.0 * m.lambda_0);
        assert!(m.penetration_depth(92.0).is_err());
        assert!(m.penetration_depth(-1.0).is_err());
    }

    #[test]
    fn superconducting_omega() {
        let m = harshman();
        let w0 = m.omega_superconducting(0.0).unwrap();
        assert!(close(w0, 5.84e-10 / (2.0 * 1.415e-7 * 1.415e-7), 1e-14));
        assert!(close(w0, 1.459e4, 1e-3));
        let ratio = m.omega_superconducting(90.0).unwrap() / w0;
        assert!(close(ratio, 0.02888, 2e-4));
        assert!(m.omega_superconducting(92.0 * (1.0 - 1e-12)).unwrap() < 1e-6 * w0);
    }

    #[test]
    fn normal_omega() {
        let m = harshman();
        assert!(close(m.n_2d(94.0), 1.702e16, 5e-4));
        assert_eq!(m.n_2d(m.t_ref), m.delta * m.n_3d_ref);
        assert!((m.omega_normal(94.0).unwrap() - 300.505).abs() < 5e-3);
        let mu0 = 1.256_637_061_27e-6;
        let direct = mu0 * 5.84e-10 * 3.1e25 * 0.91 * 1.6e-19 * 1.6e-19 / (2.0 * 9.109e-31);
        let arch = preset("archimedes").unwrap().model;
        assert!(close(arch.omega_normal(91.0).unwrap(), direct, 1e-9));
        assert!(m.omega_normal(92.0).is_err());
    }

    #[test]
    fn closed_form_transition_numbers() {
        let q = QuadratureConfig::default();
        let h = preset("harshman")
            .unwrap()
            .transition_energies(EnergyMode::ClosedForm, &q)
            .unwrap();
        assert!(close(h.e_sc, -0.001616, 5e-4));
        assert!(close(h.e_n, -0.001365, 5e-4));
        assert!(close(h.delta_e, 0.000251, 2e-3));
        let a = preset("archimedes")
            .unwrap()
            .transition_energies(EnergyMode::ClosedForm, &q)
            .unwrap();
        assert!(close(a.e_sc, -0.002258, 5e-4));
        assert!(close(a.e_n, -0.001343, 5e-4));
        assert!(close(a.delta_e, 0.0009142, 5e-4));
        assert!((a.eta - 0.7).abs() < 0.05);
    }

    #[test]
    fn vanishing_superconducting_response() {
        let m = harshman();
        let q = QuadratureConfig::default();
        let t = m
            .transition_energies(m.t_c * (1.0 - 1e-9), 94.0, EnergyMode::ClosedForm, &q)
            .unwrap();
        assert!(t.e_sc.abs() < 1e-3 * t.e_n.abs());
        assert!(close(t.delta_e, t.e_n, 1e-3));
    }

    #[test]
    fn superconducting_energy_rises_toward_zero() {
        let m = harshman();
        let q = QuadratureConfig::default();
        let mut prev = f64::NEG_INFINITY;
        for t in [10.0, 40.0, 70.0, 85.0, 90.0, 91.5] {
            let e = m
                .transition_energies(t, 94.0, EnergyMode::ClosedForm, &q)
                .unwrap()
                .e_sc;
            assert!(e > prev && e < 0.0);
            prev = e;
        }
    }

    #[test]
    fn exponent_is_swappable() {
        let s_wave = SuperconductorModel {
            pairing_exponent: 4.0,
            ..harshman()
        };
        let f = 1.0 - (90.0f64 / 92.0).powi(4);
        assert!(close(
            s_wave.omega_superconducting(90.0).unwrap()
                / s_wave.omega_superconducting(0.0).unwrap(),
            f,
            1e-14
        ));
    }

    #[test]
    fn presets_parse_and_reject_typos() {
        let all = builtin_presets();
        assert_eq!(
            all.keys().map(String::as_str).collect::<Vec<_>>(),
            ["archimedes", "figure5", "harshman"]
        );
        assert_eq!(all["figure5"].model.d, 3.18e-10);
        let bad = BUILTIN_PRESETS.replace("t_ref =", "tref =");
        assert!(matches!(parse_presets(&bad), Err(Error::Config(_))));
        assert!(preset("bscco").is_err());
        let neg = BUILTIN_PRESETS.replacen("lambda_0 = 1415e-10", "lambda_0 = -1.0", 1);
        assert!(parse_presets(&neg).is_err());
    }

    #[test]
    fn bad_temperature_order() {
        let m = harshman();
        let q = QuadratureConfig::default();
        assert!(m
            .transition_energies(94.0, 90.0, EnergyMode::ClosedForm, &q)
            .is_err());
    }
}
