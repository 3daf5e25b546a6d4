//! Interface-by-interface evaluation of log Δ.
//!
//! Sweeping the stack from the left, `Γ` is the reflection amplitude of
//! everything already added, seen from the current region. Each interior
//! region contributes the factor `f = 1 - e Γ ρ_l` of the next interface and
//! Δ is the product of those factors. Both `Γ` and `1 - Γ` are propagated,
//! each from its own update, so that ideal-conductor-like modes (`Γ → 1`,
//! thin layers) keep full relative accuracy where the expanded polynomial in
//! the `I_n` cancels catastrophically.

use crate::coeffs::{CoefficientSet, Decay};

/// `1 - ∏(1 - c_i)` without cancellation when every `c_i` is small.
#[inline]
fn one_minus_prod(c: &[f64]) -> f64 {
    c.iter().fold(0.0, |r, &x| x + (1.0 - x) * r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainState {
    gamma: f64,
    gamma_c: f64,
    log_delta: f64,
}

impl ChainState {
    /// Start at the first interface of the stack.
    pub fn new(first: &CoefficientSet) -> Self {
        Self {
            gamma: first.rho_r(),
            gamma_c: first.sigma_r,
            log_delta: 0.0,
        }
    }

    /// Cross a layer with round-trip attenuation `layer` and then the
    /// interface `next`.
    #[inline]
    pub fn push(&mut self, layer: Decay, next: &CoefficientSet) {
        let e = layer.factor;
        let u = layer.complement;
        let x = e * self.gamma * next.rho_l();
        let f = one_minus_prod(&[u, self.gamma_c, next.sigma_l]);
        self.log_delta += if x < 0.5 { (-x).ln_1p() } else { f.ln() };
        let open = one_minus_prod(&[u, self.gamma_c]);
        self.gamma_c = next.sigma_r * open / f;
        self.gamma = next.rho_r() + next.tau() * e * self.gamma / f;
    }

    pub fn log_delta(&self) -> f64 {
        self.log_delta
    }

    /// Reflection amplitude of the stack built so far.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}
