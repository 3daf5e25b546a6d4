//! Generating functions Δ_N built from the interaction series.
//!
//! Three algebraically identical routes are provided for dielectric stacks:
//! the convolution recurrence `Δ_N = Σ_k I_k Δ_{N-k}`, the sum over integer
//! partitions weighted by their composition counts, and brute-force
//! enumeration of compositions. Energies use [`log_delta`], which walks the
//! stack interface by interface and stays accurate where the polynomial
//! forms cancel.

mod chain;
mod partitions;
mod symbolic;

pub use chain::ChainState;
pub use partitions::{partitions_with_multiplicity, PartitionTerm, MAX_PARTITION_N};
pub use symbolic::{expand_delta, DeltaPolynomial, Monomial};

use crate::coeffs::{
    interaction_series, kernels_with_link, rst, CavityKernels, CoefficientSet, Decay,
    InteractionSeries, Polarization,
};
use crate::error::{Error, Result};
use crate::phys::{Layering, SpectralPoint, StackKind, StackSpec};

/// Largest `N` accepted by [`delta_by_compositions`].
pub const MAX_COMPOSITION_N: usize = 24;

/// A generating-function value with its logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaValue {
    pub value: f64,
    /// `ln(value)`, NaN when `value <= 0`.
    pub log_value: f64,
}

impl DeltaValue {
    pub fn from_value(value: f64) -> Self {
        let log_value = if value > 0.0 { value.ln() } else { f64::NAN };
        Self { value, log_value }
    }

    /// From `value - 1`, keeping full precision in the logarithm.
    pub fn from_excess(excess: f64) -> Self {
        let value = 1.0 + excess;
        let log_value = if value > 0.0 {
            excess.ln_1p()
        } else {
            f64::NAN
        };
        Self { value, log_value }
    }

    pub fn from_log(log_value: f64) -> Self {
        Self {
            value: log_value.exp(),
            log_value,
        }
    }

    pub const ONE: DeltaValue = DeltaValue {
        value: 1.0,
        log_value: 0.0,
    };
}

fn check_len(series: &InteractionSeries, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("Delta_N needs N >= 1"));
    }
    if series.len() < n {
        return Err(Error::domain(format!(
            "interaction series has {} terms, Delta_{n} needs {n}",
            series.len()
        )));
    }
    Ok(())
}

/// `Δ_m - 1` for `m = 0..=n` by the convolution recurrence, rewritten as
/// `D_m = j + (1 + j) D_{m-1} + Σ_{k≥2} I_k Δ_{m-k}` with `j = I_1 - 1` so
/// that no `1 + small - 1` cancellation occurs.
fn recurrence_table(series: &InteractionSeries, n: usize) -> Vec<f64> {
    let j = series.i1_minus_one;
    let mut d = Vec::with_capacity(n + 1);
    d.push(0.0);
    for m in 1..=n {
        let coupled: f64 = (2..=m).map(|k| series.i(k) * (1.0 + d[m - k])).sum();
        let v = j + d[m - 1] + j * d[m - 1] + coupled;
        d.push(v);
    }
    d
}

/// Δ_N of `n` dielectric cavities from the recurrence.
pub fn delta_dielectric(series: &InteractionSeries, n: usize) -> Result<DeltaValue> {
    check_len(series, n)?;
    Ok(DeltaValue::from_excess(recurrence_table(series, n)[n]))
}

/// Δ_N as `Σ_J Q_J ∏ I_{k}` over the partitions of `n`.
pub fn delta_by_partitions(series: &InteractionSeries, n: usize) -> Result<DeltaValue> {
    check_len(series, n)?;
    let v = partitions_with_multiplicity(n)?
        .iter()
        .map(|t| {
            t.parts
                .iter()
                .fold(t.multiplicity as f64, |acc, &k| acc * series.i(k))
        })
        .sum();
    Ok(DeltaValue::from_value(v))
}

/// Δ_N as the sum over all `2^{N-1}` ordered compositions of `n`.
pub fn delta_by_compositions(series: &InteractionSeries, n: usize) -> Result<DeltaValue> {
    check_len(series, n)?;
    if n > MAX_COMPOSITION_N {
        return Err(Error::domain(format!(
            "composition enumeration limited to N <= {MAX_COMPOSITION_N}, got {n}"
        )));
    }
    // Bit b of the mask set means a cut after position b + 1.
    let mut total = 0.0;
    for mask in 0u32..(1u32 << (n - 1)) {
        let mut prod = 1.0;
        let mut run = 1;
        for b in 0..n - 1 {
            if mask & (1 << b) != 0 {
                prod *= series.i(run);
                run = 1;
            } else {
                run += 1;
            }
        }
        total += prod * series.i(run);
    }
    Ok(DeltaValue::from_value(total))
}

/// Δ of `n_ps` plasma-sheet cavities (`n_ps + 1` sheets).
///
/// Odd counts are `(n_ps + 1)/2` vacuum "dielectric" cavities. Even counts
/// `2m` prime the last factor of every composition of `m + 1`.
pub fn delta_plasma(series: &InteractionSeries, n_ps: usize) -> Result<DeltaValue> {
    if n_ps == 0 {
        return Err(Error::domain("plasma stack needs at least one cavity"));
    }
    if n_ps % 2 == 1 {
        return delta_dielectric(series, n_ps.div_ceil(2));
    }
    let m = n_ps / 2;
    check_len(series, m + 1)?;
    let d = recurrence_table(series, m);
    let coupled: f64 = (2..=m + 1)
        .map(|k| (1.0 + d[m + 1 - k]) * series.i_prime(k))
        .sum();
    Ok(DeltaValue::from_excess(d[m] + coupled))
}

/// Coefficients of the two interface types of a uniform stack and the
/// decays of its two region types, at one spectral point.
#[derive(Debug, Clone, Copy)]
pub struct StackCell {
    /// Interface from an outer region into a cavity.
    pub entry: CoefficientSet,
    /// Interface from a cavity into an outer region.
    pub exit: CoefficientSet,
    pub cavity_decay: Decay,
    pub link_decay: Decay,
}

impl StackCell {
    pub fn new(spec: &StackSpec, pol: Polarization, pt: &SpectralPoint) -> Result<Self> {
        let eps_in = spec.eps_inner.at(pt.zeta);
        let eps_out = spec.eps_outer.at(pt.zeta);
        let entry = rst(pol, eps_out, eps_in, spec.omega, pt)?;
        let exit = rst(pol, eps_in, eps_out, spec.omega, pt)?;
        Ok(Self {
            cavity_decay: Decay::new(spec.gap, entry.k_j),
            link_decay: Decay::new(spec.gap, exit.k_j),
            entry,
            exit,
        })
    }

    pub fn kernels(&self) -> CavityKernels {
        kernels_with_link(&self.entry, &self.exit, self.cavity_decay, self.link_decay)
    }

    /// log Δ of a stack with `n_interfaces` interfaces, by the chain.
    pub fn log_delta(&self, n_interfaces: usize) -> f64 {
        let mut st = ChainState::new(&self.entry);
        for m in 2..=n_interfaces {
            if m % 2 == 0 {
                st.push(self.cavity_decay, &self.exit);
            } else {
                st.push(self.link_decay, &self.entry);
            }
        }
        st.log_delta()
    }
}

/// Interaction series long enough for `spec`.
pub fn stack_series(
    spec: &StackSpec,
    pol: Polarization,
    pt: &SpectralPoint,
) -> Result<InteractionSeries> {
    let len = match spec.kind {
        StackKind::DielectricCavities => spec.n_cavities,
        StackKind::PlasmaSheetCavities => spec.n_cavities / 2 + 1,
    };
    interaction_series(&StackCell::new(spec, pol, pt)?.kernels(), len)
}

/// Δ of the whole stack from the interaction series (recurrence route).
pub fn delta_from_series(
    spec: &StackSpec,
    pol: Polarization,
    pt: &SpectralPoint,
) -> Result<DeltaValue> {
    let series = stack_series(spec, pol, pt)?;
    match spec.kind {
        StackKind::DielectricCavities => delta_dielectric(&series, spec.n_cavities),
        StackKind::PlasmaSheetCavities => delta_plasma(&series, spec.n_cavities),
    }
}

/// log Δ of the whole stack by the chain; the production path for energies.
pub fn log_delta(spec: &StackSpec, pol: Polarization, pt: &SpectralPoint) -> Result<f64> {
    Ok(StackCell::new(spec, pol, pt)?.log_delta(spec.n_interfaces()))
}

/// log Δ of an arbitrary layering by the chain.
pub fn log_delta_layering(
    layering: &Layering,
    pol: Polarization,
    pt: &SpectralPoint,
) -> Result<f64> {
    let m = layering.n_interfaces();
    if m == 0 {
        return Ok(0.0);
    }
    let eps = &layering.eps;
    let iface = |j: usize| rst(pol, eps[j - 1], eps[j], layering.omega[j - 1], pt);
    let mut st = ChainState::new(&iface(1)?);
    for j in 2..=m {
        let k = crate::coeffs::transverse_wavevector(eps[j - 1], pt);
        st.push(Decay::new(layering.thickness[j - 2], k), &iface(j)?);
    }
    Ok(st.log_delta())
}
