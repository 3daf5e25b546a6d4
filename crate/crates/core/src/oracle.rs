//! Reference values of Δ from the boundary-condition matrix of the stack.
//!
//! Each region carries two field amplitudes (one in the outer half-spaces)
//! and each interface contributes two matching rows, so a stack with `M`
//! interfaces gives a `2M × 2M` system. Interior regions use the basis
//! `cosh(K(z - z_mid))`, `sinh(K(z - z_mid))` multiplied by `e^{-Kd/2}`, which
//! keeps every entry bounded. Δ is the determinant divided by the one
//! obtained with every `e^{-Kd}` set to zero, i.e. all layers infinitely
//! thick. Determinants are evaluated by LU with partial pivoting after row
//! equilibration, in log form.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::assembly::{
    delta_by_compositions, delta_by_partitions, delta_dielectric, delta_plasma, log_delta,
    stack_series, DeltaValue,
};
use crate::coeffs::{transverse_wavevector, InteractionSeries, Polarization};
use crate::error::{Error, Result};
use crate::phys::{Layering, Permittivity, SpectralPoint, StackKind, StackSpec};

/// Dense row-major square matrix pair: the coupled system and its
/// decoupled reference.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMatrix {
    pub dim: usize,
    pub entries: Vec<f64>,
    pub decoupled: Vec<f64>,
    /// Log of the factors divided out of the rows of both matrices.
    pub scale_log: f64,
}

/// Value and derivative of the basis functions of one region at one edge.
type Edge = [(f64, f64); 2];

struct Region {
    k: f64,
    /// `e^{-Kd}` of an interior region.
    half_decay: f64,
    /// `1 - e^{-Kd}`.
    half_complement: f64,
}

impl Region {
    /// Basis values at the left (`right = false`) or right edge.
    fn edge(&self, right: bool, coupled: bool) -> Edge {
        let (e, u) = if coupled {
            (self.half_decay, self.half_complement)
        } else {
            (0.0, 1.0)
        };
        let c = 0.5 * (1.0 + e);
        let s = 0.5 * u;
        let sign = if right { 1.0 } else { -1.0 };
        [(c, sign * self.k * s), (sign * s, self.k * c)]
    }
}

fn check_layering(layering: &Layering) -> Result<()> {
    let m = layering.n_interfaces();
    if m == 0 || layering.eps.len() != m + 1 || layering.thickness.len() + 1 != m {
        return Err(Error::domain("inconsistent layering dimensions"));
    }
    if layering.thickness.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::domain("layer thicknesses must be > 0"));
    }
    Ok(())
}

/// Boundary matrix of an explicit layering.
pub fn build_layering_matrix(
    layering: &Layering,
    pol: Polarization,
    pt: &SpectralPoint,
) -> Result<BoundaryMatrix> {
    check_layering(layering)?;
    let m = layering.n_interfaces();
    let dim = 2 * m;
    let regions: Vec<Region> = (0..=m)
        .map(|j| {
            let k = transverse_wavevector(layering.eps[j], pt);
            let d = if j == 0 || j == m {
                f64::INFINITY
            } else {
                layering.thickness[j - 1]
            };
            Region {
                k,
                half_decay: (-k * d).exp(),
                half_complement: -(-k * d).exp_m1(),
            }
        })
        .collect();

    let mut bm = BoundaryMatrix {
        dim,
        entries: vec![0.0; dim * dim],
        decoupled: vec![0.0; dim * dim],
        scale_log: 0.0,
    };
    for (coupled, target) in [(true, 0usize), (false, 1usize)] {
        for iface in 1..=m {
            let (left, right) = (iface - 1, iface);
            // Columns and edge data of the two adjacent regions.
            let left_cols: Vec<(usize, (f64, f64))> = if left == 0 {
                vec![(0, (1.0, regions[0].k))]
            } else {
                let ed = regions[left].edge(true, coupled);
                vec![(2 * left - 1, ed[0]), (2 * left, ed[1])]
            };
            let right_cols: Vec<(usize, (f64, f64))> = if right == m {
                vec![(dim - 1, (1.0, -regions[m].k))]
            } else {
                let ed = regions[right].edge(false, coupled);
                vec![(2 * right - 1, ed[0]), (2 * right, ed[1])]
            };
            let omega = layering.omega[iface - 1];
            let (eps_l, eps_r) = (layering.eps[left], layering.eps[right]);
            let z = if omega > 0.0 { pt.zeta * pt.zeta } else { 1.0 };
            let ra = 2 * (iface - 1);
            let rb = ra + 1;
            let mat = if target == 0 {
                &mut bm.entries
            } else {
                &mut bm.decoupled
            };
            for &(col, (val, der)) in &right_cols {
                let (a, b) = match pol {
                    Polarization::TM => (z * eps_r * val - 2.0 * omega * der, der),
                    Polarization::TE => (val, der - 2.0 * omega * val),
                };
                mat[ra * dim + col] = a;
                mat[rb * dim + col] = b;
            }
            for &(col, (val, der)) in &left_cols {
                let (a, b) = match pol {
                    Polarization::TM => (-z * eps_l * val, -der),
                    Polarization::TE => (-val, -der),
                };
                mat[ra * dim + col] = a;
                mat[rb * dim + col] = b;
            }
        }
    }
    // Divide each row pair by a common scale so the entries are O(1).
    for r in 0..dim {
        let row = &bm.entries[r * dim..(r + 1) * dim];
        let s = row
            .iter()
            .chain(&bm.decoupled[r * dim..(r + 1) * dim])
            .fold(0.0f64, |a, x| a.max(x.abs()));
        if s > 0.0 {
            bm.scale_row(r, 1.0 / s);
            bm.scale_log += s.ln();
        }
    }
    Ok(bm)
}

/// Boundary matrix of the whole stack described by `spec`.
pub fn build_matrix(
    spec: &StackSpec,
    pol: Polarization,
    pt: &SpectralPoint,
) -> Result<BoundaryMatrix> {
    spec.validate()?;
    build_layering_matrix(&spec.layering(pt.zeta), pol, pt)
}

impl BoundaryMatrix {
    /// Multiply row `r` of both matrices by `c`.
    pub fn scale_row(&mut self, r: usize, c: f64) {
        let n = self.dim;
        for x in &mut self.entries[r * n..(r + 1) * n] {
            *x *= c;
        }
        for x in &mut self.decoupled[r * n..(r + 1) * n] {
            *x *= c;
        }
    }

    /// `det(entries) / det(decoupled)`.
    pub fn regularized(&self) -> Result<DeltaValue> {
        let (s0, l0) = log_det(self.decoupled.clone(), self.dim);
        if s0 == 0.0 || !l0.is_finite() {
            return Err(Error::SingularNormalization(format!(
                "decoupled {0}x{0} determinant vanishes",
                self.dim
            )));
        }
        let (s, l) = log_det(self.entries.clone(), self.dim);
        let log_value = l - l0;
        let sign = s * s0;
        Ok(DeltaValue {
            value: sign * log_value.exp(),
            log_value: if sign > 0.0 { log_value } else { f64::NAN },
        })
    }
}

/// Regularized Δ of the first `n` cavities of `spec`.
pub fn regularized_delta(
    spec: &StackSpec,
    pol: Polarization,
    pt: &SpectralPoint,
    n: usize,
) -> Result<DeltaValue> {
    if n == 0 || n > spec.n_cavities {
        return Err(Error::domain(format!(
            "requested {n} cavities from a stack of {}",
            spec.n_cavities
        )));
    }
    let interfaces = match spec.kind {
        StackKind::DielectricCavities => 2 * n,
        StackKind::PlasmaSheetCavities => n + 1,
    };
    build_layering_matrix(&spec.layering(pt.zeta).truncated(interfaces), pol, pt)?.regularized()
}

/// Sign and log-magnitude of the determinant of a row-major `n × n` matrix.
/// A singular matrix gives sign 0 and `-inf`.
pub fn log_det(mut a: Vec<f64>, n: usize) -> (f64, f64) {
    let mut sign = 1.0;
    let mut log_abs = 0.0;
    for col in 0..n {
        let (piv, pmax) =
            (col..n)
                .map(|r| (r, a[r * n + col].abs()))
                .fold(
                    (col, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        if pmax == 0.0 {
            return (0.0, f64::NEG_INFINITY);
        }
        if piv != col {
            for j in 0..n {
                a.swap(piv * n + j, col * n + j);
            }
            sign = -sign;
        }
        let p = a[col * n + col];
        if p < 0.0 {
            sign = -sign;
        }
        log_abs += p.abs().ln();
        for r in col + 1..n {
            let factor = a[r * n + col] / p;
            if factor != 0.0 {
                for j in col + 1..n {
                    a[r * n + j] -= factor * a[col * n + j];
                }
            }
        }
    }
    (sign, log_abs)
}

/// The boundary matrix in the plain exponential basis `e^{∓K z}` with the
/// first interface at `z = 0`, without any rescaling. Interior regions use
/// the column order `(e^{-Kz}, e^{+Kz})`, so the leading `2m × 2m` block is
/// the matrix of the first `m` interfaces. Entries overflow for large `K z`;
/// intended for small test configurations.
pub fn exponential_matrix(
    layering: &Layering,
    pol: Polarization,
    pt: &SpectralPoint,
) -> Result<Vec<Vec<f64>>> {
    check_layering(layering)?;
    let m = layering.n_interfaces();
    let dim = 2 * m;
    let mut x = vec![0.0; m];
    for i in 1..m {
        x[i] = x[i - 1] + layering.thickness[i - 1];
    }
    let k: Vec<f64> = layering
        .eps
        .iter()
        .map(|&e| transverse_wavevector(e, pt))
        .collect();
    let mut mat = vec![vec![0.0; dim]; dim];
    for iface in 1..=m {
        let z0 = x[iface - 1];
        let (left, right) = (iface - 1, iface);
        let funcs = |j: usize| -> Vec<(usize, f64, f64)> {
            let kk = k[j];
            let dec = (-kk * z0).exp();
            let gro = (kk * z0).exp();
            if j == 0 {
                vec![(0, gro, kk * gro)]
            } else if j == m {
                vec![(dim - 1, dec, -kk * dec)]
            } else {
                vec![(2 * j - 1, dec, -kk * dec), (2 * j, gro, kk * gro)]
            }
        };
        let omega = layering.omega[iface - 1];
        let z = if omega > 0.0 { pt.zeta * pt.zeta } else { 1.0 };
        let (ra, rb) = (2 * (iface - 1), 2 * (iface - 1) + 1);
        for (col, val, der) in funcs(right) {
            let (a, b) = match pol {
                Polarization::TM => (z * layering.eps[right] * val - 2.0 * omega * der, der),
                Polarization::TE => (val, der - 2.0 * omega * val),
            };
            mat[ra][col] = a;
            mat[rb][col] = b;
        }
        for (col, val, der) in funcs(left) {
            let (a, b) = match pol {
                Polarization::TM => (-z * layering.eps[left] * val, -der),
                Polarization::TE => (-val, -der),
            };
            mat[ra][col] = a;
            mat[rb][col] = b;
        }
    }
    Ok(mat)
}

/// Draws whose polynomial routes are compared: `Σ|monomials| / |Δ|` must
/// stay below this bound, since cancellation between monomials costs that
/// factor in relative accuracy.
pub const MAX_SERIES_CONDITION: f64 = 1e2;

/// Outcome of [`equivalence_suite`]. Relative deviations are measured
/// against the regularized determinant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub draws: usize,
    pub seed: u64,
    pub dielectric_draws: usize,
    pub plasma_draws: usize,
    pub even_plasma_draws: usize,
    pub zero_mode_draws: usize,
    /// Largest deviation of the layer-by-layer recurrence used for energies.
    pub max_rel_recurrence: f64,
    /// Largest deviation of the interaction-series recurrence, partition sum
    /// and composition sum over the well-conditioned draws.
    pub max_rel_series: f64,
    pub series_draws: usize,
    pub worst_recurrence: String,
    pub worst_series: String,
}

fn rel_dev(a: f64, reference: f64) -> f64 {
    if a == reference {
        0.0
    } else {
        (a - reference).abs() / reference.abs()
    }
}

/// Compare every Δ route with the boundary determinant over `draws` random
/// stacks and spectral points: dielectric stacks with `N ≤ 5`, plasma-sheet
/// stacks with `1 ≤ N ≤ 8`, both polarizations, one draw in ten at `l = 0`.
pub fn equivalence_suite(draws: usize, seed: u64) -> Result<EquivalenceReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = EquivalenceReport {
        draws,
        seed,
        dielectric_draws: 0,
        plasma_draws: 0,
        even_plasma_draws: 0,
        zero_mode_draws: 0,
        max_rel_recurrence: 0.0,
        max_rel_series: 0.0,
        series_draws: 0,
        worst_recurrence: String::new(),
        worst_series: String::new(),
    };
    let log_uniform = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| 10f64.powf(rng.random_range(lo..hi));
    for it in 0..draws {
        let d = rng.random_range(0.5e-9..10e-9);
        let omega = log_uniform(&mut rng, 3.0, 6.0);
        let k = log_uniform(&mut rng, 5.0, 11.0);
        let pt = if it % 10 == 9 {
            rep.zero_mode_draws += 1;
            SpectralPoint::new(0, 0.0, k)?
        } else {
            SpectralPoint::new(1, log_uniform(&mut rng, 5.0, 11.0), k)?
        };
        let pol = if it % 2 == 0 {
            Polarization::TM
        } else {
            Polarization::TE
        };
        let spec = if it % 3 == 0 {
            rep.dielectric_draws += 1;
            let n = rng.random_range(1..=5);
            let eps = rng.random_range(1.5..10.0);
            StackSpec::dielectric(
                n,
                d,
                Permittivity::Vacuum,
                Permittivity::Constant(eps),
                300.0,
            )?
            .with_omega(omega)
        } else {
            rep.plasma_draws += 1;
            let n = rng.random_range(1..=8);
            if n % 2 == 0 {
                rep.even_plasma_draws += 1;
            }
            StackSpec::plasma_sheets(n, d, omega, 94.0)?
        };
        let describe = || {
            format!(
                "{:?} N={} {pol} d={d:.3e} omega={omega:.3e} zeta={:.3e} k={k:.3e}",
                spec.kind, spec.n_cavities, pt.zeta
            )
        };
        let reference = regularized_delta(&spec, pol, &pt, spec.n_cavities)?.value;
        let chain = rel_dev(log_delta(&spec, pol, &pt)?.exp(), reference);
        if !(chain <= rep.max_rel_recurrence) {
            rep.max_rel_recurrence = chain;
            rep.worst_recurrence = describe();
        }

        let series = stack_series(&spec, pol, &pt)?;
        let abs_series = InteractionSeries::from_terms(
            series.terms.iter().map(|x| x.abs()).collect(),
            series.primed_terms.iter().map(|x| x.abs()).collect(),
        );
        let n = spec.n_cavities;
        let (routes, bound) = match spec.kind {
            StackKind::DielectricCavities => (
                vec![
                    delta_dielectric(&series, n)?.value,
                    delta_by_partitions(&series, n)?.value,
                    delta_by_compositions(&series, n)?.value,
                ],
                delta_dielectric(&abs_series, n)?.value,
            ),
            StackKind::PlasmaSheetCavities => (
                vec![delta_plasma(&series, n)?.value],
                delta_plasma(&abs_series, n)?.value,
            ),
        };
        if bound <= MAX_SERIES_CONDITION * reference.abs() {
            rep.series_draws += 1;
            for v in routes {
                let dev = rel_dev(v, reference);
                if !(dev <= rep.max_rel_series) {
                    rep.max_rel_series = dev;
                    rep.worst_series = describe();
                }
            }
        }
    }
    Ok(rep)
}
