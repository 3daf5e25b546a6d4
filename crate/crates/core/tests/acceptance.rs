//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use casimir_stack::assembly::{delta_from_series, log_delta, partitions_with_multiplicity};
use casimir_stack::cli::{run, Command, ExpandConfig, Format, OutputConfig, RunConfig};
use casimir_stack::coeffs::{rst, Polarization};
use casimir_stack::energy::{casimir_energy, ratio_curve, QuadratureConfig, RatioPoint};
use casimir_stack::fitting::{
    fit_power_law, fit_ratio_asymptote, grid_fit_ratio_asymptote, PowerSample,
};
use casimir_stack::oracle::{equivalence_suite, regularized_delta};
use casimir_stack::phys::{SpectralPoint, StackSpec};
use casimir_stack::superconductor::{preset, EnergyMode, SuperconductorModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GAP: f64 = 2e-9;
const OMEGA: f64 = 49593.3;
const TEMPERATURE: f64 = 94.0;

const REFERENCE_RATIOS: [(usize, f64); 15] = [
    (1, 1.0000),
    (2, 1.0125),
    (3, 1.0181),
    (4, 1.0212),
    (5, 1.0232),
    (6, 1.0246),
    (7, 1.0256),
    (8, 1.0263),
    (9, 1.0269),
    (10, 1.0274),
    (11, 1.0278),
    (13, 1.0284),
    (15, 1.0288),
    (17, 1.0292),
    (19, 1.0294),
];

type Outcome = Result<String, String>;

fn base() -> StackSpec {
    StackSpec::plasma_sheets(1, GAP, OMEGA, TEMPERATURE).unwrap()
}

fn within(name: &str, value: f64, target: f64, tol: f64) -> Result<String, String> {
    let msg = format!("{name} = {value:.6} (target {target} +/- {tol})");
    if (value - target).abs() <= tol {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn collect(parts: Vec<Result<String, String>>) -> Outcome {
    let failed = parts.iter().any(Result::is_err);
    let text: Vec<String> = parts
        .into_iter()
        .map(|p| p.unwrap_or_else(|e| format!("{e} <- out of tolerance")))
        .collect();
    if failed {
        Err(text.join("; "))
    } else {
        Ok(text.join("; "))
    }
}

fn secs(d: Duration) -> String {
    format!("{:.1} s", d.as_secs_f64())
}

fn single_cavity_energy() -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| e.to_string())?;
    let start = Instant::now();
    let e = pool
        .install(|| casimir_energy(&base(), &QuadratureConfig::default()))
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let target = -1.97e-4;
    let rel = (e.e_per_area - target).abs() / target.abs();
    let msg = format!(
        "E1/A = {:.6e} J/m^2 (target {target:e} within 2%, off by {:.2}%), TM part {:.6e}, {} Matsubara terms, {} single-threaded (limit 60 s)",
        e.e_per_area,
        100.0 * rel,
        e.tm_part,
        e.l_used,
        secs(elapsed)
    );
    if rel <= 0.02 && elapsed < Duration::from_secs(60) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn table_reproduction(curve: &[RatioPoint], elapsed: Duration) -> Outcome {
    let mut worst: (f64, usize) = (0.0, 0);
    let mut worst_tm: (f64, usize) = (0.0, 0);
    for (p, &(n, reference)) in curve.iter().zip(&REFERENCE_RATIOS) {
        assert_eq!(p.n, n);
        let dev = (p.ratio - reference).abs();
        let dev_tm = (p.ratio_tm - reference).abs();
        if dev > worst.0 {
            worst = (dev, n);
        }
        if dev_tm > worst_tm.0 {
            worst_tm = (dev_tm, n);
        }
    }
    let msg = format!(
        "max |ratio - reference| = {:.2e} at N={} (TM only {:.2e} at N={}), tolerance 1e-3, {} rows in {} (limit 30 min)",
        worst.0,
        worst.1,
        worst_tm.0,
        worst_tm.1,
        curve.len(),
        secs(elapsed)
    );
    if worst.0 <= 1e-3 && worst_tm.0 <= 1e-3 && elapsed < Duration::from_secs(1800) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn asymptote_fit(curve: &[RatioPoint]) -> Outcome {
    let data: Vec<(f64, f64)> = curve.iter().map(|p| (p.n as f64, p.ratio)).collect();
    let fit = fit_ratio_asymptote(&data).map_err(|e| e.to_string())?;
    let grid = grid_fit_ratio_asymptote(&data).map_err(|e| e.to_string())?;
    let (a, b, p) = (
        fit.get("a").unwrap(),
        fit.get("b").unwrap(),
        fit.get("p").unwrap(),
    );
    let mut parts = vec![
        within("a", a, 1.034, 0.002),
        within("b", b, 0.034, 0.004),
        within("p", p, 0.71, 0.03),
    ];
    let agree =
        (grid.get("p").unwrap() - p).abs() < 1e-4 && (grid.get("a").unwrap() - a).abs() < 1e-6;
    let cross = format!(
        "grid-search p = {:.6}, rss = {:.2e}",
        grid.get("p").unwrap(),
        fit.rss
    );
    parts.push(if agree && fit.rss < 1e-5 {
        Ok(cross)
    } else {
        Err(cross)
    });
    collect(parts)
}

fn power_law_fit() -> Outcome {
    let start = Instant::now();
    let cfg = QuadratureConfig::default();
    let mut samples = Vec::new();
    for n in [10, 19] {
        for d in [1e-9, 2e-9, 5e-9, 1e-8] {
            for omega in [1e4, 1e5, 1e6] {
                let spec = base().with_cavities(n).with_gap(d).with_omega(omega);
                let e = casimir_energy(&spec, &cfg).map_err(|e| e.to_string())?;
                samples.push(PowerSample {
                    n,
                    d,
                    omega,
                    energy: e.e_per_area,
                });
            }
        }
    }
    let fit = fit_power_law(&samples).map_err(|e| e.to_string())?;
    let k = fit.get("K").unwrap();
    let mut parts = vec![
        within("alpha", fit.get("alpha").unwrap(), 0.4998, 0.002),
        within("beta", fit.get("beta").unwrap(), 2.4998, 0.004),
    ];
    let kmsg = format!("K = {k:.5e} (target 5.0e-3 +/- 2%)");
    parts.push(if (k - 5.0e-3).abs() <= 0.02 * 5.0e-3 {
        Ok(kmsg)
    } else {
        Err(kmsg)
    });
    parts.push(Ok(format!(
        "{} samples N in {{10, 19}}, d in [1, 10] nm, omega in [1e4, 1e6] 1/m, {}",
        samples.len(),
        secs(start.elapsed())
    )));
    collect(parts)
}

/// Closed-form energies recomputed here from the bare parameters.
fn hand_energies(m: &SuperconductorModel, t_below: f64, t_above: f64) -> (f64, f64) {
    let pref = 1.63e-28;
    let e_sc = -pref
        * (m.delta / (2.0 * m.d.powi(5))).sqrt()
        * (1.0 - (t_below / m.t_c).powf(4.0 / 3.0)).sqrt()
        / m.lambda_0;
    let mu0 = 1.256_637_061_27e-6;
    let n2d = m.delta * m.n_3d_ref * t_above / m.t_ref;
    let omega_n = mu0 * n2d * m.q_star * m.q_star / (2.0 * m.m_star);
    (e_sc, -pref * (omega_n / m.d.powi(5)).sqrt())
}

fn ybco_numbers() -> Outcome {
    let q = QuadratureConfig::default();
    let mut parts = Vec::new();
    // Reference values and half a unit of their last quoted digit.
    let cases = [
        (
            "harshman",
            [(-0.001616, 5e-7), (-0.001365, 5e-7), (0.000251, 5e-7)],
        ),
        (
            "archimedes",
            [(-0.002258, 5e-7), (-0.001343, 5e-7), (0.0009142, 5e-8)],
        ),
    ];
    for (name, reference) in cases {
        let p = preset(name).map_err(|e| e.to_string())?;
        let t = p
            .transition_energies(EnergyMode::ClosedForm, &q)
            .map_err(|e| e.to_string())?;
        let (hand_sc, hand_n) = hand_energies(&p.model, p.t_below, p.t_above);
        if (hand_sc - t.e_sc).abs() > 1e-12 * hand_sc.abs()
            || (hand_n - t.e_n).abs() > 1e-9 * hand_n.abs()
        {
            parts.push(Err(format!(
                "{name}: library {} / {} vs hand {hand_sc} / {hand_n}",
                t.e_sc, t.e_n
            )));
        }
        for ((label, value), (want, tol)) in [("E_sc", t.e_sc), ("E_n", t.e_n), ("dE", t.delta_e)]
            .into_iter()
            .zip(reference)
        {
            let msg = format!("{name} {label} = {value:.7e} (reference {want})");
            parts.push(if (value - want).abs() <= tol {
                Ok(msg)
            } else {
                Err(msg)
            });
        }
        if name == "archimedes" {
            parts.push(within("archimedes eta", t.eta, 0.7, 0.05));
        }
    }
    collect(parts)
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let r = equivalence_suite(2000, 20_261_016).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let msg = format!(
        "{} draws ({} dielectric N<=5, {} plasma N<=8 of which {} even, {} at l=0): recurrence max rel dev {:.2e}; \
         series, partition and composition sums max rel dev {:.2e} over the {} draws with condition <= 1e2; {}",
        r.draws,
        r.dielectric_draws,
        r.plasma_draws,
        r.even_plasma_draws,
        r.zero_mode_draws,
        r.max_rel_recurrence,
        r.max_rel_series,
        r.series_draws,
        secs(elapsed)
    );
    let ok = r.draws >= 1000
        && r.even_plasma_draws > 0
        && r.max_rel_recurrence < 1e-10
        && r.max_rel_series < 1e-10
        && elapsed < Duration::from_secs(300);
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn monomials(rhs: &str) -> BTreeMap<String, u64> {
    rhs.split(" + ")
        .map(|term| match term.split_once(' ') {
            Some((c, rest)) if c.chars().all(|ch| ch.is_ascii_digit()) => {
                (rest.to_string(), c.parse().unwrap())
            }
            _ => (term.to_string(), 1),
        })
        .map(|(mono, c)| {
            let mut f: Vec<&str> = mono.split(' ').collect();
            f.sort();
            (f.join(" "), c)
        })
        .collect()
}

fn symbolic_golden() -> Outcome {
    let golden = include_str!("data/delta_expansions.txt");
    let mut parts = Vec::new();
    for line in golden.lines() {
        let (lhs, rhs) = line.split_once(" = ").unwrap();
        let n: usize = lhs.trim_start_matches("Delta").parse().unwrap();
        let cfg = RunConfig {
            command: Some(Command::ExpandDelta),
            expand: ExpandConfig { n },
            output: OutputConfig {
                path: None,
                format: Some(Format::Pretty),
            },
            ..RunConfig::default()
        };
        let out = run(&cfg).map_err(|e| e.to_string())?;
        let ours = out.trim_end().split_once(" = ").unwrap().1.to_string();
        let same_terms = monomials(&ours) == monomials(rhs);
        let msg = format!("N={n}: {} terms", monomials(rhs).len());
        parts.push(if same_terms { Ok(msg) } else { Err(msg) });
    }
    let mut sums_ok = true;
    for n in 1..=20 {
        let total: u64 = partitions_with_multiplicity(n)
            .unwrap()
            .iter()
            .map(|t| t.multiplicity)
            .sum();
        sums_ok &= total == 1u64 << (n - 1);
    }
    let msg = "sum of multiplicities = 2^(N-1) for N = 1..20".to_string();
    parts.push(if sums_ok { Ok(msg) } else { Err(msg) });
    collect(parts)
}

fn coefficient_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let draws = 20_000;
    let mut failures = Vec::new();
    let log_uniform = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| 10f64.powf(rng.random_range(lo..hi));
    let mut worst_swap: f64 = 0.0;
    for i in 0..draws {
        let pol = if i % 2 == 0 {
            Polarization::TM
        } else {
            Polarization::TE
        };
        let eps_i = rng.random_range(1.0..100.0);
        let eps_j = rng.random_range(1.0..100.0);
        let omega = log_uniform(&mut rng, -2.0, 8.0);
        let pt = SpectralPoint::at_frequency(
            log_uniform(&mut rng, 1.0, 12.0),
            log_uniform(&mut rng, 1.0, 12.0),
        )
        .unwrap();
        let c = rst(pol, eps_i, eps_j, omega, &pt).unwrap();
        let sw = rst(pol, eps_j, eps_i, omega, &pt).unwrap();
        if !(c.r.abs() < 1.0 && c.s.abs() < 1.0 && c.t.abs() < 1.0) {
            failures.push(format!("bound {pol} {c:?}"));
        }
        let swap = ((sw.r + c.s).abs() / c.s.abs().max(f64::MIN_POSITIVE))
            .max((sw.t - c.t).abs() / c.t.abs().max(f64::MIN_POSITIVE));
        worst_swap = worst_swap.max(swap);
        let vac = rst(pol, 1.0, 1.0, 0.0, &pt).unwrap();
        if (vac.r, vac.s, vac.t) != (0.0, 0.0, 1.0) {
            failures.push(format!("transparency {pol} {vac:?}"));
        }
        // Zero mode: exact limit at l = 0 and quadratic approach at small ζ.
        let k = log_uniform(&mut rng, -1.0, 1.0) * omega.max(1.0);
        let zero = rst(
            Polarization::TM,
            1.0,
            1.0,
            omega,
            &SpectralPoint::new(0, 0.0, k).unwrap(),
        )
        .unwrap();
        if (zero.r, zero.s, zero.t) != (-1.0, 1.0, -1.0) {
            failures.push(format!("zero mode {zero:?}"));
        }
        let errs: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|f| {
                let z = f * (omega * k).sqrt() * 1e-1;
                let c = rst(
                    Polarization::TM,
                    1.0,
                    1.0,
                    omega,
                    &SpectralPoint::at_frequency(z, k).unwrap(),
                )
                .unwrap();
                (c.r + 1.0)
                    .abs()
                    .max((c.s - 1.0).abs())
                    .max((c.t + 1.0).abs())
            })
            .collect();
        if !(errs[0] > errs[1] && errs[1] > errs[2] && (errs[2] / errs[1] - 1e-2).abs() < 2e-3) {
            failures.push(format!("zero-mode approach {errs:?}"));
        }
    }
    let msg = format!(
        "{draws} random draws: bounds, transparency and zero-mode limits hold, swap symmetry worst rel {worst_swap:.1e} (limit 1e-14)"
    );
    if failures.is_empty() && worst_swap <= 1e-14 {
        Ok(msg)
    } else {
        Err(format!(
            "{msg}; {} failures, first: {}",
            failures.len(),
            failures.first().cloned().unwrap_or_default()
        ))
    }
}

fn regularization() -> Outcome {
    let cfg = QuadratureConfig::default();
    let mut worst: f64 = 0.0;
    for n in [1, 2, 3, 5, 10, 19] {
        let e = casimir_energy(&base().with_cavities(n).with_gap(1e-6), &cfg)
            .map_err(|e| e.to_string())?;
        worst = worst.max(e.e_per_area.abs());
    }
    let mut exact_zero = true;
    let mut shrinking = true;
    let pt = SpectralPoint::at_frequency(3e5, 1e8).unwrap();
    for pol in Polarization::BOTH {
        for n in 1..=12 {
            let bare = base().with_cavities(n).with_omega(0.0);
            exact_zero &= log_delta(&bare, pol, &pt).unwrap() == 0.0;
            exact_zero &= delta_from_series(&bare, pol, &pt).unwrap().log_value == 0.0;
            exact_zero &= regularized_delta(&bare, pol, &pt, n)
                .unwrap()
                .log_value
                .abs()
                < 1e-14;
            let mut prev = f64::INFINITY;
            for omega in [1e4, 1e2, 1e0, 1e-2, 1e-4] {
                let l = log_delta(&base().with_cavities(n).with_omega(omega), pol, &pt)
                    .unwrap()
                    .abs();
                shrinking &= l < prev;
                prev = l;
            }
        }
    }
    let msg = format!(
        "max |E/A| at d = 1 um over N in {{1,2,3,5,10,19}} = {worst:.2e} J/m^2 (limit 1e-9); log Delta = 0 at zero coupling: {exact_zero}; |log Delta| decreasing as omega -> 0: {shrinking}"
    );
    if worst < 1e-9 && exact_zero && shrinking {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn report(id: usize, title: &str, outcome: &Outcome) -> bool {
    match outcome {
        Ok(detail) => {
            println!("PASS criterion {id} ({title}): {detail}");
            true
        }
        Err(detail) => {
            println!("FAIL criterion {id} ({title}): {detail}");
            false
        }
    }
}

fn main() -> ExitCode {
    let mut ok = true;
    ok &= report(1, "single-cavity energy", &single_cavity_energy());

    let start = Instant::now();
    let rows: Vec<usize> = REFERENCE_RATIOS.iter().map(|r| r.0).collect();
    let curve = ratio_curve(&base(), &rows, &QuadratureConfig::default());
    let elapsed = start.elapsed();
    match curve {
        Ok(curve) => {
            ok &= report(2, "ratio table", &table_reproduction(&curve, elapsed));
            ok &= report(3, "asymptote fit", &asymptote_fit(&curve));
        }
        Err(e) => {
            ok &= report(2, "ratio table", &Err(e.to_string()));
            ok &= report(3, "asymptote fit", &Err("no ratio data".into()));
        }
    }
    ok &= report(4, "power-law fit", &power_law_fit());
    ok &= report(5, "superconductor transition", &ybco_numbers());
    ok &= report(6, "determinant equivalence", &oracle_equivalence());
    ok &= report(7, "symbolic expansions", &symbolic_golden());
    ok &= report(8, "coefficient invariants", &coefficient_invariants());
    ok &= report(9, "regularization", &regularization());
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
