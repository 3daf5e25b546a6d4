use casimir_stack::energy::{casimir_energy, ratio_curve, QuadratureConfig};
use casimir_stack::fitting::closed_form_energy;
use casimir_stack::phys::StackSpec;
use casimir_stack::superconductor::{preset, EnergyMode};

const OMEGA: f64 = 49593.3;

fn base() -> StackSpec {
    StackSpec::plasma_sheets(1, 2e-9, OMEGA, 94.0).unwrap()
}

fn energy(spec: &StackSpec) -> f64 {
    casimir_energy(spec, &QuadratureConfig::default())
        .unwrap()
        .e_per_area
}

#[test]
fn ratio_grows_and_stays_below_asymptote() {
    let curve = ratio_curve(&base(), &[1, 2, 3, 4, 5, 6], &QuadratureConfig::default()).unwrap();
    assert_eq!(curve[0].ratio, 1.0);
    for w in curve.windows(2) {
        assert!(w[1].ratio > w[0].ratio && w[1].ratio_tm > w[0].ratio_tm);
    }
    for p in &curve {
        assert!(p.energy.e_per_area < 0.0 && p.ratio < 1.04);
    }
}

#[test]
fn doubling_the_node_budget_is_stable() {
    let cfg = QuadratureConfig::default();
    let spec = base().with_cavities(3);
    let a = casimir_energy(&spec, &cfg).unwrap();
    let b = casimir_energy(
        &spec,
        &QuadratureConfig {
            max_nodes: 2 * cfg.max_nodes,
            ..cfg
        },
    )
    .unwrap();
    assert!((a.e_per_area - b.e_per_area).abs() < cfg.rel_tol * a.e_per_area.abs());
    assert!(a.tail.abs() < cfg.matsubara_rel_tail * a.e_per_area.abs());
    assert!(a.est_error < 1e-6 * a.e_per_area.abs());
}

#[test]
fn tighter_tolerances_agree() {
    let cfg = QuadratureConfig::default();
    let fine = QuadratureConfig {
        rel_tol: 1e-10,
        matsubara_rel_tail: 1e-12,
        ..cfg
    };
    let spec = base().with_cavities(2);
    let a = casimir_energy(&spec, &cfg).unwrap().e_per_area;
    let b = casimir_energy(&spec, &fine).unwrap().e_per_area;
    assert!((a - b).abs() < 1e-7 * b.abs(), "{a} {b}");
}

#[test]
fn scaling_with_gap_and_plasma_parameter() {
    let b = base();
    let slope = |x0: f64, x1: f64, e0: f64, e1: f64| (e1 / e0).ln() / (x1 / x0).ln();
    let (d0, d1) = (1e-9, 1e-8);
    let (e_d0, e_d1) = (energy(&b.with_gap(d0)), energy(&b.with_gap(d1)));
    assert!((slope(d0, d1, e_d0, e_d1) + 2.5).abs() < 0.01);
    let (w0, w1) = (1e4, 1e6);
    let (e_w0, e_w1) = (energy(&b.with_omega(w0)), energy(&b.with_omega(w1)));
    assert!((slope(w0, w1, e_w0, e_w1) - 0.5).abs() < 0.01);

    for (spec, e) in [
        (b.with_gap(d0), e_d0),
        (b.with_gap(d1), e_d1),
        (b.with_omega(w0), e_w0),
        (b.with_omega(w1), e_w1),
        (b.with_gap(5e-9), energy(&b.with_gap(5e-9))),
        (b.clone(), energy(&b)),
    ] {
        let cf = closed_form_energy(1, spec.gap, spec.omega).unwrap();
        assert!(
            (cf - e).abs() < 0.05 * e.abs(),
            "d={} omega={}: {e} vs {cf}",
            spec.gap,
            spec.omega
        );
    }
}

#[test]
fn distant_sheets_carry_no_energy() {
    for n in [1, 4, 9] {
        let e = energy(&base().with_cavities(n).with_gap(1e-6));
        assert!(e.abs() < 1e-9, "N={n}: {e}");
    }
}

#[test]
fn superconducting_closed_form_tracks_exact_energy() {
    let p = preset("harshman").unwrap();
    let q = QuadratureConfig::default();
    let cf = p.transition_energies(EnergyMode::ClosedForm, &q).unwrap();
    let ex = p.transition_energies(EnergyMode::Exact, &q).unwrap();
    assert!(
        (cf.e_sc - ex.e_sc).abs() < 0.05 * ex.e_sc.abs(),
        "{} vs {}",
        cf.e_sc,
        ex.e_sc
    );
    assert!(
        (cf.e_n - ex.e_n).abs() < 0.05 * ex.e_n.abs(),
        "{} vs {}",
        cf.e_n,
        ex.e_n
    );
}
