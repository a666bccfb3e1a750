use std::f64::consts::FRAC_PI_4;

use qtraj_core::{
    barrier_delay, nonrelativistic_delay, Error, MicrostateConstants, Mode, PhysicalParams,
    RectangularBarrier, Regime,
};

fn minus_one() -> MicrostateConstants {
    MicrostateConstants::new(-1.0, 0.0).unwrap()
}

/// Barrier of height 0.4 probed at E = 1, so ε = 0.6 and κ = 0.8.
fn report(xi: f64) -> qtraj_core::TunnelingReport {
    let barrier = RectangularBarrier::new(0.4, xi / 0.8).unwrap();
    barrier_delay(&PhysicalParams::natural(), &barrier, 1.0, &minus_one()).unwrap()
}

#[test]
fn thick_barrier_saturates() {
    let thick = 0.9375 * FRAC_PI_4;
    let r = report(10.0);
    assert_eq!(r.regime, Regime::Thick);
    assert!((r.t_thick - thick).abs() < 1e-15);
    assert!((r.t_exact - thick).abs() <= 0.01 * thick);
    let r = report(40.0);
    assert!((r.t_exact - thick).abs() <= 1e-6);
}

#[test]
fn thin_barrier_slope() {
    let xi = 1e-4;
    let r = report(xi);
    assert_eq!(r.regime, Regime::Thin);
    let slope = r.t_exact / r.q;
    assert!((slope - 0.75).abs() <= 0.75e-3);
    assert!((r.t_exact - r.t_thin).abs() <= 1e-3 * r.t_exact);
    assert!((r.t_thin - 0.75 * r.q).abs() < 1e-18);
}

#[test]
fn exact_delay_matches_quadrature_and_is_monotone() {
    let mut prev = 0.0;
    for i in 1..=60 {
        let xi = 0.05 * i as f64 * i as f64 / 10.0;
        let r = report(xi);
        assert!(
            (r.t_quadrature - r.t_exact).abs() <= 1e-8 * r.t_exact,
            "xi {xi}"
        );
        assert!(r.t_exact > prev);
        assert!(r.t_exact < r.t_thick);
        prev = r.t_exact;
    }
}

#[test]
fn negative_epsilon_uses_positive_a() {
    let p = PhysicalParams::natural();
    let barrier = RectangularBarrier::new(1.0, 2.0).unwrap();
    let plus = MicrostateConstants::new(1.5, -0.3).unwrap();
    let r = barrier_delay(&p, &barrier, 0.4, &plus).unwrap();
    assert!(r.epsilon < 0.0 && r.t_exact > 0.0);
    assert!((r.t_quadrature - r.t_exact).abs() <= 1e-8 * r.t_exact);
    assert!(matches!(
        barrier_delay(&p, &barrier, 0.4, &minus_one()),
        Err(Error::SignConventionViolated { .. })
    ));
}

#[test]
fn nonrelativistic_comparison_converges() {
    let barrier = RectangularBarrier::new(0.5, 30.0).unwrap();
    let mut gaps = Vec::new();
    for c in [10.0, 100.0, 1000.0] {
        let p = PhysicalParams::new(1.0, c, 1.0, Mode::Relativistic).unwrap();
        let cmp = nonrelativistic_delay(&p, &barrier, 0.0, &minus_one()).unwrap();
        let rel = cmp.relativistic.t_thick;
        let nr = cmp.nonrelativistic.t_thick;
        gaps.push(((rel - nr) / nr).abs());
        assert_eq!(cmp.nonrelativistic.regime, Regime::Thick);
    }
    assert!(gaps[1] < 1e-3);
    for w in gaps.windows(2) {
        let slope = (w[1] / w[0]).log10();
        assert!((slope + 2.0).abs() < 0.1, "slope {slope}");
    }
    let p = PhysicalParams::new(1.0, 100.0, 1.0, Mode::Relativistic).unwrap();
    assert_eq!(
        nonrelativistic_delay(&p, &barrier, 0.5, &minus_one()),
        Err(Error::NotEvanescent)
    );
}
