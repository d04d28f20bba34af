mod common;

use common::oracle_gamma;
use fracdiff::problems::{example1, example2, registry_lookup, ProblemParams};

/// ∫₀¹ 24 t^{4-α} dα by composite Simpson, independent of the closed form.
fn memory_term(t: f64) -> f64 {
    let n = 2000;
    let h = 1.0 / n as f64;
    let g = |a: f64| 24.0 * t.powf(4.0 - a);
    let mut s = g(0.0) + g(1.0);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * g(i as f64 * h);
    }
    s * h / 3.0
}

/// Riesz derivative of p(x) = x³(1-x)³ from the monomial expansion
/// x³ - 3x⁴ + 3x⁵ - x⁶ and the left/right power rules.
fn riesz_of_bump(order: f64, x: f64) -> f64 {
    let coeffs = [(3, 1.0), (4, -3.0), (5, 3.0), (6, -1.0)];
    let mut left = 0.0;
    let mut right = 0.0;
    for (p, c) in coeffs {
        let pf = p as f64;
        let r = oracle_gamma(pf + 1.0) / oracle_gamma(pf + 1.0 - order);
        left += c * r * x.powf(pf - order);
        right += c * r * (1.0 - x).powf(pf - order);
    }
    -(left + right) / (2.0 * (order * std::f64::consts::PI / 2.0).cos())
}

fn bump(x: f64) -> f64 {
    (x * (1.0 - x)).powi(3)
}

#[test]
fn example1_source_matches_rederivation() {
    let p = example1(1.5).unwrap();
    let f = p.as_1d().unwrap().source.clone();
    let (x, t) = (0.25, 0.5);
    let want = memory_term(t) * bump(x) - t.powi(4) * riesz_of_bump(1.5, x);
    assert!((f(x, t) - want).abs() < 1e-10 * want.abs(), "{} vs {want}", f(x, t));
}

#[test]
fn example2_source_matches_rederivation() {
    let p = example2(1.8, 1.8).unwrap();
    let f = p.as_2d().unwrap().source.clone();
    let (x, y, t) = (0.25, 0.75, 0.5);
    let want = memory_term(t) * bump(x) * bump(y)
        - t.powi(4) * bump(y) * riesz_of_bump(1.8, x)
        - t.powi(4) * bump(x) * riesz_of_bump(1.8, y);
    assert!((f(x, y, t) - want).abs() < 1e-10 * want.abs(), "{} vs {want}", f(x, y, t));
}

#[test]
fn mixed_orders_use_each_order_in_its_direction() {
    let p = example2(1.2, 1.8).unwrap();
    let f = p.as_2d().unwrap().source.clone();
    let (x, y, t) = (0.3, 0.6, 1.2);
    let want = memory_term(t) * bump(x) * bump(y)
        - t.powi(4) * bump(y) * riesz_of_bump(1.2, x)
        - t.powi(4) * bump(x) * riesz_of_bump(1.8, y);
    assert!((f(x, y, t) - want).abs() < 1e-10 * want.abs());
}

#[test]
fn unit_time_uses_removable_limit() {
    let p = example2(1.5, 1.5).unwrap();
    let f = p.as_2d().unwrap().source.clone();
    let (x, y) = (0.4, 0.45);
    let want = 24.0 * bump(x) * bump(y) - bump(y) * riesz_of_bump(1.5, x) - bump(x) * riesz_of_bump(1.5, y);
    assert!((f(x, y, 1.0) - want).abs() < 1e-12 * want.abs());
}

#[test]
fn registry_builds_each_example() {
    let params = ProblemParams {
        beta: 1.5,
        ..ProblemParams::default()
    };
    assert_eq!(registry_lookup("example1", &params).unwrap().dimension(), 1);
    assert_eq!(registry_lookup("example2", &params).unwrap().dimension(), 2);
    let err = registry_lookup("nosuch", &params).unwrap_err().to_string();
    for name in ["example1", "example2", "zero1d", "zero2d"] {
        assert!(err.contains(name), "{err}");
    }
}
