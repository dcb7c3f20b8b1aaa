mod common;

use matbeta::hyper::{hyp_pfq, HyperParams, SeriesControl, SeriesStatus};
use matbeta::specfun::AlgebraParam;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BETAS: [AlgebraParam; 4] = [
    AlgebraParam::REAL,
    AlgebraParam::COMPLEX,
    AlgebraParam::QUATERNION,
    AlgebraParam::OCTONION,
];

fn eval(upper: &[f64], lower: &[f64], beta: AlgebraParam, x: &[f64]) -> f64 {
    let r = hyp_pfq(&HyperParams::new(upper.to_vec(), lower.to_vec(), beta), x, &SeriesControl::default()).unwrap();
    assert!(matches!(r.status, SeriesStatus::Converged | SeriesStatus::Terminated), "{r:?}");
    r.value()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn one_f_zero_is_a_determinant_power() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    // Eigenvalue vectors in the Euclidean ball of radius 0.5.
    for beta in BETAS {
        for m in 1..=3 {
            for a in [0.5, 2.5, 7.0] {
                let x = common::in_ball(&mut rng, m, 0.5);
                let want: f64 = x.iter().map(|v| (1.0 - v).powf(-a)).product();
                let ctrl = SeriesControl { max_degree: 60, ..Default::default() };
                let r = hyp_pfq(&HyperParams::new(vec![a], vec![], beta), &x, &ctrl).unwrap();
                assert!(!r.is_diverged() && r.degree_used <= 60);
                let got = r.value();
                assert!(rel(got, want) < 1e-8, "beta {beta:?} m {m} a {a}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn zero_f_zero_is_exponential_trace() {
    for beta in BETAS {
        let x = [1.3, -0.7, 2.1];
        let want = x.iter().sum::<f64>().exp();
        assert!(rel(eval(&[], &[], beta, &x), want) < 1e-12);
    }
}

#[test]
fn scalar_gauss_function() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let (a, b) = (rng.gen_range(-3.0..5.0), rng.gen_range(-3.0..5.0));
        let c = rng.gen_range(0.3..6.0);
        let x = rng.gen_range(-0.8..0.8);
        let want = common::gauss_2f1(a, b, c, x);
        let got = eval(&[a, b], &[c], AlgebraParam::REAL, &[x]);
        assert!((got - want).abs() < 1e-10 * want.abs().max(1.0), "{a} {b} {c} {x}: {got} vs {want}");
    }
}

#[test]
fn euler_transformations() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst: f64 = 0.0;
    for case in 0..200 {
        let beta = BETAS[case % 4];
        let m = 1 + case % 3;
        let shift = (m as f64 - 1.0) * beta.beta() / 2.0;
        let a = rng.gen_range(0.2..4.0);
        let b = rng.gen_range(0.2..4.0);
        let c = shift + rng.gen_range(0.6..5.0);
        let x: Vec<f64> = (0..m).map(|_| rng.gen_range(-0.4..0.4)).collect();
        let base = eval(&[a, b], &[c], beta, &x);
        let det = |p: f64| x.iter().map(|v| (1.0 - v).powf(p)).product::<f64>();
        let k1 = det(c - a - b) * eval(&[c - a, c - b], &[c], beta, &x);
        let y: Vec<f64> = x.iter().map(|v| -v / (1.0 - v)).collect();
        let k2 = det(-b) * eval(&[c - a, b], &[c], beta, &y);
        worst = worst.max(rel(k1, base)).max(rel(k2, base));
    }
    assert!(worst < 1e-7, "worst relative disagreement {worst:e}");
}

#[test]
fn symmetric_in_eigenvalue_order() {
    let p = HyperParams::new(vec![1.5, 2.0], vec![3.5], AlgebraParam::COMPLEX);
    let ctrl = SeriesControl::default();
    let r1 = hyp_pfq(&p, &[0.3, -0.2, 0.6], &ctrl).unwrap().value();
    let r2 = hyp_pfq(&p, &[0.6, 0.3, -0.2], &ctrl).unwrap().value();
    assert!(rel(r1, r2) < 1e-13);
}

#[test]
fn negative_integer_parameter_gives_polynomial() {
    // -2 truncates each row at 2 boxes, so the series ends at degree 2m.
    let p = HyperParams::new(vec![-2.0, 1.7], vec![2.9], AlgebraParam::REAL);
    let r = hyp_pfq(&p, &[0.4, 3.0, -5.0], &SeriesControl::default()).unwrap();
    assert_eq!(r.status, SeriesStatus::Terminated);
    assert_eq!(r.termination_degree, Some(6));
}

#[test]
fn huge_radius_with_no_termination_diverges() {
    let p = HyperParams::new(vec![1.5, 2.0], vec![3.5], AlgebraParam::REAL);
    let r = hyp_pfq(&p, &[-3.0, -0.5], &SeriesControl::default()).unwrap();
    assert_eq!(r.status, SeriesStatus::Diverged);
    assert!((r.spectral_radius - 3.0).abs() < 1e-15);
}
