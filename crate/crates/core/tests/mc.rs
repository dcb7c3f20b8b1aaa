use matbeta::fixtures::{example, ExampleId};
use matbeta::mc::*;
use matbeta::symmat::SymMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn chi_square_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (n, nu) = (100_000, 7u32);
    let mean: f64 = (0..n).map(|_| sample_wishart(1, nu, &mut rng).get(0, 0)).sum::<f64>() / n as f64;
    let sd = (2.0 * nu as f64 / n as f64).sqrt();
    assert!((mean - nu as f64).abs() < 3.0 * sd, "{mean}");
}

#[test]
fn wishart_mean_is_nu_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (n, nu, m) = (50_000, 6u32, 3);
    let mut acc = vec![0.0; m * m];
    for _ in 0..n {
        let w = sample_wishart(m, nu, &mut rng);
        for (a, v) in acc.iter_mut().zip(w.data()) {
            *a += v;
        }
    }
    for i in 0..m {
        for j in 0..m {
            let mean = acc[i * m + j] / n as f64;
            let want = if i == j { nu as f64 } else { 0.0 };
            // Var W_ii = 2 nu, Var W_ij = nu.
            let sd = (if i == j { 2.0 } else { 1.0 } * nu as f64 / n as f64).sqrt();
            assert!((mean - want).abs() < 3.5 * sd, "({i},{j}) {mean}");
        }
    }
}

#[test]
fn too_few_degrees_of_freedom_gives_singular_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let w = sample_wishart(4, 2, &mut rng);
    let ev = w.eigenvalues().unwrap();
    assert!(ev[1] > 1e-6);
    assert!(ev[2].abs() < 1e-10 * ev[0] && ev[3].abs() < 1e-10 * ev[0]);
}

#[test]
fn same_seed_same_answer() {
    let cfg = McConfig::new(2, 3, 24, 20_000, 99).unwrap();
    let nabla = SymMatrix::diag(&[0.05, 0.02]);
    let a = estimate_probs(&cfg, &nabla).unwrap();
    let b = estimate_probs(&cfg, &nabla).unwrap();
    assert_eq!(a.upper.to_bits(), b.upper.to_bits());
    assert_eq!(a.lower.to_bits(), b.lower.to_bits());
    assert!(a.upper + a.lower <= 1.0);
}

#[test]
fn tiny_threshold_is_almost_always_exceeded() {
    let cfg = McConfig::new(2, 3, 24, 5_000, 7).unwrap();
    let (p, _) = estimate_upper_prob(&cfg, &SymMatrix::diag(&[1e-6, 1e-6])).unwrap();
    assert!(p > 0.999);
}

#[test]
fn scalar_tail_closed_form() {
    let cfg = McConfig::new(1, 2, 23, 2_000_000, 5).unwrap();
    let (p, se) = estimate_upper_prob(&cfg, &SymMatrix::diag(&[1.109875])).unwrap();
    let want = 2.109875f64.powf(-11.5);
    assert!((p - want).abs() < 3.0 * se, "{p} vs {want} (se {se})");
}

#[test]
fn interaction_example() {
    let ex = example(ExampleId::Ex2AB);
    let cfg = McConfig::new(2, 3, 24, 200_000, 11).unwrap();
    let e = estimate_probs(&cfg, &ex.fc_matrix()).unwrap();
    assert!((e.upper - 0.4291338).abs() < 3.0 * e.upper_stderr, "{e:?}");
    // Incomparable draws exist for m = 2.
    assert!(e.upper + e.lower < 1.0);
}

#[test]
fn config_validation() {
    assert!(McConfig::new(2, 3, 24, 999, 1).is_err());
    assert!(McConfig::new(3, 3, 2, 5000, 1).is_err());
    let cfg = McConfig::new(2, 3, 24, 5000, 1).unwrap();
    assert!(estimate_probs(&cfg, &SymMatrix::diag(&[1.0, -1.0])).is_err());
}
