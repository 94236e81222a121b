//! `bessel_j` against a 50-digit reference table.

use radamp::bessel::{bessel_j, bessel_j_sequence};

fn reference() -> Vec<(i64, f64, f64)> {
    include_str!("data/bessel_reference.csv")
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect()
}

/// Error measure: relative where `|J|` is not small, absolute otherwise
/// (near zeros only an absolute bound is meaningful).
fn err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1e-3)
}

#[test]
fn pointwise_values_match_the_reference() {
    let mut worst = (0.0, 0, 0.0);
    for (n, x, j) in reference() {
        let e = err(bessel_j(n, x).unwrap(), j);
        if e > worst.0 {
            worst = (e, n, x);
        }
        // Negative orders follow from J_{−n} = (−1)^n J_n.
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        assert!(err(bessel_j(-n, x).unwrap(), sign * j) <= 1e-12, "J_-{n}({x})");
    }
    println!("worst error {:e} at n = {}, x = {}", worst.0, worst.1, worst.2);
    assert!(worst.0 <= 1e-12);
}

#[test]
fn sequences_match_the_reference() {
    let table = reference();
    let mut xs: Vec<f64> = table.iter().map(|t| t.1).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    for x in xs {
        let seq = bessel_j_sequence(200, x).unwrap();
        for &(n, _, j) in table.iter().filter(|t| t.1 == x) {
            assert!(err(seq[n as usize], j) <= 1e-12, "J_{n}({x}): {} vs {j}", seq[n as usize]);
        }
    }
}

#[test]
fn tiny_values_keep_relative_accuracy() {
    // Below the turning point x < n the function has no zeros, so relative
    // accuracy is required even for values near the underflow threshold.
    let mut worst = 0.0_f64;
    for (n, x, j) in reference().into_iter().filter(|t| t.1 < t.0 as f64) {
        worst = worst.max(((bessel_j(n, x).unwrap() - j) / j).abs());
    }
    println!("worst relative error below the turning point {worst:e}");
    assert!(worst <= 1e-12);
}
