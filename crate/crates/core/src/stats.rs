//! Sample statistics used by the audits.

/// Kolmogorov–Smirnov critical coefficient at significance 0.001.
pub const KS_COEFFICIENT: f64 = 1.95;

/// One-sample critical distance `1.95 / sqrt(n)`.
pub fn ks_threshold_one_sample(n: usize) -> f64 {
    KS_COEFFICIENT / (n as f64).sqrt()
}

/// Two-sample critical distance `1.95 * sqrt((n + m) / (n m))`; equals
/// `1.95 * sqrt(2 / n)` for equal sizes.
pub fn ks_threshold_two_sample(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    KS_COEFFICIENT * ((n + m) / (n * m)).sqrt()
}

fn sorted(samples: &[f64]) -> Vec<f64> {
    let mut v = samples.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    v
}

/// `sup |F_n(x) - F(x)|` of the empirical distribution against `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let v = sorted(samples);
    let n = v.len() as f64;
    v.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        let above = (i + 1) as f64 / n - f;
        let below = f - i as f64 / n;
        d.max(above).max(below)
    })
}

/// `sup |F_n(x) - G_m(x)|` between two empirical distributions.
pub fn ks_distance_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (a, b) = (sorted(a), sorted(b));
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

pub fn mean(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() / samples.len() as f64
}

pub fn mean_square(samples: &[f64]) -> f64 {
    samples.iter().map(|v| v * v).sum::<f64>() / samples.len() as f64
}

/// Pearson correlation of paired observations.
pub fn pearson(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len() as f64;
    let (mx, my) = pairs
        .iter()
        .fold((0.0, 0.0), |(sx, sy), &(x, y)| (sx + x, sy + y));
    let (mx, my) = (mx / n, my / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in pairs {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    sxy / (sxx * syy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_distance_of_uniform_grid() {
        let n = 1000;
        let samples: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_distance(&samples, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn two_sample_identical_is_zero() {
        let a = [3.0, 1.0, 2.0, 2.0];
        assert_eq!(ks_distance_two_sample(&a, &a), 0.0);
    }

    #[test]
    fn two_sample_disjoint_is_one() {
        assert_eq!(ks_distance_two_sample(&[0.0, 1.0], &[5.0, 6.0, 7.0]), 1.0);
    }

    #[test]
    fn two_sample_handles_ties() {
        // F_a jumps to 1 at 1.0, F_b is 0.5 there.
        let d = ks_distance_two_sample(&[1.0, 1.0], &[1.0, 2.0]);
        assert_eq!(d, 0.5);
    }

    #[test]
    fn pearson_of_linear_relation() {
        let pairs: Vec<_> = (0..50).map(|i| (i as f64, 3.0 - 2.0 * i as f64)).collect();
        assert!((pearson(&pairs) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn thresholds() {
        assert!((ks_threshold_one_sample(10_000) - 0.0195).abs() < 1e-15);
        assert!((ks_threshold_two_sample(100, 100) - 1.95 * 0.02f64.sqrt()).abs() < 1e-15);
    }
}
