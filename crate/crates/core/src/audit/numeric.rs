use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::laws::{forward_conditional, laplace_pdf, JointLaw};
use crate::level::{LevelPair, PrivacyLevel};
use crate::quadrature::{integrate_with_breaks, DEFAULT_TOLERANCE};

use super::report::AuditReport;

/// Slack added to the privacy bound for floating-point noise in the
/// finite differences.
pub const SLOPE_SLACK: f64 = 1e-6;
/// Pointwise tolerance for the kernel composition audit.
pub const COMPOSITION_TOLERANCE: f64 = 1e-6;
/// Tolerance for normalization and marginal consistency.
pub const MARGINAL_TOLERANCE: f64 = 1e-8;
/// Integration range in units of the widest Laplace scale; the mass beyond
/// it is below 1e-20.
const TAIL_SCALES: f64 = 50.0;

/// Symmetric square grid `{k·step : |k·step| <= half_width}` per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub half_width: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn new(half_width: f64, step: f64) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0 && step.is_finite() && step > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grid needs positive finite half width and step, got {half_width} and {step}"
            )));
        }
        Ok(GridSpec { half_width, step })
    }

    /// The coarsest grid the Lipschitz audit accepts for `pair`:
    /// `[-10/ε1, 10/ε1]²` with step `0.01/ε2`.
    pub fn lipschitz_default(pair: LevelPair) -> Self {
        GridSpec {
            half_width: 10.0 / pair.eps1(),
            step: 0.01 / pair.eps2(),
        }
    }

    pub fn points(&self) -> Vec<f64> {
        let k = (self.half_width / self.step * (1.0 + 1e-12)).floor() as i64;
        (-k..=k).map(|i| i as f64 * self.step).collect()
    }

    fn check_lipschitz(&self, pair: LevelPair) -> Result<()> {
        let max_step = 0.01 / pair.eps2();
        let min_width = 10.0 / pair.eps1();
        if self.step > max_step * (1.0 + 1e-12) {
            return Err(Error::GridTooCoarse(format!(
                "step {} exceeds 0.01/eps2 = {max_step}",
                self.step
            )));
        }
        if self.half_width < min_width * (1.0 - 1e-12) {
            return Err(Error::GridTooCoarse(format!(
                "half width {} below 10/eps1 = {min_width}",
                self.half_width
            )));
        }
        Ok(())
    }
}

/// Largest `|d/du f(v - u)|` at `u = 0` over the grid, by central
/// differences with step `h`, skipping points where `excluded(v)` holds.
/// Returns the maximum and the number of points evaluated.
pub fn max_log_slope_1d<F, X>(f: F, grid: &GridSpec, h: f64, excluded: X) -> (f64, usize)
where
    F: Fn(f64) -> f64 + Sync,
    X: Fn(f64) -> bool + Sync,
{
    grid.points()
        .par_iter()
        .filter(|&&v| !excluded(v))
        .map(|&v| (((f(v - h) - f(v + h)) / (2.0 * h)).abs(), 1usize))
        .reduce(|| (0.0, 0), |a, b| (a.0.max(b.0), a.1 + b.1))
}

/// Two-dimensional version of [`max_log_slope_1d`]: the private value shifts
/// both coordinates, so the derivative is along the diagonal direction.
pub fn max_log_slope_2d<F, X>(f: F, grid: &GridSpec, h: f64, excluded: X) -> (f64, usize)
where
    F: Fn(f64, f64) -> f64 + Sync,
    X: Fn(f64, f64) -> bool + Sync,
{
    let points = grid.points();
    points
        .par_iter()
        .map(|&v1| {
            let mut best = 0.0f64;
            let mut count = 0usize;
            for &v2 in &points {
                if excluded(v1, v2) {
                    continue;
                }
                let slope = ((f(v1 - h, v2 - h) - f(v1 + h, v2 + h)) / (2.0 * h)).abs();
                best = best.max(slope);
                count += 1;
            }
            (best, count)
        })
        .reduce(|| (0.0, 0), |a, b| (a.0.max(b.0), a.1 + b.1))
}

fn slope_step(eps2: f64) -> f64 {
    1e-5 / eps2
}

/// Scans the two density components of the joint law for the largest
/// log-slope in the private value. Both must stay within `ε2`. Points on the
/// kinks `|y2 - u| = 0` and `y1 = y2` are excluded with a band of one grid
/// step.
pub fn lipschitz_grid_audit(pair: LevelPair, grid: &GridSpec) -> Result<AuditReport> {
    grid.check_lipschitz(pair)?;
    let law = JointLaw::new(pair);
    let h = slope_step(pair.eps2());
    let band = grid.step;
    let (cont_max, cont_n) = if pair.eps1() < pair.eps2() {
        max_log_slope_2d(
            |x, y| law.log_continuous(x, y),
            grid,
            h,
            |v1, v2| v2.abs() <= band || (v1 - v2).abs() <= band,
        )
    } else {
        (0.0, 0)
    };
    let (diag_max, diag_n) = max_log_slope_1d(|y| law.log_diagonal(y), grid, h, |v| v.abs() <= band);
    let bound = pair.eps2();
    Ok(AuditReport::new(
        "lipschitz_grid",
        cont_max.max(diag_max),
        bound + SLOPE_SLACK,
        cont_n + diag_n,
    )
    .with("eps1", pair.eps1())
    .with("eps2", pair.eps2())
    .with("max_slope_continuous", cont_max)
    .with("max_slope_diagonal", diag_max)
    .with("grid_half_width", grid.half_width)
    .with("grid_step", grid.step)
    .with("fd_step", h))
}

/// The single-level Laplace log-density has slope exactly ε off the kink.
pub fn laplace_slope_audit(eps: PrivacyLevel, grid: &GridSpec) -> Result<AuditReport> {
    let e = eps.value();
    let log_norm = (0.5 * e).ln();
    let (max, n) = max_log_slope_1d(
        |v| log_norm - e * v.abs(),
        grid,
        slope_step(e),
        |v| v.abs() <= grid.step,
    );
    Ok(AuditReport::new("laplace_slope", (max - e).abs(), SLOPE_SLACK, n)
        .with("eps", e)
        .with("max_slope", max))
}

/// Independent noises at `ε1` and `ε2 - ε1`: the naive composition, whose
/// slope bound is also `ε2`.
pub fn naive_pair_slope_audit(pair: LevelPair, grid: &GridSpec) -> Result<AuditReport> {
    grid.check_lipschitz(pair)?;
    let (e1, e2) = (pair.eps1(), pair.eps2());
    if e2 <= e1 {
        return Err(Error::Ordering { lower: e1, upper: e2 });
    }
    let second = e2 - e1;
    let (max, n) = max_log_slope_2d(
        |x, y| -e1 * x.abs() - second * y.abs(),
        grid,
        slope_step(e2),
        |v1, v2| v1.abs() <= grid.step || v2.abs() <= grid.step,
    );
    Ok(AuditReport::new("naive_pair_slope", max, e2 + SLOPE_SLACK, n)
        .with("eps1", e1)
        .with("eps2", e2)
        .with("max_slope", max))
}

fn integrate_real_line<F: Fn(f64) -> f64>(f: F, half_width: f64, breaks: &[f64]) -> Result<f64> {
    Ok(integrate_with_breaks(f, -half_width, half_width, breaks, DEFAULT_TOLERANCE)?.value)
}

/// Composes the kernels `ε1→ε2` and `ε2→ε3` by quadrature, tracking the
/// atoms analytically, and compares with the direct kernel `ε1→ε3` at every
/// grid pair `(x, y)`.
pub fn chapman_kolmogorov_audit(
    eps1: PrivacyLevel,
    eps2: PrivacyLevel,
    eps3: PrivacyLevel,
    grid: &GridSpec,
) -> Result<AuditReport> {
    if !(eps1.value() < eps2.value() && eps2.value() < eps3.value()) {
        return Err(Error::Ordering {
            lower: eps1.value(),
            upper: if eps1.value() >= eps2.value() { eps2.value() } else { eps3.value() },
        });
    }
    let p12 = LevelPair::new(eps1, eps2)?;
    let p23 = LevelPair::new(eps2, eps3)?;
    let p13 = LevelPair::new(eps1, eps3)?;
    let points = grid.points();
    let rows = points
        .par_iter()
        .map(|&x| -> Result<(f64, f64)> {
            let k12 = forward_conditional(x, p12);
            let k23_at_x = forward_conditional(x, p23);
            let k13 = forward_conditional(x, p13);
            let atom_dev = (k12.atom_mass * k23_at_x.atom_mass - k13.atom_mass).abs();
            let reach = TAIL_SCALES / eps1.value() + x.abs();
            let mut cont_dev = 0.0f64;
            for &y in &points {
                let through = integrate_real_line(
                    |z| {
                        (k12.log_continuous_density(z)
                            + forward_conditional(z, p23).log_continuous_density(y))
                        .exp()
                    },
                    reach + y.abs(),
                    &[0.0, x, y],
                )?;
                // atom·continuous + continuous·atom + continuous·continuous
                let composed = k12.atom_mass * k23_at_x.continuous_density(y)
                    + k12.continuous_density(y) * forward_conditional(y, p23).atom_mass
                    + through;
                cont_dev = cont_dev.max((composed - k13.continuous_density(y)).abs());
            }
            Ok((atom_dev, cont_dev))
        })
        .collect::<Result<Vec<_>>>()?;
    let atom_dev = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let cont_dev = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(AuditReport::new(
        "chapman_kolmogorov",
        atom_dev.max(cont_dev),
        COMPOSITION_TOLERANCE,
        points.len() * points.len(),
    )
    .with("eps1", eps1.value())
    .with("eps2", eps2.value())
    .with("eps3", eps3.value())
    .with("max_atom_deviation", atom_dev)
    .with("max_continuous_deviation", cont_dev))
}

/// Integrates the joint law over each coordinate at `points_per_axis` grid
/// values and compares with the Laplace marginals at ε1 and ε2.
pub fn marginal_consistency_audit(pair: LevelPair, points_per_axis: usize) -> Result<AuditReport> {
    if points_per_axis < 2 {
        return Err(Error::InvalidArgument("need at least two grid points".into()));
    }
    let law = JointLaw::new(pair);
    let span = 5.0 / pair.eps1();
    let reach = TAIL_SCALES / pair.eps1();
    let grid: Vec<f64> = (0..points_per_axis)
        .map(|i| -span + 2.0 * span * i as f64 / (points_per_axis - 1) as f64)
        .collect();
    let deviations = grid
        .par_iter()
        .map(|&t| -> Result<(f64, f64)> {
            // Marginal of V1 at t: integrate over y.
            let over_y = integrate_real_line(|y| law.log_continuous(t, y).exp(), reach + t.abs(), &[0.0, t])?;
            let first = over_y + law.log_diagonal(t).exp();
            let first_dev = (first - laplace_pdf(t, pair.lower())?).abs();
            // Marginal of V2 at t: integrate over x.
            let over_x = integrate_real_line(|x| law.log_continuous(x, t).exp(), reach + t.abs(), &[t])?;
            let second = over_x + law.log_diagonal(t).exp();
            let second_dev = (second - laplace_pdf(t, pair.upper())?).abs();
            Ok((first_dev, second_dev))
        })
        .collect::<Result<Vec<_>>>()?;
    let first = deviations.iter().map(|d| d.0).fold(0.0, f64::max);
    let second = deviations.iter().map(|d| d.1).fold(0.0, f64::max);
    Ok(AuditReport::new(
        "marginal_consistency",
        first.max(second),
        MARGINAL_TOLERANCE,
        2 * points_per_axis,
    )
    .with("eps1", pair.eps1())
    .with("eps2", pair.eps2())
    .with("max_deviation_first", first)
    .with("max_deviation_second", second))
}

/// Atom mass plus the integral of the continuous part of the forward kernel
/// must be one at every conditioning value in `xs`.
pub fn kernel_normalization_audit(pair: LevelPair, xs: &[f64]) -> Result<AuditReport> {
    let reach = TAIL_SCALES / pair.eps1();
    let deviations = xs
        .par_iter()
        .map(|&x| -> Result<f64> {
            let law = forward_conditional(x, pair);
            let mass = if pair.eps1() == pair.eps2() {
                0.0
            } else {
                integrate_real_line(|y| law.continuous_density(y), reach + x.abs(), &[0.0, x])?
            };
            Ok((law.atom_mass + mass - 1.0).abs())
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = deviations.into_iter().fold(0.0, f64::max);
    Ok(AuditReport::new("kernel_normalization", worst, MARGINAL_TOLERANCE, xs.len())
        .with("eps1", pair.eps1())
        .with("eps2", pair.eps2()))
}
