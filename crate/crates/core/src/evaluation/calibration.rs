//! Smooth expected calibration error.
//!
//! Residuals `y_i - p_i` are smoothed with a Gaussian kernel reflected at
//! both ends of [0, 1]; the error at bandwidth `sigma` is the integral of
//! the absolute smoothed residual. The reported value uses the bandwidth
//! where the error equals `sigma`, found by bisection.

use super::EvalError;

/// Number of grid points on [0, 1].
pub const SMOOTH_ECE_GRID: usize = 1000;
const BISECTION_TOL: f64 = 1e-4;
/// Mirror images on each side; with sigma <= 1 the mass beyond is < 1e-9.
const REFLECTIONS: i32 = 3;

/// Residual mass binned onto the grid with linear interpolation.
fn binned_residuals(confidences: &[(f64, bool)], grid: usize) -> Result<Vec<f64>, EvalError> {
    let mut bins = vec![0.0; grid];
    let step = 1.0 / (grid - 1) as f64;
    for &(p, correct) in confidences {
        if !(0.0..=1.0).contains(&p) {
            return Err(EvalError::OutOfRange(p));
        }
        let r = correct as u8 as f64 - p;
        let x = p / step;
        let lo = (x.floor() as usize).min(grid - 2);
        let w = x - lo as f64;
        bins[lo] += r * (1.0 - w);
        bins[lo + 1] += r * w;
    }
    let n = confidences.len() as f64;
    bins.iter_mut().for_each(|b| *b /= n);
    Ok(bins)
}

#[cfg(test)]
fn reflected_kernel(t: f64, center: f64, sigma: f64) -> f64 {
    let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    let mut k = 0.0;
    for m in -REFLECTIONS..=REFLECTIONS {
        let shift = 2.0 * m as f64;
        for img in [shift + center, shift - center] {
            let z = (t - img) / sigma;
            k += (-0.5 * z * z).exp();
        }
    }
    k * norm
}

fn smece_binned(bins: &[f64], sigma: f64) -> f64 {
    let grid = bins.len();
    let step = 1.0 / (grid - 1) as f64;
    // The images at 2m + c and 2m - c put K(t, c) in terms of t - c and
    // t + c, so one table per offset covers every (t, c) pair.
    let images = |offset: f64| -> f64 {
        let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
        (-REFLECTIONS..=REFLECTIONS)
            .map(|m| {
                let z = (offset * step - 2.0 * m as f64) / sigma;
                (-0.5 * z * z).exp()
            })
            .sum::<f64>()
            * norm
    };
    let span = 2 * grid - 1;
    let diff: Vec<f64> = (0..span).map(|d| images(d as f64 - (grid - 1) as f64)).collect();
    let sum: Vec<f64> = (0..span).map(|s| images(s as f64)).collect();
    let nonzero: Vec<(usize, f64)> = bins.iter().copied().enumerate().filter(|(_, b)| *b != 0.0).collect();
    let mut total = 0.0;
    for ti in 0..grid {
        let acc: f64 = nonzero.iter().map(|&(ci, b)| (diff[ti + grid - 1 - ci] + sum[ti + ci]) * b).sum();
        let w = if ti == 0 || ti == grid - 1 { 0.5 } else { 1.0 };
        total += w * acc.abs();
    }
    total * step
}

/// Smooth ECE at a fixed bandwidth.
pub fn smooth_ece_at(confidences: &[(f64, bool)], sigma: f64) -> Result<f64, EvalError> {
    if confidences.is_empty() {
        return Ok(0.0);
    }
    let bins = binned_residuals(confidences, SMOOTH_ECE_GRID)?;
    Ok(smece_binned(&bins, sigma))
}

/// Smooth ECE at the self-consistent bandwidth `sigma = smECE(sigma)`.
pub fn smooth_ece(confidences: &[(f64, bool)]) -> Result<f64, EvalError> {
    if confidences.is_empty() {
        return Ok(0.0);
    }
    let bins = binned_residuals(confidences, SMOOTH_ECE_GRID)?;
    let f = |s: f64| smece_binned(&bins, s) - s;
    let (mut lo, mut hi) = (BISECTION_TOL / 10.0, 1.0);
    if f(hi) >= 0.0 {
        return Ok(smece_binned(&bins, hi).min(1.0));
    }
    if f(lo) <= 0.0 {
        return Ok(smece_binned(&bins, lo).max(0.0));
    }
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(smece_binned(&bins, 0.5 * (lo + hi)).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflected_kernel_integrates_to_one() {
        for &(c, s) in &[(0.0, 0.1), (0.3, 0.05), (1.0, 0.5), (0.5, 1.0)] {
            let n = 20_000;
            let integral: f64 = (0..=n)
                .map(|i| {
                    let t = i as f64 / n as f64;
                    let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                    w * reflected_kernel(t, c, s)
                })
                .sum::<f64>()
                / n as f64;
            assert!((integral - 1.0).abs() < 1e-6, "c={c} s={s} integral={integral}");
        }
    }

    #[test]
    fn tabulated_kernel_matches_direct() {
        let grid = 11;
        let step = 0.1;
        let mut bins = vec![0.0; grid];
        bins[3] = 0.2;
        bins[9] = -0.5;
        let sigma = 0.13;
        let direct: f64 = (0..grid)
            .map(|ti| {
                let t = ti as f64 * step;
                let acc: f64 =
                    bins.iter().enumerate().map(|(ci, b)| b * reflected_kernel(t, ci as f64 * step, sigma)).sum();
                let w = if ti == 0 || ti == grid - 1 { 0.5 } else { 1.0 };
                w * acc.abs()
            })
            .sum::<f64>()
            * step;
        assert!((direct - smece_binned(&bins, sigma)).abs() < 1e-12);
    }

    #[test]
    fn overconfident_is_half() {
        let data: Vec<(f64, bool)> = (0..1000).map(|i| (1.0, i % 2 == 0)).collect();
        let e = smooth_ece(&data).unwrap();
        assert!((e - 0.5).abs() < 0.05, "{e}");
    }

    #[test]
    fn constant_calibrated_is_zero() {
        let data: Vec<(f64, bool)> = (0..1000).map(|i| (0.5, i % 2 == 0)).collect();
        assert!(smooth_ece(&data).unwrap() < 0.01);
    }

    #[test]
    fn rejects_out_of_range() {
        assert_eq!(smooth_ece(&[(1.5, true)]), Err(EvalError::OutOfRange(1.5)));
    }
}
