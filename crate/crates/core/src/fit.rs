//! Growth-envelope fitting: certify that a per-ball quantity `Q(B)` stays
//! under `C (1 + r_B)^theta` over a tested family.

use crate::error::{Error, Result};

/// Fitted envelope pair together with the largest relative excess of any
/// sample over `C (1 + r)^theta`. The free fit produced by [`fit_growth`]
/// chooses `C` as the exact envelope constant, so its residual is zero by
/// construction; constrained fits ([`fit_growth_at_theta`]) report how badly
/// the data sticks out above the least-squares line.
#[derive(Clone, Copy, Debug)]
pub struct GrowthFit {
    pub c: f64,
    pub theta: f64,
    pub max_residual: f64,
    /// Index (into the sample slice) of the sample that pins the constant.
    pub argmax: usize,
}

impl GrowthFit {
    pub fn envelope(&self, r: f64) -> f64 {
        self.c * (1.0 + r).powf(self.theta)
    }
}

fn validate(samples: &[(f64, f64)]) -> Result<()> {
    if samples.iter().any(|(_, q)| !q.is_finite()) {
        return Err(Error::DivergentQuantity);
    }
    if samples.iter().any(|(_, q)| *q < 0.0) {
        return Err(Error::DivergentQuantity);
    }
    let distinct = distinct_radii(samples);
    if distinct < 2 {
        return Err(Error::TooFewRadii {
            need: 2,
            got: distinct,
        });
    }
    Ok(())
}

fn distinct_radii(samples: &[(f64, f64)]) -> usize {
    let mut radii: Vec<f64> = samples.iter().map(|(r, _)| *r).collect();
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
    radii.dedup();
    radii.len()
}

/// Max of `Q` per distinct radius, sorted by radius.
fn per_radius_maxima(samples: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut sorted: Vec<(f64, f64)> = samples.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (r, q) in sorted {
        match out.last_mut() {
            Some((lr, lq)) if *lr == r => *lq = lq.max(q),
            _ => out.push((r, q)),
        }
    }
    out
}

/// Least-squares slope of `log Q_max(r)` against `log(1 + r)` over the
/// per-radius maxima with positive values. Returns 0 when fewer than two
/// positive maxima remain.
fn ls_slope(maxima: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = maxima
        .iter()
        .filter(|(_, q)| *q > 0.0)
        .map(|(r, q)| ((1.0 + r).ln(), q.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

fn envelope_argmax(samples: &[(f64, f64)], theta: f64) -> (usize, f64) {
    let mut arg = 0usize;
    let mut best = f64::NEG_INFINITY;
    for (i, (r, q)) in samples.iter().enumerate() {
        let v = q / (1.0 + r).powf(theta);
        if v > best {
            best = v;
            arg = i;
        }
    }
    (arg, best)
}

/// Free envelope fit: `theta = max(0, least-squares slope)` over per-radius
/// maxima, then `C` as the exact envelope constant over all samples.
pub fn fit_growth(samples: &[(f64, f64)]) -> Result<GrowthFit> {
    validate(samples)?;
    if samples.iter().all(|(_, q)| *q == 0.0) {
        return Ok(GrowthFit {
            c: 0.0,
            theta: 0.0,
            max_residual: 0.0,
            argmax: 0,
        });
    }
    let theta = ls_slope(&per_radius_maxima(samples)).max(0.0);
    let (argmax, c) = envelope_argmax(samples, theta);
    Ok(GrowthFit {
        c,
        theta,
        max_residual: 0.0,
        argmax,
    })
}

/// Constrained fit at a prescribed exponent: `C` is the least-squares
/// intercept (in log space, over per-radius maxima) at fixed slope `theta`,
/// and the residual records the largest relative excess over that line.
pub fn fit_growth_at_theta(samples: &[(f64, f64)], theta: f64) -> Result<GrowthFit> {
    validate(samples)?;
    let maxima = per_radius_maxima(samples);
    let pts: Vec<(f64, f64)> = maxima
        .iter()
        .filter(|(_, q)| *q > 0.0)
        .map(|(r, q)| ((1.0 + r).ln(), q.ln()))
        .collect();
    if pts.is_empty() {
        return Ok(GrowthFit {
            c: 0.0,
            theta,
            max_residual: 0.0,
            argmax: 0,
        });
    }
    let n = pts.len() as f64;
    let intercept = pts.iter().map(|(x, y)| y - theta * x).sum::<f64>() / n;
    let c = intercept.exp();
    let (argmax, top) = envelope_argmax(samples, theta);
    Ok(GrowthFit {
        c,
        theta,
        max_residual: (top / c - 1.0).max(0.0),
        argmax,
    })
}

/// Smallest constant putting all samples under `C (1 + r)^theta`; the
/// envelope constant at a fixed exponent. Monotone in the sample set.
pub fn envelope_constant(samples: &[(f64, f64)], theta: f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    envelope_argmax(samples, theta).1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let samples: Vec<(f64, f64)> = [0.5, 1.0, 2.0, 4.0, 8.0]
            .iter()
            .map(|&r| (r, (1.0 + r) * (1.0 + r)))
            .collect();
        let fit = fit_growth(&samples).unwrap();
        assert!((fit.theta - 2.0).abs() < 1e-6);
        assert!((fit.c - 1.0).abs() < 1e-6);
        assert_eq!(fit.max_residual, 0.0);
    }

    #[test]
    fn flat_data() {
        let samples: Vec<(f64, f64)> = [1.0, 2.0, 4.0].iter().map(|&r| (r, 2.5)).collect();
        let fit = fit_growth(&samples).unwrap();
        assert_eq!(fit.theta, 0.0);
        assert!((fit.c - 2.5).abs() < 1e-12);
    }

    #[test]
    fn noisy_half_power() {
        let samples: Vec<(f64, f64)> = [1.0f64, 2.0, 4.0, 8.0, 16.0, 32.0]
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                let noise = if i % 2 == 0 { 1.01 } else { 0.99 };
                (r, (1.0 + r).sqrt() * noise)
            })
            .collect();
        let fit = fit_growth(&samples).unwrap();
        assert!(fit.theta > 0.45 && fit.theta < 0.55, "theta = {}", fit.theta);
    }

    #[test]
    fn zero_data_and_errors() {
        let zeros = [(1.0, 0.0), (2.0, 0.0)];
        let fit = fit_growth(&zeros).unwrap();
        assert_eq!((fit.c, fit.theta), (0.0, 0.0));

        assert!(matches!(
            fit_growth(&[(1.0, f64::INFINITY), (2.0, 1.0)]),
            Err(Error::DivergentQuantity)
        ));
        assert!(matches!(
            fit_growth(&[(1.0, 1.0), (1.0, 2.0)]),
            Err(Error::TooFewRadii { .. })
        ));
    }

    #[test]
    fn negative_slope_clamps_to_zero() {
        let samples: Vec<(f64, f64)> = [1.0, 2.0, 4.0]
            .iter()
            .map(|&r| (r, 1.0 / (1.0 + r)))
            .collect();
        let fit = fit_growth(&samples).unwrap();
        assert_eq!(fit.theta, 0.0);
        assert!((fit.c - 0.5).abs() < 1e-12);
    }

    #[test]
    fn constrained_fit_reports_excess() {
        let samples: Vec<(f64, f64)> = [1.0f64, 2.0, 4.0, 8.0]
            .iter()
            .map(|&r| (r, (1.0 + r).sqrt()))
            .collect();
        let flat = fit_growth_at_theta(&samples, 0.0).unwrap();
        assert!(flat.max_residual > 0.2);
        // envelope invariant: every sample under C (1+r)^theta (1 + residual)
        for (r, q) in &samples {
            assert!(*q <= flat.envelope(*r) * (1.0 + flat.max_residual) * (1.0 + 1e-12));
        }
        // at the true exponent the line hugs the data
        let half = fit_growth_at_theta(&samples, 0.5).unwrap();
        assert!(half.max_residual < 1e-9);
    }

    #[test]
    fn envelope_constant_monotone_in_samples() {
        let base = [(1.0, 1.0), (2.0, 1.5), (4.0, 2.0)];
        let more = [(1.0, 1.0), (2.0, 1.5), (4.0, 2.0), (8.0, 1.9), (2.0, 2.2)];
        for theta in [0.0, 0.3, 1.0] {
            assert!(envelope_constant(&more, theta) >= envelope_constant(&base, theta));
        }
    }
}
