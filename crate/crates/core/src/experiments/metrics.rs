//! Pure metric functions over sampled data.

use alloc::vec::Vec;

use crate::error::{Error, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub stderr: f64,
}

/// Ordinary least squares y = slope·x + intercept.
pub fn linear_fit(samples: &[(f64, f64)]) -> Result<LinearFit> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::DegenerateFit);
    }
    let nf = n as f64;
    let mx = samples.iter().map(|s| s.0).sum::<f64>() / nf;
    let my = samples.iter().map(|s| s.1).sum::<f64>() / nf;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(x, y) in samples {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let spread = samples
        .iter()
        .fold(0.0_f64, |m, s| m.max(libm::fabs(s.0 - mx)));
    if !(sxx > 0.0) || spread <= 1e-12 * (1.0 + libm::fabs(mx)) {
        return Err(Error::DegenerateFit);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = if n > 2 {
        let ssr: f64 = samples
            .iter()
            .map(|&(x, y)| {
                let r = y - (slope * x + intercept);
                r * r
            })
            .sum();
        libm::sqrt(ssr / (nf - 2.0) / sxx)
    } else {
        0.0
    };
    Ok(LinearFit {
        slope,
        intercept,
        stderr,
    })
}

/// Absolute shoelace area of a polyline, closed if it is not already.
pub fn hysteresis_area(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::BadArgument(
            "hysteresis loop needs at least 3 points".into(),
        ));
    }
    let mut acc = 0.0;
    for w in points.windows(2) {
        acc += w[0].0 * w[1].1 - w[1].0 * w[0].1;
    }
    let (first, last) = (points[0], points[points.len() - 1]);
    if first != last {
        acc += last.0 * first.1 - first.0 * last.1;
    }
    Ok(0.5 * libm::fabs(acc))
}

/// Time (ms) after the first sample until `series` stays inside
/// `reference ± band` for good: the first re-entry after the last exit.
/// `None` when the last sample is still outside.
pub fn settling_time(series: &[f64], interval: f64, band: f64, reference: f64) -> Option<f64> {
    let last_out = series
        .iter()
        .rposition(|v| libm::fabs(v - reference) > band);
    match last_out {
        None => Some(0.0),
        Some(i) if i + 1 == series.len() => None,
        Some(i) => Some((i + 1) as f64 * interval * 1000.0),
    }
}

/// Largest |x − reference| in degrees.
pub fn peak_deflection(series: &[f64], reference: f64) -> f64 {
    series
        .iter()
        .fold(0.0_f64, |m, v| m.max(libm::fabs(v - reference)))
        .to_degrees()
}

pub fn rms(series: &[f64]) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::BadArgument("rms of an empty series".into()));
    }
    let ss: f64 = series.iter().map(|v| v * v).sum();
    Ok(libm::sqrt(ss / series.len() as f64))
}

pub fn peak_abs(series: &[f64]) -> f64 {
    series.iter().fold(0.0_f64, |m, v| m.max(libm::fabs(*v)))
}

pub fn mean(series: &[f64]) -> f64 {
    if series.is_empty() {
        return f64::NAN;
    }
    series.iter().sum::<f64>() / series.len() as f64
}

/// Indices where `series − reference` changes sign (exact zeros skipped).
pub fn zero_crossings(series: &[f64], reference: f64) -> Vec<usize> {
    let mut out = Vec::new();
    let mut prev: Option<bool> = None;
    for (i, v) in series.iter().enumerate() {
        let d = v - reference;
        if d == 0.0 {
            continue;
        }
        let pos = d > 0.0;
        if let Some(p) = prev {
            if p != pos {
                out.push(i);
            }
        }
        prev = Some(pos);
    }
    out
}

/// Oscillation frequency (Hz) from the mean spacing of zero crossings,
/// `None` with fewer than three crossings.
pub fn crossing_frequency(series: &[f64], interval: f64, reference: f64) -> Option<f64> {
    let zc = zero_crossings(series, reference);
    if zc.len() < 3 {
        return None;
    }
    let span = (zc[zc.len() - 1] - zc[0]) as f64 * interval;
    let half_periods = (zc.len() - 1) as f64;
    Some(half_periods / (2.0 * span))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn exact_line() {
        let pts: Vec<_> = (0..20)
            .map(|i| (i as f64 * 0.01, 5.57 * i as f64 * 0.01))
            .collect();
        let fit = linear_fit(&pts).unwrap();
        assert!((fit.slope - 5.57).abs() < 1e-12);
        assert!(fit.stderr < 1e-12);
        assert!(fit.intercept.abs() < 1e-12);
    }

    #[test]
    fn constant_has_zero_slope() {
        let pts: Vec<_> = (0..5).map(|i| (i as f64, 3.0)).collect();
        assert_eq!(linear_fit(&pts).unwrap().slope, 0.0);
    }

    #[test]
    fn symmetric_perturbation_keeps_slope() {
        // Points paired about the mean x with ±ε on y: the perturbation is
        // orthogonal to (x − x̄) so the OLS slope cannot move.
        let xs = [-2.0, -1.0, 1.0, 2.0];
        let line = |x: f64| 1.3 * x - 0.4;
        let eps = 0.25;
        let pts: Vec<_> = xs
            .iter()
            .flat_map(|&x| [(x, line(x) + eps), (x, line(x) - eps)])
            .collect();
        let fit = linear_fit(&pts).unwrap();
        assert!((fit.slope - 1.3).abs() < 1e-12);
        assert!(fit.stderr > 0.0);
    }

    #[test]
    fn degenerate_fits() {
        assert_eq!(linear_fit(&[(1.0, 2.0)]), Err(Error::DegenerateFit));
        assert_eq!(
            linear_fit(&[(1.0, 2.0), (1.0, 3.0)]),
            Err(Error::DegenerateFit)
        );
    }

    #[test]
    fn shoelace_cases() {
        let square = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        assert!((hysteresis_area(&square).unwrap() - 1.0).abs() < 1e-15);
        let closed = [(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0), (0.0, 0.0)];
        assert!((hysteresis_area(&closed).unwrap() - 1.0).abs() < 1e-15);
        let retraced = [(0.0, 0.0), (1.0, 2.0), (2.0, 4.0), (1.0, 2.0), (0.0, 0.0)];
        assert_eq!(hysteresis_area(&retraced).unwrap(), 0.0);
        assert!(hysteresis_area(&square[..2]).is_err());
    }

    #[test]
    fn settling_cases() {
        let band = 0.5_f64.to_radians();
        let inside = [0.0, 0.001, -0.002, 0.0];
        assert_eq!(settling_time(&inside, 0.001, band, 0.0), Some(0.0));

        // Re-exit at index 4: settled at first re-entry, index 5.
        let ringing = [0.1, 0.0, 0.0, 0.0, -0.1, 0.0, 0.0];
        assert_eq!(settling_time(&ringing, 0.01, band, 0.0), Some(50.0));

        let never = [0.1, 0.1];
        assert_eq!(settling_time(&never, 0.01, band, 0.0), None);
    }

    #[test]
    fn exponential_crossing_matches_closed_form() {
        // x(t) = A·e^{−t/τ} crosses the band at t* = τ·ln(A/band).
        let (a, tau, band, dt) = (0.1, 0.3, 0.5_f64.to_radians(), 1.0 / 8000.0);
        let series: Vec<f64> = (0..16_000)
            .map(|i| a * libm::exp(-(i as f64) * dt / tau))
            .collect();
        let analytic_ms = tau * libm::log(a / band) * 1000.0;
        let measured = settling_time(&series, dt, band, 0.0).unwrap();
        assert!(
            (measured - analytic_ms).abs() <= dt * 1000.0,
            "{measured} vs {analytic_ms}"
        );
    }

    #[test]
    fn peak_cases() {
        assert_eq!(peak_deflection(&[0.2, 0.2, 0.2], 0.2), 0.0);
        let spike = [0.0, 0.0, 0.1, 0.0];
        assert!((peak_deflection(&spike, 0.0) - 5.7296).abs() < 1e-4);
    }

    #[test]
    fn rms_cases() {
        assert!((rms(&[-2.5; 7]).unwrap() - 2.5).abs() < 1e-15);
        let n = 8000;
        let sine: Vec<f64> = (0..n)
            .map(|i| libm::sin(2.0 * PI * 3.0 * i as f64 / n as f64))
            .collect();
        assert!((rms(&sine).unwrap() - libm::sqrt(0.5)).abs() < 1e-3);
        assert!((rms(&[3.0, 4.0]).unwrap() - 3.5355339).abs() < 1e-7);
        assert!(rms(&[]).is_err());
    }

    #[test]
    fn crossing_frequency_of_sine() {
        let dt = 1e-4;
        let s: Vec<f64> = (0..50_000)
            .map(|i| libm::sin(2.0 * PI * 7.0 * i as f64 * dt + 0.3))
            .collect();
        let f = crossing_frequency(&s, dt, 0.0).unwrap();
        assert!((f - 7.0).abs() < 0.01);
    }
}
