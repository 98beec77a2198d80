//! Log-log fitting of decay rates and comparison with predicted exponents.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fewest points accepted by [`fit_decay_rate`].
pub const MIN_FIT_POINTS: usize = 8;

/// Least-squares line `y = slope x + intercept`; returns
/// `(slope, intercept, rms residual)`, or `None` with fewer than two
/// distinct abscissae.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    Some((slope, intercept, (ss / n as f64).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Slope of `log value` against `log t`; negative for decay.
    pub slope: f64,
    pub intercept: f64,
    pub window: (f64, f64),
    pub rms_residual: f64,
    pub n_points: usize,
}

impl DecayFit {
    /// Positive decay exponent, `-slope`.
    pub fn exponent(&self) -> f64 {
        -self.slope
    }
}

/// Fits `value ~ t^slope` to the points of `series` with `t` in `window`.
pub fn fit_decay_rate(series: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|(t, _)| *t >= window.0 && *t <= window.1)
        .collect();
    let bad: Vec<f64> = pts
        .iter()
        .filter(|(t, v)| !(*v > 0.0 && v.is_finite()) || *t <= 0.0)
        .map(|(t, _)| *t)
        .collect();
    if !bad.is_empty() {
        return Err(Error::NonPositive(bad));
    }
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientSamples {
            needed: MIN_FIT_POINTS,
            got: pts.len(),
        });
    }
    let xs: Vec<f64> = pts.iter().map(|(t, _)| t.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|(_, v)| v.ln()).collect();
    let (slope, intercept, rms_residual) = least_squares(&xs, &ys).ok_or(Error::InsufficientSamples {
        needed: MIN_FIT_POINTS,
        got: pts.len(),
    })?;
    Ok(DecayFit {
        slope,
        intercept,
        window,
        rms_residual,
        n_points: pts.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Pass iff the measured decay is no slower than predicted, up to the margin.
    AtLeastAsFast,
    /// Pass iff the measured decay is within the margin of the prediction.
    TwoSided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonVerdict {
    pub quantity: String,
    pub fitted_exponent: f64,
    pub predicted_exponent: f64,
    pub direction: Direction,
    pub margin: f64,
    pub pass: bool,
}

pub fn compare_to_theory(
    quantity: &str,
    fit: &DecayFit,
    predicted: f64,
    direction: Direction,
    margin: f64,
) -> ComparisonVerdict {
    compare_exponent(quantity, fit.exponent(), predicted, direction, margin)
}

/// As [`compare_to_theory`] for an exponent obtained some other way, such as
/// the difference of two fits.
pub fn compare_exponent(
    quantity: &str,
    fitted: f64,
    predicted: f64,
    direction: Direction,
    margin: f64,
) -> ComparisonVerdict {
    let pass = match direction {
        Direction::AtLeastAsFast => fitted >= predicted - margin,
        Direction::TwoSided => (fitted - predicted).abs() <= margin,
    };
    ComparisonVerdict {
        quantity: quantity.to_string(),
        fitted_exponent: fitted,
        predicted_exponent: predicted,
        direction,
        margin,
        pass: pass && fitted.is_finite(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
        (0..50).map(|i| 10f64.powf(i as f64 / 25.0)).map(|t| (t, f(t))).collect()
    }

    #[test]
    fn exact_power_law() {
        let fit = fit_decay_rate(&series(|t| t.powi(-2)), (0.5, 200.0)).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-12);
        assert!(fit.rms_residual < 1e-12);
        assert_eq!(fit.n_points, 50);
    }

    #[test]
    fn constant_series() {
        let fit = fit_decay_rate(&series(|_| 3.0), (0.5, 200.0)).unwrap();
        assert!(fit.slope.abs() < 1e-12);
    }

    #[test]
    fn wobbly_power_law() {
        let fit = fit_decay_rate(&series(|t| t.powi(-2) * (1.0 + 0.01 * t.ln().sin())), (0.5, 200.0)).unwrap();
        assert!((fit.slope + 2.0).abs() <= 0.02);
        assert!(fit.rms_residual > 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        let mut s = series(|t| 1.0 / t);
        s[3].1 = 0.0;
        s[7].1 = -1.0;
        match fit_decay_rate(&s, (0.0, 1e9)) {
            Err(Error::NonPositive(ts)) => assert_eq!(ts, vec![s[3].0, s[7].0]),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            fit_decay_rate(&series(|t| 1.0 / t), (1.0, 1.5)),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn verdicts() {
        let fit = |slope| DecayFit {
            slope,
            intercept: 0.0,
            window: (1.0, 2.0),
            rms_residual: 0.0,
            n_points: 8,
        };
        assert!(compare_to_theory("E0", &fit(-2.4), 1.9, Direction::AtLeastAsFast, 0.3).pass);
        assert!(!compare_to_theory("E0", &fit(-1.2), 1.9, Direction::AtLeastAsFast, 0.3).pass);
        assert!(compare_to_theory("E0", &fit(-2.0), 2.0, Direction::TwoSided, 0.5).pass);
        assert!(!compare_to_theory("E0", &fit(-3.0), 2.0, Direction::TwoSided, 0.5).pass);
    }
}
