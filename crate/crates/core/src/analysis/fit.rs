//! Least-squares convergence orders on log–log data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Defects at or below this are indistinguishable from rounding noise.
pub const NOISE_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderFit {
    /// Slope of `log D` against `log ε`.
    pub order: f64,
    /// Root mean square of the fit errors in `log D`.
    pub residual: f64,
    /// Number of samples above the noise floor that entered the fit.
    pub used: usize,
}

/// Fits `D ≈ C ε^p` over the samples whose defect is above [`NOISE_FLOOR`].
pub fn fit_order(samples: &[(f64, f64)]) -> Result<OrderFit> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(e, d)| *e > 0.0 && d.is_finite() && *d > NOISE_FLOOR)
        .map(|(e, d)| (e.ln(), d.ln()))
        .collect();
    if pts.is_empty() {
        return Err(Error::NoiseFloor);
    }
    if pts.len() < 3 {
        return Err(Error::InsufficientSamples(format!(
            "{} of {} defects above the noise floor, need 3",
            pts.len(),
            samples.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientSamples("all scales are equal".into()));
    }
    let order = sxy / sxx;
    let intercept = my - order * mx;
    let residual = (pts.iter().map(|p| (p.1 - intercept - order * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Ok(OrderFit { order, residual, used: pts.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quadratic_decay() {
        let f = fit_order(&[(0.1, 1e-2), (0.05, 2.5e-3), (0.025, 6.25e-4)]).unwrap();
        assert!((f.order - 2.0).abs() < 1e-12);
        assert!(f.residual < 1e-12);
    }

    #[test]
    fn linear_decay() {
        let f = fit_order(&[(0.1, 1e-3), (0.05, 5e-4), (0.025, 2.5e-4)]).unwrap();
        assert!((f.order - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_defect_has_order_zero() {
        let f = fit_order(&[(0.5, 0.3), (0.25, 0.3), (0.125, 0.3), (0.0625, 0.3)]).unwrap();
        assert!(f.order.abs() < 1e-12);
    }

    #[test]
    fn noise_floor_reported() {
        assert_eq!(fit_order(&[(0.5, 0.0), (0.25, 1e-14), (0.125, 0.0)]), Err(Error::NoiseFloor));
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(fit_order(&[(0.5, 1.0), (0.25, 0.5)]), Err(Error::InsufficientSamples(_))));
    }

    proptest! {
        #[test]
        fn recovers_power_laws(p in -1.0f64..4.0, c in 1e-3f64..1e3, n in 3usize..12) {
            let samples: Vec<(f64, f64)> = (1..=n).map(|k| {
                let e = 0.5f64.powi(k as i32);
                (e, c * e.powf(p))
            }).filter(|(_, d)| *d > 1e-12).collect();
            prop_assume!(samples.len() >= 3);
            let f = fit_order(&samples).unwrap();
            prop_assert!((f.order - p).abs() < 1e-9);
            prop_assert!(f.residual < 1e-9);
        }
    }
}
