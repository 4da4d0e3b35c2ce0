use serde::{Deserialize, Serialize};

use crate::Estimate;

use super::TaperError;

/// Single-pass interface efficiency from a fibre-to-fibre transmission
/// through two interfaces: `η_trans = η_WFI² η_coupler η_wg`.
pub fn infer_interface_efficiency(transmission: f64, coupler: f64, waveguide: f64) -> Result<f64, TaperError> {
    for (name, v) in [("transmission", transmission), ("coupler", coupler), ("waveguide", waveguide)] {
        if !(v > 0.0 && v <= 1.0) {
            return Err(TaperError::InvalidInput(format!("{name} efficiency {v} outside (0, 1]")));
        }
    }
    let eta = (transmission / (coupler * waveguide)).sqrt();
    if eta > 1.0 {
        return Err(TaperError::Unphysical(format!(
            "transmission {transmission} exceeds coupler x waveguide {}",
            coupler * waveguide
        )));
    }
    Ok(eta)
}

/// Loss per support structure inferred from two devices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportLoss {
    /// Reported loss, clamped at zero.
    pub loss: f64,
    /// Unclamped point estimate with its propagated uncertainty.
    pub raw: Estimate,
    /// One-sigma upper bound, reported when the point estimate was negative.
    pub upper_bound: Option<f64>,
}

/// Solve `T_a / T_b = (1 - ℓ)^(n_a - n_b)` for the per-support loss ℓ.
pub fn per_support_loss(t_a: Estimate, n_a: u32, t_b: Estimate, n_b: u32) -> Result<SupportLoss, TaperError> {
    if n_a == n_b {
        return Err(TaperError::InvalidInput("support counts must differ".into()));
    }
    for t in [t_a, t_b] {
        if !(t.value > 0.0 && t.value <= 1.0 && t.sigma >= 0.0) {
            return Err(TaperError::InvalidInput(format!("transmission {t} outside (0, 1]")));
        }
    }
    let dn = n_a as f64 - n_b as f64;
    let ratio = t_a.value / t_b.value;
    let survival = ratio.powf(1.0 / dn);
    let loss = 1.0 - survival;
    // d(loss)/d(ratio) = -survival / (dn ratio)
    let ratio_sigma = ratio * (t_a.relative_sigma().powi(2) + t_b.relative_sigma().powi(2)).sqrt();
    let sigma = (survival / (dn * ratio)).abs() * ratio_sigma;
    let raw = Estimate::new(loss, sigma);
    Ok(if loss < 0.0 {
        SupportLoss { loss: 0.0, raw, upper_bound: Some((loss + sigma).max(0.0)) }
    } else {
        SupportLoss { loss, raw, upper_bound: None }
    })
}
