use serde::{Deserialize, Serialize};

use super::ModeError;

/// Sampled curve `y(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Curve {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        Self { x, y }
    }
}

/// Pointwise convex combination of curves sharing one x axis, e.g.
/// per-wavelength transmission weighted by an emission spectrum.
pub fn weighted_transmission(curves: &[Curve], weights: &[f64]) -> Result<Curve, ModeError> {
    if curves.is_empty() || curves.len() != weights.len() {
        return Err(ModeError::InvalidGrid(format!("{} curves but {} weights", curves.len(), weights.len())));
    }
    if weights.iter().any(|&w| !(w >= 0.0)) {
        return Err(ModeError::InvalidGrid("weights must be non-negative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(ModeError::InvalidGrid(format!("weights sum to {total}, not 1")));
    }
    let axis = &curves[0].x;
    for c in curves {
        if c.x.len() != c.y.len() || c.x != *axis {
            return Err(ModeError::InvalidGrid("curves do not share an x axis".into()));
        }
    }
    let y = (0..axis.len()).map(|k| curves.iter().zip(weights).map(|(c, w)| w * c.y[k]).sum()).collect();
    Ok(Curve::new(axis.clone(), y))
}
