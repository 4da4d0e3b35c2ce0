use serde::{Deserialize, Serialize};

use super::{strain_shift, GroundStateParams, SpinError};

/// One row of an externally computed strain profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrainRow {
    pub position_um: f64,
    pub eps_para: f64,
    pub eps_perp: f64,
}

/// Strain along the waveguide, rows sorted by position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrainProfile {
    pub rows: Vec<StrainRow>,
}

impl StrainProfile {
    pub fn new(mut rows: Vec<StrainRow>) -> Result<Self, SpinError> {
        if rows.is_empty() {
            return Err(SpinError::EmptyProfile);
        }
        rows.sort_by(|a, b| a.position_um.total_cmp(&b.position_um));
        Ok(Self { rows })
    }

    /// Linear interpolation in position; constant beyond the ends.
    pub fn at(&self, position_um: f64) -> (f64, f64) {
        let rows = &self.rows;
        let k = rows.partition_point(|r| r.position_um <= position_um);
        if k == 0 {
            return (rows[0].eps_para, rows[0].eps_perp);
        }
        if k == rows.len() {
            let r = rows[k - 1];
            return (r.eps_para, r.eps_perp);
        }
        let (a, b) = (rows[k - 1], rows[k]);
        let t = (position_um - a.position_um) / (b.position_um - a.position_um);
        (a.eps_para + t * (b.eps_para - a.eps_para), a.eps_perp + t * (b.eps_perp - a.eps_perp))
    }
}

/// ODMR line frequency (Hz) at each position; the table's own positions when
/// `positions` is `None`.
pub fn odmr_vs_position(
    profile: &StrainProfile,
    params: &GroundStateParams,
    positions: Option<&[f64]>,
) -> Result<Vec<(f64, f64)>, SpinError> {
    if profile.rows.is_empty() {
        return Err(SpinError::EmptyProfile);
    }
    let own: Vec<f64>;
    let xs = match positions {
        Some(p) => p,
        None => {
            own = profile.rows.iter().map(|r| r.position_um).collect();
            &own
        }
    };
    xs.iter()
        .map(|&x| {
            let (para, perp) = profile.at(x);
            Ok((x, 2.0 * params.d + strain_shift(params, para, perp)?.shift))
        })
        .collect()
}
