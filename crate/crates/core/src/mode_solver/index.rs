use serde::{Deserialize, Serialize};

/// Refractive index as a function of vacuum wavelength.
///
/// Tabulated points are interpolated linearly and clamped to the end values
/// outside the table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum IndexModel {
    Constant(f64),
    /// `(wavelength in metres, index)` pairs, strictly increasing in wavelength.
    Table(Vec<(f64, f64)>),
}

impl IndexModel {
    /// Ordinary index of 4H-SiC over 900-1063 nm.
    pub fn silicon_carbide_4h() -> Self {
        IndexModel::Table(vec![
            (900e-9, 2.5942),
            (917e-9, 2.5926),
            (960e-9, 2.5897),
            (1000e-9, 2.5870),
            (1063e-9, 2.5835),
        ])
    }

    pub fn at(&self, wavelength: f64) -> f64 {
        match self {
            IndexModel::Constant(n) => *n,
            IndexModel::Table(points) => {
                let first = points[0];
                let last = points[points.len() - 1];
                if wavelength <= first.0 {
                    return first.1;
                }
                if wavelength >= last.0 {
                    return last.1;
                }
                let k = points.partition_point(|p| p.0 <= wavelength);
                let (x0, y0) = points[k - 1];
                let (x1, y1) = points[k];
                y0 + (y1 - y0) * (wavelength - x0) / (x1 - x0)
            }
        }
    }

    pub fn min_index(&self) -> f64 {
        match self {
            IndexModel::Constant(n) => *n,
            IndexModel::Table(points) => points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min),
        }
    }
}
