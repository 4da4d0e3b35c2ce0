use serde::{Deserialize, Serialize};

use super::index::IndexModel;
use super::ModeError;

/// Triangular nanobeam cross-section: flat top face at `y = 0`, apex pointing
/// down at `y = -height`, mirror-symmetric about `x = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionGeometry {
    /// Top-face width in metres.
    pub width: f64,
    /// Apex half-angle in degrees.
    pub apex_half_angle_deg: f64,
    pub core_index: IndexModel,
    pub cladding_index: f64,
}

impl CrossSectionGeometry {
    pub const DEFAULT_APEX_HALF_ANGLE_DEG: f64 = 36.0;

    pub fn new(width: f64, apex_half_angle_deg: f64) -> Result<Self, ModeError> {
        let geometry =
            Self { width, apex_half_angle_deg, core_index: IndexModel::silicon_carbide_4h(), cladding_index: 1.0 };
        geometry.validate()?;
        Ok(geometry)
    }

    /// Nominal beam: 36 degree half-angle, air cladding.
    pub fn with_width(width: f64) -> Result<Self, ModeError> {
        Self::new(width, Self::DEFAULT_APEX_HALF_ANGLE_DEG)
    }

    pub fn validate(&self) -> Result<(), ModeError> {
        if !(self.width.is_finite() && self.width > 0.0) {
            return Err(ModeError::InvalidGeometry(format!("width must be positive, got {}", self.width)));
        }
        if !(self.apex_half_angle_deg > 0.0 && self.apex_half_angle_deg < 90.0) {
            return Err(ModeError::InvalidGeometry(format!(
                "apex half-angle must lie in (0, 90) degrees, got {}",
                self.apex_half_angle_deg
            )));
        }
        if !(self.cladding_index >= 1.0) {
            return Err(ModeError::InvalidGeometry(format!(
                "cladding index must be >= 1, got {}",
                self.cladding_index
            )));
        }
        if self.core_index.min_index() <= self.cladding_index {
            return Err(ModeError::InvalidGeometry("core index must exceed cladding index".into()));
        }
        Ok(())
    }

    /// `h = w / (2 tan(gamma))`.
    pub fn height(&self) -> f64 {
        self.width / (2.0 * self.apex_half_angle_deg.to_radians().tan())
    }

    pub fn as_shape(&self) -> Shape {
        Shape::Triangle { width: self.width, apex_half_angle_deg: self.apex_half_angle_deg }
    }
}

/// Primitive regions understood by the rasterizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    /// Apex-down triangle with its top face on `y = 0`, centred on `x = 0`.
    Triangle { width: f64, apex_half_angle_deg: f64 },
    /// Circle (fibre core).
    Disk { cx: f64, cy: f64, radius: f64 },
    /// Layer infinite along x, occupying `y_min <= y <= y_max`.
    Slab { y_min: f64, y_max: f64 },
}

impl Shape {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Shape::Triangle { width, apex_half_angle_deg } => {
                if width <= 0.0 {
                    return false;
                }
                let tan_g = apex_half_angle_deg.to_radians().tan();
                let h = width / (2.0 * tan_g);
                y <= 0.0 && y >= -h && x.abs() <= (y + h) * tan_g
            }
            Shape::Disk { cx, cy, radius } => {
                let (dx, dy) = (x - cx, y - cy);
                radius > 0.0 && dx * dx + dy * dy <= radius * radius
            }
            Shape::Slab { y_min, y_max } => y >= y_min && y <= y_max,
        }
    }

    /// Axis-aligned bounds `(x_min, x_max, y_min, y_max)`; `None` for shapes
    /// unbounded along x or empty shapes.
    pub fn bounds(&self) -> Option<(f64, f64, f64, f64)> {
        match *self {
            Shape::Triangle { width, apex_half_angle_deg } => {
                if width <= 0.0 {
                    return None;
                }
                let h = width / (2.0 * apex_half_angle_deg.to_radians().tan());
                Some((-width / 2.0, width / 2.0, -h, 0.0))
            }
            Shape::Disk { cx, cy, radius } => {
                if radius <= 0.0 {
                    return None;
                }
                Some((cx - radius, cx + radius, cy - radius, cy + radius))
            }
            Shape::Slab { .. } => None,
        }
    }
}

/// A shape filled with a refractive index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Inclusion {
    pub shape: Shape,
    pub index: f64,
}
