use serde::{Deserialize, Serialize};

use super::geometry::{CrossSectionGeometry, Inclusion, Shape};
use super::ModeError;

/// Treatment of the field just outside a domain edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum EdgeCondition {
    /// Field vanishes outside the domain.
    #[default]
    Zero,
    /// Mirror (zero normal derivative); used by translation-invariant fixtures.
    Mirror,
}

/// Rasterized permittivity on a uniform cell-centred grid.
///
/// Cell `(i, j)` sits at `(x_center(i), y_center(j))` and is stored at
/// `j * nx + i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DielectricGrid {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    /// y coordinate of the centre of row 0.
    pub y0: f64,
    /// Cell average of the permittivity.
    pub eps: Vec<f64>,
    /// Seen by a field along x: harmonic mean along x, arithmetic along y.
    pub eps_xx: Vec<f64>,
    /// Seen by a field along y: harmonic mean along y, arithmetic along x.
    pub eps_yy: Vec<f64>,
    pub cladding_eps: f64,
    pub x_edges: EdgeCondition,
}

impl DielectricGrid {
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }

    /// x centre of column `i`; columns are placed symmetrically about zero.
    pub fn x_center(&self, i: usize) -> f64 {
        (i as f64 - (self.nx as f64 - 1.0) / 2.0) * self.dx
    }

    pub fn y_center(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.dy
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    pub fn eps_at(&self, i: usize, j: usize) -> f64 {
        self.eps[j * self.nx + i]
    }

    pub fn max_eps(&self) -> f64 {
        self.eps.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Nearest cell to a point, if it lies inside the grid.
    pub fn cell_of(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let fi = x / self.dx + (self.nx as f64 - 1.0) / 2.0;
        let fj = (y - self.y0) / self.dy;
        let (i, j) = (fi.round(), fj.round());
        if i < 0.0 || j < 0.0 || i >= self.nx as f64 || j >= self.ny as f64 {
            return None;
        }
        Some((i as usize, j as usize))
    }

    pub fn validate(&self) -> Result<(), ModeError> {
        let n = self.nx * self.ny;
        if n == 0 || self.eps.len() != n || self.eps_xx.len() != n || self.eps_yy.len() != n {
            return Err(ModeError::InvalidGrid("grid shape does not match data".into()));
        }
        if !(self.dx > 0.0 && self.dy > 0.0) {
            return Err(ModeError::InvalidGrid("grid spacing must be positive".into()));
        }
        if self.eps.iter().chain(&self.eps_xx).chain(&self.eps_yy).any(|&e| !(e >= 1.0)) {
            return Err(ModeError::InvalidGrid("permittivity below 1".into()));
        }
        Ok(())
    }
}

/// Rasterization controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RasterOptions {
    pub spacing: f64,
    /// Vacuum margin around the bounding box of all finite shapes.
    pub margin: f64,
    /// Sub-samples per cell edge used for area-weighted boundary cells;
    /// 1 disables anti-aliasing.
    pub subsamples: u32,
}

impl RasterOptions {
    pub fn new(spacing: f64, margin: f64) -> Self {
        Self { spacing, margin, subsamples: 8 }
    }
}

/// Rasterize the nanobeam cross-section at one wavelength.
pub fn rasterize_cross_section(
    geometry: &CrossSectionGeometry,
    wavelength: f64,
    options: &RasterOptions,
) -> Result<DielectricGrid, ModeError> {
    geometry.validate()?;
    let inclusion = Inclusion { shape: geometry.as_shape(), index: geometry.core_index.at(wavelength) };
    rasterize(&[inclusion], geometry.cladding_index, options)
}

/// Rasterize a set of inclusions; later inclusions overwrite earlier ones.
pub fn rasterize(
    inclusions: &[Inclusion],
    cladding_index: f64,
    options: &RasterOptions,
) -> Result<DielectricGrid, ModeError> {
    let bounds = inclusions
        .iter()
        .filter_map(|inc| inc.shape.bounds())
        .reduce(|a, b| (a.0.min(b.0), a.1.max(b.1), a.2.min(b.2), a.3.max(b.3)))
        .ok_or_else(|| ModeError::InvalidGeometry("no finite shape to rasterize".into()))?;
    let half_width = bounds.0.abs().max(bounds.1.abs()) + options.margin;
    rasterize_in_window(
        inclusions,
        cladding_index,
        options,
        half_width,
        bounds.2 - options.margin,
        bounds.3 + options.margin,
    )
}

/// Rasterize into an explicit window `[-half_width, half_width] x [y_min, y_max]`.
pub fn rasterize_in_window(
    inclusions: &[Inclusion],
    cladding_index: f64,
    options: &RasterOptions,
    half_width: f64,
    y_min: f64,
    y_max: f64,
) -> Result<DielectricGrid, ModeError> {
    if !(options.spacing > 0.0) {
        return Err(ModeError::InvalidGrid("grid spacing must be positive".into()));
    }
    if !(options.margin >= 0.0) {
        return Err(ModeError::InvalidGrid("margin must be non-negative".into()));
    }
    if !(y_max > y_min && half_width > 0.0) {
        return Err(ModeError::InvalidGrid("empty raster window".into()));
    }
    let d = options.spacing;
    let nx = (2.0 * (half_width / d).ceil()) as usize;
    let ny = ((y_max - y_min) / d).ceil() as usize + 1;
    let mut grid = DielectricGrid {
        nx,
        ny,
        dx: d,
        dy: d,
        y0: y_min,
        eps: vec![cladding_index * cladding_index; nx * ny],
        eps_xx: Vec::new(),
        eps_yy: Vec::new(),
        cladding_eps: cladding_index * cladding_index,
        x_edges: EdgeCondition::Zero,
    };
    fill(&mut grid, inclusions, options.subsamples.max(1));
    Ok(grid)
}

/// Rasterize a layer stack that is invariant along x, on a single column with
/// mirror x-edges (a 1-D problem embedded in the 2-D solver).
pub fn rasterize_slab(
    layers: &[(f64, f64, f64)],
    cladding_index: f64,
    spacing: f64,
    y_min: f64,
    y_max: f64,
    subsamples: u32,
) -> Result<DielectricGrid, ModeError> {
    let inclusions: Vec<Inclusion> = layers
        .iter()
        .map(|&(lo, hi, index)| Inclusion { shape: Shape::Slab { y_min: lo, y_max: hi }, index })
        .collect();
    let ny = ((y_max - y_min) / spacing).round() as usize + 1;
    let mut grid = DielectricGrid {
        nx: 1,
        ny,
        dx: spacing,
        dy: spacing,
        y0: y_min,
        eps: vec![cladding_index * cladding_index; ny],
        eps_xx: Vec::new(),
        eps_yy: Vec::new(),
        cladding_eps: cladding_index * cladding_index,
        x_edges: EdgeCondition::Mirror,
    };
    fill(&mut grid, &inclusions, subsamples.max(1));
    Ok(grid)
}

fn fill(grid: &mut DielectricGrid, inclusions: &[Inclusion], subsamples: u32) {
    let eps_of = point_sampler(inclusions, grid.cladding_eps);
    let n = grid.len();
    let (mut eps, mut eps_xx, mut eps_yy) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for j in 0..grid.ny {
        let yc = grid.y_center(j);
        for i in 0..grid.nx {
            let p = j * grid.nx + i;
            [eps[p], eps_xx[p], eps_yy[p]] = cell_average(&eps_of, grid.x_center(i), yc, grid.dx, grid.dy, subsamples);
        }
    }
    grid.eps = eps;
    grid.eps_xx = eps_xx;
    grid.eps_yy = eps_yy;
}

/// Permittivity at a point; later inclusions win.
pub(crate) fn point_sampler(inclusions: &[Inclusion], background: f64) -> impl Fn(f64, f64) -> f64 + '_ {
    move |x, y| {
        inclusions.iter().rev().find(|inc| inc.shape.contains(x, y)).map_or(background, |inc| inc.index * inc.index)
    }
}

/// `[arithmetic, harmonic along x, harmonic along y]` averages over the cell
/// centred at `(xc, yc)`. Only cells that straddle an interface are
/// sub-sampled.
pub(crate) fn cell_average(
    eps_of: &impl Fn(f64, f64) -> f64,
    xc: f64,
    yc: f64,
    dx: f64,
    dy: f64,
    subsamples: u32,
) -> [f64; 3] {
    let center = eps_of(xc, yc);
    let s = subsamples.max(1) as usize;
    if s == 1 || !straddles(eps_of, xc, yc, dx, dy, center) {
        return [center; 3];
    }
    let offset = |a: usize| (2 * a as i64 + 1 - s as i64) as f64 / (2 * s) as f64;
    // samples[a][b]: a along x, b along y
    let samples: Vec<Vec<f64>> =
        (0..s).map(|a| (0..s).map(|b| eps_of(xc + offset(a) * dx, yc + offset(b) * dy)).collect()).collect();
    let m = s as f64;
    let arithmetic = sorted_sum(samples.iter().flatten().copied()) / (m * m);
    // harmonic along x within each row b, then arithmetic over rows
    let harm_x = sorted_sum((0..s).map(|b| m / sorted_sum((0..s).map(|a| 1.0 / samples[a][b])))) / m;
    let harm_y = sorted_sum(samples.iter().map(|col| m / sorted_sum(col.iter().map(|e| 1.0 / e)))) / m;
    [arithmetic, harm_x, harm_y]
}

/// Order-independent sum, so mirror-image cells agree bit for bit.
fn sorted_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.iter().sum()
}

fn straddles(eps_of: &impl Fn(f64, f64) -> f64, xc: f64, yc: f64, dx: f64, dy: f64, center: f64) -> bool {
    let (hx, hy) = (dx / 2.0, dy / 2.0);
    [(-hx, -hy), (hx, -hy), (-hx, hy), (hx, hy), (0.0, -hy), (0.0, hy), (-hx, 0.0), (hx, 0.0)]
        .iter()
        .any(|&(ox, oy)| eps_of(xc + ox, yc + oy) != center)
}
