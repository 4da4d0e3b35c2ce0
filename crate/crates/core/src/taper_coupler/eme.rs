use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::mode_solver::{
    rasterize_in_window, solve_modes_from, DielectricGrid, GridFrame, GuidedMode, Inclusion, Polarization,
    RasterOptions, Shape, SolveOptions,
};

use super::profile::{build_segments, default_segment_count, CompositeSection, SegmentStack, TaperProfile};
use super::TaperError;

/// Discretization of the eigenmode expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmeSettings {
    pub spacing: f64,
    /// Air margin around the largest cross-section; `None` uses one wavelength.
    pub margin: Option<f64>,
    pub subsamples: u32,
    pub modes_per_segment: usize,
    /// `None` uses [`default_segment_count`].
    pub segments: Option<usize>,
    pub polarization: Polarization,
}

impl Default for EmeSettings {
    fn default() -> Self {
        Self {
            spacing: 20e-9,
            margin: None,
            subsamples: 4,
            modes_per_segment: 4,
            segments: None,
            polarization: Polarization::QuasiTm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    WaveguideToFiber,
    FiberToWaveguide,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::WaveguideToFiber => "waveguide-to-fiber",
            Direction::FiberToWaveguide => "fiber-to-waveguide",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferResult {
    pub direction: Direction,
    /// Power in the fundamental mode of the far end.
    pub transmission: f64,
    /// Total guided power at the far end.
    pub guided_power: f64,
    /// Power dropped at each interface (radiation, unguided or truncated modes).
    pub lost: f64,
    /// Modal powers after each step, in propagation order; the last entry is
    /// the far end.
    pub populations: Vec<Vec<f64>>,
    /// Segments, in stack order, with no guided mode at all. Power reaching
    /// them is lost.
    pub breaks: Vec<usize>,
}

/// Common window for every cross-section of a stack.
#[derive(Debug, Clone, PartialEq)]
struct Window {
    half_width: f64,
    y_min: f64,
    y_max: f64,
    options: RasterOptions,
}

impl Window {
    fn for_stack(stack: &SegmentStack, settings: &EmeSettings) -> Self {
        let p = &stack.profile;
        let margin = settings.margin.unwrap_or(p.wavelength);
        let (w, r) = stack.extent();
        let mut beam = p.waveguide.clone();
        beam.width = w.max(1e-12);
        Self {
            half_width: (w / 2.0).max(r) + margin,
            y_min: -beam.height() - margin,
            y_max: p.gap + 2.0 * r + margin,
            options: RasterOptions { spacing: settings.spacing, margin, subsamples: settings.subsamples },
        }
    }
}

fn inclusions(profile: &TaperProfile, section: &CompositeSection) -> Vec<Inclusion> {
    let mut out = Vec::new();
    if section.waveguide_width > 0.0 {
        out.push(Inclusion {
            shape: Shape::Triangle {
                width: section.waveguide_width,
                apex_half_angle_deg: profile.waveguide.apex_half_angle_deg,
            },
            index: profile.waveguide.core_index.at(profile.wavelength),
        });
    }
    if section.fiber_radius > 0.0 {
        out.push(Inclusion {
            shape: Shape::Disk { cx: 0.0, cy: profile.gap + section.fiber_radius, radius: section.fiber_radius },
            index: profile.fiber_index,
        });
    }
    out
}

fn section_grid(
    profile: &TaperProfile,
    section: &CompositeSection,
    window: &Window,
) -> Result<DielectricGrid, TaperError> {
    Ok(rasterize_in_window(
        &inclusions(profile, section),
        profile.waveguide.cladding_index,
        &window.options,
        window.half_width,
        window.y_min,
        window.y_max,
    )?)
}

/// Guided supermodes of one composite cross-section, highest `n_eff` first.
///
/// The window spans both cores plus `margin` (one wavelength by default).
pub fn local_supermodes(
    profile: &TaperProfile,
    section: &CompositeSection,
    count: usize,
    settings: &EmeSettings,
) -> Result<Vec<GuidedMode>, TaperError> {
    let stack = SegmentStack { profile: profile.clone(), entrance: *section, segments: Vec::new(), exit: *section };
    let window = Window::for_stack(&stack, settings);
    solve_section(profile, section, count, settings, &window, None)
}

fn solve_section(
    profile: &TaperProfile,
    section: &CompositeSection,
    count: usize,
    settings: &EmeSettings,
    window: &Window,
    seed: Option<&[f64]>,
) -> Result<Vec<GuidedMode>, TaperError> {
    let grid = section_grid(profile, section, window)?;
    let options = SolveOptions { polarization: settings.polarization, ..SolveOptions::default() };
    Ok(solve_modes_from(&grid, profile.wavelength, count, &options, seed)?)
}

fn mode_sum(modes: &[GuidedMode]) -> Option<Vec<f64>> {
    let first = modes.first()?;
    let mut sum = vec![0.0; first.field.len()];
    for m in modes {
        sum.iter_mut().zip(&m.field).for_each(|(s, v)| *s += v);
    }
    Some(sum)
}

/// Orthonormal modal basis of one section: `fields[m]` has unit discrete
/// power and zero overlap with `fields[..m]`.
#[derive(Debug, Clone)]
struct Basis {
    betas: Vec<f64>,
    fields: Vec<Vec<f64>>,
    area: f64,
}

impl Basis {
    /// Gram-Schmidt in order of decreasing `n_eff`, so the fundamental is kept
    /// exactly. Semi-vectorial modes are only nearly orthogonal; without this
    /// step projection could create power.
    fn from_modes(modes: Vec<GuidedMode>, frame: &GridFrame) -> Self {
        let area = frame.cell_area();
        let mut betas = Vec::with_capacity(modes.len());
        let mut fields: Vec<Vec<f64>> = Vec::with_capacity(modes.len());
        for mode in modes {
            let beta = mode.propagation_constant();
            let mut f = mode.field;
            for g in &fields {
                let c = dot(g, &f) * area;
                f.iter_mut().zip(g).for_each(|(a, b)| *a -= c * b);
            }
            let norm = (dot(&f, &f) * area).sqrt();
            if norm < 1e-6 {
                continue;
            }
            f.iter_mut().for_each(|v| *v /= norm);
            betas.push(beta);
            fields.push(f);
        }
        Self { betas, fields, area }
    }

    /// `O[m][n] = <next_m, self_n>`.
    fn overlap_into(&self, next: &Basis) -> Vec<Vec<f64>> {
        next.fields.iter().map(|g| self.fields.iter().map(|f| dot(g, f) * self.area).collect()).collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Forward and reverse transfer through the same stack.
///
/// Mode solves are shared; the reverse pass applies the transposed overlap
/// matrices in reverse order.
pub fn propagate_both(
    stack: &SegmentStack,
    settings: &EmeSettings,
) -> Result<(TransferResult, TransferResult), TaperError> {
    stack.profile.validate()?;
    let window = Window::for_stack(stack, settings);
    let frame = section_grid(&stack.profile, &stack.entrance, &window)?.frame();
    let sections: Vec<CompositeSection> = std::iter::once(stack.entrance)
        .chain(stack.segments.iter().map(|s| s.section))
        .chain(std::iter::once(stack.exit))
        .collect();
    // Contiguous chunks run in parallel; inside a chunk each solve starts
    // from the previous section's modes, which are nearly the same.
    let chunk = sections.len().div_ceil(rayon::current_num_threads().max(1)).max(1);
    let bases = sections
        .par_chunks(chunk)
        .map(|run| {
            let mut seed: Option<Vec<f64>> = None;
            let mut out = Vec::with_capacity(run.len());
            for s in run {
                let modes =
                    solve_section(&stack.profile, s, settings.modes_per_segment, settings, &window, seed.as_deref())?;
                seed = mode_sum(&modes);
                out.push(Basis::from_modes(modes, &frame));
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>, TaperError>>()?
        .into_iter()
        .flatten()
        .collect::<Vec<_>>();
    let overlaps: Vec<Vec<Vec<f64>>> = bases.windows(2).map(|w| w[0].overlap_into(&w[1])).collect();
    // lengths[k] is the propagation length inside section k (ends are ports).
    let mut lengths = vec![0.0; sections.len()];
    for (k, seg) in stack.segments.iter().enumerate() {
        lengths[k + 1] = seg.length;
    }
    let breaks: Vec<usize> =
        bases[1..bases.len() - 1].iter().enumerate().filter(|(_, b)| b.fields.is_empty()).map(|(k, _)| k).collect();

    let order: Vec<usize> = (0..sections.len()).collect();
    let forward = cascade(&order, &bases, &overlaps, &lengths, false, Direction::WaveguideToFiber, &breaks);
    let reversed: Vec<usize> = order.iter().rev().copied().collect();
    let reverse = cascade(&reversed, &bases, &overlaps, &lengths, true, Direction::FiberToWaveguide, &breaks);
    Ok((forward, reverse))
}

fn cascade(
    order: &[usize],
    bases: &[Basis],
    overlaps: &[Vec<Vec<f64>>],
    lengths: &[f64],
    transposed: bool,
    direction: Direction,
    breaks: &[usize],
) -> TransferResult {
    let first = order[0];
    let mut amps = vec![Complex64::new(0.0, 0.0); bases[first].fields.len()];
    let mut lost = 0.0;
    // An unguided launch port radiates everything before the overlap region.
    match amps.first_mut() {
        Some(a) => *a = Complex64::new(1.0, 0.0),
        None => lost = 1.0,
    }
    let mut populations = Vec::with_capacity(order.len());
    let power = |a: &[Complex64]| a.iter().map(|c| c.norm_sqr()).sum::<f64>();
    for step in order.windows(2) {
        let (from, to) = (step[0], step[1]);
        let before = power(&amps);
        let next: Vec<Complex64> = if transposed {
            // overlaps[to] maps basis `to` into basis `from`; use its transpose.
            let o = &overlaps[to];
            (0..bases[to].fields.len())
                .map(|n| (0..bases[from].fields.len()).map(|m| amps[m] * o[m][n]).sum())
                .collect()
        } else {
            let o = &overlaps[from];
            o.iter().map(|row| row.iter().zip(&amps).map(|(c, a)| a * c).sum()).collect()
        };
        lost += (before - power(&next)).max(0.0);
        amps = next
            .into_iter()
            .zip(&bases[to].betas)
            .map(|(a, beta)| a * Complex64::from_polar(1.0, beta * lengths[to]))
            .collect();
        populations.push(amps.iter().map(|c| c.norm_sqr()).collect());
    }
    TransferResult {
        direction,
        transmission: amps.first().map_or(0.0, |a| a.norm_sqr()),
        guided_power: power(&amps),
        lost,
        populations,
        breaks: breaks.to_vec(),
    }
}

/// Transfer in one direction.
pub fn propagate_eme(
    stack: &SegmentStack,
    direction: Direction,
    settings: &EmeSettings,
) -> Result<TransferResult, TaperError> {
    let (forward, reverse) = propagate_both(stack, settings)?;
    Ok(match direction {
        Direction::WaveguideToFiber => forward,
        Direction::FiberToWaveguide => reverse,
    })
}

/// One point of an overlap-length sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub overlap_length: f64,
    pub transmission: f64,
    pub segments: usize,
}

/// Waveguide-to-fibre transmission for each overlap length.
///
/// Points are independent and solved in parallel.
pub fn efficiency_vs_overlap(
    profile: &TaperProfile,
    lengths: &[f64],
    settings: &EmeSettings,
) -> Result<Vec<SweepPoint>, TaperError> {
    if lengths.iter().any(|&l| !(l > 0.0)) || lengths.windows(2).any(|w| w[1] < w[0]) {
        return Err(TaperError::InvalidInput("overlap lengths must be positive and sorted".into()));
    }
    lengths
        .par_iter()
        .map(|&length| {
            let mut p = profile.clone();
            p.overlap_length = length;
            let n = settings.segments.unwrap_or_else(|| default_segment_count(&p));
            let stack = build_segments(&p, n)?;
            let t = propagate_eme(&stack, Direction::WaveguideToFiber, settings)?;
            Ok(SweepPoint { overlap_length: length, transmission: t.transmission, segments: n })
        })
        .collect()
}

/// Width in L of the region where the sampled curve stays at or above
/// `level`, with linear interpolation at the crossings. Zero if never reached.
pub fn plateau_width(curve: &[SweepPoint], level: f64) -> f64 {
    let mut width = 0.0;
    for w in curve.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let (ta, tb) = (a.transmission - level, b.transmission - level);
        let span = b.overlap_length - a.overlap_length;
        width += match (ta >= 0.0, tb >= 0.0) {
            (true, true) => span,
            (true, false) => span * ta / (ta - tb),
            (false, true) => span * tb / (tb - ta),
            (false, false) => 0.0,
        };
    }
    width
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(l: f64, t: f64) -> SweepPoint {
        SweepPoint { overlap_length: l, transmission: t, segments: 1 }
    }

    #[test]
    fn plateau_width_interpolates() {
        let c = [point(0.0, 0.0), point(1.0, 1.0), point(2.0, 1.0), point(3.0, 0.0)];
        assert!((plateau_width(&c, 0.5) - 2.0).abs() < 1e-12);
        assert_eq!(plateau_width(&c, 1.5), 0.0);
    }

    #[test]
    fn gram_schmidt_basis_is_orthonormal() {
        let frame = GridFrame { nx: 3, ny: 1, dx: 0.5, dy: 2.0, y0: 0.0 };
        let mode = |field: Vec<f64>, n_eff: f64| GuidedMode {
            n_eff,
            wavelength: 1.0,
            polarization: Polarization::Scalar,
            frame,
            field,
            boundary_ratio: 0.0,
            decayed: true,
        };
        let basis = Basis::from_modes(vec![mode(vec![1.0, 0.0, 0.0], 2.0), mode(vec![0.6, 0.8, 0.0], 1.5)], &frame);
        let o = basis.overlap_into(&basis);
        for (m, row) in o.iter().enumerate() {
            for (n, v) in row.iter().enumerate() {
                assert!((v - if m == n { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }
}
