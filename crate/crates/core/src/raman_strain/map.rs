use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    fit_peak, shifts_from_reference, shifts_to_stress, stress_to_strain, DeformationPotentials, PeakFit, PeakLabel,
    PeakShifts, RamanError, RamanSpectrum, StiffnessConstants, StrainState, StressState,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSettings {
    pub e1_window: (f64, f64),
    pub e2_window: (f64, f64),
    /// `None` runs the two-peak (E1/E2 only) inversion.
    pub a1_window: Option<(f64, f64)>,
    pub potentials: DeformationPotentials,
    pub stiffness: StiffnessConstants,
}

impl Default for MapSettings {
    fn default() -> Self {
        Self {
            e1_window: PeakLabel::E1.default_window(),
            e2_window: PeakLabel::E2.default_window(),
            a1_window: Some(PeakLabel::A1.default_window()),
            potentials: DeformationPotentials::default(),
            stiffness: StiffnessConstants::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapCell {
    pub shifts: PeakShifts,
    pub stress: StressState,
    pub strain: StrainState,
}

/// Strain on the scan grid; `cells[iy * xs.len() + ix]`, `None` where the
/// position was not scanned or its fit failed (never interpolated).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrainMap {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub cells: Vec<Option<MapCell>>,
    /// Scanned positions whose pipeline failed, with the reason.
    pub failures: Vec<((f64, f64), String)>,
}

impl StrainMap {
    pub fn at(&self, ix: usize, iy: usize) -> Option<&MapCell> {
        self.cells[iy * self.xs.len() + ix].as_ref()
    }
}

struct Fits {
    e1: PeakFit,
    e2: PeakFit,
    a1: Option<PeakFit>,
}

fn fit_all(spectrum: &RamanSpectrum, settings: &MapSettings) -> Result<Fits, RamanError> {
    Ok(Fits {
        e1: fit_peak(spectrum, settings.e1_window, PeakLabel::E1)?,
        e2: fit_peak(spectrum, settings.e2_window, PeakLabel::E2)?,
        a1: settings.a1_window.map(|w| fit_peak(spectrum, w, PeakLabel::A1)).transpose()?,
    })
}

fn cell(spectrum: &RamanSpectrum, reference: &Fits, settings: &MapSettings) -> Result<MapCell, RamanError> {
    let fits = fit_all(spectrum, settings)?;
    let shifts = PeakShifts {
        e1: shifts_from_reference(&fits.e1, &reference.e1)?,
        e2: shifts_from_reference(&fits.e2, &reference.e2)?,
        a1: match (&fits.a1, &reference.a1) {
            (Some(f), Some(r)) => Some(shifts_from_reference(f, r)?),
            _ => None,
        },
    };
    let stress = shifts_to_stress(&shifts, &settings.potentials)?.stress;
    let strain = stress_to_strain(&stress, &settings.stiffness)?;
    Ok(MapCell { shifts, stress, strain })
}

/// Sorted distinct coordinates, merging values within `1e-6` µm.
fn axis(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-6);
    v
}

fn locate(axis: &[f64], v: f64) -> usize {
    axis.iter().position(|a| (a - v).abs() <= 1e-6).expect("axis built from these values")
}

/// Fit every positioned spectrum against the unstrained reference and
/// convert to stress and strain.
pub fn build_strain_map(
    spectra: &[RamanSpectrum],
    reference: &RamanSpectrum,
    settings: &MapSettings,
) -> Result<StrainMap, RamanError> {
    let reference = fit_all(reference, settings).map_err(|e| RamanError::Reference(Box::new(e)))?;
    let positions: Vec<(f64, f64)> = spectra
        .iter()
        .enumerate()
        .map(|(k, s)| s.position.ok_or_else(|| RamanError::NotRectilinear(format!("spectrum {k} has no position"))))
        .collect::<Result<_, _>>()?;
    let xs = axis(positions.iter().map(|p| p.0));
    let ys = axis(positions.iter().map(|p| p.1));
    let mut slot = vec![None; xs.len() * ys.len()];
    for (k, p) in positions.iter().enumerate() {
        let s = locate(&ys, p.1) * xs.len() + locate(&xs, p.0);
        if slot[s].replace(k).is_some() {
            return Err(RamanError::NotRectilinear(format!("position {p:?} scanned twice")));
        }
    }

    let results: Vec<Result<MapCell, RamanError>> = spectra.par_iter().map(|s| cell(s, &reference, settings)).collect();
    let mut failures = Vec::new();
    let cells = slot
        .iter()
        .map(|k| {
            let k = (*k)?;
            match &results[k] {
                Ok(c) => Some(c.clone()),
                Err(e) => {
                    failures.push((positions[k], e.to_string()));
                    None
                }
            }
        })
        .collect();
    Ok(StrainMap { xs, ys, cells, failures })
}
