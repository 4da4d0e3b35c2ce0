use std::collections::HashMap;
use std::path::Path;

use serde_json::{json, Value as Json};

use crate::cli_io::config::RunConfig;
use crate::cli_io::output::{cell, opt_cell};
use crate::cli_io::CliError;
use crate::raman_strain::{
    build_strain_map, fit_peak, shifts_from_reference, shifts_to_stress, stress_to_strain, DeformationPotentials,
    MapSettings, PeakFit, PeakLabel, PeakShifts, RamanSpectrum, StiffnessConstants,
};

use super::{estimate, Context, Table};

fn potentials(c: &RunConfig) -> DeformationPotentials {
    DeformationPotentials {
        a_e1: c.number("constants.a_e1"),
        b_e1: c.number("constants.b_e1"),
        a_e2: c.number("constants.a_e2"),
        b_e2: c.number("constants.b_e2"),
        a_a1: c.number("constants.a_a1"),
        b_a1: c.number("constants.b_a1"),
    }
}

fn stiffness(c: &RunConfig) -> StiffnessConstants {
    StiffnessConstants {
        c11: c.number("constants.c11"),
        c12: c.number("constants.c12"),
        c13: c.number("constants.c13"),
        c33: c.number("constants.c33"),
    }
}

fn window_key(label: PeakLabel) -> &'static str {
    match label {
        PeakLabel::E1 => "peaks.e1_window",
        PeakLabel::E2 => "peaks.e2_window",
        PeakLabel::A1 => "peaks.a1_window",
    }
}

fn window(c: &RunConfig, label: PeakLabel) -> (f64, f64) {
    let w = c.list(window_key(label));
    (w[0], w[1])
}

/// Wavenumber and count columns by name, else the first two.
fn spectrum_columns(t: &Table) -> (usize, usize) {
    (t.find("wavenumber_cm1").unwrap_or(0), t.find("counts").unwrap_or(1))
}

/// Spectrum from `(wavenumber, counts)` pairs in any order.
fn spectrum(path: &Path, mut points: Vec<(f64, f64)>, position: Option<(f64, f64)>) -> Result<RamanSpectrum, CliError> {
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (nu, counts) = points.into_iter().unzip();
    RamanSpectrum::new(nu, counts, position).map_err(|e| CliError::Input { path: path.into(), message: e.to_string() })
}

fn read_spectrum(ctx: &mut Context, key: &str) -> Result<RamanSpectrum, CliError> {
    let path = ctx.config.input_path(key).expect("required key");
    let t = ctx.read_table(key, 2)?.expect("required key");
    let (w, n) = spectrum_columns(&t);
    spectrum(&path, t.rows.iter().map(|r| (r[w], r[n])).collect(), None)
}

fn fit_json(f: &PeakFit) -> Json {
    json!({
        "label": f.label.to_string(),
        "center_cm1": estimate(f.center),
        "gaussian_fwhm_cm1": estimate(f.gaussian_fwhm),
        "lorentzian_fwhm_cm1": estimate(f.lorentzian_fwhm),
        "amplitude_counts": estimate(f.amplitude),
        "window_cm1": [f.window.0, f.window.1],
        "residual_norm": f.residual_norm,
        "rejected": f.rejected,
    })
}

pub fn raman_fit(ctx: &mut Context) -> Result<Json, CliError> {
    let c = ctx.config;
    let labels: Vec<PeakLabel> = c.words("peaks.labels").iter().map(|w| w.parse().expect("schema word")).collect();
    let (pot, stiff) = (potentials(c), stiffness(c));
    ctx.constant("deformation_potentials", &pot);
    ctx.constant("stiffness_gpa", &stiff);

    let sample = read_spectrum(ctx, "input.spectrum")?;
    let fits = labels.iter().map(|&l| fit_peak(&sample, window(c, l), l)).collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<Vec<String>> = fits
        .iter()
        .map(|f| {
            vec![
                f.label.to_string(),
                cell(f.center.value),
                cell(f.center.sigma),
                cell(f.gaussian_fwhm.value),
                cell(f.lorentzian_fwhm.value),
                cell(f.amplitude.value),
                f.rejected.to_string(),
            ]
        })
        .collect();
    ctx.csv(
        "peaks.csv",
        &[
            "label",
            "center_cm1",
            "center_err_cm1",
            "gaussian_fwhm_cm1",
            "lorentzian_fwhm_cm1",
            "amplitude_counts",
            "rejected",
        ],
        &rows,
    )?;

    let mut header = vec!["wavenumber_cm1".to_string(), "counts".to_string()];
    header.extend(fits.iter().map(|f| format!("model_{}_counts", format!("{:?}", f.label).to_lowercase())));
    let rows: Vec<Vec<String>> = sample
        .wavenumber
        .iter()
        .zip(&sample.counts)
        .map(|(&nu, &n)| {
            let mut row = vec![cell(nu), cell(n)];
            row.extend(fits.iter().map(|f| opt_cell((f.window.0..=f.window.1).contains(&nu).then(|| f.evaluate(nu)))));
            row
        })
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    ctx.csv("spectrum_fit.csv", &header, &rows)?;

    let mut summary = json!({ "peaks": fits.iter().map(fit_json).collect::<Vec<_>>() });
    if c.opt_text("input.reference").is_some() {
        let reference = read_spectrum(ctx, "input.reference")?;
        let mut shifts = std::collections::BTreeMap::new();
        for f in &fits {
            let r = fit_peak(&reference, f.window, f.label)?;
            shifts.insert(f.label, shifts_from_reference(f, &r)?);
        }
        summary["shifts_cm1"] =
            json!(shifts.iter().map(|(l, s)| (l.to_string(), estimate(*s))).collect::<serde_json::Map<_, _>>());
        if let (Some(&e1), Some(&e2)) = (shifts.get(&PeakLabel::E1), shifts.get(&PeakLabel::E2)) {
            let s = shifts_to_stress(&PeakShifts { e1, e2, a1: shifts.get(&PeakLabel::A1).copied() }, &pot)?;
            let strain = stress_to_strain(&s.stress, &stiff)?;
            summary["stress_gpa"] = json!({ "para": estimate(s.stress.para), "perp": estimate(s.stress.perp) });
            summary["strain"] = json!({ "para": estimate(strain.para), "perp": estimate(strain.perp) });
        }
    }
    Ok(summary)
}

pub fn raman_map(ctx: &mut Context) -> Result<Json, CliError> {
    let c = ctx.config;
    let settings = MapSettings {
        e1_window: window(c, PeakLabel::E1),
        e2_window: window(c, PeakLabel::E2),
        a1_window: (!c.flag("peaks.two_peak")).then(|| window(c, PeakLabel::A1)),
        potentials: potentials(c),
        stiffness: stiffness(c),
    };
    ctx.constant("deformation_potentials", &settings.potentials);
    ctx.constant("stiffness_gpa", &settings.stiffness);

    let path = c.input_path("input.spectra").expect("required key");
    let t = ctx.read_table("input.spectra", 4)?.expect("required key");
    let (Some(x), Some(y)) = (t.find("x_um"), t.find("y_um")) else {
        return Err(CliError::Input { path, message: "scan table needs x_um and y_um columns".into() });
    };
    let (w, n) = spectrum_columns(&t);
    // Group rows by scan position, keeping first-appearance order.
    let mut order: Vec<(u64, u64)> = Vec::new();
    let mut groups: HashMap<(u64, u64), Vec<(f64, f64)>> = HashMap::new();
    for r in &t.rows {
        let key = (r[x].to_bits(), r[y].to_bits());
        groups.entry(key).or_insert_with(|| {
            order.push(key);
            Vec::new()
        });
        groups.get_mut(&key).expect("inserted").push((r[w], r[n]));
    }
    let spectra = order
        .iter()
        .map(|k| spectrum(&path, groups.remove(k).expect("grouped"), Some((f64::from_bits(k.0), f64::from_bits(k.1)))))
        .collect::<Result<Vec<_>, _>>()?;
    let reference = read_spectrum(ctx, "input.reference")?;
    let map = build_strain_map(&spectra, &reference, &settings)?;

    let mut rows = Vec::new();
    for (iy, &yv) in map.ys.iter().enumerate() {
        for (ix, &xv) in map.xs.iter().enumerate() {
            let mut row = vec![cell(xv), cell(yv)];
            match map.at(ix, iy) {
                Some(m) => {
                    let e = |v: crate::Estimate| [cell(v.value), cell(v.sigma)];
                    row.extend([
                        cell(m.shifts.e1.value),
                        cell(m.shifts.e2.value),
                        opt_cell(m.shifts.a1.map(|a| a.value)),
                    ]);
                    row.extend(e(m.stress.para));
                    row.extend(e(m.stress.perp));
                    row.extend(e(m.strain.para));
                    row.extend(e(m.strain.perp));
                }
                None => row.extend(std::iter::repeat_n(String::new(), 11)),
            }
            rows.push(row);
        }
    }
    ctx.csv(
        "strain_map.csv",
        &[
            "x_um",
            "y_um",
            "shift_e1_cm1",
            "shift_e2_cm1",
            "shift_a1_cm1",
            "stress_para_gpa",
            "stress_para_err_gpa",
            "stress_perp_gpa",
            "stress_perp_err_gpa",
            "eps_para",
            "eps_para_err",
            "eps_perp",
            "eps_perp_err",
        ],
        &rows,
    )?;
    let fitted = map.cells.iter().filter(|c| c.is_some()).count();
    Ok(json!({
        "nx": map.xs.len(),
        "ny": map.ys.len(),
        "spectra": spectra.len(),
        "fitted": fitted,
        "failures": map.failures.iter().map(|((x, y), why)| json!({ "x_um": x, "y_um": y, "reason": why })).collect::<Vec<_>>(),
    }))
}
