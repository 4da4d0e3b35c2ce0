use rayon::prelude::*;
use serde_json::{json, Value as Json};

use crate::cli_io::config::RunConfig;
use crate::cli_io::output::{cell, opt_cell};
use crate::cli_io::CliError;
use crate::mode_solver::{
    count_families, dipole_coupling_map, solve_cross_section, CrossSectionGeometry, ModeError, ModeSolverConfig,
    Polarization, SolveOptions,
};
use crate::taper_coupler::{
    adiabaticity_check, build_segments, default_segment_count, infer_interface_efficiency, plateau_width,
    propagate_both, propagate_eme, Direction, EmeSettings, SweepPoint, TaperProfile,
};

use super::Context;

fn polarization(name: &str) -> Polarization {
    match name {
        "scalar" => Polarization::Scalar,
        "quasi-te" => Polarization::QuasiTe,
        _ => Polarization::QuasiTm,
    }
}

/// Name of the dominant field component.
fn component(p: Polarization) -> &'static str {
    match p {
        Polarization::Scalar => "e",
        Polarization::QuasiTe => "ex",
        Polarization::QuasiTm => "ey",
    }
}

fn geometry(c: &RunConfig, width: f64) -> Result<CrossSectionGeometry, CliError> {
    let mut g = CrossSectionGeometry::new(width, c.number("geometry.apex_half_angle"))?;
    g.cladding_index = c.number("geometry.cladding_index");
    g.validate()?;
    Ok(g)
}

fn solver_config(c: &RunConfig) -> ModeSolverConfig {
    ModeSolverConfig {
        spacing: c.number("grid.spacing"),
        margin: c.opt_number("grid.margin"),
        subsamples: c.integer("grid.subsamples") as u32,
        max_modes: c.integer("grid.max_modes") as usize,
        degeneracy_tol: c.number("grid.degeneracy_tol"),
        solve: SolveOptions {
            polarization: polarization(c.text("grid.polarization")),
            decay_floor: c.number("grid.decay_floor"),
            ..SolveOptions::default()
        },
    }
}

fn dipole(c: &RunConfig) -> [f64; 3] {
    [c.number("dipole.x"), c.number("dipole.y"), c.number("dipole.z")]
}

fn nm(metres: f64) -> f64 {
    metres * 1e9
}

pub fn mode_solve(ctx: &mut Context) -> Result<Json, CliError> {
    let c = ctx.config;
    let wavelength = c.number("geometry.wavelength");
    let geom = geometry(c, c.number("geometry.width"))?;
    let cfg = solver_config(c);
    ctx.constant("core_index", &json!({ "model": geom.core_index, "at_wavelength": geom.core_index.at(wavelength) }));
    ctx.constant("solver", &cfg);

    let modes = solve_cross_section(&geom, wavelength, &cfg)?;
    let rows: Vec<Vec<String>> = modes
        .iter()
        .enumerate()
        .map(|(k, m)| {
            vec![
                k.to_string(),
                cell(m.n_eff),
                cell(m.propagation_constant() * 1e-6),
                m.decayed.to_string(),
                cell(m.boundary_ratio),
            ]
        })
        .collect();
    ctx.csv("modes.csv", &["mode", "n_eff", "beta_rad_per_um", "decayed", "boundary_ratio"], &rows)?;

    if c.flag("export.fields") {
        for (k, m) in modes.iter().enumerate() {
            let comp = component(m.polarization);
            let f = m.frame;
            let mut rows = Vec::with_capacity(f.nx * f.ny);
            for j in 0..f.ny {
                for i in 0..f.nx {
                    rows.push(vec![
                        cell(nm(f.x_center(i))),
                        cell(nm(f.y_center(j))),
                        cell(m.value_at(i, j)),
                        "0".into(),
                    ]);
                }
            }
            let (re, im) = (format!("re_{comp}_per_m"), format!("im_{comp}_per_m"));
            ctx.csv(&format!("mode_{k}.csv"), &["x_nm", "y_nm", &re, &im], &rows)?;
        }
    }
    Ok(json!({
        "width_nm": nm(geom.width),
        "wavelength_nm": nm(wavelength),
        "polarization": cfg.solve.polarization.name(),
        "guided_modes": count_families(&modes, cfg.degeneracy_tol),
        "n_eff": modes.iter().map(|m| m.n_eff).collect::<Vec<_>>(),
        "decayed": modes.iter().map(|m| m.decayed).collect::<Vec<_>>(),
    }))
}

struct SweepRow {
    width: f64,
    wavelength: f64,
    n_eff: Option<f64>,
    count: usize,
    beta_max: Option<f64>,
}

pub fn mode_sweep(ctx: &mut Context) -> Result<Json, CliError> {
    let c = ctx.config;
    let cfg = solver_config(c);
    let coupling = c.flag("sweep.coupling");
    let d = dipole(c);
    ctx.constant("solver", &cfg);
    let points: Vec<(f64, f64)> =
        c.list("sweep.wavelength").iter().flat_map(|&l| c.list("sweep.width").iter().map(move |&w| (l, w))).collect();
    let rows = points
        .par_iter()
        .map(|&(wavelength, width)| -> Result<SweepRow, CliError> {
            let g = geometry(c, width)?;
            let modes = solve_cross_section(&g, wavelength, &cfg)?;
            let beta_max = match coupling && !modes.is_empty() {
                false => None,
                true => match dipole_coupling_map(&g, wavelength, d, &cfg) {
                    Ok(map) => Some(map.max()),
                    Err(ModeError::NoGuidedMode) => None,
                    Err(e) => return Err(e.into()),
                },
            };
            Ok(SweepRow {
                width,
                wavelength,
                n_eff: modes.first().map(|m| m.n_eff),
                count: count_families(&modes, cfg.degeneracy_tol),
                beta_max,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                cell(nm(r.width)),
                cell(nm(r.wavelength)),
                opt_cell(r.n_eff),
                r.count.to_string(),
                opt_cell(r.beta_max),
            ]
        })
        .collect();
    ctx.csv("sweep.csv", &["width_nm", "wavelength_nm", "n_eff", "mode_count", "beta_max"], &table)?;

    let onsets: Vec<Json> = c
        .list("sweep.wavelength")
        .iter()
        .map(|&l| {
            let first = rows.iter().find(|r| r.wavelength == l && r.count >= 2).map(|r| nm(r.width));
            json!({ "wavelength_nm": nm(l), "multimode_from_width_nm": first })
        })
        .collect();
    Ok(json!({ "points": rows.len(), "multimode_onset": onsets }))
}

pub fn dipole_map(ctx: &mut Context) -> Result<Json, CliError> {
    let c = ctx.config;
    let wavelength = c.number("geometry.wavelength");
    let geom = geometry(c, c.number("geometry.width"))?;
    let cfg = solver_config(c);
    ctx.constant("solver", &cfg);
    let map = dipole_coupling_map(&geom, wavelength, dipole(c), &cfg)?;
    let f = map.frame;
    let mut rows = Vec::with_capacity(f.nx * f.ny);
    for j in 0..f.ny {
        for i in 0..f.nx {
            rows.push(vec![
                cell(nm(f.x_center(i))),
                cell(nm(f.y_center(j))),
                cell(nm(map.depth(j))),
                cell(map.at(i, j)),
                u8::from(map.core[j * f.nx + i]).to_string(),
            ]);
        }
    }
    ctx.csv("beta_map.csv", &["x_nm", "y_nm", "depth_nm", "beta", "core"], &rows)?;
    let (i, j) = map.argmax();
    Ok(json!({
        "dipole": map.dipole,
        "beta_max": map.max(),
        "argmax_x_nm": nm(f.x_center(i)),
        "argmax_depth_nm": nm(map.depth(j)),
        "cell_nm": [nm(f.dx), nm(f.dy)],
    }))
}

pub fn taper_sweep(ctx: &mut Context) -> Result<Json, CliError> {
    let c = ctx.config;
    let lengths = c.list("sweep.overlap_length");
    if lengths.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ctx.conflict("sweep.overlap_length", "overlap lengths must be strictly increasing"));
    }
    let profile = TaperProfile {
        waveguide_angle_deg: c.number("taper.waveguide_angle"),
        fiber_angle_deg: c.number("taper.fiber_angle"),
        fiber_index: c.number("taper.fiber_index"),
        tip_radius: c.number("taper.tip_radius"),
        overlap_length: lengths[0],
        gap: c.number("taper.gap"),
        wavelength: c.number("taper.wavelength"),
        waveguide: CrossSectionGeometry::new(c.number("taper.width"), c.number("taper.apex_half_angle"))?,
    };
    profile.validate()?;
    let settings = EmeSettings {
        spacing: c.number("eme.spacing"),
        margin: c.opt_number("eme.margin"),
        subsamples: c.integer("eme.subsamples") as u32,
        modes_per_segment: c.integer("eme.modes") as usize,
        segments: c.opt_integer("eme.segments").map(|n| n as usize),
        polarization: polarization(c.text("eme.polarization")),
    };
    let threshold = c.number("sweep.rate_threshold");
    ctx.constant("profile", &profile);
    ctx.constant("eme", &settings);
    let direction = c.text("sweep.direction");

    let points = lengths
        .par_iter()
        .map(|&length| -> Result<_, CliError> {
            let mut p = profile.clone();
            p.overlap_length = length;
            let n = settings.segments.unwrap_or_else(|| default_segment_count(&p));
            let stack = build_segments(&p, n)?;
            let results = match direction {
                "both" => {
                    let (a, b) = propagate_both(&stack, &settings)?;
                    vec![a, b]
                }
                "fiber-to-waveguide" => vec![propagate_eme(&stack, Direction::FiberToWaveguide, &settings)?],
                _ => vec![propagate_eme(&stack, Direction::WaveguideToFiber, &settings)?],
            };
            Ok((length, n, results, adiabaticity_check(&p, threshold).adiabatic))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    for (length, n, results, adiabatic) in &points {
        for r in results {
            rows.push(vec![
                cell(length * 1e6),
                r.direction.name().into(),
                cell(r.transmission),
                cell(r.guided_power),
                n.to_string(),
                adiabatic.to_string(),
            ]);
        }
    }
    ctx.csv(
        "taper_sweep.csv",
        &["overlap_length_um", "direction", "transmission", "guided_power", "segments", "adiabatic"],
        &rows,
    )?;

    let level = c.number("sweep.plateau_level");
    let mut summary = serde_json::Map::new();
    for dir in [Direction::WaveguideToFiber, Direction::FiberToWaveguide] {
        let curve: Vec<SweepPoint> = points
            .iter()
            .filter_map(|(l, n, rs, _)| {
                rs.iter().find(|r| r.direction == dir).map(|r| SweepPoint {
                    overlap_length: *l,
                    transmission: r.transmission,
                    segments: *n,
                })
            })
            .collect();
        let Some(best) = curve.iter().max_by(|a, b| a.transmission.total_cmp(&b.transmission)) else { continue };
        summary.insert(
            dir.name().into(),
            json!({
                "max_transmission": best.transmission,
                "best_overlap_length_um": best.overlap_length * 1e6,
                "plateau_level": level,
                "plateau_width_um": plateau_width(&curve, level) * 1e6,
            }),
        );
    }
    Ok(Json::Object(summary))
}

pub fn eta_wfi(ctx: &mut Context) -> Result<Json, CliError> {
    let c = ctx.config;
    let (t, coupler, wg) =
        (c.number("interface.transmission"), c.number("interface.coupler"), c.number("interface.waveguide"));
    let eta = infer_interface_efficiency(t, coupler, wg)?;
    Ok(json!({ "eta_wfi": eta, "transmission": t, "coupler": coupler, "waveguide": wg }))
}
