use serde_json::{json, Value as Json};

use crate::cli_io::config::RunConfig;
use crate::cli_io::output::cell;
use crate::cli_io::CliError;
use crate::spin_strain::{
    build_hamiltonian, levels, odmr_frequencies, odmr_vs_position, stark_shift, strain_shift, DeformationTensor,
    GroundStateParams, StrainProfile, StrainRow,
};

use super::Context;

fn params(c: &RunConfig) -> GroundStateParams {
    GroundStateParams {
        d: c.number("constants.d"),
        xi_para: c.number("constants.xi_para"),
        xi_perp: c.number("constants.xi_perp"),
        gamma_e: c.number("constants.gamma_e"),
        stark: c.number("constants.stark"),
    }
}

const TENSOR_KEYS: [&str; 6] =
    ["strain.u_xx", "strain.u_yy", "strain.u_zz", "strain.u_xy", "strain.u_xz", "strain.u_yz"];
const FIELD_KEYS: [&str; 3] = ["field.b_x", "field.b_y", "field.b_z"];

fn mhz(hz: f64) -> f64 {
    hz * 1e-6
}

pub fn spin_odmr(ctx: &mut Context) -> Result<Json, CliError> {
    let c = ctx.config;
    let p = params(c);
    ctx.constant("ground_state", &p);

    if c.opt_text("strain.profile").is_some() {
        if let Some(k) = TENSOR_KEYS.iter().chain(&FIELD_KEYS).find(|k| c.is_user_set(k)) {
            return Err(ctx.conflict(k, "cannot be combined with strain.profile"));
        }
        let table = ctx.read_table("strain.profile", 3)?.expect("profile is set");
        let rows = table.rows.iter().map(|r| StrainRow { position_um: r[0], eps_para: r[1], eps_perp: r[2] }).collect();
        let profile = StrainProfile::new(rows)?;
        let positions: Option<Vec<f64>> = c.opt_list("strain.positions").map(|l| l.iter().map(|x| x * 1e6).collect());
        let curve = odmr_vs_position(&profile, &p, positions.as_deref())?;
        let rows: Vec<Vec<String>> = curve
            .iter()
            .map(|&(x, f)| {
                let (para, perp) = profile.at(x);
                vec![cell(x), cell(para), cell(perp), cell(mhz(f)), cell(mhz(f - 2.0 * p.d))]
            })
            .collect();
        ctx.csv("odmr_vs_position.csv", &["position_um", "eps_para", "eps_perp", "odmr_mhz", "shift_mhz"], &rows)?;
        let freqs = curve.iter().map(|&(_, f)| mhz(f));
        return Ok(json!({
            "points": curve.len(),
            "odmr_min_mhz": freqs.clone().fold(f64::INFINITY, f64::min),
            "odmr_max_mhz": freqs.fold(f64::NEG_INFINITY, f64::max),
        }));
    }
    if c.is_user_set("strain.positions") {
        return Err(ctx.conflict("strain.positions", "positions need a strain.profile table"));
    }

    let u = |k: usize| c.number(TENSOR_KEYS[k]);
    let tensor = DeformationTensor::new([[u(0), u(3), u(4)], [u(3), u(1), u(5)], [u(4), u(5), u(2)]])?;
    let field = [c.number(FIELD_KEYS[0]), c.number(FIELD_KEYS[1]), c.number(FIELD_KEYS[2])];
    let system = build_hamiltonian(&p, &tensor, field)?;
    let lines = odmr_frequencies(&system);
    let (energies, weights) = levels(&system);
    let rows: Vec<Vec<String>> = lines
        .transitions
        .iter()
        .map(|t| vec![t.outer.to_string(), t.inner.to_string(), cell(mhz(t.frequency))])
        .collect();
    ctx.csv("transitions.csv", &["outer_level", "inner_level", "frequency_mhz"], &rows)?;
    Ok(json!({
        "frequencies_mhz": lines.frequencies.iter().map(|&f| mhz(f)).collect::<Vec<_>>(),
        "levels_mhz": energies.iter().map(|&e| mhz(e)).collect::<Vec<_>>(),
        "m32_weights": weights,
        "ambiguous": lines.ambiguous,
    }))
}

pub fn strain_shift_command(ctx: &mut Context) -> Result<Json, CliError> {
    let c = ctx.config;
    let p = params(c);
    ctx.constant("ground_state", &p);
    let s = strain_shift(&p, c.number("strain.eps_para"), c.number("strain.eps_perp"))?;
    let stark = stark_shift(&p, c.number("stark.field"))?;
    Ok(json!({
        "shift_hz": s.shift,
        "closed_form_hz": s.closed_form,
        "stark_shift_hz": stark,
        "odmr_hz": 2.0 * p.d + s.shift + stark,
    }))
}
