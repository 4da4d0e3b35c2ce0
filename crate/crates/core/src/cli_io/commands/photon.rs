use serde_json::{json, Value as Json};

use crate::cli_io::config::RunConfig;
use crate::cli_io::output::cell;
use crate::cli_io::CliError;
use crate::photon_stats::{
    self as ps, correlate, echo_trace, gate, odmr_spectrum, pulsed_g2_envelope, rabi_trace, saturation_curve, snr,
    Background, EmitterParams, EnvelopeOptions, Excitation, FitResult, PhotonError, SaturationModel, SaturationOptions,
    SnrDefinition, SurfaceBackground, TimeTagStream,
};

use super::{estimate, Context};

/// Seconds to whole picoseconds.
fn ps_of(seconds: f64) -> u64 {
    (seconds * 1e12).round() as u64
}

pub fn g2(ctx: &mut Context) -> Result<Json, CliError> {
    let c = ctx.config;
    let (path, bytes) = ctx.read_input("input.tags")?.expect("required key");
    let csv = match c.text("input.format") {
        "csv" => true,
        "binary" => false,
        _ => path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")),
    };
    let parsed = if csv { TimeTagStream::read_csv(&bytes[..]) } else { TimeTagStream::read_binary(&bytes[..]) };
    let mut stream = parsed.map_err(|e| match e {
        PhotonError::TruncatedRecord(_) | PhotonError::Csv(_) | PhotonError::Io(_) => {
            CliError::Input { path: path.clone(), message: e.to_string() }
        }
        other => other.into(),
    })?;

    if let Some(period) = c.opt_number("gate.period") {
        let (Some(from), Some(to)) = (c.opt_number("gate.from"), c.opt_number("gate.to")) else {
            return Err(ctx.conflict("gate.period", "a gate needs both gate.from and gate.to"));
        };
        stream = gate(&stream, ps_of(period), ps_of(c.number("gate.offset")), ps_of(from), ps_of(to))?;
    } else if let Some(k) = ["gate.from", "gate.to"].into_iter().find(|k| c.is_user_set(k)) {
        return Err(ctx.conflict(k, "gate bounds need gate.period"));
    }

    let (a, b) = (c.integer("correlation.channel_a") as u8, c.integer("correlation.channel_b") as u8);
    let (window, width) = (ps_of(c.number("correlation.window")), ps_of(c.number("correlation.binwidth")));
    if width == 0 {
        return Err(ctx.conflict("correlation.binwidth", "bin width rounds to zero picoseconds"));
    }
    let raw = correlate(&stream, a, b, window, width)?;
    let envelope = match c.opt_number("correlation.rep_rate") {
        Some(rate) => {
            let options = EnvelopeOptions {
                exclude_nearest: c.integer("correlation.exclude_nearest") as usize,
                half_window_ps: c.opt_number("correlation.half_window").map(|h| h * 1e12),
            };
            Some((1e12 / rate, pulsed_g2_envelope(&raw, 1e12 / rate, &options)?))
        }
        None => None,
    };
    let hist = match c.text("correlation.normalization") {
        "raw" => raw,
        "long-delay" => raw.normalize_long_delay(c.number("correlation.long_delay") * 1e12)?,
        _ => raw.normalize_poisson()?,
    };

    let (centers, values, errors) = (hist.centers(), hist.values(), hist.errors());
    let rows: Vec<Vec<String>> = (0..hist.counts.len())
        .map(|k| vec![cell(centers[k] * 1e-3), hist.counts[k].to_string(), cell(values[k]), cell(errors[k])])
        .collect();
    ctx.csv("g2_histogram.csv", &["delay_ns", "counts", "g2", "g2_err"], &rows)?;
    let zero = hist.counts.len() / 2;
    let mut summary = json!({
        "events_a": hist.events_a,
        "events_b": hist.events_b,
        "duration_s": hist.duration_ps as f64 * 1e-12,
        "normalization": hist.normalization,
        "g2_zero_delay_bin": { "value": values[zero], "sigma": errors[zero] },
    });
    if let Some((period, env)) = envelope {
        let rows: Vec<Vec<String>> = env
            .orders
            .iter()
            .zip(&env.areas)
            .map(|(&k, &area)| vec![k.to_string(), cell(k as f64 * period * 1e-3), cell(area)])
            .collect();
        ctx.csv("g2_peaks.csv", &["order", "delay_ns", "area_counts"], &rows)?;
        summary["pulsed"] = json!({
            "g2_zero": estimate(env.g2_zero),
            "side_peak_mean_counts": estimate(env.side_mean),
            "peaks": env.orders.len(),
        });
    }
    Ok(summary)
}

/// Data from `[input] data`, or generated from `[synthetic]` and written
/// as `data.csv`.
fn trace(
    ctx: &mut Context,
    header: [&str; 2],
    generate: impl FnOnce(&RunConfig) -> (Vec<f64>, Vec<f64>),
) -> Result<(Vec<f64>, Vec<f64>, &'static str), CliError> {
    let c = ctx.config;
    if c.opt_text("input.data").is_some() {
        if let Some(k) = c.settings().keys().find(|k| k.starts_with("synthetic.") && c.is_user_set(k)) {
            return Err(ctx.conflict(k, "synthetic settings cannot be combined with input.data"));
        }
        let t = ctx.read_table("input.data", 2)?.expect("data is set");
        return Ok((t.column(0), t.column(1), "input"));
    }
    let (x, y) = generate(c);
    let rows: Vec<Vec<String>> = x.iter().zip(&y).map(|(&a, &b)| vec![cell(a), cell(b)]).collect();
    ctx.csv("data.csv", &header, &rows)?;
    Ok((x, y, "synthetic"))
}

/// Fit curve CSV plus the JSON summary shared by every fitter.
#[allow(clippy::too_many_arguments)]
fn report(
    ctx: &mut Context,
    fit: &FitResult,
    x: &[f64],
    y: &[f64],
    header: [&str; 4],
    extra: Option<(&str, Vec<f64>)>,
    source: &str,
    units: Json,
) -> Result<Json, CliError> {
    let model: Vec<f64> = x.iter().map(|&v| fit.evaluate(v)).collect();
    let residuals: Vec<f64> = y.iter().zip(&model).map(|(a, m)| a - m).collect();
    let mut cols: Vec<&str> = header.to_vec();
    if let Some((name, _)) = &extra {
        cols.push(name);
    }
    let rows: Vec<Vec<String>> = (0..x.len())
        .map(|k| {
            let mut row = vec![cell(x[k]), cell(y[k]), cell(model[k]), cell(residuals[k])];
            if let Some((_, v)) = &extra {
                row.push(cell(v[k]));
            }
            row
        })
        .collect();
    ctx.csv("fit_curve.csv", &cols, &rows)?;
    Ok(json!({
        "model": fit.model,
        "parameters": fit.parameters,
        "units": units,
        "residual_norm": fit.residual_norm,
        "residuals": residuals,
        "converged": fit.converged,
        "flags": fit.flags,
        "data": source,
    }))
}

fn saturation_model(word: &str, rep_rate: Option<f64>) -> SaturationModel {
    match word {
        "hyperbolic" => SaturationModel::Hyperbolic,
        "exponential" => SaturationModel::Exponential,
        _ => SaturationModel::for_rep_rate(rep_rate),
    }
}

pub fn fit_saturation(ctx: &mut Context) -> Result<Json, CliError> {
    let c = ctx.config;
    let rep_rate = c.opt_number("fit.rep_rate");
    let seed = c.seed();
    let (p, y, source) = trace(ctx, ["power_mw", "rate_cps"], |c| {
        let powers: Vec<f64> = c.list("synthetic.powers").iter().map(|w| w * 1e3).collect();
        let model = saturation_model(c.text("synthetic.model"), rep_rate);
        let y = saturation_curve(
            &powers,
            model,
            c.number("synthetic.i_s"),
            c.number("synthetic.p_s") * 1e3,
            c.number("synthetic.background") * 1e-3,
            c.number("synthetic.integration"),
            seed,
        );
        (powers, y)
    })?;
    let options = SaturationOptions {
        model: (c.text("fit.model") != "auto").then(|| saturation_model(c.text("fit.model"), rep_rate)),
        linear_background: c.flag("fit.linear_background"),
    };
    let fit = ps::fit_saturation(&p, &y, rep_rate, &options)?;
    let definition = if c.text("fit.snr") == "shot-noise" { SnrDefinition::ShotNoise } else { SnrDefinition::Ratio };
    let model = if fit.model == SaturationModel::Hyperbolic.id() {
        SaturationModel::Hyperbolic
    } else {
        SaturationModel::Exponential
    };
    let (i_s, p_s, b) = (fit.get("i_s").unwrap().value, fit.get("p_s").unwrap().value, fit.get("b").unwrap().value);
    let snrs: Vec<f64> = p.iter().map(|&x| snr(i_s * model.shape(x, p_s), b * x, definition)).collect();
    report(
        ctx,
        &fit,
        &p,
        &y,
        ["power_mw", "rate_cps", "model_cps", "residual_cps"],
        Some(("snr", snrs)),
        source,
        json!({ "i_s": "cps", "p_s": "mW", "b": "cps/mW" }),
    )
}

pub fn fit_odmr(ctx: &mut Context) -> Result<Json, CliError> {
    let seed = ctx.config.seed();
    let (f, y, source) = trace(ctx, ["frequency_mhz", "signal"], |c| {
        let f: Vec<f64> = c.list("synthetic.frequencies").iter().map(|v| v * 1e-6).collect();
        let y = odmr_spectrum(
            &f,
            c.number("synthetic.center") * 1e-6,
            c.number("synthetic.fwhm") * 1e-6,
            c.number("synthetic.contrast"),
            c.number("synthetic.offset"),
            c.number("synthetic.noise"),
            seed,
        );
        (f, y)
    })?;
    let fit = ps::fit_odmr(&f, &y)?;
    let units = json!({ "center": "MHz", "fwhm": "MHz", "contrast": "", "offset": "" });
    report(ctx, &fit, &f, &y, ["frequency_mhz", "signal", "model", "residual"], None, source, units)
}

pub fn fit_rabi(ctx: &mut Context) -> Result<Json, CliError> {
    let seed = ctx.config.seed();
    let (t, y, source) = trace(ctx, ["time_us", "signal"], |c| {
        let t: Vec<f64> = c.list("synthetic.times").iter().map(|v| v * 1e6).collect();
        let y = rabi_trace(
            &t,
            c.number("synthetic.f_rabi") * 1e-6,
            c.number("synthetic.tau") * 1e6,
            c.number("synthetic.amplitude"),
            c.number("synthetic.phase").to_radians(),
            c.number("synthetic.offset"),
            c.number("synthetic.noise"),
            seed,
        );
        (t, y)
    })?;
    let fit = ps::fit_rabi(&t, &y)?;
    let units =
        json!({ "f_rabi": "MHz", "tau": "us", "decay_rate": "1/us", "amplitude": "", "phase": "rad", "offset": "" });
    report(ctx, &fit, &t, &y, ["time_us", "signal", "model", "residual"], None, source, units)
}

pub fn fit_echo(ctx: &mut Context) -> Result<Json, CliError> {
    let seed = ctx.config.seed();
    let (d, y, source) = trace(ctx, ["delay_us", "signal"], |c| {
        let d: Vec<f64> = c.list("synthetic.delays").iter().map(|v| v * 1e6).collect();
        let y = echo_trace(
            &d,
            c.number("synthetic.t2") * 1e6,
            c.number("synthetic.stretch"),
            c.number("synthetic.amplitude"),
            c.number("synthetic.offset"),
            c.number("synthetic.noise"),
            seed,
        );
        (d, y)
    })?;
    let fit = ps::fit_hahn_echo(&d, &y, ctx.config.flag("fit.stretched"))?;
    let units = json!({ "t2": "us", "amplitude": "", "stretch": "", "offset": "" });
    report(ctx, &fit, &d, &y, ["delay_us", "signal", "model", "residual"], None, source, units)
}

pub fn simulate_emitter(ctx: &mut Context) -> Result<Json, CliError> {
    let c = ctx.config;
    let excitation = match c.text("emitter.excitation") {
        "continuous" => Excitation::Continuous { rate_hz: c.number("emitter.pump_rate") },
        _ => Excitation::Pulsed {
            rep_rate_hz: c.number("emitter.rep_rate"),
            probability: c.number("emitter.probability"),
        },
    };
    let background = match c.opt_number("emitter.g2_target") {
        Some(_) if c.is_user_set("emitter.background_rate") => {
            return Err(ctx.conflict("emitter.g2_target", "set either g2_target or background_rate, not both"));
        }
        Some(g2_zero) => Background::G2Target { g2_zero },
        None => Background::Rate { cps: c.number("emitter.background_rate") },
    };
    let params = EmitterParams {
        excitation,
        lifetime_ps: c.number("emitter.lifetime") * 1e12,
        shelving_probability: c.number("emitter.shelving_probability"),
        metastable_lifetime_ps: c.number("emitter.metastable_lifetime") * 1e12,
        detection_efficiency: c.number("emitter.detection_efficiency"),
        background,
        surface: c
            .opt_number("emitter.surface_rate")
            .map(|rate_cps| SurfaceBackground { rate_cps, lifetime_ps: c.number("emitter.surface_lifetime") * 1e12 }),
        jitter_ps: c.number("emitter.jitter") * 1e12,
        duration_ps: ps_of(c.number("emitter.duration")),
        seed: c.seed(),
    };
    ctx.constant("emitter", &params);
    let stream = ps::simulate_emitter(&params)?;

    let format = c.text("export.format");
    if format != "csv" {
        let mut bytes = Vec::with_capacity(stream.len() * ps::RECORD_BYTES);
        stream.write_binary(&mut bytes).expect("in-memory write");
        ctx.write("tags.bin", &bytes)?;
    }
    if format != "binary" {
        let mut bytes = Vec::new();
        stream.write_csv(&mut bytes)?;
        ctx.write("tags.csv", &bytes)?;
    }
    let per_channel: Vec<Json> = stream
        .channels()
        .map(|ch| json!({ "channel": ch, "events": stream.events().iter().filter(|e| e.channel == ch).count() }))
        .collect();
    Ok(json!({
        "events": stream.len(),
        "channels": per_channel,
        "duration_ps": stream.duration_ps(),
        "mean_rate_cps": stream.len() as f64 / (stream.duration_ps() as f64 * 1e-12),
    }))
}
