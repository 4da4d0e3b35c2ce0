//! End-to-end runs of the config-driven commands.

use std::fs;
use std::path::Path;

use serde_json::Value as Json;
use sicwfi::cli_io::{
    load_config, parse_config, run_command, CliError, RunConfig, RunManifest, MANIFEST_FILE, RESULT_FILE,
};

fn config(text: &str, out: &Path) -> RunConfig {
    let mut c = parse_config(text).unwrap_or_else(|e| panic!("{e}\n{text}"));
    c.override_output(out);
    c
}

fn manifest(dir: &Path) -> RunManifest {
    serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST_FILE)).unwrap()).unwrap()
}

fn result(dir: &Path) -> Json {
    serde_json::from_str(&fs::read_to_string(dir.join(RESULT_FILE)).unwrap()).unwrap()
}

#[test]
fn eta_wfi_inverts_the_two_pass_transmission() {
    let dir = tempfile::tempdir().unwrap();
    let text = "command = eta-wfi\n[interface]\ntransmission = 0.7744\ncoupler = 0.9\nwaveguide = 0.98\n";
    let report = run_command(&config(text, dir.path())).unwrap();
    let eta = report.summary["eta_wfi"].as_f64().unwrap();
    assert!((eta * eta * 0.9 * 0.98 - 0.7744).abs() < 1e-12, "{eta}");
    assert_eq!(result(dir.path()), report.summary);
    let m = manifest(dir.path());
    assert_eq!(m.status, "ok");
    assert_eq!(m.command, "eta-wfi");
    assert!(m.outputs.iter().any(|a| a.path == RESULT_FILE));
}

#[test]
fn simulation_is_reproducible_and_replays_from_its_manifest() {
    let root = tempfile::tempdir().unwrap();
    let text = "command = simulate-emitter\nseed = 7\nworkers = 1\n[emitter]\nduration = 20 ms\nbackground_rate = 2 kcps\n[export]\nformat = both\n";
    let (a, b, c) = (root.path().join("a"), root.path().join("b"), root.path().join("c"));
    run_command(&config(text, &a)).unwrap();
    run_command(&config(text, &b)).unwrap();
    let digests = |d: &Path| manifest(d).outputs.into_iter().map(|o| (o.path, o.sha256)).collect::<Vec<_>>();
    assert_eq!(digests(&a), digests(&b));
    assert!(!fs::read(a.join("tags.bin")).unwrap().is_empty());

    let mut replay = load_config(&a.join(MANIFEST_FILE)).unwrap();
    replay.override_output(&c);
    run_command(&replay).unwrap();
    assert_eq!(digests(&a), digests(&c));
    // Defaults come back as explicit settings; only values must agree.
    let values = |d: &Path| {
        let mut m = manifest(d).config;
        let map = m.as_object_mut().unwrap();
        map.remove("output");
        map.values().map(|s| s["value"].clone()).collect::<Vec<_>>()
    };
    assert_eq!(values(&a), values(&c));
}

#[test]
fn g2_of_simulated_tags() {
    let root = tempfile::tempdir().unwrap();
    let sim = root.path().join("sim");
    let text = "command = simulate-emitter\nseed = 3\n[emitter]\nduration = 200 ms\ndetection_efficiency = 0.1\ng2_target = 0.2\n";
    run_command(&config(text, &sim)).unwrap();
    let text = format!(
        "command = g2\n[input]\ntags = \"{}\"\n[correlation]\nwindow = 650 ns\nrep_rate = 10 MHz\n",
        sim.join("tags.bin").display()
    );
    let out = root.path().join("g2");
    let report = run_command(&config(&text, &out)).unwrap();
    let g2 = report.summary["pulsed"]["g2_zero"]["value"].as_f64().unwrap();
    assert!((g2 - 0.2).abs() < 0.1, "{g2}");
    assert!(out.join("g2_histogram.csv").exists() && out.join("g2_peaks.csv").exists());
    assert_eq!(manifest(&out).inputs.len(), 1);
}

#[test]
fn fitters_recover_synthetic_truth() {
    let root = tempfile::tempdir().unwrap();
    let cases = [
        ("fit-odmr", "center", 71.6, 0.5),
        ("fit-rabi", "f_rabi", 6.65, 0.1),
        ("fit-echo", "t2", 42.5, 2.0),
        ("fit-saturation", "i_s", 181e3, 20e3),
    ];
    for (command, name, truth, tol) in cases {
        let out = root.path().join(command);
        let report = run_command(&config(&format!("command = {command}\nseed = 1\n"), &out)).unwrap();
        let p = report.summary["parameters"].as_array().unwrap();
        let v = p.iter().find(|p| p["name"] == name).unwrap()["value"].as_f64().unwrap();
        assert!((v - truth).abs() < tol, "{command}: {name} = {v}");
        assert!(out.join("data.csv").exists() && out.join("fit_curve.csv").exists());
    }
}

#[test]
fn fit_from_a_data_file() {
    let root = tempfile::tempdir().unwrap();
    let data = root.path().join("echo.csv");
    let mut text = String::from("delay_us,signal\n");
    for k in 0..100 {
        let t = 1.5 * k as f64;
        text.push_str(&format!("{t},{}\n", 0.2 * (-t / 30.0).exp() + 0.4));
    }
    fs::write(&data, text).unwrap();
    let cfg = format!("command = fit-echo\n[input]\ndata = \"{}\"\n", data.display());
    let report = run_command(&config(&cfg, &root.path().join("out"))).unwrap();
    assert_eq!(report.summary["data"], "input");
    let t2 = report.summary["parameters"][0]["value"].as_f64().unwrap();
    assert!((t2 - 30.0).abs() < 1e-3, "{t2}");

    let clash = format!("command = fit-echo\n[input]\ndata = \"{}\"\n[synthetic]\nt2 = 3 us\n", data.display());
    let e = run_command(&config(&clash, &root.path().join("clash"))).unwrap_err();
    assert_eq!(e.code(), "config.invalid_value");
    assert_eq!(e.exit_code(), 2);
}

#[test]
fn raman_fit_of_a_synthetic_spectrum() {
    let root = tempfile::tempdir().unwrap();
    let spectrum = root.path().join("spectrum.csv");
    let mut text = String::from("wavenumber_cm1,counts\n");
    for k in 0..1200 {
        let x = 700.0 + 0.25 * k as f64;
        let l = |c: f64, a: f64, w: f64| a * w * w / ((x - c).powi(2) + w * w);
        text.push_str(&format!(
            "{x},{}\n",
            100.0 + l(797.0, 2000.0, 2.0) + l(776.5, 1500.0, 2.0) + l(964.0, 800.0, 4.0)
        ));
    }
    fs::write(&spectrum, text).unwrap();
    let cfg = format!("command = raman-fit\n[input]\nspectrum = \"{}\"\n", spectrum.display());
    let out = root.path().join("out");
    let report = run_command(&config(&cfg, &out)).unwrap();
    let peaks = fs::read_to_string(out.join("peaks.csv")).unwrap();
    assert_eq!(peaks.lines().count(), 4, "{peaks}");
    assert!(report.summary.to_string().contains("797"), "{}", report.summary);
}

#[test]
fn small_mode_solve() {
    let dir = tempfile::tempdir().unwrap();
    let text =
        "command = mode-solve\n[grid]\nspacing = 25 nm\nsubsamples = 2\nmax_modes = 2\n[export]\nfields = false\n";
    let report = run_command(&config(text, dir.path())).unwrap();
    assert!(report.summary["guided_modes"].as_u64().unwrap() >= 1, "{}", report.summary);
    let modes = fs::read_to_string(dir.path().join("modes.csv")).unwrap();
    assert!(modes.starts_with("mode,n_eff,"), "{modes}");
}

#[test]
fn failures_still_leave_a_manifest() {
    let root = tempfile::tempdir().unwrap();
    let out = root.path().join("out");
    let text = "command = g2\n[input]\ntags = \"missing.bin\"\n";
    let e = run_command(&config(text, &out)).unwrap_err();
    assert!(matches!(e, CliError::Io { .. }), "{e:?}");
    assert_eq!(e.exit_code(), 3);
    let m = manifest(&out);
    assert_eq!(m.status, "error");
    assert_eq!(m.error.unwrap().code, e.code());
    assert!(!out.join(RESULT_FILE).exists());

    let truncated = root.path().join("bad.bin");
    fs::write(&truncated, [1u8, 2, 3]).unwrap();
    let text = format!("command = g2\n[input]\ntags = \"{}\"\nformat = binary\n", truncated.display());
    let e = run_command(&config(&text, &root.path().join("t"))).unwrap_err();
    assert_eq!(e.exit_code(), 3, "{e}");
}

#[test]
fn outputs_never_replace_inputs() {
    let root = tempfile::tempdir().unwrap();
    let data = root.path().join("data.csv");
    fs::write(&data, "x,y\n0,1\n1,0.9\n2,0.8\n3,0.7\n4,0.65\n5,0.6\n6,0.58\n").unwrap();
    let cfg = format!("command = fit-echo\n[input]\ndata = \"{}\"\n", data.display());
    // Output next to the input: fit_curve.csv is fine, data.csv is untouched.
    let _ = run_command(&config(&cfg, root.path()));
    assert!(fs::read_to_string(&data).unwrap().starts_with("x,y\n0,1"));
}

#[test]
fn config_errors_point_at_the_line() {
    let e = parse_config("command = eta-wfi\n[interface]\ntransmission = 1.3\n").unwrap_err();
    assert_eq!(e.line, Some(3));
    assert_eq!(e.code(), "config.out_of_range");
    let e = parse_config("command = eta-wfi\n[interface]\ntransmission = 0.5\n").unwrap_err();
    assert_eq!(e.code(), "config.missing_key");
    assert_eq!(CliError::from(e).exit_code(), 2);
}
