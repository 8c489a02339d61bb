//! End-to-end checks of the command-line interface: artifacts, exit codes
//! and byte-level determinism.

use std::path::Path;
use std::process::{Command, Output};

use qpmkit::jsi::{synthesize_timetags, DispersionMap, SynthesisConfig};
use qpmkit::spectral::{build_jsa, FrequencyGrid, PmfSource, PumpEnvelope};

fn qpmkit_cmd(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpmkit"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn report_value(report: &str, key: &str) -> f64 {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("missing key '{key}' in report:\n{report}"))
        .parse()
        .expect("numeric report value")
}

#[test]
fn design_writes_deterministic_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = qpmkit_cmd(&["design", "--out", "run1"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let first = read(&dir.path().join("run1"), "domains.csv");
    let report = read(&dir.path().join("run1"), "design_report.txt");
    assert!(report.contains("design = apodized"));
    assert!(report.contains("sigma_mm = 6.38"));
    let effective = report_value(&report, "effective_nonlinearity");
    assert!(effective > 0.5 && effective < 1.0);

    // Byte-identical rerun.
    let out = qpmkit_cmd(&["design", "--out", "run2"], dir.path());
    assert!(out.status.success());
    let second = read(&dir.path().join("run2"), "domains.csv");
    assert_eq!(first, second);
}

#[test]
fn flat_design_is_periodic() {
    let dir = tempfile::tempdir().unwrap();
    let out = qpmkit_cmd(&["design", "--flat", "--out", "."], dir.path());
    assert!(out.status.success());
    let report = read(dir.path(), "design_report.txt");
    assert!(report.contains("design = periodic"));
    let csv = read(dir.path(), "domains.csv");
    assert_eq!(csv.lines().next(), Some("width_um,sign"));
    assert_eq!(csv.lines().count() - 1, 1333);
}

#[test]
fn invalid_sigma_exits_with_config_code_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = qpmkit_cmd(&["design", "--sigma-mm=-2.0"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("sigma_mm"), "stderr: {stderr}");
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), "[crystal]\nlenght_mm = 30.0\n").unwrap();
    let out = qpmkit_cmd(&["design", "--config", "run.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("lenght_mm"), "stderr: {stderr}");
}

#[test]
fn simulate_reports_purity_and_filter_fraction() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), "[grid]\npoints = 96\n").unwrap();
    let out = qpmkit_cmd(
        &["simulate", "--config", "run.toml", "--filter-fwhm-nm", "7.4"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read(dir.path(), "simulate_report.txt");
    let purity = report_value(&report, "purity");
    assert!((purity - 0.988).abs() < 0.01, "purity {purity}");
    let fraction = report_value(&report, "filter_transmitted_fraction");
    assert!(fraction > 0.95 && fraction <= 1.0);
    let brightness = report_value(&report, "relative_brightness_vs_periodic");
    assert!(brightness > 0.0 && brightness < 1.0);
    assert!(dir.path().join("pmf.csv").exists());
    assert!(dir.path().join("jsa_intensity.csv").exists());
    assert!(dir.path().join("jsa_meta.txt").exists());

    // The intensity matrix matches the configured grid.
    let rows = read(dir.path(), "jsa_intensity.csv").lines().count();
    assert_eq!(rows, 96);

    // Bit-level reproducibility of the spectral outputs.
    let out = qpmkit_cmd(
        &[
            "simulate",
            "--config",
            "run.toml",
            "--filter-fwhm-nm",
            "7.4",
            "--out",
            "rerun",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    assert_eq!(
        read(dir.path(), "jsa_intensity.csv"),
        read(&dir.path().join("rerun"), "jsa_intensity.csv")
    );
    assert_eq!(
        read(dir.path(), "simulate_report.txt"),
        read(&dir.path().join("rerun"), "simulate_report.txt")
    );
}

#[test]
fn sweep_sigma_emits_named_parameter_column() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        "[grid]\npoints = 64\n[sweep]\nsigma_fractions = [8.0, 4.7, 2.0]\n",
    )
    .unwrap();
    let out = qpmkit_cmd(
        &["sweep", "--parameter", "sigma", "--config", "run.toml"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(dir.path(), "sweep_sigma.csv");
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("sigma_mm,purity,relative_brightness,side_lobe_level")
    );
    assert_eq!(lines.count(), 3);
}

#[test]
fn sweep_duration_peaks_at_matched_pulse() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        "[grid]\npoints = 64\n[sweep]\ndurations_ps = [0.9, 1.3, 1.7]\n",
    )
    .unwrap();
    let out = qpmkit_cmd(
        &["sweep", "--parameter", "duration", "--config", "run.toml"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(dir.path(), "sweep_duration.csv");
    assert!(csv.starts_with(
        "duration_ps,purity,relative_brightness,side_lobe_level,sqrt_jsi_proxy_purity"
    ));
    let summary = read(dir.path(), "sweep_summary.txt");
    assert!((report_value(&summary, "best_value") - 1.3).abs() < 1e-9);
}

#[test]
fn rates_report_matches_hand_arithmetic() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("rates.csv"),
        "singles_signal_hz,singles_idler_hz,coincidences_hz,clock_hz,pump_power_mw\n\
         1000,1000,675,80900000,10\n",
    )
    .unwrap();
    std::fs::write(
        dir.path().join("scan.csv"),
        "abscissa,visibility,std_error\n1,0.979,0.005\n2,0.978,0.005\n3,0.977,0.005\n",
    )
    .unwrap();
    let out = qpmkit_cmd(
        &["rates", "--rates", "rates.csv", "--scan", "scan.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read(dir.path(), "rates_report.txt");
    assert!((report_value(&report, "heralding_mean") - 0.675).abs() < 1e-12);
    let collection = report_value(&report, "collection_efficiency");
    assert!((collection - 0.9161).abs() < 5e-4, "collection {collection}");
    let intercept = report_value(&report, "intercept");
    assert!((intercept - 0.98).abs() < 1e-9, "intercept {intercept}");
    assert!(dir.path().join("visibility_fit.csv").exists());
}

#[test]
fn rates_with_perfect_detector_reduces_to_heralding() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("rates.csv"),
        "singles_signal_hz,singles_idler_hz,coincidences_hz,clock_hz,pump_power_mw\n\
         1000,1000,675,80900000,\n",
    )
    .unwrap();
    let out = qpmkit_cmd(
        &[
            "rates",
            "--rates",
            "rates.csv",
            "--detector-eff",
            "1.0",
            "--optical-loss",
            "0.0",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let report = read(dir.path(), "rates_report.txt");
    assert_eq!(report_value(&report, "collection_efficiency"), 0.675);
    assert!(report.contains("brightness_cc_per_mw_s = n/a"));
}

#[test]
fn reconstruct_round_trips_synthetic_tags() {
    let dir = tempfile::tempdir().unwrap();
    // Synthesize a stream from a small simulated JSA and feed it through the
    // CLI in both file formats.
    let model = qpmkit::dispersion::DispersionModel::ktp();
    let geometry = qpmkit::dispersion::telecom_ktp_geometry(&model).unwrap();
    let config = qpmkit::domain::track_domains(
        &qpmkit::domain::TargetProfile::new(6.38e-3, 30e-3).unwrap(),
        geometry.poling_period(),
        qpmkit::domain::TrackOptions::default(),
    )
    .unwrap();
    let env = PumpEnvelope::sech2(geometry.pump_center(), 1.3e-12).unwrap();
    let grid = FrequencyGrid::default_for(&env, &geometry, 128, 4.0).unwrap();
    let jsa = build_jsa(PmfSource::Domains(&config), &env, &model, &geometry, grid).unwrap();
    let stream = synthesize_timetags(
        &jsa,
        &DispersionMap::telecom_default(),
        &SynthesisConfig::clean(120_000, 7),
    )
    .unwrap();
    stream
        .save_csv(std::fs::File::create(dir.path().join("tags.csv")).unwrap())
        .unwrap();
    stream
        .save_binary(std::fs::File::create(dir.path().join("tags.bin")).unwrap())
        .unwrap();

    for (input, out_dir) in [("tags.csv", "csv_run"), ("tags.bin", "bin_run")] {
        let out = qpmkit_cmd(&["reconstruct", "--input", input, "--out", out_dir], dir.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let report = read(&dir.path().join(out_dir), "reconstruction_report.txt");
        let purity = report_value(&report, "purity_sqrt_jsi");
        assert!((purity - 0.988).abs() < 0.03, "purity {purity}");
        assert!(dir.path().join(out_dir).join("histogram.csv").exists());
        assert!(dir.path().join(out_dir).join("background.txt").exists());
        assert!(dir.path().join(out_dir).join("convergence.csv").exists());
    }
    // Identical purities from both formats.
    let csv_report = read(&dir.path().join("csv_run"), "reconstruction_report.txt");
    let bin_report = read(&dir.path().join("bin_run"), "reconstruction_report.txt");
    assert_eq!(
        report_value(&csv_report, "purity_sqrt_jsi"),
        report_value(&bin_report, "purity_sqrt_jsi")
    );
}

#[test]
fn reconstruct_empty_input_reports_no_coincidences() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("empty.csv"), "channel,time_ps\n").unwrap();
    let out = qpmkit_cmd(&["reconstruct", "--input", "empty.csv"], dir.path());
    assert!(out.status.success());
    let report = read(dir.path(), "reconstruction_report.txt");
    assert!(report.contains("status = no-coincidences"));
    assert!(report.contains("purity_sqrt_jsi = n/a"));
}

#[test]
fn dispersion_model_loads_from_a_file_path() {
    let dir = tempfile::tempdir().unwrap();
    let bundled = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../qpmkit/data/ktp.toml")
        .canonicalize()
        .unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        format!("[dispersion]\nmodel = \"{}\"\n", bundled.display()),
    )
    .unwrap();
    let out = qpmkit_cmd(&["design", "--config", "run.toml"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read(dir.path(), "design_report.txt");
    let period = report_value(&report, "poling_period_um");
    assert!((period - 45.0366).abs() < 1e-3, "period {period}");

    // A broken model file is a configuration error.
    std::fs::write(dir.path().join("bad.toml"), "name = \"x\"\n").unwrap();
    std::fs::write(
        dir.path().join("run2.toml"),
        "[dispersion]\nmodel = \"bad.toml\"\n",
    )
    .unwrap();
    let out = qpmkit_cmd(&["design", "--config", "run2.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_data_file_exits_with_data_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = qpmkit_cmd(&["reconstruct", "--input", "nope.csv"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let out = qpmkit_cmd(&["rates", "--rates", "nope.csv"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}
