//! Subcommand implementations. Every command is deterministic for a given
//! configuration and seed; reruns produce byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use qpmkit::analysis::{
    jsa_purity, schmidt_decompose, side_lobe_level, sweep_pulse_duration, sweep_sigma, SweepOptions,
};
use qpmkit::counting::{
    brightness_per_mw, collection_efficiency, estimate_gamma, fit_visibility_vs_power,
    klyshko_efficiency, AbscissaKind, RateMeasurement, VisibilityScan,
};
use qpmkit::dispersion::grating_vector;
use qpmkit::domain::{periodic_configuration, track_domains, DomainConfiguration, TargetProfile, TrackOptions};
use qpmkit::error::Error;
use qpmkit::jsi::{
    build_histogram, convergence_scan, estimate_background, histogram_purity, ingest_timetags_binary,
    ingest_timetags_csv, ChannelRoles, HistogramOptions, HistogramPurityMode, TimeTagStream,
};
use qpmkit::spectral::{
    apply_filter, build_jsa, pmf_from_domains, relative_brightness, wavelength_interval_to_angular,
    FilterArms, FrequencyGrid, JointSpectralAmplitude, PmfSource, SpectralFilter,
};

use crate::config::RunConfig;
use crate::CliError;

fn to_cli(e: Error) -> CliError {
    match e {
        Error::Data(_) | Error::Io(_) => CliError::Data(e.to_string()),
        other => CliError::Config(other.to_string()),
    }
}

fn create(out_dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Data(format!("output directory '{}': {e}", out_dir.display())))?;
    let path = out_dir.join(name);
    Ok(BufWriter::new(File::create(&path).map_err(|e| {
        CliError::Data(format!("cannot write '{}': {e}", path.display()))
    })?))
}

fn design_configuration(config: &RunConfig) -> Result<(DomainConfiguration, f64), CliError> {
    let model = config.dispersion.load_model()?;
    let geometry = config.geometry(&model)?;
    let period = geometry.poling_period();
    let length = config.crystal.length_m();
    let domains = if config.crystal.flat {
        periodic_configuration(length, period, config.crystal.duty).map_err(to_cli)?
    } else {
        let profile = TargetProfile::new(config.crystal.sigma_m(), length)
            .map_err(|e| CliError::Config(format!("crystal.sigma_mm: {e}")))?;
        track_domains(
            &profile,
            period,
            TrackOptions {
                subdivisions: config.crystal.subdivisions,
                ..TrackOptions::default()
            },
        )
        .map_err(to_cli)?
    };
    Ok((domains, period))
}

pub fn cmd_design(config: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    let (domains, period) = design_configuration(config)?;
    let model = config.dispersion.load_model()?;
    let geometry = config.geometry(&model)?;
    let kg = grating_vector(&model, &geometry).map_err(to_cli)?;

    domains
        .save_csv(create(out_dir, "domains.csv")?)
        .map_err(to_cli)?;

    let mut report = create(out_dir, "design_report.txt")?;
    writeln!(report, "design = {}", if config.crystal.flat { "periodic" } else { "apodized" })?;
    writeln!(report, "length_mm = {}", config.crystal.length_mm)?;
    if !config.crystal.flat {
        writeln!(report, "sigma_mm = {}", config.crystal.sigma_m() * 1e3)?;
    }
    writeln!(report, "poling_period_um = {}", period * 1e6)?;
    writeln!(report, "domain_count = {}", domains.domain_count())?;
    writeln!(report, "total_length_mm = {}", domains.total_length_m() * 1e3)?;
    let effective = qpmkit::domain::effective_nonlinearity(&domains, kg).map_err(to_cli)?;
    writeln!(report, "effective_nonlinearity = {effective}")?;
    writeln!(
        report,
        "side_lobe_level = {}",
        side_lobe_level(&domains, kg, domains.total_length_m())
    )?;
    Ok(())
}

struct Simulation {
    domains: DomainConfiguration,
    jsa: JointSpectralAmplitude,
    unfiltered: JointSpectralAmplitude,
    transmitted_fraction: Option<f64>,
}

fn simulate(config: &RunConfig, domains_file: Option<&PathBuf>) -> Result<Simulation, CliError> {
    let model = config.dispersion.load_model()?;
    let geometry = config.geometry(&model)?;
    let domains = match domains_file {
        Some(path) => DomainConfiguration::load_csv_path(path).map_err(to_cli)?,
        None => design_configuration(config)?.0,
    };
    let env = config.pump.envelope()?;
    let grid = FrequencyGrid::default_for(&env, &geometry, config.grid.points, config.grid.span_bandwidths)
        .map_err(to_cli)?;
    let unfiltered =
        build_jsa(PmfSource::Domains(&domains), &env, &model, &geometry, grid).map_err(to_cli)?;

    let (jsa, transmitted_fraction) = match &config.filter {
        None => (unfiltered.clone(), None),
        Some(f) => {
            let center = f
                .center_nm
                .map_or(geometry.signal_center(), |nm| {
                    qpmkit::constants::wavelength_to_angular(nm * 1e-9)
                });
            let arms = match f.arms.as_str() {
                "signal" => FilterArms::Signal,
                "idler" => FilterArms::Idler,
                "both" => FilterArms::Both,
                other => {
                    return Err(CliError::Config(format!(
                        "filter.arms must be signal|idler|both, got '{other}'"
                    )))
                }
            };
            let fwhm = wavelength_interval_to_angular(
                f.fwhm_nm * 1e-9,
                qpmkit::constants::angular_to_wavelength(center),
            );
            let filter = SpectralFilter::from_fwhm(center, fwhm, arms)
                .map_err(|e| CliError::Config(format!("filter.fwhm_nm: {e}")))?;
            let filtered = apply_filter(&unfiltered, &filter).map_err(to_cli)?;
            let fraction = relative_brightness(&filtered, &unfiltered);
            (filtered, Some(fraction))
        }
    };
    Ok(Simulation {
        domains,
        jsa,
        unfiltered,
        transmitted_fraction,
    })
}

pub fn cmd_simulate(
    config: &RunConfig,
    domains_file: Option<&PathBuf>,
    export_complex: bool,
    out_dir: &Path,
) -> Result<(), CliError> {
    let model = config.dispersion.load_model()?;
    let geometry = config.geometry(&model)?;
    let sim = simulate(config, domains_file)?;
    let kg = grating_vector(&model, &geometry).map_err(to_cli)?;

    // PMF over the quasi-phase-matched residual window ±8π/l.
    let length = sim.domains.total_length_m();
    let half = 8.0 * std::f64::consts::PI / length;
    let n = 2001;
    let dks: Vec<f64> = (0..n)
        .map(|k| kg - half + 2.0 * half * k as f64 / (n - 1) as f64)
        .collect();
    let pmf = pmf_from_domains(&sim.domains, &dks);
    pmf.save_csv(create(out_dir, "pmf.csv")?).map_err(to_cli)?;

    sim.jsa
        .save_intensity_csv(create(out_dir, "jsa_intensity.csv")?)
        .map_err(to_cli)?;
    sim.jsa
        .save_sidecar(create(out_dir, "jsa_meta.txt")?)
        .map_err(to_cli)?;
    if export_complex {
        sim.jsa
            .save_complex_csv(create(out_dir, "jsa_complex.csv")?)
            .map_err(to_cli)?;
    }

    let spectrum = schmidt_decompose(sim.jsa.values()).map_err(to_cli)?;
    let purity = spectrum.purity();

    // Brightness relative to duty-0.5 periodic poling of the same length.
    let env = config.pump.envelope()?;
    let grid = FrequencyGrid::default_for(&env, &geometry, config.grid.points, config.grid.span_bandwidths)
        .map_err(to_cli)?;
    let reference_cfg =
        periodic_configuration(length, geometry.poling_period(), 0.5).map_err(to_cli)?;
    let reference =
        build_jsa(PmfSource::Domains(&reference_cfg), &env, &model, &geometry, grid).map_err(to_cli)?;

    let mut report = create(out_dir, "simulate_report.txt")?;
    writeln!(report, "purity = {purity}")?;
    writeln!(report, "schmidt_number = {}", spectrum.schmidt_number())?;
    writeln!(
        report,
        "unfiltered_purity = {}",
        jsa_purity(&sim.unfiltered).map_err(to_cli)?
    )?;
    writeln!(
        report,
        "relative_brightness_vs_periodic = {}",
        relative_brightness(&sim.unfiltered, &reference)
    )?;
    if let Some(fraction) = sim.transmitted_fraction {
        writeln!(report, "filter_transmitted_fraction = {fraction}")?;
    }
    writeln!(report, "grid_points = {}", config.grid.points)?;
    writeln!(report, "domain_count = {}", sim.domains.domain_count())?;
    writeln!(report, "seed = {}", config.seed)?;
    Ok(())
}

pub enum SweepParameter {
    Sigma,
    Duration,
}

pub fn cmd_sweep(config: &RunConfig, parameter: SweepParameter, out_dir: &Path) -> Result<(), CliError> {
    let model = config.dispersion.load_model()?;
    let geometry = config.geometry(&model)?;
    let env = config.pump.envelope()?;
    let options = SweepOptions {
        grid_points: config.grid.points,
        span_bandwidths: config.grid.span_bandwidths,
        subdivisions: config.crystal.subdivisions,
    };
    let (result, csv_name) = match parameter {
        SweepParameter::Sigma => {
            let length = config.crystal.length_m();
            let sigmas: Vec<f64> = config
                .sweep
                .sigma_fractions
                .iter()
                .map(|f| length / f)
                .collect();
            (
                sweep_sigma(&sigmas, length, &env, &model, &geometry, options).map_err(to_cli)?,
                "sweep_sigma.csv",
            )
        }
        SweepParameter::Duration => {
            let (domains, _) = design_configuration(config)?;
            let durations: Vec<f64> = config.sweep.durations_ps.iter().map(|d| d * 1e-12).collect();
            (
                sweep_pulse_duration(
                    &durations,
                    &domains,
                    geometry.pump_center(),
                    &model,
                    &geometry,
                    options,
                )
                .map_err(to_cli)?,
                "sweep_duration.csv",
            )
        }
    };
    result.save_csv(create(out_dir, csv_name)?).map_err(to_cli)?;

    let best = result
        .purity
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite purity"))
        .expect("nonempty sweep");
    let mut summary = create(out_dir, "sweep_summary.txt")?;
    writeln!(summary, "parameter = {}", result.parameter)?;
    writeln!(summary, "values = {}", result.values.len())?;
    writeln!(summary, "best_value = {}", result.values[best.0])?;
    writeln!(summary, "best_purity = {}", best.1)?;
    writeln!(
        summary,
        "brightness_range = {} .. {}",
        result
            .relative_brightness
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min),
        result
            .relative_brightness
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    )?;
    writeln!(
        summary,
        "max_side_lobe_level = {}",
        result.side_lobe_level.iter().cloned().fold(0.0, f64::max)
    )?;
    Ok(())
}

fn ingest(path: &Path, config: &RunConfig) -> Result<TimeTagStream, CliError> {
    let roles = ChannelRoles::new(
        config.reconstruction.trigger_channel,
        config.reconstruction.signal_channel,
        config.reconstruction.idler_channel,
    )
    .map_err(to_cli)?;
    let clock = config.reconstruction.clock_period_ps;
    let file = File::open(path)
        .map_err(|e| CliError::Data(format!("time-tag file '{}': {e}", path.display())))?;
    let stream = if path.extension().is_some_and(|e| e == "bin" || e == "ttb") {
        ingest_timetags_binary(file, roles, clock)
    } else {
        ingest_timetags_csv(file, roles, clock)
    };
    stream.map_err(to_cli)
}

pub fn cmd_reconstruct(config: &RunConfig, input: &Path, out_dir: &Path) -> Result<(), CliError> {
    let stream = ingest(input, config)?;
    let options = HistogramOptions {
        bin_width_ps: config.reconstruction.bin_width_ps,
        window_ps: config.reconstruction.window_ps,
        signal_offset_ps: 0,
        idler_offset_ps: 0,
    };
    let histogram = build_histogram(&stream, options).map_err(to_cli)?;
    histogram
        .save_csv(create(out_dir, "histogram.csv")?)
        .map_err(to_cli)?;
    histogram
        .save_sidecar(create(out_dir, "histogram_meta.txt")?)
        .map_err(to_cli)?;

    let map = qpmkit::jsi::DispersionMap::new(
        config.reconstruction.dl_ps_per_nm,
        config.reconstruction.reference_wavelength_nm,
        config.reconstruction.fiber_length_km,
    )
    .map_err(|e| CliError::Config(format!("reconstruction.dl_ps_per_nm: {e}")))?;

    let mut report = create(out_dir, "reconstruction_report.txt")?;
    writeln!(report, "input_events = {}", stream.total_events())?;
    writeln!(report, "rejected_records = {}", stream.rejected_records())?;
    writeln!(report, "coincidences = {}", histogram.total())?;
    writeln!(report, "dl_ps_per_nm = {}", map.dl_ps_per_nm)?;
    writeln!(report, "reference_wavelength_nm = {}", map.reference_wavelength_nm)?;
    writeln!(
        report,
        "spectral_bin_nm = {}",
        map.time_to_wavelength(config.reconstruction.bin_width_ps as f64)
            - map.reference_wavelength_nm
    )?;

    if histogram.total() == 0 {
        writeln!(report, "status = no-coincidences")?;
        writeln!(report, "purity_sqrt_jsi = n/a")?;
        return Ok(());
    }

    let background = estimate_background(&histogram).map_err(to_cli)?;
    background
        .report(create(out_dir, "background.txt")?)
        .map_err(to_cli)?;

    let subtract = config.reconstruction.subtract_background;
    let sqrt_purity =
        histogram_purity(&histogram, HistogramPurityMode::SqrtJsi, subtract).map_err(to_cli)?;
    let jsi_purity =
        histogram_purity(&histogram, HistogramPurityMode::Jsi, subtract).map_err(to_cli)?;
    writeln!(report, "status = ok")?;
    writeln!(report, "background_subtracted = {subtract}")?;
    writeln!(report, "purity_sqrt_jsi = {sqrt_purity}")?;
    writeln!(report, "purity_jsi = {jsi_purity}")?;

    // Convergence over cumulative slices of the measurement.
    let last = stream
        .events(qpmkit::jsi::Role::Trigger)
        .last()
        .copied()
        .unwrap_or(0)
        + 1;
    let slices = config.reconstruction.convergence_intervals as u64;
    if slices >= 2 && last >= slices {
        let durations: Vec<u64> = (1..=slices).map(|k| last * k / slices).collect();
        let scan = convergence_scan(
            &stream,
            &durations,
            options,
            HistogramPurityMode::SqrtJsi,
            subtract,
            config.reconstruction.convergence_epsilon,
        )
        .map_err(to_cli)?;
        scan.save_csv(create(out_dir, "convergence.csv")?)
            .map_err(to_cli)?;
        match scan.plateau_index {
            Some(k) => writeln!(report, "convergence_plateau_index = {k}")?,
            None => writeln!(report, "convergence_plateau_index = none")?,
        }
    }
    Ok(())
}

pub fn cmd_rates(
    config: &RunConfig,
    rates_path: &Path,
    scan_path: Option<&PathBuf>,
    abscissa: AbscissaKind,
    detector_eff: f64,
    optical_loss: f64,
    out_dir: &Path,
) -> Result<(), CliError> {
    let _ = config;
    let file = File::open(rates_path)
        .map_err(|e| CliError::Data(format!("rates file '{}': {e}", rates_path.display())))?;
    let rows = RateMeasurement::from_csv(file).map_err(to_cli)?;
    if rows.is_empty() {
        return Err(CliError::Data(format!(
            "rates file '{}' has no measurements",
            rates_path.display()
        )));
    }

    let mut report = create(out_dir, "rates_report.txt")?;
    for (k, m) in rows.iter().enumerate() {
        let h = klyshko_efficiency(m).map_err(to_cli)?;
        writeln!(report, "[measurement {k}]")?;
        writeln!(report, "heralding_signal = {}", h.signal)?;
        writeln!(report, "heralding_idler = {}", h.idler)?;
        writeln!(report, "heralding_mean = {}", h.symmetric_mean())?;
        let collection = collection_efficiency(h.symmetric_mean(), detector_eff, optical_loss)
            .map_err(to_cli)?;
        writeln!(report, "collection_efficiency = {collection}")?;
        match estimate_gamma(m) {
            Ok(est) => {
                writeln!(report, "gamma = {}", est.gamma)?;
                writeln!(report, "pairs_per_pulse = {}", est.pairs_per_pulse)?;
                if let Some(tau) = est.tau_per_mw {
                    writeln!(report, "tau_per_mw = {tau}")?;
                }
            }
            Err(e) => writeln!(report, "gamma = n/a ({e})")?,
        }
        match brightness_per_mw(m) {
            Ok(b) => writeln!(report, "brightness_cc_per_mw_s = {b}")?,
            Err(_) => writeln!(report, "brightness_cc_per_mw_s = n/a")?,
        }
    }

    if let Some(path) = scan_path {
        let file = File::open(path)
            .map_err(|e| CliError::Data(format!("scan file '{}': {e}", path.display())))?;
        let scan = VisibilityScan::from_csv(file, abscissa).map_err(to_cli)?;
        let fit = fit_visibility_vs_power(&scan).map_err(to_cli)?;
        writeln!(report, "[visibility_fit]")?;
        writeln!(report, "intercept = {}", fit.intercept)?;
        writeln!(report, "intercept_std_error = {}", fit.intercept_std_error)?;
        writeln!(report, "slope = {}", fit.slope)?;
        writeln!(report, "slope_std_error = {}", fit.slope_std_error)?;
        writeln!(report, "weighted = {}", fit.weighted)?;

        let mut fit_csv = create(out_dir, "visibility_fit.csv")?;
        writeln!(fit_csv, "intercept,intercept_std_error,slope,slope_std_error")?;
        writeln!(
            fit_csv,
            "{},{},{},{}",
            fit.intercept, fit.intercept_std_error, fit.slope, fit.slope_std_error
        )?;
    }
    Ok(())
}
