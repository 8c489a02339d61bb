//! Dispersive reconstruction of joint spectral intensities from time-tagged
//! detection events.
//!
//! Photon arrival times behind a long dispersive fibre map linearly to
//! wavelength: λ = λ_ref + Δt/(D·L). For every trigger click the delays of
//! the next signal and idler clicks, folded into the analysis window, fill a
//! 2-D coincidence histogram whose Schmidt decomposition estimates the
//! source purity. A seeded synthetic event generator closes the loop as the
//! test oracle for the whole pipeline.

use std::collections::BTreeMap;
use std::io::{BufRead, Read, Write};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::analysis::{schmidt_decompose_real, SchmidtSource};
use crate::constants::{angular_to_wavelength, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::spectral::JointSpectralAmplitude;

/// Default dispersion-length product: 1 ps of delay per 0.0028 nm, the
/// timing resolution of a 1 ps tagger behind ~20 km of telecom fibre.
pub const DEFAULT_DL_PS_PER_NM: f64 = 1.0 / 0.0028;

/// Linear fibre-dispersion map between arrival-time offsets and wavelength.
#[derive(Debug, Clone, Copy)]
pub struct DispersionMap {
    pub dl_ps_per_nm: f64,
    pub reference_wavelength_nm: f64,
    pub fiber_length_km: f64,
}

impl DispersionMap {
    pub fn new(dl_ps_per_nm: f64, reference_wavelength_nm: f64, fiber_length_km: f64) -> Result<Self> {
        if dl_ps_per_nm == 0.0 || !dl_ps_per_nm.is_finite() {
            return Err(Error::InvalidInput(format!(
                "dispersion-length product must be finite and nonzero, got {dl_ps_per_nm}"
            )));
        }
        Ok(Self {
            dl_ps_per_nm,
            reference_wavelength_nm,
            fiber_length_km,
        })
    }

    /// Nominal 20 km telecom spool pinned to 1 ps ↔ 0.0028 nm at 1549.8 nm.
    pub fn telecom_default() -> Self {
        Self {
            dl_ps_per_nm: DEFAULT_DL_PS_PER_NM,
            reference_wavelength_nm: 1549.8,
            fiber_length_km: 20.0,
        }
    }

    /// λ (nm) for an arrival-time offset Δt (ps).
    pub fn time_to_wavelength(&self, dt_ps: f64) -> f64 {
        self.reference_wavelength_nm + dt_ps / self.dl_ps_per_nm
    }

    /// Inverse of [`Self::time_to_wavelength`].
    pub fn wavelength_to_time(&self, wavelength_nm: f64) -> f64 {
        (wavelength_nm - self.reference_wavelength_nm) * self.dl_ps_per_nm
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Trigger,
    Signal,
    Idler,
}

/// Which hardware channel id plays which role.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelRoles {
    pub trigger: u8,
    pub signal: u8,
    pub idler: u8,
}

impl ChannelRoles {
    pub fn new(trigger: u8, signal: u8, idler: u8) -> Result<Self> {
        if trigger == signal || trigger == idler || signal == idler {
            return Err(Error::InvalidInput("channel roles must be distinct".into()));
        }
        Ok(Self { trigger, signal, idler })
    }

    pub fn channel(&self, role: Role) -> u8 {
        match role {
            Role::Trigger => self.trigger,
            Role::Signal => self.signal,
            Role::Idler => self.idler,
        }
    }
}

impl Default for ChannelRoles {
    fn default() -> Self {
        Self {
            trigger: 0,
            signal: 1,
            idler: 2,
        }
    }
}

/// Validated per-channel event streams (timestamps in ps, 1 ps resolution,
/// nondecreasing within each channel).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeTagStream {
    channels: BTreeMap<u8, Vec<u64>>,
    roles: ChannelRoles,
    clock_period_ps: u64,
    rejected_records: usize,
}

impl TimeTagStream {
    pub fn new(
        mut channels: BTreeMap<u8, Vec<u64>>,
        roles: ChannelRoles,
        clock_period_ps: u64,
    ) -> Result<Self> {
        if clock_period_ps == 0 {
            return Err(Error::InvalidInput("clock period must be positive".into()));
        }
        for role in [Role::Trigger, Role::Signal, Role::Idler] {
            channels.entry(roles.channel(role)).or_default();
        }
        for (ch, times) in &channels {
            if times.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::Data(format!("channel {ch} timestamps are not monotonic")));
            }
        }
        Ok(Self {
            channels,
            roles,
            clock_period_ps,
            rejected_records: 0,
        })
    }

    pub fn roles(&self) -> ChannelRoles {
        self.roles
    }

    pub fn clock_period_ps(&self) -> u64 {
        self.clock_period_ps
    }

    /// Records that failed to parse during ingestion.
    pub fn rejected_records(&self) -> usize {
        self.rejected_records
    }

    pub fn events(&self, role: Role) -> &[u64] {
        &self.channels[&self.roles.channel(role)]
    }

    pub fn total_events(&self) -> usize {
        self.channels.values().map(Vec::len).sum()
    }

    /// All events of this stream truncated to timestamps < `cutoff_ps`.
    pub fn truncated(&self, cutoff_ps: u64) -> Self {
        let channels = self
            .channels
            .iter()
            .map(|(ch, times)| {
                let end = times.partition_point(|t| *t < cutoff_ps);
                (*ch, times[..end].to_vec())
            })
            .collect();
        Self {
            channels,
            roles: self.roles,
            clock_period_ps: self.clock_period_ps,
            rejected_records: self.rejected_records,
        }
    }

    /// Merge-sorted (time, channel) view of every event.
    fn merged_events(&self) -> Vec<(u64, u8)> {
        let mut all: Vec<(u64, u8)> = self
            .channels
            .iter()
            .flat_map(|(ch, times)| times.iter().map(move |t| (*t, *ch)))
            .collect();
        all.sort_unstable();
        all
    }

    /// CSV rows `channel,time_ps`, merged in time order.
    pub fn save_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "channel,time_ps")?;
        for (t, ch) in self.merged_events() {
            writeln!(out, "{ch},{t}")?;
        }
        Ok(())
    }

    /// Little-endian binary records of 9 bytes: u8 channel, u64 time (ps).
    pub fn save_binary<W: Write>(&self, mut out: W) -> Result<()> {
        for (t, ch) in self.merged_events() {
            out.write_all(&[ch])?;
            out.write_all(&t.to_le_bytes())?;
        }
        Ok(())
    }
}

fn known_channel(roles: &ChannelRoles, ch: u8) -> bool {
    ch == roles.trigger || ch == roles.signal || ch == roles.idler
}

/// Parse `channel,time_ps` CSV. Malformed lines are counted and skipped;
/// events on channels outside the role map and non-monotonic timestamps are
/// hard errors.
pub fn ingest_timetags_csv<R: Read>(
    input: R,
    roles: ChannelRoles,
    clock_period_ps: u64,
) -> Result<TimeTagStream> {
    let mut channels: BTreeMap<u8, Vec<u64>> = BTreeMap::new();
    let mut rejected = 0usize;
    let reader = std::io::BufReader::new(input);
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || (idx == 0 && trimmed.starts_with("channel")) {
            continue;
        }
        let mut parts = trimmed.split(',');
        let parsed = (
            parts.next().and_then(|v| v.trim().parse::<u8>().ok()),
            parts.next().and_then(|v| v.trim().parse::<u64>().ok()),
        );
        let (Some(ch), Some(t)) = parsed else {
            rejected += 1;
            continue;
        };
        if !known_channel(&roles, ch) {
            return Err(Error::Data(format!(
                "line {}: channel {ch} has no assigned role",
                idx + 1
            )));
        }
        channels.entry(ch).or_default().push(t);
    }
    let mut stream = TimeTagStream::new(channels, roles, clock_period_ps)?;
    stream.rejected_records = rejected;
    Ok(stream)
}

/// Parse the 9-byte binary record format; a truncated trailing record is
/// counted as rejected.
pub fn ingest_timetags_binary<R: Read>(
    mut input: R,
    roles: ChannelRoles,
    clock_period_ps: u64,
) -> Result<TimeTagStream> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let mut channels: BTreeMap<u8, Vec<u64>> = BTreeMap::new();
    let whole = bytes.len() / 9 * 9;
    for record in bytes[..whole].chunks_exact(9) {
        let ch = record[0];
        if !known_channel(&roles, ch) {
            return Err(Error::Data(format!("channel {ch} has no assigned role")));
        }
        let t = u64::from_le_bytes(record[1..9].try_into().expect("9-byte record"));
        channels.entry(ch).or_default().push(t);
    }
    let mut stream = TimeTagStream::new(channels, roles, clock_period_ps)?;
    stream.rejected_records = usize::from(whole != bytes.len());
    Ok(stream)
}

/// Binning of trigger-relative delays.
#[derive(Debug, Clone, Copy)]
pub struct HistogramOptions {
    pub bin_width_ps: u64,
    pub window_ps: u64,
    pub signal_offset_ps: i64,
    pub idler_offset_ps: i64,
}

impl Default for HistogramOptions {
    fn default() -> Self {
        Self {
            bin_width_ps: 50,
            window_ps: 12_500,
            signal_offset_ps: 0,
            idler_offset_ps: 0,
        }
    }
}

/// 2-D coincidence histogram over folded (signal, idler) delays.
#[derive(Debug, Clone)]
pub struct JsiHistogram {
    counts: Vec<u64>,
    n_bins: usize,
    options: HistogramOptions,
}

impl JsiHistogram {
    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn options(&self) -> HistogramOptions {
        self.options
    }

    pub fn count(&self, signal_bin: usize, idler_bin: usize) -> u64 {
        self.counts[signal_bin * self.n_bins + idler_bin]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n_bins, self.n_bins, |i, j| self.counts[i * self.n_bins + j] as f64)
    }

    /// Build directly from a count matrix (synthetic backgrounds, reloads).
    pub fn from_counts(counts: Vec<u64>, options: HistogramOptions) -> Result<Self> {
        let n_bins = (options.window_ps / options.bin_width_ps) as usize;
        if options.bin_width_ps == 0 || options.window_ps % options.bin_width_ps != 0 {
            return Err(Error::InvalidInput(
                "window must be a whole number of bins".into(),
            ));
        }
        if counts.len() != n_bins * n_bins {
            return Err(Error::InvalidInput(format!(
                "expected {n_bins}×{n_bins} counts, got {}",
                counts.len()
            )));
        }
        Ok(Self {
            counts,
            n_bins,
            options,
        })
    }

    /// Dense CSV of counts (rows = signal bins).
    pub fn save_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for i in 0..self.n_bins {
            let row: Vec<String> = (0..self.n_bins).map(|j| self.count(i, j).to_string()).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn save_sidecar<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "n_bins = {}", self.n_bins)?;
        writeln!(out, "bin_width_ps = {}", self.options.bin_width_ps)?;
        writeln!(out, "window_ps = {}", self.options.window_ps)?;
        writeln!(out, "signal_offset_ps = {}", self.options.signal_offset_ps)?;
        writeln!(out, "idler_offset_ps = {}", self.options.idler_offset_ps)?;
        writeln!(out, "total_counts = {}", self.total())?;
        Ok(())
    }
}

fn fold_delay(event: u64, trigger: u64, offset: i64, window: u64) -> u64 {
    let raw = (event - trigger) as i64 + offset;
    raw.rem_euclid(window as i64) as u64
}

/// For every trigger event, fold the delays of the next signal and idler
/// events into the window and bin them. Triggers with no later signal or
/// idler event produce no entry, so the total count equals the number of
/// valid trigger triples.
pub fn build_histogram(stream: &TimeTagStream, options: HistogramOptions) -> Result<JsiHistogram> {
    if options.bin_width_ps == 0 {
        return Err(Error::InvalidInput("bin width must be positive".into()));
    }
    if options.window_ps == 0 || options.window_ps % options.bin_width_ps != 0 {
        return Err(Error::InvalidInput(format!(
            "window {} ps must be a positive multiple of the bin width {} ps",
            options.window_ps, options.bin_width_ps
        )));
    }
    if options.window_ps > stream.clock_period_ps() {
        return Err(Error::InvalidInput(format!(
            "window {} ps exceeds the clock period {} ps",
            options.window_ps,
            stream.clock_period_ps()
        )));
    }
    let n_bins = (options.window_ps / options.bin_width_ps) as usize;
    let mut counts = vec![0u64; n_bins * n_bins];

    let triggers = stream.events(Role::Trigger);
    let signals = stream.events(Role::Signal);
    let idlers = stream.events(Role::Idler);
    let mut is = 0usize;
    let mut ii = 0usize;
    for &t in triggers {
        while is < signals.len() && signals[is] < t {
            is += 1;
        }
        while ii < idlers.len() && idlers[ii] < t {
            ii += 1;
        }
        if is == signals.len() || ii == idlers.len() {
            continue;
        }
        let ds = fold_delay(signals[is], t, options.signal_offset_ps, options.window_ps);
        let di = fold_delay(idlers[ii], t, options.idler_offset_ps, options.window_ps);
        let bs = (ds / options.bin_width_ps) as usize;
        let bi = (di / options.bin_width_ps) as usize;
        counts[bs * n_bins + bi] += 1;
    }
    Ok(JsiHistogram {
        counts,
        n_bins,
        options,
    })
}

/// Per-bin expectations of the dark-count artifacts: a uniform floor, a
/// stripe along the shifted diagonal (dark counts in the trigger channel)
/// and stripes parallel to each axis (one photon of the pair lost, replaced
/// by a dark count).
#[derive(Debug, Clone, Copy, Default)]
pub struct BackgroundModel {
    pub uniform_rate: f64,
    pub diagonal_rate: f64,
    /// Stripe at the pair's signal delay spanning all idler delays.
    pub axis_signal_rate: f64,
    /// Stripe at the pair's idler delay spanning all signal delays.
    pub axis_idler_rate: f64,
}

struct MaskGeometry {
    peak_signal: usize,
    peak_idler: usize,
    peak_halfwidth: usize,
    band_halfwidth: usize,
}

fn mask_geometry(h: &JsiHistogram) -> MaskGeometry {
    let n = h.n_bins;
    let (mut pi, mut pj, mut best) = (0usize, 0usize, 0u64);
    for i in 0..n {
        for j in 0..n {
            let c = h.count(i, j);
            if c > best {
                best = c;
                pi = i;
                pj = j;
            }
        }
    }
    MaskGeometry {
        peak_signal: pi,
        peak_idler: pj,
        peak_halfwidth: (n / 8).max(2),
        band_halfwidth: (n / 16).max(2),
    }
}

fn region_of(g: &MaskGeometry, n: usize, i: usize, j: usize) -> Region {
    let hw = g.peak_halfwidth;
    let in_peak = i.abs_diff(g.peak_signal) <= hw && j.abs_diff(g.peak_idler) <= hw;
    if in_peak {
        return Region::Peak;
    }
    let diag_offset = g.peak_idler as i64 - g.peak_signal as i64;
    let d = (j as i64 - i as i64 - diag_offset).rem_euclid(n as i64);
    let d = d.min(n as i64 - d);
    if d <= g.band_halfwidth as i64 {
        return Region::Diagonal;
    }
    if i.abs_diff(g.peak_signal) <= g.band_halfwidth {
        return Region::AxisSignal;
    }
    if j.abs_diff(g.peak_idler) <= g.band_halfwidth {
        return Region::AxisIdler;
    }
    Region::Open
}

#[derive(PartialEq, Eq, Clone, Copy)]
enum Region {
    Peak,
    Diagonal,
    AxisSignal,
    AxisIdler,
    Open,
}

/// Estimate the background rates from masked off-peak regions: the uniform
/// floor is the median of the open region, stripe rates are means over
/// their bands with the floor removed (clamped at zero).
pub fn estimate_background(h: &JsiHistogram) -> Result<BackgroundModel> {
    let n = h.n_bins;
    if h.total() == 0 {
        return Err(Error::Data("cannot estimate background of an empty histogram".into()));
    }
    let g = mask_geometry(h);
    let mut open = Vec::new();
    let (mut diag_sum, mut diag_n) = (0.0f64, 0usize);
    let (mut axs_sum, mut axs_n) = (0.0f64, 0usize);
    let (mut axi_sum, mut axi_n) = (0.0f64, 0usize);
    for i in 0..n {
        for j in 0..n {
            let c = h.count(i, j) as f64;
            match region_of(&g, n, i, j) {
                Region::Peak => {}
                Region::Diagonal => {
                    diag_sum += c;
                    diag_n += 1;
                }
                Region::AxisSignal => {
                    axs_sum += c;
                    axs_n += 1;
                }
                Region::AxisIdler => {
                    axi_sum += c;
                    axi_n += 1;
                }
                Region::Open => open.push(h.count(i, j)),
            }
        }
    }
    if open.len() < 16 {
        return Err(Error::Data(
            "peak mask covers nearly the whole window; cannot sample the background".into(),
        ));
    }
    open.sort_unstable();
    let uniform = if open.len() % 2 == 1 {
        open[open.len() / 2] as f64
    } else {
        0.5 * (open[open.len() / 2 - 1] + open[open.len() / 2]) as f64
    };
    let mean = |sum: f64, count: usize| if count == 0 { 0.0 } else { sum / count as f64 };
    Ok(BackgroundModel {
        uniform_rate: uniform,
        diagonal_rate: (mean(diag_sum, diag_n) - uniform).max(0.0),
        axis_signal_rate: (mean(axs_sum, axs_n) - uniform).max(0.0),
        axis_idler_rate: (mean(axi_sum, axi_n) - uniform).max(0.0),
    })
}

impl BackgroundModel {
    pub fn report<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "uniform_rate_per_bin = {}", self.uniform_rate)?;
        writeln!(out, "diagonal_rate_per_bin = {}", self.diagonal_rate)?;
        writeln!(out, "axis_signal_rate_per_bin = {}", self.axis_signal_rate)?;
        writeln!(out, "axis_idler_rate_per_bin = {}", self.axis_idler_rate)?;
        Ok(())
    }
}

/// Subtract the background expectation per bin, clamping at zero.
pub fn subtract_background(h: &JsiHistogram, model: &BackgroundModel) -> DMatrix<f64> {
    let n = h.n_bins;
    let g = mask_geometry(h);
    DMatrix::from_fn(n, n, |i, j| {
        let mut expected = model.uniform_rate;
        // Stripes run through the peak region too.
        let diag_offset = g.peak_idler as i64 - g.peak_signal as i64;
        let d = (j as i64 - i as i64 - diag_offset).rem_euclid(n as i64);
        let d = d.min(n as i64 - d);
        if d <= g.band_halfwidth as i64 {
            expected += model.diagonal_rate;
        }
        if i.abs_diff(g.peak_signal) <= g.band_halfwidth {
            expected += model.axis_signal_rate;
        }
        if j.abs_diff(g.peak_idler) <= g.band_halfwidth {
            expected += model.axis_idler_rate;
        }
        (h.count(i, j) as f64 - expected).max(0.0)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HistogramPurityMode {
    Jsi,
    SqrtJsi,
}

/// Schmidt purity of the (optionally background-subtracted) histogram; the
/// √JSI mode takes the element-wise square root first, which approximates
/// the magnitude of the underlying amplitude.
pub fn histogram_purity(
    h: &JsiHistogram,
    mode: HistogramPurityMode,
    subtract: bool,
) -> Result<f64> {
    let mut matrix = if subtract {
        let model = estimate_background(h)?;
        subtract_background(h, &model)
    } else {
        h.to_matrix()
    };
    if mode == HistogramPurityMode::SqrtJsi {
        matrix.apply(|v| *v = v.sqrt());
    }
    let source = match mode {
        HistogramPurityMode::Jsi => SchmidtSource::Jsi,
        HistogramPurityMode::SqrtJsi => SchmidtSource::SqrtJsi,
    };
    let spectrum = schmidt_decompose_real(&matrix, source)
        .map_err(|_| Error::Data("histogram is empty after background subtraction".into()))?;
    Ok(spectrum.purity())
}

/// Purity per cumulative measurement interval with the plateau onset.
#[derive(Debug, Clone)]
pub struct ConvergenceScan {
    pub durations_ps: Vec<u64>,
    pub purities: Vec<f64>,
    /// First interval index where the successive change drops below ε.
    pub plateau_index: Option<usize>,
    pub epsilon: f64,
}

impl ConvergenceScan {
    pub fn save_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "duration_ps,purity")?;
        for (d, p) in self.durations_ps.iter().zip(&self.purities) {
            writeln!(out, "{d},{p}")?;
        }
        Ok(())
    }
}

/// Reconstruct the purity over increasing cumulative intervals; the plateau
/// (successive change < `epsilon`) marks where the estimate has stabilized.
/// A missing plateau is reported, not fatal.
pub fn convergence_scan(
    stream: &TimeTagStream,
    durations_ps: &[u64],
    options: HistogramOptions,
    mode: HistogramPurityMode,
    subtract: bool,
    epsilon: f64,
) -> Result<ConvergenceScan> {
    if durations_ps.len() < 2 {
        return Err(Error::InvalidInput("convergence scan needs at least 2 intervals".into()));
    }
    if durations_ps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("intervals must be strictly increasing".into()));
    }
    let mut purities = Vec::with_capacity(durations_ps.len());
    for &d in durations_ps {
        let h = build_histogram(&stream.truncated(d), options)?;
        purities.push(histogram_purity(&h, mode, subtract)?);
    }
    let plateau_index = purities
        .windows(2)
        .position(|w| (w[1] - w[0]).abs() < epsilon)
        .map(|k| k + 1);
    Ok(ConvergenceScan {
        durations_ps: durations_ps.to_vec(),
        purities,
        plateau_index,
        epsilon,
    })
}

/// Parameters of the synthetic time-tag generator.
#[derive(Debug, Clone, Copy)]
pub struct SynthesisConfig {
    pub n_events: usize,
    pub clock_period_ps: u64,
    /// Base delay added to the dispersive signal delay so folded delays land
    /// mid-window.
    pub signal_offset_ps: f64,
    pub idler_offset_ps: f64,
    pub dark_rate_trigger_hz: f64,
    pub dark_rate_signal_hz: f64,
    pub dark_rate_idler_hz: f64,
    pub jitter_sigma_ps: f64,
    pub seed: u64,
}

impl SynthesisConfig {
    pub fn clean(n_events: usize, seed: u64) -> Self {
        Self {
            n_events,
            clock_period_ps: 12_500,
            signal_offset_ps: 6_250.0,
            idler_offset_ps: 6_250.0,
            dark_rate_trigger_hz: 0.0,
            dark_rate_signal_hz: 0.0,
            dark_rate_idler_hz: 0.0,
            jitter_sigma_ps: 0.0,
            seed,
        }
    }
}

/// Sample pair frequencies from |f|², map them to dispersive arrival delays,
/// add Gaussian jitter and Poisson dark counts, and quantize to 1 ps. One
/// pair is emitted per clock cycle; the output is fully reproducible from
/// the seed.
pub fn synthesize_timetags(
    jsa: &JointSpectralAmplitude,
    map: &DispersionMap,
    config: &SynthesisConfig,
) -> Result<TimeTagStream> {
    if config.n_events == 0 {
        return Err(Error::InvalidInput("need at least one event".into()));
    }
    if config.jitter_sigma_ps < 0.0
        || config.dark_rate_trigger_hz < 0.0
        || config.dark_rate_signal_hz < 0.0
        || config.dark_rate_idler_hz < 0.0
    {
        return Err(Error::InvalidInput("jitter and dark rates must be nonnegative".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let grid = jsa.grid();
    let n_s = grid.n_signal();
    let n_i = grid.n_idler();

    // Cumulative cell distribution over |f|² (column-major order).
    let values = jsa.values();
    let mut cdf = Vec::with_capacity(n_s * n_i);
    let mut acc = 0.0f64;
    for v in values.iter() {
        acc += v.norm_sqr();
        cdf.push(acc);
    }
    let total = acc;
    if !(total > 0.0) {
        return Err(Error::Numerical("JSA carries no probability mass".into()));
    }

    let jitter = if config.jitter_sigma_ps > 0.0 {
        Some(Normal::new(0.0, config.jitter_sigma_ps).map_err(|e| Error::InvalidInput(e.to_string()))?)
    } else {
        None
    };
    let perturb = |rng: &mut ChaCha12Rng, t: f64| -> u64 {
        let j = jitter.map_or(0.0, |n| n.sample(rng));
        (t + j).round().max(0.0) as u64
    };

    let mut triggers = Vec::with_capacity(config.n_events);
    let mut signals = Vec::with_capacity(config.n_events);
    let mut idlers = Vec::with_capacity(config.n_events);
    for k in 0..config.n_events {
        let pulse = (k as u64 * config.clock_period_ps) as f64;
        let u: f64 = rng.random::<f64>() * total;
        let idx = cdf.partition_point(|c| *c < u).min(n_s * n_i - 1);
        let (i, j) = (idx % n_s, idx / n_s);
        let ws = grid.signal(i) + (rng.random::<f64>() - 0.5) * grid.signal_step();
        let wi = grid.idler(j) + (rng.random::<f64>() - 0.5) * grid.idler_step();
        let lam_s_nm = angular_to_wavelength(ws) * 1e9;
        let lam_i_nm = angular_to_wavelength(wi) * 1e9;
        let ds = config.signal_offset_ps + map.wavelength_to_time(lam_s_nm);
        let di = config.idler_offset_ps + map.wavelength_to_time(lam_i_nm);
        triggers.push(perturb(&mut rng, pulse));
        signals.push(perturb(&mut rng, pulse + ds));
        idlers.push(perturb(&mut rng, pulse + di));
    }

    // Dark counts: Poisson totals over the run, uniform arrival times.
    let duration_s = config.n_events as f64 * config.clock_period_ps as f64 * 1e-12;
    let span = config.n_events as u64 * config.clock_period_ps;
    let add_darks = |rng: &mut ChaCha12Rng, rate_hz: f64, bucket: &mut Vec<u64>| -> Result<()> {
        if rate_hz <= 0.0 {
            return Ok(());
        }
        let mean = rate_hz * duration_s;
        let n = Poisson::new(mean)
            .map_err(|e| Error::InvalidInput(e.to_string()))?
            .sample(rng) as u64;
        for _ in 0..n {
            bucket.push(rng.random_range(0..span));
        }
        Ok(())
    };
    add_darks(&mut rng, config.dark_rate_trigger_hz, &mut triggers)?;
    add_darks(&mut rng, config.dark_rate_signal_hz, &mut signals)?;
    add_darks(&mut rng, config.dark_rate_idler_hz, &mut idlers)?;
    triggers.sort_unstable();
    signals.sort_unstable();
    idlers.sort_unstable();

    let roles = ChannelRoles::default();
    let mut channels = BTreeMap::new();
    channels.insert(roles.trigger, triggers);
    channels.insert(roles.signal, signals);
    channels.insert(roles.idler, idlers);
    TimeTagStream::new(channels, roles, config.clock_period_ps)
}

/// Photon wavelength (nm) for an angular frequency; export helper.
pub fn omega_to_nm(omega: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / omega * 1e9
}
