//! The CLI subcommands as library functions. Each returns its artifacts as
//! strings and writes them under `out` when given.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use bellamp_core::analysis::{
    chsh, visibility_direct, visibility_fringe_fit, witness_three_visibilities, witness_two_visibilities,
    BellEstimate, ChshSettings, VisibilityEstimate, WitnessResult,
};
use bellamp_core::experiment::{CoincidenceTable, RunConfig, Schedule, Setting};
use bellamp_core::polarization::{Basis, PolAngle};
use bellamp_core::rng::derive_seed;
use bellamp_core::sweep::{threshold_grid, SweepResult, DEFAULT_MIN_SUCCESS, DEFAULT_SWEEP_POINTS};
use bellamp_core::theory::ThresholdSide;

use crate::config::LoadedConfig;
use crate::formats::{self, round_deg, ScanFile};
use crate::parallel;
use crate::report::{run_header, Report};

/// Stream index reserved for the matched-basis visibility runs.
const VISIBILITY_STREAM: u64 = 1 << 33;

#[derive(Clone, Debug, Default)]
pub struct CommonOptions {
    pub config: String,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub reveal_hidden: bool,
}

impl CommonOptions {
    pub fn new(config: &str) -> Self {
        CommonOptions {
            config: config.to_string(),
            ..Default::default()
        }
    }

    fn load(&self) -> anyhow::Result<LoadedConfig> {
        let mut loaded = LoadedConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            loaded.file.seed = seed;
        }
        Ok(loaded)
    }
}

fn write_out(out: &Option<PathBuf>, name: &str, contents: &str) -> anyhow::Result<()> {
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn config_name(loaded: &LoadedConfig, spec: &str) -> String {
    loaded.file.name.clone().unwrap_or_else(|| spec.to_string())
}

#[derive(Clone, Debug)]
pub struct RunArtifacts {
    pub report: String,
    pub table: CoincidenceTable,
    pub bell: BellEstimate,
    pub visibilities: Vec<VisibilityEstimate>,
    pub witness: Option<WitnessResult>,
    /// JSONL trial log; only produced when writing to `out`.
    pub log: Option<String>,
}

/// Visibilities at matched bases `b₁` and `b₂`, measured with the witness
/// detector of the config.
pub fn matched_visibilities(cfg: &RunConfig, settings: &ChshSettings) -> anyhow::Result<Vec<VisibilityEstimate>> {
    let matched: Vec<Setting> = [settings.b1, settings.b2]
        .iter()
        .map(|&b| Setting::new(Basis::new(b), Basis::new(b)))
        .collect();
    let vis_cfg = RunConfig {
        schedule: Schedule::sequential(matched.clone()),
        seed: derive_seed(cfg.seed, VISIBILITY_STREAM),
        ..cfg.clone()
    };
    let tally = parallel::run_tally(&vis_cfg)?;
    matched
        .iter()
        .map(|s| {
            let label = basis_label(s.b.primary);
            let counts = tally.table.get(s).expect("scheduled setting");
            Ok(visibility_direct(&label, s, counts)?)
        })
        .collect()
}

fn basis_label(b: PolAngle) -> String {
    let deg = round_deg(b.degrees());
    if deg == 0.0 {
        "HV".into()
    } else if deg == 45.0 {
        "+-".into()
    } else {
        format!("{deg}deg")
    }
}

/// Simulates the configured experiment (or reanalyzes its counts file) and
/// reports the CHSH estimate, visibilities and witness.
pub fn cmd_run(opts: &CommonOptions) -> anyhow::Result<RunArtifacts> {
    let loaded = opts.load()?;
    let name = config_name(&loaded, &opts.config);
    let settings = loaded.file.chsh_settings();

    if let Some(text) = loaded.counts_text()? {
        let table = formats::parse_counts(&text)?;
        let bell = chsh(&table, &settings)?;
        let report = Report {
            title: "bellamp counts reanalysis".into(),
            header: vec![("config".into(), name)],
            table: Some(table.clone()),
            bell: Some(bell.clone()),
            ..Default::default()
        }
        .render();
        write_out(&opts.out, "report.txt", &report)?;
        return Ok(RunArtifacts {
            report,
            table,
            bell,
            visibilities: Vec::new(),
            witness: None,
            log: None,
        });
    }

    let cfg = loaded.file.run_config()?;
    let (table, log) = if opts.out.is_some() {
        let output = parallel::run_experiment(&cfg)?;
        let mut buf = Vec::new();
        formats::write_trial_log(&mut buf, &output.records, opts.reveal_hidden)?;
        (output.table, Some(String::from_utf8(buf).expect("JSON is UTF-8")))
    } else {
        (parallel::run_tally(&cfg)?.table, None)
    };
    let bell = chsh(&table, &settings)?;
    let visibilities = matched_visibilities(&loaded.file.witness_config()?, &settings)?;
    let witness = match visibilities.as_slice() {
        [v1, v2] => Some(witness_two_visibilities(v1, v2)),
        _ => None,
    };

    let mut header = run_header(&name, &cfg);
    header.push((
        "witness_detector".into(),
        crate::report::describe_detector(&loaded.file.witness_config()?.detector),
    ));
    let report = Report {
        title: "bellamp run".into(),
        header,
        table: Some(table.clone()),
        bell: Some(bell.clone()),
        visibilities: visibilities.clone(),
        witness: witness.clone(),
        notes: vec!["the simulated amplifier breaks entanglement; any CHSH violation here comes from postselection".into()],
    }
    .render();

    write_out(&opts.out, "report.txt", &report)?;
    write_out(&opts.out, "counts.txt", &formats::write_counts(&table))?;
    if let Some(log) = &log {
        write_out(&opts.out, "trials.jsonl", log)?;
    }
    Ok(RunArtifacts {
        report,
        table,
        bell,
        visibilities,
        witness,
        log,
    })
}

#[derive(Clone, Debug)]
pub struct SweepOptions {
    pub points: usize,
    pub min_success: f64,
    pub side: ThresholdSide,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            points: DEFAULT_SWEEP_POINTS,
            min_success: DEFAULT_MIN_SUCCESS,
            side: ThresholdSide::Low,
        }
    }
}

/// S against success probability over a grid of thresholds.
pub fn cmd_sweep(opts: &CommonOptions, sweep: &SweepOptions) -> anyhow::Result<(SweepResult, String)> {
    if !(sweep.min_success > 0.0 && sweep.min_success <= 1.0) {
        bail!("min success probability {} must be in (0, 1]", sweep.min_success);
    }
    let loaded = opts.load()?;
    let cfg = loaded.file.run_config()?;
    let thresholds = threshold_grid(sweep.points, sweep.min_success, sweep.side);
    let result = parallel::threshold_sweep(&cfg, &loaded.file.chsh_settings(), &thresholds)?;
    let series = formats::write_series(&result);
    write_out(&opts.out, "series.txt", &series)?;
    Ok((result, series))
}

/// Reanalyzes a trial log or a counts file.
pub fn cmd_analyze(path: &Path, config: Option<&str>, out: &Option<PathBuf>) -> anyhow::Result<(BellEstimate, String)> {
    let settings = match config {
        Some(c) => LoadedConfig::load(c)?.file.chsh_settings(),
        None => ChshSettings::standard(),
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if text.trim().is_empty() {
        bail!("insufficient data: {} is empty", path.display());
    }
    let (table, kind) = if formats::is_trial_log(&text) {
        let lines = formats::read_trial_log(BufReader::new(text.as_bytes()))?;
        (formats::table_from_log(&lines), "trial log")
    } else {
        (formats::parse_counts(&text)?, "counts file")
    };
    let bell = chsh(&table, &settings)?;
    let report = Report {
        title: "bellamp analysis".into(),
        header: vec![
            ("input".into(), path.display().to_string()),
            ("format".into(), kind.into()),
        ],
        table: Some(table),
        bell: Some(bell.clone()),
        ..Default::default()
    }
    .render();
    write_out(out, "report.txt", &report)?;
    Ok((bell, report))
}

/// Fits each fringe scan and evaluates the two- or three-visibility witness.
pub fn cmd_witness(paths: &[PathBuf], out: &Option<PathBuf>) -> anyhow::Result<(WitnessResult, String)> {
    let mut visibilities = Vec::new();
    for path in paths {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let scan = formats::parse_scan(&text, &stem).with_context(|| format!("parsing {}", path.display()))?;
        let fit = visibility_fringe_fit(&scan.label, &scan.points).with_context(|| format!("fitting {}", path.display()))?;
        visibilities.push(fit.visibility);
    }
    let witness = match visibilities.as_slice() {
        [a, b] => witness_two_visibilities(a, b),
        [a, b, c] => witness_three_visibilities(a, b, c),
        _ => bail!("witness needs two or three scan files, got {}", paths.len()),
    };
    let report = Report {
        title: "bellamp witness".into(),
        visibilities,
        witness: Some(witness.clone()),
        ..Default::default()
    }
    .render();
    write_out(out, "witness.txt", &report)?;
    Ok((witness, report))
}

/// Simulated fringe scan over `points` A angles evenly spaced across 180°,
/// measured with the witness detector.
pub fn cmd_scan(opts: &CommonOptions, beta_deg: f64, points: usize) -> anyhow::Result<String> {
    if points == 0 {
        bail!("scan needs at least one point");
    }
    let loaded = opts.load()?;
    let cfg = loaded.file.witness_config()?;
    let b = Basis::from_degrees(beta_deg);
    let alphas: Vec<PolAngle> = (0..points)
        .map(|i| PolAngle::from_degrees(180.0 * i as f64 / points as f64))
        .collect();
    let scan = parallel::fringe_scan(&cfg, b, &alphas)?;
    let text = formats::write_scan(&ScanFile::from_points(&basis_label(b.primary), b, &scan));
    write_out(&opts.out, &format!("scan_{}.txt", round_deg(beta_deg)), &text)?;
    Ok(text)
}
