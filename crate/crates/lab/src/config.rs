//! Run configuration files.
//!
//! Configs are TOML with units spelled out in the key names: angles in
//! degrees (`*_deg`), thresholds and gaps in normalized intensity (the pulse
//! peak is 1), drift periods in trials.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use bellamp_core::analysis::ChshSettings;
use bellamp_core::cloner::ClonerConfig;
use bellamp_core::detection::{ObserverModel, ThresholdConfig};
use bellamp_core::experiment::{Detector, RunConfig, Schedule};
use bellamp_core::polarization::PairSource;
use bellamp_core::sweep::calibrate_source;
use bellamp_core::theory::{self, ThresholdSide};
use serde::{Deserialize, Serialize};

pub const DEFAULT_SEED: u64 = 2012;
pub const DEFAULT_TRIALS_PER_SETTING: u64 = 5000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials_per_setting: u64,
    /// Trials per setting block; the four settings cycle block by block.
    #[serde(default)]
    pub block_length: Option<u64>,
    #[serde(default = "one")]
    pub a_efficiency: f64,
    /// Counts file to reanalyze instead of simulating, relative to the config.
    #[serde(default)]
    pub counts_file: Option<PathBuf>,
    #[serde(default)]
    pub bases: BasesSection,
    #[serde(default)]
    pub source: SourceSection,
    #[serde(default)]
    pub cloner: ClonerSection,
    #[serde(default)]
    pub detection: DetectionSection,
    #[serde(default)]
    pub witness: WitnessSection,
    #[serde(default)]
    pub service: ServiceSection,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}
fn default_trials() -> u64 {
    DEFAULT_TRIALS_PER_SETTING
}
fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasesSection {
    /// a₁, a₂
    pub alpha_deg: [f64; 2],
    /// b₁, b₂
    pub beta_deg: [f64; 2],
}

impl Default for BasesSection {
    fn default() -> Self {
        BasesSection {
            alpha_deg: [22.5, 67.5],
            beta_deg: [0.0, 45.0],
        }
    }
}

/// Either the pair correlations directly or the no-postselection
/// visibilities they should reproduce. Empty means the ideal singlet.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    pub t_z: Option<f64>,
    pub t_x: Option<f64>,
    pub visibility_hv: Option<f64>,
    pub visibility_pm: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClonerSection {
    pub detector_efficiency: f64,
    #[serde(default)]
    pub dark_click_rate: f64,
}

impl Default for ClonerSection {
    fn default() -> Self {
        let c = ClonerConfig::default();
        ClonerSection {
            detector_efficiency: c.detector_efficiency,
            dark_click_rate: c.dark_click_rate,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DetectionSection {
    /// Two photodiodes behind the PBS. Give `threshold` or `success_probability`.
    Threshold {
        threshold: Option<f64>,
        success_probability: Option<f64>,
        #[serde(default = "low")]
        side: ThresholdSide,
        #[serde(default)]
        analog_noise_sigma: f64,
    },
    /// One observer comparing two spots. Give `gap` or `success_probability`.
    Observer {
        gap: Option<f64>,
        success_probability: Option<f64>,
        #[serde(flatten)]
        drift: DriftSpec,
    },
    /// One observer per spot, each with their own visibility level.
    ObserverPair { plus: ObserverSpec, minus: ObserverSpec },
}

fn low() -> ThresholdSide {
    ThresholdSide::Low
}

impl Default for DetectionSection {
    fn default() -> Self {
        DetectionSection::Threshold {
            threshold: Some(0.5),
            success_probability: None,
            side: ThresholdSide::Low,
            analog_noise_sigma: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftSpec {
    #[serde(default)]
    pub drift_amplitude: f64,
    #[serde(default)]
    pub drift_period_trials: f64,
    #[serde(default)]
    pub drift_phase_deg: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObserverSpec {
    pub level: f64,
    #[serde(flatten)]
    pub drift: DriftSpec,
}

impl DriftSpec {
    fn model(&self, level: f64) -> ObserverModel {
        ObserverModel {
            discrimination_gap: level,
            drift_amplitude: self.drift_amplitude,
            drift_period: self.drift_period_trials,
            drift_phase: self.drift_phase_deg.to_radians(),
        }
    }
}

/// How visibilities for the witness are measured.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessSection {
    /// Measure at the balanced threshold instead of the configured detector.
    #[serde(default = "yes")]
    pub no_postselection: bool,
    #[serde(default = "half")]
    pub threshold: f64,
}

impl Default for WitnessSection {
    fn default() -> Self {
        WitnessSection {
            no_postselection: true,
            threshold: 0.5,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceSection {
    /// Minimum delay between answering a trial and receiving the next one.
    #[serde(default)]
    pub trial_pacing_ms: u64,
}

impl ConfigFile {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let cfg: ConfigFile = toml::from_str(text)?;
        Ok(cfg)
    }

    pub fn chsh_settings(&self) -> ChshSettings {
        let [a1, a2] = self.bases.alpha_deg;
        let [b1, b2] = self.bases.beta_deg;
        ChshSettings::from_degrees(a1, a2, b1, b2)
    }

    pub fn source(&self) -> anyhow::Result<PairSource> {
        let s = &self.source;
        let src = match (s.t_z, s.t_x, s.visibility_hv, s.visibility_pm) {
            (None, None, None, None) => PairSource::ideal(),
            (Some(t_z), Some(t_x), None, None) => PairSource::new(t_z, t_x)?,
            (None, None, Some(hv), Some(pm)) => calibrate_source(hv, pm)?,
            _ => bail!("[source] needs either t_z and t_x, or visibility_hv and visibility_pm"),
        };
        Ok(src)
    }

    pub fn detector(&self) -> anyhow::Result<Detector> {
        let det = match &self.detection {
            DetectionSection::Threshold {
                threshold,
                success_probability,
                side,
                analog_noise_sigma,
            } => {
                let t = match (threshold, success_probability) {
                    (Some(t), None) => *t,
                    (None, Some(p)) => theory::threshold_for_success(checked_probability(*p)?, *side),
                    _ => bail!("[detection] threshold needs exactly one of threshold, success_probability"),
                };
                Detector::Threshold(ThresholdConfig::new(t, *analog_noise_sigma)?)
            }
            DetectionSection::Observer {
                gap,
                success_probability,
                drift,
            } => {
                let g = match (gap, success_probability) {
                    (Some(g), None) => *g,
                    (None, Some(p)) => theory::gap_for_success(checked_probability(*p)?),
                    _ => bail!("[detection] observer needs exactly one of gap, success_probability"),
                };
                Detector::Observer(drift.model(g))
            }
            DetectionSection::ObserverPair { plus, minus } => Detector::ObserverPair {
                plus: plus.drift.model(plus.level),
                minus: minus.drift.model(minus.level),
            },
        };
        Ok(det)
    }

    pub fn run_config(&self) -> anyhow::Result<RunConfig> {
        let settings = self.chsh_settings().settings().to_vec();
        let schedule = match self.block_length {
            Some(b) => Schedule::blocks(settings, b),
            None => Schedule::sequential(settings),
        };
        let cfg = RunConfig {
            trials_per_setting: self.trials_per_setting,
            schedule,
            seed: self.seed,
            source: self.source()?,
            cloner: ClonerConfig::new(self.cloner.detector_efficiency, self.cloner.dark_click_rate)?,
            detector: self.detector()?,
            a_efficiency: self.a_efficiency,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Config used for the matched-basis visibility runs.
    pub fn witness_config(&self) -> anyhow::Result<RunConfig> {
        let cfg = self.run_config()?;
        if self.witness.no_postselection {
            let noise = cfg.detector.noise_sigma();
            return Ok(cfg.with_detector(Detector::Threshold(ThresholdConfig::new(self.witness.threshold, noise)?)));
        }
        Ok(cfg)
    }
}

fn checked_probability(p: f64) -> anyhow::Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        bail!("success_probability {p} must be in (0, 1]");
    }
    Ok(p)
}

/// Presets compiled into the binary, by file name.
pub const PRESETS: &[(&str, &str)] = &[
    ("paper_photodiode.cfg", include_str!("../presets/paper_photodiode.cfg")),
    ("ideal_no_postselection.cfg", include_str!("../presets/ideal_no_postselection.cfg")),
    ("table1_reanalysis.cfg", include_str!("../presets/table1_reanalysis.cfg")),
    ("human_observer.cfg", include_str!("../presets/human_observer.cfg")),
    ("two_observers.cfg", include_str!("../presets/two_observers.cfg")),
    ("photodiode_counts.txt", include_str!("../presets/photodiode_counts.txt")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    let file = Path::new(name).file_name()?.to_str()?;
    PRESETS
        .iter()
        .find(|(n, _)| *n == file || n.strip_suffix(".cfg") == Some(file))
        .map(|(_, text)| *text)
}

/// A parsed config and where it came from.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub file: ConfigFile,
    /// Directory of the config file; `None` for a builtin preset.
    pub base_dir: Option<PathBuf>,
}

impl LoadedConfig {
    /// Reads `spec` from disk, falling back to a builtin preset of that name.
    pub fn load(spec: &str) -> anyhow::Result<Self> {
        let path = Path::new(spec);
        if path.is_file() {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let file = ConfigFile::parse(&text).with_context(|| format!("malformed config {}", path.display()))?;
            let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
            return Ok(LoadedConfig {
                file,
                base_dir: Some(base_dir),
            });
        }
        match preset(spec) {
            Some(text) => Ok(LoadedConfig {
                file: ConfigFile::parse(text).with_context(|| format!("malformed preset {spec}"))?,
                base_dir: None,
            }),
            None => bail!("config {spec} not found (not a file or a builtin preset)"),
        }
    }

    /// Contents of `counts_file`, if the config names one.
    pub fn counts_text(&self) -> anyhow::Result<Option<String>> {
        let Some(rel) = &self.file.counts_file else {
            return Ok(None);
        };
        if let Some(dir) = &self.base_dir {
            let path = dir.join(rel);
            let text = fs::read_to_string(&path).with_context(|| format!("reading counts file {}", path.display()))?;
            return Ok(Some(text));
        }
        match preset(&rel.to_string_lossy()) {
            Some(text) => Ok(Some(text.to_string())),
            None => bail!("counts file {} is not a builtin resource", rel.display()),
        }
    }
}
