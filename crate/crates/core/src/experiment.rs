//! Trial engine: basis scheduling, per-trial simulation and coincidence
//! accumulation.
//!
//! A trial is one flash of the amplifier. Pairs that do not make the
//! amplifier fire are not trials; they are only counted. Trial `k` is
//! generated from its own RNG stream `(seed, k)`, which makes any trial
//! reproducible in isolation.

use alloc::format;
use alloc::vec::Vec;
use core::ops::Range;

use serde::{Deserialize, Serialize};

use crate::cloner::{attempt_amplification, ClonerConfig};
use crate::detection::{
    add_analog_noise, classify, detect_a, observe_human, observe_pair, split_intensities, AClick, ObserverModel,
    ThresholdConfig, Verdict,
};
use crate::polarization::{Basis, PairSource, PolAngle};
use crate::rng::{derive_seed, trial_stream, TrialRng};
use crate::{Error, Result};

/// One (A basis, B basis) measurement setting.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Setting {
    pub a: Basis,
    pub b: Basis,
}

impl Setting {
    pub fn new(a: Basis, b: Basis) -> Self {
        Setting { a, b }
    }

    pub fn from_degrees(a_deg: f64, b_deg: f64) -> Self {
        Setting::new(Basis::from_degrees(a_deg), Basis::from_degrees(b_deg))
    }

    pub fn approx_eq(&self, other: &Setting) -> bool {
        self.a.approx_eq(other.a) && self.b.approx_eq(other.b)
    }
}

/// Settings visited round-robin in blocks of `block_len` trials. Without a
/// block length each setting runs all its trials in one block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub settings: Vec<Setting>,
    pub block_len: Option<u64>,
}

impl Schedule {
    pub fn sequential(settings: Vec<Setting>) -> Self {
        Schedule {
            settings,
            block_len: None,
        }
    }

    pub fn blocks(settings: Vec<Setting>, block_len: u64) -> Self {
        Schedule {
            settings,
            block_len: Some(block_len),
        }
    }
}

/// What reads out side B.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Detector {
    Threshold(ThresholdConfig),
    Observer(ObserverModel),
    /// One observer per PBS output, each with an independent drift.
    ObserverPair { plus: ObserverModel, minus: ObserverModel },
}

impl Detector {
    pub fn decide(&self, i_plus: f64, i_minus: f64, trial_id: u64) -> Verdict {
        match self {
            Detector::Threshold(cfg) => classify(i_plus, i_minus, cfg).verdict,
            Detector::Observer(m) => observe_human(i_plus, i_minus, m, trial_id),
            Detector::ObserverPair { plus, minus } => observe_pair(i_plus, i_minus, plus, minus, trial_id),
        }
    }

    pub fn noise_sigma(&self) -> f64 {
        match self {
            Detector::Threshold(cfg) => cfg.analog_noise_sigma,
            _ => 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Detector::Threshold(cfg) => cfg.validate(),
            Detector::Observer(m) => m.validate(),
            Detector::ObserverPair { plus, minus } => {
                plus.validate()?;
                minus.validate()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub trials_per_setting: u64,
    pub schedule: Schedule,
    pub seed: u64,
    pub source: PairSource,
    pub cloner: ClonerConfig,
    pub detector: Detector,
    /// Efficiency of each A-side APD.
    pub a_efficiency: f64,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials_per_setting == 0 {
            return Err(Error::invalid("trials_per_setting", "must be > 0"));
        }
        if self.schedule.settings.is_empty() {
            return Err(Error::invalid("schedule", "no settings"));
        }
        if let Some(block) = self.schedule.block_len {
            if block == 0 || self.trials_per_setting % block != 0 {
                return Err(Error::invalid(
                    "block_len",
                    format!("{block} must be > 0 and divide trials_per_setting = {}", self.trials_per_setting),
                ));
            }
        }
        if !(0.0..=1.0).contains(&self.a_efficiency) {
            return Err(Error::invalid("a_efficiency", format!("{} not in [0, 1]", self.a_efficiency)));
        }
        PairSource::new(self.source.t_z, self.source.t_x)?;
        self.cloner.validate()?;
        self.detector.validate()
    }

    pub fn total_trials(&self) -> u64 {
        self.trials_per_setting * self.schedule.settings.len() as u64
    }

    fn block_len(&self) -> u64 {
        self.schedule.block_len.unwrap_or(self.trials_per_setting)
    }

    pub fn setting_index(&self, trial_id: u64) -> usize {
        ((trial_id / self.block_len()) % self.schedule.settings.len() as u64) as usize
    }

    pub fn with_detector(&self, detector: Detector) -> Self {
        RunConfig {
            detector,
            ..self.clone()
        }
    }
}

/// A flash that has been generated but not yet judged on side B. This is
/// everything the observer service needs to present a trial.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PendingTrial {
    pub trial_id: u64,
    pub setting_index: usize,
    pub setting: Setting,
    pub hidden_theta: PolAngle,
    pub a_click: AClick,
    pub i_plus: f64,
    pub i_minus: f64,
    /// Pairs sent through the amplifier up to and including the flash.
    pub pairs_attempted: u64,
}

impl PendingTrial {
    pub fn resolve(&self, verdict: Verdict) -> TrialRecord {
        TrialRecord {
            trial_id: self.trial_id,
            timestamp: self.trial_id,
            a_basis: self.setting.a,
            b_basis: self.setting.b,
            hidden_theta: self.hidden_theta,
            a_click: self.a_click,
            i_plus: self.i_plus,
            i_minus: self.i_minus,
            verdict,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialRecord {
    pub trial_id: u64,
    /// Simulated, monotone in `trial_id`.
    pub timestamp: u64,
    pub a_basis: Basis,
    pub b_basis: Basis,
    /// Ground truth; no estimator reads it.
    pub hidden_theta: PolAngle,
    pub a_click: AClick,
    pub i_plus: f64,
    pub i_minus: f64,
    pub verdict: Verdict,
}

impl TrialRecord {
    pub fn setting(&self) -> Setting {
        Setting::new(self.a_basis, self.b_basis)
    }
}

fn next_flash(cfg: &RunConfig, alpha: PolAngle, rng: &mut TrialRng) -> (crate::cloner::Amplification, u64) {
    let mut attempts = 0u64;
    loop {
        attempts += 1;
        if let Some(amp) = attempt_amplification(&cfg.source, alpha, &cfg.cloner, rng) {
            return (amp, attempts);
        }
    }
}

/// Generates trial `trial_id` from its own stream. `cfg` must be valid.
pub fn generate_trial(cfg: &RunConfig, trial_id: u64) -> PendingTrial {
    let setting_index = cfg.setting_index(trial_id);
    let setting = cfg.schedule.settings[setting_index];
    let mut rng = trial_stream(cfg.seed, trial_id);
    let (amp, pairs_attempted) = next_flash(cfg, setting.a.primary, &mut rng);
    let a_click = detect_a(amp.a_outcome, cfg.a_efficiency, &mut rng);
    let (i_plus, i_minus) = split_intensities(&amp.pulse, setting.b, cfg.detector.noise_sigma(), &mut rng);
    PendingTrial {
        trial_id,
        setting_index,
        setting,
        hidden_theta: amp.hidden_theta,
        a_click,
        i_plus,
        i_minus,
        pairs_attempted,
    }
}

/// Generates and judges one trial with the configured detector.
pub fn simulate_trial(cfg: &RunConfig, trial_id: u64) -> (TrialRecord, u64) {
    let pending = generate_trial(cfg, trial_id);
    let verdict = cfg.detector.decide(pending.i_plus, pending.i_minus, trial_id);
    (pending.resolve(verdict), pending.pairs_attempted)
}

/// Coincidence counts for one setting, in the shape of one block of the
/// coincidence table: rows are the B verdict, columns the A detector.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub a1_plus: u64,
    pub a1_minus: u64,
    pub a2_plus: u64,
    pub a2_minus: u64,
    /// All trials at this setting; zero when unknown (counts-only input).
    pub trials: u64,
    /// Trials with a conclusive B verdict.
    pub conclusive: u64,
}

impl Counts {
    pub fn from_cells(a1_plus: u64, a1_minus: u64, a2_plus: u64, a2_minus: u64) -> Self {
        Counts {
            a1_plus,
            a1_minus,
            a2_plus,
            a2_minus,
            trials: 0,
            conclusive: 0,
        }
    }

    pub fn record(&mut self, a_click: AClick, verdict: Verdict) {
        self.trials += 1;
        if !verdict.is_conclusive() {
            return;
        }
        self.conclusive += 1;
        match (a_click, verdict) {
            (AClick::A1, Verdict::Plus) => self.a1_plus += 1,
            (AClick::A1, Verdict::Minus) => self.a1_minus += 1,
            (AClick::A2, Verdict::Plus) => self.a2_plus += 1,
            (AClick::A2, Verdict::Minus) => self.a2_minus += 1,
            _ => {}
        }
    }

    pub fn merge(&mut self, other: &Counts) {
        self.a1_plus += other.a1_plus;
        self.a1_minus += other.a1_minus;
        self.a2_plus += other.a2_plus;
        self.a2_minus += other.a2_minus;
        self.trials += other.trials;
        self.conclusive += other.conclusive;
    }

    /// Coincidences with equal-index outcomes (A₁B₊, A₂B₋).
    pub fn same(&self) -> u64 {
        self.a1_plus + self.a2_minus
    }

    pub fn different(&self) -> u64 {
        self.a1_minus + self.a2_plus
    }

    pub fn coincidences(&self) -> u64 {
        self.same() + self.different()
    }
}

/// Per-setting coincidence counts, in insertion order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceTable {
    pub entries: Vec<(Setting, Counts)>,
}

impl CoincidenceTable {
    pub fn for_settings(settings: &[Setting]) -> Self {
        CoincidenceTable {
            entries: settings.iter().map(|&s| (s, Counts::default())).collect(),
        }
    }

    pub fn get(&self, setting: &Setting) -> Option<&Counts> {
        self.entries.iter().find(|(s, _)| s.approx_eq(setting)).map(|(_, c)| c)
    }

    pub fn entry(&mut self, setting: Setting) -> &mut Counts {
        match self.entries.iter().position(|(s, _)| s.approx_eq(&setting)) {
            Some(i) => &mut self.entries[i].1,
            None => {
                self.entries.push((setting, Counts::default()));
                &mut self.entries.last_mut().expect("just pushed").1
            }
        }
    }

    pub fn record(&mut self, record: &TrialRecord) {
        self.entry(record.setting()).record(record.a_click, record.verdict);
    }

    pub fn merge(&mut self, other: &CoincidenceTable) {
        for (setting, counts) in &other.entries {
            self.entry(*setting).merge(counts);
        }
    }

    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a TrialRecord>) -> Self {
        let mut table = CoincidenceTable::default();
        for r in records {
            table.record(r);
        }
        table
    }

    pub fn total_trials(&self) -> u64 {
        self.entries.iter().map(|(_, c)| c.trials).sum()
    }

    pub fn total_conclusive(&self) -> u64 {
        self.entries.iter().map(|(_, c)| c.conclusive).sum()
    }
}

/// Counts from a run, without per-trial records.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunTally {
    pub table: CoincidenceTable,
    pub pairs_attempted: u64,
}

impl RunTally {
    pub fn new(cfg: &RunConfig) -> Self {
        RunTally {
            table: CoincidenceTable::for_settings(&cfg.schedule.settings),
            pairs_attempted: 0,
        }
    }

    /// Simulates `ids` and adds them to the tally.
    pub fn run_range(&mut self, cfg: &RunConfig, ids: Range<u64>) {
        for id in ids {
            let (record, pairs) = simulate_trial(cfg, id);
            let setting_index = cfg.setting_index(id);
            self.table.entries[setting_index].1.record(record.a_click, record.verdict);
            self.pairs_attempted += pairs;
        }
    }

    pub fn merge(&mut self, other: &RunTally) {
        self.table.merge(&other.table);
        self.pairs_attempted += other.pairs_attempted;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub records: Vec<TrialRecord>,
    pub table: CoincidenceTable,
    pub pairs_attempted: u64,
}

/// Runs the full schedule, keeping every trial record.
pub fn run_experiment(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let mut table = CoincidenceTable::for_settings(&cfg.schedule.settings);
    let mut pairs_attempted = 0;
    let mut records = Vec::with_capacity(cfg.total_trials() as usize);
    for id in 0..cfg.total_trials() {
        let (record, pairs) = simulate_trial(cfg, id);
        table.entries[cfg.setting_index(id)].1.record(record.a_click, record.verdict);
        pairs_attempted += pairs;
        records.push(record);
    }
    Ok(RunOutput {
        records,
        table,
        pairs_attempted,
    })
}

/// Runs the full schedule keeping only the counts.
pub fn run_tally(cfg: &RunConfig) -> Result<RunTally> {
    cfg.validate()?;
    let mut tally = RunTally::new(cfg);
    tally.run_range(cfg, 0..cfg.total_trials());
    Ok(tally)
}

/// The same schedule read out by two observers, one per PBS output, each
/// deciding alone whether their spot is visible.
pub fn run_two_observer_scenario(
    cfg: &RunConfig,
    plus: ObserverModel,
    minus: ObserverModel,
) -> Result<RunOutput> {
    run_experiment(&cfg.with_detector(Detector::ObserverPair { plus, minus }))
}

/// One point of a visibility fringe: A analyzer angle and coincidences
/// between A₁ and a `+` verdict at the fixed B basis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub alpha: PolAngle,
    pub coincidences: u64,
    pub trials: u64,
}

/// One scan point at A angle `alpha`, seeded with the `index`-th derived seed.
pub fn fringe_scan_point(cfg: &RunConfig, b: Basis, index: usize, alpha: PolAngle) -> Result<ScanPoint> {
    let point_cfg = RunConfig {
        schedule: Schedule::sequential(alloc::vec![Setting::new(Basis::new(alpha), b)]),
        seed: derive_seed(cfg.seed, index as u64),
        ..cfg.clone()
    };
    let counts = run_tally(&point_cfg)?.table.entries[0].1;
    Ok(ScanPoint {
        alpha,
        coincidences: counts.a1_plus,
        trials: counts.trials,
    })
}

/// Scans the A analyzer over `alphas` at fixed B basis, running
/// `cfg.trials_per_setting` trials per point.
pub fn fringe_scan(cfg: &RunConfig, b: Basis, alphas: &[PolAngle]) -> Result<Vec<ScanPoint>> {
    alphas
        .iter()
        .enumerate()
        .map(|(i, &alpha)| fringe_scan_point(cfg, b, i, alpha))
        .collect()
}

/// Matched measurement along the circular axis, which lies off the linear
/// great circle the amplifier works on.
///
/// A circular analysis of photon A has zero correlation with any linear
/// projection of photon B for the source model, so the amplifier sees an
/// uncorrelated pair; a linearly polarized pulse splits evenly on a circular
/// analyzer. Without analog noise every such split is an exact tie and the
/// trial is inconclusive.
pub fn run_circular_axis(cfg: &RunConfig) -> Result<Counts> {
    cfg.validate()?;
    let uncorrelated = PairSource { t_z: 0.0, t_x: 0.0 };
    let seed = derive_seed(cfg.seed, u64::from(u32::MAX));
    let mut counts = Counts::default();
    for id in 0..cfg.trials_per_setting {
        let mut rng = trial_stream(seed, id);
        let amp = loop {
            if let Some(amp) = attempt_amplification(&uncorrelated, PolAngle::HORIZONTAL, &cfg.cloner, &mut rng) {
                break amp;
            }
        };
        let a_click = detect_a(amp.a_outcome, cfg.a_efficiency, &mut rng);
        let half = 0.5 * amp.pulse.peak_intensity;
        let (i_plus, i_minus) = add_analog_noise(half, half, cfg.detector.noise_sigma(), &mut rng);
        counts.record(a_click, cfg.detector.decide(i_plus, i_minus, id));
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{correlation_term, ChshSettings};
    use alloc::vec;
    use core::f64::consts::{FRAC_2_PI, PI};

    fn config(settings: Vec<Setting>, trials: u64, threshold: f64) -> RunConfig {
        RunConfig {
            trials_per_setting: trials,
            schedule: Schedule::sequential(settings),
            seed: 17,
            source: PairSource::ideal(),
            cloner: ClonerConfig::default(),
            detector: Detector::Threshold(ThresholdConfig::new(threshold, 0.0).unwrap()),
            a_efficiency: 1.0,
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = config(vec![Setting::from_degrees(0.0, 0.0)], 10, 0.5);
        cfg.trials_per_setting = 0;
        assert!(run_experiment(&cfg).is_err());
        let cfg = config(vec![], 10, 0.5);
        assert!(run_experiment(&cfg).is_err());
        let mut cfg = config(vec![Setting::from_degrees(0.0, 0.0)], 10, 0.5);
        cfg.schedule.block_len = Some(3);
        assert!(run_experiment(&cfg).is_err());
    }

    #[test]
    fn runs_exactly_the_scheduled_trials() {
        let cfg = config(ChshSettings::standard().settings().to_vec(), 500, 0.2);
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.records.len(), 2000);
        for (_, c) in &out.table.entries {
            assert_eq!(c.trials, 500);
            assert_eq!(c.coincidences(), c.conclusive);
        }
        assert!(out.records.windows(2).all(|w| w[0].timestamp < w[1].timestamp));
        assert!(out.pairs_attempted > 2000);
    }

    #[test]
    fn matched_and_conjugate_settings() {
        // Oracle: E(α, β) = −(2/π) cos 2(α − β) at t = 0.5.
        let cfg = config(vec![Setting::from_degrees(0.0, 0.0), Setting::from_degrees(45.0, 0.0)], 100_000, 0.5);
        let tally = run_tally(&cfg).unwrap();
        let matched = correlation_term(&tally.table.entries[0].1).unwrap();
        assert!((matched.value + FRAC_2_PI).abs() < 3.0 * matched.sigma, "{matched:?}");
        let conjugate = correlation_term(&tally.table.entries[1].1).unwrap();
        assert!(conjugate.value.abs() < 3.0 * conjugate.sigma, "{conjugate:?}");
    }

    #[test]
    fn identical_seed_identical_records() {
        let cfg = config(ChshSettings::standard().settings().to_vec(), 200, 0.1);
        assert_eq!(run_experiment(&cfg).unwrap(), run_experiment(&cfg).unwrap());
        let other = RunConfig { seed: 18, ..cfg.clone() };
        assert_ne!(run_experiment(&cfg).unwrap().records, run_experiment(&other).unwrap().records);
    }

    #[test]
    fn tally_matches_records_and_chunking() {
        let cfg = RunConfig {
            schedule: Schedule::blocks(ChshSettings::standard().settings().to_vec(), 50),
            ..config(vec![], 300, 0.1)
        };
        let out = run_experiment(&cfg).unwrap();
        let whole = run_tally(&cfg).unwrap();
        assert_eq!(out.table, whole.table);
        assert_eq!(CoincidenceTable::from_records(&out.records), out.table);

        let mut a = RunTally::new(&cfg);
        a.run_range(&cfg, 700..1200);
        let mut b = RunTally::new(&cfg);
        b.run_range(&cfg, 0..700);
        b.run_range(&cfg, 1200..1200);
        let mut c = RunTally::new(&cfg);
        c.run_range(&cfg, 1200..cfg.total_trials());
        c.merge(&a);
        c.merge(&b);
        assert_eq!(c, whole);
    }

    #[test]
    fn block_schedule_round_robin() {
        let cfg = RunConfig {
            schedule: Schedule::blocks(ChshSettings::standard().settings().to_vec(), 250),
            ..config(vec![], 1000, 0.5)
        };
        assert_eq!(cfg.setting_index(0), 0);
        assert_eq!(cfg.setting_index(249), 0);
        assert_eq!(cfg.setting_index(250), 1);
        assert_eq!(cfg.setting_index(1000), 0);
        assert_eq!(cfg.setting_index(3999), 3);
    }

    #[test]
    fn lost_a_clicks_keep_conclusive_count() {
        let mut cfg = config(vec![Setting::from_degrees(0.0, 0.0)], 20_000, 0.5);
        cfg.a_efficiency = 0.5;
        let c = run_tally(&cfg).unwrap().table.entries[0].1;
        assert!(c.coincidences() < c.conclusive);
        let ratio = c.coincidences() as f64 / c.conclusive as f64;
        assert!((ratio - 0.5).abs() < 3.0 * libm::sqrt(0.25 / c.conclusive as f64));
    }

    #[test]
    fn strong_postselection_keeps_parallel_polarizations() {
        let cfg = config(vec![Setting::from_degrees(22.5, 0.0)], 20_000, 0.02);
        let out = run_experiment(&cfg).unwrap();
        for r in out.records.iter().filter(|r| r.verdict == Verdict::Plus) {
            let d = r.hidden_theta.minus(r.b_basis.primary);
            let d = d.min(PI - d);
            // cos² d > 1 − t
            assert!(d < libm::acos(libm::sqrt(0.98)) + 1e-12);
        }
    }

    #[test]
    fn equal_steady_observers_reduce_to_threshold() {
        let cfg = config(ChshSettings::standard().settings().to_vec(), 2000, 0.1);
        let single = run_experiment(&cfg).unwrap();
        let m = ObserverModel::steady(0.1);
        let pair = run_two_observer_scenario(&cfg, m, m).unwrap();
        assert_eq!(single.table, pair.table);
    }

    #[test]
    fn blind_observer_leaves_single_arm_statistics() {
        let cfg = config(vec![Setting::from_degrees(0.0, 0.0)], 5000, 0.3);
        let pair = run_two_observer_scenario(&cfg, ObserverModel::steady(0.3), ObserverModel::steady(f64::INFINITY)).unwrap();
        for r in &pair.records {
            assert_eq!(r.verdict.is_conclusive(), r.i_plus > 0.3);
            assert_ne!(r.verdict, Verdict::Minus);
        }
    }

    #[test]
    fn fringe_scan_counts() {
        let mut cfg = config(vec![], 20_000, 0.5);
        cfg.seed = 3;
        let alphas: Vec<PolAngle> = (0..4).map(|i| PolAngle::from_degrees(45.0 * i as f64)).collect();
        let scan = fringe_scan(&cfg, Basis::from_degrees(0.0), &alphas).unwrap();
        // N(A1,B+) = T/4 · (1 − (2/π) cos 2α)
        for p in &scan {
            let expected = 0.25 * (1.0 - FRAC_2_PI * libm::cos(2.0 * p.alpha.radians()));
            let frac = p.coincidences as f64 / p.trials as f64;
            assert!((frac - expected).abs() < 3.0 * libm::sqrt(expected * (1.0 - expected) / p.trials as f64));
        }
    }

    #[test]
    fn circular_axis_needs_noise_and_is_uncorrelated() {
        let cfg = config(vec![Setting::from_degrees(0.0, 0.0)], 5000, 0.5);
        let silent = run_circular_axis(&cfg).unwrap();
        assert_eq!(silent.conclusive, 0);
        let noisy = RunConfig {
            detector: Detector::Threshold(ThresholdConfig::new(0.5, 0.05).unwrap()),
            ..cfg
        };
        let c = run_circular_axis(&noisy).unwrap();
        assert!(c.conclusive > 2000);
        let e = correlation_term(&c).unwrap();
        assert!(e.value.abs() < 4.0 * e.sigma, "{e:?} {c:?}");
    }
}
