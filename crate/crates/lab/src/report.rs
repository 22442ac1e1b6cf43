//! Plain-text reports. Numbers are printed at fixed precision so that equal
//! inputs give byte-identical reports.

use std::fmt::Write as _;

use bellamp_core::analysis::{BellEstimate, VisibilityEstimate, WitnessResult};
use bellamp_core::experiment::{CoincidenceTable, Detector, RunConfig};

use crate::formats::round_deg;

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub title: String,
    pub header: Vec<(String, String)>,
    pub table: Option<CoincidenceTable>,
    pub bell: Option<BellEstimate>,
    pub visibilities: Vec<VisibilityEstimate>,
    pub witness: Option<WitnessResult>,
    pub notes: Vec<String>,
}

pub fn describe_detector(d: &Detector) -> String {
    match d {
        Detector::Threshold(t) => format!(
            "threshold {:.6} (analog noise sigma {:.6})",
            t.threshold, t.analog_noise_sigma
        ),
        Detector::Observer(m) => format!(
            "observer gap {:.6} (drift {:.3}, period {} trials)",
            m.discrimination_gap, m.drift_amplitude, m.drift_period
        ),
        Detector::ObserverPair { plus, minus } => format!(
            "observer pair levels {:.6}/{:.6} (drift {:.3}/{:.3}, periods {}/{} trials)",
            plus.discrimination_gap,
            minus.discrimination_gap,
            plus.drift_amplitude,
            minus.drift_amplitude,
            plus.drift_period,
            minus.drift_period
        ),
    }
}

pub fn run_header(name: &str, cfg: &RunConfig) -> Vec<(String, String)> {
    vec![
        ("config".into(), name.into()),
        ("seed".into(), cfg.seed.to_string()),
        ("trials_per_setting".into(), cfg.trials_per_setting.to_string()),
        (
            "block_length".into(),
            cfg.schedule.block_len.map_or("none".into(), |b| b.to_string()),
        ),
        ("source".into(), format!("t_z {:.6} t_x {:.6}", cfg.source.t_z, cfg.source.t_x)),
        (
            "cloner".into(),
            format!(
                "efficiency {:.6} dark clicks {:.6}",
                cfg.cloner.detector_efficiency, cfg.cloner.dark_click_rate
            ),
        ),
        ("a_efficiency".into(), format!("{:.6}", cfg.a_efficiency)),
        ("detector".into(), describe_detector(&cfg.detector)),
    ]
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

impl Report {
    pub fn render(&self) -> String {
        let mut out = format!("# {}\n", self.title);
        for (k, v) in &self.header {
            let _ = writeln!(out, "{k}: {v}");
        }
        if let Some(b) = &self.bell {
            out.push_str("\n[chsh]\n");
            out.push_str("# term a_deg b_deg E sigma_E coincidences\n");
            for t in &b.terms {
                let coinc = self
                    .table
                    .as_ref()
                    .and_then(|tab| tab.get(&t.setting))
                    .map_or("-".to_string(), |c| c.coincidences().to_string());
                let _ = writeln!(
                    out,
                    "{} {} {} {:+.6} {:.6} {}",
                    t.label,
                    round_deg(t.setting.a.primary.degrees()),
                    round_deg(t.setting.b.primary.degrees()),
                    t.value,
                    t.sigma,
                    coinc
                );
            }
            let _ = writeln!(out, "S: {:.6}", b.s);
            let _ = writeln!(out, "sigma_S: {:.6}", b.sigma_s);
            match b.success_probability {
                Some(p) => {
                    let _ = writeln!(out, "success_probability: {p:.6}");
                }
                None => out.push_str("success_probability: unknown\n"),
            }
            let _ = writeln!(out, "violates_local_bound: {}", yes_no(b.violates_local_bound()));
            let _ = writeln!(out, "super_quantum: {}", yes_no(b.super_quantum));
        }
        if !self.visibilities.is_empty() {
            out.push_str("\n[visibility]\n");
            for v in &self.visibilities {
                let method = match v.method {
                    bellamp_core::analysis::VisibilityMethod::Direct => "direct",
                    bellamp_core::analysis::VisibilityMethod::FringeFit => "fringe_fit",
                };
                let _ = writeln!(out, "{}: {:.6} +- {:.6} ({method})", v.label, v.value, v.sigma);
            }
        }
        if let Some(w) = &self.witness {
            out.push_str("\n[witness]\n");
            let parts: Vec<String> = w.components.iter().map(|(l, _)| l.clone()).collect();
            let _ = writeln!(out, "components: {}", parts.join(" + "));
            let _ = writeln!(out, "total: {:.6} +- {:.6}", w.total, w.sigma_total);
            let _ = writeln!(out, "bound: {:.6}", w.bound);
            let _ = writeln!(out, "violated: {}", yes_no(w.violated));
            let _ = writeln!(out, "significance_sigma: {:.3}", w.significance());
        }
        if !self.notes.is_empty() {
            out.push('\n');
            for n in &self.notes {
                let _ = writeln!(out, "note: {n}");
            }
        }
        out
    }
}
