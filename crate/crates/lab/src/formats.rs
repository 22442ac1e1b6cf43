//! On-disk formats: trial logs, counts files, sweep series and scan files.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use bellamp_core::detection::{AClick, Verdict};
use bellamp_core::experiment::{CoincidenceTable, Counts, ScanPoint, Setting};
use bellamp_core::polarization::{Basis, PolAngle};
use bellamp_core::sweep::SweepResult;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn parse_err(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Parse { line, msg: msg.into() }
}

/// Angles in logs and files are rounded to 1e−9 degrees so that files
/// compare bit-identically across platforms.
pub fn round_deg(deg: f64) -> f64 {
    let r = (deg * 1e9).round() / 1e9;
    if r == 180.0 {
        0.0
    } else {
        r + 0.0
    }
}

/// One line of a trial log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogLine {
    pub trial_id: u64,
    pub timestamp: u64,
    pub a_basis_deg: f64,
    pub b_basis_deg: f64,
    pub a_click: AClick,
    pub i_plus: f64,
    pub i_minus: f64,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden_theta_deg: Option<f64>,
}

impl LogLine {
    pub fn new(r: &bellamp_core::experiment::TrialRecord, reveal_hidden: bool) -> Self {
        LogLine {
            trial_id: r.trial_id,
            timestamp: r.timestamp,
            a_basis_deg: round_deg(r.a_basis.primary.degrees()),
            b_basis_deg: round_deg(r.b_basis.primary.degrees()),
            a_click: r.a_click,
            i_plus: r.i_plus,
            i_minus: r.i_minus,
            verdict: r.verdict,
            hidden_theta_deg: reveal_hidden.then(|| round_deg(r.hidden_theta.degrees())),
        }
    }

    pub fn setting(&self) -> Setting {
        Setting::from_degrees(self.a_basis_deg, self.b_basis_deg)
    }
}

pub fn write_trial_log<'a, W: Write>(
    mut w: W,
    records: impl IntoIterator<Item = &'a bellamp_core::experiment::TrialRecord>,
    reveal_hidden: bool,
) -> Result<(), FormatError> {
    for r in records {
        serde_json::to_writer(&mut w, &LogLine::new(r, reveal_hidden)).map_err(io::Error::from)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_trial_log<R: BufRead>(r: R) -> Result<Vec<LogLine>, FormatError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| parse_err(i + 1, e.to_string()))?);
    }
    Ok(out)
}

/// Tallies log lines into a table; settings appear in order of first use.
pub fn table_from_log(lines: &[LogLine]) -> CoincidenceTable {
    let mut table = CoincidenceTable::default();
    for l in lines {
        table.entry(l.setting()).record(l.a_click, l.verdict);
    }
    table
}

/// Whether text looks like a trial log rather than a counts file.
pub fn is_trial_log(text: &str) -> bool {
    text.lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .is_some_and(|l| l.starts_with('{'))
}

fn distinct(angles: impl Iterator<Item = PolAngle>) -> Vec<PolAngle> {
    let mut out: Vec<PolAngle> = Vec::new();
    for a in angles {
        if !out.iter().any(|&x| Basis::new(x).approx_eq(Basis::new(a))) {
            out.push(a);
        }
    }
    out
}

fn fmt_deg(deg: f64) -> String {
    format!("{}", round_deg(deg))
}

/// Writes a table in the grid layout: one column pair per A angle
/// (A₁, A₂), one row pair per B angle (`+`, `−`). Settings absent from the
/// table are written as `-`. `trials` and `conclusive` rows follow when the
/// table carries trial totals.
pub fn write_counts(table: &CoincidenceTable) -> String {
    let alphas = distinct(table.entries.iter().map(|(s, _)| s.a.primary));
    let betas = distinct(table.entries.iter().map(|(s, _)| s.b.primary));
    let lookup = |a: PolAngle, b: PolAngle| table.get(&Setting::new(Basis::new(a), Basis::new(b)));
    let mut out = String::new();
    out.push_str("# Columns: A analyzer angle and APD. Rows: B analyzer angle and verdict.\n");
    let _ = writeln!(out, "alpha_deg {}", alphas.iter().map(|a| fmt_deg(a.degrees())).collect::<Vec<_>>().join(" "));
    let _ = writeln!(out, "beta_deg {}", betas.iter().map(|b| fmt_deg(b.degrees())).collect::<Vec<_>>().join(" "));
    let header: Vec<String> = (1..=alphas.len()).flat_map(|i| [format!("a{i}:A1"), format!("a{i}:A2")]).collect();
    let _ = writeln!(out, "# {}", header.join(" "));
    let with_totals = table.entries.iter().any(|(_, c)| c.trials > 0);
    for (j, &b) in betas.iter().enumerate() {
        let cells = |f: &dyn Fn(&Counts) -> [u64; 2]| -> String {
            alphas
                .iter()
                .flat_map(|&a| match lookup(a, b) {
                    Some(c) => f(c).map(|x| x.to_string()),
                    None => ["-".to_string(), "-".to_string()],
                })
                .collect::<Vec<_>>()
                .join(" ")
        };
        let _ = writeln!(out, "b{}+ {}", j + 1, cells(&|c| [c.a1_plus, c.a2_plus]));
        let _ = writeln!(out, "b{}- {}", j + 1, cells(&|c| [c.a1_minus, c.a2_minus]));
        if with_totals {
            let single = |f: &dyn Fn(&Counts) -> u64| -> String {
                alphas
                    .iter()
                    .map(|&a| lookup(a, b).map_or("-".to_string(), |c| f(c).to_string()))
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            let _ = writeln!(out, "b{}:trials {}", j + 1, single(&|c| c.trials));
            let _ = writeln!(out, "b{}:conclusive {}", j + 1, single(&|c| c.conclusive));
        }
    }
    out
}

fn parse_cell(tok: &str, line: usize) -> Result<Option<u64>, FormatError> {
    if tok == "-" {
        return Ok(None);
    }
    tok.parse::<u64>()
        .map(Some)
        .map_err(|_| parse_err(line, format!("bad count {tok:?}")))
}

fn parse_angles(rest: &[&str], line: usize) -> Result<Vec<f64>, FormatError> {
    rest.iter()
        .map(|t| t.parse::<f64>().map_err(|_| parse_err(line, format!("bad angle {t:?}"))))
        .collect()
}

#[derive(Default)]
struct Cell {
    plus: Option<[Option<u64>; 2]>,
    minus: Option<[Option<u64>; 2]>,
    trials: Option<Option<u64>>,
    conclusive: Option<Option<u64>>,
}

/// Parses the grid layout written by [`write_counts`].
pub fn parse_counts(text: &str) -> Result<CoincidenceTable, FormatError> {
    let mut alphas: Option<Vec<f64>> = None;
    let mut betas: Option<Vec<f64>> = None;
    // cells[b][a]
    let mut cells: Vec<Vec<Cell>> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "alpha_deg" => alphas = Some(parse_angles(&toks[1..], n)?),
            "beta_deg" => betas = Some(parse_angles(&toks[1..], n)?),
            label => {
                let (Some(a), Some(b)) = (&alphas, &betas) else {
                    return Err(parse_err(n, "alpha_deg and beta_deg must precede the counts"));
                };
                if cells.is_empty() {
                    cells = (0..b.len()).map(|_| (0..a.len()).map(|_| Cell::default()).collect()).collect();
                }
                let row = parse_row_label(label, b.len(), n)?;
                let values = toks[1..]
                    .iter()
                    .map(|t| parse_cell(t, n))
                    .collect::<Result<Vec<_>, _>>()?;
                let per_a = if matches!(row.1, RowKind::Plus | RowKind::Minus) { 2 } else { 1 };
                if values.len() != per_a * a.len() {
                    return Err(parse_err(n, format!("expected {} values, got {}", per_a * a.len(), values.len())));
                }
                for (k, cell) in cells[row.0].iter_mut().enumerate() {
                    let slot = match row.1 {
                        RowKind::Plus => cell.plus.replace([values[2 * k], values[2 * k + 1]]).is_some(),
                        RowKind::Minus => cell.minus.replace([values[2 * k], values[2 * k + 1]]).is_some(),
                        RowKind::Trials => cell.trials.replace(values[k]).is_some(),
                        RowKind::Conclusive => cell.conclusive.replace(values[k]).is_some(),
                    };
                    if slot {
                        return Err(parse_err(n, format!("duplicate row {label}")));
                    }
                }
            }
        }
    }
    let (Some(alphas), Some(betas)) = (alphas, betas) else {
        return Err(FormatError::Invalid("missing alpha_deg or beta_deg header".into()));
    };
    if cells.is_empty() {
        return Err(FormatError::Invalid("no count rows".into()));
    }
    let mut table = CoincidenceTable::default();
    for (&a, k) in alphas.iter().zip(0..) {
        for (&b, j) in betas.iter().zip(0..) {
            let cell: &Cell = &cells[j][k];
            let (Some(plus), Some(minus)) = (cell.plus, cell.minus) else {
                return Err(FormatError::Invalid(format!("missing b{}+ or b{}- row", j + 1, j + 1)));
            };
            let all = [plus[0], plus[1], minus[0], minus[1]];
            if all.iter().all(Option::is_none) {
                continue;
            }
            let [Some(p1), Some(p2), Some(m1), Some(m2)] = all else {
                return Err(FormatError::Invalid(format!("partially missing block at a{} b{}", k + 1, j + 1)));
            };
            let mut counts = Counts::from_cells(p1, m1, p2, m2);
            if let Some(Some(t)) = cell.trials {
                counts.trials = t;
                counts.conclusive = cell.conclusive.flatten().unwrap_or(counts.coincidences());
            }
            table.entries.push((Setting::from_degrees(a, b), counts));
        }
    }
    Ok(table)
}

enum RowKind {
    Plus,
    Minus,
    Trials,
    Conclusive,
}

fn parse_row_label(label: &str, n_beta: usize, line: usize) -> Result<(usize, RowKind), FormatError> {
    let bad = || parse_err(line, format!("unknown row {label:?}"));
    let rest = label.strip_prefix('b').ok_or_else(bad)?;
    let digits: String = rest.chars().take_while(char::is_ascii_digit).collect();
    let kind = match &rest[digits.len()..] {
        "+" => RowKind::Plus,
        "-" => RowKind::Minus,
        ":trials" => RowKind::Trials,
        ":conclusive" => RowKind::Conclusive,
        _ => return Err(bad()),
    };
    let j: usize = digits.parse().map_err(|_| bad())?;
    if j == 0 || j > n_beta {
        return Err(parse_err(line, format!("row {label} has no beta_deg entry")));
    }
    Ok((j - 1, kind))
}

/// Sweep rows as whitespace-separated columns.
pub fn write_series(sweep: &SweepResult) -> String {
    let mut out = String::from("# threshold success_probability sigma_success S sigma_S trials conclusive\n");
    for r in &sweep.rows {
        let _ = writeln!(
            out,
            "{:.9} {:.6} {:.6} {:.6} {:.6} {} {}",
            r.threshold, r.success_probability, r.sigma_success, r.s, r.sigma_s, r.trials, r.conclusive
        );
    }
    out
}

/// One fringe scan: coincidences against A angle at a fixed B basis.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanFile {
    pub label: String,
    pub beta_deg: Option<f64>,
    /// (alpha in degrees, count)
    pub points: Vec<(f64, f64)>,
}

impl ScanFile {
    pub fn from_points(label: &str, b: Basis, points: &[ScanPoint]) -> Self {
        ScanFile {
            label: label.to_string(),
            beta_deg: Some(round_deg(b.primary.degrees())),
            points: points
                .iter()
                .map(|p| (round_deg(p.alpha.degrees()), p.coincidences as f64))
                .collect(),
        }
    }
}

pub fn write_scan(scan: &ScanFile) -> String {
    let mut out = format!("label {}\n", scan.label);
    if let Some(b) = scan.beta_deg {
        let _ = writeln!(out, "beta_deg {b}");
    }
    out.push_str("# alpha_deg count\n");
    for (a, c) in &scan.points {
        let _ = writeln!(out, "{a} {c}");
    }
    out
}

pub fn parse_scan(text: &str, default_label: &str) -> Result<ScanFile, FormatError> {
    let mut scan = ScanFile {
        label: default_label.to_string(),
        beta_deg: None,
        points: Vec::new(),
    };
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match (toks[0], toks.len()) {
            ("label", 2) => scan.label = toks[1].to_string(),
            ("beta_deg", 2) => scan.beta_deg = Some(parse_angles(&toks[1..], i + 1)?[0]),
            (_, 2) => {
                let v = parse_angles(&toks, i + 1)?;
                scan.points.push((v[0], v[1]));
            }
            _ => return Err(parse_err(i + 1, format!("unexpected line {line:?}"))),
        }
    }
    Ok(scan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use bellamp_core::analysis::ChshSettings;

    #[test]
    fn rounding() {
        assert_eq!(round_deg(22.499999999999996), 22.5);
        assert_eq!(round_deg(179.9999999999), 0.0);
        assert_eq!(round_deg(-0.0).to_bits(), 0.0f64.to_bits());
    }

    fn chsh_table() -> CoincidenceTable {
        let s = ChshSettings::standard().settings();
        CoincidenceTable {
            entries: vec![
                (s[0], Counts::from_cells(15, 144, 134, 26)),
                (s[1], Counts::from_cells(35, 118, 132, 59)),
                (s[2], Counts::from_cells(112, 46, 44, 135)),
                (s[3], Counts::from_cells(29, 150, 135, 27)),
            ],
        }
    }

    #[test]
    fn counts_round_trip() {
        let t = chsh_table();
        let text = write_counts(&t);
        let back = parse_counts(&text).unwrap();
        for (s, c) in &t.entries {
            assert_eq!(back.get(s), Some(c));
        }
        assert_eq!(write_counts(&back), text);
    }

    #[test]
    fn counts_with_totals_round_trip() {
        let mut t = chsh_table();
        for (_, c) in &mut t.entries {
            c.trials = 1000;
            c.conclusive = c.coincidences() + 7;
        }
        let back = parse_counts(&write_counts(&t)).unwrap();
        for (s, c) in &t.entries {
            assert_eq!(back.get(s), Some(c));
        }
    }

    #[test]
    fn missing_setting_is_dash() {
        let mut t = chsh_table();
        t.entries.remove(2);
        let text = write_counts(&t);
        assert!(text.contains('-'));
        let back = parse_counts(&text).unwrap();
        assert_eq!(back.entries.len(), 3);
    }

    #[test]
    fn shipped_table_parses() {
        let text = crate::config::preset("photodiode_counts.txt").unwrap();
        let t = parse_counts(text).unwrap();
        assert_eq!(t.entries.len(), 4);
        let total: u64 = t.entries.iter().map(|(_, c)| c.coincidences()).sum();
        assert_eq!(total, 1341);
        assert_eq!(t.get(&ChshSettings::standard().settings()[0]), Some(&Counts::from_cells(15, 144, 134, 26)));
    }

    #[test]
    fn bad_counts_are_rejected() {
        for bad in [
            "",
            "b1+ 1 2",
            "alpha_deg 0\nbeta_deg 0\nb1+ 1\nb1- 1 2",
            "alpha_deg 0\nbeta_deg 0\nb1+ 1 x\nb1- 1 2",
            "alpha_deg 0\nbeta_deg 0\nb1+ 1 2",
            "alpha_deg 0\nbeta_deg 0\nb2+ 1 2\nb2- 1 2",
            "alpha_deg 0\nbeta_deg 0\nb1+ 1 -\nb1- 1 2",
            "alpha_deg 0\nbeta_deg 0\nb1+ 1 2\nb1+ 1 2\nb1- 1 2",
        ] {
            assert!(parse_counts(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn scan_round_trip() {
        let scan = ScanFile {
            label: "HV".into(),
            beta_deg: Some(0.0),
            points: (0..8).map(|i| (22.5 * i as f64, 100.0 + i as f64)).collect(),
        };
        assert_eq!(parse_scan(&write_scan(&scan), "x").unwrap(), scan);
        let bare = parse_scan("0 10\n90 20\n", "fallback").unwrap();
        assert_eq!(bare.label, "fallback");
        assert!(parse_scan("0 1 2\n", "x").is_err());
    }

    #[test]
    fn trial_log_round_trips_exactly() {
        use bellamp_core::cloner::ClonerConfig;
        use bellamp_core::detection::ThresholdConfig;
        use bellamp_core::experiment::{run_experiment, Detector, RunConfig, Schedule};
        use bellamp_core::polarization::PairSource;

        let cfg = RunConfig {
            trials_per_setting: 50,
            schedule: Schedule::sequential(ChshSettings::standard().settings().to_vec()),
            seed: 1,
            source: PairSource::ideal(),
            cloner: ClonerConfig::default(),
            detector: Detector::Threshold(ThresholdConfig::new(0.2, 0.01).unwrap()),
            a_efficiency: 0.8,
        };
        let out = run_experiment(&cfg).unwrap();
        let mut buf = Vec::new();
        write_trial_log(&mut buf, &out.records, true).unwrap();
        let lines = read_trial_log(buf.as_slice()).unwrap();
        assert_eq!(lines.len(), out.records.len());
        for (l, r) in lines.iter().zip(&out.records) {
            assert_eq!(l, &LogLine::new(r, true));
            assert_eq!(l.i_plus.to_bits(), r.i_plus.to_bits());
        }
        assert_eq!(table_from_log(&lines), out.table);
        assert!(read_trial_log("{\"trial_id\": 1}\n".as_bytes()).is_err());
    }

    #[test]
    fn log_detection() {
        assert!(is_trial_log("\n{\"trial_id\":0}"));
        assert!(!is_trial_log("# x\nalpha_deg 0"));
        assert!(!is_trial_log(""));
    }
}
