use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::svg;

/// Loss differences above this magnitude count as significant.
pub const DEFAULT_SIGNIFICANCE: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Significance {
    Improvement,
    None,
    Regression,
}

impl Significance {
    pub fn as_str(self) -> &'static str {
        match self {
            Significance::Improvement => "improvement",
            Significance::None => "none",
            Significance::Regression => "regression",
        }
    }
}

/// Deltas are snapped to a 1e-12 grid first, so `2.048 - 2.038` counts as
/// exactly 0.01 rather than a hair above it.
fn snap(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

/// Strict comparison: `delta > t` is a regression, `delta < -t` an
/// improvement, anything in `[-t, t]` is none.
pub fn classify_delta(delta: f64, threshold: f64) -> Result<Significance> {
    if !delta.is_finite() {
        return Err(Error::invalid("delta", format!("{delta} is not finite")));
    }
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(Error::invalid("threshold", format!("{threshold} must be positive")));
    }
    let (d, t) = (snap(delta), snap(threshold));
    Ok(if d > t {
        Significance::Regression
    } else if d < -t {
        Significance::Improvement
    } else {
        Significance::None
    })
}

/// `+.002`, `-.065`, `-0.300`: three decimals, leading zero dropped below 1.
pub fn format_delta(delta: f64) -> String {
    let s = format!("{:+.3}", snap(delta));
    s.replacen("+0.", "+.", 1).replacen("-0.", "-.", 1)
}

/// A context-length band, `(low, high]` tokens.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthBand {
    pub name: String,
    pub low: u64,
    pub high: u64,
}

impl LengthBand {
    pub fn label(&self) -> String {
        format!("{} - {}", svg::short_len(self.low), svg::short_len(self.high))
    }
}

/// `short` = (0, 4K], `long` = (4K, 128K].
pub fn default_bands() -> Vec<LengthBand> {
    vec![
        LengthBand {
            name: "short".into(),
            low: 0,
            high: 4096,
        },
        LengthBand {
            name: "long".into(),
            low: 4096,
            high: 131_072,
        },
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossRecord {
    pub run_id: String,
    pub domain: String,
    pub band: String,
    pub loss: f64,
}

impl LossRecord {
    fn validate(&self) -> Result<()> {
        if !(self.loss.is_finite() && self.loss >= 0.0) {
            return Err(Error::invalid(
                "loss",
                format!("{} for {}/{}/{}", self.loss, self.run_id, self.domain, self.band),
            ));
        }
        Ok(())
    }
}

/// Read `run_id,domain,band,loss` rows (header required).
pub fn read_loss_csv(path: &Path) -> Result<Vec<LossRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut out = Vec::new();
    for rec in rdr.deserialize::<LossRecord>() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        rec.validate()?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_loss_csv(path: &Path, records: &[LossRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for r in records {
        w.serialize(r).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        kind => Error::Malformed {
            path: path.to_owned(),
            line,
            msg: format!("{kind:?}"),
        },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossDiffRow {
    pub variant: String,
    pub domain: String,
    pub band: String,
    pub baseline_loss: f64,
    pub variant_loss: f64,
    pub delta: f64,
    pub class: Significance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossDiffReport {
    pub baseline: String,
    pub threshold: f64,
    /// Domains, bands and variants in first-seen order.
    pub domains: Vec<String>,
    pub bands: Vec<String>,
    pub variants: Vec<String>,
    pub baseline_losses: BTreeMap<(String, String), f64>,
    pub rows: Vec<LossDiffRow>,
}

fn push_unique(v: &mut Vec<String>, s: &str) {
    if !v.iter().any(|x| x == s) {
        v.push(s.to_owned());
    }
}

/// `delta = variant - baseline` for every variant cell. The baseline must
/// be a single run; every variant (domain, band) needs a baseline cell.
pub fn loss_diff_table(baseline: &[LossRecord], variants: &[LossRecord], threshold: f64) -> Result<LossDiffReport> {
    let runs: BTreeSet<&str> = baseline.iter().map(|r| r.run_id.as_str()).collect();
    let base_id = match runs.len() {
        0 => return Err(Error::invalid("baseline", "no loss records")),
        1 => runs.into_iter().next().unwrap_or_default().to_owned(),
        _ => return Err(Error::invalid("baseline", format!("expected one run, found {}", runs.len()))),
    };
    let (mut domains, mut bands, mut names) = (Vec::new(), Vec::new(), Vec::new());
    let mut base = BTreeMap::new();
    for r in baseline {
        r.validate()?;
        if base.insert((r.domain.clone(), r.band.clone()), r.loss).is_some() {
            return Err(Error::invalid("baseline", format!("duplicate cell {}/{}", r.domain, r.band)));
        }
        push_unique(&mut domains, &r.domain);
        push_unique(&mut bands, &r.band);
    }
    let mut seen = BTreeSet::new();
    let mut rows = Vec::with_capacity(variants.len());
    for v in variants {
        v.validate()?;
        if !seen.insert((&v.run_id, &v.domain, &v.band)) {
            return Err(Error::invalid(
                "variant",
                format!("duplicate cell {}/{}/{}", v.run_id, v.domain, v.band),
            ));
        }
        let b = *base
            .get(&(v.domain.clone(), v.band.clone()))
            .ok_or_else(|| Error::MissingBaseline {
                domain: v.domain.clone(),
                band: v.band.clone(),
            })?;
        let delta = v.loss - b;
        rows.push(LossDiffRow {
            variant: v.run_id.clone(),
            domain: v.domain.clone(),
            band: v.band.clone(),
            baseline_loss: b,
            variant_loss: v.loss,
            delta,
            class: classify_delta(delta, threshold)?,
        });
        push_unique(&mut names, &v.run_id);
    }
    Ok(LossDiffReport {
        baseline: base_id,
        threshold,
        domains,
        bands,
        variants: names,
        baseline_losses: base,
        rows,
    })
}

impl LossDiffReport {
    pub fn cell(&self, variant: &str, domain: &str, band: &str) -> Option<&LossDiffRow> {
        self.rows
            .iter()
            .find(|r| r.variant == variant && r.domain == domain && r.band == band)
    }

    /// Bands in the order of `order` first, then any others as seen.
    fn band_order(&self, order: &[LengthBand]) -> Vec<String> {
        let mut out: Vec<String> = order
            .iter()
            .map(|b| b.name.clone())
            .filter(|b| self.bands.contains(b))
            .collect();
        for b in &self.bands {
            push_unique(&mut out, b);
        }
        out
    }

    fn band_title(name: &str, bands: &[LengthBand]) -> String {
        bands
            .iter()
            .find(|b| b.name == name)
            .map_or_else(|| name.to_owned(), |b| format!("{} Context Length", b.label()))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("variant,domain,band,baseline_loss,variant_loss,delta,class\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{:.6},{:.6},{:.6},{}",
                r.variant,
                r.domain,
                r.band,
                r.baseline_loss,
                r.variant_loss,
                snap(r.delta),
                r.class.as_str()
            );
        }
        out
    }

    /// Markdown table grouped by band: the baseline losses, then one
    /// `vs <variant>` row of signed deltas per variant. Significant cells
    /// are marked `(+)` for regressions and `(-)` for improvements.
    pub fn to_markdown(&self, bands: &[LengthBand]) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "| | {} |", self.domains.join(" | "));
        let _ = writeln!(out, "|---|{}", "---|".repeat(self.domains.len()));
        for band in self.band_order(bands) {
            let _ = writeln!(out, "| **{}** |{}", Self::band_title(&band, bands), " |".repeat(self.domains.len()));
            let base: Vec<String> = self
                .domains
                .iter()
                .map(|d| {
                    self.baseline_losses
                        .get(&(d.clone(), band.clone()))
                        .map_or_else(|| "n/a".into(), |l| format!("{l:.3}"))
                })
                .collect();
            let _ = writeln!(out, "| {} | {} |", self.baseline, base.join(" | "));
            for v in &self.variants {
                let cells: Vec<String> = self
                    .domains
                    .iter()
                    .map(|d| match self.cell(v, d, &band) {
                        Some(r) => match r.class {
                            Significance::Regression => format!("{} (+)", format_delta(r.delta)),
                            Significance::Improvement => format!("{} (-)", format_delta(r.delta)),
                            Significance::None => format_delta(r.delta),
                        },
                        None => "n/a".into(),
                    })
                    .collect();
                let _ = writeln!(out, "| vs {v} | {} |", cells.join(" | "));
            }
        }
        out
    }

    /// Shaded grid: red regressions, green improvements, grey otherwise,
    /// with shade depth growing with |delta|.
    pub fn to_svg(&self, bands: &[LengthBand]) -> String {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for band in self.band_order(bands) {
            for v in &self.variants {
                labels.push(format!("{band}: {v}"));
                rows.push(
                    self.domains
                        .iter()
                        .map(|d| match self.cell(v, d, &band) {
                            Some(r) => svg::Cell {
                                fill: shade(r.class, r.delta, self.threshold),
                                text: format_delta(r.delta),
                            },
                            None => svg::Cell {
                                fill: "#ffffff".into(),
                                text: "n/a".into(),
                            },
                        })
                        .collect(),
                );
            }
        }
        svg::grid(
            &format!("Loss difference vs {}", self.baseline),
            &self.domains,
            &labels,
            &rows,
            None,
        )
    }
}

fn shade(class: Significance, delta: f64, threshold: f64) -> String {
    let base = match class {
        Significance::Improvement => (46, 158, 79),
        Significance::Regression => (215, 48, 31),
        Significance::None => (170, 170, 170),
    };
    let depth = if class == Significance::None {
        0.6
    } else {
        (0.35 + 0.65 * (delta.abs() / (threshold * 10.0))).min(1.0)
    };
    svg::mix_white(base, depth)
}
