use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::lossdiff::csv_error;
use crate::error::{Error, Result};
use crate::svg;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingCurvePoint {
    pub trained_tokens: u64,
    pub validation_loss: f64,
    pub needle_mean_score: f64,
}

/// Points sorted by `trained_tokens`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingCurve {
    pub points: Vec<ScalingCurvePoint>,
}

pub fn scaling_curve(points: &[ScalingCurvePoint]) -> Result<ScalingCurve> {
    if points.is_empty() {
        return Err(Error::invalid("curve", "no points"));
    }
    for p in points {
        if !p.validation_loss.is_finite() || !(0.0..=1.0).contains(&p.needle_mean_score) {
            return Err(Error::invalid("curve", format!("bad point at {} tokens", p.trained_tokens)));
        }
    }
    let mut points = points.to_vec();
    points.sort_by_key(|p| p.trained_tokens);
    if let Some(w) = points.windows(2).find(|w| w[0].trained_tokens == w[1].trained_tokens) {
        return Err(Error::invalid("curve", format!("duplicate trained_tokens {}", w[0].trained_tokens)));
    }
    Ok(ScalingCurve { points })
}

pub fn read_curve_csv(path: &Path) -> Result<Vec<ScalingCurvePoint>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    rdr.deserialize()
        .map(|r| r.map_err(|e| csv_error(path, e)))
        .collect()
}

impl ScalingCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trained_tokens,validation_loss,needle_mean_score\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{},{}", p.trained_tokens, p.validation_loss, p.needle_mean_score);
        }
        out
    }

    /// Loss and needle score against trained tokens (log axis); each series
    /// is scaled to its own range.
    pub fn to_svg(&self) -> String {
        let xs: Vec<f64> = self.points.iter().map(|p| p.trained_tokens as f64).collect();
        svg::line_chart(
            "Validation loss and needle score vs trained tokens",
            &xs,
            &[
                ("validation loss".into(), self.points.iter().map(|p| p.validation_loss).collect()),
                ("needle score".into(), self.points.iter().map(|p| p.needle_mean_score).collect()),
            ],
            true,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(t: u64) -> ScalingCurvePoint {
        ScalingCurvePoint {
            trained_tokens: t,
            validation_loss: 2.0 - t as f64 / 1e11,
            needle_mean_score: 0.5,
        }
    }

    #[test]
    fn sorted_and_unique() {
        let m = 1_000_000u64;
        let shuffled: Vec<_> = [1000 * m, 100 * m, 10_000 * m, 500 * m, 5000 * m, 300 * m].map(pt).to_vec();
        let c = scaling_curve(&shuffled).unwrap();
        let tokens: Vec<u64> = c.points.iter().map(|p| p.trained_tokens).collect();
        assert_eq!(tokens, [100 * m, 300 * m, 500 * m, 1000 * m, 5000 * m, 10_000 * m]);
        let mut sorted = shuffled.clone();
        sorted.sort_by_key(|p| p.trained_tokens);
        assert_eq!(scaling_curve(&sorted).unwrap(), c);
        assert_eq!(c.to_csv().lines().count(), 7);
        assert!(c.to_svg().contains("polyline"));
        assert_eq!(scaling_curve(&[pt(5)]).unwrap().points.len(), 1);
        assert!(scaling_curve(&[pt(5), pt(5)]).is_err());
        assert!(scaling_curve(&[]).is_err());
    }
}
