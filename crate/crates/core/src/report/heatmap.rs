use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::needle::HeatmapGrid;
use crate::svg;

pub const DEFAULT_GREEN_THRESHOLD: f64 = 0.8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeatmapFiles {
    pub csv: PathBuf,
    pub svg: PathBuf,
}

/// Green at or above `threshold`; below it, red shading toward yellow as
/// the score approaches the threshold.
pub fn heatmap_fill(score: f64, threshold: f64) -> String {
    if score >= threshold {
        return "#2e9e4f".into();
    }
    let t = if threshold > 0.0 { (score / threshold).clamp(0.0, 1.0) } else { 0.0 };
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(215.0, 254.0), lerp(48.0, 224.0), lerp(31.0, 139.0))
}

/// Index of the last length column not beyond `train_len`.
fn marker_column(lengths: &[u64], train_len: Option<u64>) -> Option<usize> {
    let t = train_len?;
    lengths.iter().rposition(|&l| l <= t)
}

/// Write `<stem>.csv` and `<stem>.svg`. Rows are depths, columns lengths;
/// the `|` column sits right after the training length. The last two rows
/// hold per-length means and the overall mean.
pub fn render_heatmap(
    grid: &HeatmapGrid,
    green_threshold: f64,
    train_len: Option<u64>,
    out_dir: &Path,
    stem: &str,
) -> Result<HeatmapFiles> {
    if grid.scores.len() != grid.depths.len() || grid.scores.iter().any(|r| r.len() != grid.lengths.len()) {
        return Err(Error::invalid("heatmap", "grid is incomplete"));
    }
    if !(0.0..=1.0).contains(&green_threshold) {
        return Err(Error::invalid("green_threshold", format!("{green_threshold} outside [0, 1]")));
    }
    let marker = marker_column(&grid.lengths, train_len);
    let row = |first: String, vals: &[String]| -> String {
        let mut cols = vec![first];
        for (j, v) in vals.iter().enumerate() {
            cols.push(v.clone());
            if Some(j) == marker {
                cols.push("|".into());
            }
        }
        cols.join(",")
    };

    let mut csv = String::new();
    let head: Vec<String> = grid.lengths.iter().map(u64::to_string).collect();
    let _ = writeln!(csv, "{}", row("depth".into(), &head));
    for (d, scores) in grid.depths.iter().zip(&grid.scores) {
        let vals: Vec<String> = scores.iter().map(|s| format!("{s:.4}")).collect();
        let _ = writeln!(csv, "{}", row(format!("{d:.4}"), &vals));
    }
    let col_means: Vec<String> = (0..grid.lengths.len())
        .map(|j| grid.scores.iter().map(|r| r[j]).sum::<f64>() / grid.depths.len() as f64)
        .map(|m| format!("{m:.4}"))
        .collect();
    let _ = writeln!(csv, "{}", row("mean".into(), &col_means));
    let _ = writeln!(csv, "overall,{:.4}", grid.mean);

    let cells: Vec<Vec<svg::Cell>> = grid
        .scores
        .iter()
        .map(|r| {
            r.iter()
                .map(|&s| svg::Cell {
                    fill: heatmap_fill(s, green_threshold),
                    text: String::new(),
                })
                .collect()
        })
        .collect();
    let cols: Vec<String> = grid.lengths.iter().map(|&l| svg::short_len(l)).collect();
    let rows: Vec<String> = grid.depths.iter().map(|d| format!("{:.0}%", d * 100.0)).collect();
    let title = format!("Needle retrieval, mean {:.1}", grid.mean * 100.0);
    let image = svg::grid(&title, &cols, &rows, &cells, marker);

    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let files = HeatmapFiles {
        csv: out_dir.join(format!("{stem}.csv")),
        svg: out_dir.join(format!("{stem}.svg")),
    };
    std::fs::write(&files.csv, csv).map_err(|e| Error::io(&files.csv, e))?;
    std::fs::write(&files.svg, image).map_err(|e| Error::io(&files.svg, e))?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(lengths: Vec<u64>, depths: Vec<f64>, f: impl Fn(u64) -> f64) -> HeatmapGrid {
        let scores: Vec<Vec<f64>> = depths.iter().map(|_| lengths.iter().map(|&l| f(l)).collect()).collect();
        let n = (lengths.len() * depths.len()) as f64;
        let mean = scores.iter().flatten().sum::<f64>() / n;
        HeatmapGrid {
            lengths,
            depths,
            scores,
            mean,
        }
    }

    #[test]
    fn all_green() {
        let dir = tempfile::tempdir().unwrap();
        let g = grid(vec![1024, 4096], vec![0.0, 1.0], |_| 1.0);
        let f = render_heatmap(&g, 0.8, None, dir.path(), "h").unwrap();
        let svg = std::fs::read_to_string(f.svg).unwrap();
        assert_eq!(svg.matches("#2e9e4f").count(), 4);
        assert!(svg.contains("mean 100.0"));
        let csv = std::fs::read_to_string(f.csv).unwrap();
        assert!(csv.ends_with("overall,1.0000\n"));
    }

    #[test]
    fn marker_splits_trained_region() {
        let dir = tempfile::tempdir().unwrap();
        let lengths = vec![40_960, 81_920, 102_400, 131_072];
        let g = grid(lengths, vec![0.0, 0.5, 1.0], |l| if l <= 81_920 { 1.0 } else { 0.0 });
        let f = render_heatmap(&g, 0.8, Some(81_920), dir.path(), "h").unwrap();
        let csv = std::fs::read_to_string(f.csv).unwrap();
        let head = csv.lines().next().unwrap();
        assert_eq!(head, "depth,40960,81920,|,102400,131072");
        for line in csv.lines().skip(1).take(3) {
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!(&cols[1..], ["1.0000", "1.0000", "|", "0.0000", "0.0000"]);
        }
        assert!(std::fs::read_to_string(f.svg).unwrap().contains("stroke-dasharray"));
    }

    #[test]
    fn zero_threshold() {
        assert_eq!(heatmap_fill(0.01, 0.0), "#2e9e4f");
        assert_eq!(heatmap_fill(0.0, 0.8), "#d7301f");
        assert_ne!(heatmap_fill(0.79, 0.8), "#2e9e4f");
    }

    #[test]
    fn rejects_ragged_grid() {
        let dir = tempfile::tempdir().unwrap();
        let mut g = grid(vec![1, 2], vec![0.0], |_| 1.0);
        g.scores[0].pop();
        assert!(render_heatmap(&g, 0.8, None, dir.path(), "h").is_err());
    }
}
