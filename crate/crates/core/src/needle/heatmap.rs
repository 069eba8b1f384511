use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::score::{preview, ScoredCase};
use super::spec::case_id;
use crate::error::{Error, Result};

/// Scores laid out as `scores[depth][length]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatmapGrid {
    pub lengths: Vec<u64>,
    pub depths: Vec<f64>,
    pub scores: Vec<Vec<f64>>,
    pub mean: f64,
}

impl HeatmapGrid {
    pub fn score(&self, length_index: usize, depth_index: usize) -> f64 {
        self.scores[depth_index][length_index]
    }

    pub fn cells(&self) -> usize {
        self.lengths.len() * self.depths.len()
    }
}

/// Assemble the grid spanned by the distinct lengths and depths. Every
/// cell must be scored exactly once.
pub fn aggregate_heatmap(scored: &[ScoredCase]) -> Result<HeatmapGrid> {
    if scored.is_empty() {
        return Err(Error::invalid("heatmap", "no scored cases"));
    }
    if let Some(bad) = scored.iter().find(|s| !(0.0..=1.0).contains(&s.score)) {
        return Err(Error::invalid("heatmap", format!("score {} of {} outside [0, 1]", bad.score, bad.case_id)));
    }
    let mut lengths: Vec<u64> = scored.iter().map(|s| s.context_len).collect();
    lengths.sort_unstable();
    lengths.dedup();
    let mut depths: Vec<f64> = scored.iter().map(|s| s.depth).collect();
    depths.sort_by(f64::total_cmp);
    depths.dedup_by(|a, b| a.to_bits() == b.to_bits());

    let mut cells: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut dupes = Vec::new();
    for s in scored {
        let li = lengths.binary_search(&s.context_len).expect("length collected above");
        let di = depths
            .binary_search_by(|d| d.total_cmp(&s.depth))
            .expect("depth collected above");
        if cells.insert((li, di), s.score).is_some() {
            dupes.push(case_id(s.context_len, s.depth));
        }
    }
    if !dupes.is_empty() {
        let ids: Vec<&str> = dupes.iter().map(String::as_str).collect();
        return Err(Error::invalid("heatmap", format!("duplicate cells: {}", preview(&ids))));
    }
    let mut missing = Vec::new();
    let mut scores = vec![vec![0.0; lengths.len()]; depths.len()];
    for (di, row) in scores.iter_mut().enumerate() {
        for (li, v) in row.iter_mut().enumerate() {
            match cells.get(&(li, di)) {
                Some(&s) => *v = s,
                None => missing.push(case_id(lengths[li], depths[di])),
            }
        }
    }
    if !missing.is_empty() {
        let ids: Vec<&str> = missing.iter().map(String::as_str).collect();
        return Err(Error::invalid("heatmap", format!("missing cells: {}", preview(&ids))));
    }
    let mean = cells.values().sum::<f64>() / cells.len() as f64;
    Ok(HeatmapGrid {
        lengths,
        depths,
        scores,
        mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(lengths: &[u64], depths: &[f64], f: impl Fn(usize) -> f64) -> Vec<ScoredCase> {
        let mut out = Vec::new();
        for &l in lengths {
            for &d in depths {
                let score = f(out.len());
                out.push(ScoredCase {
                    case_id: case_id(l, d),
                    context_len: l,
                    depth: d,
                    score,
                });
            }
        }
        out
    }

    #[test]
    fn all_green_and_half() {
        let g = aggregate_heatmap(&grid(&[1024, 2048], &[0.0, 0.5, 1.0], |_| 1.0)).unwrap();
        assert_eq!((g.mean, g.cells()), (1.0, 6));
        let g = aggregate_heatmap(&grid(&[1024, 2048], &[0.0, 0.5, 1.0], |i| (i % 2) as f64)).unwrap();
        assert_eq!(g.mean, 0.5);
    }

    #[test]
    fn layout_is_depth_by_length() {
        let g = aggregate_heatmap(&grid(&[10, 20], &[0.0, 1.0], |i| i as f64 / 4.0)).unwrap();
        // input order: (10,0) (10,1) (20,0) (20,1)
        assert_eq!(g.scores, vec![vec![0.0, 0.5], vec![0.25, 0.75]]);
    }

    #[test]
    fn mean_reported_as_percentage() {
        let g = aggregate_heatmap(&grid(&[1, 2, 3, 4, 5], &[0.0, 0.25, 0.5, 0.75, 1.0], |i| {
            if i < 22 { 1.0 } else { 0.0 }
        }))
        .unwrap();
        assert_eq!(format!("{:.1}", g.mean * 100.0), "88.0");
    }

    #[test]
    fn rejects_duplicates_and_holes() {
        let mut s = grid(&[1, 2], &[0.0, 1.0], |_| 1.0);
        s.push(s[0].clone());
        let e = aggregate_heatmap(&s).unwrap_err().to_string();
        assert!(e.contains("duplicate") && e.contains("L1-D0.0000"), "{e}");
        let mut s = grid(&[1, 2], &[0.0, 1.0], |_| 1.0);
        s.remove(3);
        let e = aggregate_heatmap(&s).unwrap_err().to_string();
        assert!(e.contains("missing") && e.contains("L2-D1.0000"), "{e}");
        assert!(aggregate_heatmap(&[]).is_err());
    }
}
