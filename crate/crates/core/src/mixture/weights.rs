use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::DomainStats;

/// Class multipliers for one domain. `w_short` is fixed at 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainWeights {
    pub w_short: f64,
    pub w_long: f64,
    /// False when the target cannot be reached (the domain is all long).
    pub reachable: bool,
}

impl DomainWeights {
    /// Expected long share of the drawn mass given the class masses.
    pub fn long_share(&self, short_mass: f64, long_mass: f64) -> f64 {
        let long = self.w_long * long_mass;
        let total = long + self.w_short * short_mass;
        if total > 0.0 {
            long / total
        } else {
            0.0
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    pub domains: BTreeMap<String, DomainWeights>,
}

/// Closed-form long-class multiplier: with short mass `short`, long mass
/// `long` and `w_short = 1`, `w_long = f·short / ((1 - f)·long)` makes the
/// expected long share `w_long·long / (w_long·long + short)` exactly `f`.
///
/// Returns `None` when `long == 0` (no long mass to upweight). When
/// `short == 0` every draw is long whatever the weight; 1.0 is returned.
pub fn solve_class_weight(short: f64, long: f64, target: f64) -> Option<f64> {
    if long <= 0.0 {
        return None;
    }
    if short <= 0.0 {
        return Some(1.0);
    }
    Some(target * short / ((1.0 - target) * long))
}

/// Solve per-domain weights on token mass (`short_tokens`, `long_tokens`).
/// Targets below the current fraction give `w_long < 1` (downsampling).
pub fn solve_upsample_weights(
    stats: &BTreeMap<String, DomainStats>,
    target_long_fraction: f64,
) -> Result<ClassWeights> {
    if !(target_long_fraction > 0.0 && target_long_fraction < 1.0) {
        return Err(Error::invalid(
            "target_long_fraction",
            format!("must be in (0, 1), got {target_long_fraction}"),
        ));
    }
    let mut domains = BTreeMap::new();
    for (name, d) in stats {
        let w_long = solve_class_weight(d.short_tokens as f64, d.long_tokens as f64, target_long_fraction)
            .ok_or_else(|| Error::NoLongDocuments(name.clone()))?;
        domains.insert(
            name.clone(),
            DomainWeights {
                w_short: 1.0,
                w_long,
                reachable: d.short_tokens > 0,
            },
        );
    }
    Ok(ClassWeights { domains })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn stats(short: u64, long: u64) -> BTreeMap<String, DomainStats> {
        let d = DomainStats {
            domain: "A".into(),
            doc_count: 10,
            token_count: short + long,
            short_tokens: short,
            long_tokens: long,
            long_doc_count: u64::from(long > 0),
        };
        [("A".to_owned(), d)].into()
    }

    // independent plug-back: expected long fraction of the weighted mass
    fn plug_back(s: f64, l: f64, w: f64) -> f64 {
        (w * l) / (w * l + s)
    }

    #[test]
    fn seventy_percent_from_thirty() {
        let w = solve_upsample_weights(&stats(700, 300), 0.7).unwrap().domains["A"];
        assert!((w.w_long - 49.0 / 9.0).abs() < 1e-12);
        assert!((plug_back(700.0, 300.0, w.w_long) - 0.7).abs() < 1e-12);
        assert_eq!(w.w_short, 1.0);
    }

    #[test]
    fn current_fraction_is_a_fixed_point() {
        let w = solve_upsample_weights(&stats(700, 300), 0.3).unwrap().domains["A"];
        assert!((w.w_long - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lower_target_downsamples() {
        let w = solve_upsample_weights(&stats(700, 300), 0.1).unwrap().domains["A"];
        assert!(w.w_long < 1.0);
    }

    #[test]
    fn all_long_domain_is_unreachable() {
        let w = solve_upsample_weights(&stats(0, 300), 0.7).unwrap().domains["A"];
        assert!(!w.reachable);
        assert_eq!(w.long_share(0.0, 300.0), 1.0);
    }

    #[test]
    fn no_long_documents_is_an_error() {
        let err = solve_upsample_weights(&stats(700, 0), 0.7).unwrap_err();
        assert!(err.to_string().contains("no long documents"));
    }

    proptest! {
        #[test]
        fn plug_back_identity(s in 1u64..10_000_000, l in 1u64..10_000_000, f in 0.001f64..0.999) {
            let w = solve_class_weight(s as f64, l as f64, f).unwrap();
            prop_assert!((plug_back(s as f64, l as f64, w) - f).abs() < 1e-12);
        }

        #[test]
        fn raising_target_never_lowers_weight(s in 1u64..1_000_000, l in 1u64..1_000_000,
                                              f in 0.01f64..0.98, df in 0.0f64..0.01) {
            let a = solve_class_weight(s as f64, l as f64, f).unwrap();
            let b = solve_class_weight(s as f64, l as f64, f + df).unwrap();
            prop_assert!(b >= a);
        }
    }
}
