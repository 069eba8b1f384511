use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::DEFAULT_LONG_THRESHOLD;

/// Multiplier applied to boosted domains when only their names are given.
pub const DEFAULT_BOOST: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "cut_4k")]
    Cut4k,
    #[serde(rename = "cut_128k")]
    Cut128k,
    #[serde(rename = "per_source_upsample")]
    PerSourceUpsample,
    #[serde(rename = "global_upsample")]
    GlobalUpsample,
    #[serde(rename = "domain_upsample")]
    DomainUpsample,
}

impl Strategy {
    pub fn default_cut_len(self) -> Option<u64> {
        match self {
            Strategy::Cut4k => Some(4096),
            Strategy::Cut128k => Some(131_072),
            _ => None,
        }
    }
}

/// Which quantity `target_long_fraction` refers to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LongBasis {
    #[default]
    Tokens,
    Documents,
}

/// Boosted domains, either as a bare list (each at [`DEFAULT_BOOST`]) or
/// with explicit multipliers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Boost {
    Names(Vec<String>),
    Multipliers(BTreeMap<String, f64>),
}

impl Boost {
    pub fn multipliers(&self) -> BTreeMap<String, f64> {
        match self {
            Boost::Names(names) => names.iter().map(|n| (n.clone(), DEFAULT_BOOST)).collect(),
            Boost::Multipliers(m) => m.clone(),
        }
    }
}

fn default_threshold() -> u64 {
    DEFAULT_LONG_THRESHOLD
}

fn default_target() -> f64 {
    0.7
}

/// The full recipe. Identical spec + identical corpus digest gives a
/// byte-identical dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureSpec {
    pub strategy: Strategy,
    /// Cut documents into chunks of at most this many tokens before
    /// sampling. Defaults to 4096 / 131072 for the cut strategies and to no
    /// cutting otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cut_len: Option<u64>,
    #[serde(default = "default_threshold")]
    pub long_threshold: u64,
    #[serde(default = "default_target")]
    pub target_long_fraction: f64,
    #[serde(default)]
    pub long_basis: LongBasis,
    /// Defaults to the measured corpus shares.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_domain_shares: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boosted_domains: Option<Boost>,
    pub token_budget: u64,
    pub seed: u64,
}

impl MixtureSpec {
    pub fn new(strategy: Strategy, token_budget: u64, seed: u64) -> Self {
        MixtureSpec {
            strategy,
            cut_len: None,
            long_threshold: DEFAULT_LONG_THRESHOLD,
            target_long_fraction: default_target(),
            long_basis: LongBasis::Tokens,
            target_domain_shares: None,
            boosted_domains: None,
            token_budget,
            seed,
        }
    }

    pub fn effective_cut_len(&self) -> Option<u64> {
        self.cut_len.or(self.strategy.default_cut_len())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::invalid("mixture spec", msg));
        if !(self.target_long_fraction > 0.0 && self.target_long_fraction < 1.0) {
            return bad(format!(
                "target_long_fraction must be in (0, 1), got {}",
                self.target_long_fraction
            ));
        }
        if self.token_budget == 0 {
            return bad("token_budget must be positive".into());
        }
        if self.cut_len == Some(0) {
            return bad("cut_len must be positive".into());
        }
        if let Some(shares) = &self.target_domain_shares {
            if shares.values().any(|s| !s.is_finite() || *s < 0.0) {
                return bad("target_domain_shares must be non-negative".into());
            }
            let sum: f64 = shares.values().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return bad(format!("target_domain_shares sum to {sum}, expected 1"));
            }
        }
        match (&self.boosted_domains, self.strategy) {
            (Some(b), _) => {
                let m = b.multipliers();
                if m.is_empty() {
                    return bad("boosted_domains is empty".into());
                }
                if m.values().any(|x| !x.is_finite() || *x <= 0.0) {
                    return bad("boost multipliers must be positive".into());
                }
            }
            (None, Strategy::DomainUpsample) => {
                return bad("domain_upsample needs boosted_domains".into());
            }
            _ => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_toml_with_defaults() {
        let spec: MixtureSpec = toml_like(
            r#"{"strategy":"per_source_upsample","token_budget":5000000000,"seed":7}"#,
        );
        assert_eq!(spec.long_threshold, 4096);
        assert_eq!(spec.target_long_fraction, 0.7);
        assert_eq!(spec.effective_cut_len(), None);
        spec.validate().unwrap();
        let cut: MixtureSpec = toml_like(r#"{"strategy":"cut_4k","token_budget":10,"seed":0}"#);
        assert_eq!(cut.effective_cut_len(), Some(4096));
    }

    fn toml_like(json: &str) -> MixtureSpec {
        serde_json::from_str(json).unwrap()
    }

    #[test]
    fn boost_forms() {
        let s: MixtureSpec = toml_like(
            r#"{"strategy":"domain_upsample","token_budget":10,"seed":0,"boosted_domains":["Book","Arxiv"]}"#,
        );
        assert_eq!(s.boosted_domains.unwrap().multipliers()["Book"], DEFAULT_BOOST);
        let s: MixtureSpec = toml_like(
            r#"{"strategy":"domain_upsample","token_budget":10,"seed":0,"boosted_domains":{"Book":3.0}}"#,
        );
        assert_eq!(s.boosted_domains.unwrap().multipliers()["Book"], 3.0);
    }

    #[test]
    fn validation_errors() {
        let mut s = MixtureSpec::new(Strategy::PerSourceUpsample, 100, 1);
        s.target_long_fraction = 1.0;
        assert!(s.validate().is_err());
        s.target_long_fraction = 0.7;
        s.target_domain_shares = Some([("A".to_owned(), 0.5), ("B".to_owned(), 0.4)].into());
        assert!(s.validate().is_err());
        let s = MixtureSpec::new(Strategy::DomainUpsample, 100, 1);
        assert!(s.validate().is_err());
        let s = MixtureSpec::new(Strategy::Cut4k, 0, 1);
        assert!(s.validate().is_err());
    }
}
