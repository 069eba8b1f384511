use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::mixture::{LongBasis, SampledDataset, Tally};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub share_tol: f64,
    pub long_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            share_tol: 0.01,
            long_tol: 0.02,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub domain: String,
    pub target_share: Option<f64>,
    pub realized_share: f64,
    pub share_deviation: Option<f64>,
    pub target_long: Option<f64>,
    pub realized_long_token_fraction: Option<f64>,
    pub realized_long_doc_fraction: Option<f64>,
    pub long_deviation: Option<f64>,
    /// The long target is unreachable for this row; only shares are checked.
    pub flagged: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureAudit {
    pub tolerances: Tolerances,
    pub rows: Vec<AuditRow>,
    pub overall: AuditRow,
    pub pass: bool,
}

fn row(
    domain: &str,
    tally: &Tally,
    total: u64,
    target_share: Option<f64>,
    target_long: Option<f64>,
    flagged: bool,
    basis: LongBasis,
    tol: Tolerances,
) -> AuditRow {
    let realized_share = if total > 0 {
        tally.tokens() as f64 / total as f64
    } else {
        0.0
    };
    let share_deviation = target_share.map(|t| (realized_share - t).abs());
    let realized_long = match basis {
        LongBasis::Tokens => tally.long_token_fraction(),
        LongBasis::Documents => tally.long_draw_fraction(),
    };
    let long_deviation = match (target_long, realized_long, flagged) {
        (Some(t), Some(r), false) => Some((r - t).abs()),
        _ => None,
    };
    let long_missing = target_long.is_some() && !flagged && realized_long.is_none();
    let pass = share_deviation.is_none_or(|d| d <= tol.share_tol)
        && long_deviation.is_none_or(|d| d <= tol.long_tol)
        && !long_missing;
    AuditRow {
        domain: domain.to_owned(),
        target_share,
        realized_share,
        share_deviation,
        target_long,
        realized_long_token_fraction: tally.long_token_fraction(),
        realized_long_doc_fraction: tally.long_draw_fraction(),
        long_deviation,
        flagged,
        pass,
    }
}

/// Compare realized domain shares and long fractions against the targets
/// recorded in the dataset.
pub fn verify_mixture(ds: &SampledDataset, tol: Tolerances) -> MixtureAudit {
    let total = ds.total_tokens;
    let basis = ds.spec.long_basis;
    let rows: Vec<AuditRow> = ds
        .tallies
        .iter()
        .map(|(domain, tally)| {
            row(
                domain,
                tally,
                total,
                ds.target_shares.get(domain).copied(),
                ds.long_targets.get(domain).copied(),
                ds.unreachable.contains(domain),
                basis,
                tol,
            )
        })
        .collect();
    let overall = row(
        "ALL",
        &ds.overall(),
        total,
        None,
        ds.overall_long_target,
        ds.unreachable.iter().any(|u| u == "*"),
        basis,
        tol,
    );
    let pass = overall.pass && rows.iter().all(|r| r.pass);
    MixtureAudit {
        tolerances: tol,
        rows,
        overall,
        pass,
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6}")).unwrap_or_default()
}

impl MixtureAudit {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "domain,target_share,realized_share,share_deviation,target_long,realized_long_token_fraction,realized_long_doc_fraction,long_deviation,flagged,pass\n",
        );
        for r in self.rows.iter().chain(std::iter::once(&self.overall)) {
            let _ = writeln!(
                out,
                "{},{},{:.6},{},{},{},{},{},{},{}",
                r.domain,
                opt(r.target_share),
                r.realized_share,
                opt(r.share_deviation),
                opt(r.target_long),
                opt(r.realized_long_token_fraction),
                opt(r.realized_long_doc_fraction),
                opt(r.long_deviation),
                r.flagged,
                r.pass
            );
        }
        out
    }
}
