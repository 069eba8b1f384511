//! Per-domain token/document counts, length histograms and long-document
//! fractions. Every statistic is a commutative-monoid fold, so results do not
//! depend on how the corpus is partitioned across workers.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus_io::Document;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::svg;

/// Anything with a domain label and a token length.
pub trait DomainLength {
    fn domain(&self) -> &str;
    fn token_count(&self) -> u64;
}

impl DomainLength for Document {
    fn domain(&self) -> &str {
        &self.domain
    }
    fn token_count(&self) -> u64 {
        self.token_count
    }
}

impl<T: DomainLength> DomainLength for &T {
    fn domain(&self) -> &str {
        (*self).domain()
    }
    fn token_count(&self) -> u64 {
        (*self).token_count()
    }
}

/// Counts for one domain, split at the long threshold (long means
/// `token_count > threshold`).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainStats {
    pub domain: String,
    pub doc_count: u64,
    pub token_count: u64,
    pub short_tokens: u64,
    pub long_tokens: u64,
    pub long_doc_count: u64,
}

impl DomainStats {
    pub fn new(domain: impl Into<String>) -> Self {
        DomainStats {
            domain: domain.into(),
            ..Default::default()
        }
    }

    fn add(&mut self, len: u64, threshold: u64) {
        self.doc_count += 1;
        self.token_count += len;
        if len > threshold {
            self.long_tokens += len;
            self.long_doc_count += 1;
        } else {
            self.short_tokens += len;
        }
    }

    pub fn merge(&mut self, other: &DomainStats) {
        self.doc_count += other.doc_count;
        self.token_count += other.token_count;
        self.short_tokens += other.short_tokens;
        self.long_tokens += other.long_tokens;
        self.long_doc_count += other.long_doc_count;
    }

    pub fn long_token_fraction(&self) -> Option<f64> {
        ratio(self.long_tokens, self.token_count)
    }

    pub fn long_doc_fraction(&self) -> Option<f64> {
        ratio(self.long_doc_count, self.doc_count)
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub long_threshold: u64,
    pub domains: BTreeMap<String, DomainStats>,
}

impl CorpusStats {
    pub fn empty(long_threshold: u64) -> Self {
        CorpusStats {
            long_threshold,
            domains: BTreeMap::new(),
        }
    }

    pub fn collect<T: DomainLength + Sync>(docs: &[T], long_threshold: u64, exec: Execution) -> Self {
        exec::fold_reduce(
            exec,
            docs,
            || CorpusStats::empty(long_threshold),
            |mut acc, doc| {
                acc.push(doc.domain(), doc.token_count());
                acc
            },
            |mut a, b| {
                a.merge(&b);
                a
            },
        )
    }

    pub fn push(&mut self, domain: &str, len: u64) {
        if let Some(d) = self.domains.get_mut(domain) {
            d.add(len, self.long_threshold);
        } else {
            let mut d = DomainStats::new(domain);
            d.add(len, self.long_threshold);
            self.domains.insert(domain.to_owned(), d);
        }
    }

    /// Merge stats computed at the same threshold.
    pub fn merge(&mut self, other: &CorpusStats) {
        debug_assert_eq!(self.long_threshold, other.long_threshold);
        for (k, v) in &other.domains {
            self.domains
                .entry(k.clone())
                .or_insert_with(|| DomainStats::new(k.clone()))
                .merge(v);
        }
    }

    pub fn total(&self) -> DomainStats {
        let mut t = DomainStats::new("ALL");
        for d in self.domains.values() {
            t.merge(d);
        }
        t
    }

    pub fn is_empty(&self) -> bool {
        self.domains.values().all(|d| d.doc_count == 0)
    }

    /// Delimited table: domain, doc_count, token_count, long_doc_fraction,
    /// long_token_fraction. Absent fractions are left empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("domain,doc_count,token_count,long_doc_fraction,long_token_fraction\n");
        let total = self.total();
        for d in self.domains.values().chain(std::iter::once(&total)) {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                d.domain,
                d.doc_count,
                d.token_count,
                fmt_opt(d.long_doc_fraction()),
                fmt_opt(d.long_token_fraction())
            );
        }
        out
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6}")).unwrap_or_default()
}

/// Token and document shares per domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainMixture {
    pub token_shares: BTreeMap<String, f64>,
    pub doc_shares: BTreeMap<String, f64>,
}

impl DomainMixture {
    pub fn from_stats(stats: &CorpusStats) -> Result<Self> {
        let total = stats.total();
        if total.doc_count == 0 {
            return Err(Error::NoDocuments);
        }
        let token_shares = stats
            .domains
            .iter()
            .map(|(k, d)| {
                let share = if total.token_count == 0 {
                    d.doc_count as f64 / total.doc_count as f64
                } else {
                    d.token_count as f64 / total.token_count as f64
                };
                (k.clone(), share)
            })
            .collect();
        let doc_shares = stats
            .domains
            .iter()
            .map(|(k, d)| (k.clone(), d.doc_count as f64 / total.doc_count as f64))
            .collect();
        Ok(DomainMixture {
            token_shares,
            doc_shares,
        })
    }
}

pub fn domain_mixture<T: DomainLength + Sync>(docs: &[T], exec: Execution) -> Result<DomainMixture> {
    DomainMixture::from_stats(&CorpusStats::collect(docs, u64::MAX, exec))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinCount {
    pub docs: u64,
    pub tokens: u64,
}

/// A length bin `(low, high]`; the first bin also absorbs lengths at or
/// below its lower edge and `high == None` marks the overflow bin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bin {
    pub low: u64,
    pub high: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthHistogram {
    pub bins: Vec<Bin>,
    pub counts: BTreeMap<String, Vec<BinCount>>,
}

/// `0, 256, 512, ..., 262144`; an overflow bin is added when needed.
pub fn default_bin_edges() -> Vec<u64> {
    std::iter::once(0)
        .chain((8..=18).map(|p| 1u64 << p))
        .collect()
}

pub fn length_histogram<T: DomainLength + Sync>(
    docs: &[T],
    bin_edges: &[u64],
    exec: Execution,
) -> Result<LengthHistogram> {
    if bin_edges.is_empty() {
        return Err(Error::invalid("bin edges", "at least one edge is required"));
    }
    if bin_edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("bin edges", format!("not strictly ascending: {bin_edges:?}")));
    }
    let uppers = &bin_edges[1..];
    let mut bins: Vec<Bin> = bin_edges
        .windows(2)
        .map(|w| Bin {
            low: w[0],
            high: Some(w[1]),
        })
        .collect();
    bins.push(Bin {
        low: *bin_edges.last().unwrap(),
        high: None,
    });
    let n_bins = bins.len();

    let mut counts = exec::fold_reduce(
        exec,
        docs,
        BTreeMap::<String, Vec<BinCount>>::new,
        |mut acc, doc| {
            let len = doc.token_count();
            let idx = uppers.partition_point(|&u| u < len);
            let row = acc
                .entry(doc.domain().to_owned())
                .or_insert_with(|| vec![BinCount::default(); n_bins]);
            row[idx].docs += 1;
            row[idx].tokens += len;
            acc
        },
        |mut a, b| {
            for (k, row) in b {
                match a.get_mut(&k) {
                    Some(r) => r.iter_mut().zip(row).for_each(|(x, y)| {
                        x.docs += y.docs;
                        x.tokens += y.tokens;
                    }),
                    None => {
                        a.insert(k, row);
                    }
                }
            }
            a
        },
    );

    let overflow_used = counts.values().any(|r| r[n_bins - 1].docs > 0);
    if !overflow_used && n_bins > 1 {
        bins.pop();
        counts.values_mut().for_each(|r| {
            r.pop();
        });
    }
    Ok(LengthHistogram { bins, counts })
}

impl LengthHistogram {
    /// Delimited table: domain, bin_low, bin_high, doc_count, token_mass.
    /// The overflow bin's upper edge is written as `inf`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("domain,bin_low,bin_high,doc_count,token_mass\n");
        for (domain, row) in &self.counts {
            for (bin, c) in self.bins.iter().zip(row) {
                let high = bin.high.map_or_else(|| "inf".to_owned(), |h| h.to_string());
                let _ = writeln!(out, "{domain},{},{high},{},{}", bin.low, c.docs, c.tokens);
            }
        }
        out
    }

    /// Stacked bar chart of token mass per bin, one colour per domain.
    pub fn to_svg(&self) -> String {
        let labels: Vec<String> = self
            .bins
            .iter()
            .map(|b| b.high.map_or_else(|| format!(">{}", svg::short_len(b.low)), svg::short_len))
            .collect();
        let series: Vec<(String, Vec<f64>)> = self
            .counts
            .iter()
            .map(|(d, row)| (d.clone(), row.iter().map(|c| c.tokens as f64).collect()))
            .collect();
        svg::stacked_bars("token mass by document length", &labels, &series)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LongFraction {
    /// `None` when the domain has no documents.
    pub doc_fraction: Option<f64>,
    /// `None` when the domain has no tokens.
    pub token_fraction: Option<f64>,
}

impl From<&DomainStats> for LongFraction {
    fn from(d: &DomainStats) -> Self {
        LongFraction {
            doc_fraction: d.long_doc_fraction(),
            token_fraction: d.long_token_fraction(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LongFractionReport {
    pub long_threshold: u64,
    pub domains: BTreeMap<String, LongFraction>,
    pub overall: LongFraction,
}

pub fn long_fraction<T: DomainLength + Sync>(
    docs: &[T],
    long_threshold: u64,
    exec: Execution,
) -> LongFractionReport {
    let stats = CorpusStats::collect(docs, long_threshold, exec);
    LongFractionReport {
        long_threshold,
        domains: stats.domains.iter().map(|(k, d)| (k.clone(), d.into())).collect(),
        overall: (&stats.total()).into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[derive(Clone, Debug)]
    struct Len(&'static str, u64);
    impl DomainLength for Len {
        fn domain(&self) -> &str {
            self.0
        }
        fn token_count(&self) -> u64 {
            self.1
        }
    }

    #[test]
    fn token_shares_are_direct_ratios() {
        let docs = [Len("A", 500), Len("A", 320), Len("B", 180)];
        let m = domain_mixture(&docs, Execution::Sequential).unwrap();
        assert!((m.token_shares["A"] - 0.82).abs() < 1e-15);
        assert!((m.token_shares["B"] - 0.18).abs() < 1e-15);
        assert!((m.doc_shares["A"] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn single_domain_and_empty_corpus() {
        let m = domain_mixture(&[Len("D", 3)], Execution::Sequential).unwrap();
        assert_eq!(m.token_shares["D"], 1.0);
        let none: [Len; 0] = [];
        assert!(matches!(domain_mixture(&none, Execution::Sequential), Err(Error::NoDocuments)));
    }

    #[test]
    fn histogram_bins_by_hand() {
        let docs = [Len("A", 1000), Len("A", 5000), Len("A", 200_000)];
        let h = length_histogram(&docs, &[0, 4096, 131_072], Execution::Sequential).unwrap();
        let counts: Vec<u64> = h.counts["A"].iter().map(|c| c.docs).collect();
        assert_eq!(counts, [1, 1, 1]);
        assert_eq!(h.bins[2].high, None);
    }

    #[test]
    fn histogram_all_short_lands_in_first_bin() {
        let docs = [Len("A", 3), Len("A", 10), Len("B", 0)];
        let h = length_histogram(&docs, &default_bin_edges(), Execution::Sequential).unwrap();
        assert_eq!(h.bins.len(), default_bin_edges().len() - 1);
        for row in h.counts.values() {
            assert_eq!(row[0].docs as usize, row.iter().map(|c| c.docs as usize).sum::<usize>());
        }
    }

    #[test]
    fn histogram_edge_is_right_closed() {
        // 4096 is not "longer than 4K", so it stays in the lower bin.
        let docs = [Len("A", 4096), Len("A", 4097)];
        let h = length_histogram(&docs, &[0, 4096, 8192], Execution::Sequential).unwrap();
        assert_eq!(h.counts["A"][0].docs, 1);
        assert_eq!(h.counts["A"][1].docs, 1);
    }

    #[test]
    fn thirty_percent_long_documents() {
        let docs: Vec<Len> = (0..100).map(|i| Len("CC", if i < 30 { 9000 } else { 900 })).collect();
        let h = length_histogram(&docs, &[0, 4096, 131_072], Execution::Sequential).unwrap();
        let above: u64 = h.counts["CC"][1..].iter().map(|c| c.docs).sum();
        assert_eq!(above, 30);
        let lf = long_fraction(&docs, 4096, Execution::Sequential);
        assert_eq!(lf.overall.doc_fraction, Some(0.3));
    }

    #[test]
    fn histogram_rejects_unsorted_edges() {
        let docs = [Len("A", 1)];
        assert!(length_histogram(&docs, &[0, 10, 10], Execution::Sequential).is_err());
        assert!(length_histogram(&docs, &[5, 1], Execution::Sequential).is_err());
        assert!(length_histogram(&docs, &[], Execution::Sequential).is_err());
    }

    #[test]
    fn long_fraction_by_hand() {
        let docs = [Len("A", 3000), Len("A", 5000)];
        let lf = long_fraction(&docs, 4096, Execution::Sequential);
        assert_eq!(lf.domains["A"].token_fraction, Some(0.625));
        assert_eq!(lf.domains["A"].doc_fraction, Some(0.5));

        let ones: Vec<Len> = (0..10).map(|_| Len("A", 1)).collect();
        assert_eq!(long_fraction(&ones, 4096, Execution::Sequential).overall.token_fraction, Some(0.0));
        assert_eq!(long_fraction(&ones, 0, Execution::Sequential).overall.token_fraction, Some(1.0));
    }

    #[test]
    fn zero_token_domain_reports_absent_fraction() {
        let lf = long_fraction(&[Len("E", 0)], 4096, Execution::Sequential);
        assert_eq!(lf.domains["E"].token_fraction, None);
        assert_eq!(lf.domains["E"].doc_fraction, Some(0.0));
    }

    #[test]
    fn csv_tables_have_expected_headers() {
        let docs = [Len("A", 10), Len("B", 5000)];
        let s = CorpusStats::collect(&docs, 4096, Execution::Sequential);
        let csv = s.to_csv();
        assert!(csv.starts_with("domain,doc_count,token_count,long_doc_fraction,long_token_fraction\n"));
        assert!(csv.contains("B,1,5000,1.000000,1.000000"));
        let h = length_histogram(&docs, &[0, 4096], Execution::Sequential).unwrap();
        assert!(h.to_csv().contains("B,4096,inf,1,5000"));
        assert!(h.to_svg().starts_with("<svg"));
    }

    fn arb_docs() -> impl Strategy<Value = Vec<Len>> {
        prop::collection::vec(
            (prop::sample::select(vec!["A", "B", "C"]), 0u64..20_000).prop_map(|(d, n)| Len(d, n)),
            0..200,
        )
    }

    proptest! {
        #[test]
        fn stats_are_additive(a in arb_docs(), b in arb_docs()) {
            let mut merged = CorpusStats::collect(&a, 4096, Execution::Sequential);
            merged.merge(&CorpusStats::collect(&b, 4096, Execution::Sequential));
            let joined: Vec<Len> = a.iter().chain(&b).cloned().collect();
            prop_assert_eq!(&merged, &CorpusStats::collect(&joined, 4096, Execution::Parallel));
            for d in merged.domains.values() {
                prop_assert_eq!(d.short_tokens + d.long_tokens, d.token_count);
                prop_assert!(d.long_doc_count <= d.doc_count);
            }
        }

        #[test]
        fn histogram_conserves_mass(docs in arb_docs()) {
            let stats = CorpusStats::collect(&docs, 4096, Execution::Sequential);
            let h = length_histogram(&docs, &default_bin_edges(), Execution::Parallel).unwrap();
            for (domain, row) in &h.counts {
                let d = &stats.domains[domain];
                prop_assert_eq!(row.iter().map(|c| c.docs).sum::<u64>(), d.doc_count);
                prop_assert_eq!(row.iter().map(|c| c.tokens).sum::<u64>(), d.token_count);
            }
        }

        #[test]
        fn long_fraction_non_increasing(docs in arb_docs(), t1 in 0u64..20_000, dt in 0u64..5_000) {
            let lo = long_fraction(&docs, t1, Execution::Sequential);
            let hi = long_fraction(&docs, t1 + dt, Execution::Sequential);
            for (k, f) in &lo.domains {
                if let (Some(a), Some(b)) = (f.token_fraction, hi.domains[k].token_fraction) {
                    prop_assert!(b <= a);
                }
                if let (Some(a), Some(b)) = (f.doc_fraction, hi.domains[k].doc_fraction) {
                    prop_assert!(b <= a);
                }
            }
        }

        #[test]
        fn shares_sum_to_one(docs in arb_docs()) {
            prop_assume!(!docs.is_empty());
            let m = domain_mixture(&docs, Execution::Parallel).unwrap();
            prop_assert!((m.token_shares.values().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!((m.doc_shares.values().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}
