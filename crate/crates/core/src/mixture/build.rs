use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::mixture::cut::chunk_spans;
use crate::mixture::{
    solve_class_weight, ClassWeights, CorpusIndex, DomainWeights, LongBasis, MixtureSpec, Strategy,
    WeightedSampler,
};
use crate::stats::{CorpusStats, DomainLength, DomainStats};

pub const DATASET_FILE: &str = "dataset.json";
pub const DRAWS_FILE: &str = "draws.jsonl";

/// One sampled span of a source document. `repeat` counts earlier draws of
/// the same span in this dataset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Draw {
    pub id: String,
    pub domain: String,
    pub start: u64,
    pub end: u64,
    pub repeat: u32,
}

impl Draw {
    pub fn len(&self) -> u64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// Realized totals for one domain.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub draws: u64,
    pub long_draws: u64,
    pub short_tokens: u64,
    pub long_tokens: u64,
}

impl Tally {
    pub fn tokens(&self) -> u64 {
        self.short_tokens + self.long_tokens
    }

    pub fn long_token_fraction(&self) -> Option<f64> {
        (self.tokens() > 0).then(|| self.long_tokens as f64 / self.tokens() as f64)
    }

    pub fn long_draw_fraction(&self) -> Option<f64> {
        (self.draws > 0).then(|| self.long_draws as f64 / self.draws as f64)
    }

    fn add(&mut self, len: u64, long: bool) {
        self.draws += 1;
        if long {
            self.long_draws += 1;
            self.long_tokens += len;
        } else {
            self.short_tokens += len;
        }
    }

    fn merge(&mut self, o: &Tally) {
        self.draws += o.draws;
        self.long_draws += o.long_draws;
        self.short_tokens += o.short_tokens;
        self.long_tokens += o.long_tokens;
    }
}

/// Budget and outcome of one independently sampled stratum.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumReport {
    pub key: String,
    pub units: u64,
    pub budget: u64,
    pub realized: u64,
    pub max_unit_len: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledDataset {
    pub spec: MixtureSpec,
    pub corpus_digest: String,
    pub total_tokens: u64,
    /// Largest sampled unit (after cutting) in the corpus.
    pub max_unit_len: u64,
    pub original_shares: BTreeMap<String, f64>,
    pub target_shares: BTreeMap<String, f64>,
    /// Per-domain long-fraction targets (per-source upsampling).
    pub long_targets: BTreeMap<String, f64>,
    /// Corpus-wide long-fraction target (per-source and global upsampling).
    pub overall_long_target: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<ClassWeights>,
    /// Domains (or `*` for the pooled corpus) whose long target is unreachable.
    pub unreachable: Vec<String>,
    pub tallies: BTreeMap<String, Tally>,
    pub strata: Vec<StratumReport>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub draws: Vec<Draw>,
}

impl SampledDataset {
    pub fn overall(&self) -> Tally {
        let mut t = Tally::default();
        self.tallies.values().for_each(|x| t.merge(x));
        t
    }

    /// Write `dataset.json` and `draws.jsonl` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(DATASET_FILE);
        let mut json = serde_json::to_vec_pretty(self)?;
        json.push(b'\n');
        fs::write(&path, json).map_err(|e| Error::io(&path, e))?;

        let path = dir.join(DRAWS_FILE);
        let mut buf = Vec::with_capacity(self.draws.len() * 64);
        for d in &self.draws {
            serde_json::to_writer(&mut buf, d)?;
            buf.push(b'\n');
        }
        let mut f = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        f.write_all(&buf).map_err(|e| Error::io(&path, e))?;
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let path = dir.join(DATASET_FILE);
        let raw = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let mut ds: SampledDataset = serde_json::from_str(&raw)?;
        let path = dir.join(DRAWS_FILE);
        let f = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
        for (i, line) in BufReader::new(f).lines().enumerate() {
            let line = line.map_err(|e| Error::io(&path, e))?;
            if line.is_empty() {
                continue;
            }
            ds.draws.push(serde_json::from_str(&line).map_err(|e| Error::Malformed {
                path: path.clone(),
                line: i + 1,
                msg: e.to_string(),
            })?);
        }
        Ok(ds)
    }
}

/// A sampleable span of one index entry.
#[derive(Clone, Copy, Debug)]
struct Unit {
    entry: usize,
    start: u64,
    end: u64,
}

impl Unit {
    fn len(&self) -> u64 {
        self.end - self.start
    }
}

struct UnitView<'a> {
    domain: &'a str,
    len: u64,
}

impl DomainLength for UnitView<'_> {
    fn domain(&self) -> &str {
        self.domain
    }
    fn token_count(&self) -> u64 {
        self.len
    }
}

struct Stratum {
    key: String,
    units: Vec<usize>,
    budget: u64,
}

/// Split `budget` across `shares` by largest remainder; ties go to the
/// lexicographically smaller domain.
pub(crate) fn allocate(budget: u64, shares: &BTreeMap<String, f64>) -> BTreeMap<String, u64> {
    let total: f64 = shares.values().sum();
    let mut out: BTreeMap<String, u64> = BTreeMap::new();
    let mut rems: Vec<(f64, &String)> = Vec::new();
    for (k, s) in shares {
        let exact = budget as f64 * s / total;
        let floor = exact.floor();
        out.insert(k.clone(), floor as u64);
        rems.push((exact - floor, k));
    }
    let assigned: u64 = out.values().sum();
    let mut left = budget.saturating_sub(assigned);
    rems.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    for (_, k) in rems {
        if left == 0 {
            break;
        }
        *out.get_mut(k).unwrap() += 1;
        left -= 1;
    }
    out
}

fn stratum_rng(seed: u64, key: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(b"forge-mixture\0");
    h.update(seed.to_le_bytes());
    h.update(key.as_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

/// Long-class share of the drawn mass for one pool, plus its weights.
/// `None` weights mean the pool has no long mass.
fn class_split(stats: &DomainStats, spec: &MixtureSpec) -> (f64, Option<DomainWeights>) {
    let f = spec.target_long_fraction;
    let (short_basis, long_basis) = match spec.long_basis {
        LongBasis::Tokens => (stats.short_tokens as f64, stats.long_tokens as f64),
        LongBasis::Documents => (
            (stats.doc_count - stats.long_doc_count) as f64,
            stats.long_doc_count as f64,
        ),
    };
    match solve_class_weight(short_basis, long_basis, f) {
        None => (0.0, None),
        Some(w_long) => {
            let w = DomainWeights {
                w_short: 1.0,
                w_long,
                reachable: short_basis > 0.0,
            };
            (w.long_share(stats.short_tokens as f64, stats.long_tokens as f64), Some(w))
        }
    }
}

fn split_budget(budget: u64, long_share: f64) -> (u64, u64) {
    let long = ((budget as f64 * long_share).round() as u64).min(budget);
    (budget - long, long)
}

/// Build a sampled dataset from the corpus index according to `spec`.
pub fn build_mixture(index: &CorpusIndex, spec: &MixtureSpec, exec: Execution) -> Result<SampledDataset> {
    spec.validate()?;
    let threshold = spec.long_threshold;
    let mut units: Vec<Unit> = Vec::new();
    for (i, e) in index.entries.iter().enumerate() {
        match spec.effective_cut_len() {
            Some(c) => units.extend(chunk_spans(e.token_count, c).map(|(a, b)| Unit {
                entry: i,
                start: a,
                end: b,
            })),
            None if e.token_count > 0 => units.push(Unit {
                entry: i,
                start: 0,
                end: e.token_count,
            }),
            None => {}
        }
    }
    if units.is_empty() {
        return Err(Error::NoDocuments);
    }
    let domain_of = |u: &Unit| index.entries[u.entry].domain.as_str();
    let views: Vec<UnitView> = units
        .iter()
        .map(|u| UnitView {
            domain: domain_of(u),
            len: u.len(),
        })
        .collect();
    let stats = CorpusStats::collect(&views, threshold, exec);
    let total = stats.total();
    let original_shares: BTreeMap<String, f64> = stats
        .domains
        .iter()
        .map(|(k, d)| (k.clone(), d.token_count as f64 / total.token_count as f64))
        .collect();

    // Unit indices per (domain, class).
    let mut by_domain: BTreeMap<&str, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (i, u) in units.iter().enumerate() {
        let slot = by_domain.entry(domain_of(u)).or_default();
        if u.len() > threshold {
            slot.1.push(i);
        } else {
            slot.0.push(i);
        }
    }

    let budget = spec.token_budget;
    let mut strata: Vec<Stratum> = Vec::new();
    let mut warnings: Vec<String> = Vec::new();
    let mut unreachable: Vec<String> = Vec::new();
    let mut long_targets = BTreeMap::new();
    let mut overall_long_target = None;
    let mut weights: Option<ClassWeights> = None;
    let target_shares: BTreeMap<String, f64>;

    let resolve_shares = |given: &Option<BTreeMap<String, f64>>| -> Result<BTreeMap<String, f64>> {
        let Some(given) = given else {
            return Ok(original_shares.clone());
        };
        for (k, s) in given {
            if *s > 0.0 && !stats.domains.contains_key(k) {
                return Err(Error::invalid(
                    "target_domain_shares",
                    format!("domain {k} has no documents in the corpus"),
                ));
            }
        }
        Ok(stats
            .domains
            .keys()
            .map(|k| (k.clone(), given.get(k).copied().unwrap_or(0.0)))
            .collect())
    };

    match spec.strategy {
        Strategy::Cut4k | Strategy::Cut128k => {
            target_shares = original_shares.clone();
            strata.push(Stratum {
                key: "all".into(),
                units: (0..units.len()).collect(),
                budget,
            });
        }
        Strategy::PerSourceUpsample => {
            target_shares = resolve_shares(&spec.target_domain_shares)?;
            let budgets = allocate(budget, &target_shares);
            let mut cw = ClassWeights::default();
            for (domain, d) in &stats.domains {
                let (short_units, long_units) = by_domain.remove(domain.as_str()).unwrap_or_default();
                let (long_share, w) = class_split(d, spec);
                match w {
                    Some(w) => {
                        if w.reachable {
                            long_targets.insert(domain.clone(), spec.target_long_fraction);
                        } else {
                            unreachable.push(domain.clone());
                        }
                        cw.domains.insert(domain.clone(), w);
                    }
                    None => unreachable.push(domain.clone()),
                }
                let (short_b, long_b) = split_budget(budgets[domain], long_share);
                strata.push(Stratum {
                    key: format!("{domain}/long"),
                    units: long_units,
                    budget: long_b,
                });
                strata.push(Stratum {
                    key: format!("{domain}/short"),
                    units: short_units,
                    budget: short_b,
                });
            }
            if unreachable.is_empty() {
                overall_long_target = Some(spec.target_long_fraction);
            }
            weights = Some(cw);
        }
        Strategy::GlobalUpsample => {
            target_shares = original_shares.clone();
            let (long_share, w) = class_split(&total, spec);
            match w {
                Some(w) if w.reachable => overall_long_target = Some(spec.target_long_fraction),
                _ => unreachable.push("*".into()),
            }
            if let Some(w) = w {
                weights = Some(ClassWeights {
                    domains: [("*".to_owned(), w)].into(),
                });
            }
            let (short_b, long_b) = split_budget(budget, long_share);
            let (mut short_units, mut long_units) = (Vec::new(), Vec::new());
            for (s, l) in by_domain.into_values() {
                short_units.extend(s);
                long_units.extend(l);
            }
            short_units.sort_unstable();
            long_units.sort_unstable();
            strata.push(Stratum {
                key: "all/long".into(),
                units: long_units,
                budget: long_b,
            });
            strata.push(Stratum {
                key: "all/short".into(),
                units: short_units,
                budget: short_b,
            });
        }
        Strategy::DomainUpsample => {
            let base = resolve_shares(&spec.target_domain_shares)?;
            let boosts = spec.boosted_domains.as_ref().expect("validated").multipliers();
            for k in boosts.keys() {
                if !stats.domains.contains_key(k) {
                    return Err(Error::invalid(
                        "boosted_domains",
                        format!("domain {k} has no documents in the corpus"),
                    ));
                }
            }
            let raw: BTreeMap<String, f64> = base
                .iter()
                .map(|(k, s)| (k.clone(), s * boosts.get(k).copied().unwrap_or(1.0)))
                .collect();
            let z: f64 = raw.values().sum();
            target_shares = raw.into_iter().map(|(k, v)| (k, v / z)).collect();
            let budgets = allocate(budget, &target_shares);
            for (domain, (s, l)) in by_domain {
                let mut all = s;
                all.extend(l);
                all.sort_unstable();
                strata.push(Stratum {
                    key: domain.to_owned(),
                    units: all,
                    budget: budgets[domain],
                });
            }
        }
    }

    for s in &strata {
        if s.budget > 0 && s.units.is_empty() {
            warnings.push(format!(
                "stratum {} has a budget of {} tokens but no documents",
                s.key, s.budget
            ));
        }
    }
    for u in &unreachable {
        warnings.push(format!("long-fraction target unreachable for {u}"));
    }

    let sampled: Vec<Result<Vec<usize>>> = exec::map(exec, &strata, |s| {
        if s.budget == 0 || s.units.is_empty() {
            return Ok(Vec::new());
        }
        let sampler = WeightedSampler::uniform(s.units.len())?;
        let mut rng = stratum_rng(spec.seed, &s.key);
        let mut realized = 0u64;
        let mut picks = Vec::new();
        while realized < s.budget {
            let u = s.units[sampler.sample(&mut rng)];
            realized += units[u].len();
            picks.push(u);
        }
        Ok(picks)
    });
    let sampled: Vec<Vec<usize>> = sampled.into_iter().collect::<Result<_>>()?;

    let reports: Vec<StratumReport> = strata
        .iter()
        .zip(&sampled)
        .map(|(s, picks)| StratumReport {
            key: s.key.clone(),
            units: s.units.len() as u64,
            budget: s.budget,
            realized: picks.iter().map(|&u| units[u].len()).sum(),
            max_unit_len: s.units.iter().map(|&u| units[u].len()).max().unwrap_or(0),
        })
        .collect();

    // Interleave strata by a seeded shuffle of stratum labels.
    let mut schedule: Vec<usize> = sampled
        .iter()
        .enumerate()
        .flat_map(|(i, p)| std::iter::repeat_n(i, p.len()))
        .collect();
    schedule.shuffle(&mut stratum_rng(spec.seed, "\0schedule"));
    let mut cursors = vec![0usize; sampled.len()];
    let mut repeats: HashMap<usize, u32> = HashMap::new();
    let mut tallies: BTreeMap<String, Tally> =
        stats.domains.keys().map(|k| (k.clone(), Tally::default())).collect();
    let mut draws = Vec::with_capacity(schedule.len());
    for s in schedule {
        let u = sampled[s][cursors[s]];
        cursors[s] += 1;
        let unit = units[u];
        let entry = &index.entries[unit.entry];
        let rep = repeats.entry(u).or_insert(0);
        draws.push(Draw {
            id: entry.id.clone(),
            domain: entry.domain.clone(),
            start: unit.start,
            end: unit.end,
            repeat: *rep,
        });
        *rep += 1;
        tallies
            .get_mut(&entry.domain)
            .expect("domain tallied")
            .add(unit.len(), unit.len() > threshold);
    }

    let total_tokens: u64 = tallies.values().map(Tally::tokens).sum();
    if draws.len() == 1 && total_tokens > budget {
        warnings.push(format!(
            "token budget {budget} is smaller than one document; dataset holds a single draw of {total_tokens} tokens"
        ));
    }

    Ok(SampledDataset {
        spec: spec.clone(),
        corpus_digest: index.digest.clone(),
        total_tokens,
        max_unit_len: units.iter().map(Unit::len).max().unwrap_or(0),
        original_shares,
        target_shares,
        long_targets,
        overall_long_target,
        weights,
        unreachable,
        tallies,
        strata: reports,
        warnings,
        draws,
    })
}
