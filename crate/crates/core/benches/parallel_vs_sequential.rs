// Sequential vs rayon execution of the data-parallel stages.
//
//   cargo bench -p forge-core
//
// Without the `parallel` feature both variants run sequentially, which is a
// handy sanity check that the comparison is measuring rayon and nothing else.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use forge_core::corpus_io::{write_shards, Document, WhitespaceTokenizer};
use forge_core::mixture::{build_mixture, CorpusIndex, IndexEntry, MixtureSpec, Strategy};
use forge_core::needle::{generate_grid, score_transcripts, CaseMeta, NeedleSpec, Transcript};
use forge_core::stats::{default_bin_edges, length_histogram, CorpusStats};
use forge_core::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];
const DOMAINS: [&str; 7] = ["CommonCrawl", "C4", "Github", "Wikipedia", "Book", "Arxiv", "StackExchange"];

// ------------------------------------------------------------
// Synthetic inputs
// ------------------------------------------------------------

fn entries(n: usize) -> Vec<IndexEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    (0..n)
        .map(|i| IndexEntry {
            id: format!("d{i}"),
            domain: DOMAINS[i % DOMAINS.len()].to_owned(),
            // heavy tail: mostly short, some far beyond 4K
            token_count: if rng.random_bool(0.2) {
                rng.random_range(4097..60_000)
            } else {
                rng.random_range(16..4096)
            },
        })
        .collect()
}

fn documents(n: usize) -> Vec<Document> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    (0..n)
        .map(|i| {
            let len = rng.random_range(64..2048);
            let toks: Vec<u32> = (0..len).map(|_| rng.random_range(0..50_000)).collect();
            Document::from_tokens(format!("d{i}"), DOMAINS[i % DOMAINS.len()], toks)
        })
        .collect()
}

// ------------------------------------------------------------
// Benchmarks
// ------------------------------------------------------------

fn bench_stats(c: &mut Criterion) {
    let docs = entries(200_000);
    let edges = default_bin_edges();
    let mut g = c.benchmark_group("stats");
    g.throughput(Throughput::Elements(docs.len() as u64));
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new("collect", name), &exec, |b, &exec| {
            b.iter(|| CorpusStats::collect(&docs, 4096, exec))
        });
        g.bench_with_input(BenchmarkId::new("histogram", name), &exec, |b, &exec| {
            b.iter(|| length_histogram(&docs, &edges, exec).unwrap())
        });
    }
    g.finish();
}

fn bench_mixture(c: &mut Criterion) {
    let index = CorpusIndex::new(entries(50_000));
    let spec = MixtureSpec::new(Strategy::PerSourceUpsample, 50_000_000, 42);
    let mut g = c.benchmark_group("mixture");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new("per_source_upsample", name), &exec, |b, &exec| {
            b.iter(|| build_mixture(&index, &spec, exec).unwrap())
        });
    }
    g.finish();
}

fn bench_needle(c: &mut Criterion) {
    let tok = WhitespaceTokenizer::new();
    let filler = vec![Document::from_text(
        "essay",
        "essay",
        "How to do great work is a question with many answers and few shortcuts ".repeat(50),
        &tok,
    )];
    let spec = NeedleSpec::default();
    let cases = generate_grid(&spec, &filler, &tok, Execution::Sequential).unwrap();
    let metas: Vec<CaseMeta> = cases
        .iter()
        .map(|c| CaseMeta {
            case_id: c.case_id.clone(),
            context_len: c.context_len,
            depth: c.depth_fraction,
            expected_answer: c.expected_answer.clone(),
        })
        .collect();
    let transcripts: Vec<Transcript> = cases
        .iter()
        .map(|c| Transcript {
            case_id: c.case_id.clone(),
            output_text: "sit in the park and eat something on a sunny day".repeat(20),
        })
        .collect();

    let mut g = c.benchmark_group("needle");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new("generate_grid", name), &exec, |b, &exec| {
            b.iter(|| generate_grid(&spec, &filler, &tok, exec).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("score", name), &exec, |b, &exec| {
            b.iter(|| score_transcripts(&metas, &transcripts, &tok, exec).unwrap())
        });
    }
    g.finish();
}

fn bench_shards(c: &mut Criterion) {
    let docs = documents(5_000);
    let dir = tempfile::tempdir().unwrap();
    let mut g = c.benchmark_group("shards");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new("write", name), &exec, |b, &exec| {
            b.iter(|| write_shards(docs.clone(), 200_000, dir.path().join(name), None, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, bench_stats, bench_mixture, bench_needle, bench_shards);
criterion_main!(benches);
