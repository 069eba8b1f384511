//! Needle grid -> transcripts -> scores -> heatmap files.

use forge_core::corpus_io::{Document, Tokenizer, WhitespaceTokenizer};
use forge_core::jsonl::{read_jsonl, write_jsonl};
use forge_core::needle::{aggregate_heatmap, generate_grid, score_transcripts, CaseMeta, NeedleSpec, Transcript};
use forge_core::report::render_heatmap;
use forge_core::Execution;

#[test]
fn grid_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let tok = WhitespaceTokenizer::new();
    let filler = vec![
        Document::from_text("e0", "essay", "the quick brown fox jumps over the lazy dog", &tok),
        Document::from_text("e1", "essay", "pack my box with five dozen liquor jugs", &tok),
    ];
    let spec = NeedleSpec {
        lengths: vec![256, 512, 1024, 2048],
        depths: vec![0.0, 0.5, 1.0],
        ..Default::default()
    };
    let cases = generate_grid(&spec, &filler, &tok, Execution::Parallel).unwrap();
    assert_eq!(cases, generate_grid(&spec, &filler, &tok, Execution::Sequential).unwrap());
    let path = dir.path().join("cases.jsonl");
    write_jsonl(&path, &cases).unwrap();
    let metas: Vec<CaseMeta> = read_jsonl(&path).unwrap();
    assert_eq!(metas.len(), 12);

    // recites correctly up to 1024 tokens only
    let transcripts: Vec<Transcript> = metas
        .iter()
        .map(|m| Transcript {
            case_id: m.case_id.clone(),
            output_text: if m.context_len <= 1024 {
                format!("Sure. {}!", m.expected_answer.to_uppercase())
            } else {
                "no idea".into()
            },
        })
        .collect();
    let scored = score_transcripts(&metas, &transcripts, &tok, Execution::Parallel).unwrap();
    let grid = aggregate_heatmap(&scored).unwrap();
    assert_eq!(grid.mean, 0.75);
    let files = render_heatmap(&grid, 0.8, Some(1024), dir.path(), "heat").unwrap();
    let csv = std::fs::read_to_string(files.csv).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "depth,256,512,1024,|,2048");

    let needle = tok.encode(&spec.needle_text);
    for c in &cases {
        let at = c.insertion_index as usize;
        assert_eq!(&c.prompt_tokens[at..at + needle.len()], &needle[..]);
    }
}
