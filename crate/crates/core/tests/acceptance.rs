//! Acceptance suite. One test per criterion; each prints a PASS line
//! (visible with `--nocapture`) after its assertions hold.
//!
//! Run: `cargo test -p semtopic-core --test acceptance -- --nocapture`

use std::collections::HashMap;
use std::path::PathBuf;

use semtopic_core::config::{FixtureMode, LdaConfig, PipelineConfig};
use semtopic_core::document::{normalize, read_document, Document};
use semtopic_core::enrich::{enrich, EnrichedEntity};
use semtopic_core::http::make_transport;
use semtopic_core::lda::{self, build_vocab, GibbsSampler};
use semtopic_core::pipeline::{compare_models, run_pipeline, RunOptions};
use semtopic_core::preprocess::{self, porter2, StopwordList, TokenizedDoc};
use semtopic_core::rng::SplitMix64;
use semtopic_core::spotlight::{
    annotate, parse_annotation_response, resolve_overlaps, EntityAnnotation,
};
use semtopic_core::tagger::{strip_tags, tag_text};

fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn replay_config() -> PipelineConfig {
    PipelineConfig {
        fixture_mode: FixtureMode::Replay,
        fixture_dir: Some(fixtures_dir().join("store")),
        lda: LdaConfig { topics: 2, ..Default::default() },
        ..Default::default()
    }
}

fn example_document() -> Document {
    read_document(&fixtures_dir().join("obama_visit.txt"), false).unwrap()
}

/// Replay-mode annotation + enrichment of the example document.
async fn enriched_entities() -> Vec<EnrichedEntity> {
    let cfg = replay_config();
    let doc = example_document();
    let transport = make_transport(&cfg).unwrap();
    let (annotations, _) = annotate(&doc, &cfg, transport.as_ref()).await.unwrap();
    let (entities, warnings) = enrich(&annotations, &cfg, transport.as_ref()).await.unwrap();
    assert_eq!(warnings.failed_lookups, 0);
    entities
}

// --- Criterion 1: annotation response parse golden ----------------------

#[test]
fn criterion_01_annotation_parse_golden() {
    let body = std::fs::read(fixtures_dir().join("spotlight_sample.json")).unwrap();
    let parsed = parse_annotation_response("sample", &body).unwrap();
    assert_eq!(parsed.skipped_resources, 0);
    let got: Vec<(&str, usize)> = parsed
        .result
        .annotations
        .iter()
        .map(|a| (a.surface_form.as_str(), a.offset))
        .collect();
    assert_eq!(got, vec![("Barack Obama", 0), ("Germany", 37), ("Europe", 60)]);

    // Third resource carries no similarity score; the others do.
    assert_eq!(parsed.result.annotations[0].similarity_score, Some(0.999976632883937));
    assert_eq!(
        parsed.result.annotations[0].percentage_of_second_rank,
        Some(2.3513531130328845e-6)
    );
    assert_eq!(parsed.result.annotations[1].similarity_score, Some(0.9993713390274306));
    assert!(parsed.result.annotations[2].similarity_score.is_none());
    assert!(parsed.result.annotations[2].percentage_of_second_rank.is_none());
    assert_eq!(parsed.result.annotations[0].support, 25941);
    assert_eq!(parsed.result.annotations[1].support, 216576);
    assert_eq!(parsed.result.annotations[2].support, 79651);
    assert!(parsed.result.annotations[0].types_raw.starts_with("http://xmlns.com/foaf/0.1/Person"));

    // Field fidelity: everything the pipeline consumes survives a
    // serialize/deserialize round trip of the parsed annotations.
    let json = serde_json::to_string(&parsed.result.annotations).unwrap();
    let back: Vec<EntityAnnotation> = serde_json::from_str(&json).unwrap();
    assert_eq!(back, parsed.result.annotations);

    // Offset/surface-form slice invariant against the fixture's own @text.
    let value: serde_json::Value = serde_json::from_slice(&body).unwrap();
    let text: Vec<char> = value["@text"].as_str().unwrap().chars().collect();
    for ann in &parsed.result.annotations {
        let end = ann.offset + ann.surface_form.chars().count();
        let slice: String = text[ann.offset..end].iter().collect();
        assert_eq!(slice, ann.surface_form);
    }
    println!("ACCEPT C1 annotation-parse-golden: PASS");
}

// --- Criterion 2: enrichment table golden -------------------------------

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn criterion_02_enrichment_golden() {
    let entities = enriched_entities().await;
    let expect = |tags: &[&str]| tags.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let obama = expect(&["Barack_Obama", "Politician", "Agent", "President", "Person", "Politician"]);
    let germany = expect(&["Germany", "Republic", "Place", "Country", "Person", "PopulatedPlace", "Location"]);
    let europe = expect(&["Europe", "Continent", "Location", "PopulatedPlace", "Place", "Continent"]);
    let merkel = expect(&["Angela_Merkel", "Politician", "Agent", "Person", "OfficeHolder"]);
    let white_house = expect(&["White_House", "Residence", "Location", "Building", "Place", "ArchitecturalStructure"]);

    let got: Vec<(&str, &[String])> = entities
        .iter()
        .map(|e| (e.surface_form.as_str(), e.tags.as_slice()))
        .collect();
    let expected: Vec<(&str, &[String])> = vec![
        ("Barack Obama", &obama),
        ("Germany", &germany),
        ("Europe", &europe),
        ("Angela Merkel", &merkel),
        ("White House", &white_house),
        ("chancellor", &[]),
        ("Germany", &germany),
    ];
    assert_eq!(got.len(), 7, "expected seven mention rows");
    for (i, (got_row, want_row)) in got.iter().zip(&expected).enumerate() {
        assert_eq!(got_row.0, want_row.0, "row {i} surface form");
        assert_eq!(got_row.1, want_row.1, "row {i} tags for {}", want_row.0);
    }
    // The two Germany mentions carry identical tags.
    assert_eq!(got[1].1, got[6].1);
    println!("ACCEPT C2 enrichment-table-golden: PASS");
}

// --- Criterion 3: tagged text golden ------------------------------------

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn criterion_03_tagging_golden() {
    let doc = example_document();
    let entities = enriched_entities().await;
    let tagged = tag_text(&doc, &entities).unwrap();
    let expected_prefix = "Barack Obama [Barack_Obama, Politician, Agent, President, Person, \
                           Politician] is only passing through Germany [Germany, Republic, \
                           Place, Country, ";
    assert!(
        tagged.tagged_text.starts_with(expected_prefix),
        "tagged text starts with {:?}",
        &tagged.tagged_text[..expected_prefix.len().min(tagged.tagged_text.len())]
    );
    // No comma is inserted after the Germany bracket.
    assert!(tagged.tagged_text.contains("Location] on his trip"));
    assert_eq!(strip_tags(&tagged).unwrap(), doc.normalized_text);
    println!("ACCEPT C3 tagging-golden: PASS");
}

// --- Criterion 4: enriched model surfaces knowledge-base terms ----------

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn criterion_04_enriched_model_surfaces_kb_terms() {
    let doc = example_document();
    let entities = enriched_entities().await;
    let tagged = tag_text(&doc, &entities).unwrap();
    let stopwords = StopwordList::english_default();
    let enriched_corpus = vec![preprocess::preprocess_document(&doc.id, &tagged.tagged_text, &stopwords)];
    let plain_corpus = vec![preprocess::preprocess_document(&doc.id, &doc.normalized_text, &stopwords)];

    let mut holds = 0u32;
    let seeds = 20u64;
    for seed in 0..seeds {
        let cfg = LdaConfig { topics: 2, seed: 1000 + seed, ..Default::default() };
        let plain = lda::fit(&plain_corpus, &cfg).unwrap();
        let enriched = lda::fit(&enriched_corpus, &cfg).unwrap();
        let report = compare_models(&plain, &enriched, 10);
        // The plain model cannot surface terms outside its own corpus.
        for tw in &report.plain_top {
            assert!(plain.vocab.contains(&tw.term));
        }
        if report.has_kb_terms() {
            holds += 1;
        }
    }
    assert!(
        holds >= 18,
        "knowledge-base terms surfaced in only {holds}/{seeds} seeds"
    );
    // The expected witness term appears with the default seed.
    let cfg = LdaConfig { topics: 2, ..Default::default() };
    let plain = lda::fit(&plain_corpus, &cfg).unwrap();
    let enriched = lda::fit(&enriched_corpus, &cfg).unwrap();
    let report = compare_models(&plain, &enriched, 10);
    assert!(
        report.kb_terms.iter().any(|t| t == "politician"),
        "expected 'politician' among knowledge-base terms, got {:?}",
        report.kb_terms
    );
    println!("ACCEPT C4 enriched-vs-plain-kb-terms: PASS ({holds}/{seeds} seeds)");
}

// --- Criterion 5: sampler count consistency ------------------------------

#[test]
fn criterion_05_count_identities_hold_every_sweep() {
    // Random 500-token corpus: 5 documents, 100 tokens each, vocab of 40.
    let mut rng = SplitMix64::new(0xC0FFEE);
    let corpus: Vec<TokenizedDoc> = (0..5)
        .map(|d| TokenizedDoc {
            document_id: format!("doc{d}"),
            tokens: (0..100).map(|_| format!("w{}", rng.below(40))).collect(),
        })
        .collect();
    assert_eq!(corpus.iter().map(|d| d.tokens.len()).sum::<usize>(), 500);
    let cfg = LdaConfig { topics: 5, seed: 99, ..Default::default() };
    let (vocab, docs) = build_vocab(&corpus);
    let mut sampler = GibbsSampler::new(docs, vocab.len(), &cfg);
    assert!(sampler.counts_consistent(), "identities must hold after init");
    for sweep in 0..100 {
        sampler.sweep();
        assert!(sampler.counts_consistent(), "identities broken after sweep {sweep}");
        // Full conditional normalizes exactly at a few probe positions.
        for &(d, i) in &[(0usize, 0usize), (2, 50), (4, 99)] {
            let p = sampler.full_conditional(d, i);
            let sum: f64 = p.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }
    println!("ACCEPT C5 count-consistency: PASS");
}

// --- Criterion 6: sampler vs. exact enumeration --------------------------

fn rising(x: f64, n: u32) -> f64 {
    (0..n).map(|i| x + i as f64).product()
}

/// Exact collapsed posterior over all K^N assignment states, by direct
/// enumeration with rising factorials (no special functions needed).
fn exact_state_probs(
    docs: &[Vec<usize>],
    vocab_size: usize,
    k: usize,
    alpha: f64,
    beta: f64,
) -> HashMap<Vec<usize>, f64> {
    let total: usize = docs.iter().map(Vec::len).sum();
    let states = k.pow(total as u32);
    let mut probs = HashMap::new();
    let mut norm = 0.0;
    for state in 0..states {
        let mut assignment = Vec::with_capacity(total);
        let mut rest = state;
        for _ in 0..total {
            assignment.push(rest % k);
            rest /= k;
        }
        let mut doc_topic = vec![vec![0u32; k]; docs.len()];
        let mut topic_word = vec![vec![0u32; vocab_size]; k];
        let mut topic_total = vec![0u32; k];
        let mut cursor = 0;
        for (d, doc) in docs.iter().enumerate() {
            for &w in doc {
                let z = assignment[cursor];
                cursor += 1;
                doc_topic[d][z] += 1;
                topic_word[z][w] += 1;
                topic_total[z] += 1;
            }
        }
        let mut weight = 1.0;
        for row in &doc_topic {
            for &n in row {
                weight *= rising(alpha, n);
            }
        }
        for t in 0..k {
            for &n in &topic_word[t] {
                weight *= rising(beta, n);
            }
            weight /= rising(vocab_size as f64 * beta, topic_total[t]);
        }
        norm += weight;
        probs.insert(assignment, weight);
    }
    for w in probs.values_mut() {
        *w /= norm;
    }
    probs
}

fn empirical_state_freqs(
    docs: Vec<Vec<usize>>,
    vocab_size: usize,
    cfg: &LdaConfig,
    burn_in: u32,
    samples: u32,
) -> HashMap<Vec<usize>, f64> {
    let mut sampler = GibbsSampler::new(docs, vocab_size, cfg);
    for _ in 0..burn_in {
        sampler.sweep();
    }
    let mut counts: HashMap<Vec<usize>, u64> = HashMap::new();
    for _ in 0..samples {
        sampler.sweep();
        *counts.entry(sampler.state_key()).or_default() += 1;
    }
    counts
        .into_iter()
        .map(|(state, c)| (state, c as f64 / samples as f64))
        .collect()
}

#[test]
fn criterion_06_sampler_matches_exact_enumeration() {
    // One document of two tokens over a two-word vocabulary, K = 2.
    let docs = vec![vec![0usize, 1usize]];
    let cfg = LdaConfig {
        topics: 2,
        alpha: 0.5,
        beta: 0.5,
        iterations: 1,
        seed: 31337,
        ..Default::default()
    };
    let exact = exact_state_probs(&docs, 2, 2, cfg.alpha, cfg.beta);
    assert_eq!(exact.len(), 4);
    // Hand-checked: α = β = 0.5 gives probabilities (0.3, 0.2, 0.2, 0.3).
    assert!((exact[&vec![0, 0]] - 0.3).abs() < 1e-12);
    assert!((exact[&vec![0, 1]] - 0.2).abs() < 1e-12);

    let freqs = empirical_state_freqs(docs, 2, &cfg, 1_000, 100_000);
    for (state, exact_p) in &exact {
        let emp = freqs.get(state).copied().unwrap_or(0.0);
        assert!(
            (emp - exact_p).abs() < 0.02,
            "state {state:?}: empirical {emp:.4} vs exact {exact_p:.4}"
        );
    }
    println!("ACCEPT C6 sampler-oracle-equivalence: PASS");
}

/// Brute-force property from the module contract: a three-token corpus
/// over two documents also matches exact enumeration within 2%.
#[test]
fn criterion_06b_three_token_brute_force() {
    let docs = vec![vec![0usize, 1usize], vec![0usize]];
    let cfg = LdaConfig {
        topics: 2,
        alpha: 0.3,
        beta: 0.7,
        iterations: 1,
        seed: 4242,
        ..Default::default()
    };
    let exact = exact_state_probs(&docs, 2, 2, cfg.alpha, cfg.beta);
    assert_eq!(exact.len(), 8);
    let freqs = empirical_state_freqs(docs, 2, &cfg, 1_000, 100_000);
    for (state, exact_p) in &exact {
        let emp = freqs.get(state).copied().unwrap_or(0.0);
        assert!(
            (emp - exact_p).abs() < 0.02,
            "state {state:?}: empirical {emp:.4} vs exact {exact_p:.4}"
        );
    }
    println!("ACCEPT C6b three-token-brute-force: PASS");
}

// --- Criterion 7: topic separation ---------------------------------------

#[test]
fn criterion_07_topic_separation() {
    let make = |words: [&str; 3]| -> TokenizedDoc {
        TokenizedDoc {
            document_id: words[0].into(),
            tokens: (0..30).flat_map(|_| words.iter().map(|w| w.to_string())).collect(),
        }
    };
    let corpus = vec![make(["a", "b", "c"]), make(["x", "y", "z"])];
    let doc_a: std::collections::HashSet<&str> = ["a", "b", "c"].into();
    let doc_x: std::collections::HashSet<&str> = ["x", "y", "z"].into();

    let mut separated = 0u32;
    for seed in 0..100u64 {
        let cfg = LdaConfig {
            topics: 2,
            alpha: 0.1,
            beta: 0.01,
            iterations: 500,
            seed,
            ..Default::default()
        };
        let model = lda::fit(&corpus, &cfg).unwrap();
        let tops: Vec<Vec<String>> = (0..2)
            .map(|k| {
                lda::top_terms(&model, k, 3)
                    .unwrap()
                    .into_iter()
                    .map(|t| t.0)
                    .collect()
            })
            .collect();
        let pure = |top: &[String], set: &std::collections::HashSet<&str>| {
            top.iter().all(|t| set.contains(t.as_str()))
        };
        if (pure(&tops[0], &doc_a) && pure(&tops[1], &doc_x))
            || (pure(&tops[0], &doc_x) && pure(&tops[1], &doc_a))
        {
            separated += 1;
        }
    }
    assert!(separated >= 95, "topics separated in only {separated}/100 seeds");
    println!("ACCEPT C7 topic-separation: PASS ({separated}/100 seeds)");
}

// --- Criterion 8: end-to-end replay determinism ---------------------------

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn criterion_08_replay_pipeline_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = replay_config();
    let input = fixtures_dir().join("obama_visit.txt");
    let mut outputs: Vec<HashMap<&str, Vec<u8>>> = Vec::new();
    for run in 0..2 {
        let out_dir = tmp.path().join(format!("run{run}"));
        let opts = RunOptions {
            input_paths: vec![input.clone()],
            out_dir: out_dir.clone(),
            enrich: true,
        };
        run_pipeline(&cfg, &opts).await.unwrap();
        let mut files = HashMap::new();
        for name in ["model.json", "topics.tsv", "cloud.svg", "obama_visit.tagged.txt"] {
            files.insert(name, std::fs::read(out_dir.join(name)).unwrap());
        }
        outputs.push(files);
    }
    for name in ["model.json", "topics.tsv", "cloud.svg", "obama_visit.tagged.txt"] {
        assert_eq!(outputs[0][name], outputs[1][name], "{name} differs between runs");
    }
    println!("ACCEPT C8 replay-determinism: PASS");
}

// --- Criterion 9: stemmer vectors ----------------------------------------

#[test]
fn criterion_09_stemmer_vectors() {
    let vectors = std::fs::read_to_string(
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/snowball_en_vectors.tsv"),
    )
    .unwrap();
    let mut checked = 0usize;
    for line in vectors.lines().map(str::trim) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (input, expected) = line.split_once('\t').unwrap();
        assert_eq!(porter2::stem(input), expected, "stem({input:?})");
        checked += 1;
    }
    assert!(checked >= 1_000, "only {checked} vendored vectors");
    println!("ACCEPT C9 stemmer-vectors: PASS ({checked} pairs)");
}

// --- Criterion 10: idempotence over randomized inputs ---------------------

/// Random text mixing letter words, inflected English-like words, numbers,
/// brackets, punctuation and stop words.
fn random_text(rng: &mut SplitMix64) -> String {
    const WORDS: &[&str] = &[
        "Barack", "Germany", "agreed", "running", "cities", "happily", "B2B", "2016", "3.14",
        "the", "is", "only", "ares", "outs", "#5", "[tag,", "list]", "Merkel.", "...", "a_b",
        "communication", "nationalization", "oabee", "trees", "was", "IT'S", "década",
    ];
    const SEPS: &[&str] = &[" ", "  ", ", ", " [", "] ", "\t", "\n", " ("];
    let n = rng.below(12);
    let mut out = String::new();
    for _ in 0..n {
        match rng.below(4) {
            // dictionary-ish word
            0..=1 => out.push_str(WORDS[rng.below(WORDS.len())]),
            // random letter string
            2 => {
                let len = 1 + rng.below(8);
                for _ in 0..len {
                    out.push((b'a' + rng.below(26) as u8) as char);
                }
            }
            // random digits/punct mix
            _ => {
                let len = 1 + rng.below(5);
                const CHARS: &[char] = &['0', '7', '.', '-', '%', '!', '?', ';', '\''];
                for _ in 0..len {
                    out.push(CHARS[rng.below(CHARS.len())]);
                }
            }
        }
        out.push_str(SEPS[rng.below(SEPS.len())]);
    }
    out
}

#[test]
fn criterion_10_idempotence_properties() {
    let mut rng = SplitMix64::new(0xACCE97);
    // normalize
    for _ in 0..10_000 {
        let s = random_text(&mut rng);
        let once = normalize(&s);
        assert_eq!(normalize(&once), once, "normalize not idempotent on {s:?}");
    }
    // run_chain
    let stopwords = StopwordList::english_default();
    for _ in 0..10_000 {
        let s = random_text(&mut rng);
        let once = preprocess::run_chain(&s, &stopwords);
        let again = preprocess::run_chain(&once.join(" "), &stopwords);
        assert_eq!(once, again, "run_chain not idempotent on {s:?}");
    }
    // resolve_overlaps
    for _ in 0..10_000 {
        let count = rng.below(10);
        let mut anns: Vec<EntityAnnotation> = (0..count)
            .map(|_| {
                let offset = rng.below(60);
                let len = 1 + rng.below(6);
                EntityAnnotation {
                    uri: "http://e/x".into(),
                    surface_form: "x".repeat(len),
                    offset,
                    support: rng.below(50) as u64,
                    types_raw: String::new(),
                    similarity_score: None,
                    percentage_of_second_rank: None,
                }
            })
            .collect();
        anns.sort_by_key(|a| a.offset);
        let once = resolve_overlaps(anns.clone());
        assert!(once.len() <= anns.len());
        assert_eq!(resolve_overlaps(once.clone()), once, "resolve_overlaps not idempotent");
    }
    println!("ACCEPT C10 idempotence-properties: PASS (3 x 10,000 inputs)");
}
