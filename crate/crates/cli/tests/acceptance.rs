//! Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned.
//! Runs as a plain binary so every line is printed, in order.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use docsearch::corpus::{generate_synthetic_corpus, tokens, GeneratorConfig};
use docsearch::metrics::{bleu, perplexity, pronoun_f1, Conditioning, PronounEvalSpec};
use docsearch::model::{FnScorer, RandomScorer};
use docsearch::report::Metric;
use docsearch::strategies::{split_by_separator, DiagnosticKind};
use docsearch::{
    beam_search, decode_document, exact_decode, predicted_cost, BeamParams, Document, Gender,
    Sentence, StrategyId, SyntheticModel, TokenId, Vocab, WorldSpec,
};
use docsearch_cli::{compare, CompareReport, RunSettings};

const SEED: u64 = 2024;

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn check(id: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome { id, pass, detail }
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed <= Duration::from_secs(limit_secs)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let (mut instances, mut mismatches) = (0, 0);
    for seed in 0..240u64 {
        let size = 2 + (seed % 2) as usize;
        let max_len = 1 + (seed / 2 % 4) as usize;
        let s = RandomScorer::new(size, SEED ^ seed, 1.0 + (seed % 3) as f64).unwrap();
        let params = BeamParams::new(size.pow(max_len as u32))
            .with_max_len(max_len)
            .with_length_norm(false);
        let got = beam_search(&s, &[], &[], &params).unwrap();
        let want = exact_decode(&s, &[], &[], max_len).unwrap();
        instances += 1;
        mismatches += usize::from(!got[0].bitwise_eq(&want));
    }
    let t = start.elapsed();
    check(
        "1 oracle equivalence",
        instances >= 200 && mismatches == 0 && within(t, 60),
        format!("{instances} instances (need >= 200), {mismatches} mismatches (need 0), {t:.2?} (limit 60s)"),
    )
}

fn synthetic(
    seed: u64,
    n_docs: usize,
    sentences: usize,
    len: usize,
    window: usize,
) -> Vec<Document> {
    let config = GeneratorConfig {
        n_docs,
        sentences_per_doc: sentences,
        sentence_len: len,
        window: window.max(2),
    };
    generate_synthetic_corpus(&WorldSpec::default_world(), seed, &config).unwrap()
}

fn criterion_2a(model: &SyntheticModel) -> Outcome {
    let start = Instant::now();
    let (mut docs, mut cost_mismatches, mut ratio_mismatches) = (0, 0, 0);
    for k in 0..120usize {
        let n = 2 + k % 9;
        let len = 1 + (k / 9) % 8;
        let window = 1 + k % 4;
        let h = 1 + (k / 4) % 4;
        let b = 1 + k % 3;
        let doc = &synthetic(SEED + k as u64, 1, n, len, window)[0];
        docs += 1;
        let mut passes = Vec::new();
        for s in StrategyId::all(h) {
            let r = decode_document(s, model, doc, window, &BeamParams::new(b)).unwrap();
            cost_mismatches +=
                usize::from(r.forward_passes != predicted_cost(s, n, len, window, b));
            passes.push(r.forward_passes);
        }
        // doc-trans is index 6, doc-trans-beam index 7 in table order.
        ratio_mismatches += usize::from(passes[7] != h as u64 * passes[6]);
    }
    let t = start.elapsed();
    check(
        "2a cost exactness",
        docs >= 100 && cost_mismatches == 0 && ratio_mismatches == 0 && within(t, 120),
        format!(
            "{docs} documents x 9 strategies, {cost_mismatches} cost mismatches (need 0), \
             {ratio_mismatches} doc-trans-beam/doc-trans != h (need 0), {t:.2?} (limit 120s)"
        ),
    )
}

fn criterion_2b(model: &SyntheticModel) -> Outcome {
    let mut worst = (0.0f64, 0usize, 0usize, 0.0f64);
    for n in 8..=10 {
        for window in 1..=4 {
            let doc = &synthetic(SEED + 7, 1, n, 5, window)[0];
            let beam = BeamParams::new(2);
            let last =
                decode_document(StrategyId::LastSentence, model, doc, window, &beam).unwrap();
            let base =
                decode_document(StrategyId::SentenceLevel, model, doc, window, &beam).unwrap();
            let ratio = last.forward_passes as f64 / base.forward_passes as f64;
            let dev = (ratio - window as f64).abs() / window as f64;
            if dev > worst.0 {
                worst = (dev, n, window, ratio);
            }
        }
    }
    check(
        "2b last-sentence/sentence-level within 10% of W for N >= 8",
        worst.0 <= 0.10,
        format!(
            "worst relative deviation {:.4} at N={}, W={} (ratio {:.4}; limit 0.10)",
            worst.0, worst.1, worst.2, worst.3
        ),
    )
}

fn criterion_3(model: &SyntheticModel) -> Outcome {
    let beam = BeamParams::new(3);
    let mut failures = Vec::new();
    for doc in &synthetic(SEED + 3, 20, 6, 5, 3) {
        let base = decode_document(StrategyId::SentenceLevel, model, doc, 1, &beam).unwrap();
        for s in StrategyId::all(3) {
            if !decode_document(s, model, doc, 1, &beam)
                .unwrap()
                .bitwise_eq(&base)
            {
                failures.push(format!("W=1 {s} {}", doc.doc_id));
            }
        }
        let dt = decode_document(StrategyId::DocTrans, model, doc, 3, &beam).unwrap();
        let dtb = decode_document(
            StrategyId::DocTransBeam { context_beam: 1 },
            model,
            doc,
            3,
            &beam,
        )
        .unwrap();
        if !dt.bitwise_eq(&dtb) {
            failures.push(format!("h=1 {}", doc.doc_id));
        }
        for sentence in &doc.sentences {
            let single = Document::new("single", vec![sentence.clone()]);
            let base =
                decode_document(StrategyId::SentenceLevel, model, &single, 3, &beam).unwrap();
            for s in StrategyId::all(3) {
                if !decode_document(s, model, &single, 3, &beam)
                    .unwrap()
                    .bitwise_eq(&base)
                {
                    failures.push(format!("single sentence {s}"));
                }
            }
        }
    }
    check(
        "3 reduction identities",
        failures.is_empty(),
        format!(
            "{} non-identical outputs (need 0) {:?}",
            failures.len(),
            failures.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

fn gender_f1(report: &CompareReport, name: &str) -> f64 {
    report
        .rows
        .iter()
        .find(|r| r.strategy == name)
        .and_then(|r| r.metrics.gender.as_ref())
        .map(|g| g.micro_f1)
        .unwrap()
}

fn criterion_4(report: &CompareReport, corpus: &[Document], elapsed: Duration) -> Outcome {
    let aware = ["doc-trans", "doc-trans-beam", "last-sentence", "two-pass"];
    let blind = ["no-context", "first-sentence", "sentence-level"];
    let genders: Vec<Gender> = corpus
        .iter()
        .flat_map(|d| {
            d.sentences
                .iter()
                .flat_map(|s| s.annotations.iter().flatten())
        })
        .filter_map(|a| a.class.gender())
        .collect();
    // Unresolvable pronouns tie and the first pronoun in vocabulary order,
    // the masculine one, wins.
    let share = genders.iter().filter(|g| **g == Gender::M).count() as f64 / genders.len() as f64;
    let cheating = gender_f1(report, "cheating");
    let aware_f1: Vec<f64> = aware.iter().map(|s| gender_f1(report, s)).collect();
    let blind_f1: Vec<f64> = blind.iter().map(|s| gender_f1(report, s)).collect();
    let min_aware = aware_f1.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_aware = aware_f1.iter().cloned().fold(0.0, f64::max);
    let max_blind = blind_f1.iter().cloned().fold(0.0, f64::max);
    let max_dev = blind_f1
        .iter()
        .map(|f| (f - share).abs())
        .fold(0.0, f64::max);
    let pass = corpus.len() >= 100
        && cheating >= max_aware
        && min_aware > max_blind
        && min_aware >= 0.95
        && max_dev <= 0.05
        && within(elapsed, 300);
    check(
        "4 gender F1 ordering",
        pass,
        format!(
            "cheating {cheating:.4} >= aware {aware_f1:.4?} (min >= 0.95) > blind {blind_f1:.4?}; \
             blind vs tie-break share {share:.4}: max |diff| {max_dev:.4} (limit 0.05); \
             {} docs; {elapsed:.2?} (limit 300s)",
            corpus.len()
        ),
    )
}

fn criterion_5(report: &CompareReport) -> Outcome {
    let reference = report.rows[0]
        .metrics
        .perplexity
        .as_ref()
        .unwrap()
        .references;
    let (worst_name, worst) = report
        .rows
        .iter()
        .map(|r| {
            (
                r.strategy.as_str(),
                r.metrics.perplexity.as_ref().unwrap().hypotheses,
            )
        })
        .fold(("", 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    let margin = reference / worst - 1.0;
    check(
        "5 reference perplexity above every strategy",
        margin >= 0.10,
        format!("ref {reference:.4} vs highest hypothesis {worst:.4} ({worst_name}): margin {:.2}% (need >= 10%)", 100.0 * margin),
    )
}

fn criterion_6(report: &CompareReport) -> Outcome {
    let row = report
        .rows
        .iter()
        .find(|r| r.strategy == "last-sentence")
        .unwrap();
    let acc = row.metrics.contrastive.unwrap();
    let f1 = gender_f1(report, "last-sentence");
    check(
        "6 contrastive accuracy >= generation F1",
        acc >= f1,
        format!("contrastive {acc:.4} >= last-sentence gender F1 {f1:.4}"),
    )
}

fn criterion_7() -> Outcome {
    let t = |s: &str| tokens(s);
    let mut failures = Vec::new();
    let b = bleu(&[t("a b c d")], &[t("a b c d e")]).unwrap();
    if (b - 0.7788).abs() > 1e-4 {
        failures.push(format!("bleu {b}"));
    }
    let x = vec![t("a b c d e f"), t("g h i j")];
    if bleu(&x, &x).unwrap() != 1.0 {
        failures.push("bleu(x,x)".into());
    }

    let vocab = Vocab::new(vec!["</s>".into(), "<sep>".into(), "a".into()]).unwrap();
    let half = FnScorer::new(vocab, TokenId(1), TokenId(0), |_: &[TokenId]| {
        vec![0.5, 0.0, 0.5]
    });
    let doc = Document::new("d", vec![Sentence::new(t("a a")), Sentence::new(t("a"))]);
    let ppl = perplexity(
        &half,
        &[doc],
        &[vec![t("a a"), t("a")]],
        Conditioning::NoContext,
        1,
    )
    .unwrap();
    if (ppl - 2.0).abs() > 1e-12 {
        failures.push(format!("ppl {ppl}"));
    }

    let world = WorldSpec::default_world();
    let doc = Document::new(
        "d",
        vec![Sentence::new(t("it and it")).with_reference(t("er und es"))],
    );
    let r = pronoun_f1(
        &[doc],
        &[vec![t("es und es")]],
        &PronounEvalSpec::gender(&world),
        0,
    )
    .unwrap();
    if r.per_class["N"].f1 != 2.0 / 3.0 || r.per_class["M"].f1 != 0.0 {
        failures.push(format!(
            "f1 N {} M {}",
            r.per_class["N"].f1, r.per_class["M"].f1
        ));
    }

    let (sep, eos) = ("<sep>".to_string(), "<eos>".to_string());
    let cases = [
        ("a <sep> b <eos>", vec![t("a"), t("b")], None),
        (
            "a <eos>",
            vec![t("a"), vec![]],
            Some(DiagnosticKind::SeparatorDeficit),
        ),
        (
            "a <sep> b <sep> c <eos>",
            vec![t("a"), t("b <sep> c")],
            Some(DiagnosticKind::SeparatorSurplus),
        ),
    ];
    for (input, parts, diag) in cases {
        if split_by_separator(&t(input), 2, &sep, &eos) != (parts, diag) {
            failures.push(format!("split {input:?}"));
        }
    }
    check(
        "7 metric unit suite",
        failures.is_empty(),
        format!("BLEU 0.7788 (+-1e-4), BLEU(x,x)=1, PPL=2 (+-1e-12), F1 2/3 and 0, 3 split cases; failures: {failures:?}"),
    )
}

fn without_wall_time(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.contains("\"wall_time_secs\""))
        .collect::<Vec<_>>()
        .join("\n")
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_docsearch");
    let corpus = dir.path().join("corpus.jsonl");
    let status = Command::new(bin)
        .args(["generate", "--seed", "8", "--docs", "15", "--out"])
        .arg(&corpus)
        .status()
        .unwrap();
    assert!(status.success());
    let mut reports = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("compare{run}.json"));
        let result = Command::new(bin)
            .args(["compare", "--corpus"])
            .arg(&corpus)
            .args(["--beam", "4", "--context-beam", "3", "--jobs", "4", "--out"])
            .arg(&out)
            .output()
            .unwrap();
        assert!(
            result.status.success(),
            "{}",
            String::from_utf8_lossy(&result.stderr)
        );
        reports.push(without_wall_time(&out));
    }
    check(
        "8 compare determinism",
        reports[0] == reports[1] && !reports[0].is_empty(),
        format!(
            "two runs, {} bytes each, identical apart from wall_time_secs",
            reports[0].len()
        ),
    )
}

fn main() {
    let model = SyntheticModel::new(WorldSpec::default_world()).unwrap();
    let mut outcomes = vec![
        criterion_1(),
        criterion_2a(&model),
        criterion_2b(&model),
        criterion_3(&model),
    ];

    let corpus = synthetic(SEED, 100, 6, 6, 3);
    let start = Instant::now();
    let settings = RunSettings {
        window: 3,
        beam: BeamParams::default(),
        context_beam: 12,
        jobs: 0,
        seed: Some(SEED),
    };
    let report = compare(
        &model,
        &corpus,
        &StrategyId::all(settings.context_beam),
        &settings,
        &Metric::ALL,
        100,
    )
    .unwrap();
    let elapsed = start.elapsed();
    outcomes.push(criterion_4(&report, &corpus, elapsed));
    outcomes.push(criterion_5(&report));
    outcomes.push(criterion_6(&report));
    outcomes.push(criterion_7());
    outcomes.push(criterion_8());

    for o in &outcomes {
        println!(
            "{} [{}] {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.id,
            o.detail
        );
    }
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    println!(
        "acceptance: {} passed, {failed} failed",
        outcomes.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
