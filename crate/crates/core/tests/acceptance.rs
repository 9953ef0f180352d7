//! One line per acceptance criterion, written straight to stdout so it shows
//! up without `--nocapture`.

mod common;

use std::io::Write;

use common::*;
use nimfasele::corpus::{split_corpus, Corpus, ParallelPair, SplitSpec};
use nimfasele::crf::{train, Objective, TrainConfig};
use nimfasele::eval::{align_strings, evaluate, evaluate_external, macro_f1, score_baseline, EvalReport};
use nimfasele::labeling::{decode, encode_stripped, write_dataset, Sample, Tag};
use nimfasele::noise::{build_noisy_dataset, inject_noise, NoiseConfig};
use rand::seq::IndexedRandom;
use rand::Rng;

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn report(out: &mut Vec<Outcome>, name: &'static str, pass: bool, detail: String) {
    let line = format!("{} {name}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stdout().write_all(line.as_bytes());
    out.push(Outcome { name, pass, detail });
}

fn macro_f1_arithmetic(out: &mut Vec<Outcome>) {
    let rows = [
        ([0.9823, 0.9336, 0.5697], 0.8285),
        ([0.8923, 0.6369, 0.5664], 0.6985),
        ([0.9963, 0.9886, 0.9593], 0.9814),
    ];
    let worst = rows
        .iter()
        .map(|(f, avg)| (macro_f1(f) - avg).abs())
        .fold(0.0, f64::max);
    report(
        out,
        "macro-F1 arithmetic",
        worst <= 5e-5,
        format!("max deviation {worst:.2e} (tolerance 5e-5)"),
    );
}

fn random_valid_sentence<R: Rng>(r: &mut R) -> String {
    const LETTERS: &[char] = &[
        '\u{0645}', '\u{06CC}', '\u{06A9}', '\u{0631}', '\u{0627}', '\u{0648}', 'a', '7', '\u{06F5}',
    ];
    let n = r.random_range(1..=30);
    let mut s = String::new();
    for i in 0..n {
        s.push(*LETTERS.choose(r).unwrap());
        if i + 1 < n {
            match r.random_range(0..4) {
                0 => s.push(' '),
                1 => s.push(ZWNJ),
                _ => {}
            }
        }
    }
    s
}

fn codec_round_trip(out: &mut Vec<Outcome>) {
    let mut r = rng(100);
    let mut failures = 0;
    for _ in 0..10_000 {
        let g = random_valid_sentence(&mut r);
        if encode_stripped(&g).map(|t| decode(&t)).ok().as_deref() != Some(g.as_str()) {
            failures += 1;
        }
    }
    report(
        out,
        "codec round trip",
        failures == 0,
        format!("{failures} failures in 10000 sentences"),
    );
}

fn crf_exactness(out: &mut Vec<Outcome>) {
    let mut r = rng(101);
    let mut worst = 0.0f64;
    let mut viterbi_mismatch = 0;
    for _ in 0..200 {
        let n = r.random_range(1..=8);
        let s = random_sample(&mut r, n, false);
        let model = random_model(&mut r, std::slice::from_ref(&s), 3.0);
        let (log_z, best) = brute_force(&model, &s.symbols);
        worst = worst.max((model.log_partition(&s.symbols, &vec![true; n]) - log_z).abs());
        if model.predict(&s.symbols).unwrap() != best {
            viterbi_mismatch += 1;
        }
    }
    report(
        out,
        "CRF exactness",
        worst <= 1e-9 && viterbi_mismatch == 0,
        format!("200 models, max |logZ error| {worst:.2e}, {viterbi_mismatch} Viterbi mismatches"),
    );
}

fn gradient_check(out: &mut Vec<Outcome>) {
    let mut r = rng(102);
    let mut worst = 0.0f64;
    let h = 1e-5;
    for _ in 0..50 {
        let data: Vec<Sample> = (0..2)
            .map(|_| {
                let n = r.random_range(2..=5);
                let masked = r.random_bool(0.5);
                random_sample(&mut r, n, masked)
            })
            .collect();
        let model = random_model(&mut r, &data, 0.5);
        // the L1 term is only differentiable away from zero
        let w: Vec<f64> = model.parameters().iter().map(|x| x + x.signum() * 0.01).collect();
        let obj = Objective::new(&model, &data, 0.1, 0.1);
        let (_, g) = obj.evaluate(&w).unwrap();
        for k in 0..w.len() {
            let mut wp = w.clone();
            let mut wm = w.clone();
            wp[k] += h;
            wm[k] -= h;
            let fd = (obj.evaluate(&wp).unwrap().0 - obj.evaluate(&wm).unwrap().0) / (2.0 * h);
            worst = worst.max(rel_err(g[k], fd));
        }
    }
    report(
        out,
        "gradient check",
        worst <= 1e-4,
        format!("50 instances, max relative error {worst:.2e} (tolerance 1e-4)"),
    );
}

fn learning_and_examples(out: &mut Vec<Outcome>) {
    let corpus = Corpus::new("synthetic", synthetic_corpus(200, 103));
    let split = split_corpus(
        &corpus,
        SplitSpec {
            test_fraction: 0.2,
            valid_fraction: 0.0,
        },
    )
    .unwrap();
    let train_set: Vec<Sample> = split
        .train
        .sentences
        .iter()
        .map(|s| Sample::from(encode_stripped(s).unwrap()))
        .collect();
    let model = train(&train_set, &TrainConfig::default()).unwrap();

    let mut crf = Vec::new();
    let mut nothing = Vec::new();
    let mut literal_zero = Vec::new();
    for gold in &split.test.sentences {
        let t = encode_stripped(gold).unwrap();
        let pred = model.predict(&t.chars).unwrap();
        crf.push(evaluate(&t.tags, &pred, &t.mask).unwrap());
        nothing.push(evaluate(&t.tags, &vec![Tag::None; t.len()], &t.mask).unwrap());
        literal_zero.push(
            score_baseline(&ParallelPair {
                raw: gold.clone(),
                gold: gold.clone(),
            })
            .unwrap(),
        );
    }
    let test_corpus = Corpus::new("test", split.test.sentences.clone());
    let noisy: Vec<EvalReport> = build_noisy_dataset(
        &test_corpus,
        &NoiseConfig {
            seed: 7,
            ..NoiseConfig::default()
        },
    )
    .unwrap()
    .iter()
    .zip(&split.test.sentences)
    .map(|(s, gold)| {
        let raw: String = s.symbols.iter().collect();
        score_baseline(&ParallelPair {
            raw,
            gold: gold.clone(),
        })
        .unwrap()
    })
    .collect();
    let crf = EvalReport::merge_all(&crf).macro_f1;
    let nothing = EvalReport::merge_all(&nothing).macro_f1;
    let noisy = EvalReport::merge_all(&noisy).macro_f1;
    let literal_zero = EvalReport::merge_all(&literal_zero).macro_f1;
    report(
        out,
        "learning sanity",
        crf >= 0.99 && crf > nothing && crf > noisy,
        format!(
            "held-out macro-F1 {crf:.4}; separator-free input baseline {nothing:.4}; \
             default-rate noisy baseline {noisy:.4}; zero-rate copy of gold scores {literal_zero:.4}"
        ),
    );

    let cases = [
        (
            "\u{0645}\u{06CC}\u{06A9}\u{0646}\u{0645}",
            "\u{0645}\u{06CC}\u{200C}\u{06A9}\u{0646}\u{0645}",
        ),
        (
            "\u{0645}\u{06CC} \u{06A9}\u{0646}\u{0645}",
            "\u{0645}\u{06CC}\u{200C}\u{06A9}\u{0646}\u{0645}",
        ),
    ];
    let got: Vec<String> = cases.iter().map(|(raw, _)| model.correct(raw).unwrap()).collect();
    let ok = cases.iter().zip(&got).all(|((_, want), g)| g == want);
    report(
        out,
        "end-to-end examples",
        ok,
        format!("missing ZWNJ and space-for-ZWNJ corrected: {ok}"),
    );
}

fn noise_bounds(out: &mut Vec<Outcome>) {
    let sentences = synthetic_corpus(1000, 104);
    let cfg = NoiseConfig {
        seed: 42,
        ..NoiseConfig::default()
    };
    let mut violations = 0;
    for (i, g) in sentences.iter().enumerate() {
        let n = inject_noise(g, &cfg, i).unwrap();
        let l = g.chars().count() as f64;
        let bound = |r: f64| (r * l).floor() as usize + 1;
        if n.draw.zwnj_to_space.len() > bound(cfg.r1_max)
            || n.draw.spaces_removed.len() > bound(cfg.r2_max)
            || n.draw.perturbed.len() > bound(cfg.r3_max)
        {
            violations += 1;
        }
    }
    let corpus = Corpus::new("synthetic", sentences);
    let zero = build_noisy_dataset(&corpus, &NoiseConfig::zero(42)).unwrap();
    let identity = zero.iter().zip(&corpus.sentences).all(|(s, g)| {
        s.symbols.iter().collect::<String>() == *g
            && s.mask
                .iter()
                .zip(&s.symbols)
                .all(|(m, c)| *m == !(*c == ' ' || *c == ZWNJ))
    });
    let bytes = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let samples = pool.install(|| build_noisy_dataset(&corpus, &cfg).unwrap());
        let mut buf = Vec::new();
        write_dataset(&mut buf, None, &samples).unwrap();
        buf
    };
    let identical = bytes(1) == bytes(4) && bytes(4) == bytes(4);
    report(
        out,
        "noise-model bounds",
        violations == 0 && identity && identical,
        format!("1000 sentences, {violations} bound violations; zero rates identity: {identity}; same seed byte-identical: {identical}"),
    );
}

fn masking_semantics(out: &mut Vec<Outcome>) {
    let mut r = rng(105);
    let mut trials = 0;
    let mut changed = 0;
    while trials < 100 {
        let n = r.random_range(3..=10);
        let s = random_sample(&mut r, n, true);
        let masked: Vec<usize> = (0..s.len()).filter(|&i| !s.mask[i]).collect();
        let Some(&i) = masked.choose(&mut r) else { continue };
        trials += 1;
        let model = random_model(&mut r, std::slice::from_ref(&s), 1.0);
        let mut f = s.clone();
        f.tags[i] = Tag::ALL[(s.tags[i].index() + r.random_range(1..3)) % 3];
        let w = model.parameters();
        let a = Objective::new(&model, std::slice::from_ref(&s), 0.1, 0.1)
            .evaluate(&w)
            .unwrap();
        let b = Objective::new(&model, std::slice::from_ref(&f), 0.1, 0.1)
            .evaluate(&w)
            .unwrap();
        let pred = model.predict_masked(&s.symbols, &s.mask).unwrap();
        let ra = evaluate(&s.tags, &pred, &s.mask).unwrap();
        let rb = evaluate(&f.tags, &pred, &f.mask).unwrap();
        if a != b || ra != rb {
            changed += 1;
        }
    }
    report(
        out,
        "masking semantics",
        changed == 0,
        format!("{changed} of 100 flips changed objective, gradient or report"),
    );
}

fn alignment_round_trip(out: &mut Vec<Outcome>) {
    let mut r = rng(106);
    const ALPHA: &[char] = &['a', 'b', 'c', ' ', ZWNJ, '\u{0645}', '\u{06CC}'];
    let mut bad_align = 0;
    for _ in 0..10_000 {
        let mut s = || -> String {
            (0..r.random_range(0..20))
                .map(|_| *ALPHA.choose(&mut r).unwrap())
                .collect()
        };
        let (a, b) = (s(), s());
        let al = align_strings(&a, &b);
        if al.a().into_iter().collect::<String>() != a || al.b().into_iter().collect::<String>() != b {
            bad_align += 1;
        }
    }
    let mut imperfect = 0;
    for _ in 0..1000 {
        let g = random_valid_sentence(&mut r);
        let rep = evaluate_external(&g, &g, &g);
        if rep.macro_f1 != 1.0 || rep.masked_skipped != 0 || rep.per_class.iter().any(|c| c.f1 != 1.0) {
            imperfect += 1;
        }
    }
    report(
        out,
        "alignment round trip",
        bad_align == 0 && imperfect == 0,
        format!("{bad_align} of 10000 pairs not recovered; {imperfect} of 1000 identity evaluations imperfect"),
    );
}

#[test]
fn acceptance() {
    let mut out = Vec::new();
    let _ = std::io::stdout().write_all(b"\n");
    macro_f1_arithmetic(&mut out);
    codec_round_trip(&mut out);
    crf_exactness(&mut out);
    gradient_check(&mut out);
    learning_and_examples(&mut out);
    noise_bounds(&mut out);
    masking_semantics(&mut out);
    alignment_round_trip(&mut out);
    let failed: Vec<String> = out
        .iter()
        .filter(|o| !o.pass)
        .map(|o| format!("{}: {}", o.name, o.detail))
        .collect();
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
}
