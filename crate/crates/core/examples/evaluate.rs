//! Scoring the raw text, a trained model and an external corrector on a parallel corpus.

use nimfasele::corpus::{load_parallel, load_tokenized_corpus, CorpusFormat};
use nimfasele::crf::train;
use nimfasele::eval::{evaluate_external, score_baseline, EvalReport};
use nimfasele::labeling::{encode_stripped, Sample};
use nimfasele::{CharClassTable, TrainConfig};

fn main() -> anyhow::Result<()> {
    let table = CharClassTable::persian();
    let (corpus, _) = load_tokenized_corpus(
        include_str!("data/toy_corpus.txt").as_bytes(),
        CorpusFormat::Plain,
        &table,
        "toy",
    )?;
    let pairs = load_parallel(include_str!("data/toy_parallel.tsv").as_bytes(), &table, true)?;

    let data: Vec<Sample> = corpus
        .sentences
        .iter()
        .map(|s| encode_stripped(s).map(Sample::from))
        .collect::<Result<_, _>>()?;
    let model = train(&data, &TrainConfig::default())?;

    let baseline = pairs.iter().map(score_baseline).collect::<Result<Vec<_>, _>>()?;
    let crf: Vec<EvalReport> = pairs
        .iter()
        .map(|p| Ok(evaluate_external(&p.raw, &model.correct(&p.raw)?, &p.gold)))
        .collect::<anyhow::Result<_>>()?;
    // a corrector that replaces every ZWNJ with a space and also drops the first letter
    let external: Vec<EvalReport> = pairs
        .iter()
        .map(|p| {
            let out: String = p
                .raw
                .chars()
                .skip(1)
                .map(|c| if c == '\u{200C}' { ' ' } else { c })
                .collect();
            evaluate_external(&p.raw, &out, &p.gold)
        })
        .collect();

    let rows = [
        ("Baseline", EvalReport::merge_all(&baseline)),
        ("CRF", EvalReport::merge_all(&crf)),
        ("Space-only", EvalReport::merge_all(&external)),
    ];
    let refs: Vec<(&str, &EvalReport)> = rows.iter().map(|(n, r)| (*n, r)).collect();
    print!("{}", EvalReport::render_table(&refs));
    println!();
    print!("{}", rows[2].1.render_details());
    Ok(())
}
