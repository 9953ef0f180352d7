//! Correcting raw text with a trained model, in both input modes.

use nimfasele::corpus::{load_tokenized_corpus, CorpusFormat};
use nimfasele::crf::{load_model, save_model, train};
use nimfasele::labeling::{encode_stripped, Sample};
use nimfasele::noise::build_noisy_dataset;
use nimfasele::{CharClassTable, NoiseConfig, TrainConfig};

fn show(s: &str) -> String {
    s.replace('\u{200C}', "|")
}

fn main() -> anyhow::Result<()> {
    let text = include_str!("data/toy_corpus.txt");
    let (corpus, _) = load_tokenized_corpus(text.as_bytes(), CorpusFormat::Plain, &CharClassTable::persian(), "toy")?;

    let stripped: Vec<Sample> = corpus
        .sentences
        .iter()
        .map(|s| encode_stripped(s).map(Sample::from))
        .collect::<Result<_, _>>()?;
    let model_a = train(&stripped, &TrainConfig::default())?;

    // a saved model predicts exactly like the original
    let mut file = Vec::new();
    save_model(&model_a, &mut file)?;
    let model_a = load_model(file.as_slice())?;

    let inputs = [
        "\u{0645}\u{06CC}\u{06A9}\u{0646}\u{0645}",
        "\u{0645}\u{06CC} \u{06A9}\u{0646}\u{0645}",
        "\u{0628}\u{0631}\u{0633}\u{0631}\u{0645}\u{06CC}\u{0628}\u{06CC}\u{0646}\u{0645}",
    ];
    for raw in inputs {
        println!("{:<24} -> {}", show(raw), show(&model_a.correct(raw)?));
    }

    // a model trained on noisy text with its separators kept as context; the
    // noise rarely deletes a ZWNJ outright, so this model sees few examples of it
    let noisy = build_noisy_dataset(
        &corpus,
        &NoiseConfig {
            seed: 3,
            ..NoiseConfig::default()
        },
    )?;
    let model_b = train(&noisy, &TrainConfig::default())?;
    for raw in inputs {
        println!("{:<24} => {}", show(raw), show(&model_b.correct_retained(raw)?));
    }
    Ok(())
}
