//! Training a CRF with a progress observer, then inspecting and saving it.

use nimfasele::corpus::{load_tokenized_corpus, split_corpus, CorpusFormat};
use nimfasele::crf::{save_model, Trainer};
use nimfasele::labeling::{encode_stripped, Sample};
use nimfasele::{CharClassTable, SplitSpec, Tag, TrainConfig};

fn main() -> anyhow::Result<()> {
    let text = include_str!("data/toy_corpus.txt");
    let (corpus, _) = load_tokenized_corpus(text.as_bytes(), CorpusFormat::Plain, &CharClassTable::persian(), "toy")?;
    let split = split_corpus(&corpus, SplitSpec::default())?;
    let train: Vec<Sample> = split
        .train
        .sentences
        .iter()
        .map(|s| encode_stripped(s).map(Sample::from))
        .collect::<Result<_, _>>()?;

    let (model, log) = Trainer::new(TrainConfig::default())
        .observer(|r, _| {
            println!(
                "iter {:>3}  objective {:>12.4}  nonzero {}",
                r.iteration, r.objective, r.nonzero
            );
        })
        .train(&train)?;
    println!("stopped: {:?}", log.stop);
    println!(
        "{} features, {} nonzero parameters",
        model.vocab().len(),
        model.nonzero()
    );

    // the strongest evidence for a space and for a ZWNJ
    for tag in [Tag::Space, Tag::Zwnj] {
        let mut weights: Vec<(&str, f64)> = model
            .vocab()
            .names()
            .iter()
            .map(|f| (f.as_str(), model.state_weight(f, tag).unwrap()))
            .collect();
        weights.sort_by(|a, b| b.1.total_cmp(&a.1));
        println!("top features for tag {tag}:");
        for (f, w) in weights.iter().take(3) {
            println!("  {w:>8.4}  {f}");
        }
    }

    let path = std::env::temp_dir().join("nimfasele-example.crf");
    save_model(&model, std::fs::File::create(&path)?)?;
    println!("saved {}", path.display());
    Ok(())
}
