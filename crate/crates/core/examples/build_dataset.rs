//! Corpus loading, the ordered split and both dataset modes, written to a temporary directory.

use std::fs::File;
use std::io::BufWriter;

use nimfasele::corpus::{corpus_stats, load_tokenized_corpus, split_corpus, CharCount, CorpusFormat};
use nimfasele::labeling::{encode_stripped, write_dataset, Sample};
use nimfasele::noise::{build_noisy_dataset_from, DatasetMeta};
use nimfasele::{CharClassTable, NoiseConfig, SplitSpec};

fn main() -> anyhow::Result<()> {
    let text = include_str!("data/toy_corpus.txt");
    let (corpus, report) =
        load_tokenized_corpus(text.as_bytes(), CorpusFormat::Plain, &CharClassTable::persian(), "toy")?;
    let stats = corpus_stats(&corpus, CharCount::WithSeparators);
    println!(
        "{} sentences, {} words, {} characters",
        report.sentences, stats.words, stats.characters
    );

    let split = split_corpus(&corpus, SplitSpec::default())?;
    println!(
        "test {} / valid {} / train {}",
        split.test.len(),
        split.valid.len(),
        split.train.len()
    );

    let dir = std::env::temp_dir().join("nimfasele-build-example");
    std::fs::create_dir_all(&dir)?;
    let noise = NoiseConfig {
        seed: 7,
        ..NoiseConfig::default()
    };
    let mut first = 0;
    for (name, part) in [("test", &split.test), ("valid", &split.valid), ("train", &split.train)] {
        let stripped: Vec<Sample> = part
            .sentences
            .iter()
            .map(|s| encode_stripped(s).map(Sample::from))
            .collect::<Result<_, _>>()?;
        let path = dir.join(format!("{name}.a.tsv"));
        write_dataset(
            BufWriter::new(File::create(&path)?),
            Some(&DatasetMeta::stripped(name, first).to_json()),
            &stripped,
        )?;

        let noisy = build_noisy_dataset_from(part, &noise, first)?;
        let path = dir.join(format!("{name}.b.tsv"));
        write_dataset(
            BufWriter::new(File::create(&path)?),
            Some(&DatasetMeta::noisy(name, first, &noise).to_json()),
            &noisy,
        )?;
        first += part.len();
    }
    println!("wrote datasets to {}", dir.display());
    print!(
        "{}",
        std::fs::read_to_string(dir.join("valid.b.tsv"))?
            .lines()
            .take(3)
            .collect::<Vec<_>>()
            .join("\n")
    );
    println!();
    Ok(())
}
