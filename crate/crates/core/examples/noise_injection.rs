//! Seeded separator noise on a few sentences.

use nimfasele::corpus::{load_tokenized_corpus, CorpusFormat};
use nimfasele::noise::{inject_noise, NoiseConfig};
use nimfasele::CharClassTable;

fn main() -> anyhow::Result<()> {
    let text = include_str!("data/toy_corpus.txt");
    let (corpus, _) = load_tokenized_corpus(text.as_bytes(), CorpusFormat::Plain, &CharClassTable::persian(), "toy")?;

    // exaggerated rates so that every step shows up
    let cfg = NoiseConfig {
        r1_max: 0.5,
        r2_max: 0.5,
        r3_max: 0.2,
        seed: 42,
    };
    for (i, gold) in corpus.sentences.iter().enumerate().take(6) {
        let n = inject_noise(gold, &cfg, i)?;
        println!("gold  {}", gold.replace('\u{200C}', "|"));
        println!("noisy {}", n.noisy.replace('\u{200C}', "|"));
        println!(
            "      r=({:.3}, {:.3}, {:.3}) zwnj->space {:?} removed {:?} perturbed {:?}\n",
            n.draw.rates.r1,
            n.draw.rates.r2,
            n.draw.rates.r3,
            n.draw.zwnj_to_space,
            n.draw.spaces_removed,
            n.draw.perturbed
        );
    }

    // the same seed and sentence index always give the same corruption
    let a = inject_noise(&corpus.sentences[0], &cfg, 0)?;
    let b = inject_noise(&corpus.sentences[0], &cfg, 0)?;
    assert_eq!(a, b);
    Ok(())
}
