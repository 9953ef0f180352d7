//! The two tag encodings and the dataset file format.

use nimfasele::labeling::{decode, encode_retained, encode_stripped, read_dataset, write_dataset, Sample};

fn main() -> anyhow::Result<()> {
    let gold = "\u{0645}\u{06CC}\u{200C}\u{06A9}\u{0646}\u{0645} \u{0627}\u{06CC}\u{0646}\u{062C}\u{0627}";

    // separators removed, each letter tagged with what follows it
    let stripped = encode_stripped(gold)?;
    let tags: String = stripped.tags.iter().map(|t| t.digit()).collect();
    println!("letters {}", stripped.chars.iter().collect::<String>());
    println!("tags    {tags}");
    assert_eq!(decode(&stripped), gold);

    // a noisy copy with its separators kept as masked symbols
    let noisy = "\u{0645}\u{06CC} \u{06A9}\u{0646}\u{0645}\u{0627}\u{06CC}\u{0646}\u{062C}\u{0627}";
    let retained = encode_retained(noisy, &stripped.tags)?;
    let mask: String = retained.mask.iter().map(|m| if *m { 'T' } else { 'F' }).collect();
    println!("symbols {}", retained.symbols.iter().collect::<String>());
    println!("mask    {mask}");

    let mut file = Vec::new();
    write_dataset(
        &mut file,
        Some("{\"note\":\"example\"}"),
        [Sample::from(stripped), retained],
    )?;
    print!("{}", String::from_utf8_lossy(&file));
    let back = read_dataset(file.as_slice())?;
    println!("read back {} samples, meta {:?}", back.samples.len(), back.meta);
    Ok(())
}
