//! Character alignment of a corrector's output against gold text.

use nimfasele::eval::align_strings;

fn main() {
    let pairs = [
        ("abc de", "ab de"),
        ("mi\u{200C}konam", "mikonam"),
        ("ketab ha ra", "ketabha raa"),
    ];
    for (gold, output) in pairs {
        let al = align_strings(gold, output);
        println!("gold   {}", al.render_a('\u{00B7}').replace('\u{200C}', "|"));
        println!("output {}", al.render_b('\u{00B7}').replace('\u{200C}', "|"));
        for b in &al.blocks {
            println!(
                "  match gold[{}..{}] = output[{}..{}]",
                b.a_start,
                b.a_start + b.len,
                b.b_start,
                b.b_start + b.len
            );
        }
        println!();
    }
}
