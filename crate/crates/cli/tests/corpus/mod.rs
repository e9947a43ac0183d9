//! Seeded generator for a mixed-language source tree.

#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WORDS: &[&str] = &[
    "acc", "item", "total", "limit", "index", "count", "value", "buf", "node", "key", "rate",
    "size", "next", "prev", "flag", "step",
];

fn ident(rng: &mut ChaCha8Rng, n: usize) -> String {
    format!(
        "{}_{}{}",
        WORDS.choose(rng).unwrap(),
        WORDS.choose(rng).unwrap(),
        n
    )
}

fn c_function(rng: &mut ChaCha8Rng, n: usize) -> String {
    let name = ident(rng, n);
    let params = rng.gen_range(1..=4);
    let args: Vec<String> = (0..params).map(|i| format!("int p{i}")).collect();
    let mut s = format!(
        "/* {name} */\nint {name}({}) {{\n    int r = {};\n",
        args.join(", "),
        rng.gen_range(0..100)
    );
    for _ in 0..rng.gen_range(2..8) {
        let a = rng.gen_range(0..params);
        match rng.gen_range(0..4) {
            0 => writeln!(
                s,
                "    if (p{a} > {}) {{\n        r += p{a} * {};\n    }}",
                rng.gen_range(0..50),
                rng.gen_range(1..9)
            ),
            1 => writeln!(
                s,
                "    for (int i = 0; i < p{a}; i++) {{\n        r ^= i + {};\n    }}",
                rng.gen_range(0..50)
            ),
            2 => writeln!(
                s,
                "    while (r > {} && p{a} != 0) {{\n        r -= p{a};\n    }}",
                rng.gen_range(100..900)
            ),
            _ => writeln!(s, "    r = r * {} + p{a}; // mix", rng.gen_range(2..7)),
        }
        .unwrap();
    }
    s.push_str("    return r;\n}\n\n");
    s
}

fn py_function(rng: &mut ChaCha8Rng, n: usize) -> String {
    let name = ident(rng, n);
    let params = rng.gen_range(1..=4);
    let args: Vec<String> = (0..params).map(|i| format!("p{i}")).collect();
    let mut s = format!(
        "def {name}({}):\n    \"\"\"Compute {name}.\"\"\"\n    r = {}\n",
        args.join(", "),
        rng.gen_range(0..100)
    );
    for _ in 0..rng.gen_range(2..8) {
        let a = rng.gen_range(0..params);
        match rng.gen_range(0..4) {
            0 => writeln!(
                s,
                "    if p{a} > {}:\n        r += p{a} * {}",
                rng.gen_range(0..50),
                rng.gen_range(1..9)
            ),
            1 => writeln!(
                s,
                "    for i in range(p{a}):\n        r ^= i + {}",
                rng.gen_range(0..50)
            ),
            2 => writeln!(
                s,
                "    while r > {} and p{a} != 0:\n        r -= p{a}",
                rng.gen_range(100..900)
            ),
            _ => writeln!(s, "    r = r * {} + p{a}  # mix", rng.gen_range(2..7)),
        }
        .unwrap();
    }
    s.push_str("    return r\n\n\n");
    s
}

fn cobol_program(rng: &mut ChaCha8Rng, n: usize) -> String {
    let mut s = format!("*> Batch job {n}.\n");
    for p in 0..rng.gen_range(2..5) {
        writeln!(s, "PARAGRAPH STEP-{n}-{p} (WS-A, WS-B).").unwrap();
        for _ in 0..rng.gen_range(2..6) {
            if rng.gen_bool(0.4) {
                writeln!(
                    s,
                    "    IF WS-A > {}\n        ADD {} TO WS-B\n    END-IF.",
                    rng.gen_range(0..99),
                    rng.gen_range(1..9)
                )
                .unwrap();
            } else {
                writeln!(
                    s,
                    "    COMPUTE WS-B = WS-B * {} + WS-A.",
                    rng.gen_range(2..7)
                )
                .unwrap();
            }
        }
        s.push_str("END-PARAGRAPH.\n\n");
    }
    s
}

/// Writes a tree under `root` with roughly `target_lines` physical lines and
/// returns the number of lines written. Some functions are copied into a
/// second file so the tree contains real clones.
pub fn generate(root: &Path, seed: u64, target_lines: usize) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut written = 0;
    let mut file_no = 0;
    let mut pool: Vec<(u8, String)> = Vec::new();
    while written < target_lines {
        let kind = rng.gen_range(0..3u8);
        let mut text = String::new();
        for _ in 0..rng.gen_range(6..16) {
            let n = file_no * 100 + text.len() % 97;
            let f = if !pool.is_empty() && rng.gen_bool(0.08) {
                match pool
                    .iter()
                    .filter(|(k, _)| *k == kind)
                    .collect::<Vec<_>>()
                    .choose(&mut rng)
                {
                    Some((_, body)) => body.clone(),
                    None => continue,
                }
            } else {
                let f = match kind {
                    0 => c_function(&mut rng, n),
                    1 => py_function(&mut rng, n),
                    _ => cobol_program(&mut rng, n),
                };
                pool.push((kind, f.clone()));
                f
            };
            if kind == 2 {
                // One program per COBOL file.
                text = f;
                break;
            }
            text.push_str(&f);
        }
        let (dir, ext) = match kind {
            0 => ("native", "c"),
            1 => ("scripts", "py"),
            _ => ("batch", "cbl"),
        };
        let path = root.join(dir).join(format!("m{file_no:03}.{ext}"));
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        written += text.lines().count();
        fs::write(path, text).unwrap();
        file_no += 1;
    }
    written
}
