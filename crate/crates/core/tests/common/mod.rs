//! Brute-force reference for clone detection, shared by test targets.
#![allow(dead_code)]

use xmaint_core::duplication::RawClone;

/// Compares every pair of window starts directly, no hashing. A match is
/// reported when it cannot be extended to the left; it is then extended to
/// the right as far as it goes. When both occurrences share a stream and
/// overlap, the run is cut into pieces as long as the distance between them.
pub fn brute_force_clones(streams: &[Vec<u32>], min_tokens: usize) -> Vec<RawClone> {
    let positions: Vec<(usize, usize)> = streams
        .iter()
        .enumerate()
        .flat_map(|(f, s)| (0..s.len()).map(move |p| (f, p)))
        .collect();
    let mut out = Vec::new();
    for (i, &(fa, pa)) in positions.iter().enumerate() {
        for &(fb, pb) in &positions[i + 1..] {
            let (sa, sb) = (&streams[fa], &streams[fb]);
            if pa > 0 && pb > 0 && sa[pa - 1] == sb[pb - 1] {
                continue;
            }
            let len = sa[pa..]
                .iter()
                .zip(&sb[pb..])
                .take_while(|(x, y)| x == y)
                .count();
            if len < min_tokens {
                continue;
            }
            if fa == fb && pa + len > pb {
                let shift = pb - pa;
                let mut offset = 0;
                while offset < len {
                    let piece = shift.min(len - offset);
                    if piece >= min_tokens {
                        out.push(RawClone {
                            file_a: fa,
                            start_a: pa + offset,
                            file_b: fb,
                            start_b: pb + offset,
                            len: piece,
                        });
                    }
                    offset += shift;
                }
            } else {
                out.push(RawClone {
                    file_a: fa,
                    start_a: pa,
                    file_b: fb,
                    start_b: pb,
                    len,
                });
            }
        }
    }
    out.sort();
    out
}
