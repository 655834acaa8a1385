//! Textual label similarity: normalized Levenshtein over lowercased,
//! whitespace-collapsed strings.

use crate::util::text::normalize_label;

/// Levenshtein edit distance over chars. Two-row dynamic programming.
pub fn levenshtein(a: &[char], b: &[char]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut current = vec![0usize; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        current[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let substitution = prev[j] + usize::from(ca != cb);
            current[j + 1] = substitution.min(prev[j + 1] + 1).min(current[j] + 1);
        }
        std::mem::swap(&mut prev, &mut current);
    }
    prev[b.len()]
}

/// Similarity in [0, 1]: `1 - dist(a', b') / max(|a'|, |b'|)` where the
/// primes are the normalized strings. Two empty strings are fully similar by
/// convention.
pub fn similarity(a: &str, b: &str) -> f64 {
    let a: Vec<char> = normalize_label(a).chars().collect();
    let b: Vec<char> = normalize_label(b).chars().collect();
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein(&a, &b) as f64 / longest as f64
}
