//! Small text helpers shared across modules.

/// Collapse runs of whitespace to single spaces and trim the ends.
pub fn normalize_ws(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for ch in text.chars() {
        if ch.is_whitespace() {
            pending_space = !out.is_empty();
        } else {
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            out.push(ch);
        }
    }
    out
}

/// Lowercased, whitespace-collapsed form used for label comparison.
pub fn normalize_label(text: &str) -> String {
    normalize_ws(&text.to_lowercase())
}

/// FNV-1a 64-bit hash. Used for deterministic derived identifiers, not for
/// anything adversarial.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    hash
}

/// `12345` -> `"12,345"`.
pub fn group_thousands(n: u64) -> String {
    let digits = n.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_collapses_and_trims() {
        assert_eq!(
            normalize_ws("  mix \t the\n ingredients  "),
            "mix the ingredients"
        );
        assert_eq!(normalize_ws(""), "");
        assert_eq!(normalize_ws(" \t\n"), "");
    }

    #[test]
    fn normalize_label_lowercases() {
        assert_eq!(normalize_label("Make  a PANCAKE"), "make a pancake");
    }

    #[test]
    fn thousands_grouping() {
        assert_eq!(group_thousands(0), "0");
        assert_eq!(group_thousands(999), "999");
        assert_eq!(group_thousands(45_999), "45,999");
        assert_eq!(group_thousands(1_871_468), "1,871,468");
    }

    #[test]
    fn fnv_known_vector() {
        // Published FNV-1a test vector.
        assert_eq!(fnv1a64(b""), 0xCBF2_9CE4_8422_2325);
        assert_eq!(fnv1a64(b"a"), 0xAF63_DC4C_8601_EC8C);
    }
}
