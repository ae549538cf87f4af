//! Surface normalization shared by prefix matching and answer comparison.

/// Lowercases, strips punctuation and collapses whitespace.
///
/// A period between two digits is kept so that decimal answers such as
/// `"3.5"` survive; every other punctuation character is dropped.
pub fn normalize(text: &str) -> String {
    let chars: Vec<char> = text.trim().chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for (i, &c) in chars.iter().enumerate() {
        if c.is_whitespace() {
            pending_space = !out.is_empty();
            continue;
        }
        let keep = if c.is_alphanumeric() {
            true
        } else if c == '.' {
            let prev_digit = i > 0 && chars[i - 1].is_ascii_digit();
            let next_digit = chars.get(i + 1).is_some_and(|n| n.is_ascii_digit());
            prev_digit && next_digit
        } else {
            false
        };
        if !keep {
            continue;
        }
        if pending_space {
            out.push(' ');
            pending_space = false;
        }
        for lc in c.to_lowercase() {
            out.push(lc);
        }
    }
    out
}

/// Normalized whitespace tokens of `text`.
pub fn tokenize(text: &str) -> Vec<String> {
    normalize(text)
        .split(' ')
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

/// True for strings such as `"2"`, `"10"` or `"3.5"`.
pub fn is_numeric(answer: &str) -> bool {
    let mut seen_digit = false;
    let mut seen_dot = false;
    for c in answer.chars() {
        match c {
            '0'..='9' => seen_digit = true,
            '.' if !seen_dot && seen_digit => seen_dot = true,
            _ => return false,
        }
    }
    seen_digit && !answer.ends_with('.')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_case_punctuation_and_spaces() {
        assert_eq!(normalize("  Is there a   Dog? "), "is there a dog");
        assert_eq!(normalize("T-shirt!"), "tshirt");
        assert_eq!(normalize("3.5"), "3.5");
        assert_eq!(normalize("end."), "end");
        assert_eq!(normalize("?!"), "");
    }

    #[test]
    fn punctuation_between_words_does_not_glue_spaces() {
        assert_eq!(normalize("yes , it is"), "yes it is");
        assert_eq!(tokenize("What's  this?"), vec!["whats", "this"]);
    }

    #[test]
    fn numeric_detection() {
        assert!(is_numeric("2"));
        assert!(is_numeric("120"));
        assert!(is_numeric("3.5"));
        assert!(!is_numeric("two"));
        assert!(!is_numeric(""));
        assert!(!is_numeric("3."));
        assert!(!is_numeric(".5"));
    }
}
