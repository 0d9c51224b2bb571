//! Makes code safe to embed verbatim inside a raw-text `<script>` element.
//!
//! Inside script data an HTML tokenizer only leaves the element on
//! `</script`, and `<!--` switches it into the escaped states where a nested
//! `<script` can swallow the real end tag. Both are broken with one inserted
//! space. Control bytes other than tab and newline are dropped first, so
//! `<\0/script` cannot reassemble into an end tag afterwards.

const SCRIPT_END: &[u8] = b"</script";
const COMMENT_OPEN: &[u8] = b"<!--";

pub fn sanitize(code: &[u8]) -> Vec<u8> {
    let stripped: Vec<u8> = code
        .iter()
        .copied()
        .filter(|&b| b >= 0x20 || b == b'\t' || b == b'\n')
        .collect();

    let mut out = Vec::with_capacity(stripped.len() + 8);
    let mut i = 0;
    while i < stripped.len() {
        let rest = &stripped[i..];
        if starts_with_ignore_case(rest, SCRIPT_END) {
            out.extend_from_slice(b"< ");
            out.extend_from_slice(&rest[1..SCRIPT_END.len()]);
            i += SCRIPT_END.len();
        } else if rest.starts_with(COMMENT_OPEN) {
            out.extend_from_slice(b"<! --");
            i += COMMENT_OPEN.len();
        } else {
            out.push(stripped[i]);
            i += 1;
        }
    }
    out
}

/// True if `code` satisfies every sanitizer postcondition.
pub fn is_sanitized(code: &[u8]) -> bool {
    !contains_script_end(code)
        && !code.windows(COMMENT_OPEN.len()).any(|w| w == COMMENT_OPEN)
        && code.iter().all(|&b| b >= 0x20 || b == b'\t' || b == b'\n')
}

pub fn contains_script_end(code: &[u8]) -> bool {
    code.windows(SCRIPT_END.len())
        .any(|w| w.eq_ignore_ascii_case(SCRIPT_END))
}

fn starts_with_ignore_case(haystack: &[u8], prefix: &[u8]) -> bool {
    haystack.len() >= prefix.len() && haystack[..prefix.len()].eq_ignore_ascii_case(prefix)
}
