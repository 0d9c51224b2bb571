//! Strips rich-text editor markup from captured code.
//!
//! Editors wrap typed lines in `<p>`/`<div>` elements, insert `<br>` for soft
//! breaks, substitute non-breaking spaces and entity-encode markup characters.
//! [`normalize`] maps that back to newline-separated plain code:
//!
//! 1. `<p ...>`, `</p>`, `<div ...>`, `</div>` and every `<br>` form become `\n`;
//! 2. U+00A0 (`C2 A0`) and `&nbsp;` become a plain space;
//! 3. `&lt;` `&gt;` `&quot;` `&#39;` are decoded, then `&amp;`;
//! 4. leading and trailing whitespace of the whole result is trimmed.
//!
//! Steps 1 and 2 are repeated until neither changes anything, so inputs like
//! `<p<p>>` or `<p&nbsp;>` cannot leave a tag behind. Other tags pass through.

use std::borrow::Cow;
use std::sync::LazyLock;

use regex::bytes::{NoExpand, Regex};

static BREAK_TAGS: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i-u)<(?:p|div|br)(?:[\s/][^>]*)?>|</(?:p|div)\s*>")
        .expect("valid break-tag pattern")
});

static NBSP: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?-u)\xC2\xA0|&nbsp;").expect("valid nbsp pattern"));

static MARKUP_ENTITIES: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"&(?:lt|gt|quot|#39);").expect("valid entity pattern"));

pub fn normalize(raw: &[u8]) -> Vec<u8> {
    let mut text = raw.to_vec();
    loop {
        let after_tags = BREAK_TAGS.replace_all(&text, NoExpand(b"\n"));
        let after_nbsp = NBSP.replace_all(&after_tags, NoExpand(b" "));
        if matches!(
            (&after_tags, &after_nbsp),
            (Cow::Borrowed(_), Cow::Borrowed(_))
        ) {
            break;
        }
        text = after_nbsp.into_owned();
    }
    let text = decode_entities(&text);
    text.trim_ascii().to_vec()
}

fn decode_entities(text: &[u8]) -> Vec<u8> {
    let decoded =
        MARKUP_ENTITIES.replace_all(text, |caps: &regex::bytes::Captures| match &caps[0] {
            b"&lt;" => b"<".as_slice(),
            b"&gt;" => b">",
            b"&quot;" => b"\"",
            _ => b"'",
        });
    replace_all(&decoded, b"&amp;", b"&")
}

fn replace_all(text: &[u8], from: &[u8], to: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(text.len());
    let mut rest = text;
    while let Some(pos) = memchr::memmem::find(rest, from) {
        out.extend_from_slice(&rest[..pos]);
        out.extend_from_slice(to);
        rest = &rest[pos + from.len()..];
    }
    out.extend_from_slice(rest);
    out
}

/// True if `text` still holds a tag form that [`normalize`] rewrites.
pub fn contains_break_tag(text: &[u8]) -> bool {
    BREAK_TAGS.is_match(text)
}
