//! Fast rejection and `[tag]...[/tag]` block extraction.

use regex::bytes::Regex;

use crate::model::{CodeBlock, FilterConfig};

/// True iff `content` is non-empty and contains the literal, case-sensitive
/// open tag. Documents failing this check are returned unchanged.
///
/// The block pattern itself is case-insensitive, so `[SAGE]x[/SAGE]` alone
/// never reaches extraction. That mismatch is intentional.
pub fn has_candidate(content: &[u8], config: &FilterConfig) -> bool {
    if content.is_empty() {
        return false;
    }
    let needle = config.open_tag();
    contains(content, needle.as_bytes())
}

pub(crate) fn contains(haystack: &[u8], needle: &[u8]) -> bool {
    memchr::memmem::find(haystack, needle).is_some()
}

/// Compiled block pattern for one tag name.
#[derive(Debug, Clone)]
pub struct BlockScanner {
    pattern: Regex,
}

impl BlockScanner {
    pub fn new(config: &FilterConfig) -> Self {
        let tag = regex::escape(config.tag_name());
        // ASCII-only case folding; `.` matches any byte including newlines.
        let pattern = Regex::new(&format!(r"(?is-u)\[{tag}\](.*?)\[/{tag}\]"))
            .expect("escaped tag always yields a valid pattern");
        Self { pattern }
    }

    /// All non-overlapping blocks, left to right, with the shortest capture.
    pub fn extract(&self, content: &[u8]) -> Vec<CodeBlock> {
        self.pattern
            .captures_iter(content)
            .map(|caps| {
                let whole = caps.get(0).expect("group 0 always participates");
                let inner = caps.get(1).expect("group 1 always participates");
                CodeBlock::new(whole.start(), whole.end(), inner.as_bytes())
            })
            .collect()
    }
}

pub fn extract_blocks(content: &[u8], config: &FilterConfig) -> Vec<CodeBlock> {
    BlockScanner::new(config).extract(content)
}
