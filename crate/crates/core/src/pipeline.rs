//! The full document filter: scan, normalize, sanitize, emit.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::emitter;
use crate::model::{CodeBlock, FilterConfig, RenderedCell, RenderedOutput};
use crate::normalizer::normalize;
use crate::sanitizer::sanitize;
use crate::scanner::{has_candidate, BlockScanner};

/// A configured filter with its block pattern compiled once.
#[derive(Debug, Clone)]
pub struct Filter {
    config: FilterConfig,
    scanner: BlockScanner,
}

impl Filter {
    pub fn new(config: FilterConfig) -> Self {
        let scanner = BlockScanner::new(&config);
        Self { config, scanner }
    }

    pub fn config(&self) -> &FilterConfig {
        &self.config
    }

    /// Extracted blocks with `normalized` and `sanitized` filled in. Empty
    /// when the fast path rejects the document.
    pub fn prepare_blocks(&self, content: &[u8]) -> Vec<CodeBlock> {
        if !has_candidate(content, &self.config) {
            return Vec::new();
        }
        let mut blocks = self.scanner.extract(content);
        for block in &mut blocks {
            // Decoding can surface `<`, so sanitizing must come second.
            let normalized = normalize(&block.raw);
            block.sanitized = Some(sanitize(&normalized));
            block.normalized = Some(normalized);
        }
        blocks
    }

    pub fn filter(&self, content: &[u8]) -> RenderedOutput {
        let blocks = self.prepare_blocks(content);
        if blocks.is_empty() {
            return RenderedOutput {
                html: content.to_vec(),
                cells: Vec::new(),
            };
        }

        let mut html = Vec::with_capacity(content.len() + 256 * (blocks.len() + 1));
        let mut cells = Vec::with_capacity(blocks.len());
        let mut cursor = 0;
        for (i, block) in blocks.into_iter().enumerate() {
            let index = i + 1;
            html.extend_from_slice(&content[cursor..block.span_start]);
            if index == 1 {
                html.extend_from_slice(emitter::render_header(&self.config).as_bytes());
            }
            let code = block.sanitized.expect("prepare_blocks fills sanitized");
            let fragment = emitter::render_cell(&code, index, &self.config)
                .expect("sanitized code with a positive index always renders");
            html.extend_from_slice(&fragment);
            cells.push(RenderedCell {
                id: emitter::cell_id(index, &self.config),
                code,
            });
            cursor = block.span_end;
        }
        html.extend_from_slice(&content[cursor..]);
        RenderedOutput { html, cells }
    }

    /// Filters many documents, in parallel when the `parallel` feature is on.
    pub fn filter_batch<D: AsRef<[u8]> + Sync>(&self, documents: &[D]) -> Vec<RenderedOutput> {
        #[cfg(feature = "parallel")]
        {
            documents
                .par_iter()
                .map(|d| self.filter(d.as_ref()))
                .collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            self.filter_batch_sequential(documents)
        }
    }

    pub fn filter_batch_sequential<D: AsRef<[u8]>>(&self, documents: &[D]) -> Vec<RenderedOutput> {
        documents.iter().map(|d| self.filter(d.as_ref())).collect()
    }
}

impl Default for Filter {
    fn default() -> Self {
        Self::new(FilterConfig::default())
    }
}

pub fn filter_document(content: &[u8], config: &FilterConfig) -> RenderedOutput {
    Filter::new(config.clone()).filter(content)
}
