//! HTML emission for compute cells and the runtime includes.

use thiserror::Error;

use crate::model::FilterConfig;
use crate::sanitizer;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmitError {
    #[error("cell index must be at least 1")]
    ZeroIndex,
    #[error("cell {index}: code is not sanitized and would escape its script element")]
    UnsanitizedCode { index: usize },
}

/// The two script includes for jQuery and the embedded cell runtime.
pub fn render_header(config: &FilterConfig) -> String {
    let server = config.server_url();
    format!(
        "<script src=\"{server}/static/jquery.min.js\"></script>\n\
         <script src=\"{server}/static/embedded_sagecell.js\"></script>\n"
    )
}

/// Element id of the `index`-th cell, e.g. `sagecell-3`.
pub fn cell_id(index: usize, config: &FilterConfig) -> String {
    format!("{}-{index}", config.id_prefix())
}

/// Renders one cell: a `div` holding the code in a `text/x-sage` script,
/// followed by the init script that turns it into a live cell.
pub fn render_cell(
    sanitized_code: &[u8],
    index: usize,
    config: &FilterConfig,
) -> Result<Vec<u8>, EmitError> {
    if index == 0 {
        return Err(EmitError::ZeroIndex);
    }
    if !sanitizer::is_sanitized(sanitized_code) {
        return Err(EmitError::UnsanitizedCode { index });
    }
    let id = cell_id(index, config);
    let hide = config
        .hide_items()
        .iter()
        .map(|item| format!("\"{item}\""))
        .collect::<Vec<_>>()
        .join(", ");

    let mut out = Vec::with_capacity(sanitized_code.len() + 256);
    out.extend_from_slice(
        format!(
            "<div class=\"{}\" id=\"{id}\"><script type=\"text/x-sage\">",
            config.cell_class()
        )
        .as_bytes(),
    );
    out.extend_from_slice(sanitized_code);
    out.extend_from_slice(
        format!(
            "</script></div>\n<script>sagecell.makeSagecell({{\"inputLocation\": \"#{id}\", \
             \"hide\": [{hide}], \"autoeval\": {}}});</script>",
            config.autoeval()
        )
        .as_bytes(),
    );
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_config, ConfigOverrides};

    fn config(overrides: ConfigOverrides) -> FilterConfig {
        make_config(overrides).unwrap()
    }

    #[test]
    fn default_header() {
        assert_eq!(
            render_header(&FilterConfig::default()),
            "<script src=\"https://sagecell.sagemath.org/static/jquery.min.js\"></script>\n\
             <script src=\"https://sagecell.sagemath.org/static/embedded_sagecell.js\"></script>\n"
        );
    }

    #[test]
    fn header_follows_server() {
        let c = config(ConfigOverrides {
            server_url: Some("https://x.org/".into()),
            ..Default::default()
        });
        let header = render_header(&c);
        assert_eq!(header.matches("\"https://x.org/static/").count(), 2);
        assert_eq!(header, render_header(&c));
    }

    #[test]
    fn default_cell_is_bit_exact() {
        let cell = render_cell(b"1+1", 1, &FilterConfig::default()).unwrap();
        assert_eq!(
            String::from_utf8(cell).unwrap(),
            "<div class=\"compute\" id=\"sagecell-1\"><script type=\"text/x-sage\">1+1</script></div>\n\
             <script>sagecell.makeSagecell({\"inputLocation\": \"#sagecell-1\", \
             \"hide\": [\"editor\", \"evalButton\"], \"autoeval\": true});</script>"
        );
    }

    #[test]
    fn index_and_options_are_substituted() {
        let cell =
            String::from_utf8(render_cell(b"x", 7, &FilterConfig::default()).unwrap()).unwrap();
        assert!(cell.contains("\"inputLocation\": \"#sagecell-7\""));
        assert!(cell.contains("id=\"sagecell-7\""));

        let c = config(ConfigOverrides {
            autoeval: Some(false),
            hide_items: Some(vec![]),
            cell_class: Some("sage-cell".into()),
            id_prefix: Some("cell".into()),
            ..Default::default()
        });
        let cell = String::from_utf8(render_cell(b"x", 1, &c).unwrap()).unwrap();
        assert!(cell.contains("\"hide\": [], \"autoeval\": false}"));
        assert!(cell.starts_with("<div class=\"sage-cell\" id=\"cell-1\">"));
    }

    #[test]
    fn contract_violations() {
        let c = FilterConfig::default();
        assert_eq!(
            render_cell(b"</SCRIPT>", 2, &c),
            Err(EmitError::UnsanitizedCode { index: 2 })
        );
        assert_eq!(render_cell(b"x", 0, &c), Err(EmitError::ZeroIndex));
    }
}
