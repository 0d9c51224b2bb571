//! Shared data types: documents, filter configuration, extracted blocks,
//! rendered output, service replies and the plugin manifest.

use std::fmt;
use std::ops::Range;

use chrono::NaiveDate;
use thiserror::Error;

pub const DEFAULT_TAG: &str = "sage";
pub const DEFAULT_SERVER_URL: &str = "https://sagecell.sagemath.org";
pub const DEFAULT_CELL_CLASS: &str = "compute";
pub const DEFAULT_ID_PREFIX: &str = "sagecell";
pub const DEFAULT_HIDE_ITEMS: [&str; 2] = ["editor", "evalButton"];

/// Input text for the filter. Bytes are kept as given; stray non-UTF-8 bytes
/// are carried through untouched.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Document {
    content: Vec<u8>,
}

impl Document {
    pub fn new(content: impl Into<Vec<u8>>) -> Self {
        Self {
            content: content.into(),
        }
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.content
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.content
    }

    pub fn len(&self) -> usize {
        self.content.len()
    }

    pub fn is_empty(&self) -> bool {
        self.content.is_empty()
    }
}

impl From<&str> for Document {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

impl From<String> for Document {
    fn from(s: String) -> Self {
        Self::new(s)
    }
}

impl From<Vec<u8>> for Document {
    fn from(v: Vec<u8>) -> Self {
        Self::new(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid configuration field `{field}`: {reason}")]
pub struct ConfigError {
    pub field: &'static str,
    pub reason: String,
}

impl ConfigError {
    fn new(field: &'static str, reason: impl Into<String>) -> Self {
        Self {
            field,
            reason: reason.into(),
        }
    }
}

/// Filter settings. Construct through [`make_config`] or
/// [`FilterConfig::default`]; fields are validated on construction and
/// read-only afterwards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterConfig {
    tag_name: String,
    server_url: String,
    cell_class: String,
    hide_items: Vec<String>,
    autoeval: bool,
    id_prefix: String,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            tag_name: DEFAULT_TAG.to_owned(),
            server_url: DEFAULT_SERVER_URL.to_owned(),
            cell_class: DEFAULT_CELL_CLASS.to_owned(),
            hide_items: DEFAULT_HIDE_ITEMS.iter().map(|s| s.to_string()).collect(),
            autoeval: true,
            id_prefix: DEFAULT_ID_PREFIX.to_owned(),
        }
    }
}

impl FilterConfig {
    pub fn tag_name(&self) -> &str {
        &self.tag_name
    }

    pub fn server_url(&self) -> &str {
        &self.server_url
    }

    pub fn cell_class(&self) -> &str {
        &self.cell_class
    }

    pub fn hide_items(&self) -> &[String] {
        &self.hide_items
    }

    pub fn autoeval(&self) -> bool {
        self.autoeval
    }

    pub fn id_prefix(&self) -> &str {
        &self.id_prefix
    }

    /// The literal open tag, e.g. `[sage]`.
    pub fn open_tag(&self) -> String {
        format!("[{}]", self.tag_name)
    }

    /// The literal close tag, e.g. `[/sage]`.
    pub fn close_tag(&self) -> String {
        format!("[/{}]", self.tag_name)
    }
}

/// Partial configuration; `None` keeps the default.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigOverrides {
    pub tag_name: Option<String>,
    pub server_url: Option<String>,
    pub cell_class: Option<String>,
    pub hide_items: Option<Vec<String>>,
    pub autoeval: Option<bool>,
    pub id_prefix: Option<String>,
}

/// Applies `overrides` on top of the defaults, validating every overridden
/// field.
pub fn make_config(overrides: ConfigOverrides) -> Result<FilterConfig, ConfigError> {
    let mut config = FilterConfig::default();
    if let Some(tag) = overrides.tag_name {
        validate_tag_name(&tag)?;
        config.tag_name = tag;
    }
    if let Some(url) = overrides.server_url {
        config.server_url = normalize_server_url(&url)?;
    }
    if let Some(class) = overrides.cell_class {
        validate_token("cell_class", &class)?;
        config.cell_class = class;
    }
    if let Some(items) = overrides.hide_items {
        for item in &items {
            validate_token("hide_items", item)?;
        }
        config.hide_items = items;
    }
    if let Some(autoeval) = overrides.autoeval {
        config.autoeval = autoeval;
    }
    if let Some(prefix) = overrides.id_prefix {
        validate_token("id_prefix", &prefix)?;
        config.id_prefix = prefix;
    }
    Ok(config)
}

fn validate_tag_name(tag: &str) -> Result<(), ConfigError> {
    if tag.is_empty() {
        return Err(ConfigError::new("tag_name", "must not be empty"));
    }
    if let Some(c) = tag
        .chars()
        .find(|c| matches!(c, '[' | ']' | '/') || c.is_whitespace())
    {
        return Err(ConfigError::new(
            "tag_name",
            format!("forbidden character {c:?} in {tag:?}"),
        ));
    }
    if !tag
        .chars()
        .all(|c| c.is_ascii_graphic() && !c.is_ascii_uppercase())
    {
        return Err(ConfigError::new(
            "tag_name",
            format!("{tag:?} is not a lowercase ASCII token"),
        ));
    }
    Ok(())
}

// Values that end up inside HTML attributes or JSON strings of the emitted
// fragment are restricted to [A-Za-z0-9_-].
fn validate_token(field: &'static str, value: &str) -> Result<(), ConfigError> {
    if value.is_empty() {
        return Err(ConfigError::new(field, "must not be empty"));
    }
    if let Some(c) = value
        .chars()
        .find(|c| !(c.is_ascii_alphanumeric() || *c == '_' || *c == '-'))
    {
        return Err(ConfigError::new(
            field,
            format!("forbidden character {c:?} in {value:?}"),
        ));
    }
    Ok(())
}

fn normalize_server_url(raw: &str) -> Result<String, ConfigError> {
    let trimmed = raw.trim_end_matches('/');
    let parsed = url::Url::parse(trimmed)
        .map_err(|e| ConfigError::new("server_url", format!("{raw:?}: {e}")))?;
    if !matches!(parsed.scheme(), "http" | "https") || !parsed.has_host() {
        return Err(ConfigError::new(
            "server_url",
            format!("{raw:?} is not an absolute http(s) URL"),
        ));
    }
    if let Some(c) = trimmed
        .chars()
        .find(|c| c.is_whitespace() || c.is_control() || matches!(c, '"' | '\'' | '<' | '>' | '\\'))
    {
        return Err(ConfigError::new(
            "server_url",
            format!("forbidden character {c:?} in {raw:?}"),
        ));
    }
    Ok(trimmed.to_owned())
}

/// One `[tag]...[/tag]` block found in a document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeBlock {
    /// Byte offset of the open tag.
    pub span_start: usize,
    /// Byte offset just past the close tag.
    pub span_end: usize,
    /// Bytes strictly between the open and close tags.
    pub raw: Vec<u8>,
    pub normalized: Option<Vec<u8>>,
    pub sanitized: Option<Vec<u8>>,
}

impl CodeBlock {
    pub fn new(span_start: usize, span_end: usize, raw: impl Into<Vec<u8>>) -> Self {
        debug_assert!(span_start < span_end);
        Self {
            span_start,
            span_end,
            raw: raw.into(),
            normalized: None,
            sanitized: None,
        }
    }

    pub fn span(&self) -> Range<usize> {
        self.span_start..self.span_end
    }
}

/// An emitted cell: its element id and the code it carries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedCell {
    pub id: String,
    pub code: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RenderedOutput {
    pub html: Vec<u8>,
    pub cells: Vec<RenderedCell>,
}

impl RenderedOutput {
    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }
}

/// Reply of a compute-service execution request.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExecutionResult {
    pub success: bool,
    pub stdout: String,
    pub raw_response: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Maturity {
    Alpha,
    Beta,
    Rc,
    #[default]
    Stable,
}

impl Maturity {
    pub fn token(self) -> &'static str {
        match self {
            Maturity::Alpha => "MATURITY_ALPHA",
            Maturity::Beta => "MATURITY_BETA",
            Maturity::Rc => "MATURITY_RC",
            Maturity::Stable => "MATURITY_STABLE",
        }
    }
}

impl fmt::Display for Maturity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl std::str::FromStr for Maturity {
    type Err = ManifestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.to_ascii_uppercase();
        match upper.strip_prefix("MATURITY_").unwrap_or(&upper) {
            "ALPHA" => Ok(Maturity::Alpha),
            "BETA" => Ok(Maturity::Beta),
            "RC" => Ok(Maturity::Rc),
            "STABLE" => Ok(Maturity::Stable),
            _ => Err(ManifestError::Maturity(s.to_owned())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ManifestError {
    #[error("plugin version {0} is not a 10-digit YYYYMMDDSS number")]
    VersionFormat(u64),
    #[error("plugin version {0} does not start with a valid calendar date")]
    VersionDate(u64),
    #[error("unknown maturity {0:?}")]
    Maturity(String),
}

/// Plugin version of the form `YYYYMMDDSS`: release date plus a two-digit
/// sequence number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PluginVersion(u64);

impl PluginVersion {
    pub fn new(value: u64) -> Result<Self, ManifestError> {
        if !(1_000_000_000..=9_999_999_999).contains(&value) {
            return Err(ManifestError::VersionFormat(value));
        }
        let date = value / 100;
        let (year, month, day) = (date / 10_000, (date / 100) % 100, date % 100);
        if NaiveDate::from_ymd_opt(year as i32, month as u32, day as u32).is_none() {
            return Err(ManifestError::VersionDate(value));
        }
        Ok(Self(value))
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

impl fmt::Display for PluginVersion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub const PLUGIN_COMPONENT: &str = "filter_sagecell";
pub const PLUGIN_DISPLAY_NAME: &str = "SageCell";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PluginManifest {
    pub version: PluginVersion,
    pub maturity: Maturity,
    /// Minimum host platform version; no default exists.
    pub requires: u64,
}

impl PluginManifest {
    pub fn new(version: PluginVersion, requires: u64) -> Self {
        Self {
            version,
            maturity: Maturity::default(),
            requires,
        }
    }

    pub fn with_maturity(mut self, maturity: Maturity) -> Self {
        self.maturity = maturity;
        self
    }

    pub fn component(&self) -> &'static str {
        PLUGIN_COMPONENT
    }

    pub fn display_name(&self) -> &'static str {
        PLUGIN_DISPLAY_NAME
    }
}
