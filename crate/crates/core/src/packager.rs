//! Plugin skeleton generation, validation and archive re-rooting.
//!
//! A text filter plugin is installed from a directory named after the filter
//! (`sagecell`). Archives downloaded from a source forge are rooted at
//! `<repo>-<branch>/` instead and have to be re-rooted before installation.

use std::fmt;
use std::fs;
use std::io::{self, Cursor};
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use thiserror::Error;
use zip::{ZipArchive, ZipWriter};

use crate::model::{PluginManifest, PluginVersion, PLUGIN_COMPONENT};

pub const DEFAULT_ROOT: &str = "sagecell";
pub const VERSION_FILE: &str = "version.php";
pub const SETTINGS_FILE: &str = "settings.php";
pub const LANG_FILE: &str = "lang/en/filter_sagecell.php";
pub const FILTER_FILE: &str = "filter.php";

#[derive(Debug, Error)]
pub enum PackageError {
    #[error("archive must have exactly one top-level directory, found {roots:?}")]
    Structure { roots: Vec<String> },
    #[error("cannot read archive: {0}")]
    Decode(String),
    #[error("cannot write archive: {0}")]
    Encode(String),
    #[error("invalid relative path {0:?}")]
    InvalidPath(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A relative, `/`-separated path with no empty, `.` or `..` segments.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RelPath(String);

impl RelPath {
    pub fn new(path: impl Into<String>) -> Result<Self, PackageError> {
        let path = path.into();
        let valid = !path.is_empty()
            && !path.starts_with('/')
            && !path.contains('\\')
            && path
                .split('/')
                .all(|seg| !seg.is_empty() && seg != "." && seg != "..");
        if valid {
            Ok(Self(path))
        } else {
            Err(PackageError::InvalidPath(path))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for RelPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Ordered set of plugin files.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FileSet {
    files: Vec<(RelPath, Vec<u8>)>,
}

impl FileSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds or replaces a file, keeping the original position on replace.
    pub fn insert(&mut self, path: RelPath, content: impl Into<Vec<u8>>) {
        let content = content.into();
        match self.files.iter_mut().find(|(p, _)| *p == path) {
            Some(slot) => slot.1 = content,
            None => self.files.push((path, content)),
        }
    }

    pub fn get(&self, path: &str) -> Option<&[u8]> {
        self.files
            .iter()
            .find(|(p, _)| p.as_str() == path)
            .map(|(_, c)| c.as_slice())
    }

    pub fn remove(&mut self, path: &str) -> Option<Vec<u8>> {
        let pos = self.files.iter().position(|(p, _)| p.as_str() == path)?;
        Some(self.files.remove(pos).1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&RelPath, &[u8])> {
        self.files.iter().map(|(p, c)| (p, c.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    /// Reads every regular file below `dir`, sorted by path.
    pub fn from_dir(dir: &Path) -> Result<Self, PackageError> {
        let mut found = Vec::new();
        collect_files(dir, String::new(), &mut found)?;
        found.sort();
        let mut set = Self::new();
        for rel in found {
            let content = fs::read(dir.join(&rel))?;
            set.insert(RelPath::new(rel)?, content);
        }
        Ok(set)
    }

    /// Writes every file below `dir`, creating parent directories.
    pub fn write_to_dir(&self, dir: &Path) -> Result<(), PackageError> {
        for (path, content) in self.iter() {
            let target = dir.join(path.as_str());
            if let Some(parent) = target.parent() {
                fs::create_dir_all(parent)?;
            }
            fs::write(target, content)?;
        }
        Ok(())
    }
}

fn collect_files(base: &Path, prefix: String, out: &mut Vec<String>) -> io::Result<()> {
    for entry in fs::read_dir(base.join(&prefix))? {
        let entry = entry?;
        let name = entry.file_name().to_string_lossy().into_owned();
        let rel = if prefix.is_empty() {
            name
        } else {
            format!("{prefix}/{name}")
        };
        let kind = entry.file_type()?;
        if kind.is_dir() {
            collect_files(base, rel, out)?;
        } else if kind.is_file() {
            out.push(rel);
        }
    }
    Ok(())
}

pub fn render_version_php(manifest: &PluginManifest) -> String {
    format!(
        "<?php\n\
         defined('MOODLE_INTERNAL') || die();\n\
         $plugin->version = {};\n\
         $plugin->requires = {};\n\
         $plugin->component = '{}';\n\
         $plugin->maturity = {};\n",
        manifest.version,
        manifest.requires,
        manifest.component(),
        manifest.maturity.token()
    )
}

pub fn render_settings_php() -> &'static str {
    "<?php\ndefined('MOODLE_INTERNAL') || die();\n"
}

pub fn render_lang_php(manifest: &PluginManifest) -> String {
    format!(
        "<?php\n$string['filtername'] = '{}';\n",
        manifest.display_name()
    )
}

/// `version.php`, `settings.php` and the English language file.
pub fn gen_manifest(manifest: &PluginManifest) -> FileSet {
    let mut files = FileSet::new();
    files.insert(RelPath(VERSION_FILE.into()), render_version_php(manifest));
    files.insert(RelPath(SETTINGS_FILE.into()), render_settings_php());
    files.insert(RelPath(LANG_FILE.into()), render_lang_php(manifest));
    files
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn record(&mut self, name: &'static str, result: Result<String, String>) {
        let (passed, detail) = match result {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        self.checks.push(Check {
            name,
            passed,
            detail,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let mark = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{mark}\t{}\t{}", c.name, c.detail)?;
        }
        Ok(())
    }
}

static VERSION_LINE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\$plugin->version\s*=\s*(\d+)\s*;").unwrap());
static COMPONENT_LINE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r#"\$plugin->component\s*=\s*['"]([A-Za-z0-9_]+)['"]\s*;"#).unwrap()
});
static FILTERNAME_LINE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r#"\$string\[\s*['"]filtername['"]\s*\]\s*=\s*['"]([^'"]+)['"]\s*;"#).unwrap()
});

/// Checks that `files` form an installable filter plugin. Findings go in the
/// report; this never fails.
pub fn validate_plugin(files: &FileSet) -> ValidationReport {
    let mut report = ValidationReport::default();

    let version_php = files.get(VERSION_FILE).map(String::from_utf8_lossy);
    report.record(
        "version-file",
        match &version_php {
            Some(_) => Ok(VERSION_FILE.into()),
            None => Err(format!("missing {VERSION_FILE}")),
        },
    );
    if let Some(text) = &version_php {
        report.record(
            "version-format",
            match VERSION_LINE.captures(text) {
                None => Err(format!("{VERSION_FILE}: no $plugin->version assignment")),
                Some(caps) => {
                    let digits = &caps[1];
                    if digits.len() != 10 {
                        Err(format!(
                            "{VERSION_FILE}: version {digits} is not 10 digits (YYYYMMDDSS)"
                        ))
                    } else {
                        digits
                            .parse()
                            .map_err(|e| format!("{VERSION_FILE}: {e}"))
                            .and_then(|v| {
                                PluginVersion::new(v).map_err(|e| format!("{VERSION_FILE}: {e}"))
                            })
                            .map(|v| format!("version {v}"))
                    }
                }
            },
        );
        report.record(
            "component",
            match COMPONENT_LINE.captures(text) {
                Some(caps) if &caps[1] == PLUGIN_COMPONENT => Ok(PLUGIN_COMPONENT.into()),
                Some(caps) => Err(format!(
                    "{VERSION_FILE}: component is {:?}, expected {PLUGIN_COMPONENT:?}",
                    &caps[1]
                )),
                None => Err(format!("{VERSION_FILE}: no $plugin->component assignment")),
            },
        );
    }

    report.record(
        "lang-filtername",
        match files.get(LANG_FILE).map(String::from_utf8_lossy) {
            None => Err(format!("missing {LANG_FILE}")),
            Some(text) => match FILTERNAME_LINE.captures(&text) {
                Some(caps) => Ok(format!("filtername = {:?}", &caps[1])),
                None => Err(format!("{LANG_FILE}: no 'filtername' string")),
            },
        },
    );

    report.record(
        "filter-entry",
        match files.get(FILTER_FILE) {
            Some(_) => Ok(FILTER_FILE.into()),
            None => Err(format!("missing {FILTER_FILE}")),
        },
    );

    report
}

/// Top-level names of the archive entries, in order of first appearance.
pub fn archive_roots(archive: &[u8]) -> Result<Vec<String>, PackageError> {
    let mut zip = open_archive(archive)?;
    let mut roots: Vec<String> = Vec::new();
    for i in 0..zip.len() {
        let entry = zip
            .by_index_raw(i)
            .map_err(|e| PackageError::Decode(e.to_string()))?;
        let root = match entry.name().split_once('/') {
            Some((root, _)) => root.to_owned(),
            // A file at the top level is a root of its own.
            None => format!("{} (file)", entry.name()),
        };
        if !roots.contains(&root) {
            roots.push(root);
        }
    }
    Ok(roots)
}

impl FileSet {
    /// Reads the files of a plugin archive with a single top-level
    /// directory; paths are relative to that directory, which is returned.
    pub fn from_zip(archive: &[u8]) -> Result<(String, Self), PackageError> {
        let roots = archive_roots(archive)?;
        let [root] = roots.as_slice() else {
            return Err(PackageError::Structure { roots });
        };
        if root.ends_with(" (file)") {
            return Err(PackageError::Structure { roots });
        }
        let prefix = format!("{root}/");
        let mut zip = open_archive(archive)?;
        let mut set = Self::new();
        for i in 0..zip.len() {
            let mut entry = zip
                .by_index(i)
                .map_err(|e| PackageError::Decode(e.to_string()))?;
            if entry.is_dir() {
                continue;
            }
            let rest = entry
                .name()
                .strip_prefix(&prefix)
                .unwrap_or_default()
                .to_owned();
            let mut content = Vec::with_capacity(entry.size() as usize);
            io::Read::read_to_end(&mut entry, &mut content)
                .map_err(|e| PackageError::Decode(e.to_string()))?;
            set.insert(RelPath::new(rest)?, content);
        }
        Ok((root.clone(), set))
    }
}

fn open_archive(archive: &[u8]) -> Result<ZipArchive<Cursor<&[u8]>>, PackageError> {
    ZipArchive::new(Cursor::new(archive)).map_err(|e| PackageError::Decode(e.to_string()))
}

/// Renames the single top-level directory of `archive` to `target_root`.
/// Entries are copied without recompression, so contents, order,
/// compression method and timestamps are unchanged.
pub fn repack_archive(archive: &[u8], target_root: &str) -> Result<Vec<u8>, PackageError> {
    if target_root.contains('/') {
        return Err(PackageError::InvalidPath(target_root.into()));
    }
    RelPath::new(target_root)?;

    let roots = archive_roots(archive)?;
    let [root] = roots.as_slice() else {
        return Err(PackageError::Structure { roots });
    };
    if root.ends_with(" (file)") {
        return Err(PackageError::Structure { roots });
    }
    let prefix = format!("{root}/");

    let mut zip = open_archive(archive)?;
    let mut writer = ZipWriter::new(Cursor::new(Vec::with_capacity(archive.len())));
    writer.set_raw_comment(zip.comment().into());
    for i in 0..zip.len() {
        let entry = zip
            .by_index_raw(i)
            .map_err(|e| PackageError::Decode(e.to_string()))?;
        let rest = entry
            .name()
            .strip_prefix(&prefix)
            .expect("every entry lives under the single root")
            .to_owned();
        writer
            .raw_copy_file_rename(entry, format!("{target_root}/{rest}"))
            .map_err(|e| PackageError::Encode(e.to_string()))?;
    }
    let out = writer
        .finish()
        .map_err(|e| PackageError::Encode(e.to_string()))?;
    Ok(out.into_inner())
}
