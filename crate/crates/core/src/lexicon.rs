//! Word-level inputs: UniMorph tables, frequency lists, exclusion lists and
//! verb frame annotations.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;

use indexmap::IndexMap;
use thiserror::Error;

use crate::featkit::{FeatureInventory, Tag};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexiconError {
    #[error("{path}:{line}: expected {expected} tab-separated columns, found {found}")]
    MalformedRow {
        path: String,
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("{0}: file has no rows")]
    EmptyFile(String),
    #[error("{path}:{line}: unknown case `{case}`")]
    UnknownCase { path: String, line: usize, case: String },
    #[error("{path}:{line}: lemma `{lemma}` has no frames")]
    EmptyFrameList { path: String, line: usize, lemma: String },
    #[error("{path}:{line}: {message}")]
    InvalidFrame { path: String, line: usize, message: String },
    #[error("requested {requested} lexemes but only {available} are eligible")]
    InsufficientLexemes { requested: usize, available: usize },
    #[error("lexeme count must be at least 1")]
    ZeroLexemes,
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

fn read(path: &Path) -> Result<String, LexiconError> {
    std::fs::read_to_string(path).map_err(|e| LexiconError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Normalizes a word-level tag: components uppercased, trimmed and sorted, so
/// `V;PST;3;SG` and `3;SG;V;PST` name the same cell.
pub fn normalize_word_tag(tag: &str) -> String {
    let mut parts: Vec<String> = tag
        .split(';')
        .map(|p| p.trim().to_uppercase())
        .filter(|p| !p.is_empty())
        .collect();
    parts.sort();
    parts.join(";")
}

/// One UniMorph triplet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordEntry {
    pub lemma: String,
    pub form: String,
    pub features: String,
}

/// The word-level paradigm of one lemma: one form per tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordInflectionTable {
    pub lemma: String,
    entries: IndexMap<String, String>,
}

impl WordInflectionTable {
    pub fn new(lemma: impl Into<String>) -> Self {
        WordInflectionTable {
            lemma: lemma.into(),
            entries: IndexMap::new(),
        }
    }

    /// Inserts a cell unless the tag is already filled; returns whether it was new.
    pub fn insert(&mut self, tag: &str, form: impl Into<String>) -> bool {
        let key = normalize_word_tag(tag);
        if self.entries.contains_key(&key) {
            return false;
        }
        self.entries.insert(key, form.into());
        true
    }

    pub fn get(&self, tag: &str) -> Option<&str> {
        self.entries.get(&normalize_word_tag(tag)).map(String::as_str)
    }

    /// Lookup with an already normalized tag.
    pub fn get_normalized(&self, tag: &str) -> Option<&str> {
        self.entries.get(tag).map(String::as_str)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Result of reading a UniMorph file.
#[derive(Debug, Clone)]
pub struct UnimorphData {
    /// Tables in order of first appearance of each lemma.
    pub tables: Vec<WordInflectionTable>,
    /// Rows dropped because their (lemma, tag) cell was already filled.
    pub duplicate_rows: usize,
}

impl UnimorphData {
    pub fn by_lemma(&self) -> HashMap<&str, &WordInflectionTable> {
        self.tables.iter().map(|t| (t.lemma.as_str(), t)).collect()
    }

    pub fn get(&self, lemma: &str) -> Option<&WordInflectionTable> {
        self.tables.iter().find(|t| t.lemma == lemma)
    }
}

pub fn load_unimorph(path: impl AsRef<Path>) -> Result<UnimorphData, LexiconError> {
    let path = path.as_ref();
    parse_unimorph(&read(path)?, &path.display().to_string())
}

/// Parses `lemma TAB form TAB tags` rows. Blank lines are skipped.
pub fn parse_unimorph(text: &str, origin: &str) -> Result<UnimorphData, LexiconError> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut tables: Vec<WordInflectionTable> = Vec::new();
    let mut duplicate_rows = 0;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 || cols.iter().any(|c| c.trim().is_empty()) {
            return Err(LexiconError::MalformedRow {
                path: origin.to_owned(),
                line: i + 1,
                expected: 3,
                found: cols.iter().filter(|c| !c.trim().is_empty()).count(),
            });
        }
        let (lemma, form, tag) = (cols[0].trim(), cols[1].trim(), cols[2].trim());
        let idx = *index.entry(lemma.to_owned()).or_insert_with(|| {
            tables.push(WordInflectionTable::new(lemma));
            tables.len() - 1
        });
        if !tables[idx].insert(tag, form) {
            duplicate_rows += 1;
        }
    }
    if tables.is_empty() {
        return Err(LexiconError::EmptyFile(origin.to_owned()));
    }
    if duplicate_rows > 0 {
        log::warn!("{origin}: {duplicate_rows} duplicate (lemma, tag) rows kept first occurrence");
    }
    Ok(UnimorphData {
        tables,
        duplicate_rows,
    })
}

/// One token per line; rank is the line order.
pub fn load_word_list(path: impl AsRef<Path>) -> Result<Vec<String>, LexiconError> {
    let path = path.as_ref();
    Ok(parse_word_list(&read(path)?))
}

pub fn parse_word_list(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_owned)
        .collect()
}

/// Picks the `n` best-ranked lemmas that have a word table and are not excluded.
pub fn sample_lexemes(
    tables: &[WordInflectionTable],
    freq: &[String],
    n: usize,
    exclude: &HashSet<String>,
) -> Result<Vec<String>, LexiconError> {
    if n == 0 {
        return Err(LexiconError::ZeroLexemes);
    }
    let known: HashSet<&str> = tables.iter().map(|t| t.lemma.as_str()).collect();
    let mut seen = HashSet::new();
    let picked: Vec<String> = freq
        .iter()
        .filter(|w| known.contains(w.as_str()) && !exclude.contains(*w))
        .filter(|w| seen.insert(w.as_str()))
        .take(n)
        .cloned()
        .collect();
    if picked.len() < n {
        return Err(LexiconError::InsufficientLexemes {
            requested: n,
            available: picked.len(),
        });
    }
    Ok(picked)
}

/// The case-labelled obligatory arguments of one verb use, in canonical case order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Frame {
    cases: Vec<Tag>,
}

impl Frame {
    /// Builds a frame, rejecting duplicates and labels that are not cases.
    pub fn new(cases: impl IntoIterator<Item = Tag>, inv: &FeatureInventory) -> Result<Frame, String> {
        let mut out: Vec<Tag> = Vec::new();
        for c in cases {
            if !inv.is_case(c) {
                return Err(format!("unknown case `{c}`"));
            }
            if out.contains(&c) {
                return Err(format!("case {c} repeated in frame"));
            }
            out.push(c);
        }
        inv.sort_by_rank(&mut out);
        Ok(Frame { cases: out })
    }

    /// Parses `NOM,ACC,ABL`; `-` or an empty string is the zero-argument frame.
    pub fn parse(text: &str, inv: &FeatureInventory) -> Result<Frame, String> {
        let text = text.trim();
        if text.is_empty() || text == "-" {
            return Ok(Frame::default());
        }
        let mut tags = Vec::new();
        for name in text.split(',') {
            let name = name.trim();
            match inv.classify(name) {
                Some((crate::featkit::Attribute::Case, tag)) => tags.push(tag),
                _ => return Err(format!("unknown case `{}`", name.to_uppercase())),
            }
        }
        Frame::new(tags, inv)
    }

    pub fn cases(&self) -> &[Tag] {
        &self.cases
    }

    pub fn contains(&self, case: Tag) -> bool {
        self.cases.contains(&case)
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.cases.is_empty() {
            return f.write_str("-");
        }
        let names: Vec<&str> = self.cases.iter().map(|c| c.as_str()).collect();
        f.write_str(&names.join(","))
    }
}

/// All frames annotated for one lemma.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameAnnotation {
    pub lemma: String,
    pub frames: Vec<Frame>,
}

impl FrameAnnotation {
    /// Checks the non-empty and pairwise-distinct invariants.
    pub fn new(lemma: impl Into<String>, frames: Vec<Frame>) -> Result<FrameAnnotation, String> {
        let lemma = lemma.into();
        if frames.is_empty() {
            return Err(format!("lemma `{lemma}` has no frames"));
        }
        for (i, f) in frames.iter().enumerate() {
            if frames[..i].contains(f) {
                return Err(format!("frame {f} listed twice for `{lemma}`"));
            }
        }
        Ok(FrameAnnotation { lemma, frames })
    }

    /// The TSV row: `lemma TAB frame TAB frame ...`.
    pub fn to_row(&self) -> String {
        let mut row = self.lemma.clone();
        for f in &self.frames {
            row.push('\t');
            row.push_str(&f.to_string());
        }
        row
    }
}

pub fn load_frames(path: impl AsRef<Path>, inv: &FeatureInventory) -> Result<Vec<FrameAnnotation>, LexiconError> {
    let path = path.as_ref();
    parse_frames(&read(path)?, &path.display().to_string(), inv)
}

pub fn parse_frames(text: &str, origin: &str, inv: &FeatureInventory) -> Result<Vec<FrameAnnotation>, LexiconError> {
    let mut out: Vec<FrameAnnotation> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split('\t');
        let lemma = cols.next().unwrap_or("").trim();
        if lemma.is_empty() {
            return Err(LexiconError::MalformedRow {
                path: origin.to_owned(),
                line: line_no,
                expected: 2,
                found: 0,
            });
        }
        let mut frames = Vec::new();
        for col in cols {
            let frame = Frame::parse(col, inv).map_err(|message| {
                if let Some(case) = message.strip_prefix("unknown case `").and_then(|m| m.strip_suffix('`')) {
                    LexiconError::UnknownCase {
                        path: origin.to_owned(),
                        line: line_no,
                        case: case.to_owned(),
                    }
                } else {
                    LexiconError::InvalidFrame {
                        path: origin.to_owned(),
                        line: line_no,
                        message,
                    }
                }
            })?;
            frames.push(frame);
        }
        if frames.is_empty() {
            return Err(LexiconError::EmptyFrameList {
                path: origin.to_owned(),
                line: line_no,
                lemma: lemma.to_owned(),
            });
        }
        if out.iter().any(|a| a.lemma == lemma) {
            return Err(LexiconError::InvalidFrame {
                path: origin.to_owned(),
                line: line_no,
                message: format!("lemma `{lemma}` annotated twice"),
            });
        }
        let ann = FrameAnnotation::new(lemma, frames).map_err(|message| LexiconError::InvalidFrame {
            path: origin.to_owned(),
            line: line_no,
            message,
        })?;
        out.push(ann);
    }
    Ok(out)
}

/// Serializes annotations in the frames TSV format, one row per lemma.
pub fn write_frames(annotations: &[FrameAnnotation]) -> String {
    let mut out = String::new();
    for a in annotations {
        out.push_str(&a.to_row());
        out.push('\n');
    }
    out
}
