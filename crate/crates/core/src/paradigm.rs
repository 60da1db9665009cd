//! Clause-level inflection tables: bundle enumeration, table building and the
//! lemma/form/features TSV format.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::ops::Range;
use std::path::Path;
use std::time::Instant;

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::featkit::{ArgSlot, FeatError, FeatureBundle, FeatureInventory};
use crate::grammar::realize::{assemble, check_frame};
use crate::grammar::{realize_tam, ClauseToken, GrammarSpec, RealizeError, ReflexivePolicy};
use crate::lexicon::{Frame, FrameAnnotation, UnimorphData, WordInflectionTable};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("{lemma}: {bundle}: {source}")]
    Realize {
        lemma: String,
        bundle: String,
        source: RealizeError,
    },
    #[error("{lemma}: no word table loaded")]
    MissingWordTable { lemma: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableIoError {
    #[error("{path}:{line}: expected 3 tab-separated columns")]
    MalformedRow { path: String, line: usize },
    #[error("{path}:{line}: {source}")]
    Feature { path: String, line: usize, source: FeatError },
    #[error("{path}:{line}: {message}")]
    Inconsistent { path: String, line: usize, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

/// The clause-level paradigm of one lexeme.
///
/// Cells are grouped by frame in annotation order; inside a frame they follow
/// the order of [`enumerate_bundles`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseInflectionTable {
    pub lemma: String,
    frames: Vec<Frame>,
    spans: Vec<Range<usize>>,
    cells: IndexMap<FeatureBundle, String>,
}

impl ClauseInflectionTable {
    pub fn new(lemma: impl Into<String>) -> Self {
        ClauseInflectionTable {
            lemma: lemma.into(),
            frames: Vec::new(),
            spans: Vec::new(),
            cells: IndexMap::new(),
        }
    }

    /// Appends the cells of one frame. Fails if the frame is already present,
    /// a bundle does not fit the frame, or a bundle repeats.
    pub fn push_frame(
        &mut self,
        frame: Frame,
        cells: impl IntoIterator<Item = (FeatureBundle, String)>,
    ) -> Result<(), String> {
        if self.frames.contains(&frame) {
            return Err(format!("frame {frame} added twice"));
        }
        let start = self.cells.len();
        for (bundle, form) in cells {
            if !bundle.cases().eq(frame.cases().iter().copied()) {
                return Err(format!("bundle {bundle} does not fit frame {frame}"));
            }
            if self.cells.insert(bundle.clone(), form).is_some() {
                return Err(format!("bundle {bundle} repeated"));
            }
        }
        self.spans.push(start..self.cells.len());
        self.frames.push(frame);
        Ok(())
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn get(&self, bundle: &FeatureBundle) -> Option<&str> {
        self.cells.get(bundle).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> impl Iterator<Item = (&FeatureBundle, &str)> {
        self.cells.iter().map(|(b, f)| (b, f.as_str()))
    }

    /// Cell by position in table order.
    pub fn cell(&self, index: usize) -> Option<(&FeatureBundle, &str)> {
        self.cells.get_index(index).map(|(b, f)| (b, f.as_str()))
    }

    /// Index range of the cells of frame `i`.
    pub fn frame_span(&self, i: usize) -> Range<usize> {
        self.spans[i].clone()
    }

    /// The span containing cell `index`.
    pub fn span_of(&self, index: usize) -> Range<usize> {
        self.spans
            .iter()
            .find(|s| s.contains(&index))
            .cloned()
            .unwrap_or(index..index + 1)
    }

    /// The cells of the `{NOM}` frame, if the lexeme has one.
    pub fn intransitive_size(&self, agreement: crate::featkit::Tag) -> Option<usize> {
        self.frames
            .iter()
            .position(|f| f.cases() == [agreement])
            .map(|i| self.spans[i].len())
    }
}

/// Every bundle of `frame`: TAM cells in grammar order, then the Cartesian
/// product of each case's enumerable values in frame order. Under coreference
/// an object with the subject's reference is replaced by its RFLX variant.
pub fn enumerate_bundles(spec: &GrammarSpec, frame: &Frame) -> Result<Vec<FeatureBundle>, RealizeError> {
    let mut per_case: Vec<&[ArgSlot]> = Vec::with_capacity(frame.len());
    for &case in frame.cases() {
        let values = spec
            .enumerable(case)
            .ok_or_else(|| RealizeError::UnsupportedCase(case.to_string()))?;
        per_case.push(values);
    }
    let combos: usize = per_case.iter().map(|v| v.len()).product();
    let subject_pos = frame.cases().iter().position(|c| *c == spec.agreement);
    let rflx = spec.rflx();
    let mut out = Vec::with_capacity(spec.cells.len() * combos);
    let mut idx = vec![0usize; per_case.len()];
    for cell in &spec.cells {
        idx.iter_mut().for_each(|i| *i = 0);
        for _ in 0..combos {
            let mut bundle = cell.tam.clone();
            let subject = subject_pos.map(|p| &per_case[p][idx[p]]);
            for (k, values) in per_case.iter().enumerate() {
                let slot = &values[idx[k]];
                let slot = match subject {
                    Some(s)
                        if Some(k) != subject_pos
                            && spec.reflexive == ReflexivePolicy::Coreference
                            && s.same_referent(slot) =>
                    {
                        let mut r = slot.clone();
                        r.push_value(rflx, &spec.inventory)
                            .expect("RFLX checked when the grammar was loaded");
                        r
                    }
                    _ => slot.clone(),
                };
                bundle.set_arg(slot, &spec.inventory);
            }
            out.push(bundle);
            // Odometer, last case fastest.
            for k in (0..idx.len()).rev() {
                idx[k] += 1;
                if idx[k] < per_case[k].len() {
                    break;
                }
                idx[k] = 0;
            }
        }
    }
    Ok(out)
}

/// Builds the full table of one lexeme. Any unrealizable cell fails the lexeme.
pub fn build_table(
    spec: &GrammarSpec,
    word_table: &WordInflectionTable,
    annotation: &FrameAnnotation,
) -> Result<ClauseInflectionTable, BuildError> {
    let lemma = &annotation.lemma;
    let err = |bundle: &FeatureBundle, source| BuildError::Realize {
        lemma: lemma.clone(),
        bundle: bundle.to_string(),
        source,
    };
    let mut table = ClauseInflectionTable::new(lemma.clone());
    for frame in &annotation.frames {
        let bundles = enumerate_bundles(spec, frame).map_err(|e| BuildError::Realize {
            lemma: lemma.clone(),
            bundle: frame.to_string(),
            source: e,
        })?;
        let mut cells = Vec::with_capacity(bundles.len());
        // Consecutive bundles share TAM and subject, so the TAM frame is reused.
        let mut cache: Option<(FeatureBundle, Option<ArgSlot>, Vec<ClauseToken>)> = None;
        for bundle in bundles {
            check_frame(spec, frame, &bundle).map_err(|e| err(&bundle, e))?;
            let tam = bundle.tam();
            let subj = bundle.arg(spec.agreement).cloned();
            let hit = matches!(&cache, Some((t, s, _)) if *t == tam && *s == subj);
            if !hit {
                let tokens = realize_tam(spec, word_table, &bundle).map_err(|e| err(&bundle, e))?;
                cache = Some((tam, subj, tokens));
            }
            let tokens = &cache.as_ref().expect("filled above").2;
            let form = assemble(spec, &bundle, tokens).map_err(|e| err(&bundle, e))?;
            cells.push((bundle, form));
        }
        table
            .push_frame(frame.clone(), cells)
            .expect("enumerated bundles are distinct and fit their frame");
    }
    Ok(table)
}

/// Counts and failures of one build run.
#[derive(Debug, Clone, Default, Serialize)]
pub struct BuildManifest {
    pub language: String,
    pub requested: usize,
    pub tables_built: usize,
    pub cells: usize,
    pub skipped: Vec<SkippedLexeme>,
    /// Wall-clock time; not serialized.
    #[serde(skip)]
    pub duration_ms: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct SkippedLexeme {
    pub lemma: String,
    pub error: String,
}

impl BuildManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

/// Builds tables for every annotated lexeme, in parallel; output order follows
/// `annotations`. Failed lexemes are skipped and listed in the manifest.
pub fn build_tables(
    spec: &GrammarSpec,
    words: &UnimorphData,
    annotations: &[FrameAnnotation],
) -> (Vec<ClauseInflectionTable>, BuildManifest) {
    let started = Instant::now();
    let by_lemma = words.by_lemma();
    let results: Vec<Result<ClauseInflectionTable, BuildError>> = annotations
        .par_iter()
        .map(|a| {
            let wt = by_lemma.get(a.lemma.as_str()).ok_or_else(|| BuildError::MissingWordTable {
                lemma: a.lemma.clone(),
            })?;
            build_table(spec, wt, a)
        })
        .collect();
    let mut manifest = BuildManifest {
        language: spec.language.clone(),
        requested: annotations.len(),
        ..BuildManifest::default()
    };
    let mut tables = Vec::with_capacity(results.len());
    for (a, r) in annotations.iter().zip(results) {
        match r {
            Ok(t) => {
                manifest.cells += t.len();
                tables.push(t);
            }
            Err(e) => {
                log::warn!("skipping {}: {e}", a.lemma);
                manifest.skipped.push(SkippedLexeme {
                    lemma: a.lemma.clone(),
                    error: e.to_string(),
                });
            }
        }
    }
    manifest.tables_built = tables.len();
    manifest.duration_ms = started.elapsed().as_millis();
    (tables, manifest)
}

/// Writes `lemma TAB form TAB features` rows, one table after another.
pub fn write_tables(tables: &[ClauseInflectionTable], mut out: impl Write) -> std::io::Result<()> {
    if tables.is_empty() {
        log::warn!("exporting an empty table list");
    }
    for t in tables {
        for (bundle, form) in t.cells() {
            writeln!(out, "{}\t{}\t{}", t.lemma, form, bundle)?;
        }
    }
    Ok(())
}

pub fn export_tables(tables: &[ClauseInflectionTable], path: impl AsRef<Path>) -> Result<(), TableIoError> {
    let path = path.as_ref();
    let io = |e: std::io::Error| TableIoError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let file = std::fs::File::create(path).map_err(io)?;
    let mut w = std::io::BufWriter::new(file);
    write_tables(tables, &mut w).map_err(io)?;
    w.flush().map_err(io)
}

/// Reads tables back. Rows of one lemma must be contiguous; frames are
/// recovered from the argument cases of each bundle.
pub fn parse_tables(text: &str, origin: &str, inv: &FeatureInventory) -> Result<Vec<ClauseInflectionTable>, TableIoError> {
    let mut tables: Vec<ClauseInflectionTable> = Vec::new();
    let mut current: Option<(String, Vec<(Frame, Vec<(FeatureBundle, String)>)>)> = None;
    let inconsistent = |line: usize, message: String| TableIoError::Inconsistent {
        path: origin.to_owned(),
        line,
        message,
    };
    let finish = |cur: Option<(String, Vec<(Frame, Vec<(FeatureBundle, String)>)>)>,
                      line: usize,
                      tables: &mut Vec<ClauseInflectionTable>|
     -> Result<(), TableIoError> {
        if let Some((lemma, frames)) = cur {
            if tables.iter().any(|t| t.lemma == lemma) {
                return Err(inconsistent(line, format!("rows of `{lemma}` are not contiguous")));
            }
            let mut t = ClauseInflectionTable::new(lemma);
            for (frame, cells) in frames {
                t.push_frame(frame, cells).map_err(|m| inconsistent(line, m))?;
            }
            tables.push(t);
        }
        Ok(())
    };
    let mut parsed: HashMap<&str, (FeatureBundle, Frame)> = HashMap::new();
    let mut last = 0;
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        last = n;
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(TableIoError::MalformedRow {
                path: origin.to_owned(),
                line: n,
            });
        }
        // Each distinct bundle text is parsed once.
        let (bundle, frame) = match parsed.get(cols[2]) {
            Some(hit) => hit.clone(),
            None => {
                let bundle = FeatureBundle::parse(cols[2], inv).map_err(|source| TableIoError::Feature {
                    path: origin.to_owned(),
                    line: n,
                    source,
                })?;
                let frame = Frame::new(bundle.cases(), inv).map_err(|m| inconsistent(n, m))?;
                parsed.insert(cols[2], (bundle.clone(), frame.clone()));
                (bundle, frame)
            }
        };
        if current.as_ref().map(|(l, _)| l != cols[0]).unwrap_or(true) {
            finish(current.take(), n, &mut tables)?;
            current = Some((cols[0].to_owned(), Vec::new()));
        }
        let frames = &mut current.as_mut().expect("set above").1;
        match frames.last_mut() {
            Some((f, cells)) if *f == frame => cells.push((bundle, cols[1].to_owned())),
            _ => {
                if frames.iter().any(|(f, _)| *f == frame) {
                    return Err(inconsistent(n, format!("cells of frame {frame} are not contiguous")));
                }
                frames.push((frame, vec![(bundle, cols[1].to_owned())]));
            }
        }
    }
    finish(current, last, &mut tables)?;
    Ok(tables)
}

pub fn import_tables(path: impl AsRef<Path>, inv: &FeatureInventory) -> Result<Vec<ClauseInflectionTable>, TableIoError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| TableIoError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_tables(&text, &path.display().to_string(), inv)
}

impl fmt::Display for ClauseInflectionTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut buf = Vec::new();
        write_tables(std::slice::from_ref(self), &mut buf).map_err(|_| fmt::Error)?;
        f.write_str(&String::from_utf8_lossy(&buf))
    }
}
