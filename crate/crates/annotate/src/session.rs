use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clausemorph::grammar::GrammarSpec;
use clausemorph::lexicon::{load_frames, write_frames, FrameAnnotation, LexiconError, UnimorphData, WordInflectionTable};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("lexeme `{0}` has no word table")]
    MissingWordTable(String),
    #[error("lexeme `{0}` is queued twice")]
    DuplicateLexeme(String),
    #[error(transparent)]
    Frames(#[from] LexiconError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pending,
    Annotated,
    Skipped,
}

#[derive(Debug, Clone)]
pub struct Entry {
    pub status: Status,
    /// Bumped whenever the stored state of the lexeme changes.
    pub revision: u64,
    pub word_table: WordInflectionTable,
}

/// One annotator's queue over a sampled lexicon and the frames file it writes.
pub struct Session {
    pub spec: GrammarSpec,
    queue: Vec<String>,
    entries: HashMap<String, Entry>,
    frames: HashMap<String, FrameAnnotation>,
    /// Rows of the frames file for lemmas outside the queue, kept as found.
    foreign: Vec<FrameAnnotation>,
    frames_path: PathBuf,
}

impl Session {
    /// Starts a session over `queue`. Annotations already in `frames_path`
    /// mark their lexemes annotated.
    pub fn new(
        spec: GrammarSpec,
        words: &UnimorphData,
        queue: Vec<String>,
        frames_path: impl Into<PathBuf>,
    ) -> Result<Session, SessionError> {
        let frames_path = frames_path.into();
        let by_lemma = words.by_lemma();
        let mut entries = HashMap::with_capacity(queue.len());
        for lemma in &queue {
            let wt = by_lemma
                .get(lemma.as_str())
                .ok_or_else(|| SessionError::MissingWordTable(lemma.clone()))?;
            let entry = Entry {
                status: Status::Pending,
                revision: 0,
                word_table: (*wt).clone(),
            };
            if entries.insert(lemma.clone(), entry).is_some() {
                return Err(SessionError::DuplicateLexeme(lemma.clone()));
            }
        }
        let mut frames = HashMap::new();
        let mut foreign = Vec::new();
        if frames_path.exists() {
            for a in load_frames(&frames_path, &spec.inventory)? {
                match entries.get_mut(&a.lemma) {
                    Some(e) => {
                        e.status = Status::Annotated;
                        frames.insert(a.lemma.clone(), a);
                    }
                    None => foreign.push(a),
                }
            }
        }
        Ok(Session {
            spec,
            queue,
            entries,
            frames,
            foreign,
            frames_path,
        })
    }

    pub fn language(&self) -> &str {
        &self.spec.language
    }

    pub fn queue(&self) -> &[String] {
        &self.queue
    }

    pub fn entry(&self, lemma: &str) -> Option<&Entry> {
        self.entries.get(lemma)
    }

    pub fn frames(&self, lemma: &str) -> Option<&FrameAnnotation> {
        self.frames.get(lemma)
    }

    pub fn frames_path(&self) -> &Path {
        &self.frames_path
    }

    pub fn count(&self, status: Status) -> usize {
        self.entries.values().filter(|e| e.status == status).count()
    }

    /// Stores `annotation` and rewrites the frames file. Returns false if it
    /// was already stored unchanged.
    pub fn annotate(&mut self, annotation: FrameAnnotation) -> Result<bool, SessionError> {
        let lemma = annotation.lemma.clone();
        if self.frames.get(&lemma) == Some(&annotation) {
            return Ok(false);
        }
        let previous = self.frames.insert(lemma.clone(), annotation);
        if let Err(e) = self.persist() {
            match previous {
                Some(p) => self.frames.insert(lemma, p),
                None => self.frames.remove(&lemma),
            };
            return Err(e);
        }
        let e = self.entries.get_mut(&lemma).expect("caller checked the lemma");
        e.status = Status::Annotated;
        e.revision += 1;
        Ok(true)
    }

    /// Marks a pending lexeme skipped. Skips are not written to the frames file.
    pub fn skip(&mut self, lemma: &str) {
        let e = self.entries.get_mut(lemma).expect("caller checked the lemma");
        if e.status != Status::Skipped {
            e.status = Status::Skipped;
            e.revision += 1;
        }
    }

    fn persist(&self) -> Result<(), SessionError> {
        let rows: Vec<FrameAnnotation> = self
            .queue
            .iter()
            .filter_map(|l| self.frames.get(l).cloned())
            .chain(self.foreign.iter().cloned())
            .collect();
        let io = |e: std::io::Error| SessionError::Io {
            path: self.frames_path.display().to_string(),
            message: e.to_string(),
        };
        let dir = match self.frames_path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
        tmp.write_all(write_frames(&rows).as_bytes()).map_err(io)?;
        tmp.as_file().sync_all().map_err(io)?;
        tmp.persist(&self.frames_path).map_err(|e| io(e.error))?;
        Ok(())
    }
}
