//! Per-language realization grammars.
//!
//! A [`GrammarSpec`] is loaded from a line-oriented file (see
//! `docs/grammar-format.md`) and turns a lexeme's word-level table plus a
//! layered feature bundle into one clause: periphrastic TAM template, subject
//! agreement, pro-drop, pronoun arguments and word order.

mod parse;
pub(crate) mod realize;

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::featkit::{ArgSlot, FeatError, FeatureBundle, FeatureInventory, Tag};
use crate::lexicon::WordInflectionTable;

pub use realize::ClauseToken;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Feature { line: usize, source: FeatError },
    #[error("line {line}: word-level tag `{tag}` not found in the table of `{lemma}`")]
    UnknownTag { line: usize, lemma: String, tag: String },
    #[error("line {line}: auxiliary `{lemma}` has no loaded word table")]
    MissingAuxTable { line: usize, lemma: String },
    #[error("line {line}: TAM cell {tam} already defined on line {first}")]
    DuplicateTamCell { line: usize, first: usize, tam: String },
    #[error("line {line}: no pronoun for {slot} ({needed_by})")]
    IncompletePronounTable { line: usize, slot: String, needed_by: String },
    #[error("line {line}: pronoun {slot} defined twice")]
    DuplicatePronoun { line: usize, slot: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl GrammarError {
    pub fn line(&self) -> Option<usize> {
        match self {
            GrammarError::Syntax { line, .. }
            | GrammarError::Feature { line, .. }
            | GrammarError::UnknownTag { line, .. }
            | GrammarError::MissingAuxTable { line, .. }
            | GrammarError::DuplicateTamCell { line, .. }
            | GrammarError::IncompletePronounTable { line, .. }
            | GrammarError::DuplicatePronoun { line, .. } => Some(*line),
            GrammarError::Io { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RealizeError {
    #[error("no TAM cell matches `{0}`")]
    NoMatchingCell(String),
    #[error("word table of `{lemma}` lacks tag `{tag}`")]
    MissingWordForm { lemma: String, tag: String },
    #[error("no pronoun for {0}")]
    UnrealizablePronoun(String),
    #[error("bundle `{bundle}` does not fit frame {frame}")]
    FrameMismatch { bundle: String, frame: String },
    #[error("case {0} is not used by this grammar")]
    UnsupportedCase(String),
    #[error("cannot fill `{pattern}` for `{bundle}`: agreement controller lacks {missing}")]
    Agreement {
        pattern: String,
        bundle: String,
        missing: String,
    },
}

/// A conjunction of features that must all be present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condition(pub Vec<Tag>);

impl Condition {
    pub fn holds(&self, features: &[Tag]) -> bool {
        self.0.iter().all(|t| features.contains(t))
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.0.iter().map(|t| t.as_str()).collect();
        f.write_str(&names.join(","))
    }
}

/// Agreement-conditioned alternatives with a mandatory default.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alternatives<T> {
    pub cases: Vec<(Condition, T)>,
    pub default: T,
}

impl<T> Alternatives<T> {
    pub fn single(value: T) -> Self {
        Alternatives {
            cases: Vec::new(),
            default: value,
        }
    }

    pub fn select(&self, features: &[Tag]) -> &T {
        self.cases
            .iter()
            .find(|(c, _)| c.holds(features))
            .map(|(_, v)| v)
            .unwrap_or(&self.default)
    }

    pub fn all(&self) -> impl Iterator<Item = &T> {
        self.cases.iter().map(|(_, v)| v).chain(std::iter::once(&self.default))
    }
}

/// A word-level tag with optional `{PERSON}`, `{NUMBER}`, `{GENDER}` holes
/// filled from the agreement controller.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagPattern(pub String);

/// One position of a TAM template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TemplateSlot {
    Subject,
    Args,
    Negation,
    Literal(Alternatives<Vec<String>>),
    MainVerb(Alternatives<TagPattern>),
    Aux { lemma: String, tags: Alternatives<TagPattern> },
}

/// The periphrastic template for one TAM (+NEG/Q) combination.
#[derive(Debug, Clone)]
pub struct TamCell {
    /// TAM and sentence features only; no argument slots.
    pub tam: FeatureBundle,
    pub template: Vec<TemplateSlot>,
    /// Overrides the grammar-wide order of non-subject arguments.
    pub order: Option<Vec<Tag>>,
    pub line: usize,
}

/// How a case is expressed on a pronoun.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CaseMarking {
    /// The pronoun table lists forms of this case directly.
    Pronoun,
    /// Adposition words before the pronoun of `base` case (`from you`).
    Prefix { words: Vec<String>, base: Tag },
    /// Adposition words after the pronoun of `base` case.
    Postposition { words: Vec<String>, base: Tag },
    /// A marker glued to the end of the `base` pronoun.
    Fused { suffix: String, base: Tag },
}

#[derive(Debug, Clone, Default)]
pub struct PronounTable {
    forms: HashMap<ArgSlot, String>,
    marking: HashMap<Tag, CaseMarking>,
}

impl PronounTable {
    pub fn marking(&self, case: Tag) -> &CaseMarking {
        self.marking.get(&case).unwrap_or(&CaseMarking::Pronoun)
    }

    pub fn direct(&self, slot: &ArgSlot) -> Option<&str> {
        self.forms.get(slot).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SubjectPolicy {
    Overt,
    ProDrop,
    /// Drop the subject when any condition holds over TAM and subject features.
    PartialProDrop(Vec<Condition>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReflexivePolicy {
    None,
    /// Objects coreferent with the subject are generated as their RFLX variant.
    Coreference,
}

/// A validated realization grammar.
#[derive(Debug, Clone)]
pub struct GrammarSpec {
    pub language: String,
    pub inventory: FeatureInventory,
    pub cases: Vec<Tag>,
    pub agreement: Tag,
    pub subject_policy: SubjectPolicy,
    pub argument_order: Vec<Tag>,
    pub negation: Vec<String>,
    pub reflexive: ReflexivePolicy,
    /// Agreement features used when a frame has no subject; `None` forbids such frames.
    pub impersonal: Option<ArgSlot>,
    pub cells: Vec<TamCell>,
    pub pronouns: PronounTable,
    enumerable: HashMap<Tag, Vec<ArgSlot>>,
    aux: HashMap<String, WordInflectionTable>,
    cell_index: HashMap<FeatureBundle, usize>,
    rflx: Tag,
}

impl GrammarSpec {
    /// Loads a grammar file; `aux-table` paths resolve against its directory.
    pub fn load(path: impl AsRef<Path>, inv: &FeatureInventory) -> Result<GrammarSpec, GrammarError> {
        GrammarSpec::load_with_flags(path, inv, &[])
    }

    /// Like [`GrammarSpec::load`], enabling `?flag` lines for the given flags.
    pub fn load_with_flags(
        path: impl AsRef<Path>,
        inv: &FeatureInventory,
        flags: &[&str],
    ) -> Result<GrammarSpec, GrammarError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| GrammarError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        parse::parse_grammar(&text, path.parent(), inv, flags, Vec::new())
    }

    /// Parses grammar text. `aux` supplies auxiliary tables in addition to any
    /// `aux-table` directive (which needs `base_dir`).
    pub fn parse(
        text: &str,
        base_dir: Option<&Path>,
        inv: &FeatureInventory,
        flags: &[&str],
        aux: Vec<WordInflectionTable>,
    ) -> Result<GrammarSpec, GrammarError> {
        parse::parse_grammar(text, base_dir, inv, flags, aux)
    }

    /// Enumerable argument values for `case`, each as a slot of that case.
    pub fn enumerable(&self, case: Tag) -> Option<&[ArgSlot]> {
        self.enumerable.get(&case).map(Vec::as_slice)
    }

    pub fn aux_table(&self, lemma: &str) -> Option<&WordInflectionTable> {
        self.aux.get(lemma)
    }

    pub fn cell_for(&self, bundle: &FeatureBundle) -> Option<&TamCell> {
        self.cell_index.get(&bundle.tam()).map(|&i| &self.cells[i])
    }

    pub fn supports_case(&self, case: Tag) -> bool {
        self.cases.contains(&case)
    }

    pub fn rflx(&self) -> Tag {
        self.rflx
    }
}

/// Loads and validates a grammar file.
pub fn load_grammar(path: impl AsRef<Path>, inv: &FeatureInventory) -> Result<GrammarSpec, GrammarError> {
    GrammarSpec::load(path, inv)
}

pub use realize::{realize_clause, realize_pronoun, realize_tam};
