//! Python bindings: load a language, realize clauses, build tables, sample
//! tasks and score predictions.

use std::path::PathBuf;

use clausemorph::eval::{aggregate_runs, format_mean_std, score_run};
use clausemorph::featkit::{FeatureBundle, FeatureInventory};
use clausemorph::grammar::{realize_clause, GrammarSpec};
use clausemorph::lexicon::{load_frames, load_unimorph, Frame, FrameAnnotation, UnimorphData};
use clausemorph::paradigm::{build_table, build_tables, export_tables, ClauseInflectionTable};
use clausemorph::sampler::{parse_task_file, sample_dataset, SampleConfig, SplitName, TaskKind};
use clausemorph::stats::{compute_stats, Counting};
use pyo3::exceptions::{PyIOError, PyKeyError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_bundle(text: &str, inv: &FeatureInventory) -> PyResult<FeatureBundle> {
    FeatureBundle::parse_any(text, inv).map_err(value_err)
}

fn parse_task(name: &str) -> PyResult<TaskKind> {
    name.parse().map_err(PyValueError::new_err)
}

/// Nested form of `bundle` (`NOM1;NOMSG` becomes `NOM(1,SG)`), canonically ordered.
#[pyfunction]
fn normalize(bundle: &str) -> PyResult<String> {
    let inv = FeatureInventory::default();
    Ok(parse_bundle(bundle, &inv)?.serialize())
}

/// Flattened form of a nested or flat bundle.
#[pyfunction]
fn flatten(bundle: &str) -> PyResult<String> {
    let inv = FeatureInventory::default();
    Ok(parse_bundle(bundle, &inv)?.flatten())
}

/// Exact-match score of `preds` against the rows of a gold task file.
/// Returns `(correct, total, accuracy)`.
#[pyfunction]
fn score(task: &str, gold_rows: Vec<String>, preds: Vec<String>) -> PyResult<(usize, usize, f64)> {
    let inv = FeatureInventory::default();
    let task = parse_task(task)?;
    let gold = parse_task_file(&gold_rows.join("\n"), "<gold>", task, &inv).map_err(value_err)?;
    let s = score_run(&gold, &preds, &inv, 0).map_err(value_err)?;
    Ok((s.correct, s.total, s.accuracy))
}

/// Mean, population std and the `70.0 ±1.2` string of several run accuracies.
#[pyfunction]
fn aggregate(accuracies: Vec<f64>) -> PyResult<(f64, f64, String)> {
    let (m, s) = aggregate_runs(&accuracies).map_err(value_err)?;
    Ok((m, s, format_mean_std(m, s)))
}

/// A language directory: grammar.txt, unimorph.tsv and frames.tsv.
#[pyclass(module = "clausemorph")]
struct Language {
    inv: FeatureInventory,
    spec: GrammarSpec,
    words: UnimorphData,
    frames: Vec<FrameAnnotation>,
}

impl Language {
    fn annotation(&self, lemma: &str) -> PyResult<&FrameAnnotation> {
        self.frames
            .iter()
            .find(|a| a.lemma == lemma)
            .ok_or_else(|| PyKeyError::new_err(format!("no frames for `{lemma}`")))
    }
}

#[pymethods]
impl Language {
    #[new]
    #[pyo3(signature = (data_dir, flags = None))]
    fn new(data_dir: PathBuf, flags: Option<Vec<String>>) -> PyResult<Self> {
        let inv = FeatureInventory::default();
        let flags = flags.unwrap_or_default();
        let flags: Vec<&str> = flags.iter().map(String::as_str).collect();
        let spec = GrammarSpec::load_with_flags(data_dir.join("grammar.txt"), &inv, &flags)
            .map_err(|e| value_err(format!("{}: {e}", data_dir.join("grammar.txt").display())))?;
        let words = load_unimorph(data_dir.join("unimorph.tsv")).map_err(|e| PyIOError::new_err(e.to_string()))?;
        let frames = load_frames(data_dir.join("frames.tsv"), &inv).map_err(|e| PyIOError::new_err(e.to_string()))?;
        Ok(Language {
            inv,
            spec,
            words,
            frames,
        })
    }

    #[getter]
    fn name(&self) -> String {
        self.spec.language.clone()
    }

    /// Annotated lemmas in file order.
    fn lemmas(&self) -> Vec<String> {
        self.frames.iter().map(|a| a.lemma.clone()).collect()
    }

    fn frames(&self, lemma: &str) -> PyResult<Vec<String>> {
        Ok(self.annotation(lemma)?.frames.iter().map(Frame::to_string).collect())
    }

    /// The clause for one cell; the frame is read off the bundle's arguments.
    fn realize(&self, lemma: &str, bundle: &str) -> PyResult<String> {
        let wt = self
            .words
            .get(lemma)
            .ok_or_else(|| PyKeyError::new_err(format!("no word table for `{lemma}`")))?;
        let b = parse_bundle(bundle, &self.inv)?;
        let frame = Frame::new(b.cases(), &self.inv).map_err(value_err)?;
        realize_clause(&self.spec, wt, &frame, &b).map_err(value_err)
    }

    /// `(bundle, clause)` pairs of a lexeme's full table, in canonical order.
    fn table(&self, lemma: &str) -> PyResult<Vec<(String, String)>> {
        let wt = self
            .words
            .get(lemma)
            .ok_or_else(|| PyKeyError::new_err(format!("no word table for `{lemma}`")))?;
        let t = build_table(&self.spec, wt, self.annotation(lemma)?).map_err(value_err)?;
        Ok(t.cells().map(|(b, f)| (b.serialize(), f.to_owned())).collect())
    }

    /// Builds tables for `lemmas`, or for every annotated lemma.
    #[pyo3(signature = (lemmas = None))]
    fn build(&self, py: Python<'_>, lemmas: Option<Vec<String>>) -> PyResult<Tables> {
        let annotations: Vec<FrameAnnotation> = match lemmas {
            None => self.frames.clone(),
            Some(ls) => ls
                .iter()
                .map(|l| self.annotation(l).cloned())
                .collect::<PyResult<_>>()?,
        };
        let (tables, manifest) = py.detach(|| build_tables(&self.spec, &self.words, &annotations));
        if let Some(s) = manifest.skipped.first() {
            return Err(value_err(format!("{}: {}", s.lemma, s.error)));
        }
        Ok(Tables { tables })
    }
}

/// Built clause tables.
#[pyclass(module = "clausemorph")]
struct Tables {
    tables: Vec<ClauseInflectionTable>,
}

#[pymethods]
impl Tables {
    fn __len__(&self) -> usize {
        self.tables.len()
    }

    fn cells(&self) -> usize {
        self.tables.iter().map(ClauseInflectionTable::len).sum()
    }

    fn write(&self, path: PathBuf) -> PyResult<()> {
        export_tables(&self.tables, path).map_err(|e| PyIOError::new_err(e.to_string()))
    }

    /// Paradigm statistics; `counting` is "layered" or "flattened".
    #[pyo3(signature = (counting = "layered"))]
    fn stats<'py>(&self, py: Python<'py>, counting: &str) -> PyResult<Bound<'py, PyDict>> {
        let counting = match counting {
            "layered" => Counting::Layered,
            "flattened" => Counting::Flattened,
            other => return Err(value_err(format!("unknown counting `{other}`"))),
        };
        let inv = FeatureInventory::default();
        let s = compute_stats(&self.tables, &inv, counting).map_err(value_err)?;
        let d = PyDict::new(py);
        d.set_item("tables", s.tables)?;
        d.set_item("cells", s.cells)?;
        d.set_item("table_size", s.table_size)?;
        d.set_item("feat_set_size", s.feat_set_size)?;
        d.set_item("feats_per_form", s.feats_per_form)?;
        d.set_item("form_length", s.form_length)?;
        Ok(d)
    }

    /// Task rows per split: `{"train": [...], "dev": [...], "test": [...]}`.
    #[pyo3(signature = (task, seed, total = 10000, lexemes = (400, 50, 50), ratios = (0.8, 0.1, 0.1), flat = false))]
    fn sample<'py>(
        &self,
        py: Python<'py>,
        task: &str,
        seed: u64,
        total: usize,
        lexemes: (usize, usize, usize),
        ratios: (f64, f64, f64),
        flat: bool,
    ) -> PyResult<Bound<'py, PyDict>> {
        let config = SampleConfig {
            task: parse_task(task)?,
            total,
            ratios: [ratios.0, ratios.1, ratios.2],
            lexemes: [lexemes.0, lexemes.1, lexemes.2],
            seed,
        };
        let split = sample_dataset(&self.tables, &config).map_err(value_err)?;
        let d = PyDict::new(py);
        for s in SplitName::ALL {
            let rows: Vec<String> = split.examples(s).iter().map(|e| e.to_row(flat)).collect();
            d.set_item(s.name(), rows)?;
        }
        Ok(d)
    }
}

/// Adds the module contents to `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(normalize, m)?)?;
    m.add_function(wrap_pyfunction!(flatten, m)?)?;
    m.add_function(wrap_pyfunction!(score, m)?)?;
    m.add_function(wrap_pyfunction!(aggregate, m)?)?;
    m.add_class::<Language>()?;
    m.add_class::<Tables>()?;
    Ok(())
}

#[pymodule]
#[pyo3(name = "clausemorph")]
fn clausemorph_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}
