use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clausemorph::sampler::SampleConfig;
use serde::Deserialize;

use crate::UsageError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSection {
    pub total: Option<usize>,
    pub ratios: Option<[f64; 3]>,
    pub lexemes: Option<[usize; 3]>,
    pub seed: Option<u64>,
}

/// The TOML file. Every field is optional; relative paths resolve against
/// the file's directory.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub language: Option<String>,
    /// Directory holding grammar.txt, unimorph.tsv, freq.txt, exclude.txt and frames.tsv.
    pub data_dir: Option<PathBuf>,
    pub grammar: Option<PathBuf>,
    pub unimorph: Option<PathBuf>,
    pub freq: Option<PathBuf>,
    pub exclude: Option<PathBuf>,
    pub frames: Option<PathBuf>,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub grammar_flags: Vec<String>,
    /// Number of lexemes to build tables for.
    pub build_lexemes: Option<usize>,
    pub flat_features: Option<bool>,
    #[serde(default)]
    pub curve_sizes: Vec<usize>,
    #[serde(default)]
    pub curve_lexemes: Vec<usize>,
    pub port: Option<u16>,
    #[serde(default)]
    pub task: TaskSection,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: FileConfig = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [
            &mut cfg.data_dir,
            &mut cfg.grammar,
            &mut cfg.unimorph,
            &mut cfg.freq,
            &mut cfg.exclude,
            &mut cfg.frames,
            &mut cfg.output,
        ] {
            if let Some(p) = p {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(cfg)
    }
}

/// Overrides given on the command line.
#[derive(Debug, Default)]
pub struct Overrides {
    pub data_dir: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub flat_features: bool,
    pub curve_sizes: Option<Vec<usize>>,
    pub curve_lexemes: Option<Vec<usize>>,
}

/// Configuration after merging the file with flags; flags win.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub language: String,
    pub grammar: Option<PathBuf>,
    pub unimorph: Option<PathBuf>,
    pub freq: Option<PathBuf>,
    pub exclude: Option<PathBuf>,
    pub frames: Option<PathBuf>,
    pub output: PathBuf,
    pub grammar_flags: Vec<String>,
    pub build_lexemes: usize,
    pub flat_features: bool,
    pub curve_sizes: Vec<usize>,
    pub curve_lexemes: Vec<usize>,
    pub port: u16,
    pub total: usize,
    pub ratios: [f64; 3],
    pub lexemes: [usize; 3],
    pub seed: u64,
}

impl RunConfig {
    pub fn resolve(file: FileConfig, o: Overrides) -> RunConfig {
        let data_dir = o.data_dir.or(file.data_dir);
        let in_dir = |explicit: Option<PathBuf>, name: &str| explicit.or_else(|| data_dir.as_ref().map(|d| d.join(name)));
        let language = file
            .language
            .or_else(|| data_dir.as_ref().and_then(|d| d.file_name()).map(|n| n.to_string_lossy().into_owned()))
            .unwrap_or_else(|| "unknown".into());
        RunConfig {
            grammar: in_dir(file.grammar, "grammar.txt"),
            unimorph: in_dir(file.unimorph, "unimorph.tsv"),
            freq: in_dir(file.freq, "freq.txt"),
            exclude: in_dir(file.exclude, "exclude.txt"),
            frames: in_dir(file.frames, "frames.tsv"),
            output: o.output.or(file.output).unwrap_or_else(|| PathBuf::from("out").join(&language)),
            language,
            grammar_flags: file.grammar_flags,
            build_lexemes: file.build_lexemes.unwrap_or(500),
            flat_features: o.flat_features || file.flat_features.unwrap_or(false),
            curve_sizes: o.curve_sizes.unwrap_or(file.curve_sizes),
            curve_lexemes: o.curve_lexemes.unwrap_or(file.curve_lexemes),
            port: file.port.unwrap_or(8787),
            total: file.task.total.unwrap_or(10_000),
            ratios: file.task.ratios.unwrap_or([0.8, 0.1, 0.1]),
            lexemes: file.task.lexemes.unwrap_or([400, 50, 50]),
            seed: o.seed.or(file.task.seed).unwrap_or(0),
        }
    }

    /// The path of `what`, which must be configured and exist.
    pub fn path<'a>(&self, value: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
        let Some(p) = value else {
            bail!(UsageError(format!(
                "no {what} path configured; set `{what}` or `data_dir` in the config, or pass --data-dir"
            )));
        };
        if !p.exists() {
            bail!("{what} file {} does not exist", p.display());
        }
        Ok(p)
    }

    pub fn sample_config(&self, task: clausemorph::sampler::TaskKind) -> SampleConfig {
        SampleConfig {
            task,
            total: self.total,
            ratios: self.ratios,
            lexemes: self.lexemes,
            seed: self.seed,
        }
    }

    pub fn tables_path(&self) -> PathBuf {
        self.output.join("tables.tsv")
    }
}
