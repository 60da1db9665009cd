//! Inflection, reinflection and analysis datasets with lexeme-disjoint splits.
//!
//! All randomness comes from one `ChaCha8Rng` seeded with the run seed and is
//! consumed in a fixed order: the lexeme shuffle, then cell sampling for each
//! lexeme of train, dev and test in turn, then a shuffle of each split.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::featkit::{FeatError, FeatureBundle, FeatureInventory};
use crate::paradigm::ClauseInflectionTable;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SamplerError {
    #[error("{lemma}: quota of {quota} exceeds the {size} usable cells of the table")]
    QuotaExceedsTableSize { lemma: String, quota: usize, size: usize },
    #[error("requested {requested} lexemes but only {available} tables are available")]
    NotEnoughLexemes { requested: usize, available: usize },
    #[error("learning-curve point {point} exceeds the {available} available")]
    PointExceedsAvailable { point: usize, available: usize },
    #[error("invalid sampling parameters: {0}")]
    InvalidConfig(String),
    #[error("{path}:{line}: {message}")]
    Malformed { path: String, line: usize, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Inflection,
    Reinflection,
    Analysis,
}

impl TaskKind {
    pub const ALL: [TaskKind; 3] = [TaskKind::Inflection, TaskKind::Reinflection, TaskKind::Analysis];

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Inflection => "inflection",
            TaskKind::Reinflection => "reinflection",
            TaskKind::Analysis => "analysis",
        }
    }

    /// Number of TSV columns in a task file.
    pub fn columns(self) -> usize {
        match self {
            TaskKind::Reinflection => 4,
            _ => 3,
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "inflection" | "inflect" => Ok(TaskKind::Inflection),
            "reinflection" | "reinflect" => Ok(TaskKind::Reinflection),
            "analysis" | "analyze" => Ok(TaskKind::Analysis),
            other => Err(format!("unknown task `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TaskExample {
    Inflection {
        lemma: String,
        bundle: FeatureBundle,
        form: String,
    },
    Reinflection {
        lemma: String,
        source_bundle: FeatureBundle,
        source_form: String,
        target_bundle: FeatureBundle,
        target_form: String,
    },
    Analysis {
        form: String,
        lemma: String,
        bundle: FeatureBundle,
    },
}

impl TaskExample {
    pub fn kind(&self) -> TaskKind {
        match self {
            TaskExample::Inflection { .. } => TaskKind::Inflection,
            TaskExample::Reinflection { .. } => TaskKind::Reinflection,
            TaskExample::Analysis { .. } => TaskKind::Analysis,
        }
    }

    pub fn lemma(&self) -> &str {
        match self {
            TaskExample::Inflection { lemma, .. }
            | TaskExample::Reinflection { lemma, .. }
            | TaskExample::Analysis { lemma, .. } => lemma,
        }
    }

    /// The form the example asks for (the analysed form for analysis).
    pub fn target_form(&self) -> &str {
        match self {
            TaskExample::Inflection { form, .. } | TaskExample::Analysis { form, .. } => form,
            TaskExample::Reinflection { target_form, .. } => target_form,
        }
    }

    fn features(b: &FeatureBundle, flat: bool) -> String {
        if flat {
            b.flatten()
        } else {
            b.serialize()
        }
    }

    /// The TSV row; the lemma of a reinflection pair is not written.
    pub fn to_row(&self, flat: bool) -> String {
        match self {
            TaskExample::Inflection { lemma, bundle, form } => {
                format!("{lemma}\t{}\t{form}", Self::features(bundle, flat))
            }
            TaskExample::Reinflection {
                source_bundle,
                source_form,
                target_bundle,
                target_form,
                ..
            } => format!(
                "{}\t{source_form}\t{}\t{target_form}",
                Self::features(source_bundle, flat),
                Self::features(target_bundle, flat)
            ),
            TaskExample::Analysis { form, lemma, bundle } => {
                format!("{form}\t{lemma}\t{}", Self::features(bundle, flat))
            }
        }
    }

    /// The gold answer as a model should print it: the form for generation
    /// tasks, `lemma TAB features` for analysis.
    pub fn gold_output(&self) -> String {
        match self {
            TaskExample::Analysis { lemma, bundle, .. } => format!("{lemma}\t{bundle}"),
            other => other.target_form().to_owned(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitName {
    Train,
    Dev,
    Test,
}

impl SplitName {
    pub const ALL: [SplitName; 3] = [SplitName::Train, SplitName::Dev, SplitName::Test];

    pub fn name(self) -> &'static str {
        match self {
            SplitName::Train => "train",
            SplitName::Dev => "dev",
            SplitName::Test => "test",
        }
    }
}

/// Parameters of one dataset draw.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleConfig {
    pub task: TaskKind,
    pub total: usize,
    pub ratios: [f64; 3],
    pub lexemes: [usize; 3],
    pub seed: u64,
}

impl SampleConfig {
    /// 10,000 examples, 80/10/10, 400/50/50 lexemes.
    pub fn standard(task: TaskKind, seed: u64) -> SampleConfig {
        SampleConfig {
            task,
            total: 10_000,
            ratios: [0.8, 0.1, 0.1],
            lexemes: [400, 50, 50],
            seed,
        }
    }

    /// Example counts per split; test takes the rounding remainder.
    pub fn split_sizes(&self) -> Result<[usize; 3], SamplerError> {
        let sum: f64 = self.ratios.iter().sum();
        if (sum - 1.0).abs() > 1e-9 || self.ratios.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(SamplerError::InvalidConfig(format!("ratios {:?} do not sum to 1", self.ratios)));
        }
        let train = (self.total as f64 * self.ratios[0]).round() as usize;
        let dev = ((self.total as f64 * self.ratios[1]).round() as usize).min(self.total - train);
        Ok([train, dev, self.total - train - dev])
    }
}

/// Train, dev and test examples with their lexeme assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub task: TaskKind,
    pub seed: u64,
    pub train: Vec<TaskExample>,
    pub dev: Vec<TaskExample>,
    pub test: Vec<TaskExample>,
    /// Lexemes of each split, in shuffled order.
    pub lexemes: [Vec<String>; 3],
}

impl DatasetSplit {
    pub fn examples(&self, split: SplitName) -> &[TaskExample] {
        match split {
            SplitName::Train => &self.train,
            SplitName::Dev => &self.dev,
            SplitName::Test => &self.test,
        }
    }

    pub fn split_lexemes(&self, split: SplitName) -> &[String] {
        &self.lexemes[split as usize]
    }

    pub fn assignment(&self) -> HashMap<&str, SplitName> {
        let mut out = HashMap::new();
        for s in SplitName::ALL {
            for l in self.split_lexemes(s) {
                out.insert(l.as_str(), s);
            }
        }
        out
    }
}

/// Per-lexeme quotas: `count / n` each, the remainder to the first lexemes.
pub fn quotas(count: usize, n: usize) -> Vec<usize> {
    if n == 0 {
        return Vec::new();
    }
    (0..n).map(|i| count / n + usize::from(i < count % n)).collect()
}

fn usable_cells(table: &ClauseInflectionTable, task: TaskKind) -> usize {
    match task {
        // Targets need at least one other cell in their frame.
        TaskKind::Reinflection => (0..table.frames().len())
            .map(|i| table.frame_span(i).len())
            .filter(|&n| n >= 2)
            .sum(),
        _ => table.len(),
    }
}

fn sample_table(
    table: &ClauseInflectionTable,
    task: TaskKind,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<TaskExample>, SamplerError> {
    let size = usable_cells(table, task);
    if k > size {
        return Err(SamplerError::QuotaExceedsTableSize {
            lemma: table.lemma.clone(),
            quota: k,
            size,
        });
    }
    let lemma = &table.lemma;
    let mut out = Vec::with_capacity(k);
    match task {
        TaskKind::Inflection | TaskKind::Analysis => {
            for i in index::sample(rng, table.len(), k) {
                let (bundle, form) = table.cell(i).expect("index in range");
                out.push(if task == TaskKind::Inflection {
                    TaskExample::Inflection {
                        lemma: lemma.clone(),
                        bundle: bundle.clone(),
                        form: form.to_owned(),
                    }
                } else {
                    TaskExample::Analysis {
                        form: form.to_owned(),
                        lemma: lemma.clone(),
                        bundle: bundle.clone(),
                    }
                });
            }
        }
        TaskKind::Reinflection => {
            let eligible: Vec<usize> = (0..table.frames().len())
                .map(|i| table.frame_span(i))
                .filter(|s| s.len() >= 2)
                .flatten()
                .collect();
            for j in index::sample(rng, eligible.len(), k) {
                let target = eligible[j];
                let span = table.span_of(target);
                // Uniform over the other cells of the same frame.
                let mut source = rng.gen_range(span.start..span.end - 1);
                if source >= target {
                    source += 1;
                }
                let (tb, tf) = table.cell(target).expect("index in range");
                let (sb, sf) = table.cell(source).expect("index in range");
                out.push(TaskExample::Reinflection {
                    lemma: lemma.clone(),
                    source_bundle: sb.clone(),
                    source_form: sf.to_owned(),
                    target_bundle: tb.clone(),
                    target_form: tf.to_owned(),
                });
            }
        }
    }
    Ok(out)
}

fn sample_split(
    by_lemma: &HashMap<&str, &ClauseInflectionTable>,
    lexemes: &[String],
    task: TaskKind,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<TaskExample>, SamplerError> {
    if lexemes.is_empty() && count > 0 {
        return Err(SamplerError::NotEnoughLexemes {
            requested: 1,
            available: 0,
        });
    }
    let mut out = Vec::with_capacity(count);
    for (lemma, k) in lexemes.iter().zip(quotas(count, lexemes.len())) {
        out.extend(sample_table(by_lemma[lemma.as_str()], task, k, rng)?);
    }
    out.shuffle(rng);
    Ok(out)
}

/// Draws a lexeme-disjoint dataset. Each split takes the same number of
/// examples from each of its tables (remainder to the earliest lexemes).
pub fn sample_dataset(tables: &[ClauseInflectionTable], config: &SampleConfig) -> Result<DatasetSplit, SamplerError> {
    let sizes = config.split_sizes()?;
    let needed: usize = config.lexemes.iter().sum();
    if needed > tables.len() {
        return Err(SamplerError::NotEnoughLexemes {
            requested: needed,
            available: tables.len(),
        });
    }
    let mut names: Vec<&str> = tables.iter().map(|t| t.lemma.as_str()).collect();
    {
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = names.iter().find(|n| !seen.insert(**n)) {
            return Err(SamplerError::InvalidConfig(format!("lemma `{dup}` has two tables")));
        }
    }
    let by_lemma: HashMap<&str, &ClauseInflectionTable> = tables.iter().map(|t| (t.lemma.as_str(), t)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    names.shuffle(&mut rng);
    let mut lexemes: [Vec<String>; 3] = Default::default();
    let mut offset = 0;
    for (i, &n) in config.lexemes.iter().enumerate() {
        lexemes[i] = names[offset..offset + n].iter().map(|s| s.to_string()).collect();
        offset += n;
    }
    let mut parts: Vec<Vec<TaskExample>> = Vec::with_capacity(3);
    for i in 0..3 {
        parts.push(sample_split(&by_lemma, &lexemes[i], config.task, sizes[i], &mut rng)?);
    }
    let test = parts.pop().expect("three splits");
    let dev = parts.pop().expect("three splits");
    let train = parts.pop().expect("three splits");
    Ok(DatasetSplit {
        task: config.task,
        seed: config.seed,
        train,
        dev,
        test,
        lexemes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveMode {
    /// Smaller train sets from the same lexemes.
    BySize,
    /// The same train size drawn from fewer lexemes.
    ByLexemes,
}

/// Learning-curve variants of `split`. Dev and test are left unchanged.
///
/// By size, each point keeps the first examples of every lexeme (in train
/// order) under balanced quotas, so the sets are nested. By lexemes, train is
/// redrawn from the first `k` train lexemes at the original train size; this
/// needs the source tables.
pub fn learning_curve_subsets(
    split: &DatasetSplit,
    tables: &[ClauseInflectionTable],
    mode: CurveMode,
    points: &[usize],
) -> Result<Vec<DatasetSplit>, SamplerError> {
    if points.windows(2).any(|w| w[0] > w[1]) {
        return Err(SamplerError::InvalidConfig("learning-curve points must be ascending".into()));
    }
    let train_lexemes = split.split_lexemes(SplitName::Train);
    let mut out = Vec::with_capacity(points.len());
    for &point in points {
        let train = match mode {
            CurveMode::BySize => {
                if point > split.train.len() {
                    return Err(SamplerError::PointExceedsAvailable {
                        point,
                        available: split.train.len(),
                    });
                }
                let order: HashMap<&str, usize> =
                    train_lexemes.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
                let mut remaining = quotas(point, train_lexemes.len());
                split
                    .train
                    .iter()
                    .filter(|ex| {
                        let left = &mut remaining[order[ex.lemma()]];
                        if *left > 0 {
                            *left -= 1;
                            true
                        } else {
                            false
                        }
                    })
                    .cloned()
                    .collect()
            }
            CurveMode::ByLexemes => {
                if point > train_lexemes.len() || point == 0 {
                    return Err(SamplerError::PointExceedsAvailable {
                        point,
                        available: train_lexemes.len(),
                    });
                }
                if point == train_lexemes.len() {
                    split.train.clone()
                } else {
                    let by_lemma: HashMap<&str, &ClauseInflectionTable> =
                        tables.iter().map(|t| (t.lemma.as_str(), t)).collect();
                    if let Some(missing) = train_lexemes[..point].iter().find(|l| !by_lemma.contains_key(l.as_str())) {
                        return Err(SamplerError::InvalidConfig(format!("no table for train lexeme `{missing}`")));
                    }
                    let mut rng = ChaCha8Rng::seed_from_u64(split.seed);
                    rng.set_stream(point as u64);
                    sample_split(&by_lemma, &train_lexemes[..point], split.task, split.train.len(), &mut rng)?
                }
            }
        };
        let mut lexemes = split.lexemes.clone();
        if mode == CurveMode::ByLexemes {
            lexemes[0].truncate(point);
        } else {
            let present: std::collections::HashSet<&str> = train.iter().map(TaskExample::lemma).collect();
            lexemes[0].retain(|l| present.contains(l.as_str()));
        }
        out.push(DatasetSplit {
            task: split.task,
            seed: split.seed,
            train,
            dev: split.dev.clone(),
            test: split.test.clone(),
            lexemes,
        });
    }
    Ok(out)
}

/// Split manifest: seed, counts and lexeme assignment.
#[derive(Debug, Clone, Serialize)]
pub struct SplitManifest<'a> {
    pub task: TaskKind,
    pub seed: u64,
    pub flat_features: bool,
    pub counts: HashMap<&'static str, usize>,
    pub lexemes: HashMap<&'static str, &'a [String]>,
}

/// Renders the file of one split.
pub fn render_split(examples: &[TaskExample], flat: bool) -> String {
    let mut s = String::with_capacity(examples.len() * 64);
    for ex in examples {
        s.push_str(&ex.to_row(flat));
        s.push('\n');
    }
    s
}

/// Writes `train.tsv`, `dev.tsv`, `test.tsv` and `manifest.json` into `dir`.
pub fn export_task(split: &DatasetSplit, dir: impl AsRef<Path>, flat: bool) -> Result<(), SamplerError> {
    let dir = dir.as_ref();
    let io = |p: &Path, e: std::io::Error| SamplerError::Io {
        path: p.display().to_string(),
        message: e.to_string(),
    };
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut manifest = SplitManifest {
        task: split.task,
        seed: split.seed,
        flat_features: flat,
        counts: HashMap::new(),
        lexemes: HashMap::new(),
    };
    for s in SplitName::ALL {
        let path = dir.join(format!("{}.tsv", s.name()));
        std::fs::write(&path, render_split(split.examples(s), flat)).map_err(|e| io(&path, e))?;
        manifest.counts.insert(s.name(), split.examples(s).len());
        manifest.lexemes.insert(s.name(), split.split_lexemes(s));
    }
    let path = dir.join("manifest.json");
    let json = serde_json::to_value(&manifest).expect("manifest serializes");
    // serde_json sorts object keys, which keeps the file byte-stable.
    let text = serde_json::to_string_pretty(&json).expect("manifest serializes");
    std::fs::write(&path, text + "\n").map_err(|e| io(&path, e))
}

/// Parses one task file. Features may be nested or flattened. Reinflection
/// rows carry no lemma, so their examples get an empty one.
pub fn parse_task_file(
    text: &str,
    origin: &str,
    task: TaskKind,
    inv: &FeatureInventory,
) -> Result<Vec<TaskExample>, SamplerError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let bad = |message: String| SamplerError::Malformed {
            path: origin.to_owned(),
            line: i + 1,
            message,
        };
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != task.columns() {
            return Err(bad(format!("expected {} columns, found {}", task.columns(), cols.len())));
        }
        let feats = |s: &str| FeatureBundle::parse_any(s, inv).map_err(|e: FeatError| bad(e.to_string()));
        out.push(match task {
            TaskKind::Inflection => TaskExample::Inflection {
                lemma: cols[0].to_owned(),
                bundle: feats(cols[1])?,
                form: cols[2].to_owned(),
            },
            TaskKind::Reinflection => TaskExample::Reinflection {
                lemma: String::new(),
                source_bundle: feats(cols[0])?,
                source_form: cols[1].to_owned(),
                target_bundle: feats(cols[2])?,
                target_form: cols[3].to_owned(),
            },
            TaskKind::Analysis => TaskExample::Analysis {
                form: cols[0].to_owned(),
                lemma: cols[1].to_owned(),
                bundle: feats(cols[2])?,
            },
        });
    }
    Ok(out)
}

pub fn load_task_file(path: impl AsRef<Path>, task: TaskKind, inv: &FeatureInventory) -> Result<Vec<TaskExample>, SamplerError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| SamplerError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_task_file(&text, &path.display().to_string(), task, inv)
}
