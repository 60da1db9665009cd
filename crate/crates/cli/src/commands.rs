use std::collections::{HashMap, HashSet};
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clausemorph::eval::{evaluate as score, read_predictions};
use clausemorph::featkit::{FeatureBundle, FeatureInventory};
use clausemorph::grammar::{realize_clause, GrammarSpec};
use clausemorph::lexicon::{
    load_frames, load_unimorph, load_word_list, sample_lexemes, Frame, FrameAnnotation, LexiconError, UnimorphData,
};
use clausemorph::paradigm::{self, export_tables, import_tables, SkippedLexeme};
use clausemorph::sampler::{export_task, learning_curve_subsets, load_task_file, sample_dataset, CurveMode, TaskKind};
use clausemorph::stats::{compute_stats, format_stats, Counting};
use clausemorph_annotate::{AppState, Session};

use crate::config::RunConfig;
use crate::UsageError;

fn load_grammar(cfg: &RunConfig, inv: &FeatureInventory) -> Result<GrammarSpec> {
    let path = cfg.path(&cfg.grammar, "grammar")?;
    let flags: Vec<&str> = cfg.grammar_flags.iter().map(String::as_str).collect();
    GrammarSpec::load_with_flags(path, inv, &flags).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn load_words(cfg: &RunConfig) -> Result<UnimorphData> {
    let data = load_unimorph(cfg.path(&cfg.unimorph, "unimorph")?)?;
    if data.duplicate_rows > 0 {
        log::warn!("{} duplicate rows in the word lexicon were ignored", data.duplicate_rows);
    }
    Ok(data)
}

/// The verbs to build: the most frequent eligible ones, up to the configured count.
fn sampled_lexemes(cfg: &RunConfig, words: &UnimorphData) -> Result<Vec<String>> {
    let freq = load_word_list(cfg.path(&cfg.freq, "freq")?)?;
    let exclude: HashSet<String> = match &cfg.exclude {
        Some(p) if p.exists() => load_word_list(p)?.into_iter().collect(),
        _ => HashSet::new(),
    };
    match sample_lexemes(&words.tables, &freq, cfg.build_lexemes, &exclude) {
        Ok(l) => Ok(l),
        Err(LexiconError::InsufficientLexemes { available: 0, .. }) => bail!("no eligible lexemes"),
        Err(LexiconError::InsufficientLexemes { requested, available }) => {
            log::warn!("only {available} of {requested} requested lexemes are eligible");
            Ok(sample_lexemes(&words.tables, &freq, available, &exclude)?)
        }
        Err(e) => Err(e.into()),
    }
}

pub fn validate_grammar(cfg: &RunConfig, probe: Option<&str>) -> Result<()> {
    let inv = FeatureInventory::default();
    let spec = load_grammar(cfg, &inv)?;
    let words = load_words(cfg)?;
    let wt = match probe {
        Some(l) => words.get(l).ok_or_else(|| anyhow!("probe `{l}` has no word table"))?,
        None => {
            let lemma = sampled_lexemes(cfg, &words)?
                .into_iter()
                .find(|l| words.get(l).is_some_and(|t| spec.check_word_table(t).is_ok()))
                .ok_or_else(|| anyhow!("no sampled verb has every form the grammar needs"))?;
            words.get(&lemma).expect("sampled from the word tables")
        }
    };
    spec.check_word_table(wt)
        .map_err(|e| anyhow!("probe `{}`: {e}", wt.lemma))?;
    let subject = spec
        .enumerable(spec.agreement)
        .and_then(|s| s.first())
        .ok_or_else(|| anyhow!("no enumerable values for {}", spec.agreement))?;
    let frame = Frame::new([spec.agreement], &inv).map_err(|e| anyhow!(e))?;
    let mut out = std::io::stdout().lock();
    writeln!(
        out,
        "{}: {} TAM cells, {} cases, probe `{}`",
        spec.language,
        spec.cells.len(),
        spec.cases.len(),
        wt.lemma
    )?;
    for cell in &spec.cells {
        let mut bundle: FeatureBundle = cell.tam.clone();
        bundle.set_arg(subject.clone(), &inv);
        let clause = realize_clause(&spec, wt, &frame, &bundle)
            .map_err(|e| anyhow!("line {}: {bundle}: {e}", cell.line))?;
        writeln!(out, "{bundle}\t{clause}")?;
    }
    Ok(())
}

pub fn build_tables(cfg: &RunConfig) -> Result<()> {
    let inv = FeatureInventory::default();
    let spec = load_grammar(cfg, &inv)?;
    let words = load_words(cfg)?;
    let lexemes = sampled_lexemes(cfg, &words)?;
    let frames = load_frames(cfg.path(&cfg.frames, "frames")?, &inv)?;
    let mut by_lemma: HashMap<&str, &FrameAnnotation> = frames.iter().map(|a| (a.lemma.as_str(), a)).collect();
    let mut annotations = Vec::with_capacity(lexemes.len());
    let mut unannotated = Vec::new();
    for l in &lexemes {
        match by_lemma.remove(l.as_str()) {
            Some(a) => annotations.push(a.clone()),
            None => unannotated.push(SkippedLexeme {
                lemma: l.clone(),
                error: "no frame annotation".into(),
            }),
        }
    }
    let (tables, mut manifest) = paradigm::build_tables(&spec, &words, &annotations);
    manifest.requested = lexemes.len();
    manifest.skipped.extend(unannotated);
    for s in &manifest.skipped {
        log::warn!("skipped {}: {}", s.lemma, s.error);
    }
    if tables.is_empty() {
        bail!("no tables built ({} lexemes skipped)", manifest.skipped.len());
    }
    std::fs::create_dir_all(&cfg.output).with_context(|| format!("creating {}", cfg.output.display()))?;
    export_tables(&tables, cfg.tables_path())?;
    let manifest_path = cfg.output.join("build_manifest.json");
    std::fs::write(&manifest_path, manifest.to_json() + "\n")
        .with_context(|| format!("writing {}", manifest_path.display()))?;
    println!(
        "{} tables, {} cells, {} skipped, {} ms -> {}",
        manifest.tables_built,
        manifest.cells,
        manifest.skipped.len(),
        manifest.duration_ms,
        cfg.tables_path().display()
    );
    Ok(())
}

fn parse_tasks(name: &str) -> Result<Vec<TaskKind>> {
    if name.eq_ignore_ascii_case("all") {
        return Ok(TaskKind::ALL.to_vec());
    }
    name.split(',')
        .map(|t| t.trim().parse::<TaskKind>().map_err(|e| UsageError(e).into()))
        .collect()
}

pub fn sample_tasks(cfg: &RunConfig, task: &str, tables: Option<PathBuf>) -> Result<()> {
    let tasks = parse_tasks(task)?;
    let inv = FeatureInventory::default();
    let path = tables.unwrap_or_else(|| cfg.tables_path());
    let started = Instant::now();
    let tables = import_tables(&path, &inv)?;
    log::info!("read {} tables in {:?}", tables.len(), started.elapsed());
    for task in tasks {
        let split = sample_dataset(&tables, &cfg.sample_config(task))?;
        let dir = cfg.output.join("tasks").join(task.name());
        export_task(&split, &dir, cfg.flat_features)?;
        println!(
            "{task}: {}/{}/{} examples -> {}",
            split.train.len(),
            split.dev.len(),
            split.test.len(),
            dir.display()
        );
        for (mode, points, prefix) in [
            (CurveMode::BySize, &cfg.curve_sizes, "size"),
            (CurveMode::ByLexemes, &cfg.curve_lexemes, "lexemes"),
        ] {
            if points.is_empty() {
                continue;
            }
            for (curve, point) in learning_curve_subsets(&split, &tables, mode, points)?.iter().zip(points) {
                let cdir = dir.join("curves").join(format!("{prefix}-{point}"));
                export_task(curve, &cdir, cfg.flat_features)?;
            }
            println!("{task}: {} {prefix} curve points", points.len());
        }
    }
    Ok(())
}

pub fn evaluate(task: TaskKind, gold: &Path, preds: &[PathBuf], report: Option<&Path>, show: usize) -> Result<()> {
    let inv = FeatureInventory::default();
    let gold_examples = load_task_file(gold, task, &inv)?;
    let runs = preds
        .iter()
        .map(|p| read_predictions(p).map_err(anyhow::Error::from))
        .collect::<Result<Vec<_>>>()?;
    let r = score(task, &gold_examples, &runs, &inv, show).with_context(|| format!("scoring against {}", gold.display()))?;
    let mut out = std::io::stdout().lock();
    for (p, run) in preds.iter().zip(&r.runs) {
        writeln!(out, "{}\t{:.1}\t{}/{}", p.display(), run.accuracy, run.correct, run.total)?;
        for m in &run.mismatches {
            writeln!(out, "  #{}: gold {:?} predicted {:?}", m.index + 1, m.gold, m.pred)?;
        }
    }
    writeln!(out, "{task}\t{}", r.summary)?;
    if let Some(path) = report {
        let json = serde_json::to_string_pretty(&r)?;
        std::fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

pub fn stats(cfg: &RunConfig, tables: &[String], counting: &str) -> Result<()> {
    let modes = match counting {
        "both" => vec![Counting::Flattened, Counting::Layered],
        "flattened" | "flat" => vec![Counting::Flattened],
        "layered" => vec![Counting::Layered],
        other => bail!(UsageError(format!("unknown counting `{other}`"))),
    };
    let inputs: Vec<(String, PathBuf)> = if tables.is_empty() {
        vec![(cfg.language.clone(), cfg.tables_path())]
    } else {
        tables
            .iter()
            .map(|t| match t.split_once('=') {
                Some((label, p)) => (label.to_owned(), PathBuf::from(p)),
                None => (cfg.language.clone(), PathBuf::from(t)),
            })
            .collect()
    };
    let inv = FeatureInventory::default();
    let mut rows = Vec::new();
    for (label, path) in inputs {
        let t = import_tables(&path, &inv)?;
        for &m in &modes {
            rows.push((label.clone(), compute_stats(&t, &inv, m)?));
        }
    }
    print!("{}", format_stats(&rows));
    Ok(())
}

pub fn serve(cfg: &RunConfig, host: &str, port: u16) -> Result<()> {
    let addr: SocketAddr = format!("{host}:{port}")
        .parse()
        .map_err(|e| UsageError(format!("bad address {host}:{port}: {e}")))?;
    let frames_path = cfg
        .frames
        .clone()
        .ok_or_else(|| UsageError("no frames path configured".into()))?;
    let state = AppState::uninitialized();
    let runtime = tokio::runtime::Runtime::new()?;
    let loader_state = state.clone();
    let loader_cfg = cfg.clone();
    runtime.spawn_blocking(move || {
        let load = || -> Result<Session> {
            let inv = FeatureInventory::default();
            let spec = load_grammar(&loader_cfg, &inv)?;
            let words = load_words(&loader_cfg)?;
            let queue = sampled_lexemes(&loader_cfg, &words)?;
            Ok(Session::new(spec, &words, queue, frames_path)?)
        };
        match load() {
            Ok(s) => {
                log::info!("session ready: {} lexemes", s.queue().len());
                loader_state.initialize(s);
            }
            Err(e) => log::error!("could not start the session: {e:#}"),
        }
    });
    eprintln!("serving on http://{addr}");
    runtime.block_on(clausemorph_annotate::serve(state, addr))?;
    Ok(())
}
