//! Paradigm statistics: table size, feature-set size, features per form and
//! form length.

use std::collections::{BTreeMap, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::featkit::{FeatureBundle, FeatureInventory, Tag};
use crate::paradigm::ClauseInflectionTable;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("no tables to summarize")]
    EmptyInput,
}

/// How argument slots are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Counting {
    /// `NOM(1,SG)` is `NOM1;NOMSG`: two features, each distinct per case.
    Flattened,
    /// `NOM(1,SG)` is the case label plus its values: three features, shared across cases.
    Layered,
}

impl Counting {
    pub fn name(self) -> &'static str {
        match self {
            Counting::Flattened => "flattened",
            Counting::Layered => "layered",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParadigmStats {
    pub counting: Counting,
    pub tables: usize,
    pub cells: usize,
    /// Cells of an intransitive table; the most common size if they differ.
    pub table_size: Option<usize>,
    pub feat_set_size: usize,
    pub feats_per_form: f64,
    /// Mean characters per form, spaces included.
    pub form_length: f64,
}

/// Number of features of `bundle` under `counting`.
pub fn feature_count(bundle: &FeatureBundle, counting: Counting) -> usize {
    match counting {
        Counting::Flattened => bundle.flat_len(),
        Counting::Layered => bundle.layered_len(),
    }
}

fn collect_features(bundle: &FeatureBundle, counting: Counting, set: &mut HashSet<(Option<Tag>, Tag)>) {
    for t in bundle.tam_features() {
        set.insert((None, t));
    }
    for slot in bundle.args() {
        match counting {
            Counting::Flattened => {
                for v in slot.values() {
                    set.insert((Some(slot.case), v));
                }
            }
            Counting::Layered => {
                set.insert((None, slot.case));
                for v in slot.values() {
                    set.insert((None, v));
                }
            }
        }
    }
}

pub fn compute_stats(
    tables: &[ClauseInflectionTable],
    inv: &FeatureInventory,
    counting: Counting,
) -> Result<ParadigmStats, StatsError> {
    if tables.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let subject = inv.cases().first().copied();
    let mut set = HashSet::new();
    let mut cells = 0usize;
    let mut feats = 0usize;
    let mut chars = 0usize;
    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for t in tables {
        for (bundle, form) in t.cells() {
            cells += 1;
            feats += feature_count(bundle, counting);
            chars += form.chars().count();
            collect_features(bundle, counting, &mut set);
        }
        if let Some(n) = subject.and_then(|s| t.intransitive_size(s)) {
            *sizes.entry(n).or_default() += 1;
        }
    }
    let table_size = sizes
        .iter()
        .max_by_key(|(size, count)| (**count, std::cmp::Reverse(**size)))
        .map(|(size, _)| *size);
    let mean = |x: usize| if cells == 0 { 0.0 } else { x as f64 / cells as f64 };
    Ok(ParadigmStats {
        counting,
        tables: tables.len(),
        cells,
        table_size,
        feat_set_size: set.len(),
        feats_per_form: mean(feats),
        form_length: mean(chars),
    })
}

/// A text table with one row per (label, stats).
pub fn format_stats(rows: &[(String, ParadigmStats)]) -> String {
    let mut out = format!(
        "{:<16} {:>8} {:>10} {:>14} {:>12} {:>8} {:>10}\n",
        "", "tables", "table size", "feat set size", "feats/form", "length", "counting"
    );
    for (label, s) in rows {
        let size = s.table_size.map(|n| n.to_string()).unwrap_or_else(|| "-".into());
        out.push_str(&format!(
            "{:<16} {:>8} {:>10} {:>14} {:>12.2} {:>8.2} {:>10}\n",
            label,
            s.tables,
            size,
            s.feat_set_size,
            s.feats_per_form,
            s.form_length,
            s.counting.name()
        ));
    }
    out
}
