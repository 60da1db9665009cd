use crate::featkit::{ArgSlot, FeatureBundle, Tag};
use crate::lexicon::{normalize_word_tag, Frame, WordInflectionTable};

use super::{CaseMarking, GrammarSpec, RealizeError, SubjectPolicy, TagPattern, TamCell, TemplateSlot};

/// A realized template position; subject and argument positions stay open
/// until [`realize_clause`] fills them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClauseToken {
    Word(String),
    Subject,
    Args,
}

/// Features visible to agreement conditions: the cell's TAM features plus the
/// controller's slot values.
pub(super) fn agreement_features(tam: &FeatureBundle, controller: Option<&ArgSlot>, spec: &GrammarSpec) -> Vec<Tag> {
    let mut feats: Vec<Tag> = tam.tam_features().collect();
    if let Some(c) = controller.or(spec.impersonal.as_ref()) {
        feats.extend(c.values());
    }
    feats
}

/// Fills `{PERSON}`/`{NUMBER}`/`{GENDER}` holes; the error names the missing value.
pub(super) fn fill_pattern(
    pattern: &TagPattern,
    controller: Option<&ArgSlot>,
    impersonal: &Option<ArgSlot>,
) -> Result<String, &'static str> {
    if !pattern.0.contains('{') {
        return Ok(pattern.0.clone());
    }
    let ctrl = controller.or(impersonal.as_ref());
    let mut parts = Vec::new();
    for part in pattern.0.split(';') {
        let filled = match part {
            "{PERSON}" => ctrl.and_then(|c| c.person).ok_or("person")?.as_str(),
            "{NUMBER}" => ctrl.and_then(|c| c.number).ok_or("number")?.as_str(),
            "{GENDER}" => ctrl.and_then(|c| c.gender).ok_or("gender")?.as_str(),
            other => other,
        };
        parts.push(filled);
    }
    Ok(normalize_word_tag(&parts.join(";")))
}

fn lookup(table: &WordInflectionTable, tag: &str) -> Result<String, RealizeError> {
    table
        .get_normalized(tag)
        .map(str::to_owned)
        .ok_or_else(|| RealizeError::MissingWordForm {
            lemma: table.lemma.clone(),
            tag: tag.to_owned(),
        })
}

fn controller<'a>(spec: &'a GrammarSpec, bundle: &'a FeatureBundle) -> Result<Option<&'a ArgSlot>, RealizeError> {
    match bundle.arg(spec.agreement) {
        Some(s) => Ok(Some(s)),
        None if spec.impersonal.is_some() => Ok(None),
        None => Err(RealizeError::FrameMismatch {
            bundle: bundle.to_string(),
            frame: format!("(grammar requires a {} argument)", spec.agreement),
        }),
    }
}

fn expand_cell(
    spec: &GrammarSpec,
    cell: &TamCell,
    word_table: &WordInflectionTable,
    bundle: &FeatureBundle,
    ctrl: Option<&ArgSlot>,
) -> Result<Vec<ClauseToken>, RealizeError> {
    let feats = agreement_features(&cell.tam, ctrl, spec);
    let fill = |p: &TagPattern| {
        fill_pattern(p, ctrl, &spec.impersonal).map_err(|missing| RealizeError::Agreement {
            pattern: p.0.clone(),
            bundle: bundle.to_string(),
            missing: missing.to_owned(),
        })
    };
    let mut out = Vec::with_capacity(cell.template.len() + 2);
    for slot in &cell.template {
        match slot {
            TemplateSlot::Subject => out.push(ClauseToken::Subject),
            TemplateSlot::Args => out.push(ClauseToken::Args),
            TemplateSlot::Negation => out.extend(spec.negation.iter().cloned().map(ClauseToken::Word)),
            TemplateSlot::Literal(alts) => out.extend(alts.select(&feats).iter().cloned().map(ClauseToken::Word)),
            TemplateSlot::MainVerb(tags) => {
                let tag = fill(tags.select(&feats))?;
                out.push(ClauseToken::Word(lookup(word_table, &tag)?));
            }
            TemplateSlot::Aux { lemma, tags } => {
                let table = spec.aux_table(lemma).ok_or_else(|| RealizeError::MissingWordForm {
                    lemma: lemma.clone(),
                    tag: tags.default.0.clone(),
                })?;
                let tag = fill(tags.select(&feats))?;
                out.push(ClauseToken::Word(lookup(table, &tag)?));
            }
        }
    }
    Ok(out)
}

/// Builds the periphrastic TAM frame of a clause: verb and auxiliary forms
/// chosen by agreement, subject and argument positions left open.
pub fn realize_tam(
    spec: &GrammarSpec,
    word_table: &WordInflectionTable,
    bundle: &FeatureBundle,
) -> Result<Vec<ClauseToken>, RealizeError> {
    let cell = spec
        .cell_for(bundle)
        .ok_or_else(|| RealizeError::NoMatchingCell(bundle.tam().to_string()))?;
    let ctrl = controller(spec, bundle)?;
    expand_cell(spec, cell, word_table, bundle, ctrl)
}

/// Surface form of one pronominal argument, with its case marker applied.
pub fn realize_pronoun(spec: &GrammarSpec, case: Tag, slot: &ArgSlot) -> Result<String, RealizeError> {
    realize_pronoun_at(spec, case, slot, 0)
}

fn realize_pronoun_at(spec: &GrammarSpec, case: Tag, slot: &ArgSlot, depth: usize) -> Result<String, RealizeError> {
    let mut keyed = slot.clone();
    keyed.case = case;
    let fail = || RealizeError::UnrealizablePronoun(keyed.to_string());
    if depth > 8 {
        return Err(fail());
    }
    match spec.pronouns.marking(case) {
        CaseMarking::Pronoun => spec.pronouns.direct(&keyed).map(str::to_owned).ok_or_else(fail),
        CaseMarking::Prefix { words, base } => {
            let inner = realize_pronoun_at(spec, *base, slot, depth + 1).map_err(|_| fail())?;
            Ok(format!("{} {}", words.join(" "), inner))
        }
        CaseMarking::Postposition { words, base } => {
            let inner = realize_pronoun_at(spec, *base, slot, depth + 1).map_err(|_| fail())?;
            Ok(format!("{} {}", inner, words.join(" ")))
        }
        CaseMarking::Fused { suffix, base } => {
            // A direct entry overrides the regular concatenation.
            if let Some(direct) = spec.pronouns.direct(&keyed) {
                return Ok(direct.to_owned());
            }
            let inner = realize_pronoun_at(spec, *base, slot, depth + 1).map_err(|_| fail())?;
            Ok(format!("{inner}{suffix}"))
        }
    }
}

/// Whether the subject is omitted for this bundle.
pub fn drops_subject(spec: &GrammarSpec, bundle: &FeatureBundle) -> bool {
    match &spec.subject_policy {
        SubjectPolicy::Overt => false,
        SubjectPolicy::ProDrop => true,
        SubjectPolicy::PartialProDrop(conds) => {
            let feats = agreement_features(&bundle.tam(), bundle.arg(spec.agreement), spec);
            conds.iter().any(|c| c.holds(&feats))
        }
    }
}

/// Non-subject argument slots in surface order.
fn ordered_objects<'a>(spec: &GrammarSpec, cell: &TamCell, bundle: &'a FeatureBundle) -> Vec<&'a ArgSlot> {
    let order = cell.order.as_deref().unwrap_or(&spec.argument_order);
    let mut objs: Vec<&ArgSlot> = bundle.args().iter().filter(|s| s.case != spec.agreement).collect();
    // Stable: unlisted cases keep canonical order after the listed ones.
    objs.sort_by_key(|s| order.iter().position(|c| *c == s.case).unwrap_or(usize::MAX));
    objs
}

pub(crate) fn check_frame(spec: &GrammarSpec, frame: &Frame, bundle: &FeatureBundle) -> Result<(), RealizeError> {
    if !bundle.cases().eq(frame.cases().iter().copied()) {
        return Err(RealizeError::FrameMismatch {
            bundle: bundle.to_string(),
            frame: frame.to_string(),
        });
    }
    if let Some(c) = frame.cases().iter().find(|c| !spec.supports_case(**c)) {
        return Err(RealizeError::UnsupportedCase(c.to_string()));
    }
    Ok(())
}

/// Fills the open subject and argument positions of `tokens` and joins the
/// clause with single spaces.
pub(crate) fn assemble(
    spec: &GrammarSpec,
    bundle: &FeatureBundle,
    tokens: &[ClauseToken],
) -> Result<String, RealizeError> {
    let cell = spec
        .cell_for(bundle)
        .ok_or_else(|| RealizeError::NoMatchingCell(bundle.tam().to_string()))?;
    let mut out = String::with_capacity(48);
    let mut push = |piece: &str| {
        for w in piece.split_whitespace() {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(w);
        }
    };
    for token in tokens {
        match token {
            ClauseToken::Word(w) => push(w),
            ClauseToken::Subject => {
                if let Some(subj) = bundle.arg(spec.agreement) {
                    if !drops_subject(spec, bundle) {
                        push(&realize_pronoun(spec, subj.case, subj)?);
                    }
                }
            }
            ClauseToken::Args => {
                for obj in ordered_objects(spec, cell, bundle) {
                    push(&realize_pronoun(spec, obj.case, obj)?);
                }
            }
        }
    }
    Ok(out)
}

/// Realizes the clause form of `bundle` for a lexeme used in `frame`.
pub fn realize_clause(
    spec: &GrammarSpec,
    word_table: &WordInflectionTable,
    frame: &Frame,
    bundle: &FeatureBundle,
) -> Result<String, RealizeError> {
    check_frame(spec, frame, bundle)?;
    let tokens = realize_tam(spec, word_table, bundle)?;
    assemble(spec, bundle, &tokens)
}

impl GrammarSpec {
    /// Checks that `word_table` has every main-verb form some cell can select.
    pub fn check_word_table(&self, word_table: &WordInflectionTable) -> Result<(), RealizeError> {
        let controllers = super::parse::agreement_controllers(self);
        for cell in &self.cells {
            for ctrl in &controllers {
                let feats = agreement_features(&cell.tam, ctrl.as_ref(), self);
                for slot in &cell.template {
                    if let TemplateSlot::MainVerb(tags) = slot {
                        let pattern = tags.select(&feats);
                        let tag = fill_pattern(pattern, ctrl.as_ref(), &self.impersonal).map_err(|missing| {
                            RealizeError::Agreement {
                                pattern: pattern.0.clone(),
                                bundle: cell.tam.to_string(),
                                missing: missing.to_owned(),
                            }
                        })?;
                        lookup(word_table, &tag)?;
                    }
                }
            }
        }
        Ok(())
    }

}
