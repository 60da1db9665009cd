use std::collections::HashMap;
use std::path::Path;

use crate::featkit::{ArgSlot, Attribute, FeatureBundle, FeatureInventory, Tag};
use crate::lexicon::{load_unimorph, normalize_word_tag, WordInflectionTable};

use super::realize::{agreement_features, fill_pattern};
use super::{
    Alternatives, CaseMarking, Condition, GrammarError, GrammarSpec, PronounTable, ReflexivePolicy, SubjectPolicy,
    TagPattern, TamCell, TemplateSlot,
};

struct Builder<'a> {
    inv: &'a FeatureInventory,
    language: Option<String>,
    cases: Option<(usize, Vec<Tag>)>,
    agreement: Option<Tag>,
    subject_policy: SubjectPolicy,
    order: Vec<Tag>,
    negation: Vec<String>,
    reflexive: ReflexivePolicy,
    impersonal: Option<ArgSlot>,
    enumerate: HashMap<Option<Tag>, (usize, Vec<ArgSlot>)>,
    marking: HashMap<Tag, (usize, CaseMarking)>,
    pronouns: HashMap<ArgSlot, (usize, String)>,
    cells: Vec<TamCell>,
    aux: HashMap<String, WordInflectionTable>,
}

fn syntax(line: usize, message: impl Into<String>) -> GrammarError {
    GrammarError::Syntax {
        line,
        message: message.into(),
    }
}

pub(super) fn parse_grammar(
    text: &str,
    base_dir: Option<&Path>,
    inv: &FeatureInventory,
    flags: &[&str],
    aux: Vec<WordInflectionTable>,
) -> Result<GrammarSpec, GrammarError> {
    let mut b = Builder {
        inv,
        language: None,
        cases: None,
        agreement: None,
        subject_policy: SubjectPolicy::Overt,
        order: Vec::new(),
        negation: Vec::new(),
        reflexive: ReflexivePolicy::None,
        impersonal: None,
        enumerate: HashMap::new(),
        marking: HashMap::new(),
        pronouns: HashMap::new(),
        cells: Vec::new(),
        aux: aux.into_iter().map(|t| (t.lemma.clone(), t)).collect(),
    };
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let mut line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('?') {
            let (flag, body) = rest.split_once(char::is_whitespace).ok_or_else(|| syntax(line_no, "flag line without body"))?;
            if !flags.contains(&flag) {
                continue;
            }
            line = body.trim();
        }
        b.directive(line, line_no, base_dir)?;
    }
    b.finish()
}

/// `#` starts a comment unless inside quotes.
fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

/// Splits on whitespace, keeping `"..."` together (quotes removed).
fn words(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    for c in text.chars() {
        match c {
            '"' => {
                quoted = !quoted;
                if !quoted {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c if c.is_whitespace() && !quoted => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

impl Builder<'_> {
    fn case(&self, name: &str, line: usize) -> Result<Tag, GrammarError> {
        match self.inv.classify(name) {
            Some((Attribute::Case, tag)) => Ok(tag),
            _ => Err(syntax(line, format!("`{name}` is not a case in the inventory"))),
        }
    }

    fn feature_list(&self, text: &str, line: usize) -> Result<Vec<Tag>, GrammarError> {
        text.split(',')
            .map(|v| {
                let v = v.trim();
                self.inv
                    .classify(v)
                    .map(|(_, t)| t)
                    .ok_or_else(|| syntax(line, format!("unknown feature `{v}`")))
            })
            .collect()
    }

    /// `1,SG,MASC` as a slot of `case`.
    fn slot_values(&self, case: Tag, text: &str, line: usize) -> Result<ArgSlot, GrammarError> {
        let mut slot = ArgSlot::new(case);
        for v in text.split(',') {
            let v = v.trim();
            match self.inv.classify(v) {
                Some((attr, tag)) if attr.is_argument() => slot
                    .push_value(tag, self.inv)
                    .map_err(|source| GrammarError::Feature { line, source })?,
                _ => return Err(syntax(line, format!("`{v}` is not an argument value"))),
            }
        }
        if slot.is_empty() {
            return Err(syntax(line, "empty argument values"));
        }
        Ok(slot)
    }

    fn directive(&mut self, line: &str, n: usize, base_dir: Option<&Path>) -> Result<(), GrammarError> {
        let (keyword, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match keyword {
            "language" => self.language = Some(rest.to_owned()),
            "cases" => {
                let cases = rest
                    .split_whitespace()
                    .map(|c| self.case(c, n))
                    .collect::<Result<Vec<_>, _>>()?;
                self.cases = Some((n, cases));
            }
            "agreement" => self.agreement = Some(self.case(rest, n)?),
            "subject" => {
                self.subject_policy = if rest == "overt" {
                    SubjectPolicy::Overt
                } else if rest == "pro-drop" {
                    SubjectPolicy::ProDrop
                } else if let Some(conds) = rest.strip_prefix("pro-drop when") {
                    let conds = conds
                        .split(';')
                        .map(|c| self.feature_list(c, n).map(Condition))
                        .collect::<Result<Vec<_>, _>>()?;
                    SubjectPolicy::PartialProDrop(conds)
                } else {
                    return Err(syntax(n, format!("unknown subject policy `{rest}`")));
                };
            }
            "order" => {
                self.order = rest
                    .split_whitespace()
                    .map(|c| self.case(c, n))
                    .collect::<Result<Vec<_>, _>>()?;
            }
            "negation" => self.negation = words(rest),
            "reflexive" => {
                self.reflexive = match rest {
                    "none" => ReflexivePolicy::None,
                    "coreference" => ReflexivePolicy::Coreference,
                    other => return Err(syntax(n, format!("unknown reflexive policy `{other}`"))),
                }
            }
            "impersonal" => self.impersonal = Some(self.slot_values(Tag::new("NOM"), rest, n)?),
            "aux-table" => {
                let dir = base_dir.ok_or_else(|| syntax(n, "aux-table needs a grammar loaded from a file"))?;
                let path = dir.join(rest);
                let data = load_unimorph(&path).map_err(|e| syntax(n, e.to_string()))?;
                for t in data.tables {
                    self.aux.insert(t.lemma.clone(), t);
                }
            }
            "enumerate" => {
                let mut it = rest.split_whitespace();
                let target = it.next().ok_or_else(|| syntax(n, "enumerate needs a case"))?;
                let case = if target == "*" { None } else { Some(self.case(target, n)?) };
                let placeholder = case.unwrap_or_else(|| Tag::new("NOM"));
                let values = it
                    .map(|v| self.slot_values(placeholder, v, n))
                    .collect::<Result<Vec<_>, _>>()?;
                let entry = self.enumerate.entry(case).or_insert((n, Vec::new()));
                for v in values {
                    if !entry.1.contains(&v) {
                        entry.1.push(v);
                    }
                }
            }
            "case" => {
                let w = words(rest);
                let case = self.case(w.first().ok_or_else(|| syntax(n, "case needs a label"))?, n)?;
                let marking = match w.get(1).map(String::as_str) {
                    Some("pronoun") if w.len() == 2 => CaseMarking::Pronoun,
                    Some(kind @ ("prefix" | "postposition" | "fused")) if w.len() == 4 => {
                        let base = self.case(&w[3], n)?;
                        match kind {
                            "prefix" => CaseMarking::Prefix {
                                words: w[2].split_whitespace().map(str::to_owned).collect(),
                                base,
                            },
                            "postposition" => CaseMarking::Postposition {
                                words: w[2].split_whitespace().map(str::to_owned).collect(),
                                base,
                            },
                            _ => CaseMarking::Fused {
                                suffix: w[2].clone(),
                                base,
                            },
                        }
                    }
                    _ => {
                        return Err(syntax(
                            n,
                            "expected `case <CASE> pronoun` or `case <CASE> prefix|postposition|fused <marker> <BASE>`",
                        ))
                    }
                };
                self.marking.insert(case, (n, marking));
            }
            "pronoun" => {
                let w = words(rest);
                if w.len() < 3 {
                    return Err(syntax(n, "expected `pronoun <CASE> <values> <form>`"));
                }
                let case = self.case(&w[0], n)?;
                let slot = self.slot_values(case, &w[1], n)?;
                let form = w[2..].join(" ");
                if self.pronouns.contains_key(&slot) {
                    return Err(GrammarError::DuplicatePronoun {
                        line: n,
                        slot: slot.to_string(),
                    });
                }
                self.pronouns.insert(slot, (n, form));
            }
            "cell" => {
                let cell = self.cell(rest, n)?;
                if let Some(prev) = self.cells.iter().find(|c| c.tam == cell.tam) {
                    return Err(GrammarError::DuplicateTamCell {
                        line: n,
                        first: prev.line,
                        tam: cell.tam.to_string(),
                    });
                }
                self.cells.push(cell);
            }
            other => return Err(syntax(n, format!("unknown directive `{other}`"))),
        }
        Ok(())
    }

    fn cell(&self, rest: &str, n: usize) -> Result<TamCell, GrammarError> {
        let (head, template) = rest
            .split_once(':')
            .ok_or_else(|| syntax(n, "expected `cell <TAM> [order=..] : <template>`"))?;
        let mut head_words = head.split_whitespace();
        let tam_text = head_words.next().ok_or_else(|| syntax(n, "cell without TAM features"))?;
        let tam = FeatureBundle::parse(tam_text, self.inv).map_err(|source| GrammarError::Feature { line: n, source })?;
        if !tam.args().is_empty() {
            return Err(syntax(n, "cell features may not contain argument slots"));
        }
        let mut order = None;
        for w in head_words {
            let list = w
                .strip_prefix("order=")
                .ok_or_else(|| syntax(n, format!("unexpected `{w}` in cell header")))?;
            order = Some(list.split(',').map(|c| self.case(c, n)).collect::<Result<Vec<_>, _>>()?);
        }
        let template = self.template(template, n)?;
        let count = |pred: fn(&TemplateSlot) -> bool| template.iter().filter(|s| pred(s)).count();
        if count(|s| matches!(s, TemplateSlot::MainVerb(_))) != 1 {
            return Err(syntax(n, "template needs exactly one VERB<..> slot"));
        }
        if count(|s| matches!(s, TemplateSlot::Args)) != 1 {
            return Err(syntax(n, "template needs exactly one ARGS slot"));
        }
        if count(|s| matches!(s, TemplateSlot::Subject)) > 1 {
            return Err(syntax(n, "template has more than one SUBJ slot"));
        }
        Ok(TamCell {
            tam,
            template,
            order,
            line: n,
        })
    }

    fn template(&self, text: &str, n: usize) -> Result<Vec<TemplateSlot>, GrammarError> {
        let mut slots = Vec::new();
        let chars: Vec<char> = text.chars().collect();
        let mut i = 0;
        let grab = |i: &mut usize, close: char| -> Result<String, GrammarError> {
            let start = *i + 1;
            let end = chars[start..]
                .iter()
                .position(|&c| c == close)
                .map(|p| start + p)
                .ok_or_else(|| syntax(n, format!("missing `{close}` in template")))?;
            *i = end + 1;
            Ok(chars[start..end].iter().collect())
        };
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() {
                i += 1;
            } else if c == '"' {
                let lit = grab(&mut i, '"')?;
                slots.push(TemplateSlot::Literal(Alternatives::single(
                    lit.split_whitespace().map(str::to_owned).collect(),
                )));
            } else if c == '{' {
                let body = grab(&mut i, '}')?;
                let alts = self.alternatives(&body, n, |v| {
                    let w = words(v);
                    if w.is_empty() {
                        Err("empty literal".into())
                    } else {
                        Ok(w.iter().flat_map(|x| x.split_whitespace().map(str::to_owned)).collect())
                    }
                })?;
                slots.push(TemplateSlot::Literal(alts));
            } else {
                let start = i;
                while i < chars.len() && !chars[i].is_whitespace() && chars[i] != '<' {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                if i < chars.len() && chars[i] == '<' {
                    let body = grab(&mut i, '>')?;
                    let tags = self.alternatives(&body, n, |v| Ok(TagPattern(normalize_pattern(v))))?;
                    if word == "VERB" {
                        slots.push(TemplateSlot::MainVerb(tags));
                    } else {
                        slots.push(TemplateSlot::Aux { lemma: word, tags });
                    }
                } else {
                    slots.push(match word.as_str() {
                        "SUBJ" => TemplateSlot::Subject,
                        "ARGS" => TemplateSlot::Args,
                        "NEG" => TemplateSlot::Negation,
                        _ => TemplateSlot::Literal(Alternatives::single(vec![word])),
                    });
                }
            }
        }
        Ok(slots)
    }

    /// `cond: value | cond: value | default`.
    fn alternatives<T>(
        &self,
        body: &str,
        n: usize,
        value: impl Fn(&str) -> Result<T, String>,
    ) -> Result<Alternatives<T>, GrammarError> {
        let parts: Vec<&str> = body.split('|').map(str::trim).collect();
        let mut cases = Vec::new();
        let (last, init) = parts.split_last().ok_or_else(|| syntax(n, "empty alternatives"))?;
        for p in init {
            let (cond, v) = p
                .split_once(':')
                .ok_or_else(|| syntax(n, format!("alternative `{p}` needs a condition (only the last is a default)")))?;
            let cond = Condition(self.feature_list(cond, n)?);
            cases.push((cond, value(v.trim()).map_err(|m| syntax(n, m))?));
        }
        if last.contains(':') && !last.starts_with('"') {
            return Err(syntax(n, "the last alternative must be an unconditioned default"));
        }
        let default = value(last).map_err(|m| syntax(n, m))?;
        Ok(Alternatives { cases, default })
    }

    fn finish(self) -> Result<GrammarSpec, GrammarError> {
        let inv = self.inv;
        let language = self.language.ok_or_else(|| syntax(0, "missing `language` directive"))?;
        let (cases_line, cases) = self.cases.ok_or_else(|| syntax(0, "missing `cases` directive"))?;
        let agreement = self.agreement.unwrap_or_else(|| Tag::new("NOM"));
        if !cases.contains(&agreement) {
            return Err(syntax(cases_line, format!("agreement case {agreement} is not among the grammar's cases")));
        }
        if self.cells.is_empty() {
            return Err(syntax(0, "grammar has no cells"));
        }
        let rflx = Tag::new("RFLX");
        if self.reflexive == ReflexivePolicy::Coreference && inv.attribute_of(rflx) != Some(Attribute::Misc) {
            return Err(syntax(0, "reflexive coreference needs RFLX in the inventory"));
        }

        let mut enumerable = HashMap::new();
        for &case in &cases {
            let (_, values) = self
                .enumerate
                .get(&Some(case))
                .or_else(|| self.enumerate.get(&None))
                .ok_or_else(|| syntax(cases_line, format!("no `enumerate` line covers case {case}")))?;
            let slots: Vec<ArgSlot> = values
                .iter()
                .map(|v| {
                    let mut s = v.clone();
                    s.case = case;
                    s
                })
                .collect();
            enumerable.insert(case, slots);
        }

        let mut marking = HashMap::new();
        for (case, (line, m)) in self.marking {
            match &m {
                CaseMarking::Pronoun => {}
                CaseMarking::Prefix { base, .. }
                | CaseMarking::Postposition { base, .. }
                | CaseMarking::Fused { base, .. } => {
                    if *base == case {
                        return Err(syntax(line, format!("case {case} cannot be marked on itself")));
                    }
                }
            }
            marking.insert(case, m);
        }
        let pronouns = PronounTable {
            forms: self.pronouns.into_iter().map(|(k, (_, v))| (k, v)).collect(),
            marking,
        };
        let cell_index = self.cells.iter().enumerate().map(|(i, c)| (c.tam.clone(), i)).collect();

        let spec = GrammarSpec {
            language,
            inventory: inv.clone(),
            cases,
            agreement,
            subject_policy: self.subject_policy,
            argument_order: self.order,
            negation: self.negation,
            reflexive: self.reflexive,
            impersonal: self.impersonal.map(|mut s| {
                s.case = agreement;
                s
            }),
            cells: self.cells,
            pronouns,
            enumerable,
            aux: self.aux,
            cell_index,
            rflx,
        };
        check_pronouns(&spec, cases_line)?;
        check_aux(&spec)?;
        Ok(spec)
    }
}

fn normalize_pattern(v: &str) -> String {
    // Holes like {PERSON} survive sorting as ordinary components.
    normalize_word_tag(v)
}

/// Every enumerable slot (and its reflexive variant where one can arise) must
/// be realizable for every declared case.
fn check_pronouns(spec: &GrammarSpec, cases_line: usize) -> Result<(), GrammarError> {
    let subjects = spec.enumerable(spec.agreement).unwrap_or(&[]).to_vec();
    for &case in &spec.cases {
        for slot in spec.enumerable(case).unwrap() {
            let coref = case != spec.agreement && spec.reflexive == ReflexivePolicy::Coreference;
            let mut needed = Vec::new();
            if !coref || subjects.iter().any(|s| !s.same_referent(slot)) || subjects.is_empty() {
                needed.push(slot.clone());
            }
            if coref && subjects.iter().any(|s| s.same_referent(slot)) {
                let mut r = slot.clone();
                r.push_value(spec.rflx, &spec.inventory)
                    .map_err(|source| GrammarError::Feature { line: cases_line, source })?;
                needed.push(r);
            }
            for s in needed {
                if super::realize::realize_pronoun(spec, case, &s).is_err() {
                    return Err(GrammarError::IncompletePronounTable {
                        line: cases_line,
                        slot: s.to_string(),
                        needed_by: format!("enumerable values of {case}"),
                    });
                }
            }
        }
    }
    Ok(())
}

/// Auxiliary lemmas must have tables, and every tag an auxiliary slot can
/// select must exist in that table.
fn check_aux(spec: &GrammarSpec) -> Result<(), GrammarError> {
    let controllers = agreement_controllers(spec);
    for cell in &spec.cells {
        for slot in &cell.template {
            let TemplateSlot::Aux { lemma, tags } = slot else { continue };
            let table = spec.aux_table(lemma).ok_or_else(|| GrammarError::MissingAuxTable {
                line: cell.line,
                lemma: lemma.clone(),
            })?;
            for controller in &controllers {
                let feats = agreement_features(&cell.tam, controller.as_ref(), spec);
                let pattern = tags.select(&feats);
                let tag = fill_pattern(pattern, controller.as_ref(), &spec.impersonal).map_err(|missing| {
                    GrammarError::UnknownTag {
                        line: cell.line,
                        lemma: lemma.clone(),
                        tag: format!("{} (controller lacks {missing})", pattern.0),
                    }
                })?;
                if table.get_normalized(&tag).is_none() {
                    return Err(GrammarError::UnknownTag {
                        line: cell.line,
                        lemma: lemma.clone(),
                        tag,
                    });
                }
            }
        }
    }
    Ok(())
}

/// Every agreement controller a bundle can carry: each enumerable subject, plus
/// none when the grammar allows impersonal clauses.
pub(super) fn agreement_controllers(spec: &GrammarSpec) -> Vec<Option<ArgSlot>> {
    let mut out: Vec<Option<ArgSlot>> = spec
        .enumerable(spec.agreement)
        .unwrap_or(&[])
        .iter()
        .cloned()
        .map(Some)
        .collect();
    if spec.impersonal.is_some() {
        out.push(None);
    }
    out
}
