use std::fmt;

use arrayvec::ArrayVec;
use smallvec::SmallVec;

use super::{Attribute, FeatError, FeatureInventory, Tag};

const MAX_MISC: usize = 4;
const MAX_MULTI: usize = 4;

/// One case-keyed argument: `ACC(3,SG,MASC)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ArgSlot {
    pub case: Tag,
    pub person: Option<Tag>,
    pub number: Option<Tag>,
    pub gender: Option<Tag>,
    misc: ArrayVec<Tag, MAX_MISC>,
}

impl ArgSlot {
    pub fn new(case: Tag) -> ArgSlot {
        ArgSlot {
            case,
            person: None,
            number: None,
            gender: None,
            misc: ArrayVec::new(),
        }
    }

    pub fn misc(&self) -> &[Tag] {
        &self.misc
    }

    pub fn has_misc(&self, tag: Tag) -> bool {
        self.misc.contains(&tag)
    }

    pub fn is_empty(&self) -> bool {
        self.person.is_none() && self.number.is_none() && self.gender.is_none() && self.misc.is_empty()
    }

    /// Slot values in canonical order: person, number, gender, misc.
    pub fn values(&self) -> impl Iterator<Item = Tag> + '_ {
        self.person
            .into_iter()
            .chain(self.number)
            .chain(self.gender)
            .chain(self.misc.iter().copied())
    }

    /// Adds one value, classified by the inventory.
    pub fn push_value(&mut self, value: Tag, inv: &FeatureInventory) -> Result<(), FeatError> {
        let dup = || FeatError::DuplicateAttribute(format!("{}({})", self.case, value));
        match inv.attribute_of(value) {
            Some(Attribute::Person) => {
                if self.person.replace(value).is_some() {
                    return Err(dup());
                }
            }
            Some(Attribute::Number) => {
                if self.number.replace(value).is_some() {
                    return Err(dup());
                }
            }
            Some(Attribute::Gender) => {
                if self.gender.replace(value).is_some() {
                    return Err(dup());
                }
            }
            Some(Attribute::Misc) => {
                if self.misc.contains(&value) {
                    return Err(dup());
                }
                self.misc
                    .try_push(value)
                    .map_err(|_| FeatError::MalformedSlot(format!("too many values in {} slot", self.case)))?;
                self.misc.sort_by_key(|t| inv.rank(*t));
            }
            _ => return Err(FeatError::UnknownFeature(value.to_string())),
        }
        Ok(())
    }

    /// Same slot with one misc value removed.
    pub fn without_misc(&self, tag: Tag) -> ArgSlot {
        let mut out = self.clone();
        out.misc.retain(|t| *t != tag);
        out
    }

    /// Person, number, gender and misc values agree (absent values only match
    /// absent ones), so formal and familiar 2nd person are different referents.
    pub fn same_referent(&self, other: &ArgSlot) -> bool {
        self.person == other.person && self.number == other.number && self.gender == other.gender && self.misc == other.misc
    }
}

impl fmt::Display for ArgSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.case)?;
        for (i, v) in self.values().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for ArgSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A layered inflectional feature bundle.
///
/// Always held in canonical order (aspects, sentence features and argument
/// slots sorted by inventory rank), so structural equality is bundle identity.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct FeatureBundle {
    pub mood: Option<Tag>,
    pub tense: Option<Tag>,
    aspect: ArrayVec<Tag, MAX_MULTI>,
    sentence: ArrayVec<Tag, MAX_MULTI>,
    args: SmallVec<[ArgSlot; 3]>,
}

impl FeatureBundle {
    pub fn aspect(&self) -> &[Tag] {
        &self.aspect
    }

    pub fn sentence(&self) -> &[Tag] {
        &self.sentence
    }

    pub fn args(&self) -> &[ArgSlot] {
        &self.args
    }

    pub fn arg(&self, case: Tag) -> Option<&ArgSlot> {
        self.args.iter().find(|s| s.case == case)
    }

    pub fn has_sentence(&self, tag: Tag) -> bool {
        self.sentence.contains(&tag)
    }

    pub fn is_empty(&self) -> bool {
        self.mood.is_none()
            && self.tense.is_none()
            && self.aspect.is_empty()
            && self.sentence.is_empty()
            && self.args.is_empty()
    }

    /// The bundle without its argument slots (the TAM and sentence portion).
    pub fn tam(&self) -> FeatureBundle {
        FeatureBundle {
            mood: self.mood,
            tense: self.tense,
            aspect: self.aspect.clone(),
            sentence: self.sentence.clone(),
            args: SmallVec::new(),
        }
    }

    /// Every non-argument feature, in canonical order.
    pub fn tam_features(&self) -> impl Iterator<Item = Tag> + '_ {
        self.mood
            .into_iter()
            .chain(self.tense)
            .chain(self.aspect.iter().copied())
            .chain(self.sentence.iter().copied())
    }

    /// Case labels of the argument slots, in canonical order.
    pub fn cases(&self) -> impl Iterator<Item = Tag> + '_ {
        self.args.iter().map(|s| s.case)
    }

    /// Adds a non-argument feature, enforcing single-valued attributes.
    pub fn push_feature(&mut self, tag: Tag, inv: &FeatureInventory) -> Result<(), FeatError> {
        let dup = || FeatError::DuplicateAttribute(tag.to_string());
        match inv.attribute_of(tag) {
            Some(Attribute::Mood) => {
                if self.mood.replace(tag).is_some() {
                    return Err(dup());
                }
            }
            Some(Attribute::Tense) => {
                if self.tense.replace(tag).is_some() {
                    return Err(dup());
                }
            }
            Some(Attribute::Aspect) => {
                if self.aspect.contains(&tag) {
                    return Err(dup());
                }
                self.aspect.try_push(tag).map_err(|_| dup())?;
                self.aspect.sort_by_key(|t| inv.rank(*t));
                if !inv.aspects_combine(&self.aspect) {
                    return Err(FeatError::DuplicateAttribute(format!(
                        "aspects {} do not combine",
                        join_tags(&self.aspect, "+")
                    )));
                }
            }
            Some(Attribute::Sentence) => {
                if self.sentence.contains(&tag) {
                    return Err(dup());
                }
                self.sentence.try_push(tag).map_err(|_| dup())?;
                self.sentence.sort_by_key(|t| inv.rank(*t));
            }
            _ => return Err(FeatError::UnknownFeature(tag.to_string())),
        }
        Ok(())
    }

    /// Adds an argument slot; one slot per case.
    pub fn push_arg(&mut self, slot: ArgSlot, inv: &FeatureInventory) -> Result<(), FeatError> {
        if !inv.is_case(slot.case) {
            return Err(FeatError::UnknownFeature(slot.case.to_string()));
        }
        if slot.is_empty() {
            return Err(FeatError::MalformedSlot(format!("{}()", slot.case)));
        }
        if self.arg(slot.case).is_some() {
            return Err(FeatError::DuplicateAttribute(format!("{} slot", slot.case)));
        }
        self.args.push(slot);
        self.args.sort_by_key(|s| inv.rank(s.case));
        Ok(())
    }

    /// Replaces an existing slot of the same case (or adds it).
    pub fn set_arg(&mut self, slot: ArgSlot, inv: &FeatureInventory) {
        self.args.retain(|s| s.case != slot.case);
        self.args.push(slot);
        self.args.sort_by_key(|s| inv.rank(s.case));
    }

    /// Total number of atomic features when flattened (`NOM(1,SG)` counts 2).
    pub fn flat_len(&self) -> usize {
        self.tam_features().count() + self.args.iter().map(|s| s.values().count()).sum::<usize>()
    }

    /// Number of atomic symbols in the layered notation (`NOM(1,SG)` counts 3).
    pub fn layered_len(&self) -> usize {
        self.flat_len() + self.args.len()
    }

    /// Canonical layered string, e.g. `IND;FUT;NOM(1,SG);ACC(3,SG,MASC)`.
    pub fn serialize(&self) -> String {
        self.to_string()
    }

    /// Flattened form: every slot value is prefixed with its case (`NOM1;NOMSG`).
    pub fn flatten(&self) -> String {
        let mut parts: Vec<String> = self.tam_features().map(|t| t.as_str().to_owned()).collect();
        for slot in &self.args {
            for v in slot.values() {
                parts.push(format!("{}{}", slot.case, v));
            }
        }
        parts.join(";")
    }

    /// Flattened feature tokens, without the `;` joins.
    pub fn flat_tokens(&self) -> Vec<String> {
        let mut parts: Vec<String> = self.tam_features().map(|t| t.as_str().to_owned()).collect();
        for slot in &self.args {
            parts.extend(slot.values().map(|v| format!("{}{}", slot.case, v)));
        }
        parts
    }

    /// Symbols of the layered notation: bare features, case labels and slot values.
    pub fn layered_tokens(&self) -> Vec<Tag> {
        let mut out: Vec<Tag> = self.tam_features().collect();
        for slot in &self.args {
            out.push(slot.case);
            out.extend(slot.values());
        }
        out
    }

    /// Parses the layered notation: `;`-separated features, `CASE(v,...)` slots.
    pub fn parse(text: &str, inv: &FeatureInventory) -> Result<FeatureBundle, FeatError> {
        let text = text.trim();
        if text.is_empty() {
            return Err(FeatError::Empty);
        }
        let mut bundle = FeatureBundle::default();
        for raw in text.split(';') {
            let token = raw.trim();
            if token.is_empty() {
                return Err(FeatError::MalformedSlot(format!("empty feature in `{text}`")));
            }
            if let Some(open) = token.find('(') {
                let Some(inner) = token[open + 1..].strip_suffix(')') else {
                    return Err(FeatError::MalformedSlot(token.to_owned()));
                };
                if inner.contains('(') || inner.contains(')') {
                    return Err(FeatError::MalformedSlot(token.to_owned()));
                }
                let case_name = token[..open].trim();
                let Some((Attribute::Case, case)) = inv.classify(case_name) else {
                    return Err(FeatError::UnknownFeature(case_name.to_uppercase()));
                };
                let mut slot = ArgSlot::new(case);
                for v in inner.split(',') {
                    let v = v.trim();
                    if v.is_empty() {
                        return Err(FeatError::MalformedSlot(token.to_owned()));
                    }
                    match inv.classify(v) {
                        Some((attr, tag)) if attr.is_argument() => slot.push_value(tag, inv)?,
                        _ => return Err(FeatError::UnknownFeature(v.to_uppercase())),
                    }
                }
                bundle.push_arg(slot, inv)?;
            } else if token.contains(')') {
                return Err(FeatError::MalformedSlot(token.to_owned()));
            } else {
                bundle.push_bare(token, inv)?;
            }
        }
        Ok(bundle)
    }

    fn push_bare(&mut self, token: &str, inv: &FeatureInventory) -> Result<(), FeatError> {
        if let Some(target) = inv.alias(token) {
            return match target {
                Some(tag) => self.push_feature(tag, inv),
                None => Ok(()),
            };
        }
        match inv.classify(token) {
            Some((Attribute::Case, _)) => Err(FeatError::MalformedSlot(format!("{} without values", token.to_uppercase()))),
            Some((attr, tag)) if !attr.is_argument() => self.push_feature(tag, inv),
            _ => Err(FeatError::UnknownFeature(token.to_uppercase())),
        }
    }

    /// Inverse of [`FeatureBundle::flatten`]; token order does not matter.
    pub fn unflatten(text: &str, inv: &FeatureInventory) -> Result<FeatureBundle, FeatError> {
        let text = text.trim();
        if text.is_empty() {
            return Err(FeatError::Empty);
        }
        let mut bundle = FeatureBundle::default();
        let mut slots: Vec<ArgSlot> = Vec::new();
        for raw in text.split(';') {
            let token = raw.trim().to_uppercase();
            if token.is_empty() {
                return Err(FeatError::MalformedSlot(format!("empty feature in `{text}`")));
            }
            if inv.alias(&token).is_some() || matches!(inv.classify(&token), Some((a, _)) if !a.is_argument() && a != Attribute::Case) {
                bundle.push_bare(&token, inv)?;
                continue;
            }
            let mut parses = inv.cases().iter().filter_map(|case| {
                let rest = token.strip_prefix(case.as_str())?;
                match inv.classify(rest) {
                    Some((attr, value)) if attr.is_argument() => Some((*case, value)),
                    _ => None,
                }
            });
            let (case, value) = match (parses.next(), parses.next()) {
                (Some(p), None) => p,
                (Some(_), Some(_)) => return Err(FeatError::AmbiguousToken(token)),
                (None, _) => {
                    let has_case_prefix = inv.cases().iter().any(|c| token.starts_with(c.as_str()));
                    return Err(if has_case_prefix {
                        FeatError::AmbiguousToken(token)
                    } else {
                        FeatError::UnknownFeature(token)
                    });
                }
            };
            match slots.iter_mut().find(|s| s.case == case) {
                Some(slot) => slot.push_value(value, inv)?,
                None => {
                    let mut slot = ArgSlot::new(case);
                    slot.push_value(value, inv)?;
                    slots.push(slot);
                }
            }
        }
        for slot in slots {
            bundle.push_arg(slot, inv)?;
        }
        Ok(bundle)
    }

    /// Accepts either the layered or the flattened notation.
    pub fn parse_any(text: &str, inv: &FeatureInventory) -> Result<FeatureBundle, FeatError> {
        if text.contains('(') {
            FeatureBundle::parse(text, inv)
        } else {
            FeatureBundle::unflatten(text, inv)
        }
    }

    /// Checks every value against `inv` and the per-attribute cardinalities.
    pub fn validate(&self, inv: &FeatureInventory) -> Result<(), FeatError> {
        let check = |tag: Tag, want: Attribute| {
            if inv.attribute_of(tag) == Some(want) {
                Ok(())
            } else {
                Err(FeatError::UnknownFeature(tag.to_string()))
            }
        };
        if let Some(m) = self.mood {
            check(m, Attribute::Mood)?;
        }
        if let Some(t) = self.tense {
            check(t, Attribute::Tense)?;
        }
        for &a in &self.aspect {
            check(a, Attribute::Aspect)?;
        }
        if !inv.aspects_combine(&self.aspect) {
            return Err(FeatError::DuplicateAttribute(join_tags(&self.aspect, "+")));
        }
        for &s in &self.sentence {
            check(s, Attribute::Sentence)?;
        }
        for (i, slot) in self.args.iter().enumerate() {
            check(slot.case, Attribute::Case)?;
            if self.args[..i].iter().any(|s| s.case == slot.case) {
                return Err(FeatError::DuplicateAttribute(format!("{} slot", slot.case)));
            }
            if slot.is_empty() {
                return Err(FeatError::MalformedSlot(slot.to_string()));
            }
            slot.person.map_or(Ok(()), |v| check(v, Attribute::Person))?;
            slot.number.map_or(Ok(()), |v| check(v, Attribute::Number))?;
            slot.gender.map_or(Ok(()), |v| check(v, Attribute::Gender))?;
            for &m in slot.misc() {
                check(m, Attribute::Misc)?;
            }
        }
        Ok(())
    }
}

fn join_tags(tags: &[Tag], sep: &str) -> String {
    tags.iter().map(|t| t.as_str()).collect::<Vec<_>>().join(sep)
}

impl fmt::Display for FeatureBundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut sep = |f: &mut fmt::Formatter<'_>| {
            if first {
                first = false;
                Ok(())
            } else {
                f.write_str(";")
            }
        };
        for t in self.tam_features() {
            sep(f)?;
            write!(f, "{t}")?;
        }
        for slot in &self.args {
            sep(f)?;
            write!(f, "{slot}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for FeatureBundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FeatureBundle({self})")
    }
}
