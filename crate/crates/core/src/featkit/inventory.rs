use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use super::{FeatError, Tag};

/// The attribute a feature value belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Attribute {
    Mood,
    Tense,
    Aspect,
    Sentence,
    Case,
    Person,
    Number,
    Gender,
    Misc,
}

impl Attribute {
    pub const ALL: [Attribute; 9] = [
        Attribute::Mood,
        Attribute::Tense,
        Attribute::Aspect,
        Attribute::Sentence,
        Attribute::Case,
        Attribute::Person,
        Attribute::Number,
        Attribute::Gender,
        Attribute::Misc,
    ];

    fn index(self) -> usize {
        self as usize
    }

    /// Attributes that live inside an argument slot.
    pub fn is_argument(self) -> bool {
        matches!(
            self,
            Attribute::Person | Attribute::Number | Attribute::Gender | Attribute::Misc
        )
    }

    fn keyword(self) -> &'static str {
        match self {
            Attribute::Mood => "mood",
            Attribute::Tense => "tense",
            Attribute::Aspect => "aspect",
            Attribute::Sentence => "sentence",
            Attribute::Case => "case",
            Attribute::Person => "person",
            Attribute::Number => "number",
            Attribute::Gender => "gender",
            Attribute::Misc => "misc",
        }
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, Copy)]
struct ValueInfo {
    attribute: Attribute,
    rank: u16,
}

/// The closed set of features a bundle may draw from, with the canonical
/// order of each attribute's values.
#[derive(Debug, Clone)]
pub struct FeatureInventory {
    values: HashMap<Tag, ValueInfo>,
    ordered: [Vec<Tag>; 9],
    locative: Vec<Tag>,
    combinable: Vec<Vec<Tag>>,
    aliases: HashMap<String, Option<Tag>>,
}

const DEFAULT_INVENTORY: &str = include_str!("../../data/inventory.txt");

impl Default for FeatureInventory {
    fn default() -> Self {
        FeatureInventory::parse(DEFAULT_INVENTORY).expect("shipped inventory is valid")
    }
}

impl FeatureInventory {
    pub fn load(path: impl AsRef<Path>) -> Result<FeatureInventory, FeatError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| FeatError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        FeatureInventory::parse(&text)
    }

    pub fn parse(text: &str) -> Result<FeatureInventory, FeatError> {
        let mut inv = FeatureInventory {
            values: HashMap::new(),
            ordered: Default::default(),
            locative: Vec::new(),
            combinable: Vec::new(),
            aliases: HashMap::new(),
        };
        let mut pending_combine = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut words = line.split_whitespace();
            let keyword = words.next().unwrap();
            let rest: Vec<&str> = words.collect();
            let attribute = match keyword {
                "mood" => Attribute::Mood,
                "tense" => Attribute::Tense,
                "aspect" => Attribute::Aspect,
                "sentence" => Attribute::Sentence,
                "case" | "locative" => Attribute::Case,
                "person" => Attribute::Person,
                "number" => Attribute::Number,
                "gender" => Attribute::Gender,
                "misc" => Attribute::Misc,
                "combine" => {
                    pending_combine.push((line_no, rest.iter().map(|v| v.to_uppercase()).collect::<Vec<_>>()));
                    continue;
                }
                "alias" => {
                    match rest.as_slice() {
                        [from] => {
                            inv.aliases.insert(from.to_uppercase(), None);
                        }
                        [from, to] => {
                            inv.aliases.insert(from.to_uppercase(), Some(Tag::new(to)));
                        }
                        _ => {
                            return Err(FeatError::InventorySyntax {
                                line: line_no,
                                message: "alias takes one or two words".into(),
                            })
                        }
                    }
                    continue;
                }
                other => {
                    return Err(FeatError::InventorySyntax {
                        line: line_no,
                        message: format!("unknown attribute `{other}`"),
                    })
                }
            };
            for value in rest {
                let tag = Tag::new(value);
                if let Some(prev) = inv.values.get(&tag) {
                    return Err(FeatError::InventorySyntax {
                        line: line_no,
                        message: format!("value {tag} already declared under {}", prev.attribute),
                    });
                }
                let list = &mut inv.ordered[attribute.index()];
                inv.values.insert(
                    tag,
                    ValueInfo {
                        attribute,
                        rank: list.len() as u16,
                    },
                );
                list.push(tag);
                if keyword == "locative" {
                    inv.locative.push(tag);
                }
            }
        }
        for (line, names) in pending_combine {
            let mut group = Vec::new();
            for name in names {
                match inv.classify(&name) {
                    Some((Attribute::Aspect, tag)) => group.push(tag),
                    _ => {
                        return Err(FeatError::InventorySyntax {
                            line,
                            message: format!("`{name}` is not a declared aspect"),
                        })
                    }
                }
            }
            inv.sort_by_rank(&mut group);
            inv.combinable.push(group);
        }
        for (alias, target) in &inv.aliases {
            if let Some(t) = target {
                if !inv.values.contains_key(t) {
                    return Err(FeatError::InventorySyntax {
                        line: 0,
                        message: format!("alias {alias} points at undeclared value {t}"),
                    });
                }
            }
        }
        Ok(inv)
    }

    /// Classifies one (possibly lowercase) feature name.
    pub fn classify(&self, name: &str) -> Option<(Attribute, Tag)> {
        let tag = Tag::lookup(name)?;
        self.values.get(&tag).map(|info| (info.attribute, tag))
    }

    pub fn attribute_of(&self, tag: Tag) -> Option<Attribute> {
        self.values.get(&tag).map(|info| info.attribute)
    }

    /// Resolves an input alias: `Some(None)` means the token carries no feature.
    pub fn alias(&self, name: &str) -> Option<Option<Tag>> {
        self.aliases.get(&name.to_uppercase()).copied()
    }

    pub fn rank(&self, tag: Tag) -> u16 {
        self.values.get(&tag).map(|i| i.rank).unwrap_or(u16::MAX)
    }

    pub fn values(&self, attribute: Attribute) -> &[Tag] {
        &self.ordered[attribute.index()]
    }

    /// Case labels in canonical slot order.
    pub fn cases(&self) -> &[Tag] {
        self.values(Attribute::Case)
    }

    pub fn is_locative(&self, case: Tag) -> bool {
        self.locative.contains(&case)
    }

    pub fn is_case(&self, tag: Tag) -> bool {
        self.attribute_of(tag) == Some(Attribute::Case)
    }

    /// Whether a set of aspects may appear together in one bundle.
    pub fn aspects_combine(&self, aspects: &[Tag]) -> bool {
        aspects.len() <= 1
            || self
                .combinable
                .iter()
                .any(|group| aspects.iter().all(|a| group.contains(a)))
    }

    pub fn sort_by_rank(&self, tags: &mut [Tag]) {
        tags.sort_by_key(|t| self.rank(*t));
    }

    /// Total number of declared values across all attributes.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
