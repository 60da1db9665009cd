use std::collections::HashMap;
use std::fmt;
use std::num::NonZeroU16;
use std::sync::{LazyLock, RwLock};

/// An interned, uppercase feature symbol (`IND`, `NOM`, `SG`, `3`, ...).
///
/// Symbols live in a process-wide table, so a `Tag` is two bytes and
/// compares by id. The table only grows; the feature vocabulary is small.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tag(NonZeroU16);

struct Interner {
    names: Vec<&'static str>,
    ids: HashMap<&'static str, Tag>,
}

static INTERNER: LazyLock<RwLock<Interner>> = LazyLock::new(|| {
    RwLock::new(Interner {
        names: Vec::new(),
        ids: HashMap::new(),
    })
});

impl Tag {
    /// Interns `name` after uppercasing it.
    pub fn new(name: &str) -> Tag {
        if !name.chars().any(char::is_lowercase) {
            if let Some(tag) = Tag::lookup_exact(name) {
                return tag;
            }
        }
        let upper = name.to_uppercase();
        if let Some(tag) = Tag::lookup_exact(&upper) {
            return tag;
        }
        let mut table = INTERNER.write().expect("tag interner poisoned");
        if let Some(&tag) = table.ids.get(upper.as_str()) {
            return tag;
        }
        let id = u16::try_from(table.names.len() + 1).expect("tag interner overflow");
        let leaked: &'static str = Box::leak(upper.into_boxed_str());
        let tag = Tag(NonZeroU16::new(id).unwrap());
        table.names.push(leaked);
        table.ids.insert(leaked, tag);
        tag
    }

    /// Returns the tag for `name` if it was interned before, without interning.
    pub fn lookup(name: &str) -> Option<Tag> {
        Tag::lookup_exact(&name.to_uppercase())
    }

    fn lookup_exact(upper: &str) -> Option<Tag> {
        INTERNER
            .read()
            .expect("tag interner poisoned")
            .ids
            .get(upper)
            .copied()
    }

    pub fn as_str(self) -> &'static str {
        INTERNER.read().expect("tag interner poisoned").names[self.0.get() as usize - 1]
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_is_case_insensitive() {
        assert_eq!(Tag::new("nom"), Tag::new("NOM"));
        assert_eq!(Tag::new("Acc").as_str(), "ACC");
        assert_eq!(Tag::lookup("acc"), Some(Tag::new("ACC")));
    }
}
