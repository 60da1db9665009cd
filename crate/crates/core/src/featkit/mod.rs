//! Layered feature bundles: parsing, validation against a feature inventory,
//! canonical serialization and flattening.
//!
//! A bundle holds TAM and sentence features plus one argument slot per case:
//!
//! ```
//! use clausemorph::featkit::{parse_bundle, flatten_bundle, FeatureInventory};
//!
//! let inv = FeatureInventory::default();
//! let b = parse_bundle("ind;prs;nom(1,sg);acc(2,pl)", &inv).unwrap();
//! assert_eq!(b.to_string(), "IND;PRS;NOM(1,SG);ACC(2,PL)");
//! assert_eq!(flatten_bundle(&b), "IND;PRS;NOM1;NOMSG;ACC2;ACCPL");
//! ```

mod bundle;
mod inventory;
mod tag;

pub use bundle::{ArgSlot, FeatureBundle};
pub use inventory::{Attribute, FeatureInventory};
pub use tag::Tag;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeatError {
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("duplicate attribute: {0}")]
    DuplicateAttribute(String),
    #[error("malformed slot `{0}`")]
    MalformedSlot(String),
    #[error("empty feature string")]
    Empty,
    #[error("token `{0}` is neither a feature nor a case-prefixed argument value")]
    AmbiguousToken(String),
    #[error("inventory line {line}: {message}")]
    InventorySyntax { line: usize, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

pub fn parse_bundle(text: &str, inv: &FeatureInventory) -> Result<FeatureBundle, FeatError> {
    FeatureBundle::parse(text, inv)
}

pub fn serialize_bundle(bundle: &FeatureBundle) -> String {
    bundle.serialize()
}

pub fn flatten_bundle(bundle: &FeatureBundle) -> String {
    bundle.flatten()
}

pub fn unflatten_bundle(text: &str, inv: &FeatureInventory) -> Result<FeatureBundle, FeatError> {
    FeatureBundle::unflatten(text, inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn inv() -> FeatureInventory {
        FeatureInventory::default()
    }

    #[test]
    fn parses_ditransitive_future() {
        let inv = inv();
        let b = parse_bundle("IND;FUT;NOM(1,SG);ACC(3,SG,MASC);DAT(3,SG,FEM)", &inv).unwrap();
        assert_eq!(b.mood, Some(Tag::new("IND")));
        assert_eq!(b.tense, Some(Tag::new("FUT")));
        assert_eq!(b.args().len(), 3);
        let acc = b.arg(Tag::new("ACC")).unwrap();
        assert_eq!(acc.person, Some(Tag::new("3")));
        assert_eq!(acc.gender, Some(Tag::new("MASC")));
        let dat = b.arg(Tag::new("DAT")).unwrap();
        assert_eq!(dat.gender, Some(Tag::new("FEM")));
    }

    #[test]
    fn parses_bare_tam() {
        let b = parse_bundle("IND;PRS", &inv()).unwrap();
        assert_eq!(b.to_string(), "IND;PRS");
        assert!(b.args().is_empty());
    }

    #[test]
    fn duplicate_case_slot_is_rejected() {
        let err = parse_bundle("IND;NOM(1,SG);NOM(2,SG)", &inv()).unwrap_err();
        assert!(matches!(err, FeatError::DuplicateAttribute(_)));
    }

    #[test]
    fn two_values_for_one_attribute() {
        assert!(matches!(
            parse_bundle("IND;COND;PRS", &inv()),
            Err(FeatError::DuplicateAttribute(_))
        ));
        assert!(matches!(
            parse_bundle("IND;NOM(1,2)", &inv()),
            Err(FeatError::DuplicateAttribute(_))
        ));
    }

    #[test]
    fn malformed_slots() {
        let inv = inv();
        for bad in ["IND;NOM(1,SG", "IND;NOM()", "IND;NOM(1,,SG)", "IND;NOM1,SG)", "IND;NOM", "IND;;PRS"] {
            assert!(
                matches!(parse_bundle(bad, &inv), Err(FeatError::MalformedSlot(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn unknown_features() {
        let inv = inv();
        assert!(matches!(parse_bundle("IND;XYZ", &inv), Err(FeatError::UnknownFeature(_))));
        assert!(matches!(parse_bundle("IND;XYZ(1)", &inv), Err(FeatError::UnknownFeature(_))));
        assert!(matches!(parse_bundle("IND;NOM(4)", &inv), Err(FeatError::UnknownFeature(_))));
        assert!(matches!(parse_bundle("IND;NOM(PRS)", &inv), Err(FeatError::UnknownFeature(_))));
    }

    #[test]
    fn empty_input() {
        assert_eq!(parse_bundle("", &inv()), Err(FeatError::Empty));
        assert_eq!(serialize_bundle(&FeatureBundle::default()), "");
    }

    #[test]
    fn single_slot_serialization() {
        let inv = inv();
        let mut b = FeatureBundle::default();
        b.push_feature(Tag::new("IND"), &inv).unwrap();
        b.push_feature(Tag::new("FUT"), &inv).unwrap();
        let mut nom = ArgSlot::new(Tag::new("NOM"));
        nom.push_value(Tag::new("SG"), &inv).unwrap();
        nom.push_value(Tag::new("1"), &inv).unwrap();
        b.push_arg(nom, &inv).unwrap();
        assert_eq!(serialize_bundle(&b), "IND;FUT;NOM(1,SG)");
    }

    #[test]
    fn canonical_order_reorders_spanish_example() {
        let b = parse_bundle("dat(1,sg);imp;nom(2,sg);acc(3,sg,neut)", &inv()).unwrap();
        assert_eq!(serialize_bundle(&b), "IMP;NOM(2,SG);ACC(3,SG,NEUT);DAT(1,SG)");
    }

    #[test]
    fn canonical_order_of_aspects_and_sentence_features() {
        let b = parse_bundle("Q;NEG;PRF;PROG;PRS;IND", &inv()).unwrap();
        assert_eq!(b.to_string(), "IND;PRS;PROG;PRF;NEG;Q");
    }

    #[test]
    fn aliases() {
        let inv = inv();
        let b = parse_bundle("PRS;DECL;IND;PERF;NOM(2,SG)", &inv).unwrap();
        assert_eq!(b.to_string(), "IND;PRS;PRF;NOM(2,SG)");
    }

    #[test]
    fn non_combinable_aspects_are_rejected() {
        assert!(matches!(
            parse_bundle("IND;HAB;PROG", &inv()),
            Err(FeatError::DuplicateAttribute(_))
        ));
    }

    #[test]
    fn flatten_examples() {
        let inv = inv();
        let b = parse_bundle("IND;PRS;NOM(1,SG);ACC(2,PL)", &inv).unwrap();
        assert_eq!(flatten_bundle(&b), "IND;PRS;NOM1;NOMSG;ACC2;ACCPL");
        let b = parse_bundle("IND;PRS", &inv).unwrap();
        assert_eq!(flatten_bundle(&b), "IND;PRS");
        let b = parse_bundle("IND;FUT;NOM(1,SG);ACC(3,SG,MASC);DAT(3,SG,FEM)", &inv).unwrap();
        assert_eq!(
            flatten_bundle(&b),
            "IND;FUT;NOM1;NOMSG;ACC3;ACCSG;ACCMASC;DAT3;DATSG;DATFEM"
        );
    }

    #[test]
    fn unflatten_examples() {
        let inv = inv();
        let b = unflatten_bundle("IND;PRS;NOM1;NOMSG;ACC2;ACCPL", &inv).unwrap();
        assert_eq!(b, parse_bundle("IND;PRS;NOM(1,SG);ACC(2,PL)", &inv).unwrap());
        let b = unflatten_bundle("IND;PRS", &inv).unwrap();
        assert_eq!(b.to_string(), "IND;PRS");
        assert!(matches!(unflatten_bundle("NOMX", &inv), Err(FeatError::AmbiguousToken(_))));
        assert!(matches!(unflatten_bundle("FOO", &inv), Err(FeatError::UnknownFeature(_))));
    }

    #[test]
    fn unflatten_ignores_token_order() {
        let inv = inv();
        let b = unflatten_bundle("NOM1;NOMSG;PRS;IND", &inv).unwrap();
        assert_eq!(b.to_string(), "IND;PRS;NOM(1,SG)");
    }

    #[test]
    fn infr_is_a_mood_not_an_in_slot() {
        let b = unflatten_bundle("INFR;IN3;INPL", &inv()).unwrap();
        assert_eq!(b.to_string(), "INFR;IN(3,PL)");
    }

    #[test]
    fn feature_counts() {
        let b = parse_bundle("IND;FUT;NOM(1,SG);ACC(3,SG,MASC)", &inv()).unwrap();
        assert_eq!(b.flat_len(), 7);
        assert_eq!(b.layered_len(), 9);
    }

    // Random bundles over the default inventory.
    fn arb_slot(case: Tag) -> impl Strategy<Value = Option<ArgSlot>> {
        (
            prop::option::of(prop::sample::select(vec!["1", "2", "3"])),
            prop::option::of(prop::sample::select(vec!["SG", "PL"])),
            prop::option::of(prop::sample::select(vec!["MASC", "FEM", "NEUT"])),
            prop::bool::ANY,
            prop::bool::ANY,
        )
            .prop_map(move |(p, n, g, form, rflx)| {
                let inv = FeatureInventory::default();
                let mut slot = ArgSlot::new(case);
                for v in [p, n, g].into_iter().flatten() {
                    slot.push_value(Tag::new(v), &inv).unwrap();
                }
                if form {
                    slot.push_value(Tag::new("FORM"), &inv).unwrap();
                }
                if rflx {
                    slot.push_value(Tag::new("RFLX"), &inv).unwrap();
                }
                (!slot.is_empty()).then_some(slot)
            })
    }

    pub(crate) fn arb_bundle() -> impl Strategy<Value = FeatureBundle> {
        let inv = FeatureInventory::default();
        let cases: Vec<Tag> = inv.cases().to_vec();
        (
            prop::option::of(prop::sample::select(inv.values(Attribute::Mood).to_vec())),
            prop::option::of(prop::sample::select(inv.values(Attribute::Tense).to_vec())),
            prop::sample::select(vec![vec![], vec!["HAB"], vec!["PROG"], vec!["PRF"], vec!["PRSP"], vec!["PRF", "PROG"]]),
            prop::bool::ANY,
            prop::bool::ANY,
            prop::sample::subsequence(cases, 0..4).prop_flat_map(|cs| {
                cs.into_iter().map(arb_slot).collect::<Vec<_>>()
            }),
        )
            .prop_filter_map("non-empty bundle", |(mood, tense, aspects, neg, q, slots)| {
                let inv = FeatureInventory::default();
                let mut b = FeatureBundle::default();
                for t in mood.into_iter().chain(tense) {
                    b.push_feature(t, &inv).unwrap();
                }
                for a in aspects {
                    b.push_feature(Tag::new(a), &inv).unwrap();
                }
                if neg {
                    b.push_feature(Tag::new("NEG"), &inv).unwrap();
                }
                if q {
                    b.push_feature(Tag::new("Q"), &inv).unwrap();
                }
                for s in slots.into_iter().flatten() {
                    b.push_arg(s, &inv).unwrap();
                }
                (!b.is_empty()).then_some(b)
            })
    }

    proptest! {
        #[test]
        fn serialize_parse_round_trip(b in arb_bundle()) {
            let inv = FeatureInventory::default();
            let text = serialize_bundle(&b);
            let back = parse_bundle(&text, &inv).unwrap();
            prop_assert_eq!(&back, &b);
            prop_assert!(back.validate(&inv).is_ok());
        }

        #[test]
        fn unflatten_inverts_flatten(b in arb_bundle()) {
            let inv = FeatureInventory::default();
            prop_assert_eq!(unflatten_bundle(&flatten_bundle(&b), &inv).unwrap(), b);
        }

        #[test]
        fn canonical_form_is_idempotent_and_case_insensitive(b in arb_bundle()) {
            let inv = FeatureInventory::default();
            let s = serialize_bundle(&b);
            let once = serialize_bundle(&parse_bundle(&s, &inv).unwrap());
            let twice = serialize_bundle(&parse_bundle(&once, &inv).unwrap());
            prop_assert_eq!(&once, &twice);
            prop_assert_eq!(
                parse_bundle(&s.to_lowercase(), &inv).unwrap(),
                parse_bundle(&s.to_uppercase(), &inv).unwrap()
            );
        }

        #[test]
        fn shuffled_slots_parse_to_same_bundle(b in arb_bundle(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let inv = FeatureInventory::default();
            let text = serialize_bundle(&b);
            let mut parts: Vec<&str> = text.split(';').collect();
            parts.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(parse_bundle(&parts.join(";"), &inv).unwrap(), b);
        }
    }
}
