use clausemorph::featkit::FeatureInventory;
use clausemorph::grammar::GrammarSpec;
use clausemorph::lexicon::{parse_unimorph, Frame, FrameAnnotation, UnimorphData};
use clausemorph::paradigm::{build_tables, ClauseInflectionTable};

/// Two TAM cells, six subjects, pronominal objects with reflexives.
pub const TOY: &str = "
language toy
cases NOM ACC
agreement NOM
reflexive coreference
enumerate * 1,SG 2,SG 3,SG 1,PL 2,PL 3,PL
case NOM pronoun
case ACC pronoun
pronoun NOM 1,SG a
pronoun NOM 2,SG b
pronoun NOM 3,SG c
pronoun NOM 1,PL d
pronoun NOM 2,PL e
pronoun NOM 3,PL f
pronoun ACC 1,SG ma
pronoun ACC 2,SG mb
pronoun ACC 3,SG mc
pronoun ACC 1,PL md
pronoun ACC 2,PL me
pronoun ACC 3,PL mf
pronoun ACC 1,SG,RFLX sa
pronoun ACC 2,SG,RFLX sb
pronoun ACC 3,SG,RFLX sc
pronoun ACC 1,PL,RFLX sd
pronoun ACC 2,PL,RFLX se
pronoun ACC 3,PL,RFLX sf
cell IND;PRS : SUBJ VERB<V;PRS> ARGS
cell IND;PST : SUBJ VERB<V;PST> ARGS
";

pub fn toy_spec(inv: &FeatureInventory) -> GrammarSpec {
    GrammarSpec::parse(TOY, None, inv, &[], vec![]).unwrap()
}

pub fn lemma(i: usize) -> String {
    format!("v{i:03}")
}

/// Word tables for `n` synthetic verbs.
pub fn toy_words(n: usize) -> UnimorphData {
    let mut text = String::new();
    for i in 0..n {
        let l = lemma(i);
        text.push_str(&format!("{l}\t{l}s\tV;PRS\n{l}\t{l}d\tV;PST\n"));
    }
    parse_unimorph(&text, "toy").unwrap()
}

/// `n` tables: every verb takes NOM and NOM,ACC (84 cells).
pub fn toy_tables(n: usize, inv: &FeatureInventory) -> Vec<ClauseInflectionTable> {
    let spec = toy_spec(inv);
    let words = toy_words(n);
    let frames: Vec<FrameAnnotation> = (0..n)
        .map(|i| {
            FrameAnnotation::new(
                lemma(i),
                vec![Frame::parse("NOM", inv).unwrap(), Frame::parse("NOM,ACC", inv).unwrap()],
            )
            .unwrap()
        })
        .collect();
    let (tables, manifest) = build_tables(&spec, &words, &frames);
    assert!(manifest.skipped.is_empty(), "{:?}", manifest.skipped);
    tables
}
