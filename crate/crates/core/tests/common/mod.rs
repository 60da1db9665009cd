#![allow(dead_code)]

pub mod toy;

use std::path::PathBuf;

use clausemorph::featkit::{FeatureBundle, FeatureInventory};
use clausemorph::grammar::GrammarSpec;
use clausemorph::lexicon::{load_frames, load_unimorph, FrameAnnotation, UnimorphData, WordInflectionTable};

pub fn data_dir(lang: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(lang)
}

pub struct Lang {
    pub inv: FeatureInventory,
    pub spec: GrammarSpec,
    pub words: UnimorphData,
    pub frames: Vec<FrameAnnotation>,
}

impl Lang {
    pub fn load(lang: &str) -> Lang {
        let inv = FeatureInventory::default();
        let dir = data_dir(lang);
        let spec = GrammarSpec::load(dir.join("grammar.txt"), &inv).unwrap();
        let words = load_unimorph(dir.join("unimorph.tsv")).unwrap();
        let frames = load_frames(dir.join("frames.tsv"), &inv).unwrap();
        Lang { inv, spec, words, frames }
    }

    pub fn table(&self, lemma: &str) -> &WordInflectionTable {
        self.words.get(lemma).unwrap_or_else(|| panic!("no word table for {lemma}"))
    }

    pub fn annotation(&self, lemma: &str) -> &FrameAnnotation {
        self.frames.iter().find(|a| a.lemma == lemma).unwrap_or_else(|| panic!("no frames for {lemma}"))
    }

    pub fn bundle(&self, text: &str) -> FeatureBundle {
        FeatureBundle::parse(text, &self.inv).unwrap()
    }
}
