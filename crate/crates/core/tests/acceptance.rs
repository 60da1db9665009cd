//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

mod common;

use std::collections::HashSet;
use std::time::{Duration, Instant};

use clausemorph::eval::{aggregate_runs, format_mean_std, score_run};
use clausemorph::featkit::{ArgSlot, Attribute, FeatureBundle, FeatureInventory, Tag};
use clausemorph::grammar::{realize_clause, GrammarSpec};
use clausemorph::lexicon::{parse_unimorph, Frame, FrameAnnotation};
use clausemorph::paradigm::{build_table, build_tables, enumerate_bundles, parse_tables, write_tables, ClauseInflectionTable};
use clausemorph::sampler::{render_split, sample_dataset, SampleConfig, SplitName, TaskExample, TaskKind};
use clausemorph::stats::{compute_stats, Counting};
use common::Lang;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn clause(lang: &Lang, lemma: &str, bundle: &str) -> Result<String, String> {
    let b = FeatureBundle::parse(bundle, &lang.inv).map_err(|e| e.to_string())?;
    let frame = Frame::new(b.cases(), &lang.inv)?;
    realize_clause(&lang.spec, lang.table(lemma), &frame, &b).map_err(|e| e.to_string())
}

fn expect_clause(lang: &Lang, lemma: &str, bundle: &str, expected: &str) -> Result<(), String> {
    let got = clause(lang, lemma, bundle)?;
    ensure(got == expected, format!("{lemma} {bundle}: got {got:?}, want {expected:?}"))
}

fn criterion_1(langs: &[Lang; 3]) -> Check {
    let started = Instant::now();
    let [eng, deu, tur] = langs;
    expect_clause(eng, "give", "IND;FUT;NOM(1,SG);ACC(3,SG,MASC);DAT(3,SG,FEM)", "I will give him to her")?;
    expect_clause(deu, "geben", "IND;FUT;NOM(1,SG);ACC(3,SG,MASC);DAT(3,SG,FEM)", "ich werde ihn ihr geben")?;
    expect_clause(tur, "vermek", "IND;FUT;NOM(1,SG);ACC(3,SG);DAT(3,SG)", "onu ona vereceğim")?;
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(1), format!("took {elapsed:?}"))?;
    Ok(format!("3 golden inflection rows byte-exact in {elapsed:?}"))
}

fn criterion_2(langs: &[Lang; 3]) -> Check {
    let cases = [
        ("give", "IND;PRS;NEG;NOM(1,PL);ACC(2,SG);DAT(3,PL)", "we don't give you to them"),
        ("geben", "IND;PRS;NEG;NOM(1,PL);ACC(2,SG);DAT(3,PL)", "wir geben dich ihnen nicht"),
        ("vermek", "IND;PRS;PROG;NEG;NOM(1,PL);ACC(2,SG);DAT(3,PL)", "seni onlara vermiyoruz"),
    ];
    for (lang, (lemma, bundle, expected)) in langs.iter().zip(cases) {
        let table = build_table(&lang.spec, lang.table(lemma), lang.annotation(lemma)).map_err(|e| e.to_string())?;
        let b = lang.bundle(bundle);
        let got = table.get(&b).ok_or_else(|| format!("{lemma}: no cell {bundle}"))?;
        ensure(got == expected, format!("{lemma} {bundle}: got {got:?}, want {expected:?}"))?;
    }
    Ok("3 golden reinflection targets are cells of their tables".into())
}

fn criterion_3(eng: &Lang) -> Check {
    let table = build_table(
        &eng.spec,
        eng.table("love"),
        &FrameAnnotation::new("love", vec![Frame::parse("NOM,ACC", &eng.inv)?])?,
    )
    .map_err(|e| e.to_string())?;
    let objects = [
        ("ACC(1,SG)", "me"),
        ("ACC(1,PL)", "us"),
        ("ACC(2,SG,RFLX)", "yourself"),
        ("ACC(3,SG,MASC)", "him"),
        ("ACC(3,PL)", "them"),
    ];
    // Column heads of the printed table and their clause prefixes.
    let columns = [
        ("IND;PRS", "you love"),
        ("IND;PRS;NEG", "you don't love"),
        ("IND;PRS;PRF", "you have loved"),
        ("IND;PRS;PRF;NEG", "you haven't loved"),
        ("COND;PRS", "you would love"),
        ("COND;PRS;NEG", "you wouldn't love"),
    ];
    let mut n = 0;
    for (obj, pron) in objects {
        for (tam, prefix) in columns {
            let bundle = eng.bundle(&format!("{tam};NOM(2,SG);{obj}"));
            let want = format!("{prefix} {pron}");
            let got = table.get(&bundle).ok_or_else(|| format!("no cell {bundle}"))?;
            ensure(got == want, format!("{bundle}: got {got:?}, want {want:?}"))?;
            n += 1;
        }
    }
    let plain = eng.bundle("IND;PRS;NOM(2,SG);ACC(2,SG)");
    ensure(table.get(&plain).is_none(), "plain ACC(2,SG) generated next to NOM(2,SG)")?;
    Ok(format!("{n} cells of the love/NOM(2,SG) fragment match"))
}

fn random_bundle(rng: &mut ChaCha8Rng, inv: &FeatureInventory) -> FeatureBundle {
    let mut b = FeatureBundle::default();
    let pick = |rng: &mut ChaCha8Rng, attr: Attribute| {
        let vals = inv.values(attr);
        vals[rng.gen_range(0..vals.len())]
    };
    if rng.gen_bool(0.9) {
        b.push_feature(pick(rng, Attribute::Mood), inv).unwrap();
    }
    if rng.gen_bool(0.8) {
        b.push_feature(pick(rng, Attribute::Tense), inv).unwrap();
    }
    if rng.gen_bool(0.5) {
        b.push_feature(pick(rng, Attribute::Aspect), inv).unwrap();
    }
    for s in inv.values(Attribute::Sentence) {
        if rng.gen_bool(0.3) {
            b.push_feature(*s, inv).unwrap();
        }
    }
    let cases = inv.cases().to_vec();
    for _ in 0..rng.gen_range(0..=3) {
        let case = cases[rng.gen_range(0..cases.len())];
        if b.arg(case).is_some() {
            continue;
        }
        let mut slot = ArgSlot::new(case);
        slot.push_value(pick(rng, Attribute::Person), inv).unwrap();
        if rng.gen_bool(0.8) {
            slot.push_value(pick(rng, Attribute::Number), inv).unwrap();
        }
        if rng.gen_bool(0.3) {
            slot.push_value(pick(rng, Attribute::Gender), inv).unwrap();
        }
        if rng.gen_bool(0.2) {
            slot.push_value(pick(rng, Attribute::Misc), inv).unwrap();
        }
        b.push_arg(slot, inv).unwrap();
    }
    if b.is_empty() {
        b.push_feature(Tag::new("IND"), inv).unwrap();
    }
    b
}

fn criterion_4() -> Check {
    let inv = FeatureInventory::default();
    let nested = FeatureBundle::parse("IND;PRS;NOM(1,SG);ACC(2,PL)", &inv).map_err(|e| e.to_string())?;
    let flat = nested.flatten();
    ensure(flat == "IND;PRS;NOM1;NOMSG;ACC2;ACCPL", format!("flattened to {flat:?}"))?;
    let back = FeatureBundle::unflatten("IND;PRS;NOM1;NOMSG;ACC2;ACCPL", &inv).map_err(|e| e.to_string())?;
    ensure(back.serialize() == "IND;PRS;NOM(1,SG);ACC(2,PL)", format!("unflattened to {back}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10_000 {
        let b = random_bundle(&mut rng, &inv);
        let round = FeatureBundle::unflatten(&b.flatten(), &inv).map_err(|e| format!("{b}: {e}"))?;
        ensure(round == b, format!("{b} came back as {round}"))?;
    }
    Ok("worked example exact; unflatten(flatten(b)) == b for 10000 random bundles".into())
}

fn criterion_5(tables: &[ClauseInflectionTable]) -> Check {
    let started = Instant::now();
    let a = sample_dataset(tables, &SampleConfig::standard(TaskKind::Inflection, 7)).map_err(|e| e.to_string())?;
    let counts = [a.train.len(), a.dev.len(), a.test.len()];
    ensure(counts == [8000, 1000, 1000], format!("example counts {counts:?}"))?;
    let lex = SplitName::ALL.map(|s| a.split_lexemes(s).iter().cloned().collect::<HashSet<_>>());
    let sizes = lex.each_ref().map(HashSet::len);
    ensure(sizes == [400, 50, 50], format!("lexeme counts {sizes:?}"))?;
    for i in 0..3 {
        for j in i + 1..3 {
            ensure(lex[i].is_disjoint(&lex[j]), format!("splits {i} and {j} share lexemes"))?;
        }
        let used: HashSet<String> = a.examples(SplitName::ALL[i]).iter().map(|e| e.lemma().to_owned()).collect();
        ensure(used.is_subset(&lex[i]), "example drawn from a lexeme of another split")?;
    }
    let b = sample_dataset(tables, &SampleConfig::standard(TaskKind::Inflection, 7)).map_err(|e| e.to_string())?;
    for s in SplitName::ALL {
        ensure(
            render_split(a.examples(s), false) == render_split(b.examples(s), false),
            "seed 7 runs differ",
        )?;
    }
    let c = sample_dataset(tables, &SampleConfig::standard(TaskKind::Inflection, 8)).map_err(|e| e.to_string())?;
    ensure(a.lexemes != c.lexemes, "seeds 7 and 8 give the same partition")?;
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(30), format!("took {elapsed:?}"))?;
    Ok(format!("8000/1000/1000 examples, 400/50/50 disjoint lexemes, deterministic, {elapsed:?}"))
}

fn criterion_6(tables: &[ClauseInflectionTable], inv: &FeatureInventory) -> Check {
    let layered = compute_stats(tables, inv, Counting::Layered).map_err(|e| e.to_string())?;
    let flat = compute_stats(tables, inv, Counting::Flattened).map_err(|e| e.to_string())?;
    let detail = format!(
        "{} tables; table size {:?}; layered: feat set {}, feats/form {:.2}; flattened: feat set {}, feats/form {:.2}; form length {:.2}",
        layered.tables,
        layered.table_size,
        layered.feat_set_size,
        layered.feats_per_form,
        flat.feat_set_size,
        flat.feats_per_form,
        layered.form_length
    );
    ensure(layered.tables == 500, format!("{detail}: expected 500 tables"))?;
    let size = layered.table_size.unwrap_or(0);
    ensure((400..=500).contains(&size), format!("{detail}: table size out of range"))?;
    ensure((layered.feats_per_form - 12.75).abs() <= 1.5, format!("{detail}: feats/form out of range"))?;
    ensure((layered.form_length - 29.63).abs() <= 3.0, format!("{detail}: form length out of range"))?;
    ensure(layered.feat_set_size.abs_diff(32) <= 4, format!("{detail}: feat set out of range"))?;
    Ok(detail)
}

fn criterion_7(eng: &Lang, tables: &[ClauseInflectionTable]) -> Check {
    for task in TaskKind::ALL {
        let split = sample_dataset(
            tables,
            &SampleConfig {
                task,
                total: 400,
                ratios: [0.5, 0.25, 0.25],
                lexemes: [20, 10, 10],
                seed: 3,
            },
        )
        .map_err(|e| e.to_string())?;
        let gold: Vec<TaskExample> = split.test.clone();
        let preds: Vec<String> = gold.iter().map(TaskExample::gold_output).collect();
        let score = score_run(&gold, &preds, &eng.inv, 5).map_err(|e| e.to_string())?;
        ensure(score.accuracy == 100.0, format!("{task}: gold vs gold scored {}", score.accuracy))?;
        let n = gold.len();
        for k in [1, 7, n / 3, n] {
            let mut corrupted = preds.clone();
            for p in corrupted.iter_mut().take(k) {
                p.push_str(" x");
            }
            let score = score_run(&gold, &corrupted, &eng.inv, 0).map_err(|e| e.to_string())?;
            let want = 100.0 * (n - k) as f64 / n as f64;
            ensure(score.accuracy == want, format!("{task}: {k} of {n} corrupted scored {}", score.accuracy))?;
        }
    }
    let (mean, std) = aggregate_runs(&[68.5, 70.0, 71.5]).map_err(|e| e.to_string())?;
    let shown = format_mean_std(mean, std);
    ensure(shown == "70.0 ±1.2", format!("aggregate printed {shown:?}"))?;
    Ok(format!("self-scores 100.0, corruption arithmetic exact, aggregate {shown}"))
}

const TOY: &str = "
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

fn criterion_8() -> Check {
    let inv = FeatureInventory::default();
    let spec = GrammarSpec::parse(TOY, None, &inv, &[], vec![]).map_err(|e| e.to_string())?;
    let words = parse_unimorph("go\tgoes\tV;PRS\ngo\twent\tV;PST\n", "toy").map_err(|e| e.to_string())?;
    let wt = &words.tables[0];
    let (tams, subjects, objects) = (2, 6, 6);
    let nom = Frame::parse("NOM", &inv)?;
    let nom_acc = Frame::parse("NOM,ACC", &inv)?;
    let n1 = enumerate_bundles(&spec, &nom).map_err(|e| e.to_string())?.len();
    let n2 = enumerate_bundles(&spec, &nom_acc).map_err(|e| e.to_string())?.len();
    ensure(n1 == tams * subjects, format!("{{NOM}}: {n1} bundles"))?;
    ensure(n2 == tams * subjects * objects, format!("{{NOM,ACC}}: {n2} bundles"))?;
    let annotation = FrameAnnotation::new("go", vec![nom, nom_acc])?;
    let table = build_table(&spec, wt, &annotation).map_err(|e| e.to_string())?;
    ensure(table.len() == n1 + n2, format!("table has {} cells", table.len()))?;

    let mut buf = Vec::new();
    write_tables(std::slice::from_ref(&table), &mut buf).map_err(|e| e.to_string())?;
    let text = String::from_utf8(buf).map_err(|e| e.to_string())?;
    let back = parse_tables(&text, "toy", &inv).map_err(|e| e.to_string())?;
    ensure(back == vec![table.clone()], "export/import changed the table")?;
    for (bundle, form) in back[0].cells() {
        let frame = Frame::new(bundle.cases(), &inv)?;
        let again = realize_clause(&spec, wt, &frame, bundle).map_err(|e| e.to_string())?;
        ensure(again == form, format!("{bundle}: re-realized {again:?}, exported {form:?}"))?;
    }
    Ok(format!("{{NOM}} = 2x6 = {n1}, {{NOM,ACC}} = 2x6x6 = {n2}; {} cells round-trip", table.len()))
}

fn main() {
    let langs = [Lang::load("eng"), Lang::load("deu"), Lang::load("tur")];
    let eng = &langs[0];
    let started = Instant::now();
    let (tables, manifest) = build_tables(&eng.spec, &eng.words, &eng.frames);
    let build_time = started.elapsed();
    println!(
        "built {} English tables ({} cells, {} skipped) in {build_time:?}",
        manifest.tables_built,
        manifest.cells,
        manifest.skipped.len()
    );

    let results: Vec<(usize, Check)> = vec![
        (1, criterion_1(&langs)),
        (2, criterion_2(&langs)),
        (3, criterion_3(eng)),
        (4, criterion_4()),
        (5, criterion_5(&tables)),
        (6, criterion_6(&tables, &eng.inv)),
        (7, criterion_7(eng, &tables)),
        (8, criterion_8()),
    ];
    let mut failed = 0;
    for (n, r) in &results {
        match r {
            Ok(detail) => println!("criterion {n}: PASS  {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n}: FAIL  {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", results.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", results.len());
}
