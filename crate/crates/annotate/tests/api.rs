use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use clausemorph::featkit::FeatureInventory;
use clausemorph::grammar::GrammarSpec;
use clausemorph::lexicon::{load_frames, load_unimorph};
use clausemorph_annotate::{router, AppState, Session};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn eng() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/eng")
}

fn session(frames_path: &Path, queue: &[&str]) -> Session {
    let inv = FeatureInventory::default();
    let spec = GrammarSpec::load(eng().join("grammar.txt"), &inv).unwrap();
    let words = load_unimorph(eng().join("unimorph.tsv")).unwrap();
    Session::new(spec, &words, queue.iter().map(|s| s.to_string()).collect(), frames_path).unwrap()
}

fn state(dir: &tempfile::TempDir) -> Arc<AppState> {
    AppState::with_session(session(&dir.path().join("frames.tsv"), &["give", "receive", "sleep"]))
}

async fn call(state: &Arc<AppState>, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = router(state.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, value)
}

#[tokio::test]
async fn uninitialized_service_answers_503() {
    let state = AppState::uninitialized();
    for (m, uri, body) in [
        (Method::GET, "/lexemes", None),
        (Method::GET, "/progress", None),
        (Method::GET, "/inventory", None),
        (Method::POST, "/lexemes/give/preview", Some(json!({"frame": ["NOM"], "sample": 1}))),
        (Method::PUT, "/lexemes/give/frames", Some(json!({"frames": [["NOM"]]}))),
    ] {
        let (status, body) = call(&state, m, uri, body).await;
        assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE, "{uri}");
        assert_eq!(body["error"], "session not initialized");
    }
}

#[tokio::test]
async fn fresh_queue_is_pending_in_sampled_order() {
    let dir = tempfile::tempdir().unwrap();
    let state = state(&dir);
    let (status, body) = call(&state, Method::GET, "/lexemes", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["language"], "eng");
    let lex = body["lexemes"].as_array().unwrap();
    let lemmas: Vec<_> = lex.iter().map(|l| l["lemma"].as_str().unwrap()).collect();
    assert_eq!(lemmas, ["give", "receive", "sleep"]);
    assert!(lex.iter().all(|l| l["status"] == "pending"));
    let (_, progress) = call(&state, Method::GET, "/progress", None).await;
    assert_eq!(progress, json!({"total": 3, "pending": 3, "annotated": 0, "skipped": 0}));
}

#[tokio::test]
async fn preview_returns_the_first_canonical_cells() {
    let dir = tempfile::tempdir().unwrap();
    let state = state(&dir);
    let (status, body) = call(
        &state,
        Method::POST,
        "/lexemes/give/preview",
        Some(json!({"frame": ["NOM", "ACC", "DAT"], "sample": 2})),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["frame"], "NOM,ACC,DAT");
    assert_eq!(body["table_size"], 64 * 7 * 7 * 7);
    assert_eq!(
        body["cells"],
        json!([
            {"bundle": "IND;PRS;NOM(1,SG);ACC(1,SG,RFLX);DAT(1,SG,RFLX)", "clause": "I give myself to myself"},
            {"bundle": "IND;PRS;NOM(1,SG);ACC(1,SG,RFLX);DAT(1,PL)", "clause": "I give myself to us"},
        ])
    );
}

#[tokio::test]
async fn preview_shows_the_ablative_argument() {
    let dir = tempfile::tempdir().unwrap();
    let state = state(&dir);
    let (status, body) = call(
        &state,
        Method::POST,
        "/lexemes/receive/preview",
        Some(json!({"frame": ["nom", "acc", "abl"], "sample": 7})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let cells = body["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 7);
    assert!(cells.iter().all(|c| c["clause"].as_str().unwrap().contains(" from ")));
}

#[tokio::test]
async fn preview_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let state = state(&dir);
    let (status, body) =
        call(&state, Method::POST, "/lexemes/give/preview", Some(json!({"frame": ["NOM"], "sample": 0}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["cells"], json!([]));

    let (status, body) =
        call(&state, Method::POST, "/lexemes/sleep/preview", Some(json!({"frame": ["NOM"], "sample": 10_000}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["cells"].as_array().unwrap().len(), 448);

    let (status, body) =
        call(&state, Method::POST, "/lexemes/give/preview", Some(json!({"frame": ["NOM", "XYZ"], "sample": 1}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(body["error"].as_str().unwrap().contains("XYZ"));

    let (status, _) =
        call(&state, Method::POST, "/lexemes/fly/preview", Some(json!({"frame": ["NOM"], "sample": 1}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn preview_does_not_change_state() {
    let dir = tempfile::tempdir().unwrap();
    let state = state(&dir);
    let (_, before) = call(&state, Method::GET, "/lexemes", None).await;
    call(&state, Method::POST, "/lexemes/give/preview", Some(json!({"frame": ["NOM", "ACC"], "sample": 5}))).await;
    let (_, after) = call(&state, Method::GET, "/lexemes", None).await;
    assert_eq!(before, after);
    assert!(!dir.path().join("frames.tsv").exists());
}

#[tokio::test]
async fn saving_frames_persists_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let state = state(&dir);
    let body = json!({"frames": [["NOM", "ACC"], ["NOM", "ACC", "ABL"]]});
    for _ in 0..2 {
        let (status, view) = call(&state, Method::PUT, "/lexemes/receive/frames", Some(body.clone())).await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(view["status"], "annotated");
        assert_eq!(view["revision"], 1);
        assert_eq!(view["frames"], json!(["NOM,ACC", "NOM,ACC,ABL"]));
    }
    let path = dir.path().join("frames.tsv");
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "receive\tNOM,ACC\tNOM,ACC,ABL\n");
    let inv = FeatureInventory::default();
    assert_eq!(load_frames(&path, &inv).unwrap().len(), 1);
    let (_, progress) = call(&state, Method::GET, "/progress", None).await;
    assert_eq!(progress["annotated"], 1);
    assert_eq!(progress["pending"], 2);
}

#[tokio::test]
async fn rows_follow_queue_order() {
    let dir = tempfile::tempdir().unwrap();
    let state = state(&dir);
    call(&state, Method::PUT, "/lexemes/sleep/frames", Some(json!({"frames": [["NOM"]]}))).await;
    call(&state, Method::PUT, "/lexemes/give/frames", Some(json!({"frames": [["NOM", "ACC", "DAT"]]}))).await;
    let text = std::fs::read_to_string(dir.path().join("frames.tsv")).unwrap();
    assert_eq!(text, "give\tNOM,ACC,DAT\nsleep\tNOM\n");
}

#[tokio::test]
async fn invalid_frames_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let state = state(&dir);
    for frames in [json!([]), json!([["NOM"], ["NOM"]]), json!([["NOM", "XYZ"]]), json!([["NOM", "NOM"]])] {
        let (status, _) = call(&state, Method::PUT, "/lexemes/give/frames", Some(json!({ "frames": frames }))).await;
        assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{frames}");
    }
    assert!(!dir.path().join("frames.tsv").exists());
}

#[tokio::test]
async fn stale_revision_conflicts() {
    let dir = tempfile::tempdir().unwrap();
    let state = state(&dir);
    let first = json!({"frames": [["NOM", "ACC"]], "revision": 0});
    let (status, _) = call(&state, Method::PUT, "/lexemes/give/frames", Some(first)).await;
    assert_eq!(status, StatusCode::OK);
    let stale = json!({"frames": [["NOM", "ACC", "DAT"]], "revision": 0});
    let (status, body) = call(&state, Method::PUT, "/lexemes/give/frames", Some(stale)).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert!(body["error"].as_str().unwrap().contains("revision 1"));
    let fresh = json!({"frames": [["NOM", "ACC", "DAT"]], "revision": 1});
    let (status, view) = call(&state, Method::PUT, "/lexemes/give/frames", Some(fresh)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(view["revision"], 2);
}

#[tokio::test]
async fn concurrent_writes_are_serialized() {
    let dir = tempfile::tempdir().unwrap();
    let state = state(&dir);
    let mut handles = Vec::new();
    for (i, lemma) in ["give", "receive", "sleep"].iter().cycle().take(30).enumerate() {
        let state = state.clone();
        let frames = if i % 2 == 0 { json!([["NOM"]]) } else { json!([["NOM"], ["NOM", "ACC"]]) };
        let uri = format!("/lexemes/{lemma}/frames");
        handles.push(tokio::spawn(async move {
            call(&state, Method::PUT, &uri, Some(json!({ "frames": frames }))).await.0
        }));
    }
    for h in handles {
        assert_eq!(h.await.unwrap(), StatusCode::OK);
    }
    let inv = FeatureInventory::default();
    let rows = load_frames(dir.path().join("frames.tsv"), &inv).unwrap();
    assert_eq!(rows.len(), 3);
}

#[tokio::test]
async fn skip_and_resume_from_existing_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("frames.tsv");
    std::fs::write(&path, "receive\tNOM,ACC\nsee\tNOM,ACC\n").unwrap();
    let state = AppState::with_session(session(&path, &["give", "receive", "sleep"]));
    let (_, list) = call(&state, Method::GET, "/lexemes", None).await;
    let statuses: Vec<_> = list["lexemes"].as_array().unwrap().iter().map(|l| l["status"].clone()).collect();
    assert_eq!(statuses, [json!("pending"), json!("annotated"), json!("pending")]);

    let (status, view) = call(&state, Method::POST, "/lexemes/sleep/skip", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(view["status"], "skipped");
    let (status, _) = call(&state, Method::POST, "/lexemes/receive/skip", None).await;
    assert_eq!(status, StatusCode::CONFLICT);

    call(&state, Method::PUT, "/lexemes/give/frames", Some(json!({"frames": [["NOM", "ACC", "DAT"]]}))).await;
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, "give\tNOM,ACC,DAT\nreceive\tNOM,ACC\nsee\tNOM,ACC\n");
    let (_, progress) = call(&state, Method::GET, "/progress", None).await;
    assert_eq!(progress, json!({"total": 3, "pending": 0, "annotated": 2, "skipped": 1}));
}

#[tokio::test]
async fn inventory_lists_realizable_cases() {
    let dir = tempfile::tempdir().unwrap();
    let state = state(&dir);
    let (status, body) = call(&state, Method::GET, "/inventory", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["agreement"], "NOM");
    let cases: Vec<_> = body["cases"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
    assert_eq!(cases.len(), 11);
    assert_eq!(&cases[..3], ["NOM", "ACC", "DAT"]);
}
