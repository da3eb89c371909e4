use std::sync::{Arc, Mutex};
use std::time::Duration;

use codepix_gateway::{
    build_request, estimate_cost, EndpointConfig, FnTransport, Gateway, GatewayError, GenerationOptions,
    PricingTable, Scripted, ScriptedTransport, TranscriptionJob, Transport,
};

/// Endpoint whose key variable is set for the duration of the test binary.
fn endpoint(key_var: &str, max_retries: u32) -> EndpointConfig {
    std::env::set_var(key_var, "test-key");
    let mut e = EndpointConfig::new("https://mock.invalid/v1", "mock-model", key_var);
    e.max_retries = max_retries;
    e.backoff_base = 0.25;
    e
}

fn no_sleep(gw: Gateway) -> Gateway {
    gw.with_sleeper(|_| {})
}

#[test]
fn build_request_orders_text_then_images() {
    let imgs = vec![b"AAAA".to_vec(), b"BBBB".to_vec()];
    let req = build_request("m", "read this", &imgs, &GenerationOptions::default()).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&req.to_json()).unwrap();
    let parts = v["messages"][0]["content"].as_array().unwrap();
    let kinds: Vec<&str> = parts.iter().map(|p| p["type"].as_str().unwrap()).collect();
    assert_eq!(kinds, ["text", "image_url", "image_url"]);
    assert_eq!(v["messages"].as_array().unwrap().len(), 1);

    // A before B at the byte level, and serialization is repeatable.
    let body = req.to_json();
    let a = body.windows(8).position(|w| w == b"QUFBQQ==").unwrap();
    let b = body.windows(8).position(|w| w == b"QkJCQg==").unwrap();
    assert!(a < b);
    assert_eq!(body, build_request("m", "read this", &imgs, &GenerationOptions::default()).unwrap().to_json());
}

#[test]
fn build_request_text_only_and_empty() {
    let req = build_request("m", "hello", &[], &GenerationOptions::default()).unwrap();
    assert_eq!(req.messages[0].content.len(), 1);
    assert!(matches!(
        build_request("m", "", &[], &GenerationOptions::default()),
        Err(GatewayError::EmptyRequest)
    ));
}

#[test]
fn oversized_image_rejected_without_network() {
    let transport = Arc::new(ScriptedTransport::new([Scripted::chat("never")]));
    let gw = Gateway::new(endpoint("CODEPIX_T_OVERSIZE", 0), transport.clone())
        .unwrap()
        .with_options(GenerationOptions {
            max_image_bytes: 10,
            ..Default::default()
        });
    let err = gw.transcribe_images("s", 0, &[vec![0; 5], vec![0; 11]]).unwrap_err();
    assert!(matches!(err, GatewayError::RequestTooLarge { index: 1, bytes: 11, limit: 10 }));
    assert_eq!(transport.calls(), 0);
}

#[test]
fn echo_round_trip_and_fence_strip() {
    let transport = Arc::new(ScriptedTransport::new([
        Scripted::chat("print('hi')"),
        Scripted::chat("```python\nprint('hi')\n```"),
    ]));
    let gw = Gateway::new(endpoint("CODEPIX_T_ECHO", 0), transport.clone()).unwrap();
    let a = gw.transcribe_images("s", 0, &[b"png".to_vec()]).unwrap();
    let b = gw.transcribe_images("s", 1, &[b"png".to_vec()]).unwrap();
    assert_eq!(a.text, "print('hi')");
    assert_eq!(b.text, "print('hi')");
    assert_eq!(b.log.response_text, "```python\nprint('hi')\n```");
    assert_eq!(a.log.request_digest, b.log.request_digest);
    assert_eq!(a.log.prompt_version, gw.prompts().ocr_version());

    let req = &transport.requests()[0];
    assert_eq!(req.url, "https://mock.invalid/v1/chat/completions");
    assert!(req.headers.contains(&("Authorization".into(), "Bearer test-key".into())));
}

#[test]
fn retries_then_succeeds() {
    let transport = Arc::new(ScriptedTransport::new([
        Scripted::status(503),
        Scripted::Fail("connection reset".into()),
        Scripted::chat("ok"),
    ]));
    let delays = Arc::new(Mutex::new(Vec::new()));
    let d = delays.clone();
    let gw = Gateway::new(endpoint("CODEPIX_T_RETRY", 3), transport.clone())
        .unwrap()
        .with_sleeper(move |t| d.lock().unwrap().push(t));
    let t = gw.transcribe_images("s", 0, &[b"x".to_vec()]).unwrap();
    assert_eq!(t.text, "ok");
    assert_eq!(t.log.attempts, 3);
    assert_eq!(transport.calls(), 3);
    assert_eq!(
        *delays.lock().unwrap(),
        vec![Duration::from_millis(250), Duration::from_millis(500)]
    );
}

#[test]
fn retry_budget_is_respected() {
    let transport = Arc::new(ScriptedTransport::new((0..10).map(|_| Scripted::status(429))));
    let delays = Arc::new(Mutex::new(Vec::new()));
    let d = delays.clone();
    let gw = Gateway::new(endpoint("CODEPIX_T_BUDGET", 4), transport.clone())
        .unwrap()
        .with_sleeper(move |t| d.lock().unwrap().push(t));
    let err = gw.transcribe_images("s", 0, &[b"x".to_vec()]).unwrap_err();
    assert!(matches!(err, GatewayError::Transport { status: Some(429), attempts: 5, .. }));
    assert_eq!(transport.calls(), 5);
    let delays = delays.lock().unwrap();
    assert_eq!(delays.len(), 4);
    assert!(delays.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn client_errors_are_not_retried() {
    let transport = Arc::new(ScriptedTransport::new([Scripted::status(401), Scripted::chat("ok")]));
    let gw = no_sleep(Gateway::new(endpoint("CODEPIX_T_401", 3), transport.clone()).unwrap());
    let err = gw.transcribe_images("s", 0, &[b"x".to_vec()]).unwrap_err();
    assert!(matches!(err, GatewayError::Transport { status: Some(401), attempts: 1, .. }));
    assert_eq!(transport.calls(), 1);
}

#[test]
fn missing_key_is_config_error() {
    let e = EndpointConfig::new("https://mock.invalid", "m", "CODEPIX_T_SURELY_UNSET_KEY");
    let transport: Arc<dyn Transport> = Arc::new(ScriptedTransport::default());
    assert!(matches!(Gateway::new(e, transport), Err(GatewayError::Config(_))));
}

#[test]
fn comp_score_averages_both_orders() {
    let transport = Arc::new(ScriptedTransport::new([Scripted::chat("60"), Scripted::chat("40")]));
    let gw = Gateway::new(endpoint("CODEPIX_T_JUDGE", 0), transport.clone()).unwrap();
    let s = gw.comp_score("doc", "gen_doc_x", "ref_doc_y").unwrap();
    assert_eq!((s.score, s.forward, s.backward), (50.0, 60.0, 40.0));
    assert_eq!(transport.calls(), 2);

    let bodies: Vec<String> = transport
        .requests()
        .iter()
        .map(|r| String::from_utf8(r.body.clone()).unwrap())
        .collect();
    let pos = |b: &str, s: &str| b.find(s).unwrap();
    assert!(pos(&bodies[0], "gen_doc_x") < pos(&bodies[0], "ref_doc_y"));
    assert!(pos(&bodies[1], "ref_doc_y") < pos(&bodies[1], "gen_doc_x"));
    assert_eq!(s.logs[0].response_text, "60");
    assert_eq!(s.logs[1].response_text, "40");

    let transport = Arc::new(ScriptedTransport::new([Scripted::chat("70"), Scripted::chat("70")]));
    let gw = Gateway::new(endpoint("CODEPIX_T_JUDGE2", 0), transport).unwrap();
    assert_eq!(gw.comp_score("doc", "a", "b").unwrap().score, 70.0);
}

#[test]
fn comp_score_rejects_prose() {
    let transport = Arc::new(ScriptedTransport::new([Scripted::chat("excellent"), Scripted::chat("50")]));
    let gw = Gateway::new(endpoint("CODEPIX_T_JUDGE3", 0), transport).unwrap();
    match gw.comp_score("doc", "a", "b") {
        Err(GatewayError::JudgeFormat { raw }) => assert_eq!(raw, "excellent"),
        other => panic!("expected judge-format error, got {other:?}"),
    }
}

#[test]
fn repeats_are_ordered_independent_of_completion() {
    let transport = Arc::new(FnTransport::new(|body: &[u8]| {
        // Uneven latency so completion order differs from submission order.
        std::thread::sleep(Duration::from_millis((body.len() % 7) as u64));
        format!("len {}", body.len())
    }));
    let gw = Gateway::new(endpoint("CODEPIX_T_REPEAT", 0), transport.clone()).unwrap();
    let jobs: Vec<TranscriptionJob> = ["b", "a", "c"]
        .iter()
        .enumerate()
        .map(|(i, id)| TranscriptionJob {
            sample_id: id.to_string(),
            images: vec![vec![i as u8; 3 + i]],
        })
        .collect();
    let out = codepix_gateway::run_repeats(&gw, &jobs, 5, 4);
    assert_eq!(out.len(), 15);
    assert_eq!(transport.calls(), 15);
    let keys: Vec<(String, u32)> = out.iter().map(|(s, r, _)| (s.clone(), *r)).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert!(out.iter().all(|(s, r, res)| {
        let t = res.as_ref().unwrap();
        t.log.sample_id == *s && t.log.run_index == *r
    }));
}

#[test]
fn run_log_round_trips_sorted() {
    let transport = Arc::new(FnTransport::new(|_: &[u8]| "x".to_string()));
    let gw = Gateway::new(endpoint("CODEPIX_T_LOG", 0), transport).unwrap();
    let mut entries: Vec<_> = [("b", 1), ("a", 1), ("b", 0), ("a", 0)]
        .iter()
        .map(|(s, r)| gw.transcribe_images(s, *r, &[vec![1]]).unwrap().log)
        .collect();
    let dir = std::env::temp_dir().join(format!("codepix-runlog-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("log.jsonl");
    codepix_gateway::write_run_log(&path, &entries).unwrap();
    let back = codepix_gateway::read_run_log(&path).unwrap();
    entries.sort_by(|a, b| (&a.sample_id, a.run_index).cmp(&(&b.sample_id, b.run_index)));
    assert_eq!(back, entries);
    let first: serde_json::Value =
        serde_json::from_str(std::fs::read_to_string(&path).unwrap().lines().next().unwrap()).unwrap();
    for key in ["sample_id", "run_index", "request_digest", "response_text", "latency_ms", "attempts"] {
        assert!(first.get(key).is_some(), "{key}");
    }
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn cost_estimation_makes_no_calls() {
    let transport = Arc::new(ScriptedTransport::default());
    let _gw = Gateway::new(endpoint("CODEPIX_T_COST", 0), transport.clone()).unwrap();
    let table = PricingTable::bundled();
    estimate_cost(25_600, 1_000, "Gemini-3-Pro", &table).unwrap();
    build_request("m", "x", &[vec![1]], &GenerationOptions::default()).unwrap();
    assert_eq!(transport.calls(), 0);
}
