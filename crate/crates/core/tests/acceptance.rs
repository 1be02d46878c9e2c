//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;

use common::{exception_code, sps_count, sps_text};
use sps_core::notify::{parse_topic_namespace, MessageType};
use sps_core::semantic::{query_bgp, rdfs_closure};
use sps_core::service::{default_config, http, requests as rq, Service};
use sps_core::swe::fixtures::{reference_block, pointable_imager, REFERENCE_VALUES};
use sps_core::swe::{decode_parameter_data, encode_parameter_data, TextEncoding, Value};
use sps_core::task::{transition, AcceptUpdates, Command as TaskCommand, RequestKind, TaskState, TaskingRequest};

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn reference_fidelity() -> Result<String, String> {
    let desc = pointable_imager();
    let enc = TextEncoding::default();
    let data = decode_parameter_data(&desc, &enc, REFERENCE_VALUES).map_err(|e| e.to_string())?;
    ensure(data.blocks.len() == 1, format!("{} blocks", data.blocks.len()))?;
    let tokens = REFERENCE_VALUES.split(',').count();
    ensure(tokens == 9, format!("{tokens} tokens"))?;
    let b = &data.blocks[0];
    let time = |n: &str| b.get(n).and_then(Value::as_time).map(|t| t.to_string());
    ensure(time("measurementStart").as_deref() == Some("2010-08-20T12:37:00+02:00"), "start")?;
    ensure(time("measurementEnd").as_deref() == Some("2010-08-20T14:30:00+02:00"), "end")?;
    match b.get("measurementTarget") {
        Some(Value::Choice { branch, block }) if branch == "pointToLookAt" => ensure(
            block.get("location") == Some(&Value::Vector(vec![51.902112, 8.192728, 0.0])),
            "target vector",
        )?,
        other => return Err(format!("target {other:?}")),
    }
    ensure(b.get("priority") == Some(&Value::Quantity(3.5)), "priority")?;
    ensure(*b == reference_block(), "block differs from the reference block")?;
    let again = encode_parameter_data(&desc, &data).map_err(|e| e.to_string())?;
    ensure(again == REFERENCE_VALUES, format!("re-encoded as {again}"))?;
    Ok("1 block, 9 tokens, byte-identical re-encoding".into())
}

fn codec_round_trip() -> Result<String, String> {
    let mut runner = TestRunner::deterministic();
    let strat = common::generators::description_and_data();
    let mut failures = 0;
    let mut tokens = 0usize;
    for _ in 0..1000 {
        let (desc, data) = strat.new_tree(&mut runner).map_err(|e| e.to_string())?.current();
        let ok = encode_parameter_data(&desc, &data)
            .ok()
            .and_then(|text| {
                tokens += text.split(data.encoding.token_separator()).count();
                decode_parameter_data(&desc, &data.encoding, &text).ok()
            })
            .is_some_and(|back| back == data);
        if !ok {
            failures += 1;
        }
    }
    ensure(failures == 0, format!("{failures} of 1000 pairs failed"))?;
    Ok(format!("1000 pairs, {tokens} tokens, 0 failures"))
}

fn topic_namespace() -> Result<String, String> {
    let server = http::spawn(Arc::new(Service::with_default_config()), "127.0.0.1:0".parse().unwrap())
        .map_err(|e| e.to_string())?;
    let body = reqwest::blocking::get(format!("http://{}/sps/topics", server.addr))
        .and_then(|r| r.text())
        .map_err(|e| e.to_string())?;
    let topics = parse_topic_namespace(&body).map_err(|e| e.to_string())?;
    let parents: Vec<_> = topics.iter().filter(|t| t.parent.is_none()).map(|t| t.name.as_str()).collect();
    ensure(parents == ["TaskEvent", "TaskingRequestEvent"], format!("parents {parents:?}"))?;
    let expected: [(&str, &str, MessageType); 13] = [
        ("TaskEvent", "TaskFailure", MessageType::StatusReport),
        ("TaskEvent", "TaskCancellation", MessageType::StatusReport),
        ("TaskEvent", "TaskCompletion", MessageType::StatusReport),
        ("TaskEvent", "TaskConfirmation", MessageType::StatusReport),
        ("TaskEvent", "TaskUpdate", MessageType::StatusReport),
        ("TaskEvent", "DataPublication", MessageType::StatusReport),
        ("TaskEvent", "TaskReservation", MessageType::ReservationReport),
        ("TaskEvent", "TaskSubmission", MessageType::StatusReport),
        ("TaskEvent", "ReservationExpiration", MessageType::ReservationReport),
        ("TaskingRequestEvent", "TaskingRequestExpiration", MessageType::StatusReport),
        ("TaskingRequestEvent", "TaskingRequestRejection", MessageType::StatusReport),
        ("TaskingRequestEvent", "TaskingRequestAcceptance", MessageType::StatusReport),
        ("TaskingRequestEvent", "TaskingRequestPending", MessageType::StatusReport),
    ];
    let leaves: Vec<_> = topics
        .iter()
        .filter_map(|t| Some((t.parent.as_deref()?, t.name.as_str(), t.message_type?)))
        .collect();
    ensure(leaves == expected, format!("leaves {leaves:?}"))?;
    Ok("2 parents, 13 leaves, ReservationReport on 2".into())
}

fn lifecycle() -> Result<String, String> {
    use TaskState::*;
    let t0: chrono::DateTime<chrono::Utc> = "2010-08-20T08:00:00Z".parse().unwrap();
    let mk = |kind, feasible| {
        let mut r = TaskingRequest::new("req_1", kind, "p", sps_core::swe::ParameterData::single(reference_block()), t0);
        r.accept().unwrap();
        sps_core::task::create_task("task_1", &r, feasible, "a", t0, chrono::Duration::seconds(60)).unwrap()
    };
    let go = |t, c| transition(t, c, t0 + chrono::Duration::seconds(60), &AcceptUpdates).unwrap().task;
    let reserved = mk(RequestKind::Reserve, true);
    let running = mk(RequestKind::Submit, true);
    let tasks = [
        mk(RequestKind::Feasibility, true),
        mk(RequestKind::Feasibility, false),
        reserved.clone(),
        running.clone(),
        go(&running, TaskCommand::ExecutionCompleted),
        go(&running, TaskCommand::ExecutionFailed),
        go(&reserved, TaskCommand::Cancel),
        go(&reserved, TaskCommand::ExpireReservation),
    ];
    let table = [
        (Reserved, "Confirm", InExecution),
        (Reserved, "ExpireReservation", ReservationExpired),
        (Reserved, "Cancel", Cancelled),
        (InExecution, "Cancel", Cancelled),
        (Reserved, "Update", Reserved),
        (InExecution, "Update", InExecution),
        (InExecution, "ExecutionCompleted", Completed),
        (InExecution, "ExecutionFailed", Failed),
    ];
    let mut pairs = 0;
    let mut legal = 0;
    for task in &tasks {
        for c in [
            TaskCommand::Confirm,
            TaskCommand::Update(sps_core::swe::ParameterData::single(reference_block())),
            TaskCommand::Cancel,
            TaskCommand::ExecutionCompleted,
            TaskCommand::ExecutionFailed,
            TaskCommand::ExpireReservation,
        ] {
            pairs += 1;
            let name = c.name();
            let want = table.iter().find(|(s, n, _)| *s == task.state && *n == name).map(|e| e.2);
            match (want, transition(task, c, t0 + chrono::Duration::seconds(60), &AcceptUpdates)) {
                (Some(next), Ok(t)) => {
                    legal += 1;
                    ensure(t.task.state == next, format!("{} {name}", task.state))?
                }
                (None, Err(sps_core::task::TransitionError::IllegalTransition { state, .. })) => {
                    ensure(state == task.state, "state changed")?
                }
                (w, g) => return Err(format!("{} {name}: expected {w:?}, got {g:?}", task.state)),
            }
        }
    }

    let mut cfg = default_config();
    cfg.service.reservation_lifetime_s = 60;
    let svc = Service::new(cfg).map_err(|e| e.to_string())?;
    let sub = svc.subscribe("ReservationExpiration").map_err(|e| e.to_string())?;
    let before = svc.with_engine(|e| e.ledger().blocked("imager-sat-1"));
    let start = svc.now();
    let body = svc
        .dispatch(&rq::tasking("Reserve", "pointable-imager-01", &TextEncoding::default(), REFERENCE_VALUES, None))
        .body;
    let task = sps_text(&body, "task").ok_or("no task")?;
    svc.advance_clock(59);
    ensure(svc.drain(&sub.id, None).unwrap().events.is_empty(), "expired early")?;
    svc.advance_clock(1);
    let events = svc.drain(&sub.id, None).unwrap().events;
    ensure(events.len() == 1, format!("{} expiration events", events.len()))?;
    ensure(events[0].emitted_at == start + chrono::Duration::seconds(60), "expired at the wrong instant")?;
    let status = svc.dispatch(&rq::get_status(&task)).body;
    ensure(sps_text(&status, "taskStatus").as_deref() == Some("ReservationExpired"), "state after expiry")?;
    let after = svc.with_engine(|e| e.ledger().blocked("imager-sat-1"));
    ensure(after == before, format!("capacity {before} -> {after}"))?;
    ensure(legal == table.len(), format!("{legal} legal pairs"))?;
    Ok(format!("{pairs} pairs, {legal} legal; expiry at +60 s, capacity restored"))
}

/// Runs the CLI workflow twice against one fresh service (plain, then
/// cancelling midway) and returns the CLI output plus every published
/// event, in publication order per topic family.
fn workflow_transcript() -> Result<String, String> {
    let svc = Arc::new(Service::with_default_config());
    let task_sub = svc.subscribe("TaskEvent").map_err(|e| e.to_string())?;
    let req_sub = svc.subscribe("TaskingRequestEvent").map_err(|e| e.to_string())?;
    let server = http::spawn(svc.clone(), "127.0.0.1:0".parse().unwrap()).map_err(|e| e.to_string())?;
    let mut transcript = String::new();
    for extra in [None, Some("--cancel-midway")] {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_sps"));
        cmd.args(["--endpoint", &server.endpoint(), "workflow", "--procedure", "pointable-imager-01"]);
        cmd.args(extra);
        let out = cmd.output().map_err(|e| e.to_string())?;
        let text = String::from_utf8_lossy(&out.stdout).into_owned();
        ensure(out.status.success(), format!("workflow {extra:?} exited {:?}: {text}", out.status.code()))?;
        let steps = text.lines().filter(|l| l.starts_with('[')).count();
        ensure(steps == 6, format!("{steps} transcript steps"))?;
        transcript.push_str(&text);
    }
    for sub in [&task_sub.id, &req_sub.id] {
        for e in svc.drain(sub, None).map_err(|e| e.to_string())?.events {
            transcript.push_str(&format!("{}#{} {} {:?}\n", e.topic, e.sequence, e.emitted_at, e.payload));
        }
    }
    Ok(transcript)
}

fn end_to_end() -> Result<String, String> {
    let t = workflow_transcript()?;
    ensure(t.contains("[5] notification: TaskCompletion"), "no completion observed")?;
    ensure(t.contains("[6] results: 1 reference(s) results/task_2/1\n"), "no full result")?;
    ensure(t.contains("[5] notification: TaskCancellation"), "no cancellation observed")?;
    ensure(t.contains("(partial)"), "no partial result after cancel")?;
    Ok("completion and mid-run cancellation both yield result references".into())
}

fn feasibility_id() -> Result<String, String> {
    let svc = Service::with_default_config();
    let enc = TextEncoding::default();
    let body = svc.dispatch(&rq::tasking("GetFeasibility", "pointable-imager-01", &enc, REFERENCE_VALUES, None)).body;
    let fid = sps_text(&body, "task").ok_or("no feasibility task")?;
    let r = svc.dispatch(&rq::tasking("Submit", "pointable-imager-01", &enc, REFERENCE_VALUES, Some(&fid)));
    let code = exception_code(&r.body);
    ensure(code.as_deref() == Some("FeasibilityIdNotReusable"), format!("got {code:?}"))?;
    Ok(format!("Submit with {fid} refused"))
}

fn semantic_equivalence() -> Result<String, String> {
    let mut runner = TestRunner::deterministic();
    let graphs = common::semantic::graph(1000);
    let queries = common::semantic::query();
    let mut nonempty = 0;
    for i in 0..200 {
        let g = graphs.new_tree(&mut runner).map_err(|e| e.to_string())?.current();
        let q = queries.new_tree(&mut runner).map_err(|e| e.to_string())?.current();
        let got: BTreeSet<_> = query_bgp(&g, &q).map_err(|e| e.0)?.into_iter().collect();
        let want = common::semantic::naive_bgp(&g, &q);
        ensure(got == want, format!("query {i} differs: {q:?}"))?;
        nonempty += usize::from(!want.is_empty());
    }
    let schemas = common::semantic::acyclic_schema();
    let small = common::semantic::graph(200);
    for i in 0..100 {
        let s = schemas.new_tree(&mut runner).map_err(|e| e.to_string())?.current();
        let g = small.new_tree(&mut runner).map_err(|e| e.to_string())?.current();
        let c = rdfs_closure(&g, &s).map_err(|e| e.to_string())?;
        ensure(c == common::semantic::naive_closure(&g, &s), format!("closure {i} differs"))?;
    }

    let server = http::spawn(Arc::new(Service::with_default_config()), "127.0.0.1:0".parse().unwrap())
        .map_err(|e| e.to_string())?;
    let client = reqwest::blocking::Client::new();
    let enc = TextEncoding::default();
    for (op, class) in [("Submit", "submit"), ("Reserve", "reserve"), ("GetFeasibility", "getfes")] {
        let body = client
            .post(server.endpoint())
            .body(rq::tasking(op, "pointable-imager-01", &enc, REFERENCE_VALUES, None))
            .send()
            .and_then(|r| r.text())
            .map_err(|e| e.to_string())?;
        ensure(sps_count(&body, "requestStatus") >= 1, format!("{op}: {body}"))?;
        let n = sps_text(&body, "request").ok_or("no request id")?.trim_start_matches("req_").to_string();
        let q = format!("sps:{class}_{n} a sps:{op}");
        let url = format!("http://{}/sps/semantics/query", server.addr);
        let mut url = reqwest::Url::parse(&url).unwrap();
        url.query_pairs_mut().append_pair("q", &q);
        let rows = client.get(url).send().and_then(|r| r.text()).map_err(|e| e.to_string())?;
        ensure(rows.contains("count=\"1\""), format!("{q}: {rows}"))?;
    }
    Ok(format!("200 queries ({nonempty} non-empty), 100 closures, type triples visible at once"))
}

fn determinism() -> Result<String, String> {
    let a = workflow_transcript()?;
    let b = workflow_transcript()?;
    ensure(a == b, "transcripts differ")?;
    Ok(format!("{} identical bytes", a.len()))
}

fn main() {
    let criteria: [(&str, Check, Duration); 8] = [
        ("reference values decode and re-encode", reference_fidelity, Duration::from_secs(1)),
        ("codec round trip on 1000 random pairs", codec_round_trip, Duration::from_secs(10)),
        ("topic namespace over HTTP", topic_namespace, Duration::from_secs(1)),
        ("lifecycle table and reservation expiry", lifecycle, Duration::from_secs(5)),
        ("CLI workflow end to end", end_to_end, Duration::from_secs(10)),
        ("feasibility id cannot task", feasibility_id, Duration::from_secs(1)),
        ("semantic store matches oracles", semantic_equivalence, Duration::from_secs(30)),
        ("identical runs give identical transcripts", determinism, Duration::from_secs(20)),
    ];
    let mut failed = 0;
    for (i, (name, check, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let took = start.elapsed();
        let result = result.and_then(|detail| {
            if took <= limit {
                Ok(detail)
            } else {
                Err(format!("{detail}; took {took:?}, limit {limit:?}"))
            }
        });
        match result {
            Ok(detail) => println!("criterion {}: PASS  {name} ({:.2} s): {detail}", i + 1, took.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} ({:.2} s): {why}", i + 1, took.as_secs_f64());
            }
        }
    }
    println!("{} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
