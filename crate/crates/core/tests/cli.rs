use std::process::{Command, Output};
use std::sync::Arc;

use sps_core::service::{http, Service};

fn sps(endpoint: &str, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sps"))
        .arg("--endpoint")
        .arg(endpoint)
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn subcommands_against_a_live_service() {
    let server = http::spawn(Arc::new(Service::with_default_config()), "127.0.0.1:0".parse().unwrap()).unwrap();
    let ep = server.endpoint();

    let o = sps(
        &ep,
        &[
            "submit",
            "--procedure",
            "pointable-imager-01",
            "measurementStart=2010-08-20T12:37:00+02:00",
            "measurementEnd=2010-08-20T14:30:00+02:00",
            "target=pointToLookAt:51.902112,8.192728,0",
            "priority=3.5",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("task: task_1"), "{text}");
    assert!(text.contains("taskStatus: InExecution"), "{text}");

    let o = sps(&ep, &["confirm", "--task", "task_1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("IllegalTransition"));

    let o = sps(&ep, &["update", "--task", "task_1", "priority=4.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = sps(&ep, &["--output", "xml", "task", "--task", "task_1"]);
    assert!(stdout(&o).contains(",4.5</sps:values>"), "{}", stdout(&o));

    let o = sps(&ep, &["submit", "--procedure", "pointable-imager-01", "priority=9"]);
    assert_eq!(o.status.code(), Some(4));
    let o = sps(&ep, &["status", "--task", "task_77"]);
    assert_eq!(o.status.code(), Some(3));

    let o = sps(&ep, &["subscribe", "--topic", "TaskEvent"]);
    assert!(stdout(&o).contains("subscription=sub_1"), "{}", stdout(&o));
    sps(&ep, &["cancel", "--task", "task_1"]);
    let o = sps(&ep, &["drain", "--subscription", "sub_1"]);
    assert!(stdout(&o).starts_with("TaskCancellation#1 task_1 Cancelled"), "{}", stdout(&o));

    let o = sps(&ep, &["topics"]);
    assert_eq!(stdout(&o).matches("messageTypes=").count(), 13);

    // summary is a projection of the same response
    let xml = stdout(&sps(&ep, &["--output", "xml", "status", "--task", "task_1"]));
    let summary = stdout(&sps(&ep, &["status", "--task", "task_1"]));
    assert_eq!(sps_core::cli::summarize(xml.trim()), summary.trim());
}

#[test]
fn workflow_exit_codes() {
    let server = http::spawn(Arc::new(Service::with_default_config()), "127.0.0.1:0".parse().unwrap()).unwrap();
    let o = sps(&server.endpoint(), &["workflow", "--procedure", "pointable-imager-01"]);
    assert_eq!(o.status.code(), Some(0));
    let steps = stdout(&o).lines().filter(|l| l.starts_with('[')).count();
    assert_eq!(steps, 6);

    let o = sps(&server.endpoint(), &["workflow", "--procedure", "no-such-procedure"]);
    assert_eq!(o.status.code(), Some(1));

    let o = sps("http://127.0.0.1:9/sps", &["capabilities", "--timeout", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = sps("http://127.0.0.1:9/sps", &["frobnicate"]);
    assert_eq!(o.status.code(), Some(4));
}
