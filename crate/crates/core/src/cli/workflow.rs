//! Scripted end-to-end run: capabilities, tasking description,
//! feasibility, submit, wait for the outcome, result access.

use std::time::{Duration, Instant};

use roxmltree::Document;

use super::assign::{encode_assignments, Assignment};
use super::client::Client;
use super::CliError;
use crate::service::requests as rq;
use crate::swe::{parse_tasking_description, TextEncoding};
use crate::xml::SPS_NS;

#[derive(Debug, Clone)]
pub struct WorkflowOptions {
    pub procedure: String,
    pub assignments: Vec<Assignment>,
    pub cancel_midway: bool,
    /// Virtual seconds per clock advance.
    pub step_s: u64,
    /// Gives up after this many advances.
    pub max_steps: usize,
}

impl Default for WorkflowOptions {
    fn default() -> Self {
        WorkflowOptions {
            procedure: "pointable-imager-01".into(),
            assignments: Vec::new(),
            cancel_midway: false,
            step_s: 300,
            max_steps: 48,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WorkflowReport {
    pub transcript: Vec<String>,
    pub task: Option<String>,
    pub outcome: Option<String>,
    pub references: Vec<(String, bool)>,
    pub complete: bool,
}

impl WorkflowReport {
    fn say(&mut self, line: String) {
        log::info!("{line}");
        self.transcript.push(line);
    }
}

/// One drained notification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub topic: String,
    pub sequence: String,
    pub emitted_at: String,
    pub task: Option<String>,
    pub state: Option<String>,
    pub progress: Option<String>,
}

fn first_text(doc: &Document, local: &str) -> Option<String> {
    doc.descendants()
        .find(|n| n.is_element() && n.tag_name().name() == local && n.tag_name().namespace() == Some(SPS_NS))
        .map(|n| n.text().unwrap_or("").trim().to_string())
}

fn parse(xml: &str) -> Result<Document<'_>, CliError> {
    Document::parse(xml).map_err(|e| CliError::Protocol(format!("unparseable response: {e}")))
}

fn text(xml: &str, local: &str) -> Result<Option<String>, CliError> {
    Ok(first_text(&parse(xml)?, local))
}

pub fn parse_events(xml: &str) -> Result<Vec<Event>, CliError> {
    let doc = parse(xml)?;
    let child = |n: roxmltree::Node, local: &str| {
        n.descendants()
            .find(|c| c.is_element() && c.tag_name().name() == local)
            .and_then(|c| c.text())
            .map(|t| t.trim().to_string())
    };
    Ok(doc
        .descendants()
        .filter(|n| n.is_element() && n.tag_name().name() == "Notification")
        .map(|n| Event {
            topic: n.attribute("topic").unwrap_or("").to_string(),
            sequence: n.attribute("sequence").unwrap_or("").to_string(),
            emitted_at: n.attribute("emittedAt").unwrap_or("").to_string(),
            task: child(n, "task"),
            state: child(n, "taskStatus").or_else(|| child(n, "requestStatus")),
            progress: child(n, "percentCompletion"),
        })
        .collect())
}

const TERMINAL: [&str; 3] = ["TaskCompletion", "TaskCancellation", "TaskFailure"];

pub fn run_workflow(client: &Client, opts: &WorkflowOptions) -> Result<WorkflowReport, CliError> {
    let mut rep = WorkflowReport::default();

    let caps = client.operation(&rq::get_capabilities())?;
    let doc = parse(&caps)?;
    let offerings: Vec<String> = doc
        .descendants()
        .filter(|n| n.is_element() && n.tag_name().name() == "offering")
        .filter_map(|n| n.children().find(|c| c.tag_name().name() == "procedure").and_then(|c| c.text()))
        .map(str::to_string)
        .collect();
    let operations = doc.descendants().filter(|n| n.tag_name().name() == "Operation").count();
    rep.say(format!(
        "[1] capabilities: {} offerings ({}), {operations} operations",
        offerings.len(),
        offerings.join(", ")
    ));
    if !offerings.contains(&opts.procedure) {
        rep.say(format!("    procedure {} is not offered", opts.procedure));
        return Ok(rep);
    }

    let dt = client.operation(&rq::describe_tasking(&opts.procedure))?;
    let desc = parse_tasking_description(&dt).map_err(|e| CliError::Protocol(e.to_string()))?;
    let enc = TextEncoding::default();
    let values = encode_assignments(&desc, &enc, &opts.assignments)?;
    rep.say(format!(
        "[2] describe-tasking: {} parameters, values {values}",
        desc.fields().len()
    ));

    let fes = client.operation(&rq::tasking("GetFeasibility", &opts.procedure, &enc, &values, None))?;
    let feasible = text(&fes, "feasible")?.unwrap_or_default();
    rep.say(format!(
        "[3] feasibility: {} {} feasible={feasible}",
        text(&fes, "request")?.unwrap_or_default(),
        text(&fes, "task")?.unwrap_or_default()
    ));
    if feasible != "true" {
        return Ok(rep);
    }

    let sub = client.subscribe("TaskEvent")?;
    let sub_id = parse(&sub)?
        .root_element()
        .attribute("subscription")
        .map(str::to_string)
        .ok_or_else(|| CliError::Protocol("subscribe response without subscription id".into()))?;
    let submitted = client.operation(&rq::tasking("Submit", &opts.procedure, &enc, &values, None))?;
    let task = text(&submitted, "task")?;
    rep.say(format!(
        "[4] submit: {} {} {}",
        text(&submitted, "request")?.unwrap_or_default(),
        text(&submitted, "requestStatus")?.unwrap_or_default(),
        task.as_deref().unwrap_or("no task")
    ));
    let Some(task) = task else {
        let _ = client.unsubscribe(&sub_id);
        return Ok(rep);
    };
    rep.task = Some(task.clone());

    let outcome = watch(client, opts, &mut rep, &sub_id, &task)?;
    let _ = client.unsubscribe(&sub_id);
    let Some(outcome) = outcome else {
        rep.say(format!("[5] notification: none after {} steps", opts.max_steps));
        return Ok(rep);
    };
    rep.say(format!("[5] notification: {outcome} for {task}"));
    rep.outcome = Some(outcome);

    let dra = client.operation(&rq::task_operation("DescribeResultAccess", &task))?;
    let doc = parse(&dra)?;
    rep.references = doc
        .descendants()
        .filter(|n| n.is_element() && n.tag_name().name() == "ResultReference")
        .map(|n| (n.attribute("uri").unwrap_or("").to_string(), n.attribute("partial") == Some("true")))
        .collect();
    let listed: Vec<String> = rep
        .references
        .iter()
        .map(|(u, p)| if *p { format!("{u} (partial)") } else { u.clone() })
        .collect();
    rep.say(format!("[6] results: {} reference(s) {}", rep.references.len(), listed.join(" ")));
    rep.complete = !rep.references.is_empty();
    Ok(rep)
}

/// Steps the clock (or waits, under a system clock) until a terminal event
/// for `task` arrives. Cancels once progress reaches 50% if asked to.
fn watch(
    client: &Client,
    opts: &WorkflowOptions,
    rep: &mut WorkflowReport,
    sub: &str,
    task: &str,
) -> Result<Option<String>, CliError> {
    let mut virtual_clock = true;
    let mut cancelled = false;
    let started = Instant::now();
    for _ in 0..=opts.max_steps {
        let events = parse_events(&client.drain(sub, if virtual_clock { 0.0 } else { 1.0 }, None)?)?;
        for e in events.iter().filter(|e| e.task.as_deref() == Some(task)) {
            rep.say(format!(
                "    event {}#{} {} {} {}% at {}",
                e.topic,
                e.sequence,
                task,
                e.state.as_deref().unwrap_or("?"),
                e.progress.as_deref().unwrap_or("?"),
                e.emitted_at
            ));
            if TERMINAL.contains(&e.topic.as_str()) {
                return Ok(Some(e.topic.clone()));
            }
        }
        if opts.cancel_midway && !cancelled {
            let status = client.operation(&rq::get_status(task))?;
            let progress: u32 = text(&status, "percentCompletion")?.and_then(|p| p.parse().ok()).unwrap_or(0);
            if progress >= 50 {
                let r = client.operation(&rq::task_operation("Cancel", task))?;
                rep.say(format!("    cancel at {progress}%: {}", text(&r, "taskStatus")?.unwrap_or_default()));
                cancelled = true;
                continue;
            }
        }
        if virtual_clock {
            match client.advance(opts.step_s) {
                Ok(clock) => {
                    let now = parse(&clock)?.root_element().attribute("now").unwrap_or("").to_string();
                    rep.say(format!("    clock +{}s -> {now}", opts.step_s));
                }
                Err(CliError::Service { status: 403, .. }) => {
                    virtual_clock = false;
                    rep.say("    clock control unavailable, waiting in real time".into());
                }
                Err(e) => return Err(e),
            }
        } else if started.elapsed() > Duration::from_secs(opts.step_s * opts.max_steps as u64) {
            break;
        }
    }
    Ok(None)
}
