//! Command-line client for the HTTP binding, plus `serve`.

mod assign;
mod client;
mod workflow;

pub use assign::{build_block, describe_block, encode_assignments, parse_assignment, resolve, Assignment};
pub use client::Client;
pub use workflow::{parse_events, run_workflow, Event, WorkflowOptions, WorkflowReport};

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::service::{http, load_from_args, requests as rq, Service};
use crate::swe::{decode_parameter_data, parse_tasking_description, read_parameter_data, ParameterData, TextEncoding};
use crate::xml::SPS_NS;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("network error: {0}")]
    Network(String),
    #[error("service exception {code}{}: {}", locator.as_ref().map(|l| format!(" at {l}")).unwrap_or_default(), texts.join("; "))]
    Service {
        status: u16,
        code: String,
        locator: Option<String>,
        texts: Vec<String>,
    },
    #[error("{0}")]
    Usage(String),
    #[error("unexpected response: {0}")]
    Protocol(String),
    #[error("workflow did not complete")]
    Incomplete,
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Incomplete => 1,
            CliError::Network(_) => 2,
            CliError::Service { .. } => 3,
            CliError::Usage(_) | CliError::Protocol(_) => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Output {
    Xml,
    Summary,
}

#[derive(Debug, Parser)]
#[command(name = "sps", version, about = "Sensor Planning Service server and client")]
pub struct Cli {
    /// Operation endpoint of the service.
    #[arg(long, global = true, default_value = "http://localhost:8484/sps", env = "SPS_ENDPOINT")]
    pub endpoint: String,
    #[arg(long, global = true, value_enum, default_value_t = Output::Summary)]
    pub output: Output,
    /// Request timeout in seconds.
    #[arg(long, global = true, default_value_t = 40.0)]
    pub timeout: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Tasking {
    #[arg(long)]
    pub procedure: String,
    /// `name=value`; choices as `name=branch:v1,v2`.
    pub assignments: Vec<String>,
    /// Raw encoded value string, instead of assignments.
    #[arg(long, conflicts_with = "assignments")]
    pub values: Option<String>,
    #[arg(long, default_value = ",")]
    pub token_separator: String,
    #[arg(long, default_value = "@@")]
    pub block_separator: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the service.
    Serve {
        /// Service configuration; falls back to SPS_CONFIG, then the built-in one.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        port: Option<u16>,
        #[arg(long, default_value = "127.0.0.1")]
        bind: String,
    },
    Capabilities,
    DescribeSensor {
        #[arg(long)]
        procedure: String,
    },
    DescribeTasking {
        #[arg(long)]
        procedure: String,
    },
    Feasibility(Tasking),
    Submit {
        #[command(flatten)]
        tasking: Tasking,
        #[arg(long)]
        feasibility_id: Option<String>,
    },
    Reserve(Tasking),
    Confirm {
        #[arg(long)]
        task: String,
    },
    /// Change parameters of a task; unassigned fields keep their values.
    Update {
        #[arg(long)]
        task: String,
        assignments: Vec<String>,
    },
    Cancel {
        #[arg(long)]
        task: String,
    },
    /// Status of a task, or of a request (`--request req_<n>`).
    Status {
        #[arg(long, required_unless_present = "request", conflicts_with = "request")]
        task: Option<String>,
        #[arg(long)]
        request: Option<String>,
    },
    Task {
        #[arg(long)]
        task: String,
    },
    Results {
        #[arg(long)]
        task: String,
        /// Also download each result document.
        #[arg(long)]
        fetch: bool,
    },
    Topics,
    Subscribe {
        /// A leaf topic or a parent (TaskEvent, TaskingRequestEvent).
        #[arg(long)]
        topic: String,
    },
    Drain {
        #[arg(long)]
        subscription: String,
        #[arg(long, default_value_t = 0.0)]
        wait: f64,
        #[arg(long)]
        max: Option<usize>,
    },
    Unsubscribe {
        #[arg(long)]
        subscription: String,
    },
    /// capabilities, describe-tasking, feasibility, submit, outcome, results.
    Workflow {
        #[arg(long, default_value = "pointable-imager-01")]
        procedure: String,
        #[arg(long)]
        cancel_midway: bool,
        /// Virtual seconds per clock step.
        #[arg(long, default_value_t = 300)]
        step: u64,
        assignments: Vec<String>,
    },
    /// Advance the virtual clock.
    Advance {
        #[arg(long)]
        seconds: u64,
    },
}

/// Indented `name: text` lines for leaf elements, attributes inline.
pub fn summarize(xml: &str) -> String {
    let Ok(doc) = roxmltree::Document::parse(xml) else {
        return xml.to_string();
    };
    let mut out = Vec::new();
    fn walk(n: roxmltree::Node, depth: usize, out: &mut Vec<String>) {
        if !n.is_element() {
            return;
        }
        let attrs: Vec<String> = n
            .attributes()
            .filter(|a| a.namespace().is_none() && a.name() != "version")
            .map(|a| format!("{}={}", a.name(), a.value()))
            .collect();
        let kids: Vec<_> = n.children().filter(|c| c.is_element()).collect();
        let text = n.text().map(str::trim).unwrap_or("");
        let pad = "  ".repeat(depth);
        let name = n.tag_name().name();
        let attrs = if attrs.is_empty() { String::new() } else { format!(" [{}]", attrs.join(" ")) };
        if kids.is_empty() {
            out.push(format!("{pad}{name}{attrs}: {text}"));
        } else {
            out.push(format!("{pad}{name}{attrs}"));
            for k in kids {
                walk(k, depth + 1, out);
            }
        }
    }
    walk(doc.root_element(), 0, &mut out);
    out.join("\n")
}

fn show(output: Output, xml: &str) {
    match output {
        Output::Xml => println!("{xml}"),
        Output::Summary => println!("{}", summarize(xml)),
    }
}

fn assignments(raw: &[String]) -> Result<Vec<Assignment>, CliError> {
    raw.iter().map(|a| parse_assignment(a)).collect()
}

fn tasking_values(client: &Client, t: &Tasking) -> Result<(TextEncoding, String), CliError> {
    let enc = TextEncoding::new(&t.token_separator, &t.block_separator).map_err(|e| CliError::Usage(e.to_string()))?;
    if let Some(v) = &t.values {
        return Ok((enc, v.clone()));
    }
    let desc = parse_tasking_description(&client.operation(&rq::describe_tasking(&t.procedure))?)
        .map_err(|e| CliError::Protocol(e.to_string()))?;
    let values = encode_assignments(&desc, &enc, &assignments(&t.assignments)?)?;
    Ok((enc, values))
}

/// Current parameters of a task with the assignments applied on top.
fn updated_values(client: &Client, task: &str, raw: &[String]) -> Result<(TextEncoding, String), CliError> {
    let record = client.operation(&rq::task_operation("GetTask", task))?;
    let doc = roxmltree::Document::parse(&record).map_err(|e| CliError::Protocol(e.to_string()))?;
    let find = |local: &str| {
        doc.descendants()
            .find(|n| n.is_element() && n.tag_name().name() == local && n.tag_name().namespace() == Some(SPS_NS))
    };
    let procedure = find("procedure")
        .and_then(|n| n.text())
        .ok_or_else(|| CliError::Protocol("task record without procedure".into()))?;
    let (enc, values) = find("ParameterData")
        .ok_or_else(|| CliError::Protocol("task record without parameters".into()))
        .and_then(|n| read_parameter_data(&n).map_err(|e| CliError::Protocol(e.to_string())))?;
    let desc = parse_tasking_description(&client.operation(&rq::describe_tasking(procedure))?)
        .map_err(|e| CliError::Protocol(e.to_string()))?;
    let mut data = decode_parameter_data(&desc, &enc, &values).map_err(|e| CliError::Protocol(e.to_string()))?;
    for a in assignments(raw)? {
        let f = resolve(desc.fields(), &a.name)?;
        let v = assign::parse_value(f, &a.value)?;
        for b in &mut data.blocks {
            b.insert(&f.name, v.clone());
        }
    }
    let text = crate::swe::encode_parameter_data(&desc, &ParameterData::new(enc.clone(), data.blocks))
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok((enc, text))
}

fn serve(config: Option<PathBuf>, port: Option<u16>, bind: &str) -> Result<(), CliError> {
    let cfg = load_from_args(config.as_deref()).map_err(|e| CliError::Usage(e.to_string()))?;
    let svc = Arc::new(Service::new(cfg).map_err(|e| CliError::Usage(e.to_string()))?);
    let addr: SocketAddr = format!("{bind}:{}", port.unwrap_or(svc.port()))
        .parse()
        .map_err(|e| CliError::Usage(format!("bad bind address: {e}")))?;
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Network(e.to_string()))?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| CliError::Network(format!("cannot bind {addr}: {e}")))?;
        log::info!("listening on http://{addr}/sps");
        eprintln!("listening on http://{addr}/sps");
        http::serve(svc, listener, async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| CliError::Network(e.to_string()))
    })
}

/// Runs one command. Output goes to stdout; the caller reports errors.
pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Command::Serve { config, port, bind } = cli.command {
        return serve(config, port, &bind);
    }
    if !(cli.timeout.is_finite() && cli.timeout > 0.0) {
        return Err(CliError::Usage("timeout must be positive".into()));
    }
    let client = Client::new(&cli.endpoint, Duration::from_secs_f64(cli.timeout))?;
    let out = cli.output;
    let op = |xml: String| -> Result<(), CliError> {
        show(out, &client.operation(&xml)?);
        Ok(())
    };
    match cli.command {
        Command::Serve { .. } => unreachable!(),
        Command::Capabilities => op(rq::get_capabilities()),
        Command::DescribeSensor { procedure } => op(rq::describe_sensor(&procedure)),
        Command::DescribeTasking { procedure } => op(rq::describe_tasking(&procedure)),
        Command::Feasibility(t) => {
            let (enc, v) = tasking_values(&client, &t)?;
            op(rq::tasking("GetFeasibility", &t.procedure, &enc, &v, None))
        }
        Command::Submit { tasking, feasibility_id } => {
            let (enc, v) = tasking_values(&client, &tasking)?;
            op(rq::tasking("Submit", &tasking.procedure, &enc, &v, feasibility_id.as_deref()))
        }
        Command::Reserve(t) => {
            let (enc, v) = tasking_values(&client, &t)?;
            op(rq::tasking("Reserve", &t.procedure, &enc, &v, None))
        }
        Command::Confirm { task } => op(rq::task_operation("Confirm", &task)),
        Command::Update { task, assignments } => {
            let (enc, v) = updated_values(&client, &task, &assignments)?;
            op(rq::update(&task, &enc, &v))
        }
        Command::Cancel { task } => op(rq::task_operation("Cancel", &task)),
        Command::Status { task, request } => op(rq::get_status(&task.or(request).unwrap_or_default())),
        Command::Task { task } => op(rq::task_operation("GetTask", &task)),
        Command::Results { task, fetch } => {
            let body = client.operation(&rq::task_operation("DescribeResultAccess", &task))?;
            show(out, &body);
            if fetch {
                let doc = roxmltree::Document::parse(&body).map_err(|e| CliError::Protocol(e.to_string()))?;
                for uri in doc.descendants().filter_map(|n| n.attribute("uri")) {
                    println!("--- {uri}");
                    println!("{}", client.get(&format!("/{uri}"), &[])?);
                }
            }
            Ok(())
        }
        Command::Topics => {
            show(out, &client.topics()?);
            Ok(())
        }
        Command::Subscribe { topic } => {
            show(out, &client.subscribe(&topic)?);
            Ok(())
        }
        Command::Drain { subscription, wait, max } => {
            let body = client.drain(&subscription, wait, max)?;
            match out {
                Output::Xml => println!("{body}"),
                Output::Summary => {
                    for e in parse_events(&body)? {
                        println!(
                            "{}#{} {} {} {}% at {}",
                            e.topic,
                            e.sequence,
                            e.task.as_deref().unwrap_or("-"),
                            e.state.as_deref().unwrap_or("-"),
                            e.progress.as_deref().unwrap_or("-"),
                            e.emitted_at
                        );
                    }
                }
            }
            Ok(())
        }
        Command::Unsubscribe { subscription } => client.unsubscribe(&subscription),
        Command::Workflow {
            procedure,
            cancel_midway,
            step,
            assignments: raw,
        } => {
            let opts = WorkflowOptions {
                procedure,
                assignments: assignments(&raw)?,
                cancel_midway,
                step_s: step.max(1),
                ..WorkflowOptions::default()
            };
            let report = run_workflow(&client, &opts)?;
            for line in &report.transcript {
                println!("{line}");
            }
            if report.complete {
                Ok(())
            } else {
                Err(CliError::Incomplete)
            }
        }
        Command::Advance { seconds } => {
            show(out, &client.advance(seconds)?);
            Ok(())
        }
    }
}

/// Exit status for a finished run, printing the error if there is one.
pub fn exit_status(result: Result<(), CliError>) -> u8 {
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("sps: {e}");
            e.exit_code()
        }
    }
}
