use std::fmt;

use crate::xml::{self as x, XmlWriter, SPS_NS, WSTOP_NS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MessageType {
    StatusReport,
    ReservationReport,
}

impl MessageType {
    pub fn qname(self) -> &'static str {
        match self {
            MessageType::StatusReport => "sps:StatusReport",
            MessageType::ReservationReport => "sps:ReservationReport",
        }
    }
}

/// A channel of the topic namespace. Parents carry no message type.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Topic {
    pub name: String,
    pub parent: Option<String>,
    pub message_type: Option<MessageType>,
}

/// The lifecycle events that are published, one per leaf topic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EventKind {
    TaskFailure,
    TaskCancellation,
    TaskCompletion,
    TaskConfirmation,
    TaskUpdate,
    DataPublication,
    TaskReservation,
    TaskSubmission,
    ReservationExpiration,
    TaskingRequestExpiration,
    TaskingRequestRejection,
    TaskingRequestAcceptance,
    TaskingRequestPending,
}

pub const TASK_EVENT: &str = "TaskEvent";
pub const TASKING_REQUEST_EVENT: &str = "TaskingRequestEvent";

impl EventKind {
    /// In namespace document order.
    pub const ALL: [EventKind; 13] = [
        EventKind::TaskFailure,
        EventKind::TaskCancellation,
        EventKind::TaskCompletion,
        EventKind::TaskConfirmation,
        EventKind::TaskUpdate,
        EventKind::DataPublication,
        EventKind::TaskReservation,
        EventKind::TaskSubmission,
        EventKind::ReservationExpiration,
        EventKind::TaskingRequestExpiration,
        EventKind::TaskingRequestRejection,
        EventKind::TaskingRequestAcceptance,
        EventKind::TaskingRequestPending,
    ];

    pub fn token(self) -> &'static str {
        match self {
            EventKind::TaskFailure => "TaskFailure",
            EventKind::TaskCancellation => "TaskCancellation",
            EventKind::TaskCompletion => "TaskCompletion",
            EventKind::TaskConfirmation => "TaskConfirmation",
            EventKind::TaskUpdate => "TaskUpdate",
            EventKind::DataPublication => "DataPublication",
            EventKind::TaskReservation => "TaskReservation",
            EventKind::TaskSubmission => "TaskSubmission",
            EventKind::ReservationExpiration => "ReservationExpiration",
            EventKind::TaskingRequestExpiration => "TaskingRequestExpiration",
            EventKind::TaskingRequestRejection => "TaskingRequestRejection",
            EventKind::TaskingRequestAcceptance => "TaskingRequestAcceptance",
            EventKind::TaskingRequestPending => "TaskingRequestPending",
        }
    }

    pub fn parent(self) -> &'static str {
        match self {
            EventKind::TaskingRequestExpiration
            | EventKind::TaskingRequestRejection
            | EventKind::TaskingRequestAcceptance
            | EventKind::TaskingRequestPending => TASKING_REQUEST_EVENT,
            _ => TASK_EVENT,
        }
    }

    pub fn message_type(self) -> MessageType {
        match self {
            EventKind::TaskReservation | EventKind::ReservationExpiration => MessageType::ReservationReport,
            _ => MessageType::StatusReport,
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown event kind '{0}'")]
pub struct UnknownEventKind(pub String);

impl std::str::FromStr for EventKind {
    type Err = UnknownEventKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EventKind::ALL
            .into_iter()
            .find(|k| k.token() == s)
            .ok_or_else(|| UnknownEventKind(s.to_string()))
    }
}

/// Leaf topic an event kind is published on. Topic names equal event names.
pub fn topic_for_event(kind: EventKind) -> Topic {
    Topic {
        name: kind.token().to_string(),
        parent: Some(kind.parent().to_string()),
        message_type: Some(kind.message_type()),
    }
}

pub fn topic_for_event_token(token: &str) -> Result<Topic, UnknownEventKind> {
    token.parse().map(topic_for_event)
}

/// The 2 parent and 13 leaf topics, parents first.
pub fn topic_set() -> Vec<Topic> {
    let mut out = vec![
        Topic {
            name: TASK_EVENT.to_string(),
            parent: None,
            message_type: None,
        },
        Topic {
            name: TASKING_REQUEST_EVENT.to_string(),
            parent: None,
            message_type: None,
        },
    ];
    out.extend(EventKind::ALL.into_iter().map(topic_for_event));
    out
}

/// True if `filter` (a leaf, or a parent meaning all its children) matches
/// the leaf topic of `kind`.
pub fn filter_matches(filter: &str, kind: EventKind) -> bool {
    filter == kind.token() || filter == kind.parent()
}

pub fn is_known_topic(name: &str) -> bool {
    name == TASK_EVENT || name == TASKING_REQUEST_EVENT || name.parse::<EventKind>().is_ok()
}

/// The WS-Topics namespace document.
pub fn topic_namespace_document() -> String {
    let mut w = XmlWriter::new();
    w.start("wstop:TopicNamespace")
        .attr("xmlns:wstop", WSTOP_NS)
        .attr("xmlns:sps", SPS_NS)
        .attr("name", "SPS-Topic-Namespace")
        .attr("targetNamespace", SPS_NS)
        .attr("final", "true");
    for parent in [TASK_EVENT, TASKING_REQUEST_EVENT] {
        w.start("wstop:Topic").attr("name", parent);
        for kind in EventKind::ALL.into_iter().filter(|k| k.parent() == parent) {
            w.start("wstop:Topic")
                .attr("name", kind.token())
                .attr("messageTypes", kind.message_type().qname())
                .end();
        }
        w.end();
    }
    w.end();
    w.finish()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid topic namespace: {0}")]
pub struct NamespaceError(pub String);

/// Reads a topic namespace document back into its topic set.
pub fn parse_topic_namespace(xml: &str) -> Result<Vec<Topic>, NamespaceError> {
    let doc = x::parse(xml).map_err(|(_, m)| NamespaceError(m))?;
    let root = doc.root_element();
    if root.tag_name().name() != "TopicNamespace" || root.tag_name().namespace() != Some(WSTOP_NS) {
        return Err(NamespaceError("root is not wstop:TopicNamespace".into()));
    }
    if root.attribute("targetNamespace") != Some(SPS_NS) {
        return Err(NamespaceError("unexpected targetNamespace".into()));
    }
    let is_topic = |n: &roxmltree::Node| {
        n.is_element() && n.tag_name().name() == "Topic" && n.tag_name().namespace() == Some(WSTOP_NS)
    };
    let mut parents = Vec::new();
    let mut leaves = Vec::new();
    for p in root.children().filter(is_topic) {
        let pname = p.attribute("name").ok_or_else(|| NamespaceError("topic without name".into()))?;
        parents.push(Topic {
            name: pname.to_string(),
            parent: None,
            message_type: None,
        });
        for c in p.children().filter(is_topic) {
            let name = c.attribute("name").ok_or_else(|| NamespaceError("topic without name".into()))?;
            let mt = match c.attribute("messageTypes") {
                Some("sps:StatusReport") => MessageType::StatusReport,
                Some("sps:ReservationReport") => MessageType::ReservationReport,
                other => return Err(NamespaceError(format!("topic {name}: bad messageTypes {other:?}"))),
            };
            leaves.push(Topic {
                name: name.to_string(),
                parent: Some(pname.to_string()),
                message_type: Some(mt),
            });
        }
    }
    parents.extend(leaves);
    Ok(parents)
}
