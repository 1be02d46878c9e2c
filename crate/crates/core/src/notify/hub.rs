use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::Mutex;

use chrono::{DateTime, Utc};

use super::topics::{filter_matches, is_known_topic, EventKind, MessageType};
use crate::task::{format_instant, write_reservation_report, write_status_report, ReservationReport, StatusReport};
use crate::xml::{XmlWriter, SPS_NS};

pub const DEFAULT_QUEUE_CAPACITY: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Status(StatusReport),
    Reservation(ReservationReport),
}

impl Payload {
    pub fn message_type(&self) -> MessageType {
        match self {
            Payload::Status(_) => MessageType::StatusReport,
            Payload::Reservation(_) => MessageType::ReservationReport,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NotificationEvent {
    pub topic: EventKind,
    pub payload: Payload,
    /// Per-topic, starting at 1.
    pub sequence: u64,
    pub emitted_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NotifyError {
    #[error("unknown topic '{0}'")]
    UnknownTopic(String),
    #[error("unknown subscription '{0}'")]
    UnknownSubscription(String),
    #[error("topic {topic} carries {expected:?}, got {got:?}")]
    PayloadTypeMismatch {
        topic: EventKind,
        expected: MessageType,
        got: MessageType,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subscription {
    pub id: String,
    pub topic_filter: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Drained {
    pub subscription: String,
    pub events: Vec<NotificationEvent>,
    /// Set when events were dropped since the previous drain.
    pub overflowed: bool,
}

#[derive(Debug)]
struct Queue {
    filter: String,
    events: VecDeque<NotificationEvent>,
    overflowed: bool,
}

#[derive(Debug, Default)]
struct HubState {
    sequences: HashMap<EventKind, u64>,
    subscriptions: BTreeMap<u64, Queue>,
    next_subscription: u64,
    published: u64,
}

/// Topic-filtered, pull-based notification delivery.
#[derive(Debug)]
pub struct NotificationHub {
    state: Mutex<HubState>,
    queue_capacity: usize,
}

impl Default for NotificationHub {
    fn default() -> Self {
        Self::new(DEFAULT_QUEUE_CAPACITY)
    }
}

fn parse_subscription_id(id: &str) -> Option<u64> {
    id.strip_prefix("sub_")?.parse().ok()
}

impl NotificationHub {
    pub fn new(queue_capacity: usize) -> Self {
        NotificationHub {
            state: Mutex::new(HubState::default()),
            queue_capacity: queue_capacity.max(1),
        }
    }

    /// Subscribes to a leaf topic or to a parent (all of its children).
    /// Past events are not replayed.
    pub fn subscribe(&self, topic_filter: &str) -> Result<Subscription, NotifyError> {
        if !is_known_topic(topic_filter) {
            return Err(NotifyError::UnknownTopic(topic_filter.to_string()));
        }
        let mut st = self.state.lock().unwrap();
        st.next_subscription += 1;
        let n = st.next_subscription;
        st.subscriptions.insert(
            n,
            Queue {
                filter: topic_filter.to_string(),
                events: VecDeque::new(),
                overflowed: false,
            },
        );
        Ok(Subscription {
            id: format!("sub_{n}"),
            topic_filter: topic_filter.to_string(),
        })
    }

    pub fn unsubscribe(&self, id: &str) -> Result<(), NotifyError> {
        let mut st = self.state.lock().unwrap();
        parse_subscription_id(id)
            .and_then(|n| st.subscriptions.remove(&n))
            .map(|_| ())
            .ok_or_else(|| NotifyError::UnknownSubscription(id.to_string()))
    }

    /// Assigns the next per-topic sequence number and appends the event to
    /// every matching queue. Returns the event and the number of queues.
    pub fn publish(
        &self,
        topic: EventKind,
        payload: Payload,
        emitted_at: DateTime<Utc>,
    ) -> Result<(NotificationEvent, usize), NotifyError> {
        let expected = topic.message_type();
        if payload.message_type() != expected {
            return Err(NotifyError::PayloadTypeMismatch {
                topic,
                expected,
                got: payload.message_type(),
            });
        }
        let mut st = self.state.lock().unwrap();
        let seq = st.sequences.entry(topic).or_insert(0);
        *seq += 1;
        let event = NotificationEvent {
            topic,
            payload,
            sequence: *seq,
            emitted_at,
        };
        st.published += 1;
        let mut delivered = 0;
        for q in st.subscriptions.values_mut() {
            if filter_matches(&q.filter, topic) {
                if q.events.len() >= self.queue_capacity {
                    q.events.pop_front();
                    q.overflowed = true;
                }
                q.events.push_back(event.clone());
                delivered += 1;
            }
        }
        Ok((event, delivered))
    }

    /// Removes up to `max` pending events (all when `None`), oldest first.
    pub fn drain(&self, id: &str, max: Option<usize>) -> Result<Drained, NotifyError> {
        let mut st = self.state.lock().unwrap();
        let q = parse_subscription_id(id)
            .and_then(|n| st.subscriptions.get_mut(&n))
            .ok_or_else(|| NotifyError::UnknownSubscription(id.to_string()))?;
        let n = max.unwrap_or(usize::MAX).min(q.events.len());
        let events: Vec<_> = q.events.drain(..n).collect();
        let overflowed = std::mem::take(&mut q.overflowed);
        Ok(Drained {
            subscription: id.to_string(),
            events,
            overflowed,
        })
    }

    pub fn pending(&self, id: &str) -> Result<usize, NotifyError> {
        let st = self.state.lock().unwrap();
        parse_subscription_id(id)
            .and_then(|n| st.subscriptions.get(&n))
            .map(|q| q.events.len())
            .ok_or_else(|| NotifyError::UnknownSubscription(id.to_string()))
    }

    pub fn subscriptions(&self) -> Vec<Subscription> {
        let st = self.state.lock().unwrap();
        st.subscriptions
            .iter()
            .map(|(n, q)| Subscription {
                id: format!("sub_{n}"),
                topic_filter: q.filter.clone(),
            })
            .collect()
    }

    /// Total number of events published so far.
    pub fn published(&self) -> u64 {
        self.state.lock().unwrap().published
    }
}

pub fn write_event(w: &mut XmlWriter, e: &NotificationEvent) {
    w.start("sps:Notification")
        .attr("topic", e.topic.token())
        .attr("sequence", &e.sequence.to_string())
        .attr("emittedAt", &format_instant(e.emitted_at));
    match &e.payload {
        Payload::Status(r) => write_status_report(w, r),
        Payload::Reservation(r) => write_reservation_report(w, r),
    }
    w.end();
}

/// `<sps:Notifications>` document for a drain.
pub fn drained_to_xml(d: &Drained) -> String {
    let mut w = XmlWriter::new();
    w.start("sps:Notifications")
        .attr("xmlns:sps", SPS_NS)
        .attr("version", "2.0")
        .attr("subscription", &d.subscription)
        .attr("overflow", if d.overflowed { "true" } else { "false" });
    for e in &d.events {
        write_event(&mut w, e);
    }
    w.end();
    w.finish()
}
