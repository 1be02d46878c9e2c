//! SPS notification topics and the subscription hub.

mod hub;
mod topics;

pub use hub::{
    drained_to_xml, write_event, Drained, NotificationEvent, NotificationHub, NotifyError, Payload, Subscription,
    DEFAULT_QUEUE_CAPACITY,
};
pub use topics::{
    filter_matches, is_known_topic, parse_topic_namespace, topic_for_event, topic_for_event_token,
    topic_namespace_document, topic_set, EventKind, MessageType, NamespaceError, Topic, UnknownEventKind,
    TASKING_REQUEST_EVENT, TASK_EVENT,
};
