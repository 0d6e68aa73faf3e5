//! Live preview fan-out: one bounded, drop-oldest queue per subscriber.
//!
//! Publishing never blocks, so a slow viewer cannot stall the recording
//! thread; it only loses preview envelopes, which are counted.

use std::collections::{HashSet, VecDeque};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use recorder_core::model::{SampleEnvelope, StreamId};
use recorder_core::pipeline::LiveTap;
use serde::{Deserialize, Serialize};
use tokio::sync::Notify;

pub const DEFAULT_QUEUE_CAPACITY: usize = 256;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiveStats {
    pub subscribers: u64,
    /// Envelopes that matched a subscription.
    pub published: u64,
    pub delivered: u64,
    pub dropped: u64,
}

#[derive(Debug, Default)]
struct Queue {
    items: VecDeque<SampleEnvelope>,
    closed: bool,
}

#[derive(Debug)]
pub struct Subscription {
    /// `None` subscribes to every stream.
    streams: Option<HashSet<StreamId>>,
    capacity: usize,
    queue: Mutex<Queue>,
    notify: Notify,
    published: AtomicU64,
    delivered: AtomicU64,
    dropped: AtomicU64,
}

impl Subscription {
    fn new(streams: Option<HashSet<StreamId>>, capacity: usize) -> Self {
        Subscription {
            streams,
            capacity: capacity.max(1),
            queue: Mutex::new(Queue::default()),
            notify: Notify::new(),
            published: AtomicU64::new(0),
            delivered: AtomicU64::new(0),
            dropped: AtomicU64::new(0),
        }
    }

    pub fn wants(&self, stream: StreamId) -> bool {
        self.streams.as_ref().is_none_or(|s| s.contains(&stream))
    }

    fn offer(&self, env: &SampleEnvelope) {
        if !self.wants(env.stream()) {
            return;
        }
        let mut q = self.queue.lock().expect("live queue lock");
        if q.closed {
            return;
        }
        self.published.fetch_add(1, Ordering::Relaxed);
        if q.items.len() >= self.capacity {
            q.items.pop_front();
            self.dropped.fetch_add(1, Ordering::Relaxed);
        }
        q.items.push_back(env.clone());
        drop(q);
        self.notify.notify_one();
    }

    fn close(&self) {
        self.queue.lock().expect("live queue lock").closed = true;
        self.notify.notify_one();
    }

    /// Removes the oldest queued envelope without waiting.
    pub fn try_next(&self) -> Option<SampleEnvelope> {
        let item = self
            .queue
            .lock()
            .expect("live queue lock")
            .items
            .pop_front();
        if item.is_some() {
            self.delivered.fetch_add(1, Ordering::Relaxed);
        }
        item
    }

    /// Waits for the next envelope; `None` once closed and drained.
    ///
    /// Intended for a single consumer: `notify_one` keeps a permit when
    /// nobody is waiting, so a wake-up between the check and the wait is
    /// not lost.
    pub async fn next(&self) -> Option<SampleEnvelope> {
        loop {
            {
                let mut q = self.queue.lock().expect("live queue lock");
                if let Some(env) = q.items.pop_front() {
                    self.delivered.fetch_add(1, Ordering::Relaxed);
                    return Some(env);
                }
                if q.closed {
                    return None;
                }
            }
            self.notify.notified().await;
        }
    }

    pub fn stats(&self) -> LiveStats {
        LiveStats {
            subscribers: 1,
            published: self.published.load(Ordering::Relaxed),
            delivered: self.delivered.load(Ordering::Relaxed),
            dropped: self.dropped.load(Ordering::Relaxed),
        }
    }
}

#[derive(Debug, Default)]
struct HubState {
    subs: Vec<Arc<Subscription>>,
    /// Counters of subscriptions that have gone away.
    retired: LiveStats,
    closed: bool,
}

/// Fan-out point for one session.
#[derive(Debug, Default)]
pub struct LiveHub {
    state: Mutex<HubState>,
}

impl LiveHub {
    pub fn new() -> Arc<Self> {
        Arc::new(LiveHub::default())
    }

    /// `None` if the session has already finished.
    pub fn subscribe(
        &self,
        streams: Option<HashSet<StreamId>>,
        capacity: usize,
    ) -> Option<Arc<Subscription>> {
        let mut s = self.state.lock().expect("hub lock");
        if s.closed {
            return None;
        }
        let sub = Arc::new(Subscription::new(streams, capacity));
        s.subs.push(sub.clone());
        Some(sub)
    }

    pub fn unsubscribe(&self, sub: &Arc<Subscription>) {
        let mut s = self.state.lock().expect("hub lock");
        if let Some(i) = s.subs.iter().position(|x| Arc::ptr_eq(x, sub)) {
            let gone = s.subs.swap_remove(i);
            let st = gone.stats();
            s.retired.published += st.published;
            s.retired.delivered += st.delivered;
            s.retired.dropped += st.dropped;
        }
    }

    pub fn publish(&self, env: &SampleEnvelope) {
        let s = self.state.lock().expect("hub lock");
        for sub in &s.subs {
            sub.offer(env);
        }
    }

    /// Ends every subscription once its queue drains.
    pub fn close(&self) {
        let mut s = self.state.lock().expect("hub lock");
        s.closed = true;
        for sub in &s.subs {
            sub.close();
        }
    }

    pub fn stats(&self) -> LiveStats {
        let s = self.state.lock().expect("hub lock");
        let mut out = s.retired;
        out.subscribers = s.subs.len() as u64;
        for sub in &s.subs {
            let st = sub.stats();
            out.published += st.published;
            out.delivered += st.delivered;
            out.dropped += st.dropped;
        }
        out
    }

    /// A pipeline tap feeding this hub.
    pub fn tap(self: &Arc<Self>) -> LiveTap {
        let hub = self.clone();
        Box::new(move |env: &SampleEnvelope| hub.publish(env))
    }
}
