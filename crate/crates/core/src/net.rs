//! Range-limited, lossy, fixed-latency message delivery between agents.
//!
//! Drops are drawn from a ChaCha8 stream seeded from [`NetConfig::seed`], one
//! Bernoulli draw per (message, receiver) in sorted receiver order, so a run
//! reproduces bit for bit on every platform.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::AlertMessage;
use crate::types::AgentId;
use crate::vec3::Vec3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetConfig {
    /// Maximum sender-receiver distance (m), inclusive.
    pub comm_range: f64,
    /// Delivery delay in simulation steps.
    pub hop_latency: u64,
    pub drop_probability: f64,
    pub seed: u64,
    /// Minimum steps between two broadcasts of one sender; broadcasts
    /// inside the window are suppressed. 0 disables the cap.
    pub min_send_interval: u64,
}

impl Default for NetConfig {
    fn default() -> Self {
        Self {
            comm_range: 5.0,
            hop_latency: 1,
            drop_probability: 0.0,
            seed: 0,
            min_send_interval: 0,
        }
    }
}

impl NetConfig {
    /// Blink-coded optical channel: two seconds per hop and one message per
    /// two seconds per sender.
    pub fn implicit_channel(dt: f64) -> Self {
        let steps = (2.0 / dt).round().max(1.0) as u64;
        Self {
            hop_latency: steps,
            min_send_interval: steps,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.comm_range > 0.0 && self.comm_range.is_finite()) {
            return Err(Error::Config("net.comm_range must be positive".into()));
        }
        if self.hop_latency < 1 {
            return Err(Error::Config("net.hop_latency must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.drop_probability) {
            return Err(Error::Config("net.drop_probability must be in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Undirected communication graph; neighbour lists are sorted.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Graph {
    adjacency: BTreeMap<AgentId, Vec<AgentId>>,
}

impl Graph {
    pub fn neighbors(&self, id: &AgentId) -> &[AgentId] {
        self.adjacency.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn contains(&self, id: &AgentId) -> bool {
        self.adjacency.contains_key(id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &AgentId> {
        self.adjacency.keys()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.values().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, a: &AgentId, b: &AgentId) -> bool {
        self.neighbors(a).binary_search(b).is_ok()
    }
}

/// Edge between every pair of agents no farther apart than `comm_range`.
pub fn build_graph(positions: &BTreeMap<AgentId, Vec3<f64>>, cfg: &NetConfig) -> Graph {
    let ids: Vec<(&AgentId, Vec3<f64>)> = positions.iter().map(|(k, v)| (k, *v)).collect();
    let mut adjacency: BTreeMap<AgentId, Vec<AgentId>> =
        ids.iter().map(|(id, _)| ((*id).clone(), Vec::new())).collect();
    for (i, (a, pa)) in ids.iter().enumerate() {
        for (b, pb) in &ids[i + 1..] {
            if pa.distance(*pb) <= cfg.comm_range {
                adjacency.get_mut(*a).expect("node").push((*b).clone());
                adjacency.get_mut(*b).expect("node").push((*a).clone());
            }
        }
    }
    for list in adjacency.values_mut() {
        list.sort();
    }
    Graph { adjacency }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InFlightMessage {
    pub payload: AlertMessage,
    pub sender: AgentId,
    pub receiver: AgentId,
    pub deliver_at: u64,
}

/// Per-sender copies of `msg` for every neighbour that survives the drop
/// draw, scheduled `hop_latency` steps ahead.
pub fn broadcast<R: Rng + ?Sized>(
    from: &AgentId,
    msg: &AlertMessage,
    graph: &Graph,
    cfg: &NetConfig,
    current_step: u64,
    rng: &mut R,
) -> Vec<InFlightMessage> {
    graph
        .neighbors(from)
        .iter()
        .filter(|_| !(cfg.drop_probability > 0.0 && rng.random_bool(cfg.drop_probability)))
        .map(|to| InFlightMessage {
            payload: msg.clone(),
            sender: from.clone(),
            receiver: to.clone(),
            deliver_at: current_step + cfg.hop_latency,
        })
        .collect()
}

type QueueKey = (u64, AgentId, AgentId, u64);

/// Messages in flight, keyed for deterministic delivery order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MessageQueue {
    pending: BTreeMap<QueueKey, InFlightMessage>,
    seq: u64,
}

impl MessageQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, m: InFlightMessage) {
        let key = (m.deliver_at, m.sender.clone(), m.receiver.clone(), self.seq);
        self.seq += 1;
        self.pending.insert(key, m);
    }

    pub fn len(&self) -> usize {
        self.pending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }

    /// Removes and returns every message due at or before `current_step`,
    /// ordered by (delivery step, sender, receiver, send order).
    pub fn deliver_due(&mut self, current_step: u64) -> Vec<InFlightMessage> {
        let later = self
            .pending
            .split_off(&(current_step + 1, AgentId::new(""), AgentId::new(""), 0));
        std::mem::replace(&mut self.pending, later).into_values().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &InFlightMessage> {
        self.pending.values()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct NetStats {
    pub broadcasts: u64,
    pub transmissions: u64,
    pub dropped: u64,
    pub suppressed: u64,
    pub delivered: u64,
}

/// Network instance owning the graph, the queue and the drop stream.
#[derive(Debug, Clone)]
pub struct Network {
    cfg: NetConfig,
    graph: Graph,
    queue: MessageQueue,
    rng: ChaCha8Rng,
    last_send: BTreeMap<AgentId, u64>,
    stats: NetStats,
}

impl Network {
    pub fn new(cfg: NetConfig) -> Result<Self> {
        cfg.validate()?;
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Ok(Self {
            cfg,
            graph: Graph::default(),
            queue: MessageQueue::new(),
            rng,
            last_send: BTreeMap::new(),
            stats: NetStats::default(),
        })
    }

    pub fn config(&self) -> &NetConfig {
        &self.cfg
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn queue(&self) -> &MessageQueue {
        &self.queue
    }

    pub fn stats(&self) -> NetStats {
        self.stats
    }

    pub fn rebuild(&mut self, positions: &BTreeMap<AgentId, Vec3<f64>>) {
        self.graph = build_graph(positions, &self.cfg);
    }

    /// Queues `msg` from `from` to all current neighbours.
    pub fn send(&mut self, from: &AgentId, msg: &AlertMessage, current_step: u64) {
        if self.cfg.min_send_interval > 0 {
            if let Some(&last) = self.last_send.get(from) {
                if current_step < last + self.cfg.min_send_interval {
                    self.stats.suppressed += 1;
                    return;
                }
            }
            self.last_send.insert(from.clone(), current_step);
        }
        self.stats.broadcasts += 1;
        let fanout = self.graph.neighbors(from).len() as u64;
        let out = broadcast(from, msg, &self.graph, &self.cfg, current_step, &mut self.rng);
        self.stats.transmissions += out.len() as u64;
        self.stats.dropped += fanout - out.len() as u64;
        for m in out {
            self.queue.push(m);
        }
    }

    pub fn deliver_due(&mut self, current_step: u64) -> Vec<InFlightMessage> {
        let out = self.queue.deliver_due(current_step);
        self.stats.delivered += out.len() as u64;
        out
    }

    /// Drops everything in flight (used when a live world is reset).
    pub fn clear(&mut self) {
        self.queue = MessageQueue::new();
        self.last_send.clear();
    }
}

/// Breadth-first hop counts from `start` over the graph.
pub fn hop_distances(graph: &Graph, start: &AgentId) -> BTreeMap<AgentId, usize> {
    let mut dist = BTreeMap::new();
    if !graph.contains(start) {
        return dist;
    }
    let mut frontier = vec![start.clone()];
    dist.insert(start.clone(), 0);
    let mut seen: BTreeSet<AgentId> = frontier.iter().cloned().collect();
    let mut level = 0;
    while !frontier.is_empty() {
        level += 1;
        let mut next = Vec::new();
        for u in &frontier {
            for v in graph.neighbors(u) {
                if seen.insert(v.clone()) {
                    dist.insert(v.clone(), level);
                    next.push(v.clone());
                }
            }
        }
        frontier = next;
    }
    dist
}
