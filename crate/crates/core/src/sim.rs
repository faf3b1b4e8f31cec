//! Deterministic congested-clique simulator.
//!
//! `n` nodes compute locally for free and exchange messages in synchronous
//! rounds; rounds are the cost. A direct round lets each node send at most
//! one bounded-size message to each other node. On top of that sit two
//! modeled primitives whose semantics are enforced exactly but whose
//! internals are charged as configured constants: `route` (each node sends
//! and receives at most n messages, `r_route` rounds) and `sort` (each node
//! holds at most n distinct keys and receives its rank range, `r_sort`
//! rounds). Quota violations are errors naming the offending node: the
//! round-count claims of anything built on these primitives are only valid
//! if every call stays within quota, so the simulator is the bug detector.
//!
//! Everything is deterministic: inboxes are ordered by (source, emission
//! order), and the ledger is a pure function of the call sequence.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::ceil_log2;

pub type NodeId = usize;

/// A packed little bit string, at most 128 bits. Payloads are built by
/// appending fixed-width fields and read back by offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BitStr {
    bits: u128,
    len: u32,
}

impl BitStr {
    pub const MAX_LEN: u32 = 128;

    pub fn empty() -> Self {
        BitStr::default()
    }

    pub fn from_value(value: u64, width: u32) -> Self {
        let mut s = BitStr::empty();
        s.push(value, width);
        s
    }

    /// Appends the low `width` bits of `value`.
    pub fn push(&mut self, value: u64, width: u32) {
        assert!(width <= 64, "field width {width} exceeds 64");
        assert!(
            self.len + width <= Self::MAX_LEN,
            "bit string overflow: {} + {width}",
            self.len
        );
        debug_assert!(width == 64 || value < (1u64 << width), "value {value} needs more than {width} bits");
        self.bits |= u128::from(value) << self.len;
        self.len += width;
    }

    /// Reads `width` bits starting at `offset`.
    pub fn read(&self, offset: u32, width: u32) -> u64 {
        debug_assert!(width <= 64 && offset + width <= self.len);
        let mask = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
        ((self.bits >> offset) as u64) & mask
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// A delivered message: who sent it and what it carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Message {
    pub src: NodeId,
    pub payload: BitStr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub n: usize,
    /// Messages carry at most `c_msg * ceil(log2 n)` bits.
    pub c_msg: u32,
    /// Rounds charged per `route` call.
    pub r_route: u64,
    /// Rounds charged per `sort` call.
    pub r_sort: u64,
}

impl SimConfig {
    pub fn new(n: usize) -> Self {
        SimConfig {
            n,
            c_msg: 8,
            r_route: 4,
            r_sort: 6,
        }
    }

    pub fn budget_bits(&self) -> u32 {
        self.c_msg * ceil_log2(self.n as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("node {node}: message of {len} bits exceeds the {budget}-bit budget")]
    MessageTooLarge { node: NodeId, len: u32, budget: u32 },
    #[error("node {node}: two messages to destination {dst} in one round")]
    DuplicateDestination { node: NodeId, dst: NodeId },
    #[error("node {node}: message addressed to itself in a direct round")]
    SelfMessage { node: NodeId },
    #[error("node {node}: destination {dst} does not exist")]
    BadDestination { node: NodeId, dst: NodeId },
    #[error("node {node}: sends {load} routed messages, quota is {quota}")]
    RouteSendQuota { node: NodeId, load: usize, quota: usize },
    #[error("node {node}: receives {load} routed messages, quota is {quota}")]
    RouteRecvQuota { node: NodeId, load: usize, quota: usize },
    #[error("node {node}: holds {count} sort keys, quota is {quota}")]
    SortBatchTooLarge { node: NodeId, count: usize, quota: usize },
    #[error("node {node}: sort key needs {len} bits, budget is {budget}")]
    SortKeyTooWide { node: NodeId, len: u32, budget: u32 },
    #[error("duplicate sort key {0}")]
    SortDuplicateKey(u128),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct PhaseCost {
    pub rounds: u64,
    pub messages: u64,
    pub bits: u64,
}

/// Running totals plus a per-phase breakdown keyed by the phase labels the
/// caller sets. Total rounds always equal the sum over phases.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct CostLedger {
    pub rounds: u64,
    pub messages: u64,
    pub bits: u64,
    pub phases: BTreeMap<String, PhaseCost>,
}

/// The simulator: owns the ledger and validates every exchange.
#[derive(Debug, Clone)]
pub struct Clique {
    cfg: SimConfig,
    ledger: CostLedger,
    phase: String,
}

impl Clique {
    pub fn new(cfg: SimConfig) -> Self {
        assert!(cfg.n >= 2, "a clique needs at least 2 nodes");
        Clique {
            cfg,
            ledger: CostLedger::default(),
            phase: "setup".to_string(),
        }
    }

    pub fn config(&self) -> SimConfig {
        self.cfg
    }

    pub fn n(&self) -> usize {
        self.cfg.n
    }

    pub fn budget_bits(&self) -> u32 {
        self.cfg.budget_bits()
    }

    /// Labels subsequent charges for the per-phase breakdown.
    pub fn set_phase(&mut self, name: &str) {
        self.phase = name.to_string();
    }

    pub fn ledger(&self) -> &CostLedger {
        &self.ledger
    }

    /// Snapshot of the cost counters.
    pub fn run_report(&self) -> CostLedger {
        self.ledger.clone()
    }

    fn charge(&mut self, rounds: u64, messages: u64, bits: u64) {
        self.ledger.rounds += rounds;
        self.ledger.messages += messages;
        self.ledger.bits += bits;
        let p = self.ledger.phases.entry(self.phase.clone()).or_default();
        p.rounds += rounds;
        p.messages += messages;
        p.bits += bits;
    }

    fn check_size(&self, node: NodeId, payload: &BitStr) -> Result<(), SimError> {
        let budget = self.budget_bits();
        if payload.len() > budget {
            return Err(SimError::MessageTooLarge {
                node,
                len: payload.len(),
                budget,
            });
        }
        Ok(())
    }

    /// One synchronous round: each node sends at most one message per
    /// destination, none to itself. Inboxes are ordered by source.
    pub fn direct_round(
        &mut self,
        outboxes: &[Vec<(NodeId, BitStr)>],
    ) -> Result<Vec<Vec<Message>>, SimError> {
        assert_eq!(outboxes.len(), self.cfg.n, "one outbox per node");
        let n = self.cfg.n;
        let mut inboxes: Vec<Vec<Message>> = vec![Vec::new(); n];
        let mut total = 0u64;
        let mut bits = 0u64;
        for (src, outbox) in outboxes.iter().enumerate() {
            let mut dsts_seen = vec![false; n];
            for &(dst, payload) in outbox {
                if dst >= n {
                    return Err(SimError::BadDestination { node: src, dst });
                }
                if dst == src {
                    return Err(SimError::SelfMessage { node: src });
                }
                if dsts_seen[dst] {
                    return Err(SimError::DuplicateDestination { node: src, dst });
                }
                dsts_seen[dst] = true;
                self.check_size(src, &payload)?;
                inboxes[dst].push(Message { src, payload });
                total += 1;
                bits += u64::from(payload.len());
            }
        }
        self.charge(1, total, bits);
        Ok(inboxes)
    }

    /// Modeled bulk redistribution: every node may send and receive at
    /// most n messages, delivered exactly, charged `r_route` rounds.
    pub fn route(
        &mut self,
        outboxes: &[Vec<(NodeId, BitStr)>],
    ) -> Result<Vec<Vec<Message>>, SimError> {
        assert_eq!(outboxes.len(), self.cfg.n, "one outbox per node");
        let n = self.cfg.n;
        let mut recv_loads = vec![0usize; n];
        for (src, outbox) in outboxes.iter().enumerate() {
            if outbox.len() > n {
                return Err(SimError::RouteSendQuota {
                    node: src,
                    load: outbox.len(),
                    quota: n,
                });
            }
            for &(dst, payload) in outbox {
                if dst >= n {
                    return Err(SimError::BadDestination { node: src, dst });
                }
                self.check_size(src, &payload)?;
                recv_loads[dst] += 1;
            }
        }
        for (node, &load) in recv_loads.iter().enumerate() {
            if load > n {
                return Err(SimError::RouteRecvQuota {
                    node,
                    load,
                    quota: n,
                });
            }
        }
        let mut inboxes: Vec<Vec<Message>> = vec![Vec::new(); n];
        let mut total = 0u64;
        let mut bits = 0u64;
        for (src, outbox) in outboxes.iter().enumerate() {
            for &(dst, payload) in outbox {
                inboxes[dst].push(Message { src, payload });
                total += 1;
                bits += u64::from(payload.len());
            }
        }
        self.charge(self.cfg.r_route, total, bits);
        Ok(inboxes)
    }

    /// Modeled distributed sort: at most n distinct keys per node; node i
    /// ends up with the keys of global ranks [n*i, n*i + n), in order.
    /// Charged `r_sort` rounds and one message per key.
    pub fn sort(&mut self, keys: &[Vec<u128>]) -> Result<Vec<Vec<u128>>, SimError> {
        assert_eq!(keys.len(), self.cfg.n, "one key batch per node");
        let n = self.cfg.n;
        let budget = self.budget_bits();
        for (node, batch) in keys.iter().enumerate() {
            if batch.len() > n {
                return Err(SimError::SortBatchTooLarge {
                    node,
                    count: batch.len(),
                    quota: n,
                });
            }
            for &k in batch {
                let len = 128 - k.leading_zeros();
                if len > budget {
                    return Err(SimError::SortKeyTooWide { node, len, budget });
                }
            }
        }
        let mut all: Vec<u128> = keys.iter().flatten().copied().collect();
        let total = all.len() as u64;
        all.sort_unstable();
        for w in all.windows(2) {
            if w[0] == w[1] {
                return Err(SimError::SortDuplicateKey(w[0]));
            }
        }
        let mut out: Vec<Vec<u128>> = Vec::with_capacity(n);
        for i in 0..n {
            let lo = (i * n).min(all.len());
            let hi = ((i + 1) * n).min(all.len());
            out.push(all[lo..hi].to_vec());
        }
        self.charge(self.cfg.r_sort, total, total * u64::from(budget));
        Ok(out)
    }

    /// Every node announces one value to all others in a single direct
    /// round; the result at each node is the full n-vector indexed by
    /// source (own value included).
    pub fn broadcast_scalar(&mut self, values: &[BitStr]) -> Result<Vec<Vec<BitStr>>, SimError> {
        assert_eq!(values.len(), self.cfg.n, "one value per node");
        let n = self.cfg.n;
        for (node, v) in values.iter().enumerate() {
            self.check_size(node, v)?;
        }
        let bits: u64 = values.iter().map(|v| u64::from(v.len())).sum();
        self.charge(1, (n * (n - 1)) as u64, bits * (n as u64 - 1));
        Ok(vec![values.to_vec(); n])
    }
}
