//! Synchronous round executor with per-message bit accounting.
//!
//! Each round has two passes over the nodes, both in ascending id order:
//! an apply pass in which every node consumes the messages sent in the
//! previous round and updates its own state, then an emit pass in which it
//! hands messages to the engine. A message sent in round r is therefore
//! readable in round r+1 and never earlier. The engine checks that every
//! message crosses a real edge, that no edge carries two messages in the
//! same direction in one round, and that no message exceeds the configured
//! bit cap; violations are algorithm bugs and surface as faults, not as
//! run outcomes.

use crate::graph::{Graph, NodeId};
use crate::message::{FieldWidths, Message, MsgKind};
use crate::schedule::{ceil_log2, RoundInfo, Schedule, FLUSH_ROUNDS};
use std::collections::BTreeMap;
use std::rc::Rc;
use thiserror::Error;

/// Default per-message budget: 32 * ceil(log2 n) bits.
pub const MESSAGE_BIT_CAP_FACTOR: u64 = 32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineFault {
    #[error("round {round}: node {sender} sent {kind} to non-neighbor {receiver}")]
    NonNeighborSend {
        round: u32,
        sender: NodeId,
        receiver: NodeId,
        kind: &'static str,
    },
    #[error("round {round}: node {sender} sent two messages to {receiver}")]
    DuplicateEdgeSend {
        round: u32,
        sender: NodeId,
        receiver: NodeId,
    },
    #[error("round {round}: {kind} from {sender} is {bits} bits, cap is {cap}")]
    MessageTooWide {
        round: u32,
        sender: NodeId,
        bits: u64,
        cap: u64,
        kind: &'static str,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Retention {
    /// Keep only streaming audit counters.
    AuditOnly,
    /// Additionally record every delivered message.
    Full,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranscriptEntry {
    pub round: u32,
    pub sender: NodeId,
    pub receiver: NodeId,
    pub kind: MsgKind,
    pub bits: u64,
}

/// Streaming audit counters plus the optional full transcript.
#[derive(Clone, Debug, Default)]
pub struct TranscriptLog {
    pub entries: Vec<TranscriptEntry>,
    pub messages_total: u64,
    pub max_message_bits: u64,
    pub counts_per_kind: BTreeMap<&'static str, u64>,
}

/// Summary of message-size and memory audits for one run.
#[derive(Clone, Debug, Default)]
pub struct AuditReport {
    pub max_message_bits: u64,
    pub max_bits_over_log2n: f64,
    pub max_node_memory_bits: u64,
    pub rounds_total: u32,
    pub rounds_per_phase: BTreeMap<&'static str, u32>,
}

/// Max message bits over a log and the ratio against ceil(log2 n).
pub fn audit_message_bits(log: &TranscriptLog, n: u32) -> (u64, f64) {
    let l = ceil_log2(n) as f64;
    (log.max_message_bits, log.max_message_bits as f64 / l)
}

/// Max persistent memory over node states, in bits.
pub fn audit_node_memory(states: &[crate::node::NodeState], n: u32) -> u64 {
    let w = ceil_log2(n) as u64;
    states.iter().map(|s| s.memory_bits(w)).max().unwrap_or(0)
}

pub struct Envelope {
    pub sender: NodeId,
    pub msg: Rc<Message>,
}

enum Send {
    Unicast(NodeId, Message),
    Broadcast { except: Option<NodeId>, msg: Message },
}

/// Outbox handed to a node during its emit pass.
pub struct Outbox {
    sends: Vec<Send>,
}

impl Outbox {
    pub fn unicast(&mut self, to: NodeId, msg: Message) {
        self.sends.push(Send::Unicast(to, msg));
    }

    pub fn broadcast(&mut self, msg: Message) {
        self.sends.push(Send::Broadcast { except: None, msg });
    }

    pub fn broadcast_except(&mut self, except: NodeId, msg: Message) {
        self.sends.push(Send::Broadcast {
            except: Some(except),
            msg,
        });
    }
}

/// Read-only round context for handlers.
pub struct Ctx<'a> {
    pub graph: &'a Graph,
    pub sched: &'a Schedule,
    pub round: u32,
    pub info: RoundInfo,
    pub n: u32,
    pub l: u32,
}

/// Handler outcome channel: the first node to set a halt wins (ids ascend).
#[derive(Default)]
pub struct Control<H> {
    pub halt: Option<H>,
}

impl<H> Control<H> {
    pub fn halt(&mut self, cause: H) {
        if self.halt.is_none() {
            self.halt = Some(cause);
        }
    }
}

/// A synchronous-round state machine: one instance per node.
pub trait Automaton {
    type Halt;

    /// Consume last round's messages; mutate own state only.
    fn apply(&mut self, ctx: &Ctx, inbox: &[Envelope], ctl: &mut Control<Self::Halt>);

    /// Produce this round's messages.
    fn emit(&mut self, ctx: &Ctx, out: &mut Outbox, ctl: &mut Control<Self::Halt>);
}

pub struct Engine<'a, A: Automaton> {
    pub graph: &'a Graph,
    pub sched: Schedule,
    pub nodes: Vec<A>,
    pub log: TranscriptLog,
    retention: Retention,
    widths: FieldWidths,
    bit_cap: u64,
    inboxes: Vec<Vec<Envelope>>,
    pending: Vec<Vec<Envelope>>,
    round: u32,
    /// Select broadcasts the coordinator issued, per final phase index.
    pub select_rounds: Vec<u32>,
}

impl<'a, A: Automaton> Engine<'a, A> {
    pub fn new(graph: &'a Graph, nodes: Vec<A>, retention: Retention) -> Self {
        let n = graph.node_count();
        let sched = Schedule::for_n(n);
        let l = sched.l;
        Engine {
            graph,
            sched,
            nodes,
            log: TranscriptLog::default(),
            retention,
            widths: FieldWidths::for_n(n),
            bit_cap: MESSAGE_BIT_CAP_FACTOR * l as u64,
            inboxes: (0..n).map(|_| Vec::new()).collect(),
            pending: (0..n).map(|_| Vec::new()).collect(),
            round: 0,
            select_rounds: Vec::new(),
        }
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn bit_cap(&self) -> u64 {
        self.bit_cap
    }

    /// Apply pass for the next round. Returns the halt cause if any node
    /// raised one; the driver decides whether to keep going.
    pub fn step_apply(&mut self) -> Option<A::Halt> {
        self.round += 1;
        std::mem::swap(&mut self.inboxes, &mut self.pending);
        let ctx = Ctx {
            graph: self.graph,
            sched: &self.sched,
            round: self.round,
            info: self.sched.round_info(self.round),
            n: self.sched.n,
            l: self.sched.l,
        };
        let mut ctl = Control { halt: None };
        for (id, node) in self.nodes.iter_mut().enumerate() {
            let inbox = &self.inboxes[id];
            node.apply(&ctx, inbox, &mut ctl);
        }
        for inbox in &mut self.inboxes {
            inbox.clear();
        }
        ctl.halt
    }

    /// Emit pass for the current round: validate, account, deliver.
    pub fn step_emit(&mut self) -> Result<Option<A::Halt>, EngineFault> {
        let is_flush = matches!(self.sched.round_info(self.round), RoundInfo::Flush { .. });
        if is_flush {
            return Ok(None);
        }
        let ctx = Ctx {
            graph: self.graph,
            sched: &self.sched,
            round: self.round,
            info: self.sched.round_info(self.round),
            n: self.sched.n,
            l: self.sched.l,
        };
        let mut ctl = Control { halt: None };
        let mut out = Outbox { sends: Vec::new() };
        let mut unicast_targets: Vec<NodeId> = Vec::new();
        for id in 0..self.nodes.len() {
            out.sends.clear();
            self.nodes[id].emit(&ctx, &mut out, &mut ctl);
            if out.sends.is_empty() {
                continue;
            }
            let sender = id as NodeId;
            unicast_targets.clear();
            let mut broadcast_except: Option<Option<NodeId>> = None;
            for send in out.sends.drain(..) {
                match send {
                    Send::Unicast(to, msg) => {
                        self.check_and_deliver(sender, to, msg, &mut unicast_targets)?;
                    }
                    Send::Broadcast { except, msg } => {
                        if broadcast_except.is_some() {
                            return Err(EngineFault::DuplicateEdgeSend {
                                round: self.round,
                                sender,
                                receiver: sender,
                            });
                        }
                        broadcast_except = Some(except);
                        self.deliver_broadcast(sender, except, msg)?;
                    }
                }
            }
            // a unicast may only coincide with a broadcast that excluded it
            if let Some(except) = broadcast_except {
                for &t in &unicast_targets {
                    if Some(t) != except {
                        return Err(EngineFault::DuplicateEdgeSend {
                            round: self.round,
                            sender,
                            receiver: t,
                        });
                    }
                }
            }
        }
        Ok(ctl.halt)
    }

    fn account(&mut self, sender: NodeId, receiver: NodeId, kind: MsgKind, bits: u64) {
        self.log.messages_total += 1;
        self.log.max_message_bits = self.log.max_message_bits.max(bits);
        *self.log.counts_per_kind.entry(kind.name()).or_insert(0) += 1;
        if self.retention == Retention::Full {
            self.log.entries.push(TranscriptEntry {
                round: self.round,
                sender,
                receiver,
                kind,
                bits,
            });
        }
    }

    fn check_bits(&self, sender: NodeId, msg: &Message) -> Result<u64, EngineFault> {
        let bits = msg.bits(&self.widths);
        if bits > self.bit_cap {
            return Err(EngineFault::MessageTooWide {
                round: self.round,
                sender,
                bits,
                cap: self.bit_cap,
                kind: msg.kind().name(),
            });
        }
        Ok(bits)
    }

    fn check_and_deliver(
        &mut self,
        sender: NodeId,
        to: NodeId,
        msg: Message,
        seen: &mut Vec<NodeId>,
    ) -> Result<(), EngineFault> {
        if !self.graph.has_edge(sender, to) {
            return Err(EngineFault::NonNeighborSend {
                round: self.round,
                sender,
                receiver: to,
                kind: msg.kind().name(),
            });
        }
        if seen.contains(&to) {
            return Err(EngineFault::DuplicateEdgeSend {
                round: self.round,
                sender,
                receiver: to,
            });
        }
        seen.push(to);
        let bits = self.check_bits(sender, &msg)?;
        if let Message::SelectA(_) = &msg {
            self.note_select();
        }
        self.account(sender, to, msg.kind(), bits);
        self.pending[to as usize].push(Envelope {
            sender,
            msg: Rc::new(msg),
        });
        Ok(())
    }

    fn deliver_broadcast(
        &mut self,
        sender: NodeId,
        except: Option<NodeId>,
        msg: Message,
    ) -> Result<(), EngineFault> {
        let bits = self.check_bits(sender, &msg)?;
        let kind = msg.kind();
        let rc = Rc::new(msg);
        // local broadcast = one unicast per incident edge
        let nbrs: &[NodeId] = self.graph.neighbors(sender);
        for &to in nbrs {
            if Some(to) == except {
                continue;
            }
            self.account(sender, to, kind, bits);
            self.pending[to as usize].push(Envelope {
                sender,
                msg: Rc::clone(&rc),
            });
        }
        Ok(())
    }

    /// Coordinator select-broadcast bookkeeping; only the origin ever sends
    /// the head part, so counting emits here is the serialization audit.
    fn note_select(&mut self) {
        self.select_rounds.push(self.round);
    }

    /// Selects issued within a final phase; at most one per phase when the
    /// coordinator serializes correctly.
    pub fn selects_in_final_phase(&self, phase_index: u32) -> u32 {
        self.select_rounds
            .iter()
            .filter(|&&r| {
                matches!(
                    self.sched.round_info(r),
                    RoundInfo::Phase { id: crate::schedule::PhaseId::Final(i), .. } if i == phase_index
                )
            })
            .count() as u32
    }

    pub fn total_with_flush(&self) -> u32 {
        self.sched.total_rounds + FLUSH_ROUNDS
    }

    /// Export the full transcript as line-delimited
    /// `round,sender,receiver,kind,bits` records.
    pub fn export_transcript<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        for e in &self.log.entries {
            writeln!(
                w,
                "{},{},{},{},{}",
                e.round,
                e.sender,
                e.receiver,
                e.kind.name(),
                e.bits
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::complete_graph;

    /// Toy automaton used to exercise the executor contract.
    struct Echo {
        program: Vec<(u32, Vec<(Option<NodeId>, Message)>)>, // round -> sends (None = broadcast)
        received: Vec<(u32, NodeId)>,
    }

    impl Automaton for Echo {
        type Halt = ();

        fn apply(&mut self, ctx: &Ctx, inbox: &[Envelope], _ctl: &mut Control<()>) {
            for env in inbox {
                self.received.push((ctx.round, env.sender));
            }
        }

        fn emit(&mut self, ctx: &Ctx, out: &mut Outbox, _ctl: &mut Control<()>) {
            for (r, sends) in &self.program {
                if *r == ctx.round {
                    for (to, msg) in sends {
                        match to {
                            Some(t) => out.unicast(*t, msg.clone()),
                            None => out.broadcast(msg.clone()),
                        }
                    }
                }
            }
        }
    }

    fn echo_nodes(n: u32) -> Vec<Echo> {
        (0..n)
            .map(|_| Echo {
                program: vec![],
                received: vec![],
            })
            .collect()
    }

    #[test]
    fn empty_round_only_advances_counter() {
        let g = complete_graph(4);
        let mut eng = Engine::new(&g, echo_nodes(4), Retention::Full);
        assert!(eng.step_apply().is_none());
        eng.step_emit().unwrap();
        assert_eq!(eng.round(), 1);
        assert_eq!(eng.log.messages_total, 0);
    }

    #[test]
    fn unicast_arrives_next_round() {
        let g = complete_graph(6);
        let mut nodes = echo_nodes(6);
        nodes[3].program = vec![(1, vec![(Some(5), Message::BfsFlood { root: 3 })])];
        let mut eng = Engine::new(&g, nodes, Retention::Full);
        eng.step_apply();
        eng.step_emit().unwrap();
        // not readable in the round it was sent
        assert!(eng.nodes[5].received.is_empty());
        eng.step_apply();
        assert_eq!(eng.nodes[5].received, vec![(2, 3)]);
        assert_eq!(eng.log.entries.len(), 1);
        assert_eq!(eng.log.entries[0].round, 1);
    }

    #[test]
    fn broadcast_produces_degree_many_entries() {
        let g = complete_graph(5);
        let mut nodes = echo_nodes(5);
        nodes[2].program = vec![(1, vec![(None, Message::FinI1)])];
        let mut eng = Engine::new(&g, nodes, Retention::Full);
        eng.step_apply();
        eng.step_emit().unwrap();
        assert_eq!(eng.log.entries.len(), 4);
        assert!(eng.log.entries.iter().all(|e| e.sender == 2));
    }

    #[test]
    fn non_neighbor_send_faults() {
        let g = crate::graph::path_graph(4); // 0-1-2-3
        let mut nodes = echo_nodes(4);
        nodes[0].program = vec![(1, vec![(Some(3), Message::FinI1)])];
        let mut eng = Engine::new(&g, nodes, Retention::AuditOnly);
        eng.step_apply();
        let err = eng.step_emit().unwrap_err();
        assert!(matches!(err, EngineFault::NonNeighborSend { sender: 0, receiver: 3, .. }));
    }

    #[test]
    fn duplicate_edge_send_faults() {
        let g = complete_graph(3);
        let mut nodes = echo_nodes(3);
        nodes[0].program = vec![(
            1,
            vec![
                (Some(1), Message::FinI1),
                (Some(1), Message::Phase0Invite),
            ],
        )];
        let mut eng = Engine::new(&g, nodes, Retention::AuditOnly);
        eng.step_apply();
        assert!(matches!(
            eng.step_emit().unwrap_err(),
            EngineFault::DuplicateEdgeSend { .. }
        ));
    }

    #[test]
    fn oversized_message_faults() {
        use crate::label::Label;
        let g = complete_graph(4);
        let mut nodes = echo_nodes(4);
        // a label far beyond the 32 * l cap for n = 4
        let fat = Label::from_u64(u64::MAX);
        nodes[1].program = vec![(1, vec![(Some(2), Message::MidI2 { succ_label: fat })])];
        let mut eng = Engine::new(&g, nodes, Retention::AuditOnly);
        eng.step_apply();
        assert!(matches!(
            eng.step_emit().unwrap_err(),
            EngineFault::MessageTooWide { .. }
        ));
    }

    #[test]
    fn audit_counts_and_max_bits() {
        let g = complete_graph(4);
        let mut nodes = echo_nodes(4);
        nodes[0].program = vec![(1, vec![(Some(1), Message::BfsFlood { root: 0 })])];
        nodes[2].program = vec![(
            2,
            vec![(Some(3), Message::CountUp { count: 3 })],
        )];
        let mut eng = Engine::new(&g, nodes, Retention::Full);
        for _ in 0..3 {
            eng.step_apply();
            eng.step_emit().unwrap();
        }
        let (max, ratio) = audit_message_bits(&eng.log, 4);
        assert_eq!(max, 3); // CountUp: l + 1 = 3 bits at n=4
        assert!((ratio - 1.5).abs() < 1e-9);
        assert_eq!(eng.log.messages_total, 2);
    }
}
