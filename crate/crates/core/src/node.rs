//! Per-node algorithm state and its memory accounting.

use crate::graph::NodeId;
use crate::label::Label;
use crate::message::{OfferA, OfferB, OfferTri, SelectA};
use crate::rng::Reservoir;

/// Persistent per-node state. Everything here survives across phases; the
/// phase-local working set lives in [`Scratch`] and is empty at every phase
/// boundary.
#[derive(Clone, Debug)]
pub struct NodeState {
    pub id: NodeId,
    /// Clockwise successor; None means the node is not yet on the cycle.
    /// A node pointing at itself is the live end of the growing path.
    pub next: Option<NodeId>,
    pub prev: Option<NodeId>,
    pub label: Option<Label>,
    pub bfs_parent: Option<NodeId>,
    /// BFS depth below the origin (0 for the origin itself).
    pub depth: Option<u8>,
    pub known_n: Option<u32>,
    pub v0_id: Option<NodeId>,
    pub is_v0: bool,
    /// Position on the initial path; label = index * spacing.
    pub path_index: Option<u32>,
}

impl NodeState {
    pub fn new(id: NodeId, is_v0: bool) -> Self {
        NodeState {
            id,
            // The origin starts as a trivial one-node path pointing at itself.
            next: is_v0.then_some(id),
            prev: is_v0.then_some(id),
            label: is_v0.then(Label::zero),
            bfs_parent: None,
            depth: is_v0.then_some(0),
            known_n: None,
            v0_id: is_v0.then_some(id),
            is_v0,
            path_index: is_v0.then_some(0),
        }
    }

    pub fn on_cycle(&self) -> bool {
        self.next.is_some()
    }

    /// Is this node the live end of the growing path?
    pub fn is_path_tail(&self) -> bool {
        self.next == Some(self.id)
    }

    /// Persistent memory in bits: four id registers (self, next, prev,
    /// parent), the label at its value's bit-length, and the counter/flag
    /// block (origin id, known n, depth, path index, flags).
    pub fn memory_bits(&self, id_width: u64) -> u64 {
        let ids = 4 * id_width;
        let label = self.label.as_ref().map_or(0, |l| l.bits());
        let counters = id_width  // origin id register
            + (id_width + 1)    // known n
            + 2                 // depth
            + 8                 // path index
            + 4; // flags
        ids + label + counters
    }
}

/// One chain-integration possibility as assembled by the detecting node.
#[derive(Clone, Debug)]
pub struct ChainOffer {
    pub a: OfferA,
    pub b: OfferB,
}

/// Offer as held by the coordinator.
#[derive(Clone, Debug)]
pub enum Offer {
    Chain(ChainOffer),
    Triangle(OfferTri),
}

/// Pending select-broadcast state buffered until the phase's apply moment.
#[derive(Clone, Debug, Default)]
pub struct PendingSelect {
    pub a: Option<SelectA>,
    pub b: Option<Label>,
    pub new_label: Option<Label>,
}

impl PendingSelect {
    pub fn is_empty(&self) -> bool {
        self.a.is_none() && self.b.is_none() && self.new_label.is_none()
    }
}

/// Phase-local working set. Bounded: a constant number of ids and labels,
/// so it never threatens the O(log n) memory contract.
#[derive(Clone, Debug, Default)]
pub struct Scratch {
    // -- phase 0/1, path end --
    /// Set when an invitation went out; zero responses at the pick round
    /// means the algorithm halts.
    pub awaiting_responses: bool,
    pub responders: Reservoir<NodeId>,
    pub responders_v0: Reservoir<NodeId>,
    pub pending_appoint: Option<(NodeId, u32, bool)>, // (node, index, close?)
    /// The closer owes the origin a predecessor-pointer ack.
    pub pending_close_ack: bool,

    // -- middle phases --
    /// Candidate picked from I1 broadcasts: (w, pred(w), label(w)).
    pub mid_candidate: Reservoir<(NodeId, NodeId, Label)>,
    pub mid_invited: Option<(NodeId, NodeId, Label)>,
    /// Acceptance decided this round: (new node, old successor, new label).
    pub mid_accept: Option<(NodeId, NodeId, Label)>,

    // -- final phases --
    /// Candidate this node forwards clockwise as w1 (chosen uniformly).
    pub fin_i2_choice: Option<NodeId>,
    /// Triangle possibilities observed by an off-cycle candidate.
    pub fin_tri_pick: Reservoir<(NodeId, Label)>, // (w1, new label)
    /// Chain offer assembled by the detecting node (w3), head sent, tail due.
    pub fin_offer_tail: Option<OfferB>,
    /// Offer head waiting to go up the tree this round.
    pub fwd_head: Option<Offer>,
    /// After forwarding a head, the matching tail from the same child.
    pub fwd_awaiting: Option<(NodeId, NodeId)>, // (child, cand)
    pub fwd_tail: Option<OfferB>,
    /// One offer per node per phase up the tree.
    pub fwd_budget_used: bool,
    /// Coordinator: completed-offer reservoir plus one in-flight chain head.
    pub coord_pending: Option<(NodeId, OfferA)>,
    pub coord_choice: Reservoir<Offer>,
    pub pending_select: PendingSelect,
}

impl Scratch {
    /// True when every phase-local field has been consumed; asserted at
    /// phase boundaries.
    pub fn is_quiescent(&self) -> bool {
        !self.awaiting_responses
            && self.responders.is_empty()
            && self.responders_v0.is_empty()
            && self.pending_appoint.is_none()
            && !self.pending_close_ack
            && self.mid_candidate.is_empty()
            && self.mid_invited.is_none()
            && self.mid_accept.is_none()
            && self.fin_i2_choice.is_none()
            && self.fin_tri_pick.is_empty()
            && self.fin_offer_tail.is_none()
            && self.fwd_head.is_none()
            && self.fwd_awaiting.is_none()
            && self.fwd_tail.is_none()
            && self.coord_pending.is_none()
            && self.coord_choice.is_empty()
            && self.pending_select.is_empty()
    }

    pub fn clear_final_forwarding(&mut self) {
        self.fin_i2_choice = None;
        self.fin_tri_pick.clear();
        self.fin_offer_tail = None;
        self.fwd_head = None;
        self.fwd_awaiting = None;
        self.fwd_tail = None;
        self.fwd_budget_used = false;
        self.coord_pending = None;
        self.coord_choice.clear();
    }
}
