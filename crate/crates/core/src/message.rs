//! Wire messages and their exact bit accounting.
//!
//! A message's bit size is the sum of its declared field widths: ids cost
//! ceil(log2 n) bits, small counters cost their declared width, flags cost
//! one bit, labels cost their value's bit-length. Every message carries at
//! most one label, which keeps the largest message near 25 * ceil(log2 n)
//! bits, comfortably inside the 32 * ceil(log2 n) cap the engine asserts.

use crate::graph::NodeId;
use crate::label::Label;

/// Enumerated message tags; these names are also the transcript format.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum MsgKind {
    BfsFlood,
    CountUp,
    CountDown,
    Phase0Invite,
    Phase0Response,
    Phase0Appoint,
    Phase1Invite,
    Phase1Response,
    Phase1Appoint,
    Phase1Close,
    MidI1,
    MidI2,
    MidI3,
    FinI1,
    FinI2,
    FinI3,
    FinNotify,
    Offer,
    SelectBroadcast,
}

impl MsgKind {
    pub fn name(self) -> &'static str {
        match self {
            MsgKind::BfsFlood => "BFS_FLOOD",
            MsgKind::CountUp => "COUNT_UP",
            MsgKind::CountDown => "COUNT_DOWN",
            MsgKind::Phase0Invite => "PHASE0_INVITE",
            MsgKind::Phase0Response => "PHASE0_RESPONSE",
            MsgKind::Phase0Appoint => "PHASE0_APPOINT",
            MsgKind::Phase1Invite => "PHASE1_INVITE",
            MsgKind::Phase1Response => "PHASE1_RESPONSE",
            MsgKind::Phase1Appoint => "PHASE1_APPOINT",
            MsgKind::Phase1Close => "PHASE1_CLOSE",
            MsgKind::MidI1 => "MID_I1",
            MsgKind::MidI2 => "MID_I2",
            MsgKind::MidI3 => "MID_I3",
            MsgKind::FinI1 => "FIN_I1",
            MsgKind::FinI2 => "FIN_I2",
            MsgKind::FinI3 => "FIN_I3",
            MsgKind::FinNotify => "FIN_NOTIFY",
            MsgKind::Offer => "OFFER",
            MsgKind::SelectBroadcast => "SELECT_BROADCAST",
        }
    }
}

/// Chain-offer head: everything about an integration except the far
/// endpoint's label, which follows one round behind in `OfferB`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OfferA {
    pub cand: NodeId,
    pub w1: NodeId,
    pub w2: NodeId,
    pub w3: NodeId,
    pub f: Label,
}

/// Trailing part of a chain offer: the reversed segment's far endpoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OfferB {
    pub cand: NodeId,
    pub w4: NodeId,
    pub l: Label,
}

/// Triangle offer: the candidate sits on two consecutive cycle nodes, no
/// reversal needed, new label already computed by w2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OfferTri {
    pub cand: NodeId,
    pub w1: NodeId,
    pub w2: NodeId,
    pub new_label: Label,
}

/// Coordinator's integration order. For a triangle the label field is the
/// candidate's new label and w4/w3 repeat w1/w2; for a chain it is f, the
/// label of the segment's near endpoint w2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelectA {
    pub cand: NodeId,
    pub w1: NodeId,
    pub w2: NodeId,
    pub w3: NodeId,
    pub w4: NodeId,
    pub label: Label,
    pub triangle: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Message {
    /// Preprocessing flood carrying the origin's id.
    BfsFlood { root: NodeId },
    /// Convergecast of subtree sizes up the BFS tree.
    CountUp { count: u32 },
    /// Broadcast of the node count down the BFS tree.
    CountDown { n: u32 },
    Phase0Invite,
    Phase0Response,
    /// Appointment of the next path node; carries the origin id and the
    /// appointee's position index (its label is index * spacing).
    Phase0Appoint { v0: NodeId, index: u32 },
    Phase1Invite { v0: NodeId },
    Phase1Response { adjacent_to_v0: bool },
    Phase1Appoint { v0: NodeId, index: u32 },
    /// `ack: false`: close order to the new last node. `ack: true`: the
    /// closer telling the origin to set its predecessor pointer.
    Phase1Close { index: u32, ack: bool },
    /// Cycle membership broadcast: own predecessor and own label.
    MidI1 { prev: NodeId, label: Label },
    /// Insertion invitation to the predecessor side of the chosen edge,
    /// carrying the successor side's label.
    MidI2 { succ_label: Label },
    /// Acceptance (`new_prev: false`): old successor id plus the inserted
    /// node's new label. Pointer fix (`new_prev: true`): the old successor
    /// learns its new predecessor.
    MidI3 {
        node: NodeId,
        label: Option<Label>,
        new_prev: bool,
    },
    FinI1,
    /// Clockwise forward of a candidate id, with the sender's label.
    FinI2 { cand: NodeId, label: Label },
    /// Segment probe: candidate, the predecessor of the sender, and the
    /// sender's label f.
    FinI3 { cand: NodeId, w1: NodeId, f: Label },
    /// `tri: true`: triangle possibility sent to the candidate (w1 id plus
    /// precomputed label). `tri: false`: the candidate's new label delivered
    /// by w1 after the select broadcast.
    FinNotify {
        tri: bool,
        w1: NodeId,
        label: Label,
    },
    OfferHeadA(OfferA),
    OfferTailB(OfferB),
    OfferTriangle(OfferTri),
    SelectA(SelectA),
    /// Far endpoint label of the reversed segment, flooded one round behind
    /// SelectA.
    SelectB { l: Label },
}

/// Field widths used by the bit audit; derived from n once per run.
#[derive(Copy, Clone, Debug)]
pub struct FieldWidths {
    /// ceil(log2 n): one node id.
    pub id: u64,
    /// Node counters (subtree sizes, n itself): ceil(log2 n) + 1.
    pub count: u64,
    /// Path position index, bounded by 4 * ceil(log2 n).
    pub index: u64,
}

impl FieldWidths {
    pub fn for_n(n: u32) -> Self {
        let l = crate::schedule::ceil_log2(n) as u64;
        let index_max = 4 * l as u32;
        FieldWidths {
            id: l,
            count: l + 1,
            index: 32 - u32::leading_zeros(index_max.max(1)) as u64,
        }
    }
}

impl Message {
    pub fn kind(&self) -> MsgKind {
        match self {
            Message::BfsFlood { .. } => MsgKind::BfsFlood,
            Message::CountUp { .. } => MsgKind::CountUp,
            Message::CountDown { .. } => MsgKind::CountDown,
            Message::Phase0Invite => MsgKind::Phase0Invite,
            Message::Phase0Response => MsgKind::Phase0Response,
            Message::Phase0Appoint { .. } => MsgKind::Phase0Appoint,
            Message::Phase1Invite { .. } => MsgKind::Phase1Invite,
            Message::Phase1Response { .. } => MsgKind::Phase1Response,
            Message::Phase1Appoint { .. } => MsgKind::Phase1Appoint,
            Message::Phase1Close { .. } => MsgKind::Phase1Close,
            Message::MidI1 { .. } => MsgKind::MidI1,
            Message::MidI2 { .. } => MsgKind::MidI2,
            Message::MidI3 { .. } => MsgKind::MidI3,
            Message::FinI1 => MsgKind::FinI1,
            Message::FinI2 { .. } => MsgKind::FinI2,
            Message::FinI3 { .. } => MsgKind::FinI3,
            Message::FinNotify { .. } => MsgKind::FinNotify,
            Message::OfferHeadA(_) | Message::OfferTailB(_) | Message::OfferTriangle(_) => {
                MsgKind::Offer
            }
            Message::SelectA(_) | Message::SelectB { .. } => MsgKind::SelectBroadcast,
        }
    }

    /// Sum of declared field widths.
    pub fn bits(&self, w: &FieldWidths) -> u64 {
        match self {
            Message::BfsFlood { .. } => w.id,
            Message::CountUp { .. } => w.count,
            Message::CountDown { .. } => w.count,
            Message::Phase0Invite | Message::Phase0Response | Message::FinI1 => 0,
            Message::Phase0Appoint { .. } | Message::Phase1Appoint { .. } => w.id + w.index,
            Message::Phase1Invite { .. } => w.id,
            Message::Phase1Response { .. } => 1,
            Message::Phase1Close { .. } => w.index + 1,
            Message::MidI1 { label, .. } => w.id + label.bits(),
            Message::MidI2 { succ_label } => succ_label.bits(),
            Message::MidI3 { label, .. } => {
                w.id + 1 + label.as_ref().map_or(0, |l| l.bits())
            }
            Message::FinI2 { label, .. } => w.id + label.bits(),
            Message::FinI3 { f, .. } => 2 * w.id + f.bits(),
            Message::FinNotify { tri: _, label, .. } => w.id + 1 + label.bits(),
            // two part-discriminator bits on each offer fragment
            Message::OfferHeadA(a) => 4 * w.id + a.f.bits() + 2,
            Message::OfferTailB(b) => 2 * w.id + b.l.bits() + 2,
            Message::OfferTriangle(t) => 3 * w.id + t.new_label.bits() + 2,
            Message::SelectA(s) => 5 * w.id + s.label.bits() + 2,
            Message::SelectB { l } => l.bits() + 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn id_only_message_is_one_id_wide() {
        let w = FieldWidths::for_n(1024);
        assert_eq!(Message::BfsFlood { root: 0 }.bits(&w), 10);
    }

    #[test]
    fn two_id_message_is_twenty_bits_at_n_1024() {
        let w = FieldWidths::for_n(1024);
        let m = Message::FinI3 {
            cand: 3,
            w1: 5,
            f: Label::zero(),
        };
        assert_eq!(m.bits(&w), 20);
    }

    #[test]
    fn label_field_costs_its_bit_length() {
        let w = FieldWidths::for_n(1024);
        let m = Message::MidI2 {
            succ_label: Label::from_u64(1 << 20),
        };
        assert_eq!(m.bits(&w), 21);
    }

    #[test]
    fn largest_message_fits_cap_at_every_scale() {
        use crate::label::virtual_bound;
        for n in [8u32, 256, 512, 1024, 2048, 4096] {
            let l = crate::schedule::ceil_log2(n);
            let w = FieldWidths::for_n(n);
            let biggest = Message::SelectA(SelectA {
                cand: 0,
                w1: 0,
                w2: 0,
                w3: 0,
                w4: 0,
                label: virtual_bound(l),
                triangle: false,
            });
            assert!(
                biggest.bits(&w) <= 32 * l as u64,
                "n={n}: {} > {}",
                biggest.bits(&w),
                32 * l as u64
            );
        }
    }
}
