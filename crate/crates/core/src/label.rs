//! Cycle-position labels and the arithmetic that makes segment reversal a
//! constant-round operation.
//!
//! Labels strictly ascend along the cycle starting from 0 at the origin
//! node. Insertions take ceil((f+l)/2) between neighbors labeled f < l, and
//! a segment [f, l] is reversed by relabeling every member x to f + l - x,
//! which is order-reversing and keeps all gaps intact. Initial spacing is
//! 2^(20*ceil(log2 n)), enough that a gap survives one halving per phase
//! across the whole schedule with room to spare, while keeping labels at
//! O(log n) bits.

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Spacing exponent multiplier: initial labels sit 2^(SPACING_SHIFT * L)
/// apart for L = ceil(log2 n).
pub const SPACING_SHIFT: u32 = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LabelError {
    #[error("label interval [{f}, {l}] is not ascending")]
    BadInterval { f: String, l: String },
    #[error("gap between {f} and {l} is below 2; no integer fits strictly between")]
    GapExhausted { f: String, l: String },
}

/// Arbitrary-precision non-negative node number.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Default, Hash)]
pub struct Label(BigUint);

impl Label {
    pub fn zero() -> Self {
        Label(BigUint::zero())
    }

    pub fn from_u64(v: u64) -> Self {
        Label(BigUint::from(v))
    }

    /// Bit-length of the value; 0 for the zero label. This is what message
    /// and memory audits charge for a label field.
    pub fn bits(&self) -> u64 {
        self.0.bits()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Absolute difference, used for gap reporting.
    pub fn gap(&self, other: &Label) -> Label {
        if self.0 >= other.0 {
            Label(&self.0 - &other.0)
        } else {
            Label(&other.0 - &self.0)
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::str::FromStr for Label {
    type Err = num_bigint::ParseBigIntError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(Label(s.parse()?))
    }
}

impl Serialize for Label {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Initial spacing S = 2^(20 L) between consecutive labels on the first cycle.
pub fn spacing(l: u32) -> Label {
    Label(BigUint::from(1u32) << (SPACING_SHIFT * l))
}

/// Label for position `index` on the initial path/cycle: index * S.
pub fn initial_label(index: u32, l: u32) -> Label {
    Label(BigUint::from(index) << (SPACING_SHIFT * l))
}

/// Virtual upper bound U = (4L + 1) * S. All real labels stay strictly below
/// it; insertions between the highest-numbered node and the origin midpoint
/// against it.
pub fn virtual_bound(l: u32) -> Label {
    Label(BigUint::from(4 * l + 1) << (SPACING_SHIFT * l))
}

/// ceil((f + l) / 2); strictly between f and l whenever l - f >= 2.
pub fn midpoint_label(f: &Label, l: &Label) -> Result<Label, LabelError> {
    if f >= l {
        return Err(LabelError::BadInterval {
            f: f.to_string(),
            l: l.to_string(),
        });
    }
    if &l.0 - &f.0 < BigUint::from(2u32) {
        return Err(LabelError::GapExhausted {
            f: f.to_string(),
            l: l.to_string(),
        });
    }
    Ok(Label((&f.0 + &l.0 + 1u32) >> 1))
}

/// Label for a node inserted between the current maximum `y` and the origin:
/// the midpoint of [y, U). Keeps strict ascent and hands the max-label role
/// to the new node.
pub fn wrap_label(y: &Label, bound: &Label) -> Result<Label, LabelError> {
    midpoint_label(y, bound)
}

/// The reversal map x -> f + l - x on [f, l]. Swaps the endpoints, reverses
/// order, and preserves every pairwise gap. Callers filter to f <= x <= l.
pub fn reflect_label(x: &Label, f: &Label, l: &Label) -> Label {
    assert!(f <= x && x <= l, "reflect_label: {x} outside [{f}, {l}]");
    Label(&f.0 + &l.0 - &x.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lab(v: u64) -> Label {
        Label::from_u64(v)
    }

    #[test]
    fn midpoint_examples() {
        assert_eq!(midpoint_label(&lab(112), &lab(124)).unwrap(), lab(118));
        assert_eq!(midpoint_label(&lab(0), &lab(2)).unwrap(), lab(1));
        assert_eq!(midpoint_label(&lab(5), &lab(8)).unwrap(), lab(7));
    }

    #[test]
    fn midpoint_errors() {
        assert!(matches!(
            midpoint_label(&lab(5), &lab(6)),
            Err(LabelError::GapExhausted { .. })
        ));
        assert!(matches!(
            midpoint_label(&lab(6), &lab(5)),
            Err(LabelError::BadInterval { .. })
        ));
        assert!(matches!(
            midpoint_label(&lab(5), &lab(5)),
            Err(LabelError::BadInterval { .. })
        ));
    }

    #[test]
    fn wrap_example() {
        // S = 2^40, beta = beta_max = 12: mid(12*2^40, 13*2^40) = 25*2^39
        let s = BigUint::from(1u32) << 40;
        let y = Label(BigUint::from(12u32) * &s);
        let bound = Label(BigUint::from(13u32) * &s);
        let expect = Label(BigUint::from(25u32) << 39);
        assert_eq!(wrap_label(&y, &bound).unwrap(), expect);
    }

    #[test]
    fn successive_wraps_stay_between() {
        let bound = virtual_bound(4);
        let y0 = initial_label(12, 4);
        let w1 = wrap_label(&y0, &bound).unwrap();
        let w2 = wrap_label(&w1, &bound).unwrap();
        assert!(y0 < w1 && w1 < w2 && w2 < bound);
        // wrap then interior insertion between old max and wrap node
        let interior = midpoint_label(&y0, &w1).unwrap();
        assert!(y0 < interior && interior < w1);
    }

    #[test]
    fn reflect_examples() {
        assert_eq!(reflect_label(&lab(124), &lab(124), &lab(229)), lab(229));
        assert_eq!(reflect_label(&lab(150), &lab(124), &lab(229)), lab(203));
    }

    #[test]
    fn reflected_sequence_descends() {
        // Lemma-style check: n_i = n'_1 + n'_k - n'_i over an ascending
        // sequence comes out strictly descending.
        let seq: Vec<Label> = [100u64, 103, 110, 111, 140].iter().map(|&v| lab(v)).collect();
        let f = seq.first().unwrap().clone();
        let l = seq.last().unwrap().clone();
        let reflected: Vec<Label> = seq.iter().map(|x| reflect_label(x, &f, &l)).collect();
        assert!(reflected.windows(2).all(|w| w[0] > w[1]));
        assert_eq!(reflected[0], l);
        assert_eq!(reflected[4], f);
    }

    #[test]
    fn spacing_bit_length_is_linear_in_l() {
        for l in [3u32, 9, 10, 11] {
            assert_eq!(spacing(l).bits(), (SPACING_SHIFT * l) as u64 + 1);
            let vb = virtual_bound(l);
            assert!(vb.bits() <= (SPACING_SHIFT * l) as u64 + 8);
        }
    }
}
