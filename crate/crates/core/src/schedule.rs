//! The global round schedule. Every phase has a fixed, known length derived
//! from n alone; nodes that finish early idle out the remainder, so every
//! successful run consumes exactly the same number of rounds for a given n.

/// ceil(log2 n), clamped to at least 1 so degenerate graphs still get a
/// well-formed schedule.
pub fn ceil_log2(n: u32) -> u32 {
    if n <= 2 {
        1
    } else {
        32 - (n - 1).leading_zeros()
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum PhaseId {
    Preprocessing,
    Phase0,
    Phase1,
    /// Middle phases, 1-based index up to 16 L.
    Middle(u32),
    /// Final phases, 1-based index up to 3 L.
    Final(u32),
}

impl PhaseId {
    pub fn bucket(&self) -> &'static str {
        match self {
            PhaseId::Preprocessing => "preprocessing",
            PhaseId::Phase0 => "phase0",
            PhaseId::Phase1 => "phase1",
            PhaseId::Middle(_) => "middle",
            PhaseId::Final(_) => "final",
        }
    }
}

/// Where a global round falls: which phase and which 1-based round within it.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum RoundInfo {
    Phase { id: PhaseId, rel: u32 },
    /// Delivery-only rounds appended after the schedule so in-flight
    /// messages land and the last integrations apply; nothing is sent.
    Flush { index: u32 },
}

#[derive(Clone, Debug)]
pub struct Schedule {
    pub n: u32,
    pub l: u32,
    pub preprocessing_rounds: u32,
    pub phase0_rounds: u32,
    pub phase1_rounds: u32,
    pub middle_count: u32,
    pub final_count: u32,
    /// Total scheduled rounds (flush rounds excluded).
    pub total_rounds: u32,
}

pub const MIDDLE_PHASE_ROUNDS: u32 = 3;
pub const FINAL_PHASE_ROUNDS: u32 = 11;
/// Delivery-only rounds appended after the last scheduled round.
pub const FLUSH_ROUNDS: u32 = 2;

impl Schedule {
    pub fn for_n(n: u32) -> Self {
        let l = ceil_log2(n);
        let preprocessing_rounds = 9;
        let phase0_rounds = 3 * (3 * l - 1);
        let phase1_rounds = 3 * l;
        let middle_count = 16 * l;
        let final_count = 3 * l;
        let total_rounds = preprocessing_rounds
            + phase0_rounds
            + phase1_rounds
            + middle_count * MIDDLE_PHASE_ROUNDS
            + final_count * FINAL_PHASE_ROUNDS;
        Schedule {
            n,
            l,
            preprocessing_rounds,
            phase0_rounds,
            phase1_rounds,
            middle_count,
            final_count,
            total_rounds,
        }
    }

    /// Number of nodes phase 0 targets for the initial path. The paper's
    /// 3 log n, capped so at least one node stays outside for phase 1's
    /// closing step on small graphs.
    pub fn path_target(&self) -> u32 {
        (3 * self.l).min(self.n.saturating_sub(1)).max(1)
    }

    pub fn phase0_start(&self) -> u32 {
        self.preprocessing_rounds
    }

    pub fn phase1_start(&self) -> u32 {
        self.phase0_start() + self.phase0_rounds
    }

    pub fn middle_start(&self) -> u32 {
        self.phase1_start() + self.phase1_rounds
    }

    pub fn final_start(&self) -> u32 {
        self.middle_start() + self.middle_count * MIDDLE_PHASE_ROUNDS
    }

    /// Classify a 1-based global round.
    pub fn round_info(&self, round: u32) -> RoundInfo {
        debug_assert!(round >= 1);
        if round <= self.preprocessing_rounds {
            return RoundInfo::Phase {
                id: PhaseId::Preprocessing,
                rel: round,
            };
        }
        if round <= self.phase1_start() {
            return RoundInfo::Phase {
                id: PhaseId::Phase0,
                rel: round - self.phase0_start(),
            };
        }
        if round <= self.middle_start() {
            return RoundInfo::Phase {
                id: PhaseId::Phase1,
                rel: round - self.phase1_start(),
            };
        }
        if round <= self.final_start() {
            let off = round - self.middle_start() - 1;
            return RoundInfo::Phase {
                id: PhaseId::Middle(off / MIDDLE_PHASE_ROUNDS + 1),
                rel: off % MIDDLE_PHASE_ROUNDS + 1,
            };
        }
        if round <= self.total_rounds {
            let off = round - self.final_start() - 1;
            return RoundInfo::Phase {
                id: PhaseId::Final(off / FINAL_PHASE_ROUNDS + 1),
                rel: off % FINAL_PHASE_ROUNDS + 1,
            };
        }
        RoundInfo::Flush {
            index: round - self.total_rounds,
        }
    }

    /// Last round of a phase.
    pub fn phase_end(&self, id: PhaseId) -> u32 {
        match id {
            PhaseId::Preprocessing => self.preprocessing_rounds,
            PhaseId::Phase0 => self.phase1_start(),
            PhaseId::Phase1 => self.middle_start(),
            PhaseId::Middle(i) => self.middle_start() + i * MIDDLE_PHASE_ROUNDS,
            PhaseId::Final(i) => self.final_start() + i * FINAL_PHASE_ROUNDS,
        }
    }

    /// Phases in schedule order.
    pub fn phases(&self) -> Vec<PhaseId> {
        let mut out = vec![PhaseId::Preprocessing, PhaseId::Phase0, PhaseId::Phase1];
        out.extend((1..=self.middle_count).map(PhaseId::Middle));
        out.extend((1..=self.final_count).map(PhaseId::Final));
        out
    }

    /// Probe round for a phase: two rounds past its end, after the apply
    /// pass. By then every message the phase emitted (including pipelined
    /// pointer fixes landing in the next phase's first rounds) has been
    /// applied, and the following phase has sent nothing that mutates
    /// persistent state.
    pub fn probe_round(&self, id: PhaseId) -> u32 {
        self.phase_end(id) + 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(4), 2);
        assert_eq!(ceil_log2(8), 3);
        assert_eq!(ceil_log2(9), 4);
        assert_eq!(ceil_log2(1024), 10);
        assert_eq!(ceil_log2(1025), 11);
    }

    #[test]
    fn total_matches_formula() {
        for n in [8u32, 16, 512, 1024, 2048] {
            let s = Schedule::for_n(n);
            let l = s.l;
            assert_eq!(
                s.total_rounds,
                9 + 3 * (3 * l - 1) + 3 * l + 48 * l + 33 * l
            );
        }
    }

    #[test]
    fn round_classification_round_trips() {
        let s = Schedule::for_n(64);
        let mut seen = 0u32;
        for r in 1..=s.total_rounds {
            match s.round_info(r) {
                RoundInfo::Phase { id, rel } => {
                    assert!(rel >= 1);
                    assert!(s.phase_end(id) >= r);
                    seen += 1;
                }
                RoundInfo::Flush { .. } => panic!("flush inside schedule"),
            }
        }
        assert_eq!(seen, s.total_rounds);
        assert!(matches!(
            s.round_info(s.total_rounds + 1),
            RoundInfo::Flush { index: 1 }
        ));
    }

    #[test]
    fn path_target_caps_small_n() {
        assert_eq!(Schedule::for_n(8).path_target(), 7);
        assert_eq!(Schedule::for_n(16).path_target(), 12);
        assert_eq!(Schedule::for_n(1024).path_target(), 30);
    }
}
