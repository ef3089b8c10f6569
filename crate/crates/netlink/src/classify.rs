use serde::{Deserialize, Serialize};

use crate::ping::PingRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Connectivity {
    Good,
    Bad,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityStatus {
    pub status: Connectivity,
    pub last_change: f64,
}

/// Debounced connectivity: flips only after `k` consecutive records that
/// disagree with the current status. Starts Good.
#[derive(Debug, Clone)]
pub struct ConnectivityClassifier {
    k: usize,
    current: ConnectivityStatus,
    streak: usize,
}

impl ConnectivityClassifier {
    pub fn new(k: usize, start: f64) -> Self {
        Self {
            k: k.max(1),
            current: ConnectivityStatus {
                status: Connectivity::Good,
                last_change: start,
            },
            streak: 0,
        }
    }

    pub fn status(&self) -> ConnectivityStatus {
        self.current
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Feeds one record observed at `now`; returns the new status when it
    /// changed.
    pub fn push(&mut self, rec: &PingRecord, now: f64) -> Option<ConnectivityStatus> {
        let observed = if rec.code == 0 {
            Connectivity::Good
        } else {
            Connectivity::Bad
        };
        if observed == self.current.status {
            self.streak = 0;
            return None;
        }
        self.streak += 1;
        if self.streak < self.k {
            return None;
        }
        self.streak = 0;
        self.current = ConnectivityStatus {
            status: observed,
            last_change: now,
        };
        Some(self.current)
    }
}

/// Status after replaying `history` from a Good start.
pub fn classify_connectivity(history: &[PingRecord], k: usize) -> Connectivity {
    let mut c = ConnectivityClassifier::new(k, 0.0);
    for r in history {
        c.push(r, r.sent_at);
    }
    c.status().status
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn records(codes: &[u8]) -> Vec<PingRecord> {
        codes
            .iter()
            .enumerate()
            .map(|(i, c)| PingRecord {
                seq: i as u64 + 1,
                sent_at: i as f64 * 0.1,
                code: *c,
            })
            .collect()
    }

    /// Independent rule: the status is that of the most recent run of at
    /// least k equal codes which differs from the status before it.
    fn oracle(codes: &[u8], k: usize) -> Vec<Connectivity> {
        let mut status = Connectivity::Good;
        (0..codes.len())
            .map(|i| {
                if i + 1 >= k {
                    let tail = &codes[i + 1 - k..=i];
                    let want = if tail[0] == 0 { Connectivity::Good } else { Connectivity::Bad };
                    if tail.iter().all(|c| *c == tail[0]) && want != status {
                        status = want;
                    }
                }
                status
            })
            .collect()
    }

    #[test]
    fn all_good() {
        assert_eq!(classify_connectivity(&records(&[0; 20]), 3), Connectivity::Good);
    }

    #[test]
    fn bad_on_fifth_record() {
        let recs = records(&[0, 0, 1, 1, 1]);
        let mut c = ConnectivityClassifier::new(3, 0.0);
        let flips: Vec<usize> = recs
            .iter()
            .enumerate()
            .filter_map(|(i, r)| c.push(r, r.sent_at).map(|_| i + 1))
            .collect();
        assert_eq!(flips, vec![5]);
        assert_eq!(c.status().status, Connectivity::Bad);
    }

    #[test]
    fn alternating_losses_never_flip() {
        let codes: Vec<u8> = [1, 1, 0].iter().cycle().take(60).copied().collect();
        let mut c = ConnectivityClassifier::new(3, 0.0);
        for r in records(&codes) {
            assert_eq!(c.push(&r, r.sent_at), None);
        }
    }

    #[test]
    fn k_one_follows_every_record() {
        assert_eq!(classify_connectivity(&records(&[0, 1]), 1), Connectivity::Bad);
        assert_eq!(classify_connectivity(&records(&[1, 0]), 1), Connectivity::Good);
    }

    proptest! {
        #[test]
        fn matches_run_rule(codes in prop::collection::vec(0u8..=1, 0..80), k in 1usize..5) {
            let expected = oracle(&codes, k);
            let mut c = ConnectivityClassifier::new(k, 0.0);
            for (r, want) in records(&codes).iter().zip(expected) {
                c.push(r, r.sent_at);
                prop_assert_eq!(c.status().status, want);
            }
        }
    }
}
