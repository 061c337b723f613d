//! Exhaustive winner determination for XOR profiles.
//!
//! Small instances only (the constructor guards at 12 items and 12
//! bidders): the solver walks every assignment of at most one entry per
//! bidder with disjoint bundles, keeping the best. A suffix upper bound
//! prunes branches that cannot reach the incumbent, but never prunes ties,
//! because ties are resolved by a deterministic order: highest welfare,
//! then lexicographically smallest winner set, then lexicographically
//! smallest witness (bundles read as bitmasks in ascending bidder order).

use std::collections::{BTreeMap, BTreeSet};

use crate::allocation::Allocation;
use crate::bundle::{BidderId, Bundle, ItemId};
use crate::error::{Error, Result};
use crate::money::Money;
use crate::oracle::{OracleResult, WinnerOracle};
use crate::utility::UtilityVector;
use crate::valuation::ValuationProfile;

/// Guard on the exhaustive search; larger instances are rejected up front.
pub const MAX_EXACT_ITEMS: u32 = 12;
pub const MAX_EXACT_BIDDERS: usize = 12;

/// Exhaustive oracle over a [`ValuationProfile`].
pub struct ExactOracle {
    profile: ValuationProfile,
    bidder_ids: Vec<BidderId>,
    compiled: Vec<(BidderId, Vec<(u32, u64)>)>,
    total: Money,
}

impl ExactOracle {
    pub fn new(profile: ValuationProfile) -> Result<ExactOracle> {
        if profile.item_count() > MAX_EXACT_ITEMS {
            return Err(Error::Capacity(format!(
                "{} items exceeds exhaustive-solver limit of {MAX_EXACT_ITEMS}",
                profile.item_count()
            )));
        }
        if profile.bidder_count() > MAX_EXACT_BIDDERS {
            return Err(Error::Capacity(format!(
                "{} bidders exceeds exhaustive-solver limit of {MAX_EXACT_BIDDERS}",
                profile.bidder_count()
            )));
        }
        let positive: u128 = profile
            .bidders()
            .iter()
            .flat_map(|(_, v)| v.entries())
            .map(|(_, value)| value.micros() as u128)
            .sum();
        // Half of the u64 range, so that points up to twice the maximum
        // welfare (core-search probes go there) still fit in a Money.
        if positive > (u64::MAX / 2) as u128 {
            return Err(Error::Capacity("total declared value overflows micro units".into()));
        }
        let mut bidder_ids = profile.bidder_ids();
        bidder_ids.sort_unstable();
        // Entries as bitmasks, in ascending bidder order so the search is
        // independent of the profile's insertion order.
        let compiled = bidder_ids
            .iter()
            .map(|&id| {
                let entries = profile
                    .valuation(id)
                    .expect("id came from the profile")
                    .entries()
                    .iter()
                    .map(|(b, v)| (bundle_mask(b), v.micros()))
                    .collect();
                (id, entries)
            })
            .collect();
        let mut oracle = ExactOracle { profile, bidder_ids, compiled, total: Money::ZERO };
        let everyone: BTreeSet<BidderId> = oracle.bidder_ids.iter().copied().collect();
        let zeros = UtilityVector::zero(oracle.bidder_ids.iter().copied());
        oracle.total = oracle.solve_restricted(&everyone, &zeros)?.max_welfare;
        Ok(oracle)
    }

    pub fn profile(&self) -> &ValuationProfile {
        &self.profile
    }
}

fn bundle_mask(b: &Bundle) -> u32 {
    b.items().iter().fold(0u32, |m, &i| m | (1 << i))
}

fn mask_bundle(mask: u32) -> Bundle {
    let items: Vec<ItemId> = (0..32).filter(|i| mask & (1 << i) != 0).collect();
    Bundle::from_items(&items)
}

impl WinnerOracle for ExactOracle {
    fn bidder_ids(&self) -> &[BidderId] {
        &self.bidder_ids
    }

    fn total_welfare(&self) -> Money {
        self.total
    }

    fn solve_restricted(
        &self,
        allowed: &BTreeSet<BidderId>,
        truncation: &UtilityVector,
    ) -> Result<OracleResult> {
        // Truncated entry lists for the allowed bidders, zero-value entries
        // dropped so they can never be allocated.
        let mut bidders = Vec::new();
        for (id, entries) in &self.compiled {
            if !allowed.contains(id) {
                continue;
            }
            let cut = truncation
                .get(*id)
                .ok_or_else(|| Error::input(format!("truncation missing bidder {id}")))?
                .micros();
            let live: Vec<(u32, u64)> = entries
                .iter()
                .filter(|&&(_, v)| v > cut)
                .map(|&(m, v)| (m, v - cut))
                .collect();
            bidders.push((*id, live));
        }

        let n = bidders.len();
        let mut suffix_bound = vec![0u128; n + 1];
        for k in (0..n).rev() {
            let best_entry = bidders[k].1.iter().map(|&(_, v)| v as u128).max().unwrap_or(0);
            suffix_bound[k] = suffix_bound[k + 1] + best_entry;
        }

        let mut search = Search {
            bidders: &bidders,
            suffix_bound: &suffix_bound,
            masks: vec![0u32; n],
            best: Candidate { welfare: 0, winners: Vec::new(), masks: vec![0u32; n] },
        };
        search.descend(0, 0, 0);

        let Candidate { welfare, winners, masks } = search.best;
        if welfare == 0 {
            return Ok(OracleResult::empty());
        }
        let mut assignment = BTreeMap::new();
        for (k, &(id, _)) in bidders.iter().enumerate() {
            if masks[k] != 0 {
                assignment.insert(id, mask_bundle(masks[k]));
            }
        }
        debug_assert_eq!(winners, assignment.keys().copied().collect::<Vec<_>>());
        let witness = Allocation::new(assignment)
            .map_err(|e| Error::invariant(format!("solver produced invalid witness: {e}")))?;
        Ok(OracleResult::from_witness(Money::from_micros(welfare), witness))
    }

    fn declared_value(&self, bidder: BidderId, bundle: &Bundle) -> Money {
        self.profile.valuation(bidder).map(|v| v.value_of(bundle)).unwrap_or(Money::ZERO)
    }
}

struct Candidate {
    welfare: u64,
    winners: Vec<BidderId>,
    masks: Vec<u32>,
}

struct Search<'a> {
    bidders: &'a [(BidderId, Vec<(u32, u64)>)],
    suffix_bound: &'a [u128],
    masks: Vec<u32>,
    best: Candidate,
}

impl Search<'_> {
    fn descend(&mut self, k: usize, used: u32, welfare: u64) {
        // Strict inequality: equal-welfare branches must survive so the
        // lexicographic tie-break sees them.
        if (welfare as u128) + self.suffix_bound[k] < self.best.welfare as u128 {
            return;
        }
        if k == self.bidders.len() {
            self.consider(welfare);
            return;
        }
        for e in 0..self.bidders[k].1.len() {
            let (mask, value) = self.bidders[k].1[e];
            if mask & used == 0 {
                self.masks[k] = mask;
                self.descend(k + 1, used | mask, welfare + value);
            }
        }
        self.masks[k] = 0;
        self.descend(k + 1, used, welfare);
    }

    fn consider(&mut self, welfare: u64) {
        if welfare < self.best.welfare {
            return;
        }
        let winners: Vec<BidderId> = self
            .bidders
            .iter()
            .enumerate()
            .filter(|&(k, _)| self.masks[k] != 0)
            .map(|(_, &(id, _))| id)
            .collect();
        let better = welfare > self.best.welfare
            || winners < self.best.winners
            || (winners == self.best.winners && self.masks < self.best.masks);
        if better {
            self.best = Candidate { welfare, winners, masks: self.masks.clone() };
        }
    }
}
