//! Decorated-slate auctions and their exact winner determination.
//!
//! An ad occupies a whole number of lines and carries a score, the bid
//! weighted by click probability. A slate shows at most `h` ads with at
//! most `m` lines in total, and at most one ad per advertiser. Winner
//! determination maximizes the total truncated score of the slate, which a
//! dynamic program over (ad index, ads left, lines left) solves exactly
//! because ads are grouped by advertiser: taking an ad jumps straight to
//! the next advertiser's group.

use std::collections::{BTreeMap, BTreeSet};

use crate::allocation::Allocation;
use crate::bundle::{BidderId, Bundle};
use crate::error::{Error, Result};
use crate::money::{frac, Frac, Money};
use crate::oracle::{OracleResult, WinnerOracle};
use crate::utility::UtilityVector;

/// One candidate ad: a creative of a fixed height with a bid and a click
/// probability. The score `bid * pclick` must land exactly on the micro
/// grid, so every welfare computed from it stays an integer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ad {
    advertiser: BidderId,
    decoration: u32,
    lines: u32,
    bid: Money,
    pclick_num: u64,
    pclick_den: u64,
}

impl Ad {
    pub fn new(
        advertiser: BidderId,
        decoration: u32,
        lines: u32,
        bid: Money,
        pclick_num: u64,
        pclick_den: u64,
    ) -> Result<Ad> {
        if lines == 0 {
            return Err(Error::input("an ad must occupy at least one line"));
        }
        if pclick_num == 0 || pclick_den == 0 || pclick_num > pclick_den {
            return Err(Error::input(format!(
                "click probability {pclick_num}/{pclick_den} is not in (0, 1]"
            )));
        }
        let scaled = bid.micros() as u128 * pclick_num as u128;
        if scaled % pclick_den as u128 != 0 {
            return Err(Error::input(format!(
                "score {} * {pclick_num}/{pclick_den} is not a whole number of micros",
                bid.micros()
            )));
        }
        Ok(Ad { advertiser, decoration, lines, bid, pclick_num, pclick_den })
    }

    pub fn advertiser(&self) -> BidderId {
        self.advertiser
    }

    pub fn decoration(&self) -> u32 {
        self.decoration
    }

    pub fn lines(&self) -> u32 {
        self.lines
    }

    pub fn bid(&self) -> Money {
        self.bid
    }

    pub fn pclick(&self) -> Frac {
        frac(self.pclick_num as i128, self.pclick_den as i128)
    }

    pub fn pclick_parts(&self) -> (u64, u64) {
        (self.pclick_num, self.pclick_den)
    }

    /// Expected value of showing this ad, `bid * pclick`, exact in micros.
    pub fn score(&self) -> Money {
        let scaled = self.bid.micros() as u128 * self.pclick_num as u128 / self.pclick_den as u128;
        Money::from_micros(u64::try_from(scaled).expect("score fits because pclick <= 1"))
    }
}

/// A slate auction: candidate ads grouped by advertiser, a slot budget `h`
/// and a line budget `m`.
#[derive(Clone, Debug)]
pub struct SlateInstance {
    h: u32,
    m: u32,
    ads: Vec<Ad>,
}

impl SlateInstance {
    pub fn new(h: u32, m: u32, ads: Vec<Ad>) -> Result<SlateInstance> {
        if h == 0 {
            return Err(Error::input("a slate must have at least one slot"));
        }
        if m == 0 {
            return Err(Error::input("a slate must have at least one line"));
        }
        let mut seen: BTreeSet<BidderId> = BTreeSet::new();
        let mut run: Option<BidderId> = None;
        for ad in &ads {
            if run != Some(ad.advertiser) {
                if !seen.insert(ad.advertiser) {
                    return Err(Error::input(format!(
                        "ads of advertiser {} are not contiguous",
                        ad.advertiser
                    )));
                }
                run = Some(ad.advertiser);
            }
        }
        Ok(SlateInstance { h, m, ads })
    }

    pub fn slots(&self) -> u32 {
        self.h
    }

    pub fn line_budget(&self) -> u32 {
        self.m
    }

    pub fn ads(&self) -> &[Ad] {
        &self.ads
    }

    pub fn advertisers(&self) -> Vec<BidderId> {
        let mut ids: Vec<BidderId> = self.ads.iter().map(|a| a.advertiser).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }
}

/// Exact slate winner determination via dynamic programming.
pub struct SlateOracle {
    instance: SlateInstance,
    bidder_ids: Vec<BidderId>,
    /// For each ad, the index of the first ad of the next advertiser.
    next_group: Vec<usize>,
    total: Money,
}

impl SlateOracle {
    pub fn new(instance: SlateInstance) -> Result<SlateOracle> {
        // Same headroom rule as the exhaustive oracle: leave room for
        // core-search probes up to twice the maximum welfare.
        let positive: u128 = instance.ads.iter().map(|a| a.score().micros() as u128).sum();
        if positive > (u64::MAX / 2) as u128 {
            return Err(Error::Capacity("total slate score overflows micro units".into()));
        }
        let bidder_ids = instance.advertisers();
        let n = instance.ads.len();
        let mut next_group = vec![n; n];
        for i in (0..n).rev() {
            if i + 1 < n && instance.ads[i + 1].advertiser == instance.ads[i].advertiser {
                next_group[i] = next_group[i + 1];
            } else {
                next_group[i] = i + 1;
            }
        }
        let mut oracle = SlateOracle { instance, bidder_ids, next_group, total: Money::ZERO };
        let everyone: BTreeSet<BidderId> = oracle.bidder_ids.iter().copied().collect();
        let zeros = UtilityVector::zero(oracle.bidder_ids.iter().copied());
        oracle.total = oracle.solve_restricted(&everyone, &zeros)?.max_welfare;
        Ok(oracle)
    }

    pub fn instance(&self) -> &SlateInstance {
        &self.instance
    }
}

impl WinnerOracle for SlateOracle {
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
        let ads = &self.instance.ads;
        let n = ads.len();
        let slots = self.instance.h as usize;
        let lines = self.instance.m as usize;

        // Truncated gain of taking each ad, zero meaning "never take".
        let mut gain = vec![0u64; n];
        for (i, ad) in ads.iter().enumerate() {
            if !allowed.contains(&ad.advertiser) {
                continue;
            }
            let cut = truncation
                .get(ad.advertiser)
                .ok_or_else(|| Error::input(format!("truncation missing bidder {}", ad.advertiser)))?;
            gain[i] = ad.score().saturating_sub(cut).micros();
        }

        // value[i][s][l] = best truncated welfare from ads i.. with s slots
        // and l lines still free; took[..] records the argmax, preferring
        // "take" on ties so the chosen slate is the greedy lowest-indexed one.
        let stride_s = lines + 1;
        let stride_i = (slots + 1) * stride_s;
        let idx = |i: usize, s: usize, l: usize| i * stride_i + s * stride_s + l;
        let mut value = vec![0u64; (n + 1) * stride_i];
        let mut took = vec![false; (n + 1) * stride_i];
        for i in (0..n).rev() {
            let need = ads[i].lines as usize;
            for s in 0..=slots {
                for l in 0..=lines {
                    let skip = value[idx(i + 1, s, l)];
                    let mut best = skip;
                    let mut take = false;
                    if gain[i] > 0 && s >= 1 && need <= l {
                        let with = gain[i] + value[idx(self.next_group[i], s - 1, l - need)];
                        if with >= skip {
                            best = with;
                            take = true;
                        }
                    }
                    value[idx(i, s, l)] = best;
                    took[idx(i, s, l)] = take;
                }
            }
        }

        let welfare = value[idx(0, slots, lines)];
        if welfare == 0 {
            return Ok(OracleResult::empty());
        }
        let mut assignment: BTreeMap<BidderId, Bundle> = BTreeMap::new();
        let (mut i, mut s, mut l) = (0usize, slots, lines);
        while i < n {
            if took[idx(i, s, l)] {
                assignment.insert(ads[i].advertiser, Bundle::from_items(&[i as u32]));
                s -= 1;
                l -= ads[i].lines as usize;
                i = self.next_group[i];
            } else {
                i += 1;
            }
        }
        let witness = Allocation::new(assignment)
            .map_err(|e| Error::invariant(format!("slate solver produced invalid witness: {e}")))?;
        Ok(OracleResult::from_witness(Money::from_micros(welfare), witness))
    }

    /// Value an advertiser declares for a set of ad slots: the summed score
    /// of its own ads among them. Ads of other advertisers contribute zero.
    fn declared_value(&self, bidder: BidderId, bundle: &Bundle) -> Money {
        bundle
            .items()
            .iter()
            .filter_map(|&i| self.instance.ads.get(i as usize))
            .filter(|ad| ad.advertiser == bidder)
            .map(|ad| ad.score())
            .sum()
    }
}
