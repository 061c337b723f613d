//! Brute-force certification for small instances.
//!
//! [`CorePolytope`] tabulates the welfare of every bidder coalition by
//! routes deliberately different from the production solvers: profiles go
//! through a dynamic program over item subsets, slates through plain
//! recursive enumeration of feasible slates. Agreement between an oracle
//! and this table is therefore evidence, not a tautology. On top of the
//! table sit exhaustive core membership, coordinate-wise bidder
//! optimality, and the exact minimum-revenue core point.

use std::collections::BTreeSet;

use num::BigRational;

use crate::bundle::BidderId;
use crate::error::{Error, Result};
use crate::money::Money;
use crate::par::*;
use crate::simplex::{maximize_unit_sum, SumBound};
use crate::slate::SlateInstance;
use crate::utility::UtilityVector;
use crate::valuation::ValuationProfile;

/// Verification is exponential in bidders, so it stops here.
pub const MAX_POLYTOPE_BIDDERS: usize = 12;
/// Item-subset tables cap the universe for profile verification.
pub const MAX_POLYTOPE_ITEMS: u32 = 12;

/// Every coalition's welfare, plus the checks built on them.
pub struct CorePolytope {
    ids: Vec<BidderId>,
    /// Welfare by coalition bitmask over `ids`, `2^n` entries.
    values: Vec<u64>,
}

/// One violated core constraint: the bidders outside `coalition` are paid
/// `shortfall` more than the coalition's blocking power allows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoreViolation {
    pub coalition: Vec<BidderId>,
    pub shortfall: Money,
}

/// Outcome of the coordinate-wise optimality check.
#[derive(Clone, Debug)]
pub struct EpsOptimality {
    pub in_core: bool,
    /// Bidders whose utility could rise by epsilon plus one micro with the
    /// point still in the core. Empty when the point is tight.
    pub raisable: Vec<BidderId>,
}

impl EpsOptimality {
    pub fn holds(&self) -> bool {
        self.in_core && self.raisable.is_empty()
    }
}

impl CorePolytope {
    pub fn from_profile(profile: &ValuationProfile) -> Result<CorePolytope> {
        let mut ids = profile.bidder_ids();
        ids.sort_unstable();
        if ids.len() > MAX_POLYTOPE_BIDDERS {
            return Err(Error::Capacity(format!(
                "{} bidders exceeds the verification limit of {MAX_POLYTOPE_BIDDERS}",
                ids.len()
            )));
        }
        if profile.item_count() > MAX_POLYTOPE_ITEMS {
            return Err(Error::Capacity(format!(
                "{} items exceeds the verification limit of {MAX_POLYTOPE_ITEMS}",
                profile.item_count()
            )));
        }
        let positive: u128 = profile
            .bidders()
            .iter()
            .flat_map(|(_, v)| v.entries())
            .map(|(_, value)| value.micros() as u128)
            .sum();
        if positive > (u64::MAX / 2) as u128 {
            return Err(Error::Capacity("total declared value overflows micro units".into()));
        }

        let entries: Vec<Vec<(usize, u64)>> = ids
            .iter()
            .map(|&id| {
                profile
                    .valuation(id)
                    .expect("id came from the profile")
                    .entries()
                    .iter()
                    .map(|(b, v)| {
                        let mask = b.items().iter().fold(0usize, |m, &i| m | (1 << i));
                        (mask, v.micros())
                    })
                    .collect()
            })
            .collect();

        let mut values = vec![0u64; 1 << ids.len()];
        let empty_table = vec![0u64; 1 << profile.item_count()];
        fill_profile_values(ids.len(), 0, &empty_table, &entries, &mut values);
        Ok(CorePolytope { ids, values })
    }

    pub fn from_slate(instance: &SlateInstance) -> Result<CorePolytope> {
        let ids = instance.advertisers();
        if ids.len() > MAX_POLYTOPE_BIDDERS {
            return Err(Error::Capacity(format!(
                "{} advertisers exceeds the verification limit of {MAX_POLYTOPE_BIDDERS}",
                ids.len()
            )));
        }
        let mut groups: Vec<Vec<(u32, u64)>> = vec![Vec::new(); ids.len()];
        for ad in instance.ads() {
            let idx = ids.binary_search(&ad.advertiser()).expect("advertiser is listed");
            groups[idx].push((ad.lines(), ad.score().micros()));
        }
        // Enumerating slates for all coalitions costs the product of
        // (options + skip + absent) over advertisers; cap it.
        let work: u128 = groups.iter().map(|g| g.len() as u128 + 2).product();
        if work > 1 << 24 {
            return Err(Error::Capacity(
                "slate verification would enumerate too many candidate slates".into(),
            ));
        }
        let slots = instance.slots();
        let lines = instance.line_budget();
        let values: Vec<u64> = (0..1usize << ids.len())
            .into_par_iter()
            .map(|mask| best_slate_value(&groups, mask, 0, slots, lines))
            .collect();
        Ok(CorePolytope { ids, values })
    }

    pub fn bidder_ids(&self) -> &[BidderId] {
        &self.ids
    }

    /// The grand coalition's welfare.
    pub fn total_value(&self) -> Money {
        Money::from_micros(*self.values.last().expect("table is never empty"))
    }

    pub fn coalition_value(&self, members: &BTreeSet<BidderId>) -> Result<Money> {
        Ok(Money::from_micros(self.values[self.mask_of(members)?]))
    }

    /// Checks every coalition constraint: the bidders outside any coalition
    /// can keep at most what the coalition cannot block.
    pub fn is_in_core(&self, point: &UtilityVector) -> Result<bool> {
        let paid = self.coordinates(point)?;
        let total_paid: u128 = paid.iter().map(|&p| p as u128).sum();
        let grand = *self.values.last().unwrap() as u128;
        Ok((0..self.values.len()).all(|s| {
            let inside: u128 = members_of(s).map(|j| paid[j] as u128).sum();
            total_paid + self.values[s] as u128 <= grand + inside
        }))
    }

    /// All violated constraints, worst first.
    pub fn violations(&self, point: &UtilityVector) -> Result<Vec<CoreViolation>> {
        let paid = self.coordinates(point)?;
        let total_paid: u128 = paid.iter().map(|&p| p as u128).sum();
        let grand = *self.values.last().unwrap() as u128;
        let mut found = Vec::new();
        for s in 0..self.values.len() {
            let inside: u128 = members_of(s).map(|j| paid[j] as u128).sum();
            let lhs = total_paid + self.values[s] as u128;
            let rhs = grand + inside;
            if lhs > rhs {
                let coalition = members_of(s).map(|j| self.ids[j]).collect();
                found.push((s, CoreViolation {
                    coalition,
                    shortfall: Money::from_micros((lhs - rhs) as u64),
                }));
            }
        }
        found.sort_by(|(ma, a), (mb, b)| b.shortfall.cmp(&a.shortfall).then(ma.cmp(mb)));
        Ok(found.into_iter().map(|(_, v)| v).collect())
    }

    /// The largest blocking surplus `w(S) - paid(S)` over all coalitions.
    /// At most the seller's surplus exactly when the point is in the core.
    pub fn max_blocking_value(&self, point: &UtilityVector) -> Result<Money> {
        let paid = self.coordinates(point)?;
        let best = (0..self.values.len())
            .map(|s| {
                let inside: i128 = members_of(s).map(|j| paid[j] as i128).sum();
                self.values[s] as i128 - inside
            })
            .max()
            .unwrap_or(0);
        Ok(Money::from_micros(u64::try_from(best.max(0)).expect("welfare fits")))
    }

    /// Core membership plus, coordinate by coordinate, whether any bidder
    /// could still be paid epsilon plus one micro more.
    pub fn check_eps_bidder_optimal(
        &self,
        point: &UtilityVector,
        epsilon: Money,
    ) -> Result<EpsOptimality> {
        if !self.is_in_core(point)? {
            return Ok(EpsOptimality { in_core: false, raisable: Vec::new() });
        }
        let bump = Money::from_micros(epsilon.micros() + 1);
        let mut raisable = Vec::new();
        for &id in &self.ids {
            let mut bumped = point.clone();
            bumped.add_to(id, bump);
            if self.is_in_core(&bumped)? {
                raisable.push(id);
            }
        }
        Ok(EpsOptimality { in_core: true, raisable })
    }

    /// The core point that pays bidders the most in total, which is the
    /// seller's minimum revenue. Solved exactly as a rational linear
    /// program after discarding coalition caps implied by sub-coalitions;
    /// coordinates are floored to micros, so the returned total can sit up
    /// to one micro per bidder below the true optimum.
    pub fn min_revenue_core_point(&self) -> Result<UtilityVector> {
        let n = self.ids.len();
        if n == 0 {
            return Ok(UtilityVector::zero([]));
        }
        let full = self.values.len() - 1;
        let grand = self.values[full];
        let mut caps = vec![0u64; full + 1];
        for t in 1..=full {
            caps[t] = grand.checked_sub(self.values[full ^ t]).ok_or_else(|| {
                Error::invariant("coalition welfare exceeds the grand coalition's")
            })?;
        }

        // A cap is redundant when some split of its members into two parts
        // already binds at least as tightly; effective caps propagate that
        // bottom-up over all submask splits.
        let mut effective = caps.clone();
        let mut keep = vec![true; full + 1];
        for t in 1..=full {
            if t & (t - 1) == 0 {
                continue;
            }
            let mut tightest = u128::MAX;
            let mut u = (t - 1) & t;
            while u > 0 {
                let split = effective[u] as u128 + effective[t ^ u] as u128;
                tightest = tightest.min(split);
                u = (u - 1) & t;
            }
            if tightest <= caps[t] as u128 {
                keep[t] = false;
                effective[t] = tightest as u64;
            }
        }

        let bounds: Vec<SumBound> = (1..=full)
            .filter(|&t| keep[t])
            .map(|t| SumBound { mask: t as u64, cap: caps[t] })
            .collect();
        let solution = maximize_unit_sum(n, &bounds)?;
        let mut point = UtilityVector::zero(self.ids.iter().copied());
        for (j, x) in solution.iter().enumerate() {
            point.set(self.ids[j], Money::from_micros(floor_to_micros(x)?));
        }
        Ok(point)
    }

    /// Checks the point covers exactly this polytope's bidders and returns
    /// its coordinates in id order.
    fn coordinates(&self, point: &UtilityVector) -> Result<Vec<u64>> {
        if !point.ids().eq(self.ids.iter().copied()) {
            return Err(Error::input(
                "utility point must cover exactly the instance's bidders",
            ));
        }
        Ok(self.ids.iter().map(|&id| point.get_or_zero(id).micros()).collect())
    }

    fn mask_of(&self, members: &BTreeSet<BidderId>) -> Result<usize> {
        let mut mask = 0usize;
        for id in members {
            let j = self
                .ids
                .binary_search(id)
                .map_err(|_| Error::input(format!("unknown bidder {id}")))?;
            mask |= 1 << j;
        }
        Ok(mask)
    }
}

fn members_of(mut mask: usize) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            return None;
        }
        let j = mask.trailing_zeros() as usize;
        mask &= mask - 1;
        Some(j)
    })
}

/// Walks coalitions by inserting bidders in decreasing index order, carrying
/// a table of "best welfare on each item subset" that adding one bidder
/// extends in one sweep.
fn fill_profile_values(
    insert_below: usize,
    mask: usize,
    table: &[u64],
    entries: &[Vec<(usize, u64)>],
    out: &mut [u64],
) {
    out[mask] = *table.last().expect("item table is never empty");
    for j in 0..insert_below {
        let mut extended = table.to_vec();
        for m in 0..extended.len() {
            for &(bundle, value) in &entries[j] {
                if m & bundle == bundle {
                    let candidate = value + table[m ^ bundle];
                    if candidate > extended[m] {
                        extended[m] = candidate;
                    }
                }
            }
        }
        fill_profile_values(j, mask | (1 << j), &extended, entries, out);
    }
}

/// Best slate welfare for the advertisers in `mask`, by trying every ad
/// (or none) per advertiser under the slot and line budgets.
fn best_slate_value(
    groups: &[Vec<(u32, u64)>],
    mask: usize,
    idx: usize,
    slots: u32,
    lines: u32,
) -> u64 {
    if idx == groups.len() {
        return 0;
    }
    let mut best = best_slate_value(groups, mask, idx + 1, slots, lines);
    if mask >> idx & 1 == 1 && slots > 0 {
        for &(need, score) in &groups[idx] {
            if need <= lines {
                let candidate = score + best_slate_value(groups, mask, idx + 1, slots - 1, lines - need);
                best = best.max(candidate);
            }
        }
    }
    best
}

fn floor_to_micros(x: &BigRational) -> Result<u64> {
    use num::ToPrimitive;
    x.to_integer()
        .to_u64()
        .ok_or_else(|| Error::invariant("core point coordinate does not fit in micros"))
}
