//! The water-filling core pricer.
//!
//! Bidder utilities start at zero, which is always in the core, and rise
//! along a chosen direction until the point is about to leave it. The
//! bidders allowed to rise are the intersection of the winner sets seen so
//! far: whoever wins at the current frontier is still owed utility, and
//! whoever has dropped out is pinned by a binding coalition. The loop ends
//! when that intersection empties, after at most one pass per bidder,
//! because the winner set probed just outside the core can never contain
//! every bidder still rising.
//!
//! Everything runs on the integer micro grid. A ray search brackets the
//! core boundary between a feasible step and an infeasible one, starting
//! from a power-of-two step that exceeds the seller's remaining surplus and
//! is therefore infeasible without asking the oracle. Halving from a power
//! of two keeps every probe an integer, and the final infeasible probe
//! doubles as the next round's winner query, which is what makes the total
//! call budget logarithmic in welfare over epsilon.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::Serialize;

use crate::allocation::Allocation;
use crate::baselines::{vcg, VcgOutcome};
use crate::bundle::BidderId;
use crate::error::{Error, Result};
use crate::money::Money;
use crate::oracle::{CountingOracle, OracleResult, WinnerOracle};
use crate::utility::UtilityVector;

/// How utilities rise within a round.
#[derive(Clone, Debug)]
pub enum DirectionPolicy {
    /// Every rising bidder gains at the same rate.
    Uniform,
    /// Rates follow each bidder's remaining gap to a target vector
    /// (typically VCG utilities), so bidders far below their target gain
    /// faster. Weights are the gaps quantized to 1..=8 relative to the
    /// largest gap, which keeps them invariant under scaling all values.
    TowardTarget(UtilityVector),
}

const DIRECTION_SCALE: u64 = 8;

/// One round of the run, as it lands in the trace.
#[derive(Clone, Debug, Serialize)]
pub struct WaterfillIteration {
    pub t: u32,
    /// Bidders still rising when the round began.
    pub active: Vec<BidderId>,
    /// Winner set observed at this round's frontier probe.
    pub winners: Vec<BidderId>,
    /// Utilities before and after this round's ray search.
    pub before: UtilityVector,
    pub after: UtilityVector,
    /// Oracle calls made so far, including this round's.
    pub oracle_calls: u64,
}

/// The result of a water-filling run.
#[derive(Clone, Debug)]
pub struct WaterfillRun {
    pub utilities: UtilityVector,
    pub iterations: Vec<WaterfillIteration>,
    /// Extra single-bidder rounds run after the joint rounds, only needed
    /// when epsilon is smaller than one joint step's total mass. Empty at
    /// everyday epsilons.
    pub polish: Vec<WaterfillIteration>,
    pub oracle_calls: u64,
    /// The bound the run is held to: `2n` plus, per search (polish rounds
    /// included), the ceiling of `log2(total welfare * active bidders /
    /// epsilon)`, at least 1.
    pub call_budget: u64,
}

impl WaterfillRun {
    /// Writes the run as JSON Lines, one iteration per line.
    pub fn write_trace<W: Write>(&self, mut out: W) -> Result<()> {
        for it in self.iterations.iter().chain(&self.polish) {
            serde_json::to_writer(&mut out, it)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Raises utilities from zero until no active bidder can rise further, and
/// returns the resulting core point with its trace.
///
/// `epsilon` (at least one micro) bounds how far below the core boundary a
/// search may stop: no bidder's final utility can be raised by more than
/// `epsilon` at any core point that dominates the returned one. Joint
/// searches deliver that bound on their own when `epsilon` covers one whole
/// step's mass; below that, follow-up single-bidder rounds hand out the
/// leftover surplus (see `WaterfillRun::polish`).
pub fn water_fill<O: WinnerOracle + ?Sized>(
    oracle: &O,
    policy: &DirectionPolicy,
    epsilon: Money,
) -> Result<WaterfillRun> {
    if epsilon.is_zero() {
        return Err(Error::input("epsilon must be at least one micro"));
    }
    let ids = oracle.bidder_ids().to_vec();
    if ids.is_empty() {
        return Ok(WaterfillRun {
            utilities: UtilityVector::zero([]),
            iterations: Vec::new(),
            polish: Vec::new(),
            oracle_calls: 0,
            call_budget: 0,
        });
    }
    let counting = CountingOracle::new(oracle);
    let total = counting.total_welfare();
    let mut utilities = UtilityVector::zero(ids.iter().copied());
    let mut active: BTreeSet<BidderId> = ids.iter().copied().collect();
    let mut budget = 2 * ids.len() as u64;
    let mut iterations = Vec::new();

    let mut probe = counting.solve(&utilities)?;
    let mut t = 0u32;
    // Bidders pinned by a probe whose search bracket was wider than
    // epsilon, so the pin alone does not certify them.
    let mut loose: BTreeSet<BidderId> = BTreeSet::new();
    // Bracket mass of the search that produced the probe in hand. The
    // opening probe sits at the origin, which pins exactly.
    let mut pending_gap: u128 = 0;
    loop {
        let entered: Vec<BidderId> = active.iter().copied().collect();
        let winners: Vec<BidderId> = probe.winner_set.iter().copied().collect();
        let survived: BTreeSet<BidderId> =
            active.intersection(&probe.winner_set).copied().collect();
        if pending_gap > epsilon.micros() as u128 {
            loose.extend(active.difference(&survived));
        }
        active = survived;
        if active.is_empty() {
            iterations.push(WaterfillIteration {
                t,
                active: entered,
                winners,
                before: utilities.clone(),
                after: utilities.clone(),
                oracle_calls: counting.calls(),
            });
            break;
        }

        let weights = direction_weights(policy, &active, &utilities);
        let before = utilities.clone();
        let search = core_search(&counting, &utilities, &weights, epsilon, total)?;
        utilities = offset_point(&utilities, &weights, search.step);
        budget += u64::from(
            ceil_log2_ratio(
                total.micros() as u128 * active.len() as u128,
                epsilon.micros() as u128,
            )
            .max(1),
        );
        iterations.push(WaterfillIteration {
            t,
            active: entered,
            winners,
            before,
            after: utilities.clone(),
            oracle_calls: counting.calls(),
        });
        probe = search.probe;
        pending_gap = search.l1_gap;
        t += 1;
    }

    // Whole steps move every rising bidder at once, so when epsilon is
    // smaller than one step's mass, a search can stop with leftover surplus
    // that no joint move fits into but a single bidder could still take.
    // Re-search those bidders one at a time; unit weight makes each search
    // exact to the micro.
    let mut polish = Vec::new();
    for id in loose {
        let room = total.micros() as u128 - utilities.total_micros();
        if room == 0 {
            break;
        }
        let weights = vec![(id, 1)];
        let before = utilities.clone();
        let search = core_search(&counting, &utilities, &weights, epsilon, total)?;
        utilities = offset_point(&utilities, &weights, search.step);
        budget += u64::from(
            ceil_log2_ratio(total.micros() as u128, epsilon.micros() as u128).max(1),
        );
        polish.push(WaterfillIteration {
            t,
            active: vec![id],
            winners: search.probe.winner_set.iter().copied().collect(),
            before,
            after: utilities.clone(),
            oracle_calls: counting.calls(),
        });
        t += 1;
    }

    let oracle_calls = counting.calls();
    if oracle_calls > budget {
        return Err(Error::invariant(format!(
            "run used {oracle_calls} oracle calls against a budget of {budget}"
        )));
    }
    Ok(WaterfillRun { utilities, iterations, polish, oracle_calls, call_budget: budget })
}

/// VCG followed by water-filling toward the VCG utilities.
#[derive(Clone, Debug)]
pub struct VcgPursuitRun {
    pub target: VcgOutcome,
    pub run: WaterfillRun,
}

/// Prices at a core point that chases VCG utilities: first computes them
/// (`n + 1` oracle calls, not counted in `run.oracle_calls`), then
/// water-fills toward them.
pub fn vcg_pursuit<O: WinnerOracle + ?Sized>(oracle: &O, epsilon: Money) -> Result<VcgPursuitRun> {
    let target = vcg(oracle)?;
    let run = water_fill(oracle, &DirectionPolicy::TowardTarget(target.utilities.clone()), epsilon)?;
    Ok(VcgPursuitRun { target, run })
}

/// Tests core membership with a single oracle call. The utility vector must
/// cover every bidder.
pub fn is_in_core<O: WinnerOracle + ?Sized>(oracle: &O, utilities: &UtilityVector) -> Result<bool> {
    let res = oracle.solve(utilities)?;
    Ok(in_core(oracle.total_welfare(), utilities, &res))
}

/// An allocation priced from a core utility vector.
#[derive(Clone, Debug)]
pub struct PricedAllocation {
    pub allocation: Allocation,
    pub payments: BTreeMap<BidderId, Money>,
    pub welfare: Money,
    pub revenue: Money,
}

/// Turns a core utility vector into the outcome it prices: the efficient
/// allocation with each winner paying its declared value minus its utility.
/// Two oracle calls. Fails with a contract error if the point is not in the
/// core (in any core point, bidders outside the efficient allocation have
/// zero utility, so their payment is zero).
pub fn settle_at<O: WinnerOracle + ?Sized>(
    oracle: &O,
    utilities: &UtilityVector,
) -> Result<PricedAllocation> {
    let ids = oracle.bidder_ids();
    let zeros = UtilityVector::zero(ids.iter().copied());
    let efficient = oracle.solve(&zeros)?;
    let at = oracle.solve(utilities)?;
    if !in_core(oracle.total_welfare(), utilities, &at) {
        return Err(Error::contract("utilities are not in the core"));
    }
    for &id in ids {
        if !efficient.winner_set.contains(&id) && !utilities.get_or_zero(id).is_zero() {
            return Err(Error::contract(format!(
                "non-winning bidder {id} has positive utility"
            )));
        }
    }
    let mut payments = BTreeMap::new();
    let mut revenue = Money::ZERO;
    for (id, bundle) in efficient.witness.iter() {
        let pay = oracle
            .declared_value(id, bundle)
            .checked_sub(utilities.get_or_zero(id))
            .ok_or_else(|| {
                Error::contract(format!("bidder {id} utility exceeds its declared value"))
            })?;
        payments.insert(id, pay);
        revenue += pay;
    }
    Ok(PricedAllocation { allocation: efficient.witness, payments, welfare: efficient.max_welfare, revenue })
}

fn in_core(total: Money, point: &UtilityVector, at_point: &OracleResult) -> bool {
    total.micros() as u128 >= point.total_micros() + at_point.max_welfare.micros() as u128
}

fn direction_weights(
    policy: &DirectionPolicy,
    active: &BTreeSet<BidderId>,
    utilities: &UtilityVector,
) -> Vec<(BidderId, u64)> {
    let uniform = || active.iter().map(|&id| (id, 1)).collect();
    match policy {
        DirectionPolicy::Uniform => uniform(),
        DirectionPolicy::TowardTarget(target) => {
            let gaps: Vec<(BidderId, u64)> = active
                .iter()
                .map(|&id| {
                    let gap = target
                        .get_or_zero(id)
                        .saturating_sub(utilities.get_or_zero(id))
                        .micros();
                    (id, gap)
                })
                .collect();
            let top = gaps.iter().map(|&(_, g)| g).max().unwrap_or(0);
            if top == 0 {
                return uniform();
            }
            gaps.into_iter()
                .map(|(id, gap)| {
                    let w = (gap as u128 * DIRECTION_SCALE as u128 / top as u128) as u64;
                    (id, w.max(1))
                })
                .collect()
        }
    }
}

fn offset_point(base: &UtilityVector, weights: &[(BidderId, u64)], step: u128) -> UtilityVector {
    let mut point = base.clone();
    if step == 0 {
        return point;
    }
    for &(id, w) in weights {
        let gain = u64::try_from(step * w as u128)
            .expect("steps stay under twice the total welfare, which fits a Money");
        point.add_to(id, Money::from_micros(gain));
    }
    point
}

struct RaySearch {
    step: u128,
    /// The oracle's answer just outside the core, reused as the next
    /// round's frontier probe.
    probe: OracleResult,
    /// Total mass between the accepted step and the rejected one, in
    /// micros: an upper bound on how far any bidder the probe pins could
    /// still be lifted at a dominating core point.
    l1_gap: u128,
}

/// Finds the largest feasible whole-step move from `base` along `weights`,
/// stopping once the unexplored gap times the total weight is within
/// `epsilon` or the gap closes to one step.
fn core_search<O: WinnerOracle + ?Sized>(
    oracle: &CountingOracle<'_, O>,
    base: &UtilityVector,
    weights: &[(BidderId, u64)],
    epsilon: Money,
    total: Money,
) -> Result<RaySearch> {
    let d: u128 = weights.iter().map(|&(_, w)| w as u128).sum();
    let room = (total.micros() as u128)
        .checked_sub(base.total_micros())
        .expect("the current point is in the core, so its mass is at most the total welfare");
    debug_assert!(room >= 1, "searches only start while the seller still has surplus");

    // Smallest power of two whose move strictly exceeds the remaining
    // surplus: infeasible by the empty coalition's constraint alone, no
    // oracle call needed to know it.
    let mut hi: u128 = 1;
    while hi * d < room {
        hi <<= 1;
    }
    if hi * d == room {
        hi <<= 1;
    }
    let mut lo: u128 = 0;
    let mut outside: Option<OracleResult> = None;
    let eps = epsilon.micros() as u128;
    while hi - lo > 1 && (hi - lo) * d > eps {
        let mid = lo + (hi - lo) / 2;
        let at = offset_point(base, weights, mid);
        let res = oracle.solve(&at)?;
        if in_core(total, &at, &res) {
            lo = mid;
        } else {
            hi = mid;
            outside = Some(res);
        }
    }
    let probe = match outside {
        Some(res) => res,
        // The step landed exactly on the seller's remaining surplus, so
        // every value truncates to zero beyond it: the answer out there is
        // the empty outcome, no call needed.
        None if lo * d == room => OracleResult::empty(),
        // Every midpoint stayed inside, so the boundary sits between lo and
        // the arithmetic endpoint, which still needs its winner set.
        None => oracle.solve(&offset_point(base, weights, hi))?,
    };
    Ok(RaySearch { step: lo, probe, l1_gap: (hi - lo) * d })
}

/// Ceiling of log2(num / den) for positive integers, 0 when num <= den.
fn ceil_log2_ratio(num: u128, den: u128) -> u32 {
    let mut k = 0;
    let mut cur = den;
    while cur < num {
        cur = cur.checked_mul(2).expect("welfare ratios fit in 128 bits");
        k += 1;
    }
    k
}
