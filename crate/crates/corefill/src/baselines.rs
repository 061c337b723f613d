//! Baseline mechanisms: VCG for any oracle, generalized second price for
//! slates.
//!
//! VCG charges each winner the externality it imposes, computed from one
//! unrestricted solve plus one solve per bidder, so it costs exactly n + 1
//! oracle calls. The GSP variants price a slate positionally: each ad pays
//! the score of the next ad below it, and the last ad pays the score of the
//! best displaced ad that could take its place.

use std::collections::{BTreeMap, BTreeSet};

use crate::allocation::Allocation;
use crate::bundle::{BidderId, Bundle};
use crate::error::{Error, Result};
use crate::money::{frac, Frac, Money};
use crate::oracle::WinnerOracle;
use crate::slate::{Ad, SlateInstance, SlateOracle};
use crate::utility::UtilityVector;

/// A VCG run: the efficient allocation, each bidder's utility
/// `w(N) - w(N without them)`, and the payments that realize it.
#[derive(Clone, Debug)]
pub struct VcgOutcome {
    pub allocation: Allocation,
    pub utilities: UtilityVector,
    pub payments: BTreeMap<BidderId, Money>,
    pub welfare: Money,
    pub revenue: Money,
}

/// Runs VCG against the oracle. Costs exactly `bidders + 1` oracle calls.
pub fn vcg<O: WinnerOracle + ?Sized>(oracle: &O) -> Result<VcgOutcome> {
    let ids = oracle.bidder_ids().to_vec();
    let zeros = UtilityVector::zero(ids.iter().copied());
    let efficient = oracle.solve(&zeros)?;
    let welfare = efficient.max_welfare;

    let mut utilities = UtilityVector::zero(ids.iter().copied());
    for &id in &ids {
        let others: BTreeSet<BidderId> = ids.iter().copied().filter(|&j| j != id).collect();
        let without = oracle.solve_restricted(&others, &zeros)?;
        let gain = welfare.checked_sub(without.max_welfare).ok_or_else(|| {
            Error::invariant(format!("dropping bidder {id} increased the maximum welfare"))
        })?;
        utilities.set(id, gain);
    }

    let mut payments = BTreeMap::new();
    let mut revenue = Money::ZERO;
    for (id, bundle) in efficient.witness.iter() {
        let value = oracle.declared_value(id, bundle);
        let pay = value.checked_sub(utilities.get_or_zero(id)).ok_or_else(|| {
            Error::invariant(format!("bidder {id} would pay more than its declared value"))
        })?;
        payments.insert(id, pay);
        revenue += pay;
    }
    Ok(VcgOutcome { allocation: efficient.witness, utilities, payments, welfare, revenue })
}

/// One priced position in a GSP slate, in display order (score descending).
#[derive(Clone, Debug)]
pub struct GspPlacement {
    pub ad_index: usize,
    pub advertiser: BidderId,
    pub score: Money,
    /// Charged per expected impression: the score of the ad below, or of
    /// the best displaced ad for the last position.
    pub price: Money,
    /// Per-click charge in micro-units, capped at the bid: `min(price /
    /// pclick, bid)`. Fractional because the division rarely lands on the
    /// micro grid.
    pub cpc_micros: Frac,
    /// `pclick * cpc = min(price, score)`, always exact in micros.
    pub expected_payment: Money,
}

/// A GSP slate with its positional prices.
#[derive(Clone, Debug)]
pub struct GspSlate {
    pub placements: Vec<GspPlacement>,
    pub allocation: Allocation,
    pub payments: BTreeMap<BidderId, Money>,
    pub welfare: Money,
    pub revenue: Money,
}

/// GSP pricing on top of the welfare-maximizing slate. One oracle call.
pub fn gsp_optimal(oracle: &SlateOracle) -> Result<GspSlate> {
    let zeros = UtilityVector::zero(oracle.bidder_ids().iter().copied());
    let res = oracle.solve(&zeros)?;
    let chosen: Vec<usize> = res
        .witness
        .iter()
        .flat_map(|(_, b)| b.items().iter().map(|&i| i as usize))
        .collect();
    price_slate(oracle.instance(), chosen)
}

/// GSP over the slate built greedily by descending score: take each ad if
/// its advertiser is new, a slot is open, and its lines fit. No oracle
/// calls; on some instances the slate is far from welfare-optimal.
pub fn gsp_greedy(oracle: &SlateOracle) -> Result<GspSlate> {
    let instance = oracle.instance();
    let mut order: Vec<usize> = (0..instance.ads().len()).collect();
    order.sort_by(|&a, &b| {
        let (sa, sb) = (instance.ads()[a].score(), instance.ads()[b].score());
        sb.cmp(&sa).then(a.cmp(&b))
    });

    let mut chosen = Vec::new();
    let mut advertisers = BTreeSet::new();
    let mut lines_left = instance.line_budget();
    for i in order {
        let ad = &instance.ads()[i];
        if ad.score().is_zero() {
            break;
        }
        if chosen.len() as u32 == instance.slots()
            || advertisers.contains(&ad.advertiser())
            || ad.lines() > lines_left
        {
            continue;
        }
        chosen.push(i);
        advertisers.insert(ad.advertiser());
        lines_left -= ad.lines();
    }
    price_slate(instance, chosen)
}

fn by_score_desc(ads: &[Ad]) -> impl Fn(&usize, &usize) -> std::cmp::Ordering + '_ {
    |&a, &b| ads[b].score().cmp(&ads[a].score()).then(a.cmp(&b))
}

fn price_slate(instance: &SlateInstance, mut chosen: Vec<usize>) -> Result<GspSlate> {
    let ads = instance.ads();
    chosen.sort_by(by_score_desc(ads));

    let in_slate: BTreeSet<usize> = chosen.iter().copied().collect();
    let shown: BTreeSet<BidderId> = chosen.iter().map(|&i| ads[i].advertiser()).collect();

    let mut placements = Vec::with_capacity(chosen.len());
    for (pos, &i) in chosen.iter().enumerate() {
        let ad = &ads[i];
        let price = match chosen.get(pos + 1) {
            Some(&below) => ads[below].score(),
            None => {
                // The last position charges for the ad it displaces: the
                // best ad of an advertiser not shown at all that would fit
                // in this ad's place.
                let room =
                    instance.line_budget() - chosen[..pos].iter().map(|&j| ads[j].lines()).sum::<u32>();
                let runner_up = (0..ads.len())
                    .filter(|j| !in_slate.contains(j))
                    .filter(|&j| !shown.contains(&ads[j].advertiser()))
                    .filter(|&j| ads[j].lines() <= room)
                    .min_by(|&a, &b| by_score_desc(ads)(&a, &b));
                runner_up.map(|j| ads[j].score()).unwrap_or(Money::ZERO)
            }
        };
        let (num, den) = ad.pclick_parts();
        let uncapped = frac(price.micros() as i128 * den as i128, num as i128);
        let cpc_micros = uncapped.min(frac(ad.bid().micros() as i128, 1));
        placements.push(GspPlacement {
            ad_index: i,
            advertiser: ad.advertiser(),
            score: ad.score(),
            price,
            cpc_micros,
            expected_payment: price.min(ad.score()),
        });
    }

    let mut assignment = BTreeMap::new();
    let mut payments = BTreeMap::new();
    let mut welfare = Money::ZERO;
    let mut revenue = Money::ZERO;
    for p in &placements {
        assignment.insert(p.advertiser, Bundle::from_items(&[p.ad_index as u32]));
        payments.insert(p.advertiser, p.expected_payment);
        welfare += p.score;
        revenue += p.expected_payment;
    }
    let allocation = Allocation::new(assignment)
        .map_err(|e| Error::invariant(format!("slate pricing produced an invalid slate: {e}")))?;
    Ok(GspSlate { placements, allocation, payments, welfare, revenue })
}
