use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bundle::{BidderId, Bundle};
use crate::error::{Error, Result};
use crate::money::Money;
use crate::valuation::ValuationProfile;

/// An assignment of pairwise-disjoint bundles to a subset of the bidders.
/// Bidders that receive nothing are simply absent.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Allocation(BTreeMap<BidderId, Bundle>);

impl Allocation {
    pub fn empty() -> Allocation {
        Allocation(BTreeMap::new())
    }

    /// Rejects overlapping bundles. Empty bundles are rejected too: an
    /// allocation only records bidders that actually receive something.
    pub fn new(assignments: BTreeMap<BidderId, Bundle>) -> Result<Allocation> {
        let entries: Vec<_> = assignments.iter().collect();
        for (k, (id, bundle)) in entries.iter().enumerate() {
            if bundle.is_empty() {
                return Err(Error::input(format!("bidder {id} assigned an empty bundle")));
            }
            for (other_id, other) in &entries[k + 1..] {
                if !bundle.is_disjoint_from(other) {
                    return Err(Error::input(format!(
                        "bidders {id} and {other_id} assigned overlapping bundles"
                    )));
                }
            }
        }
        Ok(Allocation(assignments))
    }

    pub fn get(&self, id: BidderId) -> Option<&Bundle> {
        self.0.get(&id)
    }

    pub fn winners(&self) -> impl Iterator<Item = BidderId> + '_ {
        self.0.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (BidderId, &Bundle)> + '_ {
        self.0.iter().map(|(&id, b)| (id, b))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Total declared value of `allocation` under `profile`. The allocation must
/// be feasible for the profile: known bidders, in-universe items, disjoint
/// bundles (disjointness is guaranteed by construction of [`Allocation`]).
pub fn welfare(profile: &ValuationProfile, allocation: &Allocation) -> Result<Money> {
    let mut total = Money::ZERO;
    for (id, bundle) in allocation.iter() {
        let valuation = profile
            .valuation(id)
            .ok_or_else(|| Error::input(format!("allocation assigns unknown bidder {id}")))?;
        if let Some(max_item) = bundle.max_item() {
            if max_item >= profile.item_count() {
                return Err(Error::input(format!(
                    "allocation assigns out-of-universe item {max_item}"
                )));
            }
        }
        total += valuation.value_of(bundle);
    }
    Ok(total)
}
