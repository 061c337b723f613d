use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bundle::BidderId;
use crate::money::Money;

/// Per-bidder utilities (equivalently, truncation amounts): a total map from
/// bidder id to a non-negative money amount. The seller's utility is implied
/// rather than stored: it is the welfare of the efficient allocation minus
/// the sum of these entries.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UtilityVector(BTreeMap<BidderId, Money>);

impl UtilityVector {
    pub fn zero<I: IntoIterator<Item = BidderId>>(ids: I) -> UtilityVector {
        UtilityVector(ids.into_iter().map(|id| (id, Money::ZERO)).collect())
    }

    pub fn from_pairs<I: IntoIterator<Item = (BidderId, Money)>>(pairs: I) -> UtilityVector {
        UtilityVector(pairs.into_iter().collect())
    }

    pub fn get(&self, id: BidderId) -> Option<Money> {
        self.0.get(&id).copied()
    }

    /// Utility of `id`, treating absent bidders as zero.
    pub fn get_or_zero(&self, id: BidderId) -> Money {
        self.get(id).unwrap_or(Money::ZERO)
    }

    pub fn set(&mut self, id: BidderId, value: Money) {
        self.0.insert(id, value);
    }

    pub fn add_to(&mut self, id: BidderId, delta: Money) {
        let cur = self.get_or_zero(id);
        self.0.insert(id, cur + delta);
    }

    pub fn iter(&self) -> impl Iterator<Item = (BidderId, Money)> + '_ {
        self.0.iter().map(|(&id, &m)| (id, m))
    }

    pub fn ids(&self) -> impl Iterator<Item = BidderId> + '_ {
        self.0.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Exact sum of all entries, widened so it cannot overflow.
    pub fn total_micros(&self) -> u128 {
        self.0.values().map(|m| m.micros() as u128).sum()
    }

    pub fn total(&self) -> Money {
        Money::from_micros(u64::try_from(self.total_micros()).expect("utility total overflow"))
    }
}

impl FromIterator<(BidderId, Money)> for UtilityVector {
    fn from_iter<I: IntoIterator<Item = (BidderId, Money)>>(iter: I) -> UtilityVector {
        UtilityVector::from_pairs(iter)
    }
}
