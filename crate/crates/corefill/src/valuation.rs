//! XOR valuations and bidder profiles.
//!
//! A bidder's declared valuation is a list of (bundle, value) entries read
//! under XOR semantics: the bidder wants at most one entry, and the value of
//! receiving a set of items is the best entry whose bundle fits inside it.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::bundle::{BidderId, Bundle, ItemId};
use crate::error::{Error, Result};
use crate::money::Money;
use crate::utility::UtilityVector;

/// One declared valuation in the XOR language.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Valuation {
    entries: Vec<(Bundle, Money)>,
}

impl Valuation {
    /// Entries must have non-empty bundles, strictly positive values, and
    /// distinct bundles. An empty entry list is a valid valuation that wants
    /// nothing.
    pub fn from_entries(entries: Vec<(Bundle, Money)>) -> Result<Valuation> {
        let mut seen = BTreeSet::new();
        for (bundle, value) in &entries {
            if bundle.is_empty() {
                return Err(Error::input("valuation entry on the empty bundle"));
            }
            if value.is_zero() {
                return Err(Error::input(format!("zero-value entry on bundle {bundle}")));
            }
            if !seen.insert(bundle.clone()) {
                return Err(Error::input(format!("duplicate entry bundle {bundle}")));
            }
        }
        Ok(Valuation { entries })
    }

    /// Single-entry convenience constructor.
    pub fn single(bundle: Bundle, value: Money) -> Valuation {
        Valuation::from_entries(vec![(bundle, value)]).expect("single entry must be valid")
    }

    pub fn entries(&self) -> &[(Bundle, Money)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Value of receiving `bundle`: the best entry contained in it, or zero
    /// when no entry fits. Monotone in the bundle by construction.
    pub fn value_of(&self, bundle: &Bundle) -> Money {
        self.entries
            .iter()
            .filter(|(b, _)| b.is_subset_of(bundle))
            .map(|&(_, v)| v)
            .max()
            .unwrap_or(Money::ZERO)
    }

    /// Entry-wise truncation by `amount`: each value drops by `amount` and
    /// entries that would become worthless disappear.
    pub fn truncate(&self, amount: Money) -> Valuation {
        let entries = self
            .entries
            .iter()
            .filter(|(_, v)| *v > amount)
            .map(|(b, v)| (b.clone(), *v - amount))
            .collect();
        Valuation { entries }
    }

    fn max_item(&self) -> Option<ItemId> {
        self.entries.iter().filter_map(|(b, _)| b.max_item()).max()
    }
}

/// The bidders of one auction: an ordered list of (bidder id, valuation)
/// over a fixed universe of `item_count` items with ids `0..item_count`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValuationProfile {
    item_count: u32,
    bidders: Vec<(BidderId, Valuation)>,
}

impl ValuationProfile {
    /// Bidder ids must be distinct; any small integers will do (they are
    /// names, not indices). Every entry bundle must stay inside the item
    /// universe.
    pub fn new(item_count: u32, bidders: Vec<(BidderId, Valuation)>) -> Result<ValuationProfile> {
        let mut seen = BTreeSet::new();
        for (id, valuation) in &bidders {
            if !seen.insert(*id) {
                return Err(Error::input(format!("duplicate bidder id {id}")));
            }
            if let Some(max_item) = valuation.max_item() {
                if max_item >= item_count {
                    return Err(Error::input(format!(
                        "bidder {id} bids on item {max_item} outside universe of {item_count}"
                    )));
                }
            }
        }
        Ok(ValuationProfile { item_count, bidders })
    }

    pub fn item_count(&self) -> u32 {
        self.item_count
    }

    pub fn bidder_count(&self) -> usize {
        self.bidders.len()
    }

    pub fn bidders(&self) -> &[(BidderId, Valuation)] {
        &self.bidders
    }

    pub fn bidder_ids(&self) -> Vec<BidderId> {
        self.bidders.iter().map(|&(id, _)| id).collect()
    }

    pub fn valuation(&self, id: BidderId) -> Option<&Valuation> {
        self.bidders.iter().find(|(b, _)| *b == id).map(|(_, v)| v)
    }

    /// Utility-truncated profile: bidder `i`'s entries each lose
    /// `truncation[i]`, dropping entries that hit zero. This is the bid
    /// transformation every oracle query goes through.
    pub fn truncate(&self, truncation: &UtilityVector) -> Result<ValuationProfile> {
        let mut bidders = Vec::with_capacity(self.bidders.len());
        for (id, valuation) in &self.bidders {
            let amount = truncation
                .get(*id)
                .ok_or_else(|| Error::input(format!("truncation missing bidder {id}")))?;
            bidders.push((*id, valuation.truncate(amount)));
        }
        Ok(ValuationProfile { item_count: self.item_count, bidders })
    }
}
