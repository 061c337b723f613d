use std::fmt;

use serde::{Deserialize, Serialize};

/// Identifies a bidder (or, in slate auctions, an advertiser).
pub type BidderId = u32;

/// Identifies an item. Item ids are small integers, dense from zero in a
/// well-formed profile.
pub type ItemId = u32;

/// A set of item ids. Stored sorted and deduplicated, so equality and
/// ordering behave as set equality and lexicographic set order.
///
/// Item auctions keep bundles tiny (the exhaustive solver guards at 12
/// items), so the plain sorted-vec representation is both simple and fast
/// enough; the solver converts to bitmasks internally where it matters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bundle(Vec<ItemId>);

impl Bundle {
    pub fn empty() -> Bundle {
        Bundle(Vec::new())
    }

    pub fn from_items(items: &[ItemId]) -> Bundle {
        let mut v = items.to_vec();
        v.sort_unstable();
        v.dedup();
        Bundle(v)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn items(&self) -> &[ItemId] {
        &self.0
    }

    pub fn contains(&self, item: ItemId) -> bool {
        self.0.binary_search(&item).is_ok()
    }

    pub fn is_subset_of(&self, other: &Bundle) -> bool {
        self.0.iter().all(|i| other.contains(*i))
    }

    pub fn is_disjoint_from(&self, other: &Bundle) -> bool {
        self.0.iter().all(|i| !other.contains(*i))
    }

    pub fn max_item(&self) -> Option<ItemId> {
        self.0.last().copied()
    }
}

impl fmt::Display for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, item) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{item}")?;
        }
        write!(f, "}}")
    }
}
