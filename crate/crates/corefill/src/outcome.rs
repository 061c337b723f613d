use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::allocation::Allocation;
use crate::bundle::BidderId;
use crate::money::Money;

/// A fully priced auction: who gets what, who pays what, and how the run
/// went. Losers carry no payment entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuctionOutcome {
    pub allocation: Allocation,
    pub payments: BTreeMap<BidderId, Money>,
    pub revenue: Money,
    pub meta: RunMeta,
}

impl AuctionOutcome {
    pub fn new(
        allocation: Allocation,
        payments: BTreeMap<BidderId, Money>,
        meta: RunMeta,
    ) -> AuctionOutcome {
        let revenue = payments.values().copied().sum();
        AuctionOutcome { allocation, payments, revenue, meta }
    }

    pub fn payment(&self, id: BidderId) -> Money {
        self.payments.get(&id).copied().unwrap_or(Money::ZERO)
    }
}

/// Bookkeeping attached to a run. `oracle_calls` counts every
/// winner-determination query the mechanism issued, including any spent on
/// precomputation (e.g. the VCG point that seeds a pursuit run);
/// `duration` is wall-clock and excluded from determinism comparisons.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMeta {
    pub mechanism: String,
    pub oracle_calls: u64,
    #[serde(with = "duration_micros")]
    pub duration: Duration,
}

impl RunMeta {
    pub fn new(mechanism: &str, oracle_calls: u64, duration: Duration) -> RunMeta {
        RunMeta { mechanism: mechanism.to_string(), oracle_calls, duration }
    }
}

mod duration_micros {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_micros() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_micros(u64::deserialize(d)?))
    }
}
