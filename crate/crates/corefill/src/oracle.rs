//! The winner-determination oracle interface.
//!
//! Every pricing algorithm in this crate interacts with an auction only
//! through this interface: hand the oracle a per-bidder truncation, get back
//! the maximum attainable truncated welfare, the winners, and a witness
//! allocation. The search algorithms count these queries; everything they
//! guarantee about run time is stated in oracle calls.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::allocation::Allocation;
use crate::bundle::{BidderId, Bundle};
use crate::error::Result;
use crate::money::Money;
use crate::utility::UtilityVector;

/// The answer to one winner-determination query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    /// Maximum welfare attainable under the queried truncation.
    pub max_welfare: Money,
    /// Bidders allocated in the witness. Empty exactly when `max_welfare`
    /// is zero: a bidder whose truncated value would be zero is never
    /// allocated.
    pub winner_set: BTreeSet<BidderId>,
    /// One welfare-maximizing allocation, tie-broken deterministically by
    /// the implementation.
    pub witness: Allocation,
}

impl OracleResult {
    pub(crate) fn from_witness(max_welfare: Money, witness: Allocation) -> OracleResult {
        let winner_set = witness.winners().collect();
        OracleResult { max_welfare, winner_set, witness }
    }

    pub(crate) fn empty() -> OracleResult {
        OracleResult {
            max_welfare: Money::ZERO,
            winner_set: BTreeSet::new(),
            witness: Allocation::empty(),
        }
    }
}

/// A deterministic welfare-maximization oracle over a fixed auction.
///
/// Implementations are immutable after construction and answer queries
/// independently, so one oracle may serve concurrent callers. Construction
/// solves the auction once at zero truncation; that cached answer backs
/// [`WinnerOracle::total_welfare`] and is not an oracle call in the counting
/// sense.
pub trait WinnerOracle: Sync {
    /// The bidders of the auction, ascending, distinct.
    fn bidder_ids(&self) -> &[BidderId];

    /// w(N): welfare of the efficient allocation at zero truncation.
    /// Cached at construction.
    fn total_welfare(&self) -> Money;

    /// Maximum truncated welfare over allocations restricted to `allowed`
    /// bidders. `truncation` must cover every allowed bidder. Bidders
    /// outside `allowed` are treated as absent, which realizes an infinite
    /// truncation.
    fn solve_restricted(
        &self,
        allowed: &BTreeSet<BidderId>,
        truncation: &UtilityVector,
    ) -> Result<OracleResult>;

    /// Maximum truncated welfare over all bidders.
    fn solve(&self, truncation: &UtilityVector) -> Result<OracleResult> {
        let all: BTreeSet<BidderId> = self.bidder_ids().iter().copied().collect();
        self.solve_restricted(&all, truncation)
    }

    /// The untruncated declared value of `bundle` to `bidder`; used to turn
    /// utilities into payments without re-querying.
    fn declared_value(&self, bidder: BidderId, bundle: &Bundle) -> Money;
}

/// Wraps an oracle and counts queries. Each algorithm creates its own
/// counter so reported call counts mean "calls made by this run".
pub struct CountingOracle<'a, O: WinnerOracle + ?Sized> {
    inner: &'a O,
    calls: AtomicU64,
}

impl<'a, O: WinnerOracle + ?Sized> CountingOracle<'a, O> {
    pub fn new(inner: &'a O) -> CountingOracle<'a, O> {
        CountingOracle { inner, calls: AtomicU64::new(0) }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

impl<O: WinnerOracle + ?Sized> WinnerOracle for CountingOracle<'_, O> {
    fn bidder_ids(&self) -> &[BidderId] {
        self.inner.bidder_ids()
    }

    fn total_welfare(&self) -> Money {
        self.inner.total_welfare()
    }

    fn solve_restricted(
        &self,
        allowed: &BTreeSet<BidderId>,
        truncation: &UtilityVector,
    ) -> Result<OracleResult> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.solve_restricted(allowed, truncation)
    }

    fn declared_value(&self, bidder: BidderId, bundle: &Bundle) -> Money {
        self.inner.declared_value(bidder, bundle)
    }
}
