//! Core-outcome pricing for combinatorial auctions.
//!
//! The centrepiece is a water-filling search that starts every winner at
//! zero utility and raises utilities along a chosen direction until the
//! point is about to leave the core, shrinking the set of raised bidders
//! each round. It needs nothing from the auction beyond a winner
//! determination oracle, so the same engine prices XOR bundle auctions and
//! decorated-slate auctions alike. VCG and generalized second-price
//! mechanisms are included as baselines, together with brute-force checkers
//! that certify core membership and bidder optimality on small instances.
//!
//! All money is carried in integer micro-units ([`Money`]); fractions only
//! appear in reporting ([`Frac`]), never inside the algorithms.

mod allocation;
mod baselines;
mod bundle;
mod error;
mod exact;
mod generator;
mod instance;
mod money;
mod oracle;
mod outcome;
mod par;
mod pricing;
mod report;
mod simplex;
mod slate;
mod utility;
mod valuation;
mod verify;

pub use allocation::{welfare, Allocation};
pub use baselines::{gsp_greedy, gsp_optimal, vcg, GspPlacement, GspSlate, VcgOutcome};
pub use bundle::{BidderId, Bundle, ItemId};
pub use error::{Error, Result};
pub use exact::{ExactOracle, MAX_EXACT_BIDDERS, MAX_EXACT_ITEMS};
pub use generator::{GeneratorConfig, SlateFamily, Span, XorFamily};
pub use instance::{Instance, InstanceOracle};
pub use money::{format_frac, frac, frac_from_money, parse_frac, Frac, Money};
pub use oracle::{CountingOracle, OracleResult, WinnerOracle};
pub use outcome::{AuctionOutcome, RunMeta};
pub use pricing::{
    is_in_core, settle_at, vcg_pursuit, water_fill, DirectionPolicy, PricedAllocation,
    VcgPursuitRun, WaterfillIteration, WaterfillRun,
};
pub use report::{
    compare, fairness_ratio, literal_revenue, run_mechanism, ComparisonReport, Epsilon,
    Mechanism, MechanismRun, MechanismSummary, PaidWinner, ReportRow, RunFailure,
};
pub use slate::{Ad, SlateInstance, SlateOracle};
pub use utility::UtilityVector;
pub use valuation::{Valuation, ValuationProfile};
pub use verify::{
    CorePolytope, CoreViolation, EpsOptimality, MAX_POLYTOPE_BIDDERS, MAX_POLYTOPE_ITEMS,
};
