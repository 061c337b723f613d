//! Reference implementations shared by the integration suites. These
//! enumerate assignments directly, with no pruning and no code shared with
//! the production solvers, so agreement is meaningful.

use corefill::{BidderId, Money, SlateInstance, UtilityVector, Valuation, ValuationProfile};

/// Maximum truncated welfare of a bundle auction by trying every
/// assignment of at most one XOR entry per bidder to disjoint items.
pub fn exhaustive_truncated_xor(profile: &ValuationProfile, truncation: &UtilityVector) -> Money {
    fn go(
        bidders: &[(BidderId, Valuation)],
        truncation: &UtilityVector,
        used: u32,
        gained: u64,
        best: &mut u64,
    ) {
        let Some(((id, valuation), rest)) = bidders.split_first() else {
            *best = (*best).max(gained);
            return;
        };
        go(rest, truncation, used, gained, best);
        let cut = truncation.get_or_zero(*id).micros();
        for (bundle, value) in valuation.entries() {
            let mask: u32 = bundle.items().iter().fold(0, |m, &i| m | (1 << i));
            if mask & used != 0 {
                continue;
            }
            let gain = value.micros().saturating_sub(cut);
            if gain > 0 {
                go(rest, truncation, used | mask, gained + gain, best);
            }
        }
    }

    let mut best = 0;
    go(profile.bidders(), truncation, 0, 0, &mut best);
    Money::from_micros(best)
}

/// Maximum truncated welfare of a slate auction by trying every subset of
/// ads against the one-per-advertiser, slot, and line constraints.
pub fn exhaustive_truncated_slate(slate: &SlateInstance, truncation: &UtilityVector) -> Money {
    let ads = slate.ads();
    assert!(ads.len() <= 20, "exhaustive slate enumeration is for small instances");
    let mut best = 0u64;
    'subsets: for choice in 0u32..(1 << ads.len()) {
        let mut advertisers = Vec::new();
        let mut slots = 0u32;
        let mut lines = 0u64;
        let mut welfare = 0u64;
        for (i, ad) in ads.iter().enumerate() {
            if choice >> i & 1 == 0 {
                continue;
            }
            if advertisers.contains(&ad.advertiser()) {
                continue 'subsets;
            }
            advertisers.push(ad.advertiser());
            slots += 1;
            lines += ad.lines() as u64;
            let cut = truncation.get_or_zero(ad.advertiser()).micros();
            welfare += ad.score().micros().saturating_sub(cut);
        }
        if slots <= slate.slots() && lines <= slate.line_budget() as u64 {
            best = best.max(welfare);
        }
    }
    Money::from_micros(best)
}
