//! Auction instances as files.
//!
//! Two JSON shapes are accepted and told apart by their keys. A bundle
//! auction carries an item count and per-bidder bid lists:
//!
//! ```json
//! {"items": 2, "bidders": [{"id": 1, "bids": [{"bundle": [0], "value_micro": 60000000}]}]}
//! ```
//!
//! A slate auction carries the slot and line budgets plus a flat ad list,
//! grouped by advertiser:
//!
//! ```json
//! {"h": 2, "m": 3, "ads": [{"advertiser": 1, "decoration": 0, "lines": 2,
//!  "bid_micro": 10000000, "pclick_num": 1, "pclick_den": 1}]}
//! ```
//!
//! Reading validates through the same constructors the rest of the crate
//! uses, so a file that loads is a file every solver accepts.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bundle::{BidderId, Bundle};
use crate::error::{Error, Result};
use crate::exact::ExactOracle;
use crate::money::Money;
use crate::oracle::{OracleResult, WinnerOracle};
use crate::slate::{Ad, SlateInstance, SlateOracle};
use crate::utility::UtilityVector;
use crate::valuation::{Valuation, ValuationProfile};

/// One auction, in either supported bidding language.
#[derive(Clone, Debug)]
pub enum Instance {
    Xor(ValuationProfile),
    Slate(SlateInstance),
}

impl Instance {
    pub fn from_json(text: &str) -> Result<Instance> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let keys = value
            .as_object()
            .ok_or_else(|| Error::input("an instance file must hold a JSON object"))?;
        if keys.contains_key("items") {
            let raw: XorFile = serde_json::from_value(value)?;
            raw.try_into()
        } else if keys.contains_key("h") {
            let raw: SlateFile = serde_json::from_value(value)?;
            raw.try_into()
        } else {
            Err(Error::input(
                "instance object has neither an \"items\" key (bundle auction) \
                 nor an \"h\" key (slate auction)",
            ))
        }
    }

    pub fn to_json(&self) -> String {
        let text = match self {
            Instance::Xor(profile) => serde_json::to_string_pretty(&XorFile::from(profile)),
            Instance::Slate(slate) => serde_json::to_string_pretty(&SlateFile::from(slate)),
        };
        text.expect("instance serialization is infallible") + "\n"
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Instance> {
        Instance::from_json(&fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        Ok(fs::write(path, self.to_json())?)
    }

    pub fn family(&self) -> &'static str {
        match self {
            Instance::Xor(_) => "xor",
            Instance::Slate(_) => "slate",
        }
    }

    pub fn bidder_ids(&self) -> Vec<BidderId> {
        match self {
            Instance::Xor(profile) => profile.bidder_ids(),
            Instance::Slate(slate) => slate.advertisers(),
        }
    }

    /// Builds the matching solver. The instance stays available for
    /// reporting through [`InstanceOracle`].
    pub fn build_oracle(&self) -> Result<InstanceOracle> {
        Ok(match self {
            Instance::Xor(profile) => InstanceOracle::Xor(ExactOracle::new(profile.clone())?),
            Instance::Slate(slate) => InstanceOracle::Slate(SlateOracle::new(slate.clone())?),
        })
    }
}

/// Either concrete solver, behind one type so callers can hold an oracle
/// for "whatever kind of instance this file was".
pub enum InstanceOracle {
    Xor(ExactOracle),
    Slate(SlateOracle),
}

impl WinnerOracle for InstanceOracle {
    fn bidder_ids(&self) -> &[BidderId] {
        match self {
            InstanceOracle::Xor(o) => o.bidder_ids(),
            InstanceOracle::Slate(o) => o.bidder_ids(),
        }
    }

    fn total_welfare(&self) -> Money {
        match self {
            InstanceOracle::Xor(o) => o.total_welfare(),
            InstanceOracle::Slate(o) => o.total_welfare(),
        }
    }

    fn solve_restricted(
        &self,
        allowed: &BTreeSet<BidderId>,
        truncation: &UtilityVector,
    ) -> Result<OracleResult> {
        match self {
            InstanceOracle::Xor(o) => o.solve_restricted(allowed, truncation),
            InstanceOracle::Slate(o) => o.solve_restricted(allowed, truncation),
        }
    }

    fn declared_value(&self, bidder: BidderId, bundle: &Bundle) -> Money {
        match self {
            InstanceOracle::Xor(o) => o.declared_value(bidder, bundle),
            InstanceOracle::Slate(o) => o.declared_value(bidder, bundle),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct XorFile {
    items: u32,
    bidders: Vec<XorBidder>,
}

#[derive(Serialize, Deserialize)]
struct XorBidder {
    id: BidderId,
    bids: Vec<XorBid>,
}

#[derive(Serialize, Deserialize)]
struct XorBid {
    bundle: Vec<u32>,
    value_micro: u64,
}

impl TryFrom<XorFile> for Instance {
    type Error = Error;

    fn try_from(raw: XorFile) -> Result<Instance> {
        let bidders = raw
            .bidders
            .into_iter()
            .map(|b| {
                let entries = b
                    .bids
                    .into_iter()
                    .map(|bid| (Bundle::from_items(&bid.bundle), Money::from_micros(bid.value_micro)))
                    .collect();
                Ok((b.id, Valuation::from_entries(entries)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Instance::Xor(ValuationProfile::new(raw.items, bidders)?))
    }
}

impl From<&ValuationProfile> for XorFile {
    fn from(profile: &ValuationProfile) -> XorFile {
        XorFile {
            items: profile.item_count(),
            bidders: profile
                .bidders()
                .iter()
                .map(|(id, valuation)| XorBidder {
                    id: *id,
                    bids: valuation
                        .entries()
                        .iter()
                        .map(|(bundle, value)| XorBid {
                            bundle: bundle.items().to_vec(),
                            value_micro: value.micros(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SlateFile {
    h: u32,
    m: u32,
    ads: Vec<SlateAd>,
}

#[derive(Serialize, Deserialize)]
struct SlateAd {
    advertiser: BidderId,
    decoration: u32,
    lines: u32,
    bid_micro: u64,
    pclick_num: u64,
    pclick_den: u64,
}

impl TryFrom<SlateFile> for Instance {
    type Error = Error;

    fn try_from(raw: SlateFile) -> Result<Instance> {
        let ads = raw
            .ads
            .into_iter()
            .map(|a| {
                Ad::new(
                    a.advertiser,
                    a.decoration,
                    a.lines,
                    Money::from_micros(a.bid_micro),
                    a.pclick_num,
                    a.pclick_den,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Instance::Slate(SlateInstance::new(raw.h, raw.m, ads)?))
    }
}

impl From<&SlateInstance> for SlateFile {
    fn from(slate: &SlateInstance) -> SlateFile {
        SlateFile {
            h: slate.slots(),
            m: slate.line_budget(),
            ads: slate
                .ads()
                .iter()
                .map(|ad| {
                    let (pclick_num, pclick_den) = ad.pclick_parts();
                    SlateAd {
                        advertiser: ad.advertiser(),
                        decoration: ad.decoration(),
                        lines: ad.lines(),
                        bid_micro: ad.bid().micros(),
                        pclick_num,
                        pclick_den,
                    }
                })
                .collect(),
        }
    }
}
