//! Seeded synthetic instances.
//!
//! A [`GeneratorConfig`] names a family (bundle or slate auctions) and
//! ranges for every sampled quantity. Instance `k` under seed `s` is drawn
//! from stream `k` of a counter-based generator seeded with `s`, so
//! regeneration is bit-for-bit reproducible and instances can be produced
//! independently in any order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bundle::Bundle;
use crate::error::{Error, Result};
use crate::exact::{MAX_EXACT_BIDDERS, MAX_EXACT_ITEMS};
use crate::instance::Instance;
use crate::money::Money;
use crate::slate::{Ad, SlateInstance};
use crate::valuation::{Valuation, ValuationProfile};

/// Inclusive range a quantity is drawn from uniformly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub min: u64,
    pub max: u64,
}

impl Span {
    pub fn new(min: u64, max: u64) -> Span {
        Span { min, max }
    }

    pub fn fixed(value: u64) -> Span {
        Span { min: value, max: value }
    }

    fn check(&self, what: &str, lo: u64, hi: u64) -> Result<()> {
        if self.min > self.max || self.min < lo || self.max > hi {
            return Err(Error::input(format!(
                "{what} range {}..={} must sit inside {lo}..={hi}",
                self.min, self.max
            )));
        }
        Ok(())
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> u64 {
        rng.gen_range(self.min..=self.max)
    }
}

/// What to generate and how much of it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum GeneratorConfig {
    Xor(XorFamily),
    Slate(SlateFamily),
}

/// Bundle auctions with XOR bid lists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XorFamily {
    pub instances: u32,
    pub items: Span,
    pub bidders: Span,
    pub bids_per_bidder: Span,
    /// Bid values in hundredths of a unit (scaled to micros by 10^4).
    pub value_cents: Span,
}

/// Decorated-slate auctions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlateFamily {
    pub instances: u32,
    pub advertisers: Span,
    pub ads_per_advertiser: Span,
    /// Lines per ad; samples are clamped to the page height `m`.
    pub lines_per_ad: Span,
    /// Bids in hundredths of a unit. Together with percent click-through
    /// rates this keeps every score on the micro grid.
    pub bid_cents: Span,
    pub pclick_percent: Span,
    pub h: u32,
    pub m: u32,
}

impl GeneratorConfig {
    /// Small bundle auctions the exhaustive checkers can certify.
    pub fn default_xor() -> GeneratorConfig {
        GeneratorConfig::Xor(XorFamily {
            instances: 50,
            items: Span::new(4, 6),
            bidders: Span::new(4, 8),
            bids_per_bidder: Span::new(1, 3),
            value_cents: Span::new(1, 10_000),
        })
    }

    /// Slates shaped like a sponsored-search page: a handful of
    /// advertisers, a dozen-odd decorations each, up to fourteen lines per
    /// ad, four slots.
    pub fn default_slate() -> GeneratorConfig {
        GeneratorConfig::Slate(SlateFamily {
            instances: 50,
            advertisers: Span::new(5, 9),
            ads_per_advertiser: Span::new(10, 20),
            lines_per_ad: Span::new(1, 14),
            bid_cents: Span::new(1, 500),
            pclick_percent: Span::new(1, 100),
            h: 4,
            m: 20,
        })
    }

    pub fn family(&self) -> &'static str {
        match self {
            GeneratorConfig::Xor(_) => "xor",
            GeneratorConfig::Slate(_) => "slate",
        }
    }

    pub fn instance_count(&self) -> u32 {
        match self {
            GeneratorConfig::Xor(f) => f.instances,
            GeneratorConfig::Slate(f) => f.instances,
        }
    }

    /// File stem for instance `index`, shared by the generator and the
    /// comparison harness.
    pub fn instance_name(&self, index: u32) -> String {
        format!("{}-{:04}", self.family(), index)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            GeneratorConfig::Xor(f) => {
                f.items.check("items", 1, MAX_EXACT_ITEMS as u64)?;
                f.bidders.check("bidders", 0, MAX_EXACT_BIDDERS as u64)?;
                f.bids_per_bidder.check("bids per bidder", 1, 64)?;
                f.value_cents.check("value cents", 1, u64::MAX / 10_000)
            }
            GeneratorConfig::Slate(f) => {
                f.advertisers.check("advertisers", 0, 64)?;
                f.ads_per_advertiser.check("ads per advertiser", 1, 256)?;
                f.lines_per_ad.check("lines per ad", 1, u64::MAX)?;
                f.bid_cents.check("bid cents", 1, u64::MAX / 10_000)?;
                f.pclick_percent.check("click-through percent", 1, 100)?;
                if f.h == 0 || f.m == 0 {
                    return Err(Error::input("slot and line budgets must be positive"));
                }
                Ok(())
            }
        }
    }

    /// Instance `index` under `seed`; independent of every other index.
    pub fn generate_one(&self, seed: u64, index: u32) -> Result<Instance> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        match self {
            GeneratorConfig::Xor(f) => f.sample(&mut rng),
            GeneratorConfig::Slate(f) => f.sample(&mut rng),
        }
    }

    pub fn generate(&self, seed: u64) -> Result<Vec<Instance>> {
        (0..self.instance_count()).map(|k| self.generate_one(seed, k)).collect()
    }
}

impl XorFamily {
    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Instance> {
        let items = self.items.sample(rng) as u32;
        let count = self.bidders.sample(rng) as u32;
        let mut bidders = Vec::with_capacity(count as usize);
        for id in 1..=count {
            let wanted = self.bids_per_bidder.sample(rng);
            let mut entries: Vec<(Bundle, Money)> = Vec::new();
            for _ in 0..wanted {
                let mut members: Vec<u32> =
                    (0..items).filter(|_| rng.gen_bool(0.5)).collect();
                if members.is_empty() {
                    members.push(rng.gen_range(0..items));
                }
                let bundle = Bundle::from_items(&members);
                if entries.iter().any(|(b, _)| *b == bundle) {
                    continue;
                }
                let value = Money::from_micros(self.value_cents.sample(rng) * 10_000);
                entries.push((bundle, value));
            }
            bidders.push((id, Valuation::from_entries(entries)?));
        }
        Ok(Instance::Xor(ValuationProfile::new(items, bidders)?))
    }
}

impl SlateFamily {
    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Instance> {
        let count = self.advertisers.sample(rng) as u32;
        let mut ads = Vec::new();
        for advertiser in 1..=count {
            let decorations = self.ads_per_advertiser.sample(rng) as u32;
            for decoration in 0..decorations {
                let lines = self.lines_per_ad.sample(rng).min(self.m as u64) as u32;
                let bid = Money::from_micros(self.bid_cents.sample(rng) * 10_000);
                let percent = self.pclick_percent.sample(rng);
                ads.push(Ad::new(advertiser, decoration, lines, bid, percent, 100)?);
            }
        }
        Ok(Instance::Slate(SlateInstance::new(self.h, self.m, ads)?))
    }
}
