//! Mechanism comparison and plot-ready reporting.
//!
//! [`compare`] runs a set of pricing mechanisms over a set of instances,
//! timing each run and counting its oracle queries, and tabulates one row
//! per (instance, mechanism). Rows carry two revenue readings: the expected
//! revenue (the sum of expected payments, exact in micros) and the literal
//! bid-weighted reading `sum of bid * CPC` kept as an exact rational.
//! Every row is normalized by the same instance's VCG expected revenue.
//!
//! Timing covers the mechanism run alone: instance parsing and oracle
//! construction (which solves the auction once) are shared across
//! mechanisms and excluded. Failures are collected per (instance,
//! mechanism) and never abort the remaining runs.

use std::fmt;
use std::io;
use std::str::FromStr;
use std::time::Instant;

use crate::baselines::{gsp_greedy, gsp_optimal, vcg, GspSlate, VcgOutcome};
use crate::error::{Error, Result};
use crate::instance::{Instance, InstanceOracle};
use crate::money::{format_frac, frac, parse_frac, Frac, Money, MICROS_PER_UNIT};
use crate::oracle::{CountingOracle, WinnerOracle};
use crate::outcome::{AuctionOutcome, RunMeta};
use crate::par::*;
use crate::pricing::{settle_at, vcg_pursuit, water_fill, DirectionPolicy};
use crate::slate::SlateOracle;

/// The pricing rules the harness can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mechanism {
    /// Water-filling from zero along the uniform direction, settled at the
    /// resulting core point.
    Core,
    /// Water-filling weighted toward the VCG utilities.
    VcgPursuit,
    Vcg,
    /// Second-price ladder over the welfare-optimal slate.
    GspOpt,
    /// Second-price ladder over a greedily packed slate.
    GspGreedy,
}

impl Mechanism {
    pub const ALL: [Mechanism; 5] = [
        Mechanism::Core,
        Mechanism::VcgPursuit,
        Mechanism::Vcg,
        Mechanism::GspOpt,
        Mechanism::GspGreedy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mechanism::Core => "core",
            Mechanism::VcgPursuit => "vcg-pursuit",
            Mechanism::Vcg => "vcg",
            Mechanism::GspOpt => "gsp-opt",
            Mechanism::GspGreedy => "gsp-greedy",
        }
    }

    /// Parses a comma-separated list; `all` expands to every mechanism.
    /// First mention wins on duplicates.
    pub fn parse_list(text: &str) -> Result<Vec<Mechanism>> {
        let mut picked = Vec::new();
        for part in text.split(',') {
            let part = part.trim();
            if part == "all" {
                for m in Mechanism::ALL {
                    if !picked.contains(&m) {
                        picked.push(m);
                    }
                }
                continue;
            }
            let m = part.parse()?;
            if !picked.contains(&m) {
                picked.push(m);
            }
        }
        if picked.is_empty() {
            return Err(Error::input("no mechanisms named"));
        }
        Ok(picked)
    }
}

impl FromStr for Mechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Mechanism> {
        Mechanism::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::input(format!(
                    "unknown mechanism {s:?}; expected one of core, vcg-pursuit, vcg, \
                     gsp-opt, gsp-greedy"
                ))
            })
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A search tolerance, either absolute or relative to the instance's
/// maximum welfare.
#[derive(Clone, Debug, PartialEq)]
pub enum Epsilon {
    Micro(Money),
    Relative(Frac),
}

impl Epsilon {
    /// Accepts a plain micro amount (`"10000"`) or a welfare fraction
    /// (`"rel:1/1000"`).
    pub fn parse(text: &str) -> Result<Epsilon> {
        if let Some(rest) = text.strip_prefix("rel:") {
            let f = parse_frac(rest)
                .ok_or_else(|| Error::input(format!("cannot read fraction {rest:?}")))?;
            if f <= frac(0, 1) {
                return Err(Error::input("relative epsilon must be positive"));
            }
            return Ok(Epsilon::Relative(f));
        }
        let micros: u64 = text
            .parse()
            .map_err(|_| Error::input(format!("cannot read epsilon {text:?}")))?;
        if micros == 0 {
            return Err(Error::input("epsilon must be at least one micro"));
        }
        Ok(Epsilon::Micro(Money::from_micros(micros)))
    }

    /// The concrete tolerance for an instance with the given maximum
    /// welfare. Relative tolerances floor to micros and never drop below
    /// one micro.
    pub fn resolve(&self, total_welfare: Money) -> Result<Money> {
        match self {
            Epsilon::Micro(m) if m.is_zero() => {
                Err(Error::input("epsilon must be at least one micro"))
            }
            Epsilon::Micro(m) => Ok(*m),
            Epsilon::Relative(f) => {
                let scaled = f * frac(total_welfare.micros() as i128, 1);
                let floored = (scaled.numer() / scaled.denom()).max(1);
                Ok(Money::from_micros(u64::try_from(floored).map_err(|_| {
                    Error::input("relative epsilon does not fit in micros")
                })?))
            }
        }
    }
}

/// The economic view of one winner, enough for the report's revenue and
/// fairness columns: the winning bid, the per-click (or literal, for
/// bundle auctions) charge, and the winner's utility.
#[derive(Clone, Debug, PartialEq)]
pub struct PaidWinner {
    pub bid: Money,
    /// Per-click charge in micro-units for slate winners; equal to the
    /// payment for bundle winners, which have no click model.
    pub cpc: Frac,
    pub utility: Money,
}

/// One mechanism executed on one instance.
#[derive(Clone, Debug)]
pub struct MechanismRun {
    pub outcome: AuctionOutcome,
    /// Declared welfare of the chosen allocation (not always the optimum:
    /// greedy slates can fall short).
    pub welfare: Money,
    pub winners: Vec<PaidWinner>,
}

/// Runs one mechanism against a prebuilt oracle. The epsilon tolerance
/// only matters to the core mechanisms; exact baselines ignore it.
pub fn run_mechanism(
    instance: &Instance,
    oracle: &InstanceOracle,
    mechanism: Mechanism,
    epsilon: Money,
) -> Result<MechanismRun> {
    let counting = CountingOracle::new(oracle);
    let started = Instant::now();
    match mechanism {
        Mechanism::Core => {
            let run = water_fill(&counting, &DirectionPolicy::Uniform, epsilon)?;
            let priced = settle_at(&counting, &run.utilities)?;
            let meta = RunMeta::new(mechanism.name(), counting.calls(), started.elapsed());
            let winners = settled_winners(instance, oracle, &priced.allocation, |id| {
                priced.payments.get(&id).copied().unwrap_or(Money::ZERO)
            })?;
            Ok(MechanismRun {
                outcome: AuctionOutcome::new(priced.allocation, priced.payments, meta),
                welfare: priced.welfare,
                winners,
            })
        }
        Mechanism::VcgPursuit => {
            let pursuit = vcg_pursuit(&counting, epsilon)?;
            let priced = settle_at(&counting, &pursuit.run.utilities)?;
            let meta = RunMeta::new(mechanism.name(), counting.calls(), started.elapsed());
            let winners = settled_winners(instance, oracle, &priced.allocation, |id| {
                priced.payments.get(&id).copied().unwrap_or(Money::ZERO)
            })?;
            Ok(MechanismRun {
                outcome: AuctionOutcome::new(priced.allocation, priced.payments, meta),
                welfare: priced.welfare,
                winners,
            })
        }
        Mechanism::Vcg => {
            let out: VcgOutcome = vcg(&counting)?;
            let meta = RunMeta::new(mechanism.name(), counting.calls(), started.elapsed());
            let winners = settled_winners(instance, oracle, &out.allocation, |id| {
                out.payments.get(&id).copied().unwrap_or(Money::ZERO)
            })?;
            Ok(MechanismRun {
                outcome: AuctionOutcome::new(out.allocation, out.payments, meta),
                welfare: out.welfare,
                winners,
            })
        }
        Mechanism::GspOpt | Mechanism::GspGreedy => {
            let InstanceOracle::Slate(slate) = oracle else {
                return Err(Error::Unsupported(
                    "generalized second pricing needs a slate auction; bundle \
                     instances have no ad ordering"
                        .into(),
                ));
            };
            let (out, calls) = if mechanism == Mechanism::GspOpt {
                (gsp_optimal(slate)?, 1)
            } else {
                (gsp_greedy(slate)?, 0)
            };
            let meta = RunMeta::new(mechanism.name(), calls, started.elapsed());
            let winners = gsp_winners(slate, &out)?;
            Ok(MechanismRun {
                outcome: AuctionOutcome::new(out.allocation, out.payments, meta),
                welfare: out.welfare,
                winners,
            })
        }
    }
}

fn settled_winners(
    instance: &Instance,
    oracle: &InstanceOracle,
    allocation: &crate::allocation::Allocation,
    payment_of: impl Fn(crate::bundle::BidderId) -> Money,
) -> Result<Vec<PaidWinner>> {
    let mut winners = Vec::with_capacity(allocation.len());
    for (id, bundle) in allocation.iter() {
        let value = oracle.declared_value(id, bundle);
        let payment = payment_of(id);
        let utility = value.checked_sub(payment).ok_or_else(|| {
            Error::invariant(format!("bidder {id} is charged beyond its declared value"))
        })?;
        let (bid, cpc) = match instance {
            Instance::Xor(_) => (value, frac(payment.micros() as i128, 1)),
            Instance::Slate(slate) => {
                let idx = bundle.items().first().copied().ok_or_else(|| {
                    Error::invariant("slate winners hold exactly one ad index")
                })? as usize;
                let ad = &slate.ads()[idx];
                let (num, den) = ad.pclick_parts();
                let cpc = frac(payment.micros() as i128 * den as i128, num as i128);
                (ad.bid(), cpc)
            }
        };
        winners.push(PaidWinner { bid, cpc, utility });
    }
    Ok(winners)
}

fn gsp_winners(oracle: &SlateOracle, out: &GspSlate) -> Result<Vec<PaidWinner>> {
    out.placements
        .iter()
        .map(|p| {
            let utility = p.score.checked_sub(p.expected_payment).ok_or_else(|| {
                Error::invariant("a second-price charge exceeds the ad's own score")
            })?;
            Ok(PaidWinner {
                bid: oracle.instance().ads()[p.ad_index].bid(),
                cpc: p.cpc_micros.clone(),
                utility,
            })
        })
        .collect()
}

/// `sum of bid * CPC` over the winners, in micro-units: each winning bid in
/// whole currency units times its per-click charge in micros, summed
/// exactly.
pub fn literal_revenue(winners: &[PaidWinner]) -> Frac {
    winners
        .iter()
        .map(|w| frac(w.bid.micros() as i128, MICROS_PER_UNIT as i128) * w.cpc.clone())
        .fold(frac(0, 1), |a, b| a + b)
}

/// Max winner utility over min winner utility. Undefined (reported `NA`
/// and excluded from averages) without winners or when any winner's
/// utility is zero.
pub fn fairness_ratio(winners: &[PaidWinner]) -> Option<Frac> {
    let utilities: Vec<u64> = winners.iter().map(|w| w.utility.micros()).collect();
    if utilities.is_empty() || utilities.contains(&0) {
        return None;
    }
    let top = *utilities.iter().max().unwrap();
    let bottom = *utilities.iter().min().unwrap();
    Some(frac(top as i128, bottom as i128))
}

/// One line of the comparison CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub instance_id: String,
    pub mechanism: Mechanism,
    pub welfare: Money,
    pub revenue_expected: Money,
    pub revenue_literal: Frac,
    /// Expected revenue over the instance's VCG expected revenue; absent
    /// when VCG failed or earned nothing.
    pub revenue_vs_vcg: Option<Frac>,
    pub runtime_us: u64,
    pub oracle_calls: u64,
    pub fairness: Option<Frac>,
}

/// A run that produced no row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunFailure {
    pub instance_id: String,
    /// Mechanism name, or `setup` when the instance itself failed.
    pub stage: String,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ComparisonReport {
    pub rows: Vec<ReportRow>,
    /// Not part of the CSV; surfaced separately by callers.
    pub failures: Vec<RunFailure>,
}

/// Per-mechanism ensemble averages, exact. `NA` rows are excluded from the
/// fairness and normalization means.
#[derive(Clone, Debug, PartialEq)]
pub struct MechanismSummary {
    pub mechanism: Mechanism,
    pub rows: usize,
    pub mean_revenue_vs_vcg: Option<Frac>,
    pub mean_fairness: Option<Frac>,
    pub mean_oracle_calls: Frac,
}

/// Runs every requested mechanism on every instance. Instances run in
/// parallel; a failed run is recorded and skipped.
pub fn compare(
    instances: &[(String, Instance)],
    mechanisms: &[Mechanism],
    epsilon: &Epsilon,
) -> ComparisonReport {
    let per_instance: Vec<ComparisonReport> = instances
        .par_iter()
        .map(|(id, instance)| compare_one(id, instance, mechanisms, epsilon))
        .collect();
    let mut report = ComparisonReport::default();
    for mut part in per_instance {
        report.rows.append(&mut part.rows);
        report.failures.append(&mut part.failures);
    }
    report
}

fn compare_one(
    id: &str,
    instance: &Instance,
    mechanisms: &[Mechanism],
    epsilon: &Epsilon,
) -> ComparisonReport {
    let mut report = ComparisonReport::default();
    let fail = |stage: &str, error: &Error, report: &mut ComparisonReport| {
        report.failures.push(RunFailure {
            instance_id: id.to_string(),
            stage: stage.to_string(),
            message: error.to_string(),
        });
    };

    let oracle = match instance.build_oracle() {
        Ok(o) => o,
        Err(e) => {
            fail("setup", &e, &mut report);
            return report;
        }
    };
    let eps = match epsilon.resolve(oracle.total_welfare()) {
        Ok(eps) => eps,
        Err(e) => {
            fail("setup", &e, &mut report);
            return report;
        }
    };

    // VCG anchors the normalization column, so it runs even when its own
    // row was not requested.
    let mut vcg_run = Some(run_mechanism(instance, &oracle, Mechanism::Vcg, eps));
    let vcg_revenue = match vcg_run.as_ref().unwrap() {
        Ok(run) => Some(run.outcome.revenue),
        Err(_) => None,
    };

    for &mechanism in mechanisms {
        let run = if mechanism == Mechanism::Vcg {
            vcg_run.take().expect("the vcg anchor run is consumed at most once")
        } else {
            run_mechanism(instance, &oracle, mechanism, eps)
        };
        match run {
            Ok(run) => report.rows.push(build_row(id, mechanism, &run, vcg_revenue)),
            Err(e) => fail(mechanism.name(), &e, &mut report),
        }
    }
    report
}

fn build_row(
    id: &str,
    mechanism: Mechanism,
    run: &MechanismRun,
    vcg_revenue: Option<Money>,
) -> ReportRow {
    let revenue_expected = run.outcome.revenue;
    let revenue_vs_vcg = vcg_revenue
        .filter(|v| !v.is_zero())
        .map(|v| frac(revenue_expected.micros() as i128, v.micros() as i128));
    ReportRow {
        instance_id: id.to_string(),
        mechanism,
        welfare: run.welfare,
        revenue_expected,
        revenue_literal: literal_revenue(&run.winners),
        revenue_vs_vcg,
        runtime_us: run.outcome.meta.duration.as_micros() as u64,
        oracle_calls: run.outcome.meta.oracle_calls,
        fairness: fairness_ratio(&run.winners),
    }
}

const CSV_HEADER: [&str; 9] = [
    "instance_id",
    "mechanism",
    "welfare_micro",
    "revenue_expected_micro",
    "revenue_literal_micro",
    "revenue_vs_vcg",
    "runtime_us",
    "oracle_calls",
    "fairness_ratio",
];

fn opt_frac(f: &Option<Frac>) -> String {
    f.as_ref().map(format_frac).unwrap_or_else(|| "NA".to_string())
}

impl ComparisonReport {
    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for row in &self.rows {
            w.write_record([
                row.instance_id.clone(),
                row.mechanism.name().to_string(),
                row.welfare.micros().to_string(),
                row.revenue_expected.micros().to_string(),
                format_frac(&row.revenue_literal),
                opt_frac(&row.revenue_vs_vcg),
                row.runtime_us.to_string(),
                row.oracle_calls.to_string(),
                opt_frac(&row.fairness),
            ])?;
        }
        w.flush().map_err(Error::Io)?;
        Ok(())
    }

    pub fn read_csv<R: io::Read>(input: R) -> Result<ComparisonReport> {
        let mut reader = csv::Reader::from_reader(input);
        let headers = reader.headers()?;
        if headers.iter().ne(CSV_HEADER) {
            return Err(Error::input(format!("unexpected CSV header {headers:?}")));
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record?;
            let field = |i: usize| record.get(i).unwrap_or("");
            let number = |i: usize| -> Result<u64> {
                field(i)
                    .parse()
                    .map_err(|_| Error::input(format!("bad number {:?}", field(i))))
            };
            let fraction = |i: usize| -> Result<Frac> {
                parse_frac(field(i))
                    .ok_or_else(|| Error::input(format!("bad fraction {:?}", field(i))))
            };
            let optional = |i: usize| -> Result<Option<Frac>> {
                if field(i) == "NA" { Ok(None) } else { fraction(i).map(Some) }
            };
            rows.push(ReportRow {
                instance_id: field(0).to_string(),
                mechanism: field(1).parse()?,
                welfare: Money::from_micros(number(2)?),
                revenue_expected: Money::from_micros(number(3)?),
                revenue_literal: fraction(4)?,
                revenue_vs_vcg: optional(5)?,
                runtime_us: number(6)?,
                oracle_calls: number(7)?,
                fairness: optional(8)?,
            });
        }
        Ok(ComparisonReport { rows, failures: Vec::new() })
    }

    /// Ensemble means per mechanism, in canonical mechanism order.
    pub fn summarize(&self) -> Vec<MechanismSummary> {
        Mechanism::ALL
            .into_iter()
            .filter_map(|mechanism| {
                let rows: Vec<&ReportRow> =
                    self.rows.iter().filter(|r| r.mechanism == mechanism).collect();
                if rows.is_empty() {
                    return None;
                }
                let mean_of = |values: Vec<&Frac>| {
                    if values.is_empty() {
                        return None;
                    }
                    let count = values.len() as i128;
                    let total = values.into_iter().fold(frac(0, 1), |a, b| a + b.clone());
                    Some(total / frac(count, 1))
                };
                let calls: u64 = rows.iter().map(|r| r.oracle_calls).sum();
                Some(MechanismSummary {
                    mechanism,
                    rows: rows.len(),
                    mean_revenue_vs_vcg: mean_of(
                        rows.iter().filter_map(|r| r.revenue_vs_vcg.as_ref()).collect(),
                    ),
                    mean_fairness: mean_of(
                        rows.iter().filter_map(|r| r.fairness.as_ref()).collect(),
                    ),
                    mean_oracle_calls: frac(calls as i128, rows.len() as i128),
                })
            })
            .collect()
    }
}
