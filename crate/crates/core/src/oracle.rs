//! Synthetic economies for checking the accounting identities.
//!
//! A generated [`Economy`] is a sequence of yearly [`EconomyState`]s. Each
//! state carries household ledgers (pay, cash flow, consumption, net
//! transfer), the physical capital stock and an aggregate human-capital
//! account. The generator builds every stored quantity so the identities
//! hold; [`verify_all_identities`] recomputes each one from the stored
//! values alone and reports the largest relative residual per identity.
//!
//! Identity labels:
//!
//! | label | relation |
//! |-------|----------|
//! | `household.budget` | Π + F(K) = C + Γ per household |
//! | `transfers.zero_sum` | Σ Γ = 0 |
//! | `households.cash_flow` | Σ C − Σ Π = Σ F(K) over households |
//! | `collective.cash_flow` | C − Π = F(K) on the state aggregates |
//! | `Agg.*` | state aggregates equal household sums |
//! | `Stock.K`, `Stock.H` | ΔK, ΔH equal the change in stored levels |
//! | `value.stocks` | V = H + K |
//! | `output.total_return` | Y = ΔV + F(V), F(V) = C_p |
//! | `human.cash_flow` | F(H) = Π − C_s |
//! | `human.growth` | ΔH = C_s + W_s − D(H) |
//! | `human.work` | ΔH + F(H) = Π + W_s − D(H) |
//! | `output.stock_flow` | ΔV + C_p = ΔH + ΔK + C_p = C_s + W_s − D(H) + ΔK + C_p, and F(H) + F(K) = C_p |
//! | `consumption.split` | C_s + C_p = C |
//! | `output.uses` | ΔV + C_p = C + W_s − D(H) + ΔK |
//! | `output.work_profit` | ΔV + C_p = W + P |
//! | `output.factors` | Π + W_s − D(H) + P = ΔV + C_p |
//! | `output.uses_factors` | C + ΔK + W_s − D(H) = Π + P + W_s − D(H) |
//! | `profit.consumption` | C + ΔK = Π + P |
//! | `output.shares` | W/Y + P/Y = 1 and W/Y = (Π + W_s − D(H)) / (C + ΔK + W_s − D(H)) |
//!
//! P is always taken from [`crate::indicators::net_profit`], so the
//! value accounting is checked against the same value the indicator
//! pipeline produces.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indicators::net_profit;
use crate::numeric::identity_residual;

/// Acceptance tolerance for [`verify_all_identities`].
pub const IDENTITY_TOLERANCE: f64 = 1e-9;
/// Agreement required between two computation routes of one quantity.
pub const PATH_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HouseholdLedger {
    pub id: u32,
    pub pay: f64,
    pub cash_flow: f64,
    pub consumption: f64,
    /// Transfers paid out less transfers received.
    pub net_transfer: f64,
}

impl HouseholdLedger {
    /// Builds a ledger with consumption set so that Π + F(K) = C + Γ.
    pub fn balanced(id: u32, pay: f64, cash_flow: f64, net_transfer: f64) -> Self {
        HouseholdLedger {
            id,
            pay,
            cash_flow,
            consumption: pay + cash_flow - net_transfer,
            net_transfer,
        }
    }

    /// Relative residual of Π + F(K) = C + Γ.
    pub fn residual(&self) -> f64 {
        identity_residual(
            self.pay + self.cash_flow,
            self.consumption + self.net_transfer,
            &[self.pay, self.cash_flow, self.consumption, self.net_transfer],
        )
    }
}

/// Collective human-capital flows for one year.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HumanCapitalAccount {
    /// Human capital H at year end, at present value.
    pub stock: f64,
    pub pay: f64,
    /// C_s
    pub invested_consumption: f64,
    /// C_p
    pub pure_consumption: f64,
    /// W_s
    pub self_invested_work: f64,
    /// D(H)
    pub depreciation: f64,
}

impl HumanCapitalAccount {
    /// F(H) = Π − C_s
    pub fn cash_flow(&self) -> f64 {
        self.pay - self.invested_consumption
    }

    /// C_s + W_s − D(H)
    pub fn growth(&self) -> f64 {
        self.invested_consumption + self.self_invested_work - self.depreciation
    }

    /// C_s + C_p
    pub fn consumption(&self) -> f64 {
        self.invested_consumption + self.pure_consumption
    }

    /// W_s − D(H): the amount by which work exceeds pay.
    pub fn unpaid_net_work(&self) -> f64 {
        self.self_invested_work - self.depreciation
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EconomyState {
    pub year: i32,
    pub capital: f64,
    pub delta_capital: f64,
    pub delta_human: f64,
    /// V = H + K
    pub value: f64,
    pub consumption: f64,
    /// F(K), collectively C − Π.
    pub cash_flow: f64,
    /// F(H)
    pub human_cash_flow: f64,
    pub human: HumanCapitalAccount,
    pub households: Vec<HouseholdLedger>,
}

impl EconomyState {
    pub fn pay(&self) -> f64 {
        self.human.pay
    }

    /// A one-household state built from collective flows, with opening
    /// stocks `prev_capital` and `prev_human`. Intended for worked examples.
    pub fn from_flows(year: i32, prev_capital: f64, prev_human: f64, flows: CollectiveFlows) -> Self {
        let CollectiveFlows {
            consumption,
            pay,
            delta_capital,
            invested_consumption,
            self_invested_work,
            depreciation,
        } = flows;
        let cash_flow = consumption - pay;
        let human = HumanCapitalAccount {
            stock: 0.0,
            pay,
            invested_consumption,
            pure_consumption: consumption - invested_consumption,
            self_invested_work,
            depreciation,
        };
        let delta_human = human.growth();
        let human = HumanCapitalAccount {
            stock: prev_human + delta_human,
            ..human
        };
        let capital = prev_capital + delta_capital;
        EconomyState {
            year,
            capital,
            delta_capital,
            delta_human,
            value: human.stock + capital,
            consumption,
            cash_flow,
            human_cash_flow: human.cash_flow(),
            human,
            households: vec![HouseholdLedger::balanced(0, pay, cash_flow, 0.0)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollectiveFlows {
    pub consumption: f64,
    pub pay: f64,
    pub delta_capital: f64,
    pub invested_consumption: f64,
    pub self_invested_work: f64,
    pub depreciation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Economy {
    pub seed: u64,
    pub opening_capital: f64,
    pub opening_human: f64,
    pub states: Vec<EconomyState>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lo: f64,
    pub hi: f64,
}

impl Bounds {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Bounds { lo, hi }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi) {
            return Err(Error::InvalidConfig(format!(
                "{name}: bounds [{}, {}] are not a finite interval",
                self.lo, self.hi
            )));
        }
        Ok(())
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        if self.lo == self.hi {
            self.lo
        } else {
            rng.gen_range(self.lo..=self.hi)
        }
    }
}

/// Magnitudes for generated flows. Per-household amounts are in currency;
/// the rest are ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct EconomyConfig {
    pub pay: Bounds,
    pub cash_flow: Bounds,
    /// Transfers are drawn from [−spread, spread] and then centered.
    pub transfer_spread: f64,
    pub opening_capital: Bounds,
    pub opening_human: Bounds,
    /// ΔK / K(t−1)
    pub capital_growth: Bounds,
    /// C_s / C
    pub invested_share: Bounds,
    /// W_s / Π
    pub self_invested_work_share: Bounds,
    /// D(H) / H(t−1)
    pub depreciation_rate: Bounds,
    /// Resampling attempts per year before giving up.
    pub max_retries: u32,
}

impl Default for EconomyConfig {
    fn default() -> Self {
        EconomyConfig {
            pay: Bounds::new(50.0, 150.0),
            cash_flow: Bounds::new(-5.0, 40.0),
            transfer_spread: 20.0,
            opening_capital: Bounds::new(300.0, 900.0),
            opening_human: Bounds::new(1000.0, 3000.0),
            capital_growth: Bounds::new(-0.06, 0.08),
            invested_share: Bounds::new(0.05, 0.35),
            self_invested_work_share: Bounds::new(0.0, 0.25),
            depreciation_rate: Bounds::new(0.0, 0.04),
            max_retries: 100,
        }
    }
}

impl EconomyConfig {
    fn validate(&self) -> Result<()> {
        self.pay.validate("pay")?;
        self.cash_flow.validate("cash_flow")?;
        self.opening_capital.validate("opening_capital")?;
        self.opening_human.validate("opening_human")?;
        self.capital_growth.validate("capital_growth")?;
        self.invested_share.validate("invested_share")?;
        self.self_invested_work_share.validate("self_invested_work_share")?;
        self.depreciation_rate.validate("depreciation_rate")?;
        if !(self.transfer_spread.is_finite() && self.transfer_spread >= 0.0) {
            return Err(Error::InvalidConfig("transfer_spread must be >= 0".into()));
        }
        if self.max_retries == 0 {
            return Err(Error::InvalidConfig("max_retries must be >= 1".into()));
        }
        Ok(())
    }
}

/// Random vector summing to zero (up to rounding). One element is always 0.
fn zero_sum_transfers(rng: &mut impl Rng, n: usize, spread: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..n)
        .map(|_| if spread > 0.0 { rng.gen_range(-spread..=spread) } else { 0.0 })
        .collect();
    let mean = raw.iter().sum::<f64>() / n as f64;
    raw.into_iter().map(|x| x - mean).collect()
}

struct Opening {
    capital: f64,
    human: f64,
}

fn draw_state(
    rng: &mut impl Rng,
    config: &EconomyConfig,
    year: i32,
    n_households: usize,
    opening: &Opening,
) -> std::result::Result<EconomyState, &'static str> {
    let transfers = zero_sum_transfers(rng, n_households, config.transfer_spread);
    let households: Vec<HouseholdLedger> = transfers
        .into_iter()
        .enumerate()
        .map(|(i, gamma)| {
            let pay = config.pay.sample(rng);
            let cash_flow = config.cash_flow.sample(rng);
            HouseholdLedger::balanced(i as u32, pay, cash_flow, gamma)
        })
        .collect();
    if households.iter().any(|h| h.consumption < 0.0) {
        return Err("nonnegative household consumption");
    }
    if households.iter().any(|h| h.pay < 0.0) {
        return Err("nonnegative household pay");
    }

    let consumption: f64 = households.iter().map(|h| h.consumption).sum();
    let pay: f64 = households.iter().map(|h| h.pay).sum();
    let cash_flow: f64 = households.iter().map(|h| h.cash_flow).sum();

    let delta_capital = config.capital_growth.sample(rng) * opening.capital;
    let capital = opening.capital + delta_capital;
    if capital <= 0.0 {
        return Err("positive capital stock");
    }

    let invested_consumption = config.invested_share.sample(rng) * consumption;
    let pure_consumption = consumption - invested_consumption;
    if invested_consumption < 0.0 || pure_consumption < 0.0 {
        return Err("nonnegative invested and pure consumption");
    }
    let self_invested_work = config.self_invested_work_share.sample(rng) * pay;
    let depreciation = config.depreciation_rate.sample(rng) * opening.human;
    if self_invested_work < 0.0 || depreciation < 0.0 {
        return Err("nonnegative self-invested work and depreciation");
    }
    let human = HumanCapitalAccount {
        stock: 0.0,
        pay,
        invested_consumption,
        pure_consumption,
        self_invested_work,
        depreciation,
    };
    let delta_human = human.growth();
    let stock = opening.human + delta_human;
    if stock <= 0.0 {
        return Err("positive human capital stock");
    }
    let human = HumanCapitalAccount { stock, ..human };

    Ok(EconomyState {
        year,
        capital,
        delta_capital,
        delta_human,
        value: stock + capital,
        consumption,
        cash_flow,
        human_cash_flow: human.cash_flow(),
        human,
        households,
    })
}

/// Generates `n_years` yearly states for `n_households` households.
/// Identical arguments give bit-identical economies.
pub fn generate_economy(
    seed: u64,
    n_households: usize,
    n_years: usize,
    config: &EconomyConfig,
) -> Result<Economy> {
    if n_households == 0 {
        return Err(Error::InvalidConfig("need at least one household".into()));
    }
    if n_years < 2 {
        return Err(Error::InvalidConfig("need at least two years".into()));
    }
    config.validate()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n_households as f64;
    let opening_capital = config.opening_capital.sample(&mut rng) * n;
    let opening_human = config.opening_human.sample(&mut rng) * n;
    if opening_capital <= 0.0 || opening_human <= 0.0 {
        return Err(Error::GeneratorInfeasible("positive opening stocks".into()));
    }

    let mut opening = Opening {
        capital: opening_capital,
        human: opening_human,
    };
    let mut states = Vec::with_capacity(n_years);
    for t in 1..=n_years {
        let mut last_failure = "";
        let mut drawn = None;
        for _ in 0..config.max_retries {
            match draw_state(&mut rng, config, t as i32, n_households, &opening) {
                Ok(state) => {
                    drawn = Some(state);
                    break;
                }
                Err(why) => last_failure = why,
            }
        }
        let state = drawn.ok_or_else(|| Error::GeneratorInfeasible(last_failure.into()))?;
        opening = Opening {
            capital: state.capital,
            human: state.human.stock,
        };
        states.push(state);
    }
    Ok(Economy {
        seed,
        opening_capital,
        opening_human,
        states,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Collective {
    pub consumption: f64,
    pub pay: f64,
    pub cash_flow: f64,
}

/// Sums household ledgers. Transfers must net to zero, after which
/// C − Π = F(K) collectively.
pub fn aggregate_households(ledgers: &[HouseholdLedger]) -> Result<Collective> {
    let consumption: f64 = ledgers.iter().map(|h| h.consumption).sum();
    let pay: f64 = ledgers.iter().map(|h| h.pay).sum();
    let cash_flow: f64 = ledgers.iter().map(|h| h.cash_flow).sum();
    let transfers: f64 = ledgers.iter().map(|h| h.net_transfer).sum();
    if transfers.abs() > IDENTITY_TOLERANCE * consumption.abs() {
        return Err(Error::TransferImbalance {
            residual: transfers,
            total: consumption,
        });
    }
    let residual = identity_residual(consumption - pay, cash_flow, &[consumption, pay]);
    if residual > IDENTITY_TOLERANCE {
        return Err(Error::IdentityViolation {
            label: "households.cash_flow",
            residual,
        });
    }
    Ok(Collective {
        consumption,
        pay,
        cash_flow,
    })
}

/// Work W, the net output of human capital, by both routes:
/// ΔH + F(H) and Π + W_s − D(H).
pub fn work_output(account: &HumanCapitalAccount, delta_human: f64) -> Result<f64> {
    let growth_residual = identity_residual(
        delta_human,
        account.growth(),
        &[
            account.invested_consumption,
            account.self_invested_work,
            account.depreciation,
        ],
    );
    if growth_residual > PATH_TOLERANCE {
        return Err(Error::IdentityViolation {
            label: "human.growth",
            residual: growth_residual,
        });
    }
    let via_value = delta_human + account.cash_flow();
    let via_pay = account.pay + account.self_invested_work - account.depreciation;
    let residual = identity_residual(
        via_value,
        via_pay,
        &[
            delta_human,
            account.pay,
            account.invested_consumption,
            account.self_invested_work,
            account.depreciation,
        ],
    );
    if residual > PATH_TOLERANCE {
        return Err(Error::IdentityViolation {
            label: "human.work",
            residual,
        });
    }
    Ok(via_pay)
}

fn state_profit(state: &EconomyState) -> f64 {
    net_profit(state.delta_capital, state.consumption, state.pay()).unwrap_or(f64::NAN)
}

/// Net output from its uses, C + W_s − D(H) + ΔK, and from factor
/// incomes, Π + W_s − D(H) + P.
pub fn net_output_two_ways(state: &EconomyState) -> Result<(f64, f64)> {
    let h = &state.human;
    let profit = state_profit(state);
    let uses = state.consumption + h.unpaid_net_work() + state.delta_capital;
    let factors = state.pay() + h.unpaid_net_work() + profit;
    let residual = identity_residual(
        uses,
        factors,
        &[
            state.consumption,
            state.delta_capital,
            state.pay(),
            profit,
            h.self_invested_work,
            h.depreciation,
        ],
    );
    if residual.is_nan() || residual > PATH_TOLERANCE {
        return Err(Error::IdentityViolation {
            label: "output.uses_factors",
            residual,
        });
    }
    Ok((uses, factors))
}

/// Factor shares in net income, (W/Y, P/Y).
pub fn income_factor_shares(state: &EconomyState) -> Result<(f64, f64)> {
    let (output, _) = net_output_two_ways(state)?;
    let h = &state.human;
    let scale = [state.consumption, state.delta_capital, h.self_invested_work, h.depreciation]
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()));
    if output == 0.0 || output.abs() <= f64::EPSILON * scale {
        return Err(Error::DegenerateEconomy);
    }
    let work = state.pay() + h.unpaid_net_work();
    let profit = state_profit(state);
    let shares = (work / output, profit / output);
    let residual = identity_residual(shares.0 + shares.1, 1.0, &[shares.0, shares.1]);
    if residual > PATH_TOLERANCE {
        return Err(Error::IdentityViolation {
            label: "output.shares",
            residual,
        });
    }
    Ok(shares)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub label: &'static str,
    pub evaluations: usize,
    pub failures: usize,
    pub max_residual: f64,
    /// Where the first failure was seen, e.g. `year 3 household 7`.
    pub first_failure: Option<String>,
}

impl IdentityCheck {
    fn new(label: &'static str) -> Self {
        IdentityCheck {
            label,
            evaluations: 0,
            failures: 0,
            max_residual: 0.0,
            first_failure: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub tolerance: f64,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(IdentityCheck::passed)
    }

    pub fn check(&self, label: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.label == label)
    }

    pub fn failed_labels(&self) -> Vec<&'static str> {
        self.checks
            .iter()
            .filter(|c| !c.passed())
            .map(|c| c.label)
            .collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().fold(0.0, |m, c| m.max(c.max_residual))
    }

    /// Folds another report (same labels, same order) into this one.
    pub fn merge(&mut self, other: &IdentityReport) {
        for (mine, theirs) in self.checks.iter_mut().zip(&other.checks) {
            debug_assert_eq!(mine.label, theirs.label);
            mine.evaluations += theirs.evaluations;
            mine.failures += theirs.failures;
            mine.max_residual = mine.max_residual.max(theirs.max_residual);
            if mine.first_failure.is_none() {
                mine.first_failure.clone_from(&theirs.first_failure);
            }
        }
    }
}

impl fmt::Display for IdentityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            write!(
                f,
                "{:<22} {} max_residual={:.3e} evaluations={}",
                c.label,
                if c.passed() { "PASS" } else { "FAIL" },
                c.max_residual,
                c.evaluations
            )?;
            if let Some(at) = &c.first_failure {
                write!(f, " first_failure=\"{at}\"")?;
            }
            writeln!(f)?;
        }
        write!(
            f,
            "tolerance={:e} result={}",
            self.tolerance,
            if self.all_passed() { "PASS" } else { "FAIL" }
        )
    }
}

const LABELS: [&str; 22] = [
    "household.budget",
    "transfers.zero_sum",
    "households.cash_flow",
    "collective.cash_flow",
    "Agg.consumption",
    "Agg.pay",
    "Agg.cash_flow",
    "Stock.K",
    "Stock.H",
    "value.stocks",
    "output.total_return",
    "human.cash_flow",
    "human.growth",
    "human.work",
    "output.stock_flow",
    "consumption.split",
    "output.uses",
    "output.work_profit",
    "output.factors",
    "output.uses_factors",
    "profit.consumption",
    "output.shares",
];

struct Recorder {
    tolerance: f64,
    checks: Vec<IdentityCheck>,
}

impl Recorder {
    fn record(&mut self, label: &'static str, residual: f64, location: impl FnOnce() -> String) {
        let idx = LABELS.iter().position(|l| *l == label).expect("known label");
        let check = &mut self.checks[idx];
        check.evaluations += 1;
        // NaN residuals count as failures
        let ok = residual <= self.tolerance;
        check.max_residual = if residual.is_nan() {
            f64::INFINITY
        } else {
            check.max_residual.max(residual)
        };
        if !ok {
            check.failures += 1;
            if check.first_failure.is_none() {
                check.first_failure = Some(location());
            }
        }
    }
}

/// Evaluates every identity on every state and household.
pub fn verify_all_identities(economy: &Economy) -> IdentityReport {
    verify_with_tolerance(economy, IDENTITY_TOLERANCE)
}

pub fn verify_with_tolerance(economy: &Economy, tolerance: f64) -> IdentityReport {
    let mut rec = Recorder {
        tolerance,
        checks: LABELS.iter().map(|l| IdentityCheck::new(l)).collect(),
    };
    let mut prev_capital = economy.opening_capital;
    let mut prev_human = economy.opening_human;
    let mut prev_value = economy.opening_capital + economy.opening_human;

    for s in &economy.states {
        let year = s.year;
        let at = || format!("year {year}");
        let h = &s.human;

        for hh in &s.households {
            rec.record("household.budget", hh.residual(), || format!("year {year} household {}", hh.id));
        }
        let sum_c: f64 = s.households.iter().map(|x| x.consumption).sum();
        let sum_pay: f64 = s.households.iter().map(|x| x.pay).sum();
        let sum_f: f64 = s.households.iter().map(|x| x.cash_flow).sum();
        let sum_gamma: f64 = s.households.iter().map(|x| x.net_transfer).sum();
        rec.record("transfers.zero_sum", identity_residual(sum_gamma, 0.0, &[sum_c]), at);
        rec.record("households.cash_flow", identity_residual(sum_c - sum_pay, sum_f, &[sum_c, sum_pay]), at);
        rec.record(
            "collective.cash_flow",
            identity_residual(s.consumption - s.pay(), s.cash_flow, &[s.consumption, s.pay()]),
            at,
        );
        rec.record("Agg.consumption", identity_residual(s.consumption, sum_c, &[]), at);
        rec.record("Agg.pay", identity_residual(s.pay(), sum_pay, &[]), at);
        rec.record("Agg.cash_flow", identity_residual(s.cash_flow, sum_f, &[]), at);

        rec.record(
            "Stock.K",
            identity_residual(s.delta_capital, s.capital - prev_capital, &[s.capital, prev_capital]),
            at,
        );
        rec.record(
            "Stock.H",
            identity_residual(s.delta_human, h.stock - prev_human, &[h.stock, prev_human]),
            at,
        );
        rec.record("value.stocks", identity_residual(s.value, h.stock + s.capital, &[h.stock, s.capital]), at);

        let delta_value = s.value - prev_value;
        let y_value = delta_value + h.pure_consumption;
        let y_uses = s.consumption + h.self_invested_work - h.depreciation + s.delta_capital;
        let flow_terms = [
            s.consumption,
            s.delta_capital,
            h.self_invested_work,
            h.depreciation,
            h.pure_consumption,
            h.invested_consumption,
            s.delta_human,
        ];
        let value_terms = [s.value, prev_value, h.pure_consumption];
        rec.record(
            "output.total_return",
            identity_residual(y_value, y_uses, &[&flow_terms[..], &value_terms[..]].concat()),
            at,
        );
        rec.record(
            "human.cash_flow",
            identity_residual(s.human_cash_flow, h.pay - h.invested_consumption, &[h.pay, h.invested_consumption]),
            at,
        );
        rec.record(
            "human.growth",
            identity_residual(
                s.delta_human,
                h.invested_consumption + h.self_invested_work - h.depreciation,
                &[h.invested_consumption, h.self_invested_work, h.depreciation],
            ),
            at,
        );
        let work_via_value = s.delta_human + s.human_cash_flow;
        let work_via_pay = h.pay + h.self_invested_work - h.depreciation;
        rec.record(
            "human.work",
            identity_residual(
                work_via_value,
                work_via_pay,
                &[s.delta_human, s.human_cash_flow, h.pay, h.self_invested_work, h.depreciation],
            ),
            at,
        );

        let stock_side = s.delta_human + s.delta_capital + h.pure_consumption;
        let flow_side = h.invested_consumption + h.self_invested_work - h.depreciation
            + s.delta_capital
            + h.pure_consumption;
        let all_terms = [&flow_terms[..], &value_terms[..]].concat();
        let stock_flow = identity_residual(y_value, stock_side, &all_terms)
            .max(identity_residual(stock_side, flow_side, &flow_terms))
            .max(identity_residual(
                s.human_cash_flow + s.cash_flow,
                h.pure_consumption,
                &[s.human_cash_flow, s.cash_flow],
            ));
        rec.record("output.stock_flow", stock_flow, at);
        rec.record(
            "consumption.split",
            identity_residual(
                h.invested_consumption + h.pure_consumption,
                s.consumption,
                &[h.invested_consumption, h.pure_consumption],
            ),
            at,
        );
        rec.record("output.uses", identity_residual(y_value, y_uses, &all_terms), at);

        let profit = state_profit(s);
        let profit_terms = [profit, s.pay(), s.consumption, s.delta_capital];
        let with_profit = [&all_terms[..], &profit_terms[..], &[s.human_cash_flow][..]].concat();
        rec.record(
            "output.work_profit",
            identity_residual(y_value, work_via_value + profit, &with_profit),
            at,
        );
        let y_factors = s.pay() + h.self_invested_work - h.depreciation + profit;
        rec.record("output.factors", identity_residual(y_factors, y_value, &with_profit), at);
        rec.record("output.uses_factors", identity_residual(y_uses, y_factors, &with_profit), at);
        rec.record(
            "profit.consumption",
            identity_residual(s.consumption + s.delta_capital, s.pay() + profit, &profit_terms),
            at,
        );

        let work_share = work_via_value / y_value;
        let profit_share = profit / y_value;
        let formula = (s.pay() + h.self_invested_work - h.depreciation)
            / (s.consumption + s.delta_capital + h.self_invested_work - h.depreciation);
        let shares = identity_residual(work_share + profit_share, 1.0, &[work_share, profit_share])
            .max(identity_residual(work_share, formula, &[]));
        rec.record("output.shares", shares, at);

        prev_capital = s.capital;
        prev_human = h.stock;
        prev_value = s.value;
    }

    IdentityReport {
        tolerance,
        checks: rec.checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flows(c: f64, pi: f64, dk: f64, cs: f64, ws: f64, d: f64) -> CollectiveFlows {
        CollectiveFlows {
            consumption: c,
            pay: pi,
            delta_capital: dk,
            invested_consumption: cs,
            self_invested_work: ws,
            depreciation: d,
        }
    }

    #[test]
    fn single_household_has_zero_transfer() {
        let e = generate_economy(1, 1, 2, &EconomyConfig::default()).unwrap();
        assert_eq!(e.states.len(), 2);
        for s in &e.states {
            assert_eq!(s.households.len(), 1);
            assert_eq!(s.households[0].net_transfer, 0.0);
        }
        assert!(verify_all_identities(&e).all_passed());
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = EconomyConfig::default();
        let a = generate_economy(42, 50, 20, &cfg).unwrap();
        let b = generate_economy(42, 50, 20, &cfg).unwrap();
        assert_eq!(a, b);
        let c = generate_economy(43, 50, 20, &cfg).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn generator_rejects_bad_shapes() {
        let cfg = EconomyConfig::default();
        assert!(matches!(generate_economy(1, 0, 5, &cfg), Err(Error::InvalidConfig(_))));
        assert!(matches!(generate_economy(1, 5, 1, &cfg), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn infeasible_config_errors_after_retries() {
        let cfg = EconomyConfig {
            invested_share: Bounds::new(1.5, 2.0),
            max_retries: 5,
            ..Default::default()
        };
        assert!(matches!(
            generate_economy(7, 3, 3, &cfg),
            Err(Error::GeneratorInfeasible(_))
        ));
    }

    #[test]
    fn occasionally_infeasible_draws_are_resampled() {
        // roughly a third of draws give negative C_s; retries absorb them
        let cfg = EconomyConfig {
            invested_share: Bounds::new(-0.1, 0.2),
            ..Default::default()
        };
        let e = generate_economy(11, 10, 30, &cfg).unwrap();
        assert!(e.states.iter().all(|s| s.human.invested_consumption >= 0.0));
        assert!(verify_all_identities(&e).all_passed());
    }

    #[test]
    fn aggregate_two_households() {
        let a = HouseholdLedger::balanced(0, 50.0, 10.0, 5.0);
        let b = HouseholdLedger::balanced(1, 50.0, 10.0, -5.0);
        assert_eq!((a.consumption, b.consumption), (55.0, 65.0));
        let c = aggregate_households(&[a, b]).unwrap();
        assert_eq!((c.consumption, c.pay, c.cash_flow), (120.0, 100.0, 20.0));
        assert_eq!(c.consumption - c.pay, c.cash_flow);
    }

    #[test]
    fn aggregate_one_household() {
        let a = HouseholdLedger::balanced(0, 70.0, 30.0, 0.0);
        let c = aggregate_households(&[a]).unwrap();
        assert_eq!(c.consumption, 100.0);
    }

    #[test]
    fn aggregate_rejects_unbalanced_transfers() {
        let a = HouseholdLedger::balanced(0, 50.0, 10.0, 5.0);
        let b = HouseholdLedger::balanced(1, 50.0, 10.0, 0.0);
        assert!(matches!(
            aggregate_households(&[a, b]),
            Err(Error::TransferImbalance { .. })
        ));
    }

    #[test]
    fn aggregate_seeded_economy() {
        let e = generate_economy(42, 50, 20, &EconomyConfig::default()).unwrap();
        for s in &e.states {
            let c = aggregate_households(&s.households).unwrap();
            assert!(identity_residual(c.consumption - c.pay, c.cash_flow, &[c.consumption, c.pay]) <= 1e-9);
        }
    }

    fn account(pay: f64, cs: f64, ws: f64, d: f64) -> HumanCapitalAccount {
        HumanCapitalAccount {
            stock: 1000.0,
            pay,
            invested_consumption: cs,
            pure_consumption: 50.0,
            self_invested_work: ws,
            depreciation: d,
        }
    }

    #[test]
    fn work_output_examples() {
        let acc = account(100.0, 20.0, 20.0, 20.0);
        assert_eq!(acc.growth(), 20.0);
        assert_eq!(acc.cash_flow(), 80.0);
        assert_eq!(work_output(&acc, 20.0).unwrap(), 100.0);

        let acc = account(100.0, 0.0, 30.0, 10.0);
        assert_eq!(work_output(&acc, 20.0).unwrap(), 120.0);

        assert!(matches!(
            work_output(&acc, 25.0),
            Err(Error::IdentityViolation { label: "human.growth", .. })
        ));
    }

    #[test]
    fn work_output_paths_agree_on_seeded_accounts() {
        let e = generate_economy(5, 20, 30, &EconomyConfig::default()).unwrap();
        for s in &e.states {
            let w = work_output(&s.human, s.delta_human).unwrap();
            let alt = s.delta_human + s.human_cash_flow;
            assert!(identity_residual(w, alt, &[s.delta_human, s.human_cash_flow, s.human.pay]) <= 1e-12);
        }
    }

    #[test]
    fn stationary_net_output_is_consumption() {
        let s = EconomyState::from_flows(1, 1000.0, 5000.0, flows(100.0, 70.0, 0.0, 20.0, 10.0, 10.0));
        let (uses, factors) = net_output_two_ways(&s).unwrap();
        assert_eq!((uses, factors), (100.0, 100.0));
    }

    #[test]
    fn net_output_worked_example() {
        let s = EconomyState::from_flows(1, 1000.0, 5000.0, flows(100.0, 70.0, 20.0, 10.0, 15.0, 5.0));
        assert_eq!(net_profit(s.delta_capital, s.consumption, s.pay()).unwrap(), 50.0);
        let (uses, factors) = net_output_two_ways(&s).unwrap();
        assert_eq!((uses, factors), (130.0, 130.0));
        let (w, p) = income_factor_shares(&s).unwrap();
        assert_eq!((w, p), (80.0 / 130.0, 50.0 / 130.0));
    }

    #[test]
    fn income_shares_collapse_to_consumption_shares() {
        let s = EconomyState::from_flows(1, 1000.0, 5000.0, flows(100.0, 70.0, 0.0, 10.0, 8.0, 8.0));
        let (w, p) = income_factor_shares(&s).unwrap();
        assert!((w - 0.7).abs() < 1e-15 && (p - 0.3).abs() < 1e-15);
    }

    #[test]
    fn zero_output_is_degenerate() {
        let s = EconomyState::from_flows(1, 1000.0, 5000.0, flows(100.0, 70.0, -100.0, 10.0, 0.0, 0.0));
        assert!(matches!(income_factor_shares(&s), Err(Error::DegenerateEconomy)));
    }

    #[test]
    fn worked_states_pass_verifier() {
        let s = EconomyState::from_flows(1, 1000.0, 5000.0, flows(100.0, 70.0, 20.0, 10.0, 15.0, 5.0));
        let e = Economy {
            seed: 0,
            opening_capital: 1000.0,
            opening_human: 5000.0,
            states: vec![s],
        };
        let report = verify_all_identities(&e);
        assert!(report.all_passed(), "{report}");
    }

    #[test]
    fn perturbed_household_consumption_is_isolated() {
        let mut e = generate_economy(42, 50, 20, &EconomyConfig::default()).unwrap();
        e.states[3].households[7].consumption += 1.0;
        let report = verify_all_identities(&e);
        assert_eq!(
            report.failed_labels(),
            vec!["household.budget", "households.cash_flow", "Agg.consumption"]
        );
        let budget = report.check("household.budget").unwrap();
        assert_eq!(budget.failures, 1);
        assert_eq!(budget.first_failure.as_deref(), Some("year 4 household 7"));
        for label in ["human.cash_flow", "human.growth", "human.work"] {
            assert!(report.check(label).unwrap().passed());
        }
    }

    #[test]
    fn report_renders_one_line_per_identity() {
        let e = generate_economy(3, 4, 3, &EconomyConfig::default()).unwrap();
        let text = verify_all_identities(&e).to_string();
        assert_eq!(text.lines().count(), LABELS.len() + 1);
        assert!(text.lines().next().unwrap().starts_with("household.budget"));
        assert!(text.ends_with("result=PASS"));
    }
}
