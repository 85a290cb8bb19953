//! Run configuration and the concrete parameter set derived from it.
//!
//! All tuning constants are exact rationals so that sampling probabilities,
//! emitted weights, and threshold comparisons stay bit-reproducible; nothing
//! on the ingest or extraction path compares floating-point numbers.

use num::rational::Ratio;
use num::{One, ToPrimitive, Zero};

/// Exact nonnegative rational.
pub type Rat = Ratio<u128>;

/// Shorthand constructor.
pub fn rat(num: u128, den: u128) -> Rat {
    Ratio::new(num, den)
}

/// Parses "2", "0.25", or "3/32" into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: u128 = num.trim().parse().map_err(|_| format!("bad numerator in {s:?}"))?;
        let d: u128 = den.trim().parse().map_err(|_| format!("bad denominator in {s:?}"))?;
        if d == 0 {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(rat(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let int_part: u128 = if int.is_empty() {
            0
        } else {
            int.parse().map_err(|_| format!("bad integer part in {s:?}"))?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("bad fractional part in {s:?}"));
        }
        if frac.len() > 18 {
            return Err(format!("too many decimal digits in {s:?}"));
        }
        let digits: u128 = frac.parse().map_err(|_| format!("bad fractional part in {s:?}"))?;
        let scale = 10u128.pow(frac.len() as u32);
        return Ok(rat(int_part * scale + digits, scale));
    }
    let n: u128 = s.parse().map_err(|_| format!("not a rational: {s:?}"))?;
    Ok(Rat::from_integer(n))
}

/// Smallest d >= 0 with 2^d >= r.
pub fn ceil_log2(r: &Rat) -> u32 {
    assert!(!r.is_zero(), "ceil_log2 of zero");
    let mut d = 0u32;
    let mut pow = Rat::one();
    let two = Rat::from_integer(2);
    while pow < *r {
        pow *= &two;
        d += 1;
        assert!(d < 128, "ceil_log2 overflow");
    }
    d
}

/// Ceiling of a rational as u64.
pub fn ceil_u64(r: &Rat) -> u64 {
    r.ceil().to_integer().to_u64().expect("parameter out of u64 range")
}

fn ceil_log2_int(n: u64) -> u32 {
    assert!(n > 0);
    let mut d = 0;
    while (1u64 << d) < n {
        d += 1;
    }
    d
}

/// Named constant bundles. `Paper` keeps the analysis-grade values; `Desk`
/// shrinks the oversampling so the probabilistic paths are exercised on
/// graphs small enough to check against the exact oracle.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Profile {
    Paper,
    Desk,
}

impl Profile {
    pub fn parse(s: &str) -> Result<Profile, String> {
        match s {
            "paper" => Ok(Profile::Paper),
            "desk" => Ok(Profile::Desk),
            other => Err(format!("unknown profile {other:?} (expected paper|desk)")),
        }
    }
}

/// What to do when a with-high-probability step fails at runtime.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FailurePolicy {
    /// Fail the extraction with a typed error.
    Strict,
    /// Downgrade to warnings; stuck vertex sets fall back to exact
    /// (rate-1) recovery, trading output size for correctness.
    BestEffort,
}

/// User-facing knobs. Any field left `None` takes the profile default.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub epsilon: Rat,
    pub seed: u64,
    pub profile: Profile,
    /// Oversampling factor in the emission probability `gamma*log^2(n)/(eps^2*2^a)`.
    pub gamma: Option<Rat>,
    /// Slack factor in the peel threshold `4*alpha*log^3(n)/eps^2`.
    pub alpha: Option<Rat>,
    /// Recovery budget factor: `k = ceil(kappa*log^3(n)/eps^2)`.
    pub kappa: Option<Rat>,
    /// Constant in the lower connectivity-level check used by diagnostics.
    pub beta: Option<Rat>,
    /// Number of connectivity sketch copies per exponent (default 8*ceil(log2 n)).
    pub copies_connectivity: Option<u32>,
    /// Number of recovery/degree sketch rounds per exponent (default 8*ceil(log2 n)).
    pub copies_recovery: Option<u32>,
    /// Largest sampling exponent (default 2*ceil(log2 n)).
    pub a_max: Option<u32>,
    /// Per-key independence degree of the hash families.
    pub independence: Option<u32>,
    /// Exponent of the log factor in the default independence degree (3 or 4).
    pub independence_power: u32,
    /// Coefficient c in `t = ceil(c*log^p(n)/eps^2)`.
    pub independence_coeff: Option<Rat>,
    /// Coefficient in the degree-sketch projection count `ceil(c*log2(n)/eps^2)`.
    pub projection_coeff: Option<Rat>,
    /// Rows in each recovery sketch (default max(4, ceil(log2 n))).
    pub recovery_rows: Option<u32>,
    /// Validate stream discipline against a shadow edge set.
    pub checked: bool,
    pub failure_policy: FailurePolicy,
    /// Memoize ordered hash evaluations during one extraction pass.
    pub cache_hash_evals: bool,
}

impl RunConfig {
    pub fn new(profile: Profile, epsilon: Rat, seed: u64) -> Self {
        RunConfig {
            epsilon,
            seed,
            profile,
            gamma: None,
            alpha: None,
            kappa: None,
            beta: None,
            copies_connectivity: None,
            copies_recovery: None,
            a_max: None,
            independence: None,
            independence_power: 3,
            independence_coeff: None,
            projection_coeff: None,
            recovery_rows: None,
            checked: false,
            failure_policy: FailurePolicy::Strict,
            cache_hash_evals: false,
        }
    }

    pub fn paper(epsilon: Rat, seed: u64) -> Self {
        Self::new(Profile::Paper, epsilon, seed)
    }

    pub fn desk(epsilon: Rat, seed: u64) -> Self {
        Self::new(Profile::Desk, epsilon, seed)
    }
}

/// Everything the bank needs for a concrete vertex count, with profile
/// defaults and overrides resolved.
#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub n: u32,
    /// ceil(log2 n), clamped to at least 1; the "log n" of every formula.
    pub log_n: u32,
    pub epsilon: Rat,
    pub seed: u64,
    pub gamma: Rat,
    pub alpha: Rat,
    pub kappa: Rat,
    pub beta: Rat,
    /// Sampling exponents run 0..=a_max; exponent 0 sees every update.
    pub a_max: u32,
    /// Connectivity copies b per exponent.
    pub copies_connectivity: u32,
    /// Recovery/degree rounds r per exponent.
    pub copies_recovery: u32,
    /// Exponent shift between an edge's level and the sketch it is decoded
    /// from: ceil(log2(gamma*log^2(n)/eps^2)).
    pub delta: u32,
    /// Recovery-side sketches are stored at exponents 0..=exp_max.
    pub exp_max: u32,
    /// Sparsity budget of each recovery sketch.
    pub k: u64,
    /// Buckets per recovery row (2k).
    pub buckets: u64,
    pub recovery_rows: u32,
    /// Cauchy projections per degree sketch.
    pub projections: u32,
    /// Per-key independence degree of the sampling hash families.
    pub independence: u32,
    /// Merge rounds available to the forest extraction.
    pub boruvka_rounds: u32,
    /// Supernodes at or below this estimated boundary degree are peeled.
    pub peel_threshold: Rat,
    pub checked: bool,
    pub failure_policy: FailurePolicy,
    pub cache_hash_evals: bool,
}

impl Params {
    pub fn derive(n: u32, cfg: &RunConfig) -> Params {
        assert!(n >= 1, "vertex count must be positive");
        assert!(
            cfg.epsilon > Rat::zero() && cfg.epsilon <= Rat::one(),
            "epsilon must lie in (0, 1]"
        );
        let log_n = ceil_log2_int(n.max(2) as u64).max(1);
        let l = Rat::from_integer(log_n as u128);
        let eps_sq = &cfg.epsilon * &cfg.epsilon;

        let desk = cfg.profile == Profile::Desk;
        let gamma = cfg.gamma.clone().unwrap_or(if desk { rat(1, 16) } else { rat(2, 1) });
        let alpha = cfg.alpha.clone().unwrap_or(rat(2, 1));
        // Desk kappa keeps k above the largest residual a recover pass can
        // meet at small n: the first supernode processed decodes its whole
        // rate-1 boundary, up to (n/2)^2 * density edges.
        let kappa = cfg.kappa.clone().unwrap_or(if desk { rat(1, 1) } else { rat(4, 1) });
        let beta = cfg.beta.clone().unwrap_or(rat(2, 1));
        let copies_default = if desk { 4 * log_n } else { 8 * log_n };
        let copies_connectivity = cfg.copies_connectivity.unwrap_or(copies_default).max(1);
        let copies_recovery = cfg.copies_recovery.unwrap_or(copies_default).max(1);
        let a_max = cfg.a_max.unwrap_or(2 * log_n);

        // gamma * log^2 n / eps^2: the oversampling mass in the emission rate.
        let rho_base = &gamma * &l * &l / &eps_sq;
        let delta = if rho_base <= Rat::one() { 0 } else { ceil_log2(&rho_base) };
        let exp_max = a_max.saturating_sub(delta);

        let k = ceil_u64(&(&kappa * &l * &l * &l / &eps_sq)).max(2);
        let recovery_rows = cfg.recovery_rows.unwrap_or_else(|| log_n.max(4));
        let proj_coeff = cfg
            .projection_coeff
            .clone()
            .unwrap_or(if desk { rat(2, 1) } else { rat(3, 1) });
        let projections = ceil_u64(&(&proj_coeff * &l / &eps_sq)).max(4) as u32;
        let independence = cfg.independence.unwrap_or_else(|| {
            let c = cfg.independence_coeff.clone().unwrap_or_else(Rat::one);
            let mut pow = Rat::one();
            for _ in 0..cfg.independence_power {
                pow *= &l;
            }
            if desk {
                8
            } else {
                ceil_u64(&(c * pow / &eps_sq)).max(2) as u32
            }
        });

        let peel_threshold = rat(4, 1) * &alpha * &l * &l * &l / &eps_sq;

        Params {
            n,
            log_n,
            epsilon: cfg.epsilon.clone(),
            seed: cfg.seed,
            gamma,
            alpha,
            kappa,
            beta,
            a_max,
            copies_connectivity,
            copies_recovery,
            delta,
            exp_max,
            k,
            buckets: 2 * k,
            recovery_rows,
            projections,
            independence: independence.max(2),
            boruvka_rounds: log_n + 2,
            peel_threshold,
            checked: cfg.checked,
            failure_policy: cfg.failure_policy,
            cache_hash_evals: cfg.cache_hash_evals,
        }
    }

    /// Emission rate `gamma*log^2(n)/(eps^2*2^a)` before capping at 1.
    pub fn rho(&self, a: u32) -> Rat {
        let l = Rat::from_integer(self.log_n as u128);
        let eps_sq = &self.epsilon * &self.epsilon;
        &self.gamma * &l * &l / (eps_sq * Rat::from_integer(1u128 << a.min(100)))
    }

    /// Probability with which a level-a edge is kept.
    pub fn sample_probability(&self, a: u32) -> Rat {
        let rho = self.rho(a);
        if rho >= Rat::one() {
            Rat::one()
        } else {
            rho
        }
    }

    /// Weight carried by an emitted level-a edge: 1/p_a.
    pub fn weight(&self, a: u32) -> Rat {
        self.sample_probability(a).recip()
    }

    /// Exponent of the recovery-side sketches used for level a.
    pub fn recovery_exponent(&self, a: u32) -> u32 {
        a.saturating_sub(self.delta)
    }
}
