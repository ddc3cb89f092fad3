//! Proportions of individuals (or settings) with net benefit, negligible effect
//! or net harm when true effects vary around the posterior mean.
//!
//! An individual whose true effect deviates by `d` from the mean is assigned the
//! expected utility of the posterior shifted by `d`, so the uncertainty in the
//! mean stays in every individual's utility. Deviations are Gaussian with the
//! given SD on the analysis scale. Utilities at or above `+utility_threshold`
//! count as net benefit, at or below `-utility_threshold` as net harm.
//!
//! Expected utility is nondecreasing in the location of the posterior, so the
//! analytic path solves for the two crossing locations and reads the
//! proportions off the Gaussian CDF. The Monte Carlo path draws deviations
//! directly and is kept as an independent check.

use crate::dist::{std_normal_cdf, LocationScale};
use crate::error::{Error, Result};
use crate::inference::band_probabilities_of;
use crate::magnitudes::{points_table, MagnitudeScale};
use crate::posterior::Posterior;
use crate::utility::{check_f_harm, main_utility};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const DEFAULT_UTILITY_THRESHOLD: f64 = 1.0;
pub const DEFAULT_MC_DRAWS: u64 = 100_000;
pub const DEFAULT_MC_SEED: u64 = 20_251_109;
pub const MIN_MC_DRAWS: u64 = 10_000;
pub const MAX_MC_DRAWS: u64 = 10_000_000;
const CHUNK: u64 = 4_096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeterogeneityKind {
    /// Between-individual SD of true responses (SD_IR).
    Individual,
    /// Between-setting SD of true effects (tau).
    Setting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Analytic,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeterogeneitySpec {
    pub kind: HeterogeneityKind,
    /// On the analysis scale.
    pub sd: f64,
    pub utility_threshold: f64,
}

impl HeterogeneitySpec {
    pub fn new(kind: HeterogeneityKind, sd: f64) -> Self {
        HeterogeneitySpec {
            kind,
            sd,
            utility_threshold: DEFAULT_UTILITY_THRESHOLD,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.sd.is_finite() {
            return Err(Error::validation("sd", "must be finite"));
        }
        if self.sd < 0.0 {
            return Err(Error::validation(
                "sd",
                format!("{} is negative; a negative variance estimate must be clamped at zero", self.sd),
            ));
        }
        if !(self.utility_threshold.is_finite() && self.utility_threshold > 0.0) {
            return Err(Error::validation("utility_threshold", format!("{} must be positive", self.utility_threshold)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McSettings {
    pub draws: u64,
    pub seed: u64,
}

impl Default for McSettings {
    fn default() -> Self {
        McSettings {
            draws: DEFAULT_MC_DRAWS,
            seed: DEFAULT_MC_SEED,
        }
    }
}

impl McSettings {
    pub fn validate(&self) -> Result<()> {
        if self.draws < MIN_MC_DRAWS {
            return Err(Error::validation("draws", format!("{} is below the minimum of {MIN_MC_DRAWS}", self.draws)));
        }
        if self.draws > MAX_MC_DRAWS {
            return Err(Error::validation("draws", format!("{} exceeds the maximum of {MAX_MC_DRAWS}", self.draws)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeterogeneityResult {
    pub kind: HeterogeneityKind,
    pub sd: f64,
    pub p_net_benefit: f64,
    pub p_negligible: f64,
    pub p_net_harm: f64,
    /// SD of individual utilities.
    pub sd_utilities: f64,
    pub method: Method,
    pub mc_draws: Option<u64>,
    pub mc_seed: Option<u64>,
    /// Largest binomial standard error of the three proportions, each computed
    /// from the smoothed proportion `(count + 1) / (draws + 2)`.
    pub mc_se: Option<f64>,
}

/// SD of individual responses from the SDs of change scores in the two groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdIr {
    pub sd_ir: f64,
    pub warning: Option<String>,
}

pub fn sdir_from_change_scores(sd_exp: f64, sd_ctl: f64) -> Result<SdIr> {
    for (name, v) in [("sd_exp", sd_exp), ("sd_ctl", sd_ctl)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::validation(name, format!("{v} must be positive")));
        }
    }
    let diff = sd_exp * sd_exp - sd_ctl * sd_ctl;
    Ok(if diff > 0.0 {
        SdIr {
            sd_ir: diff.sqrt(),
            warning: None,
        }
    } else if diff == 0.0 {
        SdIr { sd_ir: 0.0, warning: None }
    } else {
        SdIr {
            sd_ir: 0.0,
            warning: Some(format!(
                "change-score SD is smaller in the experimental group ({sd_exp} < {sd_ctl}); the intervention may reduce variability; SD_IR set to 0"
            )),
        }
    })
}

/// Gaussian summary of the true effect in a random individual or setting:
/// the posterior location with spread `sqrt(se^2 + sd^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndividualDistribution {
    pub location: f64,
    pub spread: f64,
    pub df: Option<u32>,
}

pub fn individual_distribution(post: &Posterior, spec: &HeterogeneitySpec) -> IndividualDistribution {
    IndividualDistribution {
        location: post.mean,
        spread: post.se.hypot(spec.sd),
        df: post.df,
    }
}

/// Expected utility of an individual as a function of the benefit-oriented location.
#[derive(Debug, Clone)]
pub struct IndividualUtility<'a> {
    post: Posterior,
    scale: &'a MagnitudeScale,
    f_harm: f64,
    eu_side: f64,
}

impl<'a> IndividualUtility<'a> {
    pub fn new(post: &Posterior, scale: &'a MagnitudeScale, f_harm: f64, eu_side: f64) -> Self {
        IndividualUtility {
            post: *post,
            scale,
            f_harm,
            eu_side,
        }
    }

    /// Benefit-oriented location of the posterior.
    pub fn centre(&self) -> f64 {
        self.scale.oriented(self.post.mean)
    }

    pub fn at(&self, location: f64) -> f64 {
        let d = LocationScale::new(location, self.post.se, self.post.shape());
        main_utility(&band_probabilities_of(&d, self.scale).p, self.f_harm) + self.eu_side
    }

    fn lowest(&self) -> f64 {
        -10.0 * self.f_harm + self.eu_side
    }

    fn highest(&self) -> f64 {
        10.0 + self.eu_side
    }

    /// Smallest location with utility >= `level` (`+inf` if never reached).
    fn first_at_least(&self, level: f64) -> f64 {
        if self.highest() < level {
            return f64::INFINITY;
        }
        if self.lowest() >= level {
            return f64::NEG_INFINITY;
        }
        self.bisect(|u| u >= level)
    }

    /// Largest location with utility <= `level` (`-inf` if never reached).
    fn last_at_most(&self, level: f64) -> f64 {
        if self.lowest() > level {
            return f64::NEG_INFINITY;
        }
        if self.highest() <= level {
            return f64::INFINITY;
        }
        self.bisect(|u| u > level)
    }

    /// Boundary of the monotone predicate `pred(utility(x))`, false below and true above.
    fn bisect(&self, pred: impl Fn(f64) -> bool) -> f64 {
        let width = self.scale.extremely_large_threshold() + self.post.se;
        let mut lo = -width;
        let mut hi = width;
        while pred(self.at(lo)) {
            lo -= 2.0 * (hi - lo);
        }
        while !pred(self.at(hi)) {
            hi += 2.0 * (hi - lo);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if pred(self.at(mid)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Proportions with net benefit, negligible effect and net harm.
///
/// Uses the analytic path unless Monte Carlo settings are given.
pub fn response_proportions(
    post: &Posterior,
    scale: &MagnitudeScale,
    f_harm: f64,
    eu_side: f64,
    spec: &HeterogeneitySpec,
    mc: Option<McSettings>,
) -> Result<HeterogeneityResult> {
    check_f_harm(f_harm)?;
    spec.validate()?;
    let model = IndividualUtility::new(post, scale, f_harm, eu_side);
    match mc {
        None => Ok(analytic(&model, spec)),
        Some(mc) => {
            mc.validate().map_err(|e| e.in_field("mc"))?;
            Ok(monte_carlo(&model, spec, mc))
        }
    }
}

fn classify(u: f64, thr: f64) -> (f64, f64, f64) {
    if u >= thr {
        (1.0, 0.0, 0.0)
    } else if u <= -thr {
        (0.0, 0.0, 1.0)
    } else {
        (0.0, 1.0, 0.0)
    }
}

fn analytic(model: &IndividualUtility, spec: &HeterogeneitySpec) -> HeterogeneityResult {
    let mu = model.centre();
    let thr = spec.utility_threshold;
    let (p_net_benefit, p_negligible, p_net_harm, sd_utilities) = if spec.sd == 0.0 {
        let (b, n, h) = classify(model.at(mu), thr);
        (b, n, h, 0.0)
    } else {
        let to_z = |x: f64| (x - mu) / spec.sd;
        let benefit_from = model.first_at_least(thr);
        let harm_to = model.last_at_most(-thr);
        let b = std_normal_cdf(-to_z(benefit_from));
        let h = std_normal_cdf(to_z(harm_to));
        let n = (1.0 - b - h).max(0.0);
        (b, n, h, utility_sd(model, mu, spec.sd))
    };
    HeterogeneityResult {
        kind: spec.kind,
        sd: spec.sd,
        p_net_benefit,
        p_negligible,
        p_net_harm,
        sd_utilities,
        method: Method::Analytic,
        mc_draws: None,
        mc_seed: None,
        mc_se: None,
    }
}

/// SD of `model.at(mu + sd * Z)` for standard normal `Z`.
fn utility_sd(model: &IndividualUtility, mu: f64, sd: f64) -> f64 {
    if model.post.se == 0.0 {
        // Utilities are the band points: exact band probabilities under N(mu, sd).
        let d = LocationScale::new(mu, sd, crate::dist::Shape::GAUSSIAN);
        let p = band_probabilities_of(&d, model.scale).p;
        let pts = points_table(model.f_harm);
        let m: f64 = p.iter().zip(pts).map(|(p, x)| p * x).sum();
        let v: f64 = p.iter().zip(pts).map(|(p, x)| p * (x - m) * (x - m)).sum();
        return v.max(0.0).sqrt();
    }
    // Composite Simpson on z in [-10, 10]; the integrand is smooth when se > 0.
    let n = 2_000;
    let h = 20.0 / n as f64;
    let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
    for i in 0..=n {
        let z = -10.0 + i as f64 * h;
        let w = match i {
            0 => 1.0,
            i if i == n => 1.0,
            i if i % 2 == 1 => 4.0,
            _ => 2.0,
        } * (-0.5 * z * z).exp();
        let u = model.at(mu + sd * z);
        s0 += w;
        s1 += w * u;
        s2 += w * u * u;
    }
    let m = s1 / s0;
    (s2 / s0 - m * m).max(0.0).sqrt()
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    n: u64,
    benefit: u64,
    harm: u64,
    mean: f64,
    m2: f64,
}

impl Tally {
    fn push(&mut self, u: f64, thr: f64) {
        self.n += 1;
        if u >= thr {
            self.benefit += 1;
        } else if u <= -thr {
            self.harm += 1;
        }
        let delta = u - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (u - self.mean);
    }

    fn merge(self, other: Tally) -> Tally {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        Tally {
            n,
            benefit: self.benefit + other.benefit,
            harm: self.harm + other.harm,
            mean: self.mean + delta * other.n as f64 / n as f64,
            m2: self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64,
        }
    }
}

/// Stream for one chunk of draws; chunks are independent of how they are scheduled.
fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

fn monte_carlo(model: &IndividualUtility, spec: &HeterogeneitySpec, mc: McSettings) -> HeterogeneityResult {
    let mu = model.centre();
    let thr = spec.utility_threshold;
    let chunks = mc.draws.div_ceil(CHUNK);
    let tallies: Vec<Tally> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(mc.seed, c);
            let len = CHUNK.min(mc.draws - c * CHUNK);
            let mut t = Tally::default();
            for _ in 0..len {
                let z: f64 = StandardNormal.sample(&mut rng);
                t.push(model.at(mu + spec.sd * z), thr);
            }
            t
        })
        .collect();
    let total = tallies.into_iter().fold(Tally::default(), Tally::merge);
    let n = total.n as f64;
    let p_net_benefit = total.benefit as f64 / n;
    let p_net_harm = total.harm as f64 / n;
    // Smoothed (x + 1) / (n + 2) so that a class with no draws still gets a nonzero SE.
    let se = |count: u64| {
        let p = (count as f64 + 1.0) / (n + 2.0);
        (p * (1.0 - p) / n).sqrt()
    };
    let negligible = total.n - total.benefit - total.harm;
    HeterogeneityResult {
        kind: spec.kind,
        sd: spec.sd,
        p_net_benefit,
        p_net_harm,
        sd_utilities: (total.m2 / n).sqrt(),
        method: Method::MonteCarlo,
        mc_draws: Some(mc.draws),
        mc_seed: Some(mc.seed),
        p_negligible: negligible as f64 / n,
        mc_se: Some(se(total.benefit).max(se(negligible)).max(se(total.harm))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoStepResult {
    pub setting: HeterogeneityResult,
    pub individual: HeterogeneityResult,
    /// Analysis-scale shift applied to the posterior mean for the individual step.
    pub setting_mean_shift: f64,
}

/// Setting-level spread first, then individual spread in a setting whose mean is shifted.
///
/// The posterior SE is kept throughout; only the location moves.
#[allow(clippy::too_many_arguments)]
pub fn two_step_meta(
    post: &Posterior,
    scale: &MagnitudeScale,
    f_harm: f64,
    eu_side: f64,
    tau: f64,
    sd_ir: f64,
    setting_mean_shift: f64,
    utility_threshold: f64,
    mc: Option<McSettings>,
) -> Result<TwoStepResult> {
    if !setting_mean_shift.is_finite() {
        return Err(Error::validation("setting_mean_shift", "must be finite"));
    }
    let setting_spec = HeterogeneitySpec {
        kind: HeterogeneityKind::Setting,
        sd: tau,
        utility_threshold,
    };
    let individual_spec = HeterogeneitySpec {
        kind: HeterogeneityKind::Individual,
        sd: sd_ir,
        utility_threshold,
    };
    let setting = response_proportions(post, scale, f_harm, eu_side, &setting_spec, mc).map_err(|e| e.in_field("tau"))?;
    let shifted = post.with_mean(post.mean + setting_mean_shift);
    let individual =
        response_proportions(&shifted, scale, f_harm, eu_side, &individual_spec, mc).map_err(|e| e.in_field("sd_ir"))?;
    Ok(TwoStepResult {
        setting,
        individual,
        setting_mean_shift,
    })
}
