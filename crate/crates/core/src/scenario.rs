//! Random SC/NFP deployments.
//!
//! Points come from a homogeneous Poisson parent process on a rectangle,
//! thinned by a hard-core rule. SCs use mutual deletion (Matérn type I);
//! NFPs default to sequential inhibition because at the coverage-radius
//! separation mutual deletion leaves essentially no survivors.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{path_loss_at, ChannelEnv, ChannelError};
use crate::model::ProblemInstance;

/// Default number of parent-process redraws before giving up.
pub const DEFAULT_PARENT_DRAWS: u32 = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("invalid region {width} x {height}")]
    InvalidRegion { width: f64, height: f64 },
    #[error("invalid placement parameters: {0}")]
    InvalidParams(String),
    #[error("only {best} of {needed} points survived thinning after {attempts} parent draws")]
    AttemptsExhausted { attempts: u32, best: usize, needed: usize },
    #[error("no coverage: path loss {at_zero:.3} dB directly below the NFP exceeds {pl_max:.3} dB")]
    NoCoverage { at_zero: f64, pl_max: f64 },
    #[error("path loss is not monotone on [0, {upper:.1}] m")]
    BracketFailure { upper: f64 },
    #[error("a single NFP cannot host one average SC: B = {bandwidth} Hz, mean demand {mean_demand} Hz")]
    DegenerateCapacity { bandwidth: f64, mean_demand: f64 },
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub h: f64,
}

impl Point3 {
    pub fn ground(&self) -> Point2 {
        Point2 { x: self.x, y: self.y }
    }
}

/// Axis-aligned rectangle `[0, width] × [0, height]`, meters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub width: f64,
    pub height: f64,
}

impl Region {
    pub fn square(side: f64) -> Self {
        Self {
            width: side,
            height: side,
        }
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn contains(&self, p: &Point2) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.height).contains(&p.y)
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        if self.width > 0.0 && self.height > 0.0 && self.area().is_finite() {
            Ok(())
        } else {
            Err(ScenarioError::InvalidRegion {
                width: self.width,
                height: self.height,
            })
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HardCoreRule {
    /// Matérn type I: delete every point that has a neighbor closer than the
    /// separation.
    #[default]
    MutualDeletion,
    /// Visit parent points in draw order, keep a point unless an already kept
    /// point lies closer than the separation.
    SequentialInhibition,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlacementParams {
    /// Parent intensity λ, points per m².
    pub density: f64,
    /// Hard-core distance, m.
    pub min_separation: f64,
    pub rng_seed: u64,
    #[serde(default = "default_draws")]
    pub max_parent_draws: u32,
    #[serde(default)]
    pub rule: HardCoreRule,
}

fn default_draws() -> u32 {
    DEFAULT_PARENT_DRAWS
}

impl PlacementParams {
    pub fn new(density: f64, min_separation: f64, rng_seed: u64) -> Self {
        Self {
            density,
            min_separation,
            rng_seed,
            max_parent_draws: DEFAULT_PARENT_DRAWS,
            rule: HardCoreRule::MutualDeletion,
        }
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        if self.density <= 0.0 || !self.density.is_finite() {
            return Err(ScenarioError::InvalidParams(format!("density {} must be positive", self.density)));
        }
        if self.min_separation < 0.0 || !self.min_separation.is_finite() {
            return Err(ScenarioError::InvalidParams(format!(
                "min_separation {} must be nonnegative",
                self.min_separation
            )));
        }
        if self.max_parent_draws == 0 {
            return Err(ScenarioError::InvalidParams("max_parent_draws must be at least 1".into()));
        }
        Ok(())
    }
}

/// One realization of the thinned process (all survivors).
pub fn sample_hard_core<R: Rng + ?Sized>(
    region: &Region,
    params: &PlacementParams,
    rng: &mut R,
) -> Result<Vec<Point2>, ScenarioError> {
    region.validate()?;
    params.validate()?;
    let mean = params.density * region.area();
    let n = Poisson::new(mean)
        .map_err(|e| ScenarioError::InvalidParams(format!("parent intensity {mean}: {e}")))?
        .sample(rng) as usize;
    let parents: Vec<Point2> = (0..n)
        .map(|_| Point2 {
            x: rng.random::<f64>() * region.width,
            y: rng.random::<f64>() * region.height,
        })
        .collect();
    let s = params.min_separation;
    if s == 0.0 {
        return Ok(parents);
    }
    Ok(match params.rule {
        HardCoreRule::MutualDeletion => parents
            .iter()
            .enumerate()
            .filter(|(k, p)| {
                parents
                    .iter()
                    .enumerate()
                    .all(|(l, q)| *k == l || p.distance(q) >= s)
            })
            .map(|(_, p)| *p)
            .collect(),
        HardCoreRule::SequentialInhibition => {
            let mut kept: Vec<Point2> = Vec::new();
            for p in parents {
                if kept.iter().all(|q| p.distance(q) >= s) {
                    kept.push(p);
                }
            }
            kept
        }
    })
}

/// Exactly `count` hard-core points, drawn uniformly without replacement from
/// the survivors of the first parent draw that yields enough of them.
pub fn generate_points(region: &Region, params: &PlacementParams, count: usize) -> Result<Vec<Point2>, ScenarioError> {
    if count == 0 {
        return Err(ScenarioError::InvalidParams("count must be positive".into()));
    }
    // A lone point has no separation to respect.
    let vacuous;
    let params = if count == 1 {
        vacuous = PlacementParams {
            min_separation: 0.0,
            ..params.clone()
        };
        &vacuous
    } else {
        params
    };
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let mut best = 0;
    for _ in 0..params.max_parent_draws {
        let survivors = sample_hard_core(region, params, &mut rng)?;
        if survivors.len() >= count {
            return Ok(index::sample(&mut rng, survivors.len(), count)
                .into_iter()
                .map(|k| survivors[k])
                .collect());
        }
        best = best.max(survivors.len());
    }
    Err(ScenarioError::AttemptsExhausted {
        attempts: params.max_parent_draws,
        best,
        needed: count,
    })
}

/// Horizontal distance at which the mean path loss reaches `pl_max`.
pub fn coverage_radius(height: f64, pl_max: f64, env: &ChannelEnv) -> Result<f64, ScenarioError> {
    const TOL_DB: f64 = 1e-4;
    const MAX_UPPER: f64 = 1e8;
    let pl = |s: f64| path_loss_at(s, height, env);
    let at_zero = pl(0.0)?;
    if at_zero > pl_max {
        return Err(ScenarioError::NoCoverage { at_zero, pl_max });
    }
    if pl_max - at_zero <= TOL_DB {
        return Ok(0.0);
    }
    let mut upper = 1000.0;
    while pl(upper)? < pl_max {
        upper *= 2.0;
        if upper > MAX_UPPER {
            return Err(ScenarioError::BracketFailure { upper });
        }
    }
    let mut prev = at_zero;
    for k in 1..=256 {
        let v = pl(upper * k as f64 / 256.0)?;
        if v < prev {
            return Err(ScenarioError::BracketFailure { upper });
        }
        prev = v;
    }
    let (mut lo, mut hi) = (0.0, upper);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = pl(mid)?;
        if (v - pl_max).abs() <= TOL_DB {
            return Ok(mid);
        }
        if v < pl_max {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Minimum NFP count: `ceil(N_SC / min(N_l, floor(B / b_avg)))`.
pub fn required_nfp_count(
    nfp_bandwidth: f64,
    per_sc_bandwidth: &[f64],
    links: usize,
    n_sc: usize,
) -> Result<usize, ScenarioError> {
    if nfp_bandwidth.is_nan() || nfp_bandwidth <= 0.0 || per_sc_bandwidth.is_empty() || links == 0 || n_sc == 0 {
        return Err(ScenarioError::InvalidParams(
            "bandwidth, demand list, link count and SC count must be positive".into(),
        ));
    }
    if per_sc_bandwidth.iter().any(|b| b.is_nan() || *b <= 0.0) {
        return Err(ScenarioError::InvalidParams("per-SC bandwidths must be positive".into()));
    }
    let mean_demand = per_sc_bandwidth.iter().sum::<f64>() / per_sc_bandwidth.len() as f64;
    let per_nfp = (nfp_bandwidth / mean_demand).floor();
    if per_nfp < 1.0 {
        return Err(ScenarioError::DegenerateCapacity {
            bandwidth: nfp_bandwidth,
            mean_demand,
        });
    }
    let hosted = (links as f64).min(per_nfp) as usize;
    Ok(n_sc.div_ceil(hosted))
}

/// Demanded bandwidth of each SC at its highest-SINR NFP. Usable as the
/// per-SC estimate for [`NfpCount::Auto`] once a placement exists.
pub fn best_nfp_bandwidths(instance: &ProblemInstance) -> Vec<f64> {
    (0..instance.n_sc())
        .map(|i| {
            let best = (0..instance.n_d())
                .max_by(|&a, &b| instance.sinr(i, a).total_cmp(&instance.sinr(i, b)))
                .unwrap_or(0);
            instance.bandwidth(i, best)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NfpCount {
    Fixed(usize),
    /// Minimum count from per-SC bandwidth estimates and per-NFP limits.
    Auto {
        bandwidth_estimates: Vec<f64>,
        nfp_bandwidth: f64,
        nfp_links: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub region: Region,
    pub sc_placement: PlacementParams,
    /// `min_separation` is replaced by the coverage radius.
    pub nfp_placement: PlacementParams,
    pub n_sc: usize,
    pub nfp_count: NfpCount,
    pub h_max: f64,
    pub pl_max_db: f64,
}

/// Geometric snapshot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub region: Region,
    pub sc_positions: Vec<Point2>,
    pub nfp_positions: Vec<Point3>,
}

impl Scenario {
    /// Checks region membership, separations and equal NFP heights.
    pub fn check_invariants(&self, sc_min_separation: f64, nfp_min_separation: f64) -> Result<(), String> {
        let nfp_ground: Vec<Point2> = self.nfp_positions.iter().map(Point3::ground).collect();
        for (name, pts, sep) in [
            ("SC", &self.sc_positions, sc_min_separation),
            ("NFP", &nfp_ground, nfp_min_separation),
        ] {
            for (k, p) in pts.iter().enumerate() {
                if !self.region.contains(p) {
                    return Err(format!("{name} {k} at ({}, {}) outside region", p.x, p.y));
                }
                for (l, q) in pts.iter().enumerate().skip(k + 1) {
                    if p.distance(q) < sep {
                        return Err(format!("{name}s {k} and {l} closer than {sep}"));
                    }
                }
            }
        }
        if let Some(first) = self.nfp_positions.first() {
            if self.nfp_positions.iter().any(|n| n.h != first.h) {
                return Err("NFP heights differ".into());
            }
        }
        Ok(())
    }
}

/// Scenario together with the NFP separation that was used.
#[derive(Clone, Debug, PartialEq)]
pub struct BuiltScenario {
    pub scenario: Scenario,
    pub nfp_min_separation: f64,
}

/// Places SCs, derives the NFP separation from the coverage radius, decides
/// the NFP count and places NFPs at `h_max`.
pub fn build_scenario(config: &ScenarioConfig, env: &ChannelEnv) -> Result<BuiltScenario, ScenarioError> {
    if config.n_sc == 0 {
        return Err(ScenarioError::InvalidParams("n_sc must be positive".into()));
    }
    if config.h_max.is_nan() || config.h_max <= 0.0 {
        return Err(ScenarioError::InvalidParams(format!("h_max {} must be positive", config.h_max)));
    }
    env.validate()?;
    let sc_positions = generate_points(&config.region, &config.sc_placement, config.n_sc)?;
    let nfp_min_separation = coverage_radius(config.h_max, config.pl_max_db, env)?;
    let n_d = match &config.nfp_count {
        NfpCount::Fixed(n) if *n > 0 => *n,
        NfpCount::Fixed(_) => return Err(ScenarioError::InvalidParams("NFP count must be positive".into())),
        NfpCount::Auto {
            bandwidth_estimates,
            nfp_bandwidth,
            nfp_links,
        } => required_nfp_count(*nfp_bandwidth, bandwidth_estimates, *nfp_links, config.n_sc)?,
    };
    let nfp_params = PlacementParams {
        min_separation: nfp_min_separation,
        ..config.nfp_placement.clone()
    };
    let nfp_positions = generate_points(&config.region, &nfp_params, n_d)?
        .into_iter()
        .map(|p| Point3 {
            x: p.x,
            y: p.y,
            h: config.h_max,
        })
        .collect();
    Ok(BuiltScenario {
        scenario: Scenario {
            region: config.region,
            sc_positions,
            nfp_positions,
        },
        nfp_min_separation,
    })
}

/// Independent 64-bit seed for a sub-stream of `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D4_9BB1_3311_11EB);
    z ^ (z >> 31)
}
