//! Air-to-ground channel: LoS probability, mean path loss, received power,
//! SINR under full co-channel interference, and instance assembly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Limits, Matrix, ModelError, ProblemInstance};
use crate::scenario::{Point2, Point3, Scenario};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("SC and NFP coincide: slant distance is zero")]
    ZeroDistance,
    #[error("invalid channel environment: {0}")]
    InvalidEnv(String),
    #[error("expected {expected} per-SC rates, got {actual}")]
    RateCount { expected: usize, actual: usize },
    #[error("scenario has no NFPs")]
    NoNfps,
    #[error("degenerate link ({sc}, {nfp}): SINR {sinr}")]
    DegenerateLink { sc: usize, nfp: usize, sinr: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Environment and radio parameters of the ATG model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelEnv {
    pub alpha: f64,
    /// Per degree of elevation.
    pub beta: f64,
    pub eta_los_db: f64,
    pub eta_nlos_db: f64,
    pub carrier_hz: f64,
    pub path_loss_exponent: f64,
    pub tx_power_w: f64,
    pub noise_floor_w: f64,
}

impl Default for ChannelEnv {
    fn default() -> Self {
        Self {
            alpha: 9.61,
            beta: 0.16,
            eta_los_db: 1.0,
            eta_nlos_db: 20.0,
            carrier_hz: 2e9,
            path_loss_exponent: 2.0,
            tx_power_w: 5.0,
            noise_floor_w: 1e-13,
        }
    }
}

impl ChannelEnv {
    pub fn validate(&self) -> Result<(), ChannelError> {
        let positive = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("carrier_hz", self.carrier_hz),
            ("tx_power_w", self.tx_power_w),
            ("noise_floor_w", self.noise_floor_w),
        ];
        for (name, v) in positive {
            if v <= 0.0 || !v.is_finite() {
                return Err(ChannelError::InvalidEnv(format!("{name} = {v} must be positive")));
            }
        }
        for (name, v) in [("eta_los_db", self.eta_los_db), ("eta_nlos_db", self.eta_nlos_db)] {
            if v < 0.0 || !v.is_finite() {
                return Err(ChannelError::InvalidEnv(format!("{name} = {v} must be nonnegative")));
            }
        }
        if self.path_loss_exponent < 1.0 || !self.path_loss_exponent.is_finite() {
            return Err(ChannelError::InvalidEnv(format!(
                "path_loss_exponent = {} must be at least 1",
                self.path_loss_exponent
            )));
        }
        Ok(())
    }
}

/// Geometry of one SC–NFP link.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkGeometry {
    pub horizontal_distance: f64,
    pub height: f64,
    pub slant_distance: f64,
    pub elevation_deg: f64,
}

impl LinkGeometry {
    pub fn new(horizontal_distance: f64, height: f64) -> Self {
        let elevation_deg = if horizontal_distance == 0.0 {
            90.0
        } else {
            (height / horizontal_distance).atan().to_degrees()
        };
        Self {
            horizontal_distance,
            height,
            slant_distance: horizontal_distance.hypot(height),
            elevation_deg,
        }
    }

    pub fn between(sc: Point2, nfp: Point3) -> Self {
        Self::new((sc.x - nfp.x).hypot(sc.y - nfp.y), nfp.h)
    }
}

/// LoS probability; elevation enters in degrees.
pub fn p_los(geom: &LinkGeometry, env: &ChannelEnv) -> f64 {
    p_los_at_elevation(geom.elevation_deg, env)
}

pub fn p_los_at_elevation(elevation_deg: f64, env: &ChannelEnv) -> f64 {
    1.0 / (1.0 + env.alpha * (-env.beta * (elevation_deg - env.alpha)).exp())
}

/// Free-space term `10 log10((4π f_c d / c)^γ)`.
pub fn fspl_db(slant_distance: f64, env: &ChannelEnv) -> f64 {
    10.0 * env.path_loss_exponent * (4.0 * std::f64::consts::PI * env.carrier_hz * slant_distance / SPEED_OF_LIGHT).log10()
}

/// Mean path loss in dB for a link geometry.
pub fn path_loss_for(geom: &LinkGeometry, env: &ChannelEnv) -> Result<f64, ChannelError> {
    if geom.slant_distance.is_nan() || geom.slant_distance <= 0.0 {
        return Err(ChannelError::ZeroDistance);
    }
    let los = p_los(geom, env);
    Ok(fspl_db(geom.slant_distance, env) + los * env.eta_los_db + (1.0 - los) * env.eta_nlos_db)
}

/// Path loss at horizontal distance `s` from an NFP at height `h`.
pub fn path_loss_at(horizontal_distance: f64, height: f64, env: &ChannelEnv) -> Result<f64, ChannelError> {
    path_loss_for(&LinkGeometry::new(horizontal_distance, height), env)
}

pub fn path_loss_db(sc: Point2, nfp: Point3, env: &ChannelEnv) -> Result<f64, ChannelError> {
    path_loss_for(&LinkGeometry::between(sc, nfp), env)
}

pub fn power_after_loss(tx_power_w: f64, loss_db: f64) -> f64 {
    tx_power_w / 10f64.powf(loss_db / 10.0)
}

pub fn received_power_w(sc: Point2, nfp: Point3, env: &ChannelEnv) -> Result<f64, ChannelError> {
    Ok(power_after_loss(env.tx_power_w, path_loss_db(sc, nfp, env)?))
}

/// `SINR_ik = P_r(i,k) / (Σ_{j≠k} P_r(i,j) + σ)`, every NFP transmitting.
pub fn sinr_matrix(scenario: &Scenario, env: &ChannelEnv) -> Result<Matrix, ChannelError> {
    env.validate()?;
    let n_sc = scenario.sc_positions.len();
    let n_d = scenario.nfp_positions.len();
    if n_d == 0 {
        return Err(ChannelError::NoNfps);
    }
    let mut power = Matrix::zeros(n_sc, n_d);
    for (i, sc) in scenario.sc_positions.iter().enumerate() {
        for (j, nfp) in scenario.nfp_positions.iter().enumerate() {
            power.set(i, j, received_power_w(*sc, *nfp, env)?);
        }
    }
    Ok(Matrix::from_fn(n_sc, n_d, |i, k| {
        let interference: f64 = (0..n_d).filter(|&j| j != k).map(|j| power.get(i, j)).sum();
        power.get(i, k) / (interference + env.noise_floor_w)
    }))
}

/// Assembles the association problem for a scenario. Each SC demands the
/// same rate from every NFP.
pub fn build_instance(
    scenario: &Scenario,
    env: &ChannelEnv,
    per_sc_rate: &[f64],
    limits: Limits,
) -> Result<ProblemInstance, ChannelError> {
    let n_sc = scenario.sc_positions.len();
    if per_sc_rate.len() != n_sc {
        return Err(ChannelError::RateCount {
            expected: n_sc,
            actual: per_sc_rate.len(),
        });
    }
    let sinr = sinr_matrix(scenario, env)?;
    for i in 0..sinr.rows() {
        for j in 0..sinr.cols() {
            let s = sinr.get(i, j);
            if s.is_nan() || s <= 0.0 || !(1.0 + s).log2().is_normal() {
                return Err(ChannelError::DegenerateLink { sc: i, nfp: j, sinr: s });
            }
        }
    }
    let rates = Matrix::from_fn(n_sc, sinr.cols(), |i, _| per_sc_rate[i]);
    Ok(ProblemInstance::from_sinr(rates, sinr, limits)?)
}
