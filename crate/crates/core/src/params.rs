//! Circuit constants and the closed-form rates/frequencies of the lumped
//! transmon + transmission-line model.
//!
//! All quantities are SI-coherent; the dimensionless builders default to
//! natural units where `omega_0 = 1` sets the scale.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for classifying a delay as a node/antinode placement,
/// applied to `omega_0 * T mod pi`.
pub const PLACEMENT_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum ParamsError {
    #[error("capacitance ratio r must lie in (0,1), got {0}")]
    CapRatioOutOfRange(f64),
    #[error("impedance ratio z must be positive, got {0}")]
    ImpRatioNonPositive(f64),
    #[error("omega_0 must be positive, got {0}")]
    OmegaNonPositive(f64),
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("delay must be non-negative, got {0}")]
    NegativeDelay(f64),
    #[error("node order 0 degenerates to the open line; use order >= 1")]
    ZeroNodeOrder,
    #[error("no capacitance ratio in (0,1) reaches gamma0/omega0 = {target} at z = {z}")]
    CapRatioUnreachable { target: f64, z: f64 },
}

/// Physical circuit constants defining one experiment.
///
/// `delay_t = 0` encodes the open-line limit (no mirror); `v_0` is only used
/// to report the mirror distance `L = v_0 T / 2` and to build the lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    /// Junction capacitance C_J (F).
    pub c_j: f64,
    /// Coupling capacitance C_c (F).
    pub c_c: f64,
    /// Josephson inductance L_J (H).
    pub l_j: f64,
    /// Line characteristic impedance Z_0 (ohm).
    pub z_0: f64,
    /// Round-trip delay T = 2L/v_0 (s).
    pub delay_t: f64,
    /// Wave speed in the line (m/s); optional.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_0: Option<f64>,
}

impl CircuitParams {
    pub fn validate(&self) -> Result<(), ParamsError> {
        for (name, value) in [
            ("c_j", self.c_j),
            ("c_c", self.c_c),
            ("l_j", self.l_j),
            ("z_0", self.z_0),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(ParamsError::NonPositive { name, value });
            }
        }
        if !(self.delay_t >= 0.0) || !self.delay_t.is_finite() {
            return Err(ParamsError::NegativeDelay(self.delay_t));
        }
        Ok(())
    }

    /// Total shunting capacitance C_c + C_J.
    pub fn c_sigma(&self) -> f64 {
        self.c_c + self.c_j
    }

    /// Capacitance ratio r = C_c / (C_c + C_J).
    pub fn cap_ratio(&self) -> f64 {
        self.c_c / self.c_sigma()
    }

    /// Mirror distance L = v_0 T / 2, when the wave speed is known.
    pub fn mirror_distance(&self) -> Option<f64> {
        self.v_0.map(|v| v * self.delay_t / 2.0)
    }
}

/// Qubit placement relative to the standing-wave pattern at `omega_0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Placement {
    /// `omega_0 T = 2 n pi`: destructive interference, dark state.
    Node(u32),
    /// `omega_0 T = (2 n + 1) pi`: constructive interference, enhanced decay.
    Antinode(u32),
    /// Neither, within [`PLACEMENT_TOL`].
    Generic,
}

/// Placement request used by the dimensionless builders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlacementSpec {
    Node(u32),
    Antinode(u32),
    /// Explicit product `gamma_0 * T`; the node/antinode character is then
    /// whatever the resulting `omega_0 T` happens to be.
    Gamma0T(f64),
    /// No mirror: `delay_t = 0`.
    Open,
}

/// Dimensionless experiment description: everything needed to reconstruct a
/// parameter set up to the free impedance/capacitance scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessSpec {
    /// Unit-setting qubit frequency (rad/s).
    pub omega_0: f64,
    /// r = C_c / (C_c + C_J), in (0,1).
    pub cap_ratio_r: f64,
    /// z = Z_0 / Z_J, positive.
    pub imp_ratio_z: f64,
    pub placement: PlacementSpec,
}

/// Rates and frequencies derived from a parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedQuantities {
    /// Bare junction frequency 1/sqrt(L_J C_J) (rad/s).
    pub omega_j: f64,
    /// Renormalized qubit frequency 1/sqrt(L_J (C_c + C_J)) (rad/s).
    pub omega_0: f64,
    /// Qubit impedance sqrt(L_J / C_J) (ohm).
    pub z_j: f64,
    /// Dimensionless damping parameter, evaluated at omega = omega_J.
    pub eta: f64,
    /// Full open-line decay rate 2 eta / (Z_0 C_J (1 + eta)) (1/s).
    pub gamma_full: f64,
    /// Low-impedance decay rate Z_0 omega_0^2 C_c^2 / (2 (C_c + C_J)) (1/s).
    pub gamma_0: f64,
    pub placement: Placement,
}

/// Rates/frequencies of `params`.
///
/// `eta` and `gamma_full` follow the phasor analysis at `omega = omega_J`;
/// `gamma_0` is the low-impedance expansion at `omega = omega_0`. Both
/// frequencies are reported so callers never have to guess which one a rate
/// refers to.
pub fn derive(params: &CircuitParams) -> Result<DerivedQuantities, ParamsError> {
    params.validate()?;
    let c_sigma = params.c_sigma();
    let omega_j = 1.0 / (params.l_j * params.c_j).sqrt();
    let omega_0 = 1.0 / (params.l_j * c_sigma).sqrt();
    let z_j = (params.l_j / params.c_j).sqrt();
    let eta =
        omega_j * omega_j * params.z_0 * params.z_0 * params.c_c * params.c_c / 4.0 * params.c_j
            / c_sigma;
    let gamma_full = 2.0 / (params.z_0 * params.c_j) * eta / (1.0 + eta);
    let gamma_0 = params.z_0 / 2.0 * omega_0 * omega_0 * params.c_c * params.c_c / c_sigma;
    Ok(DerivedQuantities {
        omega_j,
        omega_0,
        z_j,
        eta,
        gamma_full,
        gamma_0,
        placement: classify_placement(omega_0, params.delay_t),
    })
}

/// Classify `omega_0 * T` against multiples of pi within [`PLACEMENT_TOL`].
pub fn classify_placement(omega_0: f64, delay_t: f64) -> Placement {
    let x = omega_0 * delay_t / std::f64::consts::PI;
    let m = x.round();
    if (x - m).abs() <= PLACEMENT_TOL * x.abs().max(1.0) && m >= 0.0 {
        let m = m as u64;
        if m % 2 == 0 {
            Placement::Node((m / 2) as u32)
        } else {
            Placement::Antinode(((m - 1) / 2) as u32)
        }
    } else {
        Placement::Generic
    }
}

/// Circuit constants realizing a dimensionless spec.
///
/// The free overall scale is pinned by `C_c + C_J = L_J = 1/omega_0`, so that
/// in natural units (`omega_0 = 1`) all constants are order one. Recomputing
/// `r`, `z`, `omega_0` from the result reproduces the inputs, and
/// `gamma_0 / omega_0 = (z/2) r^2 / sqrt(1 - r)`.
pub fn build_params(spec: &DimensionlessSpec) -> Result<CircuitParams, ParamsError> {
    let r = spec.cap_ratio_r;
    let z = spec.imp_ratio_z;
    let omega_0 = spec.omega_0;
    if !(r > 0.0 && r < 1.0) {
        return Err(ParamsError::CapRatioOutOfRange(r));
    }
    if !(z > 0.0) || !z.is_finite() {
        return Err(ParamsError::ImpRatioNonPositive(z));
    }
    if !(omega_0 > 0.0) || !omega_0.is_finite() {
        return Err(ParamsError::OmegaNonPositive(omega_0));
    }
    let c_sigma = 1.0 / omega_0;
    let l_j = 1.0 / omega_0;
    let c_c = r * c_sigma;
    let c_j = (1.0 - r) * c_sigma;
    let z_j = (l_j / c_j).sqrt();
    let z_0 = z * z_j;
    let gamma_0 = z_0 / 2.0 * omega_0 * omega_0 * c_c * c_c / c_sigma;
    let delay_t = match spec.placement {
        PlacementSpec::Node(n) => delay_for_placement(omega_0, Placement::Node(n), n)?,
        PlacementSpec::Antinode(n) => delay_for_placement(omega_0, Placement::Antinode(n), n)?,
        PlacementSpec::Gamma0T(x) => {
            if !(x >= 0.0) || !x.is_finite() {
                return Err(ParamsError::NegativeDelay(x));
            }
            x / gamma_0
        }
        PlacementSpec::Open => 0.0,
    };
    Ok(CircuitParams {
        c_j,
        c_c,
        l_j,
        z_0,
        delay_t,
        v_0: None,
    })
}

/// Round-trip delay realizing a node (`T = 2 pi n / omega_0`, `n >= 1`) or
/// antinode (`T = (2 n + 1) pi / omega_0`, `n >= 0`) placement.
pub fn delay_for_placement(
    omega_0: f64,
    kind: Placement,
    order_n: u32,
) -> Result<f64, ParamsError> {
    if !(omega_0 > 0.0) {
        return Err(ParamsError::OmegaNonPositive(omega_0));
    }
    match kind {
        Placement::Node(_) => {
            if order_n == 0 {
                return Err(ParamsError::ZeroNodeOrder);
            }
            Ok(2.0 * std::f64::consts::PI * f64::from(order_n) / omega_0)
        }
        Placement::Antinode(_) => {
            Ok((2.0 * f64::from(order_n) + 1.0) * std::f64::consts::PI / omega_0)
        }
        Placement::Generic => Err(ParamsError::ZeroNodeOrder),
    }
}

/// Fraction of the initial energy left in the dark state,
/// `1 / (1 + gamma_0 T / 2)^2`.
pub fn dark_state_energy_ratio(gamma_0: f64, delay_t: f64) -> f64 {
    debug_assert!(gamma_0 >= 0.0 && delay_t >= 0.0);
    let x = 1.0 + 0.5 * gamma_0 * delay_t;
    1.0 / (x * x)
}

/// Capacitance ratio r achieving `gamma_0/omega_0 = target` at impedance
/// ratio `z`, from `(z/2) r^2 / sqrt(1-r) = target` (monotone in r).
pub fn solve_cap_ratio(target_gamma0_over_omega0: f64, z: f64) -> Result<f64, ParamsError> {
    if !(z > 0.0) {
        return Err(ParamsError::ImpRatioNonPositive(z));
    }
    let target = target_gamma0_over_omega0;
    if !(target > 0.0) {
        return Err(ParamsError::CapRatioUnreachable { target, z });
    }
    let f = |r: f64| 0.5 * z * r * r / (1.0 - r).sqrt();
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64 - 1e-15);
    if f(hi) < target {
        return Err(ParamsError::CapRatioUnreachable { target, z });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
