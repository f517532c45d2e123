//! The semiclassical dynamical models as delay systems, plus the observable
//! maps (qubit energy, flux, emitted fields, radiated energy).
//!
//! Conventions shared by every mirror/open model:
//!
//! * The qubit starts with a finite junction charge `P` and no current, with
//!   the coupling-node charge relaxed to its zero-impedance lock
//!   `p_0(0) = -C_c/(C_c+C_J) * p_J(0)`; the line itself is empty for
//!   `t <= 0`. Starting from the relaxed charge keeps the initial energy
//!   finite-bandwidth (an uncharged coupling node would dump the fraction
//!   `C_c/(C_c+C_J)` of the energy into the line in the first instant).
//! * `P` is normalized so the model's own energy form gives `E(0) = 1`.
//! * The junction flux is reconstructed as `phi_J = -L_J * dp_J/dt`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dde::{DelaySystem, HistoryBuffer};
use crate::params::{derive, CircuitParams, ParamsError};
use crate::trajectory::{params_hash, Column, Metadata, Trajectory};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model requires a positive delay, got {0}")]
    DelayRequired(f64),
    #[error("state does not match model kind {0:?}")]
    StateKindMismatch(ModelKind),
    #[error("model {0:?} has no emitted-field observables")]
    NoFields(ModelKind),
    #[error("rate must be non-negative, got {0}")]
    NegativeRate(f64),
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Dde(#[from] crate::dde::DdeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    FullMirror,
    ApproxMirror,
    OpenFull,
    OpenApprox,
    SystemReservoir,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::FullMirror => "full_mirror",
            ModelKind::ApproxMirror => "approx_mirror",
            ModelKind::OpenFull => "open_full",
            ModelKind::OpenApprox => "open_approx",
            ModelKind::SystemReservoir => "system_reservoir",
        }
    }
}

/// Damping rate used by the reduced open-line model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DampingKind {
    /// Low-impedance rate `gamma_0` at `omega_0`.
    Gamma0,
    /// Full eta-dependent rate at `omega_J`.
    GammaFull,
}

/// Which quadrature carries the initial energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    /// Finite `p_J(0)`, zero current.
    Charge,
    /// Finite `phi_J(0)`, zero junction charge.
    Flux,
}

/// Instantaneous dynamical state, shaped by model kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QubitState {
    /// Full mirror / open-line models: junction charge, its rate, node charge.
    Mirror { p_j: f64, q_j: f64, p_0: f64 },
    /// Reduced models: junction charge and its rate.
    Reduced { p_j: f64, q_j: f64 },
    /// System-reservoir amplitude.
    Amplitude { re: f64, im: f64 },
}

/// Relaxation rate of the coupling-node charge,
/// `lambda = (2/Z_0) (C_c + C_J) / (C_c C_J)`.
///
/// This is the fast rate of the full models; explicit integration needs
/// `lambda * step` of order one or below.
pub fn p0_relaxation_rate(params: &CircuitParams) -> f64 {
    2.0 / params.z_0 * params.c_sigma() / (params.c_c * params.c_j)
}

/// Default substeps per delay for the mirror models: at least 64 per qubit
/// period and per delay, raised when the node-charge relaxation is faster
/// than the oscillation.
pub fn default_substeps_per_delay(params: &CircuitParams, kind: ModelKind) -> usize {
    let d = derive(params).expect("validated params");
    let t = params.delay_t;
    let per_period = (64.0 * (t * d.omega_j / (2.0 * std::f64::consts::PI)).ceil()) as usize;
    let stability = match kind {
        ModelKind::FullMirror | ModelKind::OpenFull => {
            (2.0 * p0_relaxation_rate(params) * t).ceil() as usize
        }
        _ => 0,
    };
    per_period.max(64).max(stability)
}

/// Default step for the open (delay-free) models: 64 per period of the
/// fastest frequency, shortened if the node-charge relaxation needs it.
pub fn default_open_step(params: &CircuitParams, kind: ModelKind) -> f64 {
    let d = derive(params).expect("validated params");
    let mut h = 2.0 * std::f64::consts::PI / d.omega_j / 64.0;
    if matches!(kind, ModelKind::FullMirror | ModelKind::OpenFull) {
        h = h.min(0.5 / p0_relaxation_rate(params));
    }
    h
}

fn initial_charge(c_sigma: f64) -> f64 {
    (2.0 * c_sigma).sqrt()
}

/// Full mirror model: the coupled neutral delay equations for
/// `(p_J, q_J, p_0)` with the reflected field entering as the delayed
/// derivative of the node charge.
pub fn full_mirror_system(params: &CircuitParams) -> Result<DelaySystem, ModelError> {
    if !(params.delay_t > 0.0) {
        return Err(ModelError::DelayRequired(params.delay_t));
    }
    let d = derive(params)?;
    let wj2 = d.omega_j * d.omega_j;
    let a = params.c_sigma() / (params.c_c * params.c_j);
    let b = 1.0 / params.c_j;
    let damp = 2.0 / params.z_0;
    let p = initial_charge(params.c_sigma());
    let r = params.cap_ratio();
    Ok(DelaySystem::new(
        3,
        vec![params.delay_t],
        true,
        vec![p, 0.0, -r * p],
        move |_t, y, dy| {
            y[0] = p;
            y[1] = 0.0;
            y[2] = 0.0;
            dy.fill(0.0);
        },
        move |_t, y, delayed, out| {
            out[0] = y[1];
            out[1] = -wj2 * (y[2] + y[0]);
            out[2] = delayed.deriv(0)[2] - damp * (a * y[2] + b * y[0]);
        },
    )?)
}

/// Reduced mirror model for the junction charge only.
///
/// Integrated in the variables `(p_J, u)` with
/// `u = q_J + gamma_0 (p_J(t) - p_J(t-T))`, which turns the delayed
/// charge-rate term into a plain delayed state of the continuous `p_J` and
/// reproduces the Laplace-transform solution of the charge equation,
/// including the reflected switch-on transient arriving at `t = T`. The
/// charge rate `q_J` is recovered as the stored derivative of `p_J`.
pub fn approx_mirror_system(params: &CircuitParams) -> Result<DelaySystem, ModelError> {
    if !(params.delay_t > 0.0) {
        return Err(ModelError::DelayRequired(params.delay_t));
    }
    let d = derive(params)?;
    let w02 = d.omega_0 * d.omega_0;
    let g0 = d.gamma_0;
    let p = initial_charge(params.c_sigma());
    Ok(DelaySystem::new(
        2,
        vec![params.delay_t],
        false,
        vec![p, g0 * p],
        |_t, y, dy| {
            y.fill(0.0);
            dy.fill(0.0);
        },
        move |_t, y, delayed, out| {
            out[0] = y[1] - g0 * (y[0] - delayed.state(0)[0]);
            out[1] = -w02 * y[0];
        },
    )?)
}

/// Open line, full variables `(p_J, q_J, p_0)`, no incoming field.
pub fn open_full_system(params: &CircuitParams) -> Result<DelaySystem, ModelError> {
    let d = derive(params)?;
    let wj2 = d.omega_j * d.omega_j;
    let a = params.c_sigma() / (params.c_c * params.c_j);
    let b = 1.0 / params.c_j;
    let damp = 2.0 / params.z_0;
    let p = initial_charge(params.c_sigma());
    let r = params.cap_ratio();
    Ok(DelaySystem::new(
        3,
        vec![],
        false,
        vec![p, 0.0, -r * p],
        move |_t, y, dy| {
            y[0] = p;
            y[1] = 0.0;
            y[2] = 0.0;
            dy.fill(0.0);
        },
        move |_t, y, _delayed, out| {
            out[0] = y[1];
            out[1] = -wj2 * (y[2] + y[0]);
            out[2] = -damp * (a * y[2] + b * y[0]);
        },
    )?)
}

/// Open line, reduced damped-oscillator form `(p_J, q_J)`.
pub fn open_approx_system(
    params: &CircuitParams,
    damping: DampingKind,
    initial: InitialKind,
) -> Result<DelaySystem, ModelError> {
    let d = derive(params)?;
    let w02 = d.omega_0 * d.omega_0;
    let gamma = match damping {
        DampingKind::Gamma0 => d.gamma_0,
        DampingKind::GammaFull => d.gamma_full,
    };
    let y0 = match initial {
        InitialKind::Charge => vec![initial_charge(params.c_sigma()), 0.0],
        // E(0) = L_J q^2 / 2 = 1 with phi_J(0) = sqrt(2 L_J) > 0
        InitialKind::Flux => vec![0.0, -(2.0 / params.l_j).sqrt()],
    };
    Ok(DelaySystem::new(
        2,
        vec![],
        false,
        y0,
        |_t, y, dy| {
            y.fill(0.0);
            dy.fill(0.0);
        },
        move |_t, y, _delayed, out| {
            out[0] = y[1];
            out[1] = -w02 * y[0] - gamma * y[1];
        },
    )?)
}

/// Quantum single-excitation amplitude in front of the mirror:
/// `dc/dt = -(gamma/2) (c(t) - e^{-i phase} c(t-T))`, `c(0) = 1`, empty
/// history. `phase = omega_0 T mod 2 pi` (0 at a node, pi at an antinode).
pub fn system_reservoir_system(
    gamma: f64,
    delay_t: f64,
    phase: f64,
) -> Result<DelaySystem, ModelError> {
    if !(gamma >= 0.0) {
        return Err(ModelError::NegativeRate(gamma));
    }
    if !(delay_t > 0.0) {
        return Err(ModelError::DelayRequired(delay_t));
    }
    let (wr, wi) = (phase.cos(), -phase.sin());
    Ok(DelaySystem::new(
        2,
        vec![delay_t],
        false,
        vec![1.0, 0.0],
        |_t, y, dy| {
            y.fill(0.0);
            dy.fill(0.0);
        },
        move |_t, y, delayed, out| {
            let (zr, zi) = (delayed.state(0)[0], delayed.state(0)[1]);
            out[0] = -0.5 * gamma * (y[0] - (wr * zr - wi * zi));
            out[1] = -0.5 * gamma * (y[1] - (wr * zi + wi * zr));
        },
    )?)
}

/// Instantaneous qubit energy for the given model.
///
/// Mirror/open-full models use the three-term form
/// `(p_J + p_0)^2/2C_J + p_0^2/2C_c + phi_J^2/2L_J`; the reduced models use
/// the zero-impedance form `p_J^2/2(C_J + C_c) + phi_J^2/2L_J`; the
/// system-reservoir model returns the occupation `|c|^2` (in units of the
/// initial energy).
pub fn qubit_energy(
    state: &QubitState,
    params: &CircuitParams,
    kind: ModelKind,
) -> Result<f64, ModelError> {
    match (kind, state) {
        (ModelKind::FullMirror | ModelKind::OpenFull, QubitState::Mirror { p_j, q_j, p_0 }) => {
            Ok(mirror_energy(params, *p_j, *q_j, *p_0))
        }
        (ModelKind::ApproxMirror | ModelKind::OpenApprox, QubitState::Reduced { p_j, q_j }) => {
            Ok(reduced_energy(params, *p_j, *q_j))
        }
        (ModelKind::SystemReservoir, QubitState::Amplitude { re, im }) => Ok(re * re + im * im),
        _ => Err(ModelError::StateKindMismatch(kind)),
    }
}

fn mirror_energy(params: &CircuitParams, p_j: f64, q_j: f64, p_0: f64) -> f64 {
    let phi_j = -params.l_j * q_j;
    let s = p_j + p_0;
    s * s / (2.0 * params.c_j) + p_0 * p_0 / (2.0 * params.c_c)
        + phi_j * phi_j / (2.0 * params.l_j)
}

fn reduced_energy(params: &CircuitParams, p_j: f64, q_j: f64) -> f64 {
    let phi_j = -params.l_j * q_j;
    p_j * p_j / (2.0 * params.c_sigma()) + phi_j * phi_j / (2.0 * params.l_j)
}

/// Output grid stride helper shared by trajectory builders.
fn strided_nodes(len: usize, stride: usize) -> impl Iterator<Item = usize> {
    let stride = stride.max(1);
    (0..len).step_by(stride)
}

/// Time series of the qubit observables for a finished integration.
///
/// Column sets: mirror/open-full `p_j,q_j,p_0,phi_j,e,e_norm`; reduced
/// `p_j,q_j,phi_j,e,e_norm` (with `q_j` taken from the stored derivative of
/// `p_J`); system-reservoir `re_c,im_c,occupation`.
pub fn trajectory(
    history: &HistoryBuffer,
    params: &CircuitParams,
    kind: ModelKind,
    stride: usize,
) -> Trajectory {
    let nodes: Vec<usize> = strided_nodes(history.len(), stride).collect();
    let times: Vec<f64> = nodes.iter().map(|&i| history.time(i)).collect();
    let metadata = Metadata {
        params_hash: params_hash(params),
        model: kind.name().to_string(),
        step: history.step(),
        horizon: history.last_time(),
    };
    let mut columns = Vec::new();
    match kind {
        ModelKind::FullMirror | ModelKind::OpenFull => {
            let mut p_j = Vec::with_capacity(nodes.len());
            let mut q_j = Vec::with_capacity(nodes.len());
            let mut p_0 = Vec::with_capacity(nodes.len());
            let mut phi = Vec::with_capacity(nodes.len());
            let mut e = Vec::with_capacity(nodes.len());
            for &i in &nodes {
                let y = history.node_state(i);
                p_j.push(y[0]);
                q_j.push(y[1]);
                p_0.push(y[2]);
                phi.push(-params.l_j * y[1]);
                e.push(mirror_energy(params, y[0], y[1], y[2]));
            }
            let e0 = e[0];
            let e_norm = e.iter().map(|&v| v / e0).collect();
            columns.push(Column { name: "p_j".into(), values: p_j });
            columns.push(Column { name: "q_j".into(), values: q_j });
            columns.push(Column { name: "p_0".into(), values: p_0 });
            columns.push(Column { name: "phi_j".into(), values: phi });
            columns.push(Column { name: "e".into(), values: e });
            columns.push(Column { name: "e_norm".into(), values: e_norm });
        }
        ModelKind::ApproxMirror => {
            let mut p_j = Vec::with_capacity(nodes.len());
            let mut q_j = Vec::with_capacity(nodes.len());
            let mut phi = Vec::with_capacity(nodes.len());
            let mut e = Vec::with_capacity(nodes.len());
            for &i in &nodes {
                let pj = history.node_state(i)[0];
                let qj = history.node_deriv(i)[0];
                p_j.push(pj);
                q_j.push(qj);
                phi.push(-params.l_j * qj);
                e.push(reduced_energy(params, pj, qj));
            }
            let e0 = e[0];
            let e_norm = e.iter().map(|&v| v / e0).collect();
            columns.push(Column { name: "p_j".into(), values: p_j });
            columns.push(Column { name: "q_j".into(), values: q_j });
            columns.push(Column { name: "phi_j".into(), values: phi });
            columns.push(Column { name: "e".into(), values: e });
            columns.push(Column { name: "e_norm".into(), values: e_norm });
        }
        ModelKind::OpenApprox => {
            let mut p_j = Vec::with_capacity(nodes.len());
            let mut q_j = Vec::with_capacity(nodes.len());
            let mut phi = Vec::with_capacity(nodes.len());
            let mut e = Vec::with_capacity(nodes.len());
            for &i in &nodes {
                let y = history.node_state(i);
                p_j.push(y[0]);
                q_j.push(y[1]);
                phi.push(-params.l_j * y[1]);
                e.push(reduced_energy(params, y[0], y[1]));
            }
            let e0 = e[0];
            let e_norm = e.iter().map(|&v| v / e0).collect();
            columns.push(Column { name: "p_j".into(), values: p_j });
            columns.push(Column { name: "q_j".into(), values: q_j });
            columns.push(Column { name: "phi_j".into(), values: phi });
            columns.push(Column { name: "e".into(), values: e });
            columns.push(Column { name: "e_norm".into(), values: e_norm });
        }
        ModelKind::SystemReservoir => {
            let mut re = Vec::with_capacity(nodes.len());
            let mut im = Vec::with_capacity(nodes.len());
            let mut occ = Vec::with_capacity(nodes.len());
            for &i in &nodes {
                let y = history.node_state(i);
                re.push(y[0]);
                im.push(y[1]);
                occ.push(y[0] * y[0] + y[1] * y[1]);
            }
            columns.push(Column { name: "re_c".into(), values: re });
            columns.push(Column { name: "im_c".into(), values: im });
            columns.push(Column { name: "occupation".into(), values: occ });
        }
    }
    Trajectory {
        times,
        columns,
        metadata,
    }
}

/// Outgoing voltage fields and cumulative radiated energy.
///
/// Open line: `V_L^out = V_R^out = -(Z_0/2) dp_0/dt`, power
/// `(V_L^2 + V_R^2)/Z_0`. Mirror: the right-moving emission returns with a
/// sign flip after one round trip, so
/// `V_L^out(t) = (Z_0/2)(dp_0/dt(t-T) - dp_0/dt(t))` and only the left-going
/// power is lost. The integral uses the trapezoid rule on the output grid.
pub fn emitted_fields(
    history: &HistoryBuffer,
    params: &CircuitParams,
    kind: ModelKind,
    stride: usize,
) -> Result<Trajectory, ModelError> {
    if !matches!(kind, ModelKind::FullMirror | ModelKind::OpenFull) {
        return Err(ModelError::NoFields(kind));
    }
    let stride = stride.max(1);
    let nodes: Vec<usize> = strided_nodes(history.len(), stride).collect();
    let times: Vec<f64> = nodes.iter().map(|&i| history.time(i)).collect();
    let half_z = 0.5 * params.z_0;
    let dp0 = |node: usize| history.node_deriv(node)[2];
    let k_delay = if kind == ModelKind::FullMirror {
        (params.delay_t / history.step()).round() as usize
    } else {
        0
    };
    let mut v_l = Vec::with_capacity(nodes.len());
    let mut v_r = Vec::with_capacity(nodes.len());
    for &i in &nodes {
        match kind {
            ModelKind::OpenFull => {
                let v = -half_z * dp0(i);
                v_l.push(v);
                v_r.push(v);
            }
            ModelKind::FullMirror => {
                let delayed = if i >= k_delay { dp0(i - k_delay) } else { 0.0 };
                v_l.push(half_z * (delayed - dp0(i)));
                v_r.push(-half_z * dp0(i));
            }
            _ => unreachable!(),
        }
    }
    let mut e_rad = Vec::with_capacity(nodes.len());
    let mut acc = 0.0;
    let power = |idx: usize| match kind {
        ModelKind::OpenFull => (v_l[idx] * v_l[idx] + v_r[idx] * v_r[idx]) / params.z_0,
        _ => v_l[idx] * v_l[idx] / params.z_0,
    };
    e_rad.push(0.0);
    for w in 1..nodes.len() {
        let dt = times[w] - times[w - 1];
        acc += 0.5 * dt * (power(w - 1) + power(w));
        e_rad.push(acc);
    }
    Ok(Trajectory {
        times,
        columns: vec![
            Column { name: "v_l_out".into(), values: v_l },
            Column { name: "v_r_out".into(), values: v_r },
            Column { name: "radiated_energy".into(), values: e_rad },
        ],
        metadata: Metadata {
            params_hash: params_hash(params),
            model: kind.name().to_string(),
            step: history.step(),
            horizon: history.last_time(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dde::integrate;
    use crate::params::{build_params, DimensionlessSpec, PlacementSpec};

    fn spec(r: f64, z: f64, placement: PlacementSpec) -> DimensionlessSpec {
        DimensionlessSpec {
            omega_0: 1.0,
            cap_ratio_r: r,
            imp_ratio_z: z,
            placement,
        }
    }

    #[test]
    fn initial_energy_is_one() {
        let p = build_params(&spec(0.5, 0.5f64.sqrt(), PlacementSpec::Node(1))).unwrap();
        for kind in [ModelKind::FullMirror, ModelKind::OpenFull] {
            let sys = match kind {
                ModelKind::FullMirror => full_mirror_system(&p).unwrap(),
                _ => open_full_system(&p).unwrap(),
            };
            let y = sys.initial_state();
            let e = qubit_energy(
                &QubitState::Mirror { p_j: y[0], q_j: y[1], p_0: y[2] },
                &p,
                kind,
            )
            .unwrap();
            assert!((e - 1.0).abs() < 1e-14);
        }
        let sys = approx_mirror_system(&p).unwrap();
        let y = sys.initial_state();
        // q_J(0) = u(0) - gamma_0 (p_J(0) - history) = 0
        let q0 = y[1] - derive(&p).unwrap().gamma_0 * y[0];
        let e = qubit_energy(
            &QubitState::Reduced { p_j: y[0], q_j: q0 },
            &p,
            ModelKind::ApproxMirror,
        )
        .unwrap();
        assert!((e - 1.0).abs() < 1e-14);
    }

    #[test]
    fn energy_form_examples() {
        let p = build_params(&spec(0.4, 1.0, PlacementSpec::Open)).unwrap();
        // (P, 0, 0) in the full form gives P^2 / 2 C_J
        let e = qubit_energy(
            &QubitState::Mirror { p_j: 2.0, q_j: 0.0, p_0: 0.0 },
            &p,
            ModelKind::OpenFull,
        )
        .unwrap();
        assert!((e - 4.0 / (2.0 * p.c_j)).abs() < 1e-14);
        // with the node charge locked and no current, full == reduced
        for p_j in [0.37, -1.2, 5.0] {
            let p_0 = -p.cap_ratio() * p_j;
            let full = qubit_energy(
                &QubitState::Mirror { p_j, q_j: 0.0, p_0 },
                &p,
                ModelKind::OpenFull,
            )
            .unwrap();
            let red = qubit_energy(
                &QubitState::Reduced { p_j, q_j: 0.0 },
                &p,
                ModelKind::OpenApprox,
            )
            .unwrap();
            assert!((full - red).abs() < 1e-13 * full.max(1.0));
        }
    }

    #[test]
    fn state_kind_mismatch_rejected() {
        let p = build_params(&spec(0.4, 1.0, PlacementSpec::Open)).unwrap();
        let s = QubitState::Reduced { p_j: 1.0, q_j: 0.0 };
        assert!(qubit_energy(&s, &p, ModelKind::FullMirror).is_err());
    }

    #[test]
    fn full_mirror_requires_delay() {
        let p = build_params(&spec(0.5, 1.0, PlacementSpec::Open)).unwrap();
        assert!(full_mirror_system(&p).is_err());
        assert!(approx_mirror_system(&p).is_err());
    }

    #[test]
    fn undamped_reduced_model_is_cosine() {
        // gamma_0 -> 0 via tiny impedance ratio
        let p = build_params(&spec(0.5, 1e-14, PlacementSpec::Node(1))).unwrap();
        let sys = approx_mirror_system(&p).unwrap();
        let k = 512;
        let h = p.delay_t / k as f64;
        let buf = integrate(&sys, 10.0 * p.delay_t, h).unwrap();
        let p0 = sys.initial_state()[0];
        for i in (0..buf.len()).step_by(37) {
            let t = buf.time(i);
            let expect = p0 * t.cos();
            assert!(
                (buf.node_state(i)[0] - expect).abs() < 1e-8,
                "t={t}: {} vs {expect}",
                buf.node_state(i)[0]
            );
        }
    }

    #[test]
    fn zero_coupling_amplitude_is_constant() {
        let sys = system_reservoir_system(0.0, 1.0, 0.0).unwrap();
        let buf = integrate(&sys, 20.0, 1.0 / 64.0).unwrap();
        for i in (0..buf.len()).step_by(100) {
            let y = buf.node_state(i);
            assert!((y[0] * y[0] + y[1] * y[1] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_state_emits_nothing() {
        let p = build_params(&spec(0.3, 1.0, PlacementSpec::Node(1))).unwrap();
        let sys = DelaySystem::new(
            3,
            vec![],
            false,
            vec![0.0, 0.0, 0.0],
            |_t, y, dy| {
                y.fill(0.0);
                dy.fill(0.0);
            },
            |_t, _y, _d, out| out.fill(0.0),
        )
        .unwrap();
        let buf = integrate(&sys, 1.0, 0.125).unwrap();
        let f = emitted_fields(&buf, &p, ModelKind::OpenFull, 1).unwrap();
        assert!(f.column("v_l_out").unwrap().iter().all(|&v| v == 0.0));
        assert!(f
            .column("radiated_energy")
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
    }
}
