//! Brute-force oracle: the discretized LC-ladder circuit, integrated as a
//! plain ODE system, converging to the continuum mirror dynamics as the
//! discretization length shrinks.
//!
//! Node 0 carries the coupling capacitance and keeps its charge `p_0` as an
//! explicit variable; node `N = L/dx` is grounded (the mirror). The left arm
//! is truncated far enough away that nothing reflected off the truncation —
//! not even floating-point-level leakage, which spreads a few grid cells per
//! step — can reach the qubit within the simulated window.

use thiserror::Error;

use crate::params::{derive, CircuitParams, ParamsError};
use crate::trajectory::{params_hash, Column, Metadata, Trajectory};

/// Default cap on the total state length.
pub const DEFAULT_NODE_CAP: usize = 1 << 25;

/// Extra left-arm nodes beyond the light cone; covers the distance a
/// subnormal-level numerical front can travel before underflowing to zero.
const LEFT_GUARD: usize = 1536;

#[derive(Debug, Error, PartialEq)]
pub enum LatticeError {
    #[error("points per wavelength must be >= 16, got {0}")]
    TooCoarse(usize),
    #[error("mirror lattice requires a positive delay, got {0}")]
    DelayRequired(f64),
    #[error("horizon must be positive, got {0}")]
    BadHorizon(f64),
    #[error("lattice needs {needed} state entries, cap is {cap}")]
    MemoryCap { needed: usize, cap: usize },
    #[error("step {step} violates the CFL bound {bound} (0.5 dx / v_0)")]
    CflViolation { step: f64, bound: f64 },
    #[error("state became non-finite at t = {t}, state index {index}")]
    NonFinite { t: f64, index: usize },
    #[error("snapshot time {t} is not on the output grid")]
    OffGrid { t: f64 },
    #[error(transparent)]
    Params(#[from] ParamsError),
}

/// Discretized LC-chain configuration.
///
/// State layout: `[phi_J, p_J, p_0, phi_i (i = -n_left..N-1), p_i (i =
/// -n_left..N-1, i != 0)]` with `phi_N = 0` enforced by the grounded mirror
/// node and `phi_{-n_left-1} = 0` at the (causally unreachable) left edge.
#[derive(Debug, Clone)]
pub struct LatticeSystem {
    /// Discretization length (m).
    pub dx: f64,
    /// Line capacitance per length (F/m).
    pub c0: f64,
    /// Line inductance per length (H/m).
    pub l0: f64,
    /// Wave speed (m/s).
    pub v0: f64,
    /// Grounded node index N = L/dx (mirror); `usize::MAX`-free: for the
    /// open-line variant this is simply beyond the causal horizon.
    pub n_right: usize,
    /// Left-arm node count.
    pub n_left: usize,
}

impl LatticeSystem {
    /// Total state vector length.
    pub fn state_len(&self) -> usize {
        // 3 qubit vars + phi nodes + p nodes (node 0's charge lives in p_0)
        3 + (self.n_left + self.n_right) + (self.n_left + self.n_right - 1)
    }

    fn n_phi(&self) -> usize {
        self.n_left + self.n_right
    }

    /// Index of `phi_i` in the state vector (`-n_left <= i <= N-1`).
    pub fn phi_index(&self, i: i64) -> usize {
        debug_assert!(i >= -(self.n_left as i64) && i < self.n_right as i64);
        3 + (i + self.n_left as i64) as usize
    }

    /// Index of `p_i` in the state vector (`i != 0`).
    pub fn p_index(&self, i: i64) -> usize {
        debug_assert!(i != 0 && i >= -(self.n_left as i64) && i < self.n_right as i64);
        let base = 3 + self.n_phi();
        let offset = (i + self.n_left as i64) as usize;
        if i < 0 {
            base + offset
        } else {
            base + offset - 1
        }
    }
}

fn line_constants(params: &CircuitParams) -> (f64, f64, f64) {
    let v0 = params.v_0.unwrap_or(1.0);
    (v0, 1.0 / (params.z_0 * v0), params.z_0 / v0)
}

/// Mirror lattice: `dx` is snapped so the grounded node lands exactly at
/// `L = v_0 T / 2`, and the left arm is sized so the truncation stays outside
/// the horizon's causal cone.
pub fn build_lattice(
    params: &CircuitParams,
    points_per_wavelength: usize,
    horizon: f64,
) -> Result<LatticeSystem, LatticeError> {
    build_lattice_with_cap(params, points_per_wavelength, horizon, DEFAULT_NODE_CAP)
}

pub fn build_lattice_with_cap(
    params: &CircuitParams,
    points_per_wavelength: usize,
    horizon: f64,
    cap: usize,
) -> Result<LatticeSystem, LatticeError> {
    params.validate().map_err(LatticeError::Params)?;
    if points_per_wavelength < 16 {
        return Err(LatticeError::TooCoarse(points_per_wavelength));
    }
    if !(params.delay_t > 0.0) {
        return Err(LatticeError::DelayRequired(params.delay_t));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(LatticeError::BadHorizon(horizon));
    }
    let d = derive(params)?;
    let (v0, c0, l0) = line_constants(params);
    let mirror_l = v0 * params.delay_t / 2.0;
    let wavelength = 2.0 * std::f64::consts::PI * v0 / d.omega_0;
    let dx0 = wavelength / points_per_wavelength as f64;
    let n_right = (mirror_l / dx0).round().max(1.0) as usize;
    let dx = mirror_l / n_right as f64;
    let n_left = (horizon * v0 / (2.0 * dx)).ceil() as usize + LEFT_GUARD;
    let sys = LatticeSystem {
        dx,
        c0,
        l0,
        v0,
        n_right,
        n_left,
    };
    if sys.state_len() > cap {
        return Err(LatticeError::MemoryCap {
            needed: sys.state_len(),
            cap,
        });
    }
    Ok(sys)
}

/// Open-line emulation: the grounded node is pushed beyond the causal
/// horizon on the right, matching the left-arm truncation.
pub fn build_open_lattice(
    params: &CircuitParams,
    points_per_wavelength: usize,
    horizon: f64,
) -> Result<LatticeSystem, LatticeError> {
    params.validate().map_err(LatticeError::Params)?;
    if points_per_wavelength < 16 {
        return Err(LatticeError::TooCoarse(points_per_wavelength));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(LatticeError::BadHorizon(horizon));
    }
    let d = derive(params)?;
    let (v0, c0, l0) = line_constants(params);
    let wavelength = 2.0 * std::f64::consts::PI * v0 / d.omega_0;
    let dx = wavelength / points_per_wavelength as f64;
    let pad = (horizon * v0 / (2.0 * dx)).ceil() as usize + LEFT_GUARD;
    let sys = LatticeSystem {
        dx,
        c0,
        l0,
        v0,
        n_right: pad,
        n_left: pad,
    };
    if sys.state_len() > DEFAULT_NODE_CAP {
        return Err(LatticeError::MemoryCap {
            needed: sys.state_len(),
            cap: DEFAULT_NODE_CAP,
        });
    }
    Ok(sys)
}

/// Finished lattice integration: qubit trajectory plus retained field
/// snapshots at requested output nodes.
pub struct LatticeRun {
    pub trajectory: Trajectory,
    snapshots: Vec<(f64, Vec<f64>)>,
    output_step: f64,
}

/// Spatial field profile at one instant.
pub struct SpatialProfile {
    /// Node positions `x_i = i dx` (m).
    pub x: Vec<f64>,
    /// Node fluxes (V s).
    pub phi: Vec<f64>,
    /// Charge density `p_i / dx` (C/m); the coupling node's finite charge is
    /// excluded (it is not a density).
    pub charge_density: Vec<f64>,
}

struct Rhs<'a> {
    sys: &'a LatticeSystem,
    inv_cj: f64,
    inv_lj: f64,
    a: f64,
    inv_dx_c0: f64,
    inv_l0_dx: f64,
}

impl Rhs<'_> {
    fn eval(&self, y: &[f64], out: &mut [f64]) {
        let s = self.sys;
        let n_left = s.n_left as i64;
        let n_right = s.n_right as i64;
        // qubit: d phi_J = (p_J + p_0)/C_J ; d p_J = -phi_J / L_J
        out[0] = (y[1] + y[2]) * self.inv_cj;
        out[1] = -y[0] * self.inv_lj;
        // d p_0 = (phi_1 - 2 phi_0 + phi_-1) / (L_0 dx)
        let phi0 = y[s.phi_index(0)];
        let phi_m1 = y[s.phi_index(-1)];
        let phi_p1 = if n_right > 1 { y[s.phi_index(1)] } else { 0.0 };
        out[2] = (phi_p1 - 2.0 * phi0 + phi_m1) * self.inv_l0_dx;
        // d phi_i
        for i in -n_left..n_right {
            let idx = s.phi_index(i);
            out[idx] = if i == 0 {
                self.a * y[2] + y[1] * self.inv_cj
            } else {
                y[s.p_index(i)] * self.inv_dx_c0
            };
        }
        // d p_i = (phi_{i+1} - 2 phi_i + phi_{i-1}) / (L_0 dx), ends shorted
        for i in -n_left..n_right {
            if i == 0 {
                continue;
            }
            let phi_c = y[s.phi_index(i)];
            let phi_l = if i - 1 < -n_left { 0.0 } else { y[s.phi_index(i - 1)] };
            let phi_r = if i + 1 >= n_right { 0.0 } else { y[s.phi_index(i + 1)] };
            out[s.p_index(i)] = (phi_r - 2.0 * phi_c + phi_l) * self.inv_l0_dx;
        }
    }
}

/// Integrate the lattice with classical Runge-Kutta.
///
/// Starts from junction charge `P` (normalized to unit energy) with the
/// coupling node at its zero-impedance lock and an empty line. Qubit
/// observables are recorded every `output_stride` steps; full field
/// snapshots are retained at `snapshot_times` (which must land on the output
/// grid).
pub fn integrate_lattice(
    sys: &LatticeSystem,
    params: &CircuitParams,
    horizon: f64,
    step: f64,
    output_stride: usize,
    snapshot_times: &[f64],
) -> Result<LatticeRun, LatticeError> {
    let cfl = 0.5 * sys.dx / sys.v0;
    if !(step > 0.0) || step > cfl * (1.0 + 1e-12) {
        return Err(LatticeError::CflViolation { step, bound: cfl });
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(LatticeError::BadHorizon(horizon));
    }
    let n_steps = (horizon / step).ceil() as usize;
    let output_stride = output_stride.max(1);
    let len = sys.state_len();
    let rhs = Rhs {
        sys,
        inv_cj: 1.0 / params.c_j,
        inv_lj: 1.0 / params.l_j,
        a: params.c_sigma() / (params.c_c * params.c_j),
        inv_dx_c0: 1.0 / (sys.dx * sys.c0),
        inv_l0_dx: 1.0 / (sys.l0 * sys.dx),
    };

    let p_init = (2.0 * params.c_sigma()).sqrt();
    let mut y = vec![0.0; len];
    y[1] = p_init;
    y[2] = -params.cap_ratio() * p_init;

    let output_step = step * output_stride as f64;
    let snap_nodes: Vec<usize> = snapshot_times
        .iter()
        .map(|&t| {
            let q = (t / output_step).round();
            if (q * output_step - t).abs() <= 1e-9 * t.abs().max(output_step) && q >= 0.0 {
                Ok(q as usize * output_stride)
            } else {
                Err(LatticeError::OffGrid { t })
            }
        })
        .collect::<Result<_, _>>()?;

    let mut k1 = vec![0.0; len];
    let mut k2 = vec![0.0; len];
    let mut k3 = vec![0.0; len];
    let mut k4 = vec![0.0; len];
    let mut ytmp = vec![0.0; len];

    let mut times = Vec::new();
    let mut p_j = Vec::new();
    let mut q_j = Vec::new();
    let mut p_0 = Vec::new();
    let mut phi_j = Vec::new();
    let mut e = Vec::new();
    let mut snapshots = Vec::new();

    let mut record = |n: usize, y: &[f64], snapshots: &mut Vec<(f64, Vec<f64>)>| {
        let t = n as f64 * step;
        times.push(t);
        p_j.push(y[1]);
        q_j.push(-y[0] / params.l_j);
        p_0.push(y[2]);
        phi_j.push(y[0]);
        e.push(qubit_energy(params, y));
        if snap_nodes.contains(&n) {
            snapshots.push((t, y.to_vec()));
        }
    };
    record(0, &y, &mut snapshots);

    for n in 0..n_steps {
        rhs.eval(&y, &mut k1);
        for i in 0..len {
            ytmp[i] = y[i] + 0.5 * step * k1[i];
        }
        rhs.eval(&ytmp, &mut k2);
        for i in 0..len {
            ytmp[i] = y[i] + 0.5 * step * k2[i];
        }
        rhs.eval(&ytmp, &mut k3);
        for i in 0..len {
            ytmp[i] = y[i] + step * k3[i];
        }
        rhs.eval(&ytmp, &mut k4);
        for i in 0..len {
            y[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if (n + 1) % 64 == 0 || n + 1 == n_steps {
            if let Some(index) = y.iter().position(|v| !v.is_finite()) {
                return Err(LatticeError::NonFinite {
                    t: (n + 1) as f64 * step,
                    index,
                });
            }
        }
        if (n + 1) % output_stride == 0 {
            record(n + 1, &y, &mut snapshots);
        }
    }

    let e0 = e[0];
    let e_norm: Vec<f64> = e.iter().map(|&v| v / e0).collect();
    let trajectory = Trajectory {
        times,
        columns: vec![
            Column { name: "p_j".into(), values: p_j },
            Column { name: "q_j".into(), values: q_j },
            Column { name: "p_0".into(), values: p_0 },
            Column { name: "phi_j".into(), values: phi_j },
            Column { name: "e".into(), values: e },
            Column { name: "e_norm".into(), values: e_norm },
        ],
        metadata: Metadata {
            params_hash: params_hash(params),
            model: "lattice".into(),
            step,
            horizon: n_steps as f64 * step,
        },
    };
    Ok(LatticeRun {
        trajectory,
        snapshots,
        output_step,
    })
}

/// Qubit energy from a lattice state (three-term form, flux stored directly).
pub fn qubit_energy(params: &CircuitParams, y: &[f64]) -> f64 {
    let (phi_j, p_j, p_0) = (y[0], y[1], y[2]);
    let s = p_j + p_0;
    s * s / (2.0 * params.c_j)
        + p_0 * p_0 / (2.0 * params.c_c)
        + phi_j * phi_j / (2.0 * params.l_j)
}

/// Total energy: qubit plus line charge and inductor terms, including the
/// edge inductors to the shorted boundaries. Conserved by the flow.
pub fn total_energy(sys: &LatticeSystem, params: &CircuitParams, y: &[f64]) -> f64 {
    let mut total = qubit_energy(params, y);
    let n_left = sys.n_left as i64;
    let n_right = sys.n_right as i64;
    for i in -n_left..n_right {
        if i != 0 {
            let p = y[sys.p_index(i)];
            total += p * p / (2.0 * sys.c0 * sys.dx);
        }
        let phi_c = y[sys.phi_index(i)];
        let phi_l = if i - 1 < -n_left { 0.0 } else { y[sys.phi_index(i - 1)] };
        total += (phi_c - phi_l) * (phi_c - phi_l) / (2.0 * sys.l0 * sys.dx);
    }
    // last inductor to the grounded mirror node
    let phi_last = y[sys.phi_index(n_right - 1)];
    total += phi_last * phi_last / (2.0 * sys.l0 * sys.dx);
    total
}

/// Field profile at an output-grid time retained during integration.
pub fn field_snapshot(
    sys: &LatticeSystem,
    run: &LatticeRun,
    t: f64,
) -> Result<SpatialProfile, LatticeError> {
    let found = run
        .snapshots
        .iter()
        .find(|(ts, _)| (ts - t).abs() <= 1e-9 * t.abs().max(run.output_step));
    let (_, y) = found.ok_or(LatticeError::OffGrid { t })?;
    let n_left = sys.n_left as i64;
    let n_right = sys.n_right as i64;
    let mut x = Vec::new();
    let mut phi = Vec::new();
    let mut charge_density = Vec::new();
    for i in -n_left..n_right {
        x.push(i as f64 * sys.dx);
        phi.push(y[sys.phi_index(i)]);
        charge_density.push(if i == 0 {
            f64::NAN
        } else {
            y[sys.p_index(i)] / sys.dx
        });
    }
    Ok(SpatialProfile {
        x,
        phi,
        charge_density,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
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
    fn build_snaps_mirror_to_grid() {
        // T = 10 pi, ppw = 64: L/dx = 5 pi / (2 pi / 64) = 160
        let p = build_params(&spec(0.3, 1.0, PlacementSpec::Node(5))).unwrap();
        let sys = build_lattice(&p, 64, 3.0 * p.delay_t).unwrap();
        assert_eq!(sys.n_right, 160);
        let mirror_l = sys.v0 * p.delay_t / 2.0;
        assert!((sys.n_right as f64 * sys.dx - mirror_l).abs() <= 1e-12 * mirror_l);
        // velocity identity
        let v = 1.0 / (sys.l0 * sys.c0).sqrt();
        assert!((v - sys.v0).abs() <= 1e-12 * sys.v0);
    }

    #[test]
    fn memory_cap_reports_requirement() {
        let p = build_params(&spec(0.3, 1.0, PlacementSpec::Node(5))).unwrap();
        match build_lattice_with_cap(&p, 64, 1e5 * p.delay_t, 10_000) {
            Err(LatticeError::MemoryCap { needed, cap }) => {
                assert!(needed > cap);
            }
            other => panic!("expected MemoryCap, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn cfl_violation_rejected() {
        let p = build_params(&spec(0.3, 1.0, PlacementSpec::Node(1))).unwrap();
        let sys = build_lattice(&p, 32, p.delay_t).unwrap();
        let bad = 0.6 * sys.dx / sys.v0;
        assert!(matches!(
            integrate_lattice(&sys, &p, p.delay_t, bad, 1, &[]),
            Err(LatticeError::CflViolation { .. })
        ));
    }

    #[test]
    fn decoupled_qubit_conserves_energy() {
        let p = build_params(&spec(1e-9, 1.0, PlacementSpec::Node(1))).unwrap();
        let sys = build_lattice(&p, 32, 20.0 * 2.0 * std::f64::consts::PI).unwrap();
        let step = 0.4 * sys.dx / sys.v0;
        let run = integrate_lattice(
            &sys,
            &p,
            20.0 * 2.0 * std::f64::consts::PI,
            step,
            16,
            &[],
        )
        .unwrap();
        let e = run.trajectory.column("e_norm").unwrap();
        for &v in e {
            assert!((v - 1.0).abs() < 1e-8, "e_norm = {v}");
        }
    }

    #[test]
    fn initial_snapshot_is_vacuum() {
        let p = build_params(&spec(0.3, 1.0, PlacementSpec::Node(1))).unwrap();
        let sys = build_lattice(&p, 32, p.delay_t).unwrap();
        let step = 0.4 * sys.dx / sys.v0;
        let run = integrate_lattice(&sys, &p, p.delay_t, step, 1, &[0.0]).unwrap();
        let snap = field_snapshot(&sys, &run, 0.0).unwrap();
        assert!(snap.phi.iter().all(|&v| v == 0.0));
        assert!(snap
            .charge_density
            .iter()
            .all(|&v| v == 0.0 || v.is_nan()));
        assert!(matches!(
            field_snapshot(&sys, &run, 0.1234567),
            Err(LatticeError::OffGrid { .. })
        ));
    }
}
