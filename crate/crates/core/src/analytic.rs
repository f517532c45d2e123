//! Closed-form and series solutions: the inverse-Laplace residue series for
//! the reduced mirror model, final-value steady states, the open-line
//! fast-oscillation energy formula, and the frequency-dependent coupling
//! spectrum.

use num_complex::Complex64;
use thiserror::Error;

use crate::params::{derive, CircuitParams, ParamsError, Placement};

/// Hard cap on the number of round-trip terms the series will evaluate.
pub const MAX_ROUNDTRIPS: usize = 400;

/// Imaginary residue above which the conjugate-pair cancellation is
/// considered broken.
const IMAG_BREAKDOWN: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum AnalyticError {
    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("t/T = {needed} round trips exceed the evaluation cap {cap}")]
    RoundtripCapExceeded { needed: usize, cap: usize },
    #[error("conjugate-pair cancellation broke down (imaginary residue {imag:.3e})")]
    NumericalBreakdown { imag: f64 },
    #[error("final-value steady state requires a node placement, found {0:?}")]
    NotAtNode(Placement),
    #[error("rate must be non-negative and finite, got {0}")]
    BadRate(f64),
    #[error("frequency must be positive and finite, got {0}")]
    BadFrequency(f64),
    #[error("delay must be positive and finite, got {0}")]
    BadDelay(f64),
    #[error(transparent)]
    Params(#[from] ParamsError),
}

/// Parameters of the residue-series solution of
/// `p_J'' = -omega_0^2 p_J - gamma_0 (p_J' (t) - p_J'(t - T))`
/// with `p_J(0) = 1`, `p_J'(0) = 0` and empty pre-history.
#[derive(Debug, Clone)]
pub struct ResidueSeries {
    gamma_0: f64,
    omega_0: f64,
    delay_t: f64,
    s_plus: Complex64,
    s_minus: Complex64,
    ln_fact: Vec<f64>,
}

impl ResidueSeries {
    /// Build the series, fixing the characteristic roots
    /// `s_pm = -gamma_0/2 pm alpha/2`, `alpha = 2 sqrt((gamma_0/2)^2 - omega_0^2)`
    /// on the principal branch with `Im(alpha) >= 0`.
    pub fn new(gamma_0: f64, omega_0: f64, delay_t: f64) -> Result<Self, AnalyticError> {
        if !(gamma_0 >= 0.0) || !gamma_0.is_finite() {
            return Err(AnalyticError::BadRate(gamma_0));
        }
        if !(omega_0 > 0.0) || !omega_0.is_finite() {
            return Err(AnalyticError::BadFrequency(omega_0));
        }
        if !(delay_t > 0.0) || !delay_t.is_finite() {
            return Err(AnalyticError::BadDelay(delay_t));
        }
        let disc = Complex64::new(0.25 * gamma_0 * gamma_0 - omega_0 * omega_0, 0.0);
        let mut alpha = 2.0 * disc.sqrt();
        if alpha.im < 0.0 {
            alpha = -alpha;
        }
        let s_plus = Complex64::new(-0.5 * gamma_0, 0.0) + 0.5 * alpha;
        let s_minus = Complex64::new(-0.5 * gamma_0, 0.0) - 0.5 * alpha;
        // root invariants: sum = -gamma_0, product = omega_0^2
        let sum = s_plus + s_minus;
        let prod = s_plus * s_minus;
        debug_assert!((sum + gamma_0).norm() <= 1e-12 * gamma_0.max(1.0));
        debug_assert!((prod - omega_0 * omega_0).norm() <= 1e-12 * omega_0 * omega_0);
        // ln k! for k = 0..=2*MAX_ROUNDTRIPS (covers (n+j)! with j <= n)
        let mut ln_fact = Vec::with_capacity(2 * MAX_ROUNDTRIPS + 2);
        ln_fact.push(0.0);
        let mut acc = 0.0;
        for k in 1..=(2 * MAX_ROUNDTRIPS + 1) {
            acc += (k as f64).ln();
            ln_fact.push(acc);
        }
        Ok(Self {
            gamma_0,
            omega_0,
            delay_t,
            s_plus,
            s_minus,
            ln_fact,
        })
    }

    pub fn roots(&self) -> (Complex64, Complex64) {
        (self.s_plus, self.s_minus)
    }

    /// `p_J(t) / p_J(0)`.
    pub fn eval(&self, t: f64) -> Result<f64, AnalyticError> {
        self.eval_with_derivative(t).map(|(p, _)| p)
    }

    /// `(p_J(t), dp_J/dt(t)) / p_J(0)`; the derivative is the analytic
    /// term-by-term derivative (right-sided at multiples of the delay).
    pub fn eval_with_derivative(&self, t: f64) -> Result<(f64, f64), AnalyticError> {
        if !(t >= 0.0) {
            return Err(AnalyticError::NegativeTime(t));
        }
        if self.gamma_0 == 0.0 {
            let w = self.omega_0;
            return Ok(((w * t).cos(), -w * (w * t).sin()));
        }
        let roundtrips = (t / self.delay_t).floor() as usize;
        if roundtrips > MAX_ROUNDTRIPS {
            return Err(AnalyticError::RoundtripCapExceeded {
                needed: roundtrips,
                cap: MAX_ROUNDTRIPS,
            });
        }
        let ln_g0 = self.gamma_0.ln();
        let mut value = Kahan::default();
        let mut slope = Kahan::default();
        for n in 0..=roundtrips {
            let tau = t - n as f64 * self.delay_t;
            let ln_tau = if tau > 0.0 { tau.ln() } else { f64::NEG_INFINITY };
            for (a, d) in [
                (self.s_plus, self.s_plus - self.s_minus),
                (self.s_minus, self.s_minus - self.s_plus),
            ] {
                let ln_a = a.ln();
                let ln_d = d.ln();
                let a_tau = a * tau;
                for i in 0..=n {
                    // i-th derivative at 0 of (s+a)^n (s+a+g):
                    //   i! a^{n-i} [ C(n,i-1) a + C(n,i) (a+g) ]
                    let ln_c_prev = if i >= 1 {
                        Some(self.ln_fact[n] - self.ln_fact[i - 1] - self.ln_fact[n - i + 1])
                    } else {
                        None
                    };
                    let ln_c = self.ln_fact[n] - self.ln_fact[i] - self.ln_fact[n - i];
                    let lmax = ln_c_prev.unwrap_or(f64::NEG_INFINITY).max(ln_c);
                    let mut resid = Complex64::new(0.0, 0.0);
                    if let Some(lc) = ln_c_prev {
                        resid += (lc - lmax).exp() * a;
                    }
                    resid += (ln_c - lmax).exp() * (a + self.gamma_0);
                    if resid.norm() == 0.0 {
                        continue;
                    }
                    let ln_fi =
                        self.ln_fact[i] + (n - i) as f64 * ln_a + lmax + resid.ln();
                    for j in 0..=(n - i) {
                        let k = n - i - j;
                        let ln_gj = self.ln_fact[n + j]
                            - self.ln_fact[n]
                            - (n + 1 + j) as f64 * ln_d;
                        let sign = if j % 2 == 1 { -1.0 } else { 1.0 };
                        // common log-scale factor without the tau^k power
                        let base_ln = (n as f64) * ln_g0
                            - self.ln_fact[i]
                            - self.ln_fact[j]
                            - self.ln_fact[k]
                            + ln_fi
                            + ln_gj
                            + a_tau;
                        if tau == 0.0 {
                            // tau^k kills k >= 1 in the value; the derivative
                            // keeps k = 1 through k tau^{k-1}.
                            if k == 0 {
                                let term = sign * base_ln.exp();
                                value.add(term);
                                slope.add(term * a);
                            } else if k == 1 {
                                slope.add(sign * base_ln.exp());
                            }
                            continue;
                        }
                        let term = sign * (base_ln + k as f64 * ln_tau).exp();
                        value.add(term);
                        slope.add(term * (a + k as f64 / tau));
                    }
                }
            }
        }
        let v = value.sum();
        let s = slope.sum();
        let imag = v.im.abs().max(s.im.abs() / self.omega_0.max(1.0));
        if imag > IMAG_BREAKDOWN {
            return Err(AnalyticError::NumericalBreakdown { imag });
        }
        debug_assert!(imag <= 1e-9, "imaginary residue {imag}");
        Ok((v.re, s.re))
    }
}

/// Compensated complex accumulator.
#[derive(Default)]
struct Kahan {
    sum: Complex64,
    comp: Complex64,
}

impl Kahan {
    fn add(&mut self, term: Complex64) {
        let y = term - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    fn sum(&self) -> Complex64 {
        self.sum
    }
}

/// Long-time envelope amplitudes at a node,
/// `p_J(inf)/p_J(0) = 1/(1 + gamma_0 T/2)` and
/// `p_0(inf)/p_J(0) = -C_c/(C_c+C_J) * p_J(inf)/p_J(0)`.
///
/// The final-value argument applies the Laplace limit at `s = +-i omega_0`,
/// which collapses only when `omega_0 T = 2 pi n`; any other placement is
/// rejected.
pub fn steady_state_amplitudes(params: &CircuitParams) -> Result<(f64, f64), AnalyticError> {
    let d = derive(params)?;
    match d.placement {
        Placement::Node(_) => {}
        other => return Err(AnalyticError::NotAtNode(other)),
    }
    let pj = 1.0 / (1.0 + 0.5 * d.gamma_0 * params.delay_t);
    Ok((pj, -params.cap_ratio() * pj))
}

/// Validity of the weak-damping closed form below.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedFormValidity {
    Valid,
    /// `0.2 <= gamma/omega_0 < 0.5`: qualitative only.
    Marginal,
    /// `gamma/omega_0 >= 0.5`: outside the derivation's regime.
    Invalid,
}

pub fn closed_form_validity(gamma: f64, omega_0: f64) -> ClosedFormValidity {
    let x = gamma / omega_0;
    if x < 0.2 {
        ClosedFormValidity::Valid
    } else if x < 0.5 {
        ClosedFormValidity::Marginal
    } else {
        ClosedFormValidity::Invalid
    }
}

/// Weak-damping open-line energy,
/// `E/E_0 = e^{-gamma t} [1 + gamma/(2 omega_0) sin(2 omega_0 t)
///   + gamma^2/(4 omega_0^2) cos^2(omega_0 t)]`.
///
/// Derived for `gamma / omega_0 << 1` from the charge-only solution
/// `e^{-gamma t / 2} cos(omega_0 t)`; see [`closed_form_validity`].
pub fn open_tl_energy_closed_form(gamma: f64, omega_0: f64, t: f64) -> f64 {
    let g = gamma / (2.0 * omega_0);
    (-gamma * t).exp()
        * (1.0 + g * (2.0 * omega_0 * t).sin()
            + g * g * (omega_0 * t).cos() * (omega_0 * t).cos())
}

/// `sin(x)` with exact zeros at multiples of pi (within 1e-12 relative),
/// so destructive-interference nodes come out exactly zero.
fn snapped_sin(x: f64) -> f64 {
    let k = (x / std::f64::consts::PI).round();
    if (x - k * std::f64::consts::PI).abs() <= 1e-12 * x.abs().max(1.0) {
        0.0
    } else {
        x.sin()
    }
}

/// Squared frequency-dependent coupling of the mirrored line, and the open
/// line reference:
/// `V_mirror^2 = (gamma/2pi)(omega/omega_0) sin^2(omega L/v)`,
/// `V_open^2 = (gamma/4pi)(omega/omega_0)`.
///
/// The open-line reference is normalized so the mirror curve's `sin^2`
/// average reproduces it; its envelope is then exactly twice the open line.
pub fn coupling_spectrum(
    gamma: f64,
    omega_0: f64,
    mirror_l_over_v: f64,
    omega: f64,
) -> Result<(f64, f64), AnalyticError> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(AnalyticError::BadFrequency(omega));
    }
    if !(gamma >= 0.0) {
        return Err(AnalyticError::BadRate(gamma));
    }
    let s = snapped_sin(omega * mirror_l_over_v);
    let scale = gamma / (2.0 * std::f64::consts::PI) * omega / omega_0;
    Ok((scale * s * s, 0.5 * scale))
}

/// Squared coupling from the circuit quantization,
/// `[C_c/(C_c+C_J)]^2 (Z_0 / 4 pi L_J)(omega/omega_0) sin^2(omega L/v)`;
/// equals the `gamma_0` form of [`coupling_spectrum`] identically.
pub fn coupling_spectrum_circuit_form(
    params: &CircuitParams,
    omega: f64,
) -> Result<f64, AnalyticError> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(AnalyticError::BadFrequency(omega));
    }
    let d = derive(params)?;
    let r = params.cap_ratio();
    let s = snapped_sin(omega * params.delay_t / 2.0);
    let v = r * (params.z_0 / (4.0 * std::f64::consts::PI * params.l_j)).sqrt()
        * (omega / d.omega_0).sqrt()
        * s;
    Ok(v * v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{build_params, DimensionlessSpec, PlacementSpec};
    use std::f64::consts::PI;

    #[test]
    fn value_at_zero_is_one() {
        let s = ResidueSeries::new(0.02, 1.0, 10.0 * PI).unwrap();
        let (p, dp) = s.eval_with_derivative(0.0).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
        assert!(dp.abs() < 1e-12);
    }

    #[test]
    fn undamped_limit_is_cosine() {
        let s = ResidueSeries::new(1e-14, 1.0, 2.0 * PI).unwrap();
        for &t in &[0.3, 1.234, 5.0, 11.1] {
            assert!((s.eval(t).unwrap() - t.cos()).abs() < 1e-9);
        }
        let s0 = ResidueSeries::new(0.0, 2.0, PI).unwrap();
        assert!((s0.eval(0.7).unwrap() - (1.4f64).cos()).abs() < 1e-15);
    }

    #[test]
    fn continuous_across_roundtrip_boundaries() {
        let s = ResidueSeries::new(0.05, 1.0, 2.0 * PI).unwrap();
        for n in 1..=4 {
            let tb = n as f64 * 2.0 * PI;
            let eps = 1e-8;
            let lo = s.eval(tb - eps).unwrap();
            let hi = s.eval(tb + eps).unwrap();
            assert!((hi - lo).abs() < 1e-6, "jump {} at n = {n}", hi - lo);
        }
    }

    #[test]
    fn negative_time_rejected_and_cap_enforced() {
        let s = ResidueSeries::new(0.05, 1.0, 1.0).unwrap();
        assert!(matches!(s.eval(-0.1), Err(AnalyticError::NegativeTime(_))));
        assert!(matches!(
            s.eval(401.5),
            Err(AnalyticError::RoundtripCapExceeded { .. })
        ));
    }

    #[test]
    fn steady_state_values() {
        // gamma_0 T = 2 pi at a node: 1/(1+pi)
        let spec = DimensionlessSpec {
            omega_0: 1.0,
            cap_ratio_r: 0.5,
            imp_ratio_z: 2.0 * 0.1 * 0.5f64.sqrt() / 0.25,
            placement: PlacementSpec::Node(10),
        };
        let p = build_params(&spec).unwrap();
        let d = derive(&p).unwrap();
        assert!((d.gamma_0 * p.delay_t - 2.0 * PI).abs() < 1e-12);
        let (pj, p0) = steady_state_amplitudes(&p).unwrap();
        assert!((pj - 1.0 / (1.0 + PI)).abs() < 1e-14);
        assert!((pj - 0.241_453_0).abs() < 1e-7);
        assert!((p0 + p.cap_ratio() * pj).abs() < 1e-15);
        // energy consistency: pj^2 equals the dark-state ratio
        let dark = crate::params::dark_state_energy_ratio(d.gamma_0, p.delay_t);
        assert!((pj * pj - dark).abs() < 1e-14);
    }

    #[test]
    fn steady_state_rejects_non_node() {
        let spec = DimensionlessSpec {
            omega_0: 1.0,
            cap_ratio_r: 0.5,
            imp_ratio_z: 1.0,
            placement: PlacementSpec::Antinode(1),
        };
        let p = build_params(&spec).unwrap();
        assert!(matches!(
            steady_state_amplitudes(&p),
            Err(AnalyticError::NotAtNode(_))
        ));
    }

    #[test]
    fn closed_form_endpoints() {
        assert_eq!(open_tl_energy_closed_form(0.0, 1.0, 12.3), 1.0);
        let g = 0.1;
        let e0 = open_tl_energy_closed_form(g, 1.0, 0.0);
        assert!((e0 - (1.0 + g * g / 4.0)).abs() < 1e-15);
        assert_eq!(closed_form_validity(0.1, 1.0), ClosedFormValidity::Valid);
        assert_eq!(closed_form_validity(0.3, 1.0), ClosedFormValidity::Marginal);
        assert_eq!(closed_form_validity(0.6, 1.0), ClosedFormValidity::Invalid);
    }

    #[test]
    fn spectrum_node_zero_and_envelope() {
        let l_over_v = 5.0 * PI; // node configuration: omega_0 L / v = 5 pi
        let (vm, _vo) = coupling_spectrum(0.05, 1.0, l_over_v, 1.0).unwrap();
        assert_eq!(vm, 0.0);
        // envelope at sin^2 = 1 is exactly twice the open line
        let omega = (5.5) * PI / l_over_v;
        let (vm, vo) = coupling_spectrum(0.05, 1.0, l_over_v, omega).unwrap();
        assert!((vm - 2.0 * vo).abs() <= 1e-6 * vm.max(1e-300));
        // zeros exactly at k pi v / L
        for k in 1..=7 {
            let omega = k as f64 * PI / l_over_v;
            let (vm, _) = coupling_spectrum(0.05, 1.0, l_over_v, omega).unwrap();
            assert_eq!(vm, 0.0);
        }
    }

    #[test]
    fn spectrum_matches_circuit_form() {
        let spec = DimensionlessSpec {
            omega_0: 1.0,
            cap_ratio_r: 0.37,
            imp_ratio_z: 2.5,
            placement: PlacementSpec::Node(5),
        };
        let p = build_params(&spec).unwrap();
        let d = derive(&p).unwrap();
        for &omega in &[0.5, 0.93, 1.0, 1.21, 1.5] {
            let (vm, _) = coupling_spectrum(d.gamma_0, d.omega_0, p.delay_t / 2.0, omega).unwrap();
            let vc = coupling_spectrum_circuit_form(&p, omega).unwrap();
            assert!(
                (vm - vc).abs() <= 1e-12 * vm.abs().max(1e-300),
                "omega = {omega}: {vm} vs {vc}"
            );
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]
            // V^2 >= 0 and vanishes exactly at multiples of pi v / L
            #[test]
            fn spectrum_nonnegative(gw in 0.001f64..0.3, lv in 1.0f64..50.0, omega in 0.01f64..5.0) {
                let (vm, vo) = coupling_spectrum(gw, 1.0, lv, omega).unwrap();
                prop_assert!(vm >= 0.0 && vo > 0.0);
                prop_assert!(vm <= 2.0 * vo * (1.0 + 1e-12));
            }

            #[test]
            fn circuit_form_identity(r in 0.05f64..0.9, logz in -1.5f64..1.5, omega in 0.3f64..3.0) {
                let spec = DimensionlessSpec {
                    omega_0: 1.0,
                    cap_ratio_r: r,
                    imp_ratio_z: 10f64.powf(logz),
                    placement: PlacementSpec::Node(3),
                };
                let p = build_params(&spec).unwrap();
                let d = derive(&p).unwrap();
                let (vm, _) = coupling_spectrum(d.gamma_0, d.omega_0, p.delay_t / 2.0, omega).unwrap();
                let vc = coupling_spectrum_circuit_form(&p, omega).unwrap();
                prop_assert!((vm - vc).abs() <= 1e-12 * vm.abs().max(1e-300));
            }
        }
    }
}
