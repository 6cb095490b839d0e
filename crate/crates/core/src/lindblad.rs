//! Brute-force Lindblad validation at small truncation: build the one-period
//! propagator of the master equation and extract its periodic steady state,
//! independently of the Floquet-Markov rate construction.
//!
//! Each time step applies a Strang sandwich: half a dissipation step, the
//! exact unitary midpoint step, half a dissipation step. The dissipative
//! half-step uses a second-order Taylor expansion of exp(D dt/2), which
//! preserves the trace identically because tr D[X] = 0 for any X.

use ndarray::{Array1, Array2};
use ndarray_linalg::{FactorizeInto, Solve};
use num_complex::Complex64 as C64;

use crate::circuits::DrivenModel;
use crate::error::{Error, Result};
use crate::floquet::{step_propagators, PropagatorOptions};
use crate::hilbert::{dagger, eigh_sorted, CMat, CVec};

/// One collapse channel sqrt(rate) * op. The operator must have a diagonal
/// op^dag op (true for embedded ladder operators), which keeps the
/// dissipator application at O(dim^2).
#[derive(Debug, Clone)]
pub struct CollapseChannel {
    triplets: Vec<(usize, usize, C64)>,
    opdag_op_diag: Array1<f64>,
    rate: f64,
    dim: usize,
}

impl CollapseChannel {
    pub fn new(op: &CMat, rate: f64) -> Result<Self> {
        if rate < 0.0 {
            return Err(Error::Config("collapse rate must be nonnegative".into()));
        }
        let dim = op.nrows();
        let prod = dagger(op).dot(op);
        let mut diag = Array1::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                if i == j {
                    diag[i] = prod[(i, j)].re;
                } else if prod[(i, j)].norm() > 1e-12 {
                    return Err(Error::Config(
                        "collapse operator needs a diagonal op^dag op".into(),
                    ));
                }
            }
        }
        let mut triplets = Vec::new();
        for ((r, c), v) in op.indexed_iter() {
            if v.norm() > 0.0 {
                triplets.push((r, c, *v));
            }
        }
        Ok(Self { triplets, opdag_op_diag: diag, rate, dim })
    }

    /// rate * (L rho L^dag - {L^dag L, rho}/2), accumulated into out.
    fn apply_into(&self, rho: &CMat, out: &mut CMat) {
        let r = self.rate;
        // sandwich via the sparse triplets: sum_{ab,cd} v_ab conj(v_cd) rho[b, d]
        for &(ra, ca, va) in &self.triplets {
            for &(rb, cb, vb) in &self.triplets {
                out[(ra, rb)] += r * va * vb.conj() * rho[(ca, cb)];
            }
        }
        for i in 0..self.dim {
            for j in 0..self.dim {
                let anti = 0.5 * (self.opdag_op_diag[i] + self.opdag_op_diag[j]);
                out[(i, j)] -= r * anti * rho[(i, j)];
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OracleMethod {
    /// Solve (V - I) vec(rho) = 0 by shifted inverse iteration on the
    /// one-period map V.
    #[default]
    KernelSolve,
    /// Iterate the stroboscopic map rho(nT) until the trace-norm increment
    /// drops below tol; errors out past max_periods.
    PowerIteration,
}

#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    pub steps_per_period: usize,
    /// Trace-norm tolerance on || rho((n+1)T) - rho(nT) ||.
    pub tol: f64,
    /// Horizon for the power-iteration method, in periods.
    pub max_periods: usize,
    pub method: OracleMethod,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            steps_per_period: 512,
            tol: 1e-9,
            max_periods: 2_000_000,
            method: OracleMethod::KernelSolve,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleSteadyState {
    pub rho0: CMat,
    /// Trace-norm of rho(T) - rho(0) at the returned state.
    pub residual: f64,
    /// Most negative eigenvalue of the returned density matrix.
    pub min_eigenvalue: f64,
    /// Periods iterated (power iteration) or 0 for the kernel solve.
    pub periods: usize,
}

/// The one-period map of the master equation as a dim^2 x dim^2 matrix over
/// vectorized density matrices (row-major flattening).
pub struct PeriodMap {
    v: Array2<C64>,
    dim: usize,
}

impl PeriodMap {
    pub fn build(
        model: &DrivenModel,
        channels: &[CollapseChannel],
        cfg: &OracleConfig,
    ) -> Result<Self> {
        let dim = model.dim();
        for c in channels {
            if c.dim != dim {
                return Err(Error::ShapeMismatch("collapse channel dimension mismatch".into()));
            }
        }
        let opts = PropagatorOptions {
            steps_per_period: cfg.steps_per_period,
            ..Default::default()
        };
        let steps = step_propagators(model, &opts)?;
        let dt = model.period() / cfg.steps_per_period as f64;

        let n2 = dim * dim;
        let mut v = Array2::zeros((n2, n2));
        // evolve the upper-triangle basis matrices; adjoint symmetry of the
        // map fills the rest
        for r in 0..dim {
            for s in r..dim {
                let mut rho = CMat::zeros((dim, dim));
                rho[(r, s)] = C64::new(1.0, 0.0);
                evolve_one_period(&mut rho, &steps, channels, dt);
                let col = r * dim + s;
                for (flat, val) in rho.iter().enumerate() {
                    v[(flat, col)] = *val;
                }
                if s != r {
                    // map(E_sr) = map(E_rs)^dag
                    let col_t = s * dim + r;
                    for i in 0..dim {
                        for j in 0..dim {
                            v[(i * dim + j, col_t)] = rho[(j, i)].conj();
                        }
                    }
                }
            }
        }
        Ok(Self { v, dim })
    }

    pub fn apply(&self, rho: &CMat) -> CMat {
        let flat = CVec::from_iter(rho.iter().cloned());
        let out = self.v.dot(&flat);
        Array2::from_shape_vec((self.dim, self.dim), out.to_vec()).expect("shape")
    }
}

fn evolve_one_period(rho: &mut CMat, steps: &[CMat], channels: &[CollapseChannel], dt: f64) {
    let half = 0.5 * dt;
    for u in steps {
        dissipate(rho, channels, half);
        let tmp = u.dot(rho).dot(&dagger(u));
        rho.assign(&tmp);
        dissipate(rho, channels, half);
    }
}

/// rho <- rho + tau D[rho] + (tau^2/2) D[D[rho]]; trace-exact.
fn dissipate(rho: &mut CMat, channels: &[CollapseChannel], tau: f64) {
    if channels.is_empty() {
        return;
    }
    let dim = rho.nrows();
    let mut d1 = CMat::zeros((dim, dim));
    for c in channels {
        c.apply_into(rho, &mut d1);
    }
    let mut d2 = CMat::zeros((dim, dim));
    for c in channels {
        c.apply_into(&d1, &mut d2);
    }
    let t = C64::new(tau, 0.0);
    let t2 = C64::new(0.5 * tau * tau, 0.0);
    rho.zip_mut_with(&d1, |a, b| *a += t * b);
    rho.zip_mut_with(&d2, |a, b| *a += t2 * b);
}

/// Trace norm ||A||_1 of a Hermitian matrix.
fn trace_norm_hermitian(a: &CMat) -> f64 {
    let sym = (a + &dagger(a)).mapv(|z| z * C64::new(0.5, 0.0));
    match eigh_sorted(&sym) {
        Ok((vals, _)) => vals.iter().map(|v| v.abs()).sum(),
        Err(_) => f64::NAN,
    }
}

/// Periodic steady state of the driven Lindblad equation, stroboscopically
/// sampled at t = 0 mod T.
pub fn lindblad_steady_state(
    model: &DrivenModel,
    channels: &[CollapseChannel],
    cfg: &OracleConfig,
) -> Result<OracleSteadyState> {
    let map = PeriodMap::build(model, channels, cfg)?;
    let dim = map.dim;
    match cfg.method {
        OracleMethod::KernelSolve => {
            let n2 = dim * dim;
            let shift = C64::new(1.0 + 1e-10, 0.0);
            let mut a = map.v.clone();
            for i in 0..n2 {
                a[(i, i)] -= shift;
            }
            let lu = a.factorize_into()?;
            // inverse iteration from the maximally mixed state
            let mut x = CVec::zeros(n2);
            for i in 0..dim {
                x[i * dim + i] = C64::new(1.0 / dim as f64, 0.0);
            }
            for _ in 0..4 {
                let y = lu.solve(&x)?;
                let norm = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                x = y.mapv(|z| z / norm);
            }
            let mut rho = Array2::from_shape_vec((dim, dim), x.to_vec()).expect("shape");
            finalize_state(&map, &mut rho, cfg.tol, 0)
        }
        OracleMethod::PowerIteration => {
            let mut rho = CMat::eye(dim).mapv(|z| z / dim as f64);
            let mut periods = 0usize;
            let check_every = 16;
            loop {
                let mut last = rho.clone();
                for _ in 0..check_every {
                    rho = map.apply(&rho);
                    periods += 1;
                }
                let diff = &rho - &last;
                let resid = trace_norm_hermitian(&diff);
                if resid < cfg.tol {
                    break;
                }
                if periods >= cfg.max_periods {
                    return Err(Error::Convergence(format!(
                        "oracle not stroboscopically converged after {periods} periods \
                         (residual {resid:.3e}, tol {:.1e})",
                        cfg.tol
                    )));
                }
                last.assign(&rho);
            }
            finalize_state(&map, &mut rho, cfg.tol, periods)
        }
    }
}

fn finalize_state(
    map: &PeriodMap,
    rho: &mut CMat,
    tol: f64,
    periods: usize,
) -> Result<OracleSteadyState> {
    // hermitize and normalize the trace
    let herm = (rho.view().to_owned() + dagger(rho)).mapv(|z| z * C64::new(0.5, 0.0));
    let trace: C64 = herm.diag().iter().sum();
    if trace.norm() < 1e-300 {
        return Err(Error::Convergence("oracle steady state has vanishing trace".into()));
    }
    let rho_n = herm.mapv(|z| z / trace);
    let next = map.apply(&rho_n);
    let residual = trace_norm_hermitian(&(&next - &rho_n));
    if !(residual < tol) {
        return Err(Error::Convergence(format!(
            "oracle steady state residual {residual:.3e} exceeds tol {tol:.1e}"
        )));
    }
    let (vals, _) = eigh_sorted(&rho_n)?;
    let min_eigenvalue = vals[0];
    if min_eigenvalue < -1e-9 {
        return Err(Error::Convergence(format!(
            "oracle steady state not positive (min eigenvalue {min_eigenvalue:.3e})"
        )));
    }
    Ok(OracleSteadyState { rho0: rho_n, residual, min_eigenvalue, periods })
}

/// Trace distance (1/2) || a - b ||_1.
pub fn trace_distance(a: &CMat, b: &CMat) -> f64 {
    0.5 * trace_norm_hermitian(&(a - b))
}

/// Uhlmann fidelity (tr sqrt(sqrt(a) b sqrt(a)))^2.
pub fn fidelity(a: &CMat, b: &CMat) -> Result<f64> {
    let (vals, vecs) = eigh_sorted(a)?;
    let mut sqrt_a = vecs.clone();
    for (mut col, v) in sqrt_a.columns_mut().into_iter().zip(vals.iter()) {
        let s = C64::new(v.max(0.0).sqrt(), 0.0);
        col.mapv_inplace(|z| z * s);
    }
    let sqrt_a = sqrt_a.dot(&dagger(&vecs));
    let m = sqrt_a.dot(b).dot(&sqrt_a);
    let (mv, _) = eigh_sorted(&m)?;
    let root_sum: f64 = mv.iter().map(|v| v.max(0.0).sqrt()).sum();
    Ok(root_sum * root_sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{annihilation, number_op, BasisSpec};
    use approx::assert_relative_eq;

    fn static_oscillator_model(
        omega: f64,
        drive: f64,
        dim: usize,
    ) -> (DrivenModel, CollapseChannel, f64) {
        // rotating-frame driven cavity: H = detuning n + i (A/2)(a^dag - a)
        let omega_p = 2.0 * std::f64::consts::PI * 6.0e9;
        let basis = BasisSpec::fock(dim).unwrap();
        let a = annihilation(dim).unwrap();
        let mut h = number_op(dim).mapv(|z| z * C64::new(omega, 0.0));
        h += &(dagger(&a) - &a).mapv(|z| z * C64::new(0.0, 0.5 * drive));
        let kappa = 2.0 * std::f64::consts::PI * 2.0e6;
        let channel = CollapseChannel::new(&a, kappa).unwrap();
        let model = DrivenModel {
            basis,
            h_lin: h,
            cos_part: CMat::zeros((dim, dim)),
            sin_part: CMat::zeros((dim, dim)),
            xi: 0.0,
            omega_p,
            gauge: None,
            split: None,
        };
        (model, channel, kappa)
    }

    #[test]
    fn damped_oscillator_relaxes_to_vacuum() {
        let (model, channel, _) = static_oscillator_model(2.0e9, 0.0, 6);
        let cfg = OracleConfig { steps_per_period: 64, ..Default::default() };
        let out = lindblad_steady_state(&model, &[channel], &cfg).unwrap();
        assert!(out.rho0[(0, 0)].re > 1.0 - 1e-6, "vacuum weight {:.6}", out.rho0[(0, 0)].re);
        assert!(out.min_eigenvalue > -1e-9);
    }

    #[test]
    fn driven_damped_oscillator_reaches_coherent_state() {
        let detuning = 2.0 * std::f64::consts::PI * 3.0e6;
        let drive = 2.0 * std::f64::consts::PI * 2.0e6;
        let (model, channel, kappa) = static_oscillator_model(detuning, drive, 12);
        let cfg = OracleConfig { steps_per_period: 64, ..Default::default() };
        let out = lindblad_steady_state(&model, &[channel], &cfg).unwrap();
        let nbar_expected = drive * drive / (4.0 * (detuning * detuning + kappa * kappa / 4.0));
        let n_op = number_op(12);
        let nbar: f64 = out.rho0.dot(&n_op).diag().iter().map(|z| z.re).sum();
        assert_relative_eq!(nbar, nbar_expected, max_relative = 1e-4);
        // coherent steady state is pure up to O(truncation)
        assert!(crate::observables::impurity(&out.rho0) < 1e-6);
    }

    #[test]
    fn power_iteration_agrees_with_kernel_solve() {
        let detuning = 2.0 * std::f64::consts::PI * 5.0e6;
        let drive = 2.0 * std::f64::consts::PI * 3.0e6;
        let (model, channel, _) = static_oscillator_model(detuning, drive, 8);
        let cfg_k = OracleConfig { steps_per_period: 64, ..Default::default() };
        let cfg_p = OracleConfig {
            steps_per_period: 64,
            method: OracleMethod::PowerIteration,
            tol: 1e-10,
            max_periods: 2_000_000,
        };
        let a = lindblad_steady_state(&model, &[channel.clone()], &cfg_k).unwrap();
        let b = lindblad_steady_state(&model, &[channel], &cfg_p).unwrap();
        assert!(b.periods > 0);
        assert!(trace_distance(&a.rho0, &b.rho0) < 1e-7);
    }

    #[test]
    fn map_preserves_trace_and_positivity() {
        let (model, channel, _) = static_oscillator_model(1.0e9, 4.0e6, 6);
        let cfg = OracleConfig { steps_per_period: 64, ..Default::default() };
        let map = PeriodMap::build(&model, &[channel], &cfg).unwrap();
        // random-ish valid density matrix
        let mut rho = CMat::zeros((6, 6));
        for i in 0..6 {
            rho[(i, i)] = C64::new((i + 1) as f64, 0.0);
        }
        rho[(0, 2)] = C64::new(0.4, 0.3);
        rho[(2, 0)] = C64::new(0.4, -0.3);
        let tr: C64 = rho.diag().iter().sum();
        rho.mapv_inplace(|z| z / tr);
        for _ in 0..20 {
            rho = map.apply(&rho);
            let trace: C64 = rho.diag().iter().sum();
            assert!((trace.re - 1.0).abs() < 1e-9 && trace.im.abs() < 1e-12);
            let (vals, _) = eigh_sorted(&rho).unwrap();
            assert!(vals[0] > -1e-9, "positivity violated: {:.3e}", vals[0]);
        }
    }

    #[test]
    fn comparison_metrics_limits() {
        let mut a = CMat::zeros((3, 3));
        a[(0, 0)] = C64::new(1.0, 0.0);
        let mut b = CMat::zeros((3, 3));
        b[(1, 1)] = C64::new(1.0, 0.0);
        assert_relative_eq!(trace_distance(&a, &a), 0.0, epsilon = 1e-12);
        assert_relative_eq!(fidelity(&a, &a).unwrap(), 1.0, epsilon = 1e-10);
        assert_relative_eq!(trace_distance(&a, &b), 1.0, epsilon = 1e-12);
        assert_relative_eq!(fidelity(&a, &b).unwrap(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn rejects_non_diagonal_opdag_op() {
        let dim = 4;
        let a = annihilation(dim).unwrap();
        let x = &a + &dagger(&a);
        assert!(CollapseChannel::new(&x, 1.0).is_err());
    }
}
