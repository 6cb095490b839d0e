//! Golden-rule rates between Floquet modes, the population rate equation,
//! and the driven-dissipative steady state as a Floquet-mode mixture.

use ndarray::{Array1, Array2};
use ndarray_linalg::SVD;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::floquet::{FloquetBasis, FourierElements};
use crate::hilbert::CMat;

const BOLTZMANN_OVER_HBAR: f64 = 1.380649e-23 / 1.054571817e-34; // rad/s per kelvin

/// Bath spectral model. The white spectrum is flat for positive frequencies
/// and vanishes for omega <= 0, which makes zero-temperature dynamics
/// strictly downward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spectrum {
    White { j0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub spectrum: Spectrum,
    /// Bath temperature in kelvin; 0 disables thermal occupation.
    pub temperature: f64,
}

impl NoiseModel {
    /// White spectrum chosen so a bare oscillator acquires linewidth kappa.
    pub fn white_for_kappa(kappa: f64) -> Self {
        Self { spectrum: Spectrum::White { j0: kappa / std::f64::consts::TAU }, temperature: 0.0 }
    }

    pub fn with_temperature(mut self, kelvin: f64) -> Self {
        self.temperature = kelvin;
        self
    }

    /// Spectral density J(omega), gated to positive frequencies.
    pub fn j(&self, omega: f64) -> f64 {
        if omega <= 0.0 {
            return 0.0;
        }
        match self.spectrum {
            Spectrum::White { j0 } => j0,
        }
    }

    /// Thermal occupation at |omega|.
    pub fn n_th(&self, omega: f64) -> f64 {
        if self.temperature <= 0.0 || omega == 0.0 {
            return 0.0;
        }
        let x = omega.abs() / (BOLTZMANN_OVER_HBAR * self.temperature);
        1.0 / (x.exp() - 1.0)
    }
}

/// Rate tensor gamma[alpha, beta, k] and the summed transition matrix
/// L[alpha, beta] (rate into alpha from beta).
#[derive(Debug, Clone)]
pub struct RateData {
    pub k_max: usize,
    /// gamma[k + k_max] is the (n x n) rate matrix at sideband k.
    pub gamma: Vec<Array2<f64>>,
    pub l: Array2<f64>,
}

impl RateData {
    pub fn gamma_at(&self, alpha: usize, beta: usize, k: i32) -> f64 {
        self.gamma[(k + self.k_max as i32) as usize][(alpha, beta)]
    }
}

/// Golden-rule rates: gamma[alpha, beta, k] = 2 pi Theta(D) J(D) |P_k[alpha, beta]|^2
/// with D = eps_beta - eps_alpha + k omega_p, plus the thermal extension in L.
pub fn rates(f: &FourierElements, basis: &FloquetBasis, noise: &NoiseModel) -> Result<RateData> {
    let n = basis.len();
    if f.n_modes() != n {
        return Err(Error::ShapeMismatch(format!(
            "Fourier elements cover {} modes, basis has {n}",
            f.n_modes()
        )));
    }
    let k_max = f.k_max;
    let eps = &basis.quasi_energies;
    let omega_p = basis.omega_p;
    let two_pi = std::f64::consts::TAU;

    let mut gamma: Vec<Array2<f64>> = Vec::with_capacity(2 * k_max + 1);
    for ki in 0..2 * k_max + 1 {
        let k = ki as i32 - k_max as i32;
        let mut g = Array2::zeros((n, n));
        for a in 0..n {
            for b in 0..n {
                let delta = eps[b] - eps[a] + k as f64 * omega_p;
                let j = noise.j(delta);
                if j > 0.0 {
                    g[(a, b)] = two_pi * j * f.at(a, b, k).norm_sqr();
                }
            }
        }
        gamma.push(g);
    }

    let mut l = Array2::zeros((n, n));
    let thermal = noise.temperature > 0.0;
    for ki in 0..2 * k_max + 1 {
        let k = ki as i32 - k_max as i32;
        for a in 0..n {
            for b in 0..n {
                let mut term = gamma[ki][(a, b)];
                if thermal {
                    let delta = eps[b] - eps[a] + k as f64 * omega_p;
                    let n_th = noise.n_th(delta);
                    if n_th > 0.0 {
                        let g_rev = gamma[(-k + k_max as i32) as usize][(b, a)];
                        term += n_th * (gamma[ki][(a, b)] + g_rev);
                    }
                }
                l[(a, b)] += term;
            }
        }
    }

    Ok(RateData { k_max, gamma, l })
}

/// Rate-equation generator R: off-diagonal R[a, b] = L[a, b], diagonal
/// R[a, a] = L[a, a] - sum_nu L[nu, a]. Columns sum to zero by construction.
pub fn generator(l: &Array2<f64>) -> Array2<f64> {
    let n = l.nrows();
    let mut r = l.clone();
    for b in 0..n {
        let out_rate: f64 = (0..n).map(|nu| l[(nu, b)]).sum();
        r[(b, b)] = l[(b, b)] - out_rate;
    }
    r
}

#[derive(Debug, Clone)]
pub struct SteadyState {
    /// Populations over the Floquet modes, nonnegative, summing to one.
    pub populations: Array1<f64>,
    /// Dimension of the numerical kernel of R.
    pub kernel_dim: usize,
    /// Relative magnitude of the most negative raw kernel entry before
    /// clipping (diagnostic; should be at rounding level).
    pub negativity: f64,
}

impl SteadyState {
    pub fn dominant_mode(&self) -> usize {
        self.populations
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }
}

/// Normalized kernel vector of the generator built from L.
pub fn steady_state(l: &Array2<f64>) -> Result<SteadyState> {
    let n = l.nrows();
    if l.ncols() != n {
        return Err(Error::ShapeMismatch("transition matrix must be square".into()));
    }
    if l.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Contract("transition rates must be finite and nonnegative".into()));
    }
    let r = generator(l);
    let rc = r.mapv(|v| C64::new(v, 0.0));
    let (_, s, vt) = rc.svd(false, true)?;
    let vt = vt.ok_or_else(|| Error::Linalg("SVD returned no right singular vectors".into()))?;
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let tol = 1e-10 * smax.max(f64::MIN_POSITIVE);
    let kernel_dim = s.iter().filter(|&&sv| sv < tol).count().max(1);

    // right singular vector of the smallest singular value
    let kern_row = vt.row(n - 1);
    let kern: Vec<f64> = {
        // remove the arbitrary global phase, then the vector is real for a
        // real generator
        let pivot = kern_row
            .iter()
            .cloned()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap_or(C64::new(1.0, 0.0));
        let phase = pivot / pivot.norm();
        kern_row.iter().map(|z| (z * phase.conj()).re).collect()
    };
    let sum: f64 = kern.iter().sum();
    let sign = if sum < 0.0 { -1.0 } else { 1.0 };
    let scale: f64 = kern.iter().map(|v| v * sign).sum();
    if scale <= 0.0 {
        return Err(Error::Convergence("steady-state kernel vector has zero weight".into()));
    }
    let mut negativity: f64 = 0.0;
    let mut p = Array1::zeros(n);
    for (i, v) in kern.iter().enumerate() {
        let val = v * sign / scale;
        if val < 0.0 {
            negativity = negativity.max(-val);
        }
        p[i] = val.max(0.0);
    }
    if negativity > 1e-8 {
        return Err(Error::Convergence(format!(
            "steady-state kernel has negative weight {negativity:.3e}"
        )));
    }
    let total: f64 = p.sum();
    p.mapv_inplace(|v| v / total);
    Ok(SteadyState { populations: p, kernel_dim, negativity })
}

/// rho_ss at a grid time: sum_alpha p_alpha |Phi_alpha><Phi_alpha| with the
/// mode columns evaluated at that time.
pub fn assemble_rho(ss: &SteadyState, modes_at_t: &CMat) -> CMat {
    let (dim, n) = modes_at_t.dim();
    let mut rho = Array2::zeros((dim, dim));
    for alpha in 0..n {
        let p = ss.populations[alpha];
        if p == 0.0 {
            continue;
        }
        let col = modes_at_t.column(alpha);
        for r in 0..dim {
            let pr = col[r] * p;
            for c in 0..dim {
                rho[(r, c)] += pr * col[c].conj();
            }
        }
    }
    rho
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::{
        floquet_modes, fourier_elements, propagate_with_snapshots, strobe_from_snapshots,
        PropagatorOptions, StrobeModes,
    };
    use crate::hilbert::{annihilation, dagger, eigh_sorted, BasisSpec, CMat};
    use approx::assert_relative_eq;
    use ndarray::arr2;

    /// Static damped-oscillator fixture: Floquet machinery over a trivial
    /// period, coupling i(a - a^dag).
    fn oscillator_fixture(dim: usize) -> (FloquetBasis, StrobeModes, CMat) {
        let omega = 2.0 * std::f64::consts::PI * 0.11e9;
        let omega_p = 2.0 * std::f64::consts::PI * 6.0e9;
        let period = std::f64::consts::TAU / omega_p;
        let basis = BasisSpec::fock(dim).unwrap();
        let p = crate::circuits::UnshuntedParams {
            e_c: 1.0,
            e_j: 1.0,
            g: 0.0,
            omega_a: omega,
            omega_p,
            pump_amp: 0.0,
            n_g: 0.0,
        };
        // hand-build a static single-mode model
        let h = crate::hilbert::number_op(dim).mapv(|z| z * C64::new(omega, 0.0));
        let model = crate::circuits::DrivenModel {
            basis: basis.clone(),
            h_lin: h,
            cos_part: CMat::zeros((dim, dim)),
            sin_part: CMat::zeros((dim, dim)),
            xi: 0.0,
            omega_p,
            gauge: None,
            split: None,
        };
        let opts = PropagatorOptions { steps_per_period: 64, ..Default::default() };
        let (u, snaps) = propagate_with_snapshots(&model, &opts, 64).unwrap();
        let fb = floquet_modes(&u, period).unwrap();
        let grid = strobe_from_snapshots(&fb, &snaps, period).unwrap();
        let a = annihilation(dim).unwrap();
        let coupling = (&a - &dagger(&a)).mapv(|z| z * C64::new(0.0, 1.0));
        let _ = p;
        (fb, grid, coupling)
    }

    #[test]
    fn zero_spectrum_means_zero_rates() {
        let (fb, grid, coupling) = oscillator_fixture(4);
        let f = fourier_elements(&grid, &coupling, 6).unwrap();
        let noise = NoiseModel { spectrum: Spectrum::White { j0: 0.0 }, temperature: 0.0 };
        let rd = rates(&f, &fb, &noise).unwrap();
        assert!(rd.l.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn damped_oscillator_golden_rule_rates() {
        let dim = 5;
        let (fb, grid, coupling) = oscillator_fixture(dim);
        let f = fourier_elements(&grid, &coupling, 6).unwrap();
        let kappa = 2.0 * std::f64::consts::PI * 1.0e5;
        let noise = NoiseModel::white_for_kappa(kappa);
        let rd = rates(&f, &fb, &noise).unwrap();
        // Floquet modes are Fock states ordered by quasi-energy; map them
        // back to occupation order via the quasi-energy values.
        // In this fixture folding is trivial, so order is ascending Fock.
        for n in 0..dim - 1 {
            // rate into |n> from |n+1>: kappa (n+1)
            assert_relative_eq!(rd.l[(n, n + 1)], kappa * (n + 1) as f64, max_relative = 1e-8);
            // upward rate vanishes at zero temperature, up to DFT rounding
            assert!(rd.l[(n + 1, n)] < 1e-15 * kappa);
        }
        assert!(rd.gamma_at(0, 1, 0) > 0.0);
    }

    #[test]
    fn detailed_balance_with_thermal_occupation() {
        let dim = 2;
        let (fb, grid, coupling) = oscillator_fixture(dim);
        let f = fourier_elements(&grid, &coupling, 4).unwrap();
        let noise =
            NoiseModel::white_for_kappa(2.0 * std::f64::consts::PI * 1.0e5).with_temperature(0.035);
        let rd = rates(&f, &fb, &noise).unwrap();
        let omega = fb.quasi_energies[1] - fb.quasi_energies[0];
        let n_th = noise.n_th(omega);
        assert!(n_th > 1e-3, "temperature too low for the check: n_th = {n_th:.3e}");
        let down = rd.l[(0, 1)];
        let up = rd.l[(1, 0)];
        assert_relative_eq!(up / down, n_th / (n_th + 1.0), max_relative = 1e-8);
    }

    #[test]
    fn generator_columns_sum_to_zero() {
        let l = arr2(&[[0.0, 2.0, 0.3], [1.0, 0.0, 0.0], [0.5, 0.25, 0.0]]);
        let r = generator(&l);
        for b in 0..3 {
            let col: f64 = (0..3).map(|a| r[(a, b)]).sum();
            assert!(col.abs() < 1e-12 * 3.0);
        }
    }

    #[test]
    fn absorbing_state_collects_everything() {
        // single decay channel 1 -> 0
        let l = arr2(&[[0.0, 3.0e5], [0.0, 0.0]]);
        let ss = steady_state(&l).unwrap();
        assert_relative_eq!(ss.populations[0], 1.0, epsilon = 1e-12);
        assert_eq!(ss.kernel_dim, 1);
    }

    #[test]
    fn cold_bath_empties_the_ladder() {
        let dim = 5;
        let (fb, grid, coupling) = oscillator_fixture(dim);
        let f = fourier_elements(&grid, &coupling, 6).unwrap();
        let noise = NoiseModel::white_for_kappa(2.0 * std::f64::consts::PI * 1.0e5);
        let rd = rates(&f, &fb, &noise).unwrap();
        let ss = steady_state(&rd.l).unwrap();
        // ground Floquet mode is the lowest quasi-energy here
        let rho = assemble_rho(&ss, &fb.modes_t0);
        let (vals, vecs) = eigh_sorted(&crate::hilbert::number_op(dim)).unwrap();
        let _ = vals;
        let ground = vecs.column(0).to_owned();
        let fidelity: f64 = {
            let rg = rho.dot(&ground);
            ground.iter().zip(rg.iter()).map(|(a, b)| (a.conj() * b).re).sum()
        };
        assert!(fidelity > 1.0 - 1e-8, "ground fidelity {fidelity}");
    }

    #[test]
    fn steady_state_invariant_under_spectrum_rescale() {
        let dim = 5;
        let (fb, grid, coupling) = oscillator_fixture(dim);
        let f = fourier_elements(&grid, &coupling, 6).unwrap();
        let n1 = NoiseModel { spectrum: Spectrum::White { j0: 7.3e4 }, temperature: 0.0 };
        let n2 = NoiseModel { spectrum: Spectrum::White { j0: 7.3e7 }, temperature: 0.0 };
        let s1 = steady_state(&rates(&f, &fb, &n1).unwrap().l).unwrap();
        let s2 = steady_state(&rates(&f, &fb, &n2).unwrap().l).unwrap();
        let diff = s1
            .populations
            .iter()
            .zip(s2.populations.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-9, "rescale drift {diff:.3e}");
    }

    #[test]
    fn assembled_rho_is_normalized_projector_mixture() {
        let (fb, _, _) = oscillator_fixture(4);
        let mut p = Array1::zeros(4);
        p[2] = 1.0;
        let ss = SteadyState { populations: p, kernel_dim: 1, negativity: 0.0 };
        let rho = assemble_rho(&ss, &fb.modes_t0);
        let trace: C64 = rho.diag().iter().sum();
        assert_relative_eq!(trace.re, 1.0, epsilon = 1e-12);
        // rank-1 projector: rho^2 = rho
        let rho2 = rho.dot(&rho);
        assert!(crate::hilbert::max_abs_diff(&rho2, &rho) < 1e-10);
    }
}
