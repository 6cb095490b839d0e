//! One-period propagators, Floquet modes and quasi-energies, stroboscopic
//! mode grids, and Fourier matrix elements of the bath coupling.

use ndarray::{Array1, Array2};
use ndarray_linalg::Eig;
use num_complex::Complex64 as C64;

use crate::circuits::DrivenModel;
use crate::error::{Error, Result};
use crate::hilbert::{dagger, eigh_sorted, expi_from_eigh, unitarity_error, CMat};

/// Integration scheme for the one-period propagator. Every scheme is
/// unitary-preserving: each substep is an exact exponential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepMethod {
    /// Fourth-order composition over the fastest exact substep the model
    /// supports (gauge-evaluated midpoint, split step, or plain midpoint).
    #[default]
    Auto,
    /// Exponential midpoint: exponentiate H at the step midpoint (order 2).
    /// Models with a diagonal gauge structure evaluate the same exponential
    /// exactly through the gauge transform.
    ExpMidpoint,
    /// Yoshida triple-jump composition of the midpoint step (order 4).
    ExpMidpoint4,
    /// Strang split of the diagonal linear part around the Josephson part
    /// (order 2); requires split data on the model.
    SplitStep,
    /// Yoshida composition of the split step (order 4).
    SplitStep4,
}

#[derive(Debug, Clone, Copy)]
pub struct PropagatorOptions {
    pub steps_per_period: usize,
    pub method: StepMethod,
    pub unitarity_tol: f64,
}

impl Default for PropagatorOptions {
    fn default() -> Self {
        Self { steps_per_period: 1024, method: StepMethod::Auto, unitarity_tol: 1e-9 }
    }
}

impl PropagatorOptions {
    pub fn validate(&self) -> Result<()> {
        if self.steps_per_period < 32 {
            return Err(Error::Config("steps_per_period must be at least 32".into()));
        }
        if self.unitarity_tol > 1e-8 {
            return Err(Error::Config("unitarity_tol must be <= 1e-8".into()));
        }
        Ok(())
    }
}

// Yoshida triple-jump coefficients: composing a symmetric second-order step
// with substep fractions (w1, w0, w1) yields a fourth-order method.
const YOSHIDA_W1: f64 = 1.351207191959657634; // 1/(2 - 2^(1/3))
const YOSHIDA_W0: f64 = 1.0 - 2.0 * YOSHIDA_W1;

/// Per-substep evaluation route.
enum StepKind<'m> {
    /// Exponentiate H at the substep midpoint by eigendecomposition.
    Midpoint { model: &'m DrivenModel },
    /// U_sub = D(s)^dag exp(-i H0 tau) D(s) with D(s) = diag(e^{i s N});
    /// exact evaluation of the midpoint exponential for gauge-form models.
    /// One precomputed exp(-i H0 tau_i) per distinct substep length.
    Gauge { e0: Vec<CMat>, n_diag: &'m Array1<f64>, xi: f64, omega_p: f64 },
    /// U_sub = Dh W diag(e^{i tau E_J cos(w + s)}) W^dag Dh with
    /// Dh = diag(e^{-i h_diag tau/2}).
    Split {
        half_diag: Vec<Array1<C64>>,
        w: &'m CMat,
        w_dag: CMat,
        phi_vals: &'m Array1<f64>,
        e_j: f64,
        xi: f64,
        omega_p: f64,
    },
}

struct Stepper<'m> {
    /// Substep lengths in seconds; their sum is the full step dt.
    taus: Vec<f64>,
    kind: StepKind<'m>,
    dt: f64,
}

fn scale_rows(u: &mut CMat, phases: &Array1<C64>) {
    for (mut row, ph) in u.outer_iter_mut().zip(phases.iter()) {
        row.mapv_inplace(|z| z * ph);
    }
}

impl<'m> Stepper<'m> {
    fn new(model: &'m DrivenModel, opts: &PropagatorOptions) -> Result<Self> {
        let dt = model.period() / opts.steps_per_period as f64;
        let (use_split, order4) = match opts.method {
            StepMethod::Auto => (model.split.is_some(), true),
            StepMethod::ExpMidpoint => (false, false),
            StepMethod::ExpMidpoint4 => (false, true),
            StepMethod::SplitStep => (true, false),
            StepMethod::SplitStep4 => (true, true),
        };
        let taus = if order4 {
            vec![YOSHIDA_W1 * dt, YOSHIDA_W0 * dt, YOSHIDA_W1 * dt]
        } else {
            vec![dt]
        };
        let kind = if use_split {
            let split = model.split.as_ref().ok_or_else(|| {
                Error::Config("split-step integration requires a model with split data".into())
            })?;
            let half_diag = taus
                .iter()
                .map(|tau| split.h_diag.mapv(|v| C64::from_polar(1.0, -0.5 * tau * v)))
                .collect();
            StepKind::Split {
                half_diag,
                w: &split.phi_vecs,
                w_dag: dagger(&split.phi_vecs),
                phi_vals: &split.phi_vals,
                e_j: split.e_j,
                xi: model.xi,
                omega_p: model.omega_p,
            }
        } else if let Some(gauge) = &model.gauge {
            let (vals, vecs) = eigh_sorted(&model.h_static())?;
            let e0 = taus.iter().map(|tau| expi_from_eigh(&vals, &vecs, -tau)).collect();
            StepKind::Gauge { e0, n_diag: &gauge.n_diag, xi: model.xi, omega_p: model.omega_p }
        } else {
            StepKind::Midpoint { model }
        };
        Ok(Stepper { taus, kind, dt })
    }

    fn dt(&self) -> f64 {
        self.dt
    }

    /// Apply the propagator for [t, t + dt] to u in place.
    fn apply(&self, t: f64, u: &mut CMat) -> Result<()> {
        let mut t_sub = t;
        for (i, &tau) in self.taus.iter().enumerate() {
            let t_mid = t_sub + 0.5 * tau;
            match &self.kind {
                StepKind::Midpoint { model } => {
                    let h = model.h_at(t_mid);
                    let (vals, vecs) = eigh_sorted(&h)?;
                    let step = expi_from_eigh(&vals, &vecs, -tau);
                    *u = step.dot(u);
                }
                StepKind::Gauge { e0, n_diag, xi, omega_p } => {
                    let s = xi * (omega_p * t_mid).sin();
                    let d = n_diag.mapv(|n| C64::from_polar(1.0, s * n));
                    let d_conj = d.mapv(|z| z.conj());
                    scale_rows(u, &d);
                    *u = e0[i].dot(u);
                    scale_rows(u, &d_conj);
                }
                StepKind::Split { half_diag, w, w_dag, phi_vals, e_j, xi, omega_p } => {
                    let s = xi * (omega_p * t_mid).sin();
                    let mid = phi_vals.mapv(|v| C64::from_polar(1.0, tau * e_j * (v + s).cos()));
                    scale_rows(u, &half_diag[i]);
                    *u = w_dag.dot(u);
                    scale_rows(u, &mid);
                    *u = w.dot(u);
                    scale_rows(u, &half_diag[i]);
                }
            }
            t_sub += tau;
        }
        Ok(())
    }
}

/// One-period propagator U(T, 0) (the monodromy matrix).
pub fn propagate_period(model: &DrivenModel, opts: &PropagatorOptions) -> Result<CMat> {
    opts.validate()?;
    let stepper = Stepper::new(model, opts)?;
    let dt = stepper.dt();
    let mut u = Array2::eye(model.dim());
    for j in 0..opts.steps_per_period {
        stepper.apply(j as f64 * dt, &mut u)?;
    }
    let uerr = unitarity_error(&u);
    if uerr > opts.unitarity_tol {
        return Err(Error::Integration(format!(
            "monodromy lost unitarity: |U^dag U - I| = {uerr:.3e} after {} steps (tol {:.1e})",
            opts.steps_per_period, opts.unitarity_tol
        )));
    }
    Ok(u)
}

/// One-period propagator plus snapshots U(t_j, 0) on a stroboscopic grid of
/// n_t points t_j = j T / n_t. Snapshots include t_0 = 0.
pub fn propagate_with_snapshots(
    model: &DrivenModel,
    opts: &PropagatorOptions,
    n_t: usize,
) -> Result<(CMat, Vec<CMat>)> {
    opts.validate()?;
    if !n_t.is_power_of_two() || n_t < 64 {
        return Err(Error::Config(format!("strobe grid must be a power of two >= 64, got {n_t}")));
    }
    // keep the strobe times on step boundaries
    let steps = opts.steps_per_period.div_ceil(n_t) * n_t;
    let per_snap = steps / n_t;
    let adjusted = PropagatorOptions { steps_per_period: steps, ..*opts };
    let stepper = Stepper::new(model, &adjusted)?;
    let dt = stepper.dt();
    let mut u = Array2::eye(model.dim());
    let mut snaps = Vec::with_capacity(n_t);
    for j in 0..steps {
        if j % per_snap == 0 {
            snaps.push(u.clone());
        }
        stepper.apply(j as f64 * dt, &mut u)?;
    }
    let uerr = unitarity_error(&u);
    if uerr > opts.unitarity_tol {
        return Err(Error::Integration(format!(
            "monodromy lost unitarity: |U^dag U - I| = {uerr:.3e} (tol {:.1e})",
            opts.unitarity_tol
        )));
    }
    Ok((u, snaps))
}

/// Max-norm difference of the monodromy between steps_per_period and its
/// doubling; the step-doubling convergence diagnostic.
pub fn step_doubling_residual(model: &DrivenModel, opts: &PropagatorOptions) -> Result<f64> {
    let u1 = propagate_period(model, opts)?;
    let opts2 = PropagatorOptions { steps_per_period: opts.steps_per_period * 2, ..*opts };
    let u2 = propagate_period(model, &opts2)?;
    Ok(crate::hilbert::max_abs_diff(&u1, &u2))
}

/// Per-step propagators U(t_{j+1}, t_j) for one period, in order.
pub fn step_propagators(model: &DrivenModel, opts: &PropagatorOptions) -> Result<Vec<CMat>> {
    opts.validate()?;
    let stepper = Stepper::new(model, opts)?;
    let dt = stepper.dt();
    let dim = model.dim();
    let mut out = Vec::with_capacity(opts.steps_per_period);
    for j in 0..opts.steps_per_period {
        let mut u = Array2::eye(dim);
        stepper.apply(j as f64 * dt, &mut u)?;
        out.push(u);
    }
    Ok(out)
}

/// Fold an energy into the first Brillouin zone (-omega_p/2, omega_p/2].
pub fn fold_quasi_energy(e: f64, omega_p: f64) -> f64 {
    let mut x = e - omega_p * (e / omega_p).round();
    if x <= -0.5 * omega_p {
        x += omega_p;
    }
    if x > 0.5 * omega_p {
        x -= omega_p;
    }
    x
}

/// Floquet modes at t = 0 with first-zone quasi-energies, sorted ascending.
#[derive(Debug, Clone)]
pub struct FloquetBasis {
    pub period: f64,
    pub omega_p: f64,
    /// Quasi-energies in (-omega_p/2, omega_p/2], ascending.
    pub quasi_energies: Array1<f64>,
    /// Mode vectors at t = 0, columns, same order as the quasi-energies.
    pub modes_t0: CMat,
    /// Smallest circular quasi-energy gap, in units of omega_p.
    pub min_gap_rel: f64,
    /// Set when the smallest gap is below 1e-6 omega_p.
    pub degenerate: bool,
    /// Worst eigen-residual |U phi - lambda phi| over modes.
    pub residual: f64,
}

impl FloquetBasis {
    pub fn len(&self) -> usize {
        self.quasi_energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quasi_energies.is_empty()
    }
}

fn orthonormality_error(m: &CMat) -> f64 {
    let p = dagger(m).dot(m);
    let n = p.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((p[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Gram-Schmidt within clusters of near-equal quasi-energy; eigenvectors of a
/// unitary matrix are orthogonal across distinct eigenvalues, so only
/// clusters need repair.
fn orthonormalize_clusters(modes: &mut CMat, quasi: &Array1<f64>, omega_p: f64, tol: f64) {
    let n = quasi.len();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (quasi[end] - quasi[end - 1]).abs() < tol * omega_p {
            end += 1;
        }
        if end - start > 1 {
            for i in start..end {
                let mut v = modes.column(i).to_owned();
                for j in start..i {
                    let u = modes.column(j);
                    let overlap: C64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                    let u_owned = u.to_owned();
                    v.zip_mut_with(&u_owned, |x, y| *x -= overlap * y);
                }
                let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if norm > 0.0 {
                    v.mapv_inplace(|z| z / norm);
                }
                modes.column_mut(i).assign(&v);
            }
        }
        start = end;
    }
}

/// Diagonalize the monodromy matrix into Floquet modes and quasi-energies,
/// epsilon_alpha = -arg(lambda_alpha)/T folded into the first zone.
pub fn floquet_modes(u: &CMat, period: f64) -> Result<FloquetBasis> {
    let uerr = unitarity_error(u);
    if uerr > 1e-8 {
        return Err(Error::Contract(format!("floquet_modes input not unitary ({uerr:.3e})")));
    }
    let omega_p = std::f64::consts::TAU / period;
    let (lambdas, vecs) = u.eig()?;
    let n = lambdas.len();

    let mut order: Vec<usize> = (0..n).collect();
    let quasi_of = |l: C64| fold_quasi_energy(-l.arg() / period, omega_p);
    order.sort_by(|&i, &j| quasi_of(lambdas[i]).total_cmp(&quasi_of(lambdas[j])));

    let mut quasi = Array1::zeros(n);
    let mut modes = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        quasi[dst] = quasi_of(lambdas[src]);
        let col = vecs.column(src);
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for r in 0..n {
            modes[(r, dst)] = col[r] / norm;
        }
    }

    // repair the degenerate clusters first so their subspaces are spanned
    // cleanly, then sweep a global modified Gram-Schmidt: eigenvectors of a
    // normal matrix are orthogonal across distinct eigenvalues, so the global
    // pass only removes O(solver noise) overlaps.
    orthonormalize_clusters(&mut modes, &quasi, omega_p, 1e-9);
    for i in 0..n {
        let mut v = modes.column(i).to_owned();
        for j in 0..i {
            let u = modes.column(j).to_owned();
            let overlap: C64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
            v.zip_mut_with(&u, |x, y| *x -= overlap * y);
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.mapv_inplace(|z| z / norm);
        }
        modes.column_mut(i).assign(&v);
    }
    let ortho = orthonormality_error(&modes);
    if ortho > 1e-9 {
        return Err(Error::Integration(format!(
            "Floquet modes could not be orthonormalized (residual {ortho:.3e})"
        )));
    }

    // circular minimum gap, including the zone wrap
    let mut min_gap = f64::INFINITY;
    for i in 1..n {
        min_gap = min_gap.min(quasi[i] - quasi[i - 1]);
    }
    if n > 1 {
        min_gap = min_gap.min(quasi[0] + omega_p - quasi[n - 1]);
    }
    let min_gap_rel = min_gap / omega_p;

    // eigen-residual: U phi = e^{-i eps T} phi
    let uphi = u.dot(&modes);
    let mut residual: f64 = 0.0;
    for (k, eps) in quasi.iter().enumerate() {
        let lam = C64::from_polar(1.0, -eps * period);
        for r in 0..n {
            residual = residual.max((uphi[(r, k)] - lam * modes[(r, k)]).norm());
        }
    }
    if residual > 1e-6 {
        return Err(Error::Integration(format!(
            "Floquet mode reconstruction residual too large ({residual:.3e})"
        )));
    }

    Ok(FloquetBasis {
        period,
        omega_p,
        quasi_energies: quasi,
        modes_t0: modes,
        min_gap_rel,
        degenerate: min_gap_rel < 1e-6,
        residual,
    })
}

/// Floquet modes on the stroboscopic grid:
/// Phi_alpha(t_j) = e^{i eps_alpha t_j} U(t_j, 0) Phi_alpha(0).
#[derive(Debug, Clone)]
pub struct StrobeModes {
    pub times: Vec<f64>,
    /// One matrix per grid time, mode vectors as columns.
    pub modes: Vec<CMat>,
}

impl StrobeModes {
    pub fn n_t(&self) -> usize {
        self.times.len()
    }
}

pub fn propagate_modes(
    model: &DrivenModel,
    basis: &FloquetBasis,
    n_t: usize,
    opts: &PropagatorOptions,
) -> Result<StrobeModes> {
    let (_, snaps) = propagate_with_snapshots(model, opts, n_t)?;
    strobe_from_snapshots(basis, &snaps, model.period())
}

/// Build the strobe grid from precomputed U(t_j, 0) snapshots.
pub fn strobe_from_snapshots(
    basis: &FloquetBasis,
    snaps: &[CMat],
    period: f64,
) -> Result<StrobeModes> {
    let n_t = snaps.len();
    let mut times = Vec::with_capacity(n_t);
    let mut modes = Vec::with_capacity(n_t);
    for (j, u_j) in snaps.iter().enumerate() {
        let t_j = j as f64 * period / n_t as f64;
        let mut phi = u_j.dot(&basis.modes_t0);
        for (mut col, eps) in phi.columns_mut().into_iter().zip(basis.quasi_energies.iter()) {
            let ph = C64::from_polar(1.0, eps * t_j);
            col.mapv_inplace(|z| z * ph);
        }
        times.push(t_j);
        modes.push(phi);
    }
    Ok(StrobeModes { times, modes })
}

/// Fourier matrix elements of a coupling operator between Floquet modes:
/// P_k[alpha, beta] = (i/T) \int_0^T e^{-i k wp t} <Phi_alpha(t)|C|Phi_beta(t)> dt,
/// evaluated by the DFT over the stroboscopic grid.
#[derive(Debug, Clone)]
pub struct FourierElements {
    pub k_max: usize,
    /// Index k + k_max holds sideband k, for k in -k_max..=k_max.
    pub p: Vec<CMat>,
    /// Fraction of spectral weight outside |k| <= k_max (Parseval estimate).
    pub tail_fraction: f64,
}

impl FourierElements {
    pub fn at(&self, alpha: usize, beta: usize, k: i32) -> C64 {
        self.p[(k + self.k_max as i32) as usize][(alpha, beta)]
    }

    pub fn n_modes(&self) -> usize {
        self.p[self.k_max].nrows()
    }

    /// Worst violation of P[beta, alpha, -k] = conj(P[alpha, beta, k]).
    pub fn symmetry_error(&self) -> f64 {
        let n = self.n_modes();
        let kk = self.k_max as i32;
        let mut worst: f64 = 0.0;
        for k in -kk..=kk {
            for a in 0..n {
                for b in 0..n {
                    let lhs = self.at(b, a, -k);
                    let rhs = self.at(a, b, k).conj();
                    worst = worst.max((lhs - rhs).norm());
                }
            }
        }
        worst
    }
}

pub fn fourier_elements(grid: &StrobeModes, coupling: &CMat, k_max: usize) -> Result<FourierElements> {
    let n_t = grid.n_t();
    if n_t == 0 {
        return Err(Error::Config("empty strobe grid".into()));
    }
    if k_max > n_t / 2 - 1 {
        return Err(Error::Config(format!(
            "k_max = {k_max} aliases on an n_t = {n_t} grid (needs k_max <= n_t/2 - 1)"
        )));
    }
    let n = grid.modes[0].nrows();
    let n_k = 2 * k_max + 1;
    let mut p: Vec<CMat> = (0..n_k).map(|_| Array2::zeros((n, n))).collect();
    let mut total_power = 0.0;
    // The printed convention is (i/T) with the bare anti-Hermitian (a - a^dag);
    // taking the Hermitian physical coupling i(a - a^dag) as the argument
    // absorbs that factor exactly, so the DFT weight is 1/N_t.
    let inv_nt = C64::new(1.0 / n_t as f64, 0.0);
    for (j, phi) in grid.modes.iter().enumerate() {
        let bracket = dagger(phi).dot(&coupling.dot(phi));
        total_power += bracket.iter().map(|z| z.norm_sqr()).sum::<f64>() / n_t as f64;
        let base = -std::f64::consts::TAU * j as f64 / n_t as f64;
        for (ki, pk) in p.iter_mut().enumerate() {
            let k = ki as i32 - k_max as i32;
            let phase = C64::from_polar(1.0, base * k as f64) * inv_nt;
            pk.zip_mut_with(&bracket, |dst, src| *dst += phase * src);
        }
    }
    let partial: f64 = p.iter().map(|pk| pk.iter().map(|z| z.norm_sqr()).sum::<f64>()).sum();
    let tail_fraction = if total_power > 0.0 { (1.0 - partial / total_power).max(0.0) } else { 0.0 };
    Ok(FourierElements { k_max, p, tail_fraction })
}

/// Label each mode column by the reference column with maximal overlap.
/// Returns (label, |overlap|^2) per mode.
pub fn dominant_overlap_labels(modes: &CMat, reference: &CMat) -> Vec<(usize, f64)> {
    let ov = dagger(reference).dot(modes);
    let n_ref = ov.nrows();
    let n_modes = ov.ncols();
    let mut out = Vec::with_capacity(n_modes);
    for c in 0..n_modes {
        let mut best = (0usize, -1.0f64);
        for r in 0..n_ref {
            let w = ov[(r, c)].norm_sqr();
            if w > best.1 {
                best = (r, w);
            }
        }
        out.push(best);
    }
    out
}
