//! Inductively shunted transmon coupled to an oscillator: normal-mode frame,
//! displaced Hamiltonians, time-averaged model, and frame back-transforms.
//!
//! The frame chain applies, in order, a single-mode squeeze on the junction
//! mode, a beam-splitter rotation mixing the two modes, a drive-cancelling
//! displacement, and a final squeeze on each normal mode. The junction mode is
//! b = (phi + i N)/sqrt(2), so phi = (b + b^dag)/sqrt(2).

use ndarray::{arr1, arr2, Array1, Array2};
use num_complex::Complex64 as C64;

use crate::bessel::j0;
use crate::error::{Error, Result};
use crate::hilbert::{
    annihilation, dagger, eigh_sorted, embed, expi_hermitian, identity, kron, matrix_cos_sin,
    number_op, BasisSpec, CMat, ModeKind,
};

use super::{DiagnosticBasis, DrivenModel, ShuntedParams, SplitData};

/// All derived constants of the normal-mode transformation chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShuntedFrame {
    /// Beam-splitter mixing angle.
    pub theta: f64,
    /// Squeeze parameters: junction-mode impedance match, then per-mode.
    pub zeta: f64,
    pub zeta_a: f64,
    pub zeta_b: f64,
    /// Intermediate mode frequencies after the rotation.
    pub omega_1: f64,
    pub omega_2: f64,
    /// Renormalized mode frequencies.
    pub omega_a_tilde: f64,
    pub omega_b_tilde: f64,
    /// Zero-point phase amplitudes seen by the junction.
    pub phi_a: f64,
    pub phi_b: f64,
    /// Effective scalar drive amplitude inside the cosine.
    pub xi: f64,
    /// Displacement coefficients: alpha(t) = alpha_coeff (wp sin wp t + i wa cos wp t).
    pub alpha_coeff: f64,
    pub beta_coeff: f64,
    /// Bath coupling weights on the two normal modes.
    pub bath_weight_a: f64,
    pub bath_weight_b: f64,
    /// Copies of the inputs the chain was derived from.
    pub omega_a: f64,
    pub omega_p: f64,
}

impl ShuntedFrame {
    pub fn alpha(&self, t: f64) -> C64 {
        let (s, c) = (self.omega_p * t).sin_cos();
        C64::new(self.alpha_coeff * self.omega_p * s, self.alpha_coeff * self.omega_a * c)
    }

    pub fn beta(&self, t: f64) -> C64 {
        let (s, c) = (self.omega_p * t).sin_cos();
        C64::new(self.beta_coeff * self.omega_p * s, self.beta_coeff * self.omega_a * c)
    }
}

pub fn derive_shunted_frame(p: &ShuntedParams) -> Result<ShuntedFrame> {
    p.validate()?;
    let (wa, wp) = (p.omega_a, p.omega_p);
    let denom = wa * wa - 8.0 * p.e_c * p.e_l;
    let theta = -0.5 * (2.0 * p.g * (2.0 * p.e_l * wa).sqrt() / denom).atan();
    let (sin_t, cos_t) = theta.sin_cos();
    let sin_2t = (2.0 * theta).sin();

    let wb_bare = 8.0 * p.e_c * p.e_l / wa;
    let g_eff = p.g * (2.0 * p.e_l / wa).sqrt();
    let omega_1 = wa * cos_t * cos_t + wb_bare * sin_t * sin_t - g_eff * sin_2t;
    let omega_2 = wa * sin_t * sin_t + wb_bare * cos_t * cos_t + g_eff * sin_2t;
    if omega_1 <= 0.0 || omega_2 <= 0.0 {
        return Err(Error::UnstableFrame(format!(
            "normal-mode frequencies not positive: omega_1 = {omega_1:.3e}, omega_2 = {omega_2:.3e}"
        )));
    }

    for (label, w) in [("omega_1", omega_1), ("omega_2", omega_2)] {
        let det = wp * wp - wa * w;
        if det.abs() < 1e-9 * wp * wp {
            return Err(Error::SingularFrame(format!(
                "pump resonant with sqrt(omega_a {label}) (denominator {det:.3e})"
            )));
        }
    }

    let zeta = 0.5 * (p.e_l / wa).ln();
    let zeta_a = 0.25 * (wa / omega_1).ln();
    let zeta_b = 0.25 * (wa / omega_2).ln();
    let root = (wa / (2.0 * p.e_l)).sqrt();
    let phi_a = -sin_t * root * (omega_1 / wa).powf(0.25);
    let phi_b = cos_t * root * (omega_2 / wa).powf(0.25);
    let xi = p.pump_amp
        * wp
        * sin_2t
        * root
        * (1.0 / (wp * wp - wa * omega_2) - 1.0 / (wp * wp - wa * omega_1));
    let alpha_coeff = p.pump_amp * cos_t / (wp * wp - wa * omega_1);
    let beta_coeff = p.pump_amp * sin_t / (wp * wp - wa * omega_2);

    Ok(ShuntedFrame {
        theta,
        zeta,
        zeta_a,
        zeta_b,
        omega_1,
        omega_2,
        omega_a_tilde: (wa * omega_1).sqrt(),
        omega_b_tilde: (wa * omega_2).sqrt(),
        phi_a,
        phi_b,
        xi,
        alpha_coeff,
        beta_coeff,
        bath_weight_a: cos_t * (omega_1 / wa).powf(0.25),
        bath_weight_b: sin_t * (omega_2 / wa).powf(0.25),
        omega_a: wa,
        omega_p: wp,
    })
}

/// Residuals of the frame chain on the quadratic form, computed at the
/// symplectic (4x4) level in the quadratures (q_a, p_a, q_b, p_b).
///
/// Returns (max |M' - diag(w_a~, w_a~, w_b~, w_b~)| in rad/s,
/// max |phi coefficients - (sqrt2 phi_a, 0, sqrt2 phi_b, 0)|).
pub fn quadratic_residual(p: &ShuntedParams, f: &ShuntedFrame) -> (f64, f64) {
    let (sin_t, cos_t) = f.theta.sin_cos();
    let m0 = arr2(&[
        [p.omega_a, 0.0, 0.0, 0.0],
        [0.0, p.omega_a, 0.0, 2.0_f64.sqrt() * p.g],
        [0.0, 0.0, p.e_l, 0.0],
        [0.0, 2.0_f64.sqrt() * p.g, 0.0, 8.0 * p.e_c],
    ]);
    let t_s1 = Array2::from_diag(&arr1(&[1.0, 1.0, (-f.zeta).exp(), f.zeta.exp()]));
    let t_rot = arr2(&[
        [cos_t, 0.0, sin_t, 0.0],
        [0.0, cos_t, 0.0, sin_t],
        [-sin_t, 0.0, cos_t, 0.0],
        [0.0, -sin_t, 0.0, cos_t],
    ]);
    let t_s2 = Array2::from_diag(&arr1(&[
        (-f.zeta_a).exp(),
        f.zeta_a.exp(),
        (-f.zeta_b).exp(),
        f.zeta_b.exp(),
    ]));
    let t_total = t_s1.dot(&t_rot).dot(&t_s2);
    let m_final = t_total.t().dot(&m0).dot(&t_total);
    let target = [f.omega_a_tilde, f.omega_a_tilde, f.omega_b_tilde, f.omega_b_tilde];
    let mut quad_res: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let want = if i == j { target[i] } else { 0.0 };
            quad_res = quad_res.max((m_final[(i, j)] - want).abs());
        }
    }
    // phi = q_b transforms into sqrt(2) (phi_a q_a + phi_b q_b)
    let phi0 = arr1(&[0.0, 0.0, 1.0, 0.0]);
    let phi_final = phi0.dot(&t_total);
    let want = [2.0_f64.sqrt() * f.phi_a, 0.0, 2.0_f64.sqrt() * f.phi_b, 0.0];
    let phi_res = phi_final
        .iter()
        .zip(want.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    (quad_res, phi_res)
}

fn check_fock_fock(basis: &BasisSpec) -> Result<(usize, usize)> {
    if basis.num_modes() != 2
        || basis.mode(0).kind != ModeKind::Fock
        || basis.mode(1).kind != ModeKind::Fock
    {
        return Err(Error::Config(
            "shunted model needs a fock (x) fock basis for the (a~, b~) modes".into(),
        ));
    }
    Ok((basis.mode(0).dim, basis.mode(1).dim))
}

/// Phi = phi_a (a + a^dag) + phi_b (b + b^dag) on the composite basis.
pub fn phase_operator(f: &ShuntedFrame, basis: &BasisSpec) -> Result<CMat> {
    let (dim_a, dim_b) = check_fock_fock(basis)?;
    let a = annihilation(dim_a)?;
    let b = annihilation(dim_b)?;
    let xa = embed(&(&a + &dagger(&a)), 0, basis)?;
    let xb = embed(&(&b + &dagger(&b)), 1, basis)?;
    Ok(xa.mapv(|z| z * C64::new(f.phi_a, 0.0)) + xb.mapv(|z| z * C64::new(f.phi_b, 0.0)))
}

/// Assemble the displaced-frame shunted model.
pub fn shunted_model(
    p: &ShuntedParams,
    frame: &ShuntedFrame,
    basis: &BasisSpec,
) -> Result<DrivenModel> {
    let (dim_a, dim_b) = check_fock_fock(basis)?;
    let phi = phase_operator(frame, basis)?;
    let (phi_vals, phi_vecs) = eigh_sorted(&phi)?;

    // cos(Phi) and sin(Phi) from the shared eigendecomposition
    let build = |fun: fn(f64) -> f64| -> CMat {
        let mut scaled = phi_vecs.clone();
        for (mut col, v) in scaled.columns_mut().into_iter().zip(phi_vals.iter()) {
            let fv = C64::new(fun(*v), 0.0);
            col.mapv_inplace(|z| z * fv);
        }
        scaled.dot(&dagger(&phi_vecs))
    };
    let cos_phi = build(f64::cos);
    let sin_phi = build(f64::sin);

    let na = embed(&number_op(dim_a), 0, basis)?;
    let nb = embed(&number_op(dim_b), 1, basis)?;
    let h_lin = na.mapv(|z| z * C64::new(frame.omega_a_tilde, 0.0))
        + nb.mapv(|z| z * C64::new(frame.omega_b_tilde, 0.0));
    let h_diag = Array1::from_iter(h_lin.diag().iter().map(|z| z.re));

    Ok(DrivenModel {
        basis: basis.clone(),
        h_lin,
        cos_part: cos_phi.mapv(|z| z * C64::new(-p.e_j, 0.0)),
        sin_part: sin_phi.mapv(|z| z * C64::new(p.e_j, 0.0)),
        xi: frame.xi,
        omega_p: p.omega_p,
        gauge: None,
        split: Some(SplitData { h_diag, phi_vals, phi_vecs, e_j: p.e_j }),
    })
}

pub fn build_shunted_hamiltonian(
    p: &ShuntedParams,
    frame: &ShuntedFrame,
    basis: &BasisSpec,
    t: f64,
) -> Result<CMat> {
    Ok(shunted_model(p, frame, basis)?.h_at(t))
}

/// Time-averaged model: the Josephson term is scaled by J0(xi) and the drive
/// is dropped.
pub fn time_averaged_hamiltonian(
    p: &ShuntedParams,
    frame: &ShuntedFrame,
    basis: &BasisSpec,
) -> Result<CMat> {
    let model = shunted_model(p, frame, basis)?;
    let scale = C64::new(j0(frame.xi), 0.0);
    Ok(&model.h_lin + &model.cos_part.mapv(|z| z * scale))
}

/// Lab-frame Hamiltonian of the physical circuit on the oscillator (x)
/// junction-mode basis, with phi = (b + b^dag)/sqrt(2), N = -i (b - b^dag)/sqrt(2).
pub fn build_shunted_lab_hamiltonian(p: &ShuntedParams, basis: &BasisSpec, t: f64) -> Result<CMat> {
    let (dim_a, dim_b) = check_fock_fock(basis)?;
    let a = annihilation(dim_a)?;
    let b = annihilation(dim_b)?;
    let inv_sqrt2 = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let phi_b = (&b + &dagger(&b)).mapv(|z| z * inv_sqrt2);
    let n_b = (&b - &dagger(&b)).mapv(|z| z * C64::new(0.0, -1.0) * inv_sqrt2);
    let (cos_phi_b, _) = matrix_cos_sin(&phi_b)?;

    let n_osc = embed(&number_op(dim_a), 0, basis)?;
    let adag_minus_a = embed(&(dagger(&a) - &a), 0, basis)?;
    let n_full = embed(&n_b, 1, basis)?;
    let phi_full = embed(&phi_b, 1, basis)?;
    let cos_full = embed(&cos_phi_b, 1, basis)?;

    let mut h = n_osc.mapv(|z| z * C64::new(p.omega_a, 0.0));
    h += &n_full.dot(&n_full).mapv(|z| z * C64::new(4.0 * p.e_c, 0.0));
    h += &phi_full.dot(&phi_full).mapv(|z| z * C64::new(0.5 * p.e_l, 0.0));
    h += &cos_full.mapv(|z| z * C64::new(-p.e_j, 0.0));
    h += &n_full.dot(&adag_minus_a).mapv(|z| z * C64::new(0.0, p.g));
    let drive = p.pump_amp * (p.omega_p * t).cos();
    h += &adag_minus_a.mapv(|z| z * C64::new(0.0, drive));
    Ok(h)
}

fn shunted_block(e_c: f64, e_j: f64, e_l: f64, dim: usize) -> Result<CMat> {
    let b = annihilation(dim)?;
    let inv_sqrt2 = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let phi = (&b + &dagger(&b)).mapv(|z| z * inv_sqrt2);
    let n = (&b - &dagger(&b)).mapv(|z| z * C64::new(0.0, -1.0) * inv_sqrt2);
    let (cos_phi, _) = matrix_cos_sin(&phi)?;
    let mut h = n.dot(&n).mapv(|z| z * C64::new(4.0 * e_c, 0.0));
    h += &phi.dot(&phi).mapv(|z| z * C64::new(0.5 * e_l, 0.0));
    h += &cos_phi.mapv(|z| z * C64::new(-e_j, 0.0));
    Ok(h)
}

/// Eigenpairs of 4 E_C N^2 + E_L phi^2/2 - E_J cos(phi) on the junction-mode
/// Fock ladder at a fixed dimension.
pub fn shunted_block_states(
    e_c: f64,
    e_j: f64,
    e_l: f64,
    dim: usize,
) -> Result<(Array1<f64>, CMat)> {
    eigh_sorted(&shunted_block(e_c, e_j, e_l, dim)?)
}

/// Shunted-transmon diagnostic eigenbasis, grown until the lowest levels are
/// stable to 1e-6 relative under a doubling of the Fock ladder.
pub fn shunted_transmon_eigenbasis(
    e_c: f64,
    e_j: f64,
    e_l: f64,
    initial_dim: usize,
) -> Result<DiagnosticBasis> {
    let tracked = 20;
    let mut dim = initial_dim.max(16);
    let (mut vals, _) = shunted_block_states(e_c, e_j, e_l, dim)?;
    for _ in 0..6 {
        let dim_next = dim * 2;
        let (vals2, vecs2) = shunted_block_states(e_c, e_j, e_l, dim_next)?;
        let m = tracked.min(vals.len()).min(vals2.len());
        let scale = vals2
            .iter()
            .take(m)
            .map(|v| v.abs())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let drift = (0..m).map(|k| (vals[k] - vals2[k]).abs()).fold(0.0, f64::max) / scale;
        if drift < 1e-6 {
            return Ok(DiagnosticBasis {
                energies: vals2,
                states: vecs2,
                native_dim: dim_next,
                converged: true,
            });
        }
        dim = dim_next;
        vals = vals2;
    }
    Err(Error::Convergence(format!(
        "shunted transmon eigenbasis not converged at dim = {dim}"
    )))
}

/// The full frame unitary U = U_s2 D(t) U_theta U_s1 as a matrix on a
/// (typically padded) fock (x) fock basis. A displaced-frame state rho~
/// maps back to the physical basis as U^dag rho~ U.
#[derive(Debug, Clone)]
pub struct FrameUnitaries {
    pub u_total: CMat,
    pub basis: BasisSpec,
}

fn exp_anti_hermitian(g: &CMat) -> Result<CMat> {
    // exp(G) for anti-Hermitian G, via the Hermitian matrix iG
    let h = g.mapv(|z| z * C64::new(0.0, 1.0));
    expi_hermitian(&h, -1.0)
}

fn squeeze_single(dim: usize, zeta: f64) -> Result<CMat> {
    let b = annihilation(dim)?;
    let bd = dagger(&b);
    let g = (bd.dot(&bd) - b.dot(&b)).mapv(|z| z * C64::new(0.5 * zeta, 0.0));
    exp_anti_hermitian(&g)
}

fn displace_single(dim: usize, alpha: C64) -> Result<CMat> {
    let b = annihilation(dim)?;
    let bd = dagger(&b);
    let g = b.mapv(|z| z * alpha.conj()) - bd.mapv(|z| z * alpha);
    exp_anti_hermitian(&g)
}

pub fn frame_unitaries(frame: &ShuntedFrame, basis: &BasisSpec, t: f64) -> Result<FrameUnitaries> {
    let (dim_a, dim_b) = check_fock_fock(basis)?;

    let u_s1 = kron(&identity(dim_a), &squeeze_single(dim_b, frame.zeta)?);

    let a = embed(&annihilation(dim_a)?, 0, basis)?;
    let b = embed(&annihilation(dim_b)?, 1, basis)?;
    let g_bs = (a.dot(&dagger(&b)) - dagger(&a).dot(&b)).mapv(|z| z * C64::new(frame.theta, 0.0));
    let u_theta = exp_anti_hermitian(&g_bs)?;

    let d = kron(
        &displace_single(dim_a, frame.alpha(t))?,
        &displace_single(dim_b, frame.beta(t))?,
    );

    let u_s2 = kron(
        &squeeze_single(dim_a, frame.zeta_a)?,
        &squeeze_single(dim_b, frame.zeta_b)?,
    );

    let u_total = u_s2.dot(&d).dot(&u_theta).dot(&u_s1);
    Ok(FrameUnitaries { u_total, basis: basis.clone() })
}
