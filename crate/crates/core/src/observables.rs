//! Steady-state observables: eigenbasis populations, impurity, AC Stark
//! lines, Kerr strengths, time-averaged-model predictions, and the frame
//! back-transformation to the physical basis.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::circuits::{
    frame_unitaries, time_averaged_hamiltonian, ShuntedFrame, ShuntedParams,
};
use crate::dissipator::SteadyState;
use crate::error::{Error, Result};
use crate::floquet::{FloquetBasis, FourierElements};
use crate::hilbert::{annihilation, dagger, eigh_sorted, tensor_pad, BasisSpec, CMat};

pub fn purity(rho: &CMat) -> f64 {
    let rho2 = rho.dot(rho);
    rho2.diag().iter().map(|z| z.re).sum()
}

/// 1 - Tr(rho^2).
pub fn impurity(rho: &CMat) -> f64 {
    1.0 - purity(rho)
}

/// Diagonal populations <v_k| rho |v_k> for state columns in rho's basis.
pub fn populations_in_states(rho: &CMat, states: &CMat) -> Result<Array1<f64>> {
    if states.nrows() != rho.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "states live in dimension {}, rho in {}",
            states.nrows(),
            rho.nrows()
        )));
    }
    let m = dagger(states).dot(&rho.dot(states));
    Ok(Array1::from_iter(m.diag().iter().map(|z| z.re)))
}

/// Partial trace of a two-mode density matrix, keeping the given mode.
pub fn partial_trace(rho: &CMat, basis: &BasisSpec, keep_mode: usize) -> Result<CMat> {
    if basis.num_modes() != 2 {
        return Err(Error::ShapeMismatch("partial_trace expects a two-mode basis".into()));
    }
    let (d0, d1) = (basis.mode(0).dim, basis.mode(1).dim);
    if rho.nrows() != d0 * d1 {
        return Err(Error::ShapeMismatch(format!(
            "rho dimension {} does not match basis {}",
            rho.nrows(),
            d0 * d1
        )));
    }
    match keep_mode {
        0 => {
            let mut out = Array2::zeros((d0, d0));
            for i in 0..d0 {
                for j in 0..d0 {
                    let mut acc = C64::new(0.0, 0.0);
                    for k in 0..d1 {
                        acc += rho[(i * d1 + k, j * d1 + k)];
                    }
                    out[(i, j)] = acc;
                }
            }
            Ok(out)
        }
        1 => {
            let mut out = Array2::zeros((d1, d1));
            for i in 0..d1 {
                for j in 0..d1 {
                    let mut acc = C64::new(0.0, 0.0);
                    for k in 0..d0 {
                        acc += rho[(k * d1 + i, k * d1 + j)];
                    }
                    out[(i, j)] = acc;
                }
            }
            Ok(out)
        }
        _ => Err(Error::ShapeMismatch("keep_mode must be 0 or 1".into())),
    }
}

/// Populations of single-mode states on one tensor factor, tracing out the
/// other mode. States are columns in the factor's own basis.
pub fn mode_populations(
    rho: &CMat,
    basis: &BasisSpec,
    mode: usize,
    states: &CMat,
) -> Result<Array1<f64>> {
    let reduced = partial_trace(rho, basis, mode)?;
    populations_in_states(&reduced, states)
}

/// Excitation-index expectation over a population vector.
pub fn mean_excitation(populations: &Array1<f64>) -> f64 {
    populations.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
}

/// One probe resonance: a transition between Floquet modes at frequency
/// Delta_{alpha beta k}, weighted by the initial population and the coupling
/// matrix element.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StarkLine {
    pub freq_hz: f64,
    pub weight: f64,
    pub source: usize,
    pub target: usize,
    pub sideband: i32,
}

#[derive(Debug, Clone, Copy)]
pub struct LineWindow {
    /// Window center, rad/s.
    pub center: f64,
    /// Half-width, rad/s.
    pub halfwidth: f64,
    /// Keep lines with weight >= floor_rel * max weight in the window.
    pub floor_rel: f64,
}

impl LineWindow {
    pub fn around(center: f64, halfwidth: f64) -> Self {
        Self { center, halfwidth, floor_rel: 1e-4 }
    }
}

/// All probe-visible transitions out of the populated steady-state modes
/// inside the window, sorted by decreasing weight.
pub fn stark_lines(
    f: &FourierElements,
    basis: &FloquetBasis,
    ss: &SteadyState,
    window: &LineWindow,
) -> Result<Vec<StarkLine>> {
    let n = basis.len();
    if ss.populations.len() != n {
        return Err(Error::ShapeMismatch("steady state and basis sizes differ".into()));
    }
    if ss.populations.sum() <= 0.0 {
        return Err(Error::Extraction("steady state carries no population".into()));
    }
    let eps = &basis.quasi_energies;
    let kk = f.k_max as i32;
    let mut lines = Vec::new();
    for alpha in 0..n {
        let p_alpha = ss.populations[alpha];
        if p_alpha < 1e-12 {
            continue;
        }
        for beta in 0..n {
            for k in -kk..=kk {
                let delta = eps[beta] - eps[alpha] + k as f64 * basis.omega_p;
                if (delta - window.center).abs() > window.halfwidth {
                    continue;
                }
                let weight = p_alpha * f.at(beta, alpha, k).norm_sqr();
                if weight > 0.0 {
                    lines.push(StarkLine {
                        freq_hz: delta / std::f64::consts::TAU,
                        weight,
                        source: alpha,
                        target: beta,
                        sideband: k,
                    });
                }
            }
        }
    }
    lines.sort_by(|a, b| b.weight.total_cmp(&a.weight));
    if let Some(max_w) = lines.first().map(|l| l.weight) {
        let floor = window.floor_rel * max_w;
        lines.retain(|l| l.weight >= floor);
    }
    Ok(lines)
}

/// Kerr strength from the Floquet spectrum: the difference between the
/// second- and first-excitation frequencies of the oscillator-like ladder.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KerrEstimate {
    pub f01_hz: f64,
    pub f12_hz: f64,
    pub kerr_hz: f64,
}

pub fn kerr_strength(
    f: &FourierElements,
    basis: &FloquetBasis,
    ss: &SteadyState,
    window: &LineWindow,
) -> Result<KerrEstimate> {
    let lines = stark_lines(f, basis, ss, window)?;
    let line01 = lines.first().copied().ok_or_else(|| {
        Error::Extraction("no 0->1 line found in the window; widen it or raise the pump".into())
    })?;
    // second excitation: strongest line departing from the 0->1 target mode,
    // not returning to the source
    let source1 = line01.target;
    let eps = &basis.quasi_energies;
    let kk = f.k_max as i32;
    let mut best: Option<StarkLine> = None;
    for beta in 0..basis.len() {
        if beta == line01.source {
            continue;
        }
        for k in -kk..=kk {
            let delta = eps[beta] - eps[source1] + k as f64 * basis.omega_p;
            if (delta - window.center).abs() > window.halfwidth {
                continue;
            }
            let weight = f.at(beta, source1, k).norm_sqr();
            if weight > best.map(|l| l.weight).unwrap_or(0.0) {
                best = Some(StarkLine {
                    freq_hz: delta / std::f64::consts::TAU,
                    weight,
                    source: source1,
                    target: beta,
                    sideband: k,
                });
            }
        }
    }
    let line12 = best.ok_or_else(|| {
        Error::Extraction(format!(
            "no 1->2 line from mode {source1} in the window; candidates exhausted"
        ))
    })?;
    Ok(KerrEstimate {
        f01_hz: line01.freq_hz,
        f12_hz: line12.freq_hz,
        kerr_hz: line12.freq_hz - line01.freq_hz,
    })
}

/// Ladder frequencies of the time-averaged model: dressed a~ frequency and
/// Kerr from the three lowest a~-ladder eigenstates.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AveragedPredictions {
    pub f01_hz: f64,
    pub kerr_hz: f64,
}

pub fn averaged_model_predictions(
    p: &ShuntedParams,
    frame: &ShuntedFrame,
    basis: &BasisSpec,
) -> Result<AveragedPredictions> {
    let h_av = time_averaged_hamiltonian(p, frame, basis)?;
    let (vals, vecs) = eigh_sorted(&h_av)?;
    let a_dag = dagger(&crate::hilbert::embed(&annihilation(basis.mode(0).dim)?, 0, basis)?);

    let ladder_next = |state: usize| -> Result<usize> {
        let target = a_dag.dot(&vecs.column(state).to_owned());
        let overlaps = dagger(&vecs).dot(&target);
        overlaps
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != state)
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .map(|(i, _)| i)
            .ok_or_else(|| Error::Extraction("averaged-model ladder identification failed".into()))
    };

    let s1 = ladder_next(0)?;
    let s2 = ladder_next(s1)?;
    let f01 = (vals[s1] - vals[0]) / std::f64::consts::TAU;
    let f12 = (vals[s2] - vals[s1]) / std::f64::consts::TAU;
    Ok(AveragedPredictions { f01_hz: f01, kerr_hz: f12 - f01 })
}

/// A displaced-frame state mapped back to the physical oscillator (x)
/// junction-mode basis.
#[derive(Debug, Clone)]
pub struct PhysicalState {
    pub rho: CMat,
    pub basis: BasisSpec,
    /// Population kept away from the truncation boundary (top two levels of
    /// each mode); low retention means the padded dimensions are too small.
    pub norm_retention: f64,
}

/// Inverse of the frame chain applied to a displaced-frame density matrix,
/// zero-padded into larger mode dimensions first so the squeezed/displaced
/// image fits.
pub fn to_physical_basis(
    rho_tilde: &CMat,
    frame: &ShuntedFrame,
    run_basis: &BasisSpec,
    padded_basis: &BasisSpec,
    t: f64,
) -> Result<PhysicalState> {
    let old_dims: Vec<usize> = run_basis.modes().iter().map(|m| m.dim).collect();
    let new_dims: Vec<usize> = padded_basis.modes().iter().map(|m| m.dim).collect();
    let rho_pad = tensor_pad(rho_tilde, &old_dims, &new_dims)?;
    let u = frame_unitaries(frame, padded_basis, t)?;
    let rho_phys = dagger(&u.u_total).dot(&rho_pad).dot(&u.u_total);

    // boundary occupation as the truncation-leak proxy
    let (d0, d1) = (new_dims[0], new_dims[1]);
    let occ0 = partial_trace(&rho_phys, padded_basis, 0)?;
    let occ1 = partial_trace(&rho_phys, padded_basis, 1)?;
    let boundary: f64 = occ0.diag().iter().rev().take(2).map(|z| z.re).sum::<f64>()
        + occ1.diag().iter().rev().take(2).map(|z| z.re).sum::<f64>();
    let norm_retention = 1.0 - boundary.max(0.0);
    if norm_retention < 1.0 - 1e-2 {
        return Err(Error::Extraction(format!(
            "frame back-transform leaks {boundary:.3e} onto the truncation edge; \
             enlarge the padded dimensions beyond ({d0}, {d1})"
        )));
    }
    Ok(PhysicalState { rho: rho_phys, basis: padded_basis.clone(), norm_retention })
}
