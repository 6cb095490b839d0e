//! Operators on truncated single-mode and tensor-product Hilbert spaces.
//!
//! All operators are dense complex matrices. Energies are angular frequencies
//! (rad/s) with hbar = 1 throughout the crate.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMat = Array2<C64>;
pub type CVec = Array1<C64>;

/// Kind of a single mode in a tensor-product basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    /// Harmonic oscillator Fock states |0..dim-1>.
    Fock,
    /// Charge states |N> for N in [-n_max, n_max]; dimension 2*n_max+1.
    Charge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mode {
    pub kind: ModeKind,
    pub dim: usize,
}

/// Ordered list of modes defining a tensor-product basis. Index convention:
/// the first mode varies slowest, i.e. |i0, i1> maps to row i0*dim1 + i1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisSpec {
    modes: Vec<Mode>,
}

impl BasisSpec {
    pub fn new(modes: Vec<Mode>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidDimension("basis needs at least one mode".into()));
        }
        for (i, m) in modes.iter().enumerate() {
            if m.dim < 2 {
                return Err(Error::InvalidDimension(format!(
                    "mode {i} has dimension {} < 2",
                    m.dim
                )));
            }
            if m.kind == ModeKind::Charge && m.dim % 2 == 0 {
                return Err(Error::InvalidDimension(format!(
                    "charge mode {i} must have odd dimension, got {}",
                    m.dim
                )));
            }
        }
        Ok(Self { modes })
    }

    pub fn fock(dim: usize) -> Result<Self> {
        Self::new(vec![Mode { kind: ModeKind::Fock, dim }])
    }

    /// Charge mode covering N in [-n_max, n_max] tensored with a Fock mode.
    pub fn charge_fock(n_max: usize, fock_dim: usize) -> Result<Self> {
        Self::new(vec![
            Mode { kind: ModeKind::Charge, dim: 2 * n_max + 1 },
            Mode { kind: ModeKind::Fock, dim: fock_dim },
        ])
    }

    pub fn fock_fock(dim_a: usize, dim_b: usize) -> Result<Self> {
        Self::new(vec![
            Mode { kind: ModeKind::Fock, dim: dim_a },
            Mode { kind: ModeKind::Fock, dim: dim_b },
        ])
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn mode(&self, index: usize) -> Mode {
        self.modes[index]
    }

    pub fn num_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn total_dim(&self) -> usize {
        self.modes.iter().map(|m| m.dim).product()
    }
}

pub fn identity(dim: usize) -> CMat {
    Array2::eye(dim)
}

/// Annihilation operator on a Fock mode: entries sqrt(n) at (n-1, n).
pub fn annihilation(dim: usize) -> Result<CMat> {
    if dim < 2 {
        return Err(Error::InvalidDimension(format!("annihilation needs dim >= 2, got {dim}")));
    }
    let mut a = Array2::zeros((dim, dim));
    for n in 1..dim {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Ok(a)
}

/// Number operator a^dag a.
pub fn number_op(dim: usize) -> CMat {
    Array2::from_diag(&Array1::from_iter((0..dim).map(|n| C64::new(n as f64, 0.0))))
}

/// Charge operator diag(-n_max, ..., n_max) on a symmetric charge window.
pub fn charge_number(n_max: usize) -> Result<CMat> {
    if n_max < 1 {
        return Err(Error::InvalidDimension(format!("charge_number needs n_max >= 1, got {n_max}")));
    }
    let dim = 2 * n_max + 1;
    Ok(Array2::from_diag(&Array1::from_iter(
        (0..dim).map(|i| C64::new(i as f64 - n_max as f64, 0.0)),
    )))
}

/// cos(theta) = (sum_N |N><N+1| + h.c.)/2 on the charge window.
pub fn cos_theta(n_max: usize) -> Result<CMat> {
    if n_max < 1 {
        return Err(Error::InvalidDimension(format!("cos_theta needs n_max >= 1, got {n_max}")));
    }
    let dim = 2 * n_max + 1;
    let mut m = Array2::zeros((dim, dim));
    for n in 0..dim - 1 {
        m[(n, n + 1)] = C64::new(0.5, 0.0);
        m[(n + 1, n)] = C64::new(0.5, 0.0);
    }
    Ok(m)
}

/// sin(theta) = (sum_N |N><N+1| - h.c.)/(2i) on the charge window.
pub fn sin_theta(n_max: usize) -> Result<CMat> {
    if n_max < 1 {
        return Err(Error::InvalidDimension(format!("sin_theta needs n_max >= 1, got {n_max}")));
    }
    let dim = 2 * n_max + 1;
    let mut m = Array2::zeros((dim, dim));
    for n in 0..dim - 1 {
        // |N><N+1|/(2i) = -i/2 |N><N+1|
        m[(n, n + 1)] = C64::new(0.0, -0.5);
        m[(n + 1, n)] = C64::new(0.0, 0.5);
    }
    Ok(m)
}

/// Kronecker product a (x) b.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ma, na) = a.dim();
    let (mb, nb) = b.dim();
    let mut out = Array2::zeros((ma * mb, na * nb));
    for ia in 0..ma {
        for ja in 0..na {
            let f = a[(ia, ja)];
            if f != C64::new(0.0, 0.0) {
                for ib in 0..mb {
                    for jb in 0..nb {
                        out[(ia * mb + ib, ja * nb + jb)] = f * b[(ib, jb)];
                    }
                }
            }
        }
    }
    out
}

/// Embed a single-mode operator into the composite space, acting as identity
/// on all other modes.
pub fn embed(op: &CMat, mode_index: usize, basis: &BasisSpec) -> Result<CMat> {
    if mode_index >= basis.num_modes() {
        return Err(Error::ShapeMismatch(format!(
            "mode index {mode_index} out of range ({} modes)",
            basis.num_modes()
        )));
    }
    let target = basis.mode(mode_index).dim;
    if op.dim() != (target, target) {
        return Err(Error::ShapeMismatch(format!(
            "operator is {:?} but mode {mode_index} has dimension {target}",
            op.dim()
        )));
    }
    let mut out = op.clone();
    // Fold identities in from the left and right of the target mode.
    for (i, m) in basis.modes().iter().enumerate() {
        if i < mode_index {
            out = kron(&identity(m.dim), &out);
        }
    }
    let mut full = out;
    for (i, m) in basis.modes().iter().enumerate() {
        if i > mode_index {
            full = kron(&full, &identity(m.dim));
        }
    }
    Ok(full)
}

// Built explicitly so the result is standard layout; mapping a transposed
// view keeps Fortran order, which the eigh workaround below must not see.
pub fn dagger(m: &CMat) -> CMat {
    Array2::from_shape_fn((m.ncols(), m.nrows()), |(i, j)| m[(j, i)].conj())
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a.dot(b) - b.dot(a)
}

/// max |M - M^dag| over entries, normalized by the largest entry magnitude.
pub fn hermiticity_error(m: &CMat) -> f64 {
    let mut max_dev: f64 = 0.0;
    let mut max_entry: f64 = 0.0;
    let n = m.nrows();
    for i in 0..n {
        for j in i..n {
            let dev = (m[(i, j)] - m[(j, i)].conj()).norm();
            max_dev = max_dev.max(dev);
            max_entry = max_entry.max(m[(i, j)].norm()).max(m[(j, i)].norm());
        }
    }
    if max_entry > 0.0 {
        max_dev / max_entry
    } else {
        0.0
    }
}

/// max |U^dag U - I| over entries.
pub fn unitarity_error(u: &CMat) -> f64 {
    let p = dagger(u).dot(u);
    let n = p.nrows();
    let mut max_dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            max_dev = max_dev.max((p[(i, j)] - target).norm());
        }
    }
    max_dev
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending,
/// eigenvectors as columns.
///
/// ndarray-linalg 0.16 hands the row-major buffer straight to the
/// column-major LAPACK routine, so the eigenvectors come back belonging to
/// conj(H); the eigenvalues are unaffected. Conjugating the output restores
/// the eigenvectors of H.
pub fn eigh_sorted(h: &CMat) -> Result<(Array1<f64>, CMat)> {
    let (vals, vecs) = if h.is_standard_layout() {
        h.eigh(UPLO::Lower)?
    } else {
        h.as_standard_layout().to_owned().eigh(UPLO::Lower)?
    };
    Ok((vals, vecs.mapv(|z| z.conj())))
}

/// exp(i * scale * H) for Hermitian H, via spectral decomposition.
pub fn expi_hermitian(h: &CMat, scale: f64) -> Result<CMat> {
    let (vals, vecs) = eigh_sorted(h)?;
    Ok(expi_from_eigh(&vals, &vecs, scale))
}

/// exp(i * scale * H) given a precomputed eigendecomposition of H.
pub fn expi_from_eigh(vals: &Array1<f64>, vecs: &CMat, scale: f64) -> CMat {
    let phases = vals.mapv(|v| C64::from_polar(1.0, scale * v));
    // vecs * diag(phases) * vecs^dag
    let mut scaled = vecs.clone();
    for (mut col, ph) in scaled.columns_mut().into_iter().zip(phases.iter()) {
        col.mapv_inplace(|z| z * ph);
    }
    scaled.dot(&dagger(vecs))
}

/// cos(Phi) and sin(Phi) of a Hermitian operator via exp(i Phi).
///
/// Both outputs are Hermitian and commute with Phi.
pub fn matrix_cos_sin(phi: &CMat) -> Result<(CMat, CMat)> {
    let herm = hermiticity_error(phi);
    if herm > 1e-12 && phi.iter().any(|z| z.norm() > 0.0) {
        return Err(Error::Contract(format!(
            "matrix_cos_sin needs a Hermitian input (relative deviation {herm:.3e})"
        )));
    }
    let (vals, vecs) = eigh_sorted(phi)?;
    let build = |f: fn(f64) -> f64| -> CMat {
        let mut scaled = vecs.clone();
        for (mut col, v) in scaled.columns_mut().into_iter().zip(vals.iter()) {
            let fv = C64::new(f(*v), 0.0);
            col.mapv_inplace(|z| z * fv);
        }
        scaled.dot(&dagger(&vecs))
    };
    Ok((build(f64::cos), build(f64::sin)))
}

/// Pad a tensor-product density matrix or operator to larger per-mode
/// dimensions, preserving tensor indexing. Supports one- and two-mode bases.
pub fn tensor_pad(m: &CMat, old_dims: &[usize], new_dims: &[usize]) -> Result<CMat> {
    if old_dims.len() != new_dims.len() {
        return Err(Error::ShapeMismatch("tensor_pad mode count mismatch".into()));
    }
    let old_total: usize = old_dims.iter().product();
    if m.dim() != (old_total, old_total) {
        return Err(Error::ShapeMismatch(format!(
            "matrix is {:?}, expected {old_total}x{old_total}",
            m.dim()
        )));
    }
    for (o, n) in old_dims.iter().zip(new_dims.iter()) {
        if n < o {
            return Err(Error::ShapeMismatch("tensor_pad cannot shrink a mode".into()));
        }
    }
    let new_total: usize = new_dims.iter().product();
    let mut out = Array2::zeros((new_total, new_total));
    let index_map = |flat: usize| -> usize {
        match old_dims.len() {
            1 => flat,
            2 => {
                let i0 = flat / old_dims[1];
                let i1 = flat % old_dims[1];
                i0 * new_dims[1] + i1
            }
            _ => unreachable!("tensor_pad supports at most two modes"),
        }
    };
    if old_dims.len() > 2 {
        return Err(Error::ShapeMismatch("tensor_pad supports at most two modes".into()));
    }
    for r in 0..old_total {
        for c in 0..old_total {
            out[(index_map(r), index_map(c))] = m[(r, c)];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn annihilation_small_dims() {
        let a = annihilation(2).unwrap();
        assert_eq!(a[(0, 1)], C64::new(1.0, 0.0));
        assert_eq!(a[(0, 0)], C64::new(0.0, 0.0));
        assert_eq!(a[(1, 0)], C64::new(0.0, 0.0));

        let a3 = annihilation(3).unwrap();
        assert_relative_eq!(a3[(0, 1)].re, 1.0);
        assert_relative_eq!(a3[(1, 2)].re, 2.0_f64.sqrt());
        assert!(annihilation(1).is_err());
    }

    #[test]
    fn number_operator_spectrum() {
        let a = annihilation(5).unwrap();
        let n = dagger(&a).dot(&a);
        let (vals, _) = eigh_sorted(&n).unwrap();
        for (k, v) in vals.iter().enumerate() {
            assert_relative_eq!(*v, k as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn charge_number_window() {
        let n = charge_number(1).unwrap();
        assert_eq!(n[(0, 0)], C64::new(-1.0, 0.0));
        assert_eq!(n[(1, 1)], C64::new(0.0, 0.0));
        assert_eq!(n[(2, 2)], C64::new(1.0, 0.0));
        let n2 = charge_number(2).unwrap();
        let tr: C64 = n2.diag().iter().sum();
        assert_relative_eq!(tr.norm(), 0.0, epsilon = 1e-14);
        assert!(charge_number(0).is_err());
    }

    #[test]
    fn cos_theta_spectrum_bounded() {
        let c = cos_theta(20).unwrap();
        let (vals, _) = eigh_sorted(&c).unwrap();
        for v in vals.iter() {
            assert!(*v >= -1.0 - 1e-12 && *v <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn cos_theta_explicit_nmax1() {
        let c = cos_theta(1).unwrap();
        for (i, j, want) in [(0, 1, 0.5), (1, 0, 0.5), (1, 2, 0.5), (2, 1, 0.5)] {
            assert_relative_eq!(c[(i, j)].re, want, epsilon = 1e-15);
        }
        assert_eq!(c[(0, 2)], C64::new(0.0, 0.0));
        assert_eq!(c[(0, 0)], C64::new(0.0, 0.0));
    }

    #[test]
    fn trig_identity_in_interior() {
        // cos^2 + sin^2 = I except on the two boundary charge states.
        let n_max = 6;
        let c = cos_theta(n_max).unwrap();
        let s = sin_theta(n_max).unwrap();
        let sum = c.dot(&c) + s.dot(&s);
        let dim = 2 * n_max + 1;
        for i in 1..dim - 1 {
            for j in 1..dim - 1 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(sum[(i, j)].re, want, epsilon = 1e-12);
                assert_relative_eq!(sum[(i, j)].im, 0.0, epsilon = 1e-12);
            }
        }
        // Boundary defect is exactly 1/2 on the edge states.
        assert_relative_eq!(sum[(0, 0)].re, 0.5, epsilon = 1e-12);
        assert_relative_eq!(sum[(dim - 1, dim - 1)].re, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn embed_acts_on_single_mode() {
        let basis = BasisSpec::fock_fock(2, 2).unwrap();
        let a = annihilation(2).unwrap();
        let a0 = embed(&a, 0, &basis).unwrap();
        // |1,0> is index 2; a on mode 0 maps it to |0,0> (index 0).
        let mut v = CVec::zeros(4);
        v[2] = C64::new(1.0, 0.0);
        let w = a0.dot(&v);
        assert_relative_eq!(w[0].re, 1.0, epsilon = 1e-14);
        assert_relative_eq!(w.iter().map(|z| z.norm_sqr()).sum::<f64>(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn embeds_of_distinct_modes_commute() {
        let basis = BasisSpec::fock_fock(3, 4).unwrap();
        let x = annihilation(3).unwrap() + dagger(&annihilation(3).unwrap());
        let y = number_op(4);
        let x0 = embed(&x, 0, &basis).unwrap();
        let y1 = embed(&y, 1, &basis).unwrap();
        let c = commutator(&x0, &y1);
        assert!(c.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-14);
        assert_eq!(x0.nrows(), basis.total_dim());
    }

    #[test]
    fn embed_rejects_wrong_dim() {
        let basis = BasisSpec::fock_fock(3, 4).unwrap();
        let a = annihilation(2).unwrap();
        assert!(embed(&a, 0, &basis).is_err());
    }

    #[test]
    fn embed_preserves_spectrum_with_multiplicity() {
        let basis = BasisSpec::fock_fock(3, 2).unwrap();
        let h = number_op(3);
        let h0 = embed(&h, 0, &basis).unwrap();
        let (vals, _) = eigh_sorted(&h0).unwrap();
        let mut sorted: Vec<f64> = vals.to_vec();
        sorted.sort_by(f64::total_cmp);
        // each eigenvalue of n (0,1,2) appears dim(mode 1) = 2 times
        assert_eq!(sorted.len(), 6);
        for (k, want) in [0.0, 0.0, 1.0, 1.0, 2.0, 2.0].iter().enumerate() {
            assert_relative_eq!(sorted[k], want, epsilon = 1e-12);
        }
    }

    #[test]
    fn matrix_cos_sin_scalar_cases() {
        let zero = CMat::zeros((3, 3));
        let (c, s) = matrix_cos_sin(&zero).unwrap();
        assert!(max_abs_diff(&c, &identity(3)) < 1e-14);
        assert!(s.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-14);

        let phi = Array2::from_diag(&ndarray::arr1(&[
            C64::new(std::f64::consts::FRAC_PI_2, 0.0),
            C64::new(0.0, 0.0),
        ]));
        let (c, s) = matrix_cos_sin(&phi).unwrap();
        assert_relative_eq!(c[(0, 0)].re, 0.0, epsilon = 1e-14);
        assert_relative_eq!(c[(1, 1)].re, 1.0, epsilon = 1e-14);
        assert_relative_eq!(s[(0, 0)].re, 1.0, epsilon = 1e-14);
        assert_relative_eq!(s[(1, 1)].re, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn matrix_cos_sin_unitarity_and_commutation() {
        // Hermitian phi with off-diagonal structure
        let n_max = 4;
        let phi_base = cos_theta(n_max).unwrap();
        let phi = phi_base.mapv(|z| z * C64::new(1.7, 0.0));
        let (c, s) = matrix_cos_sin(&phi).unwrap();
        let sum = c.dot(&c) + s.dot(&s);
        assert!(max_abs_diff(&sum, &identity(2 * n_max + 1)) < 1e-9);
        let comm_c = commutator(&c, &phi);
        let comm_s = commutator(&s, &phi);
        assert!(comm_c.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-9);
        assert!(comm_s.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-9);
        assert!(hermiticity_error(&c) < 1e-12);
        assert!(hermiticity_error(&s) < 1e-12);
    }

    #[test]
    fn matrix_cos_sin_rejects_non_hermitian() {
        let m = annihilation(3).unwrap();
        assert!(matrix_cos_sin(&m).is_err());
    }

    #[test]
    fn eigh_returns_eigenvectors_of_input() {
        // regression check for the LAPACK layout conjugation workaround
        let mut h = cos_theta(3).unwrap();
        let n = charge_number(3).unwrap();
        let s = sin_theta(3).unwrap();
        h.zip_mut_with(&n.dot(&s), |a, b| *a += b);
        h.zip_mut_with(&dagger(&n.dot(&s)), |a, b| *a += b);
        assert!(hermiticity_error(&h) < 1e-14);
        let (vals, vecs) = eigh_sorted(&h).unwrap();
        let hv = h.dot(&vecs);
        let mut worst: f64 = 0.0;
        for k in 0..vals.len() {
            for r in 0..vals.len() {
                worst = worst.max((hv[(r, k)] - vecs[(r, k)] * C64::new(vals[k], 0.0)).norm());
            }
        }
        assert!(worst < 1e-12, "eigenvector residual {worst:.3e}");
    }

    #[test]
    fn constructors_are_deterministic() {
        assert_eq!(annihilation(7).unwrap(), annihilation(7).unwrap());
        assert_eq!(cos_theta(5).unwrap(), cos_theta(5).unwrap());
    }

    #[test]
    fn basis_spec_invariants() {
        assert!(BasisSpec::new(vec![Mode { kind: ModeKind::Fock, dim: 1 }]).is_err());
        assert!(BasisSpec::new(vec![Mode { kind: ModeKind::Charge, dim: 4 }]).is_err());
        let b = BasisSpec::charge_fock(25, 10).unwrap();
        assert_eq!(b.total_dim(), 51 * 10);
    }

    #[test]
    fn tensor_pad_places_blocks() {
        let basis = BasisSpec::fock_fock(2, 2).unwrap();
        let a = embed(&annihilation(2).unwrap(), 1, &basis).unwrap();
        let padded = tensor_pad(&a, &[2, 2], &[3, 3]).unwrap();
        // entry |0,0><0,1| must stay at (row |0,0>, col |0,1>) = (0, 1)
        assert_eq!(padded[(0, 1)], C64::new(1.0, 0.0));
        // entry |1,0><1,1| moves from (2,3) to (3, 4) in the padded space
        assert_eq!(padded[(3, 4)], C64::new(1.0, 0.0));
        assert_eq!(padded.nrows(), 9);
    }
}
