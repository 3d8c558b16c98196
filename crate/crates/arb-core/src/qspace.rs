//! Hilbert-space primitives: computational basis bookkeeping, state vectors,
//! Pauli operator embeddings, exact Hermitian propagators and overlaps.
//!
//! Conventions (fixed here, documented once): site 0 maps to the most
//! significant bit of a basis index, spin up encodes as bit 0, and the Pauli
//! matrices are sigma^+ = |up><down|, sigma^- = |down><up|,
//! sigma^z = diag(1, -1).

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64;
use thiserror::Error;

/// Dense representations stay tractable up to this many spins (d = 4096).
pub const MAX_SITES: usize = 12;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("number of sites must be between 1 and {MAX_SITES}, got {0}")]
    InvalidSiteCount(usize),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("site index {site} out of range for {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },
    #[error("two-site coupling requires distinct sites, got {0} twice")]
    InvalidCoupling(usize),
    #[error("operator is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("eigendecomposition failed: {0}")]
    Eigen(String),
    #[error("state vector has zero norm")]
    ZeroNorm,
}

/// A register of spin-1/2 sites with its 2^n dimensional state space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertSpace {
    n_sites: usize,
}

impl HilbertSpace {
    pub fn new(n_sites: usize) -> Result<Self, CoreError> {
        if n_sites == 0 || n_sites > MAX_SITES {
            return Err(CoreError::InvalidSiteCount(n_sites));
        }
        Ok(Self { n_sites })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    /// Bit position of `site` within a basis index (site 0 = MSB).
    fn bit(&self, site: usize) -> usize {
        self.n_sites - 1 - site
    }

    /// Spin at `site` for a given basis index.
    pub fn spin_at(&self, index: usize, site: usize) -> Spin {
        if index >> self.bit(site) & 1 == 0 {
            Spin::Up
        } else {
            Spin::Down
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spin {
    Up,
    Down,
}

/// Computational-basis index of a product configuration.
///
/// Site 0 is the most significant bit; up encodes as 0, down as 1.
pub fn basis_index(space: HilbertSpace, config: &[Spin]) -> Result<usize, CoreError> {
    if config.len() != space.n_sites() {
        return Err(CoreError::DimensionMismatch {
            expected: space.n_sites(),
            actual: config.len(),
        });
    }
    let mut index = 0;
    for &s in config {
        index <<= 1;
        if s == Spin::Down {
            index |= 1;
        }
    }
    Ok(index)
}

/// A pure state of the register; kept normalized by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    amps: Array1<Complex64>,
}

impl State {
    /// Basis state |index>.
    pub fn basis(space: HilbertSpace, index: usize) -> Self {
        let mut amps = Array1::zeros(space.dim());
        amps[index] = Complex64::new(1.0, 0.0);
        Self { amps }
    }

    /// Wrap and normalize an amplitude vector.
    pub fn new_normalized(amps: Array1<Complex64>) -> Result<Self, CoreError> {
        let mut s = Self { amps };
        s.normalize()?;
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &Array1<Complex64> {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut Array1<Complex64> {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) -> Result<(), CoreError> {
        let n = self.norm();
        if n <= f64::EPSILON {
            return Err(CoreError::ZeroNorm);
        }
        let inv = Complex64::new(1.0 / n, 0.0);
        self.amps.mapv_inplace(|a| a * inv);
        Ok(())
    }

    /// Inner product <self|other>.
    pub fn overlap(&self, other: &State) -> Result<Complex64, CoreError> {
        if self.dim() != other.dim() {
            return Err(CoreError::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

/// The alternating charge-density-wave state |up down up down ...>.
pub fn cdw_state(space: HilbertSpace) -> State {
    let config: Vec<Spin> = (0..space.n_sites())
        .map(|s| if s % 2 == 0 { Spin::Up } else { Spin::Down })
        .collect();
    let index = basis_index(space, &config).expect("config length matches by construction");
    State::basis(space, index)
}

/// Probability that `final_state` is found in `reference`: |<ref|final>|^2.
pub fn survival_probability(final_state: &State, reference: &State) -> Result<f64, CoreError> {
    let overlap = reference.overlap(final_state)?;
    Ok(overlap.norm_sqr().min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliOp {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

impl PauliOp {
    /// 2x2 matrix in the (up, down) basis.
    fn matrix(self) -> [[Complex64; 2]; 2] {
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        match self {
            PauliOp::X => [[zero, one], [one, zero]],
            PauliOp::Y => [
                [zero, Complex64::new(0.0, -1.0)],
                [Complex64::new(0.0, 1.0), zero],
            ],
            PauliOp::Z => [[one, zero], [zero, -one]],
            PauliOp::Plus => [[zero, one], [zero, zero]],
            PauliOp::Minus => [[zero, zero], [one, zero]],
        }
    }
}

/// Embed a single-site Pauli operator: I x ... x sigma^u x ... x I.
pub fn site_operator(
    op: PauliOp,
    site: usize,
    space: HilbertSpace,
) -> Result<Array2<Complex64>, CoreError> {
    if site >= space.n_sites() {
        return Err(CoreError::SiteOutOfRange {
            site,
            n_sites: space.n_sites(),
        });
    }
    let d = space.dim();
    let s = op.matrix();
    let bit = space.bit(site);
    let mut m = Array2::zeros((d, d));
    for row in 0..d {
        let r = row >> bit & 1;
        for c in 0..2 {
            let col = (row & !(1 << bit)) | (c << bit);
            let v = s[r][c];
            if v != Complex64::new(0.0, 0.0) {
                m[[row, col]] = v;
            }
        }
    }
    Ok(m)
}

/// Embed the two-site product sigma^u_i sigma^u_j (i != j).
pub fn two_site_coupling(
    op: PauliOp,
    i: usize,
    j: usize,
    space: HilbertSpace,
) -> Result<Array2<Complex64>, CoreError> {
    if i == j {
        return Err(CoreError::InvalidCoupling(i));
    }
    for &site in &[i, j] {
        if site >= space.n_sites() {
            return Err(CoreError::SiteOutOfRange {
                site,
                n_sites: space.n_sites(),
            });
        }
    }
    let d = space.dim();
    let s = op.matrix();
    let (bi, bj) = (space.bit(i), space.bit(j));
    let mut m = Array2::zeros((d, d));
    for row in 0..d {
        let ri = row >> bi & 1;
        let rj = row >> bj & 1;
        for ci in 0..2 {
            for cj in 0..2 {
                let v = s[ri][ci] * s[rj][cj];
                if v != Complex64::new(0.0, 0.0) {
                    let col = (row & !(1 << bi) & !(1 << bj)) | (ci << bi) | (cj << bj);
                    m[[row, col]] = v;
                }
            }
        }
    }
    Ok(m)
}

/// Max absolute deviation from Hermiticity.
pub fn hermiticity_deviation(m: &Array2<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            let dev = (m[[i, j]] - m[[j, i]].conj()).norm();
            worst = worst.max(dev);
        }
    }
    worst
}

/// Max absolute deviation of U from unitarity, max |U^dag U - I|.
pub fn unitarity_deviation(u: &Array2<Complex64>) -> f64 {
    let n = u.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                acc += u[[k, i]].conj() * u[[k, j]];
            }
            if i == j {
                acc -= Complex64::new(1.0, 0.0);
            }
            worst = worst.max(acc.norm());
        }
    }
    worst
}

const HERMITICITY_TOL: f64 = 1e-12;

/// Eigendecomposition of a Hermitian operator, reused to produce the exact
/// propagator U(t) = V exp(-i lambda t) V^dag for arbitrary t.
#[derive(Debug, Clone)]
pub struct EigenPropagator {
    basis: Array2<Complex64>,
    basis_adj: Array2<Complex64>,
    energies: Array1<f64>,
}

impl EigenPropagator {
    pub fn new(h: &Array2<Complex64>) -> Result<Self, CoreError> {
        let dev = hermiticity_deviation(h);
        if dev > HERMITICITY_TOL {
            return Err(CoreError::NotHermitian(dev));
        }
        let (energies, raw) = h
            .eigh(UPLO::Lower)
            .map_err(|e| CoreError::Eigen(e.to_string()))?;
        // eigh on a row-major array hands back eigenvectors of the transpose;
        // conjugating restores H = V diag(lambda) V^dag (checked in tests).
        let basis = raw.mapv(|z| z.conj()).as_standard_layout().to_owned();
        let basis_adj = basis.t().mapv(|z| z.conj()).as_standard_layout().to_owned();
        Ok(Self {
            basis,
            basis_adj,
            energies,
        })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &Array1<f64> {
        &self.energies
    }

    /// Dense U(t) = exp(-i H t).
    pub fn unitary(&self, t: f64) -> Array2<Complex64> {
        let d = self.dim();
        let mut phased = self.basis.clone();
        for (mut col, &e) in phased.columns_mut().into_iter().zip(self.energies.iter()) {
            let phase = Complex64::from_polar(1.0, -e * t);
            col.mapv_inplace(|z| z * phase);
        }
        let mut out = Array2::zeros((d, d));
        matmul_into(&phased, &self.basis_adj, &mut out);
        out
    }

    /// Apply exp(-i H t) to a state without materializing the matrix.
    pub fn apply(&self, t: f64, state: &State) -> State {
        let mut out = state.clone();
        let mut scratch = vec![Complex64::new(0.0, 0.0); state.dim()];
        self.apply_in_place(t, &mut out, &mut scratch);
        out
    }

    /// In-place variant with caller-provided scratch, for hot loops.
    pub fn apply_in_place(&self, t: f64, state: &mut State, scratch: &mut [Complex64]) {
        let amps = state
            .amps
            .as_slice_mut()
            .expect("state amplitudes are contiguous");
        matvec(&self.basis_adj, amps, scratch);
        for (c, &e) in scratch.iter_mut().zip(self.energies.iter()) {
            *c *= Complex64::from_polar(1.0, -e * t);
        }
        matvec(&self.basis, scratch, amps);
    }
}

/// exp(-i H t) for Hermitian H via eigendecomposition.
pub fn expm_hermitian(h: &Array2<Complex64>, t: f64) -> Result<Array2<Complex64>, CoreError> {
    Ok(EigenPropagator::new(h)?.unitary(t))
}

/// y = M x for a row-major square matrix.
pub(crate) fn matvec(m: &Array2<Complex64>, x: &[Complex64], y: &mut [Complex64]) {
    let d = x.len();
    let rows = m.as_slice().expect("matrix is standard layout");
    for (i, yi) in y.iter_mut().enumerate() {
        let row = &rows[i * d..(i + 1) * d];
        let mut acc = Complex64::new(0.0, 0.0);
        for (mij, xj) in row.iter().zip(x.iter()) {
            acc += mij * xj;
        }
        *yi = acc;
    }
}

/// C = A B for row-major square matrices.
pub(crate) fn matmul_into(a: &Array2<Complex64>, b: &Array2<Complex64>, c: &mut Array2<Complex64>) {
    let d = a.nrows();
    let bs = b.as_slice().expect("standard layout");
    let cs = c.as_slice_mut().expect("standard layout");
    cs.fill(Complex64::new(0.0, 0.0));
    for i in 0..d {
        for k in 0..d {
            let aik = a[[i, k]];
            if aik == Complex64::new(0.0, 0.0) {
                continue;
            }
            let brow = &bs[k * d..(k + 1) * d];
            let crow = &mut cs[i * d..(i + 1) * d];
            for (cij, bkj) in crow.iter_mut().zip(brow.iter()) {
                *cij += aik * bkj;
            }
        }
    }
}

/// Scratch buffers for the series propagator.
#[derive(Debug, Clone)]
pub struct ExpmScratch {
    term: Vec<Complex64>,
    next: Vec<Complex64>,
}

impl ExpmScratch {
    pub fn new(dim: usize) -> Self {
        Self {
            term: vec![Complex64::new(0.0, 0.0); dim],
            next: vec![Complex64::new(0.0, 0.0); dim],
        }
    }
}

/// Infinity norm (max absolute row sum), used to pick the series step count.
fn inf_norm(m: &Array2<Complex64>) -> f64 {
    let d = m.nrows();
    let rows = m.as_slice().expect("standard layout");
    (0..d)
        .map(|i| rows[i * d..(i + 1) * d].iter().map(|z| z.norm()).sum())
        .fold(0.0_f64, f64::max)
}

/// Apply exp(-i A t) to `state` by a scaled Taylor series. Works for any
/// generator A (Hermitian or not); used where A changes on every step and a
/// fresh eigendecomposition would dominate the cost.
///
/// Terms are accumulated until they fall below machine precision relative to
/// the running result; the generator is sub-stepped so each partial argument
/// has norm <= 0.5, keeping the series short and well conditioned.
pub fn expm_apply_in_place(
    a: &Array2<Complex64>,
    t: f64,
    state: &mut State,
    scratch: &mut ExpmScratch,
) {
    let theta = inf_norm(a) * t.abs();
    let substeps = (theta / 0.5).ceil().max(1.0) as usize;
    let tau = t / substeps as f64;
    let amps = state
        .amps
        .as_slice_mut()
        .expect("state amplitudes are contiguous");
    for _ in 0..substeps {
        expm_taylor_substep(a, tau, amps, scratch);
    }
}

fn expm_taylor_substep(
    a: &Array2<Complex64>,
    tau: f64,
    amps: &mut [Complex64],
    scratch: &mut ExpmScratch,
) {
    const MAX_TERMS: usize = 64;
    scratch.term.copy_from_slice(amps);
    let mut acc_norm_sq: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
    for k in 1..=MAX_TERMS {
        matvec(a, &scratch.term, &mut scratch.next);
        let coeff = Complex64::new(0.0, -tau / k as f64);
        let mut term_norm_sq = 0.0;
        for (term, next) in scratch.term.iter_mut().zip(scratch.next.iter()) {
            *term = coeff * next;
            term_norm_sq += term.norm_sqr();
        }
        for (amp, term) in amps.iter_mut().zip(scratch.term.iter()) {
            *amp += term;
        }
        acc_norm_sq += term_norm_sq;
        if term_norm_sq <= 1e-32 * acc_norm_sq {
            return;
        }
    }
}

/// Convenience wrapper allocating its own scratch.
pub fn expm_apply(a: &Array2<Complex64>, t: f64, state: &State) -> State {
    let mut out = state.clone();
    let mut scratch = ExpmScratch::new(state.dim());
    expm_apply_in_place(a, t, &mut out, &mut scratch);
    out
}
