//! Static XY Hamiltonians, disorder terms, and deterministic unitary
//! ensembles U_k = exp(-i H_k dt) with H_k = H_s + zeta_k.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qspace::{
    two_site_coupling, CoreError, EigenPropagator, HilbertSpace, PauliOp, Spin, State,
};
use crate::rng::{substream, tags};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid disorder spec: {0}")]
    InvalidDisorder(String),
    #[error("invalid ensemble parameters: {0}")]
    InvalidEnsemble(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("ensemble cache i/o: {0}")]
    CacheIo(#[from] std::io::Error),
    #[error("ensemble cache malformed: {0}")]
    CacheFormat(String),
}

/// Spin-spin coupling geometry of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingGeometry {
    /// Interactions only between adjacent sites (the large-exponent limit).
    NearestNeighbour,
    /// J_ij = J / |i - j|^alpha over all pairs; alpha = 0 is all-to-all.
    PowerLaw { alpha: f64 },
}

/// XY chain with transverse field:
/// H_s = sum_{i<j} J_ij (s+_i s-_j + s-_i s+_j) + B sum_j s^z_j,
/// open boundary conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XYModelSpec {
    pub n_sites: usize,
    pub coupling_j: f64,
    pub field_b: f64,
    pub geometry: CouplingGeometry,
}

impl XYModelSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        HilbertSpace::new(self.n_sites)?;
        if self.coupling_j == 0.0 {
            return Err(ModelError::InvalidModel("coupling J must be nonzero".into()));
        }
        if let CouplingGeometry::PowerLaw { alpha } = self.geometry {
            if !(alpha >= 0.0) {
                return Err(ModelError::InvalidModel(format!(
                    "power-law exponent must be >= 0, got {alpha}"
                )));
            }
        }
        Ok(())
    }

    pub fn space(&self) -> HilbertSpace {
        HilbertSpace::new(self.n_sites).expect("validated on construction")
    }

    /// Coupled pairs (i < j) with their relative weight J_ij / J.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut edges = Vec::new();
        for i in 0..self.n_sites {
            for j in (i + 1)..self.n_sites {
                match self.geometry {
                    CouplingGeometry::NearestNeighbour => {
                        if j == i + 1 {
                            edges.push((i, j, 1.0));
                        }
                    }
                    CouplingGeometry::PowerLaw { alpha } => {
                        let w = 1.0 / ((j - i) as f64).powf(alpha);
                        edges.push((i, j, w));
                    }
                }
            }
        }
        edges
    }
}

/// Hopping part at unit coupling: sum_{i<j} w_ij (s+_i s-_j + s-_i s+_j).
pub fn hopping_unit(spec: &XYModelSpec) -> Result<Array2<Complex64>, ModelError> {
    let space = spec.space();
    let d = space.dim();
    let mut h = Array2::zeros((d, d));
    for (i, j, w) in spec.edges() {
        // s+_i s-_j sends |..down_i..up_j..> to |..up_i..down_j..>; the
        // conjugate term is its transpose, so fill both triangles at once.
        for col in 0..d {
            if space.spin_at(col, i) == Spin::Down && space.spin_at(col, j) == Spin::Up {
                let flipped = flip_two(space, col, i, j);
                h[[flipped, col]] += Complex64::new(w, 0.0);
                h[[col, flipped]] += Complex64::new(w, 0.0);
            }
        }
    }
    Ok(h)
}

fn flip_two(space: HilbertSpace, index: usize, i: usize, j: usize) -> usize {
    let bi = space.n_sites() - 1 - i;
    let bj = space.n_sites() - 1 - j;
    index ^ (1 << bi) ^ (1 << bj)
}

/// Diagonal of the total magnetization operator sum_j s^z_j.
pub fn field_unit_diag(space: HilbertSpace) -> Array1<f64> {
    Array1::from_shape_fn(space.dim(), |idx| {
        (0..space.n_sites())
            .map(|s| match space.spin_at(idx, s) {
                Spin::Up => 1.0,
                Spin::Down => -1.0,
            })
            .sum()
    })
}

/// Dense static Hamiltonian H_s for the model.
pub fn build_xy(spec: &XYModelSpec) -> Result<Array2<Complex64>, ModelError> {
    spec.validate()?;
    let mut h = hopping_unit(spec)?;
    h.mapv_inplace(|z| z * spec.coupling_j);
    let diag = field_unit_diag(spec.space());
    for (i, &z) in diag.iter().enumerate() {
        h[[i, i]] += Complex64::new(spec.field_b * z, 0.0);
    }
    Ok(h)
}

/// The static model split into the pieces that coherent noise rescales.
#[derive(Debug, Clone)]
pub struct StaticTerms {
    /// Hopping at unit J.
    pub hopping_unit: Array2<Complex64>,
    /// Diagonal of sum_j s^z_j.
    pub field_diag: Array1<f64>,
}

impl StaticTerms {
    pub fn new(spec: &XYModelSpec) -> Result<Self, ModelError> {
        Ok(Self {
            hopping_unit: hopping_unit(spec)?,
            field_diag: field_unit_diag(spec.space()),
        })
    }
}

/// True iff [H, sum_j s^z_j] vanishes to 1e-10. Since the magnetization
/// operator is diagonal, the commutator is entrywise H_ij (z_j - z_i).
pub fn commutes_with_total_sz(h: &Array2<Complex64>) -> bool {
    let d = h.nrows();
    let n_sites = d.trailing_zeros() as usize;
    let space = HilbertSpace::new(n_sites).expect("dimension is a power of two within range");
    let z = field_unit_diag(space);
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            worst = worst.max(h[[i, j]].norm() * (z[j] - z[i]).abs());
        }
    }
    worst < 1e-10
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisorderScope {
    /// One amplitude per ensemble element, multiplying the whole graph sum.
    Global,
    /// Independent amplitude per coupled pair.
    Local,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleDistribution {
    Normal,
    Uniform,
}

impl SampleDistribution {
    /// One zero-mean draw with the given standard deviation.
    pub fn draw<R: Rng + ?Sized>(self, std_dev: f64, rng: &mut R) -> f64 {
        match self {
            SampleDistribution::Normal => {
                Normal::new(0.0, std_dev).expect("positive std dev").sample(rng)
            }
            SampleDistribution::Uniform => {
                // Half-width sqrt(3) sigma gives the requested standard deviation.
                let half = std_dev * 3.0_f64.sqrt();
                Uniform::new_inclusive(-half, half)
                    .expect("valid range")
                    .sample(rng)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisorderAxis {
    X,
    Y,
    Z,
}

impl DisorderAxis {
    fn pauli(self) -> PauliOp {
        match self {
            DisorderAxis::X => PauliOp::X,
            DisorderAxis::Y => PauliOp::Y,
            DisorderAxis::Z => PauliOp::Z,
        }
    }
}

/// Specification of the disorder term zeta_k added to H_s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    pub scope: DisorderScope,
    pub axis: DisorderAxis,
    pub distribution: SampleDistribution,
    pub std_dev: f64,
}

impl DisorderSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.std_dev > 0.0) {
            return Err(ModelError::InvalidDisorder(format!(
                "std_dev must be positive, got {}",
                self.std_dev
            )));
        }
        Ok(())
    }

    /// Number of independent amplitudes for the given model geometry.
    pub fn amplitude_count(&self, model: &XYModelSpec) -> usize {
        match self.scope {
            DisorderScope::Global => 1,
            DisorderScope::Local => model.edges().len(),
        }
    }
}

/// Concrete amplitudes for one ensemble element.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderRealization {
    pub amplitudes: Vec<f64>,
}

/// Draw the amplitudes for one ensemble element.
pub fn sample_realization<R: Rng + ?Sized>(
    spec: &DisorderSpec,
    model: &XYModelSpec,
    rng: &mut R,
) -> DisorderRealization {
    let n = spec.amplitude_count(model);
    let amplitudes = (0..n)
        .map(|_| spec.distribution.draw(spec.std_dev, rng))
        .collect();
    DisorderRealization { amplitudes }
}

/// Materialize zeta_k = sum over the coupling graph of Delta * s^u_i s^u_j.
///
/// The graph is the model's edge set; the power-law weights do not enter the
/// disorder term.
pub fn disorder_matrix(
    spec: &DisorderSpec,
    model: &XYModelSpec,
    realization: &DisorderRealization,
) -> Result<Array2<Complex64>, ModelError> {
    let expected = spec.amplitude_count(model);
    if realization.amplitudes.len() != expected {
        return Err(ModelError::InvalidDisorder(format!(
            "expected {expected} amplitudes, got {}",
            realization.amplitudes.len()
        )));
    }
    let space = model.space();
    let d = space.dim();
    let mut zeta = Array2::zeros((d, d));
    for (edge_idx, (i, j, _)) in model.edges().into_iter().enumerate() {
        let amp = match spec.scope {
            DisorderScope::Global => realization.amplitudes[0],
            DisorderScope::Local => realization.amplitudes[edge_idx],
        };
        if amp == 0.0 {
            continue;
        }
        let term = two_site_coupling(spec.axis.pauli(), i, j, space)?;
        zeta.zip_mut_with(&term, |z, t| *z += t * amp);
    }
    Ok(zeta)
}

/// Sample one disorder term (amplitudes drawn from `rng`).
pub fn sample_disorder<R: Rng + ?Sized>(
    spec: &DisorderSpec,
    model: &XYModelSpec,
    rng: &mut R,
) -> Result<Array2<Complex64>, ModelError> {
    let realization = sample_realization(spec, model, rng);
    disorder_matrix(spec, model, &realization)
}

/// K disordered Hamiltonians with their eigendecompositions, regenerable
/// bit-identically from (model, disorder, count, dt, seed).
#[derive(Debug, Clone)]
pub struct UnitaryEnsemble {
    pub model: XYModelSpec,
    pub disorder: DisorderSpec,
    pub count: usize,
    pub dt: f64,
    pub seed: u64,
    hamiltonians: Vec<Array2<Complex64>>,
    propagators: Vec<EigenPropagator>,
}

impl UnitaryEnsemble {
    /// Build H_k = H_s + zeta_k for k = 0..count and diagonalize each.
    pub fn generate(
        model: XYModelSpec,
        disorder: DisorderSpec,
        count: usize,
        dt: f64,
        seed: u64,
    ) -> Result<Self, ModelError> {
        model.validate()?;
        disorder.validate()?;
        if count == 0 {
            return Err(ModelError::InvalidEnsemble("count must be >= 1".into()));
        }
        if !(dt > 0.0) {
            return Err(ModelError::InvalidEnsemble(format!(
                "dt must be positive, got {dt}"
            )));
        }
        let h_static = build_xy(&model)?;
        let members: Result<Vec<_>, ModelError> = (0..count)
            .into_par_iter()
            .map(|k| {
                let mut rng = substream(seed, &[tags::DISORDER, k as u64]);
                let zeta = sample_disorder(&disorder, &model, &mut rng)?;
                let mut h_k = h_static.clone();
                h_k.zip_mut_with(&zeta, |h, z| *h += z);
                let prop = EigenPropagator::new(&h_k)?;
                Ok((h_k, prop))
            })
            .collect();
        let (hamiltonians, propagators) = members?.into_iter().unzip();
        Ok(Self {
            model,
            disorder,
            count,
            dt,
            seed,
            hamiltonians,
            propagators,
        })
    }

    pub fn space(&self) -> HilbertSpace {
        self.model.space()
    }

    pub fn hamiltonian(&self, k: usize) -> &Array2<Complex64> {
        &self.hamiltonians[k]
    }

    pub fn propagator(&self, k: usize) -> &EigenPropagator {
        &self.propagators[k]
    }

    /// Materialize U_k(dt).
    pub fn unitary(&self, k: usize) -> Array2<Complex64> {
        self.propagators[k].unitary(self.dt)
    }

    /// Apply exp(-i H_k t) to a state (exact, via the stored decomposition).
    pub fn apply(&self, k: usize, t: f64, state: &State) -> State {
        self.propagators[k].apply(t, state)
    }

    /// Write all U_k(dt) to a little-endian binary cache.
    ///
    /// Layout: magic "ARBENS01", then u32 n_sites, u64 count, f64 dt,
    /// u64 seed, then count * dim * dim complex entries as (re, im) f64
    /// pairs, row-major per unitary.
    pub fn write_cache<P: AsRef<Path>>(&self, path: P) -> Result<(), ModelError> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&(self.model.n_sites as u32).to_le_bytes())?;
        w.write_all(&(self.count as u64).to_le_bytes())?;
        w.write_all(&self.dt.to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        for k in 0..self.count {
            let u = self.unitary(k);
            for z in u.iter() {
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

const CACHE_MAGIC: &[u8; 8] = b"ARBENS01";

/// Header and unitaries read back from a cache file.
pub struct CachedEnsemble {
    pub n_sites: usize,
    pub count: usize,
    pub dt: f64,
    pub seed: u64,
    pub unitaries: Vec<Array2<Complex64>>,
}

pub fn read_cache<P: AsRef<Path>>(path: P) -> Result<CachedEnsemble, ModelError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != CACHE_MAGIC {
        return Err(ModelError::CacheFormat("bad magic".into()));
    }
    let mut buf4 = [0u8; 4];
    let mut buf8 = [0u8; 8];
    r.read_exact(&mut buf4)?;
    let n_sites = u32::from_le_bytes(buf4) as usize;
    r.read_exact(&mut buf8)?;
    let count = u64::from_le_bytes(buf8) as usize;
    r.read_exact(&mut buf8)?;
    let dt = f64::from_le_bytes(buf8);
    r.read_exact(&mut buf8)?;
    let seed = u64::from_le_bytes(buf8);
    if n_sites == 0 || n_sites > crate::qspace::MAX_SITES {
        return Err(ModelError::CacheFormat(format!("bad site count {n_sites}")));
    }
    let d = 1usize << n_sites;
    let mut unitaries = Vec::with_capacity(count);
    for _ in 0..count {
        let mut m = Array2::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                r.read_exact(&mut buf8)?;
                let re = f64::from_le_bytes(buf8);
                r.read_exact(&mut buf8)?;
                let im = f64::from_le_bytes(buf8);
                m[[i, j]] = Complex64::new(re, im);
            }
        }
        unitaries.push(m);
    }
    Ok(CachedEnsemble {
        n_sites,
        count,
        dt,
        seed,
        unitaries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qspace::{basis_index, hermiticity_deviation, site_operator, unitarity_deviation};
    use approx::assert_abs_diff_eq;

    fn nn_model(n_sites: usize, coupling_j: f64, field_b: f64) -> XYModelSpec {
        XYModelSpec {
            n_sites,
            coupling_j,
            field_b,
            geometry: CouplingGeometry::NearestNeighbour,
        }
    }

    fn x_disorder(scope: DisorderScope) -> DisorderSpec {
        DisorderSpec {
            scope,
            axis: DisorderAxis::X,
            distribution: SampleDistribution::Normal,
            std_dev: 1.0,
        }
    }

    fn max_abs_diff(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn hopping_swaps_single_excitation() {
        // N=2, J=1, B=0: H |up down> = |down up>
        let h = build_xy(&nn_model(2, 1.0, 0.0)).unwrap();
        let space = HilbertSpace::new(2).unwrap();
        let updown = basis_index(space, &[Spin::Up, Spin::Down]).unwrap();
        let downup = basis_index(space, &[Spin::Down, Spin::Up]).unwrap();
        for row in 0..4 {
            let expected = if row == downup { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(h[[row, updown]].re, expected, epsilon = 1e-15);
            assert_abs_diff_eq!(h[[row, updown]].im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn field_term_on_aligned_state() {
        // N=2, B=10: |up up> is an eigenstate with eigenvalue 20
        let h = build_xy(&nn_model(2, 1.0, 10.0)).unwrap();
        assert_abs_diff_eq!(h[[0, 0]].re, 20.0, epsilon = 1e-12);
        for row in 1..4 {
            assert_abs_diff_eq!(h[[row, 0]].norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn all_to_all_matches_pair_enumeration_oracle() {
        // Independent oracle: sum site-operator products over all pairs.
        let spec = XYModelSpec {
            n_sites: 3,
            coupling_j: 1.0,
            field_b: 0.0,
            geometry: CouplingGeometry::PowerLaw { alpha: 0.0 },
        };
        let space = spec.space();
        let d = space.dim();
        let mut oracle = Array2::<Complex64>::zeros((d, d));
        for i in 0..3 {
            for j in (i + 1)..3 {
                let plus_i = site_operator(PauliOp::Plus, i, space).unwrap();
                let minus_j = site_operator(PauliOp::Minus, j, space).unwrap();
                let minus_i = site_operator(PauliOp::Minus, i, space).unwrap();
                let plus_j = site_operator(PauliOp::Plus, j, space).unwrap();
                oracle = oracle + plus_i.dot(&minus_j) + minus_i.dot(&plus_j);
            }
        }
        let built = build_xy(&spec).unwrap();
        assert!(max_abs_diff(&built, &oracle) < 1e-14);
        // the 0-2 pair must be present with full weight J at alpha = 0
        let e02 = basis_index(space, &[Spin::Down, Spin::Up, Spin::Up]).unwrap();
        let e20 = basis_index(space, &[Spin::Up, Spin::Up, Spin::Down]).unwrap();
        assert_abs_diff_eq!(built[[e02, e20]].re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn nn_agrees_with_large_alpha_power_law() {
        for n in 2..=6 {
            let nn = build_xy(&nn_model(n, 1.0, 10.0)).unwrap();
            let pl = build_xy(&XYModelSpec {
                n_sites: n,
                coupling_j: 1.0,
                field_b: 10.0,
                geometry: CouplingGeometry::PowerLaw { alpha: 30.0 },
            })
            .unwrap();
            assert!(max_abs_diff(&nn, &pl) < 1e-9, "n = {n}");
        }
    }

    #[test]
    fn sz_conservation_checks() {
        let h = build_xy(&nn_model(4, 1.0, 10.0)).unwrap();
        assert!(commutes_with_total_sz(&h));

        let space = HilbertSpace::new(4).unwrap();
        let z_total = Array2::from_diag(&field_unit_diag(space).mapv(|x| Complex64::new(x, 0.0)));
        assert!(commutes_with_total_sz(&z_total));

        let spec = x_disorder(DisorderScope::Global);
        let model = nn_model(4, 1.0, 10.0);
        let zeta = disorder_matrix(
            &spec,
            &model,
            &DisorderRealization { amplitudes: vec![0.8] },
        )
        .unwrap();
        let broken = &h + &zeta;
        assert!(!commutes_with_total_sz(&broken));
    }

    #[test]
    fn disorder_matrix_instances() {
        let model = nn_model(2, 1.0, 0.0);
        let spec = x_disorder(DisorderScope::Global);
        let zero = disorder_matrix(
            &spec,
            &model,
            &DisorderRealization { amplitudes: vec![0.0] },
        )
        .unwrap();
        assert_eq!(zero.iter().map(|z| z.norm()).sum::<f64>(), 0.0);

        let zeta = disorder_matrix(
            &spec,
            &model,
            &DisorderRealization { amplitudes: vec![0.7] },
        )
        .unwrap();
        let space = model.space();
        let xx = two_site_coupling(PauliOp::X, 0, 1, space).unwrap();
        let expected = xx.mapv(|z| z * 0.7);
        assert!(max_abs_diff(&zeta, &expected) < 1e-15);
    }

    #[test]
    fn local_disorder_draw_statistics() {
        // Sample mean over many draws is 0 within 3 sigma / sqrt(n).
        let model = nn_model(3, 1.0, 0.0);
        let spec = x_disorder(DisorderScope::Local);
        let n_draws = 100_000;
        let mut rng = substream(123, &[tags::DISORDER, 0]);
        let mut sum = 0.0;
        let mut count = 0usize;
        for _ in 0..n_draws {
            let r = sample_realization(&spec, &model, &mut rng);
            assert_eq!(r.amplitudes.len(), 2);
            sum += r.amplitudes.iter().sum::<f64>();
            count += r.amplitudes.len();
        }
        let mean = sum / count as f64;
        let bound = 3.0 * spec.std_dev / (count as f64).sqrt();
        assert!(mean.abs() < bound, "mean {mean} exceeds {bound}");
    }

    #[test]
    fn uniform_distribution_std_dev() {
        let mut rng = substream(7, &[1]);
        let n = 200_000;
        let samples: Vec<f64> = (0..n)
            .map(|_| SampleDistribution::Uniform.draw(0.5, &mut rng))
            .collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.01);
        assert_abs_diff_eq!(var.sqrt(), 0.5, epsilon = 0.01);
    }

    #[test]
    fn ensemble_generation_contracts() {
        let model = nn_model(3, 1.0, 10.0);
        let disorder = x_disorder(DisorderScope::Global);
        let ens = UnitaryEnsemble::generate(model, disorder, 8, 0.005, 42).unwrap();
        for k in 0..8 {
            assert!(hermiticity_deviation(ens.hamiltonian(k)) < 1e-12);
            assert!(unitarity_deviation(&ens.unitary(k)) < 1e-10);
            assert!(!commutes_with_total_sz(ens.hamiltonian(k)));
        }
        // regeneration is bit-identical
        let again = UnitaryEnsemble::generate(model, disorder, 8, 0.005, 42).unwrap();
        for k in 0..8 {
            assert_eq!(ens.hamiltonian(k), again.hamiltonian(k));
            assert_eq!(ens.unitary(k), again.unitary(k));
        }
        let other_seed = UnitaryEnsemble::generate(model, disorder, 8, 0.005, 43).unwrap();
        assert_ne!(ens.hamiltonian(0), other_seed.hamiltonian(0));
    }

    #[test]
    fn vanishing_disorder_recovers_static_propagator() {
        let model = nn_model(3, 1.0, 10.0);
        let disorder = DisorderSpec {
            std_dev: 1e-14,
            ..x_disorder(DisorderScope::Local)
        };
        let ens = UnitaryEnsemble::generate(model, disorder, 4, 0.005, 1).unwrap();
        let h_s = build_xy(&model).unwrap();
        let u_s = crate::qspace::expm_hermitian(&h_s, 0.005).unwrap();
        for k in 0..4 {
            assert!(max_abs_diff(&ens.unitary(k), &u_s) < 1e-9);
        }
    }

    #[test]
    fn cache_round_trip() {
        let model = nn_model(2, 1.0, 5.0);
        let disorder = x_disorder(DisorderScope::Global);
        let ens = UnitaryEnsemble::generate(model, disorder, 3, 0.01, 9).unwrap();
        let dir = std::env::temp_dir().join("arb_cache_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("ensemble.bin");
        ens.write_cache(&path).unwrap();
        let cached = read_cache(&path).unwrap();
        assert_eq!(cached.n_sites, 2);
        assert_eq!(cached.count, 3);
        assert_eq!(cached.dt, 0.01);
        assert_eq!(cached.seed, 9);
        for k in 0..3 {
            assert_eq!(cached.unitaries[k], ens.unitary(k));
        }
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn validation_errors() {
        let mut model = nn_model(3, 1.0, 10.0);
        model.coupling_j = 0.0;
        assert!(model.validate().is_err());
        let bad_disorder = DisorderSpec {
            std_dev: 0.0,
            ..x_disorder(DisorderScope::Global)
        };
        assert!(bad_disorder.validate().is_err());
        assert!(UnitaryEnsemble::generate(
            nn_model(2, 1.0, 0.0),
            x_disorder(DisorderScope::Global),
            0,
            0.005,
            1
        )
        .is_err());
    }
}
