//! Dense pure and mixed states of `k`-partite systems.
//!
//! Coefficients are stored row-major with the last party's index varying
//! fastest. A mixed state on parties with total dimension `D` is a `D × D`
//! matrix stored row-major, row multi-index first.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Party dimensions `n_1, …, n_k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SystemShape {
    dims: Vec<usize>,
}

impl SystemShape {
    /// At least one party; every dimension positive. Pure states further
    /// require two parties.
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidShape("a system needs at least one party".into()));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidShape(format!("zero dimension in {dims:?}")));
        }
        Ok(Self { dims })
    }

    pub fn uniform(k: usize, n: usize) -> Result<Self> {
        Self::new(vec![n; k])
    }

    pub fn k(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Row-major strides, last party fastest.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for j in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * self.dims[j + 1];
        }
        strides
    }

    /// Shape with the last party removed.
    pub fn without_last(&self) -> Result<SystemShape> {
        SystemShape::new(self.dims[..self.dims.len() - 1].to_vec())
    }

    /// Whether every dimension is at least the corresponding one of `other`.
    pub fn contains(&self, other: &SystemShape) -> bool {
        self.k() == other.k() && self.dims.iter().zip(&other.dims).all(|(a, b)| a >= b)
    }
}

/// Standard complex Gaussian: real and imaginary parts i.i.d. `N(0, 1/2)`,
/// so `E|z|² = 1`.
fn complex_gaussians(count: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let normal = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).unwrap();
    (0..count)
        .map(|_| Complex64::new(normal.sample(rng), normal.sample(rng)))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    shape: SystemShape,
    coeffs: Vec<Complex64>,
}

impl PureState {
    pub fn new(shape: SystemShape, coeffs: Vec<Complex64>) -> Result<Self> {
        if shape.k() < 2 {
            return Err(Error::InvalidShape("pure states need at least two parties".into()));
        }
        if coeffs.len() != shape.total_dim() {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficients for shape {:?}",
                coeffs.len(),
                shape.dims()
            )));
        }
        Ok(Self { shape, coeffs })
    }

    /// Seeded i.i.d. standard complex Gaussian coefficients from ChaCha8.
    pub fn random(shape: SystemShape, seed: u64, normalize: bool) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = complex_gaussians(shape.total_dim(), &mut rng);
        let mut psi = Self::new(shape, coeffs)?;
        if normalize {
            psi.normalize();
        }
        Ok(psi)
    }

    /// `e_{i_1} ⊗ ⋯ ⊗ e_{i_k}` with 0-based indices.
    pub fn basis(shape: SystemShape, index: &[usize]) -> Result<Self> {
        if index.len() != shape.k() || index.iter().zip(shape.dims()).any(|(i, n)| i >= n) {
            return Err(Error::ShapeMismatch(format!("index {index:?} for shape {:?}", shape.dims())));
        }
        let offset: usize = index.iter().zip(shape.strides()).map(|(i, s)| i * s).sum();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); shape.total_dim()];
        coeffs[offset] = Complex64::new(1.0, 0.0);
        Self::new(shape, coeffs)
    }

    /// `(1/√n) Σ_{i<n} e_i ⊗ ⋯ ⊗ e_i` on `k` parties of dimension `n`.
    pub fn ghz(k: usize, n: usize) -> Result<Self> {
        let shape = SystemShape::uniform(k, n)?;
        let step: usize = shape.strides().iter().sum();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); shape.total_dim()];
        let amp = 1.0 / (n as f64).sqrt();
        for i in 0..n {
            coeffs[i * step] = Complex64::new(amp, 0.0);
        }
        Self::new(shape, coeffs)
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 {
            for c in &mut self.coeffs {
                *c /= norm;
            }
        }
    }

    /// `(U_1 ⊗ ⋯ ⊗ U_k) ψ`.
    pub fn apply_local_unitary(&self, unitaries: &[DMatrix<Complex64>]) -> Result<PureState> {
        let dims = self.shape.dims();
        if unitaries.len() != dims.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} local operators for {} parties",
                unitaries.len(),
                dims.len()
            )));
        }
        for (j, (u, &n)) in unitaries.iter().zip(dims).enumerate() {
            if u.nrows() != n || u.ncols() != n {
                return Err(Error::ShapeMismatch(format!(
                    "operator {} is {}x{}, party dimension is {n}",
                    j + 1,
                    u.nrows(),
                    u.ncols()
                )));
            }
        }
        let mut data = self.coeffs.clone();
        let strides = self.shape.strides();
        for (j, u) in unitaries.iter().enumerate() {
            let n = dims[j];
            let inner = strides[j];
            let outer = data.len() / (n * inner);
            let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
            for o in 0..outer {
                for a in 0..n {
                    for b in 0..n {
                        let uab = u[(a, b)];
                        let dst = o * n * inner + a * inner;
                        let src = o * n * inner + b * inner;
                        for i in 0..inner {
                            out[dst + i] += uab * data[src + i];
                        }
                    }
                }
            }
            data = out;
        }
        PureState::new(self.shape.clone(), data)
    }

    /// Zero-pads into a larger shape: coefficients keep their multi-indices.
    pub fn embed(&self, target: &SystemShape) -> Result<PureState> {
        if !target.contains(&self.shape) {
            return Err(Error::ShapeMismatch(format!(
                "cannot embed {:?} into {:?}",
                self.shape.dims(),
                target.dims()
            )));
        }
        let src_dims = self.shape.dims();
        let dst_strides = target.strides();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); target.total_dim()];
        let mut index = vec![0usize; src_dims.len()];
        for &c in &self.coeffs {
            let offset: usize = index.iter().zip(&dst_strides).map(|(i, s)| i * s).sum();
            coeffs[offset] = c;
            for j in (0..index.len()).rev() {
                index[j] += 1;
                if index[j] < src_dims[j] {
                    break;
                }
                index[j] = 0;
            }
        }
        PureState::new(target.clone(), coeffs)
    }

    /// Partial trace of `|ψ⟩⟨ψ|` over the last party:
    /// `ρ[I, J] = Σ_c ψ[I, c] conj(ψ[J, c])`.
    pub fn reduce_last(&self) -> Result<MixedState> {
        let reduced = self.shape.without_last()?;
        let d = reduced.total_dim();
        let last = *self.shape.dims().last().unwrap();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            let row = &self.coeffs[i * last..(i + 1) * last];
            for j in i..d {
                let col = &self.coeffs[j * last..(j + 1) * last];
                let v: Complex64 = row.iter().zip(col).map(|(a, b)| a * b.conj()).sum();
                coeffs[i * d + j] = v;
                coeffs[j * d + i] = v.conj();
            }
        }
        MixedState::new(reduced, coeffs)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MixedState {
    shape: SystemShape,
    coeffs: Vec<Complex64>,
}

impl MixedState {
    pub fn new(shape: SystemShape, coeffs: Vec<Complex64>) -> Result<Self> {
        let d = shape.total_dim();
        if coeffs.len() != d * d {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficients for a {d}x{d} density matrix",
                coeffs.len()
            )));
        }
        Ok(Self { shape, coeffs })
    }

    pub fn maximally_mixed(shape: SystemShape) -> Result<Self> {
        let d = shape.total_dim();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            coeffs[i * d + i] = Complex64::new(1.0 / d as f64, 0.0);
        }
        Self::new(shape, coeffs)
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn matrix(&self) -> DMatrix<Complex64> {
        let d = self.shape.total_dim();
        DMatrix::from_row_slice(d, d, &self.coeffs)
    }

    pub fn trace(&self) -> Complex64 {
        let d = self.shape.total_dim();
        (0..d).map(|i| self.coeffs[i * d + i]).sum()
    }

    /// Largest `|ρ[i,j] - conj(ρ[j,i])|`.
    pub fn hermiticity_residual(&self) -> f64 {
        let d = self.shape.total_dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                worst = worst.max((self.coeffs[i * d + j] - self.coeffs[j * d + i].conj()).norm());
            }
        }
        worst
    }
}

/// One Haar-random unitary per party: a seeded complex Gaussian matrix,
/// QR-factorized, with the phases of `R`'s diagonal moved into `Q`.
pub fn random_local_unitary(shape: &SystemShape, seed: u64) -> Vec<DMatrix<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shape
        .dims()
        .iter()
        .map(|&n| {
            let g = DMatrix::from_vec(n, n, complex_gaussians(n * n, &mut rng));
            let qr = g.qr();
            let (mut q, r) = qr.unpack();
            for c in 0..n {
                let d = r[(c, c)];
                let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
                for row in 0..n {
                    q[(row, c)] *= phase;
                }
            }
            q
        })
        .collect()
}

/// `max |(U†U - I)_{ab}|`.
pub fn unitarity_residual(u: &DMatrix<Complex64>) -> f64 {
    let n = u.nrows();
    let prod = u.adjoint() * u;
    let eye = DMatrix::<Complex64>::identity(n, n);
    (prod - eye).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
