//! Interaction models: the ingredients `λ, μ, φ, ψ, W` and the derived `φ̄ = W φ`.

mod audit;
mod builtin;
mod fourier;
mod laws;

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

pub use audit::{
    audit_lipschitz, check_fourier_reconstruction, check_hamiltonian_direction,
    check_kernel_symmetry, hamiltonian_energy, LipschitzAudit,
};
pub use builtin::{kuramoto, kuramoto_with, spatial_kuramoto};
pub use fourier::{FourierAtom, FourierMeasure};
pub use laws::{InitialLaw, Media, MediaLaw};

use crate::{Error, Result};

/// Pairwise interaction `φ(x, y, ω, π)`.
pub type PairFn = Arc<dyn Fn(f64, f64, &[f64], &[f64]) -> f64 + Send + Sync>;
/// Single-particle drift `ψ(x, ω)`, also used for the potential `g`.
pub type SingleFn = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;
/// Edge kernel `W(ω, π)`.
pub type KernelFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
/// Pair potential `f̄(u, ω, π)` of the Hamiltonian form.
pub type PotentialFn = Arc<dyn Fn(f64, &[f64], &[f64]) -> f64 + Send + Sync>;

/// A symmetric, bounded, nonnegative edge kernel.
#[derive(Clone)]
pub struct Kernel {
    id: String,
    sup: f64,
    constant: Option<f64>,
    f: KernelFn,
}

impl Kernel {
    pub fn constant(value: f64) -> Self {
        Self {
            id: alloc::format!("constant({value})"),
            sup: value.abs(),
            constant: Some(value),
            f: Arc::new(move |_, _| value),
        }
    }

    /// A kernel with declared supremum `sup`.
    pub fn new(id: impl Into<String>, sup: f64, f: KernelFn) -> Self {
        Self {
            id: id.into(),
            sup,
            constant: None,
            f,
        }
    }

    #[inline]
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.constant {
            Some(c) => c,
            None => (self.f)(a, b),
        }
    }

    pub fn sup(&self) -> f64 {
        self.sup
    }

    pub fn as_constant(&self) -> Option<f64> {
        self.constant
    }

    pub fn id(&self) -> &str {
        &self.id
    }
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("id", &self.id)
            .field("sup", &self.sup)
            .finish()
    }
}

/// How `φ`, viewed as a function on `ℝ^{2d+2}`, depends on its arguments.
/// Mollification only has to integrate over the directions listed here.
#[derive(Debug, Clone, PartialEq)]
pub enum ArgumentStructure {
    /// Every coordinate may matter.
    Full,
    /// `φ` depends only on these coordinates.
    Coordinates(Vec<usize>),
    /// `φ(v) = h(⟨a, v⟩)` for the given direction `a`.
    Ridge(Vec<f64>),
}

/// Declared regularity constants. Lipschitz constants use the `ℓ∞` metric on
/// the argument tuple; `grad_phi` is the supremum of the Euclidean norm of `∇φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConstants {
    pub lip_phi: f64,
    pub lip_psi: f64,
    pub sup_phi: f64,
    pub sup_psi: f64,
    pub grad_phi: f64,
}

/// The potential pair `(f̄, g)` for which the dense drift is `−∂H̄_n/∂x_i`.
#[derive(Clone)]
pub struct Hamiltonian {
    pub f_bar: PotentialFn,
    pub g: SingleFn,
}

impl fmt::Debug for Hamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Hamiltonian { .. }")
    }
}

/// One family of coupled systems. Immutable once built; cheap to clone.
#[derive(Clone)]
pub struct InteractionModel {
    id: String,
    d: usize,
    initial: InitialLaw,
    media: MediaLaw,
    phi: PairFn,
    psi: SingleFn,
    kernel: Kernel,
    constants: ModelConstants,
    fourier: Option<FourierMeasure>,
    hamiltonian: Option<Hamiltonian>,
    periodic: bool,
    structure: ArgumentStructure,
}

impl fmt::Debug for InteractionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InteractionModel")
            .field("id", &self.id)
            .field("d", &self.d)
            .field("initial", &self.initial)
            .field("media", &self.media)
            .field("kernel", &self.kernel)
            .field("constants", &self.constants)
            .field("fourier", &self.fourier.is_some())
            .field("periodic", &self.periodic)
            .finish()
    }
}

/// Builder for models with user-supplied ingredients.
pub struct ModelBuilder {
    model: InteractionModel,
}

impl ModelBuilder {
    pub fn initial(mut self, law: InitialLaw) -> Self {
        self.model.initial = law;
        self
    }

    pub fn fourier(mut self, measure: FourierMeasure) -> Self {
        self.model.fourier = Some(measure);
        self
    }

    pub fn hamiltonian(mut self, h: Hamiltonian) -> Self {
        self.model.hamiltonian = Some(h);
        self
    }

    pub fn periodic(mut self, periodic: bool) -> Self {
        self.model.periodic = periodic;
        self
    }

    pub fn structure(mut self, s: ArgumentStructure) -> Self {
        self.model.structure = s;
        self
    }

    pub fn build(self) -> Result<InteractionModel> {
        let m = self.model;
        m.initial.validate()?;
        m.media.validate()?;
        if m.media.dim() != m.d {
            return Err(Error::ShapeMismatch(alloc::format!(
                "media law has dimension {}, model declares {}",
                m.media.dim(),
                m.d
            )));
        }
        if let Some(f) = &m.fourier {
            if f.media_dim() != m.d {
                return Err(Error::ShapeMismatch("Fourier atoms do not match d".to_string()));
            }
        }
        let c = m.constants;
        if [c.lip_phi, c.lip_psi, c.sup_phi, c.sup_psi, c.grad_phi, m.kernel.sup()]
            .iter()
            .any(|v| !v.is_finite() || *v < 0.0)
        {
            return Err(Error::InvalidArgument(
                "declared constants must be finite and nonnegative".to_string(),
            ));
        }
        Ok(m)
    }
}

impl InteractionModel {
    /// Starts a custom model. `φ` is a black box; attach a [`FourierMeasure`]
    /// to enable the Gronwall bound and factorized mean-field evaluation.
    pub fn builder(
        id: impl Into<String>,
        media: MediaLaw,
        phi: PairFn,
        psi: SingleFn,
        kernel: Kernel,
        constants: ModelConstants,
    ) -> ModelBuilder {
        ModelBuilder {
            model: InteractionModel {
                id: id.into(),
                d: media.dim(),
                initial: InitialLaw::Uniform {
                    lo: -core::f64::consts::PI,
                    hi: core::f64::consts::PI,
                },
                media,
                phi,
                psi,
                kernel,
                constants,
                fourier: None,
                hamiltonian: None,
                periodic: false,
                structure: ArgumentStructure::Full,
            },
        }
    }

    /// A model whose `φ` is the real part of the given Fourier representation.
    pub fn from_fourier(
        id: impl Into<String>,
        media: MediaLaw,
        measure: FourierMeasure,
        psi: SingleFn,
        kernel: Kernel,
        lip_psi: f64,
        sup_psi: f64,
    ) -> ModelBuilder {
        // |∂φ/∂v_j| ≤ Σ_k |w_k| 2π |z_kj|, so Σ_j sup|∂_j φ| bounds the ℓ∞ Lipschitz constant
        let mut lip = 0.0;
        let mut grad_sq = 0.0;
        let dim = 2 * measure.media_dim() + 2;
        for j in 0..dim {
            let s: f64 = measure
                .atoms()
                .iter()
                .map(|a| crate::math::sqrt(a.weight.norm_sqr()) * core::f64::consts::TAU * a.frequency[j].abs())
                .sum();
            lip += s;
            grad_sq += s * s;
        }
        let constants = ModelConstants {
            lip_phi: lip,
            lip_psi,
            sup_phi: measure.tv_norm(),
            sup_psi,
            grad_phi: crate::math::sqrt(grad_sq),
        };
        let m = measure.clone();
        let phi: PairFn = Arc::new(move |x, y, w, p| m.eval(x, y, w, p));
        Self::builder(id, media, phi, psi, kernel, constants).fourier(measure)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn media_dim(&self) -> usize {
        self.d
    }

    pub fn initial_law(&self) -> &InitialLaw {
        &self.initial
    }

    pub fn media_law(&self) -> &MediaLaw {
        &self.media
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn constants(&self) -> &ModelConstants {
        &self.constants
    }

    pub fn fourier(&self) -> Option<&FourierMeasure> {
        self.fourier.as_ref()
    }

    pub fn hamiltonian(&self) -> Option<&Hamiltonian> {
        self.hamiltonian.as_ref()
    }

    /// Whether `φ` and `ψ` are `2π`-periodic in the positions.
    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn structure(&self) -> &ArgumentStructure {
        &self.structure
    }

    pub fn phi_fn(&self) -> &PairFn {
        &self.phi
    }

    #[inline]
    pub fn phi(&self, x: f64, y: f64, omega: &[f64], pi: &[f64]) -> f64 {
        (self.phi)(x, y, omega, pi)
    }

    #[inline]
    pub fn phi_bar(&self, x: f64, y: f64, omega: &[f64], pi: &[f64]) -> f64 {
        self.kernel.eval(omega, pi) * (self.phi)(x, y, omega, pi)
    }

    #[inline]
    pub fn psi(&self, x: f64, omega: &[f64]) -> f64 {
        (self.psi)(x, omega)
    }

    /// Replaces the initial law.
    pub fn with_initial(mut self, law: InitialLaw) -> Result<Self> {
        law.validate()?;
        self.initial = law;
        Ok(self)
    }

    /// `n` i.i.d. media vectors from `μ`.
    pub fn sample_media(&self, n: usize, seed: u64) -> Media {
        let mut rng = crate::rng::stream(seed, crate::rng::tag::MEDIA);
        let mut values = Vec::with_capacity(n * self.d);
        for _ in 0..n {
            self.media.sample_into(&mut rng, &mut values);
        }
        Media::new(self.d, values).expect("media law produces finite rows")
    }

    /// `n` i.i.d. initial positions from `λ`.
    pub fn sample_initial(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = crate::rng::stream(seed, crate::rng::tag::INITIAL);
        (0..n).map(|_| self.initial.sample(&mut rng)).collect()
    }
}
