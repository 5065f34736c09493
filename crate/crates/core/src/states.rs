//! Test-state generators: vacuum, two-mode squeezed vacuum (TMSV), noisy
//! TMSV, seeded random physical states, and classical mixtures of Gaussian
//! states.

use nalgebra::{Matrix2, Matrix4, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{validate_bona_fide, CovMatrix, LocalSymplectic, StandardForm};
use crate::linalg::{direct_sum, rotation};

/// Largest local squeezing drawn by [`random_cm`].
pub const RANDOM_MAX_SQUEEZE: f64 = 1.5;

/// A Gaussian state: covariance matrix plus first moments (vacuum units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianStateSpec {
    pub cm: CovMatrix,
    #[serde(default)]
    pub mean: [f64; 4],
}

impl GaussianStateSpec {
    pub fn new(cm: CovMatrix) -> Self {
        Self { cm, mean: [0.0; 4] }
    }

    pub fn with_mean(cm: CovMatrix, mean: [f64; 4]) -> Self {
        Self { cm, mean }
    }

    /// Image under a local symplectic: `σ ↦ SσSᵀ`, `d ↦ S d`.
    pub fn transformed(&self, s: &LocalSymplectic) -> Self {
        let d = s.block() * Vector4::from(self.mean);
        Self {
            cm: self.cm.apply_local(s),
            mean: d.into(),
        }
    }

    /// Relabels Alice as Bob and vice versa.
    pub fn swap_parties(&self) -> Self {
        let [xa, pa, xb, pb] = self.mean;
        Self {
            cm: self.cm.swap_parties(),
            mean: [xb, pb, xa, pa],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub state: GaussianStateSpec,
}

/// A finite classical mixture of Gaussian states. Non-Gaussian whenever the
/// component means differ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixtureSpec {
    components: Vec<MixtureComponent>,
}

impl GaussianMixtureSpec {
    pub const WEIGHT_SUM_TOL: f64 = 1e-12;

    pub fn new(components: Vec<MixtureComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidMixture("no components".into()));
        }
        if let Some(c) = components
            .iter()
            .find(|c| !(c.weight > 0.0) || !c.weight.is_finite())
        {
            return Err(Error::InvalidMixture(format!(
                "weight {} is not positive",
                c.weight
            )));
        }
        if let Some(c) = components
            .iter()
            .find(|c| c.state.mean.iter().any(|x| !x.is_finite()))
        {
            return Err(Error::InvalidMixture(format!(
                "non-finite mean {:?}",
                c.state.mean
            )));
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > Self::WEIGHT_SUM_TOL {
            return Err(Error::InvalidMixture(format!(
                "weights sum to {total}, not 1"
            )));
        }
        let mix = Self { components };
        mixture_cm(&mix)?;
        Ok(mix)
    }

    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }

    pub fn mean(&self) -> [f64; 4] {
        self.components
            .iter()
            .fold(Vector4::zeros(), |acc, c| {
                acc + Vector4::from(c.state.mean) * c.weight
            })
            .into()
    }

    pub fn transformed(&self, s: &LocalSymplectic) -> Self {
        Self {
            components: self
                .components
                .iter()
                .map(|c| MixtureComponent {
                    weight: c.weight,
                    state: c.state.transformed(s),
                })
                .collect(),
        }
    }
}

/// Anything the sampler can measure.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Gaussian(GaussianStateSpec),
    Mixture(GaussianMixtureSpec),
}

impl StateSpec {
    /// Covariance matrix of the outcome distribution.
    pub fn cm(&self) -> CovMatrix {
        match self {
            Self::Gaussian(g) => g.cm,
            Self::Mixture(m) => mixture_cm(m).expect("validated on construction"),
        }
    }

    pub fn transformed(&self, s: &LocalSymplectic) -> Self {
        match self {
            Self::Gaussian(g) => Self::Gaussian(g.transformed(s)),
            Self::Mixture(m) => Self::Mixture(m.transformed(s)),
        }
    }

    pub fn swap_parties(&self) -> Self {
        match self {
            Self::Gaussian(g) => Self::Gaussian(g.swap_parties()),
            Self::Mixture(m) => Self::Mixture(GaussianMixtureSpec {
                components: m
                    .components
                    .iter()
                    .map(|c| MixtureComponent {
                        weight: c.weight,
                        state: c.state.swap_parties(),
                    })
                    .collect(),
            }),
        }
    }

    /// Short human-readable label, recorded in sample sidecars.
    pub fn descriptor(&self) -> String {
        match self {
            Self::Gaussian(_) => "gaussian".to_string(),
            Self::Mixture(m) => format!("gaussian-mixture({})", m.components.len()),
        }
    }
}

impl From<GaussianStateSpec> for StateSpec {
    fn from(g: GaussianStateSpec) -> Self {
        Self::Gaussian(g)
    }
}

impl From<GaussianMixtureSpec> for StateSpec {
    fn from(m: GaussianMixtureSpec) -> Self {
        Self::Mixture(m)
    }
}

pub fn vacuum() -> GaussianStateSpec {
    GaussianStateSpec::new(CovMatrix::vacuum())
}

/// Two-mode squeezed vacuum in standard form:
/// `a = b = cosh 2r`, `c1 = -c2 = sinh 2r`.
pub fn tmsv(r: f64) -> Result<GaussianStateSpec> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "squeezing must be finite and >= 0, got {r}"
        )));
    }
    let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
    Ok(GaussianStateSpec::new(
        StandardForm::new(c, c, s, -s)?.to_cov_matrix(),
    ))
}

/// TMSV with added thermal noise `diag(n_a, n_a, n_b, n_b)`.
pub fn noisy_tmsv(r: f64, n_a: f64, n_b: f64) -> Result<GaussianStateSpec> {
    if !(n_a >= 0.0 && n_b >= 0.0) || !n_a.is_finite() || !n_b.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "noise must be finite and >= 0, got ({n_a}, {n_b})"
        )));
    }
    let base = tmsv(r)?;
    let noise = Matrix4::from_diagonal(&Vector4::new(n_a, n_a, n_b, n_b));
    Ok(GaussianStateSpec::new(CovMatrix::new(
        base.cm.matrix() + noise,
    )?))
}

fn squeezer(s: f64) -> Matrix2<f64> {
    Matrix2::new((-s).exp(), 0.0, 0.0, s.exp())
}

/// Beam-splitter-like two-mode mixer `R(θ) ⊗ I₂`; commutes with `Ω_A ⊕ Ω_B`.
fn mixer(theta: f64) -> Matrix4<f64> {
    let (s, c) = theta.sin_cos();
    let i = Matrix2::identity();
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(&(i * c));
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(&(i * s));
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(&(i * -s));
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(&(i * c));
    m
}

/// Seeded random physical state `σ = S · diag(ν₁, ν₁, ν₂, ν₂) · Sᵀ`.
///
/// `ν₁, ν₂` are uniform in `[1, max_thermal]`. `S` is the product
/// `(R⊕R)(Z⊕Z) M (Z⊕Z)(R⊕R)` of local rotations `R`, local squeezers `Z`
/// (parameters uniform in `[0, 1.5]`) and a two-mode mixer `M`; all angles are
/// uniform in `[0, 2π)`. Not Haar distributed.
pub fn random_cm(seed: u64, max_thermal: f64) -> Result<GaussianStateSpec> {
    if !(max_thermal >= 1.0) || !max_thermal.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "max_thermal must be >= 1, got {max_thermal}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut thermal = || {
        if max_thermal > 1.0 {
            rng.random_range(1.0..=max_thermal)
        } else {
            1.0
        }
    };
    let (nu1, nu2) = (thermal(), thermal());

    let tau = std::f64::consts::TAU;
    let local_rot = |rng: &mut ChaCha8Rng| {
        direct_sum(
            &rotation(rng.random_range(0.0..tau)),
            &rotation(rng.random_range(0.0..tau)),
        )
    };
    let local_sq = |rng: &mut ChaCha8Rng| {
        direct_sum(
            &squeezer(rng.random_range(0.0..=RANDOM_MAX_SQUEEZE)),
            &squeezer(rng.random_range(0.0..=RANDOM_MAX_SQUEEZE)),
        )
    };
    let inner_rot = local_rot(&mut rng);
    let inner_sq = local_sq(&mut rng);
    let mix = mixer(rng.random_range(0.0..tau));
    let outer_sq = local_sq(&mut rng);
    let outer_rot = local_rot(&mut rng);

    let s = outer_rot * outer_sq * mix * inner_sq * inner_rot;
    let diag = Matrix4::from_diagonal(&Vector4::new(nu1, nu1, nu2, nu2));
    let sigma = s * diag * s.transpose();
    Ok(GaussianStateSpec::new(validate_bona_fide(
        &((sigma + sigma.transpose()) * 0.5),
    )?))
}

/// Outcome covariance of a mixture: `Σ wᵢ(σᵢ + dᵢdᵢᵀ) - d̄d̄ᵀ`.
pub fn mixture_cm(mix: &GaussianMixtureSpec) -> Result<CovMatrix> {
    if let [only] = mix.components.as_slice() {
        return Ok(only.state.cm);
    }
    let mean = Vector4::from(mix.mean());
    let second = mix.components.iter().fold(Matrix4::zeros(), |acc, c| {
        let d = Vector4::from(c.state.mean);
        acc + (c.state.cm.matrix() + d * d.transpose()) * c.weight
    });
    let m = second - mean * mean.transpose();
    validate_bona_fide(&((m + m.transpose()) * 0.5))
        .map_err(|e| Error::UnphysicalMixture(Box::new(e)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn comp(weight: f64, cm: CovMatrix, mean: [f64; 4]) -> MixtureComponent {
        MixtureComponent {
            weight,
            state: GaussianStateSpec::with_mean(cm, mean),
        }
    }

    #[test]
    fn vacuum_is_identity() {
        let v = vacuum();
        assert_eq!(*v.cm.matrix(), Matrix4::identity());
        assert_eq!(v.mean, [0.0; 4]);
        let (n1, n2) = v.cm.symplectic_eigenvalues();
        assert!((n1 - 1.0).abs() < 1e-14 && (n2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn tmsv_zero_is_vacuum() {
        assert_eq!(tmsv(0.0).unwrap().cm, CovMatrix::vacuum());
    }

    #[test]
    fn tmsv_entries() {
        let cm = tmsv(1.0).unwrap().cm;
        assert_relative_eq!(cm.matrix()[(0, 0)], 3.762_195_691_083_631, epsilon = 1e-12);
        assert_relative_eq!(cm.matrix()[(0, 2)], 2.0_f64.sinh(), epsilon = 1e-15);
        assert_relative_eq!(cm.matrix()[(1, 3)], -2.0_f64.sinh(), epsilon = 1e-15);
    }

    #[test]
    fn tmsv_is_pure() {
        for i in 1..=30 {
            let r = 0.1 * i as f64;
            let det = tmsv(r).unwrap().cm.matrix().determinant();
            assert!(
                (det - 1.0).abs() < 1e-10 * (4.0 * r).cosh().powi(2),
                "r = {r}: det = {det}"
            );
        }
    }

    #[test]
    fn tmsv_rejects_negative() {
        assert!(tmsv(-0.1).is_err());
        assert!(tmsv(f64::NAN).is_err());
    }

    #[test]
    fn noisy_tmsv_without_noise_is_tmsv() {
        assert_eq!(noisy_tmsv(0.8, 0.0, 0.0).unwrap().cm, tmsv(0.8).unwrap().cm);
    }

    #[test]
    fn random_cm_is_deterministic_and_bona_fide() {
        let a = random_cm(7, 3.0).unwrap();
        let b = random_cm(7, 3.0).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_cm(8, 3.0).unwrap());
        assert!(validate_bona_fide(a.cm.matrix()).is_ok());
    }

    #[test]
    fn random_pure_state_has_unit_determinant() {
        for seed in 0..20 {
            let cm = random_cm(seed, 1.0).unwrap().cm;
            let (n1, n2) = cm.symplectic_eigenvalues();
            assert_relative_eq!(n1, 1.0, max_relative = 1e-9);
            assert_relative_eq!(n2, 1.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn random_cm_rejects_bad_thermal_bound() {
        assert!(random_cm(0, 0.5).is_err());
    }

    #[test]
    fn single_component_mixture_is_the_component() {
        let cm = random_cm(3, 2.0).unwrap().cm;
        let mix = GaussianMixtureSpec::new(vec![comp(1.0, cm, [1.0, 2.0, 3.0, 4.0])]).unwrap();
        assert_eq!(mixture_cm(&mix).unwrap(), cm);
    }

    #[test]
    fn displaced_vacua_mixture() {
        let d = 2.5;
        let mix = GaussianMixtureSpec::new(vec![
            comp(0.5, CovMatrix::vacuum(), [d, 0.0, 0.0, 0.0]),
            comp(0.5, CovMatrix::vacuum(), [-d, 0.0, 0.0, 0.0]),
        ])
        .unwrap();
        let mut expect = Matrix4::identity();
        expect[(0, 0)] += d * d;
        assert_relative_eq!(*mixture_cm(&mix).unwrap().matrix(), expect, epsilon = 1e-14);
    }

    #[test]
    fn undisplaced_mixture_is_linear() {
        let t = tmsv(0.5).unwrap().cm;
        let mix = GaussianMixtureSpec::new(vec![
            comp(0.5, t, [0.0; 4]),
            comp(0.5, CovMatrix::vacuum(), [0.0; 4]),
        ])
        .unwrap();
        let expect = (t.matrix() + Matrix4::identity()) * 0.5;
        assert_relative_eq!(*mixture_cm(&mix).unwrap().matrix(), expect, epsilon = 1e-14);
    }

    #[test]
    fn identical_components_give_component_cm() {
        let cm = random_cm(11, 2.0).unwrap().cm;
        let mix =
            GaussianMixtureSpec::new(vec![comp(0.25, cm, [0.0; 4]), comp(0.75, cm, [0.0; 4])])
                .unwrap();
        assert_relative_eq!(
            *mixture_cm(&mix).unwrap().matrix(),
            *cm.matrix(),
            epsilon = 1e-13
        );
    }

    #[test]
    fn mixture_validation() {
        let v = CovMatrix::vacuum();
        assert!(GaussianMixtureSpec::new(vec![]).is_err());
        assert!(GaussianMixtureSpec::new(vec![comp(0.5, v, [0.0; 4])]).is_err());
        assert!(
            GaussianMixtureSpec::new(vec![comp(-0.5, v, [0.0; 4]), comp(1.5, v, [0.0; 4])])
                .is_err()
        );
    }
}
