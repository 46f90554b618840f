//! Partitionings H = H0 + lambda*H1 with diagonal H0.
//!
//! The Epstein-Nesbet split takes H0 to be the full diagonal of H in the
//! working basis; the natural split keeps the free part as H0 and folds
//! the whole coupled term (diagonal included) into H1.

use crate::error::{PtError, Result};
use crate::operator::SparseSymmetricOperator;
use crate::real::{norm2, Real};

/// Relative threshold deciding when two unperturbed levels are treated as
/// degenerate: |E0 - h0[n]| < DEGENERACY_EPS * max(1, |E0|).
pub const DEGENERACY_EPS: f64 = 1e-12;

/// A split H = diag(h0) + lambda * H1 targeting one unperturbed state.
#[derive(Clone, Debug)]
pub struct Partitioning<T> {
    h0_diag: Vec<T>,
    h1: SparseSymmetricOperator<T>,
    lambda: T,
    target: usize,
}

impl<T: Real> Partitioning<T> {
    pub fn new(
        h0_diag: Vec<T>,
        h1: SparseSymmetricOperator<T>,
        lambda: T,
        target: usize,
    ) -> Result<Self> {
        if h0_diag.len() != h1.dim() {
            return Err(PtError::DimensionMismatch {
                left: h0_diag.len(),
                right: h1.dim(),
            });
        }
        if target >= h0_diag.len() {
            return Err(PtError::IndexOutOfRange {
                index: target,
                dim: h0_diag.len(),
            });
        }
        Ok(Self {
            h0_diag,
            h1,
            lambda,
            target,
        })
    }

    pub fn dim(&self) -> usize {
        self.h0_diag.len()
    }

    pub fn h0_diag(&self) -> &[T] {
        &self.h0_diag
    }

    pub fn h1(&self) -> &SparseSymmetricOperator<T> {
        &self.h1
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn target(&self) -> usize {
        self.target
    }

    /// Unperturbed energy of the targeted state.
    pub fn e0(&self) -> T {
        self.h0_diag[self.target]
    }

    pub fn with_lambda(mut self, lambda: T) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_target(mut self, target: usize) -> Result<Self> {
        if target >= self.dim() {
            return Err(PtError::IndexOutOfRange {
                index: target,
                dim: self.dim(),
            });
        }
        self.target = target;
        Ok(self)
    }

    /// Reassemble diag(h0) + lambda * H1 as one operator.
    pub fn reconstruct(&self) -> SparseSymmetricOperator<T> {
        let mut triplets: Vec<(usize, usize, T)> = self
            .h1
            .to_upper_triplets()
            .into_iter()
            .map(|(i, j, v)| (i, j, self.lambda * v))
            .collect();
        for (i, &d) in self.h0_diag.iter().enumerate() {
            triplets.push((i, i, d));
        }
        SparseSymmetricOperator::from_triplets(self.dim(), &triplets)
            .expect("triplets from a valid partitioning")
    }

    /// Smallest distance between E0 and the rest of the unperturbed spectrum.
    pub fn spectral_gap(&self) -> T {
        let e0 = self.e0();
        let mut gap = T::infinity();
        for (n, &h) in self.h0_diag.iter().enumerate() {
            if n != self.target {
                gap = gap.min((e0 - h).abs());
            }
        }
        gap
    }

    /// Largest distance between E0 and the rest of the unperturbed
    /// spectrum. Bounds the residual of a near-fixed-point iterate:
    /// ||H psi - <psi0|H psi> psi|| <= diameter * ||Q(psi) - psi||.
    pub fn spectral_diameter(&self) -> T {
        let e0 = self.e0();
        let mut d = T::ZERO;
        for (n, &h) in self.h0_diag.iter().enumerate() {
            if n != self.target {
                d = d.max((e0 - h).abs());
            }
        }
        d
    }

    /// Check that no unperturbed level collides with the target level.
    pub fn check_nondegenerate(&self) -> Result<()> {
        let e0 = self.e0();
        let threshold = T::from_f64(DEGENERACY_EPS) * T::ONE.max(e0.abs());
        for (n, &h) in self.h0_diag.iter().enumerate() {
            if n == self.target {
                continue;
            }
            let gap = (e0 - h).abs();
            if gap < threshold {
                return Err(PtError::DegenerateDiagonal {
                    index: n,
                    gap: gap.to_f64(),
                    threshold: threshold.to_f64(),
                });
            }
        }
        Ok(())
    }
}

/// Epstein-Nesbet partitioning: H0 = diag(H), H1 = H - diag(H), lambda = 1.
pub fn epstein_nesbet<T: Real>(
    h: &SparseSymmetricOperator<T>,
    target: usize,
) -> Result<Partitioning<T>> {
    if h.dim() < 2 {
        return Err(PtError::DimensionTooSmall {
            dim: h.dim(),
            min: 2,
        });
    }
    if target >= h.dim() {
        return Err(PtError::IndexOutOfRange {
            index: target,
            dim: h.dim(),
        });
    }
    Partitioning::new(h.diag().to_vec(), h.without_diagonal(), T::ONE, target)
}

/// Conventional partitioning of H = F + g*I: H0 = diag(F), H1 = g*I with
/// the diagonal of I kept inside H1, lambda = 1.
pub fn natural_partitioning<T: Real>(
    f_diag: &[T],
    interaction: &SparseSymmetricOperator<T>,
    g: T,
    target: usize,
) -> Result<Partitioning<T>> {
    if f_diag.len() != interaction.dim() {
        return Err(PtError::DimensionMismatch {
            left: f_diag.len(),
            right: interaction.dim(),
        });
    }
    Partitioning::new(f_diag.to_vec(), interaction.scale(g), T::ONE, target)
}

/// Repartition H = [a^-1 H0] + [H1 + (1 - a^-1) H0].
///
/// The new H1 carries a diagonal part; the sum still reconstructs H when
/// lambda = 1. Unrelaxed iteration on the repartitioned problem matches
/// relaxed iteration with parameter `alpha` on the original one.
pub fn repartition<T: Real>(p: &Partitioning<T>, alpha: T) -> Result<Partitioning<T>> {
    if !(alpha > T::ZERO && alpha <= T::ONE) {
        return Err(PtError::InvalidConfig(format!(
            "repartition alpha must be in (0, 1], got {alpha}"
        )));
    }
    let inv = T::ONE / alpha;
    let new_h0: Vec<T> = p.h0_diag().iter().map(|&d| inv * d).collect();
    let extra_diag: Vec<T> = p.h0_diag().iter().map(|&d| (T::ONE - inv) * d).collect();
    let merged: Vec<T> = p
        .h1()
        .diag()
        .iter()
        .zip(&extra_diag)
        .map(|(&a, &b)| a + b)
        .collect();
    let new_h1 = p.h1().with_diagonal(&merged)?;
    Partitioning::new(new_h0, new_h1, p.lambda(), p.target())
}

/// Which way to read the convergence-radius constant. The bound guards
/// |lambda| against the size of the perturbation relative to the gap.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundReading {
    /// (3 - 2*sqrt(2)) * delta / ||H1||; dimensionally consistent, default.
    GapOverNorm,
    /// (3 - 2*sqrt(2)) / (||H1|| * delta), the other literal reading.
    ReciprocalNormGap,
}

/// Sufficient-convergence radius for |lambda|. Advisory only: the solvers
/// routinely converge far outside it.
///
/// ||H1|| is estimated by 30 power-iteration steps for dim <= 2000 and by
/// the Gershgorin row-sum upper bound above that.
pub fn convergence_radius_bound<T: Real>(p: &Partitioning<T>, reading: BoundReading) -> T {
    let norm = estimate_norm(p.h1());
    if norm == T::ZERO {
        return T::infinity();
    }
    let delta = p.spectral_gap();
    let c = T::from_f64(3.0) - T::from_f64(2.0) * T::from_f64(2.0).sqrt();
    match reading {
        BoundReading::GapOverNorm => c * delta / norm,
        BoundReading::ReciprocalNormGap => c / (norm * delta),
    }
}

/// Spectral-norm estimate of a symmetric operator.
pub fn estimate_norm<T: Real>(a: &SparseSymmetricOperator<T>) -> T {
    if a.nnz() == 0 {
        return T::ZERO;
    }
    let dim = a.dim();
    if dim <= 2000 {
        // Power iteration from the normalized all-ones vector; deterministic.
        let mut v = vec![T::ONE / T::from_f64(dim as f64).sqrt(); dim];
        let mut w = vec![T::ZERO; dim];
        let mut est = T::ZERO;
        for _ in 0..30 {
            a.matvec_into(&v, &mut w);
            est = norm2(&w);
            if est == T::ZERO {
                // Start vector annihilated; fall back to the row-sum bound.
                return gershgorin_norm(a);
            }
            for (vi, &wi) in v.iter_mut().zip(&w) {
                *vi = wi / est;
            }
        }
        est
    } else {
        gershgorin_norm(a)
    }
}

fn gershgorin_norm<T: Real>(a: &SparseSymmetricOperator<T>) -> T {
    let mut bound = T::ZERO;
    for i in 0..a.dim() {
        let mut row_sum = T::ZERO;
        for (_, v) in a.row(i) {
            row_sum += v.abs();
        }
        bound = bound.max(row_sum);
    }
    bound
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two() -> SparseSymmetricOperator<f64> {
        SparseSymmetricOperator::from_triplets(
            2,
            &[(0, 0, 1.0), (1, 1, 2.0), (0, 1, 0.1)],
        )
        .unwrap()
    }

    #[test]
    fn epstein_nesbet_on_2x2() {
        let p = epstein_nesbet(&two_by_two(), 0).unwrap();
        assert_eq!(p.h0_diag(), &[1.0, 2.0]);
        assert!(p.h1().has_zero_diagonal());
        assert_eq!(p.h1().entry(0, 1), 0.1);
        assert_eq!(p.lambda(), 1.0);
    }

    #[test]
    fn epstein_nesbet_reconstructs() {
        let h = two_by_two();
        let p = epstein_nesbet(&h, 1).unwrap();
        let r = p.reconstruct();
        for i in 0..2 {
            for j in 0..2 {
                assert!((r.entry(i, j) - h.entry(i, j)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn epstein_nesbet_rejects_bad_target() {
        assert!(matches!(
            epstein_nesbet(&two_by_two(), 5),
            Err(PtError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn natural_partitioning_2x2() {
        let inter =
            SparseSymmetricOperator::from_triplets(2, &[(0, 1, 1.0)]).unwrap();
        let p = natural_partitioning(&[0.0, 1.0], &inter, 0.1, 0).unwrap();
        assert_eq!(p.h0_diag(), &[0.0, 1.0]);
        assert!((p.h1().entry(0, 1) - 0.1).abs() < 1e-16);
    }

    #[test]
    fn natural_partitioning_zero_coupling() {
        let inter =
            SparseSymmetricOperator::from_triplets(2, &[(0, 1, 1.0)]).unwrap();
        let p = natural_partitioning(&[0.0, 1.0], &inter, 0.0, 0).unwrap();
        assert_eq!(p.h1().nnz(), 0);
    }

    #[test]
    fn repartition_identity_at_alpha_one() {
        let p = epstein_nesbet(&two_by_two(), 0).unwrap();
        let q = repartition(&p, 1.0).unwrap();
        assert_eq!(q.h0_diag(), p.h0_diag());
        assert_eq!(q.h1().entry(0, 1), p.h1().entry(0, 1));
        assert!(q.h1().has_zero_diagonal());
    }

    #[test]
    fn repartition_half() {
        let h = SparseSymmetricOperator::from_triplets(
            2,
            &[(1, 1, 1.0), (0, 1, 0.1)],
        )
        .unwrap();
        let p = epstein_nesbet(&h, 0).unwrap();
        let q = repartition(&p, 0.5).unwrap();
        assert_eq!(q.h0_diag(), &[0.0, 2.0]);
        assert_eq!(q.h1().diag(), &[0.0, -1.0]);
        assert_eq!(q.h1().entry(0, 1), 0.1);
        // Sum still reconstructs H.
        let r = q.reconstruct();
        assert!((r.entry(1, 1) - 1.0).abs() < 1e-15);
        assert!((r.entry(0, 0)).abs() < 1e-15);
    }

    #[test]
    fn repartition_rejects_zero_alpha() {
        let p = epstein_nesbet(&two_by_two(), 0).unwrap();
        assert!(repartition(&p, 0.0).is_err());
    }

    #[test]
    fn bound_on_2x2() {
        let h = SparseSymmetricOperator::from_triplets(
            2,
            &[(1, 1, 1.0), (0, 1, 1.0)],
        )
        .unwrap();
        let p = epstein_nesbet(&h, 0).unwrap();
        // ||H1|| = 1, delta = 1: both readings give 3 - 2*sqrt(2).
        let want = 3.0 - 2.0 * 2.0_f64.sqrt();
        let a = convergence_radius_bound(&p, BoundReading::GapOverNorm);
        let b = convergence_radius_bound(&p, BoundReading::ReciprocalNormGap);
        assert!((a - want).abs() < 1e-6, "got {a}");
        assert!((b - want).abs() < 1e-6, "got {b}");
    }

    #[test]
    fn bound_infinite_for_diagonal_h() {
        let h = SparseSymmetricOperator::from_triplets(
            2,
            &[(0, 0, 1.0), (1, 1, 2.0)],
        )
        .unwrap();
        let p = epstein_nesbet(&h, 0).unwrap();
        let b = convergence_radius_bound(&p, BoundReading::GapOverNorm);
        assert!(b.is_infinite());
    }

    #[test]
    fn degenerate_diagonal_detected() {
        let h = SparseSymmetricOperator::from_triplets(
            2,
            &[(1, 1, 1e-14), (0, 1, 0.1)],
        )
        .unwrap();
        let p = epstein_nesbet(&h, 0).unwrap();
        assert!(matches!(
            p.check_nondegenerate(),
            Err(PtError::DegenerateDiagonal { .. })
        ));
    }
}
