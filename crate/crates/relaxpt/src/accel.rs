//! Convergence acceleration: Anderson mixing over map images and Aitken
//! extrapolation of scalar energy sequences.

use crate::real::Real;

/// Relative Tikhonov damping applied to the Gram matrix of residual
/// differences before solving for the mixing coefficients. Relative (not
/// absolute) so the acceleration keeps working as residuals shrink toward
/// the stopping tolerance and stays invariant under an overall rescaling
/// of the operator.
pub const ANDERSON_DAMPING: f64 = 1e-12;

struct WindowEntry<T> {
    psi: Vec<T>,
    q: Vec<T>,
    r: Vec<T>,
}

/// Sliding window of recent `(psi, Q(psi), r = Q(psi) - psi)` triples.
/// Holds at most `memory + 1` entries; the oldest is evicted first.
pub struct AndersonWindow<T> {
    memory: usize,
    target: usize,
    entries: Vec<WindowEntry<T>>,
}

/// Outcome of one Anderson step. `betas[0]` weighs the newest map image,
/// `betas[m]` the one from m steps back. `fallback` is set when the
/// window was rank-deficient and the step degraded to beta = (1, 0, ...).
pub struct AndersonStep<T> {
    pub psi_next: Vec<T>,
    pub betas: Vec<T>,
    pub fallback: bool,
}

impl<T: Real> AndersonWindow<T> {
    pub fn new(memory: usize, target: usize) -> Self {
        Self {
            memory,
            target,
            entries: Vec::with_capacity(memory + 2),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    pub fn push(&mut self, psi: Vec<T>, q: Vec<T>) {
        let r = q
            .iter()
            .zip(&psi)
            .map(|(&qi, &pi)| qi - pi)
            .collect();
        self.entries.push(WindowEntry { psi, q, r });
        if self.entries.len() > self.memory + 1 {
            self.entries.remove(0);
        }
    }
}

/// Compute the next iterate `psi = sum_m beta_m Q(psi^(k-m))` with the
/// betas minimizing the combined residual norm subject to `sum beta = 1`.
///
/// The constraint is eliminated by working with residual differences
/// against the newest entry; the small normal-equation system gets the
/// relative Tikhonov damping [`ANDERSON_DAMPING`]. A rank-deficient or
/// non-finite solve falls back to the plain step (all weight on the
/// newest image) and is logged.
pub fn anderson_step<T: Real>(window: &AndersonWindow<T>) -> AndersonStep<T> {
    assert!(!window.is_empty(), "anderson_step on an empty window");
    let entries = &window.entries;
    let count = entries.len();
    let newest = &entries[count - 1];
    if count == 1 {
        return AndersonStep {
            psi_next: newest.q.clone(),
            betas: vec![T::ONE],
            fallback: false,
        };
    }

    let k = count - 1;
    let dim = newest.r.len();
    // d_j = r_j - r_newest for the k older entries (storage order).
    let mut diffs: Vec<Vec<T>> = Vec::with_capacity(k);
    for e in &entries[..k] {
        diffs.push(
            e.r.iter()
                .zip(&newest.r)
                .map(|(&a, &b)| a - b)
                .collect(),
        );
    }
    let dot = |a: &[T], b: &[T]| {
        let mut acc = T::ZERO;
        for (&x, &y) in a.iter().zip(b) {
            acc += x * y;
        }
        acc
    };
    let mut gram = vec![vec![T::ZERO; k]; k];
    let mut rhs = vec![T::ZERO; k];
    let mut max_diag = T::ZERO;
    for j in 0..k {
        for i in j..k {
            let g = dot(&diffs[j], &diffs[i]);
            gram[j][i] = g;
            gram[i][j] = g;
        }
        max_diag = max_diag.max(gram[j][j]);
        rhs[j] = -dot(&diffs[j], &newest.r);
    }

    let fallback = |reason: &str| {
        log::debug!("anderson step falling back to plain iteration: {reason}");
        AndersonStep {
            psi_next: newest.q.clone(),
            betas: {
                let mut b = vec![T::ZERO; count];
                b[0] = T::ONE;
                b
            },
            fallback: true,
        }
    };

    if !(max_diag > T::ZERO) || !max_diag.is_finite() {
        return fallback("zero or non-finite residual differences");
    }
    let nu = T::from_f64(ANDERSON_DAMPING) * max_diag;
    for (j, row) in gram.iter_mut().enumerate() {
        row[j] += nu;
    }
    let gamma = match solve_small(&mut gram, &mut rhs) {
        Some(g) if g.iter().all(|x| x.is_finite()) => g,
        _ => return fallback("rank-deficient window"),
    };

    // beta over storage order: gamma for the older entries, 1 - sum(gamma)
    // for the newest.
    let mut sum_gamma = T::ZERO;
    for &g in &gamma {
        sum_gamma += g;
    }
    let beta_newest = T::ONE - sum_gamma;
    let mut psi_next = vec![T::ZERO; dim];
    for (j, e) in entries[..k].iter().enumerate() {
        for (p, &qn) in psi_next.iter_mut().zip(&e.q) {
            *p += gamma[j] * qn;
        }
    }
    for (p, &qn) in psi_next.iter_mut().zip(&newest.q) {
        *p += beta_newest * qn;
    }
    // sum(beta) = 1 puts the target component at 1 up to roundoff; re-pin.
    psi_next[window.target] = T::ONE;

    // Report betas with m = 0 the newest.
    let mut betas = Vec::with_capacity(count);
    betas.push(beta_newest);
    for j in (0..k).rev() {
        betas.push(gamma[j]);
    }
    AndersonStep {
        psi_next,
        betas,
        fallback: false,
    }
}

/// Gaussian elimination with partial pivoting on a small dense system.
/// Returns `None` on a zero pivot. Destroys its inputs.
fn solve_small<T: Real>(a: &mut [Vec<T>], b: &mut [T]) -> Option<Vec<T>> {
    let n = b.len();
    for col in 0..n {
        let mut piv = col;
        for row in col + 1..n {
            if a[row][col].abs() > a[piv][col].abs() {
                piv = row;
            }
        }
        if a[piv][col] == T::ZERO {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                let t = f * a[col][k];
                a[row][k] -= t;
            }
            let t = f * b[col];
            b[row] -= t;
        }
    }
    let mut x = vec![T::ZERO; n];
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Some(x)
}

/// Result of Aitken delta-squared extrapolation. `degenerate[n]` marks
/// terms where the second difference vanished and the value passed
/// through unchanged.
pub struct AitkenResult<T> {
    pub values: Vec<T>,
    pub degenerate: Vec<bool>,
}

/// Threshold below which the Aitken denominator is treated as zero.
pub const AITKEN_DENOM_FLOOR: f64 = 1e-300;

/// Aitken extrapolation `s'_n = (s_n s_{n+2} - s_{n+1}^2) / (s_n + s_{n+2} - 2 s_{n+1})`,
/// evaluated in the cancellation-safe equivalent form
/// `s'_n = s_{n+2} - (s_{n+2} - s_{n+1})^2 / (s_n + s_{n+2} - 2 s_{n+1})`.
/// Requires at least three terms; returns n-2 extrapolated values.
pub fn aitken<T: Real>(s: &[T]) -> AitkenResult<T> {
    assert!(s.len() >= 3, "aitken needs at least three terms");
    let floor = T::from_f64(AITKEN_DENOM_FLOOR);
    let mut values = Vec::with_capacity(s.len() - 2);
    let mut degenerate = Vec::with_capacity(s.len() - 2);
    for n in 0..s.len() - 2 {
        let d2 = s[n + 2] - s[n + 1];
        let d1 = s[n + 1] - s[n];
        let den = d2 - d1;
        if den.abs() < floor {
            values.push(s[n + 1]);
            degenerate.push(true);
        } else {
            values.push(s[n + 2] - d2 * d2 / den);
            degenerate.push(false);
        }
    }
    AitkenResult { values, degenerate }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_entry_window_is_plain_step() {
        let mut w: AndersonWindow<f64> = AndersonWindow::new(5, 0);
        w.push(vec![1.0, 0.2], vec![1.0, 0.35]);
        let step = anderson_step(&w);
        assert_eq!(step.psi_next, vec![1.0, 0.35]);
        assert_eq!(step.betas, vec![1.0]);
        assert!(!step.fallback);
    }

    #[test]
    fn window_never_exceeds_memory_plus_one() {
        let mut w: AndersonWindow<f64> = AndersonWindow::new(2, 0);
        for i in 0..10 {
            let x = i as f64;
            w.push(vec![1.0, x], vec![1.0, x + 1.0]);
        }
        assert_eq!(w.len(), 3);
    }

    #[test]
    fn zero_residual_entry_attracts_all_weight() {
        let mut w: AndersonWindow<f64> = AndersonWindow::new(5, 0);
        // Older entry is an exact fixed point (r = 0).
        w.push(vec![1.0, 0.5, -0.25], vec![1.0, 0.5, -0.25]);
        w.push(vec![1.0, 0.3, 0.1], vec![1.0, 0.42, -0.02]);
        let step = anderson_step(&w);
        let sum: f64 = step.betas.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        // m = 1 is the older (fixed-point) entry.
        assert!((step.betas[1] - 1.0).abs() < 1e-6, "betas = {:?}", step.betas);
        assert!((step.psi_next[1] - 0.5).abs() < 1e-6);
        assert!((step.psi_next[2] + 0.25).abs() < 1e-6);
    }

    #[test]
    fn betas_sum_to_one_and_target_pinned() {
        let mut w: AndersonWindow<f64> = AndersonWindow::new(3, 0);
        let cases = [
            (vec![1.0, 0.0, 0.0], vec![1.0, -0.3, 0.2]),
            (vec![1.0, -0.3, 0.2], vec![1.0, -0.35, 0.26]),
            (vec![1.0, -0.35, 0.26], vec![1.0, -0.37, 0.28]),
        ];
        for (psi, q) in cases {
            w.push(psi, q);
        }
        let step = anderson_step(&w);
        let sum: f64 = step.betas.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert_eq!(step.psi_next[0], 1.0);
    }

    #[test]
    fn duplicate_entries_fall_back() {
        let mut w: AndersonWindow<f64> = AndersonWindow::new(3, 0);
        // Identical residuals make the difference matrix exactly zero.
        w.push(vec![1.0, 0.2], vec![1.0, 0.3]);
        w.push(vec![1.0, 0.2], vec![1.0, 0.3]);
        let step = anderson_step(&w);
        assert!(step.fallback);
        assert_eq!(step.psi_next, vec![1.0, 0.3]);
        assert_eq!(step.betas[0], 1.0);
    }

    #[test]
    fn aitken_exact_on_geometric_partial_sums() {
        let out = aitken(&[1.0, 1.5, 1.75]);
        assert_eq!(out.values, vec![2.0]);
        assert!(!out.degenerate[0]);
    }

    #[test]
    fn aitken_constant_sequence_passes_through() {
        let c = 0.7;
        let out = aitken(&[c, c, c, c]);
        assert_eq!(out.values, vec![c, c]);
        assert!(out.degenerate.iter().all(|&d| d));
    }

    #[test]
    fn aitken_recovers_limit_of_linear_convergence() {
        // s_n = L + c * rho^n; Aitken should return L almost exactly
        // while the geometric tail is still far above roundoff.
        let (limit, c, rho) = (2.5, 0.8, 0.6);
        let s: Vec<f64> = (0..25).map(|n| limit + c * rho.powi(n)).collect();
        let out = aitken(&s);
        for (n, &v) in out.values.iter().enumerate() {
            if c * rho.powi(n as i32 + 2) > 1e-6 {
                assert!(
                    (v - limit).abs() < 1e-12,
                    "n={n}: {v} vs {limit} ({:e})",
                    (v - limit).abs()
                );
            }
        }
    }
}
