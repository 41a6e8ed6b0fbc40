//! Maximum-entropy completion of committed marginals by iterative
//! proportional fitting.

use super::ElicitationError;
use crate::lp::{maximize, LpOutcome};

pub const IPF_TOLERANCE: f64 = 1e-9;
pub const IPF_MAX_ITERATIONS: usize = 10_000;

/// One marginal constraint: total mass of the atoms containing `mask` is `value`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarginalConstraint {
    pub mask: u32,
    pub value: f64,
}

fn marginal(x: &[f64], mask: u32) -> f64 {
    x.iter()
        .enumerate()
        .filter(|(a, _)| *a as u32 & mask == mask)
        .map(|(_, v)| v)
        .sum()
}

/// Largest absolute gap between a constraint and the distribution's marginal.
pub fn residual(x: &[f64], constraints: &[MarginalConstraint]) -> f64 {
    constraints
        .iter()
        .map(|c| (marginal(x, c.mask) - c.value).abs())
        .fold(0.0, f64::max)
}

fn ipf(x: &mut [f64], constraints: &[MarginalConstraint], max_iter: usize) -> f64 {
    for _ in 0..max_iter {
        for c in constraints {
            let cur = marginal(x, c.mask);
            let inside = if cur > 0.0 { c.value / cur } else { 0.0 };
            let outside = if cur < 1.0 { (1.0 - c.value) / (1.0 - cur) } else { 0.0 };
            for (a, v) in x.iter_mut().enumerate() {
                *v *= if a as u32 & c.mask == c.mask { inside } else { outside };
            }
            let total: f64 = x.iter().sum();
            if total > 0.0 {
                for v in x.iter_mut() {
                    *v /= total;
                }
            }
        }
        if residual(x, constraints) <= IPF_TOLERANCE {
            return 0.0;
        }
    }
    residual(x, constraints)
}

/// Atoms that must be zero in every distribution meeting the constraints.
fn forced_zeros(n: usize, constraints: &[MarginalConstraint]) -> Result<Vec<bool>, ElicitationError> {
    let atoms = 1usize << n;
    let mut a = vec![vec![1.0; atoms]];
    let mut b = vec![1.0];
    for c in constraints {
        a.push((0..atoms).map(|k| if k as u32 & c.mask == c.mask { 1.0 } else { 0.0 }).collect());
        b.push(c.value);
    }
    (0..atoms)
        .map(|k| {
            let mut obj = vec![0.0; atoms];
            obj[k] = 1.0;
            match maximize(&obj, &a, &b) {
                LpOutcome::Optimal { value, .. } => Ok(value <= IPF_TOLERANCE),
                _ => Err(ElicitationError::Incoherent),
            }
        })
        .collect()
}

/// Atom masses from a marginal for every nonempty subset, by Möbius
/// inversion over supersets.
fn invert(n: usize, constraints: &[MarginalConstraint]) -> Option<Vec<f64>> {
    let atoms = 1usize << n;
    let mut m = vec![f64::NAN; atoms];
    m[0] = 1.0;
    for c in constraints {
        m[c.mask as usize] = c.value;
    }
    if m.iter().any(|v| v.is_nan()) {
        return None;
    }
    // in-place superset transform: x(S) = Σ_{T ⊇ S} (-1)^{|T∖S|} m(T)
    for bit in 0..n {
        for s in 0..atoms {
            if s >> bit & 1 == 0 {
                m[s] -= m[s | 1 << bit];
            }
        }
    }
    Some(m.into_iter().map(|v| v.max(0.0)).collect())
}

/// Maximum-entropy distribution over the `2^n` atoms meeting every constraint.
///
/// Atom `k` is the outcome in which exactly the events of mask `k` occur.
/// When every nonempty marginal is given the distribution is fully
/// determined and is computed directly.
pub fn max_entropy(n: usize, constraints: &[MarginalConstraint]) -> Result<Vec<f64>, ElicitationError> {
    if let Some(x) = invert(n, constraints) {
        let r = residual(&x, constraints);
        return if r <= IPF_TOLERANCE {
            Ok(x)
        } else {
            Err(ElicitationError::Incoherent)
        };
    }
    let atoms = 1usize << n;
    let mut x = vec![1.0 / atoms as f64; atoms];
    if ipf(&mut x, constraints, IPF_MAX_ITERATIONS / 10) == 0.0 {
        return Ok(x);
    }
    // Slow convergence means the solution sits on the boundary. Starting
    // from the support the constraints allow restores a fast, exact fit.
    let zero = forced_zeros(n, constraints)?;
    let support = zero.iter().filter(|z| !**z).count().max(1);
    for (v, z) in x.iter_mut().zip(&zero) {
        *v = if *z { 0.0 } else { 1.0 / support as f64 };
    }
    let r = ipf(&mut x, constraints, IPF_MAX_ITERATIONS);
    if r > 0.0 {
        return Err(ElicitationError::NonConvergence { residual: r });
    }
    Ok(x)
}
