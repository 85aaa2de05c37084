//! Escape norms ‖χ_Λ U^n ψ‖ on Z^d, computed on a box large enough to avoid wraparound.

use super::evolve::DirectStepper;
use super::state::CompactState;
use crate::error::{Result, WalkError};
use crate::walk_core::{box_index, LatticeVector, WalkSpec};

/// Largest box side accepted by `rage_escape` for dimension d.
pub fn rage_budget(d: usize) -> usize {
    match d {
        1 => 1 << 16,
        2 => 1 << 10,
        _ => ((1u64 << 20) as f64).powf(1.0 / d as f64).floor() as usize,
    }
}

/// Box side with N > 2(R·n_max + radius), so U^n ψ never wraps for n ≤ n_max.
pub fn rage_box(
    walk: &WalkSpec,
    psi: &CompactState,
    lambda: &[LatticeVector],
    n_max: usize,
) -> usize {
    let reach = walk.range() as usize * n_max + psi.radius() as usize;
    let window = lambda
        .iter()
        .map(|p| p.max_norm() as usize)
        .max()
        .unwrap_or(0);
    2 * reach.max(window) + 1
}

/// ‖χ_Λ U^n ψ‖ for n = 0..=n_max.
pub fn rage_escape(
    walk: &WalkSpec,
    psi: &CompactState,
    lambda: &[LatticeVector],
    n_max: usize,
) -> Result<Vec<f64>> {
    if psi.d != walk.d() || psi.nu != walk.nu() || lambda.iter().any(|p| p.dim() != walk.d()) {
        return Err(WalkError::DimensionMismatch(
            "state or window does not match the walk".into(),
        ));
    }
    let n = rage_box(walk, psi, lambda, n_max);
    if n > rage_budget(walk.d()) {
        return Err(WalkError::BudgetExceeded(format!(
            "rage_escape needs N = {n} > {} for d = {}",
            rage_budget(walk.d()),
            walk.d()
        )));
    }
    let window: Vec<usize> = lambda.iter().map(|p| box_index(&p.0, n)).collect();
    let stepper = DirectStepper::new(walk, n);
    let mut s = psi.to_box(n);
    let mut out = Vec::with_capacity(n_max + 1);
    for step in 0..=n_max {
        let w: f64 = window
            .iter()
            .map(|&i| s.fields.iter().map(|f| f[i].norm_sqr()).sum::<f64>())
            .sum();
        out.push(w.sqrt());
        if step < n_max {
            s = stepper.step(&s);
        }
    }
    Ok(out)
}
