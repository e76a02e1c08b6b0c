//! Exhaustive search of a regular grid over `(f, x, y, z, v) ∈ [0, 1]⁵`.

use rayon::prelude::*;
use serde::Serialize;

use super::{adequacy_residuals, HvModel, RESIDUAL_TOL};
use crate::delayed_choice::{BiasAngle, PhaseAngle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridConstraint {
    None,
    /// Only points with `v = z`.
    VEqualsZ,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridSearch {
    pub steps: usize,
    /// Number of `(f, z, v)` triples visited.
    pub triples_visited: u64,
    /// Number of triples surviving the `r₃` test.
    pub triples_kept: u64,
    pub adequate: Vec<HvModel>,
}

/// Finds every grid point (step `1/steps`) with all residuals below 1e-9.
///
/// `r₃` depends only on `(f, z, v)`, and `r₁`/`r₂` each involve just one of
/// `x`/`y` beyond that, so triples failing `r₃` skip the inner loops and
/// inner values failing their own factor are skipped individually.
pub fn grid_search(phi: PhaseAngle, alpha: BiasAngle, steps: usize, constraint: GridConstraint) -> GridSearch {
    let at = |k: usize| k as f64 / steps as f64;
    let slices: Vec<(u64, u64, Vec<HvModel>)> = (0..=steps)
        .into_par_iter()
        .map(|fi| {
            let f = at(fi);
            let mut visited = 0;
            let mut kept = 0;
            let mut hits = Vec::new();
            for zi in 0..=steps {
                let v_range = match constraint {
                    GridConstraint::None => 0..=steps,
                    GridConstraint::VEqualsZ => zi..=zi,
                };
                for vi in v_range {
                    visited += 1;
                    let mut m = HvModel { f, x: 0.0, y: 0.0, z: at(zi), v: at(vi), phi: phi.0, alpha: alpha.0 };
                    if adequacy_residuals(&m)[2].abs() >= RESIDUAL_TOL {
                        continue;
                    }
                    kept += 1;
                    for xi in 0..=steps {
                        m.x = at(xi);
                        if adequacy_residuals(&m)[0].abs() >= RESIDUAL_TOL {
                            continue;
                        }
                        for yi in 0..=steps {
                            m.y = at(yi);
                            if adequacy_residuals(&m).iter().all(|r| r.abs() < RESIDUAL_TOL) {
                                hits.push(m);
                            }
                        }
                    }
                }
            }
            (visited, kept, hits)
        })
        .collect();

    let mut search = GridSearch { steps, triples_visited: 0, triples_kept: 0, adequate: Vec::new() };
    for (visited, kept, hits) in slices {
        search.triples_visited += visited;
        search.triples_kept += kept;
        search.adequate.extend(hits);
    }
    search
}
