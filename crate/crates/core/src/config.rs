use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::solver::{solve_optimal, DenseSimplex, LinearProgram, LpBackend, Solution};

/// Numerical tolerances shared across modules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub feasibility: f64,
    pub interior: f64,
    pub bisect: f64,
    pub rank: f64,
    /// Pivot and reduced-cost tolerance inside the simplex.
    pub solver: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            feasibility: 1e-7,
            interior: 1e-9,
            bisect: 1e-8,
            rank: 1e-10,
            solver: 1e-9,
        }
    }
}

/// Hard limits on problem growth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Caps {
    /// Maximum dimension of a product space.
    pub dim: usize,
    /// Maximum number of enumerated items (outcome tuples, rays, LP columns).
    pub enumeration: usize,
    /// Cap on vertex/facet counts during double description.
    pub rays: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            dim: 64,
            enumeration: 1_000_000,
            rays: 20_000,
        }
    }
}

/// Everything an operation needs besides its mathematical inputs.
#[derive(Clone)]
pub struct Ctx {
    pub tol: Tolerances,
    pub caps: Caps,
    pub backend: Arc<dyn LpBackend>,
    /// Directory for cached vertex enumerations; `None` disables the disk cache.
    pub cache_dir: Option<PathBuf>,
    pub seed: u64,
}

impl Default for Ctx {
    fn default() -> Self {
        Ctx {
            tol: Tolerances::default(),
            caps: Caps::default(),
            backend: Arc::new(DenseSimplex::default()),
            cache_dir: None,
            seed: 0,
        }
    }
}

impl std::fmt::Debug for Ctx {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Ctx")
            .field("tol", &self.tol)
            .field("caps", &self.caps)
            .field("backend", &self.backend.name())
            .field("cache_dir", &self.cache_dir)
            .field("seed", &self.seed)
            .finish()
    }
}

impl Ctx {
    pub fn lp(&self, lp: &LinearProgram) -> Result<Solution> {
        solve_optimal(self.backend.as_ref(), lp)
    }
}
