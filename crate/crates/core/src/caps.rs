//! Enumeration caps shared by the exact modules.
//!
//! Defaults can be lowered (never raised past the hard limits) through
//! environment variables, which is how the CLI exposes them:
//!
//! | variable                    | default | hard limit |
//! |-----------------------------|---------|------------|
//! | `CROSSOVER_MAX_SPINS`       | 24      | 24         |
//! | `CROSSOVER_MAX_CYCLOMATIC`  | 22      | 30         |
//! | `CROSSOVER_MAX_PATHS`       | 2000000 | none       |
//! | `CROSSOVER_MAX_LAYER`       | 12      | 16         |

use serde::{Deserialize, Serialize};

pub const HARD_MAX_SPINS: usize = 24;
pub const HARD_MAX_CYCLOMATIC: usize = 30;
pub const HARD_MAX_LAYER: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    /// Vertices summed over by the brute-force spin oracle.
    pub max_spins: usize,
    /// Cycle-space dimension for even/sourced subgraph enumeration.
    pub max_cyclomatic: usize,
    /// Consistent paths produced by a single enumeration.
    pub max_paths: usize,
    /// Spins per layer of a transfer matrix.
    pub max_layer: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_spins: HARD_MAX_SPINS,
            max_cyclomatic: 22,
            max_paths: 2_000_000,
            max_layer: 12,
        }
    }
}

impl Caps {
    pub fn from_env() -> Self {
        let mut caps = Caps::default();
        let read = |name: &str| std::env::var(name).ok().and_then(|v| v.trim().parse::<usize>().ok());
        if let Some(v) = read("CROSSOVER_MAX_SPINS") {
            caps.max_spins = v.min(HARD_MAX_SPINS);
        }
        if let Some(v) = read("CROSSOVER_MAX_CYCLOMATIC") {
            caps.max_cyclomatic = v.min(HARD_MAX_CYCLOMATIC);
        }
        if let Some(v) = read("CROSSOVER_MAX_PATHS") {
            caps.max_paths = v;
        }
        if let Some(v) = read("CROSSOVER_MAX_LAYER") {
            caps.max_layer = v.min(HARD_MAX_LAYER);
        }
        caps
    }
}

static ACTIVE: std::sync::OnceLock<Caps> = std::sync::OnceLock::new();

/// Caps in force for this process: the environment, read once.
pub fn active() -> Caps {
    *ACTIVE.get_or_init(Caps::from_env)
}
