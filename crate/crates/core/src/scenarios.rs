//! Named experiment set-ups: diffusivities, initial profiles and end time.
//!
//! Both named cases use no-flux walls, which `compute_fluxes` enforces.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{Grid1D, NodalField};
use crate::mixture::MixtureSpec;
use crate::schemes::MixtureState;

/// Initial mole fraction of species 2 in both profiles.
pub const XI2_INITIAL: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitialProfile {
    /// Plateau 0.8 on [0, 0.25), linear ramp 1.6(0.75 − x) on [0.25, 0.75), zero beyond.
    Uphill,
    /// 0.8 on [0, 0.5), zero on [0.5, 1].
    Step,
}

impl InitialProfile {
    pub fn as_str(&self) -> &'static str {
        match self {
            InitialProfile::Uphill => "uphill-profile",
            InitialProfile::Step => "step-profile",
        }
    }

    /// Species-1 mole fraction of the continuum profile at `x`.
    pub fn xi1_at(&self, x: f64) -> f64 {
        match self {
            InitialProfile::Uphill => {
                if x < 0.25 {
                    0.8
                } else if x < 0.75 {
                    1.6 * (0.75 - x)
                } else {
                    0.0
                }
            }
            InitialProfile::Step => {
                if x < 0.5 {
                    0.8
                } else {
                    0.0
                }
            }
        }
    }

    /// Pointwise nodal sampling at t = 0.
    pub fn sample(&self, grid: &Grid1D) -> MixtureState {
        MixtureState::new(
            NodalField::from_fn(grid, |x| self.xi1_at(x)),
            NodalField::constant(grid.node_count(), XI2_INITIAL),
            0.0,
        )
    }
}

impl fmt::Display for InitialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InitialProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "uphill-profile" | "uphill" => Ok(InitialProfile::Uphill),
            "step-profile" | "step" => Ok(InitialProfile::Step),
            other => Err(Error::Config(format!(
                "init: unknown profile '{other}' (expected uphill-profile or step-profile)"
            ))),
        }
    }
}

pub fn initial_uphill(grid: &Grid1D) -> MixtureState {
    InitialProfile::Uphill.sample(grid)
}

pub fn initial_step(grid: &Grid1D) -> MixtureState {
    InitialProfile::Step.sample(grid)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub spec: MixtureSpec,
    pub profile: InitialProfile,
    pub t_end: f64,
}

impl Scenario {
    pub fn custom(spec: MixtureSpec, profile: InitialProfile, t_end: f64) -> Self {
        Self {
            name: CUSTOM.to_string(),
            spec,
            profile,
            t_end,
        }
    }

    pub fn initial_state(&self, grid: &Grid1D) -> MixtureState {
        self.profile.sample(grid)
    }
}

pub const UPHILL_SEMIDEGENERATE: &str = "uphill-semidegenerate";
pub const DUNCAN_TOOR_ASYMPTOTIC: &str = "duncan-toor-asymptotic";
pub const CUSTOM: &str = "custom";

/// Names accepted by [`scenario_catalog`].
pub const SCENARIO_NAMES: [&str; 2] = [UPHILL_SEMIDEGENERATE, DUNCAN_TOOR_ASYMPTOTIC];

pub fn scenario_catalog(name: &str) -> Result<Scenario> {
    let (d12, d13, d23, profile) = match name {
        // D₁₂ = D₁₃ makes α vanish.
        UPHILL_SEMIDEGENERATE => (0.833, 0.833, 0.168, InitialProfile::Uphill),
        DUNCAN_TOOR_ASYMPTOTIC => (0.0833, 0.680, 0.168, InitialProfile::Step),
        _ => {
            return Err(Error::UnknownScenario {
                name: name.to_string(),
                valid: SCENARIO_NAMES.to_vec(),
            })
        }
    };
    Ok(Scenario {
        name: name.to_string(),
        spec: MixtureSpec::new(d12, d13, d23)?,
        profile,
        t_end: 1.0,
    })
}
