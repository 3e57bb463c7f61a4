use std::path::{Path, PathBuf};

use cone_minkowski::{ConeGeometry, RadialProfile, Resolution, SphericalDomain};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Cone section as written in a config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ConeSpec {
    Cap {
        alpha: f64,
    },
    PerturbedCap {
        alpha: f64,
        delta: f64,
        k: u32,
    },
    /// Planar wedge of total opening `angle`.
    Wedge {
        angle: f64,
    },
}

impl ConeSpec {
    pub fn domain(&self) -> Result<SphericalDomain, CliError> {
        let d = match *self {
            ConeSpec::Cap { alpha } => SphericalDomain::cap(alpha),
            ConeSpec::PerturbedCap { alpha, delta, k } => SphericalDomain::perturbed_cap(alpha, delta, k),
            ConeSpec::Wedge { angle } => SphericalDomain::wedge(angle),
        };
        d.map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn dim(&self) -> usize {
        match self {
            ConeSpec::Wedge { .. } => 2,
            _ => 3,
        }
    }
}

/// Radial profile as written in a config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    Constant {
        #[serde(rename = "R")]
        r: f64,
    },
    Axisym {
        #[serde(rename = "R")]
        r: f64,
        eps: f64,
    },
    Bump {
        #[serde(rename = "R")]
        r: f64,
        eps: f64,
        k: u32,
    },
    LinearViolation {
        #[serde(rename = "R")]
        r: f64,
        eps: f64,
    },
}

impl ProfileSpec {
    pub fn profile(&self) -> RadialProfile {
        match *self {
            ProfileSpec::Constant { r } => RadialProfile::constant(r),
            ProfileSpec::Axisym { r, eps } => RadialProfile::axisym(r, eps),
            ProfileSpec::Bump { r, eps, k } => RadialProfile::bump(r, eps, k),
            ProfileSpec::LinearViolation { r, eps } => RadialProfile::linear_violation(r, eps),
        }
    }
}

/// Identity suites run by `verify`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Divergence,
    Mink1,
    /// First formula without the boundary allowance: fails on surfaces that
    /// do not meet the cone orthogonally.
    Mink1Strict,
    Mink2,
    Pointwise,
    Flow,
    Rigidity,
}

impl Suite {
    pub const DEFAULT: [Suite; 6] =
        [Suite::Divergence, Suite::Mink1, Suite::Mink2, Suite::Pointwise, Suite::Flow, Suite::Rigidity];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub divergence: f64,
    pub mink1: f64,
    /// Agreement of a non-orthogonal first-formula residual with its
    /// boundary term.
    pub mink1_boundary: f64,
    pub mink2: f64,
    pub mink2_order: f64,
    pub boundary_forms: f64,
    pub pointwise: f64,
    pub flow_slope_relative: f64,
    pub flow_claim_relative: f64,
    /// Absolute bound used when the reference slope or claim is this small.
    pub flow_absolute: f64,
    pub chain: f64,
    pub sign_condition: f64,
    /// Umbilicity and mean-curvature defects of spherical sectors.
    pub sector_defect: f64,
    /// Stability terms of spherical sectors, which vanish exactly.
    pub sector_stability: f64,
    pub orthogonality: f64,
    pub reilly: f64,
    pub frame_energy: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            divergence: 1e-7,
            mink1: 1e-8,
            mink1_boundary: 1e-7,
            mink2: 1e-6,
            mink2_order: 4.0,
            boundary_forms: 1e-9,
            pointwise: 1e-7,
            flow_slope_relative: 1e-3,
            flow_claim_relative: 1e-4,
            flow_absolute: 1e-8,
            chain: 1e-12,
            sign_condition: 1e-10,
            sector_defect: 1e-10,
            sector_stability: 1e-9,
            orthogonality: 1e-8,
            reilly: 1e-12,
            frame_energy: 1e-7,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepGrid {
    pub eps: Vec<f64>,
    pub alpha: Vec<f64>,
    pub delta: Vec<f64>,
    /// Frequency used when a plain cap is swept in `delta`.
    pub k: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub cone: ConeSpec,
    pub profile: ProfileSpec,
    /// Ambient dimension; must agree with the cone when given.
    pub dimension: Option<usize>,
    pub n_phi: usize,
    pub n_s: usize,
    pub n_b: usize,
    /// Number of quadrature levels; the finest uses `n_phi, n_s, n_b`.
    pub levels: u32,
    /// Ring counts of the polar-fan meshes.
    pub mesh_levels: Vec<usize>,
    pub suites: Vec<Suite>,
    pub thresholds: Thresholds,
    pub seed: u64,
    pub sample_nodes: usize,
    pub t_step: f64,
    pub sweep: SweepGrid,
    pub plots: bool,
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let Resolution { n_phi, n_s, n_b } = Resolution::DEFAULT;
        ExperimentConfig {
            cone: ConeSpec::Cap { alpha: 1.2 },
            profile: ProfileSpec::Axisym { r: 1.0, eps: 0.1 },
            dimension: None,
            n_phi,
            n_s,
            n_b,
            levels: 3,
            mesh_levels: vec![8, 16, 32],
            suites: Suite::DEFAULT.to_vec(),
            thresholds: Thresholds::default(),
            seed: 0,
            sample_nodes: 200,
            t_step: 1e-3,
            sweep: SweepGrid::default(),
            plots: true,
            out_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        self.cone.domain()?;
        if self.profile.profile().radius.is_nan() || self.profile.profile().radius <= 0.0 {
            return bad("profile radius R must be positive".into());
        }
        if let Some(n) = self.dimension {
            if n != self.cone.dim() {
                return bad(format!("dimension {n} does not match the cone (N = {})", self.cone.dim()));
            }
        }
        if self.n_s == 0 || (self.cone.dim() == 3 && (self.n_phi == 0 || self.n_b == 0)) {
            return bad("quadrature resolutions must be positive".into());
        }
        if self.levels == 0 {
            return bad("levels must be at least 1".into());
        }
        if self.mesh_levels.contains(&0) {
            return bad("mesh levels must be positive ring counts".into());
        }
        if self.t_step.is_nan() || self.t_step <= 0.0 {
            return bad(format!("t_step must be positive, got {}", self.t_step));
        }
        Ok(())
    }

    pub fn resolution(&self) -> Resolution {
        Resolution::new(self.n_phi, self.n_s, self.n_b)
    }

    /// Resolutions from coarsest to finest; each level doubles every count.
    pub fn level_resolutions(&self) -> Vec<Resolution> {
        let top = self.levels - 1;
        (0..self.levels)
            .map(|l| {
                let d = 1usize << (top - l);
                Resolution::new((self.n_phi / d).max(1), (self.n_s / d).max(1), (self.n_b / d).max(1))
            })
            .collect()
    }

    pub fn cone_geometry(&self) -> Result<ConeGeometry, CliError> {
        Ok(ConeGeometry::new(self.cone.domain()?)?)
    }

    pub fn radial_profile(&self) -> RadialProfile {
        self.profile.profile()
    }

    pub fn has_suite(&self, s: Suite) -> bool {
        self.suites.contains(&s)
    }
}
