//! Experiment configuration: one JSON document, every field optional, with
//! command-line overrides applied on top.

use std::path::{Path, PathBuf};

use kirchhoff_core::{IntegratorConfig, Scheme};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{ExperimentError, Result};

/// Which dynamical system `simulate` integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    /// The Kirchhoff system on the real state `(u, ∂_t u)`.
    #[default]
    Original,
    /// The diagonalized system on `(η, η̄)`.
    Syst6dic,
    /// The normal-form field on `(w, w̄)`.
    Xplus,
}

impl Representation {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "original" => Some(Self::Original),
            "syst6dic" => Some(Self::Syst6dic),
            "xplus" => Some(Self::Xplus),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Original => "original",
            Self::Syst6dic => "syst6dic",
            Self::Xplus => "xplus",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SchemeName {
    Rk4,
    #[default]
    Rk45,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSettings {
    pub scheme: SchemeName,
    pub dt: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub t_end: f64,
    /// Time between trajectory samples.
    pub sample_interval: f64,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self { scheme: SchemeName::Rk45, dt: 1e-2, rel_tol: 1e-12, abs_tol: 1e-14, t_end: 10.0, sample_interval: 0.1 }
    }
}

impl IntegratorSettings {
    pub fn to_core(&self) -> IntegratorConfig {
        IntegratorConfig {
            scheme: match self.scheme {
                SchemeName::Rk4 => Scheme::Rk4,
                SchemeName::Rk45 => Scheme::Rk45Adaptive,
            },
            dt: self.dt,
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            t_end: self.t_end,
            sample_interval: Some(self.sample_interval),
            keep_states: false,
            ..IntegratorConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySettings {
    /// `[d, N]` grids the identity suites run on.
    pub grids: Vec<[i64; 2]>,
    /// Samples per grid for identity and round-trip suites.
    pub samples: usize,
    /// Samples per grid for the norm inequalities.
    pub inequality_samples: usize,
    /// Samples per grid for the two evaluations of the normal-form field.
    pub xplus_samples: usize,
    /// Lattice radius of the exhaustive small-divisor check.
    pub small_divisor_radius: i64,
    /// Flip the sign of the non-resonant coefficient table (negative control).
    pub corrupt_a12_sign: bool,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            grids: vec![[1, 4], [1, 8], [2, 4], [2, 8]],
            samples: 200,
            inequality_samples: 1000,
            xplus_samples: 100,
            small_divisor_radius: 50,
            corrupt_a12_sign: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSettings {
    pub representation: Representation,
    /// JSON file holding the initial `w` as a serialized field; overrides seed and `eps`.
    pub initial: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConjugacySettings {
    pub t_end: f64,
    pub sample_interval: f64,
    /// Relative tolerance of the reference run whose defect must pass the threshold.
    pub rel_tol: f64,
    /// Looser tolerance of the refinement ladder; each further level halves it.
    pub ladder_rel_tol: f64,
    pub ladder_levels: usize,
    pub threshold: f64,
}

impl Default for ConjugacySettings {
    fn default() -> Self {
        Self { t_end: 5.0, sample_interval: 0.25, rel_tol: 1e-12, ladder_rel_tol: 1e-8, ladder_levels: 3, threshold: 1e-7 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergySettings {
    pub eps_list: Vec<f64>,
    pub t_end: f64,
    pub sample_interval: f64,
    /// Allowed relative deviation of each per-size constant from their mean.
    pub stability: f64,
}

impl Default for EnergySettings {
    fn default() -> Self {
        Self { eps_list: vec![0.05, 0.1, 0.2], t_end: 20.0, sample_interval: 0.02, stability: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSettings {
    pub eps_list: Vec<f64>,
    /// Operational constant in `T = c1_op / ε⁴`.
    pub c1_op: f64,
    /// Ball radius used when pushing `w(t)` back to the physical variables.
    pub delta0: f64,
    /// Allowed norm growth factor `‖w(t)‖ ≤ growth ‖w(0)‖`.
    pub growth: f64,
    /// Simulated-time cap per row.
    pub t_cap: Option<f64>,
    /// Wall-clock cap per row, checked between integration chunks.
    pub wall_cap_seconds: Option<f64>,
    pub chunk: f64,
    pub sample_interval: f64,
    /// Offsets added to `m₀` for the monitored norms.
    pub s_offsets: Vec<f64>,
    pub seeds_per_eps: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            eps_list: vec![0.2, 0.14, 0.1, 0.07, 0.05],
            c1_op: 0.1,
            delta0: 0.5,
            growth: 2.0,
            t_cap: None,
            wall_cap_seconds: None,
            chunk: 500.0,
            sample_interval: 0.5,
            s_offsets: vec![0.0, 1.0, 2.0],
            seeds_per_eps: 1,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub d: usize,
    pub n_modes: i64,
    pub seed: u64,
    /// Initial size `‖w₀‖_{m₀}`.
    pub eps: f64,
    /// Sobolev indices of monitored norms; empty means `m₀, m₀+1, m₀+2`.
    pub s_values: Vec<f64>,
    /// Operational radius of the composed change of variables.
    pub delta0: f64,
    pub out: PathBuf,
    pub integrator: IntegratorSettings,
    pub verify: VerifySettings,
    pub simulate: SimulateSettings,
    pub conjugacy: ConjugacySettings,
    pub energy: EnergySettings,
    pub sweep: SweepSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            d: 1,
            n_modes: 8,
            seed: 3,
            eps: 0.05,
            s_values: Vec::new(),
            delta0: 0.1,
            out: PathBuf::from("out"),
            integrator: IntegratorSettings::default(),
            verify: VerifySettings::default(),
            simulate: SimulateSettings::default(),
            conjugacy: ConjugacySettings::default(),
            energy: EnergySettings::default(),
            sweep: SweepSettings::default(),
        }
    }
}

/// Command-line values that take precedence over the JSON document.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub d: Option<usize>,
    pub n_modes: Option<i64>,
    pub eps: Option<f64>,
    pub t_end: Option<f64>,
    pub representation: Option<Representation>,
    pub corrupt_a12_sign: bool,
}

fn positive(path: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(ExperimentError::config(path, format!("must be positive and finite, got {x}")))
    }
}

fn non_negative(path: &str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(ExperimentError::config(path, format!("must be non-negative and finite, got {x}")))
    }
}

fn grid_ok(path: &str, d: i64, n: i64) -> Result<()> {
    if !(1..=3).contains(&d) {
        return Err(ExperimentError::config(path, format!("dimension must be 1, 2 or 3, got {d}")));
    }
    if n < 1 {
        return Err(ExperimentError::config(path, format!("cutoff must be at least 1, got {n}")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            let path = format!("line {} column {}", e.line(), e.column());
            ExperimentError::config(path, e.to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ExperimentError::config(path.display().to_string(), e.to_string()))?;
        Self::from_json_str(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = &o.out {
            self.out = v.clone();
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.d {
            self.d = v;
        }
        if let Some(v) = o.n_modes {
            self.n_modes = v;
        }
        if let Some(v) = o.eps {
            self.eps = v;
        }
        if let Some(v) = o.t_end {
            self.integrator.t_end = v;
            self.conjugacy.t_end = v;
            self.energy.t_end = v;
            self.sweep.t_cap = Some(v);
        }
        if let Some(v) = o.representation {
            self.simulate.representation = v;
        }
        if o.corrupt_a12_sign {
            self.verify.corrupt_a12_sign = true;
        }
    }

    /// Checks every field; the error names the offending path.
    pub fn validate(&self) -> Result<()> {
        grid_ok("d / n_modes", self.d as i64, self.n_modes)?;
        non_negative("eps", self.eps)?;
        positive("delta0", self.delta0)?;
        for (i, s) in self.s_values.iter().enumerate() {
            non_negative(&format!("s_values[{i}]"), *s)?;
        }
        let it = &self.integrator;
        positive("integrator.dt", it.dt)?;
        positive("integrator.rel_tol", it.rel_tol)?;
        positive("integrator.abs_tol", it.abs_tol)?;
        non_negative("integrator.t_end", it.t_end)?;
        positive("integrator.sample_interval", it.sample_interval)?;
        for (i, g) in self.verify.grids.iter().enumerate() {
            grid_ok(&format!("verify.grids[{i}]"), g[0], g[1])?;
        }
        if self.verify.small_divisor_radius < 0 {
            return Err(ExperimentError::config("verify.small_divisor_radius", "must be non-negative"));
        }
        let c = &self.conjugacy;
        non_negative("conjugacy.t_end", c.t_end)?;
        positive("conjugacy.sample_interval", c.sample_interval)?;
        positive("conjugacy.rel_tol", c.rel_tol)?;
        positive("conjugacy.ladder_rel_tol", c.ladder_rel_tol)?;
        positive("conjugacy.threshold", c.threshold)?;
        let e = &self.energy;
        non_negative("energy.t_end", e.t_end)?;
        positive("energy.sample_interval", e.sample_interval)?;
        positive("energy.stability", e.stability)?;
        for (i, x) in e.eps_list.iter().enumerate() {
            positive(&format!("energy.eps_list[{i}]"), *x)?;
        }
        let s = &self.sweep;
        for (i, x) in s.eps_list.iter().enumerate() {
            positive(&format!("sweep.eps_list[{i}]"), *x)?;
        }
        positive("sweep.c1_op", s.c1_op)?;
        positive("sweep.delta0", s.delta0)?;
        positive("sweep.growth", s.growth)?;
        positive("sweep.chunk", s.chunk)?;
        positive("sweep.sample_interval", s.sample_interval)?;
        positive("sweep.rel_tol", s.rel_tol)?;
        positive("sweep.abs_tol", s.abs_tol)?;
        if let Some(t) = s.t_cap {
            non_negative("sweep.t_cap", t)?;
        }
        if let Some(t) = s.wall_cap_seconds {
            positive("sweep.wall_cap_seconds", t)?;
        }
        for (i, x) in s.s_offsets.iter().enumerate() {
            non_negative(&format!("sweep.s_offsets[{i}]"), *x)?;
        }
        if s.seeds_per_eps == 0 {
            return Err(ExperimentError::config("sweep.seeds_per_eps", "must be at least 1"));
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn m0(&self) -> f64 {
        if self.d == 1 {
            1.0
        } else {
            1.5
        }
    }

    pub fn s_values(&self) -> Vec<f64> {
        if self.s_values.is_empty() {
            let m0 = self.m0();
            vec![m0, m0 + 1.0, m0 + 2.0]
        } else {
            self.s_values.clone()
        }
    }
}
