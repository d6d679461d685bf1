//! The run configuration: one JSON document, validated before any oracle
//! is built. Unknown keys are rejected everywhere.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    #[serde(default)]
    pub algorithm: AlgorithmName,
    #[serde(default)]
    pub rule: RuleSpec,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub policy: PolicyName,
    #[serde(default)]
    pub mode: ModeName,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default)]
    pub u0: Option<Vec<f64>>,
    #[serde(default)]
    pub v0: Option<Vec<f64>>,
    /// Store every iterate and fill the residual column.
    #[serde(default)]
    pub full_history: bool,
    /// Defaults to on in debug builds.
    #[serde(default)]
    pub check_fenchel_young: Option<bool>,
    /// Fill `t_ms` with wall-clock time (breaks byte-identical traces).
    #[serde(default)]
    pub timing: bool,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub probe: ProbeSpec,
    #[serde(default)]
    pub rate: RateSpec,
}

fn default_k_max() -> usize {
    100
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmName {
    #[default]
    Gcs,
    Gmd,
    Hybrid,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum PolicyName {
    #[default]
    #[serde(alias = "average")]
    Avg,
    Best,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    #[default]
    Plain,
    #[serde(alias = "sharpened")]
    Sharp,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum RuleName {
    #[default]
    FixedHarmonic,
    OpenLoop,
    ExactLs,
    ApproxGamma,
}

#[derive(Debug, Clone, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct RuleSpec {
    #[serde(default)]
    pub name: RuleName,
    /// Open-loop `γ`, or `γ_max` for the approximate-γ rule.
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub max_iters: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    /// `½xᵀQx + bᵀx` over the simplex, `A = I`. `q` defaults to `I`, `b` to `0`.
    QuadraticSimplex {
        n: usize,
        #[serde(default)]
        q: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        b: Option<Vec<f64>>,
    },
    /// A quadratic `f` on the codomain of `A`, composed with an indicator `h`.
    Quadratic {
        n: usize,
        set: SetSpec,
        objective: ObjectiveSpec,
        #[serde(default)]
        map: MapSpec,
    },
    /// Negative entropy on the simplex as `h`.
    Entropy {
        n: usize,
        objective: ObjectiveSpec,
        #[serde(default)]
        map: MapSpec,
    },
    /// `(1/p) Σ|x_i - c_i|^p` over a set, `A = I`.
    HolderPower {
        p: f64,
        n: usize,
        #[serde(default)]
        center: Option<Vec<f64>>,
        #[serde(default)]
        set: Option<SetSpec>,
    },
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    Simplex,
    Box { lower: Vec<f64>, upper: Vec<f64> },
    L1Ball { radius: f64 },
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveSpec {
    /// `½yᵀQy + bᵀy`.
    Quadratic { q: Vec<Vec<f64>>, b: Vec<f64> },
    /// `½‖y - c‖²`.
    SquaredDistance { c: Vec<f64> },
    /// `log Σ exp(y_i)` on `R^dim`.
    LogSumExp { dim: usize },
}

#[derive(Debug, Clone, Deserialize, PartialEq, Default)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    #[default]
    Identity,
    /// Row-major dense matrix.
    Dense { rows: Vec<Vec<f64>> },
    /// `rows x n` Gaussian matrix with `N(0, 1/rows)` entries drawn from the run seed.
    Random { rows: usize },
}

#[derive(Debug, Clone, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub trace: Option<String>,
    #[serde(default)]
    pub summary: Option<String>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    #[serde(default = "default_probe_gamma")]
    pub gamma: f64,
    #[serde(default = "default_probe_samples")]
    pub samples: usize,
    #[serde(default = "default_probe_grid")]
    pub grid_points: usize,
}

fn default_probe_gamma() -> f64 {
    2.0
}

fn default_probe_samples() -> usize {
    256
}

fn default_probe_grid() -> usize {
    64
}

impl Default for ProbeSpec {
    fn default() -> Self {
        ProbeSpec {
            gamma: default_probe_gamma(),
            samples: default_probe_samples(),
            grid_points: default_probe_grid(),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum ColumnName {
    #[default]
    GapBound,
    TrueGap,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RateSpec {
    #[serde(default = "default_k_min")]
    pub k_min: usize,
    #[serde(default)]
    pub column: ColumnName,
}

fn default_k_min() -> usize {
    10
}

impl Default for RateSpec {
    fn default() -> Self {
        RateSpec {
            k_min: default_k_min(),
            column: ColumnName::default(),
        }
    }
}

/// Command-line overrides applied on top of a loaded config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub k_max: Option<usize>,
    pub rule: Option<RuleName>,
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    pub tol: Option<f64>,
    pub policy: Option<PolicyName>,
    pub mode: Option<ModeName>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn apply(&mut self, o: &Overrides) -> CliResult<()> {
        if let Some(dir) = &o.out {
            self.output.dir = Some(dir.clone());
        }
        if let Some(k) = o.k_max {
            self.k_max = k;
        }
        if let Some(r) = o.rule {
            if r != self.rule.name {
                self.rule = RuleSpec {
                    name: r,
                    ..RuleSpec::default()
                };
            }
        }
        if o.gamma.is_some() {
            self.rule.gamma = o.gamma;
        }
        if o.delta.is_some() {
            self.rule.delta = o.delta;
        }
        if o.tol.is_some() {
            self.rule.tol = o.tol;
        }
        if let Some(p) = o.policy {
            self.policy = p;
        }
        if let Some(m) = o.mode {
            self.mode = m;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        self.validate()
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.k_max == 0 {
            return bad("k_max must be at least 1".into());
        }
        if let Some(eps) = self.epsilon {
            if eps.is_nan() || eps <= 0.0 {
                return bad(format!("epsilon must be positive, got {eps}"));
            }
        }
        for (name, v) in [("x0", &self.x0), ("u0", &self.u0), ("v0", &self.v0)] {
            if v.as_ref().is_some_and(|p| p.iter().any(|c| !c.is_finite())) {
                return bad(format!("{name} has a non-finite coordinate"));
            }
        }
        let r = &self.rule;
        let unused = |field: &str| bad(format!("rule {:?} takes no `{field}`", r.name));
        match r.name {
            RuleName::FixedHarmonic => {
                if r.gamma.is_some() {
                    return unused("gamma");
                }
                if r.delta.is_some() {
                    return unused("delta");
                }
                if r.tol.is_some() {
                    return unused("tol");
                }
            }
            RuleName::OpenLoop => {
                if r.delta.is_some() {
                    return unused("delta");
                }
                if r.tol.is_some() {
                    return unused("tol");
                }
            }
            RuleName::ExactLs => {
                if r.gamma.is_some() {
                    return unused("gamma");
                }
                if r.delta.is_some() {
                    return unused("delta");
                }
            }
            RuleName::ApproxGamma => {}
        }
        if self.probe.samples == 0 || self.probe.grid_points == 0 {
            return bad("probe needs at least one sample and one grid point".into());
        }
        Ok(())
    }

    pub fn rule_name(&self) -> &'static str {
        match self.rule.name {
            RuleName::FixedHarmonic => "fixed_harmonic",
            RuleName::OpenLoop => "open_loop",
            RuleName::ExactLs => "exact_ls",
            RuleName::ApproxGamma => "approx_gamma",
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.output
            .dir
            .clone()
            .unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn trace_path(&self) -> PathBuf {
        self.out_dir()
            .join(self.output.trace.as_deref().unwrap_or("trace.csv"))
    }

    pub fn summary_path(&self) -> PathBuf {
        self.out_dir()
            .join(self.output.summary.as_deref().unwrap_or("summary.json"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg =
            RunConfig::from_json(r#"{"problem": {"kind": "quadratic_simplex", "n": 2}}"#).unwrap();
        assert_eq!(cfg.algorithm, AlgorithmName::Gcs);
        assert_eq!(cfg.rule.name, RuleName::FixedHarmonic);
        assert_eq!(cfg.k_max, 100);
        assert_eq!(cfg.policy, PolicyName::Avg);
        assert_eq!(cfg.trace_path(), PathBuf::from("out/trace.csv"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for text in [
            r#"{"problem": {"kind": "quadratic_simplex", "n": 2}, "kmax": 3}"#,
            r#"{"problem": {"kind": "quadratic_simplex", "n": 2, "extra": 1}}"#,
            r#"{"problem": {"kind": "quadratic_simplex", "n": 2}, "rule": {"name": "exact_ls", "step": 1}}"#,
            r#"{"problem": {"kind": "entropy", "n": 2, "objective": {"type": "log_sum_exp", "dim": 2, "x": 0}}}"#,
        ] {
            assert!(
                matches!(RunConfig::from_json(text), Err(CliError::Config(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn nested_problem_descriptor() {
        let cfg = RunConfig::from_json(
            r#"{"problem": {"kind": "quadratic", "n": 3,
                 "set": {"type": "box", "lower": [0, 0, 0], "upper": [1, 1, 1]},
                 "objective": {"type": "squared_distance", "c": [1, 2, 3, 4, 5]},
                 "map": {"type": "random", "rows": 5}},
                "algorithm": "hybrid", "rule": {"name": "approx_gamma", "delta": 0.2}}"#,
        )
        .unwrap();
        assert_eq!(cfg.algorithm, AlgorithmName::Hybrid);
        assert_eq!(cfg.rule.delta, Some(0.2));
    }

    #[test]
    fn overrides_replace_rule_parameters() {
        let mut cfg = RunConfig::from_json(
            r#"{"problem": {"kind": "quadratic_simplex", "n": 2}, "rule": {"name": "open_loop", "gamma": 3}}"#,
        )
        .unwrap();
        cfg.apply(&Overrides {
            rule: Some(RuleName::ExactLs),
            tol: Some(1e-9),
            k_max: Some(7),
            ..Overrides::default()
        })
        .unwrap();
        assert_eq!(cfg.rule.name, RuleName::ExactLs);
        assert_eq!(cfg.rule.gamma, None);
        assert_eq!(cfg.rule.tol, Some(1e-9));
        assert_eq!(cfg.k_max, 7);
    }

    #[test]
    fn invalid_values_are_config_errors() {
        for text in [
            r#"{"problem": {"kind": "quadratic_simplex", "n": 2}, "k_max": 0}"#,
            r#"{"problem": {"kind": "quadratic_simplex", "n": 2}, "epsilon": -1}"#,
            r#"{"problem": {"kind": "quadratic_simplex", "n": 2}, "rule": {"name": "fixed_harmonic", "gamma": 2}}"#,
        ] {
            assert!(
                matches!(RunConfig::from_json(text), Err(CliError::Config(_))),
                "{text}"
            );
        }
    }
}
