//! Turns a validated [`ProblemSpec`] into library oracles and start points.

use std::sync::Arc;

use fenchel_duo::library::{
    make_entropy_lse, make_holder_power_set, make_quadratic_set, random_gaussian_map, HolderPowerF,
    LogSumExpF, QuadraticF, SetKind,
};
use fenchel_duo::oracle::Objective;
use fenchel_duo::{LinearMap, Point, Problem};

use crate::config::{MapSpec, ObjectiveSpec, ProblemSpec, RunConfig, SetSpec};
use crate::error::{CliError, CliResult};

/// Start points for the three methods.
#[derive(Debug, Clone, PartialEq)]
pub struct Starts {
    pub x0: Point,
    pub u0: Point,
    pub v0: Point,
}

fn set_kind(set: &SetSpec, n: usize) -> CliResult<SetKind<f64>> {
    let need = |what: &str, len: usize| {
        if len == n {
            Ok(())
        } else {
            Err(CliError::Config(format!(
                "{what} has length {len}, expected {n}"
            )))
        }
    };
    Ok(match set {
        SetSpec::Simplex => SetKind::Simplex(n),
        SetSpec::Box { lower, upper } => {
            need("box lower", lower.len())?;
            need("box upper", upper.len())?;
            SetKind::Box {
                lower: lower.clone(),
                upper: upper.clone(),
            }
        }
        SetSpec::L1Ball { radius } => SetKind::L1Ball { n, radius: *radius },
    })
}

fn linear_map(map: &MapSpec, n: usize, seed: u64) -> CliResult<LinearMap> {
    match map {
        MapSpec::Identity => Ok(LinearMap::identity(n)),
        MapSpec::Dense { rows } => {
            let a = LinearMap::from_rows(rows).map_err(CliError::building)?;
            if a.domain_dim() != n {
                return Err(CliError::Config(format!(
                    "map has {} columns, expected {n}",
                    a.domain_dim()
                )));
            }
            Ok(a)
        }
        MapSpec::Random { rows } => random_gaussian_map(*rows, n, seed).map_err(CliError::building),
    }
}

fn objective(spec: &ObjectiveSpec) -> CliResult<Arc<dyn Objective<f64>>> {
    Ok(match spec {
        ObjectiveSpec::Quadratic { q, b } => {
            Arc::new(QuadraticF::new(q, b.clone()).map_err(CliError::building)?)
        }
        ObjectiveSpec::SquaredDistance { c } => {
            if c.is_empty() {
                return Err(CliError::Config(
                    "squared_distance needs a non-empty c".into(),
                ));
            }
            Arc::new(QuadraticF::squared_distance(c.clone()))
        }
        ObjectiveSpec::LogSumExp { dim } => {
            Arc::new(LogSumExpF::new(*dim).map_err(CliError::building)?)
        }
    })
}

fn identity_q(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// Builds the problem; `seed` drives any random matrix.
pub fn build_problem(spec: &ProblemSpec, seed: u64) -> CliResult<Problem> {
    let p = match spec {
        ProblemSpec::QuadraticSimplex { n, q, b } => {
            let q = q.clone().unwrap_or_else(|| identity_q(*n));
            let b = b.clone().unwrap_or_else(|| vec![0.0; *n]);
            let f = QuadraticF::new(&q, b).map_err(CliError::building)?;
            make_quadratic_set(f, SetKind::Simplex(*n), LinearMap::identity(*n))
        }
        ProblemSpec::Quadratic {
            n,
            set,
            objective: obj,
            map,
        } => {
            let f = match obj {
                ObjectiveSpec::Quadratic { q, b } => QuadraticF::new(q, b.clone()),
                ObjectiveSpec::SquaredDistance { c } => Ok(QuadraticF::squared_distance(c.clone())),
                ObjectiveSpec::LogSumExp { .. } => {
                    return Err(CliError::Config(
                        "quadratic problems need a quadratic or squared_distance objective".into(),
                    ))
                }
            }
            .map_err(CliError::building)?;
            make_quadratic_set(f, set_kind(set, *n)?, linear_map(map, *n, seed)?)
        }
        ProblemSpec::Entropy {
            n,
            objective: obj,
            map,
        } => make_entropy_lse(*n, linear_map(map, *n, seed)?, objective(obj)?),
        ProblemSpec::HolderPower { p, n, center, set } => {
            let f = match center {
                Some(c) if c.len() != *n => {
                    return Err(CliError::Config(format!(
                        "center has length {}, expected {n}",
                        c.len()
                    )))
                }
                Some(c) => HolderPowerF::centered(*p, c.clone()),
                None => HolderPowerF::new(*p, *n),
            }
            .map_err(CliError::building)?;
            let set = set_kind(set.as_ref().unwrap_or(&SetSpec::Simplex), *n)?;
            make_holder_power_set(f, set)
        }
    };
    p.map_err(CliError::building)
}

/// Configured start points, defaulting to `x0 = ∂h*(0)`, `u0 = ∂f(A x0)`
/// and `v0 = 0`.
pub fn starts(cfg: &RunConfig, problem: &Problem) -> CliResult<Starts> {
    let check = |name: &str, p: &Point, dim: usize| {
        if p.len() == dim {
            Ok(())
        } else {
            Err(CliError::Config(format!(
                "{name} has length {}, expected {dim}",
                p.len()
            )))
        }
    };
    let x0 = match &cfg.x0 {
        Some(x) => {
            check("x0", x, problem.n())?;
            x.clone()
        }
        None => problem
            .h_conjugate_gradient(&vec![0.0; problem.n()])
            .map_err(CliError::building)?,
    };
    let u0 = match &cfg.u0 {
        Some(u) => {
            check("u0", u, problem.m())?;
            u.clone()
        }
        None => problem
            .f_gradient(&problem.map().apply(&x0))
            .map_err(CliError::building)?,
    };
    let v0 = match &cfg.v0 {
        Some(v) => {
            check("v0", v, problem.m())?;
            v.clone()
        }
        None => vec![0.0; problem.m()],
    };
    Ok(Starts { x0, u0, v0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> RunConfig {
        RunConfig::from_json(text).unwrap()
    }

    #[test]
    fn quadratic_simplex_defaults() {
        let c = cfg(r#"{"problem": {"kind": "quadratic_simplex", "n": 2}}"#);
        let p = build_problem(&c.problem, c.seed).unwrap();
        let s = starts(&c, &p).unwrap();
        assert_eq!(s.x0, vec![1.0, 0.0]);
        assert_eq!(s.u0, vec![1.0, 0.0]);
        assert_eq!(s.v0, vec![0.0, 0.0]);
        assert_eq!(p.primal_value(&[0.5, 0.5]).unwrap().finite(), Some(0.25));
    }

    #[test]
    fn random_map_follows_seed() {
        let text = |seed: u64| {
            format!(
                r#"{{"seed": {seed}, "problem": {{"kind": "quadratic", "n": 3, "set": {{"type": "simplex"}},
                "objective": {{"type": "squared_distance", "c": [0, 0, 0, 0]}}, "map": {{"type": "random", "rows": 4}}}}}}"#
            )
        };
        let rows = |seed| {
            let c = cfg(&text(seed));
            build_problem(&c.problem, c.seed).unwrap().map().to_rows()
        };
        assert_eq!(rows(3), rows(3));
        assert_ne!(rows(3), rows(4));
        assert_eq!(rows(3).len(), 4);
    }

    #[test]
    fn entropy_start_is_uniform() {
        let c = cfg(
            r#"{"problem": {"kind": "entropy", "n": 4, "objective": {"type": "log_sum_exp", "dim": 4}}}"#,
        );
        let p = build_problem(&c.problem, 0).unwrap();
        assert_eq!(starts(&c, &p).unwrap().x0, vec![0.25; 4]);
    }

    #[test]
    fn mismatched_shapes_are_config_errors() {
        for text in [
            r#"{"problem": {"kind": "quadratic_simplex", "n": 2, "b": [1, 2, 3]}}"#,
            r#"{"problem": {"kind": "holder_power", "p": 1.5, "n": 2, "center": [0.5]}}"#,
            r#"{"problem": {"kind": "holder_power", "p": 2.5, "n": 2}}"#,
            r#"{"problem": {"kind": "entropy", "n": 2, "objective": {"type": "log_sum_exp", "dim": 3}}}"#,
            r#"{"problem": {"kind": "quadratic", "n": 2, "set": {"type": "box", "lower": [0], "upper": [1]},
                "objective": {"type": "squared_distance", "c": [0, 0]}}}"#,
        ] {
            let c = cfg(text);
            assert!(
                matches!(build_problem(&c.problem, 0), Err(CliError::Config(_))),
                "{text}"
            );
        }
        let c = cfg(r#"{"problem": {"kind": "quadratic_simplex", "n": 2}, "x0": [1, 0, 0]}"#);
        let p = build_problem(&c.problem, 0).unwrap();
        assert!(matches!(starts(&c, &p), Err(CliError::Config(_))));
    }
}
