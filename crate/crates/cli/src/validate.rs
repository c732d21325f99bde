//! Semantic checks on a parsed config: required fields per kind and size limits.

use cubelab::dynsys::SystemSpec;
use cubelab::expsum::MIN_OVERSAMPLE;
use cubelab::oracle::{MAX_WINDOW_2D, MAX_WINDOW_3D};

use crate::config::{field_err, ConfigError, ExperimentConfig, Kind};

pub const MAX_TRIALS: usize = 100_000;
pub const MAX_OVERSAMPLE: usize = 64;
pub const MAX_N_LEMMA1: usize = 4096;
pub const MAX_N_CONVERGE2: usize = 1 << 20;
pub const MAX_N_CONVERGE2_NAIVE: usize = 4096;
pub const MAX_N_CONVERGE3: usize = 2048;
pub const MAX_N_CONVERGE3_NAIVE: usize = 256;
pub const MAX_N_TWISTED: usize = 1 << 20;
pub const MAX_N_COR1: usize = 10_000_000;
pub const MAX_POINTS: usize = 64;
pub const MAX_N_SUPDECAY: usize = 1 << 22;
pub const MAX_DEGREE_CERTIFY: usize = 4096;
pub const MAX_DENSE_POINTS: usize = 1 << 24;
pub const MAX_N_EQ4: usize = 8192;
pub const MAX_START_ATTEMPTS: u64 = 10_000;

/// Number of observables each kind reads, in slot order.
pub fn observable_slots(kind: Kind) -> Option<usize> {
    match kind {
        Kind::Converge2 => Some(3),
        Kind::Converge3 => Some(7),
        Kind::Twisted => Some(2),
        Kind::Syndetic => Some(1),
        Kind::Supdecay => Some(1),
        Kind::Eq4decay => Some(2),
        Kind::Lemma1 | Kind::Cor1 | Kind::Khintchine => None,
    }
}

pub fn mode(config: &ExperimentConfig) -> &str {
    match (config.kind, config.mode.as_deref()) {
        (_, Some(m)) => m,
        (Kind::Supdecay, None) => "decay",
        (Kind::Converge2 | Kind::Converge3, None) if config.random.is_some() => "random",
        (_, None) => "fft",
    }
}

fn check_grid(config: &ExperimentConfig, max: usize) -> Result<(), ConfigError> {
    let grid = &config.grid;
    if grid.is_empty() {
        return Err(field_err("grid", "must list at least one N"));
    }
    if grid[0] == 0 {
        return Err(field_err("grid", "entries must be at least 1"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(field_err("grid", "must be strictly increasing"));
    }
    if let Some(&n) = grid.iter().find(|&&n| n > max) {
        return Err(field_err(
            "grid",
            format!(
                "N = {n} exceeds the limit {max} for kind `{}`",
                config.kind.name()
            ),
        ));
    }
    Ok(())
}

fn require_seeds(config: &ExperimentConfig) -> Result<(), ConfigError> {
    if config.seeds.is_empty() {
        return Err(field_err("seeds", "must list at least one seed"));
    }
    Ok(())
}

fn require_trials(config: &ExperimentConfig) -> Result<usize, ConfigError> {
    match config.trials {
        None => Err(field_err(
            "trials",
            format!("required for kind `{}`", config.kind.name()),
        )),
        Some(0) => Err(field_err("trials", "must be at least 1")),
        Some(t) if t > MAX_TRIALS => Err(field_err(
            "trials",
            format!("exceeds the limit {MAX_TRIALS}"),
        )),
        Some(t) => Ok(t),
    }
}

fn check_oversample(config: &ExperimentConfig) -> Result<(), ConfigError> {
    if let Some(o) = config.oversample {
        if !(MIN_OVERSAMPLE..=MAX_OVERSAMPLE).contains(&o) {
            return Err(field_err(
                "oversample",
                format!("must lie in {MIN_OVERSAMPLE}..={MAX_OVERSAMPLE}"),
            ));
        }
    }
    Ok(())
}

fn forbid(config: &ExperimentConfig, present: bool, name: &str) -> Result<(), ConfigError> {
    if present {
        return Err(field_err(
            name,
            format!("not used by kind `{}`", config.kind.name()),
        ));
    }
    Ok(())
}

/// Build every system (with run seed 0) and check each observable against its system.
fn check_dynamics(config: &ExperimentConfig, slots: usize) -> Result<Vec<SystemSpec>, ConfigError> {
    if config.system.is_empty() {
        return Err(field_err("system", "at least one [[system]] is required"));
    }
    if config.observable.len() != slots {
        return Err(field_err(
            "observable",
            format!(
                "kind `{}` needs exactly {slots} [[observable]] entries, found {}",
                config.kind.name(),
                config.observable.len()
            ),
        ));
    }
    let specs = config
        .system
        .iter()
        .enumerate()
        .map(|(i, s)| s.build(i, 0).map(|(spec, _)| spec))
        .collect::<Result<Vec<_>, _>>()?;
    for (i, obs) in config.observable.iter().enumerate() {
        let f = obs.build(i)?;
        let spec = specs.get(obs.system).ok_or_else(|| {
            field_err(
                format!("observable[{i}].system"),
                format!(
                    "no system with index {} ({} defined)",
                    obs.system,
                    specs.len()
                ),
            )
        })?;
        f.validate_for(spec)
            .map_err(|e| field_err(format!("observable[{i}]"), e.to_string()))?;
    }
    Ok(specs)
}

fn check_finite_source(config: &ExperimentConfig) -> Result<(), ConfigError> {
    match (&config.finite, &config.random) {
        (Some(_), Some(_)) => Err(field_err(
            "random",
            "give either [finite] or [random], not both",
        )),
        (None, None) => Err(field_err("finite", "give either [finite] or [random]")),
        (Some(fin), None) => {
            if fin.pi1.len() != fin.pi2.len() {
                return Err(field_err("finite.pi2", "must have the same size as pi1"));
            }
            if fin.pi1.is_empty() || fin.pi1.len() > MAX_POINTS {
                return Err(field_err(
                    "finite.pi1",
                    format!("size must lie in 1..={MAX_POINTS}"),
                ));
            }
            cubelab::oracle::Permutation::new(fin.pi1.clone())
                .map_err(|e| field_err("finite.pi1", e.to_string()))?;
            cubelab::oracle::Permutation::new(fin.pi2.clone())
                .map_err(|e| field_err("finite.pi2", e.to_string()))?;
            cubelab::oracle::PointSet::new(fin.pi1.len(), &fin.set)
                .map_err(|e| field_err("finite.set", e.to_string()))?;
            Ok(())
        }
        (None, Some(r)) => {
            require_seeds(config)?;
            if r.count == 0 || r.count > MAX_TRIALS {
                return Err(field_err(
                    "random.count",
                    format!("must lie in 1..={MAX_TRIALS}"),
                ));
            }
            match r.max_points {
                Some(k) if (1..=MAX_POINTS).contains(&k) => {}
                _ => {
                    return Err(field_err(
                        "random.max_points",
                        format!("required, in 1..={MAX_POINTS}"),
                    ))
                }
            }
            match r.first.as_deref() {
                None | Some("any") | Some("cycle") => Ok(()),
                Some(other) => Err(field_err(
                    "random.first",
                    format!("unknown value `{other}` (expected any or cycle)"),
                )),
            }
        }
    }
}

pub fn validate(config: &ExperimentConfig) -> Result<(), ConfigError> {
    check_oversample(config)?;
    let mode = mode(config).to_string();
    match config.kind {
        Kind::Lemma1 => {
            check_grid(config, MAX_N_LEMMA1)?;
            require_seeds(config)?;
            require_trials(config)?;
        }
        Kind::Converge2 | Kind::Converge3 => {
            let (fft_max, naive_max) = if config.kind == Kind::Converge2 {
                (MAX_N_CONVERGE2, MAX_N_CONVERGE2_NAIVE)
            } else {
                (MAX_N_CONVERGE3, MAX_N_CONVERGE3_NAIVE)
            };
            require_seeds(config)?;
            match mode.as_str() {
                "random" => {
                    check_grid(config, naive_max)?;
                    require_trials(config)?;
                    forbid(config, !config.system.is_empty(), "system")?;
                    forbid(config, !config.observable.is_empty(), "observable")?;
                }
                "fft" | "naive" => {
                    check_grid(config, if mode == "fft" { fft_max } else { naive_max })?;
                    check_dynamics(config, observable_slots(config.kind).unwrap_or(0))?;
                }
                other => {
                    return Err(field_err(
                        "mode",
                        format!("unknown mode `{other}` (expected fft, naive or random)"),
                    ))
                }
            }
        }
        Kind::Twisted => {
            check_grid(config, MAX_N_TWISTED)?;
            require_seeds(config)?;
            match &config.phases {
                Some(p) if !p.is_empty() && p.iter().all(|t| t.is_finite()) => {}
                _ => return Err(field_err("phases", "must list at least one finite phase t")),
            }
            check_dynamics(config, 2)?;
        }
        Kind::Cor1 => {
            check_grid(config, MAX_N_COR1)?;
            check_finite_source(config)?;
        }
        Kind::Khintchine => {
            check_finite_source(config)?;
        }
        Kind::Syndetic => {
            require_seeds(config)?;
            let k = config.system.len();
            let limit = match k {
                2 => MAX_WINDOW_2D,
                3 => MAX_WINDOW_3D,
                _ => {
                    return Err(field_err(
                        "system",
                        format!("syndetic needs 2 or 3 systems, found {k}"),
                    ))
                }
            };
            match config.window {
                Some(w) if (1..=limit).contains(&w) => {}
                _ => {
                    return Err(field_err(
                        "window",
                        format!("required, in 1..={limit} for k = {k}"),
                    ))
                }
            }
            match config.lambda {
                Some(l) if (0.0..1.0).contains(&l) => {}
                _ => return Err(field_err("lambda", "required, in [0, 1)")),
            }
            let specs = check_dynamics(config, 1)?;
            let a = config.observable[0].build(0)?;
            if !a.is_indicator() {
                return Err(field_err(
                    "observable[0].type",
                    "syndetic needs an indicator (symbol or cylinder)",
                ));
            }
            for (i, spec) in specs.iter().enumerate() {
                a.validate_for(spec)
                    .map_err(|e| field_err(format!("system[{i}]"), e.to_string()))?;
            }
        }
        Kind::Supdecay => match mode.as_str() {
            "decay" => {
                check_grid(config, MAX_N_SUPDECAY)?;
                require_seeds(config)?;
                check_dynamics(config, 1)?;
            }
            "certify" => {
                require_seeds(config)?;
                let r = config
                    .random
                    .as_ref()
                    .ok_or_else(|| field_err("random", "required for mode `certify`"))?;
                if r.count == 0 || r.count > MAX_TRIALS {
                    return Err(field_err(
                        "random.count",
                        format!("must lie in 1..={MAX_TRIALS}"),
                    ));
                }
                match r.max_degree {
                    Some(d) if (1..=MAX_DEGREE_CERTIFY).contains(&d) => {}
                    _ => {
                        return Err(field_err(
                            "random.max_degree",
                            format!("required, in 1..={MAX_DEGREE_CERTIFY}"),
                        ))
                    }
                }
                match r.dense_points {
                    Some(m) if (1..=MAX_DENSE_POINTS).contains(&m) => {}
                    _ => {
                        return Err(field_err(
                            "random.dense_points",
                            format!("required, in 1..={MAX_DENSE_POINTS}"),
                        ))
                    }
                }
            }
            other => {
                return Err(field_err(
                    "mode",
                    format!("unknown mode `{other}` (expected decay or certify)"),
                ))
            }
        },
        Kind::Eq4decay => {
            check_grid(config, MAX_N_EQ4)?;
            require_seeds(config)?;
            check_dynamics(config, 2)?;
        }
    }
    Ok(())
}
