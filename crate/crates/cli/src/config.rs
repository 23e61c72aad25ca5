//! Flat `key = value` configuration: file parsing, flag overlay, and
//! resolution into a validated [`ExperimentConfig`].

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use kho_core::{GaussianSpec, KhoParams, KickSign};
use serde::Serialize;

use crate::error::CliError;

/// Every key accepted in a config file or as a flag (`--grid-points` is `grid_points`).
pub const KEYS: &[&str] = &[
    "K",
    "alpha",
    "phi",
    "hbar",
    "kick_sign",
    "n",
    "q0",
    "p0",
    "squeeze",
    "tilt",
    "grid_points",
    "q_max",
    "seed",
    "iterations",
    "eps",
    "max_points",
    "axis_sigmas",
    "samples",
    "bins",
    "post_map",
    "format",
    "out",
    "lambda",
    "f",
    "hbar_target",
    "nu",
    "transmission",
    "floor",
];

/// Raw, unresolved settings: key → list of textual values.
pub type RawConfig = BTreeMap<String, Vec<String>>;

fn canonical_key(k: &str) -> Result<String, CliError> {
    let k = k.trim().replace('-', "_");
    let known = KEYS.iter().find(|c| c.eq_ignore_ascii_case(&k));
    match known {
        Some(c) => Ok((*c).to_string()),
        None => Err(CliError::Config(format!("unknown key `{k}`"))),
    }
}

/// Parse `key = value` lines; `#` starts a comment, blank lines are ignored.
/// A repeated key appends to its list.
pub fn parse_config_text(text: &str) -> Result<RawConfig, CliError> {
    let mut out = RawConfig::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
        let v = v.trim();
        if v.is_empty() {
            return Err(CliError::Config(format!("line {}: empty value", lineno + 1)));
        }
        out.entry(canonical_key(k)?).or_default().push(v.to_string());
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> Result<RawConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_text(&text)
}

/// Keys present in `flags` replace the file's values wholesale.
pub fn overlay(mut file: RawConfig, flags: RawConfig) -> RawConfig {
    for (k, v) in flags {
        file.insert(k, v);
    }
    file
}

/// Angles: raw radians or rational multiples of π, e.g. `pi/3`, `2pi/3`,
/// `2*pi/3`, `-pi/2`, `1.45pi`. `π` is accepted for `pi`.
pub fn parse_angle(s: &str) -> Result<f64, CliError> {
    let bad = || CliError::Config(format!("cannot parse angle `{s}`"));
    let t: String = s.trim().to_ascii_lowercase().replace('π', "pi").split_whitespace().collect();
    let Some(at) = t.find("pi") else {
        return parse_real(&t).map_err(|_| bad());
    };
    let (head, tail) = (&t[..at], &t[at + 2..]);
    let (sign, head) = match head.strip_prefix('-') {
        Some(h) => (-1.0, h),
        None => (1.0, head.strip_prefix('+').unwrap_or(head)),
    };
    let head = head.strip_suffix('*').unwrap_or(head);
    let coef = if head.is_empty() { 1.0 } else { head.parse::<f64>().map_err(|_| bad())? };
    let value = if tail.is_empty() {
        coef * PI
    } else {
        let den = tail.strip_prefix('/').ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?;
        if den == 0.0 {
            return Err(bad());
        }
        coef * PI / den
    };
    if value.is_finite() {
        Ok(sign * value)
    } else {
        Err(bad())
    }
}

fn parse_real(s: &str) -> Result<f64, CliError> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::Config(format!("cannot parse number `{s}`"))),
    }
}

fn parse_int<T: std::str::FromStr>(key: &str, s: &str) -> Result<T, CliError> {
    s.trim()
        .parse()
        .map_err(|_| CliError::Config(format!("`{key}`: cannot parse integer `{s}`")))
}

/// Which experiment to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Evolve,
    Wigner,
    Web,
    Manifold,
    Purity,
    Params,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridOverride {
    pub n_points: usize,
    pub q_max: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OpticsConfig {
    pub wavelength: f64,
    pub focal_length: f64,
    pub hbar_target: Option<f64>,
    pub kick_frequency: Option<f64>,
    pub transmission: f64,
    pub floor: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Pgm,
    Json,
    Text,
}

/// Fully resolved and validated settings; serialized verbatim into every sidecar.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub kick_strengths: Vec<f64>,
    pub rotation_angle: f64,
    pub kick_phase: f64,
    pub hbar_effs: Vec<f64>,
    pub kick_sign: KickSign,
    pub n_kicks: usize,
    pub gaussian: GaussianSpec,
    pub grid: Option<GridOverride>,
    pub seed: u64,
    pub iterations: usize,
    pub manifold_eps: f64,
    pub manifold_max_points: usize,
    pub axis_sigmas: f64,
    pub samples: usize,
    pub bins: usize,
    pub post_map: Option<[[f64; 2]; 2]>,
    pub formats: Vec<Format>,
    pub optics: Option<OpticsConfig>,
    pub out: PathBuf,
}

struct Lookup<'a> {
    raw: &'a RawConfig,
}

impl Lookup<'_> {
    fn last(&self, key: &str) -> Option<&str> {
        self.raw.get(key).and_then(|v| v.last()).map(String::as_str)
    }

    /// All values of a key, comma lists flattened.
    fn list(&self, key: &str) -> Vec<&str> {
        self.raw
            .get(key)
            .into_iter()
            .flatten()
            .flat_map(|v| v.split(','))
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect()
    }

    fn real(&self, key: &str, default: f64) -> Result<f64, CliError> {
        self.last(key).map(parse_real).unwrap_or(Ok(default))
    }

    fn opt_real(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.last(key).map(parse_real).transpose()
    }

    fn angle(&self, key: &str, default: f64) -> Result<f64, CliError> {
        self.last(key).map(parse_angle).unwrap_or(Ok(default))
    }

    fn int<T: std::str::FromStr + Copy>(&self, key: &str, default: T) -> Result<T, CliError> {
        self.last(key).map(|s| parse_int(key, s)).unwrap_or(Ok(default))
    }

    fn reals(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, CliError> {
        let v = self.list(key);
        if v.is_empty() {
            return Ok(default.to_vec());
        }
        v.into_iter().map(parse_real).collect()
    }
}

fn positive(key: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Config(format!("`{key}` must be positive, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn resolve(experiment: Experiment, raw: &RawConfig) -> Result<Self, CliError> {
        let l = Lookup { raw };
        let kick_strengths = l.reals("K", &[2.0])?;
        let hbar_effs = l.reals("hbar", &[1.0])?;
        for &h in &hbar_effs {
            positive("hbar", h)?;
        }
        if kick_strengths.iter().any(|k| *k < 0.0) {
            return Err(CliError::Config("`K` must be non-negative".into()));
        }
        let single = matches!(
            experiment,
            Experiment::Evolve | Experiment::Wigner | Experiment::Manifold | Experiment::Web
        );
        if single && (kick_strengths.len() != 1 || hbar_effs.len() != 1) {
            return Err(CliError::Config(format!(
                "{experiment:?} takes exactly one `K` and one `hbar`"
            )));
        }
        let kick_sign = match l.last("kick_sign").unwrap_or("negative").to_ascii_lowercase().as_str() {
            "negative" | "-" | "-1" => KickSign::Negative,
            "positive" | "+" | "+1" | "1" => KickSign::Positive,
            other => return Err(CliError::Config(format!("`kick_sign` must be negative or positive, got `{other}`"))),
        };
        let default_n = match experiment {
            Experiment::Purity => 4,
            _ => 1,
        };
        let gaussian = GaussianSpec {
            q0: l.real("q0", 0.0)?,
            p0: l.real("p0", 0.0)?,
            squeeze: positive("squeeze", l.real("squeeze", 1.0)?)?,
            tilt: l.angle("tilt", 0.0)?,
        };
        let grid = match (l.last("grid_points"), l.last("q_max")) {
            (None, None) => None,
            (Some(n), Some(q)) => {
                let n_points: usize = parse_int("grid_points", n)?;
                if n_points < 2 {
                    return Err(CliError::Config("`grid_points` must be at least 2".into()));
                }
                Some(GridOverride {
                    n_points,
                    q_max: positive("q_max", parse_real(q)?)?,
                })
            }
            _ => return Err(CliError::Config("`grid_points` and `q_max` must be given together".into())),
        };
        if grid.is_some() && !matches!(experiment, Experiment::Evolve | Experiment::Wigner) {
            return Err(CliError::Config(format!("{experiment:?} sizes its grid automatically; drop `grid_points`/`q_max`")));
        }
        let post_map = match l.last("post_map") {
            None => None,
            Some(s) => {
                let v = s.split(',').map(parse_real).collect::<Result<Vec<_>, _>>()?;
                let [a, b, c, d] = v[..] else {
                    return Err(CliError::Config("`post_map` takes four comma-separated entries a,b,c,d".into()));
                };
                Some([[a, b], [c, d]])
            }
        };
        let formats = {
            let names = l.list("format");
            let mut out = Vec::new();
            for n in names {
                out.push(match n.to_ascii_lowercase().as_str() {
                    "csv" => Format::Csv,
                    "pgm" => Format::Pgm,
                    "json" => Format::Json,
                    "text" | "txt" => Format::Text,
                    other => return Err(CliError::Config(format!("unknown format `{other}`"))),
                });
            }
            if out.is_empty() {
                out = match experiment {
                    Experiment::Wigner => vec![Format::Csv, Format::Pgm],
                    Experiment::Params => vec![Format::Text],
                    _ => vec![Format::Csv],
                };
            }
            out
        };
        let optics = if experiment == Experiment::Params {
            let hbar_target = l.opt_real("hbar_target")?;
            let kick_frequency = l.opt_real("nu")?;
            if hbar_target.is_some() == kick_frequency.is_some() {
                return Err(CliError::Config("params needs exactly one of `hbar_target` or `nu`".into()));
            }
            Some(OpticsConfig {
                wavelength: positive("lambda", l.real("lambda", 632.8e-9)?)?,
                focal_length: positive("f", l.real("f", 0.150)?)?,
                hbar_target,
                kick_frequency,
                transmission: l.real("transmission", 0.955)?,
                floor: l.real("floor", 1e-2)?,
            })
        } else {
            None
        };
        let cfg = ExperimentConfig {
            experiment,
            kick_strengths,
            rotation_angle: l.angle("alpha", PI / 3.0)?,
            kick_phase: l.angle("phi", 0.0)?,
            hbar_effs,
            kick_sign,
            n_kicks: l.int("n", default_n)?,
            gaussian,
            grid,
            seed: l.int("seed", 0u64)?,
            iterations: l.int("iterations", 1000usize)?,
            manifold_eps: positive("eps", l.real("eps", 0.05)?)?,
            manifold_max_points: l.int("max_points", 1_000_000usize)?,
            axis_sigmas: positive("axis_sigmas", l.real("axis_sigmas", 3.0)?)?,
            samples: l.int("samples", 0usize)?,
            bins: l.int("bins", 100usize)?,
            post_map,
            formats,
            optics,
            out: PathBuf::from(l.last("out").unwrap_or("out")),
        };
        // Surface bad physics before any work starts.
        for p in cfg.param_sets() {
            p?;
        }
        cfg.gaussian.validate()?;
        if cfg.bins == 0 {
            return Err(CliError::Config("`bins` must be at least 1".into()));
        }
        Ok(cfg)
    }

    /// One parameter set per (K, ħ) pair, K-major.
    pub fn param_sets(&self) -> impl Iterator<Item = Result<KhoParams, CliError>> + '_ {
        self.kick_strengths.iter().flat_map(move |&k| {
            self.hbar_effs.iter().map(move |&h| {
                Ok(KhoParams::new(k, self.rotation_angle, self.kick_phase, h)?.with_kick_sign(self.kick_sign))
            })
        })
    }

    /// The single parameter set of single-run experiments.
    pub fn params(&self) -> Result<KhoParams, CliError> {
        self.param_sets().next().expect("at least one parameter set")
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn raw(pairs: &[(&str, &str)]) -> RawConfig {
        let mut r = RawConfig::new();
        for (k, v) in pairs {
            r.entry(k.to_string()).or_default().push(v.to_string());
        }
        r
    }

    #[test]
    fn angle_forms() {
        assert_eq!(parse_angle("pi/3").unwrap(), PI / 3.0);
        assert_eq!(parse_angle("2pi/3").unwrap(), 2.0 * PI / 3.0);
        assert_eq!(parse_angle("2*pi/3").unwrap(), 2.0 * PI / 3.0);
        assert_eq!(parse_angle(" -pi/2 ").unwrap(), -PI / 2.0);
        assert_eq!(parse_angle("1.45pi").unwrap(), 1.45 * PI);
        assert_eq!(parse_angle("π").unwrap(), PI);
        assert_eq!(parse_angle("0.5").unwrap(), 0.5);
        for bad in ["", "pi/", "pi/0", "x", "2pi3", "pi/three", "nan"] {
            assert!(parse_angle(bad).is_err(), "{bad}");
        }
    }

    proptest! {
        #[test]
        fn symbolic_and_radian_forms_agree(num in -12i32..=12, den in 1i32..=12) {
            let symbolic = parse_angle(&format!("{num}pi/{den}")).unwrap();
            let starred = parse_angle(&format!("{num}*pi/{den}")).unwrap();
            let exact = num as f64 * PI / den as f64;
            prop_assert_eq!(symbolic, exact);
            prop_assert_eq!(starred, exact);
            // Shortest round-trip decimal of the same value parses to the same bits.
            prop_assert_eq!(parse_angle(&exact.to_string()).unwrap(), exact);
        }
    }

    #[test]
    fn file_parsing_and_comments() {
        let r = parse_config_text("# header\nK = 2   # strong\nK=0.5\nhbar = 0.05, 0.1\ngrid-points = 512\n\n").unwrap();
        assert_eq!(r["K"], vec!["2", "0.5"]);
        assert_eq!(r["grid_points"], vec!["512"]);
        assert!(parse_config_text("bogus = 1").is_err());
        assert!(parse_config_text("K 2").is_err());
        assert!(parse_config_text("K =").is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = raw(&[("K", "7.4"), ("hbar", "4.72"), ("n", "3")]);
        let flags = raw(&[("K", "2")]);
        let cfg = ExperimentConfig::resolve(Experiment::Wigner, &overlay(file, flags)).unwrap();
        assert_eq!(cfg.kick_strengths, vec![2.0]);
        assert_eq!(cfg.hbar_effs, vec![4.72]);
        assert_eq!(cfg.n_kicks, 3);
        assert_eq!(cfg.seed, 0);
    }

    #[test]
    fn sweep_lists() {
        let r = raw(&[("K", "2"), ("K", "0.5"), ("hbar", "0.05,0.1,0.5,1.0,1.5"), ("alpha", "2pi/3")]);
        let cfg = ExperimentConfig::resolve(Experiment::Purity, &r).unwrap();
        assert_eq!(cfg.param_sets().count(), 10);
        assert_eq!(cfg.rotation_angle, 2.0 * PI / 3.0);
        assert!(ExperimentConfig::resolve(Experiment::Wigner, &r).is_err());
    }

    #[test]
    fn rejects_bad_values() {
        for pairs in [
            vec![("hbar", "0")],
            vec![("K", "-1")],
            vec![("grid_points", "512")],
            vec![("post_map", "1,2,3")],
            vec![("format", "png")],
            vec![("kick_sign", "sideways")],
            vec![("n", "-3")],
        ] {
            assert!(ExperimentConfig::resolve(Experiment::Evolve, &raw(&pairs)).is_err(), "{pairs:?}");
        }
        assert!(ExperimentConfig::resolve(Experiment::Params, &raw(&[])).is_err());
    }
}
