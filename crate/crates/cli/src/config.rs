//! Experiment configuration: a TOML file with top-level run settings and a
//! `[grid]` table whose keys depend on the command.

use clap::ValueEnum;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    GaussVerify,
    SqrtVerify,
    ExpsumVerify,
    BilinearSweep,
    FareyCount,
    SieveSweep,
    Thm3Sweep,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::GaussVerify,
        Command::SqrtVerify,
        Command::ExpsumVerify,
        Command::BilinearSweep,
        Command::FareyCount,
        Command::SieveSweep,
        Command::Thm3Sweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::GaussVerify => "gauss-verify",
            Command::SqrtVerify => "sqrt-verify",
            Command::ExpsumVerify => "expsum-verify",
            Command::BilinearSweep => "bilinear-sweep",
            Command::FareyCount => "farey-count",
            Command::SieveSweep => "sieve-sweep",
            Command::Thm3Sweep => "thm3-sweep",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaussGrid {
    pub c_min: u64,
    pub c_max: u64,
}

impl Default for GaussGrid {
    fn default() -> Self {
        GaussGrid {
            c_min: 1,
            c_max: 99,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SqrtGrid {
    pub r_min: u64,
    pub r_max: u64,
}

impl Default for SqrtGrid {
    fn default() -> Self {
        SqrtGrid {
            r_min: 1,
            r_max: 301,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExpsumGrid {
    /// Random tuples for the splitting identity.
    pub tuples: usize,
    /// Moduli are odd and log-uniform in `[3, r2_max]`.
    pub r2_max: u64,
    /// Prime powers `p^m`, `m >= 2`, for the critical-point checks.
    pub local_moduli: Vec<u64>,
    /// Accepted tuples (with `t <= m - 2`) per prime power.
    pub local_tuples: usize,
    /// Exhaustive prime-modulus grids for every odd prime up to this value.
    pub ground_p_max: u64,
    /// Random tuples compared against their prime-modulus normal form.
    pub ground_tuples: usize,
}

impl Default for ExpsumGrid {
    fn default() -> Self {
        ExpsumGrid {
            tuples: 100,
            r2_max: 10_000,
            local_moduli: vec![27, 125, 343],
            local_tuples: 40,
            ground_p_max: 47,
            ground_tuples: 100,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coefficients {
    /// Seeded unit-modulus phases.
    #[default]
    Random,
    Ones,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BilinearGrid {
    /// Random instances checked against the triple-loop oracle.
    pub oracle_cases: usize,
    pub oracle_r_max: u64,
    /// Number of moduli in the ratio sweep: the squarefull-heavy list
    /// entries in `[r_min, r_max]`, topped up with log-uniform odd values.
    pub sweep_count: usize,
    pub r_min: u64,
    pub r_max: u64,
    pub squarefull: Vec<u64>,
    /// `L = r^e` for each entry.
    pub l_exponents: Vec<f64>,
    /// `M = r^e` for each entry; values `>= 1` mean `M = floor(r / 2)`.
    pub m_exponents: Vec<f64>,
    pub coefficients: Coefficients,
    /// Moduli for the energy identities.
    pub energy_moduli: Vec<u64>,
}

impl Default for BilinearGrid {
    fn default() -> Self {
        BilinearGrid {
            oracle_cases: 40,
            oracle_r_max: 99,
            sweep_count: 20,
            r_min: 101,
            r_max: 1999,
            squarefull: vec![243, 375, 1125, 1323],
            l_exponents: vec![0.25, 0.5],
            m_exponents: vec![0.5, 0.75, 1.0],
            coefficients: Coefficients::Random,
            energy_moduli: vec![21, 45, 75],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FareyGrid {
    /// Random `(alpha, Delta)` queries checked against the double loop.
    pub queries: usize,
    pub q_max: u64,
    /// Random structural queries compared with the short-interval bound.
    pub structural: usize,
}

impl Default for FareyGrid {
    fn default() -> Self {
        FareyGrid {
            queries: 100,
            q_max: 40,
            structural: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SieveGrid {
    /// Instances of the classical inequality.
    pub classical: usize,
    pub classical_n_max: u64,
    pub classical_q_max: u64,
    /// Square-moduli form for each `(Q, N)` pair, one seeded instance each.
    pub square: Vec<(u64, u64)>,
    /// Seeded instances for the relation with the Farey count.
    pub relation: usize,
    pub relation_q: u64,
    pub relation_n: u64,
}

impl Default for SieveGrid {
    fn default() -> Self {
        SieveGrid {
            classical: 30,
            classical_n_max: 200,
            classical_q_max: 20,
            square: vec![(4, 64), (6, 40), (6, 216), (8, 512)],
            relation: 3,
            relation_q: 5,
            relation_n: 125,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thm3Grid {
    pub q: Vec<u64>,
    /// Odd squarefree `r` in `[Q^r_lo, Q^r_hi]`.
    pub r_lo: f64,
    pub r_hi: f64,
    /// Residues `b` per `r`; 0 means all reduced residues.
    pub b_per_r: usize,
}

impl Default for Thm3Grid {
    fn default() -> Self {
        Thm3Grid {
            q: vec![16, 24, 32, 48, 64],
            r_lo: 0.6,
            r_hi: 0.9,
            b_per_r: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Grid {
    Gauss(GaussGrid),
    Sqrt(SqrtGrid),
    Expsum(ExpsumGrid),
    Bilinear(BilinearGrid),
    Farey(FareyGrid),
    Sieve(SieveGrid),
    Thm3(Thm3Grid),
}

impl Grid {
    pub fn default_for(command: Command) -> Grid {
        match command {
            Command::GaussVerify => Grid::Gauss(GaussGrid::default()),
            Command::SqrtVerify => Grid::Sqrt(SqrtGrid::default()),
            Command::ExpsumVerify => Grid::Expsum(ExpsumGrid::default()),
            Command::BilinearSweep => Grid::Bilinear(BilinearGrid::default()),
            Command::FareyCount => Grid::Farey(FareyGrid::default()),
            Command::SieveSweep => Grid::Sieve(SieveGrid::default()),
            Command::Thm3Sweep => Grid::Thm3(Thm3Grid::default()),
        }
    }

    /// First invalid field as `(key, message)`.
    fn validate(&self) -> Result<(), (&'static str, String)> {
        let need = |ok: bool, key: &'static str, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err((key, msg.to_string()))
            }
        };
        match self {
            Grid::Gauss(g) => {
                need(g.c_min >= 1, "c_min", "must be at least 1")?;
                need(g.c_max >= g.c_min, "c_max", "must be at least c_min")?;
                need(g.c_max <= 4999, "c_max", "must be at most 4999")
            }
            Grid::Sqrt(g) => {
                need(g.r_min >= 1, "r_min", "must be at least 1")?;
                need(g.r_max >= g.r_min, "r_max", "must be at least r_min")?;
                need(g.r_max <= 20_000, "r_max", "must be at most 20000")
            }
            Grid::Expsum(g) => {
                need(
                    g.r2_max >= 3 && g.r2_max <= 1_000_000,
                    "r2_max",
                    "must lie in [3, 1000000]",
                )?;
                for &pm in &g.local_moduli {
                    let f =
                        sqrtsieve::factorize(pm).map_err(|e| ("local_moduli", e.to_string()))?;
                    let ok = matches!(f.factors(), [(p, m)] if *p > 2 && *m >= 2) && pm <= 100_000;
                    need(
                        ok,
                        "local_moduli",
                        &format!(
                            "{pm} is not an odd prime power p^m with m >= 2 and p^m <= 100000"
                        ),
                    )?;
                }
                need(
                    g.ground_p_max <= 1000,
                    "ground_p_max",
                    "must be at most 1000",
                )
            }
            Grid::Bilinear(g) => {
                need(
                    g.oracle_r_max >= 1 && g.oracle_r_max <= 1023,
                    "oracle_r_max",
                    "must lie in [1, 1023]",
                )?;
                need(g.r_min >= 3, "r_min", "must be at least 3")?;
                need(
                    g.r_max >= g.r_min && g.r_max <= 99_999,
                    "r_max",
                    "must lie in [r_min, 99999]",
                )?;
                for &r in &g.squarefull {
                    need(
                        r % 2 == 1 && r >= 3,
                        "squarefull",
                        &format!("{r} is not an odd modulus >= 3"),
                    )?;
                }
                for &e in g.l_exponents.iter().chain(&g.m_exponents) {
                    need(
                        e > 0.0 && e <= 1.0,
                        "l_exponents",
                        "exponents must lie in (0, 1]",
                    )?;
                }
                for &r in &g.energy_moduli {
                    need(
                        r % 2 == 1 && (3..=2001).contains(&r),
                        "energy_moduli",
                        &format!("{r} is not odd in [3, 2001]"),
                    )?;
                }
                Ok(())
            }
            Grid::Farey(g) => need(
                g.q_max >= 1 && g.q_max <= 500,
                "q_max",
                "must lie in [1, 500]",
            ),
            Grid::Sieve(g) => {
                need(
                    g.classical_n_max >= 1,
                    "classical_n_max",
                    "must be at least 1",
                )?;
                need(
                    g.classical_q_max >= 1,
                    "classical_q_max",
                    "must be at least 1",
                )?;
                for &(q, n) in &g.square {
                    need(q >= 1 && n >= 1, "square", "each (Q, N) must be positive")?;
                }
                need(
                    g.relation_q >= 1 && g.relation_n >= 1,
                    "relation_q",
                    "Q and N must be positive",
                )
            }
            Grid::Thm3(g) => {
                need(
                    !g.q.is_empty() && g.q.iter().all(|&q| (2..=512).contains(&q)),
                    "q",
                    "entries must lie in [2, 512]",
                )?;
                need(
                    g.r_lo > 0.0 && g.r_lo <= g.r_hi && g.r_hi <= 1.5,
                    "r_hi",
                    "need 0 < r_lo <= r_hi <= 1.5",
                )
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub seed: u64,
    pub grid: Grid,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(command: Command, seed: u64) -> Self {
        ExperimentConfig {
            command,
            seed,
            grid: Grid::default_for(command),
            output_path: None,
            format: Format::Csv,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{origin}: {message}")]
pub struct ConfigError {
    pub origin: String,
    pub message: String,
}

fn config_error(origin: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        origin: origin.to_string(),
        message: message.into(),
    }
}

#[derive(Deserialize)]
struct Header {
    command: Option<Command>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig<G> {
    #[allow(dead_code)]
    command: Option<Command>,
    seed: Option<u64>,
    format: Option<Format>,
    out: Option<PathBuf>,
    threads: Option<usize>,
    #[serde(default)]
    grid: Option<G>,
}

struct FileSettings {
    seed: Option<u64>,
    format: Option<Format>,
    out: Option<PathBuf>,
    threads: Option<usize>,
    grid: Grid,
}

fn parse_as<G: DeserializeOwned + Default>(
    text: &str,
    origin: &str,
    wrap: fn(G) -> Grid,
) -> Result<FileSettings, ConfigError> {
    let f: FileConfig<G> =
        toml::from_str(text).map_err(|e| config_error(origin, e.to_string().trim_end()))?;
    Ok(FileSettings {
        seed: f.seed,
        format: f.format,
        out: f.out,
        threads: f.threads,
        grid: wrap(f.grid.unwrap_or_default()),
    })
}

/// 1-based line of `key = ...` inside the `[grid]` table, if present.
fn grid_key_line(text: &str, key: &str) -> Option<usize> {
    let mut in_grid = false;
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.starts_with('[') {
            in_grid = t == "[grid]";
            continue;
        }
        if in_grid {
            if let Some((k, _)) = t.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

/// Command-line settings that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub command: Option<Command>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub threads: Option<usize>,
}

/// Builds the configuration from an optional TOML text and command-line
/// overrides. `origin` names the text in error messages.
pub fn resolve(text: Option<(&str, &str)>, ov: Overrides) -> Result<ExperimentConfig, ConfigError> {
    let (file_command, settings, origin) = match text {
        Some((text, origin)) => {
            let header: Header =
                toml::from_str(text).map_err(|e| config_error(origin, e.to_string().trim_end()))?;
            if let (Some(a), Some(b)) = (ov.command, header.command) {
                if a != b {
                    return Err(config_error(
                        origin,
                        format!(
                            "command `{}` in the file conflicts with `{}` on the command line",
                            b.name(),
                            a.name()
                        ),
                    ));
                }
            }
            let command = ov.command.or(header.command);
            let settings = match command {
                Some(Command::GaussVerify) => Some(parse_as(text, origin, Grid::Gauss)?),
                Some(Command::SqrtVerify) => Some(parse_as(text, origin, Grid::Sqrt)?),
                Some(Command::ExpsumVerify) => Some(parse_as(text, origin, Grid::Expsum)?),
                Some(Command::BilinearSweep) => Some(parse_as(text, origin, Grid::Bilinear)?),
                Some(Command::FareyCount) => Some(parse_as(text, origin, Grid::Farey)?),
                Some(Command::SieveSweep) => Some(parse_as(text, origin, Grid::Sieve)?),
                Some(Command::Thm3Sweep) => Some(parse_as(text, origin, Grid::Thm3)?),
                None => None,
            };
            (
                header.command,
                settings.map(|s| (s, text)),
                origin.to_string(),
            )
        }
        None => (None, None, "command line".to_string()),
    };
    let command = ov.command.or(file_command).ok_or_else(|| {
        config_error(
            &origin,
            "no command given on the command line or as `command` in the file",
        )
    })?;
    let mut cfg = ExperimentConfig::new(command, 0);
    if let Some((s, text)) = settings {
        if let Err((key, msg)) = s.grid.validate() {
            let at = grid_key_line(text, key)
                .map(|l| format!(":{l}"))
                .unwrap_or_default();
            return Err(config_error(
                &format!("{origin}{at}"),
                format!("grid.{key}: {msg}"),
            ));
        }
        cfg.grid = s.grid;
        cfg.seed = s.seed.unwrap_or(0);
        cfg.format = s.format.unwrap_or_default();
        cfg.output_path = s.out;
        cfg.threads = s.threads;
    }
    if let Some(seed) = ov.seed {
        cfg.seed = seed;
    }
    if let Some(format) = ov.format {
        cfg.format = format;
    }
    if ov.out.is_some() {
        cfg.output_path = ov.out;
    }
    if ov.threads.is_some() {
        cfg.threads = ov.threads;
    }
    if cfg.threads == Some(0) {
        return Err(config_error(&origin, "threads must be at least 1"));
    }
    Ok(cfg)
}

/// Reads and resolves a configuration file.
pub fn load(path: &Path, ov: Overrides) -> Result<ExperimentConfig, LoadError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| LoadError::Io(format!("{}: {e}", path.display())))?;
    resolve(Some((&text, &path.display().to_string())), ov).map_err(LoadError::Config)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read config {0}")]
    Io(String),
    #[error("config error: {0}")]
    Config(ConfigError),
}
