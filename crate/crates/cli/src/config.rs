//! Run configuration: a flat `key = value` file overlaid by command-line
//! flags. Keys match the long flag names; `_` and `-` are interchangeable.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use icc_core::cluster::{Algorithm, AlgorithmOptions, DEFAULT_MAX_ITERS, DEFAULT_RESTARTS};
use icc_core::consensus::DEFAULT_MAX_ROUNDS;
use icc_core::dimred::ReductionMethod;
use icc_core::perron::{DEFAULT_MAX_REFINEMENTS, DEFAULT_M_MAX};

use crate::error::{CliError, Result};
use crate::io::InputFormat;

/// Default worker count when neither the file nor a flag sets `threads`.
pub const THREADS_ENV: &str = "ICC_THREADS";

pub const KEYS: &[&str] = &[
    "input",
    "format",
    "transpose",
    "algorithms",
    "reductions",
    "ranks",
    "include-raw",
    "k-values",
    "k",
    "tau",
    "m-max",
    "max-rounds",
    "max-refinements",
    "kmeans-restarts",
    "kmeans-max-iters",
    "histogram-bins",
    "seed",
    "output",
    "threads",
];

pub const DEFAULT_ALGORITHMS: [Algorithm; 3] = [Algorithm::Kmeans, Algorithm::Pddp, Algorithm::PddpKmeans];
pub const DEFAULT_REDUCTIONS: [ReductionMethod; 2] = [ReductionMethod::Svd, ReductionMethod::Pca];
pub const DEFAULT_RANKS: [usize; 3] = [5, 10, 20];
pub const DEFAULT_HISTOGRAM_BINS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Estimate k, then vote at that k (or at the given k).
    Run,
    EstimateK,
    /// Vote at a given k.
    Cluster,
}

impl Mode {
    pub fn id(self) -> &'static str {
        match self {
            Self::Run => "run",
            Self::EstimateK => "estimate-k",
            Self::Cluster => "cluster",
        }
    }
}

/// Ordered key/value pairs, keys normalized to their flag spelling.
pub type ConfigMap = BTreeMap<String, String>;

fn normalize_key(raw: &str) -> String {
    raw.trim().replace('_', "-").to_ascii_lowercase()
}

fn known(key: &str) -> bool {
    KEYS.contains(&key)
}

/// Parses `key = value` lines. Blank lines and `#` comments are ignored;
/// unknown or repeated keys are errors.
pub fn parse_config_text(text: &str) -> Result<ConfigMap> {
    let mut map = ConfigMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| CliError::Config {
            message: format!("config line {line}: {message}"),
            line: Some(line),
        };
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let (k, v) = t
            .split_once('=')
            .ok_or_else(|| err(format!("expected key = value, found {t:?}")))?;
        let key = normalize_key(k);
        if !known(&key) {
            return Err(err(format!("unknown key {key:?}")));
        }
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(err(format!("key {key:?} given twice")));
        }
    }
    Ok(map)
}

pub fn read_config_file(path: &Path) -> Result<ConfigMap> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config_text(&text).map_err(|e| match e {
        CliError::Config { message, line } => CliError::Config {
            message: format!("{}: {message}", path.display()),
            line,
        },
        other => other,
    })
}

/// `overrides` win over `base`; both must use known keys.
pub fn merge(mut base: ConfigMap, overrides: ConfigMap) -> Result<ConfigMap> {
    for (k, v) in overrides {
        let key = normalize_key(&k);
        if !known(&key) {
            return Err(CliError::config(format!("unknown key {key:?}")));
        }
        base.insert(key, v);
    }
    Ok(base)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub input: PathBuf,
    pub format: InputFormat,
    pub transpose: bool,
    pub algorithms: Vec<Algorithm>,
    pub reductions: Vec<ReductionMethod>,
    pub ranks: Vec<usize>,
    pub include_raw: bool,
    /// The k̃ grid; `None` picks 4..=min(20, ⌊√n⌋) once n is known.
    pub k_values: Option<Vec<usize>>,
    /// A known cluster count; skips estimation.
    pub k: Option<usize>,
    pub tau: f64,
    pub m_max: usize,
    pub max_rounds: usize,
    pub max_refinements: usize,
    pub options: AlgorithmOptions,
    pub histogram_bins: usize,
    pub seed: u64,
    pub output: PathBuf,
    /// 0 lets the pool pick one worker per core.
    pub threads: usize,
}

impl RunConfig {
    /// Defaults for everything but the input path.
    pub fn new(mode: Mode, input: impl Into<PathBuf>) -> Self {
        let input = input.into();
        Self {
            mode,
            format: InputFormat::infer(&input),
            input,
            transpose: false,
            algorithms: DEFAULT_ALGORITHMS.to_vec(),
            reductions: DEFAULT_REDUCTIONS.to_vec(),
            ranks: DEFAULT_RANKS.to_vec(),
            include_raw: false,
            k_values: None,
            k: None,
            tau: 0.0,
            m_max: DEFAULT_M_MAX,
            max_rounds: DEFAULT_MAX_ROUNDS,
            max_refinements: DEFAULT_MAX_REFINEMENTS,
            options: AlgorithmOptions {
                kmeans_restarts: DEFAULT_RESTARTS,
                kmeans_max_iters: DEFAULT_MAX_ITERS,
            },
            histogram_bins: DEFAULT_HISTOGRAM_BINS,
            seed: 0,
            output: PathBuf::from("icc-out"),
            threads: 0,
        }
    }

    /// Builds and validates a config. `env_threads` is the value of
    /// [`THREADS_ENV`], used when `threads` is absent from `map`.
    pub fn from_map(mode: Mode, map: &ConfigMap, env_threads: Option<&str>) -> Result<Self> {
        if let Some(k) = map.keys().find(|k| !known(k)) {
            return Err(CliError::config(format!("unknown key {k:?}")));
        }
        let input = map.get("input").ok_or_else(|| CliError::config("input is required"))?;
        let mut c = Self::new(mode, input);
        for (key, value) in map {
            let v = value.as_str();
            match key.as_str() {
                "input" => {}
                "format" => c.format = v.parse()?,
                "transpose" => c.transpose = parse_bool(key, v)?,
                "algorithms" => {
                    c.algorithms = parse_list(key, v, |s| s.parse::<Algorithm>().map_err(|e| e.to_string()))?
                }
                "reductions" => {
                    c.reductions = if v.eq_ignore_ascii_case("none") {
                        Vec::new()
                    } else {
                        parse_list(key, v, |s| s.parse::<ReductionMethod>().map_err(|e| e.to_string()))?
                    }
                }
                "ranks" => c.ranks = parse_list(key, v, parse_count)?,
                "include-raw" => c.include_raw = parse_bool(key, v)?,
                "k-values" => c.k_values = Some(parse_k_values(v)?),
                "k" => c.k = Some(parse_num(key, v)?),
                "tau" => c.tau = parse_num(key, v)?,
                "m-max" => c.m_max = parse_num(key, v)?,
                "max-rounds" => c.max_rounds = parse_num(key, v)?,
                "max-refinements" => c.max_refinements = parse_num(key, v)?,
                "kmeans-restarts" => c.options.kmeans_restarts = parse_num(key, v)?,
                "kmeans-max-iters" => c.options.kmeans_max_iters = parse_num(key, v)?,
                "histogram-bins" => c.histogram_bins = parse_num(key, v)?,
                "seed" => c.seed = parse_num(key, v)?,
                "output" => c.output = PathBuf::from(v),
                "threads" => c.threads = parse_num(key, v)?,
                _ => unreachable!("keys were checked above"),
            }
        }
        if !map.contains_key("threads") {
            if let Some(t) = env_threads.filter(|t| !t.trim().is_empty()) {
                c.threads = t
                    .trim()
                    .parse()
                    .map_err(|_| CliError::config(format!("{THREADS_ENV}={t:?} is not a thread count")))?;
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::config(m));
        if self.algorithms.is_empty() {
            return bad("algorithms must not be empty".into());
        }
        if self.reductions.is_empty() && !self.include_raw {
            return bad("no inputs to cluster: list reductions or set include-raw = true".into());
        }
        if !self.reductions.is_empty() && self.ranks.is_empty() {
            return bad("ranks must not be empty".into());
        }
        if let Some(ks) = &self.k_values {
            if ks.is_empty() {
                return bad("k-values must not be empty".into());
            }
        }
        match (self.mode, self.k) {
            (Mode::Cluster, None) => return bad("cluster needs k".into()),
            (Mode::EstimateK, Some(_)) => return bad("estimate-k does not take k".into()),
            (_, Some(k)) if k < 2 => return bad(format!("k = {k}: voting needs at least 2 clusters")),
            _ => {}
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return bad(format!("tau = {} is outside [0, 1]", self.tau));
        }
        if self.m_max < 2 {
            return bad("m-max must be at least 2".into());
        }
        if self.max_rounds == 0 {
            return bad("max-rounds must be at least 1".into());
        }
        if self.options.kmeans_restarts == 0 || self.options.kmeans_max_iters == 0 {
            return bad("kmeans-restarts and kmeans-max-iters must be positive".into());
        }
        if self.histogram_bins == 0 {
            return bad("histogram-bins must be positive".into());
        }
        Ok(())
    }

    /// The configured k̃ values, or 4..=min(20, ⌊√n⌋); for n < 16 that range
    /// is empty and 2..=max(2, ⌊√n⌋) is used.
    pub fn k_values_for(&self, n: usize) -> Vec<usize> {
        if let Some(ks) = &self.k_values {
            return ks.clone();
        }
        let root = (n as f64).sqrt().floor() as usize;
        let hi = root.min(20);
        if hi >= 4 {
            (4..=hi).collect()
        } else {
            (2..=hi.max(2)).collect()
        }
    }

    /// Every reduction at every rank, ranks capped at `max_rank` and
    /// duplicates dropped. Returns a warning when a rank was capped.
    pub fn reduction_grid(&self, max_rank: usize) -> (Vec<(ReductionMethod, usize)>, Option<String>) {
        let mut ranks: Vec<usize> = Vec::new();
        for &r in &self.ranks {
            let r = r.min(max_rank);
            if !ranks.contains(&r) {
                ranks.push(r);
            }
        }
        let capped: Vec<String> = self
            .ranks
            .iter()
            .filter(|&&r| r > max_rank)
            .map(usize::to_string)
            .collect();
        let warning = (!capped.is_empty()).then(|| format!("ranks {} capped at {max_rank}", capped.join(", ")));
        let grid = self
            .reductions
            .iter()
            .flat_map(|&m| ranks.iter().map(move |&r| (m, r)))
            .collect();
        (grid, warning)
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| CliError::config(format!("{key} = {v:?} is not a valid {}", std::any::type_name::<T>())))
}

fn parse_count(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("0 is not allowed".into()),
        Ok(v) => Ok(v),
        Err(_) => Err(format!("{s:?} is not a positive integer")),
    }
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(CliError::config(format!("{key} = {v:?} is not a boolean"))),
    }
}

/// Comma-separated, no empty items, no repeats.
fn parse_list<T: PartialEq>(
    key: &str,
    v: &str,
    item: impl Fn(&str) -> std::result::Result<T, String>,
) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for raw in v.split(',') {
        let s = raw.trim();
        if s.is_empty() {
            return Err(CliError::config(format!("{key}: empty item in {v:?}")));
        }
        let parsed = item(s).map_err(|e| CliError::config(format!("{key}: {e}")))?;
        if out.contains(&parsed) {
            return Err(CliError::config(format!("{key}: {s:?} listed twice")));
        }
        out.push(parsed);
    }
    Ok(out)
}

/// `4..10` (inclusive), `4..=10`, `3,5,7`, or a mix such as `2,4..6`.
pub fn parse_k_values(v: &str) -> Result<Vec<usize>> {
    let mut out: Vec<usize> = Vec::new();
    for raw in v.split(',') {
        let s = raw.trim();
        let err = || CliError::config(format!("k-values: bad item {s:?} in {v:?}"));
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => {
                let b = b.strip_prefix('=').unwrap_or(b);
                (
                    a.trim().parse::<usize>().map_err(|_| err())?,
                    b.trim().parse::<usize>().map_err(|_| err())?,
                )
            }
            None => {
                let k = s.parse::<usize>().map_err(|_| err())?;
                (k, k)
            }
        };
        if lo < 2 || hi < lo {
            return Err(err());
        }
        for k in lo..=hi {
            if out.contains(&k) {
                return Err(CliError::config(format!("k-values: {k} listed twice")));
            }
            out.push(k);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(pairs: &[(&str, &str)]) -> ConfigMap {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn file_syntax() {
        let m = parse_config_text("# run\ninput = data.csv\n\nk_values = 4..6\nseed=7\n").unwrap();
        assert_eq!(m["input"], "data.csv");
        assert_eq!(m["k-values"], "4..6");
        assert_eq!(m["seed"], "7");
    }

    #[test]
    fn unknown_and_repeated_keys_are_rejected() {
        match parse_config_text("input = a\nbogus = 1\n").unwrap_err() {
            CliError::Config { line, message } => {
                assert_eq!(line, Some(2));
                assert!(message.contains("bogus"));
            }
            e => panic!("{e:?}"),
        }
        assert!(parse_config_text("seed = 1\nseed = 2\n").is_err());
        assert!(parse_config_text("just words\n").is_err());
        assert!(RunConfig::from_map(Mode::Run, &map(&[("input", "a"), ("nope", "1")]), None).is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = parse_config_text("input = a.csv\nseed = 1\ntau = 0.2\n").unwrap();
        let merged = merge(file, map(&[("seed", "9")])).unwrap();
        let c = RunConfig::from_map(Mode::Run, &merged, None).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.tau, 0.2);
    }

    #[test]
    fn thread_count_precedence() {
        let c = RunConfig::from_map(Mode::Run, &map(&[("input", "a")]), Some("3")).unwrap();
        assert_eq!(c.threads, 3);
        let c = RunConfig::from_map(Mode::Run, &map(&[("input", "a"), ("threads", "2")]), Some("3")).unwrap();
        assert_eq!(c.threads, 2);
        assert_eq!(
            RunConfig::from_map(Mode::Run, &map(&[("input", "a")]), None)
                .unwrap()
                .threads,
            0
        );
        assert!(RunConfig::from_map(Mode::Run, &map(&[("input", "a")]), Some("many")).is_err());
    }

    #[test]
    fn values_are_parsed() {
        let c = RunConfig::from_map(
            Mode::Cluster,
            &map(&[
                ("input", "x.mtx"),
                ("algorithms", "kmeans, ncut"),
                ("reductions", "nmf"),
                ("ranks", "3,6"),
                ("include-raw", "yes"),
                ("k", "4"),
            ]),
            None,
        )
        .unwrap();
        assert_eq!(c.format, InputFormat::MatrixMarket);
        assert_eq!(c.algorithms, vec![Algorithm::Kmeans, Algorithm::Ncut]);
        assert_eq!(c.reductions, vec![ReductionMethod::Nmf]);
        assert_eq!(c.ranks, vec![3, 6]);
        assert!(c.include_raw);
        assert_eq!(c.k, Some(4));
    }

    #[test]
    fn invalid_values() {
        let bad = |pairs: &[(&str, &str)], mode| {
            let mut m = map(pairs);
            m.insert("input".into(), "a.csv".into());
            RunConfig::from_map(mode, &m, None).is_err()
        };
        assert!(bad(&[("tau", "1.5")], Mode::Run));
        assert!(bad(&[("tau", "abc")], Mode::Run));
        assert!(bad(&[("algorithms", "kmeans,kmeans")], Mode::Run));
        assert!(bad(&[("algorithms", "dbscan")], Mode::Run));
        assert!(bad(&[("ranks", "0")], Mode::Run));
        assert!(bad(&[("k", "1")], Mode::Run));
        assert!(bad(&[], Mode::Cluster));
        assert!(bad(&[("k", "3")], Mode::EstimateK));
        assert!(bad(&[("reductions", "none")], Mode::Run));
        assert!(bad(&[("max-rounds", "0")], Mode::Run));
        assert!(bad(&[("transpose", "maybe")], Mode::Run));
        assert!(RunConfig::from_map(Mode::Run, &map(&[]), None).is_err());
    }

    #[test]
    fn k_value_syntax() {
        assert_eq!(parse_k_values("4..6").unwrap(), vec![4, 5, 6]);
        assert_eq!(parse_k_values("4..=6").unwrap(), vec![4, 5, 6]);
        assert_eq!(parse_k_values("2, 4..5, 9").unwrap(), vec![2, 4, 5, 9]);
        assert!(parse_k_values("6..4").is_err());
        assert!(parse_k_values("1..3").is_err());
        assert!(parse_k_values("3,3").is_err());
        assert!(parse_k_values("x").is_err());
    }

    #[test]
    fn default_k_grid_follows_n() {
        let c = RunConfig::new(Mode::Run, "a.csv");
        assert_eq!(c.k_values_for(300), (4..=17).collect::<Vec<_>>());
        assert_eq!(c.k_values_for(1000), (4..=20).collect::<Vec<_>>());
        assert_eq!(c.k_values_for(10), vec![2, 3]);
        assert_eq!(c.k_values_for(3), vec![2]);
    }

    #[test]
    fn ranks_are_capped_and_deduplicated() {
        let c = RunConfig::new(Mode::Run, "a.csv");
        let (grid, warning) = c.reduction_grid(8);
        assert_eq!(
            grid,
            vec![
                (ReductionMethod::Svd, 5),
                (ReductionMethod::Svd, 8),
                (ReductionMethod::Pca, 5),
                (ReductionMethod::Pca, 8)
            ]
        );
        assert!(warning.unwrap().contains("10, 20"));
        assert!(c.reduction_grid(50).1.is_none());
    }
}
