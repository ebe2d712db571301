//! Resolved run configuration.
//!
//! Values come from three layers, later ones winning: per-command defaults,
//! an optional flat `key = value` file, then command-line flags. The fully
//! resolved config is written next to every output file so a run can be
//! repeated with `--config <output>.config`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use care_core::community::LouvainConfig;
use care_core::walker::StepPolicy;
use care_core::{EdgeOperator, EmbedConfig, LoadOptions, TrainConfig, WalkConfig};

use crate::error::CliError;
use crate::Options;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    Communities,
    Walks,
    Embed,
    EvalClassify,
    EvalLinkpred,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Communities => "communities",
            Task::Walks => "walks",
            Task::Embed => "embed",
            Task::EvalClassify => "eval-classify",
            Task::EvalLinkpred => "eval-linkpred",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub edges: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub dataset: Option<String>,
    pub directed: bool,
    pub weighted: bool,
    pub numeric_ids: bool,
    pub alpha: f64,
    pub walk_length: usize,
    pub walks_per_node: usize,
    pub self_avoiding: bool,
    pub dim: usize,
    pub window: usize,
    pub lr: f64,
    pub negatives: usize,
    pub workers: usize,
    pub deterministic: bool,
    pub seed: u64,
    pub train_fractions: Vec<f64>,
    pub operators: Vec<EdgeOperator>,
    pub removal_fraction: f64,
}

impl RunConfig {
    pub fn defaults(task: Task) -> Self {
        let walk = match task {
            Task::EvalLinkpred => WalkConfig::link_prediction(),
            _ => WalkConfig::classification(),
        };
        let train = TrainConfig::default();
        RunConfig {
            edges: None,
            labels: None,
            embeddings: None,
            output: None,
            dataset: None,
            directed: false,
            weighted: false,
            numeric_ids: false,
            alpha: walk.alpha,
            walk_length: walk.walk_length,
            walks_per_node: walk.walks_per_node,
            self_avoiding: false,
            dim: EmbedConfig::default().dim,
            window: train.window,
            lr: train.initial_lr,
            negatives: train.negatives,
            workers: 1,
            deterministic: false,
            seed: 0,
            train_fractions: (1..=9).map(|i| i as f64 / 10.0).collect(),
            operators: EdgeOperator::ALL.to_vec(),
            removal_fraction: 0.5,
        }
    }

    pub fn resolve(task: Task, opts: &Options) -> Result<Self, CliError> {
        let mut config = Self::defaults(task);
        if let Some(path) = &opts.config {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
            config.apply_file(&text).map_err(|e| match e {
                CliError::Usage(msg) => CliError::Usage(format!("{}: {msg}", path.display())),
                other => other,
            })?;
        }
        config.apply_flags(opts)?;
        Ok(config)
    }

    fn apply_file(&mut self, text: &str) -> Result<(), CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("line {}: expected `key = value`", i + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|msg| CliError::Usage(format!("line {}: {msg}", i + 1)))?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
            value
                .parse()
                .map_err(|_| format!("invalid value `{value}` for `{key}`"))
        }
        match key {
            "edges" => self.edges = Some(value.into()),
            "labels" => self.labels = Some(value.into()),
            "embeddings" => self.embeddings = Some(value.into()),
            "output" => self.output = Some(value.into()),
            "dataset" => self.dataset = Some(value.into()),
            "directed" => self.directed = parse(key, value)?,
            "weighted" => self.weighted = parse(key, value)?,
            "numeric_ids" => self.numeric_ids = parse(key, value)?,
            "alpha" => self.alpha = parse(key, value)?,
            "walk_length" => self.walk_length = parse(key, value)?,
            "walks_per_node" => self.walks_per_node = parse(key, value)?,
            "self_avoiding" => self.self_avoiding = parse(key, value)?,
            "dim" => self.dim = parse(key, value)?,
            "window" => self.window = parse(key, value)?,
            "lr" => self.lr = parse(key, value)?,
            "negatives" => self.negatives = parse(key, value)?,
            "workers" => self.workers = parse(key, value)?,
            "deterministic" => self.deterministic = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "train_fraction" => self.train_fractions = parse_fractions(value)?,
            "operator" => self.operators = parse_operators(value)?,
            "removal_fraction" => self.removal_fraction = parse(key, value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    fn apply_flags(&mut self, o: &Options) -> Result<(), CliError> {
        fn take<T: Clone>(slot: &mut T, flag: &Option<T>) {
            if let Some(v) = flag {
                *slot = v.clone();
            }
        }
        let path = |p: &Option<PathBuf>| p.clone();
        if o.edges.is_some() {
            self.edges = path(&o.edges);
        }
        if o.labels.is_some() {
            self.labels = path(&o.labels);
        }
        if o.embeddings.is_some() {
            self.embeddings = path(&o.embeddings);
        }
        if o.output.is_some() {
            self.output = path(&o.output);
        }
        if o.dataset.is_some() {
            self.dataset = o.dataset.clone();
        }
        self.directed |= o.directed;
        self.weighted |= o.weighted;
        self.numeric_ids |= o.numeric_ids;
        self.self_avoiding |= o.self_avoiding;
        self.deterministic |= o.deterministic;
        take(&mut self.alpha, &o.alpha);
        take(&mut self.walk_length, &o.walk_length);
        take(&mut self.walks_per_node, &o.walks_per_node);
        take(&mut self.dim, &o.dim);
        take(&mut self.window, &o.window);
        take(&mut self.lr, &o.lr);
        take(&mut self.negatives, &o.negatives);
        take(&mut self.workers, &o.workers);
        take(&mut self.seed, &o.seed);
        take(&mut self.removal_fraction, &o.removal_fraction);
        if let Some(list) = &o.train_fraction {
            self.train_fractions = parse_fractions(list).map_err(CliError::Usage)?;
        }
        if let Some(list) = &o.operator {
            self.operators = parse_operators(list).map_err(CliError::Usage)?;
        }
        if self.workers == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        Ok(())
    }

    pub fn load_options(&self) -> LoadOptions {
        LoadOptions {
            directed: self.directed,
            weighted: self.weighted,
            numeric_ids: self.numeric_ids,
            ..LoadOptions::default()
        }
    }

    pub fn embed_config(&self) -> EmbedConfig {
        EmbedConfig {
            dim: self.dim,
            walk: WalkConfig {
                alpha: self.alpha,
                walk_length: self.walk_length,
                walks_per_node: self.walks_per_node,
                seed: self.seed,
                policy: if self.self_avoiding {
                    StepPolicy::SelfAvoiding
                } else {
                    StepPolicy::Revisit
                },
            },
            train: TrainConfig {
                window: self.window,
                initial_lr: self.lr,
                negatives: self.negatives,
                seed: self.seed,
                workers: if self.deterministic { 1 } else { self.workers },
                deterministic: self.deterministic || self.workers == 1,
            },
            louvain: LouvainConfig {
                seed: self.seed,
                ..LouvainConfig::default()
            },
            workers: self.workers,
        }
    }

    /// Name for the `dataset` report column: explicit, else the stem of
    /// the first input file.
    pub fn dataset_name(&self) -> String {
        if let Some(name) = &self.dataset {
            return name.clone();
        }
        [&self.edges, &self.embeddings, &self.labels]
            .into_iter()
            .flatten()
            .next()
            .and_then(|p| p.file_stem())
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "unnamed".into())
    }

    /// Every resolved key, in the format [`RunConfig::resolve`] reads back.
    pub fn echo(&self, task: Task) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: &dyn std::fmt::Display| {
            writeln!(s, "{k} = {v}").expect("writing to a String");
        };
        for (key, path) in [
            ("edges", &self.edges),
            ("labels", &self.labels),
            ("embeddings", &self.embeddings),
            ("output", &self.output),
        ] {
            if let Some(p) = path {
                kv(key, &p.display());
            }
        }
        if let Some(d) = &self.dataset {
            kv("dataset", d);
        }
        kv("directed", &self.directed);
        kv("weighted", &self.weighted);
        kv("numeric_ids", &self.numeric_ids);
        kv("alpha", &self.alpha);
        kv("walk_length", &self.walk_length);
        kv("walks_per_node", &self.walks_per_node);
        kv("self_avoiding", &self.self_avoiding);
        kv("dim", &self.dim);
        kv("window", &self.window);
        kv("lr", &self.lr);
        kv("negatives", &self.negatives);
        kv("workers", &self.workers);
        kv("deterministic", &self.deterministic);
        kv("seed", &self.seed);
        kv("train_fraction", &join(&self.train_fractions));
        kv("operator", &join(&self.operators));
        kv("removal_fraction", &self.removal_fraction);
        format!("# care {}\n{s}", task.name())
    }
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn parse_fractions(list: &str) -> Result<Vec<f64>, String> {
    let fractions = list
        .split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|f| *f > 0.0 && *f < 1.0)
                .ok_or_else(|| format!("train fraction `{t}` is not in (0, 1)"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(fractions)
}

fn parse_operators(list: &str) -> Result<Vec<EdgeOperator>, String> {
    if list.trim() == "all" {
        return Ok(EdgeOperator::ALL.to_vec());
    }
    list.split(',').map(|t| t.trim().parse::<EdgeOperator>().map_err(|e| e.to_string())).collect()
}

/// `<output>.config`, the sidecar holding the echoed configuration.
pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".config");
    PathBuf::from(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linkpred_defaults_to_lower_alpha() {
        assert_eq!(RunConfig::defaults(Task::Embed).alpha, 0.2);
        assert_eq!(RunConfig::defaults(Task::EvalLinkpred).alpha, 0.15);
        assert_eq!(RunConfig::defaults(Task::EvalLinkpred).removal_fraction, 0.5);
    }

    #[test]
    fn echo_round_trips() {
        let mut config = RunConfig::defaults(Task::Embed);
        config.edges = Some("g.txt".into());
        config.alpha = 0.35;
        config.seed = 99;
        config.train_fractions = vec![0.25, 0.5];
        config.operators = vec![EdgeOperator::WeightedL2];
        config.deterministic = true;

        let mut back = RunConfig::defaults(Task::Embed);
        back.apply_file(&config.echo(Task::Embed)).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn file_errors_name_the_line() {
        let mut config = RunConfig::defaults(Task::Embed);
        let err = config.apply_file("alpha = 0.1\n\nbogus = 1\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        assert!(config.apply_file("dim 8").is_err());
        assert!(config.apply_file("dim = eight").is_err());
    }

    #[test]
    fn fraction_and_operator_lists() {
        assert_eq!(parse_fractions("0.1, 0.9").unwrap(), vec![0.1, 0.9]);
        assert!(parse_fractions("0.1,1.0").is_err());
        assert_eq!(parse_operators("all").unwrap().len(), 4);
        assert_eq!(
            parse_operators("hadamard,l1").unwrap(),
            vec![EdgeOperator::Hadamard, EdgeOperator::WeightedL1]
        );
    }

    #[test]
    fn sidecar_appends_suffix() {
        assert_eq!(sidecar_path(Path::new("out/emb.txt")), PathBuf::from("out/emb.txt.config"));
    }
}
