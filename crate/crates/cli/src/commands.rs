use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;

use care_core::eval::{classify_experiment, linkpred_experiment, load_labels, LinkPredConfig};
use care_core::graph::read_edge_list_file;
use care_core::pipeline::{detect_communities, train_model, walk_corpus};
use care_core::skipgram::{read_word2vec, write_word2vec};
use care_core::{louvain, EvalReport, Graph, Matrix, NodeLabels, Partition};
use log::{info, warn};

use crate::config::{sidecar_path, RunConfig, Task};
use crate::error::{CliError, Stage};

pub fn run(task: Task, config: &RunConfig) -> Result<(), CliError> {
    match task {
        Task::Communities => communities(config)?,
        Task::Walks => walks(config)?,
        Task::Embed => embed(config)?,
        Task::EvalClassify => eval_classify(config)?,
        Task::EvalLinkpred => eval_linkpred(config)?,
    }
    if let Some(out) = &config.output {
        let path = sidecar_path(out);
        fs::write(&path, config.echo(task)).stage(format!("write {}", path.display()))?;
    }
    Ok(())
}

fn load_graph(config: &RunConfig) -> Result<Graph, CliError> {
    let path = config
        .edges
        .as_ref()
        .ok_or_else(|| CliError::Usage("--edges is required".into()))?;
    let g = read_edge_list_file(path, &config.load_options()).stage(format!("load {}", path.display()))?;
    info!(
        "loaded {}: {} nodes, {} edges",
        path.display(),
        g.node_count(),
        g.edge_count()
    );
    Ok(g)
}

/// The output file, or standard output when none is configured.
fn open_output(config: &RunConfig) -> Result<Box<dyn Write>, CliError> {
    match &config.output {
        Some(path) => {
            let file = File::create(path).stage(format!("write {}", path.display()))?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

fn communities(config: &RunConfig) -> Result<(), CliError> {
    let g = load_graph(config)?;
    let partition = louvain(&g, &config.embed_config().louvain).stage("community")?;

    let mut out = open_output(config)?;
    for u in g.nodes() {
        writeln!(out, "{} {}", g.label(u), partition.community_of(u)).stage("write")?;
    }
    out.flush().stage("write")?;
    drop(out);

    let mut histogram = BTreeMap::new();
    for size in partition.sizes() {
        *histogram.entry(size).or_insert(0usize) += 1;
    }
    let histogram: Vec<String> = histogram.iter().map(|(size, n)| format!("{size}:{n}")).collect();
    let summary = format!(
        "communities {}\nmodularity {}\nsize_histogram {}\n",
        partition.community_count(),
        partition.modularity(),
        histogram.join(" ")
    );
    // Keep standard output machine-readable when it already carries the
    // assignment.
    if config.output.is_some() {
        print!("{summary}");
    } else {
        eprint!("{summary}");
    }
    Ok(())
}

fn corpus_stage(
    g: &Graph,
    config: &RunConfig,
) -> Result<(Option<Partition>, care_core::WalkCorpus), CliError> {
    let embed = config.embed_config();
    embed.walk.validate().stage("walk")?;
    let partition = detect_communities(g, &embed).stage("community")?;
    let corpus = walk_corpus(g, partition.as_ref(), &embed).stage("walk")?;
    Ok((partition, corpus))
}

fn walks(config: &RunConfig) -> Result<(), CliError> {
    let g = load_graph(config)?;
    let (_, corpus) = corpus_stage(&g, config)?;
    let mut out = open_output(config)?;
    corpus.write(&g, &mut out).stage("write")?;
    out.flush().stage("write")?;
    Ok(())
}

fn embedding_matrix(g: &Graph, config: &RunConfig) -> Result<Matrix, CliError> {
    let embed = config.embed_config();
    embed.train.validate().stage("train")?;
    let (_, corpus) = corpus_stage(g, config)?;
    let model = train_model(g.node_count(), &corpus, &embed).stage("train")?;
    if !model.is_finite() {
        return Err(CliError::Internal("training produced non-finite vectors".into()));
    }
    Ok(model.into_embedding())
}

fn embed(config: &RunConfig) -> Result<(), CliError> {
    let g = load_graph(config)?;
    let matrix = embedding_matrix(&g, config)?;
    let mut out = open_output(config)?;
    write_word2vec(&g, &matrix, &mut out).stage("write")?;
    out.flush().stage("write")?;
    Ok(())
}

/// Appends rows to the report, writing the header first when the file is
/// new or empty.
fn write_report(config: &RunConfig, rows: &[EvalReport]) -> Result<(), CliError> {
    let mut out: Box<dyn Write> = match &config.output {
        Some(path) => {
            let stage = || format!("write {}", path.display());
            let fresh = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
            let file = OpenOptions::new().create(true).append(true).open(path).stage(stage())?;
            let mut w = BufWriter::new(file);
            if fresh {
                writeln!(w, "{}", EvalReport::CSV_HEADER).stage(stage())?;
            }
            Box::new(w)
        }
        None => {
            let mut w = BufWriter::new(io::stdout().lock());
            writeln!(w, "{}", EvalReport::CSV_HEADER).stage("write")?;
            Box::new(w)
        }
    };
    for row in rows {
        writeln!(out, "{}", row.csv_row()).stage("write")?;
    }
    out.flush().stage("write")?;
    Ok(())
}

fn read_embeddings(path: &Path) -> Result<(NodeLabels, Matrix), CliError> {
    let stage = || format!("load {}", path.display());
    let file = File::open(path).stage(stage())?;
    let (names, matrix) = read_word2vec(BufReader::new(file)).stage(stage())?;
    Ok((NodeLabels::from_names(names), matrix))
}

fn eval_classify(config: &RunConfig) -> Result<(), CliError> {
    let labels_path = config
        .labels
        .as_ref()
        .ok_or_else(|| CliError::Usage("--labels is required".into()))?;
    let (nodes, matrix) = match &config.embeddings {
        Some(path) => read_embeddings(path)?,
        None => {
            let g = load_graph(config)?;
            let matrix = embedding_matrix(&g, config)?;
            (g.labels().clone(), matrix)
        }
    };
    let stage = || format!("load {}", labels_path.display());
    let file = File::open(labels_path).stage(stage())?;
    let labels = load_labels(BufReader::new(file), &nodes).stage(stage())?;

    let dataset = config.dataset_name();
    let mut rows = Vec::with_capacity(config.train_fractions.len());
    for &fraction in &config.train_fractions {
        let result = classify_experiment(&matrix, &labels, fraction, config.seed).stage("eval")?;
        if !result.untrained_labels.is_empty() {
            warn!(
                "train fraction {fraction}: {} labels had no training example",
                result.untrained_labels.len()
            );
        }
        info!(
            "train fraction {fraction}: micro-F1 {:.4}, macro-F1 {:.4}",
            result.scores.micro, result.scores.macro_
        );
        rows.push(EvalReport {
            task: Task::EvalClassify.name().into(),
            dataset: dataset.clone(),
            train_fraction: Some(fraction),
            operator: None,
            alpha: config.alpha,
            seed: config.seed,
            micro_f1: Some(result.scores.micro),
            macro_f1: Some(result.scores.macro_),
            auc: None,
        });
    }
    write_report(config, &rows)
}

fn eval_linkpred(config: &RunConfig) -> Result<(), CliError> {
    let g = load_graph(config)?;
    let lp = LinkPredConfig {
        removal_fraction: config.removal_fraction,
        embed: config.embed_config(),
        seed: config.seed,
    };
    let results = linkpred_experiment(&g, &lp, &config.operators).stage("eval")?;
    let dataset = config.dataset_name();
    let rows: Vec<EvalReport> = results
        .into_iter()
        .map(|(op, auc)| {
            info!("{op}: AUC {auc:.4}");
            EvalReport {
                task: Task::EvalLinkpred.name().into(),
                dataset: dataset.clone(),
                train_fraction: None,
                operator: Some(op),
                alpha: config.alpha,
                seed: config.seed,
                micro_f1: None,
                macro_f1: None,
                auc: Some(auc),
            }
        })
        .collect();
    write_report(config, &rows)
}
