use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BARBELL: &str = "0 1\n1 2\n0 2\n3 4\n4 5\n3 5\n2 3\n";

fn care(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_care"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("spawn care")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// Newman modularity of an undirected unit-weight edge list, summed
/// directly over node pairs.
fn pairwise_modularity(edges: &[(usize, usize)], community: &[usize]) -> f64 {
    let n = community.len();
    let mut a = vec![vec![0.0; n]; n];
    for &(u, v) in edges {
        a[u][v] += 1.0;
        a[v][u] += 1.0;
    }
    let k: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if community[i] == community[j] {
                q += a[i][j] - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

#[test]
fn barbell_communities() {
    let dir = TempDir::new().unwrap();
    let edges = write(&dir, "barbell.txt", BARBELL);
    let out_path = dir.path().join("barbell.com");
    let out = care(&["communities", "--edges", s(&edges), "-o", s(&out_path)]);
    assert!(out.status.success(), "{}", stderr(&out));

    let text = fs::read_to_string(&out_path).unwrap();
    let assignment: Vec<usize> = text
        .lines()
        .enumerate()
        .map(|(i, line)| {
            let (node, c) = line.split_once(' ').unwrap();
            assert_eq!(node, i.to_string());
            c.parse().unwrap()
        })
        .collect();
    assert_eq!(assignment, vec![0, 0, 0, 1, 1, 1]);

    let summary = stdout(&out);
    assert!(summary.contains("communities 2"), "{summary}");
    let q: f64 = summary
        .lines()
        .find_map(|l| l.strip_prefix("modularity "))
        .unwrap()
        .parse()
        .unwrap();
    let pairs = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)];
    assert!((q - pairwise_modularity(&pairs, &assignment)).abs() < 1e-12);
    assert!((q - 5.0 / 14.0).abs() < 1e-12);
    assert!(summary.contains("size_histogram 3:2"));
}

#[test]
fn edgeless_input_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    let edges = write(&dir, "empty.txt", "# nothing\n");
    let out = care(&["communities", "--edges", s(&edges)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("graph has no edges"));
}

#[test]
fn parse_errors_carry_file_and_line() {
    let dir = TempDir::new().unwrap();
    let edges = write(&dir, "bad.txt", "0 1\n0 x\n");
    let out = care(&["embed", "--edges", s(&edges), "--numeric-ids"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("bad.txt") && err.contains("line 2"), "{err}");
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(care(&["embed"]).status.code(), Some(1));
    assert_eq!(care(&["embed", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(care(&["frobnicate"]).status.code(), Some(1));

    let dir = TempDir::new().unwrap();
    let edges = write(&dir, "g.txt", BARBELL);
    let config = write(&dir, "run.config", "alpha = 0.1\nwalk_lenght = 3\n");
    let out = care(&["walks", "--edges", s(&edges), "--config", s(&config)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("walk_lenght"));

    let out = care(&["walks", "--edges", s(&edges), "--alpha", "1.5"]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}

#[test]
fn two_node_embedding_shape() {
    let dir = TempDir::new().unwrap();
    let edges = write(&dir, "pair.txt", "a b\n");
    let out = care(&["embed", "--edges", s(&edges), "--dim", "4", "--deterministic"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "2 4");
    assert_eq!(lines.len(), 3);
    for line in &lines[1..] {
        let fields: Vec<&str> = line.split(' ').collect();
        assert_eq!(fields.len(), 5);
        assert!(fields[1..].iter().all(|x| x.parse::<f64>().unwrap().is_finite()));
    }
}

#[test]
fn walk_dump_counts_and_replays() {
    let dir = TempDir::new().unwrap();
    let edges = write(&dir, "g.txt", "0 1\n1 2\n2 3\n3 4\n4 0\n");
    let out = care(&[
        "walks",
        "--edges",
        s(&edges),
        "--walks-per-node",
        "2",
        "--walk-length",
        "6",
        "--alpha",
        "0",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 10);
    for line in text.lines() {
        let walk: Vec<i32> = line.split(' ').map(|t| t.parse().unwrap()).collect();
        assert_eq!(walk.len(), 6);
        // Without community jumps every step follows a cycle edge.
        for pair in walk.windows(2) {
            assert!(matches!((pair[0] - pair[1]).rem_euclid(5), 1 | 4), "{line}");
        }
    }
}

#[test]
fn isolated_node_gets_a_single_node_walk() {
    let dir = TempDir::new().unwrap();
    let edges = write(&dir, "g.txt", "0 1\n1 2\nlonely\n");
    let out = care(&["walks", "--edges", s(&edges), "--walks-per-node", "1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().any(|l| l == "lonely"));
}

#[test]
fn deterministic_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let edges = write(&dir, "g.txt", BARBELL);
    let run = |name: &str| {
        let path = dir.path().join(name);
        let out = care(&[
            "embed",
            "--edges",
            s(&edges),
            "--dim",
            "8",
            "--seed",
            "7",
            "--deterministic",
            "-o",
            s(&path),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        fs::read(path).unwrap()
    };
    assert_eq!(run("a.txt"), run("b.txt"));
}

#[test]
fn echoed_config_reproduces_the_run() {
    let dir = TempDir::new().unwrap();
    let edges = write(&dir, "g.txt", BARBELL);
    let first = dir.path().join("first.txt");
    let out = care(&[
        "embed",
        "--edges",
        s(&edges),
        "--dim",
        "6",
        "--alpha",
        "0.4",
        "--window",
        "3",
        "--seed",
        "11",
        "--deterministic",
        "-o",
        s(&first),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let echo = dir.path().join("first.txt.config");
    assert!(fs::read_to_string(&echo).unwrap().contains("alpha = 0.4"));

    let second = dir.path().join("second.txt");
    let out = care(&["embed", "--config", s(&echo), "-o", s(&second)]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(fs::read(first).unwrap(), fs::read(second).unwrap());
}

/// Two well-separated clusters: the embedding itself determines the label.
fn one_hot_fixture(dir: &TempDir) -> (PathBuf, PathBuf) {
    let mut emb = String::from("100 2\n");
    let mut labels = String::new();
    for u in 0..100 {
        let group = u / 50;
        let x = if group == 0 { 5 } else { -5 };
        emb += &format!("n{u} {x} {}\n", -x);
        labels += &format!("n{u} {}\n", if group == 0 { "red" } else { "blue" });
    }
    (write(dir, "onehot.emb", &emb), write(dir, "onehot.labels", &labels))
}

#[test]
fn classification_sweep_rows() {
    let dir = TempDir::new().unwrap();
    let (emb, labels) = one_hot_fixture(&dir);
    let report = dir.path().join("report.csv");
    let out = care(&[
        "eval-classify",
        "--embeddings",
        s(&emb),
        "--labels",
        s(&labels),
        "-o",
        s(&report),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&report).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "task,dataset,train_fraction,operator,alpha,seed,micro_f1,macro_f1,auc");
    assert_eq!(lines.len(), 10);
    for row in &lines[1..] {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells[0], "eval-classify");
        assert_eq!(cells[1], "onehot");
        assert_eq!(cells[6], "1", "{row}");
        assert_eq!(cells[7], "1", "{row}");
    }

    // A second run appends without repeating the header.
    let out = care(&[
        "eval-classify",
        "--embeddings",
        s(&emb),
        "--labels",
        s(&labels),
        "--train-fraction",
        "0.5",
        "-o",
        s(&report),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&report).unwrap();
    assert_eq!(text.lines().count(), 11);
    assert_eq!(text.matches("task,").count(), 1);
}

#[test]
fn classification_without_known_labels_fails() {
    let dir = TempDir::new().unwrap();
    let (emb, _) = one_hot_fixture(&dir);
    let labels = write(&dir, "none.labels", "");
    let out = care(&["eval-classify", "--embeddings", s(&emb), "--labels", s(&labels)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn inline_embedding_classification() {
    let dir = TempDir::new().unwrap();
    let edges = write(&dir, "g.txt", BARBELL);
    let labels = write(&dir, "g.labels", "0 a\n1 a\n2 a\n3 b\n4 b\n5 b\n");
    let out = care(&[
        "eval-classify",
        "--edges",
        s(&edges),
        "--labels",
        s(&labels),
        "--dim",
        "8",
        "--train-fraction",
        "0.5",
        "--deterministic",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 2);
}

#[test]
fn link_prediction_rows_per_operator() {
    // Two 8-cliques joined by one edge.
    let mut text = String::new();
    for base in [0, 8] {
        for u in 0..8 {
            for v in u + 1..8 {
                text += &format!("{} {}\n", base + u, base + v);
            }
        }
    }
    text += "7 8\n";
    let dir = TempDir::new().unwrap();
    let edges = write(&dir, "cliques.txt", &text);
    let out = care(&[
        "eval-linkpred",
        "--edges",
        s(&edges),
        "--dim",
        "8",
        "--walks-per-node",
        "4",
        "--walk-length",
        "20",
        "--operator",
        "all",
        "--deterministic",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report = stdout(&out);
    let rows: Vec<&str> = report.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    for (row, op) in rows.iter().zip(["hadamard", "average", "weighted-l1", "weighted-l2"]) {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells[3], op);
        assert_eq!(cells[4], "0.15");
        let auc: f64 = cells[8].parse().unwrap();
        assert!((0.0..=1.0).contains(&auc));
    }
}
