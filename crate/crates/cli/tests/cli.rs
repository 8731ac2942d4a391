use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use claimscope_core::evaluation::report::{read_results, write_results, ResultRow};
use claimscope_core::{generate_synthetic, write_corpus, Corpus, Label, Protocol, SyntheticParams};
use tempfile::TempDir;

fn claimscope(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_claimscope"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_synthetic(dir: &Path, name: &str, seed: u64, n_docs: usize) -> PathBuf {
    let c = generate_synthetic(&SyntheticParams { seed, n_docs, ..Default::default() }).unwrap();
    let path = dir.join(format!("{name}.jsonl"));
    let mut f = fs::File::create(&path).unwrap();
    write_corpus(&c, &mut f).unwrap();
    path
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, body).unwrap();
    path
}

fn corpora_table(names: &[&str]) -> String {
    let mut s = String::from("[corpora]\n");
    for n in names {
        s.push_str(&format!("{n} = \"{n}.jsonl\"\n"));
    }
    s
}

fn results(dir: &Path) -> Vec<ResultRow> {
    read_results(fs::File::open(dir.join("results.csv")).unwrap()).unwrap()
}

#[test]
fn validate_reports_rows_and_errors() {
    let tmp = TempDir::new().unwrap();
    write_synthetic(tmp.path(), "SYN", 1, 10);
    let ok = claimscope(&["validate", "SYN.jsonl", "--format", "csv"], tmp.path());
    assert!(ok.status.success(), "{}", stderr(&ok));
    let out = stdout(&ok);
    assert!(out.starts_with("corpus,documents,tokens,sentences,claims,claim_ratio_pct\nSYN,10,"), "{out}");

    let good = fs::read_to_string(tmp.path().join("SYN.jsonl")).unwrap();
    let first = good.lines().next().unwrap();
    fs::write(tmp.path().join("bad.jsonl"), format!("{first}\n{{\"id\": \"x\", \"sentences\": [\n")).unwrap();
    let bad = claimscope(&["validate", "bad.jsonl"], tmp.path());
    assert!(!bad.status.success());
    assert!(stderr(&bad).contains("line 2"), "{}", stderr(&bad));

    fs::write(tmp.path().join("empty.jsonl"), "").unwrap();
    let empty = claimscope(&["validate", "empty.jsonl", "--format", "csv"], tmp.path());
    assert!(empty.status.success());
    assert!(stdout(&empty).contains("empty,0,0,0,0,0.00"), "{}", stdout(&empty));
}

#[test]
fn stats_prints_markdown_rows() {
    let tmp = TempDir::new().unwrap();
    write_synthetic(tmp.path(), "A", 1, 12);
    write_synthetic(tmp.path(), "B", 2, 12);
    let o = claimscope(&["stats", "A.jsonl", "B.jsonl"], tmp.path());
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("| A | 12 |") && out.contains("| B | 12 |"), "{out}");
}

#[test]
fn run_baselines_is_reproducible() {
    let tmp = TempDir::new().unwrap();
    write_synthetic(tmp.path(), "SYN", 3, 20);
    let cfg = write_config(
        tmp.path(),
        &format!("systems = [\"MAJORITY\", \"RANDOM\"]\nprotocols = [\"IN_DOMAIN\"]\n{}", corpora_table(&["SYN"])),
    );
    let cfg = cfg.to_str().unwrap();
    let o = claimscope(&["run", cfg, "--out", "r1"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = results(&tmp.path().join("r1"));
    assert_eq!(rows.iter().filter(|r| r.is_overall()).count(), 2);
    assert_eq!(rows.len(), 2 * 11);
    let majority = rows.iter().find(|r| r.system == "MAJORITY" && r.is_overall()).unwrap();
    assert_eq!(majority.tp + majority.fp, 0);

    let again = claimscope(&["run", cfg, "--out", "r2", "--fresh", "--jobs", "1"], tmp.path());
    assert!(again.status.success());
    let a = fs::read(tmp.path().join("r1/results.csv")).unwrap();
    let b = fs::read(tmp.path().join("r2/results.csv")).unwrap();
    assert_eq!(a, b);
    for f in ["tables.md", "manifest.json", "splits/SYN.json"] {
        assert!(tmp.path().join("r1").join(f).exists(), "{f}");
    }
    // manifests differ only in the output location
    let manifest = |d: &str| {
        let mut v: serde_json::Value =
            serde_json::from_slice(&fs::read(tmp.path().join(d).join("manifest.json")).unwrap()).unwrap();
        v["config"]["out"] = serde_json::Value::Null;
        v
    };
    assert_eq!(manifest("r1"), manifest("r2"));

    // a different seed changes the random baseline
    let other = claimscope(&["run", cfg, "--out", "r3", "--seed", "9"], tmp.path());
    assert!(other.status.success());
    assert_ne!(fs::read(tmp.path().join("r3/results.csv")).unwrap(), a);
}

#[test]
fn lodo_over_six_corpora() {
    let tmp = TempDir::new().unwrap();
    let names = ["MT", "OC", "PE", "VG", "WD", "WTP"];
    for (i, n) in names.iter().enumerate() {
        write_synthetic(tmp.path(), n, i as u64, 8);
    }
    let cfg = write_config(
        tmp.path(),
        &format!("systems = [\"MAJORITY\", \"KEYWORD\"]\nprotocols = [\"LODO\"]\n{}", corpora_table(&names)),
    );
    let o = claimscope(&["run", cfg.to_str().unwrap()], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = results(&tmp.path().join("results"));
    for system in ["MAJORITY", "KEYWORD"] {
        let r: Vec<&ResultRow> = rows.iter().filter(|r| r.system == system).collect();
        assert_eq!(r.len(), 6);
        assert!(r.iter().all(|r| r.protocol == Protocol::Lodo && r.source.split('+').count() == 5));
    }
    let md = fs::read_to_string(tmp.path().join("results/tables.md")).unwrap();
    assert!(md.contains("Leave-one-domain-out"));
}

#[test]
fn failed_jobs_are_isolated() {
    let tmp = TempDir::new().unwrap();
    write_synthetic(tmp.path(), "GOOD", 1, 12);
    // a corpus without claims cannot train a classifier
    let mut c: Corpus = generate_synthetic(&SyntheticParams { seed: 2, n_docs: 12, ..Default::default() }).unwrap();
    for s in c.documents.iter_mut().flat_map(|d| d.sentences.iter_mut()) {
        s.label = Label::NonClaim;
        for t in &mut s.tokens {
            t.claim_label = claimscope_core::ClaimLabel::Other;
        }
    }
    write_corpus(&c, fs::File::create(tmp.path().join("NOCLAIM.jsonl")).unwrap()).unwrap();
    let cfg = write_config(
        tmp.path(),
        &format!(
            "systems = [\"LR_PLUS_LEXICAL\", \"MAJORITY\"]\nprotocols = [\"CROSS_DOMAIN\"]\nn_members = 2\n{}",
            corpora_table(&["GOOD", "NOCLAIM"])
        ),
    );
    let o = claimscope(&["run", cfg.to_str().unwrap()], tmp.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("CROSS_DOMAIN__LR_PLUS_LEXICAL__NOCLAIM__GOOD"), "{}", stderr(&o));
    let rows = results(&tmp.path().join("results"));
    // three of the four jobs produced a row
    assert_eq!(rows.len(), 3);
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(tmp.path().join("results/manifest.json")).unwrap()).unwrap();
    let failed: Vec<&serde_json::Value> =
        manifest["jobs"].as_array().unwrap().iter().filter(|j| j["status"] == "failed").collect();
    assert_eq!(failed.len(), 1);
    assert!(tmp.path().join("results/jobs/CROSS_DOMAIN__LR_PLUS_LEXICAL__NOCLAIM__GOOD.error").exists());
}

fn grid_rows(systems: &[&str], names: &[&str], seed: u64) -> Vec<ResultRow> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for system in systems {
        for s in names {
            for t in names.iter().filter(|t| *t != s) {
                let rep = claimscope_core::ConfusionMatrix {
                    tp: rng.random_range(5..50),
                    fp: rng.random_range(5..50),
                    fn_: rng.random_range(5..50),
                    tn: rng.random_range(100..300),
                }
                .report();
                rows.push(ResultRow::new(system, Protocol::CrossDomain, s, t, None, &rep, 0, "h"));
            }
        }
    }
    rows
}

#[test]
fn analyze_full_grid() {
    let tmp = TempDir::new().unwrap();
    let names = ["MT", "OC", "PE", "VG", "WD", "WTP"];
    for (i, n) in names.iter().enumerate() {
        write_synthetic(tmp.path(), n, 10 + i as u64, 10);
    }
    let systems: Vec<String> = (1..=15).map(|i| format!("SYS{i:02}")).collect();
    let system_refs: Vec<&str> = systems.iter().map(String::as_str).collect();
    let mut rows = grid_rows(&system_refs, &names, 4);
    // an exact copy of one system under a parseable name for the comparison
    rows.extend(rows.clone().into_iter().filter(|r| r.system == "SYS01").map(|mut r| {
        r.system = "LR_ALL".into();
        r
    }));
    rows.extend(rows.clone().into_iter().filter(|r| r.system == "SYS01").map(|mut r| {
        r.system = "MAJORITY".into();
        r
    }));
    let mut buf = Vec::new();
    write_results(&rows, &mut buf).unwrap();
    fs::write(tmp.path().join("results.csv"), buf).unwrap();
    let cfg = write_config(
        tmp.path(),
        &format!(
            "systems = [\"MAJORITY\"]\n{}[analysis]\ntop_lemmas = 100\ncompare = [[\"LR_ALL\", \"MAJORITY\"]]\n",
            corpora_table(&names)
        ),
    );
    let o = claimscope(&["analyze", "results.csv", cfg.to_str().unwrap(), "--out", "analysis"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let out = tmp.path().join("analysis");
    let reg = fs::read_to_string(out.join("regression.csv")).unwrap();
    let models: std::collections::BTreeSet<&str> =
        reg.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(models.len(), 17);
    assert!(systems.iter().all(|s| models.contains(s.as_str())));
    // 9 terms per model, one aliased
    assert_eq!(reg.lines().filter(|l| l.starts_with("SYS01,")).count(), 9);
    assert_eq!(reg.lines().filter(|l| l.starts_with("SYS01,") && l.contains(",true,")).count(), 1);

    let sim = fs::read_to_string(out.join("similarity.md")).unwrap();
    for n in names {
        assert!(sim.contains(&format!("| {n} |")));
    }
    assert_eq!(sim.matches(" 100 |").count(), 6);

    let sig = fs::read_to_string(out.join("significance.csv")).unwrap();
    let line = sig.lines().find(|l| l.contains("CROSS_DOMAIN") && l.contains("macro_f1")).unwrap();
    assert!(line.ends_with(",false"), "{line}");
    assert!(line.contains(",1.0,"), "{line}");
}

#[test]
fn analyze_rejects_incomplete_grid() {
    let tmp = TempDir::new().unwrap();
    let names = ["A", "B", "C"];
    for (i, n) in names.iter().enumerate() {
        write_synthetic(tmp.path(), n, i as u64, 6);
    }
    let mut rows = grid_rows(&["LR_ALL"], &names, 1);
    rows.retain(|r| !(r.source == "B" && r.target == "C"));
    let mut buf = Vec::new();
    write_results(&rows, &mut buf).unwrap();
    fs::write(tmp.path().join("results.csv"), buf).unwrap();
    let cfg = write_config(tmp.path(), &format!("systems = [\"LR_ALL\"]\n{}", corpora_table(&names)));
    let o = claimscope(&["analyze", "results.csv", cfg.to_str().unwrap()], tmp.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("(B,C)"), "{}", stderr(&o));
}

#[test]
fn gen_synthetic_writes_corpus_and_embeddings() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("p.toml"), "n_docs = 15\nclaim_ratio = 0.3\n").unwrap();
    let o = claimscope(
        &["gen-synthetic", "--params", "p.toml", "--seed", "5", "--embedding-dim", "4", "--out", "gen", "--format", "csv"],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("SYN5,15,"));
    let v = claimscope(&["validate", "gen/SYN5.jsonl"], tmp.path());
    assert!(v.status.success());
    let table = claimscope_core::load_embeddings(tmp.path().join("gen/SYN5.vectors.txt")).unwrap();
    assert_eq!(table.dim, 4);
    assert!(table.get("should").is_some());
}
