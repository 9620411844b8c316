use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn leanaug(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_leanaug")).args(args).output().unwrap()
}

fn core_fixture(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(rel)
        .to_string_lossy()
        .into_owned()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn parse_round_trips_the_fixture_corpus() {
    let out = stdout(&leanaug(&["parse", &core_fixture("round_trip.lean")]));
    assert!(out.lines().all(|l| l.starts_with("ok ")));
    assert!(out.lines().count() >= 50);
}

#[test]
fn parse_reports_failures_with_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "bad.lean", "theorem bad (a : ℝ) : a = := by sorry\n");
    let o = leanaug(&["parse", p.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("FAIL bad"));
}

#[test]
fn evolve_ast_replays_the_recorded_seed() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "seed.lean",
        "theorem evolved_thm (x y : ℝ) (h₀ : x * y = 4) (h₁ : x > y) (h₂ : x^3 - y^3 = 3555) : x^2 + y^2 = 233 := by sorry\n",
    );
    let out = stdout(&leanaug(&[
        "evolve-ast",
        p.to_str().unwrap(),
        "--seed",
        "1",
        "--probability",
        "1",
        "--variants",
        "1",
        "--rules",
        "hypothesis_reordering,commutativity,symmetric_operand_swap,dual_relation_conversion",
    ]));
    let rec: serde_json::Value = serde_json::from_str(out.lines().next().unwrap()).unwrap();
    assert_eq!(
        rec["output"],
        "theorem evolved_thm_auged (x y : ℝ) (h₁ : y < x) (h₂ : 3555 = x^3 - y^3) (h₀ : 4 = y * x) : 233 = y^2 + x^2 := by sorry"
    );
    assert_eq!(rec["method"], "ast");
}

#[test]
fn closure_listing() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "s.lean", "theorem t (a b c : ℝ) : a + b = c := by sorry\n");
    let out = stdout(&leanaug(&["evolve-ast", p.to_str().unwrap(), "--closure", "1", "--rules", "commutativity,symmetric_operand_swap"]));
    assert_eq!(out.lines().count(), 3);
}

#[test]
fn mock_run_is_deterministic_and_balanced() {
    let seeds = core_fixture("pipeline/seeds.jsonl");
    let run = |dir: &Path, jobs: &str| {
        let out = dir.join("out.jsonl");
        let o = leanaug(&["run", "--mock", "--seed", "5", "--jobs", jobs, "--input", &seeds, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let stats = dir.join("out.jsonl.stats.json");
        (std::fs::read(&out).unwrap(), std::fs::read(stats).unwrap())
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (ra, sa) = run(a.path(), "1");
    let (rb, sb) = run(b.path(), "4");
    assert_eq!(ra, rb);
    assert_eq!(sa, sb);
    assert!(!ra.is_empty());
}

#[test]
fn run_reads_a_toml_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.jsonl");
    let cfg = write(
        dir.path(),
        "cfg.toml",
        &format!(
            "input = {:?}\noutput = {:?}\nrng_seed = 2\n\n[methods]\ndomain = true\ndifficulty = false\nast = false\n\n[mock]\nenabled = true\n",
            core_fixture("pipeline/seeds.jsonl"),
            out.to_string_lossy()
        ),
    );
    let o = leanaug(&["run", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["provenance"]["method"], "domain");
        assert_eq!(v["verification"]["status"], "accepted");
    }
}

#[test]
fn decontaminate_drops_renamed_copies() {
    let dir = tempfile::tempdir().unwrap();
    let bench = write(
        dir.path(),
        "bench.jsonl",
        concat!(
            r#"{"id":"b1","formal_statement":"theorem b1 (x : ℝ) (h : 2 * x = 4) : x = 2 := by sorry"}"#,
            "\n",
            r#"{"id":"b2","formal_statement":"theorem b2 (n : ℕ) (h : n > 1) : n ^ 2 > n := by sorry"}"#,
            "\n"
        ),
    );
    let corpus = write(
        dir.path(),
        "corpus.jsonl",
        concat!(
            r#"{"id":"c1","formal_statement":"theorem c1 (y : ℝ) (hy : 2 * y = 4) : y = 2 := by sorry","extra":1}"#,
            "\n",
            r#"{"id":"c2","formal_statement":"theorem c2 (m : ℕ) (h : 1 < m) : n ^ 2 > n := by sorry"}"#,
            "\n",
            r#"{"id":"c3","formal_statement":"theorem c3 (x : ℝ) : x = x := by sorry"}"#,
            "\n"
        ),
    );
    let out = dir.path().join("clean.jsonl");
    let o = leanaug(&[
        "decontaminate",
        corpus.to_str().unwrap(),
        "--benchmark",
        bench.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let kept = std::fs::read_to_string(&out).unwrap();
    let ids: Vec<String> = kept
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["id"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(ids, ["c2", "c3"]);
    let drops: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("clean.jsonl.drops.json")).unwrap()).unwrap();
    assert_eq!(drops["drops"][0]["benchmark_id"], "b1");
}

#[test]
fn stats_histogram_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write(
        dir.path(),
        "c.jsonl",
        &["Algebra", "Algebra", "Geometry", "Algebra"]
            .iter()
            .enumerate()
            .map(|(i, d)| format!(r#"{{"id":"{i}","formal_statement":"theorem t{i} : 1 = 1 := by sorry","domain":"{d}"}}"#))
            .collect::<Vec<_>>()
            .join("\n"),
    );
    let out = stdout(&leanaug(&["stats", corpus.to_str().unwrap(), "--json"]));
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["histogram"]["Algebra"], 3);
    assert_eq!(v["histogram"]["Geometry"], 1);
}

#[test]
fn stats_classifier_writes_a_review_file() {
    let dir = tempfile::tempdir().unwrap();
    let review = dir.path().join("review.csv");
    let o = leanaug(&["stats", "--mock", "--classify", "--review", review.to_str().unwrap(), &core_fixture("pipeline/seeds.jsonl")]);
    stdout(&o);
    let text = std::fs::read_to_string(review).unwrap();
    assert!(text.starts_with("id,predicted_domain,decision,formal_statement"));
    assert_eq!(text.lines().count(), 1 + 2);
}

#[test]
fn mock_evolve_and_verify_chain() {
    let dir = tempfile::tempdir().unwrap();
    let variants = dir.path().join("v.jsonl");
    let seeds = core_fixture("pipeline/seeds.jsonl");
    let o = leanaug(&["evolve-difficulty", "--mock", &seeds, "--strategy", "s2+", "--out", variants.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&variants).unwrap();
    assert_eq!(text.lines().count(), 30);
    assert!(text.contains(r#""strategy":"s2+""#));
    let reports = stdout(&leanaug(&["verify", "--mock", variants.to_str().unwrap()]));
    assert_eq!(reports.lines().count(), 30);
    assert!(reports.lines().all(|l| l.contains(r#""final":{"status":"accepted"}"#)));

    let domain = stdout(&leanaug(&["evolve-domain", "--mock", &seeds, "--domains", "Geometry,Integral"]));
    for l in domain.lines() {
        let v: serde_json::Value = serde_json::from_str(l).unwrap();
        assert!(["Geometry", "Integral"].contains(&v["domain"].as_str().unwrap()));
    }
}

#[test]
fn missing_toolchain_is_a_clear_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.toml",
        "[lean]\ncommand = [\"/nonexistent/lean-binary\"]\n\n[mock]\nenabled = false\n",
    );
    let pairs = write(dir.path(), "p.jsonl", r#"{"id":"a","formal_statement":"theorem a : 1 = 1 := by sorry"}"#);
    let o = Command::new(env!("CARGO_BIN_EXE_leanaug"))
        .args(["verify", "--config", cfg.to_str().unwrap(), pairs.to_str().unwrap()])
        .env("LEANAUG_API_KEY", "test")
        .output()
        .unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("Lean toolchain not available"));
}

#[test]
fn example_config_loads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../config.example.toml");
    let text = std::fs::read_to_string(cfg)
        .unwrap()
        .replace(r#"benchmarks = ["data/minif2f.jsonl"]"#, "benchmarks = []");
    let cfg = write(dir.path(), "cfg.toml", &text);
    let out = dir.path().join("o.jsonl");
    let o = leanaug(&[
        "run",
        "--mock",
        "--config",
        cfg.to_str().unwrap(),
        "--input",
        &core_fixture("pipeline/seeds.jsonl"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(std::fs::read_to_string(out).unwrap().lines().count() > 0);
}
