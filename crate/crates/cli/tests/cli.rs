use std::path::Path;
use std::process::Command;

use nilcube::nilgroup::NilSystem;
use nilcube::nilseq_test::{certify, default_schedule, Bounds, Certificate};
use nilcube::sequences::{generate, read_sequence, GeneratorSpec};
use nilcube::uniformity::{dual_function, seminorm, CyclicFunction};
use nilcube_cli::run_with;
use num_complex::Complex64;
use serde_json::Value;

const GOLDEN: f64 = 0.618_033_988_749_894_9;

fn nilcube(args: &[&str]) -> (i32, Value, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("nilcube").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    let report = serde_json::from_slice(&out).unwrap_or(Value::Null);
    (code, report, String::from_utf8(err).unwrap())
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn quadratic_spec() -> String {
    format!(r#"{{"generator": {{"type": "polynomial_phase", "coeffs": [0.0, 0.0, {GOLDEN}]}}}}"#)
}

#[test]
fn gen_then_test_matches_in_memory() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "q.json", &quadratic_spec());
    let seq = dir.path().join("q.jsonl");
    let seq = seq.to_str().unwrap();

    let (code, rep, err) = nilcube(&["gen", "--spec", &spec, "--range", "-400:400", "--out", seq]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(rep["result"]["records"], 801);

    let gen = GeneratorSpec::PolynomialPhase { coeffs: vec![0.0, 0.0, GOLDEN] };
    let a = generate(&gen, -400, 400).unwrap();
    let back = read_sequence(std::io::BufReader::new(std::fs::File::open(seq).unwrap())).unwrap();
    assert_eq!(back.first(), a.first());
    assert!(back
        .values()
        .iter()
        .zip(a.values())
        .all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()));

    let (code, rep, err) = nilcube(&["test", "--seq", seq, "--d", "2", "--eps", "0.5", "--n-max", "60"]);
    let cert: Certificate = serde_json::from_value(rep["result"].clone()).unwrap();
    let direct = certify(&a, 2, 0.5, &default_schedule(), &Bounds::new((-400, 400), 60)).unwrap();
    assert_eq!(cert.without_timing(), direct.clone().without_timing(), "{err}");
    assert_eq!(code, direct.outcome.exit_code());

    // Generating in memory from the spec over the same range gives the same certificate.
    let (code2, rep2, _) =
        nilcube(&["test", "--spec", &spec, "--range", "-400:400", "--d", "2", "--eps", "0.5", "--n-max", "60"]);
    let cert2: Certificate = serde_json::from_value(rep2["result"].clone()).unwrap();
    assert_eq!(cert2.without_timing(), direct.without_timing());
    assert_eq!(code2, code);
}

#[test]
fn certify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "q.json", &quadratic_spec());
    let sched = write(
        dir.path(),
        "s.json",
        &format!(
            r#"{{"generator": {{"type": "polynomial_phase", "coeffs": [0.0, 0.0, {GOLDEN}]}}, "schedule": [[5, 0.2]]}}"#
        ),
    );

    let (code, rep, _) =
        nilcube(&["test", "--spec", &sched, "--k-range", "-300:300", "--d", "2", "--eps", "0.5", "--n-max", "200"]);
    assert_eq!(rep["result"]["outcome"], "FAIL");
    assert_eq!(code, 1);

    // No k survives clipping: every step is excluded.
    let (code, rep, _) =
        nilcube(&["test", "--spec", &spec, "--range", "-50:50", "--d", "2", "--eps", "0.5", "--n-max", "100"]);
    assert_eq!(rep["result"]["outcome"], "INCONCLUSIVE");
    assert_eq!(code, 2);

    let rot = write(
        dir.path(),
        "r.json",
        &format!(r#"{{"system": {{"size": 2, "tau": [{GOLDEN}]}}, "observable": {{"type": "character", "k": [1]}}}}"#),
    );
    let (code, rep, _) =
        nilcube(&["test", "--spec", &rot, "--k-range", "-300:300", "--d", "2", "--eps", "0.1", "--n-max", "100"]);
    assert_eq!(rep["result"]["outcome"], "PASS");
    assert_eq!(code, 0);
}

#[test]
fn violations_stream_and_revalidate() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "q.json", &quadratic_spec());
    let out = dir.path().join("v.jsonl");
    let (code, rep, err) = nilcube(&[
        "violations",
        "--spec",
        &spec,
        "--k-range",
        "-300:300",
        "--d",
        "2",
        "--eps",
        "0.5",
        "--l",
        "5",
        "--delta",
        "0.2",
        "--n-max",
        "200",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let recorded = rep["result"]["recorded"].as_u64().unwrap();
    assert!(recorded > 0);
    let lines: Vec<Value> =
        std::fs::read_to_string(&out).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len() as u64, recorded);
    assert!(lines.iter().all(|v| v["defect"].as_f64().unwrap() >= 0.5));
}

#[test]
fn threads_do_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "q.json", &quadratic_spec());
    let args = |t: &'static str| {
        vec![
            "test",
            "--spec",
            spec.as_str(),
            "--k-range",
            "-300:300",
            "--d",
            "2",
            "--eps",
            "0.5",
            "--n-max",
            "150",
            "--threads",
            t,
        ]
    };
    let strip = |v: Value| serde_json::from_value::<Certificate>(v["result"].clone()).unwrap().without_timing();
    let one = nilcube(&args("1"));
    let four = nilcube(&args("4"));
    assert_eq!(one.0, four.0);
    assert_eq!(strip(one.1), strip(four.1));
}

#[test]
fn function_commands_match_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let values = [0.3, -1.0, 0.25, 0.5, 0.0, 0.75, -0.125, 1.0, 0.0, 0.5];
    let f = write(dir.path(), "f.json", &serde_json::to_string(&values).unwrap());
    let g = write(dir.path(), "g.json", "[[1.0, 0.5], [0.0, -1.0], [0.25, 0.25]]");
    let lib = CyclicFunction::from_real(&values).unwrap();

    let (code, rep, _) = nilcube(&["seminorm", "--fn", &f, "--d", "2"]);
    assert_eq!(code, 0);
    assert_eq!(rep["result"]["value"].as_f64().unwrap(), seminorm(&lib, 2).unwrap());
    assert_eq!(rep["config"]["max_n"], 512);

    let (code, rep, _) = nilcube(&["dual", "--fn", &f, "--d", "3"]);
    assert_eq!(code, 0);
    let got: Vec<Complex64> = serde_json::from_value(rep["result"]["values"].clone()).unwrap();
    assert_eq!(got, dual_function(&lib, 3).unwrap().values());

    let (code, rep, _) = nilcube(&["duality-check", "--fn", &g, "--d", "2"]);
    assert_eq!(code, 0);
    assert_eq!(rep["result"]["pass"], true);
    assert_eq!(rep["result"]["checks"].as_array().unwrap().len(), 3);
}

#[test]
fn configuration_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "u.json", r#"{"d": 2, "colour": "blue"}"#);
    assert_eq!(nilcube(&["test", "--spec", &unknown]).0, 3);
    let nested = write(dir.path(), "n.json", r#"{"system": {"size": 2, "tau": [0.1], "mass": 1}}"#);
    assert_eq!(nilcube(&["profile", "--spec", &nested]).0, 3);
    let wrong = write(dir.path(), "w.json", r#"{"subcommand": "gen"}"#);
    assert_eq!(nilcube(&["test", "--spec", &wrong]).0, 3);
    assert_eq!(nilcube(&["test", "--no-such-flag"]).0, 3);
    assert_eq!(nilcube(&["frobnicate"]).0, 3);
    assert_eq!(nilcube(&["gen", "--range", "5:1"]).0, 3);
    assert_eq!(nilcube(&["seminorm", "--fn", "/nonexistent/f.json", "--d", "2"]).0, 3);
    let (code, _, err) =
        nilcube(&["test", "--spec", &quadratic_spec_file(dir.path()), "--range", "-50:50", "--d", "1", "--eps", "0.5"]);
    assert_eq!(code, 3, "{err}");
    assert_eq!(nilcube(&["--help"]).0, 0);
}

fn quadratic_spec_file(dir: &Path) -> String {
    write(dir, "q.json", &quadratic_spec())
}

#[test]
fn modulus_cap_is_a_runtime_error_and_env_overrides_it() {
    let dir = tempfile::tempdir().unwrap();
    let big = write(dir.path(), "big.json", &serde_json::to_string(&vec![1.0; 600]).unwrap());
    let bin = env!("CARGO_BIN_EXE_nilcube");
    let status =
        Command::new(bin).args(["seminorm", "--fn", &big, "--d", "1"]).env_remove("NILCUBE_MAX_N").output().unwrap();
    assert_eq!(status.status.code(), Some(4));
    let ok =
        Command::new(bin).args(["seminorm", "--fn", &big, "--d", "1"]).env("NILCUBE_MAX_N", "1024").output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let rep: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(rep["config"]["max_n"], 1024);
    assert!((rep["result"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let bad =
        Command::new(bin).args(["seminorm", "--fn", &big, "--d", "1"]).env("NILCUBE_MAX_N", "lots").output().unwrap();
    assert_eq!(bad.status.code(), Some(3));
}

#[test]
fn reports_embed_config_and_version() {
    let dir = tempfile::tempdir().unwrap();
    let rot = write(
        dir.path(),
        "p.json",
        &format!(r#"{{"system": {{"size": 2, "tau": [{GOLDEN}]}}, "x": [0.1], "y": [0.35]}}"#),
    );
    let (code, rep, _) = nilcube(&["profile", "--spec", &rot, "--horizon", "50"]);
    assert_eq!(code, 0);
    assert_eq!(rep["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(rep["config"]["subcommand"], "profile");
    assert_eq!(rep["config"]["horizon"], 50);
    assert_eq!(rep["config"]["system"]["tau"][0].as_f64().unwrap(), GOLDEN);
    let min = rep["result"]["min"].as_f64().unwrap();
    assert!((min - 0.25).abs() < 1e-9);
}

#[test]
fn gen_writes_csv_and_seeded_noise() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "r.json", r#"{"generator": {"type": "random_unit_modulus"}}"#);
    let csv = dir.path().join("a.csv");
    let (code, rep, _) =
        nilcube(&["gen", "--spec", &spec, "--range", "0:99", "--seed", "7", "--out", csv.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(rep["config"]["seed"], 7);
    let back = read_sequence(std::io::BufReader::new(std::fs::File::open(&csv).unwrap())).unwrap();
    let direct = generate(&GeneratorSpec::RandomUnitModulus { seed: 7 }, 0, 99).unwrap();
    assert_eq!(back, direct);
    let (_, rep0, _) = nilcube(&["gen", "--spec", &spec, "--range", "0:9", "--out", csv.to_str().unwrap()]);
    assert_eq!(rep0["config"]["seed"], 0);
}

#[test]
fn rp_and_cube_commands() {
    let dir = tempfile::tempdir().unwrap();
    let skew = NilSystem::skew_product(GOLDEN);
    let tau: Vec<f64> = skew.tau().upper().to_vec();
    // The Heisenberg coordinate order is (x, z, y): fibre point (u, v) = (0, 0.37).
    let rp = write(
        dir.path(),
        "rp.json",
        &serde_json::json!({"system": {"size": 3, "tau": tau}, "x": [0.0, 0.0, 0.0], "y": [0.0, 0.37, 0.0]})
            .to_string(),
    );
    let (code, rep, err) = nilcube(&["rp", "--spec", &rp, "--d", "1", "--delta", "0.01", "--n-max", "5000"]);
    assert_eq!(code, 0, "{err}");
    assert!(rep["result"]["witness"]["achieved"].as_f64().unwrap() < 0.01);
    assert!(rep["result"]["cube_witness"]["achieved"].as_f64().unwrap() < 0.01);

    let gen = write(
        dir.path(),
        "c.json",
        &format!(r#"{{"system": {{"size": 2, "tau": [{GOLDEN}]}}, "start": [0.2], "side": [1, 2]}}"#),
    );
    let (code, rep, _) = nilcube(&["cube", "--spec", &gen]);
    assert_eq!(code, 0);
    assert_eq!(rep["result"]["exponents"], serde_json::json!([0, 1, 2, 3]));
    let verts = rep["result"]["cube"].as_array().unwrap();
    assert_eq!(verts[3]["vertex"], "11");

    let given: Vec<Vec<f64>> =
        (0..3).map(|e: i64| vec![(0.2 + GOLDEN * [0.0, 1.0, 2.0][e as usize]).rem_euclid(1.0)]).collect();
    let comp = write(
        dir.path(),
        "k.json",
        &serde_json::json!({"system": {"size": 2, "tau": [GOLDEN]}, "given": given}).to_string(),
    );
    let (code, rep, err) = nilcube(&["cube", "--spec", &comp, "--d", "2"]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(rep["result"]["method"], "exact");
    let top = rep["result"]["point"]["coords"][0].as_f64().unwrap();
    assert!((top - (0.2 + 3.0 * GOLDEN).rem_euclid(1.0)).abs() < 1e-12);

    // Vertex 011 off the face it spans with 001 and 010.
    let bad: Vec<Vec<f64>> = vec![vec![0.0], vec![0.1], vec![0.2], vec![0.5], vec![0.4], vec![0.5], vec![0.6]];
    let inc = write(
        dir.path(),
        "i.json",
        &serde_json::json!({"system": {"size": 2, "tau": [GOLDEN]}, "given": bad}).to_string(),
    );
    let (code, _, err) = nilcube(&["cube", "--spec", &inc, "--d", "3"]);
    assert_eq!(code, 4);
    assert!(err.contains("inconsistent"));
}
