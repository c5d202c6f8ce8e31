use std::path::Path;
use std::process::Command;

use lastmult::lagrangian::match_lagrangian;
use lastmult::multiplier::constant_ratio;
use lastmult::shell::{
    bundled_corpus_dir, derive, load_problem, numcheck, problem_from_str, run_corpus, verify, DeriveOptions,
    ProblemError, EXIT_FAIL, EXIT_NOTHING, EXIT_OK,
};
use lastmult::symcore::{is_zero, parse, Expr};

fn corpus(name: &str) -> std::path::PathBuf {
    bundled_corpus_dir().join(format!("{name}.json"))
}

fn same(a: &Expr, b: &str, params: &[String]) -> bool {
    is_zero(&(a.clone() - parse(b, params).unwrap())).is_zero()
}

#[test]
fn riccati_has_eight_symmetries() {
    let p = load_problem(&corpus("riccati")).unwrap();
    assert_eq!(p.symmetries.len(), 8);
    assert_eq!(p.combined.len(), 1);
    assert!(same(&p.combined[0].tau, "x*t^3 - t^2", &[]));
}

#[test]
fn lienard_pair_is_kept() {
    let p = load_problem(&corpus("lienard")).unwrap();
    let lf = p.lienard.as_ref().unwrap();
    let ps = p.ode.params.clone();
    assert!(same(&lf.f, "k*x", &ps));
    assert!(same(&lf.g, "k^2*x^3/9 + lam*x", &ps));
}

#[test]
fn both_forms_is_a_schema_violation() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("both.json");
    std::fs::write(&f, r#"{"schema":1,"name":"both","ode":{"F":"-x","f":"1","g":"x"}}"#).unwrap();
    match load_problem(&f) {
        Err(ProblemError::Schema { pointer, .. }) => assert_eq!(pointer, "/ode"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn parse_errors_carry_pointer_and_position() {
    let err = problem_from_str(r#"{"schema":1,"name":"p","ode":{"F":"-x"},"expected":{"integrals":["x +* 1"]}}"#)
        .unwrap_err();
    let text = err.to_string();
    assert!(text.contains("/expected/integrals/0"), "{text}");
    assert!(text.contains('3'), "{text}");
}

#[test]
fn free_particle() {
    let p = problem_from_str(
        r#"{"schema":1,"name":"free","ode":{"F":"0"},
            "symmetries":[{"label":"A","tau":"0","xi":"1"},{"label":"B","tau":"0","xi":"t"}]}"#,
    )
    .unwrap();
    let r = derive(&p, &DeriveOptions::default());
    assert!(r.passed(), "{:?}", r.failures);
    let pair = r.multipliers.iter().find(|m| m.route == "symmetries A, B").unwrap();
    assert!(constant_ratio(&parse(&pair.expr, &[]).unwrap(), &Expr::one()));
    let owner = pair.duplicate_of.as_ref().unwrap_or(&pair.label);
    let l = r.lagrangians.iter().find(|l| &l.multiplier == owner).unwrap();
    let built = parse(l.expr.as_deref().unwrap(), &[]).unwrap();
    assert!(match_lagrangian(&built, &parse("xdot^2/2", &[]).unwrap()).matched());
}

#[test]
fn reports_are_deterministic() {
    let p = load_problem(&corpus("mathews-lakshmanan")).unwrap();
    let a = derive(&p, &DeriveOptions::default()).to_json();
    let b = derive(&p, &DeriveOptions::default()).to_json();
    assert_eq!(a, b);
}

#[test]
fn verify_and_numcheck_on_goldens() {
    let p = load_problem(&corpus("riccati")).unwrap();
    let r = verify(&p);
    assert!(r.passed(), "{:?}", r.failures);
    assert_eq!(r.goldens.len(), 14);
    let n = numcheck(&p);
    assert!(n.passed(), "{:?}", n.failures);
    assert_eq!(n.numeric.unwrap().drift.len(), 10);
}

fn copy_problem(name: &str, dir: &Path, edit: impl Fn(String) -> String) {
    let text = std::fs::read_to_string(corpus(name)).unwrap();
    std::fs::write(dir.join(format!("{name}.json")), edit(text)).unwrap();
}

#[test]
fn corrupted_golden_fails_the_corpus() {
    let dir = tempfile::tempdir().unwrap();
    copy_problem("critically-damped", dir.path(), |s| s.replace("(xdot + x)^(-2)", "(xdot + x)^(-3)"));
    copy_problem("nonautonomous", dir.path(), |s| s);
    let out = dir.path().join("out");
    let run = run_corpus(dir.path(), Some(&out), &DeriveOptions::default()).unwrap();
    assert_eq!(run.exit_code(), EXIT_FAIL);
    assert_eq!(run.summary.problems.len(), 2);
    assert!(run.summary.failing.iter().any(|f| f.contains("critically-damped") && f.contains("multiplier M")));
    assert!(out.join("summary.json").exists());
    assert!(out.join("nonautonomous.report.json").exists());
}

#[test]
fn empty_directory_has_nothing_to_run() {
    let dir = tempfile::tempdir().unwrap();
    let run = run_corpus(dir.path(), None, &DeriveOptions::default()).unwrap();
    assert_eq!(run.exit_code(), EXIT_NOTHING);
}

#[test]
fn cli_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_lastmult");
    let dir = tempfile::tempdir().unwrap();
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap();

    let empty = status(&["corpus", "--dir", dir.path().to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(empty.status.code(), Some(EXIT_NOTHING));

    let missing = status(&["derive", dir.path().join("nope.json").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(EXIT_NOTHING));

    let out = dir.path().join("cd.report.json");
    let ok = status(&["derive", corpus("critically-damped").to_str().unwrap(), "--seed", "7", "--out", out.to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["seed"], 7);
    assert_eq!(report["schema"], 1);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, std::fs::read_to_string(corpus("critically-damped")).unwrap().replace("-log(xdot + x)", "log(xdot)")).unwrap();
    let failed = status(&["verify", bad.to_str().unwrap()]);
    assert_eq!(failed.status.code(), Some(EXIT_FAIL));
    assert!(String::from_utf8_lossy(&failed.stderr).contains("lagrangian L"));
}
