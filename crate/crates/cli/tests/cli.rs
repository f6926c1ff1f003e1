use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fluent_core::classtable::{parse_class_table, serialize_class_table};
use fluent_core::reduction::etm_to_classtable;
use fluent_core::turing::parse_tm;

fn fixture(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let local = dir.join("tests/fixtures").join(name);
    let core = dir.join("../core/fixtures");
    [local, core.join(name), core.join("golden").join(name)]
        .into_iter()
        .find(|p| p.exists())
        .expect("fixture")
}

fn fluentgen(args: &[&str]) -> (i32, String) {
    let Output {
        status,
        stdout,
        stderr,
    } = Command::new(env!("CARGO_BIN_EXE_fluentgen"))
        .args(args)
        .output()
        .expect("binary runs");
    let code = status.code().expect("exit code");
    assert!(code != 101, "panic: {}", String::from_utf8_lossy(&stderr));
    (code, String::from_utf8(stdout).unwrap())
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn example_trace_through_the_cli() {
    let ct = fixture("shuttle.ct");
    let q = "Qr E E Z L N L N L N E E Z";
    let (code, out) = fluentgen(&[
        "check-subtype",
        path(&ct),
        q,
        "--fuel",
        "15",
        "--trace",
        "--oriented",
    ]);
    assert_eq!(code, 2);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 17);
    assert_eq!(lines[0], "Z E E Qr ◁ L N L N L N E E Z");
    assert_eq!(lines[7], "Z E E N L N L N L N Qrl ▷ E Z");
    assert_eq!(lines[8], "Z E E N L N L N L N ◁ N Ql E E Z");
    assert_eq!(lines[15], "Z E E ▷ Ql L N L N L N E E Z");
}

#[test]
fn subtype_exit_codes() {
    let ct = fixture("shuttle.ct");
    let ct = path(&ct);
    assert_eq!(fluentgen(&["check-subtype", ct, "Z Z"]).0, 0);
    assert_eq!(
        fluentgen(&["check-subtype", ct, "Qr E E Z L N E E Z", "--fuel", "0"]).0,
        2
    );
    assert_eq!(fluentgen(&["check-subtype", ct, "Z L Z"]).0, 1);
    assert_eq!(fluentgen(&["check-subtype", ct, "Qr E E"]).0, 3);
    assert_eq!(fluentgen(&["check-subtype", "/nonexistent.ct", "Z Z"]).0, 3);
    assert_eq!(fluentgen(&["no-such-command"]).0, 3);
}

#[test]
fn running_machines_and_programs() {
    let anbn = fixture("anbn.tm");
    assert_eq!(fluentgen(&["run-tm", path(&anbn), "a,a,b,b"]).0, 0);
    assert_eq!(fluentgen(&["run-tm", path(&anbn), "a,b,b"]).0, 1);
    assert_eq!(
        fluentgen(&["run-tm", path(&anbn), "a,a,b,b", "--fuel", "3"]).0,
        2
    );
    assert_eq!(fluentgen(&["run-tm", path(&anbn), "a,q"]).0, 3);
    let (code, out) = fluentgen(&["run-tm", path(&anbn), "", "--trace"]);
    assert_eq!(code, 0);
    assert!(out.lines().count() >= 2);

    let p = fixture("ambig_specialized.simper");
    let (code, out) = fluentgen(&["simper-run", path(&p), "a,b,c,d"]);
    assert_eq!(code, 0);
    assert!(out.contains("n = 4"), "{out}");
    assert_eq!(fluentgen(&["simper-run", path(&p), "a,b,c"]).0, 1);
}

#[test]
fn halt_compiles_to_a_tiny_machine() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("halt.simper");
    fs::write(&src, "halt\n").unwrap();
    let out = dir.path().join("halt.tm");
    assert_eq!(
        fluentgen(&["simper-to-tm", path(&src), "-o", path(&out)]).0,
        0
    );
    let m = parse_tm(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(
        (2..=3).contains(&m.states.len()),
        "{} states",
        m.states.len()
    );
    assert_eq!(fluentgen(&["run-tm", path(&out), ""]).0, 0);

    fs::write(&src, "x := y\n").unwrap();
    assert_eq!(fluentgen(&["simper-to-tm", path(&src)]).0, 3);
}

/// Reads the interface block of emitted Java back into class table syntax.
fn table_from_java(java: &str) -> String {
    let mut out = String::new();
    let mut lhs = String::new();
    for line in java.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("interface ") {
            lhs = rest
                .split('<')
                .next()
                .unwrap()
                .split_whitespace()
                .next()
                .unwrap()
                .to_string();
            continue;
        }
        if lhs.is_empty()
            || line.is_empty()
            || line.starts_with("class")
            || line.starts_with("abstract")
        {
            continue;
        }
        let sup = line
            .trim_end_matches(" {}")
            .trim_end_matches(',')
            .replace("? super ", "")
            .replace('>', "");
        let classes: Vec<&str> = sup.split('<').collect();
        out.push_str(&format!("{lhs} x <: {}\n", classes.join(" ")));
    }
    out
}

fn sorted_lines(s: &str) -> Vec<&str> {
    let mut v: Vec<&str> = s.lines().collect();
    v.sort_unstable();
    v
}

#[test]
fn java_interfaces_parse_back_to_the_table() {
    let tm = fixture("increment.tm");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("Inc.java");
    assert_eq!(
        fluentgen(&[
            "tm-to-java",
            path(&tm),
            "--input",
            "1,1,0",
            "-o",
            path(&out)
        ])
        .0,
        0
    );
    let java = fs::read_to_string(&out).unwrap();
    let interfaces = &java[..java.find("class Main").unwrap()];
    let back = parse_class_table(&table_from_java(interfaces)).unwrap();
    let m = parse_tm(&fs::read_to_string(&tm).unwrap()).unwrap();
    let (ct, _) = etm_to_classtable(&m);
    let (a, b) = (serialize_class_table(&back), serialize_class_table(&ct));
    assert_eq!(sorted_lines(&a), sorted_lines(&b));
    assert!(
        java.contains("L_0<? super N<? super L_1<? super N<? super L_1<? super N<? super ML"),
        "query tower"
    );
}

fn manifest(dir: &Path) -> BTreeMap<String, String> {
    fs::read_to_string(dir.join("manifest.txt"))
        .unwrap()
        .lines()
        .map(|l| {
            let (k, v) = l.split_once('=').expect("key=value");
            (k.to_string(), v.to_string())
        })
        .collect()
}

fn num(m: &BTreeMap<String, String>, k: &str) -> usize {
    m[k].parse().unwrap()
}

/// Sizes, hashes and counts in a manifest agree with the files next to it.
fn check_manifest(dir: &Path) -> BTreeMap<String, String> {
    use sha2::{Digest, Sha256};
    let m = manifest(dir);
    for name in [
        "grammar.txt",
        "parser.simper",
        "parser.tm",
        "table.ct",
        "Fluent.java",
        "USAGE.txt",
    ] {
        let bytes = fs::read(dir.join(name)).unwrap();
        assert_eq!(num(&m, &format!("{name}.bytes")), bytes.len(), "{name}");
        assert_eq!(
            m[&format!("{name}.sha256")],
            format!("{:x}", Sha256::digest(&bytes)),
            "{name}"
        );
    }
    let tm = parse_tm(&fs::read_to_string(dir.join("parser.tm")).unwrap()).unwrap();
    assert_eq!(num(&m, "tm.states"), tm.states.len());
    assert_eq!(num(&m, "tm.letters"), tm.alphabet.len());
    // Per state and side: one rule per cell kind on the head, |Σ|+4 while
    // waiting, one for the turn on E. Cells are the letters and the blank.
    let per_side = (tm.alphabet.len() + 1) + (tm.alphabet.len() + 4) + 1;
    let closed_form = 2 * tm.states.len() * per_side;
    let table = fs::read_to_string(dir.join("table.ct")).unwrap();
    let rules = table.lines().filter(|l| l.contains("<:")).count();
    let java = fs::read_to_string(dir.join("Fluent.java")).unwrap();
    let supers = java
        .lines()
        .filter(|l| l.starts_with("  ") && (l.ends_with(',') || l.ends_with("> {}")))
        .count();
    assert_eq!(num(&m, "ct.rules"), closed_form);
    assert_eq!(num(&m, "ct.rules.closed_form"), closed_form);
    assert_eq!(rules, closed_form);
    assert_eq!(supers, closed_form);
    m
}

#[test]
fn grammar_to_java_is_reproducible() {
    let g = fixture("anbn.grammar");
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(
        fluentgen(&["grammar-to-java", path(&g), path(a.path())]).0,
        0
    );
    assert_eq!(
        fluentgen(&["grammar-to-java", path(&g), path(b.path())]).0,
        0
    );
    for name in [
        "manifest.txt",
        "grammar.txt",
        "parser.simper",
        "parser.tm",
        "table.ct",
        "Fluent.java",
        "USAGE.txt",
    ] {
        assert!(
            fs::read(a.path().join(name)).unwrap() == fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
    check_manifest(a.path());
    let usage = fs::read_to_string(a.path().join("USAGE.txt")).unwrap();
    assert!(usage.contains("B.start.a().b().stop()"), "{usage}");
}

#[test]
fn ambig_manifest_matches_closed_form() {
    let g = fixture("ambig.grammar");
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        fluentgen(&["grammar-to-java", path(&g), path(dir.path())]).0,
        0
    );
    let m = check_manifest(dir.path());
    assert_eq!(num(&m, "grammar.terminals"), 4);
}

#[test]
fn fluent_check_verdicts() {
    let g = fixture("ambig.grammar");
    let p = fixture("ambig_specialized.simper");
    let (g, p) = (path(&g), path(&p));
    for (word, want) in [("a,b,c,d", 0), ("a,b,c", 1), ("", 0)] {
        let (code, out) = fluentgen(&["fluent-check", g, word, "--program", p]);
        assert_eq!(code, want, "{word:?}\n{out}");
        assert_eq!(out.lines().count(), 4);
        let verdict = if want == 0 { "ACCEPT" } else { "REJECT" };
        assert!(
            out.lines()
                .all(|l| l.split_whitespace().nth(1) == Some(verdict)),
            "{word:?}\n{out}"
        );
    }
    assert_eq!(fluentgen(&["fluent-check", g, "a,e"]).0, 3);
}

#[test]
fn generated_parser_through_the_machine() {
    let g = fixture("ambig.grammar");
    let g = path(&g);
    let (code, out) = fluentgen(&[
        "fluent-check",
        g,
        "a,d",
        "--layer",
        "tm",
        "--fuel-tm",
        "100000000",
    ]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(
        fluentgen(&[
            "fluent-check",
            g,
            "a,d",
            "--layer",
            "tm",
            "--fuel-tm",
            "1000"
        ])
        .0,
        2
    );
    assert_eq!(
        fluentgen(&["fluent-check", g, "d,a", "--layer", "simper"]).0,
        1
    );
}
