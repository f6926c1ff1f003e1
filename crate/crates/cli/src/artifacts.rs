use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use fluent_core::classtable::{serialize_class_table, validate};
use fluent_core::grammar::{generate_cyk_simper, grammar_size, preprocess, CykOracle, Grammar};
use fluent_core::reduction::{
    emit_builder, emit_java_interfaces, etm_to_classtable, expected_rule_count,
};
use fluent_core::simper2tm::{compile_for, sym_letter};
use fluent_core::turing::{serialize_tm, validate_etm, Letter};

use crate::commands::{load_grammar, load_simper, read};
use crate::{CliError, Status};

pub const MANIFEST: &str = "manifest.txt";

/// The first accepted and the first rejected nonempty word of up to six letters.
fn samples(g: &Grammar) -> (Option<Vec<String>>, Option<Vec<String>>) {
    let oracle = CykOracle::new(g);
    let (mut yes, mut no) = (None, None);
    let mut layer: Vec<Vec<String>> = vec![Vec::new()];
    for _ in 0..6 {
        layer = layer
            .iter()
            .flat_map(|w| {
                g.terminals
                    .iter()
                    .map(move |t| [w.as_slice(), std::slice::from_ref(t)].concat())
            })
            .collect();
        for w in &layer {
            let slot = if oracle.accepts(w) { &mut yes } else { &mut no };
            if slot.is_none() {
                *slot = Some(w.clone());
            }
        }
        if yes.is_some() && no.is_some() {
            break;
        }
    }
    (yes, no)
}

fn usage(g: &Grammar) -> String {
    let mut s = String::from(
        "Fluent.java holds one interface per class of the generated table and\n\
         an abstract builder B. A chain of builder calls type checks exactly\n\
         when the word it spells belongs to the grammar's language.\n\n",
    );
    let chain = |w: &[String]| -> String {
        w.iter()
            .map(|t| format!(".{}()", builder_call(t)))
            .collect()
    };
    let (yes, no) = samples(g);
    if let Some(w) = yes {
        let _ = writeln!(s, "Compiles, since `{}` is in the language:\n", w.join(" "));
        let _ = writeln!(
            s,
            "    E<? super E<? super Z>> ok = B.start{}.stop();\n",
            chain(&w)
        );
    }
    if let Some(w) = no {
        let _ = writeln!(s, "Fails to compile, since `{}` is not:\n", w.join(" "));
        let _ = writeln!(
            s,
            "    E<? super E<? super Z>> bad = B.start{}.stop();\n",
            chain(&w)
        );
    }
    s.push_str("Builder methods, one per terminal:\n");
    for t in &g.terminals {
        let _ = writeln!(s, "    {t:<12} {}()", builder_call(t));
    }
    s.push_str("\nPut either line in a method of a class next to Fluent.java and run `javac`.\n");
    s
}

fn builder_call(terminal: &str) -> String {
    fluent_core::reduction::builder_method_name(&sym_letter(terminal))
}

/// Writes every artifact of the grammar-to-Java pipeline plus a manifest of
/// sizes, counts and hashes. Output depends only on the input files.
pub fn grammar_to_java(
    grammar: &Path,
    program: Option<&Path>,
    out_dir: &Path,
) -> Result<Status, CliError> {
    let grammar_text = read(grammar)?;
    let g = load_grammar(grammar)?;
    let program = match program {
        Some(p) => load_simper(p)?,
        None => generate_cyk_simper(&preprocess(&g)),
    };
    let compiled = compile_for(&program, &g.terminals).map_err(CliError::input)?;
    let m = &compiled.tm;
    if let Some(d) = validate_etm(m).first() {
        return Err(CliError::Internal(format!(
            "generated machine: {} on {}: {}",
            d.state, d.read, d.message
        )));
    }
    let (ct, _) = etm_to_classtable(m);
    let report = validate(&ct);
    if !report.is_ok() {
        return Err(CliError::Internal(format!(
            "generated class table: {:?}",
            report.diagnostics.first()
        )));
    }
    if ct.rules().len() != expected_rule_count(m) {
        return Err(CliError::Internal(
            "rule count differs from the closed form".into(),
        ));
    }

    let letters: Vec<Letter> = g
        .terminals
        .iter()
        .map(|t| Letter::new(sym_letter(t)))
        .collect();
    let mut java = emit_java_interfaces(&ct);
    java.push('\n');
    java.push_str(&emit_builder(m, &letters));

    let files: [(&str, String); 6] = [
        ("grammar.txt", grammar_text),
        ("parser.simper", program.to_string()),
        ("parser.tm", serialize_tm(m)),
        ("table.ct", serialize_class_table(&ct)),
        ("Fluent.java", java),
        ("USAGE.txt", usage(&g)),
    ];
    fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Input(format!("{}: {e}", out_dir.display())))?;

    let mut manifest = String::new();
    let mut kv = |k: &str, v: &dyn std::fmt::Display| {
        let _ = writeln!(manifest, "{k}={v}");
    };
    kv("grammar.size", &grammar_size(&g));
    kv("grammar.terminals", &g.terminals.len());
    kv("simper.size", &program.size());
    kv("tm.states", &m.states.len());
    kv("tm.letters", &m.alphabet.len());
    kv("ct.interfaces", &(ct.class_count() + 1));
    kv("ct.rules", &ct.rules().len());
    kv("ct.rules.closed_form", &expected_rule_count(m));
    for (name, text) in &files {
        let path = out_dir.join(name);
        fs::write(&path, text)
            .map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))?;
        kv(&format!("{name}.bytes"), &text.len());
        kv(
            &format!("{name}.sha256"),
            &format!("{:x}", Sha256::digest(text.as_bytes())),
        );
    }
    let path = out_dir.join(MANIFEST);
    fs::write(&path, &manifest)
        .map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))?;
    print!("{manifest}");
    Ok(Status::Accept)
}
