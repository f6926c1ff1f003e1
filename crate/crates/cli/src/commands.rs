use std::fs;
use std::path::Path;

use fluent_core::classtable::{parse_class_table, SubtypeQuery};
use fluent_core::grammar::{generate_cyk_simper, parse_grammar, preprocess, Grammar};
use fluent_core::pipeline::{coherent, FluentPipeline, Fuel, Layer, Verdict};
use fluent_core::reduction::{emit_java_file, etm_to_classtable, initial_query};
use fluent_core::simper::{desugar, parse_simper, typecheck, ExecOutcome, Interpreter, Program};
use fluent_core::simper2tm::compile_for;
use fluent_core::subtyper::{run, RunOutcome};
use fluent_core::turing::{parse_tm, serialize_tm, tm_step_mut, ExtendedTM, LetterId, TmConfig};

use crate::{CliError, LayerArg, Status};

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn write_out(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Comma-separated symbols; the empty string is the empty word.
pub fn split_word(w: &str) -> Vec<String> {
    if w.is_empty() {
        Vec::new()
    } else {
        w.split(',').map(|s| s.trim().to_string()).collect()
    }
}

pub fn load_tm(path: &Path) -> Result<ExtendedTM, CliError> {
    parse_tm(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn load_simper(path: &Path) -> Result<Program, CliError> {
    let p = parse_simper(&read(path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    typecheck(&desugar(&p)).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(p)
}

pub fn load_grammar(path: &Path) -> Result<Grammar, CliError> {
    parse_grammar(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn letters(m: &ExtendedTM, word: &str) -> Result<Vec<LetterId>, CliError> {
    let w = split_word(word);
    let refs: Vec<&str> = w.iter().map(String::as_str).collect();
    m.word(&refs).map_err(CliError::input)
}

pub fn check_subtype(
    table: &Path,
    query: &str,
    fuel: u64,
    trace: bool,
    oriented: bool,
) -> Result<Status, CliError> {
    let ct = parse_class_table(&read(table)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", table.display())))?;
    let text = if Path::new(query).is_file() {
        read(Path::new(query))?
    } else {
        query.to_string()
    };
    let q = SubtypeQuery::parse(&text).map_err(|e| CliError::Input(format!("query: {e}")))?;
    let r = run(&ct, &q, fuel, trace);
    for (i, c) in r.trace.iter().flatten().enumerate() {
        if oriented {
            println!("{}", c.render_oriented(i as u64));
        } else {
            println!("{c}");
        }
    }
    Ok(match r.outcome {
        RunOutcome::HaltedAccept => {
            println!("SUBTYPE after {} steps", r.steps_taken);
            Status::Accept
        }
        RunOutcome::Stuck(why) => {
            println!("NOT SUBTYPE after {} steps: {why}", r.steps_taken);
            Status::Reject
        }
        RunOutcome::OutOfFuel => {
            println!("UNKNOWN: out of fuel after {} steps", r.steps_taken);
            Status::Unknown
        }
        RunOutcome::AmbiguousError => {
            return Err(CliError::Input(format!(
                "{}: not deterministic, several chains apply after {} steps",
                table.display(),
                r.steps_taken
            )))
        }
    })
}

pub fn run_tm(path: &Path, input: &str, fuel: u64, trace: bool) -> Result<Status, CliError> {
    let m = load_tm(path)?;
    let word = letters(&m, input)?;
    let mut c = TmConfig::initial(&m, &word);
    let mut steps = 0;
    // Spin states loop forever, so stopping on one already decides the run.
    let settled = |c: &TmConfig| c.state == m.halt || m.is_spin_state(c.state);
    if trace {
        println!("{}", c.render(&m));
    }
    while !settled(&c) && steps < fuel {
        tm_step_mut(&m, &mut c);
        steps += 1;
        if trace {
            println!("{}", c.render(&m));
        }
    }
    Ok(if c.state == m.halt {
        println!("HALTED after {steps} steps");
        Status::Accept
    } else if m.is_spin_state(c.state) {
        println!(
            "REJECTED: spin state `{}` entered after {steps} steps",
            m.state_name(c.state)
        );
        Status::Reject
    } else {
        println!("UNKNOWN: out of fuel after {steps} steps");
        Status::Unknown
    })
}

pub fn simper_run(path: &Path, input: &str, fuel: u64) -> Result<Status, CliError> {
    let p = load_simper(path)?;
    let it = Interpreter::new(&desugar(&p)).map_err(CliError::input)?;
    let (r, env) = it.run_env(&split_word(input), fuel);
    for (x, v) in &env {
        println!("{x} = {v}");
    }
    Ok(match r.outcome {
        ExecOutcome::Halted => {
            println!("HALTED after {} steps", r.steps);
            Status::Accept
        }
        ExecOutcome::StuckEnd => {
            println!("STUCK at the end after {} steps", r.steps);
            Status::Reject
        }
        ExecOutcome::RuntimeError(e) => {
            println!("RUNTIME ERROR after {} steps: {e}", r.steps);
            Status::Reject
        }
        ExecOutcome::OutOfFuel => {
            println!("UNKNOWN: out of fuel after {} steps", r.steps);
            Status::Unknown
        }
    })
}

pub fn simper_to_tm(
    path: &Path,
    out: Option<&Path>,
    alphabet: &[String],
) -> Result<Status, CliError> {
    let p = load_simper(path)?;
    let c = compile_for(&p, alphabet).map_err(CliError::input)?;
    eprintln!(
        "{} states, {} letters",
        c.tm.states.len(),
        c.tm.alphabet.len()
    );
    write_out(out, &serialize_tm(&c.tm))?;
    Ok(Status::Accept)
}

pub fn tm_to_java(path: &Path, input: &str, out: Option<&Path>) -> Result<Status, CliError> {
    let m = load_tm(path)?;
    let word = letters(&m, input)?;
    let (ct, nm) = etm_to_classtable(&m);
    let q = initial_query(&m, &ct, &nm, &word);
    write_out(out, &emit_java_file(&ct, &m, &nm, &q))?;
    Ok(Status::Accept)
}

pub fn grammar_to_simper(path: &Path, out: Option<&Path>) -> Result<Status, CliError> {
    let g = load_grammar(path)?;
    write_out(out, &generate_cyk_simper(&preprocess(&g)).to_string())?;
    Ok(Status::Accept)
}

pub fn fluent_check(
    grammar: &Path,
    word: &str,
    layer: LayerArg,
    program: Option<&Path>,
    fuel: Fuel,
) -> Result<Status, CliError> {
    let g = load_grammar(grammar)?;
    let program = program.map(load_simper).transpose()?;
    let pipe = FluentPipeline::new(g, program).map_err(|e| CliError::Internal(e.to_string()))?;
    let layers: Vec<Layer> = match layer {
        LayerArg::Oracle => vec![Layer::Oracle],
        LayerArg::Simper => vec![Layer::Simper],
        LayerArg::Tm => vec![Layer::Tm],
        LayerArg::Subtype => vec![Layer::Subtype],
        LayerArg::All => Layer::ALL.to_vec(),
    };
    let word = split_word(word);
    let reports = pipe.check(&word, &layers, fuel).map_err(|e| match e {
        fluent_core::pipeline::PipelineError::UnknownTerminal(_) => CliError::input(e),
        e => CliError::Internal(e.to_string()),
    })?;
    for r in &reports {
        let note = if r.note.is_empty() {
            String::new()
        } else {
            format!("  ({})", r.note)
        };
        println!(
            "{:<8} {:<8} {:>12} steps{note}",
            r.layer, r.verdict, r.steps
        );
    }
    if !coherent(&reports) {
        println!("DISAGREEMENT");
        return Ok(Status::Internal);
    }
    let has = |v| reports.iter().any(|r| r.verdict == v);
    Ok(if has(Verdict::Accept) {
        Status::Accept
    } else if has(Verdict::Reject) {
        Status::Reject
    } else {
        Status::Unknown
    })
}
