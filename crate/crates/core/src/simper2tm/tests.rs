use super::*;
use crate::simper::fixtures::SPECIALIZED;
use crate::simper::{parse_simper, ExecOutcome, Interpreter};
use crate::turing::{tm_run, tm_run_settle, tm_step_mut, validate_etm, TmConfig, TmOutcome};

fn letters(s: &str) -> Vec<Letter> {
    s.split_whitespace().map(Letter::new).collect()
}

fn nat(n: u64) -> SimperValue {
    SimperValue::Nat(n)
}

#[test]
fn rep_of_small_values() {
    assert_eq!(rep(&nat(6)), letters("b0 b1 b1"));
    assert_eq!(rep(&nat(0)), letters("b0"));
    assert_eq!(rep(&SimperValue::Sym("a".into())), letters("a"));
    assert_eq!(rep(&SimperValue::Sym("b1".into())), letters("s_b1"));
    let m = SimperValue::Array {
        dims: vec![2, 2],
        elems: [0, 1, 2, 3].map(nat).to_vec(),
    };
    let want = "dl_1 dl_0 b0 dr_0 dl_0 b1 dr_0 dr_1 dl_1 dl_0 b0 b1 dr_0 dl_0 b1 b1 dr_0 dr_1";
    assert_eq!(rep(&m), letters(want));
}

#[test]
fn decode_inverts_rep() {
    let t = SimperType::array(2, SimperType::Nat);
    let m = SimperValue::Array {
        dims: vec![2, 3],
        elems: (0..6).map(nat).collect(),
    };
    assert_eq!(decode_rep(&rep(&m), &t).unwrap(), m);
    let s = SimperValue::Sym("x,y".into());
    assert_eq!(decode_rep(&rep(&s), &SimperType::Sym).unwrap(), s);
    assert!(decode_rep(&letters("b1 b0"), &SimperType::Nat).is_err());
    assert!(decode_rep(
        &letters("dl_0 b0 dr_0 b0"),
        &SimperType::array(1, SimperType::Nat)
    )
    .is_err());
    let ragged = letters("dl_1 dl_0 b0 dr_0 dr_1 dl_1 dr_1");
    assert!(decode_rep(&ragged, &t).is_err());
}

#[test]
fn sym_letters_round_trip() {
    for s in ["a", "hash", "b0", "", "x y", "_", "é"] {
        assert_eq!(letter_sym(&sym_letter(s)).as_deref(), Some(s), "{s:?}");
    }
}

#[test]
fn nested_index_is_hoisted() {
    let p = parse_simper("a := array[2](0) b := array[2](1) i := 0 a[b[i]] := 0").unwrap();
    let q = preprocess_array_accesses(&p);
    assert!(q.to_string().ends_with("$n0 := b[i]\na[$n0] := 0\n"), "{q}");
    let r = parse_simper("a := array[3](0) a[a[a[1]]] := 2").unwrap();
    let q = preprocess_array_accesses(&r);
    assert!(
        q.to_string()
            .ends_with("$n0 := 1\n$n1 := a[$n0]\n$n2 := a[$n1]\na[$n2] := 2\n"),
        "{q}"
    );
}

#[test]
fn array_free_programs_are_unchanged() {
    let p = parse_simper("x := 0 l: ++x if x != 3 && x != 4 { goto l } halt").unwrap();
    assert_eq!(preprocess_array_accesses(&p), p);
}

#[test]
fn guarded_hoists_keep_short_circuit() {
    let src = "a := array[1](0) i := 1 if i == 0 && a[a[i]] == 0 { halt }";
    let p = parse_simper(src).unwrap();
    let q = preprocess_array_accesses(&p);
    // a[i] is out of bounds: evaluating it unguarded would fault
    let r = Interpreter::new(&q).unwrap().run::<&str>(&[], 1000);
    assert_eq!(r.outcome, ExecOutcome::StuckEnd);
    assert_eq!(
        Interpreter::new(&p).unwrap().run::<&str>(&[], 1000).outcome,
        ExecOutcome::StuckEnd
    );
}

/// Runs both semantics on every word and compares verdicts and, on halting,
/// every variable of the program.
fn agree(src: &str, words: &[Vec<&str>], fuel: u64) {
    let p = parse_simper(src).unwrap();
    let alphabet: Vec<&str> = words.iter().flatten().copied().collect();
    let c = compile_for(&p, &alphabet).unwrap();
    assert!(validate_etm(&c.tm).is_empty());
    assert!(c.tm.delta.iter().all(|t| t.write.len() <= 2));
    let it = Interpreter::new(&desugar(&p)).unwrap();
    for w in words {
        let (r, env) = it.run_env(w, 1 << 20);
        let input = c.encode_input(w).unwrap();
        let t = tm_run_settle(&c.tm, &input, fuel);
        match r.outcome {
            ExecOutcome::Halted => {
                assert!(
                    matches!(t.outcome, TmOutcome::Halted(_)),
                    "{w:?}: machine did not halt"
                );
                let tape = c.decode_tape(&t.last).unwrap();
                // a program without data never lays out its zones
                for (x, v) in env.iter().filter(|_| !c.layout.zones.is_empty()) {
                    assert_eq!(tape.get(x).map(flat), Some(flat(v)), "{w:?}: variable {x}");
                }
            }
            ExecOutcome::StuckEnd | ExecOutcome::RuntimeError(_) => {
                assert!(
                    c.tm.is_spin_state(t.last.state),
                    "{w:?}: expected a spin, got {:?}",
                    t.outcome
                )
            }
            ExecOutcome::OutOfFuel => panic!("interpreter fuel too small"),
        }
    }
}

/// Empty arrays keep no inner extents on tape.
fn flat(v: &SimperValue) -> SimperValue {
    match v {
        SimperValue::Array { dims, elems } if elems.is_empty() => SimperValue::Array {
            dims: vec![0; dims.len()],
            elems: vec![],
        },
        v => v.clone(),
    }
}

fn all_words<'a>(alphabet: &[&'a str], max: usize) -> Vec<Vec<&'a str>> {
    let mut out = vec![vec![]];
    let mut layer = vec![vec![]];
    for _ in 0..max {
        layer = layer
            .iter()
            .flat_map(|w: &Vec<&str>| alphabet.iter().map(move |a| [w.clone(), vec![*a]].concat()))
            .collect();
        out.extend(layer.clone());
    }
    out
}

#[test]
fn halt_alone() {
    agree("halt", &[vec![], vec!["a"]], 10_000);
    agree("x := \"a\" halt", &[vec![], vec!["a", "a"]], 10_000);
}

#[test]
fn data_free_programs_leave_the_tape_alone() {
    let m = compile(&parse_simper("halt").unwrap()).unwrap();
    assert_eq!(m.states.len(), 3, "{}", crate::turing::serialize_tm(&m));
    agree("goto m k: halt m: goto k", &[vec![], vec!["a"]], 1000);
    agree("goto l l: halt", &[vec![], vec!["a", "a"]], 1000);
}

#[test]
fn empty_program_spins() {
    agree("", &[vec![]], 10_000);
}

#[test]
fn counting_to_three() {
    let src = "x := 0 l: ++x if x == 3 { halt } goto l";
    agree(src, &[vec![]], 100_000);
    let p = parse_simper(src).unwrap();
    let c = compile_full(&p).unwrap();
    let t = tm_run(&c.tm, &[], 100_000, false);
    let tape = c.decode_tape(&t.last).unwrap();
    assert_eq!(tape["x"], nat(3));
    let zones = c.zones_of(&t.last).unwrap();
    assert_eq!(zones[c.layout.zone("x").unwrap()], letters("b1 b1"));
}

#[test]
fn three_increments_then_compare() {
    let p = parse_simper("x := 0 ++x ++x ++x y := 3 if x == y { halt }").unwrap();
    let c = compile_full(&p).unwrap();
    let t = tm_run(&c.tm, &[], 100_000, false);
    assert!(matches!(t.outcome, TmOutcome::Halted(_)));
    let x = &c.zones_of(&t.last).unwrap()[c.layout.zone("x").unwrap()];
    assert_eq!(decode_rep(x, &SimperType::Nat).unwrap(), nat(3));
}

#[test]
fn zones_stay_intact_while_running() {
    let c = compile_full(&parse_simper(SPECIALIZED).unwrap()).unwrap();
    for w in [
        vec!["a", "a", "b", "b", "c", "d"],
        vec!["a", "b", "c"],
        vec![],
    ] {
        let mut cfg = TmConfig::initial(&c.tm, &c.encode_input(&w).unwrap());
        let mut zoned = false;
        for step in 0..200_000u32 {
            if cfg.state == c.tm.halt || c.tm.is_spin_state(cfg.state) {
                break;
            }
            if step % 7 == 0 {
                match c.zones_of(&cfg) {
                    Ok(_) => zoned = true,
                    Err(e) => assert!(!zoned, "{w:?} step {step}: {e}"),
                }
            }
            tm_step_mut(&c.tm, &mut cfg);
        }
        assert!(zoned);
        assert!(c.zones_of(&cfg).is_ok());
    }
}

#[test]
fn arithmetic_on_counters() {
    let src = "x := n y := 0 l: if x != 0 { --x ++y ++y goto l } --y --y --y if y == 5 || n == 0 { halt }";
    let a = ["a"];
    agree(src, &all_words(&a, 6), 1 << 22);
}

#[test]
fn symbol_copies_and_comparisons() {
    let src = r#"
        i := 0 last := "none"
        while i != n { c := input[i] if c == "b" || c == last { last := c } else { last := "none" } ++i }
        if last == "b" { halt }
    "#;
    agree(src, &all_words(&["a", "b"], 5), 1 << 22);
}

#[test]
fn arrays_in_two_dimensions() {
    let src = r#"
        t := array[n, 3](0) i := 0
        while i != n { j := 0 while j != 3 { if input[i] == "b" { t[i, j] := j ++t[i, j] } ++j } ++i }
        s := t u := array[2, n](s[0, 0])
        if n != 0 { if t[0, 2] == 3 { halt } }
    "#;
    agree(src, &all_words(&["a", "b"], 3), 1 << 24);
}

#[test]
fn out_of_bounds_spins() {
    agree("a := array[2](0) x := a[n]", &all_words(&["a"], 3), 1 << 20);
}

#[test]
fn unassigned_read_spins() {
    agree(
        "l: if n == 1 { goto m } x := 0 m: y := x halt",
        &all_words(&["a"], 1),
        1 << 20,
    );
}

#[test]
fn zero_extent_arrays() {
    agree(
        "a := array[n, 2](\"z\") b := a halt",
        &all_words(&["a"], 2),
        1 << 20,
    );
}

#[test]
fn specialized_parser_agrees() {
    agree(SPECIALIZED, &all_words(&["a", "b", "c", "d"], 6), 1 << 24);
}

#[test]
fn state_count_is_linear_in_size() {
    let body = "x := input[i] if x == \"a\" { ++c[i] } ";
    let ratios: Vec<f64> = [1, 4, 16]
        .iter()
        .map(|&k| {
            let src = format!("c := array[n](0) i := 0 {}", body.repeat(k));
            let p = parse_simper(&src).unwrap();
            let m = compile(&p).unwrap();
            let reject = m.state_id(crate::turing::REJECT);
            let explicit = m.delta.iter().filter(|t| Some(t.to) != reject).count();
            (m.states.len() + explicit) as f64 / p.size() as f64
        })
        .collect();
    let (lo, hi) = ratios
        .iter()
        .fold((f64::MAX, 0f64), |(a, b), &r| (a.min(r), b.max(r)));
    assert!(hi / lo < 1.5, "{ratios:?}");
}
