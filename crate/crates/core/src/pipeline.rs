//! Membership of a word in a grammar's language, decided at four layers:
//! the grammar itself, a Simper parser, the machine compiled from it, and
//! subtyping over the class table of that machine.

use std::fmt;
use std::ops::ControlFlow;
use std::sync::OnceLock;

use thiserror::Error;

use crate::classtable::ClassTable;
use crate::grammar::{generate_cyk_simper, preprocess, CykOracle, Grammar};
use crate::reduction::{etm_to_classtable, in_spin_state, initial_raw_config, ReductionNaming};
use crate::simper::{desugar, ExecOutcome, InterpError, Interpreter, Program};
use crate::simper2tm::{compile_for, CompileError, Compiled};
use crate::subtyper::{Engine, RawOutcome};
use crate::turing::{tm_run_settle, TmOutcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Layer {
    Oracle,
    Simper,
    Tm,
    Subtype,
}

impl Layer {
    pub const ALL: [Layer; 4] = [Layer::Oracle, Layer::Simper, Layer::Tm, Layer::Subtype];
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Layer::Oracle => "oracle",
            Layer::Simper => "simper",
            Layer::Tm => "tm",
            Layer::Subtype => "subtype",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Accept,
    Reject,
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Accept => "ACCEPT",
            Verdict::Reject => "REJECT",
            Verdict::Unknown => "UNKNOWN",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fuel {
    pub simper: u64,
    pub tm: u64,
    pub subtype: u64,
}

impl Default for Fuel {
    fn default() -> Self {
        Fuel {
            simper: 1_000_000,
            tm: 10_000_000,
            subtype: 100_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerReport {
    pub layer: Layer,
    pub verdict: Verdict,
    pub steps: u64,
    /// How a rejection or an unknown verdict came about.
    pub note: String,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("`{0}` is not a terminal of the grammar")]
    UnknownTerminal(String),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Interp(#[from] InterpError),
    #[error("the subtyping run became ambiguous after {0} steps")]
    Ambiguous(u64),
}

fn log2_ceil(t: u64) -> u64 {
    (64 - t.saturating_add(1).leading_zeros() as u64).max(1)
}

/// Steps after which a machine compiled from a program of size `p` that ran
/// `t` Simper steps without halting is taken to reject: `p·t²·log²t`.
pub fn tm_fuel_bound(p: usize, t: u64) -> u64 {
    let (t, l) = (t.max(1), log2_ceil(t));
    (p as u64)
        .saturating_mul(t.saturating_mul(t))
        .saturating_mul(l * l)
}

/// The same for subtyping over the reduction: `p²·t³·log³t`.
pub fn subtype_fuel_bound(p: usize, t: u64) -> u64 {
    let (t, l) = (t.max(1), log2_ceil(t));
    let p = p as u64;
    p.saturating_mul(p)
        .saturating_mul(t.saturating_mul(t).saturating_mul(t))
        .saturating_mul(l * l * l)
}

/// Artifacts shared by all checks against one grammar.
pub struct FluentPipeline {
    pub grammar: Grammar,
    pub oracle: CykOracle,
    pub program: Program,
    interp: Interpreter,
    pub compiled: Compiled,
    reduction: OnceLock<(ClassTable, ReductionNaming)>,
}

impl FluentPipeline {
    /// Uses the generated CYK parser unless `program` replaces it.
    pub fn new(grammar: Grammar, program: Option<Program>) -> Result<Self, PipelineError> {
        let program = program.unwrap_or_else(|| generate_cyk_simper(&preprocess(&grammar)));
        let interp = Interpreter::new(&desugar(&program))?;
        let compiled = compile_for(&program, &grammar.terminals)?;
        Ok(FluentPipeline {
            oracle: CykOracle::new(&grammar),
            grammar,
            program,
            interp,
            compiled,
            reduction: OnceLock::new(),
        })
    }

    /// The class table of the compiled machine, built on first use.
    pub fn reduction(&self) -> &(ClassTable, ReductionNaming) {
        self.reduction
            .get_or_init(|| etm_to_classtable(&self.compiled.tm))
    }

    pub fn check<S: AsRef<str>>(
        &self,
        word: &[S],
        layers: &[Layer],
        fuel: Fuel,
    ) -> Result<Vec<LayerReport>, PipelineError> {
        if let Some(bad) = word
            .iter()
            .find(|a| !self.grammar.terminals.iter().any(|t| t == a.as_ref()))
        {
            return Err(PipelineError::UnknownTerminal(bad.as_ref().to_string()));
        }
        let simper = self.interp.run(word, fuel.simper);
        // Step count behind the rejection bounds; unbounded if the run did not end.
        let t = (simper.outcome != ExecOutcome::OutOfFuel).then_some(simper.steps);
        let p = self.program.size();
        let bounded = |steps: u64, bound: Option<u64>| match bound {
            Some(b) if steps >= b => (Verdict::Reject, format!("no halt within the bound {b}")),
            _ => (Verdict::Unknown, "out of fuel".to_string()),
        };
        let mut out = Vec::with_capacity(layers.len());
        for &layer in layers {
            let (verdict, steps, note) = match layer {
                Layer::Oracle => {
                    let v = if self.oracle.accepts(word) {
                        Verdict::Accept
                    } else {
                        Verdict::Reject
                    };
                    (v, 0, String::new())
                }
                Layer::Simper => match &simper.outcome {
                    ExecOutcome::Halted => (Verdict::Accept, simper.steps, String::new()),
                    ExecOutcome::StuckEnd => {
                        (Verdict::Reject, simper.steps, "ran off the end".into())
                    }
                    ExecOutcome::RuntimeError(e) => (Verdict::Reject, simper.steps, e.clone()),
                    ExecOutcome::OutOfFuel => {
                        (Verdict::Unknown, simper.steps, "out of fuel".into())
                    }
                },
                Layer::Tm => {
                    let m = &self.compiled.tm;
                    let input = self
                        .compiled
                        .encode_input(word)
                        .expect("terminals are in the alphabet");
                    let r = tm_run_settle(m, &input, fuel.tm);
                    match r.outcome {
                        TmOutcome::Halted(s) => (Verdict::Accept, s, String::new()),
                        _ if m.is_spin_state(r.last.state) => {
                            (Verdict::Reject, r.steps, "entered a spin state".into())
                        }
                        _ => {
                            let (v, n) = bounded(r.steps, t.map(|t| tm_fuel_bound(p, t)));
                            (v, r.steps, n)
                        }
                    }
                }
                Layer::Subtype => {
                    let m = &self.compiled.tm;
                    let (ct, nm) = self.reduction();
                    let input = self
                        .compiled
                        .encode_input(word)
                        .expect("terminals are in the alphabet");
                    let mut eng = Engine::new(ct);
                    let mut raw = initial_raw_config(m, nm, &input);
                    let res = eng.run_with(&mut raw, fuel.subtype, |_, c, _| {
                        if in_spin_state(m, nm, c) {
                            ControlFlow::Break(())
                        } else {
                            ControlFlow::Continue(())
                        }
                    });
                    match res.outcome {
                        RawOutcome::HaltedAccept => (Verdict::Accept, res.steps, String::new()),
                        RawOutcome::Stuck(_) => {
                            (Verdict::Reject, res.steps, "subtyping got stuck".into())
                        }
                        RawOutcome::Interrupted => (
                            Verdict::Reject,
                            res.steps,
                            "simulated machine entered a spin state".into(),
                        ),
                        RawOutcome::OutOfFuel => {
                            let (v, n) = bounded(res.steps, t.map(|t| subtype_fuel_bound(p, t)));
                            (v, res.steps, n)
                        }
                        RawOutcome::Ambiguous => return Err(PipelineError::Ambiguous(res.steps)),
                    }
                }
            };
            out.push(LayerReport {
                layer,
                verdict,
                steps,
                note,
            });
        }
        Ok(out)
    }
}

/// True unless one layer accepts while another rejects.
pub fn coherent(reports: &[LayerReport]) -> bool {
    let has = |v| reports.iter().any(|r| r.verdict == v);
    !(has(Verdict::Accept) && has(Verdict::Reject))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::tests::{ambig, in_ambig, words};
    use crate::simper::parse_simper;

    fn chars(w: &str) -> Vec<String> {
        w.chars().map(String::from).collect()
    }

    #[test]
    fn bounds_grow() {
        assert!(tm_fuel_bound(10, 100) < tm_fuel_bound(10, 200));
        assert!(subtype_fuel_bound(10, 100) > tm_fuel_bound(10, 100));
        assert_eq!(tm_fuel_bound(usize::MAX, u64::MAX), u64::MAX);
    }

    #[test]
    fn unknown_terminal_is_an_error() {
        let p = FluentPipeline::new(ambig(), None).unwrap();
        assert!(matches!(
            p.check(&["e"], &Layer::ALL, Fuel::default()),
            Err(PipelineError::UnknownTerminal(_))
        ));
    }

    #[test]
    fn generated_parser_layers_agree_on_short_words() {
        let p = FluentPipeline::new(ambig(), None).unwrap();
        let fuel = Fuel {
            tm: 1 << 26,
            ..Fuel::default()
        };
        for w in words(&["a", "b", "c", "d"], 2) {
            let r = p
                .check(&w, &[Layer::Oracle, Layer::Simper, Layer::Tm], fuel)
                .unwrap();
            let want = if in_ambig(&w) {
                Verdict::Accept
            } else {
                Verdict::Reject
            };
            assert!(r.iter().all(|r| r.verdict == want), "{w:?}: {r:?}");
        }
    }

    #[test]
    fn specialized_parser_all_layers() {
        let src = include_str!("../fixtures/ambig_specialized.simper");
        let p = FluentPipeline::new(ambig(), Some(parse_simper(src).unwrap())).unwrap();
        for w in ["", "abcd", "abc", "ad", "da"] {
            let r = p.check(&chars(w), &Layer::ALL, Fuel::default()).unwrap();
            let want = if in_ambig(&chars(w)) {
                Verdict::Accept
            } else {
                Verdict::Reject
            };
            assert!(r.iter().all(|r| r.verdict == want), "{w:?}: {r:?}");
        }
    }

    #[test]
    fn low_fuel_is_unknown_not_reject() {
        let p = FluentPipeline::new(ambig(), None).unwrap();
        let fuel = Fuel {
            simper: 1_000_000,
            tm: 1000,
            subtype: 1000,
        };
        let r = p.check(&chars("abcd"), &[Layer::Tm], fuel).unwrap();
        assert_eq!(r[0].verdict, Verdict::Unknown);
        assert!(coherent(&r));
    }
}
