use super::{Cond, Program, Stmt};

struct Fresh(usize);

impl Fresh {
    /// `$` cannot appear in source names, so these never collide.
    fn label(&mut self) -> String {
        self.0 += 1;
        format!("$loop{}", self.0 - 1)
    }
}

fn block(body: &[Stmt], fresh: &mut Fresh) -> Vec<Stmt> {
    let mut out = Vec::with_capacity(body.len());
    for s in body {
        match s {
            Stmt::While(c, b) => {
                let l = fresh.label();
                let mut inner = block(b, fresh);
                inner.push(Stmt::Goto(l.clone()));
                out.push(Stmt::Label(l));
                out.push(Stmt::If(c.clone(), inner, None));
            }
            Stmt::Switch(v, arms) => {
                let mut chain: Option<Vec<Stmt>> = None;
                for (a, b) in arms.iter().rev() {
                    let test = Cond::Eq(v.clone(), a.clone());
                    chain = Some(vec![Stmt::If(test, block(b, fresh), chain)]);
                }
                out.extend(chain.unwrap_or_default());
            }
            Stmt::If(c, t, e) => out.push(Stmt::If(
                c.clone(),
                block(t, fresh),
                e.as_ref().map(|e| block(e, fresh)),
            )),
            other => out.push(other.clone()),
        }
    }
    out
}

/// Rewrites `while` into a label, a guarded body and a back jump, and
/// `switch` into an `if`/`else` chain where the first matching arm wins.
pub fn desugar(p: &Program) -> Program {
    Program {
        body: block(&p.body, &mut Fresh(0)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simper::fixtures::SPECIALIZED;
    use crate::simper::parse_simper;
    use std::collections::HashSet;

    #[test]
    fn empty_while() {
        let p = desugar(&parse_simper("x := 0 while x != 0 { }").unwrap());
        assert_eq!(
            p.to_string(),
            "x := 0\n$loop0:\nif x != 0 {\n  goto $loop0\n}\n"
        );
    }

    #[test]
    fn switch_becomes_else_chain() {
        let p = desugar(&parse_simper("switch input[0] { \"a\" { halt } \"b\" { } }").unwrap());
        let want = "if input[0] == \"a\" {\n  halt\n} else {\n  if input[0] == \"b\" {\n  }\n}\n";
        assert_eq!(p.to_string(), want);
    }

    #[test]
    fn fresh_labels_are_unique() {
        let src =
            "k := 0 while k != n { i := 0 while i != n { j := 0 while j != n { ++j } ++i } ++k }";
        let p = desugar(&parse_simper(src).unwrap());
        assert!(p.is_core());
        let labels: Vec<&String> = p
            .walk()
            .into_iter()
            .filter_map(|s| {
                if let Stmt::Label(l) = s {
                    Some(l)
                } else {
                    None
                }
            })
            .collect();
        assert_eq!(labels.len(), 3);
        assert_eq!(labels.iter().collect::<HashSet<_>>().len(), 3);
    }

    #[test]
    fn specialized_parser_is_core_after() {
        let p = desugar(&parse_simper(SPECIALIZED).unwrap());
        assert!(p.is_core());
        assert!(crate::simper::typecheck(&p).is_ok());
    }
}
