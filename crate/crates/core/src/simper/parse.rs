use std::collections::HashSet;

use thiserror::Error;

use super::{Cond, LValue, Program, Stmt, Value};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimperParseError {
    #[error("{line}:{col}: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("{line}:{col}: label `{label}` defined twice")]
    DuplicateLabel {
        line: usize,
        col: usize,
        label: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Nat(u64),
    Str(String),
    Punct(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

const PUNCT: &[&str] = &[
    ":=", "++", "--", "==", "!=", "&&", "||", ":", "{", "}", "[", "]", "(", ")", ",",
];
const KEYWORDS: &[&str] = &["goto", "if", "else", "halt", "while", "switch", "array"];

fn lex(src: &str) -> Result<Vec<Spanned>, SimperParseError> {
    let mut out = Vec::new();
    for (li, line) in src.lines().enumerate() {
        let line_no = li + 1;
        let chars: Vec<(usize, char)> = line.char_indices().collect();
        let mut i = 0;
        while i < chars.len() {
            let (off, c) = chars[i];
            let col = i + 1;
            let err = |msg: String| SimperParseError::Syntax {
                line: line_no,
                col,
                msg,
            };
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            let rest = &line[off..];
            if rest.starts_with("//") {
                break;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].1.is_ascii_alphanumeric() || chars[i].1 == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().map(|&(_, c)| c).collect();
                out.push(Spanned {
                    tok: Tok::Ident(word),
                    line: line_no,
                    col,
                });
                continue;
            }
            if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].1.is_ascii_digit() {
                    i += 1;
                }
                let digits: String = chars[start..i].iter().map(|&(_, c)| c).collect();
                let n = digits
                    .parse()
                    .map_err(|_| err(format!("number `{digits}` too large")))?;
                out.push(Spanned {
                    tok: Tok::Nat(n),
                    line: line_no,
                    col,
                });
                continue;
            }
            if c == '"' {
                let start = i + 1;
                let mut j = start;
                while j < chars.len() && chars[j].1 != '"' {
                    j += 1;
                }
                if j == chars.len() {
                    return Err(err("unterminated string".into()));
                }
                let s: String = chars[start..j].iter().map(|&(_, c)| c).collect();
                out.push(Spanned {
                    tok: Tok::Str(s),
                    line: line_no,
                    col,
                });
                i = j + 1;
                continue;
            }
            match PUNCT.iter().find(|p| rest.starts_with(**p)) {
                Some(p) => {
                    out.push(Spanned {
                        tok: Tok::Punct(p),
                        line: line_no,
                        col,
                    });
                    i += p.len();
                }
                None => return Err(err(format!("unexpected character `{c}`"))),
            }
        }
    }
    let line = src.lines().count().max(1);
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col: 1,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    labels: HashSet<String>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].tok
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, SimperParseError> {
        let t = &self.toks[self.pos];
        Err(SimperParseError::Syntax {
            line: t.line,
            col: t.col,
            msg: msg.into(),
        })
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(w) if w == k)
    }

    fn expect(&mut self, p: &str) -> Result<(), SimperParseError> {
        if self.is_punct(p) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected `{p}`, found {}", describe(self.peek())))
        }
    }

    fn ident(&mut self) -> Result<String, SimperParseError> {
        match self.peek() {
            Tok::Ident(w) if !KEYWORDS.contains(&w.as_str()) => {
                let w = w.clone();
                self.bump();
                Ok(w)
            }
            t => self.err(format!("expected a name, found {}", describe(t))),
        }
    }

    fn block(&mut self) -> Result<Vec<Stmt>, SimperParseError> {
        self.expect("{")?;
        let mut out = Vec::new();
        while !self.is_punct("}") {
            if *self.peek() == Tok::Eof {
                return self.err("unclosed block");
            }
            out.push(self.stmt()?);
        }
        self.bump();
        Ok(out)
    }

    fn stmt(&mut self) -> Result<Stmt, SimperParseError> {
        if self.is_kw("goto") {
            self.bump();
            return Ok(Stmt::Goto(self.ident()?));
        }
        if self.is_kw("halt") {
            self.bump();
            return Ok(Stmt::Halt);
        }
        if self.is_kw("if") {
            self.bump();
            let c = self.cond()?;
            let then = self.block()?;
            let els = if self.is_kw("else") {
                self.bump();
                Some(self.block()?)
            } else {
                None
            };
            return Ok(Stmt::If(c, then, els));
        }
        if self.is_kw("while") {
            self.bump();
            let c = self.cond()?;
            return Ok(Stmt::While(c, self.block()?));
        }
        if self.is_kw("switch") {
            self.bump();
            let v = self.value()?;
            self.expect("{")?;
            let mut arms = Vec::new();
            while !self.is_punct("}") {
                if *self.peek() == Tok::Eof {
                    return self.err("unclosed switch");
                }
                let a = self.value()?;
                arms.push((a, self.block()?));
            }
            self.bump();
            return Ok(Stmt::Switch(v, arms));
        }
        if self.is_punct("++") || self.is_punct("--") {
            let inc = self.is_punct("++");
            self.bump();
            let l = self.lvalue()?;
            return Ok(if inc { Stmt::Inc(l) } else { Stmt::Dec(l) });
        }
        if matches!(self.peek(), Tok::Ident(_)) && matches!(self.peek2(), Tok::Punct(":")) {
            let (line, col) = (self.toks[self.pos].line, self.toks[self.pos].col);
            let l = self.ident()?;
            self.bump();
            if !self.labels.insert(l.clone()) {
                return Err(SimperParseError::DuplicateLabel {
                    line,
                    col,
                    label: l,
                });
            }
            return Ok(Stmt::Label(l));
        }
        if matches!(self.peek(), Tok::Ident(_)) {
            let l = self.lvalue()?;
            self.expect(":=")?;
            return Ok(Stmt::Assign(l, self.value()?));
        }
        self.err(format!(
            "expected a statement, found {}",
            describe(self.peek())
        ))
    }

    fn values(&mut self, close: &str) -> Result<Vec<Value>, SimperParseError> {
        let mut out = vec![self.value()?];
        while self.is_punct(",") {
            self.bump();
            out.push(self.value()?);
        }
        self.expect(close)?;
        Ok(out)
    }

    fn lvalue(&mut self) -> Result<LValue, SimperParseError> {
        let name = self.ident()?;
        if self.is_punct("[") {
            self.bump();
            Ok(LValue::index(name, self.values("]")?))
        } else {
            Ok(LValue::var(name))
        }
    }

    fn value(&mut self) -> Result<Value, SimperParseError> {
        match self.peek().clone() {
            Tok::Nat(n) => {
                self.bump();
                Ok(Value::Nat(n))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Value::Sym(s))
            }
            Tok::Ident(w) if w == "array" => {
                self.bump();
                self.expect("[")?;
                let dims = self.values("]")?;
                self.expect("(")?;
                let fill = self.value()?;
                self.expect(")")?;
                Ok(Value::Array(dims, Box::new(fill)))
            }
            Tok::Ident(_) => Ok(self.lvalue()?.to_value()),
            t => self.err(format!("expected a value, found {}", describe(&t))),
        }
    }

    fn cond(&mut self) -> Result<Cond, SimperParseError> {
        let mut c = self.conj()?;
        while self.is_punct("||") {
            self.bump();
            c = Cond::or(c, self.conj()?);
        }
        Ok(c)
    }

    fn conj(&mut self) -> Result<Cond, SimperParseError> {
        let mut c = self.atom()?;
        while self.is_punct("&&") {
            self.bump();
            c = Cond::and(c, self.atom()?);
        }
        Ok(c)
    }

    fn atom(&mut self) -> Result<Cond, SimperParseError> {
        if self.is_punct("(") {
            self.bump();
            let c = self.cond()?;
            self.expect(")")?;
            return Ok(c);
        }
        let a = self.value()?;
        let eq = if self.is_punct("==") {
            true
        } else if self.is_punct("!=") {
            false
        } else {
            return self.err(format!(
                "expected `==` or `!=`, found {}",
                describe(self.peek())
            ));
        };
        self.bump();
        let b = self.value()?;
        Ok(if eq { Cond::Eq(a, b) } else { Cond::Neq(a, b) })
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(w) => format!("`{w}`"),
        Tok::Nat(n) => format!("`{n}`"),
        Tok::Str(s) => format!("\"{s}\""),
        Tok::Punct(p) => format!("`{p}`"),
        Tok::Eof => "end of input".into(),
    }
}

pub fn parse_simper(text: &str) -> Result<Program, SimperParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        labels: HashSet::new(),
    };
    let mut body = Vec::new();
    while *p.peek() != Tok::Eof {
        body.push(p.stmt()?);
    }
    Ok(Program { body })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simper::fixtures::SPECIALIZED;

    #[test]
    fn halt_alone() {
        assert_eq!(parse_simper("halt").unwrap().body, [Stmt::Halt]);
    }

    #[test]
    fn array_literal() {
        let p = parse_simper("x := array[2,2](0)").unwrap();
        assert_eq!(
            p.body,
            [Stmt::Assign(
                LValue::var("x"),
                Value::Array(vec![Value::Nat(2), Value::Nat(2)], Box::new(Value::Nat(0)))
            )]
        );
    }

    #[test]
    fn specialized_parser_has_nine_top_level_statements() {
        let p = parse_simper(SPECIALIZED).unwrap();
        assert_eq!(p.body.len(), 10);
        let kinds: Vec<&str> = p
            .body
            .iter()
            .map(|s| match s {
                Stmt::Assign(..) => "assign",
                Stmt::While(..) => "while",
                Stmt::If(..) => "if",
                _ => "other",
            })
            .collect();
        assert_eq!(
            kinds,
            [
                "assign", "assign", "while", "assign", "while", "assign", "while", "assign",
                "while", "if"
            ]
        );
        let halts = p.walk().iter().filter(|s| matches!(s, Stmt::Halt)).count();
        assert_eq!(halts, 2);
    }

    #[test]
    fn labels_and_gotos() {
        let p = parse_simper("top: x := 0 goto top").unwrap();
        assert_eq!(p.body[0], Stmt::Label("top".into()));
        assert_eq!(p.body[2], Stmt::Goto("top".into()));
    }

    #[test]
    fn switch_arms() {
        let p = parse_simper("switch input[0] { \"a\" { halt } \"b\" { } }").unwrap();
        let Stmt::Switch(_, arms) = &p.body[0] else {
            panic!()
        };
        assert_eq!(arms.len(), 2);
        assert!(arms[1].1.is_empty());
    }

    #[test]
    fn and_binds_tighter_than_or() {
        let p = parse_simper("if a == b || c == d && e == f { halt }").unwrap();
        let Stmt::If(Cond::Or(_, rhs), ..) = &p.body[0] else {
            panic!("{:?}", p.body[0])
        };
        assert!(matches!(**rhs, Cond::And(..)));
    }

    #[test]
    fn errors_carry_location() {
        let e = parse_simper("x := 0\n  y := ").unwrap_err();
        assert!(matches!(e, SimperParseError::Syntax { line: 2, .. }), "{e}");
        let e = parse_simper("l: l: halt").unwrap_err();
        assert!(matches!(e, SimperParseError::DuplicateLabel { ref label, .. } if label == "l"));
        assert!(parse_simper("x := \"abc").is_err());
        assert!(parse_simper("if x { halt }").is_err());
        assert!(parse_simper("while := 1").is_err());
        assert!(parse_simper("x := 99999999999999999999999").is_err());
    }

    #[test]
    fn comments_are_ignored() {
        let p = parse_simper("// nothing\nhalt // done\n").unwrap();
        assert_eq!(p.body, [Stmt::Halt]);
    }
}
