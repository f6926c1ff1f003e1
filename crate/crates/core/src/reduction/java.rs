use std::fmt::Write as _;

use crate::classtable::{ClassTable, InheritanceRule, SubtypeQuery, Tail, TypeTower, Z};
use crate::turing::{ExtendedTM, Letter};

use super::{ReductionNaming, Role, E, HASH, ML, N};

/// Nested generic instantiation `C1<C2<...<end>>>`. Every argument is a
/// `? super` wildcard, except the first one when `direct_first` is set.
fn render_nested(classes: &[&str], end: &str, direct_first: bool) -> String {
    let mut s = String::new();
    let sup = |depth: usize| !(depth == 1 && direct_first);
    for (i, c) in classes.iter().enumerate() {
        if i > 0 && sup(i) {
            s.push_str("? super ");
        }
        s.push_str(c);
        s.push('<');
    }
    if !classes.is_empty() && sup(classes.len()) {
        s.push_str("? super ");
    }
    s.push_str(end);
    s.push_str(&">".repeat(classes.len()));
    s
}

/// `C1 C2 ... Z` as `C1<? super C2<? super ... Z>>`.
pub fn render_tower_java(t: &TypeTower) -> String {
    let names: Vec<&str> = t.classes.iter().map(String::as_str).collect();
    render_stack(&names, Z)
}

fn render_stack(classes: &[&str], end: &str) -> String {
    render_nested(classes, end, false)
}

/// The supertype written in an `extends` clause for one rule.
pub fn render_rule_java(ct: &ClassTable, r: &InheritanceRule) -> String {
    let end = match r.tail {
        Tail::Var => "x",
        Tail::Ground => Z,
    };
    let names: Vec<&str> = r.rhs.iter().map(|&c| ct.name(c)).collect();
    render_nested(&names, end, true)
}

pub fn emit_java_interfaces(ct: &ClassTable) -> String {
    let mut supers: Vec<Vec<String>> = vec![Vec::new(); ct.id_count()];
    for r in ct.rules() {
        supers[r.lhs.index()].push(render_rule_java(ct, r));
    }
    let mut out = String::from("interface Z {}\n");
    for (id, name) in ct.classes() {
        let s = &supers[id.index()];
        if s.is_empty() {
            let _ = writeln!(out, "interface {name}<x> {{}}");
        } else {
            let _ = writeln!(
                out,
                "interface {name}<x> extends\n  {} {{}}",
                s.join(",\n  ")
            );
        }
    }
    out
}

pub fn emit_query_harness(q: &SubtypeQuery) -> String {
    format!(
        "class Main {{\n  {} doit({} v) {{return v;}}\n}}\n",
        render_tower_java(&q.supertype),
        render_tower_java(&q.subtype)
    )
}

const JAVA_KEYWORDS: &[&str] = &[
    "abstract",
    "assert",
    "boolean",
    "break",
    "byte",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extends",
    "final",
    "finally",
    "float",
    "for",
    "goto",
    "if",
    "implements",
    "import",
    "instanceof",
    "int",
    "interface",
    "long",
    "native",
    "new",
    "package",
    "private",
    "protected",
    "public",
    "return",
    "short",
    "static",
    "strictfp",
    "super",
    "switch",
    "synchronized",
    "this",
    "throw",
    "throws",
    "transient",
    "try",
    "void",
    "volatile",
    "while",
    "true",
    "false",
    "null",
    "var",
    "record",
    "yield",
    "start",
    "stop",
];

/// Builder method name for a letter: the letter itself when it is a plain
/// identifier, otherwise its escaped form behind `l`.
pub fn builder_method_name(letter: &str) -> String {
    let plain = letter
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic())
        && letter.chars().all(|c| c.is_ascii_alphanumeric());
    if plain && !JAVA_KEYWORDS.contains(&letter) {
        letter.to_string()
    } else {
        format!("l{}", super::mangle(letter))
    }
}

pub fn emit_builder(m: &ExtendedTM, letters: &[Letter]) -> String {
    let start = render_stack(&[ML, N, HASH, N, E, E], Z);
    let qi = super::state_class_name(m.state_name(m.initial), Role::WR);
    let mut out = String::from("abstract class B<x> {\n");
    let _ = writeln!(out, "  static B<{start}> start;");
    let _ = writeln!(
        out,
        "  abstract {} stop();",
        render_stack(&[&qi, HASH, N], "x")
    );
    for l in letters {
        let cls = super::letter_class_name(l.as_str());
        let _ = writeln!(
            out,
            "  abstract B<{}> {}();",
            render_stack(&[&cls, N], "x"),
            builder_method_name(l.as_str())
        );
    }
    out.push_str("}\n");
    let calls: String = letters
        .iter()
        .map(|l| format!(".{}()", builder_method_name(l.as_str())))
        .collect();
    let _ = writeln!(out, "// E<? super E<? super Z>> l = B.start{calls}.stop();");
    out
}

/// Interfaces, harness and builder in one compilation unit.
pub fn emit_java_file(
    ct: &ClassTable,
    m: &ExtendedTM,
    _nm: &ReductionNaming,
    q: &SubtypeQuery,
) -> String {
    let mut out = emit_java_interfaces(ct);
    out.push('\n');
    out.push_str(&emit_query_harness(q));
    out.push('\n');
    out.push_str(&emit_builder(m, &m.alphabet));
    out
}
