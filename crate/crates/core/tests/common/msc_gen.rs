//! Random MSC documents within the grammar: instances, events, conditions
//! with embedded expressions, method declarations and comments, rendered
//! with random whitespace.

use rand::seq::SliceRandom;
use rand::Rng;

const NAMES: [&str; 8] = ["sender", "receiver", "observer", "a", "b", "client", "server", "log"];
const MESSAGES: [&str; 6] = ["message", "response", "ack", "ping", "pong", "data"];
const OPS: [&str; 9] = ["||", "&&", "==", "!=", "<=", ">", "+", "-", "*"];

fn pick(rng: &mut impl Rng, xs: &[&'static str]) -> &'static str {
    xs.choose(rng).unwrap()
}

fn primary(rng: &mut impl Rng, depth: u32, out: &mut Vec<String>) {
    match rng.gen_range(0..if depth == 0 { 3 } else { 5 }) {
        0 => out.push(rng.gen_range(0..500).to_string()),
        1 => out.push(pick(rng, &["true", "false", "null", "\"text\""]).into()),
        2 => {
            out.push(pick(rng, &NAMES).into());
            for _ in 0..rng.gen_range(0..=2) {
                out.push(".".into());
                out.push(pick(rng, &MESSAGES).into());
            }
        }
        3 => {
            out.push("(".into());
            expression(rng, depth - 1, out);
            out.push(")".into());
        }
        _ => {
            out.push(pick(rng, &["check", "size", "isEmpty"]).into());
            out.push("(".into());
            for i in 0..rng.gen_range(0..=2) {
                if i > 0 {
                    out.push(",".into());
                }
                expression(rng, depth - 1, out);
            }
            out.push(")".into());
        }
    }
}

fn expression(rng: &mut impl Rng, depth: u32, out: &mut Vec<String>) {
    for i in 0..rng.gen_range(1..=3) {
        if i > 0 {
            out.push(pick(rng, &OPS).into());
        }
        if rng.gen_bool(0.15) {
            out.push(pick(rng, &["!", "-"]).into());
        }
        primary(rng, depth, out);
    }
}

fn statement(rng: &mut impl Rng, depth: u32, out: &mut Vec<String>) {
    match rng.gen_range(0..if depth == 0 { 4 } else { 6 }) {
        0 => {
            out.push("return".into());
            if rng.gen_bool(0.8) {
                expression(rng, 1, out);
            }
            out.push(";".into());
        }
        1 => {
            out.extend(["int".into(), pick(rng, &["n", "count", "x"]).into(), "=".into()]);
            expression(rng, 1, out);
            out.push(";".into());
        }
        2 => {
            out.extend([pick(rng, &["n", "count", "x"]).into(), "=".into()]);
            expression(rng, 1, out);
            out.push(";".into());
        }
        3 => {
            expression(rng, 1, out);
            out.push(";".into());
        }
        4 => {
            out.extend(["if".into(), "(".into()]);
            expression(rng, 1, out);
            out.push(")".into());
            block(rng, depth - 1, out);
            if rng.gen_bool(0.5) {
                out.push("else".into());
                statement(rng, depth - 1, out);
            }
        }
        _ => {
            out.extend(["while".into(), "(".into()]);
            expression(rng, 1, out);
            out.push(")".into());
            block(rng, depth - 1, out);
        }
    }
}

fn block(rng: &mut impl Rng, depth: u32, out: &mut Vec<String>) {
    out.push("{".into());
    for _ in 0..rng.gen_range(0..=3) {
        statement(rng, depth, out);
    }
    out.push("}".into());
}

fn method(rng: &mut impl Rng, out: &mut Vec<String>) {
    for _ in 0..rng.gen_range(0..=2) {
        out.push(pick(rng, &["public", "private", "static", "final"]).into());
    }
    out.push(pick(rng, &["boolean", "int", "void", "String"]).into());
    out.push(pick(rng, &["checkInbox", "ready", "compute"]).into());
    out.push("(".into());
    for i in 0..rng.gen_range(0..=2) {
        if i > 0 {
            out.push(",".into());
        }
        out.push(pick(rng, &["int", "boolean"]).into());
        out.push(pick(rng, &["p", "q", "limit"]).into());
    }
    out.push(")".into());
    block(rng, 2, out);
}

fn comment(rng: &mut impl Rng, out: &mut Vec<String>) {
    if rng.gen_bool(0.08) {
        out.push(pick(rng, &["// note\n", "/* remark */", "/* two\n lines */"]).into());
    }
}

fn event(rng: &mut impl Rng, out: &mut Vec<String>) {
    match rng.gen_range(0..5) {
        0 | 1 => out.extend([
            "out".into(),
            pick(rng, &MESSAGES).into(),
            "to".into(),
            pick(rng, &NAMES).into(),
            ";".into(),
        ]),
        2 | 3 => out.extend([
            "in".into(),
            pick(rng, &MESSAGES).into(),
            "from".into(),
            pick(rng, &NAMES).into(),
            ";".into(),
        ]),
        _ => {
            out.extend(["condition".into(), pick(rng, &["inbox", "ready", "idle"]).into()]);
            if rng.gen_bool(0.4) {
                out.push("shared".into());
                if rng.gen_bool(0.4) {
                    out.push("all".into());
                } else {
                    for i in 0..rng.gen_range(1..=3) {
                        if i > 0 {
                            out.push(",".into());
                        }
                        out.push(pick(rng, &NAMES).into());
                    }
                }
            }
            if rng.gen_bool(0.5) {
                out.push("{".into());
                expression(rng, 2, out);
                out.push("}".into());
            } else {
                out.push(";".into());
            }
        }
    }
    comment(rng, out);
}

/// Token texts of a random chart.
pub fn chart_tokens(rng: &mut impl Rng) -> Vec<String> {
    let mut out = Vec::new();
    comment(rng, &mut out);
    out.extend(["msc".into(), pick(rng, &["mail", "order", "demo"]).into(), "{".into()]);
    for _ in 0..rng.gen_range(0..=4) {
        if rng.gen_bool(0.2) {
            method(rng, &mut out);
            continue;
        }
        out.extend(["instance".into(), pick(rng, &NAMES).into(), "{".into()]);
        comment(rng, &mut out);
        for _ in 0..rng.gen_range(0..=4) {
            event(rng, &mut out);
        }
        out.push("}".into());
    }
    out.push("}".into());
    out
}

/// Joins tokens with random whitespace; a line comment keeps its newline.
pub fn render(rng: &mut impl Rng, tokens: &[String]) -> String {
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 && !out.ends_with('\n') {
            out.push_str(pick(rng, &[" ", " ", " ", "\n", "  ", "\n\n    ", "\t"]));
        }
        out.push_str(t);
    }
    out
}

pub fn document(rng: &mut impl Rng) -> String {
    let tokens = chart_tokens(rng);
    render(rng, &tokens)
}
