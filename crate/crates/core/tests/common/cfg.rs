//! Random small grammars, an LL(1) filter and a CYK-style recognizer that
//! works on a plain context-free rendering of the same grammar.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

pub const TERMINALS: [&str; 6] = ["a", "b", "c", "(", ")", ";"];
const NAMES: [&str; 4] = ["A", "B", "C", "D"];

#[derive(Clone, Debug)]
pub enum Expr {
    T(&'static str),
    N(usize),
    Seq(Vec<Expr>),
    Alt(Vec<Expr>),
    Rep(Box<Expr>, char),
}

#[derive(Clone, Debug)]
pub struct Grammar {
    pub bodies: Vec<Expr>,
}

fn gen_expr(rng: &mut impl Rng, n: usize, depth: u32) -> Expr {
    let leaf = |rng: &mut dyn rand::RngCore| {
        if rng.gen_bool(0.6) {
            Expr::T(TERMINALS.choose(rng).unwrap())
        } else {
            Expr::N(rng.gen_range(0..n))
        }
    };
    if depth == 0 {
        return leaf(rng);
    }
    match rng.gen_range(0..10) {
        0..=3 => leaf(rng),
        4..=6 => Expr::Seq((0..rng.gen_range(2..=3)).map(|_| gen_expr(rng, n, depth - 1)).collect()),
        7 => Expr::Alt((0..rng.gen_range(2..=3)).map(|_| gen_expr(rng, n, depth - 1)).collect()),
        _ => Expr::Rep(Box::new(gen_expr(rng, n, depth - 1)), *['?', '*', '+'].choose(rng).unwrap()),
    }
}

impl Grammar {
    pub fn random(rng: &mut impl Rng) -> Grammar {
        let n = rng.gen_range(1..=4);
        Grammar { bodies: (0..n).map(|_| gen_expr(rng, n, 3)).collect() }
    }

    pub fn source(&self) -> String {
        fn render(e: &Expr) -> String {
            match e {
                Expr::T(t) => format!("\"{t}\""),
                Expr::N(i) => NAMES[*i].to_string(),
                Expr::Seq(xs) => xs.iter().map(render).collect::<Vec<_>>().join(" "),
                Expr::Alt(xs) => format!("({})", xs.iter().map(render).collect::<Vec<_>>().join(" | ")),
                Expr::Rep(x, c) => format!("({}){c}", render(x)),
            }
        }
        let prods: String =
            self.bodies.iter().enumerate().map(|(i, b)| format!("  {} = {};\n", NAMES[i], render(b))).collect();
        format!("grammar R {{\n{prods}}}\n")
    }

    pub fn cfg(&self) -> Cfg {
        let mut cfg = Cfg { rules: vec![Vec::new(); self.bodies.len()] };
        for (i, b) in self.bodies.iter().enumerate() {
            let s = cfg.lower(b);
            cfg.rules[i] = vec![vec![s]];
        }
        cfg
    }

    /// A random sentence of at most `max` tokens, if one is found quickly.
    pub fn sample(&self, rng: &mut impl Rng, max: usize) -> Option<Vec<&'static str>> {
        fn go(g: &Grammar, e: &Expr, rng: &mut impl Rng, out: &mut Vec<&'static str>, fuel: &mut u32) -> bool {
            if *fuel == 0 || out.len() > 12 {
                return false;
            }
            *fuel -= 1;
            match e {
                Expr::T(t) => {
                    out.push(t);
                    true
                }
                Expr::N(i) => go(g, &g.bodies[*i], rng, out, fuel),
                Expr::Seq(xs) => xs.iter().all(|x| go(g, x, rng, out, fuel)),
                Expr::Alt(xs) => go(g, xs.choose(rng).unwrap(), rng, out, fuel),
                Expr::Rep(x, c) => {
                    let (lo, hi) = match c {
                        '?' => (0, 1),
                        '*' => (0, 3),
                        _ => (1, 3),
                    };
                    (0..rng.gen_range(lo..=hi)).all(|_| go(g, x, rng, out, fuel))
                }
            }
        }
        let mut out = Vec::new();
        let mut fuel = 60;
        (go(self, &self.bodies[0], rng, &mut out, &mut fuel) && out.len() <= max).then_some(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Sym {
    T(&'static str),
    N(usize),
}

/// Plain CFG: `rules[n]` lists the alternatives of nonterminal `n`, in order.
#[derive(Clone, Debug)]
pub struct Cfg {
    pub rules: Vec<Vec<Vec<Sym>>>,
}

const END: &str = "$";

impl Cfg {
    fn fresh(&mut self, alts: Vec<Vec<Sym>>) -> Sym {
        self.rules.push(alts);
        Sym::N(self.rules.len() - 1)
    }

    fn lower(&mut self, e: &Expr) -> Sym {
        match e {
            Expr::T(t) => Sym::T(t),
            Expr::N(i) => Sym::N(*i),
            Expr::Seq(xs) => {
                let seq = xs.iter().map(|x| self.lower(x)).collect();
                self.fresh(vec![seq])
            }
            Expr::Alt(xs) => {
                let alts = xs.iter().map(|x| vec![self.lower(x)]).collect();
                self.fresh(alts)
            }
            Expr::Rep(x, c) => {
                let x = self.lower(x);
                match c {
                    '?' => self.fresh(vec![vec![x], vec![]]),
                    '*' => self.lower_star(x),
                    _ => {
                        let star = self.lower_star(x.clone());
                        self.fresh(vec![vec![x, star]])
                    }
                }
            }
        }
    }

    fn lower_star(&mut self, x: Sym) -> Sym {
        self.rules.push(Vec::new());
        let n = self.rules.len() - 1;
        self.rules[n] = vec![vec![x, Sym::N(n)], vec![]];
        Sym::N(n)
    }

    fn nullable(&self) -> Vec<bool> {
        let mut null = vec![false; self.rules.len()];
        loop {
            let mut changed = false;
            for (n, alts) in self.rules.iter().enumerate() {
                if !null[n] && alts.iter().any(|a| a.iter().all(|s| matches!(s, Sym::N(m) if null[*m]))) {
                    null[n] = true;
                    changed = true;
                }
            }
            if !changed {
                return null;
            }
        }
    }

    fn first_of(seq: &[Sym], first: &[BTreeSet<&'static str>], null: &[bool]) -> (BTreeSet<&'static str>, bool) {
        let mut out = BTreeSet::new();
        for s in seq {
            match s {
                Sym::T(t) => {
                    out.insert(*t);
                    return (out, false);
                }
                Sym::N(n) => {
                    out.extend(&first[*n]);
                    if !null[*n] {
                        return (out, false);
                    }
                }
            }
        }
        (out, true)
    }

    /// Strong LL(1) with the extra condition that a nullable alternative
    /// comes last, so ordered choice and CFG choice agree.
    pub fn is_ll1(&self) -> bool {
        let null = self.nullable();
        let n = self.rules.len();
        let mut first = vec![BTreeSet::new(); n];
        let mut follow = vec![BTreeSet::new(); n];
        follow[0].insert(END);
        loop {
            let mut changed = false;
            for (a, alts) in self.rules.iter().enumerate() {
                for alt in alts {
                    let (f, _) = Self::first_of(alt, &first, &null);
                    let before = first[a].len();
                    first[a].extend(f);
                    changed |= first[a].len() != before;
                    for (i, s) in alt.iter().enumerate() {
                        let Sym::N(b) = s else { continue };
                        let (mut f, rest_null) = Self::first_of(&alt[i + 1..], &first, &null);
                        if rest_null {
                            f.extend(follow[a].clone());
                        }
                        let before = follow[*b].len();
                        follow[*b].extend(f);
                        changed |= follow[*b].len() != before;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        self.rules.iter().enumerate().all(|(a, alts)| {
            let firsts: Vec<_> = alts.iter().map(|alt| Self::first_of(alt, &first, &null)).collect();
            let nullable_at: Vec<usize> = (0..alts.len()).filter(|i| firsts[*i].1).collect();
            if nullable_at.len() > 1 || nullable_at.first().is_some_and(|i| *i + 1 != alts.len()) {
                return false;
            }
            for i in 0..alts.len() {
                for j in i + 1..alts.len() {
                    if !firsts[i].0.is_disjoint(&firsts[j].0) {
                        return false;
                    }
                }
                if !nullable_at.is_empty() && !firsts[i].1 && !firsts[i].0.is_disjoint(&follow[a]) {
                    return false;
                }
            }
            true
        })
    }

    /// Least fixpoint of `derives[n][i][j]`: nonterminal `n` derives
    /// `w[i..j]`. Accepts iff the start symbol derives the whole input.
    pub fn accepts(&self, w: &[&str]) -> bool {
        let len = w.len();
        let n = self.rules.len();
        let mut derives = vec![vec![vec![false; len + 1]; len + 1]; n];
        loop {
            let mut changed = false;
            for a in 0..n {
                for i in 0..=len {
                    for j in i..=len {
                        if derives[a][i][j] {
                            continue;
                        }
                        if self.rules[a].iter().any(|alt| seq_derives(alt, w, i, j, &derives)) {
                            derives[a][i][j] = true;
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                return derives[0][0][len];
            }
        }
    }
}

fn seq_derives(seq: &[Sym], w: &[&str], i: usize, j: usize, derives: &[Vec<Vec<bool>>]) -> bool {
    let mut reach = vec![false; j + 1];
    reach[i] = true;
    for s in seq {
        let mut next = vec![false; j + 1];
        for p in (i..=j).filter(|p| reach[*p]) {
            match s {
                Sym::T(t) => {
                    if p < j && w[p] == *t {
                        next[p + 1] = true;
                    }
                }
                Sym::N(b) => (p..=j).filter(|q| derives[*b][p][*q]).for_each(|q| next[q] = true),
            }
        }
        reach = next;
    }
    reach[j]
}

pub fn random_input(rng: &mut impl Rng, max: usize) -> Vec<&'static str> {
    (0..rng.gen_range(0..=max)).map(|_| *TERMINALS.choose(rng).unwrap()).collect()
}

