//! Compiles a composed language into rule tables for the interpreter and
//! rejects what ordered-choice descent cannot run (left recursion).

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::token::{is_word, Mode, Token};
use crate::compose::ComposedLanguage;
use crate::grammar::{attribute_shapes, AttributeShape, BodyExpr, Cardinality, Loc, IDENT};
use crate::report::ProblemReport;

const SOURCE: &str = "engine";

#[derive(Clone, Debug)]
pub(crate) enum Expr {
    Seq(Vec<Expr>),
    Alt(Vec<Expr>),
    Block { inner: Box<Expr>, label: Option<String> },
    Word { text: String, label: Option<String> },
    Sym { text: String, label: Option<String> },
    Ident { label: Option<String> },
    Tok { index: usize, label: Option<String> },
    Flag { label: String, text: String },
    Call { rule: usize, label: Option<String> },
    Repeat { inner: Box<Expr>, card: Cardinality },
}

#[derive(Clone, Debug)]
pub(crate) enum RuleKind {
    Production { body: Expr, shapes: BTreeMap<String, AttributeShape> },
    Interface { implementors: Vec<usize> },
}

#[derive(Clone, Debug)]
pub(crate) struct Rule {
    pub name: String,
    pub fragment: String,
    pub mode: usize,
    pub kind: RuleKind,
}

/// Executable form of a composed language. Immutable once built.
#[derive(Clone, Debug)]
pub struct ParserHandle {
    pub(crate) rules: Vec<Rule>,
    pub(crate) by_name: HashMap<String, usize>,
    pub(crate) modes: Vec<Mode>,
    pub(crate) start: usize,
    warnings: Vec<ProblemReport>,
}

impl ParserHandle {
    pub fn start_symbol(&self) -> &str {
        &self.rules[self.start].name
    }

    /// Non-fatal findings from building, e.g. unreachable productions.
    pub fn warnings(&self) -> &[ProblemReport] {
        &self.warnings
    }

    pub fn mode(&self, fragment: &str) -> Option<&Mode> {
        self.modes.iter().find(|m| m.fragment == fragment)
    }

    pub fn start_mode(&self) -> &Mode {
        &self.modes[self.rules[self.start].mode]
    }

    pub fn has_rule(&self, qualified: &str) -> bool {
        self.by_name.contains_key(qualified)
    }

    /// Tokenizes `text` with the start fragment's lexical rules.
    pub fn lex(&self, text: &str) -> Vec<Token> {
        self.start_mode().lex(text)
    }
}

/// Tokenizes `text` with the lexical rules of one fragment of `lang`.
pub fn lex(text: &str, lang: &ComposedLanguage, fragment: &str) -> Vec<Token> {
    match mode_for(lang, fragment) {
        Ok(m) => m.lex(text),
        Err(_) => Mode::new(fragment, &[], &[], &[]).expect("empty mode").lex(text),
    }
}

fn mode_for(lang: &ComposedLanguage, fragment: &str) -> Result<Mode, regex::Error> {
    let lexicon = lang.fragments.get(fragment).cloned().unwrap_or_default();
    let tokens: Vec<(String, String)> = lang
        .tokens
        .values()
        .filter(|t| t.fragment == fragment)
        .map(|t| (t.name.clone(), t.pattern.clone()))
        .collect();
    Mode::new(fragment, &lexicon.keywords, &lexicon.terminals, &tokens)
}

struct Compiler<'a> {
    lang: &'a ComposedLanguage,
    by_name: &'a HashMap<String, usize>,
    modes: &'a [Mode],
    errors: Vec<ProblemReport>,
}

impl Compiler<'_> {
    fn compile(&mut self, e: &BodyExpr, mode: usize, at: (&std::path::Path, Loc)) -> Expr {
        match e {
            BodyExpr::Sequence(items) => Expr::Seq(items.iter().map(|i| self.compile(i, mode, at)).collect()),
            BodyExpr::Alternative(items) => Expr::Alt(items.iter().map(|i| self.compile(i, mode, at)).collect()),
            BodyExpr::Block { inner, label } => {
                Expr::Block { inner: Box::new(self.compile(inner, mode, at)), label: label.clone() }
            }
            BodyExpr::Repeat { inner, card } => Expr::Repeat { inner: Box::new(self.compile(inner, mode, at)), card: *card },
            BodyExpr::Terminal { text, label } => {
                if is_word(text) {
                    Expr::Word { text: text.clone(), label: label.clone() }
                } else {
                    Expr::Sym { text: text.clone(), label: label.clone() }
                }
            }
            BodyExpr::PresenceFlag { label, keyword } => Expr::Flag { label: label.clone(), text: keyword.clone() },
            BodyExpr::NonterminalRef { target, label, loc } => {
                if target == IDENT {
                    return Expr::Ident { label: label.clone() };
                }
                if let Some(&rule) = self.by_name.get(target) {
                    return Expr::Call { rule, label: label.clone() };
                }
                if self.lang.tokens.contains_key(target) {
                    if let Some(index) = self.modes[mode].token_index(target) {
                        return Expr::Tok { index, label: label.clone() };
                    }
                }
                self.errors.push(ProblemReport::error(
                    format!("unresolved nonterminal {target}"),
                    at.0,
                    loc.line,
                    loc.col,
                    SOURCE,
                ));
                Expr::Seq(Vec::new())
            }
        }
    }
}

fn nullable(e: &Expr, rules: &[bool]) -> bool {
    match e {
        Expr::Seq(items) => items.iter().all(|i| nullable(i, rules)),
        Expr::Alt(items) => items.iter().any(|i| nullable(i, rules)),
        Expr::Block { inner, .. } => nullable(inner, rules),
        Expr::Repeat { inner, card } => *card != Cardinality::Plus || nullable(inner, rules),
        Expr::Call { rule, .. } => rules[*rule],
        _ => false,
    }
}

/// Rules callable before any token is consumed.
fn left_calls(e: &Expr, null: &[bool], out: &mut BTreeSet<usize>) {
    match e {
        Expr::Seq(items) => {
            for i in items {
                left_calls(i, null, out);
                if !nullable(i, null) {
                    break;
                }
            }
        }
        Expr::Alt(items) => items.iter().for_each(|i| left_calls(i, null, out)),
        Expr::Block { inner, .. } | Expr::Repeat { inner, .. } => left_calls(inner, null, out),
        Expr::Call { rule, .. } => {
            out.insert(*rule);
        }
        _ => {}
    }
}

fn all_calls(e: &Expr, out: &mut BTreeSet<usize>) {
    match e {
        Expr::Seq(items) | Expr::Alt(items) => items.iter().for_each(|i| all_calls(i, out)),
        Expr::Block { inner, .. } | Expr::Repeat { inner, .. } => all_calls(inner, out),
        Expr::Call { rule, .. } => {
            out.insert(*rule);
        }
        _ => {}
    }
}

fn successors(rule: &Rule, null: &[bool], left_only: bool) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    match &rule.kind {
        RuleKind::Production { body, .. } if left_only => left_calls(body, null, &mut out),
        RuleKind::Production { body, .. } => all_calls(body, &mut out),
        RuleKind::Interface { implementors } => out.extend(implementors.iter().copied()),
    }
    out
}

fn reachable(from: &[usize], succ: &[BTreeSet<usize>]) -> BTreeSet<usize> {
    let mut seen: BTreeSet<usize> = BTreeSet::new();
    let mut stack: Vec<usize> = from.to_vec();
    while let Some(r) = stack.pop() {
        if seen.insert(r) {
            stack.extend(succ[r].iter().copied());
        }
    }
    seen
}

/// Builds the executable parser for `lang`. Left recursion is an error;
/// host productions unreachable from the start symbol are warnings.
pub fn build_engine(lang: &ComposedLanguage) -> Result<ParserHandle, Vec<ProblemReport>> {
    let mut errors = Vec::new();
    let mut modes = Vec::new();
    let mut mode_index = HashMap::new();
    for fragment in lang.fragments.keys() {
        match mode_for(lang, fragment) {
            Ok(m) => {
                mode_index.insert(fragment.clone(), modes.len());
                modes.push(m);
            }
            Err(e) => errors.push(ProblemReport::error(
                format!("invalid token pattern in {fragment}: {e}"),
                &lang.productions.values().next().map(|p| p.origin.clone()).unwrap_or_default(),
                1,
                1,
                SOURCE,
            )),
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }

    // Rule table: productions then interfaces, both in name order.
    let mut names: Vec<(String, String)> =
        lang.productions.values().map(|p| (p.name.clone(), p.fragment.clone())).collect();
    for iface in lang.interface_impls.keys() {
        let fragment = iface.split('.').next().unwrap_or_default().to_string();
        names.push((iface.clone(), fragment));
    }
    let by_name: HashMap<String, usize> = names.iter().enumerate().map(|(i, (n, _))| (n.clone(), i)).collect();

    let mut compiler = Compiler { lang, by_name: &by_name, modes: &modes, errors: Vec::new() };
    let mut rules = Vec::new();
    for (name, fragment) in &names {
        let mode = mode_index.get(fragment).copied().unwrap_or(0);
        let kind = match lang.productions.get(name) {
            Some(p) => RuleKind::Production {
                body: compiler.compile(&p.body, mode, (&p.origin, p.loc)),
                shapes: attribute_shapes(&p.body).0,
            },
            None => RuleKind::Interface {
                implementors: lang.interface_impls[name].iter().filter_map(|i| by_name.get(i).copied()).collect(),
            },
        };
        rules.push(Rule { name: name.clone(), fragment: fragment.clone(), mode, kind });
    }
    errors.extend(compiler.errors);

    let Some(&start) = by_name.get(&lang.start_symbol) else {
        errors.push(ProblemReport::error(
            format!("start symbol {} is not a production", lang.start_symbol),
            "",
            1,
            1,
            SOURCE,
        ));
        return Err(errors);
    };

    let mut null = vec![false; rules.len()];
    loop {
        let mut changed = false;
        for (i, r) in rules.iter().enumerate() {
            let n = match &r.kind {
                RuleKind::Production { body, .. } => nullable(body, &null),
                RuleKind::Interface { implementors } => implementors.iter().any(|&j| null[j]),
            };
            if n && !null[i] {
                null[i] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let report_at = |rule: &Rule, msg: String, warning: bool| {
        let (origin, loc) = lang
            .productions
            .get(&rule.name)
            .map(|p| (p.origin.clone(), p.loc))
            .unwrap_or_default();
        if warning {
            ProblemReport::warning(msg, origin, loc.line, loc.col, SOURCE)
        } else {
            ProblemReport::error(msg, origin, loc.line, loc.col, SOURCE)
        }
    };

    let left: Vec<BTreeSet<usize>> = rules.iter().map(|r| successors(r, &null, true)).collect();
    for (i, r) in rules.iter().enumerate() {
        if matches!(r.kind, RuleKind::Production { .. })
            && left[i].iter().any(|&s| reachable(&[s], &left).contains(&i))
        {
            errors.push(report_at(r, format!("left-recursive production {}", r.name), false));
        }
    }

    let all: Vec<BTreeSet<usize>> = rules.iter().map(|r| successors(r, &null, false)).collect();
    let live = reachable(&[start], &all);
    let mut warnings = Vec::new();
    for (i, r) in rules.iter().enumerate() {
        if !live.contains(&i) && r.fragment == lang.name && matches!(r.kind, RuleKind::Production { .. }) {
            warnings.push(report_at(r, format!("production {} is unreachable from the start symbol", r.name), true));
        }
    }

    if errors.is_empty() {
        Ok(ParserHandle { rules, by_name, modes, start, warnings })
    } else {
        Err(errors)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::compose::MemoryLoader;
    use crate::grammar::parse_grammar;

    pub(crate) fn language(src: &str, start: &str) -> ComposedLanguage {
        let f = parse_grammar(src, "g.mc").unwrap();
        let l = MemoryLoader::new().with(f.clone());
        ComposedLanguage::standalone(&f, start, &l).unwrap()
    }

    pub(crate) fn engine(src: &str, start: &str) -> ParserHandle {
        build_engine(&language(src, start)).unwrap()
    }

    #[test]
    fn direct_left_recursion() {
        let errs = build_engine(&language("grammar G { A = A \"x\" | \"y\"; }", "A")).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].message, "left-recursive production G.A");
    }

    #[test]
    fn left_recursion_through_nullable_prefix_and_interface() {
        let src = "grammar G { interface I; A = \"x\"? B; B implements I = I \";\"; C implements I = \"c\"; }";
        let errs = build_engine(&language(src, "A")).unwrap_err();
        assert!(errs.iter().any(|e| e.message == "left-recursive production G.B"));
        assert!(!errs.iter().any(|e| e.message.contains("G.A")));
    }

    #[test]
    fn unreachable_is_warning() {
        let h = engine("grammar G { A = \"a\"; Orphan = \"o\"; }", "A");
        assert_eq!(h.warnings().len(), 1);
        assert!(h.warnings()[0].message.contains("G.Orphan"));
        assert_eq!(h.start_symbol(), "G.A");
    }

    #[test]
    fn lex_uses_fragment_mode() {
        let lang = language("grammar G { A = \"key\" n:IDENT \"+=\"; concept texteditor { keywords: key; } }", "A");
        let toks = lex("key k += x", &lang, "G");
        let kinds: Vec<_> = toks.iter().filter(|t| !t.kind.is_trivia()).map(|t| t.kind).collect();
        use super::super::TokenKind::*;
        assert_eq!(kinds, vec![Keyword, Ident, Symbol, Ident]);
    }
}
