mod common;

use fragmentc_core::compose::{ComposedLanguage, MemoryLoader};
use fragmentc_core::engine::{build_engine, parse};
use fragmentc_core::grammar::parse_grammar;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::cfg::{random_input, Cfg, Grammar};

/// Engine acceptance for `input`, or None when the engine refuses the
/// grammar (left recursion is rejected at build time).
fn engine_accepts(src: &str, inputs: &[Vec<&str>]) -> Option<Vec<bool>> {
    let f = parse_grammar(src, "r.mc").unwrap_or_else(|e| panic!("{src}\n{e:?}"));
    let lang = ComposedLanguage::standalone(&f, "A", &MemoryLoader::new().with(f.clone())).unwrap();
    let engine = match build_engine(&lang) {
        Ok(e) => e,
        Err(reports) => {
            assert!(reports.iter().all(|r| r.message.starts_with("left-recursive")), "{src}\n{reports:?}");
            return None;
        }
    };
    Some(inputs.iter().map(|w| parse(&w.join(" "), &engine, "in").root.is_some()).collect())
}

#[test]
fn engine_agrees_with_cyk() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (mut pairs, mut accepted, mut grammars) = (0, 0, 0);
    while pairs < 400 {
        let g = Grammar::random(&mut rng);
        let cfg: Cfg = g.cfg();
        if !cfg.is_ll1() {
            continue;
        }
        let mut inputs: Vec<Vec<&str>> = (0..4).filter_map(|_| g.sample(&mut rng, 12)).collect();
        inputs.extend((0..4).map(|_| random_input(&mut rng, 12)));
        let src = g.source();
        let Some(got) = engine_accepts(&src, &inputs) else { continue };
        grammars += 1;
        for (w, got) in inputs.iter().zip(got) {
            assert_eq!(got, cfg.accepts(w), "grammar:\n{src}input: {w:?}");
            accepted += got as usize;
            pairs += 1;
        }
    }
    assert!(grammars > 40);
    assert!(accepted > pairs / 5 && accepted < pairs * 4 / 5, "{accepted} of {pairs}");
}

#[test]
fn cyk_sanity() {
    let g = Grammar {
        bodies: vec![common::cfg::Expr::Seq(vec![
            common::cfg::Expr::T("("),
            common::cfg::Expr::Rep(Box::new(common::cfg::Expr::N(0)), '*'),
            common::cfg::Expr::T(")"),
        ])],
    };
    let cfg = g.cfg();
    assert!(cfg.is_ll1());
    assert!(cfg.accepts(&["(", "(", ")", "(", ")", ")"]));
    assert!(!cfg.accepts(&["(", "(", ")"]));
    assert!(!cfg.accepts(&[]));
}

#[test]
fn ordered_choice_filter() {
    use common::cfg::Expr::*;
    // A = ("a")? "a": not LL(1).
    let g = Grammar { bodies: vec![Seq(vec![Rep(Box::new(T("a")), '?'), T("a")])] };
    assert!(!g.cfg().is_ll1());
    // A = (("a")? | "b"): nullable alternative before another one.
    let g = Grammar { bodies: vec![Alt(vec![Rep(Box::new(T("a")), '?'), T("b")])] };
    assert!(!g.cfg().is_ll1());
}
