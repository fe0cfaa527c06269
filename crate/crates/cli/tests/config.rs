use hdgml::Config;
use proptest::prelude::*;

#[test]
fn sections_comments_and_lists() {
    let c = Config::parse("mode = solve # trailing\n\n[problem]\nkappa = 50\nfinest_n = 64, 128\n[solver]\nalpha = inf\n").unwrap();
    assert_eq!(c.raw("", "mode"), Some("solve"));
    assert_eq!(c.require::<f64>("problem", "kappa").unwrap(), 50.0);
    assert_eq!(c.list::<usize>("problem", "finest_n").unwrap(), Some(vec![64, 128]));
    assert!(c.get::<f64>("solver", "alpha").unwrap().unwrap().is_infinite());
    assert_eq!(c.get_or("solver", "tol", 1e-6).unwrap(), 1e-6);
    assert_eq!(c.line("problem", "kappa"), Some(4));
}

#[test]
fn errors_name_the_line() {
    let cases = [
        ("[problem]\nkappa 50\n", 2, "expected key = value"),
        ("[problem\n", 1, "unterminated"),
        ("[nope]\n", 1, "unknown section"),
        ("\n[problem]\ncolour = red\n", 3, "unknown key"),
        ("[problem]\nkappa = 1\nkappa = 2\n", 3, "duplicate"),
        ("[problem]\nkappa =\n", 2, "empty value"),
        ("mode = x\nkappa = 3\n", 2, "unknown key"),
    ];
    for (text, line, msg) in cases {
        let e = Config::parse(text).unwrap_err();
        assert_eq!(e.line, Some(line), "{text:?}");
        assert!(e.message.contains(msg), "{text:?}: {}", e.message);
        assert!(e.to_string().starts_with(&format!("line {line}: ")));
    }
}

#[test]
fn typed_access_reports_the_line() {
    let c = Config::parse("[problem]\n\nkappa = fifty\np = 2\n[solver]\nsmoother = sor\n").unwrap();
    assert_eq!(c.require::<f64>("problem", "kappa").unwrap_err().line, Some(3));
    assert_eq!(c.choice("solver", "smoother", &["jacobi", "gauss-seidel"], "jacobi").unwrap_err().line, Some(6));
    let missing = c.require::<usize>("problem", "finest_n").unwrap_err();
    assert_eq!(missing.line, None);
    assert!(missing.message.contains("finest_n"));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn numbers_round_trip(k in 0.001f64..1e6, n in 1usize..10_000) {
        let c = Config::parse(&format!("[problem]\nkappa = {k}\np = {n}\n")).unwrap();
        prop_assert_eq!(c.require::<f64>("problem", "kappa").unwrap(), k);
        prop_assert_eq!(c.require::<usize>("problem", "p").unwrap(), n);
    }

    #[test]
    fn arbitrary_text_never_panics(text in "[a-z\\[\\]=#, \n0-9.]{0,80}") {
        let _ = Config::parse(&text);
    }
}
