use std::time::{Duration, Instant};

use mpead_core::{expand, parse_with_diagnostics, validate};
use proptest::prelude::*;

const SEED_TEXT: &str = r#"diagram d {
  population P { size = 4 genome = bits(8) }
  compute F { fn = "onemax" out = eval }
  grid G { rows = 3 cols = 3 template = P link = geno inset }
  macro M { members = [P] }
  M[i] -> F : geno
  F -> { M[i] } : eval
  repeat R { count = 3 template = Q edge Q[1..4/best] -> F : geno }
}"#;

/// Parsing must terminate quickly and the diagram must be present exactly
/// when no error was reported.
fn check(text: &str) {
    let start = Instant::now();
    let (d, diags) = parse_with_diagnostics("<fuzz>", text);
    assert_eq!(d.is_some(), !diags.iter().any(|d| d.is_error()), "{text:?}");
    if let Some(d) = d {
        let _ = validate(&d);
        let _ = expand(&d);
    }
    assert!(start.elapsed() < Duration::from_millis(100), "slow input {text:?}");
}

fn token_soup() -> impl Strategy<Value = String> {
    let piece = prop_oneof![
        Just("diagram"), Just("population"), Just("compute"), Just("macro"), Just("grid"),
        Just("repeat"), Just("edge"), Just("{"), Just("}"), Just("["), Just("]"), Just("("), Just(")"),
        Just("->"), Just("~>"), Just(":"), Just("="), Just(","), Just("*"), Just("/"), Just(".."),
        Just("geno"), Just("eval"), Just("pheno"), Just("P"), Just("F"), Just("i"), Just("3"), Just("0"),
        Just("\"s\""), Just("\""), Just("bits"), Just("size"), Just("template"), Just("\n"), Just("#"),
    ];
    prop::collection::vec(piece, 0..60).prop_map(|v| v.join(" "))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn random_bytes(bytes in prop::collection::vec(any::<u8>(), 0..256)) {
        check(&String::from_utf8_lossy(&bytes));
    }

    #[test]
    fn random_token_sequences(text in token_soup()) {
        check(&text);
    }

    #[test]
    fn mutated_valid_text(cut in 0usize..400, len in 0usize..20, insert in "[{}\\[\\]:=>~\"a-z0-9 ]{0,4}") {
        let mut text: Vec<char> = SEED_TEXT.chars().collect();
        let at = cut.min(text.len());
        let end = (at + len).min(text.len());
        text.splice(at..end, insert.chars());
        check(&text.into_iter().collect::<String>());
    }
}

#[test]
fn recovery_reports_several_errors_in_one_pass() {
    let text = "diagram d {\n  population P { size = 0 }\n  compute F { fn = }\n  P[i] -> F : bogus\n  population Q { colour = 3 }\n}";
    let (d, diags) = parse_with_diagnostics("t.mpead", text);
    assert!(d.is_none());
    let lines: Vec<u32> = diags.iter().filter_map(|d| d.span.as_ref().map(|s| s.start.line)).collect();
    assert!(diags.len() >= 4, "{diags:#?}");
    for line in [2, 3, 4, 5] {
        assert!(lines.contains(&line), "no diagnostic on line {line}: {diags:#?}");
    }
}

#[test]
fn deep_nesting_is_not_a_stack_hazard() {
    let text = format!("diagram d {{ {} }}", "{".repeat(50_000));
    check(&text);
    let text = format!("diagram d {{ {} }}", "[".repeat(50_000));
    check(&text);
}
