mod common;

use proptest::prelude::*;

use insightmap::model::{render_report, InsightReport};
use insightmap::parser::{parse_report, ParseError};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn render_then_parse_is_identity(report in common::arb_report()) {
        prop_assert!(report.check_invariants().is_ok());
        let md = render_report(&report);
        let parsed = parse_report(&md).expect("rendered report parses");
        prop_assert!(parsed.check_invariants().is_ok());
        prop_assert!(parsed.structurally_eq(&report), "markdown:\n{md}\nparsed: {parsed:#?}");
    }

    #[test]
    fn rendering_is_a_fixed_point(report in common::arb_report()) {
        let once = render_report(&report);
        let twice = render_report(&parse_report(&once).unwrap());
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn blank_lines_do_not_matter(report in common::arb_report(), extra in 0..3usize) {
        let md = render_report(&report);
        let padding = "\n".repeat(extra + 1);
        let spaced: String = md.lines().map(|l| format!("{l}{padding}")).collect();
        let compact: String = md
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| format!("{l}\n"))
            .collect();
        let a = parse_report(&md).unwrap();
        prop_assert!(parse_report(&spaced).unwrap().structurally_eq(&a));
        prop_assert!(parse_report(&compact).unwrap().structurally_eq(&a));
    }

    #[test]
    fn header_case_does_not_matter(report in common::arb_report(), upper in any::<bool>()) {
        let md = render_report(&report);
        let recased: String = md
            .lines()
            .map(|l| {
                let l = if l.starts_with('#') {
                    if upper { l.to_uppercase() } else { l.to_lowercase() }
                } else {
                    l.to_owned()
                };
                format!("{l}\n")
            })
            .collect();
        prop_assert!(parse_report(&recased).unwrap().structurally_eq(&parse_report(&md).unwrap()));
    }

    #[test]
    fn parsing_is_deterministic(report in common::arb_report()) {
        let md = render_report(&report);
        prop_assert_eq!(parse_report(&md).unwrap(), parse_report(&md).unwrap());
    }

    #[test]
    fn json_wire_round_trip(report in common::arb_report()) {
        let json = serde_json::to_string(&report).unwrap();
        let back: InsightReport = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, report);
    }

    /// Text without any header line never yields a report.
    #[test]
    fn headerless_text_is_rejected(lines in prop::collection::vec("[a-zA-Z0-9 ,.()'-]{1,60}", 1..12)) {
        let text = lines.join("\n");
        prop_assume!(!text.trim().is_empty());
        prop_assert_eq!(parse_report(&text), Err(ParseError::NoRecognizedSections));
    }
}
