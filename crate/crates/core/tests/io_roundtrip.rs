use memtrack::geometry::BBox;
use memtrack::io::gt::{format_absent, format_gt, parse_absent_str, parse_gt_str};
use memtrack::io::{config_hash, RunConfig};
use memtrack::tracker::TrackerConfig;
use proptest::prelude::*;

fn gt_line() -> impl Strategy<Value = (i32, i32, u16, u16)> {
    prop_oneof![
        9 => (-50i32..2000, -50i32..2000, 1u16..500, 1u16..500),
        1 => Just((0, 0, 0, 0)),
    ]
}

proptest! {
    #[test]
    fn gt_files_round_trip(lines in proptest::collection::vec(gt_line(), 1..200), crlf in any::<bool>()) {
        let mut text: String = lines
            .iter()
            .map(|(x, y, w, h)| format!("{x},{y},{w},{h}\n"))
            .collect();
        if crlf {
            text = text.replace('\n', " \r\n");
        }
        let boxes = parse_gt_str(&text, "gt").unwrap();
        prop_assert_eq!(boxes.len(), lines.len());
        for (b, &(x, y, w, h)) in boxes.iter().zip(&lines) {
            if w == 0 {
                prop_assert!(b.empty);
            } else {
                prop_assert_eq!(*b, BBox::from_top_left(x as f64, y as f64, w as f64, h as f64));
            }
        }
        let written = format_gt(&boxes);
        prop_assert_eq!(parse_gt_str(&written, "gt").unwrap(), boxes);
        if !crlf {
            prop_assert_eq!(written, text);
        }
    }

    #[test]
    fn absence_flags_round_trip(flags in proptest::collection::vec(any::<bool>(), 1..300)) {
        prop_assert_eq!(parse_absent_str(&format_absent(&flags), "a").unwrap(), flags);
    }

    #[test]
    fn config_hash_changes_with_alpha(a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let ha = config_hash(&TrackerConfig::full().with_alpha(a));
        let hb = config_hash(&TrackerConfig::full().with_alpha(b));
        prop_assert_eq!(ha == hb, a == b);
    }
}

#[test]
fn run_config_hash_is_stable_across_reserialization() {
    let cfg = RunConfig {
        seeds: vec![1, 2, 3],
        ..RunConfig::default()
    };
    let text = serde_json::to_string_pretty(&cfg).unwrap();
    let back: RunConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(config_hash(&cfg), config_hash(&back));
}
