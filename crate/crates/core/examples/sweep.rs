//! Prints module and motion-weight ablation tables on the built-in suites.
//!
//! `cargo run --release -p memtrack-core --example sweep -- [n] [seed]`

use memtrack::simworld::suites::{crossing_suite, fast_motion_suite};
use memtrack::tracker::{ablate, AblationGrid, TrackerConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    let seed: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1);
    let base = TrackerConfig::default();

    let suite = crossing_suite(n, seed);
    for (name, part) in [
        ("all", suite.clone()),
        ("occlusion", suite.iter().step_by(2).cloned().collect()),
        ("lookalike", suite.iter().skip(1).step_by(2).cloned().collect::<Vec<_>>()),
    ] {
        println!("crossing suite [{name}]");
        for cell in ablate(&part, &AblationGrid::modules(&base), &[], true) {
            println!("  {:<10} auc {:.4}  iou {:.4}", cell.label, cell.mean_auc, cell.mean_iou);
        }
    }
    println!("fast-motion suite");
    let fast = fast_motion_suite(n, seed);
    for cell in ablate(&fast, &AblationGrid::alpha(&TrackerConfig::full(), &[0.0, 0.15, 0.25, 0.5, 1.0]), &[], true) {
        println!("  {:<10} auc {:.4}  iou {:.4}", cell.label, cell.mean_auc, cell.mean_iou);
    }
}
