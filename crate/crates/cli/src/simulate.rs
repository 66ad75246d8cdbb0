use std::path::Path;

use memtrack::io::load_scenario;
use memtrack::simworld::generate_sequence;

use crate::jobs::write_sequence;
use crate::Outcome;

/// Writes `<out>/<sequence id>/` for each seed, or for the scenario's own
/// seed when none is given.
pub fn run(scenario_path: &Path, seeds: &[u64], out: &Path) -> anyhow::Result<Outcome> {
    let scenario = load_scenario(scenario_path)?;
    let seeds = if seeds.is_empty() { vec![scenario.seed] } else { seeds.to_vec() };
    for seed in seeds {
        let sc = scenario.clone().with_seed(seed);
        let seq = generate_sequence(&sc)?;
        write_sequence(&out.join(&seq.id), &seq, &sc.name, seed)?;
        println!("{}: {} frames", seq.id, seq.num_frames());
    }
    Ok(Outcome::Success)
}
