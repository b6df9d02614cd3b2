//! Bundled example inputs.
//!
//! The raw texts are also shipped under `crates/core/fixtures/` for use with
//! the command-line tool.

use crate::bell::BellScenario;
use crate::context::TransitionKernel;
use crate::liar::{parse_config, LiarConfig};
use crate::poll::PollConfig;

pub const CATS_BELL_JSON: &str = include_str!("../fixtures/cats_bell.json");
pub const UNIFORM_BELL_JSON: &str = include_str!("../fixtures/uniform_bell.json");
/// Illustrative only: the probabilities are made up.
pub const DIAMOND_KERNEL_JSON: &str = include_str!("../fixtures/diamond_kernel.json");
pub const LIAR5_TXT: &str = include_str!("../fixtures/liar5.txt");
pub const LIAR_CLASSIC_TXT: &str = include_str!("../fixtures/liar_classic.txt");
pub const TRUTH_TELLER_TXT: &str = include_str!("../fixtures/truth_teller.txt");
pub const POLL_DEFAULT_JSON: &str = include_str!("../fixtures/poll_default.json");

pub fn cats_scenario() -> BellScenario {
    BellScenario::from_json(CATS_BELL_JSON).expect("bundled fixture parses")
}

pub fn uniform_scenario() -> BellScenario {
    BellScenario::from_json(UNIFORM_BELL_JSON).expect("bundled fixture parses")
}

pub fn diamond_kernel() -> TransitionKernel {
    TransitionKernel::from_json(DIAMOND_KERNEL_JSON).expect("bundled fixture is a valid kernel")
}

pub fn five_sentence_liar() -> LiarConfig {
    parse_config(LIAR5_TXT).expect("bundled fixture parses")
}

pub fn classic_liar() -> LiarConfig {
    parse_config(LIAR_CLASSIC_TXT).expect("bundled fixture parses")
}

pub fn truth_teller() -> LiarConfig {
    parse_config(TRUTH_TELLER_TXT).expect("bundled fixture parses")
}

pub fn default_poll() -> PollConfig {
    PollConfig::from_json(POLL_DEFAULT_JSON).expect("bundled fixture parses")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::evaluate_bell_scenario;
    use crate::context::sample_trajectory;

    #[test]
    fn all_fixtures_load() {
        assert_eq!(evaluate_bell_scenario(&cats_scenario()).unwrap().chsh, 4.0);
        assert_eq!(evaluate_bell_scenario(&uniform_scenario()).unwrap().chsh, 0.0);
        assert_eq!(five_sentence_liar().m(), 5);
        assert_eq!(classic_liar().m(), 1);
        assert_eq!(truth_teller().m(), 1);
        assert_eq!(default_poll().population, 100_000);
    }

    #[test]
    fn making_money_actualizes_value() {
        let k = diamond_kernel();
        let start = k.state("potential").unwrap().clone();
        let ctx = k.context("make money").unwrap().clone();
        for seed in 0..20 {
            let t = sample_trajectory(&k, &start, std::slice::from_ref(&ctx), seed).unwrap();
            assert!(t.steps[0].1.label.contains("valuable"));
        }
    }
}
