//! Desk-scale synthetic data: scripted routes, detector noise models, a
//! rule-based surrogate planner driven in closed loop, and brute-force
//! oracles for the metric kernels.

mod closed_loop;
mod noise;
pub mod oracle;
mod planner;
mod scenario;

pub use closed_loop::{simulate_route, surrogate_outcome, Outcome, SimConfig, SimStats};
pub use noise::{apply_noise, noise_ladder, noisy_detections, NoiseModel, NoisyFrame, FALSE_POSITIVE_RADIUS};
pub use planner::{commanded_speed, stopping_limit, surrogate_planner, PlannerConfig, PlannerObject};
pub use scenario::{
    generate_scenario, generate_script, open_loop_pose, ObjectScript, Scenario, ScenarioConfig, Segment,
    LANE_OFFSET, PARKING_OFFSET, POSITION_QUANTUM, VELOCITY_QUANTUM,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent generator stream `index` of the family seeded by `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Stable 64-bit FNV-1a hash of a route id, used to pick its stream.
pub fn route_key(route_id: &str) -> u64 {
    route_id
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}
