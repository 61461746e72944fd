//! The four benchmark task definitions and the per-sample parameter sampling
//! used by the combined task.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::propagation::{Environment, SourceSpec, TaskConfig, TaskVariant};

/// Fully resolved parameters of one dataset sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleParams {
    pub sample_id: u64,
    pub task: TaskConfig,
    pub seed: u64,
}

/// Tunable scenario defaults, overridable from a TOML config file. Every
/// effective value ends up echoed in the manifest or the per-sample sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioOverrides {
    pub source_db: f64,
    pub frequency_hz: f64,
    pub reflection_order: u32,
    pub alpha_vert: f64,
    pub combined_db_range: [f64; 2],
    pub combined_temperature_range: [f64; 2],
    pub combined_humidity_range: [f64; 2],
}

impl Default for ScenarioOverrides {
    fn default() -> Self {
        Self {
            source_db: 95.0,
            frequency_hz: 500.0,
            reflection_order: 1,
            alpha_vert: 0.1,
            combined_db_range: [60.0, 115.0],
            combined_temperature_range: [-10.0, 30.0],
            combined_humidity_range: [20.0, 90.0],
        }
    }
}

/// Deterministic per-sample generator: a fixed key stream per
/// `(master_seed, sample_id)`, independent of the order samples are drawn in.
fn sample_rng(master_seed: u64, sample_id: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
    rng.set_stream(sample_id);
    rng
}

/// Builds the task configuration for one sample with default knobs.
pub fn make_task(variant: TaskVariant, sample_id: u64, master_seed: u64) -> TaskConfig {
    make_task_with(variant, sample_id, master_seed, &ScenarioOverrides::default())
}

/// Builds the task configuration for one sample.
///
/// Baseline, diffraction and reflection tasks are fully deterministic
/// (95 dB at 500 Hz by default); the combined task draws source level,
/// temperature and humidity uniformly from the configured ranges.
pub fn make_task_with(
    variant: TaskVariant,
    sample_id: u64,
    master_seed: u64,
    overrides: &ScenarioOverrides,
) -> TaskConfig {
    let fixed_source = SourceSpec {
        level_db: overrides.source_db,
        frequency_hz: overrides.frequency_hz,
    };
    match variant {
        TaskVariant::Baseline => TaskConfig {
            variant,
            source: fixed_source,
            env: Environment::default(),
            enable_diffraction: false,
            max_reflection_order: 0,
            alpha_vert: 0.0,
            enable_atmosphere: false,
        },
        TaskVariant::Diffraction => TaskConfig {
            variant,
            source: fixed_source,
            env: Environment::default(),
            enable_diffraction: true,
            max_reflection_order: 0,
            alpha_vert: 0.0,
            enable_atmosphere: false,
        },
        TaskVariant::Reflection => TaskConfig {
            variant,
            source: fixed_source,
            env: Environment::default(),
            enable_diffraction: false,
            max_reflection_order: overrides.reflection_order.max(1),
            alpha_vert: overrides.alpha_vert,
            enable_atmosphere: false,
        },
        TaskVariant::Combined => {
            let mut rng = sample_rng(master_seed, sample_id);
            let [db_lo, db_hi] = overrides.combined_db_range;
            let [t_lo, t_hi] = overrides.combined_temperature_range;
            let [h_lo, h_hi] = overrides.combined_humidity_range;
            let level_db = rng.random_range(db_lo..=db_hi);
            let temperature_c = rng.random_range(t_lo..=t_hi);
            let humidity_pct = rng.random_range(h_lo..=h_hi);
            TaskConfig {
                variant,
                source: SourceSpec {
                    level_db,
                    frequency_hz: overrides.frequency_hz,
                },
                env: Environment {
                    temperature_c,
                    humidity_pct,
                },
                enable_diffraction: true,
                max_reflection_order: overrides.reflection_order.max(1),
                alpha_vert: overrides.alpha_vert,
                enable_atmosphere: true,
            }
        }
    }
}
