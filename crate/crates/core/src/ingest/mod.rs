//! Dataset loaders, the synthetic generator and the native file formats.

mod persist;
mod survey_csv;
mod synthetic;
mod trajectory_csv;
mod uji;

pub use persist::write_atomic;
pub use persist::{
    database_from_json, database_to_json, load_database, save_database, DB_FORMAT, DB_VERSION,
};
pub use survey_csv::{read_survey_csv, Survey};
pub use synthetic::{
    generate_synthetic, SynthConfig, SyntheticData, TwinRegion, MIN_MODEL_DISTANCE,
};
pub use trajectory_csv::{read_trajectory_csv, trajectory_to_csv, write_trajectory_csv};
pub use uji::{
    group_reference_points, load_ujiindoorloc, read_uji_csv, uji_default_policy,
    validation_trajectories, UjiDataset, UjiFilter, UjiRecord, UjiTrajectory, UJI_MIN_RSSI,
    UJI_NOT_DETECTED, UJI_WAP_COUNT,
};
