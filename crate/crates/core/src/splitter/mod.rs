//! Changing-priors split construction, validation holdout and shift
//! diagnostics.

mod cp;
mod manifest;
mod shift;

pub use cp::{
    build_cp_splits, cluster_keys, hold_out_validation, iid_split, materialize, sample_ids, ClusterKey,
    SplitAssignment, SplitDatasets, SplitParams,
};
pub use manifest::{load_manifest, manifest_to_string, parse_manifest, save_manifest};
pub use shift::{measure_shift, ShiftReport, TypeShift};
