//! Sparse l1 and l2 center classifiers.
//!
//! A center classifier assigns a sample to the class whose center is nearer.
//! The sparse variants constrain the two class centers to differ on at most
//! `k` features, so training doubles as feature selection. Both are trained
//! exactly: the l2 model keeps the `k` features with the largest centroid gap,
//! the l1 model the `k` features whose class-wise median dispersions improve
//! most on the pooled one. A single feature ranking yields the optimal model
//! for every `k` at once (see [`sparsity_path`]).
//!
//! ```
//! use sparse_center::{train_l2, Dataset, Label};
//!
//! let d = Dataset::from_samples(
//!     &[vec![1.0, 0.0], vec![3.0, 0.0], vec![0.0, 2.0], vec![0.0, 4.0]],
//!     vec![Label::Positive, Label::Positive, Label::Negative, Label::Negative],
//! )
//! .unwrap();
//! let model = train_l2(&d, 1).unwrap();
//! assert_eq!(model.selected(), &[1]);
//! assert_eq!(model.predict(&[2.0, 0.5]).unwrap().label, Label::Positive);
//! ```

pub mod dataset;
pub mod error;
pub mod eval;
pub mod l1;
pub mod l2;
pub mod model;
pub mod oracle;
pub mod path;
pub mod ranking;
pub mod stats;
pub mod synthetic;
pub mod trainer;

pub use dataset::{
    load_csv, load_feature_table, read_csv, standardize, standardize_with_ddof, write_csv, CsvOptions, Dataset,
    FeatureScale, FeatureTable, Label, LabelMapping, Partition, ScaleMode,
};
pub use error::{Error, ErrorCategory, Result};
pub use eval::{evaluate, split, EvalConfig, EvalRecord, EvalReport, Holdout, SplitStrategy};
pub use l1::{objective_l1, sparsity_path_l1, train_l1, L1TrainArtifacts};
pub use l2::{closed_form_optimum_l2, objective_l2, sparsity_path_l2, train_l2, L2TrainArtifacts, OnlineL2Trainer};
pub use model::{CenterModel, Decision, ModelKind, Prediction};
pub use oracle::{brute_force, OracleResult};
pub use path::{PathRecord, SparsityPath};
pub use ranking::{RankOrder, RankedScores};
pub use stats::{
    class_centroids, class_medians, dispersion_triple, recursive_centroid_update, weighted_median, ClassCenters,
    DispersionTriple, WeightedMedian,
};
pub use trainer::{objective, sparsity_path, train, ScaledArtifacts, TrainArtifacts, TrainOptions};
