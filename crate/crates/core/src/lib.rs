//! Projection sparse principal component analysis.
//!
//! Principal components are computed by power iteration with deflation
//! ([`eigen`], [`pca`]); each one is then approximated by a least-squares
//! projection of its score onto a small set of variables ([`spca`]). The
//! variable set is chosen ([`selection`]) so that the projection keeps at
//! least a requested share `alpha` of the parent component's variance.
//!
//! ```
//! use pspca::{center, fit_spca, DenseMatrix, SelectionPolicy, SpcaOptions};
//!
//! let x = DenseMatrix::from_row_major(4, 3, &[
//!     1.0, 2.0, 0.1,
//!     2.0, 4.1, -0.2,
//!     3.0, 5.9, 0.3,
//!     4.0, 8.0, -0.1,
//! ]).unwrap();
//! let cd = center(&x, false).unwrap();
//! let fit = fit_spca(&cd, 1, &SelectionPolicy::default(), &SpcaOptions::default()).unwrap();
//! assert!(fit.components[0].projection_r2 >= 0.95);
//! ```

pub mod bench;
pub mod cli;
pub mod datagen;
pub mod eigen;
pub mod error;
pub mod io;
pub mod matrix;
pub mod pca;
pub mod report;
pub mod selection;
pub mod spca;

pub use datagen::{recovery_metrics, simulate_spiked, RecoveryMetrics, SpikedTruth, WeightProfile};
pub use eigen::{leading_eigenpair, leading_eigenpair_gram, top_k_eigenpairs, EigenPair, PowerConfig};
pub use error::{Error, Result};
pub use io::{load_csv, write_csv, LabeledMatrix};
pub use matrix::{center, covariance, gram, orthonormalize, solve_spd, CenteredData, DenseMatrix};
pub use pca::{explained_variance_ratio, fit_pca, PcaModel};
pub use report::{write_report, Report};
pub use selection::{
    backward_eliminate, exhaustive_best, forward_select, threshold_select, SelectionMethod, SelectionPolicy,
    SelectionTrace, TerminatedBy,
};
pub use spca::{
    adjusted_vexp, deflate, fit_spca, project_loadings, projection_r2, DeflationMode, IndexSet, SparseComponent,
    SpcaFit, SpcaOptions,
};
