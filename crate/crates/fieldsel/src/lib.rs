//! Estimation of one-point conditional probabilities of a discrete random
//! field by penalized neighborhood selection.
//!
//! Given i.i.d. observations of finitely many sites, the conditional law of
//! one site given the others is estimated by the empirical conditional on a
//! data-chosen conditioning set. Candidate sets are scored by a penalized
//! empirical criterion (quadratic or Küllback); the penalty constant can be
//! taken from the theory or calibrated by the slope heuristic, which locates
//! the complexity jump along a penalty sweep and selects at twice the
//! detected minimal constant.
//!
//! The crate also carries an exact ground-truth engine (full-table Gibbs
//! models with enumeration-based marginals, conditionals and sampling) so
//! risks, oracles and the whole simulation study are computable exactly,
//! plus the `fieldsel` CLI that reproduces the study's figures as CSV
//! tables.
//!
//! ```
//! use fieldsel::prelude::*;
//!
//! let model = GibbsModel::ising_grid_nn(3, 3, 0.2).unwrap();
//! let target = model.site_set().index_of("(1,1)").unwrap();
//! let batch = model.sample(500, 7, 0).unwrap();
//! let em = EmpiricalMeasure::fit(&batch).unwrap();
//!
//! let coll = enumerate_models(model.site_set(), target, 9).unwrap();
//! let pen = PenaltySpec::theoretical_l2(2.0, 2).unwrap();
//! let picked = select(&coll, Estimator::Empirical(&em), &pen, 500).unwrap();
//! assert!(picked.chosen.contains(target));
//! ```

pub mod bench;
pub mod empirical;
pub mod error;
pub mod field;
pub mod model_file;
pub mod risk;
pub mod selection;
pub mod slope;
pub mod tables;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::empirical::EmpiricalMeasure;
    pub use crate::error::{Error, Result};
    pub use crate::field::{Alphabet, Configuration, GibbsModel, SampleBatch, SiteSet, SiteSubset};
    pub use crate::model_file::load_model;
    pub use crate::risk::{
        kullback_risk_decomposition, l2_norm_sq, l2_risk_decomposition, log_loss,
        proof_diagnostics, typicality_event_holds, LossKind, ProofDiagnostics, RiskEngine,
        RiskReport,
    };
    pub use crate::selection::{
        enumerate_models, filter_collection, kl_criterion, l2_criterion, oracle, select,
        FilterKind, ModelCollection, PenaltySpec, SelectionResult,
    };
    pub use crate::slope::{
        calibrate, default_k_grid, detect_kmin, penalty_path, CalibrationResult, ComplexityKind,
        JumpRule, PenaltyPath,
    };
    pub use crate::tables::Estimator;
}
