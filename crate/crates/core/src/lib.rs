//! Blameworthiness over compiled decision scenarios.
//!
//! A [`logic::Scenario`] declares context, decision and outcome variables
//! plus a constraint theory. The theory compiles to an SDD
//! ([`circuits`]), which is parameterized from complete data into a PSDD
//! ([`psdd`]). Utilities are learned from the fitted model ([`utility`]) and
//! blame is scored with back-door sums over the model's support
//! ([`blame`]). [`oracle`] recomputes everything by brute force.
//!
//! ```
//! use blameworthy::blame::{BlameModel, BlameQuery};
//! use blameworthy::circuits::{compile_scenario, VtreeStrategy};
//! use blameworthy::data::{generate_lung_cancer, LungCancerParams, LUNG_CANCER};
//! use blameworthy::psdd::Psdd;
//! use blameworthy::utility::{learn_utility, UtilitySpec};
//!
//! let sc = LUNG_CANCER.scenario();
//! let circuit = compile_scenario(&sc, VtreeStrategy::Balanced)?;
//! assert_eq!(circuit.model_count(), 52u32.into());
//!
//! let data = generate_lung_cancer(2000, 7, 0.9, &LungCancerParams::default())?;
//! let model = Psdd::fit(&circuit, &data, 1.0)?;
//! let (u, _) = learn_utility(&model, &sc, UtilitySpec::default())?;
//!
//! let q = BlameQuery::parse("action = !M\nalternatives = M\nevent = !(S_DP)\nN = 1\n", &sc)?;
//! let report = BlameModel::new(&model, &sc).with_utility(&u).report(&q)?;
//! assert_eq!(report.overall_db, 0.0);
//! # Ok::<(), blameworthy::Error>(())
//! ```

pub mod blame;
pub mod circuits;
pub mod data;
pub mod logic;
pub mod oracle;
pub mod psdd;
pub mod utility;

use thiserror::Error;

/// Any error raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Logic(#[from] logic::LogicError),
    #[error(transparent)]
    Circuit(#[from] circuits::CircuitError),
    #[error(transparent)]
    Data(#[from] data::DataError),
    #[error(transparent)]
    Psdd(#[from] psdd::PsddError),
    #[error(transparent)]
    Utility(#[from] utility::UtilityError),
    #[error(transparent)]
    Blame(#[from] blame::BlameError),
    #[error(transparent)]
    Oracle(#[from] oracle::OracleError),
}
