//! Relational event models for undirected dyadic event streams with a latent
//! split into true and spurious events.
//!
//! The pieces, bottom up: [`events`] (data model and ingestion), [`netstats`]
//! (history-dependent statistics), [`smooth`] (penalized B-spline baselines),
//! [`model`] (intensity specifications), [`ppois`] (penalized Poisson fits),
//! [`augment`] (the imputation/posterior sampler), [`report`] (combination of
//! draws), [`simulate`] (exact generation) and [`study`] (replicated
//! experiments).

pub mod augment;
pub mod error;
pub mod events;
pub mod model;
pub mod netstats;
pub mod ppois;
pub mod report;
pub mod rng;
pub mod simulate;
pub mod smooth;
pub mod study;

pub use augment::{
    istep, pstep, run_chain, run_chains, AugmentModel, ChainConfig, ChainOutput, Coefficients,
    ImputationSweep, LatentLabels, PosteriorDraw, TraceRow,
};
pub use error::{Error, Result};
pub use events::{
    ingest_covariates, ingest_dyadic, ingest_events, ingest_risk_set, risk_set_size, write_events, ActorTable,
    CovariateKind, Dyad, Event, EventSchema, EventStream, Label, RiskSet,
};
pub use model::{ComponentModel, ModelSpec};
pub use netstats::{HistoryState, StatKind, StatisticSpec};
pub use ppois::{
    build_dataset, fit_penalized_poisson, select_gamma, Component, FitOptions, FitResult,
    GammaChoice, PoissonDataset,
};
pub use report::{combine, plain_report, FitReport};
pub use rng::derive_seed;
pub use simulate::{generate, GeneratorSpec, SimulatedStream, StopRule};
pub use smooth::{build_basis, build_penalty, SplineBasis, SplineConfig};
pub use study::{run_study, Dg, Scale, StudyConfig, StudyResult};
