//! Shared fixtures for the kernel benchmarks.

use reldyad_core::rng::rng_from_seed;
use reldyad_core::{
    generate, AugmentModel, Coefficients, FitOptions, GeneratorSpec, ModelSpec, RiskSet, SimulatedStream,
    SplineConfig,
};

pub const SEED: u64 = 1234;

/// A labelled desk-size stream from the first reference design.
pub fn desk_stream() -> SimulatedStream {
    let spec = GeneratorSpec::dg1(20, 300);
    generate(&spec, &mut rng_from_seed(SEED)).expect("reference design generates")
}

/// REMSE model over `sim` with a spline baseline on the true component.
pub fn remse_model(sim: &SimulatedStream) -> AugmentModel {
    let true_spec = ModelSpec {
        statistics: GeneratorSpec::dg1(2, 1).true_intensity.spec.statistics,
        spline: Some(SplineConfig::default()),
    };
    let n = sim.stream.actors().len();
    AugmentModel::new(
        &sim.stream,
        true_spec,
        Some(ModelSpec::intercept_only()),
        RiskSet::all_pairs(n),
        FitOptions::default(),
    )
    .expect("model builds")
}

/// Coefficients at the generating values with a flat baseline.
pub fn generating_coefficients(model: &AugmentModel) -> Coefficients {
    let k = model.true_model.dim();
    let mut t = vec![0.0; k];
    t[0] = -5.0;
    let slopes = [0.2, 0.1, -0.5, 2.0, -2.0];
    t[k - slopes.len()..].copy_from_slice(&slopes);
    Coefficients {
        true_part: t.into(),
        spurious: Some(vec![-2.5].into()),
    }
}
