//! Exact simulation of labelled event streams.
//!
//! Component intensities only change when an event occurs, so the superposed
//! process is sampled as competing exponentials: draw the waiting time from
//! the total rate, then choose dyad and component proportionally to their
//! rates.

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{ActorTable, Categorical, Event, EventStream, Label, RiskSet};
use crate::model::ModelSpec;
use crate::netstats::{reference_statistics, HistoryState, StatEvaluator};

/// Events generated before giving up.
pub const MAX_EVENTS: usize = 1_000_000;

/// A constant-baseline intensity with fixed coefficients
/// `[intercept, statistics...]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Intensity {
    pub spec: ModelSpec,
    pub coefficients: Vec<f64>,
}

impl Intensity {
    pub fn constant(log_rate: f64) -> Self {
        Intensity {
            spec: ModelSpec::intercept_only(),
            coefficients: vec![log_rate],
        }
    }

    fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.spec.spline.is_some() {
            return Err(Error::Config(
                "generator intensities must have a constant baseline".into(),
            ));
        }
        let want = 1 + self.spec.statistics.len();
        if self.coefficients.len() != want {
            return Err(Error::LengthMismatch {
                expected: want,
                got: self.coefficients.len(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// Stop at the given number of true events.
    TrueEvents(usize),
    /// Stop at a fixed end of the observation window.
    Horizon(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovariateRecipe {
    /// Standard-normal actor covariates.
    pub continuous: Vec<String>,
    /// Actor covariates uniform over the given number of levels.
    pub categorical: Vec<(String, u32)>,
}

impl Default for CovariateRecipe {
    fn default() -> Self {
        CovariateRecipe {
            continuous: vec!["cont".into()],
            categorical: vec![("cat".into(), 7)],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub n_actors: usize,
    pub true_intensity: Intensity,
    /// `None` means no spurious events.
    pub spurious_intensity: Option<Intensity>,
    pub stop: StopRule,
    #[serde(default)]
    pub covariates: CovariateRecipe,
}

/// True coefficients of the reference design, intercept first.
pub const REFERENCE_TRUE: [f64; 6] = [-5.0, 0.2, 0.1, -0.5, 2.0, -2.0];
/// Spurious log-rate of the first reference design.
pub const REFERENCE_SPURIOUS: f64 = -2.5;

impl GeneratorSpec {
    fn reference(n_actors: usize, true_events: usize, spurious: Option<f64>) -> Self {
        GeneratorSpec {
            n_actors,
            true_intensity: Intensity {
                spec: ModelSpec {
                    statistics: reference_statistics("cont", "cat"),
                    spline: None,
                },
                coefficients: REFERENCE_TRUE.to_vec(),
            },
            spurious_intensity: spurious.map(Intensity::constant),
            stop: StopRule::TrueEvents(true_events),
            covariates: CovariateRecipe::default(),
        }
    }

    /// Reference design with a constant spurious rate.
    pub fn dg1(n_actors: usize, true_events: usize) -> Self {
        Self::reference(n_actors, true_events, Some(REFERENCE_SPURIOUS))
    }

    /// Reference design without spurious events.
    pub fn dg2(n_actors: usize, true_events: usize) -> Self {
        Self::reference(n_actors, true_events, None)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_actors < 2 {
            return Err(Error::Config("need at least two actors".into()));
        }
        match self.stop {
            StopRule::TrueEvents(0) => return Err(Error::Config("stop rule must be positive".into())),
            StopRule::Horizon(h) if !(h > 0.0 && h.is_finite()) => {
                return Err(Error::Config("stop rule must be positive".into()))
            }
            _ => {}
        }
        self.true_intensity.validate()?;
        if let Some(s) = &self.spurious_intensity {
            s.validate()?;
        }
        Ok(())
    }
}

/// Actor ids `a01, a02, ...` with covariates drawn from `recipe`.
pub fn draw_actors<R: Rng + ?Sized>(n: usize, recipe: &CovariateRecipe, rng: &mut R) -> Result<ActorTable> {
    let width = n.to_string().len().max(2);
    let mut table = ActorTable::new((1..=n).map(|i| format!("a{i:0width$}")));
    for name in &recipe.continuous {
        let x = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        table.insert_continuous(name.clone(), x)?;
    }
    for (name, levels) in &recipe.categorical {
        if *levels == 0 {
            return Err(Error::Config(format!("categorical `{name}` needs at least one level")));
        }
        let lw = levels.to_string().len();
        let codes = (0..n).map(|_| rng.random_range(0..*levels)).collect();
        let names = (1..=*levels).map(|l| format!("c{l:0lw$}")).collect();
        table.insert_categorical(name.clone(), Categorical { codes, levels: names })?;
    }
    Ok(table)
}

#[derive(Clone, Debug)]
pub struct SimulatedStream {
    /// Events with ground-truth labels.
    pub stream: EventStream,
    /// Percentage of spurious events.
    pub realized_pfe: f64,
    pub true_history: HistoryState,
    pub spurious_history: HistoryState,
}

impl SimulatedStream {
    pub fn n_true(&self) -> usize {
        self.true_history.total_events() as usize
    }

    pub fn n_spurious(&self) -> usize {
        self.spurious_history.total_events() as usize
    }
}

struct RateTable<'a> {
    eval: StatEvaluator<'a>,
    coef: &'a [f64],
    rates: Vec<f64>,
    row: Vec<f64>,
}

impl<'a> RateTable<'a> {
    fn new(intensity: &'a Intensity, actors: &'a ActorTable, n_dyads: usize) -> Result<Self> {
        let eval = StatEvaluator::new(&intensity.spec.statistics, actors)?;
        let q = eval.len();
        Ok(RateTable {
            eval,
            coef: &intensity.coefficients,
            rates: vec![0.0; n_dyads],
            row: vec![0.0; q],
        })
    }

    fn refresh(&mut self, state: &HistoryState, rs: &RiskSet) {
        for (r, &d) in self.rates.iter_mut().zip(rs.pairs()) {
            self.eval.row_into(state, d, &mut self.row);
            let lin: f64 = self.coef[1..].iter().zip(&self.row).map(|(a, b)| a * b).sum();
            *r = (self.coef[0] + lin).exp();
        }
    }
}

enum Stop {
    True(usize),
    Total(usize),
    Horizon(f64),
}

/// Samples a labelled stream for `spec` on a freshly drawn actor table.
pub fn generate<R: Rng + ?Sized>(spec: &GeneratorSpec, rng: &mut R) -> Result<SimulatedStream> {
    spec.validate()?;
    let actors = draw_actors(spec.n_actors, &spec.covariates, rng)?;
    let stop = match spec.stop {
        StopRule::TrueEvents(k) => Stop::True(k),
        StopRule::Horizon(h) => Stop::Horizon(h),
    };
    generate_on(spec, actors, stop, rng)
}

/// Samples a labelled stream on a given actor table.
pub fn generate_with_actors<R: Rng + ?Sized>(
    spec: &GeneratorSpec,
    actors: ActorTable,
    rng: &mut R,
) -> Result<SimulatedStream> {
    spec.validate()?;
    let stop = match spec.stop {
        StopRule::TrueEvents(k) => Stop::True(k),
        StopRule::Horizon(h) => Stop::Horizon(h),
    };
    generate_on(spec, actors, stop, rng)
}

fn generate_on<R: Rng + ?Sized>(
    spec: &GeneratorSpec,
    actors: ActorTable,
    stop: Stop,
    rng: &mut R,
) -> Result<SimulatedStream> {
    let n = actors.len();
    let rs = RiskSet::all_pairs(n);
    let mut h1 = HistoryState::new(n);
    let mut h0 = HistoryState::new(n);
    let mut events = Vec::new();
    {
        let mut r1 = RateTable::new(&spec.true_intensity, &actors, rs.len())?;
        let mut r0 = spec
            .spurious_intensity
            .as_ref()
            .map(|s| RateTable::new(s, &actors, rs.len()))
            .transpose()?;
        r1.refresh(&h1, &rs);
        if let Some(r) = r0.as_mut() {
            r.refresh(&h0, &rs);
        }
        let mut t = 0.0f64;
        let mut n_true = 0usize;
        loop {
            match stop {
                Stop::True(k) if n_true >= k => break,
                Stop::Total(k) if events.len() >= k => break,
                _ => {}
            }
            if events.len() >= MAX_EVENTS {
                return Err(Error::Runaway(MAX_EVENTS));
            }
            let s1: f64 = r1.rates.iter().sum();
            let s0: f64 = r0.as_ref().map_or(0.0, |r| r.rates.iter().sum());
            let total = s1 + s0;
            if !(total.is_finite() && total > 0.0) {
                return Err(Error::ZeroTotalRate);
            }
            let wait = Exp::new(total).expect("positive rate").sample(rng);
            let mut next = t + wait;
            if next <= t {
                next = t + t.abs().max(f64::MIN_POSITIVE) * f64::EPSILON;
            }
            if let Stop::Horizon(h) = stop {
                if next > h {
                    break;
                }
            }
            t = next;
            let mut u = rng.random::<f64>() * total;
            let (is_true, slot) = if u < s1 {
                (true, pick(&r1.rates, u))
            } else {
                u -= s1;
                (false, pick(&r0.as_ref().expect("s0 > 0").rates, u))
            };
            let dyad = rs.pairs()[slot];
            events.push(Event {
                dyad,
                time: t,
                label: if is_true { Label::True } else { Label::Spurious },
            });
            if is_true {
                n_true += 1;
                h1.apply_event(dyad);
                r1.refresh(&h1, &rs);
            } else {
                h0.apply_event(dyad);
                if let Some(r) = r0.as_mut() {
                    r.refresh(&h0, &rs);
                }
            }
        }
    }
    let horizon = match stop {
        Stop::Horizon(h) => h,
        _ => events.last().map_or(1.0, |e| e.time),
    };
    let m = events.len();
    let spurious = events.iter().filter(|e| e.label == Label::Spurious).count();
    let stream = EventStream::new(events, horizon, actors)?;
    Ok(SimulatedStream {
        stream,
        realized_pfe: if m == 0 { 0.0 } else { 100.0 * spurious as f64 / m as f64 },
        true_history: h1,
        spurious_history: h0,
    })
}

fn pick(rates: &[f64], mut u: f64) -> usize {
    for (i, &r) in rates.iter().enumerate() {
        if u < r {
            return i;
        }
        u -= r;
    }
    // rounding can leave u marginally above the last cumulative sum
    rates.iter().rposition(|&r| r > 0.0).unwrap_or(rates.len() - 1)
}

/// Kolmogorov–Smirnov test of exponential waiting times.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
    pub mean_wait: f64,
    pub total_rate: f64,
}

/// Asymptotic Kolmogorov tail probability with the small-sample correction
/// `λ = (√n + 0.12 + 0.11/√n) D`.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let en = (n as f64).sqrt();
    let lambda = (en + 0.12 + 0.11 / en) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    let mut prev = 0.0f64;
    for k in 1..=100 {
        let term = sign * 2.0 * (-2.0 * (k as f64).powi(2) * lambda * lambda).exp();
        sum += term;
        if term.abs() <= 1e-10 * prev.max(sum.abs()) || term.abs() < 1e-300 {
            return sum.clamp(0.0, 1.0);
        }
        prev = term.abs();
        sign = -sign;
    }
    1.0
}

/// One-sample KS statistic of `samples` against `Exp(rate)`.
pub fn ks_exponential(samples: &[f64], rate: f64) -> f64 {
    let mut x = samples.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = 1.0 - (-rate * v).exp();
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Draws `draws` events from a constant-rate spec and tests the waiting times
/// against `Exp(Σλ)`.
pub fn interevent_check<R: Rng + ?Sized>(spec: &GeneratorSpec, draws: usize, rng: &mut R) -> Result<KsResult> {
    spec.validate()?;
    let constant = |i: &Intensity| i.spec.statistics.is_empty();
    if !constant(&spec.true_intensity) || !spec.spurious_intensity.as_ref().map_or(true, constant) {
        return Err(Error::Config("interevent check needs constant intensities".into()));
    }
    let n_dyads = (spec.n_actors * (spec.n_actors - 1) / 2) as f64;
    let total_rate = n_dyads
        * (spec.true_intensity.coefficients[0].exp()
            + spec
                .spurious_intensity
                .as_ref()
                .map_or(0.0, |s| s.coefficients[0].exp()));
    let actors = draw_actors(spec.n_actors, &CovariateRecipe { continuous: vec![], categorical: vec![] }, rng)?;
    let sim = generate_on(spec, actors, Stop::Total(draws), rng)?;
    let gaps: Vec<f64> = sim.stream.gaps().collect();
    let d = ks_exponential(&gaps, total_rate);
    Ok(KsResult {
        statistic: d,
        p_value: ks_p_value(d, gaps.len()),
        n: gaps.len(),
        mean_wait: gaps.iter().sum::<f64>() / gaps.len().max(1) as f64,
        total_rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn constant_spec(n: usize, log_rate: f64, stop: StopRule) -> GeneratorSpec {
        GeneratorSpec {
            n_actors: n,
            true_intensity: Intensity::constant(log_rate),
            spurious_intensity: None,
            stop,
            covariates: CovariateRecipe { continuous: vec![], categorical: vec![] },
        }
    }

    #[test]
    fn equal_dyads_split_evenly() {
        // three actors, but only count the two dyads touching actor 0
        let spec = constant_spec(3, 0.0, StopRule::TrueEvents(15_000));
        let sim = generate(&spec, &mut rng_from_seed(5)).unwrap();
        let n = sim.stream.len() as f64;
        let first = sim.stream.events().iter().filter(|e| e.dyad.a() == 0 && e.dyad.b() == 1).count() as f64;
        let p = 1.0 / 3.0;
        let se = (p * (1.0 - p) / n).sqrt();
        assert!((first / n - p).abs() < 3.0 * se);
    }

    #[test]
    fn dg2_has_no_spurious_events() {
        let sim = generate(&GeneratorSpec::dg2(10, 100), &mut rng_from_seed(2)).unwrap();
        assert_eq!(sim.realized_pfe, 0.0);
        assert_eq!(sim.n_true(), 100);
        assert!(sim.stream.events().iter().all(|e| e.label == Label::True));
    }

    #[test]
    fn dg1_mixes_labels() {
        let sim = generate(&GeneratorSpec::dg1(20, 300), &mut rng_from_seed(2)).unwrap();
        assert_eq!(sim.n_true(), 300);
        assert!(sim.n_spurious() > 0);
        assert_eq!(sim.stream.len(), sim.n_true() + sim.n_spurious());
        let t = sim.stream.actors().categorical("cat").unwrap();
        assert_eq!(t.levels.len(), 7);
    }

    #[test]
    fn ks_p_value_reference_points() {
        // Kolmogorov distribution: P(K > 1.3581) ≈ 0.05, P(K > 1.2238) ≈ 0.10
        assert!((ks_p_value(1.3581 / 1e4f64.sqrt(), 10_000) - 0.05).abs() < 2e-3);
        assert!((ks_p_value(1.2238 / 1e4f64.sqrt(), 10_000) - 0.10).abs() < 2e-3);
        assert_eq!(ks_p_value(0.0, 100), 1.0);
        assert!(ks_p_value(0.5, 100) < 1e-10);
    }

    #[test]
    fn errors() {
        let mut s = constant_spec(3, 0.0, StopRule::TrueEvents(0));
        assert!(generate(&s, &mut rng_from_seed(1)).is_err());
        s.stop = StopRule::TrueEvents(5);
        s.true_intensity.coefficients[0] = -1e4;
        assert!(matches!(generate(&s, &mut rng_from_seed(1)), Err(Error::ZeroTotalRate)));
        s.true_intensity.coefficients.push(1.0);
        assert!(matches!(generate(&s, &mut rng_from_seed(1)), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn horizon_stop() {
        let spec = constant_spec(2, 0.0, StopRule::Horizon(50.0));
        let sim = generate(&spec, &mut rng_from_seed(8)).unwrap();
        assert_eq!(sim.stream.horizon(), 50.0);
        assert!(sim.stream.events().last().unwrap().time <= 50.0);
    }
}
