//! Endogenous and exogenous statistics for undirected relational events.
//!
//! [`HistoryState`] is the counting-process state just before the evaluation
//! time. Events are stored undirected, so the directed four-term sums used to
//! define degree and triangle statistics reduce to their single-term forms:
//! degree counts distinct past partners and triangle counts shared partners.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{n_pairs, ActorId, ActorTable, Dyad, DyadicCovariate};

/// Denominator floor for `dissim_cont`.
pub const DISSIM_FLOOR: f64 = 1e-6;

static DISSIM_WARNED: AtomicBool = AtomicBool::new(false);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatKind {
    DegreeAbs,
    RepetitionCount,
    FirstRepetition,
    Triangle,
    SimCont,
    DissimCont,
    SumCont,
    MatchCat,
    DyadicNetwork,
}

impl StatKind {
    pub fn name(self) -> &'static str {
        match self {
            StatKind::DegreeAbs => "degree_abs",
            StatKind::RepetitionCount => "repetition_count",
            StatKind::FirstRepetition => "first_repetition",
            StatKind::Triangle => "triangle",
            StatKind::SimCont => "sim_cont",
            StatKind::DissimCont => "dissim_cont",
            StatKind::SumCont => "sum_cont",
            StatKind::MatchCat => "match_cat",
            StatKind::DyadicNetwork => "dyadic_network",
        }
    }

    pub fn needs_covariate(self) -> bool {
        matches!(
            self,
            StatKind::SimCont
                | StatKind::DissimCont
                | StatKind::SumCont
                | StatKind::MatchCat
                | StatKind::DyadicNetwork
        )
    }

    pub fn is_endogenous(self) -> bool {
        !self.needs_covariate()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatisticSpec {
    pub kind: StatKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covariate: Option<String>,
}

impl StatisticSpec {
    pub fn endogenous(kind: StatKind) -> Self {
        StatisticSpec {
            kind,
            covariate: None,
        }
    }

    pub fn covariate(kind: StatKind, name: impl Into<String>) -> Self {
        StatisticSpec {
            kind,
            covariate: Some(name.into()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.kind.needs_covariate(), &self.covariate) {
            (true, None) => Err(Error::MissingCovariateName(self.kind.name())),
            (false, Some(_)) => Err(Error::UnexpectedCovariateName(self.kind.name())),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for StatisticSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.covariate {
            Some(c) => write!(f, "{}({c})", self.kind.name()),
            None => f.write_str(self.kind.name()),
        }
    }
}

/// Counting-process state `N(t⁻)` with cached partner sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HistoryState {
    n: usize,
    pair_counts: Vec<u32>,
    adjacency: Vec<BTreeSet<ActorId>>,
    degrees: Vec<u32>,
    shared: Vec<u32>,
    total: u64,
}

impl HistoryState {
    pub fn new(n_actors: usize) -> Self {
        HistoryState {
            n: n_actors,
            pair_counts: vec![0; n_pairs(n_actors)],
            adjacency: vec![BTreeSet::new(); n_actors],
            degrees: vec![0; n_actors],
            shared: vec![0; n_pairs(n_actors)],
            total: 0,
        }
    }

    pub fn n_actors(&self) -> usize {
        self.n
    }

    pub fn pair_count(&self, dyad: Dyad) -> u32 {
        self.pair_counts[dyad.index(self.n)]
    }

    /// Distinct past partners of `actor`.
    pub fn degree(&self, actor: ActorId) -> u32 {
        self.degrees[actor]
    }

    pub fn partners(&self, actor: ActorId) -> &BTreeSet<ActorId> {
        &self.adjacency[actor]
    }

    /// Number of actors that both endpoints have interacted with.
    pub fn shared_partners(&self, dyad: Dyad) -> u32 {
        self.shared[dyad.index(self.n)]
    }

    /// Events accepted so far.
    pub fn total_events(&self) -> u64 {
        self.total
    }

    /// Records one more event on `dyad`. Partner sets, degrees and shared-partner
    /// counts change only when the dyad is new.
    pub fn apply_event(&mut self, dyad: Dyad) {
        let (a, b) = (dyad.a(), dyad.b());
        let idx = dyad.index(self.n);
        self.total += 1;
        self.pair_counts[idx] += 1;
        if self.pair_counts[idx] > 1 {
            return;
        }
        for &h in &self.adjacency[a] {
            if h != b {
                self.shared[Dyad::new(b, h).expect("distinct").index(self.n)] += 1;
            }
        }
        for &h in &self.adjacency[b] {
            if h != a {
                self.shared[Dyad::new(a, h).expect("distinct").index(self.n)] += 1;
            }
        }
        self.adjacency[a].insert(b);
        self.adjacency[b].insert(a);
        self.degrees[a] += 1;
        self.degrees[b] += 1;
    }
}

/// Statistic resolved against an actor table for repeated evaluation.
#[derive(Clone, Copy, Debug)]
enum Resolved<'a> {
    DegreeAbs,
    RepetitionCount,
    FirstRepetition,
    Triangle,
    SimCont(&'a [f64]),
    DissimCont(&'a [f64]),
    SumCont(&'a [f64]),
    MatchCat(&'a [u32]),
    DyadicNetwork(&'a DyadicCovariate),
}

impl<'a> Resolved<'a> {
    fn new(spec: &StatisticSpec, actors: &'a ActorTable) -> Result<Self> {
        spec.validate()?;
        let cov = spec.covariate.as_deref().unwrap_or("");
        let cont = || {
            actors
                .continuous(cov)
                .ok_or_else(|| Error::UnknownCovariate(cov.to_string()))
        };
        Ok(match spec.kind {
            StatKind::DegreeAbs => Resolved::DegreeAbs,
            StatKind::RepetitionCount => Resolved::RepetitionCount,
            StatKind::FirstRepetition => Resolved::FirstRepetition,
            StatKind::Triangle => Resolved::Triangle,
            StatKind::SimCont => Resolved::SimCont(cont()?),
            StatKind::DissimCont => Resolved::DissimCont(cont()?),
            StatKind::SumCont => Resolved::SumCont(cont()?),
            StatKind::MatchCat => Resolved::MatchCat(
                &actors
                    .categorical(cov)
                    .ok_or_else(|| Error::UnknownCovariate(cov.to_string()))?
                    .codes,
            ),
            StatKind::DyadicNetwork => Resolved::DyadicNetwork(
                actors
                    .dyadic(cov)
                    .ok_or_else(|| Error::UnknownCovariate(cov.to_string()))?,
            ),
        })
    }

    #[inline]
    fn eval(self, state: &HistoryState, dyad: Dyad) -> f64 {
        let (a, b) = (dyad.a(), dyad.b());
        match self {
            Resolved::DegreeAbs => (state.degree(a) as f64 - state.degree(b) as f64).abs(),
            Resolved::RepetitionCount => state.pair_count(dyad) as f64,
            Resolved::FirstRepetition => (state.pair_count(dyad) > 0) as u8 as f64,
            Resolved::Triangle => state.shared_partners(dyad) as f64,
            Resolved::SimCont(x) => (x[a] - x[b]).abs(),
            Resolved::DissimCont(x) => {
                let d = (x[a] - x[b]).abs();
                if d < DISSIM_FLOOR {
                    if !DISSIM_WARNED.swap(true, Ordering::Relaxed) {
                        log::warn!("dissim_cont: |x_a - x_b| below {DISSIM_FLOOR:e}, clamping");
                    }
                    1.0 / DISSIM_FLOOR
                } else {
                    1.0 / d
                }
            }
            Resolved::SumCont(x) => x[a] + x[b],
            Resolved::MatchCat(c) => (c[a] == c[b]) as u8 as f64,
            Resolved::DyadicNetwork(net) => net.value(dyad),
        }
    }
}

/// A statistic list compiled against one actor table.
#[derive(Clone, Debug)]
pub struct StatEvaluator<'a> {
    stats: Vec<Resolved<'a>>,
}

impl<'a> StatEvaluator<'a> {
    pub fn new(specs: &[StatisticSpec], actors: &'a ActorTable) -> Result<Self> {
        let stats = specs
            .iter()
            .map(|s| Resolved::new(s, actors))
            .collect::<Result<_>>()?;
        Ok(StatEvaluator { stats })
    }

    pub fn len(&self) -> usize {
        self.stats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stats.is_empty()
    }

    /// Writes the statistic row for `dyad` into `out` (length [`Self::len`]).
    #[inline]
    pub fn row_into(&self, state: &HistoryState, dyad: Dyad, out: &mut [f64]) {
        for (o, s) in out.iter_mut().zip(&self.stats) {
            *o = s.eval(state, dyad);
        }
    }

    pub fn row(&self, state: &HistoryState, dyad: Dyad) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.row_into(state, dyad, &mut out);
        out
    }
}

pub fn stat_value(
    spec: &StatisticSpec,
    state: &HistoryState,
    actors: &ActorTable,
    dyad: Dyad,
) -> Result<f64> {
    Ok(Resolved::new(spec, actors)?.eval(state, dyad))
}

/// Statistic values for `dyad` in the declared order of `specs`.
pub fn stat_row(
    specs: &[StatisticSpec],
    state: &HistoryState,
    actors: &ActorTable,
    dyad: Dyad,
) -> Result<Vec<f64>> {
    Ok(StatEvaluator::new(specs, actors)?.row(state, dyad))
}

/// The five statistics of the reference data-generating process, in order:
/// degree difference, triangle, repetition count, covariate sum, category match.
pub fn reference_statistics(continuous: &str, categorical: &str) -> Vec<StatisticSpec> {
    vec![
        StatisticSpec::endogenous(StatKind::DegreeAbs),
        StatisticSpec::endogenous(StatKind::Triangle),
        StatisticSpec::endogenous(StatKind::RepetitionCount),
        StatisticSpec::covariate(StatKind::SumCont, continuous),
        StatisticSpec::covariate(StatKind::MatchCat, categorical),
    ]
}
