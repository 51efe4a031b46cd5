//! Event streams, actor tables and risk sets, plus CSV ingestion.
//!
//! Events are undirected: `(a, b, t)` and `(b, a, t)` denote the same event and
//! are stored with `a < b` under the lexicographic order of actor ids. Actor ids
//! are kept in a sorted table, so the index order coincides with the id order.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of an actor in its [`ActorTable`].
pub type ActorId = usize;

/// Canonical undirected pair of distinct actors, `a < b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dyad {
    a: ActorId,
    b: ActorId,
}

impl Dyad {
    /// Returns `None` for a self-loop.
    pub fn new(x: ActorId, y: ActorId) -> Option<Self> {
        match x.cmp(&y) {
            std::cmp::Ordering::Less => Some(Dyad { a: x, b: y }),
            std::cmp::Ordering::Greater => Some(Dyad { a: y, b: x }),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn a(self) -> ActorId {
        self.a
    }

    pub fn b(self) -> ActorId {
        self.b
    }

    pub fn contains(self, actor: ActorId) -> bool {
        self.a == actor || self.b == actor
    }

    /// Position in the upper-triangular enumeration of all pairs of `n` actors.
    pub fn index(self, n: usize) -> usize {
        pair_index(self.a, self.b, n)
    }
}

impl fmt::Display for Dyad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

#[inline]
pub(crate) fn pair_index(a: usize, b: usize, n: usize) -> usize {
    debug_assert!(a < b && b < n);
    a * (2 * n - a - 1) / 2 + (b - a - 1)
}

pub(crate) fn n_pairs(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Ground-truth status of an event, when known.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    True,
    Spurious,
    #[default]
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event {
    pub dyad: Dyad,
    pub time: f64,
    pub label: Label,
}

/// Categorical covariate: per-actor level codes and the level names.
#[derive(Clone, Debug, PartialEq)]
pub struct Categorical {
    pub codes: Vec<u32>,
    pub levels: Vec<String>,
}

/// Dense dyadic covariate. Reads are symmetrized: `value(a, b) = (raw(a, b) + raw(b, a)) / 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct DyadicCovariate {
    n: usize,
    raw: Vec<f64>,
}

impl DyadicCovariate {
    pub fn zeros(n: usize) -> Self {
        DyadicCovariate {
            n,
            raw: vec![0.0; n * n],
        }
    }

    pub fn set_raw(&mut self, from: ActorId, to: ActorId, value: f64) {
        self.raw[from * self.n + to] = value;
    }

    pub fn raw(&self, from: ActorId, to: ActorId) -> f64 {
        self.raw[from * self.n + to]
    }

    pub fn value(&self, dyad: Dyad) -> f64 {
        0.5 * (self.raw(dyad.a, dyad.b) + self.raw(dyad.b, dyad.a))
    }
}

/// Actor universe with exogenous covariates. Every covariate map is total over the ids.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ActorTable {
    ids: Vec<String>,
    index: HashMap<String, ActorId>,
    continuous: BTreeMap<String, Vec<f64>>,
    categorical: BTreeMap<String, Categorical>,
    dyadic: BTreeMap<String, DyadicCovariate>,
}

impl ActorTable {
    /// Builds a table from arbitrary ids; duplicates are merged and ids sorted.
    pub fn new<I, S>(ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let ids: BTreeSet<String> = ids.into_iter().map(Into::into).collect();
        let ids: Vec<String> = ids.into_iter().collect();
        let index = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i))
            .collect();
        ActorTable {
            ids,
            index,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, actor: ActorId) -> &str {
        &self.ids[actor]
    }

    pub fn lookup(&self, id: &str) -> Option<ActorId> {
        self.index.get(id).copied()
    }

    pub fn continuous(&self, name: &str) -> Option<&[f64]> {
        self.continuous.get(name).map(Vec::as_slice)
    }

    pub fn categorical(&self, name: &str) -> Option<&Categorical> {
        self.categorical.get(name)
    }

    pub fn dyadic(&self, name: &str) -> Option<&DyadicCovariate> {
        self.dyadic.get(name)
    }

    pub fn continuous_names(&self) -> impl Iterator<Item = &str> {
        self.continuous.keys().map(String::as_str)
    }

    pub fn categorical_names(&self) -> impl Iterator<Item = &str> {
        self.categorical.keys().map(String::as_str)
    }

    pub fn insert_continuous(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        self.check_len(values.len())?;
        self.continuous.insert(name.into(), values);
        Ok(())
    }

    pub fn insert_categorical(&mut self, name: impl Into<String>, column: Categorical) -> Result<()> {
        self.check_len(column.codes.len())?;
        self.categorical.insert(name.into(), column);
        Ok(())
    }

    pub fn insert_dyadic(&mut self, name: impl Into<String>, column: DyadicCovariate) -> Result<()> {
        self.check_len(column.n)?;
        self.dyadic.insert(name.into(), column);
        Ok(())
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got,
            });
        }
        Ok(())
    }
}

/// Time-constant set of dyads at risk.
#[derive(Clone, Debug, PartialEq)]
pub struct RiskSet {
    n_actors: usize,
    pairs: Vec<Dyad>,
    slots: Vec<u32>,
}

const NO_SLOT: u32 = u32::MAX;

impl RiskSet {
    /// All unordered pairs of `n` actors.
    pub fn all_pairs(n: usize) -> Self {
        let mut pairs = Vec::with_capacity(n_pairs(n));
        for a in 0..n {
            for b in a + 1..n {
                pairs.push(Dyad { a, b });
            }
        }
        let slots = (0..pairs.len() as u32).collect();
        RiskSet {
            n_actors: n,
            pairs,
            slots,
        }
    }

    /// Explicit dyad list; duplicates collapse.
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = Dyad>) -> Result<Self> {
        let set: BTreeSet<Dyad> = pairs.into_iter().collect();
        let mut slots = vec![NO_SLOT; n_pairs(n)];
        let mut list = Vec::with_capacity(set.len());
        for d in set {
            if d.b >= n {
                return Err(Error::UnknownActor(d.b.to_string()));
            }
            slots[d.index(n)] = list.len() as u32;
            list.push(d);
        }
        Ok(RiskSet {
            n_actors: n,
            pairs: list,
            slots,
        })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn n_actors(&self) -> usize {
        self.n_actors
    }

    pub fn pairs(&self) -> &[Dyad] {
        &self.pairs
    }

    /// Position of `dyad` in [`RiskSet::pairs`].
    pub fn slot(&self, dyad: Dyad) -> Option<usize> {
        if dyad.b >= self.n_actors {
            return None;
        }
        match self.slots[dyad.index(self.n_actors)] {
            NO_SLOT => None,
            s => Some(s as usize),
        }
    }

    /// Checks that every event's dyad is at risk.
    pub fn covers(&self, stream: &EventStream) -> Result<()> {
        for e in &stream.events {
            if self.slot(e.dyad).is_none() {
                return Err(Error::NotInRiskSet(e.dyad.a, e.dyad.b));
            }
        }
        Ok(())
    }
}

pub fn risk_set_size(rs: &RiskSet) -> usize {
    rs.len()
}

/// Time-ordered stream of undirected events over `[0, horizon]`.
#[derive(Clone, Debug, PartialEq)]
pub struct EventStream {
    events: Vec<Event>,
    horizon: f64,
    actors: ActorTable,
}

impl EventStream {
    /// Validates an already canonical stream: strictly increasing positive times,
    /// all times within the horizon, actor ids inside the table.
    pub fn new(events: Vec<Event>, horizon: f64, actors: ActorTable) -> Result<Self> {
        let mut prev = 0.0;
        for (m, e) in events.iter().enumerate() {
            if e.time < 0.0 {
                return Err(Error::NegativeTime { row: m, time: e.time });
            }
            if e.time <= prev {
                return Err(Error::TiedTimestamp { row: m, time: e.time });
            }
            if e.time > horizon {
                return Err(Error::BeyondHorizon {
                    time: e.time,
                    horizon,
                });
            }
            if e.dyad.b >= actors.len() {
                return Err(Error::UnknownActor(e.dyad.b.to_string()));
            }
            prev = e.time;
        }
        Ok(EventStream {
            events,
            horizon,
            actors,
        })
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn actors(&self) -> &ActorTable {
        &self.actors
    }

    /// Interval lengths `t_m - t_{m-1}` with `t_0 = 0`.
    pub fn gaps(&self) -> impl Iterator<Item = f64> + '_ {
        let mut prev = 0.0;
        self.events.iter().map(move |e| {
            let d = e.time - prev;
            prev = e.time;
            d
        })
    }

    /// Ground-truth labels, if every event carries one.
    pub fn truth(&self) -> Option<Vec<bool>> {
        self.events
            .iter()
            .map(|e| match e.label {
                Label::True => Some(true),
                Label::Spurious => Some(false),
                Label::Unknown => None,
            })
            .collect()
    }

    /// Replaces the actor table with a superset of the current ids, remapping events.
    pub fn rebind(self, table: ActorTable) -> Result<Self> {
        let remap: Vec<ActorId> = self
            .actors
            .ids()
            .iter()
            .map(|id| table.lookup(id).ok_or_else(|| Error::UnknownActor(id.clone())))
            .collect::<Result<_>>()?;
        let events = self
            .events
            .into_iter()
            .map(|e| Event {
                dyad: Dyad::new(remap[e.dyad.a], remap[e.dyad.b]).expect("remap keeps pairs distinct"),
                ..e
            })
            .collect();
        Ok(EventStream {
            events,
            horizon: self.horizon,
            actors: table,
        })
    }

    /// Same events with new covariates on the same actor ids.
    pub fn with_actors(mut self, table: ActorTable) -> Result<Self> {
        if table.ids() != self.actors.ids() {
            return self.rebind(table);
        }
        self.actors = table;
        Ok(self)
    }
}

/// One parsed input row, before canonicalization.
#[derive(Clone, Debug)]
pub struct RawEvent {
    pub row: usize,
    pub time: f64,
    pub actor_a: String,
    pub actor_b: String,
    pub label: Label,
}

/// Column names and preprocessing switches for event ingestion.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct EventSchema {
    pub time: String,
    pub actor_a: String,
    pub actor_b: String,
    /// Label column; ignored when absent from the header.
    pub label: Option<String>,
    /// Overrides the default horizon (the last event time).
    pub horizon: Option<f64>,
    pub jitter_ties: bool,
}

impl Default for EventSchema {
    fn default() -> Self {
        EventSchema {
            time: "time".into(),
            actor_a: "actor_a".into(),
            actor_b: "actor_b".into(),
            label: Some("label".into()),
            horizon: None,
            jitter_ties: true,
        }
    }
}

/// Canonicalizes, sorts and validates raw rows. Ties (including events at the
/// origin) are broken by adding `k * eps` to the k-th tied event, with
/// `eps = 1e-9 * mean inter-event gap`, keeping input order.
pub fn build_stream(
    rows: Vec<RawEvent>,
    mut actors: ActorTable,
    schema: &EventSchema,
) -> Result<EventStream> {
    for r in &rows {
        if r.actor_a == r.actor_b {
            return Err(Error::SelfLoop {
                row: r.row,
                actor: r.actor_a.clone(),
            });
        }
        if !(r.time.is_finite() && r.time >= 0.0) {
            return Err(Error::NegativeTime { row: r.row, time: r.time });
        }
    }
    let missing: Vec<&String> = rows
        .iter()
        .flat_map(|r| [&r.actor_a, &r.actor_b])
        .filter(|id| actors.lookup(id).is_none())
        .collect();
    if !missing.is_empty() {
        let mut ids: Vec<String> = actors.ids().to_vec();
        ids.extend(missing.into_iter().cloned());
        if actors.continuous.is_empty() && actors.categorical.is_empty() && actors.dyadic.is_empty() {
            actors = ActorTable::new(ids);
        } else {
            let unknown = rows
                .iter()
                .flat_map(|r| [&r.actor_a, &r.actor_b])
                .find(|id| actors.lookup(id).is_none())
                .expect("missing is nonempty");
            return Err(Error::UnknownActor(unknown.clone()));
        }
    }

    let mut rows = rows;
    rows.sort_by(|x, y| x.time.total_cmp(&y.time));

    let m = rows.len();
    let t_max = rows.last().map_or(0.0, |r| r.time);
    let mean_gap = if m > 0 && t_max > 0.0 { t_max / m as f64 } else { 1.0 };
    let eps = 1e-9 * mean_gap;

    let mut times: Vec<f64> = Vec::with_capacity(m);
    let mut run_start = 0.0;
    let mut k = 0usize;
    let mut jittered = 0usize;
    for (i, r) in rows.iter().enumerate() {
        let origin_tie = r.time == 0.0;
        let tie = i > 0 && r.time == rows[i - 1].time;
        if tie || origin_tie {
            if !schema.jitter_ties {
                return Err(Error::TiedTimestamp { row: r.row, time: r.time });
            }
            if !tie {
                // first event sitting on the origin t_0 = 0
                run_start = r.time;
                k = 1;
            } else {
                k += 1;
            }
            jittered += 1;
            times.push(run_start + k as f64 * eps);
        } else {
            run_start = r.time;
            k = 0;
            times.push(r.time);
        }
    }
    if jittered > 0 {
        log::warn!("jittered {jittered} tied event times by multiples of {eps:e}");
    }

    let mut events = Vec::with_capacity(m);
    let mut prev = 0.0;
    for (r, &t) in rows.iter().zip(&times) {
        if t <= prev {
            return Err(Error::TiedTimestamp { row: r.row, time: r.time });
        }
        prev = t;
        let a = actors.lookup(&r.actor_a).expect("actor registered");
        let b = actors.lookup(&r.actor_b).expect("actor registered");
        events.push(Event {
            dyad: Dyad::new(a, b).expect("self-loops rejected"),
            time: t,
            label: r.label,
        });
    }
    let horizon = match schema.horizon {
        Some(h) => {
            if let Some(e) = events.last() {
                if e.time > h {
                    return Err(Error::BeyondHorizon { time: e.time, horizon: h });
                }
            }
            h
        }
        None => prev,
    };
    EventStream::new(events, horizon, actors)
}

fn open_csv(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

fn header_position(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize> {
    headers.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        row: 1,
        message: format!("missing column `{name}`"),
    })
}

fn csv_error(path: &Path, row: usize, e: csv::Error) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        row,
        message: e.to_string(),
    }
}

/// Reads an events CSV (`time,actor_a,actor_b[,label]` by default). Rows are
/// numbered from 2, counting the header as row 1.
pub fn ingest_events(path: impl AsRef<Path>, schema: &EventSchema) -> Result<EventStream> {
    let path = path.as_ref();
    let mut reader = open_csv(path)?;
    let headers = reader.headers().map_err(|e| csv_error(path, 1, e))?.clone();
    let t_col = header_position(&headers, &schema.time, path)?;
    let a_col = header_position(&headers, &schema.actor_a, path)?;
    let b_col = header_position(&headers, &schema.actor_b, path)?;
    let l_col = schema
        .label
        .as_deref()
        .and_then(|l| headers.iter().position(|h| h == l));

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| csv_error(path, row, e))?;
        let field = |c: usize| record.get(c).unwrap_or("");
        let time: f64 = field(t_col).parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            row,
            message: format!("invalid time `{}`", field(t_col)),
        })?;
        let label = match l_col.map(field) {
            None | Some("") => Label::Unknown,
            Some("1") | Some("true") => Label::True,
            Some("0") | Some("false") | Some("spurious") => Label::Spurious,
            Some(other) => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    row,
                    message: format!("invalid label `{other}`"),
                })
            }
        };
        let (actor_a, actor_b) = (field(a_col).to_string(), field(b_col).to_string());
        if actor_a.is_empty() || actor_b.is_empty() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                row,
                message: "empty actor id".into(),
            });
        }
        rows.push(RawEvent {
            row,
            time,
            actor_a,
            actor_b,
            label,
        });
    }
    build_stream(rows, ActorTable::default(), schema)
}

/// Writes `time,actor_a,actor_b[,label]`; the label column appears when any
/// event carries a known label.
pub fn write_events(stream: &EventStream, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, 0, e))?;
    let labelled = stream.events.iter().any(|e| e.label != Label::Unknown);
    let mut header = vec!["time", "actor_a", "actor_b"];
    if labelled {
        header.push("label");
    }
    w.write_record(&header).map_err(|e| csv_error(path, 0, e))?;
    for e in &stream.events {
        let mut rec = vec![
            e.time.to_string(),
            stream.actors.id(e.dyad.a).to_string(),
            stream.actors.id(e.dyad.b).to_string(),
        ];
        if labelled {
            rec.push(
                match e.label {
                    Label::True => "1",
                    Label::Spurious => "0",
                    Label::Unknown => "",
                }
                .to_string(),
            );
        }
        w.write_record(&rec).map_err(|e| csv_error(path, 0, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovariateKind {
    Continuous,
    Categorical,
}

/// Reads `actor,<name1>,<name2>,...`. Columns default to continuous unless
/// declared categorical in `kinds`. Returns a table over the union of the
/// existing ids and the file's actors; every existing actor must have a row.
pub fn ingest_covariates(
    path: impl AsRef<Path>,
    actors: &ActorTable,
    kinds: &BTreeMap<String, CovariateKind>,
) -> Result<ActorTable> {
    let path = path.as_ref();
    let mut reader = open_csv(path)?;
    let headers = reader.headers().map_err(|e| csv_error(path, 1, e))?.clone();
    let id_col = header_position(&headers, "actor", path)?;
    for name in kinds.keys() {
        header_position(&headers, name, path)?;
    }

    let mut rows: BTreeMap<String, (usize, csv::StringRecord)> = BTreeMap::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| csv_error(path, row, e))?;
        let id = record.get(id_col).unwrap_or("").to_string();
        if rows.contains_key(&id) {
            return Err(Error::DuplicateActor(id));
        }
        rows.insert(id, (row, record));
    }
    let missing: Vec<String> = actors
        .ids()
        .iter()
        .filter(|id| !rows.contains_key(*id))
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingCovariateActors(missing));
    }

    let mut table = ActorTable::new(actors.ids().iter().cloned().chain(rows.keys().cloned()));
    for (c, name) in headers.iter().enumerate() {
        if c == id_col {
            continue;
        }
        let kind = kinds.get(name).copied().unwrap_or(CovariateKind::Continuous);
        match kind {
            CovariateKind::Continuous => {
                let mut values = Vec::with_capacity(table.len());
                for id in table.ids() {
                    let (row, rec) = &rows[id];
                    let raw = rec.get(c).unwrap_or("");
                    let v: f64 = raw.parse().map_err(|_| Error::NonNumeric {
                        column: name.to_string(),
                        row: *row,
                        value: raw.to_string(),
                    })?;
                    values.push(v);
                }
                table.insert_continuous(name, values)?;
            }
            CovariateKind::Categorical => {
                let levels: BTreeSet<&str> =
                    rows.values().map(|(_, rec)| rec.get(c).unwrap_or("")).collect();
                let levels: Vec<String> = levels.into_iter().map(str::to_string).collect();
                let codes = table
                    .ids()
                    .iter()
                    .map(|id| {
                        let v = rows[id].1.get(c).unwrap_or("");
                        levels.iter().position(|l| l == v).expect("level collected") as u32
                    })
                    .collect();
                table.insert_categorical(name, Categorical { codes, levels })?;
            }
        }
    }
    Ok(table)
}

/// Reads a dyadic covariate `actor_a,actor_b,value`; absent pairs are 0.
pub fn ingest_dyadic(path: impl AsRef<Path>, name: &str, actors: &ActorTable) -> Result<ActorTable> {
    let path = path.as_ref();
    let mut reader = open_csv(path)?;
    let headers = reader.headers().map_err(|e| csv_error(path, 1, e))?.clone();
    let a_col = header_position(&headers, "actor_a", path)?;
    let b_col = header_position(&headers, "actor_b", path)?;
    let v_col = header_position(&headers, "value", path)?;
    let mut cov = DyadicCovariate::zeros(actors.len());
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| csv_error(path, row, e))?;
        let lookup = |c: usize| {
            let id = record.get(c).unwrap_or("");
            actors.lookup(id).ok_or_else(|| Error::UnknownActor(id.to_string()))
        };
        let (a, b) = (lookup(a_col)?, lookup(b_col)?);
        let raw = record.get(v_col).unwrap_or("");
        let v: f64 = raw.parse().map_err(|_| Error::NonNumeric {
            column: "value".into(),
            row,
            value: raw.to_string(),
        })?;
        cov.set_raw(a, b, v);
    }
    let mut table = actors.clone();
    table.insert_dyadic(name, cov)?;
    Ok(table)
}

/// Reads `actor_a,actor_b` rows into a risk set over `actors`.
pub fn ingest_risk_set(path: impl AsRef<Path>, actors: &ActorTable) -> Result<RiskSet> {
    let path = path.as_ref();
    let mut reader = open_csv(path)?;
    let headers = reader.headers().map_err(|e| csv_error(path, 1, e))?.clone();
    let a_col = header_position(&headers, "actor_a", path)?;
    let b_col = header_position(&headers, "actor_b", path)?;
    let mut pairs = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| csv_error(path, row, e))?;
        let lookup = |c: usize| {
            let id = record.get(c).unwrap_or("");
            actors.lookup(id).ok_or_else(|| Error::UnknownActor(id.to_string()))
        };
        let (a, b) = (lookup(a_col)?, lookup(b_col)?);
        let d = Dyad::new(a, b).ok_or_else(|| Error::SelfLoop {
            row,
            actor: actors.id(a).to_string(),
        })?;
        pairs.push(d);
    }
    RiskSet::from_pairs(actors.len(), pairs)
}
