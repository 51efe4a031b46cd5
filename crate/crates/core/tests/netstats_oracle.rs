//! Incremental statistics against brute-force recomputation from the raw
//! event prefix.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use reldyad_core::events::{ActorTable, Categorical, Dyad};
use reldyad_core::netstats::{stat_row, HistoryState, StatKind, StatisticSpec};

fn all_specs() -> Vec<StatisticSpec> {
    vec![
        StatisticSpec::endogenous(StatKind::DegreeAbs),
        StatisticSpec::endogenous(StatKind::RepetitionCount),
        StatisticSpec::endogenous(StatKind::FirstRepetition),
        StatisticSpec::endogenous(StatKind::Triangle),
        StatisticSpec::covariate(StatKind::SimCont, "x"),
        StatisticSpec::covariate(StatKind::SumCont, "x"),
        StatisticSpec::covariate(StatKind::MatchCat, "g"),
    ]
}

fn table(n: usize, rng: &mut ChaCha20Rng) -> ActorTable {
    let mut t = ActorTable::new((0..n).map(|i| format!("v{i:03}")));
    t.insert_continuous("x", (0..n).map(|_| rng.random_range(-2.0..2.0)).collect())
        .unwrap();
    t.insert_categorical(
        "g",
        Categorical {
            codes: (0..n).map(|_| rng.random_range(0..3)).collect(),
            levels: vec!["p".into(), "q".into(), "r".into()],
        },
    )
    .unwrap();
    t
}

/// Directed count matrix: events are stored once, in canonical orientation.
fn counts(prefix: &[Dyad], n: usize) -> Vec<Vec<u32>> {
    let mut c = vec![vec![0; n]; n];
    for d in prefix {
        c[d.a()][d.b()] += 1;
    }
    c
}

fn scratch_row(prefix: &[Dyad], n: usize, actors: &ActorTable, dyad: Dyad) -> Vec<f64> {
    let c = counts(prefix, n);
    let on = |i: usize, j: usize| (c[i][j] > 0) as u32;
    let (a, b) = (dyad.a(), dyad.b());
    let deg = |x: usize| (0..n).map(|h| on(x, h) + on(h, x)).sum::<u32>() as f64;
    let nab = (c[a][b] + c[b][a]) as f64;
    // the four-term form, written out literally
    let tri: u32 = (0..n)
        .map(|h| on(a, h) * on(b, h) + on(h, a) * on(b, h) + on(a, h) * on(h, b) + on(h, a) * on(h, b))
        .sum();
    let x = actors.continuous("x").unwrap();
    let g = &actors.categorical("g").unwrap().codes;
    vec![
        (deg(a) - deg(b)).abs(),
        nab,
        (nab > 0.0) as u8 as f64,
        tri as f64,
        (x[a] - x[b]).abs(),
        x[a] + x[b],
        (g[a] == g[b]) as u8 as f64,
    ]
}

fn random_stream(rng: &mut ChaCha20Rng, n: usize, len: usize) -> Vec<Dyad> {
    (0..len)
        .map(|_| loop {
            let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
            if let Some(d) = Dyad::new(i, j) {
                break d;
            }
        })
        .collect()
}

#[test]
fn incremental_matches_scratch_on_random_streams() {
    let specs = all_specs();
    for s in 0..100u64 {
        let mut rng = ChaCha20Rng::seed_from_u64(1000 + s);
        let n = rng.random_range(3..12);
        let len = rng.random_range(1..=200);
        let actors = table(n, &mut rng);
        let stream = random_stream(&mut rng, n, len);
        let mut state = HistoryState::new(n);
        for (m, &ev) in stream.iter().enumerate() {
            // every dyad at t_m^-
            for a in 0..n {
                for b in a + 1..n {
                    let d = Dyad::new(a, b).unwrap();
                    let inc = stat_row(&specs, &state, &actors, d).unwrap();
                    assert_eq!(inc, scratch_row(&stream[..m], n, &actors, d), "stream {s}, event {m}, dyad {d}");
                }
            }
            state.apply_event(ev);
        }
        assert_eq!(state.total_events(), stream.len() as u64);
    }
}

#[test]
fn triangle_reduction_equals_four_term_sum() {
    let tri = [StatisticSpec::endogenous(StatKind::Triangle)];
    for s in 0..100u64 {
        let mut rng = ChaCha20Rng::seed_from_u64(7 + s);
        let n = rng.random_range(3..15);
        let actors = table(n, &mut rng);
        let len = rng.random_range(1..=200);
        let stream = random_stream(&mut rng, n, len);
        let mut state = HistoryState::new(n);
        for &ev in &stream {
            state.apply_event(ev);
        }
        let c = counts(&stream, n);
        let on = |i: usize, j: usize| (c[i][j] > 0) as u32;
        for a in 0..n {
            for b in a + 1..n {
                let four: u32 = (0..n)
                    .map(|h| on(a, h) * on(b, h) + on(h, a) * on(b, h) + on(a, h) * on(h, b) + on(h, a) * on(h, b))
                    .sum();
                let d = Dyad::new(a, b).unwrap();
                assert_eq!(stat_row(&tri, &state, &actors, d).unwrap()[0], four as f64);
            }
        }
    }
}

#[test]
fn two_path_closes_one_triangle() {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let actors = table(3, &mut rng);
    let mut st = HistoryState::new(3);
    st.apply_event(Dyad::new(0, 2).unwrap());
    st.apply_event(Dyad::new(2, 1).unwrap());
    let tri = [StatisticSpec::endogenous(StatKind::Triangle)];
    assert_eq!(stat_row(&tri, &st, &actors, Dyad::new(1, 0).unwrap()).unwrap(), vec![1.0]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn invariants_hold(seed in any::<u64>(), n in 3usize..10, len in 1usize..120) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let actors = table(n, &mut rng);
        let stream = random_stream(&mut rng, n, len);
        let specs = all_specs();
        let mut state = HistoryState::new(n);
        let mut prev: Vec<Vec<f64>> = Vec::new();
        for &ev in &stream {
            state.apply_event(ev);
            let mut total = 0;
            for a in 0..n {
                // degree = |adjacency|, adjacency symmetric
                prop_assert_eq!(state.degree(a) as usize, state.partners(a).len());
                for &h in state.partners(a) {
                    prop_assert!(state.partners(h).contains(&a));
                }
            }
            let mut rows = Vec::new();
            for a in 0..n {
                for b in a + 1..n {
                    let d = Dyad::new(a, b).unwrap();
                    total += state.pair_count(d) as u64;
                    let row = stat_row(&specs, &state, &actors, d).unwrap();
                    prop_assert!(row[2] == 0.0 || row[2] == 1.0);
                    rows.push(row);
                }
            }
            prop_assert_eq!(total, state.total_events());
            // repetition count and triangle never decrease
            for (r, p) in rows.iter().zip(&prev) {
                prop_assert!(r[1] >= p[1] && r[3] >= p[3]);
            }
            prev = rows;
        }
    }
}
