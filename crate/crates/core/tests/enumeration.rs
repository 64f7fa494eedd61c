// Brute force over every codebook and every channel outcome, for codes small
// enough to list. Independent of the kernel: it only counts distances.

use rcbound::baselines::{bec_converse, bec_dt, bec_rcu};
use rcbound::bounds::{bec_rc, bsc_rc};
use rcbound::kernel::EnsembleSize;
use rcbound::oracle::{rc_direct_bec, rc_direct_bsc};

/// Ensemble error probability when codeword 0 is sent. `outcomes` lists each
/// channel behaviour as (probability, per-position flip mask, erased mask).
fn enumerate(n: u32, m: u32, outcomes: &[(f64, u32, u32)]) -> f64 {
    let words = 1u64 << n;
    let books = words.pow(m);
    let mut eps = 0.0;
    for book in 0..books {
        let cw: Vec<u32> = (0..m).map(|k| ((book / words.pow(k)) % words) as u32).collect();
        for &(p, flips, erased) in outcomes {
            let y = cw[0] ^ flips;
            let keep = !erased & ((1u32 << n) - 1);
            let d: Vec<u32> = cw.iter().map(|&c| ((c ^ y) & keep).count_ones()).collect();
            let best = *d.iter().min().unwrap();
            let tied = d.iter().filter(|&&x| x == best).count();
            let p_correct = if d[0] == best { 1.0 / tied as f64 } else { 0.0 };
            eps += p * (1.0 - p_correct);
        }
    }
    eps / books as f64
}

fn bsc_outcomes(n: u32, delta: f64) -> Vec<(f64, u32, u32)> {
    (0..1u32 << n)
        .map(|e| {
            let k = e.count_ones() as i32;
            (delta.powi(k) * (1.0 - delta).powi(n as i32 - k), e, 0)
        })
        .collect()
}

fn bec_outcomes(n: u32, delta: f64) -> Vec<(f64, u32, u32)> {
    (0..1u32 << n)
        .map(|e| {
            let k = e.count_ones() as i32;
            (delta.powi(k) * (1.0 - delta).powi(n as i32 - k), 0, e)
        })
        .collect()
}

fn size(m: u32) -> EnsembleSize {
    EnsembleSize::from_count(m as u64).unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * b.abs().max(1e-300) + 1e-15
}

const SMALL: [(u32, u32); 10] = [(1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (4, 2), (4, 3)];

#[test]
fn symmetric_channel_matches_every_codebook() {
    for (n, m) in SMALL {
        for delta in [0.0, 0.1, 0.25, 0.5] {
            let want = enumerate(n, m, &bsc_outcomes(n, delta));
            let closed = bsc_rc(delta, n, size(m)).unwrap().epsilon();
            let direct = rc_direct_bsc(delta, n, m as u64).unwrap().to_linear();
            assert!(close(closed, want), "n={n} M={m} δ={delta}: {closed} vs {want}");
            assert!(close(direct, want), "n={n} M={m} δ={delta}: {direct} vs {want}");
        }
    }
}

#[test]
fn erasure_channel_matches_every_codebook() {
    for (n, m) in SMALL {
        for delta in [0.0, 0.1, 0.5, 0.9, 1.0] {
            let want = enumerate(n, m, &bec_outcomes(n, delta));
            let closed = bec_rc(delta, n, size(m)).unwrap().epsilon();
            let direct = rc_direct_bec(delta, n, m as u64).unwrap().to_linear();
            assert!(close(closed, want), "n={n} M={m} δ={delta}: {closed} vs {want}");
            assert!(close(direct, want), "n={n} M={m} δ={delta}: {direct} vs {want}");
        }
    }
}

#[test]
fn hand_enumerated_anchors() {
    assert!((enumerate(1, 2, &bsc_outcomes(1, 0.1)) - 0.3).abs() < 1e-15);
    assert!((enumerate(2, 2, &bec_outcomes(2, 0.5)) - 0.28125).abs() < 1e-15);
    assert!((enumerate(2, 4, &bec_outcomes(2, 1.0)) - 0.75).abs() < 1e-15);
}

/// Each baseline term depends on the erasure pattern only through the number
/// of unerased positions; walk every pattern instead of grouping them.
fn baseline_by_patterns(n: u32, delta: f64, term: impl Fn(i32) -> f64) -> f64 {
    bec_outcomes(n, delta)
        .iter()
        .map(|&(p, _, erased)| p * term(n as i32 - erased.count_ones() as i32))
        .sum()
}

#[test]
fn baselines_match_their_defining_sums() {
    for n in 1..=3u32 {
        for delta in [0.0, 0.2, 0.5, 0.8, 1.0] {
            for m in [1.0, 2.0, 3.0, 4.5, 8.0, 32.0] {
                let e = EnsembleSize::new(f64::log2(m)).unwrap();
                let rcu = baseline_by_patterns(n, delta, |u| ((m - 1.0) * 2f64.powi(-u)).min(1.0));
                let dt = baseline_by_patterns(n, delta, |u| ((m - 1.0) / 2.0 * 2f64.powi(-u)).min(1.0));
                let conv = baseline_by_patterns(n, delta, |u| (1.0 - 2f64.powi(u) / m).max(0.0));
                let tag = format!("n={n} δ={delta} M={m}");
                assert!(close(bec_rcu(delta, n, e).unwrap().epsilon(), rcu), "rcu {tag}");
                assert!(close(bec_dt(delta, n, e).unwrap().epsilon(), dt), "dt {tag}");
                assert!(close(bec_converse(delta, n, e).unwrap().epsilon(), conv), "converse {tag}");
            }
        }
    }
}

#[test]
fn baseline_hand_sums() {
    let m = |k: u64| EnsembleSize::from_count(k).unwrap();
    assert!((bec_rcu(0.5, 2, m(2)).unwrap().epsilon() - 0.5625).abs() < 1e-15);
    assert!((bec_dt(0.5, 2, m(4)).unwrap().epsilon() - 0.71875).abs() < 1e-15);
    // The formula gives 0.25·(1 - 4/8) + 0.5·(1 - 2/8) + 0.25·(1 - 1/8).
    assert!((bec_converse(0.5, 2, m(8)).unwrap().epsilon() - 0.71875).abs() < 1e-15);
    assert!(bec_converse(0.0, 4, m(2)).unwrap().log_epsilon.is_zero());
    for k in [2, 5, 64] {
        assert_eq!(bec_rcu(1.0, 5, m(k)).unwrap().epsilon(), 1.0);
        let want = 1.0 - 1.0 / k as f64;
        assert!((bec_converse(1.0, 5, m(k)).unwrap().epsilon() - want).abs() < 1e-15);
        assert!((bec_rc(1.0, 5, m(k)).unwrap().epsilon() - want).abs() < 1e-15);
    }
}
