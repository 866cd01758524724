//! Reference values for the faultsearch workbench computed without it: a
//! forward-mass enumeration of fault sequences, the closed-form expected time
//! typed out afresh, fault-free trajectory sums and a Kolmogorov-Smirnov
//! distance. The `acceptance` test target checks the criteria against these
//! and the library.

use std::collections::BTreeMap;

/// Expected termination time of the zig-zag with turning points
/// `g^(k + eps)`, target at `+n`, by pushing probability mass forward
/// through every fault sequence.
///
/// Mass `m` leaving the origin in direction `d` for excursion `k` walks to
/// `g^(k+eps)` and attempts a turn. A success brings it back to the origin
/// and it starts excursion `j + 1` the other way; a failure carries it on to
/// the next turning point. Mass below `1e-300` or deeper than `depth` levels
/// is dropped.
pub fn brute_det(g: f64, p: f64, n: f64, eps: f64, first_right: bool, depth: usize) -> f64 {
    let x = |k: usize| g.powf(k as f64 + eps);
    let mut expected = 0.0;
    let mut pending: BTreeMap<(usize, i8), f64> = BTreeMap::new();
    pending.insert((0, if first_right { 1 } else { -1 }), 1.0);
    for k in 0..depth {
        for d in [1i8, -1] {
            let Some(m) = pending.remove(&(k, d)) else {
                continue;
            };
            if d == 1 && x(k) >= n {
                expected += m * n;
                continue;
            }
            expected += m * x(k);
            let mut j = k;
            let mut mass = m;
            while mass > 1e-300 && j < k + depth {
                let succ = mass * (1.0 - p);
                expected += succ * x(j);
                *pending.entry((j + 1, -d)).or_insert(0.0) += succ;
                mass *= p;
                if d == 1 && x(j + 1) >= n {
                    expected += mass * (n - x(j));
                    break;
                }
                expected += mass * (x(j + 1) - x(j));
                j += 1;
            }
        }
    }
    expected
}

/// Deterministic search (`eps = 0`, first sweep right).
pub fn brute_r0(g: f64, p: f64, n: f64) -> f64 {
    brute_det(g, p, n, 0.0, true, 400)
}

/// Midpoint average of [`brute_det`] over `eps` in `[0, 1)`.
pub fn brute_rand(g: f64, p: f64, n: f64, first_right: bool, nodes: usize) -> f64 {
    (0..nodes)
        .map(|i| brute_det(g, p, n, (i as f64 + 0.5) / nodes as f64, first_right, 150))
        .sum::<f64>()
        / nodes as f64
}

/// Closed-form expected time of the deterministic search, typed out afresh.
pub fn r0_formula(g: f64, p: f64, t: u32, n: f64) -> f64 {
    let s = (2.0 * p - 1.0).powi(t as i32);
    (1.0 - p) * g.powi(t as i32 + 1) * (1.0 + (1.0 - 2.0 * p) * (g + (g - 1.0) * s))
        / ((g - 1.0) * (1.0 - g * p))
        - 2.0 * (1.0 - p) / (g - 1.0)
        + n
}

/// Fault-free zig-zag time with turning points `d (-1)^i g^(i+eps)`, target
/// at signed `x`.
pub fn fault_free_zigzag(g: f64, eps: f64, first_right: bool, x: f64) -> f64 {
    let mut time = 0.0;
    let mut sign = if first_right { 1.0 } else { -1.0 };
    for i in 0.. {
        let r = g.powf(i as f64 + eps);
        if x * sign > 0.0 && x.abs() <= r {
            return time + x.abs();
        }
        time += 2.0 * r;
        sign = -sign;
    }
    unreachable!()
}

/// Kolmogorov-Smirnov distance between the sample and Uniform[0,1).
pub fn ks_distance(sample: &[f64]) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in xs.iter().enumerate() {
        let below = i as f64 / n;
        let above = (i + 1) as f64 / n;
        d = d.max((x - below).abs()).max((above - x).abs());
    }
    d
}

/// Relative difference.
pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
