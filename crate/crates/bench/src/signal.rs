//! Synthetic block-sparse test signals.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{BenchError, Result};

/// Uniform random composition of `total` into `parts` non-negative integers.
fn weak_composition<R: Rng>(rng: &mut R, total: usize, parts: usize) -> Vec<usize> {
    // Stars and bars: choose the bar positions among total + parts - 1 slots.
    let slots = total + parts - 1;
    let mut bars = index::sample(rng, slots, parts - 1).into_vec();
    bars.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut start = 0;
    for b in bars {
        out.push(b - start);
        start = b + 1;
    }
    out.push(slots - start);
    out
}

/// `N`-length signal with exactly `K` nonzeros split into `T` maximal runs.
///
/// Run lengths are a uniform composition of `K` into `T` positive parts, the
/// leftover zeros are spread uniformly over the `T + 1` gaps with at least one
/// zero between consecutive runs, nonzeros are i.i.d. standard normal and the
/// result has unit Euclidean norm.
pub fn gen_block_sparse(n: usize, k: usize, t: usize, seed: u64) -> Result<Vec<f64>> {
    if t == 0 || t > k || k > n {
        return Err(BenchError::Config(format!(
            "block-sparse signal needs 1 <= T <= K <= N (N={n}, K={k}, T={t})"
        )));
    }
    let required = k + (t - 1);
    if required > n {
        return Err(BenchError::InfeasiblePlacement { n, k, t });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let runs: Vec<usize> = weak_composition(&mut rng, k - t, t)
        .into_iter()
        .map(|r| r + 1)
        .collect();
    let gaps = weak_composition(&mut rng, n - required, t + 1);

    let mut x = vec![0.0; n];
    let mut pos = gaps[0];
    for (i, &len) in runs.iter().enumerate() {
        for v in &mut x[pos..pos + len] {
            *v = loop {
                let z: f64 = rng.sample(StandardNormal);
                if z != 0.0 {
                    break z;
                }
            };
        }
        pos += len;
        if i + 1 < t {
            pos += 1 + gaps[i + 1];
        }
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
    Ok(x)
}

/// Maximal runs of nonzeros as `(start, length)` pairs.
pub fn runs(x: &[f64]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < x.len() {
        if x[i] != 0.0 {
            let start = i;
            while i < x.len() && x[i] != 0.0 {
                i += 1;
            }
            out.push((start, i - start));
        } else {
            i += 1;
        }
    }
    out
}

/// Sizes of 4-connected nonzero clusters of a column-major `rows × cols` image.
pub fn connected_components(x: &[f64], rows: usize, cols: usize) -> Vec<usize> {
    let mut seen = vec![false; x.len()];
    let mut sizes = Vec::new();
    for start in 0..x.len() {
        if x[start] == 0.0 || seen[start] {
            continue;
        }
        let mut stack = vec![start];
        seen[start] = true;
        let mut size = 0;
        while let Some(i) = stack.pop() {
            size += 1;
            let (q, l) = (i % rows, i / rows);
            let mut nb = Vec::with_capacity(4);
            if q > 0 {
                nb.push(i - 1);
            }
            if q + 1 < rows {
                nb.push(i + 1);
            }
            if l > 0 {
                nb.push(i - rows);
            }
            if l + 1 < cols {
                nb.push(i + rows);
            }
            for j in nb {
                if x[j] != 0.0 && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        sizes.push(size);
    }
    sizes
}

/// Binary letter-like pattern on a `rows × cols` grid, vectorized column-major.
///
/// The glyph is a thick polyline: a few axis-aligned strokes, two pixels wide,
/// each turning 90° from the previous one (C-, L-, U-, S- and Z-like shapes).
pub fn gen_patch_2d(rows: usize, cols: usize, seed: u64) -> Result<Vec<f64>> {
    if rows < 4 || cols < 4 {
        return Err(BenchError::Config(format!(
            "patch needs at least 4×4 pixels, got {rows}×{cols}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let margin = 1usize.min(rows.min(cols) / 8);
    let (lo_q, hi_q) = (margin as i64, (rows - margin) as i64 - 2);
    let (lo_l, hi_l) = (margin as i64, (cols - margin) as i64 - 2);
    let mut x = vec![0.0; rows * cols];

    let strokes = rng.random_range(2..=4);
    let mut q = rng.random_range(lo_q..=hi_q);
    let mut l = rng.random_range(lo_l..=hi_l);
    let mut vertical = rng.random_bool(0.5);
    for _ in 0..strokes {
        let span = if vertical { rows } else { cols } as i64;
        let len = rng.random_range((span / 3).max(2)..=(2 * span / 3).max(3));
        let (pos, lo, hi) = if vertical { (q, lo_q, hi_q) } else { (l, lo_l, hi_l) };
        let (room_fwd, room_back) = (hi - pos, pos - lo);
        let forward = if room_fwd >= len && room_back >= len {
            rng.random_bool(0.5)
        } else {
            room_fwd >= room_back
        };
        let target = if forward { (pos + len).min(hi) } else { (pos - len).max(lo) };
        let (a, b) = (pos.min(target), pos.max(target));
        for p in a..=b {
            let (qq, ll) = if vertical { (p, l) } else { (q, p) };
            for (dq, dl) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                let (r, c) = ((qq + dq) as usize, (ll + dl) as usize);
                x[c * rows + r] = 1.0;
            }
        }
        if vertical {
            q = target;
        } else {
            l = target;
        }
        vertical = !vertical;
    }
    Ok(x)
}
