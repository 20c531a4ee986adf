//! Table fitting for the lossy mode.
//!
//! Once the produced values no longer fit, the table is refit after every
//! gate to the magnitudes that gate produces: 127 levels placed by Lloyd
//! iterations on a fixed-width histogram, mirrored to negative values. The
//! histogram holds integer counts, so the fit does not depend on how the scan
//! was split across workers. The top level is pinned to the largest
//! magnitude, so no value falls outside the table range.

use rayon::prelude::*;

use super::Codebook;

/// Positive levels in a fitted table; their negations and zero complete it.
pub const MAGNITUDES: usize = 127;
const BINS: usize = 4096;
const ITERATIONS: usize = 20;
const MIN_LEN: usize = 1 << 12;

/// Fits a table to the parts `parts(k)` for `k` in `0..total`.
pub(super) fn fit_codebook<const K: usize, F>(total: usize, parts: F) -> Codebook
where
    F: Fn(usize) -> [f64; K] + Sync,
{
    let max = (0..total)
        .into_par_iter()
        .with_min_len(MIN_LEN)
        .map(|k| parts(k).iter().fold(0.0f64, |m, v| m.max(v.abs())))
        .reduce(|| 0.0, f64::max);
    if !(max > 0.0 && max.is_finite()) {
        return Codebook::symmetric(&[]);
    }
    let scale = BINS as f64 / max;
    let counts = (0..total)
        .into_par_iter()
        .with_min_len(MIN_LEN)
        .fold(
            || vec![0u64; BINS],
            |mut h, k| {
                for v in parts(k) {
                    let a = v.abs();
                    if a > 0.0 {
                        h[((a * scale) as usize).min(BINS - 1)] += 1;
                    }
                }
                h
            },
        )
        .reduce(
            || vec![0u64; BINS],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Codebook::symmetric(&lloyd(&counts, max))
}

/// Lloyd iterations over histogram bin centres; zero is a fixed extra level.
fn lloyd(counts: &[u64], max: f64) -> Vec<f64> {
    let width = max / counts.len() as f64;
    let mut levels: Vec<f64> = (1..=MAGNITUDES)
        .map(|k| max * k as f64 / MAGNITUDES as f64)
        .collect();
    for _ in 0..ITERATIONS {
        let mut sum = vec![0.0; MAGNITUDES];
        let mut cnt = vec![0u64; MAGNITUDES];
        // grid point j is 0 for j = 0 and levels[j - 1] otherwise
        let point = |levels: &[f64], j: usize| if j == 0 { 0.0 } else { levels[j - 1] };
        let mut j = 0;
        for (b, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let x = (b as f64 + 0.5) * width;
            while j < MAGNITUDES
                && (point(&levels, j + 1) - x).abs() < (x - point(&levels, j)).abs()
            {
                j += 1;
            }
            if j > 0 {
                sum[j - 1] += c as f64 * x;
                cnt[j - 1] += c;
            }
        }
        for k in 0..MAGNITUDES {
            if cnt[k] > 0 {
                levels[k] = sum[k] / cnt[k] as f64;
            }
        }
        levels[MAGNITUDES - 1] = max;
        levels.sort_by(f64::total_cmp);
    }
    levels
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fitted_table_is_symmetric_and_covers_the_range() {
        let values: Vec<f64> = (0..5000)
            .map(|k| ((k as f64) * 0.37).sin() * 0.05)
            .collect();
        let book = fit_codebook(values.len(), |k| [values[k]]);
        assert!(book.is_saturated());
        let vals = book.values();
        assert_eq!(vals[0], 0.0);
        let top = vals.iter().copied().fold(0.0f64, f64::max);
        let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert_eq!(top, peak);
        for &v in &vals[1..] {
            assert!(book.lookup(-v).is_some());
        }
        for &v in &values {
            assert!(book.half_gap(v).is_some());
        }
    }

    #[test]
    fn fit_is_independent_of_worker_count() {
        let values: Vec<f64> = (0..100_000)
            .map(|k| ((k as f64) * 0.011).cos() * 0.01)
            .collect();
        let a = fit_codebook(values.len(), |k| [values[k]]);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap();
        let b = pool.install(|| fit_codebook(values.len(), |k| [values[k]]));
        assert_eq!(a, b);
    }
}
