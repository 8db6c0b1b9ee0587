//! Per-frame statistics.
//!
//! Every function takes the windowed samples of one frame. Conventions:
//! population moments (divisor = frame length), natural logarithms, quantiles
//! by linear interpolation at position `(count - 1) * q`, and a shared
//! equal-width histogram over `[min, max]` for mode and entropy.

pub const DEFAULT_BINS: usize = 10;

fn sorted(frame: &[f64]) -> Vec<f64> {
    let mut s = frame.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Quantile of already sorted values.
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = (sorted.len() - 1) as f64 * q;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    match sorted.get(lo + 1) {
        Some(&hi) if frac > 0.0 => sorted[lo] + frac * (hi - sorted[lo]),
        _ => sorted[lo],
    }
}

/// Bin counts of the equal-width histogram, with its lower edge and width.
/// `None` for a constant frame.
pub(crate) fn histogram(frame: &[f64], bins: usize) -> Option<(Vec<usize>, f64, f64)> {
    let (min, max) = frame
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if max <= min {
        return None;
    }
    let bins = bins.max(1);
    let width = (max - min) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in frame {
        let idx = (((v - min) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    Some((counts, min, width))
}

pub fn frame_mean(frame: &[f64]) -> f64 {
    frame.iter().sum::<f64>() / frame.len() as f64
}

pub fn frame_median(frame: &[f64]) -> f64 {
    quantile_sorted(&sorted(frame), 0.5)
}

/// Center of the most populated histogram cell; ties go to the lowest cell.
pub fn frame_mode(frame: &[f64], bins: usize) -> f64 {
    match histogram(frame, bins) {
        None => frame[0],
        Some((counts, min, width)) => {
            let best = counts
                .iter()
                .enumerate()
                .fold((0, 0), |(bi, bc), (i, &c)| if c > bc { (i, c) } else { (bi, bc) })
                .0;
            min + (best as f64 + 0.5) * width
        }
    }
}

/// Sum of `(y - mean)^k` for k = 2, 3, 4.
fn central_sums(frame: &[f64], mean: f64) -> (f64, f64, f64) {
    frame.iter().fold((0.0, 0.0, 0.0), |(s2, s3, s4), &y| {
        let d = y - mean;
        let d2 = d * d;
        (s2 + d2, s3 + d2 * d, s4 + d2 * d2)
    })
}

/// Variance below this fraction of the squared frame scale is treated as a
/// constant frame.
const FLAT_TOLERANCE: f64 = 1e-14;

fn is_flat(frame: &[f64], variance: f64) -> bool {
    let scale = frame.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    variance <= (FLAT_TOLERANCE * scale).powi(2)
}

/// Population variance; exactly 0 for a flat frame.
pub fn frame_variance(frame: &[f64]) -> f64 {
    let mean = frame_mean(frame);
    let var = central_sums(frame, mean).0 / frame.len() as f64;
    if is_flat(frame, var) {
        0.0
    } else {
        var
    }
}

/// Third standardized moment; 0 for a constant frame.
pub fn frame_skewness(frame: &[f64]) -> f64 {
    let n = frame.len() as f64;
    let (s2, s3, _) = central_sums(frame, frame_mean(frame));
    let var = s2 / n;
    if is_flat(frame, var) {
        return 0.0;
    }
    s3 / n / var.powf(1.5)
}

/// Excess kurtosis (fourth standardized moment minus 3); 0 for a constant
/// frame.
pub fn frame_kurtosis(frame: &[f64]) -> f64 {
    let n = frame.len() as f64;
    let (s2, _, s4) = central_sums(frame, frame_mean(frame));
    let var = s2 / n;
    if is_flat(frame, var) {
        return 0.0;
    }
    s4 / n / (var * var) - 3.0
}

/// `sum |y|^2 ln |y|^2`, with `0 ln 0 = 0`. Sign as written, so values are
/// mostly negative for |y| < 1.
pub fn frame_shannon_energy(frame: &[f64]) -> f64 {
    frame
        .iter()
        .map(|&y| {
            let e = y * y;
            if e > 0.0 {
                e * e.ln()
            } else {
                0.0
            }
        })
        .sum()
}

/// `sum p ln p` over occupied histogram cells (non-positive).
pub fn frame_shannon_entropy(frame: &[f64], bins: usize) -> f64 {
    match histogram(frame, bins) {
        None => 0.0,
        Some((counts, _, _)) => {
            let n = frame.len() as f64;
            counts
                .iter()
                .filter(|&&c| c > 0)
                .map(|&c| {
                    let p = c as f64 / n;
                    p * p.ln()
                })
                .sum()
        }
    }
}

fn sign(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// `1/(2L+1) * sum |sign(y[l]) - sign(y[l-1])|` over the `L` in-frame
/// differences, `L = len - 1`. Zero for frames shorter than 2.
pub fn frame_zcr(frame: &[f64]) -> f64 {
    if frame.len() < 2 {
        return 0.0;
    }
    let l = (frame.len() - 1) as f64;
    let changes: f64 = frame
        .windows(2)
        .map(|p| (sign(p[1]) - sign(p[0])).abs())
        .sum();
    changes / (2.0 * l + 1.0)
}

/// Interquartile range `Q(0.75) - Q(0.25)`.
pub fn frame_quantile_range(frame: &[f64]) -> f64 {
    let s = sorted(frame);
    quantile_sorted(&s, 0.75) - quantile_sorted(&s, 0.25)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    const EPS: f64 = 1e-12;

    #[test]
    fn mean_examples() {
        assert_eq!(frame_mean(&[1.0, 2.0, 3.0]), 2.0);
        assert_eq!(frame_mean(&[0.0; 7]), 0.0);
    }

    #[test]
    fn median_examples() {
        assert_eq!(frame_median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(frame_median(&[1.0, 2.0, 3.0, 4.0]), 2.5);
        let clean = [0.1, -0.2, 0.05, 0.3, -0.1];
        let dirty = [0.1, -0.2, 0.05, 1e6, -0.1];
        assert_eq!(frame_median(&clean), frame_median(&dirty));
    }

    #[test]
    fn mode_examples() {
        assert_eq!(frame_mode(&[5.0, 5.0, 5.0], DEFAULT_BINS), 5.0);
        assert_eq!(frame_mode(&[0.0, 0.0, 0.0, 1.0], 2), 0.25);
        // Two equally populated cells: the lower one wins.
        assert_eq!(frame_mode(&[-1.0, -1.0, 1.0, 1.0], 4), -0.75);
    }

    #[test]
    fn variance_examples() {
        assert!((frame_variance(&[1.0, 2.0, 3.0]) - 2.0 / 3.0).abs() < EPS);
        assert_eq!(frame_variance(&[4.0; 5]), 0.0);
        let zero_mean = [-0.5, 0.25, 0.25];
        let power = zero_mean.iter().map(|v| v * v).sum::<f64>() / 3.0;
        assert!((frame_variance(&zero_mean) - power).abs() < EPS);
    }

    #[test]
    fn skewness_and_kurtosis_examples() {
        assert!(frame_skewness(&[-1.0, 0.0, 1.0]).abs() < EPS);
        assert_eq!(frame_skewness(&[0.3; 9]), 0.0);
        assert!((frame_kurtosis(&[-1.0, 1.0, -1.0, 1.0]) + 2.0).abs() < EPS);
        assert_eq!(frame_kurtosis(&[0.1; 31]), 0.0);
    }

    #[test]
    fn kurtosis_of_normal_draws_is_near_zero() {
        let mut rng = crate::seed::rng(11);
        let draws: Vec<f64> = (0..20_000).map(|_| rng.sample(StandardNormal)).collect();
        assert!(frame_kurtosis(&draws).abs() < 0.3);
    }

    #[test]
    fn shannon_energy_examples() {
        assert_eq!(frame_shannon_energy(&[1.0, -1.0, 1.0]), 0.0);
        assert_eq!(frame_shannon_energy(&[0.0; 4]), 0.0);
        assert!((frame_shannon_energy(&[0.5]) - 0.25 * 0.25f64.ln()).abs() < EPS);
        assert!((frame_shannon_energy(&[0.5]) + 0.346_573_590_279_972_6).abs() < 1e-12);
    }

    #[test]
    fn shannon_entropy_examples() {
        assert_eq!(frame_shannon_entropy(&[2.0; 5], DEFAULT_BINS), 0.0);
        let split = [0.0, 0.0, 1.0, 1.0];
        assert!((frame_shannon_entropy(&split, 2) + 2f64.ln()).abs() < EPS);
        let uniform: Vec<f64> = (0..10).map(f64::from).collect();
        assert!((frame_shannon_entropy(&uniform, 10) + 10f64.ln()).abs() < EPS);
    }

    #[test]
    fn zcr_examples() {
        assert_eq!(frame_zcr(&[0.1, 0.2, 0.3]), 0.0);
        let alt = [1.0, -1.0, 1.0, -1.0, 1.0];
        assert!((frame_zcr(&alt) - 8.0 / 9.0).abs() < EPS);
        // sign(0) = +1
        assert_eq!(frame_zcr(&[0.0, 1.0]), 0.0);
    }

    #[test]
    fn quantile_range_examples() {
        assert_eq!(frame_quantile_range(&[3.0; 6]), 0.0);
        let ramp: Vec<f64> = (0..=100).map(f64::from).collect();
        assert_eq!(frame_quantile_range(&ramp), 50.0);
        let scaled: Vec<f64> = ramp.iter().map(|v| v * 2.5).collect();
        assert!((frame_quantile_range(&scaled) - 125.0).abs() < EPS);
    }

    #[test]
    fn zcr_upper_bound() {
        let mut rng = crate::seed::rng(3);
        for len in [2usize, 5, 15, 31, 51] {
            let f: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
            let l = (len - 1) as f64;
            let z = frame_zcr(&f);
            assert!((0.0..=2.0 * l / (2.0 * l + 1.0)).contains(&z));
            assert!(z < 1.0);
        }
    }
}
