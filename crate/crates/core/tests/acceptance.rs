//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any gating criterion fails.
//!
//! Oracles here are written independently of the library: direct DTFT sums
//! for window spectra, naive loops for frame statistics, a plain-loop biLSTM
//! forward pass for the gradient check, and integer arithmetic for the table
//! check.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use heartwin::eval::{format_metric, metrics, run_trial, Confusion};
use heartwin::features::{self, normalize_sequence, ExtractionConfig, FeatureSequence, NUM_FEATURES};
use heartwin::ingest::{preprocess, Label};
use heartwin::nnet::{batch_gradients, init_model_with_input, TrainConfig};
use heartwin::synth::{generate_dataset, SynthConfig};
use heartwin::windows::{self, make_window, WindowSpec};

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within_budget(elapsed: Duration, budget_s: f64) -> bool {
    elapsed.as_secs_f64() < budget_s
}

// ---------------------------------------------------------------------------
// 1. Window spectra

/// |W(f)| in dB re. W(0) by direct summation, `f` in cycles per sample.
fn dtft_db(w: &[f64], f: f64) -> f64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (n, v) in w.iter().enumerate() {
        re += v * (2.0 * PI * f * n as f64).cos();
        im += v * (2.0 * PI * f * n as f64).sin();
    }
    let dc: f64 = w.iter().sum();
    20.0 * ((re * re + im * im).sqrt() / dc).log10()
}

/// First local minimum and the largest level after it, on a grid of
/// `nfft` bins.
fn oracle_lobes(w: &[f64], nfft: usize) -> (usize, f64) {
    let mags: Vec<f64> = (0..=nfft / 2).map(|k| dtft_db(w, k as f64 / nfft as f64)).collect();
    let null = (1..mags.len() - 1)
        .find(|&k| mags[k] <= mags[k - 1] && mags[k] <= mags[k + 1])
        .expect("a first null");
    let side = mags[null..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (null, side)
}

fn criterion_windows() -> Outcome {
    let start = Instant::now();
    let nfft = windows::DEFAULT_NFFT;
    let mut notes = Vec::new();
    let mut pass = true;

    // Rectangular side lobe, L >= 20.
    for l in [20usize, 30, 50, 100] {
        let spec = WindowSpec::rectangular(l).unwrap();
        let lib = windows::window_info(&spec, nfft).unwrap().sidelobe_db.unwrap();
        let (_, oracle) = oracle_lobes(&make_window(&spec), nfft);
        let ok = (lib + 13.3).abs() <= 0.15 && (lib - oracle).abs() < 1e-6;
        pass &= ok;
        notes.push(format!("rect L={l} {lib:.3} dB"));
    }

    // Triangular half-width vs. rectangular, in bins. Both windows have
    // L + 1 points, so the exact ratio is 2(L+1)/L; one bin of slack covers
    // it from L of about 90 up.
    for l in [100usize, 200] {
        let (rect_null, _) = oracle_lobes(&make_window(&WindowSpec::rectangular(l).unwrap()), nfft);
        let tri = window_spectrum_null(WindowSpec::triangular(l).unwrap(), nfft);
        let rect = window_spectrum_null(WindowSpec::rectangular(l).unwrap(), nfft);
        let ok = (tri as i64 - 2 * rect as i64).abs() <= 1 && rect == rect_null;
        pass &= ok;
        notes.push(format!("half-width L={l} tri {tri} vs 2x{rect}"));
    }
    // At the canonical lengths the nulls sit exactly where the closed forms
    // put them: 1/(L+1) and 2/L.
    for l in windows::CANONICAL_LENGTHS {
        let big = 64 * 1024;
        let rect = window_spectrum_null(WindowSpec::rectangular(l).unwrap(), big) as f64 / big as f64;
        let tri = window_spectrum_null(WindowSpec::triangular(l).unwrap(), big) as f64 / big as f64;
        let ok = (rect - 1.0 / (l + 1) as f64).abs() <= 1.0 / big as f64
            && (tri - 2.0 / l as f64).abs() <= 1.0 / big as f64;
        pass &= ok;
    }

    // Triangular zero-phase response is non-negative.
    for l in [4usize, 14, 20, 30, 50, 64, 100] {
        let zp = windows::zero_phase_response(&make_window(&WindowSpec::triangular(l).unwrap()), nfft).unwrap();
        let min = zp.iter().copied().fold(f64::INFINITY, f64::min);
        pass &= min >= -1e-9;
    }
    notes.push("tri zero-phase >= -1e-9".into());

    // Gaussian side lobes fall with alpha.
    for l in windows::CANONICAL_LENGTHS {
        let levels: Vec<f64> = [2.5, 3.0, 3.5]
            .iter()
            .map(|&a| {
                windows::window_info(&WindowSpec::gaussian(l, a).unwrap(), nfft)
                    .unwrap()
                    .sidelobe_db
                    .unwrap()
            })
            .collect();
        let ok = levels[0] > levels[1] && levels[1] > levels[2];
        pass &= ok;
        if l == 30 {
            notes.push(format!("gauss L=30 {:.1}/{:.1}/{:.1} dB", levels[0], levels[1], levels[2]));
        }
    }

    let elapsed = start.elapsed();
    pass &= within_budget(elapsed, 1.0);
    check(pass, format!("{}; {:.2} s", notes.join(", "), elapsed.as_secs_f64()))
}

fn window_spectrum_null(spec: WindowSpec, nfft: usize) -> usize {
    windows::window_spectrum(&make_window(&spec), nfft)
        .unwrap()
        .first_null()
        .unwrap()
}

// ---------------------------------------------------------------------------
// 2. Frame statistics

mod naive {
    pub fn mean(y: &[f64]) -> f64 {
        let mut s = 0.0;
        for v in y {
            s += v;
        }
        s / y.len() as f64
    }

    fn moment(y: &[f64], k: i32) -> f64 {
        let m = mean(y);
        y.iter().map(|v| (v - m).powi(k)).sum::<f64>() / y.len() as f64
    }

    pub fn variance(y: &[f64]) -> f64 {
        moment(y, 2)
    }

    pub fn skewness(y: &[f64]) -> f64 {
        moment(y, 3) / moment(y, 2).powf(1.5)
    }

    pub fn kurtosis(y: &[f64]) -> f64 {
        moment(y, 4) / moment(y, 2).powi(2) - 3.0
    }

    pub fn quantile(y: &[f64], q: f64) -> f64 {
        let mut s = y.to_vec();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let pos = (s.len() - 1) as f64 * q;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        s[lo] + (pos - lo as f64) * (s[hi] - s[lo])
    }

    /// Bin counts over [min, max], `bins` equal cells, top edge in the last.
    fn counts(y: &[f64], bins: usize) -> (Vec<usize>, f64, f64) {
        let min = y.iter().copied().fold(f64::INFINITY, f64::min);
        let max = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let width = (max - min) / bins as f64;
        let mut c = vec![0; bins];
        for v in y {
            let mut k = ((v - min) / width).floor() as usize;
            if k >= bins {
                k = bins - 1;
            }
            c[k] += 1;
        }
        (c, min, width)
    }

    pub fn mode(y: &[f64], bins: usize) -> f64 {
        let (c, min, width) = counts(y, bins);
        let mut best = 0;
        for k in 1..bins {
            if c[k] > c[best] {
                best = k;
            }
        }
        min + (best as f64 + 0.5) * width
    }

    pub fn shannon_energy(y: &[f64]) -> f64 {
        y.iter()
            .map(|v| {
                let e = v * v;
                if e == 0.0 {
                    0.0
                } else {
                    e * e.ln()
                }
            })
            .sum()
    }

    pub fn shannon_entropy(y: &[f64], bins: usize) -> f64 {
        let (c, _, _) = counts(y, bins);
        c.iter()
            .filter(|&&k| k > 0)
            .map(|&k| {
                let p = k as f64 / y.len() as f64;
                p * p.ln()
            })
            .sum()
    }

    pub fn zcr(y: &[f64]) -> f64 {
        let sgn = |v: f64| if v >= 0.0 { 1.0 } else { -1.0 };
        let l = y.len() - 1;
        let mut s = 0.0;
        for i in 1..y.len() {
            s += f64::abs(sgn(y[i]) - sgn(y[i - 1]));
        }
        s / (2 * l + 1) as f64
    }

    pub fn all(y: &[f64], bins: usize) -> [f64; 10] {
        [
            mean(y),
            quantile(y, 0.5),
            mode(y, bins),
            variance(y),
            skewness(y),
            kurtosis(y),
            shannon_energy(y),
            shannon_entropy(y, bins),
            zcr(y),
            quantile(y, 0.75) - quantile(y, 0.25),
        ]
    }
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) + 1e-12
}

fn random_frame(rng: &mut ChaCha8Rng, len: usize, heavy: bool) -> Vec<f64> {
    (0..len)
        .map(|_| {
            if heavy {
                // Ratio of normals: Cauchy tails.
                let a: f64 = rng.sample(StandardNormal);
                let b: f64 = rng.sample(StandardNormal);
                a / b.abs().max(1e-3)
            } else {
                rng.random_range(-1.0..1.0)
            }
        })
        .collect()
}

fn criterion_features() -> Outcome {
    let start = Instant::now();
    let bins = features::DEFAULT_BINS;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    let mut mismatches = 0usize;
    for i in 0..1000 {
        let len = [15, 31, 51][i % 3];
        let y = random_frame(&mut rng, len, i % 2 == 1);
        let lib = features::FeatureVector::from_frame(&y, bins).unwrap().to_array();
        let want = naive::all(&y, bins);
        for c in 0..NUM_FEATURES {
            if !close(lib[c], want[c], 1e-10) {
                mismatches += 1;
            }
            let scale = lib[c].abs().max(want[c].abs());
            if scale > 0.0 {
                worst = worst.max((lib[c] - want[c]).abs() / scale);
            }
        }
    }

    // Shift and scale. Values on a dyadic grid keep shifted histograms exact.
    let mut prop_fail = Vec::new();
    for i in 0..200 {
        let len = [15, 31, 51][i % 3];
        let y: Vec<f64> = random_frame(&mut rng, len, i % 2 == 1)
            .into_iter()
            .map(|v| (v.clamp(-64.0, 64.0) * 1048576.0).round() / 1048576.0)
            .collect();
        let base = features::FeatureVector::from_frame(&y, bins).unwrap();
        let c = 3.25;
        let shifted: Vec<f64> = y.iter().map(|v| v + c).collect();
        let s = features::FeatureVector::from_frame(&shifted, bins).unwrap();
        let a = 2.5;
        let scaled: Vec<f64> = y.iter().map(|v| v * a).collect();
        let k = features::FeatureVector::from_frame(&scaled, bins).unwrap();
        let checks = [
            ("mean+c", close(s.mean, base.mean + c, 1e-10)),
            ("var shift", close(s.variance, base.variance, 1e-10)),
            ("skew shift", close(s.skewness, base.skewness, 1e-10) || (s.skewness - base.skewness).abs() < 1e-10),
            ("kurt shift", close(s.kurtosis, base.kurtosis, 1e-10)),
            ("iqr shift", close(s.quantile_range, base.quantile_range, 1e-10)),
            ("entropy shift", close(s.shannon_entropy, base.shannon_entropy, 1e-10)),
            ("var scale", close(k.variance, a * a * base.variance, 1e-10)),
            ("skew scale", close(k.skewness, base.skewness, 1e-10) || (k.skewness - base.skewness).abs() < 1e-10),
            ("kurt scale", close(k.kurtosis, base.kurtosis, 1e-10)),
            ("iqr scale", close(k.quantile_range, a * base.quantile_range, 1e-10)),
        ];
        for (name, ok) in checks {
            if !ok && !prop_fail.contains(&name) {
                prop_fail.push(name);
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = mismatches == 0 && prop_fail.is_empty() && within_budget(elapsed, 5.0);
    check(
        pass,
        format!(
            "1000 frames x 10 features, {mismatches} mismatches, worst rel {worst:.1e}; shift/scale failures {prop_fail:?}; {:.2} s",
            elapsed.as_secs_f64()
        ),
    )
}

// ---------------------------------------------------------------------------
// 3. Normalization

fn column_stats(seq: &FeatureSequence, c: usize) -> (f64, f64) {
    let col = seq.column(c);
    let n = col.len() as f64;
    let m = col.iter().sum::<f64>() / n;
    let v = col.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    (m, v.sqrt())
}

fn criterion_normalization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst_mean = 0.0f64;
    let mut worst_sd = 0.0f64;
    let mut worst_idem = 0.0f64;
    let mut worst_homog = 0.0f64;
    let mut constant_ok = true;
    for trial in 0..20 {
        let t = 20 + trial * 7;
        let rows: Vec<[f64; NUM_FEATURES]> = (0..t)
            .map(|_| {
                let mut r = [0.0; NUM_FEATURES];
                for (c, v) in r.iter_mut().enumerate() {
                    *v = if c == 4 { 7.5 } else { rng.random_range(-3.0..3.0) * (c + 1) as f64 + c as f64 };
                }
                r
            })
            .collect();
        let seq = FeatureSequence::from_rows("n", Label::Healthy, rows);
        let z = normalize_sequence(&seq).unwrap();
        for c in 0..NUM_FEATURES {
            let (m, sd) = column_stats(&z, c);
            if c == 4 {
                constant_ok &= z.column(c).iter().all(|&v| v == 0.0);
            } else {
                worst_mean = worst_mean.max(m.abs());
                worst_sd = worst_sd.max((sd - 1.0).abs());
            }
        }
        let zz = normalize_sequence(&z).unwrap();
        for (a, b) in z.rows.iter().zip(&zz.rows) {
            for c in 0..NUM_FEATURES {
                worst_idem = worst_idem.max((a[c] - b[c]).abs());
            }
        }
    }

    // Extract + normalize is unchanged by positive scaling of the signal,
    // apart from the two Shannon columns.
    let cfg = ExtractionConfig {
        window: WindowSpec::gaussian(30, 2.5).unwrap(),
        hop: 7,
        bins: features::DEFAULT_BINS,
    };
    for s in 0..5 {
        let x: Vec<f64> = (0..600).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let base = normalize_sequence(&features::extract_signal("x", Label::Healthy, &x, cfg).unwrap()).unwrap();
        for c in [4.0, 0.5] {
            let y: Vec<f64> = x.iter().map(|v| v * c * (1 + s) as f64).collect();
            let other = normalize_sequence(&features::extract_signal("x", Label::Healthy, &y, cfg).unwrap()).unwrap();
            for (a, b) in base.rows.iter().zip(&other.rows) {
                for col in 0..NUM_FEATURES {
                    if !features::NON_HOMOGENEOUS_COLUMNS.contains(&col) {
                        worst_homog = worst_homog.max((a[col] - b[col]).abs());
                    }
                }
            }
        }
    }
    let pass = worst_mean < 1e-10 && worst_sd < 1e-9 && constant_ok && worst_idem < 1e-9 && worst_homog < 1e-9;
    check(
        pass,
        format!(
            "max |mean| {worst_mean:.1e}, max |sd-1| {worst_sd:.1e}, constant->0 {constant_ok}, idempotence {worst_idem:.1e}, scale invariance {worst_homog:.1e}"
        ),
    )
}

// ---------------------------------------------------------------------------
// 4. Gradient check

mod reference_net {
    use heartwin::nnet::{BiLstmModel, LstmDirectionParams, Matrix};

    fn sig(x: f64) -> f64 {
        1.0 / (1.0 + (-x).exp())
    }

    fn at(m: &Matrix, r: usize, c: usize) -> f64 {
        m.data[r * m.cols + c]
    }

    /// Hidden states of one direction over `xs` taken in the given order.
    fn run(p: &LstmDirectionParams, xs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let h_n = p.recurrent_weights.cols;
        let d = p.input_weights.cols;
        let mut h = vec![0.0; h_n];
        let mut c = vec![0.0; h_n];
        let mut out = Vec::new();
        for x in xs {
            let mut pre = vec![0.0; 4 * h_n];
            for r in 0..4 * h_n {
                let mut s = p.bias[r];
                for k in 0..d {
                    s += at(&p.input_weights, r, k) * x[k];
                }
                for k in 0..h_n {
                    s += at(&p.recurrent_weights, r, k) * h[k];
                }
                pre[r] = s;
            }
            for j in 0..h_n {
                let i = sig(pre[j]);
                let f = sig(pre[h_n + j]);
                let g = pre[2 * h_n + j].tanh();
                let o = sig(pre[3 * h_n + j]);
                c[j] = f * c[j] + i * g;
                h[j] = o * c[j].tanh();
            }
            out.push(h.clone());
        }
        out
    }

    /// Probabilities from plain loops: two stacked bidirectional layers and
    /// a softmax over `[h2_forward(T); h2_backward(1)]`.
    pub fn probabilities(m: &BiLstmModel, xs: &[Vec<f64>]) -> [f64; 2] {
        let t = xs.len();
        let rev = |v: &[Vec<f64>]| v.iter().rev().cloned().collect::<Vec<_>>();
        let f1 = run(&m.layers[0].forward, xs);
        let b1 = rev(&run(&m.layers[0].backward, &rev(xs)));
        let u: Vec<Vec<f64>> = (0..t).map(|i| [f1[i].clone(), b1[i].clone()].concat()).collect();
        let f2 = run(&m.layers[1].forward, &u);
        let b2 = rev(&run(&m.layers[1].backward, &rev(&u)));
        let head_in = [f2[t - 1].clone(), b2[0].clone()].concat();
        let mut z = [0.0; 2];
        for (k, zk) in z.iter_mut().enumerate() {
            *zk = m.head_bias[k];
            for (j, v) in head_in.iter().enumerate() {
                *zk += at(&m.head_weights, k, j) * v;
            }
        }
        let mx = z[0].max(z[1]);
        let e = [(z[0] - mx).exp(), (z[1] - mx).exp()];
        [e[0] / (e[0] + e[1]), e[1] / (e[0] + e[1])]
    }

    pub fn batch_loss(m: &BiLstmModel, batch: &[(Vec<Vec<f64>>, usize)]) -> f64 {
        batch
            .iter()
            .map(|(xs, y)| -probabilities(m, xs)[*y].ln())
            .sum::<f64>()
            / batch.len() as f64
    }
}

/// Denominator floor for the relative error; only keeps 0/0 out.
const GRAD_FLOOR: f64 = 1e-12;

fn criterion_gradients() -> Outcome {
    let start = Instant::now();
    let (h, d, t) = (3usize, 10usize, 7usize);
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let mut model = init_model_with_input(d, h, 99);
    // Random biases too, so no block is trivially zero.
    for block in model.blocks_mut() {
        for v in block.iter_mut() {
            *v += rng.random_range(-0.3..0.3);
        }
    }
    let batch: Vec<(Vec<Vec<f64>>, usize)> = (0..2)
        .map(|b| {
            let xs = (0..t)
                .map(|_| (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
                .collect();
            (xs, b % 2)
        })
        .collect();
    let lib_batch: Vec<(&[Vec<f64>], usize)> = batch.iter().map(|(x, y)| (x.as_slice(), *y)).collect();
    let (lib_loss, _, grads) = batch_gradients(&model, &lib_batch).unwrap();
    let ref_loss = reference_net::batch_loss(&model, &batch);
    let forward_agrees = (lib_loss - ref_loss).abs() < 1e-12;

    let eps = 1e-5;
    let names: Vec<String> = model.blocks().into_iter().map(|(n, _)| n).collect();
    let analytic: Vec<Vec<f64>> = grads.blocks().into_iter().map(|(_, g)| g.to_vec()).collect();
    let mut worst = 0.0f64;
    let mut worst_block = String::new();
    let mut blocks_checked = 0;
    for (bi, name) in names.iter().enumerate() {
        let len = analytic[bi].len();
        for k in 0..len {
            let base = model.blocks_mut()[bi][k];
            model.blocks_mut()[bi][k] = base + eps;
            let up = reference_net::batch_loss(&model, &batch);
            model.blocks_mut()[bi][k] = base - eps;
            let down = reference_net::batch_loss(&model, &batch);
            model.blocks_mut()[bi][k] = base;
            let numeric = (up - down) / (2.0 * eps);
            let a = analytic[bi][k];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(GRAD_FLOOR);
            if rel > worst {
                worst = rel;
                worst_block = name.clone();
            }
        }
        blocks_checked += 1;
    }
    let elapsed = start.elapsed();
    let pass = forward_agrees && worst < 1e-5 && blocks_checked == 14 && within_budget(elapsed, 30.0);
    check(
        pass,
        format!(
            "{} params in {blocks_checked} blocks, max rel err {worst:.2e} ({worst_block}), forward vs reference {:.1e}; {:.2} s",
            model.num_params(),
            (lib_loss - ref_loss).abs(),
            elapsed.as_secs_f64()
        ),
    )
}

// ---------------------------------------------------------------------------
// 5. Training sanity

fn criterion_training() -> Outcome {
    let start = Instant::now();
    let synth = SynthConfig { murmur_gain: 0.3, ..Default::default() };
    let records = generate_dataset(40, 40, 0, &synth).unwrap();
    let cfg = ExtractionConfig {
        window: WindowSpec::gaussian(30, windows::DEFAULT_ALPHA).unwrap(),
        hop: 25,
        bins: features::DEFAULT_BINS,
    };
    let pre: Vec<_> = records.iter().map(|r| preprocess(r).unwrap()).collect();
    let dataset = heartwin::eval::extract_dataset(&pre, cfg).unwrap();
    let train = TrainConfig { epochs: 100, ..Default::default() };
    let trial = run_trial(&dataset, 30, &train, 0, 0.7).unwrap();
    let acc = trial.metrics.accuracy.unwrap();
    let elapsed = start.elapsed();
    let pass = acc >= 90.0 && trial.labels.len() == 24 && within_budget(elapsed, 600.0);
    check(
        pass,
        format!(
            "{} test records, accuracy {acc:.2}% (tp {} tn {} fp {} fn {}), final train loss {:.4}; {:.1} s",
            trial.labels.len(),
            trial.confusion.tp,
            trial.confusion.tn,
            trial.confusion.fp,
            trial.confusion.fn_,
            trial.history.loss.last().unwrap(),
            elapsed.as_secs_f64()
        ),
    )
}

// ---------------------------------------------------------------------------
// 6. Table arithmetic

fn criterion_table() -> Outcome {
    // Recover the counts behind the published percentages: 28 positives and
    // 27 negatives, sensitivity 92.90 and specificity 85.20 to two decimals
    // of their rounding (within 0.05).
    let (pos, neg) = (28u64, 27u64);
    // |100 tp / pos - 92.90| <= 0.05  <=>  |10000 tp - 9290 pos| <= 5 pos
    let tp: Vec<u64> = (0..=pos).filter(|&k| (10000 * k as i64 - 9290 * pos as i64).abs() <= 5 * pos as i64).collect();
    let tn: Vec<u64> = (0..=neg).filter(|&k| (10000 * k as i64 - 8520 * neg as i64).abs() <= 5 * neg as i64).collect();
    if tp != [26] || tn != [23] {
        return check(false, format!("count recovery gave tp {tp:?}, tn {tn:?}"));
    }
    let (tp, tn) = (26u64, 23u64);
    // Accuracy 100 (tp+tn)/(pos+neg) = 4900/55 = 980/11 exactly.
    let (num, den) = (100 * (tp + tn), pos + neg);
    // Half-up rounding to hundredths of a percent, in integers.
    let hundredths = (200 * num + den) / (2 * den);
    let exact_8909 = num * 11 == 980 * den && hundredths == 8909;
    // |980/11 - 89.10| <= 0.05  <=>  |100 num - 8910 den| <= 5 den
    let near_8910 = (100 * num as i64 - 8910 * den as i64).abs() <= 5 * den as i64;

    let c = Confusion { tp, tn, fp: neg - tn, fn_: pos - tp };
    let m = metrics(&c);
    let lib_exact = (m.accuracy.unwrap() - 980.0 / 11.0).abs() < 1e-12;
    let printed = format_metric(m.accuracy) == "89.09"
        && format_metric(m.sensitivity) == "92.86"
        && format_metric(m.specificity) == "85.19";
    let pass = exact_8909 && near_8910 && lib_exact && printed;
    check(
        pass,
        format!(
            "tp=26/28, tn=23/27 -> accuracy 980/11 = {} (|diff to 89.10| = {:.4})",
            format_metric(m.accuracy),
            (980.0f64 / 11.0 - 89.10).abs()
        ),
    )
}

// ---------------------------------------------------------------------------
// 7. Grid determinism

fn run_grid_cli(out: &Path) -> std::io::Result<std::process::Output> {
    Command::new(env!("CARGO_BIN_EXE_heartwin"))
        .args([
            "grid", "--synth", "8", "--shapes", "rectangular,triangular,gaussian", "--lengths", "15,30",
            "--hidden", "3,5", "--trials", "2", "--hop", "25", "--epochs", "4", "--batch-size", "4", "--seed",
            "11", "--out",
        ])
        .arg(out)
        .output()
}

fn criterion_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for p in [&a, &b] {
        match run_grid_cli(p) {
            Ok(o) if o.status.success() => {}
            Ok(o) => return check(false, format!("grid failed: {}", String::from_utf8_lossy(&o.stderr))),
            Err(e) => return check(false, format!("could not run the CLI: {e}")),
        }
    }
    let mut same = true;
    let mut rows = 0;
    for f in ["results.csv", "summary.csv", "figure5.csv"] {
        let x = std::fs::read(a.join(f)).unwrap();
        let y = std::fs::read(b.join(f)).unwrap();
        same &= x == y;
        if f == "results.csv" {
            rows = x.iter().filter(|&&c| c == b'\n').count() - 1;
        }
    }
    check(same && rows == 3 * 2 * 2 * 2, format!("two runs, {rows} result rows, byte-identical: {same}"))
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 7] = [
        ("1 window spectra", criterion_windows),
        ("2 feature oracles", criterion_features),
        ("3 normalization", criterion_normalization),
        ("4 gradient check", criterion_gradients),
        ("5 training sanity", criterion_training),
        ("6 table arithmetic", criterion_table),
        ("7 grid determinism", criterion_determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!("[{}] criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!(
        "[INFO] criterion 8 absolute corpus accuracies: not gating; needs the external recordings (see README)"
    );
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
