//! Independent reference implementations shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use ndarray::Array2;
use seizure::classifiers::{Dataset, Kernel};
use seizure::dbn::{rbm_init, DbnModel, Rbm};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- features

/// Peaks and valleys found by scanning maximal runs of equal values: a run
/// with a smaller neighbour on both sides is a peak, larger on both sides a
/// valley, reported at the run's first index. Runs touching either end of the
/// window have no neighbour there and are skipped.
pub fn oracle_peaks_valleys(x: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let (mut peaks, mut valleys) = (Vec::new(), Vec::new());
    let mut s = 0;
    while s < x.len() {
        let mut e = s;
        while e + 1 < x.len() && x[e + 1] == x[s] {
            e += 1;
        }
        if s > 0 && e + 1 < x.len() {
            let (before, after) = (x[s - 1], x[e + 1]);
            if before < x[s] && after < x[s] {
                peaks.push(s);
            } else if before > x[s] && after > x[s] {
                valleys.push(s);
            }
        }
        s = e + 1;
    }
    (peaks, valleys)
}

fn log10_mean_sq(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut s = 0.0;
    for v in values {
        s += v * v;
    }
    let ms = s / values.len() as f64;
    if ms == 0.0 {
        0.0
    } else {
        ms.log10()
    }
}

/// The nine window features, one formula at a time.
pub fn oracle_features(x: &[f64]) -> [f64; 9] {
    let w = x.len();
    let wf = w as f64;

    let mut a = 0.0;
    for i in 0..w {
        a += x[i];
    }
    a /= wf;

    let mut neg = 0.0;
    for i in 0..=w - 2 {
        if x[i + 1] - x[i] < 0.0 {
            neg += 1.0;
        }
    }
    let d = (neg / (wf - 1.0) - 0.5).abs();

    let mut ll = 0.0;
    for i in 1..w {
        ll += (x[i] - x[i - 1]).abs();
    }

    let mut e = 0.0;
    for i in 0..w {
        e += (x[i] * x[i]).abs();
    }
    e /= wf;

    let (kp, vp) = oracle_peaks_valleys(x);
    let peak_vals: Vec<f64> = kp.iter().map(|&i| x[i]).collect();
    let valley_vals: Vec<f64> = vp.iter().map(|&i| x[i]).collect();
    let pa = log10_mean_sq(&peak_vals);
    let va = log10_mean_sq(&valley_vals);

    let mut mad = 0.0;
    for i in 0..=w - 2 {
        mad += (x[i + 1] - x[i]).abs();
    }
    mad /= wf - 1.0;
    let np = if mad == 0.0 {
        0.0
    } else {
        kp.len() as f64 / mad
    };

    let k = kp.len().min(vp.len());
    let pv = if k < 2 {
        0.0
    } else {
        let kf = k as f64;
        let mut mu = 0.0;
        let mut mux = 0.0;
        for i in 0..k {
            mu += kp[i] as f64 - vp[i] as f64;
            mux += x[kp[i]] - x[vp[i]];
        }
        mu /= kf;
        mux /= kf;
        let mut s = 0.0;
        let mut sx = 0.0;
        for i in 0..k {
            s += (kp[i] as f64 - vp[i] as f64 - mu).powi(2);
            sx += (x[kp[i]] - x[vp[i]] - mux).powi(2);
        }
        let sigma = (s / (kf - 1.0)).sqrt();
        let sigma_x = (sx / (kf - 1.0)).sqrt();
        if sigma * sigma_x == 0.0 {
            0.0
        } else {
            1.0 / (sigma * sigma_x)
        }
    };

    let mut ms = 0.0;
    for i in 0..w {
        ms += x[i] * x[i];
    }
    let rms = (ms / wf).sqrt();

    [a, d, ll, e, pa, va, np, pv, rms]
}

/// Random windows of one kind per index: Gaussian, coarse-quantized (many
/// plateaus), oscillation plus noise, or a degenerate constant/monotone case.
pub fn random_window(rng: &mut ChaCha8Rng, w: usize, kind: usize) -> Vec<f64> {
    match kind % 4 {
        0 => (0..w).map(|_| StandardNormal.sample(rng)).collect(),
        1 => {
            let levels = rng.random_range(2..6) as f64;
            (0..w)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(rng);
                    (z * levels / 2.0).round()
                })
                .collect()
        }
        2 => {
            let f = rng.random_range(1.0..30.0);
            let amp = rng.random_range(0.1..5.0);
            (0..w)
                .map(|i| {
                    let n: f64 = StandardNormal.sample(rng);
                    amp * (2.0 * std::f64::consts::PI * f * i as f64 / w as f64).sin() + 0.1 * n
                })
                .collect()
        }
        _ => match rng.random_range(0..3) {
            0 => vec![rng.random_range(-2.0..2.0); w],
            1 => (0..w).map(|i| i as f64 * 0.01).collect(),
            _ => {
                // Clipped oscillation: long flat tops at ±2.
                (0..w)
                    .map(|i| (3.0 * (i as f64 * 0.2).sin()).clamp(-2.0, 2.0))
                    .collect()
            }
        },
    }
}

/// `a` and `b` agree to relative tolerance `tol`; exact zeros must match exactly.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    if a == b {
        return true;
    }
    if a == 0.0 || b == 0.0 {
        return false;
    }
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

// -------------------------------------------------------------------- CD-1

fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// CD-1 written as explicit loops over samples and units.
pub fn oracle_cd1(rbm: &Rbm, batch: &[Vec<f64>], rate: f64, uniforms: &[Vec<f64>]) -> Rbm {
    let nv = rbm.n_visible();
    let nh = rbm.n_hidden();
    let w = &rbm.weights;
    let mut dw = vec![vec![0.0; nh]; nv];
    let mut dv = vec![0.0; nv];
    let mut dh = vec![0.0; nh];
    for (v0, u) in batch.iter().zip(uniforms) {
        let h0: Vec<f64> = (0..nh)
            .map(|j| logistic(rbm.hidden_bias[j] + (0..nv).map(|i| v0[i] * w[[i, j]]).sum::<f64>()))
            .collect();
        let hs: Vec<f64> = (0..nh)
            .map(|j| if u[j] < h0[j] { 1.0 } else { 0.0 })
            .collect();
        let v1: Vec<f64> = (0..nv)
            .map(|i| {
                logistic(rbm.visible_bias[i] + (0..nh).map(|j| hs[j] * w[[i, j]]).sum::<f64>())
            })
            .collect();
        let h1: Vec<f64> = (0..nh)
            .map(|j| logistic(rbm.hidden_bias[j] + (0..nv).map(|i| v1[i] * w[[i, j]]).sum::<f64>()))
            .collect();
        for i in 0..nv {
            for j in 0..nh {
                dw[i][j] += v0[i] * h0[j] - v1[i] * h1[j];
            }
            dv[i] += v0[i] - v1[i];
        }
        for j in 0..nh {
            dh[j] += h0[j] - h1[j];
        }
    }
    let scale = rate / batch.len() as f64;
    let mut out = rbm.clone();
    for i in 0..nv {
        for j in 0..nh {
            out.weights[[i, j]] += scale * dw[i][j];
        }
        out.visible_bias[i] += scale * dv[i];
    }
    for j in 0..nh {
        out.hidden_bias[j] += scale * dh[j];
    }
    out
}

/// Eight distinct binary patterns over 3 visible units, repeated.
pub fn eight_patterns(repeats: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for _ in 0..repeats {
        for p in 0..8u32 {
            out.push((0..3).map(|b| f64::from((p >> b) & 1)).collect());
        }
    }
    out
}

// --------------------------------------------------------------------- SVM

/// Dual objective `Σα − ½ ΣΣ αᵢαⱼ yᵢyⱼ K(xᵢ,xⱼ)`.
pub fn dual_objective(data: &Dataset, kernel: &Kernel, alphas: &[f64]) -> f64 {
    let y: Vec<f64> = data
        .labels()
        .iter()
        .map(|&l| if l == 1 { 1.0 } else { -1.0 })
        .collect();
    let x = data.vectors();
    let n = x.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alphas[i] * alphas[j] * y[i] * y[j] * kernel.eval(&x[i], &x[j]);
        }
    }
    alphas.iter().sum::<f64>() - 0.5 * quad
}

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Exact maximum of the SVM dual by enumerating, for every point, whether
/// its multiplier sits at 0, at `c`, or is free, and solving the KKT
/// equality system of the free ones with the equality constraint.
pub fn brute_force_dual(data: &Dataset, kernel: &Kernel, c: f64) -> f64 {
    let n = data.len();
    let y: Vec<f64> = data
        .labels()
        .iter()
        .map(|&l| if l == 1 { 1.0 } else { -1.0 })
        .collect();
    let x = data.vectors();
    let q = |i: usize, j: usize| y[i] * y[j] * kernel.eval(&x[i], &x[j]);
    let mut best = f64::NEG_INFINITY;
    for code in 0..3usize.pow(n as u32) {
        let state: Vec<usize> = (0..n).map(|i| (code / 3usize.pow(i as u32)) % 3).collect();
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let mut alpha: Vec<f64> = state
            .iter()
            .map(|&s| if s == 1 { c } else { 0.0 })
            .collect();
        if !free.is_empty() {
            // Stationarity on the free set plus Σ αᵢ yᵢ = 0, unknowns (α_F, b).
            let m = free.len();
            let mut a = vec![vec![0.0; m + 1]; m + 1];
            let mut rhs = vec![0.0; m + 1];
            for (r, &i) in free.iter().enumerate() {
                for (cidx, &j) in free.iter().enumerate() {
                    a[r][cidx] = q(i, j);
                }
                a[r][m] = y[i];
                rhs[r] = 1.0
                    - (0..n)
                        .filter(|&j| state[j] == 1)
                        .map(|j| q(i, j) * c)
                        .sum::<f64>();
            }
            for (cidx, &j) in free.iter().enumerate() {
                a[m][cidx] = y[j];
            }
            rhs[m] = -(0..n)
                .filter(|&j| state[j] == 1)
                .map(|j| y[j] * c)
                .sum::<f64>();
            let Some(sol) = solve_dense(a, rhs) else {
                continue;
            };
            for (cidx, &i) in free.iter().enumerate() {
                alpha[i] = sol[cidx];
            }
        }
        let feasible = alpha.iter().all(|&a| (-1e-9..=c + 1e-9).contains(&a))
            && alpha.iter().zip(&y).map(|(a, y)| a * y).sum::<f64>().abs() < 1e-9;
        if feasible {
            best = best.max(dual_objective(data, kernel, &alpha));
        }
    }
    best
}

// ------------------------------------------------------ finite differences

/// Central difference of `f` in every coordinate of `theta`.
pub fn numeric_gradient(theta: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut t = theta.to_vec();
    (0..theta.len())
        .map(|i| {
            t[i] = theta[i] + h;
            let up = f(&t);
            t[i] = theta[i] - h;
            let down = f(&t);
            t[i] = theta[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `max |a−b| / max(‖a‖∞, ‖b‖∞, tiny)`.
pub fn max_rel_error(a: &[f64], b: &[f64]) -> f64 {
    let scale = a
        .iter()
        .chain(b)
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1e-12);
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        / scale
}

pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Dataset {
    loop {
        let vectors: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
            .collect();
        let labels: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let d = Dataset::new(vectors, labels).unwrap();
        if d.has_both_classes() {
            return d;
        }
    }
}

fn flatten(m: &DbnModel) -> Vec<f64> {
    let mut out = Vec::new();
    for l in &m.layers {
        out.extend(l.weights.iter());
        out.extend(l.hidden_bias.iter());
    }
    out.extend(m.output_weights.iter());
    out.extend(m.output_bias.iter());
    out
}

fn unflatten(m: &mut DbnModel, theta: &[f64]) {
    let mut it = theta.iter().copied();
    for l in &mut m.layers {
        l.weights.iter_mut().for_each(|w| *w = it.next().unwrap());
        l.hidden_bias
            .iter_mut()
            .for_each(|w| *w = it.next().unwrap());
    }
    m.output_weights
        .iter_mut()
        .for_each(|w| *w = it.next().unwrap());
    m.output_bias
        .iter_mut()
        .for_each(|w| *w = it.next().unwrap());
}

/// Gradient check of the full network on a 4→3→2→2 toy model.
pub fn dbn_gradient_error(seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut model = DbnModel::from_stack(vec![
        rbm_init(4, 3, seed).unwrap(),
        rbm_init(3, 2, seed + 1).unwrap(),
    ])
    .unwrap();
    model
        .output_weights
        .iter_mut()
        .for_each(|w| *w = r.random_range(-1.0..1.0));
    model.layers[0]
        .hidden_bias
        .iter_mut()
        .for_each(|w| *w = r.random_range(-0.5..0.5));
    let x = Array2::from_shape_fn((8, 4), |_| r.random::<f64>());
    let y: Vec<u8> = (0..8).map(|i| (i % 2) as u8).collect();

    let (_, g) = model.loss_and_gradients(x.view(), &y);
    let mut analytic = Vec::new();
    for l in 0..2 {
        analytic.extend(g.weights[l].iter());
        analytic.extend(g.hidden_bias[l].iter());
    }
    analytic.extend(g.output_weights.iter());
    analytic.extend(g.output_bias.iter());

    let theta = flatten(&model);
    let mut probe = model.clone();
    let numeric = numeric_gradient(&theta, 1e-5, |t| {
        unflatten(&mut probe, t);
        probe.loss_and_gradients(x.view(), &y).0
    });
    max_rel_error(&analytic, &numeric)
}
