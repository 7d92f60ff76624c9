//! Closed-form benchmark functions of the CEC2013 niching suite, in
//! maximization form, together with routines that locate their global optima
//! to machine precision.

use std::f64::consts::PI;

pub fn five_uneven_peak_trap(x: &[f64]) -> f64 {
    let x = x[0];
    if x < 2.5 {
        80.0 * (2.5 - x)
    } else if x < 5.0 {
        64.0 * (x - 2.5)
    } else if x < 7.5 {
        64.0 * (7.5 - x)
    } else if x < 12.5 {
        28.0 * (x - 7.5)
    } else if x < 17.5 {
        28.0 * (17.5 - x)
    } else if x < 22.5 {
        32.0 * (x - 17.5)
    } else if x < 27.5 {
        32.0 * (27.5 - x)
    } else {
        80.0 * (x - 27.5)
    }
}

pub fn equal_maxima(x: &[f64]) -> f64 {
    (5.0 * PI * x[0]).sin().powi(6)
}

pub fn uneven_decreasing_maxima(x: &[f64]) -> f64 {
    let x = x[0];
    let envelope = (-2.0 * 2f64.ln() * ((x - 0.08) / 0.854).powi(2)).exp();
    envelope * (5.0 * PI * (x.powf(0.75) - 0.05)).sin().powi(6)
}

pub fn himmelblau(x: &[f64]) -> f64 {
    let (a, b) = himmelblau_residuals(x[0], x[1]);
    200.0 - a * a - b * b
}

fn himmelblau_residuals(x: f64, y: f64) -> (f64, f64) {
    (x * x + y - 11.0, x + y * y - 7.0)
}

pub fn six_hump_camel_back(x: &[f64]) -> f64 {
    let x2 = x[0] * x[0];
    let y2 = x[1] * x[1];
    let a = (4.0 - 2.1 * x2 + x2 * x2 / 3.0) * x2;
    let b = x[0] * x[1];
    let c = (4.0 * y2 - 4.0) * y2;
    -(a + b + c)
}

/// One coordinate factor of the Shubert product.
fn shubert_factor(x: f64) -> f64 {
    (1..=5)
        .map(|j| {
            let j = j as f64;
            j * ((j + 1.0) * x + j).cos()
        })
        .sum()
}

fn shubert_factor_derivative(x: f64) -> f64 {
    (1..=5)
        .map(|j| {
            let j = j as f64;
            -j * (j + 1.0) * ((j + 1.0) * x + j).sin()
        })
        .sum()
}

fn shubert_factor_second_derivative(x: f64) -> f64 {
    (1..=5)
        .map(|j| {
            let j = j as f64;
            -j * (j + 1.0) * (j + 1.0) * ((j + 1.0) * x + j).cos()
        })
        .sum()
}

pub fn shubert(x: &[f64]) -> f64 {
    -x.iter().map(|&xi| shubert_factor(xi)).product::<f64>()
}

pub fn vincent(x: &[f64]) -> f64 {
    x.iter().map(|&xi| (10.0 * xi.ln()).sin()).sum::<f64>() / x.len() as f64
}

/// Per-coordinate frequencies of the modified Rastrigin function.
fn rastrigin_frequencies(d: usize) -> Vec<f64> {
    if d == 2 {
        vec![3.0, 4.0]
    } else {
        vec![1.0; d]
    }
}

pub fn modified_rastrigin(x: &[f64]) -> f64 {
    let k = rastrigin_frequencies(x.len());
    -x.iter()
        .zip(&k)
        .map(|(&xi, &ki)| 10.0 + 9.0 * (2.0 * PI * ki * xi).cos())
        .sum::<f64>()
}

// ---------------------------------------------------------------------------
// Global optima
// ---------------------------------------------------------------------------

pub(crate) fn five_uneven_peak_trap_optima() -> Vec<Vec<f64>> {
    vec![vec![0.0], vec![30.0]]
}

pub(crate) fn equal_maxima_optima() -> Vec<Vec<f64>> {
    (0..5).map(|k| vec![0.1 + 0.2 * k as f64]).collect()
}

pub(crate) fn uneven_decreasing_maxima_optima() -> Vec<Vec<f64>> {
    // The peak sits just left of 0.08 where the sine factor and the envelope
    // almost coincide.
    let x = golden_section_max(|x| uneven_decreasing_maxima(&[x]), 0.075, 0.085);
    vec![vec![x]]
}

pub(crate) fn himmelblau_optima() -> Vec<Vec<f64>> {
    let starts = [(3.0, 2.0), (-2.805, 3.131), (-3.779, -3.283), (3.584, -1.848)];
    starts
        .iter()
        .map(|&(x, y)| {
            let (x, y) = newton_2d(x, y, |x, y| {
                let (a, b) = himmelblau_residuals(x, y);
                let grad = (4.0 * x * a + 2.0 * b, 2.0 * a + 4.0 * y * b);
                let hess = (4.0 * a + 8.0 * x * x + 2.0, 4.0 * x + 4.0 * y, 4.0 * b + 8.0 * y * y + 2.0);
                (grad, hess)
            });
            vec![x, y]
        })
        .collect()
}

pub(crate) fn six_hump_camel_back_optima() -> Vec<Vec<f64>> {
    let refine = |x, y| {
        newton_2d(x, y, |x: f64, y: f64| {
            let grad = (
                8.0 * x - 8.4 * x.powi(3) + 2.0 * x.powi(5) + y,
                x - 8.0 * y + 16.0 * y.powi(3),
            );
            let hess = (8.0 - 25.2 * x * x + 10.0 * x.powi(4), 1.0, -8.0 + 48.0 * y * y);
            (grad, hess)
        })
    };
    let (x, y) = refine(0.0898, -0.7126);
    let (u, v) = refine(-0.0898, 0.7126);
    vec![vec![x, y], vec![u, v]]
}

pub(crate) fn vincent_optima(d: usize) -> Vec<Vec<f64>> {
    // sin(10 ln x) = 1  <=>  x = exp((pi/2 + 2 pi k) / 10)
    let peaks: Vec<f64> = (-10..=10)
        .map(|k| ((PI / 2.0 + 2.0 * PI * k as f64) / 10.0).exp())
        .filter(|&x| (0.25..=10.0).contains(&x))
        .collect();
    cartesian(&vec![peaks; d])
}

pub(crate) fn modified_rastrigin_optima(d: usize) -> Vec<Vec<f64>> {
    let axes: Vec<Vec<f64>> = rastrigin_frequencies(d)
        .iter()
        .map(|&k| {
            let count = k as usize;
            (0..count).map(|m| (2 * m + 1) as f64 / (2.0 * k)).collect()
        })
        .collect();
    cartesian(&axes)
}

/// Global maximizers of the Shubert function on `[-10, 10]^d`.
///
/// The objective is `-prod g(x_i)`; its maxima combine per-coordinate extrema
/// of `g`, so the extrema on the interval are located first and every
/// combination of them reaching the best product is kept.
pub(crate) fn shubert_optima(d: usize) -> Vec<Vec<f64>> {
    let extrema = shubert_factor_extrema(-10.0, 10.0);
    let g_max = extrema.iter().map(|&(_, g)| g).fold(f64::MIN, f64::max);
    let g_min = extrema.iter().map(|&(_, g)| g).fold(f64::MAX, f64::min);
    let tol = 1e-9 * g_max.abs().max(g_min.abs());
    let maxima: Vec<f64> = extrema
        .iter()
        .filter(|&&(_, g)| (g - g_max).abs() <= tol)
        .map(|&(x, _)| x)
        .collect();
    let minima: Vec<f64> = extrema
        .iter()
        .filter(|&&(_, g)| (g - g_min).abs() <= tol)
        .map(|&(x, _)| x)
        .collect();

    // Sign pattern: which coordinates take the factor's minimum. The product
    // must be negative, so the number of minima is odd.
    let mut best = f64::MIN;
    let mut patterns = Vec::new();
    for mask in 0u32..(1 << d) {
        let n_min = mask.count_ones() as i32;
        if n_min % 2 == 0 {
            continue;
        }
        let value = -(g_min.powi(n_min) * g_max.powi(d as i32 - n_min));
        if value > best + tol {
            best = value;
            patterns.clear();
        }
        if (value - best).abs() <= tol {
            patterns.push(mask);
        }
    }

    let mut optima = Vec::new();
    for mask in patterns {
        let axes: Vec<Vec<f64>> = (0..d)
            .map(|i| if mask & (1 << i) != 0 { minima.clone() } else { maxima.clone() })
            .collect();
        optima.extend(cartesian(&axes));
    }
    optima.sort_by(|a, b| a.partial_cmp(b).unwrap());
    optima
}

/// Stationary points of the Shubert factor on `[lo, hi]` as `(x, g(x))`.
fn shubert_factor_extrema(lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let steps = 200_000;
    let h = (hi - lo) / steps as f64;
    let mut out = Vec::new();
    let mut prev = shubert_factor_derivative(lo);
    for i in 1..=steps {
        let x = lo + i as f64 * h;
        let cur = shubert_factor_derivative(x);
        if prev.signum() != cur.signum() {
            let mut a = x - h;
            let mut b = x;
            // bisection, then Newton polishing
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                if shubert_factor_derivative(m).signum() == shubert_factor_derivative(a).signum() {
                    a = m;
                } else {
                    b = m;
                }
            }
            let mut r = 0.5 * (a + b);
            for _ in 0..3 {
                let step = shubert_factor_derivative(r) / shubert_factor_second_derivative(r);
                if step.is_finite() && step.abs() < h {
                    r -= step;
                }
            }
            out.push((r, shubert_factor(r)));
        }
        prev = cur;
    }
    out
}

fn cartesian(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    for _ in 0..200 {
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - ratio * (b - a);
        d = a + ratio * (b - a);
    }
    0.5 * (a + b)
}

/// Newton iteration on a stationary-point condition. `derivs` returns the
/// gradient and the symmetric Hessian `(xx, xy, yy)`.
fn newton_2d(
    mut x: f64,
    mut y: f64,
    derivs: impl Fn(f64, f64) -> ((f64, f64), (f64, f64, f64)),
) -> (f64, f64) {
    for _ in 0..50 {
        let ((gx, gy), (hxx, hxy, hyy)) = derivs(x, y);
        let det = hxx * hyy - hxy * hxy;
        if det == 0.0 {
            break;
        }
        let dx = (hyy * gx - hxy * gy) / det;
        let dy = (hxx * gy - hxy * gx) / det;
        x -= dx;
        y -= dy;
        if dx.abs() < 1e-16 && dy.abs() < 1e-16 {
            break;
        }
    }
    (x, y)
}
