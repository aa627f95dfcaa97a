//! Shared numerical machinery: bracketing root search, trapezoid quadrature,
//! small dense linear solves, a Levenberg-Marquardt loop, and a direct
//! periodogram for beat-frequency initialization.

use crate::error::{Error, Result};

/// sin(x)/x with a series fallback near zero.
pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Trapezoid integral of `ys` over a (possibly nonuniform) grid `xs`.
pub(crate) fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

/// Sample `f` at `n + 1` uniform points on [lo, hi] and return every
/// subinterval across which the sign changes (or an endpoint is exactly zero).
pub(crate) fn scan_brackets(
    mut f: impl FnMut(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    n: usize,
) -> Result<Vec<(f64, f64)>> {
    if !(hi > lo) || n < 2 {
        return Err(Error::InvalidInput(format!(
            "bracket scan needs an increasing interval and n >= 2, got [{lo}, {hi}] with n = {n}"
        )));
    }
    let step = (hi - lo) / n as f64;
    let mut brackets = Vec::new();
    let mut x_prev = lo;
    let mut f_prev = f(lo)?;
    for i in 1..=n {
        let x = lo + step * i as f64;
        let fx = f(x)?;
        if f_prev == 0.0 || f_prev.signum() != fx.signum() {
            brackets.push((x_prev, x));
        }
        x_prev = x;
        f_prev = fx;
    }
    Ok(brackets)
}

/// Bisection on a bracketing interval until |f| <= f_tol.
pub(crate) fn bisect_to_residual(
    mut f: impl FnMut(f64) -> Result<f64>,
    a: f64,
    b: f64,
    f_tol: f64,
) -> Result<f64> {
    let (mut lo, mut hi) = (a, b);
    let mut f_lo = f(lo)?;
    if f_lo.abs() <= f_tol {
        return Ok(lo);
    }
    let f_hi = f(hi)?;
    if f_hi.abs() <= f_tol {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NotBracketed(format!(
            "no sign change on [{a:e}, {b:e}]"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        if f_mid.abs() <= f_tol {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() <= f64::EPSILON * lo.abs().max(hi.abs()) {
            break;
        }
    }
    Err(Error::Numerical(format!(
        "bisection stalled on [{a:e}, {b:e}] before reaching |f| <= {f_tol:e}"
    )))
}

/// Bisection until the argument interval is narrower than `x_tol`.
/// Returns the interval midpoint.
pub(crate) fn bisect_to_interval(
    mut f: impl FnMut(f64) -> Result<f64>,
    a: f64,
    b: f64,
    x_tol: f64,
) -> Result<f64> {
    let (mut lo, mut hi) = (a, b);
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NotBracketed(format!(
            "no sign change on [{a:e}, {b:e}]"
        )));
    }
    let mut sign_lo = f_lo.signum();
    while hi - lo > x_tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == sign_lo {
            lo = mid;
            sign_lo = f_mid.signum();
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Ordinary least-squares line through (xs, ys); returns (slope, intercept).
pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let nf = n as f64;
    let mean_x = xs.iter().sum::<f64>() / nf;
    let mean_y = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let slope = sxy / sxx;
    Some((slope, mean_y - slope * mean_x))
}

/// Solve the n x n system `a x = b` in place by Gaussian elimination with
/// partial pivoting. `a` is row-major; the solution lands in `b`.
pub(crate) fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Result<()> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot = a[col * n + col].abs();
        for row in (col + 1)..n {
            let v = a[row * n + col].abs();
            if v > pivot {
                pivot = v;
                pivot_row = row;
            }
        }
        if pivot < 1e-300 {
            return Err(Error::Numerical("singular linear system".into()));
        }
        if pivot_row != col {
            for k in 0..n {
                a.swap(col * n + k, pivot_row * n + k);
            }
            b.swap(col, pivot_row);
        }
        let diag = a[col * n + col];
        for row in (col + 1)..n {
            let factor = a[row * n + col] / diag;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in (col + 1)..n {
            acc -= a[col * n + k] * b[k];
        }
        b[col] = acc / a[col * n + col];
    }
    Ok(())
}

/// Invert an n x n matrix by Gauss-Jordan with partial pivoting.
/// Returns None when the matrix is numerically singular.
pub(crate) fn invert_dense(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut aug = vec![0.0; n * 2 * n];
    for r in 0..n {
        for c in 0..n {
            aug[r * 2 * n + c] = a[r * n + c];
        }
        aug[r * 2 * n + n + r] = 1.0;
    }
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot = aug[col * 2 * n + col].abs();
        for row in (col + 1)..n {
            let v = aug[row * 2 * n + col].abs();
            if v > pivot {
                pivot = v;
                pivot_row = row;
            }
        }
        if pivot < 1e-300 {
            return None;
        }
        if pivot_row != col {
            for k in 0..2 * n {
                aug.swap(col * 2 * n + k, pivot_row * 2 * n + k);
            }
        }
        let diag = aug[col * 2 * n + col];
        for k in 0..2 * n {
            aug[col * 2 * n + k] /= diag;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = aug[row * 2 * n + col];
            if factor == 0.0 {
                continue;
            }
            for k in 0..2 * n {
                aug[row * 2 * n + k] -= factor * aug[col * 2 * n + k];
            }
        }
    }
    let mut inv = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            inv[r * n + c] = aug[r * 2 * n + n + c];
        }
    }
    Some(inv)
}

pub(crate) const LM_NPAR: usize = 4;

pub(crate) struct LmOutcome {
    pub params: [f64; LM_NPAR],
    pub converged: bool,
    pub iterations: usize,
    /// Unscaled (J^T J)^-1 at the solution; None when singular.
    pub jtj_inverse: Option<[f64; LM_NPAR * LM_NPAR]>,
    pub residual_rms: f64,
}

/// Levenberg-Marquardt for a 4-parameter model y = m(x; p).
///
/// Convergence criterion: every |step_i| / max(|p_i|, 1e-3) < `step_tol`.
/// Parameters are expected to be roughly O(1); callers nondimensionalize.
pub(crate) fn levenberg_marquardt(
    xs: &[f64],
    ys: &[f64],
    p0: [f64; LM_NPAR],
    model: impl Fn(f64, &[f64; LM_NPAR]) -> f64,
    jacobian: impl Fn(f64, &[f64; LM_NPAR]) -> [f64; LM_NPAR],
    max_iterations: usize,
    step_tol: f64,
) -> LmOutcome {
    let n = xs.len();
    let cost = |p: &[f64; LM_NPAR]| -> f64 {
        xs.iter()
            .zip(ys)
            .map(|(&x, &y)| {
                let r = y - model(x, p);
                r * r
            })
            .sum()
    };

    let mut p = p0;
    let mut current_cost = cost(&p);
    let mut mu = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    for iter in 0..max_iterations {
        iterations = iter + 1;
        // Accumulate J^T J and J^T r.
        let mut jtj = [0.0; LM_NPAR * LM_NPAR];
        let mut jtr = [0.0; LM_NPAR];
        for (&x, &y) in xs.iter().zip(ys) {
            let r = y - model(x, &p);
            let j = jacobian(x, &p);
            for a in 0..LM_NPAR {
                jtr[a] += j[a] * r;
                for b in a..LM_NPAR {
                    jtj[a * LM_NPAR + b] += j[a] * j[b];
                }
            }
        }
        for a in 0..LM_NPAR {
            for b in 0..a {
                jtj[a * LM_NPAR + b] = jtj[b * LM_NPAR + a];
            }
        }

        let mut accepted = false;
        for _ in 0..30 {
            let mut damped = jtj;
            for a in 0..LM_NPAR {
                let d = jtj[a * LM_NPAR + a].max(1e-12);
                damped[a * LM_NPAR + a] += mu * d;
            }
            let mut step = jtr;
            if solve_dense(&mut damped, &mut step, LM_NPAR).is_err() {
                mu *= 10.0;
                continue;
            }
            let trial = [
                p[0] + step[0],
                p[1] + step[1],
                p[2] + step[2],
                p[3] + step[3],
            ];
            let trial_cost = cost(&trial);
            if trial_cost.is_finite() && trial_cost <= current_cost {
                let small = (0..LM_NPAR)
                    .all(|i| step[i].abs() / p[i].abs().max(1e-3) < step_tol);
                p = trial;
                current_cost = trial_cost;
                mu = (mu / 3.0).max(1e-14);
                accepted = true;
                if small {
                    converged = true;
                }
                break;
            }
            mu *= 4.0;
        }
        if converged || !accepted {
            // No downhill step found within the damping sweep: either we are
            // at a (local) minimum or the surface is flat to rounding.
            converged = converged || !accepted;
            break;
        }
    }

    // Covariance scaffold at the solution.
    let mut jtj = [0.0; LM_NPAR * LM_NPAR];
    for &x in xs {
        let j = jacobian(x, &p);
        for a in 0..LM_NPAR {
            for b in a..LM_NPAR {
                jtj[a * LM_NPAR + b] += j[a] * j[b];
            }
        }
    }
    for a in 0..LM_NPAR {
        for b in 0..a {
            jtj[a * LM_NPAR + b] = jtj[b * LM_NPAR + a];
        }
    }
    let jtj_inverse = invert_dense(&jtj, LM_NPAR).map(|v| {
        let mut out = [0.0; LM_NPAR * LM_NPAR];
        out.copy_from_slice(&v);
        out
    });

    LmOutcome {
        params: p,
        converged,
        iterations,
        jtj_inverse,
        residual_rms: (current_cost / n as f64).sqrt(),
    }
}

/// Direct amplitude periodogram of `ys` (already detrended) sampled at `ts`.
///
/// Scans `bins` angular frequencies from just above the fundamental of the
/// span up to the Nyquist rate of the mean spacing. Returns
/// (omega_peak, amplitude_peak, omega_nyquist), or None for degenerate input.
pub(crate) fn dominant_frequency(ts: &[f64], ys: &[f64], bins: usize) -> Option<(f64, f64, f64)> {
    let n = ts.len();
    if n < 4 {
        return None;
    }
    let span = ts[n - 1] - ts[0];
    if span <= 0.0 {
        return None;
    }
    let mean_dt = span / (n - 1) as f64;
    let omega_nyquist = std::f64::consts::PI / mean_dt;
    let omega_min = 2.0 * std::f64::consts::PI / span;
    let mut best = (0.0, 0.0);
    for i in 0..bins {
        let omega = omega_min + (omega_nyquist - omega_min) * (i as f64 + 0.5) / bins as f64;
        let (mut c, mut s) = (0.0, 0.0);
        for (&t, &y) in ts.iter().zip(ys) {
            c += y * (omega * t).cos();
            s += y * (omega * t).sin();
        }
        let amp = (c * c + s * s).sqrt() * 2.0 / n as f64;
        if amp > best.1 {
            best = (omega, amp);
        }
    }
    Some((best.0, best.1, omega_nyquist))
}
