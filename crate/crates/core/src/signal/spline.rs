//! Periodic cubic spline on the unit circle [0,1).
//!
//! The day wraps, so the interpolant is C² across midnight as well as at
//! every interior knot. Second-derivative moments come from the cyclic
//! tridiagonal system, solved with the Sherman–Morrison split into two
//! Thomas sweeps.

use crate::error::SignalError;

#[derive(Debug, Clone)]
pub struct PeriodicSpline {
    /// Knot abscissae extended by the wrap point t[0] + 1.
    knots_ext: Vec<f64>,
    /// Values extended by v[0].
    values_ext: Vec<f64>,
    /// Second derivatives at the extended knots.
    moments_ext: Vec<f64>,
}

impl PeriodicSpline {
    /// Fit a periodic C² cubic through `(t_i, v_i)` with period 1.
    /// Times must be strictly increasing inside [0,1) and there must be at
    /// least three of them.
    pub fn fit(times: &[f64], values: &[f64]) -> Result<Self, SignalError> {
        let n = times.len();
        if n < 3 {
            return Err(SignalError::InsufficientData { needed: 3, got: n });
        }
        assert_eq!(n, values.len());
        for w in times.windows(2) {
            if !(w[1] > w[0]) {
                return Err(SignalError::NonMonotonicTimes(format!(
                    "{} does not exceed {}",
                    w[1], w[0]
                )));
            }
        }
        if !(times[0] >= 0.0 && times[n - 1] < 1.0) {
            return Err(SignalError::NonMonotonicTimes(format!(
                "samples must lie in [0,1), got range [{}, {}]",
                times[0],
                times[n - 1]
            )));
        }

        // Interval lengths, h[i] = t[i+1] - t[i], wrapping the last one.
        let mut h = vec![0.0; n];
        for i in 0..n - 1 {
            h[i] = times[i + 1] - times[i];
        }
        h[n - 1] = times[0] + 1.0 - times[n - 1];

        // Cyclic tridiagonal system for the moments:
        //   h[i-1]/6 M[i-1] + (h[i-1]+h[i])/3 M[i] + h[i]/6 M[i+1] = rhs[i]
        let idx = |i: isize| -> usize { (i.rem_euclid(n as isize)) as usize };
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            let hm = h[idx(i as isize - 1)];
            let hp = h[i];
            sub[i] = hm / 6.0;
            diag[i] = (hm + hp) / 3.0;
            sup[i] = hp / 6.0;
            let vm = values[idx(i as isize - 1)];
            let vp = values[idx(i as isize + 1)];
            rhs[i] = (vp - values[i]) / hp - (values[i] - vm) / hm;
        }
        let moments = solve_cyclic_tridiagonal(&sub, &diag, &sup, sub[0], sub[0], &rhs);

        let mut knots_ext = times.to_vec();
        knots_ext.push(times[0] + 1.0);
        let mut values_ext = values.to_vec();
        values_ext.push(values[0]);
        let mut moments_ext = moments;
        moments_ext.push(moments_ext[0]);
        Ok(PeriodicSpline {
            knots_ext,
            values_ext,
            moments_ext,
        })
    }

    /// Knot abscissae within [0,1).
    pub fn knots(&self) -> &[f64] {
        &self.knots_ext[..self.knots_ext.len() - 1]
    }

    /// Evaluate at any real t; the argument is wrapped into the period.
    pub fn eval(&self, t: f64) -> f64 {
        let mut s = t - t.floor();
        let t0 = self.knots_ext[0];
        if s < t0 {
            s += 1.0;
        }
        // Locate the interval with knots_ext[i] <= s < knots_ext[i+1].
        let i = match self.knots_ext.partition_point(|&k| k <= s).checked_sub(1) {
            Some(i) => i.min(self.knots_ext.len() - 2),
            None => 0,
        };
        let (ta, tb) = (self.knots_ext[i], self.knots_ext[i + 1]);
        let (va, vb) = (self.values_ext[i], self.values_ext[i + 1]);
        let (ma, mb) = (self.moments_ext[i], self.moments_ext[i + 1]);
        let hh = tb - ta;
        let a = tb - s;
        let b = s - ta;
        ma * a * a * a / (6.0 * hh)
            + mb * b * b * b / (6.0 * hh)
            + (va / hh - ma * hh / 6.0) * a
            + (vb / hh - mb * hh / 6.0) * b
    }
}

/// Solve a cyclic tridiagonal system with corner entries `top_right` at
/// (0, n-1) and `bottom_left` at (n-1, 0).
fn solve_cyclic_tridiagonal(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    top_right: f64,
    bottom_left: f64,
    rhs: &[f64],
) -> Vec<f64> {
    let n = diag.len();
    debug_assert!(n >= 3);
    let gamma = -diag[0];
    let mut diag_mod = diag.to_vec();
    diag_mod[0] -= gamma;
    diag_mod[n - 1] -= top_right * bottom_left / gamma;

    let x1 = solve_tridiagonal(sub, &diag_mod, sup, rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = bottom_left;
    let x2 = solve_tridiagonal(sub, &diag_mod, sup, &u);

    let v_dot = |x: &[f64]| x[0] + top_right / gamma * x[n - 1];
    let factor = v_dot(&x1) / (1.0 + v_dot(&x2));
    (0..n).map(|i| x1[i] - factor * x2[i]).collect()
}

/// Thomas algorithm; `sub[0]` and `sup[n-1]` are ignored.
fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / m;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_samples_at_knots() {
        let times: Vec<f64> = (0..24).map(|h| h as f64 / 24.0).collect();
        let values: Vec<f64> = times
            .iter()
            .map(|&t| 3.0 + (2.0 * std::f64::consts::PI * t).sin())
            .collect();
        let sp = PeriodicSpline::fit(&times, &values).unwrap();
        for (t, v) in times.iter().zip(&values) {
            assert!(
                (sp.eval(*t) - v).abs() < 1e-12,
                "spline({t}) = {} != {v}",
                sp.eval(*t)
            );
        }
    }

    #[test]
    fn is_periodic_and_smooth_across_the_wrap() {
        let times = [0.1, 0.35, 0.6, 0.85];
        let values = [1.0, 4.0, 2.0, 3.0];
        let sp = PeriodicSpline::fit(&times, &values).unwrap();
        // Same value one period apart.
        for t in [0.0, 0.05, 0.33, 0.99] {
            assert!((sp.eval(t) - sp.eval(t + 1.0)).abs() < 1e-12);
        }
        // First derivative continuous at the wrap point t = 0.1. One-sided
        // differences carry O(eps·f'') truncation, hence the loose tolerance.
        let eps = 1e-6;
        let dl = (sp.eval(0.1) - sp.eval(0.1 - eps)) / eps;
        let dr = (sp.eval(0.1 + eps) - sp.eval(0.1)) / eps;
        assert!((dl - dr).abs() < 1e-3, "slope jump {dl} vs {dr}");
        // Second differences from both sides agree as well (C² across knots).
        let d2l =
            (sp.eval(0.1) - 2.0 * sp.eval(0.1 - eps) + sp.eval(0.1 - 2.0 * eps)) / (eps * eps);
        let d2r =
            (sp.eval(0.1 + 2.0 * eps) - 2.0 * sp.eval(0.1 + eps) + sp.eval(0.1)) / (eps * eps);
        assert!(
            (d2l - d2r).abs() < 1e-2 * d2l.abs().max(1.0),
            "curvature jump {d2l} vs {d2r}"
        );
    }

    #[test]
    fn constant_data_gives_constant_spline() {
        let times: Vec<f64> = (0..8).map(|h| h as f64 / 8.0).collect();
        let values = vec![5.0; 8];
        let sp = PeriodicSpline::fit(&times, &values).unwrap();
        for k in 0..100 {
            let t = k as f64 / 100.0;
            assert!((sp.eval(t) - 5.0).abs() < 1e-12);
        }
    }

    #[test]
    fn three_samples_is_the_minimum() {
        let err = PeriodicSpline::fit(&[0.0, 0.5], &[1.0, 2.0]).unwrap_err();
        assert!(matches!(err, SignalError::InsufficientData { .. }));
        PeriodicSpline::fit(&[0.0, 0.3, 0.7], &[1.0, 2.0, 0.5]).unwrap();
    }

    #[test]
    fn rejects_unsorted_times() {
        let err = PeriodicSpline::fit(&[0.0, 0.5, 0.4], &[1.0, 2.0, 3.0]).unwrap_err();
        assert!(matches!(err, SignalError::NonMonotonicTimes(_)));
    }
}
