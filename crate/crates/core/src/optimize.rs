//! Nelder–Mead simplex search for small, smooth, unconstrained problems.

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    pub initial_step: f64,
    pub max_evals: usize,
    /// Stop when the spread of simplex values falls below this.
    pub f_tol: f64,
    /// ... and the simplex diameter falls below this.
    pub x_tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.5,
            max_evals: 4000,
            f_tol: 1e-30,
            x_tol: 1e-13,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

/// Standard coefficients: reflection 1, expansion 2, contraction ½, shrink ½.
pub fn nelder_mead<F>(f: F, x0: &[f64], opts: &NelderMeadOptions) -> Minimum
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut evals = 0usize;
    let mut simplex: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n + 1);
    simplex.push((eval(x0), x0.to_vec()));
    evals += 1;
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += opts.initial_step;
        simplex.push((eval(&x), x));
        evals += 1;
    }

    while evals < opts.max_evals {
        simplex.sort_by(|a, b| a.0.total_cmp(&b.0));
        let best = simplex[0].0;
        let worst = simplex[n].0;
        let diameter = simplex[1..]
            .iter()
            .map(|(_, x)| {
                x.iter()
                    .zip(&simplex[0].1)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if (worst - best).abs() <= opts.f_tol && diameter <= opts.x_tol {
            break;
        }
        if diameter <= opts.x_tol * 1e-3 {
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(_, x)| x[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].1)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(1.0);
        let fr = eval(&xr);
        evals += 1;
        if fr < simplex[0].0 {
            let xe = along(2.0);
            let fe = eval(&xe);
            evals += 1;
            simplex[n] = if fe < fr { (fe, xe) } else { (fr, xr) };
            continue;
        }
        if fr < simplex[n - 1].0 {
            simplex[n] = (fr, xr);
            continue;
        }
        let (xc, fc) = if fr < simplex[n].0 {
            let xc = along(0.5);
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = along(-0.5);
            let fc = eval(&xc);
            (xc, fc)
        };
        evals += 1;
        if fc < simplex[n].0.min(fr) {
            simplex[n] = (fc, xc);
            continue;
        }
        let x_best = simplex[0].1.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = vertex
                .1
                .iter()
                .zip(&x_best)
                .map(|(v, b)| b + 0.5 * (v - b))
                .collect();
            *vertex = (eval(&x), x);
            evals += 1;
        }
    }
    simplex.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (value, x) = simplex.swap_remove(0);
    Minimum { x, value, evals }
}

/// Repeats Nelder–Mead from the previous optimum with a shrinking step
/// until the value stops improving.
pub fn nelder_mead_restarts<F>(f: F, x0: &[f64], opts: &NelderMeadOptions, restarts: usize) -> Minimum
where
    F: Fn(&[f64]) -> f64,
{
    let mut best = nelder_mead(&f, x0, opts);
    let mut step = opts.initial_step;
    let mut total = best.evals;
    for _ in 0..restarts {
        step = (step * 0.1).max(1e-7);
        let o = NelderMeadOptions {
            initial_step: step,
            ..*opts
        };
        let next = nelder_mead(&f, &best.x, &o);
        total += next.evals;
        let improved = next.value < best.value;
        if improved {
            best = next;
        }
        if !improved || best.value == 0.0 {
            break;
        }
    }
    best.evals = total;
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = nelder_mead_restarts(f, &[-1.2, 1.0], &NelderMeadOptions::default(), 5);
        assert!((m.x[0] - 1.0).abs() < 1e-6, "{:?}", m);
        assert!((m.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn quadratic_3d_to_machine_precision() {
        let f = |x: &[f64]| (x[0] - 0.3).powi(2) + 2.0 * (x[1] + 0.7).powi(2) + 5.0 * (x[2] - 1.1).powi(2);
        let m = nelder_mead_restarts(f, &[0.0, 0.0, 0.0], &NelderMeadOptions::default(), 5);
        assert!(m.value < 1e-20, "{}", m.value);
    }
}
