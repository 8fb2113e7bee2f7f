//! Derivative-free Nelder-Mead minimizer used for likelihood fits.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    /// Stop when the spread of objective values across the simplex is below this.
    pub f_tol: f64,
    /// Also stop once the simplex is narrower than this (relative to the
    /// largest coordinate) in every coordinate.
    pub x_tol: f64,
    pub max_iter: usize,
    /// Initial simplex edge, relative to each coordinate (absolute when the coordinate is 0).
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            f_tol: 1e-8,
            x_tol: 1e-10,
            max_iter: 10_000,
            initial_step: 0.1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `f` from `x0`. Non-finite objective values are treated as `+inf`,
/// so infeasible points can be signalled by returning `f64::INFINITY`.
/// The search is restarted once from the best point to guard against a
/// collapsed simplex.
pub fn minimize<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> NelderMeadResult {
    let mut eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let first = run(&mut eval, x0, opts, opts.max_iter);
    if !first.converged {
        return first;
    }
    let second = run(&mut eval, &first.x, opts, opts.max_iter - first.iterations.min(opts.max_iter));
    let iterations = first.iterations + second.iterations;
    if second.f <= first.f {
        NelderMeadResult { iterations, ..second }
    } else {
        NelderMeadResult { iterations, ..first }
    }
}

fn run<F: FnMut(&[f64]) -> f64>(f: &mut F, x0: &[f64], opts: &NelderMeadOptions, max_iter: usize) -> NelderMeadResult {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        let step = if p[i] != 0.0 { opts.initial_step * p[i].abs() } else { opts.initial_step };
        p[i] += step;
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut iterations = 0;
    loop {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let f_spread = values[n] - values[0];
        let x_spread = (0..n)
            .map(|j| {
                simplex
                    .iter()
                    .map(|p| (p[j] - simplex[0][j]).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        let x_limit = opts.x_tol * simplex[0].iter().fold(1.0f64, |m, v| m.max(v.abs()));
        if values[0].is_finite() && (f_spread <= opts.f_tol || x_spread <= x_limit) {
            return NelderMeadResult {
                x: simplex.swap_remove(0),
                f: values[0],
                iterations,
                converged: true,
            };
        }
        if iterations >= max_iter {
            return NelderMeadResult {
                x: simplex.swap_remove(0),
                f: values[0],
                iterations,
                converged: false,
            };
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|p| p[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let reflected = along(alpha);
        let fr = f(&reflected);
        if fr < values[0] {
            let expanded = along(gamma);
            let fe = f(&expanded);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
            continue;
        }
        let (contracted, fc) = if fr < values[n] {
            let c = along(rho);
            let v = f(&c);
            (c, v)
        } else {
            let c = along(-rho);
            let v = f(&c);
            (c, v)
        };
        if fc < values[n].min(fr) {
            simplex[n] = contracted;
            values[n] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=n {
            simplex[i] = best.iter().zip(&simplex[i]).map(|(b, p)| b + sigma * (p - b)).collect();
            values[i] = f(&simplex[i]);
        }
    }
}
