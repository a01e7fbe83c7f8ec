//! Nelder–Mead simplex minimizer on unconstrained coordinates.

#[derive(Debug, Clone, Copy)]
pub(crate) struct SimplexOptions {
    pub max_iterations: usize,
    /// Objective spread across the simplex, relative to `max(1, |f|)`.
    pub f_tol: f64,
    /// Largest coordinate distance from the best vertex.
    pub x_tol: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct SimplexResult<const N: usize> {
    pub x: [f64; N],
    pub f: f64,
    #[allow(dead_code)]
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Minimize `f` from `x0`; non-finite objective values are treated as `+inf`.
pub(crate) fn nelder_mead<const N: usize, F>(
    mut f: F,
    x0: [f64; N],
    steps: [f64; N],
    opts: &SimplexOptions,
) -> SimplexResult<N>
where
    F: FnMut(&[f64; N]) -> f64,
{
    let mut eval = |x: &[f64; N], count: &mut usize| {
        *count += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut evaluations = 0;

    let mut verts: Vec<([f64; N], f64)> = Vec::with_capacity(N + 1);
    verts.push((x0, eval(&x0, &mut evaluations)));
    for i in 0..N {
        let mut x = x0;
        x[i] += steps[i];
        let v = eval(&x, &mut evaluations);
        verts.push((x, v));
    }

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iterations {
        verts.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = verts[0].1;
        let worst = verts[N].1;

        let f_spread = worst - best;
        let x_spread = verts[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(verts[0].0.iter()).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if best.is_finite() && f_spread <= opts.f_tol * best.abs().max(1.0) && x_spread <= opts.x_tol {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = [0.0; N];
        for (x, _) in &verts[..N] {
            for k in 0..N {
                centroid[k] += x[k] / N as f64;
            }
        }
        let along = |t: f64| {
            let mut p = [0.0; N];
            for k in 0..N {
                p[k] = centroid[k] + t * (verts[N].0[k] - centroid[k]);
            }
            p
        };

        let xr = along(-REFLECT);
        let fr = eval(&xr, &mut evaluations);
        if fr < best {
            let xe = along(-EXPAND);
            let fe = eval(&xe, &mut evaluations);
            verts[N] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < verts[N - 1].1 {
            verts[N] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst {
            let xc = along(-CONTRACT);
            (xc, eval(&xc, &mut evaluations))
        } else {
            let xc = along(CONTRACT);
            (xc, eval(&xc, &mut evaluations))
        };
        if fc < worst.min(fr) {
            verts[N] = (xc, fc);
            continue;
        }
        let x_best = verts[0].0;
        for v in verts.iter_mut().skip(1) {
            for k in 0..N {
                v.0[k] = x_best[k] + SHRINK * (v.0[k] - x_best[k]);
            }
            v.1 = eval(&v.0, &mut evaluations);
        }
    }
    verts.sort_by(|a, b| a.1.total_cmp(&b.1));
    SimplexResult {
        x: verts[0].0,
        f: verts[0].1,
        iterations,
        evaluations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> SimplexOptions {
        SimplexOptions {
            max_iterations: 5000,
            f_tol: 1e-12,
            x_tol: 1e-7,
        }
    }

    #[test]
    fn rosenbrock() {
        let r = nelder_mead(
            |x: &[f64; 2]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2),
            [-1.2, 1.0],
            [0.5, 0.5],
            &opts(),
        );
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-5 && (r.x[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn infinite_region_is_avoided() {
        let r = nelder_mead(
            |x: &[f64; 3]| {
                if x[2] < 0.0 {
                    f64::INFINITY
                } else {
                    (x[0] - 1.0).powi(2) + (x[1] + 2.0).powi(2) + (x[2] - 0.5).powi(2)
                }
            },
            [0.0, 0.0, 1.0],
            [0.3, 0.3, 0.3],
            &opts(),
        );
        assert!(r.converged);
        assert!((r.x[2] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn iteration_cap_reports_failure() {
        let mut o = opts();
        o.max_iterations = 3;
        let r = nelder_mead(|x: &[f64; 2]| x[0] * x[0] + x[1] * x[1], [5.0, 5.0], [1.0, 1.0], &o);
        assert!(!r.converged);
        assert_eq!(r.iterations, 3);
    }
}
