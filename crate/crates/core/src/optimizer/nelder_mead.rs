//! Fixed-dimension Nelder–Mead simplex minimizer.
//!
//! Standard coefficients (reflection 1, expansion 2, contraction ½,
//! shrink ½). Infinite objective values are allowed and simply rank worst.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMead {
    /// Edge length of the initial axis-aligned simplex.
    pub initial_step: f64,
    pub max_iterations: usize,
    /// Stop once every vertex lies within this ∞-norm distance of the best.
    pub diameter_tol: f64,
    /// Stop once `f_worst - f_best <= value_tol * |f_best|`.
    pub value_tol: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            initial_step: 0.25,
            max_iterations: 20_000,
            diameter_tol: 1e-10,
            value_tol: 1e-15,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOutcome<const N: usize> {
    pub x: [f64; N],
    pub value: f64,
    pub iterations: usize,
    pub diameter: f64,
}

fn lerp<const N: usize>(from: &[f64; N], to: &[f64; N], t: f64) -> [f64; N] {
    std::array::from_fn(|i| from[i] + t * (to[i] - from[i]))
}

impl NelderMead {
    pub fn minimize<const N: usize, F>(&self, f: F, x0: [f64; N]) -> SimplexOutcome<N>
    where
        F: Fn(&[f64; N]) -> f64,
    {
        let eval = |x: &[f64; N]| {
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };

        let mut simplex: Vec<([f64; N], f64)> = Vec::with_capacity(N + 1);
        simplex.push((x0, eval(&x0)));
        for i in 0..N {
            let mut x = x0;
            x[i] += self.initial_step;
            simplex.push((x, eval(&x)));
        }

        let mut iterations = 0;
        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let best = simplex[0];
            let worst = simplex[N];
            let diameter = simplex[1..]
                .iter()
                .flat_map(|(x, _)| x.iter().zip(best.0.iter()).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            let spread = worst.1 - best.1;
            let flat = spread.is_finite() && spread <= self.value_tol * best.1.abs();
            if diameter < self.diameter_tol || flat || iterations >= self.max_iterations {
                return SimplexOutcome {
                    x: best.0,
                    value: best.1,
                    iterations,
                    diameter,
                };
            }
            iterations += 1;

            let mut centroid = [0.0; N];
            for (x, _) in &simplex[..N] {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += xi / N as f64;
                }
            }

            let reflected = lerp(&centroid, &worst.0, -1.0);
            let f_reflected = eval(&reflected);
            let second_worst = simplex[N - 1].1;

            if f_reflected < best.1 {
                let expanded = lerp(&centroid, &worst.0, -2.0);
                let f_expanded = eval(&expanded);
                simplex[N] = if f_expanded < f_reflected {
                    (expanded, f_expanded)
                } else {
                    (reflected, f_reflected)
                };
                continue;
            }
            if f_reflected < second_worst {
                simplex[N] = (reflected, f_reflected);
                continue;
            }

            let (contracted, f_contracted) = if f_reflected < worst.1 {
                let x = lerp(&centroid, &reflected, 0.5);
                (x, eval(&x))
            } else {
                let x = lerp(&centroid, &worst.0, 0.5);
                (x, eval(&x))
            };
            if f_contracted < worst.1.min(f_reflected) {
                simplex[N] = (contracted, f_contracted);
                continue;
            }

            for vertex in simplex.iter_mut().skip(1) {
                let x = lerp(&best.0, &vertex.0, 0.5);
                *vertex = (x, eval(&x));
            }
        }
    }
}
