//! Box-constrained simulated annealing with a Nelder–Mead polish of the best point.

use rand_distr::{Distribution, StandardNormal};

use super::rng::RngState;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds<const N: usize> {
    pub lower: [f64; N],
    pub upper: [f64; N],
}

impl<const N: usize> Bounds<N> {
    pub fn new(lower: [f64; N], upper: [f64; N]) -> Self {
        debug_assert!(lower.iter().zip(&upper).all(|(l, u)| l <= u));
        Self { lower, upper }
    }

    fn clamp(&self, x: &mut [f64; N]) {
        for i in 0..N {
            x[i] = x[i].clamp(self.lower[i], self.upper[i]);
        }
    }

    pub fn contains(&self, x: &[f64; N]) -> bool {
        (0..N).all(|i| self.lower[i] <= x[i] && x[i] <= self.upper[i])
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnnealSchedule {
    pub initial_temperature: f64,
    /// Geometric cooling factor applied after each level.
    pub cooling: f64,
    pub levels: usize,
    pub moves_per_level: usize,
    /// Proposal standard deviation at the initial temperature, as a fraction of the box width.
    pub initial_step: f64,
    /// Nelder–Mead iterations spent refining the best visited point; 0 disables.
    pub polish_iterations: usize,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        Self {
            initial_temperature: 10.0,
            cooling: 0.95,
            levels: 200,
            moves_per_level: 50,
            initial_step: 0.5,
            polish_iterations: 400,
        }
    }
}

/// Minimizes `objective` over the box and returns the best point seen with its value.
///
/// Proposals are Gaussian with a per-coordinate scale proportional to the box
/// width times `T / T0`, reflected back into the box. Non-finite objective
/// values are treated as `+inf`.
pub fn anneal_minimize<const N: usize, F>(
    objective: F,
    bounds: &Bounds<N>,
    rng: &mut RngState,
    schedule: &AnnealSchedule,
) -> ([f64; N], f64)
where
    F: Fn(&[f64; N]) -> f64,
{
    let eval = |x: &[f64; N]| {
        let v = objective(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut current = [0.0; N];
    for i in 0..N {
        current[i] = bounds.lower[i] + rng.uniform() * (bounds.upper[i] - bounds.lower[i]);
    }
    let mut current_value = eval(&current);
    let mut best = current;
    let mut best_value = current_value;

    let mut temperature = schedule.initial_temperature;
    for _ in 0..schedule.levels {
        let scale = schedule.initial_step * temperature / schedule.initial_temperature;
        for _ in 0..schedule.moves_per_level {
            let mut candidate = current;
            for i in 0..N {
                let width = bounds.upper[i] - bounds.lower[i];
                let z: f64 = StandardNormal.sample(rng);
                candidate[i] = reflect(candidate[i] + z * scale * width, bounds.lower[i], bounds.upper[i]);
            }
            let value = eval(&candidate);
            let delta = value - current_value;
            let accept = delta <= 0.0 || rng.uniform() < (-delta / temperature).exp();
            if accept {
                current = candidate;
                current_value = value;
                if value < best_value {
                    best = candidate;
                    best_value = value;
                }
            }
        }
        temperature *= schedule.cooling;
    }

    if schedule.polish_iterations > 0 {
        let (x, v) = nelder_mead(&eval, bounds, best, schedule.polish_iterations);
        if v < best_value {
            best = x;
            best_value = v;
        }
    }
    (best, best_value)
}

fn reflect(mut x: f64, lo: f64, hi: f64) -> f64 {
    let width = hi - lo;
    if width <= 0.0 {
        return lo;
    }
    // Fold into [lo, hi]; a couple of passes cover any step we generate.
    for _ in 0..4 {
        if x < lo {
            x = 2.0 * lo - x;
        } else if x > hi {
            x = 2.0 * hi - x;
        } else {
            return x;
        }
    }
    x.clamp(lo, hi)
}

fn nelder_mead<const N: usize>(
    eval: &dyn Fn(&[f64; N]) -> f64,
    bounds: &Bounds<N>,
    start: [f64; N],
    iterations: usize,
) -> ([f64; N], f64) {
    let mut simplex: Vec<([f64; N], f64)> = Vec::with_capacity(N + 1);
    simplex.push((start, eval(&start)));
    for i in 0..N {
        let mut p = start;
        let step = 0.01 * (bounds.upper[i] - bounds.lower[i]);
        p[i] = if p[i] + step <= bounds.upper[i] { p[i] + step } else { p[i] - step };
        simplex.push((p, eval(&p)));
    }

    for _ in 0..iterations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[N].1 - simplex[0].1;
        if spread.abs() < 1e-16 && simplex[N].1.is_finite() {
            break;
        }

        let mut centroid = [0.0; N];
        for (p, _) in &simplex[..N] {
            for i in 0..N {
                centroid[i] += p[i] / N as f64;
            }
        }
        let along = |t: f64| {
            let mut x = [0.0; N];
            for i in 0..N {
                x[i] = centroid[i] + t * (simplex[N].0[i] - centroid[i]);
            }
            bounds.clamp(&mut x);
            x
        };

        let reflected = along(-1.0);
        let fr = eval(&reflected);
        if fr < simplex[0].1 {
            let expanded = along(-2.0);
            let fe = eval(&expanded);
            simplex[N] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[N - 1].1 {
            simplex[N] = (reflected, fr);
        } else {
            let contracted = if fr < simplex[N].1 { along(-0.5) } else { along(0.5) };
            let fc = eval(&contracted);
            if fc < simplex[N].1.min(fr) {
                simplex[N] = (contracted, fc);
            } else {
                let best = simplex[0].0;
                for vertex in simplex.iter_mut().skip(1) {
                    for i in 0..N {
                        vertex.0[i] = best[i] + 0.5 * (vertex.0[i] - best[i]);
                    }
                    vertex.1 = eval(&vertex.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex[0]
}
