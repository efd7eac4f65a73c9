//! Probability-simplex utilities shared by the solvers and order checkers.

/// Dot product of two equal-length slices.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Uniform point of the `dim`-simplex.
pub fn uniform(dim: usize) -> Vec<f64> {
    vec![1.0 / dim as f64; dim]
}

/// Vertex `e_m` of the `dim`-simplex.
pub fn vertex(dim: usize, m: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[m] = 1.0;
    v
}

/// Euclidean projection onto the probability simplex (sort-based).
pub fn project(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - 1.0) / (i + 1) as f64;
        if u - t <= 0.0 {
            break;
        }
        theta = t;
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Renormalize a nonnegative vector to sum exactly to one.
pub fn renormalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        for x in v.iter_mut() {
            *x /= s;
        }
    }
}

/// All lattice points of the simplex with mesh `1/q` (compositions of `q`
/// into `dim` nonnegative parts, divided by `q`).
pub fn lattice(dim: usize, q: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut current = vec![0usize; dim];
    fill_compositions(q, 0, &mut current, &mut out, q);
    out
}

fn fill_compositions(
    remaining: usize,
    idx: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<Vec<f64>>,
    q: usize,
) {
    if idx + 1 == current.len() {
        current[idx] = remaining;
        out.push(current.iter().map(|&c| c as f64 / q as f64).collect());
        return;
    }
    for c in 0..=remaining {
        current[idx] = c;
        fill_compositions(remaining - c, idx + 1, current, out, q);
    }
}

/// `n` deterministic low-discrepancy interior points of the `dim`-simplex.
///
/// Uses a Kronecker (additive-recurrence) sequence with square-root-of-prime
/// increments, mapped to the simplex through normalized exponential spacings.
pub fn low_discrepancy(dim: usize, n: usize) -> Vec<Vec<f64>> {
    const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];
    let alphas: Vec<f64> = (0..dim)
        .map(|j| (PRIMES[j % PRIMES.len()] as f64).sqrt().fract())
        .collect();
    (1..=n)
        .map(|i| {
            let mut point: Vec<f64> = alphas
                .iter()
                .map(|&a| {
                    let u = (i as f64 * a).fract().clamp(1e-9, 1.0 - 1e-9);
                    -(1.0 - u).ln()
                })
                .collect();
            renormalize(&mut point);
            point
        })
        .collect()
}

/// Portfolio grid used by the fixed-`b` vector order checks: lattice of mesh
/// `1/q` for low dimensions, low-discrepancy points otherwise, always
/// augmented with all vertices and the barycenter.
pub fn order_grid(dim: usize, q: usize, low_disc_count: usize) -> Vec<Vec<f64>> {
    let mut grid = if dim <= 5 {
        lattice(dim, q)
    } else {
        let mut g = low_discrepancy(dim, low_disc_count);
        g.extend((0..dim).map(|m| vertex(dim, m)));
        g
    };
    grid.push(uniform(dim));
    grid
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_of_simplex_point_is_identity() {
        let v = vec![0.2, 0.5, 0.3];
        let p = project(&v);
        for (a, b) in v.iter().zip(&p) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_lands_on_simplex() {
        let v = vec![1.4, -0.3, 0.6, 0.1];
        let p = project(&v);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn projection_clamps_to_nearest_vertex() {
        let p = project(&[5.0, 0.0, 0.0]);
        assert_eq!(p, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn lattice_counts_match_binomial() {
        // C(q + dim - 1, dim - 1)
        assert_eq!(lattice(2, 20).len(), 21);
        assert_eq!(lattice(3, 20).len(), 231);
        assert_eq!(lattice(4, 6).len(), 84);
    }

    #[test]
    fn lattice_points_on_simplex() {
        for p in lattice(3, 7) {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(p.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn low_discrepancy_points_are_interior() {
        for p in low_discrepancy(4, 100) {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(p.iter().all(|&x| x > 0.0));
        }
    }
}
