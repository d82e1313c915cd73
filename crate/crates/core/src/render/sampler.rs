//! Stratified sampling along a clipped ray.

use rand::Rng;

use crate::render::camera::Ray;

/// Sample depths and intervals. Each t_i is drawn uniformly inside the i-th
/// of `n` equal sub-intervals of [t_near, t_far] (midpoints when jitter is
/// off). delta_i = t_{i+1} - t_i, with the last interval closed by t_far.
pub fn sample_ray<R: Rng>(
    ray: &Ray,
    n: usize,
    jitter: bool,
    rng: &mut R,
) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "sample_ray: n must be >= 1");
    let span = ray.t_far - ray.t_near;
    let step = span / n as f64;
    let mut ts = Vec::with_capacity(n);
    for i in 0..n {
        let u = if jitter { rng.gen::<f64>() } else { 0.5 };
        ts.push(ray.t_near + (i as f64 + u) * step);
    }
    let mut deltas = Vec::with_capacity(n);
    for i in 0..n {
        let next = if i + 1 < n { ts[i + 1] } else { ray.t_far };
        deltas.push((next - ts[i]).max(0.0));
    }
    (ts, deltas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_ray() -> Ray {
        Ray {
            origin: Vector3::zeros(),
            dir: Vector3::new(0.0, 0.0, -1.0),
            t_near: 0.0,
            t_far: 1.0,
        }
    }

    #[test]
    fn single_midpoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (ts, deltas) = sample_ray(&unit_ray(), 1, false, &mut rng);
        assert_eq!(ts, vec![0.5]);
        assert_eq!(deltas, vec![0.5]);
    }

    #[test]
    fn four_midpoints() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (ts, deltas) = sample_ray(&unit_ray(), 4, false, &mut rng);
        assert_eq!(ts, vec![0.125, 0.375, 0.625, 0.875]);
        for d in &deltas[..3] {
            assert!((d - 0.25).abs() < 1e-15);
        }
        assert!((deltas[3] - 0.125).abs() < 1e-15);
    }

    #[test]
    fn jitter_is_seed_deterministic() {
        let a = sample_ray(&unit_ray(), 8, true, &mut ChaCha8Rng::seed_from_u64(9));
        let b = sample_ray(&unit_ray(), 8, true, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
        // strata bounds hold
        for (i, t) in a.0.iter().enumerate() {
            assert!(*t >= i as f64 / 8.0 && *t <= (i + 1) as f64 / 8.0);
        }
    }
}
