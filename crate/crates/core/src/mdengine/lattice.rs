//! Initial conditions: FCC lattice positions and Maxwell-Boltzmann
//! velocities.

use rand::RngExt;

use crate::scalar::Real;

/// Positions of `4 * cells^3` particles on an FCC lattice filling a cubic
/// box of the given side length.
pub fn fcc_positions<T: Real>(cells_per_side: usize, box_length: T) -> Vec<[T; 3]> {
    assert!(cells_per_side >= 1, "FCC lattice needs at least one cell");
    let a = box_length / T::from_count(cells_per_side);
    let half = T::lit(0.5);
    let basis = [
        [T::zero(), T::zero(), T::zero()],
        [T::zero(), half, half],
        [half, T::zero(), half],
        [half, half, T::zero()],
    ];
    let mut positions = Vec::with_capacity(4 * cells_per_side.pow(3));
    for cx in 0..cells_per_side {
        for cy in 0..cells_per_side {
            for cz in 0..cells_per_side {
                let corner = [
                    T::from_count(cx) * a,
                    T::from_count(cy) * a,
                    T::from_count(cz) * a,
                ];
                for b in &basis {
                    positions.push([
                        corner[0] + b[0] * a,
                        corner[1] + b[1] * a,
                        corner[2] + b[2] * a,
                    ]);
                }
            }
        }
    }
    positions
}

/// One standard normal draw via Box-Muller (two uniforms per call, so the
/// stream consumption is data-independent and reproducible).
pub(crate) fn standard_normal<T: Real, R: RngExt>(rng: &mut R) -> T {
    let u1: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
    let u2: f64 = rng.random();
    T::lit((-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos())
}

/// Maxwell-Boltzmann velocities at the target temperature (m = 1) with the
/// net momentum removed.
pub fn maxwell_boltzmann_velocities<T: Real, R: RngExt>(
    n_particles: usize,
    temperature: T,
    rng: &mut R,
) -> Vec<[T; 3]> {
    let sigma = temperature.sqrt();
    let mut velocities: Vec<[T; 3]> = (0..n_particles)
        .map(|_| {
            [
                sigma * standard_normal(rng),
                sigma * standard_normal(rng),
                sigma * standard_normal(rng),
            ]
        })
        .collect();
    if n_particles > 0 {
        let count = T::from_count(n_particles);
        let mut mean = [T::zero(); 3];
        for v in &velocities {
            for c in 0..3 {
                mean[c] += v[c];
            }
        }
        for m in &mut mean {
            *m /= count;
        }
        for v in &mut velocities {
            for c in 0..3 {
                v[c] -= mean[c];
            }
        }
    }
    velocities
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_cell_is_the_fcc_basis() {
        let p = fcc_positions::<f64>(1, 1.0);
        assert_eq!(
            p,
            vec![
                [0.0, 0.0, 0.0],
                [0.0, 0.5, 0.5],
                [0.5, 0.0, 0.5],
                [0.5, 0.5, 0.0],
            ]
        );
    }

    #[test]
    fn ten_cells_give_four_thousand_at_density_point_eight() {
        let p = fcc_positions::<f64>(10, 17.1);
        assert_eq!(p.len(), 4000);
        let density = 4000.0 / 17.1f64.powi(3);
        assert!((density - 0.8).abs() < 0.005, "density {density}");
    }

    #[test]
    fn minimum_image_separation_matches_lattice_constant() {
        // All-pairs brute force over 500 particles.
        let box_length = 8.55;
        let p = fcc_positions::<f64>(5, box_length);
        assert_eq!(p.len(), 500);
        let expected_min = (box_length / 5.0) * 2.0f64.sqrt() / 2.0;
        let mut min_r2 = f64::INFINITY;
        for i in 0..p.len() {
            for j in (i + 1)..p.len() {
                let mut r2 = 0.0;
                for c in 0..3 {
                    let mut d: f64 = p[i][c] - p[j][c];
                    d -= box_length * (d / box_length).round();
                    r2 += d * d;
                }
                min_r2 = min_r2.min(r2);
            }
        }
        assert!(
            min_r2.sqrt() >= expected_min - 1e-12,
            "min separation {} < {}",
            min_r2.sqrt(),
            expected_min
        );
    }

    #[test]
    fn maxwell_boltzmann_removes_net_momentum() {
        let n = 4096;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let v = maxwell_boltzmann_velocities::<f64, _>(n, 0.9, &mut rng);
        for c in 0..3 {
            let total: f64 = v.iter().map(|x| x[c]).sum();
            assert!(total.abs() < 1e-11, "net momentum {total}");
        }
        // Sampling noise on the kinetic temperature is ~ T sqrt(2 / 3n) ~ 1%.
        let ke: f64 = v.iter().map(|x| 0.5 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).sum();
        let t_kin = 2.0 * ke / (3.0 * n as f64);
        assert!((t_kin - 0.9).abs() < 0.045, "kinetic temperature {t_kin}");
    }
}
