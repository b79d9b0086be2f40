//! Velocity Verlet and BAOAB Langevin steps.

use rand::RngExt;

use crate::error::{Error, Result};
use crate::mdengine::lattice::standard_normal;
use crate::mdengine::System;
use crate::scalar::Real;

fn wrap_coordinate<T: Real>(x: T, box_length: T) -> T {
    let mut w = x - box_length * (x / box_length).floor();
    if w >= box_length {
        w -= box_length;
    }
    if w < T::zero() {
        w += box_length;
    }
    w
}

fn kick<T: Real>(system: &mut System<T>, amount: T) {
    for (v, f) in system
        .state
        .velocities
        .iter_mut()
        .zip(&system.state.forces)
    {
        for c in 0..3 {
            v[c] += amount * f[c];
        }
    }
}

fn drift<T: Real>(system: &mut System<T>, amount: T) {
    let box_length = system.box_length;
    for i in 0..system.state.positions.len() {
        for c in 0..3 {
            let dx = amount * system.state.velocities[i][c];
            system.state.unwrapped[i][c] += dx;
            system.state.positions[i][c] =
                wrap_coordinate(system.state.positions[i][c] + dx, box_length);
        }
    }
}

fn check_finite<T: Real>(system: &System<T>) -> Result<()> {
    let finite = system
        .state
        .positions
        .iter()
        .chain(&system.state.velocities)
        .all(|v| v.iter().all(|c| c.is_finite()));
    if finite {
        Ok(())
    } else {
        Err(Error::IntegrationBlowUp {
            step: system.state.step,
        })
    }
}

/// One kick-drift-kick velocity Verlet step. Assumes `state.forces` match
/// the current positions; leaves them matching the new positions.
pub fn velocity_verlet_step<T: Real>(system: &mut System<T>, dt: T) -> Result<()> {
    let half = dt * T::lit(0.5);
    kick(system, half);
    drift(system, dt);
    system.refresh_forces()?;
    kick(system, half);
    system.state.step += 1;
    check_finite(system)
}

/// One BAOAB Langevin step at the target temperature with friction `gamma`.
/// Noise consumption is 3n standard normals per step, reproducible from the
/// caller's seeded generator. Reduces to velocity Verlet as `gamma -> 0`.
pub fn langevin_step<T: Real, R: RngExt>(
    system: &mut System<T>,
    dt: T,
    temperature: T,
    gamma: T,
    rng: &mut R,
) -> Result<()> {
    let half = dt * T::lit(0.5);
    kick(system, half);
    drift(system, half);

    let c1 = (-gamma * dt).exp();
    let c2 = (temperature * (T::one() - c1 * c1)).sqrt();
    for v in &mut system.state.velocities {
        for c in 0..3 {
            v[c] = c1 * v[c] + c2 * standard_normal(rng);
        }
    }

    drift(system, half);
    system.refresh_forces()?;
    kick(system, half);
    system.state.step += 1;
    check_finite(system)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdengine::forces::{ForceMethod, ForceModel};
    use crate::mdengine::potential::LjPotential;
    use crate::mdengine::SimState;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_particle_system(r: f64, cutoff: f64) -> System<f64> {
        let positions = vec![[5.0, 5.0, 5.0], [5.0 + r, 5.0, 5.0]];
        let mut system = System {
            box_length: 50.0,
            model: ForceModel::LennardJones(LjPotential::new(cutoff).unwrap()),
            method: ForceMethod::AllPairs,
            state: SimState::at_rest(positions),
        };
        system.refresh_forces().unwrap();
        system
    }

    fn free_system(positions: Vec<[f64; 3]>, velocities: Vec<[f64; 3]>) -> System<f64> {
        let mut system = System {
            box_length: 100.0,
            model: ForceModel::Ideal,
            method: ForceMethod::AllPairs,
            state: SimState::at_rest(positions),
        };
        system.state.velocities = velocities;
        system.refresh_forces().unwrap();
        system
    }

    #[test]
    fn free_flight_advances_linearly() {
        let mut system = free_system(vec![[1.0, 1.0, 1.0]], vec![[1.0, 0.0, 0.0]]);
        velocity_verlet_step(&mut system, 0.005).unwrap();
        assert!((system.state.positions[0][0] - 1.005).abs() < 1e-15);
        assert_eq!(system.state.positions[0][1], 1.0);
        assert_eq!(system.state.velocities[0][0], 1.0);
    }

    #[test]
    fn velocity_verlet_is_time_reversible() {
        let mut system = two_particle_system(1.3, 10.0);
        let initial = system.state.positions.clone();
        velocity_verlet_step(&mut system, 0.005).unwrap();
        for v in &mut system.state.velocities {
            for c in 0..3 {
                v[c] = -v[c];
            }
        }
        velocity_verlet_step(&mut system, 0.005).unwrap();
        for (p, q) in system.state.positions.iter().zip(&initial) {
            for c in 0..3 {
                assert!((p[c] - q[c]).abs() < 1e-12, "{} vs {}", p[c], q[c]);
            }
        }
    }

    #[test]
    fn bound_pair_conserves_energy_over_long_run() {
        // Slightly stretched pair oscillating in the potential well.
        let mut system = two_particle_system(1.13, 10.0);
        let e0 = system.state.kinetic_energy() + system.state.potential_energy;
        let mut worst = 0.0f64;
        for _ in 0..10_000 {
            velocity_verlet_step(&mut system, 0.005).unwrap();
            let e = system.state.kinetic_energy() + system.state.potential_energy;
            worst = worst.max(((e - e0) / e0).abs());
        }
        assert!(worst < 1e-5, "energy drift {worst}");
    }

    #[test]
    fn langevin_reduces_to_verlet_as_gamma_vanishes() {
        // Noise amplitude is sqrt(T (1 - exp(-2 gamma dt))) ~ sqrt(2 T gamma dt);
        // with gamma = 1e-12 and T = 1e-4 it sits near 1e-9, inside tolerance.
        let mut verlet = two_particle_system(1.3, 10.0);
        let mut langevin = two_particle_system(1.3, 10.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        velocity_verlet_step(&mut verlet, 0.005).unwrap();
        langevin_step(&mut langevin, 0.005, 1e-4, 1e-12, &mut rng).unwrap();
        for (p, q) in langevin.state.positions.iter().zip(&verlet.state.positions) {
            for c in 0..3 {
                assert!((p[c] - q[c]).abs() < 1e-8);
            }
        }
        for (p, q) in langevin
            .state
            .velocities
            .iter()
            .zip(&verlet.state.velocities)
        {
            for c in 0..3 {
                assert!((p[c] - q[c]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn langevin_ideal_gas_reaches_target_temperature() {
        // Equipartition on a thermostatted ideal gas.
        let n = 125;
        let positions = vec![[50.0, 50.0, 50.0]; n];
        let velocities = vec![[0.0, 0.0, 0.0]; n];
        let mut system = free_system(positions, velocities);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let dt = 0.005;
        let (temperature, gamma) = (1.0, 1.0);
        // Warm up from rest, then average.
        for _ in 0..2_000 {
            langevin_step(&mut system, dt, temperature, gamma, &mut rng).unwrap();
        }
        let mut acc = 0.0;
        let steps = 10_000;
        for _ in 0..steps {
            langevin_step(&mut system, dt, temperature, gamma, &mut rng).unwrap();
            acc += system.state.instantaneous_temperature();
        }
        let mean_t = acc / steps as f64;
        assert!(
            (mean_t - temperature).abs() < 0.02 * temperature,
            "mean temperature {mean_t}"
        );
    }

    #[test]
    fn blow_up_is_reported() {
        let mut system = two_particle_system(1.3, 10.0);
        system.state.velocities[0][0] = f64::INFINITY;
        match velocity_verlet_step(&mut system, 0.005) {
            Err(Error::IntegrationBlowUp { .. }) => {}
            // The poisoned coordinate can also surface as a NaN pair
            // distance, which the force kernel reports as overlap; either
            // way the step must fail.
            Err(Error::PairOverlap { .. }) => {}
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn momentum_is_conserved_in_nve() {
        let box_length = 5.13;
        let positions = crate::mdengine::lattice::fcc_positions::<f64>(3, box_length);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let velocities =
            crate::mdengine::lattice::maxwell_boltzmann_velocities(positions.len(), 0.9, &mut rng);
        let mut system = System {
            box_length,
            model: ForceModel::LennardJones(LjPotential::new(2.5).unwrap()),
            method: ForceMethod::AllPairs,
            state: SimState::at_rest(positions),
        };
        system.state.velocities = velocities;
        system.refresh_forces().unwrap();

        for _ in 0..10_000 {
            velocity_verlet_step(&mut system, 0.005).unwrap();
        }
        let p = system.state.total_momentum();
        for c in 0..3 {
            assert!(p[c].abs() < 1e-9, "momentum component {}", p[c]);
        }
    }
}
