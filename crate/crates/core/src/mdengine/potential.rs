//! Truncated and energy-shifted Lennard-Jones 12-6 pair potential in
//! reduced units (sigma = epsilon = 1).

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `U(r) = 4 ((1/r)^12 - (1/r)^6)`, shifted so the energy vanishes at the
/// cutoff; the force keeps the unshifted derivative.
#[derive(Clone, Copy, Debug)]
pub struct LjPotential<T> {
    cutoff: T,
    cutoff_sq: T,
    shift: T,
}

impl<T: Real> LjPotential<T> {
    pub fn new(cutoff: T) -> Result<Self> {
        if !(cutoff > T::zero()) || !cutoff.is_finite() {
            return Err(Error::invalid(
                "cutoff_radius",
                "must be a positive finite real",
            ));
        }
        Ok(LjPotential {
            cutoff,
            cutoff_sq: cutoff * cutoff,
            shift: unshifted_energy(cutoff),
        })
    }

    pub fn cutoff(&self) -> T {
        self.cutoff
    }

    pub fn cutoff_sq(&self) -> T {
        self.cutoff_sq
    }

    /// Shifted pair energy and force magnitude `-dU/dr` at separation `r`.
    /// Both vanish at and beyond the cutoff.
    pub fn energy_force(&self, r: T) -> Result<(T, T)> {
        if !(r > T::zero()) {
            return Err(Error::invalid("r", "pair separation must be positive"));
        }
        if r >= self.cutoff {
            return Ok((T::zero(), T::zero()));
        }
        let (u, g) = self.energy_force_over_r_from_r2(r * r);
        Ok((u, g * r))
    }

    /// Hot-path form working on the squared separation: returns the shifted
    /// energy and `g = -dU/dr / r` so the force vector is `g * dr` with no
    /// square root. Caller guarantees `0 < r2 < cutoff_sq`.
    #[inline]
    pub fn energy_force_over_r_from_r2(&self, r2: T) -> (T, T) {
        let inv_r2 = r2.recip();
        let inv_r6 = inv_r2 * inv_r2 * inv_r2;
        let inv_r12 = inv_r6 * inv_r6;
        let four = T::lit(4.0);
        let u = four * (inv_r12 - inv_r6) - self.shift;
        let g = T::lit(24.0) * (T::lit(2.0) * inv_r12 - inv_r6) * inv_r2;
        (u, g)
    }
}

fn unshifted_energy<T: Real>(r: T) -> T {
    let inv_r6 = (r * r).recip().powi(3);
    T::lit(4.0) * (inv_r6 * inv_r6 - inv_r6)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn energy_vanishes_at_sigma() {
        let lj = LjPotential::new(100.0).unwrap();
        let (u, _) = lj.energy_force(1.0).unwrap();
        // Shift at r_c = 100 is ~4e-12; unshifted U(1) = 0 exactly.
        assert_close(u, 0.0, 1e-11);
    }

    #[test]
    fn minimum_at_two_to_the_sixth_root() {
        let lj = LjPotential::new(1e6).unwrap();
        let r_min = 2.0f64.powf(1.0 / 6.0);
        let (u, f) = lj.energy_force(r_min).unwrap();
        assert_close(u, -1.0, 1e-12);
        assert_close(f, 0.0, 1e-12);
    }

    #[test]
    fn shift_cancels_energy_at_cutoff() {
        let lj = LjPotential::new(2.5).unwrap();
        // Just inside the cutoff, the shifted energy approaches 0.
        let (u, _) = lj.energy_force(2.5 - 1e-9).unwrap();
        assert_close(u, 0.0, 1e-7);
        // At and beyond the cutoff it is exactly 0.
        assert_eq!(lj.energy_force(2.5).unwrap(), (0.0, 0.0));
        assert_eq!(lj.energy_force(3.0).unwrap(), (0.0, 0.0));
        // The shift equals the unshifted tail value: U(2.5) = -0.0163...
        let expected = 4.0 * (2.5f64.powi(-12) - 2.5f64.powi(-6));
        let (u_in, _) = lj.energy_force(2.0).unwrap();
        let unshifted = 4.0 * (2.0f64.powi(-12) - 2.0f64.powi(-6));
        assert_close(u_in, unshifted - expected, 1e-14);
    }

    #[test]
    fn force_matches_finite_difference() {
        let lj = LjPotential::new(1e3).unwrap();
        for &r in &[0.95, 1.1, 1.5, 2.0] {
            let h = 1e-6;
            let (u_plus, _) = lj.energy_force(r + h).unwrap();
            let (u_minus, _) = lj.energy_force(r - h).unwrap();
            let fd = -(u_plus - u_minus) / (2.0 * h);
            let (_, f) = lj.energy_force(r).unwrap();
            assert_close(f, fd, 1e-5 * f.abs().max(1.0));
        }
    }

    #[test]
    fn rejects_nonpositive_separation() {
        let lj = LjPotential::new(2.5).unwrap();
        assert!(lj.energy_force(0.0).is_err());
        assert!(lj.energy_force(-1.0).is_err());
    }
}
