//! Pairwise force evaluation with minimum-image periodic boundaries.
//!
//! Two interchangeable paths: a half-loop over all pairs and a cell list
//! with a 13-offset forward stencil. Both visit every interacting pair
//! exactly once with the identical pair kernel, so they agree to summation
//! roundoff.

use crate::error::{Error, Result};
use crate::mdengine::potential::LjPotential;
use crate::scalar::Real;

/// Squared separation below which two particles count as overlapping
/// (r < 1e-6).
const OVERLAP_R2: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ForceMethod {
    AllPairs,
    CellList,
    /// Cell list when the box fits at least a 3-cell grid, else all pairs.
    Auto,
}

/// Interaction model driving the integrators.
#[derive(Clone, Copy, Debug)]
pub enum ForceModel<T> {
    LennardJones(LjPotential<T>),
    /// Non-interacting particles; zero forces and potential energy.
    Ideal,
}

impl<T: Real> ForceModel<T> {
    /// Fills `forces` with the negative gradient of the total shifted
    /// potential and returns that potential energy.
    pub fn compute(
        &self,
        positions: &[[T; 3]],
        box_length: T,
        method: ForceMethod,
        forces: &mut Vec<[T; 3]>,
    ) -> Result<T> {
        forces.clear();
        forces.resize(positions.len(), [T::zero(); 3]);
        match self {
            ForceModel::Ideal => Ok(T::zero()),
            ForceModel::LennardJones(potential) => {
                let grid = (box_length / potential.cutoff())
                    .floor()
                    .to_usize()
                    .unwrap_or(0);
                let use_cells = match method {
                    ForceMethod::AllPairs => false,
                    // A forward stencil needs at least 3 cells per side to
                    // keep neighbor offsets distinct under wrapping.
                    ForceMethod::CellList => grid >= 3,
                    // At a 3-cell grid the stencil spans the whole box, so
                    // the list only pays off from 4 cells per side.
                    ForceMethod::Auto => grid >= 4,
                };
                if use_cells {
                    lj_cell_list(positions, box_length, potential, grid, forces)
                } else {
                    lj_all_pairs(positions, box_length, potential, forces)
                }
            }
        }
    }
}

/// Nearest-image convention for wrapped coordinates (|d| < box_length).
#[inline]
fn minimum_image<T: Real>(mut d: T, box_length: T, half_box: T) -> T {
    if d > half_box {
        d -= box_length;
    } else if d < -half_box {
        d += box_length;
    }
    d
}

#[inline]
fn accumulate_pair<T: Real>(
    i: usize,
    j: usize,
    positions: &[[T; 3]],
    box_length: T,
    potential: &LjPotential<T>,
    forces: &mut [[T; 3]],
    potential_energy: &mut T,
) -> Result<()> {
    let pi = positions[i];
    let pj = positions[j];
    let half_box = box_length * T::lit(0.5);
    let mut dr = [T::zero(); 3];
    let mut r2 = T::zero();
    for c in 0..3 {
        let d = minimum_image(pi[c] - pj[c], box_length, half_box);
        dr[c] = d;
        r2 += d * d;
    }
    if r2 < T::lit(OVERLAP_R2) {
        return Err(Error::PairOverlap {
            i,
            j,
            r: r2.sqrt().to_f64().unwrap_or(f64::NAN),
        });
    }
    if r2 < potential.cutoff_sq() {
        let (u, g) = potential.energy_force_over_r_from_r2(r2);
        *potential_energy += u;
        for c in 0..3 {
            let f = g * dr[c];
            forces[i][c] += f;
            forces[j][c] -= f;
        }
    }
    Ok(())
}

fn lj_all_pairs<T: Real>(
    positions: &[[T; 3]],
    box_length: T,
    potential: &LjPotential<T>,
    forces: &mut [[T; 3]],
) -> Result<T> {
    let n = positions.len();
    let overlap = T::lit(OVERLAP_R2);
    let cutoff_sq = potential.cutoff_sq();
    let half_box = box_length * T::lit(0.5);
    let mut pe = T::zero();
    for i in 0..n {
        let pi = positions[i];
        let mut fi = forces[i];
        for j in (i + 1)..n {
            let pj = positions[j];
            let dx = minimum_image(pi[0] - pj[0], box_length, half_box);
            let dy = minimum_image(pi[1] - pj[1], box_length, half_box);
            let dz = minimum_image(pi[2] - pj[2], box_length, half_box);
            let r2 = dx * dx + dy * dy + dz * dz;
            if r2 < cutoff_sq {
                if r2 < overlap {
                    return Err(Error::PairOverlap {
                        i,
                        j,
                        r: r2.sqrt().to_f64().unwrap_or(f64::NAN),
                    });
                }
                let (u, g) = potential.energy_force_over_r_from_r2(r2);
                pe += u;
                let (fx, fy, fz) = (g * dx, g * dy, g * dz);
                fi[0] += fx;
                fi[1] += fy;
                fi[2] += fz;
                forces[j][0] -= fx;
                forces[j][1] -= fy;
                forces[j][2] -= fz;
            }
        }
        forces[i] = fi;
    }
    Ok(pe)
}

/// Forward half-stencil: 13 neighbor offsets that, together with in-cell
/// pairs, visit every unordered cell pair once.
const FORWARD_OFFSETS: [(isize, isize, isize); 13] = [
    (1, 0, 0),
    (-1, 1, 0),
    (0, 1, 0),
    (1, 1, 0),
    (-1, -1, 1),
    (0, -1, 1),
    (1, -1, 1),
    (-1, 0, 1),
    (0, 0, 1),
    (1, 0, 1),
    (-1, 1, 1),
    (0, 1, 1),
    (1, 1, 1),
];

fn lj_cell_list<T: Real>(
    positions: &[[T; 3]],
    box_length: T,
    potential: &LjPotential<T>,
    grid: usize,
    forces: &mut [[T; 3]],
) -> Result<T> {
    let cell_size = box_length / T::from_count(grid);
    let cell_of = |p: &[T; 3]| -> usize {
        let mut idx = [0usize; 3];
        for c in 0..3 {
            let raw = (p[c] / cell_size).floor().to_usize().unwrap_or(0);
            idx[c] = raw.min(grid - 1);
        }
        (idx[0] * grid + idx[1]) * grid + idx[2]
    };

    let mut cells: Vec<Vec<usize>> = vec![Vec::new(); grid * grid * grid];
    for (i, p) in positions.iter().enumerate() {
        cells[cell_of(p)].push(i);
    }

    let mut pe = T::zero();
    let wrap = |v: isize| -> usize { v.rem_euclid(grid as isize) as usize };
    for cx in 0..grid {
        for cy in 0..grid {
            for cz in 0..grid {
                let home = &cells[(cx * grid + cy) * grid + cz];
                for (a, &i) in home.iter().enumerate() {
                    for &j in &home[a + 1..] {
                        accumulate_pair(i, j, positions, box_length, potential, forces, &mut pe)?;
                    }
                }
                for &(dx, dy, dz) in &FORWARD_OFFSETS {
                    let nx = wrap(cx as isize + dx);
                    let ny = wrap(cy as isize + dy);
                    let nz = wrap(cz as isize + dz);
                    let neighbor = &cells[(nx * grid + ny) * grid + nz];
                    for &i in home {
                        for &j in neighbor {
                            accumulate_pair(
                                i, j, positions, box_length, potential, forces, &mut pe,
                            )?;
                        }
                    }
                }
            }
        }
    }
    Ok(pe)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdengine::lattice::fcc_positions;

    fn lj(cutoff: f64) -> ForceModel<f64> {
        ForceModel::LennardJones(LjPotential::new(cutoff).unwrap())
    }

    #[test]
    fn bound_pair_at_minimum_has_zero_forces() {
        let r_min = 2.0f64.powf(1.0 / 6.0);
        let positions = vec![[1.0, 1.0, 1.0], [1.0 + r_min, 1.0, 1.0]];
        let mut forces = Vec::new();
        lj(20.0)
            .compute(&positions, 50.0, ForceMethod::AllPairs, &mut forces)
            .unwrap();
        for f in &forces {
            for c in 0..3 {
                assert!(f[c].abs() < 1e-12, "force {f:?}");
            }
        }
    }

    #[test]
    fn pair_forces_are_equal_opposite_and_match_analytic() {
        let r = 1.5;
        let positions = vec![[0.0, 0.0, 0.0], [r, 0.0, 0.0]];
        let mut forces = Vec::new();
        lj(10.0)
            .compute(&positions, 40.0, ForceMethod::AllPairs, &mut forces)
            .unwrap();
        // Radial force -dU/dr at r = 1.5 is negative (attraction), so the
        // force on particle 0 points toward particle 1 at +x.
        let radial = 24.0 * (2.0 * r.powi(-13) - r.powi(-7));
        assert!(radial < 0.0);
        assert!((forces[0][0] + radial).abs() < 1e-12);
        assert!((forces[1][0] - radial).abs() < 1e-12);
        for c in 1..3 {
            assert_eq!(forces[0][c], 0.0);
            assert_eq!(forces[1][c], 0.0);
        }

        // Central finite difference of the pair energy along the separation.
        let ljp = LjPotential::new(10.0).unwrap();
        let h = 1e-5;
        let fd = -(ljp.energy_force(r + h).unwrap().0 - ljp.energy_force(r - h).unwrap().0)
            / (2.0 * h);
        assert!((forces[0][0] + fd).abs() < 1e-6, "{} vs {}", forces[0][0], -fd);
    }

    #[test]
    fn forces_sum_to_zero_on_fcc() {
        let box_length = 8.55;
        let positions = fcc_positions::<f64>(5, box_length);
        let mut forces = Vec::new();
        lj(2.5)
            .compute(&positions, box_length, ForceMethod::AllPairs, &mut forces)
            .unwrap();
        for c in 0..3 {
            let total: f64 = forces.iter().map(|f| f[c]).sum();
            assert!(total.abs() < 1e-9, "net force component {total}");
        }
    }

    #[test]
    fn cell_list_matches_all_pairs() {
        // Perturbed FCC so forces are nonzero and direction-rich.
        let box_length = 8.55;
        let mut positions = fcc_positions::<f64>(5, box_length);
        for (i, p) in positions.iter_mut().enumerate() {
            let jitter = ((i * 2654435761) % 1000) as f64 / 1000.0 - 0.5;
            p[0] = (p[0] + 0.05 * jitter).rem_euclid(box_length);
            p[1] = (p[1] + 0.03 * jitter).rem_euclid(box_length);
            p[2] = (p[2] + 0.04 * jitter).rem_euclid(box_length);
        }
        let model = lj(2.5);
        let mut all = Vec::new();
        let mut cells = Vec::new();
        let pe_all = model
            .compute(&positions, box_length, ForceMethod::AllPairs, &mut all)
            .unwrap();
        let pe_cells = model
            .compute(&positions, box_length, ForceMethod::CellList, &mut cells)
            .unwrap();
        assert!((pe_all - pe_cells).abs() < 1e-10 * pe_all.abs().max(1.0));
        for (a, b) in all.iter().zip(&cells) {
            for c in 0..3 {
                assert!((a[c] - b[c]).abs() < 1e-10, "{} vs {}", a[c], b[c]);
            }
        }
    }

    #[test]
    fn overlap_is_rejected() {
        let positions = vec![[1.0, 1.0, 1.0], [1.0, 1.0, 1.0 + 1e-9]];
        let mut forces = Vec::new();
        assert!(matches!(
            lj(2.5).compute(&positions, 10.0, ForceMethod::AllPairs, &mut forces),
            Err(Error::PairOverlap { .. })
        ));
    }

    #[test]
    fn ideal_model_is_force_free() {
        let positions = vec![[0.1, 0.2, 0.3], [0.11, 0.2, 0.3]];
        let mut forces = Vec::new();
        let pe = ForceModel::<f64>::Ideal
            .compute(&positions, 10.0, ForceMethod::Auto, &mut forces)
            .unwrap();
        assert_eq!(pe, 0.0);
        assert!(forces.iter().all(|f| *f == [0.0; 3]));
    }

    #[test]
    fn forces_match_finite_difference_of_total_potential() {
        // Random small configuration; central differences with step 1e-5.
        let box_length = 6.0;
        let mut positions: Vec<[f64; 3]> = Vec::new();
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64)
        };
        'outer: while positions.len() < 12 {
            let cand = [next() * box_length, next() * box_length, next() * box_length];
            for p in &positions {
                let mut r2 = 0.0;
                for c in 0..3 {
                    let mut d: f64 = cand[c] - p[c];
                    d -= box_length * (d / box_length).round();
                    r2 += d * d;
                }
                if r2 < 0.81 {
                    continue 'outer;
                }
            }
            positions.push(cand);
        }

        let model = lj(2.5);
        let mut forces = Vec::new();
        model
            .compute(&positions, box_length, ForceMethod::AllPairs, &mut forces)
            .unwrap();

        let mut scratch = Vec::new();
        let h = 1e-5;
        for i in 0..positions.len() {
            for c in 0..3 {
                let mut plus = positions.clone();
                plus[i][c] += h;
                let mut minus = positions.clone();
                minus[i][c] -= h;
                let up = model
                    .compute(&plus, box_length, ForceMethod::AllPairs, &mut scratch)
                    .unwrap();
                let um = model
                    .compute(&minus, box_length, ForceMethod::AllPairs, &mut scratch)
                    .unwrap();
                let fd = -(up - um) / (2.0 * h);
                assert!(
                    (forces[i][c] - fd).abs() < 1e-6,
                    "particle {i} component {c}: {} vs {}",
                    forces[i][c],
                    fd
                );
            }
        }
    }
}
