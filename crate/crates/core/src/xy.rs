//! Periodic anisotropic XY chain
//! `H0 = -Σ_j (Jx σxσx + Jy σyσy - h σz)` and its fermionized momentum blocks.

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{cos, sin, sqrt};

use crate::analytic::{xy_plus_yx, TwoSpinParams};
use crate::error::{argument, Error, Result};
use crate::operator::{pauli, pauli_string, Axis, ComplexMatrix, HermitianOperator, C64, MAX_SITES};

/// Couplings `(Jx, Jy, h)` and their rates; same layout as the two-spin model.
pub type XyParams = TwoSpinParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// `q = (2k - 1)π/N`: even fermion parity, holds the ground state.
    Antiperiodic,
    /// `q = 2πk/N`, `0 < q < π`; the unpaired modes `q = 0, π` are omitted.
    Periodic,
}

/// Positive half of the antiperiodic momentum grid.
pub fn xy_momentum_grid(n_sites: usize) -> Result<Vec<f64>> {
    xy_momentum_grid_with(n_sites, Boundary::Antiperiodic)
}

pub fn xy_momentum_grid_with(n_sites: usize, boundary: Boundary) -> Result<Vec<f64>> {
    if n_sites < 2 || !n_sites.is_multiple_of(2) {
        return Err(argument("XY chain needs an even number of sites >= 2"));
    }
    let n = n_sites as f64;
    Ok(match boundary {
        Boundary::Antiperiodic => (1..=n_sites / 2).map(|k| (2 * k - 1) as f64 * PI / n).collect(),
        Boundary::Periodic => (1..n_sites / 2).map(|k| 2.0 * k as f64 * PI / n).collect(),
    })
}

/// Pair block of momentum `±q` in the basis `|0⟩, a†_q a†_{-q}|0⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentumBlock {
    pub q: f64,
    pub h_block: HermitianOperator,
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 0.0 && q < PI) {
        return Err(argument("momentum must lie in (0, π)"));
    }
    Ok(())
}

fn block_matrix(q: f64, jx: f64, jy: f64, h: f64) -> HermitianOperator {
    let off = 2.0 * (jx - jy) * sin(q);
    let lower = -4.0 * ((jx + jy) * cos(q) - h) - 2.0 * h;
    let m = ComplexMatrix::from_row_slice(
        2,
        2,
        &[C64::new(-2.0 * h, 0.0), C64::new(0.0, off), C64::new(0.0, -off), C64::new(lower, 0.0)],
    );
    HermitianOperator::new(m).expect("block is Hermitian by construction")
}

pub fn xy_block(q: f64, p: &XyParams) -> Result<MomentumBlock> {
    check_q(q)?;
    Ok(MomentumBlock { q, h_block: block_matrix(q, p.jx, p.jy, p.h) })
}

/// `d/dt` of the pair block (the block is linear in the couplings).
pub fn xy_block_rate(q: f64, p: &XyParams) -> Result<HermitianOperator> {
    check_q(q)?;
    Ok(block_matrix(q, p.djx, p.djy, p.dh))
}

/// Energy of either singly occupied state `a†_{±q}|0⟩`.
pub fn xy_single_occupation_energy(q: f64, p: &XyParams) -> f64 {
    -2.0 * (p.jx + p.jy) * cos(q)
}

/// `J1(q, t)`.
pub fn xy_j1_coupling(q: f64, p: &XyParams) -> Result<f64> {
    check_q(q)?;
    let (c, s) = (cos(q), sin(q));
    let a = (p.jx + p.jy) * c - p.h;
    let d = p.jx - p.jy;
    let den = a * a + d * d * s * s;
    let num = a * (p.djx - p.djy) - d * ((p.djx + p.djy) * c - p.dh);
    if den == 0.0 {
        return Err(Error::Divergence { l: 0, m: 1, gap: 0.0, coupling: num.abs() });
    }
    Ok(num / den)
}

/// Driver of one pair block, `(J1(q,t)/2) sin q · σx`.
pub fn xy_block_cd(q: f64, p: &XyParams) -> Result<HermitianOperator> {
    let j1 = xy_j1_coupling(q, p)?;
    Ok(pauli(Axis::X).scaled(0.5 * j1 * sin(q)))
}

/// Low-momentum coupling
/// `J1(t) = [(Jx + Jy - h)(J̇x - J̇y) - (Jx - Jy)(J̇x + J̇y - ḣ)] / (Jx + Jy - h)²`.
pub fn xy_j1_lowlying(p: &XyParams) -> Result<f64> {
    let a = p.jx + p.jy - p.h;
    let scale = p.jx.abs().max(p.jy.abs()).max(p.h.abs()).max(1.0);
    let num = a * (p.djx - p.djy) - (p.jx - p.jy) * (p.djx + p.djy - p.dh);
    if a.abs() < 1e-8 * scale {
        return Err(Error::Divergence { l: 0, m: 1, gap: a.abs(), coupling: num.abs() });
    }
    Ok(num / (a * a))
}

fn check_sites(n_sites: usize) -> Result<()> {
    if n_sites < 2 {
        return Err(argument("XY chain needs at least two sites"));
    }
    if n_sites > MAX_SITES {
        return Err(Error::Capacity { dim: 1 << n_sites.min(63), max: 1 << MAX_SITES });
    }
    Ok(())
}

fn chain(jx: f64, jy: f64, h: f64, n: usize) -> Result<HermitianOperator> {
    check_sites(n)?;
    let mut out = HermitianOperator::zeros(1 << n);
    for j in 0..n {
        let k = (j + 1) % n;
        if jx != 0.0 {
            out.add_scaled(-jx, &pauli_string(&[(j, Axis::X), (k, Axis::X)], n)?)?;
        }
        if jy != 0.0 {
            out.add_scaled(-jy, &pauli_string(&[(j, Axis::Y), (k, Axis::Y)], n)?)?;
        }
        if h != 0.0 {
            out.add_scaled(h, &pauli_string(&[(j, Axis::Z)], n)?)?;
        }
    }
    Ok(out)
}

/// Full `2^N`-dimensional chain Hamiltonian with periodic closure.
pub fn xy_hamiltonian(p: &XyParams, n_sites: usize) -> Result<HermitianOperator> {
    chain(p.jx, p.jy, p.h, n_sites)
}

pub fn xy_rate(p: &XyParams, n_sites: usize) -> Result<HermitianOperator> {
    chain(p.djx, p.djy, p.dh, n_sites)
}

/// `(J1(t)/8) Σ_j (σxσy + σyσx)` on nearest neighbours with periodic closure.
pub fn xy_lowlying_driver(p: &XyParams, n_sites: usize) -> Result<HermitianOperator> {
    check_sites(n_sites)?;
    let j1 = xy_j1_lowlying(p)?;
    let mut out = HermitianOperator::zeros(1 << n_sites);
    if j1 == 0.0 {
        return Ok(out);
    }
    for j in 0..n_sites {
        out.add_scaled(j1 / 8.0, &xy_plus_yx(n_sites, j, (j + 1) % n_sites)?)?;
    }
    Ok(out)
}

/// Even-parity many-body spectrum assembled from the antiperiodic blocks:
/// each momentum pair is empty-or-paired (block eigenvalues) or singly
/// occupied, with an even number of singly occupied pairs. Ascending.
pub fn xy_even_parity_spectrum(p: &XyParams, n_sites: usize) -> Result<Vec<f64>> {
    check_sites(n_sites)?;
    let grid = xy_momentum_grid(n_sites)?;
    // (energy, odd) options per momentum pair.
    let options: Vec<[(f64, bool); 4]> = grid
        .iter()
        .map(|&q| {
            let b = block_matrix(q, p.jx, p.jy, p.h);
            let m = b.matrix();
            let (a, d) = (m[(0, 0)].re, m[(1, 1)].re);
            let r = sqrt(0.25 * (a - d) * (a - d) + m[(0, 1)].norm_sqr());
            let s = xy_single_occupation_energy(q, p);
            [(0.5 * (a + d) - r, false), (0.5 * (a + d) + r, false), (s, true), (s, true)]
        })
        .collect();
    let mut levels = Vec::with_capacity(1 << (n_sites - 1));
    let total = 1usize << (2 * grid.len());
    for code in 0..total {
        let (mut e, mut odd) = (0.0, false);
        for (k, opts) in options.iter().enumerate() {
            let (ek, ok) = opts[(code >> (2 * k)) & 3];
            e += ek;
            odd ^= ok;
        }
        if !odd {
            levels.push(e);
        }
    }
    levels.sort_by(f64::total_cmp);
    Ok(levels)
}

/// Indices of computational basis states with an even number of up spins
/// (even fermion number).
pub fn even_parity_indices(n_sites: usize) -> Vec<usize> {
    // Bit 0 of a site means spin up.
    (0..1usize << n_sites).filter(|i| (n_sites - i.count_ones() as usize).is_multiple_of(2)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::cd_term_matrix_elements;
    use crate::operator::eigh_sorted;
    use proptest::prelude::*;

    fn p(jx: f64, jy: f64, h: f64, djx: f64, djy: f64, dh: f64) -> XyParams {
        XyParams::new(jx, jy, h, djx, djy, dh)
    }

    #[test]
    fn grids() {
        let g = xy_momentum_grid(4).unwrap();
        assert!((g[0] - PI / 4.0).abs() < 1e-15 && (g[1] - 3.0 * PI / 4.0).abs() < 1e-15);
        assert_eq!(xy_momentum_grid(2).unwrap(), alloc::vec![PI / 2.0]);
        assert!(xy_momentum_grid(5).is_err());
        for q in xy_momentum_grid(14).unwrap() {
            assert!(q > 0.0 && q < PI);
        }
        assert_eq!(xy_momentum_grid_with(6, Boundary::Periodic).unwrap().len(), 2);
    }

    #[test]
    fn block_entries() {
        let b = xy_block(PI / 2.0, &p(1.5, 0.5, 0.0, 0.0, 0.0, 0.0)).unwrap();
        let m = b.h_block.matrix();
        assert!(m[(0, 0)].norm() < 1e-15 && m[(1, 1)].norm() < 1e-15);
        assert!((m[(0, 1)] - C64::new(0.0, 2.0)).norm() < 1e-15);
        let iso = xy_block(0.7, &p(0.8, 0.8, 0.3, 0.0, 0.0, 0.0)).unwrap();
        assert_eq!(iso.h_block.matrix()[(0, 1)], C64::new(0.0, 0.0));
        assert!(xy_block(0.0, &p(1.0, 0.0, 0.0, 0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn j1_examples() {
        let j1 = xy_j1_coupling(PI / 2.0, &p(1.0, 0.0, 0.0, 0.0, 0.0, 1.0)).unwrap();
        assert!((j1 - 1.0).abs() < 1e-15);
        assert!(xy_j1_lowlying(&p(1.0, 0.5, 1.5, 1.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn lowlying_driver_two_sites() {
        // J1 = 1: Jx = 1, Jy = 0, h = 0, ḣ = 1.
        let q = p(1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        assert_eq!(xy_j1_lowlying(&q).unwrap(), 1.0);
        let d = xy_lowlying_driver(&q, 2).unwrap();
        let want = xy_plus_yx(2, 0, 1).unwrap().scaled(2.0 / 8.0);
        assert!((d.matrix() - want.matrix()).norm() < 1e-15);
    }

    fn sector_spectrum(h: &HermitianOperator, idx: &[usize]) -> Vec<f64> {
        let sub = ComplexMatrix::from_fn(idx.len(), idx.len(), |i, j| h.matrix()[(idx[i], idx[j])]);
        eigh_sorted(&HermitianOperator::new(sub).unwrap()).unwrap().eigenvalues
    }

    #[test]
    fn fermion_spectrum_matches_brute_force() {
        let q = p(0.9, 0.35, 0.6, 0.0, 0.0, 0.0);
        for n in [2usize, 4, 6] {
            let brute = sector_spectrum(&xy_hamiltonian(&q, n).unwrap(), &even_parity_indices(n));
            let blocks = xy_even_parity_spectrum(&q, n).unwrap();
            assert_eq!(brute.len(), blocks.len());
            let dist = brute.iter().zip(&blocks).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(dist < 1e-9, "N={n}: {dist}");
        }
    }

    proptest! {
        #[test]
        fn block_driver_matches_engine(
            v in prop::array::uniform6(-2.0f64..2.0),
            q in 0.05f64..3.09,
        ) {
            let pp = p(v[0], v[1], v[2], v[3], v[4], v[5]);
            let b = xy_block(q, &pp).unwrap();
            let e = eigh_sorted(&b.h_block).unwrap();
            prop_assume!(e.eigenvalues[1] - e.eigenvalues[0] > 1e-3);
            let engine = cd_term_matrix_elements(&b.h_block, &xy_block_rate(q, &pp).unwrap()).unwrap();
            let exact = xy_block_cd(q, &pp).unwrap();
            let scale = 1.0 + xy_block_rate(q, &pp).unwrap().frobenius_norm();
            prop_assert!((engine.matrix() - exact.matrix()).norm() < 1e-8 * scale);
        }

        #[test]
        fn fixed_point_kills_lowlying_coupling(
            c in -3.0f64..3.0,
            jx in 0.1f64..3.0, jy in 0.1f64..3.0,
            djx in -3.0f64..3.0, djy in -3.0f64..3.0,
        ) {
            // c = 0 puts the protocol on the critical line h = Jx + Jy.
            prop_assume!((c * (jx - jy)).abs() > 0.05);
            let h = jx + jy + c * (jx - jy);
            let dh = djx + djy + c * (djx - djy);
            let j1 = xy_j1_lowlying(&p(jx, jy, h, djx, djy, dh)).unwrap();
            prop_assert!(j1.abs() < 1e-10);
        }
    }
}
