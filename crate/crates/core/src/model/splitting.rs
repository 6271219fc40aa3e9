//! Numerical extraction of `g_eff` and `delta` from the anticrossing of the
//! full three-mode transition matrix.
//!
//! Close to `Delta_a = -Delta_c` the optical and microwave eigenvalues of `M`
//! coalesce in frequency and split in growth rate. In the imaginary parts of
//! the normalized eigenvalues of `L = -i M` the two relevant branches reach
//! `+g_eff` and `-g_eff`, so the reported coupling is half the extremal
//! branch separation. The reported shift is the location of that window,
//! measured from `-Delta_c`.

use nalgebra::{Complex, SMatrix, SVector};
use num_complex::Complex64;
use rayon::prelude::*;

use super::{spectrum, transition_matrix, SystemParams, TILDE_OMEGA_B};
use crate::error::{Error, Result};

type CMatrix6 = SMatrix<Complex64, 6, 6>;
pub type CVector6 = SVector<Complex64, 6>;

/// Separations below this are treated as numerically zero.
const SPLIT_FLOOR: f64 = 1e-9;

/// Result of a detuning scan.
#[derive(Debug, Clone, PartialEq)]
pub struct SplittingScan {
    pub delta_a: Vec<f64>,
    /// Imaginary parts of the two tracked eigenvalues of `L / w`, per grid point.
    pub branches: Vec<[f64; 2]>,
    /// Half the maximal branch separation.
    pub g_eff_num: f64,
    /// Centre of the splitting window relative to `-Delta_c`.
    pub delta_num: f64,
}

/// Default scan: 400 points over `-Delta_c +- 0.1`.
pub fn scan_grid(delta_c: f64, points: usize, half_width: f64) -> Vec<f64> {
    let lo = -delta_c - half_width;
    let step = 2.0 * half_width / (points - 1) as f64;
    (0..points).map(|i| lo + step * i as f64).collect()
}

struct Eigenpair {
    value: Complex64,
    vector: CVector6,
}

/// The two positive-frequency optical/microwave eigenpairs of `M`.
pub fn relevant_branches(
    params: &SystemParams,
    delta_a: f64,
) -> Result<[(Complex64, CVector6); 2]> {
    Ok(relevant_pairs(params, delta_a)?.map(|p| (p.value, p.vector)))
}

fn relevant_pairs(params: &SystemParams, delta_a: f64) -> Result<[Eigenpair; 2]> {
    let m = transition_matrix(params, delta_a);
    let mut eig: Vec<Complex64> = spectrum(&m)?.into_iter().filter(|z| z.im > 0.0).collect();
    if eig.len() < 2 {
        return Err(Error::UnresolvedBranches(format!(
            "fewer than two oscillating branches at delta_a = {delta_a}"
        )));
    }
    // The mechanical pair sits near +-w; the photonic pairs near +-Delta_c.
    eig.sort_by(|a, b| b.im.total_cmp(&a.im));
    let mc: CMatrix6 = m.map(|x| Complex::new(x, 0.0));
    let take = |z: Complex64| Eigenpair {
        value: z,
        vector: eigenvector(&mc, z),
    };
    Ok([take(eig[0]), take(eig[1])])
}

/// Inverse iteration with a slightly shifted eigenvalue.
fn eigenvector(m: &CMatrix6, lambda: Complex64) -> CVector6 {
    let scale = m.norm().max(1.0);
    let shift = lambda + Complex64::new(1e-10 * scale, 1e-10 * scale);
    let a = m - CMatrix6::identity() * shift;
    let lu = a.lu();
    let mut v =
        CVector6::from_fn(|i, _| Complex64::new(1.0 + i as f64 * 0.1, 0.3 - 0.05 * i as f64));
    v /= Complex64::new(v.norm(), 0.0);
    for _ in 0..3 {
        match lu.solve(&v) {
            Some(w) if w.norm().is_finite() && w.norm() > 0.0 => {
                v = w / Complex64::new(w.norm(), 0.0);
            }
            _ => break,
        }
    }
    v
}

fn overlap(a: &CVector6, b: &CVector6) -> f64 {
    a.dotc(b).norm()
}

/// Scan `M` over `delta_a_grid`, track the two photonic branches by maximal
/// eigenvector overlap between neighbouring points, and extract the numerical
/// coupling and shift.
pub fn eigen_splitting(params: &SystemParams, delta_a_grid: &[f64]) -> Result<SplittingScan> {
    params.validate()?;
    if delta_a_grid.len() < 3 {
        return Err(Error::UnresolvedBranches(
            "need at least three grid points".into(),
        ));
    }
    if delta_a_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::UnresolvedBranches(
            "grid must be strictly increasing".into(),
        ));
    }

    let raw: Vec<[Eigenpair; 2]> = delta_a_grid
        .par_iter()
        .map(|&da| relevant_pairs(params, da))
        .collect::<Result<_>>()?;

    let mut branches = Vec::with_capacity(raw.len());
    let mut prev: Option<[CVector6; 2]> = None;
    for pair in &raw {
        let order = match &prev {
            None => [0, 1],
            Some(pv) => {
                let keep = overlap(&pv[0], &pair[0].vector) + overlap(&pv[1], &pair[1].vector);
                let swap = overlap(&pv[0], &pair[1].vector) + overlap(&pv[1], &pair[0].vector);
                if swap > keep {
                    [1, 0]
                } else {
                    [0, 1]
                }
            }
        };
        // Im(eig L) = -Re(eig M), normalized by w.
        branches.push(order.map(|k| -pair[k].value.re / TILDE_OMEGA_B));
        prev = Some(order.map(|k| pair[k].vector));
    }

    let separation: Vec<f64> = branches.iter().map(|b| (b[0] - b[1]).abs()).collect();
    let max_sep = separation.iter().cloned().fold(0.0, f64::max);

    let (g_eff_num, centre) = if max_sep > SPLIT_FLOOR {
        let active: Vec<usize> = (0..separation.len())
            .filter(|&i| separation[i] > SPLIT_FLOOR)
            .collect();
        if active.len() < 3 {
            return Err(Error::UnresolvedBranches(format!(
                "splitting window covers {} grid point(s); use a finer grid",
                active.len()
            )));
        }
        if active[0] == 0 || *active.last().unwrap() == separation.len() - 1 {
            return Err(Error::UnresolvedBranches(
                "splitting window touches the grid edge; widen the scan".into(),
            ));
        }
        let weight: f64 = active.iter().map(|&i| separation[i]).sum();
        let centre = active
            .iter()
            .map(|&i| separation[i] * delta_a_grid[i])
            .sum::<f64>()
            / weight;
        (0.5 * max_sep, centre)
    } else {
        (0.0, frequency_crossing(&raw, delta_a_grid)?)
    };

    Ok(SplittingScan {
        delta_a: delta_a_grid.to_vec(),
        branches,
        g_eff_num,
        delta_num: centre + params.delta_c,
    })
}

/// Without coupling the branches only cross in frequency; locate the sign
/// change of the frequency difference by linear interpolation.
fn frequency_crossing(raw: &[[Eigenpair; 2]], grid: &[f64]) -> Result<f64> {
    // Identify each branch by its weight on the optical quadratures.
    let diff: Vec<f64> = raw
        .iter()
        .map(|pair| {
            let optical = |v: &CVector6| v[0].norm_sqr() + v[1].norm_sqr();
            let (a, c) = if optical(&pair[0].vector) >= optical(&pair[1].vector) {
                (&pair[0], &pair[1])
            } else {
                (&pair[1], &pair[0])
            };
            a.value.im - c.value.im
        })
        .collect();
    for i in 0..diff.len() - 1 {
        let (d0, d1) = (diff[i], diff[i + 1]);
        if d0 == 0.0 {
            return Ok(grid[i]);
        }
        if d0.signum() != d1.signum() {
            return Ok(grid[i] + (grid[i + 1] - grid[i]) * d0 / (d0 - d1));
        }
    }
    Err(Error::UnresolvedBranches(
        "branches do not cross inside the grid".into(),
    ))
}
