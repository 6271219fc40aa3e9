//! Symmetric quadrature covariance matrices and their time series.

use nalgebra::{DMatrix, SMatrix, SymmetricEigen};

/// Symmetrized second moments in the quadrature ordering
/// `(X_1, Y_1, X_2, Y_2, ...)`, stamped with a time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix<const N: usize> {
    pub t: f64,
    pub entries: SMatrix<f64, N, N>,
}

pub type Cm4 = CovarianceMatrix<4>;
pub type Cm6 = CovarianceMatrix<6>;

impl<const N: usize> CovarianceMatrix<N> {
    pub fn new(t: f64, entries: SMatrix<f64, N, N>) -> Self {
        Self { t, entries }
    }

    /// Vacuum state `I / 2`.
    pub fn vacuum() -> Self {
        Self::new(0.0, SMatrix::identity() * 0.5)
    }

    pub fn dim(&self) -> usize {
        N
    }

    /// Largest `|V_ij - V_ji|`.
    pub fn asymmetry(&self) -> f64 {
        (self.entries - self.entries.transpose()).abs().max()
    }

    /// Symplectic eigenvalues, ascending. Computed as the singular values of
    /// `V^{1/2} Omega V^{1/2}`, which appear in degenerate pairs.
    pub fn symplectic_eigenvalues(&self) -> Vec<f64> {
        let sym = DMatrix::from_column_slice(N, N, self.entries.as_slice());
        let sym = (&sym + sym.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        let sqrt_vals = eig.eigenvalues.map(|x| x.max(0.0).sqrt());
        let root =
            &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals) * eig.eigenvectors.transpose();
        let omega = DMatrix::from_column_slice(N, N, symplectic_form::<N>().as_slice());
        let s = &root * omega * &root;
        let mut nu: Vec<f64> = SymmetricEigen::new(s.transpose() * s)
            .eigenvalues
            .iter()
            .map(|x| x.max(0.0).sqrt())
            .collect();
        nu.sort_by(f64::total_cmp);
        nu.into_iter().step_by(2).collect()
    }

    pub fn min_symplectic_eigenvalue(&self) -> f64 {
        self.symplectic_eigenvalues()
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// Uncertainty-principle check `nu_min >= 1/2 - tol`.
    pub fn is_physical(&self, tol: f64) -> bool {
        self.asymmetry() <= 1e-8 * self.entries.abs().max().max(1.0)
            && self.min_symplectic_eigenvalue() >= 0.5 - tol
    }
}

/// Block-diagonal `Omega = diag([[0, 1], [-1, 0]], ...)`.
pub fn symplectic_form<const N: usize>() -> SMatrix<f64, N, N> {
    let mut omega = SMatrix::<f64, N, N>::zeros();
    for k in (0..N).step_by(2) {
        omega[(k, k + 1)] = 1.0;
        omega[(k + 1, k)] = -1.0;
    }
    omega
}

/// Append-only time series of covariance matrices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CovarianceTrajectory<const N: usize> {
    points: Vec<CovarianceMatrix<N>>,
}

impl<const N: usize> CovarianceTrajectory<N> {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            points: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, cm: CovarianceMatrix<N>) {
        self.points.push(cm);
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[CovarianceMatrix<N>] {
        &self.points
    }

    pub fn last(&self) -> Option<&CovarianceMatrix<N>> {
        self.points.last()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, CovarianceMatrix<N>> {
        self.points.iter()
    }
}

impl<const N: usize> std::ops::Index<usize> for CovarianceTrajectory<N> {
    type Output = CovarianceMatrix<N>;
    fn index(&self, i: usize) -> &Self::Output {
        &self.points[i]
    }
}

impl<'a, const N: usize> IntoIterator for &'a CovarianceTrajectory<N> {
    type Item = &'a CovarianceMatrix<N>;
    type IntoIter = std::slice::Iter<'a, CovarianceMatrix<N>>;
    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix4;

    fn tmsv(r: f64) -> Cm4 {
        // two-mode squeezed vacuum in (X_a, Y_a, X_c, Y_c) ordering
        let (c, s) = ((2.0 * r).cosh() / 2.0, (2.0 * r).sinh() / 2.0);
        #[rustfmt::skip]
        let v = Matrix4::new(
            c, 0.0, s, 0.0,
            0.0, c, 0.0, -s,
            s, 0.0, c, 0.0,
            0.0, -s, 0.0, c,
        );
        Cm4::new(0.0, v)
    }

    #[test]
    fn vacuum_is_minimal() {
        let nu = Cm4::vacuum().symplectic_eigenvalues();
        assert_eq!(nu.len(), 2);
        assert!(nu.iter().all(|x| (x - 0.5).abs() < 1e-14));
    }

    #[test]
    fn squeezed_vacuum_is_pure() {
        for r in [0.1, 0.8, 2.0] {
            let nu = tmsv(r).symplectic_eigenvalues();
            assert!(nu.iter().all(|x| (x - 0.5).abs() < 1e-9), "{nu:?}");
        }
    }

    #[test]
    fn thermal_state_eigenvalues() {
        let v = Cm6::new(
            0.0,
            SMatrix::<f64, 6, 6>::from_diagonal(&nalgebra::Vector6::new(
                0.5, 0.5, 10.5, 10.5, 1.5, 1.5,
            )),
        );
        let nu = v.symplectic_eigenvalues();
        assert!(
            (nu[0] - 0.5).abs() < 1e-12
                && (nu[1] - 1.5).abs() < 1e-12
                && (nu[2] - 10.5).abs() < 1e-12
        );
    }

    #[test]
    fn sub_vacuum_state_is_unphysical() {
        let mut v = tmsv(0.5);
        v.entries[(0, 0)] -= 0.2;
        v.entries[(1, 1)] -= 0.2;
        assert!(!v.is_physical(1e-6));
        assert!(tmsv(0.5).is_physical(1e-6));
    }
}
