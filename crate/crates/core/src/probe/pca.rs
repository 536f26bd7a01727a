use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::dataset::FeatureDataset;
use crate::error::{Error, Result};

/// Principal components from the eigendecomposition of the sample covariance.
///
/// Components are sorted by decreasing variance and each is signed so that its
/// largest-magnitude coordinate (lowest index on ties) is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Pca {
    pub mean: DVector<f64>,
    /// `target_dim x D`, one orthonormal component per row.
    pub components: DMatrix<f64>,
    pub explained_variance: Vec<f64>,
    pub explained_ratio: Vec<f64>,
}

impl Pca {
    pub fn fit(x: &DMatrix<f64>, target_dim: usize) -> Result<Pca> {
        let (n, d) = x.shape();
        if n < 2 {
            return Err(Error::DegenerateData(format!(
                "PCA needs at least 2 samples, got {n}"
            )));
        }
        if target_dim == 0 || target_dim > n.min(d) {
            return Err(Error::InvalidArgument(format!(
                "target_dim {target_dim} must lie in 1..={}",
                n.min(d)
            )));
        }
        let mean = x.row_mean().transpose();
        let mut centered = x.clone();
        for mut row in centered.row_iter_mut() {
            row -= mean.transpose();
        }
        let cov = centered.tr_mul(&centered) / (n - 1) as f64;
        let eig = SymmetricEigen::new(cov);

        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[b]
                .total_cmp(&eig.eigenvalues[a])
                .then(a.cmp(&b))
        });
        let total: f64 = eig.eigenvalues.iter().map(|v| v.max(0.0)).sum();
        let top = eig.eigenvalues[order[0]].max(0.0);
        let last = eig.eigenvalues[order[target_dim - 1]];
        if top <= 0.0 || last <= 1e-12 * top {
            return Err(Error::DegenerateData(format!(
                "data rank is below {target_dim} (component {target_dim} variance {last:e})"
            )));
        }

        let mut components = DMatrix::zeros(target_dim, d);
        let mut explained_variance = Vec::with_capacity(target_dim);
        for (row, &idx) in order.iter().take(target_dim).enumerate() {
            let mut v = eig.eigenvectors.column(idx).into_owned();
            let pivot =
                v.iter().enumerate().fold(
                    0,
                    |best, (i, x)| if x.abs() > v[best].abs() { i } else { best },
                );
            if v[pivot] < 0.0 {
                v.neg_mut();
            }
            components.set_row(row, &v.transpose());
            explained_variance.push(eig.eigenvalues[idx]);
        }
        let explained_ratio = explained_variance.iter().map(|v| v / total).collect();
        Ok(Pca {
            mean,
            components,
            explained_variance,
            explained_ratio,
        })
    }

    /// Projects rows of `x` onto the components.
    pub fn transform(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut centered = x.clone();
        for mut row in centered.row_iter_mut() {
            row -= self.mean.transpose();
        }
        centered * self.components.transpose()
    }

    pub fn inverse_transform(&self, projected: &DMatrix<f64>) -> DMatrix<f64> {
        let mut x = projected * &self.components;
        for mut row in x.row_iter_mut() {
            row += self.mean.transpose();
        }
        x
    }
}

/// Fits PCA on `ds` and returns the projected dataset with the fitted model.
pub fn pca_reduce(ds: &FeatureDataset, target_dim: usize) -> Result<(FeatureDataset, Pca)> {
    let pca = Pca::fit(&ds.features, target_dim)?;
    let projected = pca.transform(&ds.features);
    Ok((
        FeatureDataset::new(projected, ds.labels.clone(), ds.provenance)?,
        pca,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, d: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(n, d, |_, _| rng.random::<f64>() * 2.0 - 1.0)
    }

    #[test]
    fn full_rank_rotation_reconstructs() {
        let x = random_matrix(20, 6, 1);
        let pca = Pca::fit(&x, 6).unwrap();
        let back = pca.inverse_transform(&pca.transform(&x));
        assert!((back - &x).abs().max() < 1e-8);
        let gram = &pca.components * pca.components.transpose();
        assert!((gram - DMatrix::identity(6, 6)).abs().max() < 1e-10);
        assert!((pca.explained_ratio.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn line_in_3d() {
        let x = DMatrix::from_fn(30, 3, |i, j| {
            (i as f64 - 7.0) * [1.0, -2.0, 0.5][j] + [3.0, 1.0, -1.0][j]
        });
        let pca = Pca::fit(&x, 1).unwrap();
        assert!(pca.explained_ratio[0] >= 1.0 - 1e-10);
        // sign rule: largest coordinate (-2 direction) flipped positive
        assert!(pca.components[(0, 1)] > 0.0);
        assert!(matches!(Pca::fit(&x, 2), Err(Error::DegenerateData(_))));
    }

    #[test]
    fn argument_checks() {
        let x = random_matrix(4, 3, 2);
        assert!(Pca::fit(&x, 4).is_err());
        assert!(Pca::fit(&x, 0).is_err());
        assert!(Pca::fit(&random_matrix(1, 3, 2), 1).is_err());
    }

    #[test]
    fn variances_are_sorted() {
        let pca = Pca::fit(&random_matrix(50, 8, 3), 5).unwrap();
        assert!(pca.explained_variance.windows(2).all(|w| w[0] >= w[1]));
    }
}
