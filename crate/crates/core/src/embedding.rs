//! Joint 2D PCA of original and synthesized feature frames.

use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::spectral::{format_sig9, FeatureTimeSeries};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `n_components` orthonormal rows of length `dims`.
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
    /// Set when the data had zero covariance and canonical axes were used.
    pub degenerate: bool,
}

impl PcaModel {
    pub fn dims(&self) -> usize {
        self.mean.len()
    }

    pub fn project_frame(&self, frame: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| {
                c.iter()
                    .zip(frame)
                    .zip(&self.mean)
                    .map(|((w, x), m)| w * (x - m))
                    .sum()
            })
            .collect()
    }
}

fn check_frames(frames: &[Vec<f64>]) -> Result<usize> {
    let dims = frames.first().map(Vec::len).ok_or(Error::EmptyEmbedding)?;
    if let Some(bad) = frames.iter().find(|f| f.len() != dims) {
        return Err(Error::ShapeMismatch {
            expected: dims,
            actual: bad.len(),
        });
    }
    Ok(dims)
}

/// Sample covariance (divisor `M - 1`) of row vectors `frames`.
pub fn covariance(frames: &[Vec<f64>]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let dims = check_frames(frames)?;
    let m = frames.len() as f64;
    let mut mean = vec![0.0; dims];
    for f in frames {
        for (acc, x) in mean.iter_mut().zip(f) {
            *acc += x;
        }
    }
    mean.iter_mut().for_each(|v| *v /= m);
    let mut cov = DMatrix::zeros(dims, dims);
    for f in frames {
        for i in 0..dims {
            let di = f[i] - mean[i];
            for j in i..dims {
                cov[(i, j)] += di * (f[j] - mean[j]);
            }
        }
    }
    for i in 0..dims {
        for j in i..dims {
            let v = cov[(i, j)] / (m - 1.0);
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    Ok((mean, cov))
}

/// PCA on row vectors `frames` (one frame per entry).
pub fn fit_pca(frames: &[Vec<f64>], n_components: usize) -> Result<PcaModel> {
    let dims = check_frames(frames)?;
    if frames.len() < 2 {
        return Err(Error::EmptyEmbedding);
    }
    if n_components == 0 || dims < n_components {
        return Err(Error::InvalidConfig(format!(
            "{n_components} components requested from {dims}-dimensional data"
        )));
    }
    let (mean, cov) = covariance(frames)?;
    let total: f64 = cov.diagonal().iter().sum();
    if !(total > 0.0) {
        let components = (0..n_components)
            .map(|c| (0..dims).map(|d| if d == c { 1.0 } else { 0.0 }).collect())
            .collect();
        return Ok(PcaModel {
            mean,
            components,
            explained_variance: vec![0.0; n_components],
            explained_variance_ratio: vec![0.0; n_components],
            degenerate: true,
        });
    }

    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..dims).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    let mut components = Vec::with_capacity(n_components);
    let mut variance = Vec::with_capacity(n_components);
    for &idx in order.iter().take(n_components) {
        let mut v: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
        let pivot = v
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |(bi, bv), (i, &x)| {
                if x.abs() > bv.abs() {
                    (i, x)
                } else {
                    (bi, bv)
                }
            })
            .0;
        if v[pivot] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        components.push(v);
        variance.push(eig.eigenvalues[idx].max(0.0));
    }
    Ok(PcaModel {
        mean,
        components,
        explained_variance_ratio: variance.iter().map(|v| v / total).collect(),
        explained_variance: variance,
        degenerate: false,
    })
}

/// `(frames - mean) * components^T`.
pub fn project(model: &PcaModel, frames: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if let Some(bad) = frames.iter().find(|f| f.len() != model.dims()) {
        return Err(Error::ShapeMismatch {
            expected: model.dims(),
            actual: bad.len(),
        });
    }
    Ok(frames.iter().map(|f| model.project_frame(f)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedEmbedding {
    pub original_points: Vec<[f64; 2]>,
    pub synthesized_points: Vec<[f64; 2]>,
    /// `(i, i)` for every frame index both streams share.
    pub pairs: Vec<(usize, usize)>,
}

impl PairedEmbedding {
    /// Mean Euclidean distance between paired points.
    pub fn mean_displacement(&self) -> f64 {
        if self.pairs.is_empty() {
            return 0.0;
        }
        let total: f64 = self
            .pairs
            .iter()
            .map(|&(i, j)| {
                let (a, b) = (self.original_points[i], self.synthesized_points[j]);
                ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
            })
            .sum();
        total / self.pairs.len() as f64
    }

    /// CSV `frame,source,pc1,pc2`, original rows first.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "frame,source,pc1,pc2")?;
        for (source, points) in [
            ("original", &self.original_points),
            ("synthesized", &self.synthesized_points),
        ] {
            for (i, p) in points.iter().enumerate() {
                writeln!(
                    out,
                    "{i},{source},{},{}",
                    format_sig9(p[0]),
                    format_sig9(p[1])
                )?;
            }
        }
        Ok(())
    }
}

/// Frame vectors of a feature series (one `dims`-vector per frame).
pub fn series_frames(series: &FeatureTimeSeries) -> Vec<Vec<f64>> {
    series.values.iter_frames().map(<[f64]>::to_vec).collect()
}

/// Fits one PCA on both frame sets and projects each into it.
pub fn joint_embedding(
    original: &[Vec<f64>],
    synthesized: &[Vec<f64>],
) -> Result<(PcaModel, PairedEmbedding)> {
    let joint: Vec<Vec<f64>> = original.iter().chain(synthesized).cloned().collect();
    let model = fit_pca(&joint, 2)?;
    let to_points = |frames: &[Vec<f64>]| -> Result<Vec<[f64; 2]>> {
        Ok(project(&model, frames)?
            .into_iter()
            .map(|p| [p[0], p[1]])
            .collect())
    };
    let original_points = to_points(original)?;
    let synthesized_points = to_points(synthesized)?;
    let pairs = (0..original.len().min(synthesized.len()))
        .map(|i| (i, i))
        .collect();
    Ok((
        model,
        PairedEmbedding {
            original_points,
            synthesized_points,
            pairs,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_frames(seed: u64, dims: usize, count: usize) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| (0..dims).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect()
    }

    #[test]
    fn diagonal_covariance() {
        // Points (+-2, 0) and (0, +-1): covariance diag(8/3, 2/3) up to scale.
        let frames = vec![
            vec![2.0, 0.0],
            vec![-2.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, -1.0],
        ];
        let model = fit_pca(&frames, 2).unwrap();
        assert!((model.explained_variance[0] - 8.0 / 3.0).abs() < 1e-12);
        assert!((model.explained_variance[1] - 2.0 / 3.0).abs() < 1e-12);
        assert!((model.components[0][0] - 1.0).abs() < 1e-12);
        assert!(model.components[1][1] > 0.999_999);
    }

    #[test]
    fn constant_data_is_degenerate() {
        let frames = vec![vec![3.0; 13]; 10];
        let model = fit_pca(&frames, 2).unwrap();
        assert!(model.degenerate);
        assert_eq!(model.explained_variance, vec![0.0, 0.0]);
        assert_eq!(model.components[0][0], 1.0);
        assert_eq!(model.components[1][1], 1.0);
    }

    #[test]
    fn projection_identities() {
        let frames = random_frames(3, 13, 200);
        let model = fit_pca(&frames, 2).unwrap();
        let origin = model.project_frame(&model.mean);
        assert!(origin.iter().all(|v| v.abs() < 1e-12));
        let shifted: Vec<f64> = model
            .mean
            .iter()
            .zip(&model.components[0])
            .map(|(m, c)| m + c)
            .collect();
        let p = model.project_frame(&shifted);
        assert!((p[0] - 1.0).abs() < 1e-12 && p[1].abs() < 1e-12);
        for i in 0..2 {
            for j in 0..2 {
                let dot: f64 = model.components[i]
                    .iter()
                    .zip(&model.components[j])
                    .map(|(a, b)| a * b)
                    .sum();
                assert!((dot - if i == j { 1.0 } else { 0.0 }).abs() < 1e-9);
            }
        }
        let points = project(&model, &frames).unwrap();
        for c in 0..2 {
            let mean: f64 = points.iter().map(|p| p[c]).sum::<f64>() / 200.0;
            assert!(mean.abs() < 1e-9);
            let var: f64 = points.iter().map(|p| p[c] * p[c]).sum::<f64>() / 199.0;
            assert!((var - model.explained_variance[c]).abs() < 1e-8);
        }
    }

    #[test]
    fn rank_two_reconstruction_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let u: Vec<f64> = (0..13).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..13).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let frames: Vec<Vec<f64>> = (0..50)
            .map(|_| {
                let (a, b) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
                u.iter().zip(&v).map(|(x, y)| a * x + b * y + 0.5).collect()
            })
            .collect();
        let model = fit_pca(&frames, 2).unwrap();
        for (f, p) in frames.iter().zip(project(&model, &frames).unwrap()) {
            for (d, x) in f.iter().enumerate() {
                let r =
                    model.mean[d] + p[0] * model.components[0][d] + p[1] * model.components[1][d];
                assert!((r - x).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn joint_translation_equivariance() {
        let orig = random_frames(5, 13, 60);
        let same = joint_embedding(&orig, &orig).unwrap().1;
        assert_eq!(same.mean_displacement(), 0.0);

        let c: Vec<f64> = (0..13).map(|d| 0.1 * d as f64 - 0.4).collect();
        let moved: Vec<Vec<f64>> = orig
            .iter()
            .map(|f| f.iter().zip(&c).map(|(x, y)| x + y).collect())
            .collect();
        let (model, emb) = joint_embedding(&orig, &moved).unwrap();
        let expect: Vec<f64> = model
            .components
            .iter()
            .map(|comp| comp.iter().zip(&c).map(|(a, b)| a * b).sum())
            .collect();
        for &(i, j) in &emb.pairs {
            for (k, e) in expect.iter().enumerate() {
                let d = emb.synthesized_points[j][k] - emb.original_points[i][k];
                assert!((d - e).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn pairs_truncate_and_csv_layout() {
        let (_, emb) = joint_embedding(&random_frames(1, 3, 4), &random_frames(2, 3, 3)).unwrap();
        assert_eq!(emb.pairs, vec![(0, 0), (1, 1), (2, 2)]);
        let mut out = Vec::new();
        emb.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("frame,source,pc1,pc2\n0,original,"));
        assert_eq!(text.lines().count(), 8);
        assert!(text.lines().nth(5).unwrap().starts_with("0,synthesized,"));
    }

    #[test]
    fn deterministic_fit() {
        let frames = random_frames(9, 13, 200);
        let a = fit_pca(&frames, 2).unwrap();
        let b = fit_pca(&frames, 2).unwrap();
        assert_eq!(a, b);
    }
}
