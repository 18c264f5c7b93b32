use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::{self, Stream};

/// Synthetic minority oversampling.
///
/// Appends interpolated minority rows until `minority / majority` reaches
/// `target_ratio`. Each synthetic row picks a random minority row, one of its
/// `k_neighbors` nearest minority neighbours (Euclidean, ties by row order)
/// and a uniform point on the segment between them. Original rows are
/// returned first and unchanged.
pub fn smote(
    features: &Matrix,
    labels: &[u8],
    k_neighbors: usize,
    target_ratio: f64,
    seed: u64,
) -> Result<(Matrix, Vec<u8>)> {
    if labels.len() != features.rows() {
        return Err(Error::DimensionMismatch {
            expected: features.rows(),
            found: labels.len(),
        });
    }
    if k_neighbors == 0 {
        return Err(Error::invalid("SMOTE needs at least one neighbour"));
    }
    if !(target_ratio > 0.0 && target_ratio.is_finite()) {
        return Err(Error::invalid("target ratio must be positive"));
    }
    let ones = labels.iter().filter(|&&y| y == 1).count();
    let zeros = labels.len() - ones;
    if ones == 0 || zeros == 0 {
        return Err(Error::SingleClass);
    }
    let (minority_label, minority_count, majority_count) = if ones <= zeros {
        (1u8, ones, zeros)
    } else {
        (0u8, zeros, ones)
    };
    let wanted = libm::ceil(target_ratio * majority_count as f64 - 1e-9) as usize;
    let needed = wanted.saturating_sub(minority_count);
    if needed == 0 {
        return Ok((features.clone(), labels.to_vec()));
    }
    if minority_count < 2 {
        return Err(Error::invalid("SMOTE needs at least two minority rows"));
    }
    let minority: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == minority_label).collect();
    let k = k_neighbors.min(minority_count - 1);
    let neighbours: Vec<Vec<usize>> = minority
        .iter()
        .map(|&i| {
            let mut d: Vec<(f64, usize)> = minority
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| (squared_distance(features.row(i), features.row(j)), j))
                .collect();
            d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            d.into_iter().take(k).map(|(_, j)| j).collect()
        })
        .collect();

    let p = features.cols();
    let mut rng = rng::stream(seed, Stream::Smote);
    let mut data = features.as_slice().to_vec();
    data.reserve(needed * p);
    let mut out_labels = labels.to_vec();
    for _ in 0..needed {
        let a = rng.random_range(0..minority.len());
        let b = neighbours[a][rng.random_range(0..k)];
        let gap: f64 = rng.random();
        let (ra, rb) = (features.row(minority[a]), features.row(b));
        data.extend(ra.iter().zip(rb).map(|(x, y)| x + gap * (y - x)));
        out_labels.push(minority_label);
    }
    let rows = out_labels.len();
    Ok((Matrix::from_row_major(rows, p, data)?, out_labels))
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
