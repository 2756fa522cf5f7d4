use ndarray::Array2;

use crate::error::{Error, Result};

pub fn frobenius_distance(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Majority label among the `k` training features closest to `query`.
///
/// Neighbours are ordered by (distance, label). A tied vote goes to the label
/// with the smaller summed neighbour distance, then to the smaller label.
pub fn knn_classify(train: &[(Array2<f64>, usize)], query: &Array2<f64>, k: usize) -> Result<usize> {
    if train.is_empty() {
        return Err(Error::param("train", "empty training set"));
    }
    if k == 0 || k > train.len() {
        return Err(Error::param("k", format!("{k} not in 1..={}", train.len())));
    }
    if let Some((bad, _)) = train.iter().find(|(f, _)| f.dim() != query.dim()) {
        return Err(Error::DimensionMismatch(format!(
            "train {:?} vs query {:?}",
            bad.dim(),
            query.dim()
        )));
    }

    let mut neighbours: Vec<(f64, usize)> = train.iter().map(|(f, l)| (frobenius_distance(f, query), *l)).collect();
    neighbours.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut votes: Vec<(usize, usize, f64)> = Vec::new();
    for &(dist, label) in &neighbours[..k] {
        match votes.iter_mut().find(|v| v.0 == label) {
            Some(v) => {
                v.1 += 1;
                v.2 += dist;
            }
            None => votes.push((label, 1, dist)),
        }
    }
    votes.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.total_cmp(&b.2)).then(a.0.cmp(&b.0)));
    Ok(votes[0].0)
}
