use super::{squared_distance, Dataset};
use crate::error::{Error, Result};

/// Majority vote of the `k` nearest training vectors under Euclidean
/// distance. Equal distances are ordered by training index.
pub fn knn_classify(train: &Dataset, k: usize, query: &[f64]) -> Result<u8> {
    if k == 0 || k.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "k must be a positive odd integer, got {k}"
        )));
    }
    if k > train.len() {
        return Err(Error::InvalidParameter(format!(
            "k = {k} exceeds the {} training vectors",
            train.len()
        )));
    }
    train.check_dim(query)?;

    let mut nearest: Vec<(f64, usize)> = train
        .vectors()
        .iter()
        .enumerate()
        .map(|(i, v)| (squared_distance(v, query), i))
        .collect();
    let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < nearest.len() {
        nearest.select_nth_unstable_by(k - 1, by_distance);
    }
    let positives = nearest[..k]
        .iter()
        .filter(|&&(_, i)| train.labels()[i] == 1)
        .count();
    Ok(u8::from(2 * positives > k))
}

/// Stored training set plus the neighbour count.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    pub train: Dataset,
    pub k: usize,
}

impl KnnModel {
    pub fn new(train: Dataset, k: usize) -> Result<Self> {
        if k == 0 || k.is_multiple_of(2) || k > train.len() {
            return Err(Error::InvalidParameter(format!(
                "k = {k} must be odd and at most {}",
                train.len()
            )));
        }
        Ok(KnnModel { train, k })
    }

    pub fn classify(&self, x: &[f64]) -> Result<u8> {
        knn_classify(&self.train, self.k, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn one_dim(points: &[(f64, u8)]) -> Dataset {
        Dataset::new(
            points.iter().map(|p| vec![p.0]).collect(),
            points.iter().map(|p| p.1).collect(),
        )
        .unwrap()
    }

    #[test]
    fn three_neighbours() {
        // distances from 0.5: 0.5, 0.5, 9.5 -> votes A, A, B
        let train = one_dim(&[(0.0, 0), (1.0, 0), (10.0, 1)]);
        assert_eq!(knn_classify(&train, 3, &[0.5]).unwrap(), 0);
        assert_eq!(knn_classify(&train, 1, &[10.0]).unwrap(), 1);
        assert_eq!(knn_classify(&train, 1, &[6.0]).unwrap(), 1);
    }

    #[test]
    fn tie_goes_to_lower_index() {
        let train = one_dim(&[(0.0, 1), (2.0, 0)]);
        assert_eq!(knn_classify(&train, 1, &[1.0]).unwrap(), 1);
        let train = one_dim(&[(2.0, 0), (0.0, 1)]);
        assert_eq!(knn_classify(&train, 1, &[1.0]).unwrap(), 0);
    }

    #[test]
    fn bad_k() {
        let train = one_dim(&[(0.0, 1), (2.0, 0)]);
        assert!(knn_classify(&train, 3, &[1.0]).is_err());
        assert!(knn_classify(&train, 2, &[1.0]).is_err());
        assert!(knn_classify(&train, 0, &[1.0]).is_err());
        assert!(knn_classify(&train, 1, &[1.0, 2.0]).is_err());
    }

    proptest! {
        #[test]
        fn own_label_and_duplication(
            pts in prop::collection::vec((prop::collection::vec(-10.0f64..10.0, 3), 0u8..2), 3..30),
            q in prop::collection::vec(-10.0f64..10.0, 3),
        ) {
            let train = Dataset::new(
                pts.iter().map(|p| p.0.clone()).collect(),
                pts.iter().map(|p| p.1).collect(),
            ).unwrap();
            for v in train.vectors() {
                let first = train.vectors().iter().position(|w| w == v).unwrap();
                prop_assert_eq!(knn_classify(&train, 1, v).unwrap(), train.labels()[first]);
            }
            let mut doubled_v = train.vectors().to_vec();
            doubled_v.extend_from_slice(train.vectors());
            let mut doubled_l = train.labels().to_vec();
            doubled_l.extend_from_slice(train.labels());
            let doubled = Dataset::new(doubled_v, doubled_l).unwrap();
            // Every neighbour appears twice: k on the original votes like
            // 2k - 1 on the doubled set.
            for k in [1usize, 3] {
                prop_assert_eq!(
                    knn_classify(&train, k, &q).unwrap(),
                    knn_classify(&doubled, 2 * k - 1, &q).unwrap()
                );
            }
        }
    }
}
