//! Split protocols and detection metrics.
//!
//! Two protocols: a single patient's windows divided 5:1:1 into train,
//! validation and test, and leave-one-patient-out, where the held-out
//! patient is the whole test set and everyone else is pooled and divided
//! 4:1 into train and validation.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::ingestion::LabeledWindow;
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    /// 5:1:1 split of one patient's windows.
    SinglePatient,
    /// Train on all other patients, test on the held-out one.
    LeaveOneOut,
}

impl Protocol {
    pub fn as_str(&self) -> &'static str {
        match self {
            Protocol::SinglePatient => "single",
            Protocol::LeaveOneOut => "loo",
        }
    }
}

impl std::str::FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" | "single-patient" => Ok(Protocol::SinglePatient),
            "loo" | "leave-one-out" => Ok(Protocol::LeaveOneOut),
            _ => Err(Error::InvalidParameter(format!(
                "protocol must be `single` or `loo`, got {s:?}"
            ))),
        }
    }
}

/// Anything carrying a binary seizure label and its origin.
pub trait Labeled {
    fn label(&self) -> u8;
    fn patient_id(&self) -> &str;
}

impl Labeled for LabeledWindow {
    fn label(&self) -> u8 {
        self.label
    }

    fn patient_id(&self) -> &str {
        &self.patient_id
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split<T> {
    pub train: Vec<T>,
    pub validation: Vec<T>,
    pub test: Vec<T>,
    pub train_patients: Vec<String>,
    pub test_patients: Vec<String>,
}

fn patients_of<T: Labeled>(items: &[T]) -> Vec<String> {
    let mut ids: Vec<String> = items.iter().map(|t| t.patient_id().to_string()).collect();
    ids.sort();
    ids.dedup();
    ids
}

fn ordered<T: Clone>(items: &[T], seed: u64, contiguous: bool) -> Vec<T> {
    let mut order: Vec<usize> = (0..items.len()).collect();
    if !contiguous {
        order.shuffle(&mut stream_rng(seed, Stream::Split, 0));
    }
    order.into_iter().map(|i| items[i].clone()).collect()
}

/// Shuffle (unless `contiguous`) and cut 5:1:1 into train, validation and
/// test. Validation and test each get `⌊n/7⌋` items; the remainder goes to
/// training.
pub fn split_single_patient<T: Labeled + Clone>(
    windows: &[T],
    seed: u64,
    contiguous: bool,
) -> Result<Split<T>> {
    let n = windows.len();
    if n < 7 {
        return Err(Error::InvalidParameter(format!(
            "a 5:1:1 split needs at least 7 windows, got {n}"
        )));
    }
    let mut all = ordered(windows, seed, contiguous);
    let part = n / 7;
    let test = all.split_off(n - part);
    let validation = all.split_off(n - 2 * part);
    let train = all;
    let has = |c: u8| train.iter().any(|t| t.label() == c);
    if !(has(0) && has(1)) {
        return Err(Error::SingleClass);
    }
    Ok(Split {
        train_patients: patients_of(&train),
        test_patients: patients_of(&test),
        train,
        validation,
        test,
    })
}

/// Hold out `test_patient`; pool the rest and cut 4:1 into train and
/// validation (`⌊n/5⌋` validation items).
pub fn split_leave_one_out<T: Labeled + Clone>(
    patients: &BTreeMap<String, Vec<T>>,
    test_patient: &str,
    seed: u64,
    contiguous: bool,
) -> Result<Split<T>> {
    if patients.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "leave-one-out needs at least 2 patients, got {}",
            patients.len()
        )));
    }
    let test = patients
        .get(test_patient)
        .ok_or_else(|| Error::UnknownPatient(test_patient.to_string()))?
        .clone();
    let pooled: Vec<T> = patients
        .iter()
        .filter(|(id, _)| id.as_str() != test_patient)
        .flat_map(|(_, w)| w.iter().cloned())
        .collect();
    let n = pooled.len();
    let mut train = ordered(&pooled, seed, contiguous);
    let validation = train.split_off(n - n / 5);
    Ok(Split {
        train_patients: patients_of(&train),
        test_patients: vec![test_patient.to_string()],
        train,
        validation,
        test,
    })
}

/// Confusion counts with seizure as the positive class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
}

impl Metrics {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// Precision or recall with an empty denominator is `0`, and so is F1 when
/// both are `0`.
pub fn compute_metrics(predictions: &[u8], labels: &[u8]) -> Result<Metrics> {
    if predictions.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            found: predictions.len(),
        });
    }
    if labels.is_empty() {
        return Err(Error::EmptyInput("no predictions to score"));
    }
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for (&p, &y) in predictions.iter().zip(labels) {
        match (p == 1, y == 1) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(Metrics {
        tp,
        fp,
        fn_,
        tn,
        precision,
        recall,
        f1,
        accuracy: ratio(tp + tn, labels.len()),
    })
}

/// Predict the most frequent label everywhere (non-seizure on a tie).
pub fn majority_baseline(labels: &[u8]) -> Result<Metrics> {
    let positives = labels.iter().filter(|&&l| l == 1).count();
    let majority = u8::from(2 * positives > labels.len());
    compute_metrics(&vec![majority; labels.len()], labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[derive(Debug, Clone, PartialEq)]
    struct Item {
        patient: String,
        id: usize,
        label: u8,
    }

    impl Labeled for Item {
        fn label(&self) -> u8 {
            self.label
        }
        fn patient_id(&self) -> &str {
            &self.patient
        }
    }

    fn items(patient: &str, n: usize, offset: usize) -> Vec<Item> {
        (0..n)
            .map(|i| Item {
                patient: patient.into(),
                id: offset + i,
                label: u8::from(i % 4 == 0),
            })
            .collect()
    }

    fn ids(v: &[Item]) -> Vec<usize> {
        let mut ids: Vec<usize> = v.iter().map(|i| i.id).collect();
        ids.sort();
        ids
    }

    #[test]
    fn single_patient_ratios() {
        let s = split_single_patient(&items("a", 700, 0), 1, false).unwrap();
        assert_eq!(
            (s.train.len(), s.validation.len(), s.test.len()),
            (500, 100, 100)
        );
        let s = split_single_patient(&items("a", 7, 0), 1, false).unwrap();
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (5, 1, 1));
        let s = split_single_patient(&items("a", 10, 0), 1, false).unwrap();
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (8, 1, 1));
        assert_eq!(
            split_single_patient(&items("a", 700, 0), 5, false).unwrap(),
            split_single_patient(&items("a", 700, 0), 5, false).unwrap()
        );
        assert!(split_single_patient(&items("a", 6, 0), 1, false).is_err());
    }

    #[test]
    fn contiguous_keeps_time_order() {
        let s = split_single_patient(&items("a", 70, 0), 1, true).unwrap();
        assert_eq!(ids(&s.train), (0..50).collect::<Vec<_>>());
        assert_eq!(ids(&s.test), (60..70).collect::<Vec<_>>());
    }

    #[test]
    fn single_class_training_rejected() {
        let all_neg: Vec<Item> = items("a", 14, 0)
            .into_iter()
            .map(|mut i| {
                i.label = 0;
                i
            })
            .collect();
        assert!(matches!(
            split_single_patient(&all_neg, 1, false),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn leave_one_out_sizes() {
        let mut map = BTreeMap::new();
        map.insert("a".to_string(), items("a", 5, 0));
        map.insert("b".to_string(), items("b", 5, 100));
        let s = split_leave_one_out(&map, "b", 3, false).unwrap();
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (4, 1, 5));
        assert!(s
            .train
            .iter()
            .chain(&s.validation)
            .all(|i| i.patient == "a"));
        assert_eq!(s.test_patients, vec!["b"]);
        assert!(matches!(
            split_leave_one_out(&map, "z", 3, false),
            Err(Error::UnknownPatient(_))
        ));
        map.remove("a");
        assert!(split_leave_one_out(&map, "b", 3, false).is_err());
    }

    #[test]
    fn hand_confusion_matrix() {
        let preds = [1, 1, 1, 0, 0, 0, 0, 0, 0, 0];
        let labels = [1, 1, 0, 1, 0, 0, 0, 0, 0, 0];
        let m = compute_metrics(&preds, &labels).unwrap();
        assert_eq!((m.tp, m.fp, m.fn_, m.tn), (2, 1, 1, 6));
        assert!((m.precision - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.recall - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.accuracy, 0.8);

        let perfect = compute_metrics(&labels, &labels).unwrap();
        assert_eq!(
            (
                perfect.precision,
                perfect.recall,
                perfect.f1,
                perfect.accuracy
            ),
            (1.0, 1.0, 1.0, 1.0)
        );
        assert!(compute_metrics(&[1], &[1, 0]).is_err());
        assert!(compute_metrics(&[], &[]).is_err());
    }

    #[test]
    fn baseline() {
        let mut labels = vec![0u8; 90];
        labels.extend([1u8; 10]);
        let m = compute_metrics(&[0; 100], &labels).unwrap();
        assert_eq!((m.accuracy, m.f1), (0.9, 0.0));

        let mut labels = vec![0u8; 85];
        labels.extend([1u8; 15]);
        let m = majority_baseline(&labels).unwrap();
        assert_eq!((m.accuracy, m.f1), (0.85, 0.0));

        let m = majority_baseline(&[1; 8]).unwrap();
        assert_eq!((m.accuracy, m.f1), (1.0, 1.0));

        let m = majority_baseline(&[0, 1, 0, 1]).unwrap();
        assert_eq!((m.accuracy, m.tp + m.fp), (0.5, 0));
    }

    proptest! {
        #[test]
        fn splits_partition_input(n in 7usize..200, seed in 0u64..1000, contiguous: bool) {
            let input = items("p", n, 0);
            if let Ok(s) = split_single_patient(&input, seed, contiguous) {
                let mut all: Vec<Item> = s.train.clone();
                all.extend(s.validation.clone());
                all.extend(s.test.clone());
                prop_assert_eq!(ids(&all), (0..n).collect::<Vec<_>>());
            }
        }

        #[test]
        fn loo_partition(sizes in prop::collection::vec(1usize..40, 2..6), pick in 0usize..6, seed in 0u64..100) {
            let mut map = BTreeMap::new();
            let mut offset = 0;
            for (p, &n) in sizes.iter().enumerate() {
                map.insert(format!("p{p}"), items(&format!("p{p}"), n, offset));
                offset += n;
            }
            let test = format!("p{}", pick % sizes.len());
            let s = split_leave_one_out(&map, &test, seed, false).unwrap();
            prop_assert_eq!(ids(&s.test), ids(&map[&test]));
            prop_assert!(s.train.iter().chain(&s.validation).all(|i| i.patient != test));
            let mut all = s.train.clone();
            all.extend(s.validation.clone());
            all.extend(s.test.clone());
            prop_assert_eq!(ids(&all), (0..offset).collect::<Vec<_>>());
        }

        #[test]
        fn metrics_invariants(pairs in prop::collection::vec((0u8..2, 0u8..2), 1..100), seed in 0u64..50) {
            let (p, l): (Vec<u8>, Vec<u8>) = pairs.iter().cloned().unzip();
            let m = compute_metrics(&p, &l).unwrap();
            prop_assert_eq!(m.total(), p.len());
            prop_assert_eq!(m.accuracy, (m.tp + m.tn) as f64 / p.len() as f64);
            let mut shuffled = pairs.clone();
            shuffled.shuffle(&mut crate::rng::rng_from_seed(seed));
            let (p2, l2): (Vec<u8>, Vec<u8>) = shuffled.into_iter().unzip();
            prop_assert_eq!(compute_metrics(&p2, &l2).unwrap().f1, m.f1);
        }
    }
}
