//! Cohen's kappa and the pairwise agreement matrix.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::MetricsError;

/// Chance-corrected agreement between two equal-length label sequences:
/// `(p_o - p_e) / (1 - p_e)` with `p_e` from the marginal products.
///
/// Degenerate cases (both raters constant, so `p_e == 1`) are defined
/// explicitly because the formula is 0/0 there: 1 when the sequences
/// agree everywhere, 0 otherwise.
pub fn cohen_kappa<T: Ord>(a: &[T], b: &[T]) -> Result<f64, MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let n = a.len() as f64;
    let observed = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64;
    let p_o = observed / n;

    let mut count_a: BTreeMap<&T, usize> = BTreeMap::new();
    let mut count_b: BTreeMap<&T, usize> = BTreeMap::new();
    for x in a {
        *count_a.entry(x).or_default() += 1;
    }
    for y in b {
        *count_b.entry(y).or_default() += 1;
    }
    let mut p_e = 0.0;
    for (label, &ca) in &count_a {
        if let Some(&cb) = count_b.get(*label) {
            p_e += (ca as f64 / n) * (cb as f64 / n);
        }
    }

    if p_e >= 1.0 {
        return Ok(if p_o >= 1.0 { 1.0 } else { 0.0 });
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

/// Landis-Koch interpretation band for a kappa value.
pub fn band(kappa: f64) -> &'static str {
    if kappa < 0.0 {
        "poor"
    } else if kappa <= 0.20 {
        "slight"
    } else if kappa <= 0.40 {
        "fair"
    } else if kappa <= 0.60 {
        "moderate"
    } else if kappa <= 0.80 {
        "substantial"
    } else {
        "almost perfect"
    }
}

/// Symmetric pairwise kappa matrix with unit diagonal; one row/column
/// per labeled run, in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct KappaMatrix {
    pub ids: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl KappaMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    pub fn band_of(&self, i: usize, j: usize) -> &'static str {
        band(self.values[i][j])
    }
}

/// Pairwise Cohen's kappa over aligned runs. All runs must share length
/// and instance order.
pub fn kappa_matrix<T: Ord>(runs: &[(String, Vec<T>)]) -> Result<KappaMatrix, MetricsError> {
    if runs.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let n = runs[0].1.len();
    for (_, labels) in runs {
        if labels.len() != n {
            return Err(MetricsError::LengthMismatch {
                left: n,
                right: labels.len(),
            });
        }
    }
    let k = runs.len();
    let mut values = alloc::vec![alloc::vec![0.0; k]; k];
    for i in 0..k {
        values[i][i] = 1.0;
        for j in i + 1..k {
            let kp = cohen_kappa(&runs[i].1, &runs[j].1)?;
            values[i][j] = kp;
            values[j][i] = kp;
        }
    }
    Ok(KappaMatrix {
        ids: runs.iter().map(|(id, _)| id.to_string()).collect(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn self_agreement_is_one() {
        let a = vec![1, 1, 0, 2, 0];
        assert_eq!(cohen_kappa(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn complete_disagreement_hand_value() {
        // p_o = 0, p_e = 0.5 by hand.
        let a = vec![1, 1, 0, 0];
        let b = vec![0, 0, 1, 1];
        assert!((cohen_kappa(&a, &b).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn partial_agreement_hand_value() {
        // p_o = 0.75, p_e = 0.5 by hand.
        let a = vec![1, 1, 1, 0];
        let b = vec![1, 1, 0, 0];
        assert!((cohen_kappa(&a, &b).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn degenerate_constant_raters() {
        // Both constant and equal: 1. Both constant and unequal: 0.
        assert_eq!(cohen_kappa(&[7, 7, 7], &[7, 7, 7]).unwrap(), 1.0);
        assert_eq!(cohen_kappa(&[7, 7, 7], &[8, 8, 8]).unwrap(), 0.0);
    }

    #[test]
    fn bands_match_thresholds() {
        assert_eq!(band(0.986), "almost perfect");
        assert_eq!(band(0.001), "slight");
        assert_eq!(band(-0.2), "poor");
        assert_eq!(band(0.2), "slight");
        assert_eq!(band(0.21), "fair");
        assert_eq!(band(0.45), "moderate");
        assert_eq!(band(0.75), "substantial");
        assert_eq!(band(1.0), "almost perfect");
    }

    #[test]
    fn matrix_identical_runs() {
        let runs = vec![
            ("A".to_string(), vec![1, 0, 1]),
            ("B".to_string(), vec![1, 0, 1]),
        ];
        let m = kappa_matrix(&runs).unwrap();
        assert_eq!(m.get(0, 1), 1.0);
        assert_eq!(m.get(0, 0), 1.0);
    }

    #[test]
    fn matrix_with_complement_run() {
        let runs = vec![
            ("A".to_string(), vec![1, 1, 0, 0]),
            ("B".to_string(), vec![1, 1, 0, 0]),
            ("C".to_string(), vec![0, 0, 1, 1]),
        ];
        let m = kappa_matrix(&runs).unwrap();
        assert_eq!(m.get(0, 1), 1.0);
        assert!((m.get(0, 2) + 1.0).abs() < 1e-12);
        assert!((m.get(1, 2) + 1.0).abs() < 1e-12);
        assert_eq!(m.get(2, 2), 1.0);
        // Symmetry.
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.get(i, j), m.get(j, i));
            }
        }
    }

    #[test]
    fn empty_or_mismatched_inputs_error() {
        assert!(matches!(
            cohen_kappa::<u8>(&[], &[]),
            Err(MetricsError::EmptyInput)
        ));
        assert!(matches!(
            cohen_kappa(&[1], &[1, 2]),
            Err(MetricsError::LengthMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn kappa_is_symmetric(pairs in proptest::collection::vec((0u8..3, 0u8..3), 1..60)) {
            let a: vec::Vec<u8> = pairs.iter().map(|(x, _)| *x).collect();
            let b: vec::Vec<u8> = pairs.iter().map(|(_, y)| *y).collect();
            let ab = cohen_kappa(&a, &b).unwrap();
            let ba = cohen_kappa(&b, &a).unwrap();
            prop_assert!((ab - ba).abs() < 1e-12);
        }

        #[test]
        fn kappa_self_is_one(labels in proptest::collection::vec(0u8..4, 1..60)) {
            prop_assert_eq!(cohen_kappa(&labels, &labels).unwrap(), 1.0);
        }
    }
}
