//! Vector similarity over any IEEE float type.

use num_traits::Float;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimilarityError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("empty vector")]
    Empty,
}

pub fn dot<T: Float>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn norm<T: Float>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Cosine of the angle between `a` and `b`, clamped to `[-1, 1]`.
pub fn cosine_similarity<T: Float>(a: &[T], b: &[T]) -> Result<T, SimilarityError> {
    if a.len() != b.len() {
        return Err(SimilarityError::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(SimilarityError::Empty);
    }
    let (na, nb) = (norm(a), norm(b));
    if na == T::zero() || nb == T::zero() {
        return Err(SimilarityError::ZeroVector);
    }
    let c = dot(a, b) / (na * nb);
    Ok(c.max(-T::one()).min(T::one()))
}

/// Scales `v` to unit length in place.
pub fn normalize<T: Float>(v: &mut [T]) -> Result<(), SimilarityError> {
    if v.is_empty() {
        return Err(SimilarityError::Empty);
    }
    let n = norm(v);
    if n == T::zero() {
        return Err(SimilarityError::ZeroVector);
    }
    for x in v.iter_mut() {
        *x = *x / n;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_unit_vectors() {
        let v = [0.6f64, 0.8];
        assert!((cosine_similarity(&v, &v).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal() {
        assert_eq!(cosine_similarity(&[1.0f64, 0.0], &[0.0, 3.0]).unwrap(), 0.0);
    }

    #[test]
    fn diagonal_is_inverse_sqrt_two() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let c = cosine_similarity(&[1.0f64, 0.0], &[s, s]).unwrap();
        assert!((c - s).abs() < 1e-6);
        let c32 = cosine_similarity(&[1.0f32, 0.0], &[1.0, 1.0]).unwrap();
        assert!((c32 - 0.70710677).abs() < 1e-6);
    }

    #[test]
    fn invalid_inputs() {
        assert_eq!(
            cosine_similarity(&[1.0f64], &[1.0, 2.0]),
            Err(SimilarityError::DimensionMismatch { left: 1, right: 2 })
        );
        assert_eq!(
            cosine_similarity(&[0.0f64, 0.0], &[1.0, 2.0]),
            Err(SimilarityError::ZeroVector)
        );
        assert_eq!(cosine_similarity::<f64>(&[], &[]), Err(SimilarityError::Empty));
    }

    #[test]
    fn normalize_yields_unit() {
        let mut v = vec![3.0f64, 4.0];
        normalize(&mut v).unwrap();
        assert_eq!(v, vec![0.6, 0.8]);
        assert!(normalize(&mut [0.0f64]).is_err());
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(a in prop::collection::vec(-10.0f64..10.0, 4),
                                 b in prop::collection::vec(-10.0f64..10.0, 4)) {
            prop_assume!(norm(&a) > 1e-6 && norm(&b) > 1e-6);
            let ab = cosine_similarity(&a, &b).unwrap();
            let ba = cosine_similarity(&b, &a).unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert!((-1.0..=1.0).contains(&ab));
        }
    }
}
