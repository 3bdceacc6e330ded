use super::{DensityEstimate, OnsetEvent};
use crate::{Error, Result};

/// Onsets per second over the closed window `[now - window, now]`.
pub fn compute_density(onsets: &[OnsetEvent], window: f64, now: f64) -> Result<DensityEstimate> {
    if !(window > 0.0) {
        return Err(Error::invalid(format!("density window must be positive, got {window}")));
    }
    let lo = now - window;
    let count = onsets.iter().filter(|o| o.time >= lo && o.time <= now).count();
    Ok(DensityEstimate {
        value: count as f64 / window,
        window,
        time: now,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn at(times: &[f64]) -> Vec<OnsetEvent> {
        times.iter().map(|&time| OnsetEvent { time, strength: 1.0 }).collect()
    }

    #[test]
    fn eight_in_four_seconds() {
        let onsets = at(&[6.5, 7.0, 7.5, 8.0, 8.5, 9.0, 9.5, 10.0]);
        assert_eq!(compute_density(&onsets, 4.0, 10.0).unwrap().value, 2.0);
    }

    #[test]
    fn empty_is_zero() {
        assert_eq!(compute_density(&[], 4.0, 10.0).unwrap().value, 0.0);
    }

    #[test]
    fn window_must_be_positive() {
        assert!(compute_density(&[], 0.0, 1.0).is_err());
        assert!(compute_density(&[], -1.0, 1.0).is_err());
        assert!(compute_density(&[], f64::NAN, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn equals_brute_force_count(times in proptest::collection::vec(0.0f64..20.0, 0..64),
                                    window in 0.1f64..10.0, now in 0.0f64..25.0) {
            let onsets = at(&times);
            let mut brute = 0usize;
            for t in &times {
                if now - window <= *t && *t <= now {
                    brute += 1;
                }
            }
            let d = compute_density(&onsets, window, now).unwrap();
            prop_assert_eq!(d.value, brute as f64 / window);
        }
    }
}
