use super::{AnalysisConfig, TempoEstimate};

/// Stable iff the last `n_stab` tempo values have a coefficient of variation
/// within `cv_max` and a spread (max - min) within `dev_max`. Fewer than
/// `n_stab` estimates is unstable.
pub fn assess_stability(recent: &[TempoEstimate], cfg: &AnalysisConfig) -> bool {
    if recent.len() < cfg.n_stab || cfg.n_stab == 0 {
        return false;
    }
    let window = &recent[recent.len() - cfg.n_stab..];
    let n = window.len() as f64;
    let mean = window.iter().map(|e| e.bpm).sum::<f64>() / n;
    if !(mean > 0.0) {
        return false;
    }
    let var = window.iter().map(|e| (e.bpm - mean).powi(2)).sum::<f64>() / n;
    let cv = var.sqrt() / mean;
    let (min, max) = window
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| (lo.min(e.bpm), hi.max(e.bpm)));
    cv <= cfg.cv_max && max - min <= cfg.dev_max
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(bpms: &[f64]) -> Vec<TempoEstimate> {
        bpms.iter()
            .map(|&bpm| TempoEstimate {
                bpm,
                beat_phase: 0.0,
                confidence: 1.0,
                stable: false,
                time: 0.0,
            })
            .collect()
    }

    #[test]
    fn constant_is_stable() {
        assert!(assess_stability(&seq(&[120.0; 8]), &AnalysisConfig::default()));
    }

    #[test]
    fn alternating_is_unstable() {
        let bpms: Vec<f64> = (0..8).map(|i| if i % 2 == 0 { 90.0 } else { 140.0 }).collect();
        assert!(!assess_stability(&seq(&bpms), &AnalysisConfig::default()));
    }

    #[test]
    fn too_few_is_unstable() {
        assert!(!assess_stability(&seq(&[120.0; 7]), &AnalysisConfig::default()));
        assert!(!assess_stability(&[], &AnalysisConfig::default()));
    }

    #[test]
    fn spread_limit_is_inclusive() {
        let cfg = AnalysisConfig::default();
        assert!(assess_stability(&seq(&[120.0, 120.0, 120.0, 120.0, 126.0, 123.0, 121.0, 120.0]), &cfg));
        assert!(!assess_stability(&seq(&[120.0, 120.0, 120.0, 120.0, 126.5, 123.0, 121.0, 120.0]), &cfg));
    }

    proptest! {
        #[test]
        fn bumping_one_value_breaks_stability(
            base in 70.0f64..180.0,
            offsets in proptest::collection::vec(-3.0f64..3.0, 8),
            idx in 0usize..8,
        ) {
            let cfg = AnalysisConfig::default();
            let bpms: Vec<f64> = offsets.iter().map(|o| base + o).collect();
            let stable = assess_stability(&seq(&bpms), &cfg);
            if stable {
                let mut bumped = bpms.clone();
                bumped[idx] += 3.0 * cfg.dev_max;
                prop_assert!(!assess_stability(&seq(&bumped), &cfg));
            }
        }
    }
}
