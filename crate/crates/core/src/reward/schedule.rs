use super::RewardConfig;

/// Largest double below 1.
const SIGMA_MAX: f64 = 1.0 - f64::EPSILON / 2.0;

/// Weight of the strict reward at training step `t`:
/// `1 / (1 + exp(-kappa·(t - midpoint)))`.
///
/// Far from the midpoint the logistic saturates to 0 or 1 in double
/// precision; the result is kept inside the open interval (0, 1).
pub fn sigma(t: u64, cfg: &RewardConfig) -> f64 {
    let x = cfg.kappa * (t as f64 - cfg.midpoint as f64);
    let s = if x >= 0.0 {
        // 1 − e/(1+e) keeps the distance from 1 exact, where 1/(1+e) would
        // round 1+e first and merge neighbouring steps.
        let e = (-x).exp();
        1.0 - e / (1.0 + e)
    } else {
        let e = x.exp();
        e / (1.0 + e)
    };
    s.clamp(f64::MIN_POSITIVE, SIGMA_MAX)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_is_half() {
        for m in [0, 25, 100] {
            let cfg = RewardConfig { midpoint: m, ..Default::default() };
            assert_eq!(sigma(m, &cfg), 0.5);
        }
    }

    #[test]
    fn checkpoints() {
        let cfg = RewardConfig { kappa: 0.2, midpoint: 25, ..Default::default() };
        assert!((sigma(0, &cfg) - 0.006_692_850_924_284_856).abs() < 1e-15);
        assert!((sigma(50, &cfg) - 0.993_307_149_075_715).abs() < 1e-15);
    }

    #[test]
    fn stays_open_interval() {
        let cfg = RewardConfig { kappa: 5.0, midpoint: 1000, ..Default::default() };
        assert!(sigma(0, &cfg) > 0.0);
        assert!(sigma(u64::MAX, &cfg) < 1.0);
    }

    #[test]
    fn resolves_steps_near_saturation() {
        let cfg = RewardConfig::default();
        for t in 0..200 {
            assert!(sigma(t, &cfg) < sigma(t + 1, &cfg), "t={t}");
        }
    }
}
