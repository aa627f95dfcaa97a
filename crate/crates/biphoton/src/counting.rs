//! Photon-counting statistics: accidental coincidences, figures of merit,
//! and a seeded Poissonian count generator for realistic noisy traces.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Measured counting rates for one detector pair.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CountingRates {
    /// Singles rate, detector 1, Hz.
    pub singles_1: f64,
    /// Singles rate, detector 2, Hz.
    pub singles_2: f64,
    /// Coincidence rate, Hz.
    pub coincidences: f64,
    /// Coincidence resolving window, seconds.
    pub window: f64,
    /// Pump power, watts.
    pub pump_power: f64,
    /// Accumulation time, seconds.
    pub duration: f64,
}

impl CountingRates {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("singles_1", self.singles_1),
            ("singles_2", self.singles_2),
            ("coincidences", self.coincidences),
        ] {
            if !(v >= 0.0) {
                return Err(Error::Config(format!(
                    "counting rate {name} must be nonnegative, got {v}"
                )));
            }
        }
        if !(self.window > 0.0) {
            return Err(Error::Config(format!(
                "coincidence window must be positive, got {:e}",
                self.window
            )));
        }
        Ok(())
    }

    /// Physically the coincidence rate cannot exceed either singles rate;
    /// dark counts can break this marginally, so it warns rather than fails.
    pub fn consistency_warning(&self) -> Option<String> {
        let cap = self.singles_1.min(self.singles_2);
        (self.coincidences > cap).then(|| {
            format!(
                "coincidence rate {} Hz exceeds the smaller singles rate {} Hz",
                self.coincidences, cap
            )
        })
    }
}

/// Reference figures of merit for the source, all configurable. The rate and
/// efficiency entries are stored characterization values only; nothing in
/// the simulation derives them.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SourceFigures {
    /// Detected coincidence rate per pump power, Hz/mW.
    pub detected_pair_rate_per_mw: f64,
    /// Estimated in-crystal pair production rate per pump power, Hz/mW.
    pub crystal_pair_rate_per_mw: f64,
    /// Pair conversion efficiency (dimensionless).
    pub conversion_efficiency: f64,
    /// Reference normalized coincidence ratio N_c/√(N₁N₂).
    pub norm_coincidence_ratio: f64,
    /// CAR coefficient a in CAR(P) = a/P, milliwatts.
    pub car_coefficient_mw: f64,
    /// Heralded-g² slope b in g²(P) = b·P, 1/milliwatt.
    pub g2_slope_per_mw: f64,
}

impl SourceFigures {
    /// Characterization values of the reference source.
    pub fn reference() -> Self {
        SourceFigures {
            detected_pair_rate_per_mw: 98_500.0,
            crystal_pair_rate_per_mw: 3.0e6,
            conversion_efficiency: 1.66e-9,
            norm_coincidence_ratio: 0.1860,
            car_coefficient_mw: 16.85,
            g2_slope_per_mw: 0.087,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("detected_pair_rate_per_mw", self.detected_pair_rate_per_mw),
            ("crystal_pair_rate_per_mw", self.crystal_pair_rate_per_mw),
            ("conversion_efficiency", self.conversion_efficiency),
            ("norm_coincidence_ratio", self.norm_coincidence_ratio),
            ("car_coefficient_mw", self.car_coefficient_mw),
            ("g2_slope_per_mw", self.g2_slope_per_mw),
        ] {
            if !(v >= 0.0) {
                return Err(Error::Config(format!(
                    "source figure {name} must be nonnegative, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Coincidence-to-accidental ratio at pump power `p_mw` (mW).
    pub fn car(&self, p_mw: f64) -> Result<f64> {
        if !(p_mw > 0.0) {
            return Err(Error::out_of_range(
                "pump power (mW)",
                p_mw,
                0.0,
                f64::INFINITY,
            ));
        }
        Ok(self.car_coefficient_mw / p_mw)
    }

    /// Heralded second-order coherence at pump power `p_mw` (mW).
    pub fn heralded_g2(&self, p_mw: f64) -> Result<f64> {
        if !(p_mw >= 0.0) {
            return Err(Error::out_of_range(
                "pump power (mW)",
                p_mw,
                0.0,
                f64::INFINITY,
            ));
        }
        Ok(self.g2_slope_per_mw * p_mw)
    }
}

/// Accidental coincidence rate N₁·N₂·T_R, Hz.
pub fn accidental_rate(singles_1: f64, singles_2: f64, window: f64) -> f64 {
    singles_1 * singles_2 * window
}

/// Normalized coincidence ratio N_c/√(N₁·N₂).
pub fn normalized_coincidence_ratio(coincidences: f64, singles_1: f64, singles_2: f64) -> Result<f64> {
    if !(singles_1 > 0.0 && singles_2 > 0.0) {
        return Err(Error::InvalidInput(format!(
            "singles rates must be positive, got {singles_1} and {singles_2}"
        )));
    }
    Ok(coincidences / (singles_1 * singles_2).sqrt())
}

/// Independent Poisson draws, one per expected coincidence rate, with the
/// accidental floor added to every point. Deterministic for a fixed seed.
pub fn simulate_counts(
    rates_hz: &[f64],
    accidental_floor_hz: f64,
    duration: f64,
    seed: u64,
) -> Result<Vec<u64>> {
    if !(duration > 0.0) {
        return Err(Error::InvalidInput(format!(
            "duration must be positive, got {duration}"
        )));
    }
    if !(accidental_floor_hz >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "accidental floor must be nonnegative, got {accidental_floor_hz}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rates_hz
        .iter()
        .map(|&rate| {
            if !(rate >= 0.0) {
                return Err(Error::InvalidInput(format!(
                    "expected rate must be nonnegative, got {rate}"
                )));
            }
            let mean = (rate + accidental_floor_hz) * duration;
            if mean == 0.0 {
                return Ok(0);
            }
            let poisson = Poisson::new(mean)
                .map_err(|e| Error::Numerical(format!("poisson mean {mean}: {e}")))?;
            Ok(poisson.sample(&mut rng) as u64)
        })
        .collect()
}

/// Accidental-subtracted counts. `net` is clamped at zero for downstream
/// normalization; `signed` keeps the raw difference so statistical checks
/// (zero mean for pure-accidental input) stay unbiased.
#[derive(Debug, Clone)]
pub struct SubtractedCounts {
    /// max(raw − floor, 0) per point.
    pub net: Vec<f64>,
    /// raw − floor per point, unclamped.
    pub signed: Vec<f64>,
    /// Points where the clamp engaged.
    pub clamped: Vec<bool>,
}

impl SubtractedCounts {
    pub fn clamped_points(&self) -> usize {
        self.clamped.iter().filter(|&&c| c).count()
    }
}

/// Subtract the expected accidental counts N₁·N₂·T_R·duration from raw
/// coincidence counts.
pub fn subtract_accidentals(
    raw_counts: &[u64],
    singles_1: f64,
    singles_2: f64,
    window: f64,
    duration: f64,
) -> SubtractedCounts {
    let floor = accidental_rate(singles_1, singles_2, window) * duration;
    let signed: Vec<f64> = raw_counts.iter().map(|&c| c as f64 - floor).collect();
    let net: Vec<f64> = signed.iter().map(|&s| s.max(0.0)).collect();
    let clamped: Vec<bool> = signed.iter().map(|&s| s < 0.0).collect();
    SubtractedCounts {
        net,
        signed,
        clamped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn accidental_rate_at_reference_operating_point() {
        let r = accidental_rate(24_000.0, 24_000.0, 19.45e-9);
        assert_relative_eq!(r, 11.20, epsilon = 0.01);
        // fraction of the 1500 Hz coincidence rate: about 0.75%
        let fraction = r / 1500.0;
        assert_relative_eq!(fraction, 0.00747, epsilon = 5e-5);
        // consistent with the quoted 0.72% within 10% relative
        assert!((fraction - 0.0072).abs() / 0.0072 < 0.10);
        assert_eq!(accidental_rate(0.0, 24_000.0, 19.45e-9), 0.0);
    }

    #[test]
    fn normalized_ratio_value_and_symmetry() {
        let r = normalized_coincidence_ratio(1860.0, 10_000.0, 10_000.0).unwrap();
        assert_relative_eq!(r, 0.1860, epsilon = 1e-12);
        assert_eq!(
            normalized_coincidence_ratio(0.0, 5_000.0, 7_000.0).unwrap(),
            0.0
        );
        let a = normalized_coincidence_ratio(1500.0, 21_000.0, 27_000.0).unwrap();
        let b = normalized_coincidence_ratio(1500.0, 27_000.0, 21_000.0).unwrap();
        assert_eq!(a, b);
        assert!(normalized_coincidence_ratio(10.0, 0.0, 100.0).is_err());
    }

    #[test]
    fn car_and_g2_models() {
        let f = SourceFigures::reference();
        assert_eq!(f.car(1.0).unwrap(), 16.85);
        assert_eq!(f.heralded_g2(1.0).unwrap(), 0.087);
        // the interference run used 23 uW
        assert_relative_eq!(f.car(0.023).unwrap(), 732.6, epsilon = 0.1);
        // model algebra: CAR * g2 is power independent
        for &p in &[0.023, 0.5, 1.0, 4.0] {
            let product = f.car(p).unwrap() * f.heralded_g2(p).unwrap();
            assert_relative_eq!(product, 16.85 * 0.087, epsilon = 1e-12);
        }
        assert!(f.car(0.0).is_err());
        assert!(f.car(-1.0).is_err());
    }

    #[test]
    fn model_coefficients_come_from_the_struct() {
        let custom = SourceFigures {
            car_coefficient_mw: 33.70,
            g2_slope_per_mw: 0.174,
            ..SourceFigures::reference()
        };
        assert_eq!(custom.car(1.0).unwrap(), 33.70);
        assert_eq!(custom.heralded_g2(1.0).unwrap(), 0.174);
    }

    #[test]
    fn simulation_is_seeded_and_deterministic() {
        let rates = vec![1500.0; 64];
        let a = simulate_counts(&rates, 11.2, 1.0, 42).unwrap();
        let b = simulate_counts(&rates, 11.2, 1.0, 42).unwrap();
        assert_eq!(a, b);
        let c = simulate_counts(&rates, 11.2, 1.0, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_rate_and_zero_floor_give_zero_counts() {
        let counts = simulate_counts(&[0.0; 100], 0.0, 2.0, 7).unwrap();
        assert!(counts.iter().all(|&c| c == 0));
    }

    #[test]
    fn sample_mean_sits_in_poisson_band() {
        // 1000 draws at mean 1500: sample mean within 3.3 sigma of truth.
        let n = 1000;
        let rates = vec![1500.0; n];
        let counts = simulate_counts(&rates, 0.0, 1.0, 1234).unwrap();
        let mean = counts.iter().sum::<u64>() as f64 / n as f64;
        let band = 4.0 * (1500.0f64 / n as f64).sqrt() * (n as f64).sqrt() / n as f64 * n as f64;
        // i.e. 4*sqrt(1500/n) on the mean
        let tol = 4.0 * (1500.0f64 / n as f64).sqrt();
        assert!((mean - 1500.0).abs() < tol, "mean {mean}, band {band}");
    }

    #[test]
    fn dispersion_index_near_unity() {
        let n = 10_000;
        let counts = simulate_counts(&vec![500.0; n], 0.0, 1.0, 99).unwrap();
        let mean = counts.iter().sum::<u64>() as f64 / n as f64;
        let var = counts
            .iter()
            .map(|&c| (c as f64 - mean).powi(2))
            .sum::<f64>()
            / (n - 1) as f64;
        let index = var / mean;
        assert!((0.9..1.1).contains(&index), "index of dispersion {index}");
    }

    #[test]
    fn subtraction_examples() {
        // raw 1511 with floor ~11.2 leaves ~1499.8
        let out = subtract_accidentals(&[1511], 24_000.0, 24_000.0, 19.45e-9, 1.0);
        assert_relative_eq!(out.net[0], 1499.8, epsilon = 0.01);
        assert!(!out.clamped[0]);
        // zero floor is the identity
        let out = subtract_accidentals(&[123, 456], 0.0, 0.0, 19.45e-9, 1.0);
        assert_eq!(out.net, vec![123.0, 456.0]);
        // below-floor raw counts clamp to zero with the flag set
        let out = subtract_accidentals(&[5], 24_000.0, 24_000.0, 19.45e-9, 1.0);
        assert_eq!(out.net[0], 0.0);
        assert!(out.clamped[0]);
        assert!(out.signed[0] < 0.0);
        assert_eq!(out.clamped_points(), 1);
    }

    #[test]
    fn pure_accidental_runs_subtract_to_zero_mean() {
        let n = 2000;
        let floor = accidental_rate(24_000.0, 24_000.0, 19.45e-9);
        let counts = simulate_counts(&vec![0.0; n], floor, 1.0, 2024).unwrap();
        let out = subtract_accidentals(&counts, 24_000.0, 24_000.0, 19.45e-9, 1.0);
        let mean = out.signed.iter().sum::<f64>() / n as f64;
        // 3 sigma of the mean of Poisson(floor) deviations
        let tol = 3.0 * (floor / n as f64).sqrt();
        assert!(mean.abs() < tol, "mean {mean}, tol {tol}");
    }

    #[test]
    fn rate_consistency_warning() {
        let rates = CountingRates {
            singles_1: 1000.0,
            singles_2: 1000.0,
            coincidences: 1500.0,
            window: 19.45e-9,
            pump_power: 23e-6,
            duration: 1.0,
        };
        assert!(rates.consistency_warning().is_some());
        let ok = CountingRates {
            coincidences: 900.0,
            ..rates
        };
        assert!(ok.consistency_warning().is_none());
    }

    proptest! {
        #[test]
        fn accidental_rate_is_bilinear(
            n1 in 0.0f64..1e6,
            n2 in 0.0f64..1e6,
            a in 0.1f64..10.0,
            b in 0.1f64..10.0,
        ) {
            let window = 19.45e-9;
            let base = accidental_rate(n1, n2, window);
            let scaled = accidental_rate(a * n1, b * n2, window);
            prop_assert!((scaled - a * b * base).abs() <= 1e-9 * scaled.abs().max(1.0));
        }
    }
}
