//! Noncollinear odd-order type-0 quasi-phase matching: signal/idler roots
//! versus crystal temperature, emission spectra, bandwidths, degeneracy
//! search, temperature calibration, and the discreteness tuning curve.
//!
//! Geometry: the pump propagates along the grating axis; signal and idler
//! leave on opposite sides of it. For a photon collected at a fixed external
//! angle the three matching conditions are
//!
//! * energy: 1/λ_s + 1/λ_i = 1/λ_p (exact by construction),
//! * transverse momentum: k_s·sin θ_s = k_i·sin θ_i,
//! * longitudinal residual: Δk_z = k_p − k_s·cos θ_s − k_i·cos θ_i − 2πm/Λ(T).
//!
//! Roots of Δk_z(λ_s) = 0 are found by a uniform bracketing scan followed by
//! bisection; the emission density is the standard sinc²(Δk_z·L/2) factor of
//! a uniform crystal of length L.

use serde::{Deserialize, Serialize};

use crate::dispersion::CrystalSpec;
use crate::error::{Error, Result};
use crate::numerics;

/// Argument at which sinc²(x) falls to half its peak.
pub const SINC2_HALF_MAX_ARG: f64 = 1.391_557_377_2;

/// Monochromatic pump description. The linewidth is carried as metadata;
/// the model treats the pump as a single frequency.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PumpSpec {
    /// Vacuum wavelength, meters.
    pub wavelength: f64,
    /// Optical power, watts.
    pub power: f64,
    /// Linewidth, Hz (metadata only).
    pub linewidth: f64,
}

impl PumpSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength > 0.0) {
            return Err(Error::Config(format!(
                "pump wavelength must be positive, got {:e}",
                self.wavelength
            )));
        }
        if !(self.power >= 0.0) {
            return Err(Error::Config(format!(
                "pump power must be nonnegative, got {:e}",
                self.power
            )));
        }
        Ok(())
    }

    /// Pump angular frequency, rad/s.
    pub fn omega(&self) -> f64 {
        crate::units::omega_from_lambda(self.wavelength)
    }

    /// Wavelength of frequency-degenerate daughter photons, 2·λ_p.
    pub fn degenerate_wavelength(&self) -> f64 {
        2.0 * self.wavelength
    }
}

/// One solution of the matching conditions at a fixed collection angle.
#[derive(Debug, Clone, Copy)]
pub struct PhaseMatchSolution {
    pub lambda_signal: f64,
    pub lambda_idler: f64,
    pub theta_signal_int: f64,
    pub theta_idler_int: f64,
    /// Longitudinal mismatch left at the returned root, rad/m.
    pub dkz_residual: f64,
    pub temperature: f64,
}

/// Root-search controls.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Signal-wavelength search band, meters.
    pub search_band: (f64, f64),
    /// Uniform scan subdivisions used for bracketing.
    pub scan_points: usize,
    /// Residual target |Δk_z| at returned roots, rad/m.
    pub dkz_tolerance: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            search_band: (500e-9, 1100e-9),
            scan_points: 2000,
            dkz_tolerance: 1e-3,
        }
    }
}

/// Idler wavelength paired with `lambda_signal` by energy conservation.
pub fn idler_wavelength(lambda_pump: f64, lambda_signal: f64) -> Result<f64> {
    if lambda_signal <= lambda_pump {
        return Err(Error::out_of_range(
            "signal wavelength (m)",
            lambda_signal,
            lambda_pump,
            f64::INFINITY,
        ));
    }
    Ok(1.0 / (1.0 / lambda_pump - 1.0 / lambda_signal))
}

/// Longitudinal phase mismatch Δk_z (rad/m) for a signal photon of
/// wavelength `lambda_signal` traveling at internal angle `theta_signal_int`.
/// The idler wavelength follows from energy conservation and its angle from
/// the transverse-momentum condition.
pub fn phase_mismatch(
    lambda_signal: f64,
    theta_signal_int: f64,
    t: f64,
    crystal: &CrystalSpec,
    pump: &PumpSpec,
) -> Result<f64> {
    let lambda_idler = idler_wavelength(pump.wavelength, lambda_signal)?;
    let k_p = crystal.wavevector(pump.wavelength, t)?;
    let k_s = crystal.wavevector(lambda_signal, t)?;
    let k_i = crystal.wavevector(lambda_idler, t)?;
    let q = k_s * theta_signal_int.sin();
    if q.abs() > k_i {
        return Err(Error::Geometry(format!(
            "transverse momentum {q:.3e} rad/m exceeds the idler wavevector {k_i:.3e} rad/m"
        )));
    }
    let ks_z = (k_s * k_s - q * q).sqrt();
    let ki_z = (k_i * k_i - q * q).sqrt();
    Ok(k_p - ks_z - ki_z - crystal.grating_wavevector(t))
}

/// Δk_z for a signal photon collected at external angle `theta_ext`.
fn mismatch_at_collection(
    lambda_signal: f64,
    theta_ext: f64,
    t: f64,
    crystal: &CrystalSpec,
    pump: &PumpSpec,
) -> Result<f64> {
    let theta_int = crystal.internal_angle(theta_ext, lambda_signal, t)?;
    phase_mismatch(lambda_signal, theta_int, t, crystal, pump)
}

fn solution_at(
    lambda_signal: f64,
    theta_ext: f64,
    t: f64,
    crystal: &CrystalSpec,
    pump: &PumpSpec,
) -> Result<PhaseMatchSolution> {
    let lambda_idler = idler_wavelength(pump.wavelength, lambda_signal)?;
    let theta_signal_int = crystal.internal_angle(theta_ext, lambda_signal, t)?;
    let k_s = crystal.wavevector(lambda_signal, t)?;
    let k_i = crystal.wavevector(lambda_idler, t)?;
    let q = k_s * theta_signal_int.sin();
    let theta_idler_int = (q / k_i).asin();
    let dkz_residual = phase_mismatch(lambda_signal, theta_signal_int, t, crystal, pump)?;
    Ok(PhaseMatchSolution {
        lambda_signal,
        lambda_idler,
        theta_signal_int,
        theta_idler_int,
        dkz_residual,
        temperature: t,
    })
}

/// FWHM of a sinc² lobe whose mismatch crosses zero linearly at
/// `lambda_root`: |Δk_z| ≈ |Δk'|·|λ − λ_root|, half max at
/// |Δk_z|·L/2 = 1.3916.
fn sinc_lobe_fwhm_linear(
    lambda_root: f64,
    theta_ext: f64,
    t: f64,
    crystal: &CrystalSpec,
    pump: &PumpSpec,
) -> Result<f64> {
    let h = 1e-12;
    let up = mismatch_at_collection(lambda_root + h, theta_ext, t, crystal, pump)?;
    let down = mismatch_at_collection(lambda_root - h, theta_ext, t, crystal, pump)?;
    let slope = (up - down) / (2.0 * h);
    if slope.abs() < 1e-30 {
        return Err(Error::Numerical(
            "vanishing mismatch slope at a phase-matched root".into(),
        ));
    }
    Ok(4.0 * SINC2_HALF_MAX_ARG / (crystal.length * slope.abs()))
}

/// FWHM of the sinc² lobe at a degenerate (tangent) root where the mismatch
/// is quadratic: Δk_z ≈ D·u²/2.
fn sinc_lobe_fwhm_quadratic(
    lambda_root: f64,
    theta_ext: f64,
    t: f64,
    crystal: &CrystalSpec,
    pump: &PumpSpec,
) -> Result<f64> {
    let h = 5e-11;
    let up = mismatch_at_collection(lambda_root + h, theta_ext, t, crystal, pump)?;
    let mid = mismatch_at_collection(lambda_root, theta_ext, t, crystal, pump)?;
    let down = mismatch_at_collection(lambda_root - h, theta_ext, t, crystal, pump)?;
    let second = (up - 2.0 * mid + down) / (h * h);
    if second.abs() < 1e-30 {
        return Err(Error::Numerical(
            "vanishing mismatch curvature at the degenerate point".into(),
        ));
    }
    Ok(4.0 * (SINC2_HALF_MAX_ARG / (crystal.length * second.abs())).sqrt())
}

/// Solve Δk_z(λ_s) = 0 over the search band at fixed collection angle.
///
/// Returns zero, one, or two solutions sorted by signal wavelength. An empty
/// result (no sign change in the band) is not an error. When the residual at
/// the degenerate wavelength 2·λ_p is already within tolerance the two
/// coalescing roots are reported as a single degenerate solution with
/// λ_s = λ_i = 2·λ_p.
pub fn solve_signal_wavelengths(
    theta_ext: f64,
    t: f64,
    crystal: &CrystalSpec,
    pump: &PumpSpec,
    settings: &SolverSettings,
) -> Result<Vec<PhaseMatchSolution>> {
    let (lo, hi) = settings.search_band;
    if lo <= pump.wavelength {
        return Err(Error::out_of_range(
            "search band lower edge (m)",
            lo,
            pump.wavelength,
            hi,
        ));
    }
    let f = |lambda: f64| mismatch_at_collection(lambda, theta_ext, t, crystal, pump);
    let brackets = numerics::scan_brackets(f, lo, hi, settings.scan_points)?;
    let step = (hi - lo) / settings.scan_points as f64;
    let mut roots: Vec<f64> = Vec::new();
    for (a, b) in brackets {
        let r = numerics::bisect_to_residual(f, a, b, settings.dkz_tolerance)?;
        if roots.iter().all(|&prev| (r - prev).abs() > 0.5 * step) {
            roots.push(r);
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // Tangency handling: when the mismatch at the degenerate wavelength is
    // itself within tolerance the band contains one double root; rounding
    // may split it into a sub-bandwidth pair.
    let lambda_deg = pump.degenerate_wavelength();
    if lambda_deg > lo && lambda_deg < hi {
        let deg_residual = f(lambda_deg)?;
        if deg_residual.abs() <= settings.dkz_tolerance {
            let width = sinc_lobe_fwhm_quadratic(lambda_deg, theta_ext, t, crystal, pump)?;
            roots.retain(|&r| (r - lambda_deg).abs() > width);
            let theta_int = crystal.internal_angle(theta_ext, lambda_deg, t)?;
            let mut solutions = vec![PhaseMatchSolution {
                lambda_signal: lambda_deg,
                lambda_idler: lambda_deg,
                theta_signal_int: theta_int,
                theta_idler_int: theta_int,
                dkz_residual: deg_residual,
                temperature: t,
            }];
            for r in roots {
                solutions.push(solution_at(r, theta_ext, t, crystal, pump)?);
            }
            solutions.sort_by(|a, b| a.lambda_signal.partial_cmp(&b.lambda_signal).unwrap());
            return Ok(solutions);
        }
    }

    roots
        .into_iter()
        .map(|r| solution_at(r, theta_ext, t, crystal, pump))
        .collect()
}

/// Crystal temperature at which the two roots merge at 2·λ_p, located by
/// bisection of Δk_z(2·λ_p, T) over `t_band` to 10⁻⁵ °C.
pub fn degeneracy_temperature(
    theta_ext: f64,
    crystal: &CrystalSpec,
    pump: &PumpSpec,
    t_band: (f64, f64),
) -> Result<f64> {
    let lambda_deg = pump.degenerate_wavelength();
    let g = |t: f64| mismatch_at_collection(lambda_deg, theta_ext, t, crystal, pump);
    numerics::bisect_to_interval(g, t_band.0, t_band.1, 1e-5)
}

/// Calibration target: the observed degenerate operating point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CalibrationTarget {
    /// Degenerate wavelength, meters. Must equal 2·λ_p: energy conservation
    /// fixes it; the offset can only move the temperature axis.
    pub wavelength: f64,
    /// Temperature at which degeneracy is observed, °C.
    pub temperature: f64,
}

/// Find the additive temperature offset ΔT_cal such that the degeneracy
/// search returns `target.temperature` exactly. Solved directly in the
/// offset so the fixed point survives the (physical, uncalibrated)
/// thermal expansion of the poling period.
pub fn calibrate_temperature_offset(
    crystal: &CrystalSpec,
    pump: &PumpSpec,
    theta_ext: f64,
    target: &CalibrationTarget,
) -> Result<f64> {
    let lambda_deg = pump.degenerate_wavelength();
    if (target.wavelength - lambda_deg).abs() > 1e-12 * lambda_deg {
        return Err(Error::InvalidInput(format!(
            "calibration target wavelength {:.4} nm must equal the energy-conserving \
             degenerate wavelength 2*lambda_p = {:.4} nm",
            target.wavelength * 1e9,
            lambda_deg * 1e9
        )));
    }
    let (t_lo, t_hi) = crystal.sellmeier.temperature_range;
    let margin = 1e-6;
    let lo = t_lo - target.temperature + margin;
    let hi = t_hi - target.temperature - margin;
    if !(hi > lo) {
        return Err(Error::Calibration(format!(
            "target temperature {} C leaves no room inside the dispersion validity band",
            target.temperature
        )));
    }
    let h = |offset: f64| {
        let mut trial = crystal.clone();
        trial.temp_calibration_offset = offset;
        mismatch_at_collection(lambda_deg, theta_ext, target.temperature, &trial, pump)
    };
    let brackets = numerics::scan_brackets(h, lo, hi, 400)?;
    let (a, b) = *brackets.first().ok_or_else(|| {
        Error::Calibration(
            "no degeneracy for any temperature offset inside the dispersion validity band".into(),
        )
    })?;
    numerics::bisect_to_interval(h, a, b, 1e-7)
}

// ---------------------------------------------------------------------------
// Spectra
// ---------------------------------------------------------------------------

/// Spectral classification tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumShape {
    Sinc2,
    Gaussian,
    Sampled,
}

/// Selector for one of the (at most two) spectral lobes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LobeSide {
    Short,
    Long,
}

/// One detected spectral lobe.
#[derive(Debug, Clone, Copy)]
pub struct SpectralLobe {
    /// Grid point of maximum density, meters.
    pub peak_lambda: f64,
    /// Density-weighted centroid over the above-half-maximum region, meters.
    pub center_lambda: f64,
    /// Full width at half maximum from linearly interpolated crossings;
    /// None when a crossing falls outside the sampled grid.
    pub fwhm: Option<f64>,
    pub peak_density: f64,
    /// Grid points in the contiguous above-half-maximum region.
    pub points_above_half_max: usize,
}

/// Sampled single-arm spectral density over a wavelength grid, normalized to
/// unit trapezoid integral, with detected lobe metadata.
#[derive(Debug, Clone)]
pub struct PhotonSpectrum {
    grid: Vec<f64>,
    density: Vec<f64>,
    pub shape: SpectrumShape,
    lobes: Vec<SpectralLobe>,
}

impl PhotonSpectrum {
    /// Build from samples: validates the grid (strictly increasing, ≥ 16
    /// points), requires nonnegative density with positive integral, and
    /// normalizes to unit area.
    pub fn from_samples(grid: Vec<f64>, density: Vec<f64>, shape: SpectrumShape) -> Result<Self> {
        if grid.len() < 16 {
            return Err(Error::InvalidInput(format!(
                "spectrum needs at least 16 grid points, got {}",
                grid.len()
            )));
        }
        if grid.len() != density.len() {
            return Err(Error::InvalidInput(format!(
                "grid ({}) and density ({}) lengths differ",
                grid.len(),
                density.len()
            )));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "spectrum grid must be strictly increasing".into(),
            ));
        }
        if density.iter().any(|&d| !(d >= 0.0)) {
            return Err(Error::InvalidInput(
                "spectral density must be nonnegative and finite".into(),
            ));
        }
        let area = numerics::trapezoid(&grid, &density);
        if !(area > 0.0) {
            return Err(Error::InvalidInput(
                "spectral density integrates to zero".into(),
            ));
        }
        let density: Vec<f64> = density.into_iter().map(|d| d / area).collect();
        let lobes = detect_lobes(&grid, &density);
        Ok(PhotonSpectrum {
            grid,
            density,
            shape,
            lobes,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn lobes(&self) -> &[SpectralLobe] {
        &self.lobes
    }

    pub fn is_bimodal(&self) -> bool {
        self.lobes.len() == 2
    }

    /// Lobe with the highest peak density.
    pub fn dominant_lobe(&self) -> Option<&SpectralLobe> {
        self.lobes
            .iter()
            .max_by(|a, b| a.peak_density.partial_cmp(&b.peak_density).unwrap())
    }

    pub fn lobe(&self, side: LobeSide) -> Option<&SpectralLobe> {
        match side {
            LobeSide::Short => self.lobes.first(),
            LobeSide::Long => self.lobes.last(),
        }
    }

    /// Trapezoid integral of the stored density (1 after normalization).
    pub fn integral(&self) -> f64 {
        numerics::trapezoid(&self.grid, &self.density)
    }
}

/// Local maxima above 10% of the global peak, separated into lobes whose
/// above-half-maximum regions do not overlap. Sub-peaks riding on a stronger
/// lobe (sinc² sidelobes) fall below the relative threshold.
fn detect_lobes(grid: &[f64], density: &[f64]) -> Vec<SpectralLobe> {
    let n = grid.len();
    let global_max = density.iter().cloned().fold(0.0, f64::max);
    let threshold = 0.1 * global_max;
    let mut peaks: Vec<usize> = Vec::new();
    for i in 0..n {
        let left = if i == 0 { f64::MIN } else { density[i - 1] };
        let right = if i == n - 1 { f64::MIN } else { density[i + 1] };
        if density[i] >= threshold && density[i] > left && density[i] >= right {
            peaks.push(i);
        }
    }
    // Half-max region per candidate, highest peak wins overlaps.
    peaks.sort_by(|&a, &b| density[b].partial_cmp(&density[a]).unwrap());
    let mut claimed: Vec<(usize, usize, usize)> = Vec::new(); // (lo, hi, peak)
    'candidates: for &p in &peaks {
        let half = 0.5 * density[p];
        let mut lo = p;
        while lo > 0 && density[lo - 1] >= half {
            lo -= 1;
        }
        let mut hi = p;
        while hi + 1 < n && density[hi + 1] >= half {
            hi += 1;
        }
        for &(clo, chi, _) in &claimed {
            if lo <= chi && clo <= hi {
                continue 'candidates;
            }
        }
        claimed.push((lo, hi, p));
    }
    claimed.sort_by_key(|&(lo, _, _)| lo);

    claimed
        .into_iter()
        .map(|(lo, hi, p)| {
            let half = 0.5 * density[p];
            let left_cross = if lo > 0 {
                let (d0, d1) = (density[lo - 1], density[lo]);
                Some(grid[lo - 1] + (half - d0) / (d1 - d0) * (grid[lo] - grid[lo - 1]))
            } else {
                None
            };
            let right_cross = if hi + 1 < n {
                let (d0, d1) = (density[hi], density[hi + 1]);
                Some(grid[hi] + (d0 - half) / (d0 - d1) * (grid[hi + 1] - grid[hi]))
            } else {
                None
            };
            let fwhm = match (left_cross, right_cross) {
                (Some(l), Some(r)) => Some(r - l),
                _ => None,
            };
            let weight: f64 = (lo..=hi).map(|i| density[i]).sum();
            let center = (lo..=hi).map(|i| grid[i] * density[i]).sum::<f64>() / weight;
            SpectralLobe {
                peak_lambda: grid[p],
                center_lambda: center,
                fwhm,
                peak_density: density[p],
                points_above_half_max: hi - lo + 1,
            }
        })
        .collect()
}

/// Uniform wavelength grid request.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SpectralGrid {
    /// Lower edge, meters.
    pub min: f64,
    /// Upper edge, meters.
    pub max: f64,
    pub points: usize,
}

impl SpectralGrid {
    pub fn validate(&self) -> Result<()> {
        if self.points < 16 {
            return Err(Error::InvalidInput(format!(
                "spectral grid needs at least 16 points, got {}",
                self.points
            )));
        }
        if !(self.max > self.min && self.min > 0.0) {
            return Err(Error::InvalidInput(format!(
                "spectral grid [{:e}, {:e}] must be positive and increasing",
                self.min, self.max
            )));
        }
        Ok(())
    }

    pub fn lambdas(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| self.min + (self.max - self.min) * i as f64 / (n - 1) as f64)
            .collect()
    }
}

/// Single-arm emission spectrum at collection angle `theta_ext`:
/// density ∝ sinc²(Δk_z(λ)·L/2) on the requested grid, normalized.
///
/// `acceptance_half_angle` > 0 averages the density over a top-hat of
/// external angles (the finite acceptance of collection optics); 0 keeps the
/// single pencil direction.
pub fn emission_spectrum(
    theta_ext: f64,
    t: f64,
    crystal: &CrystalSpec,
    pump: &PumpSpec,
    grid: &SpectralGrid,
    settings: &SolverSettings,
    acceptance_half_angle: f64,
) -> Result<PhotonSpectrum> {
    grid.validate()?;
    if grid.min <= pump.wavelength {
        return Err(Error::out_of_range(
            "spectral grid lower edge (m)",
            grid.min,
            pump.wavelength,
            grid.max,
        ));
    }
    let roots = solve_signal_wavelengths(theta_ext, t, crystal, pump, settings)?;
    for root in &roots {
        if root.lambda_signal < grid.min || root.lambda_signal > grid.max {
            return Err(Error::out_of_range(
                "phase-matched root outside spectral grid (m)",
                root.lambda_signal,
                grid.min,
                grid.max,
            ));
        }
    }

    let angles: Vec<f64> = if acceptance_half_angle > 0.0 {
        let k = 15;
        (0..k)
            .map(|i| {
                theta_ext - acceptance_half_angle
                    + 2.0 * acceptance_half_angle * i as f64 / (k - 1) as f64
            })
            .collect()
    } else {
        vec![theta_ext]
    };

    let half_length = 0.5 * crystal.length;
    let lambdas = grid.lambdas();
    let mut density = Vec::with_capacity(lambdas.len());
    for &lambda in &lambdas {
        let mut acc = 0.0;
        for &angle in &angles {
            match mismatch_at_collection(lambda, angle, t, crystal, pump) {
                Ok(dkz) => acc += numerics::sinc(dkz * half_length).powi(2),
                // A direction with no transverse solution radiates nothing.
                Err(Error::Geometry(_)) => {}
                Err(e) => return Err(e),
            }
        }
        density.push(acc / angles.len() as f64);
    }

    let spectrum = PhotonSpectrum::from_samples(lambdas, density, SpectrumShape::Sinc2)?;
    for (i, lobe) in spectrum.lobes.iter().enumerate() {
        if lobe.fwhm.is_none() || lobe.points_above_half_max < 8 {
            return Err(Error::Resolution(format!(
                "lobe {i} at {:.4} nm has {} grid points above half maximum (need >= 8); \
                 refine the spectral grid",
                lobe.peak_lambda * 1e9,
                lobe.points_above_half_max
            )));
        }
    }
    if spectrum.lobes.is_empty() {
        return Err(Error::Resolution(
            "no resolvable lobe on the requested grid".into(),
        ));
    }
    Ok(spectrum)
}

/// Full width at half maximum of the selected lobe, meters.
pub fn fwhm_bandwidth(spectrum: &PhotonSpectrum, side: LobeSide) -> Result<f64> {
    let lobe = spectrum.lobe(side).ok_or_else(|| {
        Error::Resolution("requested lobe does not exist in this spectrum".into())
    })?;
    if lobe.points_above_half_max < 8 {
        return Err(Error::Resolution(format!(
            "lobe at {:.4} nm has {} grid points above half maximum (need >= 8)",
            lobe.peak_lambda * 1e9,
            lobe.points_above_half_max
        )));
    }
    lobe.fwhm.ok_or_else(|| {
        Error::Resolution(format!(
            "half-maximum crossings of the lobe at {:.4} nm fall outside the grid",
            lobe.peak_lambda * 1e9
        ))
    })
}

// ---------------------------------------------------------------------------
// Tuning curve
// ---------------------------------------------------------------------------

/// One temperature row of the discreteness tuning curve.
#[derive(Debug, Clone, Copy)]
pub struct TuningRow {
    pub temperature: f64,
    pub lambda_signal: f64,
    pub lambda_idler: f64,
    /// Center separation |λ_i − λ_s|, meters.
    pub delta_lambda: f64,
    /// Single-photon bandwidth δλ (mean sinc² FWHM of the two lobes), meters.
    pub bandwidth: f64,
    /// Discreteness ratio Δλ/δλ.
    pub ratio: f64,
}

/// Tuning curve rows plus the least-squares slope of Δλ/δλ versus T over the
/// rows at/above degeneracy.
#[derive(Debug, Clone)]
pub struct TuningCurve {
    pub rows: Vec<TuningRow>,
    /// Per-°C slope; None with fewer than two rows.
    pub ratio_slope_per_c: Option<f64>,
}

/// Sweep the crystal temperature and tabulate the signal/idler separation,
/// bandwidth, and discreteness ratio. Temperatures with no phase-matched
/// root (below degeneracy) produce no row.
pub fn tuning_curve(
    t_start: f64,
    t_end: f64,
    step: f64,
    theta_ext: f64,
    crystal: &CrystalSpec,
    pump: &PumpSpec,
    settings: &SolverSettings,
) -> Result<TuningCurve> {
    if !(step > 0.0) {
        return Err(Error::InvalidInput(format!(
            "temperature step must be positive, got {step}"
        )));
    }
    if t_end < t_start {
        return Err(Error::InvalidInput(format!(
            "temperature range [{t_start}, {t_end}] must be increasing"
        )));
    }
    let n_steps = ((t_end - t_start) / step).round() as usize;
    let mut rows = Vec::new();
    for i in 0..=n_steps {
        let t = t_start + step * i as f64;
        if t > t_end + 1e-9 {
            break;
        }
        let solutions = solve_signal_wavelengths(theta_ext, t, crystal, pump, settings)?;
        let row = match solutions.len() {
            0 => continue,
            1 => {
                let s = &solutions[0];
                let bandwidth =
                    sinc_lobe_fwhm_quadratic(s.lambda_signal, theta_ext, t, crystal, pump)?;
                TuningRow {
                    temperature: t,
                    lambda_signal: s.lambda_signal,
                    lambda_idler: s.lambda_idler,
                    delta_lambda: 0.0,
                    bandwidth,
                    ratio: 0.0,
                }
            }
            2 => {
                let (s_short, s_long) = (&solutions[0], &solutions[1]);
                let w_short =
                    sinc_lobe_fwhm_linear(s_short.lambda_signal, theta_ext, t, crystal, pump)?;
                let w_long =
                    sinc_lobe_fwhm_linear(s_long.lambda_signal, theta_ext, t, crystal, pump)?;
                let bandwidth = 0.5 * (w_short + w_long);
                let delta_lambda = s_long.lambda_signal - s_short.lambda_signal;
                TuningRow {
                    temperature: t,
                    lambda_signal: s_short.lambda_signal,
                    lambda_idler: s_long.lambda_signal,
                    delta_lambda,
                    bandwidth,
                    ratio: delta_lambda / bandwidth,
                }
            }
            n => {
                return Err(Error::Numerical(format!(
                    "unexpected root multiplicity {n} at T = {t} C"
                )))
            }
        };
        rows.push(row);
    }
    let ts: Vec<f64> = rows.iter().map(|r| r.temperature).collect();
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let ratio_slope_per_c = numerics::linear_fit(&ts, &ratios).map(|(slope, _)| slope);
    Ok(TuningCurve {
        rows,
        ratio_slope_per_c,
    })
}
