//! The frequency-entangled two-photon state and its interference signature.
//!
//! A monochromatic pump pairs every signal frequency ω with ω_p − ω, so the
//! bimodal single-arm spectrum fixes the joint state completely. Overlapping
//! the two arms on a beamsplitter yields a coincidence probability
//!
//! P(δt) = N·[1 − V·f(δt)·cos(Δω·δt)],   δt = δx/c,
//!
//! with the beat at the lobe separation Δω and an envelope f set by the
//! single-lobe spectral shape. The module provides the closed form, a
//! brute-force spectral quadrature that serves as its oracle, the
//! beamsplitter visibility bound, nonlinear trace fitting, and conversion of
//! fitted parameters back to wavelength scales.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics;
use crate::phasematch::{PhotonSpectrum, PumpSpec};
use crate::units::{lambda_from_omega, C_VACUUM};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Two-photon spectral state under the monochromatic-pump constraint
/// ω₂ = ω_p − ω₁. The marginal is the (normalized) single-arm density.
#[derive(Debug, Clone)]
pub struct TwoPhotonSpectrum {
    pub marginal: PhotonSpectrum,
    /// Pump angular frequency, rad/s.
    pub pump_omega: f64,
    /// Lobe-center pair (ω₁, ω₂ = ω_p − ω₁), rad/s; ω₁ ≥ ω₂.
    pub lobe_omegas: (f64, f64),
    /// Beat frequency |ω₁ − ω₂|, rad/s.
    pub delta_omega: f64,
}

impl TwoPhotonSpectrum {
    /// Wavelength of the spectral midpoint ω_p/2 (the degenerate point).
    pub fn center_wavelength(&self) -> f64 {
        lambda_from_omega(0.5 * self.pump_omega)
    }
}

/// Pair each marginal frequency with its energy-conserving partner and
/// extract the lobe centers and beat frequency.
///
/// Lobe-center pairing is exact by construction (ω₂ := ω_p − ω₁); for
/// bimodal input the detected second lobe must agree with the constructed
/// partner to within a fraction of the lobe width, otherwise the marginal
/// cannot come from an energy-conserving pair source.
pub fn build_two_photon_spectrum(
    spec: &PhotonSpectrum,
    pump: &PumpSpec,
) -> Result<TwoPhotonSpectrum> {
    let pump_omega = pump.omega();
    let grid = spec.grid();
    let density = spec.density();
    let peak = density.iter().cloned().fold(0.0, f64::max);
    for (&lambda, &d) in grid.iter().zip(density) {
        if lambda <= pump.wavelength && d > 1e-12 * peak {
            return Err(Error::InvalidInput(format!(
                "spectral weight at {:.2} nm is at or above the pump frequency",
                lambda * 1e9
            )));
        }
    }
    let lobes = spec.lobes();
    if lobes.is_empty() || lobes.len() > 2 {
        return Err(Error::InvalidInput(format!(
            "need one or two spectral lobes, found {}",
            lobes.len()
        )));
    }

    // Short-wavelength lobe carries the higher frequency.
    let omega_1 = crate::units::omega_from_lambda(lobes[0].center_lambda);
    let mut delta_omega = (2.0 * omega_1 - pump_omega).abs();
    if lobes.len() == 2 {
        let omega_2_detected = crate::units::omega_from_lambda(lobes[1].center_lambda);
        let omega_2_constructed = pump_omega - omega_1;
        let width_omega = lobes[0]
            .fwhm
            .map(|w| w * omega_1 / lobes[0].center_lambda)
            .unwrap_or(0.0);
        let grid_step_omega = {
            let i = grid.len() / 2;
            (grid[i] - grid[i - 1]) * omega_1 / lobes[0].center_lambda
        };
        let tolerance = (0.25 * width_omega).max(3.0 * grid_step_omega);
        if (omega_2_detected - omega_2_constructed).abs() > tolerance {
            return Err(Error::InvalidInput(format!(
                "lobes are not energy-paired: partner of the {:.3} nm lobe should sit at \
                 {:.3} nm, detected {:.3} nm",
                lobes[0].center_lambda * 1e9,
                lambda_from_omega(omega_2_constructed) * 1e9,
                lobes[1].center_lambda * 1e9
            )));
        }
    } else {
        // Single lobe: degenerate within grid resolution reads as exactly 0.
        let i = grid.len() / 2;
        let grid_step_omega = (grid[i] - grid[i - 1]) * omega_1 / lobes[0].center_lambda;
        if delta_omega < grid_step_omega {
            delta_omega = 0.0;
        }
    }
    let omega_1 = 0.5 * (pump_omega + delta_omega);
    Ok(TwoPhotonSpectrum {
        marginal: spec.clone(),
        pump_omega,
        lobe_omegas: (omega_1, pump_omega - omega_1),
        delta_omega,
    })
}

/// Nonpolarizing beamsplitter; T + R < 1 means loss.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BeamSplitter {
    pub transmittance: f64,
    pub reflectance: f64,
}

impl BeamSplitter {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("transmittance", self.transmittance),
            ("reflectance", self.reflectance),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!(
                    "beamsplitter {name} must lie in [0, 1], got {v}"
                )));
            }
        }
        if self.transmittance + self.reflectance > 1.0 + 1e-9 {
            return Err(Error::Config(format!(
                "beamsplitter T + R = {} exceeds 1",
                self.transmittance + self.reflectance
            )));
        }
        Ok(())
    }
}

/// Highest interference visibility an unbalanced beamsplitter admits:
/// V_max = 2TR / (T² + R²).
pub fn max_visibility(bs: &BeamSplitter) -> Result<f64> {
    let (t, r) = (bs.transmittance, bs.reflectance);
    let denom = t * t + r * r;
    if denom == 0.0 {
        return Err(Error::InvalidInput(
            "beamsplitter with T = R = 0 has no interference visibility".into(),
        ));
    }
    Ok(2.0 * t * r / denom)
}

/// Beat envelope family for the closed-form trace.
///
/// `Gaussian { width }` is exp(−2·(δt/width)²) — the Fourier transform of a
/// Gaussian spectral lobe whose angular-frequency standard deviation is
/// 1/width. `Triangular { width }` is max(0, 1 − |δt|/width) — the transform
/// of an ideal sinc² lobe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Envelope {
    Gaussian { width: f64 },
    Triangular { width: f64 },
}

impl Envelope {
    fn width(&self) -> f64 {
        match self {
            Envelope::Gaussian { width } | Envelope::Triangular { width } => *width,
        }
    }

    fn eval(&self, dt: f64) -> f64 {
        match self {
            Envelope::Gaussian { width } => (-2.0 * (dt / width).powi(2)).exp(),
            Envelope::Triangular { width } => (1.0 - (dt / width).abs()).max(0.0),
        }
    }
}

/// Coincidence trace versus path-length difference, normalized so the
/// far-wing level is the fitted constant N.
#[derive(Debug, Clone)]
pub struct HomTrace {
    /// Path-length differences, meters, strictly increasing.
    pub dx: Vec<f64>,
    /// Normalized coincidence probability (or normalized net counts).
    pub values: Vec<f64>,
    /// Raw counts per point, when the trace came from a counting run.
    pub counts: Option<Vec<f64>>,
    /// Per-point uncertainties (√counts for Poissonian data).
    pub errors: Option<Vec<f64>>,
    pub params: Option<FitParams>,
}

impl HomTrace {
    pub fn new(dx: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if dx.len() != values.len() || dx.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "trace needs matching dx/value arrays of length >= 2, got {} and {}",
                dx.len(),
                values.len()
            )));
        }
        if dx.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "trace dx grid must be strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("trace values must be finite".into()));
        }
        Ok(HomTrace {
            dx,
            values,
            counts: None,
            errors: None,
            params: None,
        })
    }
}

/// Evaluate P(δx) = N·[1 − V·f(δx/c)·cos(Δω·δx/c)] on `dx_grid`.
pub fn hom_closed_form(
    n: f64,
    v: f64,
    delta_omega: f64,
    envelope: Envelope,
    dx_grid: &[f64],
) -> Result<HomTrace> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::out_of_range("visibility", v, 0.0, 1.0));
    }
    if !(n >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "trace scale N must be nonnegative, got {n}"
        )));
    }
    if !(envelope.width() > 0.0) {
        return Err(Error::InvalidInput(format!(
            "envelope width must be positive, got {:e}",
            envelope.width()
        )));
    }
    let values: Vec<f64> = dx_grid
        .iter()
        .map(|&dx| {
            let dt = dx / C_VACUUM;
            n * (1.0 - v * envelope.eval(dt) * (delta_omega * dt).cos())
        })
        .collect();
    HomTrace::new(dx_grid.to_vec(), values)
}

/// Brute-force coincidence trace from the sampled two-photon spectrum:
///
/// P(δt) ∝ (T² + R²) − 2TR·∫ S(ω)·cos((2ω − ω_p)·δt) dω,
///
/// evaluated by trapezoid quadrature on a uniform angular-frequency grid of
/// at least 4096 points, normalized so P(∞) = 1. This is the physics oracle
/// the closed form is checked against.
pub fn hom_from_spectrum(
    tps: &TwoPhotonSpectrum,
    bs: &BeamSplitter,
    dx_grid: &[f64],
) -> Result<HomTrace> {
    bs.validate()?;
    let v_max = max_visibility(bs)?;

    // Convert the wavelength-density marginal to angular frequency.
    let lambda_grid = tps.marginal.grid();
    let lambda_density = tps.marginal.density();
    let m = lambda_grid.len();
    let mut omegas: Vec<f64> = Vec::with_capacity(m);
    let mut density_omega: Vec<f64> = Vec::with_capacity(m);
    for i in (0..m).rev() {
        let lambda = lambda_grid[i];
        let omega = TWO_PI * C_VACUUM / lambda;
        omegas.push(omega);
        density_omega.push(lambda_density[i] * lambda * lambda / (TWO_PI * C_VACUUM));
    }

    // Uniform resampling for the quadrature.
    let n_u = (2 * m).max(4096);
    let (w_lo, w_hi) = (omegas[0], omegas[m - 1]);
    let d_omega = (w_hi - w_lo) / (n_u - 1) as f64;
    let mut resampled = Vec::with_capacity(n_u);
    let mut src = 0usize;
    for j in 0..n_u {
        let w = w_lo + d_omega * j as f64;
        while src + 2 < m && omegas[src + 1] < w {
            src += 1;
        }
        let (w0, w1) = (omegas[src], omegas[src + 1]);
        let frac = ((w - w0) / (w1 - w0)).clamp(0.0, 1.0);
        resampled.push(density_omega[src] * (1.0 - frac) + density_omega[src + 1] * frac);
    }
    // Renormalize on the uniform grid so C(0) = 1 exactly.
    let mut norm: f64 = resampled.iter().sum::<f64>() - 0.5 * (resampled[0] + resampled[n_u - 1]);
    norm *= d_omega;
    if !(norm > 0.0) {
        return Err(Error::InvalidInput(
            "two-photon marginal has zero spectral weight".into(),
        ));
    }

    let dt_max_alias = std::f64::consts::PI / (4.0 * d_omega);
    let mut values = Vec::with_capacity(dx_grid.len());
    for &dx in dx_grid {
        let dt = dx / C_VACUUM;
        if dt.abs() > dt_max_alias {
            return Err(Error::Resolution(format!(
                "beat oscillation at dx = {:.1} um spans fewer than 4 quadrature steps; \
                 refine the spectral grid",
                dx * 1e6
            )));
        }
        let mut acc = 0.0;
        for (j, &s) in resampled.iter().enumerate() {
            let omega = w_lo + d_omega * j as f64;
            let weight = if j == 0 || j == n_u - 1 { 0.5 } else { 1.0 };
            acc += weight * s * ((2.0 * omega - tps.pump_omega) * dt).cos();
        }
        let correlation = acc * d_omega / norm;
        values.push(1.0 - v_max * correlation);
    }
    HomTrace::new(dx_grid.to_vec(), values)
}

/// Fit diagnostics attached to the parameter report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitWarning {
    /// The modulation amplitude is consistent with zero; Δω is meaningless.
    DeltaOmegaUnidentifiable,
    /// Fewer than half a beat fits inside the envelope (width·Δω < π);
    /// Δω and the width are strongly correlated.
    BeatEnvelopeCorrelated,
    /// The fitted beat approaches the Nyquist rate of the sampling.
    PossibleAliasing,
    /// The trace spans fewer than 3 beat periods (or 2 envelope widths for a
    /// beat-free dip).
    SpanTooShort,
}

/// Fitted parameters of the closed-form model with 1σ standard errors.
#[derive(Debug, Clone)]
pub struct FitParams {
    pub n: f64,
    pub v: f64,
    /// Beat frequency, rad/s.
    pub delta_omega: f64,
    /// Gaussian envelope width (seconds; see [`Envelope::Gaussian`]).
    pub envelope_width: f64,
    pub n_err: f64,
    pub v_err: f64,
    pub delta_omega_err: f64,
    pub envelope_width_err: f64,
    pub iterations: usize,
    pub residual_rms: f64,
    pub warnings: Vec<FitWarning>,
}

/// Optional manual starting point for the fit.
#[derive(Debug, Clone, Copy)]
pub struct FitInit {
    pub n: f64,
    pub v: f64,
    pub delta_omega: f64,
    pub envelope_width: f64,
}

fn gaussian_model(s: f64, q: &[f64; 4]) -> f64 {
    let b = if q[3] == 0.0 { 1e-300 } else { q[3] };
    let e = (-2.0 * (s / b).powi(2)).exp();
    q[0] * (1.0 - q[1] * e * (q[2] * s).cos())
}

fn gaussian_jacobian(s: f64, q: &[f64; 4]) -> [f64; 4] {
    let b = if q[3] == 0.0 { 1e-300 } else { q[3] };
    let e = (-2.0 * (s / b).powi(2)).exp();
    let c = (q[2] * s).cos();
    [
        1.0 - q[1] * e * c,
        -q[0] * e * c,
        q[0] * q[1] * e * s * (q[2] * s).sin(),
        -q[0] * q[1] * c * e * 4.0 * s * s / (b * b * b),
    ]
}

/// Nonlinear least squares of the Gaussian-envelope closed form against a
/// trace. The beat-frequency start value comes from the dominant peak of the
/// detrended periodogram unless `init` overrides it; when the periodogram is
/// ambiguous both a beating and a beat-free start are tried and the lower
/// residual wins.
pub fn fit_hom_trace(trace: &HomTrace, init: Option<FitInit>) -> Result<FitParams> {
    let n_points = trace.dx.len();
    if n_points < 8 {
        return Err(Error::InvalidInput(format!(
            "fit needs at least 8 trace points, got {n_points}"
        )));
    }
    if trace.dx.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "trace dx grid must be strictly increasing".into(),
        ));
    }
    let ts: Vec<f64> = trace.dx.iter().map(|&dx| dx / C_VACUUM).collect();
    let t_ref = ts.iter().fold(0.0f64, |acc, &t| acc.max(t.abs()));
    if !(t_ref > 0.0) {
        return Err(Error::InvalidInput("trace spans zero delay".into()));
    }
    let ss: Vec<f64> = ts.iter().map(|&t| t / t_ref).collect();
    let ys = &trace.values;
    let mean = ys.iter().sum::<f64>() / n_points as f64;
    if !(mean > 0.0) {
        return Err(Error::InvalidInput(
            "trace values must have a positive mean".into(),
        ));
    }

    let span = ts[n_points - 1] - ts[0];
    let mean_dt = span / (n_points - 1) as f64;

    let starts: Vec<[f64; 4]> = match init {
        Some(i) => vec![[
            i.n,
            i.v,
            i.delta_omega * t_ref,
            (i.envelope_width / t_ref).abs().max(1e-6),
        ]],
        None => {
            let vmax = ys.iter().cloned().fold(f64::MIN, f64::max);
            let vmin = ys.iter().cloned().fold(f64::MAX, f64::min);
            let v0 = (((vmax - vmin) / (vmax + vmin).max(1e-300)).abs()).clamp(0.02, 1.0);
            let detrended: Vec<f64> = ys.iter().map(|&y| y - mean).collect();
            let beat_omega = numerics::dominant_frequency(&ts, &detrended, 1024)
                .filter(|&(_, amp, _)| amp > 0.05 * (vmax - vmin))
                .map(|(omega, _, _)| omega)
                .unwrap_or(0.0);
            let w_dip = dip_width_estimate(&ts, ys, mean).unwrap_or(span / 3.0);
            let mut list = vec![[mean, v0, beat_omega * t_ref, (span / 3.0) / t_ref]];
            if beat_omega > 0.0 {
                // Also try the beat-free interpretation of the same data.
                list.push([mean, v0, 0.0, w_dip / t_ref]);
            } else {
                list[0][3] = w_dip / t_ref;
            }
            list
        }
    };

    let mut best: Option<numerics::LmOutcome> = None;
    for q0 in starts {
        let out = numerics::levenberg_marquardt(
            &ss,
            ys,
            q0,
            gaussian_model,
            gaussian_jacobian,
            200,
            1e-8,
        );
        let better = match &best {
            None => true,
            Some(prev) => {
                (out.converged && !prev.converged) || out.residual_rms < prev.residual_rms
            }
        };
        if better {
            best = Some(out);
        }
    }
    let out = best.expect("at least one start point");

    let q = out.params;
    let n_fit = q[0];
    let v_fit = q[1];
    let delta_omega = (q[2] / t_ref).abs();
    let envelope_width = (q[3] * t_ref).abs();

    // Standard errors: s^2 (J^T J)^-1, mapped back through the scaling.
    let dof = (n_points.saturating_sub(4)).max(1) as f64;
    let ssr = out.residual_rms.powi(2) * n_points as f64;
    let s2 = ssr / dof;
    let (errs, singular) = match out.jtj_inverse {
        Some(inv) => {
            let diag = [inv[0], inv[5], inv[10], inv[15]];
            if diag.iter().any(|&d| d < 0.0 || !d.is_finite()) {
                ([f64::INFINITY; 4], true)
            } else {
                (
                    [
                        (s2 * diag[0]).sqrt(),
                        (s2 * diag[1]).sqrt(),
                        (s2 * diag[2]).sqrt() / t_ref,
                        (s2 * diag[3]).sqrt() * t_ref,
                    ],
                    false,
                )
            }
        }
        None => ([f64::INFINITY; 4], true),
    };

    let mut warnings = Vec::new();
    if singular || v_fit.abs() < 1e-10 {
        warnings.push(FitWarning::DeltaOmegaUnidentifiable);
    }
    if delta_omega > 0.0 && envelope_width * delta_omega < std::f64::consts::PI {
        warnings.push(FitWarning::BeatEnvelopeCorrelated);
    }
    if delta_omega > 0.9 * std::f64::consts::PI / mean_dt {
        warnings.push(FitWarning::PossibleAliasing);
    }
    let beat_periods = delta_omega * span / TWO_PI;
    let beat_free = delta_omega < TWO_PI / span;
    if (!beat_free && beat_periods < 3.0) || (beat_free && span < 2.0 * envelope_width) {
        warnings.push(FitWarning::SpanTooShort);
    }

    let params = FitParams {
        n: n_fit,
        v: v_fit,
        delta_omega,
        envelope_width,
        n_err: errs[0],
        v_err: errs[1],
        delta_omega_err: errs[2],
        envelope_width_err: errs[3],
        iterations: out.iterations,
        residual_rms: out.residual_rms,
        warnings,
    };
    if !out.converged {
        return Err(Error::FitDidNotConverge {
            iterations: out.iterations,
            residual_rms: out.residual_rms,
            best: Box::new(params),
        });
    }
    Ok(params)
}

/// Half-depth width of the strongest departure from the baseline, used to
/// seed the envelope width for beat-free dips.
fn dip_width_estimate(ts: &[f64], ys: &[f64], baseline: f64) -> Option<f64> {
    let n = ts.len();
    let (i_ext, dev) = ys
        .iter()
        .enumerate()
        .map(|(i, &y)| (i, (y - baseline).abs()))
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())?;
    if dev <= 0.0 {
        return None;
    }
    let half = 0.5 * dev;
    let mut left = i_ext;
    while left > 0 && (ys[left] - baseline).abs() > half {
        left -= 1;
    }
    let mut right = i_ext;
    while right + 1 < n && (ys[right] - baseline).abs() > half {
        right += 1;
    }
    if left == i_ext || right == i_ext {
        return None;
    }
    let half_width = 0.5 * (ts[right] - ts[left]);
    // exp(-2 t^2/w^2) = 1/2 at t = w sqrt(ln2 / 2)
    Some(half_width / (0.5 * 2.0f64.ln()).sqrt())
}

/// Wavelength-domain scales recovered from fitted beat parameters.
#[derive(Debug, Clone, Copy)]
pub struct WavelengthScales {
    /// Lobe-center separation Δλ, meters.
    pub delta_lambda: f64,
    /// Single-photon intensity-FWHM bandwidth δλ, meters.
    pub bandwidth: f64,
}

/// Convert fitted (Δω, envelope width) to (Δλ, δλ) around mean wavelength
/// `lambda_bar`:
///
/// Δλ = λ̄²·Δω/(2πc);  δλ = λ̄²·2√(2 ln 2)/(2πc·width)
///
/// The Gaussian width convention ties the envelope to the single-lobe
/// intensity spectrum: width = 1/σ_ω, so the intensity FWHM in angular
/// frequency is 2√(2 ln 2)·σ_ω.
pub fn extract_wavelength_scales(params: &FitParams, lambda_bar: f64) -> Result<WavelengthScales> {
    if !(params.envelope_width > 0.0) {
        return Err(Error::InvalidInput(format!(
            "envelope width must be positive, got {:e}",
            params.envelope_width
        )));
    }
    if !(lambda_bar > 0.0) {
        return Err(Error::InvalidInput(format!(
            "mean wavelength must be positive, got {lambda_bar:e}"
        )));
    }
    let scale = lambda_bar * lambda_bar / (TWO_PI * C_VACUUM);
    let delta_lambda = scale * params.delta_omega.abs();
    let bandwidth = scale * 2.0 * (2.0 * 2.0f64.ln()).sqrt() / params.envelope_width;
    Ok(WavelengthScales {
        delta_lambda,
        bandwidth,
    })
}

/// Gaussian envelope width (seconds) that reproduces a single-photon
/// intensity-FWHM bandwidth `delta_lambda_fwhm` around `lambda_bar`; the
/// inverse of the δλ relation in [`extract_wavelength_scales`].
pub fn envelope_width_for_bandwidth(delta_lambda_fwhm: f64, lambda_bar: f64) -> f64 {
    let scale = lambda_bar * lambda_bar / (TWO_PI * C_VACUUM);
    scale * 2.0 * (2.0 * 2.0f64.ln()).sqrt() / delta_lambda_fwhm
}

/// Beat frequency (rad/s) equivalent to a lobe separation `delta_lambda`
/// around `lambda_bar`.
pub fn delta_omega_for_separation(delta_lambda: f64, lambda_bar: f64) -> f64 {
    TWO_PI * C_VACUUM * delta_lambda / (lambda_bar * lambda_bar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phasematch::SpectrumShape;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn pump() -> PumpSpec {
        PumpSpec {
            wavelength: 355.66e-9,
            power: 23e-6,
            linewidth: 1e6,
        }
    }

    /// Symmetric bimodal Gaussian marginal with lobe separation
    /// `delta_omega` and per-lobe angular-frequency std `sigma`.
    fn gaussian_marginal(delta_omega: f64, sigma: f64, points: usize) -> PhotonSpectrum {
        let pump_omega = pump().omega();
        let center = 0.5 * pump_omega;
        let half = 0.5 * delta_omega;
        let w_lo = center - half - 8.0 * sigma;
        let w_hi = center + half + 8.0 * sigma;
        // Build on a wavelength grid (ascending) from the frequency window.
        let l_lo = lambda_from_omega(w_hi);
        let l_hi = lambda_from_omega(w_lo);
        let grid: Vec<f64> = (0..points)
            .map(|i| l_lo + (l_hi - l_lo) * i as f64 / (points - 1) as f64)
            .collect();
        let density: Vec<f64> = grid
            .iter()
            .map(|&l| {
                let w = TWO_PI * C_VACUUM / l;
                let g = |mu: f64| (-0.5 * ((w - mu) / sigma).powi(2)).exp();
                // density in omega, converted to wavelength density
                (g(center - half) + g(center + half)) * TWO_PI * C_VACUUM / (l * l)
            })
            .collect();
        PhotonSpectrum::from_samples(grid, density, SpectrumShape::Gaussian).unwrap()
    }

    fn balanced() -> BeamSplitter {
        BeamSplitter {
            transmittance: 0.5,
            reflectance: 0.5,
        }
    }

    fn paper_bs() -> BeamSplitter {
        BeamSplitter {
            transmittance: 0.6094,
            reflectance: 0.3906,
        }
    }

    #[test]
    fn visibility_bound_balanced_and_unbalanced() {
        assert_relative_eq!(max_visibility(&balanced()).unwrap(), 1.0, epsilon = 1e-15);
        let v = max_visibility(&paper_bs()).unwrap();
        assert!((v - 0.9087).abs() < 2e-4, "V_max = {v}");
        // symmetric under swapping T and R
        let swapped = BeamSplitter {
            transmittance: 0.3906,
            reflectance: 0.6094,
        };
        assert_eq!(v, max_visibility(&swapped).unwrap());
        assert!(max_visibility(&BeamSplitter {
            transmittance: 0.0,
            reflectance: 0.0
        })
        .is_err());
    }

    #[test]
    fn degenerate_marginal_gives_zero_beat() {
        let s = gaussian_marginal(0.0, 8e12, 2001);
        let tps = build_two_photon_spectrum(&s, &pump()).unwrap();
        assert_eq!(tps.delta_omega, 0.0);
        assert_relative_eq!(
            tps.lobe_omegas.0 + tps.lobe_omegas.1,
            tps.pump_omega,
            max_relative = 1e-15
        );
    }

    #[test]
    fn beat_frequency_from_lobe_separation() {
        // Exact energy-conserving pair around 711.32 nm separated by 33.01 nm.
        let lambda_1 = 695.198e-9;
        let lambda_2 = 1.0 / (1.0 / pump().wavelength - 1.0 / lambda_1);
        assert_relative_eq!((lambda_2 - lambda_1) * 1e9, 33.01, epsilon = 0.01);
        let omega_1 = crate::units::omega_from_lambda(lambda_1);
        let omega_2 = crate::units::omega_from_lambda(lambda_2);
        let delta = omega_1 - omega_2;
        let s = gaussian_marginal(delta, 6e12, 4001);
        let tps = build_two_photon_spectrum(&s, &pump()).unwrap();
        assert_relative_eq!(tps.delta_omega, delta, max_relative = 2e-3);
        // quick-arithmetic value 2 pi c dlam / lam^2 ~ 1.23e14 rad/s
        assert_relative_eq!(tps.delta_omega, 1.23e14, max_relative = 0.015);
        // lobe centers sum to the pump frequency by construction
        assert_eq!(tps.lobe_omegas.0 + tps.lobe_omegas.1, tps.pump_omega);
    }

    #[test]
    fn unpaired_lobes_are_rejected() {
        // Two lobes NOT symmetric about omega_p/2.
        let pump_omega = pump().omega();
        let center = 0.5 * pump_omega;
        let sigma = 6e12;
        let grid: Vec<f64> = (0..3001)
            .map(|i| 650e-9 + (780e-9 - 650e-9) * i as f64 / 3000.0)
            .collect();
        let density: Vec<f64> = grid
            .iter()
            .map(|&l| {
                let w = TWO_PI * C_VACUUM / l;
                let g = |mu: f64| (-0.5 * ((w - mu) / sigma).powi(2)).exp();
                (g(center + 0.6e14) + g(center - 0.9e14)) * TWO_PI * C_VACUUM / (l * l)
            })
            .collect();
        let s = PhotonSpectrum::from_samples(grid, density, SpectrumShape::Gaussian).unwrap();
        let err = build_two_photon_spectrum(&s, &pump()).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn spectral_weight_above_pump_frequency_is_rejected() {
        let grid: Vec<f64> = (0..1001)
            .map(|i| 300e-9 + (800e-9 - 300e-9) * i as f64 / 1000.0)
            .collect();
        let density: Vec<f64> = grid
            .iter()
            .map(|&l| (-(0.5) * ((l - 500e-9) / 50e-9).powi(2)).exp())
            .collect();
        let s = PhotonSpectrum::from_samples(grid, density, SpectrumShape::Sampled).unwrap();
        let err = build_two_photon_spectrum(&s, &pump()).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn closed_form_dip_and_full_suppression() {
        // delta_x = 0, V = 1: complete suppression regardless of beat.
        let grid: Vec<f64> = (-50..=50).map(|i| i as f64 * 1e-6).collect();
        let trace =
            hom_closed_form(1.0, 1.0, 1.3e14, Envelope::Gaussian { width: 1e-13 }, &grid).unwrap();
        let at_zero = trace.values[50];
        assert!(at_zero.abs() < 1e-12, "P(0) = {at_zero}");
        // beat-free limit: minimum N(1-V) at dx = 0
        let trace = hom_closed_form(
            2.0,
            0.8,
            0.0,
            Envelope::Gaussian { width: 1e-13 },
            &grid,
        )
        .unwrap();
        let min = trace.values.iter().cloned().fold(f64::MAX, f64::min);
        assert_relative_eq!(min, 2.0 * (1.0 - 0.8), epsilon = 1e-12);
        assert_eq!(min, trace.values[50]);
    }

    #[test]
    fn beat_period_matches_wavelength_arithmetic() {
        // 26.90 C operating point: dlam = 44.72 nm around 711.32 nm.
        let lambda_bar = 711.32e-9;
        let delta_omega = delta_omega_for_separation(44.72e-9, lambda_bar);
        let period_expected = lambda_bar * lambda_bar / 44.72e-9; // ~11.31 um
        let grid: Vec<f64> = (0..40001).map(|i| i as f64 * 1e-9).collect(); // 0..40 um
        let trace = hom_closed_form(
            1.0,
            0.9,
            delta_omega,
            Envelope::Gaussian { width: 1e-12 },
            &grid,
        )
        .unwrap();
        // successive maxima of the generated trace
        let mut maxima = Vec::new();
        for i in 1..grid.len() - 1 {
            if trace.values[i] > trace.values[i - 1] && trace.values[i] >= trace.values[i + 1] {
                maxima.push(grid[i]);
            }
        }
        assert!(maxima.len() >= 3);
        let spacing = (maxima[2] - maxima[0]) / 2.0;
        assert_relative_eq!(spacing, period_expected, max_relative = 0.01);
        assert_relative_eq!(period_expected * 1e6, 11.31, epsilon = 0.01);
    }

    #[test]
    fn oracle_matches_closed_form_for_gaussian_bimodal_spectrum() {
        let sigma = 8e12;
        let delta_omega = 1.2e14;
        let s = gaussian_marginal(delta_omega, sigma, 4001);
        let tps = build_two_photon_spectrum(&s, &pump()).unwrap();
        let bs = balanced();
        let width = 1.0 / sigma;
        let envelope_extent = C_VACUUM * width * 3.0;
        let grid: Vec<f64> = (-300..=300)
            .map(|i| envelope_extent * i as f64 / 300.0)
            .collect();
        let oracle = hom_from_spectrum(&tps, &bs, &grid).unwrap();
        let closed = hom_closed_form(
            1.0,
            max_visibility(&bs).unwrap(),
            tps.delta_omega,
            Envelope::Gaussian { width },
            &grid,
        )
        .unwrap();
        let rms: f64 = (oracle
            .values
            .iter()
            .zip(&closed.values)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            / grid.len() as f64)
            .sqrt();
        assert!(rms <= 1e-3, "rms = {rms:e}");
    }

    #[test]
    fn unbalanced_beamsplitter_caps_the_dip() {
        let s = gaussian_marginal(0.0, 8e12, 4001);
        let tps = build_two_photon_spectrum(&s, &pump()).unwrap();
        let grid: Vec<f64> = (-200..=200).map(|i| i as f64 * 0.2e-6).collect();
        let trace = hom_from_spectrum(&tps, &paper_bs(), &grid).unwrap();
        let min = trace.values.iter().cloned().fold(f64::MAX, f64::min);
        assert!((min - (1.0 - 0.9087)).abs() < 5e-4, "trace minimum {min}");
    }

    #[test]
    fn single_lobe_spectrum_gives_pure_dip() {
        let sigma = 8e12;
        let s = gaussian_marginal(0.0, sigma, 4001);
        let tps = build_two_photon_spectrum(&s, &pump()).unwrap();
        let grid: Vec<f64> = (-200..=200).map(|i| i as f64 * 0.25e-6).collect();
        let oracle = hom_from_spectrum(&tps, &balanced(), &grid).unwrap();
        let closed = hom_closed_form(
            1.0,
            1.0,
            0.0,
            Envelope::Gaussian { width: 1.0 / sigma },
            &grid,
        )
        .unwrap();
        let rms: f64 = (oracle
            .values
            .iter()
            .zip(&closed.values)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            / grid.len() as f64)
            .sqrt();
        assert!(rms <= 1e-3, "rms = {rms:e}");
    }

    #[test]
    fn triangular_envelope_matches_sinc_squared_spectrum() {
        // Ideal sinc^2 lobes transform to a triangular beat envelope.
        let pump_omega = pump().omega();
        let center = 0.5 * pump_omega;
        let half_sep = 0.6e14;
        let tri_width = 1.5e-13; // seconds; sinc argument scale a = width
        let w_span = 14.0 / tri_width;
        let points = 16001;
        let l_lo = lambda_from_omega(center + half_sep + w_span);
        let l_hi = lambda_from_omega(center - half_sep - w_span);
        let grid: Vec<f64> = (0..points)
            .map(|i| l_lo + (l_hi - l_lo) * i as f64 / (points - 1) as f64)
            .collect();
        let density: Vec<f64> = grid
            .iter()
            .map(|&l| {
                let w = TWO_PI * C_VACUUM / l;
                let s = |mu: f64| {
                    let x = (w - mu) * tri_width;
                    crate::numerics::sinc(x).powi(2)
                };
                (s(center - half_sep) + s(center + half_sep)) * TWO_PI * C_VACUUM / (l * l)
            })
            .collect();
        let s = PhotonSpectrum::from_samples(grid, density, SpectrumShape::Sinc2).unwrap();
        let tps = build_two_photon_spectrum(&s, &pump()).unwrap();
        let dx: Vec<f64> = (-150..=150)
            .map(|i| C_VACUUM * tri_width * i as f64 / 100.0)
            .collect();
        let oracle = hom_from_spectrum(&tps, &balanced(), &dx).unwrap();
        let closed = hom_closed_form(
            1.0,
            1.0,
            tps.delta_omega,
            Envelope::Triangular { width: tri_width },
            &dx,
        )
        .unwrap();
        let rms: f64 = (oracle
            .values
            .iter()
            .zip(&closed.values)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            / dx.len() as f64)
            .sqrt();
        assert!(rms <= 5e-3, "rms = {rms:e}");
    }

    #[test]
    fn trace_parity_for_symmetric_spectrum() {
        let s = gaussian_marginal(1.0e14, 7e12, 4001);
        let tps = build_two_photon_spectrum(&s, &pump()).unwrap();
        let grid: Vec<f64> = (-100..=100).map(|i| i as f64 * 0.3e-6).collect();
        let trace = hom_from_spectrum(&tps, &balanced(), &grid).unwrap();
        let n = trace.values.len();
        for i in 0..n / 2 {
            let diff = (trace.values[i] - trace.values[n - 1 - i]).abs();
            assert!(diff < 1e-9, "parity violated by {diff:e} at index {i}");
        }
    }

    #[test]
    fn trace_values_respect_visibility_bounds() {
        let s = gaussian_marginal(1.4e14, 9e12, 4001);
        let tps = build_two_photon_spectrum(&s, &pump()).unwrap();
        let bs = paper_bs();
        let v_max = max_visibility(&bs).unwrap();
        let grid: Vec<f64> = (-200..=200).map(|i| i as f64 * 0.2e-6).collect();
        let trace = hom_from_spectrum(&tps, &bs, &grid).unwrap();
        for &v in &trace.values {
            assert!(v >= 1.0 - v_max - 1e-9 && v <= 1.0 + v_max + 1e-9);
        }
    }

    #[test]
    fn aliasing_guard_triggers_for_huge_delays() {
        let s = gaussian_marginal(1.2e14, 8e12, 64);
        let tps = build_two_photon_spectrum(&s, &pump()).unwrap();
        let grid: Vec<f64> = (0..32).map(|i| i as f64 * 1e-3).collect(); // up to 31 mm
        let err = hom_from_spectrum(&tps, &balanced(), &grid).unwrap_err();
        assert!(matches!(err, Error::Resolution(_)));
    }

    #[test]
    fn fit_round_trip_on_noise_free_grid() {
        let lambda_bar = 711.32e-9;
        for &v_true in &[0.3, 0.84031, 1.0] {
            for &dlam in &[20e-9, 33.01e-9, 50e-9] {
                let delta_omega = delta_omega_for_separation(dlam, lambda_bar);
                let width = envelope_width_for_bandwidth(6.16e-9, lambda_bar);
                let grid: Vec<f64> = (-600..=600).map(|i| i as f64 * 0.1e-6).collect();
                let trace = hom_closed_form(
                    1.0,
                    v_true,
                    delta_omega,
                    Envelope::Gaussian { width },
                    &grid,
                )
                .unwrap();
                let fit = fit_hom_trace(&trace, None).unwrap();
                assert_relative_eq!(fit.n, 1.0, max_relative = 0.01);
                assert_relative_eq!(fit.v, v_true, max_relative = 0.01);
                assert_relative_eq!(fit.delta_omega, delta_omega, max_relative = 0.01);
                assert_relative_eq!(fit.envelope_width, width, max_relative = 0.01);
            }
        }
    }

    #[test]
    fn flat_trace_fits_zero_visibility_with_flag() {
        let grid: Vec<f64> = (-100..=100).map(|i| i as f64 * 0.5e-6).collect();
        let values = vec![1.0; grid.len()];
        let trace = HomTrace::new(grid, values).unwrap();
        let fit = fit_hom_trace(&trace, None).unwrap();
        assert!(fit.v.abs() < 1e-6, "V = {}", fit.v);
        assert!(fit.warnings.contains(&FitWarning::DeltaOmegaUnidentifiable));
    }

    #[test]
    fn short_beat_inside_envelope_is_flagged_as_correlated() {
        let width = 1e-13;
        let delta_omega = 0.5 / width; // width * delta_omega = 0.5 < pi
        let grid: Vec<f64> = (-300..=300).map(|i| i as f64 * 0.2e-6).collect();
        let trace =
            hom_closed_form(1.0, 0.9, delta_omega, Envelope::Gaussian { width }, &grid).unwrap();
        let fit = fit_hom_trace(
            &trace,
            Some(FitInit {
                n: 1.0,
                v: 0.9,
                delta_omega,
                envelope_width: width,
            }),
        )
        .unwrap();
        assert!(fit.warnings.contains(&FitWarning::BeatEnvelopeCorrelated));
    }

    #[test]
    fn extraction_recovers_wavelength_scales() {
        let lambda_bar = 711.32e-9;
        let delta_omega = delta_omega_for_separation(33.01e-9, lambda_bar);
        let width = envelope_width_for_bandwidth(6.16e-9, lambda_bar);
        let params = FitParams {
            n: 1.0,
            v: 0.84,
            delta_omega,
            envelope_width: width,
            n_err: 0.0,
            v_err: 0.0,
            delta_omega_err: 0.0,
            envelope_width_err: 0.0,
            iterations: 0,
            residual_rms: 0.0,
            warnings: Vec::new(),
        };
        let scales = extract_wavelength_scales(&params, lambda_bar).unwrap();
        assert_relative_eq!(scales.delta_lambda, 33.01e-9, max_relative = 1e-12);
        assert_relative_eq!(scales.bandwidth, 6.16e-9, max_relative = 1e-12);
        // zero beat maps to zero separation
        let mut p0 = params;
        p0.delta_omega = 0.0;
        assert_eq!(
            extract_wavelength_scales(&p0, lambda_bar)
                .unwrap()
                .delta_lambda,
            0.0
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]
        #[test]
        fn visibility_decreases_with_imbalance(d1 in 0.0f64..0.49, d2 in 0.0f64..0.49) {
            // fixed T + R = 1; larger |T - R| gives strictly lower bound
            let (lo, hi) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
            prop_assume!(hi - lo > 1e-6);
            let v = |d: f64| max_visibility(&BeamSplitter {
                transmittance: 0.5 + d,
                reflectance: 0.5 - d,
            }).unwrap();
            prop_assert!(v(hi) < v(lo));
        }
    }
}
