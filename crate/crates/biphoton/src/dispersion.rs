//! Temperature-dependent extraordinary refractive index for MgO-doped
//! stoichiometric LiTaO₃, wavevectors, and crystal-face refraction.
//!
//! All three interacting waves share the extraordinary polarization, so only
//! n_e is modeled. Coefficient sets are plain data selected by a functional
//! form tag; alternative published fits drop in through configuration
//! without code changes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Functional form of a temperature-dependent Sellmeier fit.
///
/// Wavelengths enter the formulas in micrometers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SellmeierForm {
    /// Ten coefficients `[A, B, C, D, E, F, G, H, b, c]`, temperature in
    /// kelvin entering quadratically:
    ///
    /// n² = A + (B + b·Tk²)/(λ² − (C + c·Tk²)²)
    ///        + E/(λ² − F²) + G/(λ² − H²) + D·λ²
    TSquared,
    /// Twelve coefficients `[a1..a6, b1..b4, t0, t1]` with the temperature
    /// factor f = (T − t0)(T + t1), T in °C:
    ///
    /// n² = a1 + b1·f + (a2 + b2·f)/(λ² − (a3 + b3·f)²)
    ///         + (a4 + b4·f)/(λ² − a5²) − a6·λ²
    TProduct,
}

impl SellmeierForm {
    pub fn id(&self) -> &'static str {
        match self {
            SellmeierForm::TSquared => "t_squared",
            SellmeierForm::TProduct => "t_product",
        }
    }

    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "t_squared" => Ok(SellmeierForm::TSquared),
            "t_product" => Ok(SellmeierForm::TProduct),
            other => Err(Error::Config(format!(
                "unknown sellmeier form_id '{other}' (known: t_squared, t_product)"
            ))),
        }
    }

    fn coefficient_count(&self) -> usize {
        match self {
            SellmeierForm::TSquared => 10,
            SellmeierForm::TProduct => 12,
        }
    }
}

/// One published dispersion fit: form tag, coefficients, validity ranges,
/// and a free-text citation of the literature source.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SellmeierSet {
    pub form: SellmeierForm,
    pub coefficients: Vec<f64>,
    /// Valid vacuum wavelength range, meters.
    pub wavelength_range: (f64, f64),
    /// Valid temperature range, °C.
    pub temperature_range: (f64, f64),
    pub source_note: String,
}

impl SellmeierSet {
    /// Default extraordinary-index fit: near-stoichiometric LiTaO₃.
    ///
    /// Coefficients from A. Bruner, D. Eger, M. B. Oron, P. Blau, M. Katz,
    /// and S. Ruschin, Opt. Lett. 28, 194 (2003). The fit is for undoped
    /// near-stoichiometric material; the ~1%-MgO-doped composition of real
    /// poled crystals and the UV edge below 390 nm are small extrapolations,
    /// absorbed in practice by the crystal's temperature calibration offset.
    pub fn default_slt() -> Self {
        SellmeierSet {
            form: SellmeierForm::TSquared,
            coefficients: vec![
                4.502483,
                0.007294,
                0.185087,
                -0.02357,
                0.073423,
                0.199595,
                0.001,
                7.99724,
                3.483933e-8,
                1.607839e-8,
            ],
            wavelength_range: (0.35e-6, 1.6e-6),
            temperature_range: (15.0, 200.0),
            source_note: "Bruner et al., Opt. Lett. 28, 194 (2003): temperature-dependent \
                          Sellmeier fit for the extraordinary index of near-stoichiometric \
                          LiTaO3 (undoped); wavelength below 390 nm and MgO doping are \
                          extrapolations compensated by the temperature calibration offset"
                .to_string(),
        }
    }

    /// Structural validation: coefficient count, ordered ranges, no pole of
    /// any denominator inside the wavelength range, and a physically sane
    /// index at the validity-range corners and center.
    pub fn validate(&self) -> Result<()> {
        if self.coefficients.len() != self.form.coefficient_count() {
            return Err(Error::Config(format!(
                "form '{}' needs {} coefficients, got {}",
                self.form.id(),
                self.form.coefficient_count(),
                self.coefficients.len()
            )));
        }
        if self.coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Config("non-finite sellmeier coefficient".into()));
        }
        let (wl, wh) = self.wavelength_range;
        let (tl, th) = self.temperature_range;
        if !(wl > 0.0 && wh > wl) {
            return Err(Error::Config(format!(
                "wavelength range [{wl:e}, {wh:e}] must be positive and increasing"
            )));
        }
        if !(th > tl) {
            return Err(Error::Config(format!(
                "temperature range [{tl}, {th}] must be increasing"
            )));
        }
        for &t in &[tl, 0.5 * (tl + th), th] {
            for &w in &[wl, 0.5 * (wl + wh), wh] {
                let n = self.evaluate(w, t);
                if !(1.5..3.0).contains(&n) {
                    return Err(Error::Config(format!(
                        "index {n:.4} at lambda = {:.1} nm, T = {t:.1} C outside (1.5, 3.0); \
                         coefficient set rejected",
                        w * 1e9
                    )));
                }
            }
        }
        Ok(())
    }

    /// Raw evaluation with no range checks; `lambda` in meters, `t` in °C.
    fn evaluate(&self, lambda: f64, t: f64) -> f64 {
        let l2 = (lambda * 1e6).powi(2);
        let c = &self.coefficients;
        let n2 = match self.form {
            SellmeierForm::TSquared => {
                let tk2 = (t + 273.15).powi(2);
                let pole = c[2] + c[9] * tk2;
                c[0] + (c[1] + c[8] * tk2) / (l2 - pole * pole)
                    + c[4] / (l2 - c[5] * c[5])
                    + c[6] / (l2 - c[7] * c[7])
                    + c[3] * l2
            }
            SellmeierForm::TProduct => {
                let f = (t - c[10]) * (t + c[11]);
                let pole = c[2] + c[8] * f;
                c[0] + c[6] * f
                    + (c[1] + c[7] * f) / (l2 - pole * pole)
                    + (c[3] + c[9] * f) / (l2 - c[4] * c[4])
                    - c[5] * l2
            }
        };
        n2.sqrt()
    }

    fn check_range(&self, lambda: f64, t: f64) -> Result<()> {
        let (wl, wh) = self.wavelength_range;
        if !(wl..=wh).contains(&lambda) {
            return Err(Error::out_of_range("wavelength (m)", lambda, wl, wh));
        }
        let (tl, th) = self.temperature_range;
        if !(tl..=th).contains(&t) {
            return Err(Error::out_of_range("temperature (C)", t, tl, th));
        }
        Ok(())
    }
}

/// Extraordinary refractive index at vacuum wavelength `lambda` (m) and
/// crystal temperature `t` (°C). Any calibration offset is applied by the
/// caller (see [`CrystalSpec::index`]).
pub fn refractive_index(lambda: f64, t: f64, set: &SellmeierSet) -> Result<f64> {
    set.check_range(lambda, t)?;
    let n = set.evaluate(lambda, t);
    if !(1.5..3.0).contains(&n) {
        return Err(Error::Numerical(format!(
            "refractive index {n:.4} outside (1.5, 3.0) at lambda = {:.2} nm, T = {t:.2} C",
            lambda * 1e9
        )));
    }
    Ok(n)
}

/// Internal propagation angle for an external (in-air) angle `theta_ext`
/// relative to the crystal-face normal: sin θ_ext = n_e · sin θ_int.
pub fn external_to_internal_angle(
    theta_ext: f64,
    lambda: f64,
    t: f64,
    set: &SellmeierSet,
) -> Result<f64> {
    if theta_ext.abs() >= std::f64::consts::FRAC_PI_2 {
        return Err(Error::out_of_range(
            "external angle (rad)",
            theta_ext,
            -std::f64::consts::FRAC_PI_2,
            std::f64::consts::FRAC_PI_2,
        ));
    }
    let n = refractive_index(lambda, t, set)?;
    Ok((theta_ext.sin() / n).asin())
}

/// Inverse of [`external_to_internal_angle`].
pub fn internal_to_external_angle(
    theta_int: f64,
    lambda: f64,
    t: f64,
    set: &SellmeierSet,
) -> Result<f64> {
    let n = refractive_index(lambda, t, set)?;
    let s = n * theta_int.sin();
    if s.abs() > 1.0 {
        return Err(Error::Geometry(format!(
            "internal angle {theta_int:.4e} rad is beyond the critical angle (n sin = {s:.4})"
        )));
    }
    Ok(s.asin())
}

/// Linear thermal expansion of the poling period.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ThermalExpansion {
    /// Linear expansion coefficient along the poling direction, 1/°C.
    pub alpha: f64,
    /// Temperature at which the nominal poling period was measured, °C.
    pub reference_t: f64,
}

/// Geometry, poling, QPM order, dispersion data, and calibration offset for
/// one crystal.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrystalSpec {
    /// Crystal length along the pump, meters.
    pub length: f64,
    /// Nominal poling period, meters.
    pub poling_period: f64,
    /// Quasi-phase-matching order; positive odd integer.
    pub qpm_order: u32,
    pub sellmeier: SellmeierSet,
    pub thermal_expansion: Option<ThermalExpansion>,
    /// Additive correction applied to the temperature of every dispersion
    /// query, °C. Compensates the absolute placement error of the
    /// coefficient set; determined once by phase-match calibration.
    pub temp_calibration_offset: f64,
    /// Nonlinear coefficient d33, pm/V. Carried as metadata only; the
    /// simulation does not predict absolute pair rates.
    pub d33: f64,
}

impl CrystalSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0) {
            return Err(Error::Config(format!(
                "crystal length must be positive, got {:e}",
                self.length
            )));
        }
        if !(self.poling_period > 0.0) {
            return Err(Error::Config(format!(
                "poling period must be positive, got {:e}",
                self.poling_period
            )));
        }
        if self.qpm_order == 0 || self.qpm_order % 2 == 0 {
            return Err(Error::Config(format!(
                "qpm order must be a positive odd integer, got {}",
                self.qpm_order
            )));
        }
        self.sellmeier.validate()?;
        let (tl, th) = self.sellmeier.temperature_range;
        for t in [tl, th] {
            if self.poling_period_at(t) <= 0.0 {
                return Err(Error::Config(format!(
                    "poling period is nonpositive at T = {t} C"
                )));
            }
        }
        Ok(())
    }

    /// Effective poling period at temperature `t` (°C); the nominal period
    /// when no thermal expansion model is present. The calibration offset is
    /// not applied here: it corrects the index model, not the physical
    /// grating.
    pub fn poling_period_at(&self, t: f64) -> f64 {
        match self.thermal_expansion {
            Some(te) => self.poling_period * (1.0 + te.alpha * (t - te.reference_t)),
            None => self.poling_period,
        }
    }

    /// Grating wavevector 2π·m/Λ(T), rad/m.
    pub fn grating_wavevector(&self, t: f64) -> f64 {
        2.0 * std::f64::consts::PI * self.qpm_order as f64 / self.poling_period_at(t)
    }

    /// Extraordinary index with the calibration offset applied.
    pub fn index(&self, lambda: f64, t: f64) -> Result<f64> {
        refractive_index(lambda, t + self.temp_calibration_offset, &self.sellmeier)
    }

    /// Wavevector magnitude k = 2π·n_e/λ (rad/m), calibration applied.
    pub fn wavevector(&self, lambda: f64, t: f64) -> Result<f64> {
        Ok(2.0 * std::f64::consts::PI * self.index(lambda, t)? / lambda)
    }

    /// Internal angle for an external collection angle, calibration applied.
    pub fn internal_angle(&self, theta_ext: f64, lambda: f64, t: f64) -> Result<f64> {
        external_to_internal_angle(
            theta_ext,
            lambda,
            t + self.temp_calibration_offset,
            &self.sellmeier,
        )
    }
}

/// Wavevector magnitude from a crystal at (λ, T); thin wrapper kept for
/// symmetry with [`refractive_index`].
pub fn wavevector(lambda: f64, t: f64, crystal: &CrystalSpec) -> Result<f64> {
    crystal.wavevector(lambda, t)
}
