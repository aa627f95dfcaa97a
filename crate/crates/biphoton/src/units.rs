//! Physical constants and unit helpers.

/// Speed of light in vacuum, m/s.
pub const C_VACUUM: f64 = 299_792_458.0;

/// Angular frequency (rad/s) of light with vacuum wavelength `lambda` (m).
pub fn omega_from_lambda(lambda: f64) -> f64 {
    2.0 * std::f64::consts::PI * C_VACUUM / lambda
}

/// Vacuum wavelength (m) of light with angular frequency `omega` (rad/s).
pub fn lambda_from_omega(omega: f64) -> f64 {
    2.0 * std::f64::consts::PI * C_VACUUM / omega
}

pub fn nm_to_m(nm: f64) -> f64 {
    nm * 1e-9
}

pub fn m_to_nm(m: f64) -> f64 {
    m * 1e9
}

pub fn um_to_m(um: f64) -> f64 {
    um * 1e-6
}

pub fn m_to_um(m: f64) -> f64 {
    m * 1e6
}
