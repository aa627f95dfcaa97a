//! Simulation of a temperature-tuned, quasi-phase-matched photon-pair source.
//!
//! The library models the full chain from crystal dispersion to counting
//! statistics for a periodically poled MgO-doped stoichiometric LiTaO₃
//! source of frequency-anticorrelated photon pairs:
//!
//! * [`dispersion`] — temperature-dependent extraordinary refractive index,
//!   wavevectors, and crystal-face refraction.
//! * [`phasematch`] — noncollinear odd-order type-0 quasi-phase-matching:
//!   signal/idler roots versus crystal temperature, emission spectra,
//!   bandwidths, and the discreteness tuning curve.
//! * [`twophoton`] — the frequency-entangled two-photon state, quantum-beat
//!   coincidence traces at a beamsplitter (closed form and spectral
//!   quadrature), visibility limits, and trace fitting.
//! * [`counting`] — accidental coincidences, coincidence figures of merit,
//!   and a seeded Poissonian count generator.
//! * [`config`] — TOML configuration for crystal, pump, beamsplitter, and
//!   counting parameters.
//! * [`csvio`] — plot-ready CSV emission and trace parsing.
//!
//! All quantities are SI (meters, seconds, radians, hertz) unless a name
//! says otherwise; temperatures are degrees Celsius throughout.

pub mod config;
pub mod counting;
pub mod csvio;
pub mod dispersion;
pub mod error;
pub mod phasematch;
pub mod twophoton;
pub mod units;

mod numerics;

pub use error::{Error, Result};
