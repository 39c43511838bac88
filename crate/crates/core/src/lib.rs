//! Emission spectra of a dipole emitter coupled to a whispering-gallery
//! microdisk mode and to the radiation continuum.
//!
//! * [`units`]: typed rates, frequencies and geometry.
//! * [`coupling`]: coupling rate, mode volume and Purcell factor.
//! * [`scatterer`]: backscatter splitting and scattering loss of a
//!   sub-wavelength particle on the disk.
//! * [`dynamics`]: master-equation moments, regression propagator and the
//!   numeric spectrum.
//! * [`spectrum`]: closed-form Fano spectra.
//! * [`fanofit`]: synthetic traces and least-squares extraction of κ and F.
//!
//! All rates are stored in rad/s. JSON and CSV use ordinary frequencies in Hz.

pub mod coupling;
pub mod dynamics;
pub mod error;
pub mod fanofit;
pub mod par;
pub mod scatterer;
pub mod spectrum;
pub mod trace;
pub mod units;

pub use error::{Error, Result};
pub use par::Execution;
pub use spectrum::CollectionChannel;
pub use trace::{Axis, SpectrumTrace};
pub use units::{AngularFrequency, Rate, SystemParams};
