//! Quantitative accelerated-test models: acceleration-factor relationships,
//! log-location-scale lifetime models, degradation paths, photodegradation
//! dosage, and censored maximum-likelihood fitting.

pub mod condition;
pub mod datasets;
pub mod degradation;
pub mod error;
pub mod fitml;
pub mod formula;
pub mod io;
pub mod lifetime;
pub mod optim;
pub mod photodeg;
pub mod relationships;
pub mod report;

pub use condition::{Condition, Unit};
pub use error::{Error, Result};
pub use fitml::{fit_ml, FitResult, LifeRecord, Status};
pub use formula::ModelSpec;
pub use lifetime::{Family, LifeDistribution};
pub use relationships::{AccelerationFactor, AccelerationModel, ActivationEnergy, Temperature};
