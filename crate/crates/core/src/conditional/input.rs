use crate::error::{Error, Result};
use crate::linalg::Vec2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Tolerance on the sum of mixture weights.
const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Optical state injected into the photon mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum OpticalInput {
    Vacuum,
    Coherent {
        zeta: C64,
    },
    SinglePhoton,
    /// Proper P-representation `sum_k w_k |zeta_k><zeta_k|`.
    CoherentMixture {
        components: Vec<(f64, C64)>,
    },
}

impl OpticalInput {
    pub fn validate(&self) -> Result<()> {
        match self {
            OpticalInput::Coherent { zeta } if !zeta.is_finite() => Err(Error::InvalidParameter {
                field: "zeta",
                reason: format!("coherent amplitude must be finite, got {zeta}"),
            }),
            OpticalInput::CoherentMixture { components } => {
                if components.is_empty() {
                    return Err(Error::InvalidParameter {
                        field: "components",
                        reason: "mixture has no components".into(),
                    });
                }
                let mut sum = 0.0;
                for (w, z) in components {
                    if !(w.is_finite() && *w >= 0.0) || !z.is_finite() {
                        return Err(Error::InvalidParameter {
                            field: "components",
                            reason: format!("component ({w}, {z}) needs a finite weight >= 0"),
                        });
                    }
                    sum += w;
                }
                if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
                    return Err(Error::InvalidParameter {
                        field: "components",
                        reason: format!("weights sum to {sum}, not 1"),
                    });
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Weighted coherent amplitudes of a proper P-representation.
    pub fn components(&self) -> Result<Vec<(f64, C64)>> {
        self.validate()?;
        match self {
            OpticalInput::Vacuum => Ok(vec![(1.0, C64::default())]),
            OpticalInput::Coherent { zeta } => Ok(vec![(1.0, *zeta)]),
            OpticalInput::CoherentMixture { components } => Ok(components.clone()),
            OpticalInput::SinglePhoton => Err(Error::Unsupported(
                "the single-photon P-representation is not a proper distribution".into(),
            )),
        }
    }
}

/// How an outcome was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Provenance {
    MostProbable,
    Sampled { seed: u64 },
    Explicit,
}

/// Sufficient statistics of the record: the photon-mode projection `Z` and
/// the conditional means `x_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementOutcome {
    pub z: C64,
    pub x_c: Vec2,
    pub provenance: Provenance,
}

impl MeasurementOutcome {
    /// Given `Z` with the means placed at the origin.
    pub fn explicit(z: C64) -> Self {
        MeasurementOutcome {
            z,
            x_c: [0.0, 0.0],
            provenance: Provenance::Explicit,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.z.is_finite() || !self.x_c.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "outcome",
                reason: format!("non-finite outcome Z = {}, x_c = {:?}", self.z, self.x_c),
            });
        }
        Ok(())
    }
}
