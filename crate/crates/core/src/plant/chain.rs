use super::filters::{whitened_cross_kernels, FilterSet};
use super::model::PlantModel;
use super::photon::{photon_kernels, PhotonKernels, PhotonMode};
use super::spectrum::{output_spectrum, spectral_factorize, CausalFactor, RationalSpectrum};
use crate::error::Result;

/// Everything the conditional state needs from one plant and photon mode.
#[derive(Debug, Clone)]
pub struct Conditioning {
    pub plant: PlantModel,
    pub spectrum: RationalSpectrum,
    pub factor: CausalFactor,
    pub filters: FilterSet,
    pub photon: PhotonKernels,
}

impl Conditioning {
    pub fn new(plant: PlantModel, mode: PhotonMode) -> Result<Self> {
        let spectrum = output_spectrum(&plant)?;
        let factor = spectral_factorize(&spectrum)?;
        let filters = whitened_cross_kernels(&plant, &factor)?;
        let photon = photon_kernels(&plant, &factor, &filters, mode)?;
        Ok(Conditioning {
            plant,
            spectrum,
            factor,
            filters,
            photon,
        })
    }
}
