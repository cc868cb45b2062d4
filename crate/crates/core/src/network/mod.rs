//! Composition rules for networks of open systems: concatenation, series
//! product and instantaneous feedback, each on SLH, `V`-matrix and
//! Stratonovich data, plus the diagnostics that say when a reduction exists.

mod adjacency;
mod compose;
mod diagnostics;
mod feedback;
mod lindblad;

pub use adjacency::{
    adjacency_matrix, absorb_adjacency, permutation_spectrum_defect, permutation_strat, permute_inputs,
    predicted_spectrum, Permutation,
};
pub use compose::{concat_slh, concat_strat, series_slh, series_strat};
pub use diagnostics::{
    e_ii_representability, representability_report, script_e_ii, script_s_ii, wellposedness,
    RepresentabilityReport, WellPosednessReport,
};
pub use feedback::{feedback_g_schur, feedback_slh, feedback_slh_with_eta, feedback_strat, feedback_v};
pub use lindblad::lindblad_generator;

use crate::block::{Label, LabelSet};
use crate::error::{Error, Result};

/// Partition of a channel set into external `e` and internal `i` channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelSplit {
    external: LabelSet,
    internal: LabelSet,
}

impl ChannelSplit {
    pub fn new(external: LabelSet, internal: LabelSet) -> Result<Self> {
        if let Some(shared) = external.iter().find(|l| internal.contains(l)) {
            return Err(Error::LabelCollision(shared.to_string()));
        }
        Ok(Self { external, internal })
    }

    /// Marks `internal` as fed back; everything else in `channels` stays external,
    /// in the order of `channels`.
    pub fn for_channels(channels: &LabelSet, internal: &[&str]) -> Result<Self> {
        let internal = LabelSet::new(internal.iter().map(|s| Label::new(*s)).collect::<Result<Vec<_>>>()?)?;
        Self::from_internal(channels, internal)
    }

    pub fn from_internal(channels: &LabelSet, internal: LabelSet) -> Result<Self> {
        if let Some(missing) = internal.iter().find(|l| !channels.contains(l)) {
            return Err(Error::UnknownLabel(missing.to_string()));
        }
        Ok(Self {
            external: channels.difference(&internal),
            internal,
        })
    }

    pub fn external(&self) -> &LabelSet {
        &self.external
    }

    pub fn internal(&self) -> &LabelSet {
        &self.internal
    }

    /// Checks that `e ∪ i` is exactly `channels`.
    pub(crate) fn check_covers(&self, channels: &LabelSet) -> Result<()> {
        let union = self.external.concat(&self.internal)?;
        if !union.same_members(channels) {
            if let Some(missing) = union.iter().find(|l| !channels.contains(l)) {
                return Err(Error::UnknownLabel(missing.to_string()));
            }
            return Err(Error::InvalidValue(
                "channel split must cover every channel of the model".into(),
            ));
        }
        Ok(())
    }
}
