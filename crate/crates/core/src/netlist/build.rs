use std::collections::HashMap;

use num_complex::Complex64;

use crate::block::{LabelSet, LabeledBlockMatrix};
use crate::error::{Error, Result};
use crate::linalg::{Operator, Tolerances};
use crate::models::{SlhModel, StratGenerator};
use crate::network::{
    concat_slh, concat_strat, permutation_strat, permute_inputs, series_strat, ChannelSplit, Permutation,
};

use super::NetworkSpec;

/// The concatenated network with its wiring absorbed into `S`.
///
/// Connected outputs become the internal channels. `routing` is a permutation
/// of all channels (in declaration order) with `routing(a)` the input fed by
/// output `a`: the connection target for a connected output, and otherwise the
/// next unconnected input in declaration order. After absorption, feedback
/// with the identity adjacency on the internal channels realises the wiring,
/// and each surviving channel is named after its output.
#[derive(Debug, Clone)]
pub struct OpenLoop {
    /// Concatenation of the components, before routing.
    pub concatenated: SlhModel,
    /// `concatenated` with `routing` absorbed into its input columns.
    pub model: SlhModel,
    /// Stratonovich form of `model`, when every component and the absorbed
    /// model are representable.
    pub strat: Option<StratGenerator>,
    /// Why `strat` is missing.
    pub strat_error: Option<Error>,
    /// Phase `θ` applied to the external input columns before conversion,
    /// when the routed model itself has no Stratonovich form. `strat` then
    /// describes `S D` with `D = e^{iθ}` on external inputs, and the reduced
    /// generator must be composed with `D^{-1}` afterwards.
    pub strat_gauge: Option<f64>,
    pub split: ChannelSplit,
    pub routing: Permutation,
    /// Components whose own Stratonovich form does not exist.
    pub not_representable: Vec<(String, Error)>,
}

fn routing(spec: &NetworkSpec, channels: &LabelSet) -> Result<(Permutation, LabelSet)> {
    let index = |label: String| channels.position(&label.as_str().into()).ok_or(Error::UnknownPort(label));
    let mut target: HashMap<usize, usize> = HashMap::new();
    for c in &spec.connections {
        target.insert(index(c.from.label())?, index(c.to.label())?);
    }
    let fed: std::collections::HashSet<usize> = target.values().copied().collect();
    let mut free_inputs = (0..channels.len()).filter(|k| !fed.contains(k));
    let mut image = Vec::with_capacity(channels.len());
    let mut internal = Vec::new();
    for a in 0..channels.len() {
        match target.get(&a) {
            Some(&t) => {
                image.push(t);
                internal.push(channels.labels()[a].clone());
            }
            None => image.push(free_inputs.next().expect("as many free inputs as free outputs")),
        }
    }
    Ok((Permutation::new(image)?, LabelSet::new(internal)?))
}

/// Stratonovich form of the routed model: concatenation, then a series product
/// with the routing's own generator when it has no even cycle, else a direct
/// conversion of the routed SLH model.
fn routed_strat(
    gens: &[StratGenerator],
    routed: &SlhModel,
    pi: &Permutation,
    tol: &Tolerances,
) -> Result<StratGenerator> {
    let concat = concat_strat(gens)?;
    if pi.is_identity() {
        return Ok(concat);
    }
    let channels = routed.channels();
    if !pi.has_even_cycle() {
        let e_kk = permutation_strat(pi, channels, routed.dim(), tol)?;
        let zero_col = vec![Operator::zeros(routed.dim()); channels.len()];
        let eta = StratGenerator::from_blocks(channels.clone(), Operator::zeros(routed.dim()), zero_col, e_kk, tol)?;
        if let Ok(e) = series_strat(&concat, &eta, tol) {
            return Ok(e);
        }
    }
    StratGenerator::from_slh(routed, tol)
}

/// Phases tried, in order, when the routed model has no Stratonovich form.
const GAUGE_PHASES: [f64; 6] = [
    std::f64::consts::FRAC_PI_2,
    -std::f64::consts::FRAC_PI_2,
    std::f64::consts::FRAC_PI_3,
    -std::f64::consts::FRAC_PI_3,
    2.0 * std::f64::consts::FRAC_PI_3,
    -2.0 * std::f64::consts::FRAC_PI_3,
];

/// `m` with every input column outside `internal` multiplied by `e^{iθ}`.
pub(crate) fn phase_external_inputs(m: &SlhModel, internal: &LabelSet, theta: f64) -> SlhModel {
    let phase = Complex64::from_polar(1.0, theta);
    let s = LabeledBlockMatrix::from_fn(m.channels().clone(), m.channels().clone(), m.dim(), |r, c| {
        let entry = m.s().entry(r, c).expect("labels from the model");
        if internal.contains(c) {
            entry.clone()
        } else {
            entry.scale(phase)
        }
    });
    SlhModel::from_parts(m.channels().clone(), s, m.l_column().clone(), m.h().clone())
}

fn gauged_strat(m: &SlhModel, split: &ChannelSplit, tol: &Tolerances) -> Option<(StratGenerator, f64)> {
    if split.external().is_empty() {
        return None;
    }
    GAUGE_PHASES.iter().find_map(|&theta| {
        StratGenerator::from_slh(&phase_external_inputs(m, split.internal(), theta), tol)
            .ok()
            .map(|e| (e, theta))
    })
}

pub fn build_open_loop(spec: &NetworkSpec, tol: &Tolerances) -> Result<OpenLoop> {
    let models = spec
        .components
        .iter()
        .map(|c| c.slh(tol))
        .collect::<Result<Vec<_>>>()?;
    let concatenated = concat_slh(&models)?;
    let channels = concatenated.channels().clone();
    let (pi, internal) = routing(spec, &channels)?;
    let model = permute_inputs(&concatenated, &pi)?;
    let split = ChannelSplit::from_internal(&channels, internal)?;

    let mut gens = Vec::new();
    let mut not_representable = Vec::new();
    for c in &spec.components {
        match c.strat(tol) {
            Ok(g) => gens.push(g),
            Err(e) if e.is_undefined_reduction() => not_representable.push((c.name.clone(), e)),
            Err(e) => return Err(e),
        }
    }
    let (strat, strat_error, strat_gauge) = if let Some((_, e)) = not_representable.first() {
        (None, Some(e.clone()), None)
    } else {
        match routed_strat(&gens, &model, &pi, tol) {
            Ok(e) => (Some(e), None, None),
            Err(e) if e.is_undefined_reduction() => match gauged_strat(&model, &split, tol) {
                Some((g, theta)) => (Some(g), None, Some(theta)),
                None => (None, Some(e), None),
            },
            Err(e) => return Err(e),
        }
    };

    Ok(OpenLoop {
        concatenated,
        model,
        strat,
        strat_error,
        strat_gauge,
        split,
        routing: pi,
        not_representable,
    })
}
