use std::fmt;
use std::str::FromStr;

use crate::block::{LabelSet, LabeledBlockMatrix};
use crate::error::{Error, Result};
use crate::linalg::{Operator, Tolerances, ONE};
use crate::models::{SlhModel, StratGenerator};
use crate::network::{feedback_slh, feedback_strat, series_strat};

use super::build::build_open_loop;
use super::NetworkSpec;

/// Which side of the calculus performs the feedback reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// SLH feedback formula.
    Ito,
    /// Schur complement of the Stratonovich generator.
    Strat,
    /// Both, cross-checked.
    Both,
}

impl FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ito" => Ok(Route::Ito),
            "strat" => Ok(Route::Strat),
            "both" => Ok(Route::Both),
            other => Err(Error::InvalidValue(format!("unknown route {other:?}"))),
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::Ito => "ito",
            Route::Strat => "strat",
            Route::Both => "both",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionResult {
    pub route: Route,
    pub slh: SlhModel,
    /// The reduced Stratonovich generator (routes `strat` and `both`).
    pub strat: Option<StratGenerator>,
    /// Largest element-wise disagreement between the routes (route `both`).
    pub discrepancy: Option<f64>,
}

/// Generator of `(e^{iθ} I, 0, 0)`: `E_kk = -2 tan(θ/2) I`.
fn phase_generator(channels: &LabelSet, dim: usize, theta: f64, tol: &Tolerances) -> Result<StratGenerator> {
    let e_kk = LabeledBlockMatrix::identity(channels.clone(), dim).scale(ONE * (-2.0 * (theta / 2.0).tan()));
    let zero_col = vec![Operator::zeros(dim); channels.len()];
    StratGenerator::from_blocks(channels.clone(), Operator::zeros(dim), zero_col, e_kk, tol)
}

/// Reduces a network: concatenate, absorb the wiring, feed back the internal channels.
///
/// On the Stratonovich side, wiring whose absorbed model has no Stratonovich
/// form (a cascade routes through a swap, for instance) is handled by phasing
/// the external inputs, reducing, and removing the phase with a series product.
///
/// With [`Route::Both`] the Stratonovich result is converted back to SLH form
/// and compared with the Itô result (and, when the Itô result is
/// representable, compared again in Stratonovich form). A disagreement above
/// `10 * eq_tol` is [`Error::CrossCheck`].
pub fn reduce_network(spec: &NetworkSpec, route: Route, tol: &Tolerances) -> Result<ReductionResult> {
    let open = build_open_loop(spec, tol)?;
    let ito = |open: &super::OpenLoop| feedback_slh(&open.model, &open.split, tol);
    let strat = |open: &super::OpenLoop| -> Result<StratGenerator> {
        let e = match (&open.strat, &open.strat_error) {
            (Some(e), _) => e,
            (None, Some(err)) => return Err(err.clone()),
            (None, None) => unreachable!("open loop carries a generator or the reason it has none"),
        };
        let reduced = feedback_strat(e, &open.split, tol)?;
        match open.strat_gauge {
            None => Ok(reduced),
            Some(theta) => {
                let channels = reduced.channels();
                let undo = phase_generator(&channels, reduced.dim(), -theta, tol)?;
                series_strat(&reduced, &undo, tol)
            }
        }
    };

    match route {
        Route::Ito => Ok(ReductionResult {
            route,
            slh: ito(&open)?,
            strat: None,
            discrepancy: None,
        }),
        Route::Strat => {
            let e = strat(&open)?;
            Ok(ReductionResult {
                route,
                slh: e.to_slh(tol)?,
                strat: Some(e),
                discrepancy: None,
            })
        }
        Route::Both => {
            let slh = ito(&open)?;
            let e = strat(&open)?;
            let mut discrepancy = e.to_slh(tol)?.max_abs_diff(&slh);
            if slh.is_strat_representable(tol) {
                discrepancy = discrepancy.max(StratGenerator::from_slh(&slh, tol)?.max_abs_diff(&e));
            }
            let limit = 10.0 * tol.eq_tol;
            if discrepancy.is_nan() || discrepancy > limit {
                return Err(Error::CrossCheck {
                    discrepancy,
                    tolerance: limit,
                });
            }
            Ok(ReductionResult {
                route,
                slh,
                strat: Some(e),
                discrepancy: Some(discrepancy),
            })
        }
    }
}
