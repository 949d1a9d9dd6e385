//! Comparison of a synthesized parameter set with the oracle on a grid.

use railsynth::model::{ConstrainedRailwaySystem, ParamId};
use railsynth::pta::Valuation;
use railsynth::synth::{ef_synth, Status, SynthError, SynthOptions, SynthStats};
use railsynth::translate::{translate_system, TranslateError};
use railsynth::Rational;

use crate::search::{search, OracleError};

/// Values `lo, lo + step, ..., <= hi` of one parameter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridAxis {
    pub param: ParamId,
    pub lo: i64,
    pub hi: i64,
    pub step: i64,
}

impl GridAxis {
    pub fn new(param: &str, lo: i64, hi: i64, step: i64) -> Self {
        GridAxis {
            param: ParamId::from(param),
            lo,
            hi,
            step: step.max(1),
        }
    }

    fn values(&self) -> impl Iterator<Item = i64> + '_ {
        (self.lo..=self.hi).step_by(self.step as usize)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Disagreement {
    pub valuation: Valuation,
    pub synth: bool,
    pub oracle: bool,
}

#[derive(Clone, Debug)]
pub struct GridReport {
    pub status: Status,
    pub result: String,
    pub points: usize,
    pub disagreements: Vec<Disagreement>,
    /// Points where the oracle search hit its horizon.
    pub saturated: usize,
    pub stats: SynthStats,
}

impl GridReport {
    pub fn is_clean(&self) -> bool {
        self.disagreements.is_empty()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GridError {
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("ERR_GRID: parameter {0} has no axis")]
    MissingAxis(ParamId),
}

/// Synthesizes once, then checks membership of every grid point against the
/// oracle. Every declared parameter needs an axis.
pub fn grid_compare(
    sys: &ConstrainedRailwaySystem,
    axes: &[GridAxis],
    opts: &SynthOptions,
) -> Result<GridReport, GridError> {
    for p in &sys.params {
        if !axes.iter().any(|a| a.param == p.id) {
            return Err(GridError::MissingAxis(p.id.clone()));
        }
    }
    let problem = translate_system(sys)?;
    let out = ef_synth(&problem, opts)?;
    let mut report = GridReport {
        status: out.status,
        result: out.result.to_string(),
        points: 0,
        disagreements: vec![],
        saturated: 0,
        stats: out.stats.clone(),
    };
    let mut points: Vec<Valuation> = vec![Valuation::new()];
    for a in axes {
        points = points
            .into_iter()
            .flat_map(|v| {
                a.values().map(move |x| {
                    let mut v = v.clone();
                    v.insert(a.param.clone(), Rational::from_integer(x));
                    v
                })
            })
            .collect();
    }
    for v in points {
        let synth = out.result.contains(&v);
        let oracle = search(sys, &v, None)?;
        report.points += 1;
        if oracle.saturated {
            report.saturated += 1;
        }
        if synth != oracle.feasible {
            report.disagreements.push(Disagreement {
                valuation: v,
                synth,
                oracle: oracle.feasible,
            });
        }
    }
    Ok(report)
}
