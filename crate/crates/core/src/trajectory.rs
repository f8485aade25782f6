//! Time-ordered density snapshots.

use std::fmt;
use std::sync::Arc;

use crate::density::{Density, Grid};
use crate::error::{Error, Result};
use crate::fpe::FpeModel;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub density: Density,
}

/// Where a trajectory came from. Determines which rate formula the verifier
/// uses for stationary residuals.
#[derive(Clone)]
pub enum Source {
    Fpe(Arc<dyn FpeModel>),
    Quantum { gamma: f64, hbar: f64 },
    Mixing,
    File,
}

impl Source {
    pub fn tag(&self) -> &'static str {
        match self {
            Source::Fpe(_) => "fpe",
            Source::Quantum { .. } => "quantum",
            Source::Mixing => "mixing",
            Source::File => "file",
        }
    }
}

impl fmt::Debug for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Fpe(m) => write!(f, "Fpe({})", m.name()),
            Source::Quantum { gamma, hbar } => write!(f, "Quantum {{ gamma: {gamma}, hbar: {hbar} }}"),
            Source::Mixing => f.write_str("Mixing"),
            Source::File => f.write_str("File"),
        }
    }
}

/// Non-empty, strictly time-ordered snapshots sharing one grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    snapshots: Vec<Snapshot>,
    source: Source,
}

impl Trajectory {
    pub fn new(snapshots: Vec<Snapshot>, source: Source) -> Result<Self> {
        let first = snapshots
            .first()
            .ok_or_else(|| Error::InvalidTrajectory("no snapshots".into()))?;
        let grid = first.density.grid();
        for (i, s) in snapshots.iter().enumerate() {
            if !s.t.is_finite() {
                return Err(Error::InvalidTrajectory(format!("snapshot {i} has time {}", s.t)));
            }
            grid.check_same(&s.density.grid())?;
            if i > 0 && s.t <= snapshots[i - 1].t {
                return Err(Error::InvalidTrajectory(format!(
                    "times not strictly increasing: {} then {}",
                    snapshots[i - 1].t,
                    s.t
                )));
            }
        }
        Ok(Self { snapshots, source })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, Density)>, source: Source) -> Result<Self> {
        Self::new(
            pairs
                .into_iter()
                .map(|(t, density)| Snapshot { t, density })
                .collect(),
            source,
        )
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    pub fn grid(&self) -> Grid {
        self.snapshots[0].density.grid()
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn first(&self) -> &Snapshot {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectory is non-empty")
    }

    /// Same densities with the time axis reversed (`t -> t_last - t`).
    pub fn reversed(&self) -> Self {
        let t_end = self.last().t;
        let t0 = self.first().t;
        let snapshots = self
            .snapshots
            .iter()
            .rev()
            .map(|s| Snapshot {
                t: t0 + (t_end - s.t),
                density: s.density.clone(),
            })
            .collect();
        Self {
            snapshots,
            source: Source::File,
        }
    }
}
