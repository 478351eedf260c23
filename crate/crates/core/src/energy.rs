//! Energy relation, the step potential `U(E)` over an eigenvalue ladder, and
//! the jumps in `k` at level transitions.
//!
//! For `c = 1 + 2i` the vortex time constant gives `E = 6 k^2 hbar^2 / m`, i.e.
//! `E = (12/5) U`. Replacing `U` by the step potential pins `E` to the highest
//! ladder level `E_j <= E`, so `k = sqrt(m E_j / (6 hbar^2))` is piecewise constant.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::schrodinger::PhysicalParams;
use crate::vortex::{imag_solution, k_from_potential, Branch, VortexSolution};

const POTENTIAL_PER_ENERGY: f64 = 5.0 / 12.0;
const ENERGY_PER_POTENTIAL: f64 = 12.0 / 5.0;

/// `E = (12/5) U_f`.
pub fn energy_of_potential(u_f: f64) -> Result<f64> {
    ensure_finite("U_f", u_f)?;
    if u_f < 0.0 {
        return Err(Error::Domain(format!("potential U_f must be non-negative, got {u_f}")));
    }
    Ok(ENERGY_PER_POTENTIAL * u_f)
}

/// `E = 6 k^2 hbar^2 / m`, from the time constant of the vortex phase.
pub fn energy_from_k(k: f64, params: &PhysicalParams) -> f64 {
    6.0 * k * k * params.hbar() * params.hbar() / params.mass()
}

/// Unit step with `lambda(0) = 1`.
fn step(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Strictly increasing, non-empty list of eigenvalues `E_0 < E_1 < ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLadder")]
pub struct EnergyLadder {
    eigenvalues: Vec<f64>,
}

#[derive(Deserialize)]
struct RawLadder {
    eigenvalues: Vec<f64>,
}

impl TryFrom<RawLadder> for EnergyLadder {
    type Error = Error;

    fn try_from(raw: RawLadder) -> Result<Self> {
        Self::new(raw.eigenvalues)
    }
}

impl EnergyLadder {
    pub fn new(eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::Config("energy ladder must contain at least one eigenvalue".into()));
        }
        if let Some(bad) = eigenvalues.iter().find(|e| !e.is_finite()) {
            return Err(Error::Config(format!("eigenvalue {bad} is not finite")));
        }
        if let Some(w) = eigenvalues.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!(
                "eigenvalues must be strictly increasing, found {} followed by {}",
                w[0], w[1]
            )));
        }
        Ok(Self { eigenvalues })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn ground(&self) -> f64 {
        self.eigenvalues[0]
    }

    fn check_energy(&self, energy: f64) -> Result<()> {
        ensure_finite("energy", energy)?;
        if energy < self.ground() {
            return Err(Error::BelowLadder { energy, ground: self.ground() });
        }
        Ok(())
    }

    /// `j` with `j + 1 = sum_i lambda(E - E_i)`.
    pub fn level_index(&self, energy: f64) -> Result<usize> {
        self.check_energy(energy)?;
        let attained: f64 = self.eigenvalues.iter().map(|&e| step(energy - e)).sum();
        Ok(attained as usize - 1)
    }

    /// `U(E)` summed term by term: `(5/12) E_0` for `j = 0`, otherwise
    /// `(5/12) [sum_i lambda(E - E_i) E_i - sum_{i<j} E_i]`.
    pub fn potential_of_energy(&self, energy: f64) -> Result<f64> {
        let j = self.level_index(energy)?;
        if j == 0 {
            return Ok(POTENTIAL_PER_ENERGY * self.ground());
        }
        let attained: f64 = self.eigenvalues.iter().map(|&e| step(energy - e) * e).sum();
        let below: f64 = self.eigenvalues[..j].iter().sum();
        Ok(POTENTIAL_PER_ENERGY * (attained - below))
    }

    pub fn select(&self, energy: f64, params: &PhysicalParams) -> Result<LevelSelection> {
        let j = self.level_index(energy)?;
        let level_energy = self.eigenvalues[j];
        Ok(LevelSelection {
            j,
            level_energy,
            potential: POTENTIAL_PER_ENERGY * level_energy,
            omega: level_energy / params.hbar(),
        })
    }

    /// `k = sqrt(m E_j / (6 hbar^2))` for level `j`.
    pub fn level_k(&self, j: usize, params: &PhysicalParams) -> Result<f64> {
        let e = *self.eigenvalues.get(j).ok_or(Error::LevelIndex { index: j, len: self.len() })?;
        if e < 0.0 {
            return Err(Error::Domain(format!("level E_{j} = {e} is negative; k would be imaginary")));
        }
        Ok((params.mass() * e / 6.0).sqrt() / params.hbar())
    }

    /// `k` at energy `E`, computed through `U(E)` and the potential relation for `k`.
    pub fn quantized_k(&self, energy: f64, params: &PhysicalParams) -> Result<f64> {
        k_from_potential(self.potential_of_energy(energy)?, params)
    }

    /// `dk = sqrt(m / (6 hbar^2)) (sqrt E_j - sqrt E_{j-1})` for `1 <= j < len`.
    pub fn delta_k(&self, j: usize, params: &PhysicalParams) -> Result<f64> {
        if j == 0 || j >= self.len() {
            return Err(Error::LevelIndex { index: j, len: self.len() });
        }
        let (lo, hi) = (self.eigenvalues[j - 1], self.eigenvalues[j]);
        if lo < 0.0 {
            return Err(Error::Domain(format!("level E_{} = {lo} is negative", j - 1)));
        }
        Ok((params.mass() / 6.0).sqrt() / params.hbar() * (hi.sqrt() - lo.sqrt()))
    }
}

/// The level attained at an energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelSelection {
    pub j: usize,
    pub level_energy: f64,
    /// `U(E) = (5/12) E_j`.
    pub potential: f64,
    /// `omega = E_j / hbar`.
    pub omega: f64,
}

/// A vortex whose `k` comes from the ladder level reached at `energy`.
pub fn quantized_solution(
    ladder: &EnergyLadder,
    energy: f64,
    branch: Branch,
    params: &PhysicalParams,
    s: f64,
) -> Result<VortexSolution> {
    imag_solution(branch, ladder.potential_of_energy(energy)?, params, s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub step: usize,
    pub energy: f64,
    pub level: usize,
    pub k: f64,
}

impl TracePoint {
    pub const CSV_HEADER: &'static str = "step,E,j,k";
}

/// A change of level between consecutive schedule steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub step: usize,
    pub from_level: usize,
    pub to_level: usize,
    /// `k` after minus `k` before.
    pub delta_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpTrace {
    pub points: Vec<TracePoint>,
}

impl JumpTrace {
    pub fn jumps(&self) -> Vec<Jump> {
        self.points
            .windows(2)
            .filter(|w| w[0].level != w[1].level)
            .map(|w| Jump { step: w[1].step, from_level: w[0].level, to_level: w[1].level, delta_k: w[1].k - w[0].k })
            .collect()
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", TracePoint::CSV_HEADER)?;
        for p in &self.points {
            writeln!(w, "{},{},{},{}", p.step, crate::output::fmt_f64(p.energy), p.level, crate::output::fmt_f64(p.k))?;
        }
        Ok(())
    }
}

/// Piecewise-constant `k` along an energy schedule.
pub fn k_jump_trace(ladder: &EnergyLadder, schedule: &[f64], params: &PhysicalParams) -> Result<JumpTrace> {
    let points = schedule
        .iter()
        .enumerate()
        .map(|(step, &energy)| {
            let level = ladder.level_index(energy)?;
            Ok(TracePoint { step, energy, level, k: ladder.level_k(level, params)? })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(JumpTrace { points })
}
