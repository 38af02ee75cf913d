//! Coulomb-potential channels around an atom.
//!
//! For a center atom `i` and sphere radius `ρ`, the channel of atom type `z`
//! at sphere point `x` is `Σ_{j≠i, z_j=z} z_i z / |p_i + ρx − p_j|`.
//! Channels are ordered by ascending charge over all atoms in the molecule.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gft::S2Signal;
use crate::grids::{Bandwidth, Rotation, S2Grid};

/// Bandwidth used for molecule signals unless asked otherwise.
pub const DEFAULT_BANDWIDTH: usize = 10;

/// Closest an atom may come to a sample point before the potential is refused.
pub const SINGULAR_DISTANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub charge: f64,
    pub position: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoleculeSpec {
    pub atoms: Vec<Atom>,
    pub radius: f64,
}

impl MoleculeSpec {
    pub fn new(atoms: Vec<Atom>, radius: f64) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Invalid("molecule has no atoms".into()));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Invalid(format!("sphere radius must be positive, got {radius}")));
        }
        for (k, a) in atoms.iter().enumerate() {
            if a.position.iter().any(|v| !v.is_finite()) {
                return Err(Error::Invalid(format!("atom {k} has a non-finite position")));
            }
            if !(a.charge > 0.0 && a.charge.is_finite()) {
                return Err(Error::Invalid(format!("atom {k} charge must be positive, got {}", a.charge)));
            }
        }
        Ok(Self { atoms, radius })
    }

    /// Parses lines of `z px py pz`; blank lines and `#` comments are skipped.
    pub fn parse(text: &str, radius: f64) -> Result<Self> {
        let mut atoms = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields = line
                .split_whitespace()
                .map(f64::from_str)
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", n + 1)))?;
            let [charge, x, y, z] = fields[..] else {
                return Err(Error::Parse(format!("line {}: expected 4 numbers, found {}", n + 1, fields.len())));
            };
            atoms.push(Atom {
                charge,
                position: [x, y, z],
            });
        }
        Self::new(atoms, radius)
    }

    /// Distinct charges in ascending order; one channel each.
    pub fn types(&self) -> Vec<f64> {
        let mut t: Vec<f64> = self.atoms.iter().map(|a| a.charge).collect();
        t.sort_by(f64::total_cmp);
        t.dedup();
        t
    }

    /// Moves every atom by `shift`.
    pub fn translated(&self, shift: [f64; 3]) -> Self {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom {
                charge: a.charge,
                position: std::array::from_fn(|k| a.position[k] + shift[k]),
            })
            .collect();
        Self {
            atoms,
            radius: self.radius,
        }
    }

    /// Rotates every atom by `r` about the position of atom `center`.
    pub fn rotated_about(&self, center: usize, r: &Rotation) -> Self {
        let c = self.atoms[center].position;
        let atoms = self
            .atoms
            .iter()
            .map(|a| {
                let rel = r.apply(std::array::from_fn(|k| a.position[k] - c[k]));
                Atom {
                    charge: a.charge,
                    position: std::array::from_fn(|k| c[k] + rel[k]),
                }
            })
            .collect();
        Self {
            atoms,
            radius: self.radius,
        }
    }
}

/// One channel per atom type, sampled on the sphere of radius `m.radius` around atom `center`.
pub fn molecule_channels(m: &MoleculeSpec, center: usize, b: Bandwidth) -> Result<S2Signal> {
    let ci = m
        .atoms
        .get(center)
        .ok_or_else(|| Error::Invalid(format!("center atom {center} out of range for {} atoms", m.atoms.len())))?;
    let types = m.types();
    let grid = S2Grid::new(b);
    let n = b.samples();
    let mut out = S2Signal::zeros(b, types.len());
    for (j, &beta) in grid.betas.iter().enumerate() {
        for (i, &alpha) in grid.alphas.iter().enumerate() {
            let x = crate::grids::S2Point { alpha, beta }.to_cartesian();
            let world: [f64; 3] = std::array::from_fn(|k| ci.position[k] + m.radius * x[k]);
            for (k, atom) in m.atoms.iter().enumerate() {
                if k == center {
                    continue;
                }
                let d = world.iter().zip(&atom.position).map(|(a, p)| (a - p) * (a - p)).sum::<f64>().sqrt();
                if d < SINGULAR_DISTANCE {
                    return Err(Error::SingularPotential { atom: k });
                }
                let c = types.iter().position(|t| *t == atom.charge).expect("charge is a known type");
                out.data[(c * n + j) * n + i] += ci.charge * atom.charge / d;
            }
        }
    }
    Ok(out)
}
