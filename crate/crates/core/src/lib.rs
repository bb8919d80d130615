/*!
A pseudospectral laboratory for the dispersive Burgers-type equation

```text
∂ₜu + L u = ∂ₓ(u²),    (L u)^(ξ) = iω(ξ) û(ξ),
```

on a periodic interval, where `ω` behaves like `|ξ|^{α+1}` at high
frequency. Besides the time integrator the crate evaluates the objects of
the energy method: Littlewood–Paley pieces, resonance functions, multilinear
Fourier multipliers and the modified energies with their cubic correctors.

# Example

```
use dispburgers::{energies, solver, DispersionSymbol, Field, SpectralGrid};

let grid = SpectralGrid::standard(128)?;
let sym = DispersionSymbol::pure_power(1.0)?;
let u0 = Field::from_fn(grid, |x| 0.1 * x.cos());
let cfg = solver::SolverConfig::new(solver::Scheme::Ifrk4, 1e-3, 0.1);
let out = solver::run(&u0, &sym, &cfg, None)?;
let (_, u) = out.record.last().unwrap();
let drift = (energies::mass(u) - energies::mass(&u0)).abs() / energies::mass(&u0);
assert!(drift < 1e-10);
# Ok::<(), dispburgers::Error>(())
```

# Conventions

Coefficients are `c_k = FFT(u)_k / n` in FFT order, `ξ_k = 2πk/L`, and
`∫u² = L Σ|c_k|²`. The Nyquist mode is kept at zero.
*/

pub mod config;
pub mod dispersion;
pub mod energies;
mod error;
pub mod experiments;
pub mod io;
pub mod littlewood_paley;
pub mod multilinear;
pub mod resonance;
pub mod solver;
pub mod spectral;

pub use crate::config::RunConfig;
pub use crate::dispersion::{DispersionSymbol, SymbolKind};
pub use crate::error::{Error, Result};
pub use crate::multilinear::MultiplierSymbol;
pub use crate::spectral::{Field, SpectralGrid, TrajectoryRecord};
