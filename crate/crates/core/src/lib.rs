pub mod error;
pub mod grid;
pub mod inversion;
pub mod io;
pub mod md;
pub mod oz;
pub mod spline;
pub mod state;
pub mod thermo;
pub mod transform;

pub use error::{Error, Result};
pub use grid::{make_grid, CoreRegion, RadialGrid, TableKind, Tabulated};
pub use state::StatePoint;
pub use transform::{radial_fft_forward, radial_fft_inverse, RadialTransform, SpectralField};
