pub mod error;
pub mod ode;
pub mod params;
pub mod quadrature;
pub mod roots;
pub mod samples;
pub mod io;
pub mod radial;
pub mod masses;
pub mod reductions;
pub mod bubbles;
pub mod verify;
