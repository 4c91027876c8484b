//! Built-in Hamiltonian models and first integrals, each paired with the
//! closed-form curvature data it is expected to reproduce.

mod eight;
mod integrals;
mod kepler;
mod natural;
mod nbody;
mod quadratic;
mod sphere;

pub use eight::{figure_eight_orbit, EightOrbit, SIMO_PERIOD, SIMO_POSITION, SIMO_VELOCITY};
pub use integrals::{AngularMomentum, Energy, FirstIntegral, Momentum, SharedIntegral};
pub use kepler::{make_kepler, Kepler};
pub use natural::{
    free_particle, make_natural_system, make_oscillator, FnPotential, NaturalSystem, PolynomialPotential,
    Potential,
};
pub use nbody::{
    make_nbody_planar, nbody_reduced_ricci_closed_form, nbody_reduced_ricci_corrected, NBody, NBodyState,
};
pub use quadratic::{linear_in_momentum, saddle, QuadraticHamiltonian};
pub use sphere::{make_sphere_geodesic, Sphere};

/// Names accepted by the configuration front end, with one-line summaries.
pub const MODEL_CATALOGUE: &[(&str, &str)] = &[
    ("oscillator", "isotropic or anisotropic harmonic oscillator H = ½Σ(p_i² + ω_i² q_i²)"),
    ("natural", "natural system H = ½‖p‖² + U(q) with a polynomial potential"),
    ("kepler", "planar Kepler problem in polar coordinates (p_r, p_φ, r, φ); integral p_φ"),
    ("nbody", "planar N-body problem, unit masses; integral: angular momentum"),
    ("eight", "three-body figure-eight choreography (calibrated initial data)"),
    ("sphere", "geodesic flow of the unit 2-sphere in (θ, φ) coordinates"),
];
