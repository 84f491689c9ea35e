//! Energies, stability monitors and residuals of the curvature identities
//! along trajectories.

mod energy;
mod kappa;
mod sobolev;
mod stability;

pub use energy::{
    energy_budget, physical_energy, vacuum_electric_field, wall_power, BudgetReport, ElectricField, EnergyReport,
};
pub use kappa::{kappa_evolution_residuals, kappa_rate_rhs, kappa_second_order_terms, IdentityResidualReport};
pub use sobolev::{bulk_sobolev_sq, sobolev_energies, surface_energies, SobolevEnergies, SobolevInputs};
pub use stability::{stability_monitors, tangent_frame, upsilon_field, upsilon_point, StabilityReport};
