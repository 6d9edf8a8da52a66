//! SI quantities, the particle registry, and conversion into natural units
//! (mc² = 1, c = 1). Everything downstream of [`to_natural`] is unit-free.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

/// Registry shipped with the crate; `--registry` / `LARMOR_REGISTRY` override it.
pub const DEFAULT_REGISTRY: &str = include_str!("../data/registry.toml");

/// Environment variable naming an alternative registry file.
pub const REGISTRY_ENV: &str = "LARMOR_REGISTRY";

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct PhysicalConstants {
    /// Speed of light, m/s.
    pub c: f64,
    /// Reduced Planck constant, J·s.
    pub hbar: f64,
    /// Nuclear magneton, J/T.
    pub nuclear_magneton: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSpec {
    pub name: String,
    /// Rest mass, kg. Zero is allowed.
    pub mass: f64,
    /// Magnetic dipole moment μ, J/T.
    pub mdm: f64,
    /// Electric dipole moment d, C·m.
    pub edm: f64,
}

impl ParticleSpec {
    pub fn rest_energy(&self, constants: &PhysicalConstants) -> f64 {
        self.mass * constants.c * constants.c
    }
}

/// Static electric (V/m) and magnetic (T) field strengths, both along the
/// propagation axis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldPoint {
    pub e_field: f64,
    pub b_field: f64,
}

/// Dimensionless inputs of the Hamiltonian. `eta_tilde` is derived and kept
/// consistent with the other two by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaturalParams {
    p_tilde: f64,
    pi_tilde: f64,
    delta_tilde: f64,
    eta_tilde: f64,
}

impl NaturalParams {
    pub fn new(p_tilde: f64, pi_tilde: f64, delta_tilde: f64) -> Self {
        Self {
            p_tilde,
            pi_tilde,
            delta_tilde,
            eta_tilde: p_tilde.hypot(pi_tilde),
        }
    }

    /// Momentum in units of mc.
    pub fn p_tilde(&self) -> f64 {
        self.p_tilde
    }

    /// Cross coupling dB + μE/c², in units of mc.
    pub fn pi_tilde(&self) -> f64 {
        self.pi_tilde
    }

    /// Interaction energy dE − μB, in units of mc².
    pub fn delta_tilde(&self) -> f64 {
        self.delta_tilde
    }

    pub fn eta_tilde(&self) -> f64 {
        self.eta_tilde
    }

    pub fn is_finite(&self) -> bool {
        self.p_tilde.is_finite() && self.pi_tilde.is_finite() && self.delta_tilde.is_finite()
    }
}

/// Interaction energy δ = dE − μB, in joules.
pub fn interaction_energy(particle: &ParticleSpec, fields: FieldPoint) -> f64 {
    particle.edm * fields.e_field - particle.mdm * fields.b_field
}

/// Cross coupling π = dB + μE/c², in kg·m/s.
pub fn cross_coupling(particle: &ParticleSpec, fields: FieldPoint, constants: &PhysicalConstants) -> f64 {
    particle.edm * fields.b_field + particle.mdm * fields.e_field / (constants.c * constants.c)
}

/// Converts an SI configuration (momentum in kg·m/s) into natural units.
pub fn to_natural(
    particle: &ParticleSpec,
    fields: FieldPoint,
    momentum: f64,
    constants: &PhysicalConstants,
) -> Result<NaturalParams> {
    if !particle.mass.is_finite() {
        return Err(Error::NonFiniteInput("mass"));
    }
    if particle.mass <= 0.0 {
        return Err(Error::MasslessConversion);
    }
    if !(momentum.is_finite() && fields.e_field.is_finite() && fields.b_field.is_finite()) {
        return Err(Error::NonFiniteInput("fields/momentum"));
    }
    let mc = particle.mass * constants.c;
    let mc2 = mc * constants.c;
    let pi = cross_coupling(particle, fields, constants);
    let delta = interaction_energy(particle, fields);
    Ok(NaturalParams::new(momentum / mc, pi / mc, delta / mc2))
}

/// A parsed particle/constants registry.
#[derive(Debug, Clone, PartialEq)]
pub struct Registry {
    pub constants: PhysicalConstants,
    particles: BTreeMap<String, ParticleSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegistry {
    constants: PhysicalConstants,
    #[serde(default)]
    particle: Vec<RawParticle>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParticle {
    name: String,
    mass_kg: f64,
    #[serde(rename = "mdm_J_per_T")]
    mdm_j_per_t: f64,
    #[serde(rename = "edm_C_m", default)]
    edm_c_m: f64,
}

impl Registry {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawRegistry =
            toml::from_str(text).map_err(|e| Error::MalformedRegistry(e.to_string()))?;
        let k = raw.constants;
        for (name, v) in [("c", k.c), ("hbar", k.hbar), ("nuclear_magneton", k.nuclear_magneton)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::MalformedRegistry(format!("constant `{name}` must be positive, got {v}")));
            }
        }
        let mut particles = BTreeMap::new();
        for p in raw.particle {
            if !(p.mass_kg.is_finite() && p.mass_kg >= 0.0) {
                return Err(Error::MalformedRegistry(format!(
                    "particle `{}` has invalid mass {}",
                    p.name, p.mass_kg
                )));
            }
            if !(p.mdm_j_per_t.is_finite() && p.edm_c_m.is_finite()) {
                return Err(Error::MalformedRegistry(format!("particle `{}` has non-finite moments", p.name)));
            }
            let spec = ParticleSpec {
                name: p.name.clone(),
                mass: p.mass_kg,
                mdm: p.mdm_j_per_t,
                edm: p.edm_c_m,
            };
            if particles.insert(p.name.clone(), spec).is_some() {
                return Err(Error::MalformedRegistry(format!("duplicate particle `{}`", p.name)));
            }
        }
        Ok(Self { constants: k, particles })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::MalformedRegistry(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The shipped registry.
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_REGISTRY).expect("shipped registry parses")
    }

    /// Explicit path first, then `LARMOR_REGISTRY`, then the shipped file.
    pub fn resolve(explicit: Option<&Path>) -> Result<Self> {
        if let Some(p) = explicit {
            return Self::load(p);
        }
        match std::env::var_os(REGISTRY_ENV) {
            Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
            _ => Ok(Self::builtin()),
        }
    }

    pub fn particle(&self, name: &str) -> Result<&ParticleSpec> {
        self.particles
            .get(name)
            .ok_or_else(|| Error::UnknownParticle(name.to_string()))
    }

    pub fn particle_names(&self) -> impl Iterator<Item = &str> {
        self.particles.keys().map(String::as_str)
    }
}

/// Looks up a preset in a registry file.
pub fn load_particle_preset(name: &str, registry: &Path) -> Result<ParticleSpec> {
    Registry::load(registry)?.particle(name).cloned()
}
