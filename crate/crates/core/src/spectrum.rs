//! Closed-form spectrum and spin splitting, with the rest-frame plateau, the
//! low- and high-momentum expansions, and the Larmor red shift.
//!
//! Energies are in units of mc² and frequencies in mc²/ħ unless a function
//! name ends in `_si`.

use crate::error::{Error, Result};
use crate::quantities::PhysicalConstants;

/// Whether a result came from the closed form or from diagonalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    Analytic,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumResult {
    pub e_plus_up: f64,
    pub e_plus_down: f64,
    pub e_minus_up: f64,
    pub e_minus_down: f64,
    /// E+↑ − E+↓.
    pub splitting: f64,
    pub source: Provenance,
}

impl SpectrumResult {
    /// The four energies in ascending order.
    pub fn sorted(&self) -> [f64; 4] {
        let mut e = [self.e_minus_up, self.e_minus_down, self.e_plus_down, self.e_plus_up];
        e.sort_by(f64::total_cmp);
        e
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics {
    /// v/c, in (−1, 1).
    pub velocity: f64,
    pub gamma: f64,
    /// γv, momentum in units of mc.
    pub p_tilde: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RedShiftResult {
    /// ω(v)/ω₀.
    pub ratio: f64,
    /// (ω(v) − ω₀)/ω₀.
    pub shift: f64,
}

/// Upper limits on splitting and Larmor frequency, and the matching
/// wavelength c/ω_max. In natural units these are (2, 2, 1/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitBundle {
    pub max_splitting: f64,
    pub max_larmor: f64,
    pub min_wavelength: f64,
}

/// How η is obtained from a velocity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EtaMode {
    /// η = sqrt(p² + π²).
    Exact,
    /// η ≈ p.
    #[default]
    Approx,
}

fn check_finite(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFiniteInput(name))
    }
}

fn check_eta(eta: f64) -> Result<()> {
    check_finite("eta", eta)?;
    if eta < 0.0 {
        return Err(Error::NegativeEta(eta));
    }
    Ok(())
}

/// sqrt(η² + (r + δ)²) − sqrt(η² + (r − δ)²) for rest energy r ≥ 0, in any
/// consistent energy unit, evaluated as 4rδ / (up + down). The plain
/// difference cancels catastrophically both for η ≫ r + |δ| and for |δ| ≪ r,
/// which is the normal regime for real particles in laboratory fields.
fn splitting_with_rest(eta: f64, delta: f64, rest: f64) -> f64 {
    if rest == 0.0 {
        return 0.0;
    }
    let up = eta.hypot(rest + delta);
    let down = eta.hypot(rest - delta);
    stable_difference(up, down, delta, rest)
}

fn stable_difference(up: f64, down: f64, delta: f64, rest: f64) -> f64 {
    4.0 * rest * delta / (up + down)
}

/// The naive and quotient forms of the splitting, for cross-checking the
/// crossover.
pub fn splitting_forms(eta_tilde: f64, delta_tilde: f64) -> (f64, f64) {
    let up = eta_tilde.hypot(1.0 + delta_tilde);
    let down = eta_tilde.hypot(1.0 - delta_tilde);
    (up - down, stable_difference(up, down, delta_tilde, 1.0))
}

pub fn eigenvalues_analytic(eta_tilde: f64, delta_tilde: f64) -> Result<SpectrumResult> {
    check_eta(eta_tilde)?;
    check_finite("delta", delta_tilde)?;
    let up = eta_tilde.hypot(1.0 + delta_tilde);
    let down = eta_tilde.hypot(1.0 - delta_tilde);
    Ok(SpectrumResult {
        e_plus_up: up,
        e_plus_down: down,
        e_minus_up: -up,
        e_minus_down: -down,
        splitting: splitting_with_rest(eta_tilde, delta_tilde, 1.0),
        source: Provenance::Analytic,
    })
}

/// Spin splitting Δ(η̃, δ̃). Odd in δ̃, bounded by 2 in magnitude, and
/// non-increasing in η̃ for δ̃ ≥ 0.
pub fn spin_splitting(eta_tilde: f64, delta_tilde: f64) -> Result<f64> {
    check_eta(eta_tilde)?;
    check_finite("delta", delta_tilde)?;
    Ok(splitting_with_rest(eta_tilde, delta_tilde, 1.0))
}

/// Dimensional splitting from cp, cπ, δ and mc², all in joules. Exactly zero
/// for a massless particle.
pub fn spin_splitting_si(cp: f64, cpi: f64, delta: f64, rest_energy: f64) -> Result<f64> {
    check_finite("cp", cp)?;
    check_finite("cpi", cpi)?;
    check_finite("delta", delta)?;
    check_finite("rest_energy", rest_energy)?;
    if rest_energy < 0.0 {
        return Err(Error::NonPositiveMass(rest_energy));
    }
    Ok(splitting_with_rest(cp.hypot(cpi), delta, rest_energy))
}

/// Nonrelativistic splitting 2(dE − μB), in joules.
pub fn splitting_nonrel(d: f64, mu: f64, e_field: f64, b_field: f64) -> f64 {
    2.0 * (d * e_field - mu * b_field)
}

/// ∂Δ/∂η̃ = −η̃·Δ/(E+↑·E+↓).
pub fn splitting_derivative(eta_tilde: f64, delta_tilde: f64) -> Result<f64> {
    let spectrum = eigenvalues_analytic(eta_tilde, delta_tilde)?;
    let denom = spectrum.e_plus_up * spectrum.e_plus_down;
    if denom == 0.0 {
        return Err(Error::SingularPoint { eta: eta_tilde, delta: delta_tilde });
    }
    Ok(-eta_tilde / denom * spectrum.splitting)
}

/// Δ at η̃ = 0: |1 + δ̃| − |1 − δ̃|, i.e. 2δ̃ inside the unit interval and
/// ±2 on the plateau |δ̃| ≥ 1.
pub fn splitting_at_rest(delta_tilde: f64) -> f64 {
    if delta_tilde >= 1.0 {
        2.0
    } else if delta_tilde <= -1.0 {
        -2.0
    } else {
        2.0 * delta_tilde
    }
}

/// Δ_max = 2mc², ω_max = 2mc²/ħ, λ_min = c/ω_max, in SI.
pub fn relativistic_limits(mass: f64, constants: &PhysicalConstants) -> Result<LimitBundle> {
    check_finite("mass", mass)?;
    if mass <= 0.0 {
        return Err(Error::NonPositiveMass(mass));
    }
    let max_splitting = 2.0 * mass * constants.c * constants.c;
    let max_larmor = max_splitting / constants.hbar;
    Ok(LimitBundle {
        max_splitting,
        max_larmor,
        min_wavelength: constants.c / max_larmor,
    })
}

pub fn natural_limits() -> LimitBundle {
    LimitBundle { max_splitting: 2.0, max_larmor: 2.0, min_wavelength: 0.5 }
}

pub fn kinematics_of(velocity: f64) -> Result<Kinematics> {
    check_finite("velocity", velocity)?;
    if velocity.abs() >= 1.0 {
        return Err(Error::SuperluminalVelocity(velocity));
    }
    let gamma = 1.0 / (1.0 - velocity * velocity).sqrt();
    Ok(Kinematics { velocity, gamma, p_tilde: gamma * velocity })
}

pub fn eta_of_velocity(k: &Kinematics, pi_tilde: f64, mode: EtaMode) -> f64 {
    match mode {
        EtaMode::Exact => k.p_tilde.hypot(pi_tilde),
        EtaMode::Approx => k.p_tilde.abs(),
    }
}

/// |1 − δ̃²|, rejecting the point where it vanishes.
fn expansion_denominator(delta_tilde: f64) -> Result<f64> {
    let d = (1.0 - delta_tilde * delta_tilde).abs();
    if d == 0.0 {
        return Err(Error::SingularExpansion(delta_tilde));
    }
    Ok(d)
}

/// η̃² < 0.1·(1 − |δ̃|)²: the smaller spin branch still dominates η̃.
pub fn lowspeed_guard(eta_tilde: f64, delta_tilde: f64) -> bool {
    let gap = 1.0 - delta_tilde.abs();
    eta_tilde * eta_tilde < 0.1 * gap * gap
}

/// η̃ > max(10, 10|δ̃|).
pub fn highspeed_guard(eta_tilde: f64, delta_tilde: f64) -> bool {
    eta_tilde > 10.0_f64.max(10.0 * delta_tilde.abs())
}

/// Δ ≈ Δ₀·(1 − η̃²/(2|1 − δ̃²|)), accurate to O(η̃⁴).
pub fn splitting_lowspeed(eta_tilde: f64, delta_tilde: f64) -> Result<f64> {
    check_eta(eta_tilde)?;
    check_finite("delta", delta_tilde)?;
    let denom = expansion_denominator(delta_tilde)?;
    if !lowspeed_guard(eta_tilde, delta_tilde) {
        return Err(Error::OutsideExpansionDomain(format!(
            "low-speed expansion needs eta^2 < 0.1 (1 - |delta|)^2, got eta={eta_tilde}, delta={delta_tilde}"
        )));
    }
    Ok(splitting_at_rest(delta_tilde) * (1.0 - eta_tilde * eta_tilde / (2.0 * denom)))
}

/// ω(v)/ω₀ = 1 − (γv)²/(2|1 − δ̃²|), using η ≈ p = γv.
pub fn larmor_redshift(velocity: f64, delta_tilde: f64) -> Result<RedShiftResult> {
    let k = kinematics_of(velocity)?;
    check_finite("delta", delta_tilde)?;
    let denom = expansion_denominator(delta_tilde)?;
    let eta = eta_of_velocity(&k, 0.0, EtaMode::Approx);
    if !lowspeed_guard(eta, delta_tilde) {
        return Err(Error::OutsideExpansionDomain(format!(
            "red shift needs (gamma v)^2 < 0.1 (1 - |delta|)^2, got v={velocity}, delta={delta_tilde}"
        )));
    }
    let ratio = 1.0 - eta * eta / (2.0 * denom);
    Ok(RedShiftResult { ratio, shift: ratio - 1.0 })
}

/// Δ ≈ 2δ̃/η̃, accurate to O(η̃⁻³).
pub fn splitting_highspeed(eta_tilde: f64, delta_tilde: f64) -> Result<f64> {
    check_eta(eta_tilde)?;
    check_finite("delta", delta_tilde)?;
    if !highspeed_guard(eta_tilde, delta_tilde) {
        return Err(Error::OutsideExpansionDomain(format!(
            "high-speed expansion needs eta > max(10, 10|delta|), got eta={eta_tilde}, delta={delta_tilde}"
        )));
    }
    Ok(2.0 * delta_tilde / eta_tilde)
}

/// Doppler ratios ω/ω₀ for a receding source: (1 − v, γ(1 − v)).
pub fn doppler_reference(velocity: f64) -> Result<(f64, f64)> {
    let k = kinematics_of(velocity)?;
    if velocity < 0.0 {
        return Err(Error::NegativeVelocity(velocity));
    }
    let nonrel = 1.0 - velocity;
    Ok((nonrel, k.gamma * nonrel))
}
