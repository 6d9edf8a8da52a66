//! Self-verification suite behind `larmor verify`: oracle agreement, the
//! mass-gap bound, plateau, motional narrowing, expansion orders, red-shift
//! identity, limits and massless vanishing.
//!
//! Sampling uses ChaCha8 seeded from a `u64`, so a seed fixes the whole run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dirac::{build_hamiltonian, standard_basis};
use crate::error::Result;
use crate::oracle::{diagonalize, splitting_numeric};
use crate::output::{Cell, Table};
use crate::quantities::{NaturalParams, Registry};
use crate::spectrum::{
    eigenvalues_analytic, larmor_redshift, natural_limits, relativistic_limits, spin_splitting,
    spin_splitting_si, splitting_at_rest, splitting_derivative, splitting_highspeed, splitting_lowspeed,
};
use crate::sweep::{sweep_delta, sweep_velocity, Grid, SweepOptions};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// The worst observed figure for this check.
    pub worst: f64,
    /// Human-readable acceptance bound on `worst`.
    pub bound: &'static str,
}

impl CheckOutcome {
    fn below(name: &'static str, worst: f64, limit: f64, bound: &'static str) -> Self {
        Self { name, passed: worst < limit, worst, bound }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub seed: u64,
    pub samples: usize,
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["check", "status", "worst", "bound"]);
        for c in &self.checks {
            t.push(vec![
                c.name.into(),
                if c.passed { "pass" } else { "fail" }.into(),
                Cell::Num(c.worst),
                c.bound.into(),
            ]);
        }
        let passed = self.checks.iter().filter(|c| c.passed).count();
        t.note("passed", passed as i64);
        t.note("failed", (self.checks.len() - passed) as i64);
        t
    }
}

/// ±10^u with u uniform in [−3, 3] and a random sign.
pub fn log_uniform_signed(rng: &mut impl Rng) -> f64 {
    let mag = 10f64.powf(rng.gen_range(-3.0..=3.0));
    if rng.gen_bool(0.5) {
        mag
    } else {
        -mag
    }
}

pub fn sample_params(rng: &mut impl Rng, n: usize) -> Vec<NaturalParams> {
    (0..n)
        .map(|_| {
            let p = log_uniform_signed(rng);
            let pi = log_uniform_signed(rng);
            let d = log_uniform_signed(rng);
            NaturalParams::new(p, pi, d)
        })
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

pub fn run(samples: usize, seed: u64, registry: &Registry) -> Result<VerifyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = sample_params(&mut rng, samples);
    let basis = standard_basis();
    let mut checks = Vec::new();

    // Oracle agreement and label consistency.
    let mut worst_eig = 0.0f64;
    let mut worst_label = 0.0f64;
    for np in &params {
        let es = diagonalize(&build_hamiltonian(np)?)?;
        let analytic = eigenvalues_analytic(np.eta_tilde(), np.delta_tilde())?.sorted();
        for (a, b) in es.eigenvalues.iter().zip(analytic) {
            worst_eig = worst_eig.max(rel(*a, b));
        }
        let numeric = splitting_numeric(np, &basis)?;
        let exact = spin_splitting(np.eta_tilde(), np.delta_tilde())?;
        let sign_ok = np.delta_tilde() <= 0.0 || numeric >= 0.0;
        // Eigenvalue differences carry ~eps·‖H‖ error, so scale by E+↑ above 1.
        let scale = np.eta_tilde().hypot(1.0 + np.delta_tilde()).max(1.0);
        worst_label = worst_label.max(if sign_ok { (numeric - exact).abs() / scale } else { f64::INFINITY });
    }
    checks.push(CheckOutcome::below("oracle_agreement", worst_eig, 1e-10, "max rel err < 1e-10"));
    checks.push(CheckOutcome::below("label_consistency", worst_label, 1e-12, "max |err|/max(1 E+up) < 1e-12"));

    // Bound |Δ| ≤ 2, attained only at η̃ = 0, |δ̃| ≥ 1.
    let mut excess = f64::NEG_INFINITY;
    let mut misplaced_equality = false;
    for np in &params {
        let s = spin_splitting(np.eta_tilde(), np.delta_tilde())?.abs();
        excess = excess.max(s - 2.0);
        misplaced_equality |= s >= 2.0;
    }
    let line = Grid::new(0.0, 1e3, 100_001)?;
    for delta in line.points() {
        let s = spin_splitting(0.0, delta)?;
        excess = excess.max(s.abs() - 2.0);
        let on_plateau = (s - 2.0).abs() <= 1e-12;
        misplaced_equality |= on_plateau != (delta >= 1.0);
    }
    checks.push(CheckOutcome {
        name: "upper_bound",
        passed: excess <= 1e-12 && !misplaced_equality,
        worst: excess,
        bound: "|splitting| - 2 <= 1e-12; equality only at eta=0 and |delta|>=1",
    });

    // Plateau of the rest series.
    let rows = sweep_delta(&[0.0], &Grid::new(0.0, 3.0, 31)?, &SweepOptions::default())?;
    let worst_plateau = rows
        .iter()
        .map(|r| (r.splitting - splitting_at_rest(r.swept_value)).abs().max((r.splitting - 2.0 * r.swept_value.min(1.0)).abs()))
        .fold(0.0, f64::max);
    checks.push(CheckOutcome::below("plateau", worst_plateau, 1e-12, "max abs err < 1e-12"));

    // Strict narrowing along velocity.
    let rows = sweep_velocity(&[0.3, 0.5, 0.9], &Grid::new(0.0, 0.99, 61)?, &SweepOptions::default())?;
    let min_drop = rows
        .windows(2)
        .filter(|w| w[0].series_label == w[1].series_label)
        .map(|w| w[0].splitting - w[1].splitting)
        .fold(f64::INFINITY, f64::min);
    checks.push(CheckOutcome { name: "narrowing", passed: min_drop > 1e-12, worst: min_drop, bound: "min decrease > 1e-12" });

    // Derivative against central differences.
    let h = 1e-6;
    let mut worst_fd = 0.0f64;
    for _ in 0..1000 {
        let eta = 10f64.powf(rng.gen_range(-2.0..=0.7));
        let delta = loop {
            let d: f64 = rng.gen_range(0.05..3.0);
            if (d - 1.0).abs() > 1e-2 {
                break d;
            }
        };
        let fd = (spin_splitting(eta + h, delta)? - spin_splitting(eta - h, delta)?) / (2.0 * h);
        worst_fd = worst_fd.max(rel(fd, splitting_derivative(eta, delta)?));
    }
    checks.push(CheckOutcome::below("derivative_fd", worst_fd, 1e-6, "max rel err < 1e-6"));

    // Expansion orders at δ̃ = 0.5.
    let err_low = |eta: f64| -> Result<f64> { Ok((splitting_lowspeed(eta, 0.5)? - spin_splitting(eta, 0.5)?).abs()) };
    let mut low_ok = true;
    let mut low_worst = 0.0f64;
    for eta in [1e-1, 1e-2] {
        let r = err_low(eta / 2.0)? / err_low(eta)?;
        low_ok &= (1.0 / 20.0..=1.0 / 12.0).contains(&r);
        low_worst = low_worst.max((1.0 / r - 16.0).abs());
    }
    checks.push(CheckOutcome { name: "lowspeed_order", passed: low_ok, worst: low_worst, bound: "err(eta)/err(eta/2) in [12, 20]" });

    let err_high = |eta: f64| -> Result<f64> { Ok((splitting_highspeed(eta, 0.5)? - spin_splitting(eta, 0.5)?).abs()) };
    let mut high_ok = rel(spin_splitting(1e3, 0.5)? * 1e3, 1.0) < 1e-3;
    let mut high_worst = 0.0f64;
    for eta in [1e2, 1e3] {
        let r = err_high(2.0 * eta)? / err_high(eta)?;
        high_ok &= (0.1..=1.0 / 6.0).contains(&r);
        high_worst = high_worst.max((r - 0.125).abs());
    }
    checks.push(CheckOutcome { name: "highspeed_order", passed: high_ok, worst: high_worst, bound: "err(2eta)/err(eta) in [1/10, 1/6]" });

    // Red-shift ratio against the low-speed expansion.
    let mut worst_red = 0.0f64;
    let mut taken = 0;
    while taken < 1000 {
        let v: f64 = rng.gen_range(0.0..0.3);
        let delta: f64 = rng.gen_range(-3.0..3.0);
        let Ok(r) = larmor_redshift(v, delta) else { continue };
        if delta == 0.0 {
            continue;
        }
        let eta = crate::spectrum::kinematics_of(v)?.p_tilde;
        let via_low = splitting_lowspeed(eta, delta)? / splitting_at_rest(delta);
        worst_red = worst_red.max((r.ratio - via_low).abs());
        taken += 1;
    }
    checks.push(CheckOutcome::below("redshift_identity", worst_red, 1e-14, "max abs err < 1e-14"));
    let red = (larmor_redshift(0.1, 0.0)?.ratio - 0.994_949_5).abs();
    checks.push(CheckOutcome::below("redshift_value", red, 1e-6, "|ratio(v=0.1 delta=0) - 0.9949495| < 1e-6"));

    // Limits.
    let nat = natural_limits();
    let mut limits_ok = (nat.max_splitting, nat.max_larmor, nat.min_wavelength) == (2.0, 2.0, 0.5);
    let mut limits_worst = 0.0f64;
    if let Ok(n) = registry.particle("neutron") {
        let k = &registry.constants;
        let l = relativistic_limits(n.mass, k)?;
        let compton = l.min_wavelength * n.mass * k.c / k.hbar;
        limits_worst = (compton - 0.5).abs();
        let omega = 2.0 * n.mass * k.c * k.c / k.hbar;
        limits_ok &= limits_worst < 1e-12 && rel(l.max_larmor, omega) < 1e-3;
    }
    checks.push(CheckOutcome { name: "limits", passed: limits_ok, worst: limits_worst, bound: "natural (2 2 0.5); lambda_min mc/hbar = 0.5 +- 1e-12" });

    // Massless particles never split.
    let mut worst_massless = 0.0f64;
    for _ in 0..1000 {
        let s = spin_splitting_si(
            log_uniform_signed(&mut rng) * 1e-12,
            log_uniform_signed(&mut rng) * 1e-12,
            log_uniform_signed(&mut rng) * 1e-12,
            0.0,
        )?;
        worst_massless = worst_massless.max(s.abs());
    }
    checks.push(CheckOutcome { name: "massless", passed: worst_massless == 0.0, worst: worst_massless, bound: "exactly 0" });

    Ok(VerifyReport { seed, samples, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes_and_is_reproducible() {
        let reg = Registry::builtin();
        let a = run(200, 7, &reg).unwrap();
        assert!(a.all_passed(), "{:#?}", a.checks);
        assert_eq!(a, run(200, 7, &reg).unwrap());
        assert_ne!(a.checks[0].worst, run(200, 8, &reg).unwrap().checks[0].worst);
    }

    #[test]
    fn samples_cover_the_log_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs: Vec<f64> = (0..5000).map(|_| log_uniform_signed(&mut rng)).collect();
        assert!(xs.iter().all(|x| (1e-3..=1e3).contains(&x.abs())));
        assert!(xs.iter().any(|x| x.abs() < 1e-2) && xs.iter().any(|x| x.abs() > 1e2));
        assert!(xs.iter().any(|x| *x < 0.0) && xs.iter().any(|x| *x > 0.0));
    }
}
