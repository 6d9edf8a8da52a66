//! Deterministic parameter sweeps: splitting against δ̃ for fixed velocities,
//! against velocity for fixed δ̃, and the motional red shift next to the
//! Doppler ratios.
//!
//! Rows are evaluated in parallel and assembled in (series, grid) order, so
//! output never depends on scheduling.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::dirac::standard_basis;
use crate::error::{Error, Result};
use crate::oracle::splitting_numeric;
use crate::quantities::NaturalParams;
use crate::spectrum::{
    doppler_reference, eta_of_velocity, kinematics_of, larmor_redshift, spin_splitting, splitting_highspeed,
    splitting_lowspeed, EtaMode,
};

/// Largest allowed |numeric − analytic| for a validated row.
pub const VALIDATION_TOL: f64 = 1e-10;

/// Velocities used when none are given.
pub const DEFAULT_VELOCITIES: [f64; 4] = [0.0, 0.2, 0.5, 0.8];
pub const DEFAULT_DELTAS: [f64; 3] = [0.3, 0.5, 0.9];

/// Inclusive linear grid `start:stop:count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    start: f64,
    stop: f64,
    count: usize,
}

impl Grid {
    pub fn new(start: f64, stop: f64, count: usize) -> Result<Self> {
        if !(start.is_finite() && stop.is_finite()) {
            return Err(Error::InvalidSweep("grid bounds must be finite".into()));
        }
        if count < 2 {
            return Err(Error::InvalidSweep(format!("grid needs at least 2 points, got {count}")));
        }
        if start >= stop {
            return Err(Error::InvalidSweep(format!("grid start {start} must be below stop {stop}")));
        }
        Ok(Self { start, stop, count })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn stop(&self) -> f64 {
        self.stop
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            return self.stop;
        }
        self.start + i as f64 * (self.stop - self.start) / (self.count - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.point(i)).collect()
    }
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(Error::InvalidSweep(format!("expected start:stop:count, got `{s}`")));
        };
        let bad = |what: &str| Error::InvalidSweep(format!("bad {what} in range `{s}`"));
        Self::new(
            a.trim().parse().map_err(|_| bad("start"))?,
            b.trim().parse().map_err(|_| bad("stop"))?,
            n.trim().parse().map_err(|_| bad("count"))?,
        )
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.count)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    Delta,
    Velocity,
    Doppler,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub eta_mode: EtaMode,
    /// π̃, only used with [`EtaMode::Exact`].
    pub pi_tilde: f64,
    /// Diagonalize every row and abort on disagreement.
    pub validate: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { eta_mode: EtaMode::Approx, pi_tilde: 0.0, validate: false }
    }
}

/// A full sweep request. `fixed_values` are velocities for [`SweepMode::Delta`]
/// and δ̃ values otherwise (only the first is used for Doppler).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub mode: SweepMode,
    pub fixed_values: Vec<f64>,
    pub grid: Grid,
    pub options: SweepOptions,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub series_label: f64,
    pub swept_value: f64,
    pub splitting: f64,
    pub splitting_numeric: Option<f64>,
    pub lowspeed_approx: Option<f64>,
    pub highspeed_approx: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DopplerRow {
    pub velocity: f64,
    pub motional_ratio: f64,
    pub nonrel_doppler: f64,
    pub rel_doppler: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DopplerTable {
    pub rows: Vec<DopplerRow>,
    /// Grid points outside the red-shift expansion domain.
    pub dropped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepOutput {
    Splitting(Vec<SweepRow>),
    Doppler(DopplerTable),
}

impl SweepSpec {
    pub fn run(&self) -> Result<SweepOutput> {
        match self.mode {
            SweepMode::Delta => sweep_delta(&self.fixed_values, &self.grid, &self.options).map(SweepOutput::Splitting),
            SweepMode::Velocity => {
                sweep_velocity(&self.fixed_values, &self.grid, &self.options).map(SweepOutput::Splitting)
            }
            SweepMode::Doppler => {
                let delta = *self
                    .fixed_values
                    .first()
                    .ok_or_else(|| Error::InvalidSweep("doppler sweep needs a delta".into()))?;
                doppler_compare(&self.grid, delta).map(SweepOutput::Doppler)
            }
        }
    }
}

fn check_velocity(v: f64) -> Result<()> {
    if !(0.0..1.0).contains(&v) {
        return Err(Error::InvalidSweep(format!("velocity {v} outside [0, 1)")));
    }
    Ok(())
}

fn check_delta(d: f64) -> Result<()> {
    if !(d.is_finite() && d >= 0.0) {
        return Err(Error::InvalidSweep(format!("delta {d} must be finite and non-negative")));
    }
    Ok(())
}

/// Splitting, oracle value, low-speed and high-speed approximations.
type Evaluated = (f64, Option<f64>, Option<f64>, Option<f64>);

fn evaluate(velocity: f64, delta: f64, opts: &SweepOptions) -> Result<Evaluated> {
    let k = kinematics_of(velocity)?;
    let eta = eta_of_velocity(&k, opts.pi_tilde, opts.eta_mode);
    let splitting = spin_splitting(eta, delta)?;
    let numeric = if opts.validate {
        let pi = match opts.eta_mode {
            EtaMode::Exact => opts.pi_tilde,
            EtaMode::Approx => 0.0,
        };
        let n = splitting_numeric(&NaturalParams::new(k.p_tilde, pi, delta), &standard_basis())?;
        let deviation = (n - splitting).abs();
        if deviation.is_nan() || deviation >= VALIDATION_TOL {
            return Err(Error::ValidationFailed { series: f64::NAN, point: f64::NAN, deviation });
        }
        Some(n)
    } else {
        None
    };
    Ok((
        splitting,
        numeric,
        splitting_lowspeed(eta, delta).ok(),
        splitting_highspeed(eta, delta).ok(),
    ))
}

/// Evaluates `f` over series × grid in parallel; the first failure in row
/// order wins.
fn tabulate<T, F>(series: &[f64], grid: &Grid, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(f64, f64) -> Result<T> + Sync,
{
    let points = grid.points();
    let n = points.len();
    let results: Vec<Result<T>> = (0..series.len() * n)
        .into_par_iter()
        .map(|idx| {
            let (s, x) = (series[idx / n], points[idx % n]);
            f(s, x).map_err(|e| match e {
                Error::ValidationFailed { deviation, .. } => Error::ValidationFailed { series: s, point: x, deviation },
                other => Error::SweepPoint { series: s, point: x, context: Box::new(other) },
            })
        })
        .collect();
    results.into_iter().collect()
}

/// Splitting against δ̃ for each velocity (one series per velocity).
pub fn sweep_delta(velocities: &[f64], grid: &Grid, opts: &SweepOptions) -> Result<Vec<SweepRow>> {
    velocities.iter().try_for_each(|&v| check_velocity(v))?;
    check_delta(grid.start())?;
    tabulate(velocities, grid, |v, delta| {
        let (splitting, splitting_numeric, lowspeed_approx, highspeed_approx) = evaluate(v, delta, opts)?;
        Ok(SweepRow { series_label: v, swept_value: delta, splitting, splitting_numeric, lowspeed_approx, highspeed_approx })
    })
}

/// Splitting against velocity for each δ̃ (one series per δ̃).
pub fn sweep_velocity(deltas: &[f64], grid: &Grid, opts: &SweepOptions) -> Result<Vec<SweepRow>> {
    deltas.iter().try_for_each(|&d| check_delta(d))?;
    check_velocity(grid.start())?;
    check_velocity(grid.stop())?;
    tabulate(deltas, grid, |delta, v| {
        let (splitting, splitting_numeric, lowspeed_approx, highspeed_approx) = evaluate(v, delta, opts)?;
        Ok(SweepRow { series_label: delta, swept_value: v, splitting, splitting_numeric, lowspeed_approx, highspeed_approx })
    })
}

/// Motional red-shift ratio beside the nonrelativistic and relativistic
/// Doppler ratios. Points outside the red-shift expansion are dropped and
/// counted.
pub fn doppler_compare(grid: &Grid, delta_tilde: f64) -> Result<DopplerTable> {
    check_velocity(grid.start())?;
    check_velocity(grid.stop())?;
    let rows = tabulate(&[delta_tilde], grid, |delta, v| {
        let (nonrel_doppler, rel_doppler) = doppler_reference(v)?;
        match larmor_redshift(v, delta) {
            Ok(r) => Ok(Some(DopplerRow { velocity: v, motional_ratio: r.ratio, nonrel_doppler, rel_doppler })),
            Err(Error::OutsideExpansionDomain(_)) => Ok(None),
            Err(e) => Err(e),
        }
    })?;
    let dropped = rows.iter().filter(|r| r.is_none()).count();
    Ok(DopplerTable { rows: rows.into_iter().flatten().collect(), dropped })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(s: &str) -> Grid {
        s.parse().unwrap()
    }

    #[test]
    fn grid_parsing_and_points() {
        let g = grid("0:3:31");
        let p = g.points();
        assert_eq!(p.len(), 31);
        assert_eq!(p[0], 0.0);
        assert_eq!(p[30], 3.0);
        assert!((p[10] - 1.0).abs() < 1e-15);
        assert!("0:3".parse::<Grid>().is_err());
        assert!("0:3:1".parse::<Grid>().is_err());
        assert!("3:0:5".parse::<Grid>().is_err());
        assert!("a:1:5".parse::<Grid>().is_err());
    }

    #[test]
    fn rest_series_has_plateau() {
        let rows = sweep_delta(&[0.0], &grid("0:3:31"), &SweepOptions::default()).unwrap();
        assert_eq!(rows.len(), 31);
        for r in &rows {
            let want = if r.swept_value >= 1.0 { 2.0 } else { 2.0 * r.swept_value };
            assert!((r.splitting - want).abs() < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn moving_series_lies_below_rest_series() {
        let rows = sweep_delta(&[0.0, 0.5], &grid("0.1:3:30"), &SweepOptions::default()).unwrap();
        let (rest, moving) = rows.split_at(30);
        for (a, b) in rest.iter().zip(moving) {
            assert_eq!(b.series_label, 0.5);
            assert!(b.splitting < a.splitting);
        }
    }

    #[test]
    fn single_velocity_point() {
        let rows = sweep_delta(&[0.6], &grid("0.5:1:2"), &SweepOptions::default()).unwrap();
        assert_eq!(rows[0].splitting, spin_splitting(0.75, 0.5).unwrap());
        assert!((rows[0].splitting - 0.775_663_164_258_844_9).abs() < 1e-12);
    }

    #[test]
    fn velocity_series_narrows() {
        let opts = SweepOptions { validate: true, ..Default::default() };
        let rows = sweep_velocity(&[0.5], &grid("0:0.99:61"), &opts).unwrap();
        assert_eq!(rows[0].splitting, 1.0);
        assert!(rows.windows(2).all(|w| w[1].splitting < w[0].splitting));
        assert!(rows.iter().all(|r| r.splitting_numeric.is_some()));
    }

    #[test]
    fn zero_delta_has_no_splitting() {
        let rows = sweep_velocity(&[0.0], &grid("0:0.9:10"), &SweepOptions::default()).unwrap();
        assert!(rows.iter().all(|r| r.splitting == 0.0));
    }

    #[test]
    fn highspeed_column_tracks_splitting() {
        // Relative error is ≈ (1 + δ̃²)/(2η̃²): below 0.1% once γv > 25 (v > 0.9992).
        let rows = sweep_velocity(&[0.5], &grid("0.9995:0.9999:5"), &SweepOptions::default()).unwrap();
        for r in &rows {
            let h = r.highspeed_approx.expect("guard passes");
            assert!((h - r.splitting).abs() < 1e-3 * r.splitting);
            assert!(r.lowspeed_approx.is_none());
        }
    }

    #[test]
    fn exact_mode_uses_pi() {
        let opts = SweepOptions { eta_mode: EtaMode::Exact, pi_tilde: 0.1, validate: true };
        let rows = sweep_delta(&[0.6], &grid("0.5:1:2"), &opts).unwrap();
        let eta = 0.75f64.hypot(0.1);
        assert_eq!(rows[0].splitting, spin_splitting(eta, 0.5).unwrap());
    }

    #[test]
    fn invalid_requests() {
        let g = grid("0:1:5");
        assert!(matches!(sweep_delta(&[1.0], &g, &SweepOptions::default()), Err(Error::InvalidSweep(_))));
        assert!(matches!(sweep_velocity(&[-0.1], &g.clone(), &SweepOptions::default()), Err(Error::InvalidSweep(_))));
        assert!(matches!(sweep_velocity(&[0.5], &g, &SweepOptions::default()), Err(Error::InvalidSweep(_))));
    }

    #[test]
    fn doppler_rows() {
        let t = doppler_compare(&grid("0:0.1:2"), 0.0).unwrap();
        assert_eq!(t.dropped, 0);
        assert_eq!(t.rows[0], DopplerRow { velocity: 0.0, motional_ratio: 1.0, nonrel_doppler: 1.0, rel_doppler: 1.0 });
        let r = t.rows[1];
        assert!((r.motional_ratio - 0.994_949_494_949_494_9).abs() < 1e-15);
        assert!((r.nonrel_doppler - 0.9).abs() < 1e-15);
        assert!((r.rel_doppler - 0.904_534_033_733_290_9).abs() < 1e-15);
    }

    #[test]
    fn doppler_drops_rows_outside_expansion() {
        let t = doppler_compare(&grid("0:0.9:10"), 0.0).unwrap();
        assert!(t.dropped > 0);
        assert_eq!(t.rows.len() + t.dropped, 10);
    }

    #[test]
    fn doppler_slopes_at_small_velocity() {
        let t = doppler_compare(&grid("0:0.001:11"), 0.0).unwrap();
        let r = t.rows[1];
        assert!((1.0 - r.motional_ratio) / r.velocity < 1e-3);
        assert!(((1.0 - r.nonrel_doppler) / r.velocity - 1.0).abs() < 1e-9);
    }

    #[test]
    fn singular_delta_aborts_doppler() {
        let err = doppler_compare(&grid("0:0.1:3"), 1.0).unwrap_err();
        assert!(matches!(err, Error::SweepPoint { context, .. } if *context == Error::SingularExpansion(1.0)));
    }

    #[test]
    fn spec_dispatch() {
        let spec = SweepSpec { mode: SweepMode::Delta, fixed_values: vec![0.0, 0.5], grid: grid("0:3:31"), options: SweepOptions::default() };
        match spec.run().unwrap() {
            SweepOutput::Splitting(rows) => assert_eq!(rows.len(), 62),
            other => panic!("unexpected {other:?}"),
        }
    }
}
