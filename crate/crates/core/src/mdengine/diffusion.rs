//! Diffusion coefficients from mean-squared displacement (Einstein relation)
//! and from the velocity autocorrelation function (Green-Kubo).

use crate::embedding::linear_fit;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Einstein-relation estimate.
#[derive(Clone, Copy, Debug)]
pub struct MsdEstimate<T> {
    pub diffusion_coefficient: T,
    /// Coefficient of determination of the zero-intercept Einstein form
    /// `MSD = 6 D t` over the fit window; low values flag non-diffusive
    /// (e.g. ballistic) behavior.
    pub r_squared: T,
    /// `r_squared >= 0.9`.
    pub diffusive: bool,
    /// Fit window in time units.
    pub window: (T, T),
}

/// Green-Kubo estimate.
#[derive(Clone, Debug)]
pub struct VacfEstimate<T> {
    pub diffusion_coefficient: T,
    /// `<|v|^2>` at zero lag (equals 3 T for m = 1 in equilibrium).
    pub vacf_zero: T,
    /// Integration cut: where the VACF has decayed below 1% of its zero-lag
    /// value in magnitude and stays there (the full window if it never
    /// does). Keeping the cut past the last 1% crossing retains the negative
    /// backscattering lobe of dense fluids, which a first-crossing cut would
    /// drop.
    pub t_cut: T,
    /// False when the VACF never decayed below the 1% threshold.
    pub decayed: bool,
    /// `<v(0).v(t)>` at each retained lag (through the cut).
    pub vacf: Vec<T>,
}

const MAX_FIT_LAGS: usize = 128;
const MAX_ORIGINS: usize = 256;
const VACF_MAX_ORIGINS: usize = 512;

fn validate_frames<T: Real>(frames: &[Vec<[T; 3]>]) -> Result<usize> {
    if frames.len() < 2 {
        return Err(Error::InsufficientData(
            "diffusion estimate needs at least 2 frames".to_string(),
        ));
    }
    let n = frames[0].len();
    if n == 0 {
        return Err(Error::EmptyInput("diffusion frames"));
    }
    for f in frames {
        if f.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: f.len(),
            });
        }
    }
    Ok(n)
}

/// Mean-squared displacement at one lag, averaged over particles and a
/// subsampled set of time origins.
fn msd_at_lag<T: Real>(frames: &[Vec<[T; 3]>], lag: usize) -> T {
    let n = frames[0].len();
    let n_origins_avail = frames.len() - lag;
    let stride = (n_origins_avail / MAX_ORIGINS).max(1);
    let mut acc = T::zero();
    let mut origins = 0usize;
    let mut t0 = 0usize;
    while t0 < n_origins_avail {
        let (a, b) = (&frames[t0], &frames[t0 + lag]);
        for i in 0..n {
            for c in 0..3 {
                let d = b[i][c] - a[i][c];
                acc += d * d;
            }
        }
        origins += 1;
        t0 += stride;
    }
    acc / T::from_count(origins * n)
}

/// Diffusion coefficient from the Einstein relation: least-squares slope of
/// the MSD over lags in `[t_max/4, t_max/2]`, divided by 6. Positions must
/// be unwrapped.
pub fn diffusion_msd<T: Real>(
    unwrapped_frames: &[Vec<[T; 3]>],
    frame_dt: T,
) -> Result<MsdEstimate<T>> {
    validate_frames(unwrapped_frames)?;
    if !(frame_dt > T::zero()) {
        return Err(Error::invalid("frame_dt", "must be positive"));
    }
    let max_lag = unwrapped_frames.len() - 1;
    let lag_lo = (max_lag / 4).max(1);
    let lag_hi = (max_lag / 2).max(lag_lo);

    let mut lags: Vec<usize> = Vec::new();
    let step = ((lag_hi - lag_lo) / (MAX_FIT_LAGS - 1)).max(1);
    let mut lag = lag_lo;
    while lag <= lag_hi {
        lags.push(lag);
        lag += step;
    }

    let times: Vec<T> = lags.iter().map(|&l| T::from_count(l) * frame_dt).collect();
    let msd: Vec<T> = lags.iter().map(|&l| msd_at_lag(unwrapped_frames, l)).collect();

    let diffusion_coefficient = if lags.len() >= 2 {
        linear_fit(&times, &msd)?.slope / T::lit(6.0)
    } else {
        msd[0] / (T::lit(6.0) * times[0])
    };

    // Quality of the zero-intercept Einstein form over the window. An
    // intercept-including fit tracks even a ballistic (quadratic) MSD too
    // closely over a narrow window to act as a diagnostic.
    let sum_tt = times.iter().map(|&t| t * t).fold(T::zero(), |a, v| a + v);
    let sum_tm = times
        .iter()
        .zip(&msd)
        .map(|(&t, &m)| t * m)
        .fold(T::zero(), |a, v| a + v);
    let beta = sum_tm / sum_tt;
    let mean_msd = msd.iter().copied().fold(T::zero(), |a, v| a + v) / T::from_count(msd.len());
    let ss_res = times
        .iter()
        .zip(&msd)
        .map(|(&t, &m)| {
            let r = m - beta * t;
            r * r
        })
        .fold(T::zero(), |a, v| a + v);
    let ss_tot = msd
        .iter()
        .map(|&m| (m - mean_msd) * (m - mean_msd))
        .fold(T::zero(), |a, v| a + v);
    let r_squared = if ss_tot == T::zero() {
        T::one()
    } else {
        (T::one() - ss_res / ss_tot).max(T::zero())
    };

    Ok(MsdEstimate {
        diffusion_coefficient,
        r_squared,
        diffusive: r_squared >= T::lit(0.9),
        window: (times[0], times[times.len() - 1]),
    })
}

/// VACF at one lag, averaged over particles and subsampled time origins.
fn vacf_at_lag<T: Real>(frames: &[Vec<[T; 3]>], lag: usize) -> T {
    let n = frames[0].len();
    let n_origins_avail = frames.len() - lag;
    let stride = (n_origins_avail / VACF_MAX_ORIGINS).max(1);
    let mut acc = T::zero();
    let mut origins = 0usize;
    let mut t0 = 0usize;
    while t0 < n_origins_avail {
        let (a, b) = (&frames[t0], &frames[t0 + lag]);
        for i in 0..n {
            acc += a[i][0] * b[i][0] + a[i][1] * b[i][1] + a[i][2] * b[i][2];
        }
        origins += 1;
        t0 += stride;
    }
    acc / T::from_count(origins * n)
}

/// Lags the VACF must stay inside the 1% band before the scan stops. The
/// backscattering lobe of a dense fluid re-enters the band within a fraction
/// of a time unit, so this comfortably outlasts it at any sane sampling.
const VACF_SETTLE_LAGS: usize = 64;

/// Green-Kubo diffusion coefficient: `D = (1/3) integral of <v(0).v(t)>`
/// by the trapezoidal rule. The integral runs until the VACF has decayed
/// below 1% of its zero-lag value and settled there.
pub fn diffusion_vacf<T: Real>(
    velocity_frames: &[Vec<[T; 3]>],
    frame_dt: T,
) -> Result<VacfEstimate<T>> {
    validate_frames(velocity_frames)?;
    if !(frame_dt > T::zero()) {
        return Err(Error::invalid("frame_dt", "must be positive"));
    }
    let max_lag = velocity_frames.len() - 1;

    let c0 = vacf_at_lag(velocity_frames, 0);
    if c0 == T::zero() {
        // Motionless input: nothing to integrate.
        return Ok(VacfEstimate {
            diffusion_coefficient: T::zero(),
            vacf_zero: c0,
            t_cut: T::zero(),
            decayed: true,
            vacf: vec![c0],
        });
    }
    let threshold = T::lit(0.01) * c0.abs();
    let mut values = vec![c0];
    let mut last_above = 0usize;
    for lag in 1..=max_lag {
        let c = vacf_at_lag(velocity_frames, lag);
        values.push(c);
        if c.abs() >= threshold {
            last_above = lag;
        } else if lag - last_above >= VACF_SETTLE_LAGS {
            break;
        }
    }

    let decayed = last_above < max_lag;
    let cut = if decayed { last_above + 1 } else { max_lag };
    values.truncate(cut + 1);

    let mut integral = T::zero();
    for w in values.windows(2) {
        integral += T::lit(0.5) * (w[0] + w[1]) * frame_dt;
    }
    let t_cut = T::from_count(values.len() - 1) * frame_dt;

    Ok(VacfEstimate {
        diffusion_coefficient: integral / T::lit(3.0),
        vacf_zero: c0,
        t_cut,
        decayed,
        vacf: values,
    })
}
