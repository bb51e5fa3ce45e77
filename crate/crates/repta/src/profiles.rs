//! Hourly renewable capacity-factor profiles: CSV ingestion, per-unit
//! standardization, capacity scaling, and a seeded synthesizer for
//! desk-scale studies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Wind,
    Solar,
}

impl ProfileKind {
    pub fn label(&self) -> &'static str {
        match self {
            ProfileKind::Wind => "wind",
            ProfileKind::Solar => "solar",
        }
    }
}

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("failed to read `{path}`: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("profile schema error: {0}")]
    Schema(String),
    #[error("negative capacity factor {value} at row {row}")]
    Negative { row: usize, value: f64 },
    #[error("profile has {got} rows, horizon needs {want}")]
    HorizonMismatch { got: usize, want: usize },
    #[error("{0}")]
    Domain(String),
}

/// Per-unit capacity-factor series over the planning horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub values: Vec<f64>,
    /// Hours per step.
    pub dt_h: f64,
    pub kind: ProfileKind,
}

impl Profile {
    /// Validates non-negativity; values above 1.0 per-unit are allowed but
    /// logged, since measured turbine data can exceed nameplate.
    pub fn new(values: Vec<f64>, dt_h: f64, kind: ProfileKind) -> Result<Self, ProfileError> {
        for (row, &v) in values.iter().enumerate() {
            if v < 0.0 || !v.is_finite() {
                return Err(ProfileError::Negative { row, value: v });
            }
        }
        let over_unity = values.iter().filter(|&&v| v > 1.0).count();
        if over_unity > 0 {
            log::warn!(
                "{} profile has {} values above 1.0 per-unit",
                kind.label(),
                over_unity
            );
        }
        Ok(Self { values, dt_h, kind })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Full-load hours: dt * sum of per-unit values.
    pub fn flh(&self) -> f64 {
        self.dt_h * self.values.iter().sum::<f64>()
    }
}

/// A labelled hourly power series in MW.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries {
    pub values: Vec<f64>,
    pub label: String,
}

/// Reads `hour,wind_cf,solar_cf` (header required) into a wind and a solar
/// profile of exactly `n` rows.
pub fn load_profiles(
    path: &Path,
    n: usize,
    dt_h: f64,
) -> Result<(Profile, Profile), ProfileError> {
    let file = std::fs::File::open(path).map_err(|source| ProfileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut reader = csv::Reader::from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| ProfileError::Schema(e.to_string()))?
        .clone();
    let col = |name: &str| -> Result<usize, ProfileError> {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| ProfileError::Schema(format!("missing column `{name}`")))
    };
    let wind_col = col("wind_cf")?;
    let solar_col = col("solar_cf")?;
    col("hour")?;

    let mut wind = Vec::with_capacity(n);
    let mut solar = Vec::with_capacity(n);
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| ProfileError::Schema(e.to_string()))?;
        let parse = |idx: usize| -> Result<f64, ProfileError> {
            record
                .get(idx)
                .ok_or_else(|| ProfileError::Schema(format!("row {row} too short")))?
                .trim()
                .parse::<f64>()
                .map_err(|e| ProfileError::Schema(format!("row {row}: {e}")))
        };
        wind.push(parse(wind_col)?);
        solar.push(parse(solar_col)?);
    }
    if wind.len() != n {
        return Err(ProfileError::HorizonMismatch {
            got: wind.len(),
            want: n,
        });
    }
    let wind = Profile::new(wind, dt_h, ProfileKind::Wind)?;
    let solar = Profile::new(solar, dt_h, ProfileKind::Solar)?;
    log::info!(
        "loaded profiles from {}: wind FLH {:.1} h, solar FLH {:.1} h",
        path.display(),
        wind.flh(),
        solar.flh()
    );
    Ok((wind, solar))
}

/// Divides a measured power series by installed capacity to get a per-unit
/// profile.
pub fn standardize(
    raw_power: &PowerSeries,
    installed_capacity_mw: f64,
    kind: ProfileKind,
    dt_h: f64,
) -> Result<Profile, ProfileError> {
    if installed_capacity_mw <= 0.0 {
        return Err(ProfileError::Domain(format!(
            "installed capacity must be positive, got {installed_capacity_mw}"
        )));
    }
    let values = raw_power
        .values
        .iter()
        .map(|p| p / installed_capacity_mw)
        .collect();
    Profile::new(values, dt_h, kind)
}

/// Multiplies a per-unit profile by installed capacity.
pub fn scale(profile: &Profile, capacity_mw: f64) -> Result<PowerSeries, ProfileError> {
    if capacity_mw < 0.0 {
        return Err(ProfileError::Domain(format!(
            "capacity must be non-negative, got {capacity_mw}"
        )));
    }
    Ok(PowerSeries {
        values: profile.values.iter().map(|v| v * capacity_mw).collect(),
        label: format!("{} output", profile.kind.label()),
    })
}

/// Generates a seeded synthetic profile renormalized to `target_flh`.
///
/// Solar: deterministic diurnal clear-sky envelope times a seasonal factor
/// and correlated multiplicative cloud noise, zero outside daylight hours.
/// Wind: mean-reverting first-order autoregressive state mapped through a
/// cubic power curve. Same seed, same profile, bit for bit.
pub fn synthesize_profile(
    kind: ProfileKind,
    target_flh: f64,
    seed: u64,
    n: usize,
    dt_h: f64,
) -> Result<Profile, ProfileError> {
    if n == 0 || dt_h <= 0.0 {
        return Err(ProfileError::Domain("empty horizon".into()));
    }
    let horizon_h = n as f64 * dt_h;
    if target_flh <= 0.0 || target_flh > horizon_h {
        return Err(ProfileError::Domain(format!(
            "target FLH {target_flh} outside (0, {horizon_h}]"
        )));
    }
    if (target_flh - horizon_h).abs() < f64::EPSILON * horizon_h {
        // saturation: the only profile reaching FLH == horizon at cf <= 1
        return Profile::new(vec![1.0; n], dt_h, kind);
    }
    let salt = match kind {
        ProfileKind::Wind => 0x57,
        ProfileKind::Solar => 0x50,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ salt);
    let mut values = match kind {
        ProfileKind::Solar => synth_solar(&mut rng, n, dt_h),
        ProfileKind::Wind => synth_wind(&mut rng, n, dt_h),
    };
    let sum: f64 = values.iter().sum();
    if sum <= 0.0 {
        return Err(ProfileError::Domain(
            "synthesized shape is identically zero; cannot renormalize".into(),
        ));
    }
    let factor = target_flh / (dt_h * sum);
    for v in &mut values {
        *v *= factor;
    }
    Profile::new(values, dt_h, kind)
}

fn synth_solar(rng: &mut ChaCha8Rng, n: usize, dt_h: f64) -> Vec<f64> {
    let mut values = Vec::with_capacity(n);
    // cloud state persists across days
    let mut cloud: f64 = 1.0;
    let mut last_day = usize::MAX;
    for t in 0..n {
        let hour = (t as f64 * dt_h) % 24.0;
        let day = (t as f64 * dt_h / 24.0).floor() as usize;
        if day != last_day {
            let z: f64 = rng.gen_range(-1.0..1.0);
            cloud = (0.7 * cloud + 0.3 * (1.0 + 0.6 * z)).clamp(0.25, 1.25);
            last_day = day;
        }
        let phase = 2.0 * std::f64::consts::PI * (day as f64 - 81.0) / 365.25;
        let half_width = 6.0 + 1.8 * phase.sin();
        let sunrise = 12.0 - half_width;
        let sunset = 12.0 + half_width;
        if hour <= sunrise || hour >= sunset {
            values.push(0.0);
            continue;
        }
        let envelope = (std::f64::consts::PI * (hour - sunrise) / (sunset - sunrise)).sin();
        let seasonal = 0.75 + 0.25 * phase.sin();
        let flicker = 1.0 + 0.08 * rng.gen_range(-1.0..1.0);
        values.push((envelope * seasonal * cloud * flicker).max(0.0));
    }
    values
}

fn synth_wind(rng: &mut ChaCha8Rng, n: usize, dt_h: f64) -> Vec<f64> {
    let mut values = Vec::with_capacity(n);
    let mut state: f64 = 0.5;
    // correlation parameters chosen for multi-hour persistence at 1 h steps
    let alpha = 0.97_f64.powf(dt_h);
    let sigma = 0.06 * dt_h.sqrt();
    let (cut_in, rated) = (0.12, 0.78);
    for _ in 0..n {
        let eps: f64 = rng.gen_range(-1.0..1.0);
        state = alpha * state + (1.0 - alpha) * 0.5 + sigma * eps;
        state = state.clamp(0.0, 1.2);
        let cf = if state <= cut_in {
            0.0
        } else if state >= rated {
            1.0
        } else {
            ((state - cut_in) / (rated - cut_in)).powi(3)
        };
        values.push(cf);
    }
    values
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    #[test]
    fn standardize_divides_by_capacity() {
        let raw = PowerSeries {
            values: vec![100.0, 50.0],
            label: "wind output".into(),
        };
        let p = standardize(&raw, 200.0, ProfileKind::Wind, 1.0).unwrap();
        assert_eq!(p.values, vec![0.5, 0.25]);
    }

    #[test]
    fn standardize_zero_power_and_over_unity() {
        let zero = PowerSeries {
            values: vec![0.0, 0.0],
            label: "x".into(),
        };
        let p = standardize(&zero, 10.0, ProfileKind::Wind, 1.0).unwrap();
        assert_eq!(p.values, vec![0.0, 0.0]);

        let over = PowerSeries {
            values: vec![240.0],
            label: "x".into(),
        };
        let p = standardize(&over, 200.0, ProfileKind::Wind, 1.0).unwrap();
        assert!((p.values[0] - 1.2).abs() < 1e-12);

        assert!(standardize(&zero, 0.0, ProfileKind::Wind, 1.0).is_err());
        assert!(standardize(&zero, -5.0, ProfileKind::Wind, 1.0).is_err());
    }

    #[test]
    fn scale_multiplies_by_capacity() {
        let p = Profile::new(vec![0.5], 1.0, ProfileKind::Wind).unwrap();
        let s = scale(&p, 347.0).unwrap();
        assert!((s.values[0] - 173.5).abs() < 1e-12);

        let p = Profile::new(vec![1.0, 0.2], 1.0, ProfileKind::Wind).unwrap();
        let s = scale(&p, 56.0).unwrap();
        assert!((s.values[0] - 56.0).abs() < 1e-12);
        assert!((s.values[1] - 11.2).abs() < 1e-12);

        let z = scale(&p, 0.0).unwrap();
        assert!(z.values.iter().all(|&v| v == 0.0));
        assert!(scale(&p, -1.0).is_err());
    }

    #[test]
    fn load_profiles_roundtrip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("profiles.csv");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "hour,wind_cf,solar_cf").unwrap();
        for h in 0..24 {
            writeln!(f, "{h},0.5,0.25").unwrap();
        }
        drop(f);
        let (w, s) = load_profiles(&path, 24, 1.0).unwrap();
        assert!((w.flh() - 12.0).abs() < 1e-12);
        assert!((s.flh() - 6.0).abs() < 1e-12);

        // wrong horizon
        assert!(matches!(
            load_profiles(&path, 8760, 1.0),
            Err(ProfileError::HorizonMismatch { got: 24, want: 8760 })
        ));

        // missing column
        let bad = dir.path().join("bad.csv");
        let mut f = std::fs::File::create(&bad).unwrap();
        writeln!(f, "hour,wind").unwrap();
        writeln!(f, "0,0.5").unwrap();
        drop(f);
        assert!(matches!(
            load_profiles(&bad, 1, 1.0),
            Err(ProfileError::Schema(_))
        ));

        // negative value
        let neg = dir.path().join("neg.csv");
        let mut f = std::fs::File::create(&neg).unwrap();
        writeln!(f, "hour,wind_cf,solar_cf").unwrap();
        writeln!(f, "0,-0.5,0.0").unwrap();
        drop(f);
        assert!(matches!(
            load_profiles(&neg, 1, 1.0),
            Err(ProfileError::Negative { .. })
        ));
    }

    #[test]
    fn all_zero_column_gives_zero_flh() {
        let p = Profile::new(vec![0.0; 10], 1.0, ProfileKind::Solar).unwrap();
        assert_eq!(p.flh(), 0.0);
    }

    #[test]
    fn synthesized_solar_hits_target_flh() {
        let p = synthesize_profile(ProfileKind::Solar, 1800.0, 1, 8760, 1.0).unwrap();
        let flh = p.flh();
        assert!(
            (1798.2..=1801.8).contains(&flh),
            "solar FLH {flh} outside 0.1% band"
        );
        // zero at night
        assert!(p.values.contains(&0.0));
        let midnight_zeros = (0..365).all(|d| p.values[d * 24] == 0.0);
        assert!(midnight_zeros, "solar must be dark at midnight");
    }

    #[test]
    fn synthesized_wind_hits_target_and_autocorrelates() {
        let p = synthesize_profile(ProfileKind::Wind, 3500.0, 1, 8760, 1.0).unwrap();
        let flh = p.flh();
        assert!((3496.5..=3503.5).contains(&flh), "wind FLH {flh}");

        let mean = flh / 8760.0;
        let autocorr = |lag: usize| -> f64 {
            let v = &p.values;
            let num: f64 = (lag..v.len())
                .map(|t| (v[t] - mean) * (v[t - lag] - mean))
                .sum();
            let den: f64 = v.iter().map(|x| (x - mean).powi(2)).sum();
            num / den
        };
        let r1 = autocorr(1);
        let r24 = autocorr(24);
        assert!(r1 > 0.8, "lag-1 autocorrelation {r1} too weak");
        assert!(r1 > r24, "persistence should decay with lag");
    }

    #[test]
    fn synthesis_is_deterministic_per_seed() {
        let a = synthesize_profile(ProfileKind::Wind, 800.0, 7, 2000, 1.0).unwrap();
        let b = synthesize_profile(ProfileKind::Wind, 800.0, 7, 2000, 1.0).unwrap();
        assert_eq!(a.values, b.values);
        let c = synthesize_profile(ProfileKind::Wind, 800.0, 8, 2000, 1.0).unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn saturation_target_gives_all_ones() {
        let p = synthesize_profile(ProfileKind::Wind, 8760.0, 1, 8760, 1.0).unwrap();
        assert!(p.values.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn infeasible_targets_rejected() {
        assert!(synthesize_profile(ProfileKind::Wind, 0.0, 1, 100, 1.0).is_err());
        assert!(synthesize_profile(ProfileKind::Wind, 101.0, 1, 100, 1.0).is_err());
    }

    proptest! {
        /// standardize(scale(p, C), C) == p within 1e-12 relative, C > 0.
        #[test]
        fn scale_standardize_roundtrip(
            cap in 0.001_f64..5000.0,
            values in proptest::collection::vec(0.0_f64..1.5, 1..50),
        ) {
            let p = Profile::new(values, 1.0, ProfileKind::Wind).unwrap();
            let s = scale(&p, cap).unwrap();
            let back = standardize(&s, cap, ProfileKind::Wind, 1.0).unwrap();
            for (a, b) in p.values.iter().zip(back.values.iter()) {
                let tol = 1e-12 * a.abs().max(1.0);
                prop_assert!((a - b).abs() <= tol);
            }
        }

        /// FLH of the per-unit profile is capacity-invariant.
        #[test]
        fn flh_capacity_invariant(
            cap in 0.001_f64..5000.0,
            values in proptest::collection::vec(0.0_f64..1.5, 1..50),
        ) {
            let p = Profile::new(values, 1.0, ProfileKind::Wind).unwrap();
            let s = scale(&p, cap).unwrap();
            let series_flh: f64 = s.values.iter().sum::<f64>() / cap;
            prop_assert!((series_flh - p.flh()).abs() <= 1e-9 * p.flh().max(1.0));
        }
    }
}
