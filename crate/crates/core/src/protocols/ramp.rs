//! Electrode voltage ramps: key-position interpolation and the first-order
//! low-pass filter of the DAC outputs.

use std::f64::consts::PI;
use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::protocols::schedule::{ProfileKind, TurnProfile};

/// Channel names used by the experimental turn waveforms.
pub const ELECTRODE_CHANNELS: [&str; 7] = ["EC", "ME", "AE", "XB", "YB", "DE", "offset"];

/// Piecewise-linear voltages on named channels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RampTable {
    pub channels: Vec<String>,
    /// Sample times, s, strictly increasing.
    pub times: Vec<f64>,
    /// One row of channel values per time, V.
    pub values: Vec<Vec<f64>>,
}

impl RampTable {
    pub fn new(channels: Vec<String>, times: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::InvalidInput("ramp needs at least one channel".into()));
        }
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "ramp has {} times but {} rows",
                times.len(),
                values.len()
            )));
        }
        if let Some(k) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(format!(
                "ramp times must increase strictly (row {} at {:e} s)",
                k + 1,
                times[k + 1]
            )));
        }
        if let Some(k) = values.iter().position(|r| r.len() != channels.len()) {
            return Err(Error::InvalidInput(format!(
                "row {k} has {} values for {} channels",
                values[k].len(),
                channels.len()
            )));
        }
        if times.iter().chain(values.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("ramp contains non-finite entries".into()));
        }
        Ok(Self {
            channels,
            times,
            values,
        })
    }

    pub fn channel_index(&self, name: &str) -> Result<usize> {
        self.channels
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::InvalidInput(format!("no channel named {name:?}")))
    }

    /// Linear interpolation; held constant outside the table.
    pub fn value_at(&self, t: f64) -> Vec<f64> {
        let n = self.times.len();
        if t <= self.times[0] {
            return self.values[0].clone();
        }
        if t >= self.times[n - 1] {
            return self.values[n - 1].clone();
        }
        let k = self.times.partition_point(|&tk| tk <= t) - 1;
        let s = (t - self.times[k]) / (self.times[k + 1] - self.times[k]);
        self.values[k]
            .iter()
            .zip(&self.values[k + 1])
            .map(|(a, b)| a + (b - a) * s)
            .collect()
    }

    pub fn channel_at(&self, name: &str, t: f64) -> Result<f64> {
        let i = self.channel_index(name)?;
        Ok(self.value_at(t)[i])
    }

    pub fn column(&self, index: usize) -> Vec<f64> {
        self.values.iter().map(|r| r[index]).collect()
    }

    /// Header `time,<channels...>`, times in seconds.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["time".to_string()];
        header.extend(self.channels.iter().cloned());
        w.write_record(&header)?;
        for (t, row) in self.times.iter().zip(&self.values) {
            let mut rec = vec![t.to_string()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers()?.clone();
        if header.len() < 2 {
            return Err(Error::Schema(
                "ramp CSV needs a time column and at least one channel".into(),
            ));
        }
        let channels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(|f| f.trim().parse::<f64>()).collect();
            let row = parsed.map_err(|e| Error::Schema(format!("row {}: {e}", line + 1)))?;
            times.push(row[0]);
            values.push(row[1..].to_vec());
        }
        Self::new(channels, times, values)
    }
}

/// Voltages at one key orientation of the turn.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeyPosition {
    /// Orientation of the string, degrees in `[0, 180]`.
    pub angle_deg: f64,
    pub values: Vec<f64>,
}

/// Time at which `profile` reaches `|theta| = angle`.
fn time_of_angle(profile: &TurnProfile, angle: f64) -> f64 {
    let s = (angle / PI).clamp(0.0, 1.0);
    let frac = match profile.kind {
        ProfileKind::ConstantVelocity => s,
        ProfileKind::SineVelocity => (1.0 - 2.0 * s).acos() / PI,
    };
    frac * profile.t_swap
}

/// Linear interpolation between key orientations, placed in time by the
/// angle schedule of `profile`.
pub fn key_position_ramp(channels: &[&str], keys: &[KeyPosition], profile: &TurnProfile) -> Result<RampTable> {
    if keys.len() < 2 {
        return Err(Error::InvalidInput("need at least two key positions".into()));
    }
    if let Some(k) = keys.iter().find(|k| !(0.0..=180.0).contains(&k.angle_deg)) {
        return Err(Error::InvalidInput(format!(
            "key angle {} deg outside [0, 180]",
            k.angle_deg
        )));
    }
    let times = keys
        .iter()
        .map(|k| time_of_angle(profile, k.angle_deg.to_radians()))
        .collect();
    RampTable::new(
        channels.iter().map(|c| c.to_string()).collect(),
        times,
        keys.iter().map(|k| k.values.clone()).collect(),
    )
}

/// First-order low-pass with corner `f_cutoff` applied to each channel.
///
/// The input is treated as exactly piecewise linear between samples and is
/// resampled on a grid containing every knot with spacing at most
/// `1/(50 f_cutoff)`; the filter starts in steady state with the first row.
pub fn rc_filter(ramp: &RampTable, f_cutoff: f64) -> Result<RampTable> {
    if !(f_cutoff > 0.0 && f_cutoff.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "cut-off frequency must be positive, got {f_cutoff}"
        )));
    }
    let tau = 1.0 / (2.0 * PI * f_cutoff);
    let max_h = 1.0 / (50.0 * f_cutoff);
    let mut times = vec![ramp.times[0]];
    for w in ramp.times.windows(2) {
        let n = ((w[1] - w[0]) / max_h).ceil().max(1.0) as usize;
        for k in 1..=n {
            times.push(if k == n {
                w[1]
            } else {
                w[0] + (w[1] - w[0]) * k as f64 / n as f64
            });
        }
    }
    let input: Vec<Vec<f64>> = times.iter().map(|&t| ramp.value_at(t)).collect();
    let mut out = Vec::with_capacity(times.len());
    let mut y = input[0].clone();
    out.push(y.clone());
    for k in 1..times.len() {
        let h = times[k] - times[k - 1];
        let decay = (-h / tau).exp();
        for c in 0..y.len() {
            let x0 = input[k - 1][c];
            let x1 = input[k][c];
            let slope = (x1 - x0) / h;
            y[c] = x1 - slope * tau + (y[c] - x0 + slope * tau) * decay;
        }
        out.push(y.clone());
    }
    RampTable::new(ramp.channels.clone(), times, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::turn_amplitudes;
    use crate::protocols::schedule::Direction;

    fn profile(t_swap: f64) -> TurnProfile {
        TurnProfile::new(ProfileKind::ConstantVelocity, t_swap, Direction::Clockwise).unwrap()
    }

    /// Waveform amplitudes at the five key orientations.
    fn amplitude_keys() -> Vec<KeyPosition> {
        [0.0, 45.0, 90.0, 135.0, 180.0]
            .iter()
            .map(|&a: &f64| {
                let amp = turn_amplitudes(a.to_radians());
                KeyPosition {
                    angle_deg: a,
                    values: vec![amp.a_trans, amp.a_diag],
                }
            })
            .collect()
    }

    #[test]
    fn two_keys_give_a_line_and_keys_are_reproduced() {
        let keys = vec![
            KeyPosition {
                angle_deg: 0.0,
                values: vec![1.0, -2.0],
            },
            KeyPosition {
                angle_deg: 180.0,
                values: vec![3.0, 2.0],
            },
        ];
        let r = key_position_ramp(&["A", "B"], &keys, &profile(1e-3)).unwrap();
        assert_eq!(r.value_at(0.5e-3), vec![2.0, 0.0]);
        assert_eq!(r.value_at(0.0), vec![1.0, -2.0]);
        assert_eq!(r.value_at(1e-3), vec![3.0, 2.0]);
        let five = key_position_ramp(&["trans", "diag"], &amplitude_keys(), &profile(1e-3)).unwrap();
        for (k, key) in amplitude_keys().iter().enumerate() {
            assert_eq!(five.value_at(five.times[k]), key.values);
        }
    }

    #[test]
    fn five_key_interpolation_error() {
        // On [0, pi/4] the chord of sin(2t)/2 deviates most where
        // cos(2t) = 2/pi; the same bound holds for every segment and for
        // the transverse amplitude.
        let bound = 0.5 * (1.0 - (2.0 / PI).powi(2)).sqrt() - (2.0 / PI).acos() / PI;
        let r = key_position_ramp(&["trans", "diag"], &amplitude_keys(), &profile(1.0)).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..=4000 {
            let t = i as f64 / 4000.0;
            let exact = turn_amplitudes(PI * t);
            let v = r.value_at(t);
            worst = worst.max((v[0] - exact.a_trans).abs()).max((v[1] - exact.a_diag).abs());
        }
        assert!((worst - bound).abs() < 1e-5, "{worst} vs {bound}");
        assert!((bound - 0.1053).abs() < 1e-3);
    }

    #[test]
    fn sine_profile_places_keys_by_angle() {
        let p = TurnProfile::new(ProfileKind::SineVelocity, 1.0, Direction::Clockwise).unwrap();
        let r = key_position_ramp(&["trans", "diag"], &amplitude_keys(), &p).unwrap();
        for (t, key) in r.times.iter().zip(amplitude_keys()) {
            assert!((p.theta_clamped(*t).abs() - key.angle_deg.to_radians()).abs() < 1e-12);
        }
    }

    #[test]
    fn step_response_time_constant() {
        let f_c = 1e3;
        let tau = 1.0 / (2.0 * PI * f_c);
        let step = RampTable::new(
            vec!["v".into()],
            vec![0.0, 1e-9, 5e-3],
            vec![vec![0.0], vec![1.0], vec![1.0]],
        )
        .unwrap();
        let out = rc_filter(&step, f_c).unwrap();
        let v = out.channel_at("v", tau).unwrap();
        assert!((v - (1.0 - (-1.0f64).exp())).abs() < 0.01 * (1.0 - (-1.0f64).exp()));
        assert!(out
            .times
            .windows(2)
            .all(|w| w[1] - w[0] <= 1.0 / (50.0 * f_c) * (1.0 + 1e-12)));
    }

    fn filtered_deviation(t_swap: f64) -> (f64, f64) {
        let ramp = key_position_ramp(&["trans", "diag"], &amplitude_keys(), &profile(t_swap)).unwrap();
        let out = rc_filter(&ramp, 1e3).unwrap();
        let mut worst: f64 = 0.0;
        for (t, row) in out.times.iter().zip(&out.values) {
            let ideal = ramp.value_at(*t);
            for c in 0..2 {
                worst = worst.max((row[c] - ideal[c]).abs());
            }
        }
        let peak_t = t_swap / 4.0;
        let lag = 1.0 - out.channel_at("diag", peak_t).unwrap() / ramp.channel_at("diag", peak_t).unwrap();
        (worst, lag)
    }

    #[test]
    fn slow_ramp_passes_fast_ramp_lags() {
        // Both channels span a full scale of one.
        let (slow, _) = filtered_deviation(20e-3);
        assert!(slow < 0.02, "{slow}");
        let (_, lag) = filtered_deviation(0.5e-3);
        assert!(lag > 0.1, "{lag}");
    }

    #[test]
    fn csv_round_trip() {
        let r = key_position_ramp(&["trans", "diag"], &amplitude_keys(), &profile(1.3e-3)).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("time,trans,diag\n"));
        let back = RampTable::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn invalid_tables_rejected() {
        assert!(RampTable::new(vec!["a".into()], vec![0.0, 0.0], vec![vec![1.0], vec![2.0]]).is_err());
        assert!(RampTable::new(vec!["a".into()], vec![0.0], vec![vec![1.0, 2.0]]).is_err());
        assert!(RampTable::read_csv("time,a\n0,1\n1,x\n".as_bytes()).is_err());
        let r = RampTable::new(vec!["a".into()], vec![0.0, 1.0], vec![vec![1.0], vec![2.0]]).unwrap();
        assert!(rc_filter(&r, 0.0).is_err());
    }
}
