//! Full RF-driven ion motion and its spectral decomposition.

use crate::geometry::{DriveConfig, Point, Species};
use crate::interp::Bicubic;
use crate::laplace::Potential;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub dt: f64,
    pub drive: DriveConfig,
    pub species: Species,
    pub initial: TrajectorySample,
    /// Grid spacing of the fields used, a length scale for thresholds.
    pub h: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("particle left the field region at t = {0:.4e} s")]
    Escaped(f64),
    #[error("step count per RF period must be at least 50 (got {0})")]
    StepTooLarge(usize),
    #[error("trajectory too short: {0:.1} secular periods, need 20")]
    TooShort(f64),
    #[error("no secular motion to compare against (amplitude {0:.3e} m)")]
    NoSecularMotion(f64),
    #[error("least-squares system is singular")]
    Singular,
}

impl Trajectory {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,x,y,vx,vy\n");
        for p in &self.samples {
            s.push_str(&format!("{},{},{},{},{}\n", p.t, p.x, p.y, p.vx, p.vy));
        }
        s
    }
}

/// Integrates `m·r̈ = Q·E_rf(r)·cos(Ωt) + Q·E_static(r)` by velocity Verlet
/// with `steps_per_period` steps per RF period. `rf` holds the potential at
/// peak amplitude.
pub fn simulate_trajectory(
    rf: &Potential,
    static_pot: Option<&Potential>,
    species: Species,
    drive: DriveConfig,
    r0: Point,
    v0: [f64; 2],
    duration: f64,
    steps_per_period: usize,
) -> Result<Trajectory, SpectralError> {
    if steps_per_period < 50 {
        return Err(SpectralError::StepTooLarge(steps_per_period));
    }
    let free = |q: usize| !rf.disc.is_fixed(q);
    let brf = Bicubic::new(rf.grid, &rf.values);
    let bst = static_pot.map(|s| Bicubic::new(s.grid, &s.values));
    let qm = species.charge / species.mass;
    let accel = |p: Point, t: f64| -> Option<[f64; 2]> {
        if !brf.cell_ok(p, free) {
            return None;
        }
        let r = brf.sample(p)?;
        let c = (drive.omega * t).cos();
        let (mut ax, mut ay) = (-r.gx * c, -r.gy * c);
        if let Some(b) = &bst {
            let s = b.sample(p)?;
            ax -= s.gx;
            ay -= s.gy;
        }
        Some([qm * ax, qm * ay])
    };
    let dt = 2.0 * PI / (drive.omega * steps_per_period as f64);
    let n = (duration / dt).ceil() as usize;
    let mut p = r0;
    let mut v = v0;
    let mut t = 0.0;
    let mut a = accel(p, t).ok_or(SpectralError::Escaped(0.0))?;
    let first = TrajectorySample { t, x: p.x, y: p.y, vx: v[0], vy: v[1] };
    let mut samples = Vec::with_capacity(n + 1);
    samples.push(first);
    for _ in 0..n {
        let vh = [v[0] + 0.5 * dt * a[0], v[1] + 0.5 * dt * a[1]];
        p = Point::new(p.x + dt * vh[0], p.y + dt * vh[1]);
        t += dt;
        a = accel(p, t).ok_or(SpectralError::Escaped(t))?;
        v = [vh[0] + 0.5 * dt * a[0], vh[1] + 0.5 * dt * a[1]];
        samples.push(TrajectorySample { t, x: p.x, y: p.y, vx: v[0], vy: v[1] });
    }
    Ok(Trajectory { samples, dt, drive, species, initial: first, h: rf.grid.h })
}

// Displacement along the direction of largest variance.
fn principal_signal(traj: &Trajectory) -> (Vec<f64>, Vec<f64>) {
    let n = traj.samples.len() as f64;
    let mx = traj.samples.iter().map(|s| s.x).sum::<f64>() / n;
    let my = traj.samples.iter().map(|s| s.y).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for s in &traj.samples {
        let (dx, dy) = (s.x - mx, s.y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let th = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let (c, si) = (th.cos(), th.sin());
    let t = traj.samples.iter().map(|s| s.t).collect();
    let x = traj.samples.iter().map(|s| (s.x - mx) * c + (s.y - my) * si).collect();
    (t, x)
}

// Hann-windowed DFT magnitude at angular frequency w.
fn windowed_amplitude(t: &[f64], x: &[f64], w: f64) -> f64 {
    let n = t.len();
    let (mut re, mut im, mut norm) = (0.0, 0.0, 0.0);
    for k in 0..n {
        let win = 0.5 - 0.5 * (2.0 * PI * k as f64 / (n - 1) as f64).cos();
        re += win * x[k] * (w * t[k]).cos();
        im += win * x[k] * (w * t[k]).sin();
        norm += win;
    }
    2.0 * re.hypot(im) / norm
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

/// Local maxima of the windowed spectrum between 0 and `2Ω`, strongest first,
/// as `(angular frequency, amplitude)`.
pub fn spectrum_peaks(traj: &Trajectory, count: usize) -> Vec<(f64, f64)> {
    let (t, x) = principal_signal(traj);
    let span = t[t.len() - 1] - t[0];
    let dw = 2.0 * PI / span / 4.0;
    let wmax = 2.0 * traj.drive.omega;
    let m = (wmax / dw) as usize;
    let amp: Vec<f64> = (1..m).map(|k| windowed_amplitude(&t, &x, k as f64 * dw)).collect();
    let mut coarse: Vec<usize> = (1..amp.len() - 1).filter(|&k| amp[k] > amp[k - 1] && amp[k] >= amp[k + 1]).collect();
    coarse.sort_by(|&a, &b| amp[b].total_cmp(&amp[a]));
    // refining can only reorder lines of nearly equal height
    coarse.truncate(2 * count);
    let mut peaks: Vec<(f64, f64)> = coarse
        .into_iter()
        .map(|k| {
            let w0 = (k + 1) as f64 * dw;
            let w = golden_max(|w| windowed_amplitude(&t, &x, w), w0 - dw, w0 + dw);
            (w, windowed_amplitude(&t, &x, w))
        })
        .collect();
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
    peaks.truncate(count);
    peaks
}

/// Secular angular frequency: the strongest spectral line below `Ω/2`.
pub fn secular_frequency(traj: &Trajectory) -> Result<f64, SpectralError> {
    let (t, x) = principal_signal(traj);
    let span = t[t.len() - 1] - t[0];
    let dw = 2.0 * PI / span / 4.0;
    let wmax = traj.drive.omega / 2.0;
    let m = (wmax / dw) as usize;
    let (k, a) = (1..m)
        .map(|k| (k, windowed_amplitude(&t, &x, k as f64 * dw)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or(SpectralError::TooShort(0.0))?;
    if a < 1e-9 * traj.h {
        return Err(SpectralError::NoSecularMotion(a));
    }
    let w0 = k as f64 * dw;
    let w = golden_max(|w| windowed_amplitude(&t, &x, w), (w0 - dw).max(dw / 2.0), w0 + dw);
    let periods = span * w / (2.0 * PI);
    if periods < 20.0 {
        return Err(SpectralError::TooShort(periods));
    }
    Ok(w)
}

// Least-squares amplitudes of cos/sin pairs at the given frequencies plus a constant.
fn fit_amplitudes(t: &[f64], x: &[f64], freqs: &[f64]) -> Result<Vec<f64>, SpectralError> {
    let k = 1 + 2 * freqs.len();
    let mut ata = vec![vec![0.0; k]; k];
    let mut atb = vec![0.0; k];
    let mut row = vec![0.0; k];
    for (&ti, &xi) in t.iter().zip(x) {
        row[0] = 1.0;
        for (n, &w) in freqs.iter().enumerate() {
            row[1 + 2 * n] = (w * ti).cos();
            row[2 + 2 * n] = (w * ti).sin();
        }
        for a in 0..k {
            atb[a] += row[a] * xi;
            for b in 0..k {
                ata[a][b] += row[a] * row[b];
            }
        }
    }
    // Gaussian elimination with partial pivoting.
    for c in 0..k {
        let piv = (c..k).max_by(|&a, &b| ata[a][c].abs().total_cmp(&ata[b][c].abs())).unwrap();
        if ata[piv][c].abs() < 1e-300 {
            return Err(SpectralError::Singular);
        }
        ata.swap(c, piv);
        atb.swap(c, piv);
        for r in c + 1..k {
            let f = ata[r][c] / ata[c][c];
            for cc in c..k {
                ata[r][cc] -= f * ata[c][cc];
            }
            atb[r] -= f * atb[c];
        }
    }
    let mut sol = vec![0.0; k];
    for r in (0..k).rev() {
        let s: f64 = (r + 1..k).map(|cc| ata[r][cc] * sol[cc]).sum();
        sol[r] = (atb[r] - s) / ata[r][r];
    }
    Ok(freqs.iter().enumerate().map(|(n, _)| sol[1 + 2 * n].hypot(sol[2 + 2 * n])).collect())
}

/// Combined amplitude of the `Ω ± ω` sidebands over the secular amplitude.
pub fn micromotion_ratio(traj: &Trajectory) -> Result<f64, SpectralError> {
    let w = secular_frequency(traj)?;
    let om = traj.drive.omega;
    let (t, x) = principal_signal(traj);
    let a = fit_amplitudes(&t, &x, &[w, om - w, om + w, om])?;
    if a[0] < 1e-9 * traj.h {
        return Err(SpectralError::NoSecularMotion(a[0]));
    }
    Ok((a[1] + a[2]) / a[0])
}

/// Amplitude of motion at the drive frequency itself, along `x` and `y`.
pub fn driven_micromotion_amplitude(traj: &Trajectory) -> Result<[f64; 2], SpectralError> {
    let om = traj.drive.omega;
    let t: Vec<f64> = traj.samples.iter().map(|s| s.t).collect();
    let x: Vec<f64> = traj.samples.iter().map(|s| s.x).collect();
    let y: Vec<f64> = traj.samples.iter().map(|s| s.y).collect();
    let ax = fit_amplitudes(&t, &x, &[om])?;
    let ay = fit_amplitudes(&t, &y, &[om])?;
    Ok([ax[0], ay[0]])
}
