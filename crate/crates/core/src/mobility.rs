//! 3D Gauss-Markov mobility with pause times, confined to the network cylinder.

use std::f64::consts::PI;

use rand::Rng;

use crate::config::SimConfig;
use crate::model::Position;

/// Bands and tuning for the Gauss-Markov process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilityParams {
    pub alpha: f64,
    pub speed: (f64, f64),
    pub direction: (f64, f64),
    pub pitch: (f64, f64),
    /// Band of the additive speed noise term.
    pub speed_noise: (f64, f64),
    pub pause: (f64, f64),
    pub move_leg_s: f64,
    pub radius: f64,
    pub altitude: (f64, f64),
}

impl MobilityParams {
    pub fn from_config(cfg: &SimConfig) -> Self {
        let half = (cfg.speed_max_mps - cfg.speed_min_mps) / 2.0;
        Self {
            alpha: cfg.gmm_alpha,
            speed: (cfg.speed_min_mps, cfg.speed_max_mps),
            direction: (cfg.direction_min_rad, cfg.direction_max_rad),
            pitch: (cfg.pitch_min_rad, cfg.pitch_max_rad),
            speed_noise: (-half, half),
            pause: (cfg.pause_min_s, cfg.pause_max_s),
            move_leg_s: cfg.move_leg_s,
            radius: cfg.network_radius_m,
            altitude: (cfg.altitude_min_m, cfg.altitude_max_m),
        }
    }
}

/// Kinematic state of one UAV.
///
/// `direction` is measured relative to `heading`, the UAV's base course in the
/// horizontal plane; boundary reflections rotate `heading` and leave the
/// Gauss-Markov direction process untouched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilityState {
    pub speed: f64,
    pub direction: f64,
    pub pitch: f64,
    pub mean_speed: f64,
    pub mean_direction: f64,
    pub mean_pitch: f64,
    pub heading: f64,
    pub pause_remaining: f64,
    pub leg_remaining: f64,
}

impl MobilityState {
    /// State at the means, heading along +x, not paused.
    pub fn at_means(params: &MobilityParams) -> Self {
        let mean = |b: (f64, f64)| (b.0 + b.1) / 2.0;
        Self {
            speed: mean(params.speed),
            direction: mean(params.direction),
            pitch: mean(params.pitch),
            mean_speed: mean(params.speed),
            mean_direction: mean(params.direction),
            mean_pitch: mean(params.pitch),
            heading: 0.0,
            pause_remaining: 0.0,
            leg_remaining: 0.0,
        }
    }

    pub fn is_paused(&self) -> bool {
        self.pause_remaining > 0.0
    }

    /// Absolute horizontal course.
    pub fn course(&self) -> f64 {
        self.heading + self.direction
    }
}

/// Random terms consumed by one Gauss-Markov update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussMarkovDraws {
    pub speed: f64,
    pub direction: f64,
    pub pitch: f64,
}

impl GaussMarkovDraws {
    pub fn sample<R: Rng + ?Sized>(params: &MobilityParams, rng: &mut R) -> Self {
        Self {
            speed: uniform(rng, params.speed_noise),
            direction: uniform(rng, params.direction),
            pitch: uniform(rng, params.pitch),
        }
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

/// One Gauss-Markov update with explicit random terms.
pub fn gauss_markov_update(
    state: &MobilityState,
    params: &MobilityParams,
    draws: GaussMarkovDraws,
) -> MobilityState {
    let a = params.alpha;
    let memory = (1.0 - a * a).sqrt();
    let mix = |prev: f64, mean: f64, noise: f64| a * prev + (1.0 - a) * mean + memory * noise;
    MobilityState {
        speed: mix(state.speed, state.mean_speed, draws.speed).clamp(params.speed.0, params.speed.1),
        direction: mix(state.direction, state.mean_direction, draws.direction)
            .clamp(params.direction.0, params.direction.1),
        pitch: mix(state.pitch, state.mean_pitch, draws.pitch).clamp(params.pitch.0, params.pitch.1),
        ..*state
    }
}

pub fn step_gauss_markov<R: Rng + ?Sized>(
    state: &MobilityState,
    params: &MobilityParams,
    rng: &mut R,
) -> MobilityState {
    let draws = GaussMarkovDraws::sample(params, rng);
    gauss_markov_update(state, params, draws)
}

/// Moves `pos` for `dt` seconds along the current course.
pub fn advance_position(pos: &Position, state: &MobilityState, dt: f64) -> Position {
    let step = state.speed * dt;
    let course = state.course();
    Position {
        x: pos.x + step * course.cos() * state.pitch.cos(),
        y: pos.y + step * course.sin() * state.pitch.cos(),
        h: pos.h + step * state.pitch.sin(),
    }
}

/// Reflects radial overflow back into the cylinder and clamps altitude.
pub fn apply_boundary(pos: &Position, radius: f64, altitude: (f64, f64)) -> Position {
    let rho = pos.radial();
    let (x, y) = if rho > radius {
        let reflected = (2.0 * radius - rho).clamp(0.0, radius);
        let scale = reflected / rho;
        (pos.x * scale, pos.y * scale)
    } else {
        (pos.x, pos.y)
    };
    Position {
        x,
        y,
        h: pos.h.clamp(altitude.0, altitude.1),
    }
}

/// Heading after bouncing off the cylinder wall at `pos`.
fn reflected_heading(pos: &Position, state: &MobilityState) -> f64 {
    let normal = pos.y.atan2(pos.x);
    let course = 2.0 * normal + PI - state.course();
    wrap_angle(course - state.direction)
}

fn wrap_angle(a: f64) -> f64 {
    let mut a = (a + PI).rem_euclid(2.0 * PI) - PI;
    if a <= -PI {
        a += 2.0 * PI;
    }
    a
}

pub fn sample_pause<R: Rng + ?Sized>(rng: &mut R, band: (f64, f64)) -> f64 {
    uniform(rng, band)
}

/// Uniform point inside the cylinder and altitude band.
pub fn random_location<R: Rng + ?Sized>(rng: &mut R, params: &MobilityParams) -> Position {
    let rho = params.radius * rng.random::<f64>().sqrt();
    let theta = rng.random_range(-PI..PI);
    Position::new(rho * theta.cos(), rho * theta.sin(), uniform(rng, params.altitude))
}

/// Advances one UAV by one slot: alternates flight legs and pauses.
/// Returns the new position and whether the UAV was airborne-moving this slot.
pub fn tick<R: Rng + ?Sized>(
    pos: &Position,
    state: &mut MobilityState,
    params: &MobilityParams,
    dt: f64,
    rng: &mut R,
) -> (Position, bool) {
    if state.pause_remaining > 0.0 {
        state.pause_remaining = (state.pause_remaining - dt).max(0.0);
        return (*pos, false);
    }
    if state.leg_remaining <= 0.0 {
        *state = step_gauss_markov(state, params, rng);
        state.leg_remaining = params.move_leg_s;
    }
    let raw = advance_position(pos, state, dt);
    if raw.radial() > params.radius {
        state.heading = reflected_heading(&raw, state);
    }
    let next = apply_boundary(&raw, params.radius, params.altitude);
    state.leg_remaining -= dt;
    if state.leg_remaining <= 1e-12 {
        state.leg_remaining = 0.0;
        state.pause_remaining = sample_pause(rng, params.pause);
    }
    (next, true)
}
