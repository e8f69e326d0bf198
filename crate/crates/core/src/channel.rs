//! Path loss, Nakagami-m fading, SIR and Monte Carlo coverage probability.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::config::{NakagamiMapping, SimConfig};
use crate::error::{Error, Result};
use crate::model::Position;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub path_loss_exponent: f64,
    /// Nakagami shape parameter.
    pub m: f64,
    /// Linear SIR threshold.
    pub theta: f64,
    pub mc_samples: u32,
}

impl ChannelParams {
    pub fn from_config(cfg: &SimConfig) -> Self {
        Self {
            path_loss_exponent: cfg.path_loss_exponent,
            m: nakagami_m_with(cfg.rician_k, cfg.nakagami_mapping),
            theta: cfg.sir_threshold,
            mc_samples: cfg.mc_samples,
        }
    }
}

/// `(r^2 + h^2)^(-alpha/2)` for horizontal distance `r` and vertical separation `h`.
pub fn path_loss(r: f64, h: f64, alpha: f64) -> Result<f64> {
    let d2 = r * r + h * h;
    if d2 == 0.0 || !d2.is_finite() {
        return Err(Error::domain("path_loss", format!("zero or non-finite distance (r={r}, h={h})")));
    }
    Ok(d2.powf(-alpha / 2.0))
}

/// Path loss between two positions. Co-located nodes are treated as 1 cm apart.
pub fn link_gain(tx: &Position, rx: &Position, alpha: f64) -> f64 {
    let r = tx.horizontal_distance(rx);
    let h = (tx.h - rx.h).abs();
    path_loss(r, h, alpha).unwrap_or_else(|_| path_loss(0.01, 0.0, alpha).expect("nonzero"))
}

/// Nakagami shape from the Rician factor, as printed: `2(K+1)/(2K+1)`.
pub fn nakagami_m(k: f64) -> f64 {
    2.0 * (k + 1.0) / (2.0 * k + 1.0)
}

/// The conventional Rician-to-Nakagami moment match: `(K+1)^2/(2K+1)`.
pub fn nakagami_m_standard(k: f64) -> f64 {
    (k + 1.0).powi(2) / (2.0 * k + 1.0)
}

pub fn nakagami_m_with(k: f64, mapping: NakagamiMapping) -> f64 {
    match mapping {
        NakagamiMapping::Printed => nakagami_m(k),
        NakagamiMapping::Standard => nakagami_m_standard(k),
    }
}

/// Unit-mean Gamma(m, 1/m) power gain.
pub fn fading_distribution(m: f64) -> Gamma<f64> {
    Gamma::new(m, 1.0 / m).expect("m > 0")
}

pub fn sample_fading<R: Rng + ?Sized>(m: f64, rng: &mut R) -> f64 {
    fading_distribution(m).sample(rng)
}

/// Signal-to-interference ratio at `rx`.
///
/// `fading[0]` is the desired link's gain and `fading[1..]` align with
/// `interferers`. Returns `f64::INFINITY` when there are no interferers.
pub fn sir(tx: &Position, rx: &Position, interferers: &[Position], fading: &[f64], alpha: f64) -> f64 {
    assert_eq!(fading.len(), interferers.len() + 1, "one fading gain per link");
    if interferers.is_empty() {
        return f64::INFINITY;
    }
    let signal = fading[0] * link_gain(tx, rx, alpha);
    let interference: f64 = interferers
        .iter()
        .zip(&fading[1..])
        .map(|(x, g)| g * link_gain(x, rx, alpha))
        .sum();
    signal / interference
}

/// Monte Carlo estimate of `P[SIR >= theta]` with the geometry held fixed.
pub fn coverage_probability<R: Rng + ?Sized>(
    tx: &Position,
    rx: &Position,
    interferers: &[Position],
    params: &ChannelParams,
    rng: &mut R,
) -> f64 {
    if interferers.is_empty() {
        return 1.0;
    }
    let dist = fading_distribution(params.m);
    let signal = link_gain(tx, rx, params.path_loss_exponent);
    let gains: Vec<f64> = interferers
        .iter()
        .map(|x| link_gain(x, rx, params.path_loss_exponent))
        .collect();
    let mut hits = 0u32;
    for _ in 0..params.mc_samples {
        let s = dist.sample(rng) * signal;
        let i: f64 = gains.iter().map(|l| dist.sample(rng) * l).sum();
        if s >= params.theta * i {
            hits += 1;
        }
    }
    hits as f64 / params.mc_samples as f64
}

/// Fading draws shared by every link evaluated within one slot.
///
/// Row `s` holds one gain per transmitter; a link estimate combines the
/// desired transmitter's gain with the interferers' gains from the same row,
/// so each estimate still uses independent draws per link.
#[derive(Debug, Clone)]
pub struct FadingPool {
    nodes: usize,
    samples: usize,
    gains: Vec<f64>,
}

impl FadingPool {
    pub fn draw<R: Rng + ?Sized>(nodes: usize, samples: usize, m: f64, rng: &mut R) -> Self {
        let dist = fading_distribution(m);
        let gains = (0..nodes * samples).map(|_| dist.sample(rng)).collect();
        Self { nodes, samples, gains }
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn gain(&self, sample: usize, node: usize) -> f64 {
        self.gains[sample * self.nodes + node]
    }

    /// Coverage estimate of `tx -> rx` against transmitters indexed into the pool.
    pub fn coverage(
        &self,
        tx: (usize, &Position),
        rx: &Position,
        interferers: &[(usize, Position)],
        alpha: f64,
        theta: f64,
    ) -> f64 {
        if interferers.is_empty() {
            return 1.0;
        }
        let signal = link_gain(tx.1, rx, alpha);
        let gains: Vec<(usize, f64)> = interferers
            .iter()
            .map(|(i, p)| (*i, link_gain(p, rx, alpha)))
            .collect();
        let mut hits = 0usize;
        for s in 0..self.samples {
            let row = &self.gains[s * self.nodes..(s + 1) * self.nodes];
            let i: f64 = gains.iter().map(|(n, l)| row[*n] * l).sum();
            if row[tx.0] * signal >= theta * i {
                hits += 1;
            }
        }
        hits as f64 / self.samples as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn path_loss_values() {
        assert_eq!(path_loss(0.0, 1.0, 2.0).unwrap(), 1.0);
        assert!((path_loss(3.0, 4.0, 2.0).unwrap() - 0.04).abs() < 1e-15);
        assert!((path_loss(3.0, 4.0, 4.0).unwrap() - 0.0016).abs() < 1e-15);
        assert!(path_loss(0.0, 0.0, 2.0).is_err());
    }

    #[test]
    fn nakagami_values() {
        assert_eq!(nakagami_m(0.0), 2.0);
        assert!((nakagami_m(1.0) - 4.0 / 3.0).abs() < 1e-15);
        assert!((nakagami_m(1e9) - 1.0).abs() < 1e-6);
        assert_eq!(nakagami_m_standard(0.0), 1.0);
        assert!((nakagami_m_standard(1.0) - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn fading_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in [0.5, 4.0 / 3.0, 3.0] {
            let n = 1_000_000;
            let draws: Vec<f64> = (0..n).map(|_| sample_fading(m, &mut rng)).collect();
            let mean = draws.iter().sum::<f64>() / n as f64;
            let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            assert!((mean - 1.0).abs() < 0.01, "m={m} mean={mean}");
            assert!((var - 1.0 / m).abs() / (1.0 / m) < 0.05, "m={m} var={var}");
        }
    }

    #[test]
    fn unit_shape_is_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 20_000;
        let mut draws: Vec<f64> = (0..n).map(|_| sample_fading(1.0, &mut rng)).collect();
        draws.sort_by(f64::total_cmp);
        let d = draws
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let f = 1.0 - (-x).exp();
                (f - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - f).abs())
            })
            .fold(0.0, f64::max);
        // 1% critical value of the one-sample KS statistic.
        assert!(d < 1.63 / (n as f64).sqrt(), "KS statistic {d}");
    }

    #[test]
    fn sir_cases() {
        let tx = Position::new(0.0, 0.0, 100.0);
        let rx = Position::new(100.0, 0.0, 100.0);
        let twin = Position::new(200.0, 0.0, 100.0);
        assert_eq!(sir(&tx, &rx, &[twin], &[0.7, 0.7], 3.0), 1.0);
        assert_eq!(sir(&tx, &rx, &[], &[1.0], 3.0), f64::INFINITY);

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let others: Vec<Position> = (0..5)
            .map(|_| Position::new(rng.random_range(-500.0..500.0), rng.random_range(-500.0..500.0), 150.0))
            .collect();
        let fading: Vec<f64> = (0..6).map(|_| sample_fading(1.5, &mut rng)).collect();
        let mut denom = 0.0;
        for (x, g) in others.iter().zip(&fading[1..]) {
            let r2 = (x.x - rx.x).powi(2) + (x.y - rx.y).powi(2) + (x.h - rx.h).powi(2);
            denom += g * r2.powf(-1.5);
        }
        let expect = fading[0] * 100f64.powi(2).powf(-1.5) / denom;
        let got = sir(&tx, &rx, &others, &fading, 3.0);
        assert!((got - expect).abs() / expect < 1e-12);
    }

    #[test]
    fn coverage_edge_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let tx = Position::new(0.0, 0.0, 100.0);
        let rx = Position::new(100.0, 0.0, 100.0);
        let twin = Position::new(200.0, 0.0, 100.0);
        let mut p = ChannelParams { path_loss_exponent: 3.0, m: 4.0 / 3.0, theta: 1.0, mc_samples: 20_000 };
        assert_eq!(coverage_probability(&tx, &rx, &[], &p, &mut rng), 1.0);
        let half = coverage_probability(&tx, &rx, &[twin], &p, &mut rng);
        assert!((half - 0.5).abs() < 0.015, "{half}");
        p.theta = 1e-12;
        assert_eq!(coverage_probability(&tx, &rx, &[twin], &p, &mut rng), 1.0);
    }

    #[test]
    fn coverage_monotone_in_threshold_and_seeded() {
        let tx = Position::new(0.0, 0.0, 100.0);
        let rx = Position::new(120.0, 30.0, 140.0);
        let others = [Position::new(300.0, 0.0, 200.0), Position::new(-50.0, 90.0, 120.0)];
        let mut prev = 1.0;
        for theta in [0.1, 0.5, 1.0, 2.0, 4.0, 8.0] {
            let p = ChannelParams { path_loss_exponent: 3.0, m: 4.0 / 3.0, theta, mc_samples: 4000 };
            let a = coverage_probability(&tx, &rx, &others, &p, &mut ChaCha8Rng::seed_from_u64(3));
            let b = coverage_probability(&tx, &rx, &others, &p, &mut ChaCha8Rng::seed_from_u64(3));
            assert_eq!(a.to_bits(), b.to_bits());
            assert!((0.0..=1.0).contains(&a));
            assert!(a <= prev);
            prev = a;
        }
    }

    #[test]
    fn pool_matches_direct_estimate() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pool = FadingPool::draw(3, 50_000, 4.0 / 3.0, &mut rng);
        let tx = Position::new(0.0, 0.0, 100.0);
        let rx = Position::new(100.0, 0.0, 100.0);
        let twin = Position::new(200.0, 0.0, 100.0);
        let c = pool.coverage((0, &tx), &rx, &[(2, twin)], 3.0, 1.0);
        assert!((c - 0.5).abs() < 0.01, "{c}");
        assert_eq!(pool.coverage((0, &tx), &rx, &[], 3.0, 1.0), 1.0);
    }
}
