//! Hexagonal macro layout and random placement of picos and users.

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};

use super::config::{db_to_linear, Loading, NetworkConfig, PathLoss};
use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};
use crate::scalar::Real;

const AXIAL_DIRECTIONS: [(i64, i64); 6] = [(1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1)];

/// Axial coordinates of the first `count` cells of a hexagonal spiral.
pub fn hex_spiral(count: usize) -> Vec<(i64, i64)> {
    let mut cells = Vec::with_capacity(count);
    if count == 0 {
        return cells;
    }
    cells.push((0, 0));
    let mut radius = 1i64;
    while cells.len() < count {
        let (dq, dr) = AXIAL_DIRECTIONS[4];
        let mut cell = (dq * radius, dr * radius);
        for &(sq, sr) in &AXIAL_DIRECTIONS {
            for _ in 0..radius {
                cells.push(cell);
                cell = (cell.0 + sq, cell.1 + sr);
            }
        }
        radius += 1;
    }
    cells.truncate(count);
    cells
}

/// Frequency-reuse color of an axial cell; adjacent cells never share one.
pub fn reuse_color(cell: (i64, i64)) -> usize {
    (cell.0 - cell.1).rem_euclid(3) as usize
}

pub fn axial_to_xy(cell: (i64, i64), spacing: f64) -> [f64; 2] {
    let (q, r) = (cell.0 as f64, cell.1 as f64);
    [spacing * (q + r / 2.0), spacing * (3f64.sqrt() / 2.0) * r]
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn in_hexagon(p: [f64; 2], center: [f64; 2], inradius: f64) -> bool {
    let (dx, dy) = (p[0] - center[0], p[1] - center[1]);
    (0..3).all(|i| {
        let angle = std::f64::consts::FRAC_PI_3 * i as f64;
        (dx * angle.cos() + dy * angle.sin()).abs() <= inradius
    })
}

fn uniform_in_cell<R: Rng>(
    rng: &mut R,
    center: [f64; 2],
    spacing: f64,
    mut accept: impl FnMut([f64; 2]) -> bool,
) -> [f64; 2] {
    let half = spacing / 2.0;
    let outer = spacing / 3f64.sqrt();
    loop {
        let p = [
            center[0] + rng.random_range(-outer..outer),
            center[1] + rng.random_range(-outer..outer),
        ];
        if in_hexagon(p, center, half) && accept(p) {
            return p;
        }
    }
}

fn uniform_in_annulus<R: Rng>(rng: &mut R, center: [f64; 2], inner: f64, outer: f64) -> [f64; 2] {
    let radius = (rng.random_range(inner * inner..outer * outer)).sqrt();
    let angle = rng.random_range(0.0..std::f64::consts::TAU);
    [center[0] + radius * angle.cos(), center[1] + radius * angle.sin()]
}

/// Positions and long-term channel gains of a generated network.
#[derive(Clone, Debug, PartialEq)]
pub struct LargeScaleState<T: Real = f64> {
    pub n_macro: usize,
    pub bs_positions: Vec<[f64; 2]>,
    pub user_positions: Vec<[f64; 2]>,
    /// Axial cell of each macro, used for frequency-reuse coloring.
    pub macro_cells: Vec<(i64, i64)>,
    /// Macro whose area each pico was dropped in.
    pub pico_area: Vec<usize>,
    /// Row-major `users x bs` linear power gains.
    pub sigma_sq: Vec<T>,
}

impl<T: Real> LargeScaleState<T> {
    pub fn n_users(&self) -> usize {
        self.user_positions.len()
    }

    pub fn n_bs(&self) -> usize {
        self.bs_positions.len()
    }

    pub fn gain(&self, user: usize, bs: usize) -> T {
        self.sigma_sq[user * self.n_bs() + bs]
    }

    pub fn is_macro(&self, bs: usize) -> bool {
        bs < self.n_macro
    }
}

/// Linear power gain for a link of length `distance_m` with shadowing `shadow_db`.
pub fn long_term_gain(model: PathLoss, distance_m: f64, shadow_db: f64) -> f64 {
    db_to_linear(-(model.loss_db(distance_m) + shadow_db))
}

fn sample_count<R: Rng>(rng: &mut R, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let draw: f64 = Poisson::new(mean).expect("positive mean").sample(rng);
    draw as usize
}

/// Drops macros, picos and users and draws path loss plus shadowing.
pub fn generate_topology<T: Real>(config: &NetworkConfig, seed: u64) -> Result<LargeScaleState<T>> {
    config.validate()?;
    let spacing = config.inter_site_distance;
    let macro_cells = hex_spiral(config.n_macro);
    let macros: Vec<[f64; 2]> = macro_cells.iter().map(|&c| axial_to_xy(c, spacing)).collect();

    let mut rng = stream(seed, Purpose::Layout, 0, 0);
    let mut load_rng = stream(seed, Purpose::Loading, 0, 0);
    let counts: Vec<(usize, usize)> = (0..config.n_macro)
        .map(|_| match config.loading {
            Loading::Uniform => (config.picos_per_macro, config.users_per_macro),
            Loading::Poisson {
                mean_picos,
                mean_users,
            } => (
                sample_count(&mut load_rng, mean_picos),
                sample_count(&mut load_rng, mean_users),
            ),
        })
        .collect();

    let mut picos: Vec<[f64; 2]> = Vec::new();
    let mut pico_area = Vec::new();
    if let Some(explicit) = &config.pico_positions {
        for &p in explicit {
            let area = (0..macros.len())
                .min_by(|&a, &b| distance(p, macros[a]).total_cmp(&distance(p, macros[b])))
                .unwrap_or(0);
            picos.push(p);
            pico_area.push(area);
        }
    } else {
        for (area, &(n_picos, _)) in counts.iter().enumerate() {
            for _ in 0..n_picos {
                let center = macros[area];
                let mut tries = 0;
                let p = uniform_in_cell(&mut rng, center, spacing, |p| {
                    tries += 1;
                    let far_from_macro = distance(p, center) >= config.min_pico_macro_distance;
                    let spread = tries > 10_000
                        || picos
                            .iter()
                            .all(|&q| distance(p, q) >= 2.0 * config.cluster_radius);
                    far_from_macro && spread
                });
                picos.push(p);
                pico_area.push(area);
            }
        }
    }

    let mut users = Vec::new();
    for (area, &(_, n_users)) in counts.iter().enumerate() {
        let center = macros[area];
        let local: Vec<[f64; 2]> = picos
            .iter()
            .zip(&pico_area)
            .filter(|(_, &a)| a == area)
            .map(|(&p, _)| p)
            .collect();
        let clustered = if local.is_empty() {
            0
        } else {
            (config.clustered_fraction * n_users as f64).round() as usize
        };
        for i in 0..n_users {
            let p = if i < clustered {
                let pico = local[rng.random_range(0..local.len())];
                uniform_in_annulus(&mut rng, pico, config.min_distance, config.cluster_radius)
            } else {
                uniform_in_cell(&mut rng, center, spacing, |p| {
                    macros
                        .iter()
                        .chain(&picos)
                        .all(|&b| distance(p, b) >= config.min_distance)
                })
            };
            users.push(p);
        }
    }
    if users.is_empty() {
        return Err(Error::Config("scenario has no users".into()));
    }

    let bs_positions: Vec<[f64; 2]> = macros.iter().chain(&picos).copied().collect();
    let n_bs = bs_positions.len();
    let shadow = Normal::new(0.0, config.shadowing_std_db).expect("finite std");
    let mut shadow_rng = stream(seed, Purpose::Shadowing, 0, 0);
    let mut sigma_sq = Vec::with_capacity(users.len() * n_bs);
    for &u in &users {
        for (n, &b) in bs_positions.iter().enumerate() {
            let model = if n < config.n_macro {
                config.macro_pathloss
            } else {
                config.pico_pathloss
            };
            let s = if config.shadowing_std_db > 0.0 {
                shadow.sample(&mut shadow_rng)
            } else {
                0.0
            };
            let d = distance(u, b).max(config.min_distance);
            sigma_sq.push(T::lit(long_term_gain(model, d, s)));
        }
    }

    Ok(LargeScaleState {
        n_macro: config.n_macro,
        bs_positions,
        user_positions: users,
        macro_cells,
        pico_area,
        sigma_sq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spiral_cells_are_distinct_and_first_ring_is_adjacent() {
        let cells = hex_spiral(19);
        let mut sorted = cells.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 19);
        for &c in &cells[1..7] {
            let p = axial_to_xy(c, 500.0);
            assert!((distance(p, [0.0, 0.0]) - 500.0).abs() < 1e-9);
        }
    }

    #[test]
    fn adjacent_cells_have_distinct_colors() {
        let cells = hex_spiral(19);
        for &a in &cells {
            for &b in &cells {
                let d = distance(axial_to_xy(a, 1.0), axial_to_xy(b, 1.0));
                if (d - 1.0).abs() < 1e-9 {
                    assert_ne!(reuse_color(a), reuse_color(b));
                }
            }
        }
    }

    #[test]
    fn single_user_gain_matches_macro_path_loss() {
        let expected = 10f64.powf(-(128.1 + 37.6 * 0.1f64.log10()) / 10.0);
        let got = long_term_gain(PathLoss::MACRO, 100.0, 0.0);
        assert!((got - expected).abs() / expected < 1e-12);

        let config = NetworkConfig {
            n_macro: 1,
            picos_per_macro: 0,
            users_per_macro: 1,
            shadowing_std_db: 0.0,
            ..Default::default()
        };
        let state: LargeScaleState = generate_topology(&config, 3).unwrap();
        let d = distance(state.user_positions[0], state.bs_positions[0]);
        let hand = 10f64.powf(-(128.1 + 37.6 * (d / 1000.0).log10()) / 10.0);
        assert!((state.gain(0, 0) - hand).abs() / hand < 1e-12);
    }

    #[test]
    fn generation_is_deterministic_and_seed_sensitive() {
        let config = NetworkConfig::default();
        let a: LargeScaleState = generate_topology(&config, 11).unwrap();
        let b: LargeScaleState = generate_topology(&config, 11).unwrap();
        let c: LargeScaleState = generate_topology(&config, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.n_bs(), 21);
        assert_eq!(a.n_users(), 70);
        assert!(a.sigma_sq.iter().all(|&g| g > 0.0));
    }
}
