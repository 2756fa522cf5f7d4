//! Kinematic templates for the human surrogate.
//!
//! A body is a torso point plus two arm and two leg scatterers. Coordinates
//! are metres with `y` pointing away from the array (range), `z` up from the
//! floor and `x` along the array. "Forward" motions approach the array.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Point3, Scatterer, ARRAY_HEIGHT};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MotionTemplate {
    Static,
    ForwardWalk,
    BackwardWalk,
    ForwardCrawl,
    BackwardCrawl,
    ForwardFall,
    BackwardFall,
    SitDown,
    StandUp,
    PickUp,
    InPlaceMarch,
    Boxing,
}

impl MotionTemplate {
    /// The eleven human motions (everything but `Static`).
    pub const MOTIONS: [MotionTemplate; 11] = [
        MotionTemplate::ForwardWalk,
        MotionTemplate::BackwardWalk,
        MotionTemplate::ForwardCrawl,
        MotionTemplate::BackwardCrawl,
        MotionTemplate::ForwardFall,
        MotionTemplate::BackwardFall,
        MotionTemplate::SitDown,
        MotionTemplate::StandUp,
        MotionTemplate::PickUp,
        MotionTemplate::InPlaceMarch,
        MotionTemplate::Boxing,
    ];

    /// The nine everyday motions used for classification (marching and
    /// boxing excluded).
    pub const DAILY: [MotionTemplate; 9] = [
        MotionTemplate::ForwardWalk,
        MotionTemplate::BackwardWalk,
        MotionTemplate::SitDown,
        MotionTemplate::StandUp,
        MotionTemplate::PickUp,
        MotionTemplate::ForwardCrawl,
        MotionTemplate::BackwardCrawl,
        MotionTemplate::ForwardFall,
        MotionTemplate::BackwardFall,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MotionTemplate::Static => "static",
            MotionTemplate::ForwardWalk => "forward_walk",
            MotionTemplate::BackwardWalk => "backward_walk",
            MotionTemplate::ForwardCrawl => "forward_crawl",
            MotionTemplate::BackwardCrawl => "backward_crawl",
            MotionTemplate::ForwardFall => "forward_fall",
            MotionTemplate::BackwardFall => "backward_fall",
            MotionTemplate::SitDown => "sit_down",
            MotionTemplate::StandUp => "stand_up",
            MotionTemplate::PickUp => "pick_up",
            MotionTemplate::InPlaceMarch => "in_place_march",
            MotionTemplate::Boxing => "boxing",
        }
    }

    /// Large range-spanning motions (walks, crawls, falls).
    pub fn is_large_range(self) -> bool {
        matches!(
            self,
            MotionTemplate::ForwardWalk
                | MotionTemplate::BackwardWalk
                | MotionTemplate::ForwardCrawl
                | MotionTemplate::BackwardCrawl
                | MotionTemplate::ForwardFall
                | MotionTemplate::BackwardFall
        )
    }
}

impl fmt::Display for MotionTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MotionTemplate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        std::iter::once(MotionTemplate::Static)
            .chain(MotionTemplate::MOTIONS)
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::UnknownTemplate(s.to_string()))
    }
}

/// Template parameters. Each template reads the fields relevant to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionParams {
    /// Torso position at the first sample (m).
    pub origin: Point3,
    /// Radial speed of translational motions (m/s).
    pub speed: f64,
    /// Vertical travel of falls, sitting, standing and bending (m).
    pub drop: f64,
    /// Duration of transient motions (s).
    pub duration: f64,
    /// Start time of transient motions (s).
    pub onset: f64,
    /// Limb oscillation rate (Hz).
    pub cadence: f64,
    /// Peak limb displacement (m).
    pub limb_amplitude: f64,
}

impl MotionParams {
    pub fn defaults(template: MotionTemplate) -> Self {
        let base = Self {
            origin: [0.0, 3.0, ARRAY_HEIGHT],
            speed: 0.0,
            drop: 0.0,
            duration: 1.0,
            onset: 0.1,
            cadence: 1.0,
            limb_amplitude: 0.0,
        };
        match template {
            MotionTemplate::Static => base,
            MotionTemplate::ForwardWalk | MotionTemplate::BackwardWalk => Self {
                speed: 1.0,
                cadence: 1.0,
                limb_amplitude: 0.3,
                ..base
            },
            MotionTemplate::ForwardCrawl | MotionTemplate::BackwardCrawl => Self {
                origin: [0.0, 3.0, 0.4],
                speed: 0.4,
                cadence: 0.8,
                limb_amplitude: 0.2,
                ..base
            },
            MotionTemplate::ForwardFall | MotionTemplate::BackwardFall => Self {
                drop: 0.9,
                duration: 0.8,
                ..base
            },
            MotionTemplate::SitDown | MotionTemplate::StandUp => Self {
                drop: 0.45,
                duration: 1.2,
                ..base
            },
            MotionTemplate::PickUp => Self {
                drop: 0.5,
                duration: 1.6,
                ..base
            },
            MotionTemplate::InPlaceMarch => Self {
                cadence: 1.2,
                limb_amplitude: 0.15,
                ..base
            },
            MotionTemplate::Boxing => Self {
                cadence: 1.5,
                limb_amplitude: 0.35,
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("motion.origin", self.origin.iter().all(|v| v.is_finite())),
            ("motion.speed", self.speed.is_finite()),
            ("motion.drop", self.drop.is_finite()),
            ("motion.duration", self.duration.is_finite() && self.duration > 0.0),
            ("motion.onset", self.onset.is_finite()),
            ("motion.cadence", self.cadence.is_finite() && self.cadence >= 0.0),
            ("motion.limb_amplitude", self.limb_amplitude.is_finite()),
        ];
        match fields.iter().find(|(_, ok)| !ok) {
            Some((name, _)) => Err(Error::param(
                name,
                "must be finite (and positive where it is a duration)",
            )),
            None => Ok(()),
        }
    }
}

/// Smooth monotone step from 0 (s ≤ 0) to 1 (s ≥ 1).
fn ramp(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        0.5 * (1.0 - (PI * s).cos())
    }
}

/// Down-and-back profile, zero outside `[0, 1]` and 1 at `s = 0.5`.
fn bump(s: f64) -> f64 {
    if (0.0..=1.0).contains(&s) {
        (PI * s).sin().powi(2)
    } else {
        0.0
    }
}

struct Kinematics<'a> {
    template: MotionTemplate,
    p: &'a MotionParams,
    phase: f64,
}

impl Kinematics<'_> {
    /// Progress of the transient part of the motion at time `t`.
    fn progress(&self, t: f64) -> f64 {
        (t - self.p.onset) / self.p.duration
    }

    fn torso(&self, t: f64) -> Point3 {
        let [x0, y0, z0] = self.p.origin;
        let v = self.p.speed;
        let osc = |rate: f64| (2.0 * PI * rate * t + self.phase).sin();
        match self.template {
            MotionTemplate::Static => [x0, y0, z0],
            MotionTemplate::ForwardWalk | MotionTemplate::ForwardCrawl => [x0, y0 - v * t, z0],
            MotionTemplate::BackwardWalk | MotionTemplate::BackwardCrawl => [x0, y0 + v * t, z0],
            MotionTemplate::ForwardFall | MotionTemplate::BackwardFall => {
                let r = ramp(self.progress(t));
                let dir = if self.template == MotionTemplate::ForwardFall {
                    -1.0
                } else {
                    1.0
                };
                [x0, y0 + dir * 0.5 * self.p.drop * r, z0 - self.p.drop * r]
            }
            MotionTemplate::SitDown => {
                let r = ramp(self.progress(t));
                [x0, y0 + 0.3 * r, z0 - self.p.drop * r]
            }
            MotionTemplate::StandUp => {
                let r = 1.0 - ramp(self.progress(t));
                [x0, y0 + 0.3 * r, z0 - self.p.drop * r]
            }
            MotionTemplate::PickUp => {
                let b = bump(self.progress(t));
                [x0, y0 - 0.3 * b, z0 - self.p.drop * b]
            }
            MotionTemplate::InPlaceMarch => {
                let s = osc(2.0 * self.p.cadence);
                [x0, y0 + 0.02 * s, z0 + 0.03 * s]
            }
            MotionTemplate::Boxing => [x0, y0 + 0.03 * osc(self.p.cadence), z0],
        }
    }

    /// Offset of a limb from the torso. `side` is ±1 (left/right).
    fn limb(&self, t: f64, arm: bool, side: f64) -> Point3 {
        let a = self.p.limb_amplitude;
        let x = if arm { 0.25 * side } else { 0.12 * side };
        let swing = (2.0 * PI * self.p.cadence * t + self.phase + if side > 0.0 { 0.0 } else { PI }).sin();
        match self.template {
            MotionTemplate::Static => {
                if arm {
                    [x, 0.0, 0.3]
                } else {
                    [x, 0.0, -0.5]
                }
            }
            MotionTemplate::ForwardWalk | MotionTemplate::BackwardWalk => {
                if arm {
                    [x, a * swing, 0.3]
                } else {
                    [x, -1.2 * a * swing, -0.5 + 0.1 * a * swing.max(0.0)]
                }
            }
            MotionTemplate::ForwardCrawl | MotionTemplate::BackwardCrawl => {
                // body horizontal: head end faces the direction of travel
                let dir = if self.template == MotionTemplate::ForwardCrawl {
                    -1.0
                } else {
                    1.0
                };
                if arm {
                    [x, dir * 0.5 + a * swing, -0.25]
                } else {
                    [x, -dir * 0.6 - a * swing, -0.3]
                }
            }
            MotionTemplate::ForwardFall | MotionTemplate::BackwardFall => {
                let r = ramp(self.progress(t));
                let dir = if self.template == MotionTemplate::ForwardFall {
                    -1.0
                } else {
                    1.0
                };
                if arm {
                    [x, dir * 0.4 * r, 0.3 * (1.0 - r)]
                } else {
                    // feet stay planted while the torso moves over them
                    [x, -dir * 0.5 * self.p.drop * r, -0.5 + 0.4 * self.p.drop * r]
                }
            }
            MotionTemplate::SitDown | MotionTemplate::StandUp => {
                let mut r = ramp(self.progress(t));
                if self.template == MotionTemplate::StandUp {
                    r = 1.0 - r;
                }
                if arm {
                    [x, -0.1 * r, 0.3]
                } else {
                    [x, -0.35 * r, -0.5 + 0.3 * r]
                }
            }
            MotionTemplate::PickUp => {
                let b = bump(self.progress(t));
                if arm {
                    [x, -0.3 * b, 0.3 - 0.6 * b]
                } else {
                    [x, 0.3 * b, -0.5 + 0.9 * self.p.drop * b]
                }
            }
            MotionTemplate::InPlaceMarch => {
                let lift = swing.max(0.0);
                if arm {
                    [x, a * swing, 0.3]
                } else {
                    [x, -a * lift, -0.5 + a * lift]
                }
            }
            MotionTemplate::Boxing => {
                if arm {
                    let punch = swing.max(0.0).powi(2);
                    [x, -a * punch, 0.35]
                } else {
                    [x, 0.0, -0.5]
                }
            }
        }
    }
}

fn seeded_phase(seed: u64) -> f64 {
    ChaCha8Rng::seed_from_u64(seed).random_range(0.0..2.0 * PI)
}

fn check_timing(n_slow: usize, prf: f64) -> Result<()> {
    if n_slow == 0 {
        return Err(Error::param("n_slow", "need at least one slow-time sample"));
    }
    if !(prf.is_finite() && prf > 0.0) {
        return Err(Error::param("prf", "must be positive"));
    }
    Ok(())
}

/// Torso path of `template`, one position per slow-time sample at `prf`.
///
/// Translational templates move at constant radial speed, so the position at
/// sample `i` is `origin ∓ speed · i / prf` along range. `seed` only sets the
/// phase of oscillatory components.
pub fn make_trajectory(
    template: MotionTemplate,
    params: &MotionParams,
    n_slow: usize,
    prf: f64,
    seed: u64,
) -> Result<Vec<Point3>> {
    params.validate()?;
    check_timing(n_slow, prf)?;
    let k = Kinematics {
        template,
        p: params,
        phase: seeded_phase(seed),
    };
    Ok((0..n_slow).map(|i| k.torso(i as f64 / prf)).collect())
}

/// Torso plus four limb scatterers following `template`.
///
/// Reflectivities are 1.0 (torso), 0.25 (arms) and 0.35 (legs), each with a
/// seeded random phase.
pub fn body_scatterers(
    template: MotionTemplate,
    params: &MotionParams,
    n_slow: usize,
    prf: f64,
    seed: u64,
) -> Result<Vec<Scatterer>> {
    params.validate()?;
    check_timing(n_slow, prf)?;
    let k = Kinematics {
        template,
        p: params,
        phase: seeded_phase(seed),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_b0d1);
    let mut refl = |mag: f64| Complex64::from_polar(mag, rng.random_range(0.0..2.0 * PI));

    let times: Vec<f64> = (0..n_slow).map(|i| i as f64 / prf).collect();
    let torso: Vec<Point3> = times.iter().map(|&t| k.torso(t)).collect();

    let mut body = vec![Scatterer {
        reflectivity: refl(1.0),
        trajectory: torso.clone(),
    }];
    for (arm, mag) in [(true, 0.25), (false, 0.35)] {
        for side in [-1.0, 1.0] {
            let trajectory = times
                .iter()
                .zip(&torso)
                .map(|(&t, c)| {
                    let o = k.limb(t, arm, side);
                    [c[0] + o[0], c[1] + o[1], (c[2] + o[2]).max(0.05)]
                })
                .collect();
            body.push(Scatterer {
                reflectivity: refl(mag),
                trajectory,
            });
        }
    }
    Ok(body)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for t in std::iter::once(MotionTemplate::Static).chain(MotionTemplate::MOTIONS) {
            assert_eq!(t.name().parse::<MotionTemplate>().unwrap(), t);
        }
        assert!(matches!(
            "moonwalk".parse::<MotionTemplate>(),
            Err(Error::UnknownTemplate(_))
        ));
    }

    #[test]
    fn static_template_is_constant() {
        let mut p = MotionParams::defaults(MotionTemplate::Static);
        p.origin = [0.0, 3.0, 0.0];
        let traj = make_trajectory(MotionTemplate::Static, &p, 100, 113.0, 9).unwrap();
        assert_eq!(traj.len(), 100);
        assert!(traj.iter().all(|q| *q == [0.0, 3.0, 0.0]));
    }

    #[test]
    fn forward_walk_covers_two_metres_in_two_seconds() {
        let p = MotionParams::defaults(MotionTemplate::ForwardWalk);
        let prf = 113.0;
        let n = (2.0 * prf) as usize;
        let traj = make_trajectory(MotionTemplate::ForwardWalk, &p, n, prf, 1).unwrap();
        let displacement = traj[0][1] - traj[n - 1][1];
        let step = p.speed / prf;
        assert!(
            (displacement - 2.0).abs() <= step + 1e-12,
            "displacement {displacement}"
        );
        // approaching: range strictly decreasing
        assert!(traj.windows(2).all(|w| w[1][1] < w[0][1]));
    }

    #[test]
    fn forward_fall_drops_monotonically() {
        let mut p = MotionParams::defaults(MotionTemplate::ForwardFall);
        p.drop = 0.9;
        p.duration = 0.8;
        p.onset = 0.1;
        let prf = 113.0;
        let traj = make_trajectory(MotionTemplate::ForwardFall, &p, 120, prf, 2).unwrap();
        assert!(traj.windows(2).all(|w| w[1][2] <= w[0][2]));
        let total = traj[0][2] - traj.last().unwrap()[2];
        assert!((total - 0.9).abs() < 1e-12, "drop {total}");
        // analytic form at the midpoint of the fall
        let i = ((p.onset + 0.5 * p.duration) * prf).round() as usize;
        let s = (i as f64 / prf - p.onset) / p.duration;
        let expected = p.origin[2] - 0.9 * 0.5 * (1.0 - (PI * s).cos());
        assert!((traj[i][2] - expected).abs() < 1e-12);
    }

    #[test]
    fn stand_up_mirrors_sit_down() {
        let p = MotionParams::defaults(MotionTemplate::SitDown);
        let sit = make_trajectory(MotionTemplate::SitDown, &p, 200, 113.0, 0).unwrap();
        let stand = make_trajectory(MotionTemplate::StandUp, &p, 200, 113.0, 0).unwrap();
        assert!((sit[0][2] - stand[199][2]).abs() < 1e-12);
        assert!((sit[199][2] - stand[0][2]).abs() < 1e-12);
    }

    #[test]
    fn non_finite_parameter_is_rejected() {
        let mut p = MotionParams::defaults(MotionTemplate::ForwardWalk);
        p.speed = f64::NAN;
        assert!(make_trajectory(MotionTemplate::ForwardWalk, &p, 10, 113.0, 0).is_err());
        let mut p = MotionParams::defaults(MotionTemplate::ForwardWalk);
        p.origin[1] = f64::INFINITY;
        assert!(body_scatterers(MotionTemplate::ForwardWalk, &p, 10, 113.0, 0).is_err());
    }

    #[test]
    fn body_has_five_scatterers_of_full_length() {
        for t in MotionTemplate::MOTIONS {
            let body = body_scatterers(t, &MotionParams::defaults(t), 50, 113.0, 3).unwrap();
            assert_eq!(body.len(), 5);
            assert!(body.iter().all(|s| s.trajectory.len() == 50));
            assert!(body.iter().flat_map(|s| &s.trajectory).all(|q| q[2] >= 0.05));
        }
    }

    #[test]
    fn limbs_oscillate_for_walks() {
        let t = MotionTemplate::ForwardWalk;
        let body = body_scatterers(t, &MotionParams::defaults(t), 226, 113.0, 3).unwrap();
        let torso = &body[0].trajectory;
        let arm = &body[1].trajectory;
        let rel: Vec<f64> = arm.iter().zip(torso).map(|(a, c)| a[1] - c[1]).collect();
        let max = rel.iter().cloned().fold(f64::MIN, f64::max);
        let min = rel.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max > 0.25 && min < -0.25);
    }
}
