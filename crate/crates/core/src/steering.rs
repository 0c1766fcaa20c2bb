//! Directed EPR steering between pairs of oscillators.
//!
//! For a pair `(a, b)` the steering `a -> b` is
//! `max(|<a_a a_b^+>|^2 - <a_b^+ a_b (a_a^+ a_a + 1/2)>, 0)`. Writing the
//! ladder operators in lab coordinates turns the bracket into a combination
//! of the second and fourth moments in [`MomentSet`]. The same bracket is
//! also available as a closed rational expression in the mixing tangents.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::angles::{derive_mixing, Frequencies, MixingConfig};
use crate::error::{Error, Result};
use crate::moments::{compute_moments, FockIndex, MomentSet};
use crate::wigner::oracle_moment_set;

/// Tolerance above which a closed form is flagged against the moment route.
pub const TRANSCRIPTION_TOL: f64 = 1e-8;

/// One of the three oscillators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    X,
    Y,
    Z,
}

impl Mode {
    pub fn label(self) -> char {
        match self {
            Mode::X => 'x',
            Mode::Y => 'y',
            Mode::Z => 'z',
        }
    }

    fn from_label(c: char) -> Option<Mode> {
        match c {
            'x' => Some(Mode::X),
            'y' => Some(Mode::Y),
            'z' => Some(Mode::Z),
            _ => None,
        }
    }
}

/// A steering direction `source -> target`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "x2y")]
    XtoY,
    #[serde(rename = "y2x")]
    YtoX,
    #[serde(rename = "x2z")]
    XtoZ,
    #[serde(rename = "z2x")]
    ZtoX,
    #[serde(rename = "y2z")]
    YtoZ,
    #[serde(rename = "z2y")]
    ZtoY,
}

impl Direction {
    /// Output order: xy, yx, xz, zx, yz, zy.
    pub const ALL: [Direction; 6] = [
        Direction::XtoY,
        Direction::YtoX,
        Direction::XtoZ,
        Direction::ZtoX,
        Direction::YtoZ,
        Direction::ZtoY,
    ];

    pub fn new(source: Mode, target: Mode) -> Option<Direction> {
        use Mode::*;
        match (source, target) {
            (X, Y) => Some(Direction::XtoY),
            (Y, X) => Some(Direction::YtoX),
            (X, Z) => Some(Direction::XtoZ),
            (Z, X) => Some(Direction::ZtoX),
            (Y, Z) => Some(Direction::YtoZ),
            (Z, Y) => Some(Direction::ZtoY),
            _ => None,
        }
    }

    pub fn source(self) -> Mode {
        match self {
            Direction::XtoY | Direction::XtoZ => Mode::X,
            Direction::YtoX | Direction::YtoZ => Mode::Y,
            Direction::ZtoX | Direction::ZtoY => Mode::Z,
        }
    }

    pub fn target(self) -> Mode {
        match self {
            Direction::YtoX | Direction::ZtoX => Mode::X,
            Direction::XtoY | Direction::ZtoY => Mode::Y,
            Direction::XtoZ | Direction::YtoZ => Mode::Z,
        }
    }

    pub fn reversed(self) -> Direction {
        Direction::new(self.target(), self.source()).expect("distinct modes")
    }

    /// Position in [`Direction::ALL`].
    pub fn index(self) -> usize {
        Direction::ALL
            .iter()
            .position(|&d| d == self)
            .expect("listed")
    }

    /// Short tag such as `xy` used in column names.
    pub fn tag(self) -> String {
        format!("{}{}", self.source().label(), self.target().label())
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}2{}", self.source().label(), self.target().label())
    }
}

impl FromStr for Direction {
    type Err = Error;

    /// Accepts `x2y`, `x->y` or `xy`.
    fn from_str(s: &str) -> Result<Self> {
        let cleaned: String = s
            .trim()
            .chars()
            .filter(|c| !matches!(c, '2' | '-' | '>'))
            .collect();
        let mut chars = cleaned.chars();
        let (Some(a), Some(b), None) = (chars.next(), chars.next(), chars.next()) else {
            return Err(Error::Parse(format!(
                "expected a direction like x2y, got {s:?}"
            )));
        };
        let parsed = Mode::from_label(a)
            .zip(Mode::from_label(b))
            .and_then(|(src, dst)| Direction::new(src, dst));
        parsed.ok_or_else(|| Error::Parse(format!("invalid direction {s:?}")))
    }
}

/// Computation route for the steering brackets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Path {
    /// Assembled from the tabulated moments.
    Moments,
    /// Closed rational expressions in the tangents.
    #[default]
    ClosedForm,
    /// Assembled from quadrature-oracle moments.
    Oracle,
}

impl FromStr for Path {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "moments" => Ok(Path::Moments),
            "closed" | "closed_form" | "closed-form" => Ok(Path::ClosedForm),
            "oracle" => Ok(Path::Oracle),
            other => Err(Error::Parse(format!("unknown path {other:?}"))),
        }
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Path::Moments => "moments",
            Path::ClosedForm => "closed_form",
            Path::Oracle => "oracle",
        })
    }
}

struct PairMoments {
    /// `<a^2>`, `<p_a^2>` of the steering party.
    src_q2: f64,
    src_p2: f64,
    qq: f64,
    pp: f64,
    q2q2: f64,
    /// `<a^2 p_b^2>` and `<p_a^2 b^2>` for source `a`, target `b`.
    q2p2: f64,
    p2q2: f64,
    p2p2: f64,
}

fn pair_moments(dir: Direction, ms: &MomentSet) -> PairMoments {
    use Direction::*;
    // (qq, pp, q2q2, p2p2, a^2 p_b^2, p_a^2 b^2, a^2, p_a^2)
    let (qq, pp, q2q2, p2p2, q2p2, p2q2, src_q2, src_p2) = match dir {
        XtoY => (
            ms.xy, ms.pxpy, ms.x2y2, ms.px2py2, ms.x2py2, ms.y2px2, ms.x2, ms.px2,
        ),
        YtoX => (
            ms.xy, ms.pxpy, ms.x2y2, ms.px2py2, ms.y2px2, ms.x2py2, ms.y2, ms.py2,
        ),
        XtoZ => (
            ms.xz, ms.pxpz, ms.x2z2, ms.px2pz2, ms.x2pz2, ms.z2px2, ms.x2, ms.px2,
        ),
        ZtoX => (
            ms.xz, ms.pxpz, ms.x2z2, ms.px2pz2, ms.z2px2, ms.x2pz2, ms.z2, ms.pz2,
        ),
        YtoZ => (
            ms.yz, ms.pypz, ms.y2z2, ms.py2pz2, ms.y2pz2, ms.z2py2, ms.y2, ms.py2,
        ),
        ZtoY => (
            ms.yz, ms.pypz, ms.y2z2, ms.py2pz2, ms.z2py2, ms.y2pz2, ms.z2, ms.pz2,
        ),
    };
    PairMoments {
        src_q2,
        src_p2,
        qq,
        pp,
        q2q2,
        q2p2,
        p2q2,
        p2p2,
    }
}

fn mode_frequency(mode: Mode, freq: &Frequencies) -> f64 {
    match mode {
        Mode::X => freq.theta_x,
        Mode::Y => freq.theta_y,
        Mode::Z => freq.theta_z,
    }
}

/// Raw steering bracket assembled from a moment set.
pub fn bracket_from_moment_set(dir: Direction, ms: &MomentSet, freq: &Frequencies) -> f64 {
    let pm = pair_moments(dir, ms);
    let wa = mode_frequency(dir.source(), freq);
    let wb = mode_frequency(dir.target(), freq);
    let wab = wa * wb;
    wab / 4.0 * pm.qq * pm.qq + pm.pp * pm.pp / (4.0 * wab) + 0.5 * pm.qq * pm.pp
        - wab / 4.0 * pm.q2q2
        - wa / (4.0 * wb) * pm.q2p2
        - wb / (4.0 * wa) * pm.p2q2
        - pm.p2p2 / (4.0 * wab)
        + wa / 4.0 * pm.src_q2
        + pm.src_p2 / (4.0 * wa)
}

fn require_uniform(freq: &Frequencies) -> Result<()> {
    if freq.is_uniform() {
        Ok(())
    } else {
        Err(Error::domain(
            "steering requires a single characteristic frequency",
        ))
    }
}

/// Raw (unclamped) steering from the tabulated moments.
pub fn steering_from_moments(
    dir: Direction,
    fock: FockIndex,
    cfg: &MixingConfig,
    freq: &Frequencies,
) -> Result<f64> {
    require_uniform(freq)?;
    Ok(bracket_from_moment_set(
        dir,
        &compute_moments(fock, cfg, freq),
        freq,
    ))
}

/// Raw steering from quadrature-oracle moments.
pub fn steering_from_oracle(
    dir: Direction,
    fock: FockIndex,
    cfg: &MixingConfig,
    freq: &Frequencies,
) -> Result<f64> {
    require_uniform(freq)?;
    Ok(bracket_from_moment_set(
        dir,
        &oracle_moment_set(fock, cfg, freq)?,
        freq,
    ))
}

#[derive(Clone, Copy)]
struct Tangents {
    t: f64,
    f: f64,
    b: f64,
    /// `sqrt(mu_Phi^2 + 1)`
    r: f64,
}

impl Tangents {
    fn new(cfg: &MixingConfig) -> Self {
        let b = cfg.mu_big_phi();
        Tangents {
            t: cfg.mu_theta(),
            f: cfg.mu_phi(),
            b,
            r: (b * b + 1.0).sqrt(),
        }
    }
}

/// Raw steering from the closed rational expressions.
pub fn steering_closed_form(dir: Direction, fock: FockIndex, cfg: &MixingConfig) -> f64 {
    let tg = Tangents::new(cfg);
    let (n, m, l) = (fock.n as f64, fock.m as f64, fock.l as f64);
    match dir {
        Direction::XtoY => closed_xy(tg, n, m, l),
        Direction::YtoX => closed_yx(tg, n, m, l),
        Direction::XtoZ => closed_xz(tg, n, m, l),
        Direction::ZtoX => closed_zx(tg, n, m, l),
        Direction::YtoZ => closed_yz(tg, n, m, l),
        Direction::ZtoY => closed_zy(tg, n, m, l),
    }
}

fn closed_xy(tg: Tangents, n: f64, m: f64, l: f64) -> f64 {
    let Tangents { t, f, b, r } = tg;
    let (t2, f2, b2) = (t * t, f * f, b * b);
    let (t3, t4, b4) = (t2 * t, t2 * t2, b2 * b2);
    let m1 = 2.0 * m + 1.0;
    let body = t4
        * (l * m1 * b4 - (l + m) * b2
            + n * f2 * (b2 + 1.0) * (2.0 * l + m1 * b2 + 1.0)
            + 2.0 * l * m
            + m)
        + 2.0 * t3 * f * r * b * (-m1 * (l - n) * b2 + 2.0 * l * n + l + n)
        - 2.0 * t * f * b * r * (m1 * (l - n) * b2 + 2.0 * l * n + l + n)
        + t2 * (m1 * (l + n) * (f2 + 1.0) * b4
            + b2 * (2.0 * m * (l + n) * f2 + 4.0 * l * n + l - 2.0 * m + n)
            + 2.0 * m * (l + n + 1.0)
            - (l + n) * f2)
        + l * f2 * (b2 + 1.0) * (m1 * b2 + 2.0 * n + 1.0)
        + m1 * n * b4
        - b2 * (m + n)
        + 2.0 * m * n
        + m;
    -body / (2.0 * (t2 + 1.0).powi(2) * (f2 + 1.0) * (b2 + 1.0).powi(2))
}

fn closed_yx(tg: Tangents, n: f64, m: f64, l: f64) -> f64 {
    let Tangents { t, f, b, r } = tg;
    let (t2, f2, b2) = (t * t, f * f, b * b);
    let (t3, t4, b4) = (t2 * t, t2 * t2, b2 * b2);
    let body = t4
        * ((2.0 * l * m + m) * b4 - (l + m) * b2
            + (2.0 * n + 1.0) * f2 * (b2 + 1.0) * (l + m * b2)
            + 2.0 * l * m
            + l)
        - 4.0 * t3 * f * b * r * (m * (l - n) * b2 - l * (n + 1.0))
        - 4.0 * t * f * b * r * (m * (l - n) * b2 + (l + 1.0) * n)
        + t2 * (f2 * (b2 + 1.0) * (2.0 * m * (l + n + 1.0) * b2 - l - n)
            + 2.0 * m * (l + n + 1.0) * b4
            + b2 * (4.0 * l * n + l - 2.0 * m + n)
            + (2.0 * m + 1.0) * (l + n))
        + (2.0 * l + 1.0) * f2 * (b2 + 1.0) * (m * b2 + n)
        + m * b4
        - m * b2
        + 2.0 * m * n * b4
        + 2.0 * m * n
        - n * b2
        + n;
    -body / (2.0 * (t2 + 1.0).powi(2) * (f2 + 1.0) * (b2 + 1.0).powi(2))
}

fn closed_xz(tg: Tangents, n: f64, m: f64, l: f64) -> f64 {
    let Tangents { t, f, b, r } = tg;
    let (t2, f2, b2) = (t * t, f * f, b * b);
    let (t3, t4, b4) = (t2 * t, t2 * t2, b2 * b2);
    let m1 = 2.0 * m + 1.0;
    let body = t4
        * (f2 * ((2.0 * l * m + l) * b4 - (l + m) * b2 + 2.0 * l * m + m)
            + n * (b2 + 1.0) * (2.0 * l + m1 * b2 + 1.0))
        - 2.0 * t3 * f * b * r * (-(m1 * (l - n) * b2) + 2.0 * l * n + l + n)
        + 2.0 * t * f * r * b * (m1 * (l - n) * b2 + 2.0 * l * n + l + n)
        + t2 * (f2
            * (m1 * (l + n) * b4 + b2 * (4.0 * l * n + l - 2.0 * m + n) + 2.0 * m * (l + n + 1.0))
            + (l + n) * (b2 + 1.0) * (m1 * b2 - 1.0))
        + l * (b2 + 1.0) * (m1 * b2 + 2.0 * n + 1.0)
        + f2 * (b4 * (2.0 * m * n + n) - b2 * (m + n) + 2.0 * m * n + m);
    -body / (2.0 * (t2 + 1.0).powi(2) * (f2 + 1.0) * (b2 + 1.0).powi(2))
}

fn closed_zx(tg: Tangents, n: f64, m: f64, l: f64) -> f64 {
    let Tangents { t, f, b, r } = tg;
    let (t2, f2, b2) = (t * t, f * f, b * b);
    let (t3, t4, b4) = (t2 * t, t2 * t2, b2 * b2);
    // The printed mu_theta^2 term juxtaposes its two parenthesized factors
    // with no operator; they are summed here, which is what agrees with the
    // moment route.
    let body = t4
        * (f2 * ((2.0 * l + 1.0) * m * b4 - (l + m) * b2 + 2.0 * l * m + l)
            + (2.0 * n + 1.0) * (b2 + 1.0) * (l + m * b2))
        + 4.0 * t3 * f * r * b * (m * (l - n) * b2 - l * (n + 1.0))
        + 4.0 * t * f * r * b * (m * (l - n) * b2 + (l + 1.0) * n)
        + t2 * (f2
            * (2.0 * m * (l + n + 1.0) * b4
                + b2 * (4.0 * l * n + l - 2.0 * m + n)
                + (2.0 * m + 1.0) * (l + n))
            + (b2 + 1.0) * (2.0 * m * (l + n + 1.0) * b2 - l - n))
        + (2.0 * l + 1.0) * (b2 + 1.0) * (m * b2 + n)
        + f2 * (m * (2.0 * n + 1.0) * b4 - b2 * (m + n) + 2.0 * m * n + n);
    -body / (2.0 * (t2 + 1.0).powi(2) * (f2 + 1.0) * (b2 + 1.0).powi(2))
}

fn closed_yz(tg: Tangents, n: f64, m: f64, l: f64) -> f64 {
    let Tangents { t, f, b, r } = tg;
    let (t2, f2, b2) = (t * t, f * f, b * b);
    let (t3, t4, b4, f4) = (t2 * t, t2 * t2, b2 * b2, f2 * f2);
    let body = t4 * f2 * (b2 * (4.0 * l * m + l + m - 2.0 * n) - (l + n) * b4 - m - n)
        + 2.0
            * t3
            * f
            * r
            * b
            * (f2
                * (-2.0 * l * m
                    + (4.0 * l * n + 3.0 * l + n) * b2
                    + 2.0 * l * n
                    + l
                    + 2.0 * m * n
                    + n)
                + 2.0 * l * m
                - (4.0 * l * n + l + 3.0 * n) * b2
                - 2.0 * l * n
                + l
                - 2.0 * m * n
                - 3.0 * n)
        - 2.0
            * t
            * f
            * b
            * r
            * (f2
                * (2.0 * l * m + (4.0 * l * n + l + 3.0 * n) * b2 + 2.0 * l * n + l - 2.0 * m * n
                    + n)
                - 2.0 * l * m
                - (4.0 * l * n + 3.0 * l + n) * b2
                - 2.0 * l * n
                - 3.0 * l
                + 2.0 * m * n
                + n)
        + t2 * f2
            * (b2 * (l * (4.0 * m + 24.0 * n + 11.0) + 4.0 * m * n + 2.0 * m + 11.0 * n)
                + 2.0 * (l * (12.0 * n + 5.0) + 5.0 * n) * b4
                + 4.0 * l * n
                + l
                - 2.0 * m
                + n)
        + (2.0 * n + 1.0) * (l * b2 * (b2 + 1.0) + t4 * f4 * (b2 + 1.0) * (l * b2 + m))
        + (2.0 * l + 1.0) * (f4 * (b2 + 1.0) * (m + n * b2) + n * t4 * b2 * (b2 + 1.0))
        + (2.0 * m + 1.0) * (l * (b2 + 1.0) + t2 * (l + n) * (b2 + 1.0) + n * t4 * (b2 + 1.0))
        + t2 * f4 * (b2 + 1.0) * (2.0 * m * (l + n + 1.0) - (l + n) * b2)
        - f2 * (b2 * (2.0 * l - 4.0 * m * n - m - n) + (l + n) * b4 + l + m)
        - t2 * (l + n) * b2 * (b2 + 1.0);
    -body / (2.0 * (t2 + 1.0).powi(2) * (f2 + 1.0).powi(2) * (b2 + 1.0).powi(2))
}

fn closed_zy(tg: Tangents, n: f64, m: f64, l: f64) -> f64 {
    let Tangents { t, f, b, r } = tg;
    let (t2, f2, b2) = (t * t, f * f, b * b);
    let (t3, t4, b3, b4, f3, f4) = (t2 * t, t2 * t2, b2 * b, b2 * b2, f2 * f, f2 * f2);
    let body = 2.0 * l * t * f * r * b + 4.0 * l * m * t * f * r * b
        - 2.0 * l * t * f3 * b * r * (2.0 * m + 2.0 * n + 3.0)
        + t4 * f2 * (b2 * (4.0 * l * m + l + m - 2.0 * n) - (l + n) * b4 - m - n)
        + 4.0 * l * n * t * f * r * b
        - 4.0 * m * n * t * f * b * r
        + 2.0 * n * t * f * r * b
        - 2.0
            * t3
            * f
            * b
            * r
            * (f2
                * (2.0 * l * m - (4.0 * l * n + l + 3.0 * n) * b2 - 2.0 * l * n + l
                    - 2.0 * m * n
                    - 3.0 * n)
                - 2.0 * l * m
                + (4.0 * l * n + 3.0 * l + n) * b2
                + 2.0 * l * n
                + l
                + 2.0 * m * n
                + n)
        + t2 * f2
            * (b2 * (l * (4.0 * m + 24.0 * n + 11.0) + 4.0 * m * n + 2.0 * m + 11.0 * n)
                + 2.0 * (l * (12.0 * n + 5.0) + 5.0 * n) * b4
                + 4.0 * l * n
                + l
                - 2.0 * m
                + n)
        + 2.0 * t * (4.0 * l * n + l + 3.0 * n) * f * r * b3
        - 2.0 * t * (l * (4.0 * n + 3.0) + n) * f3 * b3 * r
        + (2.0 * n + 1.0) * (l * f4 * b2 * (b2 + 1.0) + t4 * (b2 + 1.0) * (l * b2 + m))
        + (2.0 * m + 1.0)
            * (l * f4 * (b2 + 1.0)
                + t2 * (l + n) * f4 * (b2 + 1.0)
                + n * t4 * f4 * (b2 + 1.0)
                + 2.0 * n * t * f3 * r * b)
        + (2.0 * l + 1.0) * ((b2 + 1.0) * (m + n * b2) + n * t4 * f4 * b2 * (b2 + 1.0))
        + t2 * (b2 + 1.0) * (2.0 * m * (l + n + 1.0) - (l + n) * b2)
        - f2 * (b2 * (2.0 * l - 4.0 * m * n - m - n) + (l + n) * b4 + l + m)
        - t2 * (l + n) * f4 * b2 * (b2 + 1.0);
    -body / (2.0 * (t2 + 1.0).powi(2) * (f2 + 1.0).powi(2) * (b2 + 1.0).powi(2))
}

/// Single-excitation channels with their own closed expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SingleExcitation {
    /// `x -> y` in `(n, 0, 0)`.
    XtoYN,
    /// `y -> x` in `(0, m, 0)`.
    YtoXM,
    /// `y -> x` in `(0, 0, l)`.
    YtoXL,
    /// `y -> z` in `(0, m, 0)`.
    YtoZM,
    /// `y -> z` in `(0, 0, l)`.
    YtoZL,
}

impl SingleExcitation {
    pub const ALL: [SingleExcitation; 5] = [
        SingleExcitation::XtoYN,
        SingleExcitation::YtoXM,
        SingleExcitation::YtoXL,
        SingleExcitation::YtoZM,
        SingleExcitation::YtoZL,
    ];

    pub fn direction(self) -> Direction {
        match self {
            SingleExcitation::XtoYN => Direction::XtoY,
            SingleExcitation::YtoXM | SingleExcitation::YtoXL => Direction::YtoX,
            SingleExcitation::YtoZM | SingleExcitation::YtoZL => Direction::YtoZ,
        }
    }

    pub fn fock(self, k: usize) -> FockIndex {
        match self {
            SingleExcitation::XtoYN => FockIndex::new(k, 0, 0),
            SingleExcitation::YtoXM | SingleExcitation::YtoZM => FockIndex::new(0, k, 0),
            SingleExcitation::YtoXL | SingleExcitation::YtoZL => FockIndex::new(0, 0, k),
        }
    }
}

/// Raw single-excitation steering.
pub fn steering_single_excitation(which: SingleExcitation, k: usize, cfg: &MixingConfig) -> f64 {
    let Tangents { t, f, b, r } = Tangents::new(cfg);
    let k = k as f64;
    let (t2, f2, b2) = (t * t, f * f, b * b);
    let (tp, fp, bp) = (t2 + 1.0, f2 + 1.0, b2 + 1.0);
    match which {
        SingleExcitation::XtoYN => {
            -k * (t2 * bp + b2 - 1.0) / (2.0 * tp * tp * fp * bp * bp)
                * (t2 * f2 * bp + 2.0 * t * f * b * r + b2)
        }
        SingleExcitation::YtoXM => -k * b2 * (f2 * bp + b2 - 1.0) / (2.0 * fp * bp * bp),
        SingleExcitation::YtoXL => {
            let den = 2.0 * tp * tp * fp * bp * bp;
            -k * t2 * t2 * (b2 * (f2 - 1.0) + f2 + 1.0) / den
                - k * t2 * (4.0 * t * f * b * r - (f2 - 1.0) * bp) / den
        }
        SingleExcitation::YtoZM => -k * f2 * (f2 * bp + b2 - 1.0) / (2.0 * fp * fp * bp * bp),
        SingleExcitation::YtoZL => {
            let common = tp * tp * fp * fp;
            -k * t2 * t2 * f2 * b2 * ((f2 - 1.0) * b2 + f2 + 1.0) / (2.0 * common * bp * bp)
                - k * t2 * t * f * b * ((3.0 * f2 - 1.0) * b2 + f2 + 1.0) / (common * bp.powf(1.5))
                + k * t2 * (f2 * ((f2 - 10.0) * b2 - 1.0) + b2 - 1.0) / (2.0 * common * bp)
                + k * t * f * (f2 - 3.0) * b / (common * r)
                + k * (f2 - 1.0) / (2.0 * common)
        }
    }
}

/// The tabulated polynomial for the signed asymmetry `S_{x->y} - S_{y->x}`.
pub fn asymmetry_xy_polynomial(fock: FockIndex, cfg: &MixingConfig) -> f64 {
    let Tangents { t, f, b, r } = Tangents::new(cfg);
    let (n, m, l) = (fock.n as f64, fock.m as f64, fock.l as f64);
    let (t2, f2, b2) = (t * t, f * f, b * b);
    let den = 2.0 * (t2 + 1.0) * (f2 + 1.0) * (b2 + 1.0);
    ((m - n) * (t2 * f2 * b2 + b2 - 1.0) + (l - n) * (2.0 * t * f * r * b + t2 * f2)
        - (l - m) * t2 * (b2 - 1.0)
        + f2 * ((m - l) * b2 - l + n))
        / den
}

/// A closed form that disagrees with the moment route.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TranscriptionFlag {
    pub direction: Direction,
    pub fock: FockIndex,
    pub mu_theta: f64,
    pub closed_form: f64,
    pub moments: f64,
}

/// All six directed steering values for one state and configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteeringReport {
    /// Unclamped brackets, indexed as [`Direction::ALL`].
    pub raw: [f64; 6],
    /// `max(raw, 0)`.
    pub clamped: [f64; 6],
    /// `S_{x->y} - S_{y->x}` on the raw values.
    pub asym_xy: f64,
    /// `S_{x->z} - S_{z->x}`.
    pub asym_xz: f64,
    /// `S_{z->y} - S_{y->z}`.
    pub asym_zy: f64,
    /// `asym_xy - asym_xz - asym_zy`.
    pub tradeoff_residual: f64,
    pub flags: Vec<TranscriptionFlag>,
}

impl SteeringReport {
    pub fn from_raw(raw: [f64; 6]) -> Self {
        let clamped = raw.map(|v| v.max(0.0));
        let at = |d: Direction| raw[d.index()];
        let asym_xy = at(Direction::XtoY) - at(Direction::YtoX);
        let asym_xz = at(Direction::XtoZ) - at(Direction::ZtoX);
        let asym_zy = at(Direction::ZtoY) - at(Direction::YtoZ);
        SteeringReport {
            raw,
            clamped,
            asym_xy,
            asym_xz,
            asym_zy,
            tradeoff_residual: asym_xy - asym_xz - asym_zy,
            flags: Vec::new(),
        }
    }

    pub fn raw(&self, dir: Direction) -> f64 {
        self.raw[dir.index()]
    }

    pub fn clamped(&self, dir: Direction) -> f64 {
        self.clamped[dir.index()]
    }

    /// `|asym|` triple for reporting.
    pub fn abs_asymmetries(&self) -> [f64; 3] {
        [self.asym_xy.abs(), self.asym_xz.abs(), self.asym_zy.abs()]
    }
}

/// Raw brackets for all six directions along one route.
pub fn raw_brackets(
    fock: FockIndex,
    cfg: &MixingConfig,
    freq: &Frequencies,
    path: Path,
) -> Result<[f64; 6]> {
    Ok(match path {
        Path::ClosedForm => Direction::ALL.map(|d| steering_closed_form(d, fock, cfg)),
        Path::Moments => {
            require_uniform(freq)?;
            let ms = compute_moments(fock, cfg, freq);
            Direction::ALL.map(|d| bracket_from_moment_set(d, &ms, freq))
        }
        Path::Oracle => {
            require_uniform(freq)?;
            let ms = oracle_moment_set(fock, cfg, freq)?;
            Direction::ALL.map(|d| bracket_from_moment_set(d, &ms, freq))
        }
    })
}

/// Builds the full report. On the closed-form route every direction is
/// cross-checked against the moment route and disagreements are flagged.
pub fn steering_report(
    fock: FockIndex,
    cfg: &MixingConfig,
    freq: &Frequencies,
    path: Path,
) -> Result<SteeringReport> {
    let raw = raw_brackets(fock, cfg, freq, path)?;
    let mut report = SteeringReport::from_raw(raw);
    if path == Path::ClosedForm {
        report.flags = transcription_flags(fock, cfg, &raw)?;
    }
    Ok(report)
}

fn transcription_flags(
    fock: FockIndex,
    cfg: &MixingConfig,
    closed: &[f64; 6],
) -> Result<Vec<TranscriptionFlag>> {
    let freq = Frequencies::default();
    let ms = compute_moments(fock, cfg, &freq);
    Ok(Direction::ALL
        .iter()
        .filter_map(|&d| {
            let moments = bracket_from_moment_set(d, &ms, &freq);
            let closed_form = closed[d.index()];
            let scale = moments.abs().max(1.0);
            ((closed_form - moments).abs() > TRANSCRIPTION_TOL * scale).then_some(
                TranscriptionFlag {
                    direction: d,
                    fock,
                    mu_theta: cfg.mu_theta(),
                    closed_form,
                    moments,
                },
            )
        })
        .collect())
}

/// Single-mode excitation classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FockClass {
    /// `(n, 0, 0)`
    #[serde(rename = "n00", alias = "(n,0,0)")]
    N,
    /// `(0, m, 0)`
    #[serde(rename = "0m0", alias = "(0,m,0)")]
    M,
    /// `(0, 0, l)`
    #[serde(rename = "00l", alias = "(0,0,l)")]
    L,
}

impl FockClass {
    pub const ALL: [FockClass; 3] = [FockClass::N, FockClass::M, FockClass::L];

    pub fn fock(self, k: usize) -> FockIndex {
        match self {
            FockClass::N => FockIndex::new(k, 0, 0),
            FockClass::M => FockIndex::new(0, k, 0),
            FockClass::L => FockIndex::new(0, 0, k),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FockClass::N => "n00",
            FockClass::M => "0m0",
            FockClass::L => "00l",
        }
    }
}

impl fmt::Display for FockClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FockClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| !matches!(c, '(' | ')' | ',' | ' '))
            .collect();
        match key.as_str() {
            "n00" => Ok(FockClass::N),
            "0m0" => Ok(FockClass::M),
            "00l" => Ok(FockClass::L),
            _ => Err(Error::Parse(format!("unknown excitation class {s:?}"))),
        }
    }
}

/// Classification of one direction over a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroCell {
    /// Clamped value at most 1e-12 everywhere.
    Zero,
    /// Clamped value above 1e-6 somewhere.
    NonZero,
    /// Neither criterion met.
    Undetermined,
}

/// Per-direction zero pattern of the clamped closed-form steering for the
/// states `class.fock(k)` with `k` in `ks`, over the `mu_theta` grid.
pub fn zero_pattern(
    class: FockClass,
    ks: &[usize],
    grid: &[f64],
    eps: f64,
) -> Result<[ZeroCell; 6]> {
    let mut max = [0.0f64; 6];
    for &mu in grid {
        let cfg = derive_mixing(mu, eps)?;
        for &k in ks {
            let fock = class.fock(k);
            for d in Direction::ALL {
                let v = steering_closed_form(d, fock, &cfg).max(0.0);
                max[d.index()] = max[d.index()].max(v);
            }
        }
    }
    Ok(max.map(|v| {
        if v <= 1e-12 {
            ZeroCell::Zero
        } else if v > 1e-6 {
            ZeroCell::NonZero
        } else {
            ZeroCell::Undetermined
        }
    }))
}

/// Clamped differences `S_{x->z}(mu) - S_{x->y}(-mu)`,
/// `S_{z->x}(mu) - S_{y->x}(-mu)` and `S_{y->z}(mu) - S_{z->y}(-mu)`.
pub fn symmetry_residuals(fock: FockIndex, mu_theta: f64, eps: f64) -> Result<(f64, f64, f64)> {
    let (pos, neg) = symmetry_pairs(fock, mu_theta, eps)?;
    let c = |v: f64| v.max(0.0);
    Ok((
        c(pos[Direction::XtoZ.index()]) - c(neg[Direction::XtoY.index()]),
        c(pos[Direction::ZtoX.index()]) - c(neg[Direction::YtoX.index()]),
        c(pos[Direction::YtoZ.index()]) - c(neg[Direction::ZtoY.index()]),
    ))
}

/// Same differences on the raw brackets.
pub fn raw_symmetry_residuals(fock: FockIndex, mu_theta: f64, eps: f64) -> Result<(f64, f64, f64)> {
    let (pos, neg) = symmetry_pairs(fock, mu_theta, eps)?;
    Ok((
        pos[Direction::XtoZ.index()] - neg[Direction::XtoY.index()],
        pos[Direction::ZtoX.index()] - neg[Direction::YtoX.index()],
        pos[Direction::YtoZ.index()] - neg[Direction::ZtoY.index()],
    ))
}

fn symmetry_pairs(fock: FockIndex, mu_theta: f64, eps: f64) -> Result<([f64; 6], [f64; 6])> {
    let plus = derive_mixing(mu_theta, eps)?;
    let minus = derive_mixing(-mu_theta, eps)?;
    let freq = Frequencies::default();
    Ok((
        raw_brackets(fock, &plus, &freq, Path::ClosedForm)?,
        raw_brackets(fock, &minus, &freq, Path::ClosedForm)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angles::DEFAULT_EPS;

    fn cfg(mu: f64) -> MixingConfig {
        derive_mixing(mu, DEFAULT_EPS).unwrap()
    }

    #[test]
    fn direction_round_trip() {
        for d in Direction::ALL {
            assert_eq!(d.to_string().parse::<Direction>().unwrap(), d);
            assert_eq!(d.reversed().reversed(), d);
            assert_ne!(d.source(), d.target());
        }
        assert_eq!("x->z".parse::<Direction>().unwrap(), Direction::XtoZ);
        assert!("x2x".parse::<Direction>().is_err());
        assert!("q2y".parse::<Direction>().is_err());
        assert!("x2yz".parse::<Direction>().is_err());
    }

    #[test]
    fn ground_state_closed_forms_vanish() {
        for mu in [-0.9, 0.0, 0.4, 1.0] {
            for d in Direction::ALL {
                assert_eq!(
                    steering_closed_form(d, FockIndex::new(0, 0, 0), &cfg(mu)),
                    0.0
                );
            }
        }
    }

    #[test]
    fn single_excitation_y_to_x_at_zero() {
        let v = steering_single_excitation(SingleExcitation::YtoXM, 1, &cfg(0.0));
        // 30-digit evaluation
        assert!((v + 0.022_329_099_369_260_226).abs() < 1e-16, "{v}");
        // hand evaluation with mu_phi = -1, mu_Phi^2 = 2 - sqrt 3
        let b2 = 2.0 - 3f64.sqrt();
        let want = -b2 * ((b2 + 1.0) + b2 - 1.0) / (2.0 * 2.0 * (b2 + 1.0).powi(2));
        assert!((v - want).abs() < 1e-15);
        let closed = steering_closed_form(Direction::YtoX, FockIndex::new(0, 1, 0), &cfg(0.0));
        assert!((closed - want).abs() < 1e-15);
    }

    #[test]
    fn single_excitation_zero_and_linear() {
        for which in SingleExcitation::ALL {
            assert_eq!(steering_single_excitation(which, 0, &cfg(0.3)), 0.0);
        }
        let c = cfg(0.6);
        let one = steering_single_excitation(SingleExcitation::XtoYN, 1, &c);
        let four = steering_single_excitation(SingleExcitation::XtoYN, 4, &c);
        assert!((four - 4.0 * one).abs() < 1e-15);
    }

    #[test]
    fn report_clamps_and_tradeoff() {
        let r = SteeringReport::from_raw([0.5, -0.25, 0.0, -1.0, 2.0, 1.0]);
        assert_eq!(r.clamped, [0.5, 0.0, 0.0, 0.0, 2.0, 1.0]);
        assert_eq!(r.asym_xy, 0.75);
        assert_eq!(r.asym_xz, 1.0);
        assert_eq!(r.asym_zy, -1.0);
        assert_eq!(r.tradeoff_residual, 0.75);
    }

    #[test]
    fn non_uniform_frequencies_rejected() {
        let freq = Frequencies::new(1.0, 1.1, 1.0).unwrap();
        assert!(
            steering_from_moments(Direction::XtoY, FockIndex::new(1, 0, 0), &cfg(0.1), &freq)
                .is_err()
        );
    }

    #[test]
    fn symmetry_needs_admissible_mirror() {
        assert!(symmetry_residuals(FockIndex::new(1, 0, 0), 1.0, DEFAULT_EPS).is_err());
        let (a, b, c) = symmetry_residuals(FockIndex::new(2, 1, 0), 0.0, DEFAULT_EPS).unwrap();
        assert_eq!((a.abs() + b.abs() + c.abs()), 0.0);
    }
}
