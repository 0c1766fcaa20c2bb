//! Brute-force phase-space averages of lab-frame monomials.
//!
//! A lab observable is rewritten in normal-mode variables through the
//! rotation, which turns each monomial into a sum of products of one-mode
//! monomials. Every one-mode average `int X^a P^b W_k dX dP` is then a 2-D
//! Gauss-Hermite quadrature, exact for polynomial integrands.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::angles::{rotation_matrix, Frequencies, MixingConfig};
use crate::error::{Error, Result};
use crate::moments::{FockIndex, MomentField, MomentSet};
use crate::wigner::poly::laguerre;
use crate::wigner::quadrature::GaussHermite;

use std::f64::consts::PI;

/// Highest total degree accepted by the oracle.
pub const MAX_OBSERVABLE_DEGREE: usize = 8;

/// A lab-frame coordinate or momentum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LabVar {
    X,
    Y,
    Z,
    Px,
    Py,
    Pz,
}

impl LabVar {
    pub const ALL: [LabVar; 6] = [
        LabVar::X,
        LabVar::Y,
        LabVar::Z,
        LabVar::Px,
        LabVar::Py,
        LabVar::Pz,
    ];

    /// Row of the rotation giving this variable in terms of normal modes.
    fn axis(self) -> usize {
        match self {
            LabVar::X | LabVar::Px => 0,
            LabVar::Y | LabVar::Py => 1,
            LabVar::Z | LabVar::Pz => 2,
        }
    }

    pub fn is_momentum(self) -> bool {
        matches!(self, LabVar::Px | LabVar::Py | LabVar::Pz)
    }

    pub fn name(self) -> &'static str {
        match self {
            LabVar::X => "x",
            LabVar::Y => "y",
            LabVar::Z => "z",
            LabVar::Px => "px",
            LabVar::Py => "py",
            LabVar::Pz => "pz",
        }
    }
}

impl FromStr for LabVar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" => Ok(LabVar::X),
            "y" => Ok(LabVar::Y),
            "z" => Ok(LabVar::Z),
            "px" | "p_x" => Ok(LabVar::Px),
            "py" | "p_y" => Ok(LabVar::Py),
            "pz" | "p_z" => Ok(LabVar::Pz),
            _ => Err(Error::Parse(format!("unknown variable {s:?}"))),
        }
    }
}

/// Product of lab variables, stored as an exponent per variable.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Monomial {
    powers: BTreeMap<LabVar, u32>,
}

impl Monomial {
    pub fn new(factors: &[(LabVar, u32)]) -> Self {
        let mut m = Monomial::default();
        for &(v, p) in factors {
            if p > 0 {
                *m.powers.entry(v).or_insert(0) += p;
            }
        }
        m
    }

    pub fn degree(&self) -> usize {
        self.powers.values().map(|&p| p as usize).sum()
    }

    /// Exponent of `v`.
    pub fn power(&self, v: LabVar) -> u32 {
        self.powers.get(&v).copied().unwrap_or(0)
    }

    fn factors(&self) -> Vec<LabVar> {
        self.powers
            .iter()
            .flat_map(|(&v, &p)| std::iter::repeat_n(v, p as usize))
            .collect()
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.powers.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self
            .powers
            .iter()
            .map(|(v, &p)| {
                if p == 1 {
                    v.name().to_string()
                } else {
                    format!("{}^{p}", v.name())
                }
            })
            .collect();
        f.write_str(&parts.join("*"))
    }
}

impl FromStr for Monomial {
    type Err = Error;

    /// Parses `x^2*py^2`, `x^2 py^2`, `x*y` or `1`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "1" {
            return Ok(Monomial::default());
        }
        let mut factors = Vec::new();
        for token in s
            .split(|c: char| c == '*' || c.is_whitespace())
            .filter(|t| !t.is_empty())
        {
            let (var, power) = match token.split_once('^') {
                Some((v, p)) => {
                    let p: u32 = p
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad exponent in {token:?}")))?;
                    (v, p)
                }
                None => (token, 1),
            };
            if power as usize > MAX_OBSERVABLE_DEGREE {
                return Err(Error::Spec(format!(
                    "exponent {power} exceeds {MAX_OBSERVABLE_DEGREE}"
                )));
            }
            factors.push((var.parse::<LabVar>()?, power));
        }
        if factors.is_empty() {
            return Err(Error::Parse("empty monomial".into()));
        }
        let m = Monomial::new(&factors);
        if m.degree() > MAX_OBSERVABLE_DEGREE {
            return Err(Error::Spec(format!(
                "degree {} exceeds {MAX_OBSERVABLE_DEGREE}",
                m.degree()
            )));
        }
        Ok(m)
    }
}

/// Sum of monomials with unit coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observable {
    pub terms: Vec<Monomial>,
}

impl Observable {
    pub fn monomial(factors: &[(LabVar, u32)]) -> Self {
        Observable {
            terms: vec![Monomial::new(factors)],
        }
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(Monomial::degree).max().unwrap_or(0)
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.terms.iter().map(|t| t.to_string()).collect();
        f.write_str(&parts.join(" + "))
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let terms = s
            .split('+')
            .map(str::parse)
            .collect::<Result<Vec<Monomial>>>()?;
        Ok(Observable { terms })
    }
}

/// Gauss-Hermite order used on each phase-space axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureSpec {
    pub nodes_per_axis: usize,
}

impl QuadratureSpec {
    /// Smallest order exact for an observable of total degree `degree` in
    /// the state `fock`.
    pub fn exact_for(degree: usize, fock: FockIndex) -> Self {
        QuadratureSpec {
            nodes_per_axis: Self::bound(degree, fock),
        }
    }

    fn bound(degree: usize, fock: FockIndex) -> usize {
        (degree + 2 * fock.max_index() + 2).div_ceil(2).max(1)
    }

    fn check(&self, degree: usize, fock: FockIndex) -> Result<()> {
        let need = Self::bound(degree, fock);
        if self.nodes_per_axis < need {
            return Err(Error::domain(format!(
                "{} nodes per axis is below the exactness bound {need}",
                self.nodes_per_axis
            )));
        }
        Ok(())
    }
}

/// `int X^a P^b W_k(X, P) dX dP` for one mode at frequency `theta`.
pub fn mode_moment(k: usize, a: u32, b: u32, theta: f64, rule: &GaussHermite) -> f64 {
    // X = u / sqrt(theta), P = v sqrt(theta) turns the Gaussian into e^{-u^2-v^2}
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut acc = 0.0;
    for (u, wu) in rule.iter() {
        let ua = u.powi(a as i32);
        for (v, wv) in rule.iter() {
            acc += wu * wv * ua * v.powi(b as i32) * laguerre(k, 2.0 * (u * u + v * v));
        }
    }
    sign / PI * acc * theta.powf((b as f64 - a as f64) / 2.0)
}

/// Exponents over `(X, P, Y, Q, Z, F)`.
type NormalPowers = [u32; 6];

fn expand(mono: &Monomial, rot: &[[f64; 3]; 3]) -> BTreeMap<NormalPowers, f64> {
    let mut terms: BTreeMap<NormalPowers, f64> = BTreeMap::new();
    terms.insert([0; 6], 1.0);
    for var in mono.factors() {
        let row = rot[var.axis()];
        let offset = usize::from(var.is_momentum());
        let mut next = BTreeMap::new();
        for (powers, coeff) in &terms {
            for (mode, &r) in row.iter().enumerate() {
                if r == 0.0 {
                    continue;
                }
                let mut p = *powers;
                p[2 * mode + offset] += 1;
                *next.entry(p).or_insert(0.0) += coeff * r;
            }
        }
        terms = next;
    }
    terms
}

/// Phase-space average of a lab observable in the number state `fock`.
pub fn oracle_moment(
    fock: FockIndex,
    cfg: &MixingConfig,
    freq: &Frequencies,
    observable: &Observable,
    q: QuadratureSpec,
) -> Result<f64> {
    let degree = observable.degree();
    if degree > MAX_OBSERVABLE_DEGREE {
        return Err(Error::Spec(format!(
            "degree {degree} exceeds {MAX_OBSERVABLE_DEGREE}"
        )));
    }
    q.check(degree, fock)?;
    let rule = GaussHermite::cached(q.nodes_per_axis)?;
    let rot = rotation_matrix(cfg);
    let ks = [fock.n, fock.m, fock.l];
    let thetas = freq.as_array();
    let mut cache: HashMap<(usize, u32, u32), f64> = HashMap::new();
    let mut total = 0.0;
    for mono in &observable.terms {
        for (powers, coeff) in expand(mono, &rot) {
            let mut term = coeff;
            for mode in 0..3 {
                let (a, b) = (powers[2 * mode], powers[2 * mode + 1]);
                let value = *cache
                    .entry((mode, a, b))
                    .or_insert_with(|| mode_moment(ks[mode], a, b, thetas[mode], &rule));
                term *= value;
            }
            total += term;
        }
    }
    Ok(total)
}

/// All 24 tabulated moments computed by the oracle.
pub fn oracle_moment_set(
    fock: FockIndex,
    cfg: &MixingConfig,
    freq: &Frequencies,
) -> Result<MomentSet> {
    let q = QuadratureSpec::exact_for(4, fock);
    let mut ms = MomentSet::default();
    for field in MomentField::ALL {
        let value = oracle_moment(fock, cfg, freq, &field.observable(), q)?;
        ms.set(field, value);
    }
    Ok(ms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angles::{derive_mixing, DEFAULT_EPS};

    #[test]
    fn parse_and_display() {
        let o: Observable = "x^2*py^2".parse().unwrap();
        assert_eq!(o.degree(), 4);
        assert_eq!(o.to_string(), "x^2*py^2");
        let s: Observable = "x^2 + y^2 + z^2".parse().unwrap();
        assert_eq!(s.terms.len(), 3);
        let m: Monomial = "x * x * p_x".parse().unwrap();
        assert_eq!(m.to_string(), "x^2*px");
        assert!("w^2".parse::<Observable>().is_err());
        assert!("x^".parse::<Observable>().is_err());
        assert!("".parse::<Observable>().is_err());
        assert!(matches!(
            "x^5*y^4".parse::<Observable>(),
            Err(Error::Spec(_))
        ));
    }

    #[test]
    fn ground_state_position_variance() {
        let cfg = derive_mixing(0.3, DEFAULT_EPS).unwrap();
        let fock = FockIndex::new(0, 0, 0);
        let obs = Observable::monomial(&[(LabVar::X, 2)]);
        let v = oracle_moment(
            fock,
            &cfg,
            &Frequencies::default(),
            &obs,
            QuadratureSpec::exact_for(2, fock),
        )
        .unwrap();
        assert!((v - 0.5).abs() < 1e-14);
    }

    #[test]
    fn sum_rule_by_quadrature() {
        let cfg = derive_mixing(-0.2, DEFAULT_EPS).unwrap();
        let fock = FockIndex::new(2, 3, 4);
        let obs: Observable = "x^2 + y^2 + z^2".parse().unwrap();
        let v = oracle_moment(
            fock,
            &cfg,
            &Frequencies::default(),
            &obs,
            QuadratureSpec::exact_for(2, fock),
        )
        .unwrap();
        assert!((v - 10.5).abs() < 1e-10);
    }

    #[test]
    fn normal_coordinate_moment() {
        // with the identity rotation x is the normal coordinate X
        let cfg = MixingConfig::from_tangents(0.0, 0.0, 0.0);
        let freq = Frequencies::uniform(1.7).unwrap();
        for n in 0..6 {
            let fock = FockIndex::new(n, 1, 2);
            let obs = Observable::monomial(&[(LabVar::X, 2)]);
            let v =
                oracle_moment(fock, &cfg, &freq, &obs, QuadratureSpec::exact_for(2, fock)).unwrap();
            let want = (2 * n + 1) as f64 / (2.0 * 1.7);
            assert!((v - want).abs() < 1e-13 * want, "n={n}");
        }
    }

    #[test]
    fn rejects_bad_quadrature_and_degree() {
        let cfg = derive_mixing(0.0, DEFAULT_EPS).unwrap();
        let fock = FockIndex::new(3, 0, 0);
        let obs = Observable::monomial(&[(LabVar::X, 2)]);
        let low = QuadratureSpec { nodes_per_axis: 2 };
        assert!(matches!(
            oracle_moment(fock, &cfg, &Frequencies::default(), &obs, low),
            Err(Error::Domain(_))
        ));
        let big = Observable::monomial(&[(LabVar::X, 5), (LabVar::Y, 4)]);
        assert!(matches!(
            oracle_moment(
                fock,
                &cfg,
                &Frequencies::default(),
                &big,
                QuadratureSpec::exact_for(9, fock)
            ),
            Err(Error::Spec(_))
        ));
    }

    #[test]
    fn extra_nodes_change_nothing() {
        let cfg = derive_mixing(0.4, DEFAULT_EPS).unwrap();
        let fock = FockIndex::new(1, 0, 2);
        let obs = Observable::monomial(&[(LabVar::X, 2), (LabVar::Py, 2)]);
        let freq = Frequencies::default();
        let base = QuadratureSpec::exact_for(4, fock);
        let a = oracle_moment(fock, &cfg, &freq, &obs, base).unwrap();
        let b = oracle_moment(
            fock,
            &cfg,
            &freq,
            &obs,
            QuadratureSpec {
                nodes_per_axis: 2 * base.nodes_per_axis,
            },
        )
        .unwrap();
        assert!((a - b).abs() <= 1e-12 * a.abs());
    }
}
