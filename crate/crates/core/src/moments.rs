//! Lab-frame second and fourth moments of the normal-mode number states.
//!
//! [`compute_moments`] evaluates the tabulated closed-form average values
//! term by term. The quadrature oracle in [`crate::wigner`] computes the same
//! fields independently; [`discrepancies`] compares the two.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::angles::{Frequencies, MixingConfig};
use crate::error::{Error, Result};
use crate::wigner::{LabVar, Observable};

/// Excitation numbers `(n, m, l)` of the three normal modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FockIndex {
    pub n: usize,
    pub m: usize,
    pub l: usize,
}

impl FockIndex {
    pub const fn new(n: usize, m: usize, l: usize) -> Self {
        FockIndex { n, m, l }
    }

    pub fn total(&self) -> usize {
        self.n + self.m + self.l
    }

    pub fn max_index(&self) -> usize {
        self.n.max(self.m).max(self.l)
    }
}

impl fmt::Display for FockIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.n, self.m, self.l)
    }
}

impl FromStr for FockIndex {
    type Err = Error;

    /// Parses `N,M,L`, optionally wrapped in parentheses.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("expected N,M,L, got {s:?}")));
        }
        let mut idx = [0usize; 3];
        for (slot, part) in idx.iter_mut().zip(&parts) {
            *slot = part
                .parse()
                .map_err(|_| Error::Parse(format!("bad quantum number {part:?} in {s:?}")))?;
        }
        Ok(FockIndex::new(idx[0], idx[1], idx[2]))
    }
}

macro_rules! moment_fields {
    ($( $variant:ident => $field:ident, [$( ($var:ident, $pow:expr) ),+] ;)+) => {
        /// Identifies one field of [`MomentSet`].
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum MomentField {
            $( $variant, )+
        }

        /// The tabulated lab-frame averages for one state and configuration.
        #[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
        pub struct MomentSet {
            $( pub $field: f64, )+
        }

        impl MomentField {
            pub const ALL: [MomentField; 24] = [ $( MomentField::$variant, )+ ];

            pub fn name(self) -> &'static str {
                match self {
                    $( MomentField::$variant => stringify!($field), )+
                }
            }

            /// The lab observable whose average this field holds.
            pub fn observable(self) -> Observable {
                match self {
                    $( MomentField::$variant => Observable::monomial(&[$( (LabVar::$var, $pow) ),+]), )+
                }
            }
        }

        impl MomentSet {
            pub fn get(&self, field: MomentField) -> f64 {
                match field {
                    $( MomentField::$variant => self.$field, )+
                }
            }

            pub fn set(&mut self, field: MomentField, value: f64) {
                match field {
                    $( MomentField::$variant => self.$field = value, )+
                }
            }
        }
    };
}

moment_fields! {
    X2 => x2, [(X, 2)];
    Y2 => y2, [(Y, 2)];
    Z2 => z2, [(Z, 2)];
    Px2 => px2, [(Px, 2)];
    Py2 => py2, [(Py, 2)];
    Pz2 => pz2, [(Pz, 2)];
    Xy => xy, [(X, 1), (Y, 1)];
    Xz => xz, [(X, 1), (Z, 1)];
    Yz => yz, [(Y, 1), (Z, 1)];
    PxPy => pxpy, [(Px, 1), (Py, 1)];
    PxPz => pxpz, [(Px, 1), (Pz, 1)];
    PyPz => pypz, [(Py, 1), (Pz, 1)];
    X2Y2 => x2y2, [(X, 2), (Y, 2)];
    X2Z2 => x2z2, [(X, 2), (Z, 2)];
    Y2Z2 => y2z2, [(Y, 2), (Z, 2)];
    Px2Py2 => px2py2, [(Px, 2), (Py, 2)];
    Px2Pz2 => px2pz2, [(Px, 2), (Pz, 2)];
    Py2Pz2 => py2pz2, [(Py, 2), (Pz, 2)];
    X2Py2 => x2py2, [(X, 2), (Py, 2)];
    Y2Px2 => y2px2, [(Y, 2), (Px, 2)];
    X2Pz2 => x2pz2, [(X, 2), (Pz, 2)];
    Z2Px2 => z2px2, [(Z, 2), (Px, 2)];
    Y2Pz2 => y2pz2, [(Y, 2), (Pz, 2)];
    Z2Py2 => z2py2, [(Z, 2), (Py, 2)];
}

impl fmt::Display for MomentField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl MomentField {
    /// Whether the field is an average of a product of even powers, hence
    /// non-negative.
    pub fn is_square(self) -> bool {
        !matches!(
            self,
            MomentField::Xy
                | MomentField::Xz
                | MomentField::Yz
                | MomentField::PxPy
                | MomentField::PxPz
                | MomentField::PyPz
        )
    }
}

/// Trigonometric shorthands shared by the tabulated formulas.
struct Trig {
    st: f64,
    ct: f64,
    sb: f64,
    cb: f64,
    sp: f64,
    cp: f64,
    /// `C_theta C_phi S_Phi + S_theta S_phi`
    a: f64,
    /// `C_theta S_phi - S_theta C_phi S_Phi`
    b: f64,
    /// `S_theta S_phi S_Phi + C_theta C_phi`
    c: f64,
    /// `S_theta C_phi - C_theta S_phi S_Phi`
    d: f64,
}

impl Trig {
    fn new(cfg: &MixingConfig) -> Self {
        let (st, ct) = (cfg.theta.sin, cfg.theta.cos);
        let (sb, cb) = (cfg.big_phi.sin, cfg.big_phi.cos);
        let (sp, cp) = (cfg.phi.sin, cfg.phi.cos);
        Trig {
            st,
            ct,
            sb,
            cb,
            sp,
            cp,
            a: ct * cp * sb + st * sp,
            b: ct * sp - st * cp * sb,
            c: st * sp * sb + ct * cp,
            d: st * cp - ct * sp * sb,
        }
    }
}

/// Evaluates the 24 tabulated average values.
pub fn compute_moments(fock: FockIndex, cfg: &MixingConfig, freq: &Frequencies) -> MomentSet {
    let t = Trig::new(cfg);
    let Trig {
        st,
        ct,
        sb,
        cb,
        sp,
        cp,
        a,
        b,
        c,
        d,
    } = t;
    let (tx, ty, tz) = (freq.theta_x, freq.theta_y, freq.theta_z);
    let (n, m, l) = (fock.n as f64, fock.m as f64, fock.l as f64);
    let (n1, m1, l1) = (2.0 * n + 1.0, 2.0 * m + 1.0, 2.0 * l + 1.0);
    let (nq, mq, lq) = (
        2.0 * n * (n + 1.0) + 1.0,
        2.0 * m * (m + 1.0) + 1.0,
        2.0 * l * (l + 1.0) + 1.0,
    );

    let th = cfg.theta;
    let bp = cfg.big_phi;
    let ph = cfg.phi;
    let (s2t, s4t, c4t) = (th.sin_mul(2.0), th.sin_mul(4.0), th.cos_mul(4.0));
    let (s3b, c2b, c4b) = (bp.sin_mul(3.0), bp.cos_mul(2.0), bp.cos_mul(4.0));
    let (s2p, s4p, c4p) = (ph.sin_mul(2.0), ph.sin_mul(4.0), ph.cos_mul(4.0));

    let sq = |v: f64| v * v;
    let (st2, ct2, sb2, cb2, sp2, cp2) = (sq(st), sq(ct), sq(sb), sq(cb), sq(sp), sq(cp));
    let cb4 = sq(cb2);
    let (a2, b2, c2, d2) = (sq(a), sq(b), sq(c), sq(d));
    let txyz = tx * ty * tz;

    let mut ms = MomentSet {
        x2: 0.5 * (l1 * st2 * cb2 / tz + m1 * sb2 / ty + n1 * ct2 * cb2 / tx),
        y2: 0.5 * (l1 * b2 / tz + m1 * cp2 * cb2 / ty + n1 * a2 / tx),
        z2: 0.5 * (l1 * c2 / tz + m1 * sp2 * cb2 / ty + n1 * d2 / tx),
        px2: 0.5 * (cb2 * (l1 * st2 * tz + n1 * ct2 * tx) + m1 * sb2 * ty),
        py2: 0.5 * (l1 * tz * b2 + m1 * cp2 * cb2 * ty + n1 * tx * a2),
        pz2: 0.5 * (l1 * tz * c2 + m1 * sp2 * cb2 * ty + n1 * tx * d2),
        xy: 0.5 * cb * (l1 * st * b / tz + m1 * cp * sb / ty - n1 * ct * a / tx),
        xz: 0.5
            * cb
            * (l1 * st * c / tz - m1 * sp * sb / ty + n1 * ct * (ct * sp * sb - st * cp) / tx),
        yz: 0.5 * (l1 * c * b / tz - m1 * sp * cp * cb2 / ty + n1 * a * d / tx),
        pxpy: 0.5 * cb * (l1 * st * tz * b + m1 * cp * sb * ty - n1 * ct * tx * a),
        pxpz: 0.5
            * cb
            * (l1 * st * tz * c - m1 * sp * sb * ty + n1 * ct * tx * (ct * sp * sb - st * cp)),
        pypz: 0.5 * (l1 * tz * c * b - m1 * sp * cp * cb2 * ty + n1 * tx * a * d),
        ..MomentSet::default()
    };

    // Angular brackets shared between position and momentum fourth moments.
    let xy_xz =
        cb2 * (3.0 * sb * (8.0 * st2 * ct2 * cp2 * sb - s4t * s2p) + (3.0 * c4t + 1.0) * sp2);
    let xy_xy =
        4.0 * st2 * sp2 * sb2 + ct2 * cp2 * (3.0 * c4b + 1.0) + st * ct * s2p * (sb - 3.0 * s3b);
    let xy_yz =
        st2 * cp2 * (3.0 * c4b + 1.0) + 4.0 * ct2 * sp2 * sb2 - s2t * sp * cp * (sb - 3.0 * s3b);
    let xz_xz = cb2 * (3.0 * sb * (2.0 * sq(s2t) * sp2 * sb + s4t * s2p) + (3.0 * c4t + 1.0) * cp2);
    let xz_xy =
        ct2 * sp2 * (3.0 * c4b + 1.0) + 4.0 * st2 * cp2 * sb2 - st * ct * s2p * (sb - 3.0 * s3b);
    let xz_yz = st2 * sp2 * cb4 - 4.0 * st * sp * sb * cb2 * c + sb2 * c2;
    let yz_xy =
        cb2 * (3.0 * sb * (8.0 * ct2 * sp2 * cp2 * sb - s2t * s4p) + st2 * (3.0 * c4p + 1.0));
    let yz_yz = cb2 * (3.0 * sb * (2.0 * st2 * sq(s2p) * sb + s2t * s4p) + ct2 * (3.0 * c4p + 1.0));
    // The two 105-weighted terms combine to 210 C_4theta C_4phi.
    let yz_xz = -48.0 * s4t * s4p * (s3b - 7.0 * sb)
        - 6.0 * c4t * (4.0 * (7.0 * c4p + 1.0) * c2b + 3.0)
        + 24.0 * sq(s2t) * sq(s2p) * c4b
        + 105.0 * (s4t * s4p + c4t * c4p)
        + 105.0 * (c4t * c4p - s4t * s4p)
        - 6.0 * c4p * (4.0 * c2b + 3.0)
        - 40.0 * c2b
        + 82.0;

    ms.x2y2 = 0.25
        * (3.0 * nq * ct2 * cb2 * a2 / sq(tx)
            + 3.0 * mq * cp2 * sb2 * cb2 / sq(ty)
            + 3.0 * lq * st2 * cb2 * b2 / sq(tz))
        + l1 * n1 * xy_xz / (16.0 * tx * tz)
        + m1 * (n1 * xy_xy / (16.0 * tx * ty) + l1 * xy_yz / (16.0 * ty * tz));

    ms.x2z2 = 0.25
        * (3.0 * nq * ct2 * cb2 * d2 / sq(tx)
            + 3.0 * mq * sp2 * sb2 * cb2 / sq(ty)
            + 3.0 * lq * st2 * cb2 * c2 / sq(tz))
        + l1 * n1 * xz_xz / (16.0 * tx * tz)
        + m1 * (n1 * xz_xy / (16.0 * tx * ty) + l1 * xz_yz / (4.0 * ty * tz));

    ms.y2z2 = 0.25
        * (3.0 * nq * a2 * d2 / sq(tx)
            + 3.0 * mq * sp2 * cp2 * cb4 / sq(ty)
            + 3.0 * lq * b2 * c2 / sq(tz))
        + m1 * (n1 * yz_xy / (16.0 * tx * ty) + l1 * yz_yz / (16.0 * ty * tz))
        + l1 * n1 * yz_xz / (2048.0 * tx * tz);

    ms.px2py2 = l1 * n1 * tx * tz * xy_xz / 16.0
        + m1 * (n1 * tx * ty * xy_xy / 16.0 + l1 * ty * tz * xy_yz / 16.0)
        + 0.25
            * (3.0 * lq * st2 * cb2 * sq(tz) * b2
                + 3.0 * mq * cp2 * sb2 * cb2 * sq(ty)
                + 3.0 * nq * ct2 * cb2 * sq(tx) * a2);

    ms.px2pz2 = l1 * n1 * tx * tz * xz_xz / 16.0
        + m1 * (n1 * tx * ty * xz_xy / 16.0 + 0.25 * l1 * ty * tz * xz_yz)
        + 0.25
            * (3.0 * lq * st2 * cb2 * sq(tz) * c2
                + 3.0 * mq * sp2 * sb2 * cb2 * sq(ty)
                + 3.0 * nq * ct2 * cb2 * sq(tx) * d2);

    ms.py2pz2 = l1 * n1 * tx * tz * yz_xz / 2048.0
        + m1 * (n1 * tx * ty * yz_xy / 16.0 + l1 * ty * tz * yz_yz / 16.0)
        + 0.25
            * (3.0 * lq * sq(tz) * c2 * b2
                + 3.0 * mq * sp2 * cp2 * cb4 * sq(ty)
                + 3.0 * nq * sq(tx) * a2 * d2);

    ms.x2py2 = l1 * n1 * (st2 * cb2 * sq(tx) * ty * a2 + ct2 * cb2 * ty * sq(tz) * b2)
        / (4.0 * txyz)
        + m1 * (n1 * (sb2 * sq(tx) * tz * a2 + ct2 * cp2 * cb4 * sq(ty) * tz) / (4.0 * txyz)
            + l1 * (st2 * cp2 * cb4 * tx * sq(ty) + sb2 * tx * sq(tz) * b2) / (4.0 * txyz))
        + cb2 / 4.0 * (lq * st2 * b2 + mq * cp2 * sb2 + nq * ct2 * a2);

    ms.y2px2 = l1 * n1 * (ct2 * cb2 * sq(tx) * ty * b2 + st2 * cb2 * ty * sq(tz) * a2)
        / (4.0 * txyz)
        + m1 * (n1 * (ct2 * cp2 * cb4 * sq(tx) * tz + sb2 * sq(ty) * tz * a2) / (4.0 * txyz)
            + l1 * (sb2 * tx * sq(ty) * b2 + st2 * cp2 * cb4 * tx * sq(tz)) / (4.0 * txyz))
        + cb2 / 4.0 * (lq * st2 * b2 + mq * cp2 * sb2 + nq * ct2 * a2);

    ms.x2pz2 = l1 * n1 * (st2 * cb2 * sq(tx) * ty * d2 + ct2 * cb2 * ty * sq(tz) * c2)
        / (4.0 * txyz)
        + m1 * (n1 * (sb2 * sq(tx) * tz * d2 + ct2 * sp2 * cb4 * sq(ty) * tz) / (4.0 * txyz)
            + l1 * (st2 * sp2 * cb4 * tx * sq(ty) + sb2 * tx * sq(tz) * c2) / (4.0 * txyz))
        + cb2 / 4.0 * (lq * st2 * c2 + mq * sp2 * sb2 + nq * ct2 * d2);

    ms.z2px2 = l1 * n1 * (ct2 * cb2 * sq(tx) * ty * c2 + st2 * cb2 * ty * sq(tz) * d2)
        / (4.0 * txyz)
        + m1 * (n1 * (ct2 * sp2 * cb4 * sq(tx) * tz + sb2 * sq(ty) * tz * d2) / (4.0 * txyz)
            + l1 * (sb2 * tx * sq(ty) * c2 + st2 * sp2 * cb4 * tx * sq(tz)) / (4.0 * txyz))
        + cb2 / 4.0 * (lq * st2 * c2 + mq * sp2 * sb2 + nq * ct2 * d2);

    ms.y2pz2 = (lq * txyz * c2 * b2 + mq * sp2 * cp2 * cb4 * txyz) / (4.0 * txyz)
        + m1 * (n1 * (cp2 * cb2 * sq(tx) * tz * d2 + sp2 * cb2 * sq(ty) * tz * a2) / (4.0 * txyz)
            + l1 * (sp2 * cb2 * tx * sq(ty) * b2 + cp2 * cb2 * tx * sq(tz) * c2) / (4.0 * txyz))
        + l1 * n1 / (4.0 * txyz) * (sq(tx) * ty * b2 * d2 + ty * sq(tz) * a2 * c2)
        + 0.25 * nq * a2 * d2;

    ms.z2py2 = (lq * txyz * c2 * b2 + mq * sp2 * cp2 * cb4 * txyz) / (4.0 * txyz)
        + m1 * (n1 * (sp2 * cb2 * sq(tx) * tz * a2 + cp2 * cb2 * sq(ty) * tz * d2) / (4.0 * txyz)
            + l1 * (cp2 * cb2 * tx * sq(ty) * c2 + sp2 * cb2 * tx * sq(tz) * b2) / (4.0 * txyz))
        + l1 * n1 / (4.0 * txyz) * (sq(tx) * ty * a2 * c2 + ty * sq(tz) * b2 * d2)
        + 0.25 * nq * a2 * d2;

    ms
}

/// Deviations of the two sum rules:
/// `sum <q^2> - (n+m+l+3/2)/theta` and `sum <p^2> - theta (n+m+l+3/2)`,
/// written with per-mode frequencies.
pub fn sum_rule_residuals(ms: &MomentSet, fock: FockIndex, freq: &Frequencies) -> (f64, f64) {
    let (n1, m1, l1) = (
        2.0 * fock.n as f64 + 1.0,
        2.0 * fock.m as f64 + 1.0,
        2.0 * fock.l as f64 + 1.0,
    );
    let pos = 0.5 * (n1 / freq.theta_x + m1 / freq.theta_y + l1 / freq.theta_z);
    let mom = 0.5 * (n1 * freq.theta_x + m1 * freq.theta_y + l1 * freq.theta_z);
    (ms.x2 + ms.y2 + ms.z2 - pos, ms.px2 + ms.py2 + ms.pz2 - mom)
}

/// `Cov(x^2; p_y^2) - Cov(y^2; p_x^2)`, `Cov(z^2; p_x^2) - Cov(x^2; p_z^2)`,
/// `Cov(y^2; p_z^2) - Cov(z^2; p_y^2)`.
pub fn covariance_identity_residuals(ms: &MomentSet) -> (f64, f64, f64) {
    let cov = |ab: f64, a: f64, b: f64| ab - a * b;
    (
        cov(ms.x2py2, ms.x2, ms.py2) - cov(ms.y2px2, ms.y2, ms.px2),
        cov(ms.z2px2, ms.z2, ms.px2) - cov(ms.x2pz2, ms.x2, ms.pz2),
        cov(ms.y2pz2, ms.y2, ms.pz2) - cov(ms.z2py2, ms.z2, ms.py2),
    )
}

/// One field where the tabulated value and the quadrature oracle disagree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discrepancy {
    pub field: MomentField,
    pub fock: FockIndex,
    pub mu_theta: f64,
    pub printed: f64,
    pub oracle: f64,
    pub rel_err: f64,
}

/// Relative error with an absolute floor for tiny reference values.
pub fn moment_error(printed: f64, oracle: f64) -> f64 {
    let diff = (printed - oracle).abs();
    if oracle.abs() < 1e-6 {
        diff / 1e-2
    } else {
        diff / oracle.abs()
    }
}

/// Fields of `printed` that deviate from `oracle` beyond `rel_tol`
/// (absolute `rel_tol * 1e-2` when the oracle value is below 1e-6).
pub fn discrepancies(
    printed: &MomentSet,
    oracle: &MomentSet,
    fock: FockIndex,
    mu_theta: f64,
    rel_tol: f64,
) -> Vec<Discrepancy> {
    MomentField::ALL
        .iter()
        .filter_map(|&field| {
            let (p, o) = (printed.get(field), oracle.get(field));
            let rel_err = moment_error(p, o);
            (rel_err > rel_tol || !rel_err.is_finite()).then_some(Discrepancy {
                field,
                fock,
                mu_theta,
                printed: p,
                oracle: o,
                rel_err,
            })
        })
        .collect()
}
