//! Complete elliptic integrals and Jacobi elliptic functions.
//!
//! Everything is expressed in terms of the modulus `q` (not the parameter
//! `m = q^2`). A [`Modulus`] also carries the complementary modulus
//! `q' = sqrt(1 - q^2)` so that moduli within 1e-17 of one are still
//! representable; this is what the loop branch needs as its chord ratio
//! approaches one.
//!
//! K and E use the arithmetic-geometric mean and are accurate to a few ulps
//! over `[0, 1)`. For `q' < 1e-10` the relative error of E grows like
//! `1e-16 * K`, which stays below 1e-13 while `K < 1000`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

const MAX_AGM_STEPS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Modulus {
    q: f64,
    q_comp: f64,
}

impl Modulus {
    pub fn new(q: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&q) {
            return Err(Error::InvalidModulus(q));
        }
        Ok(Self {
            q,
            q_comp: ((1.0 - q) * (1.0 + q)).sqrt(),
        })
    }

    /// Builds a modulus from its complement `q' in (0, 1]`.
    pub fn from_complement(q_comp: f64) -> Result<Self> {
        if !(q_comp > 0.0 && q_comp <= 1.0) {
            return Err(Error::InvalidModulus(1.0 - q_comp));
        }
        Ok(Self {
            q: ((1.0 - q_comp) * (1.0 + q_comp)).sqrt(),
            q_comp,
        })
    }

    pub(crate) fn from_parts(q: f64, q_comp: f64) -> Self {
        Self { q, q_comp }
    }

    pub fn q(self) -> f64 {
        self.q
    }

    pub fn complement(self) -> f64 {
        self.q_comp
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticPair {
    pub q: f64,
    pub k: f64,
    pub e: f64,
}

/// Complete elliptic integrals K(q) and E(q) for `0 <= q < 1`.
pub fn elliptic_ke(q: f64) -> Result<EllipticPair> {
    Ok(elliptic_ke_mod(Modulus::new(q)?))
}

pub fn elliptic_ke_mod(m: Modulus) -> EllipticPair {
    let mut a = 1.0f64;
    let mut b = m.q_comp;
    let mut c = m.q;
    let mut weight = 0.5;
    let mut sum = weight * c * c;
    for _ in 0..MAX_AGM_STEPS {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        c = 0.5 * (a - b);
        a = an;
        b = bn;
        weight *= 2.0;
        sum += weight * c * c;
    }
    let k = FRAC_PI_2 / a;
    EllipticPair {
        q: m.q,
        k,
        e: k * (1.0 - sum),
    }
}

/// Jacobi elliptic functions `(sn, cn, dn)` by descending Landen / AGM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobi {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

pub fn jacobi(u: f64, m: Modulus) -> Jacobi {
    if m.q == 0.0 {
        let (s, c) = u.sin_cos();
        return Jacobi {
            sn: s,
            cn: c,
            dn: 1.0,
        };
    }
    let mut a = [0.0f64; MAX_AGM_STEPS + 1];
    let mut c = [0.0f64; MAX_AGM_STEPS + 1];
    a[0] = 1.0;
    c[0] = m.q;
    let mut b = m.q_comp;
    let mut n = 0;
    while n < MAX_AGM_STEPS && (c[n]).abs() > 1e-17 * a[n] {
        a[n + 1] = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = (a[n] * b).sqrt();
        n += 1;
    }
    let mut phi = (2.0f64).powi(n as i32) * a[n] * u;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    // dn^2 = q'^2 + q^2 cn^2 has no cancellation, unlike 1 - q^2 sn^2.
    let dn = (m.q_comp * m.q_comp + m.q * m.q * cn * cn).sqrt();
    Jacobi { sn, cn, dn }
}
