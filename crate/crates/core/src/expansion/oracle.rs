use std::ops::{Add, Mul, Sub};

use serde::Serialize;
use twofloat::TwoFloat;

use crate::flux::Direction;
use crate::sequences::SequenceSet;

use super::{check_depth, tables, ExpansionError, Window};

/// Largest depth accepted by the direct oracle.
pub const MAX_ORACLE_DEPTH: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Dd {
    re: TwoFloat,
    im: TwoFloat,
}

impl Dd {
    fn real(x: f64) -> Self {
        Self {
            re: TwoFloat::from(x),
            im: TwoFloat::from(0.0),
        }
    }

    fn conj(self) -> Self {
        Self {
            re: self.re,
            im: -self.im,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        Dd {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        Dd {
            re: self.re - o.re,
            im: self.im - o.im,
        }
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        Dd {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
}

fn to_f64(x: TwoFloat) -> f64 {
    x.hi() + x.lo()
}

/// Directly evaluated sides of the four identities at one t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirectValues {
    pub gap: f64,
    pub denom: f64,
    pub cross_re: f64,
    pub cross_im: f64,
}

/// B_n(ut) and E_n = B_n − A_n from the three-term recurrence with
/// d_k = b_k − it η_k·u, in double-double arithmetic. E is run through its
/// own recurrence (E_0 = 1, E_1 = 1 − it η_1·u) to avoid cancellation.
fn direct(w: &Window, t: f64) -> DirectValues {
    let mut b = (Dd::real(1.0), Dd::real(0.0));
    // E_{−1} = −1 enters with c_1 = a_1, the same as +1 with −a_1.
    let mut e = (Dd::real(1.0), Dd::real(1.0));
    for k in 1..=w.n {
        let a = w.odds[k];
        let d = Dd {
            re: TwoFloat::from(1.0) + TwoFloat::from(a),
            im: -TwoFloat::new_mul(t, w.drift[k]),
        };
        let c = Dd::real(if k == 1 { a } else { -a });
        b = (d * b.0 + c * b.1, b.0);
        e = (d * e.0 + Dd::real(-a) * e.1, e.0);
    }
    let (bn, en) = (b.0, e.0);
    let an = bn - en;
    let gap = en * en.conj();
    let denom = bn * bn.conj();
    let cross = en * bn.conj();
    let im = an * bn.conj();
    DirectValues {
        gap: to_f64(gap.re),
        denom: to_f64(denom.re),
        cross_re: to_f64(cross.re),
        cross_im: to_f64(im.im),
    }
}

/// The four identities compared by [`verify_against_direct`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Identity {
    Gap,
    Denom,
    CrossRe,
    CrossIm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Verification {
    /// max |direct − table| / max(|direct|, Σ|table terms|).
    pub max_relative_error: f64,
    pub worst_identity: Identity,
    pub worst_t: f64,
}

/// Compares the coefficient tables at depth n with direct evaluation at
/// every t in `ts`.
pub fn verify_against_direct(
    seq: &mut SequenceSet,
    u: &Direction,
    n: usize,
    ts: &[f64],
) -> Result<Verification, ExpansionError> {
    check_depth(n, MAX_ORACLE_DEPTH)?;
    let table = tables(seq, u, n)?;
    let w = Window::load(seq, u, n)?;
    let mut out = Verification {
        max_relative_error: 0.0,
        worst_identity: Identity::Gap,
        worst_t: ts.first().copied().unwrap_or(0.0),
    };
    for &t in ts {
        let d = direct(&w, t);
        let lhs = [d.gap, d.denom, d.cross_re, d.cross_im];
        let ids = [Identity::Gap, Identity::Denom, Identity::CrossRe, Identity::CrossIm];
        for ((value, (poly, abs)), id) in lhs.into_iter().zip(table.evaluate(t)).zip(ids) {
            let scale = value.abs().max(abs);
            let err = if scale == 0.0 { 0.0 } else { (value - poly).abs() / scale };
            if err > out.max_relative_error {
                out = Verification {
                    max_relative_error: err,
                    worst_identity: id,
                    worst_t: t,
                };
            }
        }
    }
    Ok(out)
}
