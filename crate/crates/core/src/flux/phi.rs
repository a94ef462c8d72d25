use serde::Serialize;

use crate::sequences::{
    generalized_inverse, GenInverse, MonotoneSequence, Probe, PsiKind, SeqError, SequenceSet,
    Series, Side,
};

use super::{FluxError, FluxProfile};

/// Which member of the φ family. Each is read as defining φ².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiVariant {
    /// ψ²(−n,n) + κ_u(−v_−^{-1}(n), v_+^{-1}(n)).
    Full,
    /// ψ²(−n,n) + κ_{u,+}(v_+^{-1}(n)) + κ_{u,−}(v_−^{-1}(n)).
    Plus,
    /// ψ²(0,n) + κ_{u,+}(v_+^{-1}(n)).
    PlusPlus,
    /// ψ²(−n,0) + κ_{u,−}(v_−^{-1}(n)).
    PlusMinus,
}

impl PhiVariant {
    pub const ALL: [PhiVariant; 4] = [
        PhiVariant::Full,
        PhiVariant::Plus,
        PhiVariant::PlusPlus,
        PhiVariant::PlusMinus,
    ];

    /// The ψ variant this φ variant is bounded below by.
    fn dominated(self) -> PsiKind {
        match self {
            PhiVariant::Full | PhiVariant::Plus => PsiKind::Both,
            PhiVariant::PlusPlus => PsiKind::Plus,
            PhiVariant::PlusMinus => PsiKind::Minus,
        }
    }

    fn uses(self, side: Side) -> bool {
        !matches!(
            (self, side),
            (PhiVariant::PlusPlus, Side::Minus) | (PhiVariant::PlusMinus, Side::Plus)
        )
    }
}

/// v^{-1}(n) on one side and the matching ψ² contribution n·w(v^{-1}(n)).
fn side_scale(seq: &SequenceSet, side: Side, n: u64) -> Result<(Option<u64>, f64), FluxError> {
    let k = seq.inverse_at(Series::v(side), n as f64).certified()?;
    let psi2 = match k {
        _ if n == 0 => 0.0,
        Some(k) => {
            let w = seq
                .value_at(Series::w(side), k)
                .ok_or(FluxError::Window { side, index: k })?;
            n as f64 * w
        }
        None => f64::INFINITY,
    };
    Ok((k, psi2))
}

/// φ_u²(n) for the chosen variant, from the materialized prefix of `seq`.
pub fn phi_squared(
    seq: &SequenceSet,
    profile: &FluxProfile,
    variant: PhiVariant,
    n: u64,
) -> Result<f64, FluxError> {
    let (kp, psi_p) = if variant.uses(Side::Plus) {
        side_scale(seq, Side::Plus, n)?
    } else {
        (Some(0), 0.0)
    };
    let (km, psi_m) = if variant.uses(Side::Minus) {
        side_scale(seq, Side::Minus, n)?
    } else {
        (Some(0), 0.0)
    };
    let (Some(kp), Some(km)) = (kp, km) else {
        return Ok(f64::INFINITY);
    };
    let flux = match variant {
        PhiVariant::Full => profile.kappa(km, kp)?,
        PhiVariant::Plus => profile.kappa_plus(kp)? + profile.kappa_minus(km)?,
        PhiVariant::PlusPlus => profile.kappa_plus(kp)?,
        PhiVariant::PlusMinus => profile.kappa_minus(km)?,
    };
    Ok(psi_p + psi_m + flux)
}

pub fn phi(
    seq: &SequenceSet,
    profile: &FluxProfile,
    variant: PhiVariant,
    n: u64,
) -> Result<f64, FluxError> {
    Ok(phi_squared(seq, profile, variant, n)?.sqrt())
}

/// n ↦ φ_u(n) as a sequence over the materialized prefix.
pub struct PhiSequence<'a> {
    pub seq: &'a SequenceSet,
    pub profile: &'a FluxProfile,
    pub variant: PhiVariant,
}

impl MonotoneSequence for PhiSequence<'_> {
    fn probe(&mut self, n: u64) -> Probe {
        match phi(self.seq, self.profile, self.variant, n) {
            Ok(v) => Probe::Value(v),
            Err(_) => Probe::Beyond,
        }
    }
}

/// φ_u^{-1}(x) = sup{n : φ_u(n) ≤ x}.
pub fn phi_inverse(
    seq: &SequenceSet,
    profile: &FluxProfile,
    variant: PhiVariant,
    x: f64,
) -> GenInverse {
    generalized_inverse(
        &mut PhiSequence {
            seq,
            profile,
            variant,
        },
        x,
    )
}

/// Materialized extent after [`prepare`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prepared {
    pub x_max: f64,
    /// Largest argument n the prepared inverses at x ≤ x_max can need, plus one.
    pub n_hi: u64,
    pub plus_levels: usize,
    pub minus_levels: usize,
}

/// Materializes enough levels that the listed φ variants and their
/// inverses can be evaluated from the snapshot for arguments up to `x_max`.
///
/// φ and φ_+ dominate ψ, φ_{++} dominates ψ_+ and φ_{+−} dominates ψ_−,
/// so each inverse at x is at most the matching ψ inverse.
pub fn prepare(seq: &mut SequenceSet, x_max: f64, variants: &[PhiVariant]) -> Result<Prepared, FluxError> {
    for side in [Side::Plus, Side::Minus] {
        seq.supremum_bound(Series::v(side));
        seq.supremum_bound(Series::w(side));
    }
    let mut kinds: Vec<PsiKind> = variants.iter().map(|v| v.dominated()).collect();
    kinds.dedup();
    let mut n_hi = 0;
    for kind in kinds {
        let n = seq
            .psi_inverse(kind, x_max)
            .certified()?
            .ok_or(SeqError::Horizon { index: u64::MAX })?;
        n_hi = n_hi.max(n + 1);
    }
    for side in [Side::Plus, Side::Minus] {
        if let Some(k) = seq.inverse(Series::v(side), n_hi as f64).certified()? {
            let idx = usize::try_from(k + 1).map_err(|_| SeqError::Horizon { index: k + 1 })?;
            seq.ensure(side, idx)?;
        }
    }
    Ok(Prepared {
        x_max,
        n_hi,
        plus_levels: seq.len(Side::Plus),
        minus_levels: seq.len(Side::Minus),
    })
}
