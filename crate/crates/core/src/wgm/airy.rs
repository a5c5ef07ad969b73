//! Zeros of the Airy function Ai, needed by the spheroid dispersion relation.

use crate::error::{Error, Result};

/// Magnitudes of the first 20 zeros of Ai (all zeros lie on the negative
/// real axis).
const AI_ZEROS: [f64; 20] = [
    2.338107410459767,
    4.087949444130971,
    5.520559828095551,
    6.786708090071759,
    7.944133587120853,
    9.022650853340980,
    10.040174341558086,
    11.008524303733263,
    11.936015563236263,
    12.828776752865757,
    13.691489035210718,
    14.527829951775335,
    15.340755135977997,
    16.132685156945771,
    16.905633997429943,
    17.661300105697058,
    18.401132599207115,
    19.126380474246952,
    19.838129891721500,
    20.537332907677566,
];

/// Maximum radial mode number supported by the zero table.
pub const MAX_RADIAL_ORDER: u32 = 20;

/// Magnitude α_q of the q-th zero of Ai, 1 ≤ q ≤ 20.
pub fn airy_zero(q: u32) -> Result<f64> {
    if q == 0 || q > MAX_RADIAL_ORDER {
        return Err(Error::Domain(format!(
            "radial order q = {q} outside the supported range 1..={MAX_RADIAL_ORDER}"
        )));
    }
    Ok(AI_ZEROS[(q - 1) as usize])
}
