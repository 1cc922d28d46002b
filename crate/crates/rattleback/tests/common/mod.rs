#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rattleback::model::Params;
use rattleback::variational::{self, FuchsianData};

pub fn worked_example() -> Params {
    Params::from_principal(0.5, 0.6, 0.8, 1.3, [1.0, 2.0, 3.0], 1.0, 1.0).unwrap()
}

/// Random flat rattleback: positive principal moments with `I3 < I1 + I2`,
/// semi-axes `b1 > b2 > b3`, arbitrary tilt of the inertia axes.
///
/// Tall bodies (`b3` well above `sqrt(b1² - b2²)`) are left out on purpose:
/// their transport from the basepoint is so non-normal that the monodromy
/// entries reach 1e5 and det = 1 is no longer resolvable in double precision.
pub fn mechanical_draw(rng: &mut ChaCha8Rng) -> Params {
    loop {
        let i1 = rng.gen_range(0.3..3.0);
        let i2 = rng.gen_range(0.3..3.0);
        let i3 = rng.gen_range(0.05..0.95) * (i1 + i2);
        let delta = rng.gen_range(-1.5..1.5);
        let b1 = rng.gen_range(0.3..2.0);
        let b2 = b1 * rng.gen_range(0.1..0.95);
        let b3 = b2 * rng.gen_range(0.2..1.0);
        let (m, g) = (rng.gen_range(0.2..3.0), rng.gen_range(0.5..10.0));
        if let Ok(p) = Params::from_principal(i1, i2, i3, delta, [b1, b2, b3], m, g) {
            if p.is_mechanical() {
                return p;
            }
        }
    }
}

/// Draws satisfying the exponent condition, with their residue data at `h = 1`.
pub fn condition_draws(seed: u64, n: usize) -> Vec<(Params, FuchsianData)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < n {
        let p = mechanical_draw(&mut rng);
        let Ok(fd) = variational::residues(&p, num_complex::Complex64::new(1.0, 0.0)) else { continue };
        if variational::condition_check(&fd.lambda, variational::CONDITION_MARGIN).is_satisfied() {
            out.push((p, fd));
        }
    }
    out
}
