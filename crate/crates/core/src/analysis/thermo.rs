//! Thermal error model of one encoded qubit in a local field.
//!
//! `h > 0` is the field magnitude. The error probability is `W / (W + W')`
//! where `W` collects the Boltzmann weights of states that decode against
//! the field and `W'` those that decode with it. Square414 ties count half
//! on each side.

use serde::{Deserialize, Serialize};

use crate::decoding::{group_vote, Vote};
use crate::encoding::{build_encoded_graph, encode_problem, CodeKind};
use crate::error::{QacError, Result};
use crate::ising::IsingProblem;
use crate::sampling::spins_from_index;
use crate::topology::build_chimera;

/// Penalty range searched by [`optimize_thermo_gamma`].
pub const GAMMA_RANGE: (f64, f64) = (0.0, 2.0);
const GRID_POINTS: usize = 201;
const GAMMA_TOL: f64 = 1e-7;

/// Closed-form error probability.
pub fn thermo_error_prob(code: CodeKind, beta: f64, h: f64, gamma: f64) -> f64 {
    let e = |x: f64| (-beta * x).exp();
    let (w, w_prime) = match code {
        CodeKind::Square414 => {
            let t = 0.5 * (4.0 * e(4.0 * gamma) + 2.0 * e(8.0 * gamma));
            (t + 4.0 * e(4.0 * gamma + h) + e(2.0 * h), t + 4.0 * e(4.0 * gamma - h) + e(-2.0 * h))
        }
        CodeKind::Pudenz313 => (
            3.0 * e(4.0 * gamma + h) + e(6.0 * gamma + 3.0 * h) + 3.0 * e(2.0 * gamma + h) + e(3.0 * h),
            3.0 * e(4.0 * gamma - h) + e(6.0 * gamma - 3.0 * h) + 3.0 * e(2.0 * gamma - h) + e(-3.0 * h),
        ),
    };
    w / (w + w_prime)
}

/// Error probability by enumerating all 16 physical states of a compiled
/// one-vertex problem whose logical field favours `+1`.
pub fn thermo_error_prob_enumerated(code: CodeKind, beta: f64, h: f64, gamma: f64) -> Result<f64> {
    if h.abs() > 1.0 || !(0.0..=1.0).contains(&gamma) {
        // Compilation scales are bounded; rescale beta instead.
        let s = h.abs().max(gamma).max(1.0);
        return thermo_error_prob_enumerated(code, beta * s, h / s, gamma / s);
    }
    let hw = build_chimera(1, 1, 4, &Default::default())?;
    let (_, map) = build_encoded_graph(code, &hw)?;
    let logical = IsingProblem::builder().field(0, -h).build()?;
    let physical = encode_problem(&logical, &map, 1.0, gamma)?;
    let group = map.group(0).expect("vertex 0 exists");
    let data: Vec<usize> = group.data.iter().map(|&q| physical.local_index(q).unwrap()).collect();
    let n = physical.len();
    let energies: Vec<f64> = (0..1u64 << n).map(|i| physical.energy(&spins_from_index(i, n))).collect();
    let emin = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let (mut err, mut z) = (0.0, 0.0);
    for (i, energy) in energies.iter().enumerate() {
        let spins = spins_from_index(i as u64, n);
        let w = (-beta * (energy - emin)).exp();
        let vote: Vec<i8> = data.iter().map(|&k| spins[k]).collect();
        err += w * match group_vote(code, &vote)? {
            Vote::Plus => 0.0,
            Vote::Minus => 1.0,
            Vote::Tie => 0.5,
        };
        z += w;
    }
    Ok(err / z)
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

/// Minimizes the closed form over `gamma` in [`GAMMA_RANGE`]: a uniform
/// grid followed by golden-section refinement around the best grid point.
pub fn optimize_thermo_gamma(code: CodeKind, beta: f64, h: f64) -> Result<(f64, f64)> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(QacError::Input(format!("beta {beta} must be positive")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(QacError::Input(format!("h {h} must be positive")));
    }
    let f = |g: f64| thermo_error_prob(code, beta, h, g);
    let (lo, hi) = GAMMA_RANGE;
    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..GRID_POINTS).map(|k| lo + k as f64 * step).collect();
    let (k, _) =
        grid.iter()
            .map(|&g| f(g))
            .enumerate()
            .fold((0, f64::INFINITY), |best, (k, p)| if p < best.1 { (k, p) } else { best });
    let a = grid[k.saturating_sub(1)];
    let b = grid[(k + 1).min(GRID_POINTS - 1)];
    let refined = golden_section(f, a, b, GAMMA_TOL);
    let (g, p) = if f(refined) <= f(grid[k]) { (refined, f(refined)) } else { (grid[k], f(grid[k])) };
    Ok((g, p))
}

/// `n` log-spaced points from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut g: Vec<f64> = (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect();
    g[0] = lo;
    g[n - 1] = hi;
    g
}

/// Optimized error curves over a `beta h` grid at fixed `beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermoCurves {
    pub beta: f64,
    pub beta_h: Vec<f64>,
    /// Pudenz313 and Square414 at equal `h`.
    pub equal_p313: Vec<f64>,
    pub equal_p414: Vec<f64>,
    /// Pudenz313 at `2h/3`, the effective scale matching Square414 at `h`.
    pub scaled_p313: Vec<f64>,
    pub gamma_opt_313: Vec<f64>,
    pub gamma_opt_414: Vec<f64>,
}

impl ThermoCurves {
    pub fn compute(beta: f64, beta_h: &[f64]) -> Result<Self> {
        let mut c = ThermoCurves {
            beta,
            beta_h: beta_h.to_vec(),
            equal_p313: Vec::new(),
            equal_p414: Vec::new(),
            scaled_p313: Vec::new(),
            gamma_opt_313: Vec::new(),
            gamma_opt_414: Vec::new(),
        };
        for &bh in beta_h {
            let h = bh / beta;
            let (g3, p3) = optimize_thermo_gamma(CodeKind::Pudenz313, beta, h)?;
            let (g4, p4) = optimize_thermo_gamma(CodeKind::Square414, beta, h)?;
            let (_, s3) = optimize_thermo_gamma(CodeKind::Pudenz313, beta, 2.0 * h / 3.0)?;
            c.equal_p313.push(p3);
            c.equal_p414.push(p4);
            c.scaled_p313.push(s3);
            c.gamma_opt_313.push(g3);
            c.gamma_opt_414.push(g4);
        }
        Ok(c)
    }
}
