//! Adaptive Gauss-Kronrod integration in one dimension and iterated over two.
//!
//! Each cell is integrated with the 15-point Kronrod rule; the embedded
//! 7-point Gauss rule supplies the error estimate `|K15 - G7|`. The cell with
//! the largest estimate is bisected until the summed estimate meets
//! `rel_tol·|value| + abs_tol`. Final sums are taken in order of the left
//! endpoint, so the result depends only on the integrand and the config.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{domain, Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Upper limit on live cells per integral.
pub const MAX_CELLS: usize = 4096;

/// Tolerances for [`integrate_1d`] and [`integrate_2d_iterated`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of bisections applied to any one cell.
    pub max_depth: u32,
    /// Probability mass cut from each end of an infinite domain.
    pub tail_mass: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { rel_tol: 1e-8, abs_tol: 1e-15, max_depth: 40, tail_mass: 1e-12 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return domain(format!("rel_tol must be positive, got {}", self.rel_tol));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return domain(format!("abs_tol must be positive, got {}", self.abs_tol));
        }
        if !(self.tail_mass > 0.0 && self.tail_mass < 1e-6) {
            return domain(format!("tail_mass must lie in (0, 1e-6), got {}", self.tail_mass));
        }
        if self.max_depth == 0 {
            return domain("max_depth must be at least 1");
        }
        Ok(())
    }

    fn tightened(&self) -> Self {
        QuadratureConfig { rel_tol: self.rel_tol / 10.0, abs_tol: self.abs_tol / 10.0, ..*self }
    }
}

/// Estimate, error bound and cost of one integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub err_est: f64,
    /// False when the depth or cell limit stopped refinement early.
    pub converged: bool,
    pub evaluations: usize,
    pub cells: usize,
}

impl QuadResult {
    /// Turns an unconverged result into [`Error::DepthExceeded`].
    pub fn check(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::DepthExceeded { estimate: self.value, err_est: self.err_est })
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Cell {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    depth: u32,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Cell {}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err).then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Integrand sample carrying its own error, used by the iterated integral.
struct Sample {
    value: f64,
    err: f64,
    converged: bool,
    evaluations: usize,
}

fn kronrod<G>(g: &mut G, a: f64, b: f64, depth: u32, stats: &mut Stats) -> Result<Cell>
where
    G: FnMut(f64) -> Result<Sample>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut eval = |x: f64, stats: &mut Stats| -> Result<Sample> {
        let s = g(x)?;
        if !s.value.is_finite() {
            return Err(Error::NonFinite(x));
        }
        stats.evaluations += s.evaluations;
        stats.converged &= s.converged;
        Ok(s)
    };
    let fc = eval(c, stats)?;
    let mut resk = WGK[7] * fc.value;
    let mut resg = WG[3] * fc.value;
    let mut resabs = WGK[7] * fc.value.abs();
    let mut inner = WGK[7] * fc.err;
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = eval(c - dx, stats)?;
        let f2 = eval(c + dx, stats)?;
        resk += WGK[j] * (f1.value + f2.value);
        resabs += WGK[j] * (f1.value.abs() + f2.value.abs());
        inner += WGK[j] * (f1.err + f2.err);
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1.value + f2.value);
        }
    }
    let h = h.abs();
    let err = (resk - resg).abs() * h + inner * h + 50.0 * f64::EPSILON * resabs * h;
    Ok(Cell { a, b, value: resk * h * (b - a).signum(), err, depth })
}

struct Stats {
    evaluations: usize,
    converged: bool,
}

fn adapt<G>(mut g: G, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<QuadResult>
where
    G: FnMut(f64) -> Result<Sample>,
{
    cfg.validate()?;
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return domain(format!("integration bounds must be finite with a < b, got [{a}, {b}]"));
    }
    let mut stats = Stats { evaluations: 0, converged: true };
    let mut heap = BinaryHeap::new();
    let mut frozen = Vec::new();
    heap.push(kronrod(&mut g, a, b, 0, &mut stats)?);

    loop {
        let (value, err) = totals(heap.iter().chain(frozen.iter()));
        if err <= cfg.rel_tol * value.abs() + cfg.abs_tol {
            break;
        }
        let Some(worst) = heap.pop() else {
            break;
        };
        if worst.depth >= cfg.max_depth {
            frozen.push(worst);
            continue;
        }
        if heap.len() + frozen.len() + 2 > MAX_CELLS {
            heap.push(worst);
            break;
        }
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            frozen.push(worst);
            continue;
        }
        heap.push(kronrod(&mut g, worst.a, mid, worst.depth + 1, &mut stats)?);
        heap.push(kronrod(&mut g, mid, worst.b, worst.depth + 1, &mut stats)?);
    }

    let mut cells: Vec<Cell> = heap.into_vec();
    cells.extend(frozen);
    cells.sort_by(|x, y| x.a.total_cmp(&y.a));
    let (value, err_est) = totals(cells.iter());
    let met = err_est <= cfg.rel_tol * value.abs() + cfg.abs_tol;
    Ok(QuadResult {
        value,
        err_est,
        converged: stats.converged && met,
        evaluations: stats.evaluations,
        cells: cells.len(),
    })
}

fn totals<'a>(cells: impl Iterator<Item = &'a Cell>) -> (f64, f64) {
    cells.fold((0.0, 0.0), |(v, e), c| (v + c.value, e + c.err))
}

/// Integrates `f` over `[a, b]`.
///
/// An integral that cannot meet its tolerance within `max_depth` bisections
/// still returns its best estimate, with `converged == false`.
///
/// ```
/// use rcbound::quadrature::{integrate_1d, QuadratureConfig};
///
/// let r = integrate_1d(|x| Ok(x * x), 0.0, 1.0, &QuadratureConfig::default()).unwrap();
/// assert!((r.value - 1.0 / 3.0).abs() < 1e-12);
/// ```
pub fn integrate_1d<F>(mut f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    adapt(
        |x| Ok(Sample { value: f(x)?, err: 0.0, converged: true, evaluations: 1 }),
        a,
        b,
        cfg,
    )
}

/// Integrates `f(x, y)` for `x` in `outer` and `y` in `inner_bounds_of(x)`.
///
/// The inner integrals run at a tolerance ten times tighter than the outer
/// one and their error estimates are carried into the outer estimate. The
/// inner absolute tolerance is further divided by the outer width, since
/// inner errors accumulate over the whole outer range.
pub fn integrate_2d_iterated<F, B>(
    mut f: F,
    outer: (f64, f64),
    mut inner_bounds_of: B,
    cfg: &QuadratureConfig,
) -> Result<QuadResult>
where
    F: FnMut(f64, f64) -> Result<f64>,
    B: FnMut(f64) -> Result<(f64, f64)>,
{
    let mut inner_cfg = cfg.tightened();
    inner_cfg.abs_tol /= (outer.1 - outer.0).abs().max(1.0);
    adapt(
        |x| {
            let (lo, hi) = inner_bounds_of(x)?;
            if !(lo < hi) {
                return Ok(Sample { value: 0.0, err: 0.0, converged: true, evaluations: 0 });
            }
            let r = integrate_1d(|y| f(x, y), lo, hi, &inner_cfg)?;
            Ok(Sample {
                value: r.value,
                err: r.err_est,
                converged: r.converged,
                evaluations: r.evaluations,
            })
        },
        outer.0,
        outer.1,
        cfg,
    )
}
