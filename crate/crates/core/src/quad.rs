//! Globally adaptive 21-point Gauss–Kronrod quadrature for vector-valued
//! integrands, with QUADPACK's error heuristics and `(1-t)/t` maps for
//! infinite limits.

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_980_478_133,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// 10-point Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subintervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subintervals: 2000,
        }
    }
}

impl QuadOptions {
    pub fn with_tolerances(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Integral<const N: usize> {
    pub value: [f64; N],
    pub error: [f64; N],
    pub evaluations: usize,
    pub subintervals: usize,
}

struct Piece<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
}

impl<const N: usize> Piece<N> {
    fn key(&self) -> f64 {
        self.error.iter().copied().fold(0.0, f64::max)
    }
}

fn kronrod21<const N: usize, F>(f: &mut F, a: f64, b: f64) -> Result<Piece<N>>
where
    F: FnMut(f64) -> [f64; N],
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let abs_half = half.abs();

    let mut fv1 = [[0.0; N]; 10];
    let mut fv2 = [[0.0; N]; 10];

    let fc = f(center);
    let mut resk = [0.0; N];
    let mut resg = [0.0; N];
    let mut resabs = [0.0; N];
    for k in 0..N {
        resk[k] = WGK[10] * fc[k];
        resabs[k] = resk[k].abs();
    }
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        for k in 0..N {
            let sum = f1[k] + f2[k];
            resk[k] += WGK[j] * sum;
            resabs[k] += WGK[j] * (f1[k].abs() + f2[k].abs());
            if j % 2 == 1 {
                resg[k] += WG[j / 2] * sum;
            }
        }
        fv1[j] = f1;
        fv2[j] = f2;
    }

    let mut value = [0.0; N];
    let mut error = [0.0; N];
    for k in 0..N {
        let reskh = 0.5 * resk[k];
        let mut resasc = WGK[10] * (fc[k] - reskh).abs();
        for j in 0..10 {
            resasc += WGK[j] * ((fv1[j][k] - reskh).abs() + (fv2[j][k] - reskh).abs());
        }
        let result = resk[k] * half;
        let resabs_k = resabs[k] * abs_half;
        resasc *= abs_half;
        let mut err = ((resk[k] - resg[k]) * half).abs();
        if resasc != 0.0 && err != 0.0 {
            err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
        }
        if resabs_k > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(50.0 * f64::EPSILON * resabs_k);
        }
        if !result.is_finite() || !err.is_finite() {
            return Err(Error::Quadrature(format!(
                "non-finite integrand on [{a}, {b}]"
            )));
        }
        value[k] = result;
        error[k] = err;
    }
    Ok(Piece { a, b, value, error })
}

/// Integrate `f` over `[a, b]`; either limit may be infinite.
pub fn integrate<const N: usize, F>(
    mut f: F,
    a: f64,
    b: f64,
    opts: &QuadOptions,
) -> Result<Integral<N>>
where
    F: FnMut(f64) -> [f64; N],
{
    if a.is_nan() || b.is_nan() {
        return Err(Error::Quadrature("NaN integration limit".into()));
    }
    if a == b {
        return Ok(Integral {
            value: [0.0; N],
            error: [0.0; N],
            evaluations: 0,
            subintervals: 0,
        });
    }
    if a > b {
        let mut r = integrate(f, b, a, opts)?;
        r.value.iter_mut().for_each(|v| *v = -*v);
        return Ok(r);
    }
    match (a.is_finite(), b.is_finite()) {
        (true, true) => adapt(&mut f, a, b, opts),
        (true, false) => {
            let mut g = |t: f64| {
                let x = a + (1.0 - t) / t;
                scale(f(x), 1.0 / (t * t))
            };
            adapt(&mut g, 0.0, 1.0, opts)
        }
        (false, true) => {
            let mut g = |t: f64| {
                let x = b - (1.0 - t) / t;
                scale(f(x), 1.0 / (t * t))
            };
            adapt(&mut g, 0.0, 1.0, opts)
        }
        (false, false) => {
            let mut g = |t: f64| {
                let x = (1.0 - t) / t;
                let up = f(x);
                let down = f(-x);
                let mut out = [0.0; N];
                for k in 0..N {
                    out[k] = (up[k] + down[k]) / (t * t);
                }
                out
            };
            adapt(&mut g, 0.0, 1.0, opts)
        }
    }
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar<F>(mut f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let r = integrate(|x| [f(x)], a, b, opts)?;
    Ok((r.value[0], r.error[0]))
}

fn scale<const N: usize>(mut v: [f64; N], s: f64) -> [f64; N] {
    for x in v.iter_mut() {
        // integrands vanish where the map sends x to infinity
        *x = if *x == 0.0 { 0.0 } else { *x * s };
    }
    v
}

fn adapt<const N: usize, F>(f: &mut F, a: f64, b: f64, opts: &QuadOptions) -> Result<Integral<N>>
where
    F: FnMut(f64) -> [f64; N],
{
    let mut pieces = vec![kronrod21(f, a, b)?];
    let mut evaluations = 21;

    loop {
        let mut total = [0.0; N];
        let mut total_err = [0.0; N];
        for p in &pieces {
            for k in 0..N {
                total[k] += p.value[k];
                total_err[k] += p.error[k];
            }
        }
        let done = (0..N).all(|k| total_err[k] <= opts.abs_tol.max(opts.rel_tol * total[k].abs()));
        if done {
            return Ok(Integral {
                value: total,
                error: total_err,
                evaluations,
                subintervals: pieces.len(),
            });
        }
        if pieces.len() >= opts.max_subintervals {
            return Err(Error::Quadrature(format!(
                "no convergence after {} subintervals (error {:?}, estimate {:?})",
                pieces.len(),
                total_err,
                total
            )));
        }

        let (worst, _) = pieces
            .iter()
            .enumerate()
            .map(|(i, p)| (i, p.key()))
            .fold((0, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        let piece = pieces.swap_remove(worst);
        let mid = 0.5 * (piece.a + piece.b);
        if mid <= piece.a || mid >= piece.b {
            return Err(Error::Quadrature(format!(
                "interval [{}, {}] cannot be bisected further",
                piece.a, piece.b
            )));
        }
        pieces.push(kronrod21(f, piece.a, mid)?);
        pieces.push(kronrod21(f, mid, piece.b)?);
        evaluations += 42;
    }
}
