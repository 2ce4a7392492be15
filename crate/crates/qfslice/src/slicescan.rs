//! Grid classification of the τ-strip at fixed real length, connected
//! components, verification predicates and pleating-ray extraction.
//!
//! A scan samples cell centers of a window inside the strip
//! `Im τ ∈ [−π, π)`, runs the Bowditch search on each and labels the
//! 4-connected components of the quasi-Fuchsian cells.  The component
//! touching the Fuchsian axis `Im τ = 0` is the standard one; everything
//! else is non-standard.  Rows are distributed over a caller-chosen number
//! of workers and merged positionally, so results do not depend on the
//! worker count.

use std::collections::HashMap;
use std::io::Write;

use qfslice_core::bq::{bq_test, BqParams, BqVerdict};
use qfslice_core::farey::Slope;
use qfslice_core::mobius::{classify, IsomClass};
use qfslice_core::repr::FNPoint;
use qfslice_core::traces::{trace_poly, TracePoly};
use qfslice_core::Complex64;
use serde::Serialize;

use crate::SliceError;

/// A rectangular sampling window inside the τ-strip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Window {
    pub fn new(
        re_min: f64,
        re_max: f64,
        im_min: f64,
        im_max: f64,
        nx: usize,
        ny: usize,
    ) -> Result<Window, SliceError> {
        let w = Window {
            re_min,
            re_max,
            im_min,
            im_max,
            nx,
            ny,
        };
        w.validate()?;
        Ok(w)
    }

    /// A window spanning the whole strip height `[−π, π]`.
    pub fn strip(re_min: f64, re_max: f64, nx: usize, ny: usize) -> Result<Window, SliceError> {
        Window::new(
            re_min,
            re_max,
            -std::f64::consts::PI,
            std::f64::consts::PI,
            nx,
            ny,
        )
    }

    pub fn validate(&self) -> Result<(), SliceError> {
        let pi = std::f64::consts::PI;
        if !(self.re_min < self.re_max) {
            return Err(SliceError::InvalidWindow(format!(
                "re_min {} must be below re_max {}",
                self.re_min, self.re_max
            )));
        }
        if !(-pi <= self.im_min && self.im_min < self.im_max && self.im_max <= pi) {
            return Err(SliceError::InvalidWindow(format!(
                "need −π ≤ im_min < im_max ≤ π, got [{}, {}]",
                self.im_min, self.im_max
            )));
        }
        if self.nx == 0 || self.ny == 0 {
            return Err(SliceError::InvalidWindow("nx and ny must be positive".into()));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.re_max - self.re_min) / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        (self.im_max - self.im_min) / self.ny as f64
    }

    /// Center of cell `(i, j)`; `j` counts up from `im_min`.
    pub fn center(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(
            self.re_min + (i as f64 + 0.5) * self.dx(),
            self.im_min + (j as f64 + 0.5) * self.dy(),
        )
    }

    /// Cell containing a point, if inside the window.
    pub fn cell_of(&self, p: Complex64) -> Option<(usize, usize)> {
        let i = (p.re - self.re_min) / self.dx();
        let j = (p.im - self.im_min) / self.dy();
        if i < 0.0 || j < 0.0 {
            return None;
        }
        let (i, j) = (i as usize, j as usize);
        if i >= self.nx || j >= self.ny {
            None
        } else {
            Some((i, j))
        }
    }
}

/// Per-cell verdict code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Qf,
    NotQf,
    Unknown,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Qf => "QF",
            Verdict::NotQf => "NotQF",
            Verdict::Unknown => "Unknown",
        }
    }

    fn of(v: &BqVerdict) -> Verdict {
        match v {
            BqVerdict::Qf => Verdict::Qf,
            BqVerdict::NotQf { .. } => Verdict::NotQf,
            BqVerdict::Unknown { .. } => Verdict::Unknown,
        }
    }
}

/// A classified grid over the τ-strip at fixed `l`.
#[derive(Debug, Clone)]
pub struct SliceScan {
    pub l: f64,
    pub window: Window,
    /// Row-major verdicts, index `j*nx + i`.
    pub cells: Vec<Verdict>,
    /// Component id per cell; `-1` outside the QF set.
    pub labels: Vec<i32>,
    pub standard_id: Option<i32>,
}

impl SliceScan {
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.window.nx + i
    }

    pub fn verdict(&self, i: usize, j: usize) -> Verdict {
        self.cells[self.idx(i, j)]
    }

    pub fn histogram(&self) -> (usize, usize, usize) {
        let mut h = (0, 0, 0);
        for v in &self.cells {
            match v {
                Verdict::Qf => h.0 += 1,
                Verdict::NotQf => h.1 += 1,
                Verdict::Unknown => h.2 += 1,
            }
        }
        h
    }

    /// CSV rows `re,im,verdict,label`, one per cell, row-major from
    /// `im_min` upward.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "re,im,verdict,label")?;
        for j in 0..self.window.ny {
            for i in 0..self.window.nx {
                let c = self.window.center(i, j);
                let k = self.idx(i, j);
                writeln!(
                    out,
                    "{},{},{},{}",
                    c.re,
                    c.im,
                    self.cells[k].as_str(),
                    self.labels[k]
                )?;
            }
        }
        Ok(())
    }
}

/// Parker-Parkkonen bound `2·arccos(tanh(l/2))`: points with
/// `|Im τ|` below it are always quasi-Fuchsian.
pub fn pp_bound(l: f64) -> f64 {
    2.0 * (l / 2.0).tanh().acos()
}

/// Lower thresholds of the two elliptic bands: above the first, points on
/// `Re τ = nl` are not quasi-Fuchsian; above the second, the same holds on
/// `Re τ = (n+1/2)l`.
pub fn elliptic_bands(l: f64) -> (f64, f64) {
    let th = (l / 2.0).tanh();
    let integral = 2.0 * th.acos();
    let half_integral = (th * th - 1.0 / (l / 2.0).cosh()).acos();
    (integral, half_integral)
}

/// Classify every cell center of the window; `workers ≥ 1` rows are
/// processed in parallel with a positional merge.
pub fn scan(
    l: f64,
    window: &Window,
    params: &BqParams,
    workers: usize,
) -> Result<SliceScan, SliceError> {
    window.validate()?;
    if l <= 0.0 {
        return Err(SliceError::InvalidParam(format!("l must be positive, got {l}")));
    }
    let workers = workers.max(1);
    let mut cells = vec![Verdict::Unknown; window.nx * window.ny];

    {
        let rows: Vec<(usize, &mut [Verdict])> = cells.chunks_mut(window.nx).enumerate().collect();
        let rows_per = rows.len().div_ceil(workers);
        let mut groups: Vec<Vec<(usize, &mut [Verdict])>> = Vec::new();
        let mut cur = Vec::new();
        for item in rows {
            cur.push(item);
            if cur.len() == rows_per {
                groups.push(std::mem::take(&mut cur));
            }
        }
        if !cur.is_empty() {
            groups.push(cur);
        }
        std::thread::scope(|scope| {
            for group in groups {
                scope.spawn(move || {
                    for (j, row) in group {
                        for (i, slot) in row.iter_mut().enumerate() {
                            let tau = window.center(i, j);
                            let v = bq_test(&FNPoint::real(l, tau), params);
                            *slot = Verdict::of(&v);
                        }
                    }
                });
            }
        });
    }

    let (labels, standard_id) = label_components(window, &cells);
    Ok(SliceScan {
        l,
        window: *window,
        cells,
        labels,
        standard_id,
    })
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(len: usize) -> Self {
        UnionFind {
            parent: (0..len).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Smaller root wins, keeping labels stable under scheduling.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// 4-connected labeling of QF cells; also picks out the component that
/// owns a cell within one cell height of the Fuchsian axis.
fn label_components(window: &Window, cells: &[Verdict]) -> (Vec<i32>, Option<i32>) {
    let (nx, ny) = (window.nx, window.ny);
    let mut uf = UnionFind::new(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let k = j * nx + i;
            if cells[k] != Verdict::Qf {
                continue;
            }
            if i > 0 && cells[k - 1] == Verdict::Qf {
                uf.union(k, k - 1);
            }
            if j > 0 && cells[k - nx] == Verdict::Qf {
                uf.union(k, k - nx);
            }
        }
    }
    let mut labels = vec![-1i32; nx * ny];
    let mut ids: HashMap<usize, i32> = HashMap::new();
    let mut next = 0i32;
    for j in 0..ny {
        for i in 0..nx {
            let k = j * nx + i;
            if cells[k] != Verdict::Qf {
                continue;
            }
            let root = uf.find(k);
            let id = *ids.entry(root).or_insert_with(|| {
                let id = next;
                next += 1;
                id
            });
            labels[k] = id;
        }
    }

    // The standard component owns axis-adjacent cells.
    let dy = window.dy();
    let mut axis_counts: HashMap<i32, usize> = HashMap::new();
    for j in 0..ny {
        for i in 0..nx {
            let k = j * nx + i;
            if labels[k] >= 0 && window.center(i, j).im.abs() < dy {
                *axis_counts.entry(labels[k]).or_insert(0) += 1;
            }
        }
    }
    let standard = axis_counts
        .iter()
        .max_by_key(|(id, n)| (**n, -(**id as i64)))
        .map(|(id, _)| *id);
    (labels, standard)
}

/// Facts about one QF component of a scan.
#[derive(Debug, Clone, Serialize)]
pub struct ComponentInfo {
    pub label: i32,
    pub cells: usize,
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    /// Leftmost cell-center real part.
    pub leftmost_re: f64,
    pub standard: bool,
    /// Touches the left or right window edge.
    pub truncated: bool,
    /// Counted toward the fundamental-domain tally.
    pub counted: bool,
}

/// Component census over the fundamental domain `Re τ ∈ [0, l)`.
#[derive(Debug, Clone, Serialize)]
pub struct ComponentReport {
    pub standard_present: bool,
    pub nonstandard_count: usize,
    pub truncated: usize,
    pub components: Vec<ComponentInfo>,
}

/// Count components by the leftmost-cell rule.  The window must contain
/// `Re τ ∈ [−l/4, 5l/4]`, so the fundamental domain sits in the interior.
pub fn count_components(scan: &SliceScan) -> Result<ComponentReport, SliceError> {
    let w = &scan.window;
    let (need_lo, need_hi) = (-scan.l / 4.0, 1.25 * scan.l);
    if w.re_min > need_lo || w.re_max < need_hi {
        return Err(SliceError::WindowTooNarrow {
            need_lo,
            need_hi,
            got_lo: w.re_min,
            got_hi: w.re_max,
        });
    }

    struct Acc {
        cells: usize,
        re_min: f64,
        re_max: f64,
        im_min: f64,
        im_max: f64,
        touches: bool,
    }
    let mut accs: Vec<Acc> = Vec::new();
    for j in 0..w.ny {
        for i in 0..w.nx {
            let id = scan.labels[j * w.nx + i];
            if id < 0 {
                continue;
            }
            let id = id as usize;
            while accs.len() <= id {
                accs.push(Acc {
                    cells: 0,
                    re_min: f64::INFINITY,
                    re_max: f64::NEG_INFINITY,
                    im_min: f64::INFINITY,
                    im_max: f64::NEG_INFINITY,
                    touches: false,
                });
            }
            let c = w.center(i, j);
            let a = &mut accs[id];
            a.cells += 1;
            a.re_min = a.re_min.min(c.re);
            a.re_max = a.re_max.max(c.re);
            a.im_min = a.im_min.min(c.im);
            a.im_max = a.im_max.max(c.im);
            a.touches |= i == 0 || i == w.nx - 1;
        }
    }

    let mut components = Vec::with_capacity(accs.len());
    let mut nonstandard = 0usize;
    let mut truncated = 0usize;
    for (id, a) in accs.iter().enumerate() {
        let label = id as i32;
        let standard = scan.standard_id == Some(label);
        let counted = !a.touches && a.re_min >= 0.0 && a.re_min < scan.l && !standard;
        if counted {
            nonstandard += 1;
        }
        if a.touches && !standard {
            truncated += 1;
        }
        components.push(ComponentInfo {
            label,
            cells: a.cells,
            re_min: a.re_min,
            re_max: a.re_max,
            im_min: a.im_min,
            im_max: a.im_max,
            leftmost_re: a.re_min,
            standard,
            truncated: a.touches,
            counted,
        });
    }
    Ok(ComponentReport {
        standard_present: scan.standard_id.is_some(),
        nonstandard_count: nonstandard,
        truncated,
        components,
    })
}

/// Deterministic generator for the verification samples (splitmix64).
struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

/// Quantitative spot-checks of a slice against its classifier.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub l: f64,
    pub samples: usize,
    pub pp_bound: f64,
    /// Fraction of samples with `|Im τ| ≤ 0.95·pp_bound` classified QF.
    pub pp_fraction_qf: f64,
    /// Fraction of integral-band samples classified NotQF with the
    /// expected `−n/1` witness.
    pub band_fraction_notqf: f64,
    pub band_samples: usize,
    /// `|tr_{−n/1}(l, nl + pp_bound·i) − 2|` for n = 0, 1, 2.
    pub cusp_trace_errors: Vec<f64>,
    /// Verdict agreement between τ and τ + l, Unknown pairs excluded.
    pub twist_agreement: f64,
    pub twist_pairs: usize,
    /// Verdict agreement between τ and conj τ, Unknown pairs excluded.
    pub conj_agreement: f64,
    pub conj_pairs: usize,
}

impl VerifyReport {
    pub fn passes(&self) -> bool {
        self.pp_fraction_qf == 1.0
            && self.band_fraction_notqf == 1.0
            && self.cusp_trace_errors.iter().all(|e| *e <= 1e-9)
            && self.twist_agreement == 1.0
            && self.conj_agreement == 1.0
    }
}

fn verdict_kind(v: &BqVerdict) -> Option<bool> {
    match v {
        BqVerdict::Qf => Some(true),
        BqVerdict::NotQf { .. } => Some(false),
        BqVerdict::Unknown { .. } => None,
    }
}

/// Run the verification battery at `l` with `n_samples` samples per
/// predicate.  Sampling is deterministic (fixed seed).
pub fn verify(l: f64, n_samples: usize, params: &BqParams) -> Result<VerifyReport, SliceError> {
    if l <= 0.0 {
        return Err(SliceError::InvalidParam(format!("l must be positive, got {l}")));
    }
    let n = n_samples.max(1);
    let bound = pp_bound(l);
    let pi = std::f64::consts::PI;
    let mut rng = SplitMix64::new(0x5EED_0F_5EED_u64);

    // (a) Parker-Parkkonen inclusion.
    let mut pp_qf = 0usize;
    for _ in 0..n {
        let tau = Complex64::new(
            rng.uniform(-l, 2.0 * l),
            rng.uniform(-0.95 * bound, 0.95 * bound),
        );
        if bq_test(&FNPoint::real(l, tau), params).is_qf() {
            pp_qf += 1;
        }
    }

    // (b) Integral elliptic bands at Re τ = nl, n ∈ {0, 1}.
    let (band_lo, band_hi) = (1.05 * bound, 0.95 * pi);
    let mut band_hits = 0usize;
    let mut band_total = 0usize;
    if band_lo < band_hi {
        for k in 0..n {
            let twist = (k % 2) as i64;
            let b = rng.uniform(band_lo, band_hi);
            let tau = Complex64::new(twist as f64 * l, b);
            band_total += 1;
            let want = Slope::new(-twist, 1).expect("slope");
            if let BqVerdict::NotQf { witness, .. } = bq_test(&FNPoint::real(l, tau), params) {
                if witness == want {
                    band_hits += 1;
                }
            }
        }
    }
    let band_fraction = if band_total == 0 {
        1.0
    } else {
        band_hits as f64 / band_total as f64
    };

    // (c) Cusp traces at the band corner.
    let mut cusp_errors = Vec::with_capacity(3);
    for nn in 0..3i64 {
        let s = Slope::new(-nn, 1).expect("slope");
        let tp = trace_poly(&s, Complex64::new(l, 0.0))?;
        let v = tp.eval(Complex64::new(nn as f64 * l, bound));
        cusp_errors.push((v - Complex64::new(2.0, 0.0)).norm());
    }

    // (d), (e) twist periodicity and conjugation symmetry.
    let mut twist_pairs = 0usize;
    let mut twist_agree = 0usize;
    let mut conj_pairs = 0usize;
    let mut conj_agree = 0usize;
    for _ in 0..n {
        let tau = Complex64::new(rng.uniform(-l, 2.0 * l), rng.uniform(-pi, pi));
        let v0 = verdict_kind(&bq_test(&FNPoint::real(l, tau), params));
        let v1 = verdict_kind(&bq_test(&FNPoint::real(l, tau + l), params));
        let v2 = verdict_kind(&bq_test(&FNPoint::real(l, tau.conj()), params));
        if let (Some(a), Some(b)) = (v0, v1) {
            twist_pairs += 1;
            if a == b {
                twist_agree += 1;
            }
        }
        if let (Some(a), Some(b)) = (v0, v2) {
            conj_pairs += 1;
            if a == b {
                conj_agree += 1;
            }
        }
    }
    let ratio = |hits: usize, total: usize| {
        if total == 0 {
            1.0
        } else {
            hits as f64 / total as f64
        }
    };

    Ok(VerifyReport {
        l,
        samples: n,
        pp_bound: bound,
        pp_fraction_qf: pp_qf as f64 / n as f64,
        band_fraction_notqf: band_fraction,
        band_samples: band_total,
        cusp_trace_errors: cusp_errors,
        twist_agreement: ratio(twist_agree, twist_pairs),
        twist_pairs,
        conj_agreement: ratio(conj_agree, conj_pairs),
        conj_pairs,
    })
}

/// A connected run of a pleating-ray locus.
#[derive(Debug, Clone, Serialize)]
pub struct RaySegment {
    /// Slope whose trace function's real locus this is.
    pub slope: String,
    /// `+1` above the Fuchsian axis, `−1` below.
    pub side: i8,
    #[serde(skip)]
    pub points: Vec<Complex64>,
}

/// Identifier of a lattice edge carrying a contour crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum EdgeId {
    /// Between centers (i, j) and (i+1, j).
    H(usize, usize),
    /// Between centers (i, j) and (i, j+1).
    V(usize, usize),
}

/// Trace the real locus `Im tr_{p/q}(l, ·) = 0` inside the window by
/// marching squares over the cell-center lattice, refine each crossing by
/// bisection and keep only hyperbolic points in QF cells away from the
/// Fuchsian axis.  Chains are split wherever the filter rejects a point.
pub fn pleating_ray(
    l: f64,
    slope: &Slope,
    window: &Window,
    params: &BqParams,
) -> Result<Vec<RaySegment>, SliceError> {
    window.validate()?;
    if slope.is_infinity() {
        return Err(SliceError::InvalidParam(
            "pleating rays are defined for slopes other than 1/0".into(),
        ));
    }
    if l <= 0.0 {
        return Err(SliceError::InvalidParam(format!("l must be positive, got {l}")));
    }
    let poly = trace_poly(slope, Complex64::new(l, 0.0))?;
    let (nx, ny) = (window.nx, window.ny);
    let field: Vec<f64> = (0..ny)
        .flat_map(|j| (0..nx).map(move |i| (i, j)))
        .map(|(i, j)| poly.eval(window.center(i, j)).im)
        .collect();

    let mut verdicts: Vec<Option<Verdict>> = vec![None; nx * ny];
    let verdict_at = |i: usize, j: usize, verdicts: &mut Vec<Option<Verdict>>| -> Verdict {
        let k = j * nx + i;
        if let Some(v) = verdicts[k] {
            return v;
        }
        let v = Verdict::of(&bq_test(&FNPoint::real(l, window.center(i, j)), params));
        verdicts[k] = Some(v);
        v
    };

    // Refined crossing point per lattice edge, or None once rejected.
    let mut refined: HashMap<EdgeId, Option<Complex64>> = HashMap::new();
    let mut segments: Vec<(EdgeId, EdgeId)> = Vec::new();

    let value = |i: usize, j: usize| field[j * nx + i];
    let positive = |v: f64| v > 0.0;

    for j in 0..ny.saturating_sub(1) {
        for i in 0..nx.saturating_sub(1) {
            let corners = [
                value(i, j),
                value(i + 1, j),
                value(i + 1, j + 1),
                value(i, j + 1),
            ];
            if corners.iter().any(|v| !v.is_finite()) {
                continue;
            }
            let mut case = 0usize;
            for (bit, v) in corners.iter().enumerate() {
                if positive(*v) {
                    case |= 1 << bit;
                }
            }
            if case == 0 || case == 15 {
                continue;
            }
            // Crossed edges of the square, clockwise: bottom, right, top, left.
            let bottom = EdgeId::H(i, j);
            let right = EdgeId::V(i + 1, j);
            let top = EdgeId::H(i, j + 1);
            let left = EdgeId::V(i, j);
            let segs: &[(EdgeId, EdgeId)] = match case {
                1 | 14 => &[(left, bottom)],
                2 | 13 => &[(bottom, right)],
                3 | 12 => &[(left, right)],
                4 | 11 => &[(right, top)],
                6 | 9 => &[(bottom, top)],
                7 | 8 => &[(left, top)],
                5 | 10 => {
                    // Saddle: disambiguate by the center sign.
                    let center = 0.25 * corners.iter().sum::<f64>();
                    let flip = positive(center) == (case == 5);
                    if flip {
                        &[(left, top), (bottom, right)]
                    } else {
                        &[(left, bottom), (right, top)]
                    }
                }
                _ => &[],
            };
            segments.extend_from_slice(segs);
        }
    }

    // Refine each crossing by bisection along its lattice edge and filter.
    let dy = window.dy();
    let resolve = |edge: EdgeId,
                       refined: &mut HashMap<EdgeId, Option<Complex64>>,
                       verdicts: &mut Vec<Option<Verdict>>|
     -> Option<Complex64> {
        if let Some(v) = refined.get(&edge) {
            return *v;
        }
        let ((i0, j0), (i1, j1)) = match edge {
            EdgeId::H(i, j) => ((i, j), (i + 1, j)),
            EdgeId::V(i, j) => ((i, j), (i, j + 1)),
        };
        let p = refine_crossing(&poly, window.center(i0, j0), value(i0, j0), window.center(i1, j1), value(i1, j1));
        let accepted = p.and_then(|p| {
            if p.im.abs() < 0.5 * dy {
                return None; // Fuchsian axis, not a ray
            }
            let tr = poly.eval(p);
            let eps = 1e-6 * (1.0 + tr.norm());
            if tr.im.abs() > eps || classify(tr, eps) != IsomClass::Hyperbolic {
                return None;
            }
            let (ci, cj) = window.cell_of(p)?;
            if verdict_at(ci, cj, verdicts) != Verdict::Qf {
                return None;
            }
            Some(p)
        });
        refined.insert(edge, accepted);
        accepted
    };

    let mut kept: Vec<(EdgeId, EdgeId)> = Vec::new();
    for (a, b) in segments {
        let pa = resolve(a, &mut refined, &mut verdicts);
        let pb = resolve(b, &mut refined, &mut verdicts);
        if pa.is_some() && pb.is_some() && a != b {
            kept.push((a.min(b), a.max(b)));
        }
    }
    kept.sort();
    kept.dedup();

    // Stitch kept edges into polylines.
    let mut adjacency: HashMap<EdgeId, Vec<EdgeId>> = HashMap::new();
    for (a, b) in &kept {
        adjacency.entry(*a).or_default().push(*b);
        adjacency.entry(*b).or_default().push(*a);
    }
    let mut nodes: Vec<EdgeId> = adjacency.keys().copied().collect();
    nodes.sort();
    let mut visited: HashMap<EdgeId, bool> = nodes.iter().map(|n| (*n, false)).collect();
    let mut chains: Vec<Vec<EdgeId>> = Vec::new();
    // Open chains first (degree-1 starts), then leftover cycles.
    for pass in 0..2 {
        for start in &nodes {
            if visited[start] {
                continue;
            }
            let deg = adjacency[start].len();
            if pass == 0 && deg != 1 {
                continue;
            }
            let mut chain = vec![*start];
            visited.insert(*start, true);
            let mut cur = *start;
            loop {
                let mut next = None;
                let mut cands = adjacency[&cur].clone();
                cands.sort();
                for cand in cands {
                    if !visited[&cand] {
                        next = Some(cand);
                        break;
                    }
                }
                match next {
                    Some(n) => {
                        visited.insert(n, true);
                        chain.push(n);
                        cur = n;
                    }
                    None => break,
                }
            }
            chains.push(chain);
        }
    }

    let mut rays = Vec::new();
    for chain in chains {
        let points: Vec<Complex64> = chain
            .iter()
            .map(|e| refined[e].expect("kept edges are accepted"))
            .collect();
        if points.is_empty() {
            continue;
        }
        let side = if points[0].im > 0.0 { 1 } else { -1 };
        rays.push(RaySegment {
            slope: slope.to_string(),
            side,
            points,
        });
    }
    Ok(rays)
}

/// Bisect the exact `Im tr` along the straight segment between two lattice
/// points with opposite field signs.
fn refine_crossing(
    poly: &TracePoly,
    a: Complex64,
    fa: f64,
    b: Complex64,
    fb: f64,
) -> Option<Complex64> {
    if !(fa.is_finite() && fb.is_finite()) || (fa > 0.0) == (fb > 0.0) {
        return None;
    }
    let (mut lo, mut hi) = (a, b);
    let mut f_lo = fa;
    let mut best = 0.5 * (a + b);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        best = mid;
        let v = poly.eval(mid);
        if !v.is_finite() {
            return None;
        }
        if v.im.abs() <= 1e-6 * (1.0 + v.norm()) {
            return Some(mid);
        }
        if (v.im > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = v.im;
        } else {
            hi = mid;
        }
    }
    Some(best)
}

/// CSV rows `slope,side,segment,point,re,im` for a set of ray segments.
pub fn write_ray_csv<W: Write>(rays: &[RaySegment], out: &mut W) -> std::io::Result<()> {
    writeln!(out, "slope,side,segment,point,re,im")?;
    for (si, seg) in rays.iter().enumerate() {
        for (pi, p) in seg.points.iter().enumerate() {
            writeln!(out, "{},{},{},{},{},{}", seg.slope, seg.side, si, pi, p.re, p.im)?;
        }
    }
    Ok(())
}
