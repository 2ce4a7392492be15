//! Quasi-Fuchsian classification through Bowditch's conditions.
//!
//! The trace field of a point `(λ, τ)` is carried around the tree of Farey
//! triangles by the vertex flip `z ↦ xy − z`, which preserves the Markov
//! identity exactly.  A point fails the conditions when some slope's trace
//! falls into the real interval `[−2, 2]`; it satisfies them when the
//! breadth-first search over the tree exhausts every explorable edge
//! without such a witness.  An edge whose two region traces both exceed
//! the cutoff (slightly above 2) in modulus is never crossed: beyond it
//! traces grow monotonically, so nothing on the far side can violate the
//! conditions.  Exceeding the node budget is a first-class `Unknown`
//! verdict, not a guess.

use alloc::collections::VecDeque;

use num_complex::Complex64;

use crate::farey::{flip, FareyTriple, Slope};
use crate::mobius::{classify, IsomClass};
use crate::repr::{psi_fn, FNPoint};
use crate::Error;

/// A Farey triangle together with the traces at its three vertices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovState {
    pub triple: FareyTriple,
    pub traces: [Complex64; 3],
}

/// Tuning knobs for the Bowditch search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BqParams {
    /// An edge is crossed only if some endpoint trace has modulus at most
    /// this.  Soundness of the pruning argument needs `≥ 2`; the default
    /// adds an epsilon against borderline rounding.
    pub explore_cutoff: f64,
    /// Number of expanded states after which the search gives up.
    pub node_cap: usize,
    /// Relative half-width of the near-real band used for witnesses.
    pub real_band_eps: f64,
    /// Trace magnitude treated as numerically meaningless.
    pub saturation: f64,
}

impl Default for BqParams {
    fn default() -> Self {
        BqParams {
            explore_cutoff: 2.0 + 1e-6,
            node_cap: 20_000,
            real_band_eps: 1e-7,
            saturation: 1e150,
        }
    }
}

/// Why a point fails the conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NotQfReason {
    /// A slope trace sits at a parabolic value `±2`: a cusp group, on the
    /// boundary rather than the interior of the slice.
    RealInterval,
    /// A slope trace is real strictly inside `(−2, 2)`.
    EllipticTrace,
}

/// Why the search returned no verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnknownReason {
    ExhaustedNodes,
}

/// Outcome of the Bowditch search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BqVerdict {
    Qf,
    NotQf {
        witness: Slope,
        reason: NotQfReason,
    },
    Unknown {
        reason: UnknownReason,
    },
}

impl BqVerdict {
    pub fn is_qf(&self) -> bool {
        matches!(self, BqVerdict::Qf)
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, BqVerdict::Unknown { .. })
    }
}

/// The base triangle `(1/0, 0/1, 1/1)` carrying the `ψ_FN` traces.
pub fn initial_state(pt: &FNPoint) -> Result<MarkovState, Error> {
    crate::repr::check_nondegenerate(pt.lambda)?;
    let th = (pt.lambda / 2.0).tanh();
    if !th.is_finite() || th.norm() < 1e-12 {
        return Err(Error::DegenerateLength);
    }
    let ch = psi_fn(pt);
    // Base triple order (0/1, 1/0, 1/1) matches FareyTriple::base(); the
    // trace of 1/0 is x, of 0/1 is y, of 1/1 is z.
    Ok(MarkovState {
        triple: FareyTriple::base(),
        traces: [ch.y, ch.x, ch.z],
    })
}

/// Flip one vertex: the slope reflects across the opposite edge and its
/// trace obeys `t ↦ t_i·t_j − t`.
pub fn flip_state(s: &MarkovState, vertex_index: usize) -> Result<MarkovState, Error> {
    let k = vertex_index % 3;
    let (i, j) = other_two(k);
    let triple = flip(&s.triple, k)?;
    let mut traces = s.traces;
    traces[k] = s.traces[i] * s.traces[j] - s.traces[k];
    Ok(MarkovState { triple, traces })
}

fn other_two(k: usize) -> (usize, usize) {
    match k {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

fn max_trace_norm(s: &MarkovState) -> f64 {
    s.traces[0]
        .norm()
        .max(s.traces[1].norm())
        .max(s.traces[2].norm())
}

/// Greedily flip whichever vertex most decreases the largest trace
/// modulus, until no flip strictly decreases it (a sink) or the step
/// budget runs out.
pub fn descend_to_sink(s: &MarkovState, max_steps: usize) -> Result<MarkovState, Error> {
    let mut cur = *s;
    for _ in 0..max_steps {
        let cur_max = max_trace_norm(&cur);
        if !cur_max.is_finite() {
            return Ok(cur);
        }
        let mut best: Option<(usize, f64)> = None;
        for k in 0..3 {
            let (i, j) = other_two(k);
            let cand = cur.traces[i] * cur.traces[j] - cur.traces[k];
            let cand_max = cand
                .norm()
                .max(cur.traces[i].norm())
                .max(cur.traces[j].norm());
            if cand_max < cur_max {
                let better = match best {
                    None => true,
                    Some((_, m)) => cand_max < m,
                };
                if better {
                    best = Some((k, cand_max));
                }
            }
        }
        match best {
            Some((k, _)) => cur = flip_state(&cur, k)?,
            None => return Ok(cur),
        }
    }
    Ok(cur)
}

/// Near-real band test on one trace; `None` means no violation.
fn band_violation(t: Complex64, params: &BqParams) -> Option<NotQfReason> {
    if !t.is_finite() {
        return None;
    }
    let eps = params.real_band_eps * (1.0 + t.norm());
    match classify(t, eps) {
        IsomClass::Elliptic => Some(NotQfReason::EllipticTrace),
        IsomClass::Parabolic => Some(NotQfReason::RealInterval),
        _ => None,
    }
}

/// Decide the Bowditch conditions for `(λ, τ)`.
///
/// The search flows downhill to a sink first, tests all three sink
/// vertices, then walks breadth-first outward; each newly created vertex
/// is tested once.  Crossing order is fixed by vertex index, so the
/// verdict is deterministic for given parameters.  When the frontier
/// empties the point is declared quasi-Fuchsian, provided the cutoff was
/// large enough (`≥ 2`) for the pruning argument to certify the unexplored
/// branches; with a smaller cutoff an empty frontier proves nothing and
/// the verdict stays `Unknown`.
pub fn bq_test(pt: &FNPoint, params: &BqParams) -> BqVerdict {
    let exhausted = BqVerdict::Unknown {
        reason: UnknownReason::ExhaustedNodes,
    };
    let init = match initial_state(pt) {
        Ok(s) => s,
        Err(_) => return exhausted,
    };
    let sink = match descend_to_sink(&init, params.node_cap) {
        Ok(s) => s,
        Err(_) => return exhausted,
    };
    for k in 0..3 {
        if let Some(reason) = band_violation(sink.traces[k], params) {
            return BqVerdict::NotQf {
                witness: sink.triple.vertex(k),
                reason,
            };
        }
    }

    let certifiable = params.explore_cutoff >= 2.0;
    // (state, incoming vertex index); 3 means "no incoming edge".
    let mut frontier: VecDeque<(MarkovState, usize)> = VecDeque::new();
    frontier.push_back((sink, 3));
    let mut expanded = 0usize;
    while let Some((state, banned)) = frontier.pop_front() {
        expanded += 1;
        if expanded > params.node_cap {
            return exhausted;
        }
        for k in 0..3 {
            if k == banned {
                continue;
            }
            let (i, j) = other_two(k);
            let (ti, tj) = (state.traces[i].norm(), state.traces[j].norm());
            if !(ti.min(tj) <= params.explore_cutoff) {
                continue;
            }
            if ti.max(tj) >= params.saturation {
                continue;
            }
            let child = match flip_state(&state, k) {
                Ok(c) => c,
                Err(_) => return exhausted,
            };
            if let Some(reason) = band_violation(child.traces[k], params) {
                return BqVerdict::NotQf {
                    witness: child.triple.vertex(k),
                    reason,
                };
            }
            frontier.push_back((child, k));
        }
    }
    if certifiable {
        BqVerdict::Qf
    } else {
        exhausted
    }
}
