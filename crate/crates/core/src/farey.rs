//! Rational slopes, the Farey tessellation and special words.
//!
//! An essential simple closed curve on the once-punctured torus is a slope
//! `p/q ∈ ℚ ∪ {∞}`; infinity is written `1/0`.  Two slopes are Farey
//! neighbors when `|ps − qr| = 1`; triangles of mutual neighbors tile the
//! hyperbolic plane, and walking that tessellation (Stern-Brocot style)
//! drives both the trace recursion and the special-word construction.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::Error;

/// Numerator/denominator bound; mediant chains abort beyond this.
const SLOPE_LIMIT: i64 = 1 << 60;

/// A rational slope `p/q` in canonical form: `gcd(|p|, q) = 1`, `q ≥ 0`,
/// and `1/0` is the unique representative of infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slope {
    p: i64,
    q: i64,
}

impl Slope {
    pub const INFINITY: Slope = Slope { p: 1, q: 0 };
    pub const ZERO: Slope = Slope { p: 0, q: 1 };

    /// Canonicalize `p/q`; errors on `0/0` and past the `2^60` range.
    pub fn new(p: i64, q: i64) -> Result<Slope, Error> {
        if p == 0 && q == 0 {
            return Err(Error::ZeroSlope);
        }
        if q == 0 {
            return Ok(Slope::INFINITY);
        }
        let g = gcd(p.unsigned_abs(), q.unsigned_abs()) as i64;
        let (mut p, mut q) = (p / g, q / g);
        if q < 0 {
            p = -p;
            q = -q;
        }
        if p.abs() > SLOPE_LIMIT || q > SLOPE_LIMIT {
            return Err(Error::SlopeOverflow);
        }
        Ok(Slope { p, q })
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    pub fn is_infinity(&self) -> bool {
        self.q == 0
    }

    /// Mediant `(p+r)/(q+s)` of the canonical representatives.
    pub fn mediant(&self, other: &Slope) -> Result<Slope, Error> {
        Slope::new(self.p + other.p, self.q + other.q)
    }

    fn minus(&self, other: &Slope) -> Result<Slope, Error> {
        Slope::new(self.p - other.p, self.q - other.q)
    }

    /// Order as extended rationals; only meaningful for finite slopes.
    fn less_than(&self, other: &Slope) -> bool {
        (self.p as i128) * (other.q as i128) < (other.p as i128) * (self.q as i128)
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl FromStr for Slope {
    type Err = Error;

    /// Parse the `"p/q"` syntax used by the CLI, e.g. `"1/0"`, `"-3/7"`.
    fn from_str(s: &str) -> Result<Slope, Error> {
        let mut it = s.splitn(2, '/');
        let p = it
            .next()
            .and_then(|t| t.trim().parse::<i64>().ok())
            .ok_or(Error::ZeroSlope)?;
        let q = it
            .next()
            .and_then(|t| t.trim().parse::<i64>().ok())
            .ok_or(Error::ZeroSlope)?;
        Slope::new(p, q)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

/// True iff `|p_u q_v − q_u p_v| = 1`.
pub fn is_neighbor(u: &Slope, v: &Slope) -> bool {
    let d = (u.p as i128) * (v.q as i128) - (u.q as i128) * (v.p as i128);
    d == 1 || d == -1
}

/// A triangle of the Farey tessellation: three pairwise-neighbor slopes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FareyTriple {
    v: [Slope; 3],
}

impl FareyTriple {
    /// The base triangle `(0/1, 1/0, 1/1)`.
    pub fn base() -> FareyTriple {
        FareyTriple {
            v: [Slope::ZERO, Slope::INFINITY, Slope { p: 1, q: 1 }],
        }
    }

    pub fn new(v: [Slope; 3]) -> Result<FareyTriple, Error> {
        if is_neighbor(&v[0], &v[1]) && is_neighbor(&v[1], &v[2]) && is_neighbor(&v[0], &v[2]) {
            Ok(FareyTriple { v })
        } else {
            Err(Error::InvalidTriple)
        }
    }

    pub fn vertices(&self) -> [Slope; 3] {
        self.v
    }

    pub fn vertex(&self, k: usize) -> Slope {
        self.v[k]
    }

    pub fn contains(&self, s: &Slope) -> bool {
        self.v.iter().any(|t| t == s)
    }

    /// Index of the single vertex not shared with `other`, if the triples
    /// differ in exactly one vertex.
    pub fn replaced_vertex(&self, other: &FareyTriple) -> Option<usize> {
        let mut found = None;
        for (k, s) in self.v.iter().enumerate() {
            if !other.contains(s) {
                if found.is_some() {
                    return None;
                }
                found = Some(k);
            }
        }
        found
    }
}

/// Reflect the triangle across the edge opposite `vertex_index`: the named
/// vertex is replaced by the other mediant of the remaining pair.  Applying
/// the same flip twice returns the original triple.
pub fn flip(t: &FareyTriple, vertex_index: usize) -> Result<FareyTriple, Error> {
    let k = vertex_index % 3;
    let (i, j) = match k {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let plus = t.v[i].mediant(&t.v[j])?;
    let minus = t.v[i].minus(&t.v[j])?;
    let new = if plus == t.v[k] {
        minus
    } else if minus == t.v[k] {
        plus
    } else {
        return Err(Error::InvalidTriple);
    };
    let mut v = t.v;
    v[k] = new;
    Ok(FareyTriple { v })
}

/// One step of the bracket descent toward a finite slope.
struct Bracket {
    lo: Slope,
    hi: Slope,
}

/// Integer bracket `(n/1, (n+1)/1)` around a finite slope, `n = ⌊p/q⌋`.
fn integer_bracket(s: &Slope) -> (i64, Bracket) {
    let n = s.p.div_euclid(s.q);
    (
        n,
        Bracket {
            lo: Slope { p: n, q: 1 },
            hi: Slope { p: n + 1, q: 1 },
        },
    )
}

/// Flip path in the Farey tessellation from the base triangle to a
/// triangle with `s` as its mediant vertex: first the integer translation
/// chain, then one mediant refinement per continued-fraction step.
/// Consecutive triples always differ by a single [`flip`].
pub fn stern_brocot_path(s: &Slope) -> Result<Vec<FareyTriple>, Error> {
    if s.is_infinity() {
        return Err(Error::InfiniteSlope);
    }
    let mut path = vec![FareyTriple::base()];
    if s.q == 1 && (s.p == 0 || s.p == 1) {
        return Ok(path);
    }

    let (n, mut br) = integer_bracket(s);
    // Translation chain: (1/0, k/1, (k±1)/1) marching toward n.
    if n >= 1 {
        for k in 1..=n {
            let t = FareyTriple {
                v: [
                    Slope::INFINITY,
                    Slope { p: k, q: 1 },
                    Slope { p: k + 1, q: 1 },
                ],
            };
            path.push(t);
            if s.q == 1 && s.p == k + 1 {
                return Ok(path);
            }
            if s.q > 1 && k == n {
                break;
            }
        }
    } else if n <= -1 {
        path.push(FareyTriple {
            v: [Slope::ZERO, Slope::INFINITY, Slope { p: -1, q: 1 }],
        });
        if s.q == 1 && s.p == -1 {
            return Ok(path);
        }
        let last = if s.q == 1 { -s.p } else { -n };
        for k in 2..=last {
            path.push(FareyTriple {
                v: [
                    Slope::INFINITY,
                    Slope { p: -(k - 1), q: 1 },
                    Slope { p: -k, q: 1 },
                ],
            });
        }
        if s.q == 1 {
            return Ok(path);
        }
    }

    // Mediant refinement.
    loop {
        let med = br.lo.mediant(&br.hi)?;
        path.push(FareyTriple {
            v: [br.lo, br.hi, med],
        });
        if med == *s {
            return Ok(path);
        }
        if s.less_than(&med) {
            br.hi = med;
        } else {
            br.lo = med;
        }
    }
}

/// A generator letter of the free group on `a`, `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Letter {
    A,
    AInv,
    B,
    BInv,
}

impl Letter {
    pub fn inverse(&self) -> Letter {
        match self {
            Letter::A => Letter::AInv,
            Letter::AInv => Letter::A,
            Letter::B => Letter::BInv,
            Letter::BInv => Letter::B,
        }
    }
}

/// A freely reduced word in `a, a⁻¹, b, b⁻¹`.
///
/// Rendered with uppercase for inverses: `"aaB"` is `a·a·b⁻¹`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn empty() -> Word {
        Word::default()
    }

    /// Append one letter, cancelling against the current tail.
    pub fn push(&mut self, l: Letter) {
        if self.letters.last() == Some(&l.inverse()) {
            self.letters.pop();
        } else {
            self.letters.push(l);
        }
    }

    /// Concatenate and reduce.
    pub fn concat(&self, other: &Word) -> Word {
        let mut w = self.clone();
        for &l in &other.letters {
            w.push(l);
        }
        w
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::with_capacity(self.letters.len());
        for l in &self.letters {
            s.push(match l {
                Letter::A => 'a',
                Letter::AInv => 'A',
                Letter::B => 'b',
                Letter::BInv => 'B',
            });
        }
        f.write_str(&s)
    }
}

/// Word for an integer slope `n/1`: `n` copies of the `a`-generator
/// followed by `b`.  The sign of the `a`-run is fixed so that the word's
/// trace in the matrix model equals the `n/1` trace function; see
/// [`special_word`].
fn integer_word(n: i64) -> Word {
    let mut w = Word::empty();
    let letter = if n >= 0 { Letter::A } else { Letter::AInv };
    for _ in 0..n.unsigned_abs() {
        w.push(letter);
    }
    w.push(Letter::B);
    w
}

/// The special word representing the simple closed curve of slope `s`.
///
/// `1/0 ↦ a`; an integer slope `n/1 ↦ aⁿb`; and the mediant of Farey
/// neighbors `lo < hi` gets the concatenation `w(hi)·w(lo)`, walked along
/// the Stern-Brocot descent.  With the matrix model of [`crate::repr`]
/// this convention makes the word trace agree with the trace polynomial
/// of the same slope (the `a`-run sign is what fixes the agreement; the
/// concatenation order only changes the word within its conjugacy class).
pub fn special_word(s: &Slope) -> Word {
    if s.is_infinity() {
        let mut w = Word::empty();
        w.push(Letter::A);
        return w;
    }
    if s.q == 1 {
        return integer_word(s.p);
    }
    let (_, mut br) = integer_bracket(s);
    let mut w_lo = integer_word(br.lo.p);
    let mut w_hi = integer_word(br.hi.p);
    loop {
        // Neighbors guarantee the mediant stays reduced and in range, and
        // q grows strictly, so this terminates at s.
        let med = br.lo.mediant(&br.hi).expect("mediant of neighbors");
        let w_med = w_hi.concat(&w_lo);
        if med == *s {
            return w_med;
        }
        if s.less_than(&med) {
            br.hi = med;
            w_hi = w_med;
        } else {
            br.lo = med;
            w_lo = w_med;
        }
    }
}

/// Image of a slope under a mapping class, acting on the homology vector
/// `(p, q)` as a column vector; the result is re-canonicalized.
pub fn twist_slope(m: [[i64; 2]; 2], s: &Slope) -> Result<Slope, Error> {
    let det = (m[0][0] as i128) * (m[1][1] as i128) - (m[0][1] as i128) * (m[1][0] as i128);
    if det != 1 {
        return Err(Error::NotUnimodular);
    }
    let p = (m[0][0] as i128) * (s.p as i128) + (m[0][1] as i128) * (s.q as i128);
    let q = (m[1][0] as i128) * (s.p as i128) + (m[1][1] as i128) * (s.q as i128);
    if p.unsigned_abs() > SLOPE_LIMIT as u128 || q.unsigned_abs() > SLOPE_LIMIT as u128 {
        return Err(Error::SlopeOverflow);
    }
    Slope::new(p as i64, q as i64)
}

/// The right Dehn twist along `1/0` on homology.
pub const DEHN_TWIST_INF: [[i64; 2]; 2] = [[1, 1], [0, 1]];
/// The right Dehn twist along `0/1` on homology.
pub const DEHN_TWIST_ZERO: [[i64; 2]; 2] = [[1, 0], [-1, 1]];

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sl(p: i64, q: i64) -> Slope {
        Slope::new(p, q).unwrap()
    }

    #[test]
    fn canonical_form() {
        assert_eq!(sl(-3, 0), Slope::INFINITY);
        assert_eq!(sl(2, -4), sl(-1, 2));
        assert_eq!(sl(6, 4), sl(3, 2));
        assert_eq!(Slope::new(0, 0), Err(Error::ZeroSlope));
        assert!(Slope::new(1 << 61, 3).is_err());
    }

    #[test]
    fn parse_and_display() {
        assert_eq!("1/0".parse::<Slope>().unwrap(), Slope::INFINITY);
        assert_eq!("-3/7".parse::<Slope>().unwrap(), sl(-3, 7));
        assert_eq!(format!("{}", sl(-3, 7)), "-3/7");
        assert!("x/y".parse::<Slope>().is_err());
    }

    #[test]
    fn neighbor_examples() {
        assert!(is_neighbor(&Slope::INFINITY, &Slope::ZERO));
        assert!(is_neighbor(&sl(1, 2), &sl(1, 3)));
        assert!(!is_neighbor(&sl(1, 2), &sl(3, 4)));
    }

    #[test]
    fn flip_examples() {
        let base = FareyTriple::base();
        let t = flip(&base, 2).unwrap();
        assert_eq!(t.vertices(), [Slope::ZERO, Slope::INFINITY, sl(-1, 1)]);
        assert_eq!(flip(&t, 2).unwrap(), base);

        let t = FareyTriple::new([sl(0, 1), sl(1, 1), sl(1, 2)]).unwrap();
        let f = flip(&t, 0).unwrap();
        assert_eq!(f.vertices(), [sl(2, 3), sl(1, 1), sl(1, 2)]);
    }

    #[test]
    fn path_examples() {
        // 1/1 sits in the base triangle.
        let p = stern_brocot_path(&sl(1, 1)).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0], FareyTriple::base());

        // 2/5: four refinements 1/1 → 1/2 → 1/3 → 2/5.
        let p = stern_brocot_path(&sl(2, 5)).unwrap();
        assert_eq!(p.len(), 4);
        assert!(p.last().unwrap().contains(&sl(2, 5)));
        let meds: Vec<Slope> = p.iter().map(|t| t.vertex(2)).collect();
        assert_eq!(meds, vec![sl(1, 1), sl(1, 2), sl(1, 3), sl(2, 5)]);

        // Integer slopes need only the translation chain.
        let p = stern_brocot_path(&sl(3, 1)).unwrap();
        assert!(p.last().unwrap().contains(&sl(3, 1)));
        let p = stern_brocot_path(&sl(-2, 1)).unwrap();
        assert!(p.last().unwrap().contains(&sl(-2, 1)));

        assert_eq!(stern_brocot_path(&Slope::INFINITY), Err(Error::InfiniteSlope));
    }

    #[test]
    fn path_steps_are_flips() {
        for s in [sl(2, 5), sl(-3, 7), sl(5, 1), sl(-4, 1), sl(7, 3), sl(-13, 30)] {
            let p = stern_brocot_path(&s).unwrap();
            for w in p.windows(2) {
                let k = w[0].replaced_vertex(&w[1]).expect("one vertex replaced");
                assert_eq!(flip(&w[0], k).unwrap().vertices().len(), 3);
                // The new triple is the flip of the old at k up to vertex order.
                let f = flip(&w[0], k).unwrap();
                for v in f.vertices() {
                    assert!(w[1].contains(&v));
                }
            }
            // Final triple has s as a vertex and is a genuine Farey triangle.
            let last = p.last().unwrap();
            assert!(last.contains(&s));
            FareyTriple::new(last.vertices()).unwrap();
        }
    }

    #[test]
    fn special_word_examples() {
        assert_eq!(format!("{}", special_word(&Slope::INFINITY)), "a");
        assert_eq!(format!("{}", special_word(&sl(0, 1))), "b");
        assert_eq!(format!("{}", special_word(&sl(1, 2))), "abb");
        // Integer words are an a-run and one b; length checks out as
        // |p| + q in general.
        assert_eq!(special_word(&sl(2, 1)).len(), 3);
        for s in [sl(2, 5), sl(-3, 7), sl(4, 9)] {
            assert_eq!(special_word(&s).len() as i64, s.p().abs() + s.q());
        }
    }

    #[test]
    fn twist_examples() {
        assert_eq!(twist_slope(DEHN_TWIST_INF, &sl(0, 1)).unwrap(), sl(1, 1));
        assert_eq!(twist_slope(DEHN_TWIST_ZERO, &Slope::INFINITY).unwrap(), sl(-1, 1));
        let id = [[1, 0], [0, 1]];
        for s in [Slope::INFINITY, sl((-3), 7), sl(5, 2)] {
            assert_eq!(twist_slope(id, &s).unwrap(), s);
        }
        assert_eq!(twist_slope([[2, 0], [0, 1]], &sl(1, 1)), Err(Error::NotUnimodular));
    }

    proptest! {
        #[test]
        fn flips_preserve_neighbors(choices in proptest::collection::vec(0usize..3, 0..64)) {
            let mut t = FareyTriple::base();
            for k in choices {
                t = match flip(&t, k) {
                    Ok(next) => next,
                    Err(Error::SlopeOverflow) => break,
                    Err(e) => panic!("unexpected error {e}"),
                };
                prop_assert!(FareyTriple::new(t.vertices()).is_ok());
            }
        }

        #[test]
        fn path_terminates_and_contains(p in -200i64..200, q in 1i64..40) {
            let s = Slope::new(p, q).unwrap();
            let path = stern_brocot_path(&s).unwrap();
            prop_assert!(path.last().unwrap().contains(&s));
            prop_assert_eq!(path[0], FareyTriple::base());
        }
    }
}
