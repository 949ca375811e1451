//! State spaces a simulated walker can move on without materializing them.
//!
//! A [`Graph`] is the finite case. [`IntegerLine`] and [`Comb`] let the
//! collision experiments run on combs whose explicit vertex set would be far
//! too large to store.

use std::fmt::Debug;

use super::{Graph, Vertex};

/// One-step law of a simple random walk: from `s`, move to
/// `neighbor(s, k)` with `k` uniform in `0..degree(s)`.
pub trait WalkSpace: Sync {
    type State: Copy + Eq + Debug + Send + Sync;

    fn degree(&self, s: Self::State) -> usize;

    fn neighbor(&self, s: Self::State, k: usize) -> Self::State;
}

impl WalkSpace for Graph {
    type State = Vertex;

    #[inline]
    fn degree(&self, s: Vertex) -> usize {
        Graph::degree(self, s)
    }

    #[inline]
    fn neighbor(&self, s: Vertex, k: usize) -> Vertex {
        self.neighbors(s)[k]
    }
}

/// The integer line, unbounded.
#[derive(Clone, Copy, Debug, Default)]
pub struct IntegerLine;

impl WalkSpace for IntegerLine {
    type State = i64;

    #[inline]
    fn degree(&self, _: i64) -> usize {
        2
    }

    #[inline]
    fn neighbor(&self, s: i64, k: usize) -> i64 {
        if k == 0 {
            s - 1
        } else {
            s + 1
        }
    }
}

/// Implicit comb product: a copy of `tooth` hangs off every base vertex,
/// glued at `anchor`. State is `(base coordinate, tooth coordinate)`.
///
/// At an anchored state the first `deg_tooth(anchor)` moves stay in the
/// tooth and the rest move along the base; elsewhere only tooth moves exist.
#[derive(Clone, Copy, Debug)]
pub struct Comb<'a, B: WalkSpace, T: WalkSpace> {
    pub base: &'a B,
    pub tooth: &'a T,
    pub anchor: T::State,
}

impl<'a, B: WalkSpace, T: WalkSpace> Comb<'a, B, T> {
    pub fn new(base: &'a B, tooth: &'a T, anchor: T::State) -> Self {
        Self { base, tooth, anchor }
    }

    /// True when the move `k` from `s` changes the base coordinate.
    #[inline]
    pub fn is_base_move(&self, s: (B::State, T::State), k: usize) -> bool {
        s.1 == self.anchor && k >= self.tooth.degree(s.1)
    }
}

impl<B: WalkSpace, T: WalkSpace> WalkSpace for Comb<'_, B, T>
where
    B::State: Sync,
    T::State: Sync,
{
    type State = (B::State, T::State);

    #[inline]
    fn degree(&self, (x, w): Self::State) -> usize {
        if w == self.anchor {
            self.tooth.degree(w) + self.base.degree(x)
        } else {
            self.tooth.degree(w)
        }
    }

    #[inline]
    fn neighbor(&self, (x, w): Self::State, k: usize) -> Self::State {
        let dt = self.tooth.degree(w);
        if k < dt {
            (x, self.tooth.neighbor(w, k))
        } else {
            (self.base.neighbor(x, k - dt), w)
        }
    }
}
