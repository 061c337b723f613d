//! Data-parallel iteration with a sequential fallback.
//!
//! With the `parallel` feature (the default) this re-exports rayon's
//! prelude. Without it, the same method names resolve to thin wrappers over
//! the standard iterators, so call sites compile unchanged either way.

#[cfg(feature = "parallel")]
pub(crate) use rayon::prelude::*;

#[cfg(not(feature = "parallel"))]
mod sequential {
    pub(crate) trait IntoParallelIterator: IntoIterator + Sized {
        fn into_par_iter(self) -> Self::IntoIter {
            self.into_iter()
        }
    }

    impl<T: IntoIterator + Sized> IntoParallelIterator for T {}

    pub(crate) trait ParallelSlice<T> {
        fn par_iter(&self) -> std::slice::Iter<'_, T>;
    }

    impl<T> ParallelSlice<T> for [T] {
        fn par_iter(&self) -> std::slice::Iter<'_, T> {
            self.iter()
        }
    }
}

#[cfg(not(feature = "parallel"))]
pub(crate) use sequential::{IntoParallelIterator, ParallelSlice};
