//! Enumeration oracle split over first moves and run in parallel.

use erw_core::oracle::{Enumerator, PathView, DEFAULT_BUDGET};
use erw_core::stats::CompensatedSum;
use erw_core::walk::WalkParams;
use rayon::prelude::*;

use crate::error::LabResult;

/// `E[f]` with one subtree per first move; partial sums are added in move
/// order, so the value does not depend on scheduling.
pub fn parallel_expectation<F>(params: &WalkParams, n: usize, f: F) -> LabResult<f64>
where
    F: Fn(&PathView<'_>) -> f64 + Sync,
{
    let root = Enumerator::new(*params, n, DEFAULT_BUDGET)?;
    if n == 0 {
        let mut sum = CompensatedSum::new();
        root.for_each(|path, p| {
            sum.add(p * f(path));
            Ok(())
        })?;
        return Ok(sum.value());
    }
    let parts = (0..params.moves())
        .into_par_iter()
        .map(|mv| {
            let mut sum = CompensatedSum::new();
            root.clone().with_first_move(mv).for_each(|path, p| {
                sum.add(p * f(path));
                Ok(())
            })?;
            Ok(sum)
        })
        .collect::<erw_core::Result<Vec<_>>>()?;
    let mut total = CompensatedSum::new();
    for part in &parts {
        total.merge(part);
    }
    Ok(total.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use erw_core::oracle::exact_expectation;

    #[test]
    fn agrees_with_sequential_enumeration() {
        let p = WalkParams::erw(3, 2, 0.4).unwrap();
        let seq = exact_expectation(&p, 6, |v| v.novel_count() as f64).unwrap();
        let par = parallel_expectation(&p, 6, |v| v.novel_count() as f64).unwrap();
        assert!((seq - par).abs() < 1e-13);
        assert_eq!(parallel_expectation(&p, 0, |_| 2.0).unwrap(), 2.0);
    }
}
