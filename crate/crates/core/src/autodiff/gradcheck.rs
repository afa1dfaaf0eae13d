//! Central finite-difference verification of analytic gradients.

use std::collections::BTreeMap;

use super::ParamStore;

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub checked: usize,
    pub failures: usize,
    /// Largest relative error among entries above the absolute floor.
    pub max_rel_err: f64,
    /// Parameter name, flat index, analytic value, numeric value.
    pub worst: Option<(String, usize, f64, f64)>,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Compares the analytic gradient returned by `f` at `store` with central
/// differences of step `h` on every scalar parameter. An entry passes when
/// the absolute difference is within `abs_floor` or within `rel_tol` of the
/// larger magnitude.
pub fn check_gradients<F>(store: &ParamStore, f: F, h: f64, rel_tol: f64, abs_floor: f64) -> GradCheckReport
where
    F: Fn(&ParamStore) -> (f64, BTreeMap<String, Vec<f64>>),
{
    let (_, analytic) = f(store);
    let mut work = store.clone();
    let mut report = GradCheckReport { checked: 0, failures: 0, max_rel_err: 0.0, worst: None };
    let names: Vec<String> = store.iter().map(|(n, _)| n.clone()).collect();
    for name in names {
        let len = store.get(&name).unwrap().data.len();
        for k in 0..len {
            let orig = store.get(&name).unwrap().data[k];
            work.get_mut(&name).unwrap().data[k] = orig + h;
            let up = f(&work).0;
            work.get_mut(&name).unwrap().data[k] = orig - h;
            let down = f(&work).0;
            work.get_mut(&name).unwrap().data[k] = orig;
            let numeric = (up - down) / (2.0 * h);
            let a = analytic.get(&name).map_or(0.0, |g| g[k]);
            let diff = (a - numeric).abs();
            report.checked += 1;
            if diff <= abs_floor {
                continue;
            }
            let rel = diff / a.abs().max(numeric.abs());
            if rel > report.max_rel_err {
                report.max_rel_err = rel;
                report.worst = Some((name.clone(), k, a, numeric));
            }
            if rel > rel_tol {
                report.failures += 1;
            }
        }
    }
    report
}
