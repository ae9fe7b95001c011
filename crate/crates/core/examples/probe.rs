use quadeq::certificates::{search, SearchBudget, SearchOutcome};
use quadeq::reduction::{to_equation, BinPackingInstance};
use std::time::{Duration, Instant};

fn main() {
    // Profile n-level costs on the hard UNSAT case via max_n caps.
    let inst = BinPackingInstance::new(vec![3, 3, 3, 3], 4, 2, true).unwrap();
    let sf = to_equation(&inst);
    for cap in 1..=9 {
        let t = Instant::now();
        let budget = SearchBudget {
            deadline: Some(Instant::now() + Duration::from_secs(60)),
            max_n: Some(cap),
        };
        let out = search(&sf, &budget);
        println!("max_n={cap}: {:?} in {:?}", matches!(out, SearchOutcome::Unknown), t.elapsed());
        if t.elapsed() > Duration::from_secs(50) { break; }
    }
}
