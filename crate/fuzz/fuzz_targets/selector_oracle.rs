#![no_main]

use std::collections::BTreeMap;

use dlim_core::{fip_oracle, select_common_point, FiniteMeasureSpace, IndexSet, MSet, Rational, SetFamily};
use libfuzzer_sys::arbitrary::{Result, Unstructured};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = run(data);
});

/// Random small family; the selector and the exhaustive oracle must agree.
fn run(data: &[u8]) -> Result<()> {
    let mut u = Unstructured::new(data);
    let points = u.int_in_range(1..=10usize)?;
    let mut weights = Vec::with_capacity(points);
    for _ in 0..points {
        weights.push(Rational::from_integer(u.int_in_range(0..=5i64)?));
    }
    let names = (1..=points).map(|i| format!("x{i}")).collect();
    let Ok(space) = FiniteMeasureSpace::new(names, weights) else { return Ok(()) };
    let m = u.int_in_range(1..=14u64)?;
    let mut sets = BTreeMap::new();
    for n in 1..=m {
        let mask: u16 = u.arbitrary()?;
        sets.insert(n, MSet::from_indices(points, (0..points).filter(|i| mask >> i & 1 == 1)));
    }
    let a = sets.values().map(|s| space.measure(s)).min().unwrap_or_else(Rational::zero);
    let index_set = IndexSet::finite((1..=m).collect()).unwrap();
    let fam = SetFamily::new(space, index_set, m, sets, a).expect("valid by construction");
    let positive: bool = u.arbitrary()?;
    let Ok(sel) = select_common_point(&fam, m, positive) else { return Ok(()) };
    let oracle = fip_oracle(&fam, m, positive).expect("within oracle limits");
    assert!(sel.cardinality_bound.verified);
    assert_eq!(oracle.max_size, sel.cardinality_bound.selected_size);
    Ok(())
}
