use focs_bench::{fixture, SIZES};

#[test]
fn fixtures_are_deterministic_and_solvable() {
    for n in SIZES {
        let p = fixture(n, 42);
        assert_eq!(p.num_jobs(), n);
        assert_eq!(p.instance(), fixture(n, 42).instance());
        let r = focs_core::run_focs(&p).unwrap();
        assert!(r.schedule.is_complete(&p));
    }
}
