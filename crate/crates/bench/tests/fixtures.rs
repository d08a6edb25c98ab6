use lrcone_bench::chain_sector;

#[test]
fn chain_sector_dimensions() {
    let (basis, all) = chain_sector(12, 3, 3);
    assert_eq!(basis.dim(), 364);
    assert_eq!(all.len(), 12);
    let (capped, _) = chain_sector(6, 4, 2);
    // compositions of 4 into 6 parts of size at most 2
    assert_eq!(capped.dim(), 90);
}
