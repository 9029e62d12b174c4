//! Requirements that the implementation meets only partially. Each test
//! states the requirement in full and fails when run with `--ignored`.

use skl_lab::dist::DistributionSpec;
use skl_lab::ratelab::dyadic;
use skl_lab::stein::coupling_delta_second_moment;

/// Every link of the coupling chain, including
/// `2 sum (E xi^4/3 + (E xi^2)^2) <= (4/3) sum E xi^4`, for the skewed mixture.
/// That link is equivalent to kurtosis >= 3 and the mixture's is 2.88.
#[test]
#[ignore = "the second chain link needs kurtosis >= 3"]
fn coupling_chain_every_link_for_the_mixture() {
    let m = DistributionSpec::skewed_mixture();
    for n in dyadic(4, 512) {
        let r = coupling_delta_second_moment(&[m.clone()], n, 1.0).unwrap();
        assert!(r.min_slack() >= -1e-12, "n = {n}: link slack {:e}", r.min_slack());
    }
}
