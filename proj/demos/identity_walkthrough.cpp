// Two arms, identity features: fit the posterior to a small logged dataset,
// compute the BRMOB policy and compare its Monte-Carlo regret with the
// baselines and with the analytic bound.

#include <cstdio>

#include "brmob/brmob.hpp"

int main() {
    using namespace brmob;
    const BanditDomain domain = build_domain({DomainKind::IdentityZeroMean, 2, 2, 0, 1.0});

    const GaussianPosterior prior(domain.prior_mean, domain.prior_cov);
    BrmobConfig cfg;
    cfg.tighten_iterations = 0;
    const BrmobResult at_prior = brmob::brmob(domain, prior, cfg);
    std::printf("prior: pi = (%.4f, %.4f), rho = %.5f\n", at_prior.policy[0], at_prior.policy[1], at_prior.bound);

    Vector theta(2);
    theta << 0.3, -0.2;
    const LoggedDataset data = simulate_logged_data(domain, theta, Policy::uniform(2), 40, 7);
    const GaussianPosterior post = posterior_update(domain, data);
    const CoverageEstimate coverage = coverage_gamma(domain, data);
    std::printf("posterior mean = (%.4f, %.4f), gamma = %.3f\n", post.mean()(0), post.mean()(1), coverage.gamma);

    cfg.tighten_iterations = 3;
    const BrmobResult r = brmob::brmob(domain, post, cfg);
    std::printf("brmob: pi = (%.4f, %.4f), rho = %.5f, best step %zu\n", r.policy[0], r.policy[1], r.bound,
                r.best_step);

    const struct {
        const char* name;
        Policy pi;
    } candidates[] = {{"brmob", r.policy}, {"greedy", greedy(domain, post)}, {"flatopo", flatopo(domain, post, 0.1)}};
    for (const auto& c : candidates) {
        const RegretEstimate e = estimate_regret(domain, post, c.pi, 0.1, 200000, 11);
        std::printf("%-8s VaR_0.9 regret %.5f +- %.5f\n", c.name, e.var_estimate, e.mc_std_error);
    }
    std::printf("theorem bound at this coverage: %.5f\n", theorem4_bound(domain, coverage, 0.1, 2, 2));
    return 0;
}
