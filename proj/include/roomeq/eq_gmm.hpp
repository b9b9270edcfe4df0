#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "roomeq/rng.hpp"
#include "roomeq/spectral.hpp"

namespace roomeq {

inline constexpr int kEqDim = 7;  // free dimensions of a sub-band EQ vector

// Gaussian mixture over 7-dimensional sub-band EQ vectors (dB domain, full
// covariances). The 1000 Hz slot is constrained to zero and modeled outside
// the mixture.
class EqGmm {
public:
    EqGmm() = default;
    EqGmm(std::vector<double> weights, std::vector<Eigen::VectorXd> means,
          std::vector<Eigen::MatrixXd> covariances);

    int components() const { return static_cast<int>(weights_.size()); }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<Eigen::VectorXd>& means() const { return means_; }
    const std::vector<Eigen::MatrixXd>& covariances() const { return covariances_; }

    // Per-iteration training log-likelihood (averaged per sample); empty for
    // models that were loaded rather than fitted.
    const std::vector<double>& training_log_likelihood() const { return ll_trace_; }

    // Marginal mean / standard deviation per free dimension.
    Eigen::VectorXd marginal_mean() const;
    Eigen::VectorXd marginal_stddev() const;

    // Throws on any invariant violation (weight simplex, symmetry,
    // positive-definiteness).
    void validate() const;

private:
    std::vector<double> weights_;
    std::vector<Eigen::VectorXd> means_;
    std::vector<Eigen::MatrixXd> covariances_;
    std::vector<Eigen::MatrixXd> chol_;  // lower Cholesky factors
    std::vector<double> ll_trace_;

    void refresh_cholesky();

    friend EqGmm fit_gmm(const std::vector<SubBandEq>&, int, std::uint64_t);
    friend SubBandEq sample_eq(const EqGmm&, Rng&);
    friend double log_likelihood(const EqGmm&, const SubBandEq&);
};

// Expectation-maximization with seeded k-means++ initialization (10 restarts,
// best final log-likelihood). Deterministic for a given (data multiset, k,
// seed); the data is canonically ordered internally, so permutations of the
// input produce bit-identical models.
EqGmm fit_gmm(const std::vector<SubBandEq>& eqs, int k, std::uint64_t seed);

// Draws one sub-band EQ: component by weight, then multivariate normal via
// the Cholesky factor; the 1000 Hz entry is re-inserted as 0.
SubBandEq sample_eq(const EqGmm& model, Rng& rng);

// Log mixture density at the free 7-dim vector (log-sum-exp).
double log_likelihood(const EqGmm& model, const SubBandEq& eq);

void save_model(const EqGmm& model, const std::string& path);
EqGmm load_model(const std::string& path);

}  // namespace roomeq
