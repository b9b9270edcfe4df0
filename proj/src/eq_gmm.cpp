#include "roomeq/eq_gmm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "roomeq/common.hpp"

namespace roomeq {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kRegularization = 1e-6;
constexpr int kMaxIterations = 200;
constexpr double kConvergenceTol = 1e-6;  // average log-likelihood gain
constexpr int kRestarts = 10;

double log_gaussian(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                    const Eigen::MatrixXd& chol_lower) {
    const int d = static_cast<int>(x.size());
    const Eigen::VectorXd z =
        chol_lower.triangularView<Eigen::Lower>().solve(x - mean);
    double log_det = 0.0;
    for (int i = 0; i < d; ++i) log_det += std::log(chol_lower(i, i));
    return -0.5 * (d * kLog2Pi + z.squaredNorm()) - log_det;
}

struct EmResult {
    std::vector<double> weights;
    std::vector<Eigen::VectorXd> means;
    std::vector<Eigen::MatrixXd> covs;
    std::vector<double> ll_trace;
    double final_ll = -std::numeric_limits<double>::infinity();
};

// k-means++ seeding over the canonical data order.
std::vector<Eigen::VectorXd> kmeanspp_centers(const std::vector<Eigen::VectorXd>& data,
                                              int k, Rng& rng) {
    const std::size_t n = data.size();
    std::vector<Eigen::VectorXd> centers;
    centers.reserve(k);
    centers.push_back(data[rng.below(n)]);
    std::vector<double> d2(n);
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& ctr : centers) {
                best = std::min(best, (data[i] - ctr).squaredNorm());
            }
            d2[i] = best;
            total += best;
        }
        if (total <= 0.0) {
            centers.push_back(data[rng.below(n)]);
            continue;
        }
        double r = rng.uniform() * total;
        std::size_t pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            r -= d2[i];
            if (r <= 0.0) {
                pick = i;
                break;
            }
        }
        centers.push_back(data[pick]);
    }
    return centers;
}

EmResult run_em(const std::vector<Eigen::VectorXd>& data, int k, Rng& rng) {
    const std::size_t n = data.size();
    const int d = static_cast<int>(data[0].size());

    EmResult r;
    r.means = kmeanspp_centers(data, k, rng);
    r.weights.assign(k, 1.0 / k);

    Eigen::VectorXd global_mean = Eigen::VectorXd::Zero(d);
    for (const auto& x : data) global_mean += x;
    global_mean /= static_cast<double>(n);
    Eigen::MatrixXd global_cov = Eigen::MatrixXd::Zero(d, d);
    for (const auto& x : data) {
        const Eigen::VectorXd c = x - global_mean;
        global_cov += c * c.transpose();
    }
    global_cov /= static_cast<double>(n);
    global_cov += kRegularization * Eigen::MatrixXd::Identity(d, d);
    r.covs.assign(k, global_cov);

    std::vector<Eigen::MatrixXd> chol(k);
    Eigen::MatrixXd resp(n, k);  // responsibilities
    double prev_avg_ll = -std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < kMaxIterations; ++iter) {
        for (int c = 0; c < k; ++c) {
            Eigen::LLT<Eigen::MatrixXd> llt(r.covs[c]);
            if (llt.info() != Eigen::Success) {
                throw Error("fit_gmm: singular covariance during EM");
            }
            chol[c] = llt.matrixL();
        }

        // E-step in the log domain.
        double total_ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double max_lp = -std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double lp =
                    std::log(std::max(r.weights[c], 1e-300)) +
                    log_gaussian(data[i], r.means[c], chol[c]);
                resp(i, c) = lp;
                max_lp = std::max(max_lp, lp);
            }
            double sum = 0.0;
            for (int c = 0; c < k; ++c) sum += std::exp(resp(i, c) - max_lp);
            const double log_norm = max_lp + std::log(sum);
            for (int c = 0; c < k; ++c) resp(i, c) = std::exp(resp(i, c) - log_norm);
            total_ll += log_norm;
        }
        const double avg_ll = total_ll / static_cast<double>(n);
        r.ll_trace.push_back(avg_ll);
        r.final_ll = avg_ll;
        if (avg_ll - prev_avg_ll < kConvergenceTol && iter > 0) break;
        prev_avg_ll = avg_ll;

        // M-step with diagonal regularization.
        for (int c = 0; c < k; ++c) {
            double nk = 0.0;
            for (std::size_t i = 0; i < n; ++i) nk += resp(i, c);
            nk = std::max(nk, 1e-12);
            Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
            for (std::size_t i = 0; i < n; ++i) mean += resp(i, c) * data[i];
            mean /= nk;
            Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
            for (std::size_t i = 0; i < n; ++i) {
                const Eigen::VectorXd cd = data[i] - mean;
                cov += resp(i, c) * (cd * cd.transpose());
            }
            cov /= nk;
            cov += kRegularization * Eigen::MatrixXd::Identity(d, d);
            r.weights[c] = nk / static_cast<double>(n);
            r.means[c] = mean;
            r.covs[c] = 0.5 * (cov + cov.transpose());
        }
        double wsum = 0.0;
        for (double w : r.weights) wsum += w;
        for (double& w : r.weights) w /= wsum;
    }
    return r;
}

bool lexicographic_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    for (int i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) return a[i] < b[i];
    }
    return false;
}

}  // namespace

EqGmm::EqGmm(std::vector<double> weights, std::vector<Eigen::VectorXd> means,
             std::vector<Eigen::MatrixXd> covariances)
    : weights_(std::move(weights)),
      means_(std::move(means)),
      covariances_(std::move(covariances)) {
    validate();
    refresh_cholesky();
}

void EqGmm::refresh_cholesky() {
    chol_.clear();
    chol_.reserve(covariances_.size());
    for (const auto& cov : covariances_) {
        Eigen::LLT<Eigen::MatrixXd> llt(cov);
        if (llt.info() != Eigen::Success) {
            throw Error("EqGmm: covariance is not positive-definite");
        }
        chol_.push_back(llt.matrixL());
    }
}

void EqGmm::validate() const {
    const auto k = weights_.size();
    if (k == 0 || means_.size() != k || covariances_.size() != k) {
        throw Error("EqGmm: inconsistent component counts");
    }
    double wsum = 0.0;
    for (double w : weights_) {
        if (w < 0.0) throw Error("EqGmm: negative weight");
        wsum += w;
    }
    if (std::abs(wsum - 1.0) > 1e-9) {
        throw Error("EqGmm: weights sum to " + std::to_string(wsum) + ", expected 1");
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (means_[c].size() != kEqDim || covariances_[c].rows() != kEqDim ||
            covariances_[c].cols() != kEqDim) {
            throw Error("EqGmm: wrong dimension, expected " + std::to_string(kEqDim));
        }
        const Eigen::MatrixXd& cov = covariances_[c];
        if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
            throw Error("EqGmm: covariance not symmetric");
        }
        Eigen::LLT<Eigen::MatrixXd> llt(cov);
        if (llt.info() != Eigen::Success) {
            throw Error("EqGmm: covariance is not positive-definite");
        }
    }
}

Eigen::VectorXd EqGmm::marginal_mean() const {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(kEqDim);
    for (std::size_t c = 0; c < weights_.size(); ++c) m += weights_[c] * means_[c];
    return m;
}

Eigen::VectorXd EqGmm::marginal_stddev() const {
    const Eigen::VectorXd m = marginal_mean();
    Eigen::VectorXd var = Eigen::VectorXd::Zero(kEqDim);
    for (std::size_t c = 0; c < weights_.size(); ++c) {
        const Eigen::VectorXd dm = means_[c] - m;
        var += weights_[c] *
               (covariances_[c].diagonal() + dm.cwiseProduct(dm));
    }
    return var.cwiseSqrt();
}

EqGmm fit_gmm(const std::vector<SubBandEq>& eqs, int k, std::uint64_t seed) {
    if (k <= 0) throw Error("fit_gmm: k must be positive");
    if (eqs.size() < static_cast<std::size_t>(10 * k)) {
        throw Error("fit_gmm: need at least " + std::to_string(10 * k) +
                    " samples for k=" + std::to_string(k) + ", got " +
                    std::to_string(eqs.size()));
    }

    std::vector<Eigen::VectorXd> data;
    data.reserve(eqs.size());
    for (const auto& eq : eqs) {
        const auto fv = eq.free_vector();
        Eigen::VectorXd v(kEqDim);
        for (int i = 0; i < kEqDim; ++i) {
            if (!std::isfinite(fv[i])) throw Error("fit_gmm: non-finite EQ value");
            v[i] = fv[i];
        }
        data.push_back(std::move(v));
    }
    // Canonical order: the fit depends on the multiset only.
    std::sort(data.begin(), data.end(), lexicographic_less);

    double total_var = 0.0;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(kEqDim);
    for (const auto& x : data) mean += x;
    mean /= static_cast<double>(data.size());
    for (const auto& x : data) total_var += (x - mean).squaredNorm();
    total_var /= static_cast<double>(data.size());
    if (total_var < 1e-15) {
        throw Error("fit_gmm: degenerate data (all points identical), covariance "
                    "singular even after regularization");
    }

    EmResult best;
    for (int restart = 0; restart < kRestarts; ++restart) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(restart)));
        EmResult r = run_em(data, k, rng);
        if (r.final_ll > best.final_ll) best = std::move(r);
    }

    EqGmm model(std::move(best.weights), std::move(best.means), std::move(best.covs));
    model.ll_trace_ = std::move(best.ll_trace);
    return model;
}

SubBandEq sample_eq(const EqGmm& model, Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t pick = model.weights_.size() - 1;
    for (std::size_t c = 0; c < model.weights_.size(); ++c) {
        acc += model.weights_[c];
        if (u < acc) {
            pick = c;
            break;
        }
    }
    Eigen::VectorXd z(kEqDim);
    for (int i = 0; i < kEqDim; ++i) z[i] = rng.normal();
    const Eigen::VectorXd x = model.means_[pick] + model.chol_[pick] * z;

    std::array<double, 7> fv{};
    for (int i = 0; i < kEqDim; ++i) fv[i] = x[i];
    return SubBandEq::from_free_vector(fv);
}

double log_likelihood(const EqGmm& model, const SubBandEq& eq) {
    const auto fv = eq.free_vector();
    Eigen::VectorXd x(kEqDim);
    for (int i = 0; i < kEqDim; ++i) x[i] = fv[i];

    double max_lp = -std::numeric_limits<double>::infinity();
    std::vector<double> lps(model.weights_.size());
    for (std::size_t c = 0; c < model.weights_.size(); ++c) {
        lps[c] = std::log(std::max(model.weights_[c], 1e-300)) +
                 log_gaussian(x, model.means_[c], model.chol_[c]);
        max_lp = std::max(max_lp, lps[c]);
    }
    double sum = 0.0;
    for (double lp : lps) sum += std::exp(lp - max_lp);
    return max_lp + std::log(sum);
}

void save_model(const EqGmm& model, const std::string& path) {
    nlohmann::json j;
    j["format_version"] = 1;
    j["k"] = model.components();
    j["dim"] = kEqDim;
    j["frequencies_hz"] = kSubBandFreqsHz;
    j["reference_hz"] = kSubBandFreqsHz[kReferenceBand];
    j["weights"] = model.weights();
    auto means = nlohmann::json::array();
    for (const auto& m : model.means()) {
        std::vector<double> v(m.data(), m.data() + m.size());
        means.push_back(v);
    }
    j["means"] = means;
    auto covs = nlohmann::json::array();
    for (const auto& c : model.covariances()) {
        auto rows = nlohmann::json::array();
        for (int r = 0; r < c.rows(); ++r) {
            std::vector<double> row(c.cols());
            for (int col = 0; col < c.cols(); ++col) row[col] = c(r, col);
            rows.push_back(row);
        }
        covs.push_back(rows);
    }
    j["covariances"] = covs;
    j["metadata"] = {{"gain_domain", "dB"},
                     {"note", "gains referenced to 1000 Hz; free dims exclude the reference"}};

    std::ofstream f(path);
    if (!f) throw Error("save_model: cannot open for writing: " + path);
    f << j.dump(2) << "\n";
    if (!f) throw Error("save_model: write failed: " + path);
}

EqGmm load_model(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("load_model: cannot open: " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error("load_model: malformed model file " + path + ": " + e.what());
    }
    try {
        const int k = j.at("k").get<int>();
        const int dim = j.at("dim").get<int>();
        if (dim != kEqDim) {
            throw Error("load_model: unsupported dim " + std::to_string(dim));
        }
        auto weights = j.at("weights").get<std::vector<double>>();
        if (static_cast<int>(weights.size()) != k) {
            throw Error("load_model: weight count does not match k");
        }
        std::vector<Eigen::VectorXd> means;
        for (const auto& row : j.at("means")) {
            auto v = row.get<std::vector<double>>();
            if (static_cast<int>(v.size()) != kEqDim) {
                throw Error("load_model: bad mean dimension");
            }
            means.push_back(Eigen::Map<Eigen::VectorXd>(v.data(), kEqDim));
        }
        std::vector<Eigen::MatrixXd> covs;
        for (const auto& rows : j.at("covariances")) {
            Eigen::MatrixXd c(kEqDim, kEqDim);
            int r = 0;
            for (const auto& row : rows) {
                auto v = row.get<std::vector<double>>();
                if (static_cast<int>(v.size()) != kEqDim || r >= kEqDim) {
                    throw Error("load_model: bad covariance shape");
                }
                for (int col = 0; col < kEqDim; ++col) c(r, col) = v[col];
                ++r;
            }
            if (r != kEqDim) throw Error("load_model: bad covariance shape");
            covs.push_back(c);
        }
        return EqGmm(std::move(weights), std::move(means), std::move(covs));
    } catch (const nlohmann::json::exception& e) {
        throw Error("load_model: malformed model file " + path + ": " + e.what());
    }
}

}  // namespace roomeq
