#include "um/ground_truth.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "um/math_util.hpp"
#include "um/serialize.hpp"

namespace um {

namespace {

void check_gaussian(const GaussianSpec& g) {
  const Eigen::Index d = g.mean.size();
  if (d == 0) throw std::invalid_argument("gaussian spec: empty mean");
  if (g.cov.rows() != d || g.cov.cols() != d) {
    throw std::invalid_argument("gaussian spec: covariance shape mismatch");
  }
  if (!g.cov.isApprox(g.cov.transpose(), 1e-12)) {
    throw std::invalid_argument("gaussian spec: covariance not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(g.cov);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("gaussian spec: covariance not positive definite");
  }
}

}  // namespace

int dimension_of(const DistributionSpec& spec) {
  return std::visit(
      [](const auto& s) -> int {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GaussianSpec>) {
          return static_cast<int>(s.mean.size());
        } else if constexpr (std::is_same_v<T, MixtureSpec>) {
          return s.components.empty() ? 0 : static_cast<int>(s.components[0].mean.size());
        } else {
          return 1;
        }
      },
      spec);
}

void validate_spec(const DistributionSpec& spec) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GaussianSpec>) {
          check_gaussian(s);
        } else if constexpr (std::is_same_v<T, MixtureSpec>) {
          if (s.components.empty()) {
            throw std::invalid_argument("mixture spec: no components");
          }
          const Eigen::Index d = s.components[0].mean.size();
          double total = 0.0;
          for (const auto& c : s.components) {
            if (c.weight <= 0.0) {
              throw std::invalid_argument("mixture spec: weights must be positive");
            }
            if (c.mean.size() != d) {
              throw std::invalid_argument("mixture spec: component dimension mismatch");
            }
            check_gaussian(GaussianSpec{c.mean, c.cov});
            total += c.weight;
          }
          if (std::abs(total - 1.0) > 1e-12) {
            throw std::invalid_argument("mixture spec: weights must sum to 1");
          }
        } else {
          if (s.pi.size() == 0) {
            throw std::invalid_argument("multinomial spec: empty pi");
          }
          if (s.pi.minCoeff() < 0.0) {
            throw std::invalid_argument("multinomial spec: negative probability");
          }
          if (std::abs(s.pi.sum() - 1.0) > 1e-12) {
            throw std::invalid_argument("multinomial spec: probabilities must sum to 1");
          }
        }
      },
      spec);
}

Sampler::Sampler(const DistributionSpec& spec) {
  validate_spec(spec);
  if (const auto* g = std::get_if<GaussianSpec>(&spec)) {
    comps_.push_back({1.0, g->mean, symmetric_sqrt(g->cov)});
    dim_ = static_cast<int>(g->mean.size());
  } else if (const auto* m = std::get_if<MixtureSpec>(&spec)) {
    mixture_ = true;
    double cum = 0.0;
    for (const auto& c : m->components) {
      cum += c.weight;
      comps_.push_back({cum, c.mean, symmetric_sqrt(c.cov)});
    }
    comps_.back().cum_weight = 1.0;  // guard against rounding in the last bin
    dim_ = static_cast<int>(m->components[0].mean.size());
  } else {
    const auto& pi = std::get<MultinomialSpec>(spec).pi;
    pi_cum_.resize(pi.size());
    double cum = 0.0;
    for (Eigen::Index k = 0; k < pi.size(); ++k) {
      cum += pi[k];
      pi_cum_[k] = cum;
    }
    pi_cum_[pi.size() - 1] = 1.0;
    dim_ = 1;
  }
}

bool Sampler::is_categorical() const { return pi_cum_.size() > 0; }

Eigen::VectorXd Sampler::sample_point(RngStream& rng) const {
  if (is_categorical()) {
    throw std::logic_error("Sampler: sample_point on a categorical spec");
  }
  std::size_t c = 0;
  if (mixture_) {
    const double u = rng.uniform01();
    while (c + 1 < comps_.size() && u >= comps_[c].cum_weight) ++c;
  }
  Eigen::VectorXd z(dim_);
  for (int i = 0; i < dim_; ++i) z[i] = rng.normal();
  return comps_[c].mean + comps_[c].sqrt_cov * z;
}

int Sampler::sample_category(RngStream& rng) const {
  if (!is_categorical()) {
    throw std::logic_error("Sampler: sample_category on a continuous spec");
  }
  const double u = rng.uniform01();
  int k = 0;
  while (k + 1 < pi_cum_.size() && u >= pi_cum_[k]) ++k;
  return k;
}

double spec_logpdf(const DistributionSpec& spec, const Eigen::VectorXd& x) {
  if (const auto* g = std::get_if<GaussianSpec>(&spec)) {
    return gaussian_logpdf(x, g->mean, g->cov);
  }
  if (const auto* m = std::get_if<MixtureSpec>(&spec)) {
    Eigen::VectorXd terms(static_cast<Eigen::Index>(m->components.size()));
    for (std::size_t c = 0; c < m->components.size(); ++c) {
      const auto& comp = m->components[c];
      terms[static_cast<Eigen::Index>(c)] =
          std::log(comp.weight) + gaussian_logpdf(x, comp.mean, comp.cov);
    }
    return log_sum_exp(terms);
  }
  throw std::invalid_argument("spec_logpdf: categorical spec has no density");
}

double spec_logpmf(const MultinomialSpec& spec, int k) {
  if (k < 0 || k >= spec.pi.size()) {
    throw std::invalid_argument("spec_logpmf: outcome out of range");
  }
  return std::log(spec.pi[k]);
}

GaussianSpec moment_match_gaussian(const DistributionSpec& spec) {
  if (const auto* g = std::get_if<GaussianSpec>(&spec)) {
    return *g;
  }
  const auto* m = std::get_if<MixtureSpec>(&spec);
  if (m == nullptr) {
    throw std::invalid_argument("moment_match_gaussian: categorical spec");
  }
  validate_spec(spec);
  const Eigen::Index d = m->components[0].mean.size();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (const auto& c : m->components) mean += c.weight * c.mean;
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(d, d);
  for (const auto& c : m->components) {
    second += c.weight * (c.cov + c.mean * c.mean.transpose());
  }
  Eigen::MatrixXd cov = second - mean * mean.transpose();
  cov = 0.5 * (cov + cov.transpose());
  return {mean, cov};
}

double kl_gaussian(const GaussianSpec& p, const GaussianSpec& q) {
  check_gaussian(p);
  check_gaussian(q);
  const Eigen::Index d = p.mean.size();
  if (q.mean.size() != d) {
    throw std::invalid_argument("kl_gaussian: dimension mismatch");
  }
  Eigen::LLT<Eigen::MatrixXd> lq(q.cov);
  const Eigen::MatrixXd qi_p = lq.solve(p.cov);
  const Eigen::VectorXd delta = q.mean - p.mean;
  const double maha = delta.dot(lq.solve(delta));
  const double log_det_p =
      2.0 * Eigen::LLT<Eigen::MatrixXd>(p.cov).matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double log_det_q = 2.0 * lq.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return 0.5 * (qi_p.trace() - d + maha + log_det_q - log_det_p);
}

double kl_multinomial(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  if (p.size() != q.size()) {
    throw std::invalid_argument("kl_multinomial: size mismatch");
  }
  double acc = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    if (p[k] == 0.0) continue;
    if (q[k] == 0.0) return std::numeric_limits<double>::infinity();
    acc += p[k] * std::log(p[k] / q[k]);
  }
  return acc;
}

KlEstimate kl_monte_carlo(const DistributionSpec& p, const DistributionSpec& q,
                          std::int64_t n, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("kl_monte_carlo: need at least 2 samples");
  Sampler sp(p);
  RngStream rng(seed);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const Eigen::VectorXd x = sp.sample_point(rng);
    const double term = spec_logpdf(p, x) - spec_logpdf(q, x);
    sum += term;
    sum_sq += term * term;
  }
  const double mean = sum / static_cast<double>(n);
  const double var = (sum_sq - static_cast<double>(n) * mean * mean) / static_cast<double>(n - 1);
  return {mean, std::sqrt(std::max(var, 0.0) / static_cast<double>(n)), n};
}

KlEstimate kl_between(const DistributionSpec& p, const DistributionSpec& q,
                      std::int64_t mc_samples, std::uint64_t seed) {
  const auto* pm = std::get_if<MultinomialSpec>(&p);
  const auto* qm = std::get_if<MultinomialSpec>(&q);
  if (pm != nullptr && qm != nullptr) {
    return {kl_multinomial(pm->pi, qm->pi), 0.0, 0};
  }
  if (pm != nullptr || qm != nullptr) {
    throw std::invalid_argument("kl_between: cannot mix categorical and continuous specs");
  }
  const auto* pg = std::get_if<GaussianSpec>(&p);
  const auto* qg = std::get_if<GaussianSpec>(&q);
  if (pg != nullptr && qg != nullptr) {
    return {kl_gaussian(*pg, *qg), 0.0, 0};
  }
  return kl_monte_carlo(p, q, mc_samples, seed);
}

void to_json(nlohmann::json& j, const DistributionSpec& spec) {
  if (const auto* g = std::get_if<GaussianSpec>(&spec)) {
    j = {{"type", "gaussian"}, {"mean", vector_to_json(g->mean)}, {"cov", matrix_to_json(g->cov)}};
  } else if (const auto* m = std::get_if<MixtureSpec>(&spec)) {
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& c : m->components) {
      comps.push_back({{"weight", c.weight},
                       {"mean", vector_to_json(c.mean)},
                       {"cov", matrix_to_json(c.cov)}});
    }
    j = {{"type", "mixture"}, {"components", std::move(comps)}};
  } else {
    j = {{"type", "multinomial"},
         {"pi", vector_to_json(std::get<MultinomialSpec>(spec).pi)}};
  }
}

void from_json(const nlohmann::json& j, DistributionSpec& spec) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "gaussian") {
    spec = GaussianSpec{vector_from_json(j.at("mean")), matrix_from_json(j.at("cov"))};
  } else if (type == "mixture") {
    MixtureSpec m;
    for (const auto& c : j.at("components")) {
      m.components.push_back({c.at("weight").get<double>(), vector_from_json(c.at("mean")),
                              matrix_from_json(c.at("cov"))});
    }
    spec = std::move(m);
  } else if (type == "multinomial") {
    spec = MultinomialSpec{vector_from_json(j.at("pi"))};
  } else {
    throw std::invalid_argument("distribution spec: unknown type '" + type + "'");
  }
  validate_spec(spec);
}

}  // namespace um
