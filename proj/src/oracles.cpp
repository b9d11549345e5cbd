#include "um/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "um/math_util.hpp"
#include "um/niw.hpp"
#include "um/rng.hpp"
#include "um/uncertain_model.hpp"

namespace um {

namespace {

int sample_from_weights(const std::vector<double>& w, RngStream& rng) {
  double total = 0.0;
  for (const double x : w) total += x;
  double u = rng.uniform01() * total;
  for (std::size_t k = 0; k + 1 < w.size(); ++k) {
    u -= w[k];
    if (u < 0.0) return static_cast<int>(k);
  }
  return static_cast<int>(w.size()) - 1;
}

Eigen::VectorXd random_point(int d, double shift, double scale, RngStream& rng) {
  Eigen::VectorXd x(d);
  for (int j = 0; j < d; ++j) x[j] = shift + scale * rng.normal();
  return x;
}

}  // namespace

OracleOutcome oracle_multinomial(int instances, std::uint64_t seed) {
  OracleOutcome out;
  out.instances = instances;
  out.tolerance = 1e-8;
  for (int inst = 0; inst < instances; ++inst) {
    RngStream rng(split_seed(seed, static_cast<std::uint64_t>(inst)));
    const int K = static_cast<int>(rng.uniform_int(2, 8));
    Eigen::VectorXd evidence = Eigen::VectorXd::Zero(K);
    for (int k = 0; k < K; ++k) evidence[k] = static_cast<double>(rng.uniform_int(0, 6));

    std::vector<double> pi(K);
    for (int k = 0; k < K; ++k) pi[k] = 0.2 + rng.uniform01();

    UncertainModel model = UncertainModel::multinomial(evidence);
    Eigen::VectorXd obs_counts = Eigen::VectorXd::Zero(K);
    const std::int64_t t_max = rng.uniform_int(1, 200);
    double recursive = 0.0;
    for (std::int64_t t = 0; t < t_max; ++t) {
      const int k = sample_from_weights(pi, rng);
      recursive += model.update(k);
      obs_counts[k] += 1.0;
    }
    const double batch = batch_log_ulr(evidence, obs_counts);
    out.max_abs_delta = std::max(out.max_abs_delta, std::abs(recursive - batch));
    out.max_abs_delta = std::max(out.max_abs_delta, std::abs(model.log_ulr() - batch));
  }
  out.pass = out.max_abs_delta <= out.tolerance;
  return out;
}

OracleOutcome oracle_gaussian(int instances, std::uint64_t seed) {
  OracleOutcome out;
  out.instances = instances;
  out.tolerance = 1e-8;
  for (int inst = 0; inst < instances; ++inst) {
    RngStream rng(split_seed(seed ^ 0x9A55u, static_cast<std::uint64_t>(inst)));
    const int d = static_cast<int>(rng.uniform_int(1, 3));
    const std::int64_t n_r = rng.uniform_int(0, 50);
    const double ev_shift = 2.0 * (rng.uniform01() - 0.5);
    const double ev_scale = 0.5 + rng.uniform01();
    std::vector<Eigen::VectorXd> evidence;
    for (std::int64_t s = 0; s < n_r; ++s) {
      evidence.push_back(random_point(d, ev_shift, ev_scale, rng));
    }

    const double obs_shift = 2.0 * (rng.uniform01() - 0.5);
    const double obs_scale = 0.5 + rng.uniform01();
    const std::int64_t t_max = rng.uniform_int(1, 200);
    UncertainModel model = UncertainModel::gaussian(d, evidence);
    std::vector<Eigen::VectorXd> observations;
    double recursive = 0.0;
    for (std::int64_t t = 0; t < t_max; ++t) {
      observations.push_back(random_point(d, obs_shift, obs_scale, rng));
      recursive += model.update(observations.back());
    }
    const double batch = batch_log_ulr(d, evidence, observations);
    out.max_abs_delta = std::max(out.max_abs_delta, std::abs(recursive - batch));
    out.max_abs_delta = std::max(out.max_abs_delta, std::abs(model.log_ulr() - batch));
  }
  out.pass = out.max_abs_delta <= out.tolerance;
  return out;
}

OracleOutcome oracle_quadrature(int instances, std::uint64_t seed) {
  using boost::math::quadrature::gauss_kronrod;
  OracleOutcome out;
  out.instances = instances;
  out.tolerance = 1e-6;
  for (int inst = 0; inst < instances; ++inst) {
    RngStream rng(split_seed(seed ^ 0x0D4Du, static_cast<std::uint64_t>(inst)));
    const std::int64_t n_r = rng.uniform_int(0, 10);
    const double shift = 2.0 * (rng.uniform01() - 0.5);
    const double scale = 0.5 + rng.uniform01();
    std::vector<Eigen::VectorXd> evidence;
    for (std::int64_t s = 0; s < n_r; ++s) evidence.push_back(random_point(1, shift, scale, rng));
    const NiwParams state = niw_absorb_batch(vacuous_niw(1), evidence);

    Eigen::VectorXd omega(1);
    omega[0] = 6.0 * (rng.uniform01() - 0.5);

    const double closed = student_t_logpdf(posterior_predictive(state), omega);

    // Integrate likelihood x posterior over mean and log-variance; the
    // change of variable u = log(sigma^2) makes both ranges doubly infinite
    // and adds a Jacobian factor e^u.
    const auto inner = [&](double u) {
      const double var = std::exp(u);
      // the quadrature nodes reach u where exp under/overflows; the
      // integrand has already decayed to zero there
      if (var <= 0.0 || !std::isfinite(var)) return 0.0;
      Eigen::MatrixXd Sigma(1, 1);
      Sigma(0, 0) = var;
      const auto over_mean = [&](double mu) {
        Eigen::VectorXd m(1);
        m[0] = mu;
        const double log_like =
            -0.5 * (std::log(2.0 * std::numbers::pi * var) +
                    (omega[0] - mu) * (omega[0] - mu) / var);
        return std::exp(log_like + niw_logpdf(state, m, Sigma) + u);
      };
      return gauss_kronrod<double, 61>::integrate(
          over_mean, -std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity(), 12, 1e-12);
    };
    const double integral = gauss_kronrod<double, 61>::integrate(
        inner, -std::numeric_limits<double>::infinity(),
        std::numeric_limits<double>::infinity(), 12, 1e-12);

    out.max_abs_delta = std::max(out.max_abs_delta, std::abs(std::log(integral) - closed));
  }
  out.pass = out.max_abs_delta <= out.tolerance;
  return out;
}

}  // namespace um
