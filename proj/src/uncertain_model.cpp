#include "um/uncertain_model.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "um/errors.hpp"
#include "um/math_util.hpp"
#include "um/serialize.hpp"

namespace um {

UncertainModel UncertainModel::multinomial(const Eigen::VectorXd& evidence_counts) {
  if (evidence_counts.size() < 2) {
    throw std::invalid_argument("UncertainModel: need at least 2 outcomes");
  }
  return multinomial(evidence_counts, vacuous_dirichlet(static_cast<int>(evidence_counts.size())));
}

UncertainModel UncertainModel::multinomial(const Eigen::VectorXd& evidence_counts,
                                           const DirichletParams& prior) {
  if (evidence_counts.size() != prior.psi.size()) {
    throw std::invalid_argument("UncertainModel: evidence/prior length mismatch");
  }
  if (prior.psi.size() < 2 || prior.psi.minCoeff() <= 0.0) {
    throw std::invalid_argument("UncertainModel: prior must be a valid Dirichlet state");
  }
  UncertainModel m;
  m.family_ = Family::multinomial;
  m.ignorance_dir_ = prior;
  m.theta_dir_ = dirichlet_absorb(prior, evidence_counts);
  m.evidence_count_ = static_cast<std::int64_t>(std::llround(evidence_counts.sum()));
  return m;
}

UncertainModel UncertainModel::gaussian(int d, const std::vector<Eigen::VectorXd>& evidence) {
  return gaussian(vacuous_niw(d), evidence);
}

UncertainModel UncertainModel::gaussian(const NiwParams& prior,
                                        const std::vector<Eigen::VectorXd>& evidence) {
  UncertainModel m;
  m.family_ = Family::gaussian;
  m.ignorance_niw_ = prior;
  m.theta_niw_ = niw_absorb_batch(prior, evidence);
  m.evidence_count_ = static_cast<std::int64_t>(evidence.size());
  return m;
}

UncertainModel UncertainModel::gaussian_from_stats(int d, std::int64_t n,
                                                   const Eigen::VectorXd& sum,
                                                   const Eigen::MatrixXd& scatter) {
  return gaussian_from_stats(vacuous_niw(d), n, sum, scatter);
}

UncertainModel UncertainModel::gaussian_from_stats(const NiwParams& prior, std::int64_t n,
                                                   const Eigen::VectorXd& sum,
                                                   const Eigen::MatrixXd& scatter) {
  UncertainModel m;
  m.family_ = Family::gaussian;
  m.ignorance_niw_ = prior;
  m.theta_niw_ = niw_absorb_stats(prior, static_cast<double>(n), sum, scatter);
  m.evidence_count_ = n;
  return m;
}

UncertainModel UncertainModel::certain(const LikelihoodParams& params) {
  if (const auto* pi = std::get_if<MultinomialSpec>(&params)) {
    return certain(params, vacuous_dirichlet(static_cast<int>(pi->pi.size())));
  }
  const auto& g = std::get<GaussianSpec>(params);
  return certain(params, vacuous_niw(static_cast<int>(g.mean.size())));
}

UncertainModel UncertainModel::certain(const LikelihoodParams& params,
                                       const DirichletParams& ignorance_prior) {
  const auto* pi = std::get_if<MultinomialSpec>(&params);
  if (pi == nullptr || pi->pi.size() != ignorance_prior.psi.size()) {
    throw std::invalid_argument("certain: Dirichlet prior requires matching multinomial params");
  }
  validate_spec(*pi);
  UncertainModel m;
  m.certain_ = params;
  m.family_ = Family::multinomial;
  m.ignorance_dir_ = ignorance_prior;
  return m;
}

UncertainModel UncertainModel::certain(const LikelihoodParams& params,
                                       const NiwParams& ignorance_prior) {
  const auto* g = std::get_if<GaussianSpec>(&params);
  if (g == nullptr || g->mean.size() != ignorance_prior.dim()) {
    throw std::invalid_argument("certain: NIW prior requires matching gaussian params");
  }
  validate_spec(*g);
  UncertainModel m;
  m.certain_ = params;
  m.family_ = Family::gaussian;
  m.ignorance_niw_ = ignorance_prior;
  return m;
}

std::int64_t UncertainModel::evidence_count() const {
  if (is_certain()) {
    throw std::logic_error("evidence_count: certain model has no finite evidence count");
  }
  return evidence_count_;
}

double UncertainModel::update(int k) {
  if (family_ != Family::multinomial) {
    throw std::logic_error("update(int): model is not multinomial");
  }
  double log_ell;
  if (certain_) {
    const auto& pi = std::get<MultinomialSpec>(*certain_).pi;
    if (k < 0 || k >= pi.size()) {
      throw std::invalid_argument("update: outcome out of range");
    }
    if (pi[k] == 0.0) {
      throw SupportViolationError(
          "certain model assigns zero mass to an observed outcome");
    }
    log_ell = std::log(pi[k]) - dirichlet_predictive_log(ignorance_dir_, k);
  } else {
    log_ell = dirichlet_predictive_log(theta_dir_, k) -
              dirichlet_predictive_log(ignorance_dir_, k);
    theta_dir_.psi[k] += 1.0;
  }
  ignorance_dir_.psi[k] += 1.0;
  log_ulr_ += log_ell;
  return log_ell;
}

double UncertainModel::update(const Eigen::VectorXd& x) {
  if (family_ != Family::gaussian) {
    throw std::logic_error("update(vector): model is not gaussian");
  }
  const double denom = student_t_logpdf(posterior_predictive(ignorance_niw_), x);
  double log_ell;
  if (certain_) {
    const auto& g = std::get<GaussianSpec>(*certain_);
    log_ell = gaussian_logpdf(x, g.mean, g.cov) - denom;
  } else {
    log_ell = student_t_logpdf(posterior_predictive(theta_niw_), x) - denom;
    theta_niw_ = niw_absorb_one(theta_niw_, x);
  }
  ignorance_niw_ = niw_absorb_one(ignorance_niw_, x);
  log_ulr_ += log_ell;
  return log_ell;
}

const DirichletParams& UncertainModel::theta_dirichlet() const {
  if (family_ != Family::multinomial || certain_) {
    throw std::logic_error("theta_dirichlet: not an uncertain multinomial model");
  }
  return theta_dir_;
}

const DirichletParams& UncertainModel::ignorance_dirichlet() const {
  if (family_ != Family::multinomial) {
    throw std::logic_error("ignorance_dirichlet: model is not multinomial");
  }
  return ignorance_dir_;
}

const NiwParams& UncertainModel::theta_niw() const {
  if (family_ != Family::gaussian || certain_) {
    throw std::logic_error("theta_niw: not an uncertain gaussian model");
  }
  return theta_niw_;
}

const NiwParams& UncertainModel::ignorance_niw() const {
  if (family_ != Family::gaussian) {
    throw std::logic_error("ignorance_niw: model is not gaussian");
  }
  return ignorance_niw_;
}

const LikelihoodParams& UncertainModel::certain_params() const {
  if (!certain_) {
    throw std::logic_error("certain_params: model has finite evidence");
  }
  return *certain_;
}

double batch_log_ulr(const Eigen::VectorXd& evidence_counts, const Eigen::VectorXd& obs_counts) {
  if (evidence_counts.size() != obs_counts.size()) {
    throw std::invalid_argument("batch_log_ulr: count vector length mismatch");
  }
  return batch_log_ulr(vacuous_dirichlet(static_cast<int>(evidence_counts.size())),
                       evidence_counts, obs_counts);
}

double batch_log_ulr(const DirichletParams& prior, const Eigen::VectorXd& evidence_counts,
                     const Eigen::VectorXd& obs_counts) {
  if (evidence_counts.size() != obs_counts.size() || evidence_counts.size() != prior.psi.size()) {
    throw std::invalid_argument("batch_log_ulr: count vector length mismatch");
  }
  return log_multi_beta(prior.psi + evidence_counts + obs_counts) + log_multi_beta(prior.psi) -
         log_multi_beta(prior.psi + obs_counts) - log_multi_beta(prior.psi + evidence_counts);
}

double batch_log_ulr(int d, const std::vector<Eigen::VectorXd>& evidence,
                     const std::vector<Eigen::VectorXd>& observations) {
  return batch_log_ulr(vacuous_niw(d), evidence, observations);
}

double batch_log_ulr(const NiwParams& prior, const std::vector<Eigen::VectorXd>& evidence,
                     const std::vector<Eigen::VectorXd>& observations) {
  NiwParams with_evidence = niw_absorb_batch(prior, evidence);
  NiwParams with_obs = niw_absorb_batch(prior, observations);
  NiwParams with_both = niw_absorb_batch(with_evidence, observations);
  return niw_log_normalizer(with_both) + niw_log_normalizer(prior) -
         niw_log_normalizer(with_obs) - niw_log_normalizer(with_evidence);
}

double asymptotic_log_ulr(const Eigen::VectorXd& evidence_counts, const Eigen::VectorXd& pi_star) {
  return asymptotic_log_ulr(evidence_counts, pi_star,
                            vacuous_dirichlet(static_cast<int>(pi_star.size())));
}

double asymptotic_log_ulr(const Eigen::VectorXd& evidence_counts, const Eigen::VectorXd& pi_star,
                          const DirichletParams& prior) {
  if (evidence_counts.size() != pi_star.size() || prior.psi.size() != pi_star.size()) {
    throw std::invalid_argument("asymptotic_log_ulr: dimension mismatch");
  }
  if (pi_star.minCoeff() <= 0.0) {
    throw std::invalid_argument("asymptotic_log_ulr: truth on the simplex boundary");
  }
  if (std::abs(pi_star.sum() - 1.0) > 1e-9) {
    throw std::invalid_argument("asymptotic_log_ulr: truth must sum to 1");
  }
  const DirichletParams with_evidence = dirichlet_absorb(prior, evidence_counts);
  return dirichlet_logpdf(with_evidence, pi_star) - dirichlet_logpdf(prior, pi_star);
}

double asymptotic_log_ulr(const NiwParams& evidence_state, const GaussianSpec& phi_star) {
  return asymptotic_log_ulr(evidence_state, phi_star, vacuous_niw(evidence_state.dim()));
}

double asymptotic_log_ulr(const NiwParams& evidence_state, const GaussianSpec& phi_star,
                          const NiwParams& prior) {
  validate_spec(phi_star);
  if (prior.dim() != evidence_state.dim()) {
    throw std::invalid_argument("asymptotic_log_ulr: prior dimension mismatch");
  }
  return niw_logpdf(evidence_state, phi_star.mean, phi_star.cov) -
         niw_logpdf(prior, phi_star.mean, phi_star.cov);
}

namespace {

nlohmann::json dirichlet_state_json(const DirichletParams& p) {
  return {{"psi", vector_to_json(p.psi)}};
}

nlohmann::json niw_state_json(const NiwParams& p) {
  return {{"varpi", vector_to_json(p.varpi)},
          {"kappa", p.kappa},
          {"nu", p.nu},
          {"S", matrix_to_json(p.S)}};
}

DirichletParams dirichlet_state_from_json(const nlohmann::json& j) {
  return {vector_from_json(j.at("psi"))};
}

NiwParams niw_state_from_json(const nlohmann::json& j) {
  return {vector_from_json(j.at("varpi")), j.at("kappa").get<double>(),
          j.at("nu").get<double>(), matrix_from_json(j.at("S"))};
}

}  // namespace

void to_json(nlohmann::json& j, const UncertainModel& m) {
  j["family"] = m.family_ == Family::multinomial ? "multinomial" : "gaussian";
  j["log_ulr"] = m.log_ulr_;
  if (m.certain_) {
    j["evidence_count"] = "CERTAIN";
    if (const auto* pi = std::get_if<MultinomialSpec>(&*m.certain_)) {
      j["certain_params"] = {{"pi", vector_to_json(pi->pi)}};
    } else {
      const auto& g = std::get<GaussianSpec>(*m.certain_);
      j["certain_params"] = {{"mean", vector_to_json(g.mean)}, {"cov", matrix_to_json(g.cov)}};
    }
  } else {
    j["evidence_count"] = m.evidence_count_;
    j["theta"] = m.family_ == Family::multinomial ? dirichlet_state_json(m.theta_dir_)
                                                  : niw_state_json(m.theta_niw_);
  }
  j["ignorance"] = m.family_ == Family::multinomial ? dirichlet_state_json(m.ignorance_dir_)
                                                    : niw_state_json(m.ignorance_niw_);
}

void from_json(const nlohmann::json& j, UncertainModel& m) {
  const std::string family = j.at("family").get<std::string>();
  if (family == "multinomial") {
    m.family_ = Family::multinomial;
  } else if (family == "gaussian") {
    m.family_ = Family::gaussian;
  } else {
    throw std::invalid_argument("uncertain model: unknown family '" + family + "'");
  }
  m.log_ulr_ = j.at("log_ulr").get<double>();
  m.certain_.reset();
  const auto& count = j.at("evidence_count");
  if (count.is_string()) {
    if (count.get<std::string>() != "CERTAIN") {
      throw std::invalid_argument("uncertain model: bad evidence_count marker");
    }
    const auto& cp = j.at("certain_params");
    if (m.family_ == Family::multinomial) {
      m.certain_ = MultinomialSpec{vector_from_json(cp.at("pi"))};
    } else {
      m.certain_ = GaussianSpec{vector_from_json(cp.at("mean")), matrix_from_json(cp.at("cov"))};
    }
    m.evidence_count_ = 0;
  } else {
    m.evidence_count_ = count.get<std::int64_t>();
    if (m.evidence_count_ < 0) {
      throw std::invalid_argument("uncertain model: negative evidence_count");
    }
    if (m.family_ == Family::multinomial) {
      m.theta_dir_ = dirichlet_state_from_json(j.at("theta"));
    } else {
      m.theta_niw_ = niw_state_from_json(j.at("theta"));
    }
  }
  if (m.family_ == Family::multinomial) {
    m.ignorance_dir_ = dirichlet_state_from_json(j.at("ignorance"));
  } else {
    m.ignorance_niw_ = niw_state_from_json(j.at("ignorance"));
  }
}

}  // namespace um
