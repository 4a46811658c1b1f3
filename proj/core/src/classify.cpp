#include "persona/classify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "persona/error.hpp"

namespace persona {

namespace {

// Reciprocal condition estimate below which a covariance is treated as
// singular. Measured on the unit-diagonal rescaling so features in very
// different units do not look singular.
constexpr double kMinRcond = 1e-13;

bool well_conditioned(const Eigen::MatrixXd& cov) {
  const Eigen::ArrayXd diag = cov.diagonal().array();
  if (!(diag > 0.0).all()) return false;
  const Eigen::VectorXd inv_sd = diag.rsqrt().matrix();
  const Eigen::MatrixXd corr = inv_sd.asDiagonal() * cov * inv_sd.asDiagonal();
  const Eigen::LLT<Eigen::MatrixXd> llt(corr);
  return llt.info() == Eigen::Success && llt.rcond() > kMinRcond;
}

Eigen::MatrixXd regularize(const Eigen::MatrixXd& cov, double shrinkage) {
  const auto d = static_cast<double>(cov.rows());
  Eigen::MatrixXd out = (1.0 - shrinkage) * cov;
  if (shrinkage > 0.0) out.diagonal().array() += shrinkage * cov.trace() / d;
  return 0.5 * (out + out.transpose());
}

}  // namespace

std::string_view to_string(Kind kind) noexcept { return kind == Kind::Lda ? "lda" : "qda"; }

Kind parse_kind(std::string_view text) {
  if (text == "lda") return Kind::Lda;
  if (text == "qda") return Kind::Qda;
  throw Error(ErrorCode::InvalidSpec, "unknown classifier '" + std::string(text) + "'");
}

std::vector<Label> TrainingSet::alphabet() const {
  std::set<Label> s(y.begin(), y.end());
  return {s.begin(), s.end()};
}

TrainingSet TrainingSet::rows_where(const std::vector<bool>& keep) const {
  if (keep.size() != size()) throw Error(ErrorCode::LengthMismatch, "row mask size");
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i]) rows.push_back(static_cast<Eigen::Index>(i));
  }
  TrainingSet out;
  out.x = x(rows, Eigen::all);
  for (auto r : rows) {
    out.y.push_back(y[static_cast<std::size_t>(r)]);
    if (!origin.empty()) out.origin.push_back(origin[static_cast<std::size_t>(r)]);
  }
  return out;
}

void TrainingSet::validate() const {
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw Error(ErrorCode::LengthMismatch, "feature rows differ from label count");
  }
  if (!origin.empty() && origin.size() != y.size()) {
    throw Error(ErrorCode::LengthMismatch, "origin tags differ from label count");
  }
  if (!x.allFinite()) throw Error(ErrorCode::NonFiniteInput, "training features");
}

TrainingSet concat(std::span<const TrainingSet> parts) {
  TrainingSet out;
  Eigen::Index rows = 0;
  Eigen::Index cols = -1;
  bool any_origin = false;
  for (const auto& p : parts) {
    if (p.size() == 0) continue;
    if (cols >= 0 && p.x.cols() != cols) throw Error(ErrorCode::DimensionMismatch, "concat column count");
    cols = p.x.cols();
    rows += p.x.rows();
    any_origin = any_origin || !p.origin.empty();
  }
  out.x.resize(rows, std::max<Eigen::Index>(cols, 0));
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    if (p.size() == 0) continue;
    out.x.middleRows(at, p.x.rows()) = p.x;
    at += p.x.rows();
    out.y.insert(out.y.end(), p.y.begin(), p.y.end());
    if (any_origin) {
      if (p.origin.empty()) out.origin.insert(out.origin.end(), p.size(), std::string());
      else out.origin.insert(out.origin.end(), p.origin.begin(), p.origin.end());
    }
  }
  return out;
}

DiscriminantModel::DiscriminantModel(Kind kind, std::vector<Label> labels,
                                     std::vector<Eigen::VectorXd> means,
                                     std::vector<Eigen::MatrixXd> covariances,
                                     std::vector<double> priors, double shrinkage,
                                     std::vector<std::size_t> feature_indices,
                                     std::size_t source_dim)
    : kind_(kind),
      labels_(std::move(labels)),
      means_(std::move(means)),
      covariances_(std::move(covariances)),
      priors_(std::move(priors)),
      shrinkage_(shrinkage),
      feature_indices_(std::move(feature_indices)),
      source_dim_(source_dim) {
  const std::size_t k = labels_.size();
  const auto d = static_cast<Eigen::Index>(feature_indices_.size());
  if (k < 2) throw Error(ErrorCode::InvalidSpec, "model needs at least two labels");
  if (std::set<Label>(labels_.begin(), labels_.end()).size() != k) {
    throw Error(ErrorCode::InvalidSpec, "duplicate model labels");
  }
  for (const auto& l : labels_) check_label(l);
  if (d == 0) throw Error(ErrorCode::EmptyFeatureSet, "model has no features");
  if (std::set<std::size_t>(feature_indices_.begin(), feature_indices_.end()).size() !=
      feature_indices_.size()) {
    throw Error(ErrorCode::InvalidSpec, "duplicate feature indices");
  }
  for (auto i : feature_indices_) {
    if (i >= source_dim_) throw Error(ErrorCode::DimensionMismatch, "feature index beyond source_dim");
  }
  if (means_.size() != k || priors_.size() != k) {
    throw Error(ErrorCode::InvalidSpec, "means/priors do not match labels");
  }
  for (const auto& mu : means_) {
    if (mu.size() != d || !mu.allFinite()) throw Error(ErrorCode::InvalidSpec, "bad mean vector");
  }
  const std::size_t expected_covs = kind_ == Kind::Lda ? 1 : k;
  if (covariances_.size() != expected_covs) throw Error(ErrorCode::InvalidSpec, "covariance count");
  double prior_sum = 0.0;
  for (double p : priors_) {
    if (!(p > 0.0) || !std::isfinite(p)) throw Error(ErrorCode::InvalidSpec, "priors must be positive");
    prior_sum += p;
  }
  if (std::abs(prior_sum - 1.0) > 1e-9) throw Error(ErrorCode::InvalidSpec, "priors must sum to 1");
  if (!(shrinkage_ >= 0.0 && shrinkage_ <= 1.0)) throw Error(ErrorCode::InvalidSpec, "shrinkage outside [0, 1]");

  for (std::size_t c = 0; c < covariances_.size(); ++c) {
    const auto& cov = covariances_[c];
    if (cov.rows() != d || cov.cols() != d || !cov.allFinite()) {
      throw Error(ErrorCode::InvalidSpec, "bad covariance shape");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success || !well_conditioned(cov)) {
      const std::string which = kind_ == Kind::Lda ? "pooled" : labels_[c];
      throw Error(ErrorCode::SingularCovariance, which + " covariance is not positive definite");
    }
    Eigen::MatrixXd lower = llt.matrixL();
    log_dets_.push_back(2.0 * lower.diagonal().array().log().sum());
    chol_lower_.push_back(std::move(lower));
  }
}

const Eigen::MatrixXd& DiscriminantModel::covariance_for(std::size_t label_index) const {
  return covariances_[kind_ == Kind::Lda ? 0 : label_index];
}

Eigen::VectorXd DiscriminantModel::project(std::span<const double> full) const {
  if (full.size() != source_dim_) {
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(source_dim_) +
                                                  " source features, got " + std::to_string(full.size()));
  }
  Eigen::VectorXd x(static_cast<Eigen::Index>(dims()));
  for (std::size_t i = 0; i < dims(); ++i) x[static_cast<Eigen::Index>(i)] = full[feature_indices_[i]];
  return x;
}

Eigen::VectorXd DiscriminantModel::scores(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (static_cast<std::size_t>(x.size()) != dims()) {
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(dims()) +
                                                  " features, got " + std::to_string(x.size()));
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(labels_.size()));
  for (std::size_t c = 0; c < labels_.size(); ++c) {
    const std::size_t g = kind_ == Kind::Lda ? 0 : c;
    const Eigen::VectorXd z = chol_lower_[g].triangularView<Eigen::Lower>().solve(x - means_[c]);
    out[static_cast<Eigen::Index>(c)] = -0.5 * z.squaredNorm() - 0.5 * log_dets_[g] + std::log(priors_[c]);
  }
  return out;
}

Eigen::MatrixXd DiscriminantModel::scores_rows(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
  if (static_cast<std::size_t>(x.cols()) != dims()) {
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(dims()) + " feature columns");
  }
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(labels_.size()));
  for (std::size_t c = 0; c < labels_.size(); ++c) {
    const std::size_t g = kind_ == Kind::Lda ? 0 : c;
    Eigen::MatrixXd diff = (x.rowwise() - means_[c].transpose()).transpose();
    chol_lower_[g].triangularView<Eigen::Lower>().solveInPlace(diff);
    out.col(static_cast<Eigen::Index>(c)) =
        (-0.5 * diff.colwise().squaredNorm().array() - 0.5 * log_dets_[g] + std::log(priors_[c]))
            .transpose();
  }
  return out;
}

bool DiscriminantModel::operator==(const DiscriminantModel& other) const {
  if (kind_ != other.kind_ || labels_ != other.labels_ || priors_ != other.priors_ ||
      shrinkage_ != other.shrinkage_ || feature_indices_ != other.feature_indices_ ||
      source_dim_ != other.source_dim_ || means_.size() != other.means_.size() ||
      covariances_.size() != other.covariances_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < means_.size(); ++i) {
    if (means_[i] != other.means_[i]) return false;
  }
  for (std::size_t i = 0; i < covariances_.size(); ++i) {
    if (covariances_[i] != other.covariances_[i]) return false;
  }
  return true;
}

DiscriminantModel fit(Kind kind, const TrainingSet& ts, const FitOptions& opts) {
  ts.validate();
  if (!(opts.shrinkage >= 0.0 && opts.shrinkage <= 1.0)) {
    throw Error(ErrorCode::InvalidSpec, "shrinkage outside [0, 1]");
  }
  std::vector<std::size_t> indices = opts.feature_indices;
  if (indices.empty()) {
    indices.resize(ts.dims());
    std::iota(indices.begin(), indices.end(), std::size_t{0});
  }
  if (indices.empty()) throw Error(ErrorCode::EmptyFeatureSet, "no features to fit");
  for (auto i : indices) {
    if (i >= ts.dims()) throw Error(ErrorCode::DimensionMismatch, "feature index " + std::to_string(i));
  }

  const auto labels = ts.alphabet();
  const std::size_t k = labels.size();
  const std::size_t n = ts.size();
  const std::size_t d = indices.size();
  if (k < 2) throw Error(ErrorCode::InsufficientSamples, "need at least two labels");
  if (n < d + k) {
    throw Error(ErrorCode::InsufficientSamples,
                std::to_string(n) + " samples for " + std::to_string(d) + " features");
  }

  std::vector<std::vector<Eigen::Index>> rows(k);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(std::lower_bound(labels.begin(), labels.end(), ts.y[i]) -
                                            labels.begin());
    rows[c].push_back(static_cast<Eigen::Index>(i));
  }
  std::vector<Eigen::Index> cols(indices.begin(), indices.end());

  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> scatters;
  for (std::size_t c = 0; c < k; ++c) {
    if (kind == Kind::Qda && rows[c].size() < d + 1) {
      throw Error(ErrorCode::InsufficientSamples,
                  labels[c] + " has " + std::to_string(rows[c].size()) + " samples, qda needs " +
                      std::to_string(d + 1));
    }
    const Eigen::MatrixXd block = ts.x(rows[c], cols);
    Eigen::VectorXd mu = block.colwise().mean().transpose();
    const Eigen::MatrixXd centered = block.rowwise() - mu.transpose();
    scatters.push_back(centered.transpose() * centered);
    means.push_back(std::move(mu));
  }

  std::vector<Eigen::MatrixXd> covs;
  if (kind == Kind::Lda) {
    Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (const auto& s : scatters) pooled += s;
    pooled /= static_cast<double>(n - k);
    covs.push_back(regularize(pooled, opts.shrinkage));
  } else {
    for (std::size_t c = 0; c < k; ++c) {
      covs.push_back(regularize(scatters[c] / static_cast<double>(rows[c].size() - 1), opts.shrinkage));
    }
  }

  std::vector<double> priors(k, 1.0 / static_cast<double>(k));
  if (opts.priors == PriorMode::Empirical) {
    for (std::size_t c = 0; c < k; ++c) {
      priors[c] = static_cast<double>(rows[c].size()) / static_cast<double>(n);
    }
  }
  return DiscriminantModel(kind, labels, std::move(means), std::move(covs), std::move(priors),
                           opts.shrinkage, std::move(indices), ts.dims());
}

Eigen::VectorXd discriminant_scores(const DiscriminantModel& model, std::span<const double> x) {
  return model.scores(Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())));
}

const Label& predict(const DiscriminantModel& model, std::span<const double> x) {
  const auto s = discriminant_scores(model, x);
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < s.size(); ++c) {
    if (s[c] > s[best]) best = c;
  }
  return model.labels()[static_cast<std::size_t>(best)];
}

Eigen::VectorXd posterior(const DiscriminantModel& model, std::span<const double> x) {
  const auto s = discriminant_scores(model, x);
  const Eigen::ArrayXd e = (s.array() - s.maxCoeff()).exp();
  return (e / e.sum()).matrix();
}

std::vector<std::size_t> argmax_rows(const Eigen::MatrixXd& scores) {
  std::vector<std::size_t> out(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < scores.cols(); ++c) {
      if (scores(r, c) > scores(r, best)) best = c;
    }
    out[static_cast<std::size_t>(r)] = static_cast<std::size_t>(best);
  }
  return out;
}

std::vector<Label> predict_rows(const DiscriminantModel& model, const Eigen::MatrixXd& full) {
  if (static_cast<std::size_t>(full.cols()) != model.source_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(model.source_dim()) + " columns");
  }
  const std::vector<Eigen::Index> cols(model.feature_indices().begin(), model.feature_indices().end());
  const Eigen::MatrixXd projected = full(Eigen::all, cols);
  const auto best = argmax_rows(model.scores_rows(projected));
  std::vector<Label> out;
  out.reserve(best.size());
  for (auto b : best) out.push_back(model.labels()[b]);
  return out;
}

}  // namespace persona
