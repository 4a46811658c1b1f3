// Text model container. Every real is written as an exact hexadecimal float
// so save -> load reproduces the parameters bit for bit.
//
//   persona-model
//   version 1
//   kind lda|qda
//   shrinkage <hex>
//   source_dim <n>
//   features <d> <i_1> ... <i_d>
//   labels <k> <label_1> ... <label_k>
//   priors <hex> x k
//   mean <hex> x d                      (k lines)
//   covariance <hex> x d*d, row-major   (1 line for lda, k for qda)
//   end

#include <fstream>
#include <sstream>

#include "persona/dataio.hpp"
#include "persona/error.hpp"
#include "text_util.hpp"

namespace persona {

namespace {

constexpr std::string_view kMagic = "persona-model";

class TokenReader {
 public:
  explicit TokenReader(std::istream& in) : in_(in) {}

  std::string next(std::string_view what) {
    std::string token;
    if (!(in_ >> token)) throw Error(ErrorCode::CorruptModel, "truncated before " + std::string(what));
    return token;
  }

  void expect(std::string_view keyword) {
    const auto token = next(keyword);
    if (token != keyword) {
      throw Error(ErrorCode::CorruptModel, "expected '" + std::string(keyword) + "', got '" + token + "'");
    }
  }

  std::size_t count(std::string_view what) {
    const auto token = next(what);
    std::int64_t v = 0;
    if (!detail::parse_int64(token, v) || v < 0) {
      throw Error(ErrorCode::CorruptModel, "bad " + std::string(what) + " '" + token + "'");
    }
    return static_cast<std::size_t>(v);
  }

  double real(std::string_view what) {
    const auto token = next(what);
    double v = 0.0;
    if (!detail::parse_hex(token, v)) {
      throw Error(ErrorCode::CorruptModel, "bad " + std::string(what) + " '" + token + "'");
    }
    return v;
  }

 private:
  std::istream& in_;
};

constexpr std::size_t kMaxDim = 4096;

}  // namespace

void write_model(std::ostream& out, const DiscriminantModel& model) {
  const std::size_t d = model.dims();
  out << kMagic << '\n';
  out << "version " << kModelSchemaVersion << '\n';
  out << "kind " << to_string(model.kind()) << '\n';
  out << "shrinkage " << detail::format_hex(model.shrinkage()) << '\n';
  out << "source_dim " << model.source_dim() << '\n';
  out << "features " << d;
  for (auto i : model.feature_indices()) out << ' ' << i;
  out << '\n';
  out << "labels " << model.labels().size();
  for (const auto& l : model.labels()) out << ' ' << l;
  out << "\npriors";
  for (double p : model.priors()) out << ' ' << detail::format_hex(p);
  out << '\n';
  for (const auto& mu : model.means()) {
    out << "mean";
    for (Eigen::Index i = 0; i < mu.size(); ++i) out << ' ' << detail::format_hex(mu[i]);
    out << '\n';
  }
  for (const auto& cov : model.covariances()) {
    out << "covariance";
    for (Eigen::Index r = 0; r < cov.rows(); ++r) {
      for (Eigen::Index c = 0; c < cov.cols(); ++c) out << ' ' << detail::format_hex(cov(r, c));
    }
    out << '\n';
  }
  out << "end\n";
}

DiscriminantModel read_model(std::istream& in) {
  TokenReader r(in);
  if (r.next("magic") != kMagic) throw Error(ErrorCode::CorruptModel, "not a model file");
  r.expect("version");
  const auto version = r.count("version");
  if (version != static_cast<std::size_t>(kModelSchemaVersion)) {
    throw Error(ErrorCode::VersionMismatch,
                "schema version " + std::to_string(version) + ", expected " +
                    std::to_string(kModelSchemaVersion));
  }
  r.expect("kind");
  const auto kind_text = r.next("kind");
  Kind kind;
  if (kind_text == "lda") kind = Kind::Lda;
  else if (kind_text == "qda") kind = Kind::Qda;
  else throw Error(ErrorCode::CorruptModel, "unknown kind '" + kind_text + "'");

  r.expect("shrinkage");
  const double shrinkage = r.real("shrinkage");
  r.expect("source_dim");
  const auto source_dim = r.count("source_dim");
  r.expect("features");
  const auto d = r.count("feature count");
  if (d == 0 || d > kMaxDim) throw Error(ErrorCode::CorruptModel, "bad feature count");
  std::vector<std::size_t> indices(d);
  for (auto& i : indices) i = r.count("feature index");

  r.expect("labels");
  const auto k = r.count("label count");
  if (k < 2 || k > kMaxDim) throw Error(ErrorCode::CorruptModel, "bad label count");
  std::vector<Label> labels(k);
  for (auto& l : labels) l = r.next("label");

  r.expect("priors");
  std::vector<double> priors(k);
  for (double& p : priors) p = r.real("prior");

  std::vector<Eigen::VectorXd> means(k, Eigen::VectorXd(static_cast<Eigen::Index>(d)));
  for (auto& mu : means) {
    r.expect("mean");
    for (Eigen::Index i = 0; i < mu.size(); ++i) mu[i] = r.real("mean");
  }
  const std::size_t n_cov = kind == Kind::Lda ? 1 : k;
  const auto dd = static_cast<Eigen::Index>(d);
  std::vector<Eigen::MatrixXd> covs(n_cov, Eigen::MatrixXd(dd, dd));
  for (auto& cov : covs) {
    r.expect("covariance");
    for (Eigen::Index row = 0; row < dd; ++row) {
      for (Eigen::Index col = 0; col < dd; ++col) cov(row, col) = r.real("covariance");
    }
  }
  r.expect("end");

  try {
    return DiscriminantModel(kind, std::move(labels), std::move(means), std::move(covs),
                             std::move(priors), shrinkage, std::move(indices), source_dim);
  } catch (const Error& e) {
    throw Error(ErrorCode::CorruptModel, e.what());
  }
}

void save_model(const DiscriminantModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  write_model(out, model);
  out.flush();
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

DiscriminantModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  return read_model(in);
}

}  // namespace persona
