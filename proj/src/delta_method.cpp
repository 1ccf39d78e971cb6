#include "cvqkd/delta_method.hpp"

#include <Eigen/Cholesky>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "cvqkd/model_io.hpp"
#include "cvqkd/quantiles.hpp"

namespace cvqkd {

namespace {

constexpr char kCalibMagic[8] = {'C', 'V', 'Q', 'K', 'D', 'C', 'L', '1'};
constexpr std::uint32_t kCalibVersion = 1;
constexpr int kGramBlock = 256;

static_assert(std::endian::native == std::endian::little,
              "calibration container assumes a little-endian host");

}  // namespace

IntervalForm interval_form_from_string(const std::string& name) {
  if (name == "eq24") return IntervalForm::kEq24;
  if (name == "eq25") return IntervalForm::kEq25;
  throw std::invalid_argument("interval_form: expected 'eq24' or 'eq25', got '" + name + "'");
}

std::string interval_form_name(IntervalForm form) {
  return form == IntervalForm::kEq24 ? "eq24" : "eq25";
}

double CalibrationRecord::quad_form(const Eigen::Ref<const Eigen::VectorXd>& f0) const {
  if (f0.size() != chol_lower.rows()) {
    throw std::invalid_argument("CalibrationRecord::quad_form: vector length mismatch");
  }
  // f0^T (L L^T)^{-1} f0 = |L^{-1} f0|^2.
  return chol_lower.triangularView<Eigen::Lower>().solve(f0).squaredNorm();
}

Eigen::VectorXd output_jacobian_row(const MlpModel& model,
                                    const Eigen::Ref<const Eigen::VectorXd>& features) {
  return mlp_output_gradient(model, features);
}

CalibrationRecord calibrate(const MlpModel& model,
                            const Eigen::Ref<const Eigen::MatrixXd>& features,
                            const Eigen::Ref<const Eigen::VectorXd>& targets,
                            double ridge, std::size_t m_per_trial) {
  model.validate();
  const Eigen::Index n = features.cols();
  if (n != targets.size()) throw std::invalid_argument("calibrate: target count mismatch");
  if (features.rows() != model.input_dim()) {
    throw std::invalid_argument("calibrate: feature dimension mismatch");
  }
  const int p = model.parameter_count();
  if (n <= p) {
    throw std::invalid_argument("calibrate: need n_cal > p for a positive-dof residual scale");
  }

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
  Eigen::MatrixXd block(p, kGramBlock);
  double rss = 0.0;
  Eigen::Index filled = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const ForwardPass fp = mlp_forward_cached(model, features.col(i));
    const double resid = targets[i] - fp.output;
    rss += resid * resid;
    block.col(filled++) = mlp_output_gradient(model, features.col(i));
    if (filled == kGramBlock) {
      gram.selfadjointView<Eigen::Lower>().rankUpdate(block);
      filled = 0;
    }
  }
  if (filled > 0) {
    gram.selfadjointView<Eigen::Lower>().rankUpdate(block.leftCols(filled));
  }

  if (ridge < 0.0) {
    ridge = 1e-8 * gram.diagonal().sum() / static_cast<double>(p);
  }
  gram.diagonal().array() += ridge;

  // In-place factorization; gram's lower triangle becomes L.
  Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error(
        "calibrate: Gram matrix not positive definite; increase the ridge term");
  }

  CalibrationRecord calib;
  calib.n_cal = static_cast<std::size_t>(n);
  calib.p = p;
  calib.s2 = rss / static_cast<double>(n - p);
  calib.ridge = ridge;
  calib.m_per_trial = m_per_trial;
  calib.model_checksum = model_checksum(model);
  calib.chol_lower = std::move(gram);
  return calib;
}

double interval_halfwidth(double s, double quad, double t_quantile, IntervalForm form) {
  if (!(s >= 0.0)) throw std::invalid_argument("interval_halfwidth: s must be >= 0");
  if (!(quad >= 0.0)) throw std::invalid_argument("interval_halfwidth: quad must be >= 0");
  const double spread = form == IntervalForm::kEq24 ? std::sqrt(1.0 + quad) : 1.0 + quad;
  return t_quantile * s * spread;
}

NnWorstCase worst_case_sigma2_max_nn(const MlpModel& model, const CalibrationRecord& calib,
                                     const FeatureVector& features, double epsilon_pe,
                                     IntervalForm form) {
  if (!(epsilon_pe > 0.0 && epsilon_pe <= 1.0)) {
    throw std::invalid_argument("worst_case_sigma2_max_nn: epsilon_pe must lie in (0,1]");
  }
  if (calib.model_checksum != model_checksum(model)) {
    throw std::invalid_argument(
        "worst_case_sigma2_max_nn: calibration record was built for a different model");
  }
  if (features.amplification != model.amplification) {
    throw std::invalid_argument(
        "worst_case_sigma2_max_nn: feature amplification does not match the model");
  }
  const Eigen::Matrix<double, 6, 1> chi = features.to_vector();
  if (!chi.allFinite()) {
    throw std::invalid_argument("worst_case_sigma2_max_nn: non-finite features");
  }

  NnWorstCase out;
  out.epsilon_pe = epsilon_pe;
  out.upsilon_hat = mlp_forward(model, chi);
  const Eigen::VectorXd f0 = output_jacobian_row(model, chi);
  const double quad = calib.quad_form(f0);
  const double dof = static_cast<double>(calib.n_cal) - static_cast<double>(calib.p);
  const double tq = student_t_quantile(epsilon_pe, dof);
  out.halfwidth = interval_halfwidth(std::sqrt(calib.s2), quad, tq, form);
  const double a2 = model.amplification * model.amplification;
  out.sigma2_nn = 1.0 + out.upsilon_hat / a2;
  out.sigma2_max = 1.0 + (out.upsilon_hat + out.halfwidth) / a2;
  return out;
}

std::size_t calibration_file_bytes(int p) {
  const std::size_t tri = static_cast<std::size_t>(p) * (p + 1) / 2;
  return tri * sizeof(double) + 128;
}

void save_calibration(const CalibrationRecord& calib, const std::string& path) {
  if (calib.p < 1 || calib.chol_lower.rows() != calib.p || calib.chol_lower.cols() != calib.p) {
    throw std::invalid_argument("save_calibration: malformed record");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_calibration: cannot open " + path);

  std::vector<char> head;
  auto put = [&head](const void* p_, std::size_t n_) {
    const char* c = static_cast<const char*>(p_);
    head.insert(head.end(), c, c + n_);
  };
  const std::uint32_t version = kCalibVersion;
  const std::uint64_t n_cal = calib.n_cal;
  const std::uint32_t p = static_cast<std::uint32_t>(calib.p);
  const std::uint64_t m_per_trial = calib.m_per_trial;
  put(kCalibMagic, sizeof kCalibMagic);
  put(&version, sizeof version);
  put(&calib.model_checksum, sizeof calib.model_checksum);
  put(&n_cal, sizeof n_cal);
  put(&p, sizeof p);
  put(&calib.ridge, sizeof calib.ridge);
  put(&calib.s2, sizeof calib.s2);
  put(&m_per_trial, sizeof m_per_trial);

  std::uint64_t sum = fnv1a64(head.data(), head.size());
  out.write(head.data(), static_cast<std::streamsize>(head.size()));

  // Packed lower triangle, row by row.
  std::vector<double> row;
  for (int i = 0; i < calib.p; ++i) {
    row.resize(static_cast<std::size_t>(i) + 1);
    for (int j = 0; j <= i; ++j) row[static_cast<std::size_t>(j)] = calib.chol_lower(i, j);
    const std::size_t bytes = row.size() * sizeof(double);
    sum = fnv1a64(row.data(), bytes, sum);
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(bytes));
  }
  out.write(reinterpret_cast<const char*>(&sum), sizeof sum);
  if (!out) throw std::runtime_error("save_calibration: write failed for " + path);
}

CalibrationRecord load_calibration(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_calibration: cannot open " + path);

  char magic[8];
  std::uint32_t version = 0, p = 0;
  CalibrationRecord calib;
  std::uint64_t n_cal = 0, m_per_trial = 0;

  auto get = [&in, &path](void* out, std::size_t n) {
    in.read(static_cast<char*>(out), static_cast<std::streamsize>(n));
    if (!in) throw std::runtime_error("load_calibration: truncated file " + path);
  };
  get(magic, sizeof magic);
  if (std::memcmp(magic, kCalibMagic, sizeof magic) != 0) {
    throw std::runtime_error("load_calibration: bad magic in " + path);
  }
  get(&version, sizeof version);
  if (version != kCalibVersion) {
    throw std::runtime_error("load_calibration: unsupported container version in " + path);
  }
  get(&calib.model_checksum, sizeof calib.model_checksum);
  get(&n_cal, sizeof n_cal);
  get(&p, sizeof p);
  get(&calib.ridge, sizeof calib.ridge);
  get(&calib.s2, sizeof calib.s2);
  get(&m_per_trial, sizeof m_per_trial);
  if (p < 1 || p > 100000) throw std::runtime_error("load_calibration: implausible p in " + path);
  if (n_cal <= p) throw std::runtime_error("load_calibration: n_cal <= p in " + path);
  calib.n_cal = n_cal;
  calib.p = static_cast<int>(p);
  calib.m_per_trial = m_per_trial;

  std::vector<char> head;
  {
    // Re-serialize the header exactly as written to seed the checksum chain.
    auto put = [&head](const void* q, std::size_t n) {
      const char* c = static_cast<const char*>(q);
      head.insert(head.end(), c, c + n);
    };
    put(kCalibMagic, sizeof kCalibMagic);
    put(&version, sizeof version);
    put(&calib.model_checksum, sizeof calib.model_checksum);
    put(&n_cal, sizeof n_cal);
    put(&p, sizeof p);
    put(&calib.ridge, sizeof calib.ridge);
    put(&calib.s2, sizeof calib.s2);
    put(&m_per_trial, sizeof m_per_trial);
  }
  std::uint64_t sum = fnv1a64(head.data(), head.size());

  calib.chol_lower = Eigen::MatrixXd::Zero(calib.p, calib.p);
  std::vector<double> row(static_cast<std::size_t>(calib.p));
  for (int i = 0; i < calib.p; ++i) {
    const std::size_t bytes = (static_cast<std::size_t>(i) + 1) * sizeof(double);
    get(row.data(), bytes);
    sum = fnv1a64(row.data(), bytes, sum);
    for (int j = 0; j <= i; ++j) calib.chol_lower(i, j) = row[static_cast<std::size_t>(j)];
  }
  std::uint64_t stored = 0;
  get(&stored, sizeof stored);
  if (stored != sum) {
    throw std::runtime_error("load_calibration: checksum mismatch, file corrupted: " + path);
  }
  return calib;
}

}  // namespace cvqkd
