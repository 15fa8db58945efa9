#include "lel/error.hpp"
#include "lel/estimators.hpp"
#include "lel/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>

extern "C" void openblas_set_num_threads(int);

namespace lel {
namespace {

constexpr double kEigenFloor = -1e-9;

void check_alpha(double alpha) {
  if (!(alpha > 0.0) || alpha == 1.0 || !std::isfinite(alpha)) {
    throw ParameterError("renyi alpha must be > 0 and != 1 (use 1.01 for the Shannon limit)");
  }
}

Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& m) {
  // Parallelism comes from parallel_for; BLAS threads on top of it would
  // oversubscribe.
  static std::once_flag single_thread;
  std::call_once(single_thread, [] { openblas_set_num_threads(1); });
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition did not converge");
  return solver.eigenvalues();
}

EntropyEstimate make_estimate(double value) {
  EntropyEstimate e;
  e.value = value;
  e.estimator = Estimator::renyi;
  return e;
}

}  // namespace

double renyi_from_eigenvalues(const Eigen::VectorXd& eigenvalues, double alpha) {
  check_alpha(alpha);
  double sum = 0.0;
  for (double l : eigenvalues) {
    if (l < kEigenFloor) {
      throw NumericalError("Gram matrix is not positive semidefinite (eigenvalue " +
                           std::to_string(l) + ")");
    }
    if (l > 0.0) sum += std::pow(l, alpha);
  }
  if (!(sum > 0.0)) throw NumericalError("Gram matrix has no positive eigenvalue");
  const double value = std::log(sum) / (1.0 - alpha);
  const double upper = std::log(static_cast<double>(eigenvalues.size()));
  // Rounding can push the result a few ulps outside [0, log N].
  return std::clamp(value, 0.0, upper);
}

EntropyEstimate renyi_entropy(const GramMatrix& gram, double alpha) {
  check_alpha(alpha);
  if (gram.degenerate) return make_estimate(0.0);
  auto e = make_estimate(renyi_from_eigenvalues(symmetric_eigenvalues(gram.entries), alpha));
  e.config.renyi_alpha = alpha;
  e.config.estimator = Estimator::renyi;
  return e;
}

EntropyEstimate joint_renyi_entropy(const GramMatrix& a, const GramMatrix& b, double alpha) {
  if (a.size() != b.size()) {
    throw ConsistencyError("joint entropy needs Grams over the same samples (" +
                           std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
  check_alpha(alpha);
  // A o (J/N) is proportional to A, so the joint reduces to the other marginal.
  if (b.degenerate) return renyi_entropy(a, alpha);
  if (a.degenerate) return renyi_entropy(b, alpha);

  Eigen::MatrixXd h = a.entries.cwiseProduct(b.entries);
  h /= h.trace();
  auto e = make_estimate(renyi_from_eigenvalues(symmetric_eigenvalues(h), alpha));
  e.config.renyi_alpha = alpha;
  return e;
}

MutualInformation mutual_information(const Eigen::MatrixXd& x, const Eigen::MatrixXd& z,
                                     const EstimatorConfig& config) {
  if (x.rows() != z.rows()) {
    throw ConsistencyError("mutual_information: x has " + std::to_string(x.rows()) +
                           " rows, z has " + std::to_string(z.rows()));
  }
  validate(config);

  const Eigen::Index n = x.rows();
  const auto cap = static_cast<Eigen::Index>(config.gram_sample_cap);
  Eigen::MatrixXd xs;
  Eigen::MatrixXd zs;
  if (n > cap) {
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    auto rng = make_rng(config.seed, 0x6d69);
    std::shuffle(rows.begin(), rows.end(), rng);
    rows.resize(static_cast<std::size_t>(cap));
    std::sort(rows.begin(), rows.end());
    xs = x(rows, Eigen::all);
    zs = z(rows, Eigen::all);
  } else {
    xs = x;
    zs = z;
  }

  const auto a = gram_matrix(xs, config.bandwidth);
  const auto b = gram_matrix(zs, config.bandwidth);
  MutualInformation mi;
  mi.entropy_x = renyi_entropy(a, config.renyi_alpha).value;
  mi.entropy_z = renyi_entropy(b, config.renyi_alpha).value;
  mi.joint_entropy = joint_renyi_entropy(a, b, config.renyi_alpha).value;
  mi.value = mi.entropy_x + mi.entropy_z - mi.joint_entropy;
  return mi;
}

}  // namespace lel
