#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dhsqr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Dense (p+1)-length parameter vector, intercept at index 0.
using CoefficientVector = Vector;

inline constexpr const char* kVersion = "0.1.0";

enum class ModelKind { Homoscedastic, Heteroscedastic };
enum class NoiseLaw { Normal, StudentT3, Cauchy };

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};
struct ProtocolViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct KernelUnderflow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One machine's block of rows. Column 0 of X is identically one.
struct DatasetShard {
  Matrix X;
  Vector y;
  int shard_id = 0;

  Eigen::Index rows() const { return X.rows(); }
  Eigen::Index dim() const { return X.cols(); }  // p + 1
};

struct Dataset {
  Matrix X;
  Vector y;
};

// Nonzero indices among {1..p}; the intercept never counts as support.
std::vector<int> support_of(const CoefficientVector& beta, double zero_tol = 1e-8);

inline std::string to_string(ModelKind m) {
  return m == ModelKind::Homoscedastic ? "hom" : "het";
}
inline std::string to_string(NoiseLaw n) {
  switch (n) {
    case NoiseLaw::Normal: return "normal";
    case NoiseLaw::StudentT3: return "t3";
    default: return "cauchy";
  }
}

}  // namespace dhsqr
