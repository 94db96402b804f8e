#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace dac {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// State-by-action table stored row-major so that the flat index of (s, a) is s * A + a.
using Table = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Flat view of a table in (s, a) -> s * A + a order.
inline Eigen::Map<const Vector> flat(const Table& t) { return {t.data(), t.size()}; }
inline Eigen::Map<Vector> flat(Table& t) { return {t.data(), t.size()}; }

inline Table unflatten(const Vector& v, int num_states, int num_actions) {
  if (v.size() != static_cast<Eigen::Index>(num_states) * num_actions) {
    throw std::invalid_argument("unflatten: size mismatch");
  }
  return Eigen::Map<const Table>(v.data(), num_states, num_actions);
}

/// Raised when an argument leaves the domain of a mirror map or loss.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Which policy representation a quantity refers to.
enum class Representation { direct, softmax };

std::string to_string(Representation r);
Representation parse_representation(const std::string& name);

}  // namespace dac
