#include "fate/dataset.hpp"

#include "fate/errors.hpp"

namespace fate {

Matrix Dataset::zstar() const {
  Matrix out(n(), z.cols() + x.cols());
  out << z, x;
  return out;
}

namespace {

void fill_names(std::vector<std::string>& names, long count, const std::string& prefix) {
  if (names.empty()) {
    for (long i = 0; i < count; ++i) names.push_back(prefix + std::to_string(i + 1));
  }
}

}  // namespace

void ensure_names(Dataset& data) {
  fill_names(data.outcome_names, data.y.cols(), "y");
  fill_names(data.instrument_names, data.z.cols(), "z");
  if (data.control_names.empty() && data.x.cols() > 0) {
    data.control_names.push_back(kInterceptName);
    for (long i = 1; i < data.x.cols(); ++i) data.control_names.push_back("x" + std::to_string(i));
  }
}

void validate(const Dataset& data) {
  require_finite(data.y, "Y");
  require_finite(data.d, "D");
  require_finite(data.z, "Z");
  require_finite(data.x, "X");
  const long n = data.y.rows();
  if (data.d.rows() != n || data.z.rows() != n || data.x.rows() != n) {
    throw Error(ErrorKind::DimensionMismatch, "dataset blocks have different row counts");
  }
  if (n <= data.z.cols() + data.x.cols()) {
    throw Error(ErrorKind::InvalidData, "dataset needs N > K + R");
  }
  if (static_cast<long>(data.outcome_names.size()) != data.y.cols() ||
      static_cast<long>(data.instrument_names.size()) != data.z.cols() ||
      static_cast<long>(data.control_names.size()) != data.x.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "dataset column names do not match block widths");
  }
  LeastSquares check(data.zstar());
  (void)check;
}

Dataset permute_instruments(const Dataset& data, const std::vector<int>& order) {
  if (static_cast<long>(order.size()) != data.z.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "instrument permutation has wrong length");
  }
  Dataset out = data;
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.z.col(static_cast<long>(i)) = data.z.col(order[i]);
    out.instrument_names[i] = data.instrument_names[static_cast<std::size_t>(order[i])];
  }
  return out;
}

std::vector<int> defining_first_order(long num_instruments, const std::vector<int>& defining) {
  std::vector<bool> used(static_cast<std::size_t>(num_instruments), false);
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(num_instruments));
  for (int k : defining) {
    if (k < 0 || k >= num_instruments || used[static_cast<std::size_t>(k)]) {
      throw Error(ErrorKind::UnknownInstrument,
                  "defining instrument index " + std::to_string(k) + " is invalid or repeated");
    }
    used[static_cast<std::size_t>(k)] = true;
    order.push_back(k);
  }
  for (int k = 0; k < num_instruments; ++k) {
    if (!used[static_cast<std::size_t>(k)]) order.push_back(k);
  }
  return order;
}

}  // namespace fate
