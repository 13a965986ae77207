#include "wavemask/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wavemask/error.hpp"

namespace wavemask {

std::size_t shape_size(const Shape& shape) {
  if (shape.empty()) throw InvalidArgument("tensor shape must have rank >= 1");
  std::size_t n = 1;
  for (std::size_t d : shape) {
    if (d == 0) throw InvalidArgument("tensor dimension must be >= 1, got shape " + shape_to_string(shape));
    if (n > std::numeric_limits<std::size_t>::max() / d) throw InvalidArgument("tensor shape overflows size_t");
    n *= d;
  }
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  return os.str();
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {
  if (!std::isfinite(fill)) throw InvalidArgument("tensor fill value must be finite");
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_size(shape_) != data_.size()) {
    throw InvalidArgument("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                          shape_to_string(shape_));
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw InvalidArgument("tensor data contains a non-finite value");
  }
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t h = rows.size();
  const std::size_t w = h ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(h * w);
  for (const auto& row : rows) {
    if (row.size() != w) throw InvalidArgument("ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({h, w}, std::move(data));
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_size(shape) != size()) throw InvalidArgument("reshape to " + shape_to_string(shape) + " changes size");
  Tensor out = *this;
  out.shape_ = std::move(shape);
  return out;
}

double Tensor::sum() const noexcept {
  double s = 0.0;
  for (double v : data_) s += v;
  return s;
}

double Tensor::sum_squares() const noexcept {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return s;
}

double Tensor::mean() const noexcept { return data_.empty() ? 0.0 : sum() / static_cast<double>(data_.size()); }

double Tensor::min() const noexcept { return data_.empty() ? 0.0 : *std::min_element(data_.begin(), data_.end()); }

double Tensor::max() const noexcept { return data_.empty() ? 0.0 : *std::max_element(data_.begin(), data_.end()); }

Tensor& Tensor::operator+=(const Tensor& other) {
  require_same_shape(*this, other, "tensor +=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor& Tensor::operator-=(const Tensor& other) {
  require_same_shape(*this, other, "tensor -=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Tensor& Tensor::operator*=(double k) noexcept {
  for (double& v : data_) v *= k;
  return *this;
}

Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
Tensor operator*(Tensor a, double k) { return a *= k; }
Tensor operator*(double k, Tensor a) { return a *= k; }

double max_abs_diff(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Chw as_chw(const Tensor& t, const char* what) {
  if (t.rank() == 3) return {t.dim(0), t.dim(1), t.dim(2)};
  if (t.rank() == 2) return {1, t.dim(0), t.dim(1)};
  throw InvalidArgument(std::string(what) + ": expected a CxHxW or HxW tensor, got shape " +
                        shape_to_string(t.shape()));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw InvalidArgument(std::string(what) + ": shape mismatch " + shape_to_string(a.shape()) + " vs " +
                          shape_to_string(b.shape()));
  }
}

}  // namespace wavemask
