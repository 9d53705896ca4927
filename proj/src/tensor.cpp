#include "dcdgan/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dcdgan/errors.hpp"

namespace dcdgan {

std::string Shape::str() const {
  std::ostringstream os;
  os << "(" << n << ", " << c << ", " << h << ", " << w << ")";
  return os.str();
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(shape), data_(static_cast<std::size_t>(shape.size()), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(shape), data_(values.begin(), values.end()) {
  if (static_cast<std::int64_t>(data_.size()) != shape.size()) {
    throw ShapeError("tensor data size " + std::to_string(data_.size()) +
                     " does not match shape " + shape.str());
  }
}

double Tensor::item() const {
  if (data_.size() != 1) throw ShapeError("item() on non-scalar tensor " + shape_.str());
  return data_[0];
}

Tensor Tensor::sample(std::int64_t i) const {
  const std::int64_t per = shape_.c * shape_.h * shape_.w;
  Tensor out(Shape{1, shape_.c, shape_.h, shape_.w});
  std::copy_n(data_.begin() + i * per, per, out.data_.begin());
  return out;
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double Tensor::min() const { return *std::min_element(data_.begin(), data_.end()); }
double Tensor::max() const { return *std::max_element(data_.begin(), data_.end()); }

void require_finite(const Tensor& t, const std::string& what) {
  if (!t.all_finite()) throw ValidationError(what + ": non-finite entry");
}

void require_image_range(const Tensor& t, const std::string& what) {
  for (double v : t.values()) {
    if (!(v >= -1.0 && v <= 1.0)) {
      throw ValidationError(what + ": value " + std::to_string(v) +
                            " outside [-1, 1] (missing tanh or normalization upstream?)");
    }
  }
}

Tensor stack(std::span<const Tensor> items) {
  if (items.empty()) throw ShapeError("stack of zero items");
  const Shape s = items.front().shape();
  Tensor out(Shape{static_cast<std::int64_t>(items.size()) * s.n, s.c, s.h, s.w});
  double* dst = out.data();
  for (const auto& it : items) {
    if (it.shape() != s) throw ShapeError("stack: mismatched item shape " + it.shape().str());
    dst = std::copy(it.values().begin(), it.values().end(), dst);
  }
  return out;
}

}  // namespace dcdgan
