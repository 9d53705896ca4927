#pragma once

#include <cstddef>
#include <cstdint>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace dcdgan {

/// Rank-4 shape in NCHW order. Scalars are (1, 1, 1, 1).
struct Shape {
  std::int64_t n = 1;
  std::int64_t c = 1;
  std::int64_t h = 1;
  std::int64_t w = 1;

  std::int64_t size() const { return n * c * h * w; }
  std::int64_t plane() const { return h * w; }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

/// Cache-line aligned storage. Vectorized kernels peel differently depending on
/// the base address, so a fixed alignment keeps results bitwise reproducible.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) { ::operator delete(p, kAlign); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const { return true; }
};

/// Dense row-major NCHW array of doubles. Value semantics.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double v) { return Tensor(Shape{}, v); }

  const Shape& shape() const { return shape_; }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
  double operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

  double& at(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) {
    return data_[static_cast<std::size_t>(((n * shape_.c + c) * shape_.h + h) * shape_.w + w)];
  }
  double at(std::int64_t n, std::int64_t c, std::int64_t h, std::int64_t w) const {
    return data_[static_cast<std::size_t>(((n * shape_.c + c) * shape_.h + h) * shape_.w + w)];
  }

  /// Value of a (1,1,1,1) tensor.
  double item() const;

  /// Copy of sample `i` as an (1, C, H, W) tensor.
  Tensor sample(std::int64_t i) const;

  bool all_finite() const;
  double min() const;
  double max() const;

 private:
  Shape shape_{0, 0, 0, 0};
  std::vector<double, AlignedAllocator<double>> data_;
};

/// ImageBatch is the image/feature-image currency; same storage as Tensor.
using ImageBatch = Tensor;

/// Throws ValidationError if any entry is non-finite.
void require_finite(const Tensor& t, const std::string& what);

/// Throws ValidationError if any entry lies outside [-1, 1] (or is non-finite).
void require_image_range(const Tensor& t, const std::string& what);

/// Stacks (1, C, H, W) items into an (N, C, H, W) batch.
Tensor stack(std::span<const Tensor> items);

}  // namespace dcdgan
