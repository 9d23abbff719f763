#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace lapest {

/// Dense real vector tagged with the space it lives in, so a vertex
/// function can't be passed where an edge flow is expected.
template <class Tag>
class TaggedVector {
 public:
  TaggedVector() = default;
  explicit TaggedVector(std::size_t size, double fill = 0.0) : values_(size, fill) {}
  explicit TaggedVector(std::vector<double> values) : values_(std::move(values)) {}

  std::size_t size() const noexcept { return values_.size(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> span() noexcept { return values_; }
  std::span<const double> span() const noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  TaggedVector& operator+=(const TaggedVector& other) {
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
  }
  TaggedVector& operator-=(const TaggedVector& other) {
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
  }
  TaggedVector& operator*=(double s) {
    for (double& x : values_) x *= s;
    return *this;
  }

  friend TaggedVector operator+(TaggedVector a, const TaggedVector& b) { return a += b; }
  friend TaggedVector operator-(TaggedVector a, const TaggedVector& b) { return a -= b; }
  friend TaggedVector operator*(double s, TaggedVector a) { return a *= s; }
  friend bool operator==(const TaggedVector&, const TaggedVector&) = default;

 private:
  std::vector<double> values_;
};

struct VertexTag {};
struct EdgeTag {};

using VertexFunction = TaggedVector<VertexTag>;
using EdgeFlow = TaggedVector<EdgeTag>;

template <class Tag>
double dot(const TaggedVector<Tag>& a, const TaggedVector<Tag>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

template <class Tag>
double norm2(const TaggedVector<Tag>& a) {
  return std::sqrt(dot(a, a));
}

template <class Tag>
double norm_inf(const TaggedVector<Tag>& a) {
  double s = 0.0;
  for (double x : a) s = std::max(s, std::abs(x));
  return s;
}

inline double sum(const VertexFunction& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace lapest
