#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace fedsim {

// Flat view of all model parameters: layer-major, row-major inside each
// weight matrix, bias after weights. The unit of aggregation, wire
// serialization and control-variate arithmetic.
struct FlatParams {
  std::vector<double> values;

  FlatParams() = default;
  explicit FlatParams(std::size_t n, double fill = 0.0) : values(n, fill) {}
  explicit FlatParams(std::vector<double> v) : values(std::move(v)) {}

  std::size_t size() const { return values.size(); }
  bool empty() const { return values.empty(); }

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  FlatParams& operator+=(const FlatParams& o) {
    check_same_size(o);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    return *this;
  }
  FlatParams& operator-=(const FlatParams& o) {
    check_same_size(o);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
    return *this;
  }
  FlatParams& operator*=(double s) {
    for (double& v : values) v *= s;
    return *this;
  }

  // this += s * o
  void axpy(double s, const FlatParams& o) {
    check_same_size(o);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += s * o.values[i];
  }

  friend FlatParams operator+(FlatParams a, const FlatParams& b) { return a += b; }
  friend FlatParams operator-(FlatParams a, const FlatParams& b) { return a -= b; }
  friend FlatParams operator*(double s, FlatParams a) { return a *= s; }

  bool operator==(const FlatParams& o) const { return values == o.values; }

 private:
  void check_same_size(const FlatParams& o) const {
    if (o.values.size() != values.size()) {
      throw std::invalid_argument("FlatParams: size mismatch");
    }
  }
};

}  // namespace fedsim
