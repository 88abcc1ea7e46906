#pragma once

#include <Eigen/Dense>

#include "krc/errors.hpp"
#include "krc/random.hpp"

namespace krc {

// Axis-aligned box in R^n.
struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Box() = default;
  Box(Eigen::VectorXd lo, Eigen::VectorXd hi) : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size())
      throw DimensionError("Box: lower/upper dimension mismatch");
    if ((upper.array() < lower.array()).any())
      throw ConfigError("Box: upper < lower in some coordinate");
  }

  Eigen::Index dim() const { return lower.size(); }

  bool contains(const Eigen::VectorXd& x) const {
    return x.size() == lower.size() && (x.array() >= lower.array()).all() &&
           (x.array() <= upper.array()).all();
  }

  bool contains(const Box& other) const {
    return other.dim() == dim() && (other.lower.array() >= lower.array()).all() &&
           (other.upper.array() <= upper.array()).all();
  }

  Eigen::VectorXd sample(UniformSampler& rng) const {
    Eigen::VectorXd x(dim());
    for (Eigen::Index i = 0; i < dim(); ++i) x[i] = rng.in_range(lower[i], upper[i]);
    return x;
  }
};

// Closed interval, used for the admissible input set.
struct Interval {
  double lower = 0.0;
  double upper = 0.0;

  Interval() = default;
  Interval(double lo, double hi) : lower(lo), upper(hi) {
    if (hi < lo) throw ConfigError("Interval: upper < lower");
  }

  bool contains(double u) const { return u >= lower && u <= upper; }
  double clamp(double u) const { return u < lower ? lower : (u > upper ? upper : u); }
};

}  // namespace krc
