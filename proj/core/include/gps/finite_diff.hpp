#pragma once

#include <functional>

#include "gps/tensor.hpp"

namespace gps {

// Central-difference gradient of f with respect to x, entrywise:
// (f(x + h*e) - f(x - h*e)) / (2h). f must be a deterministic pure function
// of the current contents of x and is re-evaluated 2*size(x) times; it sees
// the perturbation because Tensor handles alias their storage. Evaluations
// should run with no tape active. Independent of Tape::backward by
// construction: only forward values are used.
inline Tensor finite_diff_grad(const std::function<double()>& f, Tensor x, double h) {
  if (h <= 0.0) throw ConfigError("finite_diff_grad: h must be positive");
  Tensor out = Tensor::zeros(x.rows(), x.cols());
  std::vector<double>& xv = x.values();
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const double orig = xv[i];
    xv[i] = orig + h;
    const double fp = f();
    xv[i] = orig - h;
    const double fm = f();
    xv[i] = orig;
    out.values()[i] = (fp - fm) / (2.0 * h);
  }
  return out;
}

}  // namespace gps
