#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "alpdc/model.hpp"

namespace alpdc::testing {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t entries = 0;
};

/// Relative error |a - n| / max(|a|, |n|, floor). The floor keeps entries whose
/// true gradient is ~0 from dividing rounding noise by rounding noise.
inline double relative_error(double analytic, double numeric, double floor = 1e-7) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Central differences with step `h` on every entry of every parameter.
inline GradCheckResult gradient_check(nn::Seq2SeqModel& model, const nn::Example& ex, double h = 1e-5) {
  for (auto& [name, v] : model.parameters()) v.zero_grad();
  ad::backward(model.loss(ex));
  GradCheckResult out;
  for (auto& [name, v] : model.parameters()) {
    const Matrix analytic = v.grad();
    auto& values = v.mutable_value().values();
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double orig = values[k];
      values[k] = orig + h;
      const double up = model.loss(ex).value()(0, 0);
      values[k] = orig - h;
      const double down = model.loss(ex).value()(0, 0);
      values[k] = orig;
      const double err = relative_error(analytic.values()[k], (up - down) / (2 * h));
      ++out.entries;
      if (err > out.max_relative_error) {
        out.max_relative_error = err;
        out.worst_parameter = name + "[" + std::to_string(k) + "]";
      }
    }
  }
  return out;
}

/// Tiny corpus with a vocabulary of 4 words plus the 4 reserved symbols.
inline ParallelCorpus toy_corpus() {
  ParallelCorpus c;
  c.source_lang = "eng_Latn";
  c.pairs = {{"a b c", "c b a"}, {"d a", "a d"}};
  return c;
}

}  // namespace alpdc::testing
