#include "kernelrmt/entry_law.hpp"

#include <cmath>

#include "kernelrmt/errors.hpp"

namespace kernelrmt {

EntryLaw::EntryLaw(Kind kind, std::vector<double> values, std::vector<double> probs)
    : kind_(kind), values_(std::move(values)), probs_(std::move(probs)) {}

EntryLaw EntryLaw::discrete(std::vector<double> values, std::vector<double> probs) {
  EntryLaw law(Kind::symmetric_discrete, std::move(values), std::move(probs));
  law.validate();
  return law;
}

void EntryLaw::validate() const {
  if (kind_ != Kind::symmetric_discrete) return;
  if (values_.empty() || values_.size() != probs_.size()) {
    throw ConfigError("discrete entry law needs matching, nonempty values and probs");
  }
  double total = 0.0;
  for (double q : probs_) {
    if (!(q >= 0.0)) throw ConfigError("discrete entry law has a negative probability");
    total += q;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ConfigError("discrete entry law probabilities must sum to 1");
  double mean = 0.0, var = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    mean += probs_[i] * values_[i];
    var += probs_[i] * values_[i] * values_[i];
  }
  if (std::abs(mean) > 1e-12) throw ConfigError("discrete entry law must have mean 0");
  if (std::abs(var - 1.0) > 1e-12) throw ConfigError("discrete entry law must have variance 1");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    double mirrored = 0.0;
    for (std::size_t j = 0; j < values_.size(); ++j) {
      if (std::abs(values_[j] + values_[i]) <= 1e-12 * std::max(1.0, std::abs(values_[i]))) {
        mirrored += probs_[j];
      }
    }
    double same = 0.0;
    for (std::size_t j = 0; j < values_.size(); ++j) {
      if (std::abs(values_[j] - values_[i]) <= 1e-12 * std::max(1.0, std::abs(values_[i]))) same += probs_[j];
    }
    if (std::abs(mirrored - same) > 1e-12) throw ConfigError("discrete entry law must be symmetric");
  }
}

std::string EntryLaw::name() const {
  switch (kind_) {
    case Kind::standard_gaussian: return "gaussian";
    case Kind::symmetric_rademacher: return "rademacher";
    case Kind::symmetric_discrete: return "discrete";
  }
  return "unknown";
}

double EntryLaw::moment(int k) const {
  if (k < 0) throw ConfigError("moment order must be >= 0");
  if (k % 2 == 1) return 0.0;
  if (kind_ == Kind::standard_gaussian) {
    double r = 1.0;
    for (int j = k - 1; j > 1; j -= 2) r *= j;
    return r;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) acc += probs_[i] * std::pow(values_[i], k);
  return acc;
}

}  // namespace kernelrmt
