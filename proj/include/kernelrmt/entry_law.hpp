#pragma once

#include <random>
#include <string>
#include <vector>

namespace kernelrmt {

// Law of the data entries x_ij: mean 0, variance 1, symmetric.
class EntryLaw {
 public:
  enum class Kind { standard_gaussian, symmetric_rademacher, symmetric_discrete };

  static EntryLaw gaussian() { return EntryLaw(Kind::standard_gaussian, {}, {}); }
  static EntryLaw rademacher() { return EntryLaw(Kind::symmetric_rademacher, {-1.0, 1.0}, {0.5, 0.5}); }
  // Validated on construction; throws ConfigError.
  static EntryLaw discrete(std::vector<double> values, std::vector<double> probs);

  Kind kind() const { return kind_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& probs() const { return probs_; }
  std::string name() const;

  // E[x^k]; odd moments vanish by symmetry.
  double moment(int k) const;
  double fourth_moment() const { return moment(4); }

  // Draws from the law; owns its distribution state, so each stream of
  // draws should use its own sampler.
  class Sampler {
   public:
    explicit Sampler(const EntryLaw& law)
        : law_(&law), discrete_(law.probs_.begin(), law.probs_.end()) {}
    template <typename Rng>
    double operator()(Rng& rng) {
      if (law_->kind_ == Kind::standard_gaussian) return normal_(rng);
      if (law_->kind_ == Kind::symmetric_rademacher) return (rng() >> 63) ? 1.0 : -1.0;
      return law_->values_[discrete_(rng)];
    }

   private:
    const EntryLaw* law_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::discrete_distribution<int> discrete_;
  };
  Sampler sampler() const { return Sampler(*this); }

 private:
  EntryLaw(Kind kind, std::vector<double> values, std::vector<double> probs);
  void validate() const;

  Kind kind_;
  std::vector<double> values_;
  std::vector<double> probs_;
};

}  // namespace kernelrmt
