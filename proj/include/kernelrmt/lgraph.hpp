#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "kernelrmt/entry_law.hpp"
#include "kernelrmt/errors.hpp"

// Labelings of the l-graph: a 2l-cycle P_1 N_1 P_2 N_2 ... P_l N_l where N_s
// sits between P_s and P_{s+1} (indices mod l). Labels are positive integers.
namespace kernelrmt::lgraph {

struct MultiLabeling {
  std::vector<int> p;               // p-label of P_s
  std::vector<std::vector<int>> n;  // ordered n-label tuple of N_s

  int l() const { return int(p.size()); }
  bool operator==(const MultiLabeling&) const = default;
};

inline constexpr int kEmpty = 0;

struct SimpleLabeling {
  std::vector<int> p;
  std::vector<int> n;  // kEmpty or a positive label

  int l() const { return int(p.size()); }
  bool operator==(const SimpleLabeling&) const = default;
};

using LabelPair = std::pair<int, int>;

struct MultiStats {
  int l = 0;
  int r = 0;  // distinct p-labels
  int m = 0;  // distinct p-labels plus distinct n-labels
  int sum_d = 0;
  std::vector<int> d;
  int twice_excess = 0;  // l + sum_d + 2 - 2m
  std::map<LabelPair, int> b;  // (p-label, n-label) edge incidences
  std::map<int, int> N;        // appearances of each n-label
  std::map<LabelPair, int> P;  // consecutive p-label pairs i < i' around the cycle

  // l + sum_d odd: the excess is a half-integer.
  bool parity_flag() const { return twice_excess % 2 != 0; }
  double excess_value() const { return 0.5 * twice_excess; }
};

struct SimpleStats {
  int l = 0;
  int r = 0;
  int k = 0;  // non-empty n-vertices
  int m = 0;
  int twice_excess = 0;  // l + k + 2 - 2m

  bool parity_flag() const { return twice_excess % 2 != 0; }
  double excess_value() const { return 0.5 * twice_excess; }
};

// Returns the first violated condition, or nothing for a valid labeling.
// max_degree bounds each tuple size d_s.
std::optional<std::string> multi_violation(const MultiLabeling& ml, int max_degree);
std::optional<std::string> simple_violation(const SimpleLabeling& sl);
void validate(const MultiLabeling& ml, int max_degree);  // throws ConfigError
void validate(const SimpleLabeling& sl);

MultiStats stats(const MultiLabeling& ml);
SimpleStats stats(const SimpleLabeling& sl);

// Integer excess, InternalError when l + sum_d is odd.
int excess(const MultiLabeling& ml);

// First-appearance renumbering; tuple order is kept.
MultiLabeling canonical(const MultiLabeling& ml);
SimpleLabeling canonical(const SimpleLabeling& sl);
std::string key(const MultiLabeling& ml);
std::string key(const SimpleLabeling& sl);

struct EnumerationCaps {
  int max_l = 6;
  int max_degree = 4;
  std::int64_t max_nodes = 10'000'000;
};

// One canonical representative per equivalence class with every d_s <= max_degree.
std::vector<MultiLabeling> enumerate_multilabelings(int l, int max_degree, const EnumerationCaps& caps = {});
std::vector<SimpleLabeling> enumerate_simple_labelings(int l, const EnumerationCaps& caps = {});

enum class VertexKind { good_single, bad_single, good_pair, bad_non_single };

struct VertexClassification {
  std::vector<VertexKind> kind;
  std::vector<int> partner;  // other vertex of a good pair, else -1
};

VertexClassification classify_vertices(const MultiLabeling& ml);

// Step (1) only: reverses until every good pair is proper.
MultiLabeling resolve_improper_pairs(const MultiLabeling& ml);

// Good pairs become empty, bad vertices share one fresh label; canonical output.
SimpleLabeling label_simplifying_map(const MultiLabeling& ml);

struct Violation {
  std::string check;
  std::string key;
  std::string detail;
};

struct LemmaReport {
  int l = 0;
  int max_degree = 0;
  int classes = 0;
  int zero_excess_classes = 0;
  int half_integer_classes = 0;
  int map_outputs_valid = 0;
  int r_preserved = 0;
  int zero_to_zero = 0;
  int simple_classes = 0;
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

// Distinct-label bound, b_ij > 2 bound, N_j >= 2, the N_j >= 3 bound under few
// p-labels, the consecutive-pair bound, zero excess => b in {0, 2}, and the
// map properties. Simple-label bound runs over both the map images and all
// simple classes of the same l.
LemmaReport verify_lemmas(const std::vector<MultiLabeling>& classes, int max_degree);

// sum over zero-excess classes mapping to each zero-excess simple class of
// prod a_{d_s} / sqrt(d_s!), against |a|^k (nu - a^2)^((l - k)/2). coeffs[d] = a_d.
std::vector<Violation> check_zero_excess_weights(const std::vector<MultiLabeling>& classes,
                                                 const std::vector<double>& coeffs, double tol = 1e-10);

// E[Tr Q(X)^l] with Q = off-diagonal sum_d a_d q_d. coeffs[d] = a_d, coeffs[0] ignored.
// Sums over p-index tuples; the column expectation factorizes, so the inner
// sum over n-indices is a truncated power of a one-column generating function.
inline constexpr int kTraceMaxL = 4;
inline constexpr int kTraceMaxN = 6;
inline constexpr int kTraceMaxP = 6;
inline constexpr int kTraceMaxDegree = 5;

double exact_trace_moment(int l, int n, int p, const std::vector<double>& coeffs, const EntryLaw& law);

// The same quantity summed over multi-labeling classes with falling-factorial
// class sizes and the entry-moment table.
double class_trace_moment(const std::vector<MultiLabeling>& classes, int n, int p,
                          const std::vector<double>& coeffs, const EntryLaw& law);

// Monte Carlo estimate of E[Tr Q^l] with its standard error.
struct TraceEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  int trials = 0;
};
TraceEstimate monte_carlo_trace_moment(int l, int n, int p, const std::vector<double>& coeffs,
                                       const EntryLaw& law, int trials, std::uint64_t seed);

nlohmann::json census_json(const std::vector<MultiLabeling>& classes);
nlohmann::json report_json(const LemmaReport& report);

// l = 4, D = 3 example with p = (1, 2, 1, 3) and tuples ((1,2,3), (1,2,3), (4), (4)).
MultiLabeling worked_example();

}  // namespace kernelrmt::lgraph
