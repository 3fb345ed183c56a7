#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "kernelrmt/entry_law.hpp"
#include "kernelrmt/rmt_sim.hpp"

namespace kernelrmt::cli {

inline constexpr const char* kToolName = "kernelrmt";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kOutDirEnv = "KERNELRMT_OUT_DIR";

struct KeySpec {
  std::string name;
  std::string default_value;
  std::string help;
};

// Flat key = value configuration, resolved against a command's key list.
class Config {
 public:
  Config(std::string command, const std::vector<KeySpec>& keys);

  // '#' starts a comment; blank lines are skipped.
  void merge_text(const std::string& text, const std::string& origin);
  void merge_file(const std::string& path);
  void set(const std::string& assignment, const std::string& origin);  // "key=value"
  void set(const std::string& key, const std::string& value, const std::string& origin);

  bool has_key(const std::string& key) const { return values_.count(key) > 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string text(const std::string& key) const;
  double real(const std::string& key) const;
  double positive(const std::string& key) const;
  long long integer(const std::string& key, long long lo, long long hi) const;
  std::uint64_t seed(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;
  std::vector<int> integers(const std::string& key, int lo, int hi) const;
  EntryLaw law(const std::string& key) const;

  // Sorted "key=value\n" lines over every resolved key.
  std::string canonical() const;
  std::string hash() const;  // FNV-1a 64, hex

  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

 private:
  std::string command_;
  std::map<std::string, std::string> values_;
};

std::uint64_t fnv1a64(const std::string& bytes);

// UTC ISO-8601; SOURCE_DATE_EPOCH wins over the clock when set.
std::string timestamp();

// Seams for the verify command, swappable in tests.
struct VerifyOracles {
  std::function<double(int l, int n, int p, const std::vector<double>& coeffs, const EntryLaw& law)> exact_trace;
  std::function<HermiteSumDecomposition(const Eigen::VectorXd& z, int d)> brute_force_qr;

  static VerifyOracles defaults();
};

struct RunOptions {
  const VerifyOracles* oracles = nullptr;  // defaults when null
};

// Full command line including argv[0]. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const RunOptions& options = {});

}  // namespace kernelrmt::cli
