#include "kernelrmt/kernels.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "kernelrmt/sparse_pca.hpp"

namespace kernelrmt {

namespace {

class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool done() {
    skip_space();
    return pos_ >= text_.size();
  }
  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool accept(std::string_view word) {
    skip_space();
    if (text_.substr(pos_, word.size()) == word) {
      pos_ += word.size();
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }
  bool peek_number() {
    skip_space();
    if (pos_ >= text_.size()) return false;
    char c = text_[pos_];
    return std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+';
  }
  double number() {
    skip_space();
    std::size_t start = pos_;
    if (pos_ < text_.size() && text_[pos_] == '+') ++pos_;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
    if (ec != std::errc() || !std::isfinite(value)) {
      pos_ = start;
      fail("expected a number");
    }
    pos_ = std::size_t(ptr - text_.data());
    return value;
  }
  int integer() {
    skip_space();
    int value = 0;
    auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
    if (ec != std::errc()) fail("expected an integer");
    pos_ = std::size_t(ptr - text_.data());
    return value;
  }

  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream os;
    os << "malformed kernel '" << text_ << "': " << what << " at position " << pos_;
    throw ConfigError(os.str());
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string trimmed(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

ParsedKernel hermite_sum_kernel(std::vector<double> coeffs, std::string name) {
  while (coeffs.size() > 1 && coeffs.back() == 0.0) coeffs.pop_back();
  bool odd = true;
  for (std::size_t d = 0; d < coeffs.size(); d += 2) odd = odd && coeffs[d] == 0.0;
  const int degree = int(coeffs.size()) - 1;
  Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(coeffs.data(), Eigen::Index(coeffs.size()));
  auto eval = [c, degree](double x) { return c.dot(hermite_all(degree, x)); };
  std::string note = "polynomial of degree " + std::to_string(degree);
  ParsedKernel out{make_kernel(eval, odd ? KernelParity::odd : KernelParity::general, std::move(name),
                               std::move(note)),
                   std::move(coeffs)};
  return out;
}

ParsedKernel parse_hermite_sum(Cursor& cur, std::string name) {
  std::vector<double> coeffs;
  bool first = true;
  while (!cur.done()) {
    double sign = 1.0;
    if (cur.accept('+')) {
    } else if (cur.accept('-')) {
      sign = -1.0;
    } else if (!first) {
      cur.fail("expected '+' or '-'");
    }
    first = false;
    double scale = 1.0;
    if (cur.peek_number()) {
      scale = cur.number();
      cur.expect('*');
    }
    if (!cur.accept('h')) cur.fail("expected a Hermite term hN");
    int d = cur.integer();
    if (d < 1 || d > kMaxRegistryDegree) {
      cur.fail("Hermite degree must lie in [1, " + std::to_string(kMaxRegistryDegree) + "]");
    }
    if (int(coeffs.size()) <= d) coeffs.resize(d + 1, 0.0);
    coeffs[d] += sign * scale;
  }
  if (coeffs.empty()) cur.fail("empty expression");
  return hermite_sum_kernel(std::move(coeffs), std::move(name));
}

ParsedKernel parse_soft_threshold(Cursor& cur) {
  double tau = 0.0;
  if (cur.accept('(')) {
    if (cur.accept("tau")) cur.expect('=');
    tau = cur.number();
    cur.expect(')');
  } else {
    if (!cur.accept("tau")) cur.fail("expected '(' or 'tau='");
    cur.expect('=');
    tau = cur.number();
  }
  if (!cur.done()) cur.fail("trailing text");
  if (!(tau > 0.0)) cur.fail("tau must be > 0");
  return {threshold_kernel(tau), {}};
}

ParsedKernel parse_odd_poly(Cursor& cur, const std::string& name) {
  cur.expect('(');
  std::vector<double> c;
  do {
    c.push_back(cur.number());
  } while (cur.accept(','));
  cur.expect(')');
  if (!cur.done()) cur.fail("trailing text");
  // c_j multiplies x^(2j+1)
  auto eval = [c](double x) {
    const double x2 = x * x;
    double acc = 0.0;
    for (std::size_t j = c.size(); j-- > 0;) acc = acc * x2 + c[j];
    return acc * x;
  };
  std::string note = "odd polynomial of degree " + std::to_string(2 * c.size() - 1);
  return {make_kernel(eval, KernelParity::odd, name, note), {}};
}

}  // namespace

ParsedKernel parse_kernel(std::string_view text) {
  const std::string name = trimmed(text);
  Cursor cur(name);
  if (cur.done()) cur.fail("empty kernel name");
  if (cur.accept("soft_threshold")) return parse_soft_threshold(cur);
  if (cur.accept("odd_poly")) return parse_odd_poly(cur, name);
  return parse_hermite_sum(cur, name);
}

std::vector<std::string> registry_examples() {
  return {"h1", "h3", "h2+h3", "2*h1-0.5*h3", "soft_threshold(2)", "soft_threshold tau=2",
          "odd_poly(1,0.5)"};
}

}  // namespace kernelrmt
