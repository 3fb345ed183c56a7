#include "kernelrmt/lgraph.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <Eigen/Core>

#include "kernelrmt/rmt_sim.hpp"
#include "kernelrmt/rng.hpp"

namespace kernelrmt::lgraph {

namespace {

int next_index(int s, int l) { return s + 1 == l ? 0 : s + 1; }

std::string join(const std::vector<int>& v, const char* sep) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? sep : "") << v[i];
  return os.str();
}

std::vector<int> sorted(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  return v;
}

double falling(int n, int k) {
  if (k > n) return 0.0;
  double out = 1.0;
  for (int i = 0; i < k; ++i) out *= double(n - i);
  return out;
}

}  // namespace

std::optional<std::string> multi_violation(const MultiLabeling& ml, int max_degree) {
  const int l = ml.l();
  if (l < 2) return "l-graph needs l >= 2";
  if (int(ml.n.size()) != l) return "p-vertex and n-vertex counts differ";
  for (int s = 0; s < l; ++s) {
    if (ml.p[s] < 1) return "p-labels must be positive";
    if (ml.p[s] == ml.p[next_index(s, l)]) {
      return "adjacent p-vertices " + std::to_string(s + 1) + " and " + std::to_string(next_index(s, l) + 1) +
             " share label " + std::to_string(ml.p[s]);
    }
  }
  for (int s = 0; s < l; ++s) {
    const auto& t = ml.n[s];
    if (t.empty() || int(t.size()) > max_degree) {
      return "n-vertex " + std::to_string(s + 1) + " has " + std::to_string(t.size()) +
             " labels, allowed 1.." + std::to_string(max_degree);
    }
    for (int j : t)
      if (j < 1) return "n-labels must be positive";
    auto st = sorted(t);
    if (std::adjacent_find(st.begin(), st.end()) != st.end()) {
      return "n-vertex " + std::to_string(s + 1) + " repeats a label";
    }
  }
  for (const auto& [ij, count] : stats(ml).b) {
    if (count % 2 != 0) {
      return "pair (i=" + std::to_string(ij.first) + ", j=" + std::to_string(ij.second) + ") has " +
             std::to_string(count) + " edges";
    }
  }
  return std::nullopt;
}

std::optional<std::string> simple_violation(const SimpleLabeling& sl) {
  const int l = sl.l();
  if (l < 2) return "l-graph needs l >= 2";
  if (int(sl.n.size()) != l) return "p-vertex and n-vertex counts differ";
  for (int s = 0; s < l; ++s) {
    if (sl.p[s] < 1) return "p-labels must be positive";
    if (sl.n[s] < 0) return "n-labels must be positive or empty";
    if (sl.p[s] == sl.p[next_index(s, l)]) {
      return "adjacent p-vertices " + std::to_string(s + 1) + " and " + std::to_string(next_index(s, l) + 1) +
             " share label " + std::to_string(sl.p[s]);
    }
  }
  std::map<LabelPair, int> b, triples;
  for (int s = 0; s < l; ++s) {
    const int i = sl.p[s], i2 = sl.p[next_index(s, l)];
    if (sl.n[s] == kEmpty) {
      ++triples[{i, i2}];
    } else {
      ++b[{i, sl.n[s]}];
      ++b[{i2, sl.n[s]}];
    }
  }
  for (const auto& [ij, count] : b) {
    if (count % 2 != 0) {
      return "pair (i=" + std::to_string(ij.first) + ", j=" + std::to_string(ij.second) + ") has " +
             std::to_string(count) + " edges";
    }
  }
  for (const auto& [ii, count] : triples) {
    auto it = triples.find({ii.second, ii.first});
    int back = it == triples.end() ? 0 : it->second;
    if (back != count) {
      return "empty triples (" + std::to_string(ii.first) + ",-," + std::to_string(ii.second) + ") occur " +
             std::to_string(count) + " times but the reverse " + std::to_string(back) + " times";
    }
  }
  return std::nullopt;
}

void validate(const MultiLabeling& ml, int max_degree) {
  if (auto v = multi_violation(ml, max_degree)) throw ConfigError("invalid multi-labeling: " + *v);
}

void validate(const SimpleLabeling& sl) {
  if (auto v = simple_violation(sl)) throw ConfigError("invalid simple labeling: " + *v);
}

MultiStats stats(const MultiLabeling& ml) {
  MultiStats st;
  st.l = ml.l();
  std::set<int> ps(ml.p.begin(), ml.p.end());
  std::set<int> ns;
  for (int s = 0; s < st.l; ++s) {
    const int i = ml.p[s], i2 = ml.p[next_index(s, st.l)];
    st.d.push_back(int(ml.n[s].size()));
    st.sum_d += int(ml.n[s].size());
    for (int j : ml.n[s]) {
      ns.insert(j);
      ++st.N[j];
      ++st.b[{i, j}];
      ++st.b[{i2, j}];
    }
    ++st.P[{std::min(i, i2), std::max(i, i2)}];
  }
  st.r = int(ps.size());
  st.m = st.r + int(ns.size());
  st.twice_excess = st.l + st.sum_d + 2 - 2 * st.m;
  return st;
}

SimpleStats stats(const SimpleLabeling& sl) {
  SimpleStats st;
  st.l = sl.l();
  std::set<int> ps(sl.p.begin(), sl.p.end());
  std::set<int> ns;
  for (int j : sl.n) {
    if (j == kEmpty) continue;
    ++st.k;
    ns.insert(j);
  }
  st.r = int(ps.size());
  st.m = st.r + int(ns.size());
  st.twice_excess = st.l + st.k + 2 - 2 * st.m;
  return st;
}

int excess(const MultiLabeling& ml) {
  MultiStats st = stats(ml);
  if (st.parity_flag()) {
    throw InternalError("excess of " + key(ml) + " is the half-integer " + std::to_string(st.twice_excess) +
                        "/2 (l + sum d is odd)");
  }
  return st.twice_excess / 2;
}

MultiLabeling canonical(const MultiLabeling& ml) {
  std::map<int, int> pm, nm;
  MultiLabeling out;
  for (int i : ml.p) {
    auto [it, fresh] = pm.try_emplace(i, int(pm.size()) + 1);
    out.p.push_back(it->second);
  }
  for (const auto& t : ml.n) {
    std::vector<int> c;
    for (int j : t) c.push_back(nm.try_emplace(j, int(nm.size()) + 1).first->second);
    out.n.push_back(std::move(c));
  }
  return out;
}

SimpleLabeling canonical(const SimpleLabeling& sl) {
  std::map<int, int> pm, nm;
  SimpleLabeling out;
  for (int i : sl.p) out.p.push_back(pm.try_emplace(i, int(pm.size()) + 1).first->second);
  for (int j : sl.n) out.n.push_back(j == kEmpty ? kEmpty : nm.try_emplace(j, int(nm.size()) + 1).first->second);
  return out;
}

std::string key(const MultiLabeling& ml) {
  std::ostringstream os;
  os << "p=" << join(ml.p, ",") << ";n=";
  for (const auto& t : ml.n) os << "(" << join(t, ",") << ")";
  return os.str();
}

std::string key(const SimpleLabeling& sl) {
  std::ostringstream os;
  os << "p=" << join(sl.p, ",") << ";n=";
  for (std::size_t s = 0; s < sl.n.size(); ++s) {
    os << (s ? "," : "");
    if (sl.n[s] == kEmpty)
      os << "-";
    else
      os << sl.n[s];
  }
  return os.str();
}

namespace {

// Restricted-growth p-sequences with cyclically distinct neighbours.
std::vector<std::vector<int>> p_sequences(int l) {
  std::vector<std::vector<int>> out;
  std::vector<int> seq(l);
  auto rec = [&](auto&& self, int s, int used) -> void {
    if (s == l) {
      if (seq[l - 1] != seq[0]) out.push_back(seq);
      return;
    }
    for (int c = 1; c <= used + 1; ++c) {
      if (s > 0 && c == seq[s - 1]) continue;
      seq[s] = c;
      self(self, s + 1, std::max(used, c));
    }
  };
  seq[0] = 1;
  rec(rec, 1, 1);
  return out;
}

void check_enumeration_args(int l, int max_degree, const EnumerationCaps& caps) {
  if (l < 2) throw ConfigError("l-graph needs l >= 2 (got " + std::to_string(l) + ")");
  if (max_degree < 1) throw ConfigError("max degree D must be >= 1");
  if (l > caps.max_l || max_degree > caps.max_degree) {
    throw SizeError("enumeration capped at l <= " + std::to_string(caps.max_l) + ", D <= " +
                    std::to_string(caps.max_degree) + " (got l=" + std::to_string(l) +
                    ", D=" + std::to_string(max_degree) + ")");
  }
}

class MultiSearch {
 public:
  MultiSearch(int l, const EnumerationCaps& caps, std::vector<MultiLabeling>& out)
      : l_(l), caps_(caps), out_(out) {}

  void run(const std::vector<int>& p, const std::vector<int>& d) {
    p_ = p;
    ml_.p = p;
    ml_.n.assign(l_, {});
    slots_.clear();
    for (int s = 0; s < l_; ++s)
      for (int t = 0; t < d[s]; ++t) slots_.push_back(s);
    count_.assign(slots_.size() + 1, 0);
    mask_.assign(slots_.size() + 1, 0u);
    odd_ = 0;
    step(0, 0);
  }

 private:
  void step(std::size_t slot, int used) {
    if (++nodes_ > caps_.max_nodes) {
      throw SizeError("multi-labeling search exceeded " + std::to_string(caps_.max_nodes) + " nodes");
    }
    const int remaining = int(slots_.size() - slot);
    if (odd_ > remaining) return;
    if (slot == slots_.size()) {
      if (odd_ == 0) out_.push_back(ml_);
      return;
    }
    const int s = slots_[slot];
    const unsigned toggle = (1u << p_[s]) ^ (1u << p_[next_index(s, l_)]);
    auto& tuple = ml_.n[s];
    for (int j = 1; j <= used + 1; ++j) {
      if (std::find(tuple.begin(), tuple.end(), j) != tuple.end()) continue;
      const bool was_odd = mask_[j] != 0;
      mask_[j] ^= toggle;
      ++count_[j];
      odd_ += int(mask_[j] != 0) - int(was_odd);
      tuple.push_back(j);
      step(slot + 1, std::max(used, j));
      tuple.pop_back();
      odd_ -= int(mask_[j] != 0) - int(was_odd);
      --count_[j];
      mask_[j] ^= toggle;
    }
  }

  int l_;
  const EnumerationCaps& caps_;
  std::vector<MultiLabeling>& out_;
  std::vector<int> p_;
  MultiLabeling ml_;
  std::vector<int> slots_;
  std::vector<int> count_;
  std::vector<unsigned> mask_;  // parity of b_ij over p-labels, one bit each
  int odd_ = 0;
  std::int64_t nodes_ = 0;
};

}  // namespace

std::vector<MultiLabeling> enumerate_multilabelings(int l, int max_degree, const EnumerationCaps& caps) {
  check_enumeration_args(l, max_degree, caps);
  std::vector<MultiLabeling> out;
  MultiSearch search(l, caps, out);
  std::vector<int> d(l, 1);
  for (const auto& p : p_sequences(l)) {
    std::fill(d.begin(), d.end(), 1);
    while (true) {
      search.run(p, d);
      int s = 0;
      while (s < l && d[s] == max_degree) d[s++] = 1;
      if (s == l) break;
      ++d[s];
    }
  }
  return out;
}

std::vector<SimpleLabeling> enumerate_simple_labelings(int l, const EnumerationCaps& caps) {
  check_enumeration_args(l, 1, caps);
  std::vector<SimpleLabeling> out;
  std::int64_t nodes = 0;
  for (const auto& p : p_sequences(l)) {
    SimpleLabeling sl{p, std::vector<int>(l, kEmpty)};
    auto rec = [&](auto&& self, int s, int used) -> void {
      if (++nodes > caps.max_nodes) {
        throw SizeError("simple-labeling search exceeded " + std::to_string(caps.max_nodes) + " nodes");
      }
      if (s == l) {
        if (!simple_violation(sl)) out.push_back(sl);
        return;
      }
      for (int j = 0; j <= used + 1; ++j) {
        sl.n[s] = j;
        self(self, s + 1, std::max(used, j));
      }
    };
    rec(rec, 0, 0);
  }
  return out;
}

VertexClassification classify_vertices(const MultiLabeling& ml) {
  const int l = ml.l();
  std::map<int, int> N;
  std::map<int, bool> only_single;
  for (const auto& t : ml.n) {
    for (int j : t) {
      ++N[j];
      auto [it, fresh] = only_single.try_emplace(j, true);
      it->second = it->second && t.size() == 1;
    }
  }
  VertexClassification vc{std::vector<VertexKind>(l, VertexKind::bad_non_single), std::vector<int>(l, -1)};
  for (int s = 0; s < l; ++s) {
    const auto& t = ml.n[s];
    if (t.size() == 1) {
      vc.kind[s] = only_single[t[0]] ? VertexKind::good_single : VertexKind::bad_single;
      continue;
    }
    bool twice = std::all_of(t.begin(), t.end(), [&](int j) { return N[j] == 2; });
    if (!twice) continue;
    const auto mine = sorted(t);
    for (int u = 0; u < l; ++u) {
      if (u != s && ml.n[u].size() > 1 && sorted(ml.n[u]) == mine) {
        vc.kind[s] = VertexKind::good_pair;
        vc.partner[s] = u;
        break;
      }
    }
  }
  return vc;
}

MultiLabeling resolve_improper_pairs(const MultiLabeling& ml) {
  const int l = ml.l();
  MultiLabeling cur = ml;
  for (int iter = 0; iter <= l; ++iter) {
    VertexClassification vc = classify_vertices(cur);
    int best_s = -1, best_u = -1;
    std::vector<int> best_tuple;
    for (int s = 0; s < l; ++s) {
      const int u = vc.partner[s];
      if (u <= s) continue;
      const bool improper = cur.p[s] == cur.p[u] && cur.p[next_index(s, l)] == cur.p[next_index(u, l)];
      if (!improper) continue;
      auto t = sorted(cur.n[s]);
      if (best_s < 0 || t < best_tuple) {
        best_s = s;
        best_u = u;
        best_tuple = t;
      }
    }
    if (best_s < 0) return cur;
    // Cycle positions: P_s at 2s, N_s at 2s + 1. Reverse from the p-vertex after
    // V through the p-vertex after V'.
    const int len = 2 * l;
    const int from = 2 * best_s + 2;
    const int to = 2 * best_u + 2;
    std::vector<int> pos;
    for (int q = from; q <= to; ++q) pos.push_back(q % len);
    struct Slot {
      int p = 0;
      std::vector<int> n;
    };
    std::vector<Slot> vals;
    for (int q : pos) {
      if (q % 2 == 0)
        vals.push_back({cur.p[q / 2], {}});
      else
        vals.push_back({0, cur.n[q / 2]});
    }
    std::reverse(vals.begin(), vals.end());
    for (std::size_t k = 0; k < pos.size(); ++k) {
      const int q = pos[k];
      if (q % 2 == 0)
        cur.p[q / 2] = vals[k].p;
      else
        cur.n[q / 2] = vals[k].n;
    }
  }
  throw InternalError("improper good pairs did not resolve for " + key(ml));
}

SimpleLabeling label_simplifying_map(const MultiLabeling& ml) {
  MultiLabeling cur = resolve_improper_pairs(ml);
  VertexClassification vc = classify_vertices(cur);
  int fresh = 0;
  for (const auto& t : cur.n)
    for (int j : t) fresh = std::max(fresh, j);
  ++fresh;
  SimpleLabeling out{cur.p, std::vector<int>(cur.l(), kEmpty)};
  for (int s = 0; s < cur.l(); ++s) {
    switch (vc.kind[s]) {
      case VertexKind::good_single: out.n[s] = cur.n[s][0]; break;
      case VertexKind::good_pair: out.n[s] = kEmpty; break;
      case VertexKind::bad_single:
      case VertexKind::bad_non_single: out.n[s] = fresh; break;
    }
  }
  return canonical(out);
}

LemmaReport verify_lemmas(const std::vector<MultiLabeling>& classes, int max_degree) {
  LemmaReport rep;
  rep.max_degree = max_degree;
  rep.classes = int(classes.size());
  std::set<int> ls;
  auto flag = [&](const char* check, const std::string& k, const std::string& detail) {
    rep.violations.push_back({check, k, detail});
  };
  for (const auto& ml : classes) {
    const std::string k = key(ml);
    ls.insert(ml.l());
    rep.l = std::max(rep.l, ml.l());
    if (auto v = multi_violation(ml, max_degree)) {
      flag("valid_input", k, *v);
      continue;
    }
    const MultiStats st = stats(ml);
    const int tw = st.twice_excess;
    rep.zero_excess_classes += tw == 0;
    rep.half_integer_classes += st.parity_flag();

    if (tw < 0) flag("distinct_label_bound", k, "m=" + std::to_string(st.m) + " exceeds (l+sum d)/2+1");

    int heavy = 0;
    for (const auto& [ij, c] : st.b)
      if (c > 2) heavy += c;
    if (2 * heavy > 12 * tw) flag("heavy_edge_bound", k, "sum b_ij>2 = " + std::to_string(heavy));
    if (tw == 0) {
      for (const auto& [ij, c] : st.b)
        if (c != 0 && c != 2) flag("zero_excess_b", k, "b=" + std::to_string(c));
    }

    int repeated = 0;
    for (const auto& [j, c] : st.N) {
      if (c < 2) flag("n_label_twice", k, "label " + std::to_string(j) + " appears once");
      if (c >= 3) repeated += c;
    }
    if (2 * st.r <= st.l && 2 * repeated > 6 * tw - 12) {
      flag("few_p_labels_bound", k, "sum N_j>=3 = " + std::to_string(repeated));
    }

    int busy = 0;
    for (const auto& [ii, c] : st.P)
      if (c >= 3) busy += c;
    if (2 * busy > 42 * tw) flag("consecutive_pair_bound", k, "sum P>=3 = " + std::to_string(busy));

    SimpleLabeling sl;
    try {
      sl = label_simplifying_map(ml);
    } catch (const Error& e) {
      flag("map_runs", k, e.what());
      continue;
    }
    if (auto v = simple_violation(sl)) {
      flag("map_output_valid", k, *v + " in " + key(sl));
      continue;
    }
    ++rep.map_outputs_valid;
    const SimpleStats ss = stats(sl);
    if (ss.r == st.r)
      ++rep.r_preserved;
    else
      flag("map_preserves_r", k, "r=" + std::to_string(st.r) + " -> " + std::to_string(ss.r));
    if (ss.twice_excess < 0) flag("simple_distinct_label_bound", key(sl), "from " + k);
    if (ss.twice_excess > 97 * max_degree * tw) {
      flag("map_excess_bound", k, "excess " + std::to_string(ss.excess_value()) + " from " +
                                     std::to_string(st.excess_value()));
    }
    if (tw == 0) {
      if (ss.twice_excess == 0)
        ++rep.zero_to_zero;
      else
        flag("zero_excess_image", k, key(sl) + " has excess " + std::to_string(ss.excess_value()));
    }
  }
  for (int l : ls) {
    for (const auto& sl : enumerate_simple_labelings(l)) {
      ++rep.simple_classes;
      if (stats(sl).twice_excess < 0) flag("simple_distinct_label_bound", key(sl), "enumerated class");
    }
  }
  return rep;
}

std::vector<Violation> check_zero_excess_weights(const std::vector<MultiLabeling>& classes,
                                                 const std::vector<double>& coeffs, double tol) {
  std::vector<Violation> out;
  if (coeffs.size() < 2) throw ConfigError("weight check needs coefficients a_1..a_D");
  const int D = int(coeffs.size()) - 1;
  double tail = 0.0;
  for (int d = 2; d <= D; ++d) tail += coeffs[d] * coeffs[d];
  std::map<std::string, double> sums;
  std::set<int> ls;
  for (const auto& ml : classes) {
    ls.insert(ml.l());
    const MultiStats st = stats(ml);
    if (st.twice_excess != 0) continue;
    double w = 1.0;
    for (int d : st.d) w *= d <= D ? std::abs(coeffs[d]) / std::sqrt(std::tgamma(d + 1.0)) : 0.0;
    sums[key(label_simplifying_map(ml))] += w;
  }
  for (int l : ls) {
    for (const auto& sl : enumerate_simple_labelings(l)) {
      const SimpleStats ss = stats(sl);
      if (ss.twice_excess != 0) continue;
      const double target = std::pow(std::abs(coeffs[1]), ss.k) * std::pow(tail, 0.5 * (l - ss.k));
      const double got = sums.count(key(sl)) ? sums[key(sl)] : 0.0;
      if (std::abs(got - target) > tol * std::max(1.0, std::abs(target))) {
        std::ostringstream os;
        os.precision(17);
        os << "weight sum " << got << " vs " << target;
        out.push_back({"zero_excess_weight", key(sl), os.str()});
      }
    }
  }
  return out;
}

namespace {

void check_trace_args(int l, int n, int p, const std::vector<double>& coeffs) {
  if (l < 2 || n < 1 || p < 2) throw ConfigError("trace moment needs l >= 2, n >= 1, p >= 2");
  if (coeffs.size() < 2) throw ConfigError("trace moment needs coefficients a_1..a_D");
  const int D = int(coeffs.size()) - 1;
  if (l > kTraceMaxL || n > kTraceMaxN || p > kTraceMaxP || D > kTraceMaxDegree) {
    std::ostringstream os;
    os << "exact trace moment capped at l <= " << kTraceMaxL << ", n <= " << kTraceMaxN << ", p <= " << kTraceMaxP
       << ", D <= " << kTraceMaxDegree << " (got l=" << l << ", n=" << n << ", p=" << p << ", D=" << D << ")";
    throw SizeError(os.str());
  }
}

// a_d sqrt(d! / n^d) / sqrt(n)
std::vector<double> degree_factors(const std::vector<double>& coeffs, int n) {
  std::vector<double> f(coeffs.size(), 0.0);
  for (std::size_t d = 1; d < coeffs.size(); ++d) {
    f[d] = coeffs[d] * std::sqrt(std::tgamma(double(d) + 1.0) / std::pow(double(n), double(d))) /
           std::sqrt(double(n));
  }
  return f;
}

}  // namespace

double exact_trace_moment(int l, int n, int p, const std::vector<double>& coeffs, const EntryLaw& law) {
  check_trace_args(l, n, p, coeffs);
  const int D = int(coeffs.size()) - 1;
  const int base = D + 1;
  int size = 1;
  for (int s = 0; s < l; ++s) size *= base;
  const int subsets = 1 << l;
  const std::vector<double> factor = degree_factors(coeffs, n);
  std::vector<double> moments(2 * l + 1);
  for (int k = 0; k <= 2 * l; ++k) moments[k] = law.moment(k);

  std::vector<int> stride(l);
  for (int s = 0, st = 1; s < l; ++s, st *= base) stride[s] = st;
  std::vector<int> digit(size * l);
  for (int e = 0; e < size; ++e)
    for (int s = 0, x = e; s < l; ++s, x /= base) digit[e * l + s] = x % base;

  std::vector<int> idx(l, 0);
  std::vector<double> column(subsets), poly(size), next(size);
  double total = 0.0;
  while (true) {
    bool ok = true;
    for (int s = 0; s < l; ++s) ok = ok && idx[s] != idx[next_index(s, l)];
    if (ok) {
      // one-column expectation E[prod_{s in S} x_{i_s} x_{i_{s+1}}]
      for (int S = 0; S < subsets; ++S) {
        std::vector<int> deg(p, 0);
        for (int s = 0; s < l; ++s) {
          if (!(S >> s & 1)) continue;
          ++deg[idx[s]];
          ++deg[idx[next_index(s, l)]];
        }
        double c = 1.0;
        for (int i = 0; i < p; ++i) c *= moments[deg[i]];
        column[S] = c;
      }
      std::fill(poly.begin(), poly.end(), 0.0);
      poly[0] = 1.0;
      for (int j = 0; j < n; ++j) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int e = 0; e < size; ++e) {
          if (poly[e] == 0.0) continue;
          for (int S = 0; S < subsets; ++S) {
            if (column[S] == 0.0) continue;
            int target = e;
            bool inside = true;
            for (int s = 0; s < l && inside; ++s) {
              if (!(S >> s & 1)) continue;
              if (digit[e * l + s] == D) inside = false;
              target += stride[s];
            }
            if (inside) next[target] += column[S] * poly[e];
          }
        }
        std::swap(poly, next);
      }
      for (int e = 0; e < size; ++e) {
        double w = poly[e];
        for (int s = 0; s < l && w != 0.0; ++s) w *= factor[digit[e * l + s]];
        total += w;
      }
    }
    int s = 0;
    while (s < l && idx[s] == p - 1) idx[s++] = 0;
    if (s == l) break;
    ++idx[s];
  }
  return total;
}

double class_trace_moment(const std::vector<MultiLabeling>& classes, int n, int p,
                          const std::vector<double>& coeffs, const EntryLaw& law) {
  if (coeffs.size() < 2) throw ConfigError("trace moment needs coefficients a_1..a_D");
  const int D = int(coeffs.size()) - 1;
  const std::vector<double> factor = degree_factors(coeffs, n);
  double total = 0.0;
  for (const auto& ml : classes) {
    const MultiStats st = stats(ml);
    double w = falling(p, st.r) * falling(n, st.m - st.r);
    if (w == 0.0) continue;
    // ordered tuples: each n-label set is counted d! times
    for (int d : st.d) w *= d <= D ? factor[d] / std::tgamma(d + 1.0) : 0.0;
    for (const auto& [ij, c] : st.b) w *= law.moment(c);
    total += w;
  }
  return total;
}

TraceEstimate monte_carlo_trace_moment(int l, int n, int p, const std::vector<double>& coeffs,
                                       const EntryLaw& law, int trials, std::uint64_t seed) {
  if (trials < 2) throw ConfigError("Monte Carlo trace moment needs trials >= 2");
  if (l < 1 || n < 2 || p < 2 || coeffs.size() < 2) throw ConfigError("Monte Carlo trace moment: bad sizes");
  detail::check_kernel_dimension(p);
  const int D = int(coeffs.size()) - 1;
  const std::vector<double> factor = degree_factors(coeffs, n);
  double mean = 0.0, m2 = 0.0;
  Eigen::MatrixXd Q(p, p);
  for (int t = 0; t < trials; ++t) {
    Eigen::MatrixXd X = sample_data({n, p, law, derive_seed(seed, std::uint64_t(t))});
    Q.setZero();
    for (int i = 0; i < p; ++i) {
      for (int i2 = i + 1; i2 < p; ++i2) {
        Eigen::VectorXd z = X.row(i).cwiseProduct(X.row(i2)).transpose();
        Eigen::VectorXd e = elementary_symmetric(z, D, false);
        double q = 0.0;
        for (int d = 1; d <= D; ++d) q += factor[d] * e(d);
        Q(i, i2) = Q(i2, i) = q;
      }
    }
    Eigen::MatrixXd power = Q;
    for (int k = 1; k < l; ++k) power = power * Q;
    const double value = power.trace();
    // Welford
    const double delta = value - mean;
    mean += delta / (t + 1);
    m2 += delta * (value - mean);
  }
  return {mean, std::sqrt(m2 / (trials - 1) / trials), trials};
}

nlohmann::json census_json(const std::vector<MultiLabeling>& classes) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& ml : classes) {
    const MultiStats st = stats(ml);
    nlohmann::json c;
    c["key"] = key(ml);
    c["l"] = st.l;
    c["D"] = st.d.empty() ? 0 : *std::max_element(st.d.begin(), st.d.end());
    c["m"] = st.m;
    c["r"] = st.r;
    c["d"] = st.d;
    if (st.parity_flag())
      c["excess"] = st.excess_value();
    else
      c["excess"] = st.twice_excess / 2;
    c["half_integer_excess"] = st.parity_flag();
    nlohmann::json b = nlohmann::json::array();
    for (const auto& [ij, v] : st.b) b.push_back({ij.first, ij.second, v});
    c["b"] = b;
    nlohmann::json N = nlohmann::json::array();
    for (const auto& [j, v] : st.N) N.push_back({j, v});
    c["N"] = N;
    nlohmann::json P = nlohmann::json::array();
    for (const auto& [ii, v] : st.P) P.push_back({ii.first, ii.second, v});
    c["P"] = P;
    out.push_back(std::move(c));
  }
  return out;
}

nlohmann::json report_json(const LemmaReport& r) {
  nlohmann::json out;
  out["l"] = r.l;
  out["D"] = r.max_degree;
  out["classes"] = r.classes;
  out["zero_excess_classes"] = r.zero_excess_classes;
  out["half_integer_classes"] = r.half_integer_classes;
  out["map_outputs_valid"] = r.map_outputs_valid;
  out["r_preserved"] = r.r_preserved;
  out["zero_to_zero"] = r.zero_to_zero;
  out["simple_classes"] = r.simple_classes;
  nlohmann::json v = nlohmann::json::array();
  for (const auto& x : r.violations) v.push_back({{"check", x.check}, {"key", x.key}, {"detail", x.detail}});
  out["violations"] = v;
  out["ok"] = r.ok();
  return out;
}

MultiLabeling worked_example() { return {{1, 2, 1, 3}, {{1, 2, 3}, {1, 2, 3}, {4}, {4}}}; }

}  // namespace kernelrmt::lgraph
