#include "flipflow/quotients.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "flipflow/errors.hpp"

namespace flipflow {

namespace {

std::vector<int> parse_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    if (first == std::string::npos) throw InvalidArgument("empty weight in \"" + text + "\"");
    const auto last = item.find_last_not_of(" \t");
    item = item.substr(first, last - first + 1);
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      throw InvalidArgument("weight \"" + item + "\" is not an integer");
    }
    if (used != item.size()) throw InvalidArgument("weight \"" + item + "\" is not an integer");
    out.push_back(v);
  }
  return out;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s;
}

int gcd_of(const std::vector<int>& v, std::optional<std::size_t> skip = std::nullopt) {
  int g = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (skip && *skip == i) continue;
    g = std::gcd(g, v[i]);
  }
  return g;
}

bool all_ones(const std::vector<int>& v) {
  return std::all_of(v.begin(), v.end(), [](int x) { return x == 1; });
}

std::vector<Chart> side_charts(Side side, const std::vector<int>& own,
                               const std::vector<int>& other) {
  std::vector<Chart> out;
  for (std::size_t i = 0; i < own.size(); ++i) {
    Chart c;
    c.side = side;
    c.index = static_cast<int>(i);
    c.group_order = own[i];
    for (std::size_t k = 0; k < own.size(); ++k) {
      if (k != i) c.residual_weights.push_back(own[k] % own[i]);
    }
    for (int w : other) c.residual_weights.push_back(w % own[i]);
    c.smooth = own[i] == 1 || std::all_of(c.residual_weights.begin(), c.residual_weights.end(),
                                          [](int r) { return r == 0; });
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

QuotientWeights QuotientWeights::parse(const std::string& text) {
  const auto semi = text.find(';');
  if (semi == std::string::npos || text.find(';', semi + 1) != std::string::npos) {
    throw InvalidArgument("weights must look like \"a0,a1,...;b0,b1,...\"");
  }
  QuotientWeights w;
  const std::string left = text.substr(0, semi);
  const std::string right = text.substr(semi + 1);
  if (left.find_first_not_of(" \t") == std::string::npos ||
      right.find_first_not_of(" \t") == std::string::npos) {
    throw EmptyWeights("both weight lists must be nonempty");
  }
  w.a = parse_list(left);
  w.b = parse_list(right);
  return w;
}

std::string QuotientWeights::to_string() const { return join(a) + ";" + join(b); }

AdmissibilityReport validate_weights(const QuotientWeights& w) {
  if (w.a.empty() || w.b.empty()) throw EmptyWeights("both weight lists must be nonempty");
  for (int v : w.a) {
    if (v < 1) throw InvalidArgument("weights must be positive integers");
  }
  for (int v : w.b) {
    if (v < 1) throw InvalidArgument("weights must be positive integers");
  }
  std::vector<int> all = w.a;
  all.insert(all.end(), w.b.begin(), w.b.end());

  AdmissibilityReport r;
  r.gcd = gcd_of(all);
  r.admissible = r.gcd == 1;
  r.strongly_admissible = r.admissible;
  if (r.admissible) {
    for (std::size_t i = 0; i < all.size(); ++i) {
      if (gcd_of(all, i) != 1) {
        r.strongly_admissible = false;
        r.offending_index = static_cast<int>(i);
        break;
      }
    }
  }
  return r;
}

std::vector<Chart> charts(const QuotientWeights& w) {
  validate_weights(w);
  std::vector<Chart> out = side_charts(Side::minus, w.a, w.b);
  std::vector<Chart> plus = side_charts(Side::plus, w.b, w.a);
  out.insert(out.end(), plus.begin(), plus.end());
  return out;
}

std::string to_string(BirationalKind k) {
  switch (k) {
    case BirationalKind::divisorial_contraction:
      return "DivisorialContraction";
    case BirationalKind::flip:
      return "Flip";
    case BirationalKind::flop:
      return "Flop";
  }
  return "?";
}

std::string SplitBundle::label() const {
  if (base_dim == 0) return "C^" + std::to_string(twists.size());
  std::string s;
  for (std::size_t k = 0; k < twists.size(); ++k) {
    if (k) s += " + ";
    s += "O_P^" + std::to_string(base_dim) + "(-" + std::to_string(twists[k]) + ")";
  }
  return s;
}

std::string weighted_projective_label(const std::vector<int>& weights) {
  return "P^" + std::to_string(weights.size() - 1) + "_(" + join(weights) + ")";
}

QuotientReport classify(const QuotientWeights& w) {
  QuotientReport r;
  r.weights = w;
  r.admissibility = validate_weights(w);
  if (!r.admissibility.admissible) {
    throw InvalidArgument("weights share the common factor " +
                          std::to_string(r.admissibility.gcd));
  }
  std::vector<int> sa = w.a, sb = w.b;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  if (w.m() == w.l() && sa == sb) {
    r.kind = BirationalKind::flop;
  } else if (w.l() == 0 || w.m() == 0) {
    r.kind = BirationalKind::divisorial_contraction;
  } else {
    r.kind = BirationalKind::flip;
  }

  r.fixed_minus = w.a;
  r.fixed_plus = w.b;
  r.charts_minus = side_charts(Side::minus, w.a, w.b);
  r.charts_plus = side_charts(Side::plus, w.b, w.a);
  auto smooth = [](const std::vector<Chart>& cs) {
    return std::all_of(cs.begin(), cs.end(), [](const Chart& c) { return c.smooth; });
  };
  r.smooth_minus = smooth(r.charts_minus);
  r.smooth_plus = smooth(r.charts_plus);

  // Over an unweighted P^m the y's have degrees -b_j, and symmetrically.
  if (all_ones(w.a)) r.bundle_minus = SplitBundle{w.m(), w.b};
  if (all_ones(w.b)) r.bundle_plus = SplitBundle{w.l(), w.a};
  return r;
}

double upsilon(const QuotientWeights& w, const std::vector<double>& x,
               const std::vector<double>& y) {
  if (x.size() != w.a.size() || y.size() != w.b.size()) {
    throw DimensionMismatch("upsilon: expected " + std::to_string(w.a.size()) + " x and " +
                            std::to_string(w.b.size()) + " y magnitudes");
  }
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sx += std::pow(std::abs(x[i]), 2.0 / w.a[i]);
  for (std::size_t j = 0; j < y.size(); ++j) sy += std::pow(std::abs(y[j]), 2.0 / w.b[j]);
  return sx * sy;
}

}  // namespace flipflow
