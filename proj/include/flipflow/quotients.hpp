#pragma once

// Local models of C*-quotients: C* acts on C^{m+1} × C^{l+1} with weights
// a_i on the x's and -b_j on the y's. The two GIT quotients contain the
// weighted projective spaces P^m_(a) and P^l_(b) as exceptional loci.
// All arithmetic is on integers.

#include <optional>
#include <string>
#include <vector>

namespace flipflow {

struct QuotientWeights {
  std::vector<int> a;  // m + 1 weights
  std::vector<int> b;  // l + 1 weights

  int m() const { return static_cast<int>(a.size()) - 1; }
  int l() const { return static_cast<int>(b.size()) - 1; }

  // "a0,a1,...;b0,b1,..."
  static QuotientWeights parse(const std::string& text);
  std::string to_string() const;
};

struct AdmissibilityReport {
  int gcd = 1;
  bool admissible = false;
  bool strongly_admissible = false;
  // Position in the concatenated list (a then b) whose removal leaves a
  // common factor; set only when strong admissibility fails.
  std::optional<int> offending_index;
};

// Throws EmptyWeights for an empty list, InvalidArgument for weights < 1.
AdmissibilityReport validate_weights(const QuotientWeights& w);

enum class Side { minus, plus };

struct Chart {
  Side side = Side::minus;
  int index = 0;                    // i for {x_i != 0}, j for {y_j != 0}
  int group_order = 1;              // a_i or b_j
  std::vector<int> residual_weights;  // the other m+l+1 weights reduced mod the order
  bool smooth = true;
};

// Charts {x_i != 0} followed by charts {y_j != 0}.
std::vector<Chart> charts(const QuotientWeights& w);

enum class BirationalKind { divisorial_contraction, flip, flop };

std::string to_string(BirationalKind k);

// ⊕ O_{P^d}(-t_k) over an unweighted base; a point base (d = 0) is C^{rank}.
struct SplitBundle {
  int base_dim = 0;
  std::vector<int> twists;  // t_k > 0
  std::string label() const;
};

struct QuotientReport {
  QuotientWeights weights;
  AdmissibilityReport admissibility;
  BirationalKind kind = BirationalKind::flip;
  std::vector<int> fixed_minus;  // weights of P^m_(a)
  std::vector<int> fixed_plus;   // weights of P^l_(b)
  std::vector<Chart> charts_minus;
  std::vector<Chart> charts_plus;
  bool smooth_minus = true;
  bool smooth_plus = true;
  // Normal bundle of the exceptional locus when its base is unweighted.
  std::optional<SplitBundle> bundle_minus;
  std::optional<SplitBundle> bundle_plus;
};

// Throws InvalidArgument for weights that fail basic admissibility.
QuotientReport classify(const QuotientWeights& w);

std::string weighted_projective_label(const std::vector<int>& weights);

// (Σ |x_i|^{2/a_i}) (Σ |y_j|^{2/b_j}); throws DimensionMismatch.
double upsilon(const QuotientWeights& w, const std::vector<double>& x,
               const std::vector<double>& y);

}  // namespace flipflow
